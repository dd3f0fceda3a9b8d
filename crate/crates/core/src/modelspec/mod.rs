//! Elementary systems as data: an expression language for vector fields and
//! readouts, a JSON model format, and a registry of builtin models.

mod builtins;
mod expr;
mod spec;

pub use builtins::{builtin, builtin_names, builtin_params};
pub use expr::{parse, BinOp, EvalError, Expr, Func, ParseError};
pub use spec::{Model, ModelSpec, SpecError, SystemKind};
