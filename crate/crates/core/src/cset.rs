//! Finitely presented schemas and their finite copresheaf instances.
//!
//! An instance is a table per object (only its cardinality matters, since
//! sets are skeletal) and a foreign-key column per generating morphism.
//! Instances may be built in an invalid state; [`CSetInstance::validate`]
//! reports every out-of-range entry.

use std::fmt;
use std::sync::{Arc, LazyLock};

use serde_json::{Map, Value};
use thiserror::Error;

use crate::finset::{self, FinFunction, FinSetError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CSetError {
    #[error("schema `{0}`: duplicate name `{1}`")]
    DuplicateName(String, String),
    #[error("schema `{schema}`: morphism `{morphism}` references unknown object `{object}`")]
    UnknownObject { schema: String, morphism: String, object: String },
    #[error("schema `{schema}` has no object or morphism `{name}`")]
    UnknownName { schema: String, name: String },
    #[error("instance is over schema `{actual}`, expected `{expected}`")]
    SchemaMismatch { expected: String, actual: String },
    #[error("functor: {0}")]
    Functor(String),
    #[error("leg component for object `{object}`: {reason}")]
    Leg { object: String, reason: String },
    #[error("leg is not natural at morphism `{morphism}`, row {row}")]
    Naturality { morphism: String, row: usize },
    #[error("induced map for morphism `{morphism}` is ill-defined at apex row {row}")]
    Gluing { morphism: String, row: usize },
    #[error("instance has {} violation(s): {}", .0.len(), .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("json: {0}")]
    Json(String),
    #[error(transparent)]
    FinSet(#[from] FinSetError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub name: String,
    pub dom: usize,
    pub cod: usize,
}

/// A free category on a finite graph: named objects and generating morphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    name: String,
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
}

impl Schema {
    pub fn new(name: &str, objects: &[&str], morphisms: &[(&str, &str, &str)]) -> Result<Self, CSetError> {
        let objects: Vec<String> = objects.iter().map(|s| s.to_string()).collect();
        let mut seen = std::collections::HashSet::new();
        for n in objects.iter().map(String::as_str).chain(morphisms.iter().map(|m| m.0)) {
            if !seen.insert(n) {
                return Err(CSetError::DuplicateName(name.into(), n.into()));
            }
        }
        let find = |morphism: &str, object: &str| {
            objects.iter().position(|o| o == object).ok_or_else(|| CSetError::UnknownObject {
                schema: name.into(),
                morphism: morphism.into(),
                object: object.into(),
            })
        };
        let morphisms = morphisms
            .iter()
            .map(|&(m, d, c)| Ok(Morphism { name: m.into(), dom: find(m, d)?, cod: find(m, c)? }))
            .collect::<Result<_, CSetError>>()?;
        Ok(Self { name: name.into(), objects, morphisms })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn object(&self, name: &str) -> Result<usize, CSetError> {
        self.objects.iter().position(|o| o == name).ok_or_else(|| self.unknown(name))
    }

    pub fn morphism(&self, name: &str) -> Result<usize, CSetError> {
        self.morphisms.iter().position(|m| m.name == name).ok_or_else(|| self.unknown(name))
    }

    fn unknown(&self, name: &str) -> CSetError {
        CSetError::UnknownName { schema: self.name.clone(), name: name.into() }
    }
}

pub static UWD: LazyLock<Arc<Schema>> = LazyLock::new(|| {
    Arc::new(
        Schema::new(
            "UWD",
            &["B", "P", "J", "Q"],
            &[("box", "P", "B"), ("junc_in", "P", "J"), ("junc_out", "Q", "J")],
        )
        .unwrap(),
    )
});

pub static DWD: LazyLock<Arc<Schema>> = LazyLock::new(|| {
    Arc::new(
        Schema::new(
            "DWD",
            &["B", "P_in", "P_out", "Q_in", "Q_out", "W_in", "W", "W_out"],
            &[
                ("src", "W", "P_out"),
                ("tgt", "W", "P_in"),
                ("box_in", "P_in", "B"),
                ("box_out", "P_out", "B"),
                ("src_in", "W_in", "Q_in"),
                ("tgt_in", "W_in", "P_in"),
                ("src_out", "W_out", "P_out"),
                ("tgt_out", "W_out", "Q_out"),
            ],
        )
        .unwrap(),
    )
});

pub static CPG: LazyLock<Arc<Schema>> = LazyLock::new(|| {
    Arc::new(
        Schema::new(
            "CPG",
            &["B", "P", "Q", "W"],
            &[("src", "W", "P"), ("tgt", "W", "P"), ("box", "P", "B"), ("expose", "Q", "P")],
        )
        .unwrap(),
    )
});

/// Looks up one of the built-in schemas by name.
pub fn builtin_schema(name: &str) -> Option<Arc<Schema>> {
    match name {
        "UWD" => Some(UWD.clone()),
        "DWD" => Some(DWD.clone()),
        "CPG" => Some(CPG.clone()),
        _ => None,
    }
}

/// An out-of-range or mis-sized foreign-key column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ColumnLength { morphism: String, expected: usize, actual: usize },
    OutOfRange { morphism: String, row: usize, value: usize, card: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ColumnLength { morphism, expected, actual } => {
                write!(f, "{morphism}: column has {actual} rows, expected {expected}")
            }
            Violation::OutOfRange { morphism, row, value, card } => {
                write!(f, "{morphism}[{row}] = {value} is out of range (codomain has {card} rows)")
            }
        }
    }
}

/// A finite instance of a schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CSetInstance {
    schema: Arc<Schema>,
    card: Vec<usize>,
    columns: Vec<Vec<usize>>,
}

impl CSetInstance {
    /// The instance with every table empty.
    pub fn empty(schema: Arc<Schema>) -> Self {
        let card = vec![0; schema.objects.len()];
        let columns = vec![Vec::new(); schema.morphisms.len()];
        Self { schema, card, columns }
    }

    /// Builds an instance from cardinalities and columns given by name.
    /// Missing objects have cardinality 0 and missing columns are empty.
    /// No validation is performed.
    pub fn from_parts(
        schema: Arc<Schema>,
        card: &[(&str, usize)],
        columns: &[(&str, Vec<usize>)],
    ) -> Result<Self, CSetError> {
        let mut x = Self::empty(schema);
        for &(o, n) in card {
            let i = x.schema.object(o)?;
            x.card[i] = n;
        }
        for (m, col) in columns {
            let i = x.schema.morphism(m)?;
            x.columns[i] = col.clone();
        }
        Ok(x)
    }

    pub(crate) fn from_raw(schema: Arc<Schema>, card: Vec<usize>, columns: Vec<Vec<usize>>) -> Self {
        debug_assert_eq!(card.len(), schema.objects.len());
        debug_assert_eq!(columns.len(), schema.morphisms.len());
        Self { schema, card, columns }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn card(&self, object: &str) -> usize {
        self.card[self.schema.object(object).expect("object of schema")]
    }

    pub fn cards(&self) -> &[usize] {
        &self.card
    }

    pub fn column(&self, morphism: &str) -> &[usize] {
        &self.columns[self.schema.morphism(morphism).expect("morphism of schema")]
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    /// The column of `morphism` as a total function; fails if invalid.
    pub fn hom(&self, morphism: &str) -> Result<FinFunction, CSetError> {
        let i = self.schema.morphism(morphism)?;
        self.hom_at(i)
    }

    pub(crate) fn hom_at(&self, i: usize) -> Result<FinFunction, CSetError> {
        let m = &self.schema.morphisms[i];
        if self.columns[i].len() != self.card[m.dom] {
            return Err(CSetError::Invalid(vec![Violation::ColumnLength {
                morphism: m.name.clone(),
                expected: self.card[m.dom],
                actual: self.columns[i].len(),
            }]));
        }
        Ok(FinFunction::new(self.columns[i].clone(), self.card[m.cod])?)
    }

    /// Every place where a column fails to be a total function.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (m, col) in self.schema.morphisms.iter().zip(&self.columns) {
            let (dom, cod) = (self.card[m.dom], self.card[m.cod]);
            if col.len() != dom {
                out.push(Violation::ColumnLength { morphism: m.name.clone(), expected: dom, actual: col.len() });
            }
            for (row, &value) in col.iter().enumerate().filter(|(_, &v)| v >= cod) {
                out.push(Violation::OutOfRange { morphism: m.name.clone(), row, value, card: cod });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), CSetError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CSetError::Invalid(v))
        }
    }

    /// Canonical JSON: `{"schema": name, <object>: card, ..., <morphism>: [..], ...}`
    /// in schema declaration order.
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("schema".into(), Value::String(self.schema.name.clone()));
        for (o, &n) in self.schema.objects.iter().zip(&self.card) {
            obj.insert(o.clone(), Value::from(n));
        }
        for (m, col) in self.schema.morphisms.iter().zip(&self.columns) {
            obj.insert(m.name.clone(), Value::from(col.clone()));
        }
        Value::Object(obj)
    }

    /// Parses the canonical JSON form over one of the built-in schemas.
    /// Absent objects default to 0, absent columns to empty; unknown keys are
    /// rejected.
    pub fn from_json(value: &Value) -> Result<Self, CSetError> {
        let obj = value.as_object().ok_or_else(|| CSetError::Json("expected an object".into()))?;
        let name = obj
            .get("schema")
            .and_then(Value::as_str)
            .ok_or_else(|| CSetError::Json("missing string field `schema`".into()))?;
        let schema = builtin_schema(name).ok_or_else(|| CSetError::Json(format!("unknown schema `{name}`")))?;
        let mut x = Self::empty(schema.clone());
        for (key, v) in obj.iter().filter(|(k, _)| k.as_str() != "schema") {
            if let Ok(i) = schema.object(key) {
                x.card[i] = v
                    .as_u64()
                    .ok_or_else(|| CSetError::Json(format!("`{key}` must be a nonnegative integer")))?
                    as usize;
            } else if let Ok(i) = schema.morphism(key) {
                let arr = v.as_array().ok_or_else(|| CSetError::Json(format!("`{key}` must be an array")))?;
                x.columns[i] = arr
                    .iter()
                    .map(|e| e.as_u64().map(|e| e as usize))
                    .collect::<Option<_>>()
                    .ok_or_else(|| CSetError::Json(format!("`{key}` must hold nonnegative integers")))?;
            } else {
                return Err(CSetError::Json(format!("unknown key `{key}` for schema `{name}`")));
            }
        }
        Ok(x)
    }
}

/// Image of a generating morphism under a schema functor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphismImage {
    Generator(usize),
    /// The identity on the image of the morphism's domain.
    Identity,
}

/// A functor between free schemas, sending generators to generators or identities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaFunctor {
    source: Arc<Schema>,
    target: Arc<Schema>,
    object_map: Vec<usize>,
    morphism_map: Vec<MorphismImage>,
}

impl SchemaFunctor {
    /// `morphisms` maps source generator names to a target generator name, or
    /// to `None` for an identity.
    pub fn new(
        source: Arc<Schema>,
        target: Arc<Schema>,
        objects: &[(&str, &str)],
        morphisms: &[(&str, Option<&str>)],
    ) -> Result<Self, CSetError> {
        let mut object_map = vec![usize::MAX; source.objects.len()];
        for &(a, b) in objects {
            object_map[source.object(a)?] = target.object(b)?;
        }
        if let Some(i) = object_map.iter().position(|&o| o == usize::MAX) {
            return Err(CSetError::Functor(format!("object `{}` is not mapped", source.objects[i])));
        }
        let mut morphism_map = vec![None; source.morphisms.len()];
        for &(f, g) in morphisms {
            let image = match g {
                Some(g) => MorphismImage::Generator(target.morphism(g)?),
                None => MorphismImage::Identity,
            };
            morphism_map[source.morphism(f)?] = Some(image);
        }
        let morphism_map = morphism_map
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                m.ok_or_else(|| CSetError::Functor(format!("morphism `{}` is not mapped", source.morphisms[i].name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let functor = Self { source, target, object_map, morphism_map };
        functor.check()?;
        Ok(functor)
    }

    fn check(&self) -> Result<(), CSetError> {
        for (m, image) in self.source.morphisms.iter().zip(&self.morphism_map) {
            let (d, c) = (self.object_map[m.dom], self.object_map[m.cod]);
            let ok = match *image {
                MorphismImage::Generator(g) => {
                    let g = &self.target.morphisms[g];
                    g.dom == d && g.cod == c
                }
                MorphismImage::Identity => d == c,
            };
            if !ok {
                return Err(CSetError::Functor(format!("image of `{}` does not match its endpoints", m.name)));
            }
        }
        Ok(())
    }

    pub fn identity(schema: Arc<Schema>) -> Self {
        Self {
            object_map: (0..schema.objects.len()).collect(),
            morphism_map: (0..schema.morphisms.len()).map(MorphismImage::Generator).collect(),
            source: schema.clone(),
            target: schema,
        }
    }

    pub fn source(&self) -> &Arc<Schema> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Schema> {
        &self.target
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &SchemaFunctor) -> Result<SchemaFunctor, CSetError> {
        if *self.target != *next.source {
            return Err(CSetError::Functor(format!(
                "cannot compose: target `{}` is not source `{}`",
                self.target.name, next.source.name
            )));
        }
        Ok(SchemaFunctor {
            source: self.source.clone(),
            target: next.target.clone(),
            object_map: self.object_map.iter().map(|&o| next.object_map[o]).collect(),
            morphism_map: self
                .morphism_map
                .iter()
                .map(|m| match *m {
                    MorphismImage::Generator(g) => next.morphism_map[g],
                    MorphismImage::Identity => MorphismImage::Identity,
                })
                .collect(),
        })
    }

    /// Pullback data migration: reindexes an instance of the target schema
    /// into an instance of the source schema.
    pub fn migrate(&self, x: &CSetInstance) -> Result<CSetInstance, CSetError> {
        if *x.schema != *self.target {
            return Err(CSetError::SchemaMismatch { expected: self.target.name.clone(), actual: x.schema.name.clone() });
        }
        let card: Vec<usize> = self.object_map.iter().map(|&o| x.card[o]).collect();
        let columns = self
            .source
            .morphisms
            .iter()
            .zip(&self.morphism_map)
            .map(|(m, image)| match *image {
                MorphismImage::Generator(g) => x.columns[g].clone(),
                MorphismImage::Identity => (0..card[m.dom]).collect(),
            })
            .collect();
        Ok(CSetInstance::from_raw(self.source.clone(), card, columns))
    }
}

/// The functor `Theory(DWD) -> Theory(CPG)` that duplicates each port into an
/// in-port and an out-port.
pub static DWD_TO_CPG: LazyLock<SchemaFunctor> = LazyLock::new(|| {
    SchemaFunctor::new(
        DWD.clone(),
        CPG.clone(),
        &[
            ("Q_in", "Q"),
            ("Q_out", "Q"),
            ("W_in", "Q"),
            ("W_out", "Q"),
            ("P_in", "P"),
            ("P_out", "P"),
            ("W", "W"),
            ("B", "B"),
        ],
        &[
            ("src_in", None),
            ("tgt_out", None),
            ("tgt_in", Some("expose")),
            ("src_out", Some("expose")),
            ("src", Some("src")),
            ("tgt", Some("tgt")),
            ("box_in", Some("box")),
            ("box_out", Some("box")),
        ],
    )
    .unwrap()
});

/// A componentwise instance morphism, one finite function per schema object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMorphism {
    pub components: Vec<FinFunction>,
}

impl InstanceMorphism {
    pub fn new(components: Vec<FinFunction>) -> Self {
        Self { components }
    }

    fn check(&self, dom: &CSetInstance, cod: &CSetInstance, injective: bool) -> Result<(), CSetError> {
        let schema = &dom.schema;
        if self.components.len() != schema.objects.len() {
            return Err(CSetError::Leg {
                object: "*".into(),
                reason: format!("{} components for {} objects", self.components.len(), schema.objects.len()),
            });
        }
        for (o, comp) in self.components.iter().enumerate() {
            if comp.dom() != dom.card[o] || comp.cod() != cod.card[o] {
                return Err(CSetError::Leg {
                    object: schema.objects[o].clone(),
                    reason: format!(
                        "maps {} -> {} but instances have {} -> {}",
                        comp.dom(),
                        comp.cod(),
                        dom.card[o],
                        cod.card[o]
                    ),
                });
            }
            if injective && !comp.is_injective() {
                return Err(CSetError::Leg { object: schema.objects[o].clone(), reason: "not injective".into() });
            }
        }
        for (i, m) in schema.morphisms.iter().enumerate() {
            let (src, tgt) = (&self.components[m.dom], &self.components[m.cod]);
            for row in 0..dom.card[m.dom] {
                if tgt.get(dom.columns[i][row]) != cod.columns[i][src.get(row)] {
                    return Err(CSetError::Naturality { morphism: m.name.clone(), row });
                }
            }
        }
        Ok(())
    }
}

/// Result of gluing two instances along a common sub-instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstancePushout {
    pub apex: CSetInstance,
    pub inj_left: InstanceMorphism,
    pub inj_right: InstanceMorphism,
}

/// Pushout of `x <-left- a -right-> y` computed object by object.
pub fn instance_pushout(
    a: &CSetInstance,
    x: &CSetInstance,
    y: &CSetInstance,
    left: &InstanceMorphism,
    right: &InstanceMorphism,
) -> Result<InstancePushout, CSetError> {
    for inst in [x, y] {
        if inst.schema != a.schema {
            return Err(CSetError::SchemaMismatch { expected: a.schema.name.clone(), actual: inst.schema.name.clone() });
        }
    }
    for inst in [a, x, y] {
        inst.ensure_valid()?;
    }
    left.check(a, x, true)?;
    right.check(a, y, true)?;

    let schema = a.schema.clone();
    let pushouts = left
        .components
        .iter()
        .zip(&right.components)
        .map(|(f, g)| finset::pushout(f, g))
        .collect::<Result<Vec<_>, _>>()?;
    let card: Vec<usize> = pushouts.iter().map(|p| p.apex_size).collect();

    let mut columns = Vec::with_capacity(schema.morphisms.len());
    for (i, m) in schema.morphisms.iter().enumerate() {
        let (pd, pc) = (&pushouts[m.dom], &pushouts[m.cod]);
        let mut col = vec![usize::MAX; card[m.dom]];
        let images = (0..x.card[m.dom])
            .map(|r| (pd.inj_left.get(r), pc.inj_left.get(x.columns[i][r])))
            .chain((0..y.card[m.dom]).map(|r| (pd.inj_right.get(r), pc.inj_right.get(y.columns[i][r]))));
        for (row, value) in images {
            if col[row] != usize::MAX && col[row] != value {
                return Err(CSetError::Gluing { morphism: m.name.clone(), row });
            }
            col[row] = value;
        }
        columns.push(col);
    }
    let apex = CSetInstance::from_raw(schema, card, columns);
    debug_assert!(apex.validate().is_empty());
    Ok(InstancePushout {
        apex,
        inj_left: InstanceMorphism::new(pushouts.iter().map(|p| p.inj_left.clone()).collect()),
        inj_right: InstanceMorphism::new(pushouts.into_iter().map(|p| p.inj_right).collect()),
    })
}
