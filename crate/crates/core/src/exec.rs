//! Sequential or data-parallel evaluation of independent work items.
//!
//! With the `parallel` feature disabled, [`Exec::Parallel`] runs sequentially.
//! Results never depend on the policy: every item writes only its own output,
//! and any reduction happens afterwards in a fixed order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Exec {
    #[default]
    Sequential,
    Parallel,
}

impl Exec {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Runs `f(i, block_i)` over consecutive blocks of `buf` whose lengths are
/// `sizes`, returning the error of the lowest-indexed failing block.
pub fn try_for_each_block<E, F>(exec: Exec, buf: &mut [f64], sizes: &[usize], f: F) -> Result<(), E>
where
    E: Send,
    F: Fn(usize, &mut [f64]) -> Result<(), E> + Sync + Send,
{
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut rest = buf;
    for &n in sizes {
        let (head, tail) = rest.split_at_mut(n);
        blocks.push(head);
        rest = tail;
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        let results: Vec<Result<(), E>> = blocks.into_par_iter().enumerate().map(|(i, b)| f(i, b)).collect();
        return results.into_iter().collect();
    }
    let _ = exec;
    blocks.into_iter().enumerate().try_for_each(|(i, b)| f(i, b))
}
