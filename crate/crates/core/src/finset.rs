//! Skeletal finite sets and the maps between them.
//!
//! The finite set of size `n` is the interval `[0, n)`. A [`FinFunction`] is a
//! total map between two such sets, stored as its table of values. Cospans,
//! pushouts and the two vector actions used by the dynamical-systems algebras
//! (pullback by precomposition, pushforward by fiberwise summation) live here.

use petgraph::unionfind::UnionFind;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FinSetError {
    #[error("value {value} at index {index} is out of range for codomain of size {cod}")]
    OutOfRange { index: usize, value: usize, cod: usize },
    #[error("cannot compose: codomain has size {cod} but next domain has size {dom}")]
    Composition { cod: usize, dom: usize },
    #[error("span legs disagree on apex: {left} vs {right}")]
    SpanMismatch { left: usize, right: usize },
    #[error("cospan legs disagree on apex: {left} vs {right}")]
    CospanMismatch { left: usize, right: usize },
    #[error("cospans do not share a foot: {left} vs {right}")]
    FootMismatch { left: usize, right: usize },
    #[error("vector has length {actual}, expected {expected}")]
    Length { expected: usize, actual: usize },
}

/// A total function `[0, dom) -> [0, cod)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinFunction {
    map: Vec<usize>,
    cod: usize,
}

impl FinFunction {
    pub fn new(map: Vec<usize>, cod: usize) -> Result<Self, FinSetError> {
        if let Some((index, &value)) = map.iter().enumerate().find(|(_, &v)| v >= cod) {
            return Err(FinSetError::OutOfRange { index, value, cod });
        }
        Ok(Self { map, cod })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect(), cod: n }
    }

    /// The unique map out of the empty set.
    pub fn empty(cod: usize) -> Self {
        Self { map: Vec::new(), cod }
    }

    /// The inclusion `[0, n) -> [0, cod)` shifted by `offset`.
    pub fn inclusion(n: usize, offset: usize, cod: usize) -> Result<Self, FinSetError> {
        Self::new((offset..offset + n).collect(), cod)
    }

    pub fn dom(&self) -> usize {
        self.map.len()
    }

    pub fn cod(&self) -> usize {
        self.cod
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.map
    }

    pub fn get(&self, i: usize) -> usize {
        self.map[i]
    }

    /// `self` followed by `next`, i.e. `next ∘ self`.
    pub fn compose(&self, next: &FinFunction) -> Result<FinFunction, FinSetError> {
        if self.cod != next.dom() {
            return Err(FinSetError::Composition { cod: self.cod, dom: next.dom() });
        }
        Ok(FinFunction { map: self.map.iter().map(|&i| next.map[i]).collect(), cod: next.cod })
    }

    /// Coproduct of maps: `self + other : A + A' -> B + B'`.
    pub fn sum(&self, other: &FinFunction) -> FinFunction {
        let mut map = self.map.clone();
        map.extend(other.map.iter().map(|&j| j + self.cod));
        FinFunction { map, cod: self.cod + other.cod }
    }

    /// Coproduct of a whole family of maps.
    pub fn sum_all<'a>(maps: impl IntoIterator<Item = &'a FinFunction>) -> FinFunction {
        maps.into_iter().fold(FinFunction::empty(0), |acc, f| acc.sum(f))
    }

    /// Copairing `[self, other] : A + B -> C`.
    pub fn copair(&self, other: &FinFunction) -> Result<FinFunction, FinSetError> {
        if self.cod != other.cod {
            return Err(FinSetError::CospanMismatch { left: self.cod, right: other.cod });
        }
        let mut map = self.map.clone();
        map.extend_from_slice(&other.map);
        Ok(FinFunction { map, cod: self.cod })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod];
        self.map.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.cod];
        for &j in &self.map {
            seen[j] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_bijective(&self) -> bool {
        self.dom() == self.cod && self.is_injective()
    }

    /// Sizes of the fibers over each element of the codomain.
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cod];
        for &j in &self.map {
            sizes[j] += 1;
        }
        sizes
    }

    /// Precomposition `f^*`: `result[i] = x[f(i)]`.
    pub fn pullback_vec(&self, x: &[f64]) -> Result<Vec<f64>, FinSetError> {
        check_len(self.cod, x.len())?;
        Ok(self.map.iter().map(|&j| x[j]).collect())
    }

    /// Fiberwise sum `f_*`: `result[j] = Σ_{f(i) = j} x[i]`, empty fibers give `0.0`.
    pub fn pushforward_vec(&self, x: &[f64]) -> Result<Vec<f64>, FinSetError> {
        check_len(self.dom(), x.len())?;
        let mut out = vec![0.0; self.cod];
        self.pushforward_add(x, &mut out);
        Ok(out)
    }

    /// Adds `f_*(x)` into `out`. Lengths are the caller's responsibility.
    pub(crate) fn pushforward_add(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dom());
        debug_assert_eq!(out.len(), self.cod);
        for (&j, &v) in self.map.iter().zip(x) {
            out[j] += v;
        }
    }

    /// Writes `f^*(x)` into `out`. Lengths are the caller's responsibility.
    pub(crate) fn pullback_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cod);
        debug_assert_eq!(out.len(), self.dom());
        for (o, &j) in out.iter_mut().zip(&self.map) {
            *o = x[j];
        }
    }
}

fn check_len(expected: usize, actual: usize) -> Result<(), FinSetError> {
    if expected == actual {
        Ok(())
    } else {
        Err(FinSetError::Length { expected, actual })
    }
}

/// A cospan `left.dom -> apex <- right.dom`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cospan {
    left: FinFunction,
    right: FinFunction,
}

impl Cospan {
    pub fn new(left: FinFunction, right: FinFunction) -> Result<Self, FinSetError> {
        if left.cod() != right.cod() {
            return Err(FinSetError::CospanMismatch { left: left.cod(), right: right.cod() });
        }
        Ok(Self { left, right })
    }

    pub fn identity(n: usize) -> Self {
        Self { left: FinFunction::identity(n), right: FinFunction::identity(n) }
    }

    pub fn left(&self) -> &FinFunction {
        &self.left
    }

    pub fn right(&self) -> &FinFunction {
        &self.right
    }

    pub fn apex(&self) -> usize {
        self.left.cod()
    }

    /// Composite `X -> P <- Z` of `X -> A <- Y` and `Y -> B <- Z`, gluing along `Y`.
    pub fn compose(&self, next: &Cospan) -> Result<Cospan, FinSetError> {
        if self.right.dom() != next.left.dom() {
            return Err(FinSetError::FootMismatch { left: self.right.dom(), right: next.left.dom() });
        }
        let po = pushout(&self.right, &next.left)?;
        Ok(Cospan {
            left: self.left.compose(&po.inj_left)?,
            right: next.right.compose(&po.inj_right)?,
        })
    }

    /// Renumbers the apex by first appearance along the left leg then the right
    /// leg; apex elements hit by neither come last. Two cospans are isomorphic
    /// rel. their feet iff their canonical forms are equal.
    pub fn canonical(&self) -> Cospan {
        let relabel = first_appearance(self.apex(), self.left.as_slice().iter().chain(self.right.as_slice()));
        Cospan {
            left: self.left.compose(&relabel).expect("relabel has apex domain"),
            right: self.right.compose(&relabel).expect("relabel has apex domain"),
        }
    }
}

/// The bijection `[0, n) -> [0, n)` numbering elements in the order they first
/// occur in `seq`, with unseen elements appended in ascending order.
pub fn first_appearance<'a>(n: usize, seq: impl IntoIterator<Item = &'a usize>) -> FinFunction {
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for &j in seq {
        if label[j] == usize::MAX {
            label[j] = next;
            next += 1;
        }
    }
    for l in label.iter_mut().filter(|l| **l == usize::MAX) {
        *l = next;
        next += 1;
    }
    FinFunction { map: label, cod: n }
}

/// Apex and coprojections of a pushout of finite sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushoutResult {
    pub apex_size: usize,
    pub inj_left: FinFunction,
    pub inj_right: FinFunction,
}

/// Pushout of the span `B <-f- A -g-> C`.
///
/// The apex is `B + C` modulo the equivalence generated by `f(a) ~ g(a)`.
/// Classes are numbered by their smallest member in the concatenation `B + C`.
pub fn pushout(f: &FinFunction, g: &FinFunction) -> Result<PushoutResult, FinSetError> {
    if f.dom() != g.dom() {
        return Err(FinSetError::SpanMismatch { left: f.dom(), right: g.dom() });
    }
    let (nb, nc) = (f.cod(), g.cod());
    let classes = quotient(nb + nc, f.as_slice().iter().zip(g.as_slice()).map(|(&b, &c)| (b, nb + c)));
    let apex_size = classes.cod();
    let (left, right) = classes.map.split_at(nb);
    Ok(PushoutResult {
        apex_size,
        inj_left: FinFunction { map: left.to_vec(), cod: apex_size },
        inj_right: FinFunction { map: right.to_vec(), cod: apex_size },
    })
}

/// Coequalizer-style quotient of `[0, n)` by the equivalence generated by
/// `pairs`, as a surjection numbering classes by their smallest member.
pub fn quotient(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> FinFunction {
    let mut uf = UnionFind::<usize>::new(n);
    for (a, b) in pairs {
        uf.union(a, b);
    }
    let roots: Vec<usize> = (0..n).map(|i| uf.find_mut(i)).collect();
    let relabel = first_appearance(n, &roots);
    let map: Vec<usize> = roots.iter().map(|&r| relabel.map[r]).collect();
    let cod = map.iter().max().map_or(0, |m| m + 1);
    FinFunction { map, cod }
}
