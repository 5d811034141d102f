//! Linear parametric trend `m(x) = βᵀ h(x)` of universal kriging.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

type BasisFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Basis {
    Constant,
    /// The `k`-th coordinate of the input.
    Coordinate(usize),
    Custom(String, BasisFn),
}

impl Basis {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Basis::Constant => 1.0,
            Basis::Coordinate(k) => x[*k],
            Basis::Custom(_, f) => f(x),
        }
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Constant => write!(f, "1"),
            Basis::Coordinate(k) => write!(f, "x[{k}]"),
            Basis::Custom(name, _) => write!(f, "{name}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendKind {
    #[default]
    Constant,
    Linear,
}

/// Trend basis `h_1…h_l`; defaults to the single constant function.
#[derive(Debug, Clone)]
pub struct TrendSpec {
    basis: Vec<Basis>,
}

impl Default for TrendSpec {
    fn default() -> Self {
        Self::constant()
    }
}

impl TrendSpec {
    pub fn constant() -> Self {
        Self { basis: vec![Basis::Constant] }
    }

    /// `1, x_1, …, x_d`.
    pub fn linear(dim: usize) -> Self {
        let mut basis = vec![Basis::Constant];
        basis.extend((0..dim).map(Basis::Coordinate));
        Self { basis }
    }

    pub fn from_kind(kind: TrendKind, dim: usize) -> Self {
        match kind {
            TrendKind::Constant => Self::constant(),
            TrendKind::Linear => Self::linear(dim),
        }
    }

    /// Panics if `basis` is empty.
    pub fn new(basis: Vec<Basis>) -> Self {
        assert!(!basis.is_empty(), "trend needs at least one basis function");
        Self { basis }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[Basis] {
        &self.basis
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, b) in out.iter_mut().zip(&self.basis) {
            *o = b.eval(x);
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.basis.iter().map(|b| b.eval(x)).collect()
    }
}
