//! Gauss–Hermite rules normalized against the standard normal.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const MAX_NODES: usize = 64;

/// Nodes `u_q` of the physicists' rule and weights `w'_q = w_q / √π`, so that
/// `E g(Z) ≈ Σ w'_q g(u_q √2)` for `Z ~ N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `E g(mean + sd Z)` by the rule.
    pub fn expect<F: Fn(f64) -> f64>(&self, mean: f64, sd: f64, g: F) -> f64 {
        let s = sd * std::f64::consts::SQRT_2;
        self.nodes.iter().zip(&self.weights).map(|(u, w)| w * g(mean + s * u)).sum()
    }
}

/// Golub–Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
/// Hermite recurrence and the weights the squared first eigenvector entries.
pub fn gauss_hermite(q: usize) -> Result<QuadratureRule> {
    if q == 0 || q > MAX_NODES {
        return Err(Error::InvalidArgument(format!(
            "number of quadrature nodes must be in 1..={MAX_NODES}, got {q}"
        )));
    }
    let mut jacobi = DMatrix::zeros(q, q);
    for i in 1..q {
        let b = (i as f64 / 2.0).sqrt();
        jacobi[(i, i - 1)] = b;
        jacobi[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Enforce exact symmetry, then normalize.
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for k in 0..q {
        let r = q - 1 - k;
        nodes[k] = 0.5 * (pairs[k].0 - pairs[r].0);
        weights[k] = 0.5 * (pairs[k].1 + pairs[r].1);
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(QuadratureRule { nodes, weights })
}
