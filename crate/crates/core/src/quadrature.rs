//! Discrete univariate laws: Gauss rules for the continuous sampling laws and
//! the symmetric two-point law on {−1, +1}.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, TmcError};
use crate::sampling::Law;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    /// Gauss rule for the density of the given sampling law.
    Quadrature(Law),
    /// Atoms −1 and +1 with probability 1/2 each.
    TwoPoint,
}

/// A probability measure on finitely many nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateLaw {
    kind: LawKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl UnivariateLaw {
    pub fn two_point() -> Self {
        Self {
            kind: LawKind::TwoPoint,
            nodes: vec![-1.0, 1.0],
            weights: vec![0.5, 0.5],
        }
    }

    /// `n`-point Gauss rule for `law`, exact for polynomials of degree `2n − 1`.
    pub fn gauss(law: Law, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(TmcError::InvalidArgument("Gauss rule needs at least one node".into()));
        }
        let (nodes, weights) = match law {
            Law::StdNormal => golub_welsch(n, |k| (k as f64).sqrt()),
            Law::UniformCentered | Law::UniformUnit => {
                let (x, w) = golub_welsch(n, |k| {
                    let k = k as f64;
                    k / (4.0 * k * k - 1.0).sqrt()
                });
                let shift = if law == Law::UniformUnit { 0.5 } else { 0.0 };
                (x.into_iter().map(|v| 0.5 * v + shift).collect(), w)
            }
        };
        Ok(Self {
            kind: LawKind::Quadrature(law),
            nodes,
            weights,
        })
    }

    /// Gauss rule with `⌈(d+1)/2⌉ + 2` nodes, enough to integrate products of
    /// two polynomials of per-axis degree `d` exactly.
    pub fn for_degree(law: Law, degree: usize) -> Result<Self> {
        Self::gauss(law, (degree + 1).div_ceil(2) + 2)
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_k f(x_k)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Nodes and normalised weights of the Gauss rule whose monic recurrence has
/// zero diagonal and off-diagonal `b(k)`, `k = 1..n`.
fn golub_welsch(n: usize, b: impl Fn(usize) -> f64) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let v = b(k);
        j[(k - 1, k)] = v;
        j[(k, k - 1)] = v;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    // Symmetric laws: enforce exact symmetry of nodes and weights.
    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1 / total).collect();
    for i in 0..n / 2 {
        let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
