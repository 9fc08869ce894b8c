//! Compressed-row sparse matrices and unpreconditioned BiCGSTAB.

use crate::error::{Result, TmcError};

/// Square matrix in compressed-row form plus a right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)], rhs: Vec<f64>) -> Result<Self> {
        if rhs.len() != dim {
            return Err(TmcError::DimensionMismatch {
                expected: dim,
                got: rhs.len(),
            });
        }
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(TmcError::InvalidArgument(format!(
                "entry ({r}, {c}) outside {dim}x{dim}"
            )));
        }
        let mut sorted = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
            rhs,
        })
    }

    /// Builds from an existing compressed-row pattern.
    pub fn from_csr(row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let dim = rhs.len();
        if row_ptr.len() != dim + 1
            || row_ptr[dim] != col_idx.len()
            || col_idx.len() != values.len()
            || col_idx.iter().any(|&c| c >= dim)
        {
            return Err(TmcError::InvalidArgument("inconsistent compressed-row arrays".into()));
        }
        Ok(Self {
            dim,
            row_ptr,
            col_idx,
            values,
            rhs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entry `(r, c)`, zero when not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .position(|&cc| cc == c)
            .map_or(0.0, |k| self.values[range.start + k])
    }

    /// Stored `(col, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let range = self.row_ptr[r]..self.row_ptr[r + 1];
            *o = self.col_idx[range.clone()]
                .iter()
                .zip(&self.values[range])
                .map(|(&c, v)| v * x[c])
                .sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.matvec_into(x, &mut out);
        out
    }

    /// `‖rhs − B x‖₂ / ‖rhs‖₂`.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let bx = self.matvec(x);
        let r: f64 = bx.iter().zip(&self.rhs).map(|(a, b)| (b - a).powi(2)).sum();
        r.sqrt() / norm(&self.rhs)
    }
}

/// Solution returned by [`bicgstab`].
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative 2-norm residual, recomputed from `x`.
    pub residual: f64,
    pub restarts: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

enum Outcome {
    Converged,
    Breakdown,
    Exhausted,
}

/// BiCGSTAB from a zero guess until the relative residual drops below `tol`.
///
/// A breakdown (`ρ` or `ω` vanishing) triggers one restart from a perturbed
/// copy of the current iterate; a second breakdown or `max_iter` total
/// iterations is reported as a convergence failure.
pub fn bicgstab(sys: &SparseSystem, tol: f64, max_iter: usize) -> Result<KrylovSolution> {
    let n = sys.dim;
    let b = &sys.rhs;
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(KrylovSolution {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
            restarts: 0,
        });
    }
    let mut x = vec![0.0; n];
    let mut iterations = 0;
    let mut restarts = 0;
    loop {
        match bicgstab_cycle(sys, &mut x, bnorm, tol, max_iter, &mut iterations) {
            Outcome::Converged => {
                let residual = sys.relative_residual(&x);
                if residual < tol {
                    return Ok(KrylovSolution {
                        x,
                        iterations,
                        residual,
                        restarts,
                    });
                }
                // The recurrence drifted from the true residual; carry on
                // from the current iterate.
            }
            Outcome::Breakdown if restarts == 0 => {
                restarts += 1;
                let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3 * bnorm);
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi += 1e-6 * scale * (((i * 7919) % 13) as f64 - 6.0) / 6.0;
                }
            }
            Outcome::Breakdown | Outcome::Exhausted => {
                return Err(TmcError::ConvergenceFailure {
                    iterations,
                    residual: sys.relative_residual(&x),
                });
            }
        }
        if iterations >= max_iter {
            return Err(TmcError::ConvergenceFailure {
                iterations,
                residual: sys.relative_residual(&x),
            });
        }
    }
}

fn bicgstab_cycle(
    sys: &SparseSystem,
    x: &mut [f64],
    bnorm: f64,
    tol: f64,
    max_iter: usize,
    iterations: &mut usize,
) -> Outcome {
    let n = sys.dim;
    let mut r = sys.matvec(x);
    for (ri, bi) in r.iter_mut().zip(&sys.rhs) {
        *ri = bi - *ri;
    }
    if norm(&r) < tol * bnorm {
        return Outcome::Converged;
    }
    let r_hat = r.clone();
    let r_hat_norm = norm(&r_hat);
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    while *iterations < max_iter {
        *iterations += 1;
        let rho_next = dot(&r_hat, &r);
        if rho_next.abs() <= 1e-30 * r_hat_norm * norm(&r) || !rho_next.is_finite() {
            return Outcome::Breakdown;
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        sys.matvec_into(&p, &mut v);
        let denom = dot(&r_hat, &v);
        if denom == 0.0 || !denom.is_finite() {
            return Outcome::Breakdown;
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) < tol * bnorm {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            return Outcome::Converged;
        }
        sys.matvec_into(&s, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return Outcome::Breakdown;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        if norm(&r) < tol * bnorm {
            return Outcome::Converged;
        }
        if omega == 0.0 || !omega.is_finite() {
            return Outcome::Breakdown;
        }
    }
    Outcome::Exhausted
}
