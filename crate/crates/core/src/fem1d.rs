//! Piecewise-linear finite elements for `−(a u′)′ = 1` on (0, 1) with zero
//! boundary values, for a uniform-affine and a log-normal random field.
//!
//! The mesh is `x_m = m/M`; the unknowns are the interior nodal values
//! `û_1, …, û_{M−1}`.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::dense::vecmat_into;
use crate::error::{Result, TmcError};
use crate::estimators::Integrand;
use crate::sampling::{Law, Method};
use crate::toeplitz::build_operator;

/// Symmetric tridiagonal system `B û = ĝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub diag: Vec<f64>,
    /// `off[k] = B[k][k+1] = B[k+1][k]`.
    pub off: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(diag: Vec<f64>, off: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || off.len() + 1 != n || rhs.len() != n {
            return Err(TmcError::InvalidArgument(format!(
                "tridiagonal system with diag {n}, off {}, rhs {}",
                off.len(),
                rhs.len()
            )));
        }
        Ok(Self { diag, off, rhs })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `B x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut v = self.diag[k] * x[k];
                if k > 0 {
                    v += self.off[k - 1] * x[k - 1];
                }
                if k + 1 < n {
                    v += self.off[k] * x[k + 1];
                }
                v
            })
            .collect()
    }
}

/// Thomas elimination in `O(n)`.
pub fn thomas_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = sys.dim();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut prev_c = 0.0;
    let mut prev_d = 0.0;
    for k in 0..n {
        let lower = if k > 0 { sys.off[k - 1] } else { 0.0 };
        let upper = if k + 1 < n { sys.off[k] } else { 0.0 };
        let pivot = sys.diag[k] - lower * prev_c;
        let scale = sys.diag[k].abs() + lower.abs() + upper.abs();
        if !pivot.is_finite() || pivot.abs() <= f64::EPSILON * scale {
            return Err(TmcError::SingularSystem { row: k });
        }
        prev_c = upper / pivot;
        prev_d = (sys.rhs[k] - lower * prev_d) / pivot;
        c[k] = prev_c;
        d[k] = prev_d;
    }
    for k in (0..n - 1).rev() {
        d[k] -= c[k] * d[k + 1];
    }
    Ok(d)
}

fn check_mesh(m: usize) -> Result<()> {
    if m < 2 || m % 2 == 1 {
        return Err(TmcError::InvalidArgument(format!(
            "mesh size M = {m} must be even and >= 2 so that x = 1/2 is a node"
        )));
    }
    Ok(())
}

/// `sin(π·num/den)` with the argument reduced exactly in integers.
fn sin_pi_ratio(num: usize, den: usize) -> f64 {
    let r = num % (2 * den);
    (PI * r as f64 / den as f64).sin()
}

/// Diagonal contribution of `A^(j)` at row `k`.
fn uniform_diag_coeff(j: usize, k: usize, m: usize) -> f64 {
    let mf = m as f64;
    mf * mf / (PI * (j as f64).powf(2.5)) * sin_pi_ratio(2 * j, m) * sin_pi_ratio(2 * j * k, m)
}

/// Coupling of rows `k` and `k + 1` in `A^(j)`.
fn uniform_off_coeff(j: usize, k: usize, m: usize) -> f64 {
    let mf = m as f64;
    -mf * mf / (PI * (j as f64).powf(2.5)) * sin_pi_ratio(j, m) * sin_pi_ratio(j * (2 * k + 1), m)
}

/// Stiffness system of `a(x) = 2 + Σ_j y_j sin(2πjx)/j^{3/2}` from the closed
/// forms of the `A^(j)` entries.
pub fn assemble_uniform(y: &[f64], m: usize) -> Result<TridiagonalSystem> {
    if m < 2 {
        return Err(TmcError::InvalidArgument(format!("M = {m} must be >= 2")));
    }
    let mf = m as f64;
    let diag = (1..m)
        .map(|k| {
            4.0 * mf
                + y.iter()
                    .enumerate()
                    .map(|(i, yj)| yj * uniform_diag_coeff(i + 1, k, m))
                    .sum::<f64>()
        })
        .collect();
    let off = (1..m - 1)
        .map(|k| {
            -2.0 * mf
                + y.iter()
                    .enumerate()
                    .map(|(i, yj)| yj * uniform_off_coeff(i + 1, k, m))
                    .sum::<f64>()
        })
        .collect();
    TridiagonalSystem::new(diag, off, vec![1.0 / mf; m - 1])
}

/// Nodal value `û_{M/2}`.
fn center_value(sys: &TridiagonalSystem, m: usize) -> Result<f64> {
    Ok(thomas_solve(sys)?[m / 2 - 1])
}

/// `u_M(1/2)` for the uniform model.
pub fn solve_u_half_uniform(y: &[f64], m: usize) -> Result<f64> {
    check_mesh(m)?;
    center_value(&assemble_uniform(y, m)?, m)
}

/// Stiffness system of `a = e^θ` by Simpson (diagonal) and trapezoid
/// (off-diagonal) rules; `theta` holds the field exponent at `x_0, …, x_M`.
pub fn assemble_lognormal(theta: &[f64], m: usize) -> Result<TridiagonalSystem> {
    if m < 2 || theta.len() != m + 1 {
        return Err(TmcError::DimensionMismatch {
            expected: m + 1,
            got: theta.len(),
        });
    }
    let mf = m as f64;
    let e: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
    let diag = (1..m).map(|k| mf / 3.0 * (e[k - 1] + 4.0 * e[k] + e[k + 1])).collect();
    let off = (1..m - 1).map(|k| -mf / 2.0 * (e[k] + e[k + 1])).collect();
    TridiagonalSystem::new(diag, off, vec![1.0 / mf; m - 1])
}

/// `u_M(1/2)` for the log-normal model from nodal exponents.
pub fn solve_u_half_lognormal(theta: &[f64], m: usize) -> Result<f64> {
    check_mesh(m)?;
    center_value(&assemble_lognormal(theta, m)?, m)
}

/// `C[j−1][q] = sin(2πj·x_q)/j²` for quadrature nodes `x_q`.
pub fn theta_coefficients(s: usize, nodes: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((s, nodes.len()), |(i, q)| {
        let j = (i + 1) as f64;
        (2.0 * PI * j * nodes[q]).sin() / (j * j)
    })
}

/// Theta coefficients at the mesh nodes `x_i = i/M`, with exact argument
/// reduction so the boundary columns vanish identically.
pub fn mesh_theta_coefficients(s: usize, m: usize) -> Array2<f64> {
    Array2::from_shape_fn((s, m + 1), |(i, q)| {
        let j = i + 1;
        sin_pi_ratio(2 * j * q, m) / (j * j) as f64
    })
}

/// Field exponents `θ_{n,q} = Σ_j y_j^{(n)} sin(2πj·x_q)/j²` for the `N`
/// points drawn from `stream` by `method` (TMC windows or disjoint MC blocks).
pub fn compute_thetas(
    stream: impl AsRef<[f64]>,
    n: usize,
    s: usize,
    quad_nodes: &[f64],
    method: Method,
) -> Result<Array2<f64>> {
    if let Some(bad) = quad_nodes.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(TmcError::InvalidArgument(format!(
            "quadrature node {bad} outside [0, 1]"
        )));
    }
    let c = theta_coefficients(s, quad_nodes);
    thetas_with(stream.as_ref(), n, &c, method)
}

fn thetas_with(stream: &[f64], n: usize, c: &Array2<f64>, method: Method) -> Result<Array2<f64>> {
    let s = c.nrows();
    match method {
        Method::Tmc => build_operator(stream, n, s)?.fast_matmat(c.view()),
        Method::Mc => {
            if stream.len() < n * s {
                return Err(TmcError::InsufficientStream {
                    needed: n * s,
                    available: stream.len(),
                });
            }
            let mut out = Array2::zeros((n, c.ncols()));
            for (row, y) in out.rows_mut().into_iter().zip(stream.chunks_exact(s)) {
                let mut row = row;
                vecmat_into(y, c.view(), row.as_slice_mut().expect("fresh array is contiguous"));
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field1d {
    /// `a = 2 + Σ y_j sin(2πjx)/j^{3/2}`, `y_j ~ U(−1/2, 1/2)`.
    Uniform,
    /// `a = exp(Σ y_j sin(2πjx)/j²)`, `y_j ~ N(0, 1)`.
    LogNormal,
}

/// One of the two 1D benchmarks at truncation `s` and mesh `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ode1d {
    pub field: Field1d,
    pub s: usize,
    pub m: usize,
}

impl Ode1d {
    pub fn new(field: Field1d, s: usize, m: usize) -> Result<Self> {
        check_mesh(m)?;
        if s == 0 {
            return Err(TmcError::InvalidArgument("s must be >= 1".into()));
        }
        Ok(Self { field, s, m })
    }

    pub fn law(&self) -> Law {
        match self.field {
            Field1d::Uniform => Law::UniformCentered,
            Field1d::LogNormal => Law::StdNormal,
        }
    }

    /// Matrix of the linear stage `y ↦ y·A`.
    ///
    /// Uniform: columns `0..M−1` hold the diagonal coefficients of rows
    /// `1..M−1` and columns `M−1..2M−3` the off-diagonal ones. Log-normal:
    /// one column of theta coefficients per mesh node.
    pub fn linear_stage(&self) -> Array2<f64> {
        let (s, m) = (self.s, self.m);
        match self.field {
            Field1d::Uniform => Array2::from_shape_fn((s, 2 * m - 3), |(i, c)| {
                if c < m - 1 {
                    uniform_diag_coeff(i + 1, c + 1, m)
                } else {
                    uniform_off_coeff(i + 1, c - (m - 1) + 1, m)
                }
            }),
            Field1d::LogNormal => mesh_theta_coefficients(s, m),
        }
    }

    /// `u_M(1/2)` from one row of the linear stage.
    pub fn solve_from_stage(&self, z: &[f64]) -> Result<f64> {
        let m = self.m;
        match self.field {
            Field1d::Uniform => {
                if z.len() != 2 * m - 3 {
                    return Err(TmcError::DimensionMismatch {
                        expected: 2 * m - 3,
                        got: z.len(),
                    });
                }
                let mf = m as f64;
                let diag = z[..m - 1].iter().map(|v| 4.0 * mf + v).collect();
                let off = z[m - 1..].iter().map(|v| -2.0 * mf + v).collect();
                let sys = TridiagonalSystem::new(diag, off, vec![1.0 / mf; m - 1])?;
                center_value(&sys, m)
            }
            Field1d::LogNormal => solve_u_half_lognormal(z, m),
        }
    }

    /// `u_M(1/2)` from the raw parameters `y`.
    pub fn solve(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.s {
            return Err(TmcError::DimensionMismatch {
                expected: self.s,
                got: y.len(),
            });
        }
        match self.field {
            Field1d::Uniform => solve_u_half_uniform(y, self.m),
            Field1d::LogNormal => {
                let c = mesh_theta_coefficients(self.s, self.m);
                let mut theta = vec![0.0; self.m + 1];
                vecmat_into(y, c.view(), &mut theta);
                solve_u_half_lognormal(&theta, self.m)
            }
        }
    }

    /// `y ↦ u_M(1/2)` with the field expansion as linear stage.
    pub fn integrand(&self) -> Integrand {
        let model = *self;
        Integrand::linear(self.law(), self.linear_stage(), move |z| model.solve_from_stage(z))
    }
}
