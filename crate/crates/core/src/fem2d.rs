//! Linear finite elements for `−∇·(a ∇u) = 100 x₁` on the unit square with
//! zero boundary values and
//! `a(x, y) = 1 + Σ_j y_j sin(πk_{j,1}x₁) sin(πk_{j,2}x₂) / (k_{j,1}² + k_{j,2}²)²`.
//!
//! The mesh splits each square `[p/M, (p+1)/M] × [q/M, (q+1)/M]` along its
//! (1, 1) diagonal into a lower triangle `(p,q), (p+1,q), (p+1,q+1)` and an
//! upper triangle `(p,q), (p+1,q+1), (p,q+1)`. Interior node `(p, q)` has
//! index `(p−1)(M−1) + (q−1)`.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::error::{Result, TmcError};
use crate::estimators::Integrand;
use crate::krylov::{bicgstab, KrylovSolution, SparseSystem};
use crate::sampling::Law;

/// Relative residual at which BiCGSTAB stops.
pub const SOLVER_TOLERANCE: f64 = 1e-5;

/// First `s` frequency pairs ordered by `k₁² + k₂²`, ties by `(k₁, k₂)`.
pub fn frequency_ordering(s: usize) -> Vec<(usize, usize)> {
    let mut k = ((4.0 * s as f64 / PI).sqrt().ceil() as usize).max(1);
    loop {
        // Every pair with k₁² + k₂² ≤ k² + 1 has both entries ≤ k.
        let bound = k * k + 1;
        let mut pairs: Vec<(usize, usize)> = (1..=k)
            .flat_map(|a| (1..=k).map(move |b| (a, b)))
            .filter(|(a, b)| a * a + b * b <= bound)
            .collect();
        if pairs.len() >= s {
            pairs.sort_by_key(|&(a, b)| (a * a + b * b, a, b));
            pairs.truncate(s);
            return pairs;
        }
        k += 1;
    }
}

/// `1/(k₁² + k₂²)²`.
pub fn decay(freq: (usize, usize)) -> f64 {
    let n = (freq.0 * freq.0 + freq.1 * freq.1) as f64;
    1.0 / (n * n)
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// `∫_{x0}^{x0+h} sin(γx + φ) dx`.
fn sine_integral(gamma: f64, phi: f64, x0: f64, h: f64) -> f64 {
    h * (gamma * (x0 + 0.5 * h) + phi).sin() * sinc(0.5 * gamma * h)
}

/// Integrals of `sin(πk₁x₁) sin(πk₂x₂)` over the lower and upper triangles of
/// square `(p, q)`.
pub fn triangle_integrals(freq: (usize, usize), m: usize, p: usize, q: usize) -> (f64, f64) {
    let h = 1.0 / m as f64;
    let alpha = PI * freq.0 as f64;
    let beta = PI * freq.1 as f64;
    let x0 = p as f64 * h;
    let y0 = q as f64 * h;
    let d = y0 - x0;
    let sx = sine_integral(alpha, 0.0, x0, h);
    let sy = sine_integral(beta, 0.0, y0, h);
    // ∫ sin(αx) [cos(βy0) − cos(β(x + d))] / β dx over the lower triangle.
    let lower = ((beta * y0).cos() * sx
        - 0.5 * (sine_integral(alpha + beta, beta * d, x0, h) + sine_integral(alpha - beta, -beta * d, x0, h)))
        / beta;
    (lower, sx * sy - lower)
}

/// Independent stiffness entries owned by a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Centre,
    North,
    East,
}

/// Compressed-row pattern of the stiffness matrix and its map to the
/// independent entries `(centre, east, north)` of each node.
#[derive(Debug, Clone)]
struct Pattern {
    m: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    /// Independent-entry column of each stored entry.
    stage_col: Vec<usize>,
    /// Constant-coefficient value of each stored entry.
    base: Vec<f64>,
    /// `(p, q, slot)` for each independent entry.
    entries: Vec<(usize, usize, Slot)>,
}

impl Pattern {
    fn new(m: usize) -> Self {
        let n1 = m - 1;
        let node = |p: usize, q: usize| (p - 1) * n1 + (q - 1);
        let mut entries = Vec::new();
        let mut own = vec![[usize::MAX; 3]; n1 * n1];
        for p in 1..m {
            for q in 1..m {
                let i = node(p, q);
                own[i][0] = entries.len();
                entries.push((p, q, Slot::Centre));
                if p + 1 < m {
                    own[i][1] = entries.len();
                    entries.push((p, q, Slot::East));
                }
                if q + 1 < m {
                    own[i][2] = entries.len();
                    entries.push((p, q, Slot::North));
                }
            }
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut stage_col = Vec::new();
        let mut base = Vec::new();
        for p in 1..m {
            for q in 1..m {
                let i = node(p, q);
                let mut push = |col: usize, stage: usize, value: f64| {
                    col_idx.push(col);
                    stage_col.push(stage);
                    base.push(value);
                };
                if p > 1 {
                    push(node(p - 1, q), own[node(p - 1, q)][1], -1.0);
                }
                if q > 1 {
                    push(node(p, q - 1), own[node(p, q - 1)][2], -1.0);
                }
                push(i, own[i][0], 4.0);
                if q + 1 < m {
                    push(node(p, q + 1), own[i][2], -1.0);
                }
                if p + 1 < m {
                    push(node(p + 1, q), own[i][1], -1.0);
                }
                row_ptr.push(col_idx.len());
            }
        }
        Self {
            m,
            row_ptr,
            col_idx,
            stage_col,
            base,
            entries,
        }
    }

    fn rhs(&self) -> Vec<f64> {
        let m = self.m;
        let mf = m as f64;
        (1..m)
            .flat_map(|p| (1..m).map(move |_| 100.0 * (p as f64 / mf) / (mf * mf)))
            .collect()
    }

    /// `A^(j)` entries for frequency `freq`, one per independent entry.
    fn coupling(&self, freq: (usize, usize)) -> Vec<f64> {
        let m = self.m;
        let mut lower = vec![0.0; m * m];
        let mut upper = vec![0.0; m * m];
        for p in 0..m {
            for q in 0..m {
                let (l, u) = triangle_integrals(freq, m, p, q);
                lower[p * m + q] = l;
                upper[p * m + q] = u;
            }
        }
        let t1 = |p: usize, q: usize| lower[p * m + q];
        let t2 = |p: usize, q: usize| upper[p * m + q];
        let scale = (m * m) as f64 * decay(freq);
        self.entries
            .iter()
            .map(|&(p, q, slot)| {
                scale
                    * match slot {
                        Slot::Centre => {
                            t1(p, q)
                                + t2(p, q)
                                + 2.0 * t1(p - 1, q)
                                + t1(p - 1, q - 1)
                                + t2(p - 1, q - 1)
                                + 2.0 * t2(p, q - 1)
                        }
                        Slot::East => -(t1(p, q) + t2(p, q - 1)),
                        Slot::North => -(t2(p, q) + t1(p - 1, q)),
                    }
            })
            .collect()
    }

    fn system(&self, z: &[f64]) -> Result<SparseSystem> {
        if z.len() != self.entries.len() {
            return Err(TmcError::DimensionMismatch {
                expected: self.entries.len(),
                got: z.len(),
            });
        }
        let values = self.base.iter().zip(&self.stage_col).map(|(b, &c)| b + z[c]).collect();
        SparseSystem::from_csr(self.row_ptr.clone(), self.col_idx.clone(), values, self.rhs())
    }
}

fn check_mesh(m: usize) -> Result<()> {
    if m < 2 || m % 2 == 1 {
        return Err(TmcError::InvalidArgument(format!(
            "mesh size M = {m} must be even and >= 2 so that (1/2, 1/2) is a node"
        )));
    }
    Ok(())
}

/// Stiffness system for parameters `y` with the first `y.len()` frequencies.
pub fn assemble_2d(y: &[f64], m: usize, freqs: &[(usize, usize)]) -> Result<SparseSystem> {
    if m < 2 {
        return Err(TmcError::InvalidArgument(format!("M = {m} must be >= 2")));
    }
    if freqs.len() < y.len() {
        return Err(TmcError::DimensionMismatch {
            expected: y.len(),
            got: freqs.len(),
        });
    }
    let pattern = Pattern::new(m);
    let mut z = vec![0.0; pattern.entries.len()];
    for (yj, &freq) in y.iter().zip(freqs) {
        if *yj != 0.0 {
            for (zi, a) in z.iter_mut().zip(pattern.coupling(freq)) {
                *zi += yj * a;
            }
        }
    }
    pattern.system(&z)
}

/// Solves with BiCGSTAB at the standard tolerance and `10·dim` iterations.
pub fn solve_system(sys: &SparseSystem) -> Result<KrylovSolution> {
    bicgstab(sys, SOLVER_TOLERANCE, 10 * sys.dim())
}

fn center_index(m: usize) -> usize {
    (m / 2 - 1) * (m - 1) + (m / 2 - 1)
}

/// `u_M((1/2, 1/2))`.
pub fn solve_center(y: &[f64], m: usize, freqs: &[(usize, usize)]) -> Result<f64> {
    check_mesh(m)?;
    let sys = assemble_2d(y, m, freqs)?;
    Ok(solve_system(&sys)?.x[center_index(m)])
}

/// The 2D benchmark at truncation `s` and mesh `M`.
#[derive(Debug, Clone)]
pub struct Pde2d {
    s: usize,
    freqs: Vec<(usize, usize)>,
    pattern: Pattern,
}

impl Pde2d {
    pub fn new(s: usize, m: usize) -> Result<Self> {
        check_mesh(m)?;
        if s == 0 {
            return Err(TmcError::InvalidArgument("s must be >= 1".into()));
        }
        Ok(Self {
            s,
            freqs: frequency_ordering(s),
            pattern: Pattern::new(m),
        })
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn m(&self) -> usize {
        self.pattern.m
    }

    pub fn frequencies(&self) -> &[(usize, usize)] {
        &self.freqs
    }

    /// Number of independent stiffness entries (centre, east, north per node).
    pub fn stage_width(&self) -> usize {
        self.pattern.entries.len()
    }

    /// `s × stage_width` matrix whose row `j` holds the entries of `A^(j+1)`.
    pub fn linear_stage(&self) -> Array2<f64> {
        let t = self.stage_width();
        let mut a = Array2::zeros((self.s, t));
        for (mut row, &freq) in a.rows_mut().into_iter().zip(&self.freqs) {
            for (dst, v) in row.iter_mut().zip(self.pattern.coupling(freq)) {
                *dst = v;
            }
        }
        a
    }

    pub fn system_from_stage(&self, z: &[f64]) -> Result<SparseSystem> {
        self.pattern.system(z)
    }

    pub fn solve_from_stage(&self, z: &[f64]) -> Result<f64> {
        let sys = self.pattern.system(z)?;
        Ok(solve_system(&sys)?.x[center_index(self.m())])
    }

    pub fn solve(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.s {
            return Err(TmcError::DimensionMismatch {
                expected: self.s,
                got: y.len(),
            });
        }
        solve_center(y, self.m(), &self.freqs)
    }

    /// `y ↦ u_M((1/2, 1/2))` with `y_j ~ U(−1/2, 1/2)`.
    pub fn integrand(&self) -> Integrand {
        let model = self.clone();
        Integrand::linear(Law::UniformCentered, self.linear_stage(), move |z| {
            model.solve_from_stage(z)
        })
    }
}
