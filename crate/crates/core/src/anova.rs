//! Exact ANOVA decomposition on tensor Gauss grids, the MC and TMC variance
//! formulas built from it, and brute-force enumeration oracles.
//!
//! Subsets `u ⊆ {1..s}` are bitmasks with bit `j − 1` standing for
//! coordinate `j`. The effect `f_u` is stored on the `q^|u|` tensor grid of
//! its own coordinates, smallest coordinate varying slowest.

use crate::error::{Result, TmcError};
use crate::estimators::Integrand;
use crate::quadrature::UnivariateLaw;
use crate::sampling::{Law, StreamRng};

/// Largest dimension the decomposition accepts.
pub const MAX_DIM: usize = 10;
/// Largest full tensor grid `q^s` the decomposition accepts.
pub const MAX_GRID: usize = 1 << 20;
/// Largest stream length `N + s − 1` (or `N·s`) the enumeration oracle visits.
pub const MAX_ENUMERATION_BITS: usize = 22;

/// Bitmask of the 1-based coordinates in `indices`.
pub fn subset(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &j| {
        assert!((1..=32).contains(&j), "coordinates are 1-based and at most 32");
        m | 1 << (j - 1)
    })
}

fn coords(mask: u32) -> Vec<usize> {
    (0..32).filter(|j| mask >> j & 1 == 1).collect()
}

/// All effects and their second moments for one integrand and one law.
#[derive(Debug, Clone)]
pub struct AnovaDecomposition {
    s: usize,
    law: UnivariateLaw,
    effects: Vec<Vec<f64>>,
    second_moments: Vec<f64>,
    /// Product weights of the `q^m` grid, for `m = 0..=s`.
    grid_weights: Vec<Vec<f64>>,
}

/// Variance of MC and TMC from the decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub n: usize,
    pub v_mc: f64,
    /// `(2/N²) Σ_ℓ (N − ℓ) per_lag[ℓ]`, so that `v_tmc = v_mc + cross_sum`.
    pub cross_sum: f64,
    pub v_tmc: f64,
    /// `per_lag[ℓ − 1] = Σ_{∅≠u⊆[1:s−ℓ]} I(f_u f_{u+ℓ})` for `ℓ = 1..s−1`.
    pub per_lag: Vec<f64>,
}

/// Decomposes `f` (of dimension `s`) over the discrete law `law`.
pub fn anova_decompose(f: &Integrand, s: usize, law: &UnivariateLaw) -> Result<AnovaDecomposition> {
    if f.dim() != s {
        return Err(TmcError::DimensionMismatch {
            expected: s,
            got: f.dim(),
        });
    }
    if s > MAX_DIM {
        return Err(TmcError::TooLarge(format!("ANOVA dimension {s} exceeds {MAX_DIM}")));
    }
    let q = law.len();
    let grid = q
        .checked_pow(s as u32)
        .filter(|&g| g <= MAX_GRID)
        .ok_or_else(|| TmcError::TooLarge(format!("{q}^{s} grid exceeds {MAX_GRID} points")))?;
    let nodes = law.nodes();
    let w = law.weights();

    let mut grid_weights = vec![vec![1.0]];
    for m in 1..=s {
        let prev = &grid_weights[m - 1];
        let next: Vec<f64> = prev.iter().flat_map(|&p| w.iter().map(move |&wk| p * wk)).collect();
        grid_weights.push(next);
    }

    let full = ((1u64 << s) - 1) as u32;
    let subsets = 1usize << s;

    // Marginal integrals P_u f = ∫ f dx_{−u}, obtained by integrating out one
    // coordinate of the parent u ∪ {j}, which is numerically larger than u.
    let mut marginals: Vec<Vec<f64>> = vec![Vec::new(); subsets];
    let mut x = vec![0.0; s];
    let mut values = Vec::with_capacity(grid);
    for idx in 0..grid {
        let mut rest = idx;
        for k in (0..s).rev() {
            x[k] = nodes[rest % q];
            rest /= q;
        }
        values.push(f.eval(&x)?);
    }
    marginals[full as usize] = values;
    for u in (0..full).rev() {
        let j = (0..s).rev().find(|j| u >> j & 1 == 0).expect("u is not the full set");
        let parent = u | 1 << j;
        let m = u.count_ones() as usize;
        let pos = (parent & ((1 << j) - 1)).count_ones() as usize;
        let inner = q.pow((m - pos) as u32);
        let outer = q.pow(pos as u32);
        let src = &marginals[parent as usize];
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            for (k, &wk) in w.iter().enumerate() {
                let base = (o * q + k) * inner;
                for i in 0..inner {
                    out[o * inner + i] += wk * src[base + i];
                }
            }
        }
        marginals[u as usize] = out;
    }

    // f_u = P_u f − Σ_{v⊊u} f_v, with proper subsets numerically smaller.
    let mut effects: Vec<Vec<f64>> = vec![Vec::new(); subsets];
    for u in 0..=full {
        let cu = coords(u);
        let m = cu.len();
        let mut eff = std::mem::take(&mut marginals[u as usize]);
        let mut v = u.wrapping_sub(1) & u;
        while v != u {
            subtract_embedded(&mut eff, &cu, v, &effects[v as usize], q);
            if v == 0 {
                break;
            }
            v = (v - 1) & u;
        }
        debug_assert_eq!(eff.len(), q.pow(m as u32));
        effects[u as usize] = eff;
    }

    let second_moments = (0..subsets)
        .map(|u| {
            let m = (u as u32).count_ones() as usize;
            effects[u].iter().zip(&grid_weights[m]).map(|(e, wt)| wt * e * e).sum()
        })
        .collect();

    Ok(AnovaDecomposition {
        s,
        law: law.clone(),
        effects,
        second_moments,
        grid_weights,
    })
}

/// `eff -= f_v` where `f_v` lives on the sub-grid of `v ⊆ u`.
fn subtract_embedded(eff: &mut [f64], cu: &[usize], v: u32, fv: &[f64], q: usize) {
    let m = cu.len();
    let mv = v.count_ones() as usize;
    // Stride, in the grid of v, of each position of u (0 when not in v).
    let mut strides = vec![0usize; m];
    let mut seen = 0;
    for (k, &c) in cu.iter().enumerate() {
        if v >> c & 1 == 1 {
            seen += 1;
            strides[k] = q.pow((mv - seen) as u32);
        }
    }
    for (idx, e) in eff.iter_mut().enumerate() {
        let mut rest = idx;
        let mut vi = 0;
        for k in (0..m).rev() {
            vi += (rest % q) * strides[k];
            rest /= q;
        }
        *e -= fv[vi];
    }
}

impl AnovaDecomposition {
    pub fn dim(&self) -> usize {
        self.s
    }

    pub fn law(&self) -> &UnivariateLaw {
        &self.law
    }

    /// Grid values of `f_u`.
    pub fn effect(&self, u: u32) -> &[f64] {
        &self.effects[u as usize]
    }

    /// `f_u` at the grid point whose coordinates (in increasing coordinate
    /// order) sit at the given node indices.
    pub fn effect_at(&self, u: u32, node_indices: &[usize]) -> f64 {
        let q = self.law.len();
        assert_eq!(node_indices.len(), u.count_ones() as usize);
        let idx = node_indices.iter().fold(0, |acc, &i| acc * q + i);
        self.effects[u as usize][idx]
    }

    /// `I(f_u²)`.
    pub fn second_moment(&self, u: u32) -> f64 {
        self.second_moments[u as usize]
    }

    pub fn mean(&self) -> f64 {
        self.effects[0][0]
    }

    /// `Σ_{u≠∅} I(f_u²)`, the variance of `f`.
    pub fn total_variance(&self) -> f64 {
        self.second_moments[1..].iter().sum()
    }

    /// Weights of the `q^m` product grid.
    pub fn grid_weights(&self, m: usize) -> &[f64] {
        &self.grid_weights[m]
    }

    /// Variance of the MC estimator with `N` points.
    pub fn mc_variance(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(TmcError::InvalidArgument("N must be >= 1".into()));
        }
        Ok(self.total_variance() / n as f64)
    }

    /// `I(f_u f_{u+ℓ})`, pairing the k-th smallest coordinate of `u` with the
    /// k-th smallest of `u + ℓ`.
    pub fn cross_term(&self, u: u32, lag: usize) -> Result<f64> {
        if u == 0 || lag == 0 || lag >= self.s || (u as u64) << lag >= 1u64 << self.s {
            return Err(TmcError::InvalidArgument(format!(
                "subset {u:#b} shifted by {lag} leaves [1:{}]",
                self.s
            )));
        }
        let m = u.count_ones() as usize;
        let a = &self.effects[u as usize];
        let b = &self.effects[(u << lag) as usize];
        Ok(self.grid_weights[m]
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum())
    }

    /// `Σ_{∅≠u⊆[1:s−ℓ]} I(f_u f_{u+ℓ})`.
    pub fn lag_sum(&self, lag: usize) -> Result<f64> {
        if lag == 0 || lag >= self.s {
            return Err(TmcError::InvalidArgument(format!("lag {lag} outside 1..{}", self.s)));
        }
        let limit = 1u32 << (self.s - lag);
        (1..limit).map(|u| self.cross_term(u, lag)).sum()
    }

    /// Variance of the TMC estimator with `N` windows.
    pub fn tmc_variance_theorem(&self, n: usize) -> Result<VarianceReport> {
        let v_mc = self.mc_variance(n)?;
        let per_lag = (1..self.s).map(|l| self.lag_sum(l)).collect::<Result<Vec<_>>>()?;
        let nf = n as f64;
        let weighted: f64 = (1..self.s.min(n)).map(|l| (nf - l as f64) * per_lag[l - 1]).sum();
        let cross_sum = 2.0 * weighted / (nf * nf);
        Ok(VarianceReport {
            n,
            v_mc,
            cross_sum,
            v_tmc: v_mc + cross_sum,
            per_lag,
        })
    }

    /// `α_ℓ = sqrt(Σ_{u : min u = ℓ} I(f_u²))` for `1 ≤ ℓ ≤ s`.
    pub fn alpha(&self, l: usize) -> Result<f64> {
        if l == 0 || l > self.s {
            return Err(TmcError::InvalidArgument(format!(
                "alpha index {l} outside 1..={}",
                self.s
            )));
        }
        let total: f64 = (1..1usize << self.s)
            .filter(|u| u.trailing_zeros() as usize == l - 1)
            .map(|u| self.second_moments[u])
            .sum();
        Ok(total.sqrt())
    }

    /// `(Σ_ℓ α_ℓ)² / N`, an upper bound on the TMC variance.
    pub fn corollary_bound(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(TmcError::InvalidArgument("N must be >= 1".into()));
        }
        let sum: f64 = (1..=self.s).map(|l| self.alpha(l)).sum::<Result<f64>>()?;
        Ok(sum * sum / n as f64)
    }
}

/// Exact moments of both estimators under the two-point law.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedVariance {
    pub mean: f64,
    /// Variance of one evaluation over the `2^s` points, divided by `N`.
    pub v_mc: f64,
    pub v_tmc: f64,
    /// MC variance by enumerating all `2^(N·s)` draws, when `N·s ≤ 22`.
    pub v_mc_enumerated: Option<f64>,
}

/// Enumerates every equiprobable ±1 stream of length `N + s − 1`.
pub fn enumerate_variance_exact(f: &Integrand, n: usize, s: usize) -> Result<EnumeratedVariance> {
    if f.dim() != s {
        return Err(TmcError::DimensionMismatch {
            expected: s,
            got: f.dim(),
        });
    }
    if n == 0 {
        return Err(TmcError::InvalidArgument("N must be >= 1".into()));
    }
    let bits = n + s - 1;
    if bits > MAX_ENUMERATION_BITS {
        return Err(TmcError::TooLarge(format!(
            "enumeration over 2^{bits} streams exceeds 2^{MAX_ENUMERATION_BITS}"
        )));
    }
    let points = 1usize << s;
    let mut x = vec![0.0; s];
    let table = (0..points)
        .map(|idx| {
            for (k, xk) in x.iter_mut().enumerate() {
                *xk = if idx >> k & 1 == 1 { 1.0 } else { -1.0 };
            }
            f.eval(&x)
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean, var_one) = mean_and_variance(table.iter().copied());

    // Window n is (x_{n+s−1}, ..., x_n): bit i of the slice lands at s−1−i.
    let reversed: Vec<usize> = (0..points)
        .map(|r| (0..s).fold(0, |acc, i| acc | (r >> i & 1) << (s - 1 - i)))
        .collect();
    let mask = points - 1;
    let nf = n as f64;
    let tmc = (0..1usize << bits).map(|b| (0..n).map(|i| table[reversed[b >> i & mask]]).sum::<f64>() / nf);
    let (_, v_tmc) = mean_and_variance(tmc);

    let v_mc_enumerated = (n * s <= MAX_ENUMERATION_BITS).then(|| {
        let mc = (0..1usize << (n * s)).map(|b| (0..n).map(|i| table[b >> (i * s) & mask]).sum::<f64>() / nf);
        mean_and_variance(mc).1
    });

    Ok(EnumeratedVariance {
        mean,
        v_mc: var_one / nf,
        v_tmc,
        v_mc_enumerated,
    })
}

fn mean_and_variance(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut count = 0usize;
    let mut sum = 0.0;
    for v in values.clone() {
        sum += v;
        count += 1;
    }
    let mean = sum / count as f64;
    let ss: f64 = values.map(|v| (v - mean).powi(2)).sum();
    (mean, ss / count as f64)
}

/// `f(x) = Σ_u c_u Π_{j∈u} x_j` with `coeffs[u]` indexed by bitmask.
pub fn multilinear(s: usize, coeffs: Vec<f64>, law: Law) -> Integrand {
    assert_eq!(coeffs.len(), 1 << s, "one coefficient per subset");
    Integrand::new(s, law, move |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(u, c)| (0..s).filter(|j| u >> j & 1 == 1).fold(*c, |p, j| p * x[j]))
            .sum()
    })
}

/// Multilinear function with coefficients uniform on `(−1, 1)`, drawn from
/// stream `(seed, 0)`.
pub fn random_multilinear(s: usize, seed: u64) -> Integrand {
    let mut rng = StreamRng::new(seed, 0, Law::UniformCentered);
    let coeffs = (0..1 << s).map(|_| 2.0 * rng.draw()).collect();
    multilinear(s, coeffs, Law::UniformCentered)
}

/// `f(x) = Σ_j x_j`.
pub fn additive(s: usize, law: Law) -> Integrand {
    Integrand::new(s, law, |x| x.iter().sum())
}

/// `f(x, y, z) = x − y − z + xy − xz − yz` under the standard normal law,
/// where TMC variance is about a third of MC variance.
pub fn three_factor_example() -> Integrand {
    Integrand::new(3, Law::StdNormal, |v| {
        let (x, y, z) = (v[0], v[1], v[2]);
        x - y - z + x * y - x * z - y * z
    })
}
