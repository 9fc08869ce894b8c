//! Standard MC and Toeplitz MC estimators and the replication protocol.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::dense::vecmat_into;
use crate::error::{Result, TmcError};
use crate::sampling::{make_stream, splitmix64, Law, Method};
use crate::toeplitz::build_operator;

/// Offset separating TMC stream indices from MC ones within a replication
/// study, so the two methods never share draws.
pub const TMC_STREAM_OFFSET: u64 = 1 << 32;

impl Method {
    /// Stream index used by replication `r` of this method.
    pub fn stream_index(self, replication: u64) -> u64 {
        match self {
            Method::Mc => replication,
            Method::Tmc => TMC_STREAM_OFFSET + replication,
        }
    }
}

type Outer = Arc<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;

#[derive(Clone)]
enum Stage {
    Direct(Outer),
    Linear { matrix: Arc<Array2<f64>>, outer: Outer },
}

/// A function on `s`-dimensional inputs drawn i.i.d. from one scalar law.
///
/// With a linear stage the integrand is `f(x) = g(x A)` and the estimators
/// compute all the `x A` products at once (densely for MC, by FFT for TMC).
#[derive(Clone)]
pub struct Integrand {
    dim: usize,
    law: Law,
    stage: Stage,
}

impl fmt::Debug for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Integrand");
        d.field("dim", &self.dim).field("law", &self.law);
        if let Stage::Linear { matrix, .. } = &self.stage {
            d.field("linear_stage", &matrix.dim());
        }
        d.finish()
    }
}

impl Integrand {
    pub fn new<F>(dim: usize, law: Law, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::fallible(dim, law, move |x| Ok(f(x)))
    }

    pub fn fallible<F>(dim: usize, law: Law, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        assert!(dim >= 1, "integrand dimension must be >= 1");
        Self {
            dim,
            law,
            stage: Stage::Direct(Arc::new(f)),
        }
    }

    /// `f(x) = g(x A)` with `A` of shape `s × t`; `g` receives length-`t` rows.
    pub fn linear<G>(law: Law, matrix: Array2<f64>, g: G) -> Self
    where
        G: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        assert!(matrix.nrows() >= 1, "linear stage needs s >= 1");
        Self {
            dim: matrix.nrows(),
            law,
            stage: Stage::Linear {
                matrix: Arc::new(matrix.as_standard_layout().into_owned()),
                outer: Arc::new(g),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn law(&self) -> Law {
        self.law
    }

    pub fn linear_stage(&self) -> Option<ArrayView2<'_, f64>> {
        match &self.stage {
            Stage::Linear { matrix, .. } => Some(matrix.view()),
            Stage::Direct(_) => None,
        }
    }

    /// Evaluates `f(x)`, forming `x A` densely when there is a linear stage.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(TmcError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        match &self.stage {
            Stage::Direct(f) => f(x),
            Stage::Linear { matrix, outer } => {
                let mut z = vec![0.0; matrix.ncols()];
                vecmat_into(x, matrix.view(), &mut z);
                outer(&z)
            }
        }
    }
}

/// One estimate with its end-to-end wall time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub value: f64,
    pub n: usize,
    pub method: Method,
    pub wall_time: Duration,
}

impl EstimateResult {
    pub fn seconds(&self) -> f64 {
        self.wall_time.as_secs_f64()
    }
}

/// How the TMC path forms `X A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Product {
    #[default]
    Fft,
    /// Direct summation; only useful as a cross-check.
    Naive,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(TmcError::InvalidArgument("N must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// Standard MC on explicit draws: point `n` is `values[n·s .. (n+1)·s]`.
pub fn mc_on_values(f: &Integrand, values: &[f64], n: usize) -> Result<f64> {
    check_n(n)?;
    let s = f.dim;
    if values.len() < n * s {
        return Err(TmcError::InsufficientStream {
            needed: n * s,
            available: values.len(),
        });
    }
    let mut sum = 0.0;
    match &f.stage {
        Stage::Direct(g) => {
            for x in values.chunks_exact(s).take(n) {
                sum += g(x)?;
            }
        }
        Stage::Linear { matrix, outer } => {
            let mut z = vec![0.0; matrix.ncols()];
            for x in values.chunks_exact(s).take(n) {
                vecmat_into(x, matrix.view(), &mut z);
                sum += outer(&z)?;
            }
        }
    }
    Ok(sum / n as f64)
}

/// TMC on explicit draws: point `n` is the window `(v[n+s-1], ..., v[n])`.
pub fn tmc_on_values(f: &Integrand, values: &[f64], n: usize, product: Product) -> Result<f64> {
    check_n(n)?;
    let s = f.dim;
    let op = build_operator(values, n, s)?;
    let mut sum = 0.0;
    match &f.stage {
        Stage::Direct(g) => {
            let mut x = vec![0.0; s];
            for i in 0..n {
                for (slot, v) in x.iter_mut().zip(values[i..i + s].iter().rev()) {
                    *slot = *v;
                }
                sum += g(&x)?;
            }
        }
        Stage::Linear { matrix, outer } => {
            let y = match product {
                Product::Fft => op.fast_matmat(matrix.view())?,
                Product::Naive => op.naive_matmat(matrix.view())?,
            };
            for row in y.rows() {
                sum += outer(row.as_slice().expect("product rows are contiguous"))?;
            }
        }
    }
    Ok(sum / n as f64)
}

/// Standard MC estimate from `N·s` fresh draws of stream `(seed, stream_index)`.
pub fn mc_estimate(f: &Integrand, n: usize, seed: u64, stream_index: u64) -> Result<EstimateResult> {
    check_n(n)?;
    let start = Instant::now();
    let stream = make_stream(seed, stream_index, f.law, n * f.dim);
    let value = mc_on_values(f, stream.values(), n)?;
    Ok(EstimateResult {
        value,
        n,
        method: Method::Mc,
        wall_time: start.elapsed(),
    })
}

/// TMC estimate from `N + s − 1` draws of stream `(seed, stream_index)`.
pub fn tmc_estimate(f: &Integrand, n: usize, seed: u64, stream_index: u64) -> Result<EstimateResult> {
    tmc_estimate_with(f, n, seed, stream_index, Product::Fft)
}

pub fn tmc_estimate_with(
    f: &Integrand,
    n: usize,
    seed: u64,
    stream_index: u64,
    product: Product,
) -> Result<EstimateResult> {
    check_n(n)?;
    let start = Instant::now();
    let stream = make_stream(seed, stream_index, f.law, n + f.dim - 1);
    let value = tmc_on_values(f, stream.values(), n, product)?;
    Ok(EstimateResult {
        value,
        n,
        method: Method::Tmc,
        wall_time: start.elapsed(),
    })
}

/// Either estimator, selected by `method`.
pub fn estimate(method: Method, f: &Integrand, n: usize, seed: u64, stream_index: u64) -> Result<EstimateResult> {
    match method {
        Method::Mc => mc_estimate(f, n, seed, stream_index),
        Method::Tmc => tmc_estimate(f, n, seed, stream_index),
    }
}

/// Mean of `L` independent TMC estimates on streams `1..=L`, run on the
/// current rayon pool. Its variance is the single-run TMC variance over `L`.
pub fn parallel_tmc_average(f: &Integrand, n: usize, l: usize, seed: u64) -> Result<EstimateResult> {
    check_n(n)?;
    if l == 0 {
        return Err(TmcError::InvalidArgument("L must be >= 1".into()));
    }
    let start = Instant::now();
    let values = (1..=l as u64)
        .into_par_iter()
        .map(|v| tmc_estimate(f, n, seed, v).map(|r| r.value))
        .collect::<Result<Vec<f64>>>()?;
    let value = values.iter().sum::<f64>() / l as f64;
    Ok(EstimateResult {
        value,
        n: n * l,
        method: Method::Tmc,
        wall_time: start.elapsed(),
    })
}

/// Seed for replication `r` when each replication needs its own seed rather
/// than its own stream index.
pub fn replication_seed(base_seed: u64, replication: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(replication))
}

/// Grand mean, estimator variance and mean wall time over `R` replications.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationStats {
    pub values: Vec<f64>,
    pub grand_mean: f64,
    /// `Σ (value_r − grand_mean)² / (R (R − 1))`.
    pub estimator_variance: f64,
    pub avg_time: f64,
}

impl ReplicationStats {
    pub fn from_values(values: Vec<f64>, times: &[f64]) -> Result<Self> {
        let r = values.len();
        if r < 2 {
            return Err(TmcError::TooFewReplications(r));
        }
        let grand_mean = values.iter().sum::<f64>() / r as f64;
        let ss: f64 = values.iter().map(|v| (v - grand_mean).powi(2)).sum();
        let estimator_variance = ss / (r as f64 * (r as f64 - 1.0));
        let avg_time = if times.is_empty() {
            0.0
        } else {
            times.iter().sum::<f64>() / times.len() as f64
        };
        Ok(Self {
            values,
            grand_mean,
            estimator_variance,
            avg_time,
        })
    }

    pub fn replications(&self) -> usize {
        self.values.len()
    }

    /// Sample variance of a single estimate, `R · estimator_variance`.
    pub fn sample_variance(&self) -> f64 {
        self.estimator_variance * self.values.len() as f64
    }
}

/// Runs `run(base_seed, r)` for `r = 0..R` in order.
pub fn replicate<F>(r: usize, base_seed: u64, run: F) -> Result<ReplicationStats>
where
    F: Fn(u64, u64) -> Result<EstimateResult>,
{
    if r < 2 {
        return Err(TmcError::TooFewReplications(r));
    }
    let results = (0..r as u64).map(|i| run(base_seed, i)).collect::<Result<Vec<_>>>()?;
    collect_stats(results)
}

/// Same as [`replicate`] but spread over the current rayon pool; values do
/// not depend on the pool size.
pub fn replicate_par<F>(r: usize, base_seed: u64, run: F) -> Result<ReplicationStats>
where
    F: Fn(u64, u64) -> Result<EstimateResult> + Sync + Send,
{
    if r < 2 {
        return Err(TmcError::TooFewReplications(r));
    }
    let results = (0..r as u64)
        .into_par_iter()
        .map(|i| run(base_seed, i))
        .collect::<Result<Vec<_>>>()?;
    collect_stats(results)
}

fn collect_stats(results: Vec<EstimateResult>) -> Result<ReplicationStats> {
    let times: Vec<f64> = results.iter().map(EstimateResult::seconds).collect();
    ReplicationStats::from_values(results.into_iter().map(|e| e.value).collect(), &times)
}

/// Relative efficiency `(T_MC σ²_MC) / (T_TMC σ²_TMC)`; `+∞` when the
/// denominator vanishes.
pub fn efficiency_ratio(t_mc: f64, var_mc: f64, t_tmc: f64, var_tmc: f64) -> f64 {
    let den = t_tmc * var_tmc;
    if den == 0.0 {
        f64::INFINITY
    } else {
        t_mc * var_mc / den
    }
}

pub fn efficiency(mc: &ReplicationStats, tmc: &ReplicationStats) -> f64 {
    efficiency_ratio(mc.avg_time, mc.estimator_variance, tmc.avg_time, tmc.estimator_variance)
}
