//! Executes an experiment: `R` replications per method per ladder triple.

use std::time::Instant;

use anyhow::{bail, Result};
use ndarray::Array1;
use tmc_core::{
    generate_mvn, mc_estimate, random_upper_factor, replicate_par, tmc_estimate, EstimateResult, Field1d, Integrand,
    Method, Ode1d, Pde2d, ReplicationStats, TriangularFactor,
};

use crate::config::{Benchmark, ExperimentConfig};
use crate::ladder::Triple;
use crate::record::{attach_efficiency, ExperimentRecord};

/// What one replication evaluates.
enum Workload {
    Integrand(Integrand),
    /// Mean of all coordinates of `N` points from `N(0, AᵀA)`.
    Mvn(TriangularFactor),
}

impl Workload {
    fn build(benchmark: Benchmark, t: Triple, base_seed: u64) -> Result<Self> {
        Ok(match benchmark {
            Benchmark::Mvn => Workload::Mvn(random_upper_factor(t.s, base_seed)?),
            Benchmark::Ode1dUniform => Workload::Integrand(Ode1d::new(Field1d::Uniform, t.s, t.m)?.integrand()),
            Benchmark::Ode1dLognormal => Workload::Integrand(Ode1d::new(Field1d::LogNormal, t.s, t.m)?.integrand()),
            Benchmark::Pde2d => Workload::Integrand(Pde2d::new(t.s, t.m)?.integrand()),
            Benchmark::AnovaVerify => bail!("anova-verify runs checks, not replications"),
        })
    }

    fn replicate(&self, method: Method, n: usize, r: usize, base_seed: u64) -> tmc_core::Result<ReplicationStats> {
        replicate_par(r, base_seed, |seed, rep| {
            let index = method.stream_index(rep);
            match self {
                Workload::Integrand(f) => match method {
                    Method::Mc => mc_estimate(f, n, seed, index),
                    Method::Tmc => tmc_estimate(f, n, seed, index),
                },
                Workload::Mvn(factor) => {
                    let start = Instant::now();
                    let mu = Array1::zeros(factor.dim());
                    let points = generate_mvn(method, mu.view(), factor, n, seed, index)?;
                    let value = points.sum() / points.len() as f64;
                    Ok(EstimateResult {
                        value,
                        n,
                        method,
                        wall_time: start.elapsed(),
                    })
                }
            }
        })
    }
}

/// Runs every `(triple, method)` pair in ladder order.
///
/// Solver failures become flagged records rather than errors; invalid
/// configurations are errors. Values depend only on the configuration and
/// seed, never on the size of the thread pool.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let triples = config.triples()?;
    if triples.is_empty() {
        bail!("the ladder is empty");
    }
    let mut records = Vec::with_capacity(triples.len() * config.methods.len());
    for t in triples {
        let workload = Workload::build(config.benchmark, t, config.base_seed)?;
        for &method in &config.methods {
            let record = match workload.replicate(method, t.n, config.replications, config.base_seed) {
                Ok(stats) => ExperimentRecord {
                    benchmark: config.benchmark,
                    method,
                    triple: t,
                    grand_mean: stats.grand_mean,
                    estimator_variance: stats.estimator_variance,
                    avg_time_seconds: stats.avg_time,
                    efficiency: None,
                    failure: None,
                },
                Err(e) => ExperimentRecord::failed(config.benchmark, method, t, e.to_string()),
            };
            records.push(record);
        }
    }
    attach_efficiency(&mut records);
    Ok(records)
}

/// Runs `job` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(job)),
        None => Ok(job()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Settings;

    fn config(pairs: &[(&str, &str)]) -> ExperimentConfig {
        let mut s = Settings::default();
        for (k, v) in pairs {
            s.set(k, v).unwrap();
        }
        ExperimentConfig::from_settings(&s).unwrap()
    }

    #[test]
    fn one_record_per_triple_and_method() {
        let c = config(&[
            ("benchmark", "ode1d-uniform"),
            ("ladder", "N=M=s"),
            ("N", "4,8"),
            ("R", "3"),
        ]);
        let recs = run(&c).unwrap();
        let order: Vec<_> = recs.iter().map(|r| (r.triple.n, r.method)).collect();
        assert_eq!(
            order,
            vec![(4, Method::Mc), (4, Method::Tmc), (8, Method::Mc), (8, Method::Tmc)]
        );
        assert!(recs
            .iter()
            .all(|r| r.efficiency.is_some() && r.estimator_variance >= 0.0));
    }

    #[test]
    fn single_point_mvn() {
        let c = config(&[("benchmark", "mvn"), ("N", "1"), ("s", "1"), ("R", "4")]);
        let recs = run(&c).unwrap();
        assert_eq!(recs.len(), 2);
        // One scalar point per replication; TMC and MC draw from the same law.
        for r in &recs {
            assert!(r.grand_mean.is_finite() && r.estimator_variance > 0.0);
        }
    }

    #[test]
    fn values_ignore_thread_count() {
        let c = config(&[("benchmark", "pde2d"), ("ladder", "N=M^2=s"), ("N", "16"), ("R", "4")]);
        let one = with_threads(Some(1), || run(&c)).unwrap().unwrap();
        let four = with_threads(Some(4), || run(&c)).unwrap().unwrap();
        for (a, b) in one.iter().zip(&four) {
            assert_eq!(a.grand_mean.to_bits(), b.grand_mean.to_bits());
            assert_eq!(a.estimator_variance.to_bits(), b.estimator_variance.to_bits());
        }
    }

    #[test]
    fn anova_verify_has_no_replications() {
        let c = config(&[("benchmark", "anova-verify"), ("N", "4"), ("s", "3")]);
        assert!(run(&c).is_err());
    }
}
