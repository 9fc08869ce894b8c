//! Experiment records and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use tmc_core::{efficiency_ratio, Method};

use crate::config::Benchmark;
use crate::ladder::Triple;

pub const CSV_HEADER: &str = "benchmark,method,N,M,s,mean,variance,time_s,efficiency";

/// Replication summary for one method on one ladder triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub benchmark: Benchmark,
    pub method: Method,
    pub triple: Triple,
    pub grand_mean: f64,
    pub estimator_variance: f64,
    pub avg_time_seconds: f64,
    /// Set when both methods ran on this triple and neither failed.
    pub efficiency: Option<f64>,
    /// Why the run failed; the numeric fields are then NaN.
    pub failure: Option<String>,
}

impl ExperimentRecord {
    pub fn failed(benchmark: Benchmark, method: Method, triple: Triple, reason: String) -> Self {
        Self {
            benchmark,
            method,
            triple,
            grand_mean: f64::NAN,
            estimator_variance: f64::NAN,
            avg_time_seconds: f64::NAN,
            efficiency: None,
            failure: Some(reason),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }

    fn columns(&self) -> (String, String, String) {
        (
            format_significant(self.grand_mean, 6),
            format!("{:.2e}", self.estimator_variance),
            format!("{:.3}", self.avg_time_seconds),
        )
    }
}

/// Fills `efficiency` for every triple where both MC and TMC succeeded.
///
/// The ratio is taken from the rounded variance and time columns, so it can
/// be recomputed exactly from the CSV.
pub fn attach_efficiency(records: &mut [ExperimentRecord]) {
    let n = records.len();
    for i in 0..n {
        if records[i].method != Method::Mc || records[i].is_failed() {
            continue;
        }
        let partner = (0..n).find(|&j| {
            records[j].method == Method::Tmc
                && records[j].triple == records[i].triple
                && records[j].benchmark == records[i].benchmark
        });
        let Some(j) = partner else { continue };
        if records[j].is_failed() {
            continue;
        }
        let (_, var_mc, t_mc) = records[i].columns();
        let (_, var_tmc, t_tmc) = records[j].columns();
        let parse = |s: &str| s.parse::<f64>().expect("formatted float parses");
        let eff = efficiency_ratio(parse(&t_mc), parse(&var_mc), parse(&t_tmc), parse(&var_tmc));
        records[i].efficiency = Some(eff);
        records[j].efficiency = Some(eff);
    }
}

/// `x` in plain decimal notation with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let exponent = x.abs().log10().floor() as i32;
    let mut decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    let mut out = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.999996 → 10.00000).
    if decimals > 0
        && out
            .trim_start_matches('-')
            .parse::<f64>()
            .is_ok_and(|v| v >= 10f64.powi(exponent + 1))
    {
        decimals -= 1;
        out = format!("{x:.decimals$}");
    }
    out
}

/// The CSV text for `records`; an empty list is an error.
pub fn render_csv(records: &[ExperimentRecord]) -> Result<String> {
    if records.is_empty() {
        bail!("no records to write");
    }
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let t = r.triple;
        let (mean, variance, time, efficiency) = if r.is_failed() {
            (String::new(), String::new(), String::new(), "failed".to_string())
        } else {
            let (m, v, ti) = r.columns();
            (
                m,
                v,
                ti,
                r.efficiency.map(|e| format_significant(e, 6)).unwrap_or_default(),
            )
        };
        writeln!(
            out,
            "{},{},{},{},{},{mean},{variance},{time},{efficiency}",
            r.benchmark, r.method, t.n, t.m, t.s
        )
        .expect("writing to a String cannot fail");
    }
    Ok(out)
}

/// Writes the CSV for `records` to `path`. Nothing is created when there
/// are no records.
pub fn emit_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let text = render_csv(records)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
