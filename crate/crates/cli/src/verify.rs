//! The `anova-verify` benchmark: closed-form variances checked against exact
//! enumeration and hand-derived values.

use std::fmt;

use anyhow::Result;
use tmc_core::anova::{random_multilinear, three_factor_example};
use tmc_core::{anova_decompose, enumerate_variance_exact, Law, UnivariateLaw};

/// Stream sizes small enough to enumerate every ±1 stream.
pub const ENUMERATION_SIZES: [(usize, usize); 4] = [(2, 2), (3, 2), (3, 3), (4, 3)];
pub const FUNCTIONS_PER_SIZE: u64 = 20;
pub const DEFAULT_EXAMPLE_N: [usize; 6] = [1, 2, 3, 4, 16, 100];
pub const TOLERANCE: f64 = 1e-12;

/// Outcome of one group of comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Largest deviation seen; for bound checks, the largest excess.
    pub max_error: f64,
    pub passed: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {} (max error {:.2e})", self.name, self.max_error)
    }
}

fn check(name: String, max_error: f64) -> Check {
    Check {
        name,
        max_error,
        passed: max_error <= TOLERANCE,
    }
}

/// Runs every check. `example_n` are the sample sizes used for the
/// three-factor example; `seed` picks the random test functions.
pub fn verify_anova(example_n: &[usize], seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let two_point = UnivariateLaw::two_point();
    for (n, s) in ENUMERATION_SIZES {
        let (mut mc_err, mut tmc_err, mut bound_excess) = (0.0f64, 0.0f64, 0.0f64);
        for k in 0..FUNCTIONS_PER_SIZE {
            let f = random_multilinear(s, seed ^ (1000 * n as u64 + 100 * s as u64 + k));
            let d = anova_decompose(&f, s, &two_point)?;
            let report = d.tmc_variance_theorem(n)?;
            let exact = enumerate_variance_exact(&f, n, s)?;
            mc_err = mc_err.max((d.mc_variance(n)? - exact.v_mc).abs());
            if let Some(v) = exact.v_mc_enumerated {
                mc_err = mc_err.max((v - exact.v_mc).abs());
            }
            tmc_err = tmc_err.max((report.v_tmc - exact.v_tmc).abs());
            bound_excess = bound_excess.max(report.v_tmc - d.corollary_bound(n)?);
        }
        let tag = format!("N={n} s={s}, {FUNCTIONS_PER_SIZE} functions");
        checks.push(check(format!("MC variance vs enumeration ({tag})"), mc_err));
        checks.push(check(format!("TMC variance vs enumeration ({tag})"), tmc_err));
        checks.push(check(format!("corollary bound ({tag})"), bound_excess.max(0.0)));
    }

    let example = three_factor_example();
    let d = anova_decompose(&example, 3, &UnivariateLaw::for_degree(Law::StdNormal, 1)?)?;
    for &n in example_n {
        let nf = n as f64;
        let report = d.tmc_variance_theorem(n)?;
        checks.push(check(
            format!("example MC variance 6/N (N={n})"),
            (d.mc_variance(n)? - 6.0 / nf).abs(),
        ));
        // Lag-1 and lag-2 cross terms are both −1 and occur N−1 and N−2
        // times; for N ≥ 2 this is 2/N + 6/N².
        let lag2 = n.saturating_sub(2) as f64;
        let expect = 6.0 / nf - 2.0 * lag2 / (nf * nf) - 2.0 * (nf - 1.0) / (nf * nf);
        checks.push(check(
            format!("example TMC variance (N={n})"),
            (report.v_tmc - expect).abs(),
        ));
        let excess = report.v_tmc - d.corollary_bound(n)?;
        checks.push(check(format!("example corollary bound (N={n})"), excess.max(0.0)));
    }
    Ok(checks)
}

/// CSV with one line per check.
pub fn render_checks(checks: &[Check]) -> String {
    let mut out = String::from("check,max_error,passed\n");
    for c in checks {
        out.push_str(&format!("\"{}\",{:.2e},{}\n", c.name, c.max_error, c.passed));
    }
    out
}
