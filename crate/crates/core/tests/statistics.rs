use tmc_core::anova::{additive, three_factor_example};
use tmc_core::{
    anova_decompose, mc_estimate, parallel_tmc_average, replicate_par, tmc_estimate, Integrand, Law, Method,
    UnivariateLaw,
};

/// Sample variance of `values` and the standard error of that estimate.
fn variance_with_error(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let sq: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = sq.iter().sum::<f64>() / (r - 1.0);
    let m4 = sq.iter().map(|d| d * d).sum::<f64>() / r;
    let se = ((m4 - var * var) / r).sqrt();
    (var, se)
}

#[test]
fn tmc_is_unbiased_for_polynomials() {
    let cases: Vec<(Integrand, f64)> = vec![
        // E[x1² x2 + x3²] under N(0,1) is 1.
        (
            Integrand::new(3, Law::StdNormal, |x| x[0] * x[0] * x[1] + x[2] * x[2]),
            1.0,
        ),
        // E[(x1 + x2)² x3² ] under U(0,1): E[(x1+x2)²] = 7/6, E[x3²] = 1/3.
        (
            Integrand::new(3, Law::UniformUnit, |x| (x[0] + x[1]).powi(2) * x[2] * x[2]),
            7.0 / 18.0,
        ),
        (three_factor_example(), 0.0),
    ];
    for (f, exact) in &cases {
        let stats = replicate_par(10_000, 17, |seed, r| {
            tmc_estimate(f, 8, seed, Method::Tmc.stream_index(r))
        })
        .unwrap();
        let err = (stats.grand_mean - exact).abs();
        assert!(err <= 4.0 * stats.estimator_variance.sqrt(), "{f:?}: err {err}");
    }
}

#[test]
fn example_empirical_variance_matches_theorem() {
    let f = three_factor_example();
    let stats = replicate_par(100_000, 2024, |seed, r| tmc_estimate(&f, 16, seed, r)).unwrap();
    let (var, se) = variance_with_error(&stats.values);
    let expect: f64 = 2.0 / 16.0 + 6.0 / 256.0;
    assert!((expect - 0.1484).abs() < 1e-4);
    assert!((var - expect).abs() <= 3.0 * se, "var {var} se {se}");
    // Almost a third of the MC variance.
    assert!((expect / (6.0 / 16.0) - 0.396f64).abs() < 1e-3);
}

#[test]
fn l_average_divides_variance() {
    let f = three_factor_example();
    let d = anova_decompose(&f, 3, &UnivariateLaw::for_degree(Law::StdNormal, 1).unwrap()).unwrap();
    let v_tmc = d.tmc_variance_theorem(8).unwrap().v_tmc;
    let values: Vec<f64> = (0..20_000u64)
        .map(|r| parallel_tmc_average(&f, 8, 4, 1_000 + r).unwrap().value)
        .collect();
    let (var, se) = variance_with_error(&values);
    assert!(
        (var - v_tmc / 4.0).abs() <= 3.0 * se,
        "var {var} expect {}",
        v_tmc / 4.0
    );
}

#[test]
fn single_window_average_is_plain_mc() {
    // N = 1: each stream contributes one independent point, so L streams
    // behave like MC with L samples.
    let f = additive(3, Law::UniformCentered);
    let l = 16;
    let values: Vec<f64> = (0..20_000u64)
        .map(|r| parallel_tmc_average(&f, 1, l, 50_000 + r).unwrap().value)
        .collect();
    let (var, se) = variance_with_error(&values);
    let mc = 3.0 / 12.0 / l as f64;
    assert!((var - mc).abs() <= 3.0 * se, "var {var} expect {mc}");
}

#[test]
fn mc_variance_matches_formula() {
    let f = three_factor_example();
    let stats = replicate_par(40_000, 5, |seed, r| mc_estimate(&f, 16, seed, r)).unwrap();
    let (var, se) = variance_with_error(&stats.values);
    assert!((var - 6.0 / 16.0).abs() <= 3.0 * se, "var {var}");
}
