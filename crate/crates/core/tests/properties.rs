use proptest::prelude::*;
use tmc_core::anova::random_multilinear;
use tmc_core::{
    anova_decompose, assemble_uniform, frequency_ordering, make_stream, mc_on_values, thomas_solve, tmc_on_values,
    Field1d, Integrand, Law, Ode1d, Pde2d, Product, UnivariateLaw,
};

fn law() -> impl Strategy<Value = Law> {
    prop_oneof![Just(Law::UniformUnit), Just(Law::UniformCentered), Just(Law::StdNormal)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn longer_streams_extend_shorter_ones(seed in any::<u64>(), index in any::<u64>(), a in 0usize..200, extra in 0usize..200, law in law()) {
        let short = make_stream(seed, index, law, a);
        let long = make_stream(seed, index, law, a + extra);
        prop_assert_eq!(short.values(), &long.values()[..a]);
    }

    #[test]
    fn one_dimensional_tmc_is_mc(n in 1usize..300, seed in any::<u64>()) {
        let f = Integrand::new(1, Law::StdNormal, |x| x[0].exp() - x[0] * x[0]);
        let v = make_stream(seed, 0, Law::StdNormal, n).into_values();
        let mc = mc_on_values(&f, &v, n).unwrap();
        let tmc = tmc_on_values(&f, &v, n, Product::Fft).unwrap();
        prop_assert_eq!(mc.to_bits(), tmc.to_bits());
    }

    #[test]
    fn fft_and_naive_products_give_the_same_estimate(n in 1usize..40, half_m in 1usize..16, s in 1usize..40, seed in any::<u64>()) {
        let f = Ode1d::new(Field1d::Uniform, s, 2 * half_m).unwrap().integrand();
        let v = make_stream(seed, 0, f.law(), n + s - 1).into_values();
        let fast = tmc_on_values(&f, &v, n, Product::Fft).unwrap();
        let naive = tmc_on_values(&f, &v, n, Product::Naive).unwrap();
        prop_assert!((fast - naive).abs() <= 1e-9 * naive.abs());
    }

    #[test]
    fn uniform_systems_are_positive(half_m in 1usize..64, s in 1usize..64, seed in any::<u64>()) {
        let m = 2 * half_m;
        let y = make_stream(seed, 0, Law::UniformCentered, s).into_values();
        let sys = assemble_uniform(&y, m).unwrap();
        let u = thomas_solve(&sys).unwrap();
        let bu = sys.apply(&u);
        let form: f64 = u.iter().zip(&bu).map(|(a, b)| a * b).sum();
        prop_assert!(form > 0.0);
        prop_assert!(sys.diag.iter().all(|d| *d > 0.0));
    }

    #[test]
    fn two_dimensional_systems_are_symmetric(half_m in 1usize..6, s in 1usize..30, seed in any::<u64>()) {
        let m = 2 * half_m;
        let model = Pde2d::new(s, m).unwrap();
        prop_assert_eq!(model.frequencies(), &frequency_ordering(s)[..]);
        let y = make_stream(seed, 0, Law::UniformCentered, s).into_values();
        let sys = tmc_core::assemble_2d(&y, m, model.frequencies()).unwrap();
        let dim = sys.dim();
        for r in 0..dim {
            for (c, v) in sys.row(r) {
                prop_assert!((v - sys.get(c, r)).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn variance_bound_chain(s in 1usize..6, n in 1usize..60, seed in any::<u64>()) {
        let f = random_multilinear(s, seed);
        for law in [UnivariateLaw::two_point(), UnivariateLaw::for_degree(Law::UniformCentered, 1).unwrap()] {
            let d = anova_decompose(&f, s, &law).unwrap();
            let v_mc = d.mc_variance(n).unwrap();
            let v_tmc = d.tmc_variance_theorem(n).unwrap().v_tmc;
            prop_assert!(v_tmc >= -1e-15);
            prop_assert!(v_tmc <= d.corollary_bound(n).unwrap() + 1e-12);
            if v_mc > 1e-14 {
                prop_assert!(v_tmc / v_mc <= s as f64 + 1e-9);
            }
        }
    }
}
