//! Shared inputs for the criterion benchmarks.

use ndarray::{Array1, Array2};
use tmc_core::{build_operator, make_stream, random_upper_factor, Law, ToeplitzOperator, TriangularFactor};

pub const SEED: u64 = 2020;

/// An `n × s` Toeplitz operator over a standard normal stream.
pub fn operator(n: usize, s: usize) -> ToeplitzOperator {
    build_operator(make_stream(SEED, 0, Law::StdNormal, n + s - 1), n, s).expect("sizes are positive")
}

/// A length-`s` right-hand vector.
pub fn vector(s: usize) -> Vec<f64> {
    make_stream(SEED, 1, Law::StdNormal, s).into_values()
}

/// An `s × t` dense right-hand matrix.
pub fn matrix(s: usize, t: usize) -> Array2<f64> {
    Array2::from_shape_vec((s, t), make_stream(SEED, 2, Law::StdNormal, s * t).into_values()).expect("shape matches")
}

/// Zero mean and a random upper factor for the MVN benchmark.
pub fn mvn_inputs(s: usize) -> (Array1<f64>, TriangularFactor) {
    (Array1::zeros(s), random_upper_factor(s, SEED).expect("s is positive"))
}
