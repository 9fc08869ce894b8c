//! Toeplitz Monte Carlo: sliding-window estimators, FFT Toeplitz products,
//! an exact ANOVA variance lab and the FEM model problems used to benchmark
//! them.

pub mod anova;
pub mod dense;
pub mod error;
pub mod estimators;
pub mod fem1d;
pub mod fem2d;
pub mod krylov;
pub mod quadrature;
pub mod sampling;
pub mod toeplitz;

pub use anova::{
    anova_decompose, enumerate_variance_exact, subset, AnovaDecomposition, EnumeratedVariance, VarianceReport,
};
pub use error::{Result, TmcError};
pub use estimators::{
    efficiency, efficiency_ratio, estimate, mc_estimate, mc_on_values, parallel_tmc_average, replicate, replicate_par,
    replication_seed, tmc_estimate, tmc_estimate_with, tmc_on_values, EstimateResult, Integrand, Product,
    ReplicationStats, TMC_STREAM_OFFSET,
};
pub use fem1d::{
    assemble_lognormal, assemble_uniform, compute_thetas, solve_u_half_lognormal, solve_u_half_uniform, thomas_solve,
    Field1d, Ode1d, TridiagonalSystem,
};
pub use fem2d::{assemble_2d, frequency_ordering, solve_center, Pde2d};
pub use krylov::{bicgstab, KrylovSolution, SparseSystem};
pub use quadrature::{LawKind, UnivariateLaw};
pub use sampling::{
    generate_mvn, make_stream, normal_inverse_cdf, random_upper_factor, Law, Method, SampleStream, StreamRng,
    TriangularFactor, FACTOR_STREAM,
};
pub use toeplitz::{block_matmat, blocked_matmat, build_operator, CirculantPlan, ToeplitzOperator};
