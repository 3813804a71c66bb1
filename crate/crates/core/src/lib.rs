//! Randomized Kaczmarz and Gauss-Seidel type solvers for the linear matrix
//! equation `AXB = C`, with an SVD oracle for verification.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

pub mod error;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod problems;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use matrix::{axis_norms_sq, frobenius_norm_sq, relative_error, Axis, DenseMatrix};
pub use oracle::{
    bound_cme_rk, bound_ime_rgs, eta_factor, gamma_factor, kron_vec_solution, numerical_rank,
    pseudoinverse, reference_solution, semi_norm_error, singular_values, spectral_profile,
    ReferenceSolution, SpectralProfile,
};
pub use problems::{
    gen_type1, gen_type2, generate, make_rhs, random_orthonormal, Family, ProblemInstance,
    ProblemSpec, DEFAULT_DELTA,
};
pub use rng::RandomSource;
pub use sampling::{build_weights, sample_index, SamplingWeights};
pub use scalar::Real;
pub use solvers::{solve, Method, SolveConfig, SolveReport, StoppingRule, Termination};

pub type Matrix = DenseMatrix<f64>;
pub type Matrix32 = DenseMatrix<f32>;
pub type Report = SolveReport<f64>;
pub type Reference = ReferenceSolution<f64>;
pub type Instance = ProblemInstance<f64>;
