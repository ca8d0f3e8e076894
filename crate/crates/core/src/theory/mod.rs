//! Analytical union bound on the average BER.
//!
//! The pairwise error probability of `(c, s) -> (c_hat, s_hat)` depends on the
//! channel through `Gamma = ||D||^2`, where `D` is the difference of the two
//! noiseless observations. Under the central limit theorem `D` is Gaussian;
//! [`stats`] assembles its mean and covariance, [`mgf`] evaluates the MGF of the
//! resulting quadratic form, and [`bound`] combines both into the pairwise and
//! union bounds.

pub mod bound;
pub mod mgf;
pub mod stats;
pub mod taxonomy;

use thiserror::Error;

pub use bound::{
    pairwise_bound, q_bound, union_bound_ber, BoundOptions, Enumeration, PairwiseBound,
    UnionBound, DEFAULT_PAIR_CEILING,
};
pub use mgf::{mgf_dense, mgf_quadratic_form, SpectralForm};
pub use stats::{assemble_statistics, CovarianceModel, DifferenceStatistics, UnsupportedPairs};
pub use taxonomy::{classify_antenna, pair_is_supported, AntennaCategory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("antenna {antenna} appears in {combination:?} and {decoded:?} at different positions")]
    UnsupportedPair {
        antenna: usize,
        combination: Vec<usize>,
        decoded: Vec<usize>,
    },
    #[error("covariance is not positive semi-definite (min eigenvalue {min_eigenvalue})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("I - 2xC is not positive definite at x = {x}")]
    Indefinite { x: f64 },
    #[error("exhaustive enumeration of {pairs} pairs exceeds the ceiling of {ceiling}; use sampled enumeration")]
    PairCeiling { pairs: u64, ceiling: u64 },
    #[error("source and target are the same codeword ({0})")]
    SamePair(u64),
    #[error("sampled enumeration needs at least 2 pairs, got {0}")]
    TooFewSamples(u64),
}
