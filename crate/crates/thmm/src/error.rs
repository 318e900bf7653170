use thiserror::Error;

/// Errors produced by moment, polynomial and resolvent constructions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid interval: require a < b, got a = {a}, b = {b}")]
    InvalidInterval { a: f64, b: f64 },

    #[error("atom t = {t} lies outside [{a}, {b}]")]
    AtomOutsideInterval { t: f64, a: f64, b: f64 },

    #[error("atoms must be pairwise distinct (t = {t} repeated)")]
    DuplicateAtom { t: f64 },

    #[error("weight at t = {t} is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NonPsdWeight { t: f64, min_eig: f64 },

    #[error("moment s_{index} is not hermitian within tolerance")]
    NonHermitianMoment { index: usize },

    #[error("{what} requires moments up to order {needed}, only {have} available")]
    InsufficientMoments {
        what: &'static str,
        needed: usize,
        have: usize,
    },

    #[error("matrix {what} is singular or too ill-conditioned (cond est {cond:.3e})")]
    SingularMatrix { what: String, cond: f64 },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("z = {z} is not admissible here: {why}")]
    BadEvaluationPoint {
        z: num_complex::Complex64,
        why: String,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
