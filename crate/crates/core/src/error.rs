//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("empty matrix not allowed in {0}")]
    EmptyMatrix(String),

    #[error("margin must be nonnegative, got {0}")]
    NegativeMargin(f64),

    #[error("matrix is not positive definite: factorization failed at pivot {pivot} ({context})")]
    NotPositiveDefinite { pivot: usize, context: String },

    #[error("LFT interconnection ill-posed at delta {delta:?}: |det(I - D11*Delta)| = {det_abs:.3e}")]
    IllPosed { delta: Vec<f64>, det_abs: f64 },

    #[error("algebraic loop: nonzero feedthrough from control input to measured output")]
    AlgebraicLoop,

    #[error("nominal dynamics not Schur stable: spectral radius {rho}")]
    UnstableNominal { rho: f64 },

    #[error("{0}")]
    Infeasible(String),

    #[error(
        "uncertainty channel {index} has no nonzero coefficient in either bound formula; \
         supply an explicit bound for it"
    )]
    UnboundedTheta { index: usize },

    #[error(
        "float correction infeasible: alpha = {alpha} (n_z = {n_z}, e_z = {e_z}, \
         lambda_max = {lambda_max}, lambda_min = {lambda_min})"
    )]
    CorrectionInfeasible {
        alpha: f64,
        n_z: usize,
        e_z: f64,
        lambda_max: f64,
        lambda_min: f64,
    },

    #[error("floating-point error model overflow: m*u >= 1 with m = {0} terms per row")]
    ErrorModelOverflow(usize),

    #[error("too many control inputs for vertex enumeration: {0} > {1}; use sampling instead")]
    TooManyControls(usize, usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("name collision in generated code: {0}")]
    NameCollision(String),

    #[error("schema error in {path}: {detail}")]
    Schema { path: String, detail: String },

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected: expected.into(),
            found: found.into(),
        }
    }

    /// Tag an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
