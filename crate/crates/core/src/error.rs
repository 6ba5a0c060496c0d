use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("lattice overflow: {base}^{exponent} does not fit in the requested integer type")]
    LatticeOverflow { base: u64, exponent: u32 },

    #[error("root finder did not converge (max backward error {max_residual:e})")]
    RootNonConvergence { max_residual: f64 },

    #[error("boundary-condition system is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("coefficient table fails the boundary conditions (residual {residual:e})")]
    BoundaryMismatch { residual: f64 },

    #[error("closed form has imaginary residue {imag:e} at N = {n} (real part {real:e})")]
    ImaginaryResidue { n: f64, real: f64, imag: f64 },

    #[error("exponents too close for the distinct-root formula: {0}")]
    NearCoincident(String),

    #[error("dominant eigenvalue is not a positive real number: {0}")]
    ComplexDominant(String),

    #[error("design matrix is rank deficient (rank {rank} < {needed}, condition {condition:e})")]
    RankDeficient {
        rank: usize,
        needed: usize,
        condition: f64,
    },

    #[error("exponent search did not converge after {iterations} sweeps (best rms {best_rms:e} at {best_exponents:?})")]
    SearchNonConvergence {
        iterations: usize,
        best_rms: f64,
        best_exponents: Vec<f64>,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: no data rows")]
    EmptyDataset { path: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error stems from bad user input rather than an internal failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_)
                | Error::LatticeOverflow { .. }
                | Error::NearCoincident(_)
                | Error::ComplexDominant(_)
                | Error::ImaginaryResidue { .. }
                | Error::RankDeficient { .. }
                | Error::Parse { .. }
                | Error::EmptyDataset { .. }
                | Error::Json(_)
        )
    }
}
