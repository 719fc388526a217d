use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("generalized Pochhammer symbol vanishes: factor ({base})_{length} hits a pole")]
    PochhammerPole { base: f64, length: u32 },
    #[error("gamma function argument {0} is not positive")]
    GammaPole(f64),
    #[error(
        "Bessel series needs degree {needed} > cap {cap} (argument too large for series mode; use the Bochner evaluator)"
    )]
    SeriesCap { needed: usize, cap: usize },
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("rejection budget of {budget} proposals exhausted (acceptance rate {acceptance:.3e})")]
    RejectionBudget { budget: usize, acceptance: f64 },
    #[error("Fourier transform {0:.3e} too close to zero for the martingale normalization")]
    FourierTooSmall(f64),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
