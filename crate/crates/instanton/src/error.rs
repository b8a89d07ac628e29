use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no metastable well: tilt ratio {ratio} >= 1")]
    NoWell { ratio: f64 },
    #[error("no exit point found within one period of x = {well}")]
    NoExit { well: f64 },
    #[error("singular endpoint: {0}")]
    Singularity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("tail fit failed: {0}")]
    Tail(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("pole encountered: {0}")]
    Pole(String),
    #[error("extrapolation did not converge: relative spread {spread:e}")]
    Extrapolation { spread: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("semantics error: {0}")]
    Semantics(String),
    #[error("resonant junction length: sinc(L/zeta) = 0 at L/zeta = {0}")]
    Resonance(f64),
    #[error("homotopy continuation failed after k = {last_k}")]
    Continuation { last_k: f64 },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("box too small: boundary amplitude {amplitude:e} for level {level}")]
    Box { level: usize, amplitude: f64 },
    #[error("charge cutoff too small: top amplitude {amplitude:e}")]
    Cutoff { amplitude: f64 },
    #[error("matrix is not positive definite")]
    Definiteness,
    #[error("no minimum: second derivative {0} at the critical point")]
    Saddle(f64),
    #[error("root finding failed: {0}")]
    Root(String),
}

pub type Result<T> = std::result::Result<T, Error>;
