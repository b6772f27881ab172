use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma/series pole at argument {re} + {im}i")]
    Pole { re: f64, im: f64 },

    #[error("series did not converge after {terms} terms")]
    Convergence { terms: usize },

    #[error("degenerate hypergeometric parameters: {0} is (numerically) an integer")]
    DegenerateParams(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("invalid potential parameters: {0}")]
    InvalidParams(String),

    #[error("matching point |t0| = {0} must exceed 1 for the 1/t0 continuation")]
    MatchingPoint(f64),

    #[error("vanishing amplitude denominator (|d| = {0:e}); perturb the energy")]
    ResonanceDenominator(f64),

    #[error("quantization residual is not real: re = {re:e}, im = {im:e}")]
    ComplexResidual { re: f64, im: f64 },

    #[error("no sign change found on the energy scan grid")]
    NoBracket,

    #[error("root refinement near E = {energy} did not converge (residual {residual:e})")]
    NonConvergedRoot { energy: f64, residual: f64 },

    #[error("integration step {step} exceeds the resolution bound {bound}")]
    StepSize { step: f64, bound: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

impl Error {
    /// Errors that mean "the closed form is singular at this point" rather than
    /// "the input is wrong". The CLI perturbs the energy and retries on these.
    pub fn is_numerical_singularity(&self) -> bool {
        matches!(
            self,
            Error::Pole { .. } | Error::DegenerateParams(_) | Error::ResonanceDenominator(_)
        )
    }
}
