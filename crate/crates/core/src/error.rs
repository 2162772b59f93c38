use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports. Variants carry enough context to
/// print a one-line diagnostic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mechanical potential is not positive definite (omega1*omega2 - 4 eta0^2 = {0:.6e})")]
    InvalidPotential(f64),
    #[error("bath {0}: exactly one of occupation or temperature must be given")]
    IncompleteBath(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("no physical operating point")]
    NoOperatingPoint,
    #[error("no dynamically stable operating point")]
    UnstableOperatingPoint,
    #[error("numerical failure: {0}")]
    NumericalError(String),
    #[error("linearized dynamics are unstable (max Re lambda = {max_re:.3e})")]
    UnstableSystem { max_re: f64 },
    #[error("quadrature did not converge (error estimate {estimate:.3e} > target {target:.3e})")]
    IntegrationError { estimate: f64, target: f64 },
    #[error("Hurwitz determinant vanishes")]
    DegenerateDenominator,
    #[error("roots of the denominator polynomial straddle the real axis")]
    InvalidContour,
    #[error("closed form is ill-conditioned (cancellation metric {metric:.3e})")]
    IllConditioned { metric: f64 },
    #[error("reduced two-mode model is unstable (Re lambda = {re1:.3e}, {re2:.3e})")]
    UnstableReducedModel { re1: f64, re2: f64 },
    #[error("simplified result requires Gamma1 > 4 chi (Gamma1 = {gamma1_eff:.3e}, chi = {chi:.3e})")]
    StabilityViolated { gamma1_eff: f64, chi: f64 },
    #[error("chain has no steady state: {0}")]
    NoSteadyState(String),
    #[error("Fock truncation too tight: mode {mode} holds {population:.3e} in its top level")]
    TruncationTooTight { mode: usize, population: f64 },
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used in sweep status columns.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidPotential(_) => "invalid_potential",
            Error::IncompleteBath(_) => "incomplete_bath",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NoOperatingPoint => "no_operating_point",
            Error::UnstableOperatingPoint => "unstable_operating_point",
            Error::NumericalError(_) => "numerical_error",
            Error::UnstableSystem { .. } => "unstable",
            Error::IntegrationError { .. } => "integration_error",
            Error::DegenerateDenominator => "degenerate_denominator",
            Error::InvalidContour => "invalid_contour",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::UnstableReducedModel { .. } => "unstable_reduced_model",
            Error::StabilityViolated { .. } => "stability_violated",
            Error::NoSteadyState(_) => "no_steady_state",
            Error::TruncationTooTight { .. } => "truncation_too_tight",
            Error::Config { .. } => "config_error",
            Error::Io(_) => "io_error",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
