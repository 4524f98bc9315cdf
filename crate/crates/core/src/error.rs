use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate parameters: b1*b2*b3 must be nonzero, got b = ({0}, {1}, {2})")]
    DegenerateParams(f64, f64, f64),

    #[error("unknown preset `{0}` (expected maxwell-bloch or lorenz-hamilton)")]
    UnknownPreset(String),

    #[error("realization coefficients are not unimodular: alpha*delta - beta*gamma = {0}")]
    NotUnimodular(f64),

    #[error("polynomial degree {degree} exceeds the budget {max}")]
    DegreeOverflow { degree: u32, max: u32 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("adaptive step size underflow at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },

    #[error("implicit midpoint solver failed to converge at t = {t} after {iters} iterations")]
    NewtonDivergence { t: f64, iters: usize },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("pendulum reduction needs b2*b3 < 0, got b2*b3 = {0}")]
    WrongSignRegime(f64),

    #[error("state lies on the singular ray x2 = x3 = 0; the pendulum angle is undefined")]
    OnSingularRay,

    #[error("the energy-Casimir function needs a multiplier lambda")]
    MissingMultiplier,

    #[error("momentum mismatch: config k = {config_k} but z4(0) = {z4}")]
    ConflictingMomentum { config_k: f64, z4: f64 },

    #[error("malformed input: {0}")]
    MalformedInput(String),
}

impl Error {
    /// Failures of the time integrators, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::StepFailure { .. } | Error::NewtonDivergence { .. })
    }
}
