use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ABC parameters must be normalized to 1 = A >= B >= C >= 0 (got A={a}, B={b}, C={c})")]
    NotNormalized { a: f64, b: f64, c: f64 },

    #[error("ABC parameters must be non-negative and not all zero")]
    InvalidParams,

    #[error("velocity vanishes at ({x}, {y}, {z}): |u| = {speed:e}")]
    SingularPoint { x: f64, y: f64, z: f64, speed: f64 },

    #[error("point is not on the unit 3-sphere (|q| = {norm})")]
    NotOnSphere { norm: f64 },

    #[error("step size collapsed below {min_step:e} at t = {t}")]
    StepUnderflow { t: f64, min_step: f64 },

    #[error("operation requires C = 0 (got C = {c})")]
    WrongParams { c: f64 },

    #[error("no directed section crossing within t = {max_time}")]
    NoReturn { max_time: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("circle map is not orientation preserving near theta = {theta}")]
    NotMonotone { theta: f64 },

    #[error("leaf slope is not strictly negative at theta = {theta}, z = {z}")]
    SlopeSignViolation { theta: f64, z: f64 },

    #[error("word {0} is a proper power")]
    PeriodicWord(String),

    #[error("words {0} and {1} describe the same orbit")]
    SameOrbit(String, String),

    #[error("curves intersect or come within {distance:e} of each other")]
    CurvesIntersect { distance: f64 },

    #[error("no generic projection direction found after {attempts} attempts")]
    DegenerateProjection { attempts: usize },

    #[error("braid closure has {components} components, expected a knot")]
    NotAKnot { components: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
