use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("leading balance a_1^2 = 1 has no solution for the supplied slope")]
    DegenerateLeadingBalance,

    #[error("singular coefficient system at series order {order}")]
    SingularSystem { order: usize },

    #[error("empty sample list")]
    EmptySamples,

    #[error("handoff too close to singularity: |hS + 18kt^2| = {denominator:e} at t = {t:e}")]
    HandoffTooClose { t: f64, denominator: f64 },

    #[error("requested endpoint t_max = {t_max:e} precedes the handoff point t0 = {t_start:e}")]
    EmptyInterval { t_start: f64, t_max: f64 },

    #[error("t = {t:e} outside the available range [{lo:e}, {hi:e}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("x = {x} outside representable neighborhood: no boundary root of G")]
    NoBoundaryRoot { x: f64 },

    #[error("non-simple boundary zero at x = {x}: dG/dt = {slope:e}")]
    NonSimpleBoundaryZero { x: f64, slope: f64 },

    #[error("point (x, y) = ({x}, {y}) outside the representable region")]
    OutsideRegion { x: f64, y: f64 },

    #[error("t = {t:e} at or below the floor {floor:e}")]
    BelowFloor { t: f64, floor: f64 },

    #[error("circle-limit check requires k = 0, got k = {k}")]
    NotCircle { k: f64 },

    #[error("non-finite {field} at sample {index} (rho = {rho}, phi = {phi}, z = {z})")]
    NonFinite {
        index: usize,
        field: &'static str,
        rho: f64,
        phi: f64,
        z: f64,
    },

    #[error("cutoff window does not fit inside the representable region: {0}")]
    SupportContainment(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
