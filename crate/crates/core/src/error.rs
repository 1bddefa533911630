use thiserror::Error;

/// Failures reported by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate state: L2 norm is zero")]
    DegenerateState,

    /// The state has no weight inside the slit, so the projection is undefined.
    #[error("zero overlap with the slit: ||chi psi|| = {overlap:e} is below {threshold:e}")]
    ZeroOverlap { overlap: f64, threshold: f64 },

    #[error("invalid tail window: {0}")]
    InvalidWindow(String),

    /// The derivative and momentum-quadrature routes to sigma_p disagree.
    #[error(
        "sigma_p routes disagree: derivative route {derivative}, momentum route {momentum} \
         (relative difference {relative:e})"
    )]
    Inconsistency {
        derivative: f64,
        momentum: f64,
        relative: f64,
    },

    #[error("position grid too coarse: s = {s} needs at least {required_points} points across the slit")]
    Resolution { s: f64, required_points: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
