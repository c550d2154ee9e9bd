use thiserror::Error;

/// Errors surfaced by the numerical layers. Programmer errors (mismatched
/// grids, out-of-range exponents) panic instead; these variants are the
/// conditions a driver is expected to handle or report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid rejected: {0}")]
    BadGrid(String),

    #[error("seed rejected: {0}")]
    BadSeed(String),

    #[error("non-finite value in {context} at t = {t}")]
    NonFinite { context: &'static str, t: f64 },

    #[error("time step {dt} rejected: {reason}")]
    BadTimeStep { dt: f64, reason: String },

    #[error("contour invalid: {0}")]
    BadContour(String),

    #[error("contour self-intersects (segments {0} and {1})")]
    SelfIntersection(usize, usize),

    #[error("contour too close to the grid boundary or symmetry axis: {0}")]
    Margin(String),

    #[error("lemma setup rejected: {0}")]
    BadLemmaSetup(String),

    #[error("lemma invariant violated: {0}")]
    LemmaViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
