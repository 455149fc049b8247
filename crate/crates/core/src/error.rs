use thiserror::Error;

/// Errors raised by the geometry, curvature, electrostatic, catalog and
/// warped-product routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the domain of chart `{chart}`")]
    PointOutsideDomain { chart: String, point: [f64; 3] },

    #[error("metric is not positive definite at {point:?}")]
    MetricNotPositiveDefinite { point: [f64; 3] },

    #[error("metric components are not symmetric (defect {defect:e})")]
    MetricNotSymmetric { defect: f64 },

    #[error("derivative order {requested} exceeds the configured maximum {max}")]
    OrderExceeded { requested: usize, max: usize },

    #[error("expected a {expected} index in slot {slot}")]
    WrongVariance { slot: usize, expected: &'static str },

    #[error("slot {slot} is out of range for a rank-{rank} tensor")]
    SlotOutOfRange { slot: usize, rank: usize },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("invalid differentiation config: {0}")]
    InvalidDiffConfig(String),

    #[error("lapse f = {value:e} is not positive at {point:?}")]
    LapseNonPositive { point: [f64; 3], value: f64 },

    #[error("|∇f| = {norm:e} is below the critical-point threshold at {point:?}")]
    GradientVanishes { point: [f64; 3], norm: f64 },

    #[error("fields are not linearly dependent at {point:?} (defect {defect:e})")]
    NotLinearlyDependent { point: [f64; 3], defect: f64 },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("negative discriminant: {0}")]
    NegativeDiscriminant(String),

    #[error("lapse polynomial has no positive roots")]
    NoPositiveRoots,

    #[error("sampling grid is empty")]
    EmptyGrid,

    #[error("lapse profile vanishes or is negative at r = {r}")]
    LapseVanishes { r: f64 },

    #[error("warping function is not positive at r = {r}")]
    WarpingNonPositive { r: f64 },

    #[error("f'(r) vanishes at r = {r}; the level set is critical")]
    CriticalPoint { r: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
