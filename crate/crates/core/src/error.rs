use thiserror::Error;

/// Errors produced by the approximation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown activation `{0}`")]
    UnknownActivation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("n too small for domain: n = {n} gives an empty lattice on axis {axis}")]
    EmptyLattice { n: u64, axis: usize },

    #[error("point {point:?} lies outside the domain")]
    PointOutsideDomain { point: Vec<f64> },

    #[error("kernel decays too slowly for requested eps = {eps:e}")]
    SlowDecay { eps: f64 },

    #[error("moment may be infinite: beta = {beta} exceeds decay exponent {decay}")]
    MomentMayBeInfinite { beta: f64, decay: f64 },

    #[error("kernel vanished: lattice maximum {value:e} underflows")]
    KernelVanished { value: f64 },

    #[error(
        "target value {value} at {point:?} lies outside [0, 1]; use the extended max-min operator for general bounded targets"
    )]
    RangeViolation { value: f64, point: Vec<f64> },

    #[error("max-product requires nonnegative samples, found {value} at {point:?}")]
    NegativeSample { value: f64, point: Vec<f64> },

    #[error(
        "mixed range unsupported; see Open Questions: samples span regimes {first} and {second}"
    )]
    MixedRange {
        first: &'static str,
        second: &'static str,
    },

    #[error("target is not defined on all of R^r")]
    NotDefinedEverywhere,

    #[error("resolution too coarse: grid spacing {spacing} exceeds delta / 4 = {limit}")]
    ResolutionTooCoarse { spacing: f64, limit: f64 },

    #[error("invalid samples: {0}")]
    InvalidSamples(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
