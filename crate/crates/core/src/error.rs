use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point lies outside every branch domain")]
    NoBranch,
    #[error("potential {label} is not defined for {kind} models")]
    IncompatibleLabel { label: &'static str, kind: &'static str },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unsupported model geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("transition matrix is not primitive (coding is not mixing)")]
    NotMixing,
    #[error("delta {delta} exceeds the one-step branch separation {separation}")]
    DeltaTooLarge { delta: f64, separation: f64 },
    #[error("probabilities incompatible with the coding: {0}")]
    IncompatibleStochastics(String),
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),
    #[error("grid too coarse: cell edge {cell} must be at most {limit}")]
    GridTooCoarse { cell: f64, limit: f64 },
    #[error("degenerate volume curve: {0}")]
    DegenerateCurve(String),
    #[error("degenerate scale set: {0}")]
    DegenerateScales(String),
    #[error("expansion rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("pressure {0} is positive; the dimension bound needs P <= 0")]
    PositivePressure(f64),
}
