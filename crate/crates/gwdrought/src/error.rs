//! Error type shared by all analysis operations.

use crate::month::MonthIndex;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid calendar month {year}-{month:02}: month must be in 1..=12")]
    InvalidMonth { year: i32, month: u8 },

    #[error("{0}")]
    Parse(String),

    #[error("unknown region `{0}`")]
    UnknownRegion(String),

    #[error("point ({lat}, {lon}) outside grid")]
    OutsideGrid { lat: f64, lon: f64 },

    #[error("grid geometries do not match")]
    GridMismatch,

    #[error("time axes do not match")]
    AxisMismatch,

    #[error("coarse cells are not unions of whole fine cells (non-integer refinement ratio or misaligned origins)")]
    NonIntegerRefinement,

    #[error("degenerate series: {0}")]
    DegenerateSeries(&'static str),

    #[error("degenerate correlation: {0}")]
    DegenerateCorrelation(&'static str),

    #[error("accumulation window k={k} out of range 1..={max}")]
    AccumulationOutOfRange { k: usize, max: usize },

    #[error("baseline {start}..{end} not contained in the series axis")]
    BaselineOutsideAxis { start: MonthIndex, end: MonthIndex },

    #[error("insufficient history: the driver series must start at or before {required_start} and cover the target span")]
    InsufficientHistory { required_start: MonthIndex },

    #[error("series too short: have {have} samples, need at least {need}")]
    TooShort { have: usize, need: usize },

    #[error("collinear predictors")]
    CollinearPredictors,

    #[error("unknown predictor `{0}`")]
    UnknownPredictor(String),

    #[error("undefined baseline: early-period mean is zero")]
    UndefinedBaseline,

    #[error("bootstrap run {run} kept drawing degenerate resamples after {retries} retries")]
    BootstrapDegenerate { run: usize, retries: usize },

    #[error("autoregressive coefficient must satisfy |phi| < 1, got {0}")]
    UnstableAr(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
