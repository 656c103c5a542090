//! Groundwater drought analytics on monthly gridded and well data.
//!
//! The crate covers the full analysis chain for linking groundwater storage
//! to climate and irrigation:
//!
//! 1. **Anomalies** — monthly climatology removal, standardization, k-month
//!    accumulation, and groundwater storage anomalies from either a
//!    satellite total-storage field minus modeled surface storage or from
//!    well levels scaled by specific yield ([`anomaly`]).
//! 2. **Optimal accumulation period** — sweep precipitation accumulations
//!    over 1..K months, summarize each with an expanding-window median
//!    correlation, and pick the period with the strongest significant
//!    positive link to storage ([`optimal_period`]).
//! 3. **Drought detection** — runs of at least three consecutive
//!    below-normal months, event catalogs, areal extent, and period change
//!    ([`drought`]).
//! 4. **Vegetation coupling** — weekly NDVI to monthly series, irrigation
//!    strata from irrigated-area fractions, seasonal means, and
//!    NDVI-storage correlations ([`vegetation`]).
//! 5. **Attribution** — R-squared shares of precipitation and NDVI on
//!    storage by averaging incremental R-squared over predictor orderings,
//!    with case-resampling bootstrap intervals ([`attribution`]).
//!
//! Synthetic scenarios with known ground truth ([`synth`], [`scenario`])
//! and brute-force oracles ([`oracles`]) make the whole chain testable
//! without the real input datasets. Everything is deterministic given a
//! seed: random draws are indexed, never consumed from shared state.
//!
//! The `gwdrought` binary wraps these operations in file-based commands;
//! see the crate examples for library usage.

pub mod anomaly;
pub mod attribution;
pub mod commands;
pub mod config;
pub mod drought;
pub mod error;
pub mod grid;
pub mod io;
pub mod month;
pub mod optimal_period;
pub mod oracles;
pub mod reference;
pub mod scenario;
pub mod series;
pub mod synth;
pub mod vegetation;

pub use error::Error;
pub use grid::{CategoricalGrid, Grid2D, GriddedSeries, RegionMask, Weighting};
pub use month::{months_between, MonthIndex, MonthRange, TimeAxis};
pub use series::MonthlySeries;
