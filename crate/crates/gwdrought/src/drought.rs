//! Groundwater drought detection and statistics: gap filling, event
//! cataloguing, per-cell drought masks, areal extent, and period change.
//!
//! A drought event is a maximal run of strictly negative anomaly values
//! lasting at least `min_run` consecutive months. Zero or positive values
//! end a run, as does a missing month, so gaps should be filled first.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{Grid2D, GriddedSeries, RegionMask, Weighting};
use crate::month::{months_between, MonthIndex, MonthRange, TimeAxis};
use crate::series::MonthlySeries;

/// Default minimum run length, in months, for an event.
pub const DEFAULT_MIN_RUN: usize = 3;

/// One drought event: an inclusive run of below-normal months.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroughtEvent {
    pub start: MonthIndex,
    pub end: MonthIndex,
    /// Inclusive month count: `months_between(start, end) + 1`.
    pub duration: usize,
    /// Most negative anomaly inside the event.
    pub peak_departure: f64,
    pub peak_month: MonthIndex,
    /// True when the run reaches the final month of the record, so the
    /// event may still be ongoing.
    pub persistent: bool,
}

impl DroughtEvent {
    /// Month count excluding one endpoint, for comparison with sources that
    /// count month boundaries instead of months.
    pub fn duration_exclusive(&self) -> usize {
        self.duration - 1
    }
}

/// Event catalog for one series, with the record-wide extremes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroughtCatalog {
    pub series_id: String,
    /// Chronologically ordered, non-overlapping events.
    pub events: Vec<DroughtEvent>,
    /// Highest anomaly and its month (first occurrence on ties).
    pub wettest: Option<(f64, MonthIndex)>,
    /// Lowest anomaly and its month (first occurrence on ties).
    pub driest: Option<(f64, MonthIndex)>,
}

impl DroughtCatalog {
    pub fn latest_event(&self) -> Option<&DroughtEvent> {
        self.events.last()
    }

    /// Longest event; ties go to the earliest.
    pub fn longest_event(&self) -> Option<&DroughtEvent> {
        self.events
            .iter()
            .max_by(|a, b| a.duration.cmp(&b.duration).then(b.start.cmp(&a.start)))
    }
}

/// Fills interior missing runs by linear interpolation between the
/// bracketing non-missing values. Leading and trailing missing months are
/// left missing (no extrapolation); present values pass through unchanged.
pub fn fill_gaps_linear(s: &MonthlySeries) -> Result<MonthlySeries, Error> {
    let present = s.count_present();
    if present < 2 {
        return Err(Error::TooShort {
            have: present,
            need: 2,
        });
    }
    let values = s.values();
    let n = values.len();
    let mut out = values.to_vec();
    let mut left: Option<usize> = None;
    for i in 0..n {
        if values[i].is_some() {
            if let Some(li) = left {
                if i > li + 1 {
                    let lv = values[li].expect("bracket present");
                    let rv = values[i].expect("bracket present");
                    let span = (i - li) as f64;
                    for (step, slot) in out[li + 1..i].iter_mut().enumerate() {
                        let frac = (step + 1) as f64 / span;
                        *slot = Some(lv + (rv - lv) * frac);
                    }
                }
            }
            left = Some(i);
        }
    }
    MonthlySeries::new(s.axis(), out, s.units())
}

/// Detects drought events in an anomaly series: maximal runs of strictly
/// negative values at least `min_run` months long. Also records the
/// series-wide wettest and driest months.
pub fn detect_events(anom: &MonthlySeries, min_run: usize, series_id: &str) -> DroughtCatalog {
    let values = anom.values();
    let n = values.len();

    let mut events = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..=n {
        let negative = i < n && matches!(values[i], Some(v) if v < 0.0);
        if negative {
            run_start.get_or_insert(i);
            continue;
        }
        if let Some(start) = run_start.take() {
            let end = i - 1;
            let len = end - start + 1;
            if len >= min_run {
                let (mut peak, mut peak_i) = (f64::INFINITY, start);
                for (t, v) in values[start..=end].iter().enumerate() {
                    let v = v.expect("run is all present");
                    if v < peak {
                        peak = v;
                        peak_i = start + t;
                    }
                }
                events.push(DroughtEvent {
                    start: anom.month_at(start),
                    end: anom.month_at(end),
                    duration: len,
                    peak_departure: peak,
                    peak_month: anom.month_at(peak_i),
                    persistent: end == n - 1,
                });
            }
        }
    }

    let mut wettest: Option<(f64, MonthIndex)> = None;
    let mut driest: Option<(f64, MonthIndex)> = None;
    for (m, v) in anom.iter() {
        let Some(v) = v else { continue };
        if wettest.is_none_or(|(w, _)| v > w) {
            wettest = Some((v, m));
        }
        if driest.is_none_or(|(d, _)| v < d) {
            driest = Some((v, m));
        }
    }

    DroughtCatalog {
        series_id: series_id.to_string(),
        events,
        wettest,
        driest,
    }
}

/// Per-cell boolean drought membership: true on months belonging to any
/// detected event in that cell's anomaly series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroughtMask {
    grid: Grid2D,
    axis: TimeAxis,
    flags: Vec<bool>,
}

impl DroughtMask {
    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn axis(&self) -> TimeAxis {
        self.axis
    }

    pub fn get(&self, t: usize, i: usize, j: usize) -> bool {
        self.flags[(t * self.grid.nlat + i) * self.grid.nlon + j]
    }
}

/// Runs [`detect_events`] on every cell of an anomaly field and marks the
/// months inside events.
pub fn drought_mask(field: &GriddedSeries, min_run: usize) -> DroughtMask {
    let grid = field.grid();
    let axis = field.axis();
    let mut flags = vec![false; axis.len() * grid.ncells()];
    for (i, j) in grid.cells() {
        let series = field.cell_series(i, j);
        let catalog = detect_events(&series, min_run, "cell");
        for ev in &catalog.events {
            let a = axis.index_of(ev.start).expect("event within axis");
            let b = axis.index_of(ev.end).expect("event within axis");
            for t in a..=b {
                flags[(t * grid.nlat + i) * grid.nlon + j] = true;
            }
        }
    }
    DroughtMask { grid, axis, flags }
}

/// Percentage of a region under drought per month, weighted like
/// [`crate::grid::regional_mean`]. The denominator is the region's full
/// member weight, so the result is bounded in [0, 100].
pub fn areal_extent(
    mask: &DroughtMask,
    region: &RegionMask,
    label: &str,
    weighting: Weighting,
) -> Result<MonthlySeries, Error> {
    if !mask.grid().same_geometry(&region.grid()) {
        return Err(Error::GridMismatch);
    }
    let members = region.member_cells(label);
    if members.is_empty() {
        return Err(Error::UnknownRegion(label.to_string()));
    }
    let weights: Vec<f64> = members
        .iter()
        .map(|&(i, j)| match region.explicit_weights() {
            Some(w) => w[region.grid().flat(i, j)],
            None => match weighting {
                Weighting::CosLat => {
                    let (lat, _) = region.grid().center(i, j);
                    lat.to_radians().cos().max(0.0)
                }
                Weighting::Uniform => 1.0,
            },
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter(
            "region has zero total weight".into(),
        ));
    }

    let axis = mask.axis();
    let values = (0..axis.len())
        .map(|t| {
            let hit: f64 = members
                .iter()
                .zip(&weights)
                .filter(|(&(i, j), _)| mask.get(t, i, j))
                .map(|(_, &w)| w)
                .sum();
            let percent = 100.0 * hit / total;
            // an empty sum is IEEE negative zero; keep the column at plain 0
            Some(if percent == 0.0 { 0.0 } else { percent })
        })
        .collect();
    MonthlySeries::new(axis, values, "percent")
}

/// Month with the highest extent (first occurrence on ties).
pub fn most_widespread(extent: &MonthlySeries) -> Option<(MonthIndex, f64)> {
    let mut best: Option<(MonthIndex, f64)> = None;
    for (m, v) in extent.iter() {
        let Some(v) = v else { continue };
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((m, v));
        }
    }
    best
}

/// Percent change of the late-period mean relative to the magnitude of the
/// early-period mean: `100 * (mean(late) - mean(early)) / |mean(early)|`.
pub fn period_change(s: &MonthlySeries, early: MonthRange, late: MonthRange) -> Result<f64, Error> {
    let early_mean = s
        .mean_over(early)
        .ok_or(Error::TooShort { have: 0, need: 1 })?;
    let late_mean = s
        .mean_over(late)
        .ok_or(Error::TooShort { have: 0, need: 1 })?;
    if early_mean == 0.0 {
        return Err(Error::UndefinedBaseline);
    }
    Ok(100.0 * (late_mean - early_mean) / early_mean.abs())
}

/// Sanity check used by tests and the oracle suite: events must be exactly
/// the maximal negative runs.
pub fn catalog_is_consistent(
    anom: &MonthlySeries,
    catalog: &DroughtCatalog,
    min_run: usize,
) -> bool {
    let axis = anom.axis();
    let n = axis.len();
    for ev in &catalog.events {
        let (Some(a), Some(b)) = (axis.index_of(ev.start), axis.index_of(ev.end)) else {
            return false;
        };
        if ev.duration != (months_between(ev.start, ev.end) + 1) as usize || ev.duration < min_run {
            return false;
        }
        if !anom.values()[a..=b]
            .iter()
            .all(|v| matches!(v, Some(x) if *x < 0.0))
        {
            return false;
        }
        // maximality: neighbors must not be negative
        if a > 0 && matches!(anom.values()[a - 1], Some(x) if x < 0.0) {
            return false;
        }
        if b + 1 < n && matches!(anom.values()[b + 1], Some(x) if x < 0.0) {
            return false;
        }
        if ev.persistent != (b == n - 1) {
            return false;
        }
        if ev.peak_departure > 0.0 || anom.at(ev.peak_month) != Some(ev.peak_departure) {
            return false;
        }
    }
    // chronological, non-overlapping, non-touching
    catalog
        .events
        .windows(2)
        .all(|w| months_between(w[0].end, w[1].start) > 1)
}
