//! Vegetation-index preparation and irrigation-stratified analysis:
//! weekly-to-monthly aggregation, irrigation masks, seasonal means, and
//! NDVI-storage coupling.

use chrono::Datelike;
use serde::{Deserialize, Serialize};

use crate::anomaly::accumulate;
use crate::error::Error;
use crate::grid::{regional_mean, CategoricalGrid, Grid2D, GriddedSeries, RegionMask, Weighting};
use crate::month::{MonthIndex, TimeAxis};
use crate::optimal_period::{expanding_median_r, ExpandingCorrelation, WindowScheme};
use crate::series::MonthlySeries;

/// Stratum class labels used by [`irrigation_masks`].
pub const STRATUM_IN: i64 = 1;
pub const STRATUM_OUT: i64 = 0;

/// A weekly composite series. Weeks are numbered within the year; week `w`
/// nominally covers days `7(w-1)+1 ..= 7w` and its midpoint (day `7(w-1)+4`,
/// clamped to the year) decides which month it belongs to. Week numbering
/// rolls over after week 52, and an explicit week 53 is accepted as a short
/// year-end composite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklySeries {
    start_year: i32,
    start_week: u32,
    values: Vec<Option<f64>>,
}

impl WeeklySeries {
    pub fn new(start_year: i32, start_week: u32, values: Vec<Option<f64>>) -> Result<Self, Error> {
        if !(1..=53).contains(&start_week) {
            return Err(Error::Parse(format!(
                "week-of-year must be in 1..=53, got {start_week}"
            )));
        }
        Ok(Self {
            start_year,
            start_week,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// (year, week) of sample `index`.
    pub fn week_at(&self, index: usize) -> (i32, u32) {
        let mut year = self.start_year;
        let mut week = self.start_week + index as u32;
        while week > 52 {
            week -= 52;
            year += 1;
        }
        (year, week)
    }
}

/// A stack of weekly composites on a regular grid, cell-major access.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyGrid {
    grid: Grid2D,
    start_year: i32,
    start_week: u32,
    n_weeks: usize,
    /// Week-major: `(w, i, j)` flattens to `(w*nlat + i)*nlon + j`.
    values: Vec<Option<f64>>,
}

impl WeeklyGrid {
    pub fn new(
        grid: Grid2D,
        start_year: i32,
        start_week: u32,
        n_weeks: usize,
        values: Vec<Option<f64>>,
    ) -> Result<Self, Error> {
        if !(1..=53).contains(&start_week) {
            return Err(Error::Parse(format!(
                "week-of-year must be in 1..=53, got {start_week}"
            )));
        }
        if values.len() != n_weeks * grid.ncells() {
            return Err(Error::Parse(
                "weekly grid values do not cover weeks x cells".into(),
            ));
        }
        Ok(Self {
            grid,
            start_year,
            start_week,
            n_weeks,
            values,
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn start(&self) -> (i32, u32) {
        (self.start_year, self.start_week)
    }

    pub fn n_weeks(&self) -> usize {
        self.n_weeks
    }

    pub fn get(&self, w: usize, i: usize, j: usize) -> Option<f64> {
        self.values[(w * self.grid.nlat + i) * self.grid.nlon + j]
    }

    pub fn set(&mut self, w: usize, i: usize, j: usize, value: Option<f64>) {
        self.values[(w * self.grid.nlat + i) * self.grid.nlon + j] = value;
    }

    /// (year, week) of sample `index`.
    pub fn week_at(&self, index: usize) -> (i32, u32) {
        let mut year = self.start_year;
        let mut week = self.start_week + index as u32;
        while week > 52 {
            week -= 52;
            year += 1;
        }
        (year, week)
    }

    pub fn cell_series(&self, i: usize, j: usize) -> WeeklySeries {
        let values = (0..self.n_weeks).map(|w| self.get(w, i, j)).collect();
        WeeklySeries {
            start_year: self.start_year,
            start_week: self.start_week,
            values,
        }
    }
}

/// Aggregates every cell of a weekly grid to a monthly gridded series.
/// Cells whose weekly record is too sparse to aggregate become all-missing.
pub fn weekly_grid_to_monthly(w: &WeeklyGrid, axis: TimeAxis) -> Result<GriddedSeries, Error> {
    let grid = w.grid();
    let mut out = GriddedSeries::missing(grid, axis, "ndvi");
    for (i, j) in grid.cells() {
        if let Ok(monthly) = weekly_to_monthly(&w.cell_series(i, j)) {
            out.set_cell_series(i, j, &monthly.align_to(axis));
        }
    }
    Ok(out)
}

/// Calendar month containing the midpoint day of (year, week).
fn week_midpoint_month(year: i32, week: u32) -> MonthIndex {
    let year_days = if chrono::NaiveDate::from_ymd_opt(year, 12, 31)
        .map(|d| d.leap_year())
        .unwrap_or(false)
    {
        366
    } else {
        365
    };
    let doy = (7 * (week - 1) + 4).min(year_days);
    let date = chrono::NaiveDate::from_yo_opt(year, doy).expect("day-of-year in range");
    MonthIndex::new(year, date.month() as u8).expect("calendar month")
}

/// Aggregates a weekly series to monthly means (weeks are assigned by their
/// midpoint date) and fills interior empty months by linear interpolation.
pub fn weekly_to_monthly(w: &WeeklySeries) -> Result<MonthlySeries, Error> {
    let mut first: Option<MonthIndex> = None;
    let mut last: Option<MonthIndex> = None;
    for (i, v) in w.values.iter().enumerate() {
        if v.is_some() {
            let (y, wk) = w.week_at(i);
            let m = week_midpoint_month(y, wk);
            if first.is_none() {
                first = Some(m);
            }
            last = Some(m);
        }
    }
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::TooShort { have: 0, need: 2 });
    };
    let axis = TimeAxis::new(
        first,
        (crate::month::months_between(first, last) + 1) as usize,
    )?;

    let mut sums = vec![0.0f64; axis.len()];
    let mut counts = vec![0usize; axis.len()];
    for (i, v) in w.values.iter().enumerate() {
        let Some(v) = v else { continue };
        let (y, wk) = w.week_at(i);
        let m = week_midpoint_month(y, wk);
        let t = axis.index_of(m).expect("within axis by construction");
        sums[t] += v;
        counts[t] += 1;
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| if c > 0 { Some(s / c as f64) } else { None })
        .collect();
    let monthly = MonthlySeries::new(axis, values, "ndvi")?;
    crate::drought::fill_gaps_linear(&monthly)
}

/// Per-cell fraction of area irrigated with groundwater and total area
/// equipped for irrigation, both in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrigationFraction {
    grid: Grid2D,
    gw_fraction: Vec<Option<f64>>,
    total_equipped: Vec<Option<f64>>,
}

impl IrrigationFraction {
    pub fn new(
        grid: Grid2D,
        gw_fraction: Vec<Option<f64>>,
        total_equipped: Vec<Option<f64>>,
    ) -> Result<Self, Error> {
        if gw_fraction.len() != grid.ncells() || total_equipped.len() != grid.ncells() {
            return Err(Error::Parse(
                "irrigation fractions do not cover the grid".into(),
            ));
        }
        let ok = |v: &Option<f64>| v.is_none_or(|x| (0.0..=100.0).contains(&x));
        if !gw_fraction.iter().all(ok) || !total_equipped.iter().all(ok) {
            return Err(Error::InvalidParameter(
                "irrigation fractions must be in [0, 100]".into(),
            ));
        }
        Ok(Self {
            grid,
            gw_fraction,
            total_equipped,
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn gw_fraction(&self, i: usize, j: usize) -> Option<f64> {
        self.gw_fraction[self.grid.flat(i, j)]
    }

    pub fn total_equipped(&self, i: usize, j: usize) -> Option<f64> {
        self.total_equipped[self.grid.flat(i, j)]
    }
}

/// Splits cells into groundwater-irrigated (gw fraction strictly above
/// `gw_threshold`) and non-irrigated (total equipped fraction strictly below
/// `rainfed_threshold`) strata. Cells matching neither, or with missing
/// fractions, belong to neither stratum.
pub fn irrigation_masks(
    f: &IrrigationFraction,
    gw_threshold: f64,
    rainfed_threshold: f64,
) -> Result<(CategoricalGrid, CategoricalGrid), Error> {
    for t in [gw_threshold, rainfed_threshold] {
        if !(0.0 < t && t < 100.0) {
            return Err(Error::InvalidParameter(format!(
                "irrigation threshold must be in (0, 100), got {t}"
            )));
        }
    }
    let grid = f.grid();
    let mut gw = Vec::with_capacity(grid.ncells());
    let mut rainfed = Vec::with_capacity(grid.ncells());
    for (i, j) in grid.cells() {
        gw.push(match f.gw_fraction(i, j) {
            Some(v) if v > gw_threshold => STRATUM_IN,
            _ => STRATUM_OUT,
        });
        rainfed.push(match f.total_equipped(i, j) {
            Some(v) if v < rainfed_threshold => STRATUM_IN,
            _ => STRATUM_OUT,
        });
    }
    Ok((
        CategoricalGrid::new(grid, gw)?,
        CategoricalGrid::new(grid, rainfed)?,
    ))
}

/// Cropping seasons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    /// Monsoon season: June through September.
    Kharif,
    /// Winter season: October through March.
    Rabi,
}

impl Season {
    pub fn months(&self) -> &'static [u8] {
        match self {
            Season::Kharif => &[6, 7, 8, 9],
            Season::Rabi => &[10, 11, 12, 1, 2, 3],
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Season::Kharif => "kharif",
            Season::Rabi => "rabi",
        }
    }
}

/// How a season year spanning a calendar boundary is labeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SeasonYearConvention {
    /// Label by the calendar year the season starts in (a Rabi season is
    /// labeled by the year of its October).
    #[default]
    StartYear,
    /// Label by the calendar year the season ends in.
    EndYear,
}

/// Member calendar months of season-year `sy` under a labeling convention.
fn season_months(season: Season, sy: i32, convention: SeasonYearConvention) -> Vec<MonthIndex> {
    let start_year = match (season, convention) {
        (Season::Kharif, _) => sy,
        (Season::Rabi, SeasonYearConvention::StartYear) => sy,
        (Season::Rabi, SeasonYearConvention::EndYear) => sy - 1,
    };
    let mut year = start_year;
    let mut prev = 0u8;
    season
        .months()
        .iter()
        .map(|&m| {
            if m < prev {
                year += 1; // crossed the December boundary
            }
            prev = m;
            MonthIndex::new(year, m).expect("valid month")
        })
        .collect()
}

/// Seasonal mean per season-year. A year is listed only when every member
/// month lies inside the axis, and its value is missing when any member
/// value is missing.
pub fn seasonal_mean(
    s: &MonthlySeries,
    season: Season,
    convention: SeasonYearConvention,
) -> Vec<(i32, Option<f64>)> {
    let axis = s.axis();
    let mut out = Vec::new();
    // candidate labels: generous year span around the axis
    for sy in axis.start().year() - 1..=axis.end().year() + 1 {
        let months = season_months(season, sy, convention);
        if !months.iter().all(|m| axis.contains(*m)) {
            continue;
        }
        let vals: Vec<Option<f64>> = months.iter().map(|m| s.at(*m)).collect();
        let value = if vals.iter().all(|v| v.is_some()) {
            let sum: f64 = vals.iter().flatten().sum();
            Some(sum / vals.len() as f64)
        } else {
            None
        };
        out.push((sy, value));
    }
    out
}

/// Correlates a storage anomaly series with the k-month accumulation of
/// vegetation-index anomalies via the expanding-window median.
///
/// The vegetation series must begin at least k-1 months before the storage
/// series and cover its end.
pub fn ndvi_gwsa_coupling(
    ndvi_anom: &MonthlySeries,
    gwsa: &MonthlySeries,
    k: usize,
    scheme: &WindowScheme,
) -> Result<ExpandingCorrelation, Error> {
    let required_start = gwsa.axis().start().offset(-(k as i64 - 1));
    if ndvi_anom.axis().start() > required_start || ndvi_anom.axis().end() < gwsa.axis().end() {
        return Err(Error::InsufficientHistory { required_start });
    }
    let acc = accumulate(ndvi_anom, k)?.align_to(gwsa.axis());
    expanding_median_r(gwsa, &acc, scheme)
}

/// Paired seasonal-mean series for the groundwater-irrigated and
/// non-irrigated strata of a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedSeasonal {
    pub season: Season,
    /// (season year, irrigated stratum mean, non-irrigated stratum mean).
    pub years: Vec<(i32, Option<f64>, Option<f64>)>,
}

/// Regional seasonal NDVI of groundwater-irrigated versus non-irrigated
/// cells. A stratum with no member cell in the region yields a missing
/// series rather than an error.
#[allow(clippy::too_many_arguments)]
pub fn irrigated_vs_rainfed_ndvi(
    ndvi: &GriddedSeries,
    gw_mask: &CategoricalGrid,
    rainfed_mask: &CategoricalGrid,
    region: &RegionMask,
    label: &str,
    season: Season,
    convention: SeasonYearConvention,
    weighting: Weighting,
) -> Result<StratifiedSeasonal, Error> {
    if !gw_mask.grid().same_geometry(&ndvi.grid())
        || !rainfed_mask.grid().same_geometry(&ndvi.grid())
    {
        return Err(Error::GridMismatch);
    }
    if region.member_cells(label).is_empty() {
        return Err(Error::UnknownRegion(label.to_string()));
    }

    let stratum_seasonal = |mask: &CategoricalGrid| -> Result<Vec<(i32, Option<f64>)>, Error> {
        // restrict the region to the stratum's member cells
        let membership = region
            .grid()
            .cells()
            .map(|(i, j)| {
                if region.region_of(i, j) == Some(label) && mask.class(i, j) == STRATUM_IN {
                    Some(label.to_string())
                } else {
                    None
                }
            })
            .collect();
        let stratum_region = RegionMask::new(region.grid(), membership, None)?;
        if stratum_region.member_cells(label).is_empty() {
            return Ok(Vec::new()); // empty stratum: missing series
        }
        let monthly = regional_mean(ndvi, &stratum_region, label, weighting)?;
        Ok(seasonal_mean(&monthly, season, convention))
    };

    let irrigated = stratum_seasonal(gw_mask)?;
    let rainfed = stratum_seasonal(rainfed_mask)?;

    let mut years: Vec<i32> = irrigated
        .iter()
        .map(|(y, _)| *y)
        .chain(rainfed.iter().map(|(y, _)| *y))
        .collect();
    years.sort_unstable();
    years.dedup();

    let lookup = |list: &[(i32, Option<f64>)], y: i32| -> Option<f64> {
        list.iter().find(|(yy, _)| *yy == y).and_then(|(_, v)| *v)
    };
    let rows = years
        .iter()
        .map(|&y| (y, lookup(&irrigated, y), lookup(&rainfed, y)))
        .collect();
    Ok(StratifiedSeasonal {
        season,
        years: rows,
    })
}
