//! File-based commands behind the `gwdrought` binary. Each command is a
//! thin shell over library operations: it loads inputs, calls the library,
//! and writes CSV/JSON outputs under the configured `out` directory, so a
//! command's outputs are byte-identical to direct library calls with the
//! same configuration.
//!
//! Exit-code contract: 0 success, 2 missing input, 3 format violation,
//! 4 insufficient data, 5 missing upstream artifact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anomaly::{
    accumulate, grace_gwsa, monthly_climatology, remove_climatology, standardize, well_field,
    well_gwsa,
};
use crate::attribution::{subperiod_compare, PredictorImportance};
use crate::config::RunConfig;
use crate::drought::{
    areal_extent, detect_events, drought_mask, fill_gaps_linear, most_widespread, period_change,
    DroughtCatalog,
};
use crate::error::Error;
use crate::grid::{
    block_mean_resample, class_coverage, majority_resample, refine_region_mask, regional_mean,
    CategoricalGrid, GriddedSeries, RegionMask,
};
use crate::io;
use crate::month::MonthRange;
use crate::optimal_period::{
    corr_p_value, correlation_profile, full_series_profile, optimal_period, pearson_r,
    OptimalPeriodOutcome, WindowMode, WindowScheme,
};
use crate::scenario::SyntheticScenario;
use crate::series::{pairwise_complete, MonthlySeries};
use crate::synth::CounterRng;
use crate::vegetation::{
    irrigated_vs_rainfed_ndvi, irrigation_masks, ndvi_gwsa_coupling, weekly_grid_to_monthly,
    Season, SeasonYearConvention, STRATUM_IN,
};

/// Command failure with a stable exit-code mapping.
#[derive(Debug)]
pub enum CommandError {
    /// Required input path absent on disk, or its config key unset.
    MissingInput(String),
    /// Malformed input file or configuration.
    Format(Error),
    /// Inputs present but insufficient for the requested analysis.
    Insufficient(Error),
    /// A needed artifact of an earlier command is absent.
    MissingUpstream {
        artifact: PathBuf,
        command: &'static str,
    },
    Other(Error),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::MissingInput(_) => 2,
            CommandError::Format(_) => 3,
            CommandError::Insufficient(_) => 4,
            CommandError::MissingUpstream { .. } => 5,
            CommandError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::MissingInput(what) => write!(f, "missing input: {what}"),
            CommandError::Format(e) => write!(f, "format error: {e}"),
            CommandError::Insufficient(e) => write!(f, "insufficient data: {e}"),
            CommandError::MissingUpstream { artifact, command } => write!(
                f,
                "missing upstream artifact {}: run `{command}` first",
                artifact.display()
            ),
            CommandError::Other(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidMonth { .. } => CommandError::Format(e),
            Error::InsufficientHistory { .. }
            | Error::TooShort { .. }
            | Error::DegenerateSeries(_)
            | Error::DegenerateCorrelation(_) => CommandError::Insufficient(e),
            other => CommandError::Other(other),
        }
    }
}

fn require<'a>(path: &'a Option<PathBuf>, key: &'static str) -> Result<&'a Path, CommandError> {
    let path = path
        .as_deref()
        .ok_or_else(|| CommandError::MissingInput(format!("config key `{key}` is not set")))?;
    if !path.exists() {
        return Err(CommandError::MissingInput(path.display().to_string()));
    }
    Ok(path)
}

fn upstream(out: &Path, name: String, command: &'static str) -> Result<PathBuf, CommandError> {
    let path = out.join(name);
    if !path.exists() {
        return Err(CommandError::MissingUpstream {
            artifact: path,
            command,
        });
    }
    Ok(path)
}

fn ensure_out(cfg: &RunConfig) -> Result<PathBuf, CommandError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CommandError::Other(e.into()))?;
    Ok(cfg.out.clone())
}

/// Analysis routes: the satellite-storage chain and the well chain share
/// all machinery but differ in window scheme and file prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Grace,
    Well,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::Grace => "grace",
            Route::Well => "well",
        }
    }

    fn scheme(&self, cfg: &RunConfig) -> Result<WindowScheme, Error> {
        match self {
            Route::Grace => {
                WindowScheme::new(cfg.initial_window, cfg.window_step, WindowMode::Monthly)
            }
            Route::Well => WindowScheme::new(
                cfg.well_initial_window,
                cfg.window_step,
                WindowMode::SeasonalFourPerYear,
            ),
        }
    }
}

/// Routes whose gridded storage anomaly exists in the out directory.
fn available_routes(out: &Path) -> Vec<Route> {
    [Route::Grace, Route::Well]
        .into_iter()
        .filter(|r| out.join(format!("gwsa_{}.csv", r.name())).exists())
        .collect()
}

fn load_regions(cfg: &RunConfig) -> Result<RegionMask, CommandError> {
    let path = require(&cfg.regions, "regions")?;
    Ok(io::read_region_mask_csv(path)?)
}

/// Regional precipitation anomaly: area-mean precipitation with its
/// calendar-month climatology (over the full record) removed.
fn precip_anomaly_by_region(
    cfg: &RunConfig,
    regions: &RegionMask,
) -> Result<BTreeMap<String, MonthlySeries>, CommandError> {
    let path = require(&cfg.precip, "precip")?;
    let precip = io::read_gridded_csv(path, "mm")?;
    let mut out = BTreeMap::new();
    for region in regions.regions() {
        let mean = regional_mean(&precip, regions, &region, cfg.weighting)?;
        let clim = monthly_climatology(&mean, mean.axis().range())?;
        out.insert(region, remove_climatology(&mean, &clim));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// synth

/// Generates the bundled synthetic scenario under `<out>/synth/`.
pub fn cmd_synth(cfg: &RunConfig) -> Result<Vec<PathBuf>, CommandError> {
    cfg.validate()?;
    let out = ensure_out(cfg)?;
    let scenario = SyntheticScenario::bundled(cfg.seed)?;
    Ok(scenario.write_to(&out.join("synth"))?)
}

// ---------------------------------------------------------------------------
// anomaly

/// Builds the storage-anomaly fields (satellite route: total minus surface
/// ensemble; well route: gridded well anomalies) and their regional mean
/// series.
pub fn cmd_anomaly(cfg: &RunConfig) -> Result<Vec<PathBuf>, CommandError> {
    cfg.validate()?;
    let out = ensure_out(cfg)?;
    let regions = load_regions(cfg)?;
    let mut files = Vec::new();

    let grace_requested = cfg.twsa.is_some() || !cfg.sws.is_empty();
    let well_requested = cfg.wells.is_some();
    if !grace_requested && !well_requested {
        return Err(CommandError::MissingInput(
            "config keys `twsa`+`sws` and/or `wells` are required".into(),
        ));
    }

    let mut emit_field = |route: Route, field: &GriddedSeries| -> Result<(), CommandError> {
        let path = out.join(format!("gwsa_{}.csv", route.name()));
        io::write_gridded_csv(&path, field)?;
        files.push(path);
        for region in regions.regions() {
            let series = regional_mean(field, &regions, &region, cfg.weighting)?;
            let path = out.join(format!("gwsa_{}_{region}.csv", route.name()));
            io::write_series_csv(&path, &series, "value")?;
            files.push(path);
        }
        Ok(())
    };

    if grace_requested {
        let twsa_path = require(&cfg.twsa, "twsa")?;
        if cfg.sws.is_empty() {
            return Err(CommandError::MissingInput(
                "config key `sws` is not set".into(),
            ));
        }
        let twsa = io::read_gridded_csv(twsa_path, "mm")?;
        let mut sws = Vec::new();
        for path in &cfg.sws {
            if !path.exists() {
                return Err(CommandError::MissingInput(path.display().to_string()));
            }
            sws.push(io::read_gridded_csv(path, "mm")?);
        }
        let gwsa = grace_gwsa(&twsa, &sws)?;
        emit_field(Route::Grace, &gwsa)?;
    }

    if well_requested {
        let wells_path = require(&cfg.wells, "wells")?;
        let stations = io::read_stations_csv(wells_path)?;
        let station_baseline = |st: &crate::anomaly::StationRecord| -> Result<MonthRange, Error> {
            match cfg.well_baseline {
                Some(range) => Ok(range),
                None => MonthRange::new(
                    st.observations.first().expect("validated non-empty").0,
                    st.observations.last().expect("validated non-empty").0,
                ),
            }
        };
        // gridded field needs one shared baseline; per-station spans are
        // handled inside well_gwsa via the same rule
        let field = {
            let grid = regions.grid();
            match cfg.well_baseline {
                Some(range) => well_field(&stations, &grid, range)?,
                None => {
                    // per-station full-span baselines: grid the stations
                    // ourselves so each keeps its own climatology window
                    let mut per_station = Vec::new();
                    for st in &stations {
                        let range = station_baseline(st)?;
                        let (i, j) = crate::grid::nearest_cell(&grid, st.lat, st.lon)?;
                        per_station.push((i, j, well_gwsa(st, range)?));
                    }
                    let start = per_station.iter().map(|(_, _, s)| s.axis().start()).min();
                    let end = per_station.iter().map(|(_, _, s)| s.axis().end()).max();
                    let (Some(start), Some(end)) = (start, end) else {
                        return Err(CommandError::Insufficient(Error::TooShort {
                            have: 0,
                            need: 1,
                        }));
                    };
                    let axis = crate::month::TimeAxis::from_range(MonthRange::new(start, end)?);
                    let mut field = GriddedSeries::missing(grid, axis, "mm");
                    for (i, j) in grid.cells() {
                        let here: Vec<&MonthlySeries> = per_station
                            .iter()
                            .filter(|&&(si, sj, _)| si == i && sj == j)
                            .map(|(_, _, s)| s)
                            .collect();
                        if here.is_empty() {
                            continue;
                        }
                        for (t, month) in axis.iter().enumerate() {
                            let vals: Vec<f64> = here.iter().filter_map(|s| s.at(month)).collect();
                            if !vals.is_empty() {
                                field.set(
                                    t,
                                    i,
                                    j,
                                    Some(vals.iter().sum::<f64>() / vals.len() as f64),
                                );
                            }
                        }
                    }
                    field
                }
            }
        };
        emit_field(Route::Well, &field)?;
    }

    Ok(files)
}

// ---------------------------------------------------------------------------
// optimal-period

/// Optimal-period JSON schema shared by both estimation methods.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimalPeriodJson {
    pub region: String,
    pub method: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_star: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_p: Option<f64>,
}

fn outcome_json(region: &str, outcome: &OptimalPeriodOutcome) -> OptimalPeriodJson {
    match outcome {
        OptimalPeriodOutcome::Significant(r) => OptimalPeriodJson {
            region: region.to_string(),
            method: r.method.label().to_string(),
            status: "ok".to_string(),
            k_star: Some(r.k_star),
            median_r: Some(r.median_r),
            median_p: Some(r.median_p),
            r_sd: Some(r.r_spread),
            best_k: None,
            best_r: None,
            best_p: None,
        },
        OptimalPeriodOutcome::NotSignificant {
            best_k,
            best_r,
            best_p,
            method,
        } => OptimalPeriodJson {
            region: region.to_string(),
            method: method.label().to_string(),
            status: "none".to_string(),
            k_star: None,
            median_r: None,
            median_p: None,
            r_sd: None,
            best_k: Some(*best_k),
            best_r: Some(*best_r),
            best_p: Some(*best_p),
        },
    }
}

fn read_regional_gwsa(
    out: &Path,
    route: Route,
    region: &str,
) -> Result<MonthlySeries, CommandError> {
    let path = upstream(
        out,
        format!("gwsa_{}_{region}.csv", route.name()),
        "anomaly",
    )?;
    Ok(io::read_series_csv(&path, "value", "mm")?)
}

/// Sweeps accumulation periods per region and route, writing profile CSVs
/// plus optimal-period JSON for the expanding-median and whole-record
/// methods; optionally a per-cell optimal-period table.
pub fn cmd_optimal_period(cfg: &RunConfig) -> Result<Vec<PathBuf>, CommandError> {
    cfg.validate()?;
    let out = ensure_out(cfg)?;
    let regions = load_regions(cfg)?;
    let precip_anom = precip_anomaly_by_region(cfg, &regions)?;
    let routes = available_routes(&out);
    if routes.is_empty() {
        return Err(CommandError::MissingUpstream {
            artifact: out.join("gwsa_grace.csv"),
            command: "anomaly",
        });
    }

    let mut files = Vec::new();
    for route in routes {
        let scheme = route.scheme(cfg)?;
        for region in regions.regions() {
            let target = read_regional_gwsa(&out, route, &region)?;
            let driver = &precip_anom[&region];
            let profile = correlation_profile(&target, driver, cfg.k_max, &scheme)?;
            let path = out.join(format!("profile_{}_{region}.csv", route.name()));
            io::write_profile_csv(&path, &profile)?;
            files.push(path);

            let median = optimal_period(&profile, cfg.alpha);
            let path = out.join(format!("optimal_{}_{region}.json", route.name()));
            io::write_json(&path, &outcome_json(&region, &median))?;
            files.push(path);

            let full = optimal_period(&full_series_profile(&target, driver, cfg.k_max)?, cfg.alpha);
            let path = out.join(format!("optimal_full_{}_{region}.json", route.name()));
            io::write_json(&path, &outcome_json(&region, &full))?;
            files.push(path);
        }

        if cfg.per_cell {
            files.push(per_cell_optimal(cfg, &out, route, &regions, &scheme)?);
        }
    }
    Ok(files)
}

/// Per-cell optimal periods (`lat,lon,status,k_star,median_r,median_p`).
fn per_cell_optimal(
    cfg: &RunConfig,
    out: &Path,
    route: Route,
    regions: &RegionMask,
    scheme: &WindowScheme,
) -> Result<PathBuf, CommandError> {
    let precip_path = require(&cfg.precip, "precip")?;
    let precip = io::read_gridded_csv(precip_path, "mm")?;
    let gwsa_path = upstream(out, format!("gwsa_{}.csv", route.name()), "anomaly")?;
    let gwsa = io::read_gridded_csv(&gwsa_path, "mm")?;
    if !gwsa.grid().same_geometry(&regions.grid()) {
        return Err(CommandError::Other(Error::GridMismatch));
    }

    let mut rows = String::from("lat,lon,status,k_star,median_r,median_p\n");
    let grid = gwsa.grid();
    for (i, j) in grid.cells() {
        let (lat, lon) = grid.center(i, j);
        let target = gwsa.cell_series(i, j);
        let driver = precip.cell_series(i, j);
        let clim = monthly_climatology(&driver, driver.axis().range())?;
        let driver = remove_climatology(&driver, &clim);
        let row = if target.count_present() == 0 {
            format!("{},{},empty,,,\n", io::fmt_f64(lat), io::fmt_f64(lon))
        } else {
            let profile = correlation_profile(&target, &driver, cfg.k_max, scheme)?;
            match optimal_period(&profile, cfg.alpha) {
                OptimalPeriodOutcome::Significant(r) => format!(
                    "{},{},ok,{},{},{}\n",
                    io::fmt_f64(lat),
                    io::fmt_f64(lon),
                    r.k_star,
                    io::fmt_f64(r.median_r),
                    io::fmt_f64(r.median_p)
                ),
                OptimalPeriodOutcome::NotSignificant {
                    best_k,
                    best_r,
                    best_p,
                    ..
                } => format!(
                    "{},{},none,{},{},{}\n",
                    io::fmt_f64(lat),
                    io::fmt_f64(lon),
                    best_k,
                    io::fmt_f64(best_r),
                    io::fmt_f64(best_p)
                ),
            }
        };
        rows.push_str(&row);
    }
    let path = out.join(format!("optimal_cells_{}.csv", route.name()));
    fs::write(&path, rows).map_err(|e| CommandError::Other(e.into()))?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// drought

fn read_optimal_k(out: &Path, route: Route, region: &str) -> Result<Option<usize>, CommandError> {
    let path = upstream(
        out,
        format!("optimal_{}_{region}.json", route.name()),
        "optimal-period",
    )?;
    let json: OptimalPeriodJson = io::read_json(&path)?;
    Ok(json.k_star.or(json.best_k))
}

/// Storage anomaly ready for drought detection: gaps filled, monthly
/// climatology over the configured baseline removed.
fn drought_ready(series: &MonthlySeries, baseline: MonthRange) -> Result<MonthlySeries, Error> {
    let filled = fill_gaps_linear(series)?;
    let axis_range = filled.axis().range();
    let clamped = MonthRange::new(
        baseline.start.max(axis_range.start),
        baseline.end.min(axis_range.end),
    )?;
    let clim = monthly_climatology(&filled, clamped)?;
    Ok(remove_climatology(&filled, &clim))
}

/// Detects drought events on the regional storage and optimal accumulated
/// precipitation series, computes areal extent from the per-cell field, and
/// summarizes extremes and period change.
pub fn cmd_drought(cfg: &RunConfig) -> Result<Vec<PathBuf>, CommandError> {
    cfg.validate()?;
    let out = ensure_out(cfg)?;
    let regions = load_regions(cfg)?;
    let precip_anom = precip_anomaly_by_region(cfg, &regions)?;
    let routes = available_routes(&out);
    if routes.is_empty() {
        return Err(CommandError::MissingUpstream {
            artifact: out.join("gwsa_grace.csv"),
            command: "anomaly",
        });
    }

    let mut files = Vec::new();
    for route in routes {
        let mut summary = String::from(
            "region,series,latest_start,latest_end,latest_duration_inclusive,latest_duration_exclusive,\
             latest_peak_mm,latest_peak_month,latest_persistent,longest_start,longest_end,\
             longest_duration_inclusive,wettest_mm,wettest_month,driest_mm,driest_month,\
             most_widespread_month,most_widespread_percent,change_pct\n",
        );

        // per-cell mask and extent from the gridded field
        let gwsa_path = upstream(&out, format!("gwsa_{}.csv", route.name()), "anomaly")?;
        let field = io::read_gridded_csv(&gwsa_path, "mm")?;
        if !field.grid().same_geometry(&regions.grid()) {
            return Err(CommandError::Other(Error::GridMismatch));
        }
        let mut anomaly_field = GriddedSeries::missing(field.grid(), field.axis(), "mm");
        for (i, j) in field.grid().cells() {
            let series = field.cell_series(i, j);
            if series.count_present() >= 2 {
                if let Ok(anom) = drought_ready(&series, cfg.baseline) {
                    anomaly_field.set_cell_series(i, j, &anom);
                }
            }
        }
        let mask = drought_mask(&anomaly_field, cfg.min_run);

        for region in regions.regions() {
            let gwsa = read_regional_gwsa(&out, route, &region)?;
            let gwsa_anom = drought_ready(&gwsa, cfg.baseline)?;
            let gwsa_id = format!("gwsa_{}_{region}", route.name());
            let gwsa_catalog = detect_events(&gwsa_anom, cfg.min_run, &gwsa_id);

            // optimal accumulated precipitation anomaly over the same span
            let k = read_optimal_k(&out, route, &region)?;
            let ppt_catalog = match k {
                Some(k) => {
                    let acc = accumulate(&precip_anom[&region], k)?;
                    let windowed = acc.window(gwsa.axis().range())?;
                    let ppt_anom = drought_ready(&windowed, cfg.baseline)?;
                    Some((
                        detect_events(
                            &ppt_anom,
                            cfg.min_run,
                            &format!("ppt_opt_{}_{region}", route.name()),
                        ),
                        ppt_anom,
                    ))
                }
                None => None,
            };

            let mut catalogs: Vec<&DroughtCatalog> = vec![&gwsa_catalog];
            if let Some((c, _)) = &ppt_catalog {
                catalogs.push(c);
            }
            let path = out.join(format!("events_{}_{region}.csv", route.name()));
            io::write_events_csv(&path, &catalogs)?;
            files.push(path);

            let extent = areal_extent(&mask, &regions, &region, cfg.weighting)?;
            let path = out.join(format!("extent_{}_{region}.csv", route.name()));
            io::write_series_csv(&path, &extent, "percent")?;
            files.push(path);
            let widespread = most_widespread(&extent);

            let change = period_change(&gwsa_anom, cfg.early_range, cfg.late_range).ok();
            summary.push_str(&summary_row(
                &region,
                "gwsa",
                &gwsa_catalog,
                widespread,
                change,
            ));
            if let Some((catalog, ppt_anom)) = &ppt_catalog {
                let change = period_change(ppt_anom, cfg.early_range, cfg.late_range).ok();
                summary.push_str(&summary_row(&region, "ppt_opt", catalog, None, change));
            }
        }

        let path = out.join(format!("drought_summary_{}.csv", route.name()));
        fs::write(&path, summary).map_err(|e| CommandError::Other(e.into()))?;
        files.push(path);
    }
    Ok(files)
}

fn summary_row(
    region: &str,
    series: &str,
    catalog: &DroughtCatalog,
    widespread: Option<(crate::month::MonthIndex, f64)>,
    change_pct: Option<f64>,
) -> String {
    let latest = catalog.latest_event();
    let longest = catalog.longest_event();
    let fmt_month =
        |m: Option<crate::month::MonthIndex>| m.map(|m| m.to_string()).unwrap_or_default();
    let fmt_num = |v: Option<f64>| v.map(io::fmt_f64).unwrap_or_default();
    let fmt_count = |v: Option<usize>| v.map(|v| v.to_string()).unwrap_or_default();
    format!(
        "{region},{series},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        fmt_month(latest.map(|e| e.start)),
        fmt_month(latest.map(|e| e.end)),
        fmt_count(latest.map(|e| e.duration)),
        fmt_count(latest.map(|e| e.duration_exclusive())),
        fmt_num(latest.map(|e| e.peak_departure)),
        fmt_month(latest.map(|e| e.peak_month)),
        latest.map(|e| e.persistent.to_string()).unwrap_or_default(),
        fmt_month(longest.map(|e| e.start)),
        fmt_month(longest.map(|e| e.end)),
        fmt_count(longest.map(|e| e.duration)),
        fmt_num(catalog.wettest.map(|(v, _)| v)),
        fmt_month(catalog.wettest.map(|(_, m)| m)),
        fmt_num(catalog.driest.map(|(v, _)| v)),
        fmt_month(catalog.driest.map(|(_, m)| m)),
        fmt_month(widespread.map(|(m, _)| m)),
        fmt_num(widespread.map(|(_, v)| v)),
        fmt_num(change_pct),
    )
}

// ---------------------------------------------------------------------------
// ndvi-prep

/// Prepares vegetation inputs: weekly composites to monthly series,
/// land-use and irrigation strata, aggregation of the
/// groundwater-irrigated vegetation signal to the storage grid, regional
/// series, and stratified seasonal comparisons.
pub fn cmd_ndvi_prep(cfg: &RunConfig) -> Result<Vec<PathBuf>, CommandError> {
    cfg.validate()?;
    let out = ensure_out(cfg)?;
    let regions = load_regions(cfg)?;
    let weekly = io::read_weekly_grid_csv(require(&cfg.ndvi_weekly, "ndvi_weekly")?)?;
    let irrigation = io::read_irrigation_csv(require(&cfg.irrigation, "irrigation")?)?;
    if !irrigation.grid().same_geometry(&weekly.grid()) {
        return Err(CommandError::Other(Error::GridMismatch));
    }

    // monthly axis spanning the whole weekly record
    let axis = {
        let months: Vec<crate::month::MonthIndex> = (0..weekly.n_weeks())
            .map(|w| {
                let (y, _) = weekly.week_at(w);
                crate::month::MonthIndex::new(y, 6).expect("valid")
            })
            .collect();
        let start =
            crate::month::MonthIndex::new(months.first().expect("weeks").year(), 1).expect("valid");
        let end =
            crate::month::MonthIndex::new(months.last().expect("weeks").year(), 12).expect("valid");
        crate::month::TimeAxis::from_range(MonthRange::new(start, end)?)
    };
    let monthly = weekly_grid_to_monthly(&weekly, axis)?;

    // crop mask on the vegetation grid (all-crop when no land-use input)
    let crop_mask: Option<CategoricalGrid> = match &cfg.lulc {
        Some(path) => {
            if !path.exists() {
                return Err(CommandError::MissingInput(path.display().to_string()));
            }
            let fine = io::read_categorical_csv(path)?;
            Some(majority_resample(&fine, &weekly.grid())?)
        }
        None => None,
    };
    let is_crop = |i: usize, j: usize| -> bool {
        crop_mask
            .as_ref()
            .is_none_or(|m| m.class(i, j) == cfg.lulc_crop_class)
    };

    // irrigation strata intersected with cropland
    let (gw_raw, rainfed_raw) =
        irrigation_masks(&irrigation, cfg.gw_threshold, cfg.rainfed_threshold)?;
    let combine = |mask: &CategoricalGrid| -> Result<CategoricalGrid, Error> {
        let grid = mask.grid();
        let classes = grid
            .cells()
            .map(|(i, j)| {
                if mask.class(i, j) == STRATUM_IN && is_crop(i, j) {
                    STRATUM_IN
                } else {
                    0
                }
            })
            .collect();
        CategoricalGrid::new(grid, classes)
    };
    let gw_mask = combine(&gw_raw)?;
    let rainfed_mask = combine(&rainfed_raw)?;

    let mut files = Vec::new();

    // groundwater-irrigated vegetation aggregated to the storage grid
    let coarse = regions.grid();
    let mut coarse_gw = block_mean_resample(&monthly, &coarse, Some((&gw_mask, STRATUM_IN)))?;
    if let Some(gate) = cfg.coverage_gate {
        let coverage = class_coverage(&gw_mask, &coarse, STRATUM_IN)?;
        for (i, j) in coarse.cells() {
            if coverage[coarse.flat(i, j)] * 100.0 <= gate {
                for t in 0..coarse_gw.axis().len() {
                    coarse_gw.set(t, i, j, None);
                }
            }
        }
    }
    let path = out.join("ndvi_monthly_gw.csv");
    io::write_gridded_csv(&path, &coarse_gw)?;
    files.push(path);

    for region in regions.regions() {
        let series = regional_mean(&coarse_gw, &regions, &region, cfg.weighting)?;
        let path = out.join(format!("ndvi_gw_{region}.csv"));
        io::write_series_csv(&path, &series, "value")?;
        files.push(path);
    }

    // stratified seasonal comparison on the vegetation grid
    let fine_regions = refine_region_mask(&regions, &weekly.grid())?;
    for region in regions.regions() {
        for season in [Season::Kharif, Season::Rabi] {
            let strat = irrigated_vs_rainfed_ndvi(
                &monthly,
                &gw_mask,
                &rainfed_mask,
                &fine_regions,
                &region,
                season,
                SeasonYearConvention::StartYear,
                cfg.weighting,
            )?;
            let mut text = String::from("season_year,stratum,value\n");
            for (year, irrigated, rainfed) in &strat.years {
                let _ = writeln!(text, "{year},gw_irrigated,{}", io::fmt_opt(*irrigated));
                let _ = writeln!(text, "{year},non_irrigated,{}", io::fmt_opt(*rainfed));
            }
            let path = out.join(format!("ndvi_strata_{region}_{}.csv", season.label()));
            fs::write(&path, text).map_err(|e| CommandError::Other(e.into()))?;
            files.push(path);
        }
    }
    Ok(files)
}

// ---------------------------------------------------------------------------
// attribute

/// One period's attribution outcome in the JSON output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributionJson {
    pub period: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictors: Option<Vec<PredictorImportance>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_r2: Option<f64>,
    pub runs: usize,
    pub alpha: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// NDVI-storage coupling summary per accumulation period.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingJson {
    pub region: String,
    pub k: usize,
    pub median_r: f64,
    pub median_p: f64,
    pub r_sd: f64,
    pub n_windows: usize,
    pub full_r: f64,
    pub full_p: f64,
}

/// Decomposes the storage anomaly onto optimal-period precipitation and
/// k-month vegetation anomalies per analysis period, with bootstrap
/// intervals, and summarizes the direct NDVI-storage coupling.
pub fn cmd_attribute(cfg: &RunConfig) -> Result<Vec<PathBuf>, CommandError> {
    cfg.validate()?;
    let out = ensure_out(cfg)?;
    let regions = load_regions(cfg)?;
    let precip_anom = precip_anomaly_by_region(cfg, &regions)?;
    let route = Route::Grace;
    let scheme = route.scheme(cfg)?;

    let mut files = Vec::new();
    for region in regions.regions() {
        let gwsa = read_regional_gwsa(&out, route, &region)?;
        let k_star = read_optimal_k(&out, route, &region)?.ok_or(CommandError::Insufficient(
            Error::DegenerateCorrelation(
                "no accumulation period available for the precipitation predictor",
            ),
        ))?;
        let ppt_opt = accumulate(&precip_anom[&region], k_star)?;

        let ndvi_path = upstream(&out, format!("ndvi_gw_{region}.csv"), "ndvi-prep")?;
        let ndvi = io::read_series_csv(&ndvi_path, "value", "ndvi")?;
        let ndvi_clim = monthly_climatology(&ndvi, ndvi.axis().range())?;
        let ndvi_anom = remove_climatology(&ndvi, &ndvi_clim);

        let mut couplings = Vec::new();
        for &k in &cfg.ndvi_ks {
            let exp = ndvi_gwsa_coupling(&ndvi_anom, &gwsa, k, &scheme)?;
            let acc = accumulate(&ndvi_anom, k)?.align_to(gwsa.axis());
            let (xs, ys) = pairwise_complete(&gwsa, &acc);
            let full_r = pearson_r(&xs, &ys)?;
            let full_p = corr_p_value(full_r, xs.len())?;
            couplings.push(CouplingJson {
                region: region.clone(),
                k,
                median_r: exp.median_r,
                median_p: exp.median_p,
                r_sd: exp.r_spread(),
                n_windows: exp.n_windows(),
                full_r,
                full_p,
            });

            let ndvi_acc = accumulate(&ndvi_anom, k)?;
            let predictors = [("ppt_opt", &ppt_opt), ("ndvi", &ndvi_acc)];
            let seed = CounterRng::new(cfg.seed)
                .derive(region_tag(&region))
                .derive(k as u64)
                .seed();
            let outcomes = subperiod_compare(
                &gwsa,
                &predictors,
                &cfg.periods,
                cfg.bootstrap_runs,
                cfg.alpha,
                seed,
            );
            let entries: Vec<AttributionJson> = outcomes
                .into_iter()
                .map(|o| match o.result {
                    Ok(ri) => AttributionJson {
                        period: o.period.to_string(),
                        status: "ok".to_string(),
                        predictors: Some(ri.predictors),
                        model_r2: Some(ri.model_r2),
                        runs: ri.runs,
                        alpha: ri.alpha,
                        seed: ri.seed,
                        error: None,
                    },
                    Err(e) => AttributionJson {
                        period: o.period.to_string(),
                        status: "error".to_string(),
                        predictors: None,
                        model_r2: None,
                        runs: cfg.bootstrap_runs,
                        alpha: cfg.alpha,
                        seed,
                        error: Some(e.to_string()),
                    },
                })
                .collect();
            let path = out.join(format!("attribution_{region}_ndvi{k}.json"));
            io::write_json(&path, &entries)?;
            files.push(path);
        }
        let path = out.join(format!("coupling_{region}.json"));
        io::write_json(&path, &couplings)?;
        files.push(path);
    }
    Ok(files)
}

fn region_tag(region: &str) -> u64 {
    region
        .bytes()
        .fold(0u64, |acc, b| acc.wrapping_mul(257).wrapping_add(b as u64))
}

// ---------------------------------------------------------------------------
// oracle

/// Runs the brute-force oracle suite and writes its JSON report.
pub fn cmd_oracle(cfg: &RunConfig) -> Result<(Vec<PathBuf>, bool), CommandError> {
    let out = ensure_out(cfg)?;
    let report = crate::oracles::oracle_suite();
    let path = out.join("oracle_report.json");
    io::write_json(&path, &report)?;
    print!("{}", report.render());
    Ok((vec![path], report.all_pass()))
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug, Serialize)]
struct ManifestEntry {
    file: String,
    sha256: String,
    description: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    command: String,
    seed: u64,
    alpha: f64,
    k_max: usize,
    baseline: String,
    bootstrap_runs: usize,
    ndvi_ks: Vec<usize>,
    periods: Vec<String>,
    files: Vec<ManifestEntry>,
}

/// Assembles plot-ready tables from the other commands' outputs:
/// standardized series pairs, profile and extent curves, stratified
/// seasonal series, summary tables, published reference values, and a
/// checksummed manifest (written last).
pub fn cmd_report(cfg: &RunConfig) -> Result<Vec<PathBuf>, CommandError> {
    cfg.validate()?;
    let out = ensure_out(cfg)?;
    let report_dir = out.join("report");
    fs::create_dir_all(&report_dir).map_err(|e| CommandError::Other(e.into()))?;
    let regions = load_regions(cfg)?;
    let precip_anom = precip_anomaly_by_region(cfg, &regions)?;
    let routes = available_routes(&out);
    if routes.is_empty() {
        return Err(CommandError::MissingUpstream {
            artifact: out.join("gwsa_grace.csv"),
            command: "anomaly",
        });
    }

    let mut entries: Vec<(PathBuf, String)> = Vec::new();
    let mut emit = |path: PathBuf, description: String| -> PathBuf {
        entries.push((path.clone(), description));
        path
    };

    // standardized pairs + copied curves per route and region
    let mut optimal_rows = String::from(
        "data,region,median_r,median_p,median_k,median_r_sd,full_r,full_p,full_k,status\n",
    );
    for route in &routes {
        let dataset = match route {
            Route::Grace => "GRACE-PPT",
            Route::Well => "WELL-PPT",
        };
        for region in regions.regions() {
            let gwsa = read_regional_gwsa(&out, *route, &region)?;
            let median_path = upstream(
                &out,
                format!("optimal_{}_{region}.json", route.name()),
                "optimal-period",
            )?;
            let median: OptimalPeriodJson = io::read_json(&median_path)?;
            let full_path = upstream(
                &out,
                format!("optimal_full_{}_{region}.json", route.name()),
                "optimal-period",
            )?;
            let full: OptimalPeriodJson = io::read_json(&full_path)?;

            // series pair: standardized storage and optimal accumulation;
            // a region without usable data keeps the header-only file
            let k = median.k_star.or(median.best_k).unwrap_or(1);
            let acc = accumulate(&precip_anom[&region], k)?.align_to(gwsa.axis());
            let pair_path = report_dir.join(format!("series_{}_{region}.csv", route.name()));
            let mut text = String::from("year,month,gwsa_std,ppt_opt_std\n");
            if let (Ok(gwsa_std), Ok(acc_std)) = (standardize(&gwsa), standardize(&acc)) {
                for (month, a) in gwsa_std.iter() {
                    let _ = writeln!(
                        text,
                        "{},{},{},{}",
                        month.year(),
                        month.month(),
                        io::fmt_opt(a),
                        io::fmt_opt(acc_std.at(month))
                    );
                }
            }
            fs::write(&pair_path, text).map_err(|e| CommandError::Other(e.into()))?;
            emit(
                pair_path,
                format!("standardized storage and {k}-month precipitation pair, {region}"),
            );

            // storage persistence: autocorrelation out to 24 months
            let mut text = String::from("lag,r\n");
            if let Ok(ac) = crate::optimal_period::autocorrelation(&gwsa, 24) {
                for (lag, r) in ac.iter().enumerate() {
                    let _ = writeln!(text, "{lag},{}", io::fmt_opt(*r));
                }
            }
            let ac_path = report_dir.join(format!("autocorr_{}_{region}.csv", route.name()));
            fs::write(&ac_path, text).map_err(|e| CommandError::Other(e.into()))?;
            emit(ac_path, format!("storage autocorrelation by lag, {region}"));

            // copies of the upstream curves
            let profile_src = upstream(
                &out,
                format!("profile_{}_{region}.csv", route.name()),
                "optimal-period",
            )?;
            let profile_dst = report_dir.join(format!("profile_{}_{region}.csv", route.name()));
            fs::copy(&profile_src, &profile_dst).map_err(|e| CommandError::Other(e.into()))?;
            emit(profile_dst, format!("correlation profile, {region}"));

            let extent_src = upstream(
                &out,
                format!("extent_{}_{region}.csv", route.name()),
                "drought",
            )?;
            let extent_dst = report_dir.join(format!("extent_{}_{region}.csv", route.name()));
            fs::copy(&extent_src, &extent_dst).map_err(|e| CommandError::Other(e.into()))?;
            emit(extent_dst, format!("monthly drought extent, {region}"));

            let fmt = |v: Option<f64>| v.map(io::fmt_f64).unwrap_or_default();
            let fmtk = |v: Option<usize>| v.map(|k| k.to_string()).unwrap_or_default();
            let _ = writeln!(
                optimal_rows,
                "{dataset},{region},{},{},{},{},{},{},{},{}",
                fmt(median.median_r.or(median.best_r)),
                fmt(median.median_p.or(median.best_p)),
                fmtk(median.k_star.or(median.best_k)),
                fmt(median.r_sd),
                fmt(full.median_r.or(full.best_r)),
                fmt(full.median_p.or(full.best_p)),
                fmtk(full.k_star.or(full.best_k)),
                median.status,
            );
        }
    }
    let optimal_path = report_dir.join("optimal_summary.csv");
    fs::write(&optimal_path, optimal_rows).map_err(|e| CommandError::Other(e.into()))?;
    emit(
        optimal_path,
        "optimal accumulation periods, median and whole-record methods".to_string(),
    );

    // drought summaries concatenated across routes
    let mut drought_rows = String::from(
        "route,region,series,latest_start,latest_end,latest_duration_inclusive,latest_duration_exclusive,\
         latest_peak_mm,latest_peak_month,latest_persistent,longest_start,longest_end,\
         longest_duration_inclusive,wettest_mm,wettest_month,driest_mm,driest_month,\
         most_widespread_month,most_widespread_percent,change_pct\n",
    );
    for route in &routes {
        let src = upstream(
            &out,
            format!("drought_summary_{}.csv", route.name()),
            "drought",
        )?;
        let text = fs::read_to_string(&src).map_err(|e| CommandError::Other(e.into()))?;
        for line in text.lines().skip(1) {
            let _ = writeln!(drought_rows, "{},{line}", route.name());
        }
    }
    let drought_path = report_dir.join("drought_summary.csv");
    fs::write(&drought_path, drought_rows).map_err(|e| CommandError::Other(e.into()))?;
    emit(
        drought_path,
        "latest/longest drought events, extremes, extent peaks, period change".to_string(),
    );

    // coupling and attribution tables (storage-route analyses)
    let mut coupling_rows = String::from("region,k,median_r,median_p,r_sd,full_r,full_p\n");
    let mut attribution_rows = String::from(
        "period,ndvi_k,region,ppt_share,ndvi_share,ppt_ci_low,ppt_ci_high,ndvi_ci_low,ndvi_ci_high,model_r2,status\n",
    );
    for region in regions.regions() {
        let coupling_path = upstream(&out, format!("coupling_{region}.json"), "attribute")?;
        let couplings: Vec<CouplingJson> = io::read_json(&coupling_path)?;
        for c in &couplings {
            let _ = writeln!(
                coupling_rows,
                "{},{},{},{},{},{},{}",
                c.region,
                c.k,
                io::fmt_f64(c.median_r),
                io::fmt_f64(c.median_p),
                io::fmt_f64(c.r_sd),
                io::fmt_f64(c.full_r),
                io::fmt_f64(c.full_p)
            );
        }
        for &k in &cfg.ndvi_ks {
            let path = upstream(
                &out,
                format!("attribution_{region}_ndvi{k}.json"),
                "attribute",
            )?;
            let entries_json: Vec<AttributionJson> = io::read_json(&path)?;
            for e in &entries_json {
                let find = |name: &str| -> Option<&PredictorImportance> {
                    e.predictors.as_ref()?.iter().find(|p| p.name == name)
                };
                let ppt = find("ppt_opt");
                let ndvi = find("ndvi");
                let fmt = |v: Option<f64>| v.map(io::fmt_f64).unwrap_or_default();
                let _ = writeln!(
                    attribution_rows,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    e.period,
                    k,
                    region,
                    fmt(ppt.map(|p| p.share)),
                    fmt(ndvi.map(|p| p.share)),
                    fmt(ppt.map(|p| p.ci_low)),
                    fmt(ppt.map(|p| p.ci_high)),
                    fmt(ndvi.map(|p| p.ci_low)),
                    fmt(ndvi.map(|p| p.ci_high)),
                    fmt(e.model_r2),
                    e.status
                );
            }
        }
    }
    let coupling_path = report_dir.join("ndvi_coupling_summary.csv");
    fs::write(&coupling_path, coupling_rows).map_err(|e| CommandError::Other(e.into()))?;
    emit(
        coupling_path,
        "NDVI-storage coupling per accumulation period".to_string(),
    );
    let attribution_path = report_dir.join("attribution_summary.csv");
    fs::write(&attribution_path, attribution_rows).map_err(|e| CommandError::Other(e.into()))?;
    emit(
        attribution_path,
        "relative-importance shares with bootstrap bounds".to_string(),
    );

    // stratified seasonal series copies
    for region in regions.regions() {
        for season in ["kharif", "rabi"] {
            let src = upstream(
                &out,
                format!("ndvi_strata_{region}_{season}.csv"),
                "ndvi-prep",
            )?;
            let dst = report_dir.join(format!("ndvi_strata_{region}_{season}.csv"));
            fs::copy(&src, &dst).map_err(|e| CommandError::Other(e.into()))?;
            emit(
                dst,
                format!("seasonal NDVI by irrigation stratum, {region} {season}"),
            );
        }
    }

    // published reference values for comparison
    let reference_path = report_dir.join("reference_values.json");
    io::write_json(&reference_path, &crate::reference::reference_values())?;
    emit(
        reference_path,
        "published 1996-2016 India reference values".to_string(),
    );

    // manifest last, covering every emitted file
    let mut manifest_files = Vec::new();
    for (path, description) in &entries {
        manifest_files.push(ManifestEntry {
            file: path
                .file_name()
                .map(|n| n.to_string_lossy().to_string())
                .unwrap_or_default(),
            sha256: io::sha256_hex(path)?,
            description: description.clone(),
        });
    }
    let manifest = Manifest {
        command: "report".to_string(),
        seed: cfg.seed,
        alpha: cfg.alpha,
        k_max: cfg.k_max,
        baseline: cfg.baseline.to_string(),
        bootstrap_runs: cfg.bootstrap_runs,
        ndvi_ks: cfg.ndvi_ks.clone(),
        periods: cfg.periods.iter().map(|p| p.to_string()).collect(),
        files: manifest_files,
    };
    let manifest_path = report_dir.join("manifest.json");
    io::write_json(&manifest_path, &manifest)?;

    let mut files: Vec<PathBuf> = entries.into_iter().map(|(p, _)| p).collect();
    files.push(manifest_path);
    Ok(files)
}
