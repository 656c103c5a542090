//! The bundled synthetic scenario: a small three-region world with known
//! ground truth, used by the examples, the acceptance suite, and the
//! `synth` command.
//!
//! Geometry: a 2x3 one-degree grid whose columns are the regions NWI, NCI,
//! and SI; a half-degree vegetation grid (2x refinement) and a
//! quarter-degree land-use grid (4x) nest inside it.
//!
//! Construction: regional storage anomalies are standardized k-month
//! accumulations of regional precipitation plus small noise, so each
//! region's optimal accumulation period is known by construction. The NWI
//! column additionally loses storage along a linear pumping ramp starting
//! at month offset 120 (January 2012) of the storage record, which
//! decouples its storage from precipitation and leaves a persistent
//! terminal drought. The SI column's storage is built from precipitation
//! alone, so its attribution ground truth is a vanishing vegetation share.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anomaly::StationRecord;
use crate::error::Error;
use crate::grid::{regional_mean, CategoricalGrid, Grid2D, GriddedSeries, RegionMask, Weighting};
use crate::month::{MonthIndex, MonthRange, TimeAxis};
use crate::series::MonthlySeries;
use crate::synth::{gen_lagged_target, CounterRng};
use crate::vegetation::{IrrigationFraction, WeeklyGrid};

pub const REGIONS: [&str; 3] = ["NWI", "NCI", "SI"];

/// Ground-truth labels reproducible from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTruth {
    pub seed: u64,
    /// Construction accumulation period per region, storage-field route.
    pub optimal_period_months: BTreeMap<String, usize>,
    /// Construction accumulation period per region, well route.
    pub well_optimal_period_months: BTreeMap<String, usize>,
    /// First month of the pumping ramp.
    pub pumping_start: MonthIndex,
    /// Region whose storage carries the ramp.
    pub pumping_region: String,
    /// Region whose storage is driven by precipitation alone, so the
    /// vegetation share of its variance is zero by construction.
    pub precip_only_region: String,
    /// Millimeters of storage anomaly per standardized unit.
    pub storage_scale_mm: f64,
}

/// All inputs of one synthetic world.
#[derive(Debug, Clone)]
pub struct SyntheticScenario {
    pub label: String,
    pub regions: RegionMask,
    pub precip: GriddedSeries,
    pub twsa: GriddedSeries,
    pub sws: Vec<(String, GriddedSeries)>,
    /// The storage-anomaly field the scenario actually encodes; `twsa`
    /// minus the ensemble mean of `sws` recovers it.
    pub gwsa: GriddedSeries,
    pub wells: Vec<StationRecord>,
    pub ndvi_weekly: WeeklyGrid,
    pub lulc: CategoricalGrid,
    pub irrigation: IrrigationFraction,
    pub truth: ScenarioTruth,
}

fn month(y: i32, m: u8) -> MonthIndex {
    MonthIndex::new(y, m).expect("valid month")
}

/// Coarse storage/precipitation grid: 2x3 one-degree cells.
pub fn coarse_grid() -> Grid2D {
    Grid2D::new(24.5, 70.5, 1.0, 1.0, 2, 3).expect("valid grid")
}

fn ndvi_grid() -> Grid2D {
    Grid2D::new(24.25, 70.25, 0.5, 0.5, 4, 6).expect("valid grid")
}

fn lulc_grid() -> Grid2D {
    Grid2D::new(24.125, 70.125, 0.25, 0.25, 8, 12).expect("valid grid")
}

fn region_of_lon_index(j: usize, nlon_per_region: usize) -> &'static str {
    REGIONS[j / nlon_per_region]
}

fn region_mask() -> RegionMask {
    let grid = coarse_grid();
    let membership = grid
        .cells()
        .map(|(_, j)| Some(region_of_lon_index(j, 1).to_string()))
        .collect();
    RegionMask::new(grid, membership, None).expect("mask covers grid")
}

impl SyntheticScenario {
    /// Builds the bundled scenario deterministically from a seed.
    pub fn bundled(seed: u64) -> Result<Self, Error> {
        let rng = CounterRng::new(seed);
        let grid = coarse_grid();
        let regions = region_mask();

        // Precipitation: seasonal cycle plus white noise per cell,
        // 1981-01 .. 2016-12 so a 180-month accumulation exists for every
        // storage month from 1996 on.
        let precip_axis = TimeAxis::new(month(1981, 1), 432)?;
        let mut precip = GriddedSeries::missing(grid, precip_axis, "mm");
        for (i, j) in grid.cells() {
            let cell_rng = rng.derive(1000 + grid.flat(i, j) as u64);
            for (t, m) in precip_axis.iter().enumerate() {
                let phase = (m.month() as f64 - 6.0) / 12.0 * std::f64::consts::TAU;
                let value = (80.0 + 55.0 * phase.sin() + 25.0 * cell_rng.normal(t as u64)).max(0.0);
                precip.set(t, i, j, Some(value));
            }
        }

        // Regional storage targets: standardized k-accumulations of the
        // regional precipitation plus small noise.
        let storage_axis = TimeAxis::new(month(2002, 1), 180)?;
        let storage_range = MonthRange::new(month(2002, 1), month(2016, 12))?;
        let k_by_region: BTreeMap<String, usize> = [("NWI", 153), ("NCI", 105), ("SI", 18)]
            .into_iter()
            .map(|(r, k)| (r.to_string(), k))
            .collect();
        let pumping_start = month(2012, 1);
        let ramp_from = storage_axis.index_of(pumping_start).expect("within axis");
        let storage_scale_mm = 45.0;

        // storage targets accumulate precipitation *anomalies*, the same
        // driver the analysis chain correlates against
        let mut regional_anom: BTreeMap<String, MonthlySeries> = BTreeMap::new();
        for region in REGIONS {
            let precip_r = regional_mean(&precip, &regions, region, Weighting::CosLat)?;
            let clim = crate::anomaly::monthly_climatology(&precip_r, precip_r.axis().range())?;
            regional_anom.insert(
                region.to_string(),
                crate::anomaly::remove_climatology(&precip_r, &clim),
            );
        }

        let mut regional_std: BTreeMap<String, MonthlySeries> = BTreeMap::new();
        for (idx, region) in REGIONS.iter().enumerate() {
            let k = k_by_region[*region];
            let noise = if *region == "SI" { 0.0 } else { 0.02 };
            let target = gen_lagged_target(
                &regional_anom[*region],
                k,
                noise,
                rng.derive(2000 + idx as u64).seed(),
            )?
            .window(storage_range)?;
            let target = if *region == "NWI" {
                let values = target
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(t, v)| {
                        v.map(|x| {
                            if t >= ramp_from {
                                x - 0.06 * (t - ramp_from + 1) as f64
                            } else {
                                x
                            }
                        })
                    })
                    .collect();
                MonthlySeries::new(storage_axis, values, "std")?
            } else {
                target
            };
            regional_std.insert(region.to_string(), target);
        }

        // Per-cell storage field in mm, with small cell-level noise, and a
        // surface-storage ensemble whose mean folds back into a total.
        let mut gwsa = GriddedSeries::missing(grid, storage_axis, "mm");
        let mut sws_a = GriddedSeries::missing(grid, storage_axis, "mm");
        let mut sws_b = GriddedSeries::missing(grid, storage_axis, "mm");
        let mut twsa = GriddedSeries::missing(grid, storage_axis, "mm");
        for (i, j) in grid.cells() {
            let flat = grid.flat(i, j) as u64;
            let cell_rng = rng.derive(3000 + flat);
            let surf_rng = rng.derive(4000 + flat);
            let region = region_of_lon_index(j, 1);
            let target = &regional_std[region];
            for (t, m) in storage_axis.iter().enumerate() {
                let g = target.get(t).expect("construction is gap-free") * storage_scale_mm
                    + 0.8 * cell_rng.normal(t as u64);
                let phase = (m.month() as f64 - 7.0) / 12.0 * std::f64::consts::TAU;
                let s1 = 25.0 * phase.sin() + 4.0 * surf_rng.normal(2 * t as u64);
                let s2 = 20.0 * phase.sin() + 4.0 * surf_rng.normal(2 * t as u64 + 1);
                gwsa.set(t, i, j, Some(g));
                sws_a.set(t, i, j, Some(s1));
                sws_b.set(t, i, j, Some(s2));
                twsa.set(t, i, j, Some(g + 0.5 * (s1 + s2)));
            }
        }

        // Wells: two per region, four observations per year 1996-2016,
        // levels encoding a known-k storage target through the specific
        // yield.
        let well_k: BTreeMap<String, usize> = [("NWI", 136), ("NCI", 63), ("SI", 13)]
            .into_iter()
            .map(|(r, k)| (r.to_string(), k))
            .collect();
        let well_range = MonthRange::new(month(1996, 1), month(2016, 12))?;
        let observed_months: [u8; 4] = [1, 5, 8, 11];
        let mut wells = Vec::new();
        for (ridx, region) in REGIONS.iter().enumerate() {
            let target = gen_lagged_target(
                &regional_anom[*region],
                well_k[*region],
                0.03,
                rng.derive(5000 + ridx as u64).seed(),
            )?
            .window(well_range)?;
            for w in 0..2 {
                let well_rng = rng.derive(6000 + (ridx * 2 + w) as u64);
                let specific_yield = 0.08 + 0.04 * w as f64;
                let lat = 24.5 + w as f64; // one well per grid row
                let lon = 70.5 + ridx as f64 + 0.2 - 0.1 * w as f64;
                let mut obs = Vec::new();
                let mut counter = 0u64;
                for (t, m) in target.axis().iter().enumerate() {
                    if !observed_months.contains(&m.month()) {
                        continue;
                    }
                    let g_mm = target.get(t).expect("gap-free") * 50.0;
                    let level = 8.0 + 1.5 * w as f64 - g_mm / (specific_yield * 1000.0)
                        + 0.02 * well_rng.normal(counter);
                    counter += 1;
                    obs.push((m, level));
                }
                wells.push(StationRecord::new(
                    format!("{region}-W{}", w + 1),
                    lat,
                    lon,
                    specific_yield,
                    obs,
                )?);
            }
        }

        // Weekly vegetation index on the half-degree grid, 1982-2016.
        // Groundwater-irrigated cells run greener; the NWI column also
        // greens over time (the irrigation-expansion signal that opposes
        // its storage ramp).
        let ngrid = ndvi_grid();
        let n_weeks = 35 * 52;
        let mut ndvi = WeeklyGrid::new(
            ngrid,
            1982,
            1,
            n_weeks,
            vec![None; n_weeks * ngrid.ncells()],
        )?;
        let irrigation = bundled_irrigation();
        for (i, j) in ngrid.cells() {
            let flat = ngrid.flat(i, j) as u64;
            let cell_rng = rng.derive(7000 + flat);
            let gw_irrigated = irrigation.gw_fraction(i, j).is_some_and(|f| f > 60.0);
            let region = region_of_lon_index(j, 2);
            for w in 0..n_weeks {
                let (_, week) = ndvi.week_at(w);
                let doy = 7.0 * (week as f64 - 1.0) + 4.0;
                let seasonal = 0.12 * ((doy - 120.0) / 365.0 * std::f64::consts::TAU).sin();
                let mut v = 0.42 + seasonal + 0.02 * cell_rng.normal(w as u64);
                if gw_irrigated {
                    v += 0.08;
                    if region == "NWI" {
                        v += 0.10 * w as f64 / n_weeks as f64;
                    }
                }
                // sparse gaps exercise the gap filling
                if cell_rng.uniform(500_000 + w as u64) < 0.01 {
                    ndvi.set(w, i, j, None);
                } else {
                    ndvi.set(w, i, j, Some(v.clamp(0.0, 1.0)));
                }
            }
        }

        Ok(SyntheticScenario {
            label: "bundled".to_string(),
            regions,
            precip,
            twsa,
            sws: vec![
                ("model_a".to_string(), sws_a),
                ("model_b".to_string(), sws_b),
            ],
            gwsa,
            wells,
            ndvi_weekly: ndvi,
            lulc: bundled_lulc(),
            irrigation,
            truth: ScenarioTruth {
                seed,
                optimal_period_months: k_by_region,
                well_optimal_period_months: well_k,
                pumping_start,
                pumping_region: "NWI".to_string(),
                precip_only_region: "SI".to_string(),
                storage_scale_mm,
            },
        })
    }

    /// Writes every input file plus `truth.json` and a ready-to-run
    /// `scenario.config`, returning the paths in write order.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, Error> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let mut emit = |name: &str| -> PathBuf {
            let p = dir.join(name);
            paths.push(p.clone());
            p
        };

        crate::io::write_gridded_csv(&emit("precip.csv"), &self.precip)?;
        crate::io::write_gridded_csv(&emit("twsa.csv"), &self.twsa)?;
        let mut sws_names = Vec::new();
        for (name, field) in &self.sws {
            let file = format!("sws_{name}.csv");
            crate::io::write_gridded_csv(&emit(&file), field)?;
            sws_names.push(file);
        }
        crate::io::write_stations_csv(&emit("wells.csv"), &self.wells)?;
        crate::io::write_weekly_grid_csv(&emit("ndvi_weekly.csv"), &self.ndvi_weekly)?;
        crate::io::write_categorical_csv(&emit("lulc.csv"), &self.lulc)?;
        crate::io::write_irrigation_csv(&emit("irrigation.csv"), &self.irrigation)?;
        crate::io::write_region_mask_csv(&emit("regions.csv"), &self.regions)?;
        crate::io::write_json(&emit("truth.json"), &self.truth)?;

        let mut config = String::new();
        let _ = writeln!(config, "precip = precip.csv");
        let _ = writeln!(config, "twsa = twsa.csv");
        let _ = writeln!(config, "sws = {}", sws_names.join(","));
        let _ = writeln!(config, "wells = wells.csv");
        let _ = writeln!(config, "ndvi_weekly = ndvi_weekly.csv");
        let _ = writeln!(config, "lulc = lulc.csv");
        let _ = writeln!(config, "lulc_crop_class = 1");
        let _ = writeln!(config, "irrigation = irrigation.csv");
        let _ = writeln!(config, "regions = regions.csv");
        let _ = writeln!(config, "baseline = 2002-01..2016-12");
        let _ = writeln!(config, "k_max = 180");
        let _ = writeln!(config, "initial_window = 60");
        let _ = writeln!(config, "well_initial_window = 40");
        let _ = writeln!(config, "alpha = 0.05");
        let _ = writeln!(config, "bootstrap_runs = 1000");
        let _ = writeln!(config, "seed = {}", self.truth.seed);
        let _ = writeln!(config, "min_run = 3");
        let _ = writeln!(config, "ndvi_ks = 4,12,24");
        let _ = writeln!(config, "periods = 2002-01..2016-12;2002-01..2012-12");
        let _ = writeln!(config, "early_range = 2002-01..2004-12");
        let _ = writeln!(config, "late_range = 2014-01..2016-12");
        fs::write(emit("scenario.config"), config)?;
        Ok(paths)
    }
}

/// Quarter-degree land-use classes: 1 = cropland, 2 = other; a sparse
/// deterministic scatter of non-crop cells.
fn bundled_lulc() -> CategoricalGrid {
    let grid = lulc_grid();
    let classes = grid
        .cells()
        .map(|(i, j)| if (i * grid.nlon + j) % 7 == 3 { 2 } else { 1 })
        .collect();
    CategoricalGrid::new(grid, classes).expect("covers grid")
}

/// Half-degree irrigated-area fractions. Every region mixes strata:
/// cells cycle through groundwater-irrigated, non-irrigated, and
/// in-between, so stratified analyses are possible everywhere.
fn bundled_irrigation() -> IrrigationFraction {
    let grid = ndvi_grid();
    let mut gw = Vec::with_capacity(grid.ncells());
    let mut total = Vec::with_capacity(grid.ncells());
    for (i, j) in grid.cells() {
        match (i + j) % 3 {
            0 => {
                gw.push(Some(70.0 + 5.0 * ((i * 7 + j) % 4) as f64));
                total.push(Some(90.0));
            }
            1 => {
                gw.push(Some(5.0 + ((i + 2 * j) % 5) as f64));
                total.push(Some(10.0 + ((i + j) % 6) as f64));
            }
            _ => {
                gw.push(Some(35.0 + ((2 * i + j) % 10) as f64));
                total.push(Some(55.0));
            }
        }
    }
    IrrigationFraction::new(grid, gw, total).expect("valid fractions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anomaly::{monthly_climatology, remove_climatology};
    use crate::drought::{detect_events, fill_gaps_linear};
    use crate::optimal_period::{
        correlation_profile, optimal_period, OptimalPeriodOutcome, WindowScheme,
    };
    use crate::vegetation::irrigation_masks;

    #[test]
    fn bundled_is_deterministic() {
        let a = SyntheticScenario::bundled(42).unwrap();
        let b = SyntheticScenario::bundled(42).unwrap();
        assert_eq!(a.precip, b.precip);
        assert_eq!(a.twsa, b.twsa);
        assert_eq!(a.wells, b.wells);
        assert_eq!(a.ndvi_weekly, b.ndvi_weekly);
        let c = SyntheticScenario::bundled(43).unwrap();
        assert_ne!(a.precip, c.precip);
    }

    #[test]
    fn twsa_minus_surface_recovers_storage() {
        let s = SyntheticScenario::bundled(42).unwrap();
        let fields: Vec<GriddedSeries> = s.sws.iter().map(|(_, f)| f.clone()).collect();
        let g = crate::anomaly::grace_gwsa(&s.twsa, &fields).unwrap();
        for t in [0, 77, 179] {
            for (i, j) in s.gwsa.grid().cells() {
                let got = g.get(t, i, j).unwrap();
                let want = s.gwsa.get(t, i, j).unwrap();
                assert!((got - want).abs() < 1e-9, "cell ({i},{j}) month {t}");
            }
        }
    }

    #[test]
    fn optimal_periods_recovered_by_construction() {
        let s = SyntheticScenario::bundled(42).unwrap();
        for region in ["NCI", "SI"] {
            let precip_r = regional_mean(&s.precip, &s.regions, region, Weighting::CosLat).unwrap();
            let gwsa_r = regional_mean(&s.gwsa, &s.regions, region, Weighting::CosLat).unwrap();
            let clim = monthly_climatology(&precip_r, precip_r.axis().range()).unwrap();
            let precip_anom = remove_climatology(&precip_r, &clim);
            let profile =
                correlation_profile(&gwsa_r, &precip_anom, 180, &WindowScheme::monthly()).unwrap();
            let truth = s.truth.optimal_period_months[region];
            match optimal_period(&profile, 0.05) {
                OptimalPeriodOutcome::Significant(r) => {
                    assert_eq!(r.k_star, truth, "{region}: got {}", r.k_star);
                }
                other => panic!("{region}: expected significant optimum, got {other:?}"),
            }
        }
    }

    #[test]
    fn pumping_region_has_persistent_terminal_drought() {
        let s = SyntheticScenario::bundled(42).unwrap();
        let gwsa_r = regional_mean(&s.gwsa, &s.regions, "NWI", Weighting::CosLat).unwrap();
        let filled = fill_gaps_linear(&gwsa_r).unwrap();
        let clim = monthly_climatology(&filled, filled.axis().range()).unwrap();
        let anom = remove_climatology(&filled, &clim);
        let catalog = detect_events(&anom, 3, "NWI");
        let last = catalog.latest_event().expect("drought expected");
        assert!(last.persistent);
        assert!(last.duration >= 24, "duration {}", last.duration);
    }

    #[test]
    fn strata_exist_in_every_region() {
        let s = SyntheticScenario::bundled(42).unwrap();
        let (gw, rainfed) = irrigation_masks(&s.irrigation, 60.0, 20.0).unwrap();
        let fine_regions =
            crate::grid::refine_region_mask(&s.regions, &s.irrigation.grid()).unwrap();
        for region in REGIONS {
            let cells = fine_regions.member_cells(region);
            let n_gw = cells.iter().filter(|&&(i, j)| gw.class(i, j) == 1).count();
            let n_rf = cells
                .iter()
                .filter(|&&(i, j)| rainfed.class(i, j) == 1)
                .count();
            assert!(n_gw >= 2, "{region}: {n_gw} irrigated cells");
            assert!(n_rf >= 2, "{region}: {n_rf} rainfed cells");
        }
    }

    #[test]
    fn write_to_emits_full_set() {
        let dir = tempfile::tempdir().unwrap();
        let s = SyntheticScenario::bundled(42).unwrap();
        let paths = s.write_to(dir.path()).unwrap();
        assert!(paths.iter().all(|p| p.exists()));
        let names: Vec<String> = paths
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().to_string())
            .collect();
        for required in [
            "precip.csv",
            "twsa.csv",
            "wells.csv",
            "ndvi_weekly.csv",
            "lulc.csv",
            "irrigation.csv",
            "regions.csv",
            "truth.json",
            "scenario.config",
        ] {
            assert!(names.contains(&required.to_string()), "missing {required}");
        }
        let truth: ScenarioTruth = crate::io::read_json(&dir.path().join("truth.json")).unwrap();
        assert_eq!(truth, s.truth);
    }
}
