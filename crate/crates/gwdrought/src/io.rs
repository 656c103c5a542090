//! CSV and JSON readers/writers for every file format the toolkit consumes
//! or emits.
//!
//! All formats are plain UTF-8 CSV with a header row, or JSON. Missing
//! values are encoded as an empty field. Floats are written in shortest
//! round-trip form, so re-reading a file reproduces the exact values and
//! re-running a command reproduces the exact bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::anomaly::StationRecord;
use crate::error::Error;
use crate::grid::{CategoricalGrid, Grid2D, GriddedSeries, RegionMask};
use crate::month::{MonthIndex, TimeAxis};
use crate::optimal_period::CorrelationProfile;
use crate::series::MonthlySeries;
use crate::vegetation::{IrrigationFraction, WeeklyGrid};

/// Shortest round-trip rendering of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Missing becomes the empty field.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn parse_err(path: &Path, line: u64, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{}:{line}: {msg}", path.display()))
}

struct CsvTable {
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(path: &Path, expected_header: &[&str]) -> Result<CsvTable, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{}: {e}", path.display()),
            )),
            _ => parse_err(path, 1, e),
        })?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e))?
        .iter()
        .map(|s| s.to_string())
        .collect();
    if header != expected_header {
        return Err(parse_err(
            path,
            1,
            format!(
                "unexpected header `{}`, expected `{}`",
                header.join(","),
                expected_header.join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, 0, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != expected_header.len() {
            return Err(parse_err(
                path,
                line,
                format!(
                    "expected {} fields, found {}",
                    expected_header.len(),
                    record.len()
                ),
            ));
        }
        rows.push((line, record.iter().map(|s| s.to_string()).collect()));
    }
    Ok(CsvTable { rows })
}

fn field<T: std::str::FromStr>(path: &Path, line: u64, name: &str, raw: &str) -> Result<T, Error> {
    raw.parse()
        .map_err(|_| parse_err(path, line, format!("invalid {name} `{raw}`")))
}

fn opt_field(path: &Path, line: u64, name: &str, raw: &str) -> Result<Option<f64>, Error> {
    if raw.is_empty() {
        return Ok(None);
    }
    field(path, line, name, raw).map(Some)
}

fn month_field(
    path: &Path,
    line: u64,
    year_raw: &str,
    month_raw: &str,
) -> Result<MonthIndex, Error> {
    let year: i32 = field(path, line, "year", year_raw)?;
    let month: u8 = field(path, line, "month", month_raw)?;
    MonthIndex::new(year, month).map_err(|e| parse_err(path, line, e))
}

/// Origin, step, and count of a sorted coordinate axis; a single value gets
/// a nominal unit step.
fn infer_axis(path: &Path, name: &str, mut values: Vec<f64>) -> Result<(f64, f64, usize), Error> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    let n = values.len();
    if n == 0 {
        return Err(parse_err(path, 1, format!("no {name} values")));
    }
    if n == 1 {
        return Ok((values[0], 1.0, 1));
    }
    let step = values[1] - values[0];
    for w in values.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 {
            return Err(parse_err(
                path,
                1,
                format!("{name} values are not on a regular grid"),
            ));
        }
    }
    Ok((values[0], step, n))
}

fn grid_from_coords(path: &Path, lats: Vec<f64>, lons: Vec<f64>) -> Result<Grid2D, Error> {
    let (lat0, dlat, nlat) = infer_axis(path, "lat", lats)?;
    let (lon0, dlon, nlon) = infer_axis(path, "lon", lons)?;
    Grid2D::new(lat0, lon0, dlat, dlon, nlat, nlon).map_err(|e| parse_err(path, 1, e))
}

fn cell_index(
    path: &Path,
    line: u64,
    grid: &Grid2D,
    lat: f64,
    lon: f64,
) -> Result<(usize, usize), Error> {
    let fi = (lat - grid.lat0) / grid.dlat;
    let fj = (lon - grid.lon0) / grid.dlon;
    let i = fi.round();
    let j = fj.round();
    if (fi - i).abs() > 1e-6 || (fj - j).abs() > 1e-6 {
        return Err(parse_err(path, line, format!("({lat}, {lon}) is off-grid")));
    }
    Ok((i as usize, j as usize))
}

/// Reads a long-form gridded monthly CSV (`year,month,lat,lon,value`).
/// Grid geometry and the month axis are inferred from the rows and
/// validated to be regular; absent (month, cell) pairs are missing.
pub fn read_gridded_csv(path: &Path, units: &str) -> Result<GriddedSeries, Error> {
    let table = read_table(path, &["year", "month", "lat", "lon", "value"])?;
    if table.rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let mut lats = Vec::new();
    let mut lons = Vec::new();
    let mut months = Vec::new();
    let mut parsed = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let month = month_field(path, *line, &row[0], &row[1])?;
        let lat: f64 = field(path, *line, "lat", &row[2])?;
        let lon: f64 = field(path, *line, "lon", &row[3])?;
        let value = opt_field(path, *line, "value", &row[4])?;
        lats.push(lat);
        lons.push(lon);
        months.push(month);
        parsed.push((*line, month, lat, lon, value));
    }
    let grid = grid_from_coords(path, lats, lons)?;
    let start = *months.iter().min().expect("non-empty");
    let end = *months.iter().max().expect("non-empty");
    let axis = TimeAxis::new(
        start,
        (crate::month::months_between(start, end) + 1) as usize,
    )?;
    let mut out = GriddedSeries::missing(grid, axis, units);
    for (line, month, lat, lon, value) in parsed {
        let (i, j) = cell_index(path, line, &grid, lat, lon)?;
        let t = axis.index_of(month).expect("within inferred axis");
        out.set(t, i, j, value);
    }
    Ok(out)
}

pub fn write_gridded_csv(path: &Path, g: &GriddedSeries) -> Result<(), Error> {
    let grid = g.grid();
    let mut out = String::from("year,month,lat,lon,value\n");
    for (t, month) in g.axis().iter().enumerate() {
        for (i, j) in grid.cells() {
            let (lat, lon) = grid.center(i, j);
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                month.year(),
                month.month(),
                fmt_f64(lat),
                fmt_f64(lon),
                fmt_opt(g.get(t, i, j))
            );
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a region mask CSV (`lat,lon,region`); an empty region field marks
/// a cell outside every region.
pub fn read_region_mask_csv(path: &Path) -> Result<RegionMask, Error> {
    let table = read_table(path, &["lat", "lon", "region"])?;
    if table.rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let mut lats = Vec::new();
    let mut lons = Vec::new();
    let mut parsed = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let lat: f64 = field(path, *line, "lat", &row[0])?;
        let lon: f64 = field(path, *line, "lon", &row[1])?;
        lats.push(lat);
        lons.push(lon);
        parsed.push((*line, lat, lon, row[2].clone()));
    }
    let grid = grid_from_coords(path, lats, lons)?;
    let mut membership = vec![None; grid.ncells()];
    for (line, lat, lon, region) in parsed {
        let (i, j) = cell_index(path, line, &grid, lat, lon)?;
        if !region.is_empty() {
            membership[grid.flat(i, j)] = Some(region);
        }
    }
    RegionMask::new(grid, membership, None)
}

pub fn write_region_mask_csv(path: &Path, mask: &RegionMask) -> Result<(), Error> {
    let grid = mask.grid();
    let mut out = String::from("lat,lon,region\n");
    for (i, j) in grid.cells() {
        let (lat, lon) = grid.center(i, j);
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(lat),
            fmt_f64(lon),
            mask.region_of(i, j).unwrap_or("")
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a categorical grid CSV (`lat,lon,class`); every cell must appear.
pub fn read_categorical_csv(path: &Path) -> Result<CategoricalGrid, Error> {
    let table = read_table(path, &["lat", "lon", "class"])?;
    if table.rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let mut lats = Vec::new();
    let mut lons = Vec::new();
    let mut parsed = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let lat: f64 = field(path, *line, "lat", &row[0])?;
        let lon: f64 = field(path, *line, "lon", &row[1])?;
        let class: i64 = field(path, *line, "class", &row[2])?;
        lats.push(lat);
        lons.push(lon);
        parsed.push((*line, lat, lon, class));
    }
    let grid = grid_from_coords(path, lats, lons)?;
    let mut classes = vec![None; grid.ncells()];
    for (line, lat, lon, class) in parsed {
        let (i, j) = cell_index(path, line, &grid, lat, lon)?;
        classes[grid.flat(i, j)] = Some(class);
    }
    if let Some(missing) = classes.iter().position(|c| c.is_none()) {
        return Err(parse_err(
            path,
            1,
            format!("cell {missing} has no class row"),
        ));
    }
    CategoricalGrid::new(
        grid,
        classes.into_iter().map(|c| c.expect("checked")).collect(),
    )
}

pub fn write_categorical_csv(path: &Path, g: &CategoricalGrid) -> Result<(), Error> {
    let grid = g.grid();
    let mut out = String::from("lat,lon,class\n");
    for (i, j) in grid.cells() {
        let (lat, lon) = grid.center(i, j);
        let _ = writeln!(out, "{},{},{}", fmt_f64(lat), fmt_f64(lon), g.class(i, j));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads well observations
/// (`well_id,lat,lon,specific_yield,year,month,level_m_bgl`), one row per
/// observation, grouped into stations sorted by id.
pub fn read_stations_csv(path: &Path) -> Result<Vec<StationRecord>, Error> {
    let table = read_table(
        path,
        &[
            "well_id",
            "lat",
            "lon",
            "specific_yield",
            "year",
            "month",
            "level_m_bgl",
        ],
    )?;
    use std::collections::BTreeMap;
    type WellAccumulator = (f64, f64, f64, Vec<(MonthIndex, f64)>, u64);
    let mut wells: BTreeMap<String, WellAccumulator> = BTreeMap::new();
    for (line, row) in &table.rows {
        let id = row[0].clone();
        if id.is_empty() {
            return Err(parse_err(path, *line, "empty well_id"));
        }
        let lat: f64 = field(path, *line, "lat", &row[1])?;
        let lon: f64 = field(path, *line, "lon", &row[2])?;
        let sy: f64 = field(path, *line, "specific_yield", &row[3])?;
        let month = month_field(path, *line, &row[4], &row[5])?;
        let level: f64 = field(path, *line, "level_m_bgl", &row[6])?;
        let entry = wells.entry(id).or_insert((lat, lon, sy, Vec::new(), *line));
        if (entry.0 - lat).abs() > 1e-9
            || (entry.1 - lon).abs() > 1e-9
            || (entry.2 - sy).abs() > 1e-12
        {
            return Err(parse_err(path, *line, "well metadata differs between rows"));
        }
        entry.3.push((month, level));
    }
    let mut stations = Vec::with_capacity(wells.len());
    for (id, (lat, lon, sy, mut obs, first_line)) in wells {
        obs.sort_by_key(|(m, _)| *m);
        if obs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(parse_err(
                path,
                first_line,
                format!("well {id} has duplicate observation months"),
            ));
        }
        stations.push(
            StationRecord::new(id, lat, lon, sy, obs)
                .map_err(|e| parse_err(path, first_line, e))?,
        );
    }
    Ok(stations)
}

pub fn write_stations_csv(path: &Path, stations: &[StationRecord]) -> Result<(), Error> {
    let mut out = String::from("well_id,lat,lon,specific_yield,year,month,level_m_bgl\n");
    for st in stations {
        for (month, level) in &st.observations {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                st.id,
                fmt_f64(st.lat),
                fmt_f64(st.lon),
                fmt_f64(st.specific_yield),
                month.year(),
                month.month(),
                fmt_f64(*level)
            );
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a monthly series CSV with the given value-column header
/// (`year,month,<value_header>`); months absent from the file are missing.
pub fn read_series_csv(
    path: &Path,
    value_header: &str,
    units: &str,
) -> Result<MonthlySeries, Error> {
    let table = read_table(path, &["year", "month", value_header])?;
    if table.rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let mut parsed = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let month = month_field(path, *line, &row[0], &row[1])?;
        let value = opt_field(path, *line, value_header, &row[2])?;
        parsed.push((month, value));
    }
    let start = parsed.iter().map(|(m, _)| *m).min().expect("non-empty");
    let end = parsed.iter().map(|(m, _)| *m).max().expect("non-empty");
    let axis = TimeAxis::new(
        start,
        (crate::month::months_between(start, end) + 1) as usize,
    )?;
    let mut series = MonthlySeries::missing(axis, units);
    for (month, value) in parsed {
        let t = axis.index_of(month).expect("within axis");
        series.set(t, value);
    }
    Ok(series)
}

pub fn write_series_csv(path: &Path, s: &MonthlySeries, value_header: &str) -> Result<(), Error> {
    let mut out = format!("year,month,{value_header}\n");
    for (month, v) in s.iter() {
        let _ = writeln!(out, "{},{},{}", month.year(), month.month(), fmt_opt(v));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a weekly gridded CSV (`year,week,lat,lon,value`).
pub fn read_weekly_grid_csv(path: &Path) -> Result<WeeklyGrid, Error> {
    let table = read_table(path, &["year", "week", "lat", "lon", "value"])?;
    if table.rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let mut lats = Vec::new();
    let mut lons = Vec::new();
    let mut parsed = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let year: i32 = field(path, *line, "year", &row[0])?;
        let week: u32 = field(path, *line, "week", &row[1])?;
        if !(1..=53).contains(&week) {
            return Err(parse_err(
                path,
                *line,
                format!("week {week} outside 1..=53"),
            ));
        }
        let lat: f64 = field(path, *line, "lat", &row[2])?;
        let lon: f64 = field(path, *line, "lon", &row[3])?;
        let value = opt_field(path, *line, "value", &row[4])?;
        lats.push(lat);
        lons.push(lon);
        parsed.push((*line, year, week, lat, lon, value));
    }
    let grid = grid_from_coords(path, lats, lons)?;
    // 52 numbered weeks per year for sequencing; explicit week-53 rows fold
    // into week 52's slot (short year-end composite).
    let key = |y: i32, w: u32| -> i64 { y as i64 * 52 + (w.min(52) as i64 - 1) };
    let start_key = parsed
        .iter()
        .map(|&(_, y, w, ..)| key(y, w))
        .min()
        .expect("non-empty");
    let end_key = parsed
        .iter()
        .map(|&(_, y, w, ..)| key(y, w))
        .max()
        .expect("non-empty");
    let n_weeks = (end_key - start_key + 1) as usize;
    let start_year = start_key.div_euclid(52) as i32;
    let start_week = (start_key.rem_euclid(52) + 1) as u32;
    let mut out = WeeklyGrid::new(
        grid,
        start_year,
        start_week,
        n_weeks,
        vec![None; n_weeks * grid.ncells()],
    )?;
    for (line, year, week, lat, lon, value) in parsed {
        let (i, j) = cell_index(path, line, &grid, lat, lon)?;
        let w = (key(year, week) - start_key) as usize;
        if value.is_some() {
            out.set(w, i, j, value);
        }
    }
    Ok(out)
}

pub fn write_weekly_grid_csv(path: &Path, w: &WeeklyGrid) -> Result<(), Error> {
    let grid = w.grid();
    let mut out = String::from("year,week,lat,lon,value\n");
    for idx in 0..w.n_weeks() {
        let (year, week) = w.week_at(idx);
        for (i, j) in grid.cells() {
            let (lat, lon) = grid.center(i, j);
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                year,
                week,
                fmt_f64(lat),
                fmt_f64(lon),
                fmt_opt(w.get(idx, i, j))
            );
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads irrigated-area fractions
/// (`lat,lon,gw_fraction,total_equipped_fraction`), percent per cell.
pub fn read_irrigation_csv(path: &Path) -> Result<IrrigationFraction, Error> {
    let table = read_table(
        path,
        &["lat", "lon", "gw_fraction", "total_equipped_fraction"],
    )?;
    if table.rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let mut lats = Vec::new();
    let mut lons = Vec::new();
    let mut parsed = Vec::with_capacity(table.rows.len());
    for (line, row) in &table.rows {
        let lat: f64 = field(path, *line, "lat", &row[0])?;
        let lon: f64 = field(path, *line, "lon", &row[1])?;
        let gw = opt_field(path, *line, "gw_fraction", &row[2])?;
        let total = opt_field(path, *line, "total_equipped_fraction", &row[3])?;
        lats.push(lat);
        lons.push(lon);
        parsed.push((*line, lat, lon, gw, total));
    }
    let grid = grid_from_coords(path, lats, lons)?;
    let mut gw_fraction = vec![None; grid.ncells()];
    let mut total_equipped = vec![None; grid.ncells()];
    for (line, lat, lon, gw, total) in parsed {
        let (i, j) = cell_index(path, line, &grid, lat, lon)?;
        gw_fraction[grid.flat(i, j)] = gw;
        total_equipped[grid.flat(i, j)] = total;
    }
    IrrigationFraction::new(grid, gw_fraction, total_equipped)
}

pub fn write_irrigation_csv(path: &Path, f: &IrrigationFraction) -> Result<(), Error> {
    let grid = f.grid();
    let mut out = String::from("lat,lon,gw_fraction,total_equipped_fraction\n");
    for (i, j) in grid.cells() {
        let (lat, lon) = grid.center(i, j);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(lat),
            fmt_f64(lon),
            fmt_opt(f.gw_fraction(i, j)),
            fmt_opt(f.total_equipped(i, j))
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a correlation profile (`k,median_r,median_p,n_windows,r_sd`).
pub fn write_profile_csv(path: &Path, profile: &CorrelationProfile) -> Result<(), Error> {
    let mut out = String::from("k,median_r,median_p,n_windows,r_sd\n");
    for e in &profile.entries {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.k,
            fmt_f64(e.median_r),
            fmt_f64(e.median_p),
            e.n_windows,
            fmt_f64(e.r_spread)
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes drought catalogs
/// (`series_id,start,end,duration_inclusive,duration_exclusive,peak_departure_mm,peak_month,persistent`),
/// events in chronological order per catalog.
pub fn write_events_csv(
    path: &Path,
    catalogs: &[&crate::drought::DroughtCatalog],
) -> Result<(), Error> {
    let mut out = String::from(
        "series_id,start,end,duration_inclusive,duration_exclusive,peak_departure_mm,peak_month,persistent\n",
    );
    for catalog in catalogs {
        for e in &catalog.events {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                catalog.series_id,
                e.start,
                e.end,
                e.duration,
                e.duration_exclusive(),
                fmt_f64(e.peak_departure),
                e.peak_month,
                e.persistent
            );
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Serializes any value as pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.line() as u64, e))
}

/// SHA-256 of a file, lowercase hex.
pub fn sha256_hex(path: &Path) -> Result<String, Error> {
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::CounterRng;
    use tempfile::tempdir;

    fn month(y: i32, m: u8) -> MonthIndex {
        MonthIndex::new(y, m).unwrap()
    }

    #[test]
    fn gridded_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("g.csv");
        let grid = Grid2D::new(8.5, 68.5, 1.0, 1.0, 2, 3).unwrap();
        let axis = TimeAxis::new(month(2002, 1), 4).unwrap();
        let rng = CounterRng::new(1);
        let values = (0..24)
            .map(|i| {
                if i % 7 == 0 {
                    None
                } else {
                    Some(rng.normal(i) * 31.0)
                }
            })
            .collect();
        let g = GriddedSeries::new(grid, axis, values, "mm").unwrap();
        write_gridded_csv(&path, &g).unwrap();
        let back = read_gridded_csv(&path, "mm").unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn gridded_rejects_bad_header_and_values() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "year,month,latitude,lon,value\n2002,1,8.5,68.5,1\n").unwrap();
        let err = read_gridded_csv(&path, "mm").unwrap_err();
        assert!(err.to_string().contains("header"), "{err}");

        fs::write(&path, "year,month,lat,lon,value\n2002,1,8.5,68.5,oops\n").unwrap();
        let err = read_gridded_csv(&path, "mm").unwrap_err();
        assert!(err.to_string().contains(":2:"), "row number missing: {err}");

        fs::write(
            &path,
            "year,month,lat,lon,value\n2002,1,8.5,68.5,1\n2002,1,8.9,68.5,1\n2002,1,10.5,68.5,1\n",
        )
        .unwrap();
        let err = read_gridded_csv(&path, "mm").unwrap_err();
        assert!(err.to_string().contains("regular"), "{err}");
    }

    #[test]
    fn region_mask_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("regions.csv");
        let grid = Grid2D::new(8.5, 68.5, 1.0, 1.0, 2, 2).unwrap();
        let mask = RegionMask::new(
            grid,
            vec![
                Some("NWI".into()),
                Some("NWI".into()),
                None,
                Some("SI".into()),
            ],
            None,
        )
        .unwrap();
        write_region_mask_csv(&path, &mask).unwrap();
        let back = read_region_mask_csv(&path).unwrap();
        assert_eq!(back, mask);
        assert_eq!(back.regions(), vec!["NWI".to_string(), "SI".to_string()]);
    }

    #[test]
    fn stations_round_trip_and_grouping() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("wells.csv");
        let a = StationRecord::new(
            "W-A",
            10.5,
            70.5,
            0.12,
            vec![(month(2002, 1), 5.0), (month(2002, 5), 6.5)],
        )
        .unwrap();
        let b = StationRecord::new("W-B", 11.5, 70.5, 0.06, vec![(month(2002, 1), 9.0)]).unwrap();
        write_stations_csv(&path, &[a.clone(), b.clone()]).unwrap();
        let back = read_stations_csv(&path).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn stations_reject_inconsistent_metadata() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("wells.csv");
        fs::write(
            &path,
            "well_id,lat,lon,specific_yield,year,month,level_m_bgl\n\
             W,10.5,70.5,0.12,2002,1,5\n\
             W,10.5,70.5,0.13,2002,5,6\n",
        )
        .unwrap();
        assert!(read_stations_csv(&path).is_err());
    }

    #[test]
    fn series_round_trip_preserves_bits() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let axis = TimeAxis::new(month(2002, 1), 5).unwrap();
        let s = MonthlySeries::new(
            axis,
            vec![
                Some(0.1 + 0.2),
                None,
                Some(-1.0 / 3.0),
                Some(1e-17),
                Some(123456.789),
            ],
            "mm",
        )
        .unwrap();
        write_series_csv(&path, &s, "value").unwrap();
        let back = read_series_csv(&path, "value", "mm").unwrap();
        for (a, b) in s.values().iter().zip(back.values()) {
            match (a, b) {
                (Some(a), Some(b)) => assert_eq!(a.to_bits(), b.to_bits()),
                (None, None) => {}
                _ => panic!("missing pattern changed"),
            }
        }
    }

    #[test]
    fn weekly_grid_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let grid = Grid2D::new(8.25, 68.25, 0.5, 0.5, 2, 2).unwrap();
        let rng = CounterRng::new(2);
        let n = 60;
        let values = (0..n * 4)
            .map(|i| {
                if i % 11 == 0 {
                    None
                } else {
                    Some(rng.uniform(i as u64))
                }
            })
            .collect();
        let w = WeeklyGrid::new(grid, 2002, 5, n, values).unwrap();
        write_weekly_grid_csv(&path, &w).unwrap();
        let back = read_weekly_grid_csv(&path).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn irrigation_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("irr.csv");
        let grid = Grid2D::new(8.25, 68.25, 0.5, 0.5, 2, 3).unwrap();
        let f = IrrigationFraction::new(
            grid,
            vec![
                Some(80.0),
                Some(30.0),
                None,
                Some(12.0),
                Some(0.0),
                Some(100.0),
            ],
            vec![
                Some(90.0),
                Some(50.0),
                Some(5.0),
                Some(20.0),
                Some(1.0),
                Some(100.0),
            ],
        )
        .unwrap();
        write_irrigation_csv(&path, &f).unwrap();
        assert_eq!(read_irrigation_csv(&path).unwrap(), f);
    }

    #[test]
    fn json_round_trip_and_checksum_stability() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("x.json");
        let value = vec![(String::from("a"), 1.5f64), (String::from("b"), -2.25)];
        write_json(&path, &value).unwrap();
        let back: Vec<(String, f64)> = read_json(&path).unwrap();
        assert_eq!(back, value);
        let h1 = sha256_hex(&path).unwrap();
        write_json(&path, &value).unwrap();
        assert_eq!(h1, sha256_hex(&path).unwrap());
        assert_eq!(h1.len(), 64);
    }
}
