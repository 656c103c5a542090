//! Run configuration: a flat `key = value` text file with command-line
//! overrides (flags win). Relative paths resolve against the config file's
//! directory, so a generated scenario directory is self-contained.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::grid::Weighting;
use crate::month::{MonthIndex, MonthRange};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // inputs
    pub precip: Option<PathBuf>,
    pub twsa: Option<PathBuf>,
    pub sws: Vec<PathBuf>,
    pub wells: Option<PathBuf>,
    pub ndvi_weekly: Option<PathBuf>,
    pub lulc: Option<PathBuf>,
    pub lulc_crop_class: i64,
    pub irrigation: Option<PathBuf>,
    pub regions: Option<PathBuf>,
    // parameters
    pub baseline: MonthRange,
    /// Climatology baseline for well anomalies; each station's own
    /// observation span when unset.
    pub well_baseline: Option<MonthRange>,
    pub k_max: usize,
    pub initial_window: usize,
    pub well_initial_window: usize,
    pub window_step: usize,
    pub alpha: f64,
    pub bootstrap_runs: usize,
    pub seed: u64,
    pub min_run: usize,
    pub ndvi_ks: Vec<usize>,
    pub periods: Vec<MonthRange>,
    pub early_range: MonthRange,
    pub late_range: MonthRange,
    pub gw_threshold: f64,
    pub rainfed_threshold: f64,
    pub weighting: Weighting,
    /// Minimum percent of a coarse cell that must be in the irrigated
    /// stratum for its aggregated vegetation value to count.
    pub coverage_gate: Option<f64>,
    pub per_cell: bool,
    pub out: PathBuf,
}

fn m(y: i32, mo: u8) -> MonthIndex {
    MonthIndex::new(y, mo).expect("valid month")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precip: None,
            twsa: None,
            sws: Vec::new(),
            wells: None,
            ndvi_weekly: None,
            lulc: None,
            lulc_crop_class: 1,
            irrigation: None,
            regions: None,
            baseline: MonthRange::new(m(2002, 1), m(2016, 12)).expect("valid range"),
            well_baseline: None,
            k_max: 180,
            initial_window: 60,
            well_initial_window: 40,
            window_step: 1,
            alpha: 0.05,
            bootstrap_runs: 1000,
            seed: 42,
            min_run: 3,
            ndvi_ks: vec![4, 12, 24],
            periods: vec![
                MonthRange::new(m(2002, 1), m(2016, 12)).expect("valid range"),
                MonthRange::new(m(2002, 1), m(2012, 12)).expect("valid range"),
            ],
            early_range: MonthRange::new(m(2002, 1), m(2004, 12)).expect("valid range"),
            late_range: MonthRange::new(m(2014, 1), m(2016, 12)).expect("valid range"),
            gw_threshold: 60.0,
            rainfed_threshold: 20.0,
            weighting: Weighting::CosLat,
            coverage_gate: None,
            per_cell: false,
            out: PathBuf::from("out"),
        }
    }
}

fn resolve(base: Option<&Path>, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    match (p.is_relative(), base) {
        (true, Some(dir)) => dir.join(p),
        _ => p,
    }
}

impl RunConfig {
    /// Defaults overlaid with a config file.
    pub fn from_file(path: &Path) -> Result<Self, Error> {
        let mut cfg = RunConfig::default();
        cfg.merge_file(path)?;
        Ok(cfg)
    }

    /// Applies every `key = value` line of a config file.
    pub fn merge_file(&mut self, path: &Path) -> Result<(), Error> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("{}: {e}", path.display()),
            ))
        })?;
        let base = path.parent().map(Path::to_path_buf);
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    idx + 1
                ))
            })?;
            self.set(key.trim(), value.trim(), base.as_deref())
                .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), idx + 1)))?;
        }
        Ok(())
    }

    /// Sets one key. `base` anchors relative paths.
    pub fn set(&mut self, key: &str, value: &str, base: Option<&Path>) -> Result<(), Error> {
        let parse_usize = |v: &str| -> Result<usize, Error> {
            v.parse()
                .map_err(|_| Error::Parse(format!("invalid integer `{v}`")))
        };
        let parse_f64 = |v: &str| -> Result<f64, Error> {
            v.parse()
                .map_err(|_| Error::Parse(format!("invalid number `{v}`")))
        };
        match key {
            "precip" => self.precip = Some(resolve(base, value)),
            "twsa" => self.twsa = Some(resolve(base, value)),
            "sws" => {
                self.sws = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| resolve(base, s))
                    .collect();
            }
            "wells" => self.wells = Some(resolve(base, value)),
            "ndvi_weekly" => self.ndvi_weekly = Some(resolve(base, value)),
            "lulc" => self.lulc = Some(resolve(base, value)),
            "lulc_crop_class" => {
                self.lulc_crop_class = value
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid class `{value}`")))?;
            }
            "irrigation" => self.irrigation = Some(resolve(base, value)),
            "regions" => self.regions = Some(resolve(base, value)),
            "baseline" => self.baseline = value.parse()?,
            "well_baseline" => self.well_baseline = Some(value.parse()?),
            "k_max" => self.k_max = parse_usize(value)?,
            "initial_window" => self.initial_window = parse_usize(value)?,
            "well_initial_window" => self.well_initial_window = parse_usize(value)?,
            "window_step" => self.window_step = parse_usize(value)?,
            "alpha" => self.alpha = parse_f64(value)?,
            "bootstrap_runs" => self.bootstrap_runs = parse_usize(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid seed `{value}`")))?;
            }
            "min_run" => self.min_run = parse_usize(value)?,
            "ndvi_ks" => {
                self.ndvi_ks = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(parse_usize)
                    .collect::<Result<_, _>>()?;
            }
            "periods" => {
                self.periods = value
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_, _>>()?;
            }
            "early_range" => self.early_range = value.parse()?,
            "late_range" => self.late_range = value.parse()?,
            "gw_threshold" => self.gw_threshold = parse_f64(value)?,
            "rainfed_threshold" => self.rainfed_threshold = parse_f64(value)?,
            "weighting" => {
                self.weighting = match value {
                    "coslat" => Weighting::CosLat,
                    "uniform" => Weighting::Uniform,
                    other => return Err(Error::Parse(format!("unknown weighting `{other}`"))),
                };
            }
            "coverage_gate" => {
                self.coverage_gate = if value.is_empty() {
                    None
                } else {
                    Some(parse_f64(value)?)
                };
            }
            "per_cell" => {
                self.per_cell = match value {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    other => return Err(Error::Parse(format!("invalid boolean `{other}`"))),
                };
            }
            "out" => self.out = resolve(base, value),
            other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Cross-field checks shared by every command.
    pub fn validate(&self) -> Result<(), Error> {
        if self.k_max < 1 {
            return Err(Error::Parse("k_max must be >= 1".into()));
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::Parse("alpha must be in (0, 1)".into()));
        }
        if self.initial_window < 3 || self.well_initial_window < 3 {
            return Err(Error::Parse("initial windows must be >= 3 samples".into()));
        }
        if self.window_step < 1 {
            return Err(Error::Parse("window_step must be >= 1".into()));
        }
        if self.min_run < 1 {
            return Err(Error::Parse("min_run must be >= 1".into()));
        }
        if self.bootstrap_runs < 1 {
            return Err(Error::Parse("bootstrap_runs must be >= 1".into()));
        }
        if self.ndvi_ks.is_empty() || self.ndvi_ks.iter().any(|k| *k < 1) {
            return Err(Error::Parse("ndvi_ks must list accumulations >= 1".into()));
        }
        if self.periods.is_empty() {
            return Err(Error::Parse(
                "at least one analysis period is required".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn file_overlays_and_resolves_paths() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.config");
        fs::write(
            &path,
            "# comment\n\
             precip = data/precip.csv\n\
             sws = a.csv, b.csv\n\
             seed = 7\n\
             alpha = 0.01\n\
             periods = 2002-01..2016-12;2002-01..2012-12\n\
             weighting = uniform\n",
        )
        .unwrap();
        let cfg = RunConfig::from_file(&path).unwrap();
        assert_eq!(cfg.precip, Some(dir.path().join("data/precip.csv")));
        assert_eq!(
            cfg.sws,
            vec![dir.path().join("a.csv"), dir.path().join("b.csv")]
        );
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.alpha, 0.01);
        assert_eq!(cfg.weighting, Weighting::Uniform);
        assert_eq!(cfg.k_max, 180); // default preserved
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("no_such_key", "1", None).is_err());
        assert!(cfg.set("alpha", "lots", None).is_err());
        assert!(cfg.set("baseline", "2002-13..2016-12", None).is_err());

        cfg.set("alpha", "2.0", None).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn flag_style_overrides_win() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("run.config");
        fs::write(&path, "seed = 1\nout = results\n").unwrap();
        let mut cfg = RunConfig::from_file(&path).unwrap();
        cfg.set("seed", "99", None).unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.out, dir.path().join("results"));
    }
}
