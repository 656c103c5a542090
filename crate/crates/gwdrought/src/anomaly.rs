//! Anomaly construction: monthly climatology removal, standardization,
//! k-month accumulation, and groundwater storage anomalies from satellite
//! or well-level inputs.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{nearest_cell, Grid2D, GriddedSeries};
use crate::month::{MonthIndex, MonthRange, TimeAxis};
use crate::series::MonthlySeries;

/// Per-calendar-month mean values over a baseline period. An entry is
/// missing only when the baseline holds no sample for that calendar month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Climatology {
    means: [Option<f64>; 12],
    baseline: MonthRange,
}

impl Climatology {
    /// Mean for a calendar month in 1..=12.
    pub fn for_month(&self, month: u8) -> Option<f64> {
        self.means[(month - 1) as usize]
    }

    pub fn baseline(&self) -> MonthRange {
        self.baseline
    }

    pub fn means(&self) -> &[Option<f64>; 12] {
        &self.means
    }
}

/// Calendar-month means of `s` over the non-missing samples inside
/// `baseline`, which must lie within the series axis.
pub fn monthly_climatology(s: &MonthlySeries, baseline: MonthRange) -> Result<Climatology, Error> {
    let axis = s.axis();
    if !axis.contains(baseline.start) || !axis.contains(baseline.end) {
        return Err(Error::BaselineOutsideAxis {
            start: baseline.start,
            end: baseline.end,
        });
    }
    let mut sums = [0.0f64; 12];
    let mut counts = [0usize; 12];
    for (m, v) in s.iter() {
        if !baseline.contains(m) {
            continue;
        }
        if let Some(v) = v {
            let k = (m.month() - 1) as usize;
            sums[k] += v;
            counts[k] += 1;
        }
    }
    let mut means = [None; 12];
    for k in 0..12 {
        if counts[k] > 0 {
            means[k] = Some(sums[k] / counts[k] as f64);
        }
    }
    Ok(Climatology { means, baseline })
}

/// Subtracts the calendar-month mean from every value. Missing values stay
/// missing; a month whose climatology entry is missing also becomes missing.
pub fn remove_climatology(s: &MonthlySeries, c: &Climatology) -> MonthlySeries {
    let values = s
        .iter()
        .map(|(m, v)| match (v, c.for_month(m.month())) {
            (Some(v), Some(mean)) => Some(v - mean),
            _ => None,
        })
        .collect();
    MonthlySeries::new(s.axis(), values, s.units()).expect("axis length preserved")
}

/// Centers and scales to zero mean and unit sample (n-1) standard deviation,
/// computed over the non-missing values.
pub fn standardize(s: &MonthlySeries) -> Result<MonthlySeries, Error> {
    let present: Vec<f64> = s.values().iter().flatten().copied().collect();
    if present.len() < 2 {
        return Err(Error::TooShort {
            have: present.len(),
            need: 2,
        });
    }
    let n = present.len() as f64;
    let mean = present.iter().sum::<f64>() / n;
    let var = present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        return Err(Error::DegenerateSeries("zero variance"));
    }
    let sd = var.sqrt();
    Ok(s.map(|v| (v - mean) / sd).with_units("std"))
}

/// Backward-looking k-month sum: output at `t` is the sum of the window
/// `[t-k+1, t]`. The output is missing when the window reaches before the
/// start of the axis or contains any missing value; no partial sums.
pub fn accumulate(s: &MonthlySeries, k: usize) -> Result<MonthlySeries, Error> {
    let n = s.len();
    if k == 0 || k > n {
        return Err(Error::AccumulationOutOfRange { k, max: n });
    }
    let values = (0..n)
        .map(|t| {
            if t + 1 < k {
                return None;
            }
            let mut sum = 0.0;
            for v in &s.values()[t + 1 - k..=t] {
                sum += (*v)?;
            }
            Some(sum)
        })
        .collect();
    MonthlySeries::new(s.axis(), values, s.units())
}

/// Groundwater storage anomaly from a total-storage anomaly field minus the
/// ensemble mean of surface-storage fields (soil moisture + canopy + snow
/// from one or more land surface models).
///
/// All fields must share grid and axis. A cell-month is missing when the
/// total-storage value is missing or every ensemble member is missing; the
/// ensemble mean uses whichever members are present.
pub fn grace_gwsa(twsa: &GriddedSeries, sws: &[GriddedSeries]) -> Result<GriddedSeries, Error> {
    if sws.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one surface-storage field is required".into(),
        ));
    }
    for f in sws {
        if !f.grid().same_geometry(&twsa.grid()) {
            return Err(Error::GridMismatch);
        }
        if f.axis() != twsa.axis() {
            return Err(Error::AxisMismatch);
        }
    }
    let grid = twsa.grid();
    let axis = twsa.axis();
    let mut out = GriddedSeries::missing(grid, axis, "mm");
    for t in 0..axis.len() {
        for (i, j) in grid.cells() {
            let Some(total) = twsa.get(t, i, j) else {
                continue;
            };
            let mut sum = 0.0;
            let mut n = 0usize;
            for f in sws {
                if let Some(v) = f.get(t, i, j) {
                    sum += v;
                    n += 1;
                }
            }
            if n > 0 {
                out.set(t, i, j, Some(total - sum / n as f64));
            }
        }
    }
    Ok(out)
}

/// One observation well: location, aquifer specific yield, and dated
/// water-table depths in meters below ground level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationRecord {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub specific_yield: f64,
    /// (month, level in m bgl), strictly increasing in time.
    pub observations: Vec<(MonthIndex, f64)>,
}

impl StationRecord {
    pub fn new(
        id: impl Into<String>,
        lat: f64,
        lon: f64,
        specific_yield: f64,
        observations: Vec<(MonthIndex, f64)>,
    ) -> Result<Self, Error> {
        if !(specific_yield > 0.0 && specific_yield < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "specific yield must be in (0, 1), got {specific_yield}"
            )));
        }
        if observations.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter(
                "well observations must be strictly increasing in time".into(),
            ));
        }
        Ok(Self {
            id: id.into(),
            lat,
            lon,
            specific_yield,
            observations,
        })
    }
}

/// Groundwater storage anomaly of one well, in mm of water.
///
/// The level climatology is taken per observed calendar month over the
/// baseline; the anomaly sign is flipped because the level is a depth below
/// ground (a deeper water table means less storage):
/// `gwsa = -(level - climatology) * specific_yield * 1000`.
///
/// Output covers the full month span of the observations; unobserved months,
/// and months whose calendar month has no baseline observation, are missing.
pub fn well_gwsa(station: &StationRecord, baseline: MonthRange) -> Result<MonthlySeries, Error> {
    let Some(&(first, _)) = station.observations.first() else {
        return Err(Error::TooShort { have: 0, need: 1 });
    };
    let last = station.observations.last().expect("non-empty").0;
    let axis = TimeAxis::from_range(MonthRange::new(first, last)?);

    // Level climatology per observed calendar month.
    let mut sums = [0.0f64; 12];
    let mut counts = [0usize; 12];
    for &(m, level) in &station.observations {
        if baseline.contains(m) {
            let k = (m.month() - 1) as usize;
            sums[k] += level;
            counts[k] += 1;
        }
    }

    let mut out = MonthlySeries::missing(axis, "mm");
    for &(m, level) in &station.observations {
        let k = (m.month() - 1) as usize;
        if counts[k] == 0 {
            continue; // no baseline for this calendar month: leave missing
        }
        let anomaly_m = level - sums[k] / counts[k] as f64;
        let gwsa_mm = -anomaly_m * station.specific_yield * 1000.0;
        let idx = axis.index_of(m).expect("observation within axis");
        out.set(idx, Some(gwsa_mm));
    }
    Ok(out)
}

/// Grids well anomalies: each cell holds the unweighted mean of `well_gwsa`
/// over the stations that fall in it (by nearest cell center); cells with no
/// station stay missing. The axis spans the union of the stations'
/// observation ranges, so only observed months carry values.
pub fn well_field(
    stations: &[StationRecord],
    grid: &Grid2D,
    baseline: MonthRange,
) -> Result<GriddedSeries, Error> {
    if stations.is_empty() {
        return Err(Error::TooShort { have: 0, need: 1 });
    }
    let per_station: Vec<(usize, usize, MonthlySeries)> = stations
        .iter()
        .map(|st| {
            let (i, j) = nearest_cell(grid, st.lat, st.lon)?;
            Ok((i, j, well_gwsa(st, baseline)?))
        })
        .collect::<Result<_, Error>>()?;

    let start = per_station
        .iter()
        .map(|(_, _, s)| s.axis().start())
        .min()
        .expect("non-empty");
    let end = per_station
        .iter()
        .map(|(_, _, s)| s.axis().end())
        .max()
        .expect("non-empty");
    let axis = TimeAxis::from_range(MonthRange::new(start, end)?);

    let mut out = GriddedSeries::missing(*grid, axis, "mm");
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
                out.set(t, i, j, Some(vals.iter().sum::<f64>() / vals.len() as f64));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(y: i32, mo: u8) -> MonthIndex {
        MonthIndex::new(y, mo).unwrap()
    }

    fn series(start: (i32, u8), values: Vec<Option<f64>>) -> MonthlySeries {
        let axis = TimeAxis::new(m(start.0, start.1), values.len()).unwrap();
        MonthlySeries::new(axis, values, "mm").unwrap()
    }

    fn range(a: (i32, u8), b: (i32, u8)) -> MonthRange {
        MonthRange::new(m(a.0, a.1), m(b.0, b.1)).unwrap()
    }

    #[test]
    fn climatology_averages_per_calendar_month() {
        // 24 months starting Jan 2002; Jan values 5 and 7.
        let mut values: Vec<Option<f64>> = (0..24).map(|i| Some(i as f64)).collect();
        values[0] = Some(5.0);
        values[12] = Some(7.0);
        let s = series((2002, 1), values);
        let c = monthly_climatology(&s, range((2002, 1), (2003, 12))).unwrap();
        assert_eq!(c.for_month(1), Some(6.0));
    }

    #[test]
    fn climatology_of_constant_is_constant() {
        let s = series((2002, 1), vec![Some(3.5); 36]);
        let c = monthly_climatology(&s, range((2002, 1), (2004, 12))).unwrap();
        for month in 1..=12 {
            assert_eq!(c.for_month(month), Some(3.5));
        }
    }

    #[test]
    fn twelve_month_climatology_equals_series() {
        let values: Vec<Option<f64>> = (0..12).map(|i| Some(i as f64 * 2.0)).collect();
        let s = series((2002, 1), values.clone());
        let c = monthly_climatology(&s, range((2002, 1), (2002, 12))).unwrap();
        for (k, v) in values.iter().enumerate() {
            assert_eq!(c.for_month(k as u8 + 1), *v);
        }
    }

    #[test]
    fn climatology_baseline_outside_axis() {
        let s = series((2002, 1), vec![Some(1.0); 12]);
        assert!(monthly_climatology(&s, range((2001, 1), (2002, 12))).is_err());
    }

    #[test]
    fn remove_climatology_examples() {
        let mut values: Vec<Option<f64>> = vec![Some(0.0); 24];
        values[0] = Some(5.0);
        values[12] = Some(7.0);
        values[3] = None;
        let s = series((2002, 1), values);
        let c = monthly_climatology(&s, range((2002, 1), (2003, 12))).unwrap();
        let a = remove_climatology(&s, &c);
        assert_relative_eq!(a.get(0).unwrap(), -1.0);
        assert_relative_eq!(a.get(12).unwrap(), 1.0);
        assert_eq!(a.get(3), None);

        let constant = series((2002, 1), vec![Some(4.0); 24]);
        let c = monthly_climatology(&constant, range((2002, 1), (2003, 12))).unwrap();
        let a = remove_climatology(&constant, &c);
        assert!(a.values().iter().all(|v| v.unwrap().abs() < 1e-12));
    }

    #[test]
    fn anomalies_have_zero_climatology() {
        // remove_climatology then monthly_climatology over the same baseline
        // must return ~0 for every calendar month.
        let values: Vec<Option<f64>> = (0..60)
            .map(|i| Some((i as f64 * 0.7).sin() * 40.0 + i as f64))
            .collect();
        let s = series((2002, 1), values);
        let baseline = range((2002, 1), (2006, 12));
        let c = monthly_climatology(&s, baseline).unwrap();
        let a = remove_climatology(&s, &c);
        let c2 = monthly_climatology(&a, baseline).unwrap();
        for month in 1..=12 {
            assert!(c2.for_month(month).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn standardize_two_points() {
        let s = series((2002, 1), vec![Some(-1.0), Some(1.0)]);
        let z = standardize(&s).unwrap();
        let sqrt_half = 0.5f64.sqrt();
        assert_relative_eq!(z.get(0).unwrap(), -sqrt_half, epsilon = 1e-12);
        assert_relative_eq!(z.get(1).unwrap(), sqrt_half, epsilon = 1e-12);
    }

    #[test]
    fn standardize_idempotent_and_unit_moments() {
        let values: Vec<Option<f64>> = (0..50)
            .map(|i| {
                if i % 7 == 3 {
                    None
                } else {
                    Some((i as f64).cos() * 3.0 + 10.0)
                }
            })
            .collect();
        let s = series((2002, 1), values);
        let z1 = standardize(&s).unwrap();
        let z2 = standardize(&z1).unwrap();
        for (a, b) in z1.values().iter().zip(z2.values()) {
            match (a, b) {
                (Some(a), Some(b)) => assert_relative_eq!(a, b, epsilon = 1e-12),
                (None, None) => {}
                _ => panic!("missing pattern changed"),
            }
        }
        let present: Vec<f64> = z1.values().iter().flatten().copied().collect();
        let n = present.len() as f64;
        let mean = present.iter().sum::<f64>() / n;
        let sd = (present.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() < 1e-9);
        assert!((sd - 1.0).abs() < 1e-9);
    }

    #[test]
    fn standardize_rejects_constant() {
        let s = series((2002, 1), vec![Some(2.0); 10]);
        assert!(matches!(standardize(&s), Err(Error::DegenerateSeries(_))));
    }

    #[test]
    fn accumulate_identity_and_window() {
        let s = series(
            (2002, 1),
            vec![Some(10.0), Some(20.0), Some(30.0), Some(40.0)],
        );
        let k1 = accumulate(&s, 1).unwrap();
        assert_eq!(k1.values(), s.values());

        let k3 = accumulate(&s, 3).unwrap();
        assert_eq!(k3.values(), &[None, None, Some(60.0), Some(90.0)]);
    }

    #[test]
    fn accumulate_missing_window_is_missing() {
        let s = series(
            (2002, 1),
            vec![Some(1.0), None, Some(3.0), Some(4.0), Some(5.0)],
        );
        let k2 = accumulate(&s, 2).unwrap();
        assert_eq!(k2.values(), &[None, None, None, Some(7.0), Some(9.0)]);
    }

    #[test]
    fn accumulate_out_of_range() {
        let s = series((2002, 1), vec![Some(1.0); 4]);
        assert!(accumulate(&s, 0).is_err());
        assert!(accumulate(&s, 5).is_err());
    }

    fn grid_field(values: Vec<Option<f64>>, months: usize) -> GriddedSeries {
        let grid = Grid2D::new(10.5, 70.5, 1.0, 1.0, 1, 1).unwrap();
        let axis = TimeAxis::new(m(2002, 1), months).unwrap();
        GriddedSeries::new(grid, axis, values, "mm").unwrap()
    }

    #[test]
    fn grace_gwsa_subtracts_ensemble_mean() {
        let twsa = grid_field(vec![Some(100.0)], 1);
        let s1 = grid_field(vec![Some(20.0)], 1);
        let s2 = grid_field(vec![Some(40.0)], 1);
        let g = grace_gwsa(&twsa, &[s1, s2]).unwrap();
        assert_relative_eq!(g.get(0, 0, 0).unwrap(), 70.0);
    }

    #[test]
    fn grace_gwsa_zero_members_and_missing() {
        let twsa = grid_field(vec![Some(55.0), None], 2);
        let zero = grid_field(vec![Some(0.0), Some(0.0)], 2);
        let g = grace_gwsa(&twsa, std::slice::from_ref(&zero)).unwrap();
        assert_eq!(g.get(0, 0, 0), Some(55.0));
        assert_eq!(g.get(1, 0, 0), None);
        assert!(grace_gwsa(&twsa, &[]).is_err());
    }

    #[test]
    fn grace_gwsa_single_member_is_plain_subtraction() {
        let twsa = grid_field(vec![Some(12.5)], 1);
        let s1 = grid_field(vec![Some(2.5)], 1);
        let g = grace_gwsa(&twsa, &[s1]).unwrap();
        assert_relative_eq!(g.get(0, 0, 0).unwrap(), 10.0);
    }

    fn four_per_year_station(levels: &[(i32, u8, f64)]) -> StationRecord {
        let obs = levels
            .iter()
            .map(|&(y, mo, level)| (m(y, mo), level))
            .collect();
        StationRecord::new("W1", 10.5, 70.5, 0.12, obs).unwrap()
    }

    #[test]
    fn well_gwsa_sign_and_units() {
        // Two years of Jan/May/Aug/Nov observations; second-year Jan is 1 m
        // deeper than the Jan climatology of the baseline year.
        let st = four_per_year_station(&[
            (2002, 1, 5.0),
            (2002, 5, 6.0),
            (2002, 8, 4.0),
            (2002, 11, 5.5),
            (2003, 1, 6.0),
        ]);
        let baseline = range((2002, 1), (2002, 12));
        let g = well_gwsa(&st, baseline).unwrap();
        // 2002 months equal their own climatology -> anomaly 0
        assert_relative_eq!(g.at(m(2002, 1)).unwrap(), 0.0);
        // +1 m deeper at Sy=0.12 -> -120 mm
        assert_relative_eq!(g.at(m(2003, 1)).unwrap(), -120.0);
        // unobserved month missing
        assert_eq!(g.at(m(2002, 2)), None);
    }

    #[test]
    fn well_gwsa_shallower_level_gains_storage() {
        let st = StationRecord::new(
            "W2",
            10.5,
            70.5,
            0.10,
            vec![(m(2002, 1), 5.0), (m(2003, 1), 4.5)],
        )
        .unwrap();
        let g = well_gwsa(&st, range((2002, 1), (2002, 12))).unwrap();
        assert_relative_eq!(g.at(m(2003, 1)).unwrap(), 50.0);
    }

    #[test]
    fn well_gwsa_depth_increase_decreases_storage() {
        // Monotonicity: deeper water table => strictly smaller anomaly.
        let mut last = f64::INFINITY;
        for depth in [4.0, 4.5, 5.0, 6.25, 9.0] {
            let st = StationRecord::new(
                "W3",
                10.5,
                70.5,
                0.2,
                vec![(m(2002, 1), 5.0), (m(2003, 1), depth)],
            )
            .unwrap();
            let g = well_gwsa(&st, range((2002, 1), (2002, 12))).unwrap();
            let v = g.at(m(2003, 1)).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn well_field_averages_cohabiting_stations() {
        let grid = Grid2D::new(10.5, 70.5, 1.0, 1.0, 2, 2).unwrap();
        let baseline = range((2002, 1), (2002, 12));
        let a = StationRecord::new(
            "A",
            10.5,
            70.5,
            0.10,
            vec![(m(2002, 1), 5.0), (m(2003, 1), 4.9)],
        )
        .unwrap();
        let b = StationRecord::new(
            "B",
            10.6,
            70.4,
            0.10,
            vec![(m(2002, 1), 7.0), (m(2003, 1), 7.1)],
        )
        .unwrap();
        let field = well_field(&[a, b], &grid, baseline).unwrap();
        // anomalies +10 mm and -10 mm average to 0 in cell (0,0)
        let t = field.axis().index_of(m(2003, 1)).unwrap();
        assert_relative_eq!(field.get(t, 0, 0).unwrap(), 0.0);
        assert_eq!(field.get(t, 1, 1), None);
    }

    #[test]
    fn station_validation() {
        assert!(StationRecord::new("X", 0.0, 0.0, 0.0, vec![]).is_err());
        assert!(StationRecord::new("X", 0.0, 0.0, 1.0, vec![]).is_err());
        assert!(StationRecord::new(
            "X",
            0.0,
            0.0,
            0.1,
            vec![(m(2002, 5), 1.0), (m(2002, 1), 1.0)]
        )
        .is_err());
    }
}
