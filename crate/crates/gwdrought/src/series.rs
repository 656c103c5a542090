//! Monthly series: one variable on a monthly time axis, with missing markers.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::month::{MonthIndex, MonthRange, TimeAxis};

/// One variable sampled on consecutive calendar months. `None` marks a
/// missing month and is never conflated with zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlySeries {
    axis: TimeAxis,
    values: Vec<Option<f64>>,
    units: String,
}

impl MonthlySeries {
    pub fn new(
        axis: TimeAxis,
        values: Vec<Option<f64>>,
        units: impl Into<String>,
    ) -> Result<Self, Error> {
        if values.len() != axis.len() {
            return Err(Error::Parse(format!(
                "series has {} values but axis covers {} months",
                values.len(),
                axis.len()
            )));
        }
        Ok(Self {
            axis,
            values,
            units: units.into(),
        })
    }

    /// All-missing series on `axis`.
    pub fn missing(axis: TimeAxis, units: impl Into<String>) -> Self {
        Self {
            axis,
            values: vec![None; axis.len()],
            units: units.into(),
        }
    }

    pub fn axis(&self) -> TimeAxis {
        self.axis
    }

    pub fn units(&self) -> &str {
        &self.units
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

    pub fn get(&self, index: usize) -> Option<f64> {
        self.values.get(index).copied().flatten()
    }

    /// Value at a calendar month; `None` when outside the axis or missing.
    pub fn at(&self, m: MonthIndex) -> Option<f64> {
        self.axis.index_of(m).and_then(|i| self.values[i])
    }

    pub fn set(&mut self, index: usize, value: Option<f64>) {
        self.values[index] = value;
    }

    pub fn month_at(&self, index: usize) -> MonthIndex {
        self.axis.month_at(index)
    }

    /// (month, value) pairs over the whole axis.
    pub fn iter(&self) -> impl Iterator<Item = (MonthIndex, Option<f64>)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.axis.month_at(i), *v))
    }

    pub fn count_present(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Restricts the series to an inclusive month range, which must lie
    /// within the axis.
    pub fn window(&self, range: MonthRange) -> Result<MonthlySeries, Error> {
        let (Some(a), Some(b)) = (
            self.axis.index_of(range.start),
            self.axis.index_of(range.end),
        ) else {
            return Err(Error::BaselineOutsideAxis {
                start: range.start,
                end: range.end,
            });
        };
        Ok(MonthlySeries {
            axis: TimeAxis::new(range.start, b - a + 1).expect("non-empty window"),
            values: self.values[a..=b].to_vec(),
            units: self.units.clone(),
        })
    }

    /// Re-samples onto `target`: months outside this series' axis are missing.
    pub fn align_to(&self, target: TimeAxis) -> MonthlySeries {
        let values = target.iter().map(|m| self.at(m)).collect();
        MonthlySeries {
            axis: target,
            values,
            units: self.units.clone(),
        }
    }

    /// Mean over the non-missing values inside `range`; `None` when the range
    /// holds no data.
    pub fn mean_over(&self, range: MonthRange) -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for m in TimeAxis::from_range(range).iter() {
            if let Some(v) = self.at(m) {
                sum += v;
                n += 1;
            }
        }
        if n == 0 {
            None
        } else {
            Some(sum / n as f64)
        }
    }

    /// Applies `f` to every present value, leaving missing months missing.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> MonthlySeries {
        MonthlySeries {
            axis: self.axis,
            values: self.values.iter().map(|v| v.map(&f)).collect(),
            units: self.units.clone(),
        }
    }

    pub fn with_units(mut self, units: impl Into<String>) -> MonthlySeries {
        self.units = units.into();
        self
    }
}

/// Chronological (x, y) pairs where both series are present, after aligning
/// `other` onto `self`'s axis month by month.
pub fn pairwise_complete(x: &MonthlySeries, y: &MonthlySeries) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (m, xv) in x.iter() {
        if let (Some(a), Some(b)) = (xv, y.at(m)) {
            xs.push(a);
            ys.push(b);
        }
    }
    (xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(y: i32, mo: u8) -> MonthIndex {
        MonthIndex::new(y, mo).unwrap()
    }

    fn series(start: (i32, u8), values: &[Option<f64>]) -> MonthlySeries {
        let axis = TimeAxis::new(m(start.0, start.1), values.len()).unwrap();
        MonthlySeries::new(axis, values.to_vec(), "mm").unwrap()
    }

    #[test]
    fn length_mismatch_rejected() {
        let axis = TimeAxis::new(m(2002, 1), 3).unwrap();
        assert!(MonthlySeries::new(axis, vec![Some(1.0)], "mm").is_err());
    }

    #[test]
    fn window_and_at() {
        let s = series((2002, 1), &[Some(1.0), None, Some(3.0), Some(4.0)]);
        assert_eq!(s.at(m(2002, 3)), Some(3.0));
        assert_eq!(s.at(m(2002, 2)), None);
        assert_eq!(s.at(m(2001, 12)), None);

        let w = s
            .window(MonthRange::new(m(2002, 2), m(2002, 4)).unwrap())
            .unwrap();
        assert_eq!(w.values(), &[None, Some(3.0), Some(4.0)]);
        assert_eq!(w.axis().start(), m(2002, 2));

        assert!(s
            .window(MonthRange::new(m(2001, 12), m(2002, 2)).unwrap())
            .is_err());
    }

    #[test]
    fn align_pads_with_missing() {
        let s = series((2002, 3), &[Some(1.0), Some(2.0)]);
        let target = TimeAxis::new(m(2002, 1), 6).unwrap();
        let a = s.align_to(target);
        assert_eq!(a.values(), &[None, None, Some(1.0), Some(2.0), None, None]);
    }

    #[test]
    fn pairwise_complete_drops_either_missing() {
        let x = series((2002, 1), &[Some(1.0), None, Some(3.0), Some(4.0)]);
        let y = series((2002, 1), &[Some(10.0), Some(20.0), None, Some(40.0)]);
        let (xs, ys) = pairwise_complete(&x, &y);
        assert_eq!(xs, vec![1.0, 4.0]);
        assert_eq!(ys, vec![10.0, 40.0]);
    }

    #[test]
    fn mean_over_skips_missing() {
        let s = series((2002, 1), &[Some(2.0), None, Some(4.0)]);
        let r = MonthRange::new(m(2002, 1), m(2002, 3)).unwrap();
        assert_eq!(s.mean_over(r), Some(3.0));
        let gap = series((2002, 1), &[None, None]);
        assert_eq!(
            gap.mean_over(MonthRange::new(m(2002, 1), m(2002, 2)).unwrap()),
            None
        );
    }
}
