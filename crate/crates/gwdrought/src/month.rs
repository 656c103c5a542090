//! Calendar month arithmetic and monthly time axes.
//!
//! Every series in this crate is sampled on whole calendar months. A
//! [`MonthIndex`] is a (year, month) pair with exact integer arithmetic; a
//! [`TimeAxis`] is a run of consecutive months addressed by zero-based index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A calendar month, e.g. April 2012.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MonthIndex {
    year: i32,
    month: u8,
}

impl MonthIndex {
    /// Builds a month index, rejecting months outside 1..=12.
    pub fn new(year: i32, month: u8) -> Result<Self, Error> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidMonth { year, month });
        }
        Ok(Self { year, month })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    /// Calendar month in 1..=12.
    pub fn month(&self) -> u8 {
        self.month
    }

    /// Months since year zero, January. The bijection behind all arithmetic.
    fn ordinal(&self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(ord: i64) -> Self {
        let year = ord.div_euclid(12) as i32;
        let month = (ord.rem_euclid(12) + 1) as u8;
        Self { year, month }
    }

    /// The month `offset` months after (or before, if negative) this one.
    pub fn offset(&self, offset: i64) -> Self {
        Self::from_ordinal(self.ordinal() + offset)
    }

    pub fn next(&self) -> Self {
        self.offset(1)
    }
}

/// Signed whole-month difference `b - a`; `months_between(a, a) == 0`.
pub fn months_between(a: MonthIndex, b: MonthIndex) -> i64 {
    b.ordinal() - a.ordinal()
}

impl fmt::Display for MonthIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthIndex {
    type Err = Error;

    /// Parses the `YYYY-MM` key used by every file format in this crate.
    fn from_str(s: &str) -> Result<Self, Error> {
        let err = || Error::Parse(format!("invalid month `{s}`, expected YYYY-MM"));
        let (y, m) = s.split_once('-').ok_or_else(err)?;
        let year: i32 = y.trim().parse().map_err(|_| err())?;
        let month: u8 = m.trim().parse().map_err(|_| err())?;
        MonthIndex::new(year, month)
    }
}

/// An inclusive range of calendar months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthRange {
    pub start: MonthIndex,
    pub end: MonthIndex,
}

impl MonthRange {
    pub fn new(start: MonthIndex, end: MonthIndex) -> Result<Self, Error> {
        if end < start {
            return Err(Error::Parse(format!("empty month range {start}..{end}")));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, m: MonthIndex) -> bool {
        self.start <= m && m <= self.end
    }

    /// Number of months in the range, counting both endpoints.
    pub fn len(&self) -> usize {
        (months_between(self.start, self.end) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for MonthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for MonthRange {
    type Err = Error;

    /// Parses `YYYY-MM..YYYY-MM`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let (a, b) = s.split_once("..").ok_or_else(|| {
            Error::Parse(format!("invalid range `{s}`, expected YYYY-MM..YYYY-MM"))
        })?;
        MonthRange::new(a.trim().parse()?, b.trim().parse()?)
    }
}

/// A run of consecutive calendar months: index `i` maps to `start + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeAxis {
    start: MonthIndex,
    len: usize,
}

impl TimeAxis {
    pub fn new(start: MonthIndex, len: usize) -> Result<Self, Error> {
        if len == 0 {
            return Err(Error::Parse(
                "time axis must cover at least one month".into(),
            ));
        }
        Ok(Self { start, len })
    }

    /// Axis covering the inclusive range.
    pub fn from_range(range: MonthRange) -> Self {
        Self {
            start: range.start,
            len: range.len(),
        }
    }

    pub fn start(&self) -> MonthIndex {
        self.start
    }

    pub fn end(&self) -> MonthIndex {
        self.start.offset(self.len as i64 - 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn month_at(&self, index: usize) -> MonthIndex {
        debug_assert!(index < self.len);
        self.start.offset(index as i64)
    }

    /// Zero-based index of `m`, or `None` when `m` lies outside the axis.
    pub fn index_of(&self, m: MonthIndex) -> Option<usize> {
        let d = months_between(self.start, m);
        if d >= 0 && (d as usize) < self.len {
            Some(d as usize)
        } else {
            None
        }
    }

    pub fn contains(&self, m: MonthIndex) -> bool {
        self.index_of(m).is_some()
    }

    pub fn range(&self) -> MonthRange {
        MonthRange {
            start: self.start,
            end: self.end(),
        }
    }

    /// Iterates the axis months in order.
    pub fn iter(&self) -> impl Iterator<Item = MonthIndex> + '_ {
        (0..self.len).map(move |i| self.month_at(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(y: i32, mo: u8) -> MonthIndex {
        MonthIndex::new(y, mo).unwrap()
    }

    #[test]
    fn months_between_identity() {
        assert_eq!(months_between(m(2012, 4), m(2012, 4)), 0);
    }

    #[test]
    fn months_between_hand_enumeration() {
        // Independent count: walk month by month from 2012-04 to 2016-12.
        let mut cur = m(2012, 4);
        let target = m(2016, 12);
        let mut steps = 0;
        while cur != target {
            cur = cur.next();
            steps += 1;
        }
        assert_eq!(steps, 56);
        assert_eq!(months_between(m(2012, 4), m(2016, 12)), 56);
    }

    #[test]
    fn months_between_antisymmetry() {
        assert_eq!(months_between(m(2016, 12), m(2012, 4)), -56);
    }

    #[test]
    fn months_between_additive() {
        let triples = [
            (m(1996, 1), m(2002, 8), m(2016, 12)),
            (m(2002, 1), m(2001, 12), m(2003, 2)),
            (m(-1, 12), m(0, 1), m(1, 6)),
        ];
        for (a, b, c) in triples {
            assert_eq!(
                months_between(a, b) + months_between(b, c),
                months_between(a, c)
            );
        }
    }

    #[test]
    fn offset_round_trips_across_year_boundaries() {
        assert_eq!(m(2002, 1).offset(-1), m(2001, 12));
        assert_eq!(m(2002, 11).offset(3), m(2003, 2));
        assert_eq!(m(2002, 6).offset(-18), m(2000, 12));
    }

    #[test]
    fn invalid_month_rejected() {
        assert!(MonthIndex::new(2002, 0).is_err());
        assert!(MonthIndex::new(2002, 13).is_err());
    }

    #[test]
    fn axis_index_bijection() {
        let axis = TimeAxis::new(m(2002, 1), 180).unwrap();
        for i in 0..axis.len() {
            assert_eq!(axis.index_of(axis.month_at(i)), Some(i));
        }
        assert_eq!(axis.end(), m(2016, 12));
        assert_eq!(axis.index_of(m(2001, 12)), None);
        assert_eq!(axis.index_of(m(2017, 1)), None);
    }

    #[test]
    fn month_parse_and_display() {
        let parsed: MonthIndex = "2012-04".parse().unwrap();
        assert_eq!(parsed, m(2012, 4));
        assert_eq!(parsed.to_string(), "2012-04");
        assert!("2012-13".parse::<MonthIndex>().is_err());
        assert!("april".parse::<MonthIndex>().is_err());
    }

    #[test]
    fn range_parse_and_len() {
        let r: MonthRange = "2002-01..2016-12".parse().unwrap();
        assert_eq!(r.len(), 180);
        assert!(r.contains(m(2010, 7)));
        assert!(!r.contains(m(2017, 1)));
        assert!("2003-01..2002-01".parse::<MonthRange>().is_err());
    }
}
