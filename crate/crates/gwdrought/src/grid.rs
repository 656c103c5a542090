//! Regular lat/lon grids, gridded monthly series, region masks, and the
//! spatial aggregation primitives built on them.
//!
//! Grids are cell-centered: cell (i, j) has its center at
//! `(lat0 + i*dlat, lon0 + j*dlon)`. All distances are planar in degree
//! space, which is the convention of the coarse gridded products this
//! toolkit consumes; swap in a great-circle metric upstream if needed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::month::TimeAxis;
use crate::series::MonthlySeries;

/// Geometry tolerance when comparing grids inferred from text files.
const GEOM_EPS: f64 = 1e-9;

/// A regular cell-centered latitude/longitude grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub lat0: f64,
    pub lon0: f64,
    pub dlat: f64,
    pub dlon: f64,
    pub nlat: usize,
    pub nlon: usize,
}

impl Grid2D {
    pub fn new(
        lat0: f64,
        lon0: f64,
        dlat: f64,
        dlon: f64,
        nlat: usize,
        nlon: usize,
    ) -> Result<Self, Error> {
        if dlat <= 0.0 || dlon <= 0.0 {
            return Err(Error::InvalidParameter(
                "grid spacing must be positive".into(),
            ));
        }
        if nlat == 0 || nlon == 0 {
            return Err(Error::InvalidParameter(
                "grid must have at least one cell".into(),
            ));
        }
        Ok(Self {
            lat0,
            lon0,
            dlat,
            dlon,
            nlat,
            nlon,
        })
    }

    pub fn ncells(&self) -> usize {
        self.nlat * self.nlon
    }

    /// Cell-center coordinates of cell (i, j).
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.lat0 + i as f64 * self.dlat,
            self.lon0 + j as f64 * self.dlon,
        )
    }

    pub fn flat(&self, i: usize, j: usize) -> usize {
        i * self.nlon + j
    }

    /// Geometry equality up to text round-trip noise.
    pub fn same_geometry(&self, other: &Grid2D) -> bool {
        self.nlat == other.nlat
            && self.nlon == other.nlon
            && (self.lat0 - other.lat0).abs() < GEOM_EPS
            && (self.lon0 - other.lon0).abs() < GEOM_EPS
            && (self.dlat - other.dlat).abs() < GEOM_EPS
            && (self.dlon - other.dlon).abs() < GEOM_EPS
    }

    /// Iterates (i, j) in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let nlon = self.nlon;
        (0..self.nlat).flat_map(move |i| (0..nlon).map(move |j| (i, j)))
    }
}

/// A stack of monthly fields on a regular grid. Values are stored
/// time-major: `(t, i, j)` flattens to `(t*nlat + i)*nlon + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GriddedSeries {
    grid: Grid2D,
    axis: TimeAxis,
    values: Vec<Option<f64>>,
    units: String,
}

impl GriddedSeries {
    pub fn new(
        grid: Grid2D,
        axis: TimeAxis,
        values: Vec<Option<f64>>,
        units: impl Into<String>,
    ) -> Result<Self, Error> {
        if values.len() != axis.len() * grid.ncells() {
            return Err(Error::Parse(format!(
                "gridded series has {} values, expected {} months x {} cells",
                values.len(),
                axis.len(),
                grid.ncells()
            )));
        }
        Ok(Self {
            grid,
            axis,
            values,
            units: units.into(),
        })
    }

    /// All-missing field.
    pub fn missing(grid: Grid2D, axis: TimeAxis, units: impl Into<String>) -> Self {
        Self {
            grid,
            axis,
            values: vec![None; axis.len() * grid.ncells()],
            units: units.into(),
        }
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn axis(&self) -> TimeAxis {
        self.axis
    }

    pub fn units(&self) -> &str {
        &self.units
    }

    fn idx(&self, t: usize, i: usize, j: usize) -> usize {
        (t * self.grid.nlat + i) * self.grid.nlon + j
    }

    pub fn get(&self, t: usize, i: usize, j: usize) -> Option<f64> {
        self.values[self.idx(t, i, j)]
    }

    pub fn set(&mut self, t: usize, i: usize, j: usize, value: Option<f64>) {
        let k = self.idx(t, i, j);
        self.values[k] = value;
    }

    /// The full time series of one cell.
    pub fn cell_series(&self, i: usize, j: usize) -> MonthlySeries {
        let values = (0..self.axis.len()).map(|t| self.get(t, i, j)).collect();
        MonthlySeries::new(self.axis, values, self.units.clone()).expect("axis length matches")
    }

    pub fn set_cell_series(&mut self, i: usize, j: usize, series: &MonthlySeries) {
        debug_assert_eq!(series.axis(), self.axis);
        for t in 0..self.axis.len() {
            self.set(t, i, j, series.get(t));
        }
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    /// Applies `f` to every present value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GriddedSeries {
        GriddedSeries {
            grid: self.grid,
            axis: self.axis,
            values: self.values.iter().map(|v| v.map(&f)).collect(),
            units: self.units.clone(),
        }
    }
}

/// Assignment of grid cells to named regions, with optional area weights.
/// Cells outside every region carry `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMask {
    grid: Grid2D,
    membership: Vec<Option<String>>,
    weights: Option<Vec<f64>>,
}

impl RegionMask {
    pub fn new(
        grid: Grid2D,
        membership: Vec<Option<String>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self, Error> {
        if membership.len() != grid.ncells() {
            return Err(Error::Parse("region mask does not cover the grid".into()));
        }
        if let Some(w) = &weights {
            if w.len() != grid.ncells() {
                return Err(Error::Parse("region weights do not cover the grid".into()));
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter(
                    "region weights must be >= 0".into(),
                ));
            }
        }
        Ok(Self {
            grid,
            membership,
            weights,
        })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn region_of(&self, i: usize, j: usize) -> Option<&str> {
        self.membership[self.grid.flat(i, j)].as_deref()
    }

    pub fn explicit_weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Region labels present in the mask, sorted.
    pub fn regions(&self) -> Vec<String> {
        let mut set = BTreeMap::new();
        for r in self.membership.iter().flatten() {
            set.insert(r.clone(), ());
        }
        set.into_keys().collect()
    }

    /// Cells belonging to `region`, row-major order.
    pub fn member_cells(&self, region: &str) -> Vec<(usize, usize)> {
        self.grid
            .cells()
            .filter(|&(i, j)| self.region_of(i, j) == Some(region))
            .collect()
    }
}

/// How member cells are weighted when a [`RegionMask`] carries no explicit
/// weights. Explicit mask weights always take precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Weighting {
    /// cos(latitude of cell center), the usual area proxy on lat/lon grids.
    #[default]
    CosLat,
    /// Plain unweighted mean.
    Uniform,
}

/// Per-cell integer class labels on a regular grid (land use, strata, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalGrid {
    grid: Grid2D,
    classes: Vec<i64>,
}

impl CategoricalGrid {
    pub fn new(grid: Grid2D, classes: Vec<i64>) -> Result<Self, Error> {
        if classes.len() != grid.ncells() {
            return Err(Error::Parse("class grid does not cover the grid".into()));
        }
        Ok(Self { grid, classes })
    }

    pub fn grid(&self) -> Grid2D {
        self.grid
    }

    pub fn class(&self, i: usize, j: usize) -> i64 {
        self.classes[self.grid.flat(i, j)]
    }

    pub fn classes(&self) -> &[i64] {
        &self.classes
    }
}

/// Effective weight of cell (i, j) under `mask` + `weighting`.
fn cell_weight(mask: &RegionMask, weighting: Weighting, i: usize, j: usize) -> f64 {
    if let Some(w) = mask.explicit_weights() {
        return w[mask.grid().flat(i, j)];
    }
    match weighting {
        Weighting::CosLat => {
            let (lat, _) = mask.grid().center(i, j);
            lat.to_radians().cos().max(0.0)
        }
        Weighting::Uniform => 1.0,
    }
}

/// Area-weighted regional mean series of a gridded field.
///
/// Per month the mean runs over the region's non-missing cells; a month where
/// every member cell is missing stays missing. Missing values are never
/// imputed here.
pub fn regional_mean(
    field: &GriddedSeries,
    mask: &RegionMask,
    region: &str,
    weighting: Weighting,
) -> Result<MonthlySeries, Error> {
    if !field.grid().same_geometry(&mask.grid()) {
        return Err(Error::GridMismatch);
    }
    let members = mask.member_cells(region);
    if members.is_empty() {
        return Err(Error::UnknownRegion(region.to_string()));
    }
    let weights: Vec<f64> = members
        .iter()
        .map(|&(i, j)| cell_weight(mask, weighting, i, j))
        .collect();

    let axis = field.axis();
    let mut values = Vec::with_capacity(axis.len());
    for t in 0..axis.len() {
        let mut num = 0.0;
        let mut den = 0.0;
        for (&(i, j), &w) in members.iter().zip(&weights) {
            if let Some(v) = field.get(t, i, j) {
                num += w * v;
                den += w;
            }
        }
        values.push(if den > 0.0 { Some(num / den) } else { None });
    }
    MonthlySeries::new(axis, values, field.units())
}

/// Index of the grid cell whose center is closest (planar, in degrees) to
/// the point. Ties break toward the lower index, latitude first.
///
/// The point must fall inside the grid's bounding box extended by half a
/// cell on every side.
pub fn nearest_cell(grid: &Grid2D, lat: f64, lon: f64) -> Result<(usize, usize), Error> {
    let nearest_axis = |x: f64, x0: f64, dx: f64, n: usize| -> Option<usize> {
        let frac = (x - x0) / dx;
        if frac < -0.5 || frac > (n - 1) as f64 + 0.5 {
            return None;
        }
        let lo = frac.floor().clamp(0.0, (n - 1) as f64) as usize;
        let hi = (lo + 1).min(n - 1);
        let d_lo = (x - (x0 + lo as f64 * dx)).abs();
        let d_hi = (x - (x0 + hi as f64 * dx)).abs();
        // <= prefers the lower index on exact midpoints
        Some(if d_lo <= d_hi { lo } else { hi })
    };

    let i = nearest_axis(lat, grid.lat0, grid.dlat, grid.nlat);
    let j = nearest_axis(lon, grid.lon0, grid.dlon, grid.nlon);
    match (i, j) {
        (Some(i), Some(j)) => Ok((i, j)),
        _ => Err(Error::OutsideGrid { lat, lon }),
    }
}

/// Checks that `coarse` cells tile whole `fine` cells and returns the
/// (lat, lon) refinement ratios.
fn refinement_ratio(fine: &Grid2D, coarse: &Grid2D) -> Result<(usize, usize), Error> {
    let ratio = |d_coarse: f64, d_fine: f64| -> Option<usize> {
        let r = d_coarse / d_fine;
        let k = r.round();
        if k >= 1.0 && (r - k).abs() < 1e-6 {
            Some(k as usize)
        } else {
            None
        }
    };
    let (Some(rlat), Some(rlon)) = (ratio(coarse.dlat, fine.dlat), ratio(coarse.dlon, fine.dlon))
    else {
        return Err(Error::NonIntegerRefinement);
    };
    if fine.nlat != coarse.nlat * rlat || fine.nlon != coarse.nlon * rlon {
        return Err(Error::NonIntegerRefinement);
    }
    // Coarse cell 0 must cover exactly fine cells 0..r: its lower edge has to
    // sit half a fine cell below the first fine center.
    let lat_edge = coarse.lat0 - coarse.dlat / 2.0;
    let lon_edge = coarse.lon0 - coarse.dlon / 2.0;
    if (fine.lat0 - fine.dlat / 2.0 - lat_edge).abs() > 1e-6 * fine.dlat
        || (fine.lon0 - fine.dlon / 2.0 - lon_edge).abs() > 1e-6 * fine.dlon
    {
        return Err(Error::NonIntegerRefinement);
    }
    Ok((rlat, rlon))
}

/// Aggregates a categorical grid onto a coarser grid by modal (majority)
/// class; ties break toward the smallest class label.
pub fn majority_resample(
    fine: &CategoricalGrid,
    coarse: &Grid2D,
) -> Result<CategoricalGrid, Error> {
    let fg = fine.grid();
    let (rlat, rlon) = refinement_ratio(&fg, coarse)?;
    let mut classes = Vec::with_capacity(coarse.ncells());
    for ci in 0..coarse.nlat {
        for cj in 0..coarse.nlon {
            let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
            for fi in ci * rlat..(ci + 1) * rlat {
                for fj in cj * rlon..(cj + 1) * rlon {
                    *counts.entry(fine.class(fi, fj)).or_insert(0) += 1;
                }
            }
            // BTreeMap iterates labels ascending, so > keeps the smallest on ties.
            let mut best = (i64::MIN, 0usize);
            for (label, count) in counts {
                if count > best.1 {
                    best = (label, count);
                }
            }
            classes.push(best.0);
        }
    }
    CategoricalGrid::new(*coarse, classes)
}

/// Aggregates a fine gridded series onto a coarser grid by block mean.
///
/// When a mask is supplied, only fine cells whose class equals `keep_class`
/// contribute; a coarse cell with no contributing fine cell is missing.
pub fn block_mean_resample(
    fine: &GriddedSeries,
    coarse: &Grid2D,
    mask: Option<(&CategoricalGrid, i64)>,
) -> Result<GriddedSeries, Error> {
    let fg = fine.grid();
    let (rlat, rlon) = refinement_ratio(&fg, coarse)?;
    if let Some((m, _)) = mask {
        if !m.grid().same_geometry(&fg) {
            return Err(Error::GridMismatch);
        }
    }
    let axis = fine.axis();
    let mut out = GriddedSeries::missing(*coarse, axis, fine.units());
    for ci in 0..coarse.nlat {
        for cj in 0..coarse.nlon {
            for t in 0..axis.len() {
                let mut sum = 0.0;
                let mut n = 0usize;
                for fi in ci * rlat..(ci + 1) * rlat {
                    for fj in cj * rlon..(cj + 1) * rlon {
                        if let Some((m, keep)) = mask {
                            if m.class(fi, fj) != keep {
                                continue;
                            }
                        }
                        if let Some(v) = fine.get(t, fi, fj) {
                            sum += v;
                            n += 1;
                        }
                    }
                }
                if n > 0 {
                    out.set(t, ci, cj, Some(sum / n as f64));
                }
            }
        }
    }
    Ok(out)
}

/// Projects a coarse region mask down onto a finer grid: every fine cell
/// inherits the region (and weight) of the coarse cell that contains it.
pub fn refine_region_mask(mask: &RegionMask, fine: &Grid2D) -> Result<RegionMask, Error> {
    let coarse = mask.grid();
    let (rlat, rlon) = refinement_ratio(fine, &coarse)?;
    let mut membership = Vec::with_capacity(fine.ncells());
    let mut weights = mask
        .explicit_weights()
        .map(|_| Vec::with_capacity(fine.ncells()));
    for fi in 0..fine.nlat {
        for fj in 0..fine.nlon {
            let (ci, cj) = (fi / rlat, fj / rlon);
            membership.push(mask.region_of(ci, cj).map(str::to_string));
            if let (Some(out), Some(w)) = (&mut weights, mask.explicit_weights()) {
                out.push(w[coarse.flat(ci, cj)]);
            }
        }
    }
    RegionMask::new(*fine, membership, weights)
}

/// Fraction of the fine cells under each coarse cell that carry `keep_class`.
/// Used to gate coarse aggregates on stratum coverage.
pub fn class_coverage(
    mask: &CategoricalGrid,
    coarse: &Grid2D,
    keep_class: i64,
) -> Result<Vec<f64>, Error> {
    let fg = mask.grid();
    let (rlat, rlon) = refinement_ratio(&fg, coarse)?;
    let block = (rlat * rlon) as f64;
    let mut out = Vec::with_capacity(coarse.ncells());
    for ci in 0..coarse.nlat {
        for cj in 0..coarse.nlon {
            let mut n = 0usize;
            for fi in ci * rlat..(ci + 1) * rlat {
                for fj in cj * rlon..(cj + 1) * rlon {
                    if mask.class(fi, fj) == keep_class {
                        n += 1;
                    }
                }
            }
            out.push(n as f64 / block);
        }
    }
    Ok(out)
}
