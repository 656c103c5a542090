//! Relative-importance decomposition: regression of a storage anomaly onto
//! named predictors, R-squared shares by averaging incremental R-squared
//! over all predictor orderings, and case-resampling bootstrap confidence
//! intervals.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::month::MonthRange;
use crate::series::MonthlySeries;
use crate::synth::CounterRng;

/// Orderings are enumerated exhaustively, so the predictor count is capped.
pub const MAX_PREDICTORS: usize = 8;

/// Retries allowed per bootstrap run before giving up on degenerate
/// resamples.
pub const BOOTSTRAP_RETRY_CAP: usize = 100;

/// A complete-case regression design: response plus named predictor columns
/// of equal length with no missing entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionDesign {
    response: Vec<f64>,
    names: Vec<String>,
    predictors: Vec<Vec<f64>>,
}

impl RegressionDesign {
    pub fn new(response: Vec<f64>, predictors: Vec<(String, Vec<f64>)>) -> Result<Self, Error> {
        let n = response.len();
        let p = predictors.len();
        if p == 0 {
            return Err(Error::InvalidParameter(
                "at least one predictor is required".into(),
            ));
        }
        if p > MAX_PREDICTORS {
            return Err(Error::InvalidParameter(format!(
                "at most {MAX_PREDICTORS} predictors are supported, got {p}"
            )));
        }
        if predictors.iter().any(|(_, col)| col.len() != n) {
            return Err(Error::InvalidParameter("predictor length mismatch".into()));
        }
        if n < p + 2 {
            return Err(Error::TooShort {
                have: n,
                need: p + 2,
            });
        }
        let (names, predictors) = predictors.into_iter().unzip();
        Ok(Self {
            response,
            names,
            predictors,
        })
    }

    /// Builds a design by aligning predictors on the response axis and
    /// dropping every month where the response or any predictor is missing.
    pub fn from_series(
        response: &MonthlySeries,
        predictors: &[(&str, &MonthlySeries)],
    ) -> Result<Self, Error> {
        let mut y = Vec::new();
        let mut cols: Vec<Vec<f64>> = vec![Vec::new(); predictors.len()];
        'months: for (m, v) in response.iter() {
            let Some(v) = v else { continue };
            let mut row = Vec::with_capacity(predictors.len());
            for (_, series) in predictors {
                match series.at(m) {
                    Some(x) => row.push(x),
                    None => continue 'months,
                }
            }
            y.push(v);
            for (col, x) in cols.iter_mut().zip(row) {
                col.push(x);
            }
        }
        let named = predictors
            .iter()
            .map(|(name, _)| name.to_string())
            .zip(cols)
            .collect();
        Self::new(y, named)
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.predictors.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn predictor(&self, j: usize) -> &[f64] {
        &self.predictors[j]
    }

    /// Design restricted to the rows in `rows` (with repetition), as drawn
    /// by a bootstrap resample.
    fn resample(&self, rows: &[usize]) -> RegressionDesign {
        RegressionDesign {
            response: rows.iter().map(|&r| self.response[r]).collect(),
            names: self.names.clone(),
            predictors: self
                .predictors
                .iter()
                .map(|col| rows.iter().map(|&r| col[r]).collect())
                .collect(),
        }
    }
}

/// Coefficient of determination of the least-squares fit (with intercept)
/// of the response on the predictor subset; the empty subset gives 0.
pub fn ols_r2(design: &RegressionDesign, subset: &[usize]) -> Result<f64, Error> {
    let n = design.n();
    let y = design.response();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::DegenerateSeries("constant response"));
    }
    if subset.is_empty() {
        return Ok(0.0);
    }
    if subset.iter().any(|&j| j >= design.p()) {
        return Err(Error::UnknownPredictor(format!("index {subset:?}")));
    }

    let cols = subset.len() + 1;
    let x = DMatrix::from_fn(n, cols, |r, c| {
        if c == 0 {
            1.0
        } else {
            design.predictor(subset[c - 1])[r]
        }
    });
    let yv = nalgebra::DVector::from_column_slice(y);

    let svd = x.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank_eps = max_sv * n.max(cols) as f64 * f64::EPSILON;
    if svd.singular_values.iter().any(|s| *s <= rank_eps) {
        return Err(Error::CollinearPredictors);
    }
    let beta = svd
        .solve(&yv, rank_eps)
        .map_err(|_| Error::CollinearPredictors)?;
    let residuals = &yv - x * beta;
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// R-squared share per predictor: the average over all predictor orderings
/// of the R-squared gained when the predictor enters the model. Shares sum
/// to the full-model R-squared.
///
/// Computed by subset enumeration: the incremental gain of predictor j over
/// subset S is weighted by `|S|! * (p-1-|S|)! / p!`, which counts the
/// orderings where exactly S precedes j.
pub fn lmg_shares(design: &RegressionDesign) -> Result<Vec<f64>, Error> {
    let p = design.p();
    let all: Vec<usize> = (0..p).collect();

    // R-squared per subset bitmask
    let mut r2 = vec![0.0f64; 1 << p];
    for (mask, slot) in r2.iter_mut().enumerate().skip(1) {
        let subset: Vec<usize> = all
            .iter()
            .copied()
            .filter(|j| mask & (1 << j) != 0)
            .collect();
        *slot = ols_r2(design, &subset)?;
    }

    let mut factorial = vec![1.0f64; p + 1];
    for i in 1..=p {
        factorial[i] = factorial[i - 1] * i as f64;
    }

    let mut shares = vec![0.0f64; p];
    for (j, share) in shares.iter_mut().enumerate() {
        let bit = 1usize << j;
        for mask in 0usize..(1 << p) {
            if mask & bit != 0 {
                continue;
            }
            let s = mask.count_ones() as usize;
            let weight = factorial[s] * factorial[p - 1 - s] / factorial[p];
            *share += weight * (r2[mask | bit] - r2[mask]);
        }
    }
    Ok(shares)
}

/// One predictor's share with its bootstrap percentile interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorImportance {
    pub name: String,
    pub share: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Relative-importance decomposition with bootstrap confidence intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeImportance {
    pub predictors: Vec<PredictorImportance>,
    pub model_r2: f64,
    pub runs: usize,
    pub alpha: f64,
    pub seed: u64,
}

/// Quantile of a sorted slice by linear interpolation of order statistics.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Case-resampling bootstrap of the relative-importance shares.
///
/// The point estimates come from the original sample; each of `runs`
/// resamples draws n rows with replacement from a stream derived from
/// (seed, run index), so the result is byte-stable for a given seed across
/// thread counts. A degenerate resample (constant response or collinear
/// predictors) is redrawn, up to [`BOOTSTRAP_RETRY_CAP`] attempts per run.
/// Intervals are percentile intervals at levels alpha/2 and 1 - alpha/2.
pub fn bootstrap_ri(
    design: &RegressionDesign,
    runs: usize,
    alpha: f64,
    seed: u64,
) -> Result<RelativeImportance, Error> {
    if runs < 1 {
        return Err(Error::InvalidParameter(
            "bootstrap needs at least one run".into(),
        ));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidParameter("alpha must be in (0, 1)".into()));
    }
    let point = lmg_shares(design)?;
    let full: Vec<usize> = (0..design.p()).collect();
    let model_r2 = ols_r2(design, &full)?;

    let n = design.n();
    let base = CounterRng::new(seed);
    let share_rows: Vec<Result<Vec<f64>, Error>> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let run_rng = base.derive(run as u64);
            for attempt in 0..BOOTSTRAP_RETRY_CAP {
                let draw = run_rng.derive(attempt as u64);
                let rows: Vec<usize> = (0..n).map(|r| draw.index_below(r as u64, n)).collect();
                match lmg_shares(&design.resample(&rows)) {
                    Ok(shares) => return Ok(shares),
                    Err(Error::DegenerateSeries(_)) | Err(Error::CollinearPredictors) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::BootstrapDegenerate {
                run,
                retries: BOOTSTRAP_RETRY_CAP,
            })
        })
        .collect();

    let mut per_predictor: Vec<Vec<f64>> = vec![Vec::with_capacity(runs); design.p()];
    for row in share_rows {
        for (j, s) in row?.into_iter().enumerate() {
            per_predictor[j].push(s);
        }
    }

    let predictors = design
        .names()
        .iter()
        .zip(point)
        .zip(per_predictor)
        .map(|((name, share), mut dist)| {
            dist.sort_by(f64::total_cmp);
            PredictorImportance {
                name: name.clone(),
                share,
                ci_low: quantile_sorted(&dist, alpha / 2.0),
                ci_high: quantile_sorted(&dist, 1.0 - alpha / 2.0),
            }
        })
        .collect();

    Ok(RelativeImportance {
        predictors,
        model_r2,
        runs,
        alpha,
        seed,
    })
}

/// Attribution outcome of one analysis period.
#[derive(Debug)]
pub struct PeriodImportance {
    pub period: MonthRange,
    pub result: Result<RelativeImportance, Error>,
}

/// Runs the bootstrap decomposition independently over several month
/// ranges, restricting every series to the period first. Periods derive
/// their seed as `seed ^ period_index`; a failing period does not abort the
/// others.
pub fn subperiod_compare(
    response: &MonthlySeries,
    predictors: &[(&str, &MonthlySeries)],
    periods: &[MonthRange],
    runs: usize,
    alpha: f64,
    seed: u64,
) -> Vec<PeriodImportance> {
    periods
        .iter()
        .enumerate()
        .map(|(idx, &period)| {
            let result = response
                .window(period)
                .and_then(|resp| RegressionDesign::from_series(&resp, predictors))
                .and_then(|design| bootstrap_ri(&design, runs, alpha, seed ^ idx as u64));
            PeriodImportance { period, result }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::month::{MonthIndex, TimeAxis};
    use crate::synth::gen_ar1;
    use approx::assert_relative_eq;

    fn m(y: i32, mo: u8) -> MonthIndex {
        MonthIndex::new(y, mo).unwrap()
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let rng = CounterRng::new(seed);
        (0..n).map(|i| rng.normal(i as u64)).collect()
    }

    #[test]
    fn r2_exact_fit_and_empty_subset() {
        let x1 = noise(50, 1);
        let design = RegressionDesign::new(
            x1.clone(),
            vec![("x1".into(), x1), ("x2".into(), noise(50, 2))],
        )
        .unwrap();
        assert_relative_eq!(ols_r2(&design, &[0]).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(ols_r2(&design, &[]).unwrap(), 0.0);
    }

    #[test]
    fn r2_orthogonal_equal_variance_split() {
        // y = x1 + x2 with exactly orthogonal, equal-variance columns
        let n = 64;
        let x1: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let x2: Vec<f64> = (0..n)
            .map(|i| if (i / 2) % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        let design = RegressionDesign::new(y, vec![("x1".into(), x1), ("x2".into(), x2)]).unwrap();
        assert_relative_eq!(ols_r2(&design, &[0]).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(ols_r2(&design, &[1]).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(ols_r2(&design, &[0, 1]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn r2_collinear_detected() {
        let x1 = noise(40, 3);
        let x2: Vec<f64> = x1.iter().map(|v| 2.0 * v).collect();
        let design =
            RegressionDesign::new(noise(40, 4), vec![("a".into(), x1), ("b".into(), x2)]).unwrap();
        assert!(matches!(
            ols_r2(&design, &[0, 1]),
            Err(Error::CollinearPredictors)
        ));
    }

    #[test]
    fn lmg_orthogonal_equals_marginal() {
        let n = 64;
        let x1: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let x2: Vec<f64> = (0..n)
            .map(|i| if (i / 2) % 2 == 0 { 2.0 } else { -2.0 })
            .collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 3.0 * a + b).collect();
        let design = RegressionDesign::new(y, vec![("x1".into(), x1), ("x2".into(), x2)]).unwrap();
        let shares = lmg_shares(&design).unwrap();
        let m1 = ols_r2(&design, &[0]).unwrap();
        let m2 = ols_r2(&design, &[1]).unwrap();
        assert_relative_eq!(shares[0], m1, epsilon = 1e-10);
        assert_relative_eq!(shares[1], m2, epsilon = 1e-10);
    }

    #[test]
    fn lmg_pure_noise_share_vanishes() {
        let n = 4000;
        let x1 = noise(n, 10);
        let x2 = noise(n, 11);
        let y = x1.clone();
        let design =
            RegressionDesign::new(y, vec![("signal".into(), x1), ("noise".into(), x2)]).unwrap();
        let shares = lmg_shares(&design).unwrap();
        assert!(shares[0] > 0.99);
        assert!(shares[1].abs() < 0.01, "noise share {}", shares[1]);
    }

    #[test]
    fn lmg_sums_to_model_r2() {
        for seed in 0..20u64 {
            let n = 60;
            let x1 = noise(n, 100 + seed);
            let x2 = noise(n, 200 + seed);
            let x3 = noise(n, 300 + seed);
            let y: Vec<f64> = (0..n)
                .map(|i| 0.8 * x1[i] - 0.5 * x2[i] + 0.2 * x3[i] + noise(n, 400 + seed)[i])
                .collect();
            let design = RegressionDesign::new(
                y,
                vec![("a".into(), x1), ("b".into(), x2), ("c".into(), x3)],
            )
            .unwrap();
            let shares = lmg_shares(&design).unwrap();
            let full = ols_r2(&design, &[0, 1, 2]).unwrap();
            assert!((shares.iter().sum::<f64>() - full).abs() < 1e-9);
        }
    }

    #[test]
    fn lmg_invariant_under_predictor_rescaling() {
        let n = 80;
        let x1 = noise(n, 21);
        let x2 = noise(n, 22);
        let y: Vec<f64> = (0..n).map(|i| x1[i] + 0.5 * x2[i]).collect();
        let d1 = RegressionDesign::new(
            y.clone(),
            vec![("a".into(), x1.clone()), ("b".into(), x2.clone())],
        )
        .unwrap();
        let scaled: Vec<f64> = x1.iter().map(|v| 1000.0 * v).collect();
        let d2 = RegressionDesign::new(y, vec![("a".into(), scaled), ("b".into(), x2)]).unwrap();
        let s1 = lmg_shares(&d1).unwrap();
        let s2 = lmg_shares(&d2).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn bootstrap_noise_free_has_zero_width() {
        let x1 = noise(40, 31);
        let design = RegressionDesign::new(x1.clone(), vec![("x1".into(), x1)]).unwrap();
        let ri = bootstrap_ri(&design, 200, 0.05, 7).unwrap();
        let p = &ri.predictors[0];
        assert_relative_eq!(p.share, 1.0, epsilon = 1e-9);
        assert_relative_eq!(p.ci_low, 1.0, epsilon = 1e-9);
        assert_relative_eq!(p.ci_high, 1.0, epsilon = 1e-9);
        assert_relative_eq!(ri.model_r2, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn bootstrap_same_seed_bitwise_identical() {
        let n = 50;
        let x1 = noise(n, 41);
        let x2 = noise(n, 42);
        let y: Vec<f64> = (0..n)
            .map(|i| x1[i] + 0.3 * x2[i] + 0.5 * noise(n, 43)[i])
            .collect();
        let design = RegressionDesign::new(y, vec![("a".into(), x1), ("b".into(), x2)]).unwrap();
        let a = bootstrap_ri(&design, 300, 0.05, 99).unwrap();
        let b = bootstrap_ri(&design, 300, 0.05, 99).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_ri(&design, 300, 0.05, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bootstrap_ci_brackets_point_on_noisy_design() {
        let n = 120;
        let x1 = noise(n, 51);
        let x2 = noise(n, 52);
        let y: Vec<f64> = (0..n).map(|i| x1[i] + x2[i] + noise(n, 53)[i]).collect();
        let design = RegressionDesign::new(y, vec![("a".into(), x1), ("b".into(), x2)]).unwrap();
        let ri = bootstrap_ri(&design, 500, 0.05, 5).unwrap();
        for p in &ri.predictors {
            assert!(p.ci_low <= p.share + 1e-9, "{p:?}");
            assert!(p.ci_high >= p.share - 1e-9, "{p:?}");
            assert!(p.ci_low < p.ci_high);
        }
    }

    #[test]
    fn subperiod_identical_data_identical_points() {
        let series = gen_ar1(120, 0.3, 1.0, 61, m(2002, 1)).unwrap();
        let p1 = gen_ar1(120, 0.0, 1.0, 62, m(2002, 1)).unwrap();
        let y = MonthlySeries::new(
            series.axis(),
            series
                .values()
                .iter()
                .zip(p1.values())
                .map(|(a, b)| Some(a.unwrap() + b.unwrap()))
                .collect(),
            "mm",
        )
        .unwrap();
        let periods = [
            MonthRange::new(m(2002, 1), m(2011, 12)).unwrap(),
            MonthRange::new(m(2002, 1), m(2011, 12)).unwrap(),
        ];
        let out = subperiod_compare(&y, &[("p1", &p1)], &periods, 50, 0.05, 3);
        let a = out[0].result.as_ref().unwrap();
        let b = out[1].result.as_ref().unwrap();
        // same data, different derived seed: identical point estimates
        assert_eq!(a.predictors[0].share, b.predictors[0].share);
        assert_eq!(a.model_r2, b.model_r2);
    }

    #[test]
    fn subperiod_short_period_fails_alone() {
        let y = gen_ar1(120, 0.0, 1.0, 71, m(2002, 1)).unwrap();
        let p1 = gen_ar1(120, 0.0, 1.0, 72, m(2002, 1)).unwrap();
        let p2 = gen_ar1(120, 0.0, 1.0, 73, m(2002, 1)).unwrap();
        let periods = [
            MonthRange::new(m(2002, 1), m(2002, 3)).unwrap(), // n = 3 < 4
            MonthRange::new(m(2002, 1), m(2009, 12)).unwrap(),
        ];
        let out = subperiod_compare(&y, &[("a", &p1), ("b", &p2)], &periods, 20, 0.05, 9);
        assert!(out[0].result.is_err());
        assert!(out[1].result.is_ok());
    }

    #[test]
    fn design_from_series_drops_incomplete_rows() {
        let axis = TimeAxis::new(m(2002, 1), 8).unwrap();
        let y = MonthlySeries::new(
            axis,
            vec![
                Some(1.0),
                None,
                Some(3.0),
                Some(4.0),
                Some(5.0),
                Some(6.0),
                Some(7.0),
                Some(8.0),
            ],
            "mm",
        )
        .unwrap();
        let x = MonthlySeries::new(
            axis,
            vec![
                Some(1.0),
                Some(2.0),
                None,
                Some(4.0),
                Some(5.0),
                Some(6.0),
                Some(7.0),
                Some(9.0),
            ],
            "mm",
        )
        .unwrap();
        let design = RegressionDesign::from_series(&y, &[("x", &x)]).unwrap();
        assert_eq!(design.n(), 6);
    }
}
