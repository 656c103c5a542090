//! Correlation machinery: Pearson r with significance, expanding-window
//! median correlation, the 1..K accumulation sweep, optimal-period
//! selection, and autocorrelation.
//!
//! The expanding-window construction grows a prefix window one sample at a
//! time from an initial length up to the whole record and takes the median
//! of the per-window correlations, which keeps the estimate robust against
//! extremes at either end of the record.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::anomaly::accumulate;
use crate::error::Error;
use crate::series::{pairwise_complete, MonthlySeries};

/// Sample Pearson correlation of two fully aligned, missing-free slices.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64, Error> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return Err(Error::DegenerateCorrelation("fewer than 3 paired samples"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateCorrelation("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation over the months where both series are present.
pub fn pearson_r_pairwise(x: &MonthlySeries, y: &MonthlySeries) -> Result<f64, Error> {
    let (xs, ys) = pairwise_complete(x, y);
    pearson_r(&xs, &ys)
}

/// Two-sided p-value of a sample correlation under the null of zero
/// correlation: `t = r*sqrt((n-2)/(1-r^2))` against Student-t with n-2
/// degrees of freedom. `|r| = 1` maps to p = 0 by convention.
pub fn corr_p_value(r: f64, n: usize) -> Result<f64, Error> {
    if n < 3 {
        return Err(Error::DegenerateCorrelation("fewer than 3 paired samples"));
    }
    if r.abs() >= 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    Ok(2.0 * (1.0 - dist.cdf(t.abs())))
}

/// Cadence of the samples fed to the expanding-window analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindowMode {
    /// One sample per month.
    Monthly,
    /// Four samples per year (well-observation cadence).
    SeasonalFourPerYear,
}

/// Expanding-window scheme: prefix windows start at `initial_window`
/// samples and grow by `step` samples up to the full record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowScheme {
    pub initial_window: usize,
    pub step: usize,
    pub mode: WindowMode,
}

impl WindowScheme {
    pub fn new(initial_window: usize, step: usize, mode: WindowMode) -> Result<Self, Error> {
        if initial_window < 3 {
            return Err(Error::InvalidParameter(
                "initial window must hold at least 3 samples".into(),
            ));
        }
        if step < 1 {
            return Err(Error::InvalidParameter("window step must be >= 1".into()));
        }
        Ok(Self {
            initial_window,
            step,
            mode,
        })
    }

    /// Monthly cadence, five-year (60-sample) initial window, step 1.
    pub fn monthly() -> Self {
        Self {
            initial_window: 60,
            step: 1,
            mode: WindowMode::Monthly,
        }
    }

    /// Well cadence: four samples per year, 40-sample initial window, step 1.
    pub fn well() -> Self {
        Self {
            initial_window: 40,
            step: 1,
            mode: WindowMode::SeasonalFourPerYear,
        }
    }
}

/// Median of a non-empty slice; the even case averages the two central
/// values.
pub fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Result of an expanding-window correlation analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandingCorrelation {
    pub median_r: f64,
    pub median_p: f64,
    /// One correlation per computable window, in window order.
    pub window_r: Vec<f64>,
    pub window_p: Vec<f64>,
}

impl ExpandingCorrelation {
    pub fn n_windows(&self) -> usize {
        self.window_r.len()
    }

    /// Sample standard deviation of the window correlations (0 for a single
    /// window).
    pub fn r_spread(&self) -> f64 {
        let n = self.window_r.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.window_r.iter().sum::<f64>() / n as f64;
        let var = self
            .window_r
            .iter()
            .map(|r| (r - mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        var.sqrt()
    }
}

/// Expanding-window median correlation between two aligned series.
///
/// The paired non-missing samples are taken in chronological order; windows
/// are the prefixes of length `initial_window`, `initial_window + step`, ...
/// up to all samples. Each computable window contributes one r (and its
/// paired p); the reported values are the medians over windows. With step 1
/// and no degenerate window, the window count is `n - initial_window + 1`.
pub fn expanding_median_r(
    x: &MonthlySeries,
    y: &MonthlySeries,
    scheme: &WindowScheme,
) -> Result<ExpandingCorrelation, Error> {
    let (xs, ys) = pairwise_complete(x, y);
    expanding_median_r_samples(&xs, &ys, scheme)
}

/// Slice-level core of [`expanding_median_r`].
pub fn expanding_median_r_samples(
    xs: &[f64],
    ys: &[f64],
    scheme: &WindowScheme,
) -> Result<ExpandingCorrelation, Error> {
    let n = xs.len();
    if n < scheme.initial_window {
        return Err(Error::TooShort {
            have: n,
            need: scheme.initial_window,
        });
    }

    let mut window_r = Vec::new();
    let mut window_p = Vec::new();
    let mut len = scheme.initial_window;
    loop {
        if let Ok(r) = pearson_r(&xs[..len], &ys[..len]) {
            window_r.push(r);
            window_p.push(corr_p_value(r, len)?);
        }
        if len == n {
            break;
        }
        len = (len + scheme.step).min(n);
    }
    if window_r.is_empty() {
        return Err(Error::DegenerateCorrelation("no computable window"));
    }
    Ok(ExpandingCorrelation {
        median_r: median(&window_r),
        median_p: median(&window_p),
        window_r,
        window_p,
    })
}

/// How the per-accumulation correlations of a profile were estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileMethod {
    /// Median over expanding windows.
    ExpandingMedian,
    /// A single whole-record correlation per accumulation period.
    FullSeries,
}

impl ProfileMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ProfileMethod::ExpandingMedian => "median",
            ProfileMethod::FullSeries => "full-series",
        }
    }
}

/// One accumulation period's correlation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileEntry {
    pub k: usize,
    pub median_r: f64,
    pub median_p: f64,
    pub n_windows: usize,
    pub r_spread: f64,
    pub window_r: Vec<f64>,
}

/// Correlation as a function of the accumulation period 1..=K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    pub max_k: usize,
    pub method: ProfileMethod,
    pub entries: Vec<ProfileEntry>,
}

impl CorrelationProfile {
    pub fn entry(&self, k: usize) -> Option<&ProfileEntry> {
        self.entries.iter().find(|e| e.k == k)
    }
}

fn require_history(
    target: &MonthlySeries,
    driver: &MonthlySeries,
    max_k: usize,
) -> Result<(), Error> {
    let required_start = target.axis().start().offset(-(max_k as i64 - 1));
    if driver.axis().start() > required_start || driver.axis().end() < target.axis().end() {
        return Err(Error::InsufficientHistory { required_start });
    }
    Ok(())
}

/// Sweeps accumulation periods 1..=K: accumulates the driver series over k
/// months, aligns it to the target axis, and summarizes the correlation per
/// k with the expanding-window median.
///
/// The driver must begin at least K-1 months before the target and cover its
/// end, so every aligned accumulation is free of window-truncation gaps.
pub fn correlation_profile(
    target: &MonthlySeries,
    driver: &MonthlySeries,
    max_k: usize,
    scheme: &WindowScheme,
) -> Result<CorrelationProfile, Error> {
    if max_k < 1 {
        return Err(Error::AccumulationOutOfRange { k: max_k, max: 1 });
    }
    require_history(target, driver, max_k)?;
    // per-k work is independent; ordered collect keeps the result
    // identical at any thread count
    let entries = (1..=max_k)
        .into_par_iter()
        .map(|k| {
            let acc = accumulate(driver, k)?.align_to(target.axis());
            let exp = expanding_median_r(target, &acc, scheme)?;
            Ok(ProfileEntry {
                k,
                median_r: exp.median_r,
                median_p: exp.median_p,
                n_windows: exp.n_windows(),
                r_spread: exp.r_spread(),
                window_r: exp.window_r,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(CorrelationProfile {
        max_k,
        method: ProfileMethod::ExpandingMedian,
        entries,
    })
}

/// Like [`correlation_profile`] but with a single whole-record correlation
/// per accumulation period instead of expanding windows.
pub fn full_series_profile(
    target: &MonthlySeries,
    driver: &MonthlySeries,
    max_k: usize,
) -> Result<CorrelationProfile, Error> {
    if max_k < 1 {
        return Err(Error::AccumulationOutOfRange { k: max_k, max: 1 });
    }
    require_history(target, driver, max_k)?;
    let entries = (1..=max_k)
        .into_par_iter()
        .map(|k| {
            let acc = accumulate(driver, k)?.align_to(target.axis());
            let (xs, ys) = pairwise_complete(target, &acc);
            let r = pearson_r(&xs, &ys)?;
            let p = corr_p_value(r, xs.len())?;
            Ok(ProfileEntry {
                k,
                median_r: r,
                median_p: p,
                n_windows: 1,
                r_spread: 0.0,
                window_r: vec![r],
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(CorrelationProfile {
        max_k,
        method: ProfileMethod::FullSeries,
        entries,
    })
}

/// A selected optimal accumulation period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPeriodResult {
    pub k_star: usize,
    pub median_r: f64,
    pub median_p: f64,
    /// Standard deviation of the window correlations at `k_star`.
    pub r_spread: f64,
    pub method: ProfileMethod,
}

/// Outcome of optimal-period selection. When no accumulation period has a
/// significant positive correlation, the unconstrained argmax is kept as a
/// diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OptimalPeriodOutcome {
    Significant(OptimalPeriodResult),
    NotSignificant {
        /// Argmax of the correlation without the sign/significance gates.
        best_k: usize,
        best_r: f64,
        best_p: f64,
        method: ProfileMethod,
    },
}

impl OptimalPeriodOutcome {
    pub fn significant(&self) -> Option<&OptimalPeriodResult> {
        match self {
            OptimalPeriodOutcome::Significant(r) => Some(r),
            OptimalPeriodOutcome::NotSignificant { .. } => None,
        }
    }
}

/// Selects the accumulation period with the highest positive and significant
/// (median p below `alpha`) correlation; ties break toward the smallest k.
pub fn optimal_period(profile: &CorrelationProfile, alpha: f64) -> OptimalPeriodOutcome {
    let mut best: Option<&ProfileEntry> = None;
    let mut fallback: Option<&ProfileEntry> = None;
    for e in &profile.entries {
        if fallback.is_none_or(|f| e.median_r > f.median_r) {
            fallback = Some(e);
        }
        if e.median_r > 0.0 && e.median_p < alpha && best.is_none_or(|b| e.median_r > b.median_r) {
            best = Some(e);
        }
    }
    match best {
        Some(e) => OptimalPeriodOutcome::Significant(OptimalPeriodResult {
            k_star: e.k,
            median_r: e.median_r,
            median_p: e.median_p,
            r_spread: e.r_spread,
            method: profile.method,
        }),
        None => {
            let f = fallback.expect("profile validated non-empty");
            OptimalPeriodOutcome::NotSignificant {
                best_k: f.k,
                best_r: f.median_r,
                best_p: f.median_p,
                method: profile.method,
            }
        }
    }
}

/// Convenience wrapper: whole-record correlation sweep plus selection.
pub fn full_series_r(
    target: &MonthlySeries,
    driver: &MonthlySeries,
    max_k: usize,
    alpha: f64,
) -> Result<OptimalPeriodOutcome, Error> {
    let profile = full_series_profile(target, driver, max_k)?;
    Ok(optimal_period(&profile, alpha))
}

/// Autocorrelation r(lag) for lag 0..=max_lag, taking the pairs
/// `(s[t], s[t+lag])` where both are present. Lags with fewer than three
/// pairs or degenerate variance are missing; r(0) is 1 by definition.
pub fn autocorrelation(s: &MonthlySeries, max_lag: usize) -> Result<Vec<Option<f64>>, Error> {
    if s.count_present() < 2 {
        return Err(Error::TooShort {
            have: s.count_present(),
            need: 2,
        });
    }
    let values = s.values();
    let n = values.len();
    let mut out = Vec::with_capacity(max_lag + 1);
    out.push(Some(1.0));
    for lag in 1..=max_lag {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in 0..n.saturating_sub(lag) {
            if let (Some(a), Some(b)) = (values[t], values[t + lag]) {
                xs.push(a);
                ys.push(b);
            }
        }
        out.push(pearson_r(&xs, &ys).ok());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::month::{MonthIndex, TimeAxis};
    use crate::synth::{gen_ar1, CounterRng};
    use approx::assert_relative_eq;

    fn m(y: i32, mo: u8) -> MonthIndex {
        MonthIndex::new(y, mo).unwrap()
    }

    fn series(start: (i32, u8), values: Vec<Option<f64>>) -> MonthlySeries {
        let axis = TimeAxis::new(m(start.0, start.1), values.len()).unwrap();
        MonthlySeries::new(axis, values, "x").unwrap()
    }

    #[test]
    fn pearson_perfect_affine() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert_relative_eq!(pearson_r(&x, &y).unwrap(), 1.0, epsilon = 1e-12);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_relative_eq!(pearson_r(&x, &neg).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_hand_value() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        assert_relative_eq!(pearson_r(&x, &y).unwrap(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn pearson_degenerate() {
        assert!(pearson_r(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn pearson_affine_invariance() {
        let rng = CounterRng::new(7);
        let x: Vec<f64> = (0..40).map(|i| rng.normal(i)).collect();
        let y: Vec<f64> = (0..40).map(|i| rng.normal(1000 + i)).collect();
        let r = pearson_r(&x, &y).unwrap();
        let x2: Vec<f64> = x.iter().map(|v| 3.5 * v + 11.0).collect();
        assert_relative_eq!(pearson_r(&x2, &y).unwrap(), r, epsilon = 1e-12);
        let x3: Vec<f64> = x.iter().map(|v| -2.0 * v + 4.0).collect();
        assert_relative_eq!(pearson_r(&x3, &y).unwrap(), -r, epsilon = 1e-12);
    }

    #[test]
    fn p_value_null_and_exact_point() {
        assert_relative_eq!(corr_p_value(0.0, 30).unwrap(), 1.0, epsilon = 1e-12);
        // r=0.8, n=4: t = sqrt(2*0.64/0.36), df=2 gives p = 0.2 exactly
        assert_relative_eq!(corr_p_value(0.8, 4).unwrap(), 0.2, epsilon = 1e-6);
        assert_eq!(corr_p_value(1.0, 10).unwrap(), 0.0);
        assert_eq!(corr_p_value(-1.0, 10).unwrap(), 0.0);
        assert!(corr_p_value(0.9999999, 10).unwrap() < 1e-5);
    }

    #[test]
    fn p_value_monotone_in_r_and_n() {
        let mut last = f64::INFINITY;
        for r in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let p = corr_p_value(r, 20).unwrap();
            assert!(p < last);
            last = p;
        }
        let mut last = f64::INFINITY;
        for n in [4, 8, 16, 64, 256] {
            let p = corr_p_value(0.4, n).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn expanding_window_counts() {
        let rng = CounterRng::new(3);
        let xs: Vec<Option<f64>> = (0..180).map(|i| Some(rng.normal(i))).collect();
        let ys: Vec<Option<f64>> = (0..180).map(|i| Some(rng.normal(9000 + i))).collect();
        let x = series((2002, 1), xs);
        let y = series((2002, 1), ys);
        let exp = expanding_median_r(&x, &y, &WindowScheme::monthly()).unwrap();
        assert_eq!(exp.n_windows(), 121);

        let xs: Vec<Option<f64>> = (0..84).map(|i| Some(rng.normal(20000 + i))).collect();
        let ys: Vec<Option<f64>> = (0..84).map(|i| Some(rng.normal(30000 + i))).collect();
        let x = series((1996, 1), xs);
        let y = series((1996, 1), ys);
        let exp = expanding_median_r(&x, &y, &WindowScheme::well()).unwrap();
        assert_eq!(exp.n_windows(), 45);
    }

    #[test]
    fn expanding_identical_series() {
        let rng = CounterRng::new(11);
        let vals: Vec<Option<f64>> = (0..80).map(|i| Some(rng.normal(i))).collect();
        let x = series((2002, 1), vals.clone());
        let y = series((2002, 1), vals);
        let scheme = WindowScheme::new(10, 1, WindowMode::Monthly).unwrap();
        let exp = expanding_median_r(&x, &y, &scheme).unwrap();
        assert!(exp.window_r.iter().all(|r| (r - 1.0).abs() < 1e-12));
        assert_relative_eq!(exp.median_r, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn expanding_too_short() {
        let x = series((2002, 1), vec![Some(1.0); 30]);
        let y = series((2002, 1), vec![Some(2.0); 30]);
        assert!(matches!(
            expanding_median_r(&x, &y, &WindowScheme::monthly()),
            Err(Error::TooShort { .. })
        ));
    }

    fn noise_series(start: (i32, u8), n: usize, seed: u64) -> MonthlySeries {
        gen_ar1(n, 0.0, 1.0, seed, m(start.0, start.1)).unwrap()
    }

    #[test]
    fn profile_recovers_exact_construction() {
        let precip = noise_series((1995, 1), 300, 41);
        let acc7 = accumulate(&precip, 7).unwrap();
        let target = acc7
            .window(crate::month::MonthRange::new(m(2002, 1), m(2016, 12)).unwrap())
            .unwrap();
        let scheme = WindowScheme::monthly();
        let profile = correlation_profile(&target, &precip, 12, &scheme).unwrap();
        let at7 = profile.entry(7).unwrap();
        assert_relative_eq!(at7.median_r, 1.0, epsilon = 1e-9);
        for e in &profile.entries {
            if e.k != 7 {
                assert!(e.median_r < 1.0 - 1e-9);
            }
        }
        match optimal_period(&profile, 0.05) {
            OptimalPeriodOutcome::Significant(r) => assert_eq!(r.k_star, 7),
            other => panic!("expected significant optimum, got {other:?}"),
        }
    }

    #[test]
    fn profile_white_noise_mostly_insignificant() {
        let precip = noise_series((1995, 1), 300, 4242);
        let target = noise_series((2002, 1), 120, 777);
        let scheme = WindowScheme::new(30, 1, WindowMode::Monthly).unwrap();
        let profile = correlation_profile(&target, &precip, 10, &scheme).unwrap();
        let small = profile
            .entries
            .iter()
            .filter(|e| e.median_r.abs() < 0.3)
            .count();
        assert!(small >= 8, "independent noise should decorrelate");
        let insignificant = profile.entries.iter().filter(|e| e.median_p > 0.05).count();
        assert!(insignificant >= 6);
    }

    #[test]
    fn profile_k1_single_entry_and_history_check() {
        let precip = noise_series((2001, 6), 200, 5);
        let target = noise_series((2002, 1), 100, 6);
        let scheme = WindowScheme::new(20, 1, WindowMode::Monthly).unwrap();
        let profile = correlation_profile(&target, &precip, 1, &scheme).unwrap();
        assert_eq!(profile.entries.len(), 1);

        let err = correlation_profile(&target, &precip, 12, &scheme).unwrap_err();
        match err {
            Error::InsufficientHistory { required_start } => {
                assert_eq!(required_start, m(2001, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn optimal_period_all_negative_is_not_significant() {
        let entries = (1..=5)
            .map(|k| ProfileEntry {
                k,
                median_r: -0.2 * k as f64 / 5.0,
                median_p: 0.001,
                n_windows: 10,
                r_spread: 0.0,
                window_r: vec![],
            })
            .collect();
        let profile = CorrelationProfile {
            max_k: 5,
            method: ProfileMethod::ExpandingMedian,
            entries,
        };
        match optimal_period(&profile, 0.05) {
            OptimalPeriodOutcome::NotSignificant { best_k, .. } => assert_eq!(best_k, 1),
            other => panic!("expected no significant optimum, got {other:?}"),
        }
    }

    #[test]
    fn optimal_period_tie_breaks_to_smallest_k() {
        let mk = |k, r| ProfileEntry {
            k,
            median_r: r,
            median_p: 0.001,
            n_windows: 3,
            r_spread: 0.0,
            window_r: vec![r, r, r],
        };
        let profile = CorrelationProfile {
            max_k: 3,
            method: ProfileMethod::ExpandingMedian,
            entries: vec![mk(1, 0.4), mk(2, 0.8), mk(3, 0.8)],
        };
        let r = optimal_period(&profile, 0.05)
            .significant()
            .unwrap()
            .clone();
        assert_eq!(r.k_star, 2);
    }

    #[test]
    fn full_series_recovers_construction_and_rejects_constant() {
        let precip = noise_series((1995, 1), 300, 17);
        let acc7 = accumulate(&precip, 7).unwrap();
        let target = acc7
            .window(crate::month::MonthRange::new(m(2002, 1), m(2012, 12)).unwrap())
            .unwrap();
        let out = full_series_r(&target, &precip, 12, 0.05).unwrap();
        let r = out.significant().unwrap();
        assert_eq!(r.k_star, 7);
        assert_relative_eq!(r.median_r, 1.0, epsilon = 1e-9);
        assert_eq!(r.method, ProfileMethod::FullSeries);

        let constant = series((2002, 1), vec![Some(1.0); 60]);
        assert!(full_series_r(&constant, &precip, 5, 0.05).is_err());
    }

    #[test]
    fn composed_equality_profile_vs_manual() {
        let precip = noise_series((1998, 1), 260, 99);
        let target = noise_series((2002, 1), 150, 100);
        let scheme = WindowScheme::new(24, 1, WindowMode::Monthly).unwrap();
        let profile = correlation_profile(&target, &precip, 9, &scheme).unwrap();
        for k in 1..=9 {
            let acc = accumulate(&precip, k).unwrap().align_to(target.axis());
            let exp = expanding_median_r(&target, &acc, &scheme).unwrap();
            let e = profile.entry(k).unwrap();
            assert_eq!(e.median_r, exp.median_r, "bitwise at k={k}");
            assert_eq!(e.median_p, exp.median_p);
            assert_eq!(e.window_r, exp.window_r);
        }
    }

    #[test]
    fn autocorrelation_lag0_and_white_noise() {
        let s = noise_series((2002, 1), 180, 2024);
        let ac = autocorrelation(&s, 24).unwrap();
        assert_eq!(ac[0], Some(1.0));
        assert!(ac[12].unwrap().abs() < 0.2);
    }

    #[test]
    fn autocorrelation_ar1_matches_phi() {
        let s = gen_ar1(5000, 0.9, 1.0, 31, m(1800, 1)).unwrap();
        let ac = autocorrelation(&s, 2).unwrap();
        assert!((ac[1].unwrap() - 0.9).abs() < 0.02, "r(1) = {:?}", ac[1]);
    }

    #[test]
    fn autocorrelation_insufficient_pairs_missing() {
        let s = series((2002, 1), vec![Some(1.0), Some(2.0), Some(-1.0), Some(0.5)]);
        let ac = autocorrelation(&s, 3).unwrap();
        assert_eq!(ac[0], Some(1.0));
        assert!(ac[2].is_none()); // only 2 pairs at lag 2
        assert!(ac[3].is_none());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
