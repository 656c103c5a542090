//! Brute-force reference implementations and the suite that checks the
//! production operations against them on seeded random inputs.
//!
//! Each oracle recomputes its target quantity along a deliberately different
//! path (compensated summation, exhaustive enumeration, quadrature) so a
//! defect in the production code cannot hide in a shared formula.

use serde::{Deserialize, Serialize};

use crate::anomaly::accumulate;
use crate::attribution::{lmg_shares, ols_r2, RegressionDesign};
use crate::drought::{detect_events, fill_gaps_linear};
use crate::error::Error;
use crate::month::{MonthIndex, TimeAxis};
use crate::optimal_period::{corr_p_value, pearson_r};
use crate::series::MonthlySeries;
use crate::synth::CounterRng;

/// Kahan-compensated sum, iterating in reverse order so the accumulation
/// path differs from a plain forward sum.
fn kahan_sum_rev(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values.iter().rev() {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Rolling-sum oracle: per output month, the window sum recomputed with
/// compensated reverse-order summation; missing exactly when the window is
/// short or holds a missing value.
pub fn rolling_sum_oracle(values: &[Option<f64>], k: usize) -> Vec<Option<f64>> {
    (0..values.len())
        .map(|t| {
            if t + 1 < k {
                return None;
            }
            let window = &values[t + 1 - k..=t];
            if window.iter().any(|v| v.is_none()) {
                return None;
            }
            let plain: Vec<f64> = window.iter().map(|v| v.unwrap()).collect();
            Some(kahan_sum_rev(&plain))
        })
        .collect()
}

/// Drought-membership oracle: month t is in drought iff some window of
/// exactly `min_run` consecutive strictly negative months contains t.
/// Events are the maximal runs of that membership.
pub fn negative_run_membership_oracle(values: &[Option<f64>], min_run: usize) -> Vec<bool> {
    let n = values.len();
    let neg: Vec<bool> = values
        .iter()
        .map(|v| matches!(v, Some(x) if *x < 0.0))
        .collect();
    let mut member = vec![false; n];
    if min_run == 0 || min_run > n {
        return member;
    }
    for start in 0..=n - min_run {
        if neg[start..start + min_run].iter().all(|b| *b) {
            for flag in &mut member[start..start + min_run] {
                *flag = true;
            }
        }
    }
    member
}

/// (start, end) index pairs of the maximal true runs of a membership vector.
pub fn runs_of(member: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &b) in member.iter().enumerate() {
        match (b, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, member.len() - 1));
    }
    out
}

/// Direct-formula Pearson oracle with compensated sums of deviation
/// products.
pub fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = kahan_sum_rev(x) / n;
    let my = kahan_sum_rev(y) / n;
    let dxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let dxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    let dyy: Vec<f64> = y.iter().map(|b| (b - my) * (b - my)).collect();
    kahan_sum_rev(&dxy) / (kahan_sum_rev(&dxx).sqrt() * kahan_sum_rev(&dyy).sqrt())
}

/// Gap-fill oracle: every missing index is filled from its bracketing
/// present values by the direct two-point formula, scanning per index.
pub fn linear_fill_oracle(values: &[Option<f64>]) -> Vec<Option<f64>> {
    let n = values.len();
    (0..n)
        .map(|i| {
            if values[i].is_some() {
                return values[i];
            }
            let left = (0..i).rev().find(|&l| values[l].is_some())?;
            let right = (i + 1..n).find(|&r| values[r].is_some())?;
            let lv = values[left].unwrap();
            let rv = values[right].unwrap();
            Some(lv + (rv - lv) * (i - left) as f64 / (right - left) as f64)
        })
        .collect()
}

/// All-orderings oracle for the R-squared decomposition: literally averages
/// the incremental R-squared of each predictor over every permutation.
pub fn lmg_orderings_oracle(design: &RegressionDesign) -> Result<Vec<f64>, Error> {
    let p = design.p();
    let mut shares = vec![0.0f64; p];
    let mut count = 0usize;

    let mut order: Vec<usize> = (0..p).collect();
    permute(&mut order, 0, &mut |perm| {
        let mut before: Vec<usize> = Vec::with_capacity(p);
        for &j in perm {
            let r2_before = ols_r2(design, &before)?;
            before.push(j);
            let mut sorted = before.clone();
            sorted.sort_unstable();
            let r2_after = ols_r2(design, &sorted)?;
            shares[j] += r2_after - r2_before;
        }
        count += 1;
        Ok(())
    })?;

    for s in &mut shares {
        *s /= count as f64;
    }
    Ok(shares)
}

fn permute<F>(items: &mut Vec<usize>, k: usize, visit: &mut F) -> Result<(), Error>
where
    F: FnMut(&[usize]) -> Result<(), Error>,
{
    if k == items.len() {
        return visit(items);
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit)?;
        items.swap(k, i);
    }
    Ok(())
}

/// Student-t CDF by adaptive Simpson quadrature of the density, for the
/// p-value oracle.
pub fn t_cdf_oracle(t: f64, df: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let log_norm =
        ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let pdf = |x: f64| (log_norm - 0.5 * (df + 1.0) * (1.0 + x * x / df).ln()).exp();

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let mid = 0.5 * (a + b);
        let left = simpson(f, a, mid);
        let right = simpson(f, mid, b);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        adaptive(f, a, mid, left, tol / 2.0, depth - 1)
            + adaptive(f, mid, b, right, tol / 2.0, depth - 1)
    }

    let half = if t >= 0.0 {
        let b = t.min(60.0);
        adaptive(&pdf, 0.0, b, simpson(&pdf, 0.0, b), 1e-12, 40)
    } else {
        let a = t.max(-60.0);
        -adaptive(&pdf, a, 0.0, simpson(&pdf, a, 0.0), 1e-12, 40)
    };
    0.5 + half
}

/// Two-sided p-value from the quadrature CDF.
pub fn corr_p_oracle(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    2.0 * (1.0 - t_cdf_oracle(t.abs(), df))
}

/// Gaussian-elimination least squares on the normal equations, independent
/// of the production solver. Returns R-squared.
pub fn ols_r2_oracle(design: &RegressionDesign, subset: &[usize]) -> f64 {
    let n = design.n();
    let y = design.response();
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    if subset.is_empty() {
        return 0.0;
    }
    let m = subset.len() + 1;
    let col = |c: usize, r: usize| -> f64 {
        if c == 0 {
            1.0
        } else {
            design.predictor(subset[c - 1])[r]
        }
    };
    // normal equations (X'X) beta = X'y
    let mut a = vec![vec![0.0f64; m + 1]; m];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().take(m).enumerate() {
            *cell = (0..n).map(|r| col(i, r) * col(j, r)).sum();
        }
        row[m] = (0..n).map(|r| col(i, r) * y[r]).sum();
    }
    // partial-pivot elimination
    for p in 0..m {
        let pivot = (p..m)
            .max_by(|&i, &j| a[i][p].abs().total_cmp(&a[j][p].abs()))
            .unwrap();
        a.swap(p, pivot);
        let (upper, lower) = a.split_at_mut(p + 1);
        let pivot_row = &upper[p];
        for row in lower {
            let f = row[p] / pivot_row[p];
            for (x, pv) in row[p..].iter_mut().zip(&pivot_row[p..]) {
                *x -= f * pv;
            }
        }
    }
    let mut beta = vec![0.0f64; m];
    for p in (0..m).rev() {
        let mut s = a[p][m];
        for j in p + 1..m {
            s -= a[p][j] * beta[j];
        }
        beta[p] = s / a[p][p];
    }
    let ss_res: f64 = (0..n)
        .map(|r| {
            let fit: f64 = (0..m).map(|c| beta[c] * col(c, r)).sum();
            (y[r] - fit).powi(2)
        })
        .sum();
    1.0 - ss_res / ss_tot
}

/// |a - b| scaled by max(|b|, 1), so near-zero references compare
/// absolutely.
pub fn scaled_deviation(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// One oracle-vs-production comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleCheck {
    pub op: String,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Seed of the worst case, for replay.
    pub worst_seed: u64,
}

/// Report of the whole oracle suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// One line per check: op, cases, max deviation, verdict.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<16} cases={:<6} max|dev|={:<12.3e} tol={:<9.0e} {}\n",
                c.op,
                c.cases,
                c.max_deviation,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        out
    }
}

fn start_month() -> MonthIndex {
    MonthIndex::new(2002, 1).expect("valid month")
}

fn random_series(rng: &CounterRng, n: usize, missing_rate: f64) -> MonthlySeries {
    let axis = TimeAxis::new(start_month(), n).expect("n >= 1");
    let values = (0..n)
        .map(|i| {
            if rng.uniform(100_000 + i as u64) < missing_rate {
                None
            } else {
                Some(rng.normal(i as u64) * 10.0)
            }
        })
        .collect();
    MonthlySeries::new(axis, values, "mm").expect("length matches")
}

fn check(op: &str, tolerance: f64, cases: usize, mut worst: impl FnMut(u64) -> f64) -> OracleCheck {
    let mut max_dev = 0.0f64;
    let mut worst_seed = 0u64;
    for case in 0..cases {
        let seed = 0xACE0 + case as u64;
        let dev = worst(seed);
        if dev > max_dev {
            max_dev = dev;
            worst_seed = seed;
        }
    }
    OracleCheck {
        op: op.to_string(),
        cases,
        max_deviation: max_dev,
        tolerance,
        pass: max_dev <= tolerance,
        worst_seed,
    }
}

/// Checks `accumulate` against the rolling-sum oracle on one seeded series;
/// returns the worst scaled deviation (missing-pattern mismatches count as
/// infinite).
pub fn check_accumulate_once(seed: u64) -> f64 {
    let rng = CounterRng::new(seed);
    let n = 24 + rng.index_below(1, 217); // up to 240
    let s = random_series(&rng, n, 0.05);
    let mut worst = 0.0f64;
    for k in [1, 2, 3, 7, 12, n / 2, n]
        .into_iter()
        .filter(|k| *k >= 1 && *k <= n)
    {
        let got = accumulate(&s, k).expect("k in range");
        let want = rolling_sum_oracle(s.values(), k);
        for (g, w) in got.values().iter().zip(&want) {
            match (g, w) {
                (Some(a), Some(b)) => worst = worst.max(scaled_deviation(*a, *b)),
                (None, None) => {}
                _ => return f64::INFINITY,
            }
        }
    }
    worst
}

/// Checks `detect_events` against the membership-window oracle on one
/// seeded +/- sequence; returns the number of disagreeing events/flags.
pub fn check_detection_once(seed: u64, max_len: usize, min_run: usize) -> f64 {
    let rng = CounterRng::new(seed);
    let n = min_run.max(1) + rng.index_below(7, max_len.saturating_sub(min_run).max(1));
    let axis = TimeAxis::new(start_month(), n).expect("n >= 1");
    let values: Vec<Option<f64>> = (0..n)
        .map(|i| {
            let u = rng.uniform(i as u64);
            if u < 0.02 {
                None
            } else if u < 0.51 {
                Some(-1.0 - rng.uniform(1000 + i as u64))
            } else {
                Some(1.0 + rng.uniform(2000 + i as u64))
            }
        })
        .collect();
    let s = MonthlySeries::new(axis, values, "mm").expect("length matches");
    let catalog = detect_events(&s, min_run, "oracle");
    let member = negative_run_membership_oracle(s.values(), min_run);
    let expected = runs_of(&member);
    if expected.len() != catalog.events.len() {
        return (expected.len() as f64 - catalog.events.len() as f64).abs();
    }
    let mut mismatches = 0usize;
    for (ev, &(a, b)) in catalog.events.iter().zip(&expected) {
        if axis.index_of(ev.start) != Some(a)
            || axis.index_of(ev.end) != Some(b)
            || ev.duration != b - a + 1
            || ev.persistent != (b == n - 1)
        {
            mismatches += 1;
        }
    }
    mismatches as f64
}

fn random_design(rng: &CounterRng, n: usize, p: usize) -> RegressionDesign {
    let mut predictors = Vec::with_capacity(p);
    for j in 0..p {
        let col_rng = rng.derive(10 + j as u64);
        predictors.push((
            format!("x{j}"),
            (0..n)
                .map(|i| col_rng.normal(i as u64))
                .collect::<Vec<f64>>(),
        ));
    }
    let noise_rng = rng.derive(99);
    let response: Vec<f64> = (0..n)
        .map(|i| {
            let mut v = noise_rng.normal(i as u64) * 0.5;
            for (j, (_, col)) in predictors.iter().enumerate() {
                v += (j as f64 + 1.0) * 0.4 * col[i];
            }
            v
        })
        .collect();
    RegressionDesign::new(response, predictors).expect("valid design")
}

/// Worst share deviation between `lmg_shares` and the all-orderings oracle.
pub fn check_lmg_once(seed: u64, p: usize) -> f64 {
    let rng = CounterRng::new(seed);
    let n = 20 + rng.index_below(3, 60);
    let design = random_design(&rng, n, p);
    let fast = lmg_shares(&design).expect("well-posed design");
    let slow = lmg_orderings_oracle(&design).expect("well-posed design");
    fast.iter()
        .zip(&slow)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Runs every brute-force oracle against its production implementation on
/// seeded random inputs and reports the worst deviation per operation.
pub fn oracle_suite() -> OracleReport {
    let checks = vec![
        check("accumulate", 1e-12, 60, check_accumulate_once),
        check("detect_events", 0.0, 2000, |seed| {
            check_detection_once(seed, 300, 3)
        }),
        check("pearson_r", 1e-12, 60, |seed| {
            let rng = CounterRng::new(seed);
            let n = 10 + rng.index_below(0, 9991);
            let x: Vec<f64> = (0..n)
                .map(|i| rng.derive(1).normal(i as u64) * 4.0 + 1.0)
                .collect();
            let y: Vec<f64> = (0..n)
                .map(|i| rng.derive(2).normal(i as u64) + 0.3 * x[i])
                .collect();
            scaled_deviation(
                pearson_r(&x, &y).expect("non-degenerate"),
                pearson_oracle(&x, &y),
            )
        }),
        check("corr_p_value", 1e-6, 40, |seed| {
            let rng = CounterRng::new(seed);
            let r = rng.uniform(0) * 1.98 - 0.99;
            let n = 4 + rng.index_below(1, 500);
            (corr_p_value(r, n).expect("valid") - corr_p_oracle(r, n)).abs()
        }),
        check("fill_gaps_linear", 1e-12, 60, |seed| {
            let rng = CounterRng::new(seed);
            let n = 5 + rng.index_below(2, 200);
            let s = random_series(&rng, n, 0.3);
            if s.count_present() < 2 {
                return 0.0;
            }
            let got = fill_gaps_linear(&s).expect(">= 2 present");
            let want = linear_fill_oracle(s.values());
            got.values()
                .iter()
                .zip(&want)
                .map(|(g, w)| match (g, w) {
                    (Some(a), Some(b)) => scaled_deviation(*a, *b),
                    (None, None) => 0.0,
                    _ => f64::INFINITY,
                })
                .fold(0.0, f64::max)
        }),
        check("ols_r2", 1e-12, 60, |seed| {
            let rng = CounterRng::new(seed);
            let p = 1 + rng.index_below(4, 3);
            let n = 30 + rng.index_below(5, 170);
            let design = random_design(&rng, n, p);
            let all: Vec<usize> = (0..p).collect();
            scaled_deviation(
                ols_r2(&design, &all).expect("well-posed design"),
                ols_r2_oracle(&design, &all),
            )
        }),
        check("lmg_shares", 1e-9, 40, |seed| {
            let rng = CounterRng::new(seed);
            let p = 2 + rng.index_below(6, 2);
            check_lmg_once(seed, p)
        }),
    ];
    OracleReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fresh_suite_passes() {
        let report = oracle_suite();
        assert!(report.all_pass(), "\n{}", report.render());
        assert_eq!(report.checks.len(), 7);
        for c in &report.checks {
            assert!(c.max_deviation.is_finite());
        }
    }

    #[test]
    fn report_lists_max_deviation_per_op() {
        let report = oracle_suite();
        let text = report.render();
        for op in [
            "accumulate",
            "detect_events",
            "pearson_r",
            "corr_p_value",
            "fill_gaps_linear",
            "ols_r2",
            "lmg_shares",
        ] {
            assert!(text.contains(op), "missing {op} in:\n{text}");
        }
        assert!(text.contains("max|dev|"));
    }

    #[test]
    fn rolling_sum_oracle_catches_off_by_one() {
        // a deliberately shifted accumulation must fail the oracle comparison
        let rng = CounterRng::new(5);
        let values: Vec<Option<f64>> = (0..50).map(|i| Some(rng.normal(i))).collect();
        let axis = TimeAxis::new(start_month(), 50).unwrap();
        let s = MonthlySeries::new(axis, values, "mm").unwrap();
        let k = 5;
        let good = accumulate(&s, k).unwrap();
        let oracle = rolling_sum_oracle(s.values(), k);

        // shift the output by one month to fake an off-by-one bug
        let mut shifted: Vec<Option<f64>> = good.values().to_vec();
        shifted.rotate_right(1);
        let worst = shifted
            .iter()
            .zip(&oracle)
            .map(|(g, w)| match (g, w) {
                (Some(a), Some(b)) => scaled_deviation(*a, *b),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-12, "oracle failed to catch the shift");
    }

    #[test]
    fn t_cdf_oracle_known_points() {
        // symmetric at zero
        assert_relative_eq!(t_cdf_oracle(0.0, 5.0), 0.5, epsilon = 1e-10);
        // df=2 has the closed form 0.5 + t / (2 sqrt(t^2 + 2))
        for t in [-3.0, -0.7, 0.4, 1.8856180831641267] {
            let exact = 0.5 + t / (2.0 * (t * t + 2.0f64).sqrt());
            assert_relative_eq!(t_cdf_oracle(t, 2.0), exact, epsilon = 1e-9);
        }
        // df=1 is the Cauchy CDF
        let exact = 0.5 + (1.5f64).atan() / std::f64::consts::PI;
        assert_relative_eq!(t_cdf_oracle(1.5, 1.0), exact, epsilon = 1e-9);
    }

    #[test]
    fn membership_oracle_boundaries() {
        let v = |x: f64| Some(x);
        // run of exactly min_run
        let m = negative_run_membership_oracle(&[v(-1.0), v(-1.0), v(-1.0)], 3);
        assert_eq!(m, vec![true, true, true]);
        // runs of 2 never qualify
        let m = negative_run_membership_oracle(&[v(-1.0), v(-1.0), v(1.0), v(-1.0), v(-1.0)], 3);
        assert!(m.iter().all(|b| !b));
        // missing breaks runs
        let m = negative_run_membership_oracle(&[v(-1.0), None, v(-1.0), v(-1.0), v(-1.0)], 3);
        assert_eq!(m, vec![false, false, true, true, true]);
        assert_eq!(runs_of(&m), vec![(2, 4)]);
    }

    #[test]
    fn lmg_oracle_agrees_on_tiny_design() {
        let rng = CounterRng::new(77);
        let design = random_design(&rng, 25, 3);
        let fast = lmg_shares(&design).unwrap();
        let slow = lmg_orderings_oracle(&design).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }
}
