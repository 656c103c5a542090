//! Deterministic synthetic data: a counter-based random generator, AR(1)
//! noise, a single-bucket storage model, and lag-constructed targets with
//! known ground truth.
//!
//! Everything here is a pure function of (seed, index), so generation is
//! reproducible across thread counts and straightforward to port: the
//! uniform stream is the splitmix64 sequence, and normal deviates come from
//! the Box-Muller transform of two consecutive uniforms.

use serde::{Deserialize, Serialize};

use crate::anomaly::{accumulate, monthly_climatology, remove_climatology, standardize};
use crate::error::Error;
use crate::month::MonthIndex;
use crate::month::TimeAxis;
use crate::series::MonthlySeries;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based deterministic generator: draw `i` of stream `seed` is
/// `mix64(seed + (i+1)*GOLDEN)`, the splitmix64 sequence. Draws are
/// addressed by index rather than consumed from mutable state, so any draw
/// can be produced independently on any thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterRng {
    seed: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream for `tag` (cell index, run index, ...).
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            seed: mix64(self.seed ^ mix64(tag.wrapping_add(GOLDEN))),
        }
    }

    /// Raw 64-bit draw at `index`.
    pub fn word(&self, index: u64) -> u64 {
        mix64(
            self.seed
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)),
        )
    }

    /// Uniform draw in [0, 1) with 53 random bits.
    pub fn uniform(&self, index: u64) -> f64 {
        (self.word(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw at `index`: Box-Muller on the uniforms at
    /// counters 2*index and 2*index+1,
    /// `sqrt(-2 ln(1-u1)) * cos(2 pi u2)`.
    pub fn normal(&self, index: u64) -> f64 {
        let u1 = self.uniform(2 * index);
        let u2 = self.uniform(2 * index + 1);
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in [0, bound) via the multiply-shift reduction.
    pub fn index_below(&self, index: u64, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.word(index) as u128 * bound as u128) >> 64) as usize
    }
}

/// AR(1) series `x_t = phi*x_{t-1} + eps_t` with `eps ~ Normal(0, sd)`.
/// The first sample is drawn from the stationary distribution
/// (`eps_0 / sqrt(1 - phi^2)`), so autocorrelation statistics hold from the
/// start of the record.
pub fn gen_ar1(
    n: usize,
    phi: f64,
    sd: f64,
    seed: u64,
    start: MonthIndex,
) -> Result<MonthlySeries, Error> {
    if phi.abs() >= 1.0 {
        return Err(Error::UnstableAr(phi));
    }
    if sd < 0.0 {
        return Err(Error::InvalidParameter("noise sd must be >= 0".into()));
    }
    let rng = CounterRng::new(seed);
    let axis = TimeAxis::new(start, n)?;
    let mut values = Vec::with_capacity(n);
    let mut prev = sd * rng.normal(0) / (1.0 - phi * phi).sqrt();
    values.push(Some(prev));
    for t in 1..n {
        prev = phi * prev + sd * rng.normal(t as u64);
        values.push(Some(prev));
    }
    MonthlySeries::new(axis, values, "x")
}

/// Single-bucket storage model configuration.
///
/// `storage(t+1) = (1-decay)*storage(t) + recharge_coeff*precip(t)
///  - pumping(t) + noise(t)`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketModelConfig {
    /// Fraction of monthly precipitation that reaches storage, in [0, 1].
    pub recharge_coeff: f64,
    /// Monthly abstraction in mm; one entry per forcing month, each >= 0.
    pub pumping: Vec<f64>,
    /// Fractional monthly storage loss, in [0, 1).
    pub decay: f64,
    /// Starting storage in mm.
    pub init_storage: f64,
    /// Standard deviation of the additive monthly noise, in mm.
    pub noise_sd: f64,
    pub seed: u64,
}

impl BucketModelConfig {
    /// No pumping at all.
    pub fn no_pumping(
        recharge_coeff: f64,
        decay: f64,
        init_storage: f64,
        noise_sd: f64,
        seed: u64,
        n: usize,
    ) -> Self {
        Self {
            recharge_coeff,
            pumping: vec![0.0; n],
            decay,
            init_storage,
            noise_sd,
            seed,
        }
    }

    /// Pumping that is zero before `from` (a month offset into the forcing)
    /// and then ramps linearly by `rate_per_month`.
    pub fn ramp_pumping(mut self, from: usize, rate_per_month: f64) -> Self {
        for (t, p) in self.pumping.iter_mut().enumerate() {
            *p = if t < from {
                0.0
            } else {
                rate_per_month * (t - from + 1) as f64
            };
        }
        self
    }

    fn validate(&self, n: usize) -> Result<(), Error> {
        if !(0.0..=1.0).contains(&self.recharge_coeff) {
            return Err(Error::InvalidParameter(
                "recharge_coeff must be in [0, 1]".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.decay) {
            return Err(Error::InvalidParameter("decay must be in [0, 1)".into()));
        }
        if self.noise_sd < 0.0 {
            return Err(Error::InvalidParameter("noise sd must be >= 0".into()));
        }
        if self.pumping.len() != n {
            return Err(Error::InvalidParameter(format!(
                "pumping schedule has {} entries for {} forcing months",
                self.pumping.len(),
                n
            )));
        }
        if self.pumping.iter().any(|p| *p < 0.0) {
            return Err(Error::InvalidParameter("pumping must be >= 0".into()));
        }
        Ok(())
    }
}

/// Runs the bucket model over a missing-free precipitation series and
/// returns the storage anomaly (storage minus its own monthly climatology),
/// aligned to the precipitation axis.
pub fn gen_bucket(cfg: &BucketModelConfig, precip: &MonthlySeries) -> Result<MonthlySeries, Error> {
    let n = precip.len();
    cfg.validate(n)?;
    let rng = CounterRng::new(cfg.seed);
    let mut storage = cfg.init_storage;
    let mut values = Vec::with_capacity(n);
    for t in 0..n {
        let p = precip.get(t).ok_or(Error::DegenerateSeries(
            "bucket forcing must be missing-free",
        ))?;
        storage = (1.0 - cfg.decay) * storage + cfg.recharge_coeff * p - cfg.pumping[t]
            + cfg.noise_sd * rng.normal(t as u64);
        values.push(Some(storage));
    }
    let series = MonthlySeries::new(precip.axis(), values, "mm")?;
    let climatology = monthly_climatology(&series, series.axis().range())?;
    Ok(remove_climatology(&series, &climatology))
}

/// Target with a known optimal accumulation period: the standardized
/// `k_true`-month accumulation of `precip` plus Normal(0, noise_sd) noise.
/// The first `k_true - 1` months are missing, like any accumulation.
pub fn gen_lagged_target(
    precip: &MonthlySeries,
    k_true: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<MonthlySeries, Error> {
    if noise_sd < 0.0 {
        return Err(Error::InvalidParameter("noise sd must be >= 0".into()));
    }
    let acc = accumulate(precip, k_true)?;
    let std = standardize(&acc)?;
    let rng = CounterRng::new(seed);
    let values = std
        .values()
        .iter()
        .enumerate()
        .map(|(t, v)| v.map(|x| x + noise_sd * rng.normal(t as u64)))
        .collect();
    MonthlySeries::new(precip.axis(), values, "std")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimal_period::{
        autocorrelation, correlation_profile, optimal_period, OptimalPeriodOutcome, WindowScheme,
    };

    fn m(y: i32, mo: u8) -> MonthIndex {
        MonthIndex::new(y, mo).unwrap()
    }

    #[test]
    fn counter_rng_is_deterministic_and_index_addressed() {
        let a = CounterRng::new(42);
        let b = CounterRng::new(42);
        for i in 0..100 {
            assert_eq!(a.word(i), b.word(i));
        }
        assert_ne!(CounterRng::new(1).word(0), CounterRng::new(2).word(0));
        // out-of-order access yields the same draws
        let fwd: Vec<u64> = (0..10).map(|i| a.word(i)).collect();
        let rev: Vec<u64> = (0..10).rev().map(|i| a.word(i)).collect();
        assert_eq!(fwd, rev.into_iter().rev().collect::<Vec<_>>());
    }

    #[test]
    fn uniform_in_unit_interval_with_flat_mean() {
        let rng = CounterRng::new(7);
        let n = 20_000;
        let mut sum = 0.0;
        for i in 0..n {
            let u = rng.uniform(i);
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn normal_moments() {
        let rng = CounterRng::new(11);
        let n = 50_000;
        let draws: Vec<f64> = (0..n).map(|i| rng.normal(i)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn derived_streams_differ() {
        let rng = CounterRng::new(5);
        assert_ne!(rng.derive(0).word(0), rng.derive(1).word(0));
        assert_ne!(rng.derive(0).word(0), rng.word(0));
        assert_eq!(rng.derive(3).word(7), rng.derive(3).word(7));
    }

    #[test]
    fn index_below_is_in_range_and_covers() {
        let rng = CounterRng::new(9);
        let mut seen = [false; 7];
        for i in 0..1000 {
            let k = rng.index_below(i, 7);
            assert!(k < 7);
            seen[k] = true;
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn ar1_white_noise_has_no_lag1_correlation() {
        let s = gen_ar1(5000, 0.0, 1.0, 123, m(1800, 1)).unwrap();
        let ac = autocorrelation(&s, 1).unwrap();
        assert!(ac[1].unwrap().abs() < 0.05, "r(1) = {:?}", ac[1]);
    }

    #[test]
    fn ar1_zero_sd_is_all_zeros() {
        let s = gen_ar1(50, 0.7, 0.0, 1, m(2002, 1)).unwrap();
        assert!(s.values().iter().all(|v| v.unwrap() == 0.0));
    }

    #[test]
    fn ar1_same_seed_identical() {
        let a = gen_ar1(100, 0.5, 2.0, 77, m(2002, 1)).unwrap();
        let b = gen_ar1(100, 0.5, 2.0, 77, m(2002, 1)).unwrap();
        assert_eq!(a, b);
        assert!(gen_ar1(10, 1.0, 1.0, 0, m(2002, 1)).is_err());
    }

    #[test]
    fn bucket_constant_storage_yields_zero_anomaly() {
        let precip = gen_ar1(48, 0.0, 1.0, 3, m(2002, 1)).unwrap();
        let cfg = BucketModelConfig::no_pumping(0.0, 0.0, 500.0, 0.0, 1, 48);
        let anom = gen_bucket(&cfg, &precip).unwrap();
        assert!(anom.values().iter().all(|v| v.unwrap().abs() < 1e-9));
    }

    #[test]
    fn bucket_lag1_autocorrelation_tracks_decay() {
        // with pumping = 0 the storage is AR(1) with coefficient 1 - decay
        let n = 5000;
        let precip = gen_ar1(n, 0.0, 5.0, 21, m(1700, 1))
            .unwrap()
            .map(|v| v + 50.0);
        for decay in [0.2, 0.5] {
            let cfg = BucketModelConfig::no_pumping(0.5, decay, 100.0, 4.0, 9, n);
            let anom = gen_bucket(&cfg, &precip).unwrap();
            let ac = autocorrelation(&anom, 1).unwrap();
            let r1 = ac[1].unwrap();
            assert!(
                (r1 - (1.0 - decay)).abs() < 0.05,
                "decay {decay}: r(1) = {r1}"
            );
        }
    }

    #[test]
    fn bucket_fast_drainage_recovers_short_optimal_period() {
        // near-total monthly loss leaves storage tracking recent
        // precipitation; the sweep should land on a 1-2 month optimum
        let n = 300;
        let precip = gen_ar1(n, 0.0, 20.0, 13, m(1992, 1))
            .unwrap()
            .map(|v| v + 100.0);
        let cfg = BucketModelConfig::no_pumping(1.0, 0.95, 100.0, 0.5, 3, n);
        let anom = gen_bucket(&cfg, &precip).unwrap();
        let target = anom
            .window(crate::month::MonthRange::new(m(1994, 1), m(2016, 12)).unwrap())
            .unwrap();
        let clim = monthly_climatology(&precip, precip.axis().range()).unwrap();
        let driver = remove_climatology(&precip, &clim);
        let profile = correlation_profile(&target, &driver, 12, &WindowScheme::monthly()).unwrap();
        match optimal_period(&profile, 0.05) {
            OptimalPeriodOutcome::Significant(r) => {
                assert!(r.k_star <= 2, "k_star = {}", r.k_star)
            }
            other => panic!("expected short optimum, got {other:?}"),
        }
    }

    #[test]
    fn bucket_terminal_pumping_causes_persistent_drought() {
        let n = 180;
        let precip = gen_ar1(n, 0.0, 10.0, 33, m(2002, 1))
            .unwrap()
            .map(|v| v + 80.0);
        let cfg = BucketModelConfig::no_pumping(0.6, 0.1, 400.0, 1.0, 5, n).ramp_pumping(120, 2.0);
        let anom = gen_bucket(&cfg, &precip).unwrap();
        let catalog = crate::drought::detect_events(&anom, 3, "bucket");
        let last = catalog.latest_event().expect("drought expected");
        assert!(last.persistent, "terminal event should be persistent");
        assert!(last.duration >= 12);
    }

    #[test]
    fn lagged_target_noise_free_recovery() {
        let precip = gen_ar1(360, 0.0, 1.0, 51, m(1987, 1)).unwrap();
        let target = gen_lagged_target(&precip, 7, 0.0, 1).unwrap();
        let target = target
            .window(crate::month::MonthRange::new(m(2002, 1), m(2016, 12)).unwrap())
            .unwrap();
        let profile = correlation_profile(&target, &precip, 24, &WindowScheme::monthly()).unwrap();
        match optimal_period(&profile, 0.05) {
            OptimalPeriodOutcome::Significant(r) => {
                assert_eq!(r.k_star, 7);
                assert!((r.median_r - 1.0).abs() < 1e-9);
            }
            other => panic!("expected recovery, got {other:?}"),
        }
    }

    #[test]
    fn lagged_target_k1_correlates_at_one_month() {
        let precip = gen_ar1(120, 0.0, 1.0, 8, m(2000, 1)).unwrap();
        let target = gen_lagged_target(&precip, 1, 0.0, 2)
            .unwrap()
            .window(crate::month::MonthRange::new(m(2000, 7), m(2009, 12)).unwrap())
            .unwrap();
        let out = crate::optimal_period::full_series_r(&target, &precip, 6, 0.05).unwrap();
        assert_eq!(out.significant().unwrap().k_star, 1);
    }
}
