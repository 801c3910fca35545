//! Reproducible simulation of `T_β(n)` and the running-maximum statistics.
//!
//! Trials are grouped in fixed blocks of [`BLOCK_TRIALS`]. Block `b` draws from
//! the ChaCha8 stream `b` of the generator seeded with `seed`, and every trial
//! consumes exactly `n` 64-bit words. Hit counts are merged as integers, so
//! results do not depend on the number of worker threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::density::{DensityKind, DensityModel, IidFamily};
use crate::error::{invalid, Error, Result};

pub const BLOCK_TRIALS: u64 = 4096;
/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;
pub const MIN_ESTIMATE_TRIALS: u64 = 1000;

/// Where sample vectors come from.
#[derive(Debug, Clone)]
pub enum SampleSource {
    Model(DensityModel),
    /// Independent uniform signs.
    Rademacher { n: usize },
    /// `ξ(1) = 0`, remaining coordinates i.i.d. standard normal.
    DegenerateFirst { n: usize },
}

impl SampleSource {
    pub fn n(&self) -> usize {
        match self {
            SampleSource::Model(m) => m.n(),
            SampleSource::Rademacher { n } | SampleSource::DegenerateFirst { n } => *n,
        }
    }

    /// Canonical text used for replay hashes.
    pub fn describe(&self) -> String {
        match self {
            SampleSource::Model(m) => match m.kind() {
                DensityKind::Iid(fam) => format!("iid:{fam:?}:n={}", m.n()),
                DensityKind::Gaussian { mean, covariance, .. } => {
                    format!("gaussian:n={}:mean={mean:?}:cov={covariance:?}", m.n())
                }
                DensityKind::User(_) => format!("user:n={}", m.n()),
            },
            SampleSource::Rademacher { n } => format!("rademacher:n={n}"),
            SampleSource::DegenerateFirst { n } => format!("degenerate-first:n={n}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SamplerSpec {
    pub source: SampleSource,
    pub seed: u64,
    pub trials: u64,
    pub workers: usize,
}

impl SamplerSpec {
    pub fn new(source: SampleSource, seed: u64, trials: u64, workers: usize) -> Result<Self> {
        if trials == 0 {
            return invalid("trials must be positive");
        }
        if workers == 0 {
            return invalid("workers must be positive");
        }
        if source.n() == 0 {
            return invalid("dimension must be positive");
        }
        Drawer::new(&source)?;
        Ok(Self { source, seed, trials, workers })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticKind {
    /// `Σx / |x|_β`.
    Sum,
    /// `max_{k≥2} S(k) / Z(n)`.
    MaxOverZn,
    /// `max_{k≥2} S(k) / Z(k)`.
    MaxOverZk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticSpec {
    pub beta: f64,
    pub kind: StatisticKind,
}

impl StatisticSpec {
    pub fn new(beta: f64, kind: StatisticKind) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return invalid(format!("beta must be > 1 (got {beta})"));
        }
        Ok(Self { beta, kind })
    }

    pub fn sum(beta: f64) -> Result<Self> {
        Self::new(beta, StatisticKind::Sum)
    }
}

#[inline]
fn norm_power(x: f64, beta: f64) -> f64 {
    if beta == 2.0 {
        x * x
    } else {
        x.abs().powf(beta)
    }
}

#[inline]
fn root(s: f64, beta: f64) -> f64 {
    if beta == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / beta)
    }
}

/// Statistic value, NaN when the normaliser vanishes.
#[inline]
fn eval_statistic(x: &[f64], spec: &StatisticSpec) -> f64 {
    let beta = spec.beta;
    match spec.kind {
        StatisticKind::Sum => {
            let (s, p) = x.iter().fold((0.0, 0.0), |(s, p), &xi| (s + xi, p + norm_power(xi, beta)));
            if p > 0.0 {
                s / root(p, beta)
            } else {
                f64::NAN
            }
        }
        StatisticKind::MaxOverZn => {
            let p: f64 = x.iter().map(|&xi| norm_power(xi, beta)).sum();
            if !(p > 0.0) {
                return f64::NAN;
            }
            let mut s = x[0];
            let mut best = f64::NEG_INFINITY;
            for &xi in &x[1..] {
                s += xi;
                best = best.max(s);
            }
            best / root(p, beta)
        }
        StatisticKind::MaxOverZk => {
            let mut s = x[0];
            let mut p = norm_power(x[0], beta);
            let mut best = f64::NEG_INFINITY;
            for &xi in &x[1..] {
                s += xi;
                p += norm_power(xi, beta);
                if p > 0.0 {
                    best = best.max(s / root(p, beta));
                }
            }
            if best == f64::NEG_INFINITY {
                f64::NAN
            } else {
                best
            }
        }
    }
}

pub fn statistic(x: &[f64], spec: &StatisticSpec) -> Result<f64> {
    if x.is_empty() {
        return invalid("empty sample vector");
    }
    if spec.kind != StatisticKind::Sum && x.len() < 2 {
        return invalid("maximum statistics need n ≥ 2");
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("sample vector".into()));
    }
    let t = eval_statistic(x, spec);
    if t.is_nan() {
        return Err(Error::Degenerate("statistic undefined at the zero vector".into()));
    }
    Ok(t)
}

#[inline]
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Per-source inverse-CDF sampler.
enum Drawer {
    Normal { mean: f64, sd: f64, base: Normal },
    Student(StudentsT),
    Folded { shift: f64, base: Normal },
    Gaussian { mean: Vec<f64>, cholesky: Vec<f64>, base: Normal },
    Rademacher,
    DegenerateFirst(Normal),
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid parameters")
}

impl Drawer {
    fn new(source: &SampleSource) -> Result<Self> {
        Ok(match source {
            SampleSource::Rademacher { .. } => Drawer::Rademacher,
            SampleSource::DegenerateFirst { n } => {
                if *n < 2 {
                    return invalid("the degenerate-first model needs n ≥ 2");
                }
                Drawer::DegenerateFirst(standard_normal())
            }
            SampleSource::Model(m) => match m.kind() {
                DensityKind::Iid(IidFamily::StandardNormal) => {
                    Drawer::Normal { mean: 0.0, sd: 1.0, base: standard_normal() }
                }
                DensityKind::Iid(IidFamily::Normal { mean, sd }) => {
                    Drawer::Normal { mean: *mean, sd: *sd, base: standard_normal() }
                }
                DensityKind::Iid(IidFamily::StudentT { nu }) => Drawer::Student(
                    StudentsT::new(0.0, 1.0, *nu).map_err(|e| Error::InvalidParameter(e.to_string()))?,
                ),
                DensityKind::Iid(IidFamily::FoldedNormal { shift }) => {
                    Drawer::Folded { shift: *shift, base: standard_normal() }
                }
                DensityKind::Gaussian { mean, cholesky, .. } => Drawer::Gaussian {
                    mean: mean.clone(),
                    cholesky: cholesky.clone(),
                    base: standard_normal(),
                },
                DensityKind::User(_) => {
                    return invalid("user-supplied densities cannot be sampled; use a built-in family")
                }
            },
        })
    }

    /// Fills `out`, consuming exactly `out.len()` words from `rng`.
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match self {
            Drawer::Normal { mean, sd, base } => {
                for x in out.iter_mut() {
                    *x = mean + sd * base.inverse_cdf(uniform(rng));
                }
            }
            Drawer::Student(t) => {
                for x in out.iter_mut() {
                    *x = t.inverse_cdf(uniform(rng));
                }
            }
            Drawer::Folded { shift, base } => {
                for x in out.iter_mut() {
                    *x = shift + base.inverse_cdf(0.5 + 0.5 * uniform(rng));
                }
            }
            Drawer::Gaussian { mean, cholesky, base } => {
                let n = out.len();
                let z: Vec<f64> = (0..n).map(|_| base.inverse_cdf(uniform(rng))).collect();
                for i in 0..n {
                    let mut s = mean[i];
                    for k in 0..=i {
                        s += cholesky[i * n + k] * z[k];
                    }
                    out[i] = s;
                }
            }
            Drawer::Rademacher => {
                for x in out.iter_mut() {
                    *x = if rng.next_u64() >> 63 == 0 { -1.0 } else { 1.0 };
                }
            }
            Drawer::DegenerateFirst(base) => {
                let _ = rng.next_u64();
                out[0] = 0.0;
                for x in out[1..].iter_mut() {
                    *x = base.inverse_cdf(uniform(rng));
                }
            }
        }
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

fn block_count(trials: u64) -> u64 {
    trials.div_ceil(BLOCK_TRIALS)
}

/// Deterministic stream of sample vectors, identical to what the estimators see.
pub struct SampleIter {
    drawer: Drawer,
    n: usize,
    seed: u64,
    trials: u64,
    produced: u64,
    rng: ChaCha8Rng,
}

impl Iterator for SampleIter {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.produced == self.trials {
            return None;
        }
        if self.produced.is_multiple_of(BLOCK_TRIALS) {
            self.rng = block_rng(self.seed, self.produced / BLOCK_TRIALS);
        }
        let mut x = vec![0.0; self.n];
        self.drawer.draw(&mut self.rng, &mut x);
        self.produced += 1;
        Some(x)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.trials - self.produced) as usize;
        (left, Some(left))
    }
}

pub fn sample_batch(spec: &SamplerSpec) -> Result<SampleIter> {
    Ok(SampleIter {
        drawer: Drawer::new(&spec.source)?,
        n: spec.source.n(),
        seed: spec.seed,
        trials: spec.trials,
        produced: 0,
        rng: block_rng(spec.seed, 0),
    })
}

/// Runs `per_block(rng, trials_in_block, scratch)` on every block and returns
/// the results in block order.
fn run_blocks<R, F>(spec: &SamplerSpec, per_block: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&Drawer, &mut ChaCha8Rng, u64, &mut [f64]) -> Result<R> + Sync,
{
    let drawer = Drawer::new(&spec.source)?;
    let n = spec.source.n();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..block_count(spec.trials))
            .into_par_iter()
            .map(|b| {
                let mut rng = block_rng(spec.seed, b);
                let count = BLOCK_TRIALS.min(spec.trials - b * BLOCK_TRIALS);
                let mut x = vec![0.0; n];
                per_block(&drawer, &mut rng, count, &mut x)
            })
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MCEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub spec_hash: String,
}

impl MCEstimate {
    pub fn from_counts(hits: u64, trials: u64, seed: u64, spec_hash: String) -> Self {
        let p_hat = hits as f64 / trials as f64;
        let (ci_low, ci_high) = wilson(hits, trials, WILSON_Z);
        Self { hits, trials, p_hat, ci_low, ci_high, seed, spec_hash }
    }

    pub fn covers(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Wilson score interval, clamped so it always contains `hits / trials`.
pub fn wilson(hits: u64, trials: u64, z: f64) -> (f64, f64) {
    let nt = trials as f64;
    let p = hits as f64 / nt;
    let z2 = z * z;
    let denom = 1.0 + z2 / nt;
    let center = (p + z2 / (2.0 * nt)) / denom;
    let half = z / denom * (p * (1.0 - p) / nt + z2 / (4.0 * nt * nt)).sqrt();
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0).min(p) };
    let hi = if hits == trials { 1.0 } else { (center + half).min(1.0).max(p) };
    (lo, hi)
}

fn replay_hash(spec: &SamplerSpec, parts: &str) -> String {
    let text = format!(
        "{}|seed={}|trials={}|{}",
        spec.source.describe(),
        spec.seed,
        spec.trials,
        parts
    );
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// `P(stat > threshold)` estimated from `spec.trials` samples.
pub fn estimate_tail(spec: &SamplerSpec, stat: &StatisticSpec, threshold: f64) -> Result<MCEstimate> {
    if !threshold.is_finite() {
        return Err(Error::NonFinite("threshold".into()));
    }
    if spec.trials < MIN_ESTIMATE_TRIALS {
        return invalid(format!("estimate_tail needs at least {MIN_ESTIMATE_TRIALS} trials"));
    }
    if stat.kind != StatisticKind::Sum && spec.source.n() < 2 {
        return invalid("maximum statistics need n ≥ 2");
    }
    let counts = run_blocks(spec, |drawer, rng, count, x| {
        let mut hits = 0u64;
        for _ in 0..count {
            drawer.draw(rng, x);
            let t = eval_statistic(x, stat);
            if t.is_nan() {
                return Err(Error::Degenerate("sampled the zero vector".into()));
            }
            hits += (t > threshold) as u64;
        }
        Ok(hits)
    })?;
    let hits = counts.iter().sum();
    let hash = replay_hash(spec, &format!("stat={:?}|beta={:?}|threshold={:?}", stat.kind, stat.beta, threshold));
    Ok(MCEstimate::from_counts(hits, spec.trials, spec.seed, hash))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct EventCounts {
    sum: u64,
    max_zn: u64,
    max_zk: u64,
    both: u64,
    max_only: u64,
    sum_only: u64,
}

impl std::ops::Add for EventCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            sum: self.sum + o.sum,
            max_zn: self.max_zn + o.max_zn,
            max_zk: self.max_zk + o.max_zk,
            both: self.both + o.both,
            max_only: self.max_only + o.max_only,
            sum_only: self.sum_only + o.sum_only,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxSumReport {
    pub n: usize,
    pub epsilon: f64,
    pub threshold: f64,
    /// Tail of `T(n)`.
    pub q: MCEstimate,
    /// Tail of `max_k S(k)/Z(n)`.
    pub r: MCEstimate,
    /// Tail of `max_k S(k)/Z(k)`.
    pub r_bar: MCEstimate,
    pub max_without_sum: u64,
    pub sum_without_max: u64,
    /// Fraction of trials with either event on which both occurred.
    pub coincidence_rate: Option<f64>,
    pub coincided_on_every_trial: bool,
    pub ratio: Option<f64>,
    pub ratio_ci_low: Option<f64>,
    pub ratio_ci_high: Option<f64>,
    pub warnings: Vec<String>,
}

/// Estimates `Q_n`, `R_n` and `R̄_n` at `√n - ε` on common samples.
pub fn compare_max_vs_sum(spec: &SamplerSpec, epsilon: f64) -> Result<MaxSumReport> {
    let n = spec.source.n();
    if n < 2 {
        return invalid("the maximum statistics need n ≥ 2");
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return invalid(format!("epsilon must be non-negative (got {epsilon})"));
    }
    let mut warnings = Vec::new();
    let window = 0.5 / ((n - 1) as f64).sqrt();
    if !(epsilon > 0.0 && epsilon < window) {
        warnings.push(format!("epsilon {epsilon} outside the window (0, {window:.6}); computed anyway"));
    }
    let threshold = (n as f64).sqrt() - epsilon;
    let sum = StatisticSpec::sum(2.0)?;
    let zn = StatisticSpec::new(2.0, StatisticKind::MaxOverZn)?;
    let zk = StatisticSpec::new(2.0, StatisticKind::MaxOverZk)?;
    let blocks = run_blocks(spec, |drawer, rng, count, x| {
        let mut c = EventCounts::default();
        for _ in 0..count {
            drawer.draw(rng, x);
            let (ts, tn, tk) = (eval_statistic(x, &sum), eval_statistic(x, &zn), eval_statistic(x, &zk));
            if ts.is_nan() {
                return Err(Error::Degenerate("sampled the zero vector".into()));
            }
            let (es, en, ek) = (ts > threshold, tn > threshold, tk > threshold);
            c.sum += es as u64;
            c.max_zn += en as u64;
            c.max_zk += ek as u64;
            c.both += (es && en) as u64;
            c.max_only += (en && !es) as u64;
            c.sum_only += (es && !en) as u64;
        }
        Ok(c)
    })?;
    let c = blocks.into_iter().fold(EventCounts::default(), |a, b| a + b);
    let hash = |stat: &str| replay_hash(spec, &format!("compare|stat={stat}|threshold={threshold:?}"));
    let either = c.both + c.max_only + c.sum_only;
    let (ratio, ratio_ci_low, ratio_ci_high) = if c.sum > 0 && c.max_zn > 0 {
        let (a, b, s) = (c.max_zn as f64, c.sum as f64, c.both as f64);
        let ratio = a / b;
        let var = (1.0 / a + 1.0 / b - 2.0 * s / (a * b)).max(0.0);
        let spread = (WILSON_Z * var.sqrt()).exp();
        (Some(ratio), Some(ratio / spread), Some(ratio * spread))
    } else {
        (None, None, None)
    };
    Ok(MaxSumReport {
        n,
        epsilon,
        threshold,
        q: MCEstimate::from_counts(c.sum, spec.trials, spec.seed, hash("sum")),
        r: MCEstimate::from_counts(c.max_zn, spec.trials, spec.seed, hash("max-over-zn")),
        r_bar: MCEstimate::from_counts(c.max_zk, spec.trials, spec.seed, hash("max-over-zk")),
        max_without_sum: c.max_only,
        sum_without_max: c.sum_only,
        coincidence_rate: (either > 0).then(|| c.both as f64 / either as f64),
        coincided_on_every_trial: c.max_only == 0 && c.sum_only == 0,
        ratio,
        ratio_ci_low,
        ratio_ci_high,
        warnings,
    })
}
