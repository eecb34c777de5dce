//! Monte Carlo estimation of the holomorphic Morse integrals.
//!
//! Each sample picks a base point of the scenario by weight, draws the
//! fiber unit vectors of the metric, and forms the base curvature
//!
//! ```text
//! γ = ω (1 - δ) θ_L - r · sampler(draws)
//! ```
//!
//! where `ω` is [`fiber_weight`], so that the fiber average of `γ` is
//! `ω · η` with `η = -fiber_trace + (1 - δ) θ_L`. The integrand is
//! `1_q(signature(γ)) · det(γ)`. The `(1/r)^n` and `n!`·volume constants
//! are dropped identically here and in [`closed_form`].
//!
//! Sampling is split into fixed blocks with their own random streams (see
//! [`crate::sampling`]); per-block statistics are pooled in block order, so
//! results do not depend on how many workers run the blocks.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::hermitian::{eta_form, signature, top_power, BaseScenario, HermitianForm, Signature, DEFAULT_EIGEN_TOL};
use crate::linalg::ln_factorial;
use crate::metrics::{fiber_weight, harmonic, CurvatureSampler, MetricKind, MetricSpec};
use crate::sampling::{block_count, block_rng, fiber_draws, BasePicker, BLOCK_SIZE};

/// Smallest sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 1000;

/// A verdict is positive when `mean - POSITIVITY_SIGMAS · stderr > 0`.
pub const POSITIVITY_SIGMAS: f64 = 3.0;

/// Relative CI half-width below which a run counts as converged.
pub const CONVERGENCE_TOL: f64 = 0.05;

/// Which eigenvalue-index set the integral runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    /// Exactly `q` negative eigenvalues and none within tolerance of zero.
    Exactly(usize),
    /// At most `q` negative eigenvalues and none within tolerance of zero.
    AtMost(usize),
}

impl QMode {
    pub fn q(&self) -> usize {
        match *self {
            QMode::Exactly(q) | QMode::AtMost(q) => q,
        }
    }

    pub fn indicator(&self, sig: Signature) -> bool {
        sig.zero == 0
            && match *self {
                QMode::Exactly(q) => sig.negative == q,
                QMode::AtMost(q) => sig.negative <= q,
            }
    }
}

impl Default for QMode {
    fn default() -> Self {
        QMode::AtMost(1)
    }
}

impl fmt::Display for QMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QMode::Exactly(q) => write!(f, "exact:{q}"),
            QMode::AtMost(q) => write!(f, "atmost:{q}"),
        }
    }
}

impl FromStr for QMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSampling(format!("q mode {s:?} is not exact:Q or atmost:Q"));
        let (mode, q) = s.split_once(':').ok_or_else(bad)?;
        let q: usize = q.parse().map_err(|_| bad())?;
        match mode {
            "exact" => Ok(QMode::Exactly(q)),
            "atmost" => Ok(QMode::AtMost(q)),
            _ => Err(bad()),
        }
    }
}

/// Mean, second central moment and count, pooled with Chan's formula.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    pub count: usize,
    pub mean: f64,
    pub m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &RunningStats) -> RunningStats {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        RunningStats {
            count: self.count + other.count,
            mean: self.mean + d * other.count as f64 / n,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / n,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseEstimate {
    pub q_mode: QMode,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub k: usize,
    pub n: usize,
    pub r: usize,
    pub metric_kind: MetricKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub estimate: MorseEstimate,
    pub prefactor: f64,
    pub lower_bound: f64,
    pub positive: bool,
}

/// Sample count, seed and number of parallel workers of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub chunks: usize,
}

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        McConfig { samples, seed, chunks: 1 }
    }

    pub fn with_chunks(self, chunks: usize) -> Self {
        McConfig { chunks, ..self }
    }
}

/// The combinatorial constant `(n+kr-1)! / (n! (k!)^r (kr-1)!) · (kr)^{-n}`.
pub fn prefactor(n: usize, k: usize, r: usize) -> Result<f64> {
    if n == 0 || k == 0 || r == 0 {
        return Err(Error::InvalidSampling("prefactor needs n, k, r >= 1".into()));
    }
    let top = n + k * r - 1;
    if top > 170 {
        return Err(Error::Overflow(format!("n + kr - 1 = {top} exceeds 170")));
    }
    let kr = (k * r) as f64;
    let ln = ln_factorial(top) - ln_factorial(n) - r as f64 * ln_factorial(k) - ln_factorial(k * r - 1) - n as f64 * kr.ln();
    Ok(ln.exp())
}

/// Prefactor reported for each metric kind; the kinds use different
/// normalizations and their values are never compared with each other.
///
/// * `DemaillyGG`: [`prefactor`]
/// * `Test2Invariant`: `(ln k)^n / (n! (k!)^r)`
/// * `Test1Wronskian`, `SymPowWronskian`: `(n + k(r-1))! / (n! (k(r-1))!)`
pub fn metric_prefactor(kind: MetricKind, n: usize, k: usize, r: usize) -> Result<f64> {
    match kind {
        MetricKind::DemaillyGG => prefactor(n, k, r),
        MetricKind::Test2Invariant => {
            if n == 0 || k == 0 || r == 0 {
                return Err(Error::InvalidSampling("prefactor needs n, k, r >= 1".into()));
            }
            let lk = (k as f64).ln();
            Ok((n as f64 * lk.ln() - ln_factorial(n) - r as f64 * ln_factorial(k)).exp())
        }
        MetricKind::Test1Wronskian | MetricKind::SymPowWronskian { .. } => {
            let v = k * (r.saturating_sub(1));
            if n + v > 170 {
                return Err(Error::Overflow(format!("n + k(r-1) = {} exceeds 170", n + v)));
            }
            Ok((ln_factorial(n + v) - ln_factorial(n) - ln_factorial(v)).exp())
        }
    }
}

/// One evaluated sample: top power of `γ` and its signature.
#[derive(Debug, Clone, Copy)]
struct Draw {
    det: f64,
    sig: Signature,
}

struct Engine {
    samplers: Vec<CurvatureSampler>,
    picker: BasePicker,
    twist: HermitianForm,
    r: f64,
    samples: usize,
    seed: u64,
}

impl Engine {
    fn new(spec: &MetricSpec, sc: &BaseScenario, cfg: &McConfig) -> Result<Self> {
        if cfg.samples < MIN_SAMPLES {
            return Err(Error::InvalidSampling(format!(
                "{} samples requested, at least {} required",
                cfg.samples, MIN_SAMPLES
            )));
        }
        if cfg.chunks == 0 {
            return Err(Error::InvalidSampling("chunk count must be positive".into()));
        }
        let samplers = sc
            .samples()
            .iter()
            .map(|s| CurvatureSampler::new(spec, &s.model))
            .collect::<Result<_>>()?;
        let weights: Vec<f64> = sc.samples().iter().map(|s| s.weight).collect();
        Ok(Engine {
            samplers,
            picker: BasePicker::new(&weights)?,
            twist: sc.theta_l().scale(fiber_weight(spec) * (1.0 - sc.delta())),
            r: sc.r() as f64,
            samples: cfg.samples,
            seed: cfg.seed,
        })
    }

    fn block(&self, b: usize) -> Vec<Draw> {
        let mut rng = block_rng(self.seed, b as u64);
        let start = b * BLOCK_SIZE;
        let len = BLOCK_SIZE.min(self.samples - start);
        (0..len)
            .map(|_| {
                let sampler = &self.samplers[self.picker.pick(&mut rng)];
                let draws = fiber_draws(&mut rng, sampler.dims());
                let gamma = self.twist.sub(&sampler.sample_unchecked(&draws).scale(self.r));
                Draw {
                    det: top_power(&gamma),
                    sig: signature(&gamma, DEFAULT_EIGEN_TOL),
                }
            })
            .collect()
    }

    /// All blocks, in block order, evaluated by `chunks` workers.
    fn run(&self, chunks: usize) -> Vec<Vec<Draw>> {
        let blocks = block_count(self.samples);
        let per = blocks.div_ceil(chunks.max(1)).max(1);
        let groups: Vec<(usize, usize)> = (0..blocks).step_by(per).map(|s| (s, (s + per).min(blocks))).collect();
        groups
            .into_par_iter()
            .map(|(lo, hi)| (lo..hi).map(|b| self.block(b)).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }
}

fn check_q(q: &QMode, n: usize) -> Result<()> {
    if q.q() > n {
        return Err(Error::InvalidSampling(format!("q = {} exceeds n = {}", q.q(), n)));
    }
    Ok(())
}

fn value(q: &QMode, d: &Draw) -> f64 {
    if q.indicator(d.sig) {
        d.det
    } else {
        0.0
    }
}

/// Several q-modes estimated from one shared sample stream.
pub fn fiber_mc_multi(spec: &MetricSpec, sc: &BaseScenario, q_modes: &[QMode], cfg: &McConfig) -> Result<Vec<MorseEstimate>> {
    for q in q_modes {
        check_q(q, sc.n())?;
    }
    let engine = Engine::new(spec, sc, cfg)?;
    let blocks = engine.run(cfg.chunks);
    Ok(q_modes
        .iter()
        .map(|q| {
            let stats = blocks.iter().fold(RunningStats::default(), |acc, block| {
                let mut s = RunningStats::default();
                for d in block {
                    s.push(value(q, d));
                }
                acc.merge(&s)
            });
            MorseEstimate {
                q_mode: *q,
                mean: stats.mean,
                stderr: stats.stderr(),
                samples: stats.count,
                k: spec.k,
                n: sc.n(),
                r: sc.r(),
                metric_kind: spec.kind,
            }
        })
        .collect())
}

/// Monte Carlo estimate of `∫ 1_q(γ) γ^n` over the scenario and the fiber
/// sphere variables.
pub fn fiber_mc(spec: &MetricSpec, sc: &BaseScenario, q_mode: QMode, cfg: &McConfig) -> Result<MorseEstimate> {
    Ok(fiber_mc_multi(spec, sc, &[q_mode], cfg)?.remove(0))
}

/// Per-sample integrand values in sample order.
pub fn fiber_values(spec: &MetricSpec, sc: &BaseScenario, q_mode: QMode, cfg: &McConfig) -> Result<Vec<f64>> {
    check_q(&q_mode, sc.n())?;
    let engine = Engine::new(spec, sc, cfg)?;
    Ok(engine.run(cfg.chunks).iter().flatten().map(|d| value(&q_mode, d)).collect())
}

/// `weight^n Σ_x w_x 1_q(η(x)) det η(x)`.
pub fn closed_form_weighted(sc: &BaseScenario, weight: f64, q_mode: QMode) -> Result<f64> {
    let n = sc.n();
    let mut acc = 0.0;
    for (i, s) in sc.samples().iter().enumerate() {
        let eta = eta_form(sc, i)?;
        if q_mode.indicator(signature(&eta, DEFAULT_EIGEN_TOL)) {
            acc += s.weight * top_power(&eta);
        }
    }
    Ok(weight.powi(n as i32) * acc)
}

/// The limit object `H_k^n ∫ 1_{η,q} η^n` over the scenario's base measure.
pub fn closed_form(sc: &BaseScenario, k: usize, q_mode: QMode) -> Result<f64> {
    closed_form_weighted(sc, harmonic(k), q_mode)
}

/// [`closed_form_weighted`] with the fiber weight of `spec`.
pub fn closed_form_for(spec: &MetricSpec, sc: &BaseScenario, q_mode: QMode) -> Result<f64> {
    closed_form_weighted(sc, fiber_weight(spec), q_mode)
}

pub fn verdict(estimate: MorseEstimate) -> Result<Verdict> {
    let prefactor = metric_prefactor(estimate.metric_kind, estimate.n, estimate.k, estimate.r)?;
    let positive = estimate.mean - POSITIVITY_SIGMAS * estimate.stderr > 0.0;
    let lower_bound = if positive { prefactor * estimate.mean } else { 0.0 };
    Ok(Verdict {
        estimate,
        prefactor,
        lower_bound,
        positive,
    })
}

/// Coefficient of the `m^{n+kr-1}` section growth implied by an
/// `at_most(1)` verdict; zero unless the verdict is positive.
pub fn growth_bound(v: &Verdict) -> Result<f64> {
    if v.estimate.q_mode != QMode::AtMost(1) {
        return Err(Error::InvalidSampling(format!(
            "growth bound needs an atmost:1 estimate, got {}",
            v.estimate.q_mode
        )));
    }
    Ok(if v.positive { v.prefactor * v.estimate.mean } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub delta: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaScan {
    pub rows: Vec<DeltaRow>,
    /// Largest grid value with a positive verdict.
    pub delta_star: Option<f64>,
    /// `ln(k)/k`, reported for comparison only.
    pub log_k_over_k: f64,
}

/// Runs [`fiber_mc`] at each twist strength of an ascending grid, reusing
/// the seed so every grid point sees the same random stream.
pub fn delta_scan(spec: &MetricSpec, sc: &BaseScenario, grid: &[f64], q_mode: QMode, cfg: &McConfig) -> Result<DeltaScan> {
    if grid.is_empty() {
        return Err(Error::InvalidSampling("empty delta grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSampling("delta grid must be strictly ascending".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &delta in grid {
        let twisted = sc.with_delta(delta)?;
        let v = verdict(fiber_mc(spec, &twisted, q_mode, cfg)?)?;
        rows.push(DeltaRow { delta, verdict: v });
    }
    let delta_star = rows.iter().rev().find(|r| r.verdict.positive).map(|r| r.delta);
    Ok(DeltaScan {
        rows,
        delta_star,
        log_k_over_k: (spec.k as f64).ln() / spec.k as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub metric_kind: MetricKind,
    pub q_mode: QMode,
    pub samples: usize,
    pub batches: usize,
    pub batch_means: Vec<f64>,
    pub grand_mean: f64,
    /// Plain standard error of the grand mean, as in [`MorseEstimate`].
    pub stderr: f64,
    /// Half-width of the 95% Student-t interval over batch means.
    pub ci_half_width: f64,
    /// `ci_half_width / |grand_mean|`.
    pub ratio: f64,
    pub converged: bool,
}

/// Batch-means convergence diagnostic: the stream is split into `batches`
/// contiguous batches and the run is converged when the 95% CI half-width
/// of the grand mean is within [`CONVERGENCE_TOL`] of its magnitude.
pub fn convergence_diag(spec: &MetricSpec, sc: &BaseScenario, q_mode: QMode, cfg: &McConfig, batches: usize) -> Result<ConvergenceReport> {
    if batches < 10 {
        return Err(Error::InvalidSampling(format!("{batches} batches requested, at least 10 required")));
    }
    if cfg.samples / batches < 100 {
        return Err(Error::InvalidSampling("fewer than 100 samples per batch".into()));
    }
    let values = fiber_values(spec, sc, q_mode, cfg)?;
    let n = values.len();
    let batch_means: Vec<f64> = (0..batches)
        .map(|b| {
            let chunk = &values[b * n / batches..(b + 1) * n / batches];
            chunk.iter().sum::<f64>() / chunk.len() as f64
        })
        .collect();
    let mut all = RunningStats::default();
    values.iter().for_each(|&v| all.push(v));
    let mut bs = RunningStats::default();
    batch_means.iter().for_each(|&v| bs.push(v));
    let t = StudentsT::new(0.0, 1.0, (batches - 1) as f64)
        .map_err(|e| Error::InvalidSampling(e.to_string()))?
        .inverse_cdf(0.975);
    let ci_half_width = t * bs.stderr();
    let (ratio, converged) = if ci_half_width == 0.0 {
        (0.0, true)
    } else {
        let ratio = ci_half_width / all.mean.abs();
        (ratio, ratio <= CONVERGENCE_TOL)
    };
    Ok(ConvergenceReport {
        metric_kind: spec.kind,
        q_mode,
        samples: n,
        batches,
        batch_means,
        grand_mean: all.mean,
        stderr: all.stderr(),
        ci_half_width,
        ratio,
        converged,
    })
}
