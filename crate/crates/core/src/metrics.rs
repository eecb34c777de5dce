//! The four jet-metric families and their base curvature forms.
//!
//! | kind | metric on `O(-1)` | weighted degree at `z = 0` |
//! |------|-------------------|----------------------------|
//! | `DemaillyGG` | `(Σ ε_s ‖ξ_s‖^{2p/s})^{1/p}` | 2 |
//! | `Test1Wronskian` | `(Σ ε_s ‖W_s‖^{2p/(s(s+1))})^{1/p}` | 1 |
//! | `Test2Invariant` | `(Σ ε_s ‖η_s‖^{p/(2s-1)})^{1/p} · avg_v |⟨ξ_1, v⟩|²` | 2 |
//! | `SymPowWronskian` | `(Σ ε_s (Σ |W(u_1∘f,…,u_s∘f)|²)^{p/(s(s+1))})^{1/p}` | 1 |
//!
//! All norms use `h(z) = δ - c z z̄`; Wronskian norms are the induced Gram
//! determinants, which reduce to sums of squared minors at `z = 0`.
//! Evaluation happens in log space because `p` grows like `lcm(1..k)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{fiber_trace, sym_power_curvature, sym_power_dim, CurvatureModel, HermitianForm, SymPowerCurvature};
use crate::jet::{normalize_jet, pullback_jet, Jet, Polynomial};
use crate::linalg::{factorial, lcm, multi_factorial, multi_indices};

/// Default base of the geometric schedule `ε_s = ε₀^s`.
pub const DEFAULT_EPS0: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    DemaillyGG,
    Test1Wronskian,
    Test2Invariant,
    SymPowWronskian { l_max: usize },
}

impl MetricKind {
    /// Short name used on the command line and in CSV output.
    pub fn short_name(&self) -> &'static str {
        match self {
            MetricKind::DemaillyGG => "gg",
            MetricKind::Test1Wronskian => "test1",
            MetricKind::Test2Invariant => "test2",
            MetricKind::SymPowWronskian { .. } => "sympow",
        }
    }

    /// `p` must be a multiple of this for the summand exponents to be integers.
    pub fn exponent_base(&self, k: usize) -> Result<u64> {
        let overflow = || Error::Overflow(format!("exponent base for k = {k} overflows u64"));
        let mut acc = 1u64;
        for s in 1..=k as u64 {
            let term = match self {
                MetricKind::DemaillyGG => s,
                MetricKind::Test1Wronskian | MetricKind::SymPowWronskian { .. } => s * (s + 1),
                MetricKind::Test2Invariant => 2 * s - 1,
            };
            acc = lcm(acc, term).ok_or_else(overflow)?;
        }
        Ok(acc)
    }
}

/// `lcm(1, ..., k)`.
pub fn lcm_exponent(k: usize) -> u64 {
    MetricKind::DemaillyGG.exponent_base(k).expect("lcm(1..k) fits in u64 for every supported k")
}

/// `H_k = 1 + 1/2 + ... + 1/k`.
pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|s| 1.0 / s as f64).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub k: usize,
    pub p: u64,
    pub epsilons: Vec<f64>,
}

impl MetricSpec {
    pub fn new(kind: MetricKind, k: usize, p: u64, epsilons: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if k == 0 {
            return bad("k must be at least 1".into());
        }
        if let MetricKind::SymPowWronskian { l_max } = kind {
            if l_max == 0 {
                return bad("l_max must be at least 1".into());
            }
        }
        let base = kind.exponent_base(k)?;
        if p == 0 || !p.is_multiple_of(base) {
            return bad(format!("p = {p} is not a positive multiple of {base}"));
        }
        if epsilons.len() != k {
            return bad(format!("{} epsilons given for k = {}", epsilons.len(), k));
        }
        if epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return bad("epsilons must lie in (0, 1]".into());
        }
        if epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilons must be strictly decreasing".into());
        }
        Ok(MetricSpec { kind, k, p, epsilons })
    }

    /// Smallest admissible `p` and the schedule `ε_s = eps0^s`.
    pub fn auto(kind: MetricKind, k: usize, eps0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(Error::InvalidSpec(format!("eps0 = {eps0} must lie in (0, 1)")));
        }
        let p = kind.exponent_base(k)?;
        MetricSpec::new(kind, k, p, (1..=k as i32).map(|s| eps0.powi(s)).collect())
    }

    /// Number of symmetric powers entering the SymPow metric.
    fn sym_levels(&self) -> usize {
        match self.kind {
            MetricKind::SymPowWronskian { l_max } => l_max.min(self.k),
            _ => 0,
        }
    }
}

fn hnorm2(h: &DMatrix<Complex64>, v: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..v.len() {
        for b in 0..v.len() {
            acc += h[(a, b)] * v[a] * v[b].conj();
        }
    }
    acc.re
}

/// Gram determinant `det ⟨w_a, w_b⟩_h`, the squared h-norm of `w_1 ∧ ... ∧ w_s`.
fn gram_det(h: &DMatrix<Complex64>, vecs: &[Vec<Complex64>]) -> f64 {
    let s = vecs.len();
    let g = DMatrix::from_fn(s, s, |a, b| {
        let mut acc = Complex64::new(0.0, 0.0);
        for al in 0..h.nrows() {
            for be in 0..h.ncols() {
                acc += h[(al, be)] * vecs[a][al] * vecs[b][be].conj();
            }
        }
        acc
    });
    crate::linalg::det((0..s).map(|a| (0..s).map(|b| g[(a, b)]).collect()).collect()).re
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `ln ε + e · ln q`, or `-inf` when `q` vanishes.
fn log_term(eps: f64, exponent: f64, q: f64) -> Result<f64> {
    if q < -1e-12 {
        return Err(Error::Overflow("metric is not positive definite at this base point".into()));
    }
    if q <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(eps.ln() + exponent * q.ln())
}

/// Orthonormal coordinate functions `u_α = sqrt(s!/α!) z^α` on `S^s V`.
pub fn sym_power_frame_polynomials(r: usize, s: usize) -> Vec<Polynomial> {
    multi_indices(r, s)
        .into_iter()
        .map(|alpha| {
            let w = (factorial(s) / multi_factorial(&alpha)).sqrt();
            Polynomial::monomial(alpha, Complex64::new(w, 0.0))
        })
        .collect()
}

fn check_point(m: &CurvatureModel, z: &[Complex64], j: &Jet, k: usize) -> Result<()> {
    if z.len() != m.n() {
        return Err(Error::DimensionMismatch(format!("base point of length {} for n = {}", z.len(), m.n())));
    }
    if j.rank() != m.r() {
        return Err(Error::DimensionMismatch(format!("jet rank {} for fiber rank {}", j.rank(), m.r())));
    }
    if j.order() != k {
        return Err(Error::DimensionMismatch(format!("jet order {} for metric order {}", j.order(), k)));
    }
    Ok(())
}

fn log_evaluate_with(
    kind: MetricKind,
    k: usize,
    p: u64,
    eps: &[f64],
    m: &CurvatureModel,
    z: &[Complex64],
    j: &Jet,
) -> Result<f64> {
    check_point(m, z, j, k)?;
    let pf = p as f64;
    let h = m.metric_at(z);
    let mut terms = Vec::with_capacity(k);
    let mut extra = 0.0;
    match kind {
        MetricKind::DemaillyGG => {
            for s in 1..=k {
                terms.push(log_term(eps[s - 1], pf / s as f64, hnorm2(&h, j.row(s)))?);
            }
        }
        MetricKind::Test1Wronskian => {
            for s in 1..=k.min(m.r()) {
                let rows: Vec<Vec<Complex64>> = (1..=s).map(|l| j.derivative_row(l)).collect();
                terms.push(log_term(eps[s - 1], pf / (s * (s + 1)) as f64, gram_det(&h, &rows))?);
            }
        }
        MetricKind::Test2Invariant => {
            let eta = normalize_jet(j)?.eta;
            for s in 1..=k {
                // ‖η_s‖^{p/(2s-1)} = (‖η_s‖²)^{p/(2(2s-1))}
                terms.push(log_term(eps[s - 1], pf / (2 * (2 * s - 1)) as f64, hnorm2(&h, eta.row(s)))?);
            }
            // sphere average of |⟨ξ_1, v⟩|² over unit v is ‖ξ_1‖²/r
            let lead = hnorm2(&h, j.row(1)) / m.r() as f64;
            extra = log_term(1.0, 1.0, lead)?;
        }
        MetricKind::SymPowWronskian { l_max } => {
            for s in 1..=l_max.min(k) {
                let sym = sym_power_curvature(m, s)?;
                let hs = sym.curvature.metric_at(z);
                let curves: Vec<_> = sym_power_frame_polynomials(m.r(), s)
                    .iter()
                    .map(|u| pullback_jet(u, j))
                    .collect::<Result<_>>()?;
                let rows: Vec<Vec<Complex64>> = (1..=s)
                    .map(|a| curves.iter().map(|g| g.derivative(a)).collect())
                    .collect();
                terms.push(log_term(eps[s - 1], pf / (s * (s + 1)) as f64, gram_det(&hs, &rows))?);
            }
        }
    }
    Ok(log_sum_exp(&terms) / pf + extra)
}

/// `ln |(z, ξ)|`; `-inf` on the singular locus of the metric.
pub fn log_evaluate(spec: &MetricSpec, m: &CurvatureModel, z: &[Complex64], j: &Jet) -> Result<f64> {
    log_evaluate_with(spec.kind, spec.k, spec.p, &spec.epsilons, m, z, j)
}

/// The metric value `|(z, ξ)|`.
pub fn evaluate(spec: &MetricSpec, m: &CurvatureModel, z: &[Complex64], j: &Jet) -> Result<f64> {
    let v = log_evaluate(spec, m, z, j)?.exp();
    if !v.is_finite() {
        return Err(Error::Overflow("metric value overflows f64; use log_evaluate".into()));
    }
    Ok(v)
}

/// Fiber dimensions of the unit draws consumed by one curvature sample.
pub fn draw_dims(spec: &MetricSpec, r: usize) -> Result<Vec<usize>> {
    Ok(match spec.kind {
        MetricKind::DemaillyGG | MetricKind::Test1Wronskian => vec![r; spec.k],
        MetricKind::Test2Invariant => vec![r; spec.k - 1],
        MetricKind::SymPowWronskian { .. } => (1..=spec.sym_levels())
            .map(|s| sym_power_dim(r, s))
            .collect::<Result<_>>()?,
    })
}

/// The constant `ω` with `E[curvature sample] = (ω / r) · fiber_trace`
/// under uniform draws.
pub fn fiber_weight(spec: &MetricSpec) -> f64 {
    match spec.kind {
        MetricKind::DemaillyGG | MetricKind::Test2Invariant => harmonic(spec.k),
        MetricKind::Test1Wronskian => harmonic(spec.k + 1) - 1.0,
        MetricKind::SymPowWronskian { .. } => harmonic(spec.sym_levels() + 1) - 1.0,
    }
}

/// Horizontal curvature of one fiber sample, with the tensors it needs
/// precomputed for repeated use.
///
/// * `DemaillyGG`: `Σ_s (1/s) γ(u_s)`
/// * `Test1Wronskian`: `Σ_s 1/(s(s+1)) Σ_{l≤s} γ(u_l)`
/// * `Test2Invariant`: `(1/r) T + Σ_{s=2..k} (1/s) γ(u_s)`
/// * `SymPowWronskian`: `Σ_s 1/(s(s+1)) γ_{S^s V}(U_s)`
#[derive(Debug, Clone)]
pub struct CurvatureSampler {
    spec: MetricSpec,
    model: CurvatureModel,
    dims: Vec<usize>,
    sym: Vec<SymPowerCurvature>,
    averaged: Option<HermitianForm>,
}

impl CurvatureSampler {
    pub fn new(spec: &MetricSpec, model: &CurvatureModel) -> Result<Self> {
        let dims = draw_dims(spec, model.r())?;
        let sym = (1..=spec.sym_levels())
            .map(|s| sym_power_curvature(model, s))
            .collect::<Result<_>>()?;
        let averaged = match spec.kind {
            MetricKind::Test2Invariant => Some(fiber_trace(model).scale(1.0 / model.r() as f64)),
            _ => None,
        };
        Ok(CurvatureSampler {
            spec: spec.clone(),
            model: model.clone(),
            dims,
            sym,
            averaged,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn sample(&self, draws: &[Vec<Complex64>]) -> Result<HermitianForm> {
        if draws.len() != self.dims.len() {
            return Err(Error::InvalidSampling(format!(
                "{} draws supplied, {} required",
                draws.len(),
                self.dims.len()
            )));
        }
        for (d, &dim) in draws.iter().zip(&self.dims) {
            if d.len() != dim {
                return Err(Error::InvalidSampling(format!("draw of length {} where {} required", d.len(), dim)));
            }
            let norm = d.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::NonUnitVector(norm));
            }
        }
        Ok(self.sample_unchecked(draws))
    }

    /// [`sample`](Self::sample) without shape or norm validation.
    pub fn sample_unchecked(&self, draws: &[Vec<Complex64>]) -> HermitianForm {
        let n = self.model.n();
        let k = self.spec.k;
        let mut acc = HermitianForm::zero(n);
        match self.spec.kind {
            MetricKind::DemaillyGG => {
                for (s, u) in draws.iter().enumerate() {
                    acc = acc.add(&self.model.contract(u).scale(1.0 / (s + 1) as f64));
                }
            }
            MetricKind::Test1Wronskian => {
                // Σ_{s=l..k} 1/(s(s+1)) = 1/l - 1/(k+1)
                for (l0, u) in draws.iter().enumerate() {
                    let w = 1.0 / (l0 + 1) as f64 - 1.0 / (k + 1) as f64;
                    acc = acc.add(&self.model.contract(u).scale(w));
                }
            }
            MetricKind::Test2Invariant => {
                acc = self.averaged.clone().expect("set for Test2");
                for (i, u) in draws.iter().enumerate() {
                    acc = acc.add(&self.model.contract(u).scale(1.0 / (i + 2) as f64));
                }
            }
            MetricKind::SymPowWronskian { .. } => {
                for (s0, (u, sym)) in draws.iter().zip(&self.sym).enumerate() {
                    let s = (s0 + 1) as f64;
                    acc = acc.add(&sym.curvature.contract(u).scale(1.0 / (s * (s + 1.0))));
                }
            }
        }
        acc
    }
}

/// One-shot form of [`CurvatureSampler::sample`].
pub fn curvature_sampler(spec: &MetricSpec, m: &CurvatureModel, draws: &[Vec<Complex64>]) -> Result<HermitianForm> {
    CurvatureSampler::new(spec, m)?.sample(draws)
}

/// Step of the central differences in [`curvature_fd_check`].
pub const FD_STEP: f64 = 1e-3;

/// Compares the curvature of the tautological line, `-∂∂̄ ln|(z, ξ)|` at
/// `z = 0` (central differences), with the expansion
/// `Σ_s (1/s) w_s γ(ξ_s/‖ξ_s‖)`, `w_s = ‖ξ_s‖^{2p/s} / Σ_t ‖ξ_t‖^{2p/t}`.
///
/// Only defined for `DemaillyGG`; all `ε_s` are set to 1. Returns the
/// largest entry deviation relative to the largest entry of the expansion.
pub fn curvature_fd_check(spec: &MetricSpec, m: &CurvatureModel, j: &Jet) -> Result<f64> {
    if spec.kind != MetricKind::DemaillyGG {
        return Err(Error::InvalidSpec("finite-difference check is defined for DemaillyGG only".into()));
    }
    let k = spec.k;
    let n = m.n();
    check_point(m, &vec![Complex64::new(0.0, 0.0); n], j, k)?;
    let norms: Vec<f64> = (1..=k).map(|s| j.row(s).iter().map(|x| x.norm_sqr()).sum::<f64>()).collect();
    if let Some(s) = norms.iter().position(|&x| x == 0.0) {
        return Err(Error::VanishingRow(s + 1));
    }

    let pf = spec.p as f64;
    let logs: Vec<f64> = norms.iter().enumerate().map(|(s, &q)| pf / (s + 1) as f64 * q.ln()).collect();
    let lse = log_sum_exp(&logs);
    let mut formula = HermitianForm::zero(n);
    for s in 1..=k {
        let w = (logs[s - 1] - lse).exp();
        let norm = norms[s - 1].sqrt();
        let u: Vec<Complex64> = j.row(s).iter().map(|x| x / norm).collect();
        formula = formula.add(&m.contract(&u).scale(w / s as f64));
    }

    let ones = vec![1.0; k];
    let f = |x: &[f64]| -> Result<f64> {
        let z: Vec<Complex64> = (0..n).map(|i| Complex64::new(x[i], x[n + i])).collect();
        log_evaluate_with(MetricKind::DemaillyGG, k, spec.p, &ones, m, &z, j)
    };
    let h = FD_STEP;
    let f0 = f(&vec![0.0; 2 * n])?;
    // second partials in the real coordinates (x_1..x_n, y_1..y_n)
    let mut d2 = vec![vec![0.0; 2 * n]; 2 * n];
    for a in 0..2 * n {
        for b in a..2 * n {
            let at = |sa: f64, sb: f64| {
                let mut x = vec![0.0; 2 * n];
                x[a] += sa * h;
                x[b] += sb * h;
                f(&x)
            };
            let v = if a == b {
                (at(1.0, 0.0)? - 2.0 * f0 + at(-1.0, 0.0)?) / (h * h)
            } else {
                (at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h)
            };
            d2[a][b] = v;
            d2[b][a] = v;
        }
    }
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for jj in 0..n {
            // ∂_{z_i} ∂_{z̄_j} = ¼[(∂x_i∂x_j + ∂y_i∂y_j) + i(∂x_i∂y_j - ∂y_i∂x_j)]
            let re = 0.25 * (d2[i][jj] + d2[n + i][n + jj]);
            let im = 0.25 * (d2[i][n + jj] - d2[n + i][jj]);
            let curvature = -Complex64::new(re, im);
            dev = dev.max((curvature - formula.get(i, jj)).norm());
        }
    }
    if dev == 0.0 {
        return Ok(0.0);
    }
    Ok(dev / formula.max_abs().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::weighted_scale;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_jet() -> Jet {
        Jet::new(vec![
            vec![c(0.8, 0.1), c(-0.3, 0.5)],
            vec![c(0.2, -0.4), c(0.6, 0.3)],
            vec![c(-0.5, 0.2), c(0.1, 0.9)],
        ])
        .unwrap()
    }

    fn hermitian_model(n: usize, r: usize) -> CurvatureModel {
        let raw = |i: usize, j: usize, a: usize, b: usize| {
            let t = (i * 5 + j * 2 + a * 3 + b * 7 + 1) as f64;
            c((t * 1.3).sin(), (t * 0.7).cos() * 0.5)
        };
        CurvatureModel::from_fn(n, r, |i, j, a, b| (raw(i, j, a, b) + raw(j, i, b, a).conj()) * 0.5).unwrap()
    }

    #[test]
    fn lcm_and_harmonic() {
        assert_eq!(lcm_exponent(1), 1);
        assert_eq!(lcm_exponent(3), 6);
        assert_eq!(lcm_exponent(4), 12);
        assert_eq!(harmonic(1), 1.0);
        assert_eq!(harmonic(2), 1.5);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
        assert_eq!(MetricKind::Test1Wronskian.exponent_base(3).unwrap(), 12);
        assert_eq!(MetricKind::Test2Invariant.exponent_base(3).unwrap(), 15);
    }

    #[test]
    fn spec_validation() {
        assert!(MetricSpec::new(MetricKind::DemaillyGG, 3, 5, vec![0.1, 0.01, 0.001]).is_err());
        assert!(MetricSpec::new(MetricKind::DemaillyGG, 3, 12, vec![0.1, 0.1, 0.001]).is_err());
        assert!(MetricSpec::new(MetricKind::DemaillyGG, 3, 12, vec![0.1, 0.01]).is_err());
        assert!(MetricSpec::new(MetricKind::DemaillyGG, 3, 12, vec![1.0, 0.5, 0.25]).is_ok());
        assert!(MetricSpec::new(MetricKind::Test1Wronskian, 2, 2, vec![1.0, 0.5]).is_err());
        assert!(MetricSpec::auto(MetricKind::SymPowWronskian { l_max: 0 }, 2, 0.1).is_err());
        let s = MetricSpec::auto(MetricKind::DemaillyGG, 4, 0.1).unwrap();
        assert_eq!(s.p, 12);
        assert!((s.epsilons[3] - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn gg_unit_first_row() {
        let spec = MetricSpec::new(MetricKind::DemaillyGG, 2, 2, vec![1.0, 0.5]).unwrap();
        let j = Jet::new(vec![vec![c(0.6, 0.0), c(0.0, 0.8)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let m = hermitian_model(2, 2);
        let v = evaluate(&spec, &m, &[c(0.0, 0.0), c(0.0, 0.0)], &j).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn homogeneity_degrees() {
        let m = hermitian_model(2, 2);
        let z = [c(0.0, 0.0); 2];
        let j = sample_jet();
        let lam = c(1.3, -0.4);
        let cases = [
            (MetricKind::DemaillyGG, 2.0),
            (MetricKind::Test1Wronskian, 1.0),
            (MetricKind::Test2Invariant, 2.0),
            (MetricKind::SymPowWronskian { l_max: 2 }, 1.0),
        ];
        for (kind, degree) in cases {
            let spec = MetricSpec::auto(kind, 3, 0.1).unwrap();
            let a = evaluate(&spec, &m, &z, &j).unwrap();
            let b = evaluate(&spec, &m, &z, &weighted_scale(lam, &j)).unwrap();
            assert!((b / a - lam.norm().powf(degree)).abs() < 1e-10, "{kind:?}");
        }
    }

    #[test]
    fn test1_only_first_term_on_proportional_jet() {
        let v = [c(0.3, 0.4), c(1.0, -0.2)];
        let rows: Vec<Vec<Complex64>> = (1..=3).map(|s| v.iter().map(|x| x * c(s as f64, 1.0)).collect()).collect();
        let j = Jet::new(rows).unwrap();
        let spec = MetricSpec::auto(MetricKind::Test1Wronskian, 3, 0.1).unwrap();
        let m = hermitian_model(1, 2);
        let val = log_evaluate(&spec, &m, &[c(0.0, 0.0)], &j).unwrap();
        let norm2: f64 = j.row(1).iter().map(|x| x.norm_sqr()).sum();
        // only ε_1 (‖ξ_1‖²)^{p/2}
        let expect = (0.1f64.ln() + spec.p as f64 / 2.0 * norm2.ln()) / spec.p as f64;
        assert!((val - expect).abs() < 1e-12);
        let zero = Jet::zero(3, 2).unwrap();
        assert_eq!(evaluate(&spec, &m, &[c(0.0, 0.0)], &zero).unwrap(), 0.0);
    }

    #[test]
    fn test2_degenerate_signalled() {
        let spec = MetricSpec::auto(MetricKind::Test2Invariant, 2, 0.1).unwrap();
        let j = Jet::new(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let m = hermitian_model(1, 2);
        assert_eq!(
            evaluate(&spec, &m, &[c(0.0, 0.0)], &j),
            Err(Error::DegenerateNormalization)
        );
    }

    #[test]
    fn sympow_first_level_matches_test1() {
        // S^1 V = V with the coordinate frame, so W(u_α∘f) = ξ_1 components
        let m = hermitian_model(2, 2);
        let j = sample_jet();
        let z = [c(0.05, 0.0), c(0.0, -0.03)];
        let a = MetricSpec::new(MetricKind::SymPowWronskian { l_max: 1 }, 1, 2, vec![1.0]).unwrap();
        let b = MetricSpec::new(MetricKind::Test1Wronskian, 1, 2, vec![1.0]).unwrap();
        let j1 = Jet::new(vec![j.row(1).to_vec()]).unwrap();
        let va = evaluate(&a, &m, &z, &j1).unwrap();
        let vb = evaluate(&b, &m, &z, &j1).unwrap();
        assert!((va - vb).abs() < 1e-13);
    }

    #[test]
    fn sampler_examples() {
        let m = hermitian_model(2, 3);
        let mut u = vec![c(0.0, 0.0); 3];
        u[1] = c(0.0, 1.0);
        let spec = MetricSpec::auto(MetricKind::DemaillyGG, 1, 0.1).unwrap();
        let s = curvature_sampler(&spec, &m, std::slice::from_ref(&u)).unwrap();
        assert!(s.max_abs_diff(&crate::hermitian::gamma_of_vector(&m, &u).unwrap()) < 1e-15);

        let m1 = hermitian_model(2, 1);
        let one = vec![c(1.0, 0.0)];
        let gg = MetricSpec::auto(MetricKind::DemaillyGG, 4, 0.1).unwrap();
        let s = curvature_sampler(&gg, &m1, &vec![one.clone(); 4]).unwrap();
        assert!(s.max_abs_diff(&fiber_trace(&m1).scale(harmonic(4))) < 1e-14);

        let t1 = MetricSpec::auto(MetricKind::Test1Wronskian, 2, 0.1).unwrap();
        let s = curvature_sampler(&t1, &m1, &vec![one.clone(); 2]).unwrap();
        assert!(s.max_abs_diff(&fiber_trace(&m1).scale(5.0 / 6.0)) < 1e-14);
    }

    #[test]
    fn sampler_rejects_bad_draws() {
        let m = hermitian_model(2, 2);
        let spec = MetricSpec::auto(MetricKind::DemaillyGG, 2, 0.1).unwrap();
        let u = vec![c(1.0, 0.0), c(0.0, 0.0)];
        assert!(matches!(
            curvature_sampler(&spec, &m, std::slice::from_ref(&u)),
            Err(Error::InvalidSampling(_))
        ));
        assert!(matches!(
            curvature_sampler(&spec, &m, &[u.clone(), vec![c(2.0, 0.0), c(0.0, 0.0)]]),
            Err(Error::NonUnitVector(_))
        ));
        let sym = MetricSpec::auto(MetricKind::SymPowWronskian { l_max: 2 }, 3, 0.1).unwrap();
        assert_eq!(draw_dims(&sym, 2).unwrap(), vec![2, 3]);
        let t2 = MetricSpec::auto(MetricKind::Test2Invariant, 3, 0.1).unwrap();
        assert_eq!(draw_dims(&t2, 2).unwrap(), vec![2, 2]);
    }

    #[test]
    fn fd_check_zero_and_single_row() {
        let spec = MetricSpec::auto(MetricKind::DemaillyGG, 3, 0.1).unwrap();
        let j = sample_jet();
        assert_eq!(curvature_fd_check(&spec, &CurvatureModel::zero(2, 2), &j).unwrap(), 0.0);
        let m = hermitian_model(2, 2);
        let one = MetricSpec::auto(MetricKind::DemaillyGG, 1, 0.1).unwrap();
        let j1 = Jet::new(vec![j.row(1).to_vec()]).unwrap();
        let dev = curvature_fd_check(&one, &m, &j1).unwrap();
        assert!(dev <= 1e-6, "{dev}");
        assert!(curvature_fd_check(&spec, &m, &j).unwrap() <= 1e-4);
    }

    #[test]
    fn fd_check_rejects() {
        let m = hermitian_model(2, 2);
        let spec = MetricSpec::auto(MetricKind::DemaillyGG, 2, 0.1).unwrap();
        let j = Jet::new(vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(curvature_fd_check(&spec, &m, &j), Err(Error::VanishingRow(2)));
        let t1 = MetricSpec::auto(MetricKind::Test1Wronskian, 2, 0.1).unwrap();
        assert!(matches!(curvature_fd_check(&t1, &m, &j), Err(Error::InvalidSpec(_))));
    }
}
