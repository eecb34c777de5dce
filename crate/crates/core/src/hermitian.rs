//! Curvature data on the fiber bundle `V`, hermitian (1,1)-forms on the
//! base, and the curvature induced on symmetric powers `S^l V`.
//!
//! Sign convention: in an orthonormal frame at the base point the metric on
//! `V` is `h_{λμ}(z) = δ_{λμ} - Σ c_{ijλμ} z_i z̄_j + O(|z|^3)`, and the
//! curvature of `(V, h)` has coefficient tensor `+c`. Consequently
//! `Θ(det V*) = -fiber_trace(c)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{binomial, multi_indices};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default eigenvalue threshold for [`signature`].
pub const DEFAULT_EIGEN_TOL: f64 = 1e-9;

/// Largest symmetric-power fiber dimension accepted by [`sym_power_curvature`].
pub const SYM_POWER_DIM_CAP: u64 = 512;

const HERMITIAN_TOL: f64 = 1e-12;

/// An `n × n` hermitian matrix standing for a real (1,1)-form
/// `i Σ A_ij dz_i ∧ dz̄_j` at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    a: DMatrix<Complex64>,
}

impl HermitianForm {
    pub fn new(a: DMatrix<Complex64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("hermitian form must be square".into()));
        }
        let scale = a.iter().map(|x| x.norm()).fold(1.0, f64::max);
        for i in 0..a.nrows() {
            for j in 0..=i {
                if (a[(i, j)] - a[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::DimensionMismatch(format!(
                        "matrix is not hermitian at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(HermitianForm { a })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("hermitian form must be square".into()));
        }
        HermitianForm::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zero(n: usize) -> Self {
        HermitianForm {
            a: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        HermitianForm {
            a: DMatrix::identity(n, n),
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        HermitianForm {
            a: DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(d[i], 0.0) } else { ZERO }),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.a
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.a[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.a[(i, j)]).collect())
            .collect()
    }

    pub fn scale(&self, f: f64) -> Self {
        HermitianForm { a: &self.a * Complex64::new(f, 0.0) }
    }

    pub fn add(&self, other: &HermitianForm) -> Self {
        HermitianForm { a: &self.a + &other.a }
    }

    pub fn sub(&self, other: &HermitianForm) -> Self {
        HermitianForm { a: &self.a - &other.a }
    }

    /// `U A U*` for a unitary `U`.
    pub fn conjugate_by(&self, u: &DMatrix<Complex64>) -> Self {
        let a = u * &self.a * u.adjoint();
        // re-symmetrize rounding
        let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
        HermitianForm { a: h }
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.a.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn max_abs_diff(&self, other: &HermitianForm) -> f64 {
        self.a
            .iter()
            .zip(other.a.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// Eigenvalue counts of a hermitian form relative to a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

pub fn signature(a: &HermitianForm, tol: f64) -> Signature {
    let mut s = Signature {
        negative: 0,
        zero: 0,
        positive: 0,
    };
    for ev in a.eigenvalues() {
        if ev < -tol {
            s.negative += 1;
        } else if ev > tol {
            s.positive += 1;
        } else {
            s.zero += 1;
        }
    }
    s
}

/// The top power `A^n`, identified with `det A` (the positive normalization
/// `n!`·volume is common to every estimate and dropped).
pub fn top_power(a: &HermitianForm) -> f64 {
    match a.dim() {
        0 => 1.0,
        1 => a.a[(0, 0)].re,
        2 => (a.a[(0, 0)] * a.a[(1, 1)] - a.a[(0, 1)] * a.a[(1, 0)]).re,
        _ => a.a.clone().determinant().re,
    }
}

/// Coefficient tensor `c_{ijαβ}` with `i, j < n` (base) and `α, β < r`
/// (fiber), satisfying `c_{ijαβ} = conj(c_{jiβα})`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureModel {
    n: usize,
    r: usize,
    c: Vec<Complex64>,
}

impl CurvatureModel {
    /// `c` is laid out with `i, j` outermost, then `α, β`.
    pub fn new(n: usize, r: usize, c: Vec<Complex64>) -> Result<Self> {
        if n == 0 || r == 0 {
            return Err(Error::DimensionMismatch("curvature model needs n, r >= 1".into()));
        }
        if c.len() != n * n * r * r {
            return Err(Error::DimensionMismatch(format!(
                "curvature tensor has {} entries, expected {}",
                c.len(),
                n * n * r * r
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite curvature coefficient".into()));
        }
        let m = CurvatureModel { n, r, c };
        if let Some((i, j, a, b)) = m.hermitian_violation() {
            return Err(Error::DimensionMismatch(format!(
                "curvature tensor violates c[i,j,a,b] = conj(c[j,i,b,a]) at ({}, {}, {}, {})",
                i + 1,
                j + 1,
                a + 1,
                b + 1
            )));
        }
        Ok(m)
    }

    pub fn from_fn(n: usize, r: usize, f: impl Fn(usize, usize, usize, usize) -> Complex64) -> Result<Self> {
        let mut c = Vec::with_capacity(n * n * r * r);
        for i in 0..n {
            for j in 0..n {
                for a in 0..r {
                    for b in 0..r {
                        c.push(f(i, j, a, b));
                    }
                }
            }
        }
        CurvatureModel::new(n, r, c)
    }

    pub fn zero(n: usize, r: usize) -> Self {
        CurvatureModel {
            n,
            r,
            c: vec![ZERO; n * n * r * r],
        }
    }

    /// `c_{ijαβ} = δ_ij δ_αβ μ_α`.
    pub fn diagonal(n: usize, mu: &[f64]) -> Self {
        let r = mu.len();
        CurvatureModel::from_fn(n, r, |i, j, a, b| {
            if i == j && a == b {
                Complex64::new(mu[a], 0.0)
            } else {
                ZERO
            }
        })
        .expect("diagonal model is hermitian")
    }

    /// `c_{ijαβ} = κ_ij δ_αβ`: the same curvature in every fiber direction.
    pub fn isotropic(kappa: &HermitianForm, r: usize) -> Self {
        CurvatureModel::from_fn(kappa.dim(), r, |i, j, a, b| if a == b { kappa.get(i, j) } else { ZERO })
            .expect("isotropic model is hermitian")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn raw(&self) -> &[Complex64] {
        &self.c
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, a: usize, b: usize) -> usize {
        ((i * self.n + j) * self.r + a) * self.r + b
    }

    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> Complex64 {
        self.c[self.idx(i, j, a, b)]
    }

    /// First index (0-based) where hermitian symmetry fails, if any.
    pub fn hermitian_violation(&self) -> Option<(usize, usize, usize, usize)> {
        let scale = self.c.iter().map(|x| x.norm()).fold(1.0, f64::max);
        for i in 0..self.n {
            for j in 0..self.n {
                for a in 0..self.r {
                    for b in 0..self.r {
                        let d = self.get(i, j, a, b) - self.get(j, i, b, a).conj();
                        if d.norm() > HERMITIAN_TOL * scale {
                            return Some((i, j, a, b));
                        }
                    }
                }
            }
        }
        None
    }

    pub fn scaled(&self, f: f64) -> Self {
        CurvatureModel {
            n: self.n,
            r: self.r,
            c: self.c.iter().map(|x| x * f).collect(),
        }
    }

    pub fn add(&self, other: &CurvatureModel) -> Result<Self> {
        if (self.n, self.r) != (other.n, other.r) {
            return Err(Error::DimensionMismatch("curvature models of different shape".into()));
        }
        Ok(CurvatureModel {
            n: self.n,
            r: self.r,
            c: self.c.iter().zip(&other.c).map(|(x, y)| x + y).collect(),
        })
    }

    /// Change of orthonormal fiber frame by a unitary `u`:
    /// `c'_{ijαβ} = Σ u_{αγ} c_{ijγδ} conj(u_{βδ})`.
    pub fn fiber_conjugate(&self, u: &DMatrix<Complex64>) -> Self {
        let r = self.r;
        let mut c = vec![ZERO; self.c.len()];
        for i in 0..self.n {
            for j in 0..self.n {
                for a in 0..r {
                    for b in 0..r {
                        let mut acc = ZERO;
                        for g in 0..r {
                            for d in 0..r {
                                acc += u[(a, g)] * self.get(i, j, g, d) * u[(b, d)].conj();
                            }
                        }
                        c[self.idx(i, j, a, b)] = acc;
                    }
                }
            }
        }
        CurvatureModel { n: self.n, r, c }
    }

    /// `A_ij = Σ_{αβ} c_{ijαβ} u_α conj(u_β)` without the unit-norm check.
    pub fn contract(&self, u: &[Complex64]) -> HermitianForm {
        let n = self.n;
        let r = self.r;
        // outer product u ⊗ ū, reused for every (i, j)
        let mut w = Vec::with_capacity(r * r);
        for a in 0..r {
            for b in 0..r {
                w.push(u[a] * u[b].conj());
            }
        }
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let base = (i * n + j) * r * r;
                let v: Complex64 = self.c[base..base + r * r].iter().zip(&w).map(|(c, w)| c * w).sum();
                a[(i, j)] = v;
                if i == j {
                    a[(i, j)].im = 0.0;
                } else {
                    a[(j, i)] = v.conj();
                }
            }
        }
        HermitianForm { a }
    }

    /// The metric matrix `h_{αβ}(z) = δ_{αβ} - Σ c_{ijαβ} z_i z̄_j`.
    pub fn metric_at(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let r = self.r;
        let mut h = DMatrix::identity(r, r);
        for i in 0..self.n {
            for j in 0..self.n {
                let zz = z[i] * z[j].conj();
                if zz == ZERO {
                    continue;
                }
                for a in 0..r {
                    for b in 0..r {
                        h[(a, b)] -= self.get(i, j, a, b) * zz;
                    }
                }
            }
        }
        h
    }
}

pub fn gamma_of_vector(m: &CurvatureModel, u: &[Complex64]) -> Result<HermitianForm> {
    if u.len() != m.r {
        return Err(Error::DimensionMismatch(format!(
            "fiber vector of length {} for rank {}",
            u.len(),
            m.r
        )));
    }
    let norm = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitVector(norm));
    }
    Ok(m.contract(u))
}

/// `T_ij = Σ_α c_{ijαα}`.
pub fn fiber_trace(m: &CurvatureModel) -> HermitianForm {
    let n = m.n;
    let a = DMatrix::from_fn(n, n, |i, j| (0..m.r).map(|al| m.get(i, j, al, al)).sum());
    HermitianForm { a }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseSample {
    pub weight: f64,
    pub model: CurvatureModel,
}

/// A discrete base measure: weighted curvature samples, the curvature
/// `theta_l` of the ample twist, and the twist strength `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseScenario {
    samples: Vec<BaseSample>,
    theta_l: HermitianForm,
    delta: f64,
}

/// Tolerance on `|Σ weights - 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

impl BaseScenario {
    pub fn new(samples: Vec<BaseSample>, theta_l: HermitianForm, delta: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        let Some(first) = samples.first() else {
            return bad("samples: scenario has no base samples".into());
        };
        let (n, r) = (first.model.n, first.model.r);
        for (idx, s) in samples.iter().enumerate() {
            if !(s.weight.is_finite() && s.weight > 0.0) {
                return bad(format!("weights: sample {} has non-positive weight {}", idx, s.weight));
            }
            if (s.model.n, s.model.r) != (n, r) {
                return bad(format!(
                    "samples: sample {} has shape (n={}, r={}), expected (n={}, r={})",
                    idx, s.model.n, s.model.r, n, r
                ));
            }
        }
        let total: f64 = samples.iter().map(|s| s.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return bad(format!("weights: sum to {}, expected 1", total));
        }
        if theta_l.dim() != n {
            return bad(format!("theta_L: dimension {} but n = {}", theta_l.dim(), n));
        }
        if theta_l.eigenvalues().first().is_some_and(|&ev| ev <= 0.0) {
            return bad("theta_L: not positive definite".into());
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return bad(format!("delta: must be a nonnegative number, got {}", delta));
        }
        Ok(BaseScenario { samples, theta_l, delta })
    }

    /// One sample of weight 1.
    pub fn single(model: CurvatureModel, theta_l: HermitianForm, delta: f64) -> Result<Self> {
        BaseScenario::new(vec![BaseSample { weight: 1.0, model }], theta_l, delta)
    }

    pub fn samples(&self) -> &[BaseSample] {
        &self.samples
    }

    pub fn theta_l(&self) -> &HermitianForm {
        &self.theta_l
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn n(&self) -> usize {
        self.samples[0].model.n
    }

    pub fn r(&self) -> usize {
        self.samples[0].model.r
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        BaseScenario::new(self.samples.clone(), self.theta_l.clone(), delta)
    }

    /// Every curvature model multiplied by `f`.
    pub fn with_scaled_curvature(&self, f: f64) -> Self {
        BaseScenario {
            samples: self
                .samples
                .iter()
                .map(|s| BaseSample {
                    weight: s.weight,
                    model: s.model.scaled(f),
                })
                .collect(),
            theta_l: self.theta_l.clone(),
            delta: self.delta,
        }
    }
}

/// `η = Θ(det V*) + (1 - δ) θ_L = -fiber_trace(c) + θ_L - δ θ_L`.
pub fn eta_form(sc: &BaseScenario, index: usize) -> Result<HermitianForm> {
    let s = sc
        .samples
        .get(index)
        .ok_or_else(|| Error::InvalidScenario(format!("samples: no sample {}", index)))?;
    Ok(sc.theta_l.scale(1.0 - sc.delta).sub(&fiber_trace(&s.model)))
}

/// Curvature of `S^l V` in the orthonormal monomial frame
/// `e^α = sqrt(l!/α!) e_1^{α_1} ... e_r^{α_r}`, stored as a curvature
/// model whose fiber index runs over `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPowerCurvature {
    pub l: usize,
    /// Multi-indices of the frame, in [`multi_indices`] order.
    pub frame: Vec<Vec<usize>>,
    pub curvature: CurvatureModel,
}

impl SymPowerCurvature {
    pub fn dim(&self) -> usize {
        self.frame.len()
    }
}

/// Fiber dimension `binomial(r + l - 1, l)` of `S^l V`, or an error past
/// [`SYM_POWER_DIM_CAP`].
pub fn sym_power_dim(r: usize, l: usize) -> Result<usize> {
    match binomial((r + l - 1) as u64, l as u64) {
        Some(d) if d <= SYM_POWER_DIM_CAP => Ok(d as usize),
        _ => Err(Error::CapExceeded(format!(
            "dim S^{} of rank {} exceeds {}",
            l, r, SYM_POWER_DIM_CAP
        ))),
    }
}

/// Induced curvature on `S^l V`.
///
/// Expanding the Gram matrix of the scaled monomial frame inside
/// `V^{⊗l}` to first order in `c` gives
/// `C_{ij,αβ} = Σ c_{ijλμ} sqrt(α_λ β_μ)` over pairs `(λ, μ)` with
/// `α - e_λ = β - e_μ`.
pub fn sym_power_curvature(m: &CurvatureModel, l: usize) -> Result<SymPowerCurvature> {
    if l == 0 {
        return Err(Error::OrderOutOfRange(0, usize::MAX));
    }
    let dim = sym_power_dim(m.r, l)?;
    let frame = multi_indices(m.r, l);
    debug_assert_eq!(frame.len(), dim);
    let index_of: std::collections::HashMap<&[usize], usize> =
        frame.iter().enumerate().map(|(i, a)| (a.as_slice(), i)).collect();
    let mut c = vec![ZERO; m.n * m.n * dim * dim];
    let mut beta = vec![0usize; m.r];
    for (ai, alpha) in frame.iter().enumerate() {
        for lam in 0..m.r {
            if alpha[lam] == 0 {
                continue;
            }
            for mu in 0..m.r {
                // beta = alpha - e_lam + e_mu
                beta.copy_from_slice(alpha);
                beta[lam] -= 1;
                beta[mu] += 1;
                let bi = index_of[beta.as_slice()];
                let w = ((alpha[lam] * beta[mu]) as f64).sqrt();
                for i in 0..m.n {
                    for j in 0..m.n {
                        c[((i * m.n + j) * dim + ai) * dim + bi] += m.get(i, j, lam, mu) * w;
                    }
                }
            }
        }
    }
    Ok(SymPowerCurvature {
        l,
        frame,
        curvature: CurvatureModel { n: m.n, r: dim, c },
    })
}
