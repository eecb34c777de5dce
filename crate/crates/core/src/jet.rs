//! Truncated jets of curves and the reparametrization group `G_k`.
//!
//! A [`Jet`] of order `k` and rank `r` stores the *scaled* derivatives
//! `xi_s = f^(s)(0) / s!` of a germ `f: (C,0) -> (C^r,0)` as rows
//! `s = 1..=k`, i.e. the Taylor coefficients of `f`. In this convention a
//! reparametrization `phi` acts by right-multiplying the row vector of each
//! fiber component with [`reparam_matrix`], whose entry `(s, m)` is the
//! coefficient of `t^m` in `phi(t)^s`.
//!
//! Group law orientation: [`compose_reparams`]`(phi, psi)` is the germ
//! `phi ∘ psi`, and
//!
//! ```text
//! reparam_matrix(phi ∘ psi) = reparam_matrix(phi) · reparam_matrix(psi)
//! act(psi, act(phi, j))     = act(phi ∘ psi, j)
//! ```
//!
//! since `f ∘ (phi ∘ psi) = (f ∘ phi) ∘ psi`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::factorial;
use crate::MAX_JET_ORDER;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Taylor coefficients `c_1, ..., c_k` of a scalar germ with zero constant
/// term; `coeffs[s - 1]` multiplies `t^s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarJet {
    coeffs: Vec<Complex64>,
}

impl ScalarJet {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        ScalarJet { coeffs }
    }

    /// The germ `t`, truncated at order `k`.
    pub fn identity(k: usize) -> Self {
        let mut coeffs = vec![ZERO; k];
        if k > 0 {
            coeffs[0] = ONE;
        }
        ScalarJet { coeffs }
    }

    pub fn zero(k: usize) -> Self {
        ScalarJet { coeffs: vec![ZERO; k] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `t^s`, `s >= 1`; zero past the truncation order.
    pub fn coeff(&self, s: usize) -> Complex64 {
        debug_assert!(s >= 1);
        self.coeffs.get(s - 1).copied().unwrap_or(ZERO)
    }

    /// The plain derivative `g^(s)(0) = s! · c_s`.
    pub fn derivative(&self, s: usize) -> Complex64 {
        self.coeff(s) * factorial(s)
    }

    pub fn truncate(&self, k: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(k, ZERO);
        ScalarJet { coeffs }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ScalarJet {
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &ScalarJet) -> Self {
        let k = self.order().min(other.order());
        ScalarJet {
            coeffs: (0..k).map(|i| self.coeffs[i] + other.coeffs[i]).collect(),
        }
    }

    /// Truncated product; the result has order `min` of the two orders.
    pub fn mul(&self, other: &ScalarJet) -> Self {
        let k = self.order().min(other.order());
        let mut out = vec![ZERO; k];
        // t^(i+1) * t^(j+1) = t^(i+j+2), stored at index i+j+1
        for i in 0..k {
            if self.coeffs[i] == ZERO {
                continue;
            }
            for j in 0..k.saturating_sub(i + 1) {
                out[i + j + 1] += self.coeffs[i] * other.coeffs[j];
            }
        }
        ScalarJet { coeffs: out }
    }

    /// Powers `g, g^2, ..., g^count`, each truncated at the order of `g`.
    pub fn powers(&self, count: usize) -> Vec<ScalarJet> {
        let mut out: Vec<ScalarJet> = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(self.clone());
        for _ in 1..count {
            let next = out.last().unwrap().mul(self);
            out.push(next);
        }
        out
    }
}

/// A truncated reparametrization `phi(t) = a_1 t + ... + a_k t^k` with
/// `a_1 != 0`, an element of `G_k`. The unipotent subgroup `U_k` is
/// `a_1 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reparam {
    alpha: Vec<Complex64>,
}

impl Reparam {
    pub fn new(alpha: Vec<Complex64>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() > MAX_JET_ORDER {
            return Err(Error::OrderOutOfRange(alpha.len(), MAX_JET_ORDER));
        }
        if alpha[0] == ZERO {
            return Err(Error::NonInvertible);
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite reparametrization coefficient".into()));
        }
        Ok(Reparam { alpha })
    }

    pub fn identity(k: usize) -> Self {
        Reparam {
            alpha: ScalarJet::identity(k).coeffs,
        }
    }

    /// `phi(t) = lambda t`.
    pub fn linear(lambda: Complex64, k: usize) -> Result<Self> {
        let mut alpha = vec![ZERO; k];
        if k > 0 {
            alpha[0] = lambda;
        }
        Reparam::new(alpha)
    }

    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn is_unipotent(&self) -> bool {
        self.alpha[0] == ONE
    }

    pub fn as_scalar_jet(&self) -> ScalarJet {
        ScalarJet::new(self.alpha.clone())
    }

    /// Compositional inverse in `G_k`.
    pub fn inverse(&self) -> Self {
        let inv = invert_series(&self.as_scalar_jet()).expect("a_1 != 0 is a type invariant");
        Reparam { alpha: inv.coeffs }
    }
}

/// Fiber coordinates `(xi_1, ..., xi_k)` of a k-jet in rank `r`, stored in
/// the scaled convention `xi_s = f^(s)(0)/s!`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    rows: Vec<Vec<Complex64>>,
}

impl Jet {
    pub fn new(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 || k > MAX_JET_ORDER {
            return Err(Error::OrderOutOfRange(k, MAX_JET_ORDER));
        }
        let r = rows[0].len();
        if r == 0 {
            return Err(Error::DimensionMismatch("jet rank must be positive".into()));
        }
        if let Some(s) = rows.iter().position(|row| row.len() != r) {
            return Err(Error::DimensionMismatch(format!(
                "row {} has length {}, expected {}",
                s + 1,
                rows[s].len(),
                r
            )));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::DimensionMismatch("non-finite jet entry".into()));
        }
        Ok(Jet { rows })
    }

    /// Builds the jet whose fiber component `alpha` is `components[alpha]`.
    pub fn from_components(components: &[ScalarJet]) -> Result<Self> {
        let k = components.iter().map(ScalarJet::order).min().unwrap_or(0);
        let rows = (1..=k)
            .map(|s| components.iter().map(|c| c.coeff(s)).collect())
            .collect();
        Jet::new(rows)
    }

    pub fn zero(k: usize, r: usize) -> Result<Self> {
        Jet::new(vec![vec![ZERO; r]; k])
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn rank(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<Complex64>] {
        &self.rows
    }

    /// Scaled row `xi_s`, `s` counted from 1.
    pub fn row(&self, s: usize) -> &[Complex64] {
        &self.rows[s - 1]
    }

    /// The plain derivative `f^(s)(0) = s! · xi_s`.
    pub fn derivative_row(&self, s: usize) -> Vec<Complex64> {
        let f = factorial(s);
        self.rows[s - 1].iter().map(|&x| x * f).collect()
    }

    /// Fiber component `alpha` (0-based) as a scalar germ.
    pub fn component(&self, alpha: usize) -> ScalarJet {
        ScalarJet::new(self.rows.iter().map(|row| row[alpha]).collect())
    }

    pub fn components(&self) -> Vec<ScalarJet> {
        (0..self.rank()).map(|a| self.component(a)).collect()
    }

    /// Reorders fiber components: component `a` of the result is
    /// component `perm[a]` of `self`.
    pub fn permute_components(&self, perm: &[usize]) -> Result<Self> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&p| p >= r || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::DimensionMismatch("not a permutation of the fiber components".into()));
        }
        Ok(Jet {
            rows: self
                .rows
                .iter()
                .map(|row| perm.iter().map(|&p| row[p]).collect())
                .collect(),
        })
    }
}

/// The `k × k` matrix of `phi` acting on row vectors of scaled jet
/// coefficients: entry `(s, m)` (0-based `[s-1][m-1]`) is the coefficient
/// of `t^m` in `phi(t)^s`.
pub fn reparam_matrix(phi: &Reparam, k: usize) -> Result<Vec<Vec<Complex64>>> {
    if k == 0 || phi.order() < k {
        return Err(Error::DimensionMismatch(format!(
            "reparametrization of order {} cannot act on order {}",
            phi.order(),
            k
        )));
    }
    let base = phi.as_scalar_jet().truncate(k);
    Ok(base.powers(k).into_iter().map(|p| p.coeffs).collect())
}

/// Jet of `f ∘ phi`.
pub fn act(phi: &Reparam, j: &Jet) -> Result<Jet> {
    let k = j.order();
    let m = reparam_matrix(phi, k)?;
    let r = j.rank();
    let mut rows = vec![vec![ZERO; r]; k];
    for (s, row) in j.rows.iter().enumerate() {
        for (mcol, out_row) in rows.iter_mut().enumerate().skip(s) {
            let coef = m[s][mcol];
            for a in 0..r {
                out_row[a] += row[a] * coef;
            }
        }
    }
    Ok(Jet { rows })
}

/// The germ `phi ∘ psi`; see the module docs for the matrix orientation.
pub fn compose_reparams(phi: &Reparam, psi: &Reparam) -> Result<Reparam> {
    if phi.order() != psi.order() {
        return Err(Error::DimensionMismatch(format!(
            "orders {} and {} differ",
            phi.order(),
            psi.order()
        )));
    }
    let c = compose_scalar(&phi.as_scalar_jet(), &psi.as_scalar_jet());
    Reparam::new(c.coeffs)
}

/// Compositional inverse `g^{-1}` truncated at the order of `g`.
pub fn invert_series(g: &ScalarJet) -> Result<ScalarJet> {
    let k = g.order();
    if k == 0 || g.coeffs[0] == ZERO {
        return Err(Error::VanishingLinearTerm);
    }
    let lead = g.coeffs[0];
    let mut h = ScalarJet::zero(k);
    h.coeffs[0] = ONE / lead;
    // Coefficient m of g(h) is lead * h_m + (terms in h_1..h_{m-1});
    // solve for h_m so that it vanishes.
    for m in 2..=k {
        let partial = compose_scalar(g, &h.truncate(m));
        h.coeffs[m - 1] = -partial.coeffs[m - 1] / lead;
    }
    Ok(h)
}

/// Truncated composition `u ∘ g`; the result has order `min` of the two.
pub fn compose_scalar(u: &ScalarJet, g: &ScalarJet) -> ScalarJet {
    let k = u.order().min(g.order());
    let g = g.truncate(k);
    let mut out = ScalarJet::zero(k);
    for (s, pw) in g.powers(k).iter().enumerate() {
        let c = u.coeffs[s];
        if c == ZERO {
            continue;
        }
        for i in 0..k {
            out.coeffs[i] += c * pw.coeffs[i];
        }
    }
    out
}

/// One numerator polynomial value `P_(m,s)` of the normalized jet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerator {
    /// Fiber component, 1-based, `>= 2`.
    pub component: usize,
    /// Derivative order, `>= 2`.
    pub order: usize,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedJet {
    /// Jet of `(t, g_2, ..., g_r)` with `g_m = f_m ∘ f_1^{-1}`.
    pub eta: Jet,
    /// `P_(m,s) = g_m^(s)(0) · f_1'(0)^(2s-1)`, in `(m, s)` lexicographic order.
    pub numerators: Vec<Numerator>,
}

/// Invariant normalization `f ↦ f ∘ f_1^{-1}`.
///
/// The outputs are invariant under the whole of `G_k`. Fails with
/// [`Error::DegenerateNormalization`] when `xi_{1,1} = 0`; see
/// [`suggest_permutation`].
pub fn normalize_jet(j: &Jet) -> Result<NormalizedJet> {
    let f1 = j.component(0);
    let lead = f1.coeff(1);
    if lead == ZERO {
        return Err(Error::DegenerateNormalization);
    }
    let inv = invert_series(&f1)?;
    let k = j.order();
    let mut comps = Vec::with_capacity(j.rank());
    comps.push(ScalarJet::identity(k));
    for a in 1..j.rank() {
        comps.push(compose_scalar(&j.component(a), &inv));
    }
    let eta = Jet::from_components(&comps)?;
    if eta.rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Overflow("normalized jet is not finite".into()));
    }
    let mut numerators = Vec::new();
    for (a, g) in comps.iter().enumerate().skip(1) {
        for s in 2..=k {
            numerators.push(Numerator {
                component: a + 1,
                order: s,
                value: g.derivative(s) * lead.powu(2 * s as u32 - 1),
            });
        }
    }
    Ok(NormalizedJet { eta, numerators })
}

/// A permutation moving the fiber component with the largest first
/// derivative to the front, or `None` when `xi_1 = 0`.
pub fn suggest_permutation(j: &Jet) -> Option<Vec<usize>> {
    let (best, norm) = j.row(1)
        .iter()
        .enumerate()
        .map(|(a, x)| (a, x.norm()))
        .max_by(|x, y| x.1.total_cmp(&y.1))?;
    if norm == 0.0 {
        return None;
    }
    let mut perm: Vec<usize> = (0..j.rank()).collect();
    perm.swap(0, best);
    Some(perm)
}

/// The action of `phi(t) = lambda t`: row `s` is multiplied by `lambda^s`.
pub fn weighted_scale(lambda: Complex64, j: &Jet) -> Jet {
    let mut rows = j.rows.clone();
    let mut pw = ONE;
    for row in rows.iter_mut() {
        pw *= lambda;
        for x in row.iter_mut() {
            *x *= pw;
        }
    }
    Jet { rows }
}

/// A polynomial on `C^r` as a list of monomial terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub rank: usize,
    pub terms: Vec<(Vec<usize>, Complex64)>,
}

impl Polynomial {
    pub fn new(rank: usize, terms: Vec<(Vec<usize>, Complex64)>) -> Result<Self> {
        if terms.iter().any(|(m, _)| m.len() != rank) {
            return Err(Error::DimensionMismatch("monomial exponent length differs from rank".into()));
        }
        Ok(Polynomial { rank, terms })
    }

    /// The coordinate function `z_alpha` (0-based).
    pub fn coordinate(rank: usize, alpha: usize) -> Self {
        let mut e = vec![0; rank];
        e[alpha] = 1;
        Polynomial {
            rank,
            terms: vec![(e, ONE)],
        }
    }

    pub fn monomial(exponents: Vec<usize>, coeff: Complex64) -> Self {
        Polynomial {
            rank: exponents.len(),
            terms: vec![(exponents, coeff)],
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| m.iter().zip(z).fold(*c, |acc, (&e, &x)| acc * x.powu(e as u32)))
            .sum()
    }
}

/// Taylor coefficients of `t ↦ u(f(t)) - u(f(0))` through the jet order,
/// with the jet taken at the origin of the fiber coordinates.
pub fn pullback_jet(u: &Polynomial, j: &Jet) -> Result<ScalarJet> {
    if u.rank != j.rank() {
        return Err(Error::DimensionMismatch(format!(
            "polynomial on C^{} pulled back along a rank {} jet",
            u.rank,
            j.rank()
        )));
    }
    let k = j.order();
    let deg = u.degree();
    let powers: Vec<Vec<ScalarJet>> = j.components().iter().map(|c| c.powers(deg)).collect();
    let mut out = ScalarJet::zero(k);
    for (exps, coeff) in &u.terms {
        if exps.iter().all(|&e| e == 0) {
            continue;
        }
        let mut term: Option<ScalarJet> = None;
        for (a, &e) in exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let factor = &powers[a][e - 1];
            term = Some(match term {
                None => factor.clone(),
                Some(t) => t.mul(factor),
            });
        }
        out = out.add(&term.expect("non-constant monomial").scale(*coeff));
    }
    Ok(out)
}
