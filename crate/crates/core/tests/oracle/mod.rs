//! Reference implementations used by the integration and acceptance tests.
//!
//! Everything here is computed the slow, direct way: full polynomial
//! products without truncation, explicit tensor words, explicit sums. None
//! of it calls into the algorithms under test.
#![allow(dead_code, clippy::type_complexity, clippy::needless_range_loop)]

use num_complex::Complex64;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Full product of polynomials stored by degree (index 0 is the constant).
pub fn poly_mul(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients `t^1..t^k` of `Σ_s f_s φ(t)^s`, where `f_s` and `φ_s`
/// multiply `t^s` (1-based, no constant term). Powers are formed in full.
pub fn compose_oracle(f: &[C], phi: &[C], k: usize) -> Vec<C> {
    let mut phi_poly = vec![c(0.0, 0.0)];
    phi_poly.extend_from_slice(phi);
    let mut power = vec![c(1.0, 0.0)];
    let mut acc = vec![c(0.0, 0.0); k + 1];
    for fs in f.iter().take(k) {
        power = poly_mul(&power, &phi_poly);
        for (d, v) in power.iter().enumerate().take(k + 1) {
            acc[d] += fs * v;
        }
    }
    acc[1..].to_vec()
}

/// Rows of the jet of `f ∘ φ`, given rows `ξ_s` of `f`.
pub fn act_oracle(rows: &[Vec<C>], phi: &[C]) -> Vec<Vec<C>> {
    let k = rows.len();
    let r = rows[0].len();
    let cols: Vec<Vec<C>> = (0..r)
        .map(|a| compose_oracle(&rows.iter().map(|row| row[a]).collect::<Vec<_>>(), phi, k))
        .collect();
    (0..k).map(|s| (0..r).map(|a| cols[a][s]).collect()).collect()
}

/// Coefficient `(s, m)` of `t^m` in `φ(t)^s`, by full powers.
pub fn matrix_oracle(phi: &[C], k: usize) -> Vec<Vec<C>> {
    let mut phi_poly = vec![c(0.0, 0.0)];
    phi_poly.extend_from_slice(&phi[..k]);
    let mut power = vec![c(1.0, 0.0)];
    (1..=k)
        .map(|_| {
            power = poly_mul(&power, &phi_poly);
            (1..=k).map(|m| power.get(m).copied().unwrap_or(c(0.0, 0.0))).collect()
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..b.len()).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

/// Determinant by cofactor expansion along the first row.
pub fn det_oracle(a: &[Vec<C>]) -> C {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    let mut acc = c(0.0, 0.0);
    for col in 0..n {
        let minor: Vec<Vec<C>> = a[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, x)| *x).collect())
            .collect();
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        acc += a[0][col] * det_oracle(&minor) * sign;
    }
    acc
}

/// `max |a - b| / max(1, max |b|)` over matching entries.
pub fn rel_err(a: &[Vec<C>], b: &[Vec<C>]) -> f64 {
    let scale = b.iter().flatten().map(|x| x.norm()).fold(1.0, f64::max);
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// All words of length `l` over `0..r` whose letter counts equal `alpha`.
fn words_of(alpha: &[usize], l: usize) -> Vec<Vec<usize>> {
    let r = alpha.len();
    let mut out = Vec::new();
    let total = r.pow(l as u32);
    for code in 0..total {
        let mut w = Vec::with_capacity(l);
        let mut x = code;
        for _ in 0..l {
            w.push(x % r);
            x /= r;
        }
        let mut counts = vec![0; r];
        for &letter in &w {
            counts[letter] += 1;
        }
        if counts == alpha {
            out.push(w);
        }
    }
    out
}

/// Gram matrix at the origin and first-order curvature of `S^l V` built
/// inside `V^{⊗l}`.
///
/// The frame vector of `alpha` is `sqrt(α!/l!) Σ_{w ∈ alpha} e_w`. The
/// tensor metric is `h^{⊗l}` with `h_{ab}(z) = δ_ab - Σ c_{ijab} z_i z̄_j`;
/// differentiating `h^{⊗l}` once in the `z_i z̄_j` direction replaces one
/// tensor slot with `-c_{ij}`. `c(i, j, a, b)` supplies the tensor and
/// `frame` the multi-indices in the order the result should use.
/// Returns `(gram0[α][β], curv[i][j][α][β])`.
pub fn sym_power_oracle(
    n: usize,
    l: usize,
    frame: &[Vec<usize>],
    cf: impl Fn(usize, usize, usize, usize) -> C,
) -> (Vec<Vec<f64>>, Vec<Vec<Vec<Vec<C>>>>) {
    let words: Vec<Vec<Vec<usize>>> = frame.iter().map(|a| words_of(a, l)).collect();
    let lf = factorial(l) as f64;
    let d = frame.len();
    let mut gram = vec![vec![0.0; d]; d];
    let mut curv = vec![vec![vec![vec![c(0.0, 0.0); d]; d]; n]; n];
    for a in 0..d {
        for b in 0..d {
            let af: u64 = frame[a].iter().map(|&x| factorial(x)).product();
            let bf: u64 = frame[b].iter().map(|&x| factorial(x)).product();
            let norm = ((af * bf) as f64).sqrt() / lf;
            let mut count = 0u64;
            for w in &words[a] {
                for v in &words[b] {
                    if w == v {
                        count += 1;
                    }
                }
            }
            // integer arithmetic up to the final division keeps the diagonal exact
            gram[a][b] = count as f64 * ((af * bf) as f64).sqrt() / lf;
            for i in 0..n {
                for j in 0..n {
                    let mut acc = c(0.0, 0.0);
                    for w in &words[a] {
                        for v in &words[b] {
                            for slot in 0..l {
                                let rest_equal = (0..l).all(|m| m == slot || w[m] == v[m]);
                                if rest_equal {
                                    acc += cf(i, j, w[slot], v[slot]);
                                }
                            }
                        }
                    }
                    curv[i][j][a][b] = acc * norm;
                }
            }
        }
    }
    (gram, curv)
}

/// Hermitian tensor with entries of both parts in `[-1, 1]`, built from a
/// flat list of raw values by averaging with the conjugate-transpose.
pub fn hermitian_tensor(n: usize, r: usize, raw: &[C]) -> Vec<C> {
    let idx = |i: usize, j: usize, a: usize, b: usize| ((i * n + j) * r + a) * r + b;
    let mut out = vec![c(0.0, 0.0); n * n * r * r];
    for i in 0..n {
        for j in 0..n {
            for a in 0..r {
                for b in 0..r {
                    out[idx(i, j, a, b)] = (raw[idx(i, j, a, b)] + raw[idx(j, i, b, a)].conj()) * 0.5;
                }
            }
        }
    }
    out
}
