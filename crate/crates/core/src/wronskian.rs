//! Wedge and scalar Wronskians.
//!
//! Both kinds are computed on plain derivatives (`f^(s)(0)`, not the scaled
//! rows stored in [`Jet`]), so `W(f_1, f_2) = f_1' f_2'' - f_2' f_1''`.
//! Derivative orders run `1..=s`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, ScalarJet};
use crate::linalg::{det, subsets};

/// `W_l = f' ∧ f'' ∧ ... ∧ f^(l)` in coordinates: the `l × l` minors of the
/// derivative rows, over column subsets in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WedgeWronskian {
    pub l: usize,
    pub components: Vec<Complex64>,
    pub norm: f64,
}

pub fn wedge_wronskian(j: &Jet, l: usize) -> Result<WedgeWronskian> {
    if l == 0 || l > j.order() {
        return Err(Error::OrderOutOfRange(l, j.order()));
    }
    let rows: Vec<Vec<Complex64>> = (1..=l).map(|s| j.derivative_row(s)).collect();
    let components: Vec<Complex64> = subsets(j.rank(), l)
        .into_iter()
        .map(|cols| {
            det(rows
                .iter()
                .map(|row| cols.iter().map(|&c| row[c]).collect())
                .collect())
        })
        .collect();
    let norm = components.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    Ok(WedgeWronskian { l, components, norm })
}

/// `det [g_i^(j)(0)]`, `i, j = 1..=s`.
pub fn scalar_wronskian(germs: &[ScalarJet]) -> Result<Complex64> {
    let s = germs.len();
    if let Some(g) = germs.iter().find(|g| g.order() < s) {
        return Err(Error::OrderOutOfRange(g.order(), s));
    }
    Ok(det(germs
        .iter()
        .map(|g| (1..=s).map(|d| g.derivative(d)).collect())
        .collect()))
}

/// Weight `s(s+1)/2` of `W_s` under `phi(t) = lambda t`.
pub fn wronskian_weight(s: usize) -> usize {
    s * (s + 1) / 2
}
