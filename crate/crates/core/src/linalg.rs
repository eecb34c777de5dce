//! Small dense helpers shared by the jet and curvature code: complex
//! determinants, subsets, multi-indices and exact integer combinatorics.

use num_complex::Complex64;

/// Determinant of a square complex matrix given row-major, by Gaussian
/// elimination with partial pivoting. The empty matrix has determinant 1.
pub fn det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut acc = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .unwrap();
        if a[pivot][col] == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            acc = -acc;
        }
        let p = a[col][col];
        acc *= p;
        let pivot_row = a[col].clone();
        for row in a.iter_mut().skip(col + 1) {
            let f = row[col] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (x, v) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x -= f * v;
            }
        }
    }
    acc
}

/// All `size`-element subsets of `0..n`, in lexicographic order.
pub fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if size > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..size).collect();
    loop {
        out.push(cur.clone());
        // advance the rightmost index that still has room
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - size + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..size {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Multi-indices `alpha` of length `r` with `|alpha| = degree`.
///
/// Ordered like the nondecreasing words `w_1 <= ... <= w_degree` over
/// `0..r` in lexicographic order, so for `r = 2, degree = 2` the order is
/// `(2,0), (1,1), (0,2)`.
pub fn multi_indices(r: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(r: usize, start: usize, left: usize, word: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            let mut alpha = vec![0; r];
            for &w in word.iter() {
                alpha[w] += 1;
            }
            out.push(alpha);
            return;
        }
        for letter in start..r {
            word.push(letter);
            rec(r, letter, left - 1, word, out);
            word.pop();
        }
    }
    let mut out = Vec::new();
    if r == 0 {
        return out;
    }
    rec(r, 0, degree, &mut Vec::with_capacity(degree), &mut out);
    out
}

/// `n choose k` as an exact integer, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `ln(n!)` by direct summation (n is small everywhere it is used).
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Product of factorials of the entries of a multi-index.
pub fn multi_factorial(alpha: &[usize]) -> f64 {
    alpha.iter().map(|&a| factorial(a)).product()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Least common multiple, `None` on overflow.
pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}
