//! Small dense helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Factors a symmetric positive definite matrix.
pub(crate) fn cholesky(a: DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(a).ok_or(Error::Factorization(what))
}

/// Solves `a z = b` for SPD `a`.
pub(crate) fn spd_solve(a: DMatrix<f64>, b: &DVector<f64>, what: &'static str) -> Result<DVector<f64>> {
    Ok(cholesky(a, what)?.solve(b))
}

/// Number of supports of size at most `k` over `p` columns, saturating.
pub fn count_supports(p: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for i in 0..=k.min(p) {
        if i > 0 {
            c = c.saturating_mul((p - i + 1) as u128) / i as u128;
        }
        total = total.saturating_add(c);
    }
    total
}

/// Visits all size-`k` subsets of `0..p` in lexicographic order.
pub(crate) fn for_each_combination<F: FnMut(&[usize])>(p: usize, k: usize, mut f: F) {
    if k > p {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + p - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for t in i + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}
