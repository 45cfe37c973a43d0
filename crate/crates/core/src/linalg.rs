//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DVector;

use crate::{CMat, C64};

/// Thin SVD with singular values sorted in nonincreasing order.
#[derive(Debug, Clone)]
pub struct SortedSvd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v_t: CMat,
}

pub fn svd_sorted(m: &CMat) -> SortedSvd {
    let (u, s, v_t) = thin_svd(m);
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    SortedSvd {
        u: CMat::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]),
        singular_values: order.iter().map(|&i| s[i]).collect(),
        v_t: CMat::from_fn(order.len(), v_t.ncols(), |r, c| v_t[(order[r], c)]),
    }
}

/// Unsorted thin SVD. nalgebra's complex SVD can return wrong factors for
/// rank-deficient tall inputs, so tall matrices are decomposed through their
/// adjoint.
fn thin_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    if m.nrows() > m.ncols() {
        let (u, s, v_t) = thin_svd(&m.adjoint());
        return (v_t.adjoint(), s, u.adjoint());
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    (u, svd.singular_values.iter().copied().collect(), v_t)
}

fn default_tolerance(m: &CMat, sigma_max: f64) -> f64 {
    m.nrows().max(m.ncols()) as f64 * f64::EPSILON * sigma_max
}

/// Moore-Penrose pseudoinverse with the usual `max(m, n) eps sigma_1` cutoff.
pub fn pinv(m: &CMat) -> CMat {
    if m.is_empty() {
        return CMat::zeros(m.ncols(), m.nrows());
    }
    let (u, s, v_t) = thin_svd(m);
    let tol = default_tolerance(m, s.iter().copied().fold(0.0, f64::max));
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for (k, &sk) in s.iter().enumerate() {
        if sk > tol {
            let vk = v_t.row(k).adjoint();
            let uk = u.column(k).adjoint();
            out += (vk * uk) / C64::from(sk);
        }
    }
    out
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s = thin_svd(m).1;
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn numerical_rank(m: &CMat) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&s1) => {
            let tol = default_tolerance(m, s1);
            s.iter().filter(|&&x| x > tol).count()
        }
    }
}

/// 2-norm condition number; infinite for rank-deficient matrices.
pub fn cond(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Eigenvalues and unit-norm eigenvectors of a general complex matrix.
///
/// Uses the complex Schur form `M = Q T Q^H` and back-substitution on the
/// triangular factor, so it assumes (numerically) distinct eigenvalues.
pub fn eig(m: &CMat) -> (Vec<C64>, CMat) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eig needs a square matrix");
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let (q, t) = m.clone().schur().unpack();
    let lambda: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let mut vecs = CMat::zeros(n, n);
    for k in 0..n {
        let mut x = DVector::<C64>::zeros(n);
        x[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * x[j];
            }
            let mut den = t[(i, i)] - lambda[k];
            if den.norm() < f64::EPSILON * scale {
                den = C64::new(f64::EPSILON * scale, 0.0);
            }
            x[i] = -acc / den;
        }
        let v = &q * x;
        let nv = v.norm();
        vecs.set_column(k, &(v / C64::from(nv)));
    }
    (lambda, vecs)
}
