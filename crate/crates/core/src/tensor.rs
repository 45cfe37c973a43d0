//! Third-order tensors, unfoldings and the products that link CP factors to
//! them.
//!
//! Entry `(q, t, p)` (0-based) of a `Q x T x P` tensor lives at linear index
//! `q + Q (t + T p)`. The unfoldings are laid out so that, for a CP tensor
//! with factors `(A, B, C)`,
//!
//! * `Y_(1)` is `Q x TP` with column `t + T p`, and `Y_(1)^T = (C ⊙ B) A^T`,
//! * `Y_(2)` is `T x QP` with column `q + Q p`, and `Y_(2)^T = (C ⊙ A) B^T`,
//! * `Y_(3)` is `P x QT` with column `q + Q t`, and `Y_(3)^T = (B ⊙ A) C^T`.

use crate::error::{Error, Result};
use crate::{CMat, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<C64>,
}

impl Tensor3 {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self {
            dims,
            data: vec![C64::new(0.0, 0.0); dims.0 * dims.1 * dims.2],
        }
    }

    pub fn from_vec(dims: (usize, usize, usize), data: Vec<C64>) -> Result<Self> {
        if data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {}x{}x{} tensor",
                data.len(),
                dims.0,
                dims.1,
                dims.2
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dims.0 * dims.1 * dims.2);
        for p in 0..dims.2 {
            for t in 0..dims.1 {
                for q in 0..dims.0 {
                    data.push(f(q, t, p));
                }
            }
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn linear_index(&self, q: usize, t: usize, p: usize) -> usize {
        q + self.dims.0 * (t + self.dims.1 * p)
    }

    /// Entry at 0-based `(q, t, p)`; panics when out of range.
    #[inline]
    pub fn get(&self, q: usize, t: usize, p: usize) -> C64 {
        assert!(q < self.dims.0 && t < self.dims.1 && p < self.dims.2);
        self.data[self.linear_index(q, t, p)]
    }

    pub fn try_get(&self, q: usize, t: usize, p: usize) -> Result<C64> {
        if q < self.dims.0 && t < self.dims.1 && p < self.dims.2 {
            Ok(self.data[self.linear_index(q, t, p)])
        } else {
            Err(Error::IndexOutOfRange { q, t, p, dims: self.dims })
        }
    }

    pub fn set(&mut self, q: usize, t: usize, p: usize, v: C64) {
        assert!(q < self.dims.0 && t < self.dims.1 && p < self.dims.2);
        let i = self.linear_index(q, t, p);
        self.data[i] = v;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Mode-`n` unfolding, `n` in `1..=3`.
    pub fn unfold(&self, mode: usize) -> Result<CMat> {
        let (nq, nt, np) = self.dims;
        let m = match mode {
            1 => CMat::from_fn(nq, nt * np, |q, col| self.data[self.linear_index(q, col % nt, col / nt)]),
            2 => CMat::from_fn(nt, nq * np, |t, col| self.data[self.linear_index(col % nq, t, col / nq)]),
            3 => CMat::from_fn(np, nq * nt, |p, col| self.data[self.linear_index(col % nq, col / nq, p)]),
            _ => return Err(Error::InvalidMode(mode)),
        };
        Ok(m)
    }

    /// Inverse of [`Tensor3::unfold`].
    pub fn fold(m: &CMat, mode: usize, dims: (usize, usize, usize)) -> Result<Self> {
        let (nq, nt, np) = dims;
        let expected = match mode {
            1 => (nq, nt * np),
            2 => (nt, nq * np),
            3 => (np, nq * nt),
            _ => return Err(Error::InvalidMode(mode)),
        };
        if m.shape() != expected {
            return Err(Error::ShapeMismatch(format!(
                "mode-{mode} unfolding of {dims:?} must be {expected:?}, got {:?}",
                m.shape()
            )));
        }
        Ok(Self::from_fn(dims, |q, t, p| match mode {
            1 => m[(q, t + nt * p)],
            2 => m[(t, q + nq * p)],
            _ => m[(p, q + nq * t)],
        }))
    }

    /// `sum_l a_l ∘ b_l ∘ c_l` for factor matrices with a common column count.
    pub fn from_cp(a: &CMat, b: &CMat, c: &CMat) -> Result<Self> {
        let l = a.ncols();
        if b.ncols() != l || c.ncols() != l {
            return Err(Error::ShapeMismatch(format!(
                "factor column counts {}, {}, {}",
                a.ncols(),
                b.ncols(),
                c.ncols()
            )));
        }
        let dims = (a.nrows(), b.nrows(), c.nrows());
        let mut out = Self::zeros(dims);
        let mut k = 0;
        for p in 0..dims.2 {
            for t in 0..dims.1 {
                for q in 0..dims.0 {
                    let mut acc = C64::new(0.0, 0.0);
                    for r in 0..l {
                        acc += a[(q, r)] * b[(t, r)] * c[(p, r)];
                    }
                    out.data[k] = acc;
                    k += 1;
                }
            }
        }
        Ok(out)
    }

    /// n-mode product `self ×_n m`: mode `n` of size `I_n` becomes `m.nrows()`.
    pub fn mode_product(&self, m: &CMat, mode: usize) -> Result<Self> {
        let size = match mode {
            1 => self.dims.0,
            2 => self.dims.1,
            3 => self.dims.2,
            _ => return Err(Error::InvalidMode(mode)),
        };
        if m.ncols() != size {
            return Err(Error::ShapeMismatch(format!(
                "mode-{mode} product needs {size} columns, got {}",
                m.ncols()
            )));
        }
        let unfolded = self.unfold(mode)?;
        let mut dims = self.dims;
        match mode {
            1 => dims.0 = m.nrows(),
            2 => dims.1 = m.nrows(),
            _ => dims.2 = m.nrows(),
        }
        Self::fold(&(m * unfolded), mode, dims)
    }
}

/// Column-wise Kronecker product: column `l` is `x[:, l] ⊗ y[:, l]`.
pub fn khatri_rao(x: &CMat, y: &CMat) -> Result<CMat> {
    if x.ncols() != y.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "Khatri-Rao operands have {} and {} columns",
            x.ncols(),
            y.ncols()
        )));
    }
    let (m, n) = (x.nrows(), y.nrows());
    Ok(CMat::from_fn(m * n, x.ncols(), |r, l| x[(r / n, l)] * y[(r % n, l)]))
}

/// Kronecker product of two vectors given as slices.
pub fn kron_vec(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().flat_map(|&a| y.iter().map(move |&b| a * b)).collect()
}

/// 1-based positions of entry `(q, t, p)` inside `vec(Y_(1)^H)`,
/// `vec(Y_(2)^H)` and `vec(Y_(3)^H)`.
pub fn vec_index_maps(q: usize, t: usize, p: usize, dims: (usize, usize, usize)) -> Result<(usize, usize, usize)> {
    let (nq, nt, np) = dims;
    if !(1..=nq).contains(&q) || !(1..=nt).contains(&t) || !(1..=np).contains(&p) {
        return Err(Error::IndexOutOfRange { q, t, p, dims });
    }
    let i1 = (p - 1) * nt + t + (q - 1) * np * nt;
    let i2 = (p - 1) * nq + q + (t - 1) * np * nq;
    let i3 = (t - 1) * nq + q + (p - 1) * nq * nt;
    Ok((i1, i2, i3))
}

/// Order-3 superdiagonal tensor with `values` on its diagonal.
pub fn superdiagonal(values: &[C64]) -> Tensor3 {
    let l = values.len();
    let mut out = Tensor3::zeros((l, l, l));
    for (i, &v) in values.iter().enumerate() {
        out.set(i, i, i, v);
    }
    out
}

/// `I_{4,L} ×_1 A_R ×_2 A_U ×_3 C ×_4 gamma^T`.
///
/// The mode-4 product with the row `gamma^T` collapses the order-4 identity
/// into the order-3 superdiagonal tensor carrying `gamma`, so the result is
/// `N_r x N_t x P` with `vec` equal to `(C ⊙ A_U ⊙ A_R) gamma`. Pass the
/// conjugated UE steering matrix as `a_u`.
pub fn nmode_product_chain(a_r: &CMat, a_u: &CMat, c: &CMat, gamma: &[C64]) -> Result<Tensor3> {
    let l = gamma.len();
    if a_r.ncols() != l || a_u.ncols() != l || c.ncols() != l {
        return Err(Error::ShapeMismatch(format!(
            "factor column counts {}, {}, {} with {l} gains",
            a_r.ncols(),
            a_u.ncols(),
            c.ncols()
        )));
    }
    superdiagonal(gamma)
        .mode_product(a_r, 1)?
        .mode_product(a_u, 2)?
        .mode_product(c, 3)
}
