//! Tensor-based channel parameter estimation.
//!
//! Steps: truncated SVD of the mode-1 unfolding, shift invariance across
//! subcarrier blocks for the delay generators, factor recovery for `B` and
//! `A`, a distance-conditioned codebook search for the IRS angles, a UE angle
//! search, and a least-squares gain fit.

mod codebook;

use std::f64::consts::PI;

use serde::Serialize;

pub use codebook::{
    irs_scores, search_irs_angles, search_ue_angle, ue_scores, Codebooks, CorrelationMetric, GridPeak,
};

use crate::channel::{self, PathParams};
use crate::config::{ScenarioConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::linalg;
use crate::measurement::{FactorMatrices, MeasurementTensor, TrainingOperators};
use crate::tensor::{khatri_rao, Tensor3};
use crate::{CMat, CVec, C64};

/// Relative threshold on the L-th singular value.
pub const RANK_TOLERANCE: f64 = 1e-12;
/// Largest accepted condition number of the eigenvector matrix.
pub const MAX_EIGVEC_COND: f64 = 1e8;

/// One estimated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathEstimate {
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub delay: f64,
    /// `delay * c`.
    pub distance: f64,
    #[serde(with = "crate::serde_c64")]
    pub gain: C64,
}

impl PathEstimate {
    pub fn to_path(&self) -> PathParams {
        PathParams {
            theta: self.theta,
            phi: self.phi,
            psi: self.psi,
            distance: self.distance,
            gain: self.gain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// All singular values of `Y_(1)^T`, nonincreasing.
    pub singular_values: Vec<f64>,
    /// `|z_l|` before projection onto the unit circle.
    pub eigenvalue_moduli: Vec<f64>,
    /// Condition number of the column-normalized eigenvector matrix.
    pub eigvec_cond: f64,
    /// Best IRS codebook score per path.
    pub irs_peaks: Vec<f64>,
    /// Best UE codebook score per path.
    pub ue_peaks: Vec<f64>,
    /// Frobenius norm of the off-diagonal part of the gain fit.
    pub gain_leakage: f64,
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub paths: Vec<PathEstimate>,
    /// Recovered `A`, `B` and `C`.
    pub factors: FactorMatrices,
    pub diagnostics: Diagnostics,
}

impl EstimationResult {
    pub fn to_paths(&self) -> Vec<PathParams> {
        self.paths.iter().map(PathEstimate::to_path).collect()
    }
}

/// Top-`l` left singular vectors of `Y_(1)^T` with the full spectrum.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: CMat,
    pub singular_values: Vec<f64>,
    pub v_t: CMat,
}

pub fn truncated_svd_mode1(y: &Tensor3, l: usize, cfg: &ScenarioConfig) -> Result<TruncatedSvd> {
    let available = cfg.max_resolvable_paths();
    if available < l {
        return Err(Error::UniquenessViolation { available, paths: l });
    }
    let y1t = y.unfold(1)?.transpose();
    let svd = linalg::svd_sorted(&y1t);
    let s = &svd.singular_values;
    if l > s.len() {
        return Err(Error::UniquenessViolation {
            available: s.len(),
            paths: l,
        });
    }
    let threshold = RANK_TOLERANCE * s[0];
    if l > 0 && !(s[l - 1] >= threshold && s[l - 1] > 0.0) {
        return Err(Error::RankDeficient {
            index: l,
            value: s[l - 1],
            threshold,
        });
    }
    Ok(TruncatedSvd {
        u: svd.u.columns(0, l).into_owned(),
        singular_values: svd.singular_values.clone(),
        v_t: svd.v_t.rows(0, l).into_owned(),
    })
}

/// Eigen-structure of `U_1^+ U_2`.
#[derive(Debug, Clone)]
pub struct ShiftInvariance {
    /// Eigenvalues sorted by phase, descending.
    pub z: Vec<C64>,
    /// Matching unit-norm eigenvectors.
    pub m: CMat,
    pub cond: f64,
}

/// `U_1` drops the last subcarrier block of `U` and `U_2` the first; the
/// eigenvalues of `U_1^+ U_2` are the delay generators.
pub fn shift_invariance_evd(u: &CMat, frames: usize) -> Result<ShiftInvariance> {
    let rows = u.nrows();
    if frames == 0 || rows % frames != 0 || rows / frames < 2 {
        return Err(Error::ShapeMismatch(format!(
            "{rows} rows cannot be split into at least two blocks of {frames}"
        )));
    }
    let n = rows - frames;
    let u1 = u.rows(0, n).into_owned();
    let u2 = u.rows(frames, n).into_owned();
    let psi = linalg::pinv(&u1) * u2;
    let (lambda, vecs) = linalg::eig(&psi);
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&a, &b| lambda[b].arg().total_cmp(&lambda[a].arg()));
    let z: Vec<C64> = order.iter().map(|&i| lambda[i]).collect();
    let m = CMat::from_fn(vecs.nrows(), vecs.ncols(), |r, c| vecs[(r, order[c])]);
    let cond = linalg::cond(&m);
    if !(cond <= MAX_EIGVEC_COND) {
        return Err(Error::IllConditioned(cond));
    }
    Ok(ShiftInvariance { z, m, cond })
}

/// Delay and distance from a generator estimate, after projecting it onto
/// the unit circle. The delay is mapped into `[0, P_0 / f_s)`.
pub fn recover_delay(z: C64, cfg: &ScenarioConfig) -> (f64, f64) {
    let arg = (z / z.norm()).arg();
    let period = cfg.delay_period();
    let mut tau = -arg * cfg.total_subcarriers as f64 / (2.0 * PI * cfg.sampling_hz);
    if arg > 0.0 {
        tau += period;
    }
    if tau >= period {
        tau -= period;
    }
    (tau, tau * SPEED_OF_LIGHT)
}

/// `[z, z^2, ..., z^P]` with `z` projected onto the unit circle.
pub fn vandermonde_column(z: C64, p: usize) -> CVec {
    let z = z / z.norm();
    let mut out = CVec::zeros(p);
    let mut zp = z;
    for i in 0..p {
        out[i] = zp;
        zp *= z;
    }
    out
}

/// `b_l = ((c_l^H / c_l^H c_l) ⊗ I_T) U m_l` for every column of `m`.
pub fn recover_b_columns(u: &CMat, m: &CMat, c_hat: &CMat, frames: usize) -> CMat {
    let l = m.ncols();
    let p = c_hat.nrows();
    let mut b = CMat::zeros(frames, l);
    for k in 0..l {
        let x = u * m.column(k);
        let c = c_hat.column(k);
        let energy = c.norm_squared();
        for t in 0..frames {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..p {
                acc += c[i].conj() * x[i * frames + t];
            }
            b[(t, k)] = acc / energy;
        }
    }
    b
}

fn full_column_rank(m: &CMat) -> Result<()> {
    let rank = linalg::numerical_rank(m);
    if rank < m.ncols() {
        return Err(Error::SingularKhatriRao {
            rank,
            expected: m.ncols(),
        });
    }
    Ok(())
}

/// Least-squares `A = Y_(1) ((C ⊙ B)^T)^+`.
pub fn recover_a(y1: &CMat, c_hat: &CMat, b_hat: &CMat) -> Result<CMat> {
    let kr = khatri_rao(c_hat, b_hat)?;
    full_column_rank(&kr)?;
    Ok(y1 * linalg::pinv(&kr.transpose()))
}

/// Gains from `Y_(2)` given reconstructed `A` (Q x L), unit-gain `B`
/// (T_a x L) and `C`. Returns the gains and the off-diagonal leakage.
pub fn recover_gains(y2: &CMat, a_bar: &CMat, b_bar: &CMat, c_bar: &CMat) -> Result<(Vec<C64>, f64)> {
    let kr = khatri_rao(c_bar, a_bar)?;
    full_column_rank(&kr)?;
    full_column_rank(b_bar)?;
    let b_prime = y2 * linalg::pinv(&kr.transpose());
    let g = linalg::pinv(b_bar) * b_prime;
    let gains = (0..g.ncols()).map(|i| g[(i, i)]).collect();
    let mut leak = 0.0;
    for (r, c) in itertools::iproduct!(0..g.nrows(), 0..g.ncols()) {
        if r != c {
            leak += g[(r, c)].norm_sqr();
        }
    }
    Ok((gains, leak.sqrt()))
}

/// Runs the full estimator on a measurement tensor; the path count is
/// `cfg.paths`.
pub fn estimate(y: &MeasurementTensor, cfg: &ScenarioConfig, books: &Codebooks) -> Result<EstimationResult> {
    estimate_tensor(&y.data, &y.operators, cfg, books)
}

pub fn estimate_tensor(
    y: &Tensor3,
    ops: &TrainingOperators,
    cfg: &ScenarioConfig,
    books: &Codebooks,
) -> Result<EstimationResult> {
    let l = cfg.paths;
    let dims = (cfg.slots, cfg.frames, cfg.subcarriers);
    if y.dims() != dims {
        return Err(Error::ShapeMismatch(format!(
            "tensor is {:?}, scenario expects {dims:?}",
            y.dims()
        )));
    }
    ops.check_dims(cfg)?;

    let svd = truncated_svd_mode1(y, l, cfg)?;
    let si = shift_invariance_evd(&svd.u, cfg.frames)?;

    let delays: Vec<(f64, f64)> = si.z.iter().map(|&z| recover_delay(z, cfg)).collect();
    let c_hat = CMat::from_fn(cfg.subcarriers, l, |p, k| {
        let z = si.z[k] / si.z[k].norm();
        z.powi(p as i32 + 1)
    });
    let b_hat = recover_b_columns(&svd.u, &si.m, &c_hat, cfg.frames);
    let y1 = y.unfold(1)?;
    let a_hat = recover_a(&y1, &c_hat, &b_hat)?;

    let mut irs_peaks = Vec::with_capacity(l);
    let mut ue_peaks = Vec::with_capacity(l);
    let mut angles = Vec::with_capacity(l);
    for k in 0..l {
        let a_col = a_hat.column(k).into_owned();
        let (theta, phi, ip) = search_irs_angles(&a_col, delays[k].1, books, ops, cfg);
        let b_col = b_hat.column(k).into_owned();
        let (psi, up) = search_ue_angle(&b_col, books, &ops.f, cfg);
        irs_peaks.push(ip.score);
        ue_peaks.push(up.score);
        angles.push((theta, phi, psi));
    }

    let a_bar = CMat::from_columns(
        &angles
            .iter()
            .zip(&delays)
            .map(|(&(th, ph, _), &(_, u))| &ops.v_tilde * channel::irs_response(th, ph, u, cfg))
            .collect::<Vec<_>>(),
    );
    let b_bar = CMat::from_columns(
        &angles
            .iter()
            .map(|&(_, _, psi)| ops.frame_response(&channel::ue_ff_response(psi, cfg)))
            .collect::<Vec<_>>(),
    );
    let y2 = y.unfold(2)?;
    let (gains, gain_leakage) = recover_gains(&y2, &a_bar, &b_bar, &c_hat)?;

    let paths = (0..l)
        .map(|k| PathEstimate {
            theta: angles[k].0,
            phi: angles[k].1,
            psi: angles[k].2,
            delay: delays[k].0,
            distance: delays[k].1,
            gain: gains[k],
        })
        .collect();
    Ok(EstimationResult {
        paths,
        factors: FactorMatrices {
            a: a_hat,
            b: b_hat,
            c: c_hat,
        },
        diagnostics: Diagnostics {
            singular_values: svd.singular_values,
            eigenvalue_moduli: si.z.iter().map(|z| z.norm()).collect(),
            eigvec_cond: si.cond,
            irs_peaks,
            ue_peaks,
            gain_leakage,
        },
    })
}
