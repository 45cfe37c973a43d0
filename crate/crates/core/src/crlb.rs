//! Fisher information and Cramér-Rao bounds for the path parameters
//! `(theta, phi, psi, tau, gamma)` and for the overall UE-IRS channel.
//!
//! Each parameter's derivative of the noiseless tensor is written in the
//! unfolding where it is simplest (angles at the IRS in mode 1, the UE angle
//! in mode 2, delay and gain in mode 3). Pairs of derivatives living in
//! different unfoldings are combined through the cross-covariance of the
//! correspondingly unfolded noise, which is a permutation scaled by `sigma^2`.
//!
//! Gains are complex. The complex FIM stores `(1/sigma^2) d_i^H d_j` for
//! entries touching a gain and `(2/sigma^2) Re{d_i^H d_j}` between real
//! parameters. Bounds are computed from the equivalent real FIM over
//! `(theta, phi, psi, tau, Re gamma, Im gamma)`; the gain bound is
//! `var(Re gamma) + var(Im gamma)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::channel::{self, PathParams};
use crate::config::{ScenarioConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::measurement::TrainingOperators;
use crate::tensor::{kron_vec, vec_index_maps};
use crate::{CMat, CVec, C64};

/// Condition number (of the diagonally scaled FIM) above which a ridge is
/// added before inversion.
pub const MAX_FIM_COND: f64 = 1e12;
const RIDGE: f64 = 1e-12;

/// Parameter families in FIM block order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Theta,
    Phi,
    Psi,
    Tau,
    Gamma,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Theta, Family::Phi, Family::Psi, Family::Tau, Family::Gamma];

    /// Unfolding in which this family's derivatives are expressed.
    pub fn mode(self) -> usize {
        match self {
            Family::Theta | Family::Phi => 1,
            Family::Psi => 2,
            Family::Tau | Family::Gamma => 3,
        }
    }

    fn block(self) -> usize {
        self as usize
    }
}

/// Factor matrices and their parameter derivatives.
#[derive(Debug, Clone)]
pub struct DerivativeMatrices {
    /// `A` (Q x L).
    pub a: CMat,
    /// `B` including gains (T_a x L).
    pub b: CMat,
    /// `B` with unit gains, `F^T a_ue^*` (T_a x L).
    pub b0: CMat,
    /// `C` (P x L).
    pub c: CMat,
    /// `dA/dtheta` (Q x L).
    pub a_theta: CMat,
    /// `dA/dphi` (Q x L).
    pub a_phi: CMat,
    /// `dB/dpsi` (T_a x L), gains included.
    pub b_psi: CMat,
    /// Derivative of the mode-3 signal with respect to `gamma_l`, paired
    /// with `b0_l ⊗ a_l`; equal to `C`.
    pub g: CMat,
    /// `d(b_l ⊗ a_l)/dtau_l` (Q T_a x L): the near-field response depends
    /// on the distance `u = c tau`.
    pub c_a: CMat,
    /// Row `l` is `gamma_l dc_l^T/dtau_l` (L x P), paired with `b0_l ⊗ a_l`.
    pub c_b: CMat,
}

fn delay_phase_rate(p: usize, cfg: &ScenarioConfig) -> C64 {
    C64::new(0.0, -2.0 * PI * cfg.sampling_hz * p as f64 / cfg.total_subcarriers as f64)
}

pub fn build_derivative_matrices(
    paths: &[PathParams],
    ops: &TrainingOperators,
    cfg: &ScenarioConfig,
) -> DerivativeMatrices {
    let l = paths.len();
    let (q, t, p) = (cfg.slots, cfg.frames, cfg.subcarriers);
    let mut m = DerivativeMatrices {
        a: CMat::zeros(q, l),
        b: CMat::zeros(t, l),
        b0: CMat::zeros(t, l),
        c: CMat::zeros(p, l),
        a_theta: CMat::zeros(q, l),
        a_phi: CMat::zeros(q, l),
        b_psi: CMat::zeros(t, l),
        g: CMat::zeros(p, l),
        c_a: CMat::zeros(q * t, l),
        c_b: CMat::zeros(l, p),
    };
    for (k, path) in paths.iter().enumerate() {
        let der = channel::irs_response_derivatives(path.theta, path.phi, path.distance, cfg);
        let a = &ops.v_tilde * &der.response;
        let a_tau = &ops.v_tilde * der.d_distance * C64::from(SPEED_OF_LIGHT);
        let b0 = ops.frame_response(&channel::ue_ff_response(path.psi, cfg));
        let b = &b0 * path.gain;
        m.a_theta.set_column(k, &(&ops.v_tilde * &der.d_theta));
        m.a_phi.set_column(k, &(&ops.v_tilde * &der.d_phi));
        m.b_psi
            .set_column(k, &(ops.frame_response(&channel::ue_response_derivative(path.psi, cfg)) * path.gain));
        m.c_a
            .set_column(k, &CVec::from_vec(kron_vec(b.as_slice(), a_tau.as_slice())));
        let z = channel::delay_generator(path.delay(), cfg);
        let mut zp = z;
        for i in 0..p {
            m.c[(i, k)] = zp;
            m.c_b[(k, i)] = path.gain * delay_phase_rate(i + 1, cfg) * zp;
            zp *= z;
        }
        m.a.set_column(k, &a);
        m.b.set_column(k, &b);
        m.b0.set_column(k, &b0);
    }
    m.g = m.c.clone();
    m
}

/// Derivative of the noiseless signal with respect to one parameter,
/// vectorized in the layout of `vec(Y_(mode)^T)`.
fn derivative_vector(m: &DerivativeMatrices, family: Family, k: usize) -> Vec<C64> {
    let col = |x: &CMat| x.column(k).iter().copied().collect::<Vec<_>>();
    let (a, b, b0, c) = (col(&m.a), col(&m.b), col(&m.b0), col(&m.c));
    match family {
        Family::Theta => kron_vec(&col(&m.a_theta), &kron_vec(&c, &b)),
        Family::Phi => kron_vec(&col(&m.a_phi), &kron_vec(&c, &b)),
        Family::Psi => kron_vec(&col(&m.b_psi), &kron_vec(&c, &a)),
        Family::Tau => {
            let ba = kron_vec(&b0, &a);
            let cb: Vec<C64> = m.c_b.row(k).iter().copied().collect();
            let mut v = kron_vec(&c, &col(&m.c_a));
            for (x, y) in v.iter_mut().zip(kron_vec(&cb, &ba)) {
                *x += y;
            }
            v
        }
        Family::Gamma => kron_vec(&col(&m.g), &kron_vec(&b0, &a)),
    }
}

/// Cross-covariance `E[vec(W_(a)^H) vec(W_(b)^H)^H]` of two unfoldings of
/// white noise: `sigma^2` at each `(i_a(x), i_b(x))` over tensor entries `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCrossCovariance {
    pub mode_a: usize,
    pub mode_b: usize,
    pub sigma2: f64,
    /// 0-based `(row, column)` positions of the nonzero entries.
    pub entries: Vec<(usize, usize)>,
}

pub fn noise_cross_covariance(
    mode_a: usize,
    mode_b: usize,
    dims: (usize, usize, usize),
    sigma2: f64,
) -> Result<NoiseCrossCovariance> {
    for mode in [mode_a, mode_b] {
        if !(1..=3).contains(&mode) {
            return Err(Error::InvalidMode(mode));
        }
    }
    let (nq, nt, np) = dims;
    let mut entries = Vec::with_capacity(nq * nt * np);
    for p in 1..=np {
        for t in 1..=nt {
            for q in 1..=nq {
                let (i1, i2, i3) = vec_index_maps(q, t, p, dims)?;
                let pick = |mode| [i1, i2, i3][mode - 1] - 1;
                entries.push((pick(mode_a), pick(mode_b)));
            }
        }
    }
    Ok(NoiseCrossCovariance {
        mode_a,
        mode_b,
        sigma2,
        entries,
    })
}

impl NoiseCrossCovariance {
    /// `x^H C y`.
    pub fn bilinear(&self, x: &[C64], y: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &(i, j) in &self.entries {
            acc += x[i].conj() * y[j];
        }
        acc * self.sigma2
    }

    /// Dense form, for inspection and tests.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.entries.len();
        let mut m = DMatrix::zeros(n, n);
        for &(i, j) in &self.entries {
            m[(i, j)] = self.sigma2;
        }
        m
    }
}

/// Complex Hermitian FIM (5L x 5L) in block order theta, phi, psi, tau, gamma.
#[derive(Debug, Clone)]
pub struct FimMatrix {
    pub j: CMat,
    pub sigma2: f64,
    pub paths: usize,
}

impl FimMatrix {
    /// Index of `(family, path)` in the complex FIM.
    pub fn index(&self, family: Family, path: usize) -> usize {
        family.block() * self.paths + path
    }

    /// Real FIM (6L x 6L) over theta, phi, psi, tau, Re gamma, Im gamma.
    pub fn real_expansion(&self) -> DMatrix<f64> {
        let l = self.paths;
        let nr = 4 * l;
        let mut out = DMatrix::zeros(6 * l, 6 * l);
        for i in 0..nr {
            for k in 0..nr {
                out[(i, k)] = self.j[(i, k)].re;
            }
            for g in 0..l {
                let z = self.j[(i, nr + g)];
                out[(i, nr + g)] = 2.0 * z.re;
                out[(i, nr + l + g)] = -2.0 * z.im;
                out[(nr + g, i)] = 2.0 * z.re;
                out[(nr + l + g, i)] = -2.0 * z.im;
            }
        }
        for g in 0..l {
            for h in 0..l {
                let z = self.j[(nr + g, nr + h)];
                out[(nr + g, nr + h)] = 2.0 * z.re;
                out[(nr + l + g, nr + l + h)] = 2.0 * z.re;
                out[(nr + g, nr + l + h)] = -2.0 * z.im;
                out[(nr + l + g, nr + h)] = 2.0 * z.im;
            }
        }
        out
    }
}

pub fn assemble_fim(
    paths: &[PathParams],
    ops: &TrainingOperators,
    cfg: &ScenarioConfig,
    sigma2: f64,
) -> Result<FimMatrix> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidConfig("noise variance must be positive".into()));
    }
    let dims = (cfg.slots, cfg.frames, cfg.subcarriers);
    let l = paths.len();
    let m = build_derivative_matrices(paths, ops, cfg);
    let mut cov = Vec::with_capacity(9);
    for a in 1..=3 {
        for b in 1..=3 {
            cov.push(noise_cross_covariance(a, b, dims, sigma2)?);
        }
    }
    let params: Vec<(Family, Vec<C64>)> = Family::ALL
        .iter()
        .flat_map(|&f| (0..l).map(move |k| (f, k)))
        .map(|(f, k)| (f, derivative_vector(&m, f, k)))
        .collect();
    let s4 = sigma2 * sigma2;
    let n = params.len();
    let mut j = CMat::zeros(n, n);
    for r in 0..n {
        for c in r..n {
            let (fa, da) = &params[r];
            let (fb, db) = &params[c];
            let x = cov[(fa.mode() - 1) * 3 + fb.mode() - 1].bilinear(da, db);
            let complex = *fa == Family::Gamma || *fb == Family::Gamma;
            let v = if complex { x / s4 } else { C64::from(2.0 * x.re / s4) };
            j[(r, c)] = v;
            j[(c, r)] = v.conj();
        }
        j[(r, r)] = C64::from(j[(r, r)].re);
    }
    Ok(FimMatrix { j, sigma2, paths: l })
}

/// Inverse of a symmetric positive definite FIM, computed on the diagonally
/// scaled matrix so that parameters in very different units do not spoil
/// the conditioning. Returns the inverse and whether a ridge was needed.
pub fn invert_fim(j: &DMatrix<f64>) -> Result<(DMatrix<f64>, bool)> {
    let n = j.nrows();
    let d: Vec<f64> = (0..n).map(|i| j[(i, i)]).collect();
    if d.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::SingularFim);
    }
    let s = DMatrix::from_fn(n, n, |r, c| j[(r, c)] / (d[r] * d[c]).sqrt());
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s.clone()).eigenvalues;
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let mut s = s;
    let regularized = !(lo > 0.0 && hi / lo <= MAX_FIM_COND);
    if regularized {
        let ridge = RIDGE * s.trace() / n as f64;
        for i in 0..n {
            s[(i, i)] += ridge;
        }
    }
    let inv = s.cholesky().ok_or(Error::SingularFim)?.inverse();
    Ok((
        DMatrix::from_fn(n, n, |r, c| inv[(r, c)] / (d[r] * d[c]).sqrt()),
        regularized,
    ))
}

/// Per-family bounds: the trace of each family's block of the inverse FIM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterCrlb {
    pub total: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub tau: f64,
    pub gamma: f64,
    pub regularized: bool,
}

impl ParameterCrlb {
    pub fn family(&self, f: Family) -> f64 {
        match f {
            Family::Theta => self.theta,
            Family::Phi => self.phi,
            Family::Psi => self.psi,
            Family::Tau => self.tau,
            Family::Gamma => self.gamma,
        }
    }
}

pub fn crlb_parameters(fim: &FimMatrix) -> Result<ParameterCrlb> {
    let (inv, regularized) = invert_fim(&fim.real_expansion())?;
    Ok(family_traces(&inv, fim.paths, regularized))
}

fn family_traces(inv: &DMatrix<f64>, l: usize, regularized: bool) -> ParameterCrlb {
    let block = |b: usize| (b * l..(b + 1) * l).map(|i| inv[(i, i)]).sum::<f64>();
    let (theta, phi, psi, tau) = (block(0), block(1), block(2), block(3));
    let gamma = block(4) + block(5);
    ParameterCrlb {
        total: theta + phi + psi + tau + gamma,
        theta,
        phi,
        psi,
        tau,
        gamma,
        regularized,
    }
}

/// One Kronecker term `coef (c ⊗ a_u ⊗ a_r)` of a channel Jacobian column.
#[derive(Debug, Clone)]
struct KronTerm {
    coef: C64,
    c: CVec,
    a_u: CVec,
    a_r: CVec,
}

impl KronTerm {
    fn inner(&self, other: &KronTerm) -> C64 {
        self.coef.conj() * other.coef * self.c.dotc(&other.c) * self.a_u.dotc(&other.a_u) * self.a_r.dotc(&other.a_r)
    }

    fn dense(&self) -> CVec {
        let v = kron_vec(self.c.as_slice(), &kron_vec(self.a_u.as_slice(), self.a_r.as_slice()));
        CVec::from_vec(v) * self.coef
    }
}

fn vandermonde_with_derivative(path: &PathParams, cfg: &ScenarioConfig) -> (CVec, CVec) {
    let z = channel::delay_generator(path.delay(), cfg);
    let mut c = CVec::zeros(cfg.subcarriers);
    let mut dc = CVec::zeros(cfg.subcarriers);
    let mut zp = z;
    for i in 0..cfg.subcarriers {
        c[i] = zp;
        dc[i] = delay_phase_rate(i + 1, cfg) * zp;
        zp *= z;
    }
    (c, dc)
}

/// Columns of `d h_v / d(theta, phi, psi, tau, Re gamma, Im gamma)`, each a
/// sum of Kronecker terms, for `h_v = (C ⊙ A_U^* ⊙ A_R) gamma`.
fn channel_jacobian_terms(paths: &[PathParams], cfg: &ScenarioConfig) -> Vec<Vec<KronTerm>> {
    let l = paths.len();
    let mut cols: Vec<Vec<KronTerm>> = vec![Vec::new(); 6 * l];
    for (k, path) in paths.iter().enumerate() {
        let der = channel::irs_response_derivatives(path.theta, path.phi, path.distance, cfg);
        let a_u = channel::ue_ff_response(path.psi, cfg).map(|z| z.conj());
        let da_u = channel::ue_response_derivative(path.psi, cfg).map(|z| z.conj());
        let (c, dc) = vandermonde_with_derivative(path, cfg);
        let g = path.gain;
        let term = |coef, c: &CVec, a_u: &CVec, a_r: &CVec| KronTerm {
            coef,
            c: c.clone(),
            a_u: a_u.clone(),
            a_r: a_r.clone(),
        };
        cols[k].push(term(g, &c, &a_u, &der.d_theta));
        cols[l + k].push(term(g, &c, &a_u, &der.d_phi));
        cols[2 * l + k].push(term(g, &c, &da_u, &der.response));
        cols[3 * l + k].push(term(g, &dc, &a_u, &der.response));
        cols[3 * l + k].push(term(g * SPEED_OF_LIGHT, &c, &a_u, &der.d_distance));
        cols[4 * l + k].push(term(C64::new(1.0, 0.0), &c, &a_u, &der.response));
        cols[5 * l + k].push(term(C64::new(0.0, 1.0), &c, &a_u, &der.response));
    }
    cols
}

/// Dense channel Jacobian (N_r N_t P x 6L) in the real-parameter order.
/// Memory grows with the full channel size; intended for checks.
pub fn channel_jacobian(paths: &[PathParams], cfg: &ScenarioConfig) -> CMat {
    let cols: Vec<CVec> = channel_jacobian_terms(paths, cfg)
        .iter()
        .map(|terms| terms.iter().map(KronTerm::dense).reduce(|a, b| a + b).expect("nonempty"))
        .collect();
    CMat::from_columns(&cols)
}

/// `tr(Jac J^{-1} Jac^H)` for the vectorized overall channel.
pub fn crlb_channel(fim: &FimMatrix, paths: &[PathParams], cfg: &ScenarioConfig) -> Result<f64> {
    let (inv, _) = invert_fim(&fim.real_expansion())?;
    Ok(channel_bound_from_inverse(&inv, paths, cfg))
}

fn channel_bound_from_inverse(inv: &DMatrix<f64>, paths: &[PathParams], cfg: &ScenarioConfig) -> f64 {
    let cols = channel_jacobian_terms(paths, cfg);
    let n = cols.len();
    let mut total = 0.0;
    for r in 0..n {
        for c in 0..n {
            let mut g = C64::new(0.0, 0.0);
            for x in &cols[r] {
                for y in &cols[c] {
                    g += x.inner(y);
                }
            }
            // inverse is real symmetric, so only Re{Jac^H Jac} contributes
            total += inv[(c, r)] * g.re;
        }
    }
    total.max(0.0)
}

/// All bounds for one scenario at one noise level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrlbReport {
    pub sigma2: f64,
    pub total: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub tau: f64,
    pub gamma: f64,
    pub channel: f64,
    pub regularized: bool,
}

impl CrlbReport {
    /// Same scenario at another noise variance; every bound is linear in it.
    pub fn rescaled(&self, sigma2: f64) -> Self {
        let k = sigma2 / self.sigma2;
        Self {
            sigma2,
            total: self.total * k,
            theta: self.theta * k,
            phi: self.phi * k,
            psi: self.psi * k,
            tau: self.tau * k,
            gamma: self.gamma * k,
            channel: self.channel * k,
            regularized: self.regularized,
        }
    }

    pub fn family(&self, f: Family) -> f64 {
        match f {
            Family::Theta => self.theta,
            Family::Phi => self.phi,
            Family::Psi => self.psi,
            Family::Tau => self.tau,
            Family::Gamma => self.gamma,
        }
    }
}

pub fn crlb_report(
    paths: &[PathParams],
    ops: &TrainingOperators,
    cfg: &ScenarioConfig,
    sigma2: f64,
) -> Result<CrlbReport> {
    let fim = assemble_fim(paths, ops, cfg, sigma2)?;
    let (inv, regularized) = invert_fim(&fim.real_expansion())?;
    let p = family_traces(&inv, fim.paths, regularized);
    Ok(CrlbReport {
        sigma2,
        total: p.total,
        theta: p.theta,
        phi: p.phi,
        psi: p.psi,
        tau: p.tau,
        gamma: p.gamma,
        channel: channel_bound_from_inverse(&inv, paths, cfg),
        regularized,
    })
}
