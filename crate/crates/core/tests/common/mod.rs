//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use nfirs::channel::{self, PathParams};
use nfirs::measurement::{self, TrainingOperators};
use nfirs::{CMat, ScenarioConfig, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| channel::sample_unit_cn(rng))
}

pub fn rel_err(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm()
}

/// Small scenario used by the FIM checks.
pub fn fim_scenario() -> ScenarioConfig {
    ScenarioConfig {
        n_y: 4,
        n_z: 4,
        n_t: 8,
        n_b: 8,
        slots: 8,
        frames: 8,
        subcarriers: 8,
        paths: 2,
        ..ScenarioConfig::default()
    }
}

/// Received pilot `w^H H_s diag(v_q) H_{u,p} F[:, t]` evaluated directly from
/// the channel matrices.
pub fn physical_chain(paths: &[PathParams], ops: &TrainingOperators, cfg: &ScenarioConfig, q: usize, t: usize, p: usize) -> C64 {
    let hs = channel::bs_irs_channel(&cfg.link, p + 1, cfg);
    let hu = channel::ue_irs_channel(paths, p + 1, cfg);
    let whs = ops.w.adjoint() * hs;
    let x = ops.f.column(t);
    let hx = hu * x;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..cfg.n_r() {
        acc += whs[(0, i)] * ops.v[(q, i)] * hx[i];
    }
    acc
}

/// Real parameter vector `(theta, phi, psi, tau, Re gamma, Im gamma)`.
pub fn to_real_params(paths: &[PathParams]) -> Vec<f64> {
    let mut x = Vec::new();
    x.extend(paths.iter().map(|p| p.theta));
    x.extend(paths.iter().map(|p| p.phi));
    x.extend(paths.iter().map(|p| p.psi));
    x.extend(paths.iter().map(|p| p.delay()));
    x.extend(paths.iter().map(|p| p.gain.re));
    x.extend(paths.iter().map(|p| p.gain.im));
    x
}

pub fn from_real_params(x: &[f64]) -> Vec<PathParams> {
    let l = x.len() / 6;
    (0..l)
        .map(|k| PathParams::from_delay(x[k], x[l + k], x[2 * l + k], x[3 * l + k], C64::new(x[4 * l + k], x[5 * l + k])))
        .collect()
}

/// Central-difference step per real parameter family.
pub fn fd_steps(paths: &[PathParams], cfg: &ScenarioConfig) -> Vec<f64> {
    let l = paths.len();
    // delay step giving a 1e-5 rad phase change on the last subcarrier
    let tau_step = 1e-5 * cfg.total_subcarriers as f64
        / (2.0 * std::f64::consts::PI * cfg.sampling_hz * cfg.subcarriers as f64);
    let mut h = vec![1e-6; 6 * l];
    for k in 0..l {
        h[3 * l + k] = tau_step;
    }
    h
}

/// Jacobian of `vec(Y)` with respect to the real parameters, by central
/// differences of the tensor synthesis.
pub fn fd_signal_jacobian(paths: &[PathParams], ops: &TrainingOperators, cfg: &ScenarioConfig) -> CMat {
    let x0 = to_real_params(paths);
    let h = fd_steps(paths, cfg);
    let n = cfg.tensor_len();
    let mut jac = CMat::zeros(n, x0.len());
    for i in 0..x0.len() {
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[i] += h[i];
        xm[i] -= h[i];
        let yp = measurement::synthesize_noiseless(&from_real_params(&xp), ops, cfg).unwrap();
        let ym = measurement::synthesize_noiseless(&from_real_params(&xm), ops, cfg).unwrap();
        for (r, (a, b)) in yp.as_slice().iter().zip(ym.as_slice()).enumerate() {
            jac[(r, i)] = (a - b) / (2.0 * h[i]);
        }
    }
    jac
}

/// Gaussian-model FIM `(2/sigma^2) Re{J^H J}` over the real parameters.
pub fn fd_fim(paths: &[PathParams], ops: &TrainingOperators, cfg: &ScenarioConfig, sigma2: f64) -> DMatrix<f64> {
    let jac = fd_signal_jacobian(paths, ops, cfg);
    let g = jac.adjoint() * &jac;
    DMatrix::from_fn(g.nrows(), g.ncols(), |r, c| 2.0 * g[(r, c)].re / sigma2)
}

/// Largest `|A_ij - B_ij| / sqrt(B_ii B_jj)`.
pub fn max_normalized_entry_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let scale = (b[(i, i)] * b[(j, j)]).sqrt();
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / scale);
        }
    }
    worst
}

/// Scenario with well-separated random paths for the FIM checks.
pub fn fim_paths(cfg: &ScenarioConfig, seed: u64) -> (Vec<PathParams>, TrainingOperators) {
    let mut r = rng(seed);
    let paths = channel::sample_paths(cfg, &mut r);
    let ops = measurement::make_training_operators(cfg, &cfg.link, seed ^ 0xA5A5);
    (paths, ops)
}
