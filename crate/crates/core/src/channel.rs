//! Array responses and per-subcarrier channel matrices.
//!
//! The IRS sits in the y-z plane with its reference element at the origin;
//! element `(n_y, n_z)` (1-based) is at `(0, (n_y - 1) d, (n_z - 1) d)`. The
//! flattened element index is `k = (n_z - 1) N_y + (n_y - 1)`, so `n_y`
//! runs fastest.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::{ScenarioConfig, SPEED_OF_LIGHT};
use crate::tensor::{nmode_product_chain, Tensor3};
use crate::{CMat, CVec, C64};

/// One UE-IRS propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    /// Elevation angle of arrival at the IRS.
    pub theta: f64,
    /// Azimuth angle of arrival at the IRS.
    pub phi: f64,
    /// Angle of departure at the UE.
    pub psi: f64,
    /// IRS-scatterer distance `u` in meters.
    pub distance: f64,
    #[serde(with = "crate::serde_c64")]
    pub gain: C64,
}

pub type PathSet = Vec<PathParams>;

impl PathParams {
    pub fn from_delay(theta: f64, phi: f64, psi: f64, delay: f64, gain: C64) -> Self {
        Self {
            theta,
            phi,
            psi,
            distance: delay * SPEED_OF_LIGHT,
            gain,
        }
    }

    /// Propagation delay `u / c` in seconds.
    pub fn delay(&self) -> f64 {
        self.distance / SPEED_OF_LIGHT
    }
}

/// Far-field BS-IRS link, assumed known to the receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BsIrsLink {
    #[serde(with = "crate::serde_c64")]
    pub gain: C64,
    /// Delay in seconds.
    pub delay_s: f64,
    /// Angle of arrival at the BS.
    pub phi_b: f64,
    /// Elevation of departure at the IRS.
    pub theta_irs: f64,
    /// Azimuth of departure at the IRS.
    pub phi_irs: f64,
}

impl Default for BsIrsLink {
    fn default() -> Self {
        Self {
            gain: C64::new(1.0, 0.0),
            delay_s: 0.0,
            phi_b: 0.4,
            theta_irs: 1.1,
            phi_irs: 0.7,
        }
    }
}

/// Phase `e^{-j x}`.
#[inline]
pub(crate) fn expj_neg(x: f64) -> C64 {
    let (s, c) = x.sin_cos();
    C64::new(c, -s)
}

/// Flattened (0-based) IRS element index of the 1-based `(n_y, n_z)`.
pub fn element_index(n_y: usize, n_z: usize, cfg: &ScenarioConfig) -> usize {
    debug_assert!((1..=cfg.n_y).contains(&n_y) && (1..=cfg.n_z).contains(&n_z));
    (n_z - 1) * cfg.n_y + (n_y - 1)
}

/// 0-based `(n_y - 1, n_z - 1)` offsets of flattened element `k`.
pub fn element_offsets(k: usize, cfg: &ScenarioConfig) -> (usize, usize) {
    (k % cfg.n_y, k / cfg.n_y)
}

/// `u_k^2 - u^2` for the element at offsets `(my, mz)`.
#[inline]
fn squared_excess(st_sp: f64, ct: f64, u: f64, my: f64, mz: f64, d: f64) -> f64 {
    (my * my + mz * mz) * d * d - 2.0 * my * d * u * st_sp - 2.0 * mz * d * u * ct
}

/// Distance from the scatterer of `path` to IRS element `(n_y, n_z)`, 1-based.
pub fn nf_element_distance(path: &PathParams, n_y: usize, n_z: usize, cfg: &ScenarioConfig) -> f64 {
    let u = path.distance;
    let ex = squared_excess(
        path.theta.sin() * path.phi.sin(),
        path.theta.cos(),
        u,
        (n_y - 1) as f64,
        (n_z - 1) as f64,
        cfg.spacing_m,
    );
    (u * u + ex).sqrt()
}

/// Near-field IRS response for angles `(theta, phi)` and distance `u`.
pub fn irs_response(theta: f64, phi: f64, u: f64, cfg: &ScenarioConfig) -> CVec {
    let mut out = CVec::zeros(cfg.n_r());
    fill_irs_response(theta, phi, u, cfg, out.as_mut_slice());
    out
}

/// Writes the near-field IRS response into `out` (length `N_r`). Used by the
/// codebook search to avoid an allocation per grid point.
pub fn fill_irs_response(theta: f64, phi: f64, u: f64, cfg: &ScenarioConfig, out: &mut [C64]) {
    let st_sp = theta.sin() * phi.sin();
    let ct = theta.cos();
    let d = cfg.spacing_m;
    let k0 = 2.0 * PI / cfg.wavelength();
    let mut k = 0;
    for mz in 0..cfg.n_z {
        for my in 0..cfg.n_y {
            let ex = squared_excess(st_sp, ct, u, my as f64, mz as f64, d);
            // u_k - u written without cancellation.
            let den = (u * u + ex).sqrt() + u;
            let du = if den > 0.0 { ex / den } else { 0.0 };
            out[k] = expj_neg(k0 * du);
            k += 1;
        }
    }
}

pub fn irs_nf_response(path: &PathParams, cfg: &ScenarioConfig) -> CVec {
    irs_response(path.theta, path.phi, path.distance, cfg)
}

/// IRS response with its partial derivatives.
#[derive(Debug, Clone)]
pub struct IrsResponseDerivatives {
    pub response: CVec,
    pub d_theta: CVec,
    pub d_phi: CVec,
    /// Derivative with respect to the distance `u` (per meter).
    pub d_distance: CVec,
}

pub fn irs_response_derivatives(theta: f64, phi: f64, u: f64, cfg: &ScenarioConfig) -> IrsResponseDerivatives {
    let n = cfg.n_r();
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let d = cfg.spacing_m;
    let k0 = 2.0 * PI / cfg.wavelength();
    let response = irs_response(theta, phi, u, cfg);
    let mut d_theta = CVec::zeros(n);
    let mut d_phi = CVec::zeros(n);
    let mut d_distance = CVec::zeros(n);
    for k in 0..n {
        let (my, mz) = element_offsets(k, cfg);
        let (y, z) = (my as f64 * d, mz as f64 * d);
        let uk = (u * u + squared_excess(st * sp, ct, u, my as f64, mz as f64, d)).sqrt();
        let dt = (-y * u * ct * sp + z * u * st) / uk;
        let dp = -y * u * st * cp / uk;
        let du = (u - y * st * sp - z * ct) / uk - 1.0;
        let w = response[k] * C64::new(0.0, -k0);
        d_theta[k] = w * dt;
        d_phi[k] = w * dp;
        d_distance[k] = w * du;
    }
    IrsResponseDerivatives {
        response,
        d_theta,
        d_phi,
        d_distance,
    }
}

/// Uniform linear array response `e^{-j 2 pi (n - 1) d x / lambda}` for a
/// direction cosine `x`.
pub fn ula_response(n: usize, x: f64, cfg: &ScenarioConfig) -> CVec {
    let k = 2.0 * PI * cfg.spacing_m / cfg.wavelength() * x;
    CVec::from_iterator(n, (0..n).map(|i| expj_neg(k * i as f64)))
}

pub fn ue_ff_response(psi: f64, cfg: &ScenarioConfig) -> CVec {
    ula_response(cfg.n_t, psi.sin(), cfg)
}

/// Derivative of [`ue_ff_response`] with respect to `psi`.
pub fn ue_response_derivative(psi: f64, cfg: &ScenarioConfig) -> CVec {
    let k = 2.0 * PI * cfg.spacing_m / cfg.wavelength() * psi.cos();
    let a = ue_ff_response(psi, cfg);
    CVec::from_iterator(cfg.n_t, a.iter().enumerate().map(|(i, &v)| v * C64::new(0.0, -k * i as f64)))
}

pub fn bs_ff_response(phi_b: f64, cfg: &ScenarioConfig) -> CVec {
    ula_response(cfg.n_b, phi_b.sin(), cfg)
}

/// Far-field IRS response: the y-axis factor uses `sin(theta) sin(phi)` and
/// the z-axis factor `cos(phi)`, combined in the element order above.
pub fn irs_ff_response(theta_irs: f64, phi_irs: f64, cfg: &ScenarioConfig) -> CVec {
    let ay = ula_response(cfg.n_y, theta_irs.sin() * phi_irs.sin(), cfg);
    let az = ula_response(cfg.n_z, phi_irs.cos(), cfg);
    CVec::from_iterator(
        cfg.n_r(),
        (0..cfg.n_z).flat_map(|mz| {
            let az = &az;
            ay.iter().map(move |&y| y * az[mz])
        }),
    )
}

/// Delay generator `z = e^{-j 2 pi f_s tau / P_0}`.
pub fn delay_generator(delay: f64, cfg: &ScenarioConfig) -> C64 {
    expj_neg(2.0 * PI * cfg.sampling_hz * delay / cfg.total_subcarriers as f64)
}

/// UE-IRS channel `H_{u,p}` (N_r x N_t) on 1-based subcarrier `p`.
pub fn ue_irs_channel(paths: &[PathParams], p: usize, cfg: &ScenarioConfig) -> CMat {
    let mut h = CMat::zeros(cfg.n_r(), cfg.n_t);
    for path in paths {
        let phase = delay_generator(path.delay(), cfg).powi(p as i32);
        let a = irs_nf_response(path, cfg) * (path.gain * phase);
        let b = ue_ff_response(path.psi, cfg);
        h += a * b.adjoint();
    }
    h
}

/// BS-IRS channel `H_{s,p}` (N_b x N_r) on 1-based subcarrier `p`.
pub fn bs_irs_channel(link: &BsIrsLink, p: usize, cfg: &ScenarioConfig) -> CMat {
    let phase = expj_neg(2.0 * PI * cfg.sampling_hz * link.delay_s * p as f64 / cfg.total_subcarriers as f64);
    let ab = bs_ff_response(link.phi_b, cfg) * (link.gain * phase);
    ab * irs_ff_response(link.theta_irs, link.phi_irs, cfg).adjoint()
}

/// Overall UE-IRS channel as an `N_r x N_t x P` tensor whose slice `p` is
/// `H_{u,p}`; its vectorization is `(C ⊙ A_U^* ⊙ A_R) gamma`.
pub fn overall_channel(paths: &[PathParams], cfg: &ScenarioConfig) -> Tensor3 {
    let l = paths.len();
    let a_r = CMat::from_columns(&paths.iter().map(|p| irs_nf_response(p, cfg)).collect::<Vec<_>>());
    let a_u = CMat::from_columns(
        &paths
            .iter()
            .map(|p| ue_ff_response(p.psi, cfg).map(|z| z.conj()))
            .collect::<Vec<_>>(),
    );
    let c = CMat::from_fn(cfg.subcarriers, l, |i, k| {
        delay_generator(paths[k].delay(), cfg).powi(i as i32 + 1)
    });
    let gains: Vec<C64> = paths.iter().map(|p| p.gain).collect();
    if l == 0 {
        return Tensor3::zeros((cfg.n_r(), cfg.n_t, cfg.subcarriers));
    }
    nmode_product_chain(&a_r, &a_u, &c, &gains).expect("factor shapes agree")
}

/// `2 D^2 / lambda` with `D` the longer IRS side `(max(N_y, N_z) - 1) d`.
pub fn rayleigh_distance(cfg: &ScenarioConfig) -> f64 {
    let side = (cfg.n_y.max(cfg.n_z) - 1) as f64 * cfg.spacing_m;
    2.0 * side * side / cfg.wavelength()
}

/// Circularly-symmetric complex Gaussian sample with unit variance.
pub fn sample_unit_cn<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// True when every pair of delay generators is at least `min_sep` apart.
pub fn generators_separated(paths: &[PathParams], cfg: &ScenarioConfig, min_sep: f64) -> bool {
    let z: Vec<C64> = paths.iter().map(|p| delay_generator(p.delay(), cfg)).collect();
    z.iter()
        .enumerate()
        .all(|(i, a)| z[..i].iter().all(|b| (a - b).norm() >= min_sep))
}

const MAX_RESAMPLES: usize = 10_000;

/// Draws `cfg.paths` paths with uniform angles and distance and unit-variance
/// complex Gaussian gains. A path whose delay generator lands within
/// `cfg.min_generator_separation` of an earlier one is redrawn.
pub fn sample_paths<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> PathSet {
    let mut paths = PathSet::with_capacity(cfg.paths);
    while paths.len() < cfg.paths {
        let mut attempt = 0;
        loop {
            let candidate = PathParams {
                theta: uniform(rng, cfg.theta_range),
                phi: uniform(rng, cfg.phi_range),
                psi: uniform(rng, cfg.psi_range),
                distance: uniform(rng, cfg.distance_range),
                gain: sample_unit_cn(rng),
            };
            paths.push(candidate);
            attempt += 1;
            if attempt >= MAX_RESAMPLES || generators_separated(&paths, cfg, cfg.min_generator_separation) {
                break;
            }
            paths.pop();
        }
    }
    paths
}
