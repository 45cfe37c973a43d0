//! Browser bindings for the static demo page in `www/`.
//!
//! Angles cross the boundary in degrees, everything else in SI units.
//! The functions are plain Rust as well, so they are tested natively.

use nfirs::channel::{self, PathParams};
use nfirs::estimator::{self, Codebooks};
use nfirs::harness::{metrics, sweep};
use nfirs::{crlb, measurement, ScenarioConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn irs_config(n_y: usize, n_z: usize) -> ScenarioConfig {
    ScenarioConfig {
        n_y: n_y.clamp(1, 128),
        n_z: n_z.clamp(1, 128),
        ..ScenarioConfig::default()
    }
}

/// Phase (radians, in `(-pi, pi]`) of every IRS element for a scatterer at
/// `(theta, phi, distance)`, row-major over `n_z` rows of `n_y` elements.
/// The reference element has phase 0; a planar wavefront would make each
/// row an arithmetic progression.
#[wasm_bindgen]
pub fn irs_phase_pattern(theta_deg: f64, phi_deg: f64, distance_m: f64, n_y: usize, n_z: usize) -> Vec<f64> {
    let cfg = irs_config(n_y, n_z);
    channel::irs_response(theta_deg.to_radians(), phi_deg.to_radians(), distance_m, &cfg)
        .iter()
        .map(|z| z.arg())
        .collect()
}

/// Rayleigh distance (m) of an `n_y x n_z` IRS at the default carrier.
#[wasm_bindgen]
pub fn rayleigh_distance_m(n_y: usize, n_z: usize) -> f64 {
    channel::rayleigh_distance(&irs_config(n_y, n_z))
}

/// Normalized correlation `|a(th, ph, u_assumed)^H a(theta, phi, u)|^2 / N^2`
/// over a `grid x grid` lattice of elevation `(0, 180)` deg (rows) and
/// azimuth `(-90, 90)` deg (columns). With `assumed_distance_m` equal to the
/// true distance the peak sits at the true angles; far-field atoms (a very
/// large assumed distance) smear it for nearby scatterers.
#[wasm_bindgen]
pub fn correlation_map(
    theta_deg: f64,
    phi_deg: f64,
    distance_m: f64,
    assumed_distance_m: f64,
    n_y: usize,
    n_z: usize,
    grid: usize,
) -> Vec<f64> {
    let cfg = irs_config(n_y, n_z);
    let grid = grid.clamp(2, 256);
    let truth = channel::irs_response(theta_deg.to_radians(), phi_deg.to_radians(), distance_m, &cfg);
    let n2 = (cfg.n_r() * cfg.n_r()) as f64;
    let mut atom = vec![nfirs::C64::new(0.0, 0.0); cfg.n_r()];
    let mut out = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        let th = std::f64::consts::PI * (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            let ph = std::f64::consts::PI * ((j as f64 + 0.5) / grid as f64 - 0.5);
            channel::fill_irs_response(th, ph, assumed_distance_m, &cfg, &mut atom);
            let inner: nfirs::C64 = atom.iter().zip(truth.iter()).map(|(a, b)| a.conj() * b).sum();
            out.push(inner.norm_sqr() / n2);
        }
    }
    out
}

#[derive(Serialize)]
struct PathRow {
    theta_deg: f64,
    phi_deg: f64,
    psi_deg: f64,
    distance_m: f64,
    gain_re: f64,
    gain_im: f64,
}

impl PathRow {
    fn new(theta: f64, phi: f64, psi: f64, distance: f64, gain: nfirs::C64) -> Self {
        Self {
            theta_deg: theta.to_degrees(),
            phi_deg: phi.to_degrees(),
            psi_deg: psi.to_degrees(),
            distance_m: distance,
            gain_re: gain.re,
            gain_im: gain.im,
        }
    }
}

impl From<&PathParams> for PathRow {
    fn from(p: &PathParams) -> Self {
        Self::new(p.theta, p.phi, p.psi, p.distance, p.gain)
    }
}

#[derive(Serialize)]
struct TrialView {
    truth: Vec<PathRow>,
    estimate: Vec<PathRow>,
    channel_nmse_db: f64,
    channel_crlb_db: Option<f64>,
    delay_mse_db: f64,
    delay_crlb_db: Option<f64>,
    error: Option<String>,
}

/// Scenario used by [`run_trial`]: the desk-scale arrays with coarser
/// codebooks so a trial stays interactive in the browser.
pub fn demo_config(paths: usize, d_lo: f64, d_hi: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig {
        paths: paths.clamp(1, 6),
        distance_range: [d_lo, d_hi],
        ..ScenarioConfig::default()
    };
    cfg.codebook.g_z = 90;
    cfg.codebook.g_y = 90;
    cfg.codebook.g_u = 360;
    cfg
}

/// Draws one scenario, estimates it at `snr_db` and returns truth, estimate
/// and error figures as JSON. Estimates are listed in the order matched to
/// the truth.
#[wasm_bindgen]
pub fn run_trial(snr_db: f64, paths: usize, seed: u64, d_lo: f64, d_hi: f64) -> String {
    let cfg = demo_config(paths, d_lo, d_hi);
    let view = match trial(&cfg, snr_db, seed) {
        Ok(v) => v,
        Err(e) => TrialView {
            truth: Vec::new(),
            estimate: Vec::new(),
            channel_nmse_db: f64::NAN,
            channel_crlb_db: None,
            delay_mse_db: f64::NAN,
            delay_crlb_db: None,
            error: Some(format!("{}: {e}", e.kind())),
        },
    };
    serde_json::to_string(&view).expect("plain data serializes")
}

fn trial(cfg: &ScenarioConfig, snr_db: f64, seed: u64) -> nfirs::Result<TrialView> {
    cfg.validate()?;
    let (paths, ops) = sweep::trial_scenario(cfg, seed, 0);
    let clean = measurement::synthesize_noiseless(&paths, &ops, cfg)?;
    let y = measurement::add_noise(&clean, ops, snr_db, sweep::noise_seed(seed, 0, 0));
    let bound = if y.sigma2 > 0.0 {
        crlb::crlb_report(&paths, &y.operators, cfg, y.sigma2).ok()
    } else {
        None
    };
    let books = Codebooks::from_config(cfg);
    let est = match estimator::estimate(&y, cfg, &books) {
        Ok(est) => est,
        Err(e) => {
            return Ok(TrialView {
                truth: paths.iter().map(PathRow::from).collect(),
                estimate: Vec::new(),
                channel_nmse_db: f64::NAN,
                channel_crlb_db: None,
                delay_mse_db: f64::NAN,
                delay_crlb_db: None,
                error: Some(format!("{}: {e}", e.kind())),
            })
        }
    };
    let matched = metrics::aligned(&paths, &est.paths)?;
    let est_paths: Vec<PathParams> = matched.iter().map(|e| e.to_path()).collect();
    let h2 = channel::overall_channel(&paths, cfg).norm_sqr();
    let delay_mse = paths
        .iter()
        .zip(&matched)
        .map(|(p, e)| (p.delay() - e.delay).powi(2))
        .sum::<f64>();
    Ok(TrialView {
        truth: paths.iter().map(PathRow::from).collect(),
        estimate: matched
            .iter()
            .map(|e| PathRow::new(e.theta, e.phi, e.psi, e.distance, e.gain))
            .collect(),
        channel_nmse_db: metrics::to_db(metrics::channel_nmse(&paths, &est_paths, cfg)?),
        channel_crlb_db: bound.map(|b| metrics::to_db(b.channel / h2)),
        delay_mse_db: metrics::to_db(delay_mse),
        delay_crlb_db: bound.map(|b| metrics::to_db(b.tau)),
        error: None,
    })
}
