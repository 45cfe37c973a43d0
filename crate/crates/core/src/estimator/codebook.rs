//! Angle codebooks and the distance-conditioned grid searches.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{self, PathParams, PathSet};
use crate::config::ScenarioConfig;
use crate::measurement::TrainingOperators;
use crate::{CMat, CVec, C64};

/// Score used to compare a query vector with a codebook atom `x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMetric {
    /// `|q^H x|^2 / (||q||^2 ||x||^2)`, the squared cosine similarity.
    #[default]
    Normalized,
    /// `|q^H x|^2 / (||q|| ||x||)`. Favors atoms with a large norm, which
    /// matters because `||V~ a_IRS||` varies over the grid.
    Unsquared,
}

impl CorrelationMetric {
    #[inline]
    pub fn score(self, inner_abs2: f64, query_norm: f64, atom_norm: f64) -> f64 {
        if atom_norm == 0.0 || query_norm == 0.0 {
            return 0.0;
        }
        match self {
            CorrelationMetric::Normalized => inner_abs2 / (query_norm * query_norm * atom_norm * atom_norm),
            CorrelationMetric::Unsquared => inner_abs2 / (query_norm * atom_norm),
        }
    }
}

/// The IRS angle grid (`theta` x `phi`) and the UE angle grid.
///
/// Entry `i` (0-based) of each grid is `min + (i + 1) step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebooks {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub metric: CorrelationMetric,
}

fn lattice(min: f64, step: f64, size: usize) -> Vec<f64> {
    (1..=size).map(|i| min + i as f64 * step).collect()
}

fn axis(range: [f64; 2], size: usize, min: Option<f64>, step: Option<f64>) -> Vec<f64> {
    let min = min.unwrap_or(range[0]);
    let step = step.unwrap_or((range[1] - range[0]) / size as f64);
    lattice(min, step, size)
}

impl Codebooks {
    pub fn from_config(cfg: &ScenarioConfig) -> Self {
        let cb = &cfg.codebook;
        Self {
            theta: axis(cfg.theta_range, cb.g_z, cb.theta_min, cb.theta_step),
            phi: axis(cfg.phi_range, cb.g_y, cb.phi_min, cb.phi_step),
            psi: axis(cfg.psi_range, cb.g_u, cb.psi_min, cb.psi_step),
            metric: cb.metric,
        }
    }

    /// Draws `cfg.paths` paths whose angles sit on interior grid points
    /// (the outer tenth of each axis is skipped, which keeps away from the
    /// poles where azimuth becomes unobservable). Distances and gains are
    /// drawn as in [`channel::sample_paths`].
    pub fn sample_on_grid_paths<R: Rng + ?Sized>(&self, cfg: &ScenarioConfig, rng: &mut R) -> PathSet {
        fn pick<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> f64 {
            let n = grid.len();
            let lo = n / 10;
            let hi = (n - n / 10).max(lo + 1);
            grid[rng.random_range(lo..hi)]
        }
        let mut paths = PathSet::with_capacity(cfg.paths);
        while paths.len() < cfg.paths {
            let [d_lo, d_hi] = cfg.distance_range;
            let path = PathParams {
                theta: pick(&self.theta, rng),
                phi: pick(&self.phi, rng),
                psi: pick(&self.psi, rng),
                distance: if d_hi > d_lo { rng.random_range(d_lo..d_hi) } else { d_lo },
                gain: channel::sample_unit_cn(rng),
            };
            paths.push(path);
            if !channel::generators_separated(&paths, cfg, cfg.min_generator_separation) {
                paths.pop();
            }
        }
        paths
    }
}

/// Best grid point of a search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPeak {
    /// 0-based grid index; for the IRS grid `(i, j)` is flattened as
    /// `i * G_y + j`.
    pub index: usize,
    pub score: f64,
}

/// Calls `visit(i, j, score)` for every IRS grid point, `i` over `theta`
/// (outer) and `j` over `phi` (inner).
pub fn irs_scores(
    a_hat: &CVec,
    distance: f64,
    books: &Codebooks,
    ops: &TrainingOperators,
    cfg: &ScenarioConfig,
    mut visit: impl FnMut(usize, usize, f64),
) {
    let q = ops.v_tilde.nrows();
    let n = ops.v_tilde.ncols();
    // a_hat^H V~ a = (V~^H a_hat)^H a
    let r = ops.v_tilde.adjoint() * a_hat;
    let qn = a_hat.norm();
    let cols = ops.v_tilde.as_slice();
    let mut a = vec![C64::new(0.0, 0.0); n];
    let mut x = vec![C64::new(0.0, 0.0); q];
    for (i, &theta) in books.theta.iter().enumerate() {
        for (j, &phi) in books.phi.iter().enumerate() {
            channel::fill_irs_response(theta, phi, distance, cfg, &mut a);
            x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            let mut inner = C64::new(0.0, 0.0);
            for (k, &ak) in a.iter().enumerate() {
                inner += r[k].conj() * ak;
                let col = &cols[k * q..(k + 1) * q];
                for (xv, &c) in x.iter_mut().zip(col) {
                    *xv += c * ak;
                }
            }
            let xn = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            visit(i, j, books.metric.score(inner.norm_sqr(), qn, xn));
        }
    }
}

/// Grid search for `(theta, phi)` given a recovered column of `A` and the
/// recovered distance. Ties go to the smallest `(i, j)`.
pub fn search_irs_angles(
    a_hat: &CVec,
    distance: f64,
    books: &Codebooks,
    ops: &TrainingOperators,
    cfg: &ScenarioConfig,
) -> (f64, f64, GridPeak) {
    let g_y = books.phi.len();
    let mut best = GridPeak {
        index: 0,
        score: f64::NEG_INFINITY,
    };
    irs_scores(a_hat, distance, books, ops, cfg, |i, j, s| {
        if s > best.score {
            best = GridPeak { index: i * g_y + j, score: s };
        }
    });
    (books.theta[best.index / g_y], books.phi[best.index % g_y], best)
}

/// Calls `visit(i, score)` for every UE grid point.
///
/// The atom for `psi` is `F^T a_ue(psi)^*`; `|b^H F^T a^*| = |a^T F^* b|`
/// lets the projection `F^* b` be formed once.
pub fn ue_scores(b_hat: &CVec, books: &Codebooks, f: &CMat, cfg: &ScenarioConfig, mut visit: impl FnMut(usize, f64)) {
    let r = f.conjugate() * b_hat;
    let qn = b_hat.norm();
    for (i, &psi) in books.psi.iter().enumerate() {
        let a = channel::ue_ff_response(psi, cfg);
        let inner = r.dot(&a);
        let xn = f.tr_mul(&a.conjugate()).norm();
        visit(i, books.metric.score(inner.norm_sqr(), qn, xn));
    }
}

/// Grid search for `psi` given a recovered column of `B`.
pub fn search_ue_angle(b_hat: &CVec, books: &Codebooks, f: &CMat, cfg: &ScenarioConfig) -> (f64, GridPeak) {
    let mut best = GridPeak {
        index: 0,
        score: f64::NEG_INFINITY,
    };
    ue_scores(b_hat, books, f, cfg, |i, s| {
        if s > best.score {
            best = GridPeak { index: i, score: s };
        }
    });
    (books.psi[best.index], best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_covers_half_open_range() {
        let cfg = ScenarioConfig::default();
        let b = Codebooks::from_config(&cfg);
        assert_eq!(b.theta.len(), 180);
        assert!((b.theta[179] - std::f64::consts::PI).abs() < 1e-12);
        assert!(b.theta[0] > 0.0);
        assert_eq!(b.psi.len(), 720);
    }

    #[test]
    fn explicit_min_and_step() {
        let mut cfg = ScenarioConfig::default();
        cfg.codebook.g_u = 3;
        cfg.codebook.psi_min = Some(0.0);
        cfg.codebook.psi_step = Some(0.5);
        assert_eq!(Codebooks::from_config(&cfg).psi, vec![0.5, 1.0, 1.5]);
    }
}
