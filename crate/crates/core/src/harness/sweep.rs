//! Monte Carlo NMSE-vs-SNR sweeps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{aligned, channel_nmse, family_errors, to_db};
use crate::channel::{self, PathParams};
use crate::config::ScenarioConfig;
use crate::crlb::{self, CrlbReport};
use crate::error::{Error, Result};
use crate::estimator::{self, Codebooks};
use crate::measurement::{self, add_noise};
use crate::seed::derive_seed;

/// Reported metric families, in output order.
pub const FAMILIES: [&str; 6] = ["theta", "phi", "psi", "tau", "gamma", "channel"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: ScenarioConfig,
    /// SNR points in dB; `f64::INFINITY` disables noise.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trial count must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::InvalidConfig("SNR list is empty".into()));
        }
        if self.snr_db.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(Error::InvalidConfig("SNR values must be finite or +inf".into()));
        }
        self.scenario.validate()
    }
}

/// Outcome of one trial at one SNR point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub snr_index: usize,
    pub snr_db: f64,
    pub realized_snr: f64,
    /// Error kind when the estimator failed.
    pub failure: Option<String>,
    /// NMSE per family (order of [`FAMILIES`]); empty on failure.
    pub nmse: Vec<f64>,
    /// Unnormalized squared error per family; empty on failure.
    pub sq_err: Vec<f64>,
    /// Bounds at this trial's noise level, when the FIM was invertible.
    pub crlb: Option<CrlbReport>,
    /// Bounds normalized like the NMSE (order of [`FAMILIES`]).
    pub crlb_normalized: Option<Vec<f64>>,
    pub eigenvalue_moduli: Vec<f64>,
    pub eigvec_cond: f64,
    pub gain_leakage: f64,
}

/// One aggregated output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub family: String,
    pub median_nmse_db: f64,
    pub mean_nmse_db: f64,
    pub crlb_db: f64,
    pub trials_ok: usize,
    pub trials_failed: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub records: Vec<TrialRecord>,
}

/// Scenario of one trial: paths and training operators. Shared by every
/// SNR point of the trial.
pub fn trial_scenario(cfg: &ScenarioConfig, master_seed: u64, trial: usize) -> (Vec<PathParams>, measurement::TrainingOperators) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, &[0, trial as u64]));
    let paths = channel::sample_paths(cfg, &mut rng);
    let ops = measurement::make_training_operators(cfg, &cfg.link, derive_seed(master_seed, &[1, trial as u64]));
    (paths, ops)
}

/// Seed of the noise draw for `(trial, snr_index)`.
pub fn noise_seed(master_seed: u64, trial: usize, snr_index: usize) -> u64 {
    derive_seed(master_seed, &[2, trial as u64, snr_index as u64])
}

fn normalized_bounds(report: &CrlbReport, paths: &[PathParams], cfg: &ScenarioConfig) -> Vec<f64> {
    let sq = |f: &dyn Fn(&PathParams) -> f64| paths.iter().map(|p| f(p).powi(2)).sum::<f64>();
    let h2 = channel::overall_channel(paths, cfg).norm_sqr();
    vec![
        report.theta / sq(&|p| p.theta),
        report.phi / sq(&|p| p.phi),
        report.psi / sq(&|p| p.psi),
        report.tau / sq(&|p| p.delay()),
        report.gamma / paths.iter().map(|p| p.gain.norm_sqr()).sum::<f64>(),
        report.channel / h2,
    ]
}

/// Runs every SNR point of one trial.
pub fn run_trial(spec: &SweepSpec, books: &Codebooks, trial: usize) -> Result<Vec<TrialRecord>> {
    let cfg = &spec.scenario;
    let (paths, ops) = trial_scenario(cfg, spec.master_seed, trial);
    let clean = measurement::synthesize_noiseless(&paths, &ops, cfg)?;
    // Bounds are linear in the noise variance: compute once, rescale per SNR.
    let unit = crlb::crlb_report(&paths, &ops, cfg, 1.0).ok();
    let mut out = Vec::with_capacity(spec.snr_db.len());
    for (si, &snr) in spec.snr_db.iter().enumerate() {
        let y = add_noise(&clean, ops.clone(), snr, noise_seed(spec.master_seed, trial, si));
        let crlb = unit.filter(|_| y.sigma2 > 0.0).map(|u| u.rescaled(y.sigma2));
        let mut rec = TrialRecord {
            trial,
            snr_index: si,
            snr_db: snr,
            realized_snr: y.snr_linear,
            failure: None,
            nmse: Vec::new(),
            sq_err: Vec::new(),
            crlb_normalized: crlb.as_ref().map(|r| normalized_bounds(r, &paths, cfg)),
            crlb,
            eigenvalue_moduli: Vec::new(),
            eigvec_cond: f64::NAN,
            gain_leakage: f64::NAN,
        };
        match estimator::estimate(&y, cfg, books) {
            Ok(est) => {
                let matched = aligned(&paths, &est.paths)?;
                let fe = family_errors(&paths, &matched);
                let est_paths: Vec<PathParams> = matched.iter().map(|e| e.to_path()).collect();
                let h = channel::overall_channel(&paths, cfg);
                let h_err = channel_nmse(&paths, &est_paths, cfg)?;
                rec.nmse = (0..5).map(|k| fe.sq_err[k] / fe.sq_ref[k]).collect();
                rec.nmse.push(h_err);
                rec.sq_err = fe.sq_err.to_vec();
                rec.sq_err.push(h_err * h.norm_sqr());
                rec.eigenvalue_moduli = est.diagnostics.eigenvalue_moduli;
                rec.eigvec_cond = est.diagnostics.eigvec_cond;
                rec.gain_leakage = est.diagnostics.gain_leakage;
            }
            Err(e) => rec.failure = Some(e.kind().to_string()),
        }
        out.push(rec);
    }
    Ok(out)
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Aggregates trial records into one row per `(snr, family)`.
pub fn aggregate(snr_db: &[f64], records: &[TrialRecord]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for (si, &snr) in snr_db.iter().enumerate() {
        let at: Vec<&TrialRecord> = records.iter().filter(|r| r.snr_index == si).collect();
        let ok: Vec<&&TrialRecord> = at.iter().filter(|r| r.failure.is_none()).collect();
        for (k, family) in FAMILIES.iter().enumerate() {
            let vals: Vec<f64> = ok.iter().map(|r| r.nmse[k]).collect();
            let bounds: Vec<f64> = at
                .iter()
                .filter_map(|r| r.crlb_normalized.as_ref().map(|b| b[k]))
                .collect();
            rows.push(SweepRow {
                snr_db: snr,
                family: family.to_string(),
                median_nmse_db: to_db(median(vals.clone())),
                mean_nmse_db: to_db(mean(&vals)),
                crlb_db: to_db(mean(&bounds)),
                trials_ok: ok.len(),
                trials_failed: at.len() - ok.len(),
            });
        }
    }
    rows
}

/// Runs all trials. Estimator failures are counted per SNR point rather than
/// aborting the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let books = Codebooks::from_config(&spec.scenario);
    let mut records = Vec::with_capacity(spec.trials * spec.snr_db.len());
    for trial in 0..spec.trials {
        records.extend(run_trial(spec, &books, trial)?);
    }
    Ok(SweepOutcome {
        rows: aggregate(&spec.snr_db, &records),
        records,
    })
}
