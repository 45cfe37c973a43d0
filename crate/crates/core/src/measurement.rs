//! Training operators, the noiseless reception tensor, its CP factors, and
//! noise injection at a target SNR.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, expj_neg, BsIrsLink, PathParams};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::tensor::Tensor3;
use crate::{CMat, CVec, C64};

/// Known pilot-side quantities: BS combiner, UE beamformers, IRS phase
/// patterns and the effective IRS training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOperators {
    /// BS combiner (N_b), unit norm.
    pub w: CVec,
    /// UE beamformers (N_t x T_a), one column per frame.
    pub f: CMat,
    /// IRS phase patterns (Q x N_r), unit-modulus entries.
    pub v: CMat,
    /// Cascaded BS-side response `w^H H_s` (length N_r).
    pub h_tilde: CVec,
    /// Effective training matrix (Q x N_r), row `q` is `v_q ⊙ h_tilde`.
    pub v_tilde: CMat,
}

impl TrainingOperators {
    /// Assembles the operators from their primitive parts.
    pub fn new(w: CVec, f: CMat, v: CMat, h_tilde: CVec) -> Result<Self> {
        if v.ncols() != h_tilde.len() {
            return Err(Error::ShapeMismatch(format!(
                "IRS patterns have {} columns but h_tilde has {} entries",
                v.ncols(),
                h_tilde.len()
            )));
        }
        let v_tilde = CMat::from_fn(v.nrows(), v.ncols(), |q, i| v[(q, i)] * h_tilde[i]);
        Ok(Self {
            w,
            f,
            v,
            h_tilde,
            v_tilde,
        })
    }

    pub fn check_dims(&self, cfg: &ScenarioConfig) -> Result<()> {
        let ok = self.w.len() == cfg.n_b
            && self.f.shape() == (cfg.n_t, cfg.frames)
            && self.v.shape() == (cfg.slots, cfg.n_r())
            && self.h_tilde.len() == cfg.n_r();
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "training operators do not match the scenario (w {}, F {:?}, V {:?})",
                self.w.len(),
                self.f.shape(),
                self.v.shape()
            )))
        }
    }

    /// Pilot received over the frames for a unit-gain path with UE response
    /// `a_ue`: entry `t` is `a_ue^H F[:, t]`, i.e. `F^T a_ue^*`.
    pub fn frame_response(&self, a_ue: &CVec) -> CVec {
        self.f.tr_mul(&a_ue.conjugate())
    }
}

/// The CP factors `A` (Q x L), `B` (T_a x L) and `C` (P x L).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMatrices {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
}

impl FactorMatrices {
    pub fn to_tensor(&self) -> Result<Tensor3> {
        Tensor3::from_cp(&self.a, &self.b, &self.c)
    }
}

/// A (possibly noisy) reception tensor with the operators that produced it.
#[derive(Debug, Clone)]
pub struct MeasurementTensor {
    pub data: Tensor3,
    pub operators: TrainingOperators,
    /// Noise variance per complex entry; zero when noise is disabled.
    pub sigma2: f64,
    /// Realized `||Y_0||^2 / ||N||^2`; infinite when noise is disabled.
    pub snr_linear: f64,
}

fn random_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    expj_neg(rng.random_range(0.0..2.0 * PI))
}

/// Random unit-modulus training operators, deterministic in `seed`.
///
/// `w` and the columns of `F` have entries of modulus `1/sqrt(N_b)` and
/// `1/sqrt(N_t)`; the IRS phases are uniform on `[0, 2 pi)`.
pub fn make_training_operators(cfg: &ScenarioConfig, link: &BsIrsLink, seed: u64) -> TrainingOperators {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sb = 1.0 / (cfg.n_b as f64).sqrt();
    let st = 1.0 / (cfg.n_t as f64).sqrt();
    let w = CVec::from_fn(cfg.n_b, |_, _| random_phase(&mut rng) * sb);
    let f = CMat::from_fn(cfg.n_t, cfg.frames, |_, _| random_phase(&mut rng) * st);
    let v = CMat::from_fn(cfg.slots, cfg.n_r(), |_, _| random_phase(&mut rng));
    let hs = channel::bs_irs_channel(link, 1, cfg);
    let h_tilde = (w.adjoint() * hs).transpose();
    TrainingOperators::new(w, f, v, h_tilde).expect("dimensions agree by construction")
}

/// Ground-truth factors: `A[:, l] = V~ a_IRS`, `B[:, l] = gamma_l F^T a_ue^*`,
/// `C[p, l] = z_l^p` for `p = 1..=P`.
pub fn ground_truth_factors(paths: &[PathParams], ops: &TrainingOperators, cfg: &ScenarioConfig) -> FactorMatrices {
    let l = paths.len();
    let mut a = CMat::zeros(cfg.slots, l);
    let mut b = CMat::zeros(cfg.frames, l);
    let mut c = CMat::zeros(cfg.subcarriers, l);
    for (k, path) in paths.iter().enumerate() {
        a.set_column(k, &(&ops.v_tilde * channel::irs_nf_response(path, cfg)));
        b.set_column(k, &(ops.frame_response(&channel::ue_ff_response(path.psi, cfg)) * path.gain));
        let z = channel::delay_generator(path.delay(), cfg);
        let mut zp = z;
        for p in 0..cfg.subcarriers {
            c[(p, k)] = zp;
            zp *= z;
        }
    }
    FactorMatrices { a, b, c }
}

fn check_identifiable(l: usize, cfg: &ScenarioConfig) -> Result<()> {
    let available = cfg.max_resolvable_paths();
    if available < l {
        return Err(Error::UniquenessViolation { available, paths: l });
    }
    Ok(())
}

/// Noiseless reception tensor `sum_l A[:, l] ∘ B[:, l] ∘ C[:, l]`.
pub fn synthesize_noiseless(paths: &[PathParams], ops: &TrainingOperators, cfg: &ScenarioConfig) -> Result<Tensor3> {
    check_identifiable(paths.len(), cfg)?;
    ops.check_dims(cfg)?;
    ground_truth_factors(paths, ops, cfg).to_tensor()
}

/// Noise variance that puts `noiseless` at `snr_db`; zero for `+inf`.
pub fn noise_variance(noiseless: &Tensor3, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    noiseless.norm_sqr() / (10f64.powf(snr_db / 10.0) * noiseless.len() as f64)
}

/// Adds circular complex Gaussian noise calibrated to the realized signal
/// power. `snr_db = f64::INFINITY` disables noise.
pub fn add_noise(noiseless: &Tensor3, operators: TrainingOperators, snr_db: f64, seed: u64) -> MeasurementTensor {
    assert!(!snr_db.is_nan() && snr_db != f64::NEG_INFINITY, "snr_db must be finite or +inf");
    let sigma2 = noise_variance(noiseless, snr_db);
    if sigma2 == 0.0 {
        return MeasurementTensor {
            data: noiseless.clone(),
            operators,
            sigma2: 0.0,
            snr_linear: f64::INFINITY,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = sigma2.sqrt();
    let mut data = noiseless.clone();
    let mut noise_energy = 0.0;
    for y in data.as_mut_slice() {
        let n = channel::sample_unit_cn(&mut rng) * scale;
        noise_energy += n.norm_sqr();
        *y += n;
    }
    MeasurementTensor {
        data,
        operators,
        sigma2,
        snr_linear: noiseless.norm_sqr() / noise_energy,
    }
}
