//! Scenario configuration: array geometry, OFDM numerology, training
//! dimensions, path sampling ranges and codebook grids.
//!
//! Every field has a default (the desk-scale scenario), so a configuration
//! file only needs to list the values it overrides:
//!
//! ```toml
//! n_y = 64
//! n_z = 8
//! paths = 4
//! distance_range = [15.0, 20.0]
//!
//! [codebook]
//! g_z = 300
//! g_y = 300
//! g_u = 2000
//! ```

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::BsIrsLink;
use crate::error::{Error, Result};
use crate::estimator::CorrelationMetric;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

const DEFAULT_CARRIER_HZ: f64 = 100e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// IRS rows (y axis).
    pub n_y: usize,
    /// IRS columns (z axis).
    pub n_z: usize,
    /// UE antennas.
    pub n_t: usize,
    /// BS antennas.
    pub n_b: usize,
    /// Element spacing in meters, shared by all arrays.
    pub spacing_m: f64,
    pub carrier_hz: f64,
    pub sampling_hz: f64,
    /// Total subcarrier count `P_0`.
    pub total_subcarriers: usize,
    /// Training subcarriers `P`, taken as indices `1..=P`.
    pub subcarriers: usize,
    /// Time frames `T_a`.
    pub frames: usize,
    /// Time slots per frame `Q`.
    pub slots: usize,
    /// Number of UE-IRS paths `L`.
    pub paths: usize,
    /// Elevation AoA sampling range at the IRS (radians).
    pub theta_range: [f64; 2],
    /// Azimuth AoA sampling range at the IRS (radians).
    pub phi_range: [f64; 2],
    /// AoD sampling range at the UE (radians).
    pub psi_range: [f64; 2],
    /// IRS-scatterer distance sampling range (meters).
    pub distance_range: [f64; 2],
    /// Minimum pairwise distance between delay generators `z_l`.
    pub min_generator_separation: f64,
    pub codebook: CodebookConfig,
    pub link: BsIrsLink,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodebookConfig {
    /// Elevation grid size.
    pub g_z: usize,
    /// Azimuth grid size.
    pub g_y: usize,
    /// UE angle grid size.
    pub g_u: usize,
    // Grid origins and steps. When absent they are derived from the matching
    // sampling range so that the grid covers (min, max].
    pub theta_min: Option<f64>,
    pub theta_step: Option<f64>,
    pub phi_min: Option<f64>,
    pub phi_step: Option<f64>,
    pub psi_min: Option<f64>,
    pub psi_step: Option<f64>,
    pub metric: CorrelationMetric,
}

impl Default for CodebookConfig {
    fn default() -> Self {
        Self {
            g_z: 180,
            g_y: 180,
            g_u: 720,
            theta_min: None,
            theta_step: None,
            phi_min: None,
            phi_step: None,
            psi_min: None,
            psi_step: None,
            metric: CorrelationMetric::default(),
        }
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_y: 8,
            n_z: 8,
            n_t: 16,
            n_b: 16,
            spacing_m: SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ / 2.0,
            carrier_hz: DEFAULT_CARRIER_HZ,
            sampling_hz: 320e6,
            total_subcarriers: 256,
            subcarriers: 16,
            frames: 16,
            slots: 16,
            paths: 4,
            theta_range: [0.0, PI],
            phi_range: [-FRAC_PI_2, FRAC_PI_2],
            psi_range: [-FRAC_PI_2, FRAC_PI_2],
            distance_range: [1.0, 6.0],
            min_generator_separation: 1e-3,
            codebook: CodebookConfig::default(),
            link: BsIrsLink::default(),
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    /// Full-size scenario: a 64 x 8 IRS, 64-antenna UE and BS, and the
    /// 300 x 300 / 2000-point codebooks.
    pub fn full_scale() -> Self {
        Self {
            n_y: 64,
            n_z: 8,
            n_t: 64,
            n_b: 64,
            codebook: CodebookConfig {
                g_z: 300,
                g_y: 300,
                g_u: 2000,
                ..CodebookConfig::default()
            },
            ..Self::default()
        }
    }

    pub fn n_r(&self) -> usize {
        self.n_y * self.n_z
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Unambiguous delay span `P_0 / f_s` of the subcarrier phase ramp.
    pub fn delay_period(&self) -> f64 {
        self.total_subcarriers as f64 / self.sampling_hz
    }

    /// Number of entries `Q * T_a * P` of the reception tensor.
    pub fn tensor_len(&self) -> usize {
        self.slots * self.frames * self.subcarriers
    }

    /// `min((P - 1) * T_a, Q)`, the largest rank the estimator can resolve.
    pub fn max_resolvable_paths(&self) -> usize {
        (self.subcarriers.saturating_sub(1) * self.frames).min(self.slots)
    }

    pub fn check_uniqueness(&self) -> Result<()> {
        let available = self.max_resolvable_paths();
        if available < self.paths {
            return Err(Error::UniquenessViolation {
                available,
                paths: self.paths,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_y", self.n_y),
            ("n_z", self.n_z),
            ("n_t", self.n_t),
            ("n_b", self.n_b),
            ("total_subcarriers", self.total_subcarriers),
            ("subcarriers", self.subcarriers),
            ("frames", self.frames),
            ("slots", self.slots),
            ("paths", self.paths),
            ("codebook.g_z", self.codebook.g_z),
            ("codebook.g_y", self.codebook.g_y),
            ("codebook.g_u", self.codebook.g_u),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        let positive = [
            ("spacing_m", self.spacing_m),
            ("carrier_hz", self.carrier_hz),
            ("sampling_hz", self.sampling_hz),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.sampling_hz >= self.carrier_hz {
            return Err(Error::InvalidConfig(
                "sampling_hz must be below carrier_hz".into(),
            ));
        }
        if self.subcarriers > self.total_subcarriers {
            return Err(Error::InvalidConfig(format!(
                "subcarriers ({}) exceeds total_subcarriers ({})",
                self.subcarriers, self.total_subcarriers
            )));
        }
        for (name, [lo, hi]) in [
            ("theta_range", self.theta_range),
            ("phi_range", self.phi_range),
            ("psi_range", self.psi_range),
            ("distance_range", self.distance_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidConfig(format!("{name} must satisfy min <= max")));
            }
        }
        let [d_lo, d_hi] = self.distance_range;
        if d_lo <= 0.0 {
            return Err(Error::InvalidConfig("distances must be positive".into()));
        }
        if d_hi / SPEED_OF_LIGHT >= self.delay_period() {
            return Err(Error::InvalidConfig(format!(
                "max distance {d_hi} m exceeds the unambiguous range {} m",
                self.delay_period() * SPEED_OF_LIGHT
            )));
        }
        if self.link.delay_s != 0.0 {
            // The training matrix is only subcarrier-independent without a
            // BS-IRS delay.
            return Err(Error::InvalidConfig(
                "link.delay_s must be 0 for subcarrier-independent IRS training".into(),
            ));
        }
        self.check_uniqueness()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always serializable")
    }
}
