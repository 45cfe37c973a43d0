//! Near-field IRS-assisted uplink OFDM: channel synthesis, tensor-based
//! parameter estimation and Cramér-Rao bounds.
//!
//! The received pilots over `Q` IRS slots, `T_a` UE frames and `P`
//! subcarriers form a third-order CP tensor whose factors carry the IRS
//! response (`A`), the UE response scaled by the path gain (`B`) and a
//! Vandermonde delay factor (`C`). The estimator recovers delays by shift
//! invariance on `C`, then uses each recovered distance to search a
//! two-dimensional angle codebook instead of a joint angle-distance grid.
//!
//! ```
//! use nfirs::{channel, estimator, measurement, ScenarioConfig};
//! use rand::SeedableRng;
//!
//! let cfg = ScenarioConfig { paths: 2, ..ScenarioConfig::default() };
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let paths = channel::sample_paths(&cfg, &mut rng);
//! let ops = measurement::make_training_operators(&cfg, &cfg.link, 11);
//! let clean = measurement::synthesize_noiseless(&paths, &ops, &cfg).unwrap();
//! let y = measurement::add_noise(&clean, ops, 20.0, 3);
//! let books = estimator::Codebooks::from_config(&cfg);
//! let est = estimator::estimate(&y, &cfg, &books).unwrap();
//! assert_eq!(est.paths.len(), 2);
//! ```

pub mod channel;
pub mod config;
pub mod crlb;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod seed;
pub mod tensor;

mod serde_c64;

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMat = nalgebra::DMatrix<C64>;
pub type CVec = nalgebra::DVector<C64>;

pub use channel::{BsIrsLink, PathParams, PathSet};
pub use config::{CodebookConfig, ScenarioConfig, SPEED_OF_LIGHT};
pub use error::{Error, Result};
pub use measurement::{FactorMatrices, MeasurementTensor, TrainingOperators};
pub use tensor::Tensor3;
