//! Proactive multivariate time-series anomaly detection.
//!
//! The crate is `no_std` (it needs `alloc`) and holds every numerical piece of
//! the pipeline:
//!
//! * [`data`]: feature schemas, series, min-max normalization, one-hot
//!   encoding, sliding windows and a seeded synthetic generator.
//! * [`forecaster`]: the one-step forecaster with trend/seasonal heads for
//!   continuous features, a one-hot head for discrete features and an adaptive
//!   graph convolution correction, trained with Adam.
//! * [`detect`]: GMM, ECOD and Deep-SVDD style scorers, extreme-value
//!   threshold calibration and the forecast-then-score detection loop.
//! * [`metrics`]: F1-@K, F1-Composite and F1-Range.
//! * [`spectral`]: real DFT of short segments and convex-polytope membership
//!   of coefficient magnitudes.
//!
//! File formats, persistence and the command line live in the `protad` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod data;
pub mod detect;
mod error;
pub mod forecaster;
pub mod matrix;
pub mod metrics;
pub mod optim;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::Matrix;
