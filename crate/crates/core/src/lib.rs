//! Performance analysis of linear coupled-mode sensors with engineered gain
//! and loss.
//!
//! A sensor is a network of driven bosonic modes whose linear dynamics is
//! generated by an effective non-Hermitian matrix, realized physically through
//! couplings to gain and loss baths plus one readout waveguide. The library
//! computes the quantities that decide whether such a device is a good
//! detector of a small parameter: steady-state response, homodyne signal
//! power, output noise spectral density, measurement rate, quantum Fisher
//! information, and the fundamental bounds each of these must obey. It also
//! constructs the bath couplings that reach the minimum possible homodyne
//! noise for a given dynamical matrix, and validates the closed-form results
//! against a stochastic time-domain simulation of the measurement record.
//!
//! Modules:
//! - [`cmatrix`]: dense complex linear algebra on small matrices
//! - [`model`]: the sensor data model and its validation
//! - [`response`]: susceptibilities, linear response, output spectra
//! - [`metrics`]: scalar performance figures and bounds
//! - [`bathopt`]: minimum-noise bath construction
//! - [`fisher`]: Gaussian quantum Fisher information of the output mode
//! - [`catalog`]: canonical one- and two-mode sensor families
//! - [`dynamics`]: time evolution and homodyne Monte Carlo
//! - [`cli`]: command-line front end

// negated comparisons are used on purpose for rate/step validation: unlike
// `x <= 0.0`, `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bathopt;
pub mod catalog;
pub mod cli;
pub mod cmatrix;
pub mod dynamics;
pub mod error;
pub mod fisher;
pub mod metrics;
pub mod model;
pub mod response;
#[doc(hidden)]
pub mod testkit;

pub use cmatrix::CMat;
pub use error::{Error, Result};
pub use model::SensorModel;
