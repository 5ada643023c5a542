//! Numerical model of Rydberg-atom RF electrometry read out by FM spectroscopy.
//!
//! The crate covers the whole signal chain:
//!
//! * [`quantum`]: steady state of the RF-dressed four-level ladder with
//!   thermal Doppler averaging, exposed as a probe susceptibility.
//! * [`spectroscopy`]: probe transmission and phase spectra, Autler-Townes
//!   splitting extraction and the splitting/field conversion.
//! * [`fm`]: phase-modulated probe sidebands, propagation through the medium,
//!   lock-in demodulation and residual amplitude modulation (RAM).
//! * [`servo`]: discrete PID loop nulling the RAM error against drifting
//!   birefringence.
//! * [`noise`]: seeded power-law and shot-noise time series.
//! * [`analysis`]: Allan deviation, noise classification, Lorentzian matched
//!   filtering and fitting, and sensitivity estimates.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! scenario language and the command-line front end live in `rydfm-cli`.
//!
//! Units are SI throughout. Rates, Rabi frequencies and detunings are angular
//! (rad/s); anything named `*_hz` is an ordinary frequency.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod constants;
mod error;
pub mod fm;
pub mod noise;
pub mod numeric;
pub mod quantum;
pub mod servo;
pub mod spectroscopy;

pub use error::{Error, Result};

/// Complex double used for amplitudes, coherences and susceptibilities.
pub type C64 = num_complex::Complex64;
