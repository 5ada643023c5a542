//! Allan deviation and noise-type classification, Lorentzian line fitting,
//! matched filtering and sensitivity estimates.

mod allan;
mod fit;
mod matched;
mod sensitivity;

pub use allan::{allan_deviation, classify_noise, AllanEstimator, AllanResult, NoiseClass, TauClass, SLOPE_TOLERANCE};
pub use fit::{lorentzian_fit, LorentzFit, LorentzParams};
pub use matched::{lorentzian_kernel, matched_filter, FilteredScan, KERNEL_REACH};
pub use sensitivity::{
    fm_signal, projection_limit, responsivity, sensitivity_estimate, shot_noise_floor, OperatingPoint,
    SensitivityReport,
};
