use crate::constants::H;
use crate::fm::{dc_power, demodulate, propagate, sidebands, FmConfig};
use crate::noise::{photocurrent, shot_noise_series};
use crate::quantum::{susceptibility_shift, susceptibility_with, DopplerOptions, FieldDrive, LadderSystem};
use crate::spectroscopy::{axis_scale, MediumSpectrum};
use crate::{Error, Result, C64};
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Atomic projection-noise limit `h / (mu_rf sqrt(N T2))` in V/m/sqrt(Hz).
pub fn projection_limit(mu_rf: f64, n_atoms: f64, t2: f64) -> f64 {
    H / (mu_rf * libm::sqrt(n_atoms * t2))
}

/// Where and how the electrometer is read out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub system: LadderSystem,
    /// Laser drive; `delta_p` is the probe carrier detuning. `omega_rf` is
    /// ignored and set from `e_field`.
    pub drive: FieldDrive,
    pub fm: FmConfig,
    /// RF field amplitude at which the slope is taken (V/m).
    pub e_field: f64,
    /// Total probe power reaching the detector (W).
    pub detected_power: f64,
    /// Fraction of the detected light that crossed the coupling beam and
    /// carries the atomic signal.
    pub signal_fraction: f64,
    /// Detector quantum efficiency.
    pub eta: f64,
    /// Atoms contributing to the projection-noise limit.
    pub probe_atoms: f64,
    pub doppler: DopplerOptions,
}

impl Default for OperatingPoint {
    /// Probe on resonance, coupling detuned by +1 MHz, `E = 75 uV/cm`.
    fn default() -> Self {
        Self {
            system: LadderSystem::default(),
            drive: FieldDrive {
                omega_p: 2.0 * PI * 6.7e6,
                omega_c: 2.0 * PI * 7.0e6,
                delta_c: 2.0 * PI * 1.0e6,
                ..Default::default()
            },
            fm: FmConfig::default(),
            e_field: 7.5e-3,
            detected_power: 65e-6,
            // area ratio of a 0.16 mm coupling beam inside a 1.5 mm probe beam
            signal_fraction: (0.16 / 1.5) * (0.16 / 1.5),
            eta: 0.8,
            probe_atoms: 1e5,
            doppler: DopplerOptions::default(),
        }
    }
}

impl OperatingPoint {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.drive.validate()?;
        self.fm.validate()?;
        let checks = [
            ("e_field", self.e_field >= 0.0),
            ("detected_power", self.detected_power > 0.0),
            ("signal_fraction", self.signal_fraction > 0.0 && self.signal_fraction <= 1.0),
            ("eta", self.eta > 0.0 && self.eta <= 1.0),
            ("probe_atoms", self.probe_atoms > 0.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::InvalidParameter { name, reason: "out of range" });
            }
        }
        Ok(())
    }

    fn drive_at(&self, e_field: f64) -> FieldDrive {
        FieldDrive { omega_rf: self.system.rf_rabi(e_field.abs()), ..self.drive }
    }

    /// Detunings seen by the sidebands, ascending.
    fn sideband_grid(&self) -> Vec<f64> {
        let n = self.fm.n_max as i32;
        (-n..=n).map(|k| self.drive.delta_p + k as f64 * self.fm.omega_m).collect()
    }

    /// Mean photocurrent of all detected light (A).
    fn dc_current(&self) -> f64 {
        photocurrent(self.eta, self.detected_power, self.system.lambda_probe)
    }

    fn chi_at(&self, e_field: f64) -> Result<Vec<C64>> {
        let drive = self.drive_at(e_field);
        self.sideband_grid()
            .iter()
            .map(|&d| susceptibility_with(&self.system, &FieldDrive { delta_p: d, ..drive }, self.doppler))
            .collect()
    }

    fn medium(&self, chi: Vec<C64>) -> Result<MediumSpectrum> {
        MediumSpectrum::from_chi(
            self.sideband_grid(),
            chi,
            self.system.k_probe(),
            self.system.cell_length,
            axis_scale(&self.system),
        )
    }

    fn propagated(&self, chi: Vec<C64>) -> Result<crate::fm::SidebandSet> {
        let sb = sidebands(self.fm.beta, self.fm.n_max)?;
        propagate(&sb, &self.medium(chi)?, self.drive.delta_p, self.fm.omega_m)
    }

    /// Photocurrent (A) per unit normalized intensity of the signal-carrying
    /// light. The detected power is measured behind the cell, so the
    /// signal part is referred back through its transmission `reference_dc`.
    fn signal_scale(&self, reference_dc: f64) -> f64 {
        self.dc_current() * self.signal_fraction / reference_dc
    }
}

/// FM lock-in signal (A) at the operating field.
pub fn fm_signal(op: &OperatingPoint) -> Result<f64> {
    op.validate()?;
    let out = op.propagated(op.chi_at(op.e_field)?)?;
    Ok(op.signal_scale(dc_power(&out)) * demodulate(&out, op.fm.lo_phase))
}

const MAX_HALVINGS: usize = 12;
const SLOPE_AGREEMENT: f64 = 0.01;

/// `dS/dE` (A per V/m) at the operating field by central differences,
/// halving the step from `E/2` until successive estimates agree to 1%.
///
/// The susceptibility change between `E + h` and `E - h` is integrated as a
/// single velocity average so that tiny steps stay accurate.
pub fn responsivity(op: &OperatingPoint) -> Result<f64> {
    op.validate()?;
    let chi0 = op.chi_at(op.e_field)?;
    let scale = op.signal_scale(dc_power(&op.propagated(chi0.clone())?));
    let signal = |chi: Vec<C64>| -> Result<f64> { Ok(scale * demodulate(&op.propagated(chi)?, op.fm.lo_phase)) };
    let slope = |h: f64| -> Result<f64> {
        let (up, down) = (op.drive_at(op.e_field + h), op.drive_at(op.e_field - h));
        let mut plus = Vec::with_capacity(chi0.len());
        let mut minus = Vec::with_capacity(chi0.len());
        for (&d, &c) in op.sideband_grid().iter().zip(&chi0) {
            let diff = susceptibility_shift(
                &op.system,
                &FieldDrive { delta_p: d, ..up },
                &FieldDrive { delta_p: d, ..down },
                op.doppler,
            )?;
            plus.push(c + 0.5 * diff);
            minus.push(c - 0.5 * diff);
        }
        Ok((signal(plus)? - signal(minus)?) / (2.0 * h))
    };
    let mut h = if op.e_field > 0.0 { 0.5 * op.e_field } else { 1e-3 };
    let mut prev = slope(h)?;
    if prev == 0.0 {
        return Err(Error::ZeroResponsivity);
    }
    for _ in 0..MAX_HALVINGS {
        h *= 0.5;
        let next = slope(h)?;
        if (next - prev).abs() <= SLOPE_AGREEMENT * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NonConvergence { what: "responsivity step halving", estimate: prev, change: h })
}

/// Lock-in output noise density (A/sqrt(Hz)) from shot noise of the total
/// detected photocurrent, estimated from a seeded shot-noise record.
///
/// A record with sample interval `dt` has variance `2 e I / (2 dt)`, so the
/// photocurrent density is `std * sqrt(2 dt)`. Mixing with `2 cos(w_m t)`
/// folds both noise sidebands onto the output, a further factor `sqrt(2)`.
pub fn shot_noise_floor(op: &OperatingPoint, samples: usize, seed: u64) -> Result<f64> {
    op.validate()?;
    let dt = 1e-6;
    let ts = shot_noise_series(op.dc_current(), dt, samples, seed)?;
    let n = ts.len() as f64;
    let mean = ts.values.iter().sum::<f64>() / n;
    let var = ts.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(libm::sqrt(2.0 * var * 2.0 * dt))
}

/// Responsivity, noise floor and the smallest field detectable at unit SNR in 1 Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport {
    /// `|dS/dE|` (A per V/m).
    pub responsivity: f64,
    /// Signal noise density (A/sqrt(Hz)).
    pub noise_floor: f64,
    /// `noise_floor / responsivity` (V/m/sqrt(Hz)).
    pub e_min: f64,
    /// Projection-noise limit for the same system (V/m/sqrt(Hz)).
    pub projection_limit: f64,
}

/// Combine the operating-point responsivity with a noise floor (A/sqrt(Hz)).
pub fn sensitivity_estimate(op: &OperatingPoint, noise_floor: f64) -> Result<SensitivityReport> {
    if !(noise_floor >= 0.0 && noise_floor.is_finite()) {
        return Err(Error::InvalidParameter { name: "noise_floor", reason: "must be non-negative" });
    }
    let r = responsivity(op)?.abs();
    let t2 = 1.0 / op.system.gamma_deph;
    Ok(SensitivityReport {
        responsivity: r,
        noise_floor,
        e_min: noise_floor / r,
        projection_limit: projection_limit(op.system.mu_rf, op.probe_atoms, t2),
    })
}
