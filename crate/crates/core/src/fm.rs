//! FM spectroscopy readout: Bessel sidebands of the phase-modulated probe,
//! propagation through the medium, square-law detection and lock-in
//! demodulation at the modulation frequency, plus residual amplitude
//! modulation (RAM) from a birefringent modulator.

use crate::numeric::bessel_j;
use crate::spectroscopy::MediumSpectrum;
use crate::{Error, Result, C64};
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Samples per modulation period used by [`demodulate`].
pub const DEMOD_SAMPLES: usize = 256;
/// Largest sideband order the time-domain demodulator resolves without aliasing.
pub const MAX_ORDER: usize = 8;
/// Power that the retained sidebands must carry.
pub const CLOSURE_TOL: f64 = 1e-9;

/// Modulation and demodulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmConfig {
    /// Modulation angular frequency (rad/s).
    pub omega_m: f64,
    /// Phase modulation index.
    pub beta: f64,
    /// Highest sideband order kept.
    pub n_max: usize,
    /// Local-oscillator phase (rad).
    pub lo_phase: f64,
}

impl Default for FmConfig {
    fn default() -> Self {
        Self { omega_m: 2.0 * PI * 10e6, beta: beta_from_dbm(8.0, DEFAULT_V_PI), n_max: MAX_ORDER, lo_phase: 0.5 * PI }
    }
}

impl FmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_m > 0.0 && self.omega_m.is_finite()) {
            return Err(Error::InvalidParameter { name: "omega_m", reason: "must be positive" });
        }
        if self.n_max < 1 || self.n_max > MAX_ORDER {
            return Err(Error::InvalidParameter { name: "n_max", reason: "must lie in 1..=8" });
        }
        check_closure(self.beta, self.n_max)
    }
}

/// Placeholder half-wave voltage of the modulator (V); the mapping from drive
/// power to modulation index is linear in the drive amplitude.
pub const DEFAULT_V_PI: f64 = 2.5;

/// Modulation index for a sinusoidal drive of `dbm` into 50 ohm on a modulator
/// with half-wave voltage `v_pi`: `beta = pi V_peak / V_pi`.
pub fn beta_from_dbm(dbm: f64, v_pi: f64) -> f64 {
    let watts = libm::pow(10.0, (dbm - 30.0) / 10.0);
    let v_peak = libm::sqrt(2.0 * 50.0 * watts);
    PI * v_peak / v_pi
}

/// Fraction of the optical power carried by orders `|n| <= n_max`.
pub fn closure(beta: f64, n_max: usize) -> f64 {
    let n_max = n_max as i32;
    (-n_max..=n_max).map(|n| bessel_j(n, beta) * bessel_j(n, beta)).sum()
}

fn check_closure(beta: f64, n_max: usize) -> Result<()> {
    let kept = closure(beta, n_max);
    if !(beta.is_finite() && kept >= 1.0 - CLOSURE_TOL) {
        return Err(Error::Truncation { beta, n_max, kept });
    }
    Ok(())
}

/// Smallest truncation order that satisfies the closure tolerance.
pub fn required_orders(beta: f64) -> Option<usize> {
    (1..=MAX_ORDER).find(|&n| closure(beta, n) >= 1.0 - CLOSURE_TOL)
}

/// Complex amplitudes of orders `-n_max..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandSet {
    pub n_max: usize,
    amplitudes: Vec<C64>,
}

impl SidebandSet {
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Self {
        assert!(amplitudes.len() % 2 == 1, "orders must be symmetric about the carrier");
        Self { n_max: amplitudes.len() / 2, amplitudes }
    }

    /// Amplitude of order `n` (zero beyond the stored range).
    pub fn order(&self, n: i32) -> C64 {
        let i = n + self.n_max as i32;
        if i < 0 || i as usize >= self.amplitudes.len() {
            C64::new(0.0, 0.0)
        } else {
            self.amplitudes[i as usize]
        }
    }

    pub fn orders(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        let n_max = self.n_max as i32;
        self.amplitudes.iter().enumerate().map(move |(i, &a)| (i as i32 - n_max, a))
    }

    /// `sum |a_n|^2`.
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Complex amplitude of the detected intensity at `+omega_m`,
    /// `sum_n a_n conj(a_{n-1})`.
    pub fn beat_note(&self) -> C64 {
        let n_max = self.n_max as i32;
        (-n_max + 1..=n_max).map(|n| self.order(n) * self.order(n - 1).conj()).sum()
    }

    /// Detected intensity at modulation phase `phase = omega_m t`.
    pub fn intensity(&self, phase: f64) -> f64 {
        let field: C64 = self.orders().map(|(n, a)| a * C64::from_polar(1.0, n as f64 * phase)).sum();
        field.norm_sqr()
    }
}

/// Sidebands of a pure phase modulation `exp(i beta sin(omega_m t))`:
/// `a_n = J_n(beta)`, so `a_{-n} = (-1)^n a_n`.
pub fn sidebands(beta: f64, n_max: usize) -> Result<SidebandSet> {
    if n_max < 1 {
        return Err(Error::InvalidParameter { name: "n_max", reason: "must be at least 1" });
    }
    check_closure(beta, n_max)?;
    let n = n_max as i32;
    Ok(SidebandSet::from_amplitudes((-n..=n).map(|k| C64::new(bessel_j(k, beta), 0.0)).collect()))
}

/// Pass each order through the medium at its own detuning,
/// `a_n <- a_n t(D + n w_m) exp(i phi(D + n w_m))`.
pub fn propagate(sb: &SidebandSet, spec: &MediumSpectrum, carrier_detuning: f64, omega_m: f64) -> Result<SidebandSet> {
    let amplitudes = sb
        .orders()
        .map(|(n, a)| Ok(a * spec.response(carrier_detuning + n as f64 * omega_m)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SidebandSet { n_max: sb.n_max, amplitudes })
}

/// Lock-in output: the photocurrent `|sum_n a_n exp(i n w_m t)|^2` is sampled
/// over one modulation period, mixed with `2 cos(w_m t + lo_phase)` and
/// averaged. The factor 2 calibrates the output to the amplitude of the
/// `w_m` component projected on the LO, so that
/// `S(theta) = S(0) cos(theta) + S(pi/2) sin(theta)`.
pub fn demodulate(sb: &SidebandSet, lo_phase: f64) -> f64 {
    let n = DEMOD_SAMPLES;
    let sum: f64 = (0..n)
        .map(|k| {
            let phase = 2.0 * PI * k as f64 / n as f64;
            sb.intensity(phase) * libm::cos(phase + lo_phase)
        })
        .sum();
    2.0 * sum / n as f64
}

/// Frequency-domain equivalent of [`demodulate`]: `2 Re(beat e^{-i theta})`.
pub fn demodulate_spectral(sb: &SidebandSet, lo_phase: f64) -> f64 {
    2.0 * (sb.beat_note() * C64::from_polar(1.0, -lo_phase)).re
}

/// Mean detected power over one period.
pub fn dc_power(sb: &SidebandSet) -> f64 {
    let n = DEMOD_SAMPLES;
    (0..n).map(|k| sb.intensity(2.0 * PI * k as f64 / n as f64)).sum::<f64>() / n as f64
}

/// In-phase and quadrature FM signal at each carrier detuning.
pub fn fm_scan(
    spec: &MediumSpectrum,
    cfg: &FmConfig,
    carriers: &[f64],
    ram: Option<&RamParams>,
) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let mut sb = sidebands(cfg.beta, cfg.n_max)?;
    if let Some(p) = ram {
        sb = apply_ram(&sb, p);
    }
    carriers
        .iter()
        .map(|&d| {
            let out = propagate(&sb, spec, d, cfg.omega_m)?;
            Ok((demodulate(&out, cfg.lo_phase), demodulate(&out, cfg.lo_phase + 0.5 * PI)))
        })
        .collect()
}

/// Polarizer/analyzer geometry and birefringence of the modulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamParams {
    /// Polarizer angle to the crystal axis (rad).
    pub alpha: f64,
    /// Analyzer angle to the crystal axis (rad).
    pub beta_angle: f64,
    /// Differential modulation index `delta_e - delta_o`.
    pub m_index: f64,
    /// Uncontrolled birefringent phase `k l (n_e - n_o)` drift (rad).
    pub dphi_n: f64,
    /// Control phase applied through the bias port (rad).
    pub dphi_dc: f64,
    /// Optical power scale `|E0|^2`.
    pub e0_sq: f64,
}

impl Default for RamParams {
    fn default() -> Self {
        Self { alpha: 0.05, beta_angle: 0.05, m_index: 0.2, dphi_n: 0.0, dphi_dc: 0.0, e0_sq: 1.0 }
    }
}

impl RamParams {
    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("alpha", self.alpha), ("beta_angle", self.beta_angle)] {
            if !(a.abs() < 0.5 * PI) {
                return Err(Error::InvalidParameter { name, reason: "angle must lie in (-pi/2, pi/2)" });
            }
        }
        for (name, v) in
            [("m_index", self.m_index), ("dphi_n", self.dphi_n), ("dphi_dc", self.dphi_dc), ("e0_sq", self.e0_sq)]
        {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be finite" });
            }
        }
        Ok(())
    }

    /// `e0_sq sin(2 alpha) sin(2 beta) J_n(M)`, the harmonic-n amplitude at unit
    /// birefringence factor.
    pub fn harmonic_gain(&self, n: i32) -> f64 {
        self.e0_sq * libm::sin(2.0 * self.alpha) * libm::sin(2.0 * self.beta_angle) * bessel_j(n, self.m_index)
    }

    /// Relative depth of the intensity modulation at `omega_m`.
    pub fn depth(&self) -> f64 {
        libm::sin(2.0 * self.alpha)
            * libm::sin(2.0 * self.beta_angle)
            * bessel_j(1, self.m_index)
            * libm::sin(self.dphi_n + self.dphi_dc)
    }
}

/// Photocurrent at odd harmonic `n` of the modulation,
/// `-|E0|^2 sin(2a) sin(2b) J_n(M) sin(n w_m t) sin(dphi_n + dphi_dc)`.
pub fn ram_photocurrent(p: &RamParams, n: u32, omega_m: f64, t: f64) -> Result<f64> {
    if n.is_multiple_of(2) {
        return Err(Error::EvenHarmonic(n));
    }
    Ok(-p.harmonic_gain(n as i32) * libm::sin(n as f64 * omega_m * t) * libm::sin(p.dphi_n + p.dphi_dc))
}

/// Impose the RAM as a common amplitude modulation `1 - (r/2) sin(w_m t)` of
/// the field, with `r` the RAM depth. For a transparent medium the detected
/// intensity gains exactly `-r sin(w_m t)` at the modulation frequency,
/// reproducing [`ram_photocurrent`] for `n = 1`. The result carries one extra
/// order on each side.
pub fn apply_ram(sb: &SidebandSet, p: &RamParams) -> SidebandSet {
    let r = p.depth();
    if r == 0.0 {
        return sb.clone();
    }
    let k = C64::new(0.0, 0.25 * r);
    let n_max = sb.n_max as i32 + 1;
    let amplitudes = (-n_max..=n_max).map(|n| sb.order(n) + k * (sb.order(n - 1) - sb.order(n + 1))).collect();
    SidebandSet { n_max: n_max as usize, amplitudes }
}
