//! Discrete-time RAM servo: a PID controller drives the bias phase
//! `dphi_dc` to cancel the drifting birefringent phase `dphi_n`, using the
//! demodulated RAM photocurrent as error signal.

use crate::fm::{ram_photocurrent, RamParams, DEMOD_SAMPLES};
use crate::noise::white_gaussian;
use crate::{Error, Result};
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Lock-in amplitude of the RAM photocurrent at `omega_m` with the LO phase
/// set for the largest error, `|G| sin(dphi_n + dphi_dc)` where
/// `G = e0_sq sin(2 alpha) sin(2 beta) J_1(M)`.
pub fn demod_error(p: &RamParams) -> f64 {
    let g = p.harmonic_gain(1);
    // reference -sgn(G) sin(w t) keeps the loop sign independent of geometry
    let lo = if g < 0.0 { 1.0 } else { -1.0 };
    let n = DEMOD_SAMPLES;
    let sum: f64 = (0..n)
        .map(|k| {
            let phase = 2.0 * PI * k as f64 / n as f64;
            let i = ram_photocurrent(p, 1, 1.0, phase).expect("first harmonic is odd");
            i * lo * libm::sin(phase)
        })
        .sum();
    2.0 * sum / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    /// Integral gain per control period.
    pub ki: f64,
    /// Derivative gain per control period.
    pub kd: f64,
    /// Control period (s).
    pub dt: f64,
    /// Bound on `|dphi_dc|` (rad).
    pub output_clamp: f64,
    /// Bound on the integrator state (rad).
    pub integrator_clamp: f64,
}

impl PidGains {
    /// Ziegler-Nichols PI tuning for the plant `e = g (dphi_n + dphi_dc)`
    /// with one period of delay. A proportional loop on this plant reaches
    /// the stability limit at `kp g = 1` with a two-period oscillation, so
    /// `kp = 0.45 / g` and `ki = kp / (Tu / 1.2) = 0.27 / g` per period.
    pub fn ziegler_nichols(plant_gain: f64, dt: f64) -> Self {
        let g = plant_gain.abs();
        Self { kp: 0.45 / g, ki: 0.27 / g, kd: 0.0, dt, output_clamp: PI, integrator_clamp: PI }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("kp", self.kp), ("ki", self.ki), ("kd", self.kd)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be finite" });
            }
        }
        for (name, v) in
            [("dt", self.dt), ("output_clamp", self.output_clamp), ("integrator_clamp", self.integrator_clamp)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter { name, reason: "must be positive" });
            }
        }
        Ok(())
    }
}

impl Default for PidGains {
    /// Ziegler-Nichols gains for the default modulator geometry at a 1 ms period.
    fn default() -> Self {
        Self::ziegler_nichols(RamParams::default().harmonic_gain(1), 1e-3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: Option<f64>,
}

/// Positional PID law `u = kp e + I + kd (e - e_prev)` with
/// `I <- clamp(I + ki e)`; `u` is clamped to the output bound.
pub fn pid_step(state: PidState, error: f64, gains: &PidGains) -> (PidState, f64) {
    let ic = gains.integrator_clamp;
    let integral = (state.integral + gains.ki * error).clamp(-ic, ic);
    let derivative = state.prev_error.map_or(0.0, |p| gains.kd * (error - p));
    let oc = gains.output_clamp;
    let u = (gains.kp * error + integral + derivative).clamp(-oc, oc);
    (PidState { integral, prev_error: Some(error) }, u)
}

/// Time course of the uncontrolled birefringent phase (rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DriftModel {
    Constant(f64),
    /// `offset + rate t`.
    Ramp {
        offset: f64,
        rate: f64,
    },
    /// `offset + amplitude sin(2 pi frequency t)`.
    Sinusoid {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// Wiener process with diffusion `sigma` (rad/sqrt(s)).
    RandomWalk {
        offset: f64,
        sigma: f64,
        seed: u64,
    },
}

impl DriftModel {
    /// Drift sampled at `t_k = k dt`.
    pub fn sample(&self, n: usize, dt: f64) -> Vec<f64> {
        let t = |k: usize| k as f64 * dt;
        match *self {
            Self::Constant(c) => alloc::vec![c; n],
            Self::Ramp { offset, rate } => (0..n).map(|k| offset + rate * t(k)).collect(),
            Self::Sinusoid { offset, amplitude, frequency } => {
                (0..n).map(|k| offset + amplitude * libm::sin(2.0 * PI * frequency * t(k))).collect()
            }
            Self::RandomWalk { offset, sigma, seed } => {
                let steps = white_gaussian(n, seed);
                let scale = sigma * libm::sqrt(dt);
                let mut x = offset;
                let mut out = Vec::with_capacity(n);
                for (k, s) in steps.into_iter().enumerate() {
                    if k > 0 {
                        x += scale * s;
                    }
                    out.push(x);
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoConfig {
    /// Modulator geometry; `dphi_dc` is the starting bias, `dphi_n` is unused.
    pub ram: RamParams,
    pub gains: PidGains,
    /// Simulated time (s).
    pub duration: f64,
    pub locked: bool,
    /// Standard deviation of white noise added to each error reading.
    pub error_noise: f64,
    pub noise_seed: u64,
}

impl Default for ServoConfig {
    fn default() -> Self {
        Self {
            ram: RamParams::default(),
            gains: PidGains::default(),
            duration: 1.0,
            locked: true,
            error_noise: 0.0,
            noise_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServoTrace {
    pub time: Vec<f64>,
    pub dphi_n: Vec<f64>,
    pub dphi_dc: Vec<f64>,
    /// Demodulated error reading at each step, noise included.
    pub error: Vec<f64>,
}

impl ServoTrace {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// `sin(dphi_n + dphi_dc)`, the normalized RAM actually present.
    pub fn residual(&self) -> Vec<f64> {
        self.dphi_n.iter().zip(&self.dphi_dc).map(|(n, d)| libm::sin(n + d)).collect()
    }
}

/// Steps per window of the instability check.
pub const STABILITY_WINDOW: usize = 16;

/// Simulate the loop for `duration / dt` periods. Each period the error is
/// read at the current phases, then the controller output sets the bias for
/// the next period as `dphi_dc = -u`. With the lock off the bias stays put.
///
/// A locked run fails with [`Error::Unstable`] when the peak error in some
/// window exceeds ten times the initial error (or the smallest earlier
/// window peak) and a tenth of the full error range `|G|`.
pub fn run_servo(drift: &DriftModel, cfg: &ServoConfig) -> Result<ServoTrace> {
    cfg.gains.validate()?;
    cfg.ram.validate()?;
    let dt = cfg.gains.dt;
    if !(cfg.duration > 10.0 * dt) {
        return Err(Error::InvalidParameter { name: "duration", reason: "must exceed ten control periods" });
    }
    if !(cfg.error_noise >= 0.0 && cfg.error_noise.is_finite()) {
        return Err(Error::InvalidParameter { name: "error_noise", reason: "must be non-negative" });
    }
    let n = libm::round(cfg.duration / dt) as usize;
    let phi_n = drift.sample(n, dt);
    let noise = if cfg.error_noise > 0.0 {
        white_gaussian(n, cfg.noise_seed).into_iter().map(|g| g * cfg.error_noise).collect()
    } else {
        alloc::vec![0.0; n]
    };
    let g = cfg.ram.harmonic_gain(1).abs();
    let mut trace = ServoTrace {
        time: Vec::with_capacity(n),
        dphi_n: Vec::with_capacity(n),
        dphi_dc: Vec::with_capacity(n),
        error: Vec::with_capacity(n),
    };
    let mut state = PidState::default();
    let mut bias = cfg.ram.dphi_dc;
    let mut window_peak = 0.0f64;
    let mut lowest_peak = f64::INFINITY;
    for k in 0..n {
        let p = RamParams { dphi_n: phi_n[k], dphi_dc: bias, ..cfg.ram };
        let e = demod_error(&p) + noise[k];
        trace.time.push(k as f64 * dt);
        trace.dphi_n.push(phi_n[k]);
        trace.dphi_dc.push(bias);
        trace.error.push(e);
        if cfg.locked {
            let (next, u) = pid_step(state, e, &cfg.gains);
            state = next;
            bias = -u;
            if k == 0 {
                lowest_peak = e.abs();
            }
            window_peak = window_peak.max(e.abs());
            if (k + 1) % STABILITY_WINDOW == 0 {
                if window_peak > 10.0 * lowest_peak && window_peak > 0.1 * g {
                    let gs = cfg.gains;
                    return Err(Error::Unstable { time: k as f64 * dt, kp: gs.kp, ki: gs.ki, kd: gs.kd });
                }
                lowest_peak = lowest_peak.min(window_peak);
                window_peak = 0.0;
            }
        }
    }
    Ok(trace)
}
