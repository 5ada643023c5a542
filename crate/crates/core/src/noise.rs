//! Seeded noise synthesis: power-law fractional-frequency noise shaped in the
//! Fourier domain, and Gaussian photodetector shot noise.
//!
//! Power-law kinds follow the two-sample-variance convention: the one-sided
//! PSD of the generated fractional-frequency series is `S_y(f) = h f^alpha`
//! (`f` in Hz). With this normalisation white FM (`alpha = 0`, coefficient
//! `h0`) has Allan variance `h0 / (2 tau)`.

use crate::constants::{C, E_CHARGE, H};
use crate::numeric::{fft_in_place, ifft_in_place};
use crate::{Error, Result, C64};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    /// White phase noise seen as frequency data, `alpha = +2`.
    WhitePm,
    /// Flicker phase noise, `alpha = +1`.
    FlickerPm,
    /// White frequency noise, `alpha = 0`.
    WhiteFm,
    /// Flicker frequency noise, `alpha = -1`.
    FlickerFm,
    /// Random-walk frequency noise, `alpha = -2`.
    RandomWalkFm,
    Shot,
    Composite,
}

impl NoiseKind {
    pub const POWER_LAW: [NoiseKind; 5] =
        [Self::WhitePm, Self::FlickerPm, Self::WhiteFm, Self::FlickerFm, Self::RandomWalkFm];

    pub fn label(self) -> &'static str {
        match self {
            Self::WhitePm => "white_pm",
            Self::FlickerPm => "flicker_pm",
            Self::WhiteFm => "white_fm",
            Self::FlickerFm => "flicker_fm",
            Self::RandomWalkFm => "rw_fm",
            Self::Shot => "shot",
            Self::Composite => "composite",
        }
    }

    /// PSD exponent of a power-law kind.
    pub fn exponent(self) -> Option<f64> {
        match self {
            Self::WhitePm => Some(2.0),
            Self::FlickerPm => Some(1.0),
            Self::WhiteFm => Some(0.0),
            Self::FlickerFm => Some(-1.0),
            Self::RandomWalkFm => Some(-2.0),
            Self::Shot | Self::Composite => None,
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Self::WhitePm,
            Self::FlickerPm,
            Self::WhiteFm,
            Self::FlickerFm,
            Self::RandomWalkFm,
            Self::Shot,
            Self::Composite,
        ]
        .into_iter()
        .find(|k| k.label() == s)
        .ok_or(Error::InvalidParameter { name: "kind", reason: "unknown noise kind" })
    }
}

/// Uniformly sampled real record.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// Sample interval (s).
    pub dt: f64,
    pub values: Vec<f64>,
    /// Seed of the generator that produced the record.
    pub seed: u64,
    pub kind: NoiseKind,
}

impl TimeSeries {
    pub fn new(dt: f64, values: Vec<f64>, seed: u64, kind: NoiseKind) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter { name: "dt", reason: "must be positive" });
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter { name: "values", reason: "need at least two samples" });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter { name: "values", reason: "must be finite" });
        }
        Ok(Self { dt, values, seed, kind })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total duration `n dt` (s).
    pub fn duration(&self) -> f64 {
        self.dt * self.values.len() as f64
    }

    /// Sample-wise sum of records with the same interval and length.
    pub fn sum(parts: &[TimeSeries], seed: u64) -> Result<Self> {
        let first = parts.first().ok_or(Error::InvalidParameter { name: "parts", reason: "empty" })?;
        if parts.iter().any(|p| p.len() != first.len() || p.dt != first.dt) {
            return Err(Error::InvalidParameter { name: "parts", reason: "lengths or intervals differ" });
        }
        let values = (0..first.len()).map(|i| parts.iter().map(|p| p.values[i]).sum()).collect();
        Self::new(first.dt, values, seed, NoiseKind::Composite)
    }
}

/// Power-law coefficients `h_alpha` of a composite noise model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseBudget {
    pub white_pm: f64,
    pub flicker_pm: f64,
    pub white_fm: f64,
    pub flicker_fm: f64,
    pub rw_fm: f64,
}

impl NoiseBudget {
    pub fn validate(&self) -> Result<()> {
        for (kind, h) in self.terms() {
            if !(h >= 0.0 && h.is_finite()) {
                return Err(Error::InvalidParameter { name: kind.label(), reason: "coefficient must be non-negative" });
            }
        }
        Ok(())
    }

    pub fn terms(&self) -> [(NoiseKind, f64); 5] {
        [
            (NoiseKind::WhitePm, self.white_pm),
            (NoiseKind::FlickerPm, self.flicker_pm),
            (NoiseKind::WhiteFm, self.white_fm),
            (NoiseKind::FlickerFm, self.flicker_fm),
            (NoiseKind::RandomWalkFm, self.rw_fm),
        ]
    }

    /// Sum of independent components, each drawn from its own sub-seed.
    pub fn generate(&self, n: usize, dt: f64, seed: u64) -> Result<TimeSeries> {
        self.validate()?;
        let parts = self
            .terms()
            .iter()
            .enumerate()
            .map(|(i, &(kind, h))| gen_powerlaw(kind, h, n, dt, sub_seed(seed, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        TimeSeries::sum(&parts, seed)
    }

    /// One-sided PSD `sum_alpha h_alpha f^alpha`.
    pub fn psd(&self, f: f64) -> f64 {
        self.terms().iter().map(|&(k, h)| h * libm::pow(f, k.exponent().unwrap_or(0.0))).sum()
    }
}

/// Independent stream seed derived from a parent seed (SplitMix64 step).
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n` independent standard normal draws from a ChaCha8 stream.
pub fn white_gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Fractional-frequency series with one-sided PSD `coefficient * f^alpha`.
///
/// White Gaussian noise is transformed, each bin at `f_k = k / (n dt)` is
/// scaled by `sqrt(h f_k^alpha / (2 dt))`, the DC bin is removed, and the
/// result transformed back. `n` must be a power of two.
pub fn gen_powerlaw(kind: NoiseKind, coefficient: f64, n: usize, dt: f64, seed: u64) -> Result<TimeSeries> {
    let alpha = kind.exponent().ok_or(Error::UnsupportedKind(kind.label()))?;
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter { name: "n", reason: "must be a power of two >= 2" });
    }
    if !(coefficient >= 0.0 && coefficient.is_finite()) {
        return Err(Error::InvalidParameter { name: "coefficient", reason: "must be non-negative" });
    }
    if coefficient == 0.0 {
        return TimeSeries::new(dt, alloc::vec![0.0; n], seed, kind);
    }
    let mut spectrum: Vec<C64> = white_gaussian(n, seed).into_iter().map(|v| C64::new(v, 0.0)).collect();
    fft_in_place(&mut spectrum);
    let df = 1.0 / (n as f64 * dt);
    spectrum[0] = C64::new(0.0, 0.0);
    for k in 1..=n / 2 {
        let f = k as f64 * df;
        let gain = libm::sqrt(coefficient * libm::pow(f, alpha) / (2.0 * dt));
        spectrum[k] *= gain;
        if k != n / 2 {
            spectrum[n - k] *= gain;
        }
    }
    ifft_in_place(&mut spectrum);
    TimeSeries::new(dt, spectrum.into_iter().map(|z| z.re).collect(), seed, kind)
}

/// Photocurrent record with Gaussian shot noise: mean `current`, per-sample
/// variance `2 e I B` at the Nyquist bandwidth `B = 1 / (2 dt)`.
pub fn shot_noise_series(current: f64, dt: f64, n: usize, seed: u64) -> Result<TimeSeries> {
    if !(current >= 0.0 && current.is_finite()) {
        return Err(Error::InvalidParameter { name: "current", reason: "must be non-negative" });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter { name: "dt", reason: "must be positive" });
    }
    let sigma = libm::sqrt(2.0 * E_CHARGE * current / (2.0 * dt));
    let values = white_gaussian(n, seed).into_iter().map(|g| current + sigma * g).collect();
    TimeSeries::new(dt, values, seed, NoiseKind::Shot)
}

/// Shot-noise-limited signal-to-noise ratio of a detector,
/// `sqrt(eta P / (2 h nu df))`: the mean photocurrent `eta e P / (h nu)` over
/// the shot-noise current `sqrt(2 e I df)`.
pub fn shot_noise_snr(eta: f64, power: f64, wavelength: f64, bandwidth: f64) -> f64 {
    let photon = H * C / wavelength;
    libm::sqrt(eta * power / (2.0 * photon * bandwidth))
}

/// Photocurrent (A) produced by `power` (W) at quantum efficiency `eta`.
pub fn photocurrent(eta: f64, power: f64, wavelength: f64) -> f64 {
    eta * E_CHARGE * power * wavelength / (H * C)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::allan_deviation;
    use rustfft::FftPlanner;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
    }

    /// Log-binned periodogram slope between `f_lo` and `f_hi`, independent FFT.
    fn periodogram_slope(ts: &TimeSeries, f_lo: f64, f_hi: f64) -> f64 {
        let n = ts.len();
        let mut buf: Vec<rustfft::num_complex::Complex64> =
            ts.values.iter().map(|&v| rustfft::num_complex::Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let df = 1.0 / (n as f64 * ts.dt);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut edge = f_lo;
        while edge * 1.25 <= f_hi {
            let (a, b) = ((edge / df).ceil() as usize, ((edge * 1.25) / df).floor() as usize);
            if b > a {
                let p: f64 = (a..b).map(|k| buf[k].norm_sqr()).sum::<f64>() / (b - a) as f64;
                xs.push(libm::log10(edge * 1.118));
                ys.push(libm::log10(p));
            }
            edge *= 1.25;
        }
        crate::numeric::linear_slope(&xs, &ys)
    }

    #[test]
    fn zero_coefficient_is_silent() {
        let ts = gen_powerlaw(NoiseKind::FlickerPm, 0.0, 64, 1.0, 3).unwrap();
        assert!(ts.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = gen_powerlaw(NoiseKind::RandomWalkFm, 1e-3, 1024, 0.1, 42).unwrap();
        let b = gen_powerlaw(NoiseKind::RandomWalkFm, 1e-3, 1024, 0.1, 42).unwrap();
        let c = gen_powerlaw(NoiseKind::RandomWalkFm, 1e-3, 1024, 0.1, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn rejects_bad_requests() {
        assert_eq!(gen_powerlaw(NoiseKind::Shot, 1.0, 64, 1.0, 0), Err(Error::UnsupportedKind("shot")));
        assert!(gen_powerlaw(NoiseKind::WhiteFm, 1.0, 100, 1.0, 0).is_err());
        assert!(TimeSeries::new(0.0, vec![1.0, 2.0], 0, NoiseKind::WhiteFm).is_err());
        assert!(TimeSeries::new(1.0, vec![1.0], 0, NoiseKind::WhiteFm).is_err());
        assert_eq!("rw_fm".parse::<NoiseKind>().unwrap(), NoiseKind::RandomWalkFm);
    }

    #[test]
    fn white_fm_variance_matches_psd() {
        let h0 = 2e-3;
        let dt = 0.01;
        let ts = gen_powerlaw(NoiseKind::WhiteFm, h0, 1 << 16, dt, 7).unwrap();
        let (_, var) = mean_var(&ts.values);
        assert!((var / (h0 / (2.0 * dt)) - 1.0).abs() < 0.02);
    }

    #[test]
    fn white_fm_allan_law() {
        let h0 = 1e-2;
        let dt = 1.0;
        let n = 1 << 16;
        let taus: Vec<f64> = (0..13).map(|k| (1u64 << k) as f64).filter(|&t| t <= n as f64 * dt / 10.0).collect();
        // ensemble-mean Allan variance over independent seeds
        let seeds = 8;
        let mut avar = vec![0.0; taus.len()];
        for seed in 0..seeds {
            let ts = gen_powerlaw(NoiseKind::WhiteFm, h0, n, dt, 11 + seed).unwrap();
            let res = allan_deviation(&ts, &taus, crate::analysis::AllanEstimator::Overlapping).unwrap();
            for (a, s) in avar.iter_mut().zip(&res.sigma) {
                *a += s * s / seeds as f64;
            }
        }
        for (tau, var) in taus.iter().zip(&avar) {
            let sigma = var.sqrt();
            let want = libm::sqrt(h0 / (2.0 * tau));
            assert!((sigma / want - 1.0).abs() < 0.1, "tau {tau}: {sigma} vs {want}");
        }
    }

    #[test]
    fn spectral_slopes_recovered() {
        let n = 1 << 16;
        let dt = 1e-3;
        let f_nyq = 0.5 / dt;
        for kind in NoiseKind::POWER_LAW {
            let ts = gen_powerlaw(kind, 1e-6, n, dt, 2024).unwrap();
            let slope = periodogram_slope(&ts, 20.0 / (n as f64 * dt), 0.5 * f_nyq);
            let alpha = kind.exponent().unwrap();
            assert!((slope - alpha).abs() < 0.2, "{kind}: {slope}");
        }
    }

    #[test]
    fn composite_psd_adds() {
        let n = 1 << 16;
        let dt = 1e-3;
        let budget = NoiseBudget { white_fm: 1e-6, rw_fm: 1e-7, ..Default::default() };
        let ts = budget.generate(n, dt, 5).unwrap();
        assert_eq!(ts.kind, NoiseKind::Composite);
        // averaged periodogram against the summed model PSD over a few bands
        let mut buf: Vec<rustfft::num_complex::Complex64> =
            ts.values.iter().map(|&v| rustfft::num_complex::Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let df = 1.0 / (n as f64 * dt);
        for f in [0.5, 5.0, 50.0, 400.0] {
            let k0 = (f / df) as usize;
            let width = (k0 / 4).max(40);
            let bins = k0 - width / 2..k0 + width / 2;
            let est: f64 = bins.clone().map(|k| 2.0 * dt / n as f64 * buf[k].norm_sqr()).sum::<f64>() / width as f64;
            let model = bins.map(|k| budget.psd(k as f64 * df)).sum::<f64>() / width as f64;
            assert!((est / model - 1.0).abs() < 0.5, "f {f}: {est} vs {model}");
        }
    }

    #[test]
    fn shot_noise_statistics() {
        assert!(shot_noise_series(0.0, 1e-3, 16, 1).unwrap().values.iter().all(|&v| v == 0.0));
        let current = 1e-6;
        let dt = 1e-6;
        let ts = shot_noise_series(current, dt, 1_000_000, 9).unwrap();
        let (m, var) = mean_var(&ts.values);
        let want = 2.0 * E_CHARGE * current / (2.0 * dt);
        assert!((var / want - 1.0).abs() < 0.02);
        assert!((m - current).abs() < 5.0 * libm::sqrt(want / 1e6));
        let double = shot_noise_series(2.0 * current, dt, 1_000_000, 9).unwrap();
        let (_, var2) = mean_var(&double.values);
        assert!((var2 / var - 2.0).abs() < 1e-9);
    }

    #[test]
    fn shot_noise_snr_laws() {
        let a = shot_noise_snr(0.8, 6.5e-6, 852e-9, 1.0);
        let b = shot_noise_snr(0.8, 6.5e-6, 852e-9, 4.0);
        assert!((a / b - 2.0).abs() < 1e-12);
        // hand substitution: sqrt(0.8 * 6.5e-6 / (2 * 2.3316e-19)) = 3.34e6
        assert!((a / 3.34e6 - 1.0).abs() < 0.01, "{a}");
        let photon = H * C / 852e-9;
        assert!((shot_noise_snr(0.5, photon * 2.0 * 3.0 / 0.5, 852e-9, 3.0) - 1.0).abs() < 1e-12);
    }
}
