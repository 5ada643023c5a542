use crate::noise::TimeSeries;
use crate::{Error, Result};
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllanEstimator {
    NonOverlapping,
    Overlapping,
}

impl AllanEstimator {
    pub fn label(self) -> &'static str {
        match self {
            Self::NonOverlapping => "nonoverlapping",
            Self::Overlapping => "overlapping",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllanResult {
    /// Averaging times (s), increasing.
    pub taus: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Number of `tau`-long averaging bins in the record.
    pub counts: Vec<usize>,
    pub estimator: AllanEstimator,
}

impl AllanResult {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// Neumaier-compensated prefix sums as `(hi, lo)` pairs.
fn prefix_sums(y: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(y.len() + 1);
    let (mut s, mut c) = (0.0f64, 0.0f64);
    out.push((0.0, 0.0));
    for &v in y {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
        out.push((s, c));
    }
    out
}

fn window_sum(p: &[(f64, f64)], a: usize, b: usize) -> f64 {
    (p[b].0 - p[a].0) + (p[b].1 - p[a].1)
}

fn tau_multiple(tau: f64, dt: f64) -> Result<usize> {
    let m = libm::round(tau / dt);
    if !(m >= 1.0) || (m * dt - tau).abs() > 1e-9 * tau {
        return Err(Error::InvalidParameter { name: "tau", reason: "must be a positive integer multiple of dt" });
    }
    Ok(m as usize)
}

/// Allan deviation `sigma_y(tau)` with `sigma_y^2 = <(ybar_{i+1} - ybar_i)^2> / 2`,
/// where `ybar_i` are consecutive `tau` averages of the fractional-frequency
/// record. The overlapping estimator averages over every start sample.
///
/// Each `tau` must be an integer multiple of `dt` leaving at least three bins.
pub fn allan_deviation(ts: &TimeSeries, taus: &[f64], estimator: AllanEstimator) -> Result<AllanResult> {
    if taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter { name: "taus", reason: "must be strictly increasing" });
    }
    let y = &ts.values;
    let n = y.len();
    let p = prefix_sums(y);
    let mut sigma = Vec::with_capacity(taus.len());
    let mut counts = Vec::with_capacity(taus.len());
    for &tau in taus {
        let m = tau_multiple(tau, ts.dt)?;
        let bins = n / m;
        if bins < 3 {
            return Err(Error::InsufficientData { tau, bins });
        }
        let mf = m as f64;
        let var = match estimator {
            AllanEstimator::NonOverlapping => {
                let means: Vec<f64> = (0..bins).map(|k| y[k * m..(k + 1) * m].iter().sum::<f64>() / mf).collect();
                let s: f64 = means.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
                s / (2.0 * (bins - 1) as f64)
            }
            AllanEstimator::Overlapping => {
                let terms = n - 2 * m + 1;
                let s: f64 = (0..terms)
                    .map(|j| {
                        let d = (window_sum(&p, j + m, j + 2 * m) - window_sum(&p, j, j + m)) / mf;
                        d * d
                    })
                    .sum();
                s / (2.0 * terms as f64)
            }
        };
        sigma.push(libm::sqrt(var));
        counts.push(bins);
    }
    Ok(AllanResult { taus: taus.to_vec(), sigma, counts, estimator })
}

/// Noise type implied by a local log-log slope of `sigma_y(tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseClass {
    /// Slope -1: white or flicker phase noise (not separable by this statistic).
    PhaseNoise,
    /// Slope -1/2.
    WhiteFm,
    /// Slope 0.
    FlickerFm,
    /// Slope +1/2.
    RandomWalkFm,
    /// Slope +1: linear frequency drift.
    Drift,
    /// Slope farther than [`SLOPE_TOLERANCE`] from every reference slope.
    Ambiguous,
    /// Zero deviation; no slope defined.
    None,
}

impl NoiseClass {
    pub fn label(self) -> &'static str {
        match self {
            Self::PhaseNoise => "white_or_flicker_pm",
            Self::WhiteFm => "white_fm",
            Self::FlickerFm => "flicker_fm",
            Self::RandomWalkFm => "rw_fm",
            Self::Drift => "drift",
            Self::Ambiguous => "ambiguous",
            Self::None => "none",
        }
    }

    fn reference_slope(self) -> Option<f64> {
        match self {
            Self::PhaseNoise => Some(-1.0),
            Self::WhiteFm => Some(-0.5),
            Self::FlickerFm => Some(0.0),
            Self::RandomWalkFm => Some(0.5),
            Self::Drift => Some(1.0),
            Self::Ambiguous | Self::None => None,
        }
    }
}

/// Half-width of the acceptance band around each reference slope.
pub const SLOPE_TOLERANCE: f64 = 0.15;

/// Classification at one `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauClass {
    pub tau: f64,
    /// Local log-log slope, absent when undefined.
    pub slope: Option<f64>,
    pub class: NoiseClass,
}

/// Label each `tau` by the least-squares log-log slope over it and its
/// immediate neighbours. Slopes outside every `±SLOPE_TOLERANCE` band come
/// back as [`NoiseClass::Ambiguous`] together with the measured slope.
pub fn classify_noise(result: &AllanResult) -> Vec<TauClass> {
    let n = result.len();
    (0..n)
        .map(|i| {
            let tau = result.taus[i];
            let (a, b) = (i.saturating_sub(1), (i + 2).min(n));
            if b - a < 2 || result.sigma[a..b].iter().any(|&s| !(s > 0.0)) {
                return TauClass { tau, slope: None, class: NoiseClass::None };
            }
            let xs: Vec<f64> = result.taus[a..b].iter().map(|t| libm::log(*t)).collect();
            let ys: Vec<f64> = result.sigma[a..b].iter().map(|s| libm::log(*s)).collect();
            let slope = crate::numeric::linear_slope(&xs, &ys);
            let class = [
                NoiseClass::PhaseNoise,
                NoiseClass::WhiteFm,
                NoiseClass::FlickerFm,
                NoiseClass::RandomWalkFm,
                NoiseClass::Drift,
            ]
            .into_iter()
            .find(|c| (c.reference_slope().unwrap() - slope).abs() <= SLOPE_TOLERANCE)
            .unwrap_or(NoiseClass::Ambiguous);
            TauClass { tau, slope: Some(slope), class }
        })
        .collect()
}
