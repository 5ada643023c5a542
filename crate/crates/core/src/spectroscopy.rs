//! Probe transmission spectra, Autler-Townes splitting and the
//! splitting/field conversion `delta_nu = mu_RF E_RF / h`.

use crate::constants::{C, EPS0, H, HBAR};
use crate::quantum::{susceptibility_with, DopplerOptions, FieldDrive, LadderSystem, COLD_VELOCITY_FLOOR};
use crate::{Error, Result, C64};
use alloc::vec::Vec;
use core::f64::consts::PI;

/// Complex susceptibility, field transmission and phase on a probe-detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpectrum {
    /// Probe detunings (rad/s), strictly increasing.
    pub grid: Vec<f64>,
    pub chi: Vec<C64>,
    /// Field amplitude transmission `t = exp(-k L Im(chi) / 2)`.
    pub amp_transmission: Vec<f64>,
    /// Phase shift `k L Re(chi) / 2` (rad).
    pub phase: Vec<f64>,
    /// Factor converting a peak separation on the probe axis to the splitting
    /// of the dressed Rydberg pair. In a thermal vapor with counter-propagating
    /// beams the probe-axis splitting is compressed by `lambda_c / lambda_p`, so
    /// the factor is `lambda_p / lambda_c`; it is 1 for stationary atoms.
    pub axis_scale: f64,
}

impl MediumSpectrum {
    /// Build from susceptibilities sampled on `grid` for a medium of length
    /// `length` probed at wave number `k`.
    pub fn from_chi(grid: Vec<f64>, chi: Vec<C64>, k: f64, length: f64, axis_scale: f64) -> Result<Self> {
        check_grid(&grid)?;
        if chi.len() != grid.len() {
            return Err(Error::InvalidParameter { name: "chi", reason: "length differs from the grid" });
        }
        let amp_transmission = chi.iter().map(|c| libm::exp(-0.5 * k * length * c.im)).collect();
        let phase = chi.iter().map(|c| 0.5 * k * length * c.re).collect();
        Ok(Self { grid, chi, amp_transmission, phase, axis_scale })
    }

    /// A medium with `t = 1`, `phase = 0` on `grid`.
    pub fn vacuum(grid: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        Self::from_chi(grid, alloc::vec![C64::new(0.0, 0.0); n], 1.0, 1.0, 1.0)
    }

    /// Power transmission `t^2`.
    pub fn power_transmission(&self) -> Vec<f64> {
        self.amp_transmission.iter().map(|t| t * t).collect()
    }

    /// Complex field response `t exp(i phase)` at `detuning`, linearly interpolated.
    pub fn response(&self, detuning: f64) -> Result<C64> {
        let t = crate::numeric::interp_linear(&self.grid, &self.amp_transmission, detuning);
        let p = crate::numeric::interp_linear(&self.grid, &self.phase, detuning);
        match (t, p) {
            (Some(t), Some(p)) => Ok(C64::from_polar(t, p)),
            _ => Err(Error::OutOfGrid { detuning }),
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter { name: "grid", reason: "must not be empty" });
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter { name: "grid", reason: "must be finite and strictly increasing" });
    }
    Ok(())
}

/// Symmetric grid `k * step` for `k = -half_points..=half_points` (rad/s).
///
/// Built from integer multiples so that `grid[i] == -grid[n - 1 - i]` exactly.
pub fn symmetric_grid(step: f64, half_points: usize) -> Vec<f64> {
    let h = half_points as i64;
    (-h..=h).map(|k| k as f64 * step).collect()
}

/// Probe-axis to dressed-splitting factor for this system (see [`MediumSpectrum::axis_scale`]).
pub fn axis_scale(sys: &LadderSystem) -> f64 {
    if sys.thermal_velocity() >= COLD_VELOCITY_FLOOR {
        sys.lambda_probe / sys.lambda_coupling
    } else {
        1.0
    }
}

/// Scan the probe detuning over `grid` with the rest of `drive` fixed.
pub fn scan_probe(sys: &LadderSystem, drive: &FieldDrive, grid: &[f64]) -> Result<MediumSpectrum> {
    scan_probe_with(sys, drive, grid, DopplerOptions::default())
}

pub fn scan_probe_with(
    sys: &LadderSystem,
    drive: &FieldDrive,
    grid: &[f64],
    opts: DopplerOptions,
) -> Result<MediumSpectrum> {
    check_grid(grid)?;
    let chi = grid
        .iter()
        .map(|&d| susceptibility_with(sys, &FieldDrive { delta_p: d, ..*drive }, opts))
        .collect::<Result<Vec<_>>>()?;
    MediumSpectrum::from_chi(grid.to_vec(), chi, sys.k_probe(), sys.cell_length, axis_scale(sys))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confidence {
    Resolved,
    Unresolved,
}

/// Outcome of an Autler-Townes splitting search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtResult {
    /// Dressed splitting (Hz); `None` when unresolved.
    pub split_hz: Option<f64>,
    /// Refined positions of the two transmission peaks (rad/s), ascending.
    pub peak_locations: Option<(f64, f64)>,
    /// Estimated FWHM of the stronger peak (rad/s), when measurable.
    pub peak_fwhm: Option<f64>,
    pub confidence: Confidence,
}

impl AtResult {
    fn unresolved(peaks: Option<(f64, f64)>, fwhm: Option<f64>) -> Self {
        Self { split_hz: None, peak_locations: peaks, peak_fwhm: fwhm, confidence: Confidence::Unresolved }
    }
}

/// Local maxima must stand out by this fraction of the spectrum's range.
pub const MIN_PROMINENCE: f64 = 0.01;

fn prominence(y: &[f64], i: usize) -> f64 {
    let mut left_min = y[i];
    for &v in y[..i].iter().rev() {
        if v > y[i] {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = y[i];
    for &v in &y[i + 1..] {
        if v > y[i] {
            break;
        }
        right_min = right_min.min(v);
    }
    y[i] - left_min.max(right_min)
}

/// Vertex of the parabola through three neighbouring samples.
fn parabolic_vertex(x: &[f64], y: &[f64], i: usize) -> f64 {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        x1
    } else {
        x1 - 0.5 * num / den
    }
}

/// Half width at half height above `base`, walking from peak `i` in `dir`.
fn half_width(x: &[f64], y: &[f64], i: usize, base: f64, dir: isize) -> Option<f64> {
    let half = 0.5 * (y[i] + base);
    let mut j = i as isize;
    loop {
        let next = j + dir;
        if next < 0 || next as usize >= y.len() {
            return None;
        }
        let (a, b) = (j as usize, next as usize);
        if y[b] <= half {
            let w = (y[a] - half) / (y[a] - y[b]);
            return Some((x[a] + w * (x[b] - x[a]) - x[i]).abs());
        }
        j = next;
    }
}

/// Locate the two strongest transmission peaks and decide whether the
/// Autler-Townes doublet is resolved.
///
/// Peaks are local maxima of the power transmission with prominence of at
/// least [`MIN_PROMINENCE`] of the spectrum range, refined by three-point
/// parabolic interpolation. The doublet counts as resolved when the peak
/// separation exceeds the FWHM of the stronger peak, measured on its outer
/// flank above the spectrum minimum.
pub fn at_splitting(spec: &MediumSpectrum) -> AtResult {
    let y = spec.power_transmission();
    let x = &spec.grid;
    if y.len() < 3 {
        return AtResult::unresolved(None, None);
    }
    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = hi - lo;
    let mut peaks: Vec<usize> = (1..y.len() - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1])
        .filter(|&i| range > 0.0 && prominence(&y, i) >= MIN_PROMINENCE * range)
        .collect();
    peaks.sort_by(|&a, &b| y[b].total_cmp(&y[a]));
    if peaks.len() < 2 {
        return AtResult::unresolved(None, None);
    }
    let (strong, weak) = (peaks[0], peaks[1]);
    let (p0, p1) = (parabolic_vertex(x, &y, strong), parabolic_vertex(x, &y, weak));
    let locations = if p0 < p1 { (p0, p1) } else { (p1, p0) };
    let outward = if strong < weak { -1 } else { 1 };
    let fwhm =
        half_width(x, &y, strong, lo, outward).or_else(|| half_width(x, &y, strong, lo, -outward)).map(|h| 2.0 * h);
    let separation = locations.1 - locations.0;
    match fwhm {
        Some(w) if separation > w => AtResult {
            split_hz: Some(separation * spec.axis_scale / (2.0 * PI)),
            peak_locations: Some(locations),
            peak_fwhm: fwhm,
            confidence: Confidence::Resolved,
        },
        _ => AtResult::unresolved(Some(locations), fwhm),
    }
}

/// RF field amplitude (V/m) producing an Autler-Townes splitting `split_hz`.
pub fn field_from_splitting(split_hz: f64, mu_rf: f64) -> Result<f64> {
    if mu_rf == 0.0 || !mu_rf.is_finite() {
        return Err(Error::Domain("RF dipole must be non-zero"));
    }
    if !(split_hz >= 0.0) {
        return Err(Error::Domain("splitting must be non-negative"));
    }
    Ok(H * split_hz / mu_rf)
}

/// Autler-Townes splitting (Hz) produced by an RF field amplitude `e_field` (V/m).
pub fn splitting_from_field(e_field: f64, mu_rf: f64) -> Result<f64> {
    if !(e_field >= 0.0) {
        return Err(Error::Domain("field amplitude must be non-negative"));
    }
    Ok(mu_rf * e_field / H)
}

/// Peak field of a Gaussian beam of total `power` (W) and `1/e^2` diameter
/// `diameter` (m): `I_peak = 2 P / (pi w^2)`, `E = sqrt(2 I / (c eps0))`.
pub fn peak_field(power: f64, diameter: f64) -> f64 {
    let w = 0.5 * diameter;
    libm::sqrt(4.0 * power / (PI * w * w * C * EPS0))
}

/// Rabi frequency (rad/s) of a beam with `power` (W) and `diameter` (m)
/// driving a transition of dipole `dipole` (C·m), taken at the beam peak.
pub fn rabi_from_power(power: f64, diameter: f64, dipole: f64) -> f64 {
    dipole * peak_field(power, diameter) / HBAR
}

/// Dipole that gives Rabi frequency `rabi` for the stated beam.
pub fn dipole_from_rabi(rabi: f64, power: f64, diameter: f64) -> f64 {
    rabi * HBAR / peak_field(power, diameter)
}
