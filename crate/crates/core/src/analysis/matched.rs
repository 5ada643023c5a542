use super::fit::LorentzParams;
use crate::{Error, Result};
use alloc::vec::Vec;
use core::ops::Range;

/// Kernel half-length in units of the half width.
pub const KERNEL_REACH: f64 = 10.0;

/// Filter output on the input grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredScan {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Indices where the kernel lies entirely inside the input record.
    pub valid: Range<usize>,
}

/// Symmetric Lorentzian taps `sigma / (x^2 + sigma^2)` at `x = k step`,
/// `|k| <= half`, scaled to unit energy.
pub fn lorentzian_kernel(sigma: f64, step: f64, half: usize) -> Vec<f64> {
    let h = half as i64;
    let mut taps: Vec<f64> = (-h..=h)
        .map(|k| {
            let x = k as f64 * step;
            sigma / (x * x + sigma * sigma)
        })
        .collect();
    let norm = libm::sqrt(taps.iter().map(|t| t * t).sum::<f64>());
    taps.iter_mut().for_each(|t| *t /= norm);
    taps
}

/// Convolve a uniformly sampled scan with a unit-energy Lorentzian of half
/// width `kernel.sigma` (same units as `grid`), truncated at
/// `KERNEL_REACH * sigma`. Samples beyond the record are taken as zero.
///
/// The kernel amplitude and centre do not enter: the filter is normalized and
/// centred on each output sample.
pub fn matched_filter(grid: &[f64], values: &[f64], kernel: &LorentzParams) -> Result<FilteredScan> {
    if grid.len() != values.len() || grid.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "scan",
            reason: "need matching grid and values, at least two points",
        });
    }
    let step = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if !(step > 0.0) || grid.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-6 * step) {
        return Err(Error::InvalidParameter { name: "grid", reason: "must be uniform and increasing" });
    }
    let fwhm = 2.0 * kernel.sigma;
    if !(fwhm >= 2.0 * step) {
        return Err(Error::KernelTooNarrow { fwhm, step });
    }
    let half = libm::ceil(KERNEL_REACH * kernel.sigma / step) as usize;
    let taps = lorentzian_kernel(kernel.sigma, step, half);
    let n = values.len();
    let out = (0..n)
        .map(|i| {
            taps.iter()
                .enumerate()
                .filter_map(|(j, &w)| {
                    let src = i as i64 + j as i64 - half as i64;
                    (src >= 0 && (src as usize) < n).then(|| w * values[src as usize])
                })
                .sum()
        })
        .collect();
    let valid = if n > 2 * half { half..n - half } else { 0..0 };
    Ok(FilteredScan { grid: grid.to_vec(), values: out, valid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::white_gaussian;
    use proptest::prelude::*;

    fn grid(n: usize, step: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * step).collect()
    }

    fn kernel(sigma: f64) -> LorentzParams {
        LorentzParams { amplitude: 1.0, sigma, center: 0.0 }
    }

    #[test]
    fn impulse_returns_kernel() {
        let g = grid(201, 1.0);
        let mut x = vec![0.0; 201];
        x[100] = 1.0;
        let out = matched_filter(&g, &x, &kernel(3.0)).unwrap();
        let half = 30;
        let mut energy = 0.0;
        for k in -half..=half {
            energy += (3.0 / ((k * k) as f64 + 9.0)).powi(2);
        }
        for k in -half..=half {
            let want = 3.0 / ((k * k) as f64 + 9.0) / energy.sqrt();
            assert!((out.values[(100 + k) as usize] - want).abs() < 1e-15);
        }
        assert_eq!(out.values[100 + half as usize + 1], 0.0);
        assert_eq!(out.valid, 30..171);
    }

    #[test]
    fn too_narrow_kernel() {
        let g = grid(50, 1.0);
        let x = vec![0.0; 50];
        assert_eq!(matched_filter(&g, &x, &kernel(0.9)), Err(Error::KernelTooNarrow { fwhm: 1.8, step: 1.0 }));
        assert!(matched_filter(&g, &x, &kernel(1.0)).is_ok());
    }

    #[test]
    fn preserves_peak_position() {
        let g = grid(401, 0.5);
        let center = 97.3;
        let x: Vec<f64> = g.iter().map(|&v| 2.0 / ((v - center).powi(2) + 4.0)).collect();
        let out = matched_filter(&g, &x, &kernel(2.0)).unwrap();
        let imax = (0..out.values.len()).max_by(|&a, &b| out.values[a].total_cmp(&out.values[b])).unwrap();
        assert!((g[imax] - center).abs() <= 0.5);
    }

    #[test]
    fn snr_gain_monte_carlo() {
        // peak-normalized line of HWHM 2.5 samples at input amplitude SNR 2
        let (n, sigma) = (512usize, 2.5);
        let g = grid(n, 1.0);
        let center = 256.0;
        let line: Vec<f64> = g.iter().map(|&v| sigma * sigma / ((v - center).powi(2) + sigma * sigma)).collect();
        let oracle = line.iter().map(|l| l * l).sum::<f64>().sqrt();
        let amp = 2.0;
        let clean = matched_filter(&g, &line, &kernel(sigma)).unwrap().values[256] * amp;
        let mut noise_sq = 0.0;
        let mut count = 0usize;
        for seed in 0..200 {
            let noise = white_gaussian(n, seed);
            let out = matched_filter(&g, &noise, &kernel(sigma)).unwrap();
            for i in out.valid.clone().step_by(16) {
                noise_sq += out.values[i] * out.values[i];
                count += 1;
            }
        }
        let gain = (clean / (noise_sq / count as f64).sqrt()) / amp;
        assert!((gain / oracle - 1.0).abs() < 0.2, "{gain} vs {oracle}");
    }

    proptest! {
        #[test]
        fn linear(a in -5.0f64..5.0, b in -5.0f64..5.0, seed in 0u64..1000) {
            let g = grid(128, 1.0);
            let x = white_gaussian(128, seed);
            let y = white_gaussian(128, seed + 1);
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let k = kernel(2.2);
            let fx = matched_filter(&g, &x, &k).unwrap().values;
            let fy = matched_filter(&g, &y, &k).unwrap().values;
            let fm = matched_filter(&g, &mix, &k).unwrap().values;
            for i in 0..128 {
                prop_assert!((fm[i] - (a * fx[i] + b * fy[i])).abs() < 1e-12);
            }
        }
    }
}
