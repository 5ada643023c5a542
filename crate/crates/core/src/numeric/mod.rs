//! Numerical building blocks shared by the physics and analysis modules.

mod fft;
mod quadrature;

pub use fft::{fft_in_place, ifft_in_place};
pub use quadrature::{gauss_hermite, integrate_adaptive, AdaptiveOptions, GaussHermite};

/// Integer-order Bessel function of the first kind, `J_n(x)`, for any sign of `n`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    libm::jn(n, x)
}

/// Linear interpolation of `values` sampled on the strictly increasing `grid`.
///
/// Returns `None` outside `[grid[0], grid[last]]`.
pub fn interp_linear<T>(grid: &[f64], values: &[T], x: f64) -> Option<T>
where
    T: Copy + core::ops::Mul<f64, Output = T> + core::ops::Add<Output = T>,
{
    let n = grid.len();
    if n == 0 || values.len() != n || !(x >= grid[0] && x <= grid[n - 1]) {
        return None;
    }
    if n == 1 {
        return Some(values[0]);
    }
    // first index with grid[i] > x, clamped so that [i - 1, i] is a valid cell
    let i = grid.partition_point(|&g| g <= x).clamp(1, n - 1);
    let (x0, x1) = (grid[i - 1], grid[i]);
    let w = (x - x0) / (x1 - x0);
    Some(values[i - 1] * (1.0 - w) + values[i] * w)
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_values_and_reflection() {
        assert!((bessel_j(0, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(bessel_j(3, 0.0), 0.0);
        // series: J1(x) = x/2 - x^3/16 + x^5/384 - ...
        let x: f64 = 0.2;
        let series = x / 2.0 - x.powi(3) / 16.0 + x.powi(5) / 384.0 - x.powi(7) / 18432.0;
        assert!((bessel_j(1, x) - series).abs() < 1e-12);
        assert!((bessel_j(1, 0.2) - 0.0995).abs() < 1e-4);
        for n in 1..6 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((bessel_j(-n, 1.3) - sign * bessel_j(n, 1.3)).abs() < 1e-15);
        }
    }

    #[test]
    fn interpolation_hits_nodes_and_midpoints() {
        let grid = [0.0, 1.0, 3.0];
        let vals = [1.0, 2.0, 6.0];
        assert_eq!(interp_linear(&grid, &vals, 1.0), Some(2.0));
        assert_eq!(interp_linear(&grid, &vals, 2.0), Some(4.0));
        assert_eq!(interp_linear(&grid, &vals, 3.0), Some(6.0));
        assert_eq!(interp_linear(&grid, &vals, 3.5), None);
        assert_eq!(interp_linear(&grid, &vals, -0.1), None);
    }
}
