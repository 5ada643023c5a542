use crate::{Error, Result, C64};
use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Hermite rule for `integral exp(-x^2) f(x) dx` over the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Expectation of `f(X)` for `X ~ N(0, sigma^2)`.
    pub fn normal_expectation<T, F>(&self, sigma: f64, mut f: F) -> T
    where
        T: Copy + core::iter::Sum + core::ops::Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let scale = core::f64::consts::SQRT_2 * sigma;
        let norm = 1.0 / libm::sqrt(core::f64::consts::PI);
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| f(scale * x) * (w * norm)).sum()
    }
}

/// Golub-Welsch construction of the `n`-point Gauss-Hermite rule.
pub fn gauss_hermite(n: usize) -> GaussHermite {
    assert!(n >= 1);
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = libm::sqrt(i as f64 / 2.0);
        jacobi[(i, i - 1)] = b;
        jacobi[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], libm::sqrt(core::f64::consts::PI) * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // exact symmetry of the rule, so odd moments vanish to rounding
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    GaussHermite { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerances and limits for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 0.0, max_panels: 4000 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken on position so the refinement order is reproducible
        self.error.total_cmp(&other.error).then(other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F: FnMut(f64) -> C64>(f: &mut F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    Panel { a, b, value: kron * h, error: ((kron - gauss) * h).norm() }
}

/// Globally adaptive Gauss-Kronrod integration of a complex integrand.
///
/// `breaks` is a sorted list of interior points where the integrand is known
/// to have structure; the initial mesh places panel edges on them. The panel
/// with the largest error estimate is bisected until the summed estimate meets
/// the tolerance.
pub fn integrate_adaptive<F>(mut f: F, breaks: &[f64], opts: AdaptiveOptions) -> Result<C64>
where
    F: FnMut(f64) -> C64,
{
    assert!(breaks.len() >= 2, "need at least the two end points");
    let mut heap = BinaryHeap::with_capacity(opts.max_panels + 1);
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod15(&mut f, w[0], w[1]));
        }
    }
    loop {
        let total: C64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        // cancelling integrands (odd in v) can never meet a relative target
        let rounding = 64.0 * f64::EPSILON * heap.iter().map(|p| p.value.norm()).sum::<f64>();
        let target = opts.abs_tol.max(opts.rel_tol * total.norm()).max(rounding);
        if err <= target {
            return Ok(total);
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::NonConvergence { what: "adaptive quadrature", estimate: total.norm(), change: err });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel no longer splittable in floating point
            return Err(Error::NonConvergence { what: "adaptive quadrature", estimate: total.norm(), change: err });
        }
        heap.push(kronrod15(&mut f, worst.a, mid));
        heap.push(kronrod15(&mut f, mid, worst.b));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_hermite_moments() {
        let gh = gauss_hermite(64);
        let sum: f64 = gh.weights.iter().sum();
        assert!((sum - libm::sqrt(core::f64::consts::PI)).abs() < 1e-13);
        // E[X^4] = 3 sigma^4 for a normal variable
        let m4: f64 = gh.normal_expectation(2.0, |x| x.powi(4));
        assert!((m4 / 48.0 - 1.0).abs() < 1e-12);
        let odd: f64 = gh.normal_expectation(3.0, |x| x.powi(3));
        assert!(odd.abs() < 1e-10);
    }

    #[test]
    fn adaptive_resolves_narrow_lorentzian() {
        // integral of g/(x^2 + g^2) over [-L, L] is 2 atan(L/g)
        let g = 1e-3;
        let v = integrate_adaptive(
            |x| C64::new(g / (x * x + g * g), 0.0),
            &[-1e4, -1.0, 0.0, 1.0, 1e4],
            AdaptiveOptions { rel_tol: 1e-10, ..Default::default() },
        )
        .unwrap();
        assert!((v.re - 2.0 * libm::atan(1e4 / g)).abs() < 1e-9);
    }

    #[test]
    fn adaptive_reports_nonconvergence() {
        let r = integrate_adaptive(
            |x| C64::new(1.0 / x.abs().sqrt().max(1e-300), 0.0),
            &[-1.0, 1.0],
            AdaptiveOptions { rel_tol: 1e-14, abs_tol: 0.0, max_panels: 20 },
        );
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
