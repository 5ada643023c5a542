use crate::{Error, Result};
use alloc::vec::Vec;
use nalgebra::{Matrix4, Vector4};

/// `F(nu) = A sigma / ((nu - nu_c)^2 + sigma^2)`, peak height `A / sigma`.
///
/// `sigma` is the half width at half maximum; reports convert to the full
/// width `2 sigma` where they say so.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzParams {
    pub amplitude: f64,
    /// Half width at half maximum.
    pub sigma: f64,
    pub center: f64,
}

impl LorentzParams {
    pub fn eval(&self, nu: f64) -> f64 {
        let d = nu - self.center;
        self.amplitude * self.sigma / (d * d + self.sigma * self.sigma)
    }

    pub fn fwhm(&self) -> f64 {
        2.0 * self.sigma
    }

    pub fn peak(&self) -> f64 {
        self.amplitude / self.sigma
    }
}

/// Least-squares fit of a Lorentzian on a constant baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzFit {
    pub params: LorentzParams,
    pub offset: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub iterations: usize,
}

impl LorentzFit {
    pub fn fwhm(&self) -> f64 {
        self.params.fwhm()
    }
}

const MAX_ITER: usize = 500;

/// Model `b + A s / ((x - c)^2 + s^2)` and its gradient in `[A, s, c, b]`.
fn model(p: &Vector4<f64>, x: f64) -> (f64, Vector4<f64>) {
    let (a, s, c, b) = (p[0], p[1], p[2], p[3]);
    let d = x - c;
    let den = d * d + s * s;
    let f = b + a * s / den;
    let grad = Vector4::new(s / den, a * (d * d - s * s) / (den * den), 2.0 * a * s * d / (den * den), 1.0);
    (f, grad)
}

fn cost(p: &Vector4<f64>, x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let r = yi - model(p, xi).0;
            r * r
        })
        .sum()
}

fn initial_guess(x: &[f64], y: &[f64]) -> Vector4<f64> {
    let n = x.len();
    let edge = (n / 10).max(1);
    let base = (y[..edge].iter().sum::<f64>() + y[n - edge..].iter().sum::<f64>()) / (2 * edge) as f64;
    let (imax, imin) =
        (0..n).fold((0, 0), |(a, b), i| (if y[i] > y[a] { i } else { a }, if y[i] < y[b] { i } else { b }));
    let i0 = if (y[imax] - base).abs() >= (y[imin] - base).abs() { imax } else { imin };
    let height = y[i0] - base;
    let above = |i: usize| (y[i] - base) / height >= 0.5;
    let mut lo = i0;
    while lo > 0 && above(lo - 1) {
        lo -= 1;
    }
    let mut hi = i0;
    while hi + 1 < n && above(hi + 1) {
        hi += 1;
    }
    let step = (x[n - 1] - x[0]) / (n - 1) as f64;
    let s = (0.5 * (x[hi] - x[lo])).max(0.5 * step);
    Vector4::new(height * s, s, x[i0], base)
}

/// Levenberg-Marquardt fit of [`LorentzParams`] plus a baseline offset.
///
/// Abscissae and ordinates are rescaled to order one internally. Needs at
/// least ten points; the caller should cover two line widths or more.
pub fn lorentzian_fit(x: &[f64], y: &[f64]) -> Result<LorentzFit> {
    if x.len() != y.len() || x.len() < 10 {
        return Err(Error::InvalidParameter { name: "scan", reason: "need at least ten matching points" });
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter { name: "scan", reason: "abscissae must increase, values be finite" });
    }
    let x0 = 0.5 * (x[0] + x[x.len() - 1]);
    let xs = 0.5 * (x[x.len() - 1] - x[0]);
    let ys = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ys == 0.0 {
        return Err(Error::Domain("scan is identically zero"));
    }
    let u: Vec<f64> = x.iter().map(|v| (v - x0) / xs).collect();
    let w: Vec<f64> = y.iter().map(|v| v / ys).collect();

    let mut p = initial_guess(&u, &w);
    let mut c = cost(&p, &u, &w);
    let mut lambda = 1e-3;
    for iter in 1..=MAX_ITER {
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for (&ui, &wi) in u.iter().zip(&w) {
            let (f, g) = model(&p, ui);
            jtj += g * g.transpose();
            jtr += g * (wi - f);
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for k in 0..4 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(delta) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + delta;
            let tc = cost(&trial, &u, &w);
            if tc.is_finite() && tc <= c && trial[1] != 0.0 {
                let small = (0..4).all(|k| delta[k].abs() <= 1e-12 * (trial[k].abs() + 1e-3));
                p = trial;
                let dc = c - tc;
                c = tc;
                lambda = (lambda * 0.3).max(1e-15);
                accepted = true;
                if small || dc <= 1e-15 * c || c < 1e-28 {
                    return Ok(finish(&p, c, u.len(), x0, xs, ys, iter));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step exists at any damping: a minimum to working precision
            return Ok(finish(&p, c, u.len(), x0, xs, ys, iter));
        }
    }
    Err(Error::NonConvergence { what: "lorentzian fit", estimate: p[1].abs() * xs, change: lambda })
}

fn finish(p: &Vector4<f64>, c: f64, n: usize, x0: f64, xs: f64, ys: f64, iterations: usize) -> LorentzFit {
    let sigma = p[1].abs();
    // the model is even in sigma only when amplitude flips with it
    let amplitude = p[0] * p[1].signum() * xs * ys;
    LorentzFit {
        params: LorentzParams { amplitude, sigma: sigma * xs, center: x0 + p[2] * xs },
        offset: p[3] * ys,
        residual: libm::sqrt(c / n as f64) * ys,
        iterations,
    }
}
