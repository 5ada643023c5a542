use crate::C64;
use core::f64::consts::PI;

/// In-place radix-2 forward DFT, `X_k = sum_n x_n exp(-2 pi i k n / N)`.
///
/// # Panics
/// If the length is not a power of two.
pub fn fft_in_place(data: &mut [C64]) {
    transform(data, -1.0);
}

/// In-place inverse DFT including the `1/N` normalisation.
pub fn ifft_in_place(data: &mut [C64]) {
    transform(data, 1.0);
    let scale = 1.0 / data.len() as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

fn transform(data: &mut [C64], sign: f64) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = sign * 2.0 * PI / len as f64;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                // direct twiddles keep the error from accumulating along the butterfly
                let (s, c) = libm::sincos(step * k as f64);
                let w = C64::new(c, s);
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}
