//! Complex FFT of arbitrary length: iterative radix-2 for powers of two,
//! Bluestein's chirp reindexing otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

fn unit(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

fn bit_reverse_permute(a: &mut [Complex64]) {
    let n = a.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
}

/// Unnormalized in-place radix-2 transform; forward uses e^{-2πi jk/n}.
fn fft_pow2(a: &mut [Complex64], inverse: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    bit_reverse_permute(a);
    let sign = if inverse { 1.0 } else { -1.0 };
    // twiddles for the full length; stage `len` uses stride n/len
    let twiddles: Vec<Complex64> = (0..n / 2).map(|j| unit(sign * 2.0 * PI * j as f64 / n as f64)).collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (j, (u, v)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *v * twiddles[j * stride];
                let x = *u;
                *u = x + t;
                *v = x - t;
            }
        }
        len <<= 1;
    }
}

fn bluestein(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let two_n = 2 * n as u128;
    // w_m = e^{sign·πi m²/n}; m² is reduced mod 2n before the float conversion
    let chirp: Vec<Complex64> = (0..n)
        .map(|m| {
            let q = (m as u128 * m as u128) % two_n;
            unit(sign * PI * q as f64 / n as f64)
        })
        .collect();
    let size = (2 * n - 1).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); size];
    for (k, (x, w)) in input.iter().zip(&chirp).enumerate() {
        a[k] = x * w;
    }
    let mut b = vec![Complex64::new(0.0, 0.0); size];
    b[0] = chirp[0].conj();
    for m in 1..n {
        let c = chirp[m].conj();
        b[m] = c;
        b[size - m] = c;
    }
    fft_pow2(&mut a, false);
    fft_pow2(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_pow2(&mut a, true);
    let scale = 1.0 / size as f64;
    (0..n).map(|k| a[k] * scale * chirp[k]).collect()
}

/// Unnormalized DFT of any length: `out[k] = Σ_x a[x]·e(∓kx/n)`.
pub(crate) fn fft(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    if n.is_power_of_two() {
        let mut a = input.to_vec();
        fft_pow2(&mut a, inverse);
        a
    } else {
        bluestein(input, inverse)
    }
}
