//! Number-theoretic transform over the prime p = 2^64 − 2^32 + 1.
//!
//! p − 1 is divisible by 2^32, so power-of-two transforms up to length 2^32
//! exist. Cyclic convolutions on Z/NZ are computed as zero-padded linear
//! convolutions of power-of-two length and folded back modulo N.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub const P: u64 = 0xFFFF_FFFF_0000_0001;
const EPSILON: u64 = 0xFFFF_FFFF; // 2^64 mod p
const GENERATOR: u64 = 7;

#[inline]
fn reduce128(x: u128) -> u64 {
    let lo = x as u64;
    let hi = (x >> 64) as u64;
    let hi_hi = hi >> 32;
    let hi_lo = hi & EPSILON;
    let (mut t0, borrow) = lo.overflowing_sub(hi_hi);
    if borrow {
        t0 = t0.wrapping_sub(EPSILON);
    }
    let t1 = hi_lo * EPSILON;
    let (sum, carry) = t0.overflowing_add(t1);
    let r = sum.wrapping_add(EPSILON * carry as u64);
    if r >= P {
        r - P
    } else {
        r
    }
}

#[inline]
pub(crate) fn mul(a: u64, b: u64) -> u64 {
    reduce128(a as u128 * b as u128)
}

#[inline]
fn add(a: u64, b: u64) -> u64 {
    let (s, over) = a.overflowing_add(b);
    let (s2, over2) = s.overflowing_sub(P);
    if over || !over2 {
        s2
    } else {
        s
    }
}

#[inline]
fn sub(a: u64, b: u64) -> u64 {
    let (d, under) = a.overflowing_sub(b);
    if under {
        d.wrapping_add(P)
    } else {
        d
    }
}

pub(crate) fn pow(mut base: u64, mut exp: u64) -> u64 {
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base);
        }
        base = mul(base, base);
        exp >>= 1;
    }
    acc
}

fn inverse(a: u64) -> u64 {
    pow(a, P - 2)
}

fn bit_reverse_permute(a: &mut [u64]) {
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

/// In-place transform of a power-of-two length slice.
pub(crate) fn transform(a: &mut [u64], invert: bool) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    bit_reverse_permute(a);
    let mut len = 2;
    while len <= n {
        let mut w_len = pow(GENERATOR, (P - 1) / len as u64);
        if invert {
            w_len = inverse(w_len);
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = 1u64;
        for _ in 0..half {
            twiddles.push(w);
            w = mul(w, w_len);
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let t = mul(*v, tw);
                let x = *u;
                *u = add(x, t);
                *v = sub(x, t);
            }
        }
        len <<= 1;
    }
    if invert {
        let n_inv = inverse(n as u64);
        for x in a.iter_mut() {
            *x = mul(*x, n_inv);
        }
    }
}

fn to_field(x: i64) -> u64 {
    if x >= 0 {
        x as u64
    } else {
        P - x.unsigned_abs()
    }
}

fn from_field_signed(x: u64) -> i128 {
    if x > P / 2 {
        x as i128 - P as i128
    } else {
        x as i128
    }
}

/// Cyclic convolution over Z/nZ of several integer sequences of length `n`:
/// `out[w] = Σ_{x_1+…+x_k ≡ w} Π a_i[x_i]`.
///
/// Fails with [`Error::ExactOverflow`] when the ℓ¹ bound of the result does
/// not fit in the signed range of the field.
pub fn cyclic_convolve_many(inputs: &[&[i64]], n: usize) -> Result<Vec<i128>> {
    assert!(!inputs.is_empty());
    for a in inputs {
        assert_eq!(a.len(), n);
    }
    let mut bound: u128 = 1;
    for a in inputs {
        let l1: u128 = a.iter().map(|&x| x.unsigned_abs() as u128).sum();
        bound = bound.saturating_mul(l1);
    }
    if bound >= (P / 2) as u128 {
        return Err(Error::ExactOverflow { bound });
    }
    if inputs.len() == 1 {
        return Ok(inputs[0].iter().map(|&x| x as i128).collect());
    }
    let linear_len = inputs.len() * (n - 1) + 1;
    let size = linear_len.next_power_of_two();
    let mut acc: Option<Vec<u64>> = None;
    for a in inputs {
        let mut buf = vec![0u64; size];
        for (b, &x) in buf.iter_mut().zip(a.iter()) {
            *b = to_field(x);
        }
        transform(&mut buf, false);
        acc = Some(match acc {
            None => buf,
            Some(mut prev) => {
                for (p, b) in prev.iter_mut().zip(&buf) {
                    *p = mul(*p, *b);
                }
                prev
            }
        });
    }
    let mut spec = acc.unwrap();
    transform(&mut spec, true);
    let mut out = vec![0i128; n];
    for (i, &v) in spec.iter().take(linear_len).enumerate() {
        out[i % n] += from_field_signed(v);
    }
    Ok(out)
}

/// Cyclic convolution of nonnegative sequences returning unsigned counts.
pub fn cyclic_convolve_counts(inputs: &[&[u64]], n: usize) -> Result<Vec<u64>> {
    let signed: Vec<Vec<i64>> = inputs
        .iter()
        .map(|a| {
            a.iter()
                .map(|&x| i64::try_from(x).map_err(|_| Error::ExactOverflow { bound: x as u128 }))
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<_>>()?;
    let refs: Vec<&[i64]> = signed.iter().map(|v| v.as_slice()).collect();
    let out = cyclic_convolve_many(&refs, n)?;
    Ok(out.into_iter().map(|v| v as u64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn generator_has_full_two_adic_order() {
        let w = pow(GENERATOR, (P - 1) >> 32);
        assert_eq!(pow(w, 1 << 32), 1);
        assert_ne!(pow(w, 1 << 31), 1);
    }

    #[test]
    fn transform_round_trip() {
        let mut a: Vec<u64> = (0..64).map(|i| (i * i * 7919) as u64 % P).collect();
        let orig = a.clone();
        transform(&mut a, false);
        transform(&mut a, true);
        assert_eq!(a, orig);
    }

    #[test]
    fn small_cyclic_convolution_by_hand() {
        // (1 + x) * (1 + x^2) over Z/3Z = 1 + x + x^2 + x^3 -> (2, 1, 1)
        let a = [1i64, 1, 0];
        let b = [1i64, 0, 1];
        assert_eq!(cyclic_convolve_many(&[&a, &b], 3).unwrap(), [2, 1, 1]);
    }

    #[test]
    fn signed_values_recovered() {
        let a = [3i64, -2, 0, 5];
        let b = [-1i64, 4, 0, 0];
        let mut expect = [0i128; 4];
        for i in 0..4 {
            for j in 0..4 {
                expect[(i + j) % 4] += a[i] as i128 * b[j] as i128;
            }
        }
        assert_eq!(cyclic_convolve_many(&[&a, &b], 4).unwrap(), expect);
    }

    #[test]
    fn overflow_is_reported() {
        let big = [i64::MAX / 4, 0];
        assert!(matches!(
            cyclic_convolve_many(&[&big, &big], 2),
            Err(Error::ExactOverflow { .. })
        ));
    }

    proptest! {
        #[test]
        fn mul_matches_u128_reference(a in 0..P, b in 0..P) {
            prop_assert_eq!(mul(a, b) as u128, (a as u128 * b as u128) % P as u128);
        }

        #[test]
        fn add_sub_match_reference(a in 0..P, b in 0..P) {
            prop_assert_eq!(add(a, b) as u128, (a as u128 + b as u128) % P as u128);
            prop_assert_eq!(sub(a, b) as u128, (a as u128 + P as u128 - b as u128) % P as u128);
        }

        #[test]
        fn convolution_matches_double_loop(
            a in proptest::collection::vec(-50i64..50, 1..40),
            seed in any::<u64>(),
        ) {
            let n = a.len();
            let b: Vec<i64> = (0..n).map(|i| ((seed >> (i % 60)) & 7) as i64 - 3).collect();
            let mut expect = vec![0i128; n];
            for i in 0..n {
                for j in 0..n {
                    expect[(i + j) % n] += a[i] as i128 * b[j] as i128;
                }
            }
            prop_assert_eq!(cyclic_convolve_many(&[&a, &b], n).unwrap(), expect);
        }
    }
}
