use alloc::vec::Vec;

use num_complex::Complex64;

use super::{fft, ntt};
use crate::error::{check_same_modulus, Error, Result};
use crate::set::SetOnZN;

fn indicator_i64(set: &SetOnZN) -> Vec<i64> {
    set.indicator().into_iter().map(|v| v as i64).collect()
}

fn to_counts(v: Vec<i128>) -> Vec<u64> {
    v.into_iter().map(|x| x as u64).collect()
}

/// r(w) = #{(x,y,z) ∈ A×B×C : x+y+z = w}, exactly.
pub fn representation_counts(a: &SetOnZN, b: &SetOnZN, c: &SetOnZN) -> Result<Vec<u64>> {
    check_same_modulus(a.modulus(), b.modulus())?;
    check_same_modulus(a.modulus(), c.modulus())?;
    let (ia, ib, ic) = (indicator_i64(a), indicator_i64(b), indicator_i64(c));
    Ok(to_counts(ntt::cyclic_convolve_many(&[&ia, &ib, &ic], a.modulus())?))
}

/// #{(x,y) ∈ A×B : x+y = w}; equals N·(1_A∗1_B)(w).
pub fn pair_counts(a: &SetOnZN, b: &SetOnZN) -> Result<Vec<u64>> {
    check_same_modulus(a.modulus(), b.modulus())?;
    let (ia, ib) = (indicator_i64(a), indicator_i64(b));
    Ok(to_counts(ntt::cyclic_convolve_many(&[&ia, &ib], a.modulus())?))
}

/// o(x) = |L ∩ (S + x)| for every x.
pub fn correlation_counts(l: &SetOnZN, s: &SetOnZN) -> Result<Vec<u64>> {
    pair_counts(l, &s.negate())
}

/// The same counts as [`representation_counts`] through the floating FFT,
/// rounded and checked to lie within 0.25 of an integer.
pub fn representation_counts_float(a: &SetOnZN, b: &SetOnZN, c: &SetOnZN) -> Result<Vec<u64>> {
    check_same_modulus(a.modulus(), b.modulus())?;
    check_same_modulus(a.modulus(), c.modulus())?;
    let n = a.modulus();
    let hat = |s: &SetOnZN| {
        let v: Vec<Complex64> = s.indicator().into_iter().map(|x| Complex64::new(x as f64, 0.0)).collect();
        fft::fft(&v, false)
    };
    let (ha, hb, hc) = (hat(a), hat(b), hat(c));
    let prod: Vec<Complex64> = (0..n).map(|k| ha[k] * hb[k] * hc[k]).collect();
    let back = fft::fft(&prod, true);
    back.iter()
        .enumerate()
        .map(|(i, v)| {
            let value = v.re / n as f64;
            let r = libm::round(value);
            if (value - r).abs() > 0.25 || r < 0.0 {
                Err(Error::InexactRecovery { index: i, value })
            } else {
                Ok(r as u64)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_examples() {
        let g = SetOnZN::full(5).unwrap();
        assert_eq!(representation_counts(&g, &g, &g).unwrap(), [25; 5]);
        let z = SetOnZN::from_residues(7, [0]).unwrap();
        assert_eq!(representation_counts(&z, &z, &z).unwrap(), [1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn interval_triple_matches_triple_loop() {
        let a = SetOnZN::from_residues(32, 0..5).unwrap();
        let r = representation_counts(&a, &a, &a).unwrap();
        let mut expect = [0u64; 32];
        for x in 0..5 {
            for y in 0..5 {
                for z in 0..5 {
                    expect[(x + y + z) % 32] += 1;
                }
            }
        }
        assert_eq!(r, expect);
        assert_eq!(r[0], 1);
        assert_eq!(r[6], 19);
        assert!(r[13..].iter().all(|&v| v == 0));
        assert_eq!(representation_counts_float(&a, &a, &a).unwrap(), expect);
    }

    #[test]
    fn correlation_counts_overlaps() {
        let l = SetOnZN::from_residues(10, [0, 1, 2, 5]).unwrap();
        let s = SetOnZN::from_residues(10, [0, 3]).unwrap();
        let o = correlation_counts(&l, &s).unwrap();
        for (x, &count) in o.iter().enumerate() {
            let direct = l.intersection_len(&s.translate(x as i64)).unwrap() as u64;
            assert_eq!(count, direct);
        }
    }
}
