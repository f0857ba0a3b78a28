//! Seeded set families and the Freiman embedding of integer sets.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::Ratio;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bohr::BohrSet;
use crate::error::{Error, Result};
use crate::set::SetOnZN;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("density must lie in (0,1], got {alpha}")))
    }
}

/// Uniform draw in [0, 1) with 53 random bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Each residue independently with probability α.
pub fn random_set(modulus: usize, alpha: f64, seed: u64) -> Result<SetOnZN> {
    check_alpha(alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SetOnZN::from_predicate(modulus, |_| unit(&mut rng) < alpha)
}

/// {0, …, m − 1}.
pub fn interval_set(modulus: usize, m: usize) -> Result<SetOnZN> {
    if m > modulus {
        return Err(Error::InvalidParameter(alloc::format!("interval length {m} exceeds N = {modulus}")));
    }
    SetOnZN::from_predicate(modulus, |x| x < m)
}

/// Each member of B independently with probability α.
pub fn bohr_sample(b: &BohrSet, alpha: f64, seed: u64) -> Result<SetOnZN> {
    check_alpha(alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SetOnZN::empty(b.modulus())?;
    for x in b.members().iter() {
        if unit(&mut rng) < alpha {
            out.insert(x);
        }
    }
    Ok(out)
}

/// Primes p ≤ n by the sieve of Eratosthenes.
pub fn primes_upto(n: usize) -> Vec<usize> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        out.push(p);
        let mut q = p * p;
        while q <= n {
            composite[q] = true;
            q += p;
        }
    }
    out
}

/// π(n)/n.
pub fn density_of_primes(n: usize) -> Result<Ratio<u64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(alloc::format!("prime density needs n ≥ 2, got {n}")));
    }
    Ok(Ratio::new(primes_upto(n).len() as u64, n as u64))
}

/// π(A) ⊆ Z/6nZ for A ⊆ {1, …, n}.
///
/// Three-fold sums lie in [3, 3n], which is shorter than 6n, so equal sums
/// modulo 6n are equal in Z.
pub fn freiman_embed(a: &[u64], n: u64) -> Result<SetOnZN> {
    if n == 0 {
        return Err(Error::InvalidParameter("embedding needs n ≥ 1".into()));
    }
    if let Some(&x) = a.iter().find(|&&x| x == 0 || x > n) {
        return Err(Error::ResidueOutOfRange { residue: x, modulus: n as usize });
    }
    SetOnZN::from_residues(6 * n as usize, a.iter().copied())
}

/// The embedding of the primes up to n.
pub fn embedded_primes(n: usize) -> Result<SetOnZN> {
    let p: Vec<u64> = primes_upto(n).into_iter().map(|p| p as u64).collect();
    freiman_embed(&p, n as u64)
}

/// Checks a₁+a₂+a₃ = a₄+a₅+a₆ in Z ⇔ the same modulo 6n for all a_i ∈ A.
///
/// Equivalent to: distinct integer three-fold sums have distinct residues,
/// which is what is checked over the full table of sums.
pub fn verify_freiman(a: &[u64], n: u64) -> Result<bool> {
    let image = freiman_embed(a, n)?;
    let m = image.modulus() as u64;
    let mut seen: BTreeMap<u64, u64> = BTreeMap::new();
    for &x in a {
        for &y in a {
            for &z in a {
                let s = x + y + z;
                match seen.insert(s % m, s) {
                    Some(prev) if prev != s => return Ok(false),
                    _ => {}
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(random_set(50, 1.0, 3).unwrap().len(), 50);
        assert_eq!(interval_set(50, 1).unwrap().to_vec(), [0]);
        assert_eq!(density_of_primes(10).unwrap(), Ratio::new(4, 10));
        assert_eq!(density_of_primes(30).unwrap(), Ratio::new(10, 30));
        assert_eq!(primes_upto(10_000).len(), 1229);
        let e = freiman_embed(&[9], 10).unwrap();
        assert_eq!(e.modulus(), 60);
        assert_eq!(e.sumset(&e).unwrap().sumset(&e).unwrap().to_vec(), [27]);
        assert!(freiman_embed(&[11], 10).is_err());
        assert!(freiman_embed(&[0], 10).is_err());
    }

    #[test]
    fn reproducible() {
        assert_eq!(random_set(1024, 0.3, 7).unwrap(), random_set(1024, 0.3, 7).unwrap());
        assert_ne!(random_set(1024, 0.3, 7).unwrap(), random_set(1024, 0.3, 8).unwrap());
    }

    #[test]
    fn sum_table_agrees_with_six_tuples() {
        let a: Vec<u64> = primes_upto(30).into_iter().map(|p| p as u64).collect();
        let m = 180;
        let mut ok = true;
        for &a1 in &a {
            for &a2 in &a {
                for &a3 in &a {
                    for &a4 in &a {
                        for &a5 in &a {
                            for &a6 in &a {
                                let (l, r) = (a1 + a2 + a3, a4 + a5 + a6);
                                ok &= (l == r) == (l % m == r % m);
                            }
                        }
                    }
                }
            }
        }
        assert!(ok);
        assert!(verify_freiman(&a, 30).unwrap());
    }
}
