use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;

use crate::error::{check_same_modulus, Error, Result};

/// A subset of Z/NZ stored as a bitset with its cardinality cached.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SetOnZN {
    modulus: usize,
    words: Vec<u64>,
    len: usize,
}

impl fmt::Debug for SetOnZN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SetOnZN(N={}, ", self.modulus)?;
        f.debug_set().entries(self.iter()).finish()?;
        write!(f, ")")
    }
}

pub(crate) fn check_modulus(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidModulus(n))
    }
}

impl SetOnZN {
    pub fn empty(modulus: usize) -> Result<Self> {
        check_modulus(modulus)?;
        Ok(SetOnZN { modulus, words: vec![0; modulus.div_ceil(64)], len: 0 })
    }

    pub fn full(modulus: usize) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        let tail = modulus % 64;
        if tail != 0 {
            *s.words.last_mut().unwrap() = (1u64 << tail) - 1;
        }
        s.len = modulus;
        Ok(s)
    }

    /// Builds a set from residues in `[0, N)`; duplicates are ignored.
    pub fn from_residues<I: IntoIterator<Item = u64>>(modulus: usize, residues: I) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        for r in residues {
            if r >= modulus as u64 {
                return Err(Error::ResidueOutOfRange { residue: r, modulus });
            }
            s.insert(r as usize);
        }
        Ok(s)
    }

    /// Builds a set from arbitrary integers reduced modulo `N`.
    pub fn from_integers<I: IntoIterator<Item = i64>>(modulus: usize, values: I) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        for v in values {
            s.insert(v.rem_euclid(modulus as i64) as usize);
        }
        Ok(s)
    }

    pub(crate) fn from_predicate(modulus: usize, mut pred: impl FnMut(usize) -> bool) -> Result<Self> {
        let mut s = Self::empty(modulus)?;
        for x in 0..modulus {
            if pred(x) {
                s.insert(x);
            }
        }
        Ok(s)
    }

    #[inline]
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Density |A|/N as an exact reduced fraction.
    pub fn density(&self) -> Ratio<u64> {
        Ratio::new(self.len as u64, self.modulus as u64)
    }

    pub fn density_f64(&self) -> f64 {
        self.len as f64 / self.modulus as f64
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        x < self.modulus && (self.words[x / 64] >> (x % 64)) & 1 == 1
    }

    /// Inserts `x mod N`; returns whether it was newly added.
    pub fn insert(&mut self, x: usize) -> bool {
        let x = x % self.modulus;
        let (w, b) = (x / 64, x % 64);
        let fresh = (self.words[w] >> b) & 1 == 0;
        if fresh {
            self.words[w] |= 1 << b;
            self.len += 1;
        }
        fresh
    }

    pub fn remove(&mut self, x: usize) -> bool {
        let x = x % self.modulus;
        let (w, b) = (x / 64, x % 64);
        let present = (self.words[w] >> b) & 1 == 1;
        if present {
            self.words[w] &= !(1 << b);
            self.len -= 1;
        }
        present
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut bits = w;
            core::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let t = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(i * 64 + t)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// 0/1 indicator as integers.
    pub fn indicator(&self) -> Vec<u64> {
        let mut v = vec![0u64; self.modulus];
        for x in self.iter() {
            v[x] = 1;
        }
        v
    }

    /// A + t.
    pub fn translate(&self, t: i64) -> SetOnZN {
        let n = self.modulus as i64;
        let shift = t.rem_euclid(n) as usize;
        let mut out = SetOnZN { modulus: self.modulus, words: vec![0; self.words.len()], len: 0 };
        for x in self.iter() {
            out.insert((x + shift) % self.modulus);
        }
        out
    }

    /// −A.
    pub fn negate(&self) -> SetOnZN {
        let mut out = SetOnZN { modulus: self.modulus, words: vec![0; self.words.len()], len: 0 };
        for x in self.iter() {
            out.insert((self.modulus - x) % self.modulus);
        }
        out
    }

    fn zip_words(&self, other: &SetOnZN, op: impl Fn(u64, u64) -> u64) -> Result<SetOnZN> {
        check_same_modulus(self.modulus, other.modulus)?;
        let words: Vec<u64> = self.words.iter().zip(&other.words).map(|(&a, &b)| op(a, b)).collect();
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(SetOnZN { modulus: self.modulus, words, len })
    }

    pub fn intersection(&self, other: &SetOnZN) -> Result<SetOnZN> {
        self.zip_words(other, |a, b| a & b)
    }

    pub fn union(&self, other: &SetOnZN) -> Result<SetOnZN> {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &SetOnZN) -> Result<SetOnZN> {
        self.zip_words(other, |a, b| a & !b)
    }

    pub fn intersection_len(&self, other: &SetOnZN) -> Result<usize> {
        check_same_modulus(self.modulus, other.modulus)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum())
    }

    pub fn is_subset(&self, other: &SetOnZN) -> bool {
        self.modulus == other.modulus && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|x| self.contains((self.modulus - x) % self.modulus))
    }

    /// A + B as a set, by shifting bitsets.
    pub fn sumset(&self, other: &SetOnZN) -> Result<SetOnZN> {
        check_same_modulus(self.modulus, other.modulus)?;
        let (small, large) = if self.len <= other.len { (self, other) } else { (other, self) };
        let mut out = SetOnZN::empty(self.modulus)?;
        for a in small.iter() {
            let shifted = large.translate(a as i64);
            for (o, s) in out.words.iter_mut().zip(&shifted.words) {
                *o |= s;
            }
        }
        out.len = out.words.iter().map(|w| w.count_ones() as usize).sum();
        Ok(out)
    }

    /// A − A.
    pub fn difference_set(&self) -> SetOnZN {
        self.sumset(&self.negate()).expect("same modulus")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_tracks_popcount() {
        let mut s = SetOnZN::empty(130).unwrap();
        assert!(s.insert(0));
        assert!(s.insert(129));
        assert!(!s.insert(129));
        assert!(s.insert(64));
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_vec(), [0, 64, 129]);
        assert!(s.remove(64));
        assert_eq!(s.len(), 2);
        assert_eq!(s.density(), Ratio::new(2, 130));
    }

    #[test]
    fn full_set_has_no_stray_bits() {
        let s = SetOnZN::full(70).unwrap();
        assert_eq!(s.len(), 70);
        assert_eq!(s.iter().count(), 70);
        assert_eq!(s.negate(), s);
    }

    #[test]
    fn rejects_tiny_modulus_and_bad_residues() {
        assert_eq!(SetOnZN::empty(1), Err(Error::InvalidModulus(1)));
        assert!(matches!(
            SetOnZN::from_residues(5, [7]),
            Err(Error::ResidueOutOfRange { residue: 7, modulus: 5 })
        ));
    }

    #[test]
    fn sumset_matches_pairwise_sums() {
        let a = SetOnZN::from_residues(20, [0, 3, 7]).unwrap();
        let b = SetOnZN::from_residues(20, [1, 15]).unwrap();
        let mut expected = SetOnZN::empty(20).unwrap();
        for x in a.iter() {
            for y in b.iter() {
                expected.insert((x + y) % 20);
            }
        }
        assert_eq!(a.sumset(&b).unwrap(), expected);
    }

    #[test]
    fn translate_and_negate() {
        let a = SetOnZN::from_residues(10, [1, 2]).unwrap();
        assert_eq!(a.translate(-3).to_vec(), [8, 9]);
        assert_eq!(a.negate().to_vec(), [8, 9]);
        assert!(a.difference_set().is_symmetric());
    }
}
