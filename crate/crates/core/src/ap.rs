use alloc::vec::Vec;

use crate::set::SetOnZN;

/// The progression `start, start + step, …, start + (length − 1)·step` in Z/NZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ap {
    pub start: usize,
    pub step: usize,
    pub length: usize,
}

impl Ap {
    pub fn singleton(x: usize) -> Ap {
        Ap { start: x, step: 1, length: 1 }
    }

    pub fn empty() -> Ap {
        Ap { start: 0, step: 1, length: 0 }
    }

    pub fn elements(&self, modulus: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.length);
        let mut x = self.start % modulus;
        let step = self.step % modulus;
        for _ in 0..self.length {
            out.push(x);
            x = (x + step) % modulus;
        }
        out
    }

    /// The same progression shifted by `t`.
    pub fn translate(&self, t: i64, modulus: usize) -> Ap {
        let shift = t.rem_euclid(modulus as i64) as usize;
        Ap { start: (self.start + shift) % modulus, ..*self }
    }

    /// Whether the terms are pairwise distinct modulo `N`.
    pub fn is_proper(&self, modulus: usize) -> bool {
        self.length <= 1 || self.length <= modulus / gcd(self.step % modulus, modulus)
    }

    pub fn is_inside(&self, set: &SetOnZN) -> bool {
        self.elements(set.modulus()).into_iter().all(|x| set.contains(x))
    }
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Additive order of `t` in Z/NZ.
pub(crate) fn order(t: usize, modulus: usize) -> usize {
    modulus / gcd(t % modulus, modulus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elements_wrap_around() {
        let ap = Ap { start: 10, step: 3, length: 4 };
        assert_eq!(ap.elements(12), [10, 1, 4, 7]);
        assert_eq!(ap.translate(-11, 12).elements(12), [11, 2, 5, 8]);
        assert!(ap.is_proper(12));
        assert!(!Ap { start: 0, step: 4, length: 4 }.is_proper(12));
        assert_eq!(order(4, 12), 3);
        assert_eq!(order(0, 12), 1);
    }
}
