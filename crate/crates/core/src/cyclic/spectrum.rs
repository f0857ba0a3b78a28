use alloc::vec::Vec;

use num_complex::Complex64;

use super::function::GroupFunction;
use crate::error::{Error, Result};

const RELATIVE_TOLERANCE: f64 = 1e-9;

/// Spec_η(f) = {k : |f̂(k)| ≥ η‖f‖_{L¹}} with the coefficients attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub threshold: f64,
    pub entries: Vec<(usize, Complex64)>,
    /// Set when f vanishes identically; the spectrum is then empty.
    pub zero_function: bool,
}

impl Spectrum {
    pub fn frequencies(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.entries.iter().any(|e| e.0 == k)
    }
}

pub fn spectrum(f: &GroupFunction, eta: f64) -> Result<Spectrum> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("spectrum threshold must lie in (0,1], got {eta}")));
    }
    let l1 = f.lp_norm(1.0)?;
    if l1 == 0.0 {
        return Ok(Spectrum { threshold: eta, entries: Vec::new(), zero_function: true });
    }
    let cut = eta * l1 * (1.0 - RELATIVE_TOLERANCE);
    let hat = f.dft();
    let entries = hat.values().iter().enumerate().filter(|(_, v)| v.norm() >= cut).map(|(k, v)| (k, *v)).collect();
    Ok(Spectrum { threshold: eta, entries, zero_function: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::set::SetOnZN;

    #[test]
    fn examples() {
        let g = GroupFunction::measure(&SetOnZN::full(8).unwrap()).unwrap();
        assert_eq!(spectrum(&g, 0.3).unwrap().frequencies(), [0]);
        let point = GroupFunction::measure(&SetOnZN::from_residues(8, [0]).unwrap()).unwrap();
        assert_eq!(spectrum(&point, 1.0).unwrap().len(), 8);
        let two = GroupFunction::measure(&SetOnZN::from_residues(6, [0, 3]).unwrap()).unwrap();
        assert_eq!(spectrum(&two, 0.5).unwrap().frequencies(), [0, 2, 4]);
        let zero = GroupFunction::zero(6).unwrap();
        let s = spectrum(&zero, 0.5).unwrap();
        assert!(s.zero_function && s.is_empty());
        assert!(spectrum(&two, 0.0).is_err());
    }
}
