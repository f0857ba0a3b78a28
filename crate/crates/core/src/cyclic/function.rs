use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use super::{fft, ntt};
use crate::error::{check_same_modulus, Error, Result};
use crate::set::{check_modulus, SetOnZN};

/// A complex-valued function on Z/NZ.
///
/// When `exact_power` is `Some(k)`, every value times `N^k` is an integer and
/// convolutions of two exact functions are computed with the integer
/// transform instead of the floating one.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    modulus: usize,
    values: Vec<Complex64>,
    exact_power: Option<u32>,
}

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

impl GroupFunction {
    pub fn new(modulus: usize, values: Vec<Complex64>) -> Result<Self> {
        check_modulus(modulus)?;
        if values.len() != modulus {
            return Err(Error::InvalidParameter(alloc::format!(
                "expected {modulus} values, got {}",
                values.len()
            )));
        }
        Ok(GroupFunction { modulus, values, exact_power: None })
    }

    pub fn from_real(modulus: usize, values: &[f64]) -> Result<Self> {
        Self::new(modulus, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Values `numerators[x] / N^power`, flagged exact.
    pub fn from_exact(modulus: usize, numerators: &[i64], power: u32) -> Result<Self> {
        let scale = libm::pow(modulus as f64, -(power as f64));
        let mut f = Self::new(modulus, numerators.iter().map(|&v| Complex64::new(v as f64 * scale, 0.0)).collect())?;
        f.exact_power = Some(power);
        Ok(f)
    }

    pub fn zero(modulus: usize) -> Result<Self> {
        Self::from_exact(modulus, &vec![0; modulus], 0)
    }

    /// 1_A.
    pub fn indicator(set: &SetOnZN) -> Self {
        let ind: Vec<i64> = set.indicator().into_iter().map(|v| v as i64).collect();
        Self::from_exact(set.modulus(), &ind, 0).expect("valid modulus")
    }

    /// μ_A = (N/|A|)·1_A.
    pub fn measure(set: &SetOnZN) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet("measure of empty set"));
        }
        let n = set.modulus();
        let h = n as f64 / set.len() as f64;
        let mut values = vec![ZERO; n];
        for x in set.iter() {
            values[x] = Complex64::new(h, 0.0);
        }
        let mut f = Self::new(n, values)?;
        // μ_A is exact when |A| divides N
        if n.is_multiple_of(set.len()) {
            f.exact_power = Some(0);
        }
        Ok(f)
    }

    #[inline]
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, x: usize) -> Complex64 {
        self.values[x % self.modulus]
    }

    pub fn exact_power(&self) -> Option<u32> {
        self.exact_power
    }

    pub fn is_exact(&self) -> bool {
        self.exact_power.is_some()
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// Integer numerators `f(x)·N^k` for an exact function.
    pub fn exact_numerators(&self) -> Option<Vec<i64>> {
        let k = self.exact_power?;
        let scale = libm::pow(self.modulus as f64, k as f64);
        Some(self.values.iter().map(|v| libm::round(v.re * scale) as i64).collect())
    }

    /// f̂(k) = (1/N) Σ_x f(x) e(−kx/N).
    pub fn dft(&self) -> GroupFunction {
        let scale = 1.0 / self.modulus as f64;
        let values = fft::fft(&self.values, false).into_iter().map(|v| v * scale).collect();
        GroupFunction { modulus: self.modulus, values, exact_power: None }
    }

    /// Inverse of [`dft`](Self::dft): f(x) = Σ_k f̂(k) e(kx/N).
    pub fn idft(&self) -> GroupFunction {
        let values = fft::fft(&self.values, true);
        GroupFunction { modulus: self.modulus, values, exact_power: None }
    }

    /// f∗g(x) = E_y f(y)g(x−y).
    pub fn convolve(&self, other: &GroupFunction) -> Result<GroupFunction> {
        check_same_modulus(self.modulus, other.modulus)?;
        if let (Some(a), Some(b)) = (self.exact_power, other.exact_power) {
            let fa = self.exact_numerators().unwrap();
            let fb = other.exact_numerators().unwrap();
            if let Ok(out) = ntt::cyclic_convolve_many(&[&fa, &fb], self.modulus) {
                if let Ok(nums) = out.into_iter().map(i64::try_from).collect::<core::result::Result<Vec<i64>, _>>() {
                    return Self::from_exact(self.modulus, &nums, a + b + 1);
                }
            }
        }
        let fh = fft::fft(&self.values, false);
        let gh = fft::fft(&other.values, false);
        let prod: Vec<Complex64> = fh.iter().zip(&gh).map(|(x, y)| x * y).collect();
        let scale = 1.0 / (self.modulus as f64 * self.modulus as f64);
        let values = fft::fft(&prod, true).into_iter().map(|v| v * scale).collect();
        Ok(GroupFunction { modulus: self.modulus, values, exact_power: None })
    }

    /// f^{(ℓ)}: the ℓ-fold self-convolution, via one transform and a pointwise power.
    pub fn power_convolve(&self, ell: u32) -> Result<GroupFunction> {
        if ell == 0 {
            return Err(Error::InvalidParameter("power_convolve needs ℓ ≥ 1".into()));
        }
        if ell == 1 {
            return Ok(self.clone());
        }
        let hat = self.dft();
        let powered: Vec<Complex64> = hat.values.iter().map(|v| v.powu(ell)).collect();
        Ok(GroupFunction { modulus: self.modulus, values: powered, exact_power: None }.idft())
    }

    /// ‖f‖_{L^p} = (E|f|^p)^{1/p}; `p = f64::INFINITY` gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_of(self.values.iter().map(|v| v.norm()), self.modulus, p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// ⟨f,g⟩ = E f·conj(g).
    pub fn inner_product(&self, other: &GroupFunction) -> Result<Complex64> {
        check_same_modulus(self.modulus, other.modulus)?;
        let s: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(s / self.modulus as f64)
    }

    /// τ_x f(u) = f(u + x).
    pub fn translate(&self, x: i64) -> GroupFunction {
        let n = self.modulus;
        let shift = x.rem_euclid(n as i64) as usize;
        let values = (0..n).map(|u| self.values[(u + shift) % n]).collect();
        GroupFunction { modulus: n, values, exact_power: self.exact_power }
    }

    /// u ↦ f(−u).
    pub fn reflect(&self) -> GroupFunction {
        let n = self.modulus;
        let values = (0..n).map(|u| self.values[(n - u) % n]).collect();
        GroupFunction { modulus: n, values, exact_power: self.exact_power }
    }

    pub fn sub(&self, other: &GroupFunction) -> Result<GroupFunction> {
        check_same_modulus(self.modulus, other.modulus)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        let exact_power = match (self.exact_power, other.exact_power) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        Ok(GroupFunction { modulus: self.modulus, values, exact_power })
    }

    pub fn scale(&self, c: f64) -> GroupFunction {
        GroupFunction {
            modulus: self.modulus,
            values: self.values.iter().map(|v| v * c).collect(),
            exact_power: None,
        }
    }

    /// Multiplies the value at `k` by e(kx/N); this is the transform of τ_x f.
    pub fn modulate(&self, x: i64) -> GroupFunction {
        let n = self.modulus as i64;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let phase = ((k as i64 * x).rem_euclid(n)) as f64 / n as f64;
                v * Complex64::new(libm::cos(2.0 * PI * phase), libm::sin(2.0 * PI * phase))
            })
            .collect();
        GroupFunction { modulus: self.modulus, values, exact_power: None }
    }
}

/// (E|v|^p)^{1/p} computed with max-scaling to keep large p stable.
pub(crate) fn lp_norm_of(abs: impl Iterator<Item = f64> + Clone, n: usize, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(alloc::format!("L^p norm needs p ≥ 1, got {p}")));
    }
    let max = abs.clone().fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 {
        return Ok(max);
    }
    let sum: f64 = abs.map(|a| libm::pow(a / max, p)).sum();
    Ok(max * libm::pow(sum / n as f64, 1.0 / p))
}

/// f = 1_A − (|A|/|B|)·1_B, for A ⊆ B.
pub fn balanced_function(a: &SetOnZN, b: &SetOnZN) -> Result<GroupFunction> {
    check_same_modulus(a.modulus(), b.modulus())?;
    if !a.is_subset(b) {
        return Err(Error::NotSubset("balanced function needs A ⊆ B"));
    }
    let n = b.modulus();
    if b.is_empty() {
        return GroupFunction::zero(n);
    }
    // numerators over |B|: |B|·1_A − |A|·1_B
    let (la, lb) = (a.len() as i64, b.len() as i64);
    let mut nums = vec![0i64; n];
    for x in b.iter() {
        nums[x] = if a.contains(x) { lb - la } else { -la };
    }
    let values = nums.iter().map(|&v| Complex64::new(v as f64 / lb as f64, 0.0)).collect();
    let mut f = GroupFunction::new(n, values)?;
    if n as i64 % lb == 0 {
        f.exact_power = Some(0);
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[Complex64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - Complex64::new(*y, 0.0)).norm() < tol)
    }

    #[test]
    fn dft_examples() {
        let g = GroupFunction::indicator(&SetOnZN::full(4).unwrap());
        assert!(close(g.dft().values(), &[1.0, 0.0, 0.0, 0.0], 1e-12));

        let point = GroupFunction::measure(&SetOnZN::from_residues(6, [0]).unwrap()).unwrap();
        assert!(close(point.dft().values(), &[1.0; 6], 1e-12));

        let two = GroupFunction::measure(&SetOnZN::from_residues(6, [0, 3]).unwrap()).unwrap();
        assert!(close(two.dft().values(), &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0], 1e-12));
    }

    #[test]
    fn round_trip() {
        let f = GroupFunction::from_real(7, &[1.0, -2.0, 0.5, 3.0, 0.0, 0.0, 4.0]).unwrap();
        let back = f.dft().idft();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn convolution_examples() {
        let g = GroupFunction::indicator(&SetOnZN::full(5).unwrap());
        let gg = g.convolve(&g).unwrap();
        assert!(close(gg.values(), &[1.0; 5], 1e-12));
        assert_eq!(gg.exact_power(), Some(1));

        let a = GroupFunction::indicator(&SetOnZN::from_residues(4, [0]).unwrap());
        let b = GroupFunction::indicator(&SetOnZN::from_residues(4, [1]).unwrap());
        assert!(close(a.convolve(&b).unwrap().values(), &[0.0, 0.25, 0.0, 0.0], 1e-15));

        let a = GroupFunction::indicator(&SetOnZN::from_residues(8, [0, 1]).unwrap());
        let b = GroupFunction::indicator(&SetOnZN::from_residues(8, [0, 2]).unwrap());
        let c = a.convolve(&b).unwrap();
        assert!(close(c.values(), &[0.125, 0.125, 0.125, 0.125, 0.0, 0.0, 0.0, 0.0], 1e-15));
        assert_eq!(c.exact_numerators().unwrap(), [1, 1, 1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn power_convolve_matches_repeated_convolution() {
        // μ_{0,1} on Z/4Z: μ∗μ(x) = E_y μ(y)μ(x−y) = (1/4)·4·#{(y,z): y+z=x} = (1, 2, 1, 0)
        let mu = GroupFunction::measure(&SetOnZN::from_residues(4, [0, 1]).unwrap()).unwrap();
        let two = mu.power_convolve(2).unwrap();
        assert!(close(two.values(), &[1.0, 2.0, 1.0, 0.0], 1e-12));
        let three = mu.power_convolve(3).unwrap();
        let direct = two.convolve(&mu).unwrap();
        for (a, b) in three.values().iter().zip(direct.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(mu.power_convolve(1).unwrap(), mu);
    }

    #[test]
    fn norms() {
        let g = GroupFunction::indicator(&SetOnZN::full(9).unwrap());
        for p in [1.0, 2.0, 7.5, f64::INFINITY] {
            assert!((g.lp_norm(p).unwrap() - 1.0).abs() < 1e-12);
        }
        let mu = GroupFunction::measure(&SetOnZN::from_residues(9, [2, 5]).unwrap()).unwrap();
        assert!((mu.lp_norm(1.0).unwrap() - 1.0).abs() < 1e-12);
        let f = GroupFunction::from_real(4, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((f.lp_norm(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(f.lp_norm(0.5).is_err());
    }

    #[test]
    fn balanced_examples() {
        let b = SetOnZN::full(4).unwrap();
        let a = SetOnZN::from_residues(4, [0, 1]).unwrap();
        let f = balanced_function(&a, &b).unwrap();
        assert!(close(f.values(), &[0.5, 0.5, -0.5, -0.5], 1e-15));
        assert!(close(balanced_function(&b, &b).unwrap().values(), &[0.0; 4], 0.0 + 1e-15));
        let empty = SetOnZN::empty(4).unwrap();
        assert!(close(balanced_function(&empty, &b).unwrap().values(), &[0.0; 4], 1e-15));
        assert!(balanced_function(&b, &a).is_err());
    }

    #[test]
    fn translate_matches_modulated_transform() {
        let f = GroupFunction::from_real(10, &[1.0, 2.0, 0.0, -1.0, 3.0, 0.0, 0.0, 1.0, 0.0, 5.0]).unwrap();
        for x in [-3i64, 0, 4, 17] {
            let lhs = f.translate(x).dft();
            let rhs = f.dft().modulate(x);
            for (a, b) in lhs.values().iter().zip(rhs.values()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
