//! Bohr sets B(Γ, δ) = {x : |1 − e(kx/N)| ≤ δ for all k ∈ Γ} in Z/NZ.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::ap::{order, Ap};
use crate::cyclic::GroupFunction;
use crate::error::{Error, Result};
use crate::policy::Policy;
use crate::set::{check_modulus, SetOnZN};

pub const DEFAULT_GUARD: f64 = 1e-12;

/// Bohr norm table: `norms[x] = max_{k∈Γ} 2|sin(πkx/N)|`.
fn bohr_norms(modulus: usize, frequencies: &[usize]) -> Vec<f64> {
    let sine: Vec<f64> = (0..modulus).map(|j| 2.0 * libm::sin(PI * j as f64 / modulus as f64).abs()).collect();
    let mut norms = vec![0.0f64; modulus];
    for &k in frequencies {
        let mut pos = 0usize;
        for n in norms.iter_mut() {
            let s = sine[pos];
            if s > *n {
                *n = s;
            }
            pos += k;
            if pos >= modulus {
                pos -= modulus;
            }
        }
    }
    norms
}

#[derive(Debug, Clone)]
pub struct BohrSet {
    modulus: usize,
    frequencies: Vec<usize>,
    radius: f64,
    guard: f64,
    clamped: bool,
    norms: Arc<[f64]>,
    members: SetOnZN,
    boundary_hits: usize,
}

impl PartialEq for BohrSet {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
            && self.frequencies == other.frequencies
            && self.radius == other.radius
            && self.members == other.members
    }
}

impl BohrSet {
    /// B(Γ, δ) with the default boundary guard.
    pub fn new(modulus: usize, frequencies: &[usize], radius: f64) -> Result<Self> {
        Self::with_guard(modulus, frequencies, radius, DEFAULT_GUARD)
    }

    pub fn with_guard(modulus: usize, frequencies: &[usize], radius: f64, guard: f64) -> Result<Self> {
        check_modulus(modulus)?;
        if frequencies.is_empty() {
            return Err(Error::InvalidParameter("empty frequency set; use {0} for the whole group".into()));
        }
        if !(radius > 0.0 && radius <= 2.0) {
            return Err(Error::InvalidParameter(alloc::format!("Bohr radius must lie in (0,2], got {radius}")));
        }
        let mut gamma: Vec<usize> = frequencies.iter().map(|&k| k % modulus).collect();
        gamma.sort_unstable();
        gamma.dedup();
        let norms: Arc<[f64]> = bohr_norms(modulus, &gamma).into();
        Ok(Self::from_norms(modulus, gamma, radius, guard, false, norms))
    }

    fn from_norms(modulus: usize, frequencies: Vec<usize>, radius: f64, guard: f64, clamped: bool, norms: Arc<[f64]>) -> Self {
        let mut members = SetOnZN::empty(modulus).expect("valid modulus");
        let mut boundary_hits = 0;
        for (x, &n) in norms.iter().enumerate() {
            if n <= radius + guard {
                members.insert(x);
            }
            if (n - radius).abs() <= guard {
                boundary_hits += 1;
            }
        }
        BohrSet { modulus, frequencies, radius, guard, clamped, norms, members, boundary_hits }
    }

    /// B_ρ = B(Γ, ρδ); radii above 2 are clamped and flagged.
    pub fn dilate(&self, rho: f64) -> Result<BohrSet> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("dilation factor must be positive, got {rho}")));
        }
        let r = rho * self.radius;
        let (radius, clamped) = if r > 2.0 { (2.0, true) } else { (r, false) };
        Ok(Self::from_norms(self.modulus, self.frequencies.clone(), radius, self.guard, clamped, self.norms.clone()))
    }

    /// B(Γ ∪ Λ, δ') for δ' ≤ δ.
    pub fn join(&self, extra: &[usize], radius: f64) -> Result<BohrSet> {
        if radius > self.radius {
            return Err(Error::InvalidParameter(alloc::format!(
                "join radius {radius} exceeds the current radius {}",
                self.radius
            )));
        }
        let mut gamma = self.frequencies.clone();
        gamma.extend(extra.iter().map(|&k| k % self.modulus));
        gamma.sort_unstable();
        gamma.dedup();
        if gamma == self.frequencies {
            return Ok(Self::from_norms(self.modulus, gamma, radius, self.guard, false, self.norms.clone()));
        }
        Self::with_guard(self.modulus, &gamma, radius, self.guard)
    }

    #[inline]
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    pub fn frequencies(&self) -> &[usize] {
        &self.frequencies
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dimension(&self) -> usize {
        self.frequencies.len()
    }

    pub fn members(&self) -> &SetOnZN {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(x % self.modulus)
    }

    /// b = |B|/N.
    pub fn density(&self) -> Ratio<u64> {
        self.members.density()
    }

    pub fn was_clamped(&self) -> bool {
        self.clamped
    }

    /// Members whose norm lies within the guard band of the radius.
    pub fn boundary_hits(&self) -> usize {
        self.boundary_hits
    }

    /// max_{k∈Γ} |1 − e(kx/N)|.
    pub fn norm_of(&self, x: usize) -> f64 {
        self.norms[x % self.modulus]
    }

    /// Whether `self ≤ other`: same group, Γ_other ⊆ Γ_self and δ_self ≤ δ_other.
    pub fn is_sub_bohr_of(&self, other: &BohrSet) -> bool {
        self.modulus == other.modulus
            && self.radius <= other.radius
            && other.frequencies.iter().all(|k| self.frequencies.binary_search(k).is_ok())
    }

    /// Exhaustive recheck of the defining inequality, symmetry and 0 ∈ B.
    pub fn verify_invariants(&self) -> bool {
        let n = self.modulus;
        let fresh = bohr_norms(n, &self.frequencies);
        self.members.contains(0)
            && self.members.is_symmetric()
            && (0..n).all(|x| (fresh[x] <= self.radius + self.guard) == self.members.contains(x))
    }

    fn count_at_most(sorted: &[f64], v: f64) -> usize {
        sorted.partition_point(|&n| n <= v)
    }

    fn count_below(sorted: &[f64], v: f64) -> usize {
        sorted.partition_point(|&n| n < v)
    }

    fn sorted_norms(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.norms.to_vec();
        s.sort_unstable_by(|a, b| a.total_cmp(b));
        s
    }

    /// |B_ρ| without building the dilate.
    pub fn dilate_size(&self, rho: f64) -> usize {
        let r = (rho * self.radius).min(2.0);
        self.norms.iter().filter(|&&n| n <= r + self.guard).count()
    }
}

/// m(B_{1/2}) ≥ 7^{−d} m(B).
pub fn check_doubling(b: &BohrSet) -> bool {
    let half = b.dilate_size(0.5) as f64;
    half * libm::pow(7.0, b.dimension() as f64) >= b.len() as f64
}

/// m(B_ρ) ≥ e^{−6d log(2/ρ)} m(B) for ρ ∈ (0, 1].
pub fn check_growth(b: &BohrSet, rho: f64) -> Result<bool> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("growth factor must lie in (0,1], got {rho}")));
    }
    let d = b.dimension() as f64;
    let bound = libm::exp(-6.0 * d * libm::log(2.0 / rho));
    Ok(b.dilate_size(rho) as f64 >= bound * b.len() as f64)
}

/// m(B) ≥ e^{−6d log(4/δ)}.
pub fn check_size(b: &BohrSet) -> bool {
    let d = b.dimension() as f64;
    let bound = libm::exp(-6.0 * d * libm::log(4.0 / b.radius()));
    b.len() as f64 >= bound * b.modulus() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub c0: f64,
    /// Signed probe values of ρ.
    pub probes: Vec<f64>,
    /// |B_{1+ρ}|/|B| at each probe.
    pub ratios: Vec<f64>,
    /// Number of jump points of ρ ↦ |B_{1+ρ}| examined exactly.
    pub breakpoints_checked: usize,
    /// Smallest |ρ| at which the inequality fails, if any.
    pub first_violation: Option<f64>,
    pub pass: bool,
}

/// Tests 1 − C0|ρ|d ≤ |B_{1+ρ}|/|B| ≤ 1 + C0|ρ|d for 0 < |ρ| ≤ 1/(C0·d).
///
/// Besides the probe grid, every jump of the step function ρ ↦ |B_{1+ρ}| in
/// that range is checked, so a pass certifies the inequality for all ρ.
pub fn check_regularity(b: &BohrSet, policy: &Policy) -> RegularityReport {
    let c0 = policy.c0;
    let d = b.dimension() as f64;
    let rho_max = 1.0 / (c0 * d);
    let size = b.len() as f64;
    let delta = b.radius;
    let guard = b.guard;
    let sorted = b.sorted_norms();
    let count_at = |rho: f64| {
        let r = ((1.0 + rho) * delta).min(2.0);
        BohrSet::count_at_most(&sorted, r + guard)
    };

    let mut violations: Vec<f64> = Vec::new();
    let grid = policy.probe_grid.max(1);
    let mut probes = Vec::with_capacity(2 * grid);
    let mut ratios = Vec::with_capacity(2 * grid);
    for i in 0..grid {
        let t = if grid == 1 { 0.0 } else { i as f64 / (grid - 1) as f64 };
        let mag = rho_max * libm::pow(1e-3, t);
        for rho in [mag, -mag] {
            let ratio = count_at(rho) as f64 / size;
            let slack = c0 * rho.abs() * d;
            if ratio > 1.0 + slack || ratio < 1.0 - slack {
                violations.push(rho.abs());
            }
            probes.push(rho);
            ratios.push(ratio);
        }
    }

    let mut breakpoints = 0;
    // upper side: at a jump v the count includes every norm ≤ v
    let lo = delta + guard;
    let hi = (1.0 + rho_max) * delta + guard;
    let start = BohrSet::count_at_most(&sorted, lo);
    let mut i = start;
    while i < sorted.len() && sorted[i] <= hi {
        let v = sorted[i];
        let rho = (v - guard) / delta - 1.0;
        if rho > 0.0 && rho <= rho_max {
            breakpoints += 1;
            let count = BohrSet::count_at_most(&sorted, v) as f64;
            if count > size * (1.0 + c0 * rho * d) {
                violations.push(rho);
            }
        }
        i = BohrSet::count_at_most(&sorted, v);
    }
    // lower side: just past a jump v the count drops to the norms < v
    let lo = (1.0 - rho_max) * delta + guard;
    let mut i = BohrSet::count_below(&sorted, lo);
    while i < sorted.len() && sorted[i] < delta + guard {
        let v = sorted[i];
        let rho = 1.0 - (v - guard) / delta;
        if rho > 0.0 && rho <= rho_max {
            breakpoints += 1;
            let count = BohrSet::count_below(&sorted, v) as f64;
            if count < size * (1.0 - c0 * rho * d) {
                violations.push(rho);
            }
        }
        i = BohrSet::count_at_most(&sorted, v);
    }

    let first_violation = violations.iter().copied().reduce(f64::min);
    RegularityReport {
        c0,
        probes,
        ratios,
        breakpoints_checked: breakpoints,
        first_violation,
        pass: first_violation.is_none(),
    }
}

pub fn is_regular(b: &BohrSet, policy: &Policy) -> bool {
    check_regularity(b, policy).pass
}

/// Scans κ = 2^{−(1 − i/G)} for i = 0, …, G − 1 and returns the first regular B_κ.
pub fn find_regular_dilate(b: &BohrSet, policy: &Policy) -> Result<(f64, BohrSet)> {
    let grid = policy.kappa_grid.max(1);
    for i in 0..grid {
        let kappa = libm::exp2(-(1.0 - i as f64 / grid as f64));
        let candidate = b.dilate(kappa)?;
        if is_regular(&candidate, policy) {
            return Ok((kappa, candidate));
        }
    }
    Err(Error::NoRegularDilate { tried: grid })
}

/// ‖μ_{x+B} − μ_B‖_{L¹} = |B Δ (x+B)|/|B|.
pub fn averaging_defect_point(b: &BohrSet, x: usize) -> Ratio<u64> {
    let shifted = b.members.translate(x as i64);
    let common = b.members.intersection_len(&shifted).expect("same modulus");
    Ratio::new(2 * (b.len() - common) as u64, b.len() as u64)
}

/// ‖μ_B∗λ − μ_B‖_{L¹} for λ with ‖λ‖_{L¹} = 1 supported in `support`.
pub fn averaging_defect_measure(b: &BohrSet, lambda: &GroupFunction, support: &SetOnZN) -> Result<f64> {
    if lambda.modulus() != b.modulus {
        return Err(Error::ModulusMismatch { left: b.modulus, right: lambda.modulus() });
    }
    for (x, v) in lambda.values().iter().enumerate() {
        if v.norm() > 0.0 && !support.contains(x) {
            return Err(Error::SupportViolation { index: x });
        }
    }
    let mu = GroupFunction::measure(&b.members)?;
    let diff = mu.convolve(lambda)?.sub(&mu)?;
    diff.lp_norm(1.0)
}

/// A centred progression {−Lt, …, Lt} inside a Bohr set with its guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BohrAp {
    pub ap: Ap,
    /// max(1, ⌈δN^{1/d}/(2π)⌉).
    pub guarantee: usize,
    /// max_{k∈Γ} |1 − e(kt/N)| for the chosen step.
    pub step_norm: f64,
    /// Smallest g | N, g < N, with the subgroup ⟨g⟩ inside B. Such a B holds
    /// progressions of every length once repeated terms are allowed, which
    /// is how the size guarantee is met when no proper progression is long
    /// enough (possible when some frequency shares a factor with N).
    pub periodic_step: Option<usize>,
}

impl BohrAp {
    /// Whether the guarantee is met, by a proper progression or a subgroup.
    pub fn meets_guarantee(&self) -> bool {
        self.ap.length >= self.guarantee || self.periodic_step.is_some()
    }
}

fn periodic_step(b: &BohrSet) -> Option<usize> {
    let n = b.modulus;
    (1..n).filter(|g| n.is_multiple_of(*g)).find(|&g| (g..n).step_by(g).all(|x| b.members.contains(x)))
}

pub fn ap_guarantee(b: &BohrSet) -> usize {
    let g = b.radius * libm::pow(b.modulus as f64, 1.0 / b.dimension() as f64) / (2.0 * PI);
    (libm::ceil(g - 1e-12) as usize).max(1)
}

/// Longest centred progression through 0 inside B, by exhaustive search over steps.
///
/// For each t the length is read off directly from membership of ±jt; ties
/// are broken by the smaller Bohr norm of t, then the smaller t. When every
/// multiple of t lies in B the whole subgroup ⟨t⟩ is returned.
pub fn ap_in_bohr(b: &BohrSet) -> Result<BohrAp> {
    if b.radius >= PI {
        return Err(Error::InvalidParameter("progression lemma needs δ < π".into()));
    }
    let n = b.modulus;
    let guarantee = ap_guarantee(b);
    if b.len() == n {
        return Ok(BohrAp {
            ap: Ap { start: 0, step: 1, length: n },
            guarantee,
            step_norm: b.norms[1],
            periodic_step: Some(1),
        });
    }
    let mut best = (1usize, f64::INFINITY, 1usize); // (length, norm, t)
    for t in 1..=n / 2 {
        if !b.members.contains(t) {
            continue;
        }
        let ord = order(t, n);
        let half = ord / 2;
        let mut l = 1;
        let mut x = t;
        while l < half {
            x = (x + t) % n;
            if !b.members.contains(x) {
                break;
            }
            l += 1;
        }
        let length = if l >= half { ord } else { 2 * l + 1 };
        let norm = b.norms[t];
        if length > best.0 || (length == best.0 && norm < best.1) {
            best = (length, norm, t);
        }
    }
    let (length, norm, t) = best;
    let ap = if length == 1 {
        return Ok(BohrAp { ap: Ap::singleton(0), guarantee, step_norm: 0.0, periodic_step: periodic_step(b) });
    } else if length == order(t, n) {
        Ap { start: 0, step: t, length }
    } else {
        let l = (length - 1) / 2;
        Ap { start: (n - (l * t) % n) % n, step: t, length }
    };
    debug_assert!(ap.is_inside(&b.members));
    Ok(BohrAp { ap, guarantee, step_norm: norm, periodic_step: periodic_step(b) })
}

/// |1 − e(kx/N)| computed directly.
pub fn character_distance(k: usize, x: usize, modulus: usize) -> f64 {
    let phase = ((k as u128 * x as u128) % modulus as u128) as f64 / modulus as f64;
    (Complex64::new(1.0, 0.0) - Complex64::new(libm::cos(2.0 * PI * phase), libm::sin(2.0 * PI * phase))).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_group() {
        let b = BohrSet::new(16, &[0], 2.0).unwrap();
        assert_eq!(b.len(), 16);
        assert!(check_doubling(&b) && check_size(&b) && check_growth(&b, 1.0).unwrap());
        let ap = ap_in_bohr(&b).unwrap();
        assert_eq!(ap.ap, Ap { start: 0, step: 1, length: 16 });
        let (kappa, reg) = find_regular_dilate(&b, &Policy::default()).unwrap();
        assert_eq!(kappa, 0.5);
        assert_eq!(reg.len(), 16);
        assert!(BohrSet::new(16, &[], 1.0).is_err());
    }

    #[test]
    fn small_examples() {
        let b = BohrSet::new(12, &[1], 0.6).unwrap();
        assert_eq!(b.members().to_vec(), [0, 1, 11]);
        assert_eq!(b.dilate(1.0).unwrap(), b);
        assert!(check_size(&b));
        let ap = ap_in_bohr(&b).unwrap();
        assert_eq!(ap.guarantee, 2);
        assert_eq!(ap.ap.elements(12), [11, 0, 1]);

        let j = b.join(&[3], 0.6).unwrap();
        assert_eq!(j.members().to_vec(), [0]);
        assert!(j.is_sub_bohr_of(&b));
        assert_eq!(b.join(&[1], 0.6).unwrap(), b);
        assert!(b.join(&[], 0.7).is_err());
    }

    #[test]
    fn sine_bound_progression() {
        let b = BohrSet::new(101, &[1], 0.3).unwrap();
        let ap = ap_in_bohr(&b).unwrap();
        assert_eq!(ap.ap.length, 9);
        assert_eq!(ap.ap.step % 101, 1);
        assert_eq!(ap.guarantee, 5);
    }

    #[test]
    fn dilate_clamps_and_is_monotone() {
        let b = BohrSet::new(50, &[3, 7], 1.5).unwrap();
        let big = b.dilate(3.0).unwrap();
        assert!(big.was_clamped());
        assert_eq!(big.radius(), 2.0);
        let small = b.dilate(0.4).unwrap();
        assert!(small.members().is_subset(b.members()));
        assert!(b.members().is_subset(big.members()));
        assert!(b.verify_invariants() && small.verify_invariants());
    }

    #[test]
    fn singleton_bohr_set_is_regular() {
        let b = BohrSet::new(97, &[1, 30, 55], 0.05).unwrap();
        assert_eq!(b.len(), 1);
        let (kappa, _) = find_regular_dilate(&b, &Policy::default()).unwrap();
        assert_eq!(kappa, 0.5);
    }

    #[test]
    fn averaging_defect_point_examples() {
        let b = BohrSet::new(40, &[1], 1.0).unwrap();
        assert_eq!(averaging_defect_point(&b, 0), Ratio::new(0, 1));
        let n = b.len() as u64;
        assert_eq!(averaging_defect_point(&b, 1), Ratio::new(2, n));
        let point = GroupFunction::measure(&SetOnZN::from_residues(40, [0]).unwrap()).unwrap();
        let supp = SetOnZN::from_residues(40, [0]).unwrap();
        assert!(averaging_defect_measure(&b, &point, &supp).unwrap() < 1e-12);
        let off = GroupFunction::measure(&SetOnZN::from_residues(40, [5]).unwrap()).unwrap();
        assert_eq!(averaging_defect_measure(&b, &off, &supp), Err(Error::SupportViolation { index: 5 }));
    }
}
