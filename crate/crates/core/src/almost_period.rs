//! Almost-periods of convolutions, found by exhaustive search.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::bohr::BohrSet;
use crate::cyclic::{self, lp_norm_of, ntt, spectrum, GroupFunction};
use crate::error::{check_same_modulus, Error, Result};
use crate::set::SetOnZN;

/// Caps p at 2 + log N.
pub fn capped_exponent(p: f64, modulus: usize) -> f64 {
    p.min(2.0 + libm::log(modulus as f64))
}

/// ‖g − τ_y g‖_{L^p}.
pub fn translate_distance(g: &[Complex64], y: usize, p: f64) -> f64 {
    let n = g.len();
    let y = y % n;
    let diffs = (0..n).map(move |u| {
        let v = u + y;
        (g[u] - g[if v >= n { v - n } else { v }]).norm()
    });
    lp_norm_of(diffs, n, p).expect("p ≥ 1")
}

/// Distances for every y in `candidates`, computed once per pair {y, −y} so
/// that the result is exactly symmetric.
fn symmetric_distances(g: &[Complex64], candidates: &SetOnZN, p: f64) -> Vec<Option<f64>> {
    let n = g.len();
    let mut out = vec![None; n];
    for y in candidates.iter() {
        if out[y].is_some() {
            continue;
        }
        let d = translate_distance(g, y, p);
        out[y] = Some(d);
        out[(n - y) % n] = Some(d);
    }
    out
}

/// X* = {y ∈ T − T : ‖f∗μ_S − τ_y f∗μ_S‖_{L^p} ≤ ε‖f‖_{L^p}}.
pub fn almost_period_set(f: &GroupFunction, s: &SetOnZN, t: &SetOnZN, p: f64, eps: f64) -> Result<SetOnZN> {
    check_same_modulus(f.modulus(), s.modulus())?;
    check_same_modulus(f.modulus(), t.modulus())?;
    if s.is_empty() {
        return Err(Error::EmptySet("almost-period set needs S nonempty"));
    }
    if t.is_empty() {
        return Err(Error::EmptySet("almost-period set needs T nonempty"));
    }
    if !(p >= 2.0) {
        return Err(Error::InvalidParameter(alloc::format!("almost periods need p ≥ 2, got {p}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("almost periods need ε ∈ (0,1), got {eps}")));
    }
    let n = f.modulus();
    let p = capped_exponent(p, n);
    let g = f.convolve(&GroupFunction::measure(s)?)?;
    let bound = eps * f.lp_norm(p)?;
    let candidates = t.difference_set();
    let dist = symmetric_distances(g.values(), &candidates, p);
    let mut out = SetOnZN::empty(n)?;
    for y in candidates.iter() {
        if dist[y].unwrap() <= bound {
            out.insert(y);
        }
    }
    Ok(out)
}

/// λ_X^{(ℓ)} where λ_X = μ_X ∗ μ_{−X}.
///
/// Uses exact tuple counts, λ^{(ℓ)}(u) = N·c(u)/|X|^{2ℓ} with c(u) the number
/// of (a_1, b_1, …, a_ℓ, b_ℓ) ∈ X^{2ℓ} with Σ(a_i − b_i) = u, whenever they
/// fit in the integer transform, and the floating transform otherwise.
pub fn smoothing_operator(x: &SetOnZN, ell: u32) -> Result<GroupFunction> {
    if x.is_empty() {
        return Err(Error::EmptySet("smoothing operator needs X nonempty"));
    }
    if ell == 0 {
        return Err(Error::InvalidParameter("smoothing operator needs ℓ ≥ 1".into()));
    }
    let n = x.modulus();
    let plus: Vec<i64> = x.indicator().into_iter().map(|v| v as i64).collect();
    let minus: Vec<i64> = x.negate().indicator().into_iter().map(|v| v as i64).collect();
    let mut inputs: Vec<&[i64]> = Vec::with_capacity(2 * ell as usize);
    for _ in 0..ell {
        inputs.push(&plus);
        inputs.push(&minus);
    }
    let total = libm::pow(x.len() as f64, 2.0 * ell as f64);
    match ntt::cyclic_convolve_many(&inputs, n) {
        Ok(counts) => {
            let values: Vec<f64> = counts.iter().map(|&c| n as f64 * c as f64 / total).collect();
            GroupFunction::from_real(n, &values)
        }
        Err(Error::ExactOverflow { .. }) => {
            let mu = GroupFunction::measure(x)?;
            let lambda = mu.convolve(&mu.reflect())?;
            let mut out = lambda.power_convolve(ell)?;
            // clear rounding noise; λ^{(ℓ)} is real and nonnegative
            let vals: Vec<f64> = out.values().iter().map(|v| v.re.max(0.0)).collect();
            out = GroupFunction::from_real(n, &vals)?;
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

/// ‖f∗μ_S − f∗μ_S∗λ_X^{(ℓ)}‖_{L^p}.
pub fn smoothing_defect(f: &GroupFunction, s: &SetOnZN, x: &SetOnZN, ell: u32, p: f64) -> Result<f64> {
    let g = f.convolve(&GroupFunction::measure(s)?)?;
    let smoothed = g.convolve(&smoothing_operator(x, ell)?)?;
    g.sub(&smoothed)?.lp_norm(capped_exponent(p, f.modulus()))
}

/// A Bohr set of almost-periods for 1_{A1} ∗ μ_{A2}.
#[derive(Debug, Clone)]
pub struct ClsBohr {
    pub bohr: BohrSet,
    pub initial_radius: f64,
    pub halvings: usize,
    /// max over members of ‖g − τ_x g‖_{L^p}.
    pub worst_distance: f64,
    /// θ·α₁^{1/p}.
    pub bound: f64,
    pub p: f64,
}

/// Builds B with ‖1_{A1}∗μ_{A2} − τ_x 1_{A1}∗μ_{A2}‖_{L^p} ≤ θα₁^{1/p} for every x ∈ B.
///
/// Γ = Spec_{θ/4}(μ_{A2}); the radius starts at min(2, θ α₂^{1/2} α₁^{1/p − 1/2})
/// and is halved until every member verifies.
pub fn cls_bohr_almost_periods(a1: &SetOnZN, a2: &SetOnZN, p: f64, theta: f64, max_halvings: usize) -> Result<ClsBohr> {
    check_same_modulus(a1.modulus(), a2.modulus())?;
    if a1.is_empty() || a2.is_empty() {
        return Err(Error::EmptySet("almost-periodic Bohr set needs A1, A2 nonempty"));
    }
    if !(p >= 2.0) {
        return Err(Error::InvalidParameter(alloc::format!("p must be ≥ 2, got {p}")));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("θ must lie in (0,1), got {theta}")));
    }
    let n = a1.modulus();
    let p = capped_exponent(p, n);
    let (alpha1, alpha2) = (a1.density_f64(), a2.density_f64());
    let mu2 = GroupFunction::measure(a2)?;
    let gamma = spectrum(&mu2, theta / 4.0)?.frequencies();
    let initial_radius = (theta * libm::sqrt(alpha2) * libm::pow(alpha1, 1.0 / p - 0.5)).min(2.0);
    let counts = cyclic::pair_counts(a1, a2)?;
    let g: Vec<Complex64> = counts.iter().map(|&c| Complex64::new(c as f64 / a2.len() as f64, 0.0)).collect();
    let bound = theta * libm::pow(alpha1, 1.0 / p);

    let mut dist: Vec<Option<f64>> = vec![None; n];
    let mut radius = initial_radius;
    let mut last_witness = 0usize;
    for halvings in 0..=max_halvings {
        let b = BohrSet::new(n, &gamma, radius)?;
        let mut worst = 0.0f64;
        let mut failed = None;
        for x in b.members().iter() {
            let d = match dist[x] {
                Some(d) => d,
                None => {
                    let d = translate_distance(&g, x, p);
                    dist[x] = Some(d);
                    dist[(n - x) % n] = Some(d);
                    d
                }
            };
            if d > bound {
                failed = Some(x);
                break;
            }
            worst = worst.max(d);
        }
        match failed {
            None => return Ok(ClsBohr { bohr: b, initial_radius, halvings, worst_distance: worst, bound, p }),
            Some(x) => last_witness = x,
        }
        radius *= 0.5;
    }
    Err(Error::VerificationFailed {
        witness: last_witness as u64,
        detail: alloc::format!("no radius passed after {max_halvings} halvings"),
    })
}
