//! Density-increment toolbox: spectrum annihilation, the L² increment,
//! Katz–Koester transforms and the scaling step.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_rational::Ratio;

use crate::almost_period::almost_period_set;
use crate::bohr::{character_distance, find_regular_dilate, is_regular, BohrSet};
use crate::cyclic::{balanced_function, correlation_counts, pair_counts, representation_counts, spectrum, GroupFunction};
use crate::error::{check_same_modulus, Error, Result};
use crate::policy::Policy;
use crate::set::SetOnZN;

const GUARD_SLACK: f64 = 1e-12;

/// Almost-period tolerances tried, widest first, when the loop stalls.
const ESCAPE_EPS: [f64; 3] = [0.5, 0.35, 0.25];

/// A sub-Bohr set on which some set has a larger relative density.
#[derive(Debug, Clone)]
pub struct Increment {
    pub bohr: BohrSet,
    /// Which input set gained density (1-based).
    pub index: usize,
    /// argmax x of |A ∩ (x + B̆)|, smallest on ties.
    pub translate: usize,
    pub count: usize,
    /// ‖1_A∗μ_{B̆}‖_∞.
    pub density: f64,
    /// Density of A in its ambient Bohr set before the step.
    pub previous: f64,
}

/// Sets L ⊆ B and S_j ⊆ B'' with 1_L∗1_{S_1}(∗1_{S_2}) ≤ K·1_A∗1_{A'_1}(∗1_{A'_2}).
#[derive(Debug, Clone)]
pub struct Structure {
    pub l: SetOnZN,
    pub s: Vec<SetOnZN>,
    pub lambda: f64,
    pub sigma: Vec<f64>,
    pub k: u64,
    pub iterations: usize,
    pub sigma_floor: f64,
}

#[derive(Debug, Clone)]
pub enum IncrementOutcome {
    Increment(Increment),
    Structure(Structure),
}

/// argmax_x |A ∩ (x + B)| with the smallest x on ties.
pub fn best_translate(a: &SetOnZN, b: &SetOnZN) -> Result<(usize, usize)> {
    let counts = correlation_counts(a, b)?;
    let mut best = (0usize, 0u64);
    for (x, &c) in counts.iter().enumerate() {
        if c > best.1 {
            best = (x, c);
        }
    }
    Ok((best.0, best.1 as usize))
}

fn increment_on(a: &SetOnZN, ambient: &BohrSet, b: &BohrSet, index: usize) -> Result<Increment> {
    let (translate, count) = best_translate(a, b.members())?;
    Ok(Increment {
        bohr: b.clone(),
        index,
        translate,
        count,
        density: count as f64 / b.len() as f64,
        previous: a.len() as f64 / ambient.len() as f64,
    })
}

fn require_subset(inner: &SetOnZN, outer: &SetOnZN, what: &'static str) -> Result<()> {
    check_same_modulus(inner.modulus(), outer.modulus())?;
    if inner.is_subset(outer) {
        Ok(())
    } else {
        Err(Error::NotSubset(what))
    }
}

fn require_dilate(inner: &BohrSet, outer: &BohrSet, rho: f64, what: &'static str) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("dilation factor must lie in (0,1], got {rho}")));
    }
    let within = inner.is_sub_bohr_of(outer) && inner.radius() <= rho * outer.radius() * (1.0 + GUARD_SLACK);
    if within || inner.members().is_subset(outer.dilate(rho)?.members()) {
        Ok(())
    } else {
        Err(Error::NotSubset(what))
    }
}

fn guard(value: f64, bound: f64, what: &str) -> Result<()> {
    if value <= bound * (1.0 + GUARD_SLACK) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("{what}: {value} exceeds {bound}")))
    }
}

/// Word lengths over the generators ±Λ, truncated at `max_len`.
fn word_lengths(modulus: usize, generators: &[usize], max_len: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; modulus];
    dist[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == max_len {
            continue;
        }
        for &g in generators {
            for v in [(u + g) % modulus, (u + modulus - g) % modulus] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

/// Result of spectrum annihilation.
#[derive(Debug, Clone)]
pub struct Annihilation {
    pub bohr: BohrSet,
    /// The generating set Λ joined to the frequencies.
    pub generators: Vec<usize>,
    /// Longest word over ±Λ needed to reach a spectral frequency.
    pub word_length: usize,
    pub kappa: f64,
}

/// B' ≤ B with |1 − γ(x)| ≤ 1/2 for every γ ∈ Spec_ε(μ_X) and x ∈ B'.
///
/// Λ is chosen greedily: frequencies are visited by decreasing |μ̂_X| and added
/// unless already a ±Λ word of length at most the policy's bound. Then
/// B' is the regular dilate of B(Γ ∪ Λ, min(δ, 1/(4w))).
pub fn spectrum_annihilate(b: &BohrSet, x: &SetOnZN, eps: f64, policy: &Policy) -> Result<Annihilation> {
    if x.is_empty() {
        return Err(Error::EmptySet("spectrum annihilation needs X nonempty"));
    }
    require_subset(x, b.members(), "X ⊆ B")?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("ε must lie in (0,1], got {eps}")));
    }
    let n = b.modulus();
    let spec = spectrum(&GroupFunction::measure(x)?, eps)?;
    let mut order = spec.entries.clone();
    order.sort_by(|p, q| q.1.norm().total_cmp(&p.1.norm()).then(p.0.cmp(&q.0)));

    let max_len = policy.max_word_length.max(1);
    let mut generators: Vec<usize> = Vec::new();
    let mut dist = word_lengths(n, &generators, max_len);
    for &(k, _) in &order {
        if dist[k] > max_len {
            generators.push(k);
            dist = word_lengths(n, &generators, max_len);
        }
    }
    let word_length = spec.entries.iter().map(|e| dist[e.0]).max().unwrap_or(0);
    let radius = if word_length == 0 { b.radius() } else { b.radius().min(0.25 / word_length as f64) };
    let (kappa, bohr) = find_regular_dilate(&b.join(&generators, radius)?, policy)?;

    for &(k, _) in &spec.entries {
        for y in bohr.members().iter() {
            if character_distance(k, y, n) > 0.5 + GUARD_SLACK {
                return Err(Error::VerificationFailed {
                    witness: y as u64,
                    detail: alloc::format!("frequency {k} is not annihilated"),
                });
            }
        }
    }
    Ok(Annihilation { bohr, generators, word_length, kappa })
}

/// Measured failure of the L² increment: the hypothesis held but the sup did
/// not reach the target.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementFailure {
    pub hypothesis_value: f64,
    pub required: f64,
    pub measured_sup: f64,
    pub target: f64,
}

#[derive(Debug, Clone)]
pub enum L2Outcome {
    Increment(Increment),
    Failed(IncrementFailure),
}

/// Σ_{γ ∈ Spec_η(μ_X)} |f̂_A(γ)|² with f_A the balanced function of A in B.
pub fn spectral_mass(b: &BohrSet, a: &SetOnZN, x: &SetOnZN, eta: f64) -> Result<f64> {
    let f = balanced_function(a, b.members())?.dft();
    let spec = spectrum(&GroupFunction::measure(x)?, eta)?;
    Ok(spec.entries.iter().map(|e| f.value(e.0).norm_sqr()).sum())
}

/// L² density increment: if the balanced function of A carries mass
/// ν α² m(B) on Spec_η(μ_X), then A is denser on a translate of the
/// annihilating Bohr set B̆ ≤ Ḃ.
#[allow(clippy::too_many_arguments)]
pub fn l2_density_increment(
    b: &BohrSet,
    b_dot: &BohrSet,
    rho: f64,
    a: &SetOnZN,
    x: &SetOnZN,
    eta: f64,
    nu: f64,
    policy: &Policy,
) -> Result<L2Outcome> {
    if !(nu > 0.0 && nu <= 1.0) || 1.0 + policy.c_impl * nu <= 1.0 {
        return Err(Error::InvalidParameter(alloc::format!("ν must make (1 + cν) > 1, got ν = {nu}")));
    }
    if a.is_empty() {
        return Err(Error::EmptySet("L² increment needs A nonempty"));
    }
    require_subset(a, b.members(), "A ⊆ B")?;
    require_subset(x, b_dot.members(), "X ⊆ Ḃ")?;
    require_dilate(b_dot, b, rho, "Ḃ ≤ B_ρ")?;
    let alpha = a.len() as f64 / b.len() as f64;
    let d = b.dimension() as f64;
    guard(rho, policy.c_impl * nu * alpha / d, "ρ ≤ cνα/d")?;

    let m_b = b.len() as f64 / b.modulus() as f64;
    let value = spectral_mass(b, a, x, eta)?;
    let required = nu * alpha * alpha * m_b;
    if value < required {
        return Err(Error::HypothesisNotMet { value, required });
    }
    let ann = spectrum_annihilate(b_dot, x, eta, policy)?;
    let inc = increment_on(a, b, &ann.bohr, 1)?;
    let target = (1.0 + policy.c_impl * nu) * alpha;
    let strictly_denser = (inc.count as u128) * (b.len() as u128) > (a.len() as u128) * (ann.bohr.len() as u128);
    if strictly_denser && inc.density >= target {
        Ok(L2Outcome::Increment(inc))
    } else {
        Ok(L2Outcome::Failed(IncrementFailure {
            hypothesis_value: value,
            required,
            measured_sup: inc.density,
            target,
        }))
    }
}

/// x maximising |A ∩ (x + B')|, the set (A − x) ∩ B' and its density in B'.
#[derive(Debug, Clone)]
pub struct Scaling {
    pub translate: usize,
    pub set: SetOnZN,
    pub density: Ratio<u64>,
    /// Whether the regularity bound α' ≥ α − 2C0ρd was checked.
    pub bound_checked: bool,
}

/// Scaling step: moves A ⊆ B into the narrower B' ⊆ B_ρ at the best translate.
pub fn scaling_translate(b: &BohrSet, b_prime: &BohrSet, rho: f64, a: &SetOnZN, policy: &Policy) -> Result<Scaling> {
    require_subset(a, b.members(), "A ⊆ B")?;
    require_dilate(b_prime, b, rho, "B' ⊆ B_ρ")?;
    let d = b.dimension() as f64;
    guard(rho, policy.c_impl / d, "ρ ≤ c/d")?;
    let counts = correlation_counts(a, b_prime.members())?;
    let mut best = (0usize, 0u64);
    for (x, &c) in counts.iter().enumerate() {
        if c > best.1 {
            best = (x, c);
        }
    }
    let (translate, count) = best;
    let density = Ratio::new(count, b_prime.len() as u64);

    let total: u64 = b.members().iter().map(|x| counts[x]).sum();
    let average = Ratio::new(total, (b.len() * b_prime.len()) as u64);
    if average > density {
        return Err(Error::VerificationFailed { witness: translate as u64, detail: "argmax below the average".into() });
    }
    let bound_checked = is_regular(b, policy);
    if bound_checked {
        let alpha = a.len() as f64 / b.len() as f64;
        let floor = alpha - 2.0 * policy.c0 * rho * d;
        if (count as f64) / (b_prime.len() as f64) < floor - GUARD_SLACK {
            return Err(Error::VerificationFailed {
                witness: translate as u64,
                detail: alloc::format!("scaled density below α − 2C0ρd = {floor}"),
            });
        }
    }
    let set = a.translate(-(translate as i64)).intersection(b_prime.members())?;
    debug_assert_eq!(set.len() as u64, count);
    Ok(Scaling { translate, set, density, bound_checked })
}

fn sigma_floor(policy: &Policy, alpha: f64, other: f64) -> f64 {
    libm::exp(-policy.sigma_floor_const / alpha * libm::log(2.0 / other))
}

fn dominated(lhs: &[u64], rhs: &[u64], k: u64) -> Option<usize> {
    lhs.iter().zip(rhs).position(|(&l, &r)| l as u128 > k as u128 * r as u128)
}

/// The Katz–Koester loop shared by the two- and three-set transforms.
///
/// Each step picks x ∈ B'' \ {0} and one index j (round-robin), and replaces
/// L by (L ∪ (L + x)) ∩ B and S_j by S_j ∩ (S_j − x). Every representation
/// counted on the left then maps to one of at most two on the right, so K
/// doubles. The translate maximising |new part of L|·|S_j ∩ (S_j − x)| is
/// taken, smallest x on ties.
fn kk_loop(
    b: &BohrSet,
    b2: &BohrSet,
    a: &SetOnZN,
    primes: &[&SetOnZN],
    floor: f64,
    policy: &Policy,
) -> Result<core::result::Result<Structure, String>> {
    let count = |l: &SetOnZN, s: &[SetOnZN]| -> Result<Vec<u64>> {
        match s {
            [s1] => pair_counts(l, s1),
            [s1, s2] => representation_counts(l, s1, s2),
            _ => unreachable!(),
        }
    };
    let reference = match primes {
        [p1] => pair_counts(a, p1)?,
        [p1, p2] => representation_counts(a, p1, p2)?,
        _ => unreachable!(),
    };
    let mut l = a.clone();
    let mut s: Vec<SetOnZN> = Vec::with_capacity(primes.len());
    for p in primes {
        let sj = p.intersection(b2.members())?;
        if sj.is_empty() {
            return Err(Error::Diagnostic("Katz–Koester: A' misses B''".into()));
        }
        s.push(sj);
    }
    let mut k = 1u64;
    let size = |set: &SetOnZN, of: &BohrSet| set.len() as f64 / of.len() as f64;
    let cap = libm::ceil(4.0 * libm::log(2.0 / floor)).max(1.0) as usize;
    let mut iterations = 0;
    while size(&l, b) < policy.lambda_min {
        if iterations == cap {
            return Ok(Err(alloc::format!("loop cap {cap} reached")));
        }
        let j = iterations % s.len();
        let reach = correlation_counts(b.members(), &l)?;
        let overlap = correlation_counts(&l, &l)?;
        let keep = correlation_counts(&s[j], &s[j])?;
        let gain = |x: usize| reach[x] - overlap[x];
        let mut pick: Option<(usize, u128)> = None;
        for x in b2.members().iter().filter(|&x| x != 0) {
            let score = gain(x) as u128 * keep[x] as u128;
            if score > 0 && pick.is_none_or(|(_, best)| score > best) {
                pick = Some((x, score));
            }
        }
        let Some((x, _)) = pick else {
            return Ok(Err("no translate in B'' grows L and keeps S".into()));
        };
        let grown = l.translate(x as i64).intersection(b.members())?;
        l = l.union(&grown)?;
        s[j] = s[j].intersection(&s[j].translate(-(x as i64)))?;
        k = k.checked_mul(2).ok_or_else(|| Error::Diagnostic("Katz–Koester: K overflow".into()))?;
        iterations += 1;

        if let Some(w) = dominated(&count(&l, &s)?, &reference, k) {
            return Err(Error::VerificationFailed {
                witness: w as u64,
                detail: alloc::format!("pointwise domination with K = {k} fails"),
            });
        }
        if s.iter().any(|sj| size(sj, b2) < floor) {
            return Ok(Err(alloc::format!("S fell below the floor {floor:e}")));
        }
    }
    if iterations == 0 {
        if let Some(w) = dominated(&count(&l, &s)?, &reference, k) {
            return Err(Error::VerificationFailed { witness: w as u64, detail: "initial domination fails".into() });
        }
    }
    Ok(Ok(Structure {
        lambda: size(&l, b),
        sigma: s.iter().map(|sj| size(sj, b2)).collect(),
        l,
        s,
        k,
        iterations,
        sigma_floor: floor,
    }))
}

/// When the loop stalls, L is nearly invariant under the shifts that keep
/// S, so 1_A∗μ_S has many almost-periods; the L² increment on them is tried.
fn escape(
    b: &BohrSet,
    b2: &BohrSet,
    rho: f64,
    a: &SetOnZN,
    s0: &SetOnZN,
    policy: &Policy,
) -> Result<core::result::Result<Increment, String>> {
    let s0 = s0.intersection(b2.members())?;
    if s0.is_empty() {
        return Ok(Err("S is empty".into()));
    }
    let alpha = a.len() as f64 / b.len() as f64;
    let m_b = b.len() as f64 / b.modulus() as f64;
    let f = GroupFunction::indicator(a);
    let mut why = String::new();
    let mut degenerate = None;
    for eps in ESCAPE_EPS {
        let x = almost_period_set(&f, &s0, b2.members(), 2.0, eps)?.intersection(b2.members())?;
        let mass = spectral_mass(b, a, &x, 0.5)?;
        let nu = (mass / (alpha * alpha * m_b) * (1.0 - 1e-9)).min(1.0);
        if !(nu > 0.0) {
            why = alloc::format!("f_A has no mass on Spec(μ_X) with |X| = {}", x.len());
            continue;
        }
        match l2_density_increment(b, b2, rho, a, &x, 0.5, nu, policy) {
            Ok(L2Outcome::Increment(inc)) if inc.bohr.len() > 1 => return Ok(Ok(inc)),
            Ok(L2Outcome::Increment(inc)) => degenerate = degenerate.or(Some(inc)),
            Ok(L2Outcome::Failed(f)) => {
                why = alloc::format!("measured {:.6} < target {:.6}", f.measured_sup, f.target);
            }
            Err(e @ (Error::HypothesisNotMet { .. } | Error::InvalidParameter(_))) => why = e.to_string(),
            Err(e) => return Err(e),
        }
    }
    Ok(degenerate.ok_or(why))
}

#[allow(clippy::too_many_arguments)]
fn run_kk(
    b: &BohrSet,
    b2: &BohrSet,
    rho: f64,
    a: &SetOnZN,
    primes: &[&SetOnZN],
    floor: f64,
    policy: &Policy,
) -> Result<IncrementOutcome> {
    let reason = match kk_loop(b, b2, a, primes, floor, policy)? {
        Ok(st) => return Ok(IncrementOutcome::Structure(st)),
        Err(reason) => reason,
    };
    let mut why = Vec::new();
    for s0 in primes {
        match escape(b, b2, rho, a, s0, policy)? {
            Ok(inc) => return Ok(IncrementOutcome::Increment(inc)),
            Err(w) => why.push(w),
        }
    }
    Err(Error::Diagnostic(alloc::format!("Katz–Koester: {reason}; L² escape: {}", why.join("; "))))
}

/// First returns an increment for A on B' or B'' if one is visible.
fn increment_probe(b: &BohrSet, candidates: [&BohrSet; 2], a: &SetOnZN, policy: &Policy) -> Result<Option<Increment>> {
    let alpha = a.len() as f64 / b.len() as f64;
    for cand in candidates {
        let inc = increment_on(a, b, cand, 1)?;
        if inc.density >= (1.0 + policy.c_impl) * alpha && is_regular(cand, policy) {
            return Ok(Some(inc));
        }
    }
    Ok(None)
}

/// Katz–Koester transform for two sets.
#[allow(clippy::too_many_arguments)]
pub fn katz_koester_2(
    b: &BohrSet,
    b1: &BohrSet,
    b2: &BohrSet,
    a: &SetOnZN,
    a1: &SetOnZN,
    rho: f64,
    rho1: f64,
    policy: &Policy,
) -> Result<IncrementOutcome> {
    if a.is_empty() || a1.is_empty() {
        return Err(Error::EmptySet("Katz–Koester needs A, A' nonempty"));
    }
    require_subset(a, b.members(), "A ⊆ B")?;
    require_subset(a1, b1.members(), "A' ⊆ B'")?;
    require_dilate(b1, b, rho, "B' ⊆ B_ρ")?;
    require_dilate(b2, b1, rho1, "B'' ⊆ B'_ρ'")?;
    let d = b.dimension() as f64;
    let alpha = a.len() as f64 / b.len() as f64;
    let alpha1 = a1.len() as f64 / b1.len() as f64;
    guard(rho, policy.c_impl * alpha / d, "ρ ≤ cα/d")?;
    guard(rho1, policy.c_impl * alpha1 / b1.dimension() as f64, "ρ' ≤ cα'/d")?;
    if let Some(inc) = increment_probe(b, [b1, b2], a, policy)? {
        return Ok(IncrementOutcome::Increment(inc));
    }
    let floor = sigma_floor(policy, alpha, alpha1);
    run_kk(b, b2, rho * rho1, a, &[a1], floor, policy)
}

/// Katz–Koester transform for three sets; the two S-sets shrink in turn.
#[allow(clippy::too_many_arguments)]
pub fn katz_koester_3(
    b: &BohrSet,
    b1: &BohrSet,
    b2: &BohrSet,
    a: &SetOnZN,
    a1: &SetOnZN,
    a2: &SetOnZN,
    rho: f64,
    rho1: f64,
    policy: &Policy,
) -> Result<IncrementOutcome> {
    if a.is_empty() || a1.is_empty() || a2.is_empty() {
        return Err(Error::EmptySet("Katz–Koester needs A, A'_1, A'_2 nonempty"));
    }
    require_subset(a, b.members(), "A ⊆ B")?;
    require_subset(a1, b1.members(), "A'_1 ⊆ B'")?;
    require_subset(a2, b1.members(), "A'_2 ⊆ B'")?;
    require_dilate(b1, b, rho, "B' ⊆ B_ρ")?;
    require_dilate(b2, b1, rho1, "B'' ⊆ B'_ρ'")?;
    let d = b.dimension() as f64;
    let alpha = a.len() as f64 / b.len() as f64;
    let gamma = alpha * (a1.len() as f64 / b1.len() as f64) * (a2.len() as f64 / b1.len() as f64);
    guard(rho, policy.c_impl * alpha / d, "ρ ≤ cα/d")?;
    guard(rho1, policy.c_impl * gamma / b1.dimension() as f64, "ρ' ≤ cγ/d")?;
    if let Some(inc) = increment_probe(b, [b1, b2], a, policy)? {
        return Ok(IncrementOutcome::Increment(inc));
    }
    let floor = sigma_floor(policy, alpha, gamma);
    run_kk(b, b2, rho * rho1, a, &[a1, a2], floor, policy)
}
