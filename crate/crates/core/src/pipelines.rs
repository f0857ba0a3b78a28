//! End-to-end searches for long progressions in A1 + A2 + A3, each checked
//! against exact representation counts.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::E;

use num_rational::Ratio;

use crate::almost_period::{almost_period_set, cls_bohr_almost_periods};
use crate::ap::{gcd, Ap};
use crate::bohr::{ap_in_bohr, find_regular_dilate, BohrSet};
use crate::cyclic::{representation_counts, GroupFunction};
use crate::error::{check_same_modulus, Error, Result};
use crate::policy::Policy;
use crate::set::SetOnZN;
use crate::transforms::{
    best_translate, katz_koester_2, katz_koester_3, l2_density_increment, scaling_translate, spectral_mass, Increment,
    IncrementOutcome, L2Outcome,
};

/// A progression whose every term has at least `threshold` representations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiedAp {
    pub ap: Ap,
    pub threshold: u64,
    /// r(w) for each term w, in order.
    pub counts: Vec<u64>,
}

impl VerifiedAp {
    pub fn min_count(&self) -> Option<u64> {
        self.counts.iter().copied().min()
    }
}

/// Checks every term of `ap` against the counts `r`.
pub fn verify_with_counts(ap: Ap, r: &[u64], threshold: u64) -> Result<VerifiedAp> {
    let n = r.len();
    let counts: Vec<u64> = ap.elements(n).into_iter().map(|w| r[w]).collect();
    if let Some(i) = counts.iter().position(|&c| c < threshold) {
        return Err(Error::VerificationFailed {
            witness: ap.elements(n)[i] as u64,
            detail: alloc::format!("{} representations, need {threshold}", counts[i]),
        });
    }
    Ok(VerifiedAp { ap, threshold, counts })
}

/// Recomputes r for A1 + A2 + A3 and checks every term of `ap`.
pub fn verify_ap(a1: &SetOnZN, a2: &SetOnZN, a3: &SetOnZN, ap: Ap, threshold: u64) -> Result<VerifiedAp> {
    verify_with_counts(ap, &representation_counts(a1, a2, a3)?, threshold)
}

/// A longest proper progression inside U, by exhaustive search over steps.
///
/// Ties go to the smaller step, then to the first start met along the cycle
/// walk from the smallest residue of each coset.
pub fn longest_ap(u: &SetOnZN) -> Ap {
    let n = u.modulus();
    if u.len() == n {
        return Ap { start: 0, step: 1, length: n };
    }
    let Some(first) = u.iter().next() else {
        return Ap::empty();
    };
    let mut best = Ap::singleton(first);
    for t in 1..=n / 2 {
        let g = gcd(t, n);
        let ord = n / g;
        if ord <= best.length {
            continue;
        }
        for r in 0..g {
            let at = |i: usize| (r + i * t) % n;
            let Some(gap) = (0..ord).find(|&i| !u.contains(at(i))) else {
                best = Ap { start: r, step: t, length: ord };
                break;
            };
            let mut run = 0usize;
            for i in 1..=ord {
                let idx = (gap + i) % ord;
                if u.contains(at(idx)) {
                    run += 1;
                    if run > best.length {
                        best = Ap { start: at((idx + ord + 1 - run) % ord), step: t, length: run };
                    }
                } else {
                    run = 0;
                }
            }
        }
    }
    best
}

/// Longest progression in {w : r(w) ≥ K} for A + B + C.
pub fn oracle_longest_ap(a: &SetOnZN, b: &SetOnZN, c: &SetOnZN, k: u64) -> Result<VerifiedAp> {
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return Err(Error::EmptySet("oracle needs nonempty sets"));
    }
    let r = representation_counts(a, b, c)?;
    oracle_from_counts(&r, k)
}

fn oracle_from_counts(r: &[u64], k: u64) -> Result<VerifiedAp> {
    let n = r.len();
    let level = SetOnZN::from_residues(n, (0..n).filter(|&w| r[w] >= k).map(|w| w as u64))?;
    verify_with_counts(longest_ap(&level), r, k)
}

/// Canonical radius for guards: a Bohr set on Γ = {0} is G at every radius.
fn effective_radius(b: &BohrSet) -> f64 {
    if b.frequencies() == [0] {
        2.0
    } else {
        b.radius()
    }
}

/// A progression of length ≥ ⌈4/v⌉ inside V ⊆ B, where V fills a 1 − v share of B.
pub fn thick_ap(b: &BohrSet, v_set: &SetOnZN, v: f64, policy: &Policy) -> Result<Ap> {
    check_same_modulus(b.modulus(), v_set.modulus())?;
    if !v_set.is_subset(b.members()) {
        return Err(Error::NotSubset("V ⊆ B"));
    }
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("v must lie in (0,1), got {v}")));
    }
    let required = (1.0 - v) * b.len() as f64;
    if (v_set.len() as f64) < required {
        return Err(Error::HypothesisNotMet { value: v_set.len() as f64, required });
    }
    let d = b.dimension() as f64;
    let n = b.modulus() as f64;
    let room = policy.c_impl * effective_radius(b) * libm::pow(n, 1.0 / d) / d;
    if 1.0 / v > room {
        return Err(Error::HypothesisNotMet { value: room, required: 1.0 / v });
    }
    let target = libm::ceil(4.0 / v - 1e-12) as usize;
    let base = ap_in_bohr(b)?.ap;
    if base.is_inside(v_set) && base.length >= target {
        return Ok(base);
    }
    let terms = base.elements(b.modulus());
    let mut best: Option<Ap> = None;
    for m in 1..base.length.max(1) {
        if (base.length - 1) / m + 1 < target.max(best.map_or(0, |a| a.length + 1)) {
            break;
        }
        for offset in 0..m {
            let mut run = 0usize;
            let mut i = offset;
            while i < terms.len() {
                if v_set.contains(terms[i]) {
                    run += 1;
                    if run >= target && best.is_none_or(|a| run > a.length) {
                        let first = i - (run - 1) * m;
                        best = Some(Ap { start: terms[first], step: (base.step * m) % b.modulus(), length: run });
                    }
                } else {
                    run = 0;
                }
                i += m;
            }
        }
    }
    if let Some(ap) = best {
        return Ok(ap);
    }
    let fallback = longest_ap(v_set);
    if fallback.length >= target {
        Ok(fallback)
    } else {
        Err(Error::Diagnostic(alloc::format!(
            "no progression of length {target} in the thick set (longest {})",
            fallback.length
        )))
    }
}

/// How the returned progression was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Constructive,
    /// A constructive step failed; the progression comes from the oracle.
    OracleOnly(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    /// The level set is thick on a translate of B'; the run stops.
    Terminated,
    Increment { index: usize, density: f64, gate_passed: bool },
    Failed(String),
}

impl StepOutcome {
    pub fn tag(&self) -> &'static str {
        match self {
            StepOutcome::Terminated => "terminated",
            StepOutcome::Increment { .. } => "increment",
            StepOutcome::Failed(_) => "failed",
        }
    }
}

/// One step of the density-increment iteration.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub step: usize,
    pub bohr: BohrSet,
    /// A_j^{(i)} = (A_j − shifts_j) ∩ B^{(i)}.
    pub sets: [SetOnZN; 3],
    pub shifts: [usize; 3],
    pub densities: [Ratio<u64>; 3],
    pub rho: f64,
    pub omega: f64,
    pub v: f64,
    pub outcome: StepOutcome,
}

impl IterationState {
    /// Rebuilds the three sets from the originals and the shift log.
    pub fn replay(&self, originals: &[SetOnZN; 3]) -> Result<[SetOnZN; 3]> {
        let mut out = self.sets.clone();
        for j in 0..3 {
            out[j] = originals[j].translate(-(self.shifts[j] as i64)).intersection(self.bohr.members())?;
        }
        Ok(out)
    }
}

/// Result of a pipeline run, in the caller's set order.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub pipeline: &'static str,
    /// `order[i]` is the caller's index of the set used as A_{i+1}.
    pub order: [usize; 3],
    pub z: usize,
    pub bohr: Option<BohrSet>,
    pub verified: VerifiedAp,
    pub provenance: Provenance,
    pub trace: Vec<IterationState>,
    pub iteration_cap: usize,
    /// Whether the almost-periodicity check held on all of z + B.
    pub cls_check: Option<bool>,
    pub cls_attempts: usize,
    /// Length guaranteed by the progression lemma for the final Bohr set.
    pub guarantee: Option<usize>,
}

impl PipelineRun {
    pub fn branch(&self) -> &'static str {
        match (&self.provenance, self.trace.last()) {
            (Provenance::OracleOnly(_), _) => "oracle-only",
            (_, Some(s)) if s.step > 1 => "increment",
            _ => "direct",
        }
    }

    pub fn steps(&self) -> usize {
        self.trace.len()
    }

    /// Increment steps whose exact growth check passed, and all increment steps.
    pub fn gate_counts(&self) -> (usize, usize) {
        let mut passed = 0;
        let mut total = 0;
        for s in &self.trace {
            if let StepOutcome::Increment { gate_passed, .. } = s.outcome {
                total += 1;
                passed += gate_passed as usize;
            }
        }
        (passed, total)
    }
}

fn sorted_order(sets: [&SetOnZN; 3]) -> Result<([usize; 3], [SetOnZN; 3])> {
    check_same_modulus(sets[0].modulus(), sets[1].modulus())?;
    check_same_modulus(sets[0].modulus(), sets[2].modulus())?;
    if sets.iter().any(|s| s.is_empty()) {
        return Err(Error::EmptySet("pipelines need nonempty sets"));
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| sets[j].len().cmp(&sets[i].len()));
    Ok((order, [sets[order[0]].clone(), sets[order[1]].clone(), sets[order[2]].clone()]))
}

fn argmax(r: &[u64]) -> usize {
    let mut best = 0;
    for (w, &c) in r.iter().enumerate() {
        if c > r[best] {
            best = w;
        }
    }
    best
}

/// Almost-periodicity pipeline: a Bohr set B of almost-periods of 1_{A1}∗μ_{A2}
/// and a z with r(y) ≥ |A1||A2||A3|/(2N) on all of z + B.
pub fn cls_pipeline(a1: &SetOnZN, a2: &SetOnZN, a3: &SetOnZN, policy: &Policy) -> Result<PipelineRun> {
    let (order, [s1, s2, s3]) = sorted_order([a1, a2, a3])?;
    let n = s1.modulus();
    let r = representation_counts(&s1, &s2, &s3)?;
    let product = (s1.len() as u128) * (s2.len() as u128) * (s3.len() as u128);
    let k = product.div_ceil(2 * n as u128) as u64;
    let (alpha1, alpha3) = (s1.density_f64(), s3.density_f64());
    let p = 2.0 + libm::ceil(libm::log(1.0 / alpha3));
    let mut theta = alpha1 / (2.0 * E);
    let z = argmax(&r);

    let mut run = PipelineRun {
        pipeline: "cls",
        order,
        z,
        bohr: None,
        verified: VerifiedAp { ap: Ap::empty(), threshold: k, counts: Vec::new() },
        provenance: Provenance::Constructive,
        trace: Vec::new(),
        iteration_cap: 0,
        cls_check: Some(false),
        cls_attempts: 0,
        guarantee: None,
    };
    let mut reason = String::new();
    for _ in 0..=policy.cls_retries {
        run.cls_attempts += 1;
        let cls = match cls_bohr_almost_periods(&s1, &s2, p, theta, policy.cls_max_halvings) {
            Ok(c) => c,
            Err(e) => {
                reason = e.to_string();
                theta /= 2.0;
                continue;
            }
        };
        let witness = cls.bohr.members().iter().map(|y| (z + y) % n).find(|&w| 2 * n as u128 * (r[w] as u128) < product);
        if let Some(w) = witness {
            reason = alloc::format!("almost-periodicity check fails at {w}");
            theta /= 2.0;
            continue;
        }
        let bap = ap_in_bohr(&cls.bohr)?;
        run.cls_check = Some(true);
        run.guarantee = Some(bap.guarantee);
        run.verified = verify_with_counts(bap.ap.translate(z as i64, n), &r, k)?;
        run.bohr = Some(cls.bohr);
        return Ok(run);
    }
    run.verified = oracle_from_counts(&r, k)?;
    run.provenance = Provenance::OracleOnly(reason);
    Ok(run)
}

/// Which iterative lemma drives the run.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    /// Stop when the lower level set misses B' entirely.
    Support { omega: f64 },
    /// Stop when the lower level set has density below v in B'.
    Thick { omega: f64, v: f64 },
}

/// Hard cap ⌈log(1/α̃)/log(1 + c)⌉ + 4 on the number of steps.
pub fn iteration_cap(sets: &[SetOnZN; 3], policy: &Policy) -> usize {
    let tilde: f64 = sets.iter().map(|s| s.density_f64()).product();
    libm::ceil(libm::log(1.0 / tilde) / libm::log(1.0 + policy.c_impl)) as usize + 4
}

/// lhs ≥ factor·rhs, exactly for finite nonnegative `factor`.
fn ge_scaled(lhs: u128, rhs: u128, factor: f64) -> bool {
    let bits = factor.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = if exp == 0 { (bits & ((1 << 52) - 1)) << 1 } else { (bits & ((1 << 52) - 1)) | (1 << 52) } as u128;
    let shift = exp - 1075;
    if shift >= 0 {
        match mant.checked_shl(shift as u32).and_then(|m| m.checked_mul(rhs)) {
            Some(v) => lhs >= v,
            None => lhs as f64 >= factor * rhs as f64,
        }
    } else {
        let s = (-shift) as u32;
        match (lhs.checked_shl(s).filter(|v| v >> s == lhs), mant.checked_mul(rhs)) {
            (Some(l), Some(rr)) => l >= rr,
            _ => lhs as f64 >= factor * rhs as f64,
        }
    }
}

/// Body of the increment branch: Katz–Koester, Croot–Sisask smoothing, then
/// the L² increment on A2.
#[allow(clippy::too_many_arguments)]
fn find_increment(
    b: &BohrSet,
    b1: &BohrSet,
    rho: f64,
    a1: &SetOnZN,
    a2: &SetOnZN,
    a3p: &SetOnZN,
    lower: Option<&SetOnZN>,
    policy: &Policy,
) -> core::result::Result<Increment, String> {
    let err = |e: Error| e.to_string();
    let c = policy.c_impl;
    let alpha1 = a1.len() as f64 / b.len() as f64;
    let alpha3p = a3p.len() as f64 / b1.len() as f64;
    let scale = match lower {
        Some(u) => alpha1 * alpha3p * (u.len() as f64 / b1.len() as f64),
        None => alpha3p,
    };
    let rho1 = c * scale / b1.dimension() as f64;
    let (kappa1, b2) = find_regular_dilate(&b1.dilate(rho1).map_err(err)?, policy).map_err(err)?;
    let rho1 = rho1 * kappa1;
    let outcome = match lower {
        Some(u) => katz_koester_3(b, b1, &b2, a1, &u.negate(), a3p, rho, rho1, policy),
        None => katz_koester_2(b, b1, &b2, a1, a3p, rho, rho1, policy),
    }
    .map_err(err)?;
    let st = match outcome {
        IncrementOutcome::Increment(inc) => return Ok(inc),
        IncrementOutcome::Structure(st) => st,
    };
    let rho2 = c / b2.dimension() as f64;
    let (kappa2, b3) = find_regular_dilate(&b2.dilate(rho2).map_err(err)?, policy).map_err(err)?;
    let rho2 = rho2 * kappa2;

    let alpha2 = a2.len() as f64 / b.len() as f64;
    let p = 2.0 + libm::log(1.0 / alpha2);
    let ell = libm::ceil(libm::log(2.0 / alpha2)).max(1.0);
    let theta = libm::pow(st.lambda, 1.0 - 1.0 / p) / (4.0 * E);
    let f = GroupFunction::indicator(&st.l);
    let x = almost_period_set(&f, &st.s[0], b3.members(), p, theta / (2.0 * ell))
        .and_then(|x| x.intersection(b3.members()))
        .map_err(err)?;
    let mass = spectral_mass(b, a2, &x, 0.5).map_err(err)?;
    let m_b = b.len() as f64 / b.modulus() as f64;
    let nu = (mass / (alpha2 * alpha2 * m_b) * (1.0 - 1e-9)).min(1.0);
    if !(nu > 0.0) {
        return Err(alloc::format!("f_A2 has no mass on Spec(μ_X) with |X| = {}", x.len()));
    }
    match l2_density_increment(b, &b3, rho * rho1 * rho2, a2, &x, 0.5, nu, policy).map_err(err)? {
        L2Outcome::Increment(inc) => Ok(Increment { index: 2, ..inc }),
        L2Outcome::Failed(f) => Err(alloc::format!(
            "L² increment measured {:.6} < target {:.6}",
            f.measured_sup, f.target
        )),
    }
}

fn densities(sets: &[SetOnZN; 3], b: &BohrSet) -> [Ratio<u64>; 3] {
    let size = b.len() as u64;
    [
        Ratio::new(sets[0].len() as u64, size),
        Ratio::new(sets[1].len() as u64, size),
        Ratio::new(sets[2].len() as u64, size),
    ]
}

fn iterate(name: &'static str, inputs: [&SetOnZN; 3], mode: Mode, policy: &Policy) -> Result<PipelineRun> {
    let (order, originals) = sorted_order(inputs)?;
    let n = originals[0].modulus();
    let r_orig = representation_counts(&originals[0], &originals[1], &originals[2])?;
    let cap = iteration_cap(&originals, policy);
    let (omega, v) = match mode {
        Mode::Support { omega } => (omega, 0.0),
        Mode::Thick { omega, v } => (omega, v),
    };

    let mut b = BohrSet::new(n, &[0], 2.0)?;
    let mut shifts = [0usize; 3];
    let mut sets = originals.clone();
    let mut trace: Vec<IterationState> = Vec::new();
    let mut run = PipelineRun {
        pipeline: name,
        order,
        z: 0,
        bohr: None,
        verified: VerifiedAp { ap: Ap::empty(), threshold: 1, counts: Vec::new() },
        provenance: Provenance::Constructive,
        trace: Vec::new(),
        iteration_cap: cap,
        cls_check: None,
        cls_attempts: 0,
        guarantee: None,
    };

    for step in 1..=cap {
        let bsize = b.len() as f64 / n as f64;
        let level = omega * bsize * bsize * (n as f64) * (n as f64);
        let k = libm::floor(level) as u64 + 1;
        let tilde: f64 = sets.iter().map(|s| s.len() as f64 / b.len() as f64).product();
        let d = b.dimension() as f64;
        let rho = policy.c_impl * tilde / (2.0 * (step * step) as f64 * d);
        let mut state = IterationState {
            step,
            bohr: b.clone(),
            sets: sets.clone(),
            shifts,
            densities: densities(&sets, &b),
            rho,
            omega,
            v,
            outcome: StepOutcome::Terminated,
        };
        run.verified.threshold = k;

        let attempt = (|| -> core::result::Result<(Option<Ap>, BohrSet, usize, Option<Increment>), String> {
            let err = |e: Error| e.to_string();
            let (kappa, b1) = find_regular_dilate(&b.dilate(rho).map_err(err)?, policy).map_err(err)?;
            let rho_eff = rho * kappa;
            let sc = scaling_translate(&b, &b1, rho_eff, &sets[2], policy).map_err(err)?;
            let x = sc.translate;
            let r_cur = representation_counts(&sets[0], &sets[1], &sets[2]).map_err(err)?;
            let lower = SetOnZN::from_residues(
                n,
                b1.members().iter().filter(|&y| r_cur[(x + y) % n] as f64 <= level).map(|y| y as u64),
            )
            .map_err(err)?;
            let done = match mode {
                Mode::Support { .. } => lower.is_empty(),
                Mode::Thick { v, .. } => (lower.len() as f64) < v * b1.len() as f64,
            };
            if done {
                let ap = match mode {
                    Mode::Support { .. } => ap_in_bohr(&b1).map_err(err)?.ap,
                    Mode::Thick { v, .. } => {
                        let thick = b1.members().difference(&lower).map_err(err)?;
                        thick_ap(&b1, &thick, v, policy).map_err(err)?
                    }
                };
                return Ok((Some(ap), b1, x, None));
            }
            let lower_arg = match mode {
                Mode::Support { .. } => None,
                Mode::Thick { .. } => Some(&lower),
            };
            let inc = find_increment(&b, &b1, rho_eff, &sets[0], &sets[1], &sc.set, lower_arg, policy)?;
            Ok((None, b1, x, Some(inc)))
        })();

        match attempt {
            Ok((Some(ap), b1, x, _)) => {
                let total = (x + shifts[0] + shifts[1] + shifts[2]) % n;
                let ap = ap.translate(total as i64, n);
                run.guarantee = Some(crate::bohr::ap_guarantee(&b1));
                run.z = total;
                run.bohr = Some(b1);
                run.verified = verify_with_counts(ap, &r_orig, k)?;
                trace.push(state);
                run.trace = trace;
                return Ok(run);
            }
            Ok((None, _, _, Some(inc))) => {
                let nb = inc.bohr.clone();
                let mut next = sets.clone();
                let mut next_shifts = shifts;
                for j in 0..3 {
                    let base = originals[j].translate(-(shifts[j] as i64));
                    let (xj, _) = best_translate(&base, nb.members())?;
                    next_shifts[j] = (shifts[j] + xj) % n;
                    next[j] = originals[j].translate(-(next_shifts[j] as i64)).intersection(nb.members())?;
                }
                let lhs = (next[0].len() as u128) * (next[1].len() as u128) * (b.len() as u128).pow(2);
                let rhs = (sets[0].len() as u128) * (sets[1].len() as u128) * (nb.len() as u128).pow(2);
                let gate_passed = ge_scaled(lhs, rhs, 1.0 + policy.c_impl / 4.0);
                state.outcome = StepOutcome::Increment { index: inc.index, density: inc.density, gate_passed };
                trace.push(state);
                if !gate_passed {
                    return fallback(run, trace, &r_orig, k, "density product grew too little".into());
                }
                b = nb;
                sets = next;
                shifts = next_shifts;
            }
            Ok((None, _, _, None)) => unreachable!(),
            Err(reason) => {
                state.outcome = StepOutcome::Failed(reason.clone());
                trace.push(state);
                return fallback(run, trace, &r_orig, k, reason);
            }
        }
    }
    let k = run.verified.threshold;
    fallback(run, trace, &r_orig, k, alloc::format!("iteration cap {cap} reached"))
}

fn fallback(mut run: PipelineRun, trace: Vec<IterationState>, r: &[u64], k: u64, reason: String) -> Result<PipelineRun> {
    run.verified = oracle_from_counts(r, k)?;
    run.z = run.verified.ap.start;
    run.trace = trace;
    run.provenance = Provenance::OracleOnly(reason);
    Ok(run)
}

/// Density-increment pipeline; ω = 0 asks only for membership in A1 + A2 + A3.
pub fn increment_pipeline(a1: &SetOnZN, a2: &SetOnZN, a3: &SetOnZN, policy: &Policy) -> Result<PipelineRun> {
    if !(policy.omega >= 0.0 && policy.omega < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("ω must lie in [0,1), got {}", policy.omega)));
    }
    iterate("increment", [a1, a2, a3], Mode::Support { omega: policy.omega }, policy)
}

/// (ω, v) for the level-set pipeline:
/// ω = N^{−cε/log(2/α̃)} and log(2/v) = c'ε^{1/2}α₁^{1/4}(log N)^{1/2}(log 2/α̃)^{−7/2}, v ≤ v_max.
pub fn levelset_parameters(n: usize, densities: [f64; 3], eps: f64, policy: &Policy) -> (f64, f64) {
    let tilde = densities[0] * densities[1] * densities[2];
    let log_n = libm::log(n as f64);
    let log_a = libm::log(2.0 / tilde);
    let omega = libm::exp(-policy.omega_power_const * eps / log_a * log_n);
    let exponent =
        policy.v_const * libm::sqrt(eps) * libm::pow(densities[0], 0.25) * libm::sqrt(log_n) * libm::pow(log_a, -3.5);
    let v = (2.0 * libm::exp(-exponent)).min(policy.v_max);
    (omega, v)
}

/// Level-set pipeline: a progression of length ≥ 4/v all of whose terms have
/// more than ωb²N² representations.
pub fn levelset_pipeline(a1: &SetOnZN, a2: &SetOnZN, a3: &SetOnZN, eps: f64, policy: &Policy) -> Result<PipelineRun> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("ε must lie in (0,1), got {eps}")));
    }
    let (_, sorted) = sorted_order([a1, a2, a3])?;
    let dens = [sorted[0].density_f64(), sorted[1].density_f64(), sorted[2].density_f64()];
    let (omega, v) = levelset_parameters(a1.modulus(), dens, eps, policy);
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("v must lie in (0,1), got {v}")));
    }
    iterate("levelset", [a1, a2, a3], Mode::Thick { omega, v }, policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(n: usize, m: usize) -> SetOnZN {
        SetOnZN::from_residues(n, (0..m as u64).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let g = SetOnZN::full(16).unwrap();
        let full = oracle_longest_ap(&g, &g, &g, 256).unwrap();
        assert_eq!(full.ap.length, 16);
        let none = oracle_longest_ap(&g, &g, &g, 257).unwrap();
        assert_eq!(none.ap.length, 0);
        let a = interval(32, 5);
        let out = oracle_longest_ap(&a, &a, &a, 1).unwrap();
        assert_eq!(out.ap, Ap { start: 0, step: 1, length: 13 });
    }

    #[test]
    fn longest_ap_wraps_around() {
        let u = SetOnZN::from_residues(12, [10, 11, 0, 1, 5]).unwrap();
        let ap = longest_ap(&u);
        assert_eq!(ap.length, 4);
        assert!(ap.is_inside(&u));
    }

    #[test]
    fn scaled_comparison_is_exact() {
        assert!(ge_scaled(1016, 1000, 1.015625));
        assert!(!ge_scaled(1015, 1000, 1.015625));
        assert!(ge_scaled(3, 1, 3.0));
        assert!(!ge_scaled(2, 1, 3.0));
    }

    #[test]
    fn pipelines_on_full_group() {
        let policy = Policy::default();
        let g = SetOnZN::full(64).unwrap();
        let cls = cls_pipeline(&g, &g, &g, &policy).unwrap();
        assert_eq!(cls.verified.ap.length, 64);
        assert_eq!(cls.verified.threshold, 2048);
        let inc = increment_pipeline(&g, &g, &g, &policy).unwrap();
        assert_eq!(inc.verified.ap.length, 64);
        assert_eq!(inc.provenance, Provenance::Constructive);
        let lvl = levelset_pipeline(&g, &g, &g, 0.5, &policy).unwrap();
        assert_eq!(lvl.verified.ap.length, 64);
        assert_eq!(lvl.verified.min_count(), Some(64 * 64));
    }

    #[test]
    fn thick_ap_examples() {
        let policy = Policy::default();
        let b = BohrSet::new(4096, &[1], 0.5).unwrap();
        let all = b.members().clone();
        let ap = thick_ap(&b, &all, 0.5, &policy).unwrap();
        assert!(ap.length >= 8 && ap.is_inside(&all));
        let base = ap_in_bohr(&b).unwrap().ap;
        let mut holes = all.clone();
        for (i, w) in base.elements(4096).into_iter().enumerate() {
            if i % 2 == 1 && holes.len() > all.len() / 2 + 1 {
                holes.remove(w);
            }
        }
        let ap = thick_ap(&b, &holes, 0.5, &policy).unwrap();
        assert!(ap.length >= 8 && ap.is_inside(&holes));
    }
}
