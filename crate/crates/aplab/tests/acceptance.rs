use std::io::Write as _;
use std::time::{Duration, Instant};

use aplab::fixtures::{default_dir, verify_fixtures, SWEEP_3X3};
use aplab::instances::{bohr_corpus, instance, mix_seed, Family};
use aplab::sweep::{run_sweep, Pipeline, SweepConfig};
use aplab_core::almost_period::{almost_period_set, smoothing_defect};
use aplab_core::bohr::{ap_in_bohr, averaging_defect_point, check_doubling, check_size, find_regular_dilate};
use aplab_core::cyclic::{representation_counts, representation_counts_float};
use aplab_core::pipelines::cls_pipeline;
use aplab_core::setgen::{freiman_embed, primes_upto, random_set};
use aplab_core::{BohrSet, GroupFunction, Policy, SetOnZN};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn report(id: usize, title: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = run();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = out.pass && in_time;
    let timing = if in_time { String::new() } else { format!(", over the {limit:?} limit") };
    let line = format!(
        "criterion {id} {}: {title} ({}; {:.2}s{timing})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    writeln!(std::io::stderr().lock(), "{line}").unwrap();
    pass
}

fn random_triple(rng: &mut ChaCha8Rng, n: usize) -> [SetOnZN; 3] {
    std::array::from_fn(|_| {
        let alpha = rng.gen_range(0.05..0.9);
        SetOnZN::from_residues(n, (0..n as u64).filter(|_| rng.gen_bool(alpha))).unwrap()
    })
}

/// Pair convolution by double loop, then a second double loop against C.
fn double_loop_counts(a: &SetOnZN, b: &SetOnZN, c: &SetOnZN) -> Vec<u64> {
    let n = a.modulus();
    let mut ab = vec![0u64; n];
    for x in a.iter() {
        for y in b.iter() {
            ab[(x + y) % n] += 1;
        }
    }
    let mut r = vec![0u64; n];
    for (s, &count) in ab.iter().enumerate() {
        if count > 0 {
            for z in c.iter() {
                r[(s + z) % n] += count;
            }
        }
    }
    r
}

fn exact_kernels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    let mut total = 0;
    for n in [16, 64, 128] {
        for _ in 0..100 {
            let [a, b, c] = random_triple(&mut rng, n);
            total += 1;
            if representation_counts(&a, &b, &c).unwrap() != double_loop_counts(&a, &b, &c) {
                mismatches += 1;
            }
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in {total} triples"))
}

fn random_function(rng: &mut ChaCha8Rng, n: usize) -> GroupFunction {
    let v = (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    GroupFunction::new(n, v).unwrap()
}

fn fourier_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut conv_bad, mut parseval_bad, mut cases) = (0, 0, 0);
    let mut worst = 0.0f64;
    for n in [60, 64, 101, 1024] {
        for _ in 0..200 {
            cases += 1;
            let f = random_function(&mut rng, n);
            let g = random_function(&mut rng, n);
            let (fh, gh) = (f.dft(), g.dft());
            let lhs = f.convolve(&g).unwrap().dft();
            let max_f = fh.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
            let max_g = gh.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
            let err = (0..n).map(|k| (lhs.value(k) - fh.value(k) * gh.value(k)).norm()).fold(0.0, f64::max);
            let bound = 1e-9 * (1.0 + max_f * max_g);
            worst = worst.max(err / bound);
            conv_bad += (err > bound) as usize;

            let inner = f.inner_product(&g).unwrap();
            let spectral: Complex64 = (0..n).map(|k| fh.value(k) * gh.value(k).conj()).sum();
            let bound = 1e-9 * (1.0 + f.lp_norm(2.0).unwrap() * g.lp_norm(2.0).unwrap());
            let err = (inner - spectral).norm();
            worst = worst.max(err / bound);
            parseval_bad += (err > bound) as usize;
        }
    }
    outcome(
        conv_bad + parseval_bad == 0,
        format!("{cases} cases per identity, {conv_bad} convolution and {parseval_bad} Parseval violations, worst error {worst:.1e} of tolerance"),
    )
}

fn corpus() -> Vec<BohrSet> {
    bohr_corpus(200, 3).into_iter().map(|s| BohrSet::new(s.modulus, &s.gamma, s.delta).unwrap()).collect()
}

fn bohr_lemmas() -> Outcome {
    let sets = corpus();
    let (mut doubling, mut size, mut ap_bad, mut via_subgroup) = (0, 0, 0, 0);
    for b in &sets {
        doubling += !check_doubling(b) as usize;
        size += !check_size(b) as usize;
        let found = ap_in_bohr(b).unwrap();
        if !found.ap.is_inside(b.members()) || !found.meets_guarantee() {
            ap_bad += 1;
        } else if found.ap.length < found.guarantee {
            via_subgroup += 1;
        }
    }
    outcome(
        doubling + size + ap_bad == 0,
        format!(
            "{} sets: {doubling} doubling, {size} size and {ap_bad} progression violations; {via_subgroup} guarantees met by a subgroup of B",
            sets.len()
        ),
    )
}

fn regularity() -> Outcome {
    let policy = Policy::default();
    let sets = corpus();
    let mut failed = Vec::new();
    let mut defect_bad = 0;
    let mut checked = 0;
    for (i, b) in sets.iter().enumerate() {
        let Ok((_, reg)) = find_regular_dilate(b, &policy) else {
            failed.push(i);
            continue;
        };
        let d = reg.dimension() as f64;
        for rho in [1.0 / (2.0 * policy.c0 * d), 1.0 / (8.0 * policy.c0 * d)] {
            let members = reg.dilate(rho).unwrap().members().to_vec();
            let bound = 2.0 * policy.c0 * rho * d;
            for j in 0..20 {
                let x = members[j * members.len() / 20];
                let defect = averaging_defect_point(&reg, x);
                checked += 1;
                if *defect.numer() as f64 > bound * *defect.denom() as f64 {
                    defect_bad += 1;
                }
            }
        }
    }
    let ok = sets.len() - failed.len();
    let pass = ok * 100 >= 95 * sets.len() && defect_bad == 0;
    outcome(
        pass,
        format!(
            "{ok}/{} regular dilates found, failures {failed:?}; {defect_bad} defect violations in {checked} samples",
            sets.len()
        ),
    )
}

fn almost_periodicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 256;
    let (ell, theta) = (2u32, 0.5);
    let mut violations = 0;
    let mut worst = 0.0f64;
    let mut sizes = Vec::new();
    for _ in 0..20 {
        let a = random_set(n, rng.gen_range(0.1..0.6), rng.gen()).unwrap();
        let s = random_set(n, rng.gen_range(0.1..0.6), rng.gen()).unwrap();
        let f = GroupFunction::indicator(&a);
        for p in [2.0, 4.0] {
            let x = almost_period_set(&f, &s, &SetOnZN::full(n).unwrap(), p, theta / (2.0 * ell as f64)).unwrap();
            let defect = smoothing_defect(&f, &s, &x, ell, p).unwrap();
            let bound = theta * f.lp_norm(p).unwrap();
            worst = worst.max(defect / bound);
            violations += (defect > bound) as usize;
            sizes.push(x.len());
        }
    }
    let min = sizes.iter().min().unwrap();
    outcome(
        violations == 0,
        format!("{violations} violations in 40 checks, worst defect {worst:.3} of the bound, |X| >= {min}"),
    )
}

fn soundness_config() -> SweepConfig {
    let text = "N=512\nN=1024\nN=2048\nalpha=0.2\nalpha=0.3\nalpha=0.4\nseeds=5\nbase_seed=6\nomega=0\n";
    SweepConfig::parse(text).unwrap()
}

fn pipeline_soundness(rows: &[aplab::sweep::Row]) -> Outcome {
    let mut violations = Vec::new();
    let mut errors = 0;
    let mut branches = std::collections::BTreeMap::<(&str, &str), usize>::new();
    for row in rows {
        *branches.entry((row.pipeline.name(), row.branch)).or_default() += 1;
        if !row.ok() {
            errors += 1;
            continue;
        }
        let p = &row.point;
        let [a, b, c] = instance(p.family, p.modulus, p.densities, p.seed).unwrap();
        let r = representation_counts_float(&a, &b, &c).unwrap();
        let n = a.modulus();
        if row.ap.elements(n).iter().any(|&w| r[w] < row.threshold) {
            violations.push(format!("{} N={} seed={}", row.pipeline.name(), p.modulus, p.seed));
        }
        if row.pipeline == Pipeline::Increment && row.threshold == 1 {
            let support = a.sumset(&b).unwrap().sumset(&c).unwrap();
            if !row.ap.is_inside(&support) {
                violations.push(format!("support {} seed={}", p.modulus, p.seed));
            }
        }
    }

    let policy = Policy::default();
    let mut cls_pass = 0;
    for i in 0..20 {
        let [a, b, c] = instance(Family::Random, 2048, [0.3; 3], mix_seed(60, i)).unwrap();
        let run = cls_pipeline(&a, &b, &c, &policy).unwrap();
        cls_pass += (run.cls_check == Some(true)) as usize;
    }
    let branch_text: Vec<String> = branches.iter().map(|((p, b), n)| format!("{p}/{b}={n}")).collect();
    outcome(
        violations.is_empty() && errors == 0 && cls_pass >= 18,
        format!(
            "{} runs, {} oracle violations, {errors} errors; cls check held on {cls_pass}/20; branches {}",
            rows.len(),
            violations.len(),
            branch_text.join(" ")
        ),
    )
}

fn discipline_counts(rows: &[aplab::sweep::Row]) -> (usize, usize, usize) {
    let (mut steps, mut gate_fail, mut over_cap) = (0, 0, 0);
    for row in rows.iter().filter(|r| r.pipeline != Pipeline::Cls) {
        steps += row.gates.1;
        gate_fail += row.gates.1 - row.gates.0;
        over_cap += (row.steps > row.cap) as usize;
    }
    (steps, gate_fail, over_cap)
}

/// The criterion-6 sweep plus the same grid on planted sets, where increments actually occur.
fn iteration_discipline(rows: &[aplab::sweep::Row]) -> Outcome {
    let mut cfg = soundness_config();
    cfg.families = vec![Family::Planted];
    cfg.pipelines = vec![Pipeline::Increment, Pipeline::Levelset];
    let planted = run_sweep(&cfg, 0).unwrap().rows;
    let (s1, g1, c1) = discipline_counts(rows);
    let (s2, g2, c2) = discipline_counts(&planted);
    outcome(
        g1 + g2 + c1 + c2 == 0,
        format!(
            "random sweep: {s1} increment steps, {g1} below the growth gate, {c1} over the cap; \
             planted sweep ({} runs): {s2} increment steps, {g2} below the gate, {c2} over the cap",
            planted.len()
        ),
    )
}

/// All unordered triple pairs compared in Z and in Z/6nZ.
fn six_tuple_iff(a: &[u64], embedded: &[usize], modulus: u64) -> bool {
    let k = a.len();
    let mut triples = Vec::new();
    for i in 0..k {
        for j in i..k {
            for l in j..k {
                triples.push((a[i] + a[j] + a[l], (embedded[i] + embedded[j] + embedded[l]) as u64 % modulus));
            }
        }
    }
    triples.iter().all(|&(s, e)| triples.iter().all(|&(t, f)| (s == t) == (e == f)))
}

fn freiman() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cases: Vec<(Vec<u64>, u64)> = Vec::new();
    for _ in 0..150 {
        let n = rng.gen_range(1..=60u64);
        let k = rng.gen_range(1..=25.min(n as usize));
        let mut a: Vec<u64> = rand::seq::index::sample(&mut rng, n as usize, k).into_iter().map(|x| x as u64 + 1).collect();
        a.sort_unstable();
        cases.push((a, n));
    }
    for n in [10u64, 30, 60] {
        cases.push((primes_upto(n as usize).into_iter().map(|p| p as u64).collect(), n));
    }
    let mut failures = 0;
    for (a, n) in &cases {
        let e = freiman_embed(a, *n).unwrap();
        let ok = e.len() == a.len() && six_tuple_iff(a, &e.to_vec(), e.modulus() as u64);
        failures += !ok as usize;
    }
    outcome(failures == 0, format!("{failures} failures in {} sets including primes up to 60", cases.len()))
}

fn reproducibility() -> Outcome {
    let cfg = SweepConfig::parse(SWEEP_3X3).unwrap();
    let first = run_sweep(&cfg, 0).unwrap().to_csv(false).unwrap();
    let second = run_sweep(&cfg, 0).unwrap().to_csv(false).unwrap();
    let single = run_sweep(&cfg, 1).unwrap().to_csv(false).unwrap();
    let report = verify_fixtures(&default_dir());
    let identical = first == second && first == single;
    outcome(
        identical && report.passed(),
        format!(
            "repeated sweeps identical: {identical}; fixtures {}/{} match{}",
            report.entries.len() - report.drifts().len(),
            report.entries.len(),
            if report.passed() { String::new() } else { format!(", drifts {:?}", report.drifts()) }
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let secs = Duration::from_secs;
    let mut results = vec![
        report(1, "exact-kernel equivalence", secs(5), exact_kernels),
        report(2, "Fourier identities", secs(5), fourier_identities),
        report(3, "Bohr lemma suite", secs(30), bohr_lemmas),
        report(4, "regularity", secs(60), regularity),
        report(5, "almost-periodicity", secs(60), almost_periodicity),
    ];

    let start = Instant::now();
    let sweep = run_sweep(&soundness_config(), 0).unwrap();
    let sweep_time = start.elapsed();
    results.push(report(6, "pipeline soundness", secs(600).saturating_sub(sweep_time), || {
        pipeline_soundness(&sweep.rows)
    }));
    results.push(report(7, "iteration discipline", secs(600), || iteration_discipline(&sweep.rows)));
    results.push(report(8, "Freiman embedding", secs(10), freiman));
    results.push(report(9, "reproducibility", secs(600), reproducibility));

    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, &ok)| !ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
