//! Regression fixtures: seeded computations whose text output is locked on disk.

use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};

use aplab_core::almost_period::{almost_period_set, cls_bohr_almost_periods, smoothing_defect};
use aplab_core::bohr::{averaging_defect_point, find_regular_dilate};
use aplab_core::cyclic::spectrum;
use aplab_core::pipelines::{cls_pipeline, increment_pipeline, levelset_pipeline, thick_ap, PipelineRun};
use aplab_core::setgen::{bohr_sample, random_set};
use aplab_core::transforms::{
    katz_koester_2, katz_koester_3, l2_density_increment, scaling_translate, spectrum_annihilate, IncrementOutcome,
    L2Outcome,
};
use aplab_core::{BohrSet, GroupFunction, Policy, SetOnZN};
use rayon::prelude::*;

use crate::error::{io_err, Error, Result};
use crate::instances::{instance, Family};
use crate::sweep::{run_sweep, SweepConfig};
use crate::trace::json_lines;

type Producer = fn() -> Result<String>;

/// Every fixture, by file stem.
pub const REGISTRY: &[(&str, Producer)] = &[
    ("setgen_random_n1024", setgen_random),
    ("bohr_regular_n128", bohr_regular),
    ("almost_period_n64", almost_period),
    ("smoothing_n64", smoothing),
    ("cls_bohr_n512", cls_bohr),
    ("annihilate_n512", annihilate),
    ("l2_increment_n512", l2_increment),
    ("katz_koester2_n512", kk2),
    ("katz_koester3_n512", kk3),
    ("scaling_n512", scaling),
    ("cls_point_third_set", cls_point),
    ("cls_n2048", cls_dense),
    ("increment_planted_n1024", increment_planted),
    ("levelset_n1024", levelset),
    ("thick_ap_n2048", thick),
    ("sweep_3x3", sweep_grid),
];

#[derive(Default)]
struct Out(String);

impl Out {
    fn kv(&mut self, key: &str, value: impl Display) -> &mut Self {
        writeln!(self.0, "{key}={value}").unwrap();
        self
    }

    fn set(&mut self, key: &str, s: &SetOnZN) -> &mut Self {
        let items: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        self.kv(key, items.join(","))
    }

    fn bohr(&mut self, key: &str, b: &BohrSet) -> &mut Self {
        let gamma: Vec<String> = b.frequencies().iter().map(|g| g.to_string()).collect();
        self.kv(&format!("{key}.gamma"), gamma.join(","))
            .kv(&format!("{key}.delta"), format!("{:?}", b.radius()))
            .kv(&format!("{key}.size"), b.len())
    }

    fn outcome(&mut self, out: aplab_core::Result<IncrementOutcome>) -> &mut Self {
        match out {
            Ok(IncrementOutcome::Structure(st)) => {
                self.kv("outcome", "structure").kv("K", st.k).kv("iterations", st.iterations).set("L", &st.l);
                for (i, s) in st.s.iter().enumerate() {
                    self.set(&format!("S{}", i + 1), s);
                }
                self
            }
            Ok(IncrementOutcome::Increment(inc)) => self
                .kv("outcome", "increment")
                .bohr("bohr", &inc.bohr)
                .kv("index", inc.index)
                .kv("translate", inc.translate)
                .kv("count", inc.count),
            Err(e) => self.kv("outcome", "error").kv("error", e),
        }
    }

    fn run(&mut self, run: aplab_core::Result<PipelineRun>) -> Result<&mut Self> {
        match run {
            Ok(run) => {
                let counts: Vec<String> = run.verified.counts.iter().map(|c| c.to_string()).collect();
                self.kv("counts", counts.join(","));
                self.0.push_str(&json_lines(&run, 0)?);
            }
            Err(e) => {
                self.kv("error", e);
            }
        }
        Ok(self)
    }
}

fn regular(n: usize, gamma: &[usize], delta: f64) -> Result<BohrSet> {
    Ok(find_regular_dilate(&BohrSet::new(n, gamma, delta)?, &Policy::default())?.1)
}

fn setgen_random() -> Result<String> {
    let mut o = Out::default();
    o.kv("cardinality", random_set(1024, 0.3, 7)?.len());
    Ok(o.0)
}

fn bohr_regular() -> Result<String> {
    let policy = Policy::default();
    let (kappa, b) = find_regular_dilate(&BohrSet::new(128, &[1], 1.0)?, &policy)?;
    let rho = 1.0 / (2.0 * policy.c0);
    let x = b.dilate(rho)?.members().iter().max().unwrap_or(0);
    let mut o = Out::default();
    o.kv("kappa", format!("{kappa:?}")).bohr("regular", &b).kv("x", x).kv("defect", averaging_defect_point(&b, x));
    Ok(o.0)
}

fn ap_inputs() -> Result<(SetOnZN, SetOnZN)> {
    Ok((random_set(64, 0.25, 1)?, random_set(64, 0.25, 2)?))
}

fn almost_period() -> Result<String> {
    let (a, s) = ap_inputs()?;
    let x = almost_period_set(&GroupFunction::indicator(&a), &s, &SetOnZN::full(64)?, 2.0, 0.5)?;
    let mut o = Out::default();
    o.kv("size", x.len()).set("X", &x);
    Ok(o.0)
}

fn smoothing() -> Result<String> {
    let (a, s) = ap_inputs()?;
    let f = GroupFunction::indicator(&a);
    let (ell, theta) = (2u32, 0.5);
    let x = almost_period_set(&f, &s, &SetOnZN::full(64)?, 2.0, theta / (2.0 * ell as f64))?;
    let defect = smoothing_defect(&f, &s, &x, ell, 2.0)?;
    let mut o = Out::default();
    o.kv("size", x.len()).kv("defect", format!("{defect:.12e}")).kv("bound", format!("{:.12e}", theta * f.lp_norm(2.0)?));
    Ok(o.0)
}

fn cls_bohr() -> Result<String> {
    let (a1, a2) = (random_set(512, 0.3, 11)?, random_set(512, 0.3, 12)?);
    let out = cls_bohr_almost_periods(&a1, &a2, 4.0, 0.2, Policy::default().cls_max_halvings)?;
    let spec = spectrum(&GroupFunction::measure(&a2)?, 0.05)?;
    let mut o = Out::default();
    o.bohr("bohr", &out.bohr)
        .kv("halvings", out.halvings)
        .kv("spec_size", spec.frequencies().len())
        .kv("worst", format!("{:.12e}", out.worst_distance))
        .kv("bound", format!("{:.12e}", out.bound));
    Ok(o.0)
}

fn annihilate() -> Result<String> {
    let b = regular(512, &[1], 1.5)?;
    let pool = bohr_sample(&b, 0.2, 5)?;
    let x = SetOnZN::from_residues(512, pool.iter().take(20).map(|v| v as u64))?;
    let out = spectrum_annihilate(&b, &x, 0.5, &Policy::default())?;
    let mut o = Out::default();
    let gens: Vec<String> = out.generators.iter().map(|g| g.to_string()).collect();
    o.set("X", &x).kv("generators", gens.join(",")).kv("word_length", out.word_length).bohr("bohr", &out.bohr);
    Ok(o.0)
}

fn l2_increment() -> Result<String> {
    let policy = Policy::default();
    let n = 512;
    let g = BohrSet::new(n, &[0], 2.0)?;
    let structured = BohrSet::new(n, &[1], 1.0)?;
    let a = SetOnZN::from_residues(n, structured.members().iter().filter(|&x| x < n / 2).map(|x| x as u64))?;
    let x = BohrSet::new(n, &[1], 0.05)?.members().clone();
    let mut o = Out::default();
    match l2_density_increment(&g, &g, policy.c_impl * 0.05, &a, &x, 0.5, 1.0, &policy) {
        Ok(L2Outcome::Increment(inc)) => {
            o.kv("outcome", "increment").bohr("bohr", &inc.bohr).kv("translate", inc.translate).kv("count", inc.count);
        }
        Ok(L2Outcome::Failed(f)) => {
            o.kv("outcome", "failed").kv("sup", format!("{:.12e}", f.measured_sup)).kv("target", format!("{:.12e}", f.target));
        }
        Err(e) => {
            o.kv("outcome", "error").kv("error", e);
        }
    }
    Ok(o.0)
}

struct KkInstance {
    b: BohrSet,
    b1: BohrSet,
    b2: BohrSet,
    a: SetOnZN,
    a1: SetOnZN,
    rho: f64,
    rho1: f64,
}

fn kk_instance(seed: u64) -> Result<KkInstance> {
    let policy = Policy::default();
    let b = regular(512, &[1], 1.5)?;
    let a = bohr_sample(&b, 0.4, seed)?;
    let rho = policy.c_impl * 0.35 / b.dimension() as f64;
    let (k1, b1) = find_regular_dilate(&b.dilate(rho)?, &policy)?;
    let a1 = bohr_sample(&b1, 0.4, seed + 1)?;
    let rho1 = policy.c_impl * 0.3 / b1.dimension() as f64;
    let (k2, b2) = find_regular_dilate(&b1.dilate(rho1)?, &policy)?;
    Ok(KkInstance { b, b1, b2, a, a1, rho: rho * k1, rho1: rho1 * k2 })
}

fn kk2() -> Result<String> {
    let k = kk_instance(1)?;
    let mut o = Out::default();
    o.outcome(katz_koester_2(&k.b, &k.b1, &k.b2, &k.a, &k.a1, k.rho, k.rho1, &Policy::default()));
    Ok(o.0)
}

fn kk3() -> Result<String> {
    let k = kk_instance(2)?;
    let a2 = bohr_sample(&k.b1, 0.4, 9)?;
    let mut o = Out::default();
    o.outcome(katz_koester_3(&k.b, &k.b1, &k.b2, &k.a, &k.a1, &a2, k.rho, k.rho1, &Policy::default()));
    Ok(o.0)
}

fn scaling() -> Result<String> {
    let policy = Policy::default();
    let b = regular(512, &[3], 1.2)?;
    let a = bohr_sample(&b, 0.4, 11)?;
    let rho = policy.c_impl / b.dimension() as f64;
    let (kappa, b1) = find_regular_dilate(&b.dilate(rho)?, &policy)?;
    let out = scaling_translate(&b, &b1, rho * kappa, &a, &policy)?;
    let mut o = Out::default();
    o.kv("x", out.translate).kv("density", out.density).kv("bound_checked", out.bound_checked);
    Ok(o.0)
}

fn cls_point() -> Result<String> {
    let a = random_set(256, 0.4, 1)?;
    let b = random_set(256, 0.4, 2)?;
    let c = SetOnZN::from_residues(256, [0])?;
    let mut o = Out::default();
    o.run(cls_pipeline(&a, &b, &c, &Policy::default()))?;
    Ok(o.0)
}

fn cls_dense() -> Result<String> {
    let [a, b, c] = instance(Family::Random, 2048, [0.3; 3], 1)?;
    let mut o = Out::default();
    o.run(cls_pipeline(&a, &b, &c, &Policy::default()))?;
    Ok(o.0)
}

fn increment_planted() -> Result<String> {
    let [a, b, c] = instance(Family::Planted, 1024, [0.35; 3], 1)?;
    let mut o = Out::default();
    o.run(increment_pipeline(&a, &b, &c, &Policy::default()))?;
    Ok(o.0)
}

fn levelset() -> Result<String> {
    let [a, b, c] = instance(Family::Random, 1024, [0.35; 3], 1)?;
    let mut o = Out::default();
    o.run(levelset_pipeline(&a, &b, &c, 0.5, &Policy::default()))?;
    Ok(o.0)
}

fn thick() -> Result<String> {
    let b = BohrSet::new(2048, &[1], 0.5)?;
    let v = bohr_sample(&b, 0.95, 3)?;
    let mut o = Out::default();
    o.kv("size", b.len()).kv("v_size", v.len());
    match thick_ap(&b, &v, 0.1, &Policy::default()) {
        Ok(ap) => o.kv("start", ap.start).kv("step", ap.step).kv("length", ap.length),
        Err(e) => o.kv("error", e),
    };
    Ok(o.0)
}

/// The 3×3 grid N ∈ {512, 1024, 2048} × α ∈ {0.2, 0.3, 0.4} with base seed 1.
pub const SWEEP_3X3: &str = "N=512\nN=1024\nN=2048\nalpha=0.2\nalpha=0.3\nalpha=0.4\nbase_seed=1\n";

fn sweep_grid() -> Result<String> {
    run_sweep(&SweepConfig::parse(SWEEP_3X3)?, 0)?.to_csv(false)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Match,
    Drift { line: usize, expected: String, actual: String },
    Missing,
    Failed(String),
}

#[derive(Debug, Default)]
pub struct Report {
    pub entries: Vec<(String, Status)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|(_, s)| *s == Status::Match)
    }

    /// Names of fixtures that did not match.
    pub fn drifts(&self) -> Vec<&str> {
        self.entries.iter().filter(|(_, s)| *s != Status::Match).map(|(n, _)| n.as_str()).collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (name, status) in &self.entries {
            match status {
                Status::Match => writeln!(s, "ok      {name}"),
                Status::Missing => writeln!(s, "MISSING {name}"),
                Status::Failed(e) => writeln!(s, "FAILED  {name}: {e}"),
                Status::Drift { line, expected, actual } => {
                    writeln!(s, "DRIFT   {name} line {line}: expected {expected:?}, got {actual:?}")
                }
            }
            .unwrap();
        }
        s
    }
}

fn path_of(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.txt"))
}

/// The fixture directory shipped with the crate.
pub fn default_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn compare(expected: &str, actual: &str) -> Status {
    if expected == actual {
        return Status::Match;
    }
    let (e, a): (Vec<&str>, Vec<&str>) = (expected.lines().collect(), actual.lines().collect());
    let line = (0..e.len().max(a.len())).find(|&i| e.get(i) != a.get(i)).unwrap_or(e.len());
    Status::Drift {
        line: line + 1,
        expected: e.get(line).unwrap_or(&"<eof>").to_string(),
        actual: a.get(line).unwrap_or(&"<eof>").to_string(),
    }
}

/// Re-runs every fixture and compares it byte for byte with the stored file.
pub fn verify_fixtures(dir: &Path) -> Report {
    let entries = REGISTRY
        .par_iter()
        .map(|(name, produce)| {
            let status = match std::fs::read_to_string(path_of(dir, name)) {
                Err(_) => Status::Missing,
                Ok(expected) => match produce() {
                    Ok(actual) => compare(&expected, &actual),
                    Err(e) => Status::Failed(e.to_string()),
                },
            };
            (name.to_string(), status)
        })
        .collect();
    Report { entries }
}

/// Regenerates every fixture file.
pub fn bless(dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let produced: Vec<(String, Result<String>)> =
        REGISTRY.par_iter().map(|(name, produce)| (name.to_string(), produce())).collect();
    let mut written = Vec::new();
    for (name, text) in produced {
        let path = path_of(dir, &name);
        std::fs::write(&path, text?).map_err(io_err(&path))?;
        written.push(name);
    }
    Ok(written)
}

/// Text of a single fixture, or an error if the name is unknown.
pub fn produce(name: &str) -> Result<String> {
    let (_, f) = REGISTRY.iter().find(|(n, _)| *n == name).ok_or_else(|| Error::MissingFixture(name.into()))?;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut names: Vec<&str> = REGISTRY.iter().map(|(n, _)| *n).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), REGISTRY.len());
    }

    #[test]
    fn drift_points_at_first_difference() {
        assert_eq!(compare("a\nb\n", "a\nb\n"), Status::Match);
        assert_eq!(
            compare("a\nb\n", "a\nc\n"),
            Status::Drift { line: 2, expected: "b".into(), actual: "c".into() }
        );
        assert!(matches!(compare("a\n", "a\nb\n"), Status::Drift { line: 2, .. }));
    }

    #[test]
    fn small_fixtures_are_deterministic() {
        for name in ["setgen_random_n1024", "bohr_regular_n128", "almost_period_n64"] {
            assert_eq!(produce(name).unwrap(), produce(name).unwrap());
        }
        assert!(produce("nope").is_err());
    }
}
