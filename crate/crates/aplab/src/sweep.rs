//! Grid sweeps over pipelines with deterministic CSV output.
//!
//! A config is a flat `key=value` file; repeating a key adds a grid value.
//!
//! ```text
//! N=512
//! N=1024
//! family=random
//! alpha=0.3
//! pipeline=cls
//! pipeline=increment
//! seeds=5
//! base_seed=1
//! ```
//!
//! `beta` and `gamma` default to the `alpha` value of the same grid point.
//! Any policy key may also appear once. The seed of grid point `i` is
//! `mix_seed(base_seed, i)`; all pipelines at one grid point share its sets.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use aplab_core::cyclic::representation_counts;
use aplab_core::pipelines::{cls_pipeline, increment_pipeline, levelset_pipeline, PipelineRun};
use aplab_core::{Ap, Policy};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instances::{instance, mix_seed, Family};
use crate::io::{apply_policy_key, key_values, parse_num};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pipeline {
    Cls,
    Increment,
    Levelset,
}

impl Pipeline {
    pub const ALL: [Pipeline; 3] = [Pipeline::Cls, Pipeline::Increment, Pipeline::Levelset];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Cls => "cls",
            Pipeline::Increment => "increment",
            Pipeline::Levelset => "levelset",
        }
    }

    pub fn run(self, sets: &[aplab_core::SetOnZN; 3], eps: f64, policy: &Policy) -> aplab_core::Result<PipelineRun> {
        let [a, b, c] = sets;
        match self {
            Pipeline::Cls => cls_pipeline(a, b, c, policy),
            Pipeline::Increment => increment_pipeline(a, b, c, policy),
            Pipeline::Levelset => levelset_pipeline(a, b, c, eps, policy),
        }
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pipeline::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| Error::Config(format!("unknown pipeline {s}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub moduli: Vec<usize>,
    pub families: Vec<Family>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub pipelines: Vec<Pipeline>,
    pub seeds: usize,
    pub base_seed: u64,
    pub eps: f64,
    pub policy: Policy,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            moduli: Vec::new(),
            families: vec![Family::Random],
            alphas: Vec::new(),
            betas: Vec::new(),
            gammas: Vec::new(),
            pipelines: Pipeline::ALL.to_vec(),
            seeds: 1,
            base_seed: 1,
            eps: 0.5,
            policy: Policy::default(),
        }
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        let (mut families, mut pipelines) = (Vec::new(), Vec::new());
        for (line, k, v) in key_values(text)? {
            match k.as_str() {
                "N" => cfg.moduli.push(parse_num(line, &k, &v)?),
                "family" => families.push(v.parse()?),
                "alpha" => cfg.alphas.push(parse_num(line, &k, &v)?),
                "beta" => cfg.betas.push(parse_num(line, &k, &v)?),
                "gamma" => cfg.gammas.push(parse_num(line, &k, &v)?),
                "pipeline" => pipelines.push(v.parse()?),
                "seeds" => cfg.seeds = parse_num(line, &k, &v)?,
                "base_seed" => cfg.base_seed = parse_num(line, &k, &v)?,
                "eps" => cfg.eps = parse_num(line, &k, &v)?,
                _ if cfg.policy.get(&k).is_some() => apply_policy_key(&mut cfg.policy, line, &k, &v)?,
                _ => return Err(Error::Config(format!("line {line}: unknown key {k}"))),
            }
        }
        if !families.is_empty() {
            cfg.families = families;
        }
        if !pipelines.is_empty() {
            cfg.pipelines = pipelines;
        }
        if let Some(&n) = cfg.moduli.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!("N={n} is below 2")));
        }
        for &a in cfg.alphas.iter().chain(&cfg.betas).chain(&cfg.gammas) {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Config(format!("density {a} outside (0, 1]")));
            }
        }
        if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
            return Err(Error::Config(format!("eps={} outside (0, 1)", cfg.eps)));
        }
        Ok(cfg)
    }

    /// Grid points in emission order: N, family, α, β, γ, replicate.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &n in &self.moduli {
            for &family in &self.families {
                for &alpha in &self.alphas {
                    let betas = if self.betas.is_empty() { vec![alpha] } else { self.betas.clone() };
                    let gammas = if self.gammas.is_empty() { vec![alpha] } else { self.gammas.clone() };
                    for &beta in &betas {
                        for &gamma in &gammas {
                            for _ in 0..self.seeds {
                                let seed = mix_seed(self.base_seed, out.len() as u64);
                                out.push(GridPoint { modulus: n, family, densities: [alpha, beta, gamma], seed });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub modulus: usize,
    pub family: Family,
    pub densities: [f64; 3],
    pub seed: u64,
}

pub const HEADER: [&str; 20] = [
    "N", "family", "alpha", "beta", "gamma", "seed", "pipeline", "omega", "K", "ap_start", "ap_step", "ap_length",
    "guarantee", "min_count", "steps", "cap", "gates", "cls_check", "branch", "status",
];

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub point: GridPoint,
    pub pipeline: Pipeline,
    pub omega: Option<f64>,
    pub threshold: u64,
    pub ap: Ap,
    pub guarantee: Option<usize>,
    pub min_count: Option<u64>,
    pub steps: usize,
    pub cap: usize,
    pub gates: (usize, usize),
    pub cls_check: Option<bool>,
    pub branch: &'static str,
    pub status: String,
    pub wall_ms: u128,
}

impl Row {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    fn fields(&self, timing: bool) -> Vec<String> {
        let opt = |o: Option<String>| o.unwrap_or_default();
        let p = &self.point;
        let mut f = vec![
            p.modulus.to_string(),
            p.family.to_string(),
            p.densities[0].to_string(),
            p.densities[1].to_string(),
            p.densities[2].to_string(),
            p.seed.to_string(),
            self.pipeline.name().to_string(),
            opt(self.omega.map(|w| format!("{w:.6e}"))),
            self.threshold.to_string(),
            self.ap.start.to_string(),
            self.ap.step.to_string(),
            self.ap.length.to_string(),
            opt(self.guarantee.map(|g| g.to_string())),
            opt(self.min_count.map(|c| c.to_string())),
            self.steps.to_string(),
            self.cap.to_string(),
            format!("{}/{}", self.gates.0, self.gates.1),
            opt(self.cls_check.map(|c| c.to_string())),
            self.branch.to_string(),
            self.status.clone(),
        ];
        if timing {
            f.push(self.wall_ms.to_string());
        }
        f
    }
}

fn omega_of(run: &PipelineRun, densities: [f64; 3]) -> Option<f64> {
    match run.pipeline {
        "cls" => Some(densities.iter().product::<f64>() / 2.0),
        _ => run.trace.last().map(|s| s.omega),
    }
}

/// Runs one pipeline on one grid point.
pub fn run_point(point: &GridPoint, pipeline: Pipeline, eps: f64, policy: &Policy) -> (Row, Option<PipelineRun>) {
    let start = Instant::now();
    let mut row = Row {
        point: *point,
        pipeline,
        omega: None,
        threshold: 0,
        ap: Ap::empty(),
        guarantee: None,
        min_count: None,
        steps: 0,
        cap: 0,
        gates: (0, 0),
        cls_check: None,
        branch: "",
        status: String::new(),
        wall_ms: 0,
    };
    let result = instance(point.family, point.modulus, point.densities, point.seed)
        .map_err(|e| e.to_string())
        .and_then(|sets| {
            let realized = sets.clone().map(|s| s.density_f64());
            pipeline.run(&sets, eps, policy).map(|run| (run, realized)).map_err(|e| e.to_string())
        });
    let run = match result {
        Ok((run, realized)) => {
            row.omega = omega_of(&run, realized);
            row.threshold = run.verified.threshold;
            row.ap = run.verified.ap;
            row.guarantee = run.guarantee;
            row.min_count = run.verified.min_count();
            row.steps = run.steps();
            row.cap = run.iteration_cap;
            row.gates = run.gate_counts();
            row.cls_check = run.cls_check;
            row.branch = run.branch();
            row.status = "ok".into();
            Some(run)
        }
        Err(e) => {
            row.status = format!("error: {e}");
            None
        }
    };
    row.wall_ms = start.elapsed().as_millis();
    (row, run)
}

/// Worker count from `APLAB_THREADS`, or rayon's default when unset or zero.
pub fn thread_count() -> usize {
    std::env::var("APLAB_THREADS").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

#[derive(Debug, Default)]
pub struct SweepOutput {
    pub rows: Vec<Row>,
    /// JSON-lines trace of every successful run, in row order.
    pub traces: String,
}

impl SweepOutput {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(Row::ok)
    }

    pub fn to_csv(&self, timing: bool) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = HEADER.to_vec();
        if timing {
            header.push("wall_ms");
        }
        w.write_record(&header)?;
        for row in &self.rows {
            w.write_record(row.fields(timing))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Runs every (grid point, pipeline) pair on a pool of `threads` workers (0 = default).
pub fn run_sweep(cfg: &SweepConfig, threads: usize) -> Result<SweepOutput> {
    let jobs: Vec<(GridPoint, Pipeline)> =
        cfg.points().into_iter().flat_map(|p| cfg.pipelines.iter().map(move |&q| (p, q))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<(Row, String)> = pool.install(|| {
        jobs.par_iter()
            .map(|(p, q)| {
                let (row, run) = run_point(p, *q, cfg.eps, &cfg.policy);
                let trace = run.and_then(|r| crate::trace::json_lines(&r, p.seed).ok()).unwrap_or_default();
                (row, trace)
            })
            .collect()
    });
    let mut out = SweepOutput::default();
    for (row, trace) in results {
        out.rows.push(row);
        out.traces.push_str(&trace);
    }
    Ok(out)
}

#[derive(Debug, Default, PartialEq)]
pub struct CrossCheck {
    pub checked: usize,
    pub failures: Vec<String>,
}

/// Re-reads the CSV and re-verifies up to `samples` evenly spaced ok rows from scratch.
pub fn cross_check(csv_text: &str, samples: usize) -> Result<CrossCheck> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader.headers()?.clone();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let map: BTreeMap<&str, String> = header.iter().zip(rec.iter().map(str::to_string)).collect();
        if map.get("status").map(String::as_str) == Some("ok") {
            rows.push(map);
        }
    }
    let mut out = CrossCheck::default();
    if rows.is_empty() || samples == 0 {
        return Ok(out);
    }
    let picks: Vec<usize> = {
        let mut v: Vec<usize> = (0..samples.min(rows.len())).map(|i| i * rows.len() / samples.min(rows.len())).collect();
        v.dedup();
        v
    };
    for i in picks {
        let r = &rows[i];
        let get = |k: &str| r.get(k).cloned().unwrap_or_default();
        let num = |k: &str| -> Result<f64> { get(k).parse().map_err(|_| Error::Config(format!("bad {k} in row {i}"))) };
        let family: Family = get("family").parse()?;
        let n = num("N")? as usize;
        let seed: u64 = get("seed").parse().map_err(|_| Error::Config(format!("bad seed in row {i}")))?;
        let sets = instance(family, n, [num("alpha")?, num("beta")?, num("gamma")?], seed)?;
        let counts = representation_counts(&sets[0], &sets[1], &sets[2])?;
        let modulus = sets[0].modulus();
        let k = num("K")? as u64;
        let ap = Ap { start: num("ap_start")? as usize, step: num("ap_step")? as usize, length: num("ap_length")? as usize };
        let terms: Vec<u64> = ap.elements(modulus).into_iter().map(|w| counts[w]).collect();
        let min = terms.iter().copied().min();
        let claimed = get("min_count");
        let mut problems = String::new();
        if let Some(bad) = terms.iter().position(|&c| c < k) {
            write!(problems, " term {bad} has {} < K={k};", terms[bad]).unwrap();
        }
        if min.map(|m| m.to_string()).unwrap_or_default() != claimed {
            write!(problems, " min count {min:?} differs from row value {claimed:?};").unwrap();
        }
        out.checked += 1;
        if !problems.is_empty() {
            out.failures.push(format!("row {i} ({} {family} N={n}):{problems}", get("pipeline")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid_is_header_only() {
        let cfg = SweepConfig::parse("family=random\npipeline=cls\n").unwrap();
        let out = run_sweep(&cfg, 1).unwrap();
        assert_eq!(out.to_csv(false).unwrap(), HEADER.join(",") + "\n");
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(SweepConfig::parse("N=64\nfoo=1\n").is_err());
        assert!(SweepConfig::parse("pipeline=roth\n").is_err());
        assert!(SweepConfig::parse("alpha=1.5\n").is_err());
        assert_eq!(SweepConfig::parse("c_impl=0.125\n").unwrap().policy.c_impl, 0.125);
    }

    #[test]
    fn full_group_cls_row() {
        let cfg = SweepConfig::parse("N=64\nalpha=1\npipeline=cls\n").unwrap();
        let out = run_sweep(&cfg, 1).unwrap();
        let row = &out.rows[0];
        assert!(row.ok());
        assert_eq!(row.ap.length, 64);
        assert!(row.min_count.unwrap() >= row.threshold);
        let check = cross_check(&out.to_csv(false).unwrap(), 5).unwrap();
        assert_eq!(check.checked, 1);
        assert!(check.failures.is_empty());
    }

    #[test]
    fn grid_order_and_seeds() {
        let cfg = SweepConfig::parse("N=64\nN=128\nalpha=0.3\nalpha=0.4\nseeds=2\npipeline=cls\n").unwrap();
        let pts = cfg.points();
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[0].modulus, 64);
        assert_eq!(pts[4].modulus, 128);
        assert_eq!(pts[2].densities[0], 0.4);
        assert_eq!(pts[3].seed, mix_seed(1, 3));
    }

    #[test]
    fn output_is_independent_of_thread_count() {
        let cfg = SweepConfig::parse("N=128\nalpha=0.3\nalpha=0.4\nseeds=2\n").unwrap();
        let one = run_sweep(&cfg, 1).unwrap().to_csv(false).unwrap();
        let four = run_sweep(&cfg, 4).unwrap().to_csv(false).unwrap();
        assert_eq!(one, four);
    }
}
