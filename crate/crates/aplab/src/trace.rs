//! JSON-lines records of pipeline runs.

use aplab_core::pipelines::{IterationState, PipelineRun, Provenance, StepOutcome};
use aplab_core::BohrSet;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct BohrRecord {
    pub modulus: usize,
    pub gamma: Vec<usize>,
    pub delta: f64,
    pub size: usize,
}

impl From<&BohrSet> for BohrRecord {
    fn from(b: &BohrSet) -> Self {
        BohrRecord { modulus: b.modulus(), gamma: b.frequencies().to_vec(), delta: b.radius(), size: b.len() }
    }
}

#[derive(Debug, Serialize)]
pub struct StepRecord {
    pub kind: &'static str,
    pub step: usize,
    pub bohr: BohrRecord,
    pub shifts: [usize; 3],
    pub sizes: [usize; 3],
    pub densities: [String; 3],
    pub rho: f64,
    pub omega: f64,
    pub v: f64,
    pub outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub increment_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub increment_density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate_passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl From<&IterationState> for StepRecord {
    fn from(s: &IterationState) -> Self {
        let (mut index, mut density, mut gate, mut detail) = (None, None, None, None);
        match &s.outcome {
            StepOutcome::Increment { index: i, density: d, gate_passed } => {
                index = Some(*i);
                density = Some(*d);
                gate = Some(*gate_passed);
            }
            StepOutcome::Failed(msg) => detail = Some(msg.clone()),
            StepOutcome::Terminated => {}
        }
        StepRecord {
            kind: "step",
            step: s.step,
            bohr: (&s.bohr).into(),
            shifts: s.shifts,
            sizes: [s.sets[0].len(), s.sets[1].len(), s.sets[2].len()],
            densities: s.densities.map(|d| d.to_string()),
            rho: s.rho,
            omega: s.omega,
            v: s.v,
            outcome: s.outcome.tag(),
            increment_index: index,
            increment_density: density,
            gate_passed: gate,
            detail,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub kind: &'static str,
    pub pipeline: &'static str,
    pub seed: u64,
    pub order: [usize; 3],
    pub z: usize,
    pub bohr: Option<BohrRecord>,
    pub start: usize,
    pub step: usize,
    pub length: usize,
    pub threshold: u64,
    pub min_count: Option<u64>,
    pub guarantee: Option<usize>,
    pub branch: &'static str,
    pub provenance: String,
    pub cls_check: Option<bool>,
    pub cls_attempts: usize,
    pub steps: usize,
    pub iteration_cap: usize,
}

impl RunRecord {
    pub fn new(run: &PipelineRun, seed: u64) -> Self {
        RunRecord {
            kind: "run",
            pipeline: run.pipeline,
            seed,
            order: run.order,
            z: run.z,
            bohr: run.bohr.as_ref().map(Into::into),
            start: run.verified.ap.start,
            step: run.verified.ap.step,
            length: run.verified.ap.length,
            threshold: run.verified.threshold,
            min_count: run.verified.min_count(),
            guarantee: run.guarantee,
            branch: run.branch(),
            provenance: match &run.provenance {
                Provenance::Constructive => "constructive".into(),
                Provenance::OracleOnly(why) => format!("oracle-only: {why}"),
            },
            cls_check: run.cls_check,
            cls_attempts: run.cls_attempts,
            steps: run.steps(),
            iteration_cap: run.iteration_cap,
        }
    }
}

/// One line per iteration step followed by the run summary.
pub fn json_lines(run: &PipelineRun, seed: u64) -> serde_json::Result<String> {
    let mut out = String::new();
    for s in &run.trace {
        out.push_str(&serde_json::to_string(&StepRecord::from(s))?);
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&RunRecord::new(run, seed))?);
    out.push('\n');
    Ok(out)
}
