//! End-to-end orchestration: init → phase 1 (telemetry + structure checks)
//! → phase 2 → validation, returning every artifact a caller might persist.

use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::bits;
use crate::coloring::Coloring;
use crate::config::{ConfigError, ProcessConfig};
use crate::phase1::{run_phase1_with, Phase1Report};
use crate::phase2::{complete_phase2, Phase2Error, Phase2Report, ResampleOptions};
use crate::report::{RunManifest, RunReport, RunStatus};
use crate::rng::{substream, Substream};
use crate::state::ColoringState;
use crate::telemetry::{SamplePlan, TelemetryRecord, TelemetrySink};
use crate::validator::{auto_mode, validate, ValidationReport, ValidatorError, VerifyMode};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Phase2(#[from] Phase2Error),
    #[error(transparent)]
    Validator(#[from] ValidatorError),
}

/// Pipeline knobs beyond the process configuration itself.
#[derive(Clone, Debug, Default)]
pub struct PipelineOptions {
    /// Validation strategy; `None` selects by n.
    pub verify_mode: Option<VerifyMode>,
    /// Telemetry sampling plan; `None` uses the default plan.
    pub telemetry_plan: Option<SamplePlan>,
    /// Run the process-structure checks at every phase-1 checkpoint.
    pub check_invariants: bool,
}

/// Everything produced by one run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub phase1: Phase1Report,
    pub phase2: Phase2Report,
    pub validation: ValidationReport,
    pub coloring: Coloring,
    pub telemetry: Vec<TelemetryRecord>,
    pub invariant_failures: Vec<String>,
    pub status: RunStatus,
}

impl RunOutcome {
    /// The serializable `run.json` view (everything but the bulky coloring
    /// and telemetry bodies, which get their own files).
    pub fn report(&self) -> RunReport {
        RunReport {
            manifest: self.manifest.clone(),
            phase1: self.phase1.clone(),
            phase2: self.phase2.clone(),
            validation: self.validation.clone(),
            invariant_failures: self.invariant_failures.clone(),
            status: self.status,
            colors_used: self.coloring.colors_used(),
            color_ratio: self.coloring.colors_used() as f64 / self.coloring.n() as f64,
        }
    }
}

/// Phase-1 structure checks: violations of any of these indicate a process
/// bug, not bad luck. Returns human-readable failure descriptions.
///
/// 1. No color-class component exceeds 2 edges.
/// 2. No vertex's special set intersects its hit set.
/// 3. No alternating 4-cycle (both opposite pairs monochromatic).
/// 4. Every 2-edge component's endpoints are joined by a single-edge
///    component of a different color.
pub fn process_invariant_failures(state: &ColoringState) -> Vec<String> {
    let mut failures = Vec::new();
    let n = state.n();
    let phase1 = state.palette().phase1;

    // (1) Component sizes via the census of the partial coloring.
    let census = crate::validator::census(&state.to_coloring());
    if census.big_components > 0 {
        failures.push(format!(
            "{} color-class components with more than 2 edges",
            census.big_components
        ));
    }

    // (2) Special sets never get hit.
    for v in 0..n {
        let mut overlap = state.special_set(v).intersection(state.hit_set(v));
        if let Some(k) = overlap.next() {
            failures.push(format!("special color {k} of vertex {v} was hit"));
        }
    }

    // (3) No alternating 4-cycle: for disjoint same-colored pairs, both
    // closures must not be monochromatic.
    for k in 0..phase1 {
        let edges = state.edges_of_color(k);
        for (i, &e) in edges.iter().enumerate() {
            let (u, v) = crate::coloring::edge_endpoints(e as usize);
            for &f in &edges[i + 1..] {
                let (w, x) = crate::coloring::edge_endpoints(f as usize);
                if u == w || u == x || v == w || v == x {
                    continue;
                }
                for ((a1, b1), (a2, b2)) in [((u, w), (v, x)), ((u, x), (v, w))] {
                    match (state.color_of(a1, b1), state.color_of(a2, b2)) {
                        (Some(c1), Some(c2)) if c1 == c2 => failures.push(format!(
                            "alternating 4-cycle on colors {k}/{c1} over {u}-{v}/{w}-{x}"
                        )),
                        _ => {}
                    }
                }
            }
        }
    }

    // (4) Every 2-edge component pairs with a fresh single-edge component
    // between its endpoints.
    for v in 0..n {
        for k in bits::iter_mask(state.hit_set(v).words()) {
            let partners: Vec<u32> = state.partners(v, k).collect();
            if partners.len() != 2 {
                continue;
            }
            let (x, y) = (partners[0], partners[1]);
            match state.color_of(x, y) {
                None => {
                    failures.push(format!(
                        "2-edge component of color {k} at {v} has uncolored base {x}-{y}"
                    ));
                }
                Some(c) if c == k => {
                    failures.push(format!("monochromatic triangle of color {k} at {v}"));
                }
                Some(c) => {
                    let px: Vec<u32> = state.partners(x, c).collect();
                    let py: Vec<u32> = state.partners(y, c).collect();
                    if px != vec![y] || py != vec![x] {
                        failures.push(format!(
                            "base {x}-{y} of the {k}-component at {v} is not a single-edge \
                             component of color {c}"
                        ));
                    }
                }
            }
        }
    }

    failures
}

/// Fresh RNG for each named substream of the run's master seed.
fn stream(config: &ProcessConfig, which: Substream) -> ChaCha12Rng {
    substream(config.seed, which)
}

/// Run the full process once.
pub fn run_pipeline(
    config: &ProcessConfig,
    opts: &PipelineOptions,
) -> Result<RunOutcome, PipelineError> {
    let palette = config.validate()?;
    let mut state = ColoringState::init(config)?;
    let mut sink = match &opts.telemetry_plan {
        Some(plan) => TelemetrySink::with_plan(config, plan.clone()),
        None => TelemetrySink::new(config),
    };
    let mut invariant_failures = Vec::new();

    let mut rng1 = stream(config, Substream::Phase1);
    let check = opts.check_invariants;
    let phase1 = {
        let failures = &mut invariant_failures;
        let sink = &mut sink;
        run_phase1_with(&mut state, &mut rng1, config, |st, i| {
            sink.snapshot(st, i);
            if check {
                for f in process_invariant_failures(st) {
                    failures.push(format!("step {i}: {f}"));
                }
            }
        })
    };

    let mut rng2 = stream(config, Substream::Phase2);
    let phase2 = complete_phase2(
        &mut state,
        &mut rng2,
        config.epsilon,
        ResampleOptions::new(config.phase2_budget),
    )?;

    let coloring = state.to_coloring();
    let mode = opts.verify_mode.unwrap_or_else(|| auto_mode(config.n));
    // Validation's sampled mode gets its own deterministic stream, detached
    // from the telemetry sink's position.
    let mut vrng = stream(config, Substream::Telemetry);
    let validation = validate(&coloring, mode, &mut vrng)?;
    let status = if validation.violations == 0 && invariant_failures.is_empty() {
        RunStatus::Valid
    } else {
        RunStatus::InvalidColoring
    };

    Ok(RunOutcome {
        manifest: RunManifest::new(config, palette),
        phase1,
        phase2,
        validation,
        coloring,
        telemetry: sink.records,
        invariant_failures,
        status,
    })
}
