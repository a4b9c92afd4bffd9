//! Phase 1: the randomized triangle-coloring process. Each step draws a
//! uniform uncolored triangle and apex, picks a special color for the base
//! edge and a common non-special color for both cherry edges, and applies
//! all three assignments simultaneously.

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::config::{NoPairPolicy, ProcessConfig, StopRule};
use crate::state::ColoringState;
use crate::telemetry::TelemetrySink;

/// Result of one attempted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    /// Three edges were colored: base `u′u″ ← k′`, cherries `uu′, uu″ ← k`.
    Colored { u: u32, u1: u32, u2: u32, k: u32, k1: u32, c1_size: u32, c2_size: u32 },
    /// The drawn (triangle, apex) had an empty candidate set; nothing colored.
    NoPairAvailable { u: u32, u1: u32, u2: u32 },
    /// No drawable uncolored triangle remains.
    NoTriangles,
}

/// Why phase 1 stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    NoTriangles,
    NoPair,
    MaxSteps,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::NoTriangles => "no_triangles",
            Termination::NoPair => "no_pair",
            Termination::MaxSteps => "max_steps",
        }
    }
}

/// Summary of a phase-1 run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Phase1Report {
    /// Colored steps completed (each colors three edges).
    pub steps: u64,
    pub edges_colored: u64,
    pub termination: Termination,
    /// Starved draws skipped (only under the skip policy).
    pub skips: u64,
    /// Distinct phase-1 colors appearing on at least one edge.
    pub colors_used: u32,
    pub seconds: f64,
}

/// Draw a uniform drawable triangle and a uniform apex role on it; returns
/// the oriented triple `(u, u′, u″)` with `u′ < u″`.
pub fn sample_oriented_triangle(
    state: &mut ColoringState,
    rng: &mut ChaCha12Rng,
) -> Option<(u32, u32, u32)> {
    let (tri, role) = draw_triangle_and_role(state, rng)?;
    Some(orient(tri, role))
}

fn draw_triangle_and_role(
    state: &mut ColoringState,
    rng: &mut ChaCha12Rng,
) -> Option<([u16; 3], usize)> {
    let tri = state.draw_drawable_triangle(rng)?;
    let role = rng.random_range(0..3usize);
    Some((tri, role))
}

/// The triple is stored sorted, so dropping the apex keeps `u′ < u″`.
fn orient(tri: [u16; 3], role: usize) -> (u32, u32, u32) {
    let u = tri[role] as u32;
    let rest: Vec<u32> =
        (0..3).filter(|&i| i != role).map(|i| tri[i] as u32).collect();
    (u, rest[0], rest[1])
}

/// Attempt one coloring step.
pub fn step(state: &mut ColoringState, rng: &mut ChaCha12Rng) -> StepOutcome {
    let Some((tri, role)) = draw_triangle_and_role(state, rng) else {
        return StepOutcome::NoTriangles;
    };
    let (u, u1, u2) = orient(tri, role);
    // A previously starved draw is rejected O(1): starvation is permanent
    // because candidate sets only shrink.
    if state.store.is_starved(tri, role) {
        return StepOutcome::NoPairAvailable { u, u1, u2 };
    }
    let (c1, c2) = state.enumerate_candidates(u, u1, u2);
    if c1.is_empty() || c2.is_empty() {
        state.store.mark_starved(tri, role);
        return StepOutcome::NoPairAvailable { u, u1, u2 };
    }
    let k1 = c1[rng.random_range(0..c1.len())];
    let k = c2[rng.random_range(0..c2.len())];
    state.apply_step(u, u1, u2, k, k1).expect("candidates were validated");
    StepOutcome::Colored {
        u,
        u1,
        u2,
        k,
        k1,
        c1_size: c1.len() as u32,
        c2_size: c2.len() as u32,
    }
}

/// Distinct phase-1 colors with at least one edge.
pub fn phase1_colors_used(state: &ColoringState) -> u32 {
    (0..state.palette().phase1).filter(|&k| !state.edges_of_color(k).is_empty()).count() as u32
}

/// Run phase 1 to termination (or the step cap), invoking `at_checkpoint`
/// on the frozen state at step 0, after every `checkpoint_every`-th colored
/// step, and after the final step.
pub fn run_phase1_with<F>(
    state: &mut ColoringState,
    rng: &mut ChaCha12Rng,
    config: &ProcessConfig,
    mut at_checkpoint: F,
) -> Phase1Report
where
    F: FnMut(&ColoringState, u64),
{
    let started = Instant::now();
    let every = config.checkpoint_every.max(1);
    at_checkpoint(state, 0);
    let mut skips = 0u64;
    let mut last_checkpoint = 0u64;
    let termination = loop {
        if let StopRule::MaxSteps(m) = config.stop {
            if state.steps() >= m {
                break Termination::MaxSteps;
            }
        }
        match step(state, rng) {
            StepOutcome::Colored { .. } => {
                let i = state.steps();
                if i % every == 0 {
                    at_checkpoint(state, i);
                    last_checkpoint = i;
                }
            }
            StepOutcome::NoPairAvailable { .. } => match config.on_no_pair {
                NoPairPolicy::Skip => skips += 1,
                NoPairPolicy::Terminate => break Termination::NoPair,
            },
            StepOutcome::NoTriangles => break Termination::NoTriangles,
        }
    };
    if state.steps() != last_checkpoint {
        at_checkpoint(state, state.steps());
    }
    Phase1Report {
        steps: state.steps(),
        edges_colored: 3 * state.steps(),
        termination,
        skips,
        colors_used: phase1_colors_used(state),
        seconds: started.elapsed().as_secs_f64(),
    }
}

/// `run_phase1_with` wired to a telemetry sink (or to nothing).
pub fn run_phase1(
    state: &mut ColoringState,
    rng: &mut ChaCha12Rng,
    config: &ProcessConfig,
    sink: Option<&mut TelemetrySink>,
) -> Phase1Report {
    match sink {
        Some(s) => run_phase1_with(state, rng, config, |st, i| s.snapshot(st, i)),
        None => run_phase1_with(state, rng, config, |_, _| {}),
    }
}
