//! Run configuration and palette derivation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What to do when a drawn triangle has no available color pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoPairPolicy {
    /// End phase 1 at the first starved triangle.
    Terminate,
    /// Mark the starved (triangle, apex) pair and keep drawing; a triangle is
    /// parked once all three apexes have starved. Starvation is permanent
    /// because edge availability only shrinks during phase 1.
    Skip,
}

/// When phase 1 stops (besides running out of candidates).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Run until no drawable triangle remains.
    Natural,
    /// Stop after at most this many colored steps.
    MaxSteps(u64),
}

/// Which uncolored-triangle store backs the process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoreMode {
    /// Explicit for n ≤ 700, rejection sampling above.
    Auto,
    /// Dense list of all uncolored triples; exact O(1) uniform draws.
    /// Memory is ~10·C(n,3) bytes, practical to n ≈ 800.
    Explicit,
    /// Draw random triples and reject colored/starved ones; exact counts are
    /// maintained incrementally. Scales to large n.
    Rejection,
}

/// Sizes and index ranges of the color palette.
///
/// Colors are indexed `0..total`; indices `< phase1` form the phase-1 palette
/// and the rest are reserved for phase 2. Phase 2 may later enlarge the
/// palette beyond `total`; these fields describe the configured budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaletteSpec {
    /// Color budget: `ceil((5/6 + ε)·n)`.
    pub total: u32,
    /// Phase-1 palette size: `ceil((5/6 + ε/2)·n)`.
    pub phase1: u32,
    /// `total − phase1`, the phase-2 completion palette.
    pub reserved: u32,
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("n must be at least 4, got {0}")]
    NTooSmall(u32),
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(f64),
    #[error("unsupported palette: reserved = {reserved} colors for n = {n}, epsilon = {epsilon} (need ≥ 1)")]
    UnsupportedPalette { n: u32, epsilon: f64, reserved: u32 },
    #[error("checkpoint_every must be ≥ 1 (use stop/natural to disable snapshots)")]
    ZeroCheckpoint,
}

/// Ceiling that forgives float dust: values within 1e-9 of an integer round
/// to it instead of ceiling past it (e.g. `(5/6 + 0.1)·60` evaluates to
/// `56.000000000000007` in doubles but means exactly 56).
fn ceil_tol(x: f64) -> u32 {
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        nearest as u32
    } else {
        x.ceil() as u32
    }
}

/// The probability that a given phase-1 color is special at a given vertex:
/// `s = (ε/2) / (5/6 + ε/2)`.
pub fn special_fraction(epsilon: f64) -> f64 {
    (epsilon / 2.0) / (5.0 / 6.0 + epsilon / 2.0)
}

impl PaletteSpec {
    /// Derive the palette for `(n, ε)`.
    pub fn for_params(n: u32, epsilon: f64) -> Result<Self, ConfigError> {
        if n < 4 {
            return Err(ConfigError::NTooSmall(n));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(ConfigError::EpsilonOutOfRange(epsilon));
        }
        let nf = n as f64;
        let total = ceil_tol((5.0 / 6.0 + epsilon) * nf);
        let phase1 = ceil_tol((5.0 / 6.0 + epsilon / 2.0) * nf);
        if total <= phase1 {
            return Err(ConfigError::UnsupportedPalette { n, epsilon, reserved: total.saturating_sub(phase1) });
        }
        Ok(PaletteSpec { total, phase1, reserved: total - phase1 })
    }
}

/// Full configuration of one process run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    /// Vertex count (≥ 4).
    pub n: u32,
    /// Color-budget slack, strictly between 0 and 1.
    pub epsilon: f64,
    /// Master seed; all substreams derive from it.
    pub seed: u64,
    /// Behavior at a starved triangle.
    pub on_no_pair: NoPairPolicy,
    /// Stop criterion for phase 1.
    pub stop: StopRule,
    /// Colored steps between telemetry snapshots.
    pub checkpoint_every: u64,
    /// Maximum phase-2 resampling rounds per palette size.
    pub phase2_budget: u64,
    /// Triangle store selection.
    pub store: StoreMode,
}

impl ProcessConfig {
    /// A configuration with library defaults: skip policy, natural stop,
    /// snapshots every `max(1, n²/50)` colored steps, phase-2 budget 10⁶,
    /// auto store.
    pub fn new(n: u32, epsilon: f64, seed: u64) -> Self {
        ProcessConfig {
            n,
            epsilon,
            seed,
            on_no_pair: NoPairPolicy::Skip,
            stop: StopRule::Natural,
            checkpoint_every: ((n as u64) * (n as u64) / 50).max(1),
            phase2_budget: 1_000_000,
            store: StoreMode::Auto,
        }
    }

    /// Validate ranges and derive the palette.
    pub fn validate(&self) -> Result<PaletteSpec, ConfigError> {
        if self.checkpoint_every == 0 {
            return Err(ConfigError::ZeroCheckpoint);
        }
        PaletteSpec::for_params(self.n, self.epsilon)
    }

    /// `s`, the per-(vertex, color) special-set probability.
    pub fn special_fraction(&self) -> f64 {
        special_fraction(self.epsilon)
    }

    /// The store mode after resolving `Auto` (explicit for n ≤ 700).
    pub fn resolved_store(&self) -> StoreMode {
        match self.store {
            StoreMode::Auto => {
                if self.n <= 700 {
                    StoreMode::Explicit
                } else {
                    StoreMode::Rejection
                }
            }
            other => other,
        }
    }
}
