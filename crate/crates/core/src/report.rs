//! Serializable run artifacts: the reproducibility manifest, the aggregate
//! per-run report, and sweep summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{PaletteSpec, ProcessConfig};
use crate::phase1::Phase1Report;
use crate::phase2::Phase2Report;
use crate::rng::Substream;
use crate::validator::ValidationReport;

/// Everything needed to reproduce a run bit-for-bit: configuration, derived
/// palette, and the named RNG substreams hanging off the master seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: ProcessConfig,
    pub palette: PaletteSpec,
    /// Substream name → stream index under the master seed.
    pub substreams: BTreeMap<String, u64>,
    /// Artifact name → path, filled in by the CLI when files are written.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(config: &ProcessConfig, palette: PaletteSpec) -> Self {
        let substreams = [
            ("special_sets", Substream::SpecialSets),
            ("phase1", Substream::Phase1),
            ("phase2", Substream::Phase2),
            ("telemetry", Substream::Telemetry),
        ]
        .into_iter()
        .map(|(name, s)| (name.to_string(), s as u64))
        .collect();
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            palette,
            substreams,
            outputs: BTreeMap::new(),
        }
    }
}

/// Final status of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Valid,
    InvalidColoring,
}

/// The `run.json` payload. Timing fields (`seconds`) vary between otherwise
/// identical runs; every other field is deterministic per (config, seed).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub manifest: RunManifest,
    pub phase1: Phase1Report,
    pub phase2: Phase2Report,
    pub validation: ValidationReport,
    /// Process-structure check failures collected at checkpoints (empty
    /// unless checks were enabled and something broke).
    pub invariant_failures: Vec<String>,
    pub status: RunStatus,
    /// Distinct colors over the complete coloring (both phases).
    pub colors_used: u32,
    /// Headline ratio colors_used / n (reported, never asserted).
    pub color_ratio: f64,
}

/// Per-seed row of a sweep aggregate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSeedSummary {
    pub seed: u64,
    pub status: RunStatus,
    pub colors_used: u32,
    pub color_ratio: f64,
    /// Fraction of edges colored by phase 1.
    pub phase1_coverage: f64,
    pub steps: u64,
    pub skips: u64,
    pub enlargements: u32,
    pub violations: u64,
}

/// Median |relative deviation| of one family at one checkpoint, pooled over
/// the sweep's runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeviationSummary {
    pub family: String,
    pub step: u64,
    pub t: f64,
    pub median_abs_rel_dev: f64,
    pub samples: u64,
}

/// The sweep-level aggregate JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub n: u32,
    pub epsilon: f64,
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SweepSeedSummary>,
    pub deviations: Vec<DeviationSummary>,
}

/// Median of an unordered sample (mean of middle pair for even sizes);
/// NaN for an empty sample.
pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN in medians"));
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    }
}

/// Pool telemetry records (from any number of runs) into per-(family, step)
/// median |rel_dev| rows, sorted by family then step. Records with
/// non-finite deviations (e.g. the degree family) are skipped.
pub fn summarize_deviations(
    records: &[crate::telemetry::TelemetryRecord],
) -> Vec<DeviationSummary> {
    let mut buckets: BTreeMap<(String, u64), (f64, Vec<f64>)> = BTreeMap::new();
    for r in records {
        if !r.rel_dev.is_finite() {
            continue;
        }
        let entry = buckets.entry((r.family.clone(), r.step)).or_insert((r.t, Vec::new()));
        entry.1.push(r.rel_dev.abs());
    }
    buckets
        .into_iter()
        .map(|((family, step), (t, mut devs))| {
            let samples = devs.len() as u64;
            DeviationSummary { family, step, t, median_abs_rel_dev: median(&mut devs), samples }
        })
        .collect()
}
