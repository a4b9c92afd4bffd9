//! Shared oracle machinery for the integration suites: independent
//! re-implementations of availability, the tracked-statistics counters, and
//! the validator, built only on `color_of` / special-set membership so they
//! can cross-check the engine's indexed fast paths.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use ramsey_forge::coloring::Coloring;
use ramsey_forge::config::{NoPairPolicy, ProcessConfig, StoreMode};
use ramsey_forge::phase1::{step, StepOutcome};
use ramsey_forge::rng::{substream, Substream};
use ramsey_forge::state::ColoringState;
use ramsey_forge::telemetry as tm;
use ramsey_forge::validator::{verify_45_exhaustive, verify_45_pairwise};

/// A process configuration for test-sized graphs. Small n needs a generous
/// epsilon or the reserved palette rounds to zero after rounding.
pub fn test_config(n: u32, seed: u64) -> ProcessConfig {
    let eps = if n < 24 { 0.5 } else { 0.1 };
    ProcessConfig::new(n, eps, seed)
}

/// Drive phase 1 for at most `steps` colored steps (u64::MAX = to the end)
/// and return the frozen state.
pub fn reachable_state(n: u32, seed: u64, steps: u64) -> ColoringState {
    let mut config = test_config(n, seed);
    config.on_no_pair = NoPairPolicy::Skip;
    let mut state = ColoringState::init(&config).expect("valid test config");
    let mut rng = substream(seed, Substream::Phase1);
    let mut done = 0u64;
    while done < steps {
        match step(&mut state, &mut rng) {
            StepOutcome::Colored { .. } => done += 1,
            StepOutcome::NoPairAvailable { .. } => continue,
            StepOutcome::NoTriangles => break,
        }
    }
    state
}

// ============================================================================
// Definitional availability and counters
// ============================================================================

/// Availability, restated from the process definition: `uv` uncolored, `k`
/// outside both special sets, `k` on no edge at `u` or `v`, and no pair
/// `x ≠ y` with `color(ux) = color(vy)` and `color(xy) = k`.
pub fn brute_available(state: &ColoringState, u: u32, v: u32, k: u32) -> bool {
    let n = state.n();
    if state.color_of(u, v).is_some() {
        return false;
    }
    if state.is_special(u, k) || state.is_special(v, k) {
        return false;
    }
    for w in 0..n {
        if w != u && state.color_of(u, w) == Some(k) {
            return false;
        }
        if w != v && state.color_of(v, w) == Some(k) {
            return false;
        }
    }
    for x in 0..n {
        if x == u {
            continue;
        }
        let Some(c) = state.color_of(u, x) else { continue };
        for y in 0..n {
            if y == v || y == x {
                continue;
            }
            if state.color_of(v, y) == Some(c) && state.color_of(x, y) == Some(k) {
                return false;
            }
        }
    }
    true
}

/// All phase-1 colors available at `uv`, from the definition.
pub fn brute_available_set(state: &ColoringState, u: u32, v: u32) -> Vec<u32> {
    (0..state.palette().phase1).filter(|&k| brute_available(state, u, v, k)).collect()
}

/// Candidate pair sets at an oriented uncolored triple, from the definition.
pub fn brute_candidates(state: &ColoringState, u: u32, u1: u32, u2: u32) -> (Vec<u32>, Vec<u32>) {
    let phase1 = state.palette().phase1;
    let c1 = (0..phase1)
        .filter(|&k1| state.is_special(u, k1) && brute_available(state, u1, u2, k1))
        .collect();
    let c2 = (0..phase1)
        .filter(|&k| {
            !state.is_special(u, k)
                && brute_available(state, u, u1, k)
                && brute_available(state, u, u2, k)
        })
        .collect();
    (c1, c2)
}

pub fn brute_q(state: &ColoringState) -> u64 {
    let n = state.n();
    let mut count = 0u64;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if state.is_uncolored(a, b) && state.is_uncolored(a, c) && state.is_uncolored(b, c)
                {
                    count += 1;
                }
            }
        }
    }
    count
}

pub fn brute_y(state: &ColoringState, u: u32, u1: u32) -> u64 {
    (0..state.n())
        .filter(|&w| w != u && w != u1 && state.is_uncolored(u, w) && state.is_uncolored(u1, w))
        .count() as u64
}

fn triple_uncolored(state: &ColoringState, u: u32, u1: u32, u2: u32) -> bool {
    state.is_uncolored(u, u1) && state.is_uncolored(u, u2) && state.is_uncolored(u1, u2)
}

pub fn brute_a(state: &ColoringState, u1: u32, u2: u32, k1: u32) -> u64 {
    let mut count = 0u64;
    for u in 0..state.n() {
        if u == u1 || u == u2 || !state.is_special(u, k1) {
            continue;
        }
        if !triple_uncolored(state, u, u1, u2) {
            continue;
        }
        count += (0..state.palette().phase1)
            .filter(|&k| brute_available(state, u, u1, k) && brute_available(state, u, u2, k))
            .count() as u64;
    }
    count
}

pub fn brute_b(state: &ColoringState, u: u32, u1: u32, k: u32) -> u64 {
    let mut count = 0u64;
    for u2 in 0..state.n() {
        if u2 == u || u2 == u1 {
            continue;
        }
        if !state.is_uncolored(u1, u2) || !brute_available(state, u, u2, k) {
            continue;
        }
        count += (0..state.palette().phase1)
            .filter(|&k1| state.is_special(u, k1) && brute_available(state, u1, u2, k1))
            .count() as u64;
    }
    count
}

pub fn brute_d(state: &ColoringState, u: u32, k: u32) -> u64 {
    let n = state.n();
    let mut count = 0u64;
    for u1 in 0..n {
        for u2 in 0..n {
            if u1 == u2 || u1 == u || u2 == u || !triple_uncolored(state, u, u1, u2) {
                continue;
            }
            if !brute_available(state, u, u1, k) || !brute_available(state, u, u2, k) {
                continue;
            }
            count += (0..state.palette().phase1)
                .filter(|&k1| state.is_special(u, k1) && brute_available(state, u1, u2, k1))
                .count() as u64;
        }
    }
    count
}

pub fn brute_e(state: &ColoringState, u2: u32, k: u32) -> u64 {
    let n = state.n();
    let mut count = 0u64;
    for u in 0..n {
        if u == u2 || state.is_special(u, k) {
            continue;
        }
        for u1 in 0..n {
            if u1 == u || u1 == u2 || !triple_uncolored(state, u, u1, u2) {
                continue;
            }
            if !brute_available(state, u, u1, k) || !brute_available(state, u, u2, k) {
                continue;
            }
            count += (0..state.palette().phase1)
                .filter(|&k1| state.is_special(u, k1) && brute_available(state, u1, u2, k1))
                .count() as u64;
        }
    }
    count
}

pub fn brute_f(state: &ColoringState, u2: u32, k1: u32) -> u64 {
    let n = state.n();
    let mut count = 0u64;
    for u in 0..n {
        if u == u2 || !state.is_special(u, k1) {
            continue;
        }
        for u1 in 0..n {
            if u1 == u || u1 == u2 || !triple_uncolored(state, u, u1, u2) {
                continue;
            }
            if !brute_available(state, u1, u2, k1) {
                continue;
            }
            count += (0..state.palette().phase1)
                .filter(|&k| {
                    !state.is_special(u, k)
                        && brute_available(state, u, u1, k)
                        && brute_available(state, u, u2, k)
                })
                .count() as u64;
        }
    }
    count
}

/// Cherry-path counter from the definition: path `u–x–y–v` with colors
/// `(k′, k, k′)`; pattern bit 1 = edge already colored, 0 = color available.
pub fn brute_z(state: &ColoringState, u: u32, v: u32, k: u32, pattern: (u8, u8, u8)) -> u64 {
    let n = state.n();
    let phase1 = state.palette().phase1;
    let holds = |a: u32, b: u32, col: u32, bit: u8| -> bool {
        if bit == 1 {
            state.color_of(a, b) == Some(col)
        } else {
            brute_available(state, a, b, col)
        }
    };
    let mut count = 0u64;
    for x in 0..n {
        for y in 0..n {
            if x == y || x == u || x == v || y == u || y == v {
                continue;
            }
            if !holds(x, y, k, pattern.1) {
                continue;
            }
            for k1 in 0..phase1 {
                if holds(u, x, k1, pattern.0) && holds(y, v, k1, pattern.2) {
                    count += 1;
                }
            }
        }
    }
    count
}

pub fn brute_xi(state: &ColoringState, u: u32, v: u32, k: u32) -> u64 {
    let n = state.n();
    let mut count = 0u64;
    for x in 0..n {
        if x == u {
            continue;
        }
        let Some(c) = state.color_of(u, x) else { continue };
        for y in 0..n {
            if y == v || y == x {
                continue;
            }
            if state.color_of(v, y) == Some(c) && state.color_of(x, y) == Some(k) {
                count += 1;
            }
        }
    }
    count
}

pub fn brute_phi(state: &ColoringState, u: u32, u1: u32, v: u32, v1: u32) -> u64 {
    let n = state.n();
    let mut count = 0u64;
    for x in 0..n {
        if x == u || x == v {
            continue;
        }
        let Some(c) = state.color_of(u, x) else { continue };
        for y in 0..n {
            if y == u1 || y == v1 {
                continue;
            }
            if state.color_of(u1, y) != Some(c) {
                continue;
            }
            match (state.color_of(v, x), state.color_of(v1, y)) {
                (Some(a), Some(b)) if a == b => count += 1,
                _ => {}
            }
        }
    }
    count
}

pub fn brute_psi(state: &ColoringState, u: u32, u2: u32, k: u32, k2: u32) -> u64 {
    let n = state.n();
    let mut count = 0u64;
    for x in 0..n {
        if x == u {
            continue;
        }
        let Some(c) = state.color_of(u, x) else { continue };
        for z in 0..n {
            if z == u2 || z == x || state.color_of(u2, z) != Some(c) {
                continue;
            }
            for y in 0..n {
                if y == x || y == z {
                    continue;
                }
                if state.color_of(x, y) == Some(k) && state.color_of(y, z) == Some(k2) {
                    count += 1;
                }
            }
        }
    }
    count
}

pub fn brute_lambda(state: &ColoringState, u: u32, v: u32, w: u32) -> u64 {
    let n = state.n();
    let mut count = 0u64;
    for x in 0..n {
        if x == u || x == v {
            continue;
        }
        let Some(c) = state.color_of(u, x) else { continue };
        for y in 0..n {
            if y == v || y == w {
                continue;
            }
            if state.color_of(v, y) != Some(c) {
                continue;
            }
            match (state.color_of(v, x), state.color_of(w, y)) {
                (Some(a), Some(b)) if a == b => count += 1,
                _ => {}
            }
        }
    }
    count
}

// ============================================================================
// Random colorings and validator cross-checks
// ============================================================================

/// A uniformly random COMPLETE coloring. Tight palettes make violations
/// likely; generous ones make them rare — both regimes matter for
/// equivalence checks.
pub fn random_coloring(n: u32, colors: u32, rng: &mut ChaCha12Rng) -> Coloring {
    let mut c = Coloring::new(n, colors);
    for v in 1..n {
        for u in 0..v {
            c.set(u, v, rng.random_range(0..colors));
        }
    }
    c
}

/// Run one full process (phase 1 + phase 2) and return the coloring.
pub fn process_coloring(n: u32, seed: u64) -> Coloring {
    let config = test_config(n, seed);
    let opts = ramsey_forge::pipeline::PipelineOptions::default();
    ramsey_forge::pipeline::run_pipeline(&config, &opts).expect("pipeline").coloring
}

// ============================================================================
// Store replay oracle
// ============================================================================

/// Replay a phase-1 run and cross-check the triangle store's counters after
/// every event against a from-scratch recount plus an independently
/// maintained starvation ledger. Returns the number of colored steps.
pub fn replay_and_check_store(n: u32, seed: u64, mode: StoreMode) -> Result<u64, String> {
    use std::collections::HashMap;

    let mut config = test_config(n, seed);
    config.on_no_pair = NoPairPolicy::Skip;
    config.store = mode;
    let mut state = ColoringState::init(&config).expect("valid test config");
    let mut rng = substream(seed, Substream::Phase1);

    // Sorted triple -> bitmask of starved apex roles, tracked from the
    // process's own skip reports rather than the store internals.
    let mut starved: HashMap<[u32; 3], u8> = HashMap::new();
    let mut steps = 0u64;

    loop {
        let outcome = step(&mut state, &mut rng);
        match outcome {
            StepOutcome::Colored { .. } => steps += 1,
            StepOutcome::NoPairAvailable { u, u1, u2 } => {
                let mut tri = [u, u1, u2];
                tri.sort_unstable();
                let role = tri.iter().position(|&x| x == u).unwrap();
                *starved.entry(tri).or_insert(0) |= 1 << role;
            }
            StepOutcome::NoTriangles => break,
        }

        let mut uncolored = 0u64;
        let mut fully_starved_uncolored = 0u64;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if !(state.is_uncolored(a, b)
                        && state.is_uncolored(a, c)
                        && state.is_uncolored(b, c))
                    {
                        continue;
                    }
                    uncolored += 1;
                    if starved.get(&[a, b, c]).copied().unwrap_or(0) == 7 {
                        fully_starved_uncolored += 1;
                    }
                }
            }
        }
        let store = state.store_counts();
        if store != (uncolored, uncolored - fully_starved_uncolored) {
            return Err(format!(
                "n={n} seed={seed} mode={mode:?} after {steps} steps: store reports \
                 (uncolored, drawable) = {store:?}, recount says ({uncolored}, {})",
                uncolored - fully_starved_uncolored
            ));
        }
    }
    Ok(steps)
}
/// Compare every fast counter against its definitional oracle on one state.
/// Returns an error naming the first mismatching family.
pub fn check_state_against_oracles(
    state: &ColoringState,
    rng: &mut ChaCha12Rng,
) -> Result<(), String> {
    let n = state.n();
    let phase1 = state.palette().phase1;
    let fail = |what: &str, fast: u64, brute: u64| {
        Err(format!("n={n} {what}: fast={fast} brute={brute}"))
    };

    // Availability and path-forbidden sets: exhaustive over pairs/colors.
    for v in 0..n {
        for u in 0..v {
            if !state.is_uncolored(u, v) {
                continue;
            }
            for k in 0..phase1 {
                let fast = state.available_at_edge(u, v, k);
                let brute = brute_available(state, u, v, k);
                if fast != brute {
                    return Err(format!("available_at_edge({u},{v},{k}): fast={fast} brute={brute}"));
                }
            }
            let fast: Vec<u32> = state.forbidden_by_path(u, v);
            let brute: Vec<u32> = (0..phase1)
                .filter(|&k| {
                    (0..n).any(|x| {
                        if x == u {
                            return false;
                        }
                        let Some(c) = state.color_of(u, x) else { return false };
                        (0..n).any(|y| {
                            y != v
                                && y != x
                                && state.color_of(v, y) == Some(c)
                                && state.color_of(x, y) == Some(k)
                        })
                    })
                })
                .collect();
            if fast != brute {
                return Err(format!("forbidden_by_path({u},{v}): fast={fast:?} brute={brute:?}"));
            }
        }
    }

    // Global and per-pair counts.
    if tm::measure_q(state) != brute_q(state) {
        return fail("Q", tm::measure_q(state), brute_q(state));
    }

    let uncolored_pairs: Vec<(u32, u32)> = (0..n)
        .flat_map(|v| (0..v).map(move |u| (u, v)))
        .filter(|&(u, v)| state.is_uncolored(u, v))
        .collect();
    if uncolored_pairs.is_empty() {
        return Ok(());
    }
    let pick_pair = {
        let pairs = uncolored_pairs.clone();
        move |rng: &mut ChaCha12Rng| pairs[rng.random_range(0..pairs.len())]
    };
    let nonspecial_at = |a: u32, b: u32, rng: &mut ChaCha12Rng| -> Option<u32> {
        (0..64)
            .map(|_| rng.random_range(0..phase1))
            .find(|&k| !state.is_special(a, k) && !state.is_special(b, k))
    };

    for _ in 0..2 {
        let (u, v) = pick_pair(rng);
        if tm::measure_y(state, u, v) != brute_y(state, u, v) {
            return fail("Y", tm::measure_y(state, u, v), brute_y(state, u, v));
        }

        // A at the base edge (u,v) for a special-free color.
        if let Some(k1) = nonspecial_at(u, v, rng) {
            if tm::measure_a(state, u, v, k1) != brute_a(state, u, v, k1) {
                return fail("A", tm::measure_a(state, u, v, k1), brute_a(state, u, v, k1));
            }
        }
        // B along the cherry edge (u,v).
        if let Some(k) = nonspecial_at(u, v, rng) {
            if tm::measure_b(state, u, v, k) != brute_b(state, u, v, k) {
                return fail("B", tm::measure_b(state, u, v, k), brute_b(state, u, v, k));
            }
        }

        // D / E / F around a random vertex and color.
        let w = rng.random_range(0..n);
        let k = rng.random_range(0..phase1);
        if !state.is_special(w, k) && tm::measure_d(state, w, k) != brute_d(state, w, k) {
            return fail("D", tm::measure_d(state, w, k), brute_d(state, w, k));
        }
        if tm::measure_e(state, w, k) != brute_e(state, w, k) {
            return fail("E", tm::measure_e(state, w, k), brute_e(state, w, k));
        }
        if tm::measure_f(state, w, k) != brute_f(state, w, k) {
            return fail("F", tm::measure_f(state, w, k), brute_f(state, w, k));
        }

        // All seven tracked cherry-path patterns.
        if let Some(k) = nonspecial_at(u, v, rng) {
            for pattern in [
                (0u8, 0u8, 0u8),
                (1, 0, 0),
                (0, 1, 0),
                (0, 0, 1),
                (1, 1, 0),
                (0, 1, 1),
                (1, 0, 1),
            ] {
                let fast = tm::measure_z(state, u, v, k, pattern);
                let brute = brute_z(state, u, v, k, pattern);
                if fast != brute {
                    return Err(format!("Z{}{}{}: fast={fast} brute={brute}", pattern.0, pattern.1, pattern.2));
                }
            }
            if tm::measure_xi(state, u, v, k) != brute_xi(state, u, v, k) {
                return fail("Xi", tm::measure_xi(state, u, v, k), brute_xi(state, u, v, k));
            }
        }

        // Four-point statistics on distinct vertices.
        if n >= 4 {
            let mut verts: Vec<u32> = (0..n).collect();
            for i in 0..4 {
                let j = rng.random_range(i..verts.len());
                verts.swap(i, j);
            }
            let (a, b, c, d) = (verts[0], verts[1], verts[2], verts[3]);
            if tm::measure_phi(state, a, b, c, d) != brute_phi(state, a, b, c, d) {
                return fail("Phi", tm::measure_phi(state, a, b, c, d), brute_phi(state, a, b, c, d));
            }
            if tm::measure_lambda(state, a, b, c) != brute_lambda(state, a, b, c) {
                return fail(
                    "Lambda",
                    tm::measure_lambda(state, a, b, c),
                    brute_lambda(state, a, b, c),
                );
            }
            let (k, k2) = (rng.random_range(0..phase1), rng.random_range(0..phase1));
            if tm::measure_psi(state, a, b, k, k2) != brute_psi(state, a, b, k, k2) {
                return fail("Psi", tm::measure_psi(state, a, b, k, k2), brute_psi(state, a, b, k, k2));
            }
        }
    }

    // Candidate sets at a few uncolored triples, compared exactly.
    let mut found = 0;
    'outer: for u in 0..n {
        for u1 in 0..n {
            for u2 in u1 + 1..n {
                if u == u1 || u == u2 || !state.is_uncolored(u, u1) || !state.is_uncolored(u, u2)
                    || !state.is_uncolored(u1, u2)
                {
                    continue;
                }
                let fast = state.enumerate_candidates(u, u1, u2);
                let brute = brute_candidates(state, u, u1, u2);
                if fast != brute {
                    return Err(format!(
                        "enumerate_candidates({u},{u1},{u2}): fast={fast:?} brute={brute:?}"
                    ));
                }
                found += 1;
                if found >= 6 {
                    break 'outer;
                }
            }
        }
    }
    Ok(())
}

/// Shared with the acceptance suite: run the full telemetry / availability
/// oracle over a grid of reachable states.
pub fn run_telemetry_oracle(states: &[ColoringState]) -> Result<usize, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(0xA5A5_5A5A);
    for (i, state) in states.iter().enumerate() {
        check_state_against_oracles(state, &mut rng).map_err(|e| format!("state #{i}: {e}"))?;
    }
    Ok(states.len())
}

/// Shared with the acceptance suite: verify pairwise ≡ exhaustive on a mix
/// of random and process-produced colorings.
pub fn run_validator_equivalence(cases: u32) -> Result<u32, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(777);
    let mut checked = 0;
    while checked < cases {
        let coloring = if checked % 10 == 9 {
            // Every tenth case: a real process output.
            process_coloring(14 + (checked % 3) * 5, checked as u64)
        } else {
            let n = rng.random_range(5..=25);
            // Palettes from violation-dense to mostly-clean.
            let colors = rng.random_range(3..=2 * n);
            random_coloring(n, colors, &mut rng)
        };
        let exhaustive = verify_45_exhaustive(&coloring).map_err(|e| e.to_string())?;
        let pairwise = verify_45_pairwise(&coloring).map_err(|e| e.to_string())?;
        if exhaustive != pairwise {
            return Err(format!(
                "case {checked} (n={}): exhaustive found {} violations, pairwise {}",
                coloring.n(),
                exhaustive.len(),
                pairwise.len()
            ));
        }
        checked += 1;
    }
    Ok(checked)
}

/// Shared with the acceptance suite: replay runs under both store backends.
pub fn run_store_replays(ns: &[u32], seeds: u64) -> Result<u64, String> {
    let mut total_steps = 0;
    for &n in ns {
        for seed in 0..seeds {
            for mode in [StoreMode::Explicit, StoreMode::Rejection] {
                total_steps += replay_and_check_store(n, seed, mode)?;
            }
        }
    }
    Ok(total_steps)
}
