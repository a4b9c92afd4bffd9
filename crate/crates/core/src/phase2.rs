//! Phase 2: complete the coloring on leftover edges with the reserved
//! palette, then resample away the bad events — same-colored adjacent
//! pairs (B1), alternating 4-cycles among new edges (B2), and alternating
//! 4-cycles closed through equal-colored old edges (B3).

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{edge_endpoints, edge_index};
use crate::state::{ColoringState, Phase};

#[derive(Debug, Error, PartialEq)]
pub enum Phase2Error {
    #[error("reserved palette is empty")]
    EmptyReservedPalette,
    #[error("resampling budget exhausted with {remaining} bad events")]
    BudgetExceeded { remaining: usize },
}

/// Bad-event kinds, in resampling priority order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BadEventKind {
    /// Two adjacent phase-2 edges with equal color.
    B1,
    /// A 4-cycle of phase-2 edges whose opposite pairs are each equal-colored.
    B2,
    /// Two equal-colored phase-2 edges opposite in a 4-cycle whose other two
    /// edges carry equal phase-1 colors.
    B3,
}

/// A violation to resample: identity is (kind, phase-2 edge ids, witnesses).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BadEvent {
    pub kind: BadEventKind,
    /// The phase-2 edges to re-randomize, sorted ascending (2 for B1/B3,
    /// 4 for B2).
    pub edges: Vec<u32>,
    /// Witnessing colors: [shared] for B1, [pair, cross pair] for B2,
    /// [phase-2 pair, phase-1 cross pair] for B3.
    pub colors: Vec<u32>,
}

/// Numeric evaluation of the local-lemma condition at the run's scale,
/// recorded as a diagnostic (never asserted: the guarantee is asymptotic).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LllDiagnostic {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    /// Single-event probabilities 1/R, 1/R², 1/R for reserved size R.
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// Max, over phase-2 edges, of adjacent phase-2 edges.
    pub max_adjacent: u32,
    /// Max, over phase-2 edges, of disjoint phase-2 partners closing a
    /// 4-cycle through two more phase-2 edges.
    pub max_b2_partners: u32,
    /// Max, over phase-2 edges, of partners with an equal-colored phase-1
    /// cross pair.
    pub max_b3_partners: u32,
    /// Margin x_k·Π(1−x_j)^{d_kj} − p_k per kind (coarse worst-case
    /// dependency counts); negative means the condition fails numerically.
    pub margins: [f64; 3],
    pub satisfied: bool,
}

/// Summary of the completion phase.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Phase2Report {
    /// Edges left uncolored by phase 1 (all colored here).
    pub uncolored_at_start: u64,
    pub resample_rounds: u64,
    /// Bad events remaining (0 on success).
    pub final_bad_events: u64,
    /// Palette-enlargement fallbacks that fired.
    pub enlargements: u32,
    /// Reserved-palette size after any enlargements.
    pub final_reserved: u32,
    pub lll: LllDiagnostic,
    pub seconds: f64,
}

/// Reserved palette size currently carried by the state.
fn reserved_count(state: &ColoringState) -> u32 {
    state.total_colors() - state.palette().phase1
}

/// Color every uncolored edge with an independent uniform reserved color.
/// Flips the state into phase 2. Returns the number of edges completed.
pub fn random_complete(
    state: &mut ColoringState,
    rng: &mut ChaCha12Rng,
) -> Result<u64, Phase2Error> {
    let reserved = reserved_count(state);
    if reserved == 0 {
        return Err(Phase2Error::EmptyReservedPalette);
    }
    if state.phase() == Phase::Phase1 {
        state.begin_phase2();
    }
    let phase1 = state.palette().phase1;
    let n = state.n();
    let mut completed = 0u64;
    for v in 1..n {
        for u in 0..v {
            if state.is_uncolored(u, v) {
                let k = phase1 + rng.random_range(0..reserved);
                state.assign_phase2(u, v, k).expect("edge was uncolored");
                completed += 1;
            }
        }
    }
    Ok(completed)
}

/// Phase-2 edge ids grouped by color offset (color − phase1).
fn phase2_classes(state: &ColoringState) -> Vec<Vec<u32>> {
    let phase1 = state.palette().phase1;
    let mut classes = vec![Vec::new(); (state.total_colors() - phase1) as usize];
    for (eid, &k) in state.edges_raw().iter().enumerate() {
        if k != crate::coloring::UNCOLORED && k >= phase1 {
            classes[(k - phase1) as usize].push(eid as u32);
        }
    }
    classes
}

fn shares_vertex(a: (u32, u32), b: (u32, u32)) -> bool {
    a.0 == b.0 || a.0 == b.1 || a.1 == b.0 || a.1 == b.1
}

/// Events involving the phase-2 edge `e` under the current colors. The B2
/// search only scans pairs containing `e`, which is exhaustive for events
/// touching `e`: every B2 holds `e` in one of its equal-colored opposite
/// pairs.
fn events_at_edge(state: &ColoringState, classes: &[Vec<u32>], e: u32) -> Vec<BadEvent> {
    let phase1 = state.palette().phase1;
    let k = state.edges_raw()[e as usize];
    debug_assert!(k >= phase1 && k != crate::coloring::UNCOLORED);
    let (u, v) = edge_endpoints(e as usize);
    let mut out = Vec::new();
    for &f in &classes[(k - phase1) as usize] {
        if f == e {
            continue;
        }
        let (w, x) = edge_endpoints(f as usize);
        if shares_vertex((u, v), (w, x)) {
            let mut edges = vec![e, f];
            edges.sort_unstable();
            out.push(BadEvent { kind: BadEventKind::B1, edges, colors: vec![k] });
            continue;
        }
        // Disjoint same-colored pair: try both ways of closing the 4-cycle.
        for (c1, c2) in [((u, w), (v, x)), ((u, x), (v, w))] {
            let e1 = edge_index(c1.0, c1.1) as u32;
            let e2 = edge_index(c2.0, c2.1) as u32;
            let k1 = state.edges_raw()[e1 as usize];
            let k2 = state.edges_raw()[e2 as usize];
            if k1 == crate::coloring::UNCOLORED || k1 != k2 {
                continue;
            }
            if k1 >= phase1 {
                let mut edges = vec![e, f, e1, e2];
                edges.sort_unstable();
                out.push(BadEvent { kind: BadEventKind::B2, edges, colors: vec![k, k1] });
            } else {
                let mut edges = vec![e, f];
                edges.sort_unstable();
                out.push(BadEvent { kind: BadEventKind::B3, edges, colors: vec![k, k1] });
            }
        }
    }
    out
}

/// Exhaustive bad-event scan of a complete coloring, sorted ascending.
pub fn find_bad_events(state: &ColoringState) -> Vec<BadEvent> {
    let classes = phase2_classes(state);
    let mut set = BTreeSet::new();
    for class in &classes {
        for &e in class {
            for ev in events_at_edge(state, &classes, e) {
                set.insert(ev);
            }
        }
    }
    set.into_iter().collect()
}

/// Max phase-2 degree over vertices (pigeonhole floor for the palette).
fn max_phase2_degree(state: &ColoringState) -> u32 {
    let phase1 = state.palette().phase1;
    let n = state.n();
    let mut deg = vec![0u32; n as usize];
    for (eid, &k) in state.edges_raw().iter().enumerate() {
        if k != crate::coloring::UNCOLORED && k >= phase1 {
            let (u, v) = edge_endpoints(eid);
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
    }
    deg.into_iter().max().unwrap_or(0)
}

fn lll_diagnostic(state: &ColoringState, epsilon: f64) -> LllDiagnostic {
    let phase1 = state.palette().phase1;
    let reserved = reserved_count(state) as f64;
    let n = state.n() as f64;
    let phase2_edges: Vec<(u32, u32)> = state
        .edges_raw()
        .iter()
        .enumerate()
        .filter(|(_, &k)| k != crate::coloring::UNCOLORED && k >= phase1)
        .map(|(eid, _)| {
            let (u, v) = edge_endpoints(eid);
            (u, v)
        })
        .collect();
    let mut max_adjacent = 0u32;
    let mut max_b2 = 0u32;
    let mut max_b3 = 0u32;
    for &(u, v) in &phase2_edges {
        let mut adj = 0u32;
        let mut b2 = 0u32;
        let mut b3 = 0u32;
        for &(w, x) in &phase2_edges {
            if (w, x) == (u, v) {
                continue;
            }
            if shares_vertex((u, v), (w, x)) {
                adj += 1;
                continue;
            }
            for (c1, c2) in [((u, w), (v, x)), ((u, x), (v, w))] {
                let k1 = state.color_of(c1.0, c1.1);
                let k2 = state.color_of(c2.0, c2.1);
                match (k1, k2) {
                    (Some(a), Some(b)) if a >= phase1 && b >= phase1 => b2 += 1,
                    (Some(a), Some(b)) if a == b && a < phase1 => b3 += 1,
                    _ => {}
                }
            }
        }
        max_adjacent = max_adjacent.max(adj);
        max_b2 = max_b2.max(b2);
        max_b3 = max_b3.max(b3);
    }
    let x1 = 10.0 / (epsilon * n);
    let x2 = 10.0 / (epsilon * n).powi(2);
    let x3 = 10.0 / (epsilon * n);
    let p = [1.0 / reserved, 1.0 / (reserved * reserved), 1.0 / reserved];
    let x = [x1, x2, x3];
    // Events of kind k re-randomize m_k edges; each edge meets at most the
    // measured per-edge partner counts of each kind.
    let m = [2.0, 4.0, 2.0];
    let d = [max_adjacent as f64, max_b2 as f64, max_b3 as f64];
    let mut margins = [0.0f64; 3];
    for kind in 0..3 {
        let mut rhs = x[kind];
        for j in 0..3 {
            let dep = m[kind] * d[j];
            rhs *= (1.0 - x[j]).max(0.0).powf(dep);
        }
        margins[kind] = rhs - p[kind];
    }
    LllDiagnostic {
        x1,
        x2,
        x3,
        p1: p[0],
        p2: p[1],
        p3: p[2],
        max_adjacent,
        max_b2_partners: max_b2,
        max_b3_partners: max_b3,
        margins,
        satisfied: margins.iter().all(|&m| m >= 0.0),
    }
}

/// Resampling controls. `budget` caps rounds per palette size; with
/// enlargement enabled, exhausting it (or stalling) grows the reserved
/// palette by half and continues, so termination is guaranteed.
#[derive(Clone, Copy, Debug)]
pub struct ResampleOptions {
    pub budget: u64,
    pub allow_enlargement: bool,
}

impl ResampleOptions {
    pub fn new(budget: u64) -> Self {
        ResampleOptions { budget, allow_enlargement: true }
    }
}

/// Drive the bad-event set to ∅ by re-randomizing the lowest event's
/// phase-2 edges.
pub fn resample(
    state: &mut ColoringState,
    rng: &mut ChaCha12Rng,
    epsilon: f64,
    opts: ResampleOptions,
) -> Result<Phase2Report, Phase2Error> {
    let started = Instant::now();
    let phase1 = state.palette().phase1;
    let uncolored_at_start = state
        .edges_raw()
        .iter()
        .filter(|&&k| k != crate::coloring::UNCOLORED && k >= phase1)
        .count() as u64;
    let mut enlargements = 0u32;

    // Pigeonhole pre-pass: a vertex with d new edges needs d distinct
    // colors, so a reserved palette below the max phase-2 degree can never
    // become B1-free. Jump straight there rather than burn the budget.
    if opts.allow_enlargement {
        let need = max_phase2_degree(state);
        let have = reserved_count(state);
        if have < need {
            state.enlarge_palette(need - have);
            enlargements += 1;
        }
    }

    let mut classes = phase2_classes(state);
    let grow_classes = |classes: &mut Vec<Vec<u32>>, total: u32| {
        classes.resize((total - phase1) as usize, Vec::new());
    };
    grow_classes(&mut classes, state.total_colors());

    // The live event set, plus a per-edge index so a resample only touches
    // events sharing an edge with it instead of scanning everything.
    let mut events: BTreeSet<BadEvent> = find_bad_events(state).into_iter().collect();
    let mut by_edge: HashMap<u32, BTreeSet<BadEvent>> = HashMap::new();
    for ev in &events {
        for &e in &ev.edges {
            by_edge.entry(e).or_default().insert(ev.clone());
        }
    }

    let mut rounds = 0u64;
    let mut rounds_at_size = 0u64;
    let mut best_seen = events.len();
    let mut stalled_for = 0u64;

    while let Some(ev) = events.first().cloned() {
        let stall_window = 2000u64.max(2 * uncolored_at_start);
        let exhausted = rounds_at_size >= opts.budget;
        let stalled = stalled_for >= stall_window;
        if exhausted || (stalled && opts.allow_enlargement) {
            if !opts.allow_enlargement {
                return Err(Phase2Error::BudgetExceeded { remaining: events.len() });
            }
            let grow = (reserved_count(state) / 2).max(1);
            state.enlarge_palette(grow);
            grow_classes(&mut classes, state.total_colors());
            enlargements += 1;
            rounds_at_size = 0;
            stalled_for = 0;
            best_seen = events.len();
            continue;
        }
        rounds += 1;
        rounds_at_size += 1;

        // Drop every event touching the edges about to change.
        for &eid in &ev.edges {
            let Some(touched) = by_edge.remove(&eid) else { continue };
            for t in touched {
                for &other in &t.edges {
                    if other != eid {
                        if let Some(set) = by_edge.get_mut(&other) {
                            set.remove(&t);
                        }
                    }
                }
                events.remove(&t);
            }
        }
        // Re-randomize and re-scan around the changed edges.
        let reserved = reserved_count(state);
        for &eid in &ev.edges {
            let old = state.edges_raw()[eid as usize];
            let new = phase1 + rng.random_range(0..reserved);
            state.recolor_phase2(eid, new);
            let old_class = &mut classes[(old - phase1) as usize];
            let pos = old_class.iter().position(|&e| e == eid).expect("edge in class");
            old_class.swap_remove(pos);
            classes[(new - phase1) as usize].push(eid);
        }
        for &eid in &ev.edges {
            for fresh in events_at_edge(state, &classes, eid) {
                if events.insert(fresh.clone()) {
                    for &e in &fresh.edges {
                        by_edge.entry(e).or_default().insert(fresh.clone());
                    }
                }
            }
        }

        if events.len() < best_seen {
            best_seen = events.len();
            stalled_for = 0;
        } else {
            stalled_for += 1;
        }
    }

    debug_assert!(find_bad_events(state).is_empty());
    Ok(Phase2Report {
        uncolored_at_start,
        resample_rounds: rounds,
        final_bad_events: events.len() as u64,
        enlargements,
        final_reserved: reserved_count(state),
        lll: lll_diagnostic(state, epsilon),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Complete phase 2 end to end: random completion, then resampling.
pub fn complete_phase2(
    state: &mut ColoringState,
    rng: &mut ChaCha12Rng,
    epsilon: f64,
    opts: ResampleOptions,
) -> Result<Phase2Report, Phase2Error> {
    random_complete(state, rng)?;
    resample(state, rng, epsilon, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{NoPairPolicy, ProcessConfig};
    use crate::phase1::run_phase1;
    use crate::rng::{substream, Substream};

    fn after_phase1(n: u32, seed: u64) -> (ColoringState, ChaCha12Rng, ProcessConfig) {
        let eps = if n < 24 { 0.5 } else { 0.1 };
        let mut cfg = ProcessConfig::new(n, eps, seed);
        cfg.on_no_pair = NoPairPolicy::Skip;
        let mut state = ColoringState::init(&cfg).unwrap();
        let mut rng1 = substream(seed, Substream::Phase1);
        run_phase1(&mut state, &mut rng1, &cfg, None);
        let rng2 = substream(seed, Substream::Phase2);
        (state, rng2, cfg)
    }

    #[test]
    fn random_complete_fills_with_reserved_colors() {
        let (mut state, mut rng, _) = after_phase1(15, 3);
        let before = state.uncolored_edges();
        assert!(before > 0);
        let completed = random_complete(&mut state, &mut rng).unwrap();
        assert_eq!(completed, before);
        assert_eq!(state.uncolored_edges(), 0);
        let phase1 = state.palette().phase1;
        let total = state.total_colors();
        let mut reserved_used = 0u64;
        for &k in state.edges_raw() {
            assert_ne!(k, crate::coloring::UNCOLORED);
            if k >= phase1 {
                assert!(k < total);
                reserved_used += 1;
            }
        }
        assert_eq!(reserved_used, before);
    }

    #[test]
    fn random_complete_is_uniform_over_reserved() {
        let (state0, _, _) = after_phase1(15, 3);
        let reserved = (state0.total_colors() - state0.palette().phase1) as usize;
        assert!(reserved >= 2);
        let leftover = state0.uncolored_edges();
        let trials = 2_000u64;
        let mut counts = vec![0u64; reserved];
        for trial in 0..trials {
            let (mut state, _, _) = after_phase1(15, 3);
            let mut rng = substream(1000 + trial, Substream::Phase2);
            random_complete(&mut state, &mut rng).unwrap();
            let phase1 = state.palette().phase1;
            for &k in state.edges_raw() {
                if k >= phase1 && k != crate::coloring::UNCOLORED {
                    counts[(k - phase1) as usize] += 1;
                }
            }
        }
        let total = trials * leftover;
        let exp = total as f64 / reserved as f64;
        let sigma = (exp * (1.0 - 1.0 / reserved as f64)).sqrt();
        for &c in &counts {
            assert!((c as f64 - exp).abs() < 5.0 * sigma, "color skew: {c} vs {exp}");
        }
    }

    #[test]
    fn hand_built_b1_is_found() {
        let (mut state, _, _) = after_phase1(15, 7);
        state.begin_phase2();
        let phase1 = state.palette().phase1;
        // Find two adjacent uncolored edges... after phase 1 at small n the
        // leftover graph is non-trivial; construct adjacency directly.
        let n = state.n();
        let mut pair = None;
        'outer: for v in 0..n {
            let mut at_v = Vec::new();
            for u in 0..n {
                if u != v && state.is_uncolored(u, v) {
                    at_v.push(u);
                    if at_v.len() == 2 {
                        pair = Some((v, at_v[0], at_v[1]));
                        break 'outer;
                    }
                }
            }
        }
        let Some((v, a, b)) = pair else {
            // Leftover graph has max degree ≤ 1; B1 cannot be built here.
            return;
        };
        state.assign_phase2(v, a, phase1).unwrap();
        state.assign_phase2(v, b, phase1).unwrap();
        let events = find_bad_events(&state);
        let expected_edges = {
            let mut e = vec![edge_index(v, a) as u32, edge_index(v, b) as u32];
            e.sort_unstable();
            e
        };
        assert!(events
            .iter()
            .any(|ev| ev.kind == BadEventKind::B1 && ev.edges == expected_edges));
    }

    #[test]
    fn hand_built_b3_is_found() {
        // Build the configuration directly on a fresh state: phase-1 colors
        // c(uw)=c(vx), then phase-2 e1=uv, e3=wx with equal reserved color.
        for seed in 0..50 {
            let eps = 0.5;
            let cfg = ProcessConfig::new(12, eps, seed);
            let mut state = ColoringState::init(&cfg).unwrap();
            let (u, v, w, x) = (0u32, 1u32, 2u32, 3u32);
            let phase1 = state.palette().phase1;
            let Some(k) = (0..phase1)
                .find(|&k| state.available_at_edge(u, w, k) && state.available_at_edge(v, x, k))
            else {
                continue;
            };
            state.assign_color(u, w, k).unwrap();
            state.assign_color(v, x, k).unwrap();
            state.begin_phase2();
            state.assign_phase2(u, v, phase1).unwrap();
            state.assign_phase2(w, x, phase1).unwrap();
            let events = find_bad_events(&state);
            let mut expected = vec![edge_index(u, v) as u32, edge_index(w, x) as u32];
            expected.sort_unstable();
            assert!(
                events
                    .iter()
                    .any(|ev| ev.kind == BadEventKind::B3 && ev.edges == expected),
                "B3 not found among {events:?}"
            );
            // The two phase-2 edges are disjoint and differently colored from
            // any adjacent pair, so no B1 should involve them both.
            return;
        }
        panic!("no seed admitted the construction");
    }

    #[test]
    fn hand_built_b2_is_found() {
        let cfg = ProcessConfig::new(12, 0.5, 1);
        let mut state = ColoringState::init(&cfg).unwrap();
        state.begin_phase2();
        let phase1 = state.palette().phase1;
        let (u, v, w, x) = (0u32, 1u32, 2u32, 3u32);
        // 4-cycle u-v-w-x-u: opposite pairs (uv, wx) and (vw, xu).
        state.assign_phase2(u, v, phase1).unwrap();
        state.assign_phase2(w, x, phase1).unwrap();
        state.assign_phase2(v, w, phase1 + 1).unwrap();
        state.assign_phase2(x, u, phase1 + 1).unwrap();
        let events = find_bad_events(&state);
        let mut expected: Vec<u32> = [
            edge_index(u, v),
            edge_index(w, x),
            edge_index(v, w),
            edge_index(x, u),
        ]
        .iter()
        .map(|&e| e as u32)
        .collect();
        expected.sort_unstable();
        assert!(events
            .iter()
            .any(|ev| ev.kind == BadEventKind::B2 && ev.edges == expected));
    }

    #[test]
    fn find_bad_events_matches_definitional_scan() {
        // O(n⁴) definition: scan all vertex 4-tuples for each kind.
        for seed in [2u64, 5, 9] {
            let (mut state, mut rng, _) = after_phase1(14, seed);
            random_complete(&mut state, &mut rng).unwrap();
            let phase1 = state.palette().phase1;
            let n = state.n();
            let is_p2 = |a: u32, b: u32| state.color_of(a, b).is_some_and(|k| k >= phase1);
            let mut brute: BTreeSet<BadEvent> = BTreeSet::new();
            // B1.
            for v in 0..n {
                for a in 0..n {
                    for b in a + 1..n {
                        if a == v || b == v || !is_p2(v, a) || !is_p2(v, b) {
                            continue;
                        }
                        let (ka, kb) =
                            (state.color_of(v, a).unwrap(), state.color_of(v, b).unwrap());
                        if ka == kb {
                            let mut edges =
                                vec![edge_index(v, a) as u32, edge_index(v, b) as u32];
                            edges.sort_unstable();
                            brute.insert(BadEvent {
                                kind: BadEventKind::B1,
                                edges,
                                colors: vec![ka],
                            });
                        }
                    }
                }
            }
            // B2 and B3 over labeled 4-cycles a-b-c-d-a.
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut s = vec![a, b, c, d];
                            s.sort_unstable();
                            s.dedup();
                            if s.len() != 4 {
                                continue;
                            }
                            let (k_ab, k_cd) = (
                                state.color_of(a, b).unwrap(),
                                state.color_of(c, d).unwrap(),
                            );
                            let (k_bc, k_da) = (
                                state.color_of(b, c).unwrap(),
                                state.color_of(d, a).unwrap(),
                            );
                            if !(is_p2(a, b) && is_p2(c, d) && k_ab == k_cd) {
                                continue;
                            }
                            if is_p2(b, c) && is_p2(d, a) && k_bc == k_da {
                                let mut edges: Vec<u32> = [
                                    edge_index(a, b),
                                    edge_index(c, d),
                                    edge_index(b, c),
                                    edge_index(d, a),
                                ]
                                .iter()
                                .map(|&e| e as u32)
                                .collect();
                                edges.sort_unstable();
                                brute.insert(BadEvent {
                                    kind: BadEventKind::B2,
                                    edges,
                                    colors: vec![k_ab, k_bc],
                                });
                            }
                            if !is_p2(b, c) && !is_p2(d, a) && k_bc == k_da {
                                let mut edges =
                                    vec![edge_index(a, b) as u32, edge_index(c, d) as u32];
                                edges.sort_unstable();
                                brute.insert(BadEvent {
                                    kind: BadEventKind::B3,
                                    edges,
                                    colors: vec![k_ab, k_bc],
                                });
                            }
                        }
                    }
                }
            }
            let fast: BTreeSet<BadEvent> = find_bad_events(&state).into_iter().collect();
            assert_eq!(fast, brute, "seed {seed}");
        }
    }

    #[test]
    fn resample_reaches_zero_bad_events() {
        for seed in [1u64, 4, 8] {
            let (mut state, mut rng, cfg) = after_phase1(15, seed);
            let report =
                complete_phase2(&mut state, &mut rng, cfg.epsilon, ResampleOptions::new(1_000_000))
                    .unwrap();
            assert_eq!(report.final_bad_events, 0);
            assert!(find_bad_events(&state).is_empty());
            assert_eq!(state.uncolored_edges(), 0);
            assert_eq!(report.final_reserved, reserved_count(&state));
            // Phase-1 edges untouched by phase 2.
            let phase1 = state.palette().phase1;
            let colored_p1 = state
                .edges_raw()
                .iter()
                .filter(|&&k| k != crate::coloring::UNCOLORED && k < phase1)
                .count() as u64;
            assert_eq!(colored_p1 + report.uncolored_at_start, state.edges_raw().len() as u64);
        }
    }

    #[test]
    fn zero_bad_events_means_zero_rounds() {
        // A 1-edge leftover cannot produce any bad event.
        let cfg = ProcessConfig::new(12, 0.5, 3);
        let mut state = ColoringState::init(&cfg).unwrap();
        state.begin_phase2();
        state.assign_phase2(0, 1, state.palette().phase1).unwrap();
        // Other edges get phase-1 colors directly? Not needed: resample only
        // looks at phase-2 edges.
        let mut rng = substream(3, Substream::Phase2);
        let report =
            resample(&mut state, &mut rng, 0.5, ResampleOptions::new(1000)).unwrap();
        assert_eq!(report.resample_rounds, 0);
        assert_eq!(report.enlargements, 0);
    }

    #[test]
    fn budget_exceeded_without_enlargement() {
        // Reserved palette of size 1 with an unavoidable B1: a vertex with
        // two leftover edges can never be fixed.
        let cfg = ProcessConfig::new(12, 0.5, 6);
        let mut state = ColoringState::init(&cfg).unwrap();
        state.begin_phase2();
        let phase1 = state.palette().phase1;
        state.assign_phase2(0, 1, phase1).unwrap();
        state.assign_phase2(0, 2, phase1).unwrap();
        let mut rng = substream(6, Substream::Phase2);
        let reserved = reserved_count(&state);
        // Force every redraw onto one color by shrinking... reserved ≥ 2 here,
        // so instead check the enlargement path succeeds and the hard-budget
        // path errors when enlargement is disabled and the budget is tiny.
        assert!(reserved >= 2);
        let err = resample(
            &mut state,
            &mut rng,
            0.5,
            ResampleOptions { budget: 0, allow_enlargement: false },
        );
        assert_eq!(err.unwrap_err(), Phase2Error::BudgetExceeded { remaining: 1 });
        let ok = resample(&mut state, &mut rng, 0.5, ResampleOptions::new(1000)).unwrap();
        assert_eq!(ok.final_bad_events, 0);
    }

    #[test]
    fn lll_diagnostic_reports_dependency_counts() {
        let (mut state, mut rng, cfg) = after_phase1(15, 2);
        let report =
            complete_phase2(&mut state, &mut rng, cfg.epsilon, ResampleOptions::new(1_000_000))
                .unwrap();
        let d = &report.lll;
        assert!(d.x1 > 0.0 && d.x2 > 0.0 && d.x3 > 0.0);
        assert!(d.p1 > 0.0 && d.p1 <= 1.0);
        // At desk scale the condition typically fails; only shape is checked.
        assert_eq!(d.satisfied, d.margins.iter().all(|&m| m >= 0.0));
    }
}
