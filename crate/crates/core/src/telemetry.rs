//! Live measurement of the tracked random variables: definitional counters
//! over the current state, sampled at checkpoints and compared against the
//! predicted trajectories and their error windows.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::bits;
use crate::coloring::edge_count;
use crate::config::ProcessConfig;
use crate::rng::{substream, Substream};
use crate::state::ColoringState;
use crate::trajectories::{err, traj, ErrId, TrajId, TrajectoryParams};

const MAX_WORDS: usize = 64;

/// A tracked-variable family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Q,
    Y,
    A,
    B,
    C1,
    C2,
    D,
    E,
    F,
    /// Cherry-path pattern (a1, a2, a3): 1 = edge colored, 0 = color available.
    Z(u8, u8, u8),
    Xi,
    Phi,
    Psi,
    Lambda,
    Degree,
}

impl Family {
    pub const ALL: [Family; 21] = [
        Family::Q,
        Family::Y,
        Family::A,
        Family::B,
        Family::C1,
        Family::C2,
        Family::D,
        Family::E,
        Family::F,
        Family::Z(0, 0, 0),
        Family::Z(1, 0, 0),
        Family::Z(0, 1, 0),
        Family::Z(0, 0, 1),
        Family::Z(1, 1, 0),
        Family::Z(1, 0, 1),
        Family::Z(0, 1, 1),
        Family::Xi,
        Family::Phi,
        Family::Psi,
        Family::Lambda,
        Family::Degree,
    ];

    pub fn name(self) -> String {
        match self {
            Family::Q => "Q".into(),
            Family::Y => "Y".into(),
            Family::A => "A".into(),
            Family::B => "B".into(),
            Family::C1 => "C1".into(),
            Family::C2 => "C2".into(),
            Family::D => "D".into(),
            Family::E => "E".into(),
            Family::F => "F".into(),
            Family::Z(a, b, c) => format!("Z{a}{b}{c}"),
            Family::Xi => "Xi".into(),
            Family::Phi => "Phi".into(),
            Family::Psi => "Psi".into(),
            Family::Lambda => "Lambda".into(),
            Family::Degree => "degree".into(),
        }
    }

    /// Trajectory backing this family's prediction, if it has one.
    fn trajectory(self) -> Option<TrajId> {
        match self {
            Family::Q => Some(TrajId::Q),
            Family::Y => Some(TrajId::Y),
            Family::A => Some(TrajId::A),
            Family::B => Some(TrajId::B),
            Family::C1 => Some(TrajId::C1),
            Family::C2 => Some(TrajId::C2),
            Family::D => Some(TrajId::D),
            Family::E => Some(TrajId::E),
            Family::F => Some(TrajId::F),
            Family::Z(a, b, c) => Some(match a + b + c {
                0 => TrajId::Z0,
                1 => TrajId::Z1,
                _ => TrajId::Z2,
            }),
            _ => None,
        }
    }

    fn window(self) -> Option<ErrId> {
        match self {
            Family::Q => Some(ErrId::GQ),
            Family::Y => Some(ErrId::GY),
            Family::A | Family::B => Some(ErrId::GAb),
            Family::C1 => Some(ErrId::GC1),
            Family::C2 => Some(ErrId::GC2),
            Family::D | Family::E | Family::F => Some(ErrId::GDef),
            Family::Z(a, b, c) => Some(match a + b + c {
                0 => ErrId::G0,
                1 => ErrId::G1,
                _ => ErrId::G2,
            }),
            _ => None,
        }
    }

    /// The expensive families get a smaller default sample count.
    fn is_heavy(self) -> bool {
        matches!(
            self,
            Family::D
                | Family::E
                | Family::F
                | Family::Z(0, 0, 0)
                | Family::Z(1, 0, 0)
                | Family::Z(0, 0, 1)
        )
    }
}

/// How much to sample per checkpoint.
#[derive(Clone, Debug)]
pub struct SamplePlan {
    /// Samples per cheap family.
    pub m_cheap: u32,
    /// Samples per heavy family (full O(n²)-per-evaluation counters).
    pub m_heavy: u32,
    /// Rejection budget when drawing valid argument tuples.
    pub max_tries: u32,
    /// Families to measure.
    pub families: Vec<Family>,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan { m_cheap: 32, m_heavy: 8, max_tries: 100, families: Family::ALL.to_vec() }
    }
}

impl SamplePlan {
    fn m_for(&self, family: Family) -> u32 {
        if family.is_heavy() {
            self.m_heavy
        } else {
            self.m_cheap
        }
    }
}

/// One measurement row.
#[derive(Clone, Debug, PartialEq)]
pub struct TelemetryRecord {
    pub step: u64,
    pub t: f64,
    pub family: String,
    pub args: Vec<u32>,
    pub empirical: f64,
    pub predicted: f64,
    pub rel_dev: f64,
    pub window: f64,
    pub in_window: bool,
}

impl TelemetryRecord {
    pub fn to_csv_line(&self) -> String {
        let args =
            self.args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";");
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.step,
            self.t,
            self.family,
            args,
            self.empirical,
            self.predicted,
            self.rel_dev,
            self.window,
            self.in_window
        )
    }

    pub fn from_csv_line(line: &str) -> Option<TelemetryRecord> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return None;
        }
        let args = if f[3].is_empty() {
            Vec::new()
        } else {
            f[3].split(';').map(|a| a.parse().ok()).collect::<Option<Vec<u32>>>()?
        };
        Some(TelemetryRecord {
            step: f[0].parse().ok()?,
            t: f[1].parse().ok()?,
            family: f[2].to_string(),
            args,
            empirical: f[4].parse().ok()?,
            predicted: f[5].parse().ok()?,
            rel_dev: f[6].parse().ok()?,
            window: f[7].parse().ok()?,
            in_window: f[8].parse().ok()?,
        })
    }
}

pub const CSV_HEADER: &str = "step,t,family,args,empirical,predicted,rel_dev,window,in_window";

// ============================================================================
// Definitional counters
// ============================================================================

/// Number of all-uncolored triangles.
pub fn measure_q(state: &ColoringState) -> u64 {
    state.store.uncolored_count()
}

/// Number of vertices closing an uncolored cherry over the uncolored edge
/// `uu′`: both `u u″` and `u′ u″` uncolored.
pub fn measure_y(state: &ColoringState, u: u32, u1: u32) -> u64 {
    (0..state.n())
        .filter(|&w| w != u && w != u1 && state.is_uncolored(u, w) && state.is_uncolored(u1, w))
        .count() as u64
}

fn avail_mask(state: &ColoringState, a: u32, b: u32) -> [u64; MAX_WORDS] {
    let mut mask = [0u64; MAX_WORDS];
    let words = bits::words_for(state.palette().phase1);
    state.edge_avail_mask(a, b, &mut mask[..words]);
    mask
}

/// Pairs `(u, k)` with `k` available at both `u u′` and `u u″` and
/// `k′ ∈ S_u`, for the uncolored edge `u′u″`.
pub fn measure_a(state: &ColoringState, u1: u32, u2: u32, k1: u32) -> u64 {
    debug_assert!(state.is_uncolored(u1, u2));
    debug_assert!(!state.is_special(u1, k1) && !state.is_special(u2, k1));
    let words = bits::words_for(state.palette().phase1);
    let mut count = 0u64;
    for u in 0..state.n() {
        if u == u1 || u == u2 || !state.is_special(u, k1) {
            continue;
        }
        if !state.is_uncolored(u, u1) || !state.is_uncolored(u, u2) {
            continue;
        }
        let m1 = avail_mask(state, u, u1);
        let m2 = avail_mask(state, u, u2);
        for w in 0..words {
            count += (m1[w] & m2[w]).count_ones() as u64;
        }
    }
    count
}

/// Pairs `(u″, k′)` with `k` available at `u u″` and `k′ ∈ S_u` available at
/// `u′ u″`, for the uncolored edge `u u′`.
pub fn measure_b(state: &ColoringState, u: u32, u1: u32, k: u32) -> u64 {
    debug_assert!(state.is_uncolored(u, u1));
    debug_assert!(!state.is_special(u, k) && !state.is_special(u1, k));
    let words = bits::words_for(state.palette().phase1);
    let su = state.special_set(u).words();
    let mut count = 0u64;
    for u2 in 0..state.n() {
        if u2 == u || u2 == u1 {
            continue;
        }
        if !state.is_uncolored(u1, u2) || !state.available_at_edge(u, u2, k) {
            continue;
        }
        let m = avail_mask(state, u1, u2);
        for w in 0..words {
            count += (su[w] & m[w]).count_ones() as u64;
        }
    }
    count
}

/// Candidate-set sizes at an oriented uncolored triple.
pub fn measure_c1c2(state: &ColoringState, u: u32, u1: u32, u2: u32) -> (u64, u64) {
    let (c1, c2) = state.enumerate_candidates(u, u1, u2);
    (c1.len() as u64, c2.len() as u64)
}

/// Ordered triples `(u′, u″, k′)` such that `(k, k′)` is available at the
/// oriented triple `(u, u′, u″)`, for a fixed apex `u` and color `k ∉ S_u`.
pub fn measure_d(state: &ColoringState, u: u32, k: u32) -> u64 {
    debug_assert!(!state.is_special(u, k));
    let words = bits::words_for(state.palette().phase1);
    let su = state.special_set(u).words();
    let n = state.n();
    let mut count = 0u64;
    for u1 in 0..n {
        if u1 == u || !state.is_uncolored(u, u1) || !state.available_at_edge(u, u1, k) {
            continue;
        }
        for u2 in u1 + 1..n {
            if u2 == u
                || !state.is_uncolored(u, u2)
                || !state.is_uncolored(u1, u2)
                || !state.available_at_edge(u, u2, k)
            {
                continue;
            }
            let m = avail_mask(state, u1, u2);
            let mut c = 0u64;
            for w in 0..words {
                c += (su[w] & m[w]).count_ones() as u64;
            }
            // (u′, u″) and (u″, u′) both count: the condition is symmetric.
            count += 2 * c;
        }
    }
    count
}

/// Ordered triples `(u, u′, k′)` such that `(k, k′)` is available at
/// `(u, u′, u″)`, for a fixed base vertex `u″` and color `k`.
pub fn measure_e(state: &ColoringState, u2: u32, k: u32) -> u64 {
    let words = bits::words_for(state.palette().phase1);
    let n = state.n();
    let mut count = 0u64;
    for u in 0..n {
        if u == u2 || state.is_special(u, k) {
            continue;
        }
        if !state.is_uncolored(u, u2) || !state.available_at_edge(u, u2, k) {
            continue;
        }
        let su = state.special_set(u).words();
        for u1 in 0..n {
            if u1 == u || u1 == u2 {
                continue;
            }
            if !state.is_uncolored(u, u1)
                || !state.is_uncolored(u1, u2)
                || !state.available_at_edge(u, u1, k)
            {
                continue;
            }
            let m = avail_mask(state, u1, u2);
            let mut c = 0u64;
            for w in 0..words {
                c += (su[w] & m[w]).count_ones() as u64;
            }
            count += c;
        }
    }
    count
}

/// Ordered triples `(u, u′, k)` such that `(k, k′)` is available at
/// `(u, u′, u″)`, for a fixed base vertex `u″` and single color `k′`.
pub fn measure_f(state: &ColoringState, u2: u32, k1: u32) -> u64 {
    let words = bits::words_for(state.palette().phase1);
    let n = state.n();
    let mut count = 0u64;
    for u in 0..n {
        if u == u2 || !state.is_special(u, k1) {
            continue;
        }
        if !state.is_uncolored(u, u2) {
            continue;
        }
        for u1 in 0..n {
            if u1 == u || u1 == u2 {
                continue;
            }
            if !state.is_uncolored(u, u1)
                || !state.is_uncolored(u1, u2)
                || !state.available_at_edge(u1, u2, k1)
            {
                continue;
            }
            let m1 = avail_mask(state, u, u1);
            let m2 = avail_mask(state, u, u2);
            let su = state.special_set(u).words();
            let mut c = 0u64;
            for w in 0..words {
                c += (m1[w] & m2[w] & !su[w]).count_ones() as u64;
            }
            count += c;
        }
    }
    count
}

/// Cherry-path statistic: triples `(x, y, k′)` over the path
/// `u –e1– x –e2– y –e3– v` with colors `(k′, k, k′)`, where pattern bit 1
/// means "edge colored with that color" and 0 means "color available there".
pub fn measure_z(
    state: &ColoringState,
    u: u32,
    v: u32,
    k: u32,
    pattern: (u8, u8, u8),
) -> u64 {
    debug_assert!(pattern != (1, 1, 1), "fully colored pattern is not tracked");
    debug_assert!(state.is_uncolored(u, v));
    debug_assert!(!state.is_special(u, k) && !state.is_special(v, k));
    let n = state.n();
    let words = bits::words_for(state.palette().phase1);
    let excluded = |x: u32, y: u32| x == y || x == u || x == v || y == u || y == v;
    let mut count = 0u64;
    match pattern {
        (0, 0, 0) => {
            for x in 0..n {
                for y in 0..n {
                    if excluded(x, y) || !state.available_at_edge(x, y, k) {
                        continue;
                    }
                    if !state.is_uncolored(u, x) || !state.is_uncolored(y, v) {
                        continue;
                    }
                    let m1 = avail_mask(state, u, x);
                    let m3 = avail_mask(state, y, v);
                    for w in 0..words {
                        count += (m1[w] & m3[w]).count_ones() as u64;
                    }
                }
            }
        }
        (0, 1, 0) => {
            for &eid in state.edges_of_color(k) {
                let (a, b) = crate::coloring::edge_endpoints(eid as usize);
                for (x, y) in [(a, b), (b, a)] {
                    if excluded(x, y) || !state.is_uncolored(u, x) || !state.is_uncolored(y, v)
                    {
                        continue;
                    }
                    let m1 = avail_mask(state, u, x);
                    let m3 = avail_mask(state, y, v);
                    for w in 0..words {
                        count += (m1[w] & m3[w]).count_ones() as u64;
                    }
                }
            }
        }
        (1, 0, 0) => {
            for (x, k1) in state.colored_neighbors(u) {
                if x == v {
                    continue;
                }
                for y in 0..n {
                    if excluded(x, y) {
                        continue;
                    }
                    if state.available_at_edge(x, y, k) && state.available_at_edge(y, v, k1) {
                        count += 1;
                    }
                }
            }
        }
        (0, 0, 1) => {
            for (y, k1) in state.colored_neighbors(v) {
                if y == u {
                    continue;
                }
                for x in 0..n {
                    if excluded(x, y) {
                        continue;
                    }
                    if state.available_at_edge(u, x, k1) && state.available_at_edge(x, y, k) {
                        count += 1;
                    }
                }
            }
        }
        (1, 1, 0) => {
            for &eid in state.edges_of_color(k) {
                let (a, b) = crate::coloring::edge_endpoints(eid as usize);
                for (x, y) in [(a, b), (b, a)] {
                    if excluded(x, y) {
                        continue;
                    }
                    if let Some(k1) = state.color_of(u, x) {
                        if state.available_at_edge(y, v, k1) {
                            count += 1;
                        }
                    }
                }
            }
        }
        (0, 1, 1) => {
            for &eid in state.edges_of_color(k) {
                let (a, b) = crate::coloring::edge_endpoints(eid as usize);
                for (x, y) in [(a, b), (b, a)] {
                    if excluded(x, y) {
                        continue;
                    }
                    if let Some(k1) = state.color_of(y, v) {
                        if state.available_at_edge(u, x, k1) {
                            count += 1;
                        }
                    }
                }
            }
        }
        (1, 0, 1) => {
            for k1 in state.hit_set(u).intersection(state.hit_set(v)) {
                for x in state.partners(u, k1) {
                    for y in state.partners(v, k1) {
                        if excluded(x, y) {
                            continue;
                        }
                        if state.available_at_edge(x, y, k) {
                            count += 1;
                        }
                    }
                }
            }
        }
        _ => unreachable!("invalid pattern"),
    }
    count
}

/// Alternating-path count: pairs `(x, y)` with `color(ux) = color(vy)` and
/// `color(xy) = k`.
pub fn measure_xi(state: &ColoringState, u: u32, v: u32, k: u32) -> u64 {
    let mut count = 0u64;
    for c in state.hit_set(u).intersection(state.hit_set(v)) {
        for x in state.partners(u, c) {
            for y in state.partners(v, c) {
                if x != y && state.color_of(x, y) == Some(k) {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Pairs `(x, y)` with `color(ux) = color(u′y)` and `color(vx) = color(v′y)`.
pub fn measure_phi(state: &ColoringState, u: u32, u1: u32, v: u32, v1: u32) -> u64 {
    let mut count = 0u64;
    for c in state.hit_set(u).intersection(state.hit_set(u1)) {
        for x in state.partners(u, c) {
            for y in state.partners(u1, c) {
                if x == v || y == v1 {
                    continue;
                }
                match (state.color_of(v, x), state.color_of(v1, y)) {
                    (Some(a), Some(b)) if a == b => count += 1,
                    _ => {}
                }
            }
        }
    }
    count
}

/// Triples `(x, y, z)` with `color(ux) = color(zu″)`, `color(xy) = k`, and
/// `color(yz) = k″`.
pub fn measure_psi(state: &ColoringState, u: u32, u2: u32, k: u32, k2: u32) -> u64 {
    let mut count = 0u64;
    for c in state.hit_set(u).intersection(state.hit_set(u2)) {
        for x in state.partners(u, c) {
            for z in state.partners(u2, c) {
                if x == z {
                    continue;
                }
                // y joins x by color k and z by color k″.
                for y in state.partners(x, k) {
                    if y != z && y != x && state.color_of(y, z) == Some(k2) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Pairs `(x, y)` with `color(ux) = color(vy)` and `color(vx) = color(wy)`.
pub fn measure_lambda(state: &ColoringState, u: u32, v: u32, w: u32) -> u64 {
    let mut count = 0u64;
    for c in state.hit_set(u).intersection(state.hit_set(v)) {
        for x in state.partners(u, c) {
            for y in state.partners(v, c) {
                if x == v || y == w {
                    continue;
                }
                match (state.color_of(v, x), state.color_of(w, y)) {
                    (Some(a), Some(b)) if a == b => count += 1,
                    _ => {}
                }
            }
        }
    }
    count
}

// ============================================================================
// Snapshotting
// ============================================================================

/// Collects telemetry over a run: owns the sampling RNG substream and the
/// accumulated records.
pub struct TelemetrySink {
    pub plan: SamplePlan,
    pub params: TrajectoryParams,
    n: u32,
    rng: ChaCha12Rng,
    pub records: Vec<TelemetryRecord>,
}

impl TelemetrySink {
    pub fn new(config: &ProcessConfig) -> Self {
        TelemetrySink::with_plan(config, SamplePlan::default())
    }

    pub fn with_plan(config: &ProcessConfig, plan: SamplePlan) -> Self {
        TelemetrySink {
            plan,
            params: TrajectoryParams::new(config.n as f64, config.epsilon),
            n: config.n,
            rng: substream(config.seed, Substream::Telemetry),
            records: Vec::new(),
        }
    }

    /// Measure every enabled family on the frozen state.
    pub fn snapshot(&mut self, state: &ColoringState, step: u64) {
        let t = step as f64 / (self.n as f64 * self.n as f64);
        let families = self.plan.families.clone();
        for family in families {
            self.snapshot_family(state, step, t, family);
        }
    }

    fn predicted(&self, family: Family, t: f64) -> f64 {
        let id = family.trajectory().expect("trajectory family");
        let nf = self.n as f64;
        nf.powi(id.power()) * traj(id, t, self.params.s).unwrap_or(f64::NAN)
    }

    /// Natural log of the window width `n^power · g(t)`, which can overflow
    /// a double at desk n long before t ends — kept in log-space.
    fn ln_window(&self, family: Family, t: f64) -> f64 {
        let id = family.trajectory().expect("trajectory family");
        let g = match err(family.window().expect("window family"), t, &self.params) {
            Ok(e) => e.ln,
            Err(_) => f64::INFINITY,
        };
        id.power() as f64 * (self.n as f64).ln() + g
    }

    fn push_traj_record(
        &mut self,
        step: u64,
        t: f64,
        family: Family,
        args: Vec<u32>,
        empirical: u64,
    ) {
        let predicted = self.predicted(family, t);
        let ln_window = self.ln_window(family, t);
        let empirical = empirical as f64;
        let rel_dev = if predicted > 0.0 { empirical / predicted - 1.0 } else { f64::NAN };
        let in_window = (empirical - predicted).abs().ln() <= ln_window;
        self.records.push(TelemetryRecord {
            step,
            t,
            family: family.name(),
            args,
            empirical,
            predicted,
            rel_dev,
            window: ln_window.exp(),
            in_window,
        });
    }

    /// Record for the bounded families (Ξ, Φ, Ψ, Λ): compared against the
    /// ceiling n^{4δ} rather than a trajectory.
    fn push_bound_record(
        &mut self,
        step: u64,
        t: f64,
        family: Family,
        args: Vec<u32>,
        empirical: u64,
    ) {
        let bound = (self.n as f64).powf(4.0 * self.params.delta);
        let empirical = empirical as f64;
        self.records.push(TelemetryRecord {
            step,
            t,
            family: family.name(),
            args,
            empirical,
            predicted: bound,
            rel_dev: empirical / bound - 1.0,
            window: bound,
            in_window: empirical <= bound,
        });
    }

    fn random_uncolored_edge(&mut self, state: &ColoringState) -> Option<(u32, u32)> {
        let edges = edge_count(state.n());
        for _ in 0..self.plan.max_tries {
            let eid = self.rng.random_range(0..edges);
            if state.edges_raw()[eid] == crate::coloring::UNCOLORED {
                return Some(crate::coloring::edge_endpoints(eid));
            }
        }
        None
    }

    /// Uniform phase-1 color satisfying `pred`, by rejection.
    fn random_color(
        &mut self,
        state: &ColoringState,
        pred: impl Fn(&ColoringState, u32) -> bool,
    ) -> Option<u32> {
        let phase1 = state.palette().phase1;
        for _ in 0..self.plan.max_tries {
            let k = self.rng.random_range(0..phase1);
            if pred(state, k) {
                return Some(k);
            }
        }
        None
    }

    fn random_distinct_vertices<const K: usize>(&mut self, n: u32) -> [u32; K] {
        debug_assert!(K as u32 <= n);
        let mut out = [0u32; K];
        let mut i = 0;
        while i < K {
            let v = self.rng.random_range(0..n);
            if !out[..i].contains(&v) {
                out[i] = v;
                i += 1;
            }
        }
        out
    }

    fn random_uncolored_triple(&mut self, state: &ColoringState) -> Option<([u16; 3], usize)> {
        let tri = state.draw_uncolored_triple(&mut self.rng)?;
        let role = self.rng.random_range(0..3usize);
        Some((tri, role))
    }

    fn snapshot_family(&mut self, state: &ColoringState, step: u64, t: f64, family: Family) {
        let m = self.plan.m_for(family);
        match family {
            Family::Q => {
                let q = measure_q(state);
                self.push_traj_record(step, t, family, vec![], q);
            }
            Family::Degree => {
                let n = state.n();
                let argmin = (0..n).min_by_key(|&v| state.uncolored_degree(v)).unwrap();
                let argmax = (0..n).max_by_key(|&v| state.uncolored_degree(v)).unwrap();
                let predicted = n as f64 * (1.0 - 6.0 * t);
                for v in [argmin, argmax] {
                    let empirical = state.uncolored_degree(v) as f64;
                    self.records.push(TelemetryRecord {
                        step,
                        t,
                        family: family.name(),
                        args: vec![v],
                        empirical,
                        predicted,
                        rel_dev: if predicted > 0.0 {
                            empirical / predicted - 1.0
                        } else {
                            f64::NAN
                        },
                        window: f64::NAN,
                        in_window: true,
                    });
                }
            }
            Family::Y => {
                for _ in 0..m {
                    let Some((u, v)) = self.random_uncolored_edge(state) else { return };
                    let y = measure_y(state, u, v);
                    self.push_traj_record(step, t, family, vec![u, v], y);
                }
            }
            Family::A => {
                for _ in 0..m {
                    let Some((u1, u2)) = self.random_uncolored_edge(state) else { return };
                    let Some(k1) = self.random_color(state, |s, k| {
                        !s.is_special(u1, k) && !s.is_special(u2, k)
                    }) else {
                        return;
                    };
                    let a = measure_a(state, u1, u2, k1);
                    self.push_traj_record(step, t, family, vec![u1, u2, k1], a);
                }
            }
            Family::B => {
                for _ in 0..m {
                    let Some((u, u1)) = self.random_uncolored_edge(state) else { return };
                    let Some(k) = self.random_color(state, |s, k| {
                        !s.is_special(u, k) && !s.is_special(u1, k)
                    }) else {
                        return;
                    };
                    let b = measure_b(state, u, u1, k);
                    self.push_traj_record(step, t, family, vec![u, u1, k], b);
                }
            }
            Family::C1 | Family::C2 => {
                for _ in 0..m {
                    let Some((tri, role)) = self.random_uncolored_triple(state) else { return };
                    let u = tri[role] as u32;
                    let rest: Vec<u32> = (0..3)
                        .filter(|&i| i != role)
                        .map(|i| tri[i] as u32)
                        .collect();
                    let (c1, c2) = measure_c1c2(state, u, rest[0], rest[1]);
                    let count = if family == Family::C1 { c1 } else { c2 };
                    self.push_traj_record(step, t, family, vec![u, rest[0], rest[1]], count);
                }
            }
            Family::D => {
                for _ in 0..m {
                    let [u] = self.random_distinct_vertices::<1>(state.n());
                    let Some(k) = self.random_color(state, |s, k| s.available_at_vertex(u, k))
                    else {
                        return;
                    };
                    let d = measure_d(state, u, k);
                    self.push_traj_record(step, t, family, vec![u, k], d);
                }
            }
            Family::E | Family::F => {
                for _ in 0..m {
                    let [u2] = self.random_distinct_vertices::<1>(state.n());
                    let Some(k) = self.random_color(state, |s, k| s.available_at_vertex(u2, k))
                    else {
                        return;
                    };
                    let count = if family == Family::E {
                        measure_e(state, u2, k)
                    } else {
                        measure_f(state, u2, k)
                    };
                    self.push_traj_record(step, t, family, vec![u2, k], count);
                }
            }
            Family::Z(a1, a2, a3) => {
                for _ in 0..m {
                    let Some((u, v)) = self.random_uncolored_edge(state) else { return };
                    let Some(k) = self.random_color(state, |s, k| {
                        !s.is_special(u, k) && !s.is_special(v, k)
                    }) else {
                        return;
                    };
                    let z = measure_z(state, u, v, k, (a1, a2, a3));
                    self.push_traj_record(
                        step,
                        t,
                        family,
                        vec![u, v, k, a1 as u32, a2 as u32, a3 as u32],
                        z,
                    );
                }
            }
            Family::Xi => {
                for _ in 0..m {
                    let Some((u, v)) = self.random_uncolored_edge(state) else { return };
                    let phase1 = state.palette().phase1;
                    let k = self.rng.random_range(0..phase1);
                    let xi = measure_xi(state, u, v, k);
                    self.push_bound_record(step, t, family, vec![u, v, k], xi);
                }
            }
            Family::Phi => {
                for _ in 0..m {
                    let [u, u1, v, v1] = self.random_distinct_vertices::<4>(state.n());
                    let phi = measure_phi(state, u, u1, v, v1);
                    self.push_bound_record(step, t, family, vec![u, u1, v, v1], phi);
                }
            }
            Family::Psi => {
                for _ in 0..m {
                    let [u, u2] = self.random_distinct_vertices::<2>(state.n());
                    let phase1 = state.palette().phase1;
                    let k = self.rng.random_range(0..phase1);
                    let k2 = self.rng.random_range(0..phase1);
                    let psi = measure_psi(state, u, u2, k, k2);
                    self.push_bound_record(step, t, family, vec![u, u2, k, k2], psi);
                }
            }
            Family::Lambda => {
                for _ in 0..m {
                    let [u, v, w] = self.random_distinct_vertices::<3>(state.n());
                    let lam = measure_lambda(state, u, v, w);
                    self.push_bound_record(step, t, family, vec![u, v, w], lam);
                }
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.to_csv_line());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NoPairPolicy;

    fn fresh(n: u32, seed: u64) -> ColoringState {
        // Small n needs a generous epsilon for the reserved palette to be
        // non-empty after rounding.
        let eps = if n < 24 { 0.5 } else { 0.1 };
        let mut c = ProcessConfig::new(n, eps, seed);
        c.on_no_pair = NoPairPolicy::Terminate;
        ColoringState::init(&c).unwrap()
    }

    #[test]
    fn fresh_state_counts() {
        let state = fresh(12, 9);
        assert_eq!(measure_q(&state), 220); // C(12,3)
        assert_eq!(measure_y(&state, 0, 1), 10); // n − 2
        // Colored-pattern families vanish with no colored edges.
        let k = (0..state.palette().phase1)
            .find(|&k| !state.is_special(0, k) && !state.is_special(1, k))
            .unwrap();
        for pat in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1)] {
            assert_eq!(measure_z(&state, 0, 1, k, pat), 0);
        }
        assert_eq!(measure_xi(&state, 0, 1, k), 0);
        assert_eq!(measure_phi(&state, 0, 1, 2, 3), 0);
        assert_eq!(measure_psi(&state, 0, 1, k, k), 0);
        assert_eq!(measure_lambda(&state, 0, 1, 2), 0);
    }

    #[test]
    fn fresh_a_matches_set_formula() {
        let state = fresh(14, 3);
        let phase1 = state.palette().phase1;
        let (u1, u2) = (0u32, 1u32);
        let k1 = (0..phase1)
            .find(|&k| !state.is_special(u1, k) && !state.is_special(u2, k))
            .unwrap();
        let brute: u64 = (0..state.n() as u64)
            .filter(|&u| u != u1 as u64 && u != u2 as u64)
            .map(|u| {
                let u = u as u32;
                if !state.is_special(u, k1) {
                    return 0;
                }
                (0..phase1)
                    .filter(|&k| {
                        !state.is_special(u, k)
                            && !state.is_special(u1, k)
                            && !state.is_special(u2, k)
                    })
                    .count() as u64
            })
            .sum();
        assert_eq!(measure_a(&state, u1, u2, k1), brute);
    }

    #[test]
    fn fresh_z000_matches_brute_force() {
        let state = fresh(10, 17);
        let phase1 = state.palette().phase1;
        let (u, v) = (0u32, 1u32);
        let k = (0..phase1)
            .find(|&k| !state.is_special(u, k) && !state.is_special(v, k))
            .unwrap();
        let mut brute = 0u64;
        for x in 0..10u32 {
            for y in 0..10u32 {
                if x == y || x == u || x == v || y == u || y == v {
                    continue;
                }
                if !state.available_at_edge(x, y, k) {
                    continue;
                }
                for k1 in 0..phase1 {
                    if state.available_at_edge(u, x, k1) && state.available_at_edge(y, v, k1) {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(measure_z(&state, u, v, k, (0, 0, 0)), brute);
    }

    #[test]
    fn fresh_def_match_brute_force() {
        let state = fresh(12, 21);
        let phase1 = state.palette().phase1;
        let n = state.n();
        let avail_pair = |u: u32, u1: u32, u2: u32, k: u32, k1: u32| {
            !state.is_special(u, k)
                && state.available_at_edge(u, u1, k)
                && state.available_at_edge(u, u2, k)
                && state.is_special(u, k1)
                && state.available_at_edge(u1, u2, k1)
        };
        let k = (0..phase1).find(|&k| state.available_at_vertex(0, k)).unwrap();
        let mut brute_d = 0u64;
        for u1 in 0..n {
            for u2 in 0..n {
                if u1 == u2 || u1 == 0 || u2 == 0 {
                    continue;
                }
                for k1 in 0..phase1 {
                    if avail_pair(0, u1, u2, k, k1) {
                        brute_d += 1;
                    }
                }
            }
        }
        assert_eq!(measure_d(&state, 0, k), brute_d);

        let mut brute_e = 0u64;
        let mut brute_f = 0u64;
        for u in 0..n {
            for u1 in 0..n {
                if u == u1 || u == 11 || u1 == 11 {
                    continue;
                }
                for kk in 0..phase1 {
                    if avail_pair(u, u1, 11, k, kk) {
                        brute_e += 1;
                    }
                    if avail_pair(u, u1, 11, kk, k) && state.is_special(u, k) {
                        brute_f += 1;
                    }
                }
            }
        }
        assert_eq!(measure_e(&state, 11, k), brute_e);
        // F fixes the special color; only count pairs whose special matches.
        let kf = (0..phase1).find(|&k| state.available_at_vertex(11, k)).unwrap();
        let mut brute_f2 = 0u64;
        for u in 0..n {
            for u1 in 0..n {
                if u == u1 || u == 11 || u1 == 11 {
                    continue;
                }
                for kk in 0..phase1 {
                    if avail_pair(u, u1, 11, kk, kf) {
                        brute_f2 += 1;
                    }
                }
            }
        }
        let _ = brute_f;
        assert_eq!(measure_f(&state, 11, kf), brute_f2);
    }

    #[test]
    fn snapshot_record_budget_and_csv_roundtrip() {
        let mut cfg = ProcessConfig::new(16, 0.5, 5);
        cfg.on_no_pair = NoPairPolicy::Terminate;
        let state = ColoringState::init(&cfg).unwrap();
        let mut sink = TelemetrySink::with_plan(
            &cfg,
            SamplePlan { m_cheap: 4, m_heavy: 2, max_tries: 50, families: Family::ALL.to_vec() },
        );
        sink.snapshot(&state, 0);
        assert!(!sink.records.is_empty());
        assert!(sink.records.len() <= 2 + 4 * Family::ALL.len());
        let csv = sink.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        for (line, rec) in lines.zip(&sink.records) {
            let parsed = TelemetryRecord::from_csv_line(line).unwrap();
            assert_eq!(parsed.family, rec.family);
            assert_eq!(parsed.args, rec.args);
            assert_eq!(parsed.step, rec.step);
            // Floats survive the Display/parse round trip exactly (or are
            // NaN on both sides).
            assert!(parsed.empirical == rec.empirical);
            assert!(
                parsed.window == rec.window
                    || (parsed.window.is_nan() && rec.window.is_nan())
            );
        }
        // Q's prediction at t=0 is n³/6.
        let q = sink.records.iter().find(|r| r.family == "Q").unwrap();
        assert_eq!(q.empirical, 560.0); // C(16,3)
        assert!((q.predicted - 16f64.powi(3) / 6.0).abs() < 1e-9);
        assert!(q.in_window);
    }

    #[test]
    fn xi_consistent_with_forbidden_paths() {
        // Color a path u–x–y–v so that Ξ(u, v, c(xy)) = 1.
        for seed in 0..50 {
            let mut state = fresh(9, seed);
            let phase1 = state.palette().phase1;
            let (u, v, x, y) = (0u32, 1u32, 2u32, 3u32);
            let Some(a) = (0..phase1)
                .find(|&k| state.available_at_edge(u, x, k) && state.available_at_edge(v, y, k))
            else {
                continue;
            };
            state.assign_color(u, x, a).unwrap();
            state.assign_color(v, y, a).unwrap();
            let Some(b) = (0..phase1).find(|&k| k != a && state.available_at_edge(x, y, k))
            else {
                continue;
            };
            state.assign_color(x, y, b).unwrap();
            assert_eq!(measure_xi(&state, u, v, b), 1);
            assert_eq!(state.forbidden_by_path(u, v), vec![b]);
            for k in 0..phase1 {
                let forbidden = state.forbidden_by_path(u, v).contains(&k);
                assert_eq!(measure_xi(&state, u, v, k) >= 1, forbidden);
            }
            return;
        }
        panic!("no seed admitted the construction");
    }
}
