//! Mutable process state: edge colors, per-vertex color sets, partner lists,
//! and the uncolored-triangle store, with incremental updates per assignment.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::bits::{self, ColorSet};
use crate::coloring::{edge_count, edge_index, Coloring, UNCOLORED};
use crate::config::{PaletteSpec, ProcessConfig, StoreMode};
use crate::rng::{substream, Substream};

/// Sentinel for an absent partner entry.
const NO_PARTNER: u32 = u32::MAX;

/// Maximum palette words supported by the stack-allocated candidate masks
/// (64 words = 4096 colors, i.e. n up to ≈ 4300).
const MAX_WORDS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StateError {
    #[error("edge {u} {v} is already colored")]
    AlreadyColored { u: u32, v: u32 },
    #[error("color {k} is not available at edge {u} {v}")]
    AvailabilityViolation { u: u32, v: u32, k: u32 },
    #[error("color {k} is not a phase-1 color")]
    NotPhase1Color { k: u32 },
    #[error("color {k} violates the special-set side condition (expected special: {wanted_special})")]
    CandidateViolation { k: u32, wanted_special: bool },
    #[error("phase-2 assignment before phase 2 started")]
    WrongPhase,
}

/// Which phase the state is in (phase 2 relaxes assignment rules).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Phase1,
    Phase2,
}

// ============================================================================
// Triangle store
// ============================================================================

/// Arithmetic id of the sorted triple `a < b < c`:
/// `tid = C(c,3) + C(b,2) + C(a,1)`, a bijection onto `0..C(n,3)` that
/// enumerates triples in (c, b, a)-lexicographic order.
#[inline(always)]
fn tid(a: u64, b: u64, c: u64) -> u64 {
    debug_assert!(a < b && b < c);
    c * (c - 1) * (c - 2) / 6 + b * (b - 1) / 2 + a
}

#[inline(always)]
fn tid_of(tri: [u16; 3]) -> u64 {
    tid(tri[0] as u64, tri[1] as u64, tri[2] as u64)
}

/// Number of triples of `K_n`.
#[inline]
pub fn triple_count(n: u32) -> u64 {
    let n = n as u64;
    n * (n - 1) * (n - 2) / 6
}

// Slot encoding for the explicit store: 2-bit tag | 30-bit list index.
const TAG_ALIVE: u32 = 0;
const TAG_PARKED: u32 = 1;
const TAG_DEAD: u32 = 2;
const SLOT_IDX_MASK: u32 = (1 << 30) - 1;

/// Dense store of all-uncolored triples with exact uniform draws.
///
/// `alive` holds drawable triples, `parked` holds fully starved ones (still
/// uncolored, excluded from process draws but counted in Q). Both use
/// swap-remove; `slot[tid]` tracks each triple's current list and index, and
/// `apex_dead[tid]` carries the per-apex starvation bits.
pub struct ExplicitStore {
    n: u32,
    alive: Vec<[u16; 3]>,
    parked: Vec<[u16; 3]>,
    slot: Vec<u32>,
    apex_dead: Vec<u8>,
}

impl ExplicitStore {
    fn new(n: u32) -> Self {
        assert!(n <= 1500, "explicit triangle store is sized for n ≤ 1500 (got {n})");
        let count = triple_count(n) as usize;
        let mut alive = Vec::with_capacity(count);
        // Enumeration order equals tid order, so slot[i] = alive at index i.
        for c in 2..n as u16 {
            for b in 1..c {
                for a in 0..b {
                    alive.push([a, b, c]);
                }
            }
        }
        let slot = (0..count as u32).map(|i| (TAG_ALIVE << 30) | i).collect();
        ExplicitStore { n, alive, parked: Vec::new(), slot, apex_dead: vec![0; count] }
    }

    #[inline]
    fn remove_from_list(&mut self, t: u64) {
        let s = self.slot[t as usize];
        let (tag, idx) = (s >> 30, (s & SLOT_IDX_MASK) as usize);
        let list = match tag {
            TAG_ALIVE => &mut self.alive,
            TAG_PARKED => &mut self.parked,
            _ => return,
        };
        list.swap_remove(idx);
        if idx < list.len() {
            let moved = tid_of(list[idx]);
            self.slot[moved as usize] = (tag << 30) | idx as u32;
        }
        self.slot[t as usize] = TAG_DEAD << 30;
    }

    fn park(&mut self, t: u64) {
        let s = self.slot[t as usize];
        if s >> 30 != TAG_ALIVE {
            return;
        }
        let idx = (s & SLOT_IDX_MASK) as usize;
        let tri = self.alive.swap_remove(idx);
        if idx < self.alive.len() {
            let moved = tid_of(self.alive[idx]);
            self.slot[moved as usize] = (TAG_ALIVE << 30) | idx as u32;
        }
        self.slot[t as usize] = (TAG_PARKED << 30) | self.parked.len() as u32;
        self.parked.push(tri);
    }
}

/// Counting store for large n: maintains the exact number of uncolored
/// triples and starvation marks, and draws by rejection sampling. When
/// rejection stops converging (late, sparse phase), it enumerates the
/// survivors once into an explicit tail list.
pub struct RejectionStore {
    n: u32,
    uncolored: u64,
    starved: HashMap<u64, u8>,
    fully_starved: u64,
    tail: Option<TailStore>,
}

struct TailStore {
    alive: Vec<[u16; 3]>,
    pos: HashMap<u64, u32>,
}

impl TailStore {
    fn remove(&mut self, t: u64) {
        if let Some(idx) = self.pos.remove(&t) {
            let idx = idx as usize;
            self.alive.swap_remove(idx);
            if idx < self.alive.len() {
                let moved = tid_of(self.alive[idx]);
                self.pos.insert(moved, idx as u32);
            }
        }
    }
}

const REJECTION_TRIES: u32 = 256;
/// Telemetry draws give up (and record a skipped sample) after this many
/// rejections rather than forcing a tail build.
const TELEMETRY_TRIES: u32 = 100;

impl RejectionStore {
    fn new(n: u32) -> Self {
        RejectionStore { n, uncolored: triple_count(n), starved: HashMap::new(), fully_starved: 0, tail: None }
    }

    /// Uniform unordered triple of distinct vertices.
    fn random_triple(n: u32, rng: &mut ChaCha12Rng) -> [u16; 3] {
        let x = rng.random_range(0..n);
        let mut y = rng.random_range(0..n - 1);
        if y >= x {
            y += 1;
        }
        let mut z = rng.random_range(0..n - 2);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        if z >= lo {
            z += 1;
        }
        if z >= hi {
            z += 1;
        }
        let mut tri = [x as u16, y as u16, z as u16];
        tri.sort_unstable();
        tri
    }

    fn build_tail(&mut self, edge: &[u32]) {
        let n = self.n as u16;
        let mut alive = Vec::new();
        let mut pos = HashMap::new();
        for c in 2..n {
            for b in 1..c {
                let e_bc = edge_index(b as u32, c as u32);
                if edge[e_bc] != UNCOLORED {
                    continue;
                }
                for a in 0..b {
                    if edge[edge_index(a as u32, b as u32)] != UNCOLORED
                        && edge[edge_index(a as u32, c as u32)] != UNCOLORED
                    {
                        continue;
                    }
                    if edge[edge_index(a as u32, b as u32)] == UNCOLORED
                        && edge[edge_index(a as u32, c as u32)] == UNCOLORED
                    {
                        let t = tid(a as u64, b as u64, c as u64);
                        if self.starved.get(&t).copied().unwrap_or(0) != 7 {
                            pos.insert(t, alive.len() as u32);
                            alive.push([a, b, c]);
                        }
                    }
                }
            }
        }
        self.tail = Some(TailStore { alive, pos });
    }
}

/// The process's uncolored-triangle store.
pub enum TriangleStore {
    Explicit(ExplicitStore),
    Rejection(RejectionStore),
}

impl TriangleStore {
    pub fn new(n: u32, mode: StoreMode) -> Self {
        match mode {
            StoreMode::Explicit => TriangleStore::Explicit(ExplicitStore::new(n)),
            StoreMode::Rejection => TriangleStore::Rejection(RejectionStore::new(n)),
            StoreMode::Auto => {
                if n <= 700 {
                    TriangleStore::Explicit(ExplicitStore::new(n))
                } else {
                    TriangleStore::Rejection(RejectionStore::new(n))
                }
            }
        }
    }

    /// Number of all-uncolored triples (the tracked variable Q), including
    /// starved ones.
    pub fn uncolored_count(&self) -> u64 {
        match self {
            TriangleStore::Explicit(s) => (s.alive.len() + s.parked.len()) as u64,
            TriangleStore::Rejection(s) => s.uncolored,
        }
    }

    /// Number of triples the process may still draw (uncolored and not fully
    /// starved).
    pub fn drawable_count(&self) -> u64 {
        match self {
            TriangleStore::Explicit(s) => s.alive.len() as u64,
            TriangleStore::Rejection(s) => s.uncolored - s.fully_starved,
        }
    }

    /// Uniform draw over drawable triples. `edge` is the live edge-color
    /// array (used by the rejection store).
    pub fn draw_drawable(&mut self, rng: &mut ChaCha12Rng, edge: &[u32]) -> Option<[u16; 3]> {
        match self {
            TriangleStore::Explicit(s) => {
                if s.alive.is_empty() {
                    return None;
                }
                let idx = rng.random_range(0..s.alive.len());
                Some(s.alive[idx])
            }
            TriangleStore::Rejection(s) => {
                if s.uncolored == s.fully_starved {
                    return None;
                }
                if let Some(tail) = &s.tail {
                    if tail.alive.is_empty() {
                        return None;
                    }
                    let idx = rng.random_range(0..tail.alive.len());
                    return Some(tail.alive[idx]);
                }
                for _ in 0..REJECTION_TRIES {
                    let tri = RejectionStore::random_triple(s.n, rng);
                    let ok = edge[edge_index(tri[0] as u32, tri[1] as u32)] == UNCOLORED
                        && edge[edge_index(tri[0] as u32, tri[2] as u32)] == UNCOLORED
                        && edge[edge_index(tri[1] as u32, tri[2] as u32)] == UNCOLORED;
                    if !ok {
                        continue;
                    }
                    if s.starved.get(&tid_of(tri)).copied().unwrap_or(0) == 7 {
                        continue;
                    }
                    return Some(tri);
                }
                // Rejection stopped converging; enumerate survivors once.
                s.build_tail(edge);
                let tail = s.tail.as_ref().unwrap();
                if tail.alive.is_empty() {
                    return None;
                }
                let idx = rng.random_range(0..tail.alive.len());
                Some(tail.alive[idx])
            }
        }
    }

    /// Uniform draw over *all* uncolored triples, starved included (telemetry
    /// sampling). Returns `None` when none exist or rejection gives up.
    pub fn draw_uncolored(&self, rng: &mut ChaCha12Rng, edge: &[u32]) -> Option<[u16; 3]> {
        match self {
            TriangleStore::Explicit(s) => {
                let total = s.alive.len() + s.parked.len();
                if total == 0 {
                    return None;
                }
                let idx = rng.random_range(0..total);
                Some(if idx < s.alive.len() { s.alive[idx] } else { s.parked[idx - s.alive.len()] })
            }
            TriangleStore::Rejection(s) => {
                if s.uncolored == 0 {
                    return None;
                }
                for _ in 0..TELEMETRY_TRIES {
                    let tri = RejectionStore::random_triple(s.n, rng);
                    let ok = edge[edge_index(tri[0] as u32, tri[1] as u32)] == UNCOLORED
                        && edge[edge_index(tri[0] as u32, tri[2] as u32)] == UNCOLORED
                        && edge[edge_index(tri[1] as u32, tri[2] as u32)] == UNCOLORED;
                    if ok {
                        return Some(tri);
                    }
                }
                None
            }
        }
    }

    /// Record that `(tri, apex_role)` has starved; parks the triple when all
    /// three apexes are dead. `apex_role` indexes the sorted triple.
    pub fn mark_starved(&mut self, tri: [u16; 3], apex_role: usize) {
        let t = tid_of(tri);
        match self {
            TriangleStore::Explicit(s) => {
                s.apex_dead[t as usize] |= 1 << apex_role;
                if s.apex_dead[t as usize] == 7 {
                    s.park(t);
                }
            }
            TriangleStore::Rejection(s) => {
                let mask = s.starved.entry(t).or_insert(0);
                *mask |= 1 << apex_role;
                if *mask == 7 {
                    s.fully_starved += 1;
                    if let Some(tail) = &mut s.tail {
                        tail.remove(t);
                    }
                }
            }
        }
    }

    /// Whether `(tri, apex_role)` is already marked starved.
    pub fn is_starved(&self, tri: [u16; 3], apex_role: usize) -> bool {
        let t = tid_of(tri);
        match self {
            TriangleStore::Explicit(s) => s.apex_dead[t as usize] & (1 << apex_role) != 0,
            TriangleStore::Rejection(s) => s.starved.get(&t).copied().unwrap_or(0) & (1 << apex_role) != 0,
        }
    }

    /// Remove every tracked triple containing edge `{u, v}`. `edge` must
    /// reflect all *other* edges' colors (the call may happen before or after
    /// `{u, v}` itself is recorded, since `{u, v}`'s own color is not
    /// consulted).
    pub fn delete_through_edge(&mut self, u: u32, v: u32, edge: &[u32]) {
        match self {
            TriangleStore::Explicit(s) => {
                let n = s.n;
                for w in 0..n {
                    if w == u || w == v {
                        continue;
                    }
                    let mut tri = [u as u16, v as u16, w as u16];
                    tri.sort_unstable();
                    s.remove_from_list(tid_of(tri));
                }
            }
            TriangleStore::Rejection(s) => {
                let n = s.n;
                for w in 0..n {
                    if w == u || w == v {
                        continue;
                    }
                    if edge[edge_index(u, w)] != UNCOLORED || edge[edge_index(v, w)] != UNCOLORED {
                        continue;
                    }
                    s.uncolored -= 1;
                    let mut tri = [u as u16, v as u16, w as u16];
                    tri.sort_unstable();
                    let t = tid_of(tri);
                    if let Some(mask) = s.starved.remove(&t) {
                        if mask == 7 {
                            s.fully_starved -= 1;
                        }
                    }
                    if let Some(tail) = &mut s.tail {
                        tail.remove(t);
                    }
                }
            }
        }
    }
}

// ============================================================================
// Coloring state
// ============================================================================

/// Full mutable state of the partial edge coloring of `K_n`.
pub struct ColoringState {
    n: u32,
    palette: PaletteSpec,
    phase: Phase,
    /// Current total palette size (grows if phase 2 enlarges it).
    total_colors: u32,
    /// Edge colors by [`edge_index`]; `UNCOLORED` sentinel.
    edge: Vec<u32>,
    uncolored_edges: u64,
    /// Phase-1 steps completed.
    steps: u64,
    /// Per-vertex special sets over phase-1 colors.
    special: Vec<ColorSet>,
    /// Per-vertex special colors as sorted lists (for cheap iteration).
    special_list: Vec<Vec<u32>>,
    /// Per-vertex sets of phase-1 colors on incident edges.
    hit: Vec<ColorSet>,
    /// `partners[(v·phase1 + k)·2 ..][0..2]`: the ≤ 2 neighbors joined to `v`
    /// by phase-1 color `k`.
    partners: Vec<u32>,
    /// Per-color edge lists (phase-1 colors only; phase 2 keeps its own
    /// accounting).
    color_edges: Vec<Vec<u32>>,
    /// Uncolored degree per vertex.
    uncolored_deg: Vec<u32>,
    pub(crate) store: TriangleStore,
}

impl ColoringState {
    /// Initialize a fresh state: all edges uncolored, `S_v` sampled by
    /// independent Bernoulli(s) over phase-1 colors from the special-sets
    /// substream, triangle store full, hit sets empty.
    pub fn init(config: &ProcessConfig) -> Result<Self, crate::config::ConfigError> {
        let palette = config.validate()?;
        let n = config.n;
        let s = config.special_fraction();
        let mut rng = substream(config.seed, Substream::SpecialSets);
        let mut special = Vec::with_capacity(n as usize);
        let mut special_list = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let mut set = ColorSet::new(palette.phase1);
            let mut list = Vec::new();
            for k in 0..palette.phase1 {
                if rng.random::<f64>() < s {
                    set.insert(k);
                    list.push(k);
                }
            }
            special.push(set);
            special_list.push(list);
        }
        let store = TriangleStore::new(n, config.resolved_store());
        Ok(ColoringState {
            n,
            palette,
            phase: Phase::Phase1,
            total_colors: palette.total,
            edge: vec![UNCOLORED; edge_count(n)],
            uncolored_edges: edge_count(n) as u64,
            steps: 0,
            special,
            special_list: special_list.clone(),
            hit: (0..n).map(|_| ColorSet::new(palette.phase1)).collect(),
            partners: vec![NO_PARTNER; n as usize * palette.phase1 as usize * 2],
            color_edges: (0..palette.phase1).map(|_| Vec::new()).collect(),
            uncolored_deg: vec![n - 1; n as usize],
            store,
        })
    }

    // ------------------------------------------------------------------
    // Read-only queries
    // ------------------------------------------------------------------

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn palette(&self) -> PaletteSpec {
        self.palette
    }

    /// Current palette size including phase-2 enlargements.
    pub fn total_colors(&self) -> u32 {
        self.total_colors
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Phase-1 steps completed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn uncolored_edges(&self) -> u64 {
        self.uncolored_edges
    }

    pub fn uncolored_degree(&self, v: u32) -> u32 {
        self.uncolored_deg[v as usize]
    }

    pub fn color_of(&self, u: u32, v: u32) -> Option<u32> {
        let c = self.edge[edge_index(u, v)];
        if c == UNCOLORED {
            None
        } else {
            Some(c)
        }
    }

    #[inline]
    pub fn is_uncolored(&self, u: u32, v: u32) -> bool {
        self.edge[edge_index(u, v)] == UNCOLORED
    }

    /// Raw edge array (indexed by [`edge_index`]).
    pub fn edges_raw(&self) -> &[u32] {
        &self.edge
    }

    pub fn is_special(&self, v: u32, k: u32) -> bool {
        k < self.palette.phase1 && self.special[v as usize].contains(k)
    }

    pub fn special_set(&self, v: u32) -> &ColorSet {
        &self.special[v as usize]
    }

    pub fn special_colors(&self, v: u32) -> &[u32] {
        &self.special_list[v as usize]
    }

    pub fn is_hit(&self, v: u32, k: u32) -> bool {
        k < self.palette.phase1 && self.hit[v as usize].contains(k)
    }

    pub fn hit_set(&self, v: u32) -> &ColorSet {
        &self.hit[v as usize]
    }

    /// The ≤ 2 neighbors joined to `v` by phase-1 color `k`.
    pub fn partners(&self, v: u32, k: u32) -> impl Iterator<Item = u32> + '_ {
        let base = (v as usize * self.palette.phase1 as usize + k as usize) * 2;
        self.partners[base..base + 2].iter().copied().filter(|&p| p != NO_PARTNER)
    }

    /// Edges (by id) carrying phase-1 color `k`.
    pub fn edges_of_color(&self, k: u32) -> &[u32] {
        &self.color_edges[k as usize]
    }

    /// Colored neighbors of `v` via phase-1 edges, with the joining color.
    pub fn colored_neighbors(&self, v: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.hit[v as usize]
            .iter()
            .flat_map(move |k| self.partners(v, k).map(move |x| (x, k)))
    }

    /// True iff `k ∉ S_v` and `k ∉ hit(v)` (phase-1 colors only).
    #[inline]
    pub fn available_at_vertex(&self, v: u32, k: u32) -> bool {
        debug_assert!(k < self.palette.phase1);
        !self.special[v as usize].contains(k) && !self.hit[v as usize].contains(k)
    }

    /// Colors `k` for which an alternating `(uv, k)`-path exists: some
    /// `x ≠ y` with `color(ux) = color(vy)` and `color(xy) = k`. Enumerated
    /// from `hit(u) ∩ hit(v)` via partner lists. Sorted ascending.
    pub fn forbidden_by_path(&self, u: u32, v: u32) -> Vec<u32> {
        debug_assert!(self.is_uncolored(u, v));
        let mut out = Vec::new();
        self.for_each_path_color(u, v, |k| out.push(k));
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Visit the color of `xy` for every alternating-path witness
    /// `(x, y)` of the uncolored pair `uv` (may repeat colors).
    #[inline]
    fn for_each_path_color(&self, u: u32, v: u32, mut f: impl FnMut(u32)) {
        for c in self.hit[u as usize].intersection(&self.hit[v as usize]) {
            for x in self.partners(u, c) {
                for y in self.partners(v, c) {
                    if x == y {
                        continue;
                    }
                    let kxy = self.edge[edge_index(x, y)];
                    if kxy != UNCOLORED {
                        f(kxy);
                    }
                }
            }
        }
    }

    /// True iff `uv` is uncolored, `k` is available at both endpoints, and no
    /// alternating `(uv, k)`-path exists.
    pub fn available_at_edge(&self, u: u32, v: u32, k: u32) -> bool {
        if !self.is_uncolored(u, v) {
            return false;
        }
        if !self.available_at_vertex(u, k) || !self.available_at_vertex(v, k) {
            return false;
        }
        let mut forbidden = false;
        for c in self.hit[u as usize].intersection(&self.hit[v as usize]) {
            for x in self.partners(u, c) {
                for y in self.partners(v, c) {
                    if x != y && self.edge[edge_index(x, y)] == k {
                        forbidden = true;
                    }
                }
            }
        }
        !forbidden
    }

    /// Availability mask for edge `(a, b)` over phase-1 colors, written into
    /// `mask` (little-endian words). A set bit means available.
    pub(crate) fn edge_avail_mask(&self, a: u32, b: u32, mask: &mut [u64]) {
        let words = bits::words_for(self.palette.phase1);
        debug_assert!(self.is_uncolored(a, b));
        let sa = self.special[a as usize].words();
        let sb = self.special[b as usize].words();
        let ha = self.hit[a as usize].words();
        let hb = self.hit[b as usize].words();
        for w in 0..words {
            mask[w] = !(sa[w] | sb[w] | ha[w] | hb[w]);
        }
        // Trim bits beyond the palette.
        let tail = self.palette.phase1 as usize % 64;
        if tail != 0 {
            mask[words - 1] &= (1u64 << tail) - 1;
        }
        self.for_each_path_color(a, b, |k| {
            mask[(k / 64) as usize] &= !(1u64 << (k % 64));
        });
    }

    /// Candidate sets at the oriented uncolored triple `(u, u′, u″)`:
    /// `C1 = {k′ ∈ S_u : k′ available at u′u″}` and
    /// `C2 = {k ∉ S_u : k available at uu′ and uu″}`. Both sorted ascending.
    pub fn enumerate_candidates(&self, u: u32, u1: u32, u2: u32) -> (Vec<u32>, Vec<u32>) {
        debug_assert!(
            self.is_uncolored(u, u1) && self.is_uncolored(u, u2) && self.is_uncolored(u1, u2),
            "enumerate_candidates requires an uncolored triple"
        );
        let words = bits::words_for(self.palette.phase1);
        debug_assert!(words <= MAX_WORDS);
        let mut avail12 = [0u64; MAX_WORDS];
        self.edge_avail_mask(u1, u2, &mut avail12[..words]);
        let su = self.special[u as usize].words();

        let mut c1_mask = [0u64; MAX_WORDS];
        for w in 0..words {
            c1_mask[w] = su[w] & avail12[w];
        }

        let mut avail01 = [0u64; MAX_WORDS];
        let mut avail02 = [0u64; MAX_WORDS];
        self.edge_avail_mask(u, u1, &mut avail01[..words]);
        self.edge_avail_mask(u, u2, &mut avail02[..words]);
        let mut c2_mask = [0u64; MAX_WORDS];
        for w in 0..words {
            c2_mask[w] = !su[w] & avail01[w] & avail02[w];
        }

        (bits::iter_mask(&c1_mask[..words]).collect(), bits::iter_mask(&c2_mask[..words]).collect())
    }

    /// Uniform triangle from the drawable pool (alive, non-starved). May
    /// rebuild internal store indexes, hence `&mut`.
    pub fn draw_drawable_triangle(&mut self, rng: &mut ChaCha12Rng) -> Option<[u16; 3]> {
        self.store.draw_drawable(rng, &self.edge)
    }

    /// Uniform uncolored triangle (including starvation-parked ones) without
    /// touching store state; `None` if rejection sampling fails.
    pub fn draw_uncolored_triple(&self, rng: &mut ChaCha12Rng) -> Option<[u16; 3]> {
        self.store.draw_uncolored(rng, &self.edge)
    }

    // ------------------------------------------------------------------
    // Mutation
    // ------------------------------------------------------------------

    /// Assign phase-1 color `k` to edge `uv`. Checks availability (a
    /// violation is a logic error upstream), then updates hit sets, partner
    /// lists, color lists, degrees, and the triangle store.
    pub fn assign_color(&mut self, u: u32, v: u32, k: u32) -> Result<(), StateError> {
        if k >= self.palette.phase1 {
            return Err(StateError::NotPhase1Color { k });
        }
        if !self.is_uncolored(u, v) {
            return Err(StateError::AlreadyColored { u, v });
        }
        if self.phase == Phase::Phase1 && !self.available_at_edge(u, v, k) {
            return Err(StateError::AvailabilityViolation { u, v, k });
        }
        self.write_phase1_edge(u, v, k);
        Ok(())
    }

    /// Apply one full coloring step at the oriented uncolored triple
    /// `(u, u′, u″)`: the base edge gets `k′ ∈ S_u` and both cherry edges
    /// get `k ∉ S_u`, all validated against the state *before* any of the
    /// three writes (the step is simultaneous; in particular `k` hitting `u`
    /// via the first cherry edge does not disqualify the second).
    pub fn apply_step(
        &mut self,
        u: u32,
        u1: u32,
        u2: u32,
        k: u32,
        k1: u32,
    ) -> Result<(), StateError> {
        if k >= self.palette.phase1 {
            return Err(StateError::NotPhase1Color { k });
        }
        if k1 >= self.palette.phase1 {
            return Err(StateError::NotPhase1Color { k: k1 });
        }
        for (a, b) in [(u, u1), (u, u2), (u1, u2)] {
            if !self.is_uncolored(a, b) {
                return Err(StateError::AlreadyColored { u: a, v: b });
            }
        }
        if !self.is_special(u, k1) {
            return Err(StateError::CandidateViolation { k: k1, wanted_special: true });
        }
        if self.is_special(u, k) {
            return Err(StateError::CandidateViolation { k, wanted_special: false });
        }
        if !self.available_at_edge(u1, u2, k1) {
            return Err(StateError::AvailabilityViolation { u: u1, v: u2, k: k1 });
        }
        for other in [u1, u2] {
            if !self.available_at_edge(u, other, k) {
                return Err(StateError::AvailabilityViolation { u, v: other, k });
            }
        }
        self.write_phase1_edge(u1, u2, k1);
        self.write_phase1_edge(u, u1, k);
        self.write_phase1_edge(u, u2, k);
        self.bump_step();
        Ok(())
    }

    /// Unvalidated phase-1 edge write shared by the validated entry points.
    fn write_phase1_edge(&mut self, u: u32, v: u32, k: u32) {
        let e = edge_index(u, v);
        self.edge[e] = k;
        self.uncolored_edges -= 1;
        self.uncolored_deg[u as usize] -= 1;
        self.uncolored_deg[v as usize] -= 1;
        self.hit[u as usize].insert(k);
        self.hit[v as usize].insert(k);
        self.add_partner(u, k, v);
        self.add_partner(v, k, u);
        self.color_edges[k as usize].push(e as u32);
        self.store.delete_through_edge(u, v, &self.edge);
    }

    fn add_partner(&mut self, v: u32, k: u32, x: u32) {
        let base = (v as usize * self.palette.phase1 as usize + k as usize) * 2;
        if self.partners[base] == NO_PARTNER {
            self.partners[base] = x;
        } else {
            debug_assert_eq!(
                self.partners[base + 1],
                NO_PARTNER,
                "color class would get a vertex of degree 3"
            );
            self.partners[base + 1] = x;
        }
    }

    /// Record a completed phase-1 step.
    pub(crate) fn bump_step(&mut self) {
        self.steps += 1;
    }

    /// Enter phase 2 (relaxes assignment rules to the reserved palette).
    pub fn begin_phase2(&mut self) {
        self.phase = Phase::Phase2;
    }

    /// Assign a phase-2 (reserved or enlarged) color to an uncolored edge.
    /// No availability rules apply; hit/partner structures track phase-1
    /// colors only and are left untouched.
    pub fn assign_phase2(&mut self, u: u32, v: u32, k: u32) -> Result<(), StateError> {
        if self.phase != Phase::Phase2 {
            return Err(StateError::WrongPhase);
        }
        debug_assert!(k >= self.palette.phase1 && k < self.total_colors);
        if !self.is_uncolored(u, v) {
            return Err(StateError::AlreadyColored { u, v });
        }
        self.edge[edge_index(u, v)] = k;
        self.uncolored_edges -= 1;
        self.uncolored_deg[u as usize] -= 1;
        self.uncolored_deg[v as usize] -= 1;
        Ok(())
    }

    /// Overwrite a phase-2 edge's color with another phase-2 color
    /// (resampling). The edge must already carry a phase-2 color.
    pub fn recolor_phase2(&mut self, eid: u32, k: u32) {
        debug_assert!(self.phase == Phase::Phase2);
        debug_assert!(self.edge[eid as usize] >= self.palette.phase1);
        debug_assert!(k >= self.palette.phase1 && k < self.total_colors);
        self.edge[eid as usize] = k;
    }

    /// Grow the palette by `extra` fresh phase-2 colors; returns the new
    /// total.
    pub fn enlarge_palette(&mut self, extra: u32) -> u32 {
        self.total_colors += extra;
        self.total_colors
    }

    /// Current `(uncolored, drawable)` triple counts from the store.
    pub fn store_counts(&self) -> (u64, u64) {
        (self.store.uncolored_count(), self.store.drawable_count())
    }

    /// Detach an immutable snapshot of the coloring.
    pub fn to_coloring(&self) -> Coloring {
        let mut c = Coloring::new(self.n, self.total_colors);
        for v in 1..self.n {
            for u in 0..v {
                if let Some(k) = self.color_of(u, v) {
                    c.set(u, v, k);
                }
            }
        }
        c
    }
}
