//! Certification: per-color component census, the 4-clique/5-color check
//! (exhaustive, pairwise-equivalent, and sampled modes), and the
//! lower-bound certificate tying the census identities to the color count.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloring::{edge_endpoints, Coloring, UNCOLORED};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidatorError {
    #[error("coloring is incomplete ({missing} uncolored edges)")]
    IncompleteColoring { missing: u64 },
    #[error("census identity broken: {0}")]
    IdentityBroken(String),
}

/// Per-color connected-component decomposition of the color classes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentCensus {
    /// Isolated vertices summed across the color graphs of used colors.
    pub x0: u64,
    /// Single-edge components.
    pub x1: u64,
    /// Two-edge components.
    pub x2: u64,
    /// Components with ≥3 edges (must be 0 for valid outputs).
    pub big_components: u64,
    /// Colors with at least one edge.
    pub colors_used: u32,
    /// Component edge-counts per color (indexed by color id; unused colors
    /// keep an empty list).
    pub components: Vec<Vec<u32>>,
}

impl ComponentCensus {
    /// Both counting identities, which hold exactly for complete colorings
    /// whose components all have ≤2 edges.
    pub fn identities_hold(&self, n: u32, edges: u64) -> bool {
        self.x0 + 2 * self.x1 + 3 * self.x2 == n as u64 * self.colors_used as u64
            && self.x1 + 2 * self.x2 == edges
    }
}

/// A 4-set spanning fewer than five colors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub vertices: [u32; 4],
    /// Distinct colors among the six edges (≤4 of them).
    pub colors: Vec<u32>,
    /// The six witnessing edges as (u, v, color).
    pub edges: Vec<(u32, u32, u32)>,
}

/// Decompose every color class into connected components. Uncolored edges
/// are ignored (partial colorings are censused on their colored subgraph).
pub fn census(coloring: &Coloring) -> ComponentCensus {
    let n = coloring.n();
    let mut class_edges: Vec<Vec<(u32, u32)>> = vec![Vec::new(); coloring.colors() as usize];
    for (eid, &k) in coloring.raw().iter().enumerate() {
        if k != UNCOLORED {
            class_edges[k as usize].push(edge_endpoints(eid));
        }
    }
    let mut x0 = 0u64;
    let mut x1 = 0u64;
    let mut x2 = 0u64;
    let mut big = 0u64;
    let mut colors_used = 0u32;
    let mut components = vec![Vec::new(); coloring.colors() as usize];
    for (k, edges) in class_edges.iter().enumerate() {
        if edges.is_empty() {
            continue;
        }
        colors_used += 1;
        // BFS over the class's vertices.
        let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
        for &(u, v) in edges {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        let mut seen: HashMap<u32, bool> = adj.keys().map(|&v| (v, false)).collect();
        let mut touched = 0u64;
        for &start in adj.keys() {
            if seen[&start] {
                continue;
            }
            let mut stack = vec![start];
            seen.insert(start, true);
            let mut comp_vertices = Vec::new();
            while let Some(v) = stack.pop() {
                comp_vertices.push(v);
                for &w in &adj[&v] {
                    if !seen[&w] {
                        seen.insert(w, true);
                        stack.push(w);
                    }
                }
            }
            touched += comp_vertices.len() as u64;
            let comp_edges: u32 = comp_vertices
                .iter()
                .map(|&v| adj[&v].len() as u32)
                .sum::<u32>()
                / 2;
            components[k].push(comp_edges);
            match comp_edges {
                1 => x1 += 1,
                2 => x2 += 1,
                _ => big += 1,
            }
        }
        x0 += n as u64 - touched;
    }
    ComponentCensus { x0, x1, x2, big_components: big, colors_used, components }
}

fn require_complete(coloring: &Coloring) -> Result<(), ValidatorError> {
    let missing = coloring.raw().iter().filter(|&&k| k == UNCOLORED).count() as u64;
    if missing > 0 {
        return Err(ValidatorError::IncompleteColoring { missing });
    }
    Ok(())
}

fn four_set_colors(coloring: &Coloring, q: [u32; 4]) -> (Vec<u32>, Vec<(u32, u32, u32)>) {
    let mut colors = Vec::with_capacity(6);
    let mut edges = Vec::with_capacity(6);
    for i in 0..4 {
        for j in i + 1..4 {
            let k = coloring.get(q[i], q[j]).expect("complete coloring");
            colors.push(k);
            edges.push((q[i].min(q[j]), q[i].max(q[j]), k));
        }
    }
    colors.sort_unstable();
    colors.dedup();
    (colors, edges)
}

fn violation_at(coloring: &Coloring, mut q: [u32; 4]) -> Option<Violation> {
    q.sort_unstable();
    let (colors, edges) = four_set_colors(coloring, q);
    if colors.len() < 5 {
        Some(Violation { vertices: q, colors, edges })
    } else {
        None
    }
}

/// Scan all C(n,4) vertex subsets. Intended for n ≤ ~120.
pub fn verify_45_exhaustive(coloring: &Coloring) -> Result<Vec<Violation>, ValidatorError> {
    require_complete(coloring)?;
    let n = coloring.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    if let Some(v) = violation_at(coloring, [a, b, c, d]) {
                        out.push(v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Equivalent check driven by same-colored edge pairs. A violating 4-set
/// needs two color collisions among its six edges; every collision is a
/// same-colored edge pair spanning ≤4 vertices, so each violating set is
/// reachable from (i) a pair spanning 4 vertices, (ii) two adjacent pairs
/// whose spans overlap in two vertices, or (iii) a monochromatic triangle.
pub fn verify_45_pairwise(coloring: &Coloring) -> Result<Vec<Violation>, ValidatorError> {
    require_complete(coloring)?;
    let n = coloring.n();
    let mut class_edges: Vec<Vec<(u32, u32)>> = vec![Vec::new(); coloring.colors() as usize];
    for (eid, &k) in coloring.raw().iter().enumerate() {
        class_edges[k as usize].push(edge_endpoints(eid));
    }
    let mut candidates: BTreeSet<[u32; 4]> = BTreeSet::new();
    // Adjacent same-colored pairs as (center, other1, other2, color).
    let mut adjacent: Vec<(u32, u32, u32, u32)> = Vec::new();
    for (k, edges) in class_edges.iter().enumerate() {
        for (i, &(u, v)) in edges.iter().enumerate() {
            for &(w, x) in &edges[i + 1..] {
                let mut span = vec![u, v, w, x];
                span.sort_unstable();
                span.dedup();
                match span.len() {
                    4 => {
                        candidates.insert([span[0], span[1], span[2], span[3]]);
                    }
                    3 => {
                        let center = if u == w || u == x { u } else { v };
                        let mut others: Vec<u32> =
                            span.iter().copied().filter(|&y| y != center).collect();
                        others.sort_unstable();
                        adjacent.push((center, others[0], others[1], k as u32));
                    }
                    _ => unreachable!("distinct edges share at most one vertex"),
                }
            }
        }
    }
    // Monochromatic triangles: every extension is a violation.
    for &(z, a, b, k) in &adjacent {
        if coloring.get(a, b) == Some(k) {
            for w in 0..n {
                if w != z && w != a && w != b {
                    let mut q = [z, a, b, w];
                    q.sort_unstable();
                    candidates.insert(q);
                }
            }
        }
    }
    // Two adjacent pairs sharing exactly two span vertices close a 4-set.
    let mut by_duo: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
    for &(z, a, b, _) in &adjacent {
        let mut span = [z, a, b];
        span.sort_unstable();
        let duos = [
            ((span[0], span[1]), span[2]),
            ((span[0], span[2]), span[1]),
            ((span[1], span[2]), span[0]),
        ];
        for (duo, third) in duos {
            if let Some(thirds) = by_duo.get(&duo) {
                for &w in thirds {
                    if w != third {
                        let mut q = [duo.0, duo.1, third, w];
                        q.sort_unstable();
                        candidates.insert(q);
                    }
                }
            }
        }
        for (duo, third) in duos {
            by_duo.entry(duo).or_default().push(third);
        }
    }
    let mut out: Vec<Violation> = candidates
        .into_iter()
        .filter_map(|q| violation_at(coloring, q))
        .collect();
    out.sort();
    Ok(out)
}

/// Spot check: `draws` uniform 4-subsets (with replacement across draws).
pub fn verify_45_sampled(
    coloring: &Coloring,
    rng: &mut ChaCha12Rng,
    draws: u64,
) -> Result<Vec<Violation>, ValidatorError> {
    require_complete(coloring)?;
    let n = coloring.n();
    let mut found: BTreeSet<Violation> = BTreeSet::new();
    for _ in 0..draws {
        let mut q = [0u32; 4];
        let mut i = 0;
        while i < 4 {
            let v = rng.random_range(0..n);
            if !q[..i].contains(&v) {
                q[i] = v;
                i += 1;
            }
        }
        if let Some(v) = violation_at(coloring, q) {
            found.insert(v);
        }
    }
    Ok(found.into_iter().collect())
}

/// Validation strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Exhaustive,
    Pairwise,
    Sampled,
}

/// Exhaustive for n ≤ 120, pairwise above (sampled is never auto-picked).
pub fn auto_mode(n: u32) -> VerifyMode {
    if n <= 120 {
        VerifyMode::Exhaustive
    } else {
        VerifyMode::Pairwise
    }
}

/// Lower-bound certificate: the census identities force
/// |C| ≥ 5(n−1)/6 for any complete coloring with components ≤2 edges and
/// x1 ≥ x2.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundCertificate {
    pub x0: u64,
    pub x1: u64,
    pub x2: u64,
    pub colors_used: u32,
    /// ⌈5(n−1)/6⌉.
    pub bound: u32,
    /// colors_used − bound (≥ 0).
    pub slack: i64,
    pub x1_ge_x2: bool,
}

/// Recompute the census and check the counting argument's premises and
/// conclusion; errors indicate an upstream bug rather than bad luck.
pub fn lower_bound_certificate(
    coloring: &Coloring,
) -> Result<LowerBoundCertificate, ValidatorError> {
    require_complete(coloring)?;
    let n = coloring.n();
    let cen = census(coloring);
    if cen.big_components > 0 {
        return Err(ValidatorError::IdentityBroken(format!(
            "{} components with ≥3 edges",
            cen.big_components
        )));
    }
    let edges = crate::coloring::edge_count(n) as u64;
    if !cen.identities_hold(n, edges) {
        return Err(ValidatorError::IdentityBroken(format!(
            "x0={} x1={} x2={} |C|={} n={}",
            cen.x0, cen.x1, cen.x2, cen.colors_used, n
        )));
    }
    let bound = (5 * (n as u64 - 1)).div_ceil(6) as u32;
    Ok(LowerBoundCertificate {
        x0: cen.x0,
        x1: cen.x1,
        x2: cen.x2,
        colors_used: cen.colors_used,
        bound,
        slack: cen.colors_used as i64 - bound as i64,
        x1_ge_x2: cen.x1 >= cen.x2,
    })
}

/// Summary emitted by the validate entry points.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub mode: VerifyMode,
    pub violations: u64,
    pub x0: u64,
    pub x1: u64,
    pub x2: u64,
    pub colors_used: u32,
    pub lb_slack: i64,
    /// First few violations for display (the count above is authoritative).
    pub sample: Vec<Violation>,
}

/// Validate a complete coloring under the given mode; sampled mode draws
/// 10⁶ subsets from the provided RNG.
pub fn validate(
    coloring: &Coloring,
    mode: VerifyMode,
    rng: &mut ChaCha12Rng,
) -> Result<ValidationReport, ValidatorError> {
    let violations = match mode {
        VerifyMode::Exhaustive => verify_45_exhaustive(coloring)?,
        VerifyMode::Pairwise => verify_45_pairwise(coloring)?,
        VerifyMode::Sampled => verify_45_sampled(coloring, rng, 1_000_000)?,
    };
    let cen = census(coloring);
    let bound = (5 * (coloring.n() as u64 - 1)).div_ceil(6) as i64;
    Ok(ValidationReport {
        mode,
        violations: violations.len() as u64,
        x0: cen.x0,
        x1: cen.x1,
        x2: cen.x2,
        colors_used: cen.colors_used,
        lb_slack: cen.colors_used as i64 - bound,
        sample: violations.into_iter().take(8).collect(),
    })
}
