//! Immutable coloring snapshots and the on-disk coloring format.
//!
//! The text format is line-oriented: a header `n <n> colors <total>`, then
//! one line `u v k` per colored edge (0-based, `u < v`), sorted
//! lexicographically. Uncolored edges are omitted.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

/// Sentinel for "no color assigned".
pub const UNCOLORED: u32 = u32::MAX;

/// Triangular index of edge `{u, v}` (`u ≠ v`): pairs are ordered by the
/// larger endpoint, then the smaller, so `eid(u,v) = max(max-1)/2 + min`.
#[inline(always)]
pub fn edge_index(u: u32, v: u32) -> usize {
    debug_assert_ne!(u, v);
    let (lo, hi) = if u < v { (u as usize, v as usize) } else { (v as usize, u as usize) };
    hi * (hi - 1) / 2 + lo
}

/// Number of edges of `K_n`.
#[inline(always)]
pub fn edge_count(n: u32) -> usize {
    let n = n as usize;
    n * (n - 1) / 2
}

/// Inverse of [`edge_index`]: the `(min, max)` endpoints of an edge id.
pub fn edge_endpoints(eid: usize) -> (u32, u32) {
    // hi is the triangular root of eid.
    let mut hi = ((((8 * eid as u128 + 1) as f64).sqrt() as u128).div_ceil(2)) as usize;
    while hi * (hi - 1) / 2 > eid {
        hi -= 1;
    }
    while (hi + 1) * hi / 2 <= eid {
        hi += 1;
    }
    let lo = eid - hi * (hi - 1) / 2;
    (lo as u32, hi as u32)
}

/// A (possibly partial) edge coloring of `K_n`, detached from process state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    n: u32,
    /// Palette size declared for this coloring (colors are `0..colors`).
    colors: u32,
    edge: Vec<u32>,
}

#[derive(Debug, Error)]
pub enum ColoringFileError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line 1: expected header `n <n> colors <total>`, got {0:?}")]
    BadHeader(String),
    #[error("line {line}: {what}")]
    BadLine { line: usize, what: String },
    #[error("line {line}: duplicate edge {u} {v}")]
    DuplicateEdge { line: usize, u: u32, v: u32 },
    #[error("header n = {0} is below the minimum of 2")]
    BadN(u32),
}

impl Coloring {
    /// A fully uncolored `K_n` with the given palette size.
    pub fn new(n: u32, colors: u32) -> Self {
        Coloring { n, colors, edge: vec![UNCOLORED; edge_count(n)] }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Declared palette size (not the number of colors actually used).
    pub fn colors(&self) -> u32 {
        self.colors
    }

    pub fn get(&self, u: u32, v: u32) -> Option<u32> {
        let c = self.edge[edge_index(u, v)];
        if c == UNCOLORED {
            None
        } else {
            Some(c)
        }
    }

    pub fn set(&mut self, u: u32, v: u32, k: u32) {
        debug_assert!(k < self.colors);
        self.edge[edge_index(u, v)] = k;
    }

    /// Raw edge array indexed by [`edge_index`]; `UNCOLORED` for unset.
    pub fn raw(&self) -> &[u32] {
        &self.edge
    }

    pub fn is_complete(&self) -> bool {
        self.edge.iter().all(|&c| c != UNCOLORED)
    }

    pub fn colored_edges(&self) -> usize {
        self.edge.iter().filter(|&&c| c != UNCOLORED).count()
    }

    /// Number of distinct colors present.
    pub fn colors_used(&self) -> u32 {
        let mut seen = vec![false; self.colors as usize];
        let mut count = 0;
        for &c in &self.edge {
            if c != UNCOLORED && !seen[c as usize] {
                seen[c as usize] = true;
                count += 1;
            }
        }
        count
    }

    /// Serialize in the canonical text format.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<(u32, u32, u32)> = Vec::with_capacity(self.colored_edges());
        for v in 1..self.n {
            for u in 0..v {
                if let Some(k) = self.get(u, v) {
                    lines.push((u, v, k));
                }
            }
        }
        lines.sort_unstable();
        let mut out = String::with_capacity(16 + lines.len() * 12);
        let _ = writeln!(out, "n {} colors {}", self.n, self.colors);
        for (u, v, k) in lines {
            let _ = writeln!(out, "{} {} {}", u, v, k);
        }
        out
    }

    pub fn write_file(&self, path: &Path) -> Result<(), ColoringFileError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ColoringFileError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| ColoringFileError::BadHeader(String::new()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (n, colors) = match parts.as_slice() {
            ["n", n, "colors", c] => (
                n.parse::<u32>().map_err(|_| ColoringFileError::BadHeader(header.into()))?,
                c.parse::<u32>().map_err(|_| ColoringFileError::BadHeader(header.into()))?,
            ),
            _ => return Err(ColoringFileError::BadHeader(header.into())),
        };
        if n < 2 {
            return Err(ColoringFileError::BadN(n));
        }
        let mut coloring = Coloring::new(n, colors);
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(ColoringFileError::BadLine {
                    line: lineno,
                    what: format!("expected `u v k`, got {line:?}"),
                });
            }
            let parse = |s: &str| -> Result<u32, ColoringFileError> {
                s.parse::<u32>().map_err(|_| ColoringFileError::BadLine {
                    line: lineno,
                    what: format!("not an integer: {s:?}"),
                })
            };
            let (u, v, k) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
            if u >= n || v >= n {
                return Err(ColoringFileError::BadLine {
                    line: lineno,
                    what: format!("vertex out of range (n = {n}): {u} {v}"),
                });
            }
            if u == v {
                return Err(ColoringFileError::BadLine { line: lineno, what: format!("self-loop: {u} {v}") });
            }
            if k >= colors {
                return Err(ColoringFileError::BadLine {
                    line: lineno,
                    what: format!("color {k} outside palette 0..{colors}"),
                });
            }
            if coloring.get(u, v).is_some() {
                return Err(ColoringFileError::DuplicateEdge { line: lineno, u, v });
            }
            coloring.set(u, v, k);
        }
        Ok(coloring)
    }

    pub fn read_file(path: &Path) -> Result<Self, ColoringFileError> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}
