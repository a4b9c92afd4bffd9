//! Fixed-capacity bit sets over color indices.
//!
//! Per-vertex color sets (special sets, hit sets) are hot: candidate
//! enumeration intersects five or six of them per process step. A flat
//! `Vec<u64>` with word-parallel operations keeps that at a handful of
//! machine words per query.

/// A set of color indices in `0..capacity`, stored as 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorSet {
    words: Vec<u64>,
    capacity: u32,
}

/// Number of words needed for `capacity` bits.
#[inline]
pub fn words_for(capacity: u32) -> usize {
    (capacity as usize).div_ceil(64)
}

impl ColorSet {
    /// Empty set with room for colors `0..capacity`.
    pub fn new(capacity: u32) -> Self {
        ColorSet { words: vec![0; words_for(capacity)], capacity }
    }

    #[inline]
    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    #[inline]
    pub fn contains(&self, k: u32) -> bool {
        debug_assert!(k < self.capacity);
        self.words[(k / 64) as usize] & (1u64 << (k % 64)) != 0
    }

    #[inline]
    pub fn insert(&mut self, k: u32) {
        debug_assert!(k < self.capacity);
        self.words[(k / 64) as usize] |= 1u64 << (k % 64);
    }

    #[inline]
    pub fn remove(&mut self, k: u32) {
        debug_assert!(k < self.capacity);
        self.words[(k / 64) as usize] &= !(1u64 << (k % 64));
    }

    pub fn len(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Iterate members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| BitIter { word: w, base: (wi * 64) as u32 })
    }

    /// Members of `self ∩ other`, in increasing order.
    pub fn intersection<'a>(&'a self, other: &'a ColorSet) -> impl Iterator<Item = u32> + 'a {
        debug_assert_eq!(self.capacity, other.capacity);
        self.words
            .iter()
            .zip(other.words.iter())
            .enumerate()
            .flat_map(|(wi, (&a, &b))| BitIter { word: a & b, base: (wi * 64) as u32 })
    }

    /// Collect members into a sorted vector.
    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

struct BitIter {
    word: u64,
    base: u32,
}

impl Iterator for BitIter {
    type Item = u32;

    #[inline]
    fn next(&mut self) -> Option<u32> {
        if self.word == 0 {
            return None;
        }
        let bit = self.word.trailing_zeros();
        self.word &= self.word - 1;
        Some(self.base + bit)
    }
}

/// Iterate the set bits of a raw word slice (used for stack-allocated masks).
pub fn iter_mask(words: &[u64]) -> impl Iterator<Item = u32> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| BitIter { word: w, base: (wi * 64) as u32 })
}

/// Count the set bits of a raw word slice.
pub fn count_mask(words: &[u64]) -> u32 {
    words.iter().map(|w| w.count_ones()).sum()
}

/// Pick the `idx`-th (0-based) set bit of a raw word slice, in increasing
/// order. Panics if fewer than `idx + 1` bits are set.
pub fn select_mask(words: &[u64], mut idx: u32) -> u32 {
    for (wi, &w) in words.iter().enumerate() {
        let ones = w.count_ones();
        if idx < ones {
            let mut word = w;
            for _ in 0..idx {
                word &= word - 1;
            }
            return (wi * 64) as u32 + word.trailing_zeros();
        }
        idx -= ones;
    }
    panic!("select_mask: index out of range");
}
