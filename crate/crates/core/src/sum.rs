//! Deterministic streaming pairwise summation.
//!
//! Values are summed naively in blocks of [`BLOCK`]; block sums are then
//! combined along a binary tree. The result depends only on the order in
//! which values are pushed, never on thread count, and the rounding error
//! grows like `O(log n)` instead of `O(n)`.

/// Number of values summed naively before entering the tree.
pub const BLOCK: u32 = 32;

const DEPTH: usize = 64;

#[derive(Clone, Debug)]
pub struct PairwiseSum {
    partial: f64,
    count: u32,
    stack: [f64; DEPTH],
    level: [u8; DEPTH],
    len: usize,
}

impl Default for PairwiseSum {
    fn default() -> Self {
        Self::new()
    }
}

impl PairwiseSum {
    pub const fn new() -> Self {
        PairwiseSum {
            partial: 0.0,
            count: 0,
            stack: [0.0; DEPTH],
            level: [0; DEPTH],
            len: 0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        self.partial += x;
        self.count += 1;
        if self.count == BLOCK {
            let v = self.partial;
            self.partial = 0.0;
            self.count = 0;
            self.push(v, 0);
        }
    }

    fn push(&mut self, mut v: f64, mut lvl: u8) {
        while self.len > 0 && self.level[self.len - 1] == lvl {
            self.len -= 1;
            v += self.stack[self.len];
            lvl += 1;
        }
        self.stack[self.len] = v;
        self.level[self.len] = lvl;
        self.len += 1;
    }

    pub fn total(&self) -> f64 {
        let mut s = self.partial;
        for i in (0..self.len).rev() {
            s += self.stack[i];
        }
        s
    }
}

/// Pairwise sum of a slice, in index order.
pub fn pairwise(values: &[f64]) -> f64 {
    let mut acc = PairwiseSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.total()
}
