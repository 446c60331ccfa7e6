//! Robust (multiplicative) joint typicality.
//!
//! A tuple of sequences is typical with respect to `p` when every joint
//! symbol `a` has empirical frequency within `epsilon * p(a)` of `p(a)`, and
//! never occurs where `p(a) = 0`.

use crate::error::{Error, Result};
use crate::prob::JointTable;

/// Absorbs rounding in `count / n` so that an exact type always passes.
const FREQ_SLACK: f64 = 1e-12;

/// A typicality test against a fixed reference marginal, with the sequence
/// order fixed at construction.
#[derive(Debug, Clone)]
pub struct TypicalityTest {
    names: Vec<String>,
    sizes: Vec<usize>,
    strides: Vec<usize>,
    probs: Vec<f64>,
    support: usize,
    epsilon: f64,
}

impl TypicalityTest {
    /// Tests sequences named by `order` against the marginal of `joint` on
    /// those variables.
    pub fn new(joint: &JointTable, order: &[&str], epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::config(format!("typicality slack must be positive, got {epsilon}")));
        }
        let marginal = joint.marginalize(order)?;
        let table_strides = marginal.strides();
        let mut strides = Vec::with_capacity(order.len());
        let mut sizes = Vec::with_capacity(order.len());
        for name in order {
            let i = marginal.var_index(name)?;
            strides.push(table_strides[i]);
            sizes.push(marginal.vars()[i].size);
        }
        let probs = marginal.probs().to_vec();
        let support = probs.iter().filter(|p| **p > 0.0).count();
        Ok(TypicalityTest {
            names: order.iter().map(|s| s.to_string()).collect(),
            sizes,
            strides,
            probs,
            support,
            epsilon,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Like [`check`](Self::check) but validates the sequence shapes first.
    pub fn check_shapes(&self, seqs: &[&[u8]]) -> Result<bool> {
        if seqs.len() != self.sizes.len() {
            return Err(Error::Shape(format!(
                "expected {} sequences ({:?}), got {}",
                self.sizes.len(),
                self.names,
                seqs.len()
            )));
        }
        let n = seqs[0].len();
        for (k, s) in seqs.iter().enumerate() {
            if s.len() != n {
                return Err(Error::Shape(format!(
                    "sequence `{}` has length {}, expected {n}",
                    self.names[k],
                    s.len()
                )));
            }
            if let Some(bad) = s.iter().find(|x| usize::from(**x) >= self.sizes[k]) {
                return Err(Error::Shape(format!(
                    "symbol {bad} outside the alphabet of `{}`",
                    self.names[k]
                )));
            }
        }
        Ok(self.check(seqs))
    }

    /// Sequences must be in construction order, equally long, and within
    /// their alphabets.
    pub fn check(&self, seqs: &[&[u8]]) -> bool {
        let n = seqs[0].len();
        if n == 0 {
            return false;
        }
        let mut stack = [0usize; 64];
        let mut heap = Vec::new();
        let cells: &mut [usize] = if n <= stack.len() {
            &mut stack[..n]
        } else {
            heap.resize(n, 0);
            &mut heap
        };
        for (i, cell) in cells.iter_mut().enumerate() {
            *cell = seqs
                .iter()
                .zip(&self.strides)
                .map(|(s, stride)| usize::from(s[i]) * stride)
                .sum();
        }
        cells.sort_unstable();
        let mut distinct = 0usize;
        let mut start = 0usize;
        while start < n {
            let cell = cells[start];
            let mut end = start + 1;
            while end < n && cells[end] == cell {
                end += 1;
            }
            let p = self.probs[cell];
            if p <= 0.0 {
                return false;
            }
            let freq = (end - start) as f64 / n as f64;
            if (freq - p).abs() > self.epsilon * p + FREQ_SLACK {
                return false;
            }
            distinct += 1;
            start = end;
        }
        // An unseen support cell deviates by p(a), which only passes when epsilon >= 1.
        self.epsilon >= 1.0 || distinct == self.support
    }
}

/// One-shot test of `seqs`, given in the variable order of `reference`.
pub fn is_typical(seqs: &[&[u8]], reference: &JointTable, epsilon: f64) -> Result<bool> {
    let names = reference.var_names();
    TypicalityTest::new(reference, &names, epsilon)?.check_shapes(seqs)
}
