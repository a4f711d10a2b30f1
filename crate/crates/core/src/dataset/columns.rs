//! Column-major packed view of a dataset for 64-rows-at-a-time evaluation.

use super::FailureDataset;
use crate::tree::{FaultTree, GateType, Node};

/// Each basic event becomes a bit vector over rows; gates evaluate with
/// word-wide Boolean operations.
#[derive(Debug, Clone)]
pub struct BitColumns {
    n_rows: usize,
    words: usize,
    events: Vec<Vec<u64>>,
    te: Vec<u64>,
    counts: Vec<u64>,
    unit_counts: bool,
    n_points: u64,
}

impl BitColumns {
    pub fn new(ds: &FailureDataset) -> Self {
        let n_rows = ds.rows().len();
        let words = n_rows.div_ceil(64);
        let mut events = vec![vec![0u64; words]; ds.width()];
        let mut te = vec![0u64; words];
        for (r, row) in ds.rows().iter().enumerate() {
            let (w, b) = (r / 64, r % 64);
            for c in row.bits.iter() {
                events[c][w] |= 1 << b;
            }
            if row.te {
                te[w] |= 1 << b;
            }
        }
        let counts: Vec<u64> = ds.rows().iter().map(|r| r.count).collect();
        BitColumns {
            n_rows,
            words,
            events,
            te,
            unit_counts: counts.iter().all(|&c| c == 1),
            n_points: counts.iter().sum(),
            counts,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_points(&self) -> u64 {
        self.n_points
    }

    fn tail_mask(&self) -> u64 {
        match self.n_rows % 64 {
            0 => u64::MAX,
            r => (1u64 << r) - 1,
        }
    }

    fn eval(&self, node: &Node) -> Vec<u64> {
        match node {
            Node::Be(i) => self.events[*i].clone(),
            Node::Gate(g) => match g.kind {
                GateType::And => {
                    let mut acc = vec![u64::MAX; self.words];
                    for c in &g.children {
                        let v = self.eval(c);
                        acc.iter_mut().zip(&v).for_each(|(a, b)| *a &= b);
                    }
                    acc
                }
                GateType::Or => {
                    let mut acc = vec![0u64; self.words];
                    for c in &g.children {
                        let v = self.eval(c);
                        acc.iter_mut().zip(&v).for_each(|(a, b)| *a |= b);
                    }
                    acc
                }
                GateType::Vot { k, .. } => {
                    // at_least[j]: rows where at least j of the inputs seen so far are true
                    let mut at_least = vec![vec![0u64; self.words]; k + 1];
                    at_least[0].fill(u64::MAX);
                    for c in &g.children {
                        let v = self.eval(c);
                        for j in (1..=k).rev() {
                            for w in 0..self.words {
                                at_least[j][w] |= at_least[j - 1][w] & v[w];
                            }
                        }
                    }
                    at_least.swap_remove(k)
                }
            },
        }
    }

    /// Top-event prediction for every row, packed.
    pub fn predict(&self, ft: &FaultTree) -> Vec<u64> {
        let mut p = self.eval(ft.root());
        if let Some(last) = p.last_mut() {
            *last &= self.tail_mask();
        }
        p
    }

    /// Number of data points (count-weighted) whose label the tree misses.
    pub fn mismatches(&self, ft: &FaultTree) -> u64 {
        let pred = self.predict(ft);
        let mut total = 0u64;
        for (w, (p, t)) in pred.iter().zip(&self.te).enumerate() {
            let mut diff = p ^ t;
            if self.unit_counts {
                total += diff.count_ones() as u64;
                continue;
            }
            while diff != 0 {
                let b = diff.trailing_zeros() as usize;
                total += self.counts[w * 64 + b];
                diff &= diff - 1;
            }
        }
        total
    }
}
