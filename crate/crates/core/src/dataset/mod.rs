//! Labelled binary failure data.
//!
//! A dataset is a list of unique basic-event assignments, each with the
//! observed top-event value and the number of times it was observed.

mod columns;
mod csv_io;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::beset::{BeSet, MAX_BES};
use crate::exec;
use crate::tree::{FaultTree, TreeError, Universe};

pub use columns::BitColumns;
pub use csv_io::{read_csv, read_csv_str, write_csv, write_csv_string};

/// Default upper bound on `w` for exhaustive enumeration.
pub const DEFAULT_COMPLETE_CAP: usize = 24;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("row {row}: {msg}")]
    Malformed { row: usize, msg: String },
    #[error("rows {first} and {second} share an assignment but disagree on TE (noisy data)")]
    Noise { first: usize, second: usize },
    #[error("{w} basic events exceed the enumeration cap of {cap}")]
    CapExceeded { w: usize, cap: usize },
    #[error("probability for `{name}` must lie strictly between 0 and 1, got {p}")]
    Probability { name: String, p: f64 },
    #[error("expected {expected} probabilities, got {actual}")]
    ProbabilityCount { expected: usize, actual: usize },
    #[error("gave up after {0} draws without observing every assignment")]
    DrawLimit(u64),
    #[error("name `{0}` cannot be written to CSV")]
    BadName(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Row {
    /// Failed basic events, indexed by column.
    pub bits: BeSet,
    pub te: bool,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureDataset {
    universe: Arc<Universe>,
    rows: Vec<Row>,
}

impl FailureDataset {
    /// Aggregates raw observations. Repeated assignments are merged with
    /// summed counts; a conflicting label is reported as noise, naming the
    /// zero-based positions of the two observations.
    pub fn from_observations(
        universe: Arc<Universe>,
        observations: impl IntoIterator<Item = Row>,
    ) -> Result<Self, DatasetError> {
        let mut merged: BTreeMap<u128, (Row, usize)> = BTreeMap::new();
        for (pos, obs) in observations.into_iter().enumerate() {
            if obs.count == 0 {
                return Err(DatasetError::Malformed { row: pos, msg: "count must be positive".into() });
            }
            match merged.get_mut(&obs.bits.lex_key()) {
                Some((row, first)) => {
                    if row.te != obs.te {
                        return Err(DatasetError::Noise { first: *first, second: pos });
                    }
                    row.count += obs.count;
                }
                None => {
                    merged.insert(obs.bits.lex_key(), (obs, pos));
                }
            }
        }
        let width = BeSet::full(universe.len());
        if let Some((r, pos)) = merged.values().find(|(r, _)| !r.bits.is_subset(width)) {
            return Err(DatasetError::Malformed {
                row: *pos,
                msg: format!("assignment {:?} outside {} columns", r.bits, universe.len()),
            });
        }
        Ok(FailureDataset { universe, rows: merged.into_values().map(|(r, _)| r).collect() })
    }

    pub fn empty(universe: Arc<Universe>) -> Self {
        FailureDataset { universe, rows: Vec::new() }
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn be_names(&self) -> &[String] {
        self.universe.names()
    }

    pub fn width(&self) -> usize {
        self.universe.len()
    }

    /// Unique rows in truth-table order (first column most significant).
    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn n_points(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }

    pub fn positive_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.te)
    }

    /// Drops the rows matching `pred`; mostly useful for building test cases.
    pub fn without_rows(&self, pred: impl Fn(&Row) -> bool) -> Self {
        FailureDataset {
            universe: self.universe.clone(),
            rows: self.rows.iter().filter(|r| !pred(r)).copied().collect(),
        }
    }

    /// True iff every one of the `2^w` assignments is present.
    pub fn check_complete(&self) -> bool {
        self.width() < 128 && self.rows.len() as u128 == 1u128 << self.width()
    }

    /// Pairs `(i, j)` of row indices where row `i` contains every failure of
    /// row `j`, yet `i` is labelled 0 and `j` is labelled 1.
    pub fn check_monotonic(&self) -> Vec<(usize, usize)> {
        let negatives: Vec<usize> = (0..self.rows.len()).filter(|&i| !self.rows[i].te).collect();
        let positives: Vec<usize> = (0..self.rows.len()).filter(|&i| self.rows[i].te).collect();
        let rows = &self.rows;
        exec::map(&negatives, |&i| {
            positives.iter().filter(|&&j| rows[j].bits.is_subset(rows[i].bits)).map(|&j| (i, j)).collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect()
    }

    /// Minimal cut sets read off the data: repeatedly take a TE=1 row of
    /// minimal order, record it, and delete every TE=1 row that includes it.
    /// Equal-order rows are taken lowest bit pattern first.
    pub fn extract_mcs(&self) -> McsMatrix {
        let mut pending: Vec<BeSet> = self.positive_rows().map(|r| r.bits).collect();
        pending.sort_unstable_by_key(|s| (s.len(), s.lex_key()));
        let mut found = Vec::new();
        while let Some(&smallest) = pending.first() {
            found.push(smallest);
            pending.retain(|r| !smallest.is_subset(*r));
        }
        McsMatrix { universe: self.universe.clone(), rows: found }
    }

    /// Drops columns, keeping `keep` (in the given order), and re-aggregates.
    pub fn project(&self, keep: &[usize]) -> Result<Self, DatasetError> {
        let universe = Arc::new(Universe::new(keep.iter().map(|&i| self.universe.name(i).to_string()))?);
        let rows = self.rows.iter().map(|r| Row {
            bits: keep.iter().enumerate().filter(|(_, &c)| r.bits.contains(c)).map(|(k, _)| k).collect(),
            te: r.te,
            count: r.count,
        });
        Self::from_observations(universe, rows)
    }

    pub fn columns(&self) -> BitColumns {
        BitColumns::new(self)
    }
}

/// Binary matrix of cut sets (rows) over an ordered universe (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McsMatrix {
    pub universe: Arc<Universe>,
    pub rows: Vec<BeSet>,
}

impl McsMatrix {
    pub fn new(universe: Arc<Universe>, rows: Vec<BeSet>) -> Self {
        McsMatrix { universe, rows }
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Rows as dense 0/1 vectors.
    pub fn dense(&self) -> Vec<Vec<u8>> {
        self.rows.iter().map(|r| (0..self.universe.len()).map(|c| r.contains(c) as u8).collect()).collect()
    }

    /// Columns that appear in at least one cut set.
    pub fn relevant(&self) -> BeSet {
        self.rows.iter().fold(BeSet::EMPTY, |acc, r| acc.union(*r))
    }

    pub fn format(&self) -> String {
        self.universe.format_family(&self.rows)
    }
}

fn check_probabilities(universe: &Universe, p: &[f64]) -> Result<(), DatasetError> {
    if p.len() != universe.len() {
        return Err(DatasetError::ProbabilityCount { expected: universe.len(), actual: p.len() });
    }
    for (i, &pi) in p.iter().enumerate() {
        if !(pi > 0.0 && pi < 1.0) {
            return Err(DatasetError::Probability { name: universe.name(i).to_string(), p: pi });
        }
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, p: &[f64]) -> BeSet {
    p.iter().enumerate().filter(|(_, &pi)| rng.gen_bool(pi)).map(|(i, _)| i).collect()
}

/// Monte Carlo sampling: `n_points` independent draws, each event failing
/// with its own probability (indexed like the tree's universe), labelled by
/// the tree.
pub fn generate_dataset(
    truth: &FaultTree,
    n_points: u64,
    p: &[f64],
    seed: u64,
) -> Result<FailureDataset, DatasetError> {
    let universe = truth.universe().clone();
    check_probabilities(&universe, p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<u128, u64> = BTreeMap::new();
    for _ in 0..n_points {
        *counts.entry(draw(&mut rng, p).0).or_default() += 1;
    }
    let rows = counts.into_iter().map(|(bits, count)| {
        let bits = BeSet(bits);
        Row { bits, te: truth.evaluate_bits(bits), count }
    });
    FailureDataset::from_observations(universe, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompleteMode {
    /// Every assignment exactly once.
    Exhaustive,
    /// Monte Carlo draws until all `2^w` assignments have been seen.
    Sample { p: Vec<f64>, max_draws: Option<u64> },
}

pub fn generate_complete(
    truth: &FaultTree,
    seed: u64,
    mode: &CompleteMode,
    cap: usize,
) -> Result<FailureDataset, DatasetError> {
    let universe = truth.universe().clone();
    let w = universe.len();
    if w > cap {
        return Err(DatasetError::CapExceeded { w, cap });
    }
    let total = 1u64 << w;
    match mode {
        CompleteMode::Exhaustive => {
            let rows = (0..total).map(|b| {
                let bits = BeSet(b as u128);
                Row { bits, te: truth.evaluate_bits(bits), count: 1 }
            });
            FailureDataset::from_observations(universe, rows)
        }
        CompleteMode::Sample { p, max_draws } => {
            check_probabilities(&universe, p)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts: BTreeMap<u128, u64> = BTreeMap::new();
            let mut drawn = 0u64;
            while (counts.len() as u64) < total {
                if max_draws.is_some_and(|m| drawn >= m) {
                    return Err(DatasetError::DrawLimit(drawn));
                }
                *counts.entry(draw(&mut rng, p).0).or_default() += 1;
                drawn += 1;
            }
            let rows = counts.into_iter().map(|(bits, count)| {
                let bits = BeSet(bits);
                Row { bits, te: truth.evaluate_bits(bits), count }
            });
            FailureDataset::from_observations(universe, rows)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperfluousMode {
    /// Each observation gets fair coin flips for the new columns.
    Sample,
    /// Each row is repeated under every pattern of the new columns, keeping
    /// its count; complete data stays complete.
    Cross,
}

/// Appends `rho` columns that have no influence on the top event.
pub fn inject_superfluous(
    ds: &FailureDataset,
    rho: usize,
    seed: u64,
    mode: SuperfluousMode,
) -> Result<FailureDataset, DatasetError> {
    if rho == 0 {
        return Ok(ds.clone());
    }
    let w = ds.width();
    let mut names: Vec<String> = ds.be_names().to_vec();
    let mut k = 0;
    while names.len() < w + rho {
        k += 1;
        let candidate = format!("X{k}");
        if !names.contains(&candidate) {
            names.push(candidate);
        }
    }
    let universe = Arc::new(Universe::new(names)?);
    let mut out = Vec::new();
    match mode {
        SuperfluousMode::Sample => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for r in ds.rows() {
                for _ in 0..r.count {
                    let mut bits = r.bits;
                    for j in 0..rho {
                        if rng.gen_bool(0.5) {
                            bits.insert(w + j);
                        }
                    }
                    out.push(Row { bits, te: r.te, count: 1 });
                }
            }
        }
        SuperfluousMode::Cross => {
            if rho > DEFAULT_COMPLETE_CAP || w + rho > MAX_BES {
                return Err(DatasetError::CapExceeded { w: w + rho, cap: (w + DEFAULT_COMPLETE_CAP).min(MAX_BES) });
            }
            for r in ds.rows() {
                for pattern in 0u128..(1u128 << rho) {
                    out.push(Row { bits: BeSet(r.bits.0 | pattern << w), te: r.te, count: r.count });
                }
            }
        }
    }
    FailureDataset::from_observations(universe, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_ft;

    fn and_ab() -> FaultTree {
        parse_ft("toplevel TE; TE and A B;").unwrap()
    }

    #[test]
    fn monte_carlo_counts_sum_and_cover() {
        let ds = generate_dataset(&and_ab(), 250_000, &[0.5, 0.5], 7).unwrap();
        assert_eq!(ds.n_points(), 250_000);
        assert_eq!(ds.rows().len(), 4);
        for r in ds.rows() {
            // each quarter within 1% of 62 500
            assert!((r.count as f64 - 62_500.0).abs() < 625.0, "{r:?}");
            assert_eq!(r.te, r.bits == BeSet(0b11));
        }
        assert!(ds.check_monotonic().is_empty());
    }

    #[test]
    fn single_point() {
        let ds = generate_dataset(&and_ab(), 1, &[0.5, 0.5], 1).unwrap();
        assert_eq!(ds.rows().len(), 1);
        assert_eq!(ds.rows()[0].count, 1);
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = generate_dataset(&and_ab(), 100, &[0.3, 0.6], 11).unwrap();
        assert_eq!(a, generate_dataset(&and_ab(), 100, &[0.3, 0.6], 11).unwrap());
    }

    #[test]
    fn probabilities_are_checked() {
        assert!(matches!(generate_dataset(&and_ab(), 1, &[0.5], 1), Err(DatasetError::ProbabilityCount { .. })));
        assert!(matches!(generate_dataset(&and_ab(), 1, &[0.5, 1.0], 1), Err(DatasetError::Probability { .. })));
    }

    #[test]
    fn exhaustive_and_sampled_completion() {
        let ex = generate_complete(&and_ab(), 0, &CompleteMode::Exhaustive, DEFAULT_COMPLETE_CAP).unwrap();
        assert_eq!(ex.rows().len(), 4);
        assert_eq!(ex.positive_rows().map(|r| r.bits).collect::<Vec<_>>(), vec![BeSet(0b11)]);
        assert!(ex.check_complete());
        let sampled =
            generate_complete(&and_ab(), 3, &CompleteMode::Sample { p: vec![0.5, 0.5], max_draws: None }, 24).unwrap();
        assert!(sampled.check_complete());
        assert!(matches!(
            generate_complete(&and_ab(), 0, &CompleteMode::Exhaustive, 1),
            Err(DatasetError::CapExceeded { w: 2, cap: 1 })
        ));
    }

    #[test]
    fn completeness_edge_cases() {
        let u = Arc::new(Universe::new(["A"]).unwrap());
        let rows = [Row { bits: BeSet(0), te: false, count: 1 }, Row { bits: BeSet(1), te: true, count: 1 }];
        let ds = FailureDataset::from_observations(u, rows).unwrap();
        assert!(ds.check_complete());
        assert!(!ds.without_rows(|r| r.te).check_complete());
    }

    #[test]
    fn monotonic_violation_is_reported() {
        let u = Arc::new(Universe::new(["A", "B"]).unwrap());
        let rows = [Row { bits: BeSet(0b01), te: true, count: 1 }, Row { bits: BeSet(0b11), te: false, count: 1 }];
        let ds = FailureDataset::from_observations(u.clone(), rows).unwrap();
        let v = ds.check_monotonic();
        assert_eq!(v.len(), 1);
        let (hi, lo) = v[0];
        assert_eq!(ds.rows()[hi].bits, BeSet(0b11));
        assert_eq!(ds.rows()[lo].bits, BeSet(0b01));
        assert!(FailureDataset::empty(u).check_monotonic().is_empty());
    }

    #[test]
    fn extraction_on_small_trees() {
        let ex = |src: &str| {
            let t = parse_ft(src).unwrap();
            generate_complete(&t, 0, &CompleteMode::Exhaustive, 24).unwrap().extract_mcs()
        };
        assert_eq!(ex("toplevel TE; TE and A B;").dense(), vec![vec![1, 1]]);
        assert_eq!(ex("toplevel TE; TE or A B;").dense(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn noise_is_rejected() {
        let u = Arc::new(Universe::new(["A"]).unwrap());
        let rows = [Row { bits: BeSet(1), te: true, count: 1 }, Row { bits: BeSet(1), te: false, count: 2 }];
        assert!(matches!(FailureDataset::from_observations(u, rows), Err(DatasetError::Noise { first: 0, second: 1 })));
    }

    #[test]
    fn superfluous_injection() {
        let t = and_ab();
        let ds = generate_complete(&t, 0, &CompleteMode::Exhaustive, 24).unwrap();
        assert_eq!(inject_superfluous(&ds, 0, 1, SuperfluousMode::Sample).unwrap(), ds);
        let crossed = inject_superfluous(&ds, 2, 1, SuperfluousMode::Cross).unwrap();
        assert_eq!(crossed.be_names(), ["A", "B", "X1", "X2"]);
        assert!(crossed.check_complete());
        for r in crossed.rows() {
            assert_eq!(r.te, r.bits.contains(0) && r.bits.contains(1));
        }
        let mc = generate_dataset(&t, 500, &[0.5, 0.5], 2).unwrap();
        let sampled = inject_superfluous(&mc, 3, 9, SuperfluousMode::Sample).unwrap();
        assert_eq!(sampled.n_points(), 500);
        assert_eq!(sampled.project(&[0, 1]).unwrap(), mc);
    }
}
