//! Evolutionary search for fault trees that explain a failure dataset.
//!
//! One run: extract the data cut sets when needed, seed the population with
//! the parent trees, then per generation build at least `ps` offspring,
//! score them, keep the best `ps` of parents and offspring by Pareto rank
//! and crowding, and stop on a convergence rule.

mod nsga;
mod operators;

use std::collections::HashSet;
use std::sync::Arc;
use std::time::Instant;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::{FailureDataset, McsMatrix};
use crate::exec;
use crate::metrics::{Evaluator, MetricError, MofSetup, ObjectiveVector};
use crate::tree::{FaultTree, Gate, GateType, Node, TreeError, Universe, DEFAULT_PRODUCT_CAP};

pub use nsga::{
    best_individual, crowding_distance, crowding_distances, dedup_by_encoding, dominates, fast_nondominated_sort,
    nondominated_fronts, select_next,
};
pub use operators::{crossover, mutate, only_gate_types_differ, MutationKind, Operator, OperatorError};

/// Default number of offspring per generation, in units of `ps`.
pub const DEFAULT_OFFSPRING_FACTOR: usize = 6;

/// Consecutive failed operator draws after which a parent is copied as is.
const MAX_OPERATOR_RETRIES: usize = 64;

#[derive(Debug, Error)]
pub enum MoeaError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dataset has no rows with TE = 1; no fault tree can represent it")]
    NoFailures,
    #[error("parent tree does not fit the dataset")]
    ParentUniverse(#[from] TreeError),
    #[error("DNF parent needs a non-empty cut-set matrix")]
    EmptyMcs,
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// How the initial population is seeded.
#[derive(Debug, Clone, PartialEq)]
pub enum ParentStrategy {
    /// One Or and one And over the whole universe.
    OrAnd,
    /// An Or with one And per data cut set.
    Dnf,
    /// A user-supplied tree.
    Given(FaultTree),
}

impl ParentStrategy {
    pub fn label(&self) -> &'static str {
        match self {
            ParentStrategy::OrAnd => "A",
            ParentStrategy::Dnf => "B",
            ParentStrategy::Given(_) => "C",
        }
    }
}

/// Relative selection weights of the seven operators, in
/// [`Operator::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorWeights(pub [f64; 7]);

impl Default for OperatorWeights {
    fn default() -> Self {
        OperatorWeights([1.0; 7])
    }
}

impl OperatorWeights {
    pub fn only(op: Operator) -> Self {
        let mut w = [0.0; 7];
        w[Operator::ALL.iter().position(|o| *o == op).expect("listed")] = 1.0;
        OperatorWeights(w)
    }

    pub fn none() -> Self {
        OperatorWeights([0.0; 7])
    }
}

#[derive(Debug, Clone)]
pub struct MoeaConfig {
    pub ps: usize,
    pub ng: usize,
    pub uc: usize,
    pub setup: MofSetup,
    pub parents: ParentStrategy,
    pub seed: u64,
    pub dnf_product_cap: usize,
    pub operator_weights: OperatorWeights,
    /// Offspring per generation, as a multiple of `ps`.
    pub offspring_factor: usize,
    /// Keep structurally identical trees, both when breeding and during
    /// selection.
    pub allow_duplicates: bool,
}

impl Default for MoeaConfig {
    fn default() -> Self {
        MoeaConfig {
            ps: 400,
            ng: 100,
            uc: 20,
            setup: MofSetup::Sdc,
            parents: ParentStrategy::OrAnd,
            seed: 0,
            dnf_product_cap: DEFAULT_PRODUCT_CAP,
            operator_weights: OperatorWeights::default(),
            offspring_factor: DEFAULT_OFFSPRING_FACTOR,
            allow_duplicates: false,
        }
    }
}

impl MoeaConfig {
    pub fn validate(&self) -> Result<(), MoeaError> {
        if self.ps < 2 {
            return Err(MoeaError::Config(format!("ps must be at least 2, got {}", self.ps)));
        }
        if self.ng < 1 {
            return Err(MoeaError::Config("ng must be at least 1".into()));
        }
        if self.uc < 1 {
            return Err(MoeaError::Config("uc must be at least 1".into()));
        }
        if self.offspring_factor < 1 {
            return Err(MoeaError::Config("offspring factor must be at least 1".into()));
        }
        if self.dnf_product_cap < 1 {
            return Err(MoeaError::Config("DNF product cap must be positive".into()));
        }
        if self.operator_weights.0.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MoeaError::Config("operator weights must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// A scored tree.
#[derive(Debug, Clone)]
pub struct Individual {
    pub ft: FaultTree,
    pub objectives: ObjectiveVector,
    pub encoding: String,
    /// True tree size, known even when size is not an active objective.
    pub size: usize,
}

impl Individual {
    pub fn new(ft: FaultTree, objectives: ObjectiveVector) -> Self {
        let encoding = ft.canonical_encoding();
        let size = ft.phi_s();
        Individual { ft, objectives, encoding, size }
    }

    pub fn evaluate(ft: FaultTree, evaluator: &Evaluator) -> Self {
        let objectives = evaluator.evaluate(&ft);
        Individual::new(ft, objectives)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Best candidate unchanged for `uc` generations.
    UcReached,
    NgReached,
    /// All active errors reached zero under a setup without size.
    ZeroError,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::UcReached => "uc_reached",
            Termination::NgReached => "ng_reached",
            Termination::ZeroError => "zero_error",
        }
    }
}

/// Per-generation statistics. Size columns use the true tree size; error
/// columns report objective values, which are the placeholder 1 for an
/// inactive metric.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationLog {
    pub generation: usize,
    pub best_phi_s: usize,
    pub best_phi_d: f64,
    pub best_phi_c: f64,
    pub mean_phi_s: f64,
    pub mean_phi_d: f64,
    pub mean_phi_c: f64,
    pub front1_size: usize,
    pub pool_size: usize,
    pub elapsed_ms: u128,
}

impl GenerationLog {
    /// Equality of everything but wall-clock time.
    pub fn same_trajectory(&self, other: &GenerationLog) -> bool {
        GenerationLog { elapsed_ms: 0, ..self.clone() } == GenerationLog { elapsed_ms: 0, ..other.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// First front of the final population, best first.
    pub pareto_front: Vec<Individual>,
    pub best: Individual,
    pub generations: Vec<GenerationLog>,
    pub termination: Termination,
    /// Cut sets extracted from the data, when the run needed them.
    pub data_mcs: Option<McsMatrix>,
}

/// Initial parent trees over `universe`.
pub fn init_parents(
    strategy: &ParentStrategy,
    universe: &Arc<Universe>,
    m_d: Option<&McsMatrix>,
) -> Result<Vec<FaultTree>, MoeaError> {
    Ok(match strategy {
        ParentStrategy::OrAnd => {
            vec![FaultTree::flat(universe.clone(), GateType::Or)?, FaultTree::flat(universe.clone(), GateType::And)?]
        }
        ParentStrategy::Dnf => {
            let m_d = m_d.filter(|m| !m.is_empty()).ok_or(MoeaError::EmptyMcs)?;
            let products = m_d
                .rows
                .iter()
                .map(|row| Node::Gate(Gate::new(GateType::And, row.iter().map(Node::Be).collect())))
                .collect();
            vec![FaultTree::new(universe.clone(), Gate::new(GateType::Or, products))?]
        }
        ParentStrategy::Given(ft) => vec![ft.rebase(universe.clone())?],
    })
}

/// Builds at least `target` offspring from `parents`. Operators are drawn by
/// weight and applied to uniformly chosen parents; crossover yields two.
/// With all weights zero the offspring are plain copies.
///
/// With `novel` set, only trees whose encoding differs from every parent and
/// every earlier offspring count. Once operators keep failing to find one,
/// copies are accepted for the rest of the batch.
pub fn generate_offspring<R: Rng + ?Sized>(
    parents: &[FaultTree],
    target: usize,
    weights: &OperatorWeights,
    novel: bool,
    rng: &mut R,
) -> Vec<FaultTree> {
    assert!(!parents.is_empty(), "need at least one parent");
    let mut out: Vec<FaultTree> = Vec::with_capacity(target + 1);
    let Ok(dist) = WeightedIndex::new(weights.0) else {
        out.extend((0..target).map(|_| parents[rng.gen_range(0..parents.len())].clone()));
        return out;
    };
    let mut novel = novel;
    let mut seen: HashSet<String> =
        if novel { parents.iter().map(FaultTree::canonical_encoding).collect() } else { HashSet::new() };
    let mut failures = 0;
    while out.len() < target {
        let first = &parents[rng.gen_range(0..parents.len())];
        let produced = match Operator::ALL[dist.sample(rng)] {
            Operator::Crossover => {
                let second = &parents[rng.gen_range(0..parents.len())];
                let (x, y) = crossover(first, second, rng);
                vec![x, y]
            }
            Operator::Mutation(kind) => mutate(first, kind, rng).into_iter().collect(),
        };
        let before = out.len();
        for child in produced {
            if !novel || seen.insert(child.canonical_encoding()) {
                out.push(child);
            }
        }
        if out.len() > before {
            failures = 0;
            continue;
        }
        failures += 1;
        if failures >= MAX_OPERATOR_RETRIES {
            out.push(first.clone());
            novel = false;
            failures = 0;
        }
    }
    out
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn first_front(population: &[Individual]) -> Vec<Individual> {
    let objs: Vec<ObjectiveVector> = population.iter().map(|i| i.objectives).collect();
    let fronts = fast_nondominated_sort(&objs);
    let mut front: Vec<Individual> =
        fronts.first().map(|f| f.iter().map(|&i| population[i].clone()).collect()).unwrap_or_default();
    front.sort_by(nsga::quality_order);
    front
}

fn zero_error_stop(setup: MofSetup, best: &Individual) -> bool {
    !setup.uses_size() && best.objectives.error_sum() == 0.0
}

/// Runs the search to termination.
pub fn run(config: &MoeaConfig, ds: &FailureDataset) -> Result<RunResult, MoeaError> {
    run_with_observer(config, ds, |_| {})
}

/// As [`run`], calling `observer` after every generation.
pub fn run_with_observer(
    config: &MoeaConfig,
    ds: &FailureDataset,
    mut observer: impl FnMut(&GenerationLog),
) -> Result<RunResult, MoeaError> {
    config.validate()?;
    if ds.positive_rows().next().is_none() {
        return Err(MoeaError::NoFailures);
    }
    let started = Instant::now();
    let universe = ds.universe().clone();
    let needs_mcs = config.setup.uses_mcs() || config.parents == ParentStrategy::Dnf;
    let data_mcs = needs_mcs.then(|| ds.extract_mcs());
    let evaluator = Evaluator::new(ds, data_mcs.clone(), config.setup, config.dnf_product_cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let dedup = !config.allow_duplicates;

    let parents = init_parents(&config.parents, &universe, data_mcs.as_ref())?;
    let scored = exec::map(&parents, |t| Individual::evaluate(t.clone(), &evaluator));
    let mut population = select_next(scored, config.ps, dedup);
    let mut best = best_individual(&first_front(&population)).clone();
    let mut unchanged = 0usize;
    let mut generations = Vec::new();

    for generation in 1..=config.ng {
        let trees: Vec<FaultTree> = population.iter().map(|i| i.ft.clone()).collect();
        let target = config.ps * config.offspring_factor;
        let offspring = generate_offspring(&trees, target, &config.operator_weights, dedup, &mut rng);
        let scored = exec::map(&offspring, |t| Individual::evaluate(t.clone(), &evaluator));

        let mut pool = population;
        pool.extend(scored);
        let pool = if dedup { dedup_by_encoding(pool) } else { pool };
        let pool_size = pool.len();
        population = select_next(pool, config.ps, false);

        let front = first_front(&population);
        let new_best = best_individual(&front).clone();
        if new_best.encoding == best.encoding {
            unchanged += 1;
        } else {
            unchanged = 0;
        }
        best = new_best;

        let log = GenerationLog {
            generation,
            best_phi_s: best.size,
            best_phi_d: best.objectives.phi_d,
            best_phi_c: best.objectives.phi_c,
            mean_phi_s: mean(population.iter().map(|i| i.size as f64)),
            mean_phi_d: mean(population.iter().map(|i| i.objectives.phi_d)),
            mean_phi_c: mean(population.iter().map(|i| i.objectives.phi_c)),
            front1_size: front.len(),
            pool_size,
            elapsed_ms: started.elapsed().as_millis(),
        };
        observer(&log);
        generations.push(log);

        let termination = if zero_error_stop(config.setup, &best) {
            Some(Termination::ZeroError)
        } else if unchanged >= config.uc {
            Some(Termination::UcReached)
        } else if generation == config.ng {
            Some(Termination::NgReached)
        } else {
            None
        };
        if let Some(termination) = termination {
            return Ok(RunResult { pareto_front: front, best, generations, termination, data_mcs });
        }
    }
    unreachable!("the generation loop always terminates by ng")
}
