//! Fitness metrics: tree size, dataset error and cut-set dissimilarity.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{BitColumns, FailureDataset, McsMatrix};
use crate::exec;
use crate::tree::{FaultTree, McsError, TreeError, Universe, DEFAULT_PRODUCT_CAP};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("tree does not fit the dataset")]
    UniverseMismatch(#[from] TreeError),
    #[error(transparent)]
    Mcs(#[from] McsError),
    #[error("cut-set matrix is empty")]
    EmptyMatrix,
    #[error("cut-set matrices use different column orders")]
    ColumnMismatch,
    #[error("unknown objective setup `{0}` (expected one of sdc, dc, sc, sd, c, d)")]
    UnknownSetup(String),
}

/// Which metrics take part in dominance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MofSetup {
    Sdc,
    Dc,
    Sc,
    Sd,
    C,
    D,
}

impl MofSetup {
    pub const ALL: [MofSetup; 6] = [MofSetup::Sdc, MofSetup::Dc, MofSetup::Sc, MofSetup::Sd, MofSetup::C, MofSetup::D];

    /// Active flags for `(phi_s, phi_d, phi_c)`.
    pub fn active(self) -> (bool, bool, bool) {
        match self {
            MofSetup::Sdc => (true, true, true),
            MofSetup::Dc => (false, true, true),
            MofSetup::Sc => (true, false, true),
            MofSetup::Sd => (true, true, false),
            MofSetup::C => (false, false, true),
            MofSetup::D => (false, true, false),
        }
    }

    pub fn uses_size(self) -> bool {
        self.active().0
    }

    pub fn uses_data(self) -> bool {
        self.active().1
    }

    pub fn uses_mcs(self) -> bool {
        self.active().2
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MofSetup::Sdc => "sdc",
            MofSetup::Dc => "dc",
            MofSetup::Sc => "sc",
            MofSetup::Sd => "sd",
            MofSetup::C => "c",
            MofSetup::D => "d",
        }
    }
}

impl fmt::Display for MofSetup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MofSetup {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MofSetup::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| MetricError::UnknownSetup(s.to_string()))
    }
}

/// Metric values under a setup. Inactive metrics hold the placeholder 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveVector {
    pub phi_s: usize,
    pub phi_d: f64,
    pub phi_c: f64,
    pub setup: MofSetup,
    /// Set when the cut sets could not be computed within the product cap
    /// and `phi_c` was assigned its worst value.
    pub mcs_overflow: bool,
}

impl ObjectiveVector {
    /// Values of the active metrics, in `(s, d, c)` order.
    pub fn active_values(&self) -> Vec<f64> {
        let (s, d, c) = self.setup.active();
        let mut v = Vec::with_capacity(3);
        if s {
            v.push(self.phi_s as f64);
        }
        if d {
            v.push(self.phi_d);
        }
        if c {
            v.push(self.phi_c);
        }
        v
    }

    /// Sum of the active error metrics.
    pub fn error_sum(&self) -> f64 {
        let (_, d, c) = self.setup.active();
        (if d { self.phi_d } else { 0.0 }) + (if c { self.phi_c } else { 0.0 })
    }

    /// Minimisation dominance restricted to active metrics.
    pub fn dominates(&self, other: &ObjectiveVector) -> bool {
        let a = self.active_values();
        let b = other.active_values();
        a.iter().zip(&b).all(|(x, y)| x <= y) && a.iter().zip(&b).any(|(x, y)| x < y)
    }
}

/// Count-weighted fraction of data points whose top event the tree gets
/// wrong. The tree is mapped onto the dataset columns by name.
pub fn phi_d(ft: &FaultTree, ds: &FailureDataset) -> Result<f64, MetricError> {
    let ft = ft.rebase(ds.universe().clone())?;
    let cols = ds.columns();
    Ok(phi_d_columns(&ft, &cols))
}

fn phi_d_columns(ft: &FaultTree, cols: &BitColumns) -> f64 {
    if cols.n_points() == 0 {
        return 0.0;
    }
    cols.mismatches(ft) as f64 / cols.n_points() as f64
}

/// The tree's minimal cut sets as rows over `universe`.
pub fn ft_mcs_matrix(ft: &FaultTree, universe: Arc<Universe>, cap: usize) -> Result<McsMatrix, MetricError> {
    let ft = ft.rebase(universe.clone())?;
    let mcs = ft.minimal_cut_sets_capped(cap)?;
    Ok(McsMatrix::new(universe, mcs.into_sets()))
}

/// Column Gram matrix `MᵀM` (co-occurrence counts), row-major `w × w`.
fn gram(rows: &[crate::beset::BeSet], w: usize) -> Vec<u64> {
    let mut g = vec![0u64; w * w];
    for r in rows {
        let cols: Vec<usize> = r.iter().collect();
        for &a in &cols {
            for &b in &cols {
                g[a * w + b] += 1;
            }
        }
    }
    g
}

fn frobenius_dot(a: &[u64], b: &[u64]) -> u128 {
    a.iter().zip(b).map(|(&x, &y)| x as u128 * y as u128).sum()
}

/// Precomputed half of the similarity for a fixed reference matrix.
#[derive(Debug, Clone)]
pub struct McsReference {
    matrix: McsMatrix,
    gram: Vec<u64>,
    self_dot: u128,
}

impl McsReference {
    pub fn new(matrix: McsMatrix) -> Self {
        let w = matrix.universe.len();
        let gram = gram(&matrix.rows, w);
        let self_dot = frobenius_dot(&gram, &gram);
        McsReference { matrix, gram, self_dot }
    }

    pub fn matrix(&self) -> &McsMatrix {
        &self.matrix
    }

    /// One minus the RV coefficient between the reference and `other`.
    pub fn phi_c(&self, other: &McsMatrix) -> Result<f64, MetricError> {
        if self.matrix.universe.names() != other.universe.names() {
            return Err(MetricError::ColumnMismatch);
        }
        if self.matrix.is_empty() || other.is_empty() {
            return Err(MetricError::EmptyMatrix);
        }
        let g = gram(&other.rows, other.universe.len());
        let cross = frobenius_dot(&self.gram, &g);
        let other_dot = frobenius_dot(&g, &g);
        if cross * cross == self.self_dot * other_dot {
            return Ok(0.0);
        }
        let rv = cross as f64 / ((self.self_dot as f64) * (other_dot as f64)).sqrt();
        Ok((1.0 - rv).clamp(0.0, 1.0))
    }
}

/// `1 - tr(M_D M_Fᵀ M_F M_Dᵀ) / sqrt(tr((M_D M_Dᵀ)²) tr((M_F M_Fᵀ)²))`, computed
/// through the column Gram matrices. Errors on empty input or mismatched columns.
pub fn phi_c_checked(m_d: &McsMatrix, m_f: &McsMatrix) -> Result<f64, MetricError> {
    McsReference::new(m_d.clone()).phi_c(m_f)
}

/// As [`phi_c_checked`], but an empty matrix yields the worst value 1.
pub fn phi_c(m_d: &McsMatrix, m_f: &McsMatrix) -> f64 {
    phi_c_checked(m_d, m_f).unwrap_or(1.0)
}

/// Everything needed to score trees against one dataset under one setup.
/// Trees passed in must be built over the dataset's universe.
#[derive(Debug, Clone)]
pub struct Evaluator {
    setup: MofSetup,
    universe: Arc<Universe>,
    columns: BitColumns,
    reference: Option<McsReference>,
    product_cap: usize,
}

impl Evaluator {
    /// `m_d` is required when the setup uses cut sets.
    pub fn new(
        ds: &FailureDataset,
        m_d: Option<McsMatrix>,
        setup: MofSetup,
        product_cap: usize,
    ) -> Result<Self, MetricError> {
        let reference = match m_d {
            Some(m) if !m.is_empty() => Some(McsReference::new(m)),
            _ if setup.uses_mcs() => return Err(MetricError::EmptyMatrix),
            _ => None,
        };
        Ok(Evaluator { setup, universe: ds.universe().clone(), columns: ds.columns(), reference, product_cap })
    }

    pub fn setup(&self) -> MofSetup {
        self.setup
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn reference(&self) -> Option<&McsReference> {
        self.reference.as_ref()
    }

    pub fn phi_d(&self, ft: &FaultTree) -> f64 {
        phi_d_columns(ft, &self.columns)
    }

    /// `None` when there is no reference matrix; worst value on cap overflow.
    pub fn phi_c(&self, ft: &FaultTree) -> Option<(f64, bool)> {
        let reference = self.reference.as_ref()?;
        Some(match ft.minimal_cut_sets_capped(self.product_cap) {
            Ok(mcs) => {
                let m_f = McsMatrix::new(self.universe.clone(), mcs.into_sets());
                (reference.phi_c(&m_f).unwrap_or(1.0), false)
            }
            Err(McsError::TooComplex { .. }) => (1.0, true),
        })
    }

    /// Computes only the active metrics.
    pub fn evaluate(&self, ft: &FaultTree) -> ObjectiveVector {
        debug_assert_eq!(ft.universe().names(), self.universe.names());
        let (s, d, c) = self.setup.active();
        let (phi_c, mcs_overflow) = if c { self.phi_c(ft).unwrap_or((1.0, false)) } else { (1.0, false) };
        ObjectiveVector {
            phi_s: if s { ft.phi_s() } else { 1 },
            phi_d: if d { self.phi_d(ft) } else { 1.0 },
            phi_c,
            setup: self.setup,
            mcs_overflow,
        }
    }

    pub fn evaluate_batch(&self, trees: &[FaultTree]) -> Vec<ObjectiveVector> {
        exec::map(trees, |t| self.evaluate(t))
    }

    pub fn evaluate_batch_sequential(&self, trees: &[FaultTree]) -> Vec<ObjectiveVector> {
        exec::map_sequential(trees, |t| self.evaluate(t))
    }
}

/// One-shot scoring of a tree against a dataset and reference cut sets.
pub fn objectives(
    ft: &FaultTree,
    ds: &FailureDataset,
    m_d: Option<&McsMatrix>,
    setup: MofSetup,
) -> Result<ObjectiveVector, MetricError> {
    let ft = ft.rebase(ds.universe().clone())?;
    let m_d = match m_d {
        Some(m) if m.universe.names() != ds.be_names() => return Err(MetricError::ColumnMismatch),
        other => other.cloned(),
    };
    let eval = Evaluator::new(ds, m_d, setup, DEFAULT_PRODUCT_CAP)?;
    Ok(eval.evaluate(&ft))
}
