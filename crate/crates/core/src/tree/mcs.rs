//! Minimal cut sets by bottom-up expansion into disjunctive normal form.
//!
//! Every gate is turned into a list of products (sets of basic events).
//! Or concatenates, And takes the cross product, and a k-of-n voting gate
//! becomes an Or over the Ands of every k-subset of its inputs. Absorption
//! runs after each gate, so intermediate lists stay minimal.

use itertools::Itertools;
use thiserror::Error;

use super::{FaultTree, GateType, Node, Universe};
use crate::beset::BeSet;

/// Default bound on the number of products any single expansion step may
/// produce before the tree is declared too complex.
pub const DEFAULT_PRODUCT_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum McsError {
    #[error("DNF expansion exceeds {cap} products")]
    TooComplex { cap: usize },
}

/// Pairwise non-subsuming cut sets, sorted by size then lexicographically
/// by their 0/1 vector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct McsSet(Vec<BeSet>);

impl McsSet {
    /// Minimises an arbitrary family of products.
    pub fn from_products(products: Vec<BeSet>) -> Self {
        McsSet(minimize(products))
    }

    pub fn sets(&self) -> &[BeSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_sets(self) -> Vec<BeSet> {
        self.0
    }

    /// See [`Universe::format_family`].
    pub fn format(&self, universe: &Universe) -> String {
        universe.format_family(&self.0)
    }
}

/// Canonical sort, duplicate removal and absorption (drop supersets).
pub(crate) fn minimize(mut products: Vec<BeSet>) -> Vec<BeSet> {
    products.sort_unstable_by_key(|s| (s.len(), s.lex_key()));
    products.dedup();
    let mut kept: Vec<BeSet> = Vec::with_capacity(products.len());
    for p in products {
        if !kept.iter().any(|k| k.is_subset(p)) {
            kept.push(p);
        }
    }
    kept
}

fn and_products(acc: Vec<BeSet>, rhs: &[BeSet], cap: usize) -> Result<Vec<BeSet>, McsError> {
    if acc.len().saturating_mul(rhs.len()) > cap {
        return Err(McsError::TooComplex { cap });
    }
    let mut out = Vec::with_capacity(acc.len() * rhs.len());
    for a in &acc {
        for b in rhs {
            out.push(a.union(*b));
        }
    }
    Ok(minimize(out))
}

fn expand(node: &Node, cap: usize) -> Result<Vec<BeSet>, McsError> {
    let gate = match node {
        Node::Be(i) => return Ok(vec![BeSet::singleton(*i)]),
        Node::Gate(g) => g,
    };
    let children: Vec<Vec<BeSet>> = gate.children.iter().map(|c| expand(c, cap)).collect::<Result<_, _>>()?;
    match gate.kind {
        GateType::Or => {
            let total: usize = children.iter().map(Vec::len).sum();
            if total > cap {
                return Err(McsError::TooComplex { cap });
            }
            Ok(minimize(children.into_iter().flatten().collect()))
        }
        GateType::And => children.iter().try_fold(vec![BeSet::EMPTY], |acc, c| and_products(acc, c, cap)),
        GateType::Vot { k, .. } => {
            let mut out = Vec::new();
            for subset in children.iter().combinations(k) {
                let products = subset.into_iter().try_fold(vec![BeSet::EMPTY], |acc, c| and_products(acc, c, cap))?;
                out.extend(products);
                if out.len() > cap {
                    return Err(McsError::TooComplex { cap });
                }
            }
            Ok(minimize(out))
        }
    }
}

impl FaultTree {
    /// Minimal cut sets with the given product cap.
    pub fn minimal_cut_sets_capped(&self, cap: usize) -> Result<McsSet, McsError> {
        expand(self.root(), cap).map(McsSet)
    }

    pub fn minimal_cut_sets(&self) -> Result<McsSet, McsError> {
        self.minimal_cut_sets_capped(DEFAULT_PRODUCT_CAP)
    }
}
