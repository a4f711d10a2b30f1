//! The seven structural operators: six mutations and subtree crossover.
//!
//! Every operator works on a private clone and returns a tree that passes
//! [`FaultTree::validate`]. Removals prune gates left without children; the
//! root is never removed. Operators report [`OperatorError`] when they
//! cannot apply, and the caller draws another.

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::tree::{FaultTree, Gate, GateType, Node};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum OperatorError {
    #[error("operator does not apply to this tree")]
    Inapplicable,
    #[error("operator would leave the tree without basic events")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutationKind {
    /// New And/Or gate under an existing gate, adopting some of its children.
    GCreate,
    /// Flip And <-> Or.
    GMutate,
    /// Remove a non-root gate with its whole subtree.
    GDelete,
    /// Remove every leaf of one basic event.
    BeDisconnect,
    /// Attach a disconnected basic event under a gate.
    BeConnect,
    /// Move one leaf under a different gate.
    BeSwap,
}

impl MutationKind {
    pub const ALL: [MutationKind; 6] = [
        MutationKind::GCreate,
        MutationKind::GMutate,
        MutationKind::GDelete,
        MutationKind::BeDisconnect,
        MutationKind::BeConnect,
        MutationKind::BeSwap,
    ];
}

/// Operator slots in the order used by weight vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Mutation(MutationKind),
    Crossover,
}

impl Operator {
    pub const ALL: [Operator; 7] = [
        Operator::Mutation(MutationKind::GCreate),
        Operator::Mutation(MutationKind::GMutate),
        Operator::Mutation(MutationKind::GDelete),
        Operator::Mutation(MutationKind::BeDisconnect),
        Operator::Mutation(MutationKind::BeConnect),
        Operator::Mutation(MutationKind::BeSwap),
        Operator::Crossover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operator::Mutation(MutationKind::GCreate) => "g_create",
            Operator::Mutation(MutationKind::GMutate) => "g_mutate",
            Operator::Mutation(MutationKind::GDelete) => "g_delete",
            Operator::Mutation(MutationKind::BeDisconnect) => "be_disconnect",
            Operator::Mutation(MutationKind::BeConnect) => "be_connect",
            Operator::Mutation(MutationKind::BeSwap) => "be_swap",
            Operator::Crossover => "crossover",
        }
    }
}

fn pick<'a, T, R: Rng + ?Sized>(items: &'a [T], rng: &mut R) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

fn random_binary_kind<R: Rng + ?Sized>(rng: &mut R) -> GateType {
    if rng.gen_bool(0.5) {
        GateType::And
    } else {
        GateType::Or
    }
}

fn checked(ft: FaultTree) -> Result<FaultTree, OperatorError> {
    match ft.validate() {
        Ok(()) => Ok(ft),
        Err(_) => Err(OperatorError::Degenerate),
    }
}

pub fn mutate<R: Rng + ?Sized>(ft: &FaultTree, kind: MutationKind, rng: &mut R) -> Result<FaultTree, OperatorError> {
    let mut out = ft.clone();
    match kind {
        MutationKind::GCreate => {
            let gates = out.gate_paths();
            let path = pick(&gates, rng).expect("root is a gate").clone();
            let parent = out.gate_at_mut(&path);
            let n = parent.children.len();
            let take = rng.gen_range(1..=n);
            let mut moved: Vec<usize> = sample(rng, n, take).into_vec();
            moved.sort_unstable();
            let mut adopted: Vec<Node> = moved.iter().rev().map(|&i| parent.remove_child(i)).collect();
            adopted.reverse();
            parent.push_child(Node::Gate(Gate::new(random_binary_kind(rng), adopted)));
        }
        MutationKind::GMutate => {
            let flippable: Vec<_> = out
                .gate_paths()
                .into_iter()
                .filter(|p| matches!(out.node_at(p).as_gate().map(|g| g.kind), Some(GateType::And | GateType::Or)))
                .collect();
            let path = pick(&flippable, rng).ok_or(OperatorError::Inapplicable)?.clone();
            let gate = out.gate_at_mut(&path);
            gate.kind = match gate.kind {
                GateType::And => GateType::Or,
                _ => GateType::And,
            };
        }
        MutationKind::GDelete => {
            let candidates: Vec<_> = out.gate_paths().into_iter().filter(|p| !p.is_empty()).collect();
            let path = pick(&candidates, rng).ok_or(OperatorError::Inapplicable)?.clone();
            if !out.remove_and_prune(&path) {
                return Err(OperatorError::Degenerate);
            }
        }
        MutationKind::BeDisconnect => {
            let connected: Vec<usize> = out.connected().iter().collect();
            if connected.len() < 2 {
                return Err(OperatorError::Inapplicable);
            }
            let be = *pick(&connected, rng).expect("non-empty");
            let doomed: Vec<_> = out.leaf_paths().into_iter().filter(|(_, b)| *b == be).map(|(p, _)| p).collect();
            for p in doomed.iter().rev() {
                if !out.remove_and_prune(p) {
                    return Err(OperatorError::Degenerate);
                }
            }
        }
        MutationKind::BeConnect => {
            let pool: Vec<usize> = out.disconnected().iter().collect();
            let be = *pick(&pool, rng).ok_or(OperatorError::Inapplicable)?;
            let gates = out.gate_paths();
            let path = pick(&gates, rng).expect("root is a gate").clone();
            out.gate_at_mut(&path).push_child(Node::Be(be));
        }
        MutationKind::BeSwap => {
            let leaves = out.leaf_paths();
            let (leaf, be) = pick(&leaves, rng).expect("validated trees have leaves").clone();
            let parent = &leaf[..leaf.len() - 1];
            let targets: Vec<_> = out.gate_paths().into_iter().filter(|p| p.as_slice() != parent).collect();
            let target = pick(&targets, rng).ok_or(OperatorError::Inapplicable)?.clone();
            // Appending never shifts existing paths, so `leaf` stays valid.
            out.gate_at_mut(&target).push_child(Node::Be(be));
            if !out.remove_and_prune(&leaf) {
                return Err(OperatorError::Degenerate);
            }
        }
    }
    checked(out)
}

/// Swaps a random node of `a` with a random node of `b`. A root can only
/// be exchanged for a gate. Root-for-root draws are retried once, after
/// which the parents come back unchanged.
pub fn crossover<R: Rng + ?Sized>(a: &FaultTree, b: &FaultTree, rng: &mut R) -> (FaultTree, FaultTree) {
    assert_eq!(a.universe().names(), b.universe().names(), "crossover needs a shared universe");
    let paths_a = a.node_paths();
    let paths_b = b.node_paths();
    let mut root_draws = 0;
    for _ in 0..16 {
        let pa = pick(&paths_a, rng).expect("non-empty");
        let pb = pick(&paths_b, rng).expect("non-empty");
        let sub_a = a.node_at(pa);
        let sub_b = b.node_at(pb);
        if pa.is_empty() && pb.is_empty() {
            root_draws += 1;
            if root_draws > 1 {
                break;
            }
            continue;
        }
        if (pa.is_empty() && matches!(sub_b, Node::Be(_))) || (pb.is_empty() && matches!(sub_a, Node::Be(_))) {
            continue;
        }
        let child_a = graft(a, pa, sub_b.clone());
        let child_b = graft(b, pb, sub_a.clone());
        if let (Ok(x), Ok(y)) = (checked(child_a), checked(child_b)) {
            return (x, y);
        }
    }
    (a.clone(), b.clone())
}

fn graft(tree: &FaultTree, path: &[usize], replacement: Node) -> FaultTree {
    let mut out = tree.clone();
    if path.is_empty() {
        *out.root_mut() = replacement;
    } else {
        *out.node_at_mut(path) = replacement;
    }
    out
}

/// True when `a` and `b` have the same shape and leaves, gate types aside.
pub fn only_gate_types_differ(a: &FaultTree, b: &FaultTree) -> bool {
    fn same_shape(x: &Node, y: &Node) -> bool {
        match (x, y) {
            (Node::Be(i), Node::Be(j)) => i == j,
            (Node::Gate(g), Node::Gate(h)) => {
                g.children.len() == h.children.len()
                    && g.children.iter().zip(&h.children).all(|(c, d)| same_shape(c, d))
            }
            _ => false,
        }
    }
    same_shape(a.root(), b.root())
}
