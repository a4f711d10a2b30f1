//! Static fault-tree model: gates over a fixed universe of basic events.
//!
//! The genotype is a rooted tree. A basic event may appear as several leaves,
//! which is how shared events are expressed without a DAG. Basic events of
//! the universe that no leaf references form the disconnected pool.

mod mcs;
mod text;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::beset::{BeSet, MAX_BES};

pub use mcs::{McsError, McsSet, DEFAULT_PRODUCT_CAP};
pub use text::{parse_ft, serialize_ft, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("gate has no children")]
    EmptyGate,
    #[error("voting gate {k}of{n} has {actual} children")]
    VotArity { k: usize, n: usize, actual: usize },
    #[error("invalid voting threshold {k}of{n}")]
    VotThreshold { k: usize, n: usize },
    #[error("root must be a gate")]
    RootIsLeaf,
    #[error("tree has no basic-event leaves")]
    NoLeaves,
    #[error("leaf references basic event #{0} outside the universe")]
    UnknownBe(usize),
    #[error("basic event `{0}` is not part of the universe")]
    UnknownName(String),
    #[error("assignment is missing basic event `{0}`")]
    MissingAssignment(String),
    #[error("universe has {0} basic events, at most {MAX_BES} are supported")]
    UniverseTooLarge(usize),
    #[error("duplicate basic event `{0}` in universe")]
    DuplicateName(String),
}

/// Ordered list of basic-event names shared by a tree and its dataset.
#[derive(Clone, PartialEq, Eq)]
pub struct Universe {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Universe {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, TreeError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_BES {
            return Err(TreeError::UniverseTooLarge(names.len()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(TreeError::DuplicateName(n.clone()));
            }
        }
        Ok(Universe { names, index })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    /// Renders a set as `{A, B}` in universe order.
    pub fn format_set(&self, set: BeSet) -> String {
        let parts: Vec<&str> = set.iter().map(|i| self.name(i)).collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Renders a family of sets as `{A, B}; {C}`, smallest sets first and
    /// equal sizes by ascending member list.
    pub fn format_family(&self, sets: &[BeSet]) -> String {
        let mut sorted = sets.to_vec();
        sorted.sort_by_key(|s| (s.len(), std::cmp::Reverse(s.lex_key())));
        sorted.iter().map(|s| self.format_set(*s)).collect::<Vec<_>>().join("; ")
    }
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.names).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateType {
    And,
    Or,
    /// True when at least `k` of the `n` inputs are true.
    Vot {
        k: usize,
        n: usize,
    },
}

impl GateType {
    pub fn keyword(&self) -> String {
        match self {
            GateType::And => "and".to_string(),
            GateType::Or => "or".to_string(),
            GateType::Vot { k, n } => format!("{k}of{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Gate(Gate),
    /// Leaf referencing a universe position.
    Be(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateType,
    pub children: Vec<Node>,
    /// Name carried through the text format; generated gates have none.
    pub label: Option<String>,
}

impl Gate {
    pub fn new(kind: GateType, children: Vec<Node>) -> Self {
        Gate { kind, children, label: None }
    }

    pub fn labeled(kind: GateType, children: Vec<Node>, label: impl Into<String>) -> Self {
        Gate { kind, children, label: Some(label.into()) }
    }

    /// Appends a child, widening a voting gate so its arity stays consistent.
    pub fn push_child(&mut self, child: Node) {
        self.children.push(child);
        if let GateType::Vot { n, .. } = &mut self.kind {
            *n += 1;
        }
    }

    /// Removes a child, narrowing a voting gate and clamping its threshold.
    pub fn remove_child(&mut self, index: usize) -> Node {
        let child = self.children.remove(index);
        if let GateType::Vot { k, n } = &mut self.kind {
            *n -= 1;
            *k = (*k).min(*n).max(1);
        }
        child
    }
}

impl Node {
    pub fn as_gate(&self) -> Option<&Gate> {
        match self {
            Node::Gate(g) => Some(g),
            Node::Be(_) => None,
        }
    }

    pub fn as_gate_mut(&mut self) -> Option<&mut Gate> {
        match self {
            Node::Gate(g) => Some(g),
            Node::Be(_) => None,
        }
    }

    fn count(&self, gates: &mut usize, leaves: &mut usize) {
        match self {
            Node::Be(_) => *leaves += 1,
            Node::Gate(g) => {
                *gates += 1;
                for c in &g.children {
                    c.count(gates, leaves);
                }
            }
        }
    }

    fn eval_bits(&self, assignment: BeSet) -> bool {
        match self {
            Node::Be(i) => assignment.contains(*i),
            Node::Gate(g) => match g.kind {
                GateType::And => g.children.iter().all(|c| c.eval_bits(assignment)),
                GateType::Or => g.children.iter().any(|c| c.eval_bits(assignment)),
                GateType::Vot { k, .. } => g.children.iter().filter(|c| c.eval_bits(assignment)).count() >= k,
            },
        }
    }

    fn collect_leaves(&self, set: &mut BeSet) {
        match self {
            Node::Be(i) => set.insert(*i),
            Node::Gate(g) => g.children.iter().for_each(|c| c.collect_leaves(set)),
        }
    }

    fn encode(&self, universe: &Universe, out: &mut String) {
        match self {
            Node::Be(i) => out.push_str(universe.name(*i)),
            Node::Gate(g) => {
                let mut parts: Vec<String> = g
                    .children
                    .iter()
                    .map(|c| {
                        let mut s = String::new();
                        c.encode(universe, &mut s);
                        s
                    })
                    .collect();
                parts.sort_unstable();
                out.push_str(&g.kind.keyword());
                out.push('(');
                out.push_str(&parts.join(","));
                out.push(')');
            }
        }
    }

    fn validate(&self, universe_len: usize) -> Result<(), TreeError> {
        match self {
            Node::Be(i) if *i >= universe_len => Err(TreeError::UnknownBe(*i)),
            Node::Be(_) => Ok(()),
            Node::Gate(g) => {
                if g.children.is_empty() {
                    return Err(TreeError::EmptyGate);
                }
                if let GateType::Vot { k, n } = g.kind {
                    if k == 0 || k > n {
                        return Err(TreeError::VotThreshold { k, n });
                    }
                    if n != g.children.len() {
                        return Err(TreeError::VotArity { k, n, actual: g.children.len() });
                    }
                }
                g.children.iter().try_for_each(|c| c.validate(universe_len))
            }
        }
    }

    fn same_structure(&self, other: &Node) -> bool {
        match (self, other) {
            (Node::Be(a), Node::Be(b)) => a == b,
            (Node::Gate(a), Node::Gate(b)) => {
                a.kind == b.kind
                    && a.children.len() == b.children.len()
                    && a.children.iter().zip(&b.children).all(|(x, y)| x.same_structure(y))
            }
            _ => false,
        }
    }
}

/// Position of a node as child indices from the root.
pub type NodePath = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultTree {
    universe: Arc<Universe>,
    root: Node,
}

impl FaultTree {
    /// Builds a tree after checking every structural invariant.
    pub fn new(universe: Arc<Universe>, root: Gate) -> Result<Self, TreeError> {
        Self::from_node(universe, Node::Gate(root))
    }

    pub fn from_node(universe: Arc<Universe>, root: Node) -> Result<Self, TreeError> {
        let tree = FaultTree { universe, root };
        tree.validate()?;
        Ok(tree)
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        if !matches!(self.root, Node::Gate(_)) {
            return Err(TreeError::RootIsLeaf);
        }
        self.root.validate(self.universe.len())?;
        if self.connected().is_empty() {
            return Err(TreeError::NoLeaves);
        }
        Ok(())
    }

    /// Gate over every basic event of the universe, in universe order.
    pub fn flat(universe: Arc<Universe>, kind: GateType) -> Result<Self, TreeError> {
        let children = (0..universe.len()).map(Node::Be).collect();
        Self::new(universe, Gate::new(kind, children))
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.universe
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn root_gate(&self) -> &Gate {
        self.root.as_gate().expect("validated root is a gate")
    }

    pub(crate) fn root_mut(&mut self) -> &mut Node {
        &mut self.root
    }

    /// Top-event value for an assignment given as a set of failed events.
    pub fn evaluate_bits(&self, failed: BeSet) -> bool {
        self.root.eval_bits(failed)
    }

    /// Top-event value for a named assignment covering the whole universe.
    pub fn evaluate(&self, assignment: &HashMap<String, bool>) -> Result<bool, TreeError> {
        let mut failed = BeSet::EMPTY;
        for (i, name) in self.universe.names().iter().enumerate() {
            match assignment.get(name) {
                Some(true) => failed.insert(i),
                Some(false) => {}
                None => return Err(TreeError::MissingAssignment(name.clone())),
            }
        }
        Ok(self.evaluate_bits(failed))
    }

    pub fn gate_count(&self) -> usize {
        let (mut g, mut l) = (0, 0);
        self.root.count(&mut g, &mut l);
        g
    }

    pub fn leaf_count(&self) -> usize {
        let (mut g, mut l) = (0, 0);
        self.root.count(&mut g, &mut l);
        l
    }

    /// Tree size: gates plus leaf occurrences.
    pub fn phi_s(&self) -> usize {
        let (mut g, mut l) = (0, 0);
        self.root.count(&mut g, &mut l);
        g + l
    }

    /// Distinct basic events referenced by at least one leaf.
    pub fn connected(&self) -> BeSet {
        let mut set = BeSet::EMPTY;
        self.root.collect_leaves(&mut set);
        set
    }

    pub fn connected_unique_bes(&self) -> Vec<&str> {
        self.connected().iter().map(|i| self.universe.name(i)).collect()
    }

    pub fn disconnected(&self) -> BeSet {
        BeSet(BeSet::full(self.universe.len()).0 & !self.connected().0)
    }

    /// Order-independent structural encoding; siblings are sorted by their
    /// own encodings, gate labels are ignored.
    pub fn canonical_encoding(&self) -> String {
        let mut out = String::new();
        self.root.encode(&self.universe, &mut out);
        out
    }

    /// Equality of gate types, child order and leaves, ignoring gate labels.
    pub fn same_structure(&self, other: &FaultTree) -> bool {
        self.universe.names() == other.universe.names() && self.root.same_structure(&other.root)
    }

    /// Returns the same structure over another universe, mapping leaves by
    /// name. Fails when a connected event is absent from `target`.
    pub fn rebase(&self, target: Arc<Universe>) -> Result<FaultTree, TreeError> {
        fn map(node: &Node, from: &Universe, to: &Universe) -> Result<Node, TreeError> {
            Ok(match node {
                Node::Be(i) => {
                    let name = from.name(*i);
                    Node::Be(to.index_of(name).ok_or_else(|| TreeError::UnknownName(name.to_string()))?)
                }
                Node::Gate(g) => Node::Gate(Gate {
                    kind: g.kind,
                    label: g.label.clone(),
                    children: g.children.iter().map(|c| map(c, from, to)).collect::<Result<_, _>>()?,
                }),
            })
        }
        let root = map(&self.root, &self.universe, &target)?;
        FaultTree::from_node(target, root)
    }

    /// Paths of every node in preorder, root first.
    pub fn node_paths(&self) -> Vec<NodePath> {
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut |p, _| out.push(p.to_vec()));
        out
    }

    /// Paths of every gate in preorder.
    pub fn gate_paths(&self) -> Vec<NodePath> {
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut |p, n| {
            if matches!(n, Node::Gate(_)) {
                out.push(p.to_vec())
            }
        });
        out
    }

    /// Paths of every leaf with the event it references.
    pub fn leaf_paths(&self) -> Vec<(NodePath, usize)> {
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut |p, n| {
            if let Node::Be(i) = n {
                out.push((p.to_vec(), *i))
            }
        });
        out
    }

    pub fn node_at(&self, path: &[usize]) -> &Node {
        path.iter().fold(&self.root, |node, &i| match node {
            Node::Gate(g) => &g.children[i],
            Node::Be(_) => panic!("path descends through a leaf"),
        })
    }

    pub(crate) fn node_at_mut(&mut self, path: &[usize]) -> &mut Node {
        path.iter().fold(&mut self.root, |node, &i| match node {
            Node::Gate(g) => &mut g.children[i],
            Node::Be(_) => panic!("path descends through a leaf"),
        })
    }

    pub(crate) fn gate_at_mut(&mut self, path: &[usize]) -> &mut Gate {
        self.node_at_mut(path).as_gate_mut().expect("path points at a gate")
    }

    /// Detaches the node at a non-root `path`, then removes any ancestor gate
    /// left without children. Returns false when the removal cascades to the
    /// root, in which case the tree is left empty and must be discarded.
    pub(crate) fn remove_and_prune(&mut self, path: &[usize]) -> bool {
        assert!(!path.is_empty(), "cannot detach the root");
        let mut depth = path.len();
        loop {
            let (parent_path, idx) = (&path[..depth - 1], path[depth - 1]);
            let parent = self.gate_at_mut(parent_path);
            parent.remove_child(idx);
            if !parent.children.is_empty() {
                return true;
            }
            if parent_path.is_empty() {
                return false;
            }
            depth -= 1;
        }
    }
}

fn walk<F: FnMut(&[usize], &Node)>(node: &Node, path: &mut Vec<usize>, f: &mut F) {
    f(path, node);
    if let Node::Gate(g) = node {
        for (i, c) in g.children.iter().enumerate() {
            path.push(i);
            walk(c, path, f);
            path.pop();
        }
    }
}

impl fmt::Display for FaultTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_ft(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab_universe() -> Arc<Universe> {
        Arc::new(Universe::new(["A", "B", "C"]).unwrap())
    }

    #[test]
    fn size_counts_leaf_occurrences() {
        let u = ab_universe();
        let t = FaultTree::new(u.clone(), Gate::new(GateType::And, vec![Node::Be(0), Node::Be(1)])).unwrap();
        assert_eq!(t.phi_s(), 3);
        let rep = FaultTree::new(u, Gate::new(GateType::And, vec![Node::Be(0), Node::Be(1), Node::Be(0)])).unwrap();
        assert_eq!(rep.phi_s(), 4);
        assert_eq!(rep.connected_unique_bes(), vec!["A", "B"]);
        assert_eq!(rep.disconnected(), BeSet::singleton(2));
    }

    #[test]
    fn invariants_are_enforced() {
        let u = ab_universe();
        assert_eq!(FaultTree::new(u.clone(), Gate::new(GateType::And, vec![])), Err(TreeError::EmptyGate));
        assert_eq!(
            FaultTree::new(u.clone(), Gate::new(GateType::Vot { k: 2, n: 3 }, vec![Node::Be(0), Node::Be(1)])),
            Err(TreeError::VotArity { k: 2, n: 3, actual: 2 })
        );
        assert_eq!(
            FaultTree::new(u.clone(), Gate::new(GateType::Vot { k: 0, n: 1 }, vec![Node::Be(0)])),
            Err(TreeError::VotThreshold { k: 0, n: 1 })
        );
        assert_eq!(FaultTree::new(u, Gate::new(GateType::Or, vec![Node::Be(7)])), Err(TreeError::UnknownBe(7)));
    }

    #[test]
    fn named_evaluation_requires_every_event() {
        let u = ab_universe();
        let t = FaultTree::new(u, Gate::new(GateType::Or, vec![Node::Be(0), Node::Be(1)])).unwrap();
        let mut a: HashMap<String, bool> = [("A", false), ("B", true)].map(|(k, v)| (k.to_string(), v)).into();
        assert_eq!(t.evaluate(&a), Err(TreeError::MissingAssignment("C".into())));
        a.insert("C".into(), false);
        assert_eq!(t.evaluate(&a), Ok(true));
    }

    #[test]
    fn encoding_ignores_sibling_order() {
        let u = ab_universe();
        let and = |a, b| FaultTree::new(u.clone(), Gate::new(GateType::And, vec![Node::Be(a), Node::Be(b)])).unwrap();
        assert_eq!(and(1, 0).canonical_encoding(), and(0, 1).canonical_encoding());
        let or = FaultTree::new(u.clone(), Gate::new(GateType::Or, vec![Node::Be(0), Node::Be(1)])).unwrap();
        assert_ne!(or.canonical_encoding(), and(0, 1).canonical_encoding());

        let inner = || Node::Gate(Gate::new(GateType::And, vec![Node::Be(0), Node::Be(1)]));
        let x = FaultTree::new(u.clone(), Gate::new(GateType::Or, vec![inner(), Node::Be(2)])).unwrap();
        let y = FaultTree::new(u, Gate::new(GateType::Or, vec![Node::Be(2), inner()])).unwrap();
        assert_eq!(x.canonical_encoding(), y.canonical_encoding());
        assert_eq!(x.canonical_encoding(), "or(C,and(A,B))");
    }

    #[test]
    fn prune_cascades_through_single_child_chain() {
        let u = ab_universe();
        let chain = Node::Gate(Gate::new(GateType::And, vec![Node::Gate(Gate::new(GateType::Or, vec![Node::Be(0)]))]));
        let mut t = FaultTree::new(u, Gate::new(GateType::Or, vec![chain, Node::Be(1)])).unwrap();
        assert!(t.remove_and_prune(&[0, 0, 0]));
        assert_eq!(t.canonical_encoding(), "or(B)");
        assert!(!t.remove_and_prune(&[0]));
    }

    #[test]
    fn voting_gate_tracks_arity() {
        let mut g = Gate::new(GateType::Vot { k: 2, n: 2 }, vec![Node::Be(0), Node::Be(1)]);
        g.remove_child(0);
        assert_eq!(g.kind, GateType::Vot { k: 1, n: 1 });
        g.push_child(Node::Be(2));
        assert_eq!(g.kind, GateType::Vot { k: 1, n: 2 });
    }

    #[test]
    fn rebase_maps_by_name() {
        let u = ab_universe();
        let t = FaultTree::new(u, Gate::new(GateType::And, vec![Node::Be(0), Node::Be(2)])).unwrap();
        let target = Arc::new(Universe::new(["C", "A"]).unwrap());
        let r = t.rebase(target.clone()).unwrap();
        assert_eq!(r.connected(), BeSet::full(2));
        assert_eq!(r.canonical_encoding(), t.canonical_encoding());
        let missing = Arc::new(Universe::new(["A"]).unwrap());
        assert_eq!(t.rebase(missing), Err(TreeError::UnknownName("C".into())));
    }
}
