//! Galileo-style line format.
//!
//! ```text
//! basicevents TAPE BASIC M2M PLUG C1 C2 C3;
//! toplevel TE;
//! TE or CCF IND;
//! CCF and TAPE BASIC;
//! IND and M2M PLUG VSEAL;
//! VSEAL 2of3 C1 C2 C3;
//! ```
//!
//! Statements end with `;`, `#` starts a comment. Without a `basicevents`
//! declaration every name that is not a gate is a basic event, and the
//! universe follows first appearance.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{FaultTree, Gate, GateType, Node, TreeError, Universe};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{at}: syntax error: {msg}")]
    Syntax { at: Position, msg: String },
    #[error("missing toplevel statement")]
    MissingToplevel,
    #[error("{at}: duplicate toplevel statement")]
    DuplicateToplevel { at: Position },
    #[error("{at}: unknown node `{name}`")]
    UnknownNode { at: Position, name: String },
    #[error("{at}: gate `{name}` is defined twice")]
    DuplicateGate { at: Position, name: String },
    #[error("{at}: `{name}` is declared as a basic event and defined as a gate")]
    GateShadowsEvent { at: Position, name: String },
    #[error("{at}: cycle through gate `{name}`")]
    Cycle { at: Position, name: String },
    #[error("{at}: gate `{name}` has no inputs")]
    EmptyGate { at: Position, name: String },
    #[error("{at}: gate `{name}` is {k}of{n} but lists {actual} inputs")]
    VotArity { at: Position, name: String, k: usize, n: usize, actual: usize },
    #[error("{at}: gate `{name}` is not reachable from the top event")]
    Unreachable { at: Position, name: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

struct Token<'a> {
    text: &'a str,
    at: Position,
}

fn statements(src: &str) -> Result<Vec<Vec<Token<'_>>>, ParseError> {
    let mut out = Vec::new();
    let mut current: Vec<Token<'_>> = Vec::new();
    for (li, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut rest = line;
        let mut offset = 0;
        loop {
            let trimmed = rest.trim_start();
            offset += rest.len() - trimmed.len();
            rest = trimmed;
            if rest.is_empty() {
                break;
            }
            let at = Position { line: li + 1, column: offset + 1 };
            if let Some(stripped) = rest.strip_prefix(';') {
                if current.is_empty() {
                    return Err(ParseError::Syntax { at, msg: "empty statement".into() });
                }
                out.push(std::mem::take(&mut current));
                rest = stripped;
                offset += 1;
                continue;
            }
            let end = rest.find(|c: char| c.is_whitespace() || c == ';').unwrap_or(rest.len());
            let mut text = &rest[..end];
            if text.len() >= 2 && text.starts_with('"') && text.ends_with('"') {
                text = &text[1..text.len() - 1];
            }
            current.push(Token { text, at });
            rest = &rest[end..];
            offset += end;
        }
    }
    if let Some(tok) = current.first() {
        return Err(ParseError::Syntax {
            at: tok.at.clone(),
            msg: format!("statement `{}` lacks a terminating `;`", tok.text),
        });
    }
    Ok(out)
}

fn gate_type(word: &str) -> Option<GateType> {
    match word.to_ascii_lowercase().as_str() {
        "and" => Some(GateType::And),
        "or" => Some(GateType::Or),
        w => {
            let (k, n) = w.split_once("of")?;
            Some(GateType::Vot { k: k.parse().ok()?, n: n.parse().ok()? })
        }
    }
}

struct GateDef<'a> {
    kind: GateType,
    children: Vec<Token<'a>>,
    at: Position,
}

pub fn parse_ft(src: &str) -> Result<FaultTree, ParseError> {
    let mut declared: Option<Vec<&str>> = None;
    let mut toplevel: Option<Token<'_>> = None;
    let mut gates: HashMap<&str, GateDef<'_>> = HashMap::new();
    let mut gate_order: Vec<&str> = Vec::new();

    for stmt in statements(src)? {
        let mut it = stmt.into_iter();
        let head = it.next().expect("statements are non-empty");
        match head.text.to_ascii_lowercase().as_str() {
            "toplevel" => {
                let name = it.next().ok_or_else(|| ParseError::Syntax {
                    at: head.at.clone(),
                    msg: "toplevel needs a gate name".into(),
                })?;
                if let Some(extra) = it.next() {
                    return Err(ParseError::Syntax { at: extra.at, msg: "toplevel takes one name".into() });
                }
                if toplevel.is_some() {
                    return Err(ParseError::DuplicateToplevel { at: head.at });
                }
                toplevel = Some(name);
            }
            "basicevents" => {
                if declared.is_some() {
                    return Err(ParseError::Syntax { at: head.at, msg: "basicevents declared twice".into() });
                }
                declared = Some(it.map(|t| t.text).collect());
            }
            _ => {
                let kind_tok = it.next().ok_or_else(|| ParseError::Syntax {
                    at: head.at.clone(),
                    msg: format!("expected a gate type after `{}`", head.text),
                })?;
                let kind = gate_type(kind_tok.text).ok_or_else(|| ParseError::Syntax {
                    at: kind_tok.at.clone(),
                    msg: format!("unknown gate type `{}`", kind_tok.text),
                })?;
                let children: Vec<Token<'_>> = it.collect();
                if children.is_empty() {
                    return Err(ParseError::EmptyGate { at: head.at, name: head.text.to_string() });
                }
                if let GateType::Vot { k, n } = kind {
                    if k == 0 || k > n {
                        return Err(ParseError::Syntax { at: kind_tok.at, msg: format!("invalid threshold {k}of{n}") });
                    }
                    if n != children.len() {
                        return Err(ParseError::VotArity {
                            at: head.at,
                            name: head.text.to_string(),
                            k,
                            n,
                            actual: children.len(),
                        });
                    }
                }
                if gates.contains_key(head.text) {
                    return Err(ParseError::DuplicateGate { at: head.at, name: head.text.to_string() });
                }
                gate_order.push(head.text);
                gates.insert(head.text, GateDef { kind, children, at: head.at });
            }
        }
    }

    let top = toplevel.ok_or(ParseError::MissingToplevel)?;
    if !gates.contains_key(top.text) {
        return Err(ParseError::UnknownNode { at: top.at, name: top.text.to_string() });
    }

    let universe = match &declared {
        Some(names) => {
            for g in &gate_order {
                if names.contains(g) {
                    return Err(ParseError::GateShadowsEvent { at: gates[g].at.clone(), name: g.to_string() });
                }
            }
            Universe::new(names.iter().copied())?
        }
        None => {
            let mut seen = HashSet::new();
            let mut names = Vec::new();
            for g in &gate_order {
                for c in &gates[g].children {
                    if !gates.contains_key(c.text) && seen.insert(c.text) {
                        names.push(c.text);
                    }
                }
            }
            Universe::new(names)?
        }
    };

    struct Builder<'s, 'a> {
        gates: &'s HashMap<&'a str, GateDef<'a>>,
        universe: &'s Universe,
        stack: Vec<&'a str>,
        used: HashSet<&'a str>,
    }

    impl<'s, 'a> Builder<'s, 'a> {
        fn gate(&mut self, name: &'a str, at: &Position) -> Result<Node, ParseError> {
            if self.stack.contains(&name) {
                return Err(ParseError::Cycle { at: at.clone(), name: name.to_string() });
            }
            self.stack.push(name);
            self.used.insert(name);
            let def = &self.gates[name];
            let mut children = Vec::with_capacity(def.children.len());
            for c in &def.children {
                let node = if self.gates.contains_key(c.text) {
                    self.gate(c.text, &c.at)?
                } else if let Some(i) = self.universe.index_of(c.text) {
                    Node::Be(i)
                } else {
                    return Err(ParseError::UnknownNode { at: c.at.clone(), name: c.text.to_string() });
                };
                children.push(node);
            }
            self.stack.pop();
            Ok(Node::Gate(Gate::labeled(def.kind, children, name)))
        }
    }

    let mut b = Builder { gates: &gates, universe: &universe, stack: Vec::new(), used: HashSet::new() };
    let root = b.gate(top.text, &top.at)?;
    if let Some(g) = gate_order.iter().find(|g| !b.used.contains(*g)) {
        return Err(ParseError::Unreachable { at: gates[g].at.clone(), name: g.to_string() });
    }
    Ok(FaultTree::from_node(Arc::new(universe), root)?)
}

/// Writes the tree in the line format. Gates without a label, or whose
/// label is already taken, receive a fresh `G<n>` name. The `basicevents`
/// line is written only when first appearance would not reproduce the
/// universe, e.g. when some events are disconnected.
pub fn serialize_ft(ft: &FaultTree) -> String {
    let universe = ft.universe();
    let mut taken: HashSet<String> = universe.names().iter().cloned().collect();
    let mut counter = 0usize;
    let mut fresh = |taken: &mut HashSet<String>| loop {
        counter += 1;
        let candidate = format!("G{counter}");
        if taken.insert(candidate.clone()) {
            break candidate;
        }
    };

    // Preorder naming, then one line per gate in the same order.
    let mut lines: Vec<(String, &Gate)> = Vec::new();
    let mut names_of: Vec<Vec<String>> = Vec::new();
    let mut queue: Vec<&Gate> = vec![ft.root_gate()];
    let mut gate_names: Vec<String> = Vec::new();
    let root_name = match &ft.root_gate().label {
        Some(l) if taken.insert(l.clone()) => l.clone(),
        _ if taken.insert("TE".to_string()) => "TE".to_string(),
        _ => fresh(&mut taken),
    };
    gate_names.push(root_name);
    while let Some(g) = queue.pop() {
        let name = gate_names.pop().expect("one name per queued gate");
        let mut child_names = Vec::with_capacity(g.children.len());
        let mut pending: Vec<(&Gate, String)> = Vec::new();
        for c in &g.children {
            match c {
                Node::Be(i) => child_names.push(universe.name(*i).to_string()),
                Node::Gate(cg) => {
                    let n = match &cg.label {
                        Some(l) if taken.insert(l.clone()) => l.clone(),
                        _ => fresh(&mut taken),
                    };
                    child_names.push(n.clone());
                    pending.push((cg, n));
                }
            }
        }
        lines.push((name, g));
        names_of.push(child_names);
        for (cg, n) in pending.into_iter().rev() {
            queue.push(cg);
            gate_names.push(n);
        }
    }

    let mut seen: Vec<&str> = Vec::with_capacity(universe.len());
    for n in names_of.iter().flatten() {
        if universe.index_of(n).is_some() && !seen.contains(&n.as_str()) {
            seen.push(n);
        }
    }
    let mut out = Vec::with_capacity(lines.len() + 2);
    if !seen.iter().copied().eq(universe.names().iter().map(String::as_str)) {
        out.push(format!("basicevents {};", universe.names().join(" ")));
    }
    out.push(format!("toplevel {};", lines[0].0));
    for (i, (name, g)) in lines.iter().enumerate() {
        out.push(format!("{} {} {};", name, g.kind.keyword(), names_of[i].join(" ")));
    }
    out.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSD: &str = "basicevents TAPE BASIC M2M PLUG C1 C2 C3;
toplevel TE;
TE or CCF IND;
CCF and TAPE BASIC;
IND and M2M PLUG VSEAL;
VSEAL 2of3 C1 C2 C3;";

    #[test]
    fn smallest_tree() {
        let t = parse_ft("toplevel TE; TE and A B;").unwrap();
        assert_eq!(t.universe().names(), ["A", "B"]);
        assert_eq!(t.canonical_encoding(), "and(A,B)");
        assert_eq!(serialize_ft(&t), "toplevel TE;\nTE and A B;");
    }

    #[test]
    fn csd_parses_and_round_trips() {
        let t = parse_ft(CSD).unwrap();
        assert_eq!(t.gate_count(), 4);
        assert_eq!(t.leaf_count(), 7);
        assert_eq!(serialize_ft(&t), CSD.split_once('\n').unwrap().1);
        assert_eq!(parse_ft(&serialize_ft(&t)).unwrap(), t);
    }

    #[test]
    fn disconnected_events_are_declared() {
        let t = parse_ft("basicevents A B C; toplevel TE; TE and A B;").unwrap();
        let s = serialize_ft(&t);
        assert!(s.starts_with("basicevents A B C;"));
        assert!(!s.lines().skip(1).any(|l| l.contains('C')));
        assert_eq!(parse_ft(&s).unwrap(), t);
    }

    #[test]
    fn comments_and_quotes() {
        let t = parse_ft("# header\ntoplevel \"T\"; # top\n\"T\" or \"x\" y;\n").unwrap();
        assert_eq!(t.universe().names(), ["x", "y"]);
    }

    #[test]
    fn generated_gates_get_fresh_names() {
        let t = parse_ft("toplevel TE; TE and G1 X; G1 or A B;").unwrap();
        let mut root = t.root_gate().clone();
        root.label = None;
        if let Node::Gate(g) = &mut root.children[0] {
            g.label = None;
        }
        let unlabeled = FaultTree::new(t.universe().clone(), root).unwrap();
        let s = serialize_ft(&unlabeled);
        assert_eq!(s, "toplevel TE;\nTE and G1 X;\nG1 or A B;");
        assert!(parse_ft(&s).unwrap().same_structure(&unlabeled));
    }

    #[test]
    fn errors() {
        assert_eq!(parse_ft("TE and A B;"), Err(ParseError::MissingToplevel));
        assert!(matches!(parse_ft("toplevel TE; TE and;"), Err(ParseError::EmptyGate { .. })));
        assert!(matches!(
            parse_ft("toplevel TE; TE 2of3 A B;"),
            Err(ParseError::VotArity { k: 2, n: 3, actual: 2, .. })
        ));
        assert!(matches!(parse_ft("toplevel TE; TE and A G; G or TE B;"), Err(ParseError::Cycle { .. })));
        assert!(matches!(parse_ft("basicevents A; toplevel TE; TE and A B;"), Err(ParseError::UnknownNode { .. })));
        assert!(matches!(parse_ft("toplevel TE; TE xor A B;"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_ft("toplevel TE; TE and A B"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_ft("toplevel TE; TE and A; X or B;"), Err(ParseError::Unreachable { .. })));
        assert!(matches!(parse_ft("toplevel TE; TE and A; TE or B;"), Err(ParseError::DuplicateGate { .. })));
        match parse_ft("toplevel TE;\nTE and A;\n  X xor B;") {
            Err(ParseError::Syntax { at, .. }) => assert_eq!(at, Position { line: 3, column: 5 }),
            other => panic!("{other:?}"),
        }
    }
}
