//! Random trees and brute-force reference implementations shared by the
//! integration tests. Nothing here calls into the code under test beyond
//! building trees and reading their structure.
#![allow(dead_code)]

use std::sync::Arc;

use ftforge_core::tree::{FaultTree, Gate, GateType, Node, Universe};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn universe(w: usize) -> Arc<Universe> {
    Arc::new(Universe::new((0..w).map(|i| format!("E{i}"))).unwrap())
}

fn random_node(rng: &mut ChaCha8Rng, w: usize, depth: usize, voting: bool) -> Node {
    if depth == 0 || rng.gen_bool(0.45) {
        return Node::Be(rng.gen_range(0..w));
    }
    Node::Gate(random_gate(rng, w, depth - 1, voting))
}

fn random_gate(rng: &mut ChaCha8Rng, w: usize, depth: usize, voting: bool) -> Gate {
    let n = rng.gen_range(1..=4);
    let children: Vec<Node> = (0..n).map(|_| random_node(rng, w, depth, voting)).collect();
    let kind = match rng.gen_range(0..if voting { 3 } else { 2 }) {
        0 => GateType::And,
        1 => GateType::Or,
        _ => GateType::Vot { k: rng.gen_range(1..=n), n },
    };
    Gate::new(kind, children)
}

/// Random tree of depth at most `depth` over `w` events; repeated leaves allowed.
pub fn random_tree(seed: u64, w: usize, depth: usize, voting: bool) -> FaultTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FaultTree::new(universe(w), random_gate(&mut rng, w, depth, voting)).unwrap()
}

/// Direct recursive evaluation on a bool slice.
pub fn eval(node: &Node, x: &[bool]) -> bool {
    match node {
        Node::Be(i) => x[*i],
        Node::Gate(g) => {
            let trues = g.children.iter().filter(|c| eval(c, x)).count();
            match g.kind {
                GateType::And => trues == g.children.len(),
                GateType::Or => trues > 0,
                GateType::Vot { k, .. } => trues >= k,
            }
        }
    }
}

pub fn bits(mask: u32, w: usize) -> Vec<bool> {
    (0..w).map(|i| mask >> i & 1 == 1).collect()
}

/// Minimal true assignments of a monotone function given by its truth
/// table: `S` is minimal when `f(S)` holds and dropping any member breaks it.
/// Returned as sorted member lists, sorted.
pub fn brute_mcs(ft: &FaultTree) -> Vec<Vec<usize>> {
    let w = ft.universe().len();
    let f = |m: u32| eval(ft.root(), &bits(m, w));
    let mut out: Vec<Vec<usize>> = (0u32..1 << w)
        .filter(|&m| f(m) && (0..w).filter(|i| m >> i & 1 == 1).all(|i| !f(m & !(1 << i))))
        .map(|m| (0..w).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    out.sort();
    out
}

pub fn sorted_sets<I: IntoIterator<Item = ftforge_core::BeSet>>(sets: I) -> Vec<Vec<usize>> {
    let mut v: Vec<Vec<usize>> = sets.into_iter().map(|s| s.iter().collect()).collect();
    v.sort();
    v
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            c[i][j] = (0..k).map(|t| a[i][t] * b[t][j]).sum();
        }
    }
    c
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

fn trace(a: &[Vec<f64>]) -> f64 {
    (0..a.len()).map(|i| a[i][i]).sum()
}

/// `1 - tr(D Fᵀ F Dᵀ) / sqrt(tr((D Dᵀ)²) tr((F Fᵀ)²))` with dense row-space products.
pub fn dense_phi_c(d: &[Vec<u8>], f: &[Vec<u8>]) -> f64 {
    let d: Vec<Vec<f64>> = d.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let f: Vec<Vec<f64>> = f.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    let dt = transpose(&d);
    let ft = transpose(&f);
    let num = trace(&matmul(&matmul(&matmul(&d, &ft), &f), &dt));
    let ddt = matmul(&d, &dt);
    let fft = matmul(&f, &ft);
    let den = (trace(&matmul(&ddt, &ddt)) * trace(&matmul(&fft, &fft))).sqrt();
    1.0 - num / den
}

/// Count-weighted mismatch fraction by scalar row loop.
pub fn scalar_phi_d(ft: &FaultTree, ds: &ftforge_core::FailureDataset) -> f64 {
    let w = ds.width();
    let mut wrong = 0u64;
    let mut total = 0u64;
    for r in ds.rows() {
        let x: Vec<bool> = (0..w).map(|i| r.bits.contains(i)).collect();
        if eval(ft.root(), &x) != r.te {
            wrong += r.count;
        }
        total += r.count;
    }
    wrong as f64 / total as f64
}
