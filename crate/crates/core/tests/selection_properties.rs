use ftforge_core::cases::csd;
use ftforge_core::metrics::{MofSetup, ObjectiveVector};
use ftforge_core::moea::{
    best_individual, crowding_distances, nondominated_fronts, run, select_next, Individual, MoeaConfig,
};
use ftforge_core::tree::{FaultTree, Gate, GateType, Node};
use proptest::prelude::*;

/// Rank by peeling: a point's front is one past the deepest front of any
/// point dominating it.
fn oracle_fronts(v: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let dom = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y);
    let mut remaining: Vec<usize> = (0..v.len()).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> =
            remaining.iter().copied().filter(|&i| !remaining.iter().any(|&j| dom(&v[j], &v[i]))).collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=3)
        .prop_flat_map(move |m| prop::collection::vec(prop::collection::vec(0u8..6, m), 1..=max_n))
        .prop_map(|v| v.into_iter().map(|p| p.into_iter().map(f64::from).collect()).collect())
}

/// Fake scores on a tree whose encoding is unique to `id`.
fn individual(id: u64, phi_s: usize, phi_d: f64, phi_c: f64) -> Individual {
    let u = ftforge_core::tree::Universe::new(["A"]).unwrap();
    let leaves = (0..=id).map(|_| Node::Be(0)).collect();
    let ft = FaultTree::new(std::sync::Arc::new(u), Gate::new(GateType::Or, leaves)).unwrap();
    let mut ind =
        Individual::new(ft, ObjectiveVector { phi_s, phi_d, phi_c, setup: MofSetup::Sdc, mcs_overflow: false });
    ind.size = phi_s;
    ind
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fronts_match_peeling_oracle(v in points(64)) {
        prop_assert_eq!(nondominated_fronts(&v), oracle_fronts(&v));
    }

    #[test]
    fn crowding_boundaries_are_infinite(v in points(20)) {
        let d = crowding_distances(&v);
        for obj in 0..v[0].len() {
            let lo = v.iter().map(|p| p[obj]).fold(f64::INFINITY, f64::min);
            let hi = v.iter().map(|p| p[obj]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v.iter().zip(&d).any(|(p, &di)| p[obj] == lo && di == f64::INFINITY));
            prop_assert!(v.iter().zip(&d).any(|(p, &di)| p[obj] == hi && di == f64::INFINITY));
        }
        prop_assert!(d.iter().all(|&x| x >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn selection_size_and_elitism(
        objs in prop::collection::vec((1usize..30, 0u8..10, 0u8..10), 1..60),
        ps in 2usize..40,
    ) {
        let pool: Vec<Individual> = objs
            .iter()
            .enumerate()
            .map(|(i, &(s, d, c))| individual(i as u64, s, d as f64 / 10.0, c as f64 / 10.0))
            .collect();
        let best = best_individual(&pool).encoding.clone();
        let next = select_next(pool, ps, true);
        prop_assert_eq!(next.len(), ps.min(objs.len()));
        prop_assert!(next.iter().any(|i| i.encoding == best));
    }
}

#[test]
fn appendix_style_cut() {
    // front 0: three points; front 1: five points, four slots left
    let objs = [
        (1, 0.1, 0.9),
        (2, 0.05, 0.5),
        (9, 0.0, 0.0),
        (2, 0.2, 0.9),
        (3, 0.15, 0.6),
        (4, 0.12, 0.5),
        (5, 0.11, 0.95),
        (10, 0.1, 0.1),
    ];
    let pool: Vec<Individual> =
        objs.iter().enumerate().map(|(i, &(s, d, c))| individual(100 + i as u64, s, d, c)).collect();
    let dropped = {
        let front: Vec<Vec<f64>> = objs[3..].iter().map(|&(s, d, c)| vec![s as f64, d, c]).collect();
        let dist = crowding_distances(&front);
        let (i, &low) = dist.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert_eq!(dist.iter().filter(|&&d| d == low).count(), 1);
        pool[3 + i].encoding.clone()
    };
    let front0: Vec<String> = pool[..3].iter().map(|i| i.encoding.clone()).collect();
    let next = select_next(pool, 7, true);
    assert_eq!(next.len(), 7);
    assert!(next[..3].iter().all(|i| front0.contains(&i.encoding)));
    assert!(next.iter().all(|i| i.encoding != dropped));
    assert_eq!(next[0].objectives.phi_d, 0.0);
}

#[test]
fn duplicates_collapse_to_one() {
    let ind = individual(7, 4, 0.5, 0.5);
    let next = select_next(vec![ind.clone(), ind.clone(), ind], 3, true);
    assert_eq!(next.len(), 1);
}

#[test]
fn runs_are_deterministic_and_elitist() {
    let case = csd();
    let cfg = MoeaConfig { ps: 40, ng: 15, uc: 15, seed: 11, ..MoeaConfig::default() };
    let a = run(&cfg, &case.complete).unwrap();
    let b = run(&cfg, &case.complete).unwrap();
    assert_eq!(a.generations.len(), b.generations.len());
    assert!(a.generations.iter().zip(&b.generations).all(|(x, y)| x.same_trajectory(y)));
    assert_eq!(a.best.encoding, b.best.encoding);
    for w in a.generations.windows(2) {
        let (e0, e1) = (w[0].best_phi_d + w[0].best_phi_c, w[1].best_phi_d + w[1].best_phi_c);
        assert!(e1 <= e0);
        if e1 == e0 {
            assert!(w[1].best_phi_s <= w[0].best_phi_s);
        }
    }
    assert!(a.pareto_front.iter().any(|i| i.encoding == a.best.encoding));
    for ind in &a.pareto_front {
        ind.ft.validate().unwrap();
    }
}
