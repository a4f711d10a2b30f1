//! Non-dominated sorting, crowding distance and elitist survivor selection.

use std::cmp::Ordering;
use std::collections::HashSet;

use super::Individual;
use crate::metrics::ObjectiveVector;

/// `a` dominates `b` under minimisation.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Fast non-dominated sorting over raw objective values. Front `k + 1`
/// holds the points that are non-dominated once fronts `0..=k` are removed.
/// Indices inside a front are ascending.
pub fn nondominated_fronts(values: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&values[i], &values[j]) {
                dominates_list[i].push(j);
                dominated_by_count[j] += 1;
            } else if dominates(&values[j], &values[i]) {
                dominates_list[j].push(i);
                dominated_by_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Sorting restricted to the active metrics of each vector's setup.
pub fn fast_nondominated_sort(objs: &[ObjectiveVector]) -> Vec<Vec<usize>> {
    let values: Vec<Vec<f64>> = objs.iter().map(ObjectiveVector::active_values).collect();
    nondominated_fronts(&values)
}

/// Crowding distance of each member of one front. Boundary members of every
/// objective get infinity; interior members accumulate the normalised gap
/// between their neighbours. An objective with zero range adds nothing to
/// interior members.
#[allow(clippy::needless_range_loop)]
pub fn crowding_distances(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut d = vec![0.0; n];
    if n == 0 {
        return d;
    }
    let m = front[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    for obj in 0..m {
        order.sort_by(|&a, &b| front[a][obj].total_cmp(&front[b][obj]).then(a.cmp(&b)));
        let lo = front[order[0]][obj];
        let hi = front[order[n - 1]][obj];
        d[order[0]] = f64::INFINITY;
        d[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for j in 1..n.saturating_sub(1) {
            d[order[j]] += (front[order[j + 1]][obj] - front[order[j - 1]][obj]) / range;
        }
    }
    d
}

pub fn crowding_distance(front: &[ObjectiveVector]) -> Vec<f64> {
    let values: Vec<Vec<f64>> = front.iter().map(ObjectiveVector::active_values).collect();
    crowding_distances(&values)
}

/// Error sum, then true size, then encoding.
pub(crate) fn quality_order(a: &Individual, b: &Individual) -> Ordering {
    a.objectives
        .error_sum()
        .total_cmp(&b.objectives.error_sum())
        .then(a.size.cmp(&b.size))
        .then_with(|| a.encoding.cmp(&b.encoding))
}

/// Smallest active error, then smallest tree, then encoding.
pub fn best_individual(front: &[Individual]) -> &Individual {
    front.iter().min_by(|a, b| quality_order(a, b)).expect("front is non-empty")
}

/// Removes structural duplicates, keeping the first occurrence.
pub fn dedup_by_encoding(pool: Vec<Individual>) -> Vec<Individual> {
    let mut seen = HashSet::new();
    pool.into_iter().filter(|ind| seen.insert(ind.encoding.clone())).collect()
}

/// Next population of at most `ps` members.
///
/// Whole fronts are admitted in rank order. The front that would overflow
/// is cut by descending crowding distance; in the first front the best
/// individual is always kept so the incumbent never regresses. Admitted
/// members come out front by front, ordered by [`best_individual`]'s rule.
pub fn select_next(pool: Vec<Individual>, ps: usize, dedup: bool) -> Vec<Individual> {
    let pool = if dedup { dedup_by_encoding(pool) } else { pool };
    let objs: Vec<ObjectiveVector> = pool.iter().map(|i| i.objectives).collect();
    let fronts = fast_nondominated_sort(&objs);

    let mut chosen: Vec<usize> = Vec::with_capacity(ps.min(pool.len()));
    for (rank, front) in fronts.iter().enumerate() {
        let slots = ps - chosen.len();
        if slots == 0 {
            break;
        }
        let mut members = front.clone();
        if members.len() > slots {
            let front_objs: Vec<ObjectiveVector> = members.iter().map(|&i| objs[i]).collect();
            let dist = crowding_distance(&front_objs);
            let mut ranked: Vec<(usize, f64)> = members.iter().copied().zip(dist).collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| quality_order(&pool[a.0], &pool[b.0])));
            if rank == 0 {
                let best =
                    members.iter().copied().min_by(|&a, &b| quality_order(&pool[a], &pool[b])).expect("non-empty");
                let pos = ranked.iter().position(|r| r.0 == best).expect("best is in the front");
                let pinned = ranked.remove(pos);
                ranked.insert(0, pinned);
            }
            members = ranked.into_iter().take(slots).map(|r| r.0).collect();
        }
        members.sort_by(|&a, &b| quality_order(&pool[a], &pool[b]));
        chosen.extend(members);
    }

    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    chosen.into_iter().map(|i| slots[i].take().expect("each index chosen once")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_objective_fronts() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 2.0]];
        assert_eq!(nondominated_fronts(&v), vec![vec![0], vec![1, 2]]);
        let same = vec![vec![1.0, 1.0]; 4];
        assert_eq!(nondominated_fronts(&same), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn crowding_examples() {
        let front = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(crowding_distances(&front), vec![f64::INFINITY, 2.0, f64::INFINITY]);
        assert_eq!(crowding_distances(&[vec![4.0, 4.0]]), vec![f64::INFINITY]);
        let flat = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0], vec![4.0, 5.0]];
        let d = crowding_distances(&flat);
        // second objective is constant: interior members only see the first
        assert_eq!(d[1], 2.0 / 3.0);
        assert_eq!(d[2], 2.0 / 3.0);
    }
}
