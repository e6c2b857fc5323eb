//! Generalized arc consistency and a small MAC solver.

use crate::instance::CspInstance;
use crate::relation::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GacOutcome {
    /// Surviving values per variable, ascending.
    pub domains: Vec<Vec<Value>>,
    /// False when some constraint has no supported tuple left.
    pub consistent: bool,
}

/// Greatest fixpoint of support filtering. Constraints are revised in
/// ascending index order until a full pass changes nothing.
pub fn enforce_gac(instance: &CspInstance) -> GacOutcome {
    let mut live = vec![vec![true; instance.domain_size() as usize]; instance.num_vars()];
    let consistent = propagate(instance, &mut live);
    GacOutcome {
        domains: to_lists(&live),
        consistent,
    }
}

fn to_lists(live: &[Vec<bool>]) -> Vec<Vec<Value>> {
    live.iter()
        .map(|d| {
            d.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(v, _)| v as Value)
                .collect()
        })
        .collect()
}

fn propagate(instance: &CspInstance, live: &mut [Vec<bool>]) -> bool {
    let d = instance.domain_size() as usize;
    loop {
        let mut changed = false;
        for c in instance.constraints() {
            let scope = c.scope();
            let mut supported = vec![vec![false; d]; scope.len()];
            let mut any = false;
            for t in c.relation().tuples() {
                if t.iter().zip(scope).all(|(&v, &x)| live[x][v as usize]) {
                    any = true;
                    for (p, &v) in t.iter().enumerate() {
                        supported[p][v as usize] = true;
                    }
                }
            }
            if !any {
                return false;
            }
            for (p, &x) in scope.iter().enumerate() {
                for v in 0..d {
                    if live[x][v] && !supported[p][v] {
                        live[x][v] = false;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

/// Backtracking with GAC maintained at every node. Branches on the lowest
/// variable whose domain is not yet a singleton, values ascending; returns
/// the first solution in that order.
pub fn solve_mac(instance: &CspInstance) -> Option<Vec<Value>> {
    let mut live = vec![vec![true; instance.domain_size() as usize]; instance.num_vars()];
    search(instance, &mut live)
}

fn search(instance: &CspInstance, live: &mut [Vec<bool>]) -> Option<Vec<Value>> {
    if !propagate(instance, live) {
        return None;
    }
    let branch = live
        .iter()
        .position(|d| d.iter().filter(|&&b| b).count() > 1);
    let Some(x) = branch else {
        let values: Vec<Value> = to_lists(live).into_iter().map(|d| d[0]).collect();
        return instance.is_solution(&values).then_some(values);
    };
    let candidates: Vec<usize> = (0..live[x].len()).filter(|&v| live[x][v]).collect();
    for v in candidates {
        let mut child = live.to_vec();
        child[x]
            .iter_mut()
            .enumerate()
            .for_each(|(w, b)| *b = w == v);
        if let Some(sol) = search(instance, &mut child) {
            return Some(sol);
        }
    }
    None
}
