//! Seeded random inputs for experiments and oracle cross-checks.

use backdoor_core::{
    Constraint, CspInstance, Graph, HittingSetInstance, Language, Relation, Value,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Upper bounds for [`random_instance`]; every dimension is drawn uniformly
/// up to its bound.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_vars: usize,
    pub max_domain: u32,
    pub max_constraints: usize,
    pub max_tuples: usize,
    pub max_arity: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_vars: 6,
            max_domain: 3,
            max_constraints: 3,
            max_tuples: 8,
            max_arity: 3,
        }
    }
}

pub fn random_relation(rng: &mut impl Rng, arity: usize, d: u32, max_tuples: usize) -> Relation {
    let count = rng.gen_range(0..=max_tuples);
    let tuples: Vec<Vec<Value>> = (0..count)
        .map(|_| (0..arity).map(|_| rng.gen_range(0..d)).collect())
        .collect();
    Relation::new(arity, d, tuples).expect("values drawn below d")
}

pub fn random_instance(rng: &mut impl Rng, shape: &Shape) -> CspInstance {
    let n = rng.gen_range(1..=shape.max_vars.max(1));
    let d = rng.gen_range(2..=shape.max_domain.max(2));
    let m = rng.gen_range(1..=shape.max_constraints.max(1));
    let vars: Vec<usize> = (0..n).collect();
    let constraints = (0..m)
        .map(|_| {
            let arity = rng.gen_range(1..=shape.max_arity.min(n).max(1));
            let scope: Vec<usize> = vars.choose_multiple(rng, arity).copied().collect();
            // mostly nonempty relations; empty ones still show up
            let rel = loop {
                let r = random_relation(rng, arity, d, shape.max_tuples);
                if !r.is_empty() || rng.gen_bool(0.1) {
                    break r;
                }
            };
            Constraint::new(scope, rel).expect("distinct scope of matching arity")
        })
        .collect();
    CspInstance::new(n, d, constraints).expect("valid by construction")
}

pub fn random_language(
    rng: &mut impl Rng,
    d: u32,
    max_arity: usize,
    max_relations: usize,
    max_tuples: usize,
) -> Language {
    let count = rng.gen_range(1..=max_relations);
    Language::new((0..count).map(|_| {
        let arity = rng.gen_range(1..=max_arity);
        random_relation(rng, arity, d, max_tuples)
    }))
}

pub fn random_graph(rng: &mut impl Rng, max_vertices: usize, edge_probability: f64) -> Graph {
    let n = rng.gen_range(1..=max_vertices);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(edge_probability) {
                edges.push((a, b));
            }
        }
    }
    Graph::new(n, edges).expect("valid edges")
}

/// `universe` must be at least `p`.
pub fn random_hitting_set(
    rng: &mut impl Rng,
    universe: usize,
    p: usize,
    max_sets: usize,
) -> HittingSetInstance {
    let elements: Vec<usize> = (0..universe).collect();
    let s = rng.gen_range(0..=max_sets);
    let sets = (0..s)
        .map(|_| elements.choose_multiple(rng, p).copied().collect())
        .collect();
    HittingSetInstance::new(universe, p, sets).expect("distinct elements inside the universe")
}
