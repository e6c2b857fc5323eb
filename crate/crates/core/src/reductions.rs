//! Hardness-reduction instance generators with known optimum backdoor size.
//!
//! Every generator maps a Vertex Cover or Hitting Set input to a CSP instance
//! whose minimum strong backdoor has the size of the minimum cover. The exact
//! cover solvers here supply that ground truth.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::class::ClassOracle;
use crate::error::{Error, Result};
use crate::instance::{Constraint, CspInstance, InstanceFile};
use crate::language::{BijectionMap, Language};
use crate::operation::OperationTable;
use crate::relation::{gadget_relation, GadgetKind, Relation, Tuple, Value};

/// Largest number of candidate subsets the exact cover solvers will try.
pub const COVER_SUBSET_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    num_vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        Graph::new(f.num_vertices, f.edges.into_iter().map(|[a, b]| (a, b)))
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        GraphFile {
            num_vertices: g.num_vertices,
            edges: g.edges.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl Graph {
    /// Edges are stored as sorted pairs `(a, b)` with `a < b`, deduplicated.
    pub fn new(
        num_vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::malformed(format!("self-loop on vertex {a}")));
            }
            if a.max(b) >= num_vertices {
                return Err(Error::malformed(format!(
                    "edge ({a},{b}) outside {num_vertices} vertices"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Graph {
            num_vertices,
            edges: set.into_iter().collect(),
        })
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).expect("valid")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// The graph as a 2-Hitting Set instance over its vertices.
    pub fn as_hitting_set(&self) -> HittingSetInstance {
        HittingSetInstance::new(
            self.num_vertices,
            2,
            self.edges.iter().map(|&(a, b)| vec![a, b]).collect(),
        )
        .expect("edges are valid 2-sets")
    }
}

/// A `p`-Hitting Set input. Sets keep the element order they were given in,
/// since some constructions lay columns out in that order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HittingSetFile", into = "HittingSetFile")]
pub struct HittingSetInstance {
    universe: usize,
    p: usize,
    sets: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct HittingSetFile {
    universe: usize,
    p: usize,
    sets: Vec<Vec<usize>>,
}

impl TryFrom<HittingSetFile> for HittingSetInstance {
    type Error = Error;

    fn try_from(f: HittingSetFile) -> Result<Self> {
        HittingSetInstance::new(f.universe, f.p, f.sets)
    }
}

impl From<HittingSetInstance> for HittingSetFile {
    fn from(h: HittingSetInstance) -> Self {
        HittingSetFile {
            universe: h.universe,
            p: h.p,
            sets: h.sets,
        }
    }
}

impl HittingSetInstance {
    pub fn new(universe: usize, p: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        for (i, s) in sets.iter().enumerate() {
            if s.len() != p {
                return Err(Error::malformed(format!(
                    "set {i} has {} elements, expected {p}",
                    s.len()
                )));
            }
            if s.iter().collect::<BTreeSet<_>>().len() != p {
                return Err(Error::malformed(format!("set {i} repeats an element")));
            }
            if let Some(u) = s.iter().find(|&&u| u >= universe) {
                return Err(Error::malformed(format!(
                    "set {i} names element {u} outside a universe of {universe}"
                )));
            }
        }
        Ok(HittingSetInstance { universe, p, sets })
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Grows every set to `min_p` elements with fresh universe elements,
    /// allocated in set order. Unchanged when `p >= min_p`.
    pub fn pad(&self, min_p: usize) -> HittingSetInstance {
        if self.p >= min_p {
            return self.clone();
        }
        let mut next = self.universe;
        let sets = self
            .sets
            .iter()
            .map(|s| {
                let mut s = s.clone();
                while s.len() < min_p {
                    s.push(next);
                    next += 1;
                }
                s
            })
            .collect();
        HittingSetInstance {
            universe: next,
            p: min_p,
            sets,
        }
    }

    pub fn is_hit_by(&self, h: &[usize]) -> bool {
        self.sets.iter().all(|s| s.iter().any(|u| h.contains(u)))
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Smallest hitting set of size at most `k`, by increasing size and then
/// lexicographically; the first one found is returned.
pub fn solve_hitting_set(hs: &HittingSetInstance, k: usize) -> Result<Option<Vec<usize>>> {
    let n = hs.universe;
    let mut work = 0u128;
    for size in 0..=k.min(n) {
        work += binomial(n, size);
        if work > COVER_SUBSET_CAP {
            return Err(Error::Resource {
                what: "exact hitting set",
                needed: work,
                cap: COVER_SUBSET_CAP,
            });
        }
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            if hs.is_hit_by(&combo) {
                return Ok(Some(combo));
            }
            let Some(i) = (0..size).rev().find(|&i| combo[i] < n - size + i) else {
                break;
            };
            combo[i] += 1;
            for j in i + 1..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    Ok(None)
}

pub fn solve_vertex_cover(g: &Graph, k: usize) -> Result<Option<Vec<usize>>> {
    solve_hitting_set(&g.as_hitting_set(), k)
}

pub fn minimum_hitting_set(hs: &HittingSetInstance) -> Result<usize> {
    Ok(solve_hitting_set(hs, hs.universe)?.map_or(0, |h| h.len()))
}

/// A generated instance with its expected optimum.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub instance: CspInstance,
    pub construction: &'static str,
    /// Minimum cover size of the source input; `None` when the exact solver
    /// hit its cap.
    pub ground_truth: Option<usize>,
    /// Properties of the class the ground truth relies on that were not
    /// checked here.
    pub assumptions: Vec<String>,
}

impl Generated {
    fn new(instance: CspInstance, construction: &'static str, hs: &HittingSetInstance) -> Self {
        let ground_truth = minimum_hitting_set(hs).ok();
        Generated {
            instance,
            construction,
            ground_truth,
            assumptions: Vec::new(),
        }
    }

    pub fn to_file(&self) -> InstanceFile {
        let mut file = self.instance.to_file();
        file.metadata = Some(json!({
            "construction": self.construction,
            "ground_truth": self.ground_truth,
            "assumptions": self.assumptions,
        }));
        file
    }
}

fn require_idempotent(oracle: &ClassOracle) -> Result<()> {
    if oracle.expr().is_idempotent_class() {
        Ok(())
    } else {
        Err(Error::Refused(
            "the construction is only sound for idempotent classes".into(),
        ))
    }
}

fn rel(arity: usize, d: u32, rows: &[&[Value]]) -> Relation {
    Relation::new(arity, d, rows.iter().map(|r| r.to_vec())).expect("fixed rows are valid")
}

/// One variable per vertex over the domain `0..4`. Each edge gets `≠` on
/// `{1,2,3}` when the three two-value unary relations form a member
/// language, and otherwise their three diagonal extensions.
pub fn gen_vertex_cover(graph: &Graph, oracle: &ClassOracle) -> Result<Generated> {
    require_idempotent(oracle)?;
    let pairs = Language::new([
        rel(1, 4, &[&[1], &[2]]),
        rel(1, 4, &[&[2], &[3]]),
        rel(1, 4, &[&[1], &[3]]),
    ]);
    let relations = if oracle.member(&pairs)? {
        let neq = (1..4).flat_map(|a| (1..4).filter(move |&b| b != a).map(move |b| vec![a, b]));
        vec![Relation::new(2, 4, neq)?]
    } else {
        vec![
            rel(2, 4, &[&[1, 1], &[2, 2]]),
            rel(2, 4, &[&[2, 2], &[3, 3]]),
            rel(2, 4, &[&[1, 1], &[3, 3]]),
        ]
    };
    let constraints = graph
        .edges()
        .iter()
        .flat_map(|&(a, b)| {
            relations
                .iter()
                .map(move |r| Constraint::new(vec![a, b], r.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let instance = CspInstance::new(graph.num_vertices(), 4, constraints)?;
    Ok(Generated::new(
        instance,
        "vertex-cover",
        &graph.as_hitting_set(),
    ))
}

/// The 16 binary and 4 unary Boolean relations.
pub fn boolean_relations_upto_binary() -> Vec<Relation> {
    let mut out = Vec::new();
    for arity in 1..=2usize {
        let all: Vec<Tuple> = (0..1usize << arity)
            .map(|code| {
                (0..arity)
                    .map(|j| ((code >> (arity - 1 - j)) & 1) as Value)
                    .collect()
            })
            .collect();
        for mask in 0..1usize << all.len() {
            let tuples = all
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t.clone());
            out.push(Relation::new(arity, 2, tuples).expect("Boolean tuples"));
        }
    }
    out
}

/// Boolean version of [`gen_vertex_cover`].
///
/// When every Boolean language of arity at most 2 is a member, sets must
/// have at most 3 elements; they are padded to 3 and each gets the
/// one-in-three relation (if `[(1,0),(0,1)]` is a member) or
/// `[(1,0,0),(0,1,1)]`. Otherwise the input must be a graph (`p = 2`) and
/// each edge gets `[(0,1)]` if that is not a member, or else every relation
/// of a minimal non-member binary Boolean language.
pub fn gen_boolean_cover(hs: &HittingSetInstance, oracle: &ClassOracle) -> Result<Generated> {
    require_idempotent(oracle)?;
    let everything = Language::new(boolean_relations_upto_binary());
    if oracle.member(&everything)? {
        if hs.p() > 3 {
            return Err(Error::Refused(
                "sets of more than 3 elements are not supported".into(),
            ));
        }
        let hs = hs.pad(3);
        let gadget = if oracle.member(&Language::new([rel(2, 2, &[&[1, 0], &[0, 1]])]))? {
            rel(3, 2, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])
        } else {
            rel(3, 2, &[&[1, 0, 0], &[0, 1, 1]])
        };
        let constraints = hs
            .sets()
            .iter()
            .map(|s| Constraint::new(s.clone(), gadget.clone()))
            .collect::<Result<Vec<_>>>()?;
        let instance = CspInstance::new(hs.universe(), 2, constraints)?;
        return Ok(Generated::new(instance, "boolean-cover", &hs));
    }
    if hs.p() != 2 {
        return Err(Error::Refused(
            "some binary Boolean language is not a member, so the input must be a graph (p = 2)"
                .into(),
        ));
    }
    let single = rel(2, 2, &[&[0, 1]]);
    let relations = if !oracle.member(&Language::new([single.clone()]))? {
        vec![single]
    } else {
        minimal_non_member(
            &boolean_relations_upto_binary()
                .into_iter()
                .filter(|r| r.arity() == 2)
                .collect::<Vec<_>>(),
            oracle,
        )?
        .ok_or_else(|| Error::Refused("every binary Boolean language is a member".into()))?
    };
    let constraints = hs
        .sets()
        .iter()
        .flat_map(|s| {
            relations
                .iter()
                .map(move |r| Constraint::new(s.clone(), r.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let instance = CspInstance::new(hs.universe(), 2, constraints)?;
    Ok(Generated::new(instance, "boolean-cover", hs))
}

/// Drops relations one at a time while the rest stays outside the class.
fn minimal_non_member(
    relations: &[Relation],
    oracle: &ClassOracle,
) -> Result<Option<Vec<Relation>>> {
    let mut current = relations.to_vec();
    if oracle.member(&Language::new(current.clone()))? {
        return Ok(None);
    }
    let mut i = 0;
    while i < current.len() {
        let mut rest = current.clone();
        rest.remove(i);
        if !oracle.member(&Language::new(rest.clone()))? {
            current = rest;
        } else {
            i += 1;
        }
    }
    Ok(Some(current))
}

/// `member({R₂²(2i)})` for each set index `i = 1..=s`.
pub fn single_constraint_flags(num_sets: usize, oracle: &ClassOracle) -> Result<Vec<bool>> {
    (1..=num_sets)
        .map(|i| {
            oracle.member(&Language::new([gadget_relation(
                GadgetKind::Two,
                2,
                2 * i as Value,
            )?]))
        })
        .collect()
}

/// A single constraint over all elements. Set `i` (from 1) contributes a
/// block of rows using only the values `2i` and `2i+1`: the two-row gadget
/// on its columns when `flags[i-1]` is false, the three-row gadget when it is
/// true, and the constant `2i` elsewhere. Sets are padded to 3 elements.
pub fn gen_single_constraint(hs: &HittingSetInstance, flags: &[bool]) -> Result<Generated> {
    if flags.len() != hs.sets().len() {
        return Err(Error::malformed(format!(
            "{} flags for {} sets",
            flags.len(),
            hs.sets().len()
        )));
    }
    let hs = hs.pad(3);
    let s = hs.sets().len();
    let n = hs.universe();
    let d = 2 * s as Value + 2;
    let mut rows = Vec::new();
    for (i, (set, &member)) in hs.sets().iter().zip(flags).enumerate() {
        let e = 2 * (i as Value + 1);
        let kind = if member {
            GadgetKind::Three
        } else {
            GadgetKind::Two
        };
        for g in gadget_relation(kind, hs.p(), e)?.tuples() {
            let mut row = vec![e; n];
            for (&col, &v) in set.iter().zip(g) {
                row[col] = v;
            }
            rows.push(row);
        }
    }
    let constraints = if s == 0 {
        vec![]
    } else {
        vec![Constraint::new(
            (0..n).collect(),
            Relation::new(n, d, rows)?,
        )?]
    };
    let instance = CspInstance::new(n, d, constraints)?;
    Ok(Generated::new(instance, "single-constraint", &hs))
}

/// Boolean, one constraint per set: the three-row gadget `R₃ᵖ(0)` when
/// `{R₂ᵖ(0)}` is a member, the two-row gadget `R₂ᵖ(0)` otherwise.
pub fn gen_boolean_sets(hs: &HittingSetInstance, oracle: &ClassOracle) -> Result<Generated> {
    require_idempotent(oracle)?;
    let hs = hs.pad(3);
    let p = hs.p();
    let two = gadget_relation(GadgetKind::Two, p, 0)?;
    let gadget = if oracle.member(&Language::new([two.clone()]))? {
        gadget_relation(GadgetKind::Three, p, 0)?
    } else {
        two
    };
    let constraints = hs
        .sets()
        .iter()
        .map(|s| Constraint::new(s.clone(), gadget.clone()))
        .collect::<Result<Vec<_>>>()?;
    let instance = CspInstance::new(hs.universe(), 2, constraints)?;
    Ok(Generated::new(instance, "boolean-sets", &hs))
}

/// A language outside the class all of whose proper sublanguages are
/// members, with every relation of the same arity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonHellyWitness {
    language: Language,
    arity: usize,
    domain_size: usize,
}

impl NonHellyWitness {
    /// Checks the witness property against `oracle`. By heredity it is
    /// enough to test the sublanguages missing one relation.
    pub fn new(language: Language, oracle: &ClassOracle) -> Result<Self> {
        if language.len() < 2 {
            return Err(Error::malformed("a witness needs at least two relations"));
        }
        let arity = language.relations()[0].arity();
        if language.relations().iter().any(|r| r.arity() != arity) {
            return Err(Error::malformed("witness relations must share one arity"));
        }
        if oracle.member(&language)? {
            return Err(Error::malformed("the witness language is a member"));
        }
        for i in 0..language.len() {
            if !oracle.member(&language.without(i))? {
                return Err(Error::malformed(format!(
                    "dropping relation {i} still leaves a non-member"
                )));
            }
        }
        let domain_size = language.active_domain().len();
        Ok(NonHellyWitness {
            language,
            arity,
            domain_size,
        })
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }
}

/// Exhaustive search for a [`NonHellyWitness`] by increasing arity, domain
/// size and language size. Relations are the nonempty subsets of
/// `{0..d}^arity` in canonical order and languages are taken in
/// lexicographic order of relation indices.
pub fn find_non_helly_witness(
    oracle: &ClassOracle,
    arity_cap: usize,
    domain_cap: u32,
    size_cap: usize,
) -> Result<Option<NonHellyWitness>> {
    for arity in 1..=arity_cap {
        for d in 2..=domain_cap {
            let cells = (d as u128).checked_pow(arity as u32).unwrap_or(u128::MAX);
            if cells > 16 {
                return Err(Error::Resource {
                    what: "non-Helly witness relations",
                    needed: cells,
                    cap: 16,
                });
            }
            let relations = all_relations(arity, d);
            for size in 2..=size_cap.min(relations.len()) {
                if let Some(w) = scan_languages(&relations, size, oracle)? {
                    return Ok(Some(w));
                }
            }
        }
    }
    Ok(None)
}

fn all_relations(arity: usize, d: u32) -> Vec<Relation> {
    let cells = (d as usize).pow(arity as u32);
    let all: Vec<Tuple> = (0..cells)
        .map(|mut code| {
            let mut t = vec![0; arity];
            for j in (0..arity).rev() {
                t[j] = (code % d as usize) as Value;
                code /= d as usize;
            }
            t
        })
        .collect();
    let mut out: Vec<Relation> = (1..1u64 << cells)
        .map(|mask| {
            let tuples = all
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t.clone());
            Relation::new(arity, d, tuples).expect("in range")
        })
        .collect();
    out.sort();
    out
}

fn scan_languages(
    relations: &[Relation],
    size: usize,
    oracle: &ClassOracle,
) -> Result<Option<NonHellyWitness>> {
    let n = relations.len();
    let mut combo: Vec<usize> = (0..size).collect();
    loop {
        let lang = Language::new(combo.iter().map(|&i| relations[i].clone()));
        // proper sublanguages first: cheap rejections via the cache
        let mut proper_ok = true;
        for i in 0..lang.len() {
            if !oracle.member(&lang.without(i))? {
                proper_ok = false;
                break;
            }
        }
        if proper_ok && !oracle.member(&lang)? {
            return Ok(Some(NonHellyWitness::new(lang, oracle)?));
        }
        let Some(i) = (0..size).rev().find(|&i| combo[i] < n - size + i) else {
            return Ok(None);
        };
        combo[i] += 1;
        for j in i + 1..size {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Layout of one set's gadget in [`gen_bijection_chain`], for structural checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainBlock {
    pub y: Vec<usize>,
    pub z: Vec<usize>,
    /// `D_j^0 ..= D_j^{p+1}`.
    pub domains: Vec<BTreeSet<Value>>,
}

/// Chains each set's elements between fresh `y` and `z` variables with
/// bijection constraints over fresh value blocks. The first witness relation
/// (renamed into the first block) sits on the `y` variables and the other
/// relations (renamed into the last block) on the `z` variables.
///
/// Variables: the `n` elements first, then for each set its `y` and `z`
/// variables. Value blocks of size `d_m` are allocated in set order then
/// chain order starting at 0, and consecutive blocks are linked by the
/// offset map `v ↦ v + d_m`.
pub fn gen_bijection_chain(
    hs: &HittingSetInstance,
    witness: &NonHellyWitness,
    oracle: &ClassOracle,
) -> Result<(Generated, Vec<ChainBlock>)> {
    let witness = NonHellyWitness::new(witness.language.clone(), oracle)?;
    let r = witness.arity();
    let dm = witness.domain_size() as Value;
    let p = hs.p();
    let n = hs.universe();
    let s = hs.sets().len();
    let blocks_per_set = p + 2;
    let total = (s * blocks_per_set) as Value * dm;
    let domain = total.max(1);
    let source = witness.language().active_domain();
    let (first, rest) = witness
        .language()
        .relations()
        .split_first()
        .expect("at least two relations");
    let rest = Language::new(rest.iter().cloned());

    let mut constraints = Vec::new();
    let mut layout = Vec::new();
    for (j, set) in hs.sets().iter().enumerate() {
        let base = (j * blocks_per_set) as Value * dm;
        let domains: Vec<BTreeSet<Value>> = (0..blocks_per_set as Value)
            .map(|i| (base + i * dm..base + (i + 1) * dm).collect())
            .collect();
        let y: Vec<usize> = (0..r).map(|q| n + j * 2 * r + q).collect();
        let z: Vec<usize> = (0..r).map(|q| n + j * 2 * r + r + q).collect();

        let phi = BijectionMap::monotone(&source, &domains[0])?;
        constraints.push(Constraint::new(
            y.clone(),
            phi.rename_relation(first)?.with_domain_size(domain)?,
        )?);

        let mut chain = vec![y[r - 1]];
        chain.extend(set.iter().copied());
        chain.push(z[0]);
        let mut psi = BijectionMap::identity(domains[0].iter().copied());
        for i in 0..=p {
            let step = BijectionMap::new(domains[i].iter().map(|&v| (v, v + dm)))?;
            constraints.push(Constraint::new(
                vec![chain[i], chain[i + 1]],
                step.relation().with_domain_size(domain)?,
            )?);
            psi = psi.then(&step)?;
        }

        let renamed = phi.then(&psi)?.rename_language(&rest)?;
        for rel in renamed.relations() {
            constraints.push(Constraint::new(z.clone(), rel.with_domain_size(domain)?)?);
        }
        layout.push(ChainBlock { y, z, domains });
    }
    let instance = CspInstance::new(n + s * 2 * r, domain, constraints)?;
    let mut generated = Generated::new(instance, "bijection-chain", hs);
    generated.assumptions = vec!["value-renamable".into(), "domain-decomposable".into()];
    Ok((generated, layout))
}

/// The three-set 3-Hitting Set input of the single-constraint example
/// (elements numbered from 0).
pub fn sample_sets() -> HittingSetInstance {
    HittingSetInstance::new(7, 3, vec![vec![2, 3, 4], vec![1, 4, 5], vec![0, 2, 6]]).expect("valid")
}

/// Memberships `{R₂²(2)} ∈ T`, `{R₂²(4)} ∉ T`, `{R₂²(6)} ∉ T` of that example.
pub fn sample_flags() -> Vec<bool> {
    vec![true, false, false]
}

/// An idempotent ternary operation on `0..d` realising [`sample_flags`]:
/// majority when every argument lies in `{2,3}`, `max` otherwise. It
/// preserves `R₂²(2)` but neither the three-row gadget on `{2,3}` nor
/// `R₂²(e)` for any other even `e ≥ 4`.
pub fn sample_class_table(d: u32) -> OperationTable {
    OperationTable::from_fn(3, d, |args| {
        if args.iter().all(|v| (2..4).contains(v)) {
            if args.iter().filter(|&&v| v == 3).count() >= 2 {
                3
            } else {
                2
            }
        } else {
            *args.iter().max().expect("three arguments")
        }
    })
    .expect("values stay below d")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backdoor::{find_backdoor_bruteforce, BackdoorLimits};
    use crate::class::ClassExpr;
    use crate::search::{IdentityFamily, SearchLimits};

    fn oracle(expr: ClassExpr) -> ClassOracle {
        ClassOracle::new(expr, SearchLimits::default()).unwrap()
    }

    fn min_backdoor(g: &Generated, o: &ClassOracle) -> usize {
        let n = g.instance.num_vars();
        find_backdoor_bruteforce(&g.instance, o, n, &BackdoorLimits::default())
            .unwrap()
            .backdoor
            .unwrap()
            .len()
    }

    #[test]
    fn cover_solvers() {
        let k3 = Graph::complete(3);
        assert_eq!(solve_vertex_cover(&k3, 1).unwrap(), None);
        assert_eq!(solve_vertex_cover(&k3, 2).unwrap(), Some(vec![0, 1]));
        assert_eq!(
            solve_vertex_cover(&Graph::new(4, []).unwrap(), 0).unwrap(),
            Some(vec![])
        );
        // {u1,u5} precedes {u3,u5} lexicographically; both hit every set
        assert_eq!(
            solve_hitting_set(&sample_sets(), 2).unwrap(),
            Some(vec![0, 4])
        );
        assert!(sample_sets().is_hit_by(&[2, 4]));
        assert_eq!(solve_hitting_set(&sample_sets(), 1).unwrap(), None);
    }

    #[test]
    fn graph_and_sets_validate() {
        assert!(Graph::new(2, [(0, 0)]).is_err());
        assert!(Graph::new(2, [(0, 2)]).is_err());
        assert_eq!(Graph::new(3, [(2, 1), (1, 2)]).unwrap().edges(), &[(1, 2)]);
        assert!(HittingSetInstance::new(3, 2, vec![vec![0, 0]]).is_err());
        assert!(HittingSetInstance::new(3, 2, vec![vec![0, 1, 2]]).is_err());
        let g: Graph = serde_json::from_str(r#"{"num_vertices":3,"edges":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(g.edges().len(), 2);
    }

    #[test]
    fn padding_is_deterministic() {
        let hs = HittingSetInstance::new(3, 1, vec![vec![0], vec![2]]).unwrap();
        let padded = hs.pad(3);
        assert_eq!(padded.universe(), 7);
        assert_eq!(padded.sets(), &[vec![0, 3, 4], vec![2, 5, 6]]);
    }

    #[test]
    fn vertex_cover_examples() {
        let o = oracle(ClassExpr::max());
        let k3 = gen_vertex_cover(&Graph::complete(3), &o).unwrap();
        assert_eq!(k3.instance.constraints().len(), 3);
        assert_eq!(k3.instance.constraints()[0].relation().len(), 6);
        assert_eq!(k3.ground_truth, Some(2));
        assert_eq!(min_backdoor(&k3, &o), 2);
        let edge = gen_vertex_cover(&Graph::complete(2), &o).unwrap();
        assert_eq!(min_backdoor(&edge, &o), 1);
        let none = gen_vertex_cover(&Graph::new(3, []).unwrap(), &o).unwrap();
        assert_eq!(min_backdoor(&none, &o), 0);

        let not_idem = ClassExpr::table(OperationTable::new(1, 2, vec![1, 0]).unwrap());
        assert!(matches!(
            gen_vertex_cover(&Graph::complete(2), &oracle(not_idem)),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn vertex_cover_second_case() {
        // the majority family rejects the unary triple? no: unary relations
        // are always preserved by idempotent ops, so use a table that maps
        // the pair {1,2} outside itself
        let t = OperationTable::from_fn(2, 4, |a| {
            if a[0] == a[1] {
                a[0]
            } else if a[0] + a[1] == 3 {
                3
            } else {
                a[0].max(a[1])
            }
        })
        .unwrap();
        let o = oracle(ClassExpr::table(t));
        let g = gen_vertex_cover(&Graph::complete(3), &o).unwrap();
        assert_eq!(g.instance.constraints().len(), 9);
        assert_eq!(min_backdoor(&g, &o), 2);
    }

    #[test]
    fn boolean_cover_examples() {
        let o = oracle(ClassExpr::max());
        // not every binary Boolean language is max-closed
        assert!(gen_boolean_cover(
            &HittingSetInstance::new(3, 3, vec![vec![0, 1, 2]]).unwrap(),
            &o
        )
        .is_err());
        let edge = gen_boolean_cover(&Graph::complete(2).as_hitting_set(), &o).unwrap();
        assert!(!edge.instance.constraints().is_empty());
        assert_eq!(min_backdoor(&edge, &o), 1);
        let empty = gen_boolean_cover(&HittingSetInstance::new(3, 2, vec![]).unwrap(), &o).unwrap();
        assert_eq!(min_backdoor(&empty, &o), 0);

        // the Boolean majority operation preserves every binary Boolean relation
        let maj = oracle(ClassExpr::dual_discriminator());
        let hs = HittingSetInstance::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let g = gen_boolean_cover(&hs, &maj).unwrap();
        assert_eq!(
            g.instance.constraints()[0].relation(),
            &rel(3, 2, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])
        );
        assert_eq!(min_backdoor(&g, &maj), 1);
    }

    #[test]
    fn sample_relation_is_exact() {
        let g = gen_single_constraint(&sample_sets(), &sample_flags()).unwrap();
        let expected = Relation::new(
            7,
            8,
            [
                [2, 2, 3, 2, 2, 2, 2],
                [2, 2, 2, 3, 2, 2, 2],
                [2, 2, 2, 2, 3, 2, 2],
                [4, 5, 4, 4, 4, 4, 4],
                [4, 4, 4, 4, 5, 5, 4],
                [7, 6, 6, 6, 6, 6, 6],
                [6, 6, 7, 6, 6, 6, 7],
            ]
            .map(|r| r.to_vec()),
        )
        .unwrap();
        assert_eq!(g.instance.constraints().len(), 1);
        assert_eq!(g.instance.constraints()[0].relation(), &expected);
        assert_eq!(g.instance.domain_size(), 8);
    }

    #[test]
    fn sample_class_matches_flags() {
        let o = oracle(ClassExpr::table(sample_class_table(8)));
        assert_eq!(single_constraint_flags(3, &o).unwrap(), sample_flags());
        let g = gen_single_constraint(&sample_sets(), &sample_flags()).unwrap();
        assert_eq!(min_backdoor(&g, &o), 2);
        // every size-2 backdoor is a hitting set
        let l = BackdoorLimits::default();
        for a in 0..7 {
            for b in a + 1..7 {
                let is_bd =
                    crate::backdoor::check_backdoor_naive(&g.instance, &[a, b], &o, &l).unwrap();
                assert_eq!(is_bd, sample_sets().is_hit_by(&[a, b]), "{{{a},{b}}}");
            }
        }
    }

    #[test]
    fn single_constraint_small_cases() {
        let one = HittingSetInstance::new(3, 3, vec![vec![0, 1, 2]]).unwrap();
        let g = gen_single_constraint(&one, &[false]).unwrap();
        assert_eq!(g.instance.constraints()[0].relation().len(), 2);
        assert_eq!(min_backdoor(&g, &oracle(ClassExpr::max())), 1);
        let empty =
            gen_single_constraint(&HittingSetInstance::new(4, 3, vec![]).unwrap(), &[]).unwrap();
        assert!(empty.instance.constraints().is_empty());
        assert!(gen_single_constraint(&one, &[]).is_err());
    }

    #[test]
    fn boolean_sets_examples() {
        let o = oracle(ClassExpr::max());
        let hs = HittingSetInstance::new(4, 3, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let g = gen_boolean_sets(&hs, &o).unwrap();
        let two = gadget_relation(GadgetKind::Two, 3, 0).unwrap();
        assert!(g
            .instance
            .constraints()
            .iter()
            .all(|c| c.relation() == &two));
        assert_eq!(min_backdoor(&g, &o), 1);
        let empty = gen_boolean_sets(&HittingSetInstance::new(3, 3, vec![]).unwrap(), &o).unwrap();
        assert_eq!(min_backdoor(&empty, &o), 0);
    }

    fn tsi_pair() -> Language {
        Language::new([
            rel(2, 2, &[&[0, 0], &[0, 1], &[1, 0]]),
            rel(2, 2, &[&[0, 1], &[1, 0], &[1, 1]]),
        ])
    }

    #[test]
    fn witness_search() {
        let tsi = oracle(ClassExpr::family(IdentityFamily::Tsi));
        let w = find_non_helly_witness(&tsi, 2, 2, 2).unwrap().unwrap();
        assert_eq!(w.language(), &tsi_pair());
        assert_eq!(
            find_non_helly_witness(&oracle(ClassExpr::max()), 2, 2, 3).unwrap(),
            None
        );
        let both = oracle(ClassExpr::Union(vec![ClassExpr::max(), ClassExpr::min()]));
        let w = find_non_helly_witness(&both, 2, 2, 2).unwrap().unwrap();
        assert_eq!(w.language().len(), 2);
        assert!(NonHellyWitness::new(Language::new([rel(1, 2, &[&[0]])]), &tsi).is_err());
    }

    #[test]
    fn bijection_chain_layout() {
        let tsi = oracle(ClassExpr::family(IdentityFamily::Tsi));
        let w = NonHellyWitness::new(tsi_pair(), &tsi).unwrap();
        let hs = HittingSetInstance::new(7, 3, vec![vec![1, 3, 4], vec![0, 3, 5]]).unwrap();
        let (g, blocks) = gen_bijection_chain(&hs, &w, &tsi).unwrap();
        assert_eq!(g.instance.num_vars(), 7 + 2 * 2 * 2);
        // one y constraint, p+1 chain links and one z constraint per set
        assert_eq!(g.instance.constraints().len(), 2 * (1 + 4 + 1));
        let all: Vec<&BTreeSet<Value>> = blocks.iter().flat_map(|b| &b.domains).collect();
        for (i, a) in all.iter().enumerate() {
            assert_eq!(a.len(), 2);
            for b in &all[i + 1..] {
                assert!(a.is_disjoint(b));
            }
        }
        let empty = gen_bijection_chain(&HittingSetInstance::new(3, 2, vec![]).unwrap(), &w, &tsi)
            .unwrap()
            .0;
        assert_eq!(empty.instance.num_vars(), 3);
        assert!(empty.instance.constraints().is_empty());
    }

    #[test]
    fn metadata_block() {
        let g = gen_single_constraint(&sample_sets(), &sample_flags()).unwrap();
        let file = g.to_file();
        let meta = file.metadata.unwrap();
        assert_eq!(meta["ground_truth"], 2);
        assert_eq!(meta["construction"], "single-constraint");
    }
}
