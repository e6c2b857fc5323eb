//! Identity-constrained polymorphism search and the TSI set-function test.
//!
//! Both searches reduce to the same problem: fill the cells of an unknown
//! table with values so that every "check" (a list of cells whose values must
//! form a tuple of some relation) is satisfied. Identities fix or link cells
//! before the search starts; checks are evaluated as soon as their last cell
//! receives a value.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::{BijectionMap, Language};
use crate::operation::{decode_index, table_len, LocalOperation};
use crate::relation::{Relation, Value};

/// Identity systems the search understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityFamily {
    /// Binary, idempotent, commutative, associative.
    Semilattice,
    /// Ternary near-unanimity.
    Majority,
    /// `k`-ary near-unanimity, `k ≥ 3`.
    NearUnanimity(usize),
    /// `f(x,x,y) = f(y,x,x) = y`.
    Maltsev,
    /// Totally symmetric idempotent operations of all arities.
    Tsi,
}

impl IdentityFamily {
    pub fn arity(self) -> Option<usize> {
        match self {
            IdentityFamily::Semilattice => Some(2),
            IdentityFamily::Majority | IdentityFamily::Maltsev => Some(3),
            IdentityFamily::NearUnanimity(k) => Some(k),
            IdentityFamily::Tsi => None,
        }
    }

    pub fn name(self) -> String {
        match self {
            IdentityFamily::Semilattice => "semilattice".into(),
            IdentityFamily::Majority => "majority".into(),
            IdentityFamily::NearUnanimity(k) => format!("near_unanimity({k})"),
            IdentityFamily::Maltsev => "maltsev".into(),
            IdentityFamily::Tsi => "tsi".into(),
        }
    }

    /// Checks that a complete table on `0..n` satisfies the identities.
    pub fn satisfied_by(self, n: usize, arity: usize, table: &[Value]) -> bool {
        let Some(expected_arity) = self.arity() else {
            return false;
        };
        if arity != expected_arity || table.len() != n.pow(arity as u32) {
            return false;
        }
        let f = |args: &[usize]| table[args.iter().fold(0, |acc, &a| acc * n + a)] as usize;
        match self {
            IdentityFamily::Semilattice => (0..n).all(|x| {
                f(&[x, x]) == x
                    && (0..n).all(|y| {
                        f(&[x, y]) == f(&[y, x])
                            && (0..n).all(|z| f(&[f(&[x, y]), z]) == f(&[x, f(&[y, z])]))
                    })
            }),
            IdentityFamily::Majority | IdentityFamily::NearUnanimity(_) => {
                let mut args = vec![0 as Value; arity];
                (0..table.len()).all(|idx| {
                    decode_index(idx, n as u32, &mut args);
                    match near_unanimity_value(&args) {
                        Some(v) => table[idx] == v,
                        None => true,
                    }
                })
            }
            IdentityFamily::Maltsev => {
                (0..n).all(|x| (0..n).all(|y| f(&[x, x, y]) == y && f(&[y, x, x]) == y))
            }
            IdentityFamily::Tsi => false,
        }
    }
}

/// The value all-but-at-most-one of `args` agree on, if any.
fn near_unanimity_value(args: &[Value]) -> Option<Value> {
    let a = args.len();
    let mut counts: BTreeMap<Value, usize> = BTreeMap::new();
    for &v in args {
        *counts.entry(v).or_default() += 1;
    }
    counts
        .into_iter()
        .find(|&(_, c)| c + 1 >= a)
        .map(|(v, _)| v)
}

/// Resource caps for the membership searches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchLimits {
    /// Largest `|D(Γ)|` for table searches.
    pub max_family_domain: usize,
    /// Largest arity for table searches.
    pub max_family_arity: usize,
    /// Largest tuple count per relation.
    pub max_tuples: usize,
    /// Largest number of distinct checks a table search may build.
    pub max_checks: usize,
    /// Largest number of search decisions.
    pub max_nodes: u64,
    /// Largest number of row subsets enumerated per relation by the TSI test.
    pub max_tsi_subsets: u64,
    /// Largest number of values in one domain component for the TSI test.
    pub max_tsi_domain: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_family_domain: 6,
            max_family_arity: 4,
            max_tuples: 32,
            max_checks: 2_000_000,
            max_nodes: 10_000_000,
            max_tsi_subsets: 1 << 20,
            max_tsi_domain: 64,
        }
    }
}

struct Check {
    entries: Vec<usize>,
    distinct: usize,
    rel: usize,
}

type Extra<'a> = Box<dyn Fn(&[Option<Value>]) -> bool + 'a>;

/// Backtracking over "classes" (groups of linked cells).
struct Engine<'a> {
    num_values: Value,
    forced: Vec<Option<Value>>,
    checks: Vec<Check>,
    watchers: Vec<Vec<usize>>,
    remaining: Vec<usize>,
    relations: &'a [Relation],
    value: Vec<Option<Value>>,
    extra: Option<Extra<'a>>,
    max_nodes: u64,
    nodes: u64,
}

impl<'a> Engine<'a> {
    fn new(
        num_classes: usize,
        num_values: Value,
        forced: Vec<Option<Value>>,
        checks: Vec<Check>,
        relations: &'a [Relation],
        max_nodes: u64,
    ) -> Self {
        let mut watchers = vec![Vec::new(); num_classes];
        for (i, c) in checks.iter().enumerate() {
            let distinct: BTreeSet<usize> = c.entries.iter().copied().collect();
            for k in distinct {
                watchers[k].push(i);
            }
        }
        let remaining = checks.iter().map(|c| c.distinct).collect();
        Engine {
            num_values,
            forced,
            checks,
            watchers,
            remaining,
            relations,
            value: vec![None; num_classes],
            extra: None,
            max_nodes,
            nodes: 0,
        }
    }

    fn evaluate(&self, check: &Check) -> bool {
        let t: Vec<Value> = check
            .entries
            .iter()
            .map(|&k| self.value[k].expect("complete check"))
            .collect();
        self.relations[check.rel].contains(&t)
    }

    fn assign(&mut self, class: usize, v: Value) -> bool {
        self.value[class] = Some(v);
        let mut ok = true;
        for idx in 0..self.watchers[class].len() {
            let ci = self.watchers[class][idx];
            self.remaining[ci] -= 1;
            if ok && self.remaining[ci] == 0 && !self.evaluate(&self.checks[ci]) {
                ok = false;
            }
        }
        if ok {
            if let Some(extra) = &self.extra {
                ok = extra(&self.value);
            }
        }
        ok
    }

    fn unassign(&mut self, class: usize) {
        self.value[class] = None;
        for &ci in &self.watchers[class] {
            self.remaining[ci] += 1;
        }
    }

    fn solve(mut self) -> Result<Option<Vec<Value>>> {
        // checks with no cells at all
        if self
            .checks
            .iter()
            .any(|c| c.distinct == 0 && !self.evaluate(c))
        {
            return Ok(None);
        }
        let n = self.value.len();
        for k in 0..n {
            if let Some(v) = self.forced[k] {
                if !self.assign(k, v) {
                    return Ok(None);
                }
            }
        }
        let free: Vec<usize> = (0..n).filter(|&k| self.forced[k].is_none()).collect();
        let mut next = vec![0 as Value; free.len()];
        let mut i = 0usize;
        loop {
            if i == free.len() {
                return Ok(Some(
                    self.value
                        .iter()
                        .map(|v| v.expect("all assigned"))
                        .collect(),
                ));
            }
            let k = free[i];
            if self.value[k].is_some() {
                self.unassign(k);
            }
            let mut placed = false;
            while next[i] < self.num_values {
                let v = next[i];
                next[i] += 1;
                self.nodes += 1;
                if self.nodes > self.max_nodes {
                    return Err(Error::Resource {
                        what: "search nodes",
                        needed: self.nodes as u128,
                        cap: self.max_nodes as u128,
                    });
                }
                if self.assign(k, v) {
                    placed = true;
                    break;
                }
                self.unassign(k);
            }
            if placed {
                i += 1;
                if i < free.len() {
                    next[i] = 0;
                }
            } else {
                next[i] = 0;
                if i == 0 {
                    return Ok(None);
                }
                i -= 1;
            }
        }
    }
}

/// Renames `D(Γ)` onto `0..n` in increasing order.
fn compress(language: &Language) -> (Vec<Value>, Language) {
    let domain = language.active_domain();
    let target: BTreeSet<Value> = (0..domain.len() as Value).collect();
    let phi = BijectionMap::monotone(&domain, &target).expect("same size");
    let local = phi
        .rename_language(language)
        .expect("every value has an image");
    (domain.into_iter().collect(), local)
}

fn check_tuple_cap(language: &Language, limits: &SearchLimits) -> Result<()> {
    if let Some(r) = language
        .relations()
        .iter()
        .find(|r| r.len() > limits.max_tuples)
    {
        return Err(Error::Resource {
            what: "tuples per relation",
            needed: r.len() as u128,
            cap: limits.max_tuples as u128,
        });
    }
    Ok(())
}

/// Looks for an operation on `D(Γ)` satisfying the identities of `family`
/// and preserving every relation of `Γ`.
///
/// Cells are decided in lexicographic order of their argument tuple, values
/// in increasing order, so the witness is deterministic.
pub fn search_polymorphism(
    language: &Language,
    family: IdentityFamily,
    limits: &SearchLimits,
) -> Result<Option<LocalOperation>> {
    let arity = match family {
        IdentityFamily::Tsi => {
            return Err(Error::InvalidClass(
                "the TSI family is decided by tsi_member, not by table search".into(),
            ))
        }
        IdentityFamily::NearUnanimity(k) if k < 3 => {
            return Err(Error::InvalidClass(format!(
                "near-unanimity needs arity at least 3, got {k}"
            )))
        }
        f => f.arity().expect("table family"),
    };
    if arity > limits.max_family_arity {
        return Err(Error::Resource {
            what: "operation arity",
            needed: arity as u128,
            cap: limits.max_family_arity as u128,
        });
    }
    let (values, local) = compress(language);
    let n = values.len();
    if n > limits.max_family_domain {
        return Err(Error::Resource {
            what: "domain size",
            needed: n as u128,
            cap: limits.max_family_domain as u128,
        });
    }
    check_tuple_cap(&local, limits)?;
    let num_cells = table_len(arity, n as u32).expect("capped");

    // identities: links and forced cells
    let mut args = vec![0 as Value; arity];
    let mut rep = vec![0usize; num_cells];
    let mut cell_forced: Vec<Option<Value>> = vec![None; num_cells];
    for (idx, slot) in rep.iter_mut().enumerate() {
        decode_index(idx, n as u32, &mut args);
        *slot = idx;
        cell_forced[idx] = match family {
            IdentityFamily::Semilattice => {
                let (x, y) = (args[0], args[1]);
                *slot = (x.min(y) as usize) * n + y.max(x) as usize;
                (x == y).then_some(x)
            }
            IdentityFamily::Majority | IdentityFamily::NearUnanimity(_) => {
                near_unanimity_value(&args)
            }
            IdentityFamily::Maltsev => {
                if args[0] == args[1] {
                    Some(args[2])
                } else if args[1] == args[2] {
                    Some(args[0])
                } else {
                    None
                }
            }
            IdentityFamily::Tsi => unreachable!(),
        };
    }
    let mut class_of = vec![0usize; num_cells];
    let mut class_ids: BTreeMap<usize, usize> = BTreeMap::new();
    for idx in 0..num_cells {
        let next = class_ids.len();
        class_of[idx] = *class_ids.entry(rep[idx]).or_insert(next);
    }
    let num_classes = class_ids.len();
    let mut forced: Vec<Option<Value>> = vec![None; num_classes];
    for idx in 0..num_cells {
        if let Some(v) = cell_forced[idx] {
            let k = class_of[idx];
            match forced[k] {
                Some(w) if w != v => return Ok(None),
                _ => forced[k] = Some(v),
            }
        }
    }

    // preservation checks, one per choice of `arity` rows
    let mut checks = Vec::new();
    let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
    for (ri, r) in local.relations().iter().enumerate() {
        let t = r.len();
        if t == 0 || r.arity() == 0 {
            continue;
        }
        let combos = t.checked_pow(arity as u32).unwrap_or(usize::MAX);
        if combos.saturating_add(seen.len()) > limits.max_checks {
            return Err(Error::Resource {
                what: "preservation checks",
                needed: combos.saturating_add(seen.len()) as u128,
                cap: limits.max_checks as u128,
            });
        }
        let rows = r.tuples();
        let mut pick = vec![0usize; arity];
        for combo in 0..combos {
            decode_pick(combo, t, &mut pick);
            if pick.iter().all(|&p| p == pick[0]) {
                continue;
            }
            let entries: Vec<usize> = (0..r.arity())
                .map(|j| {
                    let cell = pick
                        .iter()
                        .fold(0usize, |acc, &p| acc * n + rows[p][j] as usize);
                    class_of[cell]
                })
                .collect();
            if seen.insert((ri, entries.clone())) {
                let distinct = entries.iter().collect::<BTreeSet<_>>().len();
                checks.push(Check {
                    entries,
                    distinct,
                    rel: ri,
                });
            }
        }
    }

    let mut engine = Engine::new(
        num_classes,
        n as Value,
        forced,
        checks,
        local.relations(),
        limits.max_nodes,
    );
    if family == IdentityFamily::Semilattice {
        let class_of = class_of.clone();
        engine.extra = Some(Box::new(move |value: &[Option<Value>]| {
            semilattice_associative_so_far(n, &class_of, value)
        }));
    }
    Ok(engine.solve()?.map(|class_values| LocalOperation {
        values,
        table: class_of.iter().map(|&k| class_values[k]).collect(),
        arity,
    }))
}

fn decode_pick(mut combo: usize, t: usize, pick: &mut [usize]) {
    for slot in pick.iter_mut().rev() {
        *slot = combo % t;
        combo /= t;
    }
}

fn semilattice_associative_so_far(n: usize, class_of: &[usize], value: &[Option<Value>]) -> bool {
    let f = |x: usize, y: usize| value[class_of[x * n + y]].map(|v| v as usize);
    for x in 0..n {
        for y in 0..n {
            let Some(xy) = f(x, y) else { continue };
            for z in 0..n {
                let (Some(left), Some(yz)) = (f(xy, z), f(y, z)) else {
                    continue;
                };
                if let Some(right) = f(x, yz) {
                    if left != right {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// A totally symmetric idempotent operation written as a function of the set
/// of its arguments.
///
/// Only the sets the search had to decide are stored; singletons map to
/// their element and every other set maps to its maximum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetFunction {
    pub domain: Vec<Value>,
    /// Written as a list of `[set, value]` pairs, since JSON keys are strings.
    #[serde(with = "pairs")]
    pub values: BTreeMap<Vec<Value>, Value>,
}

mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    use crate::relation::Value;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Vec<Value>, Value>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<Vec<Value>, Value>, D::Error> {
        Ok(Vec::<(Vec<Value>, Value)>::deserialize(d)?
            .into_iter()
            .collect())
    }
}

impl SetFunction {
    /// `f(S)` for the set of values in `args` (order and repetition ignored).
    pub fn eval(&self, args: &[Value]) -> Option<Value> {
        let set: Vec<Value> = args
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        match set.len() {
            0 => None,
            1 => Some(set[0]),
            _ => Some(
                self.values
                    .get(&set)
                    .copied()
                    .unwrap_or(*set.last().expect("nonempty")),
            ),
        }
    }

    /// Direct verification: every relation, every nonempty set of at most
    /// `|D(Γ)|` tuples, maps to a tuple of the relation.
    pub fn preserves(&self, language: &Language, limits: &SearchLimits) -> Result<bool> {
        let bound = language.active_domain().len();
        for r in language.relations() {
            let t = r.len();
            if t > limits.max_tuples {
                return Err(Error::Resource {
                    what: "tuples per relation",
                    needed: t as u128,
                    cap: limits.max_tuples as u128,
                });
            }
            let mut ok = true;
            for_each_row_subset(t, bound.min(t), |subset| {
                let image: Vec<Value> = (0..r.arity())
                    .map(|j| {
                        let col: Vec<Value> = subset.iter().map(|&i| r.tuples()[i][j]).collect();
                        self.eval(&col).expect("nonempty subset")
                    })
                    .collect();
                ok = r.contains(&image);
                ok
            });
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Calls `f` on every nonempty subset of `0..t` of size at most `max_size`,
/// in order of increasing size then lexicographically. Stops when `f`
/// returns false.
fn for_each_row_subset(t: usize, max_size: usize, mut f: impl FnMut(&[usize]) -> bool) {
    for size in 1..=max_size.min(t) {
        let mut subset: Vec<usize> = (0..size).collect();
        'next: loop {
            if !f(&subset) {
                return;
            }
            let mut i = size;
            while i > 0 {
                i -= 1;
                if subset[i] < t - size + i {
                    subset[i] += 1;
                    for j in i + 1..size {
                        subset[j] = subset[j - 1] + 1;
                    }
                    continue 'next;
                }
            }
            break;
        }
    }
}

fn binomial_prefix_sum(t: usize, max_size: usize) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for k in 1..=max_size.min(t) {
        c = c * (t - k + 1) as u128 / k as u128;
        total += c;
    }
    total
}

/// Decides whether `Γ` has a TSI of arity `|D(Γ)|` and returns it as a set
/// function.
///
/// Independent domain components are searched separately; a set mixing
/// values of different components never occurs in a check and keeps the
/// default (maximum).
pub fn tsi_member(language: &Language, limits: &SearchLimits) -> Result<Option<SetFunction>> {
    let bound = language.active_domain().len();
    let mut values: BTreeMap<Vec<Value>, Value> = BTreeMap::new();
    for component in language.domain_components() {
        check_tuple_cap(&component, limits)?;
        match tsi_component(&component, bound, limits)? {
            Some(found) => values.extend(found),
            None => return Ok(None),
        }
    }
    Ok(Some(SetFunction {
        domain: language.active_domain().into_iter().collect(),
        values,
    }))
}

fn tsi_component(
    component: &Language,
    bound: usize,
    limits: &SearchLimits,
) -> Result<Option<BTreeMap<Vec<Value>, Value>>> {
    let (values, local) = compress(component);
    let n = values.len();
    if n > limits.max_tsi_domain {
        return Err(Error::Resource {
            what: "TSI component domain",
            needed: n as u128,
            cap: limits.max_tsi_domain as u128,
        });
    }
    let mut cell_of: HashMap<u64, usize> = HashMap::new();
    let mut masks: Vec<u64> = Vec::new();
    let mut checks = Vec::new();
    let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
    for (ri, r) in local.relations().iter().enumerate() {
        let t = r.len();
        let needed = binomial_prefix_sum(t, bound);
        if needed > limits.max_tsi_subsets as u128 {
            return Err(Error::Resource {
                what: "TSI row subsets",
                needed,
                cap: limits.max_tsi_subsets as u128,
            });
        }
        let rows = r.tuples();
        for_each_row_subset(t, bound.min(t), |subset| {
            if subset.len() < 2 {
                return true;
            }
            let entries: Vec<usize> = (0..r.arity())
                .map(|j| {
                    let mask = subset.iter().fold(0u64, |m, &i| m | (1u64 << rows[i][j]));
                    *cell_of.entry(mask).or_insert_with(|| {
                        masks.push(mask);
                        masks.len() - 1
                    })
                })
                .collect();
            if seen.insert((ri, entries.clone())) {
                let distinct = entries.iter().collect::<BTreeSet<_>>().len();
                checks.push(Check {
                    entries,
                    distinct,
                    rel: ri,
                });
            }
            true
        });
    }
    // decide cells in increasing mask order
    let mut order: Vec<usize> = (0..masks.len()).collect();
    order.sort_by_key(|&k| masks[k]);
    let mut rank = vec![0usize; masks.len()];
    for (pos, &k) in order.iter().enumerate() {
        rank[k] = pos;
    }
    for c in &mut checks {
        for e in &mut c.entries {
            *e = rank[*e];
        }
    }
    let sorted_masks: Vec<u64> = order.iter().map(|&k| masks[k]).collect();
    let forced: Vec<Option<Value>> = sorted_masks
        .iter()
        .map(|&m| (m.count_ones() == 1).then(|| m.trailing_zeros() as Value))
        .collect();
    let engine = Engine::new(
        sorted_masks.len(),
        n as Value,
        forced,
        checks,
        local.relations(),
        limits.max_nodes,
    );
    Ok(engine.solve()?.map(|cell_values| {
        sorted_masks
            .iter()
            .zip(cell_values)
            .filter(|(m, _)| m.count_ones() > 1)
            .map(|(&m, v)| {
                let set: Vec<Value> = (0..n)
                    .filter(|&i| m >> i & 1 == 1)
                    .map(|i| values[i])
                    .collect();
                (set, values[v as usize])
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operation::{preserves_language, Operation, OperationTable};
    use crate::relation::{gadget_relation, GadgetKind};

    fn r1() -> Relation {
        Relation::from_rows(&[[0, 0], [0, 1], [1, 0]])
    }

    fn r2() -> Relation {
        Relation::from_rows(&[[1, 1], [0, 1], [1, 0]])
    }

    fn neq3() -> Relation {
        Relation::infer(
            2,
            (0..3).flat_map(|a| (0..3).filter(move |&b| b != a).map(move |b| vec![a, b])),
        )
        .unwrap()
    }

    #[test]
    fn subsets_enumerated_in_order() {
        let mut seen = Vec::new();
        for_each_row_subset(4, 2, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(seen.len(), 4 + 6);
        assert_eq!(seen[4], vec![0, 1]);
        assert_eq!(seen[9], vec![2, 3]);
        let mut all = 0;
        for_each_row_subset(5, 5, |_| {
            all += 1;
            true
        });
        assert_eq!(all, 31);
        assert_eq!(binomial_prefix_sum(5, 5), 31);
        assert_eq!(binomial_prefix_sum(4, 2), 10);
    }

    #[test]
    fn semilattice_for_min_closed() {
        let lang = Language::new([r1()]);
        let op = search_polymorphism(&lang, IdentityFamily::Semilattice, &SearchLimits::default())
            .unwrap()
            .unwrap();
        // lexicographic value order finds min
        assert_eq!(op.eval(&[0, 1]), Some(0));
        assert!(preserves_language(&op, &lang));
        assert!(IdentityFamily::Semilattice.satisfied_by(2, 2, &op.table));
    }

    #[test]
    fn no_maltsev_for_inequality_with_constants() {
        let lang = Language::new([
            neq3(),
            Relation::from_rows(&[[0]]),
            Relation::from_rows(&[[1]]),
            Relation::from_rows(&[[2]]),
        ]);
        // x - y + z mod 3 is Maltsev but maps (0,1),(0,2),(0,1) to (0,0)
        let affine = OperationTable::from_fn(3, 3, |a| (a[0] + 3 - a[1] + a[2]) % 3).unwrap();
        assert!(IdentityFamily::Maltsev.satisfied_by(3, 3, affine.table()));
        assert!(!preserves_language(&affine, &lang));
        // oracle: all 3^12 tables with the Maltsev cells fixed
        let free: Vec<usize> = (0..27)
            .filter(|&i| {
                let (x, y, z) = (i / 9, i / 3 % 3, i % 3);
                x != y && y != z
            })
            .collect();
        assert_eq!(free.len(), 12);
        let mut found = 0;
        for code in 0..3usize.pow(12) {
            let mut c = code;
            let mut table: Vec<Value> = (0..27)
                .map(|i| {
                    let (x, y, z) = (i / 9, i / 3 % 3, i % 3);
                    if x == y {
                        z
                    } else {
                        x
                    }
                })
                .collect();
            for &cell in &free {
                table[cell] = (c % 3) as Value;
                c /= 3;
            }
            if preserves_language(&OperationTable::new(3, 3, table).unwrap(), &lang) {
                found += 1;
            }
        }
        assert_eq!(found, 0);
        assert_eq!(
            search_polymorphism(&lang, IdentityFamily::Maltsev, &SearchLimits::default()).unwrap(),
            None
        );
    }

    #[test]
    fn maltsev_for_cyclic_successor() {
        let succ = Relation::from_rows(&[[0, 1], [1, 2], [2, 0]]);
        let lang = Language::new([succ, Relation::from_rows(&[[0]])]);
        let affine = OperationTable::from_fn(3, 3, |a| (a[0] + 3 - a[1] + a[2]) % 3).unwrap();
        assert!(preserves_language(&affine, &lang));
        let op = search_polymorphism(&lang, IdentityFamily::Maltsev, &SearchLimits::default())
            .unwrap()
            .unwrap();
        assert!(preserves_language(&op, &lang));
        assert!(IdentityFamily::Maltsev.satisfied_by(3, 3, &op.table));
    }

    #[test]
    fn no_majority_for_one_in_three_gadgets() {
        let lang = Language::new([
            gadget_relation(GadgetKind::Two, 3, 0).unwrap(),
            gadget_relation(GadgetKind::Three, 3, 0).unwrap(),
        ]);
        // oracle: every ternary Boolean table satisfying the majority identities
        let mut any = false;
        for bits in 0u32..256 {
            let table: Vec<Value> = (0..8).map(|i| (bits >> i) & 1).collect();
            if !IdentityFamily::Majority.satisfied_by(2, 3, &table) {
                continue;
            }
            let op = OperationTable::new(3, 2, table).unwrap();
            any |= preserves_language(&op, &lang);
        }
        assert!(!any);
        assert_eq!(
            search_polymorphism(&lang, IdentityFamily::Majority, &SearchLimits::default()).unwrap(),
            None
        );
    }

    #[test]
    fn near_unanimity_forced_cells() {
        assert_eq!(near_unanimity_value(&[1, 1, 2, 1]), Some(1));
        assert_eq!(near_unanimity_value(&[1, 2, 2, 1]), None);
        assert_eq!(near_unanimity_value(&[3, 3, 3]), Some(3));
        let lang = Language::new([r1()]);
        let op = search_polymorphism(
            &lang,
            IdentityFamily::NearUnanimity(4),
            &SearchLimits::default(),
        )
        .unwrap()
        .unwrap();
        assert!(preserves_language(&op, &lang));
        assert!(IdentityFamily::NearUnanimity(4).satisfied_by(2, 4, &op.table));
        assert!(search_polymorphism(
            &lang,
            IdentityFamily::NearUnanimity(2),
            &SearchLimits::default()
        )
        .is_err());
        assert!(matches!(
            search_polymorphism(
                &lang,
                IdentityFamily::NearUnanimity(5),
                &SearchLimits::default()
            ),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn empty_language_has_every_polymorphism() {
        let op = search_polymorphism(
            &Language::empty(),
            IdentityFamily::Maltsev,
            &SearchLimits::default(),
        )
        .unwrap();
        assert!(op.is_some());
        let f = tsi_member(&Language::empty(), &SearchLimits::default())
            .unwrap()
            .unwrap();
        assert!(f.domain.is_empty());
    }

    #[test]
    fn domain_cap_is_a_resource_error() {
        let wide = Relation::infer(1, (0..7).map(|v| vec![v])).unwrap();
        let res = search_polymorphism(
            &Language::new([wide]),
            IdentityFamily::Semilattice,
            &SearchLimits::default(),
        );
        assert!(matches!(res, Err(Error::Resource { .. })));
    }

    #[test]
    fn tsi_fixtures() {
        let limits = SearchLimits::default();
        let f1 = tsi_member(&Language::new([r1()]), &limits)
            .unwrap()
            .unwrap();
        assert_eq!(f1.eval(&[0, 1]), Some(0));
        assert!(f1.preserves(&Language::new([r1()]), &limits).unwrap());
        let f2 = tsi_member(&Language::new([r2()]), &limits)
            .unwrap()
            .unwrap();
        assert_eq!(f2.eval(&[1, 0]), Some(1));
        assert_eq!(
            tsi_member(&Language::new([r1(), r2()]), &limits).unwrap(),
            None
        );
    }

    #[test]
    fn set_function_json_round_trip() {
        let f = SetFunction {
            domain: vec![0, 1],
            values: BTreeMap::from([(vec![0, 1], 0)]),
        };
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"domain":[0,1],"values":[[[0,1],0]]}"#);
        assert_eq!(serde_json::from_str::<SetFunction>(&text).unwrap(), f);
    }

    #[test]
    fn tsi_components_combine() {
        let limits = SearchLimits::default();
        let shifted = Relation::from_rows(&[[6, 6], [5, 6], [6, 5]]);
        let lang = Language::new([r1(), shifted]);
        let f = tsi_member(&lang, &limits).unwrap().unwrap();
        assert!(f.preserves(&lang, &limits).unwrap());
        assert_eq!(f.eval(&[0, 1]), Some(0));
        assert_eq!(f.eval(&[5, 6]), Some(6));
    }
}
