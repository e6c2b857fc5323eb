//! Strong backdoor verification and detection.
//!
//! A set `B` of variables is a strong backdoor to a class when every
//! complete assignment of `B` leaves an instance whose language is in the
//! class. Two verifiers are provided: [`check_backdoor_naive`] enumerates all
//! `d^|B|` assignments, while [`check_backdoor_constraintwise`] works constraint by
//! constraint and is exponential only in the number of constraints.
//! [`find_backdoor_fpt`] is the bounded search tree for classes with a finite
//! Helly number; [`find_backdoor_bruteforce`] is the reference oracle.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::class::ClassOracle;
use crate::error::{Error, Result};
use crate::gac::solve_mac;
use crate::instance::{Constraint, CspInstance, PartialAssignment};
use crate::language::Language;
use crate::relation::{Relation, Value};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackdoorLimits {
    /// Largest `d^|B|` the naive checker will enumerate.
    pub naive_assignments: u128,
    /// Largest number of (constraint subset, local assignment) pairs the
    /// constraint-wise checker will visit.
    pub constraintwise_pairs: u128,
    /// Largest cumulative `C(n,s)·d^s` the brute-force search will visit.
    pub brute_work: u128,
}

impl Default for BackdoorLimits {
    fn default() -> Self {
        BackdoorLimits {
            naive_assignments: 1_000_000,
            constraintwise_pairs: 10_000_000,
            brute_work: 10_000_000,
        }
    }
}

fn normalize(instance: &CspInstance, backdoor: &[usize]) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = backdoor.iter().copied().collect();
    if let Some(&x) = set.iter().find(|&&x| x >= instance.num_vars()) {
        return Err(Error::UnknownVariable {
            var: x,
            num_vars: instance.num_vars(),
        });
    }
    Ok(set.into_iter().collect())
}

/// Calls `f` on every assignment of `vars` over `0..d`, first variable most
/// significant. Stops early when `f` returns `Ok(false)`.
fn for_each_assignment(
    vars: &[usize],
    d: u32,
    mut f: impl FnMut(&PartialAssignment) -> Result<bool>,
) -> Result<bool> {
    let mut values = vec![0 as Value; vars.len()];
    loop {
        let assignment: PartialAssignment =
            vars.iter().copied().zip(values.iter().copied()).collect();
        if !f(&assignment)? {
            return Ok(false);
        }
        let mut k = vars.len();
        loop {
            if k == 0 {
                return Ok(true);
            }
            k -= 1;
            values[k] += 1;
            if values[k] < d {
                break;
            }
            values[k] = 0;
        }
    }
}

/// Enumerates every assignment of `backdoor` and tests the residual language.
pub fn check_backdoor_naive(
    instance: &CspInstance,
    backdoor: &[usize],
    oracle: &ClassOracle,
    limits: &BackdoorLimits,
) -> Result<bool> {
    let vars = normalize(instance, backdoor)?;
    let needed = (instance.domain_size() as u128)
        .checked_pow(vars.len() as u32)
        .unwrap_or(u128::MAX);
    if needed > limits.naive_assignments {
        return Err(Error::Resource {
            what: "naive backdoor assignments",
            needed,
            cap: limits.naive_assignments,
        });
    }
    for_each_assignment(&vars, instance.domain_size(), |a| {
        let residual = instance.apply_assignment(a)?;
        oracle.member(&residual.language())
    })
}

/// One locally consistent assignment of `B ∩ S` for a constraint `(S, R)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalEntry {
    pub assignment: PartialAssignment,
    /// Tuples of `R` agreeing with the assignment (full arity).
    pub subrelation: Relation,
    /// The subrelation with the assigned positions projected away.
    pub residual: Relation,
}

/// The assignments of `B ∩ S` that leave `R` nonempty, found by splitting on
/// the variables of `B ∩ S` in ascending order and branching only on values
/// present in the current subrelation.
pub fn local_assignments(constraint: &Constraint, backdoor: &BTreeSet<usize>) -> Vec<LocalEntry> {
    let mut positions: Vec<(usize, usize)> = constraint
        .scope()
        .iter()
        .enumerate()
        .filter(|(_, x)| backdoor.contains(x))
        .map(|(p, &x)| (x, p))
        .collect();
    positions.sort_unstable();
    let keep: Vec<usize> = (0..constraint.scope().len())
        .filter(|p| !positions.iter().any(|&(_, q)| q == *p))
        .collect();
    let mut out = Vec::new();
    if !constraint.relation().is_empty() {
        split(
            constraint.relation().clone(),
            &positions,
            PartialAssignment::new(),
            &keep,
            &mut out,
        );
    }
    out
}

fn split(
    rel: Relation,
    positions: &[(usize, usize)],
    assignment: PartialAssignment,
    keep: &[usize],
    out: &mut Vec<LocalEntry>,
) {
    let Some((&(x, p), rest)) = positions.split_first() else {
        let residual = rel.project(keep);
        out.push(LocalEntry {
            assignment,
            subrelation: rel,
            residual,
        });
        return;
    };
    let present: BTreeSet<Value> = rel.tuples().iter().map(|t| t[p]).collect();
    for v in present {
        let mut next = assignment.clone();
        next.insert(x, v);
        split(rel.select(p, v), rest, next, keep, out);
    }
}

/// Constraint-wise backdoor checking with a cache of local assignments.
pub struct ConstraintwiseChecker<'a> {
    instance: &'a CspInstance,
    oracle: &'a ClassOracle,
    limits: BackdoorLimits,
    cache: HashMap<(usize, Vec<usize>), Rc<Vec<LocalEntry>>>,
}

impl<'a> ConstraintwiseChecker<'a> {
    pub fn new(instance: &'a CspInstance, oracle: &'a ClassOracle, limits: BackdoorLimits) -> Self {
        ConstraintwiseChecker {
            instance,
            oracle,
            limits,
            cache: HashMap::new(),
        }
    }

    fn entries(&mut self, index: usize, backdoor: &BTreeSet<usize>) -> Rc<Vec<LocalEntry>> {
        let c = &self.instance.constraints()[index];
        let key: Vec<usize> = c
            .scope()
            .iter()
            .copied()
            .filter(|x| backdoor.contains(x))
            .collect();
        self.cache
            .entry((index, key))
            .or_insert_with(|| Rc::new(local_assignments(c, backdoor)))
            .clone()
    }

    /// Is `backdoor` a strong backdoor for the sub-instance made of the
    /// constraints at `indices`?
    ///
    /// For every nonempty subset `C'` of those constraints and every choice of
    /// one local assignment per constraint of `C'` that agree on shared
    /// variables, the language of the chosen residual relations must be a
    /// member.
    pub fn check(&mut self, indices: &[usize], backdoor: &BTreeSet<usize>) -> Result<bool> {
        let lists: Vec<Rc<Vec<LocalEntry>>> =
            indices.iter().map(|&i| self.entries(i, backdoor)).collect();
        let needed = lists
            .iter()
            .fold(1u128, |acc, l| acc.saturating_mul(1 + l.len() as u128));
        if needed > self.limits.constraintwise_pairs {
            return Err(Error::Resource {
                what: "constraint-wise backdoor check",
                needed,
                cap: self.limits.constraintwise_pairs,
            });
        }
        let mut chosen: Vec<&Relation> = Vec::with_capacity(lists.len());
        let mut merged = PartialAssignment::new();
        visit(&lists, 0, &mut merged, &mut chosen, self.oracle)
    }
}

fn visit<'e>(
    lists: &'e [Rc<Vec<LocalEntry>>],
    depth: usize,
    merged: &mut PartialAssignment,
    chosen: &mut Vec<&'e Relation>,
    oracle: &ClassOracle,
) -> Result<bool> {
    if depth == lists.len() {
        if chosen.is_empty() {
            return Ok(true);
        }
        return oracle.member(&Language::new(chosen.iter().map(|&r| r.clone())));
    }
    // leave this constraint out of C'
    if !visit(lists, depth + 1, merged, chosen, oracle)? {
        return Ok(false);
    }
    for entry in lists[depth].iter() {
        if entry
            .assignment
            .iter()
            .any(|(x, v)| merged.get(x).is_some_and(|w| w != v))
        {
            continue;
        }
        let added: Vec<usize> = entry
            .assignment
            .keys()
            .copied()
            .filter(|x| !merged.contains_key(x))
            .collect();
        for &x in &added {
            merged.insert(x, entry.assignment[&x]);
        }
        chosen.push(&entry.residual);
        let ok = visit(lists, depth + 1, merged, chosen, oracle);
        chosen.pop();
        for x in &added {
            merged.remove(x);
        }
        if !ok? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Constraint-wise verification of a strong backdoor over the whole instance.
pub fn check_backdoor_constraintwise(
    instance: &CspInstance,
    backdoor: &[usize],
    oracle: &ClassOracle,
    limits: &BackdoorLimits,
) -> Result<bool> {
    let vars: BTreeSet<usize> = normalize(instance, backdoor)?.into_iter().collect();
    let all: Vec<usize> = (0..instance.constraints().len()).collect();
    ConstraintwiseChecker::new(instance, oracle, limits.clone()).check(&all, &vars)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub backdoor: Option<Vec<usize>>,
    pub nodes_expanded: u64,
    pub membership_tests: u64,
}

/// Calls `f` on every `size`-subset of `0..n` in lexicographic order.
fn for_each_combination(
    n: usize,
    size: usize,
    mut f: impl FnMut(&[usize]) -> Result<bool>,
) -> Result<bool> {
    if size > n {
        return Ok(true);
    }
    let mut combo: Vec<usize> = (0..size).collect();
    'next: loop {
        if !f(&combo)? {
            return Ok(false);
        }
        let mut i = size;
        while i > 0 {
            i -= 1;
            if combo[i] < n - size + i {
                combo[i] += 1;
                for j in i + 1..size {
                    combo[j] = combo[j - 1] + 1;
                }
                continue 'next;
            }
        }
        return Ok(true);
    }
}

/// Bounded search tree for classes that are `helly`-Helly.
///
/// Each node holds a partial backdoor `B`. The node scans the `helly`-subsets
/// of constraints in lexicographic order and runs the constraint-wise check on
/// each; if all pass, `B` is returned. Otherwise the node branches on the
/// first failing subset, adding one variable of its scopes (ascending) per
/// child, and never grows `B` past `k`.
pub fn find_backdoor_fpt(
    instance: &CspInstance,
    oracle: &ClassOracle,
    k: usize,
    helly: usize,
    limits: &BackdoorLimits,
) -> Result<SearchOutcome> {
    if helly == 0 {
        return Err(Error::InvalidClass("Helly bound must be at least 1".into()));
    }
    let start = oracle.tests();
    let mut tree = Tree {
        instance,
        checker: ConstraintwiseChecker::new(instance, oracle, limits.clone()),
        results: HashMap::new(),
        size: helly.min(instance.constraints().len()),
        k,
        nodes: 0,
    };
    let found = tree.expand(&mut BTreeSet::new())?;
    Ok(SearchOutcome {
        backdoor: found.map(|b| b.into_iter().collect()),
        nodes_expanded: tree.nodes,
        membership_tests: oracle.tests() - start,
    })
}

struct Tree<'a> {
    instance: &'a CspInstance,
    checker: ConstraintwiseChecker<'a>,
    results: HashMap<(Vec<usize>, Vec<usize>), bool>,
    size: usize,
    k: usize,
    nodes: u64,
}

impl Tree<'_> {
    fn first_failing_subset(&mut self, backdoor: &BTreeSet<usize>) -> Result<Option<Vec<usize>>> {
        let m = self.instance.constraints().len();
        let mut failing = None;
        let instance = self.instance;
        for_each_combination(m, self.size, |combo| {
            let scopes = instance.scope_union(combo);
            let relevant: BTreeSet<usize> = backdoor.intersection(&scopes).copied().collect();
            let key = (combo.to_vec(), relevant.iter().copied().collect::<Vec<_>>());
            let ok = match self.results.get(&key) {
                Some(&ok) => ok,
                None => {
                    let ok = self.checker.check(combo, &relevant)?;
                    self.results.insert(key, ok);
                    ok
                }
            };
            if !ok {
                failing = Some(combo.to_vec());
            }
            Ok(ok)
        })?;
        Ok(failing)
    }

    fn expand(&mut self, backdoor: &mut BTreeSet<usize>) -> Result<Option<BTreeSet<usize>>> {
        self.nodes += 1;
        let Some(failing) = self.first_failing_subset(backdoor)? else {
            return Ok(Some(backdoor.clone()));
        };
        if backdoor.len() >= self.k {
            return Ok(None);
        }
        let candidates: Vec<usize> = self
            .instance
            .scope_union(&failing)
            .into_iter()
            .filter(|x| !backdoor.contains(x))
            .collect();
        for x in candidates {
            backdoor.insert(x);
            let found = self.expand(backdoor)?;
            backdoor.remove(&x);
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Smallest backdoor of size at most `k`, trying subsets by increasing size
/// then lexicographically, each with the naive checker.
pub fn find_backdoor_bruteforce(
    instance: &CspInstance,
    oracle: &ClassOracle,
    k: usize,
    limits: &BackdoorLimits,
) -> Result<SearchOutcome> {
    let start = oracle.tests();
    let n = instance.num_vars();
    let d = instance.domain_size() as u128;
    let mut work: u128 = 0;
    let mut checked = 0u64;
    for size in 0..=k.min(n) {
        work = work.saturating_add(binomial(n, size).saturating_mul(d.saturating_pow(size as u32)));
        if work > limits.brute_work {
            return Err(Error::Resource {
                what: "brute-force backdoor search",
                needed: work,
                cap: limits.brute_work,
            });
        }
        let mut found = None;
        for_each_combination(n, size, |combo| {
            checked += 1;
            if check_backdoor_naive(instance, combo, oracle, limits)? {
                found = Some(combo.to_vec());
                return Ok(false);
            }
            Ok(true)
        })?;
        if found.is_some() {
            return Ok(SearchOutcome {
                backdoor: found,
                nodes_expanded: checked,
                membership_tests: oracle.tests() - start,
            });
        }
    }
    Ok(SearchOutcome {
        backdoor: None,
        nodes_expanded: checked,
        membership_tests: oracle.tests() - start,
    })
}

/// Branches on the backdoor variables (first variable most significant,
/// values ascending) and solves each residual instance with GAC-maintaining
/// search. Returns the first solution found, as values for all variables.
///
/// The backdoor is verified with the naive checker first; a set that is not
/// a backdoor is refused.
pub fn solve_via_backdoor(
    instance: &CspInstance,
    backdoor: &[usize],
    oracle: &ClassOracle,
    limits: &BackdoorLimits,
) -> Result<Option<Vec<Value>>> {
    let vars = normalize(instance, backdoor)?;
    if !check_backdoor_naive(instance, &vars, oracle, limits)? {
        return Err(Error::Refused(format!(
            "{vars:?} is not a strong backdoor to the class"
        )));
    }
    let free: Vec<usize> = (0..instance.num_vars())
        .filter(|x| vars.binary_search(x).is_err())
        .collect();
    let mut solution = None;
    for_each_assignment(&vars, instance.domain_size(), |a| {
        let residual = instance.apply_assignment(a)?;
        if let Some(rest) = solve_mac(&residual) {
            let mut full = vec![0 as Value; instance.num_vars()];
            for (&x, &v) in a {
                full[x] = v;
            }
            for (&x, v) in free.iter().zip(rest) {
                full[x] = v;
            }
            solution = Some(full);
            return Ok(false);
        }
        Ok(true)
    })?;
    Ok(solution)
}
