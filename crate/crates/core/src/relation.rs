//! Relations over a finite integer domain `0..d`, kept in canonical form.
//!
//! A relation stores its tuples sorted lexicographically without duplicates,
//! so the tuple list doubles as the matrix `M_R` whose rows are the sorted
//! tuples. Equality, ordering and hashing look only at the arity and the
//! tuple list; the domain size is bookkeeping for range checks.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Value = u32;
pub type Tuple = Vec<Value>;

/// On disk a relation is `{"arity": r, "tuples": [[..], ..]}`; the domain
/// size is inferred from the largest value.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "RelationFile", into = "RelationFile")]
pub struct Relation {
    arity: usize,
    domain_size: u32,
    tuples: Vec<Tuple>,
}

impl Relation {
    /// Builds a relation from arbitrary tuples: validates every tuple, then
    /// sorts and deduplicates.
    pub fn new(
        arity: usize,
        domain_size: u32,
        tuples: impl IntoIterator<Item = Tuple>,
    ) -> Result<Self> {
        let mut tuples: Vec<Tuple> = tuples.into_iter().collect();
        for t in &tuples {
            if t.len() != arity {
                return Err(Error::malformed(format!(
                    "tuple {t:?} has {} entries, relation arity is {arity}",
                    t.len()
                )));
            }
            if let Some(v) = t.iter().find(|&&v| v >= domain_size) {
                return Err(Error::malformed(format!(
                    "value {v} in tuple {t:?} is outside the domain 0..{domain_size}"
                )));
            }
        }
        tuples.sort_unstable();
        tuples.dedup();
        Ok(Relation {
            arity,
            domain_size,
            tuples,
        })
    }

    /// Like [`Relation::new`] but takes the smallest domain that fits the tuples.
    pub fn infer(arity: usize, tuples: impl IntoIterator<Item = Tuple>) -> Result<Self> {
        let tuples: Vec<Tuple> = tuples.into_iter().collect();
        let d = tuples.iter().flatten().copied().max().map_or(1, |m| m + 1);
        Relation::new(arity, d, tuples)
    }

    /// Shorthand for fixtures and tests; panics on malformed rows.
    pub fn from_rows<const R: usize>(rows: &[[Value; R]]) -> Self {
        Relation::infer(R, rows.iter().map(|r| r.to_vec())).expect("well-formed rows")
    }

    pub fn empty(arity: usize, domain_size: u32) -> Self {
        Relation {
            arity,
            domain_size,
            tuples: Vec::new(),
        }
    }

    /// The 0-ary relation with no tuple: a violated constraint.
    pub fn empty0() -> Self {
        Relation::empty(0, 1)
    }

    /// The 0-ary relation containing the empty tuple: a satisfied constraint.
    pub fn unit0() -> Self {
        Relation {
            arity: 0,
            domain_size: 1,
            tuples: vec![Vec::new()],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[Value]) -> bool {
        self.tuples
            .binary_search_by(|x| x.as_slice().cmp(t))
            .is_ok()
    }

    /// Values occurring in some tuple.
    pub fn values(&self) -> BTreeSet<Value> {
        self.tuples.iter().flatten().copied().collect()
    }

    pub fn column(&self, j: usize) -> Vec<Value> {
        self.tuples.iter().map(|t| t[j]).collect()
    }

    /// Same tuples over a different domain size.
    pub fn with_domain_size(&self, domain_size: u32) -> Result<Self> {
        Relation::new(self.arity, domain_size, self.tuples.clone())
    }

    /// Tuples with `value` at position `pos` (arity unchanged).
    pub fn select(&self, pos: usize, value: Value) -> Relation {
        Relation {
            arity: self.arity,
            domain_size: self.domain_size,
            tuples: self
                .tuples
                .iter()
                .filter(|t| t[pos] == value)
                .cloned()
                .collect(),
        }
    }

    /// Projection onto `positions`, in the given order.
    pub fn project(&self, positions: &[usize]) -> Relation {
        let tuples = self
            .tuples
            .iter()
            .map(|t| positions.iter().map(|&p| t[p]).collect());
        Relation::new(positions.len(), self.domain_size, tuples).expect("projection stays in range")
    }

    /// Applies `f` to every value. The result is re-canonicalized.
    pub fn map_values(
        &self,
        domain_size: u32,
        mut f: impl FnMut(Value) -> Value,
    ) -> Result<Relation> {
        let tuples = self
            .tuples
            .iter()
            .map(|t| t.iter().map(|&v| f(v)).collect());
        Relation::new(self.arity, domain_size, tuples)
    }
}

#[derive(Serialize, Deserialize)]
struct RelationFile {
    arity: usize,
    tuples: Vec<Tuple>,
}

impl TryFrom<RelationFile> for Relation {
    type Error = Error;

    fn try_from(f: RelationFile) -> Result<Self> {
        Relation::infer(f.arity, f.tuples)
    }
}

impl From<Relation> for RelationFile {
    fn from(r: Relation) -> Self {
        RelationFile {
            arity: r.arity,
            tuples: r.tuples,
        }
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }
}

impl Eq for Relation {}

impl Hash for Relation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.tuples.hash(state);
    }
}

impl PartialOrd for Relation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Relation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.arity
            .cmp(&other.arity)
            .then_with(|| self.tuples.cmp(&other.tuples))
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "(")?;
            for (j, v) in t.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ")")?;
        }
        if self.arity == 0 {
            write!(f, "]/0")
        } else {
            write!(f, "]")
        }
    }
}

/// Decides whether `wide` is an extension of `narrow`: every column of
/// `narrow` appears in `wide`, and each remaining column of `wide` is either
/// constant or a copy of one of those columns.
///
/// Columns are compared under the row bijection induced by projecting `wide`
/// onto the matched columns, so the answer does not depend on how the sort
/// order of the two matrices interleaves.
pub fn is_extension(wide: &Relation, narrow: &Relation) -> bool {
    if wide.len() != narrow.len() || wide.arity() < narrow.arity() {
        return false;
    }
    if wide.is_empty() {
        return true;
    }
    let mut chosen = Vec::with_capacity(narrow.arity());
    extension_search(wide, narrow, &mut chosen)
}

fn extension_search(wide: &Relation, narrow: &Relation, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == narrow.arity() {
        return projection_matches(wide, narrow, chosen) && extra_columns_ok(wide, chosen);
    }
    for c in 0..wide.arity() {
        if chosen.contains(&c) {
            continue;
        }
        chosen.push(c);
        if extension_search(wide, narrow, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn projection_matches(wide: &Relation, narrow: &Relation, chosen: &[usize]) -> bool {
    let mut projected: Vec<Tuple> = wide
        .tuples()
        .iter()
        .map(|t| chosen.iter().map(|&c| t[c]).collect())
        .collect();
    projected.sort_unstable();
    projected.dedup();
    projected.len() == wide.len() && projected.as_slice() == narrow.tuples()
}

fn extra_columns_ok(wide: &Relation, chosen: &[usize]) -> bool {
    let columns: Vec<Vec<Value>> = (0..wide.arity()).map(|j| wide.column(j)).collect();
    (0..wide.arity()).filter(|c| !chosen.contains(c)).all(|c| {
        let col = &columns[c];
        col.iter().all(|&v| v == col[0]) || chosen.iter().any(|&k| columns[k] == *col)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    /// Extension of `[(e+1,e),(e,e+1)]`.
    Two,
    /// Extension of `[(e+1,e,e),(e,e+1,e),(e,e,e+1)]`.
    Three,
}

/// Builds the gadget of the given kind, widened to arity `m` by repeating the
/// last column. The domain is `0..e+2`.
pub fn gadget_relation(kind: GadgetKind, m: usize, e: Value) -> Result<Relation> {
    let base = match kind {
        GadgetKind::Two => 2,
        GadgetKind::Three => 3,
    };
    if m < base {
        return Err(Error::malformed(format!(
            "gadget of kind {kind:?} needs arity at least {base}, got {m}"
        )));
    }
    let tuples = (0..base).map(|i| {
        let mut row: Tuple = (0..base).map(|j| if i == j { e + 1 } else { e }).collect();
        let last = row[base - 1];
        row.resize(m, last);
        row
    });
    Relation::new(m, e + 2, tuples)
}
