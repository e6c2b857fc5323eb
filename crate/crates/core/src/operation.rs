//! Finitary operations and the preservation check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::Language;
use crate::relation::{Relation, Tuple, Value};

/// Anything that can be applied to a list of domain values.
///
/// `eval` returns `None` when the operation is not defined on the arguments
/// (a finite table queried outside its domain).
pub trait Operation {
    fn arity(&self) -> usize;
    fn eval(&self, args: &[Value]) -> Option<Value>;
}

/// Dense table over `0..domain_size`, indexed in row-major mixed-radix order
/// (first argument most significant).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TableFile", into = "TableFile")]
pub struct OperationTable {
    arity: usize,
    domain_size: u32,
    table: Vec<Value>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    arity: usize,
    domain_size: u32,
    table: Vec<Value>,
}

impl TryFrom<TableFile> for OperationTable {
    type Error = Error;
    fn try_from(f: TableFile) -> Result<Self> {
        OperationTable::new(f.arity, f.domain_size, f.table)
    }
}

impl From<OperationTable> for TableFile {
    fn from(t: OperationTable) -> Self {
        TableFile {
            arity: t.arity,
            domain_size: t.domain_size,
            table: t.table,
        }
    }
}

pub(crate) fn table_len(arity: usize, domain_size: u32) -> Option<usize> {
    (domain_size as usize).checked_pow(arity as u32)
}

impl OperationTable {
    pub fn new(arity: usize, domain_size: u32, table: Vec<Value>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::malformed("operation arity must be at least 1"));
        }
        let expected =
            table_len(arity, domain_size).ok_or_else(|| Error::malformed("table too large"))?;
        if table.len() != expected {
            return Err(Error::malformed(format!(
                "table for arity {arity} over {domain_size} values needs {expected} entries, got {}",
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|&&v| v >= domain_size) {
            return Err(Error::malformed(format!(
                "table entry {v} outside 0..{domain_size}"
            )));
        }
        Ok(OperationTable {
            arity,
            domain_size,
            table,
        })
    }

    /// Tabulates `f` over every argument tuple.
    pub fn from_fn(
        arity: usize,
        domain_size: u32,
        mut f: impl FnMut(&[Value]) -> Value,
    ) -> Result<Self> {
        let len =
            table_len(arity, domain_size).ok_or_else(|| Error::malformed("table too large"))?;
        let mut args = vec![0; arity];
        let mut table = Vec::with_capacity(len);
        for idx in 0..len {
            decode_index(idx, domain_size, &mut args);
            table.push(f(&args));
        }
        OperationTable::new(arity, domain_size, table)
    }

    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }

    pub fn table(&self) -> &[Value] {
        &self.table
    }

    pub fn index_of(&self, args: &[Value]) -> Option<usize> {
        if args.len() != self.arity {
            return None;
        }
        let mut idx = 0usize;
        for &a in args {
            if a >= self.domain_size {
                return None;
            }
            idx = idx * self.domain_size as usize + a as usize;
        }
        Some(idx)
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.domain_size).all(|x| self.eval(&vec![x; self.arity]) == Some(x))
    }
}

pub(crate) fn decode_index(mut idx: usize, domain_size: u32, args: &mut [Value]) {
    for slot in args.iter_mut().rev() {
        *slot = (idx % domain_size as usize) as Value;
        idx /= domain_size as usize;
    }
}

impl Operation for OperationTable {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, args: &[Value]) -> Option<Value> {
        self.index_of(args).map(|i| self.table[i])
    }
}

/// Operations defined on every natural number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedOp {
    Max,
    Min,
    /// `f(x,y,z) = y` if `y = z`, else `x`.
    DualDiscriminator,
}

impl NamedOp {
    pub fn name(self) -> &'static str {
        match self {
            NamedOp::Max => "max",
            NamedOp::Min => "min",
            NamedOp::DualDiscriminator => "dual_discriminator",
        }
    }
}

impl Operation for NamedOp {
    fn arity(&self) -> usize {
        match self {
            NamedOp::Max | NamedOp::Min => 2,
            NamedOp::DualDiscriminator => 3,
        }
    }

    fn eval(&self, args: &[Value]) -> Option<Value> {
        if args.len() != self.arity() {
            return None;
        }
        Some(match self {
            NamedOp::Max => args[0].max(args[1]),
            NamedOp::Min => args[0].min(args[1]),
            NamedOp::DualDiscriminator => {
                if args[1] == args[2] {
                    args[1]
                } else {
                    args[0]
                }
            }
        })
    }
}

/// A table over an arbitrary finite value set, stored on local indices
/// `0..values.len()`. Search results come back in this form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalOperation {
    pub values: Vec<Value>,
    pub table: Vec<Value>,
    pub arity: usize,
}

impl LocalOperation {
    fn local(&self, v: Value) -> Option<usize> {
        self.values.binary_search(&v).ok()
    }

    pub fn is_idempotent(&self) -> bool {
        self.values
            .iter()
            .all(|&x| self.eval(&vec![x; self.arity]) == Some(x))
    }
}

impl Operation for LocalOperation {
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, args: &[Value]) -> Option<Value> {
        if args.len() != self.arity {
            return None;
        }
        let n = self.values.len();
        let mut idx = 0usize;
        for &a in args {
            idx = idx * n + self.local(a)?;
        }
        Some(self.values[self.table[idx] as usize])
    }
}

impl<T: Operation + ?Sized> Operation for &T {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn eval(&self, args: &[Value]) -> Option<Value> {
        (**self).eval(args)
    }
}

/// Whether `op` returns `x` on `(x, …, x)` for every `x` in `values`.
pub fn is_idempotent_on(op: &dyn Operation, values: impl IntoIterator<Item = Value>) -> bool {
    values
        .into_iter()
        .all(|x| op.eval(&vec![x; op.arity()]) == Some(x))
}

/// Componentwise application: `f(t₁,…,t_a) = (f(t₁[1],…,t_a[1]), …)`.
pub fn apply_rowwise(op: &dyn Operation, rows: &[&[Value]]) -> Result<Tuple> {
    if rows.len() != op.arity() {
        return Err(Error::malformed(format!(
            "operation of arity {} applied to {} tuples",
            op.arity(),
            rows.len()
        )));
    }
    let width = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != width) {
        return Err(Error::malformed("tuples of different arity"));
    }
    let mut args = vec![0; rows.len()];
    (0..width)
        .map(|j| {
            for (slot, r) in args.iter_mut().zip(rows) {
                *slot = r[j];
            }
            op.eval(&args)
                .ok_or_else(|| Error::malformed(format!("operation undefined on {args:?}")))
        })
        .collect()
}

/// Exhaustive check over all `a`-tuples of rows (with repetition). An
/// operation that is undefined somewhere on the relation does not preserve it.
pub fn preserves(op: &dyn Operation, relation: &Relation) -> bool {
    let a = op.arity();
    let t = relation.len();
    if t == 0 {
        return true;
    }
    let rows = relation.tuples();
    let mut pick = vec![0usize; a];
    let mut args = vec![0; a];
    let mut image = vec![0; relation.arity()];
    loop {
        for (j, slot) in image.iter_mut().enumerate() {
            for (arg, &p) in args.iter_mut().zip(&pick) {
                *arg = rows[p][j];
            }
            match op.eval(&args) {
                Some(v) => *slot = v,
                None => return false,
            }
        }
        if !relation.contains(&image) {
            return false;
        }
        // odometer over row choices
        let mut k = a;
        loop {
            if k == 0 {
                return true;
            }
            k -= 1;
            pick[k] += 1;
            if pick[k] < t {
                break;
            }
            pick[k] = 0;
        }
    }
}

/// `op` restricted to `D(Γ)` preserves every relation of `Γ`.
pub fn preserves_language(op: &dyn Operation, language: &Language) -> bool {
    language.relations().iter().all(|r| preserves(op, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neq3() -> Relation {
        Relation::infer(
            2,
            (0..3).flat_map(|a| (0..3).filter(move |&b| b != a).map(move |b| vec![a, b])),
        )
        .unwrap()
    }

    #[test]
    fn idempotency() {
        let max = OperationTable::from_fn(2, 3, |a| a[0].max(a[1])).unwrap();
        assert!(max.is_idempotent());
        let zero = OperationTable::from_fn(2, 2, |_| 0).unwrap();
        assert!(!zero.is_idempotent());
        assert!(is_idempotent_on(&NamedOp::DualDiscriminator, 0..10));
    }

    #[test]
    fn rowwise_application() {
        let t = apply_rowwise(&NamedOp::Max, &[&[1, 2], &[2, 1]]).unwrap();
        assert_eq!(t, vec![2, 2]);
        let dd = NamedOp::DualDiscriminator;
        assert_eq!(apply_rowwise(&dd, &[&[0], &[1], &[1]]).unwrap(), vec![1]);
        assert_eq!(dd.eval(&[1, 0, 2]), Some(1));
        assert!(apply_rowwise(&NamedOp::Max, &[&[1, 2]]).is_err());
        assert!(apply_rowwise(&NamedOp::Max, &[&[1, 2], &[1]]).is_err());
    }

    #[test]
    fn preservation_examples() {
        assert!(!preserves(&NamedOp::Max, &neq3()));
        let r1 = Relation::from_rows(&[[0, 0], [0, 1], [1, 0]]);
        assert!(preserves(&NamedOp::Min, &r1));
        assert!(!preserves(&NamedOp::Max, &r1));
        let single = Relation::from_rows(&[[3, 1, 4]]);
        assert!(preserves(&NamedOp::DualDiscriminator, &single));
        assert!(preserves(&NamedOp::Max, &Relation::empty0()));
        assert!(preserves(&NamedOp::Max, &Relation::unit0()));
    }

    #[test]
    fn table_outside_domain_does_not_preserve() {
        let small = OperationTable::from_fn(2, 2, |a| a[0].max(a[1])).unwrap();
        assert!(!preserves(&small, &Relation::from_rows(&[[2, 0]])));
        assert!(preserves(&small, &Relation::from_rows(&[[1, 0]])));
    }

    #[test]
    fn table_json_layout() {
        let t = OperationTable::from_fn(2, 2, |a| a[0] & a[1]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"arity":2,"domain_size":2,"table":[0,0,0,1]}"#);
        let back: OperationTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<OperationTable>(
            r#"{"arity":2,"domain_size":2,"table":[0]}"#
        )
        .is_err());
    }

    #[test]
    fn local_operation_lookup() {
        let op = LocalOperation {
            values: vec![3, 7],
            table: vec![0, 0, 0, 1],
            arity: 2,
        };
        assert_eq!(op.eval(&[7, 7]), Some(7));
        assert_eq!(op.eval(&[3, 7]), Some(3));
        assert_eq!(op.eval(&[4, 7]), None);
        assert!(op.is_idempotent());
    }
}
