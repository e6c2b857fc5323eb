//! Composite classes of constraint languages.
//!
//! A class is an expression tree over atomic classes (languages preserved by
//! one fixed operation), identity families (languages admitting *some*
//! operation with the given identities), intersections, unions, and
//! "all but at most `h`" combinations of simple classes.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::Language;
use crate::operation::{preserves_language, LocalOperation, NamedOp, Operation, OperationTable};
use crate::relation::Value;
use crate::search::{search_polymorphism, tsi_member, IdentityFamily, SearchLimits, SetFunction};

/// A fixed operation inducing an atomic class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FixedOp {
    /// Defined on every natural number.
    Named(NamedOp),
    /// Defined on `0..domain_size` only; languages using larger values are
    /// not members.
    Table(OperationTable),
}

impl FixedOp {
    pub fn is_idempotent(&self) -> bool {
        match self {
            FixedOp::Named(_) => true,
            FixedOp::Table(t) => t.is_idempotent(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            FixedOp::Named(n) => n.name().to_string(),
            FixedOp::Table(t) => format!("table(arity {}, {} values)", t.arity(), t.domain_size()),
        }
    }
}

impl Operation for FixedOp {
    fn arity(&self) -> usize {
        match self {
            FixedOp::Named(n) => n.arity(),
            FixedOp::Table(t) => t.arity(),
        }
    }

    fn eval(&self, args: &[Value]) -> Option<Value> {
        match self {
            FixedOp::Named(n) => n.eval(args),
            FixedOp::Table(t) => t.eval(args),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassExpr {
    Atomic(FixedOp),
    Family(IdentityFamily),
    Intersect(Vec<ClassExpr>),
    Union(Vec<ClassExpr>),
    /// Languages belonging to every child except at most `h`.
    AllButH {
        h: usize,
        classes: Vec<ClassExpr>,
    },
}

impl ClassExpr {
    pub fn max() -> Self {
        ClassExpr::Atomic(FixedOp::Named(NamedOp::Max))
    }

    pub fn min() -> Self {
        ClassExpr::Atomic(FixedOp::Named(NamedOp::Min))
    }

    pub fn dual_discriminator() -> Self {
        ClassExpr::Atomic(FixedOp::Named(NamedOp::DualDiscriminator))
    }

    pub fn table(t: OperationTable) -> Self {
        ClassExpr::Atomic(FixedOp::Table(t))
    }

    pub fn family(f: IdentityFamily) -> Self {
        ClassExpr::Family(f)
    }

    /// Parses the JSON class DSL and validates the tree.
    pub fn from_json(s: &str) -> Result<Self> {
        let expr: ClassExpr =
            serde_json::from_str(s).map_err(|e| Error::InvalidClass(e.to_string()))?;
        expr.validate()?;
        Ok(expr)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("class expressions serialize")
    }

    /// Atomic, or an intersection of simple classes.
    pub fn is_simple(&self) -> bool {
        match self {
            ClassExpr::Atomic(_) => true,
            ClassExpr::Intersect(children) => children.iter().all(ClassExpr::is_simple),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassExpr::Atomic(_) => Ok(()),
            ClassExpr::Family(IdentityFamily::NearUnanimity(k)) if *k < 3 => Err(
                Error::InvalidClass(format!("near-unanimity needs arity at least 3, got {k}")),
            ),
            ClassExpr::Family(_) => Ok(()),
            ClassExpr::Intersect(children) | ClassExpr::Union(children) => {
                if children.is_empty() {
                    return Err(Error::InvalidClass(
                        "intersection and union need at least one child".into(),
                    ));
                }
                children.iter().try_for_each(ClassExpr::validate)
            }
            ClassExpr::AllButH { h, classes } => {
                if *h == 0 {
                    return Err(Error::InvalidClass("all_but_h needs h ≥ 1".into()));
                }
                if classes.is_empty() {
                    return Err(Error::InvalidClass(
                        "all_but_h needs at least one class".into(),
                    ));
                }
                if let Some(c) = classes.iter().find(|c| !c.is_simple()) {
                    return Err(Error::InvalidClass(format!(
                        "all_but_h children must be simple, got {}",
                        c.to_json()
                    )));
                }
                classes.iter().try_for_each(ClassExpr::validate)
            }
        }
    }

    /// Helly number derivable from the structure of the tree.
    ///
    /// Simple classes are 1-Helly; a union of an `a`-Helly and a `b`-Helly
    /// class is `(a+b)`-Helly; an intersection is `max(a,b)`-Helly; "all but
    /// `h`" of simple classes is `(h+1)`-Helly. Identity families are
    /// infinite unions and get no bound.
    pub fn helly_bound(&self) -> Option<usize> {
        match self {
            ClassExpr::Atomic(_) => Some(1),
            ClassExpr::Family(_) => None,
            ClassExpr::Intersect(children) => children
                .iter()
                .map(ClassExpr::helly_bound)
                .try_fold(1, |acc, b| b.map(|b| acc.max(b))),
            ClassExpr::Union(children) => children
                .iter()
                .map(ClassExpr::helly_bound)
                .try_fold(0, |acc, b| b.map(|b| acc + b)),
            ClassExpr::AllButH { h, .. } => Some(h + 1),
        }
    }

    /// Built from idempotent atomic classes only.
    pub fn is_idempotent_class(&self) -> bool {
        match self {
            ClassExpr::Atomic(op) => op.is_idempotent(),
            // every family in the menu forces f(x,…,x) = x
            ClassExpr::Family(_) => true,
            ClassExpr::Intersect(c) | ClassExpr::Union(c) => {
                c.iter().all(ClassExpr::is_idempotent_class)
            }
            ClassExpr::AllButH { classes, .. } => {
                classes.iter().all(ClassExpr::is_idempotent_class)
            }
        }
    }
}

/// Evidence for a positive membership answer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Fixed(FixedOp),
    Found {
        family: IdentityFamily,
        operation: LocalOperation,
    },
    Tsi(SetFunction),
    All(Vec<Witness>),
}

impl Witness {
    /// Re-checks the evidence against `language` without the search.
    pub fn verify(&self, language: &Language, limits: &SearchLimits) -> Result<bool> {
        Ok(match self {
            Witness::Fixed(op) => preserves_language(op, language),
            Witness::Found { family, operation } => {
                family.satisfied_by(operation.values.len(), operation.arity, &operation.table)
                    && operation
                        .values
                        .iter()
                        .copied()
                        .eq(language.active_domain())
                    && preserves_language(operation, language)
            }
            Witness::Tsi(f) => f.preserves(language, limits)?,
            Witness::All(ws) => {
                for w in ws {
                    if !w.verify(language, limits)? {
                        return Ok(false);
                    }
                }
                true
            }
        })
    }
}

/// Helly number attached to a class, derived from its structure or asserted
/// by the user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HellyBound {
    pub value: usize,
    /// True when the bound was asserted rather than derived; results that
    /// rely on it are conditional.
    pub asserted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub member: bool,
    pub witness: Option<Witness>,
    pub helly_bound: Option<usize>,
    pub idempotent_class: bool,
}

/// Full membership report for `language`.
pub fn member(expr: &ClassExpr, language: &Language, limits: &SearchLimits) -> Result<ClassReport> {
    expr.validate()?;
    let (member, witness) = decide(expr, language, limits)?;
    Ok(ClassReport {
        member,
        witness,
        helly_bound: expr.helly_bound(),
        idempotent_class: expr.is_idempotent_class(),
    })
}

fn decide(
    expr: &ClassExpr,
    language: &Language,
    limits: &SearchLimits,
) -> Result<(bool, Option<Witness>)> {
    match expr {
        ClassExpr::Atomic(op) => {
            let ok = preserves_language(op, language);
            Ok((ok, ok.then(|| Witness::Fixed(op.clone()))))
        }
        ClassExpr::Family(IdentityFamily::Tsi) => {
            let found = tsi_member(language, limits)?;
            Ok((found.is_some(), found.map(Witness::Tsi)))
        }
        ClassExpr::Family(family) => {
            let found = search_polymorphism(language, *family, limits)?;
            Ok((
                found.is_some(),
                found.map(|operation| Witness::Found {
                    family: *family,
                    operation,
                }),
            ))
        }
        ClassExpr::Intersect(children) => {
            let mut witnesses = Vec::new();
            let mut pending = None;
            for c in children {
                match decide(c, language, limits) {
                    Ok((true, w)) => witnesses.extend(w),
                    Ok((false, _)) => return Ok((false, None)),
                    Err(e) if e.is_resource() => pending = pending.or(Some(e)),
                    Err(e) => return Err(e),
                }
            }
            match pending {
                Some(e) => Err(e),
                None => Ok((true, Some(Witness::All(witnesses)))),
            }
        }
        ClassExpr::Union(children) => {
            let mut pending = None;
            for c in children {
                match decide(c, language, limits) {
                    Ok((true, w)) => return Ok((true, w)),
                    Ok((false, _)) => {}
                    Err(e) if e.is_resource() => pending = pending.or(Some(e)),
                    Err(e) => return Err(e),
                }
            }
            match pending {
                Some(e) => Err(e),
                None => Ok((false, None)),
            }
        }
        ClassExpr::AllButH { h, classes } => {
            let mut witnesses = Vec::new();
            let mut misses = 0;
            let mut unknown = Vec::new();
            for c in classes {
                match decide(c, language, limits) {
                    Ok((true, w)) => witnesses.extend(w),
                    Ok((false, _)) => {
                        misses += 1;
                        if misses > *h {
                            return Ok((false, None));
                        }
                    }
                    Err(e) if e.is_resource() => unknown.push(e),
                    Err(e) => return Err(e),
                }
            }
            if misses + unknown.len() <= *h {
                Ok((true, Some(Witness::All(witnesses))))
            } else {
                Err(unknown.remove(0))
            }
        }
    }
}

/// Membership oracle for one class with a result cache and a call counter.
///
/// The cache is keyed by the canonical language, so it is observationally
/// transparent. Resource errors are never cached.
pub struct ClassOracle {
    expr: ClassExpr,
    limits: SearchLimits,
    cache: Mutex<HashMap<Language, bool>>,
    tests: AtomicU64,
}

impl ClassOracle {
    pub fn new(expr: ClassExpr, limits: SearchLimits) -> Result<Self> {
        expr.validate()?;
        Ok(ClassOracle {
            expr,
            limits,
            cache: Mutex::new(HashMap::new()),
            tests: AtomicU64::new(0),
        })
    }

    pub fn expr(&self) -> &ClassExpr {
        &self.expr
    }

    pub fn limits(&self) -> &SearchLimits {
        &self.limits
    }

    /// Number of membership questions asked so far (cache hits included).
    pub fn tests(&self) -> u64 {
        self.tests.load(Ordering::Relaxed)
    }

    pub fn reset_tests(&self) {
        self.tests.store(0, Ordering::Relaxed);
    }

    pub fn member(&self, language: &Language) -> Result<bool> {
        self.tests.fetch_add(1, Ordering::Relaxed);
        if let Some(&hit) = self.cache.lock().expect("cache lock").get(language) {
            return Ok(hit);
        }
        let (answer, _) = decide(&self.expr, language, &self.limits)?;
        self.cache
            .lock()
            .expect("cache lock")
            .insert(language.clone(), answer);
        Ok(answer)
    }

    pub fn report(&self, language: &Language) -> Result<ClassReport> {
        member(&self.expr, language, &self.limits)
    }
}
