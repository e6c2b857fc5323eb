//! CSP instances, partial assignments, and the JSON instance format.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::Language;
use crate::relation::{Relation, Tuple, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    scope: Vec<usize>,
    relation: Relation,
}

impl Constraint {
    pub fn new(scope: Vec<usize>, relation: Relation) -> Result<Self> {
        if scope.len() != relation.arity() {
            return Err(Error::malformed(format!(
                "scope {scope:?} has length {}, relation arity is {}",
                scope.len(),
                relation.arity()
            )));
        }
        let distinct: BTreeSet<usize> = scope.iter().copied().collect();
        if distinct.len() != scope.len() {
            return Err(Error::malformed(format!(
                "scope {scope:?} repeats a variable"
            )));
        }
        Ok(Constraint { scope, relation })
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn relation(&self) -> &Relation {
        &self.relation
    }
}

/// Assignment of values to a subset of the variables.
pub type PartialAssignment = BTreeMap<usize, Value>;

/// A CSP instance over the shared domain `0..domain_size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspInstance {
    num_vars: usize,
    domain_size: u32,
    constraints: Vec<Constraint>,
}

impl CspInstance {
    pub fn new(num_vars: usize, domain_size: u32, constraints: Vec<Constraint>) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::malformed("domain size must be positive"));
        }
        for c in &constraints {
            if let Some(&x) = c.scope.iter().find(|&&x| x >= num_vars) {
                return Err(Error::UnknownVariable { var: x, num_vars });
            }
            if c.relation
                .tuples()
                .iter()
                .flatten()
                .any(|&v| v >= domain_size)
            {
                return Err(Error::malformed(format!(
                    "relation {} uses values outside 0..{domain_size}",
                    c.relation
                )));
            }
        }
        let constraints = constraints
            .into_iter()
            .map(|c| {
                let relation = c.relation.with_domain_size(domain_size)?;
                Ok(Constraint {
                    scope: c.scope,
                    relation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CspInstance {
            num_vars,
            domain_size,
            constraints,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Largest constraint arity (0 for an instance without constraints).
    pub fn max_arity(&self) -> usize {
        self.constraints
            .iter()
            .map(|c| c.scope.len())
            .max()
            .unwrap_or(0)
    }

    /// Largest tuple count over the constraints.
    pub fn max_tuples(&self) -> usize {
        self.constraints
            .iter()
            .map(|c| c.relation.len())
            .max()
            .unwrap_or(0)
    }

    /// Keeps the constraints at `indices` (in that order) over the same variables.
    pub fn sub_instance(&self, indices: &[usize]) -> CspInstance {
        CspInstance {
            num_vars: self.num_vars,
            domain_size: self.domain_size,
            constraints: indices
                .iter()
                .map(|&i| self.constraints[i].clone())
                .collect(),
        }
    }

    /// Union of the scopes of the constraints at `indices`, ascending.
    pub fn scope_union(&self, indices: &[usize]) -> BTreeSet<usize> {
        indices
            .iter()
            .flat_map(|&i| self.constraints[i].scope.iter().copied())
            .collect()
    }

    fn check_assignment(&self, assignment: &PartialAssignment) -> Result<()> {
        for (&x, &v) in assignment {
            if x >= self.num_vars {
                return Err(Error::UnknownVariable {
                    var: x,
                    num_vars: self.num_vars,
                });
            }
            if v >= self.domain_size {
                return Err(Error::malformed(format!(
                    "value {v} for variable {x} is outside 0..{}",
                    self.domain_size
                )));
            }
        }
        Ok(())
    }

    /// Assigns variables without inference: each constraint keeps only the
    /// tuples agreeing with the assignment, assigned positions are projected
    /// away, and the remaining variables are renumbered densely in ascending
    /// order of their original index.
    pub fn apply_assignment(&self, assignment: &PartialAssignment) -> Result<CspInstance> {
        self.check_assignment(assignment)?;
        let mut new_index = vec![usize::MAX; self.num_vars];
        let mut next = 0;
        for (x, slot) in new_index.iter_mut().enumerate() {
            if !assignment.contains_key(&x) {
                *slot = next;
                next += 1;
            }
        }
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                let (scope, relation) = restrict(c, assignment);
                Constraint {
                    scope: scope.into_iter().map(|x| new_index[x]).collect(),
                    relation,
                }
            })
            .collect();
        Ok(CspInstance {
            num_vars: next,
            domain_size: self.domain_size,
            constraints,
        })
    }

    /// Distinct relations used by the constraints.
    pub fn language(&self) -> Language {
        Language::new(self.constraints.iter().map(|c| c.relation.clone()))
    }

    /// Whether a full assignment satisfies every constraint.
    pub fn is_solution(&self, values: &[Value]) -> bool {
        values.len() == self.num_vars
            && self.constraints.iter().all(|c| {
                let t: Tuple = c.scope.iter().map(|&x| values[x]).collect();
                c.relation.contains(&t)
            })
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            domain_size: self.domain_size,
            num_vars: self.num_vars,
            constraints: self
                .constraints
                .iter()
                .map(|c| ConstraintFile {
                    scope: c.scope.clone(),
                    tuples: c.relation.tuples().to_vec(),
                })
                .collect(),
            metadata: None,
        }
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        let constraints = file
            .constraints
            .iter()
            .map(|c| {
                Constraint::new(
                    c.scope.clone(),
                    Relation::new(c.scope.len(), file.domain_size, c.tuples.clone())?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        CspInstance::new(file.num_vars, file.domain_size, constraints)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(s).map_err(|e| Error::malformed(e.to_string()))?;
        CspInstance::from_file(&file)
    }
}

/// Residual scope (original indices) and relation of one constraint under a
/// partial assignment.
pub(crate) fn restrict(c: &Constraint, assignment: &PartialAssignment) -> (Vec<usize>, Relation) {
    let fixed: Vec<(usize, Value)> = c
        .scope
        .iter()
        .enumerate()
        .filter_map(|(pos, x)| assignment.get(x).map(|&v| (pos, v)))
        .collect();
    if fixed.is_empty() {
        return (c.scope.clone(), c.relation.clone());
    }
    let keep: Vec<usize> = (0..c.scope.len())
        .filter(|p| !fixed.iter().any(|(q, _)| q == p))
        .collect();
    let tuples = c
        .relation
        .tuples()
        .iter()
        .filter(|t| fixed.iter().all(|&(p, v)| t[p] == v))
        .map(|t| keep.iter().map(|&p| t[p]).collect::<Tuple>());
    let relation = Relation::new(keep.len(), c.relation.domain_size(), tuples)
        .expect("subset of a valid relation");
    (keep.iter().map(|&p| c.scope[p]).collect(), relation)
}

/// The distinct relations of an instance, as a language.
pub fn residual_language(instance: &CspInstance) -> Language {
    instance.language()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintFile {
    pub scope: Vec<usize>,
    pub tuples: Vec<Tuple>,
}

/// On-disk instance: `{"domain_size", "num_vars", "constraints": [{"scope", "tuples"}]}`
/// with an optional `metadata` block attached by the generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub domain_size: u32,
    pub num_vars: usize,
    pub constraints: Vec<ConstraintFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}
