//! Constraint languages and value renamings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relation::{Relation, Tuple, Value};

/// A finite set of relations. Relations are kept sorted and deduplicated.
/// On disk: `{"relations": [..]}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "LanguageFile")]
pub struct Language {
    relations: Vec<Relation>,
}

#[derive(Deserialize)]
struct LanguageFile {
    relations: Vec<Relation>,
}

impl From<LanguageFile> for Language {
    fn from(f: LanguageFile) -> Self {
        Language::new(f.relations)
    }
}

impl Language {
    pub fn new(relations: impl IntoIterator<Item = Relation>) -> Self {
        let mut relations: Vec<Relation> = relations.into_iter().collect();
        relations.sort();
        relations.dedup();
        Language { relations }
    }

    pub fn empty() -> Self {
        Language::default()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// `D(Γ)`: the values occurring in some tuple of some relation.
    pub fn active_domain(&self) -> BTreeSet<Value> {
        self.relations
            .iter()
            .flat_map(|r| r.tuples().iter().flatten().copied())
            .collect()
    }

    /// Smallest domain size covering every relation.
    pub fn domain_size(&self) -> u32 {
        self.relations
            .iter()
            .map(Relation::domain_size)
            .max()
            .unwrap_or(1)
    }

    pub fn union(&self, other: &Language) -> Language {
        Language::new(self.relations.iter().chain(other.relations.iter()).cloned())
    }

    pub fn with(&self, r: Relation) -> Language {
        Language::new(self.relations.iter().cloned().chain(std::iter::once(r)))
    }

    pub fn without(&self, index: usize) -> Language {
        Language {
            relations: self
                .relations
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != index)
                .map(|(_, r)| r.clone())
                .collect(),
        }
    }

    /// Sublanguage made of the relations at `indices`.
    pub fn pick(&self, indices: &[usize]) -> Language {
        Language::new(indices.iter().map(|&i| self.relations[i].clone()))
    }

    /// Splits the nonempty relations into groups whose active domains are
    /// pairwise disjoint (connected components of the "shares a value" graph).
    /// Relations without tuples are dropped; every operation preserves them.
    pub fn domain_components(&self) -> Vec<Language> {
        let rels: Vec<&Relation> = self.relations.iter().filter(|r| !r.is_empty()).collect();
        let mut parent: Vec<usize> = (0..rels.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut owner: BTreeMap<Value, usize> = BTreeMap::new();
        for (i, r) in rels.iter().enumerate() {
            for v in r.values() {
                match owner.get(&v) {
                    Some(&j) => {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                    None => {
                        owner.insert(v, i);
                    }
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<Relation>> = BTreeMap::new();
        for (i, r) in rels.iter().enumerate() {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push((*r).clone());
        }
        groups.into_values().map(Language::new).collect()
    }
}

impl FromIterator<Relation> for Language {
    fn from_iter<I: IntoIterator<Item = Relation>>(iter: I) -> Self {
        Language::new(iter)
    }
}

/// An injective map between finite value sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<Value, Value>", into = "BTreeMap<Value, Value>")]
pub struct BijectionMap {
    map: BTreeMap<Value, Value>,
}

impl BijectionMap {
    pub fn new(pairs: impl IntoIterator<Item = (Value, Value)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            if let Some(prev) = map.insert(a, b) {
                if prev != b {
                    return Err(Error::malformed(format!(
                        "value {a} mapped to both {prev} and {b}"
                    )));
                }
            }
        }
        let image: BTreeSet<Value> = map.values().copied().collect();
        if image.len() != map.len() {
            return Err(Error::malformed("map is not injective"));
        }
        Ok(BijectionMap { map })
    }

    pub fn identity(values: impl IntoIterator<Item = Value>) -> Self {
        BijectionMap {
            map: values.into_iter().map(|v| (v, v)).collect(),
        }
    }

    /// Maps the sorted `source` values onto the sorted `target` values in order.
    pub fn monotone(source: &BTreeSet<Value>, target: &BTreeSet<Value>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::malformed("source and target sizes differ"));
        }
        BijectionMap::new(source.iter().copied().zip(target.iter().copied()))
    }

    pub fn get(&self, v: Value) -> Option<Value> {
        self.map.get(&v).copied()
    }

    pub fn source(&self) -> BTreeSet<Value> {
        self.map.keys().copied().collect()
    }

    pub fn image(&self) -> BTreeSet<Value> {
        self.map.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Value, Value)> + '_ {
        self.map.iter().map(|(&a, &b)| (a, b))
    }

    pub fn inverse(&self) -> BijectionMap {
        BijectionMap {
            map: self.map.iter().map(|(&a, &b)| (b, a)).collect(),
        }
    }

    /// `next ∘ self`: apply `self` first. Fails if some image of `self` is
    /// outside the source of `next`.
    pub fn then(&self, next: &BijectionMap) -> Result<BijectionMap> {
        let pairs = self
            .map
            .iter()
            .map(|(&a, &b)| {
                next.get(b).map(|c| (a, c)).ok_or_else(|| {
                    Error::malformed(format!("value {b} has no image in the second map"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        BijectionMap::new(pairs)
    }

    fn image_domain_size(&self) -> u32 {
        self.map.values().max().map_or(1, |m| m + 1)
    }

    /// `R_φ = [(d, φ(d)) : d ∈ source]`.
    pub fn relation(&self) -> Relation {
        let d = self
            .map
            .iter()
            .map(|(&a, &b)| a.max(b))
            .max()
            .map_or(1, |m| m + 1);
        Relation::new(2, d, self.map.iter().map(|(&a, &b)| vec![a, b])).expect("pairs are in range")
    }

    pub fn rename_relation(&self, r: &Relation) -> Result<Relation> {
        let tuples = r
            .tuples()
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&v| {
                        self.get(v)
                            .ok_or_else(|| Error::malformed(format!("value {v} has no image")))
                    })
                    .collect::<Result<Tuple>>()
            })
            .collect::<Result<Vec<Tuple>>>()?;
        Relation::new(r.arity(), self.image_domain_size(), tuples)
    }

    /// `φ(Γ)`: replaces every value of every tuple pointwise.
    pub fn rename_language(&self, language: &Language) -> Result<Language> {
        language
            .relations()
            .iter()
            .map(|r| self.rename_relation(r))
            .collect::<Result<Vec<_>>>()
            .map(Language::new)
    }
}

impl TryFrom<BTreeMap<Value, Value>> for BijectionMap {
    type Error = Error;

    fn try_from(map: BTreeMap<Value, Value>) -> Result<Self> {
        BijectionMap::new(map)
    }
}

impl From<BijectionMap> for BTreeMap<Value, Value> {
    fn from(b: BijectionMap) -> Self {
        b.map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r1() -> Relation {
        Relation::from_rows(&[[0, 0], [0, 1], [1, 0]])
    }

    #[test]
    fn active_domain_examples() {
        assert_eq!(
            Language::new([r1()]).active_domain(),
            BTreeSet::from([0, 1])
        );
        assert!(Language::empty().active_domain().is_empty());
        assert!(Language::new([Relation::empty(2, 5)])
            .active_domain()
            .is_empty());
    }

    #[test]
    fn renaming_examples() {
        let lang = Language::new([r1()]);
        assert_eq!(
            BijectionMap::identity([0, 1])
                .rename_language(&lang)
                .unwrap(),
            lang
        );

        let single = Language::new([Relation::from_rows(&[[0, 1]])]);
        let phi = BijectionMap::new([(0, 5), (1, 7)]).unwrap();
        assert_eq!(
            phi.rename_language(&single).unwrap(),
            Language::new([Relation::from_rows(&[[5, 7]])])
        );

        let swap = BijectionMap::new([(0, 1), (1, 0)]).unwrap();
        let renamed = swap.rename_language(&lang).unwrap();
        assert_eq!(
            renamed.relations()[0].tuples(),
            &[vec![0, 1], vec![1, 0], vec![1, 1]]
        );

        let partial = BijectionMap::new([(0, 1)]).unwrap();
        assert!(partial.rename_language(&lang).is_err());
    }

    #[test]
    fn bijection_relations() {
        assert_eq!(
            BijectionMap::new([(0, 2)]).unwrap().relation(),
            Relation::from_rows(&[[0, 2]])
        );
        assert_eq!(
            BijectionMap::new([(0, 2), (1, 3)]).unwrap().relation(),
            Relation::from_rows(&[[0, 2], [1, 3]])
        );
        assert!(BijectionMap::new([(0, 2), (1, 2)]).is_err());
    }

    #[test]
    fn composed_chain_is_join_of_links() {
        let psi0 = BijectionMap::new([(0, 2), (1, 3)]).unwrap();
        let psi1 = BijectionMap::new([(2, 5), (3, 4)]).unwrap();
        let composed = psi0.then(&psi1).unwrap();
        // join R_psi0(a,b) with R_psi1(b,c), project to (a,c)
        let mut joined = Vec::new();
        for t in psi0.relation().tuples() {
            for u in psi1.relation().tuples() {
                if t[1] == u[0] {
                    joined.push(vec![t[0], u[1]]);
                }
            }
        }
        assert_eq!(composed.relation(), Relation::infer(2, joined).unwrap());
        assert_eq!(composed.relation(), Relation::from_rows(&[[0, 5], [1, 4]]));
    }

    #[test]
    fn components_split_on_shared_values() {
        let lang = Language::new([
            Relation::from_rows(&[[0, 1]]),
            Relation::from_rows(&[[1, 2]]),
            Relation::from_rows(&[[5, 6]]),
            Relation::empty(2, 3),
        ]);
        let comps = lang.domain_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].len(), 2);
        assert_eq!(comps[1].active_domain(), BTreeSet::from([5, 6]));
    }
}
