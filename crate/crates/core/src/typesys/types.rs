use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::syntax::Point;

/// A program variable or the internal variable of a `ref` occurrence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Name {
    Var(String),
    Internal(Point),
}

impl Name {
    pub fn var(x: impl Into<String>) -> Name {
        Name::Var(x.into())
    }

    pub fn is_internal(&self) -> bool {
        matches!(self, Name::Internal(_))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::Var(x) => f.write_str(x),
            Name::Internal(p) => write!(f, "v{p}"),
        }
    }
}

/// An occurrence `u^p` of a variable or internal variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TAtom {
    pub name: Name,
    pub point: Point,
}

impl TAtom {
    pub fn new(name: Name, point: Point) -> Self {
        TAtom { name, point }
    }

    pub fn var(x: impl Into<String>, point: Point) -> Self {
        TAtom::new(Name::var(x), point)
    }

    pub fn internal(of: Point, point: Point) -> Self {
        TAtom::new(Name::Internal(of), point)
    }
}

impl fmt::Display for TAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.point)
    }
}

pub type Delta = BTreeSet<TAtom>;
pub type Kappa = BTreeSet<Name>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Base { delta: Delta, kappa: Kappa },
    Arrow(Box<Type>, Box<Type>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot unite {left} with {right}")]
pub struct UndefinedUnion {
    pub left: String,
    pub right: String,
}

impl Type {
    pub fn base(delta: Delta, kappa: Kappa) -> Type {
        Type::Base { delta, kappa }
    }

    pub fn empty() -> Type {
        Type::base(Delta::new(), Kappa::new())
    }

    pub fn arrow(a: Type, b: Type) -> Type {
        Type::Arrow(Box::new(a), Box::new(b))
    }

    pub fn is_arrow(&self) -> bool {
        matches!(self, Type::Arrow(..))
    }

    pub fn delta(&self) -> Option<&Delta> {
        match self {
            Type::Base { delta, .. } => Some(delta),
            Type::Arrow(..) => None,
        }
    }

    pub fn kappa(&self) -> Option<&Kappa> {
        match self {
            Type::Base { kappa, .. } => Some(kappa),
            Type::Arrow(..) => None,
        }
    }

    /// `T ⊔ (δ, κ)`. On an arrow the pair is pushed into the result type.
    pub fn join(&self, delta: &Delta, kappa: &Kappa) -> Type {
        match self {
            Type::Base { delta: d, kappa: k } => Type::base(
                d.union(delta).cloned().collect(),
                k.union(kappa).cloned().collect(),
            ),
            Type::Arrow(a, b) => Type::arrow((**a).clone(), b.join(delta, kappa)),
        }
    }

    pub fn join_delta(&self, delta: &Delta) -> Type {
        self.join(delta, &Kappa::new())
    }

    /// Component-wise inclusion.
    pub fn subsumed_by(&self, other: &Type) -> bool {
        match (self, other) {
            (Type::Base { delta: d1, kappa: k1 }, Type::Base { delta: d2, kappa: k2 }) => {
                d1.is_subset(d2) && k1.is_subset(k2)
            }
            (Type::Arrow(a1, b1), Type::Arrow(a2, b2)) => a1.subsumed_by(a2) && b1.subsumed_by(b2),
            _ => false,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Type::Base { delta, kappa } => json!({
                "delta": delta.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "kappa": kappa.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
            }),
            Type::Arrow(a, b) => json!({ "arrow": [a.to_json(), b.to_json()] }),
        }
    }
}

fn join_list<T: fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Base { delta, kappa } => {
                write!(f, "({{{}}}, {{{}}})", join_list(delta), join_list(kappa))
            }
            Type::Arrow(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

pub fn type_union(a: &Type, b: &Type) -> Result<Type, UndefinedUnion> {
    match (a, b) {
        (Type::Base { delta, kappa }, Type::Base { .. }) => Ok(b.join(delta, kappa)),
        (Type::Arrow(a1, b1), Type::Arrow(a2, b2)) => {
            Ok(Type::arrow(type_union(a1, a2)?, type_union(b1, b2)?))
        }
        _ => Err(UndefinedUnion {
            left: a.to_string(),
            right: b.to_string(),
        }),
    }
}

/// Γ: a partial map from occurrences to types. Insertion overrides.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeEnv(BTreeMap<TAtom, Type>);

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    pub fn insert(&mut self, atom: TAtom, t: Type) {
        self.0.insert(atom, t);
    }

    pub fn remove(&mut self, atom: &TAtom) -> Option<Type> {
        self.0.remove(atom)
    }

    pub fn get(&self, atom: &TAtom) -> Option<&Type> {
        self.0.get(atom)
    }

    pub fn get_mut(&mut self, atom: &TAtom) -> Option<&mut Type> {
        self.0.get_mut(atom)
    }

    pub fn contains(&self, atom: &TAtom) -> bool {
        self.0.contains_key(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TAtom, &Type)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Binding points of `name`.
    pub fn points_of<'a>(&'a self, name: &'a Name) -> impl Iterator<Item = Point> + 'a {
        self.0.keys().filter(move |a| a.name == *name).map(|a| a.point)
    }

    pub fn to_json(&self) -> Json {
        Json::Array(
            self.0
                .iter()
                .map(|(a, t)| json!({ "atom": a.to_string(), "type": t.to_json() }))
                .collect(),
        )
    }
}

/// κ⁰: a partition of the program's variables and internal variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasBase {
    blocks: Vec<BTreeSet<Name>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionViolation {
    #[error("{0} appears in two blocks")]
    Overlap(Name),
    #[error("block {0:?} holds several variables but no internal variable")]
    NoInternal(Vec<String>),
}

impl AliasBase {
    pub fn new(mut blocks: Vec<BTreeSet<Name>>) -> Result<Self, PartitionViolation> {
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        let mut seen = BTreeSet::new();
        for b in &blocks {
            for n in b {
                if !seen.insert(n) {
                    return Err(PartitionViolation::Overlap(n.clone()));
                }
            }
            let vars = b.iter().filter(|n| !n.is_internal()).count();
            if vars > 1 && vars == b.len() {
                return Err(PartitionViolation::NoInternal(
                    b.iter().map(|n| n.to_string()).collect(),
                ));
            }
        }
        Ok(AliasBase { blocks })
    }

    pub fn blocks(&self) -> &[BTreeSet<Name>] {
        &self.blocks
    }

    pub fn block_of(&self, n: &Name) -> Option<&BTreeSet<Name>> {
        self.blocks.iter().find(|b| b.contains(n))
    }

    pub fn names(&self) -> BTreeSet<&Name> {
        self.blocks.iter().flatten().collect()
    }

    pub fn to_json(&self) -> Json {
        Json::Array(
            self.blocks
                .iter()
                .map(|b| Json::Array(b.iter().map(|n| Json::String(n.to_string())).collect()))
                .collect(),
        )
    }
}

impl fmt::Display for AliasBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| format!("{{{}}}", join_list(b)))
            .collect();
        write!(f, "{{{}}}", blocks.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(delta: &[TAtom], kappa: &[Name]) -> Type {
        Type::base(delta.iter().cloned().collect(), kappa.iter().cloned().collect())
    }

    #[test]
    fn union_examples() {
        let a = base(&[TAtom::var("x", Point(1))], &[]);
        let b = base(&[TAtom::var("z", Point(2))], &[Name::Internal(Point(2))]);
        assert_eq!(
            type_union(&a, &b).unwrap(),
            base(
                &[TAtom::var("x", Point(1)), TAtom::var("z", Point(2))],
                &[Name::Internal(Point(2))]
            )
        );
        assert_eq!(type_union(&a, &a).unwrap(), a);
        let arrow = Type::arrow(Type::empty(), Type::empty());
        assert!(type_union(&a, &arrow).is_err());
    }

    #[test]
    fn display() {
        let t = base(&[TAtom::var("x", Point(5))], &[Name::Internal(Point(2))]);
        assert_eq!(t.to_string(), "({x@5}, {v2})");
    }

    #[test]
    fn partition_checks() {
        let b = |ns: &[Name]| ns.iter().cloned().collect::<BTreeSet<_>>();
        let ok = AliasBase::new(vec![b(&[Name::var("x"), Name::Internal(Point(2))]), b(&[Name::var("y")])]);
        assert!(ok.is_ok());
        assert!(AliasBase::new(vec![b(&[Name::var("x"), Name::var("y")])]).is_err());
        assert!(AliasBase::new(vec![b(&[Name::var("x")]), b(&[Name::var("x")])]).is_err());
    }
}
