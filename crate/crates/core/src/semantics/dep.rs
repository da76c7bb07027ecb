use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::Loc;
use crate::poset::OrderIndex;
use crate::syntax::Point;

/// A variable occurrence `x^p`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarOcc {
    pub name: String,
    pub point: Point,
}

/// A location occurrence `ℓ^p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocOcc {
    pub loc: Loc,
    pub point: Point,
}

impl VarOcc {
    pub fn new(name: impl Into<String>, point: Point) -> Self {
        VarOcc {
            name: name.into(),
            point,
        }
    }
}

impl fmt::Display for VarOcc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.name, self.point)
    }
}

impl fmt::Display for LocOcc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.loc, self.point)
    }
}

/// An element of `Var ∪ Loc`, without a point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Var(String),
    Loc(Loc),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Var(x) => f.write_str(x),
            Element::Loc(l) => write!(f, "{l}"),
        }
    }
}

/// An atomic occurrence `u^p`, the domain of the dependency function.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Var(VarOcc),
    Loc(LocOcc),
}

impl Atom {
    pub fn var(name: impl Into<String>, point: Point) -> Atom {
        Atom::Var(VarOcc::new(name, point))
    }

    pub fn loc(loc: Loc, point: Point) -> Atom {
        Atom::Loc(LocOcc { loc, point })
    }

    pub fn point(&self) -> Point {
        match self {
            Atom::Var(v) => v.point,
            Atom::Loc(l) => l.point,
        }
    }

    pub fn element(&self) -> Element {
        match self {
            Atom::Var(v) => Element::Var(v.name.clone()),
            Atom::Loc(l) => Element::Loc(l.loc),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var(v) => v.fmt(f),
            Atom::Loc(l) => l.fmt(f),
        }
    }
}

/// The footprint `(L, V)` of a value: the location and variable occurrences
/// it may have been computed from.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DepPair {
    pub locs: BTreeSet<LocOcc>,
    pub vars: BTreeSet<VarOcc>,
}

impl DepPair {
    pub fn empty() -> Self {
        DepPair::default()
    }

    pub fn is_empty(&self) -> bool {
        self.locs.is_empty() && self.vars.is_empty()
    }

    pub fn union(&self, other: &DepPair) -> DepPair {
        DepPair {
            locs: self.locs.union(&other.locs).copied().collect(),
            vars: self.vars.union(&other.vars).cloned().collect(),
        }
    }

    pub fn with_var(mut self, v: VarOcc) -> DepPair {
        self.vars.insert(v);
        self
    }

    pub fn with_loc(mut self, l: LocOcc) -> DepPair {
        self.locs.insert(l);
        self
    }

    pub fn points(&self) -> BTreeSet<Point> {
        self.locs
            .iter()
            .map(|l| l.point)
            .chain(self.vars.iter().map(|v| v.point))
            .collect()
    }
}

impl fmt::Display for DepPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let locs: Vec<String> = self.locs.iter().map(|l| l.to_string()).collect();
        let vars: Vec<String> = self.vars.iter().map(|v| v.to_string()).collect();
        write!(f, "({{{}}}, {{{}}})", locs.join(", "), vars.join(", "))
    }
}

/// Occurring program points of a set of atoms.
pub fn points<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Point> {
    atoms.into_iter().map(Atom::point).collect()
}

/// The dependency function `w` together with the order accumulated while
/// evaluating. `history` lists atoms in the order they were first bound.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DepState {
    pub w: BTreeMap<Atom, DepPair>,
    pub order: BTreeSet<(Point, Point)>,
    pub history: Vec<Atom>,
}

impl DepState {
    pub fn new() -> Self {
        DepState::default()
    }

    /// Binds `atom ↦ pair` and records the dependency-direction edges
    /// `(p', p)` for every `p'` occurring in `pair`.
    pub fn bind(&mut self, atom: Atom, pair: DepPair) {
        let p = atom.point();
        for q in pair.points() {
            self.add_edge(q, p);
        }
        if !self.w.contains_key(&atom) {
            self.history.push(atom.clone());
        }
        self.w.insert(atom, pair);
    }

    /// Adds `(a, b)`; edges from the start point and self-loops are dropped.
    pub fn add_edge(&mut self, a: Point, b: Point) {
        if !a.is_start() && a != b {
            self.order.insert((a, b));
        }
    }

    pub fn bindings_of<'a>(&'a self, u: &'a Element) -> impl Iterator<Item = &'a Atom> + 'a {
        self.w.keys().filter(move |a| a.element() == *u)
    }

    pub fn order_index(&self) -> OrderIndex {
        OrderIndex::new([], &self.order)
    }
}

/// The order induced by `w` alone: every point in `w(u^p)` precedes `p`.
pub fn induced_dependency_edges(w: &BTreeMap<Atom, DepPair>) -> BTreeSet<(Point, Point)> {
    let mut out = BTreeSet::new();
    for (atom, pair) in w {
        for q in pair.points() {
            if q != atom.point() {
                out.insert((q, atom.point()));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bindings of {element} have no greatest element: {candidates:?}")]
pub struct AmbiguousPredecessor {
    pub element: Element,
    pub candidates: Vec<Point>,
}

/// The most recent binding of `u` in `w`, i.e. the greatest `u^p ∈ dom(w)`
/// under the closure of the accumulated order.
pub fn ip_sem(u: &Element, dep: &DepState) -> Result<Option<Atom>, AmbiguousPredecessor> {
    let candidates: Vec<&Atom> = dep.bindings_of(u).collect();
    match candidates.len() {
        0 => return Ok(None),
        1 => return Ok(Some(candidates[0].clone())),
        _ => {}
    }
    let index = dep.order_index();
    let pts: Vec<Point> = candidates.iter().map(|a| a.point()).collect();
    let top = index.maximal(&pts);
    if top.len() == 1 {
        Ok(candidates.into_iter().find(|a| a.point() == top[0]).cloned())
    } else {
        Err(AmbiguousPredecessor {
            element: u.clone(),
            candidates: top,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w_ex() -> DepState {
        let mut d = DepState::new();
        d.w.insert(Atom::var("x", Point(2)), DepPair::empty());
        d.w.insert(Atom::var("z", Point(4)), DepPair::empty());
        d.w.insert(
            Atom::var("y", Point(9)),
            DepPair::empty().with_var(VarOcc::new("x", Point(5))),
        );
        d.w.insert(Atom::loc(Loc(0), Point(2)), DepPair::empty());
        d.w.insert(
            Atom::loc(Loc(0), Point(8)),
            DepPair::empty().with_var(VarOcc::new("z", Point(7))),
        );
        d.order = [(2, 4), (2, 9), (5, 9), (2, 8), (7, 8)]
            .into_iter()
            .map(|(a, b)| (Point(a), Point(b)))
            .collect();
        d
    }

    #[test]
    fn points_of_sets() {
        let s = [Atom::var("x", Point(2)), Atom::var("z", Point(4))];
        assert_eq!(points(&s), [Point(2), Point(4)].into_iter().collect());
        assert!(points(&[]).is_empty());
        let d = w_ex();
        assert_eq!(
            d.w[&Atom::var("y", Point(9))].points(),
            [Point(5)].into_iter().collect()
        );
    }

    #[test]
    fn induced_edges_follow_dependencies() {
        let d = w_ex();
        let edges = induced_dependency_edges(&d.w);
        assert_eq!(
            edges,
            [(Point(5), Point(9)), (Point(7), Point(8))].into_iter().collect()
        );
        assert!(induced_dependency_edges(&BTreeMap::new()).is_empty());
        let mut w = BTreeMap::new();
        w.insert(
            Atom::var("x", Point(1)),
            DepPair::empty().with_loc(LocOcc { loc: Loc(0), point: Point(0) }),
        );
        assert_eq!(
            induced_dependency_edges(&w),
            [(Point(0), Point(1))].into_iter().collect()
        );
    }

    #[test]
    fn immediate_predecessor() {
        let d = w_ex();
        assert_eq!(
            ip_sem(&Element::Loc(Loc(0)), &d).unwrap(),
            Some(Atom::loc(Loc(0), Point(8)))
        );
        assert_eq!(
            ip_sem(&Element::Var("x".into()), &d).unwrap(),
            Some(Atom::var("x", Point(2)))
        );
        assert_eq!(ip_sem(&Element::Var("q".into()), &d).unwrap(), None);
    }

    #[test]
    fn ambiguous_predecessor() {
        let mut d = w_ex();
        d.order.remove(&(Point(2), Point(8)));
        assert!(ip_sem(&Element::Loc(Loc(0)), &d).is_err());
    }
}
