use std::collections::BTreeSet;

use serde_json::{json, Value as Json};
use thiserror::Error;

use super::types::{Name, TAtom, TypeEnv};
use crate::poset::OrderIndex;
use crate::syntax::Point;

/// Π: an approximated order over program points.
#[derive(Debug, Clone)]
pub struct Pi {
    points: BTreeSet<Point>,
    edges: BTreeSet<(Point, Point)>,
    index: OrderIndex,
}

impl PartialEq for Pi {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.edges == other.edges
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("point {0} is not in the order")]
pub struct UnknownPoint(pub Point);

impl Pi {
    pub fn new(
        points: impl IntoIterator<Item = Point>,
        edges: impl IntoIterator<Item = (Point, Point)>,
    ) -> Pi {
        let edges: BTreeSet<(Point, Point)> = edges.into_iter().filter(|(a, b)| a != b).collect();
        let mut points: BTreeSet<Point> = points.into_iter().collect();
        for &(a, b) in &edges {
            points.insert(a);
            points.insert(b);
        }
        let index = OrderIndex::new(points.iter().copied(), &edges);
        Pi {
            points,
            edges,
            index,
        }
    }

    pub fn points(&self) -> &BTreeSet<Point> {
        &self.points
    }

    pub fn edges(&self) -> &BTreeSet<(Point, Point)> {
        &self.edges
    }

    pub fn less(&self, a: Point, b: Point) -> bool {
        self.index.less(a, b)
    }

    pub fn less_eq(&self, a: Point, b: Point) -> bool {
        self.index.less_eq(a, b)
    }

    pub fn is_partial_order(&self) -> bool {
        self.index.is_partial_order()
    }

    pub fn covered_by(&self, p: Point) -> Vec<Point> {
        self.index.covered_by(p)
    }

    pub fn without_edge(&self, a: Point, b: Point) -> Pi {
        let edges = self.edges.iter().copied().filter(|&e| e != (a, b));
        Pi::new(self.points.iter().copied(), edges)
    }

    pub fn to_json(&self) -> Json {
        Json::Array(
            self.edges
                .iter()
                .map(|(a, b)| json!([a.0, b.0]))
                .collect(),
        )
    }
}

/// Υ_p: every maximal chain whose greatest element is `p`, listed bottom-up.
pub fn p_chains(pi: &Pi, p: Point) -> Result<Vec<Vec<Point>>, UnknownPoint> {
    if !pi.points.contains(&p) {
        return Err(UnknownPoint(p));
    }
    let mut out = Vec::new();
    let mut path = vec![p];
    extend_down(pi, &mut path, &mut out);
    out.sort();
    Ok(out)
}

fn extend_down(pi: &Pi, path: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
    let below = pi.covered_by(*path.last().unwrap());
    if below.is_empty() {
        out.push(path.iter().rev().copied().collect());
        return;
    }
    for q in below {
        path.push(q);
        extend_down(pi, path, out);
        path.pop();
    }
}

/// The type-level immediate predecessor of `u` at `p`: the union over all
/// p-chains of the greatest `u`-binding in Γ on that chain.
///
/// A binding at the start point sits below every chain.
pub fn ip_type(u: &Name, gamma: &TypeEnv, pi: &Pi, p: Point) -> BTreeSet<TAtom> {
    let bound: BTreeSet<Point> = gamma.points_of(u).collect();
    let mut out = BTreeSet::new();
    if bound.contains(&p) {
        out.insert(TAtom::new(u.clone(), p));
        return out;
    }
    let mut reaches_bottom = false;
    let mut seen = BTreeSet::new();
    let mut stack = vec![p];
    while let Some(q) = stack.pop() {
        let below = pi.covered_by(q);
        if below.is_empty() {
            reaches_bottom = true;
        }
        for r in below {
            if !seen.insert(r) {
                continue;
            }
            if bound.contains(&r) {
                out.insert(TAtom::new(u.clone(), r));
            } else {
                stack.push(r);
            }
        }
    }
    if reaches_bottom && bound.contains(&Point::START) {
        out.insert(TAtom::new(u.clone(), Point::START));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typesys::Type;

    fn pi(edges: &[(u32, u32)]) -> Pi {
        Pi::new([], edges.iter().map(|&(a, b)| (Point(a), Point(b))))
    }

    fn pts(v: &[u32]) -> Vec<Point> {
        v.iter().map(|&p| Point(p)).collect()
    }

    #[test]
    fn chains() {
        let o = pi(&[(1, 2), (2, 4), (3, 4)]);
        assert_eq!(p_chains(&o, Point(4)).unwrap(), vec![pts(&[1, 2, 4]), pts(&[3, 4])]);
        let single = Pi::new([Point(1)], []);
        assert_eq!(p_chains(&single, Point(1)).unwrap(), vec![pts(&[1])]);
        let line = pi(&[(1, 2), (2, 3)]);
        assert_eq!(p_chains(&line, Point(3)).unwrap(), vec![pts(&[1, 2, 3])]);
        assert!(p_chains(&line, Point(9)).is_err());
    }

    #[test]
    fn predecessor_on_one_chain() {
        let v = Name::Internal(Point(2));
        let mut g = TypeEnv::new();
        g.insert(TAtom::new(v.clone(), Point(2)), Type::empty());
        g.insert(TAtom::new(v.clone(), Point(8)), Type::empty());
        let o = pi(&[(2, 8), (8, 10)]);
        assert_eq!(
            ip_type(&v, &g, &o, Point(10)),
            [TAtom::new(v.clone(), Point(8))].into_iter().collect()
        );
        assert!(ip_type(&Name::var("q"), &g, &o, Point(10)).is_empty());
    }

    #[test]
    fn predecessor_on_joining_branches() {
        let v = Name::Internal(Point(2));
        let mut g = TypeEnv::new();
        g.insert(TAtom::new(v.clone(), Point(3)), Type::empty());
        g.insert(TAtom::new(v.clone(), Point(4)), Type::empty());
        let o = pi(&[(1, 3), (1, 4), (3, 5), (4, 5)]);
        assert_eq!(
            ip_type(&v, &g, &o, Point(5)),
            [TAtom::new(v.clone(), Point(3)), TAtom::new(v, Point(4))]
                .into_iter()
                .collect()
        );
    }
}
