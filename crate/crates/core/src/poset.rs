//! Reachability over a finite relation on program points.
//!
//! Both the runtime order and the approximated order are stored as plain edge
//! sets; this index answers closure queries and exposes the covering
//! (Hasse) relation used to walk maximal chains.

use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::Point;

#[derive(Debug, Clone)]
pub struct OrderIndex {
    ids: BTreeMap<Point, usize>,
    points: Vec<Point>,
    /// `reach[i]` holds every j with i ⊏⁺ j.
    reach: Vec<BTreeSet<usize>>,
    covers_below: Vec<Vec<usize>>,
}

impl OrderIndex {
    pub fn new<'a>(
        points: impl IntoIterator<Item = Point>,
        edges: impl IntoIterator<Item = &'a (Point, Point)>,
    ) -> Self {
        let mut ids = BTreeMap::new();
        let mut pts = Vec::new();
        let add = |p: Point, ids: &mut BTreeMap<Point, usize>, pts: &mut Vec<Point>| {
            *ids.entry(p).or_insert_with(|| {
                pts.push(p);
                pts.len() - 1
            })
        };
        for p in points {
            add(p, &mut ids, &mut pts);
        }
        let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); pts.len()];
        for &(a, b) in edges {
            let i = add(a, &mut ids, &mut pts);
            let j = add(b, &mut ids, &mut pts);
            if succ.len() < pts.len() {
                succ.resize(pts.len(), BTreeSet::new());
            }
            if i != j {
                succ[i].insert(j);
            }
        }
        succ.resize(pts.len(), BTreeSet::new());
        let n = pts.len();
        let mut reach = vec![BTreeSet::new(); n];
        for start in 0..n {
            let mut stack: Vec<usize> = succ[start].iter().copied().collect();
            while let Some(k) = stack.pop() {
                if reach[start].insert(k) {
                    stack.extend(succ[k].iter().copied());
                }
            }
        }
        // j covers i when i ⊏ j directly and nothing sits strictly between.
        let mut covers_below = vec![Vec::new(); n];
        for i in 0..n {
            for &j in &reach[i] {
                let between = reach[i].iter().any(|&k| k != j && reach[k].contains(&j));
                if !between {
                    covers_below[j].push(i);
                }
            }
        }
        OrderIndex {
            ids,
            points: pts,
            reach,
            covers_below,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.ids.contains_key(&p)
    }

    /// Strict closure: p ⊏⁺ q.
    pub fn less(&self, p: Point, q: Point) -> bool {
        match (self.ids.get(&p), self.ids.get(&q)) {
            (Some(&i), Some(&j)) => self.reach[i].contains(&j),
            _ => false,
        }
    }

    pub fn less_eq(&self, p: Point, q: Point) -> bool {
        p == q || self.less(p, q)
    }

    /// A cycle exists iff some point reaches itself.
    pub fn is_partial_order(&self) -> bool {
        (0..self.points.len()).all(|i| !self.reach[i].contains(&i))
    }

    /// Points immediately below `p` in the covering relation.
    pub fn covered_by(&self, p: Point) -> Vec<Point> {
        match self.ids.get(&p) {
            Some(&j) => self.covers_below[j].iter().map(|&i| self.points[i]).collect(),
            None => vec![],
        }
    }

    /// Greatest elements of `candidates` under the closure.
    pub fn maximal<'a>(&self, candidates: impl IntoIterator<Item = &'a Point> + Clone) -> Vec<Point> {
        let all: Vec<Point> = candidates.into_iter().copied().collect();
        all.iter()
            .copied()
            .filter(|&p| !all.iter().any(|&q| q != p && self.less(p, q)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(edges: &[(u32, u32)]) -> OrderIndex {
        let e: Vec<(Point, Point)> = edges.iter().map(|&(a, b)| (Point(a), Point(b))).collect();
        OrderIndex::new([], &e)
    }

    #[test]
    fn closure_and_covers() {
        let o = idx(&[(1, 2), (2, 3), (1, 3)]);
        assert!(o.less(Point(1), Point(3)));
        assert!(!o.less(Point(3), Point(1)));
        assert_eq!(o.covered_by(Point(3)), vec![Point(2)]);
        assert!(o.is_partial_order());
    }

    #[test]
    fn cycle_detected() {
        assert!(!idx(&[(1, 2), (2, 1)]).is_partial_order());
    }

    #[test]
    fn maximal_of_diamond() {
        let o = idx(&[(1, 3), (1, 4), (3, 5), (4, 5)]);
        let mut m = o.maximal(&[Point(3), Point(4)]);
        m.sort();
        assert_eq!(m, vec![Point(3), Point(4)]);
        assert_eq!(o.maximal(&[Point(1), Point(5)]), vec![Point(5)]);
    }
}
