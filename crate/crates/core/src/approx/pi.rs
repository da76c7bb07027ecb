use std::collections::BTreeSet;

use super::calls::CallSites;
use crate::syntax::{Expr, Occurrence, Point};
use crate::typesys::Pi;

/// Orders program points by when their evaluation can finish.
///
/// Each occurrence is placed after the point its evaluation starts from and
/// after its last sub-evaluation; siblings are chained left to right. Case
/// clauses all start from the scrutinee and are unrelated to each other.
/// The body of an abstraction is placed at its call site, after the
/// argument; bodies that are never called from outside are ordered on their
/// own.
pub fn approximate_pi(o: &Occurrence) -> Pi {
    let sites = CallSites::new(o);
    let mut walk = Walk {
        sites: &sites,
        edges: BTreeSet::new(),
        placed: BTreeSet::new(),
    };
    walk.visit(o, Point::START);
    for lam in sites.lambdas() {
        if !walk.placed.contains(&lam.point) {
            if let Expr::Abs(_, body) = &lam.expr {
                walk.placed.insert(lam.point);
                walk.visit(body, Point::START);
            }
        }
    }
    Pi::new(o.points(), walk.edges)
}

struct Walk<'s, 'a> {
    sites: &'s CallSites<'a>,
    edges: BTreeSet<(Point, Point)>,
    /// Abstractions whose body has been walked.
    placed: BTreeSet<Point>,
}

impl Walk<'_, '_> {
    fn edge(&mut self, a: Point, b: Point) {
        if !a.is_start() && a != b {
            self.edges.insert((a, b));
        }
    }

    fn visit(&mut self, n: &Occurrence, input: Point) {
        self.edge(input, n.point);
        match &n.expr {
            Expr::Abs(..) => {}
            Expr::Case(s, arms) => {
                self.visit(s, input);
                for arm in arms {
                    self.visit(&arm.body, s.point);
                    self.edge(arm.body.point, n.point);
                }
                self.edge(s.point, n.point);
            }
            Expr::App(f, a) => {
                self.visit(f, input);
                self.visit(a, f.point);
                self.edge(a.point, n.point);
                let lam = self
                    .sites
                    .lambda_of(n.point)
                    .filter(|_| !self.sites.is_recursive(n.point));
                if let Some(lam) = lam {
                    if self.placed.insert(lam.point) {
                        if let Expr::Abs(_, body) = &lam.expr {
                            self.visit(body, a.point);
                            self.edge(body.point, n.point);
                        }
                    }
                }
            }
            _ => {
                let mut cur = input;
                for c in n.children() {
                    self.visit(c, cur);
                    cur = c.point;
                }
                self.edge(cur, n.point);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn straight_line_is_a_chain() {
        let pi = approximate_pi(&parse("(let a 1@1 a@2)@3").unwrap());
        assert_eq!(
            pi.edges().iter().copied().collect::<Vec<_>>(),
            vec![(Point(1), Point(2)), (Point(2), Point(3))]
        );
        assert!(pi.is_partial_order());
    }

    #[test]
    fn case_clauses_are_incomparable() {
        let pi = approximate_pi(&parse("(case 1@1 [0 -> 2@2, _ -> 3@3])@4").unwrap());
        assert!(!pi.less(Point(2), Point(3)) && !pi.less(Point(3), Point(2)));
        assert!(pi.less(Point(1), Point(2)) && pi.less(Point(1), Point(3)));
        assert!(pi.less(Point(2), Point(4)) && pi.less(Point(3), Point(4)));
    }

    #[test]
    fn body_is_placed_at_its_call() {
        let pi = approximate_pi(&parse("(let f (λy. y@1)@2 (f@3 4@5)@6)@7").unwrap());
        assert!(pi.less(Point(5), Point(1)));
        assert!(pi.less(Point(1), Point(6)));
        assert!(pi.less(Point(2), Point(1)));
    }

    #[test]
    fn example_one_contains_realized_order() {
        let pi = approximate_pi(&parse(crate::EXAMPLE_ONE).unwrap());
        for (a, b) in [(2, 4), (2, 9), (5, 9), (2, 8), (7, 8)] {
            assert!(pi.less(Point(a), Point(b)), "{a} {b}");
        }
    }
}
