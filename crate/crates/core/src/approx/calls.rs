use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{Expr, Occurrence, Point};

/// Static resolution of applications to the abstractions they call.
///
/// A callee resolves when it is an abstraction literal or a variable bound
/// by `let`/`let rec` to one. Binder names are unique after parsing, so a
/// name identifies its binding site.
#[derive(Debug, Clone)]
pub struct CallSites<'a> {
    lambdas: BTreeMap<Point, &'a Occurrence>,
    callee: BTreeMap<Point, Point>,
    sites: BTreeMap<Point, Vec<Point>>,
    recursive: BTreeSet<Point>,
}

impl<'a> CallSites<'a> {
    pub fn new(o: &'a Occurrence) -> Self {
        let mut lambdas = BTreeMap::new();
        let mut bound = BTreeMap::new();
        for n in o.subterms() {
            match &n.expr {
                Expr::Abs(..) => {
                    lambdas.insert(n.point, n);
                }
                Expr::Let(x, e1, _) | Expr::LetRec(x, e1, _) if e1.is_abs() => {
                    bound.insert(x.clone(), e1.point);
                }
                _ => {}
            }
        }
        let mut callee = BTreeMap::new();
        let mut sites: BTreeMap<Point, Vec<Point>> = BTreeMap::new();
        for n in o.subterms() {
            let Expr::App(f, _) = &n.expr else { continue };
            let target = match &f.expr {
                Expr::Abs(..) => Some(f.point),
                Expr::Var(x) => bound.get(x).copied(),
                _ => None,
            };
            if let Some(lam) = target {
                callee.insert(n.point, lam);
                sites.entry(lam).or_default().push(n.point);
            }
        }
        let mut recursive = BTreeSet::new();
        for (&app, &lam) in &callee {
            if lambdas[&lam].points().contains(&app) {
                recursive.insert(app);
            }
        }
        CallSites {
            lambdas,
            callee,
            sites,
            recursive,
        }
    }

    /// The abstraction an application calls, if it resolves.
    pub fn lambda_of(&self, app: Point) -> Option<&'a Occurrence> {
        self.callee.get(&app).map(|p| self.lambdas[p])
    }

    /// True when the application sits inside the body of the abstraction
    /// it calls.
    pub fn is_recursive(&self, app: Point) -> bool {
        self.recursive.contains(&app)
    }

    /// The first call site outside the abstraction's own body.
    pub fn external_site(&self, lam: Point) -> Option<Point> {
        self.sites
            .get(&lam)?
            .iter()
            .copied()
            .find(|a| !self.recursive.contains(a))
    }

    pub fn sites(&self, lam: Point) -> &[Point] {
        self.sites.get(&lam).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn lambdas(&self) -> impl Iterator<Item = &'a Occurrence> + '_ {
        self.lambdas.values().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn resolves_let_bound_and_literal_callees() {
        let o = parse("(let f (λy. y@1)@2 (f@3 ((λz. z@4)@5 6@7)@8)@9)@10").unwrap();
        let cs = CallSites::new(&o);
        assert_eq!(cs.lambda_of(Point(9)).unwrap().point, Point(2));
        assert_eq!(cs.lambda_of(Point(8)).unwrap().point, Point(5));
        assert_eq!(cs.external_site(Point(2)), Some(Point(9)));
        assert!(!cs.is_recursive(Point(9)));
    }

    #[test]
    fn recursive_call_is_flagged() {
        let o = parse("(let rec f (λn. (f@1 n@2)@3)@4 0@5)@6").unwrap();
        let cs = CallSites::new(&o);
        assert!(cs.is_recursive(Point(3)));
        assert_eq!(cs.external_site(Point(4)), None);
        assert_eq!(cs.sites(Point(4)), &[Point(3)]);
    }
}
