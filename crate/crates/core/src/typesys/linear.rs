use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::syntax::{Expr, Occurrence, Point};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// An abstraction bound to `name` at `binder` is used more than once.
    MultipleUse {
        name: String,
        binder: Point,
        uses: Vec<Point>,
    },
    /// A `ref` at `point` would store an abstraction.
    AbstractionInRef { point: Point },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MultipleUse { name, binder, uses } => {
                let uses: Vec<String> = uses.iter().map(|p| p.to_string()).collect();
                write!(
                    f,
                    "abstraction {name} bound at {binder} is used at points {}",
                    uses.join(", ")
                )
            }
            Violation::AbstractionInRef { point } => {
                write!(f, "reference at point {point} would hold an abstraction")
            }
        }
    }
}

/// Every abstraction bound by `let`/`let rec` may be used at most once, and
/// no reference may hold one.
pub fn linear_use_check(o: &Occurrence) -> Result<(), Vec<Violation>> {
    let mut bound: BTreeMap<&str, Point> = BTreeMap::new();
    for n in o.subterms() {
        if let Expr::Let(x, e1, _) | Expr::LetRec(x, e1, _) = &n.expr {
            if e1.is_abs() {
                bound.insert(x, e1.point);
            }
        }
    }
    let mut uses: BTreeMap<&str, Vec<Point>> = BTreeMap::new();
    let mut violations = Vec::new();
    for n in o.subterms() {
        match &n.expr {
            Expr::Var(x) if bound.contains_key(x.as_str()) => {
                uses.entry(x).or_default().push(n.point);
            }
            Expr::Ref(e) => {
                let holds_abs = match &e.expr {
                    Expr::Abs(..) => true,
                    Expr::Var(x) => bound.contains_key(x.as_str()),
                    _ => false,
                };
                if holds_abs {
                    violations.push(Violation::AbstractionInRef { point: n.point });
                }
            }
            _ => {}
        }
    }
    for (name, mut points) in uses {
        if points.len() > 1 {
            points.sort();
            violations.push(Violation::MultipleUse {
                name: name.to_string(),
                binder: bound[name],
                uses: points,
            });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn single_use_passes() {
        assert!(linear_use_check(&parse("(let f (λy.y@1)@2 (f@3 1@4)@5)@6").unwrap()).is_ok());
    }

    #[test]
    fn double_use_names_both_points() {
        let o = parse("(let x (λy.y@1)@2 (x@3 (x@4 1@5)@6)@7)@8").unwrap();
        let v = linear_use_check(&o).unwrap_err();
        assert_eq!(
            v,
            vec![Violation::MultipleUse {
                name: "x".into(),
                binder: Point(2),
                uses: vec![Point(3), Point(4)],
            }]
        );
    }

    #[test]
    fn abstraction_in_ref() {
        let v = linear_use_check(&parse("(ref (λy.y@1)@2)@3").unwrap()).unwrap_err();
        assert_eq!(v, vec![Violation::AbstractionInRef { point: Point(3) }]);
    }
}
