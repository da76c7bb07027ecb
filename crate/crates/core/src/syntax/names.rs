use std::collections::{BTreeMap, BTreeSet};

use super::{Arm, Expr, Occurrence, Pattern};

/// Free variables of an occurrence. `let`, `let rec`, `λ` and variable
/// patterns bind.
pub fn free_vars(o: &Occurrence) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(o, &mut Vec::new(), &mut out);
    out
}

fn collect_free(o: &Occurrence, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match &o.expr {
        Expr::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Expr::Const(_) => {}
        Expr::Abs(x, body) => {
            bound.push(x.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        Expr::Let(x, e1, e2) => {
            collect_free(e1, bound, out);
            bound.push(x.clone());
            collect_free(e2, bound, out);
            bound.pop();
        }
        Expr::LetRec(f, e1, e2) => {
            bound.push(f.clone());
            collect_free(e1, bound, out);
            collect_free(e2, bound, out);
            bound.pop();
        }
        Expr::Case(s, arms) => {
            collect_free(s, bound, out);
            for Arm { pattern, body } in arms {
                let vars = pattern_vars(pattern);
                let n = vars.len();
                bound.extend(vars);
                collect_free(body, bound, out);
                bound.truncate(bound.len() - n);
            }
        }
        _ => {
            for c in o.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

pub(crate) fn pattern_vars(p: &Pattern) -> Vec<String> {
    match p {
        Pattern::Var(x) => vec![x.clone()],
        Pattern::Tuple(ps) => ps.iter().flat_map(pattern_vars).collect(),
        _ => vec![],
    }
}

/// Every binding occurrence's name, in pre-order (duplicates kept).
pub fn binders(o: &Occurrence) -> Vec<String> {
    let mut out = Vec::new();
    for t in o.subterms() {
        match &t.expr {
            Expr::Abs(x, _) | Expr::Let(x, ..) | Expr::LetRec(x, ..) => out.push(x.clone()),
            Expr::Case(_, arms) => {
                for arm in arms {
                    out.extend(pattern_vars(&arm.pattern));
                }
            }
            _ => {}
        }
    }
    out
}

/// Every identifier mentioned anywhere, bound or free.
pub fn all_identifiers(o: &Occurrence) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = binders(o).into_iter().collect();
    for t in o.subterms() {
        if let Expr::Var(x) = &t.expr {
            out.insert(x.clone());
        }
    }
    out
}

/// Renames binders so that no two binding occurrences share a name and no
/// binder shadows a free variable. A program whose binders are already
/// distinct comes back unchanged.
pub fn alpha_normalize(o: &Occurrence) -> Occurrence {
    let mut r = Renamer {
        taken: all_identifiers(o),
        seen: free_vars(o),
    };
    r.occ(o, &BTreeMap::new())
}

struct Renamer {
    taken: BTreeSet<String>,
    seen: BTreeSet<String>,
}

impl Renamer {
    fn bind(&mut self, x: &str) -> String {
        if self.seen.insert(x.to_string()) {
            return x.to_string();
        }
        let mut k = 1;
        loop {
            let candidate = format!("{x}_{k}");
            if !self.taken.contains(&candidate) {
                self.taken.insert(candidate.clone());
                self.seen.insert(candidate.clone());
                return candidate;
            }
            k += 1;
        }
    }

    fn pattern(&mut self, p: &Pattern, scope: &mut BTreeMap<String, String>) -> Pattern {
        match p {
            Pattern::Var(x) => {
                let y = self.bind(x);
                scope.insert(x.clone(), y.clone());
                Pattern::Var(y)
            }
            Pattern::Tuple(ps) => Pattern::Tuple(ps.iter().map(|q| self.pattern(q, scope)).collect()),
            other => other.clone(),
        }
    }

    fn occ(&mut self, o: &Occurrence, scope: &BTreeMap<String, String>) -> Occurrence {
        let b = |x: Occurrence| Box::new(x);
        let expr = match &o.expr {
            Expr::Var(x) => Expr::Var(scope.get(x).cloned().unwrap_or_else(|| x.clone())),
            Expr::Const(c) => Expr::Const(*c),
            Expr::Abs(x, body) => {
                let y = self.bind(x);
                let mut inner = scope.clone();
                inner.insert(x.clone(), y.clone());
                Expr::Abs(y, b(self.occ(body, &inner)))
            }
            Expr::App(f, a) => Expr::App(b(self.occ(f, scope)), b(self.occ(a, scope))),
            Expr::Prim(p, l, r) => Expr::Prim(*p, b(self.occ(l, scope)), b(self.occ(r, scope))),
            Expr::Let(x, e1, e2) => {
                let e1 = self.occ(e1, scope);
                let y = self.bind(x);
                let mut inner = scope.clone();
                inner.insert(x.clone(), y.clone());
                Expr::Let(y, b(e1), b(self.occ(e2, &inner)))
            }
            Expr::LetRec(f, e1, e2) => {
                let y = self.bind(f);
                let mut inner = scope.clone();
                inner.insert(f.clone(), y.clone());
                Expr::LetRec(y, b(self.occ(e1, &inner)), b(self.occ(e2, &inner)))
            }
            Expr::Case(s, arms) => {
                let s = self.occ(s, scope);
                let arms = arms
                    .iter()
                    .map(|arm| {
                        let mut inner = scope.clone();
                        let pattern = self.pattern(&arm.pattern, &mut inner);
                        Arm {
                            pattern,
                            body: self.occ(&arm.body, &inner),
                        }
                    })
                    .collect();
                Expr::Case(b(s), arms)
            }
            Expr::Ref(e) => Expr::Ref(b(self.occ(e, scope))),
            Expr::Assign(l, r) => Expr::Assign(b(self.occ(l, scope)), b(self.occ(r, scope))),
            Expr::Deref(e) => Expr::Deref(b(self.occ(e, scope))),
        };
        Occurrence::new(o.point, expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn fv(src: &str) -> Vec<String> {
        free_vars(&parse(src).unwrap()).into_iter().collect()
    }

    #[test]
    fn free_variables() {
        assert!(fv("(λx. x)").is_empty());
        assert_eq!(fv("(λx. y)"), vec!["y"]);
        assert!(fv(crate::EXAMPLE_ONE).is_empty());
        assert_eq!(fv("(let rec f (λn. (f n)) (g f))"), vec!["g"]);
        assert_eq!(fv("(case a [b -> b, _ -> c])"), vec!["a", "c"]);
    }

    #[test]
    fn duplicate_binders_are_renamed() {
        let o = parse("(let x 1 (let x 2 (+ x x)))").unwrap();
        let names = binders(&o);
        assert_eq!(names, vec!["x", "x_1"]);
        assert!(free_vars(&o).is_empty());
        // The inner uses refer to the renamed binder.
        let uses: Vec<_> = o
            .subterms()
            .into_iter()
            .filter_map(|t| match &t.expr {
                Expr::Var(x) => Some(x.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(uses, vec!["x_1", "x_1"]);
    }

    #[test]
    fn binder_shadowing_a_free_variable_is_renamed() {
        let o = parse("(+ y (let y 1 y))").unwrap();
        assert_eq!(binders(&o), vec!["y_1"]);
        assert_eq!(free_vars(&o).into_iter().collect::<Vec<_>>(), vec!["y"]);
    }

    #[test]
    fn distinct_binders_unchanged() {
        let src = "(let a 1@1 (let b 2@2 (+ a@3 b@4)@5)@6)@7";
        let o = parse(src).unwrap();
        assert_eq!(alpha_normalize(&o), o);
        assert_eq!(binders(&o), vec!["a", "b"]);
    }
}
