use super::{Expr, Occurrence, Pattern};

/// Prints an occurrence in the surface syntax with every point explicit.
/// The output reparses to an identical tree.
pub fn pretty(o: &Occurrence) -> String {
    let mut s = String::new();
    write_occ(o, &mut s);
    s
}

fn write_occ(o: &Occurrence, s: &mut String) {
    match &o.expr {
        Expr::Var(x) => s.push_str(x),
        Expr::Const(c) => s.push_str(&c.to_string()),
        Expr::Abs(x, body) => {
            s.push_str("(λ");
            s.push_str(x);
            s.push_str(". ");
            write_occ(body, s);
            s.push(')');
        }
        Expr::App(f, a) => {
            s.push('(');
            write_occ(f, s);
            s.push(' ');
            write_occ(a, s);
            s.push(')');
        }
        Expr::Prim(p, a, b) => {
            s.push('(');
            s.push_str(p.symbol());
            s.push(' ');
            write_occ(a, s);
            s.push(' ');
            write_occ(b, s);
            s.push(')');
        }
        Expr::Let(x, e1, e2) | Expr::LetRec(x, e1, e2) => {
            s.push_str(if matches!(o.expr, Expr::LetRec(..)) {
                "(let rec "
            } else {
                "(let "
            });
            s.push_str(x);
            s.push(' ');
            write_occ(e1, s);
            s.push(' ');
            write_occ(e2, s);
            s.push(')');
        }
        Expr::Case(scrutinee, arms) => {
            s.push_str("(case ");
            write_occ(scrutinee, s);
            s.push_str(" [");
            for (i, arm) in arms.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_pattern(&arm.pattern, s);
                s.push_str(" -> ");
                write_occ(&arm.body, s);
            }
            s.push_str("])");
        }
        Expr::Ref(e) => {
            s.push_str("(ref ");
            write_occ(e, s);
            s.push(')');
        }
        Expr::Assign(l, r) => {
            s.push('(');
            write_occ(l, s);
            s.push_str(" := ");
            write_occ(r, s);
            s.push(')');
        }
        Expr::Deref(e) => {
            s.push_str("(! ");
            write_occ(e, s);
            s.push(')');
        }
    }
    s.push('@');
    s.push_str(&o.point.to_string());
}

fn write_pattern(p: &Pattern, s: &mut String) {
    match p {
        Pattern::Nat(n) => s.push_str(&n.to_string()),
        Pattern::Bool(b) => s.push_str(&b.to_string()),
        Pattern::Var(x) => s.push_str(x),
        Pattern::Wildcard => s.push('_'),
        Pattern::Tuple(ps) => {
            s.push('(');
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_pattern(q, s);
            }
            s.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn example_one_round_trips() {
        let o = parse(crate::EXAMPLE_ONE).unwrap();
        let printed = pretty(&o);
        assert_eq!(parse(&printed).unwrap(), o);
        assert!(printed.starts_with("(let x (ref 4@1)@2"));
    }

    #[test]
    fn prints_all_forms() {
        let src = "(let rec f (λn. (case n [0 -> true, (a, _) -> false, k -> (< k 1)])) (f (! (ref ()))))";
        let o = parse(src).unwrap();
        assert_eq!(parse(&pretty(&o)).unwrap(), o);
    }
}
