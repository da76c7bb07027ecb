use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use super::dep::{ip_sem, AmbiguousPredecessor, Atom, DepPair, DepState, Element, LocOcc, VarOcc};
use super::{Closure, Env, Loc, Store, Value};
use crate::syntax::{Arm, Constant, Expr, Occurrence, Pattern, Point, Prim};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;
/// Safe on a 2 MiB thread stack in unoptimized builds.
pub const DEFAULT_MAX_DEPTH: usize = 400;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable {name} at point {point}")]
    Unbound { name: String, point: Point },
    #[error("runtime type error at point {point}: {message}")]
    RuntimeType { point: Point, message: String },
    #[error("no clause matches at point {point}")]
    NoMatchingPattern { point: Point },
    #[error("tuple patterns are not supported (point {point})")]
    UnsupportedPattern { point: Point },
    #[error("let rec at point {point} must bind an abstraction")]
    LetRecNonAbstraction { point: Point },
    #[error("dangling location {loc} at point {point}")]
    Dangling { loc: Loc, point: Point },
    #[error("at point {point}: {source}")]
    Ambiguous {
        point: Point,
        #[source]
        source: AmbiguousPredecessor,
    },
    #[error("step budget of {budget} exhausted")]
    Timeout { budget: u64 },
    #[error("nesting depth {depth} exceeded")]
    DepthExceeded { depth: usize },
}

impl EvalError {
    /// True for resource exhaustion, where the run is inconclusive rather
    /// than wrong.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, EvalError::Timeout { .. } | EvalError::DepthExceeded { .. })
    }
}

type Result<T> = std::result::Result<T, EvalError>;

/// The rule that concluded a sub-evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Const,
    Var,
    Abs,
    App,
    Prim,
    Let,
    LetRec,
    Case,
    Ref,
    RefRead,
    RefWrite,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Const => "CONST",
            Rule::Var => "VAR",
            Rule::Abs => "ABS",
            Rule::App => "APP",
            Rule::Prim => "FUNC-APP",
            Rule::Let => "LET",
            Rule::LetRec => "LET-REC",
            Rule::Case => "CASE",
            Rule::Ref => "REF",
            Rule::RefRead => "REF-READ",
            Rule::RefWrite => "REF-WRITE",
        })
    }
}

/// A finished sub-evaluation `env; o; sto; dep; p ⇓ v; sto'; dep'; d`.
pub struct Exit<'a> {
    pub rule: Rule,
    pub occurrence: &'a Occurrence,
    pub env: &'a Env,
    pub input: Point,
    pub value: &'a Value,
    pub store: &'a Store,
    pub dep: &'a DepState,
    pub footprint: &'a DepPair,
}

/// Hooks invoked around every sub-evaluation.
pub trait Observer {
    fn enter(&mut self, _o: &Occurrence, _env: &Env, _input: Point, _dep: &DepState) {}
    fn exit(&mut self, _step: &Exit<'_>) {}
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub value: Value,
    pub store: Store,
    pub dep: DepState,
    pub footprint: DepPair,
    pub steps: u64,
}

pub struct Evaluator<'a> {
    budget: u64,
    max_depth: usize,
    steps: u64,
    depth: usize,
    observer: Option<&'a mut dyn Observer>,
}

impl Default for Evaluator<'_> {
    fn default() -> Self {
        Evaluator::new()
    }
}

impl<'a> Evaluator<'a> {
    pub fn new() -> Self {
        Evaluator {
            budget: DEFAULT_STEP_BUDGET,
            max_depth: DEFAULT_MAX_DEPTH,
            steps: 0,
            depth: 0,
            observer: None,
        }
    }

    pub fn budget(mut self, steps: u64) -> Self {
        self.budget = steps;
        self
    }

    pub fn max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn observer(mut self, obs: &'a mut dyn Observer) -> Self {
        self.observer = Some(obs);
        self
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Evaluates `o` with input point `p`, updating `store` and `dep` in
    /// place.
    pub fn eval(
        &mut self,
        env: &Env,
        o: &Occurrence,
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
    ) -> Result<(Value, DepPair)> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(EvalError::Timeout { budget: self.budget });
        }
        if self.depth >= self.max_depth {
            return Err(EvalError::DepthExceeded { depth: self.max_depth });
        }
        if let Some(obs) = self.observer.as_deref_mut() {
            obs.enter(o, env, p, dep);
        }
        self.depth += 1;
        let result = self.step(env, o, store, dep, p);
        self.depth -= 1;
        let (rule, value, footprint) = result?;
        if let Some(obs) = self.observer.as_deref_mut() {
            obs.exit(&Exit {
                rule,
                occurrence: o,
                env,
                input: p,
                value: &value,
                store,
                dep,
                footprint: &footprint,
            });
        }
        Ok((value, footprint))
    }

    fn step(
        &mut self,
        env: &Env,
        o: &Occurrence,
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
    ) -> Result<(Rule, Value, DepPair)> {
        let here = o.point;
        match &o.expr {
            Expr::Const(c) => Ok((Rule::Const, Value::Const(*c), DepPair::empty())),
            Expr::Var(x) => var(env, x, dep, here),
            Expr::Abs(x, body) => Ok((Rule::Abs, closure(x, None, body, env), DepPair::empty())),
            Expr::App(f, a) => self.app(env, f, a, store, dep, p, here),
            Expr::Prim(op, a, b) => self.prim(env, *op, a, b, store, dep, p, here),
            Expr::Let(x, e1, e2) => self.let_(env, x, e1, e2, store, dep, p),
            Expr::LetRec(f, e1, e2) => self.let_rec(env, f, e1, e2, store, dep, p, here),
            Expr::Case(s, arms) => self.case(env, s, arms, store, dep, p, here),
            Expr::Ref(e) => self.reference(env, e, store, dep, p, here),
            Expr::Deref(e) => self.deref(env, e, store, dep, p, here),
            Expr::Assign(t, e) => self.assign(env, t, e, store, dep, p, here),
        }
    }

    #[allow(clippy::too_many_arguments)]
    #[inline(never)]
    fn app(
        &mut self,
        env: &Env,
        f: &Occurrence,
        a: &Occurrence,
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
        here: Point,
    ) -> Result<(Rule, Value, DepPair)> {
        let (vf, df) = self.eval(env, f, store, dep, p)?;
        let (va, da) = self.eval(env, a, store, dep, f.point)?;
        let Value::Closure(c) = &vf else {
            return Err(EvalError::RuntimeType {
                point: here,
                message: format!("applying non-function {vf}"),
            });
        };
        bind_threaded(dep, Atom::var(c.param.clone(), a.point), da, p);
        let mut inner = c.env.extend(c.param.clone(), va);
        if let Some(name) = &c.rec_name {
            inner.insert(name.clone(), vf.clone());
        }
        let (vb, db) = self.eval(&inner, &c.body, store, dep, a.point)?;
        Ok((Rule::App, vb, db.union(&df)))
    }

    #[allow(clippy::too_many_arguments)]
    #[inline(never)]
    fn prim(
        &mut self,
        env: &Env,
        op: Prim,
        a: &Occurrence,
        b: &Occurrence,
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
        here: Point,
    ) -> Result<(Rule, Value, DepPair)> {
        let (v1, d1) = self.eval(env, a, store, dep, p)?;
        let (v2, d2) = self.eval(env, b, store, dep, a.point)?;
        let v = apply_prim(op, &v1, &v2, here)?;
        Ok((Rule::Prim, v, d1.union(&d2)))
    }

    #[allow(clippy::too_many_arguments)]
    #[inline(never)]
    fn let_(
        &mut self,
        env: &Env,
        x: &str,
        e1: &Occurrence,
        e2: &Occurrence,
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
    ) -> Result<(Rule, Value, DepPair)> {
        let (v1, d1) = self.eval(env, e1, store, dep, p)?;
        bind_threaded(dep, Atom::var(x, e1.point), d1, p);
        let (v2, d2) = self.eval(&env.extend(x, v1), e2, store, dep, e1.point)?;
        Ok((Rule::Let, v2, d2))
    }

    #[allow(clippy::too_many_arguments)]
    #[inline(never)]
    fn let_rec(
        &mut self,
        env: &Env,
        f: &str,
        e1: &Occurrence,
        e2: &Occurrence,
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
        here: Point,
    ) -> Result<(Rule, Value, DepPair)> {
        let Expr::Abs(x, body) = &e1.expr else {
            return Err(EvalError::LetRecNonAbstraction { point: here });
        };
        let v1 = closure(x, Some(f), body, env);
        if let Some(obs) = self.observer.as_deref_mut() {
            obs.enter(e1, env, p, dep);
            obs.exit(&Exit {
                rule: Rule::Abs,
                occurrence: e1,
                env,
                input: p,
                value: &v1,
                store,
                dep,
                footprint: &DepPair::empty(),
            });
        }
        bind_threaded(dep, Atom::var(f, e1.point), DepPair::empty(), p);
        let (v2, d2) = self.eval(&env.extend(f, v1), e2, store, dep, e1.point)?;
        Ok((Rule::LetRec, v2, d2))
    }

    #[allow(clippy::too_many_arguments)]
    #[inline(never)]
    fn case(
        &mut self,
        env: &Env,
        s: &Occurrence,
        arms: &[Arm],
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
        here: Point,
    ) -> Result<(Rule, Value, DepPair)> {
        let (vs, ds) = self.eval(env, s, store, dep, p)?;
        for arm in arms {
            let Some(binding) = match_pattern(&vs, &arm.pattern, here)? else {
                continue;
            };
            let mut inner = env.clone();
            for (x, v) in binding.iter() {
                bind_threaded(dep, Atom::var(x.clone(), s.point), ds.clone(), p);
                inner.insert(x.clone(), v.clone());
            }
            let (v, d) = self.eval(&inner, &arm.body, store, dep, s.point)?;
            return Ok((Rule::Case, v, d.union(&ds)));
        }
        Err(EvalError::NoMatchingPattern { point: here })
    }

    #[inline(never)]
    fn reference(
        &mut self,
        env: &Env,
        e: &Occurrence,
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
        here: Point,
    ) -> Result<(Rule, Value, DepPair)> {
        let (v, d) = self.eval(env, e, store, dep, p)?;
        let l = store.alloc(v);
        bind_threaded(dep, Atom::loc(l, here), d, p);
        Ok((Rule::Ref, Value::Loc(l), DepPair::empty()))
    }

    #[inline(never)]
    fn deref(
        &mut self,
        env: &Env,
        e: &Occurrence,
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
        here: Point,
    ) -> Result<(Rule, Value, DepPair)> {
        let (v, d1) = self.eval(env, e, store, dep, p)?;
        let l = expect_loc(&v, here)?;
        let content = store
            .get(l)
            .cloned()
            .ok_or(EvalError::Dangling { loc: l, point: here })?;
        let d = match lookup(dep, &Element::Loc(l), here)? {
            Some(atom) => dep.w[&atom].union(&d1).with_loc(LocOcc {
                loc: l,
                point: atom.point(),
            }),
            None => d1,
        };
        Ok((Rule::RefRead, content, d))
    }

    #[allow(clippy::too_many_arguments)]
    #[inline(never)]
    fn assign(
        &mut self,
        env: &Env,
        target: &Occurrence,
        e: &Occurrence,
        store: &mut Store,
        dep: &mut DepState,
        p: Point,
        here: Point,
    ) -> Result<(Rule, Value, DepPair)> {
        let (v1, d1) = self.eval(env, target, store, dep, p)?;
        let l = expect_loc(&v1, here)?;
        let (v2, d2) = self.eval(env, e, store, dep, target.point)?;
        if store.get(l).is_none() {
            return Err(EvalError::Dangling { loc: l, point: here });
        }
        let previous = lookup(dep, &Element::Loc(l), here)?;
        store.set(l, v2);
        if let Some(prev) = previous {
            dep.add_edge(prev.point(), here);
        }
        dep.bind(Atom::loc(l, here), d2);
        Ok((Rule::RefWrite, Value::unit(), d1))
    }
}

fn var(env: &Env, x: &str, dep: &DepState, here: Point) -> Result<(Rule, Value, DepPair)> {
    let v = env.get(x).cloned().ok_or_else(|| EvalError::Unbound {
        name: x.to_string(),
        point: here,
    })?;
    let prior = lookup(dep, &Element::Var(x.to_string()), here)?;
    let d = prior
        .map(|a| dep.w[&a].clone())
        .unwrap_or_default()
        .with_var(VarOcc::new(x, here));
    Ok((Rule::Var, v, d))
}

fn closure(x: &str, rec_name: Option<&str>, body: &Occurrence, env: &Env) -> Value {
    Value::Closure(Rc::new(Closure {
        param: x.to_string(),
        rec_name: rec_name.map(str::to_string),
        body: body.clone(),
        env: env.clone(),
    }))
}

/// Binds `atom ↦ d` and orders it after the evaluation's input point.
fn bind_threaded(dep: &mut DepState, atom: Atom, d: DepPair, input: Point) {
    dep.add_edge(input, atom.point());
    dep.bind(atom, d);
}

fn lookup(dep: &DepState, u: &Element, point: Point) -> Result<Option<Atom>> {
    ip_sem(u, dep).map_err(|source| EvalError::Ambiguous { point, source })
}

fn expect_loc(v: &Value, point: Point) -> Result<Loc> {
    v.as_loc().ok_or_else(|| EvalError::RuntimeType {
        point,
        message: format!("expected a location, found {v}"),
    })
}

fn apply_prim(op: Prim, a: &Value, b: &Value, point: Point) -> Result<Value> {
    use Constant::{Bool, Nat};
    let (Value::Const(x), Value::Const(y)) = (a, b) else {
        return Err(EvalError::RuntimeType {
            point,
            message: format!("{} expects constants", op.symbol()),
        });
    };
    let c = match (op, *x, *y) {
        (Prim::Add, Nat(m), Nat(n)) => Nat(m.wrapping_add(n)),
        (Prim::Sub, Nat(m), Nat(n)) => Nat(m.saturating_sub(n)),
        (Prim::Mul, Nat(m), Nat(n)) => Nat(m.wrapping_mul(n)),
        (Prim::Lt, Nat(m), Nat(n)) => Bool(m < n),
        (Prim::Eq, x, y) if std::mem::discriminant(&x) == std::mem::discriminant(&y) => {
            Bool(x == y)
        }
        (Prim::And, Bool(m), Bool(n)) => Bool(m && n),
        (Prim::Or, Bool(m), Bool(n)) => Bool(m || n),
        _ => {
            return Err(EvalError::RuntimeType {
                point,
                message: format!("{} applied to {x} and {y}", op.symbol()),
            })
        }
    };
    Ok(Value::Const(c))
}

/// Matches `v` against `pat`. `Ok(None)` means the clause does not apply;
/// otherwise the result holds the bindings the pattern introduces.
pub fn match_pattern(v: &Value, pat: &Pattern, point: Point) -> Result<Option<Env>> {
    Ok(match (pat, v) {
        (Pattern::Wildcard, _) => Some(Env::new()),
        (Pattern::Var(x), v) => Some(Env::new().extend(x.clone(), v.clone())),
        (Pattern::Nat(n), Value::Const(Constant::Nat(m))) if n == m => Some(Env::new()),
        (Pattern::Bool(b), Value::Const(Constant::Bool(c))) if b == c => Some(Env::new()),
        (Pattern::Tuple(_), _) => return Err(EvalError::UnsupportedPattern { point }),
        _ => None,
    })
}

/// Evaluates `o` from the given state, threading it functionally.
pub fn eval(
    env: &Env,
    o: &Occurrence,
    mut store: Store,
    mut dep: DepState,
    p: Point,
) -> Result<Outcome> {
    let mut ev = Evaluator::new();
    let (value, footprint) = ev.eval(env, o, &mut store, &mut dep, p)?;
    Ok(Outcome {
        value,
        store,
        dep,
        footprint,
        steps: ev.steps(),
    })
}

/// Evaluates a closed program from the empty state.
pub fn run(o: &Occurrence) -> Result<Outcome> {
    run_with(o, Evaluator::new())
}

pub fn run_with(o: &Occurrence, mut ev: Evaluator<'_>) -> Result<Outcome> {
    let mut store = Store::new();
    let mut dep = DepState::new();
    let (value, footprint) = ev.eval(&Env::new(), o, &mut store, &mut dep, Point::START)?;
    Ok(Outcome {
        value,
        store,
        dep,
        footprint,
        steps: ev.steps(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;
    use std::collections::BTreeSet;

    fn edges(pairs: &[(u32, u32)]) -> BTreeSet<(Point, Point)> {
        pairs.iter().map(|&(a, b)| (Point(a), Point(b))).collect()
    }

    #[test]
    fn example_one_dependency_function() {
        let out = run(&parse(crate::EXAMPLE_ONE).unwrap()).unwrap();
        assert_eq!(out.value, Value::nat(5));
        let l = Loc(0);
        let w = &out.dep.w;
        assert_eq!(w.len(), 5);
        assert!(w[&Atom::var("x", Point(2))].is_empty());
        assert!(w[&Atom::var("z", Point(4))].is_empty());
        assert!(w[&Atom::loc(l, Point(2))].is_empty());
        assert_eq!(
            w[&Atom::loc(l, Point(8))],
            DepPair::empty().with_var(VarOcc::new("z", Point(7)))
        );
        assert_eq!(
            w[&Atom::var("y", Point(9))],
            DepPair::empty().with_var(VarOcc::new("x", Point(5)))
        );
        assert_eq!(out.dep.order, edges(&[(2, 4), (2, 9), (5, 9), (2, 8), (7, 8)]));
        assert_eq!(
            out.footprint,
            DepPair::empty()
                .with_loc(LocOcc { loc: l, point: Point(8) })
                .with_var(VarOcc::new("z", Point(7)))
                .with_var(VarOcc::new("x", Point(6)))
        );
    }

    #[test]
    fn recursion_and_case() {
        let src = "(let rec f (λn. (case n [0 -> 1, k -> (* k (f (- k 1)))])) (f 5))";
        let out = run(&parse(src).unwrap()).unwrap();
        assert_eq!(out.value, Value::nat(120));
    }

    #[test]
    fn match_results() {
        let p = Point(1);
        assert!(match_pattern(&Value::nat(3), &Pattern::Nat(4), p).unwrap().is_none());
        assert!(match_pattern(&Value::nat(3), &Pattern::Nat(3), p).unwrap().unwrap().is_empty());
        let b = match_pattern(&Value::nat(3), &Pattern::Var("k".into()), p)
            .unwrap()
            .unwrap();
        assert_eq!(b.get("k"), Some(&Value::nat(3)));
        assert!(match_pattern(&Value::nat(3), &Pattern::Tuple(vec![]), p).is_err());
    }

    #[test]
    fn errors() {
        let cases = [
            ("x", "unbound"),
            ("(case 3 [0 -> 1])", "no clause"),
            ("(! 3)", "location"),
            ("(3 4)", "non-function"),
        ];
        for (src, needle) in cases {
            let err = run(&parse(src).unwrap()).unwrap_err();
            assert!(err.to_string().contains(needle), "{src}: {err}");
        }
    }

    #[test]
    fn budget_exhaustion() {
        let src = "(let rec f (λn. (f n)) (f 0))";
        let err = run_with(&parse(src).unwrap(), Evaluator::new().budget(500)).unwrap_err();
        assert!(err.is_resource_limit());
        let err = run(&parse(src).unwrap()).unwrap_err();
        assert!(matches!(err, EvalError::DepthExceeded { .. }), "{err}");
    }

    #[test]
    fn observer_sees_every_point() {
        struct Count(Vec<Point>);
        impl Observer for Count {
            fn exit(&mut self, step: &Exit<'_>) {
                self.0.push(step.occurrence.point);
            }
        }
        let o = parse(crate::EXAMPLE_ONE).unwrap();
        let mut c = Count(vec![]);
        run_with(&o, Evaluator::new().observer(&mut c)).unwrap();
        let mut seen = c.0.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), c.0.len());
        assert_eq!(seen.len(), o.points().len());
        assert_eq!(*c.0.last().unwrap(), Point(12));
    }
}
