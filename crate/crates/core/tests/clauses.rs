use std::collections::BTreeSet;

use flowalias::agreement::{env_agree, Clause};
use flowalias::semantics::{run_with, DepState, Env, Evaluator, Exit, Observer, Store};
use flowalias::syntax::{parse, Point};
use flowalias::typesys::{analyze, Analysis, Pi, TAtom, Type, TypeEnv};
use flowalias::EXAMPLE_ONE;

struct Capture {
    at: Point,
    state: Option<(Env, Store, DepState)>,
}

impl Observer for Capture {
    fn exit(&mut self, s: &Exit<'_>) {
        if s.occurrence.point == self.at {
            self.state = Some((s.env.clone(), s.store.clone(), s.dep.clone()));
        }
    }
}

/// The running example's analysis and its state right after the read at point 10,
/// where `x` and `y` are in scope.
fn fixture() -> (Analysis, Env, Store, DepState) {
    let o = parse(EXAMPLE_ONE).unwrap();
    let a = analyze(&o).unwrap();
    let mut cap = Capture {
        at: Point(10),
        state: None,
    };
    run_with(&o, Evaluator::new().observer(&mut cap)).unwrap();
    let (env, store, dep) = cap.state.unwrap();
    (a, env, store, dep)
}

fn failing(gamma: &TypeEnv, pi: &Pi, a: &Analysis, env: &Env, store: &Store, dep: &DepState) -> BTreeSet<Clause> {
    env_agree(env, store, dep, gamma, pi, &a.ctx.kappa0).failed_clauses()
}

#[test]
fn unmutated_state_agrees() {
    let (a, env, store, dep) = fixture();
    let r = env_agree(&env, &store, &dep, &a.ctx.gamma, &a.ctx.pi, &a.ctx.kappa0);
    assert!(r.holds(), "{:?}", r.failures);
    assert_eq!(r.active.len(), 6);
}

#[test]
fn missing_local_binding() {
    let (a, env, store, dep) = fixture();
    let mut g = a.ctx.gamma.clone();
    g.remove(&TAtom::var("y", Point(9)));
    assert_eq!(failing(&g, &a.ctx.pi, &a, &env, &store, &dep), [Clause::LocalCoverage].into());
}

#[test]
fn local_binding_loses_dependencies() {
    let (a, env, store, dep) = fixture();
    let mut g = a.ctx.gamma.clone();
    g.insert(TAtom::var("y", Point(9)), Type::empty());
    assert_eq!(failing(&g, &a.ctx.pi, &a, &env, &store, &dep), [Clause::LocalAgreement].into());
}

#[test]
fn missing_internal_variable() {
    let (a, env, store, dep) = fixture();
    let mut g = a.ctx.gamma.clone();
    g.remove(&TAtom::internal(Point(2), Point(2)));
    assert_eq!(failing(&g, &a.ctx.pi, &a, &env, &store, &dep), [Clause::StoreCoverage].into());
}

#[test]
fn internal_variable_loses_dependencies() {
    let (a, env, store, dep) = fixture();
    let mut g = a.ctx.gamma.clone();
    g.insert(TAtom::internal(Point(2), Point(8)), Type::empty());
    assert_eq!(failing(&g, &a.ctx.pi, &a, &env, &store, &dep), [Clause::StoreAgreement].into());
}

#[test]
fn order_missing_from_pi() {
    let (a, env, store, dep) = fixture();
    let pi = a.ctx.pi.without_edge(Point(7), Point(8));
    assert!(!pi.less(Point(7), Point(8)));
    let r = env_agree(&env, &store, &dep, &a.ctx.gamma, &pi, &a.ctx.kappa0);
    assert_eq!(r.failed_clauses(), [Clause::OrderContainment].into());
    assert!(r.failures.iter().any(|f| f.2 == "(7,8)"));
}

#[test]
fn ambiguous_predecessor() {
    let (a, env, store, mut dep) = fixture();
    dep.order.remove(&(Point(2), Point(8)));
    assert_eq!(
        failing(&a.ctx.gamma, &a.ctx.pi, &a, &env, &store, &dep),
        [Clause::PredecessorCorrespondence].into()
    );
}
