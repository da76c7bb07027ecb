use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use flowalias::agreement::{check_soundness, gen_program};
use flowalias::approx::{approximate_pi, build_alias_base};
use flowalias::semantics::{run, Atom, DepPair, DepState, Evaluator, Exit, Observer, Value};
use flowalias::syntax::{all_identifiers, alpha_normalize, parse, pretty, Constant, Expr, Occurrence, Point};
use flowalias::typesys::{
    analyze, ip_type, report_json, type_union, typecheck, Kappa, Name, Pi, TAtom, Type, TypeEnv,
};

fn program() -> impl Strategy<Value = Occurrence> {
    (any::<u64>(), 1usize..=30).prop_map(|(seed, size)| gen_program(seed, size))
}

fn atom() -> impl Strategy<Value = TAtom> {
    (prop_oneof![Just("a"), Just("b"), Just("c")], 0u32..6).prop_map(|(x, p)| TAtom::var(x, Point(p)))
}

fn base_type() -> impl Strategy<Value = Type> {
    (
        prop::collection::btree_set(atom(), 0..4),
        prop::collection::btree_set(0u32..4, 0..3),
    )
        .prop_map(|(d, k)| Type::base(d, k.into_iter().map(|p| Name::Internal(Point(p))).collect()))
}

fn same_shape_triple() -> impl Strategy<Value = (Type, Type, Type)> {
    let arrows = (base_type(), base_type(), base_type(), base_type(), base_type(), base_type())
        .prop_map(|(a, b, c, d, e, f)| (Type::arrow(a, b), Type::arrow(c, d), Type::arrow(e, f)));
    prop_oneof![(base_type(), base_type(), base_type()), arrows]
}

/// Replaces the constant at `at`.
fn with_constant(o: &Occurrence, at: Point, c: Constant) -> Occurrence {
    let mut o = o.clone();
    fn go(o: &mut Occurrence, at: Point, c: &Constant) {
        if o.point == at {
            o.expr = Expr::Const(c.clone());
            return;
        }
        for child in o.children_mut() {
            go(child, at, c);
        }
    }
    go(&mut o, at, &c);
    o
}

fn closure_vars(dep: &DepState, d: &DepPair) -> BTreeSet<String> {
    let mut vars = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut todo = vec![d.clone()];
    while let Some(d) = todo.pop() {
        vars.extend(d.vars.iter().map(|v| v.name.clone()));
        for l in &d.locs {
            if seen.insert(*l) {
                if let Some(next) = dep.w.get(&Atom::loc(l.loc, l.point)) {
                    todo.push(next.clone());
                }
            }
        }
    }
    vars
}

/// Records, for every finished sub-evaluation, which variables share a
/// location.
#[derive(Default)]
struct Sharing {
    groups: Vec<BTreeSet<String>>,
}

impl Observer for Sharing {
    fn exit(&mut self, s: &Exit<'_>) {
        let mut by_loc: BTreeMap<_, BTreeSet<String>> = BTreeMap::new();
        for (x, v) in s.env.iter() {
            if let Value::Loc(l) = v {
                by_loc.entry(*l).or_default().insert(x.clone());
            }
        }
        self.groups.extend(by_loc.into_values().filter(|g| g.len() > 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn points_are_unique(o in program()) {
        let pts = o.points();
        let set: BTreeSet<_> = pts.iter().collect();
        prop_assert_eq!(set.len(), pts.len());
    }

    #[test]
    fn printing_round_trips(o in program()) {
        prop_assert_eq!(parse(&pretty(&o)).unwrap(), o);
    }

    #[test]
    fn normalizing_distinct_binders_is_identity(o in program()) {
        prop_assert_eq!(alpha_normalize(&o), o);
    }

    #[test]
    fn evaluation_is_deterministic(o in program()) {
        let a = run(&o).unwrap();
        let b = run(&o).unwrap();
        prop_assert_eq!(a.value, b.value);
        prop_assert_eq!(a.dep, b.dep);
        prop_assert_eq!(a.footprint, b.footprint);
    }

    #[test]
    fn realized_order_is_acyclic_and_inside_pi(o in program()) {
        let out = run(&o).unwrap();
        prop_assert!(out.dep.order_index().is_partial_order());
        let pi = approximate_pi(&o);
        prop_assert!(pi.is_partial_order());
        for &(a, b) in &out.dep.order {
            prop_assert!(pi.less(a, b), "({}, {}) missing from Π", a, b);
        }
    }

    #[test]
    fn alias_base_partitions_the_names(o in program()) {
        let k0 = build_alias_base(&o);
        let mut seen = BTreeSet::new();
        for block in k0.blocks() {
            for n in block {
                prop_assert!(seen.insert(n.clone()), "{} in two blocks", n);
            }
        }
        let mut expected: BTreeSet<Name> = all_identifiers(&o).into_iter().map(Name::Var).collect();
        for t in o.subterms() {
            if matches!(t.expr, Expr::Ref(_)) {
                expected.insert(Name::Internal(t.point));
            }
        }
        prop_assert_eq!(seen, expected);
    }

    #[test]
    fn runtime_aliases_share_a_block(o in program()) {
        let k0 = build_alias_base(&o);
        let mut obs = Sharing::default();
        flowalias::semantics::run_with(&o, Evaluator::new().observer(&mut obs)).unwrap();
        for g in obs.groups {
            let first = Name::Var(g.iter().next().unwrap().clone());
            let block = k0.block_of(&first).unwrap();
            for x in &g {
                prop_assert!(block.contains(&Name::Var(x.clone())), "{:?}", g);
            }
        }
    }

    #[test]
    fn typing_is_deterministic(o in program()) {
        let a = report_json(&analyze(&o).unwrap());
        let b = report_json(&analyze(&o).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn case_type_covers_clauses_and_scrutinee(o in program()) {
        let a = analyze(&o).unwrap();
        for t in o.subterms() {
            let Expr::Case(s, arms) = &t.expr else { continue };
            let Some(whole) = a.types.get(&t.point) else { continue };
            for arm in arms {
                if let Some(ta) = a.types.get(&arm.body.point) {
                    prop_assert!(ta.subsumed_by(whole), "{} ⊄ {}", ta, whole);
                }
            }
            if let (Some(ds), Some(dw)) = (a.types.get(&s.point).and_then(Type::delta), whole.delta()) {
                prop_assert!(ds.is_subset(dw));
            }
        }
    }

    #[test]
    fn generated_programs_are_sound(o in program()) {
        let r = check_soundness(&o);
        prop_assert!(r.holds(), "{}\n{}", pretty(&o), r);
    }

    #[test]
    fn unused_constants_do_not_change_the_result(o in program()) {
        let out = run(&o).unwrap();
        let used = closure_vars(&out.dep, &out.footprint);
        for t in o.subterms() {
            let Expr::Let(x, e1, _) = &t.expr else { continue };
            let Expr::Const(Constant::Nat(n)) = e1.expr else { continue };
            if used.contains(x) {
                continue;
            }
            let changed = with_constant(&o, e1.point, Constant::Nat(n + 1));
            let again = run(&changed).unwrap();
            prop_assert_eq!(&again.value, &out.value, "changing {} at {}", x, e1.point);
        }
    }

    #[test]
    fn union_is_commutative_associative_idempotent((a, b, c) in same_shape_triple()) {
        let ab = type_union(&a, &b).unwrap();
        prop_assert_eq!(&ab, &type_union(&b, &a).unwrap());
        prop_assert_eq!(&type_union(&a, &a).unwrap(), &a);
        let left = type_union(&ab, &c).unwrap();
        let right = type_union(&a, &type_union(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn union_rejects_mixed_shapes(a in base_type(), b in base_type(), c in base_type()) {
        prop_assert!(type_union(&a, &Type::arrow(b, c)).is_err());
    }

    #[test]
    fn fresh_bindings_never_shrink_predecessors(
        o in program(),
        pick in any::<prop::sample::Index>(),
        at in any::<prop::sample::Index>(),
    ) {
        let a = analyze(&o).unwrap();
        let (gamma, pi) = (&a.ctx.gamma, &a.ctx.pi);
        let names: Vec<Name> = gamma.iter().map(|(t, _)| t.name.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        prop_assume!(!names.is_empty());
        let u = pick.get(&names).clone();
        let points: Vec<Point> = o.points();
        let p = *at.get(&points);
        let bound: Vec<Point> = gamma.points_of(&u).collect();
        let before = ip_type(&u, gamma, pi, p);
        for &q in &points {
            let fresh = pi.less(q, p)
                && bound.iter().all(|&b| b != q && !pi.less_eq(b, q) && !pi.less_eq(q, b));
            if !fresh {
                continue;
            }
            let mut g2 = gamma.clone();
            g2.insert(TAtom::new(u.clone(), q), Type::empty());
            let after = ip_type(&u, &g2, pi, p);
            prop_assert!(before.is_subset(&after), "{:?} then {:?}", before, after);
        }
    }
}

#[test]
fn ip_type_matches_chain_suprema() {
    // Two incomparable bindings under a common top.
    let pi = Pi::new(
        [Point(1), Point(2), Point(3), Point(4)],
        [(Point(1), Point(2)), (Point(1), Point(3)), (Point(2), Point(4)), (Point(3), Point(4))],
    );
    let mut g = TypeEnv::new();
    g.insert(TAtom::var("x", Point(2)), Type::empty());
    g.insert(TAtom::var("x", Point(3)), Type::empty());
    let ips = ip_type(&Name::var("x"), &g, &pi, Point(4));
    let chains = flowalias::typesys::p_chains(&pi, Point(4)).unwrap();
    assert_eq!(chains.len(), 2);
    let mut expected = BTreeSet::new();
    for c in chains {
        let top = c.iter().rev().copied().find(|&q| g.contains(&TAtom::var("x", q)));
        expected.extend(top.map(|q| TAtom::var("x", q)));
    }
    assert_eq!(ips, expected);
}

#[test]
fn unused_bindings_do_not_affect_typing() {
    let o = parse(flowalias::EXAMPLE_ONE).unwrap();
    let a = analyze(&o).unwrap();
    let sub = o.find(Point(10)).unwrap();
    assert!(!flowalias::syntax::free_vars(sub).contains("z"));
    let mut full = a.ctx.clone();
    let mut without = a.ctx.clone();
    without.gamma.remove(&TAtom::var("z", Point(4)));
    assert_eq!(typecheck(&mut full, sub).unwrap(), typecheck(&mut without, sub).unwrap());
}

#[test]
fn empty_kappa_only_for_constants() {
    let a = analyze(&parse("(let r (ref 1) (! r))").unwrap()).unwrap();
    assert_eq!(a.result.kappa(), Some(&Kappa::new()));
    let b = analyze(&parse("(ref 1)").unwrap()).unwrap();
    assert!(!b.result.kappa().unwrap().is_empty());
}
