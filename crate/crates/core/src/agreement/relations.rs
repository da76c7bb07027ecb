use std::collections::BTreeSet;

use super::{Clause, Relation};
use crate::semantics::{ip_sem, Atom, DepPair, DepState, Element, Env, Loc, Store, Value};
use crate::syntax::Point;
use crate::typesys::{ip_type, AliasBase, Delta, Kappa, Name, Pi, TAtom, Type, TypeEnv};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub relation: Relation,
    pub witness: String,
}

fn mismatch(relation: Relation, witness: impl Into<String>) -> Mismatch {
    Mismatch {
        relation,
        witness: witness.into(),
    }
}

fn inverse_names(env: &Env, l: Loc) -> Vec<Name> {
    env.inverse(&Value::Loc(l)).into_iter().map(Name::Var).collect()
}

fn names_in(delta: &Delta) -> BTreeSet<&Name> {
    delta.iter().map(|a| &a.name).collect()
}

/// `(env, (L, V)) ⊨ δ`.
pub fn dep_agree(env: &Env, d: &DepPair, delta: &Delta, k0: &AliasBase) -> Result<(), Mismatch> {
    for v in &d.vars {
        if !delta.contains(&TAtom::var(v.name.clone(), v.point)) {
            return Err(mismatch(Relation::Dependency, v.to_string()));
        }
    }
    let present = names_in(delta);
    for l in &d.locs {
        let inv = inverse_names(env, l.loc);
        let ok = if inv.is_empty() {
            present.iter().any(|n| n.is_internal())
        } else {
            k0.block_of(&inv[0]).is_some_and(|b| {
                inv.iter().all(|x| b.contains(x)) && b.iter().any(|u| present.contains(u))
            })
        };
        if !ok {
            return Err(mismatch(Relation::Dependency, l.to_string()));
        }
    }
    Ok(())
}

/// Binding points of `l` in `w`.
fn loc_points(dep: &DepState, l: Loc) -> Vec<Point> {
    dep.bindings_of(&Element::Loc(l)).map(Atom::point).collect()
}

fn internal_names(gamma: &TypeEnv) -> BTreeSet<Name> {
    gamma
        .iter()
        .map(|(a, _)| a.name.clone())
        .filter(Name::is_internal)
        .collect()
}

/// `(env, (w, ⊏_w), ℓ) ⊨ (Γ, κ)`.
pub fn alias_agree(
    env: &Env,
    dep: &DepState,
    l: Loc,
    gamma: &TypeEnv,
    kappa: &Kappa,
    k0: &AliasBase,
) -> Result<(), Mismatch> {
    let points = loc_points(dep, l);
    let candidates: Vec<&Name> = kappa
        .iter()
        .filter(|n| n.is_internal())
        .filter(|vx| points.iter().any(|&p| gamma.contains(&TAtom::new((*vx).clone(), p))))
        .collect();
    if candidates.is_empty() {
        return Err(mismatch(
            Relation::Alias,
            format!("no internal variable of κ corresponds to {l}"),
        ));
    }
    let inv = inverse_names(env, l);
    let ok = if inv.is_empty() {
        candidates.iter().any(|vx| k0.block_of(vx).is_some())
    } else {
        k0.block_of(&inv[0]).is_some_and(|b| {
            inv.iter().all(|x| b.contains(x)) && candidates.iter().any(|vx| b.contains(vx))
        })
    };
    if ok {
        Ok(())
    } else {
        Err(mismatch(
            Relation::Alias,
            format!("aliases of {l} share no block with κ"),
        ))
    }
}

/// `(env, v, (w, ⊏_w), (L, V)) ⊨ (Γ, T)`.
pub fn type_agree(
    env: &Env,
    v: &Value,
    dep: &DepState,
    d: &DepPair,
    gamma: &TypeEnv,
    t: &Type,
    k0: &AliasBase,
) -> Result<(), Mismatch> {
    match (v, t) {
        (Value::Loc(l), Type::Base { delta, kappa }) => {
            dep_agree(env, d, delta, k0)?;
            alias_agree(env, dep, *l, gamma, kappa, k0)
        }
        (Value::Loc(l), Type::Arrow(..)) => {
            Err(mismatch(Relation::Shape, format!("location {l} typed as {t}")))
        }
        (_, Type::Arrow(_, result)) => type_agree(env, v, dep, d, gamma, result, k0),
        (_, Type::Base { delta, .. }) => dep_agree(env, d, delta, k0),
    }
}

/// Outcome of checking one state against (Γ, Π).
#[derive(Debug, Clone, Default)]
pub struct EnvAgreement {
    pub failures: Vec<(Clause, Option<Relation>, String)>,
    /// Clauses that had at least one instance to check.
    pub active: BTreeSet<Clause>,
}

impl EnvAgreement {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failed_clauses(&self) -> BTreeSet<Clause> {
        self.failures.iter().map(|f| f.0).collect()
    }

    fn fail(&mut self, c: Clause, r: Option<Relation>, witness: impl Into<String>) {
        self.failures.push((c, r, witness.into()));
    }
}

/// `(env, sto, (w, ⊏_w)) ⊨ (Γ, Π)`, one entry per violated clause instance.
pub fn env_agree(
    env: &Env,
    sto: &Store,
    dep: &DepState,
    gamma: &TypeEnv,
    pi: &Pi,
    k0: &AliasBase,
) -> EnvAgreement {
    let mut out = EnvAgreement::default();
    let var_points = |x: &str| -> Vec<Point> {
        dep.bindings_of(&Element::Var(x.to_string()))
            .map(Atom::point)
            .collect()
    };

    for (x, v) in env.iter() {
        out.active.insert(Clause::LocalCoverage);
        let points = var_points(x);
        if points.is_empty() {
            out.fail(Clause::LocalCoverage, None, format!("{x} has no binding in w"));
        }
        for p in points {
            let at = TAtom::var(x.clone(), p);
            let Some(t) = gamma.get(&at) else {
                out.fail(Clause::LocalCoverage, None, format!("{at} missing from Γ"));
                continue;
            };
            out.active.insert(Clause::LocalAgreement);
            let d = &dep.w[&Atom::var(x.clone(), p)];
            if let Err(m) = type_agree(env, v, dep, d, gamma, t, k0) {
                out.fail(
                    Clause::LocalAgreement,
                    Some(m.relation),
                    format!("{at}: {}", m.witness),
                );
            }
        }
    }

    let ivars = internal_names(gamma);
    for l in sto.locations() {
        out.active.insert(Clause::StoreCoverage);
        let points = loc_points(dep, l);
        if points.is_empty() {
            out.fail(Clause::StoreCoverage, None, format!("{l} has no binding in w"));
            continue;
        }
        let covered = ivars
            .iter()
            .any(|vx| points.iter().all(|&p| gamma.contains(&TAtom::new(vx.clone(), p))));
        if !covered {
            out.fail(
                Clause::StoreCoverage,
                None,
                format!("no internal variable covers every binding of {l}"),
            );
        }
    }

    let locs: BTreeSet<Loc> = dep
        .w
        .keys()
        .filter_map(|a| match a {
            Atom::Loc(l) => Some(l.loc),
            Atom::Var(_) => None,
        })
        .collect();
    for l in locs {
        let ip = ip_sem(&Element::Loc(l), dep);
        for p in loc_points(dep, l) {
            let corresponding: Vec<&Name> = ivars
                .iter()
                .filter(|vx| gamma.contains(&TAtom::new((*vx).clone(), p)))
                .collect();
            if corresponding.is_empty() {
                continue;
            }
            out.active.insert(Clause::StoreAgreement);
            let d = &dep.w[&Atom::loc(l, p)];
            let content = match &ip {
                Ok(Some(top)) if top.point() == p => sto.get(l),
                _ => None,
            };
            let mut last = None;
            let agrees = corresponding.iter().any(|vx| {
                let t = gamma.get(&TAtom::new((*vx).clone(), p)).unwrap();
                let r = match (content, t.delta()) {
                    (Some(v), _) => type_agree(env, v, dep, d, gamma, t, k0),
                    (None, Some(delta)) => dep_agree(env, d, delta, k0),
                    (None, None) => Err(mismatch(Relation::Shape, format!("{vx}@{p} is an arrow"))),
                };
                let ok = r.is_ok();
                if let Err(m) = r {
                    last = Some(m);
                }
                ok
            });
            if !agrees {
                let m = last.unwrap();
                out.fail(
                    Clause::StoreAgreement,
                    Some(m.relation),
                    format!("{l}@{p}: {}", m.witness),
                );
            }

            out.active.insert(Clause::PredecessorCorrespondence);
            match &ip {
                Err(e) => out.fail(Clause::PredecessorCorrespondence, None, e.to_string()),
                Ok(None) => {}
                Ok(Some(top)) => {
                    let q = top.point();
                    let found = corresponding.iter().any(|vx| {
                        let target = TAtom::new((*vx).clone(), q);
                        std::iter::once(q)
                            .chain(pi.points().iter().copied())
                            .any(|p2| ip_type(vx, gamma, pi, p2).contains(&target))
                    });
                    if !found {
                        out.fail(
                            Clause::PredecessorCorrespondence,
                            None,
                            format!("no type-level predecessor matches {l}@{q}"),
                        );
                    }
                }
            }
        }
    }

    for &(a, b) in &dep.order {
        out.active.insert(Clause::OrderContainment);
        if !pi.less(a, b) {
            out.fail(Clause::OrderContainment, None, format!("({a},{b})"));
        }
    }
    dedup(&mut out.failures);
    out
}

fn dedup(v: &mut Vec<(Clause, Option<Relation>, String)>) {
    let mut seen = BTreeSet::new();
    v.retain(|f| seen.insert(f.clone()));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{LocOcc, VarOcc};

    fn k0() -> AliasBase {
        AliasBase::new(vec![
            [Name::var("x"), Name::Internal(Point(2))].into(),
            [Name::var("z")].into(),
        ])
        .unwrap()
    }

    #[test]
    fn dependency_examples() {
        let d = DepPair::empty().with_var(VarOcc::new("x", Point(5)));
        let delta: Delta = [TAtom::var("x", Point(5)), TAtom::var("z", Point(7))].into();
        assert!(dep_agree(&Env::new(), &d, &delta, &k0()).is_ok());
        assert!(dep_agree(&Env::new(), &d, &Delta::new(), &k0()).is_err());
    }

    #[test]
    fn location_needs_its_block() {
        let env = Env::new().extend("x", Value::Loc(Loc(0)));
        let d = DepPair::empty().with_loc(LocOcc { loc: Loc(0), point: Point(8) });
        let with_block: Delta = [TAtom::internal(Point(2), Point(10))].into();
        let without: Delta = [TAtom::var("z", Point(7))].into();
        assert!(dep_agree(&env, &d, &with_block, &k0()).is_ok());
        assert!(dep_agree(&env, &d, &without, &k0()).is_err());
    }

    #[test]
    fn alias_examples() {
        let mut dep = DepState::new();
        dep.bind(Atom::loc(Loc(0), Point(2)), DepPair::empty());
        let mut gamma = TypeEnv::new();
        gamma.insert(TAtom::internal(Point(2), Point(2)), Type::empty());
        let env = Env::new().extend("x", Value::Loc(Loc(0)));
        let kappa: Kappa = [Name::Internal(Point(2))].into();
        assert!(alias_agree(&env, &dep, Loc(0), &gamma, &kappa, &k0()).is_ok());
        assert!(alias_agree(&env, &dep, Loc(0), &gamma, &Kappa::new(), &k0()).is_err());
        assert!(alias_agree(&Env::new(), &dep, Loc(0), &gamma, &kappa, &k0()).is_ok());
    }

    #[test]
    fn type_agreement_shapes() {
        let dep = DepState::new();
        let g = TypeEnv::new();
        let d = DepPair::empty().with_var(VarOcc::new("x", Point(5)));
        let t = Type::base([TAtom::var("x", Point(5))].into(), Kappa::new());
        assert!(type_agree(&Env::new(), &Value::nat(5), &dep, &d, &g, &t, &k0()).is_ok());
        let arrow = Type::arrow(Type::empty(), Type::empty());
        let err = type_agree(&Env::new(), &Value::Loc(Loc(0)), &dep, &d, &g, &arrow, &k0());
        assert_eq!(err.unwrap_err().relation, Relation::Shape);
    }

    #[test]
    fn empty_state_agrees() {
        let r = env_agree(
            &Env::new(),
            &Store::new(),
            &DepState::new(),
            &TypeEnv::new(),
            &Pi::new([], []),
            &AliasBase::default(),
        );
        assert!(r.holds());
        assert!(r.active.is_empty());
    }
}
