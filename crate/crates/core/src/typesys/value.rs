use super::order::Pi;
use super::types::{Name, Type, TypeEnv};
use crate::semantics::{Env, Value};

/// Decides `Γ, Π ⊢ v : T`. On failure the error names the broken premise.
///
/// Constants admit any base type with empty κ and locations any base type
/// with non-empty κ. A closure admits an arrow when the variables it
/// captures are typed in Γ; the body's typing is established by the checker
/// when it types the call site.
pub fn type_value(gamma: &TypeEnv, pi: &Pi, v: &Value, t: &Type) -> Result<(), String> {
    match (v, t) {
        (Value::Const(_), Type::Base { kappa, .. }) if kappa.is_empty() => Ok(()),
        (Value::Const(c), _) => Err(format!("constant {c} needs a base type with empty κ, got {t}")),
        (Value::Loc(_), Type::Base { kappa, .. }) if !kappa.is_empty() => Ok(()),
        (Value::Loc(l), _) => Err(format!("location {l} needs a base type with non-empty κ, got {t}")),
        (Value::Closure(c), Type::Arrow(..)) => {
            let captured = c
                .env
                .iter()
                .filter(|(x, _)| Some(*x) != c.rec_name.as_ref())
                .filter(|(x, _)| crate::syntax::free_vars(&c.body).contains(*x))
                .map(|(x, v)| (x.clone(), v.clone()));
            well_typed(gamma, pi, captured)
        }
        (Value::Closure(_), _) => Err(format!("closure needs an arrow type, got {t}")),
    }
}

/// `Γ, Π ⊢ env`: each variable has some binding in Γ whose type admits its
/// value.
pub fn well_typed_env(gamma: &TypeEnv, pi: &Pi, env: &Env) -> Result<(), String> {
    well_typed(gamma, pi, env.iter().map(|(x, v)| (x.clone(), v.clone())))
}

fn well_typed(
    gamma: &TypeEnv,
    pi: &Pi,
    bindings: impl Iterator<Item = (String, Value)>,
) -> Result<(), String> {
    for (x, v) in bindings {
        let name = Name::var(x.clone());
        let mut last = format!("{x} has no binding in Γ");
        let ok = gamma.points_of(&name).any(|p| {
            let t = gamma.get(&super::TAtom::new(name.clone(), p)).unwrap();
            match type_value(gamma, pi, &v, t) {
                Ok(()) => true,
                Err(e) => {
                    last = format!("{x}@{p}: {e}");
                    false
                }
            }
        });
        if !ok {
            return Err(last);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::Loc;
    use crate::syntax::Point;
    use crate::typesys::{Kappa, TAtom};

    fn pi() -> Pi {
        Pi::new([], [])
    }

    #[test]
    fn constants_and_locations() {
        let g = TypeEnv::new();
        let with_x = Type::base([TAtom::var("x", Point(1))].into(), Kappa::new());
        let with_v = Type::base(Default::default(), [Name::Internal(Point(2))].into());
        assert!(type_value(&g, &pi(), &Value::nat(5), &with_x).is_ok());
        assert!(type_value(&g, &pi(), &Value::nat(5), &with_v).is_err());
        assert!(type_value(&g, &pi(), &Value::Loc(Loc(0)), &Type::empty()).is_err());
        assert!(type_value(&g, &pi(), &Value::Loc(Loc(0)), &with_v).is_ok());
    }

    #[test]
    fn environments() {
        let mut g = TypeEnv::new();
        assert!(well_typed_env(&g, &pi(), &Env::new()).is_ok());
        g.insert(
            TAtom::var("x", Point(2)),
            Type::base([TAtom::var("y", Point(1))].into(), Kappa::new()),
        );
        let five = Env::new().extend("x", Value::nat(5));
        assert!(well_typed_env(&g, &pi(), &five).is_ok());
        let loc = Env::new().extend("x", Value::Loc(Loc(0)));
        let mut g2 = TypeEnv::new();
        g2.insert(TAtom::var("x", Point(2)), Type::empty());
        assert!(well_typed_env(&g2, &pi(), &loc).is_err());
    }
}
