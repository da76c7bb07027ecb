use std::collections::BTreeMap;

use thiserror::Error;

use super::linear::{linear_use_check, Violation};
use super::order::{ip_type, Pi};
use super::types::{type_union, AliasBase, Delta, Kappa, Name, TAtom, Type, TypeEnv, UndefinedUnion};
use crate::approx::{approximate_pi, build_alias_base, CallSites};
use crate::syntax::{Expr, Occurrence, Pattern, Point};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable {name} at point {point}")]
    UnboundVariable { name: String, point: Point },
    #[error("at point {point}: {source}")]
    UnionShape {
        point: Point,
        #[source]
        source: UndefinedUnion,
    },
    #[error("dereferencing a non-reference at point {point}")]
    NonReferenceDeref { point: Point },
    #[error("assigning through a non-reference at point {point}")]
    NonReferenceAssign { point: Point },
    #[error("reference at point {point} would hold an abstraction")]
    AbstractionInRef { point: Point },
    #[error("linearity violation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    LinearityViolation(Vec<Violation>),
    #[error("abstraction used as a value at point {point}")]
    UnsupportedAbstraction { point: Point },
    #[error("applying a non-function at point {point}")]
    NotAFunction { point: Point },
    #[error("tuple patterns are not supported (point {point})")]
    UnsupportedPattern { point: Point },
    #[error("let rec at point {point} must bind an abstraction")]
    LetRecNonAbstraction { point: Point },
}

type Result<T> = std::result::Result<T, TypeError>;

/// Deliberate weakenings of single rules, used to test that the agreement
/// oracle notices unsound typings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mutation {
    /// Omit `x^p` in T-VAR.
    DropVarAtom,
    /// Bind `x` with an empty κ in T-LET-1.
    DropLetKappa,
    /// Omit the scrutinee's type in T-CASE.
    DropCaseScrutinee,
    /// Omit δ' in T-REF-READ.
    DropDerefDelta,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [
        Mutation::DropVarAtom,
        Mutation::DropLetKappa,
        Mutation::DropCaseScrutinee,
        Mutation::DropDerefDelta,
    ];
}

/// The static inputs and output environment of typing.
#[derive(Debug, Clone)]
pub struct AnalysisContext {
    pub gamma: TypeEnv,
    pub pi: Pi,
    pub kappa0: AliasBase,
}

impl AnalysisContext {
    pub fn for_program(o: &Occurrence) -> Self {
        AnalysisContext {
            gamma: TypeEnv::new(),
            pi: approximate_pi(o),
            kappa0: build_alias_base(o),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub ctx: AnalysisContext,
    /// The type assigned to every typed occurrence.
    pub types: BTreeMap<Point, Type>,
    pub result: Type,
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub mutation: Option<Mutation>,
    /// Free variables bound at the start point with an empty base type.
    pub inputs: Vec<String>,
}

pub fn analyze(o: &Occurrence) -> Result<Analysis> {
    analyze_with(o, &Options::default())
}

pub fn analyze_with(o: &Occurrence, opts: &Options) -> Result<Analysis> {
    linear_use_check(o).map_err(TypeError::LinearityViolation)?;
    let mut ctx = AnalysisContext::for_program(o);
    for x in &opts.inputs {
        ctx.gamma
            .insert(TAtom::var(x.clone(), Point::START), Type::empty());
    }
    let (result, types) = typecheck_with(&mut ctx, o, opts.mutation)?;
    Ok(Analysis { ctx, types, result })
}

/// Types `o` under `ctx`, extending `ctx.gamma` with every binding made.
pub fn typecheck(ctx: &mut AnalysisContext, o: &Occurrence) -> Result<Type> {
    typecheck_with(ctx, o, None).map(|(t, _)| t)
}

pub fn typecheck_with(
    ctx: &mut AnalysisContext,
    o: &Occurrence,
    mutation: Option<Mutation>,
) -> Result<(Type, BTreeMap<Point, Type>)> {
    let mut c = Checker {
        gamma: &mut ctx.gamma,
        pi: &ctx.pi,
        sites: CallSites::new(o),
        types: BTreeMap::new(),
        mutation,
        lams: BTreeMap::new(),
        binder: BTreeMap::new(),
    };
    let t = if o.is_abs() {
        c.uncalled(o)?
    } else {
        c.ty(o)?
    };
    Ok((t, c.types))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LamState {
    Pending,
    Active,
    Done,
}

struct Checker<'a, 'c> {
    gamma: &'c mut TypeEnv,
    pi: &'c Pi,
    sites: CallSites<'a>,
    types: BTreeMap<Point, Type>,
    mutation: Option<Mutation>,
    lams: BTreeMap<Point, LamState>,
    /// Name and binding atom of let-bound abstractions.
    binder: BTreeMap<Point, TAtom>,
}

fn union_at(point: Point, a: &Type, b: &Type) -> Result<Type> {
    type_union(a, b).map_err(|source| TypeError::UnionShape { point, source })
}

fn one(atom: TAtom) -> Delta {
    Delta::from([atom])
}

impl<'a> Checker<'a, '_> {
    fn mutated(&self, m: Mutation) -> bool {
        self.mutation == Some(m)
    }

    fn ty(&mut self, n: &'a Occurrence) -> Result<Type> {
        let p = n.point;
        let t = match &n.expr {
            Expr::Const(_) => Type::empty(),
            Expr::Var(x) => self.var(x, p)?,
            Expr::Abs(..) => return Err(TypeError::UnsupportedAbstraction { point: p }),
            Expr::App(f, a) => self.app(n, f, a)?,
            Expr::Prim(_, a, b) => {
                let ta = self.base(a)?;
                let tb = self.base(b)?;
                let delta = ta.delta().unwrap().union(tb.delta().unwrap()).cloned().collect();
                Type::base(delta, Kappa::new())
            }
            Expr::Let(x, e1, e2) => self.let_(x, e1, e2, false)?,
            Expr::LetRec(x, e1, e2) => self.let_(x, e1, e2, true)?,
            Expr::Case(s, arms) => {
                let ts = self.base(s)?;
                let mut acc: Option<Type> = None;
                for arm in arms {
                    match &arm.pattern {
                        Pattern::Tuple(_) => return Err(TypeError::UnsupportedPattern { point: p }),
                        Pattern::Var(x) => {
                            self.gamma.insert(TAtom::var(x.clone(), s.point), ts.clone())
                        }
                        _ => {}
                    }
                    let ti = self.ty(&arm.body)?;
                    acc = Some(match acc {
                        Some(a) => union_at(p, &a, &ti)?,
                        None => ti,
                    });
                }
                let t = acc.unwrap_or_else(Type::empty);
                if self.mutated(Mutation::DropCaseScrutinee) {
                    t
                } else {
                    t.join_delta(ts.delta().unwrap())
                }
            }
            Expr::Ref(e) => {
                let te = self.ty(e)?;
                if te.is_arrow() {
                    return Err(TypeError::AbstractionInRef { point: p });
                }
                self.gamma.insert(TAtom::internal(p, p), te);
                Type::base(Delta::new(), Kappa::from([Name::Internal(p)]))
            }
            Expr::Deref(e) => self.deref(e, p)?,
            Expr::Assign(t, e) => self.assign(t, e, p)?,
        };
        self.types.insert(p, t.clone());
        Ok(t)
    }

    /// Types an occurrence that must not denote an abstraction.
    fn base(&mut self, n: &'a Occurrence) -> Result<Type> {
        let t = self.ty(n)?;
        if t.is_arrow() {
            return Err(TypeError::UnsupportedAbstraction { point: n.point });
        }
        Ok(t)
    }

    fn var(&mut self, x: &str, p: Point) -> Result<Type> {
        let name = Name::var(x);
        let bound: Vec<Point> = self.gamma.points_of(&name).collect();
        if bound.is_empty() {
            return Err(TypeError::UnboundVariable {
                name: x.to_string(),
                point: p,
            });
        }
        let mut chosen: Vec<Point> = ip_type(&name, self.gamma, self.pi, p)
            .into_iter()
            .map(|a| a.point)
            .collect();
        if chosen.is_empty() {
            // Not ordered below p; fall back to the greatest bindings overall.
            chosen = bound
                .iter()
                .copied()
                .filter(|&b| !bound.iter().any(|&c| self.pi.less(b, c)))
                .collect();
        }
        let mut t: Option<Type> = None;
        for b in chosen {
            let tb = self.gamma.get(&TAtom::var(x, b)).unwrap().clone();
            t = Some(match t {
                Some(acc) => union_at(p, &acc, &tb)?,
                None => tb,
            });
        }
        let t = t.unwrap();
        if t.is_arrow() {
            return Err(TypeError::UnsupportedAbstraction { point: p });
        }
        Ok(if self.mutated(Mutation::DropVarAtom) {
            t
        } else {
            t.join_delta(&one(TAtom::var(x, p)))
        })
    }

    fn let_(&mut self, x: &str, e1: &'a Occurrence, e2: &'a Occurrence, rec: bool) -> Result<Type> {
        let at = TAtom::var(x, e1.point);
        if e1.is_abs() {
            let placeholder = Type::arrow(Type::empty(), Type::empty());
            self.gamma.insert(at.clone(), placeholder.clone());
            self.types.insert(e1.point, placeholder);
            self.lams.insert(e1.point, LamState::Pending);
            self.binder.insert(e1.point, at);
            let t2 = self.ty(e2)?;
            if self.lams[&e1.point] == LamState::Pending {
                self.uncalled(e1)?;
            }
            return Ok(t2);
        }
        if rec {
            return Err(TypeError::LetRecNonAbstraction { point: e1.point });
        }
        let t1 = self.base(e1)?;
        let bound = match &t1 {
            Type::Base { delta, kappa }
                if !kappa.is_empty() && !self.mutated(Mutation::DropLetKappa) =>
            {
                let mut k = kappa.clone();
                k.insert(Name::var(x));
                Type::base(delta.clone(), k)
            }
            Type::Base { delta, .. } if self.mutated(Mutation::DropLetKappa) => {
                Type::base(delta.clone(), Kappa::new())
            }
            _ => t1,
        };
        self.gamma.insert(at, bound);
        self.ty(e2)
    }

    /// Types the body of an abstraction with no outside call, assuming an
    /// empty parameter type bound at the abstraction's own point.
    fn uncalled(&mut self, lam: &'a Occurrence) -> Result<Type> {
        let Expr::Abs(x, body) = &lam.expr else {
            unreachable!("only abstractions are typed as uncalled")
        };
        self.gamma.insert(TAtom::var(x.clone(), lam.point), Type::empty());
        self.lams.insert(lam.point, LamState::Active);
        let tb = self.ty(body)?;
        self.finish(lam, Type::empty(), tb.clone());
        Ok(Type::arrow(Type::empty(), tb))
    }

    fn finish(&mut self, lam: &Occurrence, param: Type, result: Type) {
        self.lams.insert(lam.point, LamState::Done);
        let arrow = Type::arrow(param, result);
        self.types.insert(lam.point, arrow.clone());
        if let Some(at) = self.binder.get(&lam.point) {
            self.gamma.insert(at.clone(), arrow);
        }
    }

    fn app(&mut self, n: &'a Occurrence, f: &'a Occurrence, a: &'a Occurrence) -> Result<Type> {
        let Some(lam) = self.sites.lambda_of(n.point) else {
            let tf = self.ty(f)?;
            return Err(if tf.is_arrow() {
                TypeError::UnsupportedAbstraction { point: f.point }
            } else {
                TypeError::NotAFunction { point: n.point }
            });
        };
        let ta = if a.is_abs() {
            return Err(TypeError::UnsupportedAbstraction { point: a.point });
        } else {
            self.base(a)?
        };
        let (param, tb) = self.call(lam, ta, a.point)?;
        match &f.expr {
            Expr::Var(g) => {
                let t = if self.mutated(Mutation::DropVarAtom) {
                    tb
                } else {
                    tb.join_delta(&one(TAtom::var(g.clone(), f.point)))
                };
                self.types.insert(f.point, Type::arrow(param, t.clone()));
                Ok(t)
            }
            _ => Ok(tb),
        }
    }

    /// Types the body of `lam` at the call whose argument sits at `arg`.
    fn call(&mut self, lam: &'a Occurrence, ta: Type, arg: Point) -> Result<(Type, Type)> {
        let Expr::Abs(x, body) = &lam.expr else {
            unreachable!("call sites resolve to abstractions")
        };
        match self.lams.get(&lam.point) {
            Some(LamState::Active) => return Ok((ta, Type::empty())),
            Some(LamState::Done) => {
                return Err(TypeError::LinearityViolation(vec![Violation::MultipleUse {
                    name: x.clone(),
                    binder: lam.point,
                    uses: self.sites.sites(lam.point).to_vec(),
                }]))
            }
            _ => {}
        }
        self.lams.insert(lam.point, LamState::Active);
        let param = match &ta {
            Type::Base { delta, kappa } if !kappa.is_empty() => {
                let mut k = kappa.clone();
                k.insert(Name::var(x.clone()));
                Type::base(delta.clone(), k)
            }
            _ => ta,
        };
        self.gamma.insert(TAtom::var(x.clone(), arg), param.clone());
        let tb = self.ty(body)?;
        self.finish(lam, param.clone(), tb.clone());
        Ok((param, tb))
    }

    fn internal_vars(t: &Type) -> Vec<Name> {
        t.kappa()
            .map(|k| k.iter().filter(|n| n.is_internal()).cloned().collect())
            .unwrap_or_default()
    }

    /// Union of Γ at the type-level predecessors of `vx` at `p`.
    fn read(&self, vx: &Name, p: Point) -> Result<Option<Type>> {
        let mut t: Option<Type> = None;
        for atom in ip_type(vx, self.gamma, self.pi, p) {
            let ta = self.gamma.get(&atom).unwrap();
            t = Some(match t {
                Some(acc) => union_at(p, &acc, ta)?,
                None => ta.clone(),
            });
        }
        Ok(t)
    }

    fn deref(&mut self, e: &'a Occurrence, p: Point) -> Result<Type> {
        let te = self.base(e)?;
        let vars = Self::internal_vars(&te);
        if vars.is_empty() {
            return Err(TypeError::NonReferenceDeref { point: p });
        }
        let mut read = Type::empty();
        let mut delta_prime = Delta::new();
        for vx in vars {
            if let Some(t) = self.read(&vx, p)? {
                read = union_at(p, &read, &t)?;
            }
            delta_prime.insert(TAtom::new(vx, p));
        }
        let mut delta = te.delta().unwrap().clone();
        if !self.mutated(Mutation::DropDerefDelta) {
            delta.extend(delta_prime);
        }
        Ok(read.join_delta(&delta))
    }

    fn assign(&mut self, t: &'a Occurrence, e: &'a Occurrence, p: Point) -> Result<Type> {
        let tt = self.base(t)?;
        let te = self.ty(e)?;
        if te.is_arrow() {
            return Err(TypeError::AbstractionInRef { point: p });
        }
        let vars = Self::internal_vars(&tt);
        if vars.is_empty() {
            return Err(TypeError::NonReferenceAssign { point: p });
        }
        let strong = vars.len() == 1;
        let mut updates = Vec::new();
        for vx in vars {
            let new = match self.read(&vx, p)? {
                Some(prior) if !strong => union_at(p, &prior, &te)?,
                _ => te.clone(),
            };
            updates.push((TAtom::new(vx, p), new));
        }
        for (at, ty) in updates {
            self.gamma.insert(at, ty);
        }
        Ok(Type::base(tt.delta().unwrap().clone(), Kappa::new()))
    }
}
