//! Non-interference on top of the analysis: a low variable must not depend
//! on an occurrence of a high one.
//!
//! ```
//! use flowalias::security::{check_noninterference, SecurityLabeling};
//! use flowalias::syntax::parse;
//!
//! let o = parse("(let l (h@1)@2 (l@3)@4)").unwrap();
//! let v = check_noninterference(&o, &SecurityLabeling::high(["h"])).unwrap();
//! assert!(!v.passes());
//! assert_eq!(v.witnesses.iter().next().unwrap().to_string(), "h@2 -> l@2");
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde_json::{json, Value as Json};

use crate::semantics::{Atom, DepPair, DepState, Env, EvalError, Evaluator, Store, Value};
use crate::syntax::{free_vars, Expr, Occurrence, Point};
use crate::typesys::{
    analyze_with, ip_type, p_chains, Analysis, Name, Options, Pi, TAtom, TypeEnv, TypeError,
};

mod labels;

pub use labels::{Label, LabelError, SecurityLabeling};

/// A high occurrence that a low binding may depend on.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Witness {
    pub high: TAtom,
    pub low: TAtom,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.high, self.low)
    }
}

#[derive(Debug, Clone)]
pub struct NonInterference {
    /// Violations found by following δ.
    pub witnesses: BTreeSet<Witness>,
    /// Violations found by walking the chains of Π that end at each low
    /// binding.
    pub chain_witnesses: BTreeSet<Witness>,
    /// The same walk with the order reversed: high occurrences above the
    /// low binding.
    pub reversed_chain_witnesses: BTreeSet<Witness>,
}

impl NonInterference {
    pub fn passes(&self) -> bool {
        self.witnesses.is_empty()
    }

    /// Whether the δ and chain formulations give the same witnesses.
    pub fn formulations_agree(&self) -> bool {
        self.witnesses == self.chain_witnesses
    }

    pub fn to_json(&self) -> Json {
        let list = |s: &BTreeSet<Witness>| -> Vec<Json> {
            s.iter()
                .map(|w| json!({ "high": w.high.to_string(), "low": w.low.to_string() }))
                .collect()
        };
        json!({
            "verdict": if self.passes() { "pass" } else { "violation" },
            "witnesses": list(&self.witnesses),
            "formulations_agree": self.formulations_agree(),
            "chain_witnesses": list(&self.chain_witnesses),
            "reversed_chain_witnesses": list(&self.reversed_chain_witnesses),
        })
    }
}

impl fmt::Display for NonInterference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passes() {
            writeln!(f, "pass")?;
        } else {
            writeln!(f, "violation")?;
            for w in &self.witnesses {
                writeln!(f, "  {w}")?;
            }
        }
        if !self.formulations_agree() {
            writeln!(f, "chain formulation disagrees:")?;
            for w in self.chain_witnesses.symmetric_difference(&self.witnesses) {
                writeln!(f, "  {w}")?;
            }
        }
        Ok(())
    }
}

/// Analyzes `o`, treating its free variables as inputs, and reports every
/// low binding whose dependencies reach a high occurrence.
pub fn check_noninterference(
    o: &Occurrence,
    labels: &SecurityLabeling,
) -> Result<NonInterference, TypeError> {
    let a = analyze_with(
        o,
        &Options {
            inputs: free_vars(o).into_iter().collect(),
            ..Options::default()
        },
    )?;
    Ok(check_analysis(o, &a, labels))
}

pub fn check_analysis(o: &Occurrence, a: &Analysis, labels: &SecurityLabeling) -> NonInterference {
    let gamma = &a.ctx.gamma;
    let pi = &a.ctx.pi;
    let high_occurrences: BTreeSet<TAtom> = o
        .subterms()
        .into_iter()
        .filter_map(|t| match &t.expr {
            Expr::Var(x) if labels.is_high(x) => Some(TAtom::var(x.clone(), t.point)),
            _ => None,
        })
        .collect();

    let mut witnesses = BTreeSet::new();
    let mut chain_witnesses = BTreeSet::new();
    let mut reversed = BTreeSet::new();
    for (low, t) in gamma.iter() {
        let Name::Var(x) = &low.name else { continue };
        if labels.is_high(x) || low.point.is_start() {
            continue;
        }
        let Some(delta) = t.delta() else { continue };
        let reach = closure(gamma, pi, delta);
        for h in reach.iter().filter(|h| matches!(&h.name, Name::Var(n) if labels.is_high(n))) {
            witnesses.insert(Witness {
                high: h.clone(),
                low: low.clone(),
            });
        }
        let on_chains: BTreeSet<Point> = p_chains(pi, low.point)
            .unwrap_or_default()
            .into_iter()
            .flatten()
            .collect();
        for h in &high_occurrences {
            let linked = reach.contains(h);
            if linked && on_chains.contains(&h.point) {
                chain_witnesses.insert(Witness {
                    high: h.clone(),
                    low: low.clone(),
                });
            }
            if linked && pi.less(low.point, h.point) {
                reversed.insert(Witness {
                    high: h.clone(),
                    low: low.clone(),
                });
            }
        }
    }
    NonInterference {
        witnesses,
        chain_witnesses,
        reversed_chain_witnesses: reversed,
    }
}

/// δ together with everything reachable through internal variables'
/// entries in Γ.
fn closure(gamma: &TypeEnv, pi: &Pi, delta: &BTreeSet<TAtom>) -> BTreeSet<TAtom> {
    let mut out: BTreeSet<TAtom> = BTreeSet::new();
    let mut todo: Vec<TAtom> = delta.iter().cloned().collect();
    while let Some(a) = todo.pop() {
        if !out.insert(a.clone()) || !a.name.is_internal() {
            continue;
        }
        for b in ip_type(&a.name, gamma, pi, a.point) {
            if let Some(d) = gamma.get(&b).and_then(|t| t.delta()) {
                todo.extend(d.iter().cloned());
            }
            todo.push(b);
        }
    }
    out
}

/// The flows a single run exhibits: pairs of a high variable occurrence and
/// a low binding whose dependency pair reaches it, through locations'
/// bindings. Free variables start out bound to `1`.
pub fn semantic_flows(
    o: &Occurrence,
    labels: &SecurityLabeling,
    ev: Evaluator<'_>,
) -> Result<BTreeSet<Witness>, EvalError> {
    let mut ev = ev;
    let env: Env = free_vars(o).into_iter().map(|x| (x, Value::nat(1))).collect();
    let mut store = Store::new();
    let mut dep = DepState::new();
    ev.eval(&env, o, &mut store, &mut dep, Point::START)?;
    let mut out = BTreeSet::new();
    for (atom, pair) in &dep.w {
        let Atom::Var(x) = atom else { continue };
        if labels.is_high(&x.name) {
            continue;
        }
        for v in semantic_closure(&dep, pair) {
            if labels.is_high(&v.0) {
                out.insert(Witness {
                    high: TAtom::var(v.0, v.1),
                    low: TAtom::var(x.name.clone(), x.point),
                });
            }
        }
    }
    Ok(out)
}

fn semantic_closure(dep: &DepState, d: &DepPair) -> BTreeSet<(String, Point)> {
    let mut vars: BTreeSet<(String, Point)> = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut todo = vec![d.clone()];
    while let Some(d) = todo.pop() {
        vars.extend(d.vars.iter().map(|v| (v.name.clone(), v.point)));
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
