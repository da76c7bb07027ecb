//! Binding model and the dependency-collecting big-step evaluator.

mod dep;
mod eval;
mod trace;

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use crate::syntax::{Constant, Occurrence};

pub use dep::{
    induced_dependency_edges, ip_sem, points, AmbiguousPredecessor, Atom, DepPair, DepState,
    Element, LocOcc, VarOcc,
};
pub use eval::{
    eval, match_pattern, run, run_with, EvalError, Evaluator, Exit, Observer, Outcome, Rule,
    DEFAULT_MAX_DEPTH, DEFAULT_STEP_BUDGET,
};
pub use trace::TraceObserver;

/// A store location. Allocation hands out consecutive ids starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc(pub u32);

impl Loc {
    pub fn next(self) -> Loc {
        Loc(self.0 + 1)
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Closure {
    pub param: String,
    /// Set for closures built by `let rec`; the name is rebound to the
    /// closure itself on every application.
    pub rec_name: Option<String>,
    pub body: Occurrence,
    pub env: Env,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Const(Constant),
    Loc(Loc),
    Closure(Rc<Closure>),
}

impl Value {
    pub fn nat(n: u64) -> Value {
        Value::Const(Constant::Nat(n))
    }

    pub fn unit() -> Value {
        Value::Const(Constant::Unit)
    }

    pub fn as_loc(&self) -> Option<Loc> {
        match self {
            Value::Loc(l) => Some(*l),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Const(c) => write!(f, "{c}"),
            Value::Loc(l) => write!(f, "{l}"),
            Value::Closure(c) => match &c.rec_name {
                Some(name) => write!(f, "<rec {name} λ{}>", c.param),
                None => write!(f, "<λ{}>", c.param),
            },
        }
    }
}

/// A finite map from variables to values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env(BTreeMap<String, Value>);

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn get(&self, x: &str) -> Option<&Value> {
        self.0.get(x)
    }

    pub fn extend(&self, x: impl Into<String>, v: Value) -> Env {
        let mut e = self.clone();
        e.0.insert(x.into(), v);
        e
    }

    pub fn insert(&mut self, x: impl Into<String>, v: Value) {
        self.0.insert(x.into(), v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// env⁻¹(v): the variables bound to `v`.
    pub fn inverse(&self, v: &Value) -> Vec<String> {
        self.0
            .iter()
            .filter(|(_, u)| *u == v)
            .map(|(x, _)| x.clone())
            .collect()
    }
}

impl FromIterator<(String, Value)> for Env {
    fn from_iter<T: IntoIterator<Item = (String, Value)>>(iter: T) -> Self {
        Env(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Store {
    cells: BTreeMap<Loc, Value>,
    next: Loc,
}

impl Default for Loc {
    fn default() -> Self {
        Loc(0)
    }
}

impl Store {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn alloc(&mut self, v: Value) -> Loc {
        let l = self.next;
        self.cells.insert(l, v);
        self.next = l.next();
        l
    }

    pub fn get(&self, l: Loc) -> Option<&Value> {
        self.cells.get(&l)
    }

    pub fn set(&mut self, l: Loc, v: Value) {
        self.cells.insert(l, v);
    }

    pub fn next_loc(&self) -> Loc {
        self.next
    }

    pub fn locations(&self) -> impl Iterator<Item = Loc> + '_ {
        self.cells.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Loc, &Value)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allocation_is_fresh() {
        let mut s = Store::new();
        let a = s.alloc(Value::nat(1));
        let b = s.alloc(Value::nat(2));
        assert_eq!((a, b), (Loc(0), Loc(1)));
        assert_eq!(s.next_loc(), Loc(2));
        assert!(s.get(s.next_loc()).is_none());
    }

    #[test]
    fn env_inverse() {
        let env: Env = [
            ("x".to_string(), Value::Loc(Loc(0))),
            ("y".to_string(), Value::Loc(Loc(0))),
            ("z".to_string(), Value::nat(0)),
        ]
        .into_iter()
        .collect();
        assert_eq!(env.inverse(&Value::Loc(Loc(0))), vec!["x", "y"]);
        assert!(env.inverse(&Value::Loc(Loc(1))).is_empty());
    }
}
