//! Labeled abstract syntax.
//!
//! Every subexpression is an [`Occurrence`]: an [`Expr`] paired with a unique
//! [`Point`]. Parsing assigns points (explicitly via `@n` or automatically) and
//! renames binders so that every binding occurrence uses a distinct name.

mod names;
mod parse;
mod print;

use std::fmt;

use serde::Serialize;

pub use names::{all_identifiers, alpha_normalize, binders, free_vars};
pub use parse::{parse, ParseError};
pub use print::pretty;

/// A program point. Real points are positive; `Point::START` marks "no
/// previous point" at the beginning of an evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Point(pub u32);

impl Point {
    pub const START: Point = Point(0);

    pub fn is_start(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Nat(u64),
    Bool(bool),
    Unit,
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Nat(n) => write!(f, "{n}"),
            Constant::Bool(b) => write!(f, "{b}"),
            Constant::Unit => write!(f, "()"),
        }
    }
}

/// Functional constants: arithmetic and Boolean connectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prim {
    Add,
    Sub,
    Mul,
    Lt,
    Eq,
    And,
    Or,
}

impl Prim {
    pub fn symbol(self) -> &'static str {
        match self {
            Prim::Add => "+",
            Prim::Sub => "-",
            Prim::Mul => "*",
            Prim::Lt => "<",
            Prim::Eq => "=",
            Prim::And => "&&",
            Prim::Or => "||",
        }
    }

    pub const ALL: [Prim; 7] = [
        Prim::Add,
        Prim::Sub,
        Prim::Mul,
        Prim::Lt,
        Prim::Eq,
        Prim::And,
        Prim::Or,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Nat(u64),
    Bool(bool),
    Var(String),
    Wildcard,
    Tuple(Vec<Pattern>),
}

/// One `pattern -> clause` pair of a `case`. Keeping the two together makes
/// the pattern and clause lists equal in length by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arm {
    pub pattern: Pattern,
    pub body: Occurrence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(String),
    Const(Constant),
    App(Box<Occurrence>, Box<Occurrence>),
    Abs(String, Box<Occurrence>),
    Prim(Prim, Box<Occurrence>, Box<Occurrence>),
    Let(String, Box<Occurrence>, Box<Occurrence>),
    LetRec(String, Box<Occurrence>, Box<Occurrence>),
    Case(Box<Occurrence>, Vec<Arm>),
    Ref(Box<Occurrence>),
    Assign(Box<Occurrence>, Box<Occurrence>),
    Deref(Box<Occurrence>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub point: Point,
    pub expr: Expr,
}

impl Occurrence {
    pub fn new(point: Point, expr: Expr) -> Self {
        Occurrence { point, expr }
    }

    /// Direct subterms, in evaluation order. Case arms come after the scrutinee.
    pub fn children(&self) -> Vec<&Occurrence> {
        match &self.expr {
            Expr::Var(_) | Expr::Const(_) => vec![],
            Expr::Abs(_, body) | Expr::Ref(body) | Expr::Deref(body) => vec![body],
            Expr::App(a, b)
            | Expr::Prim(_, a, b)
            | Expr::Let(_, a, b)
            | Expr::LetRec(_, a, b)
            | Expr::Assign(a, b) => vec![a, b],
            Expr::Case(s, arms) => {
                let mut out = vec![&**s];
                out.extend(arms.iter().map(|a| &a.body));
                out
            }
        }
    }

    pub fn children_mut(&mut self) -> Vec<&mut Occurrence> {
        match &mut self.expr {
            Expr::Var(_) | Expr::Const(_) => vec![],
            Expr::Abs(_, body) | Expr::Ref(body) | Expr::Deref(body) => vec![body],
            Expr::App(a, b)
            | Expr::Prim(_, a, b)
            | Expr::Let(_, a, b)
            | Expr::LetRec(_, a, b)
            | Expr::Assign(a, b) => vec![a, b],
            Expr::Case(s, arms) => {
                let mut out = vec![&mut **s];
                out.extend(arms.iter_mut().map(|a| &mut a.body));
                out
            }
        }
    }

    /// Pre-order traversal of every occurrence in the tree.
    pub fn subterms(&self) -> Vec<&Occurrence> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(o) = stack.pop() {
            out.push(o);
            let mut kids = o.children();
            kids.reverse();
            stack.extend(kids);
        }
        out
    }

    /// All program points, in pre-order.
    pub fn points(&self) -> Vec<Point> {
        self.subterms().iter().map(|o| o.point).collect()
    }

    pub fn find(&self, point: Point) -> Option<&Occurrence> {
        self.subterms().into_iter().find(|o| o.point == point)
    }

    pub fn is_abs(&self) -> bool {
        matches!(self.expr, Expr::Abs(..))
    }

    /// Number of occurrences in the tree.
    pub fn size(&self) -> usize {
        self.subterms().len()
    }
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}
