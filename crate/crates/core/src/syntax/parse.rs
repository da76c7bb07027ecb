use std::collections::BTreeSet;

use thiserror::Error;

use super::names::alpha_normalize;
use super::{Arm, Constant, Expr, Occurrence, Pattern, Point, Prim};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: program point {point} is used more than once")]
    DuplicatePoint { line: usize, col: usize, point: u32 },
    #[error("{line}:{col}: case has {patterns} patterns but {clauses} clauses")]
    ArityMismatch {
        line: usize,
        col: usize,
        patterns: usize,
        clauses: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Arrow,
    At,
    Assign,
    Bang,
    Lambda,
    Dot,
    Underscore,
    Int(u64),
    Ident(String),
    Op(Prim),
    Let,
    Rec,
    Case,
    Ref,
    True,
    False,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, col: tc });
            *i += len;
            *col += len;
        };
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '[' => push(Tok::LBracket, 1, &mut i, &mut col),
            ']' => push(Tok::RBracket, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '@' => push(Tok::At, 1, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            'λ' | '\\' => push(Tok::Lambda, 1, &mut i, &mut col),
            '-' if next == Some('>') => push(Tok::Arrow, 2, &mut i, &mut col),
            ':' if next == Some('=') => push(Tok::Assign, 2, &mut i, &mut col),
            '&' if next == Some('&') => push(Tok::Op(Prim::And), 2, &mut i, &mut col),
            '|' if next == Some('|') => push(Tok::Op(Prim::Or), 2, &mut i, &mut col),
            '+' => push(Tok::Op(Prim::Add), 1, &mut i, &mut col),
            '-' => push(Tok::Op(Prim::Sub), 1, &mut i, &mut col),
            '*' => push(Tok::Op(Prim::Mul), 1, &mut i, &mut col),
            '<' => push(Tok::Op(Prim::Lt), 1, &mut i, &mut col),
            '=' => push(Tok::Op(Prim::Eq), 1, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text.parse::<u64>().map_err(|_| ParseError::Syntax {
                    line: tl,
                    col: tc,
                    message: format!("integer literal `{text}` is out of range"),
                })?;
                col += i - start;
                out.push(Token { tok: Tok::Int(n), line: tl, col: tc });
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += i - start;
                let tok = match text.as_str() {
                    "_" => Tok::Underscore,
                    "let" => Tok::Let,
                    "rec" => Tok::Rec,
                    "case" => Tok::Case,
                    "ref" => Tok::Ref,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(text),
                };
                out.push(Token { tok, line: tl, col: tc });
            }
            other => {
                return Err(ParseError::Syntax {
                    line,
                    col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    used: BTreeSet<u32>,
}

/// Parses a program in the surface syntax and returns a fully labeled,
/// α-normalized occurrence.
///
/// Points written as `@n` are kept; unlabeled occurrences get the smallest
/// unused ids in pre-order. A parenthesized occurrence followed by a label,
/// as in `(5@3)@4`, is relabeled with the outer point; the inner id stays
/// reserved.
pub fn parse(src: &str) -> Result<Occurrence, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        used: BTreeSet::new(),
    };
    let mut occ = p.occurrence()?;
    p.expect(Tok::Eof, "end of input")?;
    let mut next = 1;
    auto_label(&mut occ, &p.used, &mut next);
    Ok(alpha_normalize(&occ))
}

fn auto_label(o: &mut Occurrence, used: &BTreeSet<u32>, next: &mut u32) {
    if o.point.is_start() {
        while used.contains(next) {
            *next += 1;
        }
        o.point = Point(*next);
        *next += 1;
    }
    for child in o.children_mut() {
        auto_label(child, used, next);
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError::Syntax {
            line: t.line,
            col: t.col,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.error(format!("expected {what}, found {:?}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            other => self.error(format!("expected identifier, found {other:?}")),
        }
    }

    fn label(&mut self) -> Result<Option<u32>, ParseError> {
        if *self.peek() != Tok::At {
            return Ok(None);
        }
        self.bump();
        let t = self.bump();
        match t.tok {
            Tok::Int(n) if n > 0 && n <= u32::MAX as u64 => {
                let n = n as u32;
                if !self.used.insert(n) {
                    return Err(ParseError::DuplicatePoint {
                        line: t.line,
                        col: t.col,
                        point: n,
                    });
                }
                Ok(Some(n))
            }
            other => Err(ParseError::Syntax {
                line: t.line,
                col: t.col,
                message: format!("expected a positive program point after `@`, found {other:?}"),
            }),
        }
    }

    fn occurrence(&mut self) -> Result<Occurrence, ParseError> {
        let mut occ = self.term()?;
        if let Some(n) = self.label()? {
            // Relabeling a group keeps any inner id reserved in `used`.
            occ.point = Point(n);
        }
        Ok(occ)
    }

    fn unlabeled(expr: Expr) -> Occurrence {
        Occurrence::new(Point::START, expr)
    }

    fn term(&mut self) -> Result<Occurrence, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Self::unlabeled(Expr::Const(Constant::Nat(n))))
            }
            Tok::True => {
                self.bump();
                Ok(Self::unlabeled(Expr::Const(Constant::Bool(true))))
            }
            Tok::False => {
                self.bump();
                Ok(Self::unlabeled(Expr::Const(Constant::Bool(false))))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Self::unlabeled(Expr::Var(name)))
            }
            Tok::LParen => {
                self.bump();
                self.compound()
            }
            other => self.error(format!("expected an expression, found {other:?}")),
        }
    }

    fn compound(&mut self) -> Result<Occurrence, ParseError> {
        let expr = match self.peek().clone() {
            Tok::RParen => {
                self.bump();
                return Ok(Self::unlabeled(Expr::Const(Constant::Unit)));
            }
            Tok::Lambda => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Dot, "`.`")?;
                let body = self.occurrence()?;
                Expr::Abs(x, Box::new(body))
            }
            Tok::Op(prim) => {
                self.bump();
                let a = self.occurrence()?;
                let b = self.occurrence()?;
                Expr::Prim(prim, Box::new(a), Box::new(b))
            }
            Tok::Let => {
                self.bump();
                let rec = *self.peek() == Tok::Rec;
                if rec {
                    self.bump();
                }
                let x = self.ident()?;
                let e1 = Box::new(self.occurrence()?);
                let e2 = Box::new(self.occurrence()?);
                if rec {
                    Expr::LetRec(x, e1, e2)
                } else {
                    Expr::Let(x, e1, e2)
                }
            }
            Tok::Case => {
                self.bump();
                let scrutinee = self.occurrence()?;
                let arms = self.arms()?;
                Expr::Case(Box::new(scrutinee), arms)
            }
            Tok::Ref => {
                self.bump();
                Expr::Ref(Box::new(self.occurrence()?))
            }
            Tok::Bang => {
                self.bump();
                Expr::Deref(Box::new(self.occurrence()?))
            }
            _ => {
                let first = self.occurrence()?;
                match self.peek() {
                    Tok::RParen => {
                        self.bump();
                        return Ok(first);
                    }
                    Tok::Assign => {
                        self.bump();
                        let rhs = self.occurrence()?;
                        Expr::Assign(Box::new(first), Box::new(rhs))
                    }
                    _ => {
                        let arg = self.occurrence()?;
                        Expr::App(Box::new(first), Box::new(arg))
                    }
                }
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(Self::unlabeled(expr))
    }

    fn arms(&mut self) -> Result<Vec<Arm>, ParseError> {
        let open = self.expect(Tok::LBracket, "`[`")?;
        let mut arms = Vec::new();
        loop {
            let pattern = self.pattern()?;
            if *self.peek() != Tok::Arrow {
                let mut patterns = arms.len() + 1;
                // Count any remaining bare patterns to report the full mismatch.
                while *self.peek() == Tok::Comma {
                    self.bump();
                    if self.pattern().is_err() {
                        break;
                    }
                    patterns += 1;
                    if *self.peek() == Tok::Arrow {
                        break;
                    }
                }
                return Err(ParseError::ArityMismatch {
                    line: open.line,
                    col: open.col,
                    patterns,
                    clauses: arms.len(),
                });
            }
            self.bump();
            let body = self.occurrence()?;
            arms.push(Arm { pattern, body });
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBracket => {
                    self.bump();
                    return Ok(arms);
                }
                other => return self.error(format!("expected `,` or `]`, found {other:?}")),
            }
        }
    }

    fn pattern(&mut self) -> Result<Pattern, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Pattern::Nat(n))
            }
            Tok::True => {
                self.bump();
                Ok(Pattern::Bool(true))
            }
            Tok::False => {
                self.bump();
                Ok(Pattern::Bool(false))
            }
            Tok::Underscore => {
                self.bump();
                Ok(Pattern::Wildcard)
            }
            Tok::Ident(x) => {
                self.bump();
                Ok(Pattern::Var(x))
            }
            Tok::LParen => {
                self.bump();
                let mut parts = vec![self.pattern()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    parts.push(self.pattern()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Pattern::Tuple(parts))
            }
            other => self.error(format!("expected a pattern, found {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_constant() {
        let o = parse("5").unwrap();
        assert_eq!(o, Occurrence::new(Point(1), Expr::Const(Constant::Nat(5))));
    }

    #[test]
    fn explicit_points_are_kept() {
        let o = parse("(let x (ref 4@1)@2 (!(x@6))@10)@12").unwrap();
        assert_eq!(o.point, Point(12));
        let mut pts: Vec<u32> = o.points().iter().map(|p| p.0).collect();
        pts.sort();
        assert_eq!(pts, vec![1, 2, 6, 10, 12]);
    }

    #[test]
    fn auto_labels_skip_used_ids() {
        let o = parse("(+ 1 2@1)").unwrap();
        // pre-order: the prim gets 2, `1` gets 3, `2@1` keeps 1
        assert_eq!(o.point, Point(2));
        let kids = o.children();
        assert_eq!(kids[0].point, Point(3));
        assert_eq!(kids[1].point, Point(1));
    }

    #[test]
    fn group_relabel_reserves_inner_id() {
        let o = parse("(let z (5@3)@4 z)").unwrap();
        let Expr::Let(_, e1, _) = &o.expr else { panic!() };
        assert_eq!(e1.point, Point(4));
        assert!(!o.points().contains(&Point(3)));
    }

    #[test]
    fn duplicate_point_is_rejected() {
        let err = parse("(+ 1@1 2@1)").unwrap_err();
        assert!(matches!(err, ParseError::DuplicatePoint { point: 1, line: 1, .. }));
    }

    #[test]
    fn case_arity_mismatch() {
        let err = parse("(case x [1 -> 2, 3])").unwrap_err();
        assert!(matches!(
            err,
            ParseError::ArityMismatch { patterns: 2, clauses: 1, .. }
        ));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse("(let x\n  )").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_and_tuple_patterns() {
        let o = parse("(case () [(a, _) -> 1, _ -> 2])").unwrap();
        let Expr::Case(s, arms) = &o.expr else { panic!() };
        assert_eq!(s.expr, Expr::Const(Constant::Unit));
        assert!(matches!(arms[0].pattern, Pattern::Tuple(_)));
    }

    #[test]
    fn backslash_lambda_and_application() {
        let o = parse("((\\x. x) 3)").unwrap();
        assert!(matches!(o.expr, Expr::App(..)));
    }
}
