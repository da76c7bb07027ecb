use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{parse, Occurrence};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ty {
    Nat,
    Bool,
    Unit,
    Ref(Box<Ty>),
}

impl Ty {
    fn reference(t: Ty) -> Ty {
        Ty::Ref(Box::new(t))
    }

    fn depth(&self) -> usize {
        match self {
            Ty::Ref(t) => 1 + t.depth(),
            _ => 0,
        }
    }
}

/// A closed, linear, terminating program of roughly `size` nodes,
/// determined entirely by `seed`.
///
/// Functions appear only where their single call is built alongside them,
/// so programs satisfy the linearity check by construction. Programs favour
/// references shared between several names and written more than once.
pub fn gen_program(seed: u64, size: usize) -> Occurrence {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        fresh: 0,
        scope: Vec::new(),
    };
    let ty = g.any_type(1);
    let src = g.expr(&ty, size.max(1));
    parse(&src).unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{src}"))
}

/// The size used for `seed` in a campaign whose sizes range over
/// `1..=max`.
pub fn fuzz_size(seed: u64, max: usize) -> usize {
    1 + (seed % max.max(1) as u64) as usize
}

struct Gen {
    rng: ChaCha8Rng,
    fresh: usize,
    scope: Vec<(String, Ty)>,
}

impl Gen {
    fn name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn any_type(&mut self, max_ref: usize) -> Ty {
        match self.rng.gen_range(0..10) {
            0..=2 => Ty::Nat,
            3 => Ty::Bool,
            4 => Ty::Unit,
            _ if max_ref > 0 => {
                let inner = self.any_type(max_ref - 1);
                Ty::reference(inner)
            }
            _ => Ty::Nat,
        }
    }

    fn vars_of(&self, ty: &Ty) -> Vec<String> {
        self.scope
            .iter()
            .filter(|(_, t)| t == ty)
            .map(|(x, _)| x.clone())
            .collect()
    }

    fn refs(&self) -> Vec<(String, Ty)> {
        self.scope
            .iter()
            .filter(|(_, t)| matches!(t, Ty::Ref(_)))
            .cloned()
            .collect()
    }

    fn with<T>(&mut self, x: &str, ty: &Ty, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((x.to_string(), ty.clone()));
        let out = f(self);
        self.scope.pop();
        out
    }

    fn constant(&mut self, ty: &Ty) -> String {
        match ty {
            Ty::Nat => self.rng.gen_range(0..4u32).to_string(),
            Ty::Bool => self.rng.gen_bool(0.5).to_string(),
            Ty::Unit => "()".into(),
            Ty::Ref(t) => format!("(ref {})", self.constant(t)),
        }
    }

    fn leaf(&mut self, ty: &Ty) -> String {
        let vars = self.vars_of(ty);
        if !vars.is_empty() && self.rng.gen_bool(0.7) {
            return vars.choose(&mut self.rng).unwrap().clone();
        }
        self.constant(ty)
    }

    fn expr(&mut self, ty: &Ty, size: usize) -> String {
        if size <= 1 {
            return self.leaf(ty);
        }
        let n = size - 1;
        let refs = self.refs();
        loop {
            let pick = self.rng.gen_range(0..15);
            let out = match pick {
                0 | 1 => Some(self.let_expr(ty, n)),
                2 if !refs.is_empty() => Some(self.alias(ty, n, &refs)),
                3 | 4 if !refs.is_empty() => Some(self.write_then(ty, n, &refs)),
                5 if ty.depth() < 2 => Some(self.deref(ty, n)),
                6 => self.prim(ty, n),
                7 => Some(self.scalar_case(ty, n)),
                8 if !refs.is_empty() => Some(self.ref_case(ty, n, &refs)),
                9 => Some(self.call(ty, n, false)),
                10 => Some(self.call(ty, n, true)),
                11 => Some(self.direct_call(ty, n)),
                12 => Some(self.dead_rec(ty, n)),
                13 => match ty {
                    Ty::Ref(t) => Some(format!("(ref {})", self.expr(t, n))),
                    _ => None,
                },
                14 => match ty {
                    Ty::Unit if !refs.is_empty() => {
                        let (r, t) = refs.choose(&mut self.rng).unwrap().clone();
                        let Ty::Ref(inner) = t else { unreachable!() };
                        Some(format!("({r} := {})", self.expr(&inner, n)))
                    }
                    _ => None,
                },
                _ => None,
            };
            if let Some(s) = out {
                return s;
            }
        }
    }

    fn split(&mut self, n: usize) -> (usize, usize) {
        let a = if n <= 1 { n } else { self.rng.gen_range(1..n) };
        (a.max(1), (n - a).max(1))
    }

    fn let_expr(&mut self, ty: &Ty, n: usize) -> String {
        let t1 = self.any_type(2);
        let (a, b) = self.split(n);
        let e1 = self.expr(&t1, a);
        let x = self.name("x");
        let body = self.with(&x, &t1, |g| g.expr(ty, b));
        format!("(let {x} {e1} {body})")
    }

    fn alias(&mut self, ty: &Ty, n: usize, refs: &[(String, Ty)]) -> String {
        let (r, t) = refs.choose(&mut self.rng).unwrap().clone();
        let b = self.name("a");
        let body = self.with(&b, &t, |g| g.expr(ty, n));
        format!("(let {b} {r} {body})")
    }

    fn write_then(&mut self, ty: &Ty, n: usize, refs: &[(String, Ty)]) -> String {
        let (r, t) = refs.choose(&mut self.rng).unwrap().clone();
        let Ty::Ref(inner) = t else { unreachable!() };
        let (a, b) = self.split(n);
        let rhs = self.expr(&inner, a);
        let u = self.name("u");
        let body = self.with(&u, &Ty::Unit, |g| g.expr(ty, b));
        format!("(let {u} ({r} := {rhs}) {body})")
    }

    fn deref(&mut self, ty: &Ty, n: usize) -> String {
        let rt = Ty::reference(ty.clone());
        format!("(! {})", self.expr(&rt, n))
    }

    fn prim(&mut self, ty: &Ty, n: usize) -> Option<String> {
        let (a, b) = self.split(n);
        let (op, arg) = match ty {
            Ty::Nat => (*["+", "-", "*"].choose(&mut self.rng).unwrap(), Ty::Nat),
            Ty::Bool if self.rng.gen_bool(0.5) => (*["<", "="].choose(&mut self.rng).unwrap(), Ty::Nat),
            Ty::Bool => (*["&&", "||"].choose(&mut self.rng).unwrap(), Ty::Bool),
            _ => return None,
        };
        let l = self.expr(&arg, a);
        let r = self.expr(&arg, b);
        Some(format!("({op} {l} {r})"))
    }

    fn scalar_case(&mut self, ty: &Ty, n: usize) -> String {
        let st = if self.rng.gen_bool(0.6) { Ty::Nat } else { Ty::Bool };
        let arms = self.rng.gen_range(1..=3usize);
        let (a, rest) = self.split(n);
        let scrutinee = self.expr(&st, a);
        let per = (rest / (arms + 1)).max(1);
        let mut out = Vec::new();
        for i in 0..arms {
            let pat = match st {
                Ty::Nat => i.to_string(),
                _ => (i % 2 == 0).to_string(),
            };
            out.push(format!("{pat} -> {}", self.expr(ty, per)));
        }
        if self.rng.gen_bool(0.5) {
            out.push(format!("_ -> {}", self.expr(ty, per)));
        } else {
            let y = self.name("c");
            let body = self.with(&y, &st, |g| g.expr(ty, per));
            out.push(format!("{y} -> {body}"));
        }
        format!("(case {scrutinee} [{}])", out.join(", "))
    }

    fn ref_case(&mut self, ty: &Ty, n: usize, refs: &[(String, Ty)]) -> String {
        let (r, t) = refs.choose(&mut self.rng).unwrap().clone();
        let y = self.name("c");
        let body = self.with(&y, &t, |g| g.expr(ty, n));
        format!("(case {r} [{y} -> {body}])")
    }

    /// A function, its one call, and a continuation using the result.
    fn call(&mut self, ty: &Ty, n: usize, rec: bool) -> String {
        let tp = self.any_type(1);
        let tr = self.any_type(1);
        let (a, rest) = self.split(n);
        let (b, c) = self.split(rest);
        let f = self.name("f");
        let p = self.name("p");
        let body = self.with(&p, &tp, |g| g.expr(&tr, a));
        let arg = self.expr(&tp, b);
        let r = self.name("r");
        let cont = self.with(&r, &tr, |g| g.expr(ty, c));
        let kw = if rec { "let rec" } else { "let" };
        format!("({kw} {f} (λ{p}. {body}) (let {r} ({f} {arg}) {cont}))")
    }

    fn direct_call(&mut self, ty: &Ty, n: usize) -> String {
        let tp = self.any_type(1);
        let (a, b) = self.split(n);
        let p = self.name("p");
        let body = self.with(&p, &tp, |g| g.expr(ty, a));
        let arg = self.expr(&tp, b);
        format!("((λ{p}. {body}) {arg})")
    }

    /// A recursive function that is never called.
    fn dead_rec(&mut self, ty: &Ty, n: usize) -> String {
        let f = self.name("f");
        let k = self.name("k");
        let body = self.expr(ty, n);
        format!("(let rec {f} (λ{k}. (case {k} [0 -> 0, _ -> ({f} (- {k} 1))])) {body})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typesys::linear_use_check;

    #[test]
    fn deterministic() {
        for seed in 0..20 {
            assert_eq!(gen_program(seed, 30), gen_program(seed, 30));
        }
    }

    #[test]
    fn linear_by_construction() {
        for seed in 0..300 {
            let o = gen_program(seed, 30);
            assert!(linear_use_check(&o).is_ok(), "seed {seed}");
        }
    }

    #[test]
    fn tiny_programs() {
        for seed in 0..20 {
            gen_program(seed, 1);
        }
    }
}
