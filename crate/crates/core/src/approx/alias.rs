use std::collections::{BTreeMap, BTreeSet};

use super::calls::CallSites;
use crate::syntax::{Expr, Occurrence, Pattern, Point};
use crate::typesys::{AliasBase, Name};

/// Unification-based points-to partition.
///
/// Every name gets a node; each class may point to the class of the
/// locations it stores. Classes merge whenever one value flows into a
/// binder, a parameter, a reference cell or a clause result. Classes that
/// end up without an internal variable never denote a location and are
/// split back into singletons.
pub fn build_alias_base(o: &Occurrence) -> AliasBase {
    let sites = CallSites::new(o);
    let mut b = Builder {
        sites: &sites,
        parent: Vec::new(),
        content: Vec::new(),
        names: BTreeMap::new(),
        returns: BTreeMap::new(),
    };
    for x in crate::syntax::free_vars(o) {
        b.name(Name::Var(x));
    }
    b.val(o);
    let mut classes: BTreeMap<usize, BTreeSet<Name>> = BTreeMap::new();
    let named: Vec<(Name, usize)> = b.names.iter().map(|(n, &i)| (n.clone(), i)).collect();
    for (n, i) in named {
        let root = b.find(i);
        classes.entry(root).or_default().insert(n);
    }
    let mut blocks = Vec::new();
    for block in classes.into_values() {
        if block.iter().any(Name::is_internal) {
            blocks.push(block);
        } else {
            blocks.extend(block.into_iter().map(|n| BTreeSet::from([n])));
        }
    }
    AliasBase::new(blocks).expect("unification yields a valid partition")
}

struct Builder<'s, 'a> {
    sites: &'s CallSites<'a>,
    parent: Vec<usize>,
    content: Vec<Option<usize>>,
    names: BTreeMap<Name, usize>,
    /// Placeholder for the result of each abstraction.
    returns: BTreeMap<Point, usize>,
}

impl Builder<'_, '_> {
    fn fresh(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.content.push(None);
        self.parent.len() - 1
    }

    fn name(&mut self, n: Name) -> usize {
        if let Some(&i) = self.names.get(&n) {
            return i;
        }
        let i = self.fresh();
        self.names.insert(n, i);
        i
    }

    fn ret(&mut self, lam: Point) -> usize {
        if let Some(&i) = self.returns.get(&lam) {
            return i;
        }
        let i = self.fresh();
        self.returns.insert(lam, i);
        i
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        self.parent[rb] = ra;
        match (self.content[ra], self.content[rb].take()) {
            (Some(ca), Some(cb)) => {
                self.union(ca, cb);
            }
            (None, Some(cb)) => self.content[ra] = Some(cb),
            _ => {}
        }
        self.find(ra)
    }

    fn content_of(&mut self, i: usize) -> usize {
        let r = self.find(i);
        match self.content[r] {
            Some(c) => c,
            None => {
                let c = self.fresh();
                self.content[r] = Some(c);
                c
            }
        }
    }

    fn flow(&mut self, into: usize, from: Option<usize>) {
        if let Some(f) = from {
            self.union(into, f);
        }
    }

    /// The class of locations `n` may evaluate to, if it may be one.
    fn val(&mut self, n: &Occurrence) -> Option<usize> {
        match &n.expr {
            Expr::Var(x) => Some(self.name(Name::var(x.clone()))),
            Expr::Const(_) => None,
            Expr::Abs(x, body) => {
                self.name(Name::var(x.clone()));
                let r = self.val(body);
                let ret = self.ret(n.point);
                self.flow(ret, r);
                None
            }
            Expr::App(f, a) => {
                self.val(f);
                let va = self.val(a);
                let lam = self.sites.lambda_of(n.point)?;
                let Expr::Abs(x, _) = &lam.expr else {
                    return None;
                };
                let param = self.name(Name::var(x.clone()));
                self.flow(param, va);
                Some(self.ret(lam.point))
            }
            Expr::Prim(_, a, b) => {
                self.val(a);
                self.val(b);
                None
            }
            Expr::Let(x, e1, e2) | Expr::LetRec(x, e1, e2) => {
                let v1 = self.val(e1);
                let xi = self.name(Name::var(x.clone()));
                self.flow(xi, v1);
                self.val(e2)
            }
            Expr::Case(s, arms) => {
                let vs = self.val(s);
                let mut result = None;
                for arm in arms {
                    if let Pattern::Var(x) = &arm.pattern {
                        let xi = self.name(Name::var(x.clone()));
                        self.flow(xi, vs);
                    }
                    if let Some(r) = self.val(&arm.body) {
                        result = Some(match result {
                            Some(acc) => self.union(acc, r),
                            None => r,
                        });
                    }
                }
                result
            }
            Expr::Ref(e) => {
                let v = self.name(Name::Internal(n.point));
                let ve = self.val(e);
                if let Some(ve) = ve {
                    let c = self.content_of(v);
                    self.union(c, ve);
                }
                Some(v)
            }
            Expr::Deref(e) => {
                let ve = self.val(e)?;
                Some(self.content_of(ve))
            }
            Expr::Assign(t, e) => {
                let vt = self.val(t);
                let ve = self.val(e);
                if let (Some(vt), Some(ve)) = (vt, ve) {
                    let c = self.content_of(vt);
                    self.union(c, ve);
                }
                None
            }
        }
    }
}
