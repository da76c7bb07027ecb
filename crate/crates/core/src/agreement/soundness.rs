use std::collections::BTreeSet;

use super::relations::{env_agree, type_agree};
use super::{AgreementReport, Clause, Failure, Relation};
use crate::semantics::{
    Atom, DepState, Env, EvalError, Evaluator, Exit, Observer, DEFAULT_MAX_DEPTH,
    DEFAULT_STEP_BUDGET,
};
use crate::syntax::{free_vars, Occurrence, Point};
use crate::typesys::{analyze_with, type_value, well_typed_env, Analysis, Mutation, Options};

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub budget: u64,
    pub max_depth: usize,
    /// Type with a deliberately weakened rule.
    pub mutation: Option<Mutation>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            budget: DEFAULT_STEP_BUDGET,
            max_depth: DEFAULT_MAX_DEPTH,
            mutation: None,
        }
    }
}

pub fn check_soundness(o: &Occurrence) -> AgreementReport {
    check_soundness_with(o, &CheckOptions::default())
}

/// Types `o`, runs it from the empty state, and checks every finished
/// sub-evaluation against the analysis.
pub fn check_soundness_with(o: &Occurrence, opts: &CheckOptions) -> AgreementReport {
    let mut report = AgreementReport::default();
    let analysis = match analyze_with(
        o,
        &Options {
            mutation: opts.mutation,
            ..Options::default()
        },
    ) {
        Ok(a) => a,
        Err(e) => {
            report.rejected = Some(e.to_string());
            return report;
        }
    };
    let mut oracle = Oracle {
        a: &analysis,
        marks: Vec::new(),
        report: &mut report,
        seen: BTreeSet::new(),
    };
    let mut ev = Evaluator::new()
        .budget(opts.budget)
        .max_depth(opts.max_depth)
        .observer(&mut oracle);
    let mut store = Default::default();
    let mut dep = DepState::new();
    let r = ev.eval(&Env::new(), o, &mut store, &mut dep, Point::START);
    let steps = ev.steps();
    report.steps = steps as usize;
    match r {
        Ok(_) => {}
        Err(e) if e.is_resource_limit() => report.inconclusive = Some(e.to_string()),
        Err(e) => report.failures.push(runtime_failure(o, &e)),
    }
    report
}

fn runtime_failure(o: &Occurrence, e: &EvalError) -> Failure {
    Failure {
        clause: Clause::Runtime,
        relation: None,
        point: o.point.0,
        witness: e.to_string(),
    }
}

struct Oracle<'a> {
    a: &'a Analysis,
    /// History length when each open sub-evaluation started.
    marks: Vec<usize>,
    report: &'a mut AgreementReport,
    seen: BTreeSet<(Clause, Option<Relation>, String)>,
}

impl Oracle<'_> {
    fn active(&mut self, c: Clause) {
        *self.report.activity.entry(c).or_default() += 1;
    }

    fn fail(&mut self, clause: Clause, relation: Option<Relation>, point: Point, witness: String) {
        if self.seen.insert((clause, relation, witness.clone())) {
            self.report.failures.push(Failure {
                clause,
                relation,
                point: point.0,
                witness,
            });
        }
    }
}

impl Observer for Oracle<'_> {
    fn enter(&mut self, o: &Occurrence, env: &Env, _input: Point, dep: &DepState) {
        self.marks.push(dep.history.len());
        if env.is_empty() {
            return;
        }
        self.active(Clause::EnvironmentTyping);
        if let Err(e) = well_typed_env(&self.a.ctx.gamma, &self.a.ctx.pi, env) {
            self.fail(Clause::EnvironmentTyping, None, o.point, e);
        }
    }

    fn exit(&mut self, s: &Exit<'_>) {
        let point = s.occurrence.point;
        let mark = self.marks.pop().unwrap_or(0);
        let fresh = &s.dep.history[mark.min(s.dep.history.len())..];
        if fresh.iter().any(|a| matches!(a, Atom::Var(_))) {
            self.active(Clause::History);
            let fv = free_vars(s.occurrence);
            for a in fresh {
                if let Atom::Var(v) = a {
                    if fv.contains(&v.name) {
                        self.fail(Clause::History, None, point, v.to_string());
                    }
                }
            }
        }

        let ctx = &self.a.ctx;
        if let Some(t) = self.a.types.get(&point) {
            self.active(Clause::ValueTyping);
            if let Err(e) = type_value(&ctx.gamma, &ctx.pi, s.value, t) {
                self.fail(Clause::ValueTyping, None, point, e);
            }
            self.active(Clause::ResultAgreement);
            if let Err(m) = type_agree(s.env, s.value, s.dep, s.footprint, &ctx.gamma, t, &ctx.kappa0)
            {
                self.fail(Clause::ResultAgreement, Some(m.relation), point, m.witness);
            }
        }

        let r = env_agree(s.env, s.store, s.dep, &ctx.gamma, &ctx.pi, &ctx.kappa0);
        for c in r.active {
            self.active(c);
        }
        for (c, rel, w) in r.failures {
            self.fail(c, rel, point, w);
        }
    }
}
