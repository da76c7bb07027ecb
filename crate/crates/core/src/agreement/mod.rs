//! Executable agreement relations between a run and its static analysis,
//! the soundness oracle built on them, and a random program generator.
//!
//! ```
//! use flowalias::{agreement::check_soundness, syntax::parse};
//!
//! let report = check_soundness(&parse(flowalias::EXAMPLE_ONE).unwrap());
//! assert!(report.holds());
//! ```

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value as Json};

mod gen;
mod relations;
mod soundness;

pub use gen::{fuzz_size, gen_program};
pub use relations::{alias_agree, dep_agree, env_agree, type_agree, EnvAgreement, Mismatch};
pub use soundness::{check_soundness, check_soundness_with, CheckOptions};

/// The relation a mismatch was found in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Dependency,
    Alias,
    Shape,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Dependency => "dependency",
            Relation::Alias => "alias",
            Relation::Shape => "shape",
        })
    }
}

/// A checked obligation. The first six are the environment agreement
/// clauses, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    LocalCoverage,
    LocalAgreement,
    StoreCoverage,
    StoreAgreement,
    OrderContainment,
    PredecessorCorrespondence,
    /// `Γ, Π ⊢ v : T` for the value of a sub-evaluation.
    ValueTyping,
    /// `Γ, Π ⊢ env` before a sub-evaluation.
    EnvironmentTyping,
    /// The value and footprint of a sub-evaluation agree with its type.
    ResultAgreement,
    /// New bindings never name a variable free in the evaluated occurrence.
    History,
    /// A well-typed program got stuck.
    Runtime,
}

impl Clause {
    pub const ENVIRONMENT: [Clause; 6] = [
        Clause::LocalCoverage,
        Clause::LocalAgreement,
        Clause::StoreCoverage,
        Clause::StoreAgreement,
        Clause::OrderContainment,
        Clause::PredecessorCorrespondence,
    ];

    pub const ALL: [Clause; 11] = [
        Clause::LocalCoverage,
        Clause::LocalAgreement,
        Clause::StoreCoverage,
        Clause::StoreAgreement,
        Clause::OrderContainment,
        Clause::PredecessorCorrespondence,
        Clause::ValueTyping,
        Clause::EnvironmentTyping,
        Clause::ResultAgreement,
        Clause::History,
        Clause::Runtime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Clause::LocalCoverage => "local-coverage",
            Clause::LocalAgreement => "local-agreement",
            Clause::StoreCoverage => "store-coverage",
            Clause::StoreAgreement => "store-agreement",
            Clause::OrderContainment => "order-containment",
            Clause::PredecessorCorrespondence => "predecessor-correspondence",
            Clause::ValueTyping => "value-typing",
            Clause::EnvironmentTyping => "environment-typing",
            Clause::ResultAgreement => "result-agreement",
            Clause::History => "history",
            Clause::Runtime => "runtime",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One violated obligation, at the point whose evaluation exposed it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Failure {
    pub clause: Clause,
    pub relation: Option<Relation>,
    pub point: u32,
    pub witness: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.clause, self.point)?;
        if let Some(r) = self.relation {
            write!(f, " ({r})")?;
        }
        write!(f, ": {}", self.witness)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    /// The run hit its step or depth limit.
    Inconclusive,
    /// The analysis rejected the program, so there is nothing to check.
    Rejected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Rejected => "rejected",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct AgreementReport {
    pub failures: Vec<Failure>,
    /// How many checked states gave each clause something to check.
    pub activity: BTreeMap<Clause, usize>,
    pub steps: usize,
    pub inconclusive: Option<String>,
    pub rejected: Option<String>,
}

impl AgreementReport {
    pub fn verdict(&self) -> Verdict {
        if self.rejected.is_some() {
            Verdict::Rejected
        } else if !self.failures.is_empty() {
            Verdict::Fails
        } else if self.inconclusive.is_some() {
            Verdict::Inconclusive
        } else {
            Verdict::Holds
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict() == Verdict::Holds
    }

    pub fn clause_holds(&self, c: Clause) -> bool {
        self.failures.iter().all(|f| f.clause != c)
    }

    pub fn is_active(&self, c: Clause) -> bool {
        self.activity.get(&c).is_some_and(|&n| n > 0)
    }

    pub fn failed(&self, c: Clause) -> impl Iterator<Item = &Failure> {
        self.failures.iter().filter(move |f| f.clause == c)
    }

    pub fn to_json(&self) -> Json {
        let clauses: Vec<Json> = Clause::ALL
            .iter()
            .map(|&c| {
                let witnesses: Vec<&Failure> = self.failed(c).collect();
                json!({
                    "clause": c,
                    "holds": witnesses.is_empty(),
                    "active": self.activity.get(&c).copied().unwrap_or(0),
                    "witnesses": witnesses,
                })
            })
            .collect();
        json!({
            "verdict": self.verdict(),
            "steps": self.steps,
            "clauses": clauses,
            "inconclusive": self.inconclusive,
            "rejected": self.rejected,
        })
    }
}

impl fmt::Display for AgreementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict())?;
        if let Some(r) = &self.rejected {
            writeln!(f, "rejected: {r}")?;
        }
        if let Some(r) = &self.inconclusive {
            writeln!(f, "inconclusive: {r}")?;
        }
        for c in Clause::ALL {
            let state = if self.clause_holds(c) { "holds" } else { "FAILS" };
            let n = self.activity.get(&c).copied().unwrap_or(0);
            writeln!(f, "  {:<28} {state} ({n} checks)", c.name())?;
        }
        for fail in &self.failures {
            writeln!(f, "  - {fail}")?;
        }
        Ok(())
    }
}
