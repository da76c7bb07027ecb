//! Types `(δ, κ)` and arrows, approximated orders, and the typing judgment.
//!
//! δ over-approximates the occurrences a value may depend on; κ names the
//! variables and internal variables that may denote the same location. Each
//! `ref` occurrence at point `p` owns the internal variable `vp`.
//!
//! ```
//! use flowalias::{syntax::parse, typesys::analyze};
//!
//! let a = analyze(&parse("(let r (ref 1@1)@2 (! r@3)@4)@5").unwrap()).unwrap();
//! assert_eq!(a.result.to_string(), "({r@3, v2@4}, {})");
//! ```

mod check;
mod linear;
mod order;
mod report;
mod types;
mod value;

pub use check::{
    analyze, analyze_with, typecheck, typecheck_with, Analysis, AnalysisContext, Mutation,
    Options, TypeError,
};
pub use linear::{linear_use_check, Violation};
pub use order::{ip_type, p_chains, Pi, UnknownPoint};
pub use report::report_json;
pub use types::{
    type_union, AliasBase, Delta, Kappa, Name, PartitionViolation, TAtom, Type, TypeEnv,
    UndefinedUnion,
};
pub use value::{type_value, well_typed_env};
