//! Data-flow and alias analysis for a λ-calculus with references and pattern
//! matching, expressed as a type system.
//!
//! The crate is organised as a pipeline:
//!
//! * [`syntax`] parses the labeled surface language,
//! * [`semantics`] evaluates programs while collecting the dependency
//!   function `w` and its order,
//! * [`approx`] computes the static inputs of typing (the approximated order
//!   Π and the alias base κ⁰),
//! * [`typesys`] assigns `(δ, κ)` types,
//! * [`agreement`] checks that the static information over-approximates
//!   every run, and generates random programs to fuzz that claim,
//! * [`security`] builds a non-interference check on top of the analysis.
//!
//! ```
//! use flowalias::{syntax::parse, semantics::run};
//!
//! let program = parse(flowalias::EXAMPLE_ONE).unwrap();
//! let outcome = run(&program).unwrap();
//! assert_eq!(outcome.value.to_string(), "5");
//! assert_eq!(outcome.dep.w.len(), 5);
//! ```

pub mod agreement;
pub mod approx;
pub mod cli;
pub mod poset;
pub mod security;
pub mod semantics;
pub mod syntax;
pub mod typesys;

/// The running example: allocate a reference, overwrite it through an
/// alias, then read it back. Point 3 is reserved by the relabeled group
/// `(5@3)@4`.
pub const EXAMPLE_ONE: &str =
    "(let x (ref 4@1)@2 (let y (let z (5@3)@4 ((x@5) := (z@7))@8)@9 (!(x@6))@10)@11)@12";

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/syntax.md")]
    mod syntax {}
    #[doc = include_str!("../../../book/src/semantics.md")]
    mod semantics {}
    #[doc = include_str!("../../../book/src/types.md")]
    mod types {}
    #[doc = include_str!("../../../book/src/approximation.md")]
    mod approximation {}
    #[doc = include_str!("../../../book/src/agreement.md")]
    mod agreement {}
    #[doc = include_str!("../../../book/src/security.md")]
    mod security {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
