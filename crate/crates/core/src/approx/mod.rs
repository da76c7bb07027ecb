//! Static inputs to typing: the approximated order Π and the alias base κ⁰.

mod alias;
mod calls;
mod pi;

pub use alias::build_alias_base;
pub use calls::CallSites;
pub use pi::approximate_pi;
