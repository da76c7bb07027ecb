use serde_json::{json, Value as Json};

use super::check::Analysis;

/// The analysis as a JSON document: the result type, the type of every
/// point, and the Γ, Π, κ⁰ used. Keys and entries come out in a fixed
/// order.
pub fn report_json(a: &Analysis) -> Json {
    let types: Vec<Json> = a
        .types
        .iter()
        .map(|(p, t)| json!({ "point": p.0, "type": t.to_json() }))
        .collect();
    json!({
        "result": a.result.to_json(),
        "types": types,
        "gamma": a.ctx.gamma.to_json(),
        "pi": a.ctx.pi.to_json(),
        "kappa0": a.ctx.kappa0.to_json(),
    })
}
