use super::eval::{Exit, Observer};

/// Records one line per concluded rule, in the order rules finish.
#[derive(Debug, Default, Clone)]
pub struct TraceObserver {
    pub lines: Vec<String>,
}

impl TraceObserver {
    pub fn new() -> Self {
        TraceObserver::default()
    }
}

impl Observer for TraceObserver {
    fn exit(&mut self, step: &Exit<'_>) {
        let locs: Vec<String> = step.footprint.locs.iter().map(|l| l.to_string()).collect();
        let vars: Vec<String> = step.footprint.vars.iter().map(|v| v.to_string()).collect();
        self.lines.push(format!(
            "{} @{} L={{{}}} V={{{}}}",
            step.rule,
            step.occurrence.point,
            locs.join(","),
            vars.join(",")
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{run_with, Evaluator};
    use crate::syntax::parse;

    #[test]
    fn trace_lines() {
        let mut t = TraceObserver::new();
        run_with(&parse(crate::EXAMPLE_ONE).unwrap(), Evaluator::new().observer(&mut t)).unwrap();
        assert_eq!(t.lines.first().unwrap(), "CONST @1 L={} V={}");
        assert_eq!(t.lines.last().unwrap(), "LET @12 L={l0@8} V={x@6,z@7}");
        assert!(t.lines.contains(&"REF-WRITE @8 L={} V={x@5}".to_string()));
    }
}
