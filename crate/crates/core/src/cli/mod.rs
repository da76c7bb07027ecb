//! The `flowalias` command line.
//!
//! Exit codes: 0 success, 1 rejection or failed verdict, 2 usage or parse
//! error, 3 inconclusive run.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use crate::agreement::{check_soundness_with, fuzz_size, gen_program, CheckOptions, Verdict};
use crate::security::{check_noninterference, SecurityLabeling};
use crate::semantics::{DepPair, DepState, EvalError, Evaluator, Outcome, TraceObserver};
use crate::syntax::{parse, pretty, Occurrence};
use crate::typesys::{analyze, report_json, Analysis};

/// Stack given to the worker thread that runs a command.
const STACK_BYTES: usize = 512 << 20;
/// Evaluation depth allowed on that stack.
const CLI_MAX_DEPTH: usize = 20_000;

#[derive(Debug, Parser)]
#[command(name = "flowalias", version, about = "Data-flow and alias analysis by typing")]
pub struct RunConfig {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Evaluation step budget.
    #[arg(long, global = true, default_value_t = crate::semantics::DEFAULT_STEP_BUDGET)]
    pub steps: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Program file.
    #[arg(conflicts_with = "expr", required_unless_present = "expr")]
    pub path: Option<PathBuf>,
    /// Inline program source.
    #[arg(long)]
    pub expr: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the labeled program.
    Parse(Input),
    /// Evaluate and print the value and dependency information.
    Eval {
        #[command(flatten)]
        input: Input,
        /// Print one line per concluded rule.
        #[arg(long)]
        trace: bool,
    },
    /// Print the type of every point with Γ, Π and κ⁰.
    Typecheck(Input),
    /// Check a run against the analysis.
    Check(Input),
    /// Generate programs and check each one.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: u64,
        /// Largest program size; sizes cycle through 1..=size.
        #[arg(long, default_value_t = 30)]
        size: usize,
    },
    /// Check non-interference under a high/low labeling.
    Nifc {
        #[command(flatten)]
        input: Input,
        /// File of `name = high|low` lines.
        #[arg(long)]
        labels: PathBuf,
    },
}

/// What a command printed and how it ended.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            code: 0,
            stdout,
            stderr: String::new(),
        }
    }

    fn with_code(mut self, code: i32) -> Self {
        self.code = code;
        self
    }

    fn error(code: i32, msg: impl std::fmt::Display) -> Self {
        Output {
            code,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

/// Parses `args` (including the program name) and runs the command on a
/// thread with a large stack.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Output::ok(text)
            };
        }
    };
    std::thread::Builder::new()
        .stack_size(STACK_BYTES)
        .spawn(move || execute(&config))
        .expect("spawn worker thread")
        .join()
        .unwrap_or_else(|_| Output::error(1, "internal error"))
}

pub fn execute(config: &RunConfig) -> Output {
    match &config.command {
        Command::Parse(input) => with_program(input, |o| parse_cmd(config, o)),
        Command::Eval { input, trace } => with_program(input, |o| eval_cmd(config, o, *trace)),
        Command::Typecheck(input) => with_program(input, |o| typecheck_cmd(config, o)),
        Command::Check(input) => with_program(input, |o| check_cmd(config, o)),
        Command::Fuzz { seed, count, size } => fuzz_cmd(config, *seed, *count, *size),
        Command::Nifc { input, labels } => {
            let labels = match std::fs::read_to_string(labels) {
                Ok(text) => match text.parse::<SecurityLabeling>() {
                    Ok(l) => l,
                    Err(e) => return Output::error(2, format!("{}: {e}", labels.display())),
                },
                Err(e) => return Output::error(2, format!("{}: {e}", labels.display())),
            };
            with_program(input, |o| nifc_cmd(config, o, &labels))
        }
    }
}

fn with_program(input: &Input, f: impl FnOnce(&Occurrence) -> Output) -> Output {
    let src = match (&input.expr, &input.path) {
        (Some(e), _) => e.clone(),
        (None, Some(p)) => match std::fs::read_to_string(p) {
            Ok(s) => s,
            Err(e) => return Output::error(2, format!("{}: {e}", p.display())),
        },
        (None, None) => return Output::error(2, "no input given"),
    };
    match parse(&src) {
        Ok(o) => f(&o),
        Err(e) => Output::error(2, e),
    }
}

fn render(config: &RunConfig, j: Json, human: String) -> String {
    if config.json {
        let mut s = serde_json::to_string_pretty(&j).expect("json");
        s.push('\n');
        s
    } else {
        human
    }
}

fn parse_cmd(config: &RunConfig, o: &Occurrence) -> Output {
    let points: Vec<u32> = o.points().into_iter().map(|p| p.0).collect();
    let j = json!({ "program": pretty(o), "points": points });
    Output::ok(render(config, j, format!("{}\n", pretty(o))))
}

fn pair_json(d: &DepPair) -> Json {
    let locs: Vec<String> = d.locs.iter().map(|l| l.to_string()).collect();
    let vars: Vec<String> = d.vars.iter().map(|v| v.to_string()).collect();
    json!({ "locs": locs, "vars": vars })
}

fn dep_json(dep: &DepState) -> (Json, Json) {
    let w: Vec<Json> = dep
        .w
        .iter()
        .map(|(a, d)| json!({ "atom": a.to_string(), "pair": pair_json(d) }))
        .collect();
    let order: Vec<Json> = dep.order.iter().map(|(a, b)| json!([a.0, b.0])).collect();
    (Json::Array(w), Json::Array(order))
}

fn eval_error(e: &EvalError) -> Output {
    Output::error(if e.is_resource_limit() { 3 } else { 1 }, e)
}

fn eval_cmd(config: &RunConfig, o: &Occurrence, trace: bool) -> Output {
    let mut obs = TraceObserver::new();
    let mut ev = Evaluator::new().budget(config.steps).max_depth(CLI_MAX_DEPTH);
    if trace {
        ev = ev.observer(&mut obs);
    }
    let out: Outcome = match crate::semantics::run_with(o, ev) {
        Ok(out) => out,
        Err(e) => return eval_error(&e),
    };
    let (w, order) = dep_json(&out.dep);
    let mut j = json!({
        "value": out.value.to_string(),
        "footprint": pair_json(&out.footprint),
        "w": w,
        "order": order,
        "steps": out.steps,
    });
    let mut h = String::new();
    writeln!(h, "value: {}", out.value).unwrap();
    writeln!(h, "footprint: {}", out.footprint).unwrap();
    writeln!(h, "w:").unwrap();
    for (a, d) in &out.dep.w {
        writeln!(h, "  {a} ↦ {d}").unwrap();
    }
    let order: Vec<String> = out.dep.order.iter().map(|(a, b)| format!("({a},{b})")).collect();
    writeln!(h, "order: {}", order.join(" ")).unwrap();
    if trace {
        j["trace"] = json!(obs.lines);
        writeln!(h, "trace:").unwrap();
        for line in &obs.lines {
            writeln!(h, "  {line}").unwrap();
        }
    }
    Output::ok(render(config, j, h))
}

fn typecheck_human(a: &Analysis) -> String {
    let mut h = String::new();
    writeln!(h, "result: {}", a.result).unwrap();
    writeln!(h, "types:").unwrap();
    for (p, t) in &a.types {
        writeln!(h, "  {p}: {t}").unwrap();
    }
    writeln!(h, "gamma:").unwrap();
    for (x, t) in a.ctx.gamma.iter() {
        writeln!(h, "  {x}: {t}").unwrap();
    }
    let pi: Vec<String> = a.ctx.pi.edges().iter().map(|(x, y)| format!("({x},{y})")).collect();
    writeln!(h, "pi: {}", pi.join(" ")).unwrap();
    writeln!(h, "kappa0: {}", a.ctx.kappa0).unwrap();
    h
}

fn typecheck_cmd(config: &RunConfig, o: &Occurrence) -> Output {
    match analyze(o) {
        Ok(a) => Output::ok(render(config, report_json(&a), typecheck_human(&a))),
        Err(e) => Output::error(1, e),
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Holds => 0,
        Verdict::Fails | Verdict::Rejected => 1,
        Verdict::Inconclusive => 3,
    }
}

fn check_options(config: &RunConfig) -> CheckOptions {
    CheckOptions {
        budget: config.steps,
        max_depth: CLI_MAX_DEPTH,
        mutation: None,
    }
}

fn check_cmd(config: &RunConfig, o: &Occurrence) -> Output {
    let r = check_soundness_with(o, &check_options(config));
    Output::ok(render(config, r.to_json(), r.to_string())).with_code(verdict_code(r.verdict()))
}

fn fuzz_cmd(config: &RunConfig, seed: u64, count: u64, size: usize) -> Output {
    let opts = check_options(config);
    let (mut holds, mut fails, mut inconclusive) = (0u64, 0u64, 0u64);
    let mut out = String::new();
    for s in seed..seed.saturating_add(count) {
        let n = fuzz_size(s, size);
        let o = gen_program(s, n);
        let r = check_soundness_with(&o, &opts);
        match r.verdict() {
            Verdict::Holds => holds += 1,
            Verdict::Inconclusive => inconclusive += 1,
            Verdict::Fails | Verdict::Rejected => fails += 1,
        }
        if config.json {
            let mut rec = r.to_json();
            rec["seed"] = json!(s);
            rec["size"] = json!(n);
            out.push_str(&serde_json::to_string(&rec).expect("json"));
            out.push('\n');
        } else if r.verdict() != Verdict::Holds {
            writeln!(out, "seed {s} size {n}: {}\n{}", r.verdict(), pretty(&o)).unwrap();
            out.push_str(&r.to_string());
        }
    }
    let summary = json!({
        "summary": { "count": count, "holds": holds, "fails": fails, "inconclusive": inconclusive }
    });
    if config.json {
        out.push_str(&serde_json::to_string(&summary).expect("json"));
        out.push('\n');
    } else {
        writeln!(out, "{count} programs: {holds} hold, {fails} fail, {inconclusive} inconclusive")
            .unwrap();
    }
    let code = if fails > 0 {
        1
    } else if inconclusive > 0 {
        3
    } else {
        0
    };
    Output::ok(out).with_code(code)
}

fn nifc_cmd(config: &RunConfig, o: &Occurrence, labels: &SecurityLabeling) -> Output {
    match check_noninterference(o, labels) {
        Ok(v) => {
            let code = if v.passes() { 0 } else { 1 };
            Output::ok(render(config, v.to_json(), v.to_string())).with_code(code)
        }
        Err(e) => Output::error(1, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Output {
        run(std::iter::once("flowalias").chain(args.iter().copied()))
    }

    #[test]
    fn eval_example_one() {
        let out = cli(&["eval", "--expr", crate::EXAMPLE_ONE]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.starts_with("value: 5\n"));
        assert!(out.stdout.contains("y@9 ↦ ({}, {x@5})"));
    }

    #[test]
    fn check_example_one() {
        let out = cli(&["check", "--expr", crate::EXAMPLE_ONE]);
        assert_eq!(out.code, 0, "{}", out.stdout);
    }

    #[test]
    fn usage_and_parse_errors() {
        assert_eq!(cli(&["eval"]).code, 2);
        assert_eq!(cli(&["eval", "--expr", "(let"]).code, 2);
        assert_eq!(cli(&["parse", "--seed", "3", "--expr", "1"]).code, 2);
        assert_eq!(cli(&["--help"]).code, 0);
    }

    #[test]
    fn rejection_and_timeout_codes() {
        assert_eq!(cli(&["typecheck", "--expr", "(let x (λy.y) (x (x 1)))"]).code, 1);
        assert_eq!(cli(&["--steps", "2", "eval", "--expr", crate::EXAMPLE_ONE]).code, 3);
    }

    #[test]
    fn fuzz_json_is_one_record_per_seed() {
        let out = cli(&["--json", "fuzz", "--seed", "5", "--count", "3", "--size", "10"]);
        assert_eq!(out.code, 0);
        let lines: Vec<&str> = out.stdout.lines().collect();
        assert_eq!(lines.len(), 4);
        let first: Json = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first["seed"], 5);
    }
}
