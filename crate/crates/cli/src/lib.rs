//! Job configuration, input parsing and rendering for the `formred` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Read;

use formred_core::bounds::thresholds;
use formred_core::covariant::{form_covariant, residuals, solve_covariant};
use formred_core::reduction::{classic_reduce_with, cluster_reduce_with, ReduceOptions};
use formred_core::sweep::{evaluate_instance, run_sweep};
use formred_core::{BinaryForm, Error, FormSpec, SolverOptions};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Covariant,
    Reduce,
    Classify,
    Bounds,
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputMode {
    Json,
    Plain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    /// File path, `-` for stdin, or inline JSON.
    pub input: Option<String>,
    /// Defaults to the largest value below every threshold for the degree.
    pub eps: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub max_steps: usize,
    pub seed: u64,
    pub count: usize,
    pub classic: bool,
    pub output: OutputMode,
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        JobConfig {
            command,
            input: None,
            eps: None,
            tol: 1e-11,
            max_iter: 200,
            max_steps: 64,
            seed: 42,
            count: 1000,
            classic: false,
            output: OutputMode::Plain,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.tol > 0.0) {
            return Err(Error::MalformedInput(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(e) = self.eps {
            if !(e > 0.0) {
                return Err(Error::MalformedInput(format!("eps must be positive, got {e}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::MalformedInput("max-iter must be positive".into()));
        }
        Ok(())
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions { tol: self.tol, max_newton: self.max_iter, ..SolverOptions::default() }
    }
}

/// Exit status and the text for each stream.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonConvergentRoots { .. }
        | Error::NoConvergence { .. }
        | Error::StepLimit(_)
        | Error::CovariantDrift { .. }
        | Error::BadCovariant { .. } => EXIT_SOLVER,
        Error::GrowthAssertionFailed { .. } | Error::BoundViolated { .. } => EXIT_VIOLATION,
        _ => EXIT_INPUT,
    }
}

/// Parse a form from its JSON encoding.
pub fn parse_form(json_text: &str) -> Result<BinaryForm, Error> {
    parse_form_with(json_text, formred_core::roots::MAX_ITER)
}

pub fn parse_form_with(json_text: &str, max_iter: usize) -> Result<BinaryForm, Error> {
    let spec: FormSpec = serde_json::from_str(json_text).map_err(|e| Error::MalformedInput(e.to_string()))?;
    match (&spec.coeffs, &spec.roots, spec.leading) {
        (Some(c), None, None) => BinaryForm::from_coeffs_with(c, max_iter),
        _ => BinaryForm::try_from(spec),
    }
}

/// `x` with 15 significant digits, switching to exponent form outside `[1e-5, 1e15)`.
pub fn g15(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = format!("{x:.14e}");
    let (mant, exp) = e.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return e;
    }
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp >= 0 {
        let point = exp as usize + 1;
        let (int, frac) = digits.split_at(point);
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn read_input(cfg: &JobConfig) -> Result<String, Error> {
    let src = cfg.input.as_deref().unwrap_or("-");
    if src == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::MalformedInput(format!("stdin: {e}")))?;
        Ok(s)
    } else if src.trim_start().starts_with('{') {
        Ok(src.to_string())
    } else {
        std::fs::read_to_string(src).map_err(|e| Error::MalformedInput(format!("{src}: {e}")))
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

struct Rendered {
    json: Value,
    plain: Vec<String>,
    code: i32,
}

fn line(key: &str, vals: &[f64]) -> String {
    let mut s = key.to_string();
    for v in vals {
        s.push(' ');
        s.push_str(&g15(*v));
    }
    s
}

fn covariant_job(cfg: &JobConfig, form: &BinaryForm) -> Result<Rendered, Error> {
    let (z, scaled, steps, bisection) = if form.infinite_roots() == 0 {
        let sol = solve_covariant(form.roots(), &cfg.solver())?;
        (sol.point, Some(sol.residual), Some(sol.newton_steps), Some(sol.used_bisection))
    } else {
        (form_covariant(form, &cfg.solver())?, None, None, None)
    };
    // a root at infinity adds nothing to either sum but counts towards n/2
    let (mass, bal) = residuals(form.roots(), z.t, z.u)?;
    let mass = mass - form.infinite_roots() as f64 / 2.0;
    let json = json!({
        "t": z.t,
        "u": z.u,
        "residual_mass": mass,
        "residual_balance": [bal.re, bal.im],
        "scaled_residual": scaled,
        "newton_steps": steps,
        "used_bisection": bisection,
    });
    let mut plain = vec![
        line("t", &[z.t]),
        line("u", &[z.u]),
        line("residual_mass", &[mass]),
        line("residual_balance", &[bal.re, bal.im]),
    ];
    if let Some(r) = scaled {
        plain.push(line("scaled_residual", &[r]));
    }
    Ok(Rendered { json, plain, code: EXIT_OK })
}

fn eps_for(cfg: &JobConfig, n: usize) -> f64 {
    cfg.eps.unwrap_or_else(|| thresholds(n).default_eps())
}

fn reduce_job(cfg: &JobConfig, form: &BinaryForm) -> Result<Rendered, Error> {
    let opts = ReduceOptions { max_steps: cfg.max_steps, solver: cfg.solver() };
    let eps = eps_for(cfg, form.degree());
    let (out, trace) = if cfg.classic { classic_reduce_with(form, &opts)? } else { cluster_reduce_with(form, eps, &opts)? };
    let coeffs = out.coeffs()?;
    let json = json!({
        "method": if cfg.classic { "classic" } else { "cluster" },
        "eps": eps,
        "form": to_json(&out),
        "coeffs": coeffs,
        "matrix": to_json(&trace.total),
        "trace": to_json(&trace),
    });
    let [a, b, c, d] = trace.total.entries();
    let mut plain = vec![
        format!("matrix {a} {b} {c} {d}"),
        line("t", &[trace.final_z.t]),
        line("u", &[trace.final_z.u]),
        line("coeffs", &coeffs),
        format!("steps {}", trace.steps.len()),
    ];
    for s in &trace.steps {
        let kind = match s.kind {
            formred_core::reduction::StepKind::Translate { m } => format!("translate {m}"),
            formred_core::reduction::StepKind::Invert => "invert".to_string(),
            formred_core::reduction::StepKind::ClusterTranslate { m, case } => format!("cluster {m} {}", case.label()),
        };
        plain.push(format!("step {kind} {} {} {}", g15(s.z_after.t), g15(s.z_after.u), g15(s.u_growth)));
    }
    for w in &trace.warnings {
        plain.push(format!("warning {w}"));
    }
    Ok(Rendered { json, plain, code: EXIT_OK })
}

fn classify_job(cfg: &JobConfig, form: &BinaryForm) -> Result<Rendered, Error> {
    let z = form_covariant(form, &cfg.solver())?;
    let eps = eps_for(cfg, form.degree());
    let class = formred_core::classify(form, &z, eps);
    let q = &class.quantities;
    let mut plain = vec![
        format!("case {}", class.tag.label()),
        line("t", &[z.t]),
        line("u", &[z.u]),
        line("eps", &[eps]),
    ];
    if let Some(k) = q.k {
        plain.push(format!("k {k}"));
    }
    for (name, v) in [
        ("r1", q.r1),
        ("r2", q.r2),
        ("center_distance", q.center_distance),
        ("ratio", q.ratio),
        ("product", q.product),
    ] {
        if let Some(v) = v {
            plain.push(line(name, &[v]));
        }
    }
    plain.push(format!("fires {}", class.fires()));
    for w in &class.warnings {
        plain.push(format!("warning {w}"));
    }
    let json = json!({ "case": class.tag.label(), "z": to_json(&z), "classification": to_json(&class) });
    Ok(Rendered { json, plain, code: EXIT_OK })
}

fn bounds_job(cfg: &JobConfig, form: &BinaryForm) -> Result<Rendered, Error> {
    if form.infinite_roots() > 0 {
        return Err(Error::MalformedInput("bounds need every root finite".into()));
    }
    let eps = eps_for(cfg, form.degree());
    let rep = evaluate_instance(form.roots(), eps, &cfg.solver())?;
    let failed = rep.reports.iter().filter(|r| !r.holds).count();
    let mut plain = vec![line("t", &[rep.z.t]), line("u", &[rep.z.u]), format!("case {}", rep.tag.label())];
    for r in &rep.reports {
        let rel = if r.strict { "<" } else { "<=" };
        let verdict = if r.holds { "holds" } else { "FAILS" };
        plain.push(format!("{} {verdict} {} {rel} {}", r.name, g15(r.lhs), g15(r.rhs)));
    }
    plain.push(format!("failed {failed} of {}", rep.reports.len()));
    let json = json!({ "report": to_json(&rep), "failed": failed });
    Ok(Rendered { json, plain, code: EXIT_OK })
}

fn selftest_job(cfg: &JobConfig) -> Rendered {
    let s = run_sweep(cfg.seed, cfg.count, &cfg.solver());
    let total = s.total_violations();
    let mut plain = vec![
        format!("seed {}", s.seed),
        format!("instances {}", s.count),
        format!("evaluated {}", s.evaluated),
        format!("violations {total}"),
    ];
    for (name, n) in &s.checked {
        let v = s.violations.get(name).copied().unwrap_or(0);
        plain.push(format!("bound {name} checked {n} violated {v}"));
    }
    for (tag, n) in &s.tags {
        plain.push(format!("case {tag} {n}"));
    }
    for (why, n) in &s.skipped {
        plain.push(format!("skipped {why} {n}"));
    }
    let code = if total > 0 { EXIT_VIOLATION } else { EXIT_OK };
    Rendered { json: to_json(&s), plain, code }
}

fn execute(cfg: &JobConfig) -> Result<Rendered, Error> {
    cfg.validate()?;
    if cfg.command == Command::Selftest {
        return Ok(selftest_job(cfg));
    }
    let text = read_input(cfg)?;
    let form = parse_form_with(&text, cfg.max_iter)?;
    match cfg.command {
        Command::Covariant => covariant_job(cfg, &form),
        Command::Reduce => reduce_job(cfg, &form),
        Command::Classify => classify_job(cfg, &form),
        Command::Bounds => bounds_job(cfg, &form),
        Command::Selftest => unreachable!(),
    }
}

/// Run one job.
pub fn run(cfg: &JobConfig) -> Outcome {
    match execute(cfg) {
        Ok(r) => {
            let stdout = match cfg.output {
                OutputMode::Json => format!("{}\n", serde_json::to_string_pretty(&r.json).expect("json")),
                OutputMode::Plain => r.plain.iter().map(|l| format!("{l}\n")).collect(),
            };
            Outcome { code: r.code, stdout, stderr: String::new() }
        }
        Err(e) => {
            let code = exit_code(&e);
            let stdout = match cfg.output {
                OutputMode::Json => format!("{}\n", json!({ "error": e.to_string(), "exit": code })),
                OutputMode::Plain => String::new(),
            };
            Outcome { code, stdout, stderr: format!("error: {e}\n") }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g15_formats() {
        assert_eq!(g15(1.0), "1.00000000000000");
        assert_eq!(g15(-0.5), "-0.500000000000000");
        assert_eq!(g15(123.25), "123.250000000000");
        assert_eq!(g15(1e-7), "1.00000000000000e-7");
        assert_eq!(g15(0.000125), "0.000125000000000000");
        assert_eq!(g15(0.0), "0");
        assert_eq!(g15(2.0f64.sqrt()), "1.41421356237310");
        assert_eq!(g15(2.5e15), "2.50000000000000e15");
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_form(r#"{"coeffs":[1,0,1]}"#), Err(Error::DegreeTooLow(2)));
        let f = parse_form(r#"{"roots":[[0,1],[0,-1],[1,0]],"leading":1}"#).unwrap();
        assert_eq!(f.degree(), 3);
        let f = parse_form(r#"{"roots":[[0,1],[1e-12,-1],[1,0],[2,0]],"leading":1}"#).unwrap();
        assert_eq!(f.roots()[0], f.roots()[1].conj());
        assert!(matches!(parse_form(r#"{"roots":[[0,1],[0,-0.9],[1,0]],"leading":1}"#), Err(Error::ConjugacyViolation(_))));
        assert!(matches!(parse_form("[1,2"), Err(Error::MalformedInput(_))));
        assert!(matches!(parse_form(r#"{"coefs":[1,2,3,4]}"#), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn covariant_of_fourth_roots() {
        let mut cfg = JobConfig::new(Command::Covariant);
        cfg.input = Some(r#"{"coeffs":[1,0,0,0,-1]}"#.into());
        cfg.output = OutputMode::Json;
        let out = run(&cfg);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert!(v["t"].as_f64().unwrap().abs() < 1e-12);
        assert!((v["u"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn covariant_with_root_at_infinity() {
        // Z (X - Z)(X - 2Z)(X - 3Z)
        let mut cfg = JobConfig::new(Command::Covariant);
        cfg.input = Some(r#"{"roots":[[1,0],[2,0],[3,0]],"leading":1,"infinite":1}"#.into());
        cfg.output = OutputMode::Json;
        let out = run(&cfg);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert!(v["residual_mass"].as_f64().unwrap().abs() < 1e-10);
        assert!(v["residual_balance"][0].as_f64().unwrap().abs() < 1e-10);
    }

    #[test]
    fn bad_tolerance_is_input_error() {
        let mut cfg = JobConfig::new(Command::Covariant);
        cfg.tol = 0.0;
        cfg.input = Some(r#"{"coeffs":[1,0,0,0,-1]}"#.into());
        assert_eq!(run(&cfg).code, EXIT_INPUT);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::StepLimit(3)), EXIT_SOLVER);
        assert_eq!(exit_code(&Error::NoConvergence { residual: 1.0 }), EXIT_SOLVER);
        assert_eq!(exit_code(&Error::MalformedInput("x".into())), EXIT_INPUT);
        assert_eq!(
            exit_code(&Error::GrowthAssertionFailed { case: "3a".into(), factor: 1.0, required: 2.0 }),
            EXIT_VIOLATION
        );
    }
}
