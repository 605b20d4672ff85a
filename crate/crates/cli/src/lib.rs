//! Batch runner: one JSON config in, one JSON result and one CSV summary row
//! out.
//!
//! Exit status is 0 on success, 1 on a configuration or input error and 2
//! when a bracket comes out inconsistent (lower above upper) or a verification
//! pass fails.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use fblab::ast::{homfn_from_json, homfn_to_json, phmap_from_json, phmap_to_json};
use fblab::summing::{p_value, signed_sum_norm};
use fblab::verify::verify_suite;
use fblab::witnesses::{
    coordinate_functionals, divergence_witness, divergence_witness_at, gap_witness, kernel_witness, mu_induced,
    series_witness, sup_deltas, WitnessReport,
};
use fblab::{
    classify_finite_dim, extract_phi, fbl_bracket, linearity_report, phi_p_norm, tuple_value, Budget,
    DiscreteMeasure, Error, FuncTuple, Functional, HomFn, NormEstimate, Probe, Space, Vector, Witness,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "fblab", version, about = "Norms, witnesses and maps on free Banach lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output base path; `.json` / `.csv` are appended. Standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Writes `wall_ms` as 0 so that the CSV row is reproducible byte for byte.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Bracket the FBL^p norm of a function.
    Norm,
    /// Weak p-summing norm of a tuple of functionals.
    Weakp,
    /// ||Phi||_p of a positively homogeneous map.
    Phinorm,
    /// Build a witness function and bracket its norm.
    Witness,
    /// Recover the induced map from generator images.
    ExtractPhi,
    /// Continuity probe on the dual ball.
    Classify,
    /// The gap construction with a certified lower bound.
    Gap,
    /// The divergent sup-of-deltas witness.
    Diverge,
    /// Run the self-check battery, or re-validate a result file.
    Verify {
        /// Result JSON to re-validate instead of running the battery.
        #[arg(long)]
        check: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Command {
    pub fn task(&self) -> &'static str {
        match self {
            Command::Norm => "norm",
            Command::Weakp => "weakp",
            Command::Phinorm => "phinorm",
            Command::Witness => "witness",
            Command::ExtractPhi => "extract-phi",
            Command::Classify => "classify",
            Command::Gap => "gap",
            Command::Diverge => "diverge",
            Command::Verify { .. } => "verify",
        }
    }

    fn from_task(task: &str) -> Option<Command> {
        Some(match task {
            "norm" => Command::Norm,
            "weakp" => Command::Weakp,
            "phinorm" => Command::Phinorm,
            "witness" => Command::Witness,
            "extract-phi" => Command::ExtractPhi,
            "classify" => Command::Classify,
            "gap" => Command::Gap,
            "diverge" => Command::Diverge,
            _ => return None,
        })
    }
}

/// A run description as read from `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub space: Option<Space>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub task: Option<String>,
    #[serde(default)]
    pub payload: Value,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Failure classes, each with its exit status.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Consistency(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Consistency(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Consistency(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ConsistencyViolation { .. } => Failure::Consistency(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// Bounds reported in the CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub lower: f64,
    pub upper: f64,
    pub method: String,
    pub witness_size: usize,
}

impl Summary {
    fn of(e: &NormEstimate) -> Summary {
        Summary {
            lower: e.lower,
            upper: e.upper,
            method: e.method.as_str().to_string(),
            witness_size: e.witness_size(),
        }
    }
}

/// Output of one task: the full JSON result and its summary.
pub struct TaskOutput {
    pub result: Value,
    pub summary: Summary,
}

fn require_p(cfg: &Config) -> Result<f64, Failure> {
    cfg.p.ok_or_else(|| cfg_err("config is missing \"p\""))
}

fn require_space(cfg: &Config) -> Result<&Space, Failure> {
    cfg.space.as_ref().ok_or_else(|| cfg_err("config is missing \"space\""))
}

fn payload<'a>(cfg: &'a Config, key: &str) -> Result<&'a Value, Failure> {
    cfg.payload
        .get(key)
        .ok_or_else(|| cfg_err(format!("payload is missing \"{key}\"")))
}

fn parse<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(v.clone()).map_err(|e| cfg_err(format!("{what}: {e}")))
}

fn parse_fn(v: &Value, space: &Space, what: &str) -> Result<HomFn, Failure> {
    homfn_from_json(v, space).map_err(|e| cfg_err(format!("{what}: {e}")))
}

fn usize_field(cfg: &Config, key: &str) -> Result<usize, Failure> {
    payload(cfg, key)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| cfg_err(format!("payload \"{key}\" must be a nonnegative integer")))
}

fn vectors(v: &Value, what: &str) -> Result<Vec<Vector>, Failure> {
    parse::<Vec<Vec<f64>>>(v, what).map(|vs| vs.into_iter().map(Vector).collect())
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn check_l2(cfg: &Config, n: usize) -> Result<(), Failure> {
    match &cfg.space {
        Some(s) if *s != Space::l2(n) => Err(cfg_err(format!("this task runs on l_2^{n}; config space disagrees"))),
        _ => Ok(()),
    }
}

fn witness_output(space: &Space, f: HomFn, p: f64, cfg: &Config, extra: Value) -> Result<TaskOutput, Failure> {
    let est = fbl_bracket(space, &f, p, &cfg.budget, cfg.seed)?;
    let mut result = json!({ "f": homfn_to_json(&f), "estimate": to_json(&est) });
    if let (Value::Object(r), Value::Object(x)) = (&mut result, extra) {
        r.extend(x);
    }
    Ok(TaskOutput {
        result,
        summary: Summary::of(&est),
    })
}

fn report_output(r: &WitnessReport, lower: f64, witness_size: usize) -> TaskOutput {
    TaskOutput {
        result: to_json(r),
        summary: Summary {
            lower,
            upper: f64::INFINITY,
            method: "certificate".into(),
            witness_size,
        },
    }
}

/// Runs one task on a validated config.
pub fn run_task(command: &Command, cfg: &Config) -> Result<TaskOutput, Failure> {
    match command {
        Command::Norm => {
            let (space, p) = (require_space(cfg)?, require_p(cfg)?);
            let f = parse_fn(payload(cfg, "f")?, space, "payload.f")?;
            let est = fbl_bracket(space, &f, p, &cfg.budget, cfg.seed)?;
            Ok(TaskOutput {
                result: json!({ "estimate": to_json(&est) }),
                summary: Summary::of(&est),
            })
        }
        Command::Weakp => {
            let (space, p) = (require_space(cfg)?, require_p(cfg)?);
            let funcs: Vec<Functional> = parse::<Vec<Vec<f64>>>(payload(cfg, "tuple")?, "payload.tuple")?
                .into_iter()
                .map(Functional)
                .collect();
            let t = FuncTuple::new(funcs)?;
            let est = t.weak_p_norm(space, p, &cfg.budget, cfg.seed)?;
            Ok(TaskOutput {
                result: json!({ "estimate": to_json(&est) }),
                summary: Summary::of(&est),
            })
        }
        Command::Phinorm => {
            let (source, p) = (require_space(cfg)?, require_p(cfg)?);
            let target: Space = parse(payload(cfg, "target")?, "payload.target")?;
            let phi = phmap_from_json(payload(cfg, "map")?, source, &target)
                .map_err(|e| cfg_err(format!("payload.map: {e}")))?;
            let est = phi_p_norm(&phi, p, &cfg.budget, cfg.seed)?;
            Ok(TaskOutput {
                result: json!({ "map": phmap_to_json(&phi), "estimate": to_json(&est) }),
                summary: Summary::of(&est),
            })
        }
        Command::Witness => {
            let (space, p) = (require_space(cfg)?, require_p(cfg)?);
            let construction = payload(cfg, "construction")?
                .as_str()
                .ok_or_else(|| cfg_err("payload \"construction\" must be a string"))?;
            match construction {
                "sup_deltas" => {
                    let vs = vectors(payload(cfg, "vectors")?, "payload.vectors")?;
                    let scales: Vec<f64> = parse(payload(cfg, "scales")?, "payload.scales")?;
                    let f = sup_deltas(space, &vs, &scales)?;
                    witness_output(space, f, p, cfg, json!({}))
                }
                "series" => {
                    let basis = vectors(payload(cfg, "basis")?, "payload.basis")?;
                    let f = series_witness(space, &basis)?;
                    witness_output(space, f, p, cfg, json!({}))
                }
                "kernel" => {
                    let basis = vectors(payload(cfg, "basis")?, "payload.basis")?;
                    let obstacles = vectors(payload(cfg, "obstacles")?, "payload.obstacles")?;
                    let f = series_witness(space, &basis)?;
                    let b = coordinate_functionals(space, &basis)?;
                    if obstacles.len() + 1 > b.len() {
                        return Err(cfg_err(format!(
                            "{} obstacles need at least {} basis vectors",
                            obstacles.len(),
                            obstacles.len() + 1
                        )));
                    }
                    let x = kernel_witness(space, &obstacles, &b[..obstacles.len() + 1])?;
                    let residual = obstacles
                        .iter()
                        .map(|o| fblab::pairing(&x, o).abs())
                        .fold(0.0, f64::max);
                    let fx = f.eval(space, &x)?;
                    witness_output(
                        space,
                        f,
                        p,
                        cfg,
                        json!({ "x_star": x, "residual": residual, "f_at_x_star": fx }),
                    )
                }
                "mu" => {
                    let atoms: Vec<(f64, Vec<f64>)> = parse(payload(cfg, "atoms")?, "payload.atoms")?;
                    let p_mu = payload(cfg, "p_mu")?
                        .as_f64()
                        .ok_or_else(|| cfg_err("payload \"p_mu\" must be a number"))?;
                    let m = DiscreteMeasure::new(atoms.into_iter().map(|(w, x)| (w, Vector(x))).collect())?;
                    let mass = m.mass();
                    let f = mu_induced(space, m, p_mu)?;
                    witness_output(space, f, p, cfg, json!({ "mass": mass }))
                }
                other => Err(cfg_err(format!(
                    "unknown construction \"{other}\" (expected sup_deltas, series, kernel or mu)"
                ))),
            }
        }
        Command::ExtractPhi => {
            let (source, p) = (require_space(cfg)?, require_p(cfg)?);
            let target: Space = parse(payload(cfg, "target")?, "payload.target")?;
            let raw = payload(cfg, "action")?
                .as_object()
                .ok_or_else(|| cfg_err("payload.action must be an object keyed by basis index"))?;
            let mut action = BTreeMap::new();
            for (k, v) in raw {
                let i: usize = k
                    .parse()
                    .map_err(|_| cfg_err(format!("payload.action key \"{k}\" is not a basis index")))?;
                action.insert(i, parse_fn(v, source, &format!("payload.action.{k}"))?);
            }
            let phi = extract_phi(&target, source, &action)?;
            let est = phi_p_norm(&phi, p, &cfg.budget, cfg.seed)?;
            let lin = linearity_report(&phi, cfg.budget.samples, cfg.seed)?;
            Ok(TaskOutput {
                result: json!({
                    "map": phmap_to_json(&phi),
                    "estimate": to_json(&est),
                    "linearity": to_json(&lin),
                }),
                summary: Summary::of(&est),
            })
        }
        Command::Classify => {
            let space = require_space(cfg)?;
            let f = parse_fn(payload(cfg, "f")?, space, "payload.f")?;
            let mut probe: Probe = match cfg.payload.get("probe") {
                Some(v) => parse(v, "payload.probe")?,
                None => Probe::default(),
            };
            probe.seed = cfg.seed;
            let c = classify_finite_dim(&f, space, &probe)?;
            Ok(TaskOutput {
                result: json!({ "probe": to_json(&probe), "classification": to_json(&c) }),
                summary: Summary {
                    lower: c.sup_sampled,
                    upper: c.sup_sampled,
                    method: "heuristic_tight".into(),
                    witness_size: usize::from(c.jump_point.is_some()),
                },
            })
        }
        Command::Gap => {
            let p = require_p(cfg)?;
            let n = usize_field(cfg, "N")?;
            let m = usize_field(cfg, "m")?;
            let q = payload(cfg, "q")?
                .as_f64()
                .ok_or_else(|| cfg_err("payload \"q\" must be a number"))?;
            check_l2(cfg, n)?;
            let h = match cfg.payload.get("h") {
                Some(v) => Some(parse_fn(v, &Space::l2(n), "payload.h")?),
                None => None,
            };
            let r = gap_witness(n, p, q, m, h.as_ref())?;
            let bound = r.get("bound").unwrap_or(0.0);
            Ok(report_output(&r, bound, m))
        }
        Command::Diverge => {
            let p = require_p(cfg)?;
            let n = usize_field(cfg, "N")?;
            check_l2(cfg, n)?;
            let r = match cfg.payload.get("checkpoints") {
                Some(v) => divergence_witness_at(n, p, cfg.seed, &parse::<Vec<usize>>(v, "payload.checkpoints")?)?,
                None => divergence_witness(n, p, cfg.seed)?,
            };
            let lk = r.get("L(N)/K").unwrap_or(0.0);
            Ok(report_output(&r, lk, n))
        }
        Command::Verify { .. } => Err(cfg_err("verify takes no config task")),
    }
}

/// The config with the CLI overrides applied and the task checked.
pub fn effective_config(cli: &Cli) -> Result<Config, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| cfg_err(format!("{} needs --config <path>", cli.command.task())))?;
    let text = fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg: Config =
        serde_json::from_str(&text).map_err(|e| cfg_err(format!("invalid config {}: {e}", path.display())))?;
    let task = cli.command.task();
    match &cfg.task {
        Some(t) if t != task => {
            return Err(cfg_err(format!("config task \"{t}\" does not match subcommand \"{task}\"")));
        }
        _ => cfg.task = Some(task.to_string()),
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    Ok(cfg)
}

/// The provenance record written into every result, defaults included.
fn config_json(cfg: &Config) -> Value {
    json!({
        "space": cfg.space,
        "p": cfg.p,
        "task": cfg.task,
        "payload": cfg.payload,
        "budget": cfg.budget,
        "seed": cfg.seed,
    })
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// The JSON result document.
pub fn result_document(cfg: &Config, out: &TaskOutput) -> Value {
    json!({
        "task": cfg.task,
        "config": config_json(cfg),
        "summary": {
            "lower": out.summary.lower,
            "upper": finite_or_null(out.summary.upper),
            "method": out.summary.method,
            "witness_size": out.summary.witness_size,
        },
        "result": out.result,
    })
}

/// Header plus one row.
pub fn csv_row(cfg: &Config, s: &Summary, wall_ms: u128) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let p = cfg.p.map(|p| p.to_string()).unwrap_or_default();
    let upper = if s.upper.is_finite() { s.upper.to_string() } else { String::new() };
    w.write_record(["task", "p", "lower", "upper", "method", "witness_size", "seed", "wall_ms"])
        .and_then(|_| {
            w.write_record([
                cfg.task.clone().unwrap_or_default(),
                p,
                s.lower.to_string(),
                upper,
                s.method.clone(),
                s.witness_size.to_string(),
                cfg.seed.to_string(),
                wall_ms.to_string(),
            ])
        })
        .expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

fn base_path(p: &Path) -> PathBuf {
    match p.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("csv") => p.with_extension(""),
        _ => p.to_path_buf(),
    }
}

fn with_ext(base: &Path, ext: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn emit(
    cli: &Cli,
    cfg: &Config,
    json_doc: &str,
    csv: Option<&str>,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let io = |e: std::io::Error| cfg_err(format!("cannot write output: {e}"));
    let want_json = cli.format != Format::Csv;
    let want_csv = cli.format != Format::Json && csv.is_some();
    match &cfg.output {
        Some(p) => {
            let base = base_path(p);
            if want_json {
                fs::write(with_ext(&base, "json"), json_doc).map_err(io)?;
            }
            if want_csv {
                fs::write(with_ext(&base, "csv"), csv.unwrap_or_default()).map_err(io)?;
            }
        }
        None => {
            if want_json {
                stdout.write_all(json_doc.as_bytes()).map_err(io)?;
            }
            if want_csv {
                stdout.write_all(csv.unwrap_or_default().as_bytes()).map_err(io)?;
            }
        }
    }
    Ok(())
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn summary_number(doc: &Value, key: &str) -> f64 {
    doc["summary"][key].as_f64().unwrap_or(f64::INFINITY)
}

/// Re-validates a result document: the run is repeated from its recorded
/// config and must reproduce the summary bounds, and tuple, vector and
/// sign witnesses are checked independently against the bound they certify.
pub fn revalidate(doc: &Value) -> Result<String, Failure> {
    let cfg: Config = parse(&doc["config"], "result config")?;
    let task = cfg.task.clone().ok_or_else(|| cfg_err("result config has no task"))?;
    let command = Command::from_task(&task).ok_or_else(|| cfg_err(format!("unknown task \"{task}\"")))?;
    let lower = summary_number(doc, "lower");
    let upper = summary_number(doc, "upper");
    if lower > upper {
        return Err(Failure::Consistency(format!("recorded lower {lower} exceeds upper {upper}")));
    }
    let again = run_task(&command, &cfg)?;
    if !rel_close(again.summary.lower, lower) || !(rel_close(again.summary.upper, upper) || again.summary.upper == upper) {
        return Err(Failure::Consistency(format!(
            "rerun gives [{}, {}], recorded [{lower}, {upper}]",
            again.summary.lower, again.summary.upper
        )));
    }
    let mut checked = "rerun reproduces the bounds".to_string();
    let est: Option<NormEstimate> = doc["result"]
        .get("estimate")
        .map(|e| parse(e, "result estimate"))
        .transpose()?;
    let (Some(est), Some(space), Some(p)) = (est, cfg.space.as_ref(), cfg.p) else {
        return Ok(checked);
    };
    let tol = 1e-9 * lower.max(1.0);
    match (&command, &est.witness) {
        (Command::Norm, Some(Witness::Tuple(t))) => {
            let f = parse_fn(&cfg.payload["f"], space, "payload.f")?;
            let w = FuncTuple::new(t.clone())?.weak_p_norm(space, p, &cfg.budget, cfg.seed)?;
            let v = tuple_value(space, &f, t, p)?;
            if w.lower > 1.0 + 1e-9 || v < lower - tol {
                return Err(Failure::Consistency(format!(
                    "witness tuple has weak norm {} and value {v}, lower {lower}",
                    w.lower
                )));
            }
            checked.push_str("; witness tuple is feasible and attains the lower bound");
        }
        (Command::Weakp, Some(Witness::Vector(x))) => {
            let funcs: Vec<Functional> = parse::<Vec<Vec<f64>>>(&cfg.payload["tuple"], "payload.tuple")?
                .into_iter()
                .map(Functional)
                .collect();
            let (nx, v) = (space.norm(x)?, p_value(&funcs, x, p));
            if nx > 1.0 + 1e-9 || v < lower - tol {
                return Err(Failure::Consistency(format!("witness vector has norm {nx} and value {v}, lower {lower}")));
            }
            checked.push_str("; witness vector lies in the unit ball and attains the lower bound");
        }
        (Command::Weakp, Some(Witness::Signs(s))) => {
            let funcs: Vec<Functional> = parse::<Vec<Vec<f64>>>(&cfg.payload["tuple"], "payload.tuple")?
                .into_iter()
                .map(Functional)
                .collect();
            let v = signed_sum_norm(space, &funcs, s);
            if v < lower - tol {
                return Err(Failure::Consistency(format!("sign witness gives {v}, lower {lower}")));
            }
            checked.push_str("; sign witness attains the lower bound");
        }
        _ => {}
    }
    Ok(checked)
}

/// Entry point shared by the binary and the tests; returns the exit status.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run_inner(cli, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message());
            f.code()
        }
    }
}

fn run_inner(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let io = |e: std::io::Error| cfg_err(format!("cannot write output: {e}"));
    if let Command::Verify { check } = &cli.command {
        if let Some(path) = check {
            let text = fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
            let doc: Value =
                serde_json::from_str(&text).map_err(|e| cfg_err(format!("invalid result {}: {e}", path.display())))?;
            let msg = revalidate(&doc)?;
            writeln!(stdout, "PASS revalidate {}: {msg}", path.display()).map_err(io)?;
            return Ok(0);
        }
        let report = verify_suite(cli.seed.unwrap_or(0));
        write!(stdout, "{report}").map_err(io)?;
        if let Some(out) = &cli.out {
            let doc = serde_json::to_string_pretty(&report).expect("report serializes");
            fs::write(with_ext(&base_path(out), "json"), doc + "\n").map_err(io)?;
        }
        return Ok(if report.passed() { 0 } else { 2 });
    }
    let cfg = effective_config(cli)?;
    let start = Instant::now();
    let out = run_task(&cli.command, &cfg)?;
    let wall_ms = if cli.no_timing { 0 } else { start.elapsed().as_millis() };
    let doc = serde_json::to_string_pretty(&result_document(&cfg, &out)).expect("result serializes") + "\n";
    let row = csv_row(&cfg, &out.summary, wall_ms);
    emit(cli, &cfg, &doc, Some(&row), stdout)?;
    if out.summary.lower > out.summary.upper {
        return Err(Failure::Consistency(format!(
            "lower {} exceeds upper {}",
            out.summary.lower, out.summary.upper
        )));
    }
    Ok(0)
}
