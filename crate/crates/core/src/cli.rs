//! JSON-configured runs behind the `fracwell` binary.
//!
//! One config document serves every command:
//!
//! ```json
//! { "command": "sweep",
//!   "problem": { "alpha": 0.5, "a": 0, "T": 1, "init": [1],
//!                "rhs": { "name": "linear", "params": { "lambda": 1 },
//!                         "lipschitz_L": 1, "bound_M": "unbounded" } },
//!   "solver": { "n_steps": 1024 },
//!   "sweep": { "mode": "start_shift", "deltas": [0.125, 0.0625, 0.03125, 0.015625] } }
//! ```
//!
//! Terminal value problems put `y_star` in `problem`; `ml` reads `{"alpha", "z": [..]}`.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::ivp::{residual_check, solve_ivp, SolverConfig};
use crate::problem::{initial_value_count, FractionalIvp, FractionalTvp, RhsKind, RhsSpec};
use crate::special::ml;
use crate::sweep::{run_sweep_with_threads, sup_diff, SweepBase, SweepMode, SweepPlan, SweepSummary};
use crate::tvp::{solve_tvp_fredholm, solve_tvp_shooting, TvpMethod, TvpSolution};

/// Environment variable capping sweep worker threads (`0` = automatic).
pub const THREADS_ENV: &str = "FRACWELL_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "ml")]
    Ml,
    #[serde(rename = "solve-ivp")]
    SolveIvp,
    #[serde(rename = "solve-tvp")]
    SolveTvp,
    #[serde(rename = "sweep")]
    Sweep,
}

impl Command {
    pub const ALL: [Command; 4] = [Command::Ml, Command::SolveIvp, Command::SolveTvp, Command::Sweep];

    pub fn name(self) -> &'static str {
        match self {
            Command::Ml => "ml",
            Command::SolveIvp => "solve-ivp",
            Command::SolveTvp => "solve-tvp",
            Command::Sweep => "sweep",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            "both" => Some(Format::Both),
            _ => None,
        }
    }

    fn csv(self) -> bool {
        self != Format::Json
    }

    fn json(self) -> bool {
        self != Format::Csv
    }
}

/// `--method` for `solve-tvp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Fredholm,
    Shooting,
    Both,
}

impl MethodChoice {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "fredholm" => Some(MethodChoice::Fredholm),
            "shooting" => Some(MethodChoice::Shooting),
            "both" => Some(MethodChoice::Both),
            _ => None,
        }
    }
}

/// Problem section of a config, after validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemDoc {
    pub alpha: f64,
    pub a: f64,
    pub terminal: f64,
    pub init: Option<Vec<f64>>,
    pub rhs: RhsSpec,
    pub y_star: Option<f64>,
}

impl ProblemDoc {
    pub fn ivp(&self) -> Result<FractionalIvp> {
        let init = self
            .init
            .clone()
            .ok_or_else(|| Error::InvalidProblem("initial value problem needs init".into()))?;
        FractionalIvp::new(self.alpha, self.a, self.terminal, init, self.rhs.clone())
    }

    pub fn tvp(&self) -> Result<FractionalTvp> {
        let y_star = self
            .y_star
            .ok_or_else(|| Error::InvalidProblem("terminal value problem needs y_star".into()))?;
        FractionalTvp::new(self.alpha, self.a, self.terminal, y_star, self.rhs.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepDoc {
    pub mode: SweepMode,
    pub deltas: Vec<f64>,
    pub method: TvpMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlDoc {
    pub alpha: f64,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub problem: Option<ProblemDoc>,
    pub solver: SolverConfig,
    pub sweep: Option<SweepDoc>,
    pub ml: Option<MlDoc>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    /// Reserved; nothing in the crate is random.
    pub seed: u64,
}

/// Collects every violation with its field path.
#[derive(Default)]
struct Checker {
    errors: Vec<String>,
}

impl Checker {
    fn fail(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        let o = v.as_object();
        if o.is_none() {
            self.fail(path, "expected an object");
        }
        o
    }

    fn known_keys(&mut self, m: &Map<String, Value>, allowed: &[&str], path: &str) {
        for k in m.keys() {
            if !allowed.contains(&k.as_str()) {
                let at = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                self.fail(&at, format!("unknown field `{k}` (allowed: {})", allowed.join(", ")));
            }
        }
    }

    fn number(&mut self, m: &Map<String, Value>, key: &str, path: &str, required: bool) -> Option<f64> {
        let at = format!("{path}.{key}");
        match m.get(key) {
            None if required => {
                self.fail(&at, "missing required field");
                None
            }
            None => None,
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => Some(x),
                _ => {
                    self.fail(&at, format!("expected a number, got {v}"));
                    None
                }
            },
        }
    }

    fn count(&mut self, m: &Map<String, Value>, key: &str, path: &str) -> Option<u64> {
        let v = m.get(key)?;
        let got = v.as_u64();
        if got.is_none() {
            self.fail(&format!("{path}.{key}"), format!("expected a non-negative integer, got {v}"));
        }
        got
    }

    fn numbers(&mut self, m: &Map<String, Value>, key: &str, path: &str, required: bool) -> Option<Vec<f64>> {
        let at = format!("{path}.{key}");
        let Some(v) = m.get(key) else {
            if required {
                self.fail(&at, "missing required field");
            }
            return None;
        };
        let Some(items) = v.as_array() else {
            self.fail(&at, format!("expected an array of numbers, got {v}"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            match item.as_f64() {
                Some(x) if x.is_finite() => out.push(x),
                _ => {
                    self.fail(&format!("{at}[{i}]"), format!("expected a number, got {item}"));
                    ok = false;
                }
            }
        }
        ok.then_some(out)
    }

    fn string<'v>(&mut self, m: &'v Map<String, Value>, key: &str, path: &str, required: bool) -> Option<&'v str> {
        let at = if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
        match m.get(key) {
            None => {
                if required {
                    self.fail(&at, "missing required field");
                }
                None
            }
            Some(Value::String(s)) => Some(s),
            Some(v) => {
                self.fail(&at, format!("expected a string, got {v}"));
                None
            }
        }
    }
}

const TOP_KEYS: &[&str] = &["command", "problem", "solver", "sweep", "ml", "output", "format", "seed"];
const PROBLEM_KEYS: &[&str] = &["alpha", "a", "T", "init", "rhs", "y_star"];
const RHS_KEYS: &[&str] = &["name", "params", "lipschitz_L", "bound_M"];
const SOLVER_KEYS: &[&str] = &["n_steps", "corrector_iterations", "tol_residual"];
const SWEEP_KEYS: &[&str] = &["mode", "deltas", "method"];
const ML_KEYS: &[&str] = &["alpha", "z"];

fn check_rhs(c: &mut Checker, v: &Value) -> Option<RhsSpec> {
    let path = "problem.rhs";
    let m = c.object(v, path)?;
    c.known_keys(m, RHS_KEYS, path);
    let before = c.errors.len();
    let name = c.string(m, "name", path, true);
    let kind = name.and_then(|n| match RhsKind::from_name(n) {
        Ok(k) => Some(k),
        Err(e) => {
            c.fail(&format!("{path}.name"), e);
            None
        }
    });
    let mut params = std::collections::BTreeMap::new();
    if let Some(p) = m.get("params") {
        if let Some(pm) = c.object(p, &format!("{path}.params")) {
            for (k, v) in pm {
                match v.as_f64() {
                    Some(x) if x.is_finite() => {
                        params.insert(k.clone(), x);
                    }
                    _ => c.fail(&format!("{path}.params.{k}"), format!("expected a number, got {v}")),
                }
            }
        }
    }
    let lipschitz = c.number(m, "lipschitz_L", path, true);
    if m.get("bound_M").is_none() {
        c.fail(&format!("{path}.bound_M"), "missing required field");
    }
    if c.errors.len() > before {
        return None;
    }
    let bound = match serde_json::from_value(m["bound_M"].clone()) {
        Ok(b) => b,
        Err(e) => {
            c.fail(&format!("{path}.bound_M"), e);
            return None;
        }
    };
    match RhsSpec::new(kind?, params, lipschitz?, bound) {
        Ok(spec) => Some(spec),
        Err(e) => {
            c.fail(path, e);
            None
        }
    }
}

fn check_problem(c: &mut Checker, v: &Value, needs_init: bool, needs_tvp: bool) -> Option<ProblemDoc> {
    let path = "problem";
    let m = c.object(v, path)?;
    c.known_keys(m, PROBLEM_KEYS, path);
    let alpha = c.number(m, "alpha", path, true);
    let a = c.number(m, "a", path, true);
    let terminal = c.number(m, "T", path, true);
    let init = c.numbers(m, "init", path, needs_init);
    let y_star = c.number(m, "y_star", path, needs_tvp);
    let rhs = match m.get("rhs") {
        Some(r) => check_rhs(c, r),
        None => {
            c.fail("problem.rhs", "missing required field");
            None
        }
    };
    if let Some(alpha) = alpha {
        if alpha <= 0.0 {
            c.fail("problem.alpha", format!("alpha must be > 0, got {alpha}"));
        } else if needs_tvp && alpha >= 1.0 {
            c.fail(
                "problem.alpha",
                format!("terminal value problems require 0 < alpha < 1, got {alpha}"),
            );
        }
        if let (Some(init), true) = (&init, alpha > 0.0) {
            let need = initial_value_count(alpha);
            if init.len() != need {
                c.fail("problem.init", format!("init length must equal ceil(alpha)={need}"));
            }
        }
    }
    if let (Some(a), Some(t)) = (a, terminal) {
        if a >= t {
            c.fail("problem.T", format!("T must exceed a, got a={a}, T={t}"));
        }
    }
    Some(ProblemDoc {
        alpha: alpha?,
        a: a?,
        terminal: terminal?,
        init,
        rhs: rhs?,
        y_star,
    })
}

fn check_solver(c: &mut Checker, v: &Value) -> SolverConfig {
    let mut cfg = SolverConfig::default();
    let path = "solver";
    let Some(m) = c.object(v, path) else {
        return cfg;
    };
    c.known_keys(m, SOLVER_KEYS, path);
    if let Some(n) = c.count(m, "n_steps", path) {
        if n < 1 {
            c.fail("solver.n_steps", "must be >= 1");
        }
        cfg.n_steps = n as usize;
    }
    if let Some(k) = c.count(m, "corrector_iterations", path) {
        if k < 1 {
            c.fail("solver.corrector_iterations", "must be >= 1");
        }
        cfg.corrector_iterations = k as usize;
    }
    if let Some(tol) = c.number(m, "tol_residual", path, false) {
        if tol <= 0.0 {
            c.fail("solver.tol_residual", format!("must be > 0, got {tol}"));
        }
        cfg.tol_residual = tol;
    }
    cfg
}

fn check_sweep(c: &mut Checker, v: &Value) -> Option<SweepDoc> {
    let path = "sweep";
    let m = c.object(v, path)?;
    c.known_keys(m, SWEEP_KEYS, path);
    let mode = c.string(m, "mode", path, true).and_then(|s| {
        let mode = SweepMode::from_name(s);
        if mode.is_none() {
            let known: Vec<&str> = SweepMode::ALL.iter().map(|m| m.name()).collect();
            c.fail("sweep.mode", format!("unknown mode `{s}` (known: {})", known.join(", ")));
        }
        mode
    });
    let deltas = c.numbers(m, "deltas", path, true);
    if let Some(d) = &deltas {
        if d.len() < 4 {
            c.fail("sweep.deltas", format!("need at least 4 deltas, got {}", d.len()));
        }
        if d.iter().any(|&x| x <= 0.0) {
            c.fail("sweep.deltas", "deltas must be > 0");
        }
        if d.windows(2).any(|w| w[1] >= w[0]) {
            c.fail("sweep.deltas", "deltas must be strictly decreasing");
        }
    }
    let method = match c.string(m, "method", path, false) {
        None => Some(TvpMethod::Fredholm),
        Some("fredholm") => Some(TvpMethod::Fredholm),
        Some("shooting") => Some(TvpMethod::Shooting),
        Some(other) => {
            c.fail("sweep.method", format!("expected fredholm or shooting, got `{other}`"));
            None
        }
    };
    Some(SweepDoc {
        mode: mode?,
        deltas: deltas?,
        method: method?,
    })
}

fn check_ml(c: &mut Checker, v: &Value, problem_alpha: Option<f64>) -> Option<MlDoc> {
    let path = "ml";
    let m = c.object(v, path)?;
    c.known_keys(m, ML_KEYS, path);
    let alpha = c.number(m, "alpha", path, false).or(problem_alpha);
    if alpha.is_none() {
        c.fail("ml.alpha", "missing required field (or give problem.alpha)");
    }
    let z = c.numbers(m, "z", path, true);
    Some(MlDoc { alpha: alpha?, z: z? })
}

fn syntax_error(e: serde_json::Error) -> Error {
    Error::Schema(vec![format!("line {}, column {}: {e}", e.line(), e.column())])
}

/// Parse and validate a config document, reporting every violation at once.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc: Value = serde_json::from_str(text).map_err(syntax_error)?;
    parse_config_value(&doc, None)
}

/// As [`parse_config`], with the command taken from the command line when the
/// document leaves it out (the two must agree when both are given).
pub fn parse_config_for(text: &str, command: Command) -> Result<RunConfig> {
    let doc: Value = serde_json::from_str(text).map_err(syntax_error)?;
    parse_config_value(&doc, Some(command))
}

fn parse_config_value(doc: &Value, cli_command: Option<Command>) -> Result<RunConfig> {
    let mut c = Checker::default();
    let Some(top) = c.object(doc, "config") else {
        return Err(Error::Schema(c.errors));
    };
    c.known_keys(top, TOP_KEYS, "");

    let named = c.string(top, "command", "", cli_command.is_none()).and_then(|s| {
        let cmd = Command::from_name(s);
        if cmd.is_none() {
            let known: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
            c.fail("command", format!("unknown command `{s}` (known: {})", known.join(", ")));
        }
        cmd
    });
    if let (Some(doc_cmd), Some(cli_cmd)) = (named, cli_command) {
        if doc_cmd != cli_cmd {
            c.fail(
                "command",
                format!("config says `{}` but `{}` was requested", doc_cmd.name(), cli_cmd.name()),
            );
        }
    }
    let command = cli_command.or(named);

    let sweep_mode = top
        .get("sweep")
        .and_then(|s| s.get("mode"))
        .and_then(Value::as_str)
        .and_then(SweepMode::from_name);
    let (needs_problem, needs_init, needs_tvp) = match command {
        Some(Command::SolveIvp) => (true, true, false),
        Some(Command::SolveTvp) => (true, false, true),
        Some(Command::Sweep) => {
            let tvp = sweep_mode.is_some_and(SweepMode::needs_tvp);
            (true, !tvp, tvp)
        }
        Some(Command::Ml) | None => (false, false, false),
    };

    let problem = match top.get("problem") {
        Some(p) => check_problem(&mut c, p, needs_init, needs_tvp),
        None => {
            if needs_problem {
                c.fail("problem", "missing required field");
            }
            None
        }
    };
    let solver = top.get("solver").map(|s| check_solver(&mut c, s)).unwrap_or_default();
    let sweep = match top.get("sweep") {
        Some(s) => check_sweep(&mut c, s),
        None => {
            if command == Some(Command::Sweep) {
                c.fail("sweep", "missing required field");
            }
            None
        }
    };
    let problem_alpha = top.get("problem").and_then(|p| p.get("alpha")).and_then(Value::as_f64);
    let ml = match top.get("ml") {
        Some(m) => check_ml(&mut c, m, problem_alpha),
        None => {
            if command == Some(Command::Ml) {
                c.fail("ml", "missing required field");
            }
            None
        }
    };
    let output_path = c.string(top, "output", "", false).map(PathBuf::from);
    let format = c.string(top, "format", "", false).and_then(|s| {
        let f = Format::from_name(s);
        if f.is_none() {
            c.fail("format", format!("expected csv, json or both, got `{s}`"));
        }
        f
    });
    let seed = c.count(top, "seed", "").unwrap_or(0);

    if !c.errors.is_empty() {
        return Err(Error::Schema(c.errors));
    }
    Ok(RunConfig {
        command: command.expect("checked above"),
        problem,
        solver,
        sweep,
        ml,
        output_path,
        format: format.unwrap_or_default(),
        seed,
    })
}

/// Write `contents` to `path` through a temporary file in the same directory,
/// so readers never see a partial artifact.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

/// `out.json` next to a CSV output (or `out.summary.json` if `out` is already JSON).
pub fn json_sibling(out: &Path) -> PathBuf {
    let candidate = out.with_extension("json");
    if candidate == out {
        let mut s = out.as_os_str().to_owned();
        s.push(".summary.json");
        PathBuf::from(s)
    } else {
        candidate
    }
}

/// `name.shooting.ext` next to `name.ext`.
pub fn shooting_sibling(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.shooting.{}", ext.to_string_lossy()),
        None => format!("{stem}.shooting"),
    };
    out.with_file_name(name)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlPoint {
    pub z: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlSummary {
    pub alpha: f64,
    pub points: Vec<MlPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IvpSummary {
    pub alpha: f64,
    pub n_steps: usize,
    pub y_final: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TvpSummary {
    pub method: TvpMethod,
    pub recovered_initial: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl From<&TvpSolution> for TvpSummary {
    fn from(s: &TvpSolution) -> Self {
        TvpSummary {
            method: s.method,
            recovered_initial: s.recovered_initial,
            iterations: s.iterations,
            residual: s.residual,
        }
    }
}

/// Artifacts a run produced: written paths and the JSON summary, if any.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOutput {
    pub written: Vec<PathBuf>,
    pub summary: Option<String>,
    pub warnings: Vec<String>,
}

/// Everything the binary needs besides the config document.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out: PathBuf,
    pub format: Format,
    pub method: MethodChoice,
    /// Sweep worker threads, `0` = automatic.
    pub threads: usize,
}

/// Thread cap from [`THREADS_ENV`]; unset or empty means automatic.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(s) if s.trim().is_empty() => Ok(0),
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Schema(vec![format!("{THREADS_ENV}: expected a non-negative integer, got `{s}`")])),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))
}

/// Execute a validated config, writing artifacts under `opts.out`.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    let problem = || {
        cfg.problem
            .as_ref()
            .ok_or_else(|| Error::Schema(vec!["problem: missing required field".into()]))
    };

    let (csvs, summary): (Vec<(PathBuf, String)>, String) = match cfg.command {
        Command::Ml => {
            let doc = cfg
                .ml
                .as_ref()
                .ok_or_else(|| Error::Schema(vec!["ml: missing required field".into()]))?;
            let mut csv = String::from("z,value\n");
            let mut points = Vec::with_capacity(doc.z.len());
            for &z in &doc.z {
                let value = ml(doc.alpha, z)?;
                csv.push_str(&format!("{},{}\n", crate::fmt17(z), crate::fmt17(value)));
                points.push(MlPoint { z, value });
            }
            let summary = to_json(&MlSummary {
                alpha: doc.alpha,
                points,
            })?;
            (vec![(opts.out.clone(), csv)], summary)
        }
        Command::SolveIvp => {
            let p = problem()?.ivp()?;
            let traj = solve_ivp(&p, &cfg.solver)?;
            let summary = to_json(&IvpSummary {
                alpha: p.alpha,
                n_steps: cfg.solver.n_steps,
                y_final: traj.last_value(),
                residual: residual_check(&p, &traj)?,
            })?;
            (vec![(opts.out.clone(), traj.to_csv())], summary)
        }
        Command::SolveTvp => {
            let p = problem()?.tvp()?;
            match opts.method {
                MethodChoice::Fredholm | MethodChoice::Shooting => {
                    let sol = if opts.method == MethodChoice::Fredholm {
                        solve_tvp_fredholm(&p, &cfg.solver)?
                    } else {
                        solve_tvp_shooting(&p, &cfg.solver)?
                    };
                    let summary = to_json(&TvpSummary::from(&sol))?;
                    (vec![(opts.out.clone(), sol.traj.to_csv())], summary)
                }
                MethodChoice::Both => {
                    let fr = solve_tvp_fredholm(&p, &cfg.solver)?;
                    let sh = solve_tvp_shooting(&p, &cfg.solver)?;
                    let gap = sup_diff(&fr.traj, &sh.traj, p.start, p.terminal)?;
                    out.warnings.push(format!("fredholm and shooting differ by {gap:e} in sup-norm"));
                    let summary = to_json(&[TvpSummary::from(&fr), TvpSummary::from(&sh)])?;
                    (
                        vec![
                            (opts.out.clone(), fr.traj.to_csv()),
                            (shooting_sibling(&opts.out), sh.traj.to_csv()),
                        ],
                        summary,
                    )
                }
            }
        }
        Command::Sweep => {
            let doc = cfg
                .sweep
                .as_ref()
                .ok_or_else(|| Error::Schema(vec!["sweep: missing required field".into()]))?;
            let pd = problem()?;
            let base = if doc.mode.needs_tvp() {
                SweepBase::Tvp(pd.tvp()?)
            } else {
                SweepBase::Ivp(pd.ivp()?)
            };
            let mut plan = SweepPlan::new(base, doc.mode, doc.deltas.clone(), cfg.solver)?;
            plan.tvp_method = doc.method;
            let report = run_sweep_with_threads(&plan, opts.threads)?;
            out.warnings.extend(report.warnings.iter().cloned());
            let summary: SweepSummary = report.summary();
            (vec![(opts.out.clone(), report.to_csv())], to_json(&summary)?)
        }
    };

    if opts.format.csv() {
        for (path, body) in &csvs {
            write_atomic(path, body.as_bytes())?;
            out.written.push(path.clone());
        }
    }
    if opts.format.json() {
        let path = match opts.format {
            Format::Both => json_sibling(&opts.out),
            _ => opts.out.clone(),
        };
        let mut body = summary.clone();
        body.push('\n');
        write_atomic(&path, body.as_bytes())?;
        out.written.push(path);
        out.summary = Some(summary);
    }
    Ok(out)
}

/// Exit status for an error: `2` for solver failures, `1` for everything else.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_solver_failure() || matches!(e, Error::DegenerateFit(_)) {
        2
    } else {
        1
    }
}

/// Raw command-line request, before the config file is read.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub method: Option<MethodChoice>,
}

fn prepare(inv: &Invocation) -> Result<(RunConfig, RunOptions)> {
    let text = std::fs::read_to_string(&inv.config)
        .map_err(|e| Error::Io(format!("{}: {e}", inv.config.display())))?;
    let cfg = parse_config_for(&text, inv.command)?;
    if inv.method.is_some() && cfg.command != Command::SolveTvp {
        return Err(Error::Schema(vec!["--method only applies to solve-tvp".into()]));
    }
    let out = inv
        .out
        .clone()
        .or_else(|| cfg.output_path.clone())
        .ok_or_else(|| Error::Schema(vec!["no output path: pass --out or set `output`".into()]))?;
    let opts = RunOptions {
        out,
        format: inv.format.unwrap_or(cfg.format),
        method: inv.method.unwrap_or_default(),
        threads: threads_from_env()?,
    };
    Ok((cfg, opts))
}

/// Run an invocation end to end, reporting on stdout/stderr; returns the exit status.
pub fn execute(inv: &Invocation) -> i32 {
    let result = prepare(inv).and_then(|(cfg, opts)| run(&cfg, &opts));
    match result {
        Ok(output) => {
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(s) = output.summary {
                println!("{s}");
            }
            0
        }
        Err(e) => {
            eprintln!("fracwell: {e}");
            exit_code(&e)
        }
    }
}
