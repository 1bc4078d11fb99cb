//! Command-line front end. JSON for structured results, CSV for sweeps,
//! traces and region diagrams. Every output carries a [`RunManifest`].
//!
//! Exit codes: 0 ok, 2 validation, 3 no convergence, 4 simulation
//! resolution, 5 design assumption.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::design::{no_dropout_limit, objective_values, optimize_prizes, DesignProblem, PhiBar};
use crate::error::ContestError;
use crate::model::{classify, profitability, ContestParams, SweepParam};
use crate::oracle::{solve_grid_mpe, GridSpec};
use crate::sim::{simulate_equilibrium, trace_csv, trace_path, SimConfig};
use crate::solver::{solve, EquilibriumSolution};
use crate::sweep;
use crate::verify::check_deviations;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_SIM_RESOLUTION: i32 = 4;
pub const EXIT_DESIGN: i32 = 5;

/// Exit code for an error, shared with the C ABI status codes.
pub fn exit_code(err: &ContestError) -> i32 {
    use ContestError::*;
    match err {
        InvalidParameter { .. }
        | InfiniteProfitability { .. }
        | NotProfitable { .. }
        | Domain(_)
        | WrongRegime { .. }
        | StabilityViolation(_) => EXIT_VALIDATION,
        NoConvergence(_) | DegenerateRegime { .. } | SingularSystem | OracleNonConvergence { .. } => {
            EXIT_NO_CONVERGENCE
        }
        SimResolution(_) => EXIT_SIM_RESOLUTION,
        AssumptionViolated(_) | KnifeEdge | InfiniteContinuation => EXIT_DESIGN,
    }
}

#[derive(Parser, Debug)]
#[command(name = "contest", version, about = "Dynamic contest equilibrium solver and simulator")]
struct Cli {
    /// Omit timestamps from the run manifest (byte-identical reruns).
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// Write the result here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Regime, threshold and profitability.
    Classify { params: PathBuf },
    /// Equilibrium boundaries and value function.
    Solve {
        params: PathBuf,
        /// Run the Bellman/deviation/lemma verifier.
        #[arg(long)]
        verify: bool,
        /// Compare with the lattice oracle at spacing H and period DT.
        #[arg(long, num_args = 2, value_names = ["H", "DT"])]
        oracle: Option<Vec<f64>>,
        /// Verifier grid points per region.
        #[arg(long, default_value_t = 2000)]
        grid_n: usize,
    },
    /// Monte Carlo under the equilibrium strategies.
    Simulate {
        params: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        k0: f64,
        /// Laplace-transform points θ for E[e^{−θτ}].
        #[arg(long, num_args = 1..)]
        theta: Vec<f64>,
        /// Plain absorption at grid times, no bridge correction.
        #[arg(long)]
        no_bridge: bool,
        /// CSV trace (t, Δk, actions) of the first path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// One solve per grid value of a parameter; CSV.
    Sweep {
        params: PathBuf,
        #[arg(long)]
        vary: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        n: usize,
    },
    /// Optimal prize allocation for a budget.
    Design { problem: PathBuf },
    /// Value function regions and coefficients as JSON.
    Dump { params: PathBuf },
    /// (Δk, region-label) CSV for region diagrams.
    Regions {
        params: PathBuf,
        #[arg(long, default_value_t = 401)]
        n: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params_hash: String,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix: Option<u64>,
    pub finished_unix: Option<u64>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<ContestError> for Failure {
    fn from(e: ContestError) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

fn validation(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message: message.into(),
    }
}

fn now(enabled: bool) -> Option<u64> {
    enabled.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(T, String), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| validation(format!("cannot read {}: {e}", path.display())))?;
    let value: T = serde_json::from_str(&text)
        .map_err(|e| validation(format!("invalid input {}: {e}", path.display())))?;
    Ok((value, text))
}

fn hash_of<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_vec(value).unwrap_or_default();
    Sha256::digest(&canonical)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Rounds every number to 12 significant digits.
fn round_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => {
                let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
                serde_json::Number::from_f64(rounded)
                    .map(Value::Number)
                    .unwrap_or(Value::Null)
            }
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(round_numbers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_numbers(v))).collect()),
        other => other,
    }
}

fn to_json<T: Serialize>(value: &T) -> Value {
    round_numbers(serde_json::to_value(value).unwrap_or(Value::Null))
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

enum Output {
    Json(Value),
    Csv(String),
}

struct Ctx {
    timestamps: bool,
    command: String,
    started: Option<u64>,
}

impl Ctx {
    fn manifest(&self, params_hash: String, seed: Option<u64>) -> RunManifest {
        RunManifest {
            command: self.command.clone(),
            params_hash,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started,
            finished_unix: now(self.timestamps),
        }
    }

    fn json(&self, hash: String, seed: Option<u64>, body: Value) -> Output {
        let mut out = json!({ "manifest": self.manifest(hash, seed) });
        if let (Value::Object(o), Value::Object(b)) = (&mut out, body) {
            o.extend(b);
        }
        Output::Json(out)
    }

    fn csv(&self, hash: String, seed: Option<u64>, body: String) -> Output {
        let manifest = serde_json::to_string(&self.manifest(hash, seed)).unwrap_or_default();
        Output::Csv(format!("# manifest: {manifest}\n{body}"))
    }
}

fn load_params(path: &Path) -> Result<(ContestParams, String), Failure> {
    let (params, _) = read_json::<ContestParams>(path)?;
    let hash = hash_of(&params);
    Ok((params, hash))
}

fn oracle_report(params: &ContestParams, sol: &EquilibriumSolution, h: f64, dt: f64) -> Result<Value, Failure> {
    let spec = GridSpec {
        dt,
        ..GridSpec::new(params, h, 3.0 * sol.k_star)
    };
    let res = solve_grid_mpe(params, &spec)?;
    Ok(json!({
        "h": h,
        "dt": dt,
        "k_star_est": res.k_star_est,
        "k_star_refined": res.k_star_refined,
        "k_star_star_est": res.k_star_star_est,
        "abs_error": (res.k_star_est - sol.k_star).abs(),
        "abs_error_refined": (res.k_star_refined - sol.k_star).abs(),
        "value_sweeps": res.value_sweeps,
    }))
}

fn region_label(sol: &EquilibriumSolution, dk: f64) -> &'static str {
    if dk <= -sol.k_star {
        return "i_drops";
    }
    if dk >= sol.k_star {
        return "j_drops";
    }
    match (
        sol.strategy.is_risky_tie_follows(dk),
        sol.strategy.is_risky_tie_follows(-dk),
    ) {
        (true, true) => "both_risky",
        (true, false) => "i_risky",
        (false, true) => "j_risky",
        (false, false) => "both_safe",
    }
}

fn execute(cli: &Cli, ctx: &Ctx) -> Result<Output, Failure> {
    match &cli.command {
        Command::Classify { params } => {
            let (p, hash) = load_params(params)?;
            let regime = classify(&p)?;
            Ok(ctx.json(hash, None, json!({
                "regime": to_json(&regime),
                "profitability": to_json(&profitability(&p)?),
            })))
        }
        Command::Solve { params, verify, oracle, grid_n } => {
            let (p, hash) = load_params(params)?;
            let oracle_args = match oracle.as_deref() {
                Some([h, dt]) => Some((*h, *dt)),
                Some(_) => return Err(validation("--oracle takes H and DT")),
                None => None,
            };
            if *grid_n < 100 {
                return Err(validation("--grid-n must be at least 100"));
            }
            let sol = solve(&p)?;
            let mut body = json!({ "solution": to_json(&sol) });
            if *verify {
                body["verification"] = to_json(&check_deviations(&sol, &p, *grid_n));
            }
            if let Some((h, dt)) = oracle_args {
                body["oracle"] = to_json(&oracle_report(&p, &sol, h, dt)?);
            }
            Ok(ctx.json(hash, None, body))
        }
        Command::Simulate { params, paths, dt, seed, k0, theta, no_bridge, trace } => {
            let (p, hash) = load_params(params)?;
            let sol = solve(&p)?;
            let cfg = SimConfig {
                laplace_thetas: theta.clone(),
                bridge: !no_bridge,
                ..SimConfig::new(*paths, *dt, *k0, *seed)
            };
            let res = simulate_equilibrium(&p, &sol, &cfg)?;
            let trace_text = match trace {
                Some(_) => {
                    let rows = trace_path(&p, &sol.strategy, &sol.strategy, &cfg, 0)?;
                    Some(trace_csv(&rows))
                }
                None => None,
            };
            if let (Some(path), Some(text)) = (trace, trace_text) {
                let manifest = serde_json::to_string(&ctx.manifest(hash.clone(), Some(*seed))).unwrap_or_default();
                write_atomic(path, format!("# manifest: {manifest}\n{text}").as_bytes())
                    .map_err(|e| validation(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(ctx.json(hash, Some(*seed), json!({
                "config": to_json(&cfg),
                "analytic_value_at_k0": to_json(&sol.value_at(*k0)?),
                "result": to_json(&res),
            })))
        }
        Command::Sweep { params, vary, from, to, n } => {
            let (p, hash) = load_params(params)?;
            let param: SweepParam = vary.parse()?;
            let rows = sweep::sweep(&p, param, *from, *to, *n)?;
            Ok(ctx.csv(hash, None, sweep::to_csv(&rows)))
        }
        Command::Design { problem } => {
            let (prob, _) = read_json::<DesignProblem>(problem)?;
            let hash = hash_of(&prob);
            let allocation = optimize_prizes(&prob)?;
            let objectives = match allocation.phi_bar {
                PhiBar::Finite { .. } => to_json(&objective_values(&prob, &allocation)?),
                PhiBar::InfiniteContinuation => {
                    let (follower_time, success_time) = no_dropout_limit(&prob);
                    json!({
                        "infinite_continuation": true,
                        "follower_time": follower_time,
                        "success_time": success_time,
                    })
                }
            };
            Ok(ctx.json(hash, None, json!({
                "allocation": to_json(&allocation),
                "objectives": round_numbers(objectives),
            })))
        }
        Command::Dump { params } => {
            let (p, hash) = load_params(params)?;
            let sol = solve(&p)?;
            Ok(ctx.json(hash, None, json!({
                "k_star": to_json(&sol.k_star),
                "k_star_star": to_json(&sol.k_star_star),
                "value_function": to_json(&sol.value),
            })))
        }
        Command::Regions { params, n } => {
            let (p, hash) = load_params(params)?;
            if *n < 2 {
                return Err(validation("--n must be at least 2"));
            }
            let sol = solve(&p)?;
            let span = 1.25 * sol.k_star;
            let mut body = String::from("dk,region\n");
            for x in sweep::linspace(-span, span, *n) {
                body.push_str(&format!("{x:.11e},{}\n", region_label(&sol, x)));
            }
            Ok(ctx.csv(hash, None, body))
        }
    }
}

/// Runs the CLI with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let ctx = Ctx {
        timestamps: !cli.no_timestamp,
        command: args
            .iter()
            .skip(1)
            .map(|a| a.to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join(" "),
        started: now(!cli.no_timestamp),
    };
    let output = match execute(&cli, &ctx) {
        Ok(o) => o,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
    };
    let bytes = match output {
        Output::Json(v) => {
            let mut s = serde_json::to_string_pretty(&v).unwrap_or_default();
            s.push('\n');
            s.into_bytes()
        }
        Output::Csv(s) => s.into_bytes(),
    };
    let written = match &cli.output {
        Some(path) => write_atomic(path, &bytes),
        None => stdout.write_all(&bytes),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_VALIDATION;
    }
    EXIT_OK
}
