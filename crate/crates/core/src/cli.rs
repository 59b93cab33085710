//! Command-line front end: subcommands, run manifests and replay.
//!
//! Every subcommand writes its outputs into `--out-dir` together with
//! `<subcommand>.manifest.json`, which records the resolved config, the
//! seeds, the fingerprints and a SHA-256 of each output. `harness replay`
//! reruns a manifest and compares the hashes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::{hex_digest, Config, ConfigError, ModeName, SWEEP_MU_C0, SWEEP_UPPER_BOUND_K};
use crate::dynamics::{
    exclusion, run, run_coupled, trajectory_rows, write_snapshot, write_trajectory_csv,
    DynamicsError, Init, ProcessConfig, Record, SiteRule,
};
use crate::experiments::{
    bootstrap_fit, estimate_growth, geometric_grid, mu_recursion_check, upper_bound_experiment,
    ExperimentError, GrowthCurve, UpperBoundReport,
};
use crate::properties::property_check_with_rule;
use crate::walk::{oracle_check, OracleParams, WalkError};
use crate::wall::WallField;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const ORACLE: i32 = 4;
    pub const PROPERTY: i32 = 5;
    pub const INSUFFICIENT_GROWTH: i32 = 6;
    pub const REPLAY_MISMATCH: i32 = 7;
}

#[derive(Debug, Parser)]
#[command(name = "harness", version, about = "Serial harness processes with wall exclusion on Z^d")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate E X_n(0) on the geometric time grid and write growth.csv.
    Simulate(RunArgs),
    /// Compare the engine with the closed-form nu and the return-sum bracket.
    OracleCheck(RunArgs),
    /// Run the pathwise property suites on randomized instances.
    PropertyCheck {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Fit E X_n(0) ~ c (log n)^gamma_inv to a growth-curve CSV.
    Fit(FitArgs),
    /// Repeat a run over the values of [sweep].
    Sweep(RunArgs),
    /// Rerun a manifest and compare output hashes.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Overrides run.seed (TOML integers stop at 2^63 - 1).
    #[arg(long, value_parser = clap::value_parser!(u64).range(..=i64::MAX as u64))]
    pub seed: Option<u64>,
    /// Overrides run.replicates.
    #[arg(long)]
    pub replicates: Option<u64>,
    /// Worker threads (default: run.threads, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides run.mode.
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// CSV with columns n, mean, se, replicates.
    pub curve: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Where the rerun writes (default: `replay/` next to the manifest).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub noise: u64,
    pub wall: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fingerprints {
    pub kernel: String,
    pub noise: String,
    pub wall: String,
}

/// Written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub engine_version: String,
    pub subcommand: String,
    /// SHA-256 of `config`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
    /// The config as run, with command-line overrides applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Seeds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprints: Option<Fingerprints>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Input files, by absolute path.
    #[serde(default)]
    pub inputs: Vec<FileRecord>,
    /// Output files, relative to the output directory.
    pub outputs: Vec<FileRecord>,
    pub exit_code: i32,
}

impl RunManifest {
    pub fn file_name(subcommand: &str) -> String {
        format!("{subcommand}.manifest.json")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Parse(_) => exit::CONFIG,
            ConfigError::Invalid(_) => exit::VALIDATION,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        let code = match e {
            DynamicsError::NotExact { .. } | DynamicsError::Kernel(_) => exit::VALIDATION,
            _ => exit::FAILURE,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Dynamics(d) => d.into(),
            ExperimentError::InsufficientGrowth(_) => {
                CliError::new(exit::INSUFFICIENT_GROWTH, e.to_string())
            }
            _ => CliError::new(exit::VALIDATION, e.to_string()),
        }
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::Dynamics(d) => d.into(),
            WalkError::Kernel(_) | WalkError::ZeroHorizon => CliError::new(exit::VALIDATION, e.to_string()),
            _ => CliError::new(exit::FAILURE, e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(exit::FAILURE, format!("i/o error: {e}"))
    }
}

/// What a subcommand produced, before the manifest is written.
struct Outcome {
    outputs: Vec<String>,
    code: i32,
    message: Option<String>,
}

impl Outcome {
    fn ok(outputs: Vec<String>) -> Self {
        Outcome {
            outputs,
            code: exit::OK,
            message: None,
        }
    }
}

/// A subcommand with its inputs resolved, as recorded in a manifest.
enum Job {
    Simulate(Config),
    OracleCheck(Config),
    PropertyCheck(Config, u64),
    Fit(PathBuf),
    Sweep(Config),
}

impl Job {
    fn name(&self) -> &'static str {
        match self {
            Job::Simulate(_) => "simulate",
            Job::OracleCheck(_) => "oracle-check",
            Job::PropertyCheck(..) => "property-check",
            Job::Fit(_) => "fit",
            Job::Sweep(_) => "sweep",
        }
    }

    fn config(&self) -> Option<&Config> {
        match self {
            Job::Simulate(c) | Job::OracleCheck(c) | Job::PropertyCheck(c, _) | Job::Sweep(c) => Some(c),
            Job::Fit(_) => None,
        }
    }
}

/// Runs the `harness` binary on `args` (including the program name) and
/// returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_rule(args, exclusion)
}

/// As [`run_cli`], with `rule` replacing the site update of the processes
/// the property suites run. Tests use this to plant faulty engines.
pub fn run_with_rule<I, T>(args: I, rule: SiteRule) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    match dispatch(cli.command, rule) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command, rule: SiteRule) -> Result<i32, CliError> {
    let (job, out_dir, threads) = match command {
        Command::Simulate(a) => {
            let (c, t) = load(&a)?;
            (Job::Simulate(c), a.out_dir, t)
        }
        Command::OracleCheck(a) => {
            let (c, t) = load(&a)?;
            (Job::OracleCheck(c), a.out_dir, t)
        }
        Command::PropertyCheck { run, trials } => {
            let (c, t) = load(&run)?;
            (Job::PropertyCheck(c, trials), run.out_dir, t)
        }
        Command::Sweep(a) => {
            let (c, t) = load(&a)?;
            (Job::Sweep(c), a.out_dir, t)
        }
        Command::Fit(a) => (Job::Fit(a.curve), a.out_dir, None),
        Command::Replay(a) => return replay(&a, rule),
    };
    execute(&job, &out_dir, threads, rule).map(|m| m.exit_code)
}

fn load(args: &RunArgs) -> Result<(Config, Option<usize>), CliError> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        CliError::new(exit::CONFIG, format!("config error: cannot read {}: {e}", args.config.display()))
    })?;
    let mut config = Config::from_toml(&text)?;
    if let Some(s) = args.seed {
        config.run.seed = s;
    }
    if let Some(r) = args.replicates {
        config.run.replicates = r;
    }
    if let Some(m) = args.mode {
        config.run.mode = m;
    }
    if let Some(t) = args.threads {
        config.run.threads = Some(t);
    }
    let threads = config.run.threads;
    // Thread count does not change any output; keep it out of the hash.
    config.run.threads = None;
    Ok((config, threads))
}

/// Runs `job` into `out_dir` and writes its manifest.
fn execute(job: &Job, out_dir: &Path, threads: Option<usize>, rule: SiteRule) -> Result<RunManifest, CliError> {
    fs::create_dir_all(out_dir)?;
    let mut inputs = Vec::new();
    if let Job::Fit(path) = job {
        let bytes = fs::read(path)
            .map_err(|e| CliError::new(exit::FAILURE, format!("cannot read {}: {e}", path.display())))?;
        let abs = fs::canonicalize(path)?;
        inputs.push(FileRecord {
            path: abs.display().to_string(),
            sha256: hex_digest(&bytes),
        });
    }
    let outcome = with_threads(threads, || match job {
        Job::Simulate(c) => simulate(c, out_dir),
        Job::OracleCheck(c) => oracle(c, out_dir),
        Job::PropertyCheck(c, trials) => properties(c, *trials, rule, out_dir),
        Job::Fit(path) => fit(path, out_dir),
        Job::Sweep(c) => sweep(c, out_dir),
    })?;
    let mut outputs = Vec::new();
    for name in &outcome.outputs {
        outputs.push(FileRecord {
            path: name.clone(),
            sha256: hex_digest(&fs::read(out_dir.join(name))?),
        });
    }
    let config = job.config();
    let manifest = RunManifest {
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: job.name().to_string(),
        config_hash: config.map(Config::hash),
        config: config.map(Config::to_toml),
        seeds: config.map(|c| Seeds {
            master: c.run.seed,
            noise: c.noise_seed(),
            wall: c.wall_seed(),
        }),
        fingerprints: config.and_then(|c| {
            Some(Fingerprints {
                kernel: c.kernel().ok()?.fingerprint(),
                noise: c.noise_law().ok()?.name(),
                wall: c.wall_spec().ok()?.describe(),
            })
        }),
        trials: match job {
            Job::PropertyCheck(_, t) => Some(*t),
            _ => None,
        },
        inputs,
        outputs,
        exit_code: outcome.code,
    };
    let path = out_dir.join(RunManifest::file_name(job.name()));
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n")?;
    if let Some(m) = outcome.message {
        eprintln!("{m}");
    }
    Ok(manifest)
}

fn with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<R, CliError> + Send,
) -> Result<R, CliError> {
    match threads {
        None => f(),
        Some(0) => Err(CliError::new(exit::VALIDATION, "invalid config: run.threads: must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::new(exit::FAILURE, e.to_string()))?
            .install(f),
    }
}

fn create(out_dir: &Path, name: &str) -> Result<std::io::BufWriter<fs::File>, CliError> {
    Ok(std::io::BufWriter::new(fs::File::create(out_dir.join(name))?))
}

fn write_json<T: Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(out_dir.join(name), text + "\n")?;
    Ok(())
}

fn simulate(config: &Config, out_dir: &Path) -> Result<Outcome, CliError> {
    let spec = config.growth_spec()?;
    let curve = estimate_growth(&spec)?;
    let mut outputs = vec!["growth.csv".to_string()];
    curve.write_csv(create(out_dir, "growth.csv")?)?;
    let last = curve.means.len() - 1;
    println!(
        "n = {}: E X_n(0) = {} +- {} over {} replicates",
        curve.times[last], curve.means[last], curve.ses[last], curve.replicates
    );

    let process = |rep: u64, wall: WallField| ProcessConfig {
        kernel: spec.kernel.clone(),
        wall,
        init: Init::ZeroJoinWall,
        steps: config.run.steps,
        noise: spec.noise_stream(rep),
        mode: spec.mode,
    };
    let traj = config.run.trajectories.min(config.run.replicates);
    if traj > 0 {
        let mut rows = Vec::new();
        for rep in 0..traj {
            let wall = spec.wall_field(rep);
            let wall_origin = wall.values()[0];
            let pair = [process(rep, wall), process(rep, WallField::free(spec.torus))];
            let t = run_coupled(&pair, Record::Origin)?;
            rows.extend(trajectory_rows(rep, &t[0], &t[1], wall_origin));
        }
        write_trajectory_csv(create(out_dir, "trajectories.csv")?, &rows)?;
        outputs.push("trajectories.csv".into());
    }
    if config.run.snapshot {
        let t = run(&process(0, spec.wall_field(0)), Record::Origin)?;
        let mut w = create(out_dir, "snapshot.bin")?;
        write_snapshot(&mut w, &t.last, config.run.steps)?;
        w.flush()?;
        outputs.push("snapshot.bin".into());
    }
    Ok(Outcome::ok(outputs))
}

fn oracle(config: &Config, out_dir: &Path) -> Result<Outcome, CliError> {
    config.validate()?;
    let kernel = config.kernel()?;
    let o = config.oracle();
    let params = OracleParams {
        horizon: o.horizon,
        heights: o.heights,
        window: o.window,
        return_horizon: o.return_horizon,
        seed: config.run.seed,
    };
    let (report, sum) = oracle_check(&kernel, params)?;
    write_json(out_dir, "oracle_report.json", &report)?;
    sum.write_csv(create(out_dir, "return_sum.csv")?)?;
    let outputs = vec!["oracle_report.json".to_string(), "return_sum.csv".to_string()];
    println!(
        "nu: max deviation {:e} over {} heights, {} steps, window {}",
        report.max_deviation.max(report.max_origin_deviation),
        report.heights.len(),
        report.horizon,
        report.window
    );
    println!(
        "return sum: a_{} = {} <= a <= {}{}",
        report.return_horizon,
        report.a_n,
        report.upper,
        if report.heuristic { " (extrapolated tail)" } else { "" }
    );
    if report.passed() {
        println!("oracle check passed");
        return Ok(Outcome::ok(outputs));
    }
    let mut message = String::from("oracle mismatch:");
    if let Some(w) = &report.worst {
        message += &format!(
            " worst site {:?} at step {} (height {}): engine {} vs closed form {}",
            w.site, w.step, w.height, w.engine, w.closed_form
        );
    }
    if !report.bracket_consistent {
        message += &format!(
            " return-sum bracket inconsistent (a_N = {}, upper = {}, max P nu/W = {}, first-return gap {:e})",
            report.a_n, report.upper, report.max_ratio, report.first_return_gap
        );
    }
    Ok(Outcome {
        outputs,
        code: exit::ORACLE,
        message: Some(message),
    })
}

fn properties(config: &Config, trials: u64, rule: SiteRule, out_dir: &Path) -> Result<Outcome, CliError> {
    let setup = config.property_setup()?;
    if trials == 0 {
        eprintln!("warning: trials = 0, the property check passes vacuously");
    }
    let report = property_check_with_rule(&setup, trials, rule)?;
    write_json(out_dir, "property_report.json", &report)?;
    let outputs = vec!["property_report.json".to_string()];
    match report.first_violation() {
        None => {
            println!(
                "{} suites passed on {} trials (max |w2 - w3| = {:e})",
                report.instances.len(),
                trials,
                report.max_w2_w3_diff
            );
            Ok(Outcome::ok(outputs))
        }
        Some(v) => Ok(Outcome {
            outputs,
            code: exit::PROPERTY,
            message: Some(format!(
                "property violation: {} (seed {}, trial {}, site {:?}, step {}, excess {:e}); {} violations in total",
                v.property,
                v.seed,
                v.trial,
                setup.torus.centered(v.site),
                v.step,
                v.excess,
                report.violations.len()
            )),
        }),
    }
}

fn fit(path: &Path, out_dir: &Path) -> Result<Outcome, CliError> {
    let file = fs::File::open(path)?;
    let curve = GrowthCurve::read_csv(file)
        .map_err(|e| CliError::new(exit::VALIDATION, format!("{}: {e}", path.display())))?;
    match bootstrap_fit(&curve, 0, 0) {
        Ok(f) => {
            write_json(out_dir, "fit.json", &f)?;
            println!(
                "gamma_inv = {} (c = {}, R^2 = {}, n in [{}, {}])",
                f.gamma_inv, f.c, f.r2, f.window.0, f.window.1
            );
            Ok(Outcome::ok(vec!["fit.json".into()]))
        }
        Err(e @ ExperimentError::InsufficientGrowth(_)) => Ok(Outcome {
            outputs: Vec::new(),
            code: exit::INSUFFICIENT_GROWTH,
            message: Some(e.to_string()),
        }),
        Err(e) => Err(e.into()),
    }
}

fn value_text(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(f) => f.to_string(),
        other => other.to_string(),
    }
}

fn value_f64(param: &str, v: &toml::Value) -> Result<f64, CliError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::new(exit::CONFIG, format!("config error: sweep.values: {param} needs numbers"))),
    }
}

fn sweep(config: &Config, out_dir: &Path) -> Result<Outcome, CliError> {
    let Some(sw) = &config.sweep else {
        return Err(CliError::new(exit::CONFIG, "config error: sweep: missing [sweep] section"));
    };
    if sw.values.is_empty() {
        return Err(CliError::new(exit::VALIDATION, "invalid config: sweep.values: empty"));
    }
    match sw.param.as_str() {
        SWEEP_UPPER_BOUND_K => {
            let spec = config.growth_spec()?;
            let mut w = csv::Writer::from_writer(create(out_dir, "upper_bound.csv")?);
            let mut header = UpperBoundReport::csv_header().to_vec();
            header.extend(["a_n", "r_n", "critical_form", "rn_over_torus", "replicates"]);
            w.write_record(&header).map_err(csv_err)?;
            for v in &sw.values {
                let k = value_f64(&sw.param, v)?;
                let r = upper_bound_experiment(&spec, k, config.run.steps)?;
                let mut row = r.csv_row().to_vec();
                row.extend([
                    r.a_n.to_string(),
                    r.r_n.to_string(),
                    r.critical_form.to_string(),
                    r.rn_over_torus.to_string(),
                    r.replicates.to_string(),
                ]);
                w.write_record(&row).map_err(csv_err)?;
                println!(
                    "K = {k}: P(X_n(0) >= a_n) = {}, P(decoupled) = {}, P(R_n large) = {}",
                    r.p_exceed, r.p_decouple, r.p_rn
                );
            }
            w.flush()?;
            Ok(Outcome::ok(vec!["upper_bound.csv".into()]))
        }
        SWEEP_MU_C0 => {
            let spec = config.growth_spec()?;
            let c0s = sw
                .values
                .iter()
                .map(|v| value_f64(&sw.param, v))
                .collect::<Result<Vec<_>, _>>()?;
            let ns = geometric_grid(config.run.steps);
            let r = mu_recursion_check(&spec, &ns, &c0s)?;
            let mut w = csv::Writer::from_writer(create(out_dir, "mu.csv")?);
            w.write_record(["n", "C0", "increment", "se", "required", "holds"])
                .map_err(csv_err)?;
            for c in &r.checks {
                w.write_record([
                    c.n.to_string(),
                    c.c0.to_string(),
                    c.increment.to_string(),
                    c.se.to_string(),
                    c.required.to_string(),
                    c.holds.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
            let summary = serde_json::json!({
                "q": r.q,
                "holding": r.holding,
                "tightest": r.tightest,
            });
            write_json(out_dir, "mu.json", &summary)?;
            match r.tightest {
                Some(c) => println!("mu recursion holds at every n for C0 >= {c} (q = {})", r.q),
                None => println!("mu recursion fails for every swept C0 (q = {})", r.q),
            }
            Ok(Outcome::ok(vec!["mu.csv".into(), "mu.json".into()]))
        }
        param => {
            let mut curves = csv::Writer::from_writer(create(out_dir, "sweep.csv")?);
            curves
                .write_record([param, "n", "mean", "se", "replicates"])
                .map_err(csv_err)?;
            let mut fits = csv::Writer::from_writer(create(out_dir, "sweep_fit.csv")?);
            fits.write_record([
                param, "gamma_inv", "c", "r2", "n_min", "n_max", "ci_low", "ci_high", "status",
            ])
            .map_err(csv_err)?;
            for v in &sw.values {
                let point = config.with_param(param, v)?;
                let spec = point.growth_spec()?;
                let curve = estimate_growth(&spec)?;
                let label = value_text(v);
                for t in 0..curve.times.len() {
                    curves
                        .write_record([
                            label.clone(),
                            curve.times[t].to_string(),
                            curve.means[t].to_string(),
                            curve.ses[t].to_string(),
                            curve.replicates.to_string(),
                        ])
                        .map_err(csv_err)?;
                }
                let row = match bootstrap_fit(&curve, point.run.bootstrap, point.run.seed) {
                    Ok(f) => {
                        println!("{param} = {label}: gamma_inv = {}", f.gamma_inv);
                        let (lo, hi) = f.ci.map_or((String::new(), String::new()), |(a, b)| {
                            (a.to_string(), b.to_string())
                        });
                        [
                            label,
                            f.gamma_inv.to_string(),
                            f.c.to_string(),
                            f.r2.to_string(),
                            f.window.0.to_string(),
                            f.window.1.to_string(),
                            lo,
                            hi,
                            "ok".into(),
                        ]
                    }
                    Err(ExperimentError::InsufficientGrowth(_)) => {
                        println!("{param} = {label}: insufficient growth");
                        let mut r: [String; 9] = Default::default();
                        r[0] = label;
                        r[8] = "insufficient_growth".into();
                        r
                    }
                    Err(e) => return Err(e.into()),
                };
                fits.write_record(&row).map_err(csv_err)?;
            }
            curves.flush()?;
            fits.flush()?;
            Ok(Outcome::ok(vec!["sweep.csv".into(), "sweep_fit.csv".into()]))
        }
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::new(exit::FAILURE, format!("csv error: {e}"))
}

fn replay(args: &ReplayArgs, rule: SiteRule) -> Result<i32, CliError> {
    let text = fs::read_to_string(&args.manifest)?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::new(exit::CONFIG, format!("manifest error: {e}")))?;
    let config = || -> Result<Config, CliError> {
        let text = manifest
            .config
            .as_deref()
            .ok_or_else(|| CliError::new(exit::CONFIG, "manifest error: config missing"))?;
        let c = Config::from_toml(text)?;
        if manifest.config_hash.as_deref() != Some(c.hash().as_str()) {
            return Err(CliError::new(exit::REPLAY_MISMATCH, "manifest config does not match its hash"));
        }
        Ok(c)
    };
    let job = match manifest.subcommand.as_str() {
        "simulate" => Job::Simulate(config()?),
        "oracle-check" => Job::OracleCheck(config()?),
        "property-check" => Job::PropertyCheck(config()?, manifest.trials.unwrap_or(0)),
        "sweep" => Job::Sweep(config()?),
        "fit" => {
            let input = manifest
                .inputs
                .first()
                .ok_or_else(|| CliError::new(exit::CONFIG, "manifest error: fit input missing"))?;
            let bytes = fs::read(&input.path)?;
            if hex_digest(&bytes) != input.sha256 {
                eprintln!("input {} changed since the recorded run", input.path);
                return Ok(exit::REPLAY_MISMATCH);
            }
            Job::Fit(PathBuf::from(&input.path))
        }
        other => {
            return Err(CliError::new(exit::CONFIG, format!("manifest error: unknown subcommand {other:?}")))
        }
    };
    let out_dir = match &args.out_dir {
        Some(d) => d.clone(),
        None => args.manifest.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    let again = execute(&job, &out_dir, None, rule)?;
    let mut same = again.exit_code == manifest.exit_code && again.outputs.len() == manifest.outputs.len();
    for rec in &manifest.outputs {
        let now = again.outputs.iter().find(|r| r.path == rec.path);
        let status = match now {
            Some(r) if r.sha256 == rec.sha256 => "identical",
            Some(_) => "differs",
            None => "missing",
        };
        same &= status == "identical";
        println!("{}: {status}", rec.path);
    }
    if same {
        println!("replay reproduced {} outputs", manifest.outputs.len());
        Ok(exit::OK)
    } else {
        eprintln!("replay mismatch");
        Ok(exit::REPLAY_MISMATCH)
    }
}
