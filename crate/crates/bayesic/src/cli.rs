//! Command-line front end: argument parsing, config-file merging, dataset
//! ingestion, experiment dispatch, and bit-exact CSV emission.
//!
//! Settings resolve as defaults < `BAYESIC_SEED` (seed only) < config file
//! < flags. The config file is flat `key = value` text, one pair per line,
//! with `#` comments; keys match the long flag names.
//!
//! Exit codes: 0 success, 1 I/O or data error, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::criteria::{self, CriterionKind};
use crate::limits::{limit_geometric, limit_laplace, limit_normal};
use crate::models::{ModelSpec, ObservedSample};
use crate::posterior::{power_posterior, BetaSchedule, DEFAULT_NODES_2D};
use crate::simulate::{
    summarize, ConsistencyConfig, DicGeometricConfig, ExperimentConfig, LaplaceConfig, RunRecord,
    SummaryRow, WbicNormalConfig, DEFAULT_SEED,
};
use crate::{Error, Result};

/// Exact header of the record CSV schema.
pub const CSV_HEADER: &str =
    "experiment,model,criterion,schedule,theta0,alpha,beta,n,replicate,seed,value,limit,abs_error";

const SUMMARY_HEADER: &str =
    "experiment,criterion,schedule,n,count,median_value,median_abs_error,min_value,max_value";

/// Render a float with 17 significant digits, enough to round-trip f64
/// bitwise.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Parser, Debug)]
#[command(
    name = "bayesic",
    version,
    about = "Bayesian model-evaluation criteria (DIC, BPIC, WBIC), their large-sample limits, \
             and reproducible convergence experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub globals: GlobalOpts,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Master RNG seed (default: $BAYESIC_SEED, else 42)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Replicates per experiment cell
    #[arg(long, global = true)]
    pub replicates: Option<u32>,

    /// Comma-separated, strictly increasing sample sizes
    #[arg(long = "n-grid", global = true, value_name = "N1,N2,...")]
    pub n_grid: Option<String>,

    /// Write CSV here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Flat key = value config file (defaults < config < flags)
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Bound worker parallelism
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Report n·DIC, n·BPIC, and n·WBIC/2 (the original sum-scale
    /// conventions) instead of per-observation values
    #[arg(long = "rescale-n", global = true)]
    pub rescale_n: bool,

    /// Emit the grouped summary table instead of raw records
    #[arg(long, global = true)]
    pub summarize: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a replicated experiment and emit CSV records
    Simulate {
        #[command(subcommand)]
        experiment: Experiment,
    },
    /// Evaluate DIC, BPIC, and WBIC on a dataset
    Criteria(CriteriaArgs),
    /// Print the theoretical large-sample limit of the criteria
    Limits(LimitsArgs),
    /// Shorthand for `simulate consistency`
    Consistency(ConsistencyArgs),
}

#[derive(Subcommand, Debug)]
pub enum Experiment {
    /// Geometric-model DIC convergence over a (θ₀, α, β) grid
    DicGeometric(DicGeometricArgs),
    /// Normal-model WBIC under the six temperature schedules
    WbicNormal(WbicNormalArgs),
    /// Laplace-model criteria by grid quadrature on a box
    Laplace(LaplaceArgs),
    /// Power-posterior ball-mass consistency curves
    Consistency(ConsistencyArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct DicGeometricArgs {
    /// Comma-separated true θ₀ values in (0, 1)
    #[arg(long, value_name = "T1,T2,...")]
    pub theta0: Option<String>,
    /// Comma-separated Beta-prior α values
    #[arg(long, value_name = "A1,A2,...")]
    pub alphas: Option<String>,
    /// Comma-separated Beta-prior β values
    #[arg(long, value_name = "B1,B2,...")]
    pub betas: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct WbicNormalArgs {
    /// True mean of the N(θ₀, 1) data
    #[arg(long)]
    pub theta0: Option<f64>,
    /// Comma-separated schedule names (inv-log-n, inv-log-log-n, one,
    /// inv-sqrt-n, inv-n, inv-n-log-n)
    #[arg(long, value_name = "S1,S2,...")]
    pub schedules: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct LaplaceArgs {
    /// DGP location μ*
    #[arg(long = "mu-star")]
    pub mu_star: Option<f64>,
    /// DGP scale b*
    #[arg(long = "b-star")]
    pub b_star: Option<f64>,
    /// Parameter box as m,s (θ ∈ [−m,m] × [1/s,s])
    #[arg(long = "box", value_name = "M,S")]
    pub box_: Option<String>,
    /// Grid nodes per axis
    #[arg(long, value_name = "N1,N2")]
    pub nodes: Option<String>,
    /// WBIC temperature schedule
    #[arg(long)]
    pub schedule: Option<String>,
    /// Comma-separated subset of wbic,bpic,dic
    #[arg(long, value_name = "C1,C2,...")]
    pub criteria: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ConsistencyArgs {
    /// Ball radius ε
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Comma-separated growth-satisfying schedules
    #[arg(long, value_name = "S1,S2,...")]
    pub schedules: Option<String>,
    /// Geometric DGP θ₀
    #[arg(long = "theta0-geometric")]
    pub theta0_geometric: Option<f64>,
    /// Normal DGP mean
    #[arg(long = "theta0-normal")]
    pub theta0_normal: Option<f64>,
    /// Also record Gibbs and η-rescaled (k = 0) grid variants
    #[arg(long = "include-gibbs")]
    pub include_gibbs: bool,
}

#[derive(Args, Debug, Clone)]
pub struct CriteriaArgs {
    /// Likelihood family
    #[arg(long, value_parser = ["geometric", "normal", "laplace"])]
    pub model: String,
    /// CSV dataset, one observation per row
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// WBIC schedule (default inv-log-n)
    #[arg(long)]
    pub schedule: Option<String>,
    /// Beta-prior α (geometric)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Beta-prior β (geometric)
    #[arg(long)]
    pub beta: Option<f64>,
    /// Comma-separated prior mean (normal; default zeros)
    #[arg(long = "prior-mean", value_name = "M1,M2,...")]
    pub prior_mean: Option<String>,
    /// Parameter box as m,s (Laplace; default 4,8)
    #[arg(long = "box", value_name = "M,S")]
    pub box_: Option<String>,
    /// Grid nodes per axis (Laplace; default 256,256)
    #[arg(long, value_name = "N1,N2")]
    pub nodes: Option<String>,
    /// First data row is a header
    #[arg(long)]
    pub header: bool,
}

#[derive(Args, Debug, Clone)]
pub struct LimitsArgs {
    /// Likelihood family
    #[arg(long, value_parser = ["geometric", "normal", "laplace"])]
    pub model: String,
    /// key=value pairs: geometric `ex=` or `theta0=`; normal `mean=` (use
    /// `;` between coordinates) or `p=,e-norm-sq=,norm-e-sq=`; laplace
    /// `gamma0=`
    #[arg(long, value_name = "K=V,K=V,...")]
    pub params: String,
}

/// Entry point shared by the binary and the tests; returns the process exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Data(_) => 1,
                _ => 2,
            }
        }
    }
}

// Settings after merging defaults, environment, config file, and flags.
struct Resolved {
    seed: u64,
    replicates: Option<u32>,
    n_grid: Option<Vec<u64>>,
    out: Option<PathBuf>,
    jobs: Option<usize>,
    rescale_n: bool,
    summarize: bool,
    cfg: BTreeMap<String, String>,
}

fn dispatch(cli: Cli) -> Result<()> {
    let resolved = resolve(&cli.globals)?;
    match cli.command {
        Command::Simulate { experiment } => cmd_simulate(experiment, &resolved),
        Command::Consistency(args) => cmd_simulate(Experiment::Consistency(args), &resolved),
        Command::Criteria(args) => cmd_criteria(&args, &resolved),
        Command::Limits(args) => cmd_limits(&args, &resolved),
    }
}

/// Parse a flat `key = value` config file with `#` comments. Keys are
/// normalized so `n-grid` and `n_grid` are interchangeable.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let content = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (i, raw) in content.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Argument(format!(
                "config line {}: expected `key = value`, got `{raw}`",
                i + 1
            )));
        };
        map.insert(normalize_key(key.trim()), value.trim().to_string());
    }
    Ok(map)
}

fn normalize_key(key: &str) -> String {
    key.to_ascii_lowercase().replace('_', "-")
}

fn resolve(globals: &GlobalOpts) -> Result<Resolved> {
    let cfg = match &globals.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let seed = match globals.seed {
        Some(s) => s,
        None => match cfg.get("seed") {
            Some(v) => parse_scalar::<u64>("seed", v)?,
            None => match std::env::var("BAYESIC_SEED") {
                Ok(v) => parse_scalar::<u64>("BAYESIC_SEED", &v)?,
                Err(_) => DEFAULT_SEED,
            },
        },
    };
    let replicates = match globals.replicates {
        Some(r) => Some(r),
        None => cfg
            .get("replicates")
            .map(|v| parse_scalar::<u32>("replicates", v))
            .transpose()?,
    };
    let n_grid = match &globals.n_grid {
        Some(s) => Some(parse_u64_list("n-grid", s)?),
        None => cfg
            .get("n-grid")
            .map(|v| parse_u64_list("n-grid", v))
            .transpose()?,
    };
    let jobs = match globals.jobs {
        Some(j) => Some(j),
        None => cfg
            .get("jobs")
            .map(|v| parse_scalar::<usize>("jobs", v))
            .transpose()?,
    };
    if jobs == Some(0) {
        return Err(Error::Argument("--jobs must be ≥ 1".into()));
    }
    let out = globals
        .out
        .clone()
        .or_else(|| cfg.get("out").map(PathBuf::from));
    let rescale_n = globals.rescale_n || cfg_flag(&cfg, "rescale-n")?;
    let summarize = globals.summarize || cfg_flag(&cfg, "summarize")?;
    Ok(Resolved {
        seed,
        replicates,
        n_grid,
        out,
        jobs,
        rescale_n,
        summarize,
        cfg,
    })
}

fn cfg_flag(cfg: &BTreeMap<String, String>, key: &str) -> Result<bool> {
    match cfg.get(key).map(String::as_str) {
        None => Ok(false),
        Some("true" | "1" | "yes") => Ok(true),
        Some("false" | "0" | "no") => Ok(false),
        Some(v) => Err(Error::Argument(format!(
            "{key}: expected a boolean, got `{v}`"
        ))),
    }
}

fn parse_scalar<T: std::str::FromStr>(flag: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Argument(format!("{flag}: invalid value `{value}`")))
}

fn parse_f64_list(flag: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|v| parse_scalar::<f64>(flag, v))
        .collect()
}

fn parse_u64_list(flag: &str, value: &str) -> Result<Vec<u64>> {
    value
        .split(',')
        .map(|v| parse_scalar::<u64>(flag, v))
        .collect()
}

fn parse_schedules(flag: &str, value: &str) -> Result<Vec<BetaSchedule>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<BetaSchedule>()
                .map_err(|e| Error::Argument(format!("{flag}: {e}")))
        })
        .collect()
}

fn parse_criteria_list(flag: &str, value: &str) -> Result<Vec<CriterionKind>> {
    value
        .split(',')
        .map(|v| match v.trim() {
            "dic" => Ok(CriterionKind::Dic),
            "bpic" => Ok(CriterionKind::Bpic),
            "wbic" => Ok(CriterionKind::Wbic),
            other => Err(Error::Argument(format!(
                "{flag}: expected dic, bpic, or wbic, got `{other}`"
            ))),
        })
        .collect()
}

fn parse_pair(flag: &str, value: &str) -> Result<(f64, f64)> {
    let parts = parse_f64_list(flag, value)?;
    if parts.len() != 2 {
        return Err(Error::Argument(format!(
            "{flag}: expected two values, got `{value}`"
        )));
    }
    Ok((parts[0], parts[1]))
}

fn parse_nodes(flag: &str, value: &str) -> Result<[usize; 2]> {
    let parts: Vec<usize> = value
        .split(',')
        .map(|v| parse_scalar::<usize>(flag, v))
        .collect::<Result<_>>()?;
    if parts.len() != 2 {
        return Err(Error::Argument(format!("{flag}: expected two node counts")));
    }
    Ok([parts[0], parts[1]])
}

// Fetch an experiment option from the config file unless the flag supplied
// it.
fn cfg_opt<'a>(
    flag_value: Option<&'a str>,
    cfg: &'a BTreeMap<String, String>,
    key: &str,
) -> Option<&'a str> {
    flag_value.or_else(|| cfg.get(key).map(String::as_str))
}

fn build_experiment_config(exp: &Experiment, r: &Resolved) -> Result<ExperimentConfig> {
    Ok(match exp {
        Experiment::DicGeometric(a) => {
            let mut c = DicGeometricConfig {
                seed: r.seed,
                ..Default::default()
            };
            if let Some(v) = cfg_opt(a.theta0.as_deref(), &r.cfg, "theta0") {
                c.theta0_grid = parse_f64_list("theta0", v)?;
            }
            if let Some(v) = cfg_opt(a.alphas.as_deref(), &r.cfg, "alphas") {
                c.alphas = parse_f64_list("alphas", v)?;
            }
            if let Some(v) = cfg_opt(a.betas.as_deref(), &r.cfg, "betas") {
                c.betas = parse_f64_list("betas", v)?;
            }
            if let Some(n) = &r.n_grid {
                c.n_grid = n.clone();
            }
            if let Some(k) = r.replicates {
                c.replicates = k;
            }
            ExperimentConfig::DicGeometric(c)
        }
        Experiment::WbicNormal(a) => {
            let mut c = WbicNormalConfig {
                seed: r.seed,
                ..Default::default()
            };
            if let Some(v) = a.theta0 {
                c.theta0 = v;
            } else if let Some(v) = r.cfg.get("theta0") {
                c.theta0 = parse_scalar("theta0", v)?;
            }
            if let Some(v) = cfg_opt(a.schedules.as_deref(), &r.cfg, "schedules") {
                c.schedules = parse_schedules("schedules", v)?;
            }
            if let Some(n) = &r.n_grid {
                c.n_grid = n.clone();
            }
            if let Some(k) = r.replicates {
                c.replicates = k;
            }
            ExperimentConfig::WbicNormal(c)
        }
        Experiment::Laplace(a) => {
            let mut c = LaplaceConfig {
                seed: r.seed,
                ..Default::default()
            };
            if let Some(v) = a.mu_star {
                c.location = v;
            } else if let Some(v) = r.cfg.get("mu-star") {
                c.location = parse_scalar("mu-star", v)?;
            }
            if let Some(v) = a.b_star {
                c.scale = v;
            } else if let Some(v) = r.cfg.get("b-star") {
                c.scale = parse_scalar("b-star", v)?;
            }
            if let Some(v) = cfg_opt(a.box_.as_deref(), &r.cfg, "box") {
                let (m, s) = parse_pair("box", v)?;
                c.box_m = m;
                c.box_s = s;
            }
            if let Some(v) = cfg_opt(a.nodes.as_deref(), &r.cfg, "nodes") {
                c.nodes = parse_nodes("nodes", v)?;
            }
            if let Some(v) = cfg_opt(a.schedule.as_deref(), &r.cfg, "schedule") {
                c.schedule = v
                    .parse::<BetaSchedule>()
                    .map_err(|e| Error::Argument(format!("schedule: {e}")))?;
            }
            if let Some(v) = cfg_opt(a.criteria.as_deref(), &r.cfg, "criteria") {
                c.criteria = parse_criteria_list("criteria", v)?;
            }
            if let Some(n) = &r.n_grid {
                c.n_grid = n.clone();
            }
            if let Some(k) = r.replicates {
                c.replicates = k;
            }
            ExperimentConfig::Laplace(c)
        }
        Experiment::Consistency(a) => {
            let mut c = ConsistencyConfig {
                seed: r.seed,
                ..Default::default()
            };
            if let Some(v) = a.epsilon {
                c.epsilon = v;
            } else if let Some(v) = r.cfg.get("epsilon") {
                c.epsilon = parse_scalar("epsilon", v)?;
            }
            if let Some(v) = cfg_opt(a.schedules.as_deref(), &r.cfg, "schedules") {
                c.schedules = parse_schedules("schedules", v)?;
            }
            if let Some(v) = a.theta0_geometric {
                c.geometric_theta0 = v;
            } else if let Some(v) = r.cfg.get("theta0-geometric") {
                c.geometric_theta0 = parse_scalar("theta0-geometric", v)?;
            }
            if let Some(v) = a.theta0_normal {
                c.normal_theta0 = v;
            } else if let Some(v) = r.cfg.get("theta0-normal") {
                c.normal_theta0 = parse_scalar("theta0-normal", v)?;
            }
            c.include_gibbs = a.include_gibbs || cfg_flag(&r.cfg, "include-gibbs")?;
            if let Some(n) = &r.n_grid {
                c.n_grid = n.clone();
            }
            if let Some(k) = r.replicates {
                c.replicates = k;
            }
            ExperimentConfig::Consistency(c)
        }
    })
}

fn with_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::Config(format!("failed to build worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn cmd_simulate(exp: Experiment, r: &Resolved) -> Result<()> {
    let config = build_experiment_config(&exp, r)?;
    let mut records = with_pool(r.jobs, || config.run())??;
    if r.rescale_n {
        rescale_records(&mut records);
    }
    if r.summarize {
        let rows = summarize(&records)?;
        write_output(&summary_to_csv_string(&rows), r.out.as_deref())
    } else {
        emit_records(&records, r.out.as_deref())
    }
}

/// Multiply reported criteria by n (DIC, BPIC) or n/2 (WBIC), the original
/// sum-scale conventions; limits rescale consistently and abs_error is
/// recomputed. Ball-mass records are untouched.
pub fn rescale_records(records: &mut [RunRecord]) {
    for r in records.iter_mut() {
        let factor = match r.criterion {
            "dic" | "dic-exact" | "dic-approx" | "bpic" => r.n as f64,
            "wbic" => r.n as f64 / 2.0,
            _ => continue,
        };
        r.value *= factor;
        r.limit *= factor;
        r.abs_error = (r.value - r.limit).abs();
    }
}

/// Serialize records to the pinned CSV schema (LF line endings, 17
/// significant digits).
pub fn records_to_csv_string(records: &[RunRecord]) -> String {
    let mut s = String::with_capacity(128 * (records.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        let theta0 = r
            .theta0
            .iter()
            .map(|v| format_float(*v))
            .collect::<Vec<_>>()
            .join(";");
        let schedule = r.schedule.map_or("-".to_string(), |x| x.name().to_string());
        let alpha = r.alpha.map_or("-".to_string(), format_float);
        let beta = r.beta.map_or("-".to_string(), format_float);
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.model,
            r.criterion,
            schedule,
            theta0,
            alpha,
            beta,
            r.n,
            r.replicate,
            r.seed,
            format_float(r.value),
            format_float(r.limit),
            format_float(r.abs_error),
        ));
    }
    s
}

/// Write records as CSV to the path, or stdout when no path is given.
pub fn emit_records(records: &[RunRecord], out: Option<&Path>) -> Result<()> {
    write_output(&records_to_csv_string(records), out)
}

fn summary_to_csv_string(rows: &[SummaryRow]) -> String {
    let mut s = String::new();
    s.push_str(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let schedule = r.schedule.map_or("-".to_string(), |x| x.name().to_string());
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.criterion,
            schedule,
            r.n,
            r.count,
            format_float(r.median_value),
            format_float(r.median_abs_error),
            format_float(r.min_value),
            format_float(r.max_value),
        ));
    }
    s
}

fn write_output(content: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).map_err(Error::from),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

/// Parse a pinned-schema CSV back into records (fields round-trip bitwise).
pub fn parse_records_csv(content: &str) -> Result<Vec<RunRecord>> {
    let mut lines = content.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Data(format!("unexpected CSV header: {other:?}")));
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 13 {
            return Err(Error::Data(format!("row {}: expected 13 fields", i + 2)));
        }
        let opt_f64 = |s: &str, name: &str| -> Result<Option<f64>> {
            if s == "-" {
                Ok(None)
            } else {
                Ok(Some(
                    parse_scalar::<f64>(name, s).map_err(|e| Error::Data(e.to_string()))?,
                ))
            }
        };
        let theta0 = f[4]
            .split(';')
            .map(|v| parse_scalar::<f64>("theta0", v).map_err(|e| Error::Data(e.to_string())))
            .collect::<Result<Vec<f64>>>()?;
        let schedule = if f[3] == "-" {
            None
        } else {
            Some(
                f[3].parse::<BetaSchedule>()
                    .map_err(|e| Error::Data(e.to_string()))?,
            )
        };
        records.push(RunRecord {
            experiment: intern(
                f[0],
                &["dic-geometric", "wbic-normal", "laplace", "consistency"],
            )?,
            model: intern(f[1], &["geometric", "normal", "laplace"])?,
            criterion: intern(
                f[2],
                &[
                    "dic",
                    "dic-exact",
                    "dic-approx",
                    "bpic",
                    "wbic",
                    "ball-mass",
                    "ball-mass-gibbs",
                    "ball-mass-eta0",
                ],
            )?,
            schedule,
            theta0,
            alpha: opt_f64(f[5], "alpha")?,
            beta: opt_f64(f[6], "beta")?,
            n: parse_scalar::<u64>("n", f[7]).map_err(|e| Error::Data(e.to_string()))?,
            replicate: parse_scalar::<u32>("replicate", f[8])
                .map_err(|e| Error::Data(e.to_string()))?,
            seed: parse_scalar::<u64>("seed", f[9]).map_err(|e| Error::Data(e.to_string()))?,
            value: parse_scalar::<f64>("value", f[10]).map_err(|e| Error::Data(e.to_string()))?,
            limit: parse_scalar::<f64>("limit", f[11]).map_err(|e| Error::Data(e.to_string()))?,
            abs_error: parse_scalar::<f64>("abs_error", f[12])
                .map_err(|e| Error::Data(e.to_string()))?,
        });
    }
    Ok(records)
}

fn intern(value: &str, known: &[&'static str]) -> Result<&'static str> {
    known
        .iter()
        .find(|k| **k == value)
        .copied()
        .ok_or_else(|| Error::Data(format!("unknown field value `{value}`")))
}

/// Which per-row validation a dataset gets on ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Geometric,
    Normal,
    Laplace,
}

/// Read a CSV dataset (one observation per row) into a validated sample.
pub fn ingest_csv(path: &Path, kind: DataKind, has_header: bool) -> Result<ObservedSample> {
    let content = fs::read_to_string(path)?;
    ingest_csv_str(&content, kind, has_header)
}

/// As [`ingest_csv`], from an in-memory string.
pub fn ingest_csv_str(content: &str, kind: DataKind, has_header: bool) -> Result<ObservedSample> {
    let mut values = Vec::new();
    let mut q: Option<usize> = None;
    for (i, raw) in content.lines().enumerate() {
        let row_no = i + 1;
        if has_header && i == 0 {
            continue;
        }
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match q {
            None => {
                if kind != DataKind::Normal && fields.len() != 1 {
                    return Err(Error::Data(format!(
                        "row {row_no}: expected one column, found {}",
                        fields.len()
                    )));
                }
                q = Some(fields.len());
            }
            Some(q) if fields.len() != q => {
                return Err(Error::Data(format!(
                    "row {row_no}: expected {q} columns, found {}",
                    fields.len()
                )));
            }
            _ => {}
        }
        for field in &fields {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Data(format!("row {row_no}: cannot parse `{field}` as a number"))
            })?;
            if kind == DataKind::Geometric && !(v >= 0.0 && v.fract() == 0.0) {
                return Err(Error::Data(format!(
                    "row {row_no}: geometric data must be non-negative integers, got `{field}`"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "row {row_no}: non-finite value `{field}`"
                )));
            }
            values.push(v);
        }
    }
    let Some(q) = q else {
        return Err(Error::Data("dataset contains no data rows".into()));
    };
    ObservedSample::multivariate(values, q).map_err(|e| Error::Data(e.to_string()))
}

fn cmd_criteria(args: &CriteriaArgs, r: &Resolved) -> Result<()> {
    let kind = match args.model.as_str() {
        "geometric" => DataKind::Geometric,
        "normal" => DataKind::Normal,
        _ => DataKind::Laplace,
    };
    let sample = ingest_csv(&args.data, kind, args.header)?;
    let n = sample.len() as u64;

    let schedule = match cfg_opt(args.schedule.as_deref(), &r.cfg, "schedule") {
        Some(v) => v
            .parse::<BetaSchedule>()
            .map_err(|e| Error::Argument(format!("schedule: {e}")))?,
        None => BetaSchedule::InvLogN,
    };

    let (model, nodes) = match kind {
        DataKind::Geometric => {
            let alpha = args.alpha.unwrap_or(1.0);
            let beta = args.beta.unwrap_or(1.0);
            (ModelSpec::geometric(alpha, beta)?, DEFAULT_NODES_2D)
        }
        DataKind::Normal => {
            let mean = match &args.prior_mean {
                Some(v) => parse_f64_list("prior-mean", v)?,
                None => vec![0.0; sample.dim()],
            };
            if mean.len() != sample.dim() {
                return Err(Error::Argument(format!(
                    "prior-mean has {} coordinates but the data has {}",
                    mean.len(),
                    sample.dim()
                )));
            }
            (ModelSpec::normal(mean)?, DEFAULT_NODES_2D)
        }
        DataKind::Laplace => {
            let (m, s) = match &args.box_ {
                Some(v) => parse_pair("box", v)?,
                None => (4.0, 8.0),
            };
            let nodes = match &args.nodes {
                Some(v) => parse_nodes("nodes", v)?,
                None => DEFAULT_NODES_2D,
            };
            (ModelSpec::laplace(m, s)?, nodes)
        }
    };

    let beta_n = schedule.evaluate(n)?;
    let (dic_v, bpic_v, wbic_v) = if kind == DataKind::Laplace {
        (
            criteria::laplace_criteria(&model, &sample, CriterionKind::Dic, 1.0, nodes)?,
            criteria::laplace_criteria(&model, &sample, CriterionKind::Bpic, 1.0, nodes)?,
            criteria::laplace_criteria(&model, &sample, CriterionKind::Wbic, beta_n, nodes)?,
        )
    } else {
        let post = power_posterior(&model, &sample, 1.0)?;
        (
            criteria::dic(&model, &sample, &post)?,
            criteria::bpic(&model, &sample, &post)?,
            criteria::wbic(&model, &sample, schedule)?,
        )
    };

    let mut out = String::from("criterion,n,beta_n,value,method\n");
    for cv in [&dic_v, &bpic_v, &wbic_v] {
        let value = if r.rescale_n {
            match cv.kind {
                CriterionKind::Wbic => cv.value * n as f64 / 2.0,
                _ => cv.value * n as f64,
            }
        } else {
            cv.value
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            cv.kind.name(),
            cv.n,
            format_float(cv.beta_n),
            format_float(value),
            cv.method.name(),
        ));
    }
    write_output(&out, r.out.as_deref())
}

fn cmd_limits(args: &LimitsArgs, r: &Resolved) -> Result<()> {
    let mut params = BTreeMap::new();
    for pair in args.params.split(',') {
        let Some((k, v)) = pair.split_once('=') else {
            return Err(Error::Argument(format!(
                "params: expected key=value, got `{pair}`"
            )));
        };
        params.insert(normalize_key(k.trim()), v.trim().to_string());
    }
    let get = |key: &str| params.get(key).map(String::as_str);
    let limit = match args.model.as_str() {
        "geometric" => {
            let ex = match (get("ex"), get("theta0")) {
                (Some(v), _) => parse_scalar::<f64>("ex", v)?,
                (None, Some(v)) => {
                    let t = parse_scalar::<f64>("theta0", v)?;
                    if !(t > 0.0 && t < 1.0) {
                        return Err(Error::Argument(format!(
                            "theta0 must lie in (0, 1), got {t}"
                        )));
                    }
                    (1.0 - t) / t
                }
                (None, None) => {
                    return Err(Error::Argument(
                        "geometric limit needs params ex= or theta0=".into(),
                    ))
                }
            };
            limit_geometric(ex)?
        }
        "normal" => match get("mean") {
            Some(v) => {
                let mean: Vec<f64> = v
                    .split(';')
                    .map(|x| parse_scalar::<f64>("mean", x))
                    .collect::<Result<_>>()?;
                let p = mean.len();
                let norm_e_sq: f64 = mean.iter().map(|m| m * m).sum();
                limit_normal(p, norm_e_sq + p as f64, norm_e_sq)?
            }
            None => {
                let (Some(p), Some(ensq), Some(nesq)) =
                    (get("p"), get("e-norm-sq"), get("norm-e-sq"))
                else {
                    return Err(Error::Argument(
                        "normal limit needs params mean= or p=,e-norm-sq=,norm-e-sq=".into(),
                    ));
                };
                limit_normal(
                    parse_scalar::<usize>("p", p)?,
                    parse_scalar::<f64>("e-norm-sq", ensq)?,
                    parse_scalar::<f64>("norm-e-sq", nesq)?,
                )?
            }
        },
        _ => {
            let Some(g) = get("gamma0") else {
                return Err(Error::Argument("laplace limit needs params gamma0=".into()));
            };
            limit_laplace(parse_scalar::<f64>("gamma0", g)?)?
        }
    };
    write_output(
        &format!("{}\n", format_float(limit.value)),
        r.out.as_deref(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_args_examples() {
        let cli =
            Cli::try_parse_from(["bayesic", "simulate", "dic-geometric", "--seed", "42"]).unwrap();
        assert_eq!(cli.globals.seed, Some(42));
        assert!(matches!(
            cli.command,
            Command::Simulate {
                experiment: Experiment::DicGeometric(_)
            }
        ));

        let cli = Cli::try_parse_from([
            "bayesic",
            "simulate",
            "wbic-normal",
            "--schedules",
            "inv-log-n,inv-n",
        ])
        .unwrap();
        if let Command::Simulate {
            experiment: Experiment::WbicNormal(a),
        } = &cli.command
        {
            let schedules = parse_schedules("schedules", a.schedules.as_deref().unwrap()).unwrap();
            assert_eq!(schedules, vec![BetaSchedule::InvLogN, BetaSchedule::InvN]);
        } else {
            panic!("wrong command");
        }

        assert!(Cli::try_parse_from(["bayesic", "bogus"]).is_err());
        assert!(Cli::try_parse_from(["bayesic", "simulate", "dic-geometric", "--wat"]).is_err());
    }

    #[test]
    fn ingest_examples() {
        let s = ingest_csv_str("0\n3\n1\n", DataKind::Geometric, false).unwrap();
        assert_eq!(s.len(), 3);
        assert!((s.mean_scalar() - 4.0 / 3.0).abs() < 1e-15);

        let s = ingest_csv_str("1.0,2.0\n0.0,0.0\n", DataKind::Normal, false).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dim(), 2);

        let err = ingest_csv_str("-1\n", DataKind::Geometric, false).unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");

        let err = ingest_csv_str("x\n", DataKind::Laplace, false).unwrap_err();
        assert!(err.to_string().contains("row 1"));

        // Scalar families reject multi-column rows; all families reject
        // ragged rows.
        assert!(ingest_csv_str("1,2\n", DataKind::Geometric, false).is_err());
        let err = ingest_csv_str("1.0,2.0\n3.0\n", DataKind::Normal, false).unwrap_err();
        assert!(err.to_string().contains("row 2"));

        assert!(ingest_csv_str("", DataKind::Normal, false).is_err());
        assert!(ingest_csv_str("value\n", DataKind::Normal, true).is_err());

        // Header skipping.
        let s = ingest_csv_str("x\n2\n", DataKind::Geometric, true).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn records_round_trip_bitwise() {
        let records = vec![RunRecord {
            experiment: "wbic-normal",
            model: "normal",
            criterion: "wbic",
            schedule: Some(BetaSchedule::InvLogN),
            theta0: vec![1.0],
            alpha: None,
            beta: None,
            n: 1000,
            replicate: 3,
            seed: 0x1234_5678_9abc_def0,
            value: 0.1 + 0.2,
            limit: std::f64::consts::PI,
            abs_error: (0.1f64 + 0.2 - std::f64::consts::PI).abs(),
        }];
        let csv = records_to_csv_string(&records);
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.ends_with('\n'));
        let parsed = parse_records_csv(&csv).unwrap();
        assert_eq!(parsed, records);
        assert_eq!(parsed[0].value.to_bits(), records[0].value.to_bits());
    }

    #[test]
    fn empty_record_list_is_header_only() {
        let csv = records_to_csv_string(&[]);
        assert_eq!(csv, format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn config_file_parsing() {
        let dir = std::env::temp_dir().join("bayesic-cli-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("config.txt");
        fs::write(
            &path,
            "# experiment manifest\nseed = 7\nn_grid = 10,100\nreplicates=2 # inline\n",
        )
        .unwrap();
        let map = parse_config_file(&path).unwrap();
        assert_eq!(map.get("seed").unwrap(), "7");
        assert_eq!(map.get("n-grid").unwrap(), "10,100");
        assert_eq!(map.get("replicates").unwrap(), "2");

        fs::write(&path, "not a pair\n").unwrap();
        assert!(parse_config_file(&path).is_err());
    }

    #[test]
    fn rescale_applies_per_criterion() {
        let mut records = vec![
            RunRecord {
                experiment: "wbic-normal",
                model: "normal",
                criterion: "wbic",
                schedule: Some(BetaSchedule::One),
                theta0: vec![1.0],
                alpha: None,
                beta: None,
                n: 10,
                replicate: 0,
                seed: 0,
                value: 3.0,
                limit: 2.0,
                abs_error: 1.0,
            },
            RunRecord {
                experiment: "consistency",
                model: "normal",
                criterion: "ball-mass",
                schedule: Some(BetaSchedule::One),
                theta0: vec![1.0],
                alpha: None,
                beta: None,
                n: 10,
                replicate: 0,
                seed: 0,
                value: 0.5,
                limit: 1.0,
                abs_error: 0.5,
            },
        ];
        rescale_records(&mut records);
        assert_eq!(records[0].value, 15.0); // n/2 · WBIC
        assert_eq!(records[0].limit, 10.0);
        assert_eq!(records[0].abs_error, 5.0);
        assert_eq!(records[1].value, 0.5); // ball masses untouched
    }

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(format_float(0.5), "5.0000000000000000e-1");
        let x = 0.1f64 + 0.2;
        let parsed: f64 = format_float(x).parse().unwrap();
        assert_eq!(parsed.to_bits(), x.to_bits());
    }
}
