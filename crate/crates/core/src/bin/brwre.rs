use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use brwre::config::{parse_config, parse_initial, ConfigError, LoadedConfig};
use brwre::experiments::{
    default_catalog, diagnostics, fkg_suite, rho_sweep, simulate, survival_probability, CurvePoint,
    FkgParams, Functional, ReplicaOutcome, Sampling, SurvivalParams, SweepParams,
};
use brwre::polymer::{free_energy, log_partition_series, FreeEnergyMethod};
use brwre::renorm::{block_event_probability, BlockEventSpec};
use brwre::stats::McEstimate;
use brwre::{Configuration, Error, QuenchedEnvironment, RunSpec, TruncationBox};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  configuration or usage error (unreadable file, parse error, unknown key, malformed law)
  2  the law has a zero-mean component, so E[1/m] is infinite
  3  the law is degenerate: no component can die or none can branch
  4  runtime error (domain error, coupling violation, I/O failure)";

#[derive(Parser)]
#[command(name = "brwre", version, about = "Branching random walks in random environment", after_help = EXIT_CODES)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Environment and run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of replicas; overrides the config.
    #[arg(long, global = true)]
    replicas: Option<usize>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for CSV tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run even if the law fails validation.
    #[arg(long, global = true)]
    allow_invalid: bool,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// `origin`, `diamond:n`, or `x1,..,xd:count;...`.
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    horizon: Option<u32>,
    #[arg(long)]
    cap: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the environment law and print the report.
    Validate,
    /// Independent runs; one CSV row per replica.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Truncation box half-width, or `none`.
        #[arg(long = "box", default_value = "none")]
        truncation: String,
    },
    /// log Z_t for the environment with seed `--seed`.
    Polymer {
        #[arg(long)]
        t: Option<u32>,
    },
    /// Free-energy estimate from independent environments.
    FreeEnergy {
        #[arg(long)]
        t: Option<u32>,
        #[arg(long, value_enum)]
        method: Option<FreeEnergyMethod>,
    },
    /// Coupled survival sweep over rho.
    SweepRho {
        #[command(flatten)]
        run: RunArgs,
        /// Comma separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        rho: Option<Vec<f64>>,
        #[arg(long)]
        t_polymer: Option<u32>,
        #[arg(long)]
        polymer_replicas: Option<usize>,
    },
    /// Annealed survival probability.
    Survival {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Block event probability.
    BlockEvent {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long = "L")]
        l: Option<u32>,
        #[arg(long = "T")]
        t: Option<u32>,
        /// Per-site particle clip; 0 disables it.
        #[arg(long)]
        site_cap: Option<u64>,
    },
    /// Covariance test for monotone functionals.
    FkgTest {
        #[arg(long)]
        initial: Option<String>,
        #[arg(long)]
        t: Option<u32>,
        /// Functional such as `total`, `occupied`, `site:0`, `halfspace:1:2`, `capped:10:total`.
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
    },
    /// Growth, filling, radius and box-saturation curves.
    Diagnostics,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Simulate { .. } => "simulate",
            Command::Polymer { .. } => "polymer",
            Command::FreeEnergy { .. } => "free-energy",
            Command::SweepRho { .. } => "sweep-rho",
            Command::Survival { .. } => "survival",
            Command::BlockEvent { .. } => "block-event",
            Command::FkgTest { .. } => "fkg-test",
            Command::Diagnostics => "diagnostics",
        }
    }
}

enum Failure {
    Config(String),
    Hyp1(String),
    Hyp2(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Hyp1(_) => 2,
            Failure::Hyp2(_) => 3,
            Failure::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Hyp1(m) | Failure::Hyp2(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::MalformedLaw(_) => Failure::Config(e.to_string()),
            Error::Hyp1(_) | Error::ZeroMean { .. } => Failure::Hyp1(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Shared state of one invocation.
struct Ctx {
    loaded: LoadedConfig,
    seed: u64,
    replicas: usize,
    out: PathBuf,
    command: &'static str,
}

impl Ctx {
    fn dim(&self) -> usize {
        self.loaded.config.dimension
    }

    fn initial(&self, flag: &Option<String>) -> CliResult<Configuration> {
        let spec = flag.as_deref().unwrap_or(&self.loaded.config.initial);
        parse_initial(spec, self.dim()).map_err(|e| Failure::Config(e.to_string()))
    }

    fn survival_params(&self, run: &RunArgs) -> SurvivalParams {
        SurvivalParams {
            dim: self.dim(),
            horizon: run.horizon.unwrap_or(self.loaded.config.horizon),
            cap: run.cap.unwrap_or(self.loaded.config.cap),
            replicas: self.replicas,
            sampling: self.loaded.config.sampling,
        }
    }

    /// Writes `name` under the output directory with a seed metadata line.
    fn table(&self, name: &str, header: &str, rows: &str) -> CliResult<String> {
        fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        let body = format!("# seed={} command={}\n{header}\n{rows}", self.seed, self.command);
        fs::write(&path, body)?;
        Ok(path.display().to_string())
    }

    /// Writes the flattened numeric summary next to the other tables.
    fn summary_table(&self, summary: &Value) -> CliResult<String> {
        let mut rows = String::new();
        flatten("", summary, &mut rows);
        self.table(&format!("{}-summary.csv", self.command), "key,value", &rows)
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        Value::Number(n) => {
            let _ = writeln!(out, "{prefix},{n}");
        }
        Value::Bool(b) => {
            let _ = writeln!(out, "{prefix},{}", *b as u8);
        }
        _ => {}
    }
}

fn estimate_json(e: &McEstimate) -> Value {
    serde_json::to_value(e).expect("estimate serializes")
}

fn outcome_rows(outcomes: &[ReplicaOutcome]) -> String {
    let mut rows = String::new();
    for o in outcomes {
        let tau = o.tau.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            rows,
            "{},{},{},{},{}",
            o.replica, tau, o.capped as u8, o.final_total, o.final_occupied
        );
    }
    rows
}

const OUTCOME_HEADER: &str = "replica,tau,capped,final_total,final_occupied";

fn curve_rows(points: &[CurvePoint]) -> String {
    let mut rows = String::new();
    for p in points {
        let e = &p.estimate;
        let _ = writeln!(
            rows,
            "{},{},{},{},{},{}",
            p.x,
            e.mean,
            e.std_error,
            e.wilson_low.unwrap_or(f64::NAN),
            e.wilson_high.unwrap_or(f64::NAN),
            e.replicas
        );
    }
    rows
}

fn parse_box(s: &str) -> CliResult<TruncationBox> {
    if s == "none" {
        return Ok(TruncationBox::None);
    }
    s.parse::<i64>()
        .ok()
        .filter(|l| *l >= 0)
        .map(TruncationBox::CenteredCube)
        .ok_or_else(|| Failure::Config(format!("--box expects a nonnegative integer or `none`, got `{s}`")))
}

fn parse_functional(s: &str, dim: usize) -> CliResult<Functional> {
    let f: Functional = s.parse().map_err(|e: Error| Failure::Config(e.to_string()))?;
    f.check_dim(dim).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(f)
}

fn load(global: &Global) -> CliResult<LoadedConfig> {
    let path = global
        .config
        .as_ref()
        .ok_or_else(|| Failure::Config("--config is required".into()))?;
    parse_config(path).map_err(|e| match e {
        ConfigError::Io { .. } | ConfigError::Parse(_) | ConfigError::Invalid(_) => Failure::Config(e.to_string()),
    })
}

fn check_report(loaded: &LoadedConfig) -> CliResult<()> {
    let r = &loaded.report;
    let detail = r.messages.join("; ");
    if !r.hyp1_ok {
        return Err(Failure::Hyp1(detail));
    }
    if !r.hyp2_ok {
        return Err(Failure::Hyp2(detail));
    }
    Ok(())
}

fn run_command(ctx: &Ctx, command: &Command) -> CliResult<Value> {
    let cfg = &ctx.loaded.config;
    let law = &ctx.loaded.law;
    let dim = ctx.dim();
    let mut tables = Vec::new();
    let mut summary = match command {
        Command::Validate => json!({ "report": ctx.loaded.report }),
        Command::Simulate { run, truncation } => {
            let initial = ctx.initial(&run.initial)?;
            let params = ctx.survival_params(run);
            let spec = RunSpec::new(params.horizon)
                .cap(params.cap)
                .truncation(parse_box(truncation)?);
            let outcomes = simulate(law, &initial, &spec, &params, ctx.seed)?;
            tables.push(ctx.table("simulate.csv", OUTCOME_HEADER, &outcome_rows(&outcomes))?);
            let flags: Vec<bool> = outcomes.iter().map(|o| o.survived()).collect();
            json!({
                "parameters": { "horizon": params.horizon, "cap": params.cap, "box": truncation, "initial_total": initial.total() },
                "survival": estimate_json(&McEstimate::bernoulli(&flags)),
            })
        }
        Command::Polymer { t } => {
            let t = t.unwrap_or(cfg.polymer.t);
            if t == 0 {
                return Err(Failure::Config("--t must be at least 1".into()));
            }
            let env = QuenchedEnvironment::new(law.clone(), ctx.seed, dim)?;
            let (series, _) = log_partition_series(&env, t)?;
            let mut rows = String::new();
            for (u, v) in series.iter().enumerate() {
                let _ = writeln!(rows, "{},{v}", u + 1);
            }
            tables.push(ctx.table("polymer.csv", "t,log_z", &rows)?);
            json!({ "parameters": { "t": t }, "log_z": series[series.len() - 1] })
        }
        Command::FreeEnergy { t, method } => {
            let t = t.unwrap_or(cfg.polymer.t);
            let method = method.unwrap_or(cfg.polymer.method);
            let est = free_energy(law, dim, t, ctx.replicas, ctx.seed, method)?;
            let mut rows = String::new();
            for (i, (v, s)) in est.values.iter().zip(&est.seeds).enumerate() {
                let _ = writeln!(rows, "{i},{s},{v}");
            }
            tables.push(ctx.table("free-energy.csv", "replica,env_seed,value", &rows)?);
            json!({
                "parameters": { "t": t, "method": method },
                "psi_hat": est.psi_hat,
                "std_error": est.std_error,
            })
        }
        Command::SweepRho {
            run,
            rho,
            t_polymer,
            polymer_replicas,
        } => {
            let initial = ctx.initial(&run.initial)?;
            let base = ctx.survival_params(run);
            let grid = rho.clone().unwrap_or_else(|| cfg.sweep.rho.clone());
            let params = SweepParams {
                dim,
                horizon: base.horizon,
                cap: base.cap,
                replicas: ctx.replicas,
                t_polymer: t_polymer.unwrap_or(cfg.sweep.t_polymer),
                polymer_replicas: polymer_replicas.unwrap_or(cfg.sweep.polymer_replicas),
            };
            let res = rho_sweep(law, &initial, &grid, &params, ctx.seed)?;
            for w in &res.warnings {
                eprintln!("warning: {w}");
            }
            let mut rows = String::new();
            for (r, e) in res.rho_grid.iter().zip(&res.survival_proxy) {
                let _ = writeln!(
                    rows,
                    "{r},{},{},{}",
                    e.mean,
                    e.wilson_low.unwrap_or(f64::NAN),
                    e.wilson_high.unwrap_or(f64::NAN)
                );
            }
            tables.push(ctx.table("sweep-rho.csv", "rho,proxy,wilson_low,wilson_high", &rows)?);
            let mut long = String::new();
            for (i, row) in res.survived.iter().enumerate() {
                for (r, s) in res.rho_grid.iter().zip(row) {
                    let _ = writeln!(long, "{i},{r},{}", *s as u8);
                }
            }
            tables.push(ctx.table("sweep-rho-replicas.csv", "replica,rho,survived", &long)?);
            json!({
                "parameters": params,
                "rho_grid": res.rho_grid,
                "survival_proxy": res.survival_proxy.iter().map(estimate_json).collect::<Vec<_>>(),
                "psi_hat": res.psi_hat.psi_hat,
                "psi_hat_std_error": res.psi_hat.std_error,
                "rho_c_predicted": res.rho_c_predicted,
                "warnings": res.warnings,
            })
        }
        Command::Survival { run } => {
            let initial = ctx.initial(&run.initial)?;
            let params = ctx.survival_params(run);
            let (est, outcomes) = survival_probability(law, &initial, &params, ctx.seed)?;
            tables.push(ctx.table("survival.csv", OUTCOME_HEADER, &outcome_rows(&outcomes))?);
            json!({ "parameters": params, "survival": estimate_json(&est) })
        }
        Command::BlockEvent { n, l, t, site_cap } => {
            let b = &cfg.block;
            let (n, l, t) = (n.unwrap_or(b.n), l.unwrap_or(b.l), t.unwrap_or(b.t));
            let cap = site_cap.unwrap_or(b.site_cap);
            let spec = BlockEventSpec::new(n, l, t, dim)?.site_cap((cap > 0).then_some(cap));
            let (est, results) = block_event_probability(law, &spec, ctx.replicas, ctx.seed)?;
            let mut header = "replica,occurred,witness_t".to_string();
            for i in 1..=dim {
                let _ = write!(header, ",witness_x{i}");
            }
            let mut rows = String::new();
            for (i, r) in results.iter().enumerate() {
                let _ = write!(rows, "{i},{}", r.occurred as u8);
                match r.witness {
                    Some((x, wt)) => {
                        let _ = write!(rows, ",{wt}");
                        for c in x.coords(dim) {
                            let _ = write!(rows, ",{c}");
                        }
                    }
                    None => rows.push_str(&",".repeat(dim + 1)),
                }
                rows.push('\n');
            }
            tables.push(ctx.table("block-event.csv", &header, &rows)?);
            json!({
                "parameters": { "n": n, "L": l, "T": t, "site_cap": cap },
                "probability": estimate_json(&est),
            })
        }
        Command::FkgTest { initial, t, f, g } => {
            let initial = ctx.initial(initial)?;
            let functionals = match (f, g) {
                (Some(f), Some(g)) => vec![parse_functional(f, dim)?, parse_functional(g, dim)?],
                (None, None) if cfg.fkg.functionals.is_empty() => default_catalog(dim),
                (None, None) => cfg
                    .fkg
                    .functionals
                    .iter()
                    .map(|s| parse_functional(s, dim))
                    .collect::<CliResult<_>>()?,
                _ => return Err(Failure::Config("--f and --g must be given together".into())),
            };
            let params = FkgParams {
                dim,
                t: t.unwrap_or(cfg.fkg.t),
                replicas: ctx.replicas,
                sampling: cfg.sampling,
            };
            let mut reports = fkg_suite(law, &initial, &functionals, &params, ctx.seed)?;
            if f.is_some() {
                reports = vec![reports.swap_remove(1)];
            }
            let mut rows = String::new();
            for r in &reports {
                let _ = writeln!(
                    rows,
                    "{},{},{},{},{},{},{},{}",
                    r.f, r.g, r.mean_f, r.mean_g, r.covariance, r.std_error, r.replicas, r.pass as u8
                );
            }
            tables.push(ctx.table(
                "fkg-test.csv",
                "f,g,mean_f,mean_g,covariance,std_error,replicas,pass",
                &rows,
            )?);
            json!({
                "parameters": params,
                "pairs": reports.len(),
                "all_pass": reports.iter().all(|r| r.pass),
                "reports": reports,
            })
        }
        Command::Diagnostics => {
            let mut options = cfg.diagnostics.clone();
            options.replicas = ctx.replicas;
            let report = diagnostics(law, dim, ctx.seed, &options)?;
            let mut rows = String::new();
            for p in &report.growth {
                let _ = writeln!(rows, "{},{},{}", p.t, p.mean_total, p.replicas);
            }
            tables.push(ctx.table("diagnostics-growth.csv", "t,mean_total,replicas", &rows)?);
            let header = "x,estimate,std_error,wilson_low,wilson_high,replicas";
            tables.push(ctx.table("diagnostics-fill.csv", header, &curve_rows(&report.fill))?);
            tables.push(ctx.table("diagnostics-radius.csv", header, &curve_rows(&report.radius))?);
            tables.push(ctx.table("diagnostics-saturation.csv", header, &curve_rows(&report.saturation))?);
            json!({ "parameters": options, "report": report })
        }
    };
    if !matches!(command, Command::Validate) {
        tables.push(ctx.summary_table(&summary)?);
    }
    let obj = summary.as_object_mut().expect("summary is an object");
    obj.insert("experiment".into(), json!(ctx.command));
    obj.insert("seed".into(), json!(ctx.seed));
    obj.insert("replicas".into(), json!(ctx.replicas));
    obj.insert("dimension".into(), json!(dim));
    obj.insert("tables".into(), json!(tables));
    Ok(summary)
}

fn execute(cli: Cli) -> CliResult<()> {
    let started = Instant::now();
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let loaded = load(&cli.global)?;
    let is_validate = matches!(cli.command, Command::Validate);
    if !is_validate && !cli.global.allow_invalid {
        check_report(&loaded)?;
    }
    let ctx = Ctx {
        seed: cli.global.seed.unwrap_or(loaded.config.seed),
        replicas: cli.global.replicas.unwrap_or(loaded.config.replicas),
        out: cli
            .global
            .out
            .clone()
            .or_else(|| loaded.config.out.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| Path::new("brwre-out").to_path_buf()),
        command: cli.command.name(),
        loaded,
    };
    if ctx.replicas == 0 {
        return Err(Failure::Config("--replicas must be positive".into()));
    }
    if let Sampling::Quenched(_) = ctx.loaded.config.sampling {
        eprintln!("note: quenched sampling, one environment shared by all replicas");
    }
    let mut summary = run_command(&ctx, &cli.command)?;
    summary
        .as_object_mut()
        .expect("summary is an object")
        .insert("wall_clock_seconds".into(), json!(started.elapsed().as_secs_f64()));
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    if is_validate {
        check_report(&ctx.loaded)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
