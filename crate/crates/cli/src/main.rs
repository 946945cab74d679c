//! `estranet`: detect temporal communities in evolving networks.
//!
//! Every subcommand is a request to the estranet service. Pass `--server` to
//! use a running instance; otherwise an in-process server is started on a
//! loopback port for the duration of the command.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use estranet_client::api::*;
use estranet_client::{Client, ClientError};
use estranet_core::io::read_snapshot_dir;
use estranet_core::sweep::format_sweep_tsv;
use estranet_core::{HiddenGroupSpec, PipelineConfig, ResultDocument};

mod config;
mod phases;

use config::ConfigFile;

#[derive(Debug, Parser)]
#[command(name = "estranet", version, about = "Temporal community detection by estrangement confinement")]
struct Cli {
    /// Base URL of a running estranet service.
    #[arg(long, global = true, env = "ESTRANET_SERVER")]
    server: Option<String>,

    /// `key = value` file with defaults for the flags below.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the online pipeline on a snapshot file or directory.
    Detect(DetectArgs),
    /// Average estrangement and modularity loss over a list of deltas.
    Sweep(SweepArgs),
    /// Render an evolution chart from a result JSON file.
    Chart(ChartArgs),
    /// Write a synthetic hidden-group snapshot sequence.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Base seed for all randomized runs.
    #[arg(long, env = "ESTRANET_SEED")]
    seed: Option<u64>,
    /// Upper end of the multiplier search interval.
    #[arg(long)]
    lambda_max: Option<f64>,
    /// Brent tolerance on the multiplier.
    #[arg(long)]
    xtol: Option<f64>,
    /// Cap on label-propagation runs per dual evaluation.
    #[arg(long)]
    max_runs: Option<usize>,
    /// Start label propagation from the previous snapshot's labels.
    #[arg(long)]
    warm_start: bool,
    /// Jaccard overlap over nodes present in both snapshots only.
    #[arg(long)]
    jaccard_common_only: bool,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Snapshot file (`t u v [w]` lines) or directory of `<t>.edges` files.
    input: PathBuf,
    /// Upper bound on estrangement, in [0, 1].
    #[arg(long)]
    delta: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Also solve each snapshot unconstrained and report the modularity loss.
    #[arg(long)]
    report_loss: bool,
    /// Result JSON destination (stdout if omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the evolution chart as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Also write the evolution chart as TSV.
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    input: PathBuf,
    /// Comma-separated delta values.
    #[arg(long, value_delimiter = ',')]
    deltas: Vec<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// TSV destination (stdout if omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ChartArgs {
    /// Result JSON written by `detect`.
    result: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// TSV destination; printed to stdout when neither output is given.
    #[arg(long)]
    tsv: Option<PathBuf>,
    /// SVG cell edge in pixels.
    #[arg(long, default_value_t = 8)]
    cell_size: u32,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 40)]
    nodes: usize,
    /// Erdős–Rényi edges per snapshot.
    #[arg(long, default_value_t = 80)]
    background_edges: usize,
    /// Extra edges among the active group's members per snapshot.
    #[arg(long, default_value_t = 20)]
    extra_edges: usize,
    #[arg(long, default_value_t = 40)]
    snapshots: u64,
    /// Planted group as `START..END:MEMBERS`, e.g. `0..20:0-9`; repeatable.
    /// Defaults to nodes 0-9 for the first half and 9-19 for the second.
    #[arg(long = "phase", value_parser = phases::parse_phase)]
    phases: Vec<estranet_core::Phase>,
    #[arg(long, env = "ESTRANET_SEED")]
    seed: Option<u64>,
    /// Snapshot file destination (stdout if omitted).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    fn data(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn from_client(e: ClientError, context: Option<&Path>) -> Self {
        let message = match context {
            Some(path) if e.line().is_some() => format!("{}: {e}", path.display()),
            _ => e.to_string(),
        };
        Self { code: e.kind().exit_code() as u8, message }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            ConfigFile::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let server = cli.server.clone().or_else(|| config.raw("server").map(str::to_owned));
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| Failure { code: 3, message: format!("cannot start runtime: {e}") })?;
    runtime.block_on(async {
        let client = connect(server).await?;
        match cli.command {
            Command::Detect(args) => detect(&client, &config, args).await,
            Command::Sweep(args) => run_sweep(&client, &config, args).await,
            Command::Chart(args) => chart(&client, args).await,
            Command::Generate(args) => generate(&client, &config, args).await,
        }
    })
}

async fn connect(server: Option<String>) -> Outcome<Client> {
    let base = match server {
        Some(url) => url,
        None => {
            let addr = estranet_server::spawn(SocketAddr::from(([127, 0, 0, 1], 0)))
                .await
                .map_err(|e| Failure { code: 3, message: format!("cannot start embedded server: {e}") })?;
            format!("http://{addr}")
        }
    };
    Client::new(base).map_err(|e| Failure::from_client(e, None))
}

fn resolve<T: std::str::FromStr>(flag: Option<T>, config: &ConfigFile, key: &str, default: T) -> Outcome<T> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(config.get(key).map_err(Failure::usage)?.unwrap_or(default)),
    }
}

fn resolve_flag(flag: bool, config: &ConfigFile, key: &str) -> Outcome<bool> {
    resolve(flag.then_some(true), config, key, false)
}

fn pipeline_config(args: &SolverArgs, config: &ConfigFile, report_loss: bool) -> Outcome<PipelineConfig> {
    let mut cfg = PipelineConfig::default();
    let s = &mut cfg.solver;
    s.seed = resolve(args.seed, config, "seed", s.seed)?;
    s.lambda_max = resolve(args.lambda_max, config, "lambda_max", s.lambda_max)?;
    s.xtol = resolve(args.xtol, config, "xtol", s.xtol)?;
    s.max_runs = resolve(args.max_runs, config, "max_runs", s.max_runs)?;
    s.min_runs = resolve(None, config, "min_runs", s.min_runs)?;
    s.run_increment = resolve(None, config, "run_increment", s.run_increment)?;
    s.final_runs = resolve(None, config, "final_runs", s.final_runs)?;
    s.run.max_sweeps = resolve(None, config, "max_sweeps", s.run.max_sweeps)?;
    s.run.warm_start = resolve_flag(args.warm_start, config, "warm_start")?;
    cfg.jaccard_common_only = resolve_flag(args.jaccard_common_only, config, "jaccard_common_only")?;
    cfg.report_loss = resolve_flag(report_loss, config, "report_loss")?;
    Ok(cfg)
}

fn read_input(path: &Path) -> Outcome<SnapshotSource> {
    if path.is_dir() {
        let files = read_snapshot_dir(path).map_err(|e| Failure::data(e.to_string()))?;
        if files.is_empty() {
            return Err(Failure::data(format!("{}: no <t>.edges files", path.display())));
        }
        Ok(SnapshotSource::Files(
            files.into_iter().map(|(t, text)| SnapshotFile { t, text }).collect(),
        ))
    } else {
        std::fs::read_to_string(path)
            .map(SnapshotSource::Text)
            .map_err(|e| Failure::data(format!("{}: {e}", path.display())))
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Outcome {
    match path {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

async fn write_chart(
    client: &Client,
    result: ResultDocument,
    cell_size: u32,
    svg: Option<&Path>,
    tsv: Option<&Path>,
) -> Outcome {
    let chart = client
        .chart(&ChartRequest { result, cell_size: Some(cell_size) })
        .await
        .map_err(|e| Failure::from_client(e, None))?;
    if let Some(path) = svg {
        write_output(Some(path), &chart.svg)?;
    }
    if let Some(path) = tsv {
        write_output(Some(path), &chart.tsv)?;
    }
    Ok(())
}

async fn detect(client: &Client, config: &ConfigFile, args: DetectArgs) -> Outcome {
    let delta = match args.delta {
        Some(d) => d,
        None => config
            .get("delta")
            .map_err(Failure::usage)?
            .ok_or_else(|| Failure::usage("--delta is required (or `delta` in the config file)"))?,
    };
    let cfg = pipeline_config(&args.solver, config, args.report_loss)?;
    let input = read_input(&args.input)?;
    let doc = client
        .detect(&DetectRequest { input, delta, config: cfg })
        .await
        .map_err(|e| Failure::from_client(e, Some(&args.input)))?;
    write_output(args.out.as_deref(), &doc.to_json())?;
    if args.svg.is_some() || args.tsv.is_some() {
        write_chart(client, doc, 8, args.svg.as_deref(), args.tsv.as_deref()).await?;
    }
    Ok(())
}

async fn run_sweep(client: &Client, config: &ConfigFile, args: SweepArgs) -> Outcome {
    let deltas = if !args.deltas.is_empty() {
        args.deltas
    } else {
        let raw = config
            .raw("deltas")
            .ok_or_else(|| Failure::usage("--deltas is required (or `deltas` in the config file)"))?;
        raw.split(',')
            .map(|d| d.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::usage(format!("config: invalid deltas `{raw}`")))?
    };
    let cfg = pipeline_config(&args.solver, config, true)?;
    let input = read_input(&args.input)?;
    let resp = client
        .sweep(&SweepRequest { input, deltas, config: cfg })
        .await
        .map_err(|e| Failure::from_client(e, Some(&args.input)))?;
    write_output(args.out.as_deref(), &format_sweep_tsv(&resp.rows))
}

async fn chart(client: &Client, args: ChartArgs) -> Outcome {
    let text = std::fs::read_to_string(&args.result)
        .map_err(|e| Failure::data(format!("{}: {e}", args.result.display())))?;
    let result: ResultDocument = serde_json::from_str(&text)
        .map_err(|e| Failure::data(format!("{}: {e}", args.result.display())))?;
    if args.cell_size == 0 {
        return Err(Failure::usage("--cell-size must be positive"));
    }
    if args.svg.is_none() && args.tsv.is_none() {
        let chart = client
            .chart(&ChartRequest { result, cell_size: Some(args.cell_size) })
            .await
            .map_err(|e| Failure::from_client(e, None))?;
        return write_output(None, &chart.tsv);
    }
    write_chart(client, result, args.cell_size, args.svg.as_deref(), args.tsv.as_deref()).await
}

async fn generate(client: &Client, config: &ConfigFile, args: GenerateArgs) -> Outcome {
    let spec = HiddenGroupSpec {
        n_nodes: args.nodes,
        m_background: args.background_edges,
        m_extra: args.extra_edges,
        phases: if args.phases.is_empty() {
            phases::default_phases(args.snapshots)
        } else {
            args.phases
        },
        n_snapshots: args.snapshots,
        seed: resolve(args.seed, config, "seed", 0)?,
    };
    let resp = client
        .generate(&GenerateRequest { spec })
        .await
        .map_err(|e| Failure::from_client(e, None))?;
    write_output(args.out.as_deref(), &resp.text)
}
