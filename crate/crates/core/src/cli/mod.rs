//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for bad arguments or configuration, 3 when
//! a run breaks a mechanism invariant, 1 for I/O failures.

pub mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Config;
use crate::error::AuctionError;
use crate::experiments::{self, records_csv, ExperimentRun, Panel, RoundRecord, Scenario};
use plot::PlotFile;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "FEMTO_AUCTION_OUT";

#[derive(Debug, Parser)]
#[command(name = "femto-auction", version, about = "Truthful auctions for femtocell access time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Configuration file (flat `section.key = value`); defaults apply
    /// when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides `experiment.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = "results")]
    pub out: PathBuf,
    /// Also write plot-ready CSV tables.
    #[arg(long)]
    pub emit_plot_data: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Density,
    MueCount,
    Demand,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One MUE per round buying from every femtocell on the street.
    SingleMue(RunArgs),
    /// Several MUEs per round, double auction.
    MultiMue(RunArgs),
    /// Manipulation test over the three reference agents.
    Truthfulness(RunArgs),
    /// Performance sweeps.
    Sweep {
        #[arg(long, value_enum, default_value = "all")]
        kind: SweepKind,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Checks a configuration and prints it fully resolved.
    ValidateConfig {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Run(AuctionError),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Run(e) => write!(f, "run failed: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn run_err(e: AuctionError) -> CliError {
    CliError::Run(e)
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<Config, CliError> {
    let mut cfg = match path {
        Some(p) => Config::from_file(p).map_err(|e| CliError::Config(e.to_string()))?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        cfg.experiment.seed = s;
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    std::io::Write::write_all(&mut tmp, contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn manifest(cfg: &Config, command: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("run.command = \"{command}\"\n"));
    out.push_str(&format!("run.version = \"{}\"\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("run.seed = {}\n", cfg.experiment.seed));
    out.push_str(
        "run.rate_model = \"Shannon rate; femto band split into femto.reuse_factor round-robin sub-channels; \
         macro rate shared by macro.user_count users\"\n",
    );
    out.push_str("run.mue_placement = \"uniform on the road centerline, redrawn every round\"\n");
    out.push_str(&cfg.to_flat_string());
    out
}

fn write_plots(dir: &Path, files: &[PlotFile]) -> Result<(), CliError> {
    let plots = dir.join("plots");
    for (name, body) in files {
        write_atomic(&plots.join(name), body)?;
    }
    write_atomic(&plots.join("README.md"), &plot::readme(files))
}

fn write_run(dir: &Path, cfg: &Config, command: &str, run: &ExperimentRun) -> Result<(), CliError> {
    write_atomic(&dir.join("records.csv"), &run.records_csv().map_err(run_err)?)?;
    write_atomic(&dir.join("summary.csv"), &run.summaries_csv().map_err(run_err)?)?;
    write_atomic(&dir.join("manifest.toml"), &manifest(cfg, command))
}

/// Plot tables for a finished experiment.
pub fn emit_plot_data(kind: &str, records: &[RoundRecord], run: Option<&ExperimentRun>) -> Result<Vec<PlotFile>, AuctionError> {
    match (kind, run) {
        ("truthfulness", _) => plot::truthfulness_tables(records),
        ("density", Some(r)) => plot::density_table(&r.points),
        ("mue-count", Some(r)) => plot::mue_count_table(&r.points),
        ("demand", Some(r)) => plot::demand_table(&r.points),
        _ => Err(AuctionError::Domain(format!("no plot layout for {kind}"))),
    }
}

/// Per panel and factor: rounds, smallest and mean utility loss.
fn truthfulness_summary(records: &[RoundRecord]) -> String {
    let mut out = String::from("panel,factor,rounds,min_delta_u,mean_delta_u,negative\n");
    for panel in Panel::ALL {
        let mut factors: Vec<f64> = Vec::new();
        for r in records.iter().filter(|r| r.panel == Some(panel)) {
            if let Some(f) = r.factor.filter(|f| !factors.contains(f)) {
                factors.push(f);
            }
        }
        for f in factors {
            let d: Vec<f64> = records
                .iter()
                .filter(|r| r.panel == Some(panel) && r.factor == Some(f))
                .filter_map(|r| r.delta_u)
                .collect();
            let min = d.iter().copied().fold(f64::INFINITY, f64::min);
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            let neg = d.iter().filter(|x| **x < -experiments::IR_TOL).count();
            out.push_str(&format!("{},{f},{},{min},{mean},{neg}\n", panel.as_str(), d.len()));
        }
    }
    out
}

type SweepFn = fn(&Config) -> crate::error::Result<ExperimentRun>;

fn run_sweep(kind: SweepKind, cfg: &Config, args: &RunArgs) -> Result<(), CliError> {
    let kinds: &[(&str, SweepFn)] = &[
        ("density", experiments::run_density_sweep),
        ("mue-count", experiments::run_mue_count_sweep),
        ("demand", experiments::run_demand_sweep),
    ];
    for (name, f) in kinds {
        let wanted = match kind {
            SweepKind::All => true,
            SweepKind::Density => *name == "density",
            SweepKind::MueCount => *name == "mue-count",
            SweepKind::Demand => *name == "demand",
        };
        if !wanted {
            continue;
        }
        let run = f(cfg).map_err(run_err)?;
        let dir = args.out.join(name);
        write_run(&dir, cfg, &format!("sweep --kind {name}"), &run)?;
        if args.emit_plot_data {
            write_plots(&dir, &emit_plot_data(name, &run.records, Some(&run)).map_err(run_err)?)?;
        }
        for p in &run.points {
            println!(
                "{name} point {}: density {} mues {} demand {} -> utility {:.4} (baseline {:.4}, {:+.1}%)",
                p.point, p.density, p.num_mues, p.max_demand_mbps, p.mean_utility, p.mean_baseline, p.improvement_pct
            );
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ValidateConfig { config, seed } => {
            let cfg = load_config(config.as_deref(), seed)?;
            print!("{}", cfg.to_flat_string());
            Ok(())
        }
        Command::SingleMue(args) => scenario(Scenario::SingleMue, &args),
        Command::MultiMue(args) => scenario(Scenario::MultiMue, &args),
        Command::Truthfulness(args) => {
            let cfg = load_config(args.config.as_deref(), args.seed)?;
            let records = experiments::run_truthfulness(&cfg).map_err(run_err)?;
            let dir = args.out.join("truthfulness");
            write_atomic(&dir.join("records.csv"), &records_csv(&records).map_err(run_err)?)?;
            let summary = truthfulness_summary(&records);
            write_atomic(&dir.join("summary.csv"), &summary)?;
            write_atomic(&dir.join("manifest.toml"), &manifest(&cfg, "truthfulness"))?;
            if args.emit_plot_data {
                write_plots(&dir, &emit_plot_data("truthfulness", &records, None).map_err(run_err)?)?;
            }
            print!("{summary}");
            Ok(())
        }
        Command::Sweep { kind, run } => {
            let cfg = load_config(run.config.as_deref(), run.seed)?;
            run_sweep(kind, &cfg, &run)
        }
    }
}

fn scenario(s: Scenario, args: &RunArgs) -> Result<(), CliError> {
    let cfg = load_config(args.config.as_deref(), args.seed)?;
    let run = experiments::run_scenario(&cfg, s).map_err(run_err)?;
    write_run(&args.out.join(s.as_str()), &cfg, s.as_str(), &run)?;
    let p = &run.points[0];
    println!(
        "{}: {} rounds, mean MUE utility {:.4} +/- {:.4} (baseline {:.4}, {:+.1}%)",
        s.as_str(),
        p.rounds,
        p.mean_utility,
        p.ci95_utility,
        p.mean_baseline,
        p.improvement_pct
    );
    Ok(())
}

/// Parses `argv` and runs it; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("femto-auction: {e}");
            e.exit_code()
        }
    }
}
