// `!(a < b)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use zxtoric::ensemble::{
    self, read_summary, read_trajectories, run_to_dir, summarize, RunConfig, RunLayout, DELTA0,
};
use zxtoric::lattice::{InitialState, LinkShift, TorusLattice};
use zxtoric::observables::ObservableSet;
use zxtoric::plots::{emit_plot, FIGURES};
use zxtoric::scaling::{
    collapse_with_bootstrap, curves_from_dataset, write_collapsed_csv, CollapseOptions,
};
use zxtoric::validate::validate;

const THREADS_ENV: &str = "ZXTORIC_THREADS";
const OUT_ENV: &str = "ZXTORIC_OUT";

/// Stochastic ZX dephasing of the toric code: trajectory sweeps, symmetry
/// validation, percolation cross-checks and finite-size scaling.
///
/// Settings resolve as command-line flag, then config file, then environment
/// (ZXTORIC_SEED, ZXTORIC_THREADS, ZXTORIC_OUT).
///
/// Exit codes: 0 success, 1 validation failure, 2 usage error, 3 I/O error.
#[derive(Debug, Parser)]
#[command(name = "zxtoric", version, about, long_about)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (default: runs/<name>).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample trajectories over the configured sizes and r grid and write
    /// config.toml, trajectories.jsonl and summary.csv.
    Sweep,
    /// Negativity study; defaults to the 20x6 lattice, r = 0, 0.05, ..., 1.
    Negativity(NegativityArgs),
    /// Finite-size scaling collapse of F from a sweep directory.
    Collapse(CollapseArgs),
    /// Exact symmetry and order-parameter checks; exits 1 on any failing cell.
    Validate(ValidateArgs),
    /// Compare stabilizer C^I/C^II with the percolation prediction.
    OracleCheck(OracleArgs),
    /// Write tidy per-figure CSV files from a run's summary.csv.
    EmitPlot(EmitArgs),
}

#[derive(Debug, Args)]
struct NegativityArgs {
    /// Samples per r (ignored with --config).
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Debug, Args)]
struct CollapseArgs {
    /// Run directory containing trajectories.jsonl (default: the output directory).
    #[arg(long, value_name = "DIR")]
    run: Option<PathBuf>,
    /// Lower end of the r window.
    #[arg(long, default_value_t = 0.3)]
    r_min: f64,
    /// Upper end of the r window.
    #[arg(long, default_value_t = 0.7)]
    r_max: f64,
    /// Bootstrap resamples for parameter errors.
    #[arg(long, default_value_t = 100)]
    bootstrap: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ShiftArg {
    Diagonal,
    /// Broken shift for negative-control runs.
    Identity,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 6)]
    lx: usize,
    #[arg(long, default_value_t = 6)]
    ly: usize,
    /// Link shift used for ZX/XZ products.
    #[arg(long, value_enum, default_value_t = ShiftArg::Diagonal)]
    shift: ShiftArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StartArg {
    Pure,
    Mixed,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Number of trajectories.
    #[arg(long, default_value_t = 500)]
    trajectories: usize,
    /// Lattice sizes as LXxLY, cycled over trajectories.
    #[arg(long, value_delimiter = ',', default_values_t = ["8x8".to_string(), "12x12".to_string(), "16x16".to_string()])]
    sizes: Vec<String>,
    /// Dephasing probabilities, cycled over trajectories.
    #[arg(long = "r", value_delimiter = ',', default_values_t = [0.3, 0.4, 0.5, 0.6, 0.7])]
    r_grid: Vec<f64>,
    /// Initial state.
    #[arg(long, value_enum, default_value_t = StartArg::Pure)]
    start: StartArg,
}

#[derive(Debug, Args)]
struct EmitArgs {
    /// Run directory containing summary.csv (default: the output directory).
    #[arg(long, value_name = "DIR")]
    run: Option<PathBuf>,
    /// Figure ids, or `all`.
    #[arg(long = "figure", required = true, value_delimiter = ',')]
    figures: Vec<String>,
}

/// Error paired with its process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error
            .chain()
            .find_map(|e| e.downcast_ref::<zxtoric::Error>())
        {
            Some(
                zxtoric::Error::Io { .. }
                | zxtoric::Error::Malformed { .. }
                | zxtoric::Error::MissingData(_),
            ) => 3,
            Some(zxtoric::Error::Json(_)) => 3,
            Some(_) => 2,
            None if error.chain().any(|e| e.is::<std::io::Error>()) => 3,
            None => 2,
        };
        Failure { code, error }
    }
}

fn validation_failure(error: anyhow::Error) -> Failure {
    Failure { code: 1, error }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Sweep => sweep(cli),
        Command::Negativity(a) => negativity(cli, a),
        Command::Collapse(a) => collapse(cli, a),
        Command::Validate(a) => run_validate(cli, a),
        Command::OracleCheck(a) => oracle_check(cli, a),
        Command::EmitPlot(a) => emit(cli, a),
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<Option<RunConfig>> {
    match &cli.config {
        Some(path) => Ok(Some(
            RunConfig::from_file(path).with_context(|| format!("loading {}", path.display()))?,
        )),
        None => Ok(None),
    }
}

fn env_parse<T: std::str::FromStr>(key: &str) -> anyhow::Result<Option<T>> {
    match std::env::var(key) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("{key}={v:?} is not valid")),
        Err(_) => Ok(None),
    }
}

/// Applies flag > file > environment precedence to seed, threads and output.
fn resolve(
    cli: &Cli,
    mut config: RunConfig,
    default_name: &str,
) -> anyhow::Result<(RunConfig, u64, RunLayout)> {
    let seed = config.resolve_seed(cli.seed)?;
    config.seed = Some(seed);
    config.threads = match cli.threads.or(config.threads) {
        Some(t) => Some(t),
        None => env_parse(THREADS_ENV)?,
    };
    config.validate()?;
    let dir = out_dir(
        cli,
        config.output.clone(),
        config.name.as_deref().unwrap_or(default_name),
    )?;
    config.output = Some(dir.clone());
    Ok((config, seed, RunLayout::new(dir)))
}

fn out_dir(cli: &Cli, from_file: Option<PathBuf>, name: &str) -> anyhow::Result<PathBuf> {
    if let Some(d) = cli.out.clone().or(from_file) {
        return Ok(d);
    }
    let root: Option<PathBuf> = env_parse(OUT_ENV)?;
    Ok(root.unwrap_or_else(|| PathBuf::from("runs")).join(name))
}

fn default_sweep() -> RunConfig {
    RunConfig {
        name: Some("sweep".into()),
        sizes: vec![[8, 8], [12, 12], [16, 16], [20, 20]],
        r_grid: (0..=20)
            .map(|i| 0.3 + 0.02 * i as f64)
            .map(round4)
            .collect(),
        samples: 1000,
        seed: None,
        observables: ObservableSet {
            negativity: false,
            ..Default::default()
        },
        initial_state: InitialState::Pure,
        output: None,
        threads: None,
    }
}

fn default_negativity(samples: usize) -> RunConfig {
    RunConfig {
        name: Some("negativity".into()),
        sizes: vec![[20, 6]],
        r_grid: (0..=20).map(|i| 0.05 * i as f64).map(round4).collect(),
        samples,
        seed: None,
        observables: ObservableSet {
            negativity: true,
            chi_i: false,
            chi_ii: false,
            logicals: false,
            symmetry: false,
        },
        initial_state: InitialState::Pure,
        output: None,
        threads: None,
    }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn sweep(cli: &Cli) -> Result<(), Failure> {
    let config = load_config(cli)?.unwrap_or_else(default_sweep);
    let (config, seed, layout) = resolve(cli, config, "sweep")?;
    run_to_dir(&config, seed, &layout).map_err(anyhow::Error::from)?;
    println!("{}", layout.dir.display());
    Ok(())
}

fn negativity(cli: &Cli, args: &NegativityArgs) -> Result<(), Failure> {
    let config = load_config(cli)?.unwrap_or_else(|| default_negativity(args.samples));
    if !config.observables.negativity {
        return Err(anyhow!("config disables the negativity observable").into());
    }
    let (config, seed, layout) = resolve(cli, config, "negativity")?;
    let dataset = run_to_dir(&config, seed, &layout).map_err(anyhow::Error::from)?;
    println!("Lx,Ly,r,delta0_N_A,stderr");
    for row in summarize(&dataset)
        .map_err(anyhow::Error::from)?
        .iter()
        .filter(|r| r.observable == DELTA0)
    {
        println!(
            "{},{},{},{},{}",
            row.lx, row.ly, row.r, row.mean, row.stderr
        );
    }
    eprintln!("wrote {}", layout.dir.display());
    Ok(())
}

fn run_dir(cli: &Cli, explicit: &Option<PathBuf>) -> anyhow::Result<PathBuf> {
    if let Some(d) = explicit {
        return Ok(d.clone());
    }
    let config = load_config(cli)?;
    let name = config
        .as_ref()
        .and_then(|c| c.name.clone())
        .unwrap_or_else(|| "sweep".into());
    out_dir(cli, config.and_then(|c| c.output), &name)
}

fn collapse(cli: &Cli, args: &CollapseArgs) -> Result<(), Failure> {
    if !(args.r_min < args.r_max) {
        return Err(anyhow!("--r-min must be below --r-max").into());
    }
    let layout = RunLayout::new(run_dir(cli, &args.run)?);
    let (header, dataset) =
        read_trajectories(&layout.trajectories()).map_err(anyhow::Error::from)?;
    let seed = cli.seed.unwrap_or(header.master_seed);
    let window = (args.r_min, args.r_max);
    let opts = CollapseOptions::default();
    let threads = cli.threads.or(header.config.threads);
    let fit = collapse_with_bootstrap(&dataset, window, &opts, args.bootstrap, seed, threads)
        .map_err(anyhow::Error::from)?;
    fit.write_json(&layout.fit()).map_err(anyhow::Error::from)?;
    let curves = curves_from_dataset(&dataset, window).map_err(anyhow::Error::from)?;
    write_collapsed_csv(&layout.collapsed(), &curves, fit.params()).map_err(anyhow::Error::from)?;
    let errs = fit
        .bootstrap_errors
        .map(|e| format!(" +- ({:.4}, {:.4}, {:.4})", e.r_c, e.nu, e.zeta))
        .unwrap_or_default();
    println!(
        "r_c={:.4} nu={:.4} zeta={:.4}{errs} quality={:.3} converged={}",
        fit.r_c, fit.nu, fit.zeta, fit.quality, fit.converged
    );
    if !fit.converged {
        return Err(validation_failure(anyhow!("collapse did not converge")));
    }
    Ok(())
}

fn run_validate(cli: &Cli, args: &ValidateArgs) -> Result<(), Failure> {
    let shift = match args.shift {
        ShiftArg::Diagonal => LinkShift::Diagonal,
        ShiftArg::Identity => LinkShift::Identity,
    };
    let lattice = TorusLattice::new(args.lx, args.ly)
        .map_err(anyhow::Error::from)?
        .with_shift(shift);
    let report = validate(&lattice).map_err(anyhow::Error::from)?;
    let json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
    println!("{json}");
    if let Some(dir) = &cli.out {
        write_file(&dir.join("validate.json"), &json)?;
    }
    let failing: Vec<&str> = report.failing().map(|c| c.name.as_str()).collect();
    if !failing.is_empty() {
        return Err(validation_failure(anyhow!(
            "failing cells: {}",
            failing.join(", ")
        )));
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn parse_size(s: &str) -> anyhow::Result<[usize; 2]> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("size {s:?} is not LXxLY"))?;
    Ok([
        a.trim().parse().context("bad Lx")?,
        b.trim().parse().context("bad Ly")?,
    ])
}

fn oracle_check(cli: &Cli, args: &OracleArgs) -> Result<(), Failure> {
    let config = load_config(cli)?;
    let sizes = args
        .sizes
        .iter()
        .map(|s| parse_size(s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    for &[lx, ly] in &sizes {
        TorusLattice::new(lx, ly).map_err(anyhow::Error::from)?;
    }
    if let Some(&r) = args.r_grid.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(anyhow!("r={r} outside [0, 1]").into());
    }
    let seed = match &config {
        Some(c) => c.resolve_seed(cli.seed).map_err(anyhow::Error::from)?,
        None => cli
            .seed
            .map_or_else(|| env_parse(ensemble::SEED_ENV).map(|s| s.unwrap_or(0)), Ok)?,
    };
    let threads = match cli.threads.or(config.as_ref().and_then(|c| c.threads)) {
        Some(t) => Some(t),
        None => env_parse(THREADS_ENV)?,
    };
    let start = match args.start {
        StartArg::Pure => InitialState::Pure,
        StartArg::Mixed => InitialState::Mixed,
    };
    let report = ensemble::oracle_check(
        &sizes,
        &args.r_grid,
        args.trajectories,
        start,
        seed,
        threads,
    )
    .map_err(anyhow::Error::from)?;
    let dir = out_dir(cli, config.and_then(|c| c.output), "oracle-check")?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    ensemble::write_oracle_csv(&dir.join("oracle.csv"), &report.rows)
        .map_err(anyhow::Error::from)?;
    println!(
        "trajectories={} cii_checks={} cii_mismatches={} ci_checks={} ci_mismatches={}",
        report.trajectories,
        report.cii_checks,
        report.cii_mismatches,
        report.ci_checks,
        report.ci_mismatches
    );
    if report.cii_mismatches + report.ci_mismatches > 0 {
        return Err(validation_failure(anyhow!(
            "stabilizer and percolation predictions disagree"
        )));
    }
    Ok(())
}

fn emit(cli: &Cli, args: &EmitArgs) -> Result<(), Failure> {
    let run = run_dir(cli, &args.run)?;
    let rows = read_summary(&RunLayout::new(&run).summary()).map_err(anyhow::Error::from)?;
    let dir = match (&args.run, &cli.out) {
        (Some(_), Some(out)) => out.clone(),
        _ => run.join("plots"),
    };
    let figures: Vec<&str> = if args.figures.iter().any(|f| f == "all") {
        FIGURES.to_vec()
    } else {
        args.figures.iter().map(String::as_str).collect()
    };
    for fig in figures {
        let path = emit_plot(&rows, fig, &dir).map_err(anyhow::Error::from)?;
        println!("{}", path.display());
    }
    Ok(())
}
