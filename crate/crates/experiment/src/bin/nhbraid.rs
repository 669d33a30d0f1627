use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nhbraid_experiment::{run_scenario, write_results, ExperimentError, Manifest, ResolvedConfig, ScenarioName};

/// Output directory used when `--out` is not given; runs go to
/// `<dir>/<scenario>`.
const OUT_DIR_ENV: &str = "NHBRAID_OUT_DIR";

#[derive(Parser)]
#[command(name = "nhbraid", version, about = "Driven Majorana braiding simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its results.
    Simulate(RunArgs),
    /// Like `simulate`, for scenarios that define a sweep.
    Scan(RunArgs),
    /// Print the pulse-area calibration factor of a scenario's protocol.
    Calibrate(ConfigArgs),
    /// Re-run the configuration recorded in a `run.json`.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    scenario: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` override, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the fidelity time series of every run.
    #[arg(long)]
    series: bool,
    #[arg(long)]
    threads: Option<usize>,
}

fn resolve(args: &ConfigArgs, series: bool) -> Result<ResolvedConfig, ExperimentError> {
    let scenario: ScenarioName = args.scenario.parse()?;
    let text = match &args.config {
        Some(p) => {
            Some(std::fs::read_to_string(p).map_err(|e| ExperimentError::Config(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    let mut sets = args.set.clone();
    if series {
        sets.push("output.series=true".into());
    }
    ResolvedConfig::resolve(scenario, text.as_deref(), &sets, args.seed)
}

fn out_dir(explicit: Option<&Path>, scenario: ScenarioName) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| {
        let root = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results"));
        root.join(scenario.as_str())
    })
}

fn execute(cfg: &ResolvedConfig, out: &Path, threads: Option<usize>) -> Result<(), ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| ExperimentError::Config(format!("thread pool: {e}")))?;
    let result = pool.install(|| run_scenario(cfg))?;
    if result.leakage_breaches > 0 {
        eprintln!(
            "warning: {} run(s) exceeded the leakage threshold {}",
            result.leakage_breaches,
            cfg.get("output.leakage_threshold")
        );
    }
    let files = write_results(&result, cfg, out)?;
    println!(
        "{}: {} rows, calibration factor {}, wrote {} files to {}",
        cfg.scenario,
        result.rows.len(),
        result.calibration_factor,
        files.len(),
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = resolve(&a.config, a.series)?;
            execute(&cfg, &out_dir(a.out.as_deref(), cfg.scenario), a.threads)
        }
        Command::Scan(a) => {
            let cfg = resolve(&a.config, a.series)?;
            if cfg.sweep()?.is_none() {
                return Err(ExperimentError::Config(format!("scenario {} has no sweep.parameter", cfg.scenario)));
            }
            execute(&cfg, &out_dir(a.out.as_deref(), cfg.scenario), a.threads)
        }
        Command::Calibrate(a) => {
            let cfg = resolve(&a, false)?;
            for (value, rc) in cfg.points()? {
                let p = rc.protocol(rc.composite)?;
                let areas: Vec<String> = p
                    .segments
                    .iter()
                    .flat_map(|s| s.pulses.iter().map(|t| format!("{}", t.envelope.effective_area())))
                    .collect();
                let label = if value.is_nan() { String::new() } else { format!("sweep {value}: ") };
                println!("{label}calibration factor {} (pulse areas {})", p.calibration_factor(), areas.join(", "));
            }
            Ok(())
        }
        Command::Replay { manifest, out, threads } => {
            let text = std::fs::read_to_string(&manifest).map_err(|e| ExperimentError::io(&manifest, e))?;
            let cfg = Manifest::from_json(&text)?.resolved_config()?;
            execute(&cfg, &out_dir(out.as_deref(), cfg.scenario), threads)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
