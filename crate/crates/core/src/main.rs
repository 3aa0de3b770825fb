use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use biphoton_duality::commands::{cmd_analyze, cmd_model, cmd_simulate, cmd_verify, AnalyzeInputs, Which};
use biphoton_duality::config::{ResolvedRun, RunConfig};
use biphoton_duality::{Error, Result};

const THREADS_ENV: &str = "BIPHOTON_DUALITY_THREADS";

#[derive(Parser)]
#[command(name = "biphoton-duality", version, about = "Biphoton time-frequency maps, virtual scans and width analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Noise seed, overrides the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory, overrides the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhichArg {
    Tsi,
    Tti,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral and temporal maps of the model plus its width report.
    Model {
        #[command(flatten)]
        common: Common,
    },
    /// Virtual spectrometer and delay scans.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "both")]
        which: WhichArg,
    },
    /// Width report from model maps or scans.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Directory holding scan_tsi.csv/scan_tti.csv or tsi.csv/tti.csv.
        #[arg(long, value_name = "DIR", conflicts_with_all = ["tsi", "tti"])]
        input: Option<PathBuf>,
        #[arg(long, value_name = "PATH", requires = "tti")]
        tsi: Option<PathBuf>,
        #[arg(long, value_name = "PATH", requires = "tsi")]
        tti: Option<PathBuf>,
        /// Per-axis spectral instrument FWHM, THz.
        #[arg(long, value_name = "THZ")]
        instrument_thz: Option<f64>,
        /// Per-axis temporal instrument FWHM, ps.
        #[arg(long, value_name = "PS")]
        instrument_ps: Option<f64>,
    },
    /// Checks the reference tables and the calibrated model against them.
    Verify,
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.out.is_some() {
        cfg.output = common.out.clone();
    }
    Ok(cfg)
}

fn resolve(common: &Common) -> Result<ResolvedRun> {
    load_config(common)?.resolve()
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| Error::Config {
        key: THREADS_ENV.into(),
        message: format!("expected a non-negative integer, got `{value}`"),
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    configure_threads()?;
    match cli.command {
        Command::Model { common } => {
            let run = resolve(&common)?;
            let out = cmd_model(&run, &run.output)?;
            for f in &out.files {
                println!("{}", f.display());
            }
            let r = out.report;
            println!(
                "tbp_plus {:.4}  tbp_minus {:.4}  tbp_y {:.4}",
                r.tbp_plus, r.tbp_minus, r.tbp_y
            );
        }
        Command::Simulate { common, which } => {
            let run = resolve(&common)?;
            let which = match which {
                WhichArg::Tsi => Which::Tsi,
                WhichArg::Tti => Which::Tti,
                WhichArg::Both => Which::Both,
            };
            let out = cmd_simulate(&run, which, &run.output)?;
            for f in &out.files {
                println!("{}", f.display());
            }
        }
        Command::Analyze {
            common,
            input,
            tsi,
            tti,
            instrument_thz,
            instrument_ps,
        } => {
            let cfg = load_config(&common)?;
            let base = cfg.output.clone().unwrap_or_else(|| PathBuf::from(biphoton_duality::config::DEFAULT_OUTPUT));
            let mut inputs = match (tsi, tti) {
                (Some(tsi), Some(tti)) => AnalyzeInputs {
                    tsi,
                    tti,
                    ..Default::default()
                },
                _ => AnalyzeInputs::from_dir(input.as_deref().unwrap_or(&base))?,
            };
            inputs.instrument_thz = instrument_thz;
            inputs.instrument_ps = instrument_ps;
            let out_dir = match common.out {
                Some(dir) => dir,
                None => inputs.tsi.parent().map(|p| p.join("analysis")).unwrap_or_else(|| base.join("analysis")),
            };
            let out = cmd_analyze(&inputs, &out_dir)?;
            let r = out.analysis.report;
            println!("{}", out_dir.join("report.json").display());
            println!(
                "tbp_plus {:.4}  tbp_minus {:.4}  tbp_y {:.4}  corr_tsi {:+.3}  corr_tti {:+.3}",
                r.tbp_plus, r.tbp_minus, r.tbp_y, out.correlation_tsi, out.correlation_tti
            );
        }
        Command::Verify => {
            let outcome = cmd_verify()?;
            print!("{}", outcome.table());
            return Ok(outcome.all_pass());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Internal(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
        Err(_) => ExitCode::from(2),
    }
}
