use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use chirpcool::app;
use chirpcool::config::{parse_config, Mode};
use chirpcool::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Chirped-pulse cooling of a mechanical mirror.
#[derive(Debug, Parser)]
#[command(name = "chirpcool", version)]
struct Cli {
    /// simulate | oracle | drive | sweep-beta | sweep-detuning | sweep-delta | optimize | tail
    mode: String,

    /// Run configuration ([system], [pulse], [grid], [run]).
    #[arg(long)]
    config: PathBuf,

    /// Output CSV; overrides [run].output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Drop the counter-rotating terms.
    #[arg(long)]
    rwa: bool,

    /// Write every N-th grid node.
    #[arg(long)]
    stride: Option<usize>,
}

fn configure_threads() {
    if let Ok(v) = std::env::var("CHIRPCOOL_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not cap threads: {e}");
                }
            }
            _ => log::warn!("ignoring CHIRPCOOL_THREADS={v}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();

    let result = (|| {
        let mode: Mode = cli.mode.parse()?;
        let path = &cli.config;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = parse_config(&text)?;
        cfg.mode = mode;
        cfg.rwa |= cli.rwa;
        if let Some(out) = &cli.out {
            cfg.output_path = Some(out.clone());
        }
        if let Some(stride) = cli.stride {
            if stride == 0 {
                return Err(Error::Config("--stride must be at least 1".into()));
            }
            cfg.stride = stride;
        }
        app::run(&cfg)
    })();

    match result {
        Ok(outcome) => {
            print!("{}", outcome.report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                ref e if e.is_config() => EXIT_CONFIG,
                ref e if e.is_numerical() => EXIT_NUMERICAL,
                _ => 1,
            })
        }
    }
}
