//! The `weakmeas` command line.
//!
//! Exit codes: 0 success, 2 usage or scenario validation error, 3 runtime
//! error (including an empty post-selection and I/O failures). Data goes to
//! stdout or `--out`; diagnostics go to stderr.

pub mod output;
pub mod report;
pub mod scenario;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{to_canonical_json, to_flat_csv, write_atomic};
use report::{run_scenario, sweep_csv, sweep_rows, RunError, SweepParam};
use scenario::{load_scenario, preset, Mode, Scenario, PRESETS};

pub const SEED_ENV: &str = "WEAKMEAS_SEED";

#[derive(Debug, Parser)]
#[command(name = "weakmeas", version, about = "Weak measurement simulator with post-selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and emit its result document
    Run(RunArgs),
    /// Re-run a scenario for each value of one parameter (CSV output)
    Sweep(SweepArgs),
    /// List the built-in scenarios, or print one of them
    Presets {
        /// Preset to print as a scenario file
        name: Option<String>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario JSON file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario name (see `weakmeas presets`)
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct Overrides {
    /// Seed; takes precedence over WEAKMEAS_SEED and the file
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the scenario's run mode
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Replace the scenario's sample count
    #[arg(long)]
    samples: Option<u64>,
    /// Worker threads for sampling and evolution; never changes the output
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every sampled record as CSV
    #[arg(long)]
    dump_records: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParamArg {
    #[value(name = "gA_tA")]
    GaTa,
    #[value(name = "theta")]
    Theta,
    #[value(name = "sigma_F")]
    SigmaF,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, value_enum)]
    param: ParamArg,
    /// Comma-separated values, processed in the given order
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    values: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Mode::ALL.iter().map(|m| m.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn load(source: &Source, o: &Overrides, env_seed: Option<&str>) -> Result<Scenario, RunError> {
    let mut sc = match (&source.config, &source.preset) {
        (Some(path), _) => load_scenario(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(RunError::Usage("one of --config or --preset is required".into())),
    };
    let env_seed = env_seed
        .map(|s| s.trim().parse::<u64>().map_err(|_| RunError::Usage(format!("{SEED_ENV}={s:?} is not a u64"))))
        .transpose()?;
    if let Some(seed) = o.seed.or(env_seed) {
        sc.run.seed = seed;
    }
    if let Some(mode) = o.mode {
        sc.run.mode = mode;
    }
    if let Some(n) = o.samples {
        sc.run.samples = n;
    }
    Ok(sc)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Usage(format!("--threads {n}: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), RunError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(|e| RunError::Io(path.display().to_string(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli, env_seed: Option<&str>) -> Result<(), RunError> {
    match cli.command {
        Command::Presets { name: None } => {
            for (name, about, _) in PRESETS {
                println!("{name:<20} {about}");
            }
            Ok(())
        }
        Command::Presets { name: Some(name) } => {
            let (_, _, text) = PRESETS
                .iter()
                .find(|p| p.0 == name)
                .ok_or_else(|| RunError::Usage(format!("unknown preset `{name}`")))?;
            print!("{text}");
            Ok(())
        }
        Command::Run(args) => {
            let sc = load(&args.source, &args.overrides, env_seed)?;
            let dump = args.dump_records.as_deref();
            let doc = with_threads(args.overrides.threads, || run_scenario(&sc, dump))??;
            let text = match args.format {
                Format::Json => to_canonical_json(&doc),
                Format::Csv => to_flat_csv(&doc),
            };
            emit(args.out.as_ref(), &text)
        }
        Command::Sweep(args) => {
            let sc = load(&args.source, &args.overrides, env_seed)?;
            let param = match args.param {
                ParamArg::GaTa => SweepParam::GaTa,
                ParamArg::Theta => SweepParam::Theta,
                ParamArg::SigmaF => SweepParam::SigmaF,
            };
            let rows = with_threads(args.overrides.threads, || sweep_rows(&sc, param, &args.values))??;
            emit(Some(&args.out), &sweep_csv(param, &rows))
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_cli<I, T>(args: I, env_seed: Option<&str>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli, env_seed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("weakmeas: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    let env_seed = std::env::var(SEED_ENV).ok();
    run_cli(std::env::args_os(), env_seed.as_deref())
}
