use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dephasure::cli::{self, CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "dephasure",
    version,
    about = "Pulsed two-qubit dephasing: concurrence, sweeps and exact-oracle checks"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// key=value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (directory for figure2); stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["derived", "verbatim"])]
    form: Option<String>,
    #[arg(long, global = true, value_parser = ["paper", "physical"])]
    prefactor: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Γ and C on the configured time grid
    Simulate,
    /// The six preset panels fig2a..fig2f
    Figure2 {
        /// Also write a matplotlib script next to the CSVs
        #[arg(long)]
        plot_script: bool,
    },
    /// C at t_max for each pulse interval
    Sweep {
        /// Comma-separated intervals (overrides tau_list), e.g. pi/5,pi,2pi
        #[arg(long)]
        taus: Option<String>,
    },
    /// Compare both analytic exponents with the truncated-Fock oracle
    OracleCheck,
    /// Dump the discretized spectrum
    Spectrum,
}

fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            cli::parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(f) = &args.form {
        cfg.form = cli::parse_form(f).map_err(CliError::Config)?;
    }
    if let Some(p) = &args.prefactor {
        cfg.prefactor = cli::parse_prefactor(p).map_err(CliError::Config)?;
    }
    if args.out.is_some() {
        cfg.output_path = args.out.clone();
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DEPHASURE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Config(format!(
            "DEPHASURE_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Writes to `path`, or stdout when there is none. Returns whether a file was written.
fn emit(path: Option<&Path>, text: &str) -> Result<bool, CliError> {
    match path {
        Some(p) => cli::write_atomic(p, text).map(|_| true),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Runtime(format!("stdout: {e}")))?;
            Ok(false)
        }
    }
}

fn run(args: &Args) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = load_config(args)?;
    let out = cfg.output_path.as_deref();
    match &args.command {
        Command::Simulate => {
            emit(out, &cli::run_simulate(&cfg)?)?;
        }
        Command::Spectrum => {
            emit(out, &cli::run_spectrum(&cfg)?)?;
        }
        Command::Sweep { taus } => {
            let list = match taus {
                Some(t) => {
                    cli::parse_real_list(t).map_err(|e| CliError::Config(format!("--taus: {e}")))?
                }
                None => cfg.tau_list.clone(),
            };
            emit(out, &cli::run_sweep(&cfg, &list)?)?;
        }
        Command::Figure2 { plot_script } => {
            let dir = out.unwrap_or(Path::new("."));
            std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
                path: dir.display().to_string(),
                source: e,
            })?;
            for (name, csv) in cli::run_figure2(&cfg)? {
                cli::write_atomic(&dir.join(name), &csv)?;
            }
            if *plot_script {
                cli::write_atomic(&dir.join("plot_fig2.py"), cli::PLOT_SCRIPT)?;
            }
        }
        Command::OracleCheck => {
            let check = cli::oracle_check(&cfg)?;
            let to_file = emit(out, &check.report.to_csv())?;
            if to_file {
                println!("{}", check.summary());
            } else {
                eprintln!("{}", check.summary());
            }
            if !check.passed() {
                return Err(CliError::Runtime(
                    "no analytic branch matches the oracle within tolerance".into(),
                ));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dephasure: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
