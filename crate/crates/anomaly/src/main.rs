use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anomaly::commands::{self, Output};
use anomaly::config::{self, Format, Mode, Overrides, Settings, THREADS_ENV};
use anomaly::CliError;
use clap::{Args, Parser, Subcommand};

/// Anomalies of random SL(2,R) products: classification, invariant
/// densities and Lyapunov exponents.
///
/// Exit codes: 0 ok, 1 I/O, 2 invalid input, 3 family lacks the required
/// anomaly structure. Errors are written to stderr as JSON.
#[derive(Parser, Debug)]
#[command(name = "anomaly", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags override its fields
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Catalog family name
    #[arg(long, global = true, value_name = "NAME")]
    family: Option<String>,
    /// Catalog parameter override, repeatable
    #[arg(long = "param", global = true, value_name = "K=V", value_parser = config::parse_param)]
    params: Vec<(String, f64)>,
    /// Write the primary output here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    chains: Option<u32>,
    /// Steps per chain
    #[arg(long, global = true, value_name = "N")]
    steps: Option<u64>,
    #[arg(long, global = true, value_name = "X", allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Strictly decreasing λ values
    #[arg(long, global = true, value_name = "X1,X2,...", allow_hyphen_values = true)]
    ladder: Option<String>,
    /// Density grid size
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Largest anomaly order tried
    #[arg(long, global = true, value_name = "N")]
    kmax: Option<u32>,
    /// Worker cap (falls back to ANOMALY_THREADS)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Anomaly order, degree, type and normal form
    Classify,
    /// Lowest-order invariant density (CSV: theta,rho0,kappa,K)
    Density,
    /// Lyapunov exponent: Monte Carlo, perturbative coefficient, or both
    Gamma {
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Monte Carlo over a λ ladder with a log-log fit (CSV: lambda,gamma,stderr,chains,steps,seed)
    Sweep,
    /// List catalog entries, or print one as an inline family config
    Catalog { name: Option<String> },
}

fn settings(common: Common, mode: Option<Mode>) -> Result<Settings, CliError> {
    let o = Overrides {
        config: common.config,
        family: common.family,
        params: common.params,
        lambda: common.lambda,
        ladder: common.ladder.as_deref().map(config::parse_ladder).transpose().map_err(CliError::Validation)?,
        seed: common.seed,
        chains: common.chains,
        steps: common.steps,
        grid: common.grid,
        kmax: common.kmax,
        out: common.out,
        format: common.format,
        threads: common.threads,
        mode,
    };
    config::resolve(o, std::env::var(THREADS_ENV).ok().as_deref())
}

fn write_out(s: &Settings, out: &Output) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    match &s.out {
        Some(path) => {
            std::fs::write(path, &out.primary).map_err(|e| CliError::io(path.display().to_string(), e))?;
            if let Some(sum) = &out.summary {
                stdout.lock().write_all(sum.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
            }
        }
        None => stdout
            .lock()
            .write_all(out.primary.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e))?,
    }
    Ok(())
}

fn fail(e: &CliError, details: Option<serde_json::Value>) -> ExitCode {
    eprint!("{}", e.to_json(details));
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::validation(e.render().to_string().trim_end()), None),
    };
    let mode = match &cli.cmd {
        Cmd::Gamma { mode } => *mode,
        _ => None,
    };
    let s = match settings(cli.common, mode) {
        Ok(s) => s,
        Err(e) => return fail(&e, None),
    };
    let res = match &cli.cmd {
        Cmd::Classify => commands::cmd_classify(&s),
        Cmd::Density => commands::cmd_density(&s),
        Cmd::Gamma { .. } => commands::cmd_gamma(&s),
        Cmd::Sweep => commands::cmd_sweep(&s),
        Cmd::Catalog { name } => commands::cmd_catalog(&s, name.as_deref()),
    };
    match res.and_then(|out| write_out(&s, &out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let details = (e.exit_code() == 3).then(|| commands::classify_failure_details(&s)).flatten();
            fail(&e, details)
        }
    }
}
