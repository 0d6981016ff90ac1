//! `hetnet`: batch front-end for the downlink performance engine.
//!
//! Every output file embeds its full invocation (configuration + seed +
//! parameters) in a header line, and `hetnet replay <file>` regenerates the
//! file from that header alone.

mod config;
mod output;
mod runner;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::AppConfig;
use output::{render, Invocation, OutFormat, TOOL_VERSION};

/// Error carrying the process exit code contract:
/// 2 = configuration error, 3 = numeric non-convergence, 4 = check failure.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: msg.into(),
        }
    }
    pub fn no_convergence(msg: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: msg.into(),
        }
    }
}

impl From<hetnet_core::Error> for CliError {
    fn from(e: hetnet_core::Error) -> Self {
        let code = match e {
            hetnet_core::Error::NoConvergence(_) | hetnet_core::Error::Divergent(_) => 3,
            hetnet_core::Error::Domain(_) | hetnet_core::Error::Config(_) => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hetnet",
    version,
    about = "Downlink metrics for multi-tier Poisson cellular networks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file (TOML; JSON accepted for replayed headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Override sim.drops from the config.
    #[arg(long, global = true)]
    drops: Option<u64>,
    /// Override sim.seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for simulation and sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the adaptive-integration tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Permit the path-loss exponent boundary value alpha = 2.
    #[arg(long = "allow-alpha-2", global = true)]
    allow_alpha_2: bool,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum Format {
    Csv,
    JsonLines,
}

#[derive(Subcommand)]
enum Command {
    /// Fading PDF table (exact vs series) for one tier.
    Pdf {
        #[arg(long, default_value_t = 0)]
        tier: usize,
        #[arg(long, default_value_t = 200)]
        points: u64,
        #[arg(long)]
        x_max: Option<f64>,
    },
    /// Laguerre expansion coefficients of one tier's fading PDF.
    Coeffs {
        #[arg(long, default_value_t = 0)]
        tier: usize,
    },
    /// Spectral efficiency of the configured network (single row).
    Rate,
    /// SINR moments E[SINR^r] for a list of orders.
    Moments {
        /// Comma-separated list of moment orders.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        orders: Option<Vec<f64>>,
    },
    /// Truncated SINR moment-generating function at given arguments.
    Mgf {
        #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
        points: Option<Vec<f64>>,
        #[arg(long, default_value_t = 12)]
        terms: u64,
    },
    /// Outage probability over a grid of SINR thresholds.
    Outage {
        /// Comma-separated thresholds in dB.
        #[arg(long = "thresholds-db", value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
        thresholds_db: Option<Vec<f64>>,
    },
    /// Monte Carlo estimate of one metric.
    Simulate {
        /// rate | outage:<T_dB> | moment:<r> | laplace:<s>
        #[arg(long, default_value = "rate")]
        metric: String,
        /// Stream raw drop records (newline-delimited) to this file.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Evaluate the configured [sweep] section over its grid.
    Sweep,
    /// Cross-check analytic results against the simulator.
    Validate,
    /// Regenerate an output file from its embedded header.
    Replay { file: PathBuf },
}

fn require_config(common: &Common) -> Result<AppConfig, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config <file> is required"))?;
    AppConfig::load(path)
}

fn apply_overrides(cfg: &mut AppConfig, common: &Common) {
    if let Some(d) = common.drops {
        cfg.sim.drops = d;
    }
    if let Some(s) = common.seed {
        cfg.sim.seed = s;
    }
    if let Some(t) = common.tol {
        cfg.numerics.integral_tol = Some(t);
        cfg.numerics.laguerre_tol = Some(t);
    }
    if common.allow_alpha_2 {
        cfg.network.allow_alpha_two = true;
    }
}

fn build_invocation(cli: &Cli) -> Result<Invocation, CliError> {
    let mut cfg = require_config(&cli.common)?;
    apply_overrides(&mut cfg, &cli.common);
    cfg.finalize()?;
    let mut params: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    let command = match &cli.command {
        Command::Pdf {
            tier,
            points,
            x_max,
        } => {
            params.insert("tier".into(), serde_json::json!(tier));
            params.insert("points".into(), serde_json::json!(points));
            if let Some(x) = x_max {
                params.insert("x_max".into(), serde_json::json!(x));
            }
            "pdf"
        }
        Command::Coeffs { tier } => {
            params.insert("tier".into(), serde_json::json!(tier));
            "coeffs"
        }
        Command::Rate => "rate",
        Command::Moments { orders } => {
            if let Some(o) = orders {
                params.insert("orders".into(), serde_json::json!(o));
            }
            "moments"
        }
        Command::Mgf { points, terms } => {
            if let Some(p) = points {
                params.insert("points".into(), serde_json::json!(p));
            }
            params.insert("terms".into(), serde_json::json!(terms));
            "mgf"
        }
        Command::Outage { thresholds_db } => {
            if let Some(t) = thresholds_db {
                params.insert("thresholds_db".into(), serde_json::json!(t));
            }
            "outage"
        }
        Command::Simulate { metric, .. } => {
            params.insert("metric".into(), serde_json::json!(metric));
            "simulate"
        }
        Command::Sweep => "sweep",
        Command::Validate => "validate",
        Command::Replay { .. } => unreachable!("replay handled before invocation building"),
    };
    Ok(Invocation {
        version: TOOL_VERSION.to_string(),
        command: command.to_string(),
        format: match cli.common.format {
            Format::Csv => OutFormat::Csv,
            Format::JsonLines => OutFormat::JsonLines,
        },
        params,
        config: cfg,
    })
}

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::config(format!("stdout: {e}")))
        }
    }
}

fn write_drop_log(inv: &Invocation, path: &PathBuf) -> Result<(), CliError> {
    let cfg = &inv.config;
    let mode = cfg.sim.mode.to_mode();
    let sim = match cfg.sim.region_radius {
        Some(r) => hetnet_core::SimConfig {
            region_radius: r,
            drops: cfg.sim.drops,
            seed: cfg.sim.seed,
            conditioning: None,
            mode,
        },
        None => hetnet_core::SimConfig::auto(&cfg.network, cfg.sim.drops, cfg.sim.seed, mode)?,
    };
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    hetnet_core::simulator::run_drops(&cfg.network, &sim, |d| {
        hetnet_core::simulator::write_drop_record(&mut w, d).expect("drop log write failed");
    })?;
    Ok(())
}

fn real_main() -> Result<u8, CliError> {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        // Shared pool for simulator chunks; sweeps read the same setting.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let inv = match &cli.command {
        Command::Replay { file } => {
            let text = std::fs::read_to_string(file)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", file.display())))?;
            let mut inv = output::parse_embedded_invocation(&text)?;
            inv.config.finalize()?;
            inv
        }
        _ => build_invocation(&cli)?,
    };

    let outcome = runner::execute(&inv)?;
    emit(&cli.common, &render(&inv, &outcome.table))?;

    if let Command::Simulate { log: Some(p), .. } = &cli.command {
        write_drop_log(&inv, p)?;
    }

    if !outcome.checks_passed {
        eprintln!("validation failed: see the FAIL rows in the output table");
        return Ok(4);
    }
    Ok(0)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
