use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use growfrag::analysis::Method;
use growfrag_cli::commands::{self, EvalMethod};
use growfrag_cli::{CliError, Result, RunConfig};

/// Numerical laboratory for the critical growth-fragmentation equation.
///
/// Exit status: 0 success, 2 invalid input or domain error, 3 numerical
/// guard tripped, 4 analysis check failed, 1 I/O failure.
#[derive(Parser)]
#[command(name = "growfrag", version, allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Configuration file and per-field overrides; flags win over the file.
#[derive(Args)]
struct Overrides {
    /// Configuration file (`[section]` headers, `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    #[arg(long, global = true)]
    g: Option<String>,
    #[arg(long, global = true)]
    b: Option<String>,
    /// e.g. "loggaussian mu=0 sigma=0.1 mass=1"
    #[arg(long, global = true)]
    profile: Option<String>,
    #[arg(long, global = true)]
    y_min: Option<String>,
    #[arg(long, global = true)]
    y_max: Option<String>,
    /// Grid cells per ln(alpha).
    #[arg(long, global = true)]
    m: Option<String>,
    #[arg(long, global = true)]
    t_end: Option<String>,
    #[arg(long, global = true)]
    dt: Option<String>,
    /// Comma-separated snapshot times, or "auto".
    #[arg(long, global = true)]
    snapshots: Option<String>,
    /// Comma-separated ray slopes y < 0, or "auto".
    #[arg(long = "probe-y", global = true)]
    probe_y: Option<String>,
    #[arg(long, global = true)]
    window_start: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Comma-separated subset of csv, svg.
    #[arg(long, global = true)]
    formats: Option<String>,
    /// Any other field as SECTION.KEY=VALUE; repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate u(t, x) at every pair of the given times and sizes.
    #[command(allow_negative_numbers = true)]
    Evaluate {
        #[arg(long, value_enum)]
        method: EvalMethod,
        /// Comma-separated times.
        #[arg(long)]
        t: String,
        /// Comma-separated sizes.
        #[arg(long)]
        x: String,
    },
    /// Run the grid solver and write snapshots and diagnostics.
    #[command(allow_negative_numbers = true)]
    Solve,
    /// Regenerate the data and plot of one figure.
    #[command(allow_negative_numbers = true)]
    Figures {
        #[arg(long)]
        id: u32,
    },
    /// Run the configured checks; exits 4 if any fails.
    #[command(allow_negative_numbers = true)]
    Analyze,
    /// Compare the series route with the others.
    #[command(allow_negative_numbers = true)]
    Compare {
        /// Comma-separated subset of pde, mellin, asymp-theta, asymp-poisson.
        #[arg(long)]
        methods: Option<String>,
    },
}

fn read_config(o: &Overrides) -> Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    let flags = [
        ("model.alpha", &o.alpha),
        ("model.g", &o.g),
        ("model.b", &o.b),
        ("model.profile", &o.profile),
        ("grid.y_min", &o.y_min),
        ("grid.y_max", &o.y_max),
        ("grid.m", &o.m),
        ("time.t_end", &o.t_end),
        ("time.dt", &o.dt),
        ("time.snapshots", &o.snapshots),
        ("probes.rays", &o.probe_y),
        ("probes.window_start", &o.window_start),
        ("output.dir", &o.out),
        ("output.formats", &o.formats),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    for item in &o.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects SECTION.KEY=VALUE, got `{item}`")))?;
        cfg.set(key.trim(), value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn list(name: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("--{name}: `{s}` is not a number")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<String> {
    let cfg = read_config(&cli.overrides)?;
    match cli.command {
        Command::Evaluate { method, t, x } => commands::evaluate(&cfg, method, &list("t", &t)?, &list("x", &x)?),
        Command::Solve => commands::solve(&cfg),
        Command::Figures { id } => commands::figures(&cfg, id),
        Command::Analyze => {
            let analysis = commands::analyze(&cfg)?;
            match analysis.failure {
                None => Ok(analysis.text),
                Some(e) => {
                    print!("{}", analysis.text);
                    Err(e)
                }
            }
        }
        Command::Compare { methods } => {
            let methods = methods
                .map(|m| m.split(',').map(|s| s.trim().parse::<Method>()).collect::<Result<Vec<_>, _>>())
                .transpose()?;
            commands::compare(&cfg, methods)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("growfrag: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
