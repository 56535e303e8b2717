use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gchaos::{parse_config, ConfigError, Format, Report, RunConfig};

#[derive(Parser)]
#[command(name = "gchaos", version, about = "Chaos-identity verification under volatility uncertainty")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every verification suite.
    Verify,
    /// Grid-refinement study of the chaos identity.
    Convergence,
    /// Upper and lower expectations of the configured payoffs.
    Expectation,
    /// Solve the G-heat equation for the configured payoffs.
    Gheat,
    /// Print exact Hermite coefficients.
    HermiteTable {
        /// Highest degree; defaults to the largest configured chaos order, else 10.
        #[arg(long)]
        max_degree: Option<usize>,
    },
}

const EXIT_CONFIG: u8 = 2;

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| ConfigError::new("--config", "a configuration file is required"))?;
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(Report, Option<RunConfig>), ConfigError> {
    if let Command::HermiteTable { max_degree } = cli.command {
        let cfg = match &cli.config {
            Some(_) => Some(load(cli)?),
            None => None,
        };
        let top = max_degree
            .or_else(|| cfg.as_ref().and_then(|c| c.chaos_orders.iter().copied().max()))
            .unwrap_or(10);
        return Ok((gchaos::run_hermite_table(top), cfg));
    }
    let cfg = load(cli)?;
    let report = match cli.command {
        Command::Verify => gchaos::run_verify(&cfg)?,
        Command::Convergence => gchaos::run_convergence(&cfg)?,
        Command::Expectation => gchaos::run_expectation(&cfg)?,
        Command::Gheat => gchaos::run_gheat(&cfg)?,
        Command::HermiteTable { .. } => unreachable!(),
    };
    Ok((report, Some(cfg)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, cfg) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.as_ref().and_then(|c| c.output_dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let (json, csv) = match &cfg {
        Some(c) => (c.wants(Format::Json), c.wants(Format::Csv)),
        None => (true, true),
    };
    if let Err(e) = report.write(&dir, json, csv) {
        eprintln!("cannot write reports to {}: {e}", dir.display());
        return ExitCode::from(1);
    }
    print!("{}", report.summary());
    ExitCode::from(report.exit_code() as u8)
}
