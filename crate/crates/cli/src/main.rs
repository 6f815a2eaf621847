use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use renorm_cli::commands::{self, Output};
use renorm_cli::config::{Format, RunConfig};
use renorm_cli::emit;
use renorm_cli::error::CliError;
use renorm_core::acceptance::{Golden, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(
    name = "renorm",
    version,
    about = "Characteristic functions and partition functions of Gaussian free fields on a discrete spectrum"
)]
struct Cli {
    /// JSON run configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory. Without it, results go to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for Monte-Carlo sampling and the acceptance suite.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Class membership, loop sums, r(Lambda) and kappa of the configured spectrum.
    Spectrum,
    /// Raw, flowed and renormalized characteristic functions on the s grid.
    Phi,
    /// Partition-function decay, flow and theta profile.
    Z,
    /// Convergence of the cutoff flow towards the renormalized limits.
    Flow,
    /// Exact moment polynomials, the renormalization identity and series coefficients.
    Diagrams {
        /// Highest moment / series order (at most 20).
        #[arg(long)]
        order: Option<u32>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Only list the criteria.
        #[arg(long)]
        list: bool,
        /// JSON file overriding reference constants.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;

    let outputs = match cli.command {
        Command::Spectrum => commands::spectrum(&cfg)?,
        Command::Phi => commands::phi(&cfg)?,
        Command::Z => commands::z(&cfg)?,
        Command::Flow => commands::flow(&cfg)?,
        Command::Diagrams { order } => commands::diagrams(&cfg, order.unwrap_or(cfg.order))?,
        Command::Verify { list, golden } => return verify(&cfg, cli.seed, list, golden),
    };
    emit(&outputs, cfg.format, cfg.output.as_deref(), &mut io::stdout().lock())?;
    if let Some(Output::Text { text, .. }) = outputs.iter().find(|o| o.name() == "identity_failure") {
        return Err(CliError::Verification(text.trim_end().to_string()));
    }
    Ok(())
}

fn verify(cfg: &RunConfig, seed: Option<u64>, list: bool, golden: Option<PathBuf>) -> Result<(), CliError> {
    if list {
        print!("{}", commands::list_criteria());
        return Ok(());
    }
    let golden = match golden {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Golden::from_json(&text)?
        }
        None => Golden::default(),
    };
    let (passed, report) = commands::verify(seed.unwrap_or(DEFAULT_SEED), golden, |line| println!("{line}"));
    if let Some(dir) = &cfg.output {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("verify_report.txt"), &report)?;
    }
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.lines().filter(|l| l.contains(" FAIL ")).collect();
        Err(CliError::Verification(format!("acceptance failures:\n{}", failed.join("\n"))))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
