use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sobolev_lab::harness::{self, ExperimentConfig, RunConfig, SweepConfig};
use sobolev_lab::Error;

#[derive(Parser, Debug)]
#[command(name = "sobolev-lab", version, about = "Run sobolev-lab experiments")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `out/<experiment>`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Time-grid size, for experiments that take one.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Half-width of the k range.
    #[arg(long = "kA", global = true)]
    k_a: Option<f64>,
    /// Number of k nodes.
    #[arg(long = "kM", global = true)]
    k_m: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    Evolve,
    Sweep,
    Theorem11,
    Lemma22,
    Oscillatory,
    Wkb,
    Diadic,
    Growth,
    Variation,
    FuzzAppendix,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Sweep => "sweep",
            Command::Theorem11 => "theorem11",
            Command::Lemma22 => "lemma22",
            Command::Oscillatory => "oscillatory",
            Command::Wkb => "wkb",
            Command::Diadic => "diadic",
            Command::Growth => "growth",
            Command::Variation => "variation",
            Command::FuzzAppendix => "fuzz_appendix",
        }
    }
}

fn config_error(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let name = cli.command.name();
    let mut cfg = match &cli.config {
        Some(path) => {
            let cfg = RunConfig::load(path)?;
            if cfg.experiment.name() != name {
                return Err(config_error(
                    "experiment.name",
                    format!("config is for `{}`, subcommand is `{name}`", cfg.experiment.name()),
                ));
            }
            cfg
        }
        None => match ExperimentConfig::default_for(name) {
            Some(e) => RunConfig::new(e),
            None => return Err(config_error("--config", format!("`{name}` needs a config file"))),
        },
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.k_a.is_some() || cli.k_m.is_some() {
        let base = cfg.sweep();
        cfg.sweep = Some(SweepConfig::new(cli.k_a.unwrap_or(base.a), cli.k_m.unwrap_or(base.m)));
    }
    if let Some(g) = cli.grid {
        match &mut cfg.experiment {
            ExperimentConfig::Lemma22(e) => e.grid = g,
            ExperimentConfig::Variation(e) => e.curve_grid = g,
            _ => return Err(config_error("--grid", format!("`{name}` has no time grid"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));
    let result = harness::run(&cfg, &out, cli.threads);
    let code = harness::exit_code(&result);
    match &result {
        Ok((output, _)) => {
            for c in &output.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.criterion, c.detail);
            }
            if let Some(c) = output.first_failure() {
                eprintln!("assertion failed: {}", c.criterion);
            }
            println!("wrote {}", out.display());
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(code as u8)
}
