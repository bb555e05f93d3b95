use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hitsel::BackendKind;
use hitsel_bench::{cmd_compare, cmd_generate, cmd_run, cmd_scaling, config, RunConfig, Scenario};

/// Compare active-particle selection schemes on Hermite N-body workloads.
#[derive(Parser, Debug)]
#[command(name = "hitsel-bench", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write Plummer initial conditions (plus optional central mass and binary) as a snapshot.
    Generate(Opts),
    /// Integrate one configuration and emit a CSV row.
    Run(Opts),
    /// Run the good case at several particle numbers and fit mean N_act ~ N^x.
    Scaling(Opts),
    /// Run one configuration under several backends and segment counts.
    Compare(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    /// Particle number; a comma-separated list for `scaling`.
    #[arg(long, value_delimiter = ',', default_value = "1024")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Integration span in time units (a multiple of 1/8).
    #[arg(long, default_value_t = 0.25)]
    t_end: f64,
    /// Aarseth accuracy parameter.
    #[arg(long, default_value_t = hitsel::hermite::DEFAULT_ETA)]
    eta: f64,
    /// Starting-step parameter.
    #[arg(long, default_value_t = hitsel::hermite::DEFAULT_ETA_S)]
    eta_s: f64,
    /// Plummer softening length; overrides the snapshot's value with --in.
    #[arg(long, default_value_t = config::DEFAULT_SOFTENING)]
    eps: f64,
    /// Mass of the central particle as a fraction of the total.
    #[arg(long, default_value_t = config::DEFAULT_CENTRAL_MASS)]
    central: f64,
    /// Separation of a binary injected around the central particle.
    #[arg(long)]
    binary_a: Option<f64>,
    /// good, bad or random; defaults to bad when --binary-a is given.
    #[arg(long)]
    scenario: Option<Scenario>,
    /// naive, segmented, sorted or bucket; a comma-separated list for `compare`.
    #[arg(long, value_delimiter = ',')]
    backend: Vec<BackendKind>,
    /// Segment count for the segmented backend; a list for `compare`.
    #[arg(long, value_delimiter = ',')]
    segments: Vec<usize>,
    /// Read the initial snapshot from this file instead of generating it.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output file (default: stdout). `run` appends to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Opts {
    fn config(&self) -> Result<RunConfig> {
        let scenario = match (self.scenario, self.binary_a) {
            (Some(s), _) => s,
            (None, Some(_)) => Scenario::Bad,
            (None, None) => Scenario::Good,
        };
        let binary_a = match (scenario, self.binary_a) {
            (Scenario::Bad, None) => Some(config::DEFAULT_BINARY_A),
            (_, a) => a,
        };
        let cfg = RunConfig {
            scenario,
            n: self.n[0],
            seed: self.seed,
            t_end: self.t_end,
            eta: self.eta,
            eta_s: self.eta_s,
            softening: self.eps,
            central: self.central,
            binary_a,
            backend: self.backend.first().copied().unwrap_or(BackendKind::Bucket),
            segments: self.segments.first().copied().unwrap_or(1),
            input: self.input.clone(),
            output: self.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn single(&self, what: &str) -> Result<()> {
        if self.n.len() > 1 || self.backend.len() > 1 || self.segments.len() > 1 {
            bail!("{what} takes a single --n, --backend and --segments value");
        }
        Ok(())
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn io::Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(opts) => {
            opts.single("generate")?;
            let cfg = opts.config()?;
            cmd_generate(&cfg, output(&cfg.output)?)?;
        }
        Command::Run(opts) => {
            opts.single("run")?;
            let cfg = opts.config()?;
            let row = cmd_run(&cfg, io::stdout().lock())?;
            eprintln!(
                "{} {} n={}: {} steps, mean N_act {:.2}, select {:.3e} s, force {:.3e} s, dE/E {:.2e}",
                row.scenario,
                row.backend,
                row.n,
                row.steps,
                row.mean_nact,
                row.select_seconds,
                row.force_seconds,
                row.energy_rel_drift
            );
        }
        Command::Scaling(opts) => {
            let cfg = opts.config()?;
            let table = cmd_scaling(&cfg, &opts.n)?;
            table.write_csv(output(&cfg.output)?, &cfg)?;
            eprintln!("fitted exponent {:.3}", table.exponent);
        }
        Command::Compare(opts) => {
            let cfg = opts.config()?;
            let backends = if opts.backend.is_empty() {
                BackendKind::ALL.to_vec()
            } else {
                opts.backend.clone()
            };
            let segments = if opts.segments.is_empty() { vec![1, 2, 4] } else { opts.segments.clone() };
            let rows = cmd_compare(&cfg, &backends, &segments)?;
            hitsel_bench::commands::write_table(output(&cfg.output)?, &cfg, &rows)?;
        }
    }
    Ok(())
}
