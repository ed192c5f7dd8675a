use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use quadfree_cli::commands::{self, CliError, Options, EXIT_PARSE};

#[derive(Parser)]
#[command(name = "quadfree", version, about = "Maximal quadratic-free sets and intersection cuts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical form and case of the instance.
    Canon(Common),
    /// Intersection cut from the instance's cone.
    Cut(Common),
    /// Sampling and identity checks on the chosen free set.
    Verify(Common),
    /// Boundary curves or surfaces of S and free sets.
    Plot(Common),
    /// Cutting loop on the instance's linear relaxation (JSON lines).
    Loop(Common),
}

#[derive(Args)]
struct Common {
    instance: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Overridden by QUADFREE_SEED.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    /// Comma-separated: S, built, CLambda, CGLambda, CPhiLambda, CRPhiLambda.
    #[arg(long, value_delimiter = ',')]
    layers: Option<Vec<String>>,
    /// Zero tolerance for eigenvalues and the h block.
    #[arg(long, default_value_t = quadfree::DEFAULT_ZERO_TOL)]
    tol: f64,
    /// Use this free set instead of the one the case selects.
    #[arg(long)]
    free_set: Option<String>,
    /// Half-width of the plotting box around the origin.
    #[arg(long)]
    extent: Option<f64>,
    /// Grid cells per axis for plotting.
    #[arg(long)]
    cells: Option<usize>,
}

impl Common {
    fn options(&self) -> Result<Options, CliError> {
        let seed = match std::env::var("QUADFREE_SEED") {
            Ok(v) => v.trim().parse().map_err(|_| CliError {
                code: EXIT_PARSE,
                message: format!("QUADFREE_SEED is not an unsigned integer: {v:?}"),
                output: None,
            })?,
            Err(_) => self.seed,
        };
        Ok(Options {
            samples: self.samples,
            seed,
            max_iters: self.max_iters,
            layers: self.layers.clone(),
            tol: self.tol,
            free_set: self.free_set.clone(),
            extent: self.extent,
            cells: self.cells,
        })
    }
}

fn print(v: &Value) {
    let mut out = std::io::stdout().lock();
    let _ = serde_json::to_writer_pretty(&mut out, v);
    let _ = writeln!(out);
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (Command::Canon(c) | Command::Cut(c) | Command::Verify(c) | Command::Plot(c) | Command::Loop(c)) =
        &cli.command;
    let opts = c.options()?;
    let text = std::fs::read_to_string(&c.instance).map_err(|e| CliError {
        code: EXIT_PARSE,
        message: format!("{}: {e}", c.instance.display()),
        output: None,
    })?;
    let loaded = commands::load(&text)?;
    let inst = &loaded.instance;
    match cli.command {
        Command::Canon(_) => print(&commands::canon(inst, &opts)?),
        Command::Cut(_) => print(&commands::cut(inst, &opts)?),
        Command::Verify(_) => print(&commands::verify(inst, &opts)?),
        Command::Plot(_) => print(&commands::plot(inst, &opts, &loaded.hash)?),
        Command::Loop(_) => commands::run_loop(inst, &opts, |line| {
            let mut out = std::io::stdout().lock();
            let _ = serde_json::to_writer(&mut out, &line);
            let _ = writeln!(out);
        })?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(out) = &e.output {
                print(out);
            }
            eprintln!("quadfree: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
