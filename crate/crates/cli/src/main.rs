mod config;
mod error;
mod output;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use torsion_core::catalog::HolomorphicGraph;
use torsion_core::verify::{run_suite, DEFAULT_LEVELS};

use config::{presets, render_sampled, Overrides, RunConfig};
use error::{CliError, CliResult};
use output::{render_csv, write_outputs};
use pipeline::Outcome;

#[derive(Parser)]
#[command(name = "torsion", version, about = "Torsion of normal sections of disc immersions in R^4")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid as NR,NT; overrides the config.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Directory for the report and field tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Norm exponent for the bound report, p > 2 or `inf`.
    #[arg(long)]
    p: Option<f64>,
    /// Report tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Torsions, curvature, total torsion and criticality residuals.
    Analyze(Common),
    /// Rotate to the critical section and report before/after.
    Criticalize(Common),
    /// Complex torsion from the Riemann-Hilbert problem, checked against the PDE route.
    RhSolve(Common),
    /// Built-in example configurations.
    Example {
        #[command(subcommand)]
        action: ExampleAction,
    },
    /// Run the invariant suite and print one line per check.
    Verify {
        /// Finest grid as NR,NT; two coarser halvings are added.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
    },
}

#[derive(Subcommand)]
enum ExampleAction {
    /// List the presets.
    List,
    /// Print a preset as a TOML config.
    Emit { name: String },
    /// Print a holomorphic graph as a sampled immersion table.
    Sample {
        /// Polynomial coefficients as re,im pairs, lowest degree first.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coefficients: Vec<f64>,
        #[arg(long, value_parser = parse_grid)]
        grid: (usize, usize),
    },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected NR,NT")?;
    let a = a.trim().parse().map_err(|e| format!("NR: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("NT: {e}"))?;
    Ok((a, b))
}

fn load(c: &Common) -> CliResult<RunConfig> {
    let ov = Overrides {
        grid: c.grid,
        out: c.out.clone(),
        p: c.p,
        tol: c.tol,
    };
    RunConfig::load(c.config.as_deref(), &ov)
}

/// Serializes everything first, then writes; nothing lands on disk on failure.
fn emit(cfg: &RunConfig, outcome: Outcome) -> CliResult<()> {
    let Outcome { mut report, tables } = outcome;
    let mut files = Vec::new();
    if let Some(dir) = &cfg.out_dir {
        if cfg.write_fields {
            for t in &tables {
                let path = dir.join(format!("{}.csv", t.stem));
                report.files.push(path.display().to_string());
                files.push((path, render_csv(t, &cfg.grid)));
            }
        }
        let path = dir.join("report.json");
        report.files.push(path.display().to_string());
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        files.push((path, json + "\n"));
        write_outputs(dir, &files)?;
    }
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn example(action: ExampleAction) -> CliResult<()> {
    match action {
        ExampleAction::List => {
            for (name, about, _) in presets() {
                println!("{name:<12} {about}");
            }
        }
        ExampleAction::Emit { name } => {
            let (_, _, fc) = presets()
                .into_iter()
                .find(|p| p.0 == name)
                .ok_or_else(|| CliError::Config(format!("unknown example {name:?}")))?;
            print!("{}", toml::to_string(&fc).map_err(|e| CliError::Config(e.to_string()))?);
        }
        ExampleAction::Sample { coefficients, grid } => {
            if coefficients.len() % 2 != 0 {
                return Err(CliError::Config("coefficients come in re,im pairs".into()));
            }
            let spec = HolomorphicGraph::new(
                coefficients
                    .chunks(2)
                    .map(|c| num_complex::Complex64::new(c[0], c[1]))
                    .collect(),
            );
            let g = torsion_core::DiscGrid::new(grid.0, grid.1)?;
            print!("{}", render_sampled(&spec, &g)?);
        }
    }
    Ok(())
}

fn verify(grid: Option<(usize, usize)>) -> CliResult<()> {
    let levels: Vec<(usize, usize)> = match grid {
        Some((nr, nt)) => {
            if nr % 4 != 0 || nt % 4 != 0 {
                return Err(CliError::Config("verify grid must be divisible by 4".into()));
            }
            vec![(nr / 4, nt / 4), (nr / 2, nt / 2), (nr, nt)]
        }
        None => DEFAULT_LEVELS.to_vec(),
    };
    for &(nr, nt) in &levels {
        torsion_core::DiscGrid::new(nr, nt)?;
    }
    let checks = run_suite(&levels)?;
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze(c) => {
            let cfg = load(&c)?;
            emit(&cfg, pipeline::analyze(&cfg)?)
        }
        Command::Criticalize(c) => {
            let cfg = load(&c)?;
            emit(&cfg, pipeline::criticalize(&cfg)?)
        }
        Command::RhSolve(c) => {
            let cfg = load(&c)?;
            emit(&cfg, pipeline::rh_solve_cmd(&cfg)?)
        }
        Command::Example { action } => example(action),
        Command::Verify { grid } => verify(grid),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("torsion: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
