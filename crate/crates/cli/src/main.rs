//! `ssh2d` — config-driven sweeps and CSV emission for the lattice and
//! circuit laboratory.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 numerical failure
//! (diagnostic file written), 3 validation mismatches above tolerance.

mod commands;
mod config;
mod output;

use clap::Parser;
use commands::CommandError;
use output::Provenance;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "ssh2d",
    version,
    about = "Band structures, exceptional points, topology, transport and circuit analogues of a 2D non-Hermitian SSH lattice",
    subcommand_required = true
)]
struct Cli {
    #[command(subcommand)]
    command: Subcommand,
}

#[derive(clap::Subcommand, Debug)]
enum Subcommand {
    /// Band-structure line scans (oracle eigenvalues).
    Bands(CommonArgs),
    /// Symmetry-residual tables over a momentum grid.
    Symmetry(CommonArgs),
    /// Discriminant zeros, degeneracy classification, self-orthogonality.
    #[command(name = "ep-scan")]
    EpScan(CommonArgs),
    /// Wilson-loop phase staircase over the hopping ratio.
    Zak(CommonArgs),
    /// Berry-curvature field on a momentum grid.
    Berry(CommonArgs),
    /// Anomalous Nernst coefficient vs chemical potential.
    Nernst(CommonArgs),
    /// Anomalous Hall conductivity vs chemical potential.
    Ahc(CommonArgs),
    /// Circuit branch sweeps, resonances, and two-point admittance.
    Circuit(CommonArgs),
    /// Finite-lattice spectrum and Bloch consistency.
    Realspace(CommonArgs),
    /// Closed-form vs oracle discrepancy registry.
    Validate(CommonArgs),
}

#[derive(clap::Args, Debug)]
struct CommonArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Dotted-path overrides, e.g. --set model.gamma=0.5
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl Subcommand {
    fn name(&self) -> &'static str {
        match self {
            Subcommand::Bands(_) => "bands",
            Subcommand::Symmetry(_) => "symmetry",
            Subcommand::EpScan(_) => "ep-scan",
            Subcommand::Zak(_) => "zak",
            Subcommand::Berry(_) => "berry",
            Subcommand::Nernst(_) => "nernst",
            Subcommand::Ahc(_) => "ahc",
            Subcommand::Circuit(_) => "circuit",
            Subcommand::Realspace(_) => "realspace",
            Subcommand::Validate(_) => "validate",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Subcommand::Bands(a)
            | Subcommand::Symmetry(a)
            | Subcommand::EpScan(a)
            | Subcommand::Zak(a)
            | Subcommand::Berry(a)
            | Subcommand::Nernst(a)
            | Subcommand::Ahc(a)
            | Subcommand::Circuit(a)
            | Subcommand::Realspace(a)
            | Subcommand::Validate(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    let args = cli.command.args();

    let (cfg, resolved) = match config::load(&args.config, &args.sets) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if cfg.command != name {
        eprintln!(
            "error: config declares command `{}` but `{}` was invoked",
            cfg.command, name
        );
        return ExitCode::from(1);
    }
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return ExitCode::from(1);
    }
    // Resolved-config echo: outputs are self-describing and re-runnable.
    if let Err(e) = std::fs::write(args.out.join("config_echo.json"), format!("{resolved}\n")) {
        eprintln!("error: cannot write config echo: {e}");
        return ExitCode::from(1);
    }

    let prov = Provenance {
        command: name.to_string(),
        config_hash: config::config_hash(&resolved),
    };
    match commands::run(&cfg, &args.out, &prov) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.mismatches {
                eprintln!("validation mismatches found; see validate_summary.json");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(CommandError::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CommandError::Numeric(e)) => {
            let diag = args.out.join("diagnostic.txt");
            let _ = std::fs::write(&diag, format!("command: {name}\nerror: {e:#}\n"));
            eprintln!("numerical failure: {e:#} (diagnostic at {})", diag.display());
            ExitCode::from(2)
        }
    }
}
