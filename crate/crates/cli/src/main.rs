use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use asq_cli::commands::{
    cmd_certify, cmd_ladder, cmd_simulate, cmd_spectra, cmd_verify, VerifySuite,
};
use asq_cli::thread_cap;
use asq_core::dynamics::TerminationStatus;
use asq_core::ManifoldKind;

/// Pseudo-spectral simulator and verification harness for non-local
/// active scalar transport on the torus and the sphere.
#[derive(Parser)]
#[command(name = "asq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured run and persist diagnostics, snapshots and a manifest.
    Simulate {
        /// TOML run configuration
        #[arg(long)]
        config: PathBuf,
        /// output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure the truncation ladder over a recorded run directory.
    Ladder {
        /// run directory produced by `simulate`
        #[arg(long)]
        run: PathBuf,
        /// truncation height K
        #[arg(long)]
        k_const: f64,
        /// time horizon t⋆ (must be covered by snapshots)
        #[arg(long)]
        t_star: f64,
        /// deepest level
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        /// output JSON (default: <run>/ladder.json)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a decay certificate from a parameter JSON.
    Certify {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an inequality verification suite.
    Verify {
        /// interp | interp-torus | cc-pointwise | weyl | hormander | riccati | all
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump eigendata tables.
    Spectra {
        /// torus1d | torus2d | sphere2d
        #[arg(long)]
        manifold: String,
        #[arg(long)]
        resolution: usize,
        #[arg(long, default_value_t = 64)]
        count: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> asq_cli::Result<ExitCode> {
    match cli.command {
        Command::Simulate { config, out } => {
            let outcome = cmd_simulate(&config, &out)?;
            for w in &outcome.manifest.warnings {
                eprintln!("warning: {w}");
            }
            match &outcome.status {
                TerminationStatus::Resolved => println!("status: resolved"),
                TerminationStatus::BlowupSuspected { t_trigger, reason } => {
                    println!("status: blowup_suspected at t = {t_trigger:.6} ({reason:?})")
                }
                TerminationStatus::NumericalFailure { .. } => unreachable!("mapped to error"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Ladder { run, k_const, t_star, k_max, out } => {
            let outcome = cmd_ladder(&run, k_const, t_star, k_max, out.as_deref())?;
            for e in &outcome.series.entries {
                println!(
                    "k = {:2}  t_k = {:.6}  E_k = {:.6e}  D_k = {:.6e}",
                    e.k, e.t_k, e.e_k, e.d_k
                );
            }
            if outcome.residuals_ok {
                println!("virial residuals within tolerance {:.3e}", outcome.residual_tolerance);
                Ok(ExitCode::SUCCESS)
            } else {
                println!(
                    "virial residual exceeds tolerance {:.3e}",
                    outcome.residual_tolerance
                );
                Ok(ExitCode::from(1))
            }
        }
        Command::Certify { params, out } => {
            let cert = cmd_certify(&params, out.as_deref())?;
            println!(
                "holds: {}  t_star = {:.6e}  K = {:.6e}  margin = {:.6e}",
                cert.holds, cert.t_star, cert.k_const, cert.contradiction_margin
            );
            println!(
                "  smallness: {}  margin: {}  recurrence collapse: {}",
                cert.smallness_holds, cert.margin_holds, cert.recurrence_converges
            );
            Ok(if cert.holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Verify { suite, seed, trials, out } => {
            let suite: VerifySuite = suite
                .parse()
                .map_err(asq_cli::CliError::Config)?;
            let outcome = cmd_verify(suite, seed, trials, &out, thread_cap())?;
            for r in &outcome.reports {
                println!(
                    "{}: trials = {}, worst ratio = {:.6e}, constant = {:.6e}, violations = {}",
                    r.name, r.trials, r.worst_ratio, r.fitted_constant, r.violations
                );
            }
            Ok(if outcome.all_clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Spectra { manifold, resolution, count } => {
            let kind = match manifold.as_str() {
                "torus1d" => ManifoldKind::Torus1D,
                "torus2d" => ManifoldKind::Torus2D,
                "sphere2d" => ManifoldKind::Sphere2D,
                other => {
                    return Err(asq_cli::CliError::Config(format!(
                        "unknown manifold '{other}'"
                    )))
                }
            };
            print!("{}", cmd_spectra(kind, resolution, count)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}
