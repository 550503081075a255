//! Command-line front end: run configured experiments, run the
//! verification suites standalone, and post-process run directories.
//!
//! Exit codes: 0 when everything passed, 1 when the run completed but a
//! criterion failed, 2 for usage, configuration, or runtime errors.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use nsmild::config::ExperimentConfig;
use nsmild::experiment::{
    configure_threads, emit_plot_data, run_experiment, run_verification, RunOptions, RunSummary,
};
use nsmild::verify::InequalityCheck;

#[derive(Parser)]
#[command(
    name = "nsmild",
    version,
    about = "Pseudo-spectral mild-solution toolkit for the incompressible \
             Navier-Stokes equations on a periodic box"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML configuration
    Run {
        /// Experiment configuration file
        config: PathBuf,
        /// Output directory; overrides NSMILD_OUTPUT_DIR and the config
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Worker threads (results are identical for any count)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the inequality and kernel-integral suites without a trajectory
    Verify {
        /// Modes per axis (the suite refines to 2n internally)
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Spatial dimension
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Box side length
        #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
        l: f64,
        /// Where to write checks.csv and beta.csv
        #[arg(long, default_value = "nsmild-verify")]
        output_dir: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Emit log-log plot data for every norm series in a run directory
    Plotdata {
        /// Directory containing manifest.json from a previous run
        run_dir: PathBuf,
    },
    /// Print a template experiment configuration to stdout
    Example,
}

fn print_check(c: &InequalityCheck) {
    println!(
        "check {}({}): C = {:.6}, refinement stability {:.4} ... {}",
        c.name,
        c.params,
        c.fitted_c,
        c.refinement_stability,
        if c.verdict { "PASS" } else { "FAIL" }
    );
}

fn print_summary(s: &RunSummary) {
    if s.picard.converged {
        println!(
            "picard: converged in {} iterations, smallness margin {:.4} ... PASS",
            s.picard.iterations,
            s.picard.smallness_margin.unwrap_or(f64::NAN)
        );
    } else {
        println!(
            "picard: {} ... FAIL",
            s.picard.failure.as_deref().unwrap_or("did not converge")
        );
        if let Some(est) = &s.smallness {
            println!(
                "  contraction estimate: eta_hat = {:.4e}, data norm = {:.4e}, margin = {:.4}",
                est.eta_hat,
                est.y_norm,
                est.smallness_margin()
            );
        }
    }
    for r in &s.decay_reports {
        if r.degenerate {
            println!(
                "decay {}: identically zero, envelope holds trivially ... PASS",
                r.spec.label()
            );
            continue;
        }
        println!(
            "decay {}: fitted exponent {:.4} vs envelope {:.4} (trend {}, {} samples) ... {}",
            r.spec.label(),
            r.fitted,
            -r.theoretical + 0.0,
            r.trend,
            r.sample_count,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    for c in &s.checks {
        print_check(c);
    }
    println!("artifacts: {}", s.output_dir.display());
    println!("RESULT: {}", if s.all_pass { "PASS" } else { "FAIL" });
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            config,
            output_dir,
            threads,
        } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    std::process::exit(2);
                }
            };
            match run_experiment(
                &cfg,
                &RunOptions {
                    output_dir,
                    threads,
                },
            ) {
                Ok(summary) => {
                    print_summary(&summary);
                    i32::from(!summary.all_pass)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
        Command::Verify {
            n,
            d,
            l,
            output_dir,
            threads,
        } => {
            configure_threads(threads);
            match run_verification(n, d, l, &output_dir) {
                Ok((checks, all)) => {
                    for c in &checks {
                        print_check(c);
                    }
                    println!("artifacts: {}", output_dir.display());
                    println!("RESULT: {}", if all { "PASS" } else { "FAIL" });
                    i32::from(!all)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    2
                }
            }
        }
        Command::Plotdata { run_dir } => match emit_plot_data(&run_dir) {
            Ok(files) => {
                for f in &files {
                    println!("wrote {}", f.display());
                }
                if files.is_empty() {
                    println!("no norm series listed in the manifest");
                }
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Command::Example => match ExperimentConfig::example().to_toml_string() {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
    };
    std::process::exit(code);
}
