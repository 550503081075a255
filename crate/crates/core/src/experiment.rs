//! End-to-end experiment runner: build initial data, solve, measure
//! decay, optionally run the verification suites, and write every
//! artifact into one output directory with a manifest tying them to the
//! configuration hash.
//!
//! Outputs are byte-deterministic for a fixed configuration: no
//! timestamps, no machine identifiers, and all parallel loops are
//! order-preserving maps.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::decay::{decay_report, norm_series, theoretical_exponent, DecayReport};
use crate::io;
use crate::solver::{picard_solve, ContractionEstimate, PicardSolution};
use crate::spaces::Trajectory;
use crate::spectral::make_initial_data;
use crate::verify::{beta_integral_battery, default_suite, run_suite, InequalityCheck};
use crate::{Error, Result};

/// Environment variable consulted for the output directory when the
/// command line does not provide one.
pub const OUTPUT_DIR_ENV: &str = "NSMILD_OUTPUT_DIR";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Highest-precedence output directory (the command-line flag).
    pub output_dir: Option<PathBuf>,
    /// Rayon worker threads; `None` keeps the default pool.
    pub threads: Option<usize>,
}

/// `flag > environment > config > "./nsmild-out"`.
pub fn resolve_output_dir(cfg: &ExperimentConfig, opts: &RunOptions) -> PathBuf {
    opts.output_dir
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("nsmild-out"))
}

/// Install the requested rayon pool size. The global pool can only be
/// set once per process; later conflicting requests are logged and
/// ignored rather than failing the run.
pub fn configure_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            log::warn!("thread pool already initialized, --threads ignored: {e}");
        }
    }
}

/// Fixed-point solve outcome as recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardOutcome {
    pub converged: bool,
    pub iterations: usize,
    /// `1 - 4 eta_hat y`: positive margins certify the contraction.
    pub smallness_margin: Option<f64>,
    /// Present when the solve was refused or abandoned.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SeriesEntry {
    label: String,
    file: String,
    exponent: f64,
}

/// `manifest.json`: the machine-readable index of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub grid: crate::config::GridSection,
    pub initial_data_kind: String,
    pub t_final: f64,
    pub n_steps: usize,
    pub picard: PicardOutcome,
    series: Vec<SeriesEntry>,
    pub outputs: Vec<String>,
    pub all_pass: bool,
}

/// Everything a caller needs to report the run without re-reading files.
#[derive(Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub config_hash: String,
    pub picard: PicardOutcome,
    pub decay_reports: Vec<DecayReport>,
    pub checks: Vec<InequalityCheck>,
    /// Contraction data when the solve was refused on smallness grounds.
    pub smallness: Option<ContractionEstimate>,
    pub all_pass: bool,
}

fn initial_data_kind(cfg: &ExperimentConfig) -> &'static str {
    use crate::spectral::InitialData::*;
    match cfg.initial_data {
        TaylorGreen { .. } => "taylor_green",
        RandomSlope { .. } => "random_slope",
        GaussianVortex { .. } => "gaussian_vortex",
    }
}

/// Run one configured experiment, writing all artifacts under the
/// resolved output directory.
///
/// A solve refused for lack of smallness is not an error at this level:
/// the refusal and its contraction estimate are recorded in the manifest,
/// trajectory-dependent outputs are skipped, and `all_pass` is false.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    cfg.validate()?;
    configure_threads(opts.threads);
    let grid = cfg.grid.grid()?;
    let hash = cfg.hash()?;
    let dir = resolve_output_dir(cfg, opts);
    std::fs::create_dir_all(&dir)?;

    let mut outputs: Vec<String> = Vec::new();
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string()?)?;
    outputs.push("config.toml".into());

    let u0 = make_initial_data(grid, &cfg.initial_data)?;
    let mut smallness: Option<ContractionEstimate> = None;
    let mut trajectory: Option<Trajectory> = None;
    let picard = match picard_solve(&u0, &cfg.solver) {
        Ok(PicardSolution {
            trajectory: traj,
            iterations,
            estimate,
            ..
        }) => {
            trajectory = Some(traj.with_config_hash(hash.clone()));
            PicardOutcome {
                converged: true,
                iterations,
                smallness_margin: Some(estimate.smallness_margin()),
                failure: None,
            }
        }
        Err(Error::SmallnessViolated(est)) => {
            let outcome = PicardOutcome {
                converged: false,
                iterations: est.ratios.len(),
                smallness_margin: Some(est.smallness_margin()),
                failure: Some("smallness violated: updates stopped contracting".into()),
            };
            smallness = Some(*est);
            outcome
        }
        Err(Error::NoConvergence { iters, last_update }) => PicardOutcome {
            converged: false,
            iterations: iters,
            smallness_margin: None,
            failure: Some(format!(
                "no convergence in {iters} iterations, last update {last_update:.3e}"
            )),
        },
        Err(e) => return Err(e),
    };

    let mut decay_reports: Vec<DecayReport> = Vec::new();
    let mut series_entries: Vec<SeriesEntry> = Vec::new();
    if let Some(traj) = &trajectory {
        if cfg.output.write_trajectory {
            io::write_trajectory(dir.join("trajectory.spct"), traj)?;
            outputs.push("trajectory.spct".into());
        }
        for spec in &cfg.norm_specs {
            let rows = norm_series(traj, spec)?;
            let label = spec.label();
            let file = format!("series_{label}.csv");
            io::write_norm_series_csv(dir.join(&file), &rows, &spec.norm(), spec.n as usize)?;
            series_entries.push(SeriesEntry {
                label,
                file: file.clone(),
                exponent: theoretical_exponent(spec, grid.d())?,
            });
            outputs.push(file);
            let window = cfg.decay_window.map(|w| (w.t_min, w.t_max));
            decay_reports.push(decay_report(traj, spec, window)?);
        }
        if !decay_reports.is_empty() {
            io::write_exponent_table_csv(dir.join("exponents.csv"), &decay_reports)?;
            outputs.push("exponents.csv".into());
        }
    }

    let mut checks: Vec<InequalityCheck> = Vec::new();
    if cfg.suites.inequality_checks {
        checks = run_suite(&default_suite(), &grid)?;
        io::write_checks_csv(dir.join("checks.csv"), &checks)?;
        outputs.push("checks.csv".into());
    }
    if cfg.suites.beta_integrals {
        io::write_beta_csv(dir.join("beta.csv"), &beta_integral_battery())?;
        outputs.push("beta.csv".into());
    }

    let all_pass = picard.converged
        && decay_reports.iter().all(|r| r.pass)
        && checks.iter().all(|c| c.verdict);

    let manifest = Manifest {
        config_hash: hash.clone(),
        grid: cfg.grid,
        initial_data_kind: initial_data_kind(cfg).into(),
        t_final: cfg.solver.t_final,
        n_steps: cfg.solver.n_steps,
        picard: picard.clone(),
        series: series_entries,
        outputs: outputs.clone(),
        all_pass,
    };
    let mut manifest_json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Serialization(e.to_string()))?;
    manifest_json.push('\n');
    std::fs::write(dir.join("manifest.json"), manifest_json)?;

    Ok(RunSummary {
        output_dir: dir,
        config_hash: hash,
        picard,
        decay_reports,
        checks,
        smallness,
        all_pass,
    })
}

/// Parse one norm-series CSV produced by this crate: `(t, raw)` rows.
fn read_series_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let mut cols = line.split(',');
        let (Some(t), Some(raw)) = (cols.next(), cols.next()) else {
            return Err(Error::Serialization(format!(
                "{}:{}: expected comma-separated columns",
                path.display(),
                i + 1
            )));
        };
        let parse = |s: &str| -> Result<f64> {
            s.trim().parse().map_err(|e| {
                Error::Serialization(format!("{}:{}: bad number: {e}", path.display(), i + 1))
            })
        };
        rows.push((parse(t)?, parse(raw)?));
    }
    Ok(rows)
}

/// Emit gnuplot-ready log-log data for every norm series listed in the
/// run's manifest: columns `log10_t, log10_norm, log10_envelope`, where
/// the envelope is the theoretical power law anchored at the first
/// positive sample. Missing or empty series are logged and skipped.
/// Returns the files written.
pub fn emit_plot_data(run_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let run_dir = run_dir.as_ref();
    let manifest_path = run_dir.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path)?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::Serialization(e.to_string()))?;
    let mut written = Vec::new();
    for entry in &manifest.series {
        let src = run_dir.join(&entry.file);
        if !src.exists() {
            log::warn!("series file {} missing, skipped", src.display());
            continue;
        }
        let rows = read_series_csv(&src)?;
        let usable: Vec<(f64, f64)> = rows
            .into_iter()
            .filter(|&(t, v)| t > 0.0 && v > 0.0)
            .collect();
        let Some(&(t0, v0)) = usable.first() else {
            log::warn!("series {} has no positive samples, skipped", entry.label);
            continue;
        };
        let dst = run_dir.join(format!("plot_{}.csv", entry.label));
        let mut out = String::from("log10_t,log10_norm,log10_envelope\n");
        for (t, v) in &usable {
            let envelope = v0 * (t / t0).powf(-entry.exponent);
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                t.log10(),
                v.log10(),
                envelope.log10()
            ));
        }
        std::fs::write(&dst, out)?;
        written.push(dst);
    }
    Ok(written)
}

/// Standalone verification run (no trajectory): the default inequality
/// suite plus the kernel integral battery, written to `dir`.
pub fn run_verification(grid_n: usize, d: usize, l: f64, dir: impl AsRef<Path>) -> Result<(Vec<InequalityCheck>, bool)> {
    let grid = crate::spectral::GridSpec::new(d, grid_n, l)?;
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let checks = run_suite(&default_suite(), &grid)?;
    io::write_checks_csv(dir.join("checks.csv"), &checks)?;
    io::write_beta_csv(dir.join("beta.csv"), &beta_integral_battery())?;
    let all = checks.iter().all(|c| c.verdict);
    Ok((checks, all))
}
