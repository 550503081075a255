//! Experiment configuration: a TOML file describing the grid, initial
//! data, time integration, and which measurements and verification
//! suites to run. Unknown keys are rejected so typos surface as errors
//! with the offending field named.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decay::ExponentSpec;
use crate::solver::SolverConfig;
use crate::spectral::{GridSpec, InitialData};
use crate::{Error, Result};

/// Grid parameters as written in the file; realized via [`GridSection::grid`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Spatial dimension, 2 or 3.
    pub d: usize,
    /// Modes per axis; must be even.
    pub n: usize,
    /// Box side length.
    pub l: f64,
}

impl GridSection {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.d, self.n, self.l)
    }
}

/// Time window for decay fits; omitted bounds fall back to the grid's
/// resolved window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub t_min: f64,
    pub t_max: f64,
}

/// Which verification suites the run executes in addition to the
/// trajectory measurements.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suites {
    /// Inequality battery at the configured resolution and its refinement.
    #[serde(default)]
    pub inequality_checks: bool,
    /// Singular kernel integral battery.
    #[serde(default)]
    pub beta_integrals: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Output directory; overridden by the command line or the
    /// environment. Relative paths resolve against the working directory.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Write the full trajectory in the binary container format.
    #[serde(default = "default_true")]
    pub write_trajectory: bool,
}

fn default_true() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            write_trajectory: true,
        }
    }
}

/// One complete experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub initial_data: InitialData,
    pub solver: SolverConfig,
    /// Decay measurements evaluated on the trajectory.
    #[serde(default)]
    pub norm_specs: Vec<ExponentSpec>,
    #[serde(default)]
    pub decay_window: Option<WindowSection>,
    #[serde(default)]
    pub suites: Suites,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// Cross-field validation beyond what deserialization enforces.
    pub fn validate(&self) -> Result<()> {
        let grid = self
            .grid
            .grid()
            .map_err(|e| Error::Config(format!("grid: {e}")))?;
        self.solver
            .validate()
            .map_err(|e| Error::Config(format!("solver: {e}")))?;
        match self.initial_data {
            InitialData::TaylorGreen { amplitude }
            | InitialData::RandomSlope { amplitude, .. }
            | InitialData::GaussianVortex { amplitude, .. } => {
                if !(amplitude.is_finite() && amplitude > 0.0) {
                    return Err(Error::Config(format!(
                        "initial_data.amplitude must be positive, got {amplitude}"
                    )));
                }
            }
        }
        if let InitialData::GaussianVortex { width, .. } = self.initial_data {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::Config(format!(
                    "initial_data.width must be positive, got {width}"
                )));
            }
        }
        for (i, spec) in self.norm_specs.iter().enumerate() {
            spec.validate()
                .map_err(|e| Error::Config(format!("norm_specs[{i}]: {e}")))?;
        }
        if let Some(w) = self.decay_window {
            if !(w.t_min.is_finite() && w.t_max.is_finite() && 0.0 <= w.t_min && w.t_min < w.t_max)
            {
                return Err(Error::Config(format!(
                    "decay_window: need 0 <= t_min < t_max, got [{}, {}]",
                    w.t_min, w.t_max
                )));
            }
            if w.t_min >= self.solver.t_final {
                return Err(Error::Config(format!(
                    "decay_window.t_min = {} is at or past solver.t_final = {}",
                    w.t_min, self.solver.t_final
                )));
            }
        }
        if self.suites.inequality_checks && grid.dealias_cutoff() < 10 {
            return Err(Error::Config(format!(
                "suites.inequality_checks needs grid.n >= 32, got {}",
                grid.n()
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialized form, hex-encoded. Stable
    /// across load/save cycles, so artifacts can be traced to the exact
    /// configuration that produced them.
    pub fn hash(&self) -> Result<String> {
        let canonical = self.to_toml_string()?;
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }

    /// A small, fast, self-contained example: exactly solvable initial
    /// data on a coarse grid with its matching decay measurements.
    pub fn example() -> Self {
        ExperimentConfig {
            grid: GridSection {
                d: 2,
                n: 64,
                l: 2.0 * std::f64::consts::PI,
            },
            initial_data: InitialData::TaylorGreen { amplitude: 1.0 },
            solver: SolverConfig::new(1.0, 64),
            norm_specs: vec![
                ExponentSpec::velocity(0.0, 2.0, 0),
                ExponentSpec::velocity(0.0, 4.0, 0),
                ExponentSpec::pressure(0.0, 2.0),
            ],
            decay_window: None,
            suites: Suites::default(),
            output: OutputSection::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_round_trips_through_toml() {
        let cfg = ExperimentConfig::example();
        let text = cfg.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back.grid.n, cfg.grid.n);
        assert_eq!(back.initial_data, cfg.initial_data);
        assert_eq!(back.norm_specs, cfg.norm_specs);
        assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
    }

    #[test]
    fn hash_tracks_content() {
        let a = ExperimentConfig::example();
        let mut b = ExperimentConfig::example();
        b.solver.t_final = 2.0;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
        let h = a.hash().unwrap();
        assert_eq!(h.len(), 64);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
    }

    #[test]
    fn minimal_file_parses_with_defaults() {
        let text = r#"
            [grid]
            d = 2
            n = 16
            l = 6.283185307179586

            [initial_data]
            kind = "taylor_green"
            amplitude = 0.5

            [solver]
            t_final = 0.1
            n_steps = 4
        "#;
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        assert!(cfg.norm_specs.is_empty());
        assert!(cfg.decay_window.is_none());
        assert!(!cfg.suites.inequality_checks);
        assert!(cfg.output.write_trajectory);
        assert_eq!(cfg.solver.picard_max_iter, 25);
    }

    #[test]
    fn unknown_and_invalid_fields_name_the_problem() {
        let unknown = r#"
            [grid]
            d = 2
            n = 16
            l = 1.0
            spacing = 0.1

            [initial_data]
            kind = "taylor_green"
            amplitude = 1.0

            [solver]
            t_final = 0.1
            n_steps = 4
        "#;
        let err = ExperimentConfig::from_toml_str(unknown).unwrap_err();
        assert!(err.to_string().contains("spacing"), "{err}");

        let odd_n = r#"
            [grid]
            d = 2
            n = 17
            l = 1.0

            [initial_data]
            kind = "taylor_green"
            amplitude = 1.0

            [solver]
            t_final = 0.1
            n_steps = 4
        "#;
        let err = ExperimentConfig::from_toml_str(odd_n).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("grid"), "{err}");

        let bad_window = r#"
            [grid]
            d = 2
            n = 16
            l = 1.0

            [initial_data]
            kind = "random_slope"
            beta = 1.5
            seed = 7
            amplitude = 0.1

            [solver]
            t_final = 0.1
            n_steps = 4

            [decay_window]
            t_min = 0.5
            t_max = 0.2
        "#;
        let err = ExperimentConfig::from_toml_str(bad_window).unwrap_err();
        assert!(err.to_string().contains("decay_window"), "{err}");

        let bad_spec = r#"
            [grid]
            d = 2
            n = 16
            l = 1.0

            [initial_data]
            kind = "taylor_green"
            amplitude = 1.0

            [solver]
            t_final = 0.1
            n_steps = 4

            [[norm_specs]]
            field = "pressure"
            s = -1.0
            q = 2.0
        "#;
        let err = ExperimentConfig::from_toml_str(bad_spec).unwrap_err();
        assert!(err.to_string().contains("norm_specs[0]"), "{err}");
    }

    #[test]
    fn load_reports_the_file_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(&path, "not toml at all [").unwrap();
        let err = ExperimentConfig::load(&path).unwrap_err();
        assert!(err.to_string().contains("exp.toml"), "{err}");
    }
}
