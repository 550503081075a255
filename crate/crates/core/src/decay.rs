//! Decay-rate measurement: log-log fits of norm histories against the
//! predicted envelope exponents, with a monotonicity cross-check on the
//! rescaled series.

use serde::{Deserialize, Serialize};

use crate::spaces::{
    decay_weight_exponent, sobolev_norm, sobolev_norm_vec, NormSpec, Trajectory,
};
use crate::solver::{pressure, time_derivative, MAX_TIME_DERIVATIVE_ORDER};
use crate::{Error, Result};

/// Fitted exponents may exceed the prediction by at most this much and
/// still pass; absorbs finite-window and quadrature effects.
pub const SLACK: f64 = 0.15;

/// Spearman coefficients within this band of zero count as flat.
pub const FLAT_TREND_BAND: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Velocity,
    Pressure,
}

/// One decay measurement: which field, in which norm, and for the
/// velocity which time-derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSpec {
    pub field: FieldKind,
    pub s: f64,
    pub q: f64,
    /// Time-derivative order; velocity only.
    #[serde(default)]
    pub n: u32,
}

impl ExponentSpec {
    pub fn velocity(s: f64, q: f64, n: u32) -> Self {
        ExponentSpec {
            field: FieldKind::Velocity,
            s,
            q,
            n,
        }
    }

    pub fn pressure(s: f64, q: f64) -> Self {
        ExponentSpec {
            field: FieldKind::Pressure,
            s,
            q,
            n: 0,
        }
    }

    pub fn norm(&self) -> NormSpec {
        NormSpec {
            s: self.s,
            q: self.q,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.norm().validate()?;
        match self.field {
            FieldKind::Velocity => {
                if self.n > MAX_TIME_DERIVATIVE_ORDER {
                    return Err(Error::Domain(format!(
                        "derivative order {} exceeds the supported maximum {}",
                        self.n, MAX_TIME_DERIVATIVE_ORDER
                    )));
                }
            }
            FieldKind::Pressure => {
                if self.n != 0 {
                    return Err(Error::Domain(
                        "pressure decay is measured for the field itself (n = 0)".into(),
                    ));
                }
                if self.s < 0.0 {
                    return Err(Error::Domain(format!(
                        "pressure decay needs smoothness s >= 0, got {}",
                        self.s
                    )));
                }
            }
        }
        Ok(())
    }

    /// Short stable label used in report tables and file names.
    pub fn label(&self) -> String {
        match self.field {
            FieldKind::Velocity => format!("velocity_s{}_q{}_n{}", self.s, self.q, self.n),
            FieldKind::Pressure => format!("pressure_s{}_q{}", self.s, self.q),
        }
    }
}

/// Predicted envelope exponent `rho`: the norm history should satisfy
/// `norm(t) <= C t^{-rho}`. Velocity: `(s + 1 + 2n - d/q) / 2`;
/// pressure: `(s + 2 - d/q) / 2`, one half above the matching velocity
/// norm at `n = 0`.
pub fn theoretical_exponent(spec: &ExponentSpec, d: usize) -> Result<f64> {
    spec.validate()?;
    Ok(match spec.field {
        FieldKind::Velocity => decay_weight_exponent(&spec.norm(), spec.n, d),
        FieldKind::Pressure => (spec.s + 2.0 - d as f64 / spec.q) / 2.0,
    })
}

/// Least-squares power law `v = amplitude * t^exponent` through positive
/// samples, fitted in log-log coordinates.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    pub exponent: f64,
    pub amplitude: f64,
    /// Fraction of log-variance explained; 1 for exact power laws and,
    /// by convention, for constant series.
    pub r_squared: f64,
}

/// Fit `(t, v)` pairs by ordinary least squares in `(ln t, ln v)`.
/// Needs at least 5 samples, all with `t > 0` and `v > 0`.
pub fn fit_decay_exponent(samples: &[(f64, f64)]) -> Result<DecayFit> {
    if samples.len() < 5 {
        return Err(Error::Domain(format!(
            "power-law fit needs at least 5 samples, got {}",
            samples.len()
        )));
    }
    for &(t, v) in samples {
        if !(t > 0.0 && t.is_finite() && v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!(
                "power-law fit needs positive finite samples, got ({t}, {v})"
            )));
        }
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|&(t, _)| t.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, v)| v.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let syy: f64 = ys.iter().map(|y| (y - ym) * (y - ym)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    if sxx <= 0.0 {
        return Err(Error::Domain(
            "power-law fit needs at least two distinct times".into(),
        ));
    }
    let exponent = sxy / sxx;
    let amplitude = (ym - exponent * xm).exp();
    // A constant series carries no variance to explain; the flat fit is exact.
    let r_squared = if syy <= 1e-28 * n.max(1.0) {
        1.0
    } else {
        (sxy * sxy) / (sxx * syy)
    };
    Ok(DecayFit {
        exponent,
        amplitude,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Decreasing,
    Flat,
    Increasing,
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trend::Decreasing => "decreasing",
            Trend::Flat => "flat",
            Trend::Increasing => "increasing",
        })
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(
            "rank correlation needs series of equal length".into(),
        ));
    }
    if xs.len() < 3 {
        return Err(Error::Domain(
            "rank correlation needs at least 3 samples".into(),
        ));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let sxx: f64 = rx.iter().map(|r| (r - mx) * (r - mx)).sum();
    let syy: f64 = ry.iter().map(|r| (r - my) * (r - my)).sum();
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        // one series is entirely tied; no monotone association either way
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

fn average_ranks(vals: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite values"));
    let mut ranks = vec![0.0; vals.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && vals[order[j + 1]] == vals[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn classify_trend(rho_spearman: f64) -> Trend {
    if rho_spearman.abs() <= FLAT_TREND_BAND {
        Trend::Flat
    } else if rho_spearman < 0.0 {
        Trend::Decreasing
    } else {
        Trend::Increasing
    }
}

/// Outcome of one decay measurement over a validity window.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub spec: ExponentSpec,
    pub theoretical: f64,
    pub fitted: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    /// Trend of the rescaled series `t^rho * norm(t)` over the final third
    /// of the window; `Increasing` refutes the envelope.
    pub trend: Trend,
    pub window: (f64, f64),
    pub sample_count: usize,
    /// True when the trajectory norm vanishes identically; the envelope
    /// holds trivially and no fit is meaningful.
    pub degenerate: bool,
    pub pass: bool,
}

/// The measured quantity at one trajectory sample: a Sobolev norm of the
/// velocity (or its n-th time derivative) or of the recovered pressure.
fn sample_norm(u: &crate::spectral::VectorField, spec: &ExponentSpec) -> Result<f64> {
    let norm = spec.norm();
    match spec.field {
        FieldKind::Velocity => {
            if spec.n == 0 {
                sobolev_norm_vec(u, &norm)
            } else {
                sobolev_norm_vec(&time_derivative(u, spec.n)?, &norm)
            }
        }
        FieldKind::Pressure => sobolev_norm(&pressure(u)?, &norm),
    }
}

/// Full norm history `(t, raw, t^rho * raw)` of one measured quantity over
/// every trajectory sample, with `rho` the theoretical envelope exponent.
/// The `t = 0` sample is dropped when `rho < 0` (the weight diverges).
pub fn norm_series(traj: &Trajectory, spec: &ExponentSpec) -> Result<Vec<(f64, f64, f64)>> {
    spec.validate()?;
    let rho = theoretical_exponent(spec, traj.grid().d())?;
    let mut rows = Vec::with_capacity(traj.len());
    for (t, u) in traj.iter() {
        if t == 0.0 && rho < 0.0 {
            continue;
        }
        let raw = sample_norm(u, spec)?;
        rows.push((t, raw, t.powf(rho) * raw));
    }
    Ok(rows)
}

/// Measure one decay exponent over the trajectory.
///
/// The fit window is the intersection of the caller's request with the
/// trustworthy range `[10 (L/N)^2, (L/2pi)^2 / 4]`: below the lower edge
/// the mesh cannot resolve the heat scale, above the upper edge the box
/// periodicity contaminates whole-space decay. Pass requires the fitted
/// exponent `<= -rho + SLACK` and a non-increasing rescaled tail.
pub fn decay_report(
    traj: &Trajectory,
    spec: &ExponentSpec,
    window: Option<(f64, f64)>,
) -> Result<DecayReport> {
    spec.validate()?;
    let grid = *traj.grid();
    let d = grid.d();
    let rho = theoretical_exponent(spec, d)?;
    let valid_lo = grid.resolve_time();
    let valid_hi = grid.domain_validity_time();
    let (req_lo, req_hi) = window.unwrap_or((valid_lo, valid_hi));
    let lo = req_lo.max(valid_lo);
    let hi = req_hi.min(valid_hi);
    if !(lo < hi) {
        return Err(Error::Domain(format!(
            "decay window [{req_lo}, {req_hi}] clipped to the validity range \
             [{valid_lo:.3e}, {valid_hi:.3e}] is empty"
        )));
    }
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (t, u) in traj.iter() {
        if t < lo || t > hi {
            continue;
        }
        rows.push((t, sample_norm(u, spec)?));
    }
    if rows.len() < 5 {
        return Err(Error::Domain(format!(
            "only {} trajectory samples fall in the decay window [{lo:.3e}, {hi:.3e}]",
            rows.len()
        )));
    }
    let window_used = (rows[0].0, rows[rows.len() - 1].0);
    if rows.iter().all(|&(_, v)| v <= 1e-150) {
        return Ok(DecayReport {
            spec: *spec,
            theoretical: rho,
            fitted: 0.0,
            amplitude: 0.0,
            r_squared: 1.0,
            trend: Trend::Flat,
            window: window_used,
            sample_count: rows.len(),
            degenerate: true,
            pass: true,
        });
    }
    let fit = fit_decay_exponent(&rows)?;
    let rescaled: Vec<f64> = rows.iter().map(|&(t, v)| t.powf(rho) * v).collect();
    let tail_len = (rows.len() / 3).max(3).min(rows.len());
    let tail_start = rows.len() - tail_len;
    let tail_t: Vec<f64> = rows[tail_start..].iter().map(|&(t, _)| t).collect();
    let trend = classify_trend(spearman(&tail_t, &rescaled[tail_start..])?);
    let pass = fit.exponent <= -rho + SLACK && trend != Trend::Increasing;
    Ok(DecayReport {
        spec: *spec,
        theoretical: rho,
        fitted: fit.exponent,
        amplitude: fit.amplitude,
        r_squared: fit.r_squared,
        trend,
        window: window_used,
        sample_count: rows.len(),
        degenerate: false,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{heat_semigroup_vec, make_initial_data, GridSpec, InitialData, VectorField};

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn exact_power_law_recovered() {
        let samples: Vec<(f64, f64)> = (1..=20)
            .map(|i| {
                let t = 0.05 * i as f64;
                (t, 3.0 * t.powf(-0.5))
            })
            .collect();
        let fit = fit_decay_exponent(&samples).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!((fit.amplitude - 3.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_invariances() {
        let base: Vec<(f64, f64)> = (1..=12)
            .map(|i| {
                let t = 0.1 * i as f64;
                (t, t.powf(-0.8) * (1.0 + 0.01 * (i as f64).sin()))
            })
            .collect();
        let f0 = fit_decay_exponent(&base).unwrap();
        // scaling the values scales the amplitude, not the exponent
        let scaled: Vec<(f64, f64)> = base.iter().map(|&(t, v)| (t, 7.0 * v)).collect();
        let f1 = fit_decay_exponent(&scaled).unwrap();
        assert!((f1.exponent - f0.exponent).abs() < 1e-12);
        assert!((f1.amplitude / f0.amplitude - 7.0).abs() < 1e-10);
        assert!((f1.r_squared - f0.r_squared).abs() < 1e-12);
        // scaling time leaves the exponent fixed
        let stretched: Vec<(f64, f64)> = base.iter().map(|&(t, v)| (5.0 * t, v)).collect();
        let f2 = fit_decay_exponent(&stretched).unwrap();
        assert!((f2.exponent - f0.exponent).abs() < 1e-10);
    }

    #[test]
    fn constant_series_is_a_perfect_flat_fit() {
        let samples: Vec<(f64, f64)> = (1..=8).map(|i| (i as f64, 2.5)).collect();
        let fit = fit_decay_exponent(&samples).unwrap();
        assert_eq!(fit.exponent, 0.0);
        assert_eq!(fit.r_squared, 1.0);
        assert!((fit.amplitude - 2.5).abs() < 1e-12);
    }

    #[test]
    fn fit_input_validation() {
        let short: Vec<(f64, f64)> = (1..=4).map(|i| (i as f64, 1.0)).collect();
        assert!(fit_decay_exponent(&short).is_err());
        let bad_v = vec![(1.0, 1.0), (2.0, -1.0), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0)];
        assert!(fit_decay_exponent(&bad_v).is_err());
        let bad_t = vec![(0.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0)];
        assert!(fit_decay_exponent(&bad_t).is_err());
    }

    #[test]
    fn exponent_formulas() {
        // velocity: rho = (s + 1 + 2n - d/q)/2
        let v = theoretical_exponent(&ExponentSpec::velocity(0.5, 2.0, 0), 3).unwrap();
        assert_eq!(v, 0.0);
        let v = theoretical_exponent(&ExponentSpec::velocity(0.0, 4.0, 0), 2).unwrap();
        assert_eq!(v, 0.25);
        let v = theoretical_exponent(&ExponentSpec::velocity(0.0, 2.0, 1), 2).unwrap();
        assert_eq!(v, 1.0);
        // pressure: rho = (s + 2 - d/q)/2, half a power above the velocity
        let p = theoretical_exponent(&ExponentSpec::pressure(0.0, 2.0), 2).unwrap();
        assert_eq!(p, 0.5);
        for (s, q) in [(0.0, 2.0), (0.5, 4.0), (1.0, 3.0)] {
            let dv = theoretical_exponent(&ExponentSpec::pressure(s, q), 3).unwrap()
                - theoretical_exponent(&ExponentSpec::velocity(s, q, 0), 3).unwrap();
            assert!((dv - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(ExponentSpec::pressure(-0.5, 2.0).validate().is_err());
        assert!(ExponentSpec::velocity(-0.5, 2.0, 0).validate().is_ok());
        assert!(ExponentSpec::velocity(0.0, 1.0, 0).validate().is_err());
        assert!(ExponentSpec::velocity(0.0, 2.0, 9).validate().is_err());
        let mut bad = ExponentSpec::pressure(0.0, 2.0);
        bad.n = 1;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn spearman_detects_monotone_trends() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let up: Vec<f64> = t.iter().map(|x| x * x + 1.0).collect();
        let down: Vec<f64> = t.iter().map(|x| 10.0 - x).collect();
        assert!((spearman(&t, &up).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&t, &down).unwrap() + 1.0).abs() < 1e-12);
        let flat = vec![1.0; 10];
        assert_eq!(spearman(&t, &flat).unwrap(), 0.0);
        // outlier-heavy noise barely moves a rank statistic
        let noisy: Vec<f64> = t
            .iter()
            .enumerate()
            .map(|(i, x)| x + if i == 5 { 100.0 } else { 0.0 })
            .collect();
        assert!(spearman(&t, &noisy).unwrap() > 0.8);
    }

    fn heat_trajectory(grid: GridSpec, data: &InitialData, t_hi: f64, count: usize) -> Trajectory {
        let u0 = make_initial_data(grid, data).unwrap();
        let samples: Vec<(f64, VectorField)> = (0..=count)
            .map(|i| {
                let t = t_hi * i as f64 / count as f64;
                (t, heat_semigroup_vec(&u0, t).unwrap())
            })
            .collect();
        Trajectory::new(samples).unwrap()
    }

    #[test]
    fn exponential_decay_passes_any_power_law() {
        // Taylor-Green under its own flow decays like exp(-2t), faster
        // than every finite power on the validity window.
        let grid = GridSpec::new(2, 64, TAU).unwrap();
        let traj = heat_trajectory(
            grid,
            &InitialData::TaylorGreen { amplitude: 1.0 },
            0.24,
            48,
        );
        let spec = ExponentSpec::velocity(0.0, 2.0, 0);
        let report = decay_report(&traj, &spec, None).unwrap();
        assert!(report.pass, "report: {report:?}");
        assert!(report.fitted < -report.theoretical);
        assert_eq!(report.trend, Trend::Decreasing);
        assert!(!report.degenerate);
        assert!(report.sample_count >= 5);
    }

    #[test]
    fn growing_series_fails() {
        let grid = GridSpec::new(2, 64, TAU).unwrap();
        let u0 = make_initial_data(grid, &InitialData::TaylorGreen { amplitude: 1.0 }).unwrap();
        let samples: Vec<(f64, VectorField)> = (0..=30)
            .map(|i| {
                let t = 0.008 * i as f64;
                (t, u0.scaled((2.0 * t).exp()))
            })
            .collect();
        let traj = Trajectory::new(samples).unwrap();
        let spec = ExponentSpec::velocity(0.0, 2.0, 0);
        let report = decay_report(&traj, &spec, None).unwrap();
        assert!(!report.pass);
        assert_eq!(report.trend, Trend::Increasing);
        assert!(report.fitted > 0.0);
    }

    #[test]
    fn zero_trajectory_is_a_degenerate_pass() {
        let grid = GridSpec::new(2, 64, TAU).unwrap();
        let samples: Vec<(f64, VectorField)> = (0..=30)
            .map(|i| (0.008 * i as f64, VectorField::zeros(grid)))
            .collect();
        let traj = Trajectory::new(samples).unwrap();
        let report =
            decay_report(&traj, &ExponentSpec::velocity(0.0, 2.0, 0), None).unwrap();
        assert!(report.degenerate);
        assert!(report.pass);
    }

    #[test]
    fn window_is_clipped_and_can_empty() {
        let grid = GridSpec::new(2, 64, TAU).unwrap();
        let traj = heat_trajectory(
            grid,
            &InitialData::TaylorGreen { amplitude: 1.0 },
            0.24,
            48,
        );
        let spec = ExponentSpec::velocity(0.0, 2.0, 0);
        // window outside the validity range is refused
        let err = decay_report(&traj, &spec, Some((1e-6, 1e-5)));
        assert!(err.is_err(), "window below resolve scale must be refused");
        // clipped window stays inside the validity range
        let report = decay_report(&traj, &spec, Some((0.0, 1e9))).unwrap();
        assert!(report.window.0 >= grid.resolve_time());
        assert!(report.window.1 <= grid.domain_validity_time());
    }

    #[test]
    fn pressure_report_runs_on_taylor_green() {
        let grid = GridSpec::new(2, 64, TAU).unwrap();
        let traj = heat_trajectory(
            grid,
            &InitialData::TaylorGreen { amplitude: 1.0 },
            0.24,
            48,
        );
        let spec = ExponentSpec::pressure(0.0, 2.0);
        let report = decay_report(&traj, &spec, None).unwrap();
        // pressure of the exact flow decays like exp(-4t): faster than t^{-1/2}
        assert!(report.pass, "report: {report:?}");
        assert!((report.theoretical - 0.5).abs() < 1e-15);
    }
}
