//! Norm estimators: Lebesgue, fractional Sobolev, Besov (heat
//! characterization) and time-weighted Kato classes, plus trajectories.
//!
//! All Lebesgue norms are uniform-grid Riemann sums, spectrally accurate
//! for the smooth periodic fields produced here; `q = 2` coincides with
//! the exact Plancherel value. Vector norms are the root-sum-square of
//! component norms.

use serde::{Deserialize, Serialize};

use crate::spectral::{fractional_laplacian, heat_semigroup, GridSpec, SpectralField, VectorField};
use crate::{Error, Result};

/// Index pair of a homogeneous Sobolev space `\dot H^s_q`, with the
/// induced Kato weight `alpha = s + 1 - d/q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub s: f64,
    pub q: f64,
}

impl NormSpec {
    pub fn new(s: f64, q: f64) -> Result<Self> {
        let spec = NormSpec { s, q };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::Domain("norm spec: s must be finite".into()));
        }
        if !(self.q.is_finite() && self.q > 1.0) {
            return Err(Error::Domain(format!(
                "norm spec: q must lie in the open interval (1, inf), got {}",
                self.q
            )));
        }
        Ok(())
    }

    /// Kato time-weight exponent `alpha = s + 1 - d/q`.
    pub fn alpha(&self, d: usize) -> f64 {
        self.s + 1.0 - d as f64 / self.q
    }
}

/// Parameters of the heat characterization of `\dot B^{s,\infty}_q`,
/// `s < 0`: `sup_t t^{-s/2} ||e^{t Lap} f||_q` over a geometric grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub q: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub ratio: f64,
}

impl BesovSpec {
    /// Default grid for a given resolution: `t` from `(L/N)^2` (finest
    /// resolved diffusion scale) to `(L/2pi)^2` (slowest mode scale),
    /// ratio `2^{1/4}`.
    pub fn for_grid(grid: &GridSpec, s: f64, q: f64) -> Result<Self> {
        let t_min = grid.spacing() * grid.spacing();
        let r = grid.l() / (2.0 * std::f64::consts::PI);
        BesovSpec::new(s, q, t_min, r * r, 2f64.powf(0.25))
    }

    pub fn new(s: f64, q: f64, t_min: f64, t_max: f64, ratio: f64) -> Result<Self> {
        if !(s.is_finite() && s < 0.0) {
            return Err(Error::Hypothesis(format!(
                "besov spec: heat characterization needs s < 0, got {s}"
            )));
        }
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::Domain(format!(
                "besov spec: q must lie in (1, inf), got {q}"
            )));
        }
        if !(t_min.is_finite() && t_min > 0.0 && t_max.is_finite() && t_max > t_min) {
            return Err(Error::Domain(format!(
                "besov spec: need 0 < t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(Error::Domain(format!(
                "besov spec: grid ratio must exceed 1, got {ratio}"
            )));
        }
        Ok(BesovSpec {
            s,
            q,
            t_min,
            t_max,
            ratio,
        })
    }

    pub fn t_grid(&self) -> Vec<f64> {
        let mut ts = Vec::new();
        let mut t = self.t_min;
        while t <= self.t_max * (1.0 + 1e-12) {
            ts.push(t);
            t *= self.ratio;
        }
        ts
    }
}

/// `L^q(box)` norm by Riemann sum; `q` in `[1, inf]` (`f64::INFINITY`
/// selects the max norm).
pub fn lq_norm(f: &SpectralField, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::Domain(format!(
            "Lebesgue exponent must satisfy q >= 1, got {q}"
        )));
    }
    let samples = f.to_physical();
    if q.is_infinite() {
        return Ok(samples.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    let cell = f.grid().cell_volume();
    if q == 2.0 {
        let sum: f64 = samples.iter().map(|v| v * v).sum();
        return Ok((sum * cell).sqrt());
    }
    let sum: f64 = samples.iter().map(|v| v.abs().powf(q)).sum();
    Ok((sum * cell).powf(1.0 / q))
}

/// Root-sum-square of component `L^q` norms.
pub fn lq_norm_vec(u: &VectorField, q: f64) -> Result<f64> {
    let mut acc = 0.0;
    for c in u.components() {
        let v = lq_norm(c, q)?;
        acc += v * v;
    }
    Ok(acc.sqrt())
}

/// Homogeneous Sobolev norm `||Lambda^s f||_q`.
pub fn sobolev_norm(f: &SpectralField, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    lq_norm(&fractional_laplacian(f, spec.s)?, spec.q)
}

pub fn sobolev_norm_vec(u: &VectorField, spec: &NormSpec) -> Result<f64> {
    let mut acc = 0.0;
    for c in u.components() {
        let v = sobolev_norm(c, spec)?;
        acc += v * v;
    }
    Ok(acc.sqrt())
}

/// Heat-characterized Besov norm: `max_i t_i^{-s/2} ||e^{t_i Lap} f||_q`
/// over the spec's geometric grid.
pub fn besov_norm(f: &SpectralField, spec: &BesovSpec) -> Result<f64> {
    let mut best = 0.0f64;
    for t in spec.t_grid() {
        let v = lq_norm(&heat_semigroup(f, t)?, spec.q)?;
        best = best.max(t.powf(-spec.s / 2.0) * v);
    }
    Ok(best)
}

pub fn besov_norm_vec(u: &VectorField, spec: &BesovSpec) -> Result<f64> {
    let mut acc = 0.0;
    for c in u.components() {
        let v = besov_norm(c, spec)?;
        acc += v * v;
    }
    Ok(acc.sqrt())
}

/// Time-stamped velocity samples on a strictly increasing mesh.
#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<(f64, VectorField)>,
    config_hash: Option<String>,
}

impl Trajectory {
    pub fn new(samples: Vec<(f64, VectorField)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if samples[0].0 < 0.0 {
            return Err(Error::Domain(format!(
                "trajectory must start at t >= 0, got {}",
                samples[0].0
            )));
        }
        let grid = *samples[0].1.grid();
        for pair in samples.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::Domain(format!(
                    "trajectory times must increase strictly ({} then {})",
                    pair[0].0, pair[1].0
                )));
            }
        }
        if samples.iter().any(|(_, u)| u.grid() != &grid) {
            return Err(Error::DimensionMismatch(
                "trajectory samples live on different grids".into(),
            ));
        }
        Ok(Trajectory {
            samples,
            config_hash: None,
        })
    }

    pub fn with_config_hash(mut self, hash: impl Into<String>) -> Self {
        self.config_hash = Some(hash.into());
        self
    }

    pub fn config_hash(&self) -> Option<&str> {
        self.config_hash.as_deref()
    }

    pub fn grid(&self) -> &GridSpec {
        self.samples[0].1.grid()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|(t, _)| *t).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.samples.last().expect("nonempty by construction").0
    }

    pub fn sample(&self, i: usize) -> (f64, &VectorField) {
        let (t, u) = &self.samples[i];
        (*t, u)
    }

    /// Index of the sample at time `t` (relative tolerance on the horizon).
    pub fn index_at(&self, t: f64) -> Result<usize> {
        let tol = 1e-10 * self.horizon().max(1.0);
        self.samples
            .iter()
            .position(|(ti, _)| (ti - t).abs() <= tol)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "time {t} is not a mesh point of the trajectory (horizon {})",
                    self.horizon()
                ))
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &VectorField)> {
        self.samples.iter().map(|(t, u)| (*t, u))
    }
}

/// Kato-class norm `sup_t t^{alpha/2} ||u(t)||_{\dot H^s_q}` over the
/// trajectory samples, `alpha = s + 1 - d/q`.
///
/// A `t = 0` sample is skipped whenever `alpha != 0`: for `alpha > 0` its
/// weight vanishes, for `alpha < 0` the weight is singular and the sup is
/// read from the smallest positive mesh time.
pub fn kato_norm(traj: &Trajectory, spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    let alpha = spec.alpha(traj.grid().d());
    let mut best: Option<f64> = None;
    for (t, u) in traj.iter() {
        if t == 0.0 && alpha != 0.0 {
            continue;
        }
        let weight = if t == 0.0 { 1.0 } else { t.powf(alpha / 2.0) };
        let v = weight * sobolev_norm_vec(u, spec)?;
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    best.ok_or_else(|| Error::Domain("kato norm: no usable samples (only t = 0)".into()))
}

/// Raw and rescaled norm series of the `n`-th time derivative:
/// rows `(t, ||D_t^n u(t)||_{\dot H^s_q}, t^rho * same)` with
/// `rho = (s + 1 + 2n - d/q)/2`.
///
/// A `t = 0` sample is skipped when `rho < 0` (singular weight).
pub fn rescaled_norm_series(
    traj: &Trajectory,
    spec: &NormSpec,
    n: u32,
) -> Result<Vec<(f64, f64, f64)>> {
    spec.validate()?;
    let d = traj.grid().d();
    let rho = decay_weight_exponent(spec, n, d);
    let mut rows = Vec::with_capacity(traj.len());
    for (t, u) in traj.iter() {
        if t == 0.0 && rho < 0.0 {
            continue;
        }
        let field = if n == 0 {
            None
        } else {
            Some(crate::solver::time_derivative(u, n)?)
        };
        let raw = sobolev_norm_vec(field.as_ref().unwrap_or(u), spec)?;
        let weight = if t == 0.0 && rho == 0.0 { 1.0 } else { t.powf(rho) };
        rows.push((t, raw, weight * raw));
    }
    Ok(rows)
}

/// Envelope weight exponent for the `n`-th derivative of the velocity:
/// `(s + 1 + 2n - d/q)/2`.
pub fn decay_weight_exponent(spec: &NormSpec, n: u32, d: usize) -> f64 {
    (spec.s + 1.0 + 2.0 * n as f64 - d as f64 / spec.q) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        heat_semigroup_vec, make_initial_data, periodized_gaussian, InitialData,
    };

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(2, 64, TAU).unwrap()
    }

    #[test]
    fn lq_norm_closed_forms() {
        let g = grid();
        // constant c: ||c||_q = |c| L^{d/q}
        let c = SpectralField::from_fn(g, |_| -1.7);
        let q = 3.0;
        let expect = 1.7 * g.l().powf(2.0 / q);
        assert!((lq_norm(&c, q).unwrap() - expect).abs() < 1e-12 * expect);
        // ||sin(x0)||_2 = sqrt(L^2/2) on the 2pi box
        let s = SpectralField::from_fn(g, |x| x[0].sin());
        let expect = (g.l() * g.l() / 2.0).sqrt();
        assert!((lq_norm(&s, 2.0).unwrap() - expect).abs() < 1e-12 * expect);
        // ||sin||_4^4 = L^2 * 3/8
        let expect = (3.0 / 8.0 * g.l() * g.l()).powf(0.25);
        assert!((lq_norm(&s, 4.0).unwrap() - expect).abs() < 1e-12 * expect);
        // max norm
        assert!((lq_norm(&s, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);
        // homogeneity and zero-iff-zero
        let z = SpectralField::zeros(g);
        assert_eq!(lq_norm(&z, 2.5).unwrap(), 0.0);
        assert!(lq_norm(&s, 0.5).is_err());
    }

    #[test]
    fn sobolev_norm_dual_route_s1_q2() {
        // ||Lambda f||_2 must equal the gradient quadrature
        // sqrt(sum_j ||d_j f||_2^2) (exact identity mode by mode).
        let g = grid();
        let f = crate::spectral::random_slope_band_limited(g, 1.0, 5, 10);
        let spec = NormSpec::new(1.0, 2.0).unwrap();
        let a = sobolev_norm(&f, &spec).unwrap();
        let mut grad_sq = 0.0;
        for j in 0..g.d() {
            let dj = crate::spectral::gradient(&f, j);
            let v = lq_norm(&dj, 2.0).unwrap();
            grad_sq += v * v;
        }
        let b = grad_sq.sqrt();
        assert!((a - b).abs() <= 1e-12 * b, "lambda route {a} vs gradient route {b}");
    }

    #[test]
    fn sobolev_norm_is_continuous_in_s() {
        // On band-limited fields, steps of 0.01 in s move the norm by
        // at most k_max^{0.01} < 10%.
        let g = grid();
        let f = crate::spectral::random_slope_band_limited(g, 1.0, 6, 10);
        let mut prev = None;
        let mut s = 0.0;
        while s <= 2.0 + 1e-9 {
            let v = sobolev_norm(&f, &NormSpec::new(s, 2.0).unwrap()).unwrap();
            if let Some(p) = prev {
                let jump: f64 = v / p;
                assert!(
                    (0.9..=1.1).contains(&jump),
                    "norm jumped by {jump} between s = {} and {}",
                    s - 0.01,
                    s
                );
            }
            prev = Some(v);
            s += 0.01;
        }
    }

    #[test]
    fn besov_single_mode_matches_analytic_supremum() {
        // f = cos(4 x0): sup_t t^{-s/2} e^{-16 t} ||f||_q at t* = -s/32,
        // inside the default grid; geometric sampling is within 2%.
        let g = grid();
        let f = SpectralField::from_fn(g, |x| (4.0 * x[0]).cos());
        let spec = BesovSpec::for_grid(&g, -0.5, 4.0).unwrap();
        let t_star = 0.5 / (2.0 * 16.0);
        assert!(t_star > spec.t_min && t_star < spec.t_max);
        let analytic =
            t_star.powf(0.25) * (-t_star * 16.0).exp() * lq_norm(&f, 4.0).unwrap();
        let computed = besov_norm(&f, &spec).unwrap();
        assert!(
            ((computed - analytic) / analytic).abs() <= 0.02,
            "grid sup {computed} vs analytic {analytic}"
        );
        assert!(computed <= analytic * (1.0 + 1e-12), "grid sup cannot exceed analytic sup");
    }

    #[test]
    fn besov_norm_is_homogeneous_and_needs_negative_s() {
        let g = grid();
        let f = crate::spectral::random_slope_band_limited(g, 1.0, 7, 8);
        let spec = BesovSpec::for_grid(&g, -0.5, 4.0).unwrap();
        let a = besov_norm(&f, &spec).unwrap();
        let b = besov_norm(&f.scaled(3.0), &spec).unwrap();
        assert!((b - 3.0 * a).abs() <= 1e-12 * b);
        assert!(BesovSpec::for_grid(&g, 0.0, 4.0).is_err());
        assert!(BesovSpec::for_grid(&g, 0.5, 4.0).is_err());
    }

    #[test]
    fn trajectory_validation() {
        let g = GridSpec::new(2, 8, TAU).unwrap();
        let u = VectorField::zeros(g);
        assert!(matches!(
            Trajectory::new(vec![]),
            Err(Error::EmptyTrajectory)
        ));
        assert!(Trajectory::new(vec![(0.0, u.clone()), (0.0, u.clone())]).is_err());
        assert!(Trajectory::new(vec![(-0.1, u.clone())]).is_err());
        let t = Trajectory::new(vec![(0.0, u.clone()), (0.5, u.clone())]).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.horizon(), 0.5);
        assert!(t.index_at(0.5).is_ok());
        assert!(t.index_at(0.3).is_err());
    }

    #[test]
    fn kato_norm_of_heat_flow_has_interior_max() {
        // Vortex data under pure heat flow, monitored in \dot H^1_2 (alpha=1):
        // weighted curve t^{1/2} * ||Lambda u(t)||_2 peaks inside the window,
        // and a 10x denser mesh moves the sup by only a grid-sampling factor.
        let g = grid();
        let u0 = make_initial_data(
            g,
            &InitialData::GaussianVortex {
                width: 0.05,
                amplitude: 1.0,
            },
        )
        .unwrap();
        let spec = NormSpec::new(1.0, 2.0).unwrap();
        let build = |count: usize| {
            let mut samples = Vec::new();
            for i in 0..=count {
                let t = 0.4 * i as f64 / count as f64;
                samples.push((t, heat_semigroup_vec(&u0, t).unwrap()));
            }
            Trajectory::new(samples).unwrap()
        };
        let coarse = build(40);
        let dense = build(400);
        let kc = kato_norm(&coarse, &spec).unwrap();
        let kd = kato_norm(&dense, &spec).unwrap();
        assert!(kd >= kc, "denser grid can only raise the sampled sup");
        assert!(
            (kd - kc) / kd <= 0.02,
            "coarse sup {kc} too far below dense sup {kd}"
        );
        // interior max: the best sample is neither endpoint
        let vals: Vec<f64> = coarse
            .iter()
            .filter(|(t, _)| *t > 0.0)
            .map(|(t, u)| t.powf(spec.alpha(2) / 2.0) * sobolev_norm_vec(u, &spec).unwrap())
            .collect();
        let (imax, _) = vals
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        assert!(imax > 0 && imax < vals.len() - 1, "max at window edge");
    }

    #[test]
    fn kato_norm_monotone_under_window_extension() {
        let g = GridSpec::new(2, 16, TAU).unwrap();
        let u0 = make_initial_data(g, &InitialData::TaylorGreen { amplitude: 1.0 }).unwrap();
        let spec = NormSpec::new(0.0, 4.0).unwrap();
        let samples: Vec<(f64, VectorField)> = (0..=20)
            .map(|i| {
                let t = 0.05 * i as f64;
                (t, heat_semigroup_vec(&u0, t).unwrap())
            })
            .collect();
        let full = kato_norm(&Trajectory::new(samples.clone()).unwrap(), &spec).unwrap();
        let half = kato_norm(
            &Trajectory::new(samples[..10].to_vec()).unwrap(),
            &spec,
        )
        .unwrap();
        assert!(full >= half, "sup over larger window cannot shrink");
    }

    #[test]
    fn rescaled_series_matches_gaussian_closed_form() {
        // Heat trajectory of scalar Gaussian data placed in component 0.
        // With (s, q, d) = (1, 2, 2): rho = 1/2 and
        // ||Lambda G_{a+t}||_2 = (16 pi)^{-1/2} / (a+t) + image/truncation
        // corrections, so the rescaled entry is t^{1/2} (16 pi)^{-1/2}/(a+t).
        let g = grid();
        let a = 0.02;
        let mut g0 = periodized_gaussian(g, a, &[TAU / 2.0, TAU / 2.0, 0.0]);
        g0.set_mean_zero();
        let u0 = VectorField::from_components(vec![g0, SpectralField::zeros(g)]).unwrap();
        let samples: Vec<(f64, VectorField)> = (1..=25)
            .map(|i| {
                let t = 0.01 * i as f64;
                (t, heat_semigroup_vec(&u0, t).unwrap())
            })
            .collect();
        let traj = Trajectory::new(samples).unwrap();
        let spec = NormSpec::new(1.0, 2.0).unwrap();
        let rows = rescaled_norm_series(&traj, &spec, 0).unwrap();
        let c = 1.0 / (16.0 * std::f64::consts::PI).sqrt();
        for &(t, raw, rescaled) in &rows {
            let expect_raw = c / (a + t);
            assert!(
                ((raw - expect_raw) / expect_raw).abs() < 1e-6,
                "raw norm at t = {t}: {raw} vs {expect_raw}"
            );
            let expect_rescaled = t.sqrt() * expect_raw;
            assert!(((rescaled - expect_rescaled) / expect_rescaled).abs() < 1e-6);
        }
        // (s, q) = (0, 2): rho = 0, raw = rescaled, and the mean-subtracted
        // Gaussian L^2 norm is sqrt(1/(8 pi (a+t)) - 1/L^2).
        let spec0 = NormSpec::new(0.0, 2.0).unwrap();
        let rows0 = rescaled_norm_series(&traj, &spec0, 0).unwrap();
        for &(t, raw, rescaled) in &rows0 {
            let b = a + t;
            let expect =
                (1.0 / (8.0 * std::f64::consts::PI * b) - 1.0 / (g.l() * g.l())).sqrt();
            assert!(
                ((raw - expect) / expect).abs() < 1e-6,
                "L2 norm at t = {t}: {raw} vs {expect}"
            );
            assert_eq!(raw, rescaled, "rho = 0 so weighting is the identity");
        }
    }

    #[test]
    fn alpha_formula_exact() {
        let spec = NormSpec::new(0.5, 2.0).unwrap();
        assert_eq!(spec.alpha(3), 0.5 + 1.0 - 1.5);
        let spec = NormSpec::new(0.0, 4.0).unwrap();
        assert_eq!(spec.alpha(2), 0.5);
        assert_eq!(decay_weight_exponent(&spec, 1, 2), (0.0 + 1.0 + 2.0 - 0.5) / 2.0);
    }
}
