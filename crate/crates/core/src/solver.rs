//! Time integration of the unit-viscosity equations on the periodic box.
//!
//! Two routes to the same mild solution:
//! an integrating-factor Heun stepper ([`integrate`]) that treats the
//! diffusive part exactly, and a Picard iteration ([`picard_solve`]) on
//! the fixed-point form `u = e^{t Lap} u0 - B(u, u)` with the Duhamel
//! integral `B` evaluated by the trapezoid rule on the solver mesh.
//!
//! Picard iterates store the full trajectory, so memory scales as
//! `(n_steps + 1) * d * N^d` complex numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spaces::{sobolev_norm_vec, NormSpec, Trajectory};
use crate::spectral::{
    divergence_of_tensor, heat_semigroup_vec, laplacian, nonlinear_term,
    tensor_product_dealiased, SpectralField, VectorField,
};
use crate::{Error, Result};

/// Highest supported order of the exact time-derivative recursion.
pub const MAX_TIME_DERIVATIVE_ORDER: u32 = 6;

/// Time mesh shape on `[0, t_final]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshKind {
    #[default]
    Uniform,
    /// Nodes `t_i = t_final (i / n)^exponent`, `exponent >= 1`; clusters
    /// nodes near `t = 0` where Kato weights vary fastest.
    Graded { exponent: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub t_final: f64,
    /// Number of intervals; the mesh has `n_steps + 1` nodes.
    pub n_steps: usize,
    #[serde(default)]
    pub mesh: MeshKind,
    /// Picard stops when the monitor Kato norm of an update falls below this.
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_picard_max_iter")]
    pub picard_max_iter: usize,
    /// Kato monitor norms; the first drives the Picard stopping rule.
    /// Empty selects the scale-critical default `(s, q) = (0, 2d)`.
    #[serde(default)]
    pub monitor_specs: Vec<NormSpec>,
}

fn default_picard_tol() -> f64 {
    1e-9
}

fn default_picard_max_iter() -> usize {
    25
}

impl SolverConfig {
    pub fn new(t_final: f64, n_steps: usize) -> Self {
        SolverConfig {
            t_final,
            n_steps,
            mesh: MeshKind::Uniform,
            picard_tol: default_picard_tol(),
            picard_max_iter: default_picard_max_iter(),
            monitor_specs: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::Domain(format!(
                "solver.t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.n_steps == 0 {
            return Err(Error::Domain("solver.n_steps must be at least 1".into()));
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            return Err(Error::Domain(format!(
                "solver.picard_tol must be positive, got {}",
                self.picard_tol
            )));
        }
        if self.picard_max_iter == 0 {
            return Err(Error::Domain(
                "solver.picard_max_iter must be at least 1".into(),
            ));
        }
        if let MeshKind::Graded { exponent } = self.mesh {
            if !(exponent.is_finite() && exponent >= 1.0) {
                return Err(Error::Domain(format!(
                    "solver.mesh.exponent must be >= 1, got {exponent}"
                )));
            }
        }
        for spec in &self.monitor_specs {
            spec.validate()?;
        }
        Ok(())
    }

    /// Monitor norm driving the Picard stopping rule: the first configured
    /// spec, or the scale-critical `(s, q) = (0, 2d)` when none is given.
    pub fn monitor_spec(&self, d: usize) -> NormSpec {
        self.monitor_specs.first().copied().unwrap_or(NormSpec {
            s: 0.0,
            q: (2 * d) as f64,
        })
    }
}

/// Mesh nodes on `[0, t_final]` including both endpoints.
pub fn mesh_times(cfg: &SolverConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = cfg.n_steps;
    let mut times: Vec<f64> = match cfg.mesh {
        MeshKind::Uniform => (0..=n)
            .map(|i| cfg.t_final * i as f64 / n as f64)
            .collect(),
        MeshKind::Graded { exponent } => (0..=n)
            .map(|i| cfg.t_final * (i as f64 / n as f64).powf(exponent))
            .collect(),
    };
    times[n] = cfg.t_final;
    Ok(times)
}

fn is_uniform(times: &[f64]) -> bool {
    if times.len() < 3 {
        return true;
    }
    let dt = times[1] - times[0];
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-12 * dt.abs().max(f64::MIN_POSITIVE))
}

/// Integrating-factor Heun step of size `h`: the linear part is applied
/// exactly, the nonlinearity to second order.
fn ifrk2_step(u: &VectorField, h: f64) -> Result<VectorField> {
    let n1 = nonlinear_term(u, u)?.scaled(-1.0);
    let eu = heat_semigroup_vec(u, h)?;
    let en1 = heat_semigroup_vec(&n1, h)?;
    let mut predictor = eu.clone();
    predictor.axpy(h, &en1);
    let n2 = nonlinear_term(&predictor, &predictor)?.scaled(-1.0);
    let mut next = eu;
    next.axpy(0.5 * h, &en1);
    next.axpy(0.5 * h, &n2);
    Ok(next)
}

fn integrate_impl(
    u0: &VectorField,
    cfg: &SolverConfig,
    with_nonlinearity: bool,
) -> Result<Trajectory> {
    let times = mesh_times(cfg)?;
    let mut u = u0.clone();
    u.dealias();
    let mut samples = Vec::with_capacity(times.len());
    samples.push((times[0], u.clone()));
    // Diffusion only shrinks norms; growth by this factor is an instability.
    let guard = 1e9 * (1.0 + u.l2_norm());
    for m in 1..times.len() {
        let h = times[m] - times[m - 1];
        u = if with_nonlinearity {
            ifrk2_step(&u, h)?
        } else {
            heat_semigroup_vec(&u, h)?
        };
        if !u.is_finite() || u.l2_norm() > guard {
            return Err(Error::BlowUp {
                last_valid_time: times[m - 1],
            });
        }
        samples.push((times[m], u.clone()));
    }
    Trajectory::new(samples)
}

/// March the projected system over the configured mesh with the
/// integrating-factor Heun scheme; second order in the step size, exact
/// on the purely diffusive part.
pub fn integrate(u0: &VectorField, cfg: &SolverConfig) -> Result<Trajectory> {
    integrate_impl(u0, cfg, true)
}

/// Composite-trapezoid weights of the submesh `times[0..=m]`.
fn trapezoid_weight(times: &[f64], i: usize, m: usize) -> f64 {
    if m == 0 {
        0.0
    } else if i == 0 {
        (times[1] - times[0]) / 2.0
    } else if i == m {
        (times[m] - times[m - 1]) / 2.0
    } else {
        (times[i + 1] - times[i - 1]) / 2.0
    }
}

/// Advection integrands `G_i = P div(u_i x v_i)` at every node.
fn advection_at_nodes(us: &[&VectorField], vs: &[&VectorField]) -> Result<Vec<VectorField>> {
    (0..us.len())
        .into_par_iter()
        .map(|i| nonlinear_term(us[i], vs[i]))
        .collect()
}

/// `B(t_m) = sum_i w_i e^{(t_m - t_i) Lap} G_i` for one `m`; the generic
/// path, used for graded meshes.
fn duhamel_direct(times: &[f64], g: &[VectorField], m: usize) -> Result<VectorField> {
    let grid = *g[0].grid();
    let mut acc = VectorField::zeros(grid);
    for i in 0..=m {
        let w = trapezoid_weight(times, i, m);
        acc.axpy(w, &heat_semigroup_vec(&g[i], times[m] - times[i])?);
    }
    Ok(acc)
}

/// All-node Duhamel sums on a uniform mesh via the one-pass recurrence
/// `T_m = E T_{m-1} + (E G_{m-1} + G_m) / 2`, `B(t_m) = dt T_m`, with
/// `E = e^{dt Lap}`; algebraically identical to the direct trapezoid sum.
fn duhamel_uniform_all(times: &[f64], g: &[VectorField]) -> Result<Vec<VectorField>> {
    let grid = *g[0].grid();
    let dt = times[1] - times[0];
    let mut out = Vec::with_capacity(times.len());
    out.push(VectorField::zeros(grid));
    let mut acc = VectorField::zeros(grid);
    for m in 1..times.len() {
        acc = heat_semigroup_vec(&acc, dt)?;
        acc.axpy(0.5, &heat_semigroup_vec(&g[m - 1], dt)?);
        acc.axpy(0.5, &g[m]);
        out.push(acc.scaled(dt));
    }
    Ok(out)
}

fn duhamel_general_all(times: &[f64], g: &[VectorField]) -> Result<Vec<VectorField>> {
    (0..times.len())
        .into_par_iter()
        .map(|m| duhamel_direct(times, g, m))
        .collect()
}

/// `B(u, v)` at every mesh node given node samples of `u` and `v`.
fn bilinear_all_nodes(
    times: &[f64],
    us: &[&VectorField],
    vs: &[&VectorField],
) -> Result<Vec<VectorField>> {
    let g = advection_at_nodes(us, vs)?;
    if times.len() == 1 {
        return Ok(vec![VectorField::zeros(*us[0].grid())]);
    }
    if is_uniform(times) {
        duhamel_uniform_all(times, &g)
    } else {
        duhamel_general_all(times, &g)
    }
}

/// Duhamel term `B(u, v)(t) = int_0^t e^{(t - tau) Lap} P div(u x v) dtau`
/// by the trapezoid rule over the shared trajectory mesh. `t` must be a
/// mesh node and the trajectories must start at `t = 0` on equal meshes.
pub fn bilinear_duhamel(u: &Trajectory, v: &Trajectory, t: f64) -> Result<VectorField> {
    let times = u.times();
    let vtimes = v.times();
    if times.len() != vtimes.len()
        || times
            .iter()
            .zip(&vtimes)
            .any(|(a, b)| (a - b).abs() > 1e-12 * u.horizon().max(1.0))
    {
        return Err(Error::DimensionMismatch(
            "bilinear term needs both trajectories on the same mesh".into(),
        ));
    }
    if times[0] != 0.0 {
        return Err(Error::Domain(
            "bilinear term integrates from t = 0; trajectory starts later".into(),
        ));
    }
    let m = u.index_at(t)?;
    let us: Vec<&VectorField> = (0..=m).map(|i| u.sample(i).1).collect();
    let vs: Vec<&VectorField> = (0..=m).map(|i| v.sample(i).1).collect();
    let g = advection_at_nodes(&us, &vs)?;
    duhamel_direct(&times[..=m], &g, m)
}

/// Kato norm over parallel slices of times and fields; mirrors
/// [`crate::spaces::kato_norm`] without building a trajectory.
fn kato_of(times: &[f64], fields: &[VectorField], spec: &NormSpec) -> Result<f64> {
    let d = fields[0].grid().d();
    let alpha = spec.alpha(d);
    let mut best: Option<f64> = None;
    for (&t, u) in times.iter().zip(fields) {
        if t == 0.0 && alpha != 0.0 {
            continue;
        }
        let w = if t == 0.0 { 1.0 } else { t.powf(alpha / 2.0) };
        let v = w * sobolev_norm_vec(u, spec)?;
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    best.ok_or_else(|| Error::Domain("kato norm: no usable samples".into()))
}

/// Empirical smallness diagnostics for the fixed-point argument, all in
/// the monitor Kato norm `Y`:
/// `y_norm = ||e^{t Lap} u0||_Y`, `eta_hat = ||B(U, U)||_Y / y_norm^2`,
/// and the sufficient condition `4 eta_hat y_norm < 1` for contraction.
#[derive(Debug, Clone)]
pub struct ContractionEstimate {
    pub eta_hat: f64,
    pub y_norm: f64,
    /// Successive Picard update ratios actually observed (empty when the
    /// estimate was computed without iterating).
    pub ratios: Vec<f64>,
    pub contractive: bool,
}

impl ContractionEstimate {
    /// Positive iff the sufficient smallness condition holds, with room to
    /// spare equal to the returned value.
    pub fn smallness_margin(&self) -> f64 {
        1.0 - 4.0 * self.eta_hat * self.y_norm
    }
}

struct PicardSetup {
    times: Vec<f64>,
    heat: Vec<VectorField>,
    b_heat: Vec<VectorField>,
    estimate: ContractionEstimate,
}

fn picard_setup(u0: &VectorField, cfg: &SolverConfig) -> Result<PicardSetup> {
    let times = mesh_times(cfg)?;
    let monitor = cfg.monitor_spec(u0.grid().d());
    monitor.validate()?;
    let mut data = u0.clone();
    data.dealias();
    let heat: Vec<VectorField> = times
        .iter()
        .map(|&t| heat_semigroup_vec(&data, t))
        .collect::<Result<_>>()?;
    let y_norm = kato_of(&times, &heat, &monitor)?;
    let refs: Vec<&VectorField> = heat.iter().collect();
    let b_heat = bilinear_all_nodes(&times, &refs, &refs)?;
    let b_norm = kato_of(&times, &b_heat, &monitor)?;
    let eta_hat = if y_norm > 0.0 {
        b_norm / (y_norm * y_norm)
    } else {
        0.0
    };
    let estimate = ContractionEstimate {
        eta_hat,
        y_norm,
        ratios: Vec::new(),
        contractive: 4.0 * eta_hat * y_norm < 1.0,
    };
    Ok(PicardSetup {
        times,
        heat,
        b_heat,
        estimate,
    })
}

/// Smallness diagnostics without running the iteration to convergence.
pub fn estimate_contraction(u0: &VectorField, cfg: &SolverConfig) -> Result<ContractionEstimate> {
    Ok(picard_setup(u0, cfg)?.estimate)
}

#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub trajectory: Trajectory,
    pub iterations: usize,
    /// Monitor norm of each update `u^{(j+1)} - u^{(j)}`.
    pub update_history: Vec<f64>,
    pub estimate: ContractionEstimate,
}

/// Picard iteration `u^{(j+1)} = e^{t Lap} u0 - B(u^{(j)}, u^{(j)})`,
/// starting from the heat flow, until the monitor Kato norm of an update
/// drops below `picard_tol`.
///
/// Sustained non-contraction (update ratios `>= 1` for half the iteration
/// budget in a row) aborts with [`Error::SmallnessViolated`] carrying the
/// diagnostics; a still-shrinking but unconverged run exhausting the
/// budget yields [`Error::NoConvergence`].
pub fn picard_solve(u0: &VectorField, cfg: &SolverConfig) -> Result<PicardSolution> {
    let PicardSetup {
        times,
        heat,
        b_heat,
        mut estimate,
    } = picard_setup(u0, cfg)?;
    let monitor = cfg.monitor_spec(u0.grid().d());
    let bad_limit = (cfg.picard_max_iter / 2).max(2);
    let mut current = heat.clone();
    let mut current_b = b_heat;
    let mut prev_update: Option<f64> = None;
    let mut consecutive_bad = 0usize;
    let mut history: Vec<f64> = Vec::new();
    for iter in 1..=cfg.picard_max_iter {
        let next: Vec<VectorField> = heat
            .iter()
            .zip(&current_b)
            .map(|(h, b)| {
                let mut s = h.clone();
                s.axpy(-1.0, b);
                s
            })
            .collect();
        let diff: Vec<VectorField> = next
            .iter()
            .zip(&current)
            .map(|(a, b)| a.sub(b))
            .collect();
        let update = kato_of(&times, &diff, &monitor)?;
        history.push(update);
        if let Some(p) = prev_update {
            if p > 0.0 {
                estimate.ratios.push(update / p);
            }
        }
        if update < cfg.picard_tol {
            let samples: Vec<(f64, VectorField)> =
                times.iter().copied().zip(next).collect();
            return Ok(PicardSolution {
                trajectory: Trajectory::new(samples)?,
                iterations: iter,
                update_history: history,
                estimate,
            });
        }
        let bad = !update.is_finite() || prev_update.is_some_and(|p| update >= p);
        if bad {
            consecutive_bad += 1;
        } else {
            consecutive_bad = 0;
        }
        if consecutive_bad >= bad_limit {
            return Err(Error::SmallnessViolated(Box::new(estimate)));
        }
        prev_update = Some(update);
        current = next;
        let refs: Vec<&VectorField> = current.iter().collect();
        current_b = bilinear_all_nodes(&times, &refs, &refs)?;
    }
    Err(Error::NoConvergence {
        iters: cfg.picard_max_iter,
        last_update: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// Exact time derivative of order `n` evaluated from the state alone via
/// the autonomous recursion
/// `D^n u = Lap D^{n-1} u - sum_j C(n-1, j) P div(D^j u x D^{n-1-j} u)`.
pub fn time_derivative(u: &VectorField, n: u32) -> Result<VectorField> {
    if n > MAX_TIME_DERIVATIVE_ORDER {
        return Err(Error::Domain(format!(
            "time derivative order {n} exceeds the supported maximum {MAX_TIME_DERIVATIVE_ORDER}"
        )));
    }
    let mut derivs: Vec<VectorField> = vec![u.clone()];
    for m in 1..=n as usize {
        let mut next = derivs[m - 1].map(laplacian);
        for j in 0..m {
            let term = nonlinear_term(&derivs[j], &derivs[m - 1 - j])?;
            next.axpy(-binomial(m - 1, j), &term);
        }
        derivs.push(next);
    }
    Ok(derivs.pop().expect("nonempty by construction"))
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Pressure recovered from the velocity:
/// `p^(k) = - sum_{j,l} k_j k_l (u_j u_l)^(k) / |k|^2`, zero mean, with
/// the product dealiased like the advection term.
pub fn pressure(u: &VectorField) -> Result<SpectralField> {
    let grid = *u.grid();
    let d = grid.d();
    let tensor = tensor_product_dealiased(u, u)?;
    let k2 = grid.k_squared();
    let kc: Vec<Vec<f64>> = (0..d).map(|j| grid.k_component(j)).collect();
    let mut p = SpectralField::zeros(grid);
    for j in 0..d {
        for l in 0..d {
            let t = tensor.entry(j, l).coeffs();
            let out = p.coeffs_mut();
            for idx in 0..t.len() {
                if k2[idx] > 0.0 {
                    out[idx] -= kc[j][idx] * kc[l][idx] * t[idx] / k2[idx];
                }
            }
        }
    }
    Ok(p)
}

/// Sup over mesh nodes of the monitor Kato norm of
/// `u(t) - e^{t Lap} u0 + B(u, u)(t)`; zero for an exact mild solution
/// sampled on its own mesh.
pub fn mild_residual(traj: &Trajectory, u0: &VectorField, spec: &NormSpec) -> Result<f64> {
    let times = traj.times();
    if times[0] != 0.0 {
        return Err(Error::Domain(
            "mild residual integrates from t = 0; trajectory starts later".into(),
        ));
    }
    let fields: Vec<&VectorField> = traj.iter().map(|(_, u)| u).collect();
    let b = bilinear_all_nodes(&times, &fields, &fields)?;
    let mut residual = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let mut r = fields[i].clone();
        r.axpy(-1.0, &heat_semigroup_vec(u0, t)?);
        r.add_assign(&b[i]);
        residual.push(r);
    }
    kato_of(&times, &residual, spec)
}

/// Instantaneous enstrophy dissipation rate `2 ||Lambda u||_2^2`
/// (twice the energy dissipation of the unit-viscosity flow).
pub fn dissipation_rate(u: &VectorField) -> f64 {
    let grid = *u.grid();
    let k2 = grid.k_squared();
    let vol = grid.l().powi(grid.d() as i32);
    let sum: f64 = u
        .components()
        .iter()
        .map(|c| {
            c.coeffs()
                .iter()
                .zip(&k2)
                .map(|(v, &kk)| kk * v.norm_sqr())
                .sum::<f64>()
        })
        .sum();
    2.0 * vol * sum
}

/// Worst relative defect of the energy balance
/// `||u(t)||_2^2 + int_0^t 2 ||Lambda u||_2^2 dtau = ||u(0)||_2^2`
/// over even-index nodes, the dissipation integral evaluated by composite
/// Simpson on consecutive node pairs (uniform mesh required).
pub fn energy_balance_residual(traj: &Trajectory) -> Result<f64> {
    let times = traj.times();
    if times.len() < 3 {
        return Err(Error::Domain(
            "energy balance needs at least three samples".into(),
        ));
    }
    if times[0] != 0.0 {
        return Err(Error::Domain("energy balance starts at t = 0".into()));
    }
    if !is_uniform(&times) {
        return Err(Error::Domain(
            "energy balance quadrature needs a uniform mesh".into(),
        ));
    }
    let h = times[1] - times[0];
    let energy: Vec<f64> = traj
        .iter()
        .map(|(_, u)| {
            let v = u.l2_norm();
            v * v
        })
        .collect();
    let diss: Vec<f64> = traj.iter().map(|(_, u)| dissipation_rate(u)).collect();
    let mut worst = 0.0f64;
    let mut integral = 0.0;
    let mut m = 2;
    while m < times.len() {
        integral += h / 3.0 * (diss[m - 2] + 4.0 * diss[m - 1] + diss[m]);
        worst = worst.max((energy[m] + integral - energy[0]).abs());
        m += 2;
    }
    Ok(worst / energy[0].max(f64::MIN_POSITIVE))
}

/// Unprojected divergence of the dealiased advection tensor,
/// `div(u x u)`; the pressure gradient closes its gap to the projected
/// advection term.
pub fn advection_divergence(u: &VectorField) -> Result<VectorField> {
    Ok(divergence_of_tensor(&tensor_product_dealiased(u, u)?))
}
