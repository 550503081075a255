//! Divergence-free initial data generators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::ops::{gradient, leray_project};
use super::{GridSpec, SpectralField, VectorField};

/// Families of divergence-free, mean-zero initial velocity fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `amplitude * (sin(k0 x1) cos(k0 x2), -cos(k0 x1) sin(k0 x2) [, 0])`.
    ///
    /// An exact solution of the unit-viscosity equations: the advection
    /// term is a pure gradient, so the flow is `u0 * exp(-2 k0^2 t)` with
    /// pressure `amplitude^2/4 * (cos 2k0x1 + cos 2k0x2) * exp(-4 k0^2 t)`.
    TaylorGreen { amplitude: f64 },
    /// Random phases with `|u^(k)| ~ |k|^{-beta}` up to the dealias cutoff,
    /// Leray-projected and rescaled so the `L^2(box)` norm equals
    /// `amplitude`. `beta` tunes the (Besov) regularity of the data.
    RandomSlope { beta: f64, seed: u64, amplitude: f64 },
    /// Vortex with Gaussian stream function of width `a` (so vorticity is
    /// a Gaussian blob): `u = (d2 psi, -d1 psi [, 0])`, mean-zero by
    /// construction. In 3 dimensions this is a z-invariant columnar vortex.
    GaussianVortex { width: f64, amplitude: f64 },
}

/// Periodized Gaussian of width `a` centred at `x0`:
/// coefficients `exp(-a |k|^2 - i k.x0) / L^d`. Its heat evolution shifts
/// `a -> a + t` exactly, and for `L >> sqrt(a)` the physical samples match
/// `(4 pi a)^{-d/2} exp(-|x - x0|^2 / (4a))` plus periodic images.
pub fn periodized_gaussian(grid: GridSpec, a: f64, x0: &[f64; 3]) -> SpectralField {
    assert!(a > 0.0 && a.is_finite(), "gaussian width must be positive");
    let d = grid.d();
    let vol = grid.l().powi(d as i32);
    let k2 = grid.k_squared();
    let mut coeffs = vec![Complex64::ZERO; grid.len()];
    for (idx, c) in coeffs.iter_mut().enumerate() {
        let m = grid.mode_vector(idx);
        let k0 = grid.k0();
        let phase = -(k0 * m[0] as f64 * x0[0]
            + k0 * m[1] as f64 * x0[1]
            + if d == 3 { k0 * m[2] as f64 * x0[2] } else { 0.0 });
        *c = Complex64::from_polar((-a * k2[idx]).exp() / vol, phase);
    }
    let mut f = SpectralField::from_coeffs(grid, coeffs).expect("length matches");
    // Nyquist rows have no conjugate partner; drop them so the field stays
    // a proper real trigonometric polynomial (they are exp(-a k_nyq^2)-small).
    zero_nyquist(&mut f);
    f
}

fn zero_nyquist(f: &mut SpectralField) {
    let grid = *f.grid();
    let d = grid.d();
    let half = (grid.n() / 2) as i64;
    for (idx, c) in f.coeffs_mut().iter_mut().enumerate() {
        let m = grid.mode_vector(idx);
        if m[..d].iter().any(|&mi| mi == -half) {
            *c = Complex64::ZERO;
        }
    }
}

/// Random-phase scalar with spectral slope `beta` supported on
/// `0 < |m_i| <= max_mode`. Deterministic in `seed` and independent of `N`
/// as long as the band fits (used to build grid-independent families).
pub fn random_slope_band_limited(
    grid: GridSpec,
    beta: f64,
    seed: u64,
    max_mode: i64,
) -> SpectralField {
    let d = grid.d();
    assert!(
        max_mode <= grid.dealias_cutoff(),
        "band limit {} exceeds dealias cutoff {}",
        max_mode,
        grid.dealias_cutoff()
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    let k0 = grid.k0();
    // Fixed lexicographic draw order over the band => same field at any N.
    let range = -max_mode..=max_mode;
    let mut put = |m: [i64; 3], rng: &mut ChaCha8Rng| {
        let kk = k0 * ((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) as f64).sqrt();
        let amp: f64 = rng.random_range(0.5..1.5) * kk.powf(-beta);
        let phase: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
        let idx = f.grid().index_of_modes(&m[..d]);
        f.coeffs_mut()[idx] = Complex64::from_polar(amp, phase);
    };
    if d == 2 {
        for m0 in range.clone() {
            for m1 in range.clone() {
                if m0 == 0 && m1 == 0 {
                    continue;
                }
                put([m0, m1, 0], &mut rng);
            }
        }
    } else {
        for m0 in range.clone() {
            for m1 in range.clone() {
                for m2 in range.clone() {
                    if m0 == 0 && m1 == 0 && m2 == 0 {
                        continue;
                    }
                    put([m0, m1, m2], &mut rng);
                }
            }
        }
    }
    f.hermitian_symmetrize();
    f.set_mean_zero();
    f
}

/// Build validated initial data: divergence-free, mean-zero, dealiased,
/// Hermitian-symmetric.
pub fn make_initial_data(grid: GridSpec, data: &InitialData) -> Result<VectorField> {
    let d = grid.d();
    let k0 = grid.k0();
    let mut u = match *data {
        InitialData::TaylorGreen { amplitude } => {
            if !amplitude.is_finite() {
                return Err(Error::Domain("taylor_green amplitude must be finite".into()));
            }
            let c1 = SpectralField::from_fn(grid, |x| {
                amplitude * (k0 * x[0]).sin() * (k0 * x[1]).cos()
            });
            let c2 = SpectralField::from_fn(grid, |x| {
                -amplitude * (k0 * x[0]).cos() * (k0 * x[1]).sin()
            });
            let mut comps = vec![c1, c2];
            if d == 3 {
                comps.push(SpectralField::zeros(grid));
            }
            VectorField::from_components(comps)?
        }
        InitialData::RandomSlope {
            beta,
            seed,
            amplitude,
        } => {
            if !(amplitude.is_finite() && amplitude >= 0.0) {
                return Err(Error::Domain(
                    "random_slope amplitude must be finite and nonnegative".into(),
                ));
            }
            if !beta.is_finite() {
                return Err(Error::Domain("random_slope beta must be finite".into()));
            }
            let cut = grid.dealias_cutoff();
            let comps: Vec<SpectralField> = (0..d)
                .map(|j| {
                    random_slope_band_limited(grid, beta, seed.wrapping_add(j as u64), cut)
                })
                .collect();
            let mut u = leray_project(&VectorField::from_components(comps)?)?;
            let norm = u.l2_norm();
            if norm > 0.0 && amplitude > 0.0 {
                u.scale(amplitude / norm);
            } else {
                u.scale(0.0);
            }
            u
        }
        InitialData::GaussianVortex { width, amplitude } => {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::Domain("gaussian_vortex width must be positive".into()));
            }
            if !amplitude.is_finite() {
                return Err(Error::Domain("gaussian_vortex amplitude must be finite".into()));
            }
            let center = [grid.l() / 2.0, grid.l() / 2.0, grid.l() / 2.0];
            let mut psi = periodized_gaussian(grid, width, &center);
            psi.scale(amplitude);
            let mut comps = vec![gradient(&psi, 1), gradient(&psi, 0).scaled(-1.0)];
            if d == 3 {
                comps.push(SpectralField::zeros(grid));
            }
            VectorField::from_components(comps)?
        }
    };
    u.dealias();
    u.set_mean_zero();
    for j in 0..d {
        u.component_mut(j).hermitian_symmetrize();
    }
    Ok(u)
}

#[cfg(test)]
pub mod test_support {
    use super::*;

    /// Smooth random mean-zero scalar confined to the dealiased band.
    pub fn random_mean_zero_scalar(grid: GridSpec, seed: u64) -> SpectralField {
        let mut f = random_slope_band_limited(grid, 1.0, seed, grid.dealias_cutoff());
        f.scale(1.0 / f.l2_norm().max(f64::MIN_POSITIVE));
        f
    }
}
