use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::{Error, Result};

use super::GridSpec;

/// Process-wide cache of 1-D FFT plans keyed by (length, direction).
/// Plans are `Send + Sync`; the lock is held only while fetching.
static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            FftPlanner::new().plan_fft(n, dir)
        })
        .clone()
}

/// In-place 1-D FFT along every axis of a row-major `N^d` array.
/// Unnormalized in both directions; callers apply `1/N^d` on the forward
/// pass so that coefficients satisfy `f(x) = sum_k c_k exp(i k.x)`.
fn fft_all_axes(grid: &GridSpec, data: &mut [Complex64], forward: bool) {
    let n = grid.n();
    let d = grid.d();
    let fft = plan(n, forward);
    let mut fft_scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::ZERO; n];
    for axis in 0..d {
        let inner = n.pow((d - 1 - axis) as u32);
        if inner == 1 {
            for chunk in data.chunks_exact_mut(n) {
                fft.process_with_scratch(chunk, &mut fft_scratch);
            }
        } else {
            let outer = n.pow(axis as u32);
            for o in 0..outer {
                let base_o = o * n * inner;
                for i in 0..inner {
                    let base = base_o + i;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * inner];
                    }
                    fft.process_with_scratch(&mut line, &mut fft_scratch);
                    for (j, value) in line.iter().enumerate() {
                        data[base + j * inner] = *value;
                    }
                }
            }
        }
    }
}

/// Scalar field stored as Fourier coefficients over a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient array has {} entries, grid needs {}",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Forward transform of physical samples (row-major, length `N^d`).
    pub fn from_physical(grid: GridSpec, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "sample array has {} entries, grid needs {}",
                samples.len(),
                grid.len()
            )));
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_all_axes(&grid, &mut data, true);
        let scale = 1.0 / grid.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        Ok(SpectralField { grid, coeffs: data })
    }

    /// Sample a function of physical coordinates onto the grid and transform.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64; 3]) -> f64) -> Self {
        let samples: Vec<f64> = (0..grid.len()).map(|idx| f(&grid.point(idx))).collect();
        SpectralField::from_physical(grid, &samples).expect("length matches by construction")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Inverse transform; returns the real parts of the physical samples.
    pub fn to_physical(&self) -> Vec<f64> {
        self.to_physical_complex().iter().map(|c| c.re).collect()
    }

    pub fn to_physical_complex(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft_all_axes(&self.grid, &mut data, false);
        data
    }

    /// Largest imaginary part left over after inverse transform; a
    /// Hermitian-symmetric coefficient array gives round-off only.
    pub fn max_imag_physical(&self) -> f64 {
        self.to_physical_complex()
            .iter()
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }

    /// Mean of the field over the box: the `k = 0` coefficient.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn set_mean_zero(&mut self) {
        self.coeffs[0] = Complex64::ZERO;
    }

    /// Project onto Hermitian-symmetric arrays: `c(-k) = conj(c(k))`.
    /// Self-paired modes (all components in {0, -N/2}) become real.
    pub fn hermitian_symmetrize(&mut self) {
        let grid = self.grid;
        let d = grid.d();
        for idx in 0..self.coeffs.len() {
            let m = grid.mode_vector(idx);
            let neg = [-m[0], -m[1], -m[2]];
            let nidx = grid.index_of_modes(&neg[..d]);
            if nidx == idx {
                self.coeffs[idx] = Complex64::new(self.coeffs[idx].re, 0.0);
            } else if nidx > idx {
                let avg = 0.5 * (self.coeffs[idx] + self.coeffs[nidx].conj());
                self.coeffs[idx] = avg;
                self.coeffs[nidx] = avg.conj();
            }
        }
    }

    /// Largest asymmetry `|c(-k) - conj(c(k))|` over all mode pairs.
    pub fn hermitian_defect(&self) -> f64 {
        let grid = self.grid;
        let d = grid.d();
        let mut worst = 0.0f64;
        for idx in 0..self.coeffs.len() {
            let m = grid.mode_vector(idx);
            let neg = [-m[0], -m[1], -m[2]];
            let nidx = grid.index_of_modes(&neg[..d]);
            let defect = (self.coeffs[nidx] - self.coeffs[idx].conj()).norm();
            worst = worst.max(defect);
        }
        worst
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `L^2(box)` norm via Plancherel: `sqrt(L^d * sum |c_k|^2)`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.l().powi(self.grid.d() as i32) * sum).sqrt()
    }

    /// Zero every mode the 2/3 rule discards (any `|m_i| > floor(N/3)`).
    pub fn dealias(&mut self) {
        let cut = self.grid.dealias_cutoff();
        let d = self.grid.d();
        let grid = self.grid;
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            let m = grid.mode_vector(idx);
            if m[..d].iter().any(|&mi| mi.abs() > cut) {
                *c = Complex64::ZERO;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.coeffs {
            *c *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn add_assign(&mut self, other: &SpectralField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert_eq!(self.grid, other.grid);
        for (s, o) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *s += a * o;
        }
    }

    /// Multiply every coefficient by a precomputed real symbol.
    pub fn apply_symbol(&mut self, symbol: &[f64]) {
        debug_assert_eq!(symbol.len(), self.coeffs.len());
        for (c, s) in self.coeffs.iter_mut().zip(symbol) {
            *c *= *s;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Velocity-like field: `d` scalar components on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        VectorField {
            components: (0..grid.d()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(components: Vec<SpectralField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DimensionMismatch(
                "vector field needs at least one component".into(),
            ));
        }
        let grid = *components[0].grid();
        if components.len() != grid.d() {
            return Err(Error::DimensionMismatch(format!(
                "vector field over d = {} grid needs {} components, got {}",
                grid.d(),
                grid.d(),
                components.len()
            )));
        }
        if components.iter().any(|c| c.grid() != &grid) {
            return Err(Error::DimensionMismatch(
                "vector field components live on different grids".into(),
            ));
        }
        Ok(VectorField { components })
    }

    pub fn grid(&self) -> &GridSpec {
        self.components[0].grid()
    }

    pub fn component(&self, j: usize) -> &SpectralField {
        &self.components[j]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut SpectralField {
        &mut self.components[j]
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        VectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn try_map(&self, f: impl Fn(&SpectralField) -> Result<SpectralField>) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        Ok(VectorField { components })
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.components {
            c.scale(a);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn sub(&self, other: &VectorField) -> Self {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &VectorField) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.add_assign(b);
        }
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (s, o) in self.components.iter_mut().zip(&other.components) {
            s.axpy(a, o);
        }
    }

    /// Root-sum-square of component `L^2` norms.
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let v = c.l2_norm();
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.max_coeff_abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    pub fn set_mean_zero(&mut self) {
        for c in &mut self.components {
            c.set_mean_zero();
        }
    }

    pub fn dealias(&mut self) {
        for c in &mut self.components {
            c.dealias();
        }
    }
}

/// Rank-2 tensor field: `d*d` scalar components, row-major `(i, j)`.
#[derive(Debug, Clone)]
pub struct TensorField {
    grid: GridSpec,
    entries: Vec<SpectralField>,
}

impl TensorField {
    pub fn new(grid: GridSpec, entries: Vec<SpectralField>) -> Result<Self> {
        if entries.len() != grid.d() * grid.d() {
            return Err(Error::DimensionMismatch(format!(
                "tensor over d = {} grid needs {} entries, got {}",
                grid.d(),
                grid.d() * grid.d(),
                entries.len()
            )));
        }
        Ok(TensorField { grid, entries })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn entry(&self, i: usize, j: usize) -> &SpectralField {
        &self.entries[i * self.grid.d() + j]
    }

    pub fn entries(&self) -> &[SpectralField] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_physical(grid: &GridSpec, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn round_trip_identity_2d() {
        let grid = GridSpec::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let samples = random_physical(&grid, 1);
        let f = SpectralField::from_physical(grid, &samples).unwrap();
        let back = f.to_physical();
        let worst = samples
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-13, "round trip error {worst}");
    }

    #[test]
    fn round_trip_identity_3d() {
        let grid = GridSpec::new(3, 8, 1.0).unwrap();
        let samples = random_physical(&grid, 2);
        let f = SpectralField::from_physical(grid, &samples).unwrap();
        let back = f.to_physical();
        let worst = samples
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-13, "round trip error {worst}");
    }

    #[test]
    fn forward_transform_of_single_cosine_hits_one_mode_pair() {
        let grid = GridSpec::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let f = SpectralField::from_fn(grid, |x| (3.0 * x[0]).cos());
        // cos(3 x0) = (e^{i3x0} + e^{-i3x0})/2 -> coefficients 1/2 at m = (±3, 0)
        let plus = grid.index_of_modes(&[3, 0]);
        let minus = grid.index_of_modes(&[-3, 0]);
        assert!((f.coeffs()[plus] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((f.coeffs()[minus] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        let rest: f64 = f
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != plus && *i != minus)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        assert!(rest < 1e-14, "stray coefficient {rest}");
    }

    #[test]
    fn real_samples_produce_hermitian_coefficients() {
        let grid = GridSpec::new(2, 12, 1.0).unwrap();
        let f = SpectralField::from_physical(grid, &random_physical(&grid, 3)).unwrap();
        assert!(f.hermitian_defect() < 1e-14);
        assert!(f.max_imag_physical() < 1e-13);
    }

    #[test]
    fn hermitian_symmetrize_is_idempotent_projection() {
        let grid = GridSpec::new(2, 8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let coeffs: Vec<Complex64> = (0..grid.len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut f = SpectralField::from_coeffs(grid, coeffs).unwrap();
        f.hermitian_symmetrize();
        assert!(f.hermitian_defect() < 1e-15);
        let once = f.clone();
        f.hermitian_symmetrize();
        assert_eq!(once, f);
        assert!(f.max_imag_physical() < 1e-13);
    }

    #[test]
    fn plancherel_equates_quadrature_and_coefficient_sums() {
        let grid = GridSpec::new(2, 16, 3.0).unwrap();
        let samples = random_physical(&grid, 5);
        let f = SpectralField::from_physical(grid, &samples).unwrap();
        let quad: f64 = samples.iter().map(|v| v * v).sum::<f64>() * grid.cell_volume();
        let coeff = f.l2_norm();
        assert!(
            (quad.sqrt() - coeff).abs() <= 1e-12 * coeff.max(1.0),
            "quadrature {} vs plancherel {}",
            quad.sqrt(),
            coeff
        );
    }
}
