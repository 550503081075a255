use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Uniform periodic grid on `[0, L)^d` with `N` points per axis.
///
/// Resolved wavevectors per axis are `(2*pi/L) * m` for integer modes
/// `m` in `{0, 1, ..., N/2 - 1, -N/2, ..., -1}` (standard FFT layout).
/// Scalar arrays over the grid are row-major with the last axis contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    n: usize,
    l: f64,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self> {
        if !(d == 2 || d == 3) {
            return Err(Error::InvalidGrid(format!("d must be 2 or 3, got {d}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "N must be even and at least 8, got {n}"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("L must be positive, got {l}")));
        }
        Ok(GridSpec { d, n, l })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Total number of grid points / retained modes, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Fundamental wavenumber `2*pi/L`.
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.l
    }

    /// Grid spacing `L/N`.
    pub fn spacing(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Quadrature weight of one grid cell, `(L/N)^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Signed integer mode along one axis for FFT index `i`.
    pub fn mode_of_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Integer modes per axis in FFT order; identical on every axis.
    pub fn modes(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.mode_of_index(i)).collect()
    }

    /// Wavenumbers per axis in FFT order: `k0 * m`.
    ///
    /// Bit-exact reproducible from `(d, N, L)`: each entry is the product
    /// of the same two floats in the same order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let k0 = self.k0();
        self.modes().iter().map(|&m| k0 * m as f64).collect()
    }

    /// Largest integer mode kept by the 2/3 dealiasing rule, `floor(N/3)`.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Integer mode vector of a flat row-major index (third entry 0 when d = 2).
    pub fn mode_vector(&self, idx: usize) -> [i64; 3] {
        let n = self.n;
        match self.d {
            2 => {
                let i0 = idx / n;
                let i1 = idx % n;
                [self.mode_of_index(i0), self.mode_of_index(i1), 0]
            }
            _ => {
                let i2 = idx % n;
                let rest = idx / n;
                let i1 = rest % n;
                let i0 = rest / n;
                [
                    self.mode_of_index(i0),
                    self.mode_of_index(i1),
                    self.mode_of_index(i2),
                ]
            }
        }
    }

    /// Flat index of an integer mode vector (entries reduced mod N).
    pub fn index_of_modes(&self, m: &[i64]) -> usize {
        let n = self.n as i64;
        let wrap = |v: i64| -> usize { (v.rem_euclid(n)) as usize };
        match self.d {
            2 => wrap(m[0]) * self.n + wrap(m[1]),
            _ => (wrap(m[0]) * self.n + wrap(m[1])) * self.n + wrap(m[2]),
        }
    }

    /// `|k|^2` for every flat index, in physical units.
    pub fn k_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        let n = self.n;
        let mut out = vec![0.0; self.len()];
        match self.d {
            2 => {
                for i0 in 0..n {
                    let a = k[i0] * k[i0];
                    for i1 in 0..n {
                        out[i0 * n + i1] = a + k[i1] * k[i1];
                    }
                }
            }
            _ => {
                for i0 in 0..n {
                    let a = k[i0] * k[i0];
                    for i1 in 0..n {
                        let b = a + k[i1] * k[i1];
                        for i2 in 0..n {
                            out[(i0 * n + i1) * n + i2] = b + k[i2] * k[i2];
                        }
                    }
                }
            }
        }
        out
    }

    /// Component `axis` of the wavevector for every flat index.
    pub fn k_component(&self, axis: usize) -> Vec<f64> {
        assert!(axis < self.d, "axis {axis} out of range for d = {}", self.d);
        let k = self.wavenumbers();
        let n = self.n;
        let mut out = vec![0.0; self.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let i = match (self.d, axis) {
                (2, 0) => idx / n,
                (2, 1) => idx % n,
                (3, 0) => idx / (n * n),
                (3, 1) => (idx / n) % n,
                _ => idx % n,
            };
            *slot = k[i];
        }
        out
    }

    /// Physical coordinates of a flat grid index.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let h = self.spacing();
        match self.d {
            2 => [(idx / n) as f64 * h, (idx % n) as f64 * h, 0.0],
            _ => {
                let i2 = idx % n;
                let rest = idx / n;
                [
                    (rest / n) as f64 * h,
                    (rest % n) as f64 * h,
                    i2 as f64 * h,
                ]
            }
        }
    }

    /// Upper end of the trusted experiment window: `(L/(2*pi))^2 / 4`.
    ///
    /// Beyond this time the slowest resolved mode has decayed by a fixed
    /// factor and box-size artifacts dominate whole-space behaviour.
    pub fn domain_validity_time(&self) -> f64 {
        let r = self.l / (2.0 * std::f64::consts::PI);
        r * r / 4.0
    }

    /// Shortest trusted experiment time, `10 * (L/N)^2`: below this the
    /// dissipative cutoff still straddles unresolved scales.
    pub fn resolve_time(&self) -> f64 {
        10.0 * self.spacing() * self.spacing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(GridSpec::new(1, 16, 1.0).is_err());
        assert!(GridSpec::new(4, 16, 1.0).is_err());
        assert!(GridSpec::new(2, 7, 1.0).is_err());
        assert!(GridSpec::new(2, 6, 1.0).is_err());
        assert!(GridSpec::new(2, 16, 0.0).is_err());
        assert!(GridSpec::new(2, 16, -2.0).is_err());
        assert!(GridSpec::new(2, 16, f64::NAN).is_err());
        assert!(GridSpec::new(3, 8, 1.0).is_ok());
    }

    #[test]
    fn wavenumber_layout_matches_fft_convention() {
        let g = GridSpec::new(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(g.modes(), vec![0, 1, 2, 3, -4, -3, -2, -1]);
        let k = g.wavenumbers();
        assert_eq!(k[1], 1.0);
        assert_eq!(k[5], -3.0);
        // nyquist magnitude = pi*N/L
        assert_eq!(k[4].abs(), std::f64::consts::PI * 8.0 / g.l());
    }

    #[test]
    fn wavenumbers_bit_exact_reproducible() {
        let a = GridSpec::new(3, 16, 1.7).unwrap();
        let b = GridSpec::new(3, 16, 1.7).unwrap();
        assert_eq!(a.wavenumbers(), b.wavenumbers());
        assert_eq!(a.k_squared(), b.k_squared());
    }

    #[test]
    fn mode_vector_round_trips() {
        for g in [
            GridSpec::new(2, 8, 1.0).unwrap(),
            GridSpec::new(3, 8, 1.0).unwrap(),
        ] {
            for idx in 0..g.len() {
                let m = g.mode_vector(idx);
                assert_eq!(g.index_of_modes(&m[..g.d()]), idx);
            }
        }
    }

    #[test]
    fn k_component_consistent_with_mode_vector() {
        let g = GridSpec::new(3, 8, 3.0).unwrap();
        let k0 = g.k0();
        for axis in 0..3 {
            let kc = g.k_component(axis);
            for idx in 0..g.len() {
                let m = g.mode_vector(idx);
                assert_eq!(kc[idx], k0 * m[axis] as f64);
            }
        }
    }
}
