//! Pseudo-spectral toolkit for mild solutions of the incompressible
//! Navier-Stokes equations on a periodic box `[0, L)^d`, `d` in {2, 3},
//! with unit viscosity.
//!
//! The box is a computable proxy for the whole space: all operators act on
//! truncated Fourier series, every Fourier multiplier is applied exactly on
//! the resolved modes, and experiments are only trusted on time windows
//! where the slowest resolved mode has not yet felt the box size.
//!
//! The crate is organised around five concerns:
//!
//! * [`spectral`]: grids, fields, transforms and the operator calculus
//!   (fractional Laplacian, Riesz transforms, Leray projection, heat
//!   semigroup, dealiased advection term).
//! * [`spaces`]: norm estimators for Lebesgue, fractional Sobolev, Besov
//!   (via heat characterization) and time-weighted Kato classes, plus the
//!   [`spaces::Trajectory`] container.
//! * [`solver`]: the Duhamel bilinear operator, Picard fixed-point
//!   iteration, an integrating-factor time stepper, spectral pressure
//!   recovery and time-derivative recursion.
//! * [`decay`]: theoretical decay exponents for velocity derivatives and
//!   pressure, log-log slope fitting, and pass/fail decay reports.
//! * [`verify`]: executable inequality checks (heat smoothing, product
//!   estimates, Riesz bounds, Sobolev embeddings, Besov equivalence, and
//!   singular beta integrals) with grid-refinement stability tracking.
//!
//! Conventions used throughout: the Fourier coefficient of `f` at
//! wavevector `k` is `(1/N^d) * sum_x f(x) exp(-i k.x)` over grid samples,
//! so `f(x) = sum_k c_k exp(i k.x)`; wavevectors are `(2*pi/L) * m` with
//! integer `m` in `[-N/2, N/2)`; all multipliers vanish at `k = 0`; and
//! velocity fields are kept mean-zero (Galilean normalization).

pub mod config;
pub mod decay;
pub mod error;
pub mod experiment;
pub mod io;
pub mod solver;
pub mod spaces;
pub mod spectral;
pub mod verify;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;

pub use spectral::{GridSpec, InitialData, SpectralField, TensorField, VectorField};
