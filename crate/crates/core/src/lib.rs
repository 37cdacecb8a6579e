//! # dklab
//!
//! Pseudo-spectral simulation and analysis toolkit for conservative
//! square-root-noise dynamics on the unit 2-torus, with Biot–Savart and
//! Keller–Segel interactions, plus a small-noise large-deviations
//! laboratory: skeleton-equation solving, rate-function evaluation,
//! Girsanov-tilted importance sampling, and Monte-Carlo estimation of
//! decay rates.
//!
//! The numerical substrate is a Fourier collocation method on `[0,1)^2`
//! with basis `e_k(x) = exp(2*pi*i k.x)`, so `-Lap e_k = 4 pi^2 |k|^2 e_k`
//! and the zero mode carries the spatial average.

pub mod config;
pub mod error;
pub mod functionals;
pub mod interaction;
pub mod ldp;
pub mod noise;
pub mod run;
pub mod skeleton;
pub mod snapshot;
pub mod solver;
pub mod spectral;

pub use error::{DkError, Result};
pub use spectral::{Field, GridConfig, SpectralField, VectorField};
