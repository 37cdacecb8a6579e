//! Periodic grid, spectral transforms, derivatives, Green-function
//! convolution and low-mode projection on the unit torus.
//!
//! Conventions: the domain is `[0,1)^2` sampled on an `n x n` grid with
//! spacing `1/n`; the forward transform produces coefficients `c_k` with
//! `f(x) = sum_k c_k exp(2 pi i k.x)`, so `c_0` equals the grid average
//! and Parseval reads `(1/n^2) sum |f|^2 = sum |c_k|^2`.

use crate::error::{DkError, Result};
use ndarray::Array2;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Square periodic grid on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridConfig {
    n: usize,
}

impl GridConfig {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(DkError::Config(format!(
                "grid size must be even and >= 8, got {n}"
            )));
        }
        Ok(GridConfig { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Quadrature weight of one grid point (integrals are grid averages).
    #[inline]
    pub fn quad_weight(&self) -> f64 {
        1.0 / (self.n * self.n) as f64
    }

    /// Physical coordinates of grid node `(i, j)`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 / self.n as f64, j as f64 / self.n as f64)
    }

    /// Largest admissible mode cutoff for `project_modes` and the noise.
    #[inline]
    pub fn max_cutoff(&self) -> usize {
        self.n / 2 - 1
    }
}

/// Real scalar samples on the grid. First index is x1, second x2.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridConfig,
    data: Array2<f64>,
}

/// Two-component vector field (x1 and x2 components).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: Field,
    pub y: Field,
}

/// Complex Fourier coefficients, Hermitian-symmetric for real fields.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: GridConfig,
    data: Array2<Complex64>,
}

// Cached FFT plans per grid size; plans are immutable after construction.
struct Plans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// Signed integer wavenumber for row/column index `i` on an `n` grid.
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn transpose_square<T: Copy>(a: &mut Array2<T>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let tmp = a[[i, j]];
            a[[i, j]] = a[[j, i]];
            a[[j, i]] = tmp;
        }
    }
}

fn fft2d(data: &mut Array2<Complex64>, plan: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    for mut row in data.rows_mut() {
        plan.process_with_scratch(row.as_slice_mut().expect("contiguous row"), &mut scratch);
    }
    transpose_square(data);
    for mut row in data.rows_mut() {
        plan.process_with_scratch(row.as_slice_mut().expect("contiguous row"), &mut scratch);
    }
    transpose_square(data);
}

impl Field {
    pub fn zeros(grid: GridConfig) -> Self {
        Field {
            grid,
            data: Array2::zeros((grid.n, grid.n)),
        }
    }

    pub fn constant(grid: GridConfig, c: f64) -> Self {
        Field {
            grid,
            data: Array2::from_elem((grid.n, grid.n), c),
        }
    }

    /// Build a field from a function of torus coordinates.
    pub fn from_fn(grid: GridConfig, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n;
        let data = Array2::from_shape_fn((n, n), |(i, j)| {
            let (x, y) = grid.point(i, j);
            f(x, y)
        });
        Field { grid, data }
    }

    pub fn from_array(grid: GridConfig, data: Array2<f64>) -> Result<Self> {
        if data.dim() != (grid.n, grid.n) {
            return Err(DkError::Config(format!(
                "array shape {:?} does not match grid {}",
                data.dim(),
                grid.n
            )));
        }
        Ok(Field { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    #[inline]
    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut Array2<f64> {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            return Ok(());
        }
        let mut indices = Vec::new();
        for ((i, j), v) in self.data.indexed_iter() {
            if !v.is_finite() {
                indices.push((i, j));
                if indices.len() >= 8 {
                    return Err(DkError::NonFinite {
                        indices,
                        truncated: true,
                    });
                }
            }
        }
        Err(DkError::NonFinite {
            indices,
            truncated: false,
        })
    }

    /// Forward transform; rejects non-finite input naming the offending indices.
    pub fn to_spectral(&self) -> Result<SpectralField> {
        self.check_finite()?;
        Ok(self.to_spectral_unchecked())
    }

    pub(crate) fn to_spectral_unchecked(&self) -> SpectralField {
        let n = self.grid.n;
        let mut data = self.data.mapv(|v| Complex64::new(v, 0.0));
        fft2d(&mut data, &plans(n).fwd);
        let scale = 1.0 / (n * n) as f64;
        data.mapv_inplace(|c| c * scale);
        SpectralField {
            grid: self.grid,
            data,
        }
    }

    /// Grid average (equals the integral over the unit torus).
    pub fn mean(&self) -> f64 {
        self.data.sum() * self.grid.quad_weight()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// L2 norm with the torus-average measure.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.quad_weight()).sqrt()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        (self
            .data
            .iter()
            .map(|v| v.abs().powf(p))
            .sum::<f64>()
            * self.grid.quad_weight())
        .powf(1.0 / p)
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum::<f64>() * self.grid.quad_weight()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Torus-average inner product.
    pub fn inner(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.quad_weight()
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: self.grid,
            data: &self.data * a,
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Field {
            grid: self.grid,
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Field {
            grid: self.grid,
            data: &self.data - &other.data,
        }
    }

    /// Pointwise product on the grid.
    pub fn mul(&self, other: &Field) -> Field {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        Field {
            grid: self.grid,
            data: &self.data * &other.data,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            data: self.data.mapv(&f),
        }
    }
}

impl VectorField {
    pub fn zeros(grid: GridConfig) -> Self {
        VectorField {
            x: Field::zeros(grid),
            y: Field::zeros(grid),
        }
    }

    pub fn from_fns(
        grid: GridConfig,
        fx: impl Fn(f64, f64) -> f64,
        fy: impl Fn(f64, f64) -> f64,
    ) -> Self {
        VectorField {
            x: Field::from_fn(grid, fx),
            y: Field::from_fn(grid, fy),
        }
    }

    #[inline]
    pub fn grid(&self) -> GridConfig {
        self.x.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            x: self.x.add(&other.x),
            y: self.y.add(&other.y),
        }
    }

    pub fn scaled(&self, a: f64) -> VectorField {
        VectorField {
            x: self.x.scaled(a),
            y: self.y.scaled(a),
        }
    }

    /// Pointwise scaling of both components by a scalar field.
    pub fn mul_scalar_field(&self, s: &Field) -> VectorField {
        VectorField {
            x: self.x.mul(s),
            y: self.y.mul(s),
        }
    }

    /// L2(L2) norm of the 2-vector field.
    pub fn l2_norm(&self) -> f64 {
        let gx = self.x.l2_norm();
        let gy = self.y.l2_norm();
        (gx * gx + gy * gy).sqrt()
    }
}

impl SpectralField {
    pub fn zeros(grid: GridConfig) -> Self {
        SpectralField {
            grid,
            data: Array2::zeros((grid.n, grid.n)),
        }
    }

    #[inline]
    pub fn grid(&self) -> GridConfig {
        self.grid
    }

    #[inline]
    pub fn data(&self) -> &Array2<Complex64> {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.data
    }

    /// Coefficient at signed mode `(kx, ky)`.
    pub fn coeff(&self, kx: i64, ky: i64) -> Complex64 {
        let n = self.grid.n as i64;
        let i = kx.rem_euclid(n) as usize;
        let j = ky.rem_euclid(n) as usize;
        self.data[[i, j]]
    }

    pub fn coeff_mut(&mut self, kx: i64, ky: i64) -> &mut Complex64 {
        let n = self.grid.n as i64;
        let i = kx.rem_euclid(n) as usize;
        let j = ky.rem_euclid(n) as usize;
        &mut self.data[[i, j]]
    }

    /// Mean mode (equals the spatial average of the field).
    pub fn mean_mode(&self) -> Complex64 {
        self.data[[0, 0]]
    }

    /// Inverse transform back to grid samples (real part).
    pub fn to_field(&self) -> Field {
        let n = self.grid.n;
        let mut data = self.data.clone();
        fft2d(&mut data, &plans(n).inv);
        Field {
            grid: self.grid,
            data: data.mapv(|c| c.re),
        }
    }

    /// Coefficient l2 norm; equals the grid L2 norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Map coefficients by a function of the signed wavenumber.
    pub fn map_modes(&self, f: impl Fn(i64, i64, Complex64) -> Complex64) -> SpectralField {
        let n = self.grid.n;
        let mut out = SpectralField::zeros(self.grid);
        for i in 0..n {
            let kx = wavenumber(i, n);
            for j in 0..n {
                let ky = wavenumber(j, n);
                out.data[[i, j]] = f(kx, ky, self.data[[i, j]]);
            }
        }
        out
    }

    pub fn map_modes_inplace(&mut self, f: impl Fn(i64, i64, Complex64) -> Complex64) {
        let n = self.grid.n;
        for i in 0..n {
            let kx = wavenumber(i, n);
            for j in 0..n {
                let ky = wavenumber(j, n);
                self.data[[i, j]] = f(kx, ky, self.data[[i, j]]);
            }
        }
    }

    /// Spectral partial derivatives. The Nyquist modes are zeroed, as is
    /// standard for odd-order derivatives on an even grid.
    pub fn derivative_x(&self) -> SpectralField {
        let n = self.grid.n as i64;
        self.map_modes(|kx, _, c| {
            if kx.abs() * 2 == n {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, 2.0 * std::f64::consts::PI * kx as f64) * c
            }
        })
    }

    pub fn derivative_y(&self) -> SpectralField {
        let n = self.grid.n as i64;
        self.map_modes(|_, ky, c| {
            if ky.abs() * 2 == n {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, 2.0 * std::f64::consts::PI * ky as f64) * c
            }
        })
    }

    /// Spectral Laplacian multiplier `-4 pi^2 |k|^2`.
    pub fn laplacian(&self) -> SpectralField {
        let pi2 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
        self.map_modes(|kx, ky, c| c * (-pi2 * (kx * kx + ky * ky) as f64))
    }

    /// Zero every coefficient with |k| > cutoff (Euclidean norm); idempotent.
    pub fn truncate(&mut self, cutoff: usize) {
        let c2 = (cutoff * cutoff) as i64;
        self.map_modes_inplace(|kx, ky, c| {
            if kx * kx + ky * ky > c2 {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        });
    }

    /// 2/3-rule dealiasing: zero modes with max(|k1|,|k2|) > n/3.
    pub fn dealias(&mut self) {
        let lim = (self.grid.n / 3) as i64;
        self.map_modes_inplace(|kx, ky, c| {
            if kx.abs() > lim || ky.abs() > lim {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        });
    }
}

/// Forward-then-inverse transform; exact up to rounding on any finite field.
pub fn transform_roundtrip(f: &Field) -> Result<Field> {
    Ok(f.to_spectral()?.to_field())
}

/// Spectral gradient; exact on band-limited fields.
pub fn gradient(f: &Field) -> Result<VectorField> {
    let spec = f.to_spectral()?;
    Ok(VectorField {
        x: spec.derivative_x().to_field(),
        y: spec.derivative_y().to_field(),
    })
}

/// Spectral divergence; the output has exactly zero mean mode.
pub fn divergence(v: &VectorField) -> Result<Field> {
    let sx = v.x.to_spectral()?;
    let sy = v.y.to_spectral()?;
    Ok(divergence_spec(&sx, &sy).to_field())
}

pub(crate) fn divergence_spec(sx: &SpectralField, sy: &SpectralField) -> SpectralField {
    let n = sx.grid.n as i64;
    let tau = 2.0 * std::f64::consts::PI;
    let mut out = SpectralField::zeros(sx.grid);
    for i in 0..sx.grid.n {
        let kx = wavenumber(i, sx.grid.n);
        for j in 0..sx.grid.n {
            let ky = wavenumber(j, sx.grid.n);
            let dx = if kx.abs() * 2 == n {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, tau * kx as f64) * sx.data[[i, j]]
            };
            let dy = if ky.abs() * 2 == n {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, tau * ky as f64) * sy.data[[i, j]]
            };
            out.data[[i, j]] = dx + dy;
        }
    }
    out
}

/// Solve `-Lap u = f - mean(f)` for the unique mean-zero `u`.
///
/// Spectrally `u_k = f_k / (4 pi^2 |k|^2)` for `k != 0`. An optional
/// Gaussian damping `exp(-gamma^2 4 pi^2 |k|^2)` mollifies the kernel;
/// the production path uses `gamma = 0`.
pub fn green_convolve_damped(f: &Field, gamma: f64) -> Result<Field> {
    let spec = f.to_spectral()?;
    Ok(green_convolve_spec(&spec, gamma).to_field())
}

pub fn green_convolve(f: &Field) -> Result<Field> {
    green_convolve_damped(f, 0.0)
}

pub(crate) fn green_convolve_spec(spec: &SpectralField, gamma: f64) -> SpectralField {
    let pi2 = 4.0 * std::f64::consts::PI * std::f64::consts::PI;
    spec.map_modes(|kx, ky, c| {
        let k2 = (kx * kx + ky * ky) as f64;
        if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let damp = if gamma > 0.0 {
                (-gamma * gamma * pi2 * k2).exp()
            } else {
                1.0
            };
            c * (damp / (pi2 * k2))
        }
    })
}

/// Orthogonal projection onto modes |k| <= cutoff.
pub fn project_modes(f: &Field, cutoff: usize) -> Result<Field> {
    let grid = f.grid();
    if cutoff > grid.max_cutoff() {
        return Err(DkError::Config(format!(
            "cutoff K = {cutoff} too large for grid n = {}; K <= n/2 - 1 required",
            grid.n()
        )));
    }
    let mut spec = f.to_spectral()?;
    spec.truncate(cutoff);
    Ok(spec.to_field())
}

/// Spectral Laplacian of a field.
pub fn laplacian(f: &Field) -> Result<Field> {
    Ok(f.to_spectral()?.laplacian().to_field())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> GridConfig {
        GridConfig::new(n).unwrap()
    }

    /// Direct O(n^4) DFT used as an independent oracle.
    fn dft_oracle(f: &Field) -> Vec<((i64, i64), Complex64)> {
        let n = f.grid().n();
        let mut out = Vec::new();
        for ki in 0..n {
            let kx = wavenumber(ki, n);
            for kj in 0..n {
                let ky = wavenumber(kj, n);
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        let (x, y) = f.grid().point(i, j);
                        let phase = -2.0 * PI * (kx as f64 * x + ky as f64 * y);
                        acc += Complex64::new(phase.cos(), phase.sin()) * f.data()[[i, j]];
                    }
                }
                out.push(((kx, ky), acc / (n * n) as f64));
            }
        }
        out
    }

    fn random_band_limited(g: GridConfig, max_mode: i64, seed: u64) -> Field {
        // small deterministic LCG so the test needs no rng dependency here
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut modes = Vec::new();
        for kx in -max_mode..=max_mode {
            for ky in -max_mode..=max_mode {
                if kx == 0 && ky == 0 {
                    continue;
                }
                modes.push((kx as f64, ky as f64, next(), next()));
            }
        }
        Field::from_fn(g, |x, y| {
            let mut v = 1.0;
            for &(kx, ky, a, b) in &modes {
                let ph = 2.0 * PI * (kx * x + ky * y);
                v += a * ph.cos() + b * ph.sin();
            }
            v
        })
    }

    #[test]
    fn roundtrip_constant_field() {
        let g = grid(16);
        let f = Field::constant(g, 1.0);
        let spec = f.to_spectral().unwrap();
        assert!((spec.mean_mode().re - 1.0).abs() < 1e-14);
        assert!(spec.mean_mode().im.abs() < 1e-14);
        let back = transform_roundtrip(&f).unwrap();
        assert!(back.sub(&f).max_abs() < 1e-13);
    }

    #[test]
    fn roundtrip_single_mode() {
        let g = grid(16);
        let f = Field::from_fn(g, |x, _| (2.0 * PI * x).cos());
        let back = transform_roundtrip(&f).unwrap();
        assert!(back.sub(&f).max_abs() <= 1e-12);
    }

    #[test]
    fn roundtrip_random_band_limited_with_dft_oracle() {
        // roundtrip at n = 64
        let g = grid(64);
        let f = random_band_limited(g, 5, 7);
        let back = transform_roundtrip(&f).unwrap();
        let rel = back.sub(&f).max_abs() / f.max_abs();
        assert!(rel <= 1e-12, "roundtrip rel error {rel:.3e}");

        // forward coefficients checked against the direct DFT at n = 8
        let g8 = grid(8);
        let f8 = random_band_limited(g8, 2, 3);
        let spec = f8.to_spectral().unwrap();
        for ((kx, ky), want) in dft_oracle(&f8) {
            let got = spec.coeff(kx, ky);
            assert!(
                (got - want).norm() < 1e-12,
                "mode ({kx},{ky}): got {got}, dft {want}"
            );
        }
    }

    #[test]
    fn rejects_non_finite_with_indices() {
        let g = grid(8);
        let mut f = Field::zeros(g);
        f.data_mut()[[2, 5]] = f64::NAN;
        match f.to_spectral() {
            Err(DkError::NonFinite { indices, .. }) => assert_eq!(indices, vec![(2, 5)]),
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn gradient_single_mode() {
        let g = grid(32);
        let f = Field::from_fn(g, |x, _| (2.0 * PI * x).cos());
        let grad = gradient(&f).unwrap();
        let want_x = Field::from_fn(g, |x, _| -2.0 * PI * (2.0 * PI * x).sin());
        assert!(grad.x.sub(&want_x).max_abs() < 1e-10);
        assert!(grad.y.max_abs() < 1e-12);
    }

    #[test]
    fn gradient_constant_is_zero() {
        let g = grid(8);
        let grad = gradient(&Field::constant(g, 3.5)).unwrap();
        assert!(grad.x.max_abs() < 1e-13);
        assert!(grad.y.max_abs() < 1e-13);
    }

    #[test]
    fn gradient_two_mode_symbolic_oracle() {
        let g = grid(32);
        let f = Field::from_fn(g, |x, y| (2.0 * PI * x).sin() * (4.0 * PI * y).cos());
        let grad = gradient(&f).unwrap();
        // symbolic: d/dx = 2pi cos(2pi x) cos(4pi y), d/dy = -4pi sin(2pi x) sin(4pi y)
        let wx = Field::from_fn(g, |x, y| 2.0 * PI * (2.0 * PI * x).cos() * (4.0 * PI * y).cos());
        let wy = Field::from_fn(g, |x, y| {
            -4.0 * PI * (2.0 * PI * x).sin() * (4.0 * PI * y).sin()
        });
        assert!(grad.x.sub(&wx).max_abs() <= 1e-10);
        assert!(grad.y.sub(&wy).max_abs() <= 1e-10);
    }

    #[test]
    fn divergence_single_mode_and_zero_mean() {
        let g = grid(32);
        let v = VectorField::from_fns(g, |x, _| (2.0 * PI * x).sin(), |_, _| 0.0);
        let div = divergence(&v).unwrap();
        let want = Field::from_fn(g, |x, _| 2.0 * PI * (2.0 * PI * x).cos());
        assert!(div.sub(&want).max_abs() < 1e-10);

        let w = VectorField::from_fns(
            g,
            |x, y| (2.0 * PI * x).cos() * y.sin(),
            |x, y| (x + y).cos(),
        );
        let divw = divergence(&w).unwrap();
        assert!(divw.mean().abs() < 1e-14, "divergence mean must vanish");
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let g = grid(32);
        let f = random_band_limited(g, 4, 11);
        let lhs = divergence(&gradient(&f).unwrap()).unwrap();
        let rhs = laplacian(&f).unwrap();
        assert!(lhs.sub(&rhs).max_abs() <= 1e-10 * f.max_abs().max(1.0));
    }

    #[test]
    fn green_eigenfunction() {
        let g = grid(32);
        let f = Field::from_fn(g, |x, _| (2.0 * PI * x).cos());
        let u = green_convolve(&f).unwrap();
        let c = 1.0 / (4.0 * PI * PI);
        let want = f.scaled(c);
        assert!(u.sub(&want).max_abs() < 1e-12);
        assert!((c - 0.025330).abs() < 1e-6);
    }

    #[test]
    fn green_constant_is_zero_and_mean_free() {
        let g = grid(16);
        let u = green_convolve(&Field::constant(g, 2.0)).unwrap();
        assert!(u.max_abs() < 1e-14);

        let f = random_band_limited(g, 3, 5);
        let uf = green_convolve(&f).unwrap();
        assert!(uf.mean().abs() < 1e-14);
    }

    #[test]
    fn green_inverse_laplacian_identity() {
        let g = grid(64);
        let f = random_band_limited(g, 6, 13);
        let u = green_convolve(&f).unwrap();
        let lhs = laplacian(&u).unwrap().scaled(-1.0);
        let want = f.map({
            let m = f.mean();
            move |v| v - m
        });
        assert!(lhs.sub(&want).max_abs() <= 1e-10);
    }

    #[test]
    fn project_modes_behaviour() {
        let g = grid(16);
        // field with only |k| <= 2 is unchanged
        let f = Field::from_fn(g, |x, y| 1.0 + (2.0 * PI * x).cos() + (4.0 * PI * y).sin());
        let p = project_modes(&f, 2).unwrap();
        assert!(p.sub(&f).max_abs() < 1e-12);

        // a single high mode dies
        let h = Field::from_fn(g, |x, _| (2.0 * PI * 3.0 * x).cos());
        let ph = project_modes(&h, 2).unwrap();
        assert!(ph.max_abs() < 1e-12);

        // idempotence, exactly at coefficient level
        let r = random_band_limited(g, 5, 2);
        let once = project_modes(&r, 3).unwrap();
        let twice = project_modes(&once, 3).unwrap();
        assert!(twice.sub(&once).max_abs() < 1e-13);

        // K out of range is a configuration error
        assert!(project_modes(&f, 8).is_err());
    }

    #[test]
    fn projection_is_l2_orthogonal() {
        let g = grid(32);
        let f = random_band_limited(g, 6, 17);
        let h = random_band_limited(g, 6, 23);
        let pf = project_modes(&f, 4).unwrap();
        let ph = project_modes(&h, 4).unwrap();
        let a = pf.inner(&h);
        let b = f.inner(&ph);
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn parseval_across_sizes() {
        for n in [8usize, 16, 32, 64] {
            let g = grid(n);
            let f = random_band_limited(g, (n as i64 / 4).min(5), n as u64);
            let grid_norm = f.l2_norm();
            let coef_norm = f.to_spectral().unwrap().l2_norm();
            let rel = (grid_norm - coef_norm).abs() / grid_norm;
            assert!(rel <= 1e-12, "n={n}: Parseval rel error {rel:.3e}");
        }
    }
}
