//! Uniform periodic lattice on the torus [0,L)^d and its discrete Fourier
//! analysis.
//!
//! The torus has integer side length `L` (whole periodicity cells per axis)
//! and `M` sample points per unit cell, so each axis carries `n = L·M`
//! points with spacing `h = 1/M`. The angular frequency lattice is
//! `ξ_k = 2πk/L` for `k ∈ {−n/2, …, n/2−1}`, which makes the DFT kernel
//! `e^{−iξ_k·x_j} = e^{−2πikj/n}` exact on lattice points.
//!
//! Transform convention (unitary, angular frequency): the continuum pair is
//! `û(ξ) = (2π)^{−d/2} ∫ u e^{−iξ·x} dx`, discretized as
//! `û_k = (2π)^{−d/2} h^d · c_k` where `c_k` is the raw DFT coefficient
//! stored here. With the frequency cell `Δξ = 2π/L` this gives exact
//! discrete Parseval: `Σ|u_j|² h^d = Σ|c_k|² (h²/L)^d`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, OnceLock};
use thiserror::Error;

/// A point of the torus; for `dim == 1` only the first coordinate is used.
pub type Point = [f64; 2];

#[derive(Debug, Error)]
pub enum GridError {
    #[error("dimension must be 1 or 2, got {0}")]
    BadDim(usize),
    #[error("side length must be a positive integer, got {0}")]
    BadSideLength(usize),
    #[error("points per cell must be a power of two >= 2, got {0}")]
    BadPointsPerCell(usize),
    #[error("value buffer has length {got}, grid needs {need}")]
    LengthMismatch { got: usize, need: usize },
    #[error("values must be finite (index {0} is {1})")]
    NonFinite(usize, f64),
}

/// Fractional order α ∈ (0,2]; α = 2 selects the classical Laplacian branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self, ModelOrderError> {
        if alpha.is_finite() && alpha > 0.0 && alpha <= 2.0 {
            Ok(FracOrder(alpha))
        } else {
            Err(ModelOrderError(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Whether this order is the classical Laplacian (α = 2).
    pub fn is_classical(self) -> bool {
        self.0 == 2.0
    }
}

#[derive(Debug, Error)]
#[error("alpha must lie in (0,2], got {0}")]
pub struct ModelOrderError(pub f64);

/// Uniform periodic lattice on [0,L)^d with cached transform plans.
///
/// Cloning is cheap; plans are shared through `Arc` and are safe for
/// concurrent use.
#[derive(Clone)]
pub struct TorusGrid {
    dim: usize,
    side_length: usize,
    points_per_cell: usize,
    /// |ξ| per flattened spectral index.
    xi_norm: Arc<Vec<f64>>,
    forward_plan: Arc<dyn Fft<f64>>,
    inverse_plan: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TorusGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TorusGrid")
            .field("dim", &self.dim)
            .field("side_length", &self.side_length)
            .field("points_per_cell", &self.points_per_cell)
            .finish()
    }
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.side_length == other.side_length
            && self.points_per_cell == other.points_per_cell
    }
}

impl TorusGrid {
    pub fn new(dim: usize, side_length: usize, points_per_cell: usize) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::BadDim(dim));
        }
        if side_length == 0 {
            return Err(GridError::BadSideLength(side_length));
        }
        if points_per_cell < 2 || !points_per_cell.is_power_of_two() {
            return Err(GridError::BadPointsPerCell(points_per_cell));
        }
        let n = side_length * points_per_cell;
        let mut planner = FftPlanner::<f64>::new();
        let forward_plan = planner.plan_fft_forward(n);
        let inverse_plan = planner.plan_fft_inverse(n);

        let len = n.pow(dim as u32);
        let mut xi_norm = Vec::with_capacity(len);
        let axis: Vec<f64> = (0..n)
            .map(|i| Self::signed_index(i, n) * 2.0 * std::f64::consts::PI / side_length as f64)
            .collect();
        match dim {
            1 => xi_norm.extend(axis.iter().map(|x| x.abs())),
            _ => {
                for &x0 in &axis {
                    for &x1 in &axis {
                        xi_norm.push((x0 * x0 + x1 * x1).sqrt());
                    }
                }
            }
        }

        Ok(TorusGrid {
            dim,
            side_length,
            points_per_cell,
            xi_norm: Arc::new(xi_norm),
            forward_plan,
            inverse_plan,
        })
    }

    fn signed_index(i: usize, n: usize) -> f64 {
        if i < n / 2 {
            i as f64
        } else {
            i as f64 - n as f64
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side_length(&self) -> usize {
        self.side_length
    }

    pub fn points_per_cell(&self) -> usize {
        self.points_per_cell
    }

    /// Points per axis, n = L·M.
    pub fn points_per_axis(&self) -> usize {
        self.side_length * self.points_per_cell
    }

    /// Total number of lattice points, n^d.
    pub fn len(&self) -> usize {
        self.points_per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing h = L/(L·M) = 1/M.
    pub fn spacing(&self) -> f64 {
        1.0 / self.points_per_cell as f64
    }

    /// Quadrature cell volume h^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Parseval weight per spectral coefficient, (h²/L)^d, so that
    /// `Σ|u_j|² h^d = Σ|c_k|² · spectral_weight()`.
    pub fn spectral_weight(&self) -> f64 {
        let h = self.spacing();
        (h * h / self.side_length as f64).powi(self.dim as i32)
    }

    /// Euclidean norms |ξ| of the frequency lattice, flattened like values.
    pub fn xi_norms(&self) -> &[f64] {
        &self.xi_norm
    }

    /// Coordinates of the lattice point with flattened index `idx`.
    pub fn point(&self, idx: usize) -> Point {
        let n = self.points_per_axis();
        let h = self.spacing();
        match self.dim {
            1 => [idx as f64 * h, 0.0],
            _ => {
                let i0 = idx / n;
                let i1 = idx % n;
                [i0 as f64 * h, i1 as f64 * h]
            }
        }
    }

    /// Torus center (L/2, …), the canonical bump location.
    pub fn center(&self) -> Point {
        let c = self.side_length as f64 / 2.0;
        match self.dim {
            1 => [c, 0.0],
            _ => [c, c],
        }
    }

    /// Periodic distance from `x` to `y` on the torus (Euclidean).
    pub fn torus_distance(&self, x: Point, y: Point) -> f64 {
        let l = self.side_length as f64;
        let mut acc = 0.0;
        for ax in 0..self.dim {
            let raw = (x[ax] - y[ax]).rem_euclid(l);
            let d = raw.min(l - raw);
            acc += d * d;
        }
        acc.sqrt()
    }

    /// Raw forward DFT of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.len());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.process(&mut buf, true);
        buf
    }

    /// Inverse DFT (scaled by 1/n^d), full complex output.
    pub fn inverse_complex(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(spectrum.len(), self.len());
        let mut buf = spectrum.to_vec();
        self.process(&mut buf, false);
        let scale = 1.0 / self.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Inverse DFT, real part only.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        self.inverse_complex(spectrum)
            .iter()
            .map(|c| c.re)
            .collect()
    }

    fn process(&self, buf: &mut [Complex64], forward: bool) {
        let plan = if forward {
            &self.forward_plan
        } else {
            &self.inverse_plan
        };
        let n = self.points_per_axis();
        match self.dim {
            1 => plan.process(buf),
            _ => {
                for row in buf.chunks_exact_mut(n) {
                    plan.process(row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for j in 0..n {
                    for i in 0..n {
                        col[i] = buf[i * n + j];
                    }
                    plan.process(&mut col);
                    for i in 0..n {
                        buf[i * n + j] = col[i];
                    }
                }
            }
        }
    }
}

/// Real-valued samples on a [`TorusGrid`] with a lazily cached spectrum.
///
/// Fields are immutable after construction; all operations return new
/// fields, so values and cached spectra can be shared across workers.
#[derive(Debug, Clone)]
pub struct Field {
    grid: TorusGrid,
    values: Vec<f64>,
    spectrum: OnceLock<Arc<Vec<Complex64>>>,
}

impl Field {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                got: values.len(),
                need: grid.len(),
            });
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(GridError::NonFinite(i, v));
        }
        Ok(Field {
            grid,
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        let values = vec![0.0; grid.len()];
        Field {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Field {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    /// Reconstruct a field from raw DFT coefficients (real part of the
    /// inverse transform). The given spectrum is cached as-is.
    pub fn from_spectrum(grid: TorusGrid, spectrum: Vec<Complex64>) -> Self {
        let values = grid.inverse(&spectrum);
        let cell = OnceLock::new();
        let _ = cell.set(Arc::new(spectrum));
        Field {
            grid,
            values,
            spectrum: cell,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Raw DFT coefficients, computed on first use and cached.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum
            .get_or_init(|| Arc::new(self.grid.forward(&self.values)))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> Field {
        let scaled = self.map(|v| c * v);
        // scaling commutes with the transform; reuse a cached spectrum
        if let Some(spec) = self.spectrum.get() {
            let _ = scaled
                .spectrum
                .set(Arc::new(spec.iter().map(|z| z * c).collect()));
        }
        scaled
    }

    pub fn neg(&self) -> Field {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.zip(other, |a, b| a - b)
    }

    /// self + c · other
    pub fn axpy(&self, c: f64, other: &Field) -> Field {
        self.zip(other, |a, b| a + c * b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            spectrum: OnceLock::new(),
        }
    }

    fn zip(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            spectrum: OnceLock::new(),
        }
    }
}
