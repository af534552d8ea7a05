//! Scalar and vector fields in physical or Fourier representation.

use std::sync::Arc;

use rustfft::num_complex::Complex;

use crate::grid::Grid;

/// Scalar field sampled on the grid points, row-major nx x ny.
#[derive(Clone, Debug)]
pub struct RealField {
    grid: Arc<Grid>,
    data: Vec<f64>,
}

/// Fourier coefficients of a real scalar field (full complex nx x ny layout,
/// conjugate-symmetric whenever it came from real data).
#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<Grid>,
    data: Vec<Complex<f64>>,
}

/// Velocity-like pair of scalar fields on one grid.
#[derive(Clone)]
pub struct VectorField {
    pub x: RealField,
    pub y: RealField,
}

impl RealField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        RealField {
            grid: grid.clone(),
            data: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Arc<Grid>, value: f64) -> Self {
        RealField {
            grid: grid.clone(),
            data: vec![value; grid.len()],
        }
    }

    /// Sample `f(x, y)` at every grid point.
    pub fn from_fn(grid: &Arc<Grid>, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for ix in 0..grid.nx() {
            let x = grid.x(ix);
            for iy in 0..grid.ny() {
                data.push(f(x, grid.y(iy)));
            }
        }
        RealField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn from_vec(grid: &Arc<Grid>, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.len(), "data length does not match grid");
        RealField {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.data[self.grid.idx(ix, iy)]
    }

    pub fn to_spectral(&self) -> SpectralField {
        let mut data: Vec<Complex<f64>> = self.data.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.grid.fft2_forward(&mut data);
        SpectralField {
            grid: self.grid.clone(),
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// self + c * other, elementwise.
    pub fn add_scaled(&self, c: f64, other: &RealField) -> RealField {
        self.zip_with(other, |a, b| a + c * b)
    }

    pub fn scale(&self, c: f64) -> RealField {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: self.grid.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> RealField {
        assert_same_grid(self, other);
        RealField {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, c: f64, other: &RealField) {
        assert_same_grid(self, other);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }
}

impl SpectralField {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn data(&self) -> &[Complex<f64>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<f64>] {
        &mut self.data
    }

    pub fn to_physical(&self) -> RealField {
        let mut buf = self.data.clone();
        self.grid.fft2_inverse(&mut buf);
        RealField {
            grid: self.grid.clone(),
            data: buf.iter().map(|c| c.re).collect(),
        }
    }

    /// Apply a real multiplier `m(jx, jy)` to every mode.
    pub fn scale_modes(&self, m: impl Fn(usize, usize) -> f64) -> SpectralField {
        let ny = self.grid.ny();
        let mut data = self.data.clone();
        for jx in 0..self.grid.nx() {
            for jy in 0..ny {
                data[jx * ny + jy] *= m(jx, jy);
            }
        }
        SpectralField {
            grid: self.grid.clone(),
            data,
        }
    }
}

impl VectorField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        VectorField {
            x: RealField::zeros(grid),
            y: RealField::zeros(grid),
        }
    }

    pub fn new(x: RealField, y: RealField) -> Self {
        assert_same_grid(&x, &y);
        VectorField { x, y }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.x.grid()
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn add_scaled(&self, c: f64, other: &VectorField) -> VectorField {
        VectorField {
            x: self.x.add_scaled(c, &other.x),
            y: self.y.add_scaled(c, &other.y),
        }
    }

    pub fn scale(&self, c: f64) -> VectorField {
        VectorField {
            x: self.x.scale(c),
            y: self.y.scale(c),
        }
    }
}

/// Panic unless both fields share one discretization.
pub fn assert_same_grid(a: &RealField, b: &RealField) {
    assert!(
        a.grid.same_as(&b.grid),
        "grid mismatch: {:?} vs {:?}",
        a.grid,
        b.grid
    );
}
