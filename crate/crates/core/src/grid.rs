//! Uniform periodic 2D grid with Fourier transform plans and wavenumbers.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::Error;
use crate::Result;

/// Uniform grid on the periodic rectangle [0, lx) x [0, ly).
///
/// Point (ix, iy) sits at (ix*lx/nx, iy*ly/ny); fields are stored row-major
/// as nx rows of ny values, index `ix * ny + iy`. The grid owns the FFT plans
/// so that every field sharing it transforms without replanning. Plans are
/// immutable after creation, so one grid may be used from several threads.
pub struct Grid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    /// Wavenumbers 2π·freq/l in standard FFT ordering (0, 1, ..., -2, -1).
    kx: Vec<f64>,
    ky: Vec<f64>,
    /// Derivative wavenumbers: same as `kx`/`ky` but with the Nyquist mode
    /// zeroed. All differential operators use these, which keeps odd-order
    /// derivatives real-valued and makes div∘grad equal the Laplacian exactly.
    kx_d: Vec<f64>,
    ky_d: Vec<f64>,
    fft_x: Arc<dyn Fft<f64>>,
    ifft_x: Arc<dyn Fft<f64>>,
    fft_y: Arc<dyn Fft<f64>>,
    ifft_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .finish()
    }
}

fn wavenumbers(n: usize, l: f64) -> (Vec<f64>, Vec<f64>) {
    let mut k = vec![0.0; n];
    let mut k_d = vec![0.0; n];
    for (j, slot) in k.iter_mut().enumerate() {
        let freq = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        *slot = 2.0 * PI * freq / l;
        k_d[j] = if j == n / 2 { 0.0 } else { *slot };
    }
    (k, k_d)
}

impl Grid {
    /// Build a grid with `nx x ny` points on `[0, lx) x [0, ly)`.
    ///
    /// Sizes must be even and at least 8 so the FFT frequency layout has a
    /// well-defined Nyquist mode and the shortest resolved wave is meaningful.
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Arc<Grid>> {
        if nx < 8 || ny < 8 {
            return Err(Error::InvalidGrid(format!(
                "grid {nx}x{ny} too small, need at least 8x8"
            )));
        }
        if nx % 2 != 0 || ny % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "grid {nx}x{ny} must have even dimensions"
            )));
        }
        if !(lx > 0.0) || !(ly > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain lengths must be positive, got {lx} x {ly}"
            )));
        }
        let (kx, kx_d) = wavenumbers(nx, lx);
        let (ky, ky_d) = wavenumbers(ny, ly);
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Grid {
            nx,
            ny,
            lx,
            ly,
            kx,
            ky,
            kx_d,
            ky_d,
            fft_x: planner.plan_fft_forward(nx),
            ifft_x: planner.plan_fft_inverse(nx),
            fft_y: planner.plan_fft_forward(ny),
            ifft_y: planner.plan_fft_inverse(ny),
        }))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Domain area |Ω| = lx·ly.
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    /// Quadrature weight of one grid cell.
    pub fn cell_area(&self) -> f64 {
        self.lx * self.ly / (self.nx * self.ny) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        ix as f64 * self.lx / self.nx as f64
    }

    pub fn y(&self, iy: usize) -> f64 {
        iy as f64 * self.ly / self.ny as f64
    }

    /// Flat index of point (ix, iy).
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        ix * self.ny + iy
    }

    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    /// x-wavenumbers used by differential operators (Nyquist zeroed).
    pub fn kx_deriv(&self) -> &[f64] {
        &self.kx_d
    }

    /// y-wavenumbers used by differential operators (Nyquist zeroed).
    pub fn ky_deriv(&self) -> &[f64] {
        &self.ky_d
    }

    /// Symbol of -Δ at mode (jx, jy) as used by the operators and solvers.
    #[inline]
    pub fn k_squared(&self, jx: usize, jy: usize) -> f64 {
        self.kx_d[jx] * self.kx_d[jx] + self.ky_d[jy] * self.ky_d[jy]
    }

    /// True if `other` describes the same discretization.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }

    /// Forward 2D FFT of `data` in place (row-major nx x ny).
    pub(crate) fn fft2_forward(&self, data: &mut [Complex<f64>]) {
        self.fft2(data, &self.fft_x, &self.fft_y);
    }

    /// Inverse 2D FFT of `data` in place, including the 1/(nx·ny) scaling.
    pub(crate) fn fft2_inverse(&self, data: &mut [Complex<f64>]) {
        self.fft2(data, &self.ifft_x, &self.ifft_y);
        let scale = 1.0 / (self.nx * self.ny) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn fft2(&self, data: &mut [Complex<f64>], plan_x: &Arc<dyn Fft<f64>>, plan_y: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer does not match grid");
        // y direction: rows are contiguous.
        let mut scratch = vec![Complex::default(); plan_y.get_inplace_scratch_len()];
        for row in data.chunks_exact_mut(self.ny) {
            plan_y.process_with_scratch(row, &mut scratch);
        }
        // x direction: gather strided columns.
        let mut col = vec![Complex::default(); self.nx];
        let mut scratch = vec![Complex::default(); plan_x.get_inplace_scratch_len()];
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                col[ix] = data[ix * self.ny + iy];
            }
            plan_x.process_with_scratch(&mut col, &mut scratch);
            for ix in 0..self.nx {
                data[ix * self.ny + iy] = col[ix];
            }
        }
    }
}
