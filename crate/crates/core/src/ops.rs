//! Spectral differential operators, quadrature, and pseudo-spectral products.
//!
//! Derivatives multiply by the grid's Nyquist-zeroed wavenumbers, so
//! `divergence(gradient(f))` equals `laplacian(f)` exactly and the pairing
//! (∇·(Vf), g) = -(f∇g, V) holds to roundoff for any V. Nonlinear terms are
//! plain physical-space products (no dealiasing unless [`dealias_23`] is
//! applied explicitly).

use crate::field::{assert_same_grid, RealField, VectorField};

/// ∂f/∂x via ik_x in Fourier space.
pub fn deriv_x(f: &RealField) -> RealField {
    let grid = f.grid().clone();
    let mut s = f.to_spectral();
    let (nx, ny) = (grid.nx(), grid.ny());
    let kx = grid.kx_deriv();
    for jx in 0..nx {
        let k = kx[jx];
        for jy in 0..ny {
            let c = s.data()[jx * ny + jy];
            s.data_mut()[jx * ny + jy] = rustfft::num_complex::Complex::new(-k * c.im, k * c.re);
        }
    }
    s.to_physical()
}

/// ∂f/∂y via ik_y in Fourier space.
pub fn deriv_y(f: &RealField) -> RealField {
    let grid = f.grid().clone();
    let mut s = f.to_spectral();
    let (nx, ny) = (grid.nx(), grid.ny());
    let ky = grid.ky_deriv();
    for jx in 0..nx {
        for jy in 0..ny {
            let k = ky[jy];
            let c = s.data()[jx * ny + jy];
            s.data_mut()[jx * ny + jy] = rustfft::num_complex::Complex::new(-k * c.im, k * c.re);
        }
    }
    s.to_physical()
}

/// ∇f = (∂x f, ∂y f).
pub fn gradient(f: &RealField) -> VectorField {
    VectorField::new(deriv_x(f), deriv_y(f))
}

/// ∇·V = ∂x Vx + ∂y Vy.
pub fn divergence(v: &VectorField) -> RealField {
    deriv_x(&v.x).zip_with(&deriv_y(&v.y), |a, b| a + b)
}

/// Δf, with the same modified wavenumbers as the first derivatives.
pub fn laplacian(f: &RealField) -> RealField {
    let grid = f.grid().clone();
    f.to_spectral()
        .scale_modes(|jx, jy| -grid.k_squared(jx, jy))
        .to_physical()
}

/// Δ applied to both components.
pub fn laplacian_vec(v: &VectorField) -> VectorField {
    VectorField::new(laplacian(&v.x), laplacian(&v.y))
}

/// Conservative advection ∇·(V f): products in physical space, divergence spectral.
pub fn advect_scalar(v: &VectorField, f: &RealField) -> RealField {
    assert_same_grid(&v.x, f);
    let uf = v.x.zip_with(f, |a, b| a * b);
    let vf = v.y.zip_with(f, |a, b| a * b);
    divergence(&VectorField::new(uf, vf))
}

/// Convective derivative V·∇V, componentwise.
pub fn convect(v: &VectorField) -> VectorField {
    let ux = deriv_x(&v.x);
    let uy = deriv_y(&v.x);
    let vx = deriv_x(&v.y);
    let vy = deriv_y(&v.y);
    let cx = v.x.zip_with(&ux, |a, b| a * b).zip_with(&v.y.zip_with(&uy, |a, b| a * b), |a, b| a + b);
    let cy = v.x.zip_with(&vx, |a, b| a * b).zip_with(&v.y.zip_with(&vy, |a, b| a * b), |a, b| a + b);
    VectorField::new(cx, cy)
}

/// Zero all modes with |freq| > n/3 in either direction (2/3-rule truncation).
pub fn dealias_23(f: &RealField) -> RealField {
    let grid = f.grid().clone();
    let (nx, ny) = (grid.nx(), grid.ny());
    let keep = |j: usize, n: usize| {
        let fr = if j <= n / 2 { j } else { n - j };
        3 * fr <= n
    };
    f.to_spectral()
        .scale_modes(|jx, jy| {
            if keep(jx, nx) && keep(jy, ny) {
                1.0
            } else {
                0.0
            }
        })
        .to_physical()
}

/// ∫_Ω f dx by the uniform quadrature the FFT grid implies
/// (exact for band-limited integrands).
pub fn integral(f: &RealField) -> f64 {
    f.data().iter().sum::<f64>() * f.grid().cell_area()
}

/// Mean value of f over the domain.
pub fn mean(f: &RealField) -> f64 {
    integral(f) / f.grid().area()
}

/// L2 inner product (f, g) = ∫ f g dx.
pub fn l2_inner(f: &RealField, g: &RealField) -> f64 {
    assert_same_grid(f, g);
    let dot: f64 = f.data().iter().zip(g.data()).map(|(a, b)| a * b).sum();
    dot * f.grid().cell_area()
}

/// ‖f‖² = (f, f).
pub fn l2_norm_sq(f: &RealField) -> f64 {
    l2_inner(f, f)
}

/// Vector L2 inner product: sum of componentwise inner products.
pub fn l2_inner_vec(a: &VectorField, b: &VectorField) -> f64 {
    l2_inner(&a.x, &b.x) + l2_inner(&a.y, &b.y)
}

/// ‖V‖² over both components.
pub fn l2_norm_sq_vec(v: &VectorField) -> f64 {
    l2_inner_vec(v, v)
}

/// Max-norm ‖f‖∞.
pub fn linf_norm(f: &RealField) -> f64 {
    f.max_abs()
}
