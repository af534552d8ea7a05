//! G-norm machinery for the two-step θ-weighted stencil.
//!
//! The 2x2 matrix G couples two consecutive time levels so that testing the
//! stencil (2θ+1)/2·wⁿ⁺¹ - 2θ·wⁿ + (2θ-1)/2·wⁿ⁻¹ against the θ-weighted
//! average telescopes: the paired-level G-norm decreases up to a non-negative
//! curvature term. This identity is what turns the scheme's algebra into a
//! discrete energy law. At θ = 1/2 the G-norm collapses to the plain L² norm
//! of the newer level; at θ = 1 it is the classical BDF2 G-matrix.

use crate::field::{RealField, VectorField};
use crate::ops::{l2_inner, l2_inner_vec, l2_norm_sq, l2_norm_sq_vec};

/// Entries of the symmetric stability matrix for a given θ ∈ [1/2, 1].
#[derive(Clone, Copy, Debug)]
pub struct GMatrix {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl GMatrix {
    pub fn new(theta: f64) -> GMatrix {
        assert!(
            (0.5..=1.0).contains(&theta),
            "theta must lie in [1/2, 1], got {theta}"
        );
        GMatrix {
            g11: theta * (2.0 * theta + 3.0) / 2.0,
            g12: -(theta + 1.0) * (2.0 * theta - 1.0) / 2.0,
            g22: theta * (2.0 * theta - 1.0) / 2.0,
        }
    }

    /// Quadratic form [w v] G [w v]ᵀ for scalars.
    pub fn quadratic(&self, w: f64, v: f64) -> f64 {
        self.g11 * w * w + self.g22 * v * v + 2.0 * self.g12 * w * v
    }
}

/// ‖(w, v)‖²_G for scalar fields.
pub fn g_norm_pair(w: &RealField, v: &RealField, theta: f64) -> f64 {
    let g = GMatrix::new(theta);
    g.g11 * l2_norm_sq(w) + g.g22 * l2_norm_sq(v) + 2.0 * g.g12 * l2_inner(w, v)
}

/// ‖(W, V)‖²_G for vector fields (componentwise L² inner products).
pub fn g_norm_pair_vec(w: &VectorField, v: &VectorField, theta: f64) -> f64 {
    let g = GMatrix::new(theta);
    g.g11 * l2_norm_sq_vec(w) + g.g22 * l2_norm_sq_vec(v) + 2.0 * g.g12 * l2_inner_vec(w, v)
}

/// |(w, v)|²_G for plain scalars.
pub fn g_quadratic_pair(w: f64, v: f64, theta: f64) -> f64 {
    GMatrix::new(theta).quadratic(w, v)
}

/// Stencil coefficients ((2θ+1)/2, 2θ, (2θ-1)/2) of the two-step scheme.
pub fn stencil_weights(theta: f64) -> (f64, f64, f64) {
    (
        (2.0 * theta + 1.0) / 2.0,
        2.0 * theta,
        (2.0 * theta - 1.0) / 2.0,
    )
}

/// Both sides of the telescoping identity for a field triple
/// (wⁿ⁺¹, wⁿ, wⁿ⁻¹); they agree to roundoff for any inputs.
pub fn stencil_identity_fields(
    w2: &RealField,
    w1: &RealField,
    w0: &RealField,
    theta: f64,
) -> (f64, f64) {
    let (c2, c1, c0) = stencil_weights(theta);
    let stencil = w2.scale(c2).add_scaled(-c1, w1).add_scaled(c0, w0);
    let avg = w2.scale(theta).add_scaled(1.0 - theta, w1);
    let lhs = l2_inner(&stencil, &avg);
    let curv = w2.add_scaled(-2.0, w1).add_scaled(1.0, w0);
    let rhs = 0.5 * g_norm_pair(w2, w1, theta) - 0.5 * g_norm_pair(w1, w0, theta)
        + theta * (2.0 * theta - 1.0) / 4.0 * l2_norm_sq(&curv);
    (lhs, rhs)
}

/// Scalar version of [`stencil_identity_fields`].
pub fn stencil_identity_scalars(w2: f64, w1: f64, w0: f64, theta: f64) -> (f64, f64) {
    let (c2, c1, c0) = stencil_weights(theta);
    let lhs = (c2 * w2 - c1 * w1 + c0 * w0) * (theta * w2 + (1.0 - theta) * w1);
    let curv = w2 - 2.0 * w1 + w0;
    let rhs = 0.5 * g_quadratic_pair(w2, w1, theta) - 0.5 * g_quadratic_pair(w1, w0, theta)
        + theta * (2.0 * theta - 1.0) / 4.0 * curv * curv;
    (lhs, rhs)
}
