//! Time-discretization stencil shared by every subsystem solve.
//!
//! The interior scheme uses the two-step θ-weighted stencil
//! ((2θ+1)/2·wⁿ⁺¹ - 2θ·wⁿ + (2θ-1)/2·wⁿ⁻¹)/Δt with star extrapolation
//! (1+θ)·wⁿ - θ·wⁿ⁻¹ for explicit terms. The start-up step solves a
//! first-order system with the same split strategy; it is the same stencil
//! with weights (1, 1, 0) and star values frozen at level n. Bundling the
//! weights here lets one solve pipeline serve both.

use crate::field::{RealField, VectorField};

/// Stencil and extrapolation weights for one time step of size `dt`.
#[derive(Clone, Copy, Debug)]
pub struct TimeStencil {
    pub theta: f64,
    pub dt: f64,
    /// Weight of the new level in the difference quotient.
    pub c_new: f64,
    /// Weight of the current level.
    pub c_cur: f64,
    /// Weight of the previous level.
    pub c_old: f64,
    /// Star-extrapolation weight of the current level.
    pub s_cur: f64,
    /// Star-extrapolation weight of the previous level.
    pub s_old: f64,
}

impl TimeStencil {
    /// The two-step θ-weighted scheme, θ ∈ [1/2, 1].
    pub fn second_order(theta: f64, dt: f64) -> TimeStencil {
        assert!(
            (0.5..=1.0).contains(&theta),
            "theta must lie in [1/2, 1], got {theta}"
        );
        assert!(dt > 0.0, "dt must be positive");
        TimeStencil {
            theta,
            dt,
            c_new: (2.0 * theta + 1.0) / 2.0,
            c_cur: 2.0 * theta,
            c_old: (2.0 * theta - 1.0) / 2.0,
            s_cur: 1.0 + theta,
            s_old: theta,
        }
    }

    /// The one-step start-up scheme used to produce the first time level.
    pub fn first_order(theta: f64, dt: f64) -> TimeStencil {
        assert!(
            (0.5..=1.0).contains(&theta),
            "theta must lie in [1/2, 1], got {theta}"
        );
        assert!(dt > 0.0, "dt must be positive");
        TimeStencil {
            theta,
            dt,
            c_new: 1.0,
            c_cur: 1.0,
            c_old: 0.0,
            s_cur: 1.0,
            s_old: 0.0,
        }
    }

    /// Coefficient of the new level in the time-derivative term.
    pub fn implicit_coeff(&self) -> f64 {
        self.c_new / self.dt
    }

    /// Explicit part of the difference quotient: (c_cur·wⁿ - c_old·wⁿ⁻¹)/Δt.
    pub fn history_rhs(&self, w_cur: &RealField, w_old: &RealField) -> RealField {
        w_cur
            .scale(self.c_cur / self.dt)
            .add_scaled(-self.c_old / self.dt, w_old)
    }

    /// Star extrapolation of a field.
    pub fn star(&self, w_cur: &RealField, w_old: &RealField) -> RealField {
        w_cur.scale(self.s_cur).add_scaled(-self.s_old, w_old)
    }

    /// Star extrapolation of a vector field.
    pub fn star_vec(&self, w_cur: &VectorField, w_old: &VectorField) -> VectorField {
        w_cur.scale(self.s_cur).add_scaled(-self.s_old, w_old)
    }

    pub fn star_scalar(&self, w_cur: f64, w_old: f64) -> f64 {
        self.s_cur * w_cur - self.s_old * w_old
    }

    /// θ-weighted average θ·wⁿ⁺¹ + (1-θ)·wⁿ of the new and current levels.
    pub fn blend(&self, w_new: &RealField, w_cur: &RealField) -> RealField {
        w_new
            .scale(self.theta)
            .add_scaled(1.0 - self.theta, w_cur)
    }

    pub fn blend_vec(&self, w_new: &VectorField, w_cur: &VectorField) -> VectorField {
        w_new
            .scale(self.theta)
            .add_scaled(1.0 - self.theta, w_cur)
    }

    pub fn blend_scalar(&self, w_new: f64, w_cur: f64) -> f64 {
        self.theta * w_new + (1.0 - self.theta) * w_cur
    }

    /// Apply the full difference quotient to a scalar triple.
    pub fn quotient_scalar(&self, w_new: f64, w_cur: f64, w_old: f64) -> f64 {
        (self.c_new * w_new - self.c_cur * w_cur + self.c_old * w_old) / self.dt
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_extrapolation_examples() {
        let st = TimeStencil::second_order(1.0, 0.1);
        assert_eq!(st.star_scalar(3.0, 1.0), 5.0); // 2wⁿ - wⁿ⁻¹
        let st = TimeStencil::second_order(0.5, 0.1);
        assert_eq!(st.star_scalar(3.0, 1.0), 4.0); // (3wⁿ - wⁿ⁻¹)/2
        assert_eq!(st.star_scalar(2.0, 2.0), 2.0); // constants are fixed
    }

    #[test]
    fn weighted_terms_vanish_at_half() {
        // Every (2θ-1)-weighted coefficient is exactly zero at θ = 1/2.
        let st = TimeStencil::second_order(0.5, 0.2);
        assert_eq!(st.c_old, 0.0);
        let st1 = TimeStencil::first_order(0.5, 0.2);
        assert_eq!(st1.c_old, 0.0);
        assert_eq!(st1.s_old, 0.0);
    }

    #[test]
    fn quotient_is_exact_for_quadratics_at_weighted_time() {
        // The stencil differentiates t² exactly at t^{n+θ}; this is the
        // consistency point where forcing terms are evaluated.
        for theta in [0.5, 0.6, 0.75, 1.0] {
            let dt = 0.01;
            let st = TimeStencil::second_order(theta, dt);
            let t = |n: f64| n * dt;
            let w = |n: f64| t(n) * t(n);
            let q = st.quotient_scalar(w(6.0), w(5.0), w(4.0));
            let expected = 2.0 * (t(5.0) + theta * dt);
            assert!((q - expected).abs() < 1e-12, "theta={theta}: {q} vs {expected}");
        }
    }
}
