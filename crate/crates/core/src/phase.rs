//! Phase-field machinery: double-well potential, auxiliary-variable nonlinear
//! terms, and the decoupled Allen-Cahn subsystem solves.
//!
//! One time step splits the new phase field into three parts,
//!
//! ```text
//! φⁿ⁺¹ = φ_hist + r₁·φ_pot + q·(φ_adv + r₂·φ_pot)
//! ```
//!
//! where φ_hist carries the time history, φ_pot responds to the potential
//! nonlinearity (shared by both scalar branches), and φ_adv carries the
//! advective coupling. Each part solves a constant-coefficient Helmholtz
//! problem; the auxiliary scalars r₁, r₂ then follow from explicitly solvable
//! scalar equations whose denominator is provably positive.

use crate::field::RealField;
use crate::ops::{integral, l2_inner, laplacian, mean};
use crate::solve::solve_helmholtz;
use crate::stencil::TimeStencil;
use crate::{Error, Result};

/// Physical parameters of the N-component phase model.
#[derive(Clone, Copy, Debug)]
pub struct PhaseParams {
    /// Number of material components, N >= 2.
    pub components: usize,
    /// Mobility M.
    pub mobility: f64,
    /// Surface-tension constant λ.
    pub lambda: f64,
    /// Interface thickness ε.
    pub epsilon: f64,
    /// Positive shift C keeping the auxiliary energy integral positive.
    pub sav_shift: f64,
}

impl PhaseParams {
    pub fn validate(&self) -> Result<()> {
        if self.components < 2 {
            return Err(Error::Config(format!(
                "components must be >= 2, got {}",
                self.components
            )));
        }
        for (name, v) in [
            ("mobility", self.mobility),
            ("lambda", self.lambda),
            ("epsilon", self.epsilon),
            ("sav_shift", self.sav_shift),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Number of stored phase fields: a two-component mixture is described by
    /// a single field, larger N keeps all N fields.
    pub fn field_count(&self) -> usize {
        if self.components == 2 {
            1
        } else {
            self.components
        }
    }
}

/// Phase variables at one time level.
#[derive(Clone)]
pub struct PhaseState {
    pub phi: Vec<RealField>,
    pub mu: Vec<RealField>,
    /// Auxiliary scalar tracking sqrt of the shifted potential energy.
    pub r: f64,
    /// Auxiliary scalar that is identically 1 at the continuous level.
    pub q: f64,
}

/// Double-well potential F(φ) = φ²(1-φ)²/(4ε²).
pub fn double_well(phi: &RealField, epsilon: f64) -> RealField {
    let c = 1.0 / (4.0 * epsilon * epsilon);
    phi.map(|v| c * v * v * (1.0 - v) * (1.0 - v))
}

/// f(φ) = F'(φ) = φ(φ - 1/2)(φ - 1)/ε².
pub fn double_well_deriv(phi: &RealField, epsilon: f64) -> RealField {
    let c = 1.0 / (epsilon * epsilon);
    phi.map(|v| c * v * (v - 0.5) * (v - 1.0))
}

/// sqrt(Σ_k ∫ F(φ_k) dx + C); the shift keeps this strictly positive.
pub fn sav_denominator(phi: &[RealField], epsilon: f64, sav_shift: f64) -> f64 {
    let total: f64 = phi.iter().map(|p| integral(&double_well(p, epsilon))).sum();
    (total + sav_shift).sqrt()
}

/// Mean-free potential terms driving the phase equations.
pub struct NonlinearTerms {
    /// One mean-free field H̄_k per stored phase.
    pub h_bar: Vec<RealField>,
    /// Lagrange-multiplier field -(1/N)·Σ H̄_k keeping the phases summing to
    /// one; identically zero in the single-field (two-component) description.
    pub gamma: RealField,
    /// H̄_k + γ per phase, the combination every solve consumes.
    pub h_gamma: Vec<RealField>,
}

/// Build H̄_k and γ from (extrapolated) phase fields.
pub fn nonlinear_terms(phi_star: &[RealField], params: &PhaseParams) -> NonlinearTerms {
    let grid = phi_star[0].grid().clone();
    let denom = sav_denominator(phi_star, params.epsilon, params.sav_shift);
    let h_bar: Vec<RealField> = phi_star
        .iter()
        .map(|p| {
            let h = double_well_deriv(p, params.epsilon).scale(1.0 / denom);
            let m = mean(&h);
            h.map(|v| v - m)
        })
        .collect();
    let gamma = if params.components >= 3 {
        let mut sum = RealField::zeros(&grid);
        for h in &h_bar {
            sum.add_assign_scaled(1.0, h);
        }
        sum.scale(-1.0 / params.components as f64)
    } else {
        RealField::zeros(&grid)
    };
    let h_gamma = h_bar.iter().map(|h| h.add_scaled(1.0, &gamma)).collect();
    NonlinearTerms {
        h_bar,
        gamma,
        h_gamma,
    }
}

/// The split parts of one phase step, plus the scalar-solve margin.
pub struct PhaseSplitParts {
    pub phi_hist: Vec<RealField>,
    pub mu_hist: Vec<RealField>,
    pub phi_pot: Vec<RealField>,
    pub mu_pot: Vec<RealField>,
    pub phi_adv: Vec<RealField>,
    pub mu_adv: Vec<RealField>,
    pub r_hist: f64,
    pub r_adv: f64,
    /// The provably positive denominator of the scalar solves.
    pub margin_d: f64,
}

/// Solve the history-driven subsystem for one phase: the part of (φⁿ⁺¹, μⁿ⁺¹)
/// that carries the previous levels, the stored chemical potential, and any
/// external forcing.
pub fn solve_phase_history(
    st: &TimeStencil,
    phi_cur: &RealField,
    phi_old: &RealField,
    mu_cur: &RealField,
    h_gamma: &RealField,
    r_cur: f64,
    params: &PhaseParams,
    forcing: Option<&RealField>,
) -> Result<(RealField, RealField)> {
    let m = params.mobility;
    let lam = params.lambda;
    let theta = st.theta;
    let mut rhs = st.history_rhs(phi_cur, phi_old);
    rhs.add_assign_scaled(m * lam * (1.0 - theta), &laplacian(phi_cur));
    rhs.add_assign_scaled(-m * lam * (1.0 - theta) * r_cur, h_gamma);
    if let Some(g) = forcing {
        rhs.add_assign_scaled(1.0, g);
    }
    let phi = solve_helmholtz(st.implicit_coeff(), m * lam * theta, &rhs)?;
    // Recover μ from the constitutive relation of this branch.
    let blend = st.blend(&phi, phi_cur);
    let mut mu = laplacian(&blend).scale(-lam);
    mu.add_assign_scaled(lam * (1.0 - theta) * r_cur, h_gamma);
    mu.add_assign_scaled(-(1.0 - theta), mu_cur);
    Ok((phi, mu.scale(1.0 / theta)))
}

/// Solve the potential-driven subsystem: the part proportional to the new
/// auxiliary scalar. Its solution has exactly zero mean.
pub fn solve_phase_potential(
    st: &TimeStencil,
    h_gamma: &RealField,
    params: &PhaseParams,
) -> Result<(RealField, RealField)> {
    let m = params.mobility;
    let lam = params.lambda;
    let rhs = h_gamma.scale(-m * lam * st.theta);
    let phi = solve_helmholtz(st.implicit_coeff(), m * lam * st.theta, &rhs)?;
    let mu = laplacian(&phi).scale(-lam).add_scaled(lam, h_gamma);
    Ok((phi, mu))
}

/// Solve the advection-driven subsystem: the part multiplied by the coupling
/// scalar q. `advection` is the conservative transport term ∇·(u* φ*_k).
pub fn solve_phase_advection(
    st: &TimeStencil,
    advection: &RealField,
    params: &PhaseParams,
) -> Result<(RealField, RealField)> {
    let m = params.mobility;
    let lam = params.lambda;
    let rhs = advection.scale(-1.0);
    let phi = solve_helmholtz(st.implicit_coeff(), m * lam * st.theta, &rhs)?;
    let mu = laplacian(&phi).scale(-lam);
    Ok((phi, mu))
}

/// Denominator of both scalar solves,
/// D = c_new·(1 - (1/2)·Σ_k ∫ H̄_k φ_pot,k dx); positive because each
/// -∫ H̄_k φ_pot,k is a weighted norm of φ_pot,k.
pub fn sav_split_denominator(st: &TimeStencil, h_bar: &[RealField], phi_pot: &[RealField]) -> f64 {
    let coupling: f64 = h_bar
        .iter()
        .zip(phi_pot)
        .map(|(h, p)| l2_inner(h, p))
        .sum();
    st.c_new * (1.0 - 0.5 * coupling)
}

/// Scalar solve for the history branch of the auxiliary variable.
pub fn sav_history_scalar(
    st: &TimeStencil,
    h_bar: &[RealField],
    phi_hist: &[RealField],
    phi_cur: &[RealField],
    phi_old: &[RealField],
    r_cur: f64,
    r_old: f64,
    d: f64,
    step: usize,
) -> Result<f64> {
    if d <= 1e-12 {
        return Err(Error::Solvability {
            step,
            what: "phase scalar denominator",
            value: d,
        });
    }
    let mut num = st.c_cur * r_cur - st.c_old * r_old;
    for (k, h) in h_bar.iter().enumerate() {
        let stencil = phi_hist[k]
            .scale(st.c_new)
            .add_scaled(-st.c_cur, &phi_cur[k])
            .add_scaled(st.c_old, &phi_old[k]);
        num += 0.5 * l2_inner(h, &stencil);
    }
    Ok(num / d)
}

/// Scalar solve for the advection branch of the auxiliary variable.
pub fn sav_advection_scalar(
    st: &TimeStencil,
    h_bar: &[RealField],
    phi_adv: &[RealField],
    d: f64,
    step: usize,
) -> Result<f64> {
    if d <= 1e-12 {
        return Err(Error::Solvability {
            step,
            what: "phase scalar denominator",
            value: d,
        });
    }
    let num: f64 = h_bar
        .iter()
        .zip(phi_adv)
        .map(|(h, p)| 0.5 * st.c_new * l2_inner(h, p))
        .sum();
    Ok(num / d)
}

/// Recombine the split parts with the solved scalars into the new level.
pub fn assemble_phase(
    parts: &PhaseSplitParts,
    q_blend: f64,
) -> (Vec<RealField>, Vec<RealField>, f64) {
    let n = parts.phi_hist.len();
    let mut phi = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    for k in 0..n {
        phi.push(
            parts.phi_hist[k]
                .add_scaled(parts.r_hist, &parts.phi_pot[k])
                .add_scaled(q_blend, &parts.phi_adv[k])
                .add_scaled(q_blend * parts.r_adv, &parts.phi_pot[k]),
        );
        mu.push(
            parts.mu_hist[k]
                .add_scaled(parts.r_hist, &parts.mu_pot[k])
                .add_scaled(q_blend, &parts.mu_adv[k])
                .add_scaled(q_blend * parts.r_adv, &parts.mu_pot[k]),
        );
    }
    let r = parts.r_hist + q_blend * parts.r_adv;
    (phi, mu, r)
}
