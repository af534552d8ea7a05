//! Velocity and pressure machinery: intermediate-velocity solves, the
//! pressure Poisson update, and the divergence-free projection.
//!
//! The intermediate velocity splits as ũⁿ⁺¹ = ũ_hist + q·ũ_cpl, where ũ_hist
//! carries time history, old pressure, and forcing, and ũ_cpl carries the
//! convective and capillary coupling. For Navier-Stokes both parts solve a
//! componentwise Helmholtz problem; for Darcy the momentum balance has no
//! diffusion of ũ beyond the drag term, so both parts are pointwise algebraic
//! divisions.

use crate::field::{RealField, VectorField};
use crate::ops::{divergence, gradient, laplacian_vec};
use crate::solve::{solve_helmholtz, solve_poisson_zero_mean};
use crate::stencil::TimeStencil;
use crate::{Error, Result};

/// Which momentum balance closes the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowModel {
    NavierStokes,
    Darcy,
}

/// Flow parameters; `conductivity` and `inertia` only enter the Darcy model.
#[derive(Clone, Copy, Debug)]
pub struct FlowParams {
    pub model: FlowModel,
    /// Viscosity ν.
    pub viscosity: f64,
    /// Hydraulic conductivity α (Darcy drag factor α·ν).
    pub conductivity: f64,
    /// Inertia constant τ multiplying the Darcy time derivative.
    pub inertia: f64,
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("viscosity", self.viscosity),
            ("conductivity", self.conductivity),
            ("inertia", self.inertia),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Inertia coefficient in front of the time derivative (1 for NS).
    pub fn tau_eff(&self) -> f64 {
        match self.model {
            FlowModel::NavierStokes => 1.0,
            FlowModel::Darcy => self.inertia,
        }
    }

    /// Pointwise symbol τ·c_new/Δt + ανθ of the Darcy intermediate solve.
    pub fn darcy_symbol(&self, st: &TimeStencil) -> f64 {
        self.inertia * st.implicit_coeff() + self.conductivity * self.viscosity * st.theta
    }
}

/// Flow variables at one time level. `u` is the projected (divergence-free)
/// velocity, `u_tilde` the intermediate field before projection, and `p` the
/// zero-mean pressure.
#[derive(Clone)]
pub struct FlowState {
    pub u: VectorField,
    pub u_tilde: VectorField,
    pub p: RealField,
}

/// History branch of the intermediate velocity: previous levels, old
/// pressure gradient, and external forcing.
pub fn tilde_u_history(
    st: &TimeStencil,
    u_cur: &VectorField,
    u_old: &VectorField,
    p_cur: &RealField,
    fp: &FlowParams,
    forcing: Option<&VectorField>,
) -> Result<VectorField> {
    let grad_p = gradient(p_cur);
    match fp.model {
        FlowModel::NavierStokes => {
            let nu = fp.viscosity;
            let lap = laplacian_vec(u_cur);
            let mut rhs = VectorField::new(
                st.history_rhs(&u_cur.x, &u_old.x),
                st.history_rhs(&u_cur.y, &u_old.y),
            );
            rhs = rhs.add_scaled(nu * (1.0 - st.theta), &lap);
            rhs = rhs.add_scaled(-1.0, &grad_p);
            if let Some(g) = forcing {
                rhs = rhs.add_scaled(1.0, g);
            }
            let a = st.implicit_coeff();
            let b = nu * st.theta;
            Ok(VectorField::new(
                solve_helmholtz(a, b, &rhs.x)?,
                solve_helmholtz(a, b, &rhs.y)?,
            ))
        }
        FlowModel::Darcy => {
            let tau = fp.inertia;
            let drag = fp.conductivity * fp.viscosity;
            let cu = tau * st.c_cur / st.dt - drag * (1.0 - st.theta);
            let co = tau * st.c_old / st.dt;
            let mut rhs = u_cur.scale(cu).add_scaled(-co, u_old);
            rhs = rhs.add_scaled(-1.0, &grad_p);
            if let Some(g) = forcing {
                rhs = rhs.add_scaled(1.0, g);
            }
            Ok(rhs.scale(1.0 / fp.darcy_symbol(st)))
        }
    }
}

/// Coupling branch of the intermediate velocity. `coupling` is the combined
/// explicit source u*·∇u* + Σ φ*∇μ* (Navier-Stokes) or Σ φ*∇μ* (Darcy).
pub fn tilde_u_coupling(
    st: &TimeStencil,
    coupling: &VectorField,
    fp: &FlowParams,
) -> Result<VectorField> {
    match fp.model {
        FlowModel::NavierStokes => {
            let a = st.implicit_coeff();
            let b = fp.viscosity * st.theta;
            Ok(VectorField::new(
                solve_helmholtz(a, b, &coupling.x.scale(-1.0))?,
                solve_helmholtz(a, b, &coupling.y.scale(-1.0))?,
            ))
        }
        FlowModel::Darcy => Ok(coupling.scale(-1.0 / fp.darcy_symbol(st))),
    }
}

/// Advance the pressure: Δpⁿ⁺¹ = Δpⁿ + coeff·∇·ũⁿ⁺¹ under the zero-mean
/// gauge, solved incrementally so pⁿ⁺¹ - pⁿ is itself mean-free.
///
/// The divergence of any field has structurally zero mean here, so the rhs
/// mean is roundoff; it is subtracted before the solve. A mean beyond
/// roundoff scale means the input is not a velocity-like field and is fatal.
pub fn pressure_update(
    st: &TimeStencil,
    u_tilde: &VectorField,
    p_cur: &RealField,
    fp: &FlowParams,
) -> Result<RealField> {
    let coeff = fp.tau_eff() * st.c_new / (st.theta * st.dt);
    let rhs = divergence(u_tilde).scale(coeff);
    let m = crate::ops::mean(&rhs);
    if m.abs() > 1e-8 * (1.0 + rhs.max_abs()) {
        return Err(Error::IncompatibleRhs {
            mean: m,
            limit: 1e-8 * (1.0 + rhs.max_abs()),
        });
    }
    let increment = solve_poisson_zero_mean(&rhs.map(|v| v - m))?;
    Ok(p_cur.add_scaled(1.0, &increment))
}

/// Project the intermediate velocity onto the divergence-free space using the
/// fresh pressure increment.
pub fn project_velocity(
    st: &TimeStencil,
    u_tilde: &VectorField,
    p_new: &RealField,
    p_cur: &RealField,
    fp: &FlowParams,
) -> VectorField {
    let proj = st.theta * st.dt / (fp.tau_eff() * st.c_new);
    let grad_dp = gradient(&p_new.add_scaled(-1.0, p_cur));
    u_tilde.add_scaled(-proj, &grad_dp)
}
