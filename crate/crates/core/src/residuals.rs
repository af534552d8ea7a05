//! Back-substitution of assembled states into the scheme equations.
//!
//! Independent of the split-solve pipeline: rebuilds every term of the
//! discrete system directly from three consecutive states and reports one
//! relative residual per equation. Used by tests to certify that the
//! decoupled solves reproduce the coupled scheme.

use crate::field::{RealField, VectorField};
use crate::flow::FlowModel;
use crate::ops::{
    advect_scalar, convect, divergence, gradient, l2_inner, l2_inner_vec, laplacian,
    laplacian_vec, linf_norm,
};
use crate::phase::nonlinear_terms;
use crate::stencil::TimeStencil;
use crate::stepper::{Forcing, ModelParams, SimState};

/// Relative residual of each scheme equation after one step
/// prev → curr → next.
#[derive(Clone, Copy, Debug)]
pub struct SchemeResiduals {
    /// Phase transport equation (max over components).
    pub phase: f64,
    /// Chemical-potential relation (max over components).
    pub potential: f64,
    /// Auxiliary-scalar r equation.
    pub sav: f64,
    /// Momentum balance for the intermediate velocity.
    pub momentum: f64,
    /// Projection relation between u, ũ and the pressure increment.
    pub projection: f64,
    /// Incompressibility of the end-of-step velocity.
    pub incompressibility: f64,
    /// Auxiliary-scalar q equation.
    pub q: f64,
}

impl SchemeResiduals {
    pub fn max(&self) -> f64 {
        self.phase
            .max(self.potential)
            .max(self.sav)
            .max(self.momentum)
            .max(self.projection)
            .max(self.incompressibility)
            .max(self.q)
    }
}

fn rel(residual: f64, scale: f64) -> f64 {
    residual / (1.0 + scale)
}

fn quotient_field(st: &TimeStencil, new: &RealField, cur: &RealField, old: &RealField) -> RealField {
    new.scale(st.c_new / st.dt)
        .add_scaled(-st.c_cur / st.dt, cur)
        .add_scaled(st.c_old / st.dt, old)
}

/// Evaluate all scheme residuals for the step that produced `next`.
/// `step` is the index of the `curr` level, as passed to the stepper.
#[allow(clippy::too_many_arguments)]
pub fn scheme_residuals(
    st: &TimeStencil,
    model: &ModelParams,
    prev: &SimState,
    curr: &SimState,
    next: &SimState,
    forcing: Option<&dyn Forcing>,
    step: usize,
) -> SchemeResiduals {
    let grid = curr.flow.p.grid().clone();
    let nf = curr.phase.phi.len();
    let theta = st.theta;

    // Star quantities, rebuilt from scratch.
    let phi_star: Vec<RealField> = (0..nf)
        .map(|k| st.star(&curr.phase.phi[k], &prev.phase.phi[k]))
        .collect();
    let mu_star: Vec<RealField> = (0..nf)
        .map(|k| st.star(&curr.phase.mu[k], &prev.phase.mu[k]))
        .collect();
    let u_star = st.star_vec(&curr.flow.u, &prev.flow.u);
    let nt = nonlinear_terms(&phi_star, &model.phase);
    let q_blend = st.blend_scalar(next.phase.q, curr.phase.q);
    let r_blend = st.blend_scalar(next.phase.r, curr.phase.r);
    let t_force = (step as f64 + theta) * st.dt;
    let g_phi = forcing.map(|f| f.phase(&grid, t_force));
    let g_u = forcing.map(|f| f.momentum(&grid, t_force));

    let mut res_phase = 0.0f64;
    let mut res_potential = 0.0f64;
    let mut sav_rhs = 0.0f64;
    for k in 0..nf {
        let adv = advect_scalar(&u_star, &phi_star[k]);
        let quot = quotient_field(st, &next.phase.phi[k], &curr.phase.phi[k], &prev.phase.phi[k]);
        let mu_blend = st.blend(&next.phase.mu[k], &curr.phase.mu[k]);
        let mut res = quot
            .add_scaled(q_blend, &adv)
            .add_scaled(model.phase.mobility, &mu_blend);
        if let Some(g) = &g_phi {
            res.add_assign_scaled(-1.0, &g[k]);
        }
        let scale = linf_norm(&quot)
            .max(q_blend.abs() * linf_norm(&adv))
            .max(model.phase.mobility * linf_norm(&mu_blend));
        res_phase = res_phase.max(rel(linf_norm(&res), scale));

        let phi_blend = st.blend(&next.phase.phi[k], &curr.phase.phi[k]);
        let expect = laplacian(&phi_blend)
            .scale(-model.phase.lambda)
            .add_scaled(model.phase.lambda * r_blend, &nt.h_gamma[k]);
        let resm = mu_blend.add_scaled(-1.0, &expect);
        res_potential = res_potential.max(rel(linf_norm(&resm), linf_norm(&mu_blend)));

        sav_rhs += 0.5 * l2_inner(&nt.h_bar[k], &quot);
    }
    let sav_lhs = st.quotient_scalar(next.phase.r, curr.phase.r, prev.phase.r);
    let res_sav = rel((sav_lhs - sav_rhs).abs(), sav_lhs.abs());

    // Momentum balance of the intermediate velocity.
    let tau = model.flow.tau_eff();
    let quot_u = VectorField::new(
        quotient_field(st, &next.flow.u_tilde.x, &curr.flow.u.x, &prev.flow.u.x),
        quotient_field(st, &next.flow.u_tilde.y, &curr.flow.u.y, &prev.flow.u.y),
    )
    .scale(tau);
    let tilde_blend = st.blend_vec(&next.flow.u_tilde, &curr.flow.u);
    let mut capillary = VectorField::zeros(&grid);
    for k in 0..nf {
        let gm = gradient(&mu_star[k]);
        capillary
            .x
            .add_assign_scaled(1.0, &phi_star[k].zip_with(&gm.x, |a, b| a * b));
        capillary
            .y
            .add_assign_scaled(1.0, &phi_star[k].zip_with(&gm.y, |a, b| a * b));
    }
    let grad_p = gradient(&curr.flow.p);
    let mut res_u = quot_u
        .add_scaled(1.0, &grad_p)
        .add_scaled(q_blend, &capillary);
    let mut scale_u = quot_u
        .max_abs()
        .max(grad_p.max_abs())
        .max(q_blend.abs() * capillary.max_abs());
    match model.flow.model {
        FlowModel::NavierStokes => {
            let conv = convect(&u_star);
            let visc = laplacian_vec(&tilde_blend).scale(model.flow.viscosity);
            res_u = res_u.add_scaled(q_blend, &conv).add_scaled(-1.0, &visc);
            scale_u = scale_u
                .max(q_blend.abs() * conv.max_abs())
                .max(visc.max_abs());
        }
        FlowModel::Darcy => {
            let drag = model.flow.conductivity * model.flow.viscosity;
            res_u = res_u.add_scaled(drag, &tilde_blend);
            scale_u = scale_u.max(drag * tilde_blend.max_abs());
        }
    }
    if let Some(g) = &g_u {
        res_u = res_u.add_scaled(-1.0, g);
        scale_u = scale_u.max(g.max_abs());
    }
    let res_momentum = rel(res_u.max_abs(), scale_u);

    // Projection: τ·c_new·(u - ũ)/Δt + θ∇(pⁿ⁺¹ - pⁿ) = 0.
    let dp = next.flow.p.add_scaled(-1.0, &curr.flow.p);
    let res_proj = next
        .flow
        .u
        .add_scaled(-1.0, &next.flow.u_tilde)
        .scale(tau * st.c_new / st.dt)
        .add_scaled(theta, &gradient(&dp));
    let scale_proj = (tau * st.c_new / st.dt) * next.flow.u.max_abs().max(1e-30)
        + theta * gradient(&dp).max_abs();
    let res_projection = rel(res_proj.max_abs(), scale_proj);

    let res_incomp = rel(
        divergence(&next.flow.u).max_abs(),
        next.flow.u.max_abs(),
    );

    // q equation: quotient = Σ(adv, μ_blend) + (capillary, ũ_blend) [+ conv].
    let q_lhs = st.quotient_scalar(next.phase.q, curr.phase.q, prev.phase.q);
    let mut q_rhs = l2_inner_vec(&capillary, &tilde_blend);
    for k in 0..nf {
        let adv = advect_scalar(&u_star, &phi_star[k]);
        let mu_blend = st.blend(&next.phase.mu[k], &curr.phase.mu[k]);
        q_rhs += l2_inner(&adv, &mu_blend);
    }
    if model.flow.model == FlowModel::NavierStokes {
        q_rhs += l2_inner_vec(&convect(&u_star), &tilde_blend);
    }
    let res_q = rel((q_lhs - q_rhs).abs(), q_lhs.abs().max(q_rhs.abs()));

    SchemeResiduals {
        phase: res_phase,
        potential: res_potential,
        sav: res_sav,
        momentum: res_momentum,
        projection: res_projection,
        incompressibility: res_incomp,
        q: res_q,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowParams;
    use crate::grid::Grid;
    use crate::ic::{random_initial_state, RandomIc};
    use crate::phase::PhaseParams;
    use crate::stepper::{advance_state, SchemeParams, Simulation};

    fn model(components: usize, fm: FlowModel) -> ModelParams {
        ModelParams {
            phase: PhaseParams {
                components,
                mobility: 10.0,
                lambda: 0.01,
                epsilon: 0.05,
                sav_shift: 10.0,
            },
            flow: FlowParams {
                model: fm,
                viscosity: 1.0,
                conductivity: 1000.0,
                inertia: 1.0,
            },
        }
    }

    #[test]
    fn assembled_steps_satisfy_the_scheme() {
        for (components, fm, ic) in [
            (2, FlowModel::NavierStokes, RandomIc::TwoComponent),
            (3, FlowModel::NavierStokes, RandomIc::ThreeComponentUnitSum),
            (2, FlowModel::Darcy, RandomIc::TwoComponent),
            (3, FlowModel::Darcy, RandomIc::ThreeComponentUnitSum),
        ] {
            let grid = Grid::new(32, 32, 2.0, 2.0).unwrap();
            let m = model(components, fm);
            let (phi0, u0, p0) = random_initial_state(ic, 99, &grid);
            let mut sim = Simulation::new(
                grid,
                m,
                SchemeParams {
                    theta: 0.75,
                    dt: 0.005,
                },
                phi0,
                u0,
                p0,
            )
            .unwrap();
            sim.advance().unwrap();
            for step in 1..4 {
                let st = TimeStencil::second_order(0.75, 0.005);
                let prev = sim.prev_state().clone();
                let curr = sim.state().clone();
                let (next, _) = advance_state(&st, &m, &prev, &curr, None, step, false).unwrap();
                let res = scheme_residuals(&st, &m, &prev, &curr, &next, None, step);
                assert!(
                    res.max() < 1e-10,
                    "residuals {res:?} at step {step} ({components} comp, {fm:?})"
                );
                sim.advance().unwrap();
            }
        }
    }
}
