//! Full time-step orchestration for both coupled models.
//!
//! One step runs the decoupled pipeline:
//! star extrapolation → mean-free potential terms → three phase subsystem
//! solves per component → auxiliary scalars r₁, r₂ → intermediate-velocity
//! splits → coupling work integrals → scalar q update → assembly of
//! (φ, μ, r, ũ) → pressure Poisson → projection. Every linear solve has
//! constant coefficients; the two scalar solves have provably positive
//! denominators, which are tracked as solvability margins.
//!
//! The first step out of the initial data uses the same pipeline with the
//! one-step stencil (see [`TimeStencil::first_order`]).

use std::sync::Arc;

use crate::field::{RealField, VectorField};
use crate::flow::{
    pressure_update, project_velocity, tilde_u_coupling, tilde_u_history, FlowModel, FlowParams,
    FlowState,
};
use crate::gnorm::{g_norm_pair_vec, g_quadratic_pair};
use crate::grid::Grid;
use crate::ops::{
    advect_scalar, convect, dealias_23, divergence, gradient, integral, l2_inner, l2_inner_vec,
    l2_norm_sq_vec, mean,
};
use crate::phase::{
    assemble_phase, nonlinear_terms, sav_advection_scalar, sav_denominator, sav_history_scalar,
    sav_split_denominator, solve_phase_advection, solve_phase_history, solve_phase_potential,
    NonlinearTerms, PhaseParams, PhaseSplitParts, PhaseState,
};
use crate::stencil::TimeStencil;
use crate::{Error, Result};

/// Time-discretization parameters.
#[derive(Clone, Copy, Debug)]
pub struct SchemeParams {
    /// Weight θ ∈ [1/2, 1] blending Crank-Nicolson and BDF2.
    pub theta: f64,
    /// Time step size.
    pub dt: f64,
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::Config(format!(
                "theta = {} outside [1/2, 1]; the scheme is only energy-stable on that range",
                self.theta
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }
}

/// All model parameters of one simulation.
#[derive(Clone, Copy, Debug)]
pub struct ModelParams {
    pub phase: PhaseParams,
    pub flow: FlowParams,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        self.phase.validate()?;
        self.flow.validate()
    }
}

/// Complete simulation state at one time level.
#[derive(Clone)]
pub struct SimState {
    pub phase: PhaseState,
    pub flow: FlowState,
}

/// Per-step diagnostics record.
#[derive(Clone, Debug)]
pub struct Diagnostics {
    pub step: usize,
    pub time: f64,
    /// Modified energy of the (new, previous) state pair.
    pub energy: f64,
    /// ∫ φ_k dx per stored phase.
    pub mass: Vec<f64>,
    pub q: f64,
    pub r: f64,
    pub max_div_u: f64,
    /// Denominator of the phase scalar solves (positive by theory).
    pub margin_d: f64,
    /// Denominator of the q solve (positive by theory).
    pub margin_q: f64,
}

/// Time-dependent external forcing for manufactured-solution runs.
/// Phase forcing is per stored component; momentum forcing is a vector field.
/// Both are sampled at the scheme's consistency time t = (n + θ)Δt.
pub trait Forcing {
    fn phase(&self, grid: &Arc<Grid>, t: f64) -> Vec<RealField>;
    fn momentum(&self, grid: &Arc<Grid>, t: f64) -> VectorField;
}

/// Owns two consecutive states and advances them step by step.
pub struct Simulation {
    grid: Arc<Grid>,
    model: ModelParams,
    scheme: SchemeParams,
    dealias: bool,
    forcing: Option<Box<dyn Forcing>>,
    prev: SimState,
    curr: SimState,
    step: usize,
}

impl Simulation {
    /// Set up a simulation from initial phase fields and flow data.
    ///
    /// Derived initial values: r⁰ from the shifted potential energy, q⁰ = 1,
    /// μ⁰ = λ(-Δφ⁰ + (H̄⁰+γ⁰)r⁰), ũ⁰ = u⁰, and the pressure regauged to zero
    /// mean (only ∇p enters the dynamics).
    pub fn new(
        grid: Arc<Grid>,
        model: ModelParams,
        scheme: SchemeParams,
        phi0: Vec<RealField>,
        u0: VectorField,
        p0: RealField,
    ) -> Result<Simulation> {
        model.validate()?;
        scheme.validate()?;
        if phi0.len() != model.phase.field_count() {
            return Err(Error::Config(format!(
                "expected {} phase fields, got {}",
                model.phase.field_count(),
                phi0.len()
            )));
        }
        let r0 = sav_denominator(&phi0, model.phase.epsilon, model.phase.sav_shift);
        let nt = nonlinear_terms(&phi0, &model.phase);
        let lam = model.phase.lambda;
        let mu0: Vec<RealField> = phi0
            .iter()
            .zip(&nt.h_gamma)
            .map(|(phi, hg)| {
                crate::ops::laplacian(phi)
                    .scale(-lam)
                    .add_scaled(lam * r0, hg)
            })
            .collect();
        let p_mean = mean(&p0);
        let state = SimState {
            phase: PhaseState {
                phi: phi0,
                mu: mu0,
                r: r0,
                q: 1.0,
            },
            flow: FlowState {
                u: u0.clone(),
                u_tilde: u0,
                p: p0.map(|v| v - p_mean),
            },
        };
        Ok(Simulation {
            grid,
            model,
            scheme,
            dealias: false,
            forcing: None,
            prev: state.clone(),
            curr: state,
            step: 0,
        })
    }

    /// Resume from two consecutive known levels (state at t⁰ and t¹), e.g.
    /// exact start-up data that bypasses the first-order bootstrap.
    pub fn from_two_levels(
        grid: Arc<Grid>,
        model: ModelParams,
        scheme: SchemeParams,
        level0: SimState,
        level1: SimState,
    ) -> Result<Simulation> {
        model.validate()?;
        scheme.validate()?;
        Ok(Simulation {
            grid,
            model,
            scheme,
            dealias: false,
            forcing: None,
            prev: level0,
            curr: level1,
            step: 1,
        })
    }

    /// Apply the 2/3-rule truncation to nonlinear products.
    pub fn set_dealias(&mut self, on: bool) {
        self.dealias = on;
    }

    pub fn set_forcing(&mut self, forcing: Box<dyn Forcing>) {
        self.forcing = Some(forcing);
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    pub fn scheme(&self) -> &SchemeParams {
        &self.scheme
    }

    pub fn state(&self) -> &SimState {
        &self.curr
    }

    pub fn prev_state(&self) -> &SimState {
        &self.prev
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.scheme.dt
    }

    /// Advance one time step. The first call out of the initial data runs the
    /// one-step start-up scheme; all later calls run the two-step scheme.
    pub fn advance(&mut self) -> Result<Diagnostics> {
        let stencil = if self.step == 0 {
            TimeStencil::first_order(self.scheme.theta, self.scheme.dt)
        } else {
            TimeStencil::second_order(self.scheme.theta, self.scheme.dt)
        };
        let (next, margins) = advance_state(
            &stencil,
            &self.model,
            &self.prev,
            &self.curr,
            self.forcing.as_deref(),
            self.step,
            self.dealias,
        )?;
        let diag = self.diagnostics_for(&next, margins);
        check_finite(&next, self.step + 1)?;
        self.prev = std::mem::replace(&mut self.curr, next);
        self.step += 1;
        Ok(diag)
    }

    fn diagnostics_for(&self, next: &SimState, margins: (f64, f64)) -> Diagnostics {
        Diagnostics {
            step: self.step + 1,
            time: (self.step + 1) as f64 * self.scheme.dt,
            energy: modified_energy(next, &self.curr, &self.model, &self.scheme),
            mass: total_mass(&next.phase),
            q: next.phase.q,
            r: next.phase.r,
            max_div_u: divergence(&next.flow.u).max_abs(),
            margin_d: margins.0,
            margin_q: margins.1,
        }
    }

    /// Diagnostics of the initial state (step 0), with the pair energy taken
    /// over the duplicated level and no solve margins.
    pub fn initial_diagnostics(&self) -> Diagnostics {
        Diagnostics {
            step: 0,
            time: 0.0,
            energy: modified_energy(&self.curr, &self.curr, &self.model, &self.scheme),
            mass: total_mass(&self.curr.phase),
            q: self.curr.phase.q,
            r: self.curr.phase.r,
            max_div_u: divergence(&self.curr.flow.u).max_abs(),
            margin_d: f64::NAN,
            margin_q: f64::NAN,
        }
    }
}

fn check_finite(state: &SimState, step: usize) -> Result<()> {
    if !state.phase.r.is_finite() || state.phase.r <= 0.0 {
        return Err(Error::NonFinite {
            step,
            what: "auxiliary scalar r",
        });
    }
    if !state.phase.q.is_finite() {
        return Err(Error::NonFinite {
            step,
            what: "auxiliary scalar q",
        });
    }
    for phi in &state.phase.phi {
        if !phi.is_finite() {
            return Err(Error::NonFinite {
                step,
                what: "phase field",
            });
        }
    }
    if !state.flow.u.is_finite() || !state.flow.p.is_finite() {
        return Err(Error::NonFinite {
            step,
            what: "flow field",
        });
    }
    Ok(())
}

/// Star-extrapolated quantities and everything derived from them that both
/// the phase and flow solves consume.
pub struct StarTerms {
    pub phi: Vec<RealField>,
    pub mu: Vec<RealField>,
    pub u: VectorField,
    pub nonlinear: NonlinearTerms,
    /// ∇·(u* φ*_k) per stored phase.
    pub advection: Vec<RealField>,
    /// u*·∇u* (Navier-Stokes only; zero for Darcy).
    pub convection: VectorField,
    /// Σ_k φ*_k ∇μ*_k.
    pub capillary: VectorField,
}

/// Build the star terms from two consecutive states.
pub fn star_terms(
    st: &TimeStencil,
    model: &ModelParams,
    prev: &SimState,
    curr: &SimState,
    dealias: bool,
) -> StarTerms {
    let grid = curr.flow.p.grid().clone();
    let nf = curr.phase.phi.len();
    let phi: Vec<RealField> = (0..nf)
        .map(|k| st.star(&curr.phase.phi[k], &prev.phase.phi[k]))
        .collect();
    let mu: Vec<RealField> = (0..nf)
        .map(|k| st.star(&curr.phase.mu[k], &prev.phase.mu[k]))
        .collect();
    let u = st.star_vec(&curr.flow.u, &prev.flow.u);
    let nonlinear = nonlinear_terms(&phi, &model.phase);
    let trunc = |f: RealField| if dealias { dealias_23(&f) } else { f };
    let advection: Vec<RealField> = phi.iter().map(|p| trunc(advect_scalar(&u, p))).collect();
    let convection = match model.flow.model {
        FlowModel::NavierStokes => {
            let c = convect(&u);
            VectorField::new(trunc(c.x), trunc(c.y))
        }
        FlowModel::Darcy => VectorField::zeros(&grid),
    };
    let mut capillary = VectorField::zeros(&grid);
    for k in 0..nf {
        let gm = gradient(&mu[k]);
        capillary.x.add_assign_scaled(1.0, &trunc(phi[k].zip_with(&gm.x, |a, b| a * b)));
        capillary.y.add_assign_scaled(1.0, &trunc(phi[k].zip_with(&gm.y, |a, b| a * b)));
    }
    StarTerms {
        phi,
        mu,
        u,
        nonlinear,
        advection,
        convection,
        capillary,
    }
}

/// Work integrals of the coupling terms against the two velocity/potential
/// branches. `feedback` multiplies the unknown q (and is ≤ 0 by the split
/// structure); `drive` collects the known branch.
pub struct CouplingWork {
    pub feedback: f64,
    pub drive: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn coupling_work(
    st: &TimeStencil,
    model: &ModelParams,
    star: &StarTerms,
    parts: &PhaseSplitParts,
    u_tilde_hist: &VectorField,
    u_tilde_cpl: &VectorField,
    u_cur: &VectorField,
    mu_cur: &[RealField],
) -> CouplingWork {
    let theta = st.theta;
    let nf = parts.phi_hist.len();
    let mut feedback = 0.0;
    let mut drive = 0.0;
    for k in 0..nf {
        // μ branches: μ_k2 = μ_adv + r₂ μ_pot (q side),
        // μ_k1 = μ_hist + r₁ μ_pot (known side).
        let mu_q = parts.mu_adv[k].add_scaled(parts.r_adv, &parts.mu_pot[k]);
        let mu_known = parts.mu_hist[k].add_scaled(parts.r_hist, &parts.mu_pot[k]);
        feedback += theta * l2_inner(&star.advection[k], &mu_q);
        let blended = mu_known.scale(theta).add_scaled(1.0 - theta, &mu_cur[k]);
        drive += l2_inner(&star.advection[k], &blended);
    }
    let vel_q = u_tilde_cpl.scale(theta);
    let vel_known = u_tilde_hist.scale(theta).add_scaled(1.0 - theta, u_cur);
    feedback += l2_inner_vec(&star.capillary, &vel_q);
    drive += l2_inner_vec(&star.capillary, &vel_known);
    if model.flow.model == FlowModel::NavierStokes {
        feedback += l2_inner_vec(&star.convection, &vel_q);
        drive += l2_inner_vec(&star.convection, &vel_known);
    }
    CouplingWork { feedback, drive }
}

/// Explicit scalar update of q: returns (qⁿ⁺ᶿ, qⁿ⁺¹, margin).
pub fn update_q(
    st: &TimeStencil,
    work: &CouplingWork,
    q_cur: f64,
    q_old: f64,
    step: usize,
) -> Result<(f64, f64, f64)> {
    let theta = st.theta;
    let denom = st.c_new / (theta * st.dt) - work.feedback;
    if denom <= 1e-12 {
        return Err(Error::Solvability {
            step,
            what: "q denominator",
            value: denom,
        });
    }
    let cur_coeff = (st.c_new * (1.0 - theta) / theta + st.c_cur) / st.dt;
    let old_coeff = st.c_old / st.dt;
    let q_blend = (cur_coeff * q_cur - old_coeff * q_old + work.drive) / denom;
    let q_new = (q_blend - (1.0 - theta) * q_cur) / theta;
    Ok((q_blend, q_new, denom))
}

/// Run one step of the split pipeline, returning the new state and the two
/// solvability margins (D, q-denominator).
pub fn advance_state(
    st: &TimeStencil,
    model: &ModelParams,
    prev: &SimState,
    curr: &SimState,
    forcing: Option<&dyn Forcing>,
    step: usize,
    dealias: bool,
) -> Result<(SimState, (f64, f64))> {
    let grid = curr.flow.p.grid().clone();
    let nf = curr.phase.phi.len();
    let star = star_terms(st, model, prev, curr, dealias);
    // Forcing samples the stencil's consistency time t^{n+θ}.
    let t_force = (step as f64 + st.theta) * st.dt;
    let phase_forcing = forcing.map(|f| f.phase(&grid, t_force));
    let momentum_forcing = forcing.map(|f| f.momentum(&grid, t_force));

    // Phase subsystem solves.
    let mut phi_hist = Vec::with_capacity(nf);
    let mut mu_hist = Vec::with_capacity(nf);
    let mut phi_pot = Vec::with_capacity(nf);
    let mut mu_pot = Vec::with_capacity(nf);
    let mut phi_adv = Vec::with_capacity(nf);
    let mut mu_adv = Vec::with_capacity(nf);
    for k in 0..nf {
        let g_k = phase_forcing.as_ref().map(|g| &g[k]);
        let (ph, mh) = solve_phase_history(
            st,
            &curr.phase.phi[k],
            &prev.phase.phi[k],
            &curr.phase.mu[k],
            &star.nonlinear.h_gamma[k],
            curr.phase.r,
            &model.phase,
            g_k,
        )?;
        phi_hist.push(ph);
        mu_hist.push(mh);
        let (pp, mp) = solve_phase_potential(st, &star.nonlinear.h_gamma[k], &model.phase)?;
        phi_pot.push(pp);
        mu_pot.push(mp);
        let (pa, ma) = solve_phase_advection(st, &star.advection[k], &model.phase)?;
        phi_adv.push(pa);
        mu_adv.push(ma);
    }
    let d = sav_split_denominator(st, &star.nonlinear.h_bar, &phi_pot);
    let phi_cur: Vec<RealField> = curr.phase.phi.clone();
    let phi_old: Vec<RealField> = prev.phase.phi.clone();
    let r_hist = sav_history_scalar(
        st,
        &star.nonlinear.h_bar,
        &phi_hist,
        &phi_cur,
        &phi_old,
        curr.phase.r,
        prev.phase.r,
        d,
        step,
    )?;
    let r_adv = sav_advection_scalar(st, &star.nonlinear.h_bar, &phi_adv, d, step)?;
    let parts = PhaseSplitParts {
        phi_hist,
        mu_hist,
        phi_pot,
        mu_pot,
        phi_adv,
        mu_adv,
        r_hist,
        r_adv,
        margin_d: d,
    };

    // Intermediate velocity splits.
    let u_tilde_hist = tilde_u_history(
        st,
        &curr.flow.u,
        &prev.flow.u,
        &curr.flow.p,
        &model.flow,
        momentum_forcing.as_ref(),
    )?;
    let coupling_src = match model.flow.model {
        FlowModel::NavierStokes => star.convection.add_scaled(1.0, &star.capillary),
        FlowModel::Darcy => star.capillary.clone(),
    };
    let u_tilde_cpl = tilde_u_coupling(st, &coupling_src, &model.flow)?;

    // Scalar q update and assembly.
    let work = coupling_work(
        st,
        model,
        &star,
        &parts,
        &u_tilde_hist,
        &u_tilde_cpl,
        &curr.flow.u,
        &curr.phase.mu,
    );
    let (q_blend, q_new, margin_q) = update_q(st, &work, curr.phase.q, prev.phase.q, step)?;
    let (phi_new, mu_new, r_new) = assemble_phase(&parts, q_blend);
    let u_tilde = u_tilde_hist.add_scaled(q_blend, &u_tilde_cpl);

    // Pressure correction and projection.
    let p_new = pressure_update(st, &u_tilde, &curr.flow.p, &model.flow)?;
    let u_new = project_velocity(st, &u_tilde, &p_new, &curr.flow.p, &model.flow);

    let next = SimState {
        phase: PhaseState {
            phi: phi_new,
            mu: mu_new,
            r: r_new,
            q: q_new,
        },
        flow: FlowState {
            u: u_new,
            u_tilde,
            p: p_new,
        },
    };
    Ok((next, (d, margin_q)))
}

/// The discrete Lyapunov functional of the scheme: G-norm combinations of the
/// phase gradients, the auxiliary scalars, and the velocity, plus a pressure
/// term. Non-increasing along unforced trajectories.
pub fn modified_energy(
    curr: &SimState,
    prev: &SimState,
    model: &ModelParams,
    scheme: &SchemeParams,
) -> f64 {
    let theta = scheme.theta;
    let dt = scheme.dt;
    let lam = model.phase.lambda;
    let mut e = 0.0;
    for (pc, pp) in curr.phase.phi.iter().zip(&prev.phase.phi) {
        e += 0.5 * lam * g_norm_pair_vec(&gradient(pc), &gradient(pp), theta);
    }
    e += lam * g_quadratic_pair(curr.phase.r, prev.phase.r, theta);
    e += 0.5 * g_quadratic_pair(curr.phase.q, prev.phase.q, theta);
    let (vel_weight, p_weight) = match model.flow.model {
        FlowModel::NavierStokes => (0.5, theta * theta * dt * dt / (2.0 * theta + 1.0)),
        FlowModel::Darcy => (
            0.5 * model.flow.inertia,
            theta * theta * dt * dt / (model.flow.inertia * (2.0 * theta + 1.0)),
        ),
    };
    e += vel_weight * g_norm_pair_vec(&curr.flow.u, &prev.flow.u, theta);
    e += p_weight * l2_norm_sq_vec(&gradient(&curr.flow.p));
    e
}

/// ∫ φ_k dx per stored phase.
pub fn total_mass(phase: &PhaseState) -> Vec<f64> {
    phase.phi.iter().map(integral).collect()
}
