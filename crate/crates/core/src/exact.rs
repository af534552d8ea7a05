//! Manufactured exact solutions and their forcing terms.
//!
//! The solution family used by the temporal-accuracy experiments:
//! every phase has the separable form φ_k = b_k + a_k·cos(t)·sin(πx)sin(πy),
//! the velocity is the solenoidal pair u = π sin(t) sin(2πy) sin²(πx),
//! v = -π sin(t) sin(2πx) sin²(πy), and p = sin(t) cos(πx) sin(πy). Forcing
//! fields are the residuals of these fields in the continuous model and are
//! evaluated analytically; integral (mean) terms use the grid quadrature,
//! which is exact because every integrand is a low-order trigonometric
//! polynomial.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::field::{RealField, VectorField};
use crate::flow::FlowModel;
use crate::grid::Grid;
use crate::ops::mean;
use crate::phase::PhaseState;
use crate::stepper::{Forcing, ModelParams, SimState};

/// One phase of the manufactured family: b + a·cos(t)·sin(πx)sin(πy).
#[derive(Clone, Copy, Debug)]
pub struct PhaseMode {
    pub base: f64,
    pub amp: f64,
}

/// The manufactured solution for a given component count.
#[derive(Clone, Debug)]
pub struct ExactSolution {
    pub modes: Vec<PhaseMode>,
    /// Amplitude of the flow fields; zero gives a quiescent exact solution.
    pub flow_amp: f64,
}

fn s(x: f64, y: f64) -> f64 {
    (PI * x).sin() * (PI * y).sin()
}

impl ExactSolution {
    /// Single-field description of the two-component mixture.
    pub fn two_component() -> ExactSolution {
        ExactSolution {
            modes: vec![PhaseMode {
                base: 0.5,
                amp: 0.5,
            }],
            flow_amp: 1.0,
        }
    }

    /// Three components with φ₃ = 1 - φ₁ - φ₂ (so b₃ = 0.4, a₃ = -0.03).
    pub fn three_component() -> ExactSolution {
        ExactSolution {
            modes: vec![
                PhaseMode {
                    base: 0.3,
                    amp: 0.01,
                },
                PhaseMode {
                    base: 0.3,
                    amp: 0.02,
                },
                PhaseMode {
                    base: 0.4,
                    amp: -0.03,
                },
            ],
            flow_amp: 1.0,
        }
    }

    pub fn for_components(components: usize) -> ExactSolution {
        match components {
            2 => ExactSolution::two_component(),
            3 => ExactSolution::three_component(),
            n => panic!("no manufactured solution for {n} components"),
        }
    }

    pub fn phi(&self, k: usize, x: f64, y: f64, t: f64) -> f64 {
        self.modes[k].base + self.modes[k].amp * t.cos() * s(x, y)
    }

    pub fn dphi_dt(&self, k: usize, x: f64, y: f64, t: f64) -> f64 {
        -self.modes[k].amp * t.sin() * s(x, y)
    }

    pub fn grad_phi(&self, k: usize, x: f64, y: f64, t: f64) -> (f64, f64) {
        let c = self.modes[k].amp * t.cos();
        (
            c * PI * (PI * x).cos() * (PI * y).sin(),
            c * PI * (PI * x).sin() * (PI * y).cos(),
        )
    }

    pub fn lap_phi(&self, k: usize, x: f64, y: f64, t: f64) -> f64 {
        -2.0 * PI * PI * self.modes[k].amp * t.cos() * s(x, y)
    }

    /// Gradient of Δφ_k (third derivatives).
    pub fn grad_lap_phi(&self, k: usize, x: f64, y: f64, t: f64) -> (f64, f64) {
        let c = -2.0 * PI * PI * self.modes[k].amp * t.cos();
        (
            c * PI * (PI * x).cos() * (PI * y).sin(),
            c * PI * (PI * x).sin() * (PI * y).cos(),
        )
    }

    pub fn velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let a = self.flow_amp;
        (
            a * PI * t.sin() * (2.0 * PI * y).sin() * (PI * x).sin().powi(2),
            -a * PI * t.sin() * (2.0 * PI * x).sin() * (PI * y).sin().powi(2),
        )
    }

    pub fn dvelocity_dt(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let a = self.flow_amp;
        (
            a * PI * t.cos() * (2.0 * PI * y).sin() * (PI * x).sin().powi(2),
            -a * PI * t.cos() * (2.0 * PI * x).sin() * (PI * y).sin().powi(2),
        )
    }

    /// Velocity Jacobian (∂x u, ∂y u, ∂x v, ∂y v).
    pub fn velocity_jacobian(&self, x: f64, y: f64, t: f64) -> (f64, f64, f64, f64) {
        let st = self.flow_amp * t.sin();
        let ux = PI * PI * st * (2.0 * PI * y).sin() * (2.0 * PI * x).sin();
        let uy = 2.0 * PI * PI * st * (2.0 * PI * y).cos() * (PI * x).sin().powi(2);
        let vx = -2.0 * PI * PI * st * (2.0 * PI * x).cos() * (PI * y).sin().powi(2);
        let vy = -PI * PI * st * (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
        (ux, uy, vx, vy)
    }

    pub fn lap_velocity(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let st = self.flow_amp * t.sin();
        let lap_u = PI.powi(3)
            * st
            * (2.0 * PI * y).sin()
            * (2.0 * (2.0 * PI * x).cos() - 4.0 * (PI * x).sin().powi(2));
        let lap_v = -PI.powi(3)
            * st
            * (2.0 * PI * x).sin()
            * (2.0 * (2.0 * PI * y).cos() - 4.0 * (PI * y).sin().powi(2));
        (lap_u, lap_v)
    }

    pub fn pressure(&self, x: f64, y: f64, t: f64) -> f64 {
        self.flow_amp * t.sin() * (PI * x).cos() * (PI * y).sin()
    }

    pub fn grad_pressure(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let st = self.flow_amp * t.sin();
        (
            -PI * st * (PI * x).sin() * (PI * y).sin(),
            PI * st * (PI * x).cos() * (PI * y).cos(),
        )
    }

    pub fn phi_fields(&self, grid: &Arc<Grid>, t: f64) -> Vec<RealField> {
        (0..self.modes.len())
            .map(|k| RealField::from_fn(grid, |x, y| self.phi(k, x, y, t)))
            .collect()
    }

    pub fn velocity_field(&self, grid: &Arc<Grid>, t: f64) -> VectorField {
        VectorField::new(
            RealField::from_fn(grid, |x, y| self.velocity(x, y, t).0),
            RealField::from_fn(grid, |x, y| self.velocity(x, y, t).1),
        )
    }

    pub fn pressure_field(&self, grid: &Arc<Grid>, t: f64) -> RealField {
        RealField::from_fn(grid, |x, y| self.pressure(x, y, t))
    }

    /// Full simulation state sampled from the exact solution, with μ from the
    /// constitutive relation and the auxiliary scalars at their continuous
    /// values. Used for start-up data in convergence runs.
    pub fn state(&self, grid: &Arc<Grid>, t: f64, model: &ModelParams) -> SimState {
        let phi = self.phi_fields(grid, t);
        let u = self.velocity_field(grid, t);
        let p = self.pressure_field(grid, t);
        let p_mean = mean(&p);
        let p = p.map(|v| v - p_mean);
        let lam = model.phase.lambda;
        let eps = model.phase.epsilon;
        let n = self.modes.len();
        let fbars = self.mean_free_potential_slopes(grid, t, eps);
        let mu: Vec<RealField> = (0..n)
            .map(|k| {
                RealField::from_fn(grid, |x, y| {
                    let beta = if n >= 3 {
                        -(0..n).map(|j| fbars.eval(j, x, y, t, self, eps)).sum::<f64>()
                            / n as f64
                    } else {
                        0.0
                    };
                    lam * (-self.lap_phi(k, x, y, t) + fbars.eval(k, x, y, t, self, eps) + beta)
                })
            })
            .collect();
        let r = crate::phase::sav_denominator(&phi, eps, model.phase.sav_shift);
        SimState {
            phase: PhaseState {
                phi,
                mu,
                r,
                q: 1.0,
            },
            flow: crate::flow::FlowState {
                u: u.clone(),
                u_tilde: u,
                p,
            },
        }
    }

    /// Spatial means of f(φ_k(·,·,t)) by grid quadrature (exact here).
    fn mean_free_potential_slopes(&self, grid: &Arc<Grid>, t: f64, eps: f64) -> PotentialMeans {
        let means = (0..self.modes.len())
            .map(|k| {
                let f = RealField::from_fn(grid, |x, y| well_slope(self.phi(k, x, y, t), eps));
                mean(&f)
            })
            .collect();
        PotentialMeans { means }
    }
}

/// f(φ) = φ(φ-1/2)(φ-1)/ε².
fn well_slope(phi: f64, eps: f64) -> f64 {
    phi * (phi - 0.5) * (phi - 1.0) / (eps * eps)
}

/// f'(φ) = (3φ² - 3φ + 1/2)/ε².
fn well_slope_deriv(phi: f64, eps: f64) -> f64 {
    (3.0 * phi * phi - 3.0 * phi + 0.5) / (eps * eps)
}

struct PotentialMeans {
    means: Vec<f64>,
}

impl PotentialMeans {
    /// Mean-free potential slope f̄_k at a point.
    fn eval(&self, k: usize, x: f64, y: f64, t: f64, ex: &ExactSolution, eps: f64) -> f64 {
        well_slope(ex.phi(k, x, y, t), eps) - self.means[k]
    }
}

/// Forcing fields that make the manufactured solution solve the model.
pub struct ManufacturedForcing {
    exact: ExactSolution,
    model: ModelParams,
}

impl ManufacturedForcing {
    pub fn new(exact: ExactSolution, model: ModelParams) -> ManufacturedForcing {
        ManufacturedForcing { exact, model }
    }

    /// Per-point capillary sum Σ_k φ_k ∂μ_k with analytic third derivatives.
    fn capillary(&self, grid: &Arc<Grid>, t: f64) -> VectorField {
        let ex = &self.exact;
        let eps = self.model.phase.epsilon;
        let lam = self.model.phase.lambda;
        let n = ex.modes.len();
        let fx = RealField::from_fn(grid, |x, y| {
            let (gbx, _) = beta_gradient(ex, x, y, t, eps, n);
            (0..n)
                .map(|k| {
                    let (glx, _) = ex.grad_lap_phi(k, x, y, t);
                    let (gpx, _) = ex.grad_phi(k, x, y, t);
                    let dmu = lam
                        * (-glx + well_slope_deriv(ex.phi(k, x, y, t), eps) * gpx + gbx);
                    ex.phi(k, x, y, t) * dmu
                })
                .sum()
        });
        let fy = RealField::from_fn(grid, |x, y| {
            let (_, gby) = beta_gradient(ex, x, y, t, eps, n);
            (0..n)
                .map(|k| {
                    let (_, gly) = ex.grad_lap_phi(k, x, y, t);
                    let (_, gpy) = ex.grad_phi(k, x, y, t);
                    let dmu = lam
                        * (-gly + well_slope_deriv(ex.phi(k, x, y, t), eps) * gpy + gby);
                    ex.phi(k, x, y, t) * dmu
                })
                .sum()
        });
        VectorField::new(fx, fy)
    }
}

/// ∇β = -(1/N)·Σ_j f'(φ_j)∇φ_j; zero in the single-field description.
fn beta_gradient(
    ex: &ExactSolution,
    x: f64,
    y: f64,
    t: f64,
    eps: f64,
    n: usize,
) -> (f64, f64) {
    if n < 3 {
        return (0.0, 0.0);
    }
    let mut gx = 0.0;
    let mut gy = 0.0;
    for j in 0..n {
        let slope = well_slope_deriv(ex.phi(j, x, y, t), eps);
        let (px, py) = ex.grad_phi(j, x, y, t);
        gx += slope * px;
        gy += slope * py;
    }
    (-gx / n as f64, -gy / n as f64)
}

impl Forcing for ManufacturedForcing {
    fn phase(&self, grid: &Arc<Grid>, t: f64) -> Vec<RealField> {
        let ex = &self.exact;
        let eps = self.model.phase.epsilon;
        let lam = self.model.phase.lambda;
        let mob = self.model.phase.mobility;
        let n = ex.modes.len();
        let means = ex.mean_free_potential_slopes(grid, t, eps);
        (0..n)
            .map(|k| {
                RealField::from_fn(grid, |x, y| {
                    let (u, v) = ex.velocity(x, y, t);
                    let (ux, _, _, vy) = ex.velocity_jacobian(x, y, t);
                    let (px, py) = ex.grad_phi(k, x, y, t);
                    let transport =
                        u * px + v * py + ex.phi(k, x, y, t) * (ux + vy);
                    let beta = if n >= 3 {
                        -(0..n).map(|j| means.eval(j, x, y, t, ex, eps)).sum::<f64>() / n as f64
                    } else {
                        0.0
                    };
                    let mu = lam
                        * (-ex.lap_phi(k, x, y, t) + means.eval(k, x, y, t, ex, eps) + beta);
                    ex.dphi_dt(k, x, y, t) + transport + mob * mu
                })
            })
            .collect()
    }

    fn momentum(&self, grid: &Arc<Grid>, t: f64) -> VectorField {
        let ex = &self.exact;
        let cap = self.capillary(grid, t);
        let base = match self.model.flow.model {
            FlowModel::NavierStokes => {
                let nu = self.model.flow.viscosity;
                VectorField::new(
                    RealField::from_fn(grid, |x, y| {
                        let (u, v) = ex.velocity(x, y, t);
                        let (ut, _) = ex.dvelocity_dt(x, y, t);
                        let (ux, uy, _, _) = ex.velocity_jacobian(x, y, t);
                        let (lu, _) = ex.lap_velocity(x, y, t);
                        let (gpx, _) = ex.grad_pressure(x, y, t);
                        ut + u * ux + v * uy - nu * lu + gpx
                    }),
                    RealField::from_fn(grid, |x, y| {
                        let (u, v) = ex.velocity(x, y, t);
                        let (_, vt) = ex.dvelocity_dt(x, y, t);
                        let (_, _, vx, vy) = ex.velocity_jacobian(x, y, t);
                        let (_, lv) = ex.lap_velocity(x, y, t);
                        let (_, gpy) = ex.grad_pressure(x, y, t);
                        vt + u * vx + v * vy - nu * lv + gpy
                    }),
                )
            }
            FlowModel::Darcy => {
                let tau = self.model.flow.inertia;
                let drag = self.model.flow.conductivity * self.model.flow.viscosity;
                VectorField::new(
                    RealField::from_fn(grid, |x, y| {
                        let (u, _) = ex.velocity(x, y, t);
                        let (ut, _) = ex.dvelocity_dt(x, y, t);
                        let (gpx, _) = ex.grad_pressure(x, y, t);
                        tau * ut + drag * u + gpx
                    }),
                    RealField::from_fn(grid, |x, y| {
                        let (_, v) = ex.velocity(x, y, t);
                        let (_, vt) = ex.dvelocity_dt(x, y, t);
                        let (_, gpy) = ex.grad_pressure(x, y, t);
                        tau * vt + drag * v + gpy
                    }),
                )
            }
        };
        base.add_scaled(1.0, &cap)
    }
}
