//! Temporal-accuracy harness: manufactured-solution runs over a ladder of
//! time steps, max-norm errors at the final time, and observed orders.

use std::sync::Arc;

use crate::exact::{ExactSolution, ManufacturedForcing};
use crate::field::RealField;
use crate::grid::Grid;
use crate::ops::linf_norm;
use crate::stepper::{ModelParams, SchemeParams, Simulation};
use crate::Result;

/// L∞ distance between a computed field and exact values on the same grid.
pub fn linf_error(numeric: &RealField, exact: &RealField) -> f64 {
    linf_norm(&numeric.add_scaled(-1.0, exact))
}

/// Observed orders log2(e_i / e_{i+1}) for a halving time-step ladder.
/// Errors at or below the floor 1e-14 yield no rate (NaN) since they sit in
/// roundoff.
pub fn observed_order(errors: &[f64], dts: &[f64]) -> Vec<f64> {
    assert_eq!(errors.len(), dts.len());
    assert!(errors.len() >= 2, "need at least two levels for a rate");
    for w in dts.windows(2) {
        assert!(
            (w[0] / w[1] - 2.0).abs() < 1e-9,
            "time steps must halve, got {} then {}",
            w[0],
            w[1]
        );
    }
    errors
        .windows(2)
        .map(|e| {
            if e[0] <= 1e-14 || e[1] <= 1e-14 {
                f64::NAN
            } else {
                (e[0] / e[1]).log2()
            }
        })
        .collect()
}

/// Errors of one run at a fixed time step.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceCase {
    pub dt: f64,
    pub err_phi: f64,
    pub err_u: f64,
    pub err_p: f64,
}

/// Error ladder and observed orders for one θ.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub theta: f64,
    pub cases: Vec<ConvergenceCase>,
    pub orders_phi: Vec<f64>,
    pub orders_u: Vec<f64>,
    pub orders_p: Vec<f64>,
}

/// Settings of a convergence study.
#[derive(Clone, Debug)]
pub struct StudySettings {
    /// Final time of every run.
    pub t_final: f64,
    /// Halving ladder of time steps, coarsest first.
    pub dt_list: Vec<f64>,
    /// Start from exact data at t¹ instead of running the bootstrap step.
    pub exact_first_step: bool,
}

impl Default for StudySettings {
    fn default() -> Self {
        StudySettings {
            t_final: 0.1,
            dt_list: vec![1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5],
            exact_first_step: false,
        }
    }
}

/// Run the manufactured-solution problem at one (θ, Δt) and return the final
/// errors. The number of steps is t_final/Δt rounded to the nearest integer.
pub fn run_manufactured_case(
    grid: &Arc<Grid>,
    model: &ModelParams,
    theta: f64,
    dt: f64,
    settings: &StudySettings,
) -> Result<ConvergenceCase> {
    let exact = ExactSolution::for_components(model.phase.components);
    let scheme = SchemeParams { theta, dt };
    let steps = (settings.t_final / dt).round() as usize;
    let mut sim = if settings.exact_first_step {
        let s0 = exact.state(grid, 0.0, model);
        let s1 = exact.state(grid, dt, model);
        Simulation::from_two_levels(grid.clone(), *model, scheme, s0, s1)?
    } else {
        let s0 = exact.state(grid, 0.0, model);
        Simulation::new(
            grid.clone(),
            *model,
            scheme,
            s0.phase.phi,
            s0.flow.u,
            s0.flow.p,
        )?
    };
    sim.set_forcing(Box::new(ManufacturedForcing::new(exact.clone(), *model)));
    let start = sim.step_index();
    for _ in start..steps {
        sim.advance()?;
    }
    let t_end = sim.time();
    let state = sim.state();
    let phi_exact = exact.phi_fields(grid, t_end);
    let err_phi = state
        .phase
        .phi
        .iter()
        .zip(&phi_exact)
        .map(|(a, b)| linf_error(a, b))
        .fold(0.0f64, f64::max);
    let u_exact = exact.velocity_field(grid, t_end);
    let err_u = linf_error(&state.flow.u.x, &u_exact.x).max(linf_error(&state.flow.u.y, &u_exact.y));
    // Pressure is compared in the zero-mean gauge the solver works in.
    let p_exact = exact.pressure_field(grid, t_end);
    let pm = crate::ops::mean(&p_exact);
    let err_p = linf_error(&state.flow.p, &p_exact.map(|v| v - pm));
    Ok(ConvergenceCase {
        dt,
        err_phi,
        err_u,
        err_p,
    })
}

/// Full study: one report per θ.
pub fn run_convergence_study(
    grid: &Arc<Grid>,
    model: &ModelParams,
    thetas: &[f64],
    settings: &StudySettings,
) -> Result<Vec<ConvergenceReport>> {
    let mut reports = Vec::new();
    for &theta in thetas {
        let mut cases = Vec::new();
        for &dt in &settings.dt_list {
            cases.push(run_manufactured_case(grid, model, theta, dt, settings)?);
        }
        let dts: Vec<f64> = cases.iter().map(|c| c.dt).collect();
        let e_phi: Vec<f64> = cases.iter().map(|c| c.err_phi).collect();
        let e_u: Vec<f64> = cases.iter().map(|c| c.err_u).collect();
        let e_p: Vec<f64> = cases.iter().map(|c| c.err_p).collect();
        reports.push(ConvergenceReport {
            theta,
            orders_phi: observed_order(&e_phi, &dts),
            orders_u: observed_order(&e_u, &dts),
            orders_p: observed_order(&e_p, &dts),
            cases,
        });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowModel, FlowParams};
    use crate::phase::PhaseParams;

    pub(crate) fn benchmark_model(components: usize, fm: FlowModel) -> ModelParams {
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
    fn linf_error_examples() {
        let grid = Grid::new(16, 16, 2.0, 2.0).unwrap();
        let f = RealField::constant(&grid, 0.3);
        assert_eq!(linf_error(&f, &f), 0.0);
        let g = f.map(|v| v + 0.25);
        assert!((linf_error(&f, &g) - 0.25).abs() < 1e-15);
        // Elementwise oracle on random data.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2);
        let a = RealField::from_fn(&grid, |_, _| rng.gen::<f64>());
        let b = RealField::from_fn(&grid, |_, _| rng.gen::<f64>());
        let direct = a
            .data()
            .iter()
            .zip(b.data())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert_eq!(linf_error(&a, &b), direct);
    }

    #[test]
    fn observed_order_examples() {
        let o = observed_order(&[4.0, 1.0], &[2e-3, 1e-3]);
        assert!((o[0] - 2.0).abs() < 1e-14);
        let o = observed_order(&[8.0, 4.0], &[2e-3, 1e-3]);
        assert!((o[0] - 1.0).abs() < 1e-14);
        // Synthetic e = c·dt² recovers exactly 2 at every rung.
        let dts = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
        let errs: Vec<f64> = dts.iter().map(|d| 3.7 * d * d).collect();
        for o in observed_order(&errs, &dts) {
            assert!((o - 2.0).abs() < 1e-10);
        }
        // Roundoff-floor entries yield no rate.
        let o = observed_order(&[1e-15, 1e-15], &[2e-3, 1e-3]);
        assert!(o[0].is_nan());
    }

    #[test]
    fn short_ladder_is_second_order() {
        // Cheap smoke version of the acceptance study: one θ, coarse ladder.
        let grid = Grid::new(32, 32, 2.0, 2.0).unwrap();
        let model = benchmark_model(2, FlowModel::NavierStokes);
        let settings = StudySettings {
            t_final: 0.1,
            dt_list: vec![2e-3, 1e-3, 5e-4],
            exact_first_step: false,
        };
        let reports = run_convergence_study(&grid, &model, &[0.75], &settings).unwrap();
        let r = &reports[0];
        for (i, o) in r.orders_phi.iter().enumerate() {
            assert!((1.6..2.6).contains(o), "phi order {o:.2} at rung {i}: {:?}", r.cases);
        }
        for o in &r.orders_u {
            assert!((1.5..2.7).contains(o), "u order {o:.2}: {:?}", r.cases);
        }
    }

    #[test]
    fn grid_refinement_leaves_temporal_error_unchanged() {
        // Temporal error dominates: moving 64² → 96² changes the reported
        // error by well under 5%.
        let model = benchmark_model(2, FlowModel::NavierStokes);
        let settings = StudySettings::default();
        let mut errs = Vec::new();
        for n in [64usize, 96] {
            let grid = Grid::new(n, n, 2.0, 2.0).unwrap();
            let c = run_manufactured_case(&grid, &model, 0.75, 1e-3, &settings).unwrap();
            errs.push(c.err_phi);
        }
        let rel = (errs[0] - errs[1]).abs() / errs[1];
        assert!(rel < 0.05, "spatial sensitivity {rel:.3} ({errs:?})");
    }

    #[test]
    fn bootstrap_local_error_is_second_order() {
        // One start-up step from exact data: halving Δt must cut the error by
        // about four (the start-up scheme is locally O(Δt²)).
        let grid = Grid::new(32, 32, 2.0, 2.0).unwrap();
        let model = benchmark_model(2, FlowModel::NavierStokes);
        let exact = ExactSolution::two_component();
        let mut errs = Vec::new();
        for dt in [2e-3, 1e-3] {
            let s0 = exact.state(&grid, 0.0, &model);
            let mut sim = Simulation::new(
                grid.clone(),
                model,
                SchemeParams { theta: 0.75, dt },
                s0.phase.phi,
                s0.flow.u,
                s0.flow.p,
            )
            .unwrap();
            sim.set_forcing(Box::new(ManufacturedForcing::new(exact.clone(), model)));
            sim.advance().unwrap();
            let phi_exact = exact.phi_fields(&grid, dt);
            errs.push(linf_error(&sim.state().phase.phi[0], &phi_exact[0]));
        }
        let ratio = errs[0] / errs[1];
        assert!(
            (3.0..6.0).contains(&ratio),
            "local error ratio {ratio:.2} ({errs:?})"
        );
    }
}
