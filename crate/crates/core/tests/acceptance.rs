//! Acceptance suite: every release gate runs here, one test per criterion,
//! each printing a PASS line with the measured numbers. Heavy trajectories
//! are shared between criteria through lazy statics.
//!
//! Run with `cargo test -p cacflow --test acceptance -- --nocapture`.

use std::sync::OnceLock;
use std::time::Instant;

use cacflow::convergence::{run_convergence_study, ConvergenceReport, StudySettings};
use cacflow::field::RealField;
use cacflow::flow::{FlowModel, FlowParams};
use cacflow::gnorm::{stencil_identity_fields, stencil_identity_scalars};
use cacflow::grid::Grid;
use cacflow::ic::{random_initial_state, RandomIc};
use cacflow::phase::PhaseParams;
use cacflow::regions::count_phase_regions;
use cacflow::residuals::scheme_residuals;
use cacflow::stencil::TimeStencil;
use cacflow::stepper::{advance_state, ModelParams, SchemeParams, Simulation};

const THETAS_CONV: [f64; 3] = [0.5, 0.75, 1.0];
const THETAS_ENERGY: [f64; 4] = [0.5, 0.6, 0.75, 1.0];

fn benchmark_model(components: usize, fm: FlowModel) -> ModelParams {
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

// ---------------------------------------------------------------- criteria 1-2

struct ConvergenceOutcome {
    label: &'static str,
    reports: Vec<ConvergenceReport>,
    seconds_per_theta: f64,
}

fn convergence_outcome(components: usize, fm: FlowModel, label: &'static str) -> ConvergenceOutcome {
    let grid = Grid::new(64, 64, 2.0, 2.0).unwrap();
    let model = benchmark_model(components, fm);
    let settings = StudySettings::default();
    let start = Instant::now();
    let reports = run_convergence_study(&grid, &model, &THETAS_CONV, &settings).unwrap();
    ConvergenceOutcome {
        label,
        reports,
        seconds_per_theta: start.elapsed().as_secs_f64() / THETAS_CONV.len() as f64,
    }
}

fn check_second_order(outcome: &ConvergenceOutcome, criterion: &str) {
    for report in &outcome.reports {
        let pairs = report.orders_phi.len();
        // The three finest pairs of the five-step ladder.
        for i in pairs - 3..pairs {
            let o_phi = report.orders_phi[i];
            let o_u = report.orders_u[i];
            assert!(
                (1.7..=2.3).contains(&o_phi),
                "{}: phi order {o_phi:.3} out of [1.7, 2.3] at theta={} pair {i} ({:?})",
                outcome.label,
                report.theta,
                report.cases
            );
            assert!(
                (1.7..=2.3).contains(&o_u),
                "{}: u order {o_u:.3} out of [1.7, 2.3] at theta={} pair {i} ({:?})",
                outcome.label,
                report.theta,
                report.cases
            );
        }
    }
    assert!(
        outcome.seconds_per_theta < 120.0,
        "{}: {:.1}s per theta exceeds the 2-minute budget",
        outcome.label,
        outcome.seconds_per_theta
    );
    let orders: Vec<String> = outcome
        .reports
        .iter()
        .map(|r| {
            format!(
                "theta {}: phi {:.2}/{:.2}/{:.2}, u {:.2}/{:.2}/{:.2}",
                r.theta,
                r.orders_phi[1],
                r.orders_phi[2],
                r.orders_phi[3],
                r.orders_u[1],
                r.orders_u[2],
                r.orders_u[3]
            )
        })
        .collect();
    println!(
        "ACCEPTANCE {criterion} ({}): PASS [{}; {:.1}s/theta]",
        outcome.label,
        orders.join(" | "),
        outcome.seconds_per_theta
    );
}

static CONV_NS2: OnceLock<ConvergenceOutcome> = OnceLock::new();
static CONV_D2: OnceLock<ConvergenceOutcome> = OnceLock::new();
static CONV_NS3: OnceLock<ConvergenceOutcome> = OnceLock::new();
static CONV_D3: OnceLock<ConvergenceOutcome> = OnceLock::new();

#[test]
fn criterion_01_temporal_convergence_ns_two_components() {
    let outcome =
        CONV_NS2.get_or_init(|| convergence_outcome(2, FlowModel::NavierStokes, "NS-CAC 2-comp"));
    check_second_order(outcome, "1");
}

#[test]
fn criterion_02a_temporal_convergence_darcy_two_components() {
    let outcome = CONV_D2.get_or_init(|| convergence_outcome(2, FlowModel::Darcy, "D-CAC 2-comp"));
    check_second_order(outcome, "2");
}

#[test]
fn criterion_02b_temporal_convergence_ns_three_components() {
    let outcome =
        CONV_NS3.get_or_init(|| convergence_outcome(3, FlowModel::NavierStokes, "NS-CAC 3-comp"));
    check_second_order(outcome, "2");
}

#[test]
fn criterion_02c_temporal_convergence_darcy_three_components() {
    let outcome = CONV_D3.get_or_init(|| convergence_outcome(3, FlowModel::Darcy, "D-CAC 3-comp"));
    check_second_order(outcome, "2");
}

// --------------------------------------------------------------- criteria 3-6, 9

struct DissipationRun {
    label: String,
    theta: f64,
    energy_violations: usize,
    worst_energy_rise: f64,
    initial_energy: f64,
    max_mass_drift: f64,
    max_sum_deviation: f64,
    max_div_rel: f64,
    min_margin_d: f64,
    min_margin_q: f64,
}

fn dissipation_run(components: usize, fm: FlowModel, theta: f64, seed: u64) -> DissipationRun {
    let grid = Grid::new(64, 64, 2.0, 2.0).unwrap();
    let model = benchmark_model(components, fm);
    let ic = if components == 2 {
        RandomIc::TwoComponent
    } else {
        RandomIc::ThreeComponentUnitSum
    };
    let (phi0, u0, p0) = random_initial_state(ic, seed, &grid);
    let mass0: Vec<f64> = phi0.iter().map(cacflow::ops::integral).collect();
    let mut sim = Simulation::new(
        grid.clone(),
        model,
        SchemeParams { theta, dt: 0.005 },
        phi0,
        u0,
        p0,
    )
    .unwrap();
    let e0 = sim.initial_diagnostics().energy;
    let mut prev_e = e0;
    let mut run = DissipationRun {
        label: format!("{fm:?} {components}-comp"),
        theta,
        energy_violations: 0,
        worst_energy_rise: f64::NEG_INFINITY,
        initial_energy: e0,
        max_mass_drift: 0.0,
        max_sum_deviation: 0.0,
        max_div_rel: 0.0,
        min_margin_d: f64::INFINITY,
        min_margin_q: f64::INFINITY,
    };
    for _ in 0..400 {
        let d = sim.advance().unwrap();
        let rise = d.energy - prev_e;
        run.worst_energy_rise = run.worst_energy_rise.max(rise);
        if rise > 1e-10 * e0.abs() {
            run.energy_violations += 1;
        }
        prev_e = d.energy;
        for (m, m0) in d.mass.iter().zip(&mass0) {
            run.max_mass_drift = run.max_mass_drift.max((m - m0).abs());
        }
        if components == 3 {
            let s = sim.state();
            let sum = s.phase.phi[0]
                .add_scaled(1.0, &s.phase.phi[1])
                .add_scaled(1.0, &s.phase.phi[2]);
            run.max_sum_deviation = run
                .max_sum_deviation
                .max(sum.map(|v| v - 1.0).max_abs());
        }
        let umax = sim.state().flow.u.max_abs();
        run.max_div_rel = run.max_div_rel.max(d.max_div_u / (1.0 + umax));
        run.min_margin_d = run.min_margin_d.min(d.margin_d);
        run.min_margin_q = run.min_margin_q.min(d.margin_q);
    }
    run
}

static DISSIPATION: OnceLock<Vec<DissipationRun>> = OnceLock::new();

fn dissipation_runs() -> &'static Vec<DissipationRun> {
    DISSIPATION.get_or_init(|| {
        let mut runs = Vec::new();
        for fm in [FlowModel::NavierStokes, FlowModel::Darcy] {
            for components in [2usize, 3] {
                for (i, &theta) in THETAS_ENERGY.iter().enumerate() {
                    runs.push(dissipation_run(components, fm, theta, 1000 + i as u64));
                }
            }
        }
        runs
    })
}

#[test]
fn criterion_03_modified_energy_dissipation() {
    let runs = dissipation_runs();
    let mut worst: f64 = f64::NEG_INFINITY;
    for run in runs {
        assert_eq!(
            run.energy_violations, 0,
            "{} theta={}: {} energy violations (worst rise {:.3e}, scale {:.3e})",
            run.label, run.theta, run.energy_violations, run.worst_energy_rise, run.initial_energy
        );
        worst = worst.max(run.worst_energy_rise / run.initial_energy.abs());
    }
    println!(
        "ACCEPTANCE 3 (energy dissipation): PASS [{} runs, worst relative rise {worst:.2e}]",
        runs.len()
    );
}

#[test]
fn criterion_04_mass_conservation() {
    let area = 4.0;
    let mut worst: f64 = 0.0;
    for run in dissipation_runs() {
        assert!(
            run.max_mass_drift <= 1e-10 * area,
            "{} theta={}: mass drift {:.3e} exceeds {:.3e}",
            run.label,
            run.theta,
            run.max_mass_drift,
            1e-10 * area
        );
        worst = worst.max(run.max_mass_drift);
    }
    println!("ACCEPTANCE 4 (mass conservation): PASS [worst drift {worst:.2e} vs gate 4e-10]");
}

#[test]
fn criterion_05_unit_sum_three_components() {
    let mut worst: f64 = 0.0;
    for run in dissipation_runs().iter().filter(|r| r.label.contains("3-comp")) {
        assert!(
            run.max_sum_deviation <= 1e-10,
            "{} theta={}: sum deviation {:.3e}",
            run.label,
            run.theta,
            run.max_sum_deviation
        );
        worst = worst.max(run.max_sum_deviation);
    }
    println!("ACCEPTANCE 5 (sum-to-one): PASS [worst deviation {worst:.2e} vs gate 1e-10]");
}

#[test]
fn criterion_06_divergence_free_velocity() {
    let mut worst: f64 = 0.0;
    for run in dissipation_runs() {
        assert!(
            run.max_div_rel <= 1e-10,
            "{} theta={}: relative divergence {:.3e}",
            run.label,
            run.theta,
            run.max_div_rel
        );
        worst = worst.max(run.max_div_rel);
    }
    for sep in phase_separation_runs() {
        assert!(
            sep.max_div_rel <= 1e-10,
            "{}: relative divergence {:.3e}",
            sep.label,
            sep.max_div_rel
        );
        worst = worst.max(sep.max_div_rel);
    }
    println!("ACCEPTANCE 6 (divergence-free): PASS [worst {worst:.2e} vs gate 1e-10]");
}

#[test]
fn criterion_09_solvability_margins() {
    let mut min_d = f64::INFINITY;
    let mut min_q = f64::INFINITY;
    for run in dissipation_runs() {
        assert!(
            run.min_margin_d > 0.0 && run.min_margin_q > 0.0,
            "{} theta={}: margins D={:.3e}, q={:.3e}",
            run.label,
            run.theta,
            run.min_margin_d,
            run.min_margin_q
        );
        min_d = min_d.min(run.min_margin_d);
        min_q = min_q.min(run.min_margin_q);
    }
    for sep in phase_separation_runs() {
        assert!(sep.min_margin_d > 0.0 && sep.min_margin_q > 0.0, "{}", sep.label);
        min_d = min_d.min(sep.min_margin_d);
        min_q = min_q.min(sep.min_margin_q);
    }
    println!("ACCEPTANCE 9 (solvability margins): PASS [min D {min_d:.3e}, min q-margin {min_q:.3e}]");
}

// -------------------------------------------------------------------- criterion 7

#[test]
fn criterion_07_stencil_gnorm_identity() {
    use rand::{Rng, SeedableRng};
    let grid = Grid::new(32, 32, 2.0, 2.0).unwrap();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
    let thetas = [0.5, 0.6, 0.75, 0.9, 1.0];
    let mut worst: f64 = 0.0;
    // 1000 field triples spread over the five θ values.
    for (i, &theta) in (0..1000).map(|i| (i, &thetas[i % 5])) {
        let w2 = RealField::from_fn(&grid, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let w1 = RealField::from_fn(&grid, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let w0 = RealField::from_fn(&grid, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let (lhs, rhs) = stencil_identity_fields(&w2, &w1, &w0, theta);
        let rel = (lhs - rhs).abs() / (1.0 + lhs.abs());
        assert!(rel <= 1e-12, "field identity broke at trial {i}, theta {theta}: {rel:.3e}");
        worst = worst.max(rel);
    }
    for (i, &theta) in (0..1000).map(|i| (i, &thetas[i % 5])) {
        let (a, b, c) = (
            rng.gen::<f64>() * 4.0 - 2.0,
            rng.gen::<f64>() * 4.0 - 2.0,
            rng.gen::<f64>() * 4.0 - 2.0,
        );
        let (lhs, rhs) = stencil_identity_scalars(a, b, c, theta);
        let rel = (lhs - rhs).abs() / (1.0 + lhs.abs());
        assert!(rel <= 1e-12, "scalar identity broke at trial {i}: {rel:.3e}");
        worst = worst.max(rel);
    }
    println!("ACCEPTANCE 7 (G-norm stencil identity): PASS [worst relative gap {worst:.2e}]");
}

// -------------------------------------------------------------------- criterion 8

#[test]
fn criterion_08_scheme_residuals_on_random_steps() {
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for (components, fm, ic, theta) in [
        (2, FlowModel::NavierStokes, RandomIc::TwoComponent, 0.75),
        (3, FlowModel::NavierStokes, RandomIc::ThreeComponentUnitSum, 0.6),
        (2, FlowModel::Darcy, RandomIc::TwoComponent, 1.0),
        (3, FlowModel::Darcy, RandomIc::ThreeComponentUnitSum, 0.5),
    ] {
        let grid = Grid::new(64, 64, 2.0, 2.0).unwrap();
        let model = benchmark_model(components, fm);
        let (phi0, u0, p0) = random_initial_state(ic, 4242, &grid);
        let scheme = SchemeParams { theta, dt: 0.005 };
        let mut sim = Simulation::new(grid, model, scheme, phi0, u0, p0).unwrap();
        sim.advance().unwrap();
        for step in 1..=5 {
            let st = TimeStencil::second_order(theta, scheme.dt);
            let prev = sim.prev_state().clone();
            let curr = sim.state().clone();
            let (next, _) = advance_state(&st, &model, &prev, &curr, None, step, false).unwrap();
            let res = scheme_residuals(&st, &model, &prev, &curr, &next, None, step);
            assert!(
                res.max() <= 1e-10,
                "residuals {res:?} at step {step} ({components}-comp {fm:?})"
            );
            worst = worst.max(res.max());
            checked += 1;
            sim.advance().unwrap();
        }
    }
    assert_eq!(checked, 20);
    println!("ACCEPTANCE 8 (scheme residuals): PASS [20 steps, worst relative residual {worst:.2e}]");
}

// ------------------------------------------------------------------- criterion 10

struct PhaseSeparationRun {
    label: String,
    initial_energy: f64,
    final_energy: f64,
    worst_energy_rise: f64,
    max_mass_drift: f64,
    region_counts: Vec<(usize, usize)>,
    max_div_rel: f64,
    min_margin_d: f64,
    min_margin_q: f64,
}

fn phase_separation_run(fm: FlowModel) -> PhaseSeparationRun {
    let grid = Grid::new(128, 128, 1.0, 1.0).unwrap();
    let model = ModelParams {
        phase: PhaseParams {
            components: 3,
            mobility: 10.0,
            lambda: 0.001,
            epsilon: 0.004,
            sav_shift: 10.0,
        },
        flow: FlowParams {
            model: fm,
            viscosity: 1.0,
            conductivity: 1000.0,
            inertia: 1.0,
        },
    };
    let (phi0, u0, p0) = random_initial_state(RandomIc::ThreeComponentIndependent, 2024, &grid);
    let mass0: Vec<f64> = phi0.iter().map(cacflow::ops::integral).collect();
    let mut sim = Simulation::new(
        grid,
        model,
        SchemeParams {
            theta: 0.6,
            dt: 1e-4,
        },
        phi0,
        u0,
        p0,
    )
    .unwrap();
    let e0 = sim.initial_diagnostics().energy;
    let mut prev_e = e0;
    let mut run = PhaseSeparationRun {
        label: format!("phase separation {fm:?}"),
        initial_energy: e0,
        final_energy: e0,
        worst_energy_rise: f64::NEG_INFINITY,
        max_mass_drift: 0.0,
        region_counts: Vec::new(),
        max_div_rel: 0.0,
        min_margin_d: f64::INFINITY,
        min_margin_q: f64::INFINITY,
    };
    // Region counts sampled after the spinodal stage (first half of the run).
    let checkpoints = [1000usize, 1500, 2000];
    for step in 1..=2000usize {
        let d = sim.advance().unwrap();
        run.worst_energy_rise = run.worst_energy_rise.max(d.energy - prev_e);
        prev_e = d.energy;
        for (m, m0) in d.mass.iter().zip(&mass0) {
            run.max_mass_drift = run.max_mass_drift.max((m - m0).abs());
        }
        let umax = sim.state().flow.u.max_abs();
        run.max_div_rel = run.max_div_rel.max(d.max_div_u / (1.0 + umax));
        run.min_margin_d = run.min_margin_d.min(d.margin_d);
        run.min_margin_q = run.min_margin_q.min(d.margin_q);
        if checkpoints.contains(&step) {
            run.region_counts
                .push((step, count_phase_regions(&sim.state().phase.phi, 4)));
        }
    }
    run.final_energy = prev_e;
    run
}

static PHASE_SEP: OnceLock<Vec<PhaseSeparationRun>> = OnceLock::new();

fn phase_separation_runs() -> &'static Vec<PhaseSeparationRun> {
    PHASE_SEP.get_or_init(|| {
        [FlowModel::NavierStokes, FlowModel::Darcy]
            .into_iter()
            .map(phase_separation_run)
            .collect()
    })
}

#[test]
fn criterion_10_phase_separation_coarsening() {
    for run in phase_separation_runs() {
        assert!(
            run.final_energy < run.initial_energy,
            "{}: energy did not decrease ({} -> {})",
            run.label,
            run.initial_energy,
            run.final_energy
        );
        assert!(
            run.worst_energy_rise <= 1e-10 * run.initial_energy.abs(),
            "{}: energy rise {:.3e}",
            run.label,
            run.worst_energy_rise
        );
        assert!(
            run.max_mass_drift <= 1e-10,
            "{}: mass drift {:.3e} exceeds 1e-10·|Ω|",
            run.label,
            run.max_mass_drift
        );
        for pair in run.region_counts.windows(2) {
            assert!(
                pair[1].1 <= pair[0].1,
                "{}: region count grew {} -> {} between steps {} and {}",
                run.label,
                pair[0].1,
                pair[1].1,
                pair[0].0,
                pair[1].0
            );
        }
        println!(
            "ACCEPTANCE 10 ({}): PASS [energy {:.4e} -> {:.4e}, mass drift {:.2e}, regions {:?}]",
            run.label,
            run.initial_energy,
            run.final_energy,
            run.max_mass_drift,
            run.region_counts
        );
    }
}
