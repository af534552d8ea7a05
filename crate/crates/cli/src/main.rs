//! Command-line driver: parses a config file plus flag overrides, dispatches
//! one of the experiment drivers, and writes CSV diagnostics and binary
//! snapshots.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solvability violation,
//! 4 non-finite state, 5 I/O or snapshot error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use cacflow::config::{parse_config, ExperimentKind, RunConfig};
use cacflow::convergence::{run_convergence_study, StudySettings};
use cacflow::grid::Grid;
use cacflow::ic::{random_initial_state, RandomIc};
use cacflow::regions::count_phase_regions;
use cacflow::snapshot::write_snapshot;
use cacflow::stepper::{Diagnostics, Simulation};
use cacflow::Error;

#[derive(Parser)]
#[command(name = "cacflow", about = "Pseudo-spectral solver for conservative Allen-Cahn dynamics coupled with Navier-Stokes or Darcy flow", version)]
enum Cli {
    /// Run an experiment described by a config file (flags override keys).
    Run(Box<RunArgs>),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to a `key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// ns-cac | d-cac
    #[arg(long)]
    model: Option<String>,
    /// convergence | energy-mass | phase-separation | custom
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    components: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    t_final: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    ny: Option<String>,
    #[arg(long)]
    lx: Option<String>,
    #[arg(long)]
    ly: Option<String>,
    #[arg(long)]
    mobility: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    sav_c: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    snapshot_stride: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    dealias: Option<String>,
    #[arg(long)]
    exact_first_step: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |key: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((key.to_string(), v.clone()));
            }
        };
        push("model", &self.model);
        push("experiment", &self.experiment);
        push("components", &self.components);
        push("theta", &self.theta);
        push("dt", &self.dt);
        push("steps", &self.steps);
        push("t_final", &self.t_final);
        push("nx", &self.nx);
        push("ny", &self.ny);
        push("lx", &self.lx);
        push("ly", &self.ly);
        push("mobility", &self.mobility);
        push("lambda", &self.lambda);
        push("epsilon", &self.epsilon);
        push("nu", &self.nu);
        push("alpha", &self.alpha);
        push("tau", &self.tau);
        push("sav_c", &self.sav_c);
        push("seed", &self.seed);
        push("snapshot_stride", &self.snapshot_stride);
        push("out", &self.out);
        push("dealias", &self.dealias);
        push("exact_first_step", &self.exact_first_step);
        out
    }
}

fn main() -> ExitCode {
    let Cli::Run(args) = Cli::parse();
    let config = match parse_config(&args.config, &args.overrides()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match dispatch(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidGrid(_) => ExitCode::from(2),
                Error::Solvability { .. } => ExitCode::from(3),
                Error::NonFinite { .. } => ExitCode::from(4),
                _ => ExitCode::from(5),
            }
        }
    }
}

fn dispatch(config: &RunConfig) -> cacflow::Result<()> {
    std::fs::create_dir_all(&config.out)?;
    match config.experiment {
        ExperimentKind::Convergence => run_convergence(config),
        _ => run_time_loop(config),
    }
}

fn csv_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_diag_row(
    w: &mut BufWriter<File>,
    config: &RunConfig,
    d: &Diagnostics,
    area: f64,
) -> std::io::Result<()> {
    let mut row = format!("{},{}", d.step, csv_num(d.time));
    row.push_str(&format!(",{}", csv_num(d.energy)));
    // A single stored field describes two components: emit both masses.
    if config.components == 2 && d.mass.len() == 1 {
        row.push_str(&format!(",{}", csv_num(d.mass[0])));
        row.push_str(&format!(",{}", csv_num(area - d.mass[0])));
    } else {
        for m in &d.mass {
            row.push_str(&format!(",{}", csv_num(*m)));
        }
    }
    row.push_str(&format!(
        ",{},{},{},{},{}",
        csv_num(d.q),
        csv_num(d.r),
        csv_num(d.max_div_u),
        csv_num(d.margin_d),
        csv_num(d.margin_q)
    ));
    writeln!(w, "{row}")
}

fn run_time_loop(config: &RunConfig) -> cacflow::Result<()> {
    let started = Instant::now();
    let grid = Grid::new(config.nx, config.ny, config.lx, config.ly)?;
    let ic = match (config.experiment, config.components) {
        (ExperimentKind::PhaseSeparation, _) => RandomIc::ThreeComponentIndependent,
        (_, 2) => RandomIc::TwoComponent,
        (_, 3) => RandomIc::ThreeComponentUnitSum,
        (_, n) => {
            return Err(Error::Config(format!(
                "random initial data is defined for 2 or 3 components, got {n}"
            )))
        }
    };
    let (phi0, u0, p0) = random_initial_state(ic, config.seed, &grid);
    let mut sim = Simulation::new(
        grid.clone(),
        config.model_params(),
        cacflow::stepper::SchemeParams {
            theta: config.theta,
            dt: config.dt,
        },
        phi0,
        u0,
        p0,
    )?;
    sim.set_dealias(config.dealias);

    let diag_path = config.out.join("diagnostics.csv");
    let mut diag = BufWriter::new(File::create(&diag_path)?);
    let mass_cols: String = (1..=config.components)
        .map(|k| format!(",mass_{k}"))
        .collect();
    writeln!(
        diag,
        "step,time,modified_energy{mass_cols},q,r,max_div_u,margin_D,margin_q"
    )?;

    let init = sim.initial_diagnostics();
    let mut min_margin_d = f64::INFINITY;
    let mut min_margin_q = f64::INFINITY;
    let mut max_div = 0.0f64;
    let mut max_energy_rise = f64::NEG_INFINITY;
    let mut prev_energy = init.energy;
    let mut region_log: Vec<(usize, usize)> = Vec::new();
    let quarters: Vec<usize> = (1..=4).map(|q| config.steps * q / 4).collect();

    let mut failure: Option<Error> = None;
    for step in 1..=config.steps {
        let d = match sim.advance() {
            Ok(d) => d,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        write_diag_row(&mut diag, config, &d, grid.area())?;
        min_margin_d = min_margin_d.min(d.margin_d);
        min_margin_q = min_margin_q.min(d.margin_q);
        max_div = max_div.max(d.max_div_u);
        max_energy_rise = max_energy_rise.max(d.energy - prev_energy);
        prev_energy = d.energy;
        if config.snapshot_stride > 0 && step % config.snapshot_stride == 0 {
            dump_snapshot(config, &sim, step)?;
        }
        if config.experiment == ExperimentKind::PhaseSeparation && quarters.contains(&step) {
            region_log.push((step, count_phase_regions(&sim.state().phase.phi, 4)));
        }
    }
    diag.flush()?;

    let summary_path = config.out.join("summary.txt");
    let mut summary = BufWriter::new(File::create(&summary_path)?);
    writeln!(summary, "experiment = {}", config.experiment.name())?;
    writeln!(summary, "completed_steps = {}", sim.step_index())?;
    writeln!(summary, "final_time = {}", csv_num(sim.time()))?;
    writeln!(summary, "initial_energy = {}", csv_num(init.energy))?;
    writeln!(summary, "final_energy = {}", csv_num(prev_energy))?;
    writeln!(summary, "max_energy_rise = {}", csv_num(max_energy_rise))?;
    let final_mass = cacflow::stepper::total_mass(&sim.state().phase);
    for (k, (m, m0)) in final_mass.iter().zip(&init.mass).enumerate() {
        writeln!(summary, "mass_drift_{} = {}", k + 1, csv_num(m - m0))?;
    }
    writeln!(summary, "max_div_u = {}", csv_num(max_div))?;
    writeln!(summary, "min_margin_D = {}", csv_num(min_margin_d))?;
    writeln!(summary, "min_margin_q = {}", csv_num(min_margin_q))?;
    writeln!(summary, "final_q = {}", csv_num(sim.state().phase.q))?;
    writeln!(summary, "final_r = {}", csv_num(sim.state().phase.r))?;
    for (step, count) in &region_log {
        writeln!(summary, "phase_regions_at_{step} = {count}")?;
    }
    writeln!(summary, "elapsed_seconds = {:.3}", started.elapsed().as_secs_f64())?;
    if let Some(e) = &failure {
        writeln!(summary, "failed = {e}")?;
    }
    summary.flush()?;

    if let Some(e) = failure {
        return Err(e);
    }
    if config.snapshot_stride > 0 {
        // Always keep the final state on disk as well.
        dump_snapshot(config, &sim, sim.step_index())?;
    }
    println!(
        "{} finished: {} steps to t = {:.6}, energy {:.6e} -> {:.6e} ({:.2}s)",
        config.experiment.name(),
        sim.step_index(),
        sim.time(),
        init.energy,
        prev_energy,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn dump_snapshot(config: &RunConfig, sim: &Simulation, step: usize) -> cacflow::Result<()> {
    let state = sim.state();
    let base = config.out.join(format!("snapshot_{step:06}"));
    let names: Vec<String> = (1..=state.phase.phi.len())
        .map(|k| format!("phi_{k}"))
        .collect();
    let mut fields: Vec<(&str, &cacflow::RealField)> = names
        .iter()
        .map(String::as_str)
        .zip(state.phase.phi.iter())
        .collect();
    fields.push(("u", &state.flow.u.x));
    fields.push(("v", &state.flow.u.y));
    fields.push(("p", &state.flow.p));
    write_snapshot(&base, sim.time(), &fields)
}

fn run_convergence(config: &RunConfig) -> cacflow::Result<()> {
    let started = Instant::now();
    let grid = Grid::new(config.nx, config.ny, config.lx, config.ly)?;
    let model = config.model_params();
    let t_final = config.steps as f64 * config.dt;
    let settings = StudySettings {
        t_final,
        dt_list: (0..5).map(|i| config.dt / f64::powi(2.0, i)).collect(),
        exact_first_step: config.exact_first_step,
    };
    let reports = run_convergence_study(&grid, &model, &[config.theta], &settings)?;
    let path = config.out.join("convergence_report.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(
        w,
        "theta,dt,err_phi,err_u,err_p,order_phi,order_u,order_p"
    )?;
    for report in &reports {
        println!("theta = {}", report.theta);
        println!("{:>12} {:>13} {:>13} {:>13} {:>7} {:>7}", "dt", "err_phi", "err_u", "err_p", "o_phi", "o_u");
        for (i, c) in report.cases.iter().enumerate() {
            let (o_phi, o_u, o_p) = if i == 0 {
                (String::new(), String::new(), String::new())
            } else {
                (
                    csv_num(report.orders_phi[i - 1]),
                    csv_num(report.orders_u[i - 1]),
                    csv_num(report.orders_p[i - 1]),
                )
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                csv_num(report.theta),
                csv_num(c.dt),
                csv_num(c.err_phi),
                csv_num(c.err_u),
                csv_num(c.err_p),
                o_phi,
                o_u,
                o_p
            )?;
            let rate = |s: &String| {
                if s.is_empty() {
                    "-".to_string()
                } else {
                    format!("{:.2}", s.parse::<f64>().unwrap())
                }
            };
            println!(
                "{:>12.3e} {:>13.4e} {:>13.4e} {:>13.4e} {:>7} {:>7}",
                c.dt,
                c.err_phi,
                c.err_u,
                c.err_p,
                rate(&o_phi),
                rate(&o_u)
            );
        }
    }
    w.flush()?;
    println!(
        "convergence report written to {} ({:.2}s)",
        path.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

