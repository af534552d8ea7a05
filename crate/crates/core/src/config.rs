//! Run configuration: plain `key = value` files with flag overrides.
//!
//! Flags use the same key names as the file and win over it. Unknown keys are
//! rejected. Defaults follow the experiment: the dissipation and
//! phase-separation experiments carry their standard parameter sets, a custom
//! run must state its own time stepping.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::flow::{FlowModel, FlowParams};
use crate::phase::PhaseParams;
use crate::stepper::ModelParams;
use crate::{Error, Result};

/// Which driver the CLI dispatches to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Convergence,
    EnergyMass,
    PhaseSeparation,
    Custom,
}

impl ExperimentKind {
    fn parse(s: &str) -> Result<ExperimentKind> {
        match s {
            "convergence" => Ok(ExperimentKind::Convergence),
            "energy-mass" => Ok(ExperimentKind::EnergyMass),
            "phase-separation" => Ok(ExperimentKind::PhaseSeparation),
            "custom" => Ok(ExperimentKind::Custom),
            other => Err(Error::Config(format!(
                "unknown experiment '{other}' (expected convergence | energy-mass | phase-separation | custom)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::EnergyMass => "energy-mass",
            ExperimentKind::PhaseSeparation => "phase-separation",
            ExperimentKind::Custom => "custom",
        }
    }
}

/// Fully validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: FlowModel,
    pub experiment: ExperimentKind,
    pub components: usize,
    pub theta: f64,
    pub dt: f64,
    pub steps: usize,
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub mobility: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub alpha: f64,
    pub tau: f64,
    pub sav_c: f64,
    pub seed: u64,
    pub snapshot_stride: usize,
    pub out: PathBuf,
    pub dealias: bool,
    pub exact_first_step: bool,
}

impl RunConfig {
    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            phase: PhaseParams {
                components: self.components,
                mobility: self.mobility,
                lambda: self.lambda,
                epsilon: self.epsilon,
                sav_shift: self.sav_c,
            },
            flow: FlowParams {
                model: self.model,
                viscosity: self.nu,
                conductivity: self.alpha,
                inertia: self.tau,
            },
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "model",
    "experiment",
    "components",
    "theta",
    "dt",
    "steps",
    "t_final",
    "nx",
    "ny",
    "lx",
    "ly",
    "mobility",
    "lambda",
    "epsilon",
    "nu",
    "alpha",
    "tau",
    "sav_c",
    "seed",
    "snapshot_stride",
    "out",
    "dealias",
    "exact_first_step",
];

fn parse_kv_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

fn get_parsed<T: std::str::FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<T>()
            .map(Some)
            .map_err(|_| Error::Config(format!("invalid value '{raw}' for key '{key}'"))),
    }
}

fn get_bool(map: &HashMap<String, String>, key: &str) -> Result<Option<bool>> {
    match map.get(key).map(String::as_str) {
        None => Ok(None),
        Some("true") | Some("1") | Some("on") => Ok(Some(true)),
        Some("false") | Some("0") | Some("off") => Ok(Some(false)),
        Some(other) => Err(Error::Config(format!(
            "invalid boolean '{other}' for key '{key}'"
        ))),
    }
}

/// Parse a config file and apply `(key, value)` overrides on top, producing a
/// validated configuration.
pub fn parse_config(path: &Path, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut entries = parse_kv_file(path)?;
    entries.extend(overrides.iter().cloned());
    let mut map = HashMap::new();
    for (key, value) in entries {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        map.insert(key, value);
    }

    let model = match map.get("model").map(String::as_str) {
        Some("ns-cac") => FlowModel::NavierStokes,
        Some("d-cac") => FlowModel::Darcy,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown model '{other}' (expected ns-cac | d-cac)"
            )))
        }
        None => return Err(Error::Config("missing required key 'model'".into())),
    };
    let experiment = match map.get("experiment") {
        Some(s) => ExperimentKind::parse(s)?,
        None => ExperimentKind::Custom,
    };

    // Experiment-specific defaults; the standard parameter set otherwise.
    let is_sep = experiment == ExperimentKind::PhaseSeparation;
    let def_dt = match experiment {
        ExperimentKind::EnergyMass => Some(0.005),
        ExperimentKind::PhaseSeparation => Some(1e-4),
        ExperimentKind::Convergence => Some(1e-3),
        ExperimentKind::Custom => None,
    };
    let def_steps = match experiment {
        ExperimentKind::EnergyMass => Some(400),
        ExperimentKind::PhaseSeparation => Some(2000),
        ExperimentKind::Convergence => Some(100),
        ExperimentKind::Custom => None,
    };

    let components: usize = get_parsed(&map, "components")?.unwrap_or(if is_sep { 3 } else { 2 });
    let theta: f64 = get_parsed(&map, "theta")?.unwrap_or(0.6);
    if !(0.5..=1.0).contains(&theta) {
        return Err(Error::Config(format!(
            "theta = {theta} outside [1/2, 1]; the scheme is only energy-stable on that range"
        )));
    }
    let nx: usize = get_parsed(&map, "nx")?.unwrap_or(if is_sep { 128 } else { 64 });
    let ny: usize = get_parsed(&map, "ny")?.unwrap_or(nx);
    let lx: f64 = get_parsed(&map, "lx")?.unwrap_or(if is_sep { 1.0 } else { 2.0 });
    let ly: f64 = get_parsed(&map, "ly")?.unwrap_or(lx);

    let dt: f64 = match get_parsed(&map, "dt")? {
        Some(v) => v,
        None => def_dt.ok_or_else(|| Error::Config("missing required key 'dt'".into()))?,
    };
    if !(dt > 0.0) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    let steps_given: Option<usize> = get_parsed(&map, "steps")?;
    let t_final_given: Option<f64> = get_parsed(&map, "t_final")?;
    let steps = match (steps_given, t_final_given) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "give either 'steps' or 't_final', not both".into(),
            ))
        }
        (Some(s), None) => s,
        (None, Some(t)) => {
            if !(t > 0.0) {
                return Err(Error::Config(format!("t_final must be positive, got {t}")));
            }
            (t / dt).round().max(1.0) as usize
        }
        (None, None) => {
            def_steps.ok_or_else(|| Error::Config("missing 'steps' or 't_final'".into()))?
        }
    };

    let config = RunConfig {
        model,
        experiment,
        components,
        theta,
        dt,
        steps,
        nx,
        ny,
        lx,
        ly,
        mobility: get_parsed(&map, "mobility")?.unwrap_or(10.0),
        lambda: get_parsed(&map, "lambda")?.unwrap_or(if is_sep { 0.001 } else { 0.01 }),
        epsilon: get_parsed(&map, "epsilon")?.unwrap_or(if is_sep { 0.004 } else { 0.05 }),
        nu: get_parsed(&map, "nu")?.unwrap_or(1.0),
        alpha: get_parsed(&map, "alpha")?.unwrap_or(1000.0),
        tau: get_parsed(&map, "tau")?.unwrap_or(1.0),
        sav_c: get_parsed(&map, "sav_c")?.unwrap_or(10.0),
        seed: get_parsed(&map, "seed")?.unwrap_or(0),
        snapshot_stride: get_parsed(&map, "snapshot_stride")?.unwrap_or(0),
        out: map
            .get("out")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out")),
        dealias: get_bool(&map, "dealias")?.unwrap_or(false),
        exact_first_step: get_bool(&map, "exact_first_step")?.unwrap_or(false),
    };

    if config.components < 2 {
        return Err(Error::Config(format!(
            "components must be >= 2, got {}",
            config.components
        )));
    }
    if matches!(
        config.experiment,
        ExperimentKind::Convergence | ExperimentKind::PhaseSeparation
    ) && !(config.components == 2 || config.components == 3)
    {
        return Err(Error::Config(format!(
            "experiment '{}' supports 2 or 3 components, got {}",
            config.experiment.name(),
            config.components
        )));
    }
    if config.experiment == ExperimentKind::PhaseSeparation && config.components != 3 {
        return Err(Error::Config(
            "phase-separation experiment needs components = 3".into(),
        ));
    }
    config.model_params().validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> tempfile_path::TempPath {
        tempfile_path::write(content)
    }

    // Minimal helper keeping tests free of an external tempfile dependency.
    mod tempfile_path {
        use std::path::PathBuf;

        pub struct TempPath(pub PathBuf);

        impl Drop for TempPath {
            fn drop(&mut self) {
                let _ = std::fs::remove_file(&self.0);
            }
        }

        pub fn write(content: &str) -> TempPath {
            let mut path = std::env::temp_dir();
            let unique = format!(
                "cacflow-config-{}-{:?}.cfg",
                std::process::id(),
                std::thread::current().id()
            );
            path.push(unique);
            std::fs::write(&path, content).unwrap();
            TempPath(path)
        }
    }

    #[test]
    fn rejects_theta_outside_stability_range() {
        let tmp = write_tmp("model = ns-cac\ndt = 0.01\nsteps = 5\ntheta = 0.3\n");
        let err = parse_config(&tmp.0, &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("theta") && msg.contains("energy-stable"), "{msg}");
    }

    #[test]
    fn accepts_phase_separation_reference_config() {
        let tmp = write_tmp(
            "model = ns-cac\nexperiment = phase-separation\ncomponents = 3\n\
             nx = 256\nny = 256\nlx = 1\nly = 1\n\
             epsilon = 0.001\nmobility = 10\nlambda = 0.001\nsav_c = 10\nnu = 1\nalpha = 1000\n\
             theta = 0.6\ndt = 1e-4\n",
        );
        let cfg = parse_config(&tmp.0, &[]).unwrap();
        assert_eq!(cfg.components, 3);
        assert_eq!(cfg.nx, 256);
        assert_eq!(cfg.steps, 2000);
        assert!((cfg.theta - 0.6).abs() < 1e-15);
        assert!((cfg.epsilon - 0.001).abs() < 1e-18);
    }

    #[test]
    fn empty_file_with_flags_is_accepted() {
        let tmp = write_tmp("");
        let overrides: Vec<(String, String)> = [
            ("model", "d-cac"),
            ("dt", "0.01"),
            ("steps", "10"),
            ("theta", "0.75"),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        let cfg = parse_config(&tmp.0, &overrides).unwrap();
        assert_eq!(cfg.model, FlowModel::Darcy);
        assert_eq!(cfg.steps, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let tmp = write_tmp("model = ns-cac\ndt = 0.01\nsteps = 1\nbogus = 3\n");
        assert!(matches!(parse_config(&tmp.0, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn missing_model_is_an_error() {
        let tmp = write_tmp("dt = 0.01\nsteps = 1\n");
        let msg = parse_config(&tmp.0, &[]).unwrap_err().to_string();
        assert!(msg.contains("model"));
    }

    #[test]
    fn steps_and_t_final_conflict() {
        let tmp = write_tmp("model = ns-cac\ndt = 0.01\nsteps = 5\nt_final = 1\n");
        assert!(parse_config(&tmp.0, &[]).is_err());
        let tmp = write_tmp("model = ns-cac\ndt = 0.01\nt_final = 1\n");
        let cfg = parse_config(&tmp.0, &[]).unwrap();
        assert_eq!(cfg.steps, 100);
    }

    #[test]
    fn flags_override_file_values() {
        let tmp = write_tmp("model = ns-cac\ndt = 0.01\nsteps = 5\ntheta = 0.5\n");
        let cfg = parse_config(
            &tmp.0,
            &[("theta".to_string(), "1.0".to_string())],
        )
        .unwrap();
        assert_eq!(cfg.theta, 1.0);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let tmp = write_tmp("# a comment\n\nmodel = ns-cac # trailing\ndt = 0.01\nsteps = 2\n");
        let cfg = parse_config(&tmp.0, &[]).unwrap();
        assert_eq!(cfg.steps, 2);
    }
}
