//! Run configuration: one TOML file, every key optional, plus `--set
//! section.key=value` overrides applied before deserialisation.
//!
//! ```toml
//! [vehicle]
//! speed = 50.0          # m/s
//! range0 = 2500.0       # m
//! los0_deg = 0.0
//!
//! [integrator]
//! dt = 0.01             # s
//! capture_radius = 1.0  # m
//! t_max = 200.0         # s, single simulations only
//!
//! [grid]
//! heading0_deg = [10.0, 20.0]   # defaults to 10..170 step 10
//! desired_deg = [-10.0, -20.0]  # defaults to -170..-10 step 10
//! final_gains = [2.0, 2.5]      # defaults to 2.0..5.0 step 0.1
//! orientation_step = 0.1
//! t_max = 200.0
//! horizon_ladder = [400.0, 800.0, 1600.0]
//!
//! [training]
//! learning_rate = 0.001
//! epochs_a = 20000
//! epochs_b = 40000
//! train_fraction = 0.8
//! seed = 0
//!
//! [paths]
//! dataset_a = "problem_a.csv"
//! dataset_b = "problem_b.csv"
//! model_a = "model_a.json"
//! model_b = "model_b.json"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ppn_gain::kinematics::{IntegratorConfig, VehicleParams};
use ppn_gain::mlp::TrainConfig;
use ppn_gain::sweep::{GridSpec, Problem, SweepConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSection {
    pub speed: f64,
    pub range0: f64,
    pub los0_deg: f64,
}

impl Default for VehicleSection {
    fn default() -> Self {
        let v = SweepConfig::default().vehicle;
        Self { speed: v.speed, range0: v.range0, los0_deg: v.los0.to_degrees() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: f64,
    pub capture_radius: f64,
    pub t_max: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        Self { dt: c.dt, capture_radius: c.capture_radius, t_max: c.t_max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub learning_rate: f64,
    pub epochs_a: usize,
    pub epochs_b: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let a = TrainConfig::for_problem(Problem::A);
        let b = TrainConfig::for_problem(Problem::B);
        Self {
            learning_rate: a.learning_rate,
            epochs_a: a.epochs,
            epochs_b: b.epochs,
            train_fraction: a.train_fraction,
            seed: a.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub dataset_a: PathBuf,
    pub dataset_b: PathBuf,
    pub model_a: PathBuf,
    pub model_b: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        Self {
            dataset_a: "problem_a.csv".into(),
            dataset_b: "problem_b.csv".into(),
            model_a: "model_a.json".into(),
            model_b: "model_b.json".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub vehicle: VehicleSection,
    pub integrator: IntegratorSection,
    pub grid: GridSpec,
    pub training: TrainingSection,
    pub paths: PathsSection,
}

impl RunConfig {
    /// Load `path` (or the defaults) and apply `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                text.parse::<toml::Table>().with_context(|| format!("parsing config {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into().context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.vehicle_with_heading(0.0).validate().context("invalid [vehicle]")?;
        self.integrator().validate().context("invalid [integrator]")?;
        Ok(())
    }

    pub fn los0(&self) -> f64 {
        self.vehicle.los0_deg.to_radians()
    }

    pub fn vehicle_with_heading(&self, heading0_deg: f64) -> VehicleParams {
        VehicleParams {
            speed: self.vehicle.speed,
            range0: self.vehicle.range0,
            los0: self.los0(),
            heading0: heading0_deg.to_radians(),
        }
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig { dt: self.integrator.dt, capture_radius: self.integrator.capture_radius, t_max: self.integrator.t_max }
    }

    /// Integrator settings with the sweep horizon.
    pub fn integrator_for_grid(&self) -> IntegratorConfig {
        IntegratorConfig { t_max: self.grid.t_max, ..self.integrator() }
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig { vehicle: self.vehicle_with_heading(0.0), integrator: self.integrator(), grid: self.grid.clone() }
    }

    pub fn train_config(&self, problem: Problem) -> TrainConfig {
        let t = &self.training;
        TrainConfig {
            learning_rate: t.learning_rate,
            epochs: match problem {
                Problem::A => t.epochs_a,
                Problem::B => t.epochs_b,
            },
            train_fraction: t.train_fraction,
            seed: t.seed,
            ..TrainConfig::for_problem(problem)
        }
    }

    pub fn dataset_path(&self, problem: Problem) -> &Path {
        match problem {
            Problem::A => &self.paths.dataset_a,
            Problem::B => &self.paths.dataset_b,
        }
    }

    pub fn model_path(&self, problem: Problem) -> &Path {
        match problem {
            Problem::A => &self.paths.model_a,
            Problem::B => &self.paths.model_b,
        }
    }
}

/// `section.key=value`; the value is parsed as a TOML value and falls back
/// to a plain string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let Some((key, raw)) = spec.split_once('=') else {
        bail!("override {spec:?} is not of the form section.key=value");
    };
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut parts: Vec<&str> = key.trim().split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).with_context(|| format!("empty key in override {spec:?}"))?;
    let mut node = table;
    for p in parts {
        node = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .with_context(|| format!("override {spec:?}: {p} is not a table"))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_experiment() {
        let cfg = RunConfig::load(None, &[]).unwrap();
        assert_eq!(cfg.sweep(), SweepConfig::default());
        assert_eq!(cfg.train_config(Problem::B), TrainConfig::for_problem(Problem::B));
    }

    #[test]
    fn overrides_replace_file_values() {
        let dir = std::env::temp_dir().join(format!("ppn-gain-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "[vehicle]\nspeed = 40.0\n[grid]\nt_max = 300.0\n").unwrap();
        let cfg = RunConfig::load(Some(&path), &["grid.t_max=250".into(), "paths.model_a=m.json".into()]).unwrap();
        assert_eq!(cfg.vehicle.speed, 40.0);
        assert_eq!(cfg.grid.t_max, 250.0);
        assert_eq!(cfg.paths.model_a, PathBuf::from("m.json"));
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(RunConfig::load(None, &["vehicle.sped=40".into()]).is_err());
        assert!(RunConfig::load(None, &["vehicle.speed=-1".into()]).is_err());
        assert!(RunConfig::load(None, &["nonsense".into()]).is_err());
    }
}
