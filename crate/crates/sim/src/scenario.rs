//! Scenario files.
//!
//! A scenario is a TOML file whose relative paths resolve against its own
//! directory:
//!
//! ```toml
//! name = "crossing_reach"
//! robot = "desk_arm.toml"
//! environment = "desk.toml"          # optional
//! path = "crossing_reach_path.toml"
//! humans = ["crossing_reach.csv"]    # optional
//! thresholds = "thresholds.toml"     # optional override of the energy table
//! method = "sara"                    # optional, default sara
//! dt = 0.006
//! horizon = 20.0
//! seed = 1
//! start_s = 0.0                      # optional
//!
//! [human]                            # optional, defaults shown
//! max_speed = 1.6
//! meas_error = 0.0
//! meas_delay = 0.0
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use contact_shield::baselines::MethodId;
use contact_shield::human::{HumanConfig, MeasurementBuffer};
use contact_shield::robot::RobotModel;
use contact_shield::trajectory::{PathLimits, SplinePath};
use contact_shield::verification::{ContactEnergyTable, Environment};
use serde::{Deserialize, Serialize};

use crate::SimError;

/// On-disk form of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub robot: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<PathBuf>,
    pub path: PathBuf,
    #[serde(default)]
    pub humans: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<PathBuf>,
    #[serde(default = "default_method")]
    pub method: String,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub start_s: f64,
    #[serde(default)]
    pub human: HumanConfig,
}

fn default_method() -> String {
    MethodId::Sara.name().to_owned()
}

/// A scenario with every referenced file loaded and checked.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub model: RobotModel,
    pub environment: Environment,
    pub path: Arc<SplinePath>,
    pub limits: PathLimits,
    pub humans: MeasurementBuffer,
    pub human: HumanConfig,
    pub table: ContactEnergyTable,
    pub method: MethodId,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
    pub start_s: f64,
}

impl Scenario {
    /// Assembles and validates a scenario from loaded parts.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        model: RobotModel,
        environment: Environment,
        path: SplinePath,
        humans: MeasurementBuffer,
        human: HumanConfig,
        dt: f64,
        horizon: f64,
    ) -> Result<Self, SimError> {
        let limits = PathLimits::derive(&path, &model)?;
        let scn = Self {
            name: name.into(),
            model,
            environment,
            path: Arc::new(path),
            limits,
            humans,
            human,
            table: ContactEnergyTable::default(),
            method: MethodId::Sara,
            dt,
            horizon,
            seed: 0,
            start_s: 0.0,
        };
        scn.validate()?;
        Ok(scn)
    }

    /// Checks the settings that can be changed after loading.
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::Scenario(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(SimError::Scenario(format!("horizon must be non-negative, got {}", self.horizon)));
        }
        if !self.start_s.is_finite() {
            return Err(SimError::Scenario("start_s must be finite".into()));
        }
        Ok(self.human.validate()?)
    }

    pub fn from_file(file: impl AsRef<Path>) -> Result<Self, SimError> {
        let file = file.as_ref();
        let text = std::fs::read_to_string(file).map_err(|e| SimError::io(file.to_path_buf(), e))?;
        let doc: ScenarioFile = toml::from_str(&text).map_err(|e| SimError::Parse { path: file.to_path_buf(), message: e.to_string() })?;
        let dir = file.parent().unwrap_or(Path::new("."));
        Self::from_doc(doc, dir)
    }

    pub fn from_doc(doc: ScenarioFile, dir: &Path) -> Result<Self, SimError> {
        let at = |p: &Path| dir.join(p);
        let model = load(at(&doc.robot), RobotModel::from_file)?;
        let environment = match &doc.environment {
            Some(p) => load(at(p), Environment::from_file)?,
            None => Environment::default(),
        };
        let path = load(at(&doc.path), SplinePath::from_file)?;
        let mut humans = MeasurementBuffer::new();
        for trace in &doc.humans {
            let part = load(at(trace), MeasurementBuffer::from_path)?;
            humans.merge(part).map_err(|e| SimError::Scenario(format!("{}: {e}", trace.display())))?;
        }
        let method = doc.method.parse().map_err(SimError::Scenario)?;
        let mut s = Self::new(doc.name, model, environment, path, humans, doc.human, doc.dt, doc.horizon)?;
        if let Some(p) = &doc.thresholds {
            s.table = load(at(p), ContactEnergyTable::from_override_file)?;
        }
        s.method = method;
        s.seed = doc.seed;
        s.start_s = doc.start_s;
        Ok(s)
    }

    /// Number of control steps in the horizon.
    pub fn step_count(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

fn load<T, E: std::fmt::Display>(path: PathBuf, f: impl FnOnce(PathBuf) -> Result<T, E>) -> Result<T, SimError> {
    f(path.clone()).map_err(|e| SimError::Parse { message: e.to_string(), path })
}

/// Scenario files (`*.scenario.toml`) of a directory, sorted by name.
pub fn scenario_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, SimError> {
    let dir = dir.as_ref();
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| SimError::io(dir.to_path_buf(), e))? {
        let path = entry.map_err(|e| SimError::io(dir.to_path_buf(), e))?.path();
        if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".scenario.toml")) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
