//! Scenario configuration: a JSON document with matrices written as nested
//! arrays of numbers. Every field is optional; missing values fall back to
//! the single-mode example data.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;

/// Validation failure, tagged with the offending field path.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    OneMode,
    MeasurementSequence,
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::OneMode => "one_mode",
            ScenarioKind::MeasurementSequence => "measurement_sequence",
            ScenarioKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "one_mode" => Some(Self::OneMode),
            "measurement_sequence" => Some(Self::MeasurementSequence),
            "custom" => Some(Self::Custom),
            _ => None,
        }
    }
}

/// Row-major nested array literal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixLiteral(pub Vec<Vec<f64>>);

impl MatrixLiteral {
    pub fn to_matrix(&self, path: &str) -> Result<Matrix, ConfigError> {
        let rows = self.0.len();
        if rows == 0 {
            return Err(ConfigError::new(path, "matrix has no rows"));
        }
        let cols = self.0[0].len();
        if cols == 0 {
            return Err(ConfigError::new(path, "matrix has no columns"));
        }
        if let Some(bad) = self.0.iter().position(|r| r.len() != cols) {
            return Err(ConfigError::new(
                format!("{path}[{bad}]"),
                format!("row has {} entries, expected {cols}", self.0[bad].len()),
            ));
        }
        for (i, row) in self.0.iter().enumerate() {
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(ConfigError::new(
                    format!("{path}[{i}][{j}]"),
                    "non-finite entry",
                ));
            }
        }
        Ok(Matrix::from_fn(rows, cols, |i, j| self.0[i][j]))
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        Self(m.row_iter().map(|r| r.iter().copied().collect()).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    /// Number of plant variables; must be even and match `beta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_p: Option<usize>,
    /// `n_p × n_p/2` block-diagonal quadrature selector.
    pub beta: MatrixLiteral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObserverConfig {
    pub r_o: MatrixLiteral,
    pub c_o: MatrixLiteral,
    /// Explicit coupling direction; synthesized when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<MatrixLiteral>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Time the first observer stays connected.
    #[serde(default = "default_connect")]
    pub connect: f64,
    /// Length of the disconnected (null observer) interval.
    #[serde(default = "default_disconnect")]
    pub disconnect: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_plant: Option<PlantConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second_observer: Option<ObserverConfig>,
}

fn default_connect() -> f64 {
    20.0
}

fn default_disconnect() -> f64 {
    5.0
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            connect: default_connect(),
            disconnect: default_disconnect(),
            second_plant: None,
            second_observer: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Horizon of the running-average figures (`one_mode` only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub average_t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    /// Residual tolerance for the conservation and observer checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<PlantConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observer: Option<ObserverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
}

/// Command-line values that win over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub scenario: Option<ScenarioKind>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub out_dir: Option<String>,
    pub tol: Option<f64>,
}

pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_TOL: f64 = 1e-8;

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind) -> Self {
        Self {
            scenario,
            t_end: None,
            dt: None,
            average_t_end: None,
            out_dir: None,
            tol: None,
            plant: None,
            observer: None,
            schedule: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::new("config", e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.scenario {
            self.scenario = s;
        }
        if o.t_end.is_some() {
            self.t_end = o.t_end;
        }
        if o.dt.is_some() {
            self.dt = o.dt;
        }
        if o.out_dir.is_some() {
            self.out_dir = o.out_dir.clone();
        }
        if o.tol.is_some() {
            self.tol = o.tol;
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end.unwrap_or(match self.scenario {
            ScenarioKind::OneMode => 50.0,
            ScenarioKind::MeasurementSequence | ScenarioKind::Custom => 100.0,
        })
    }

    pub fn average_t_end(&self) -> f64 {
        self.average_t_end.unwrap_or(100.0_f64.max(self.t_end()))
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(DEFAULT_DT)
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn schedule(&self) -> ScheduleConfig {
        self.schedule.clone().unwrap_or_default()
    }

    /// Range checks that do not need any linear algebra.
    pub fn validate_grid(&self) -> Result<(), ConfigError> {
        let t_end = self.t_end();
        let dt = self.dt();
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(ConfigError::new(
                "t_end",
                format!("must be positive, got {t_end}"),
            ));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ConfigError::new(
                "dt",
                format!("must be positive, got {dt}"),
            ));
        }
        if dt > t_end {
            return Err(ConfigError::new(
                "dt",
                format!("{dt} exceeds t_end {t_end}"),
            ));
        }
        let tol = self.tol();
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(ConfigError::new(
                "tol",
                format!("must be nonnegative, got {tol}"),
            ));
        }
        if self.scenario == ScenarioKind::OneMode {
            let avg = self.average_t_end();
            if !(avg.is_finite() && avg >= dt) {
                return Err(ConfigError::new(
                    "average_t_end",
                    format!("must be at least dt, got {avg}"),
                ));
            }
        }
        if self.scenario == ScenarioKind::MeasurementSequence {
            let s = self.schedule();
            if !(s.connect.is_finite() && s.connect > 0.0) {
                return Err(ConfigError::new("schedule.connect", "must be positive"));
            }
            if !(s.disconnect.is_finite() && s.disconnect > 0.0) {
                return Err(ConfigError::new("schedule.disconnect", "must be positive"));
            }
            if t_end <= s.connect + s.disconnect {
                return Err(ConfigError::new(
                    "t_end",
                    format!(
                        "must exceed connect + disconnect = {}",
                        s.connect + s.disconnect
                    ),
                ));
            }
        }
        if let Some(p) = &self.plant {
            p.validate_dimension("plant")?;
        }
        if let Some(p) = self.schedule.as_ref().and_then(|s| s.second_plant.as_ref()) {
            p.validate_dimension("schedule.second_plant")?;
        }
        Ok(())
    }
}

impl PlantConfig {
    pub fn beta(&self, path: &str) -> Result<Matrix, ConfigError> {
        self.validate_dimension(path)?;
        self.beta.to_matrix(&format!("{path}.beta"))
    }

    fn validate_dimension(&self, path: &str) -> Result<(), ConfigError> {
        let rows = self.beta.0.len();
        if let Some(n_p) = self.n_p {
            if !n_p.is_multiple_of(2) {
                return Err(ConfigError::new(
                    format!("{path}.n_p"),
                    format!("{n_p} is odd"),
                ));
            }
            if n_p != rows {
                return Err(ConfigError::new(
                    format!("{path}.n_p"),
                    format!("{n_p} does not match beta with {rows} rows"),
                ));
            }
        }
        if !rows.is_multiple_of(2) {
            return Err(ConfigError::new(
                format!("{path}.beta"),
                format!("n_p = {rows} is odd"),
            ));
        }
        Ok(())
    }
}
