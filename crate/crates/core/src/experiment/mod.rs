//! Reproducible experiment scenarios: configuration, CSV emission and
//! run summaries.

mod config;
mod csv;
mod scenario;

pub use config::{
    ConfigError, MatrixLiteral, ObserverConfig, Overrides, PlantConfig, ScenarioConfig,
    ScenarioKind, ScheduleConfig,
};
pub use csv::{format_value, Table};
pub use scenario::{
    run, run_custom, run_measurement_sequence, run_one_mode, ArtifactBundle, Check,
    ExperimentError, GridSummary, Summary,
};
