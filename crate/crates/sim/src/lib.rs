//! Deterministic replay of recorded human motion against a simulated
//! manipulator under one of several safety methods, with a post-hoc audit
//! of every contact and an efficiency report.

pub mod audit;
pub mod fuzz;
pub mod pack;
pub mod report;
pub mod run;
pub mod scenario;

use std::path::PathBuf;

use contact_shield::human::HumanError;
use contact_shield::robot::RobotError;
use contact_shield::trajectory::TrajectoryError;
use contact_shield::verification::VerifyError;
use thiserror::Error;

pub use audit::{audit_run, AuditReport, AuditViolation, TrueClass};
pub use report::{report_rows, run_batch, summary_table, write_report, Job, Outcome, ReportRow};
pub use run::{run_scenario, MethodState, RunResult, StepLog, StepVerdict};
pub use scenario::{scenario_files, Scenario, ScenarioFile};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Robot(#[from] RobotError),
    #[error(transparent)]
    Human(#[from] HumanError),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
