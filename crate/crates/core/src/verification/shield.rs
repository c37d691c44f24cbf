use std::sync::Arc;

use super::{Verdict, Verifier, VerifyError};
use crate::human::Measurement;
use crate::trajectory::{
    build_monitored, intended_step, plan_failsafe, JointPath, MonitoredTrajectory, PathLimits, PathState, TrajectoryStep,
};

/// Result of one shield step.
#[derive(Debug, Clone, PartialEq)]
pub struct ShieldStep {
    pub executed: TrajectoryStep,
    pub path_state: PathState,
    /// Whether the candidate of this step passed verification.
    pub verified: bool,
    pub verdict: Verdict,
}

/// Executes the intended motion while its monitored trajectory verifies and
/// otherwise keeps following the last verified failsafe.
pub struct Shield {
    verifier: Verifier,
    path: Arc<dyn JointPath>,
    limits: PathLimits,
    dt: f64,
    active: MonitoredTrajectory,
    cursor: usize,
    steps_taken: usize,
    active_since: usize,
}

impl Shield {
    /// Shield resting at path parameter `s`.
    pub fn new(verifier: Verifier, path: Arc<dyn JointPath>, limits: PathLimits, dt: f64, s: f64) -> Result<Self, VerifyError> {
        if !(dt > 0.0) {
            return Err(VerifyError::Config(format!("control period must be positive, got {dt}")));
        }
        let rest = PathState { s, sd: 0.0, sdd: 0.0 };
        let active = Self::monitored(path.as_ref(), &limits, &rest, 0.0, dt)?;
        Ok(Self { verifier, path, limits, dt, active, cursor: 0, steps_taken: 0, active_since: 0 })
    }

    fn monitored(
        path: &dyn JointPath,
        limits: &PathLimits,
        state: &PathState,
        target: f64,
        dt: f64,
    ) -> Result<MonitoredTrajectory, VerifyError> {
        let intended = intended_step(path, state, limits, target, dt);
        let failsafe = plan_failsafe(path, intended.path_states.last().expect("one step"), limits, dt);
        Ok(build_monitored(intended, failsafe, dt, format!("s={:.6}", state.s))?)
    }

    pub fn verifier(&self) -> &Verifier {
        &self.verifier
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn current(&self) -> (&TrajectoryStep, PathState) {
        (&self.active.steps[self.cursor], self.active.path_states[self.cursor])
    }

    /// Last verified monitored trajectory.
    pub fn active(&self) -> &MonitoredTrajectory {
        &self.active
    }

    /// Index of the current state within [`Self::active`].
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Number of steps taken when the active trajectory was adopted.
    pub fn active_since(&self) -> usize {
        self.active_since
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// Plans one step toward path speed `target` from the current state,
    /// verifies it against the measurements and executes it or the stored failsafe.
    pub fn step(&mut self, target: f64, humans: &[Measurement], now: f64) -> Result<ShieldStep, VerifyError> {
        let (_, state) = self.current();
        let candidate = Self::monitored(self.path.as_ref(), &self.limits, &state, target, self.dt)?;
        let verdict = self.verifier.verify(&candidate, humans, now)?;
        if verdict.safe {
            self.active = candidate;
            self.active_since = self.steps_taken;
            self.cursor = 1;
        } else {
            self.cursor = (self.cursor + 1).min(self.active.steps.len() - 1);
        }
        self.steps_taken += 1;
        let (executed, path_state) = self.current();
        Ok(ShieldStep { executed: executed.clone(), path_state, verified: verdict.safe, verdict })
    }
}
