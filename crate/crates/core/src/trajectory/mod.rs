//! Monitored trajectories (one intended step followed by a path-consistent
//! stop), swept link occupancies and link velocity lower bounds.

mod path;
mod profile;
mod reach;

use thiserror::Error;

pub use path::{JointPath, LinePath, PathLimits, PathPoint, SplinePath};
pub use profile::{intended_step, joint_step, plan_failsafe, JerkProfile, PathState, ProfileSample};
pub use reach::{link_states, robot_reach, LinkReach, LinkState};

/// Default control period (s).
pub const DEFAULT_DT: f64 = 0.006;

/// Continuity tolerance between the intended end and the failsafe start.
pub const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("invalid path: {0}")]
    Path(String),
    #[error("intended trajectory violates joint limits: {0}")]
    LimitViolation(String),
    #[error("joint vector has {got} entries, model has {expected} joints")]
    Dimension { expected: usize, got: usize },
    #[error("failsafe start differs from intended end by {gap:e} in {what}")]
    Discontinuity { what: &'static str, gap: f64 },
    #[error("failsafe does not end at rest")]
    NotStopped,
    #[error("normal vector must have unit length, got norm {0}")]
    NonUnitNormal(f64),
    #[error(transparent)]
    Robot(#[from] crate::robot::RobotError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub t: f64,
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub qdd: Vec<f64>,
    pub qddd: Vec<f64>,
}

impl TrajectoryStep {
    pub fn at_rest(t: f64, q: Vec<f64>) -> Self {
        let n = q.len();
        Self { t, q, qd: vec![0.0; n], qdd: vec![0.0; n], qddd: vec![0.0; n] }
    }

    pub fn is_at_rest(&self) -> bool {
        self.qd.iter().all(|v| *v == 0.0)
    }
}

/// Uniformly sampled motion: `steps[k]` at `k·dt`, `midpoints[k]` halfway
/// between `steps[k]` and `steps[k + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledMotion {
    pub steps: Vec<TrajectoryStep>,
    pub midpoints: Vec<TrajectoryStep>,
    pub path_states: Vec<PathState>,
    /// Per interval and joint, a bound on `|q̇|` over the whole interval.
    pub joint_speed_bounds: Vec<Vec<f64>>,
}

impl SampledMotion {
    pub fn interval_count(&self) -> usize {
        self.midpoints.len()
    }
}

/// Intended steps followed by a full stop, with the clock reset to zero at
/// the first step.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitoredTrajectory {
    pub steps: Vec<TrajectoryStep>,
    pub midpoints: Vec<TrajectoryStep>,
    pub path_states: Vec<PathState>,
    pub joint_speed_bounds: Vec<Vec<f64>>,
    /// Number of intended intervals; later intervals belong to the stop.
    pub split_index: usize,
    pub dt: f64,
    pub goal_ref: String,
}

impl MonitoredTrajectory {
    pub fn interval_count(&self) -> usize {
        self.midpoints.len()
    }

    pub fn intended_end(&self) -> &TrajectoryStep {
        &self.steps[self.split_index]
    }
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Concatenates intended motion and failsafe into one monitored trajectory.
pub fn build_monitored(
    intended: SampledMotion,
    failsafe: SampledMotion,
    dt: f64,
    goal_ref: impl Into<String>,
) -> Result<MonitoredTrajectory, TrajectoryError> {
    let (end, start) = (intended.steps.last().expect("motion has a first step"), &failsafe.steps[0]);
    for (what, a, b) in [("position", &end.q, &start.q), ("velocity", &end.qd, &start.qd), ("acceleration", &end.qdd, &start.qdd)] {
        if a.len() != b.len() {
            return Err(TrajectoryError::Dimension { expected: a.len(), got: b.len() });
        }
        let gap = max_gap(a, b);
        if !(gap <= CONTINUITY_TOL) {
            return Err(TrajectoryError::Discontinuity { what, gap });
        }
    }
    if !failsafe.steps.last().expect("motion has a first step").is_at_rest() {
        return Err(TrajectoryError::NotStopped);
    }
    let t0 = intended.steps[0].t;
    let offset = end.t - start.t;
    let split_index = intended.interval_count();
    let mut steps = intended.steps;
    let mut midpoints = intended.midpoints;
    let mut path_states = intended.path_states;
    let mut joint_speed_bounds = intended.joint_speed_bounds;
    let shift = |mut s: TrajectoryStep, by: f64| {
        s.t += by;
        s
    };
    steps.extend(failsafe.steps.into_iter().skip(1).map(|s| shift(s, offset)));
    midpoints.extend(failsafe.midpoints.into_iter().map(|s| shift(s, offset)));
    path_states.extend(failsafe.path_states.into_iter().skip(1));
    joint_speed_bounds.extend(failsafe.joint_speed_bounds);
    for s in steps.iter_mut().chain(midpoints.iter_mut()) {
        s.t -= t0;
    }
    Ok(MonitoredTrajectory { steps, midpoints, path_states, joint_speed_bounds, split_index, dt, goal_ref: goal_ref.into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn limits() -> PathLimits {
        PathLimits { max_accel: 2.0, max_jerk: 20.0 }
    }

    #[test]
    fn one_intended_step_then_stop() {
        let path = LinePath { start: vec![0.0], direction: vec![0.5] };
        let state = PathState { s: 0.0, sd: 0.2, sdd: 0.0 };
        let intended = intended_step(&path, &state, &limits(), 0.2, 0.01);
        let fs = plan_failsafe(&path, intended.path_states.last().unwrap(), &limits(), 0.01);
        let k_f = fs.interval_count();
        let m = build_monitored(intended, fs, 0.01, "goal").unwrap();
        assert_eq!(m.split_index, 1);
        assert_eq!(m.interval_count(), 1 + k_f);
        assert!(m.steps.last().unwrap().is_at_rest());
        assert_eq!(m.steps[0].t, 0.0);
        assert!(m.steps.windows(2).all(|w| ((w[1].t - w[0].t) - 0.01).abs() < 1e-12));
    }

    #[test]
    fn ten_failsafe_intervals_give_eleven() {
        let path = LinePath { start: vec![0.0], direction: vec![1.0] };
        let lim = PathLimits { max_accel: 1.0, max_jerk: 1e9 };
        // Stopping from 0.095 at unit deceleration spans ten 10 ms intervals.
        let state = PathState { s: 0.0, sd: 0.095, sdd: 0.0 };
        let intended = intended_step(&path, &state, &lim, 0.095, 0.01);
        let fs = plan_failsafe(&path, intended.path_states.last().unwrap(), &lim, 0.01);
        assert_eq!(fs.interval_count(), 10);
        let m = build_monitored(intended, fs, 0.01, "goal").unwrap();
        assert_eq!((m.interval_count(), m.split_index), (11, 1));
    }

    #[test]
    fn stationary_start_stays_put() {
        let path = LinePath { start: vec![0.4, -0.2], direction: vec![0.5, 0.5] };
        let state = PathState { s: 1.0, sd: 0.0, sdd: 0.0 };
        let intended = intended_step(&path, &state, &limits(), 0.0, 0.01);
        let fs = plan_failsafe(&path, intended.path_states.last().unwrap(), &limits(), 0.01);
        let m = build_monitored(intended, fs, 0.01, "goal").unwrap();
        assert!(m.steps.iter().all(|s| s.q == m.steps[0].q && s.is_at_rest()));
    }

    #[test]
    fn broken_continuity_rejected() {
        let path = LinePath { start: vec![0.0], direction: vec![0.5] };
        let state = PathState { s: 0.0, sd: 0.5, sdd: 0.0 };
        let intended = intended_step(&path, &state, &limits(), 0.5, 0.01);
        let mut fs = plan_failsafe(&path, intended.path_states.last().unwrap(), &limits(), 0.01);
        fs.steps[0].q[0] += 1e-3;
        assert!(matches!(build_monitored(intended, fs, 0.01, "goal"), Err(TrajectoryError::Discontinuity { what: "position", .. })));
    }

    #[test]
    fn unfinished_failsafe_rejected() {
        let path = LinePath { start: vec![0.0], direction: vec![0.5] };
        let state = PathState { s: 0.0, sd: 0.5, sdd: 0.0 };
        let intended = intended_step(&path, &state, &limits(), 0.5, 0.01);
        let mut fs = plan_failsafe(&path, intended.path_states.last().unwrap(), &limits(), 0.01);
        fs.steps.pop();
        fs.midpoints.pop();
        assert!(matches!(build_monitored(intended, fs, 0.01, "goal"), Err(TrajectoryError::NotStopped)));
    }
}
