//! Fixed-step replay loop.

use std::time::{Duration, Instant};

use contact_shield::baselines::{
    GovernorInput, MethodId, NoShield, ReducedSpeedPfl, ReducedSpeedZone, ReflectedMass, SpeedGovernor, SsmZone,
};
use contact_shield::geometry::{capsule_capsule_distance, Capsule};
use contact_shield::human::{BodyPart, MeasurementBuffer};
use contact_shield::trajectory::{intended_step, JointPath, PathState, TrajectoryStep};
use contact_shield::verification::{ContactClass, ConstraintTag, Shield, Verifier, VerifyOptions};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::Scenario;
use crate::SimError;

/// Tolerance when matching an adopted trajectory's first state against
/// the state it was planned from.
const STITCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodState {
    /// Executing the freshly verified intended step.
    Intended,
    /// Following the stored failsafe.
    Failsafe,
    /// At rest on the stored failsafe.
    Stopped,
    /// Speed set by an unverified governor.
    Governed,
}

impl MethodState {
    pub fn name(self) -> &'static str {
        match self {
            Self::Intended => "intended",
            Self::Failsafe => "failsafe",
            Self::Stopped => "stopped",
            Self::Governed => "governed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepVerdict {
    NotVerified,
    Safe,
    Unsafe { constraint: ConstraintTag, class: ContactClass },
}

impl StepVerdict {
    pub fn label(self) -> String {
        match self {
            Self::NotVerified => "-".into(),
            Self::Safe => "safe".into(),
            Self::Unsafe { constraint, class } => format!("{}/{}", constraint.name(), class.name()),
        }
    }
}

/// State after one control step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLog {
    pub t: f64,
    pub step: TrajectoryStep,
    pub path: PathState,
    pub state: MethodState,
    /// Smallest true surface distance between robot and human.
    pub min_distance: f64,
    pub energies: Vec<f64>,
    pub verdict: StepVerdict,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub scenario: String,
    pub method: MethodId,
    pub seed: u64,
    pub log: Vec<StepLog>,
    /// Path parameter advanced by this method.
    pub progress: f64,
    /// Path parameter advanced by the unshielded robot.
    pub baseline_progress: f64,
    /// Executed states that were not part of a verified monitored trajectory.
    pub structural_mismatches: usize,
    pub verify_time: Duration,
    pub verify_calls: usize,
}

impl RunResult {
    /// Progress relative to the unshielded robot, in percent.
    pub fn efficiency(&self) -> f64 {
        if self.baseline_progress <= 0.0 {
            return 100.0;
        }
        (100.0 * self.progress / self.baseline_progress).clamp(0.0, 100.0)
    }

    pub fn mean_verify_time(&self) -> Option<Duration> {
        (self.verify_calls > 0).then(|| self.verify_time / self.verify_calls as u32)
    }
}

/// Measurements as the sensors report them: every capsule endpoint moved by
/// a seeded random offset no longer than the measurement error.
pub fn measured(truth: &MeasurementBuffer, error: f64, seed: u64) -> MeasurementBuffer {
    if error <= 0.0 {
        return truth.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offset = move || loop {
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if v.norm_squared() <= 1.0 {
            return v * error;
        }
    };
    truth.map_capsules(|_, _, _, c| Capsule::new(c.p1 + offset(), c.p2 + offset(), c.radius))
}

fn governor(method: MethodId) -> Option<Box<dyn SpeedGovernor>> {
    Some(match method {
        MethodId::NoShield => Box::new(NoShield),
        MethodId::SsmZone => Box::new(SsmZone),
        MethodId::ReducedSpeedPfl => Box::new(ReducedSpeedPfl),
        MethodId::ReducedSpeedZone => Box::new(ReducedSpeedZone),
        MethodId::ReflectedMass => Box::new(ReflectedMass),
        MethodId::Sara | MethodId::SaraNoCfree | MethodId::DynamicSsm => return None,
    })
}

/// Path parameter covered by the unshielded robot over the horizon.
pub fn free_progress(scn: &Scenario) -> f64 {
    let mut state = PathState { s: scn.start_s, sd: 0.0, sdd: 0.0 };
    for _ in 0..scn.step_count() {
        state = intended_step(scn.path.as_ref(), &state, &scn.limits, 1.0, scn.dt).path_states[1];
    }
    state.s - scn.start_s
}

fn same_motion(a: &TrajectoryStep, b: &TrajectoryStep) -> bool {
    let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(u, v)| (u - v).abs() <= STITCH_TOL);
    close(&a.q, &b.q) && close(&a.qd, &b.qd) && close(&a.qdd, &b.qdd)
}

fn min_distance(capsules: &[Capsule], parts: &[BodyPart]) -> f64 {
    let mut best = f64::INFINITY;
    for c in capsules {
        for p in parts {
            best = best.min(capsule_capsule_distance(c, &p.capsule));
        }
    }
    best
}

/// Replays the scenario's human traces against the robot under `method`.
pub fn run_scenario(scn: &Scenario, method: MethodId) -> Result<RunResult, SimError> {
    let sensed = measured(&scn.humans, scn.human.meas_error, scn.seed);
    let path: &dyn JointPath = scn.path.as_ref();
    let mut shield = match method.shield_policy() {
        Some(policy) => {
            let verifier = Verifier::new(scn.model.clone(), scn.environment.clone(), scn.table.clone(), scn.human.clone())
                .with_options(VerifyOptions { policy, ..VerifyOptions::default() });
            Some(Shield::new(verifier, scn.path.clone(), scn.limits, scn.dt, scn.start_s)?)
        }
        None => None,
    };
    let gov = governor(method);
    let mut state = PathState { s: scn.start_s, sd: 0.0, sdd: 0.0 };
    let mut previous = TrajectoryStep::at_rest(0.0, path.eval(scn.start_s).q);
    let mut result = RunResult {
        scenario: scn.name.clone(),
        method,
        seed: scn.seed,
        log: Vec::with_capacity(scn.step_count()),
        progress: 0.0,
        baseline_progress: free_progress(scn),
        structural_mismatches: 0,
        verify_time: Duration::ZERO,
        verify_calls: 0,
    };
    for k in 0..scn.step_count() {
        let now = k as f64 * scn.dt;
        let (mut executed, verdict, mode) = if let Some(shield) = shield.as_mut() {
            let snapshot = sensed.latest_at(now - scn.human.meas_delay, &scn.human);
            let clock = Instant::now();
            let out = shield.step(1.0, &snapshot, now)?;
            result.verify_time += clock.elapsed();
            result.verify_calls += 1;
            let active = shield.active();
            let cursor = shield.cursor();
            let stitched = !out.verified || same_motion(&active.steps[0], &previous);
            // Past the end of the failsafe the robot holds its final rest state.
            let aligned = cursor == (shield.steps_taken() - shield.active_since()).min(active.steps.len() - 1);
            if !(stitched && aligned && active.steps[cursor] == out.executed) {
                result.structural_mismatches += 1;
            }
            state = out.path_state;
            let verdict = match &out.verdict.first_violation {
                None => StepVerdict::Safe,
                Some(v) => StepVerdict::Unsafe { constraint: v.constraint, class: v.class },
            };
            let mode = if out.verified {
                MethodState::Intended
            } else if out.executed.is_at_rest() {
                MethodState::Stopped
            } else {
                MethodState::Failsafe
            };
            (out.executed, verdict, mode)
        } else {
            let snapshot: Vec<BodyPart> =
                sensed.latest_at(now - scn.human.meas_delay, &scn.human).into_iter().map(|m| m.part).collect();
            let input = GovernorInput { model: &scn.model, path, state, humans: &snapshot, table: &scn.table };
            let target = gov.as_ref().expect("governed method").target_speed(&input)?;
            let motion = intended_step(path, &state, &scn.limits, target, scn.dt);
            state = motion.path_states[1];
            (motion.steps[1].clone(), StepVerdict::NotVerified, MethodState::Governed)
        };
        let t = now + scn.dt;
        executed.t = t;
        let truth = scn.humans.interpolated_at(t, &scn.human);
        let kin = scn.model.forward_kinematics(&executed.q)?;
        result.log.push(StepLog {
            t,
            path: state,
            state: mode,
            min_distance: min_distance(&kin.capsules, &truth),
            energies: scn.model.effective_energies(&executed.q, &executed.qd)?,
            verdict,
            step: executed.clone(),
        });
        previous = executed;
    }
    result.progress = state.s - scn.start_s;
    Ok(result)
}

/// Writes the per-step log as CSV with a header row.
pub fn write_log(result: &RunResult, writer: impl std::io::Write) -> Result<(), SimError> {
    let mut csv = csv::Writer::from_writer(writer);
    let dof = result.log.first().map_or(0, |l| l.step.q.len());
    let mut header: Vec<String> = ["t", "s", "s_dot", "state", "verdict", "min_distance"].map(String::from).to_vec();
    header.extend((0..dof).map(|j| format!("q{j}")));
    header.extend((0..dof).map(|j| format!("energy{j}")));
    csv.write_record(&header)?;
    for l in &result.log {
        let mut row = vec![
            format!("{:.6}", l.t),
            format!("{:.9}", l.path.s),
            format!("{:.9}", l.path.sd),
            l.state.name().to_owned(),
            l.verdict.label(),
            format!("{:.6}", l.min_distance),
        ];
        row.extend(l.step.q.iter().map(|q| format!("{q:.9}")));
        row.extend(l.energies.iter().map(|e| format!("{e:.9}")));
        csv.write_record(&row)?;
    }
    csv.flush().map_err(|e| SimError::io("log", e))?;
    Ok(())
}
