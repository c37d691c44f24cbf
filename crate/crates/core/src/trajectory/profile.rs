use super::path::{JointPath, PathLimits};
use super::{SampledMotion, TrajectoryStep};

/// Path parameter and its first two time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathState {
    pub s: f64,
    pub sd: f64,
    pub sdd: f64,
}

/// One-dimensional profile with evaluated position, speed, acceleration and jerk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub x: f64,
    pub v: f64,
    pub a: f64,
    pub j: f64,
}

/// Time-optimal change of speed to a target under acceleration and jerk
/// bounds: a jerk ramp to a peak acceleration, an optional constant-acceleration
/// phase, and a jerk ramp back to zero acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JerkProfile {
    dir: f64,
    jerk: f64,
    v0: f64,
    a0: f64,
    target: f64,
    peak: f64,
    durations: [f64; 3],
}

impl JerkProfile {
    /// Profile from speed `v0` and acceleration `a0` to speed `target`.
    pub fn plan(v0: f64, a0: f64, target: f64, max_accel: f64, max_jerk: f64) -> Self {
        assert!(max_accel > 0.0 && max_jerk > 0.0, "profile bounds must be positive");
        let a0 = a0.clamp(-max_accel, max_accel);
        let settle = v0 + a0 * a0.abs() / (2.0 * max_jerk);
        let dir = if target > settle {
            1.0
        } else if target < settle {
            -1.0
        } else if a0 != 0.0 {
            a0.signum()
        } else {
            1.0
        };
        let (v0d, a0d, td) = (dir * v0, dir * a0, dir * target);
        let dv = td - v0d;
        let free_peak = (max_jerk * dv + 0.5 * a0d * a0d).max(0.0).sqrt();
        let (peak, cruise) = if free_peak <= max_accel {
            (free_peak.max(a0d), 0.0)
        } else {
            let ramps = (2.0 * max_accel * max_accel - a0d * a0d) / (2.0 * max_jerk);
            (max_accel, ((dv - ramps) / max_accel).max(0.0))
        };
        Self {
            dir,
            jerk: max_jerk,
            v0: v0d,
            a0: a0d,
            target: td,
            peak,
            durations: [(peak - a0d) / max_jerk, cruise, peak / max_jerk],
        }
    }

    pub fn duration(&self) -> f64 {
        self.durations.iter().sum()
    }

    pub fn target(&self) -> f64 {
        self.dir * self.target
    }

    fn phase_states(&self) -> [(f64, f64, f64); 3] {
        let [t1, t2, _] = self.durations;
        let j = self.jerk;
        let (x1, v1) = (self.v0 * t1 + self.a0 * t1 * t1 / 2.0 + j * t1 * t1 * t1 / 6.0, self.v0 + self.a0 * t1 + j * t1 * t1 / 2.0);
        let (x2, v2) = (x1 + v1 * t2 + self.peak * t2 * t2 / 2.0, v1 + self.peak * t2);
        [(0.0, self.v0, self.a0), (x1, v1, self.peak), (x2, v2, self.peak)]
    }

    /// State `tau` seconds after the start; position is relative to the start.
    pub fn sample(&self, tau: f64) -> ProfileSample {
        let [t1, t2, t3] = self.durations;
        let states = self.phase_states();
        let (x, v, a, j) = if tau < t1 {
            let (x0, v0, a0) = states[0];
            (x0 + v0 * tau + a0 * tau * tau / 2.0 + self.jerk * tau.powi(3) / 6.0, v0 + a0 * tau + self.jerk * tau * tau / 2.0, a0 + self.jerk * tau, self.jerk)
        } else if tau < t1 + t2 {
            let (x1, v1, ap) = states[1];
            let u = tau - t1;
            (x1 + v1 * u + ap * u * u / 2.0, v1 + ap * u, ap, 0.0)
        } else if tau < t1 + t2 + t3 {
            let (x2, v2, ap) = states[2];
            let u = tau - t1 - t2;
            (x2 + v2 * u + ap * u * u / 2.0 - self.jerk * u.powi(3) / 6.0, v2 + ap * u - self.jerk * u * u / 2.0, ap - self.jerk * u, -self.jerk)
        } else {
            let (x2, v2, ap) = states[2];
            let end = x2 + v2 * t3 + ap * t3 * t3 / 2.0 - self.jerk * t3.powi(3) / 6.0;
            (end + self.target * (tau - t1 - t2 - t3), self.target, 0.0, 0.0)
        };
        ProfileSample { x: self.dir * x, v: self.dir * v, a: self.dir * a, j: self.dir * j }
    }

    /// Largest speed magnitude on `[tau_a, tau_b]`.
    pub fn max_abs_speed(&self, tau_a: f64, tau_b: f64) -> f64 {
        let [t1, t2, t3] = self.durations;
        let mut cands = vec![tau_a, tau_b];
        for b in [t1, t1 + t2, t1 + t2 + t3] {
            if b > tau_a && b < tau_b {
                cands.push(b);
            }
        }
        // Acceleration crosses zero inside the first ramp when it starts negative.
        if self.a0 < 0.0 {
            let zero = -self.a0 / self.jerk;
            if zero > tau_a && zero < tau_b && zero < t1 {
                cands.push(zero);
            }
        }
        cands.into_iter().map(|t| self.sample(t).v.abs()).fold(0.0, f64::max)
    }
}

/// Joint-space state of a path point moving with the given profile sample.
pub fn joint_step(path: &dyn JointPath, t: f64, s: f64, p: &ProfileSample) -> TrajectoryStep {
    let e = path.eval(s);
    let (sd, sdd, sddd) = (p.v, p.a, p.j);
    let n = e.q.len();
    let mut step = TrajectoryStep { t, q: e.q, qd: vec![0.0; n], qdd: vec![0.0; n], qddd: vec![0.0; n] };
    for k in 0..n {
        step.qd[k] = e.d1[k] * sd;
        step.qdd[k] = e.d2[k] * sd * sd + e.d1[k] * sdd;
        step.qddd[k] = e.d3[k] * sd * sd * sd + 3.0 * e.d2[k] * sd * sdd + e.d1[k] * sddd;
    }
    step
}

fn sample_profile(
    path: &dyn JointPath,
    start: &PathState,
    profile: &JerkProfile,
    steps: usize,
    dt: f64,
) -> SampledMotion {
    let d1max = path.derivative_bounds()[0].clone();
    let at = |tau: f64| {
        let p = profile.sample(tau);
        let s = start.s + p.x;
        (joint_step(path, tau, s, &p), PathState { s, sd: p.v, sdd: p.a })
    };
    let (first, first_state) = at(0.0);
    let mut out = SampledMotion {
        steps: vec![first],
        midpoints: Vec::with_capacity(steps),
        path_states: vec![first_state],
        joint_speed_bounds: Vec::with_capacity(steps),
    };
    for k in 1..=steps {
        let (ta, tb) = ((k - 1) as f64 * dt, k as f64 * dt);
        let (mid, _) = at(0.5 * (ta + tb));
        let (end, end_state) = at(tb);
        let speed = profile.max_abs_speed(ta, tb);
        out.midpoints.push(mid);
        out.steps.push(end);
        out.path_states.push(end_state);
        out.joint_speed_bounds.push(d1max.iter().map(|d| d * speed).collect());
    }
    out
}

/// Path-consistent jerk-limited stop from `state`, sampled every `dt` until
/// the speed is exactly zero.
pub fn plan_failsafe(path: &dyn JointPath, state: &PathState, limits: &PathLimits, dt: f64) -> SampledMotion {
    let profile = JerkProfile::plan(state.sd, state.sdd, 0.0, limits.max_accel, limits.max_jerk);
    let mut steps = (profile.duration() / dt).ceil() as usize;
    while (steps as f64) * dt < profile.duration() {
        steps += 1;
    }
    if steps == 0 && (state.sd != 0.0 || state.sdd != 0.0) {
        steps = 1;
    }
    sample_profile(path, state, &profile, steps, dt)
}

/// One control step of length `dt` that moves the path speed toward `target`.
pub fn intended_step(path: &dyn JointPath, state: &PathState, limits: &PathLimits, target: f64, dt: f64) -> SampledMotion {
    let profile = JerkProfile::plan(state.sd, state.sdd, target.clamp(0.0, 1.0), limits.max_accel, limits.max_jerk);
    sample_profile(path, state, &profile, 1, dt)
}
