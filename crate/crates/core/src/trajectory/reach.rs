use nalgebra::{Point3, Vector3};

use super::{MonitoredTrajectory, TrajectoryError};
use crate::geometry::Capsule;
use crate::robot::{AngularBounds, ErrorBounds, RobotModel};

const UNIT_TOL: f64 = 1e-9;

/// World-frame pose and motion of one link capsule at a single instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub p1: Point3<f64>,
    pub p2: Point3<f64>,
    pub radius: f64,
    pub p1_velocity: Vector3<f64>,
    pub omega: Vector3<f64>,
    pub p1_acceleration: Vector3<f64>,
    pub omega_dot: Vector3<f64>,
}

impl LinkState {
    pub fn capsule(&self) -> Capsule {
        Capsule::new(self.p1, self.p2, self.radius)
    }

    /// Largest distance from `p1` to any point of the capsule.
    pub fn lever(&self) -> f64 {
        (self.p2 - self.p1).norm() + self.radius
    }

    /// Lower bound on `n · v` for every capsule point over an interval of
    /// length `dt` centred on this state, given a bound on point jerk.
    pub fn min_normal_speed(
        &self,
        n: &Vector3<f64>,
        err: &ErrorBounds,
        jerk_bound: f64,
        dt: f64,
    ) -> Result<f64, TrajectoryError> {
        let norm = n.norm();
        if !((norm - 1.0).abs() <= UNIT_TOL) {
            return Err(TrajectoryError::NonUnitNormal(norm));
        }
        let l = self.lever();
        let w = self.omega.norm();
        let n_w = n.cross(&self.omega).norm();
        let n_wd = n.cross(&self.omega_dot).norm();
        let speed = n.dot(&self.p1_velocity) - err.v_max - l * (n_w + err.omega_max);
        let accel = n.dot(&self.p1_acceleration).abs()
            + err.a_max
            + l * (n_wd + w * n_w + err.omega_dot_max + err.omega_max * (w + n_w + err.omega_max));
        Ok(speed - 0.5 * dt * accel - 0.125 * dt * dt * jerk_bound)
    }

    /// Upper bound on `n · v`, the mirror of [`Self::min_normal_speed`].
    pub fn max_normal_speed(
        &self,
        n: &Vector3<f64>,
        err: &ErrorBounds,
        jerk_bound: f64,
        dt: f64,
    ) -> Result<f64, TrajectoryError> {
        Ok(-self.min_normal_speed(&-n, err, jerk_bound, dt)?)
    }
}

/// Capsule state of every link for the joint state `(q, q̇, q̈)`.
pub fn link_states(model: &RobotModel, q: &[f64], qd: &[f64], qdd: &[f64]) -> Result<Vec<LinkState>, TrajectoryError> {
    let kin = model.forward_kinematics(q)?;
    let motions = model.link_motions(&kin, qd, qdd)?;
    Ok(kin
        .capsules
        .iter()
        .zip(&motions)
        .enumerate()
        .map(|(i, (c, m))| {
            let origin = kin.joint_origin(i);
            LinkState {
                p1: c.p1,
                p2: c.p2,
                radius: c.radius,
                p1_velocity: m.point_velocity(&origin, &c.p1),
                omega: m.omega,
                p1_acceleration: m.point_acceleration(&origin, &c.p1),
                omega_dot: m.omega_dot,
            }
        })
        .collect())
}

/// Capsule swept by a link between two sampled poses when no point moves
/// faster than `speed_bound`.
pub fn swept_capsule(a: &Capsule, b: &Capsule, speed_bound: f64, dt: f64, margin: f64) -> Capsule {
    Capsule::new(
        nalgebra::center(&a.p1, &b.p1),
        nalgebra::center(&a.p2, &b.p2),
        a.radius.max(b.radius) + 0.5 * speed_bound * dt + margin,
    )
}

/// What one link can do during one interval of a monitored trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReach {
    pub link: usize,
    pub occupancy: Capsule,
    /// State at the interval midpoint.
    pub mid: LinkState,
    pub jerk_bound: f64,
    pub dt: f64,
}

impl LinkReach {
    pub fn min_normal_speed(&self, n: &Vector3<f64>, err: &ErrorBounds) -> Result<f64, TrajectoryError> {
        self.mid.min_normal_speed(n, err, self.jerk_bound, self.dt)
    }

    pub fn max_normal_speed(&self, n: &Vector3<f64>, err: &ErrorBounds) -> Result<f64, TrajectoryError> {
        self.mid.max_normal_speed(n, err, self.jerk_bound, self.dt)
    }
}

/// Per interval, per link reach of a monitored trajectory.
pub fn robot_reach(
    traj: &MonitoredTrajectory,
    model: &RobotModel,
    bounds: &AngularBounds,
) -> Result<Vec<Vec<LinkReach>>, TrajectoryError> {
    let step_capsules = traj
        .steps
        .iter()
        .map(|s| model.forward_kinematics(&s.q).map(|k| k.capsules))
        .collect::<Result<Vec<_>, _>>()?;
    let jerk: Vec<f64> = (0..model.links().len()).map(|i| bounds.jerk_bound(i)).collect();
    traj.midpoints
        .iter()
        .enumerate()
        .map(|(k, mid)| {
            let states = link_states(model, &mid.q, &mid.qd, &mid.qdd)?;
            Ok(states
                .into_iter()
                .enumerate()
                .map(|(i, state)| {
                    let speed = bounds.point_speed_bound(i, &traj.joint_speed_bounds[k]);
                    LinkReach {
                        link: i,
                        occupancy: swept_capsule(
                            &step_capsules[k][i],
                            &step_capsules[k + 1][i],
                            speed,
                            traj.dt,
                            model.links()[i].tracking_margin,
                        ),
                        mid: state,
                        jerk_bound: jerk[i],
                        dt: traj.dt,
                    }
                })
                .collect())
        })
        .collect()
}
