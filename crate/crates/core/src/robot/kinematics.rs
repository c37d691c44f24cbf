use nalgebra::{DMatrix, Isometry3, Point3, UnitQuaternion, Vector3};

use super::{RobotError, RobotModel};
use crate::geometry::Capsule;

/// World-frame pose of every link at one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    /// Link frames; the origin of frame `i` lies on joint `i`'s axis.
    pub frames: Vec<Isometry3<f64>>,
    /// Joint rotation axes in world coordinates.
    pub axes: Vec<Vector3<f64>>,
    /// Link collision capsules in world coordinates.
    pub capsules: Vec<Capsule>,
}

impl Kinematics {
    pub fn joint_origin(&self, joint: usize) -> Point3<f64> {
        Point3::from(self.frames[joint].translation.vector)
    }
}

/// Angular and linear motion of one link, referenced to its frame origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMotion {
    pub omega: Vector3<f64>,
    pub omega_dot: Vector3<f64>,
    pub origin_velocity: Vector3<f64>,
    pub origin_acceleration: Vector3<f64>,
}

impl LinkMotion {
    pub fn point_velocity(&self, origin: &Point3<f64>, p: &Point3<f64>) -> Vector3<f64> {
        self.origin_velocity + self.omega.cross(&(p - origin))
    }

    pub fn point_acceleration(&self, origin: &Point3<f64>, p: &Point3<f64>) -> Vector3<f64> {
        let r = p - origin;
        self.origin_acceleration + self.omega_dot.cross(&r) + self.omega.cross(&self.omega.cross(&r))
    }
}

impl RobotModel {
    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Kinematics, RobotError> {
        self.check_dim(q.len())?;
        let n = self.dof();
        let mut frames = Vec::with_capacity(n);
        let mut axes = Vec::with_capacity(n);
        let mut capsules = Vec::with_capacity(n);
        let mut current = self.base;
        for (k, (joint, link)) in self.joints.iter().zip(&self.links).enumerate() {
            let joint_frame = current * joint.origin;
            current = joint_frame * UnitQuaternion::from_axis_angle(&joint.axis, q[k]);
            axes.push(joint_frame.rotation * joint.axis.into_inner());
            frames.push(current);
            capsules.push(link.capsule.transformed(&current));
        }
        Ok(Kinematics { frames, axes, capsules })
    }

    /// Geometric Jacobian (position rows, then orientation rows) of a world
    /// point rigidly attached to `link`.
    pub fn link_jacobian(&self, q: &[f64], link: usize, point: &Point3<f64>) -> Result<DMatrix<f64>, RobotError> {
        self.check_link(link)?;
        let kin = self.forward_kinematics(q)?;
        Ok(jacobian_from(&kin, self.dof(), link, point))
    }

    /// Velocities and accelerations of all links by outward recursion.
    pub fn link_motions(&self, kin: &Kinematics, qd: &[f64], qdd: &[f64]) -> Result<Vec<LinkMotion>, RobotError> {
        self.check_dim(qd.len())?;
        self.check_dim(qdd.len())?;
        let mut out = Vec::with_capacity(self.dof());
        let mut omega = Vector3::zeros();
        let mut omega_dot = Vector3::zeros();
        let mut vel = Vector3::zeros();
        let mut acc = Vector3::zeros();
        let mut prev_origin = Point3::from(self.base.translation.vector);
        for k in 0..self.dof() {
            let origin = kin.joint_origin(k);
            let r = origin - prev_origin;
            vel += omega.cross(&r);
            acc += omega_dot.cross(&r) + omega.cross(&omega.cross(&r));
            let z = kin.axes[k];
            omega_dot += z * qdd[k] + omega.cross(&z) * qd[k];
            omega += z * qd[k];
            out.push(LinkMotion { omega, omega_dot, origin_velocity: vel, origin_acceleration: acc });
            prev_origin = origin;
        }
        Ok(out)
    }
}

pub(crate) fn jacobian_from(kin: &Kinematics, n: usize, link: usize, point: &Point3<f64>) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(6, n);
    for j in 0..=link {
        let z = kin.axes[j];
        let lin = z.cross(&(point - kin.joint_origin(j)));
        for r in 0..3 {
            jac[(r, j)] = lin[r];
            jac[(r + 3, j)] = z[r];
        }
    }
    jac
}
