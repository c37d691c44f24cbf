//! Serial revolute manipulators: model description, kinematics, rigid-body
//! dynamics, effective contact energy and joint-limit derived motion bounds.

mod bounds;
mod config;
mod dynamics;
mod kinematics;

use std::collections::BTreeSet;

use nalgebra::{Isometry3, Matrix3, Unit, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Capsule;

pub use bounds::AngularBounds;
pub use config::RobotFile;
pub use kinematics::{Kinematics, LinkMotion};

#[derive(Debug, Error)]
pub enum RobotError {
    #[error("joint vector has {got} entries, model has {expected} joints")]
    Dimension { expected: usize, got: usize },
    #[error("link index {0} out of range")]
    InvalidLink(usize),
    #[error("invalid robot description: {0}")]
    Invalid(String),
    #[error("joint {0} is prismatic; only revolute joints are supported")]
    Prismatic(usize),
    #[error("direction is not reachable from this configuration (singular)")]
    Singular,
    #[error("cannot parse robot description: {0}")]
    Parse(String),
    #[error("cannot read robot description: {0}")]
    Io(#[from] std::io::Error),
}

/// Worst-case contact shape a link can present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryClass {
    Blunt,
    Wedge,
    Edge,
    Sheet,
}

impl GeometryClass {
    pub const ALL: [GeometryClass; 4] = [Self::Blunt, Self::Wedge, Self::Edge, Self::Sheet];

    pub fn name(self) -> &'static str {
        match self {
            Self::Blunt => "blunt",
            Self::Wedge => "wedge",
            Self::Edge => "edge",
            Self::Sheet => "sheet",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    /// Rotation axis in the joint frame.
    pub axis: Unit<Vector3<f64>>,
    /// Pose of the joint frame in the parent link frame.
    pub origin: Isometry3<f64>,
    pub qdot_max: f64,
    pub qddot_max: f64,
    pub qdddot_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSpec {
    pub mass: f64,
    /// Inertia about the center of mass, in link coordinates, rotor inertia included.
    pub inertia: Matrix3<f64>,
    pub com: Vector3<f64>,
    /// Collision capsule in link coordinates.
    pub capsule: Capsule,
    pub geometry: GeometryClass,
    /// Tracking-error allowance added to this link's swept occupancy (m).
    pub tracking_margin: f64,
}

/// Bounds on the estimation error of link velocities and accelerations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorBounds {
    pub v_max: f64,
    pub omega_max: f64,
    pub a_max: f64,
    pub omega_dot_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    pub name: String,
    pub base: Isometry3<f64>,
    joints: Vec<JointSpec>,
    links: Vec<LinkSpec>,
    exclusions: BTreeSet<(usize, usize)>,
    pub error_bounds: ErrorBounds,
}

impl RobotModel {
    pub fn new(
        name: impl Into<String>,
        base: Isometry3<f64>,
        joints: Vec<JointSpec>,
        links: Vec<LinkSpec>,
        exclusions: impl IntoIterator<Item = (usize, usize)>,
        error_bounds: ErrorBounds,
    ) -> Result<Self, RobotError> {
        let invalid = |msg: String| Err(RobotError::Invalid(msg));
        if joints.is_empty() {
            return invalid("model has no joints".into());
        }
        if joints.len() != links.len() {
            return invalid(format!("{} joints but {} links", joints.len(), links.len()));
        }
        for (k, j) in joints.iter().enumerate() {
            let limits = [j.qdot_max, j.qddot_max, j.qdddot_max];
            if limits.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return invalid(format!("joint {k} limits must be finite and positive"));
            }
        }
        for (k, l) in links.iter().enumerate() {
            if !(l.mass.is_finite() && l.mass > 0.0) {
                return invalid(format!("link {k} mass must be positive"));
            }
            if (l.inertia - l.inertia.transpose()).abs().max() > 1e-12 || l.inertia.cholesky().is_none() {
                return invalid(format!("link {k} inertia must be symmetric positive definite"));
            }
            if !l.capsule.is_finite() || !(l.tracking_margin >= 0.0) {
                return invalid(format!("link {k} capsule or tracking margin invalid"));
            }
        }
        let eb = [error_bounds.v_max, error_bounds.omega_max, error_bounds.a_max, error_bounds.omega_dot_max];
        if eb.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return invalid("error bounds must be non-negative".into());
        }
        let n = links.len();
        let mut set = BTreeSet::new();
        for (a, b) in exclusions {
            if a >= n || b >= n || a == b {
                return invalid(format!("topology exclusion ({a}, {b}) is not a pair of distinct links"));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { name: name.into(), base, joints, links, exclusions: set, error_bounds })
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn topology_exclusions(&self) -> &BTreeSet<(usize, usize)> {
        &self.exclusions
    }

    pub fn is_excluded_pair(&self, a: usize, b: usize) -> bool {
        self.exclusions.contains(&(a.min(b), a.max(b)))
    }

    pub fn qdot_max(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.qdot_max).collect()
    }

    fn check_dim(&self, len: usize) -> Result<(), RobotError> {
        if len == self.dof() {
            Ok(())
        } else {
            Err(RobotError::Dimension { expected: self.dof(), got: len })
        }
    }

    fn check_link(&self, link: usize) -> Result<(), RobotError> {
        if link < self.dof() {
            Ok(())
        } else {
            Err(RobotError::InvalidLink(link))
        }
    }
}
