//! TOML robot description.
//!
//! ```toml
//! name = "arm"
//! base = { xyz = [0.0, 0.0, 0.0], rpy = [0.0, 0.0, 0.0] }
//! topology_exclusions = [[0, 1], [1, 2]]
//!
//! [error_bounds]
//! v_max = 0.0
//! omega_max = 0.0
//! a_max = 0.0
//! omega_dot_max = 0.0
//!
//! [[joints]]
//! kind = "revolute"
//! axis = [0.0, 0.0, 1.0]
//! origin = { xyz = [0.0, 0.0, 0.1], rpy = [0.0, 0.0, 0.0] }
//! qdot_max = 1.5
//! qddot_max = 5.0
//! qdddot_max = 50.0
//!
//! [[links]]
//! mass = 2.0
//! com = [0.0, 0.0, 0.1]
//! inertia = { ixx = 0.01, iyy = 0.01, izz = 0.005 }
//! capsule = { p1 = [0.0, 0.0, 0.0], p2 = [0.0, 0.0, 0.3], radius = 0.06 }
//! geometry = "blunt"
//! tracking_margin = 0.002
//! ```
//!
//! Lengths are meters, angles radians, masses kilograms. Link `i` hangs off
//! joint `i`; joint `i + 1`'s origin is expressed in link `i` coordinates.

use std::path::Path;

use nalgebra::{Isometry3, Matrix3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{ErrorBounds, GeometryClass, JointSpec, LinkSpec, RobotError, RobotModel};
use crate::geometry::Capsule;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDoc {
    #[serde(default)]
    pub xyz: [f64; 3],
    #[serde(default)]
    pub rpy: [f64; 3],
}

impl FrameDoc {
    fn isometry(&self) -> Isometry3<f64> {
        let [x, y, z] = self.xyz;
        let [r, p, yaw] = self.rpy;
        Isometry3::from_parts(Translation3::new(x, y, z), UnitQuaternion::from_euler_angles(r, p, yaw))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDoc {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default = "revolute")]
    pub kind: String,
    pub axis: [f64; 3],
    #[serde(default)]
    pub origin: FrameDoc,
    pub qdot_max: f64,
    pub qddot_max: f64,
    pub qdddot_max: f64,
}

fn revolute() -> String {
    "revolute".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaDoc {
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
    #[serde(default)]
    pub ixy: f64,
    #[serde(default)]
    pub ixz: f64,
    #[serde(default)]
    pub iyz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsuleDoc {
    pub p1: [f64; 3],
    pub p2: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub mass: f64,
    pub com: [f64; 3],
    pub inertia: InertiaDoc,
    pub capsule: CapsuleDoc,
    pub geometry: GeometryClass,
    #[serde(default)]
    pub tracking_margin: f64,
}

/// On-disk robot description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub base: FrameDoc,
    #[serde(default)]
    pub topology_exclusions: Vec<[usize; 2]>,
    #[serde(default)]
    pub error_bounds: ErrorBounds,
    pub joints: Vec<JointDoc>,
    pub links: Vec<LinkDoc>,
}

impl RobotFile {
    pub fn into_model(self) -> Result<RobotModel, RobotError> {
        let mut joints = Vec::with_capacity(self.joints.len());
        for (k, j) in self.joints.iter().enumerate() {
            match j.kind.as_str() {
                "revolute" => {}
                "prismatic" => return Err(RobotError::Prismatic(k)),
                other => return Err(RobotError::Invalid(format!("joint {k} has unknown kind {other:?}"))),
            }
            let axis = Vector3::from(j.axis);
            if ((axis.norm() - 1.0).abs()) > 1e-9 {
                return Err(RobotError::Invalid(format!("joint {k} axis is not unit length")));
            }
            joints.push(JointSpec {
                axis: nalgebra::Unit::new_normalize(axis),
                origin: j.origin.isometry(),
                qdot_max: j.qdot_max,
                qddot_max: j.qddot_max,
                qdddot_max: j.qdddot_max,
            });
        }
        let mut links = Vec::with_capacity(self.links.len());
        for (k, l) in self.links.iter().enumerate() {
            if l.capsule.radius < 0.0 {
                return Err(RobotError::Invalid(format!("link {k} capsule radius is negative")));
            }
            let i = &l.inertia;
            links.push(LinkSpec {
                mass: l.mass,
                inertia: Matrix3::new(i.ixx, i.ixy, i.ixz, i.ixy, i.iyy, i.iyz, i.ixz, i.iyz, i.izz),
                com: Vector3::from(l.com),
                capsule: Capsule::new(Point3::from(l.capsule.p1), Point3::from(l.capsule.p2), l.capsule.radius),
                geometry: l.geometry,
                tracking_margin: l.tracking_margin,
            });
        }
        RobotModel::new(
            self.name.unwrap_or_else(|| "robot".into()),
            self.base.isometry(),
            joints,
            links,
            self.topology_exclusions.iter().map(|[a, b]| (*a, *b)),
            self.error_bounds,
        )
    }
}

impl RobotModel {
    pub fn from_toml_str(text: &str) -> Result<Self, RobotError> {
        let file: RobotFile = toml::from_str(text).map_err(|e| RobotError::Parse(e.to_string()))?;
        file.into_model()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, RobotError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
