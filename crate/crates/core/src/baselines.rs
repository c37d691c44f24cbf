//! Comparison safety schemes: distance zones, speed caps and a
//! reflected-mass speed limit, behind a common speed-governor interface.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Point3, Vector3};

use crate::geometry::{segment_segment_closest, Capsule};
use crate::human::BodyPart;
use crate::robot::{RobotError, RobotModel};
use crate::trajectory::{JointPath, PathState, TrajectoryStep};
use crate::verification::{ContactEnergyTable, ContactType, Policy, VerifyError};

/// Base distance (m) at or below which the separation zone stops the robot.
pub const SSM_ZONE_DISTANCE: f64 = 1.17;
/// Base distance (m) at or below which the speed zone slows the robot.
pub const REDUCED_SPEED_ZONE_DISTANCE: f64 = 0.73;
/// Cartesian speed cap (m/s) of the reduced-speed schemes.
pub const REDUCED_SPEED: f64 = 0.25;

/// Path-parameter window the speed cap looks ahead over, and its sample count.
const LOOKAHEAD: f64 = 0.5;
const LOOKAHEAD_SAMPLES: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    NoShield,
    SsmZone,
    ReducedSpeedPfl,
    DynamicSsm,
    ReducedSpeedZone,
    ReflectedMass,
    SaraNoCfree,
    Sara,
}

impl MethodId {
    pub const ALL: [MethodId; 8] = [
        Self::NoShield,
        Self::SsmZone,
        Self::ReducedSpeedPfl,
        Self::DynamicSsm,
        Self::ReducedSpeedZone,
        Self::ReflectedMass,
        Self::SaraNoCfree,
        Self::Sara,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::NoShield => "noShield",
            Self::SsmZone => "ssmZone",
            Self::ReducedSpeedPfl => "reducedSpeedPFL",
            Self::DynamicSsm => "dynamicSSM",
            Self::ReducedSpeedZone => "reducedSpeedZone",
            Self::ReflectedMass => "reflectedMass",
            Self::SaraNoCfree => "saraNoCfree",
            Self::Sara => "sara",
        }
    }

    /// Verification policy of the shield-based methods.
    pub fn shield_policy(self) -> Option<Policy> {
        match self {
            Self::Sara => Some(Policy::Sara),
            Self::SaraNoCfree => Some(Policy::ClampOnly),
            Self::DynamicSsm => Some(Policy::ContactOnly),
            _ => None,
        }
    }

    /// Methods whose guarantee follows from verification of every step.
    pub fn is_provably_safe(self) -> bool {
        self.shield_policy().is_some()
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

/// Smallest surface distance from `base` to any body part.
pub fn nearest_human_distance(parts: &[BodyPart], base: &Point3<f64>) -> Option<f64> {
    parts.iter().map(|p| p.capsule.distance_to_point(base)).min_by(f64::total_cmp)
}

/// Whether the separation zone demands a stop.
pub fn ssm_zone_stop(parts: &[BodyPart], base: &Point3<f64>) -> bool {
    nearest_human_distance(parts, base).is_some_and(|d| d <= SSM_ZONE_DISTANCE)
}

/// Whether the speed zone demands the reduced speed.
pub fn reduced_speed_zone_active(parts: &[BodyPart], base: &Point3<f64>) -> bool {
    nearest_human_distance(parts, base).is_some_and(|d| d <= REDUCED_SPEED_ZONE_DISTANCE)
}

/// Upper bound on the speed of any point of any link capsule.
pub fn max_point_speed(model: &RobotModel, q: &[f64], qd: &[f64]) -> Result<f64, RobotError> {
    let kin = model.forward_kinematics(q)?;
    let zeros = vec![0.0; qd.len()];
    let motions = model.link_motions(&kin, qd, &zeros)?;
    let mut best: f64 = 0.0;
    for (i, (c, m)) in kin.capsules.iter().zip(&motions).enumerate() {
        let origin = kin.joint_origin(i);
        let axis = m.point_velocity(&origin, &c.p1).norm().max(m.point_velocity(&origin, &c.p2).norm());
        best = best.max(axis + m.omega.norm() * c.radius);
    }
    Ok(best)
}

/// Time-scales `step` so no capsule point exceeds `cap`; slower steps are unchanged.
pub fn scale_to_speed_cap(model: &RobotModel, step: &TrajectoryStep, cap: f64) -> Result<TrajectoryStep, RobotError> {
    let speed = max_point_speed(model, &step.q, &step.qd)?;
    if speed <= cap {
        return Ok(step.clone());
    }
    let k = cap / speed;
    let scale = |v: &[f64], p: i32| v.iter().map(|x| x * k.powi(p)).collect();
    Ok(TrajectoryStep { t: step.t, q: step.q.clone(), qd: scale(&step.qd, 1), qdd: scale(&step.qdd, 2), qddd: scale(&step.qddd, 3) })
}

/// Largest speed (m/s) along the contact normal whose reflected-mass
/// energy stays within `energy`.
pub fn reflected_mass_speed(energy: f64, mass: f64) -> f64 {
    (2.0 * energy / mass).sqrt()
}

/// Everything a speed governor may look at in one control step.
pub struct GovernorInput<'a> {
    pub model: &'a RobotModel,
    pub path: &'a dyn JointPath,
    pub state: PathState,
    pub humans: &'a [BodyPart],
    pub table: &'a ContactEnergyTable,
}

/// Target path speed in `[0, 1]` for one control step.
pub trait SpeedGovernor {
    fn target_speed(&self, input: &GovernorInput<'_>) -> Result<f64, VerifyError>;
}

/// Path speed that keeps the capsule speeds over the look-ahead window at
/// or below `cap`.
fn capped_path_speed(input: &GovernorInput<'_>, cap: f64) -> Result<f64, VerifyError> {
    let mut target: f64 = 1.0;
    for k in 0..LOOKAHEAD_SAMPLES {
        let s = input.state.s + LOOKAHEAD * k as f64 / (LOOKAHEAD_SAMPLES - 1) as f64;
        let p = input.path.eval(s);
        let unit = max_point_speed(input.model, &p.q, &p.d1)?;
        if unit > 0.0 {
            target = target.min(cap / unit);
        }
    }
    Ok(target)
}

pub struct NoShield;

impl SpeedGovernor for NoShield {
    fn target_speed(&self, _: &GovernorInput<'_>) -> Result<f64, VerifyError> {
        Ok(1.0)
    }
}

pub struct SsmZone;

impl SpeedGovernor for SsmZone {
    fn target_speed(&self, input: &GovernorInput<'_>) -> Result<f64, VerifyError> {
        let base = Point3::from(input.model.base.translation.vector);
        Ok(if ssm_zone_stop(input.humans, &base) { 0.0 } else { 1.0 })
    }
}

pub struct ReducedSpeedPfl;

impl SpeedGovernor for ReducedSpeedPfl {
    fn target_speed(&self, input: &GovernorInput<'_>) -> Result<f64, VerifyError> {
        capped_path_speed(input, REDUCED_SPEED)
    }
}

pub struct ReducedSpeedZone;

impl SpeedGovernor for ReducedSpeedZone {
    fn target_speed(&self, input: &GovernorInput<'_>) -> Result<f64, VerifyError> {
        let base = Point3::from(input.model.base.translation.vector);
        if reduced_speed_zone_active(input.humans, &base) {
            capped_path_speed(input, REDUCED_SPEED)
        } else {
            Ok(1.0)
        }
    }
}

/// Caps each link's speed toward its nearest body part by the clamp energy
/// over the reflected mass in that direction, assuming the human stands still.
pub struct ReflectedMass;

/// Closest points between a link capsule and a body-part capsule, and the
/// unit direction from the former toward the latter.
fn contact_normal(link: &Capsule, part: &Capsule) -> Option<(Point3<f64>, Vector3<f64>)> {
    let (dist, on_link, on_part) = segment_segment_closest(&link.p1, &link.p2, &part.p1, &part.p2);
    if dist <= 1e-12 {
        return None;
    }
    Some((on_link, (on_part - on_link) / dist))
}

impl ReflectedMass {
    /// Largest path speed allowed at the current configuration.
    pub fn path_speed_limit(&self, input: &GovernorInput<'_>) -> Result<f64, VerifyError> {
        let p = input.path.eval(input.state.s);
        let kin = input.model.forward_kinematics(&p.q)?;
        let zeros = vec![0.0; p.d1.len()];
        let motions = input.model.link_motions(&kin, &p.d1, &zeros)?;
        let mut limit: f64 = 1.0;
        for (i, capsule) in kin.capsules.iter().enumerate() {
            let Some(nearest) = input
                .humans
                .iter()
                .min_by(|a, b| crate::geometry::capsule_capsule_distance(capsule, &a.capsule).total_cmp(&crate::geometry::capsule_capsule_distance(capsule, &b.capsule)))
            else {
                continue;
            };
            let threshold = input.table.get(nearest.kind, input.model.links()[i].geometry, ContactType::Clamp)?;
            let Some((point, normal)) = contact_normal(capsule, &nearest.capsule) else {
                return Ok(0.0);
            };
            let mass = match input.model.reflected_mass(&p.q, i, &point, &normal) {
                Ok(m) => m,
                Err(RobotError::Singular) => continue,
                Err(e) => return Err(e.into()),
            };
            let approach = normal.dot(&motions[i].point_velocity(&kin.joint_origin(i), &point)).abs();
            if approach > 0.0 {
                limit = limit.min(reflected_mass_speed(threshold, mass) / approach);
            }
        }
        Ok(limit.max(0.0))
    }
}

impl SpeedGovernor for ReflectedMass {
    fn target_speed(&self, input: &GovernorInput<'_>) -> Result<f64, VerifyError> {
        self.path_speed_limit(input)
    }
}
