//! End-to-end shield runs built from configuration text: a two-link arm
//! sweeping around its base past a standing torso.

use std::sync::Arc;

use contact_shield::geometry::{capsules_intersect, Capsule};
use contact_shield::human::{BodyPart, HumanConfig, Measurement};
use contact_shield::robot::RobotModel;
use contact_shield::trajectory::{JointPath, LinePath, PathLimits};
use contact_shield::verification::{ContactEnergyTable, Environment, Policy, Shield, Verifier, VerifyOptions};
use nalgebra::Point3;

const ARM: &str = r#"name = "sweeper"

[error_bounds]
v_max = 0.0
omega_max = 0.0
a_max = 0.0
omega_dot_max = 0.0

[[joints]]
name = "yaw"
axis = [0.0, 0.0, 1.0]
qdot_max = 2.0
qddot_max = 10.0
qdddot_max = 100.0

[[joints]]
name = "elbow"
axis = [0.0, 0.0, 1.0]
origin = { xyz = [0.4, 0.0, 0.0] }
qdot_max = 2.0
qddot_max = 10.0
qdddot_max = 100.0

[[links]]
name = "upper"
mass = 2.0
com = [0.2, 0.0, 0.0]
inertia = { ixx = 0.001, iyy = 0.03, izz = 0.03 }
capsule = { p1 = [0.0, 0.0, 0.0], p2 = [0.4, 0.0, 0.0], radius = 0.05 }
geometry = "blunt"
tracking_margin = 0.001

[[links]]
name = "lower"
mass = 1.0
com = [0.15, 0.0, 0.0]
inertia = { ixx = 0.001, iyy = 0.008, izz = 0.008 }
capsule = { p1 = [0.0, 0.0, 0.0], p2 = [0.3, 0.0, 0.0], radius = 0.04 }
geometry = "blunt"
tracking_margin = 0.001
"#;

const DT: f64 = 0.004;

fn shield(policy: Policy) -> (Shield, Arc<LinePath>) {
    let model = RobotModel::from_toml_str(ARM).unwrap();
    let path = Arc::new(LinePath { start: vec![0.0, 0.0], direction: vec![1.0, 0.0] });
    let limits = PathLimits::derive(path.as_ref(), &model).unwrap();
    let verifier = Verifier::new(model, Environment::default(), ContactEnergyTable::default(), HumanConfig::default())
        .with_options(VerifyOptions { policy, ..VerifyOptions::default() });
    (Shield::new(verifier, path.clone(), limits, DT, 0.0).unwrap(), path)
}

/// A torso standing on the sweep circle at `angle` radians from the start.
fn torso(angle: f64) -> Capsule {
    let (s, c) = angle.sin_cos();
    Capsule::new(Point3::new(0.62 * c, 0.62 * s, -0.3), Point3::new(0.62 * c, 0.62 * s, 0.3), 0.15)
}

#[test]
fn clear_workspace_follows_the_intended_motion() {
    let (mut shield, _) = shield(Policy::Sara);
    let mut last = 0.0;
    for k in 0..250 {
        let out = shield.step(1.0, &[], k as f64 * DT).unwrap();
        assert!(out.verified && out.verdict.safe);
        assert!(out.path_state.s >= last);
        last = out.path_state.s;
    }
    assert!(last > 0.5, "the arm only progressed to s = {last}");
}

#[test]
fn standing_torso_stops_the_sweep_before_contact() {
    let (mut shield, path) = shield(Policy::ContactOnly);
    let model = shield.verifier().model.clone();
    let body = HumanConfig::default().body_part(0, "torso", torso(1.2));
    let mut rejected = 0;
    let mut states = Vec::new();
    for k in 0..1500 {
        let now = k as f64 * DT;
        let seen = [Measurement { part: body.clone(), stamp: now }];
        let out = shield.step(1.0, &seen, now).unwrap();
        rejected += usize::from(!out.verified);
        let caps = model.forward_kinematics(&path.eval(out.path_state.s).q).unwrap().capsules;
        assert!(caps.iter().all(|c| !capsules_intersect(c, &body.capsule)), "contact at t = {now}");
        states.push(out.path_state);
    }
    assert!(rejected > 0);
    // Near the torso the arm only creeps between rejected steps.
    let creep = states[1000..].iter().map(|p| p.sd).fold(0.0, f64::max);
    assert!(creep < 0.05, "still sweeping at {creep} rad/s");
    let last = states[1499].s;
    assert!(last > 0.3 && last < 1.2, "held at s = {last}");
}

/// Path parameter reached after six seconds against a standing `body`.
fn final_s(policy: Policy, body: &BodyPart) -> f64 {
    let (mut shield, _) = shield(policy);
    let mut s = 0.0;
    for k in 0..1500 {
        let now = k as f64 * DT;
        s = shield.step(1.0, &[Measurement { part: body.clone(), stamp: now }], now).unwrap().path_state.s;
    }
    s
}

#[test]
fn sara_gets_closer_than_a_no_contact_policy() {
    let body = HumanConfig::default().body_part(0, "torso", torso(1.2));
    let sara = final_s(Policy::Sara, &body);
    let no_contact = final_s(Policy::ContactOnly, &body);
    assert!(sara > no_contact, "sara reached {sara}, no-contact policy {no_contact}");
}
