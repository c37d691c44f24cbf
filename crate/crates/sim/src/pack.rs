//! The bundled desk-scale scenario pack and the skeleton model its scripted
//! humans are built from.
//!
//! The robot is a light six-joint arm with an edged tool, mounted on a desk
//! whose top is the plane `z = 0`. Humans stand on the floor at
//! `z = -0.75`.

use std::f64::consts::PI;
use std::path::Path;

use contact_shield::geometry::Capsule;
use contact_shield::human::{HumanConfig, MeasurementBuffer};
use contact_shield::robot::RobotModel;
use contact_shield::trajectory::SplinePath;
use contact_shield::verification::Environment;
use nalgebra::{Point3, Vector3};

use crate::scenario::{Scenario, ScenarioFile};
use crate::SimError;

pub const DESK_ARM_TOML: &str = r#"name = "desk_arm"
topology_exclusions = [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [3, 5]]

[error_bounds]
v_max = 0.0
omega_max = 0.0
a_max = 0.0
omega_dot_max = 0.0

[[joints]]
name = "base_yaw"
axis = [0.0, 0.0, 1.0]
qdot_max = 2.5
qddot_max = 15.0
qdddot_max = 150.0

[[joints]]
name = "shoulder"
axis = [0.0, 1.0, 0.0]
origin = { xyz = [0.0, 0.0, 0.15] }
qdot_max = 2.5
qddot_max = 15.0
qdddot_max = 150.0

[[joints]]
name = "elbow"
axis = [0.0, 1.0, 0.0]
origin = { xyz = [0.3, 0.0, 0.0] }
qdot_max = 2.5
qddot_max = 15.0
qdddot_max = 150.0

[[joints]]
name = "wrist_pitch"
axis = [0.0, 1.0, 0.0]
origin = { xyz = [0.25, 0.0, 0.0] }
qdot_max = 3.0
qddot_max = 20.0
qdddot_max = 200.0

[[joints]]
name = "wrist_yaw"
axis = [0.0, 0.0, 1.0]
origin = { xyz = [0.06, 0.0, 0.0] }
qdot_max = 3.0
qddot_max = 20.0
qdddot_max = 200.0

[[joints]]
name = "tool_roll"
axis = [1.0, 0.0, 0.0]
origin = { xyz = [0.0, 0.0, -0.05] }
qdot_max = 3.0
qddot_max = 20.0
qdddot_max = 200.0

[[links]]
name = "column"
mass = 1.0
com = [0.0, 0.0, 0.08]
inertia = { ixx = 0.003, iyy = 0.003, izz = 0.0015 }
capsule = { p1 = [0.0, 0.0, 0.02], p2 = [0.0, 0.0, 0.15], radius = 0.05 }
geometry = "blunt"
tracking_margin = 0.001

[[links]]
name = "upper_arm"
mass = 0.8
com = [0.15, 0.0, 0.0]
inertia = { ixx = 0.0008, iyy = 0.006, izz = 0.006 }
capsule = { p1 = [0.0, 0.0, 0.0], p2 = [0.3, 0.0, 0.0], radius = 0.045 }
geometry = "blunt"
tracking_margin = 0.001

[[links]]
name = "forearm"
mass = 0.5
com = [0.125, 0.0, 0.0]
inertia = { ixx = 0.0004, iyy = 0.0027, izz = 0.0027 }
capsule = { p1 = [0.0, 0.0, 0.0], p2 = [0.25, 0.0, 0.0], radius = 0.04 }
geometry = "blunt"
tracking_margin = 0.001

[[links]]
name = "wrist"
mass = 0.25
com = [0.03, 0.0, 0.0]
inertia = { ixx = 0.0002, iyy = 0.0002, izz = 0.0002 }
capsule = { p1 = [0.0, 0.0, 0.0], p2 = [0.06, 0.0, 0.0], radius = 0.035 }
geometry = "blunt"
tracking_margin = 0.001

[[links]]
name = "wrist_head"
mass = 0.2
com = [0.0, 0.0, -0.025]
inertia = { ixx = 0.0001, iyy = 0.0001, izz = 0.0001 }
capsule = { p1 = [0.0, 0.0, 0.0], p2 = [0.0, 0.0, -0.05], radius = 0.035 }
geometry = "blunt"
tracking_margin = 0.001

[[links]]
name = "blade"
mass = 0.15
com = [0.0, 0.0, -0.04]
inertia = { ixx = 0.0001, iyy = 0.0001, izz = 0.00002 }
capsule = { p1 = [0.0, 0.0, 0.0], p2 = [0.0, 0.0, -0.08], radius = 0.015 }
geometry = "edge"
tracking_margin = 0.001
"#;

/// Desk top under the robot.
const DESK: ([f64; 3], [f64; 3]) = ([-0.4, -0.8, -0.05], [0.8, 0.8, 0.0]);

/// Safe pairs of the pack: neighbouring segments of one skeleton.
pub fn skeleton_safe_pairs() -> Vec<[String; 2]> {
    let mut pairs: Vec<[String; 2]> =
        [["head", "neck"], ["neck", "torso"], ["torso", "pelvis"]].map(|[a, b]| [a.to_owned(), b.to_owned()]).into();
    for side in ["left", "right"] {
        let s = |part: &str| format!("{side}_{part}");
        pairs.extend([
            [s("hand"), s("lower_arm")],
            [s("lower_arm"), s("upper_arm")],
            [s("upper_arm"), "torso".to_owned()],
            [s("thigh"), "pelvis".to_owned()],
            [s("thigh"), s("shin")],
            [s("shin"), s("foot")],
        ]);
    }
    pairs
}

pub fn pack_human_config() -> HumanConfig {
    HumanConfig { meas_error: 0.005, meas_delay: 0.01, safe_pairs: skeleton_safe_pairs(), ..HumanConfig::default() }
}

/// Where a standing human is and where the hands are.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    /// Floor point under the pelvis.
    pub feet: Point3<f64>,
    /// Horizontal facing direction, radians from +x.
    pub heading: f64,
    pub left_hand: Point3<f64>,
    pub right_hand: Point3<f64>,
}

const ARM_REACH: f64 = 0.7;

impl Pose {
    /// Standing at `feet` facing `heading`, hands hanging at the sides.
    pub fn standing(feet: Point3<f64>, heading: f64) -> Self {
        let mut pose = Self { feet, heading, left_hand: feet, right_hand: feet };
        pose.left_hand = pose.shoulder(1.0) + Vector3::new(0.0, 0.0, -0.6);
        pose.right_hand = pose.shoulder(-1.0) + Vector3::new(0.0, 0.0, -0.6);
        pose
    }

    fn forward(&self) -> Vector3<f64> {
        Vector3::new(self.heading.cos(), self.heading.sin(), 0.0)
    }

    fn left(&self) -> Vector3<f64> {
        Vector3::new(-self.heading.sin(), self.heading.cos(), 0.0)
    }

    fn up(&self, h: f64) -> Point3<f64> {
        self.feet + Vector3::new(0.0, 0.0, h)
    }

    /// Shoulder on the left (`side = 1`) or right (`side = -1`).
    fn shoulder(&self, side: f64) -> Point3<f64> {
        self.up(1.38) + self.left() * (0.2 * side)
    }

    fn arm(&self, side: f64, hand: Point3<f64>) -> [Capsule; 3] {
        let s = self.shoulder(side);
        let d = hand - s;
        let len = d.norm().clamp(1e-6, ARM_REACH);
        let u = d / d.norm().max(1e-6);
        let at = |f: f64| s + u * (f * len);
        [Capsule::new(s, at(0.42), 0.05), Capsule::new(at(0.42), at(0.8), 0.04), Capsule::new(at(0.84), at(1.0), 0.045)]
    }

    /// The sixteen skeleton capsules, keyed by part id.
    pub fn capsules(&self) -> Vec<(&'static str, Capsule)> {
        let f = self.forward();
        let l = self.left();
        let hip = |side: f64| self.up(0.95) + l * (0.1 * side);
        let knee = |side: f64| self.up(0.5) + l * (0.1 * side);
        let ankle = |side: f64| self.up(0.08) + l * (0.1 * side);
        let [lu, ll, lh] = self.arm(1.0, self.left_hand);
        let [ru, rl, rh] = self.arm(-1.0, self.right_hand);
        vec![
            ("head", Capsule::ball(self.up(1.62), 0.1)),
            ("neck", Capsule::new(self.up(1.42), self.up(1.5), 0.05)),
            ("torso", Capsule::new(self.up(1.05), self.up(1.3), 0.15)),
            ("pelvis", Capsule::new(hip(1.0), hip(-1.0), 0.12)),
            ("left_upper_arm", lu),
            ("left_lower_arm", ll),
            ("left_hand", lh),
            ("right_upper_arm", ru),
            ("right_lower_arm", rl),
            ("right_hand", rh),
            ("left_thigh", Capsule::new(hip(1.0), knee(1.0), 0.07)),
            ("left_shin", Capsule::new(knee(1.0), ankle(1.0), 0.05)),
            ("left_foot", Capsule::new(ankle(1.0), ankle(1.0) + f * 0.15, 0.04)),
            ("right_thigh", Capsule::new(hip(-1.0), knee(-1.0), 0.07)),
            ("right_shin", Capsule::new(knee(-1.0), ankle(-1.0), 0.05)),
            ("right_foot", Capsule::new(ankle(-1.0), ankle(-1.0) + f * 0.15, 0.04)),
        ]
    }

    fn lerp(&self, other: &Self, w: f64) -> Self {
        let mix = |a: Point3<f64>, b: Point3<f64>| a + (b - a) * w;
        Self {
            feet: mix(self.feet, other.feet),
            heading: self.heading + (other.heading - self.heading) * w,
            left_hand: mix(self.left_hand, other.left_hand),
            right_hand: mix(self.right_hand, other.right_hand),
        }
    }
}

/// Pose keyframes eased with a half-cosine between consecutive frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Script {
    pub frames: Vec<(f64, Pose)>,
}

impl Script {
    pub fn at(&self, t: f64) -> Pose {
        let k = self.frames.partition_point(|(ft, _)| *ft <= t);
        if k == 0 {
            return self.frames[0].1;
        }
        if k == self.frames.len() {
            return self.frames[k - 1].1;
        }
        let ((t0, a), (t1, b)) = (self.frames[k - 1], self.frames[k]);
        let tau = (t - t0) / (t1 - t0);
        a.lerp(&b, 0.5 * (1.0 - (PI * tau).cos()))
    }

    /// Samples every skeleton capsule of human `id` at `rate` Hz up to `end`.
    pub fn record(&self, id: u32, end: f64, rate: f64, into: &mut MeasurementBuffer) -> Result<(), SimError> {
        let count = (end * rate).round() as usize;
        for k in 0..=count {
            let t = k as f64 / rate;
            for (part, c) in self.at(t).capsules() {
                into.push(t, id, part, c).map_err(SimError::Scenario)?;
            }
        }
        Ok(())
    }
}

fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
    Point3::new(x, y, z)
}

/// Keyframes of a human at `feet`, facing `heading`, whose right hand
/// alternates between rest and the listed reach targets.
fn reaching(feet: Point3<f64>, heading: f64, start: f64, targets: &[(f64, f64, Point3<f64>)]) -> Script {
    let rest = Pose::standing(feet, heading);
    let mut frames = vec![(0.0, rest), (start, rest)];
    let mut t = start;
    for &(go, hold, target) in targets {
        let reach = Pose { right_hand: target, ..rest };
        frames.push((t + go, reach));
        frames.push((t + go + hold, reach));
        t += 2.0 * go + hold;
        frames.push((t, rest));
    }
    Script { frames }
}

/// Waypoint TOML of a robot path.
fn path_toml(points: &[(f64, [f64; 6])]) -> String {
    let mut out = String::new();
    for (t, q) in points {
        let qs: Vec<String> = q.iter().map(|v| format!("{v:.3}")).collect();
        out += &format!("[[waypoints]]\nt = {t:.3}\nq = [{}]\n\n", qs.join(", "));
    }
    out
}

fn environment_toml(boxes: &[(&str, [f64; 3], [f64; 3])]) -> String {
    let mut out = String::new();
    for (name, min, max) in boxes {
        out += &format!("[[element]]\nname = \"{name}\"\nbox = {{ min = {min:?}, max = {max:?} }}\n\n");
    }
    out
}

/// Everything one bundled scenario writes to disk.
pub struct PackScenario {
    pub file: ScenarioFile,
    pub path_toml: String,
    pub environment_toml: String,
    pub trace: MeasurementBuffer,
}

impl PackScenario {
    /// The scenario built in memory, without a round trip through files.
    pub fn to_scenario(&self) -> Result<Scenario, SimError> {
        let model = RobotModel::from_toml_str(DESK_ARM_TOML)?;
        let environment = Environment::from_toml_str(&self.environment_toml)?;
        let path = SplinePath::from_toml_str(&self.path_toml)?;
        let f = &self.file;
        let mut scn = Scenario::new(f.name.clone(), model, environment, path, self.trace.clone(), f.human.clone(), f.dt, f.horizon)?;
        scn.method = f.method.parse().map_err(SimError::Scenario)?;
        scn.seed = f.seed;
        scn.start_s = f.start_s;
        Ok(scn)
    }
}

/// Pick-and-place cycle swinging the tool across the desk.
fn pick_and_place(period: f64) -> Vec<(f64, [f64; 6])> {
    let q = |yaw: f64, lift: f64| [yaw, -0.6 - lift, 1.25 - lift, -0.65 + 2.0 * lift, 0.0, 0.0];
    let h = period / 4.0;
    vec![(0.0, q(-0.9, 0.0)), (h, q(-0.9, 0.25)), (2.0 * h, q(0.9, 0.25)), (3.0 * h, q(0.9, 0.0))]
}

/// Tool lifted toward a hand-over point above the desk edge and back.
fn hand_over_path(period: f64) -> Vec<(f64, [f64; 6])> {
    let h = period / 4.0;
    vec![
        (0.0, [-0.5, -0.6, 1.25, -0.65, 0.0, 0.0]),
        (h, [-0.1, -0.95, 1.0, -0.05, 0.0, 0.0]),
        (2.0 * h, [0.3, -1.05, 0.75, 0.3, 0.0, 0.0]),
        (3.0 * h, [0.1, -0.8, 1.1, -0.3, 0.0, 0.0]),
    ]
}

const HORIZON: f64 = 20.0;
const RATE: f64 = 50.0;

fn scenario(name: &str, environment: bool, seed: u64) -> ScenarioFile {
    ScenarioFile {
        name: name.to_owned(),
        robot: "desk_arm.toml".into(),
        environment: environment.then(|| format!("{name}.env.toml").into()),
        path: format!("{name}.path.toml").into(),
        humans: vec![format!("{name}.humans.csv").into()],
        thresholds: None,
        method: "sara".into(),
        dt: contact_shield::trajectory::DEFAULT_DT,
        horizon: HORIZON,
        seed,
        start_s: 0.0,
        human: pack_human_config(),
    }
}

/// The five bundled scenarios.
pub fn pack() -> Result<Vec<PackScenario>, SimError> {
    let desk = ("desk", DESK.0, DESK.1);
    let mut out = Vec::new();

    // A person across the desk reaches into the pick area now and then.
    let mut trace = MeasurementBuffer::new();
    let targets = [(1.0, 1.0, p(0.45, -0.35, 0.08)), (1.0, 0.6, p(0.5, 0.3, 0.1)), (1.0, 1.2, p(0.4, -0.3, 0.06))];
    let mut script = reaching(p(1.15, 0.0, -0.75), PI, 1.5, &targets);
    let more = reaching(p(1.15, 0.0, -0.75), PI, 11.5, &targets);
    script.frames.extend(more.frames.into_iter().filter(|(t, _)| *t > 11.5));
    script.record(0, HORIZON, RATE, &mut trace)?;
    out.push(PackScenario {
        file: scenario("crossing_reach", true, 11),
        path_toml: path_toml(&pick_and_place(4.0)),
        environment_toml: environment_toml(&[desk]),
        trace,
    });

    // A person at the side of the desk works with both hands on its surface.
    let mut trace = MeasurementBuffer::new();
    let base = Pose::standing(p(0.2, -1.05, -0.75), PI / 2.0);
    let work = |l: Point3<f64>, r: Point3<f64>| Pose { left_hand: l, right_hand: r, ..base };
    let mut frames = vec![(0.0, base)];
    for k in 0..5 {
        let t0 = 1.0 + 4.0 * k as f64;
        frames.push((t0, work(p(0.15, -0.6, 0.06), p(0.35, -0.62, 0.06))));
        frames.push((t0 + 1.2, work(p(0.05, -0.45, 0.06), p(0.45, -0.5, 0.06))));
        frames.push((t0 + 2.4, work(p(0.2, -0.65, 0.08), p(0.3, -0.55, 0.08))));
        frames.push((t0 + 3.2, base));
    }
    Script { frames }.record(0, HORIZON, RATE, &mut trace)?;
    out.push(PackScenario {
        file: scenario("table_work", true, 12),
        path_toml: path_toml(&pick_and_place(5.0)),
        environment_toml: environment_toml(&[desk]),
        trace,
    });

    // A person holds a hand out in free space above the desk edge.
    let mut trace = MeasurementBuffer::new();
    let targets = [(1.0, 2.5, p(0.62, 0.2, 0.42)), (1.0, 2.0, p(0.6, 0.1, 0.48)), (1.0, 2.5, p(0.64, 0.25, 0.4))];
    let mut script = reaching(p(1.2, 0.15, -0.75), PI, 1.0, &targets);
    let more = reaching(p(1.2, 0.15, -0.75), PI, 15.0, &targets[..2]);
    script.frames.extend(more.frames.into_iter().filter(|(t, _)| *t > 15.0));
    script.record(0, HORIZON, RATE, &mut trace)?;
    out.push(PackScenario {
        file: scenario("hand_over", true, 13),
        path_toml: path_toml(&hand_over_path(4.0)),
        environment_toml: environment_toml(&[desk]),
        trace,
    });

    // A cluttered desk with a shelf and a monitor, and a person sorting
    // parts with both arms.
    let mut trace = MeasurementBuffer::new();
    let base = Pose::standing(p(1.1, -0.35, -0.75), 0.9 * PI);
    let sort = |l: Point3<f64>, r: Point3<f64>| Pose { left_hand: l, right_hand: r, ..base };
    let mut frames = vec![(0.0, base)];
    for k in 0..4 {
        let t0 = 0.8 + 5.0 * k as f64;
        frames.push((t0 + 0.8, sort(p(0.6, -0.55, 0.1), p(0.55, -0.1, 0.3))));
        frames.push((t0 + 2.0, sort(p(0.5, -0.45, 0.05), p(0.45, 0.0, 0.25))));
        frames.push((t0 + 3.2, sort(p(0.65, -0.6, 0.15), p(0.6, -0.2, 0.35))));
        frames.push((t0 + 4.2, base));
    }
    Script { frames }.record(0, HORIZON, RATE, &mut trace)?;
    out.push(PackScenario {
        file: scenario("dual_arm_clutter", true, 14),
        path_toml: path_toml(&pick_and_place(4.5)),
        environment_toml: environment_toml(&[
            desk,
            ("shelf", [-0.4, 0.55, 0.0], [0.3, 0.8, 0.5]),
            ("monitor", [-0.4, -0.8, 0.0], [-0.2, -0.4, 0.45]),
        ]),
        trace,
    });

    // A person walks by well outside the workspace.
    let mut trace = MeasurementBuffer::new();
    let a = Pose::standing(p(1.7, -1.2, -0.75), PI / 2.0);
    let b = Pose::standing(p(1.7, 1.2, -0.75), PI / 2.0);
    let c = Pose::standing(p(1.5, 0.0, -0.75), PI);
    Script { frames: vec![(0.0, a), (6.0, b), (9.0, c), (14.0, c), (20.0, a)] }.record(0, HORIZON, RATE, &mut trace)?;
    out.push(PackScenario {
        file: scenario("far_observer", true, 15),
        path_toml: path_toml(&pick_and_place(4.0)),
        environment_toml: environment_toml(&[desk]),
        trace,
    });
    Ok(out)
}

fn write(path: &Path, contents: &[u8]) -> Result<(), SimError> {
    std::fs::write(path, contents).map_err(|e| SimError::io(path.to_path_buf(), e))
}

/// Writes the robot, the scenarios and their inputs into `dir`.
pub fn write_pack(dir: impl AsRef<Path>) -> Result<(), SimError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir.to_path_buf(), e))?;
    write(&dir.join("desk_arm.toml"), DESK_ARM_TOML.as_bytes())?;
    for s in pack()? {
        let name = &s.file.name;
        let doc = toml::to_string(&s.file).map_err(|e| SimError::Scenario(e.to_string()))?;
        write(&dir.join(format!("{name}.scenario.toml")), doc.as_bytes())?;
        write(&dir.join(format!("{name}.path.toml")), s.path_toml.as_bytes())?;
        if let Some(env) = &s.file.environment {
            write(&dir.join(env), s.environment_toml.as_bytes())?;
        }
        let mut csv = Vec::new();
        s.trace.write_csv(&mut csv)?;
        write(&dir.join(format!("{name}.humans.csv")), &csv)?;
    }
    Ok(())
}
