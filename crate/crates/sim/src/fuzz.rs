//! Randomized human traces that respect the human speed bound.
//!
//! A fuzzed human stands near the desk edge, drifts slowly and jabs both
//! hands toward random points of the robot workspace along straight lines.
//! The feet move at most [`BODY_SPEED`] and the hand targets at most
//! [`HAND_SPEED`]; every skeleton point then moves at most
//! `2 · BODY_SPEED + HAND_SPEED`.

use std::f64::consts::PI;

use contact_shield::human::MeasurementBuffer;
use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pack::Pose;
use crate::scenario::Scenario;
use crate::SimError;

pub const BODY_SPEED: f64 = 0.2;
pub const HAND_SPEED: f64 = 1.15;
/// Sample rate of fuzzed traces (Hz).
pub const RATE: f64 = 100.0;

/// Piecewise-linear motion through timed points.
#[derive(Debug, Clone, PartialEq)]
struct Polyline {
    points: Vec<(f64, Point3<f64>)>,
}

impl Polyline {
    /// Random walk from `start` toward targets drawn by `target`, each leg
    /// lasting between `min_leg` and `max_leg` seconds and no faster than `speed`.
    fn random(
        rng: &mut ChaCha8Rng,
        start: Point3<f64>,
        end: f64,
        (min_leg, max_leg): (f64, f64),
        speed: f64,
        mut target: impl FnMut(&mut ChaCha8Rng) -> Point3<f64>,
    ) -> Self {
        let mut points = vec![(0.0, start)];
        let (mut t, mut at) = (0.0, start);
        while t < end {
            let leg = rng.gen_range(min_leg..max_leg);
            let goal = target(rng);
            let d = goal - at;
            let reach = speed * leg;
            let next = if d.norm() > reach { at + d * (reach / d.norm()) } else { goal };
            t += leg;
            at = next;
            points.push((t, at));
        }
        Self { points }
    }

    fn at(&self, t: f64) -> Point3<f64> {
        let k = self.points.partition_point(|(pt, _)| *pt <= t);
        if k == 0 {
            return self.points[0].1;
        }
        if k == self.points.len() {
            return self.points[k - 1].1;
        }
        let ((t0, a), (t1, b)) = (self.points[k - 1], self.points[k]);
        a + (b - a) * ((t - t0) / (t1 - t0))
    }
}

fn in_box(rng: &mut ChaCha8Rng, min: [f64; 3], max: [f64; 3]) -> Point3<f64> {
    Point3::new(rng.gen_range(min[0]..max[0]), rng.gen_range(min[1]..max[1]), rng.gen_range(min[2]..max[2]))
}

/// One fuzzed sixteen-part human over `[0, duration]`.
pub fn fuzz_trace(seed: u64, duration: f64) -> Result<MeasurementBuffer, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bearing = rng.gen_range(-0.6 * PI..0.6 * PI);
    let range = rng.gen_range(0.95..1.25);
    let feet0 = Point3::new(range * bearing.cos(), range * bearing.sin(), -0.75);
    let heading = bearing + PI + rng.gen_range(-0.3..0.3);
    let feet = Polyline::random(&mut rng, feet0, duration, (0.5, 1.5), BODY_SPEED, |r| {
        feet0 + Vector3::new(r.gen_range(-0.15..0.15), r.gen_range(-0.15..0.15), 0.0)
    });
    let rest = Pose::standing(feet0, heading);
    let workspace = |r: &mut ChaCha8Rng| in_box(r, [-0.2, -0.7, 0.0], [0.8, 0.7, 0.55]);
    let hands = [rest.left_hand, rest.right_hand]
        .map(|start| Polyline::random(&mut rng, start, duration, (0.1, 0.5), HAND_SPEED, workspace));
    let mut buffer = MeasurementBuffer::new();
    let count = (duration * RATE).round() as usize;
    for k in 0..=count {
        let t = k as f64 / RATE;
        let pose = Pose { feet: feet.at(t), heading, left_hand: hands[0].at(t), right_hand: hands[1].at(t) };
        for (part, c) in pose.capsules() {
            buffer.push(t, 0, part, c).map_err(SimError::Scenario)?;
        }
    }
    Ok(buffer)
}

/// `base` with a fuzzed human, a random start on the path and the given horizon.
pub fn fuzz_scenario(base: &Scenario, seed: u64, horizon: f64) -> Result<Scenario, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut scn = base.clone();
    scn.name = format!("fuzz_{seed}");
    scn.humans = fuzz_trace(seed, horizon + scn.dt)?;
    scn.start_s = rng.gen_range(0.0..scn.path.period());
    scn.horizon = horizon;
    scn.seed = seed;
    Ok(scn)
}
