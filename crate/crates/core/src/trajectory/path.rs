//! Geometric joint paths `q(s)` and the path-speed limits they admit.
//!
//! Waypoint files are TOML:
//!
//! ```toml
//! [[waypoints]]
//! t = 0.0
//! q = [0.0, -0.5, 1.0, 0.0, 0.4, 0.0]
//!
//! [[waypoints]]
//! t = 1.5
//! q = [0.8, -0.3, 0.9, 0.0, 0.5, 0.0]
//! ```
//!
//! The path parameter is the waypoint time, so `ṡ = 1` replays the
//! waypoints on schedule. Paths are periodic: unless the last waypoint
//! repeats the first, the first is appended after one more first-segment
//! duration.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use super::TrajectoryError;
use crate::robot::RobotModel;

/// Joint position and its first three derivatives with respect to `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub q: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
}

pub trait JointPath: Send + Sync {
    fn dof(&self) -> usize;
    fn eval(&self, s: f64) -> PathPoint;
    /// Per-joint suprema of `|q'|`, `|q''|`, `|q'''|` over the whole path.
    fn derivative_bounds(&self) -> [Vec<f64>; 3];
}

/// Straight line `q(s) = start + s · direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePath {
    pub start: Vec<f64>,
    pub direction: Vec<f64>,
}

impl JointPath for LinePath {
    fn dof(&self) -> usize {
        self.start.len()
    }

    fn eval(&self, s: f64) -> PathPoint {
        let n = self.dof();
        PathPoint {
            q: self.start.iter().zip(&self.direction).map(|(a, d)| a + s * d).collect(),
            d1: self.direction.clone(),
            d2: vec![0.0; n],
            d3: vec![0.0; n],
        }
    }

    fn derivative_bounds(&self) -> [Vec<f64>; 3] {
        let n = self.dof();
        [self.direction.iter().map(|d| d.abs()).collect(), vec![0.0; n], vec![0.0; n]]
    }
}

/// Periodic C2 cubic spline through timed waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SplinePath {
    knots: Vec<f64>,
    /// `values[k][j]`: joint `j` at knot `k`, last knot repeating the first.
    values: Vec<Vec<f64>>,
    /// Second derivatives at the knots.
    moments: Vec<Vec<f64>>,
    bounds: [Vec<f64>; 3],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaypointDoc {
    t: f64,
    q: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaypointFile {
    waypoints: Vec<WaypointDoc>,
}

impl SplinePath {
    pub fn new(times: &[f64], points: &[Vec<f64>]) -> Result<Self, TrajectoryError> {
        let invalid = |m: &str| Err(TrajectoryError::Path(m.to_owned()));
        if times.len() != points.len() || times.len() < 2 {
            return invalid("need at least two waypoints with one time each");
        }
        let dof = points[0].len();
        if dof == 0 || points.iter().any(|p| p.len() != dof) {
            return invalid("waypoints must share a non-zero dimension");
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return invalid("waypoint times must be finite and strictly increasing");
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return invalid("waypoint positions must be finite");
        }
        let mut knots = times.to_vec();
        let mut values = points.to_vec();
        if values.last() != values.first() {
            knots.push(knots[knots.len() - 1] + (times[1] - times[0]));
            values.push(values[0].clone());
        }
        let segs = knots.len() - 1;
        if segs < 2 {
            return invalid("a closed path needs at least two distinct waypoints");
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        // Cyclic tridiagonal system for the knot moments.
        let mut a = DMatrix::zeros(segs, segs);
        for i in 0..segs {
            let prev = (i + segs - 1) % segs;
            let next = (i + 1) % segs;
            a[(i, prev)] += h[prev];
            a[(i, i)] += 2.0 * (h[prev] + h[i]);
            a[(i, next)] += h[i];
        }
        let lu = a.lu();
        let mut moments = vec![vec![0.0; dof]; segs + 1];
        for j in 0..dof {
            let rhs = DVector::from_fn(segs, |i, _| {
                let prev = (i + segs - 1) % segs;
                6.0 * ((values[i + 1][j] - values[i][j]) / h[i] - (values[i][j] - values[prev][j]) / h[prev])
            });
            let m = lu.solve(&rhs).ok_or_else(|| TrajectoryError::Path("singular spline system".into()))?;
            for i in 0..segs {
                moments[i][j] = m[i];
            }
            moments[segs][j] = m[0];
        }
        let mut path = Self { knots, values, moments, bounds: [vec![0.0; dof], vec![0.0; dof], vec![0.0; dof]] };
        path.bounds = path.exact_bounds();
        Ok(path)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, TrajectoryError> {
        let file: WaypointFile = toml::from_str(text).map_err(|e| TrajectoryError::Path(e.to_string()))?;
        let times: Vec<f64> = file.waypoints.iter().map(|w| w.t).collect();
        let points: Vec<Vec<f64>> = file.waypoints.into_iter().map(|w| w.q).collect();
        Self::new(&times, &points)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TrajectoryError> {
        let text = std::fs::read_to_string(path).map_err(|e| TrajectoryError::Path(e.to_string()))?;
        Self::from_toml_str(&text)
    }

    pub fn period(&self) -> f64 {
        self.knots[self.knots.len() - 1] - self.knots[0]
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let t0 = self.knots[0];
        let local = t0 + (s - t0).rem_euclid(self.period());
        let k = self.knots.partition_point(|k| *k <= local).clamp(1, self.knots.len() - 1) - 1;
        (k, local)
    }

    /// `|q'|` is maximal at a segment end or where `q''` changes sign;
    /// `|q''|` is linear per segment and `|q'''|` constant.
    fn exact_bounds(&self) -> [Vec<f64>; 3] {
        let dof = self.values[0].len();
        let mut out = [vec![0.0f64; dof], vec![0.0f64; dof], vec![0.0f64; dof]];
        for k in 0..self.knots.len() - 1 {
            let (x0, x1) = (self.knots[k], self.knots[k + 1]);
            let h = x1 - x0;
            for j in 0..dof {
                let (m0, m1) = (self.moments[k][j], self.moments[k + 1][j]);
                let mut cands = vec![x0, x1];
                if m0 * m1 < 0.0 {
                    cands.push(x0 + h * m0 / (m0 - m1));
                }
                for x in cands {
                    out[0][j] = out[0][j].max(self.segment_eval(k, j, x)[1].abs());
                }
                out[1][j] = out[1][j].max(m0.abs()).max(m1.abs());
                out[2][j] = out[2][j].max(((m1 - m0) / h).abs());
            }
        }
        out
    }

    fn segment_eval(&self, k: usize, j: usize, x: f64) -> [f64; 4] {
        let (x0, x1) = (self.knots[k], self.knots[k + 1]);
        let h = x1 - x0;
        let (m0, m1) = (self.moments[k][j], self.moments[k + 1][j]);
        let (y0, y1) = (self.values[k][j], self.values[k + 1][j]);
        let (a, b) = (x1 - x, x - x0);
        let c0 = y0 / h - m0 * h / 6.0;
        let c1 = y1 / h - m1 * h / 6.0;
        [
            m0 * a * a * a / (6.0 * h) + m1 * b * b * b / (6.0 * h) + c0 * a + c1 * b,
            -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - c0 + c1,
            m0 * a / h + m1 * b / h,
            (m1 - m0) / h,
        ]
    }
}

impl JointPath for SplinePath {
    fn dof(&self) -> usize {
        self.values[0].len()
    }

    fn eval(&self, s: f64) -> PathPoint {
        let (k, x) = self.locate(s);
        let n = self.dof();
        let mut p = PathPoint { q: vec![0.0; n], d1: vec![0.0; n], d2: vec![0.0; n], d3: vec![0.0; n] };
        for j in 0..n {
            let [q, d1, d2, d3] = self.segment_eval(k, j, x);
            p.q[j] = q;
            p.d1[j] = d1;
            p.d2[j] = d2;
            p.d3[j] = d3;
        }
        p
    }

    fn derivative_bounds(&self) -> [Vec<f64>; 3] {
        self.bounds.clone()
    }
}

/// Bounds on path speed, acceleration and jerk that keep every joint within
/// its limits for any `ṡ ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLimits {
    pub max_accel: f64,
    pub max_jerk: f64,
}

impl PathLimits {
    /// With `q̇ = q'ṡ`, `q̈ = q''ṡ² + q's̈` and
    /// `q⃛ = q'''ṡ³ + 3q''ṡs̈ + q's⃛`, bounding `|s̈| ≤ a` and `|s⃛| ≤ j`
    /// bounds every joint derivative for `0 ≤ ṡ ≤ 1`.
    pub fn derive(path: &dyn JointPath, model: &RobotModel) -> Result<Self, TrajectoryError> {
        if path.dof() != model.dof() {
            return Err(TrajectoryError::Dimension { expected: model.dof(), got: path.dof() });
        }
        let [d1, d2, d3] = path.derivative_bounds();
        let mut accel = f64::INFINITY;
        let mut jerk_room = f64::INFINITY;
        for (k, joint) in model.joints().iter().enumerate() {
            let violated = |what: &str| {
                Err(TrajectoryError::LimitViolation(format!("joint {k} {what} exceeds its limit at nominal speed")))
            };
            if d1[k] > joint.qdot_max {
                return violated("velocity");
            }
            if d2[k] >= joint.qddot_max {
                return violated("acceleration");
            }
            if d3[k] >= joint.qdddot_max {
                return violated("jerk");
            }
            if d1[k] > 0.0 {
                accel = accel.min((joint.qddot_max - d2[k]) / d1[k]);
            }
            if d2[k] > 0.0 {
                jerk_room = jerk_room.min((joint.qdddot_max - d3[k]) / (3.0 * d2[k]));
            }
        }
        // Keep half of the jerk headroom for s⃛ itself.
        let max_accel = accel.min(0.5 * jerk_room);
        let mut max_jerk = f64::INFINITY;
        for (k, joint) in model.joints().iter().enumerate() {
            if d1[k] > 0.0 {
                max_jerk = max_jerk.min((joint.qdddot_max - d3[k] - 3.0 * d2[k] * max_accel) / d1[k]);
            }
        }
        if !(max_accel.is_finite() && max_jerk.is_finite() && max_accel > 0.0 && max_jerk > 0.0) {
            return Err(TrajectoryError::LimitViolation("path leaves no room for speed changes".into()));
        }
        Ok(Self { max_accel, max_jerk })
    }
}
