//! Human body parts: measured capsules, speed-bounded occupancy prediction,
//! the multi-body contact graph and combined body parts.
//!
//! Trace files are CSV with the header
//! `time_s,human_id,part_id,p1x,p1y,p1z,p2x,p2y,p2z,radius_m`.
//! Part kinds are inferred from the part id suffix (`left_hand` is a hand).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{capsules_intersect, Capsule};

#[derive(Debug, Error)]
pub enum HumanError {
    #[error("prediction interval [{t_a}, {t_b}] must satisfy 0 <= t_a <= t_b")]
    Interval { t_a: f64, t_b: f64 },
    #[error("invalid human configuration: {0}")]
    Config(String),
    #[error("trace row {row}: {message}")]
    Trace { row: usize, message: String },
    #[error("cannot read trace: {0}")]
    Csv(#[from] csv::Error),
    #[error("cannot read trace: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Hand,
    LowerArm,
    UpperArm,
    Torso,
    Head,
    Other,
}

impl BodyKind {
    pub const ALL: [BodyKind; 6] = [Self::Hand, Self::LowerArm, Self::UpperArm, Self::Torso, Self::Head, Self::Other];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hand => "hand",
            Self::LowerArm => "lower_arm",
            Self::UpperArm => "upper_arm",
            Self::Torso => "torso",
            Self::Head => "head",
            Self::Other => "other",
        }
    }

    /// Kind implied by a part id such as `right_lower_arm` or `head`.
    pub fn from_part_id(id: &str) -> Self {
        [Self::LowerArm, Self::UpperArm, Self::Hand, Self::Torso, Self::Head]
            .into_iter()
            .find(|k| id == k.name() || id.ends_with(&format!("_{}", k.name())))
            .unwrap_or(Self::Other)
    }
}

/// 95th-percentile style diameters per body kind (m). Placeholder values
/// meant to be overridden for a concrete deployment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiameterTable {
    pub hand: f64,
    pub lower_arm: f64,
    pub upper_arm: f64,
    pub torso: f64,
    pub head: f64,
    pub other: f64,
}

impl Default for DiameterTable {
    fn default() -> Self {
        Self { hand: 0.205, lower_arm: 0.121, upper_arm: 0.112, torso: 0.40, head: 0.205, other: 0.40 }
    }
}

impl DiameterTable {
    pub fn get(&self, kind: BodyKind) -> f64 {
        match kind {
            BodyKind::Hand => self.hand,
            BodyKind::LowerArm => self.lower_arm,
            BodyKind::UpperArm => self.upper_arm,
            BodyKind::Torso => self.torso,
            BodyKind::Head => self.head,
            BodyKind::Other => self.other,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyPart {
    pub part_id: String,
    pub human_id: u32,
    pub kind: BodyKind,
    pub diameter: f64,
    pub capsule: Capsule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HumanConfig {
    /// Speed bound of every body point (m/s).
    pub max_speed: f64,
    /// Position measurement error bound (m).
    pub meas_error: f64,
    /// Measurement latency (s).
    pub meas_delay: f64,
    /// Part-id pairs of one human that cannot be clamped together.
    pub safe_pairs: Vec<[String; 2]>,
    pub diameters: DiameterTable,
}

impl Default for HumanConfig {
    fn default() -> Self {
        let mut safe_pairs = Vec::new();
        for side in ["left", "right"] {
            safe_pairs.push([format!("{side}_hand"), format!("{side}_lower_arm")]);
            safe_pairs.push([format!("{side}_lower_arm"), format!("{side}_upper_arm")]);
        }
        Self { max_speed: 1.6, meas_error: 0.0, meas_delay: 0.0, safe_pairs, diameters: DiameterTable::default() }
    }
}

impl HumanConfig {
    pub fn validate(&self) -> Result<(), HumanError> {
        if !(self.max_speed.is_finite() && self.max_speed > 0.0) {
            return Err(HumanError::Config("max_speed must be positive".into()));
        }
        if !(self.meas_error >= 0.0 && self.meas_delay >= 0.0) {
            return Err(HumanError::Config("measurement error and delay must be non-negative".into()));
        }
        if BodyKind::ALL.iter().any(|k| !(self.diameters.get(*k) > 0.0)) {
            return Err(HumanError::Config("body-part diameters must be positive".into()));
        }
        Ok(())
    }

    /// Whether two parts of the same human are listed as a safe pair.
    pub fn is_safe_pair(&self, a: &BodyPart, b: &BodyPart) -> bool {
        a.human_id == b.human_id
            && self.safe_pairs.iter().any(|[x, y]| {
                (x == &a.part_id && y == &b.part_id) || (x == &b.part_id && y == &a.part_id)
            })
    }

    pub fn body_part(&self, human_id: u32, part_id: &str, capsule: Capsule) -> BodyPart {
        let kind = BodyKind::from_part_id(part_id);
        BodyPart { part_id: part_id.to_owned(), human_id, kind, diameter: self.diameters.get(kind), capsule }
    }
}

/// Occupancy of `part` over `[t_a, t_b]`, times measured from now, for a
/// measurement that is `meas_delay` old.
pub fn predict_occupancy(part: &BodyPart, cfg: &HumanConfig, t_a: f64, t_b: f64) -> Result<Capsule, HumanError> {
    predict_occupancy_aged(part, cfg, cfg.meas_delay, t_a, t_b)
}

/// As [`predict_occupancy`] for a measurement of the given age; ages below
/// the configured delay are raised to it.
pub fn predict_occupancy_aged(
    part: &BodyPart,
    cfg: &HumanConfig,
    age: f64,
    t_a: f64,
    t_b: f64,
) -> Result<Capsule, HumanError> {
    if !(t_a >= 0.0 && t_b >= t_a && t_b.is_finite()) {
        return Err(HumanError::Interval { t_a, t_b });
    }
    let horizon = t_b + age.max(cfg.meas_delay);
    Ok(part.capsule.inflated(cfg.meas_error + cfg.max_speed * horizon))
}

/// Undirected graph over body parts: an edge joins two parts whose
/// occupancies meet unless they form a safe pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactGraph {
    adjacency: Vec<Vec<usize>>,
}

impl ContactGraph {
    pub fn build(parts: &[BodyPart], occupancies: &[Capsule], cfg: &HumanConfig) -> Self {
        assert_eq!(parts.len(), occupancies.len(), "one occupancy per body part");
        let n = parts.len();
        let mut adjacency = vec![Vec::new(); n];
        for a in 0..n {
            for b in (a + 1)..n {
                if !cfg.is_safe_pair(&parts[a], &parts[b]) && capsules_intersect(&occupancies[a], &occupancies[b]) {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
        }
        Self { adjacency }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected components by depth-first search, each sorted, ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Virtual body part standing for a group of parts that may be clamped together.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedBodyPart {
    /// Indices into the part list the graph was built from.
    pub members: Vec<usize>,
    pub diameter: f64,
    /// Union of the member occupancies.
    pub occupancy: Vec<Capsule>,
}

impl CombinedBodyPart {
    /// Smallest of the member values of `threshold`.
    pub fn min_threshold(&self, parts: &[BodyPart], threshold: impl Fn(&BodyPart) -> f64) -> f64 {
        self.members.iter().map(|&m| threshold(&parts[m])).fold(f64::INFINITY, f64::min)
    }
}

/// One combined part per connected component with more than one member.
pub fn combined_body_parts(graph: &ContactGraph, parts: &[BodyPart], occupancies: &[Capsule]) -> Vec<CombinedBodyPart> {
    graph
        .components()
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|members| CombinedBodyPart {
            diameter: members.iter().map(|&m| parts[m].diameter).sum(),
            occupancy: members.iter().map(|&m| occupancies[m]).collect(),
            members,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub time_s: f64,
    pub human_id: u32,
    pub part_id: String,
    pub p1x: f64,
    pub p1y: f64,
    pub p1z: f64,
    pub p2x: f64,
    pub p2y: f64,
    pub p2z: f64,
    pub radius_m: f64,
}

impl TraceRow {
    pub fn capsule(&self) -> Capsule {
        Capsule::new(
            Point3::new(self.p1x, self.p1y, self.p1z),
            Point3::new(self.p2x, self.p2y, self.p2z),
            self.radius_m,
        )
    }

    pub fn new(time_s: f64, human_id: u32, part_id: &str, c: &Capsule) -> Self {
        Self {
            time_s,
            human_id,
            part_id: part_id.to_owned(),
            p1x: c.p1.x,
            p1y: c.p1.y,
            p1z: c.p1.z,
            p2x: c.p2.x,
            p2y: c.p2.y,
            p2z: c.p2.z,
            radius_m: c.radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Track {
    times: Vec<f64>,
    capsules: Vec<Capsule>,
}

/// A body part as last measured, with the measurement time.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub part: BodyPart,
    pub stamp: f64,
}

/// Time-ordered capsule measurements per (human, part).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurementBuffer {
    tracks: BTreeMap<(u32, String), Track>,
}

impl MeasurementBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, human_id: u32, part_id: &str, capsule: Capsule) -> Result<(), String> {
        if !time.is_finite() || !capsule.is_finite() {
            return Err("non-finite value".into());
        }
        let track = self.tracks.entry((human_id, part_id.to_owned())).or_default();
        if let Some(&last) = track.times.last() {
            if time <= last {
                return Err(format!("time {time} not after {last} for human {human_id} part {part_id}"));
            }
        }
        track.times.push(time);
        track.capsules.push(capsule);
        Ok(())
    }

    /// Copy with every sample replaced by `f(human, part, time, capsule)`,
    /// visiting tracks in (human, part) order and samples in time order.
    pub fn map_capsules(&self, mut f: impl FnMut(u32, &str, f64, &Capsule) -> Capsule) -> Self {
        let tracks = self
            .tracks
            .iter()
            .map(|((h, p), track)| {
                let capsules = track.times.iter().zip(&track.capsules).map(|(t, c)| f(*h, p, *t, c)).collect();
                ((*h, p.clone()), Track { times: track.times.clone(), capsules })
            })
            .collect();
        Self { tracks }
    }

    /// Adds the tracks of `other`; a track present in both is an error.
    pub fn merge(&mut self, other: Self) -> Result<(), String> {
        for (key, track) in other.tracks {
            if self.tracks.contains_key(&key) {
                return Err(format!("human {} part {} appears twice", key.0, key.1));
            }
            self.tracks.insert(key, track);
        }
        Ok(())
    }

    pub fn from_reader(reader: impl Read) -> Result<Self, HumanError> {
        let mut buffer = Self::new();
        let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        for (k, row) in csv.deserialize::<TraceRow>().enumerate() {
            let row = row?;
            let trace_err = |message: String| HumanError::Trace { row: k + 1, message };
            if !(row.radius_m >= 0.0) {
                return Err(trace_err("radius must be non-negative".into()));
            }
            buffer.push(row.time_s, row.human_id, &row.part_id, row.capsule()).map_err(trace_err)?;
        }
        Ok(buffer)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, HumanError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    /// Writes rows sorted by time, then human, then part.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), HumanError> {
        let mut rows = Vec::new();
        for ((h, p), track) in &self.tracks {
            for (t, c) in track.times.iter().zip(&track.capsules) {
                rows.push(TraceRow::new(*t, *h, p, c));
            }
        }
        rows.sort_by(|a, b| {
            a.time_s.total_cmp(&b.time_s).then(a.human_id.cmp(&b.human_id)).then(a.part_id.cmp(&b.part_id))
        });
        let mut csv = csv::Writer::from_writer(writer);
        for r in rows {
            csv.serialize(r)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn track_count(&self) -> usize {
        self.tracks.len()
    }

    pub fn humans(&self) -> BTreeSet<u32> {
        self.tracks.keys().map(|(h, _)| *h).collect()
    }

    /// Latest measurement at or before `time` for every track that has one.
    pub fn latest_at(&self, time: f64, cfg: &HumanConfig) -> Vec<Measurement> {
        let mut out = Vec::new();
        for ((h, p), track) in &self.tracks {
            let idx = track.times.partition_point(|t| *t <= time);
            if idx > 0 {
                out.push(Measurement { part: cfg.body_part(*h, p, track.capsules[idx - 1]), stamp: track.times[idx - 1] });
            }
        }
        out
    }

    /// Piecewise-linear capsule of every track at `time`, holding the first
    /// and last samples outside the recorded span.
    pub fn interpolated_at(&self, time: f64, cfg: &HumanConfig) -> Vec<BodyPart> {
        let mut out = Vec::new();
        for ((h, p), track) in &self.tracks {
            let idx = track.times.partition_point(|t| *t <= time);
            let capsule = if idx == 0 {
                track.capsules[0]
            } else if idx == track.times.len() {
                track.capsules[idx - 1]
            } else {
                let (t0, t1) = (track.times[idx - 1], track.times[idx]);
                let s = (time - t0) / (t1 - t0);
                let (a, b) = (&track.capsules[idx - 1], &track.capsules[idx]);
                Capsule::new(
                    a.p1 + (b.p1 - a.p1) * s,
                    a.p2 + (b.p2 - a.p2) * s,
                    a.radius + (b.radius - a.radius) * s,
                )
            };
            out.push(cfg.body_part(*h, p, capsule));
        }
        out
    }

    /// Largest speed of any capsule endpoint between consecutive samples,
    /// plus the rate of radius change.
    pub fn max_speed(&self) -> f64 {
        let mut best: f64 = 0.0;
        for track in self.tracks.values() {
            for k in 1..track.times.len() {
                let dt = track.times[k] - track.times[k - 1];
                let (a, b) = (&track.capsules[k - 1], &track.capsules[k]);
                let v = (b.p1 - a.p1).norm().max((b.p2 - a.p2).norm()) + (b.radius - a.radius).abs();
                best = best.max(v / dt);
            }
        }
        best
    }
}

/// Part ids of the standard sixteen-part skeleton.
pub const SKELETON_PARTS: [&str; 16] = [
    "head",
    "neck",
    "torso",
    "pelvis",
    "left_upper_arm",
    "left_lower_arm",
    "left_hand",
    "right_upper_arm",
    "right_lower_arm",
    "right_hand",
    "left_thigh",
    "left_shin",
    "left_foot",
    "right_thigh",
    "right_shin",
    "right_foot",
];
