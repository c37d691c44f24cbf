//! Contact classification, energy constraints and the per-trajectory
//! safety verdict, plus the shield that gates execution on it.

mod classify;
mod environment;
mod shield;
mod table;

use thiserror::Error;

use crate::geometry::{capsules_intersect, Capsule, OrientedBox, Polytope};
use crate::human::{combined_body_parts, predict_occupancy_aged, BodyPart, ContactGraph, HumanConfig, HumanError, Measurement};
use crate::robot::{AngularBounds, RobotError, RobotModel};
use crate::trajectory::{robot_reach, LinkReach, MonitoredTrajectory, TrajectoryError};

pub use classify::{ecc_excluded, scc_excluded, Relaxations};
pub use environment::{Environment, EnvironmentElement};
pub use shield::{Shield, ShieldStep};
pub use table::{force_from_energy, ContactEnergyTable, ContactType};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("no {contact} threshold for {kind} against a {geometry} link")]
    MissingThreshold { kind: &'static str, geometry: &'static str, contact: &'static str },
    #[error("trajectory grid is inconsistent: {0}")]
    GridMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Robot(#[from] RobotError),
    #[error(transparent)]
    Human(#[from] HumanError),
}

/// Which constraint each possible contact must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Classify contacts; unconstrained ones use the free thresholds.
    Sara,
    /// Every contact uses the clamp thresholds.
    ClampOnly,
    /// No contact is allowed at all.
    ContactOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub policy: Policy,
    pub relaxations: Relaxations,
    /// Keep going after the first violation and record all of them.
    pub enumerate_all: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { policy: Policy::Sara, relaxations: Relaxations::default(), enumerate_all: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintTag {
    FreeEnergy,
    ClampEnergy,
    NoContact,
}

impl ConstraintTag {
    pub fn name(self) -> &'static str {
        match self {
            Self::FreeEnergy => "free-energy",
            Self::ClampEnergy => "clamp-energy",
            Self::NoContact => "no-contact",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactClass {
    Ecc,
    Scc,
    Unconstrained,
    /// The policy did not classify the contact.
    Unclassified,
}

impl ContactClass {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ecc => "ecc",
            Self::Scc => "scc",
            Self::Unconstrained => "unconstrained",
            Self::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartRef {
    Single(usize),
    /// Indices of the members of a combined body part.
    Combined(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub interval: usize,
    pub link: usize,
    pub part: PartRef,
    pub constraint: ConstraintTag,
    pub class: ContactClass,
    pub energy: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub safe: bool,
    pub first_violation: Option<Violation>,
    /// All violations when enumeration was requested, else at most the first.
    pub violations: Vec<Violation>,
}

impl Verdict {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self { safe: violations.is_empty(), first_violation: violations.first().cloned(), violations }
    }
}

/// Everything needed to verify monitored trajectories of one robot in one cell.
#[derive(Debug, Clone)]
pub struct Verifier {
    pub model: RobotModel,
    pub bounds: AngularBounds,
    pub environment: Environment,
    pub table: ContactEnergyTable,
    pub human: HumanConfig,
    pub options: VerifyOptions,
}

/// Members, summed diameter and member occupancies of a combined part.
type CombinedOccupancy = (Vec<usize>, f64, Vec<Capsule>);

/// Human occupancies of one interval; combined parts are built on first use.
struct HumanInterval {
    parts: Vec<Capsule>,
    combined: Option<Vec<CombinedOccupancy>>,
}

impl Verifier {
    pub fn new(model: RobotModel, environment: Environment, table: ContactEnergyTable, human: HumanConfig) -> Self {
        let bounds = model.angular_bounds();
        Self { model, bounds, environment, table, human, options: VerifyOptions::default() }
    }

    pub fn with_options(mut self, options: VerifyOptions) -> Self {
        self.options = options;
        self
    }

    /// Threshold for a contact between `link` and `part`.
    pub fn threshold(&self, link: usize, part: &BodyPart, contact: ContactType) -> Result<f64, VerifyError> {
        self.table.get(part.kind, self.model.links()[link].geometry, contact)
    }

    fn check_grid(traj: &MonitoredTrajectory) -> Result<(), VerifyError> {
        let k = traj.midpoints.len();
        if traj.steps.len() != k + 1 || traj.joint_speed_bounds.len() != k || traj.split_index > k || !(traj.dt > 0.0) {
            return Err(VerifyError::GridMismatch(format!(
                "{} steps, {} midpoints, {} speed bounds, split {}",
                traj.steps.len(),
                k,
                traj.joint_speed_bounds.len(),
                traj.split_index
            )));
        }
        Ok(())
    }

    fn human_interval(&self, humans: &[Measurement], now: f64, t_a: f64, t_b: f64) -> Result<HumanInterval, VerifyError> {
        let occ = humans
            .iter()
            .map(|m| predict_occupancy_aged(&m.part, &self.human, (now - m.stamp).max(0.0), t_a, t_b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HumanInterval { parts: occ, combined: None })
    }

    fn combined<'h>(&self, hum: &'h mut HumanInterval, humans: &[Measurement]) -> &'h [CombinedOccupancy] {
        hum.combined.get_or_insert_with(|| {
            let parts: Vec<BodyPart> = humans.iter().map(|m| m.part.clone()).collect();
            let graph = ContactGraph::build(&parts, &hum.parts, &self.human);
            combined_body_parts(&graph, &parts, &hum.parts).into_iter().map(|c| (c.members, c.diameter, c.occupancy)).collect()
        })
    }

    /// Safety verdict for `traj`, whose first step is at time `now`, against
    /// the latest human measurements.
    pub fn verify(&self, traj: &MonitoredTrajectory, humans: &[Measurement], now: f64) -> Result<Verdict, VerifyError> {
        Self::check_grid(traj)?;
        let reach = robot_reach(traj, &self.model, &self.bounds)?;
        let mut energies: Vec<Option<Vec<f64>>> = vec![None; traj.steps.len()];
        let mut violations = Vec::new();
        for (a, links) in reach.iter().enumerate() {
            let (t_a, t_b) = (traj.steps[a].t, traj.steps[a + 1].t);
            let mut hum = self.human_interval(humans, now, t_a, t_b)?;
            let mut boxes: Vec<Option<Polytope>> = vec![None; links.len()];
            for (i, link) in links.iter().enumerate() {
                let touching: Vec<usize> =
                    (0..hum.parts.len()).filter(|&j| capsules_intersect(&link.occupancy, &hum.parts[j])).collect();
                if touching.is_empty() {
                    continue;
                }
                let energy = self.interval_energy(traj, &mut energies, a, i)?;
                for &j in &touching {
                    let part = &humans[j].part;
                    let check = self.check_contact(links, &mut boxes, i, &hum.parts[j..=j], part.diameter, energy, |c| {
                        self.threshold(i, part, c)
                    })?;
                    if let Some((constraint, class, threshold)) = check {
                        violations.push(Violation { interval: a, link: i, part: PartRef::Single(j), constraint, class, energy, threshold });
                        if !self.options.enumerate_all {
                            return Ok(Verdict::from_violations(violations));
                        }
                    }
                }
                if self.options.policy == Policy::ContactOnly {
                    continue;
                }
                for (members, diameter, occ) in self.combined(&mut hum, humans) {
                    if !members.iter().any(|m| touching.contains(m)) {
                        continue;
                    }
                    let clamp = members
                        .iter()
                        .map(|&m| self.threshold(i, &humans[m].part, ContactType::Clamp))
                        .try_fold(f64::INFINITY, |acc, t| t.map(|t| acc.min(t)))?;
                    let check = self.check_contact(links, &mut boxes, i, occ, *diameter, energy, |c| match c {
                        ContactType::Clamp => Ok(clamp),
                        ContactType::Free => Ok(f64::INFINITY),
                    })?;
                    if let Some((constraint, class, threshold)) = check {
                        violations.push(Violation {
                            interval: a,
                            link: i,
                            part: PartRef::Combined(members.clone()),
                            constraint,
                            class,
                            energy,
                            threshold,
                        });
                        if !self.options.enumerate_all {
                            return Ok(Verdict::from_violations(violations));
                        }
                    }
                }
            }
        }
        Ok(Verdict::from_violations(violations))
    }

    fn interval_energy(
        &self,
        traj: &MonitoredTrajectory,
        cache: &mut [Option<Vec<f64>>],
        interval: usize,
        link: usize,
    ) -> Result<f64, VerifyError> {
        let mut best: f64 = 0.0;
        for k in [interval, interval + 1] {
            if cache[k].is_none() {
                let s = &traj.steps[k];
                cache[k] = Some(self.model.effective_energies(&s.q, &s.qd)?);
            }
            best = best.max(cache[k].as_ref().expect("filled above")[link]);
        }
        Ok(best)
    }

    /// Outcome of one possible contact: `None` when it passes, else the
    /// failed constraint, contact class and threshold.
    #[allow(clippy::too_many_arguments)]
    fn check_contact(
        &self,
        links: &[LinkReach],
        boxes: &mut [Option<Polytope>],
        i: usize,
        human: &[Capsule],
        diameter: f64,
        energy: f64,
        threshold: impl Fn(ContactType) -> Result<f64, VerifyError>,
    ) -> Result<Option<(ConstraintTag, ContactClass, f64)>, VerifyError> {
        match self.options.policy {
            Policy::ContactOnly => Ok(Some((ConstraintTag::NoContact, ContactClass::Unclassified, 0.0))),
            Policy::ClampOnly => {
                let clamp = threshold(ContactType::Clamp)?;
                Ok((energy >= clamp).then_some((ConstraintTag::ClampEnergy, ContactClass::Unclassified, clamp)))
            }
            Policy::Sara => {
                let clamp = threshold(ContactType::Clamp)?;
                let free = threshold(ContactType::Free)?;
                if energy < clamp && energy < free {
                    return Ok(None);
                }
                let class = self.classify(links, boxes, i, human, diameter)?;
                let (tag, limit) =
                    if class == ContactClass::Unconstrained { (ConstraintTag::FreeEnergy, free) } else { (ConstraintTag::ClampEnergy, clamp) };
                Ok((energy >= limit).then_some((tag, class, limit)))
            }
        }
    }

    fn classify(
        &self,
        links: &[LinkReach],
        boxes: &mut [Option<Polytope>],
        i: usize,
        human: &[Capsule],
        diameter: f64,
    ) -> Result<ContactClass, VerifyError> {
        let err = &self.model.error_bounds;
        let relax = self.options.relaxations;
        for e in &self.environment.elements {
            if !ecc_excluded(&links[i], human, diameter, &e.polytope, err, relax)? {
                return Ok(ContactClass::Ecc);
            }
        }
        for l in 0..links.len() {
            if l == i {
                continue;
            }
            let b = boxes[l].get_or_insert_with(|| OrientedBox::around_capsule(&links[l].occupancy).to_polytope());
            if !scc_excluded(&links[i], &links[l], b, self.model.is_excluded_pair(i, l), human, diameter, err, relax)? {
                return Ok(ContactClass::Scc);
            }
        }
        Ok(ContactClass::Unconstrained)
    }
}
