//! Post-hoc audit of a run against the true human motion.
//!
//! At every logged instant the true link capsules are tested against the
//! interpolated body-part capsules. Every overlap is a contact; its class
//! follows from the exact link velocities, and the contacting link's
//! effective energy must stay below the threshold of that class.

use contact_shield::geometry::{
    active_halfspaces, capsule_capsule_distance, capsule_intersects_polytope, capsule_polytope_distance,
    capsules_intersect, Capsule, OrientedBox, Polytope,
};
use contact_shield::human::{BodyPart, ContactGraph};
use contact_shield::trajectory::{link_states, LinkState};
use contact_shield::verification::ContactType;
use nalgebra::{Point3, Vector3};

use crate::run::RunResult;
use crate::scenario::Scenario;
use crate::SimError;

/// Contact class decided from the true state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrueClass {
    Ecc,
    Scc,
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditViolation {
    pub step: usize,
    pub t: f64,
    pub link: usize,
    /// Part ids, several for a combined body part.
    pub parts: Vec<String>,
    pub class: TrueClass,
    pub energy: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    /// Logged instants where a moving link overlaps the human.
    pub contact_instants: usize,
    /// Logged instants where the human overlaps only links at rest.
    pub resting_contact_instants: usize,
    pub violations: Vec<AuditViolation>,
}

impl AuditReport {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }
}

fn point_velocity(s: &LinkState, p: &Point3<f64>) -> Vector3<f64> {
    s.p1_velocity + s.omega.cross(&(p - s.p1))
}

/// Exact minimum of `n · v` over the capsule surface.
fn min_normal_speed(s: &LinkState, n: &Vector3<f64>) -> f64 {
    let axis = n.dot(&point_velocity(s, &s.p1)).min(n.dot(&point_velocity(s, &s.p2)));
    axis - s.radius * n.cross(&s.omega).norm()
}

fn max_normal_speed(s: &LinkState, n: &Vector3<f64>) -> f64 {
    -min_normal_speed(s, &-n)
}

fn touches_capsule(human: &[Capsule], c: &Capsule) -> bool {
    human.iter().any(|h| capsules_intersect(h, c))
}

fn clamped_against_element(link: &LinkState, cap: &Capsule, element: &Polytope, human: &[Capsule], diameter: f64) -> bool {
    if !human.iter().any(|h| capsule_intersects_polytope(h, element)) || capsule_polytope_distance(cap, element) > diameter {
        return false;
    }
    capsule_intersects_polytope(cap, element)
        || active_halfspaces(cap, element).into_iter().any(|h| min_normal_speed(link, &element.normals()[h]) < 0.0)
}

fn clamped_between_links(
    link: &LinkState,
    cap: &Capsule,
    other: &LinkState,
    other_cap: &Capsule,
    human: &[Capsule],
    diameter: f64,
) -> bool {
    if !touches_capsule(human, cap) || !touches_capsule(human, other_cap) || capsule_capsule_distance(cap, other_cap) > diameter {
        return false;
    }
    let other_box = OrientedBox::around_capsule(other_cap).to_polytope();
    capsule_intersects_polytope(cap, &other_box)
        || active_halfspaces(cap, &other_box).into_iter().any(|h| {
            let n = &other_box.normals()[h];
            min_normal_speed(link, n) < max_normal_speed(other, n)
        })
}

/// Class of a contact between link `i` and the human capsules.
pub fn true_class(scn: &Scenario, links: &[LinkState], i: usize, human: &[Capsule], diameter: f64) -> TrueClass {
    let cap = links[i].capsule();
    if scn.environment.elements.iter().any(|e| clamped_against_element(&links[i], &cap, &e.polytope, human, diameter)) {
        return TrueClass::Ecc;
    }
    for (l, other) in links.iter().enumerate() {
        if l != i
            && !scn.model.is_excluded_pair(i, l)
            && clamped_between_links(&links[i], &cap, other, &other.capsule(), human, diameter)
        {
            return TrueClass::Scc;
        }
    }
    TrueClass::Free
}

/// Audits every logged state of `result`.
pub fn audit_run(scn: &Scenario, result: &RunResult) -> Result<AuditReport, SimError> {
    let mut report = AuditReport::default();
    let geometry = |i: usize| scn.model.links()[i].geometry;
    for (k, entry) in result.log.iter().enumerate() {
        let truth: Vec<BodyPart> = scn.humans.interpolated_at(entry.t, &scn.human);
        if truth.is_empty() {
            continue;
        }
        let links = link_states(&scn.model, &entry.step.q, &entry.step.qd, &entry.step.qdd)?;
        let caps: Vec<Capsule> = truth.iter().map(|p| p.capsule).collect();
        let graph = ContactGraph::build(&truth, &caps, &scn.human);
        let components = graph.components();
        let (mut moving_contact, mut resting_contact) = (false, false);
        for (i, link) in links.iter().enumerate() {
            let cap = link.capsule();
            let energy = entry.energies[i];
            for (j, part) in truth.iter().enumerate() {
                if !capsules_intersect(&cap, &part.capsule) {
                    continue;
                }
                if energy > 0.0 {
                    moving_contact = true;
                } else {
                    resting_contact = true;
                }
                let class = true_class(scn, &links, i, &caps[j..=j], part.diameter);
                let contact = if class == TrueClass::Free { ContactType::Free } else { ContactType::Clamp };
                let threshold = scn.table.get(part.kind, geometry(i), contact)?;
                if energy >= threshold {
                    report.violations.push(AuditViolation {
                        step: k,
                        t: entry.t,
                        link: i,
                        parts: vec![part.part_id.clone()],
                        class,
                        energy,
                        threshold,
                    });
                }
                let Some(members) = components.iter().find(|c| c.len() > 1 && c.contains(&j)) else {
                    continue;
                };
                // Audit each combined part once per link, at its first touching member.
                if members.iter().find(|m| capsules_intersect(&cap, &caps[**m])) != Some(&j) {
                    continue;
                }
                let union: Vec<Capsule> = members.iter().map(|m| caps[*m]).collect();
                let diameter: f64 = members.iter().map(|m| truth[*m].diameter).sum();
                let class = true_class(scn, &links, i, &union, diameter);
                if class == TrueClass::Free {
                    continue;
                }
                let mut threshold = f64::INFINITY;
                for m in members {
                    threshold = threshold.min(scn.table.get(truth[*m].kind, geometry(i), ContactType::Clamp)?);
                }
                if energy >= threshold {
                    report.violations.push(AuditViolation {
                        step: k,
                        t: entry.t,
                        link: i,
                        parts: members.iter().map(|m| truth[*m].part_id.clone()).collect(),
                        class,
                        energy,
                        threshold,
                    });
                }
            }
        }
        report.contact_instants += usize::from(moving_contact);
        report.resting_contact_instants += usize::from(resting_contact && !moving_contact);
    }
    Ok(report)
}
