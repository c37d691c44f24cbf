use crate::geometry::{
    active_halfspaces, capsule_capsule_distance, capsule_intersects_polytope, capsule_polytope_distance,
    capsules_intersect, Capsule, Polytope,
};
use crate::robot::ErrorBounds;
use crate::trajectory::{LinkReach, TrajectoryError};

/// Which exclusion arguments the classifiers may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Relaxations {
    /// Constrained contact needs a gap no wider than the body part.
    pub diameter: bool,
    /// Constrained contact needs the link to approach the other body.
    pub velocity: bool,
    /// Link pairs listed in the model's exclusions cannot clamp.
    pub topology: bool,
}

impl Default for Relaxations {
    fn default() -> Self {
        Self { diameter: true, velocity: true, topology: true }
    }
}

impl Relaxations {
    pub const NONE: Self = Self { diameter: false, velocity: false, topology: false };
}

fn misses(human: &[Capsule], other: impl Fn(&Capsule) -> bool) -> bool {
    !human.iter().any(other)
}

/// True when clamping the human occupancy between `link` and `element` is
/// impossible during the interval.
pub fn ecc_excluded(
    link: &LinkReach,
    human: &[Capsule],
    diameter: f64,
    element: &Polytope,
    err: &ErrorBounds,
    relax: Relaxations,
) -> Result<bool, TrajectoryError> {
    if misses(human, |h| capsule_intersects_polytope(h, element)) {
        return Ok(true);
    }
    if relax.diameter && capsule_polytope_distance(&link.occupancy, element) > diameter {
        return Ok(true);
    }
    if relax.velocity && !capsule_intersects_polytope(&link.occupancy, element) {
        for h in active_halfspaces(&link.occupancy, element) {
            if link.min_normal_speed(&element.normals()[h], err)? < 0.0 {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// True when clamping the human occupancy between `link` and `other` is
/// impossible during the interval. `other_box` encloses `other.occupancy`.
#[allow(clippy::too_many_arguments)]
pub fn scc_excluded(
    link: &LinkReach,
    other: &LinkReach,
    other_box: &Polytope,
    excluded_pair: bool,
    human: &[Capsule],
    diameter: f64,
    err: &ErrorBounds,
    relax: Relaxations,
) -> Result<bool, TrajectoryError> {
    if relax.topology && excluded_pair {
        return Ok(true);
    }
    if misses(human, |h| capsules_intersect(h, &link.occupancy)) || misses(human, |h| capsules_intersect(h, &other.occupancy)) {
        return Ok(true);
    }
    if relax.diameter && capsule_capsule_distance(&link.occupancy, &other.occupancy) > diameter {
        return Ok(true);
    }
    if relax.velocity && !capsule_intersects_polytope(&link.occupancy, other_box) {
        for h in active_halfspaces(&link.occupancy, other_box) {
            let n = &other_box.normals()[h];
            if link.min_normal_speed(n, err)? < other.max_normal_speed(n, err)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OrientedBox;
    use crate::trajectory::LinkState;
    use nalgebra::{Point3, Vector3};

    fn reach(p1: [f64; 3], p2: [f64; 3], radius: f64, velocity: [f64; 3]) -> LinkReach {
        let (p1, p2) = (Point3::from(p1), Point3::from(p2));
        LinkReach {
            link: 0,
            occupancy: Capsule::new(p1, p2, radius),
            mid: LinkState {
                p1,
                p2,
                radius,
                p1_velocity: Vector3::from(velocity),
                omega: Vector3::zeros(),
                p1_acceleration: Vector3::zeros(),
                omega_dot: Vector3::zeros(),
            },
            jerk_bound: 0.0,
            dt: 0.01,
        }
    }

    fn table() -> Polytope {
        Polytope::aabb([-1.0, -1.0, -0.1], [1.0, 1.0, 0.0]).unwrap()
    }

    fn ball(x: f64, y: f64, z: f64, r: f64) -> Capsule {
        Capsule::ball(Point3::new(x, y, z), r)
    }

    const ERR: ErrorBounds = ErrorBounds { v_max: 0.0, omega_max: 0.0, a_max: 0.0, omega_dot_max: 0.0 };

    #[test]
    fn human_away_from_table_is_excluded() {
        let link = reach([0.0, 0.0, 0.1], [0.3, 0.0, 0.1], 0.05, [0.0, 0.0, -1.0]);
        let r = ecc_excluded(&link, &[ball(0.0, 0.0, 2.0, 0.1)], 0.205, &table(), &ERR, Relaxations::NONE).unwrap();
        assert!(r);
    }

    #[test]
    fn link_higher_than_hand_is_excluded() {
        let link = reach([0.0, 0.0, 0.55], [0.3, 0.0, 0.55], 0.05, [0.0, 0.0, -1.0]);
        let hand = [ball(0.0, 0.0, 0.1, 0.1)];
        assert!(ecc_excluded(&link, &hand, 0.205, &table(), &ERR, Relaxations::default()).unwrap());
        let strict = Relaxations { diameter: false, ..Relaxations::default() };
        assert!(!ecc_excluded(&link, &hand, 0.205, &table(), &ERR, strict).unwrap());
    }

    #[test]
    fn approaching_a_vertical_face_is_not_excluded() {
        // Link to the side of a box, lifting away from the top but drifting
        // toward the side face.
        let block = Polytope::aabb([0.0, -0.5, -0.5], [0.5, 0.5, 0.0]).unwrap();
        let link = reach([-0.15, 0.0, 0.05], [-0.15, 0.0, 0.25], 0.05, [0.3, 0.0, 0.5]);
        let hand = [ball(-0.05, 0.0, 0.0, 0.05)];
        assert!(!ecc_excluded(&link, &hand, 0.205, &block, &ERR, Relaxations::default()).unwrap());
        let leaving = reach([-0.15, 0.0, 0.05], [-0.15, 0.0, 0.25], 0.05, [-0.3, 0.0, 0.5]);
        assert!(ecc_excluded(&leaving, &hand, 0.205, &block, &ERR, Relaxations::default()).unwrap());
    }

    #[test]
    fn touching_link_is_never_velocity_excluded() {
        let link = reach([0.0, 0.0, 0.02], [0.3, 0.0, 0.02], 0.05, [0.0, 0.0, 1.0]);
        let hand = [ball(0.0, 0.0, 0.0, 0.05)];
        assert!(!ecc_excluded(&link, &hand, 0.205, &table(), &ERR, Relaxations::default()).unwrap());
    }

    fn box_of(r: &LinkReach) -> Polytope {
        OrientedBox::around_capsule(&r.occupancy).to_polytope()
    }

    #[test]
    fn excluded_pair_skips_everything() {
        let a = reach([0.0, 0.0, 0.0], [0.3, 0.0, 0.0], 0.05, [0.0; 3]);
        let b = reach([0.0, 0.1, 0.0], [0.3, 0.1, 0.0], 0.05, [0.0; 3]);
        let hand = [ball(0.1, 0.05, 0.0, 0.1)];
        assert!(scc_excluded(&a, &b, &box_of(&b), true, &hand, 0.205, &ERR, Relaxations::default()).unwrap());
        assert!(!scc_excluded(&a, &b, &box_of(&b), true, &hand, 0.205, &ERR, Relaxations::NONE).unwrap());
    }

    #[test]
    fn human_on_one_link_only_is_excluded() {
        let a = reach([0.0, 0.0, 0.0], [0.3, 0.0, 0.0], 0.05, [0.0; 3]);
        let b = reach([0.0, 1.0, 0.0], [0.3, 1.0, 0.0], 0.05, [0.0; 3]);
        let hand = [ball(0.1, 0.1, 0.0, 0.06)];
        assert!(scc_excluded(&a, &b, &box_of(&b), false, &hand, 0.205, &ERR, Relaxations::NONE).unwrap());
    }

    #[test]
    fn gap_equal_to_diameter_is_not_excluded() {
        // Surface gap of exactly 0.4 m between parallel links.
        let a = reach([0.0, 0.0, 0.0], [0.3, 0.0, 0.0], 0.05, [0.0; 3]);
        let b = reach([0.0, 0.5, 0.0], [0.3, 0.5, 0.0], 0.05, [0.0; 3]);
        let torso = [Capsule::new(Point3::new(0.1, 0.0, 0.0), Point3::new(0.1, 0.5, 0.0), 0.1)];
        let relax = Relaxations { velocity: false, ..Relaxations::default() };
        assert!(!scc_excluded(&a, &b, &box_of(&b), false, &torso, 0.40, &ERR, relax).unwrap());
        assert!(scc_excluded(&a, &b, &box_of(&b), false, &torso, 0.399, &ERR, relax).unwrap());
    }

    #[test]
    fn links_separating_are_excluded() {
        let a = reach([0.0, 0.0, 0.0], [0.3, 0.0, 0.0], 0.05, [0.0, -0.5, 0.0]);
        let b = reach([0.0, 0.3, 0.0], [0.3, 0.3, 0.0], 0.05, [0.0, 0.2, 0.0]);
        let hand = [Capsule::new(Point3::new(0.1, 0.0, 0.0), Point3::new(0.1, 0.3, 0.0), 0.06)];
        assert!(scc_excluded(&a, &b, &box_of(&b), false, &hand, 0.205, &ERR, Relaxations::default()).unwrap());
        let closing = reach([0.0, 0.0, 0.0], [0.3, 0.0, 0.0], 0.05, [0.0, 0.5, 0.0]);
        assert!(!scc_excluded(&closing, &b, &box_of(&b), false, &hand, 0.205, &ERR, Relaxations::default()).unwrap());
    }
}
