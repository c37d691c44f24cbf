//! Acceptance suite. Every criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails. Criteria run sequentially so the timing
//! criteria see an otherwise idle process.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use contact_shield::baselines::MethodId;
use contact_shield::geometry::{active_halfspaces, capsule_polytope_distance, Capsule, Polytope};
use contact_shield::human::{predict_occupancy, BodyKind, ContactGraph, HumanConfig, Measurement};
use contact_shield::robot::{ErrorBounds, GeometryClass, JointSpec, LinkSpec, RobotModel};
use contact_shield::trajectory::{build_monitored, intended_step, link_states, plan_failsafe, LinePath, PathLimits, PathState};
use contact_shield::verification::{
    ConstraintTag, ContactEnergyTable, ContactType, Environment, PartRef, Verifier, VerifyOptions,
};
use contact_sim::fuzz::fuzz_scenario;
use contact_sim::report::{report_rows, run_batch, Job, Outcome};
use contact_sim::run::run_scenario;
use contact_sim::{scenario_files, Scenario};
use nalgebra::{Isometry3, Matrix3, Point3, Translation3, Unit, UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn timed(id: u32, name: &'static str, f: impl FnOnce() -> (bool, String)) -> Line {
    let clock = Instant::now();
    let (pass, detail) = f();
    let line = Line { id, name, pass, detail, elapsed: clock.elapsed() };
    println!(
        "[{}] {}. {}: {} ({:.1} s)",
        if line.pass { "PASS" } else { "FAIL" },
        line.id,
        line.name,
        line.detail,
        line.elapsed.as_secs_f64()
    );
    line
}

fn unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Serial chain with random axes, frame offsets, limits and inertia.
fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> RobotModel {
    let mut joints = Vec::new();
    let mut links = Vec::new();
    for _ in 0..n {
        let off = Vector3::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        let rot = UnitQuaternion::from_euler_angles(rng.gen_range(-3.0..3.0), rng.gen_range(-1.5..1.5), rng.gen_range(-3.0..3.0));
        joints.push(JointSpec {
            axis: Unit::new_normalize(unit(rng)),
            origin: Isometry3::from_parts(Translation3::from(off), rot),
            qdot_max: rng.gen_range(0.5..2.0),
            qddot_max: rng.gen_range(1.0..5.0),
            qdddot_max: rng.gen_range(5.0..50.0),
        });
        let tip = Point3::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        links.push(LinkSpec {
            mass: rng.gen_range(0.5..4.0),
            inertia: Matrix3::from_diagonal(&Vector3::new(
                rng.gen_range(0.01..0.05),
                rng.gen_range(0.01..0.05),
                rng.gen_range(0.01..0.05),
            )),
            com: tip.coords * 0.5,
            capsule: Capsule::new(Point3::origin(), tip, rng.gen_range(0.02..0.1)),
            geometry: GeometryClass::Blunt,
            tracking_margin: 0.0,
        });
    }
    RobotModel::new("random", Isometry3::identity(), joints, links, [], ErrorBounds::default()).expect("valid chain")
}

/// Per-joint sinusoid whose speed, acceleration and jerk stay within the joint limits.
struct Sines {
    amp: Vec<f64>,
    freq: Vec<f64>,
    phase: Vec<f64>,
}

impl Sines {
    fn random(rng: &mut ChaCha8Rng, model: &RobotModel) -> Self {
        let (mut amp, mut freq, mut phase) = (Vec::new(), Vec::new(), Vec::new());
        for j in model.joints() {
            let f: f64 = rng.gen_range(0.5..6.0);
            let a = (j.qdot_max / f).min(j.qddot_max / (f * f)).min(j.qdddot_max / (f * f * f));
            amp.push(a * rng.gen_range(0.5..1.0));
            freq.push(f);
            phase.push(rng.gen_range(0.0..6.3));
        }
        Self { amp, freq, phase }
    }

    fn eval(&self, t: f64) -> [Vec<f64>; 3] {
        let n = self.amp.len();
        let mut out = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for k in 0..n {
            let (s, c) = (self.freq[k] * t + self.phase[k]).sin_cos();
            let (a, f) = (self.amp[k], self.freq[k]);
            out[0][k] = a * s;
            out[1][k] = a * f * c;
            out[2][k] = -a * f * f * s;
        }
        out
    }
}

fn velocity_bound_soundness() -> (bool, String) {
    const TRAJECTORIES: usize = 1000;
    const TIMES: usize = 100;
    const POINTS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let err = ErrorBounds::default();
    let mut worst = f64::INFINITY;
    let mut samples = 0usize;
    for _ in 0..TRAJECTORIES {
        let model = random_chain(&mut rng, 3);
        let bounds = model.angular_bounds();
        let motion = Sines::random(&mut rng, &model);
        let dt = rng.gen_range(0.002..0.05);
        let ta = rng.gen_range(0.0..5.0);
        let [q, qd, qdd] = motion.eval(ta + 0.5 * dt);
        let mid = link_states(&model, &q, &qd, &qdd).expect("dimensions match");
        let normals: Vec<Vector3<f64>> = (0..3).map(|_| unit(&mut rng)).collect();
        let lower: Vec<Vec<f64>> = (0..3)
            .map(|i| normals.iter().map(|n| mid[i].min_normal_speed(n, &err, bounds.jerk_bound(i), dt).expect("unit")).collect())
            .collect();
        for k in 0..TIMES {
            let t = if k == 0 { ta } else if k == 1 { ta + dt } else { ta + rng.gen_range(0.0..dt) };
            let [q, qd, qdd] = motion.eval(t);
            let kin = model.forward_kinematics(&q).expect("dimensions match");
            let motions = model.link_motions(&kin, &qd, &qdd).expect("dimensions match");
            for i in 0..3 {
                let c = &kin.capsules[i];
                let origin = kin.joint_origin(i);
                for _ in 0..POINTS {
                    let depth = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(0.0f64..1.0).cbrt() };
                    let p = c.point_at(rng.gen_range(0.0..=1.0)) + unit(&mut rng) * (c.radius * depth);
                    let v = motions[i].point_velocity(&origin, &p);
                    for (n, bound) in normals.iter().zip(&lower[i]) {
                        worst = worst.min(n.dot(&v) - bound);
                    }
                    samples += 1;
                }
            }
        }
    }
    let per_interval = samples / TRAJECTORIES;
    (
        worst >= -1e-9,
        format!("{TRAJECTORIES} trajectories, {per_interval} (point, time) samples per interval, min(n.v - bound) = {worst:.3e}"),
    )
}

fn distal_invariance() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut checks, mut bit_equal, mut worst_rel) = (0usize, 0usize, 0.0f64);
    for _ in 0..1000 {
        let model = random_chain(&mut rng, 6);
        let q: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let qd: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let base = model.effective_energies(&q, &qd).expect("dimensions match");
        for i in 0..6 {
            let mut other = qd.clone();
            for v in &mut other[i + 1..] {
                *v = rng.gen_range(-5.0..5.0);
            }
            let t = model.effective_energy(&q, &other, i).expect("dimensions match");
            checks += 1;
            if t.to_bits() == base[i].to_bits() {
                bit_equal += 1;
            } else {
                worst_rel = worst_rel.max((t - base[i]).abs() / base[i].abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    (
        worst_rel <= 1e-15,
        format!("1000 trials, {checks} link energies, {bit_equal} bit-identical, worst relative change {worst_rel:.1e}"),
    )
}

fn z_joint(offset: f64) -> JointSpec {
    JointSpec {
        axis: Vector3::z_axis(),
        origin: Isometry3::translation(offset, 0.0, 0.0),
        qdot_max: 1.0,
        qddot_max: 1.0,
        qdddot_max: 1.0,
    }
}

fn planar_link(length: f64, mass: f64, geometry: GeometryClass) -> LinkSpec {
    LinkSpec {
        mass,
        inertia: Matrix3::identity() * 1e-9,
        com: Vector3::new(length, 0.0, 0.0),
        capsule: Capsule::new(Point3::origin(), Point3::new(length, 0.0, 0.0), 0.05),
        geometry,
        tracking_margin: 0.0,
    }
}

fn combined_dominance() -> (bool, String) {
    const INSTANCES: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ids = ["left_hand", "left_lower_arm", "right_hand", "right_lower_arm", "torso", "head"];
    let (mut instances, mut member_failures, mut counterexamples) = (0usize, 0usize, 0usize);
    while instances < INSTANCES {
        let geoms = [GeometryClass::ALL[rng.gen_range(0..4)], GeometryClass::ALL[rng.gen_range(0..4)]];
        let model = RobotModel::new(
            "two",
            Isometry3::identity(),
            vec![z_joint(0.0), z_joint(0.4)],
            vec![planar_link(0.4, rng.gen_range(1.0..6.0), geoms[0]), planar_link(0.35, rng.gen_range(1.0..6.0), geoms[1])],
            [],
            ErrorBounds::default(),
        )
        .expect("valid planar arm");
        let path = LinePath {
            start: vec![rng.gen_range(-3.0..3.0), rng.gen_range(-2.5..2.5)],
            direction: vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        };
        let limits = PathLimits::derive(&path, &model).expect("derivable limits");
        let state = PathState { s: 0.0, sd: rng.gen_range(0.0..1.0), sdd: 0.0 };
        let dt = 0.05;
        let intended = intended_step(&path, &state, &limits, rng.gen_range(0.0..1.0), dt);
        let failsafe = plan_failsafe(&path, intended.path_states.last().expect("non-empty"), &limits, dt);
        let traj = build_monitored(intended, failsafe, dt, "acceptance").expect("consistent grid");
        let mut env = Environment::default();
        env.push_box("table", [-1.0, -1.0, -0.6], [1.0, 1.0, rng.gen_range(-0.3..-0.06)]).expect("valid box");
        let cfg = HumanConfig { max_speed: rng.gen_range(0.0..0.2), ..HumanConfig::default() };
        let centre = Point3::new(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7), rng.gen_range(-0.15..0.1));
        let humans: Vec<Measurement> = (0..rng.gen_range(2..6))
            .map(|_| {
                let p = centre + Vector3::new(rng.gen_range(-0.12..0.12), rng.gen_range(-0.12..0.12), rng.gen_range(-0.05..0.05));
                let q = p + Vector3::new(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15), 0.0);
                let id = ids[rng.gen_range(0..ids.len())];
                Measurement { part: cfg.body_part(0, id, Capsule::new(p, q, rng.gen_range(0.03..0.08))), stamp: 0.0 }
            })
            .collect();
        let parts: Vec<_> = humans.iter().map(|m| m.part.clone()).collect();
        let components: Vec<Vec<Vec<usize>>> = (0..traj.interval_count())
            .map(|a| {
                let occ: Vec<Capsule> = parts
                    .iter()
                    .map(|p| predict_occupancy(p, &cfg, traj.steps[a].t, traj.steps[a + 1].t).expect("valid interval"))
                    .collect();
                ContactGraph::build(&parts, &occ, &cfg).components().into_iter().filter(|c| c.len() > 1).collect()
            })
            .collect();
        if components.iter().all(Vec::is_empty) {
            continue;
        }
        instances += 1;
        let verifier = Verifier::new(model, env, ContactEnergyTable::default(), cfg)
            .with_options(VerifyOptions { enumerate_all: true, ..VerifyOptions::default() });
        let verdict = verifier.verify(&traj, &humans, 0.0).expect("valid inputs");
        for v in &verdict.violations {
            let PartRef::Single(m) = v.part else { continue };
            if v.constraint != ConstraintTag::ClampEnergy {
                continue;
            }
            let Some(members) = components[v.interval].iter().find(|c| c.contains(&m)) else { continue };
            member_failures += 1;
            let combined_failed = verdict
                .violations
                .iter()
                .any(|w| w.interval == v.interval && w.link == v.link && w.part == PartRef::Combined(members.clone()));
            counterexamples += usize::from(!combined_failed);
        }
    }
    (
        counterexamples == 0 && member_failures > 0,
        format!("{instances} multi-part instances, {member_failures} member clamp failures, {counterexamples} with a passing combined part"),
    )
}

fn table_fidelity() -> (bool, String) {
    let published: [(BodyKind, [f64; 4], [f64; 4]); 5] = [
        (BodyKind::Hand, [0.49, 0.05, 0.02, 0.11], [0.49, 2.0, 0.375, 0.9]),
        (BodyKind::LowerArm, [1.3, 0.05, 0.02, 0.11], [1.3, 2.0, 0.375, 0.9]),
        (BodyKind::UpperArm, [1.5, 0.05, 0.02, 0.11], [1.5, 0.5, 0.2, 0.5]),
        (BodyKind::Torso, [1.6, 0.05, 0.02, 0.11], [1.6, 0.5, 0.2, 0.5]),
        (BodyKind::Head, [0.11, 0.05, 0.02, 0.11], [0.11, 0.11, 0.11, 0.11]),
    ];
    let table = ContactEnergyTable::default();
    let geoms = [GeometryClass::Blunt, GeometryClass::Wedge, GeometryClass::Edge, GeometryClass::Sheet];
    let (mut matched, mut total) = (0, 0);
    for (kind, clamp, free) in published {
        for (g, geom) in geoms.into_iter().enumerate() {
            for (contact, value) in [(ContactType::Clamp, clamp[g]), (ContactType::Free, free[g])] {
                total += 1;
                if table.get(kind, geom, contact).ok() == Some(value) {
                    matched += 1;
                }
            }
        }
    }
    (matched == 40 && total == 40, format!("{matched}/{total} entries exact"))
}

/// Distance from `q` to the polytope by enumerating every face, edge and
/// vertex candidate as the projection onto up to three boundary planes.
fn point_polytope_distance(q: &Point3<f64>, normals: &[Vector3<f64>], offsets: &[f64]) -> f64 {
    let feasible = |x: &Vector3<f64>| normals.iter().zip(offsets).all(|(n, d)| n.dot(x) <= d + 1e-9);
    if feasible(&q.coords) {
        return 0.0;
    }
    let h = normals.len();
    let mut best = f64::INFINITY;
    let mut consider = |set: &[usize]| {
        let k = set.len();
        let n = nalgebra::DMatrix::from_fn(k, 3, |r, c| normals[set[r]][c]);
        let gram = &n * n.transpose();
        if gram.determinant().abs() < 1e-10 {
            return;
        }
        let residual = nalgebra::DVector::from_fn(k, |r, _| normals[set[r]].dot(&q.coords) - offsets[set[r]]);
        let Some(inv) = gram.try_inverse() else { return };
        let step = n.transpose() * (inv * residual);
        let x = q.coords - Vector3::new(step[0], step[1], step[2]);
        if feasible(&x) {
            best = best.min((q.coords - x).norm());
        }
    };
    for a in 0..h {
        consider(&[a]);
        for b in a + 1..h {
            consider(&[a, b]);
            for c in b + 1..h {
                consider(&[a, b, c]);
            }
        }
    }
    best
}

fn random_polytope(rng: &mut ChaCha8Rng) -> (Vec<Vector3<f64>>, Vec<f64>) {
    let mut normals = Vec::new();
    let mut offsets = Vec::new();
    for k in 0..3 {
        let e = Vector3::ith(k, 1.0);
        normals.push(e);
        offsets.push(rng.gen_range(0.3..1.0));
        normals.push(-e);
        offsets.push(rng.gen_range(0.3..1.0));
    }
    for _ in 0..rng.gen_range(0..4) {
        normals.push(unit(rng));
        offsets.push(rng.gen_range(0.35..1.0));
    }
    (normals, offsets)
}

fn geometry_oracle() -> (bool, String) {
    const DENSE: usize = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sphere: Vec<Vector3<f64>> = {
        let n = 1000;
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..n)
            .map(|k| {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * k as f64;
                Vector3::new(r * phi.cos(), r * phi.sin(), z)
            })
            .collect()
    };
    let (mut worst_distance, mut active_mismatches, mut active_checked, mut ambiguous) = (0.0f64, 0usize, 0usize, 0usize);
    for _ in 0..1000 {
        let (normals, offsets) = random_polytope(&mut rng);
        let poly = Polytope::new(normals.clone(), offsets.clone()).expect("bounded polytope");
        let p1 = Point3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let p2 = p1 + unit(&mut rng) * rng.gen_range(0.0..1.5);
        let cap = Capsule::new(p1, p2, rng.gen_range(0.0..0.5));

        let axis = |lambda: f64| point_polytope_distance(&cap.point_at(lambda), &normals, &offsets);
        let (mut best_lambda, mut best) = (0.0, f64::INFINITY);
        for k in 0..=DENSE {
            let lambda = k as f64 / DENSE as f64;
            let d = axis(lambda);
            if d < best {
                (best_lambda, best) = (lambda, d);
            }
        }
        let (mut lo, mut hi) = ((best_lambda - 1.0 / DENSE as f64).max(0.0), (best_lambda + 1.0 / DENSE as f64).min(1.0));
        for _ in 0..80 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if axis(m1) <= axis(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let oracle = (best.min(axis(0.5 * (lo + hi))) - cap.radius).max(0.0);
        worst_distance = worst_distance.max((oracle - capsule_polytope_distance(&cap, &poly)).abs());

        let active = active_halfspaces(&cap, &poly);
        let mut best: Vec<(f64, Vector3<f64>, f64)> = vec![(0.0, sphere[0], f64::NEG_INFINITY); normals.len()];
        for l in 0..=100 {
            let lambda = l as f64 / 100.0;
            let centre = cap.point_at(lambda).coords;
            for s in &sphere {
                let p = centre + s * cap.radius;
                for (b, n) in best.iter_mut().zip(&normals) {
                    let v = n.dot(&p);
                    if v > b.2 {
                        *b = (lambda, *s, v);
                    }
                }
            }
        }
        for (k, (n, d)) in normals.iter().zip(&offsets).enumerate() {
            let reach = |lambda: f64, u: &Vector3<f64>| n.dot(&(cap.point_at(lambda).coords + u * cap.radius));
            let (mut lambda, mut u, mut top) = best[k];
            let mut step = 0.05;
            while step > 1e-9 {
                let cand_lambda = (lambda + rng.gen_range(-step..step)).clamp(0.0, 1.0);
                let cand_u = (u + unit(&mut rng) * step).normalize();
                let v = reach(cand_lambda, &cand_u);
                if v > top {
                    (lambda, u, top) = (cand_lambda, cand_u, v);
                } else {
                    step *= 0.97;
                }
            }
            if (top - d).abs() <= 1e-4 {
                ambiguous += 1;
                continue;
            }
            active_checked += 1;
            active_mismatches += usize::from((top > *d) != active.contains(&k));
        }
    }
    (
        worst_distance <= 1e-4 && active_mismatches == 0,
        format!(
            "1000 instances, worst distance error {worst_distance:.2e}, active sets {active_mismatches} mismatches in {active_checked} planes ({ambiguous} within 1e-4 of the plane skipped)"
        ),
    )
}

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn load_pack() -> Vec<Scenario> {
    scenario_files(scenarios_dir())
        .expect("scenario directory")
        .iter()
        .map(|f| Scenario::from_file(f).expect("valid scenario"))
        .collect()
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn pack_outcomes(pack: &[Scenario]) -> Vec<Outcome> {
    let mut jobs = Vec::new();
    for (k, scn) in pack.iter().enumerate() {
        for method in MethodId::ALL {
            jobs.push(Job { scenario: k, method, seed: scn.seed });
        }
    }
    run_batch(pack, &jobs, true, workers()).expect("pack runs")
}

fn shield_audit(pack: &[Scenario], outcomes: &[Outcome], started: Instant) -> (bool, String) {
    const FUZZ: u64 = 1000;
    let fuzzed: Vec<Scenario> =
        (0..FUZZ).map(|k| fuzz_scenario(&pack[k as usize % pack.len()], k, 1.5).expect("fuzzed scenario")).collect();
    let max_speed = fuzzed.iter().map(|s| s.humans.max_speed()).fold(0.0, f64::max);
    let mut jobs = Vec::new();
    for k in 0..fuzzed.len() {
        for method in [MethodId::Sara, MethodId::DynamicSsm] {
            jobs.push(Job { scenario: k, method, seed: fuzzed[k].seed });
        }
    }
    let fuzz_outcomes = run_batch(&fuzzed, &jobs, true, workers()).expect("fuzz runs");
    let pack_relevant = outcomes.iter().filter(|o| matches!(o.run.method, MethodId::Sara | MethodId::DynamicSsm));
    let all: Vec<&Outcome> = pack_relevant.chain(&fuzz_outcomes).collect();
    let tally = |method: MethodId, f: fn(&Outcome) -> usize| all.iter().filter(|o| o.run.method == method).map(|o| f(o)).sum::<usize>();
    let sara_violations = tally(MethodId::Sara, |o| o.audit.as_ref().expect("audited").violation_count());
    let sara_mismatches = tally(MethodId::Sara, |o| o.run.structural_mismatches);
    let ssm_contacts = tally(MethodId::DynamicSsm, |o| o.audit.as_ref().expect("audited").contact_instants);
    let ssm_resting = tally(MethodId::DynamicSsm, |o| o.audit.as_ref().expect("audited").resting_contact_instants);
    let elapsed = started.elapsed();
    (
        sara_violations == 0 && sara_mismatches == 0 && ssm_contacts == 0 && max_speed <= 1.6 && elapsed < Duration::from_secs(600),
        format!(
            "{} pack + {FUZZ} fuzzed traces (max speed {max_speed:.3} m/s): sara violations {sara_violations}, sara structural mismatches {sara_mismatches}, dynamicSSM contact instants {ssm_contacts} ({ssm_resting} against a resting robot), {:.0} s of 600 s",
            pack.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn efficiency_ordering(outcomes: &[Outcome]) -> (bool, String) {
    let rows = report_rows(outcomes);
    let mean = |m: MethodId| {
        let r: Vec<f64> = rows.iter().filter(|r| r.method == m).map(|r| r.efficiency_mean).collect();
        r.iter().sum::<f64>() / r.len() as f64
    };
    let [sara, no_cfree, dssm, zone, rsz, pfl] = [
        MethodId::Sara,
        MethodId::SaraNoCfree,
        MethodId::DynamicSsm,
        MethodId::SsmZone,
        MethodId::ReducedSpeedZone,
        MethodId::ReducedSpeedPfl,
    ]
    .map(mean);
    (
        sara > no_cfree && sara > dssm && dssm > zone && rsz > pfl,
        format!(
            "sara {sara:.1} / saraNoCfree {no_cfree:.1} / dynamicSSM {dssm:.1} / ssmZone {zone:.1}; reducedSpeedZone {rsz:.1} / reducedSpeedPFL {pfl:.1}"
        ),
    )
}

fn verification_time(pack: &[Scenario]) -> (bool, String) {
    let scn = pack.iter().find(|s| s.name == "dual_arm_clutter").expect("dual_arm_clutter in pack");
    let humans = scn.humans.humans().len();
    let parts = scn.humans.track_count();
    let result = run_scenario(scn, MethodId::Sara).expect("run");
    let mean = result.mean_verify_time().expect("verified steps").as_secs_f64() * 1e3;
    (
        scn.model.dof() == 6 && humans == 1 && parts == 16 && scn.environment.len() == 3 && mean < 5.0,
        format!(
            "{} DoF, {humans} human with {parts} parts, {} elements: {mean:.3} ms mean over {} steps",
            scn.model.dof(),
            scn.environment.len(),
            result.verify_calls
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let mut lines = vec![
        timed(1, "velocity bound soundness", velocity_bound_soundness),
        timed(2, "effective energy ignores distal joint speeds", distal_invariance),
        timed(3, "combined part dominates its members", combined_dominance),
        timed(4, "contact energy table", table_fidelity),
    ];
    let pack = load_pack();
    let started = Instant::now();
    let outcomes = pack_outcomes(&pack);
    lines.push(timed(5, "shield audit", || shield_audit(&pack, &outcomes, started)));
    lines.push(timed(6, "efficiency ordering", || efficiency_ordering(&outcomes)));
    lines.push(timed(7, "geometry oracle", geometry_oracle));
    lines.push(timed(8, "verification time", || verification_time(&pack)));
    lines.sort_by_key(|l| l.id);
    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
