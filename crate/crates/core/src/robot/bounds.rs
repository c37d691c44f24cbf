use super::RobotModel;

/// Joint-limit derived suprema of link angular velocity, acceleration and
/// jerk norms, plus the lever lengths needed to turn them into point bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularBounds {
    omega: Vec<f64>,
    omega_dot: Vec<f64>,
    omega_ddot: Vec<f64>,
    /// Distance from joint `j` to joint `j + 1` (zero for the last link).
    chain: Vec<f64>,
    /// Largest distance from joint `j` to any point of link `j`'s capsule.
    tip: Vec<f64>,
    qdot_max: Vec<f64>,
}

impl AngularBounds {
    pub fn from_model(model: &RobotModel) -> Self {
        let joints = model.joints();
        let n = joints.len();
        let qd: Vec<f64> = joints.iter().map(|j| j.qdot_max).collect();
        let qdd: Vec<f64> = joints.iter().map(|j| j.qddot_max).collect();
        let qddd: Vec<f64> = joints.iter().map(|j| j.qdddot_max).collect();
        let (omega, omega_dot, omega_ddot) = recursions(&qd, &qdd, &qddd);
        let chain = (0..n)
            .map(|j| if j + 1 < n { joints[j + 1].origin.translation.vector.norm() } else { 0.0 })
            .collect();
        let tip = model
            .links()
            .iter()
            .map(|l| l.capsule.p1.coords.norm().max(l.capsule.p2.coords.norm()) + l.capsule.radius)
            .collect();
        Self { omega, omega_dot, omega_ddot, chain, tip, qdot_max: qd }
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn omega_dot(&self) -> &[f64] {
        &self.omega_dot
    }

    pub fn omega_ddot(&self) -> &[f64] {
        &self.omega_ddot
    }

    /// Lever lengths `l_0..=l_link`: joint-to-joint for proximal links, the
    /// capsule reach for `link` itself.
    pub fn lengths_for(&self, link: usize) -> Vec<f64> {
        let mut out: Vec<f64> = self.chain[..link].to_vec();
        out.push(self.tip[link]);
        out
    }

    /// Upper bound on the jerk norm of any point on `link`'s capsule.
    pub fn jerk_bound(&self, link: usize) -> f64 {
        self.lengths_for(link)
            .iter()
            .enumerate()
            .map(|(j, l)| {
                let (w, wd, wdd) = (self.omega[j], self.omega_dot[j], self.omega_ddot[j]);
                l * (wdd + 3.0 * wd * w + w * w * w)
            })
            .sum()
    }

    /// Upper bound on the speed of any point on `link`'s capsule.
    pub fn max_point_speed(&self, link: usize) -> f64 {
        self.point_speed_bound(link, &self.qdot_max)
    }

    /// Speed bound for `link`'s capsule points given bounds on `|q̇|`.
    pub fn point_speed_bound(&self, link: usize, joint_speeds: &[f64]) -> f64 {
        let lengths = self.lengths_for(link);
        (0..=link).map(|k| joint_speeds[k] * lengths[k..].iter().sum::<f64>()).sum()
    }
}

fn recursions(qd: &[f64], qdd: &[f64], qddd: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = qd.len();
    let (mut w, mut wd, mut wdd) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut pw, mut pwd, mut pwdd) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let cw = pw + qd[k];
        let cwd = pwd + qdd[k] + qd[k] * pw;
        let cwdd = pwdd + qddd[k] + 2.0 * qdd[k] * pw + qd[k] * (pwd + pw * pw);
        w.push(cw);
        wd.push(cwd);
        wdd.push(cwdd);
        (pw, pwd, pwdd) = (cw, cwd, cwdd);
    }
    (w, wd, wdd)
}

impl RobotModel {
    pub fn angular_bounds(&self) -> AngularBounds {
        AngularBounds::from_model(self)
    }
}
