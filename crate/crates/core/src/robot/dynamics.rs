use nalgebra::{DMatrix, DVector, Point3, Vector3};

use super::kinematics::jacobian_from;
use super::{RobotError, RobotModel};

/// Below this value of `uᵀ Λ⁻¹ u` the direction counts as unreachable.
const SINGULAR_CUTOFF: f64 = 1e-8;

impl RobotModel {
    /// Joint-space inertia matrix `B(q)`.
    pub fn inertia_matrix(&self, q: &[f64]) -> Result<DMatrix<f64>, RobotError> {
        let kin = self.forward_kinematics(q)?;
        let n = self.dof();
        let mut b = DMatrix::zeros(n, n);
        for (i, link) in self.links.iter().enumerate() {
            let frame = &kin.frames[i];
            let com = frame * Point3::from(link.com);
            let jac = jacobian_from(&kin, n, i, &com);
            let jp = jac.rows(0, 3);
            let jo = jac.rows(3, 3);
            let rot = frame.rotation.to_rotation_matrix();
            let world_inertia = rot.matrix() * link.inertia * rot.matrix().transpose();
            b += jp.transpose() * jp * link.mass + jo.transpose() * world_inertia * jo;
        }
        // Symmetrize to remove rounding asymmetry from the two products.
        let bt = b.transpose();
        Ok((b + bt) * 0.5)
    }

    /// Kinetic energy of the chain up to and including `link`, with the
    /// joints beyond it treated as locked.
    pub fn effective_energy(&self, q: &[f64], qd: &[f64], link: usize) -> Result<f64, RobotError> {
        self.check_link(link)?;
        self.check_dim(qd.len())?;
        Ok(truncated_quadratic(&self.inertia_matrix(q)?, qd, link))
    }

    /// `effective_energy` for every link, sharing one inertia evaluation.
    pub fn effective_energies(&self, q: &[f64], qd: &[f64]) -> Result<Vec<f64>, RobotError> {
        self.check_dim(qd.len())?;
        let b = self.inertia_matrix(q)?;
        Ok((0..self.dof()).map(|i| truncated_quadratic(&b, qd, i)).collect())
    }

    /// Mass perceived at `point` on `link` when pushed along unit `direction`.
    pub fn reflected_mass(
        &self,
        q: &[f64],
        link: usize,
        point: &Point3<f64>,
        direction: &Vector3<f64>,
    ) -> Result<f64, RobotError> {
        self.check_link(link)?;
        if ((direction.norm() - 1.0).abs()) > 1e-9 {
            return Err(RobotError::Invalid("reflected-mass direction must be a unit vector".into()));
        }
        let kin = self.forward_kinematics(q)?;
        let jac = jacobian_from(&kin, self.dof(), link, point);
        let mobility_dir: DVector<f64> = jac.rows(0, 3).transpose() * direction;
        let chol = self
            .inertia_matrix(q)?
            .cholesky()
            .ok_or_else(|| RobotError::Invalid("inertia matrix is not positive definite".into()))?;
        let inverse_mass = mobility_dir.dot(&chol.solve(&mobility_dir));
        if inverse_mass <= SINGULAR_CUTOFF {
            return Err(RobotError::Singular);
        }
        Ok(1.0 / inverse_mass)
    }
}

/// `½ q̇ᵀ E B E q̇` with `E` keeping entries `0..=link`; distal entries are
/// never read, so the result is bit-identical for any distal velocities.
fn truncated_quadratic(b: &DMatrix<f64>, qd: &[f64], link: usize) -> f64 {
    let mut sum = 0.0;
    for j in 0..=link {
        let mut row = 0.0;
        for k in 0..=link {
            row += b[(j, k)] * qd[k];
        }
        sum += qd[j] * row;
    }
    0.5 * sum
}
