//! Rigid-body dynamics on R^3 obtained by projecting a quaternion flow
//! through `F(y) = y k y* / 4`.

use super::{random_quaternion, OperatorFamily, ProjectableSystem};
use crate::algebra::quaternion::{Quaternion, Q_K};
use crate::descent::ReducedFlow;
use crate::error::Result;
use rand_chacha::ChaCha8Rng;

pub struct HopfRigidBody {
    pub inertia: [f64; 3],
}

impl HopfRigidBody {
    pub fn new(inertia: [f64; 3]) -> Self {
        assert!(
            inertia.iter().all(|i| *i > 0.0),
            "inertia components must be positive"
        );
        HopfRigidBody { inertia }
    }

    /// Reduced Hamiltonian `sum z_a^2 / (2 I_a)`.
    pub fn energy(&self, z: &[f64]) -> f64 {
        0.5 * (z[0] * z[0] / self.inertia[0]
            + z[1] * z[1] / self.inertia[1]
            + z[2] * z[2] / self.inertia[2])
    }

    fn grad_eta(&self, z: &[f64]) -> [f64; 3] {
        [
            z[0] / self.inertia[0],
            z[1] / self.inertia[1],
            z[2] / self.inertia[2],
        ]
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl ReducedFlow for HopfRigidBody {
    fn dim_z(&self) -> usize {
        3
    }

    fn g(&self, z: &[f64]) -> Result<Vec<f64>> {
        let w = self.grad_eta(z);
        Ok(cross([z[0], z[1], z[2]], w).to_vec())
    }

    /// `gamma(z) = -grad_eta(z) z grad_eta(z) / 2` in quaternion arithmetic;
    /// the product of the three imaginary quaternions is purely imaginary.
    fn gamma(&self, z: &[f64]) -> Result<Vec<f64>> {
        let w = Quaternion::from_imag(self.grad_eta(z));
        let zq = Quaternion::from_imag([z[0], z[1], z[2]]);
        let out = (w * zq * w) * -0.5;
        Ok(out.imag().to_vec())
    }

    fn diagnostic_names(&self) -> Vec<String> {
        vec!["energy".into(), "casimir_norm".into()]
    }

    fn diagnostics(&self, z: &[f64]) -> Vec<f64> {
        let norm = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
        vec![self.energy(z), norm]
    }
}

impl ProjectableSystem for HopfRigidBody {
    fn name(&self) -> &'static str {
        "hopf_rigid_body"
    }

    fn dim_y(&self) -> usize {
        4
    }

    fn f(&self, y: &[f64]) -> Result<Vec<f64>> {
        let yq = Quaternion::from_array([y[0], y[1], y[2], y[3]]);
        let z = self.map(y);
        let w = Quaternion::from_imag(self.grad_eta(&z));
        let out = (w * yq) * -0.5;
        Ok(out.as_array().to_vec())
    }

    fn map(&self, y: &[f64]) -> Vec<f64> {
        let yq = Quaternion::from_array([y[0], y[1], y[2], y[3]]);
        let f = (yq * Q_K * yq.conj()) * 0.25;
        f.imag().to_vec()
    }

    fn map_prime(&self, y: &[f64], v: &[f64]) -> Vec<f64> {
        let yq = Quaternion::from_array([y[0], y[1], y[2], y[3]]);
        let vq = Quaternion::from_array([v[0], v[1], v[2], v[3]]);
        let d = (vq * Q_K * yq.conj() + yq * Q_K * vq.conj()) * 0.25;
        d.imag().to_vec()
    }

    fn map_second(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let uq = Quaternion::from_array([u[0], u[1], u[2], u[3]]);
        let vq = Quaternion::from_array([v[0], v[1], v[2], v[3]]);
        let d = (uq * Q_K * vq.conj() + vq * Q_K * uq.conj()) * 0.25;
        d.imag().to_vec()
    }

    fn sample_y(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        random_quaternion(rng).as_array().to_vec()
    }

    fn operator_family(&self) -> Option<OperatorFamily> {
        Some(OperatorFamily::QuaternionLeftMult)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::descent::descend_step;
    use crate::solver::SolverSettings;
    use crate::systems::consistency_report;
    use rand::SeedableRng;

    fn body() -> HopfRigidBody {
        HopfRigidBody::new([1.0, 2.0, 3.0])
    }

    #[test]
    fn consistency_identities() {
        let sys = body();
        let mut rng = ChaCha8Rng::seed_from_u64(111);
        let report = consistency_report(&sys, 100, &mut rng).unwrap();
        assert!(report.max() <= 1e-10, "consistency residuals {report:?}");
    }

    #[test]
    fn gamma_matches_cross_product_form() {
        // (z x grad) x grad + z |grad|^2 / 2, the R^3 spelling of the
        // quaternion product.
        let sys = body();
        let mut rng = ChaCha8Rng::seed_from_u64(112);
        for _ in 0..100 {
            let z: Vec<f64> = (0..3)
                .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
                .collect();
            let w = sys.grad_eta(&z);
            let zw = cross([z[0], z[1], z[2]], w);
            let wsq = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
            let expect: Vec<f64> = cross(zw, w)
                .iter()
                .zip(&z)
                .map(|(a, zi)| a + 0.5 * zi * wsq)
                .collect();
            let got = sys.gamma(&z).unwrap();
            for k in 0..3 {
                assert!(
                    (got[k] - expect[k]).abs() <= 1e-13,
                    "gamma component {k}: {got:?} vs {expect:?}"
                );
            }
        }
    }

    #[test]
    fn principal_axis_is_preserved_by_descended_midpoint() {
        let sys = body();
        let z0 = [1.0, 0.0, 0.0];
        assert_eq!(sys.g(&z0).unwrap(), vec![0.0, 0.0, 0.0]);
        let out = descend_step(&[1.0], &sys, &z0, 0.2, &SolverSettings::default()).unwrap();
        for k in 0..3 {
            assert!(
                (out.z1[k] - z0[k]).abs() <= 1e-14,
                "equilibrium moved: {:?}",
                out.z1
            );
        }
    }

    #[test]
    fn casimir_norm_is_stable_over_short_runs() {
        let sys = body();
        let settings = SolverSettings {
            tol: 1e-15,
            ..SolverSettings::default()
        };
        let mut z = vec![0.4, -0.3, 0.85];
        let start = sys.diagnostics(&z)[1];
        for _ in 0..200 {
            z = descend_step(&[1.0], &sys, &z, 0.02, &settings).unwrap().z1;
        }
        let end = sys.diagnostics(&z)[1];
        assert!(
            (end - start).abs() <= 1e-13,
            "casimir drift {}",
            end - start
        );
    }
}
