//! Catalog of flows that project onto quadratic observables: each system
//! bundles a full-space field `f`, the quadratic map `F`, and the reduced
//! fields `g`, `gamma`, with sampled self-tests for the two consistency
//! identities `F'(y) f(y) = g(F(y))` and `F''(f(y), f(y)) = gamma(F(y))`.

pub mod hopf;
pub mod lie_poisson;
pub mod matrix_flow;
pub mod mhd;
pub mod octonion_flow;
pub mod zeitlin;

pub use hopf::HopfRigidBody;
pub use lie_poisson::MatrixLiePoisson;
pub use matrix_flow::GeneralMatrixFlow;
pub use mhd::SemidirectMhd;
pub use octonion_flow::OctonionFlow;
pub use zeitlin::ZeitlinNs;

use crate::descent::{
    descend_step_with_guess, DescentStepRecord, ReducedFlow, TrajectoryOptions, TrajectoryRecord,
};
use crate::error::Result;
use crate::rk::{rk_step_with_guess, RkStep, VectorField};
use crate::solver::{max_diff, max_norm, SolverSettings};
use crate::tableau::make_sydirk;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A flow on `Y` together with a quadratic map `F: Y -> Z` and the reduced
/// fields it projects onto. States on both sides are flat real coordinate
/// vectors; complex matrix states are interleaved re/im, and each system owns
/// its encode/decode pair.
pub trait ProjectableSystem: ReducedFlow {
    fn name(&self) -> &'static str;
    fn dim_y(&self) -> usize;

    /// The full-space vector field.
    fn f(&self, y: &[f64]) -> Result<Vec<f64>>;
    /// `F(y)`.
    fn map(&self, y: &[f64]) -> Vec<f64>;
    /// `F'(y) v`.
    fn map_prime(&self, y: &[f64], v: &[f64]) -> Vec<f64>;
    /// `F''(u, v)`, independent of the base point.
    fn map_second(&self, u: &[f64], v: &[f64]) -> Vec<f64>;

    /// Reproducible full-space initial condition used by the identity fuzz
    /// checks; probes generic states.
    fn sample_y(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;

    /// Full-space initial condition for trajectory runs; matrix systems
    /// override this to lift a state on their preferred reduced manifold.
    fn sample_trajectory_y(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.sample_y(rng)
    }

    /// Reproducible reduced initial condition; defaults to mapping a sampled
    /// trajectory state through `F`.
    fn sample_z(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let y = self.sample_trajectory_y(rng);
        self.map(&y)
    }

    /// The operator family behind `f`, when the system is of the
    /// `f(y) = alpha(F(y)) y` form; enables the algebraic condition checks.
    fn operator_family(&self) -> Option<OperatorFamily> {
        None
    }
}

/// Adapter exposing the full-space field of a system to the RK engine.
pub struct FullField<'a>(pub &'a dyn ProjectableSystem);

impl VectorField for FullField<'_> {
    fn dim(&self) -> usize {
        self.0.dim_y()
    }
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.0.f(y)
    }
}

/// Largest relative residuals of the two consistency identities over sampled
/// full-space states.
#[derive(Debug, Clone, Copy)]
pub struct ConsistencyReport {
    pub f_related: f64,
    pub gamma_identity: f64,
}

impl ConsistencyReport {
    pub fn max(&self) -> f64 {
        self.f_related.max(self.gamma_identity)
    }
}

/// Sample `samples` random states and evaluate both identities.
pub fn consistency_report(
    sys: &dyn ProjectableSystem,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ConsistencyReport> {
    let mut report = ConsistencyReport {
        f_related: 0.0,
        gamma_identity: 0.0,
    };
    for _ in 0..samples {
        let y = sys.sample_y(rng);
        let z = sys.map(&y);
        let v = sys.f(&y)?;

        let lhs = sys.map_prime(&y, &v);
        let rhs = sys.g(&z)?;
        report.f_related = report
            .f_related
            .max(max_diff(&lhs, &rhs) / (1.0 + max_norm(&rhs)));

        let lhs = sys.map_second(&v, &v);
        let rhs = sys.gamma(&z)?;
        report.gamma_identity = report
            .gamma_identity
            .max(max_diff(&lhs, &rhs) / (1.0 + max_norm(&rhs)));
    }
    Ok(report)
}

/// Outcome of integrating the full-space and reduced methods in lockstep.
pub struct EquivalenceRun {
    pub record: TrajectoryRecord,
    /// Largest raw deviation `|F(Y_i) - Z_i|` or `|F(y_k) - z_k|` seen.
    pub max_deviation: f64,
    /// Same, normalized by `1 + |z|` at the comparison point.
    pub max_normalized_deviation: f64,
}

/// Run the SyDIRK method with weights `b` on the full space and its
/// descendant on the reduced space from the same initial state, comparing
/// stage values and steps through `F` after every step.
pub fn run_lockstep(
    sys: &dyn ProjectableSystem,
    b: &[f64],
    y0: &[f64],
    h: f64,
    n_steps: usize,
    settings: &SolverSettings,
    options: TrajectoryOptions,
) -> Result<EquivalenceRun> {
    let tableau = make_sydirk(b)?;
    let field = FullField(sys);
    let z0 = sys.map(y0);

    let mut record = TrajectoryRecord {
        times: vec![0.0],
        states: options.record_states.then(|| vec![z0.clone()]),
        diag_names: sys.diagnostic_names(),
        diagnostics: vec![sys.diagnostics(&z0)],
        stage_iters_max: vec![0],
        devs: Some(vec![0.0]),
    };
    let mut max_dev = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut y = y0.to_vec();
    let mut z = z0;
    let mut warm_y: Option<Vec<Vec<f64>>> = None;
    let mut warm_z: Option<Vec<Vec<f64>>> = None;

    for step in 0..n_steps {
        let full: RkStep = rk_step_with_guess(&tableau, &field, &y, h, settings, warm_y.as_deref())
            .map_err(|e| e.at_step(step))?;
        let reduced: DescentStepRecord =
            descend_step_with_guess(b, sys, &z, h, settings, warm_z.as_deref())
                .map_err(|e| e.at_step(step))?;

        let mut dev = 0.0f64;
        let mut rel = 0.0f64;
        for (yi, zi) in full.stages.iter().zip(reduced.stages.iter()) {
            let mapped = sys.map(yi);
            let d = max_diff(&mapped, zi);
            dev = dev.max(d);
            rel = rel.max(d / (1.0 + max_norm(zi)));
        }
        let mapped = sys.map(&full.y1);
        let d = max_diff(&mapped, &reduced.z1);
        dev = dev.max(d);
        rel = rel.max(d / (1.0 + max_norm(&reduced.z1)));
        max_dev = max_dev.max(dev);
        max_rel = max_rel.max(rel);

        y = full.y1;
        z = reduced.z1.clone();
        record.times.push(h * (step + 1) as f64);
        record.diagnostics.push(sys.diagnostics(&z));
        record.stage_iters_max.push(
            reduced
                .iters
                .iter()
                .copied()
                .max()
                .unwrap_or(0)
                .max(full.iters),
        );
        if let Some(states) = &mut record.states {
            states.push(z.clone());
        }
        record.devs.as_mut().unwrap().push(dev);
        warm_y = Some(full.stages);
        warm_z = Some(reduced.stages);
    }

    Ok(EquivalenceRun {
        record,
        max_deviation: max_dev,
        max_normalized_deviation: max_rel,
    })
}

/// Operator families of the form `f(y) = alpha(F(y)) y` with an explicit
/// `beta` satisfying `F'(y) T y = beta(T) F(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorFamily {
    /// Right multiplication `T_{M,N}(q, p) = (q M, p N)` on matrix pairs with
    /// `F(q, p) = q^dagger p`; `beta(T) z = M^dagger z + z N`.
    MatrixRightMult { n: usize },
    /// Quaternion left multiplication with the Hopf observable;
    /// `beta(L_x) z = x z + z x*`.
    QuaternionLeftMult,
    /// Octonion left multiplication with the squared-norm observable;
    /// `beta(L_x) z = 2 Re(x) z`.
    OctonionLeftMult,
}

/// Residuals of the algebraic condition checks for an operator family.
#[derive(Debug, Clone, Copy)]
pub struct BetaConditionReport {
    /// `F'(y) T y - beta(T) F(y)`.
    pub beta: f64,
    /// `[beta(T)^2 - beta(T^2)] F(y) - F''(Ty, Ty)`.
    pub jordan: f64,
    /// Deviation of `beta(T)^2 - beta(T^2)` from its closed form
    /// (`2 M^dagger z N`, `2 x z x*`, or `2 |x|^2 z`).
    pub closed_form: f64,
    /// Momentum-map pairing `<F(y), T> - omega(T y, y)/2` for the
    /// cotangent-lifted matrix action; absent for the other families.
    pub momentum: Option<f64>,
}

impl BetaConditionReport {
    pub fn max(&self) -> f64 {
        self.beta
            .max(self.jordan)
            .max(self.closed_form)
            .max(self.momentum.unwrap_or(0.0))
    }
}

/// Verify the defining condition of the operator family, the Jordan-square
/// identity, its closed form, and (for the matrix family) the momentum-map
/// pairing, at random states and operator parameters.
pub fn beta_condition_check(
    family: OperatorFamily,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> BetaConditionReport {
    match family {
        OperatorFamily::MatrixRightMult { n } => beta_check_matrix(n, samples, rng),
        OperatorFamily::QuaternionLeftMult => beta_check_quaternion(samples, rng),
        OperatorFamily::OctonionLeftMult => beta_check_octonion(samples, rng),
    }
}

fn beta_check_matrix(n: usize, samples: usize, rng: &mut ChaCha8Rng) -> BetaConditionReport {
    use crate::algebra::random_cmatrix;
    let mut report = BetaConditionReport {
        beta: 0.0,
        jordan: 0.0,
        closed_form: 0.0,
        momentum: Some(0.0),
    };
    for _ in 0..samples {
        let q = random_cmatrix(n, rng);
        let p = random_cmatrix(n, rng);
        let m = random_cmatrix(n, rng);
        let nn = random_cmatrix(n, rng);
        let z = &q.dagger() * &p;

        // F'(q,p) T(q,p) with T(q,p) = (qM, pN): (qM)^dagger p + q^dagger (pN).
        let ty_q = &q * &m;
        let ty_p = &p * &nn;
        let lhs = &(&ty_q.dagger() * &p) + &(&q.dagger() * &ty_p);
        let beta_z = &(&m.dagger() * &z) + &(&z * &nn);
        report.beta = report.beta.max((&lhs - &beta_z).max_abs());

        // beta(T)^2 - beta(T^2) applied to z vs the closed form 2 M^dagger z N.
        let beta_sq = &(&m.dagger() * &beta_z) + &(&beta_z * &nn);
        let t_sq = (&m * &m, &nn * &nn);
        let beta_of_sq = &(&t_sq.0.dagger() * &z) + &(&z * &t_sq.1);
        let jordan_lhs = &beta_sq - &beta_of_sq;
        let closed = (&(&m.dagger() * &z) * &nn).scale_re(2.0);
        report.closed_form = report.closed_form.max((&jordan_lhs - &closed).max_abs());

        // F''(Ty, Ty) = 2 (qM)^dagger (pN).
        let second = (&ty_q.dagger() * &ty_p).scale_re(2.0);
        report.jordan = report.jordan.max((&jordan_lhs - &second).max_abs());

        // Momentum map of the cotangent-lifted right action
        // T_M(q,p) = (qM, -p M^dagger) against the canonical symplectic form:
        // <F(y), T_M> = omega(T_M y, y) / 2 with <z, T_M> = Re tr(M^dagger z).
        let lift_q = &q * &m;
        let lift_p = (&p * &m.dagger()).scale_re(-1.0);
        let omega = lift_q.inner(&p) - q.inner(&lift_p);
        let pairing = m.inner(&z);
        report.momentum = Some(report.momentum.unwrap().max((pairing - 0.5 * omega).abs()));
    }
    report
}

fn beta_check_quaternion(samples: usize, rng: &mut ChaCha8Rng) -> BetaConditionReport {
    let mut report = BetaConditionReport {
        beta: 0.0,
        jordan: 0.0,
        closed_form: 0.0,
        momentum: None,
    };
    let quarter = 0.25;
    for _ in 0..samples {
        let y = random_quaternion(rng);
        let x = random_quaternion(rng);
        let k = crate::algebra::quaternion::Q_K;
        let fy = (y * k * y.conj()) * quarter;

        // F'(y) L_x y = (xy) k y*/4 + y k (xy)*/4 = x F(y) + F(y) x*.
        let ty = x * y;
        let lhs = (ty * k * y.conj() + y * k * ty.conj()) * quarter;
        let beta_z = x * fy + fy * x.conj();
        report.beta = report.beta.max((lhs - beta_z).norm());

        // Jordan square identity and its closed form 2 x z x*.
        let beta_sq = x * beta_z + beta_z * x.conj();
        let x2 = x * x;
        let beta_of_sq = x2 * fy + fy * x2.conj();
        let jordan_lhs = beta_sq - beta_of_sq;
        let closed = (x * fy * x.conj()) * 2.0;
        report.closed_form = report.closed_form.max((jordan_lhs - closed).norm());

        // F''(Ty, Ty) = (Ty) k (Ty)* / 2.
        let second = (ty * k * ty.conj()) * 0.5;
        report.jordan = report.jordan.max((jordan_lhs - second).norm());
    }
    report
}

fn beta_check_octonion(samples: usize, rng: &mut ChaCha8Rng) -> BetaConditionReport {
    let mut report = BetaConditionReport {
        beta: 0.0,
        jordan: 0.0,
        closed_form: 0.0,
        momentum: None,
    };
    for _ in 0..samples {
        let y = random_octonion(rng);
        let x = random_octonion(rng);
        let fy = y.norm_sq();

        // F'(y) L_x y = (xy) y* + y (xy)* -> real scalar 2 Re(x) |y|^2.
        let ty = x * y;
        let lhs = (ty * y.conj() + y * ty.conj()).re();
        let beta_z = 2.0 * x.re() * fy;
        report.beta = report.beta.max((lhs - beta_z).abs());

        // [beta^2 - beta(x^2)] z vs 2 |x|^2 z and vs F''(Ty,Ty) = 2 |Ty|^2.
        let beta_sq = 2.0 * x.re() * beta_z;
        let x2 = x * x;
        let beta_of_sq = 2.0 * x2.re() * fy;
        let jordan_lhs = beta_sq - beta_of_sq;
        let closed = 2.0 * x.norm_sq() * fy;
        report.closed_form = report.closed_form.max((jordan_lhs - closed).abs());
        let second = 2.0 * ty.norm_sq();
        report.jordan = report.jordan.max((jordan_lhs - second).abs());
    }
    report
}

pub(crate) fn random_quaternion(rng: &mut impl Rng) -> crate::algebra::Quaternion {
    crate::algebra::Quaternion::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

pub(crate) fn random_octonion(rng: &mut impl Rng) -> crate::algebra::Octonion {
    let mut a = [0.0; 8];
    for v in &mut a {
        *v = rng.gen_range(-1.0..1.0);
    }
    crate::algebra::Octonion::from_array(a)
}

/// Interleave a complex matrix pair `(q, p)` into a flat state vector.
pub(crate) fn encode_pair(q: &crate::algebra::CMatrix, p: &crate::algebra::CMatrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * q.n * q.n);
    q.encode(&mut out);
    p.encode(&mut out);
    out
}

pub(crate) fn decode_pair(
    n: usize,
    flat: &[f64],
) -> (crate::algebra::CMatrix, crate::algebra::CMatrix) {
    let half = flat.len() / 2;
    (
        crate::algebra::CMatrix::decode(n, &flat[..half]),
        crate::algebra::CMatrix::decode(n, &flat[half..]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn beta_conditions_hold_for_all_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for family in [
            OperatorFamily::MatrixRightMult { n: 3 },
            OperatorFamily::QuaternionLeftMult,
            OperatorFamily::OctonionLeftMult,
        ] {
            let report = beta_condition_check(family, 100, &mut rng);
            assert!(
                report.max() <= 1e-12,
                "{family:?} condition residuals {report:?}"
            );
        }
    }

    #[test]
    fn systems_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>(_: &T) {}
        assert_send_sync(&MatrixLiePoisson::generalized_rigid_body(2));
        assert_send_sync(&HopfRigidBody::new([1.0, 2.0, 3.0]));
        assert_send_sync(&OctonionFlow::constant(crate::algebra::Octonion::zero()));
        assert_send_sync(&SemidirectMhd::new(2));
        assert_send_sync(&ZeitlinNs::new(2, 0.0));
    }

    #[test]
    fn quaternion_beta_example_x_equals_k() {
        // x = k, y = 1: beta(L_k) F(1) must equal F'(1)(k * 1).
        use crate::algebra::quaternion::{Q_K, Q_ONE};
        let y = Q_ONE;
        let x = Q_K;
        let fy = (y * Q_K * y.conj()) * 0.25;
        let ty = x * y;
        let lhs = (ty * Q_K * y.conj() + y * Q_K * ty.conj()) * 0.25;
        let rhs = x * fy + fy * x.conj();
        assert!((lhs - rhs).norm() <= 1e-14);
    }
}
