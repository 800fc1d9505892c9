//! Semidirect-product matrix magnetohydrodynamics: paired states `(w, theta)`
//! evolving by
//! `w' = [M1(w)^dagger, w] + [M2(theta), theta^dagger]`,
//! `theta' = [theta, M1(w)]`,
//! realized as the projection of a block-triangular matrix-pair flow through
//! `F(q, p) = q^dagger p`.
//!
//! The closure maps `M1`, `M2` are injectable; the defaults apply the inverse
//! discrete Laplacian to the anti-Hermitian part, which keeps all blocks in
//! `u(n)` along `u(n)`-valued trajectories.

use super::{OperatorFamily, ProjectableSystem};
use crate::algebra::laplacian::DiscreteLaplacian;
use crate::algebra::{random_u_n, CMatrix, Complex};
use crate::descent::ReducedFlow;
use crate::error::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

type ClosureFn = Box<dyn Fn(&CMatrix) -> CMatrix + Send + Sync>;

pub struct SemidirectMhd {
    pub n: usize,
    m1: ClosureFn,
    m2: ClosureFn,
}

impl SemidirectMhd {
    /// Default closures `M1 = M2 = lap^-1` (applied to the anti-Hermitian
    /// part).
    pub fn new(n: usize) -> Self {
        let lap = Arc::new(DiscreteLaplacian::new(n));
        let lap2 = Arc::clone(&lap);
        SemidirectMhd::with_closures(
            n,
            move |w| lap.pinv_unchecked(&w.anti_hermitian_part()),
            move |t| lap2.pinv_unchecked(&t.anti_hermitian_part()),
        )
    }

    pub fn with_closures(
        n: usize,
        m1: impl Fn(&CMatrix) -> CMatrix + Send + Sync + 'static,
        m2: impl Fn(&CMatrix) -> CMatrix + Send + Sync + 'static,
    ) -> Self {
        assert!(n >= 2, "matrix dimension must be at least 2");
        SemidirectMhd {
            n,
            m1: Box::new(m1),
            m2: Box::new(m2),
        }
    }

    fn decode_z(&self, z: &[f64]) -> (CMatrix, CMatrix) {
        let half = z.len() / 2;
        (
            CMatrix::decode(self.n, &z[..half]),
            CMatrix::decode(self.n, &z[half..]),
        )
    }

    fn encode_z(&self, w: &CMatrix, theta: &CMatrix) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.n * self.n);
        w.encode(&mut out);
        theta.encode(&mut out);
        out
    }

    /// The four full-space blocks `(q1, q2, p1, p2)`.
    fn decode_y(&self, y: &[f64]) -> [CMatrix; 4] {
        let q = y.len() / 4;
        [
            CMatrix::decode(self.n, &y[..q]),
            CMatrix::decode(self.n, &y[q..2 * q]),
            CMatrix::decode(self.n, &y[2 * q..3 * q]),
            CMatrix::decode(self.n, &y[3 * q..]),
        ]
    }

    fn encode_y(&self, blocks: [&CMatrix; 4]) -> Vec<f64> {
        let mut out = Vec::with_capacity(8 * self.n * self.n);
        for b in blocks {
            b.encode(&mut out);
        }
        out
    }
}

impl ReducedFlow for SemidirectMhd {
    fn dim_z(&self) -> usize {
        4 * self.n * self.n
    }

    fn g(&self, z: &[f64]) -> Result<Vec<f64>> {
        let (w, theta) = self.decode_z(z);
        let a = (self.m1)(&w);
        let b = (self.m2)(&theta);
        let gw = &a.dagger().commutator(&w) + &b.commutator(&theta.dagger());
        let gt = theta.commutator(&a);
        Ok(self.encode_z(&gw, &gt))
    }

    fn gamma(&self, z: &[f64]) -> Result<Vec<f64>> {
        let (w, theta) = self.decode_z(z);
        let a = (self.m1)(&w);
        let b = (self.m2)(&theta);
        let ad = a.dagger();
        let td = theta.dagger();
        let gw =
            (&(&(&(&ad * &w) * &ad) + &(&(&ad * &td) * &b)) + &(&(&b * &td) * &ad)).scale_re(-2.0);
        let gt = (&(&a * &theta) * &a).scale_re(-2.0);
        Ok(self.encode_z(&gw, &gt))
    }

    fn diagnostic_names(&self) -> Vec<String> {
        vec![
            "w_norm".into(),
            "theta_norm".into(),
            "skew_deviation".into(),
        ]
    }

    fn diagnostics(&self, z: &[f64]) -> Vec<f64> {
        let (w, theta) = self.decode_z(z);
        vec![
            w.norm(),
            theta.norm(),
            w.anti_hermitian_deviation()
                .max(theta.anti_hermitian_deviation()),
        ]
    }
}

impl ProjectableSystem for SemidirectMhd {
    fn name(&self) -> &'static str {
        "semidirect_mhd"
    }

    fn dim_y(&self) -> usize {
        8 * self.n * self.n
    }

    fn f(&self, y: &[f64]) -> Result<Vec<f64>> {
        let [q1, q2, p1, p2] = self.decode_y(y);
        let w = &(&q1.dagger() * &p1) + &(&q2 * &p2.dagger());
        let theta = &p2 * &q1;
        let a = (self.m1)(&w);
        let b = (self.m2)(&theta);
        // (q, p) -> (q M, p N) with N = -M^dagger, expanded blockwise.
        let fq1 = &q1 * &a;
        let fq2 = &(&b * &q1.dagger()) + &(&a.dagger() * &q2);
        let fp1 = (&(&p1 * &a.dagger()) + &(&p2.dagger() * &b)).scale_re(-1.0);
        let fp2 = (&a * &p2).scale_re(-1.0);
        Ok(self.encode_y([&fq1, &fq2, &fp1, &fp2]))
    }

    fn map(&self, y: &[f64]) -> Vec<f64> {
        let [q1, q2, p1, p2] = self.decode_y(y);
        let w = &(&q1.dagger() * &p1) + &(&q2 * &p2.dagger());
        let theta = &p2 * &q1;
        self.encode_z(&w, &theta)
    }

    fn map_prime(&self, y: &[f64], v: &[f64]) -> Vec<f64> {
        let [q1, q2, p1, p2] = self.decode_y(y);
        let [dq1, dq2, dp1, dp2] = self.decode_y(v);
        let dw = &(&(&dq1.dagger() * &p1) + &(&q1.dagger() * &dp1))
            + &(&(&dq2 * &p2.dagger()) + &(&q2 * &dp2.dagger()));
        let dt = &(&dp2 * &q1) + &(&p2 * &dq1);
        self.encode_z(&dw, &dt)
    }

    fn map_second(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let [uq1, uq2, up1, up2] = self.decode_y(u);
        let [vq1, vq2, vp1, vp2] = self.decode_y(v);
        let dw = &(&(&uq1.dagger() * &vp1) + &(&vq1.dagger() * &up1))
            + &(&(&uq2 * &vp2.dagger()) + &(&vq2 * &up2.dagger()));
        let dt = &(&up2 * &vq1) + &(&vp2 * &uq1);
        self.encode_z(&dw, &dt)
    }

    fn sample_y(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let scale = 0.4;
        let mut block = || {
            CMatrix::from_fn(self.n, |_, _| {
                Complex::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
            })
        };
        let q1 = &block() + &CMatrix::identity(self.n);
        let (q2, p1, p2) = (block(), block(), block());
        self.encode_y([&q1, &q2, &p1, &p2])
    }

    fn sample_trajectory_y(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        // q1 = I, q2 = 0, p1 = w0, p2 = theta0 lifts (w0, theta0) exactly.
        let w0 = random_u_n(self.n, rng);
        let theta0 = random_u_n(self.n, rng).scale_re(0.5);
        self.encode_y([
            &CMatrix::identity(self.n),
            &CMatrix::zeros(self.n),
            &w0,
            &theta0,
        ])
    }

    fn operator_family(&self) -> Option<OperatorFamily> {
        Some(OperatorFamily::MatrixRightMult { n: 2 * self.n })
    }
}
