//! Matrix Lie-Poisson reduction: pairs `(q, p)` of complex matrices project
//! through `F(q, p) = q^dagger p` onto `z' = ad*_{grad_eta(z)} z`.

use super::{decode_pair, encode_pair, OperatorFamily, ProjectableSystem};
use crate::algebra::eigh::eig_anti_hermitian;
use crate::algebra::{random_su_n, CMatrix, Complex};
use crate::descent::{LiePoissonMatrix, ReducedFlow};
use crate::error::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct MatrixLiePoisson {
    pub n: usize,
    grad_eta: Box<dyn Fn(&CMatrix) -> CMatrix + Send + Sync>,
    eta: Option<Box<dyn Fn(&CMatrix) -> f64 + Send + Sync>>,
}

impl MatrixLiePoisson {
    pub fn new(
        n: usize,
        grad_eta: impl Fn(&CMatrix) -> CMatrix + Send + Sync + 'static,
        eta: Option<Box<dyn Fn(&CMatrix) -> f64 + Send + Sync>>,
    ) -> Self {
        assert!(n >= 2, "matrix dimension must be at least 2");
        MatrixLiePoisson {
            n,
            grad_eta: Box::new(grad_eta),
            eta,
        }
    }

    /// Generalized rigid body on `u(n)`: `eta(z) = <z, S o z>/2` with the
    /// entrywise weights `S_ij = 1/(1 + i + j)`, so `grad_eta(z) = S o z`
    /// maps anti-Hermitian matrices to anti-Hermitian matrices.
    pub fn generalized_rigid_body(n: usize) -> Self {
        let weights = rigid_body_weights(n);
        let w2 = weights.clone();
        MatrixLiePoisson::new(
            n,
            move |z| hadamard(&weights, z),
            Some(Box::new(move |z| 0.5 * z.inner(&hadamard(&w2, z)))),
        )
    }

    pub fn grad_eta_at(&self, z: &CMatrix) -> CMatrix {
        (self.grad_eta)(z)
    }

    fn g_matrix(&self, z: &CMatrix) -> CMatrix {
        // ad*: grad^dagger z - z grad^dagger.
        (self.grad_eta)(z).dagger().commutator(z)
    }

    fn gamma_matrix(&self, z: &CMatrix) -> CMatrix {
        let gd = (self.grad_eta)(z).dagger();
        (&(&gd * z) * &gd).scale_re(-2.0)
    }
}

fn rigid_body_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = 1.0 / (1.0 + (i + j) as f64);
        }
    }
    w
}

fn hadamard(weights: &[f64], z: &CMatrix) -> CMatrix {
    CMatrix::from_fn(z.n, |i, j| z[(i, j)] * weights[i * z.n + j])
}

impl ReducedFlow for MatrixLiePoisson {
    fn dim_z(&self) -> usize {
        2 * self.n * self.n
    }

    fn g(&self, z: &[f64]) -> Result<Vec<f64>> {
        let zm = CMatrix::decode(self.n, z);
        let mut out = Vec::with_capacity(z.len());
        self.g_matrix(&zm).encode(&mut out);
        Ok(out)
    }

    fn gamma(&self, z: &[f64]) -> Result<Vec<f64>> {
        let zm = CMatrix::decode(self.n, z);
        let mut out = Vec::with_capacity(z.len());
        self.gamma_matrix(&zm).encode(&mut out);
        Ok(out)
    }

    fn diagnostic_names(&self) -> Vec<String> {
        let mut names = vec!["eta".into(), "frobenius_norm".into()];
        for k in 0..self.n {
            names.push(format!("eig_im_{k}"));
        }
        names
    }

    fn diagnostics(&self, z: &[f64]) -> Vec<f64> {
        let zm = CMatrix::decode(self.n, z);
        let eta = self.eta.as_ref().map(|f| f(&zm)).unwrap_or(f64::NAN);
        let mut out = vec![eta, zm.norm()];
        // Eigenvalues are reported for anti-Hermitian states, where the
        // spectrum is purely imaginary and the Hermitian solver applies.
        if zm.anti_hermitian_deviation() <= 1e-8 * zm.max_abs().max(1.0) {
            let (mu, _) = eig_anti_hermitian(&zm.anti_hermitian_part());
            out.extend(mu);
        } else {
            out.extend(std::iter::repeat(f64::NAN).take(self.n));
        }
        out
    }
}

impl ProjectableSystem for MatrixLiePoisson {
    fn name(&self) -> &'static str {
        "matrix_lie_poisson"
    }

    fn dim_y(&self) -> usize {
        4 * self.n * self.n
    }

    fn f(&self, y: &[f64]) -> Result<Vec<f64>> {
        let (q, p) = decode_pair(self.n, y);
        let z = &q.dagger() * &p;
        let ge = (self.grad_eta)(&z);
        let fq = &q * &ge;
        let fp = (&p * &ge.dagger()).scale_re(-1.0);
        Ok(encode_pair(&fq, &fp))
    }

    fn map(&self, y: &[f64]) -> Vec<f64> {
        let (q, p) = decode_pair(self.n, y);
        let mut out = Vec::with_capacity(2 * self.n * self.n);
        (&q.dagger() * &p).encode(&mut out);
        out
    }

    fn map_prime(&self, y: &[f64], v: &[f64]) -> Vec<f64> {
        let (q, p) = decode_pair(self.n, y);
        let (dq, dp) = decode_pair(self.n, v);
        let mut out = Vec::with_capacity(2 * self.n * self.n);
        (&(&dq.dagger() * &p) + &(&q.dagger() * &dp)).encode(&mut out);
        out
    }

    fn map_second(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let (uq, up) = decode_pair(self.n, u);
        let (vq, vp) = decode_pair(self.n, v);
        let mut out = Vec::with_capacity(2 * self.n * self.n);
        (&(&uq.dagger() * &vp) + &(&vq.dagger() * &up)).encode(&mut out);
        out
    }

    fn sample_y(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        // Moderate scale keeps the full-space flow well inside the stable
        // step-size regime of the fixed-point stage solves.
        let q = scaled_random(self.n, 0.4, rng);
        let p = scaled_random(self.n, 0.4, rng);
        encode_pair(&q, &p)
    }

    fn sample_z(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        // Anti-Hermitian states: the natural home of the builtin rigid-body
        // Hamiltonian, and the regime where the spectrum diagnostics apply.
        let z = random_su_n(self.n, rng);
        let mut out = Vec::with_capacity(2 * self.n * self.n);
        z.encode(&mut out);
        out
    }

    fn operator_family(&self) -> Option<OperatorFamily> {
        Some(OperatorFamily::MatrixRightMult { n: self.n })
    }
}

impl LiePoissonMatrix for MatrixLiePoisson {
    fn n(&self) -> usize {
        self.n
    }
    fn grad_eta(&self, z: &CMatrix) -> CMatrix {
        (self.grad_eta)(z)
    }
}

fn scaled_random(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, |_, _| {
        Complex::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    })
}
