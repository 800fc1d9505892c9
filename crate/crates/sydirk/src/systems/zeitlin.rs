//! Spectral discretization of 2D incompressible flow on `su(n)`:
//! `w' = [lap^-1 w, w] + nu lap w`, stepped through the general matrix-flow
//! machinery. Inviscid runs conserve enstrophy exactly; viscous runs
//! dissipate energy and enstrophy monotonically for nonnegative weights.

use super::matrix_flow::GeneralMatrixFlow;
use super::{OperatorFamily, ProjectableSystem};
use crate::algebra::laplacian::DiscreteLaplacian;
use crate::algebra::splitting::{LpSplitting, DEFAULT_EIG_TOL};
use crate::algebra::CMatrix;
use crate::descent::ReducedFlow;
use crate::error::Result;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub struct ZeitlinNs {
    pub n: usize,
    pub nu: f64,
    core: GeneralMatrixFlow,
    lap: Arc<DiscreteLaplacian>,
}

impl ZeitlinNs {
    pub fn new(n: usize, nu: f64) -> Self {
        ZeitlinNs::with_eig_tol(n, nu, DEFAULT_EIG_TOL)
    }

    pub fn with_eig_tol(n: usize, nu: f64, eig_tol: f64) -> Self {
        assert!(nu >= 0.0, "viscosity must be nonnegative");
        let lap = Arc::new(DiscreteLaplacian::new(n));
        let lap_field = Arc::clone(&lap);
        let core = GeneralMatrixFlow::new(
            n,
            move |w: &CMatrix| {
                let vel = lap_field.pinv_unchecked(w);
                let mut g = vel.commutator(w);
                if nu != 0.0 {
                    g = &g + &lap_field.apply(w)?.scale_re(nu);
                }
                Ok(g)
            },
            eig_tol,
        );
        ZeitlinNs { n, nu, core, lap }
    }

    pub fn laplacian(&self) -> &DiscreteLaplacian {
        &self.lap
    }

    /// Splitting of the flow direction at (the anti-Hermitian part of) `z`.
    pub fn split_at(&self, z: &CMatrix) -> Result<LpSplitting> {
        self.core.split_at(z)
    }

    /// Kinetic energy `-<lap^-1 w, w>/2` of the anti-Hermitian part.
    pub fn energy(&self, w: &CMatrix) -> f64 {
        let wa = w.anti_hermitian_part();
        -0.5 * self.lap.pinv_unchecked(&wa).inner(&wa)
    }

    /// Enstrophy `|w|^2 / 2`.
    pub fn enstrophy(&self, w: &CMatrix) -> f64 {
        let nrm = w.norm();
        0.5 * nrm * nrm
    }

    /// Band-limited random vorticity: a combination of the lowest three
    /// nonconstant eigenspaces of the Laplacian, projected to `su(n)` and
    /// rescaled to unit enstrophy. Avoids degenerate spectra at start.
    pub fn sample_vorticity(&self, rng: &mut ChaCha8Rng) -> CMatrix {
        for _attempt in 0..16 {
            let mut w = CMatrix::zeros(self.n);
            for (val, e) in self.lap.spectrum().iter().zip(self.lap.eigenbasis().iter()) {
                // l = 1, 2, 3 have eigenvalues -2, -6, -12.
                if *val < -0.5 && *val > -12.5 {
                    w = &w + &e.scale_re(rng.gen_range(-1.0..1.0));
                }
            }
            let t = w.trace() * (1.0 / self.n as f64);
            let mut w = CMatrix::from_fn(
                self.n,
                |i, j| {
                    if i == j {
                        w[(i, j)] - t
                    } else {
                        w[(i, j)]
                    }
                },
            );
            // Unit enstrophy: |w|^2 / 2 = 1.
            w = w.scale_re(2.0f64.sqrt() / w.norm());
            if has_generic_spectrum(&w) {
                return w;
            }
        }
        panic!("could not sample a vorticity field with a generic spectrum");
    }
}

/// Distinct nonzero eigenvalues at the default relative tolerance; the
/// stepping tolerance is a separate method parameter.
fn has_generic_spectrum(w: &CMatrix) -> bool {
    let (mu, _) = crate::algebra::eig_anti_hermitian(w);
    let radius = mu.iter().fold(0.0f64, |a, m| a.max(m.abs())).max(1e-300);
    let tol = DEFAULT_EIG_TOL * radius;
    for i in 0..mu.len() {
        if mu[i].abs() <= tol {
            return false;
        }
        for j in i + 1..mu.len() {
            if (mu[i] - mu[j]).abs() <= tol {
                return false;
            }
        }
    }
    true
}

impl ReducedFlow for ZeitlinNs {
    fn dim_z(&self) -> usize {
        self.core.dim_z()
    }
    fn g(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.core.g(z)
    }
    fn gamma(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.core.gamma(z)
    }
    fn g_gamma(&self, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.core.g_gamma(z)
    }

    fn diagnostic_names(&self) -> Vec<String> {
        vec!["energy".into(), "enstrophy".into(), "trace_abs".into()]
    }

    fn diagnostics(&self, z: &[f64]) -> Vec<f64> {
        let w = CMatrix::decode(self.n, z);
        vec![self.energy(&w), self.enstrophy(&w), w.trace().abs()]
    }
}

impl ProjectableSystem for ZeitlinNs {
    fn name(&self) -> &'static str {
        "zeitlin_ns"
    }
    fn dim_y(&self) -> usize {
        self.core.dim_y()
    }
    fn f(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.core.f(y)
    }
    fn map(&self, y: &[f64]) -> Vec<f64> {
        self.core.map(y)
    }
    fn map_prime(&self, y: &[f64], v: &[f64]) -> Vec<f64> {
        self.core.map_prime(y, v)
    }
    fn map_second(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        self.core.map_second(u, v)
    }

    fn sample_y(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.core.sample_y(rng)
    }

    fn sample_trajectory_y(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let w = self.sample_vorticity(rng);
        super::encode_pair(&CMatrix::identity(self.n), &w)
    }

    fn operator_family(&self) -> Option<OperatorFamily> {
        self.core.operator_family()
    }
}
