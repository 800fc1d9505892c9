//! Discrete spherical Laplacian on `u(n)`.
//!
//! `lap(w) = sum_a [X_a, [X_a, w]]` built from the anti-Hermitian generators
//! `X_a = i S_a` of the n-dimensional irreducible spin representation. With
//! this normalization the spectrum is `{-l(l+1) : l = 0..n-1}` with
//! multiplicity `2l+1`; the nullspace is the imaginary multiples of the
//! identity, so the operator is invertible on `su(n)`.

use super::cmatrix::CMatrix;
use super::complex::Complex;
use super::eigh::eigh_hermitian;
use crate::error::{Error, Result};

pub struct DiscreteLaplacian {
    pub n: usize,
    /// Anti-Hermitian spin generators `X_1, X_2, X_3`.
    pub generators: [CMatrix; 3],
    /// Operator eigenvalues, ascending (length `n^2`).
    eigvals: Vec<f64>,
    /// Matching orthonormal eigenmatrices in `u(n)`.
    eigvecs: Vec<CMatrix>,
}

/// Angular momentum matrices of the spin-(n-1)/2 representation; `S_3` is
/// diagonal, `S_1, S_2` come from the ladder operators.
fn spin_matrices(n: usize) -> [CMatrix; 3] {
    let s = (n as f64 - 1.0) / 2.0;
    let mut sz = CMatrix::zeros(n);
    let mut sp = CMatrix::zeros(n);
    for k in 0..n {
        let m = s - k as f64;
        sz[(k, k)] = Complex::new(m, 0.0);
        if k > 0 {
            // S_+ raises m: (S_+)_{k-1,k} = sqrt(s(s+1) - m(m+1)).
            sp[(k - 1, k)] = Complex::new((s * (s + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.dagger();
    let sx = (&sp + &sm).scale_re(0.5);
    let sy = (&sp - &sm).scale(Complex::new(0.0, -0.5));
    [sx, sy, sz]
}

/// Orthonormal basis of `u(n)` under the real Frobenius inner product.
pub fn u_n_basis(n: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(n * n);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..n {
        let mut e = CMatrix::zeros(n);
        e[(a, a)] = Complex::new(0.0, 1.0);
        basis.push(e);
    }
    for a in 0..n {
        for b in a + 1..n {
            let mut skew = CMatrix::zeros(n);
            skew[(a, b)] = Complex::new(r, 0.0);
            skew[(b, a)] = Complex::new(-r, 0.0);
            basis.push(skew);
            let mut sym = CMatrix::zeros(n);
            sym[(a, b)] = Complex::new(0.0, r);
            sym[(b, a)] = Complex::new(0.0, r);
            basis.push(sym);
        }
    }
    basis
}

impl DiscreteLaplacian {
    pub fn new(n: usize) -> Self {
        let [sx, sy, sz] = spin_matrices(n);
        let i = Complex::new(0.0, 1.0);
        let generators = [sx.scale(i), sy.scale(i), sz.scale(i)];

        // Represent the operator on the orthonormal u(n) basis and
        // diagonalize once; the matrix is real symmetric.
        let basis = u_n_basis(n);
        let m = basis.len();
        let mut op = CMatrix::zeros(m);
        for (k, bk) in basis.iter().enumerate() {
            let image = apply_generators(&generators, bk);
            for (j, bj) in basis.iter().enumerate() {
                op[(j, k)] = Complex::new(bj.inner(&image), 0.0);
            }
        }
        let (eigvals, v) = eigh_hermitian(&op);
        let mut eigvecs = Vec::with_capacity(m);
        for k in 0..m {
            let mut e = CMatrix::zeros(n);
            for (j, bj) in basis.iter().enumerate() {
                let c = v[(j, k)].re;
                if c != 0.0 {
                    e = &e + &bj.scale_re(c);
                }
            }
            eigvecs.push(e);
        }
        DiscreteLaplacian {
            n,
            generators,
            eigvals,
            eigvecs,
        }
    }

    /// Apply the operator: `sum_a [X_a, [X_a, w]]`.
    pub fn apply(&self, w: &CMatrix) -> Result<CMatrix> {
        if w.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: w.n,
            });
        }
        Ok(apply_generators(&self.generators, w))
    }

    /// Moore-Penrose pseudoinverse: project out the trace and invert on
    /// `su(n)`. Requires an anti-Hermitian input.
    pub fn pinv(&self, w: &CMatrix) -> Result<CMatrix> {
        let dev = w.anti_hermitian_deviation();
        if dev > 1e-12 * w.max_abs().max(1.0) {
            return Err(Error::NotAntiHermitian { deviation: dev });
        }
        Ok(self.pinv_unchecked(w))
    }

    /// Pseudoinverse without the anti-Hermitian validation; callers must pass
    /// an exactly anti-Hermitian matrix.
    pub fn pinv_unchecked(&self, w: &CMatrix) -> CMatrix {
        let t = w.trace() * (1.0 / self.n as f64);
        let traceless = CMatrix::from_fn(
            self.n,
            |i, j| {
                if i == j {
                    w[(i, j)] - t
                } else {
                    w[(i, j)]
                }
            },
        );
        let mut out = CMatrix::zeros(self.n);
        for (val, e) in self.eigvals.iter().zip(self.eigvecs.iter()) {
            if val.abs() < 0.5 {
                continue; // nullspace direction (i I)
            }
            let c = e.inner(&traceless) / val;
            if c != 0.0 {
                out = &out + &e.scale_re(c);
            }
        }
        out
    }

    /// Operator spectrum on `u(n)`, ascending.
    pub fn spectrum(&self) -> &[f64] {
        &self.eigvals
    }

    /// Orthonormal eigenmatrices matching [`DiscreteLaplacian::spectrum`].
    pub fn eigenbasis(&self) -> &[CMatrix] {
        &self.eigvecs
    }
}

fn apply_generators(gens: &[CMatrix; 3], w: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(w.n);
    for x in gens {
        let inner = x.commutator(w);
        out = &out + &x.commutator(&inner);
    }
    out
}
