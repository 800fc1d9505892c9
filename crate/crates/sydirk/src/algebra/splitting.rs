//! Eigenbasis splitting of a matrix flow direction into commutator and
//! commuting parts: `gval = [L, z] + P z`.
//!
//! In the eigenbasis of `z` this is the split into off-diagonal and diagonal
//! parts. Implemented for anti-Hermitian `z` (the `u(n)` family), where the
//! eigenbasis is unitary and the intermediate spectrum is real.

use super::cmatrix::CMatrix;
use super::complex::Complex;
use super::eigh::eig_anti_hermitian;
use crate::error::{Error, Result};

/// Default eigenvalue-separation tolerance, relative to the spectral radius.
/// Below this the divided differences of the splitting lose all significant
/// digits.
pub const DEFAULT_EIG_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct LpSplitting {
    /// Unitary eigenvector matrix of `z`.
    pub v: CMatrix,
    /// Eigenvalues of `z` (purely imaginary, stored as the imaginary parts).
    pub lambda_im: Vec<f64>,
    /// Commutator part: zero diagonal in the eigenbasis of `z`.
    pub l: CMatrix,
    /// Commuting part: diagonal in the eigenbasis of `z`.
    pub p: CMatrix,
    /// `L + P/2`.
    pub m_dagger: CMatrix,
    /// `-L + P/2`.
    pub n: CMatrix,
}

/// Split `gval = [L, z] + P z` in the eigenbasis of the anti-Hermitian
/// matrix `z`.
///
/// Fails with [`Error::DegenerateSpectrum`] when eigenvalues of `z` collide
/// or approach zero within `eig_tol` (relative to the spectral radius), and
/// with [`Error::NotAntiHermitian`] when `z` is not anti-Hermitian.
pub fn lp_split(z: &CMatrix, gval: &CMatrix, eig_tol: f64) -> Result<LpSplitting> {
    if z.n != gval.n {
        return Err(Error::DimensionMismatch {
            expected: z.n,
            got: gval.n,
        });
    }
    let dev = z.anti_hermitian_deviation();
    if dev > 1e-10 * z.max_abs().max(1.0) {
        return Err(Error::NotAntiHermitian { deviation: dev });
    }
    let n = z.n;
    let (mu, v) = eig_anti_hermitian(z);
    let radius = mu.iter().fold(0.0f64, |a, m| a.max(m.abs())).max(1e-300);
    let tol_abs = eig_tol * radius;
    for i in 0..n {
        if mu[i].abs() <= tol_abs {
            return Err(Error::DegenerateSpectrum(format!(
                "eigenvalue {} of magnitude {:.3e} is below tolerance {:.3e}",
                i,
                mu[i].abs(),
                tol_abs
            )));
        }
        for j in i + 1..n {
            let gap = (mu[i] - mu[j]).abs();
            if gap <= tol_abs {
                return Err(Error::DegenerateSpectrum(format!(
                    "eigenvalue gap |mu_{i} - mu_{j}| = {gap:.3e} is below tolerance {tol_abs:.3e}"
                )));
            }
        }
    }

    let vd = v.dagger();
    let k = &(&vd * gval) * &v;
    let mut l_tilde = CMatrix::zeros(n);
    let mut p_tilde = CMatrix::zeros(n);
    for i in 0..n {
        // P_ii = K_ii / lambda_i with lambda_i = i mu_i.
        p_tilde[(i, i)] = k[(i, i)] * Complex::new(0.0, -1.0 / mu[i]);
        for j in 0..n {
            if i != j {
                // L_ij = K_ij / (lambda_j - lambda_i).
                l_tilde[(i, j)] = k[(i, j)] * Complex::new(0.0, -1.0 / (mu[j] - mu[i]));
            }
        }
    }
    let l = &(&v * &l_tilde) * &vd;
    let p = &(&v * &p_tilde) * &vd;
    let m_dagger = &l + &p.scale_re(0.5);
    let n_mat = &p.scale_re(0.5) - &l;
    Ok(LpSplitting {
        v,
        lambda_im: mu,
        l,
        p,
        m_dagger,
        n: n_mat,
    })
}
