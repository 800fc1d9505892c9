//! Algebraic kernels: complex scalars and matrices, quaternions, octonions,
//! Hermitian eigensolver, the discrete spherical Laplacian, and the L/P
//! eigenbasis splitting.

pub mod cmatrix;
pub mod complex;
pub mod eigh;
pub mod laplacian;
pub mod octonion;
pub mod quaternion;
pub mod splitting;

pub use cmatrix::{CMatrix, MatrixDoc};
pub use complex::Complex;
pub use eigh::{eig_anti_hermitian, eigh_hermitian};
pub use laplacian::DiscreteLaplacian;
pub use octonion::Octonion;
pub use quaternion::Quaternion;
pub use splitting::{lp_split, LpSplitting, DEFAULT_EIG_TOL};

use crate::error::{Error, Result};
use quaternion::Q_K;
use rand::Rng;

/// The map `y -> y k y* / 4` from quaternions to purely imaginary
/// quaternions, identified with R^3.
pub fn hopf_map(y: Quaternion) -> [f64; 3] {
    let im = (y * Q_K * y.conj()) * 0.25;
    debug_assert!(im.w.abs() <= 1e-15 * y.norm_sq().max(1.0));
    im.imag()
}

/// Coadjoint-type action on matrices: `M^dagger z - z M^dagger`.
pub fn ad_star(m: &CMatrix, z: &CMatrix) -> Result<CMatrix> {
    if m.n != z.n {
        return Err(Error::DimensionMismatch {
            expected: m.n,
            got: z.n,
        });
    }
    Ok(m.dagger().commutator(z))
}

/// Largest constraint violation seen in random closure checks on `su(n)`
/// (bracket and `S -> TST`) and on the Hermitian operators (Jordan product).
#[derive(Debug, Clone, Copy)]
pub struct ClosureReport {
    /// `[S, T]` failing to be anti-Hermitian traceless for `S, T` in `su(n)`.
    pub bracket: f64,
    /// `T S T` failing to be anti-Hermitian for `S, T` in `su(n)`.
    pub quadratic: f64,
    /// `(S T + T S)/2` failing to be Hermitian for Hermitian `S, T`.
    pub jordan: f64,
}

impl ClosureReport {
    pub fn max(&self) -> f64 {
        self.bracket.max(self.quadratic).max(self.jordan)
    }
}

/// Sample random pairs and measure how far the advertised closures are from
/// holding exactly.
pub fn closure_checks(sample_count: usize, n: usize, rng: &mut impl Rng) -> ClosureReport {
    let mut report = ClosureReport {
        bracket: 0.0,
        quadratic: 0.0,
        jordan: 0.0,
    };
    for _ in 0..sample_count {
        let s = random_su_n(n, rng);
        let t = random_su_n(n, rng);
        let bracket = s.commutator(&t);
        report.bracket = report
            .bracket
            .max(bracket.anti_hermitian_deviation())
            .max(bracket.trace().abs());
        let tst = &(&t * &s) * &t;
        report.quadratic = report.quadratic.max(tst.anti_hermitian_deviation());

        let hs = random_hermitian(n, rng);
        let ht = random_hermitian(n, rng);
        let jordan = (&(&hs * &ht) + &(&ht * &hs)).scale_re(0.5);
        report.jordan = report.jordan.max((&jordan.dagger() - &jordan).max_abs());
    }
    report
}

/// Random traceless anti-Hermitian matrix with entries O(1).
pub fn random_su_n(n: usize, rng: &mut impl Rng) -> CMatrix {
    let w = random_u_n(n, rng);
    let t = w.trace() * (1.0 / n as f64);
    CMatrix::from_fn(n, |i, j| if i == j { w[(i, j)] - t } else { w[(i, j)] })
}

/// Random anti-Hermitian matrix with entries O(1).
pub fn random_u_n(n: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(n, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
    .anti_hermitian_part()
}

/// Random Hermitian matrix with entries O(1).
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    let a = CMatrix::from_fn(n, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    CMatrix::from_fn(n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

/// Random complex matrix with entries O(1).
pub fn random_cmatrix(n: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(n, |_, _| {
        Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use quaternion::Q_ONE;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hopf_map_of_one_and_k() {
        let z = hopf_map(Q_ONE);
        assert_eq!(z, [0.0, 0.0, 0.25]);
        let z = hopf_map(Q_K);
        assert!((z[0]).abs() < 1e-15 && (z[1]).abs() < 1e-15);
        assert!((z[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hopf_map_norm_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..200 {
            let y = Quaternion::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let z = hopf_map(y);
            let norm = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
            assert!(
                (norm - 0.25 * y.norm_sq()).abs() <= 1e-14,
                "|hopf(y)| != |y|^2/4"
            );
        }
    }

    #[test]
    fn ad_star_of_identity_and_diagonals() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let z = random_cmatrix(3, &mut rng);
        let zero = ad_star(&CMatrix::identity(3), &z).unwrap();
        assert!(zero.max_abs() < 1e-15);

        let d1 = CMatrix::from_fn(3, |i, j| {
            if i == j {
                Complex::new(i as f64 + 1.0, 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        let d2 = CMatrix::from_fn(3, |i, j| {
            if i == j {
                Complex::new(0.0, i as f64 - 1.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        assert!(ad_star(&d1, &d2).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn ad_star_matches_direct_arithmetic() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let m = random_cmatrix(3, &mut rng);
        let z = random_cmatrix(3, &mut rng);
        let got = ad_star(&m, &z).unwrap();
        let md = m.dagger();
        let want = &(&md * &z) - &(&z * &md);
        assert!((&got - &want).max_abs() < 1e-15);
    }

    #[test]
    fn closure_report_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        let report = closure_checks(200, 4, &mut rng);
        assert!(report.max() <= 1e-13, "closure violation {report:?}");
    }
}
