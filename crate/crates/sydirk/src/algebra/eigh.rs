//! Hermitian eigendecomposition by cyclic Jacobi with complex rotations.

use super::cmatrix::CMatrix;
use super::complex::{Complex, C_ZERO};

const MAX_SWEEPS: usize = 60;

/// Eigendecomposition of a Hermitian matrix: `h = v * diag(vals) * v^dagger`
/// with real eigenvalues sorted ascending and unitary `v`.
pub fn eigh_hermitian(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.n;
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.max_abs().max(1e-300);
    let stop = 1e-15 * scale * (n as f64);

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.abs();
                if mag <= 1e-300 * scale {
                    a[(p, q)] = C_ZERO;
                    a[(q, p)] = C_ZERO;
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let w = apq * (1.0 / mag);
                let tau = (aqq - app) / (2.0 * mag);
                // Smaller root of t^2 - 2 tau t - 1 = 0 so the rotation angle
                // stays below pi/4.
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s_conj = w * (t * c);
                let s = s_conj.conj();

                // Column update: M <- M G with G = [[c, -s_conj],[s, c]].
                for r in 0..n {
                    let mp = a[(r, p)];
                    let mq = a[(r, q)];
                    a[(r, p)] = mp * c + mq * s;
                    a[(r, q)] = mq * c - mp * s_conj;
                }
                // Row update: M <- G^dagger M.
                for r in 0..n {
                    let mp = a[(p, r)];
                    let mq = a[(q, r)];
                    a[(p, r)] = mp * c + mq * s_conj;
                    a[(q, r)] = mq * c - mp * s;
                }
                a[(p, q)] = C_ZERO;
                a[(q, p)] = C_ZERO;
                a[(p, p)] = Complex::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex::new(a[(q, q)].re, 0.0);
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = vp * c + vq * s;
                    v[(r, q)] = vq * c - vp * s_conj;
                }
            }
        }
    }

    let mut vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    // Sort eigenpairs ascending for a deterministic output.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let sorted_v = CMatrix::from_fn(n, |r, k| v[(r, order[k])]);
    vals = order.iter().map(|&i| vals[i]).collect();
    (vals, sorted_v)
}

/// Eigendecomposition of an anti-Hermitian matrix `z = v * diag(i mu) * v^dagger`
/// with real `mu` sorted ascending. Computed on the Hermitian matrix `i z`.
pub fn eig_anti_hermitian(z: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = z.n;
    // i z is Hermitian with eigenvalues -mu.
    let h = CMatrix::from_fn(n, |i, j| {
        let c = z[(i, j)];
        Complex::new(-c.im, c.re)
    });
    let (vals, v) = eigh_hermitian(&h);
    let mu: Vec<f64> = vals.iter().map(|d| -d).collect();
    (mu, v)
}
