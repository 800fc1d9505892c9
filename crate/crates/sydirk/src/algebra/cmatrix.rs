//! Dense square complex matrices over paired reals.

use super::complex::{Complex, C_ONE, C_ZERO};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub n: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![C_ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = C_ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dagger(&self) -> Self {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex {
        let mut t = C_ZERO;
        for i in 0..self.n {
            t += self[(i, i)];
        }
        t
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        self * other - other * self
    }

    /// Real Frobenius inner product `Re tr(self^dagger other)`.
    pub fn inner(&self, other: &CMatrix) -> f64 {
        let mut s = 0.0;
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            s += a.re * b.re + a.im * b.im;
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// Anti-Hermitian part `(a - a^dagger)/2`; exactly anti-Hermitian in
    /// floating point.
    pub fn anti_hermitian_part(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| (self[(i, j)] - self[(j, i)].conj()) * 0.5)
    }

    /// Largest entry of `a + a^dagger`; zero iff anti-Hermitian.
    pub fn anti_hermitian_deviation(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                d = d.max((self[(i, j)] + self[(j, i)].conj()).abs());
            }
        }
        d
    }

    pub fn scale(&self, s: Complex) -> CMatrix {
        let mut m = self.clone();
        for c in &mut m.data {
            *c = *c * s;
        }
        m
    }

    pub fn scale_re(&self, s: f64) -> CMatrix {
        let mut m = self.clone();
        for c in &mut m.data {
            *c = *c * s;
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.is_finite())
    }

    /// Flatten to interleaved `[re, im, re, im, ..]`, row-major.
    pub fn encode(&self, out: &mut Vec<f64>) {
        for c in &self.data {
            out.push(c.re);
            out.push(c.im);
        }
    }

    /// Inverse of [`CMatrix::encode`]; reads `2 n^2` values from `flat`.
    pub fn decode(n: usize, flat: &[f64]) -> CMatrix {
        assert_eq!(flat.len(), 2 * n * n, "flat state has wrong length");
        let mut m = CMatrix::zeros(n);
        for (k, c) in m.data.iter_mut().enumerate() {
            c.re = flat[2 * k];
            c.im = flat[2 * k + 1];
        }
        m
    }

    /// Solve `self * X = B` by LU with partial pivoting.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        if self.n != b.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: b.n,
            });
        }
        let n = self.n;
        let mut lu = self.clone();
        let mut x = b.clone();
        for col in 0..n {
            let mut pivot = col;
            let mut best = lu[(col, col)].abs();
            for r in col + 1..n {
                let v = lu[(r, col)].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best < 1e-300 {
                return Err(Error::SingularFactor { stage: 0 });
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = lu[(col, j)];
                    lu[(col, j)] = lu[(pivot, j)];
                    lu[(pivot, j)] = tmp;
                    let tmp = x[(col, j)];
                    x[(col, j)] = x[(pivot, j)];
                    x[(pivot, j)] = tmp;
                }
            }
            let inv = lu[(col, col)].recip();
            for r in col + 1..n {
                let factor = lu[(r, col)] * inv;
                lu[(r, col)] = factor;
                for j in col + 1..n {
                    let s = factor * lu[(col, j)];
                    lu[(r, j)] -= s;
                }
                for j in 0..n {
                    let s = factor * x[(col, j)];
                    x[(r, j)] -= s;
                }
            }
        }
        // Back substitution.
        for col in (0..n).rev() {
            let inv = lu[(col, col)].recip();
            for j in 0..n {
                x[(col, j)] = x[(col, j)] * inv;
            }
            for r in 0..col {
                let factor = lu[(r, col)];
                for j in 0..n {
                    let s = factor * x[(col, j)];
                    x[(r, j)] -= s;
                }
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.n))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(rhs.data.iter()) {
            *a += *b;
        }
        m
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(rhs.data.iter()) {
            *a -= *b;
        }
        m
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: CMatrix) -> CMatrix {
        &self - &rhs
    }
}

impl Add for CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: CMatrix) -> CMatrix {
        &self + &rhs
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        let mut m = self.clone();
        for c in &mut m.data {
            *c = -*c;
        }
        m
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let s = a * rhs[(k, j)];
                    out[(i, j)] += s;
                }
            }
        }
        out
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        &self * &rhs
    }
}

/// Serialized form of a complex matrix: dimension plus row-major real and
/// imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixDoc {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixDoc {
            n: m.n,
            re: m.data.iter().map(|c| c.re).collect(),
            im: m.data.iter().map(|c| c.im).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.re.len() != self.n * self.n || self.im.len() != self.n * self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n * self.n,
                got: self.re.len().min(self.im.len()),
            });
        }
        let mut m = CMatrix::zeros(self.n);
        for (k, c) in m.data.iter_mut().enumerate() {
            c.re = self.re[k];
            c.im = self.im[k];
        }
        Ok(m)
    }
}
