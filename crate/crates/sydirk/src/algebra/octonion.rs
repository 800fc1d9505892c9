//! Octonions as Cayley-Dickson pairs of quaternions.
//!
//! Product: `(q, p)(r, s) = (qr - s* p, sq + pr*)`, conjugation
//! `(q, p)* = (q*, -p)`. The algebra is alternative but not associative.

use super::quaternion::{Quaternion, Q_ZERO};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Octonion {
    pub q: Quaternion,
    pub p: Quaternion,
}

impl Octonion {
    pub const fn new(q: Quaternion, p: Quaternion) -> Self {
        Octonion { q, p }
    }

    pub fn zero() -> Self {
        Octonion::new(Q_ZERO, Q_ZERO)
    }

    /// Standard basis element `e_k`, `k = 0..8`; `e_0 = 1`.
    pub fn basis(k: usize) -> Self {
        let mut a = [0.0; 8];
        a[k] = 1.0;
        Octonion::from_array(a)
    }

    pub fn conj(self) -> Self {
        Octonion::new(self.q.conj(), -self.p)
    }

    /// Real part `(x + x*)/2`.
    pub fn re(self) -> f64 {
        self.q.w
    }

    pub fn norm_sq(self) -> f64 {
        self.q.norm_sq() + self.p.norm_sq()
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn as_array(self) -> [f64; 8] {
        let q = self.q.as_array();
        let p = self.p.as_array();
        [q[0], q[1], q[2], q[3], p[0], p[1], p[2], p[3]]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        Octonion::new(
            Quaternion::new(a[0], a[1], a[2], a[3]),
            Quaternion::new(a[4], a[5], a[6], a[7]),
        )
    }
}

impl Add for Octonion {
    type Output = Octonion;
    fn add(self, r: Octonion) -> Octonion {
        Octonion::new(self.q + r.q, self.p + r.p)
    }
}

impl Sub for Octonion {
    type Output = Octonion;
    fn sub(self, r: Octonion) -> Octonion {
        Octonion::new(self.q - r.q, self.p - r.p)
    }
}

impl Neg for Octonion {
    type Output = Octonion;
    fn neg(self) -> Octonion {
        Octonion::new(-self.q, -self.p)
    }
}

impl Mul<f64> for Octonion {
    type Output = Octonion;
    fn mul(self, s: f64) -> Octonion {
        Octonion::new(self.q * s, self.p * s)
    }
}

impl Mul<Octonion> for f64 {
    type Output = Octonion;
    fn mul(self, o: Octonion) -> Octonion {
        o * self
    }
}

impl Mul for Octonion {
    type Output = Octonion;
    fn mul(self, r: Octonion) -> Octonion {
        let (q, p) = (self.q, self.p);
        let (rr, s) = (r.q, r.p);
        Octonion::new(q * rr - s.conj() * p, s * q + p * rr.conj())
    }
}
