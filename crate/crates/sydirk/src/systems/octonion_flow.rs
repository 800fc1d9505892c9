//! Octonion flows `y' = a(|y|^2) y / 2` projecting onto the scalar
//! `z = |y|^2` with `z' = Re(a(z)) z`.

use super::{random_octonion, OperatorFamily, ProjectableSystem};
use crate::algebra::octonion::Octonion;
use crate::descent::ReducedFlow;
use crate::error::Result;
use rand_chacha::ChaCha8Rng;

pub struct OctonionFlow {
    a: Box<dyn Fn(f64) -> Octonion + Send + Sync>,
}

impl OctonionFlow {
    pub fn new(a: impl Fn(f64) -> Octonion + Send + Sync + 'static) -> Self {
        OctonionFlow { a: Box::new(a) }
    }

    /// Flow with a constant coefficient octonion.
    pub fn constant(x: Octonion) -> Self {
        OctonionFlow::new(move |_| x)
    }
}

impl ReducedFlow for OctonionFlow {
    fn dim_z(&self) -> usize {
        1
    }

    fn g(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![(self.a)(z[0]).re() * z[0]])
    }

    fn gamma(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.5 * (self.a)(z[0]).norm_sq() * z[0]])
    }

    fn diagnostic_names(&self) -> Vec<String> {
        vec!["z".into()]
    }

    fn diagnostics(&self, z: &[f64]) -> Vec<f64> {
        vec![z[0]]
    }
}

impl ProjectableSystem for OctonionFlow {
    fn name(&self) -> &'static str {
        "octonion_flow"
    }

    fn dim_y(&self) -> usize {
        8
    }

    fn f(&self, y: &[f64]) -> Result<Vec<f64>> {
        let yo = Octonion::from_array(y.try_into().expect("octonion state has length 8"));
        let z = yo.norm_sq();
        let out = ((self.a)(z) * yo) * 0.5;
        Ok(out.as_array().to_vec())
    }

    fn map(&self, y: &[f64]) -> Vec<f64> {
        vec![y.iter().map(|v| v * v).sum()]
    }

    fn map_prime(&self, y: &[f64], v: &[f64]) -> Vec<f64> {
        vec![2.0 * y.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()]
    }

    fn map_second(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        vec![2.0 * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()]
    }

    fn sample_y(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        random_octonion(rng).as_array().to_vec()
    }

    fn operator_family(&self) -> Option<OperatorFamily> {
        Some(OperatorFamily::OctonionLeftMult)
    }
}
