//! Dense quadratic maps `F(y) = c0 + lin y + bil(y, y)/2` with the bilinear
//! part stored symmetric. Intended for moderate dimensions; the system
//! catalog supplies analytic derivative actions for large matrix states.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct QuadraticMap {
    pub dim_y: usize,
    pub dim_z: usize,
    /// Value at the origin.
    c0: Vec<f64>,
    /// `dim_z x dim_y`, row-major.
    lin: Vec<f64>,
    /// `dim_z x dim_y x dim_y`, symmetric in the last two slots.
    bil: Vec<f64>,
}

impl QuadraticMap {
    pub fn new(dim_y: usize, dim_z: usize, c0: Vec<f64>, lin: Vec<f64>, bil: Vec<f64>) -> Self {
        assert_eq!(c0.len(), dim_z);
        assert_eq!(lin.len(), dim_z * dim_y);
        assert_eq!(bil.len(), dim_z * dim_y * dim_y);
        let mut map = QuadraticMap {
            dim_y,
            dim_z,
            c0,
            lin,
            bil,
        };
        map.symmetrize();
        map
    }

    /// An affine map (`bil = 0`).
    pub fn affine(dim_y: usize, dim_z: usize, c0: Vec<f64>, lin: Vec<f64>) -> Self {
        QuadraticMap::new(dim_y, dim_z, c0, lin, vec![0.0; dim_z * dim_y * dim_y])
    }

    /// Random affine map with entries O(1).
    pub fn random_affine(dim_y: usize, dim_z: usize, rng: &mut impl Rng) -> Self {
        let c0 = (0..dim_z).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lin = (0..dim_z * dim_y)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        QuadraticMap::affine(dim_y, dim_z, c0, lin)
    }

    /// Random map with entries O(1); bilinear part symmetrized.
    pub fn random(dim_y: usize, dim_z: usize, rng: &mut impl Rng) -> Self {
        let c0 = (0..dim_z).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lin = (0..dim_z * dim_y)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let bil = (0..dim_z * dim_y * dim_y)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        QuadraticMap::new(dim_y, dim_z, c0, lin, bil)
    }

    fn symmetrize(&mut self) {
        let ny = self.dim_y;
        for z in 0..self.dim_z {
            for i in 0..ny {
                for j in i + 1..ny {
                    let a = self.bil[z * ny * ny + i * ny + j];
                    let b = self.bil[z * ny * ny + j * ny + i];
                    let m = 0.5 * (a + b);
                    self.bil[z * ny * ny + i * ny + j] = m;
                    self.bil[z * ny * ny + j * ny + i] = m;
                }
            }
        }
    }

    pub fn bil_entry(&self, z: usize, i: usize, j: usize) -> f64 {
        self.bil[z * self.dim_y * self.dim_y + i * self.dim_y + j]
    }

    /// `F(y)`.
    pub fn eval(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.c0.clone();
        let ny = self.dim_y;
        for z in 0..self.dim_z {
            let mut acc = 0.0;
            for i in 0..ny {
                acc += self.lin[z * ny + i] * y[i];
                let row = &self.bil[z * ny * ny + i * ny..z * ny * ny + (i + 1) * ny];
                let mut byj = 0.0;
                for j in 0..ny {
                    byj += row[j] * y[j];
                }
                acc += 0.5 * y[i] * byj;
            }
            out[z] += acc;
        }
        out
    }

    /// Derivative action `F'(y) v = lin v + bil(y, v)`.
    pub fn prime(&self, y: &[f64], v: &[f64]) -> Vec<f64> {
        let ny = self.dim_y;
        let mut out = vec![0.0; self.dim_z];
        for z in 0..self.dim_z {
            let mut acc = 0.0;
            for i in 0..ny {
                acc += self.lin[z * ny + i] * v[i];
            }
            for i in 0..ny {
                let row = &self.bil[z * ny * ny + i * ny..z * ny * ny + (i + 1) * ny];
                let mut bv = 0.0;
                for j in 0..ny {
                    bv += row[j] * v[j];
                }
                acc += y[i] * bv;
            }
            out[z] = acc;
        }
        out
    }

    /// Second derivative `F''(u, v) = bil(u, v)`, independent of the base
    /// point.
    pub fn second(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let ny = self.dim_y;
        let mut out = vec![0.0; self.dim_z];
        for z in 0..self.dim_z {
            let mut acc = 0.0;
            for i in 0..ny {
                let row = &self.bil[z * ny * ny + i * ny..z * ny * ny + (i + 1) * ny];
                let mut bv = 0.0;
                for j in 0..ny {
                    bv += row[j] * v[j];
                }
                acc += u[i] * bv;
            }
            out[z] = acc;
        }
        out
    }

    pub fn is_affine(&self) -> bool {
        self.bil.iter().all(|&x| x == 0.0)
    }
}
