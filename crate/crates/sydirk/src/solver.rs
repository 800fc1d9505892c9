//! Implicit-equation solver used by the stage computations: fixed-point
//! iteration with an optional dense finite-difference Newton fallback.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStrategy {
    FixedPoint,
    NewtonFallback,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Relative convergence tolerance; a stage is converged when its equation
    /// residual is at most `tol * (1 + |x|)` in the max norm.
    pub tol: f64,
    pub max_iter: usize,
    pub strategy: SolveStrategy,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-14,
            max_iter: 200,
            strategy: SolveStrategy::FixedPoint,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::NonFinite {
                context: "solver settings",
            });
        }
        Ok(())
    }
}

pub fn max_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Solve `x = phi(x)` starting from `guess`. Returns the solution and the
/// number of `phi` evaluations. With `NewtonFallback`, a stall (residual
/// shrinking by less than 10% per iteration) switches to a dense
/// finite-difference Newton iteration on `phi(x) - x`.
pub fn solve_fixed_point(
    phi: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    guess: &[f64],
    settings: &SolverSettings,
    stage: usize,
) -> Result<(Vec<f64>, usize)> {
    let mut x = guess.to_vec();
    let mut evals = 0usize;
    let mut prev_residual = f64::INFINITY;
    let mut stalled = 0usize;

    while evals < settings.max_iter {
        let next = phi(&x)?;
        evals += 1;
        let residual = max_diff(&next, &x);
        let scale = 1.0 + max_norm(&next);
        if !residual.is_finite() {
            return Err(Error::NonConvergence {
                stage,
                iters: evals,
                residual,
            });
        }
        if residual <= settings.tol * scale {
            return Ok((next, evals));
        }
        if settings.strategy == SolveStrategy::NewtonFallback {
            if residual > 0.9 * prev_residual {
                stalled += 1;
            } else {
                stalled = 0;
            }
            if stalled >= 3 {
                return newton_polish(phi, &next, settings, stage, evals);
            }
        }
        prev_residual = residual;
        x = next;
    }

    let final_residual = max_diff(&phi(&x)?, &x);
    Err(Error::NonConvergence {
        stage,
        iters: settings.max_iter,
        residual: final_residual,
    })
}

/// Newton iteration on `r(x) = phi(x) - x` with a finite-difference Jacobian.
pub(crate) fn newton_polish(
    phi: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    start: &[f64],
    settings: &SolverSettings,
    stage: usize,
    evals_so_far: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = start.len();
    let mut x = start.to_vec();
    let mut evals = evals_so_far;
    for _ in 0..settings.max_iter {
        let fx = phi(&x)?;
        evals += 1;
        let r: Vec<f64> = fx.iter().zip(&x).map(|(f, xi)| f - xi).collect();
        let residual = max_norm(&r);
        let scale = 1.0 + max_norm(&x);
        if residual <= settings.tol * scale {
            return Ok((x, evals));
        }
        // Jacobian of r by forward differences.
        let mut jac = vec![0.0; n * n];
        let eps_base = f64::EPSILON.sqrt();
        for j in 0..n {
            let eps = eps_base * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += eps;
            let fp = phi(&xp)?;
            evals += 1;
            for i in 0..n {
                jac[i * n + j] = (fp[i] - fx[i]) / eps - if i == j { 1.0 } else { 0.0 };
            }
        }
        // Solve jac * d = -r.
        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        solve_dense(&mut jac, &mut rhs, n).ok_or(Error::NonConvergence {
            stage,
            iters: evals,
            residual,
        })?;
        for i in 0..n {
            x[i] += rhs[i];
        }
    }
    let final_residual = max_diff(&phi(&x)?, &x);
    Err(Error::NonConvergence {
        stage,
        iters: evals,
        residual: final_residual,
    })
}

/// In-place dense LU solve with partial pivoting; `a` is row-major and is
/// destroyed, `b` becomes the solution. `None` signals a singular matrix.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<()> {
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] * inv;
            a[r * n + col] = factor;
            for j in col + 1..n {
                a[r * n + j] -= factor * a[col * n + j];
            }
            b[r] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        b[col] /= a[col * n + col];
        for r in 0..col {
            b[r] -= a[r * n + col] * b[col];
        }
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_fixed_point() {
        let settings = SolverSettings::default();
        let mut phi = |x: &[f64]| Ok(vec![0.5 * x[0] + 1.0]);
        let (x, iters) = solve_fixed_point(&mut phi, &[0.0], &settings, 0).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-13);
        assert!(iters > 1);
    }

    #[test]
    fn already_converged_costs_one_evaluation() {
        let settings = SolverSettings::default();
        let mut phi = |x: &[f64]| Ok(x.to_vec());
        let (_, iters) = solve_fixed_point(&mut phi, &[3.0, -1.0], &settings, 0).unwrap();
        assert_eq!(iters, 1);
    }

    #[test]
    fn divergent_map_reports_nonconvergence() {
        let settings = SolverSettings {
            max_iter: 30,
            ..SolverSettings::default()
        };
        let mut phi = |x: &[f64]| Ok(vec![2.0 * x[0] + 1.0]);
        match solve_fixed_point(&mut phi, &[1.0], &settings, 4) {
            Err(Error::NonConvergence { stage: 4, .. }) => {}
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn newton_fallback_rescues_slow_contraction() {
        // phi contracts at rate 0.97: fixed point alone needs ~1000 iters.
        let settings = SolverSettings {
            tol: 1e-13,
            max_iter: 60,
            strategy: SolveStrategy::NewtonFallback,
        };
        let mut phi = |x: &[f64]| Ok(vec![0.97 * x[0] + 0.3, 0.95 * x[1] - 0.1]);
        let (x, _) = solve_fixed_point(&mut phi, &[0.0, 0.0], &settings, 0).unwrap();
        assert!((x[0] - 10.0).abs() < 1e-10);
        assert!((x[1] + 2.0).abs() < 1e-10);

        let fixed_only = SolverSettings {
            tol: 1e-13,
            max_iter: 60,
            strategy: SolveStrategy::FixedPoint,
        };
        let mut phi2 = |x: &[f64]| Ok(vec![0.97 * x[0] + 0.3, 0.95 * x[1] - 0.1]);
        assert!(solve_fixed_point(&mut phi2, &[0.0, 0.0], &fixed_only, 0).is_err());
    }

    #[test]
    fn dense_solve_roundtrip() {
        let mut a = vec![4.0, 1.0, 2.0, 1.0, 3.0, 0.5, 2.0, 0.5, 5.0];
        let x = [1.0, -2.0, 0.5];
        let mut b = vec![
            4.0 * x[0] + 1.0 * x[1] + 2.0 * x[2],
            1.0 * x[0] + 3.0 * x[1] + 0.5 * x[2],
            2.0 * x[0] + 0.5 * x[1] + 5.0 * x[2],
        ];
        solve_dense(&mut a, &mut b, 3).unwrap();
        for i in 0..3 {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
    }
}
