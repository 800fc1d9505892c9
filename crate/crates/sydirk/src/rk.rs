//! Full-space Runge-Kutta stepping on flat real state vectors, the
//! quadratic-observable update, and the two-sided stage/step expansion
//! residuals.

use crate::error::{Error, Result};
use crate::quadmap::QuadraticMap;
use crate::solver::{
    max_diff, max_norm, newton_polish, solve_fixed_point, SolveStrategy, SolverSettings,
};
use crate::tableau::{check_symplectic, classify, ButcherTableau, DEFAULT_CLASS_TOL};

/// Autonomous vector field on a flat real state space. Evaluation must be
/// deterministic and side-effect free; matrix-flow fields may fail when the
/// eigenbasis splitting degenerates.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>>;
}

/// Vector field from an infallible closure.
pub struct FnField<F: Fn(&[f64]) -> Vec<f64>> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> VectorField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(y))
    }
}

#[derive(Debug, Clone)]
pub struct RkStep {
    pub y1: Vec<f64>,
    pub stages: Vec<Vec<f64>>,
    /// Total number of vector-field evaluations spent on the implicit solves.
    pub iters: usize,
}

/// One Runge-Kutta step. Stages of tableaus that are lower-triangular up to
/// a stage permutation are solved sequentially, each as a single implicit
/// equation; otherwise the fully coupled system is iterated.
pub fn rk_step(
    t: &ButcherTableau,
    f: &dyn VectorField,
    y0: &[f64],
    h: f64,
    settings: &SolverSettings,
) -> Result<RkStep> {
    rk_step_with_guess(t, f, y0, h, settings, None)
}

/// [`rk_step`] with per-stage initial guesses (used to warm-start from the
/// previous step's converged stages).
pub fn rk_step_with_guess(
    t: &ButcherTableau,
    f: &dyn VectorField,
    y0: &[f64],
    h: f64,
    settings: &SolverSettings,
    guess: Option<&[Vec<f64>]>,
) -> Result<RkStep> {
    settings.validate()?;
    if f.dim() != y0.len() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: y0.len(),
        });
    }
    let s = t.stages();
    let n = y0.len();

    // A permutation with exactly-zero entries above the permuted diagonal
    // enables the sequential solve.
    let sequential_order = classify(t, DEFAULT_CLASS_TOL)
        .ok()
        .and_then(|c| c.dirk_permutation)
        .filter(|perm| (0..s).all(|i| (i + 1..s).all(|j| t.a(perm[i], perm[j]) == 0.0)));

    let mut stages: Vec<Vec<f64>> = vec![Vec::new(); s];
    let mut f_vals: Vec<Vec<f64>> = vec![Vec::new(); s];
    let mut iters = 0usize;

    match sequential_order {
        Some(order) => {
            for &i in &order {
                let mut base = y0.to_vec();
                for j in 0..s {
                    if j != i && t.a(i, j) != 0.0 {
                        let fj = &f_vals[j];
                        debug_assert!(!fj.is_empty(), "stage order violated");
                        for k in 0..n {
                            base[k] += h * t.a(i, j) * fj[k];
                        }
                    }
                }
                let aii = t.a(i, i);
                if aii == 0.0 {
                    f_vals[i] = f.eval(&base)?;
                    iters += 1;
                    stages[i] = base;
                } else {
                    let start: Vec<f64> = match guess {
                        Some(g) => g[i].clone(),
                        None => y0.to_vec(),
                    };
                    let mut phi = |x: &[f64]| {
                        let fx = f.eval(x)?;
                        let mut out = base.clone();
                        for k in 0..n {
                            out[k] += h * aii * fx[k];
                        }
                        Ok(out)
                    };
                    let (yi, used) = solve_fixed_point(&mut phi, &start, settings, i)?;
                    iters += used;
                    f_vals[i] = f.eval(&yi)?;
                    stages[i] = yi;
                }
            }
        }
        None => {
            let (solved, used) = solve_coupled(t, f, y0, h, settings, guess)?;
            iters = used;
            for (i, yi) in solved.into_iter().enumerate() {
                f_vals[i] = f.eval(&yi)?;
                stages[i] = yi;
            }
        }
    }

    let mut y1 = y0.to_vec();
    for i in 0..s {
        for k in 0..n {
            y1[k] += h * t.b()[i] * f_vals[i][k];
        }
    }
    if !y1.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite { context: "rk step" });
    }
    Ok(RkStep { y1, stages, iters })
}

/// Iterate all stages of a fully implicit tableau simultaneously; converged
/// when every stage meets the mixed absolute/relative residual bound.
fn solve_coupled(
    t: &ButcherTableau,
    f: &dyn VectorField,
    y0: &[f64],
    h: f64,
    settings: &SolverSettings,
    guess: Option<&[Vec<f64>]>,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let s = t.stages();
    let n = y0.len();
    let mut stacked = vec![0.0; s * n];
    for i in 0..s {
        let src: &[f64] = match guess {
            Some(g) => &g[i],
            None => y0,
        };
        stacked[i * n..(i + 1) * n].copy_from_slice(src);
    }

    let phi = |x: &[f64]| -> Result<Vec<f64>> {
        let mut f_vals: Vec<Vec<f64>> = Vec::with_capacity(s);
        for j in 0..s {
            f_vals.push(f.eval(&x[j * n..(j + 1) * n])?);
        }
        let mut out = vec![0.0; s * n];
        for i in 0..s {
            let row = &mut out[i * n..(i + 1) * n];
            row.copy_from_slice(y0);
            for j in 0..s {
                let a = t.a(i, j);
                if a != 0.0 {
                    for k in 0..n {
                        row[k] += h * a * f_vals[j][k];
                    }
                }
            }
        }
        Ok(out)
    };

    let mut x = stacked;
    let mut evals = 0usize;
    let mut prev_residual = f64::INFINITY;
    let mut stalled = 0usize;
    while evals < settings.max_iter {
        let next = phi(&x)?;
        evals += 1;
        let mut converged = true;
        let mut worst = 0.0f64;
        for i in 0..s {
            let r = max_diff(&next[i * n..(i + 1) * n], &x[i * n..(i + 1) * n]);
            let scale = 1.0 + max_norm(&next[i * n..(i + 1) * n]);
            if r > settings.tol * scale {
                converged = false;
            }
            worst = worst.max(r / scale);
        }
        if !worst.is_finite() {
            return Err(Error::NonConvergence {
                stage: 0,
                iters: evals,
                residual: worst,
            });
        }
        if converged {
            return Ok((split_stages(&next, s, n), evals));
        }
        if settings.strategy == SolveStrategy::NewtonFallback {
            if worst > 0.9 * prev_residual {
                stalled += 1;
            } else {
                stalled = 0;
            }
            if stalled >= 3 {
                let mut phi_mut = |v: &[f64]| phi(v);
                let (sol, used) = newton_polish(&mut phi_mut, &next, settings, 0, evals)?;
                return Ok((split_stages(&sol, s, n), used));
            }
        }
        prev_residual = worst;
        x = next;
    }
    let final_map = phi(&x)?;
    Err(Error::NonConvergence {
        stage: 0,
        iters: settings.max_iter,
        residual: max_diff(&final_map, &x),
    })
}

fn split_stages(stacked: &[f64], s: usize, n: usize) -> Vec<Vec<f64>> {
    (0..s)
        .map(|i| stacked[i * n..(i + 1) * n].to_vec())
        .collect()
}

#[derive(Debug, Clone)]
pub struct ObservableStep {
    /// `F(y0) + h sum_i b_i F'(Y_i) f(Y_i)`; equals `F(y1)` up to solver
    /// tolerance for a quadratic functionally equivariant tableau.
    pub z1: Vec<f64>,
    /// `F(Y_i)` at the internal stages.
    pub stage_values: Vec<Vec<f64>>,
}

/// Evolve a quadratic observable through one step without forming `F(y1)`.
/// Requires the symplecticity condition within `1e-12`.
pub fn evolve_observable(
    t: &ButcherTableau,
    f: &dyn VectorField,
    map: &QuadraticMap,
    y0: &[f64],
    h: f64,
    settings: &SolverSettings,
) -> Result<ObservableStep> {
    let residual = check_symplectic(t);
    if residual > 1e-12 {
        return Err(Error::NotEquivariant { residual });
    }
    let step = rk_step(t, f, y0, h, settings)?;
    let mut z1 = map.eval(y0);
    let mut stage_values = Vec::with_capacity(t.stages());
    for (i, yi) in step.stages.iter().enumerate() {
        let fi = f.eval(yi)?;
        let contrib = map.prime(yi, &fi);
        for k in 0..z1.len() {
            z1[k] += h * t.b()[i] * contrib[k];
        }
        stage_values.push(map.eval(yi));
    }
    Ok(ObservableStep { z1, stage_values })
}

/// Max-norm residuals of the two-sided stage and step expansions of `F`
/// along one Runge-Kutta step: the quadratic correction coefficients
/// `a_ij a_ik - a_ij a_jk - a_ik a_kj` and `b_i b_j - b_i a_ij - b_j a_ji`
/// are formed explicitly and contracted against `F''(f(Y_j), f(Y_k))`.
pub fn lemma1_residual(
    t: &ButcherTableau,
    f: &dyn VectorField,
    map: &QuadraticMap,
    y0: &[f64],
    h: f64,
    settings: &SolverSettings,
) -> Result<(Vec<f64>, f64)> {
    let s = t.stages();
    let step = rk_step(t, f, y0, h, settings)?;
    let f_vals: Vec<Vec<f64>> = step
        .stages
        .iter()
        .map(|y| f.eval(y))
        .collect::<Result<_>>()?;
    let prime_vals: Vec<Vec<f64>> = step
        .stages
        .iter()
        .zip(&f_vals)
        .map(|(y, v)| map.prime(y, v))
        .collect();
    let second_vals: Vec<Vec<Vec<f64>>> = (0..s)
        .map(|j| (0..s).map(|k| map.second(&f_vals[j], &f_vals[k])).collect())
        .collect();
    let fz0 = map.eval(y0);
    let dim_z = map.dim_z;

    let mut stage_residuals = Vec::with_capacity(s);
    for i in 0..s {
        let mut coeff = vec![0.0; s * s];
        for j in 0..s {
            for k in 0..s {
                coeff[j * s + k] =
                    t.a(i, j) * t.a(i, k) - t.a(i, j) * t.a(j, k) - t.a(i, k) * t.a(k, j);
            }
        }
        let mut rhs = fz0.clone();
        for j in 0..s {
            for m in 0..dim_z {
                rhs[m] += h * t.a(i, j) * prime_vals[j][m];
            }
        }
        for j in 0..s {
            for k in 0..s {
                let c = coeff[j * s + k];
                if c != 0.0 {
                    for m in 0..dim_z {
                        rhs[m] += 0.5 * h * h * c * second_vals[j][k][m];
                    }
                }
            }
        }
        let lhs = map.eval(&step.stages[i]);
        stage_residuals.push(max_diff(&lhs, &rhs));
    }

    let mut rhs = fz0;
    for i in 0..s {
        for m in 0..dim_z {
            rhs[m] += h * t.b()[i] * prime_vals[i][m];
        }
    }
    for i in 0..s {
        for j in 0..s {
            let c = t.b()[i] * t.b()[j] - t.b()[i] * t.a(i, j) - t.b()[j] * t.a(j, i);
            if c != 0.0 {
                for m in 0..dim_z {
                    rhs[m] += 0.5 * h * h * c * second_vals[i][j][m];
                }
            }
        }
    }
    let lhs = map.eval(&step.y1);
    Ok((stage_residuals, max_diff(&lhs, &rhs)))
}

/// Stateful stepper that warm-starts each solve from the previous step's
/// converged stages.
pub struct RkIntegrator<'a> {
    pub tableau: &'a ButcherTableau,
    pub settings: SolverSettings,
    prev_stages: Option<Vec<Vec<f64>>>,
}

impl<'a> RkIntegrator<'a> {
    pub fn new(tableau: &'a ButcherTableau, settings: SolverSettings) -> Self {
        RkIntegrator {
            tableau,
            settings,
            prev_stages: None,
        }
    }

    pub fn step(&mut self, f: &dyn VectorField, y: &[f64], h: f64) -> Result<RkStep> {
        let out = rk_step_with_guess(
            self.tableau,
            f,
            y,
            h,
            &self.settings,
            self.prev_stages.as_deref(),
        )?;
        self.prev_stages = Some(out.stages.clone());
        Ok(out)
    }

    pub fn reset(&mut self) {
        self.prev_stages = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::{builtin_tableau, make_sydirk};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_field(f: impl Fn(f64) -> f64 + 'static) -> FnField<impl Fn(&[f64]) -> Vec<f64>> {
        FnField {
            dim: 1,
            f: move |y: &[f64]| vec![f(y[0])],
        }
    }

    #[test]
    fn zero_field_is_fixed_in_one_iteration() {
        let t = builtin_tableau("midpoint").unwrap();
        let f = scalar_field(|_| 0.0);
        let step = rk_step(&t, &f, &[3.7], 0.1, &SolverSettings::default()).unwrap();
        assert_eq!(step.y1, vec![3.7]);
        assert_eq!(step.iters, 1);
    }

    #[test]
    fn constant_field_midpoint() {
        let t = builtin_tableau("midpoint").unwrap();
        let f = scalar_field(|_| 1.0);
        let step = rk_step(&t, &f, &[0.0], 0.5, &SolverSettings::default()).unwrap();
        assert!((step.stages[0][0] - 0.25).abs() < 1e-14);
        assert!((step.y1[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn linear_field_matches_closed_form_midpoint_map() {
        let t = builtin_tableau("midpoint").unwrap();
        let f = scalar_field(|y| y);
        let h = 0.1;
        let step = rk_step(&t, &f, &[1.0], h, &SolverSettings::default()).unwrap();
        let exact = (1.0 + h / 2.0) / (1.0 - h / 2.0);
        assert!(
            (step.y1[0] - exact).abs() < 1e-13,
            "midpoint map for linear f: got {}, want {exact}",
            step.y1[0]
        );
    }

    #[test]
    fn coupled_solver_handles_gauss2() {
        let t = builtin_tableau("gauss2").unwrap();
        let f = scalar_field(|y| y);
        let h = 0.1;
        let step = rk_step(&t, &f, &[1.0], h, &SolverSettings::default()).unwrap();
        // Gauss-2 is the (2,2) Pade approximant of exp.
        let pade = (1.0 + h / 2.0 + h * h / 12.0) / (1.0 - h / 2.0 + h * h / 12.0);
        assert!((step.y1[0] - pade).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let t = builtin_tableau("midpoint").unwrap();
        let f = scalar_field(|y| y);
        assert!(matches!(
            rk_step(&t, &f, &[1.0, 2.0], 0.1, &SolverSettings::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn evolve_observable_requires_condition() {
        let t = builtin_tableau("rk4").unwrap();
        let f = scalar_field(|y| y);
        let map = QuadraticMap::new(1, 1, vec![0.0], vec![0.0], vec![2.0]);
        assert!(matches!(
            evolve_observable(&t, &f, &map, &[1.0], 0.1, &SolverSettings::default()),
            Err(Error::NotEquivariant { .. })
        ));
    }

    #[test]
    fn evolve_observable_square_under_unit_speed() {
        // F(y) = y^2, f = 1: the observable update telescopes to (y0+h)^2.
        let t = builtin_tableau("midpoint").unwrap();
        let f = scalar_field(|_| 1.0);
        let map = QuadraticMap::new(1, 1, vec![0.0], vec![0.0], vec![2.0]);
        for (y0, h) in [(0.3, 0.25), (-1.2, 0.5), (2.0, 0.1)] {
            let out =
                evolve_observable(&t, &f, &map, &[y0], h, &SolverSettings::default()).unwrap();
            assert!(
                (out.z1[0] - (y0 + h) * (y0 + h)).abs() < 1e-13,
                "z1 != (y0+h)^2 for y0={y0}, h={h}"
            );
        }
    }

    #[test]
    fn invariant_observable_is_frozen() {
        // F = |y|^2 with a rotation field: F' f = 0, so z1 = F(y0) exactly.
        let t = builtin_tableau("midpoint").unwrap();
        let f = FnField {
            dim: 2,
            f: |y: &[f64]| vec![-y[1], y[0]],
        };
        let map = QuadraticMap::new(2, 1, vec![0.0], vec![0.0, 0.0], vec![2.0, 0.0, 0.0, 2.0]);
        let y0 = [0.8, -0.6];
        let out = evolve_observable(&t, &f, &map, &y0, 0.2, &SolverSettings::default()).unwrap();
        let f0 = map.eval(&y0)[0];
        assert!((out.z1[0] - f0).abs() <= 1e-13);
    }

    #[test]
    fn lemma1_explicit_euler_hand_case() {
        // Euler, F(y)=y^2, f(y)=y, y0=1, h=0.1: the quadratic coefficient is
        // b_1^2 - 2 b_1 a_11 = 1 and both sides equal 1.21.
        let t = builtin_tableau("euler").unwrap();
        let f = scalar_field(|y| y);
        let map = QuadraticMap::new(1, 1, vec![0.0], vec![0.0], vec![2.0]);
        let (stage_res, step_res) =
            lemma1_residual(&t, &f, &map, &[1.0], 0.1, &SolverSettings::default()).unwrap();
        assert!(stage_res[0] <= 1e-15);
        assert!(step_res <= 1e-15);
    }

    #[test]
    fn lemma1_is_trivial_for_affine_observables() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let t = builtin_tableau("rk4").unwrap();
        let f = FnField {
            dim: 3,
            f: |y: &[f64]| vec![y[1] - 0.3, -y[0] + 0.1 * y[2], 0.2 * y[0]],
        };
        let map = QuadraticMap::affine(
            3,
            2,
            vec![0.1, -0.4],
            (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let y0 = [0.5, -0.2, 0.9];
        let (stage_res, step_res) =
            lemma1_residual(&t, &f, &map, &y0, 0.05, &SolverSettings::default()).unwrap();
        for r in stage_res {
            assert!(r <= 1e-13);
        }
        assert!(step_res <= 1e-13);
    }

    #[test]
    fn lemma1_fuzz_random_tableau_quadratic_map_affine_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        let settings = SolverSettings::default();
        for case in 0..40 {
            let s = rng.gen_range(1..=4);
            let a: Vec<Vec<f64>> = (0..s)
                .map(|_| (0..s).map(|_| rng.gen_range(-0.6..0.6)).collect())
                .collect();
            let b: Vec<f64> = (0..s).map(|_| rng.gen_range(-0.6..0.6)).collect();
            let t = ButcherTableau::new(a, b).unwrap();
            let dim_y = rng.gen_range(1..=5);
            let dim_z = rng.gen_range(1..=4);
            let map = QuadraticMap::random(dim_y, dim_z, &mut rng);
            let lin_field: Vec<f64> = (0..dim_y * dim_y)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let aff: Vec<f64> = (0..dim_y).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dim = dim_y;
            let f = FnField {
                dim,
                f: move |y: &[f64]| {
                    (0..dim)
                        .map(|i| {
                            aff[i] + (0..dim).map(|j| lin_field[i * dim + j] * y[j]).sum::<f64>()
                        })
                        .collect()
                },
            };
            let y0: Vec<f64> = (0..dim_y).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let (stage_res, step_res) =
                lemma1_residual(&t, &f, &map, &y0, 0.01, &settings).unwrap();
            for (i, r) in stage_res.iter().enumerate() {
                assert!(*r <= 1e-12, "case {case}: stage {i} residual {r}");
            }
            assert!(step_res <= 1e-12, "case {case}: step residual {step_res}");
        }
    }

    #[test]
    fn equivariance_matches_mapped_step_for_condition_passing_tableaus() {
        let mut rng = ChaCha8Rng::seed_from_u64(93);
        let settings = SolverSettings::default();
        for name in ["midpoint", "sydirk2", "gauss2"] {
            let t = builtin_tableau(name).unwrap();
            for _ in 0..20 {
                let map = QuadraticMap::random(3, 2, &mut rng);
                let lin: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = FnField {
                    dim: 3,
                    f: move |y: &[f64]| {
                        (0..3)
                            .map(|i| (0..3).map(|j| lin[i * 3 + j] * y[j]).sum::<f64>())
                            .collect()
                    },
                };
                let y0: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let h = 0.02;
                let obs = evolve_observable(&t, &f, &map, &y0, h, &settings).unwrap();
                let step = rk_step(&t, &f, &y0, h, &settings).unwrap();
                let mapped = map.eval(&step.y1);
                let scale = 1.0 + max_norm(&mapped);
                assert!(
                    max_diff(&obs.z1, &mapped) <= 10.0 * settings.tol * scale,
                    "equivariance violated for {name}"
                );
            }
        }
    }

    #[test]
    fn affine_equivariance_holds_for_every_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(94);
        let settings = SolverSettings::default();
        for name in ["euler", "rk4", "gauss2", "midpoint"] {
            let t = builtin_tableau(name).unwrap();
            let map = QuadraticMap::affine(
                2,
                2,
                vec![0.3, -0.1],
                (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            );
            let f = FnField {
                dim: 2,
                f: |y: &[f64]| vec![y[1], -(y[0] + 0.2 * y[0] * y[0] * y[0])],
            };
            let y0 = [0.7, -0.1];
            let h = 0.05;
            let step = rk_step(&t, &f, &y0, h, &settings).unwrap();
            // Affine observables follow the weighted stage sum for every
            // tableau, independent of the symplecticity condition.
            let mut z1 = map.eval(&y0);
            for (i, yi) in step.stages.iter().enumerate() {
                let fi = f.eval(yi).unwrap();
                let c = map.prime(yi, &fi);
                for k in 0..2 {
                    z1[k] += h * t.b()[i] * c[k];
                }
            }
            let mapped = map.eval(&step.y1);
            assert!(
                max_diff(&z1, &mapped) <= 10.0 * settings.tol * (1.0 + max_norm(&mapped)),
                "affine equivariance violated for {name}"
            );
        }
    }

    #[test]
    fn quadratic_invariant_is_conserved_over_many_steps() {
        // Skew field with F = |y|^2: drift stays within n * 10 * tol.
        let settings = SolverSettings::default();
        let t = builtin_tableau("gauss2").unwrap();
        let f = FnField {
            dim: 2,
            f: |y: &[f64]| vec![-1.3 * y[1], 1.3 * y[0]],
        };
        let mut y = vec![1.0, 0.25];
        let f0 = y[0] * y[0] + y[1] * y[1];
        let n_steps = 200;
        let mut integ = RkIntegrator::new(&t, settings);
        for _ in 0..n_steps {
            y = integ.step(&f, &y, 0.05).unwrap().y1;
        }
        let drift = (y[0] * y[0] + y[1] * y[1] - f0).abs();
        assert!(
            drift <= n_steps as f64 * 10.0 * settings.tol,
            "invariant drift {drift}"
        );
    }

    #[test]
    fn midpoint_observed_order_two_on_nonlinear_problem() {
        // y' = y^2, y(0) = 1, exact solution 1/(1-t).
        let t = builtin_tableau("midpoint").unwrap();
        let f = scalar_field(|y| y * y);
        let settings = SolverSettings::default();
        let t_end = 0.4;
        let mut errors = Vec::new();
        for level in 0..5 {
            let h = 0.04 / f64::powi(2.0, level);
            let steps = (t_end / h).round() as usize;
            let mut integ = RkIntegrator::new(&t, settings);
            let mut y = vec![1.0];
            for _ in 0..steps {
                y = integ.step(&f, &y, h).unwrap().y1;
            }
            errors.push((y[0] - 1.0 / (1.0 - t_end)).abs());
        }
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (order - 2.0).abs() <= 0.1,
                "midpoint observed order {order}, errors {errors:?}"
            );
        }
    }

    #[test]
    fn gauss2_observed_order_four() {
        // Coefficient oracle for the built-in Gauss tableau: fourth-order
        // convergence on y' = sin(y), whose solution is
        // y(t) = 2 atan(tan(y0/2) e^t). (A Riccati right-hand side would
        // superconverge here and mask a coefficient error.)
        let t = builtin_tableau("gauss2").unwrap();
        let f = scalar_field(f64::sin);
        let settings = SolverSettings::default();
        let t_end = 0.8f64;
        let y0 = 1.0f64;
        let exact = 2.0 * ((y0 / 2.0).tan() * t_end.exp()).atan();
        let mut errors = Vec::new();
        for level in 0..4 {
            let h = 0.1 / f64::powi(2.0, level);
            let steps = (t_end / h).round() as usize;
            let mut integ = RkIntegrator::new(&t, settings);
            let mut y = vec![y0];
            for _ in 0..steps {
                y = integ.step(&f, &y, h).unwrap().y1;
            }
            errors.push((y[0] - exact).abs());
        }
        for w in errors.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (order - 4.0).abs() <= 0.3,
                "gauss2 observed order {order}, errors {errors:?}"
            );
        }
    }

    #[test]
    fn stage_permutation_does_not_change_the_step() {
        // A permuted SyDIRK tableau is the same method; the sequential path
        // must recover the stage order and produce the same step.
        let t = make_sydirk(&[0.3, 0.7]).unwrap();
        let swapped = t.permuted(&[1, 0]);
        let f = scalar_field(|y| (1.3 * y).sin() + 0.2);
        let settings = SolverSettings::default();
        let a = rk_step(&t, &f, &[0.8], 0.05, &settings).unwrap();
        let b = rk_step(&swapped, &f, &[0.8], 0.05, &settings).unwrap();
        assert!((a.y1[0] - b.y1[0]).abs() <= 1e-14);
        // Stage values correspond through the swap.
        assert!((a.stages[0][0] - b.stages[1][0]).abs() <= 1e-13);
        assert!((a.stages[1][0] - b.stages[0][0]).abs() <= 1e-13);
    }

    #[test]
    fn warm_start_reduces_iterations() {
        let t = make_sydirk(&[0.5, 0.5]).unwrap();
        let f = scalar_field(|y| (y * 1.7).sin());
        let settings = SolverSettings::default();
        let cold = rk_step(&t, &f, &[0.9], 0.1, &settings).unwrap();
        let warm = rk_step_with_guess(&t, &f, &[0.9], 0.1, &settings, Some(&cold.stages)).unwrap();
        assert!(warm.iters <= cold.iters);
    }
}
