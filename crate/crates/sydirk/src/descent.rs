//! The reduced integrator on the projected space: stage equations driven by
//! the fields `g` and `gamma` alone, trajectory recording, the cubic-order
//! quadratic-observable identity, and the Cayley-factored stage form for
//! matrix Lie-Poisson flows.

use crate::algebra::cmatrix::CMatrix;
use crate::error::{Error, Result};
use crate::quadmap::QuadraticMap;
use crate::solver::{max_diff, max_norm, solve_fixed_point, SolverSettings};

/// Flow data on the projected space: the projected field `g` and the
/// quadratic-correction field `gamma`.
pub trait ReducedFlow {
    fn dim_z(&self) -> usize;
    fn g(&self, z: &[f64]) -> Result<Vec<f64>>;
    fn gamma(&self, z: &[f64]) -> Result<Vec<f64>>;

    /// Both fields at once; matrix flows override this to share one
    /// eigenbasis splitting per evaluation.
    fn g_gamma(&self, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.g(z)?, self.gamma(z)?))
    }

    /// Named scalar diagnostics of a state, in schema order.
    fn diagnostic_names(&self) -> Vec<String> {
        Vec::new()
    }
    fn diagnostics(&self, _z: &[f64]) -> Vec<f64> {
        Vec::new()
    }
}

/// Closure-backed reduced flow.
pub struct ReducedSystem<G, C>
where
    G: Fn(&[f64]) -> Vec<f64>,
    C: Fn(&[f64]) -> Vec<f64>,
{
    pub dim_z: usize,
    pub g: G,
    pub gamma: C,
}

impl<G, C> ReducedFlow for ReducedSystem<G, C>
where
    G: Fn(&[f64]) -> Vec<f64>,
    C: Fn(&[f64]) -> Vec<f64>,
{
    fn dim_z(&self) -> usize {
        self.dim_z
    }
    fn g(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok((self.g)(z))
    }
    fn gamma(&self, z: &[f64]) -> Result<Vec<f64>> {
        Ok((self.gamma)(z))
    }
}

#[derive(Debug, Clone)]
pub struct DescentStepRecord {
    pub z1: Vec<f64>,
    pub stages: Vec<Vec<f64>>,
    /// Running partial sums `z0 + h sum_{j<=i} b_j g(Z_j)`; the first entry is
    /// `z0` and the last is `z1` exactly as computed.
    pub r_stages: Vec<Vec<f64>>,
    pub iters: Vec<usize>,
}

/// One step of the descended method:
/// `Z_i = z0 + h sum_{j<i} b_j g(Z_j) + (h/2) b_i g(Z_i) - (h^2/8) b_i^2 gamma(Z_i)`,
/// `z1 = z0 + h sum_i b_i g(Z_i)`, stages solved sequentially.
pub fn descend_step(
    b: &[f64],
    sys: &dyn ReducedFlow,
    z0: &[f64],
    h: f64,
    settings: &SolverSettings,
) -> Result<DescentStepRecord> {
    descend_step_with_guess(b, sys, z0, h, settings, None)
}

/// [`descend_step`] with per-stage initial guesses for warm-starting.
pub fn descend_step_with_guess(
    b: &[f64],
    sys: &dyn ReducedFlow,
    z0: &[f64],
    h: f64,
    settings: &SolverSettings,
    guess: Option<&[Vec<f64>]>,
) -> Result<DescentStepRecord> {
    settings.validate()?;
    for (index, &w) in b.iter().enumerate() {
        if w == 0.0 {
            return Err(Error::ZeroWeight { index });
        }
    }
    if sys.dim_z() != z0.len() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim_z(),
            got: z0.len(),
        });
    }
    let n = z0.len();
    let s = b.len();
    let mut stages = Vec::with_capacity(s);
    let mut iters = Vec::with_capacity(s);
    let mut r_stages = Vec::with_capacity(s + 1);
    r_stages.push(z0.to_vec());
    let mut running = z0.to_vec();

    for i in 0..s {
        let bi = b[i];
        let base = running.clone();
        let mut phi = |z: &[f64]| {
            let (gz, cz) = sys.g_gamma(z)?;
            let mut out = base.clone();
            for k in 0..n {
                out[k] += 0.5 * h * bi * gz[k] - 0.125 * h * h * bi * bi * cz[k];
            }
            Ok(out)
        };
        let start: Vec<f64> = match guess {
            Some(g) => g[i].clone(),
            None => running.clone(),
        };
        let (zi, used) = solve_fixed_point(&mut phi, &start, settings, i)?;
        let gz = sys.g(&zi)?;
        for k in 0..n {
            running[k] += h * bi * gz[k];
        }
        r_stages.push(running.clone());
        stages.push(zi);
        iters.push(used);
    }

    Ok(DescentStepRecord {
        z1: running,
        stages,
        r_stages,
        iters,
    })
}

/// State and diagnostics history of a trajectory; one row per step plus the
/// initial state.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Option<Vec<Vec<f64>>>,
    pub diag_names: Vec<String>,
    pub diagnostics: Vec<Vec<f64>>,
    /// Largest per-stage iteration count in each step; zero for the initial
    /// row.
    pub stage_iters_max: Vec<usize>,
    /// Full-space/reduced deviation per row when running in comparison mode.
    pub devs: Option<Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn rows(&self) -> usize {
        self.times.len()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrajectoryOptions {
    pub record_states: bool,
}

/// Repeat [`descend_step`] `n_steps` times, recording the system diagnostics
/// along the way. Stage guesses are warm-started from the previous step.
pub fn descend_trajectory(
    b: &[f64],
    sys: &dyn ReducedFlow,
    z0: &[f64],
    h: f64,
    n_steps: usize,
    settings: &SolverSettings,
    options: TrajectoryOptions,
) -> Result<TrajectoryRecord> {
    let mut record = TrajectoryRecord {
        times: vec![0.0],
        states: options.record_states.then(|| vec![z0.to_vec()]),
        diag_names: sys.diagnostic_names(),
        diagnostics: vec![sys.diagnostics(z0)],
        stage_iters_max: vec![0],
        devs: None,
    };
    let mut z = z0.to_vec();
    let mut prev_stages: Option<Vec<Vec<f64>>> = None;
    for step in 0..n_steps {
        let out = descend_step_with_guess(b, sys, &z, h, settings, prev_stages.as_deref())
            .map_err(|e| e.at_step(step))?;
        z = out.z1.clone();
        record.times.push(h * (step + 1) as f64);
        record.diagnostics.push(sys.diagnostics(&z));
        record
            .stage_iters_max
            .push(out.iters.iter().copied().max().unwrap_or(0));
        if let Some(states) = &mut record.states {
            states.push(z.clone());
        }
        prev_stages = Some(out.stages);
    }
    Ok(record)
}

/// Max-norm residual of the quadratic-observable identity along one step:
/// `G(z1) = G(z0) + h sum b_i G'(Z_i) g(Z_i) + (h^3/8) sum b_i^3 G''(g(Z_i), gamma(Z_i))`.
pub fn theorem4_check(
    b: &[f64],
    sys: &dyn ReducedFlow,
    observable: &QuadraticMap,
    z0: &[f64],
    h: f64,
    settings: &SolverSettings,
) -> Result<f64> {
    let step = descend_step(b, sys, z0, h, settings)?;
    let mut rhs = observable.eval(z0);
    for (i, zi) in step.stages.iter().enumerate() {
        let (gz, cz) = sys.g_gamma(zi)?;
        let linear = observable.prime(zi, &gz);
        let cubic = observable.second(&gz, &cz);
        let bi = b[i];
        for k in 0..rhs.len() {
            rhs[k] += h * bi * linear[k] + 0.125 * h * h * h * bi * bi * bi * cubic[k];
        }
    }
    let lhs = observable.eval(&step.z1);
    Ok(max_diff(&lhs, &rhs))
}

/// A matrix Lie-Poisson flow exposing its Hamiltonian gradient; the stage
/// equations can then be factored through the Cayley transform.
pub trait LiePoissonMatrix {
    fn n(&self) -> usize;
    fn grad_eta(&self, z: &CMatrix) -> CMatrix;
}

#[derive(Debug, Clone)]
pub struct DcayStepRecord {
    pub z1: CMatrix,
    pub stages: Vec<CMatrix>,
    pub r_stages: Vec<CMatrix>,
    pub iters: Vec<usize>,
}

/// One step in the Cayley-factored form: each stage solves
/// `Zr_{i-1} = (I - rho) Z_i (I + rho)` with `rho = (h/2) b_i grad_eta(Z_i)^dagger`,
/// then advances `Zr_i = (I + rho) Z_i (I - rho)`. Each update is a
/// similarity transform, so the spectrum of `Zr_i` is exactly preserved.
pub fn dcay_step(
    b: &[f64],
    sys: &dyn LiePoissonMatrix,
    z0: &CMatrix,
    h: f64,
    settings: &SolverSettings,
) -> Result<DcayStepRecord> {
    settings.validate()?;
    for (index, &w) in b.iter().enumerate() {
        if w == 0.0 {
            return Err(Error::ZeroWeight { index });
        }
    }
    let n = sys.n();
    if z0.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: z0.n,
        });
    }
    let id = CMatrix::identity(n);
    let mut zr = z0.clone();
    let mut stages = Vec::with_capacity(b.len());
    let mut r_stages = vec![z0.clone()];
    let mut iters = Vec::with_capacity(b.len());

    for (i, &bi) in b.iter().enumerate() {
        let zr_now = zr.clone();
        let mut phi = |flat: &[f64]| {
            let z = CMatrix::decode(n, flat);
            let rho = sys.grad_eta(&z).dagger().scale_re(0.5 * h * bi);
            let minus = &id - &rho;
            let plus = &id + &rho;
            // Z <- (I - rho)^-1 Zr (I + rho)^-1, via two solves.
            let left = minus
                .solve(&zr_now)
                .map_err(|_| Error::SingularFactor { stage: i })?;
            let full = plus
                .dagger()
                .solve(&left.dagger())
                .map_err(|_| Error::SingularFactor { stage: i })?
                .dagger();
            let mut out = Vec::with_capacity(2 * n * n);
            full.encode(&mut out);
            Ok(out)
        };
        let mut start = Vec::with_capacity(2 * n * n);
        zr.encode(&mut start);
        let (flat, used) = solve_fixed_point(&mut phi, &start, settings, i)?;
        let zi = CMatrix::decode(n, &flat);
        let rho = sys.grad_eta(&zi).dagger().scale_re(0.5 * h * bi);
        let plus = &id + &rho;
        let minus = &id - &rho;
        zr = &(&plus * &zi) * &minus;
        stages.push(zi);
        r_stages.push(zr.clone());
        iters.push(used);
    }

    Ok(DcayStepRecord {
        z1: zr,
        stages,
        r_stages,
        iters,
    })
}

/// Relative max-norm deviation used by the comparison utilities.
pub fn relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    max_diff(a, b) / (1.0 + max_norm(b))
}
