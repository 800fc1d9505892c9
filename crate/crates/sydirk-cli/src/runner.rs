//! Trajectory and convergence drivers with streaming-friendly CSV output.

use crate::config::{ConvergenceConfig, Mode, RunConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sydirk::convergence::{richardson_ladder, ConvergenceStudy};
use sydirk::descent::descend_step_with_guess;
use sydirk::error::Error;
use sydirk::rk::{rk_step_with_guess, RkIntegrator};
use sydirk::solver::max_diff;
use sydirk::systems::{FullField, ProjectableSystem};
use sydirk::tableau::{make_sydirk, ButcherTableau};

pub struct Row {
    pub step: usize,
    pub t: f64,
    pub diagnostics: Vec<f64>,
    pub stage_iters_max: usize,
    pub dev: Option<f64>,
    pub state: Option<Vec<f64>>,
}

pub struct RunOutcome {
    pub diag_names: Vec<String>,
    pub has_dev: bool,
    pub state_dim: Option<usize>,
    pub rows: Vec<Row>,
    /// Error that aborted the run, if any; rows up to the failing step are
    /// kept.
    pub abort: Option<Error>,
}

pub fn run_trajectory(
    cfg: &RunConfig,
    sys: &dyn ProjectableSystem,
    tableau: &ButcherTableau,
    weights: Option<&[f64]>,
) -> RunOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.mode {
        Mode::Descended => {
            let b = weights.expect("validated by weights_for_mode");
            let z0 = sys.sample_z(&mut rng);
            descended_loop(cfg, sys, b, &z0)
        }
        Mode::Full => {
            let y0 = sys.sample_trajectory_y(&mut rng);
            full_loop(cfg, sys, tableau, &y0)
        }
        Mode::Both => {
            let b = weights.expect("validated by weights_for_mode");
            let y0 = sys.sample_trajectory_y(&mut rng);
            both_loop(cfg, sys, b, &y0)
        }
    }
}

fn descended_loop(
    cfg: &RunConfig,
    sys: &dyn ProjectableSystem,
    b: &[f64],
    z0: &[f64],
) -> RunOutcome {
    let mut out = outcome_shell(cfg, sys, false);
    let mut z = z0.to_vec();
    push_row(&mut out, cfg, 0, 0.0, sys.diagnostics(&z), 0, None, &z);
    let mut warm: Option<Vec<Vec<f64>>> = None;
    for step in 0..cfg.steps {
        match descend_step_with_guess(b, sys, &z, cfg.h, &cfg.solver, warm.as_deref()) {
            Ok(rec) => {
                z = rec.z1.clone();
                let iters = rec.iters.iter().copied().max().unwrap_or(0);
                push_row(
                    &mut out,
                    cfg,
                    step + 1,
                    cfg.h * (step + 1) as f64,
                    sys.diagnostics(&z),
                    iters,
                    None,
                    &z,
                );
                warm = Some(rec.stages);
            }
            Err(e) => {
                out.abort = Some(e.at_step(step));
                break;
            }
        }
    }
    out
}

fn full_loop(
    cfg: &RunConfig,
    sys: &dyn ProjectableSystem,
    tableau: &ButcherTableau,
    y0: &[f64],
) -> RunOutcome {
    let mut out = outcome_shell(cfg, sys, false);
    let field = FullField(sys);
    let mut integrator = RkIntegrator::new(tableau, cfg.solver);
    let mut y = y0.to_vec();
    let z = sys.map(&y);
    push_row(&mut out, cfg, 0, 0.0, sys.diagnostics(&z), 0, None, &z);
    for step in 0..cfg.steps {
        match integrator.step(&field, &y, cfg.h) {
            Ok(rec) => {
                y = rec.y1;
                let z = sys.map(&y);
                push_row(
                    &mut out,
                    cfg,
                    step + 1,
                    cfg.h * (step + 1) as f64,
                    sys.diagnostics(&z),
                    rec.iters,
                    None,
                    &z,
                );
            }
            Err(e) => {
                out.abort = Some(e.at_step(step));
                break;
            }
        }
    }
    out
}

fn both_loop(cfg: &RunConfig, sys: &dyn ProjectableSystem, b: &[f64], y0: &[f64]) -> RunOutcome {
    let mut out = outcome_shell(cfg, sys, true);
    let tableau = make_sydirk(b).expect("weights validated earlier");
    let field = FullField(sys);
    let mut y = y0.to_vec();
    let mut z = sys.map(&y);
    push_row(&mut out, cfg, 0, 0.0, sys.diagnostics(&z), 0, Some(0.0), &z);
    let mut warm_y: Option<Vec<Vec<f64>>> = None;
    let mut warm_z: Option<Vec<Vec<f64>>> = None;
    for step in 0..cfg.steps {
        let full =
            match rk_step_with_guess(&tableau, &field, &y, cfg.h, &cfg.solver, warm_y.as_deref()) {
                Ok(rec) => rec,
                Err(e) => {
                    out.abort = Some(e.at_step(step));
                    break;
                }
            };
        let reduced =
            match descend_step_with_guess(b, sys, &z, cfg.h, &cfg.solver, warm_z.as_deref()) {
                Ok(rec) => rec,
                Err(e) => {
                    out.abort = Some(e.at_step(step));
                    break;
                }
            };
        // Deviation covers stages and the step; written only when both
        // sides of this step have converged.
        let mut dev = 0.0f64;
        for (yi, zi) in full.stages.iter().zip(reduced.stages.iter()) {
            dev = dev.max(max_diff(&sys.map(yi), zi));
        }
        dev = dev.max(max_diff(&sys.map(&full.y1), &reduced.z1));
        y = full.y1;
        z = reduced.z1.clone();
        let iters = reduced
            .iters
            .iter()
            .copied()
            .max()
            .unwrap_or(0)
            .max(full.iters);
        push_row(
            &mut out,
            cfg,
            step + 1,
            cfg.h * (step + 1) as f64,
            sys.diagnostics(&z),
            iters,
            Some(dev),
            &z,
        );
        warm_y = Some(full.stages);
        warm_z = Some(reduced.stages);
    }
    out
}

fn outcome_shell(cfg: &RunConfig, sys: &dyn ProjectableSystem, has_dev: bool) -> RunOutcome {
    RunOutcome {
        diag_names: sys.diagnostic_names(),
        has_dev,
        state_dim: cfg.dump_states.then_some(sys.dim_z()),
        rows: Vec::with_capacity(cfg.steps + 1),
        abort: None,
    }
}

#[allow(clippy::too_many_arguments)]
fn push_row(
    out: &mut RunOutcome,
    cfg: &RunConfig,
    step: usize,
    t: f64,
    diagnostics: Vec<f64>,
    stage_iters_max: usize,
    dev: Option<f64>,
    state: &[f64],
) {
    out.rows.push(Row {
        step,
        t,
        diagnostics,
        stage_iters_max,
        dev,
        state: cfg.dump_states.then(|| state.to_vec()),
    });
}

/// All numbers are printed at 17 significant digits so reruns are
/// byte-identical and values round-trip exactly.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(out: &RunOutcome, w: &mut impl std::io::Write) -> std::io::Result<()> {
    let mut header: Vec<String> = vec!["step".into(), "t".into()];
    header.extend(out.diag_names.iter().cloned());
    header.push("stage_iters_max".into());
    if out.has_dev {
        header.push("dev".into());
    }
    if let Some(dim) = out.state_dim {
        for k in 0..dim {
            header.push(format!("z{k}"));
        }
    }
    writeln!(w, "{}", header.join(","))?;
    for row in &out.rows {
        let mut fields: Vec<String> = vec![row.step.to_string(), format_value(row.t)];
        fields.extend(row.diagnostics.iter().map(|v| format_value(*v)));
        fields.push(row.stage_iters_max.to_string());
        if out.has_dev {
            fields.push(format_value(row.dev.unwrap_or(f64::NAN)));
        }
        if let Some(state) = &row.state {
            fields.extend(state.iter().map(|v| format_value(*v)));
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    if let Some(abort) = &out.abort {
        let step = abort.step().unwrap_or(0);
        writeln!(w, "# aborted at step {step}")?;
    }
    Ok(())
}

pub struct ConvergenceOutcome {
    pub study: ConvergenceStudy,
}

pub fn run_convergence(
    cfg: &ConvergenceConfig,
    sys: &dyn ProjectableSystem,
    tableau: &ButcherTableau,
    weights: Option<&[f64]>,
) -> Result<ConvergenceOutcome, Error> {
    let steps0 = (cfg.t_end / cfg.h0).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let study = match cfg.mode {
        Mode::Full => {
            let y0 = sys.sample_trajectory_y(&mut rng);
            let field = FullField(sys);
            let mut propagate = |h: f64, steps: usize| {
                let mut integrator = RkIntegrator::new(tableau, cfg.solver);
                let mut y = y0.clone();
                for _ in 0..steps {
                    y = integrator.step(&field, &y, h)?.y1;
                }
                Ok(sys.map(&y))
            };
            richardson_ladder(&mut propagate, cfg.h0, steps0, cfg.levels)?
        }
        Mode::Descended | Mode::Both => {
            let b = weights.expect("validated by weights_for_mode").to_vec();
            let z0 = sys.sample_z(&mut rng);
            let mut propagate = |h: f64, steps: usize| {
                let mut z = z0.clone();
                let mut warm: Option<Vec<Vec<f64>>> = None;
                for _ in 0..steps {
                    let rec =
                        descend_step_with_guess(&b, sys, &z, h, &cfg.solver, warm.as_deref())?;
                    z = rec.z1;
                    warm = Some(rec.stages);
                }
                Ok(z)
            };
            richardson_ladder(&mut propagate, cfg.h0, steps0, cfg.levels)?
        }
    };
    Ok(ConvergenceOutcome { study })
}

pub fn write_convergence(
    out: &ConvergenceOutcome,
    w: &mut impl std::io::Write,
) -> std::io::Result<()> {
    writeln!(
        w,
        "observed order (mean over levels): {:.3}",
        out.study.observed_order
    )?;
    for row in &out.study.rows {
        match row.order {
            Some(o) => writeln!(
                w,
                "level {}: h = {:.6e}, error = {:.6e}, order = {o:.3}",
                row.level, row.h, row.error
            )?,
            None => writeln!(
                w,
                "level {}: h = {:.6e}, error = {:.6e}",
                row.level, row.h, row.error
            )?,
        }
    }
    writeln!(w, "level,h,error,order")?;
    for row in &out.study.rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.level,
            format_value(row.h),
            format_value(row.error),
            row.order.map(format_value).unwrap_or_default()
        )?;
    }
    Ok(())
}
