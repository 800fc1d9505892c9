//! Step-halving convergence studies against a fine-grid reference run.

use crate::error::Result;
use crate::solver::max_diff;

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub error: f64,
    /// `log2(e_k / e_{k+1})` between this level and the next.
    pub order: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// Mean of the pairwise observed orders.
    pub observed_order: f64,
}

/// Run `propagate(h, steps)` on the ladder `h0, h0/2, ..` covering the fixed
/// horizon `steps0 * h0`, measuring errors against a reference at
/// `h0 / 2^(levels+2)`.
pub fn richardson_ladder(
    propagate: &mut dyn FnMut(f64, usize) -> Result<Vec<f64>>,
    h0: f64,
    steps0: usize,
    levels: usize,
) -> Result<ConvergenceStudy> {
    assert!(
        levels >= 2,
        "need at least two levels for an order estimate"
    );
    let ref_factor = 1usize << (levels + 2);
    let reference = propagate(h0 / ref_factor as f64, steps0 * ref_factor)?;

    let mut errors = Vec::with_capacity(levels);
    for level in 0..levels {
        let factor = 1usize << level;
        let state = propagate(h0 / factor as f64, steps0 * factor)?;
        errors.push(max_diff(&state, &reference));
    }

    let mut rows = Vec::with_capacity(levels);
    let mut orders = Vec::new();
    for (level, &error) in errors.iter().enumerate() {
        let order = if level + 1 < levels && errors[level + 1] > 0.0 {
            let o = (error / errors[level + 1]).log2();
            orders.push(o);
            Some(o)
        } else {
            None
        };
        rows.push(ConvergenceRow {
            level,
            h: h0 / (1usize << level) as f64,
            error,
            order,
        });
    }
    let observed_order = if orders.is_empty() {
        f64::NAN
    } else {
        orders.iter().sum::<f64>() / orders.len() as f64
    };
    Ok(ConvergenceStudy {
        rows,
        observed_order,
    })
}
