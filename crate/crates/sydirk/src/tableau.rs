//! Butcher tableaus, the symplecticity and projectability coefficient
//! conditions, and the stage-ordering classification.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Coefficients `(a, b)` of an s-stage Runge-Kutta method. The node vector is
/// not stored; only autonomous systems are integrated.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    s: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Default tolerance for the coefficient residuals and for treating an entry
/// of `a` as structurally nonzero; one scale parameter keeps classification
/// reproducible.
pub const DEFAULT_CLASS_TOL: f64 = 1e-12;

impl ButcherTableau {
    /// Build a tableau from a row-major `a` and weights `b`.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let s = b.len();
        if a.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                got: a.len(),
            });
        }
        let mut flat = Vec::with_capacity(s * s);
        for row in &a {
            if row.len() != s {
                return Err(Error::DimensionMismatch {
                    expected: s,
                    got: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        let t = ButcherTableau { s, a: flat, b };
        if !t.a.iter().chain(t.b.iter()).all(|x| x.is_finite()) {
            return Err(Error::NonFinite {
                context: "tableau coefficients",
            });
        }
        Ok(t)
    }

    pub fn stages(&self) -> usize {
        self.s
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.s + j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Reorder stages: stage `i` of the result is stage `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> ButcherTableau {
        assert_eq!(perm.len(), self.s);
        let mut a = vec![0.0; self.s * self.s];
        for i in 0..self.s {
            for j in 0..self.s {
                a[i * self.s + j] = self.a(perm[i], perm[j]);
            }
        }
        let b = perm.iter().map(|&i| self.b[i]).collect();
        ButcherTableau { s: self.s, a, b }
    }
}

/// Build the symplectic DIRK tableau from nonzero weights:
/// `a_ij = b_j` below the diagonal, `b_i/2` on it, `0` above.
pub fn make_sydirk(b: &[f64]) -> Result<ButcherTableau> {
    for (index, &w) in b.iter().enumerate() {
        if w == 0.0 {
            return Err(Error::ZeroWeight { index });
        }
    }
    let s = b.len();
    let mut a = vec![0.0; s * s];
    for i in 0..s {
        for j in 0..i {
            a[i * s + j] = b[j];
        }
        a[i * s + i] = b[i] / 2.0;
    }
    Ok(ButcherTableau {
        s,
        a,
        b: b.to_vec(),
    })
}

/// Residual of the symplecticity condition:
/// `max_ij |b_i b_j - b_i a_ij - b_j a_ji|`.
pub fn check_symplectic(t: &ButcherTableau) -> f64 {
    let mut r = 0.0f64;
    for i in 0..t.s {
        for j in 0..t.s {
            let v = t.b[i] * t.b[j] - t.b[i] * t.a(i, j) - t.b[j] * t.a(j, i);
            r = r.max(v.abs());
        }
    }
    r
}

/// Residual of the projectability condition over all triples with `j != k`:
/// `max |a_ij a_ik - a_ij a_jk - a_ik a_kj|`.
pub fn check_projectable(t: &ButcherTableau) -> f64 {
    let mut r = 0.0f64;
    for i in 0..t.s {
        for j in 0..t.s {
            for k in 0..t.s {
                if j == k {
                    continue;
                }
                let v = t.a(i, j) * t.a(i, k) - t.a(i, j) * t.a(j, k) - t.a(i, k) * t.a(k, j);
                r = r.max(v.abs());
            }
        }
    }
    r
}

/// Residual of the projectability condition over all triples including
/// `j = k`. Any tableau driving this and the symplectic residual to zero is
/// the zero method, so the restriction to `j != k` is the meaningful one.
pub fn check_projectable_all_triples(t: &ButcherTableau) -> f64 {
    let mut r = check_projectable(t);
    for i in 0..t.s {
        for j in 0..t.s {
            let v = t.a(i, j) * t.a(i, j) - 2.0 * t.a(i, j) * t.a(j, j);
            r = r.max(v.abs());
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableauClass {
    Explicit,
    Dirk,
    SyDirk,
    General,
}

impl std::fmt::Display for TableauClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            TableauClass::Explicit => "Explicit",
            TableauClass::Dirk => "DIRK",
            TableauClass::SyDirk => "SyDIRK",
            TableauClass::General => "General",
        };
        write!(f, "{name}")
    }
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct TableauClassification {
    pub symplectic_residual: f64,
    pub projectable_residual: f64,
    /// Permutation making `a` lower-triangular, when the stage dependency
    /// relation is acyclic; stage `i` of the sorted tableau is stage
    /// `dirk_permutation[i]` of the input.
    pub dirk_permutation: Option<Vec<usize>>,
    pub class: TableauClass,
}

/// Classify a tableau at tolerance `tol`.
///
/// The relation `j < i` whenever `|a_ij| > tol` (for `i != j`) is extended to
/// a total stage order by a stable topological sort; when that succeeds the
/// permuted `a` is lower-triangular and the class is read off the permuted
/// diagonal and the coefficient residuals. A cyclic relation despite a
/// passing projectability residual reports [`Error::OrderCycle`].
pub fn classify(t: &ButcherTableau, tol: f64) -> Result<TableauClassification> {
    assert!(tol > 0.0, "classification tolerance must be positive");
    let s = t.stages();
    let symplectic_residual = check_symplectic(t);
    let projectable_residual = check_projectable(t);

    let perm = match topological_order(t, tol) {
        Ok(p) => Some(p),
        Err(cycle) => {
            if projectable_residual <= tol {
                return Err(Error::OrderCycle { cycle });
            }
            None
        }
    };

    let class = match &perm {
        None => TableauClass::General,
        Some(p) => {
            let sorted = t.permuted(p);
            let diag_zero = (0..s).all(|i| sorted.a(i, i).abs() <= tol);
            let weights_nonzero = sorted.b().iter().all(|w| w.abs() > tol);
            if symplectic_residual <= tol
                && projectable_residual <= tol
                && weights_nonzero
                && !diag_zero
            {
                TableauClass::SyDirk
            } else if diag_zero {
                TableauClass::Explicit
            } else {
                TableauClass::Dirk
            }
        }
    };

    Ok(TableauClassification {
        symplectic_residual,
        projectable_residual,
        dirk_permutation: perm,
        class,
    })
}

/// Stable topological sort of the stage dependency relation; ties broken by
/// original stage index. Returns the cycle on failure.
fn topological_order(t: &ButcherTableau, tol: f64) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let s = t.stages();
    // depends[i] holds the stages j that must precede i.
    let mut remaining: Vec<bool> = vec![true; s];
    let mut order = Vec::with_capacity(s);
    for _ in 0..s {
        let mut picked = None;
        'candidates: for i in 0..s {
            if !remaining[i] {
                continue;
            }
            for j in 0..s {
                if j != i && remaining[j] && t.a(i, j).abs() > tol {
                    continue 'candidates;
                }
            }
            picked = Some(i);
            break;
        }
        match picked {
            Some(i) => {
                remaining[i] = false;
                order.push(i);
            }
            None => {
                let cycle: Vec<usize> = (0..s).filter(|&i| remaining[i]).collect();
                return Err(cycle);
            }
        }
    }
    Ok(order)
}

/// Triple-jump composition weight `1 / (2 - 2^(1/3))`.
fn triple_jump_weights() -> [f64; 3] {
    let c = 2.0_f64.powf(1.0 / 3.0);
    let w = 1.0 / (2.0 - c);
    let v = -c / (2.0 - c);
    [w, v, w]
}

/// Named tableau catalog.
pub fn builtin_tableau(name: &str) -> Result<ButcherTableau> {
    match name {
        "midpoint" => make_sydirk(&[1.0]),
        "sydirk2" => make_sydirk(&[0.5, 0.5]),
        "sydirk3_tj" => make_sydirk(&triple_jump_weights()),
        "gauss2" => {
            let r = 3.0_f64.sqrt() / 6.0;
            ButcherTableau::new(
                vec![vec![0.25, 0.25 - r], vec![0.25 + r, 0.25]],
                vec![0.5, 0.5],
            )
        }
        "rk4" => ButcherTableau::new(
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        ),
        "euler" => ButcherTableau::new(vec![vec![0.0]], vec![1.0]),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// All built-in tableau names.
pub const BUILTIN_NAMES: &[&str] = &[
    "midpoint",
    "sydirk2",
    "sydirk3_tj",
    "gauss2",
    "rk4",
    "euler",
];

/// Serialized tableau: stage count plus row-major `a` and `b`. JSON encoding
/// of `f64` preserves the values bit-exactly on round-trip.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TableauDoc {
    pub s: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TableauDoc {
    pub fn from_tableau(t: &ButcherTableau) -> Self {
        TableauDoc {
            s: t.s,
            a: t.a.clone(),
            b: t.b.clone(),
        }
    }

    pub fn to_tableau(&self) -> Result<ButcherTableau> {
        if self.a.len() != self.s * self.s || self.b.len() != self.s {
            return Err(Error::DimensionMismatch {
                expected: self.s * self.s,
                got: self.a.len(),
            });
        }
        Ok(ButcherTableau {
            s: self.s,
            a: self.a.clone(),
            b: self.b.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn make_sydirk_examples() {
        let t = make_sydirk(&[1.0]).unwrap();
        assert_eq!(t.stages(), 1);
        assert_eq!(t.a(0, 0), 0.5);

        let t = make_sydirk(&[0.5, 0.5]).unwrap();
        assert_eq!(t.a(0, 0), 0.25);
        assert_eq!(t.a(0, 1), 0.0);
        assert_eq!(t.a(1, 0), 0.5);
        assert_eq!(t.a(1, 1), 0.25);

        assert!(matches!(
            make_sydirk(&[1.0, 0.0]),
            Err(Error::ZeroWeight { index: 1 })
        ));
    }

    #[test]
    fn symplectic_residuals() {
        assert_eq!(check_symplectic(&make_sydirk(&[1.0]).unwrap()), 0.0);
        let rk4 = builtin_tableau("rk4").unwrap();
        assert!(check_symplectic(&rk4) >= 1.0 / 36.0 - 1e-15);
        let gauss2 = builtin_tableau("gauss2").unwrap();
        assert!(check_symplectic(&gauss2) <= 1e-15);
    }

    #[test]
    fn projectable_residuals() {
        let gauss2 = builtin_tableau("gauss2").unwrap();
        assert!((check_projectable(&gauss2) - 1.0 / 48.0).abs() <= 1e-15);
        let euler = builtin_tableau("euler").unwrap();
        assert_eq!(check_projectable(&euler), 0.0);
    }

    #[test]
    fn classification_examples() {
        let c = classify(&make_sydirk(&[0.5, 0.5]).unwrap(), DEFAULT_CLASS_TOL).unwrap();
        assert_eq!(c.class, TableauClass::SyDirk);
        assert_eq!(c.dirk_permutation, Some(vec![0, 1]));

        // Swap the stages of sydirk2; the classifier must recover the swap.
        let swapped = make_sydirk(&[0.5, 0.5]).unwrap().permuted(&[1, 0]);
        let c = classify(&swapped, DEFAULT_CLASS_TOL).unwrap();
        assert_eq!(c.class, TableauClass::SyDirk);
        assert_eq!(c.dirk_permutation, Some(vec![1, 0]));

        let c = classify(&builtin_tableau("gauss2").unwrap(), DEFAULT_CLASS_TOL).unwrap();
        assert_eq!(c.class, TableauClass::General);
        assert!(c.dirk_permutation.is_none());

        let c = classify(&builtin_tableau("rk4").unwrap(), DEFAULT_CLASS_TOL).unwrap();
        assert_eq!(c.class, TableauClass::Explicit);

        let c = classify(&builtin_tableau("euler").unwrap(), DEFAULT_CLASS_TOL).unwrap();
        assert_eq!(c.class, TableauClass::Explicit);
    }

    #[test]
    fn loose_tolerance_reports_cycle() {
        // Off-diagonal pair small enough to pass a loose projectability
        // tolerance while forcing a two-cycle in the ordering relation.
        let t = ButcherTableau::new(vec![vec![0.0, 0.3], vec![0.3, 0.0]], vec![0.5, 0.5]).unwrap();
        match classify(&t, 0.2) {
            Err(Error::OrderCycle { cycle }) => assert_eq!(cycle, vec![0, 1]),
            other => panic!("expected OrderCycle, got {other:?}"),
        }
    }

    #[test]
    fn sydirk3_weights_sum_to_one() {
        let t = builtin_tableau("sydirk3_tj").unwrap();
        let sum: f64 = t.b().iter().sum();
        assert!((sum - 1.0).abs() < 1e-14);
        assert!((t.b()[0] - 1.351_207_191_959_657_8).abs() < 1e-12);
        assert!((t.b()[1] + 1.702_414_383_919_315_5).abs() < 1e-12);
    }

    #[test]
    fn unknown_builtin_name() {
        assert!(matches!(
            builtin_tableau("nope"),
            Err(Error::UnknownName(_))
        ));
    }

    /// Tableaus with constant columns below an arbitrary diagonal satisfy the
    /// projectability condition; used to fuzz the ordering lemma.
    fn generalized_dirk(rng: &mut ChaCha8Rng, s: usize) -> ButcherTableau {
        let c: Vec<f64> = (0..s).map(|_| rng.gen_range(0.2..1.0)).collect();
        let d: Vec<f64> = (0..s).map(|_| rng.gen_range(0.2..1.0)).collect();
        let mut a = vec![vec![0.0; s]; s];
        for i in 0..s {
            for j in 0..i {
                a[i][j] = c[j];
            }
            a[i][i] = d[i];
        }
        let mut perm: Vec<usize> = (0..s).collect();
        perm.shuffle(rng);
        ButcherTableau::new(a, vec![1.0 / s as f64; s])
            .unwrap()
            .permuted(&perm)
    }

    #[test]
    fn ordering_lemma_on_projectable_tableaus() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..200 {
            let s = rng.gen_range(2..=5);
            let t = generalized_dirk(&mut rng, s);
            assert!(check_projectable(&t) <= 1e-12);
            // (a) no mutual dependence
            for i in 0..s {
                for j in 0..s {
                    if i != j {
                        assert!(
                            (t.a(i, j) * t.a(j, i)).abs() <= 1e-10,
                            "antisymmetry violated"
                        );
                    }
                }
            }
            // (b) transitivity through an intermediate stage
            for i in 0..s {
                for j in 0..s {
                    for k in 0..s {
                        if j != k
                            && t.a(i, k).abs() > DEFAULT_CLASS_TOL
                            && t.a(k, j).abs() > DEFAULT_CLASS_TOL
                        {
                            assert!(t.a(i, j).abs() > DEFAULT_CLASS_TOL, "transitivity violated");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn class_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let tableaus = [
            make_sydirk(&[0.3, 0.7, -0.4]).unwrap(),
            builtin_tableau("rk4").unwrap(),
            builtin_tableau("gauss2").unwrap(),
        ];
        for t in &tableaus {
            let base = classify(t, DEFAULT_CLASS_TOL).unwrap().class;
            for _ in 0..20 {
                let mut perm: Vec<usize> = (0..t.stages()).collect();
                perm.shuffle(&mut rng);
                let c = classify(&t.permuted(&perm), DEFAULT_CLASS_TOL).unwrap();
                assert_eq!(c.class, base, "class changed under permutation {perm:?}");
            }
        }
    }

    #[test]
    fn full_triple_condition_forces_zero_method() {
        // Tableaus that satisfy the condition over all triples plus
        // symplecticity have no nonzero entries; witnesses on both sides.
        let zeroish =
            ButcherTableau::new(vec![vec![1e-13, 0.0], vec![0.0, 1e-13]], vec![1e-13, 1e-13])
                .unwrap();
        assert!(check_projectable_all_triples(&zeroish) <= 1e-12);
        assert!(check_symplectic(&zeroish) <= 1e-12);
        assert!(zeroish.b().iter().all(|w| w.abs() <= 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..200 {
            let s = rng.gen_range(1..=4);
            let a: Vec<Vec<f64>> = (0..s)
                .map(|_| (0..s).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let b: Vec<f64> = (0..s).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let t = ButcherTableau::new(a, b).unwrap();
            let all = check_projectable_all_triples(&t);
            let sympl = check_symplectic(&t);
            if all <= 1e-12 && sympl <= 1e-12 {
                let max_entry = (0..s)
                    .flat_map(|i| (0..s).map(move |j| (i, j)))
                    .map(|(i, j)| t.a(i, j).abs())
                    .fold(0.0f64, f64::max)
                    .max(t.b().iter().fold(0.0f64, |m, w| m.max(w.abs())));
                assert!(
                    max_entry <= 1e-12,
                    "nontrivial tableau passed the full condition"
                );
            }
        }
        // SyDIRK methods satisfy the restricted condition but not the full one.
        let sydirk = make_sydirk(&[0.5, 0.5]).unwrap();
        assert!(check_projectable(&sydirk) <= 1e-15);
        assert!(check_projectable_all_triples(&sydirk) > 1e-3);
    }

    proptest! {
        #[test]
        fn sydirk_satisfies_both_conditions(
            b in proptest::collection::vec(
                prop_oneof![(-2.0..-0.05f64), (0.05..2.0f64)], 1..=6
            )
        ) {
            let t = make_sydirk(&b).unwrap();
            prop_assert!(check_symplectic(&t) <= 1e-15);
            prop_assert!(check_projectable(&t) <= 1e-15);
            let c = classify(&t, DEFAULT_CLASS_TOL).unwrap();
            prop_assert_eq!(c.class, TableauClass::SyDirk);
        }

        #[test]
        fn doc_roundtrip_is_bit_exact(
            b in proptest::collection::vec(
                prop_oneof![(-2.0..-0.05f64), (0.05..2.0f64)], 1..=6
            )
        ) {
            let t = make_sydirk(&b).unwrap();
            let json = serde_json::to_string(&TableauDoc::from_tableau(&t)).unwrap();
            let doc: TableauDoc = serde_json::from_str(&json).unwrap();
            let t2 = doc.to_tableau().unwrap();
            prop_assert_eq!(t, t2);
        }
    }
}
