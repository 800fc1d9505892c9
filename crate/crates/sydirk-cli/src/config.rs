//! Run configuration: a single JSON document describing the system, method,
//! stepping parameters, and output.

use serde::{Deserialize, Serialize};
use sydirk::algebra::{CMatrix, Octonion};
use sydirk::systems::{
    GeneralMatrixFlow, HopfRigidBody, MatrixLiePoisson, OctonionFlow, ProjectableSystem,
    SemidirectMhd, ZeitlinNs,
};
use sydirk::tableau::{builtin_tableau, classify, ButcherTableau, TableauClass, DEFAULT_CLASS_TOL};
use sydirk::SolverSettings;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub method: MethodConfig,
    pub h: f64,
    pub steps: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub dump_states: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    #[default]
    Descended,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemConfig {
    pub name: String,
    #[serde(default)]
    pub params: SystemParams,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct SystemParams {
    pub n: Option<usize>,
    pub nu: Option<f64>,
    pub eig_tol: Option<f64>,
    pub inertia: Option<[f64; 3]>,
    /// Constant coefficient octonion for `octonion_flow`.
    pub a: Option<[f64; 8]>,
}

/// Method selection: either a named built-in tableau or explicit SyDIRK
/// weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodConfig {
    Builtin { builtin: String },
    Weights { b: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub system: SystemConfig,
    pub method: MethodConfig,
    pub h0: f64,
    pub levels: usize,
    pub t_end: f64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const SYSTEM_NAMES: &[&str] = &[
    "matrix_lie_poisson",
    "hopf_rigid_body",
    "octonion_flow",
    "semidirect_mhd",
    "zeitlin_ns",
    "general_matrix_flow",
];

pub fn build_system(cfg: &SystemConfig) -> Result<Box<dyn ProjectableSystem>, ConfigError> {
    let p = &cfg.params;
    let eig_tol = p.eig_tol.unwrap_or(sydirk::algebra::DEFAULT_EIG_TOL);
    if !(eig_tol > 0.0) {
        return Err(ConfigError("eig_tol must be positive".into()));
    }
    let sys: Box<dyn ProjectableSystem> = match cfg.name.as_str() {
        "matrix_lie_poisson" => Box::new(MatrixLiePoisson::generalized_rigid_body(check_n(
            p.n.unwrap_or(3),
        )?)),
        "hopf_rigid_body" => {
            let inertia = p.inertia.unwrap_or([1.0, 2.0, 3.0]);
            if inertia.iter().any(|i| *i <= 0.0) {
                return Err(ConfigError("inertia components must be positive".into()));
            }
            Box::new(HopfRigidBody::new(inertia))
        }
        "octonion_flow" => {
            let a = p.a.unwrap_or([-0.05, 0.4, -0.3, 0.2, 0.1, -0.2, 0.3, 0.1]);
            Box::new(OctonionFlow::constant(Octonion::from_array(a)))
        }
        "semidirect_mhd" => Box::new(SemidirectMhd::new(check_n(p.n.unwrap_or(3))?)),
        "zeitlin_ns" => {
            let nu = p.nu.unwrap_or(0.0);
            if nu < 0.0 {
                return Err(ConfigError("viscosity nu must be nonnegative".into()));
            }
            Box::new(ZeitlinNs::with_eig_tol(
                check_n(p.n.unwrap_or(8))?,
                nu,
                eig_tol,
            ))
        }
        "general_matrix_flow" => {
            let n = check_n(p.n.unwrap_or(4))?;
            let damping = p.nu.unwrap_or(0.05);
            Box::new(GeneralMatrixFlow::new(
                n,
                move |w: &CMatrix| {
                    let s =
                        CMatrix::from_fn(w.n, |i, j| w[(i, j)] * (1.0 / (1.0 + (i + j) as f64)));
                    let t = w.trace() * (1.0 / w.n as f64);
                    let damped = CMatrix::from_fn(w.n, |i, j| {
                        let centered = if i == j { w[(i, j)] - t } else { w[(i, j)] };
                        centered * -damping
                    });
                    Ok(&s.commutator(w) + &damped)
                },
                eig_tol,
            ))
        }
        other => {
            return Err(ConfigError(format!(
                "unknown system `{other}`; expected one of {SYSTEM_NAMES:?}"
            )))
        }
    };
    Ok(sys)
}

fn check_n(n: usize) -> Result<usize, ConfigError> {
    if n < 2 {
        return Err(ConfigError("matrix dimension n must be at least 2".into()));
    }
    Ok(n)
}

/// Resolve a method config to a tableau, plus the SyDIRK weights when the
/// method has them (required for the descended and comparison modes).
pub fn build_method(cfg: &MethodConfig) -> Result<(ButcherTableau, Option<Vec<f64>>), ConfigError> {
    match cfg {
        MethodConfig::Weights { b } => {
            let t = sydirk::make_sydirk(b).map_err(|e| ConfigError(e.to_string()))?;
            Ok((t, Some(b.clone())))
        }
        MethodConfig::Builtin { builtin } => {
            let t = builtin_tableau(builtin).map_err(|e| ConfigError(e.to_string()))?;
            let b = match builtin.as_str() {
                // The SyDIRK builtins expose their weight vectors directly.
                "midpoint" | "sydirk2" | "sydirk3_tj" => Some(t.b().to_vec()),
                _ => None,
            };
            Ok((t, b))
        }
    }
}

/// Load a tableau from a built-in name or a JSON document on disk.
pub fn load_tableau(spec: &str) -> Result<ButcherTableau, ConfigError> {
    if let Ok(t) = builtin_tableau(spec) {
        return Ok(t);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| {
        ConfigError(format!(
            "`{spec}` is not a built-in tableau or a readable file: {e}"
        ))
    })?;
    let doc: sydirk::TableauDoc =
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("parsing `{spec}`: {e}")))?;
    doc.to_tableau().map_err(|e| ConfigError(e.to_string()))
}

/// Validate that the chosen method supports the chosen mode.
pub fn weights_for_mode(
    mode: Mode,
    tableau: &ButcherTableau,
    weights: &Option<Vec<f64>>,
) -> Result<Option<Vec<f64>>, ConfigError> {
    match mode {
        Mode::Full => Ok(None),
        Mode::Descended | Mode::Both => match weights {
            Some(b) => Ok(Some(b.clone())),
            None => {
                let class = classify(tableau, DEFAULT_CLASS_TOL)
                    .map(|c| c.class)
                    .unwrap_or(TableauClass::General);
                Err(ConfigError(format!(
                    "mode requires a SyDIRK method (explicit weight vector or a sydirk builtin); the configured tableau classifies as {class}"
                )))
            }
        },
    }
}
