//! Scenario files: TOML with a fixed key set, parsed into core types.

use std::path::Path;

use gaussflow::flow::{monotone_tau_bound, FlowConfig, Integrator};
use gaussflow::symlin::{Matrix, SymMat};
use gaussflow::{Epsilon, Gaussian};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Off-diagonal asymmetry tolerated in covariance input.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Trajectory,
    Rates,
    LimitReport,
    OracleCheck,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    EulerCongruence,
    FactorLift,
    EigenAxis,
}

impl From<IntegratorName> for Integrator {
    fn from(n: IntegratorName) -> Self {
        match n {
            IntegratorName::EulerCongruence => Integrator::EulerCongruence,
            IntegratorName::FactorLift => Integrator::FactorLift,
            IntegratorName::EigenAxis => Integrator::EigenAxis,
        }
    }
}

/// Covariance given through its spectrum. In 2D the basis may be a rotation
/// `angle` (radians) instead of explicit columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSpec {
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cov: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Member label inside a family of related runs, e.g. `lambda_star=0.5`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    pub source: GaussianSpec,
    pub target: GaussianSpec,
    pub eps: f64,
    /// Defaults to `min(0.01, ε̃/(4λ_max(Σ⋆) + 4))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_integrator")]
    pub integrator: IntegratorName,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
}

fn default_integrator() -> IntegratorName {
    IntegratorName::EulerCongruence
}

fn default_record_every() -> usize {
    1
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Trajectory]
}

/// Fully validated scenario, ready to integrate.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub source: Gaussian,
    pub target: Gaussian,
    pub flow: FlowConfig<f64>,
}

fn cfg_err(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn square(path: &str, rows: &[Vec<f64>], d: usize) -> Result<Matrix<f64>, CliError> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(cfg_err(path, format!("expected a {d}x{d} matrix")));
    }
    Matrix::from_rows(rows).map_err(|e| cfg_err(path, e.to_string()))
}

impl GaussianSpec {
    pub fn to_gaussian(&self, path: &str) -> Result<Gaussian, CliError> {
        let d = self.mean.len();
        if d == 0 {
            return Err(cfg_err(&format!("{path}.mean"), "must not be empty"));
        }
        let cov = match (&self.cov, &self.eigen) {
            (Some(rows), None) => {
                let p = format!("{path}.cov");
                let m = square(&p, rows, d)?;
                for i in 0..d {
                    for j in 0..i {
                        let gap = (m[(i, j)] - m[(j, i)]).abs();
                        if gap > SYMMETRY_TOL * (1.0 + m[(i, j)].abs().max(m[(j, i)].abs())) {
                            return Err(cfg_err(&p, format!("not symmetric at ({i}, {j}): gap {gap:e}")));
                        }
                    }
                }
                SymMat::new(m).map_err(|e| cfg_err(&p, e.to_string()))?
            }
            (None, Some(eig)) => {
                let p = format!("{path}.eigen");
                if eig.values.len() != d {
                    return Err(cfg_err(&format!("{p}.values"), format!("expected {d} values")));
                }
                let basis = match (&eig.basis, eig.angle) {
                    (Some(_), Some(_)) => return Err(cfg_err(&p, "give either basis or angle, not both")),
                    (Some(cols), None) => {
                        let bp = format!("{p}.basis");
                        // Rows of the TOML array are basis vectors.
                        let b = square(&bp, cols, d)?.transpose();
                        let gram = &b.transpose() * &b;
                        let off = (&gram - &Matrix::identity(d)).max_abs();
                        if off > 1e-10 {
                            return Err(cfg_err(&bp, format!("vectors are not orthonormal (error {off:e})")));
                        }
                        b
                    }
                    (None, Some(theta)) => {
                        if d != 2 {
                            return Err(cfg_err(&format!("{p}.angle"), "angle is only meaningful in 2D"));
                        }
                        let (s, c) = theta.sin_cos();
                        Matrix::from_rows(&[vec![c, -s], vec![s, c]]).expect("2x2 rotation")
                    }
                    (None, None) => Matrix::identity(d),
                };
                if eig.values.iter().any(|v| !v.is_finite()) {
                    return Err(cfg_err(&format!("{p}.values"), "values must be finite"));
                }
                SymMat::from_spectrum(&basis, &eig.values)
            }
            (Some(_), Some(_)) => return Err(cfg_err(path, "give either cov or eigen, not both")),
            (None, None) => return Err(cfg_err(path, "missing cov or eigen")),
        };
        Gaussian::new(self.mean.clone(), cov).map_err(|e| cfg_err(path, e.to_string()))
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let span = e.span().map(|s| format!("bytes {}..{}", s.start, s.end)).unwrap_or_default();
            cfg_err(&span, e.message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config { path: field, message } => CliError::Config {
                path: format!("{}: {field}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    /// `name` or `name__series`, safe to use as a file stem.
    pub fn id(&self) -> String {
        let raw = match &self.series {
            Some(s) => format!("{}__{}", self.name, s),
            None => self.name.clone(),
        };
        raw.chars()
            .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
            .collect()
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }

    pub fn validate(&self) -> Result<Scenario, CliError> {
        if self.name.trim().is_empty() {
            return Err(cfg_err("name", "must not be empty"));
        }
        let source = self.source.to_gaussian("source")?;
        let target = self.target.to_gaussian("target")?;
        if source.dim() != target.dim() {
            return Err(cfg_err(
                "target.mean",
                format!("dimension {} does not match source dimension {}", target.dim(), source.dim()),
            ));
        }
        let eps = Epsilon::new(self.eps).map_err(|e| cfg_err("eps", e.to_string()))?;
        let tau = match self.tau {
            Some(t) => t,
            None => builtin_tau(eps, target.cov()).map_err(|e| cfg_err("tau", e.to_string()))?,
        };
        let flow = FlowConfig::new(eps, tau, self.t_end, self.integrator.into(), self.record_every)
            .map_err(|e| cfg_err("tau/t_end/record_every", e.to_string()))?;
        Ok(Scenario {
            config: self.clone(),
            source,
            target,
            flow,
        })
    }
}

/// Step used when a config leaves `tau` out.
pub fn builtin_tau(eps: Epsilon, target: &SymMat<f64>) -> gaussflow::Result<f64> {
    Ok(monotone_tau_bound(eps, target)?.min(0.01))
}
