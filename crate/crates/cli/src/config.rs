//! Flat `key = value` experiment configuration.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("unknown key `{key}` for experiment {experiment}")]
    UnknownKey { key: String, experiment: Experiment },
    #[error("bad value for `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BpsEnergy,
    BogomolnyiResidual,
    InequalityAudit,
    Quantization,
    RecoveryGamma,
    LiminfCells,
    Slices,
    Plateau,
    ThetaMonopole,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::BpsEnergy,
        Experiment::BogomolnyiResidual,
        Experiment::InequalityAudit,
        Experiment::Quantization,
        Experiment::RecoveryGamma,
        Experiment::LiminfCells,
        Experiment::Slices,
        Experiment::Plateau,
        Experiment::ThetaMonopole,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::BpsEnergy => "bps-energy",
            Experiment::BogomolnyiResidual => "bogomolnyi-residual",
            Experiment::InequalityAudit => "inequality-audit",
            Experiment::Quantization => "quantization",
            Experiment::RecoveryGamma => "recovery-gamma",
            Experiment::LiminfCells => "liminf-cells",
            Experiment::Slices => "slices",
            Experiment::Plateau => "plateau",
            Experiment::ThetaMonopole => "theta-monopole",
        }
    }

    /// Defaults: `(dim, half, h, ladder, fixture, params, tolerances)`.
    fn defaults(self) -> Defaults {
        use Experiment::*;
        let d = |dim, half, h, eps: &[f64], fixture: &str, params: &[(&str, f64)], tol: &[(&str, f64)]| Defaults {
            dim,
            half,
            h,
            ladder: eps.to_vec(),
            fixture: fixture.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            tolerances: tol.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        };
        match self {
            BpsEnergy => d(3, 10.0, 0.125, &[1.0], "bps", &[("radius", 50.0)], &[("box", 0.01), ("radial", 1e-6)]),
            BogomolnyiResidual => {
                d(3, 3.0, 0.1, &[1.0], "bps", &[], &[("analytic", 1e-8), ("order_lo", 3.5), ("order_hi", 4.5)])
            }
            InequalityAudit => d(3, 1.0, 0.1, &[1.0], "random", &[("samples", 100.0)], &[("violations", 0.0)]),
            Quantization => d(
                3,
                4.0,
                0.1,
                &[1.0],
                "bps",
                &[("level", 5.0), ("r1", 1.5), ("r2", 3.0), ("r3", 5.0)],
                &[("residual", 0.05)],
            ),
            RecoveryGamma => d(
                3,
                2.0,
                0.05,
                &[0.2, 0.1, 0.05],
                "dipole",
                &[("delta_exponent", 0.5), ("delta_scale", 1.0), ("c_small", 0.5), ("c_big", 2.0)],
                &[("final", 0.15), ("exponent", 1.8)],
            ),
            LiminfCells => d(
                3,
                2.0,
                0.05,
                &[0.2, 0.1, 0.05],
                "dipole",
                &[
                    ("delta_exponent", 0.5),
                    ("delta_scale", 1.0),
                    ("c_small", 0.5),
                    ("c_big", 2.0),
                    ("ell", 1.0),
                    ("offset_x", 0.0),
                    ("offset_y", 0.5),
                    ("offset_z", 0.5),
                ],
                &[("gap", 0.1), ("charge", 0.1), ("other", 0.5)],
            ),
            Slices => d(4, 0.0, 0.25, &[1.0], "bps", &[("nodes_xyz", 24.0), ("nodes_w", 12.0)], &[("roundoff", 1e-12), ("fubini", 0.02)]),
            Plateau => d(
                3,
                1.0,
                0.05,
                &[0.1],
                "reduction",
                &[("noise", 0.1), ("max_iter", 3000.0), ("audit_perturbation", 0.05)],
                &[("energy", 0.25), ("atom", 0.15), ("gradient", 1e-5)],
            ),
            ThetaMonopole => d(3, 4.0, 0.1, &[1.0], "bps", &[], &[("gap", 0.01), ("order_lo", 3.0), ("order_hi", 5.0)]),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| ConfigError::UnknownExperiment(s.into()))
    }
}

struct Defaults {
    dim: usize,
    half: f64,
    h: f64,
    ladder: Vec<f64>,
    fixture: String,
    params: BTreeMap<String, f64>,
    tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    /// Half-width of the cubic box `[-half, half]^dim`.
    pub half: f64,
    pub h: f64,
    /// Strictly decreasing coupling ladder.
    pub ladder: Vec<f64>,
    pub fixture: String,
    pub seed: u64,
    pub out: PathBuf,
    pub params: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax { line: i + 1 });
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn number<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| ConfigError::Value { key: key.into(), msg: format!("`{v}` is not a number") })
}

impl ExperimentConfig {
    /// Defaults of `experiment`, then `pairs` in order (later entries win).
    pub fn build(experiment: Experiment, pairs: &[(String, String)], out: PathBuf) -> Result<Self, ConfigError> {
        let d = experiment.defaults();
        let mut c = ExperimentConfig {
            experiment,
            dim: d.dim,
            half: d.half,
            h: d.h,
            ladder: d.ladder,
            fixture: d.fixture,
            seed: 0,
            out,
            params: d.params,
            tolerances: d.tolerances,
        };
        for (k, v) in pairs {
            match k.as_str() {
                "experiment" => {
                    let e: Experiment = v.parse()?;
                    if e != experiment {
                        return Err(ConfigError::Invalid(format!("config names experiment {e}, command line {experiment}")));
                    }
                }
                "dim" => c.dim = number(k, v)?,
                "half" => c.half = number(k, v)?,
                "h" => c.h = number(k, v)?,
                "seed" => c.seed = number(k, v)?,
                "fixture" => c.fixture = v.clone(),
                "eps" => {
                    c.ladder = v.split(',').map(|s| number(k, s.trim())).collect::<Result<_, _>>()?;
                }
                _ => {
                    if let Some(t) = k.strip_prefix("tol.") {
                        if !c.tolerances.contains_key(t) {
                            return Err(ConfigError::UnknownKey { key: k.clone(), experiment });
                        }
                        c.tolerances.insert(t.to_string(), number(k, v)?);
                    } else if c.params.contains_key(k) {
                        c.params.insert(k.clone(), number(k, v)?);
                    } else {
                        return Err(ConfigError::UnknownKey { key: k.clone(), experiment });
                    }
                }
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ladder.is_empty() {
            return Err(ConfigError::Invalid("empty epsilon ladder".into()));
        }
        if self.ladder.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(ConfigError::Invalid("epsilon values must be positive".into()));
        }
        if self.ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ConfigError::Invalid(format!("epsilon ladder must be strictly decreasing: {:?}", self.ladder)));
        }
        if !(self.h > 0.0) || !(self.half >= 0.0) {
            return Err(ConfigError::Invalid("grid spacing must be positive and half-width non-negative".into()));
        }
        if !(3..=4).contains(&self.dim) {
            return Err(ConfigError::Invalid(format!("dimension must be 3 or 4, got {}", self.dim)));
        }
        if let Some((k, _)) = self.tolerances.iter().find(|(_, v)| !(**v >= 0.0)) {
            return Err(ConfigError::Invalid(format!("tolerance `{k}` must be non-negative")));
        }
        Ok(())
    }

    pub fn param(&self, key: &str) -> f64 {
        self.params[key]
    }

    pub fn tol(&self, key: &str) -> f64 {
        self.tolerances[key]
    }

    /// Canonical text form; the output directory is not part of it.
    pub fn canonical(&self) -> String {
        let mut s = format!(
            "experiment = {}\ndim = {}\nhalf = {:?}\nh = {:?}\neps = {}\nfixture = {}\nseed = {}\n",
            self.experiment,
            self.dim,
            self.half,
            self.h,
            self.ladder.iter().map(|e| format!("{e:?}")).collect::<Vec<_>>().join(", "),
            self.fixture,
            self.seed
        );
        for (k, v) in &self.params {
            s += &format!("{k} = {v:?}\n");
        }
        for (k, v) in &self.tolerances {
            s += &format!("tol.{k} = {v:?}\n");
        }
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
