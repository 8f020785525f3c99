//! Run configuration: a flat JSON file, command-line overrides and defaults.

use serde::Serialize;
use serde_json::{Map, Value};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use thiserror::Error;

use stochfrac::kantorovich::NoiseKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Kernel,
    Caputo,
    KantorovichRates,
    VarianceScaling,
    Voronovskaya,
    MollifierRates,
    Mse,
    Burgers,
    Dissipation,
    L2,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Kernel,
        Experiment::Caputo,
        Experiment::KantorovichRates,
        Experiment::VarianceScaling,
        Experiment::Voronovskaya,
        Experiment::MollifierRates,
        Experiment::Mse,
        Experiment::Burgers,
        Experiment::Dissipation,
        Experiment::L2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Kernel => "kernel",
            Experiment::Caputo => "caputo",
            Experiment::KantorovichRates => "kantorovich_rates",
            Experiment::VarianceScaling => "variance_scaling",
            Experiment::Voronovskaya => "voronovskaya",
            Experiment::MollifierRates => "mollifier_rates",
            Experiment::Mse => "mse",
            Experiment::Burgers => "burgers",
            Experiment::Dissipation => "dissipation",
            Experiment::L2 => "l2",
        }
    }

    fn default_n_list(self) -> Vec<usize> {
        match self {
            Experiment::Caputo => vec![64, 128, 256, 512, 1024],
            Experiment::KantorovichRates | Experiment::MollifierRates | Experiment::L2 => vec![8, 16, 32, 64, 128],
            Experiment::VarianceScaling | Experiment::Mse => vec![4, 8, 16, 32],
            _ => vec![8, 16, 32, 64],
        }
    }

    fn default_points(self) -> usize {
        match self {
            Experiment::MollifierRates | Experiment::L2 => 16384,
            Experiment::Dissipation => 2048,
            Experiment::Burgers => 128,
            _ => 1024,
        }
    }

    fn default_noise(self) -> NoiseKindName {
        match self {
            Experiment::Kernel | Experiment::KantorovichRates | Experiment::Voronovskaya | Experiment::Caputo => {
                NoiseKindName::CellMultiplier
            }
            _ => NoiseKindName::WhiteNoise,
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
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKindName {
    CellMultiplier,
    WhiteNoise,
}

impl NoiseKindName {
    pub fn kind(self) -> NoiseKind {
        match self {
            NoiseKindName::CellMultiplier => NoiseKind::CellMultiplier,
            NoiseKindName::WhiteNoise => NoiseKind::WhiteNoiseMeasure,
        }
    }
}

impl FromStr for NoiseKindName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "cell_multiplier" => Ok(NoiseKindName::CellMultiplier),
            "white_noise" => Ok(NoiseKindName::WhiteNoise),
            _ => Err(ConfigError::OutOfRange {
                key: "noise_kind",
                reason: format!("expected `cell_multiplier` or `white_noise`, got `{s}`"),
            }),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed JSON config: {0}")]
    Malformed(String),
    #[error("config must be a flat JSON object")]
    NotAnObject,
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("unknown experiment `{0}`; expected one of kernel, caputo, kantorovich_rates, variance_scaling, voronovskaya, mollifier_rates, mse, burgers, dissipation, l2")]
    UnknownExperiment(String),
    #[error("config key `{key}` must be {expected}")]
    WrongType { key: &'static str, expected: &'static str },
    #[error("config key `{key}` out of range: {reason}")]
    OutOfRange { key: &'static str, reason: String },
    #[error("no experiment selected")]
    MissingExperiment,
}

/// Partially specified settings. Every field is optional so that file and
/// flag layers can be merged before defaults are applied.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub experiment: Option<Experiment>,
    pub q: Option<f64>,
    pub lambda: Option<f64>,
    pub k: Option<usize>,
    pub alpha: Option<f64>,
    pub s: Option<f64>,
    pub nu: Option<f64>,
    pub sigma_f: Option<f64>,
    pub gamma: Option<f64>,
    pub n_list: Option<Vec<usize>>,
    pub dim: Option<usize>,
    pub points: Option<usize>,
    pub steps: Option<usize>,
    pub sigma: Option<f64>,
    pub seed: Option<u64>,
    pub noise_kind: Option<NoiseKindName>,
    pub replicates: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub svg: Option<bool>,
}

fn number(key: &'static str, v: &Value) -> Result<f64, ConfigError> {
    v.as_f64().ok_or(ConfigError::WrongType {
        key,
        expected: "a number",
    })
}

fn count(key: &'static str, v: &Value) -> Result<usize, ConfigError> {
    v.as_u64().map(|x| x as usize).ok_or(ConfigError::WrongType {
        key,
        expected: "a non-negative integer",
    })
}

fn text<'a>(key: &'static str, v: &'a Value) -> Result<&'a str, ConfigError> {
    v.as_str().ok_or(ConfigError::WrongType { key, expected: "a string" })
}

impl ConfigOverrides {
    pub fn from_json_str(src: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(src).map_err(|e| ConfigError::Malformed(e.to_string()))?;
        let map = match value {
            Value::Object(m) => m,
            _ => return Err(ConfigError::NotAnObject),
        };
        Self::from_map(&map)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json_str(&src)
    }

    fn from_map(map: &Map<String, Value>) -> Result<Self, ConfigError> {
        let mut o = ConfigOverrides::default();
        for (key, v) in map {
            match key.as_str() {
                "experiment" => o.experiment = Some(text("experiment", v)?.parse()?),
                "q" => o.q = Some(number("q", v)?),
                "lambda" => o.lambda = Some(number("lambda", v)?),
                "K" => o.k = Some(count("K", v)?),
                "alpha" => o.alpha = Some(number("alpha", v)?),
                "s" => o.s = Some(number("s", v)?),
                "nu" => o.nu = Some(number("nu", v)?),
                "sigma_f" => o.sigma_f = Some(number("sigma_f", v)?),
                "gamma" => o.gamma = Some(number("gamma", v)?),
                "n_list" => {
                    let items = v.as_array().ok_or(ConfigError::WrongType {
                        key: "n_list",
                        expected: "an array of positive integers",
                    })?;
                    o.n_list = Some(items.iter().map(|x| count("n_list", x)).collect::<Result<_, _>>()?);
                }
                "dim" => o.dim = Some(count("dim", v)?),
                "points" => o.points = Some(count("points", v)?),
                "steps" => o.steps = Some(count("steps", v)?),
                "sigma" => o.sigma = Some(number("sigma", v)?),
                "seed" => {
                    o.seed = Some(v.as_u64().ok_or(ConfigError::WrongType {
                        key: "seed",
                        expected: "a 64-bit unsigned integer",
                    })?)
                }
                "noise_kind" => o.noise_kind = Some(text("noise_kind", v)?.parse()?),
                "replicates" => o.replicates = Some(count("replicates", v)?),
                "workers" => o.workers = Some(count("workers", v)?),
                "out" => o.out = Some(PathBuf::from(text("out", v)?)),
                "svg" => {
                    o.svg = Some(v.as_bool().ok_or(ConfigError::WrongType {
                        key: "svg",
                        expected: "a boolean",
                    })?)
                }
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        Ok(o)
    }

    /// Layers `over` on top of `self`; set fields in `over` win.
    pub fn merge(self, over: ConfigOverrides) -> ConfigOverrides {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigOverrides { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            experiment, q, lambda, k, alpha, s, nu, sigma_f, gamma, n_list, dim, points, steps, sigma, seed,
            noise_kind, replicates, workers, out, svg
        )
    }

    /// Applies defaults and validates every range.
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        let experiment = self.experiment.ok_or(ConfigError::MissingExperiment)?;
        let cfg = RunConfig {
            experiment,
            q: self.q.unwrap_or(1.0),
            lambda: self.lambda.unwrap_or(1.0),
            k: self.k.unwrap_or(40),
            alpha: self.alpha.unwrap_or(0.5),
            s: self.s.unwrap_or(0.75),
            nu: self.nu.unwrap_or(0.1),
            sigma_f: self.sigma_f.unwrap_or(0.1),
            gamma: self.gamma.unwrap_or(0.0),
            n_list: self.n_list.unwrap_or_else(|| experiment.default_n_list()),
            dim: self.dim.unwrap_or(1),
            points: self.points.unwrap_or_else(|| experiment.default_points()),
            steps: self.steps.unwrap_or(256),
            sigma: self.sigma.unwrap_or(0.1),
            seed: self.seed.unwrap_or(42),
            noise_kind: self.noise_kind.unwrap_or_else(|| experiment.default_noise()),
            replicates: self.replicates.unwrap_or(1000),
            workers: self.workers.unwrap_or(0),
            out: self.out.unwrap_or_else(|| PathBuf::from("out")),
            svg: self.svg.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub q: f64,
    pub lambda: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub alpha: f64,
    pub s: f64,
    pub nu: f64,
    pub sigma_f: f64,
    pub gamma: f64,
    pub n_list: Vec<usize>,
    pub dim: usize,
    pub points: usize,
    pub steps: usize,
    pub sigma: f64,
    pub seed: u64,
    pub noise_kind: NoiseKindName,
    pub replicates: usize,
    /// Worker threads; 0 uses the global pool. Results do not depend on it.
    pub workers: usize,
    pub out: PathBuf,
    pub svg: bool,
}

fn range(key: &'static str, ok: bool, reason: impl FnOnce() -> String) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange { key, reason: reason() })
    }
}

impl RunConfig {
    /// Defaults for `experiment` with nothing overridden.
    pub fn defaults(experiment: Experiment) -> RunConfig {
        ConfigOverrides {
            experiment: Some(experiment),
            ..Default::default()
        }
        .resolve()
        .expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        range("q", pos(self.q), || format!("must be positive, got {}", self.q))?;
        range("lambda", pos(self.lambda), || format!("must be positive, got {}", self.lambda))?;
        range("K", self.k >= 1, || "must be at least 1".into())?;
        range("alpha", self.alpha > 0.0 && self.alpha < 1.0, || {
            format!("must lie in (0, 1), got {}", self.alpha)
        })?;
        range("s", self.s > 0.0 && self.s <= 1.5, || format!("must lie in (0, 1.5], got {}", self.s))?;
        range("nu", pos(self.nu), || format!("must be positive, got {}", self.nu))?;
        range("sigma_f", self.sigma_f >= 0.0 && self.sigma_f.is_finite(), || {
            format!("must be non-negative, got {}", self.sigma_f)
        })?;
        range("gamma", self.gamma >= 0.0 && self.gamma.is_finite(), || {
            format!("must be non-negative, got {}", self.gamma)
        })?;
        range("sigma", self.sigma >= 0.0 && self.sigma.is_finite(), || {
            format!("must be non-negative, got {}", self.sigma)
        })?;
        range("n_list", !self.n_list.is_empty(), || "must not be empty".into())?;
        range("n_list", self.n_list[0] >= 1, || "entries must be positive".into())?;
        range("n_list", self.n_list.windows(2).all(|w| w[1] > w[0]), || {
            format!("must be strictly increasing, got {:?}", self.n_list)
        })?;
        range("dim", self.dim == 1 || self.dim == 2, || format!("must be 1 or 2, got {}", self.dim))?;
        range("points", self.points >= 8 && self.points.is_power_of_two(), || {
            format!("must be a power of two >= 8, got {}", self.points)
        })?;
        range("steps", self.steps >= 2, || format!("must be at least 2, got {}", self.steps))?;
        range("replicates", self.replicates >= 1, || "must be at least 1".into())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_takes_defaults() {
        let cfg = ConfigOverrides::from_json_str("{}")
            .unwrap()
            .merge(ConfigOverrides {
                experiment: Some(Experiment::Kernel),
                ..Default::default()
            })
            .resolve()
            .unwrap();
        assert_eq!((cfg.q, cfg.lambda, cfg.alpha, cfg.sigma), (1.0, 1.0, 0.5, 0.1));
        assert_eq!((cfg.seed, cfg.replicates, cfg.k), (42, 1000, 40));
    }

    #[test]
    fn errors_name_the_key() {
        let e = ConfigOverrides::from_json_str(r#"{"experiment": "kernel", "alpha": 1.5}"#)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(e.to_string().contains("`alpha`"));
        let e = ConfigOverrides::from_json_str(r#"{"alpah": 0.5}"#).unwrap_err();
        assert_eq!(e, ConfigError::UnknownKey("alpah".into()));
        let e = ConfigOverrides::from_json_str(r#"{"experiment": "nope"}"#).unwrap_err();
        assert_eq!(e, ConfigError::UnknownExperiment("nope".into()));
        let e = ConfigOverrides::from_json_str(r#"{"sigma": "big"}"#).unwrap_err();
        assert!(e.to_string().contains("`sigma`"));
        assert!(matches!(ConfigOverrides::from_json_str("{"), Err(ConfigError::Malformed(_))));
        assert_eq!(ConfigOverrides::from_json_str("[1]"), Err(ConfigError::NotAnObject));
        let e = ConfigOverrides::from_json_str(r#"{"experiment": "l2", "n_list": [8, 8]}"#)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(e.to_string().contains("`n_list`"));
    }

    #[test]
    fn later_layers_win() {
        let file = ConfigOverrides::from_json_str(r#"{"experiment": "mse", "sigma": 0.1, "seed": 7}"#).unwrap();
        let flags = ConfigOverrides {
            sigma: Some(0.2),
            ..Default::default()
        };
        let cfg = file.merge(flags).resolve().unwrap();
        assert_eq!(cfg.sigma, 0.2);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.experiment, Experiment::Mse);
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            assert_eq!(serde_json::to_value(e).unwrap(), Value::String(e.name().into()));
        }
    }
}
