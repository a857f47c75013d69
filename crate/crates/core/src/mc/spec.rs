//! Experiment definitions as flat `key = value` text.
//!
//! ```text
//! # mean of yearly maxima, light tail
//! model = armax-gpd
//! gamma = 0
//! beta = 0
//! target = mean
//! r = 100
//! m = 50, 80
//! methods = disjoint, sliding, circular
//! replications = 500
//! replicates = 400
//! ```

use std::collections::BTreeMap;

use super::{ExperimentSpec, Method, Target};
use crate::boot::{Correction, CorrectionTarget};
use crate::error::{Error, Result};
use crate::sim::Model;

const KEYS: &[&str] = &[
    "model",
    "gamma",
    "alpha",
    "beta",
    "target",
    "period",
    "r",
    "m",
    "methods",
    "k",
    "replications",
    "replicates",
    "level",
    "seed",
    "correction",
];

struct Entries {
    map: BTreeMap<&'static str, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: Option<T>) -> Result<T> {
        match self.raw(key) {
            Some((line, v)) => v.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse `{v}` as the value of `{key}`"),
            }),
            None => default.ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("missing required key `{key}`"),
            }),
        }
    }

    fn list(&self, key: &str) -> Option<(usize, Vec<&str>)> {
        self.raw(key)
            .map(|(l, v)| (l, v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()))
    }
}

fn lex(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            msg: format!("expected `key = value`, got `{content}`"),
        })?;
        let k = k.trim();
        let key = KEYS.iter().find(|&&known| known == k).ok_or_else(|| Error::Parse {
            line,
            msg: format!("unknown key `{k}`"),
        })?;
        if map.insert(*key, (line, v.trim().to_string())).is_some() {
            return Err(Error::Parse {
                line,
                msg: format!("duplicate key `{k}`"),
            });
        }
    }
    Ok(Entries { map })
}

fn bad(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

/// Parses and validates an experiment definition.
pub fn parse_experiment_spec(text: &str) -> Result<ExperimentSpec> {
    let e = lex(text)?;
    let beta = e.get("beta", Some(0.0))?;
    let model = match e.raw("model") {
        Some((_, "armax-gpd")) => Model::ArmaxGpd {
            gamma: e.get("gamma", Some(0.0))?,
            beta,
        },
        Some((_, "armax-pareto")) => Model::ArmaxPareto {
            alpha: e.get("alpha", None)?,
            beta,
        },
        Some((line, other)) => {
            return Err(bad(line, format!("unknown model `{other}` (expected armax-gpd or armax-pareto)")))
        }
        None => return Err(bad(0, "missing required key `model`".into())),
    };
    let target = match e.raw("target").unwrap_or((0, "mean")) {
        (_, "mean") => Target::Mean,
        (_, "return-level") => Target::ReturnLevel {
            period: e.get("period", Some(100.0))?,
        },
        (_, "frechet-shape") => Target::FrechetShape,
        (line, other) => {
            return Err(bad(
                line,
                format!("unknown target `{other}` (expected mean, return-level or frechet-shape)"),
            ))
        }
    };
    let k: usize = e.get("k", Some(2))?;
    let (line, names) = e.list("methods").ok_or_else(|| bad(0, "missing required key `methods`".into()))?;
    let methods = names
        .iter()
        .map(|name| match *name {
            "disjoint" => Ok(Method::Disjoint),
            "sliding" => Ok(Method::Sliding),
            "circular" => Ok(Method::Circular { k }),
            other => Err(bad(line, format!("unknown method `{other}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let (line, ms) = e.list("m").ok_or_else(|| bad(0, "missing required key `m`".into()))?;
    let m_grid = ms
        .iter()
        .map(|s| s.parse().map_err(|_| bad(line, format!("cannot parse `{s}` as an effective sample size"))))
        .collect::<Result<Vec<usize>>>()?;
    let correction = match e.raw("correction").unwrap_or((0, "none")) {
        (_, "none") => Correction::None,
        (_, "auto-rl100") => Correction::Auto { target: CorrectionTarget::Rl100 },
        (_, "auto-mean") => Correction::Auto { target: CorrectionTarget::Mean },
        (line, v) => Correction::Factor {
            factor: v
                .parse()
                .map_err(|_| bad(line, format!("correction must be none, auto-rl100, auto-mean or a factor, got `{v}`")))?,
        },
    };
    let spec = ExperimentSpec {
        model,
        target,
        r: e.get("r", None)?,
        m_grid,
        methods,
        replications: e.get("replications", None)?,
        replicates: e.get("replicates", Some(0))?,
        level: e.get("level", Some(0.95))?,
        seed: e.get("seed", Some(0))?,
        k,
        correction,
    };
    spec.validate().map_err(|err| match err {
        Error::InvalidInput(msg) => bad(0, msg),
        other => other,
    })?;
    Ok(spec)
}

/// Renders a spec in the format accepted by [`parse_experiment_spec`].
pub fn format_experiment_spec(spec: &ExperimentSpec) -> String {
    let mut lines = Vec::new();
    match spec.model {
        Model::ArmaxGpd { gamma, beta } => {
            lines.push("model = armax-gpd".to_string());
            lines.push(format!("gamma = {gamma:?}"));
            lines.push(format!("beta = {beta:?}"));
        }
        Model::ArmaxPareto { alpha, beta } => {
            lines.push("model = armax-pareto".to_string());
            lines.push(format!("alpha = {alpha:?}"));
            lines.push(format!("beta = {beta:?}"));
        }
    }
    match spec.target {
        Target::Mean => lines.push("target = mean".into()),
        Target::ReturnLevel { period } => {
            lines.push("target = return-level".into());
            lines.push(format!("period = {period:?}"));
        }
        Target::FrechetShape => lines.push("target = frechet-shape".into()),
    }
    lines.push(format!("r = {}", spec.r));
    let ms: Vec<String> = spec.m_grid.iter().map(|m| m.to_string()).collect();
    lines.push(format!("m = {}", ms.join(", ")));
    let methods: Vec<&str> = spec
        .methods
        .iter()
        .map(|m| match m {
            Method::Disjoint => "disjoint",
            Method::Sliding => "sliding",
            Method::Circular { .. } => "circular",
        })
        .collect();
    lines.push(format!("methods = {}", methods.join(", ")));
    lines.push(format!("k = {}", spec.k));
    lines.push(format!("replications = {}", spec.replications));
    lines.push(format!("replicates = {}", spec.replicates));
    lines.push(format!("level = {:?}", spec.level));
    lines.push(format!("seed = {}", spec.seed));
    lines.push(match spec.correction {
        Correction::None => "correction = none".into(),
        Correction::Factor { factor } => format!("correction = {factor:?}"),
        Correction::Auto { target: CorrectionTarget::Rl100 } => "correction = auto-rl100".into(),
        Correction::Auto { target: CorrectionTarget::Mean } => "correction = auto-mean".into(),
    });
    lines.join("\n") + "\n"
}
