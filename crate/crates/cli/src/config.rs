//! Run configuration: a `key = value` file, command-line flags on top, then
//! validation against the chosen state family.
//!
//! File format, one setting per line:
//!
//! ```text
//! # comments start with '#'
//! family = bec
//! n = 2
//! fixed-angles = 0, 2.6
//! refine = false
//! ```
//!
//! Keys accept `-` or `_`. Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{CliError, Result};

const KEYS: &[&str] = &[
    "family",
    "n",
    "m",
    "c",
    "p",
    "n2",
    "state",
    "alpha",
    "resolution",
    "refine",
    "fixed_angles",
    "out",
    "seed",
    "restarts",
    "co_optimize",
];

/// Raw `key = value` pairs in file order of keys.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| CliError::ConfigSyntax { line: i + 1, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        if !KEYS.contains(&key.as_str()) {
            return Err(syntax(format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(syntax(format!("`{key}` has no value")));
        }
        if out.insert(key.clone(), value.to_string()).is_some() {
            return Err(syntax(format!("`{key}` given twice")));
        }
    }
    Ok(out)
}

/// Parses `a1,a2` in radians.
pub fn parse_angle_list(text: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [a, b] = parts.as_slice() else {
        return Err(CliError::invalid(format!("expected two angles `a1,a2`, got `{text}`")));
    };
    let parse = |s: &str| -> Result<f64> {
        let v: f64 = s.parse().map_err(|_| CliError::invalid(format!("`{s}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::invalid(format!("angle `{s}` is not finite")))
        }
    };
    Ok([parse(a)?, parse(b)?])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bec,
    Noon,
    Squeezed,
    ToyMixed,
    Custom,
}

impl FromStr for Family {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "bec" => Ok(Family::Bec),
            "noon" | "mssm" => Ok(Family::Noon),
            "squeezed" => Ok(Family::Squeezed),
            "toy_mixed" | "toy" => Ok(Family::ToyMixed),
            "custom" => Ok(Family::Custom),
            other => Err(CliError::invalid(format!(
                "unknown family `{other}` (expected bec, noon, squeezed, toy_mixed, custom)"
            ))),
        }
    }
}

/// Every setting optional; file values first, then flags on top.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartialConfig {
    pub family: Option<Family>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub c: Option<f64>,
    pub p: Option<f64>,
    pub n2: Option<usize>,
    pub state: Option<String>,
    pub alpha: Option<f64>,
    pub resolution: Option<usize>,
    pub refine: Option<bool>,
    pub fixed_angles: Option<[f64; 2]>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub co_optimize: Option<bool>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::invalid(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CliError::invalid(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

impl PartialConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        let map = parse_config_text(text)?;
        let mut cfg = PartialConfig::default();
        for (key, value) in &map {
            let v = value.as_str();
            match key.as_str() {
                "family" => cfg.family = Some(v.parse()?),
                "n" => cfg.n = Some(parse_value(key, v)?),
                "m" => cfg.m = Some(parse_value(key, v)?),
                "c" => cfg.c = Some(parse_value(key, v)?),
                "p" => cfg.p = Some(parse_value(key, v)?),
                "n2" => cfg.n2 = Some(parse_value(key, v)?),
                "state" => cfg.state = Some(v.to_string()),
                "alpha" => cfg.alpha = Some(parse_value(key, v)?),
                "resolution" => cfg.resolution = Some(parse_value(key, v)?),
                "refine" => cfg.refine = Some(parse_bool(key, v)?),
                "fixed_angles" => cfg.fixed_angles = Some(parse_angle_list(v)?),
                "out" => cfg.out = Some(PathBuf::from(v)),
                "seed" => cfg.seed = Some(parse_value(key, v)?),
                "restarts" => cfg.restarts = Some(parse_value(key, v)?),
                "co_optimize" => cfg.co_optimize = Some(parse_bool(key, v)?),
                _ => unreachable!("keys are checked while parsing"),
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }

    /// `self` with every value present in `top` replaced.
    pub fn overridden_by(self, top: PartialConfig) -> PartialConfig {
        PartialConfig {
            family: top.family.or(self.family),
            n: top.n.or(self.n),
            m: top.m.or(self.m),
            c: top.c.or(self.c),
            p: top.p.or(self.p),
            n2: top.n2.or(self.n2),
            state: top.state.or(self.state),
            alpha: top.alpha.or(self.alpha),
            resolution: top.resolution.or(self.resolution),
            refine: top.refine.or(self.refine),
            fixed_angles: top.fixed_angles.or(self.fixed_angles),
            out: top.out.or(self.out),
            seed: top.seed.or(self.seed),
            restarts: top.restarts.or(self.restarts),
            co_optimize: top.co_optimize.or(self.co_optimize),
        }
    }

    /// Fills defaults and checks the family's parameters.
    pub fn validate(self) -> Result<RunConfig> {
        let family = self.family.unwrap_or(Family::Bec);
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| CliError::invalid(format!("family {family:?} needs --{name}")))
        };
        let reject = |present: bool, name: &str| {
            if present {
                Err(CliError::invalid(format!("--{name} does not apply to family {family:?}")))
            } else {
                Ok(())
            }
        };
        let params = match family {
            Family::Bec => {
                reject(self.m.is_some(), "m")?;
                reject(self.c.is_some(), "c")?;
                reject(self.p.is_some(), "p")?;
                reject(self.state.is_some(), "state")?;
                FamilyParams::Bec { n: need(self.n, "n")?, n2: self.n2 }
            }
            Family::Noon => {
                reject(self.c.is_some(), "c")?;
                reject(self.p.is_some(), "p")?;
                reject(self.state.is_some(), "state")?;
                FamilyParams::Noon {
                    n: need(self.n, "n")?,
                    m: self.m.unwrap_or(0),
                    n2: self.n2,
                }
            }
            Family::Squeezed => {
                for (present, name) in [
                    (self.n.is_some(), "n"),
                    (self.m.is_some(), "m"),
                    (self.p.is_some(), "p"),
                    (self.n2.is_some(), "n2"),
                    (self.state.is_some(), "state"),
                ] {
                    reject(present, name)?;
                }
                FamilyParams::Squeezed {
                    c: self.c.ok_or_else(|| CliError::invalid("family squeezed needs --c"))?,
                }
            }
            Family::ToyMixed => {
                for (present, name) in [
                    (self.n.is_some(), "n"),
                    (self.m.is_some(), "m"),
                    (self.c.is_some(), "c"),
                    (self.n2.is_some(), "n2"),
                    (self.state.is_some(), "state"),
                ] {
                    reject(present, name)?;
                }
                FamilyParams::ToyMixed {
                    p: self.p.ok_or_else(|| CliError::invalid("family toy_mixed needs --p"))?,
                }
            }
            Family::Custom => {
                for (present, name) in [
                    (self.n.is_some(), "n"),
                    (self.m.is_some(), "m"),
                    (self.c.is_some(), "c"),
                    (self.p.is_some(), "p"),
                    (self.n2.is_some(), "n2"),
                ] {
                    reject(present, name)?;
                }
                FamilyParams::Custom {
                    state: self
                        .state
                        .ok_or_else(|| CliError::invalid("family custom needs --state"))?,
                }
            }
        };
        let cfg = RunConfig {
            params,
            alpha: self.alpha.unwrap_or(FRAC_1_SQRT_2),
            resolution: self.resolution,
            refine: self.refine.unwrap_or(true),
            fixed_angles: self.fixed_angles,
            out: self.out,
            seed: self.seed.unwrap_or(0),
            restarts: self.restarts.unwrap_or(0),
            co_optimize: self.co_optimize.unwrap_or(false),
        };
        // build once so family preconditions fail before any computation
        crate::family::arrangement(&cfg.params)?;
        ssrbell::BeamsplitterParams::with_alpha(cfg.alpha, 0.0)?;
        Ok(cfg)
    }
}

/// A state family with its parameters. The second copy shares the family;
/// `n2` replaces `n` for it where the family has a particle number.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    Bec { n: usize, n2: Option<usize> },
    Noon { n: usize, m: usize, n2: Option<usize> },
    Squeezed { c: f64 },
    ToyMixed { p: f64 },
    Custom { state: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub params: FamilyParams,
    pub alpha: f64,
    pub resolution: Option<usize>,
    pub refine: bool,
    pub fixed_angles: Option<[f64; 2]>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub restarts: usize,
    pub co_optimize: bool,
}

/// Items `reproduce` can regenerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReproduceItem {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Toy,
    MixedN,
    Postselect,
    Entropy,
}

impl ReproduceItem {
    pub const ALL: [ReproduceItem; 9] = [
        ReproduceItem::Fig2,
        ReproduceItem::Fig3,
        ReproduceItem::Fig4,
        ReproduceItem::Fig5,
        ReproduceItem::Fig6,
        ReproduceItem::Toy,
        ReproduceItem::MixedN,
        ReproduceItem::Postselect,
        ReproduceItem::Entropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReproduceItem::Fig2 => "fig2",
            ReproduceItem::Fig3 => "fig3",
            ReproduceItem::Fig4 => "fig4",
            ReproduceItem::Fig5 => "fig5",
            ReproduceItem::Fig6 => "fig6",
            ReproduceItem::Toy => "toy",
            ReproduceItem::MixedN => "mixedN",
            ReproduceItem::Postselect => "postselect",
            ReproduceItem::Entropy => "entropy",
        }
    }
}

impl FromStr for ReproduceItem {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim();
        Self::ALL
            .into_iter()
            .find(|i| i.name().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|i| i.name()).collect();
                CliError::invalid(format!("unknown item `{wanted}` (expected one of {})", names.join(", ")))
            })
    }
}

impl std::fmt::Display for ReproduceItem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
