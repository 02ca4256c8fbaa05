//! Run configuration: a flat `key = value` file, overridable by flags.
//!
//! ```text
//! # comments start with '#' or ';'
//! command = sweep
//! alpha = 0.25, 0.5
//! lambda = -0.5:0.5:0.25
//! family = normal-location
//! eps = 0:0.5:0.005
//! ```
//!
//! Lists are comma separated; `start:stop:step` expands to an inclusive
//! arithmetic grid. [`RunConfig::serialize`] writes every key in a fixed
//! order, so `serialize(parse(text))` is a fixed point after one pass.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use sdiv::breakdown::{Direction, RateRegime};

use crate::CliError;

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    BoundGrid,
    Sweep,
    ScenarioBound,
    CheckLemma1,
    CheckBp3,
}

impl Command {
    pub const ALL: [Command; 5] =
        [Command::BoundGrid, Command::Sweep, Command::ScenarioBound, Command::CheckLemma1, Command::CheckBp3];

    pub fn as_str(&self) -> &'static str {
        match self {
            Command::BoundGrid => "bound-grid",
            Command::Sweep => "sweep",
            Command::ScenarioBound => "scenario-bound",
            Command::CheckLemma1 => "check-lemma1",
            Command::CheckBp3 => "check-bp3",
        }
    }
}

/// Parameter grid as written: an explicit list or an inclusive range.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    /// Grid points; range points are snapped to 12 decimals so that
    /// `-3:3:0.1` hits 0 and -0.5 exactly.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n)
                    .map(|i| {
                        let v = start + i as f64 * step;
                        let snapped = (v * 1e12).round() / 1e12;
                        if snapped == 0.0 {
                            0.0
                        } else {
                            snapped
                        }
                    })
                    .collect()
            }
        }
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        match parts.as_slice() {
            [start, stop, step] => {
                let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
                if !(step > 0.0) || stop < start {
                    return Err(CliError::Usage(format!("bad range '{s}': need start <= stop and step > 0")));
                }
                if (stop - start) / step > 1e7 {
                    return Err(CliError::Usage(format!("range '{s}' has too many points")));
                }
                Ok(Grid::Range { start, stop, step })
            }
            [_] => {
                let v = s.split(',').map(|t| num(t.trim())).collect::<Result<Vec<_>, _>>()?;
                if v.is_empty() {
                    return Err(CliError::Usage("empty list".into()));
                }
                Ok(Grid::List(v))
            }
            _ => Err(CliError::Usage(format!("bad grid '{s}': use a comma list or start:stop:step"))),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::List(v) => {
                let s: Vec<String> = v.iter().map(|&x| fmt_num(x)).collect();
                f.write_str(&s.join(", "))
            }
            Grid::Range { start, stop, step } => write!(f, "{}:{}:{}", fmt_num(*start), fmt_num(*stop), fmt_num(*step)),
        }
    }
}

/// Shortest round-tripping text, in exponent form for very small or large magnitudes.
fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn num(s: &str) -> Result<f64, CliError> {
    let v: f64 = s.parse().map_err(|_| CliError::Usage(format!("'{s}' is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("'{s}' is not finite")))
    }
}

/// Model family of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyName {
    NormalLocation,
    NormalScale,
    NormalLocationScale,
    Exponential,
    Gamma,
    Binomial,
    MvLocation,
    MvScatter,
}

/// Limiting scenario of `scenario-bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioName {
    NormalLocation,
    MvLocation,
    NormalScale,
    MvScatter,
    Exponential,
    Gamma,
}

macro_rules! named {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self { $(Self::$variant => $name),+ }
            }
        }
        impl FromStr for $ty {
            type Err = CliError;
            fn from_str(s: &str) -> Result<Self, CliError> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    _ => Err(CliError::Usage(format!(
                        "unknown {} '{s}' (expected one of: {})",
                        stringify!($ty),
                        [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

named!(FamilyName {
    NormalLocation => "normal-location",
    NormalScale => "normal-scale",
    NormalLocationScale => "normal-location-scale",
    Exponential => "exponential",
    Gamma => "gamma",
    Binomial => "binomial",
    MvLocation => "mv-location",
    MvScatter => "mv-scatter",
});

named!(ScenarioName {
    NormalLocation => "normal-location",
    MvLocation => "mv-location",
    NormalScale => "normal-scale",
    MvScatter => "mv-scatter",
    Exponential => "exponential",
    Gamma => "gamma",
});

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown command '{s}'")))
    }
}

fn direction_str(d: Direction) -> &'static str {
    match d {
        Direction::Implode => "implode",
        Direction::Explode => "explode",
    }
}

fn regime_str(r: RateRegime) -> &'static str {
    match r {
        RateRegime::Unknown => "unknown",
        RateRegime::EstimateFaster => "estimate-faster",
        RateRegime::EstimateSlower => "estimate-slower",
    }
}

/// A fully resolved run: every field has a value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: Grid,
    pub lambda: Grid,
    pub family: FamilyName,
    /// Contaminant location; every coordinate for the multivariate families.
    pub mu0: f64,
    /// Contaminant standard deviation.
    pub sigma0: f64,
    /// Contaminant rate (exponential and gamma).
    pub rate0: f64,
    /// Gamma shape `t`.
    pub shape: f64,
    /// Dimension `p` of the multivariate families.
    pub dim: usize,
    /// Binomial size; the contaminant is a point mass at `n`.
    pub n: u32,
    pub scenarios: Vec<ScenarioName>,
    pub direction: Direction,
    pub regime: RateRegime,
    pub eta: f64,
    pub eps: Grid,
    /// Zero selects adaptive quadrature.
    pub mc_samples: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub n_grid: usize,
    /// Randomized instances per check batch.
    pub instances: usize,
    /// Check instances draw ε up to this multiple of the Lemma 1 cap;
    /// values above 1 produce precondition skips.
    pub eps_cap_factor: f64,
    pub seed: u64,
    /// `None`: the default location; `-`: standard output.
    pub out: Option<String>,
}

pub const KEYS: &[&str] = &[
    "command",
    "alpha",
    "lambda",
    "family",
    "mu0",
    "sigma0",
    "rate0",
    "shape",
    "dim",
    "n",
    "scenario",
    "direction",
    "regime",
    "eta",
    "eps",
    "mc_samples",
    "rel_tol",
    "abs_tol",
    "max_subdivisions",
    "n_grid",
    "instances",
    "eps_cap_factor",
    "seed",
    "out",
];

/// Splits config text into key/value pairs; later keys override earlier ones.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key = value", i + 1)));
        };
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key '{}'", i + 1, k.trim())));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    /// Parses a complete config file; `command` must be present.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let map = parse_pairs(text)?;
        let command =
            map.get("command").ok_or_else(|| CliError::Usage("config has no 'command' key".into()))?.parse()?;
        Self::from_pairs(command, &map)
    }

    /// Builds a config from pairs, filling the command's defaults.
    pub fn from_pairs(command: Command, map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let get = |k: &str, default: &str| -> String { map.get(k).cloned().unwrap_or_else(|| default.to_string()) };
        let parse_num = |k: &str, default: &str| -> Result<f64, CliError> {
            num(&get(k, default)).map_err(|e| CliError::Usage(format!("{k}: {e}")))
        };
        let parse_int = |k: &str, default: &str| -> Result<u64, CliError> {
            get(k, default).parse().map_err(|_| CliError::Usage(format!("{k}: expected a nonnegative integer")))
        };
        let (alpha_default, lambda_default) = match command {
            Command::BoundGrid => ("0:1:0.05", "-3:3:0.1"),
            _ => ("0.5", "0"),
        };
        let scenarios = get("scenario", "normal-location, mv-location, normal-scale, mv-scatter, exponential, gamma")
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<Vec<ScenarioName>, _>>()?;
        let direction = match get("direction", "implode").as_str() {
            "implode" => Direction::Implode,
            "explode" => Direction::Explode,
            s => return Err(CliError::Usage(format!("unknown direction '{s}' (implode or explode)"))),
        };
        let regime = match get("regime", "unknown").as_str() {
            "unknown" => RateRegime::Unknown,
            "estimate-faster" => RateRegime::EstimateFaster,
            "estimate-slower" => RateRegime::EstimateSlower,
            s => {
                return Err(CliError::Usage(format!(
                    "unknown regime '{s}' (unknown, estimate-faster or estimate-slower)"
                )))
            }
        };
        let out = map.get("out").filter(|s| !s.is_empty()).cloned();
        let cfg = RunConfig {
            command,
            alpha: get("alpha", alpha_default).parse()?,
            lambda: get("lambda", lambda_default).parse()?,
            family: get("family", "normal-location").parse()?,
            mu0: parse_num("mu0", "5")?,
            sigma0: parse_num("sigma0", "1")?,
            rate0: parse_num("rate0", "10")?,
            shape: parse_num("shape", "2")?,
            dim: parse_int("dim", "2")? as usize,
            n: u32::try_from(parse_int("n", "12")?).map_err(|_| CliError::Usage("n: too large".into()))?,
            scenarios,
            direction,
            regime,
            eta: parse_num("eta", "0")?,
            eps: get("eps", "0:0.5:0.005").parse()?,
            mc_samples: parse_int("mc_samples", "0")? as usize,
            rel_tol: parse_num("rel_tol", "1e-9")?,
            abs_tol: parse_num("abs_tol", "1e-12")?,
            max_subdivisions: parse_int("max_subdivisions", "200")? as usize,
            n_grid: parse_int("n_grid", "64")? as usize,
            instances: parse_int("instances", "500")? as usize,
            eps_cap_factor: parse_num("eps_cap_factor", "1")?,
            seed: parse_int("seed", "42")?,
            out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Usage(m.to_string()));
        if self.eps.values().iter().any(|e| !(0.0..=1.0).contains(e)) {
            return bad("eps values must lie in [0, 1]");
        }
        if self.eps.values().windows(2).any(|w| w[0] > w[1]) {
            return bad("eps values must be ascending");
        }
        if !(self.sigma0 > 0.0 && self.rate0 > 0.0 && self.shape > 0.0) {
            return bad("sigma0, rate0 and shape must be positive");
        }
        if self.dim == 0 || self.n == 0 {
            return bad("dim and n must be positive");
        }
        if !(self.rel_tol > 0.0 && self.abs_tol >= 0.0 && self.max_subdivisions > 0) {
            return bad("integrator tolerances must be positive");
        }
        if self.n_grid < 2 {
            return bad("n_grid must be at least 2");
        }
        if !(self.eps_cap_factor > 0.0) {
            return bad("eps_cap_factor must be positive");
        }
        Ok(())
    }

    /// Canonical text form: every key, in a fixed order.
    pub fn serialize(&self) -> String {
        let scenarios: Vec<&str> = self.scenarios.iter().map(|s| s.as_str()).collect();
        let pairs: Vec<(&str, String)> = vec![
            ("command", self.command.as_str().into()),
            ("alpha", self.alpha.to_string()),
            ("lambda", self.lambda.to_string()),
            ("family", self.family.as_str().into()),
            ("mu0", fmt_num(self.mu0)),
            ("sigma0", fmt_num(self.sigma0)),
            ("rate0", fmt_num(self.rate0)),
            ("shape", fmt_num(self.shape)),
            ("dim", self.dim.to_string()),
            ("n", self.n.to_string()),
            ("scenario", scenarios.join(", ")),
            ("direction", direction_str(self.direction).into()),
            ("regime", regime_str(self.regime).into()),
            ("eta", fmt_num(self.eta)),
            ("eps", self.eps.to_string()),
            ("mc_samples", self.mc_samples.to_string()),
            ("rel_tol", fmt_num(self.rel_tol)),
            ("abs_tol", fmt_num(self.abs_tol)),
            ("max_subdivisions", self.max_subdivisions.to_string()),
            ("n_grid", self.n_grid.to_string()),
            ("instances", self.instances.to_string()),
            ("eps_cap_factor", fmt_num(self.eps_cap_factor)),
            ("seed", self.seed.to_string()),
            ("out", self.out.clone().unwrap_or_default()),
        ];
        let mut s = String::new();
        for (k, v) in pairs {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        }
        s
    }
}
