//! Job configuration: a raw JSON/flag layer with every number as a decimal
//! string, validated into a typed [`Job`] before anything runs.

use std::path::{Path, PathBuf};

use num::BigRational;
use serde::{Deserialize, Serialize};
use twisted_means::cq::parse_rational;
use twisted_means::zspace::AnnulusSpec;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config {path}: line {line}, column {column}: {message}")]
    Syntax { path: String, line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, message: message.into() }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusConfig {
    pub r: Option<String>,
    #[serde(rename = "R")]
    pub outer: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub count: Option<String>,
    /// `chebyshev` or `uniform`.
    pub placement: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub count: Option<String>,
    pub max_norm: Option<String>,
    pub offsets: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    /// Coordinates as `re,im` strings, one per complex dimension.
    pub z: Option<Vec<String>>,
    pub s: Option<String>,
    /// `right`, `left` or `euclidean`.
    pub side: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportConfig {
    pub r_max: Option<String>,
    pub step: Option<String>,
    pub centres: Option<String>,
    pub centre_max: Option<String>,
    pub offsets: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionConfig {
    pub name: Option<String>,
    pub p: Option<String>,
    pub q: Option<String>,
    /// Model index `i` (growing family) or `k` (decaying family).
    pub index: Option<String>,
    pub value: Option<String>,
    pub sign: Option<String>,
    pub centre: Option<Vec<String>>,
    pub radius: Option<String>,
    pub alpha: Option<Vec<String>>,
    pub beta: Option<Vec<String>>,
    pub profile: Option<PathBuf>,
    pub poly: Option<PathBuf>,
}

/// Raw job description. Every field is optional here; [`JobConfig::validate`]
/// fills defaults and rejects anything inconsistent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Option<String>,
    pub n: Option<String>,
    pub annulus: Option<AnnulusConfig>,
    pub lambda: Option<String>,
    pub degrees: Option<Vec<[String; 2]>>,
    pub order: Option<String>,
    pub grid: Option<GridConfig>,
    pub tolerance: Option<String>,
    pub function: Option<FunctionConfig>,
    pub samples: Option<SampleConfig>,
    pub point: Option<PointConfig>,
    pub support: Option<SupportConfig>,
    /// `one-sided`, `two-sided` or `euclidean`.
    pub mode: Option<String>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: Option<String>,
    pub criteria: Option<Vec<String>>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, [$($f:ident),*]) => {
        {
            $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
        }
    };
}

fn overlay_nested<T: Clone + Default>(top: &Option<T>, base: &mut Option<T>, merge: impl FnOnce(&T, &mut T)) {
    if let Some(t) = top {
        let mut b = base.clone().unwrap_or_default();
        merge(t, &mut b);
        *base = Some(b);
    }
}

impl JobConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
            path: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text, path)
    }

    /// Fields set in `self` win over those in `base`.
    pub fn over(&self, base: &JobConfig) -> JobConfig {
        let mut out = base.clone();
        overlay!(self, out, [command, n, lambda, degrees, order, tolerance, mode, input, output, seed, criteria]);
        overlay_nested(&self.annulus, &mut out.annulus, |t, b| overlay!(t, b, [r, outer]));
        overlay_nested(&self.grid, &mut out.grid, |t, b| overlay!(t, b, [count, placement]));
        overlay_nested(&self.samples, &mut out.samples, |t, b| overlay!(t, b, [count, max_norm, offsets]));
        overlay_nested(&self.point, &mut out.point, |t, b| overlay!(t, b, [z, s, side]));
        overlay_nested(&self.support, &mut out.support, |t, b| overlay!(t, b, [r_max, step, centres, centre_max, offsets]));
        overlay_nested(&self.function, &mut out.function, |t, b| {
            overlay!(t, b, [name, p, q, index, value, sign, centre, radius, alpha, beta, profile, poly])
        });
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Basis,
    Decompose,
    Mean,
    Verify,
    Characterize,
    Support,
    Selftest,
}

impl Command {
    fn parse(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "basis" => Command::Basis,
            "decompose" => Command::Decompose,
            "mean" => Command::Mean,
            "verify" => Command::Verify,
            "characterize" => Command::Characterize,
            "support" => Command::Support,
            "selftest" => Command::Selftest,
            other => return Err(field("command", format!("unknown command `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    OneSided,
    TwoSided,
    Euclidean,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Chebyshev,
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Constant { value: BigRational },
    Gaussian { sign: i64 },
    Bump { centre: Vec<(f64, f64)>, radius: f64 },
    GrowingModel { p: u32, q: u32, index: u32, poly: Option<PathBuf> },
    DecayingModel { p: u32, q: u32, index: u32, poly: Option<PathBuf> },
    Euclid { p: u32, q: u32, index: u32, poly: Option<PathBuf> },
    Monomial { alpha: Vec<u32>, beta: Vec<u32> },
    Structured { profile: PathBuf, poly: PathBuf },
    Zero,
}

/// Fully validated job.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub command: Command,
    pub n: usize,
    pub annulus: AnnulusSpec,
    pub lambda: BigRational,
    pub degrees: Vec<(u32, u32)>,
    pub order: usize,
    pub grid_count: usize,
    pub placement: Placement,
    pub tolerance: f64,
    pub function: Option<FunctionSpec>,
    pub sample_count: usize,
    pub sample_max_norm: f64,
    pub offsets: Vec<f64>,
    pub point: Vec<(f64, f64)>,
    pub s: f64,
    pub side: String,
    pub r_max: f64,
    pub step: f64,
    pub support_centres: usize,
    pub support_centre_max: f64,
    pub support_offsets: Vec<f64>,
    pub mode: Mode,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub seed: u64,
    pub criteria: Vec<u8>,
}

fn num<T: std::str::FromStr>(raw: &Option<String>, name: &'static str, default: T) -> Result<T, ConfigError> {
    match raw {
        None => Ok(default),
        Some(s) => s.trim().parse().map_err(|_| field(name, format!("cannot parse `{s}`"))),
    }
}

fn finite(raw: &Option<String>, name: &'static str, default: f64) -> Result<f64, ConfigError> {
    let v: f64 = num(raw, name, default)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field(name, "must be finite"))
    }
}

fn positive_list(raw: &Option<Vec<String>>, name: &'static str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
    let Some(list) = raw else { return Ok(default.to_vec()) };
    let out: Vec<f64> = list
        .iter()
        .map(|s| s.trim().parse::<f64>().map_err(|_| field(name, format!("cannot parse `{s}`"))))
        .collect::<Result<_, _>>()?;
    if out.is_empty() || out.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(field(name, "needs at least one positive value"));
    }
    Ok(out)
}

/// `re,im` pairs; a bare number is a real coordinate.
pub fn parse_point(raw: &[String], name: &'static str) -> Result<Vec<(f64, f64)>, ConfigError> {
    raw.iter()
        .map(|s| {
            let (re, im) = s.split_once(',').unwrap_or((s.as_str(), "0"));
            let re: f64 = re.trim().parse().map_err(|_| field(name, format!("cannot parse `{s}`")))?;
            let im: f64 = im.trim().parse().map_err(|_| field(name, format!("cannot parse `{s}`")))?;
            if re.is_finite() && im.is_finite() {
                Ok((re, im))
            } else {
                Err(field(name, "coordinates must be finite"))
            }
        })
        .collect()
}

fn indices(raw: &Option<Vec<String>>, name: &'static str, n: usize) -> Result<Vec<u32>, ConfigError> {
    let list = match raw {
        Some(l) => l.iter().map(|s| s.trim().parse::<u32>().map_err(|_| field(name, format!("cannot parse `{s}`")))).collect::<Result<Vec<_>, _>>()?,
        None => vec![0; n],
    };
    if list.len() != n {
        return Err(field(name, format!("expected {n} entries, found {}", list.len())));
    }
    Ok(list)
}

fn default_degrees(n: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for total in 0..=2u32 {
        for p in (0..=total).rev() {
            let q = total - p;
            if n > 1 || p == 0 || q == 0 {
                out.push((p, q));
            }
        }
    }
    out
}

impl JobConfig {
    pub fn validate(&self) -> Result<Job, ConfigError> {
        let command = Command::parse(self.command.as_deref().ok_or_else(|| field("command", "missing"))?)?;
        let n: usize = num(&self.n, "n", 2)?;
        if n == 0 || n > 8 {
            return Err(field("n", "must lie in 1..=8"));
        }
        let ann_cfg = self.annulus.clone().unwrap_or_default();
        let r = finite(&ann_cfg.r, "annulus.r", 1.0)?;
        let outer = match ann_cfg.outer.as_deref().map(str::trim) {
            None | Some("inf") | Some("infinity") => None,
            Some(s) => Some(s.parse::<f64>().map_err(|_| field("annulus.R", format!("cannot parse `{s}`")))?),
        };
        let annulus = AnnulusSpec::new(n, r, outer).map_err(|e| field("annulus", e.to_string()))?;
        let lambda = match &self.lambda {
            None => BigRational::from_integer(1.into()),
            Some(s) => parse_rational(s).ok_or_else(|| field("lambda", format!("cannot parse `{s}`")))?,
        };
        let degrees = match &self.degrees {
            None => default_degrees(n),
            Some(list) => list
                .iter()
                .map(|[p, q]| {
                    let p = p.trim().parse::<u32>().map_err(|_| field("degrees", format!("cannot parse `{p}`")))?;
                    let q = q.trim().parse::<u32>().map_err(|_| field("degrees", format!("cannot parse `{q}`")))?;
                    Ok((p, q))
                })
                .collect::<Result<_, ConfigError>>()?,
        };
        let default_order = match command {
            Command::Verify | Command::Mean => 48,
            Command::Support => 24,
            _ => {
                let top = degrees.iter().map(|(p, q)| p + q).max().unwrap_or(0);
                twisted_means::quad::default_order(top, 0)
            }
        };
        let order: usize = num(&self.order, "order", default_order)?;
        if order == 0 || order > 256 {
            return Err(field("order", "must lie in 1..=256"));
        }
        let grid = self.grid.clone().unwrap_or_default();
        let grid_count: usize = num(&grid.count, "grid.count", 24)?;
        let placement = match grid.placement.as_deref() {
            None | Some("chebyshev") => Placement::Chebyshev,
            Some("uniform") => Placement::Uniform,
            Some(other) => return Err(field("grid.placement", format!("unknown placement `{other}`"))),
        };
        let tolerance = finite(&self.tolerance, "tolerance", 1e-8)?;
        if !(tolerance > 0.0) {
            return Err(field("tolerance", "must be positive"));
        }
        let mode = match self.mode.as_deref() {
            None | Some("one-sided") => Mode::OneSided,
            Some("two-sided") => Mode::TwoSided,
            Some("euclidean") => Mode::Euclidean,
            Some(other) => return Err(field("mode", format!("unknown mode `{other}`"))),
        };
        let samples = self.samples.clone().unwrap_or_default();
        let point = self.point.clone().unwrap_or_default();
        let support = self.support.clone().unwrap_or_default();
        let point_z = match &point.z {
            Some(z) => parse_point(z, "point.z")?,
            None => vec![(0.0, 0.0); n],
        };
        if point_z.len() != n {
            return Err(field("point.z", format!("expected {n} coordinates, found {}", point_z.len())));
        }
        let s = finite(&point.s, "point.s", 1.0)?;
        if !(s > 0.0) {
            return Err(field("point.s", "must be positive"));
        }
        let side = point.side.clone().unwrap_or_else(|| "right".into());
        if !matches!(side.as_str(), "right" | "left" | "euclidean") {
            return Err(field("point.side", format!("unknown side `{side}`")));
        }
        let step = finite(&support.step, "support.step", 0.05)?;
        if !(step > 0.0) {
            return Err(field("support.step", "must be positive"));
        }
        let criteria = match &self.criteria {
            None => twisted_means::selftest::CRITERIA.to_vec(),
            Some(list) => list
                .iter()
                .map(|s| match s.trim().parse::<u8>() {
                    Ok(v) if (1..=12).contains(&v) => Ok(v),
                    _ => Err(field("criteria", format!("`{s}` is not a criterion number"))),
                })
                .collect::<Result<_, _>>()?,
        };
        let function = match command {
            Command::Mean | Command::Verify | Command::Characterize | Command::Support => Some(self.function_spec(n)?),
            _ => None,
        };
        Ok(Job {
            command,
            n,
            annulus,
            lambda,
            degrees,
            order,
            grid_count,
            placement,
            tolerance,
            function,
            sample_count: num(&samples.count, "samples.count", 20)?,
            sample_max_norm: finite(&samples.max_norm, "samples.max_norm", 2.0)?,
            offsets: positive_list(&samples.offsets, "samples.offsets", &[0.5, 1.0, 1.5, 2.0, 2.5])?,
            point: point_z,
            s,
            side,
            r_max: finite(&support.r_max, "support.r_max", 3.0)?,
            step,
            support_centres: num(&support.centres, "support.centres", 6)?,
            support_centre_max: finite(&support.centre_max, "support.centre_max", 1.0)?,
            support_offsets: positive_list(&support.offsets, "support.offsets", &[0.02, 0.1, 0.3, 0.7])?,
            mode,
            input: self.input.clone(),
            output: self.output.clone().unwrap_or_else(|| PathBuf::from(".")),
            seed: num(&self.seed, "seed", 0)?,
            criteria,
        })
    }

    fn function_spec(&self, n: usize) -> Result<FunctionSpec, ConfigError> {
        let f = self.function.clone().unwrap_or_default();
        let name = f.name.as_deref().ok_or_else(|| field("function.name", "missing"))?;
        let p: u32 = num(&f.p, "function.p", 1)?;
        let q: u32 = num(&f.q, "function.q", 1)?;
        let index: u32 = num(&f.index, "function.index", 1)?;
        Ok(match name {
            "constant" => FunctionSpec::Constant {
                value: match &f.value {
                    None => BigRational::from_integer(1.into()),
                    Some(s) => parse_rational(s).ok_or_else(|| field("function.value", format!("cannot parse `{s}`")))?,
                },
            },
            "zero" => FunctionSpec::Zero,
            "gaussian" => {
                let sign: i64 = num(&f.sign, "function.sign", -1)?;
                if sign != 1 && sign != -1 {
                    return Err(field("function.sign", "must be 1 or -1"));
                }
                FunctionSpec::Gaussian { sign }
            }
            "bump" => {
                let centre = match &f.centre {
                    Some(c) => parse_point(c, "function.centre")?,
                    None => vec![(0.0, 0.0); n],
                };
                if centre.len() != n {
                    return Err(field("function.centre", format!("expected {n} coordinates")));
                }
                let radius = finite(&f.radius, "function.radius", 1.0)?;
                if !(radius > 0.0) {
                    return Err(field("function.radius", "must be positive"));
                }
                FunctionSpec::Bump { centre, radius }
            }
            "thm33" => FunctionSpec::GrowingModel { p, q, index, poly: f.poly.clone() },
            "thm34" => FunctionSpec::DecayingModel { p, q, index, poly: f.poly.clone() },
            "euclid" => FunctionSpec::Euclid { p, q, index: num(&f.index, "function.index", 0)?, poly: f.poly.clone() },
            "monomial" => FunctionSpec::Monomial { alpha: indices(&f.alpha, "function.alpha", n)?, beta: indices(&f.beta, "function.beta", n)? },
            "structured" => FunctionSpec::Structured {
                profile: f.profile.clone().ok_or_else(|| field("function.profile", "missing"))?,
                poly: f.poly.clone().ok_or_else(|| field("function.poly", "missing"))?,
            },
            other => return Err(field("function.name", format!("unknown built-in `{other}`"))),
        })
    }
}
