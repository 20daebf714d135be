//! Run configuration: `key = value` files and the numeric list syntaxes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::error::{Error, Result};

/// Upper bound on the number of points a range may expand to.
pub const MAX_RANGE_POINTS: usize = 1_000_000;

/// Comma-separated finite floats, e.g. `20,40,80`.
pub fn parse_float_list(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty list".into()));
    }
    s.split(',').map(parse_finite).collect()
}

fn parse_finite(item: &str) -> Result<f64> {
    let t = item.trim();
    let v: f64 = t.parse().map_err(|_| Error::Parse(format!("bad number {t:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("non-finite number {t:?}")))
    }
}

/// `lo:hi:step`, inclusive of `hi` up to rounding.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(Error::Parse(format!("expected lo:hi:step, got {s:?}")));
    };
    let (lo, hi, step) = (parse_finite(lo)?, parse_finite(hi)?, parse_finite(step)?);
    if !(step > 0.0) {
        return Err(Error::Parse(format!("range step must be positive, got {step}")));
    }
    if hi < lo {
        return Err(Error::Parse(format!("range end {hi} is below its start {lo}")));
    }
    let count = ((hi - lo) / step * (1.0 + 1e-12) + 1e-9).floor();
    if !(count < MAX_RANGE_POINTS as f64) {
        return Err(Error::Parse(format!("range {s:?} expands to more than {MAX_RANGE_POINTS} points")));
    }
    Ok((0..=count as usize).map(|k| lo + k as f64 * step).collect())
}

/// A list or a range, chosen by the presence of `:`.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        parse_range(s)
    } else {
        parse_float_list(s)
    }
}

/// `key = value` lines with `#` comments; later lines override earlier ones.
pub fn parse_key_values(text: &str, valid: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {line:?}", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !valid.contains(&k) {
            return Err(Error::Config(format!(
                "line {}: unknown key {k:?}; valid keys: {}",
                i + 1,
                valid.join(", ")
            )));
        }
        if v.is_empty() {
            return Err(Error::Config(format!("line {}: empty value for {k}", i + 1)));
        }
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

/// Defaults shared by all subcommands, overridable from a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// x-space half width; `None` lets each module pick.
    pub half_width: Option<f64>,
    /// Interior nodes of the x-space grid; `None` lets each module pick.
    pub nodes: Option<usize>,
    /// Grid spacing; `None` lets each module pick.
    pub spacing: Option<f64>,
    pub seed: u64,
    pub c_max: f64,
    pub bisect_tol: f64,
    pub window_fraction: f64,
    pub airy_half_width: f64,
    pub airy_nodes: usize,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            half_width: None,
            nodes: None,
            spacing: None,
            seed: 3,
            c_max: 20.0,
            bisect_tol: 1e-3,
            window_fraction: crate::semigroup::DEFAULT_WINDOW_FRACTION,
            airy_half_width: 8.0,
            airy_nodes: 800,
            output: None,
            svg: None,
            jobs: None,
        }
    }
}

impl RunConfig {
    pub const KEYS: &'static [&'static str] = &[
        "half_width",
        "nodes",
        "spacing",
        "seed",
        "c_max",
        "bisect_tol",
        "window_fraction",
        "airy_half_width",
        "airy_nodes",
        "output",
        "svg",
        "jobs",
    ];

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, v) in parse_key_values(text, Self::KEYS)? {
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("{key}: expected {what}, got {value:?}"));
        let float = || parse_finite(value).map_err(|_| bad("a finite number"));
        let count = || value.parse::<usize>().map_err(|_| bad("a non-negative integer"));
        match key {
            "half_width" => self.half_width = Some(float()?),
            "nodes" => self.nodes = Some(count()?),
            "spacing" => self.spacing = Some(float()?),
            "seed" => self.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
            "c_max" => self.c_max = float()?,
            "bisect_tol" => self.bisect_tol = float()?,
            "window_fraction" => self.window_fraction = float()?,
            "airy_half_width" => self.airy_half_width = float()?,
            "airy_nodes" => self.airy_nodes = count()?,
            "output" => self.output = Some(PathBuf::from(value)),
            "svg" => self.svg = Some(PathBuf::from(value)),
            "jobs" => self.jobs = Some(count()?),
            _ => {
                return Err(Error::Config(format!(
                    "unknown key {key:?}; valid keys: {}",
                    Self::KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        if let Some(l) = self.half_width {
            positive("half_width", l)?;
        }
        if self.nodes == Some(0) {
            return Err(Error::Config("nodes must be at least 1".into()));
        }
        if let Some(h) = self.spacing {
            positive("spacing", h)?;
        }
        positive("c_max", self.c_max)?;
        positive("bisect_tol", self.bisect_tol)?;
        positive("airy_half_width", self.airy_half_width)?;
        if !(self.window_fraction > 0.0 && self.window_fraction < 1.0) {
            return Err(Error::Config(format!(
                "window_fraction must lie in (0, 1), got {}",
                self.window_fraction
            )));
        }
        if self.airy_nodes < 2 {
            return Err(Error::Config("airy_nodes must be at least 2".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    /// One `key=value` pair per setting, space separated, for output headers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
        write!(
            f,
            "half_width={} nodes={} spacing={} seed={} c_max={} bisect_tol={} window_fraction={} airy_half_width={} airy_nodes={}",
            opt(self.half_width.map(|v| v.to_string())),
            opt(self.nodes.map(|v| v.to_string())),
            opt(self.spacing.map(|v| v.to_string())),
            self.seed,
            self.c_max,
            self.bisect_tol,
            self.window_fraction,
            self.airy_half_width,
            self.airy_nodes
        )
    }
}
