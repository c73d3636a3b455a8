//! Experiment configuration: TOML with a top-level `kind`, `seed`, `output`,
//! a `[params]` table and a `[tolerances]` table. Every problem found is
//! reported at once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::functionals::{geometric_grid, linear_grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GaussianApprox,
    BridgeFixedT,
    BridgeVariableT,
    AlmgrenElliptic,
    AlmgrenParabolic,
    WeissElliptic,
    WeissParabolic,
    Epiperimetric,
    AcfElliptic,
    AcfParabolic,
    ModeIdentity,
    PdeConvergence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 12] = [
        ExperimentKind::GaussianApprox,
        ExperimentKind::BridgeFixedT,
        ExperimentKind::BridgeVariableT,
        ExperimentKind::AlmgrenElliptic,
        ExperimentKind::AlmgrenParabolic,
        ExperimentKind::WeissElliptic,
        ExperimentKind::WeissParabolic,
        ExperimentKind::Epiperimetric,
        ExperimentKind::AcfElliptic,
        ExperimentKind::AcfParabolic,
        ExperimentKind::ModeIdentity,
        ExperimentKind::PdeConvergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GaussianApprox => "gaussian-approx",
            ExperimentKind::BridgeFixedT => "bridge-fixed-t",
            ExperimentKind::BridgeVariableT => "bridge-variable-t",
            ExperimentKind::AlmgrenElliptic => "almgren-elliptic",
            ExperimentKind::AlmgrenParabolic => "almgren-parabolic",
            ExperimentKind::WeissElliptic => "weiss-elliptic",
            ExperimentKind::WeissParabolic => "weiss-parabolic",
            ExperimentKind::Epiperimetric => "epiperimetric",
            ExperimentKind::AcfElliptic => "acf-elliptic",
            ExperimentKind::AcfParabolic => "acf-parabolic",
            ExperimentKind::ModeIdentity => "mode-identity",
            ExperimentKind::PdeConvergence => "pde-convergence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Lin,
    Geom,
}

/// `start:stop:count` with linear or geometric spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridParam {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl GridParam {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let (body, spacing) = match s.rsplit_once(|c: char| c.is_whitespace() || c == ':') {
            Some((b, "lin")) => (b.trim(), Spacing::Lin),
            Some((b, "geom")) => (b.trim(), Spacing::Geom),
            _ => (s, Spacing::Lin),
        };
        let parts: Vec<&str> = body.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("grid `{s}` is not start:stop:count [lin|geom]"));
        }
        let start: f64 = parts[0].parse().map_err(|_| format!("grid start `{}` is not a number", parts[0]))?;
        let stop: f64 = parts[1].parse().map_err(|_| format!("grid stop `{}` is not a number", parts[1]))?;
        let count: usize =
            parts[2].parse().map_err(|_| format!("grid count `{}` is not a positive integer", parts[2]))?;
        let g = GridParam { start, stop, count, spacing };
        g.points().map_err(|e| format!("grid `{s}`: {e}"))?;
        Ok(g)
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count < 3 {
            return Err(Error::Domain(format!("grid needs at least 3 points, got {}", self.count)));
        }
        match self.spacing {
            Spacing::Lin => linear_grid(self.start, self.stop, self.count),
            Spacing::Geom => geometric_grid(self.start, self.stop, self.count),
        }
    }
}

impl fmt::Display for GridParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sp = match self.spacing {
            Spacing::Lin => "lin",
            Spacing::Geom => "geom",
        };
        write!(f, "{}:{}:{} {}", self.start, self.stop, self.count, sp)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
    Grid(GridParam),
    Ints(Vec<i64>),
    Reals(Vec<f64>),
    Texts(Vec<String>),
}

impl Serialize for ParamValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ParamValue::Int(v) => s.serialize_i64(*v),
            ParamValue::Real(v) => s.serialize_f64(*v),
            ParamValue::Text(v) => s.serialize_str(v),
            ParamValue::Grid(g) => s.serialize_str(&g.to_string()),
            ParamValue::Ints(v) => v.serialize(s),
            ParamValue::Reals(v) => v.serialize(s),
            ParamValue::Texts(v) => v.serialize(s),
        }
    }
}

/// Accepted type and range of one parameter.
#[derive(Clone, Copy, Debug)]
pub enum ParamType {
    Int {
        min: i64,
        max: i64,
    },
    /// `min < x < max` when `open`, else `min ≤ x ≤ max`.
    Real {
        min: f64,
        max: f64,
        open: bool,
    },
    Text(&'static [&'static str]),
    /// Strictly positive grid.
    Grid,
    Ints {
        min: i64,
        max: i64,
    },
    Reals {
        min: f64,
        max: f64,
        open: bool,
    },
    Texts(&'static [&'static str]),
}

pub struct ParamSpec {
    pub key: &'static str,
    pub ty: ParamType,
    pub default: ParamValue,
}

fn in_range(x: f64, min: f64, max: f64, open: bool) -> bool {
    x.is_finite() && if open { x > min && x < max } else { x >= min && x <= max }
}

fn range_text(min: f64, max: f64, open: bool) -> String {
    if open {
        format!("in ({min}, {max})")
    } else if max == f64::INFINITY {
        format!(">= {min}")
    } else {
        format!("in [{min}, {max}]")
    }
}

fn as_f64(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(x) => Some(*x),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

impl ParamType {
    fn coerce(&self, key: &str, v: &toml::Value) -> std::result::Result<ParamValue, String> {
        let ctx = format!("params.{key}");
        let list = |v: &toml::Value| -> std::result::Result<Vec<toml::Value>, String> {
            match v {
                toml::Value::Array(a) if !a.is_empty() => Ok(a.clone()),
                toml::Value::Array(_) => Err(format!("{ctx}: list must not be empty")),
                other => Ok(vec![other.clone()]),
            }
        };
        match *self {
            ParamType::Int { min, max } => match v {
                toml::Value::Integer(i) if (min..=max).contains(i) => Ok(ParamValue::Int(*i)),
                toml::Value::Integer(i) => Err(format!("{ctx}: {i} is outside [{min}, {max}]")),
                _ => Err(format!("{ctx}: expected an integer")),
            },
            ParamType::Real { min, max, open } => match as_f64(v) {
                Some(x) if in_range(x, min, max, open) => Ok(ParamValue::Real(x)),
                Some(x) => Err(format!("{ctx}: {x} must be {}", range_text(min, max, open))),
                None => Err(format!("{ctx}: expected a number")),
            },
            ParamType::Text(opts) => match v {
                toml::Value::String(s) if opts.is_empty() || opts.contains(&s.as_str()) => {
                    Ok(ParamValue::Text(s.clone()))
                }
                toml::Value::String(s) => Err(format!("{ctx}: `{s}` is not one of {}", opts.join(", "))),
                _ => Err(format!("{ctx}: expected a string")),
            },
            ParamType::Grid => match v {
                toml::Value::String(s) => {
                    let g = GridParam::parse(s).map_err(|e| format!("{ctx}: {e}"))?;
                    if !(g.start > 0.0) {
                        return Err(format!("{ctx}: grid must be positive"));
                    }
                    Ok(ParamValue::Grid(g))
                }
                _ => Err(format!("{ctx}: expected a grid string start:stop:count [lin|geom]")),
            },
            ParamType::Ints { min, max } => {
                let mut out = Vec::new();
                for x in list(v)? {
                    match x {
                        toml::Value::Integer(i) if (min..=max).contains(&i) => out.push(i),
                        toml::Value::Integer(i) => return Err(format!("{ctx}: {i} is outside [{min}, {max}]")),
                        _ => return Err(format!("{ctx}: expected integers")),
                    }
                }
                Ok(ParamValue::Ints(out))
            }
            ParamType::Reals { min, max, open } => {
                let mut out = Vec::new();
                for x in list(v)? {
                    match as_f64(&x) {
                        Some(y) if in_range(y, min, max, open) => out.push(y),
                        Some(y) => return Err(format!("{ctx}: {y} must be {}", range_text(min, max, open))),
                        None => return Err(format!("{ctx}: expected numbers")),
                    }
                }
                Ok(ParamValue::Reals(out))
            }
            ParamType::Texts(opts) => {
                let mut out = Vec::new();
                for x in list(v)? {
                    match x {
                        toml::Value::String(s) if opts.is_empty() || opts.contains(&s.as_str()) => out.push(s),
                        toml::Value::String(s) => {
                            return Err(format!("{ctx}: `{s}` is not one of {}", opts.join(", ")))
                        }
                        _ => return Err(format!("{ctx}: expected strings")),
                    }
                }
                Ok(ParamValue::Texts(out))
            }
        }
    }
}

/// A fully resolved experiment: defaults filled in, all values checked.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub params: BTreeMap<String, ParamValue>,
    pub tolerances: BTreeMap<String, f64>,
}

const TOP_KEYS: [&str; 5] = ["kind", "seed", "output", "params", "tolerances"];

impl ExperimentConfig {
    /// Defaults for `kind`.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let params = super::schema::param_specs(kind).into_iter().map(|p| (p.key.to_string(), p.default)).collect();
        let tolerances = super::schema::tolerance_specs(kind).iter().map(|(k, v)| (k.to_string(), *v)).collect();
        ExperimentConfig { kind, seed: 1, output: None, params, tolerances }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| Error::Config(vec![format!("parse error: {}", e.message())]))?;
        let mut errs = Vec::new();
        for k in table.keys() {
            if !TOP_KEYS.contains(&k.as_str()) {
                errs.push(format!("unknown key `{k}`"));
            }
        }
        let kind = match table.get("kind") {
            Some(toml::Value::String(s)) => match ExperimentKind::parse(s) {
                Some(k) => Some(k),
                None => {
                    let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                    errs.push(format!("kind: `{s}` is not one of {}", names.join(", ")));
                    None
                }
            },
            Some(_) => {
                errs.push("kind: expected a string".into());
                None
            }
            None => {
                errs.push("kind: missing".into());
                None
            }
        };
        let seed = match table.get("seed") {
            None => 1,
            Some(toml::Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => {
                errs.push("seed: expected a non-negative integer".into());
                1
            }
        };
        let output = match table.get("output") {
            None => None,
            Some(toml::Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
            Some(_) => {
                errs.push("output: expected a non-empty path string".into());
                None
            }
        };
        let sub = |name: &str, errs: &mut Vec<String>| -> toml::Table {
            match table.get(name) {
                None => toml::Table::new(),
                Some(toml::Value::Table(t)) => t.clone(),
                Some(_) => {
                    errs.push(format!("{name}: expected a table"));
                    toml::Table::new()
                }
            }
        };
        let params_in = sub("params", &mut errs);
        let tols_in = sub("tolerances", &mut errs);
        let Some(kind) = kind else {
            return Err(Error::Config(errs));
        };
        let mut cfg = ExperimentConfig::defaults(kind);
        cfg.seed = seed;
        cfg.output = output;
        let specs = super::schema::param_specs(kind);
        for (k, v) in &params_in {
            match specs.iter().find(|p| p.key == k) {
                None => errs.push(format!("params.{k}: unknown parameter for {kind}")),
                Some(spec) => match spec.ty.coerce(k, v) {
                    Ok(pv) => {
                        cfg.params.insert(k.clone(), pv);
                    }
                    Err(e) => errs.push(e),
                },
            }
        }
        for (k, v) in &tols_in {
            if !cfg.tolerances.contains_key(k) {
                errs.push(format!("tolerances.{k}: unknown tolerance for {kind}"));
                continue;
            }
            match as_f64(v) {
                Some(x) if x > 0.0 && x.is_finite() => {
                    cfg.tolerances.insert(k.clone(), x);
                }
                _ => errs.push(format!("tolerances.{k}: expected a positive number")),
            }
        }
        errs.extend(super::schema::cross_checks(&cfg));
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errs))
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_toml_str(&text)
    }

    fn get(&self, key: &str) -> Result<&ParamValue> {
        self.params.get(key).ok_or_else(|| Error::Config(vec![format!("params.{key}: missing")]))
    }

    fn wrong(&self, key: &str, what: &str) -> Error {
        Error::Config(vec![format!("params.{key}: expected {what}")])
    }

    pub fn int(&self, key: &str) -> Result<i64> {
        match self.get(key)? {
            ParamValue::Int(i) => Ok(*i),
            _ => Err(self.wrong(key, "an integer")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        Ok(self.int(key)?.max(0) as usize)
    }

    pub fn real(&self, key: &str) -> Result<f64> {
        match self.get(key)? {
            ParamValue::Real(x) => Ok(*x),
            ParamValue::Int(i) => Ok(*i as f64),
            _ => Err(self.wrong(key, "a number")),
        }
    }

    pub fn text(&self, key: &str) -> Result<&str> {
        match self.get(key)? {
            ParamValue::Text(s) => Ok(s),
            _ => Err(self.wrong(key, "a string")),
        }
    }

    pub fn grid(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key)? {
            ParamValue::Grid(g) => g.points(),
            _ => Err(self.wrong(key, "a grid")),
        }
    }

    pub fn ints(&self, key: &str) -> Result<Vec<i64>> {
        match self.get(key)? {
            ParamValue::Ints(v) => Ok(v.clone()),
            ParamValue::Int(i) => Ok(vec![*i]),
            _ => Err(self.wrong(key, "integers")),
        }
    }

    pub fn usizes(&self, key: &str) -> Result<Vec<usize>> {
        Ok(self.ints(key)?.into_iter().map(|i| i.max(0) as usize).collect())
    }

    pub fn reals(&self, key: &str) -> Result<Vec<f64>> {
        match self.get(key)? {
            ParamValue::Reals(v) => Ok(v.clone()),
            ParamValue::Real(x) => Ok(vec![*x]),
            _ => Err(self.wrong(key, "numbers")),
        }
    }

    pub fn texts(&self, key: &str) -> Result<Vec<String>> {
        match self.get(key)? {
            ParamValue::Texts(v) => Ok(v.clone()),
            ParamValue::Text(s) => Ok(vec![s.clone()]),
            _ => Err(self.wrong(key, "strings")),
        }
    }

    pub fn tolerance(&self, key: &str) -> Result<f64> {
        self.tolerances.get(key).copied().ok_or_else(|| Error::Config(vec![format!("tolerances.{key}: missing")]))
    }

    /// Overrides a parameter, checking it against the schema.
    pub fn set(&mut self, key: &str, value: toml::Value) -> Result<()> {
        let specs = super::schema::param_specs(self.kind);
        let spec = specs
            .iter()
            .find(|p| p.key == key)
            .ok_or_else(|| Error::Config(vec![format!("params.{key}: unknown parameter for {}", self.kind)]))?;
        let v = spec.ty.coerce(key, &value).map_err(|e| Error::Config(vec![e]))?;
        self.params.insert(key.to_string(), v);
        Ok(())
    }
}
