//! Run configuration read from an INI file.
//!
//! ```ini
//! [physical]
//! delta = 0.1
//! v1 = 200
//! b_field = 1
//! phi_ab = 1
//! alpha = 0.5
//!
//! [quantum]
//! n = 0
//! m = 0
//!
//! [grid]
//! r_points = 4096
//! k_max = auto
//!
//! [sweep]
//! n,m = (0,0) (1,0) (1,1)
//! b_field = 1 2 4
//!
//! [output]
//! format = csv
//! ```
//!
//! Sweep axes are expanded as a Cartesian product, first axis outermost.
//! A compound key such as `n,m` varies several parameters together.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use thiserror::Error;

use crate::entropy::PipelineGrids;
use crate::model::{ModelError, ModelParams, QuantumNumbers};
use crate::spectral::MomentumGridSpec;
use crate::wavefunction::RadialGridSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key `{key}` in [{section}]")]
    UnknownKey { section: String, key: String },
    #[error("key `{key}` appears more than once in [{section}]")]
    DuplicateKey { section: String, key: String },
    #[error("[{section}] {key} = {value:?}: {reason}")]
    InvalidValue {
        section: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("{0}")]
    Conflict(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format `{other}`, expected csv or json")),
        }
    }
}

/// Aharonov-Bohm flux, given either directly or as a fraction of Φ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flux {
    PhiAb(f64),
    Xi(f64),
}

/// Physical inputs before conversion to couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physical {
    pub mass: f64,
    pub hbar: f64,
    pub charge: f64,
    pub light_speed: f64,
    pub delta: f64,
    pub v1: f64,
    pub b_field: f64,
    pub flux: Flux,
    pub alpha: f64,
}

impl Default for Physical {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            mass: p.mass,
            hbar: p.hbar,
            charge: p.charge,
            light_speed: p.light_speed,
            delta: p.delta,
            v1: p.v1,
            b_field: 0.0,
            flux: Flux::Xi(0.0),
            alpha: p.alpha,
        }
    }
}

impl Physical {
    pub fn to_params(&self) -> Result<ModelParams, ModelError> {
        let mut p = ModelParams {
            mass: self.mass,
            hbar: self.hbar,
            charge: self.charge,
            light_speed: self.light_speed,
            delta: self.delta,
            v1: self.v1,
            alpha: self.alpha,
            ..ModelParams::default()
        };
        p.set_field(self.b_field);
        match self.flux {
            Flux::PhiAb(phi) => p.set_flux(phi),
            Flux::Xi(xi) => p.xi = xi,
        }
        p.validate()?;
        Ok(p)
    }
}

/// Parameters that may appear in `[sweep]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    N,
    M,
    BField,
    PhiAb,
    Xi,
    Alpha,
    Delta,
    V1,
    Mass,
    Hbar,
    Charge,
    LightSpeed,
}

impl SweepParam {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "n" => Self::N,
            "m" => Self::M,
            "b_field" | "B" => Self::BField,
            "phi_ab" => Self::PhiAb,
            "xi" => Self::Xi,
            "alpha" => Self::Alpha,
            "delta" => Self::Delta,
            "v1" => Self::V1,
            "mass" => Self::Mass,
            "hbar" => Self::Hbar,
            "charge" => Self::Charge,
            "light_speed" => Self::LightSpeed,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::N => "n",
            Self::M => "m",
            Self::BField => "b_field",
            Self::PhiAb => "phi_ab",
            Self::Xi => "xi",
            Self::Alpha => "alpha",
            Self::Delta => "delta",
            Self::V1 => "v1",
            Self::Mass => "mass",
            Self::Hbar => "hbar",
            Self::Charge => "charge",
            Self::LightSpeed => "light_speed",
        }
    }

    fn apply(self, value: f64, physical: &mut Physical, qn: &mut QuantumNumbers) {
        match self {
            Self::N => qn.n = value as u32,
            Self::M => qn.m = value as i32,
            Self::BField => physical.b_field = value,
            Self::PhiAb => physical.flux = Flux::PhiAb(value),
            Self::Xi => physical.flux = Flux::Xi(value),
            Self::Alpha => physical.alpha = value,
            Self::Delta => physical.delta = value,
            Self::V1 => physical.v1 = value,
            Self::Mass => physical.mass = value,
            Self::Hbar => physical.hbar = value,
            Self::Charge => physical.charge = value,
            Self::LightSpeed => physical.light_speed = value,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One `[sweep]` line: parameters varied together and their value tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub params: Vec<SweepParam>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub r_points: usize,
    pub k_points: usize,
    pub r_max: Option<f64>,
    pub k_max: Option<f64>,
    pub convergence_check: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = PipelineGrids::default();
        Self {
            r_points: g.radial.points,
            k_points: g.momentum.points,
            r_max: g.radial.r_max,
            k_max: g.momentum.k_max,
            convergence_check: g.convergence_check,
        }
    }
}

impl GridConfig {
    pub fn pipeline_grids(&self) -> PipelineGrids {
        PipelineGrids {
            radial: RadialGridSpec {
                points: self.r_points,
                r_max: self.r_max,
            },
            momentum: MomentumGridSpec {
                points: self.k_points,
                k_max: self.k_max,
            },
            convergence_check: self.convergence_check,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
}

/// Curve families for the figure data.
#[derive(Debug, Clone, PartialEq)]
pub struct FiguresConfig {
    /// Outer radius of the effective-potential curves.
    pub r_max: f64,
    /// Outer radius of the density curves; `None` follows each state's tail.
    pub density_r_max: Option<f64>,
    pub points: usize,
    pub b_field: Vec<f64>,
    pub alpha: Vec<f64>,
    pub phi_ab: Vec<f64>,
}

impl Default for FiguresConfig {
    fn default() -> Self {
        Self {
            r_max: 10.0,
            density_r_max: None,
            points: 1001,
            b_field: Vec::new(),
            alpha: Vec::new(),
            phi_ab: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub physical: Physical,
    pub qn: QuantumNumbers,
    pub grid: GridConfig,
    pub sweep: Vec<SweepAxis>,
    pub output: OutputConfig,
    pub figures: FiguresConfig,
}

/// A fully resolved sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub physical: Physical,
    pub qn: QuantumNumbers,
    pub params: ModelParams,
}

impl SweepPoint {
    pub fn b_field(&self) -> f64 {
        self.physical.b_field
    }

    /// Φ_AB as configured, converted only when the config gave ξ.
    pub fn phi_ab(&self) -> f64 {
        match self.physical.flux {
            Flux::PhiAb(phi) => phi,
            Flux::Xi(_) => self.params.flux(),
        }
    }

    pub fn xi(&self) -> f64 {
        match self.physical.flux {
            Flux::Xi(xi) => xi,
            Flux::PhiAb(_) => self.params.xi,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        text.parse()
    }

    /// Sweep points in output order. A config without sweep axes yields
    /// its base point alone.
    pub fn points(&self) -> Result<Vec<SweepPoint>, ConfigError> {
        let mut combos: Vec<(Physical, QuantumNumbers)> = vec![(self.physical, self.qn)];
        for axis in &self.sweep {
            combos = combos
                .into_iter()
                .flat_map(|(physical, qn)| {
                    axis.values.iter().map(move |tuple| {
                        let (mut p, mut q) = (physical, qn);
                        for (param, &v) in axis.params.iter().zip(tuple) {
                            param.apply(v, &mut p, &mut q);
                        }
                        (p, q)
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|(physical, qn)| {
                Ok(SweepPoint {
                    physical,
                    qn,
                    params: physical.to_params()?,
                })
            })
            .collect()
    }
}

impl FromStr for RunConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let mut cfg = RunConfig::default();
        let mut flux_keys = Vec::new();

        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            let mut seen = Vec::new();
            for (key, value) in props.iter() {
                if seen.contains(&key) {
                    return Err(ConfigError::DuplicateKey {
                        section: section.into(),
                        key: key.into(),
                    });
                }
                seen.push(key);
                let field = Field {
                    section,
                    key,
                    value: value.trim(),
                };
                match section {
                    "physical" => read_physical(&mut cfg.physical, &field, &mut flux_keys)?,
                    "quantum" => match key {
                        "n" => cfg.qn.n = field.parse_n()?,
                        "m" => cfg.qn.m = field.parse_m()?,
                        _ => return Err(field.unknown()),
                    },
                    "grid" => read_grid(&mut cfg.grid, &field)?,
                    "sweep" => cfg.sweep.push(field.parse_axis()?),
                    "output" => match key {
                        "format" => cfg.output.format = field.parse_with(OutputFormat::from_str)?,
                        "path" => cfg.output.path = Some(PathBuf::from(field.value)),
                        _ => return Err(field.unknown()),
                    },
                    "figures" => read_figures(&mut cfg.figures, &field)?,
                    "" => return Err(field.unknown()),
                    other => return Err(ConfigError::UnknownSection(other.into())),
                }
            }
            if seen.is_empty()
                && !matches!(
                    section,
                    "" | "physical" | "quantum" | "grid" | "sweep" | "output" | "figures"
                )
            {
                return Err(ConfigError::UnknownSection(section.into()));
            }
        }
        if flux_keys.len() > 1 {
            return Err(ConfigError::Conflict(
                "give the flux as either xi or phi_ab, not both".into(),
            ));
        }
        for axis in &cfg.sweep {
            for param in &axis.params {
                if cfg
                    .sweep
                    .iter()
                    .filter(|a| a.params.contains(param))
                    .count()
                    > 1
                {
                    return Err(ConfigError::Conflict(format!(
                        "`{param}` is swept by more than one axis"
                    )));
                }
            }
        }
        cfg.points()?;
        Ok(cfg)
    }
}

struct Field<'a> {
    section: &'a str,
    key: &'a str,
    value: &'a str,
}

impl Field<'_> {
    fn invalid(&self, reason: impl Into<String>) -> ConfigError {
        ConfigError::InvalidValue {
            section: self.section.into(),
            key: self.key.into(),
            value: self.value.into(),
            reason: reason.into(),
        }
    }

    fn unknown(&self) -> ConfigError {
        ConfigError::UnknownKey {
            section: self.section.into(),
            key: self.key.into(),
        }
    }

    fn parse_with<T>(&self, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        f(self.value).map_err(|reason| self.invalid(reason))
    }

    fn parse_f64(&self) -> Result<f64, ConfigError> {
        self.parse_with(parse_number)
    }

    fn parse_n(&self) -> Result<u32, ConfigError> {
        self.parse_with(|s| parse_number(s).and_then(check_n).map(|v| v as u32))
    }

    fn parse_m(&self) -> Result<i32, ConfigError> {
        self.parse_with(|s| parse_number(s).and_then(check_m).map(|v| v as i32))
    }

    fn parse_count(&self) -> Result<usize, ConfigError> {
        self.value
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 2)
            .ok_or_else(|| self.invalid("expected an integer of at least 2"))
    }

    /// `auto` or a positive number.
    fn parse_extent(&self) -> Result<Option<f64>, ConfigError> {
        if self.value.eq_ignore_ascii_case("auto") {
            return Ok(None);
        }
        let v = self.parse_f64()?;
        if !(v > 0.0) {
            return Err(self.invalid("expected `auto` or a positive number"));
        }
        Ok(Some(v))
    }

    fn parse_list(&self) -> Result<Vec<f64>, ConfigError> {
        self.parse_with(parse_list)
    }

    fn parse_axis(&self) -> Result<SweepAxis, ConfigError> {
        let params = self
            .key
            .split(',')
            .map(|name| {
                SweepParam::parse(name.trim()).ok_or_else(|| {
                    self.invalid(format!("`{}` is not a sweepable parameter", name.trim()))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (i, p) in params.iter().enumerate() {
            if params[..i].contains(p) {
                return Err(self.invalid(format!("`{p}` listed twice")));
            }
        }
        let values = if params.len() == 1 {
            self.parse_list()?.into_iter().map(|v| vec![v]).collect()
        } else {
            self.parse_with(|s| parse_tuples(s, params.len()))?
        };
        if values.is_empty() {
            return Err(self.invalid("sweep axis has no values"));
        }
        for tuple in &values {
            for (p, &v) in params.iter().zip(tuple) {
                let check = match p {
                    SweepParam::N => check_n(v).map(drop),
                    SweepParam::M => check_m(v).map(drop),
                    _ => Ok(()),
                };
                check.map_err(|reason| self.invalid(reason))?;
            }
        }
        Ok(SweepAxis { params, values })
    }
}

fn read_physical(
    p: &mut Physical,
    field: &Field,
    flux_keys: &mut Vec<String>,
) -> Result<(), ConfigError> {
    let v = field.parse_f64()?;
    match field.key {
        "mass" => p.mass = v,
        "hbar" => p.hbar = v,
        "charge" => p.charge = v,
        "light_speed" => p.light_speed = v,
        "delta" => p.delta = v,
        "v1" => p.v1 = v,
        "b_field" | "B" => p.b_field = v,
        "alpha" => p.alpha = v,
        "xi" => {
            p.flux = Flux::Xi(v);
            flux_keys.push(field.key.into());
        }
        "phi_ab" => {
            p.flux = Flux::PhiAb(v);
            flux_keys.push(field.key.into());
        }
        _ => return Err(field.unknown()),
    }
    Ok(())
}

fn read_grid(g: &mut GridConfig, field: &Field) -> Result<(), ConfigError> {
    match field.key {
        "r_points" => g.r_points = field.parse_count()?,
        "k_points" => g.k_points = field.parse_count()?,
        "r_max" => g.r_max = field.parse_extent()?,
        "k_max" => g.k_max = field.parse_extent()?,
        "convergence_check" => {
            g.convergence_check = field.parse_with(|s| {
                s.parse::<bool>()
                    .map_err(|_| "expected true or false".to_string())
            })?
        }
        _ => return Err(field.unknown()),
    }
    Ok(())
}

fn read_figures(f: &mut FiguresConfig, field: &Field) -> Result<(), ConfigError> {
    match field.key {
        "r_max" => {
            f.r_max = field
                .parse_extent()?
                .ok_or_else(|| field.invalid("expected a positive number"))?
        }
        "density_r_max" => f.density_r_max = field.parse_extent()?,
        "points" => f.points = field.parse_count()?,
        "b_field" | "B" => f.b_field = field.parse_list()?,
        "alpha" => f.alpha = field.parse_list()?,
        "phi_ab" => f.phi_ab = field.parse_list()?,
        _ => return Err(field.unknown()),
    }
    Ok(())
}

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", s.trim()));
    }
    Ok(v)
}

fn check_n(v: f64) -> Result<f64, String> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v)
    } else {
        Err(format!("n must be a non-negative integer, got {v}"))
    }
}

fn check_m(v: f64) -> Result<f64, String> {
    if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 {
        Ok(v)
    } else {
        Err(format!("m must be an integer, got {v}"))
    }
}

/// Whitespace- or comma-separated numbers.
fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(parse_number)
        .collect()
}

/// `(a,b) (c,d) ...`, each tuple of length `arity`.
fn parse_tuples(s: &str, arity: usize) -> Result<Vec<Vec<f64>>, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut rest = compact.as_str();
    let mut tuples = Vec::new();
    while !rest.is_empty() {
        rest = rest.strip_prefix(',').unwrap_or(rest);
        let inner = rest
            .strip_prefix('(')
            .ok_or_else(|| format!("expected `(` at `{rest}`"))?;
        let close = inner.find(')').ok_or_else(|| "unclosed `(`".to_string())?;
        let tuple = inner[..close]
            .split(',')
            .map(parse_number)
            .collect::<Result<Vec<_>, _>>()?;
        if tuple.len() != arity {
            return Err(format!(
                "tuple ({}) has {} values, expected {arity}",
                &inner[..close],
                tuple.len()
            ));
        }
        tuples.push(tuple);
        rest = &inner[close + 1..];
    }
    Ok(tuples)
}
