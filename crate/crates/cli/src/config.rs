use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use krylov_gauss::{DiracKind, DiracModeParams, StateFamily, TfdParams};

use crate::error::{CliError, CliResult};

pub const DEFAULT_ORDER: usize = 24;
pub const MAX_ORDER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Coherent,
    Squeezed,
    #[value(alias = "displaced_squeezed")]
    DisplacedSqueezed,
    #[value(alias = "two_mode")]
    TwoMode,
    #[value(alias = "single_mode")]
    SingleMode,
    Tfd,
    #[value(alias = "fermion_pair")]
    FermionPair,
    Dirac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Ground,
    Excited,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Exact,
    Float(usize),
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "exact" {
            return Ok(Precision::Exact);
        }
        let bits = s
            .strip_prefix("float:")
            .ok_or_else(|| format!("precision must be `exact` or `float:BITS` (got `{s}`)"))?;
        bits.parse()
            .map(Precision::Float)
            .map_err(|_| format!("invalid mantissa width `{bits}`"))
    }
}

/// Flags shared by every command. Each may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "lambda-r")]
    pub lambda_r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Evaluation time for the thermofield double bound.
    #[arg(long, allow_negative_numbers = true)]
    pub time: Option<f64>,
    /// Momentum magnitude |p|.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fock truncation per mode.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Jet order for the moment route.
    #[arg(long)]
    pub order: Option<usize>,
    /// `exact` or `float:BITS`.
    #[arg(long)]
    pub precision: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Plain-text `key = value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Fully merged configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub family: Option<FamilyArg>,
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_r: Option<f64>,
    pub omega: Option<f64>,
    pub time: Option<f64>,
    pub p: Option<f64>,
    pub mass: Option<f64>,
    pub cutoff: Option<f64>,
    pub kind: KindArg,
    pub t_max: f64,
    pub t_steps: usize,
    pub dim: Option<usize>,
    pub order: usize,
    pub precision: Precision,
    pub output: Option<PathBuf>,
    pub format: FormatArg,
}

const KEYS: &[&str] = &[
    "family", "alpha", "eta", "r", "theta", "phi", "lambda", "lambda-r", "omega", "time", "p",
    "mass", "cutoff", "kind", "tmax", "steps", "dim", "order", "precision", "output", "format",
];

/// Parameter names accepted by `sweep --vary`.
pub const NUMERIC_KEYS: &[&str] = &[
    "alpha", "eta", "r", "theta", "phi", "lambda", "lambda-r", "omega", "time", "p", "mass", "cutoff",
];

fn normalize_key(key: &str) -> String {
    let key = key.trim().to_ascii_lowercase().replace('_', "-");
    if key == "m" {
        "mass".into()
    } else {
        key
    }
}

pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!("config line {}: expected `key = value`", lineno + 1))
        })?;
        let key = normalize_key(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Validation(format!(
                "config line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn read_config(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config_text(&text)
}

fn pick<T: FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::Validation(format!("invalid value `{v}` for `{key}`")))
        })
        .transpose()
}

fn pick_enum<T: ValueEnum>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|v| {
            T::from_str(v, true).map_err(|_| CliError::Validation(format!("invalid value `{v}` for `{key}`")))
        })
        .transpose()
}

impl RunConfig {
    pub fn resolve(params: &Params) -> CliResult<Self> {
        let file = match &params.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let precision = match pick(params.precision.clone(), &file, "precision")? {
            Some(s) => s.parse::<Precision>().map_err(CliError::Validation)?,
            None => Precision::Exact,
        };
        let cfg = RunConfig {
            family: pick_enum(params.family, &file, "family")?,
            alpha: pick(params.alpha, &file, "alpha")?,
            eta: pick(params.eta, &file, "eta")?,
            r: pick(params.r, &file, "r")?,
            theta: pick(params.theta, &file, "theta")?,
            phi: pick(params.phi, &file, "phi")?,
            lambda: pick(params.lambda, &file, "lambda")?,
            lambda_r: pick(params.lambda_r, &file, "lambda-r")?,
            omega: pick(params.omega, &file, "omega")?,
            time: pick(params.time, &file, "time")?,
            p: pick(params.p, &file, "p")?,
            mass: pick(params.mass, &file, "mass")?,
            cutoff: pick(params.cutoff, &file, "cutoff")?,
            kind: pick_enum(params.kind, &file, "kind")?.unwrap_or(KindArg::Ground),
            t_max: pick(params.tmax, &file, "tmax")?.unwrap_or(1.0),
            t_steps: pick(params.steps, &file, "steps")?.unwrap_or(101),
            dim: pick(params.dim, &file, "dim")?,
            order: pick(params.order, &file, "order")?.unwrap_or(DEFAULT_ORDER),
            precision,
            output: pick(params.output.clone(), &file, "output")?,
            format: pick_enum(params.format, &file, "format")?.unwrap_or(FormatArg::Csv),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.t_steps < 2 {
            return Err(CliError::Validation(format!("--steps must be at least 2 (got {})", self.t_steps)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(CliError::Validation(format!("--tmax must be positive (got {})", self.t_max)));
        }
        if self.order < 2 || self.order > MAX_ORDER {
            return Err(CliError::Validation(format!(
                "--order must lie in 2..={MAX_ORDER} (got {})",
                self.order
            )));
        }
        if let Precision::Float(bits) = self.precision {
            if bits < 128 {
                return Err(CliError::Validation(format!("float precision needs at least 128 bits (got {bits})")));
            }
        }
        if self.dim == Some(0) {
            return Err(CliError::Validation("--dim must be positive".into()));
        }
        Ok(())
    }

    pub fn require_family(&self) -> CliResult<FamilyArg> {
        self.family
            .ok_or_else(|| CliError::Validation("--family is required for this command".into()))
    }

    pub fn with(&self, key: &str, value: f64) -> CliResult<Self> {
        let mut out = self.clone();
        let slot = match key {
            "alpha" => &mut out.alpha,
            "eta" => &mut out.eta,
            "r" => &mut out.r,
            "theta" => &mut out.theta,
            "phi" => &mut out.phi,
            "lambda" => &mut out.lambda,
            "lambda-r" => &mut out.lambda_r,
            "omega" => &mut out.omega,
            "time" => &mut out.time,
            "p" => &mut out.p,
            "mass" => &mut out.mass,
            "cutoff" => &mut out.cutoff,
            _ => return Err(CliError::Validation(format!("cannot vary `{key}`"))),
        };
        *slot = Some(value);
        Ok(out)
    }

    pub fn tfd_params(&self) -> CliResult<TfdParams> {
        Ok(TfdParams::new(
            self.lambda.unwrap_or(1.0),
            self.lambda_r.unwrap_or(1.0),
            self.alpha.unwrap_or(1.0),
        )?
        .at_time(self.omega.unwrap_or(1.0), self.time.unwrap_or(0.0)))
    }

    pub fn dirac_params(&self) -> DiracModeParams {
        DiracModeParams {
            p_mag: self.p.unwrap_or(1.0),
            m: self.mass.unwrap_or(1.0),
            cutoff: self.cutoff.unwrap_or(10.0),
        }
    }

    pub fn dirac_kind(&self) -> DiracKind {
        match self.kind {
            KindArg::Ground => DiracKind::Ground,
            KindArg::Excited => DiracKind::Excited,
        }
    }

    /// Family record for the state-based families.
    pub fn state_family(&self) -> CliResult<StateFamily> {
        let family = match self.require_family()? {
            FamilyArg::Coherent => StateFamily::Coherent {
                alpha: self.alpha.unwrap_or(1.0),
            },
            FamilyArg::Squeezed => StateFamily::Squeezed {
                eta: self.eta.unwrap_or(1.0),
            },
            FamilyArg::DisplacedSqueezed => StateFamily::DisplacedSqueezed {
                alpha: self.alpha.unwrap_or(1.0),
                eta: self.eta.unwrap_or(1.0),
            },
            FamilyArg::TwoMode => StateFamily::TwoMode {
                r: self.r.unwrap_or(1.0),
                theta: self.theta.unwrap_or(0.0),
            },
            FamilyArg::Tfd => StateFamily::Tfd {
                params: self.tfd_params()?,
                minus: false,
            },
            FamilyArg::FermionPair => StateFamily::FermionPair {
                theta: self.theta.unwrap_or(std::f64::consts::FRAC_PI_2),
                phi: self.phi.unwrap_or(0.0),
            },
            FamilyArg::Dirac => StateFamily::DiracMode {
                params: self.dirac_params(),
                kind: self.dirac_kind(),
            },
            FamilyArg::SingleMode => {
                return Err(CliError::Validation(
                    "single_mode is a covariance family; use the bound command".into(),
                ))
            }
        };
        family.validate()?;
        Ok(family)
    }
}
