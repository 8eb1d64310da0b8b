//! Flat `key = value` run configuration: the key table, file parsing, the
//! merge of file values with flags and defaults, and typed accessors.

use std::collections::BTreeMap;
use std::path::Path;

use stochnlw::randomization::DistributionKind;
use stochnlw::solver::{Dealias, SolverConfig};
use stochnlw::spectral::{GridSpec, LinearFlow, WavePair};

use crate::error::CliError;

/// Every recognized key with its help text.
pub const KEYS: &[(&str, &str)] = &[
    ("d", "spatial dimension (3, 4 or 5)"),
    ("N", "grid points per axis (even)"),
    ("m", "odd period multiplier of the extended torus, or `auto`"),
    ("T", "final time, or the cutoff scale for `fsp`"),
    ("dt", "time step"),
    ("dist", "noise distribution: gaussian, bernoulli or uniform"),
    ("M", "number of noise samples"),
    ("seed", "base seed of the noise stream"),
    ("K", "partition budget constant, or `auto` for the data norm"),
    ("out", "output directory"),
    ("oversample", "grid refinement factor for norms of the free evolution"),
    ("q", "time exponent of the mixed norm (`inf` allowed)"),
    ("r", "space exponent of the mixed norm (`inf` allowed)"),
    ("flow", "linear flow sampled by `tail`: s_per or s_tilde"),
    ("steps", "time intervals used to sample the flow on [0, T]"),
    ("data", "deterministic data shape: power_law or equipartition"),
    ("radius", "frequency radius of the data"),
    ("decay", "power-law decay of the position coefficients"),
    ("amplitude", "coefficient amplitude"),
    ("dealias", "product rule: auto, two_thirds, zero_pad_3x, pad_2x or none"),
    ("mode", "`solve` target: full (u) or perturbed (v with z forcing)"),
    ("linear", "evolve with the free flow only (true or false)"),
    ("horizon", "comparison time for `fsp`, or `auto` for T"),
    ("margin", "light-cone slack in grid cells"),
    ("every", "solver steps between reported times"),
    ("levels", "comma-separated dyadic truncation levels"),
    ("perturbation", "H^1 size of the perturbed initial Picard iterate"),
    ("t_values", "comma-separated cutoff scales"),
    ("s_values", "comma-separated smoothness values"),
    ("functions", "number of random test functions"),
    ("p_values", "comma-separated moment orders"),
    ("gammas", "comma-separated moment-generating-function arguments"),
    ("component", "sampled generator: complex or zero"),
    ("tol", "acceptance tolerance"),
];

/// Keys that locate artifacts rather than determine them; they are not
/// echoed, so runs writing to different directories stay byte-identical.
pub const OUTPUT_KEYS: &[&str] = &["out"];

/// Keys of a subcommand with their defaults; `None` marks a required key.
pub type KeySpec = &'static [(&'static str, Option<&'static str>)];

pub fn help_of(key: &str) -> &'static str {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, h)| *h).unwrap_or("")
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_config_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{origin}:{}: expected `key = value`, got `{line}`", no + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(CliError::Usage(format!("{origin}:{}: empty key or value", no + 1)));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::Usage(format!("{origin}:{}: key `{key}` given twice", no + 1)));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config_text(&text, &path.display().to_string())
}

/// Resolved configuration of one subcommand: every key of its key table, with
/// flags taking precedence over the file and the file over defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn resolve(
        command: &str,
        spec: KeySpec,
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
    ) -> Result<Self, CliError> {
        for key in file.keys() {
            if !spec.iter().any(|(k, _)| k == key) {
                return Err(CliError::Usage(format!("unknown key `{key}` for `{command}`")));
            }
        }
        let mut values = BTreeMap::new();
        for (key, default) in spec {
            let value = flags
                .get(*key)
                .or_else(|| file.get(*key))
                .cloned()
                .or_else(|| default.map(str::to_string))
                .ok_or_else(|| {
                    CliError::Usage(format!("missing required key `{key}` (pass --{key} or set it in the config file)"))
                })?;
            values.insert(key.to_string(), value);
        }
        Ok(Self { command: command.to_string(), values })
    }

    /// Input keys and values, without the output location.
    pub fn inputs(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .filter(|(k, _)| !OUTPUT_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }

    /// Canonical `key = value` text of [`RunConfig::inputs`], sorted by key.
    pub fn canonical_text(&self) -> String {
        self.inputs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn str(&self, key: &str) -> &str {
        self.values
            .get(key)
            .map(String::as_str)
            .unwrap_or_else(|| panic!("key `{key}` is not part of `{}`", self.command))
    }

    fn invalid(&self, key: &str, why: impl std::fmt::Display) -> CliError {
        CliError::Usage(format!("invalid value `{}` for key `{key}`: {why}", self.str(key)))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_f64(self.str(key)).map_err(|e| self.invalid(key, e))
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v = self.f64(key)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.invalid(key, "must be positive and finite"))
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.str(key).parse().map_err(|e| self.invalid(key, e))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        self.str(key).parse().map_err(|e| self.invalid(key, e))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        self.str(key).parse().map_err(|e| self.invalid(key, e))
    }

    /// `None` for `auto`.
    pub fn auto_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        if self.str(key) == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    pub fn auto_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        if self.str(key) == "auto" {
            Ok(None)
        } else {
            self.usize(key).map(Some)
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let list: Vec<f64> = self
            .str(key)
            .split(',')
            .map(|v| parse_f64(v.trim()))
            .collect::<Result<_, _>>()
            .map_err(|e| self.invalid(key, e))?;
        if list.is_empty() {
            return Err(self.invalid(key, "empty list"));
        }
        Ok(list)
    }

    pub fn u64_list(&self, key: &str) -> Result<Vec<u64>, CliError> {
        self.str(key)
            .split(',')
            .map(|v| v.trim().parse::<u64>())
            .collect::<Result<_, _>>()
            .map_err(|e| self.invalid(key, e))
    }

    pub fn dist(&self) -> Result<DistributionKind, CliError> {
        match self.str("dist") {
            "gaussian" => Ok(DistributionKind::Gaussian),
            "bernoulli" => Ok(DistributionKind::Bernoulli),
            "uniform" => Ok(DistributionKind::Uniform),
            _ => Err(self.invalid("dist", "expected gaussian, bernoulli or uniform")),
        }
    }

    pub fn flow(&self) -> Result<LinearFlow, CliError> {
        match self.str("flow") {
            "s_per" => Ok(LinearFlow::SPer),
            "s_tilde" => Ok(LinearFlow::STilde),
            _ => Err(self.invalid("flow", "expected s_per or s_tilde")),
        }
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let d = self.usize("d")?;
        let n = self.usize("N")?;
        GridSpec::base(d, n).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Deterministic data pair on `grid` from the `data`, `radius`, `decay`
    /// and `amplitude` keys.
    pub fn data(&self, grid: GridSpec) -> Result<WavePair, CliError> {
        let radius = self.positive("radius")?;
        let decay = self.f64("decay")?;
        let amplitude = self.f64("amplitude")?;
        if !decay.is_finite() || !amplitude.is_finite() {
            return Err(CliError::Usage("decay and amplitude must be finite".into()));
        }
        match self.str("data") {
            "power_law" => Ok(WavePair::power_law(grid, radius, decay, amplitude)),
            "equipartition" => Ok(WavePair::equipartition(grid, radius, decay, amplitude)),
            _ => Err(self.invalid("data", "expected power_law or equipartition")),
        }
    }

    /// Solver settings from `dt` and `dealias`.
    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::with_dt(self.positive("dt")?);
        cfg.dealias = match self.str("dealias") {
            "auto" => None,
            other => Some(other.parse::<Dealias>().map_err(|e| self.invalid("dealias", e))?),
        };
        Ok(cfg)
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    match v {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => v.parse::<f64>().map_err(|e| e.to_string()).and_then(|x| {
            if x.is_nan() {
                Err("not a number".into())
            } else {
                Ok(x)
            }
        }),
    }
}
