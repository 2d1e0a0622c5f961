//! Flat `[section]` / `key = value` run configuration.
//!
//! ```text
//! [model]
//! nu = 0.1
//! epsilon = 0.1
//! delta = 0.001
//! epsilon_sign = 1
//!
//! [domain]
//! length = 1
//! n = 128
//! bc = periodic          # or neumann
//!
//! [eos]
//! kind = cubic           # or zero
//! a3 = 1
//! a1 = -1
//! threshold = 2
//! slope_inf = auto       # or a number
//! width = 1
//!
//! [time]
//! scheme = etd1          # or imex1
//! dt = auto              # or a number
//! t_end = 1
//! stride = 10
//!
//! [initial]
//! kind = random          # or cosine
//! mean = 0.3
//! amplitude = 0.05       # random
//! seed = 0               # random
//! cutoff = 4             # random
//! modes = 1, 3           # cosine
//! amplitudes = 0.02, 0.01
//!
//! [output]
//! dir = out
//!
//! [tolerances]
//! certificate = 0.001
//! linear = 1e-12
//! mass = 1e-10
//! boundary = 1e-8
//! ```
//!
//! Every key is optional. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dynamics::{InitialCondition, Params, SchemeChoice};
use crate::eos::EquationOfState;
use crate::spectral::{BoundaryCondition, Grid};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// 1-based line of the offending entry, if it came from the text.
    pub line: Option<usize>,
    /// `section.key`, when the error concerns one entry.
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EosKind {
    Cubic,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Cosine,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    /// Relative slack of both energy certificates.
    pub certificate: f64,
    /// Relative error allowed by `linear-check`.
    pub linear: f64,
    /// Absolute mass drift reported as acceptable.
    pub mass: f64,
    /// `max(|u_x|, |u_xxx|)` at the walls relative to `||u||_{H^3}`.
    pub boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            certificate: 1e-3,
            linear: 1e-12,
            mass: 1e-10,
            boundary: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub nu: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub epsilon_sign: f64,

    pub length: f64,
    pub n: usize,
    pub bc: BoundaryCondition,

    pub eos_kind: EosKind,
    pub a3: f64,
    pub a1: f64,
    pub threshold: f64,
    pub slope_inf: Option<f64>,
    pub width: f64,

    pub scheme: SchemeChoice,
    pub dt: TimeStep,
    pub t_end: f64,
    pub stride: usize,

    pub initial_kind: InitialKind,
    pub mean: f64,
    pub modes: Vec<u32>,
    pub amplitudes: Vec<f64>,
    pub amplitude: f64,
    pub seed: u64,
    pub cutoff: f64,

    pub output_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            nu: 0.1,
            epsilon: 0.1,
            delta: 0.001,
            epsilon_sign: 1.0,
            length: 1.0,
            n: 128,
            bc: BoundaryCondition::Periodic,
            eos_kind: EosKind::Cubic,
            a3: 1.0,
            a1: -1.0,
            threshold: 2.0,
            slope_inf: None,
            width: 1.0,
            scheme: SchemeChoice::Etd1,
            dt: TimeStep::Auto,
            t_end: 1.0,
            stride: 10,
            initial_kind: InitialKind::Random,
            mean: 0.3,
            modes: Vec::new(),
            amplitudes: Vec::new(),
            amplitude: 0.05,
            seed: 0,
            cutoff: 4.0,
            output_dir: None,
            tolerances: Tolerances::default(),
        }
    }
}

const SECTIONS: [&str; 7] = ["model", "domain", "eos", "time", "initial", "output", "tolerances"];

fn entry_error(line: usize, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line: Some(line),
        key: Some(key.to_string()),
        message: message.into(),
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, raw: &str, what: &str) -> Result<T, ConfigError> {
    raw.parse()
        .map_err(|_| entry_error(line, key, format!("expected {what}, got `{raw}`")))
}

fn parse_list<T: FromStr>(line: usize, key: &str, raw: &str, what: &str) -> Result<Vec<T>, ConfigError> {
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|item| parse_value(line, key, item.trim(), what))
        .collect()
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn unquote(raw: &str) -> &str {
    raw.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(raw)
}

/// Parses and validates a configuration; missing keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut section: Option<&str> = None;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = strip_comment(raw_line).trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| ConfigError {
                line: Some(line),
                key: None,
                message: format!("malformed section header `{content}`"),
            })?;
            let name = name.trim();
            section = Some(SECTIONS.iter().copied().find(|s| *s == name).ok_or_else(|| ConfigError {
                line: Some(line),
                key: None,
                message: format!("unknown section `[{name}]`"),
            })?);
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError {
            line: Some(line),
            key: None,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = unquote(value.trim());
        let sec = section.ok_or_else(|| entry_error(line, key, "key appears before any [section]"))?;
        let path = format!("{sec}.{key}");
        if let Some(first) = seen.insert(path.clone(), line) {
            return Err(entry_error(line, &path, format!("duplicate key (first set on line {first})")));
        }
        cfg.set(sec, key, value, line, &path)?;
    }

    cfg.validate_at(&seen)?;
    Ok(cfg)
}

impl RunConfig {
    fn set(&mut self, sec: &str, key: &str, v: &str, line: usize, path: &str) -> Result<(), ConfigError> {
        let num = |what| parse_value::<f64>(line, path, v, what);
        match (sec, key) {
            ("model", "nu") => self.nu = num("a number")?,
            ("model", "epsilon") => self.epsilon = num("a number")?,
            ("model", "delta") => self.delta = num("a number")?,
            ("model", "epsilon_sign") => self.epsilon_sign = num("+1 or -1")?,
            ("domain", "length") => self.length = num("a number")?,
            ("domain", "n") => self.n = parse_value(line, path, v, "a non-negative integer")?,
            ("domain", "bc") => self.bc = parse_value(line, path, v, "`periodic` or `neumann`")?,
            ("eos", "kind") => {
                self.eos_kind = match v {
                    "cubic" => EosKind::Cubic,
                    "zero" => EosKind::Zero,
                    _ => return Err(entry_error(line, path, format!("expected `cubic` or `zero`, got `{v}`"))),
                }
            }
            ("eos", "a3") => self.a3 = num("a number")?,
            ("eos", "a1") => self.a1 = num("a number")?,
            ("eos", "threshold") => self.threshold = num("a number")?,
            ("eos", "slope_inf") => {
                self.slope_inf = if v == "auto" { None } else { Some(num("a number or `auto`")?) }
            }
            ("eos", "width") => self.width = num("a number")?,
            ("time", "scheme") => self.scheme = parse_value(line, path, v, "`etd1` or `imex1`")?,
            ("time", "dt") => {
                self.dt = if v == "auto" {
                    TimeStep::Auto
                } else {
                    TimeStep::Fixed(num("a number or `auto`")?)
                }
            }
            ("time", "t_end") => self.t_end = num("a number")?,
            ("time", "stride") => self.stride = parse_value(line, path, v, "a non-negative integer")?,
            ("initial", "kind") => {
                self.initial_kind = match v {
                    "cosine" => InitialKind::Cosine,
                    "random" => InitialKind::Random,
                    _ => return Err(entry_error(line, path, format!("expected `cosine` or `random`, got `{v}`"))),
                }
            }
            ("initial", "mean") => self.mean = num("a number")?,
            ("initial", "modes") => self.modes = parse_list(line, path, v, "a comma-separated list of integers")?,
            ("initial", "amplitudes") => {
                self.amplitudes = parse_list(line, path, v, "a comma-separated list of numbers")?
            }
            ("initial", "amplitude") => self.amplitude = num("a number")?,
            ("initial", "seed") => self.seed = parse_value(line, path, v, "a non-negative integer")?,
            ("initial", "cutoff") => self.cutoff = num("a number")?,
            ("output", "dir") => self.output_dir = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            ("tolerances", "certificate") => self.tolerances.certificate = num("a number")?,
            ("tolerances", "linear") => self.tolerances.linear = num("a number")?,
            ("tolerances", "mass") => self.tolerances.mass = num("a number")?,
            ("tolerances", "boundary") => self.tolerances.boundary = num("a number")?,
            _ => return Err(entry_error(line, path, "unknown key")),
        }
        Ok(())
    }

    /// Checks cross-field invariants without line information.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_at(&BTreeMap::new())
    }

    fn validate_at(&self, lines: &BTreeMap<String, usize>) -> Result<(), ConfigError> {
        let fail = |path: &str, message: String| ConfigError {
            line: lines.get(path).copied(),
            key: Some(path.to_string()),
            message,
        };
        let finite = |path: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(fail(path, format!("must be finite, got {v}")))
            }
        };
        let positive = |path: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(fail(path, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |path: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(fail(path, format!("must be non-negative, got {v}")))
            }
        };

        non_negative("model.nu", self.nu)?;
        non_negative("model.epsilon", self.epsilon)?;
        positive("model.delta", self.delta)?;
        if self.epsilon_sign != 1.0 && self.epsilon_sign != -1.0 {
            return Err(fail("model.epsilon_sign", format!("must be 1 or -1, got {}", self.epsilon_sign)));
        }
        positive("domain.length", self.length)?;
        if self.n < crate::spectral::MIN_POINTS || self.n % 2 != 0 {
            return Err(fail(
                "domain.n",
                format!("must be even and at least {}, got {}", crate::spectral::MIN_POINTS, self.n),
            ));
        }
        if self.eos_kind == EosKind::Cubic {
            finite("eos.a3", self.a3)?;
            finite("eos.a1", self.a1)?;
            self.eos().map_err(|e| {
                let path = match e {
                    crate::eos::EosError::InvalidThreshold(_) => "eos.threshold",
                    crate::eos::EosError::InvalidWidth(_) => "eos.width",
                    crate::eos::EosError::InvalidSlope(_) => "eos.slope_inf",
                    _ => "eos.a3",
                };
                fail(path, e.to_string())
            })?;
        }
        if let TimeStep::Fixed(dt) = self.dt {
            positive("time.dt", dt)?;
        }
        positive("time.t_end", self.t_end)?;
        if self.stride == 0 {
            return Err(fail("time.stride", "must be at least 1".into()));
        }
        finite("initial.mean", self.mean)?;
        match self.initial_kind {
            InitialKind::Cosine => {
                if self.modes.len() != self.amplitudes.len() {
                    return Err(fail(
                        "initial.amplitudes",
                        format!("{} amplitudes for {} modes", self.amplitudes.len(), self.modes.len()),
                    ));
                }
                for &a in &self.amplitudes {
                    finite("initial.amplitudes", a)?;
                }
            }
            InitialKind::Random => {
                non_negative("initial.amplitude", self.amplitude)?;
                positive("initial.cutoff", self.cutoff)?;
            }
        }
        positive("tolerances.certificate", self.tolerances.certificate)?;
        positive("tolerances.linear", self.tolerances.linear)?;
        positive("tolerances.mass", self.tolerances.mass)?;
        positive("tolerances.boundary", self.tolerances.boundary)?;
        Ok(())
    }

    pub fn params(&self) -> Params {
        Params::new(self.nu, self.epsilon, self.delta, self.length, self.bc)
            .and_then(|p| p.with_epsilon_sign(self.epsilon_sign))
            .expect("validated configuration")
    }

    pub fn eos(&self) -> Result<EquationOfState, crate::eos::EosError> {
        match self.eos_kind {
            EosKind::Zero => Ok(EquationOfState::zero()),
            EosKind::Cubic => EquationOfState::blended(self.a3, self.a1, self.threshold, self.slope_inf, self.width),
        }
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.length, self.n, self.bc).expect("validated configuration")
    }

    pub fn initial(&self) -> InitialCondition {
        match self.initial_kind {
            InitialKind::Cosine => InitialCondition::Cosine {
                mean: self.mean,
                modes: self.modes.iter().copied().zip(self.amplitudes.iter().copied()).collect(),
            },
            InitialKind::Random => InitialCondition::Random {
                mean: self.mean,
                amplitude: self.amplitude,
                seed: self.seed,
                cutoff: self.cutoff,
            },
        }
    }

    /// Full configuration text; `parse_config(&cfg.serialize()) == Ok(cfg)`.
    pub fn serialize(&self) -> String {
        let list = |items: Vec<String>| items.join(", ");
        let mut out = String::new();
        let mut push = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        push("[model]".into());
        push(format!("nu = {:?}", self.nu));
        push(format!("epsilon = {:?}", self.epsilon));
        push(format!("delta = {:?}", self.delta));
        push(format!("epsilon_sign = {:?}", self.epsilon_sign));
        push(String::new());
        push("[domain]".into());
        push(format!("length = {:?}", self.length));
        push(format!("n = {}", self.n));
        push(format!("bc = {}", self.bc));
        push(String::new());
        push("[eos]".into());
        push(format!(
            "kind = {}",
            match self.eos_kind {
                EosKind::Cubic => "cubic",
                EosKind::Zero => "zero",
            }
        ));
        push(format!("a3 = {:?}", self.a3));
        push(format!("a1 = {:?}", self.a1));
        push(format!("threshold = {:?}", self.threshold));
        push(match self.slope_inf {
            Some(s) => format!("slope_inf = {s:?}"),
            None => "slope_inf = auto".into(),
        });
        push(format!("width = {:?}", self.width));
        push(String::new());
        push("[time]".into());
        push(format!("scheme = {}", self.scheme.name()));
        push(match self.dt {
            TimeStep::Auto => "dt = auto".into(),
            TimeStep::Fixed(dt) => format!("dt = {dt:?}"),
        });
        push(format!("t_end = {:?}", self.t_end));
        push(format!("stride = {}", self.stride));
        push(String::new());
        push("[initial]".into());
        push(format!(
            "kind = {}",
            match self.initial_kind {
                InitialKind::Cosine => "cosine",
                InitialKind::Random => "random",
            }
        ));
        push(format!("mean = {:?}", self.mean));
        push(format!("modes = {}", list(self.modes.iter().map(|m| m.to_string()).collect())));
        push(format!("amplitudes = {}", list(self.amplitudes.iter().map(|a| format!("{a:?}")).collect())));
        push(format!("amplitude = {:?}", self.amplitude));
        push(format!("seed = {}", self.seed));
        push(format!("cutoff = {:?}", self.cutoff));
        push(String::new());
        push("[output]".into());
        push(format!(
            "dir = \"{}\"",
            self.output_dir.as_ref().map(|d| d.display().to_string()).unwrap_or_default()
        ));
        push(String::new());
        push("[tolerances]".into());
        push(format!("certificate = {:?}", self.tolerances.certificate));
        push(format!("linear = {:?}", self.tolerances.linear));
        push(format!("mass = {:?}", self.tolerances.mass));
        push(format!("boundary = {:?}", self.tolerances.boundary));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
        assert_eq!(parse_config("# nothing\n\n   \n").unwrap(), RunConfig::default());
    }

    #[test]
    fn negative_viscosity_names_the_key_and_line() {
        let err = parse_config("[model]\n\nnu = -1\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert_eq!(err.key.as_deref(), Some("model.nu"));
        assert!(err.to_string().contains("nu"));
    }

    #[test]
    fn unknown_key_and_type_mismatch_carry_lines() {
        let err = parse_config("[model]\nnu = 0.1\nmu = 2\n").unwrap_err();
        assert_eq!((err.line, err.key.as_deref()), (Some(3), Some("model.mu")));
        let err = parse_config("[domain]\nn = many\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(err.message.contains("integer"));
        let err = parse_config("[domain]\nn = 63\n").unwrap_err();
        assert_eq!((err.line, err.key.as_deref()), (Some(2), Some("domain.n")));
        let err = parse_config("[physics]\n").unwrap_err();
        assert_eq!(err.line, Some(1));
        let err = parse_config("nu = 1\n").unwrap_err();
        assert_eq!(err.line, Some(1));
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let err = parse_config("[time]\nt_end = 1\nt_end = 2\n").unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn values_and_comments() {
        let cfg = parse_config(
            "[domain]\nbc = neumann # walls\nn = 64\n[time]\ndt = 1e-4\nscheme = imex1\n\
             [initial]\nkind = cosine\nmodes = 1, 4\namplitudes = 0.02, -0.01\n\
             [output]\ndir = \"runs/#1\"\n[eos]\nslope_inf = 20\n",
        )
        .unwrap();
        assert_eq!(cfg.bc, BoundaryCondition::Neumann);
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.dt, TimeStep::Fixed(1e-4));
        assert_eq!(cfg.scheme, SchemeChoice::Imex1);
        assert_eq!(cfg.modes, vec![1, 4]);
        assert_eq!(cfg.amplitudes, vec![0.02, -0.01]);
        assert_eq!(cfg.output_dir, Some(PathBuf::from("runs/#1")));
        assert_eq!(cfg.slope_inf, Some(20.0));
    }

    #[test]
    fn mismatched_cosine_lists_are_rejected() {
        let err = parse_config("[initial]\nkind = cosine\nmodes = 1, 2\namplitudes = 0.1\n").unwrap_err();
        assert_eq!((err.line, err.key.as_deref()), (Some(4), Some("initial.amplitudes")));
    }

    #[test]
    fn serialize_round_trips() {
        let mut cfg = RunConfig::default();
        assert_eq!(parse_config(&cfg.serialize()).unwrap(), cfg);
        cfg.bc = BoundaryCondition::Neumann;
        cfg.dt = TimeStep::Fixed(1.0 / 3.0);
        cfg.slope_inf = Some(12.5);
        cfg.initial_kind = InitialKind::Cosine;
        cfg.modes = vec![2, 5];
        cfg.amplitudes = vec![0.1, 1e-7];
        cfg.output_dir = Some(PathBuf::from("out dir"));
        cfg.epsilon_sign = -1.0;
        cfg.eos_kind = EosKind::Zero;
        assert_eq!(parse_config(&cfg.serialize()).unwrap(), cfg);
    }
}
