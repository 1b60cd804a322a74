//! Flat `key = value` run configuration shared by every subcommand.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys and
//! repeated keys are errors. `serialize` writes every key, so a saved
//! configuration fully determines a run.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::channel::MappingKind;
use crate::de::{Ext2Rule, Mode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("{key}: cannot parse `{value}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("{key}: {reason}")]
    Invalid { key: String, reason: String },
}

fn bad_value(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: reason.to_string(),
    }
}

fn invalid(key: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Subcommand {
    #[default]
    Simulate,
    Threshold,
    DetectorCompare,
    DeTrace,
    Neighborhood,
    CodeGen,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Simulate,
        Subcommand::Threshold,
        Subcommand::DetectorCompare,
        Subcommand::DeTrace,
        Subcommand::Neighborhood,
        Subcommand::CodeGen,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Threshold => "threshold",
            Subcommand::DetectorCompare => "detector-compare",
            Subcommand::DeTrace => "de-trace",
            Subcommand::Neighborhood => "neighborhood",
            Subcommand::CodeGen => "code-gen",
        }
    }
}

impl FromStr for Subcommand {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown subcommand `{s}`"))
    }
}

/// Where the parity-check matrix comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeSource {
    Alist(PathBuf),
    /// `regular:N:dv:dc`, built with the configured code seed.
    Regular {
        n: usize,
        dv: usize,
        dc: usize,
    },
}

impl CodeSource {
    fn render(&self) -> String {
        match self {
            CodeSource::Alist(p) => p.display().to_string(),
            CodeSource::Regular { n, dv, dc } => format!("regular:{n}:{dv}:{dc}"),
        }
    }
}

impl FromStr for CodeSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let Some(rest) = s.strip_prefix("regular:") else {
            if s.is_empty() {
                return Err("empty code path".into());
            }
            return Ok(CodeSource::Alist(PathBuf::from(s)));
        };
        let nums: Vec<usize> = rest
            .split(':')
            .map(|x| x.parse::<usize>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        match nums[..] {
            [n, dv, dc] if n > 0 && dv > 0 && dc > 0 => Ok(CodeSource::Regular { n, dv, dc }),
            _ => Err("expected regular:N:dv:dc with positive entries".into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum ChannelSource {
    #[default]
    PresetA,
    PresetB,
    Awgn,
    File(PathBuf),
}

impl ChannelSource {
    fn render(&self) -> String {
        match self {
            ChannelSource::PresetA => "HA".into(),
            ChannelSource::PresetB => "HB".into(),
            ChannelSource::Awgn => "AWGN".into(),
            ChannelSource::File(p) => p.display().to_string(),
        }
    }
}

impl FromStr for ChannelSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "HA" => ChannelSource::PresetA,
            "HB" => ChannelSource::PresetB,
            "AWGN" => ChannelSource::Awgn,
            "" => return Err("empty channel path".into()),
            path => ChannelSource::File(PathBuf::from(path)),
        })
    }
}

/// `start:stop:step`, inclusive of `stop` up to rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Sweep {
    pub fn single(x: f64) -> Self {
        Self {
            start: x,
            stop: x,
            step: 1.0,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn render(&self) -> String {
        format!("{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for Sweep {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let nums: Vec<f64> = s
            .split(':')
            .map(|x| x.trim().parse::<f64>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let sweep = match nums[..] {
            [x] => Sweep::single(x),
            [start, stop, step] => Sweep { start, stop, step },
            _ => return Err("expected a number or start:stop:step".into()),
        };
        if !(sweep.start.is_finite() && sweep.stop.is_finite() && sweep.step.is_finite()) {
            return Err("non-finite entry".into());
        }
        if !(sweep.step > 0.0 && sweep.stop >= sweep.start) {
            return Err("need step > 0 and stop >= start".into());
        }
        if (sweep.stop - sweep.start) / sweep.step > 1e6 {
            return Err("more than a million points".into());
        }
        Ok(sweep)
    }
}

fn parse_mapping(s: &str) -> Result<MappingKind, String> {
    if s == "row-major" {
        return Ok(MappingKind::RowMajor);
    }
    match s.strip_prefix("random:") {
        Some(seed) => Ok(MappingKind::Random {
            seed: seed
                .parse()
                .map_err(|e: std::num::ParseIntError| e.to_string())?,
        }),
        None => Err("expected row-major or random:SEED".into()),
    }
}

fn render_mapping(m: MappingKind) -> String {
    match m {
        MappingKind::RowMajor => "row-major".into(),
        MappingKind::Random { seed } => format!("random:{seed}"),
    }
}

fn parse_iters(s: &str) -> Result<(usize, usize, usize), String> {
    let nums: Vec<usize> = s
        .split('/')
        .map(|x| x.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    match nums[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err("expected DET/IC/IOUT".into()),
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "te" => Ok(Mode::TurboEqualized),
        "non-te" => Ok(Mode::NonTurbo),
        _ => Err("expected te or non-te".into()),
    }
}

fn parse_ext2(s: &str) -> Result<Ext2Rule, String> {
    match s {
        "decoder" => Ok(Ext2Rule::DecoderOnly),
        "with-channel" => Ok(Ext2Rule::WithChannel),
        _ => Err("expected decoder or with-channel".into()),
    }
}

fn render_ext2(e: Ext2Rule) -> &'static str {
    match e {
        Ext2Rule::DecoderOnly => "decoder",
        Ext2Rule::WithChannel => "with-channel",
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let a: f64 = a
        .trim()
        .parse()
        .map_err(|e: std::num::ParseFloatError| e.to_string())?;
    let b: f64 = b
        .trim()
        .parse()
        .map_err(|e: std::num::ParseFloatError| e.to_string())?;
    Ok((a, b))
}

/// Full run configuration. Field defaults follow the experiment setups used
/// throughout the crate.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub code: CodeSource,
    /// Seed for regular code construction.
    pub code_seed: u64,
    pub channel: ChannelSource,
    pub mapping: MappingKind,
    pub detector_iterations: usize,
    pub decoder_iterations: usize,
    pub outer_iterations: usize,
    pub early_exit: bool,
    pub snr: Option<Sweep>,
    pub sigma: Option<Sweep>,
    /// Interpret `sigma` values as `sigma / |H|`.
    pub sigma_normalized: bool,
    pub max_frames: u64,
    pub min_errors: u64,
    pub batch: u64,
    /// `F_c`, `F_d` of the windowed detector.
    pub window: (usize, usize),
    /// Rate used to turn SNR into sigma for uncoded detector comparisons.
    pub compare_rate: f64,
    pub page: Option<(usize, usize)>,
    pub de_samples: usize,
    pub de_delta: f64,
    pub de_llr_max: f64,
    pub de_p_ers: f64,
    pub de_max_rounds: usize,
    pub de_ext2: Ext2Rule,
    pub mode: Mode,
    pub tol: f64,
    pub bracket: (f64, f64),
    pub nb_t: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Record wall-clock times; off makes CSV output byte-reproducible.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            subcommand: Subcommand::Simulate,
            code: CodeSource::Regular {
                n: 2000,
                dv: 3,
                dc: 6,
            },
            code_seed: 1,
            channel: ChannelSource::PresetA,
            mapping: MappingKind::RowMajor,
            detector_iterations: 3,
            decoder_iterations: 50,
            outer_iterations: 10,
            early_exit: false,
            snr: None,
            sigma: None,
            sigma_normalized: false,
            max_frames: 100,
            min_errors: 100,
            batch: 8,
            window: (5, 5),
            compare_rate: 1.0,
            page: None,
            de_samples: 100_000,
            de_delta: 0.05,
            de_llr_max: 50.0,
            de_p_ers: 1e-6,
            de_max_rounds: 40,
            de_ext2: Ext2Rule::DecoderOnly,
            mode: Mode::TurboEqualized,
            tol: 0.01,
            bracket: (0.3, 1.5),
            nb_t: 2,
            seed: 1,
            out: None,
            timing: true,
        }
    }
}

const KEYS: [&str; 29] = [
    "subcommand",
    "code",
    "code_seed",
    "channel",
    "mapping",
    "iters",
    "early_exit",
    "snr",
    "sigma",
    "sigma_normalized",
    "max_frames",
    "min_errors",
    "batch",
    "window",
    "compare_rate",
    "page",
    "de_samples",
    "de_delta",
    "de_llr_max",
    "de_p_ers",
    "de_max_rounds",
    "de_ext2",
    "mode",
    "tol",
    "bracket",
    "nb_t",
    "seed",
    "out",
    "timing",
];

fn parse_field<T>(
    key: &str,
    value: &str,
    f: impl FnOnce(&str) -> Result<T, String>,
) -> Result<T, ConfigError> {
    f(value).map_err(|r| bad_value(key, value, r))
}

fn num<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: ToString,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

fn optional<T>(s: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, String> {
    if s == "none" {
        Ok(None)
    } else {
        f(s).map(Some)
    }
}

fn usize_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', ':']).ok_or("expected AxB")?;
    Ok((num(a.trim())?, num(b.trim())?))
}

impl RunConfig {
    /// Parses a configuration file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.into(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.into(),
                });
            }
            seen.push(known);
            cfg.set(known, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` assignment (as used by `--set`).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value;
        match key {
            "subcommand" => self.subcommand = parse_field(key, v, |s| s.parse())?,
            "code" => self.code = parse_field(key, v, |s| s.parse())?,
            "code_seed" => self.code_seed = parse_field(key, v, num)?,
            "channel" => self.channel = parse_field(key, v, |s| s.parse())?,
            "mapping" => self.mapping = parse_field(key, v, parse_mapping)?,
            "iters" => {
                let (a, b, c) = parse_field(key, v, parse_iters)?;
                self.detector_iterations = a;
                self.decoder_iterations = b;
                self.outer_iterations = c;
            }
            "early_exit" => self.early_exit = parse_field(key, v, parse_bool)?,
            "snr" => self.snr = parse_field(key, v, |s| optional(s, |x| x.parse()))?,
            "sigma" => self.sigma = parse_field(key, v, |s| optional(s, |x| x.parse()))?,
            "sigma_normalized" => self.sigma_normalized = parse_field(key, v, parse_bool)?,
            "max_frames" => self.max_frames = parse_field(key, v, num)?,
            "min_errors" => self.min_errors = parse_field(key, v, num)?,
            "batch" => self.batch = parse_field(key, v, num)?,
            "window" => self.window = parse_field(key, v, usize_pair)?,
            "compare_rate" => self.compare_rate = parse_field(key, v, num)?,
            "page" => self.page = parse_field(key, v, |s| optional(s, usize_pair))?,
            "de_samples" => self.de_samples = parse_field(key, v, num)?,
            "de_delta" => self.de_delta = parse_field(key, v, num)?,
            "de_llr_max" => self.de_llr_max = parse_field(key, v, num)?,
            "de_p_ers" => self.de_p_ers = parse_field(key, v, num)?,
            "de_max_rounds" => self.de_max_rounds = parse_field(key, v, num)?,
            "de_ext2" => self.de_ext2 = parse_field(key, v, parse_ext2)?,
            "mode" => self.mode = parse_field(key, v, parse_mode)?,
            "tol" => self.tol = parse_field(key, v, num)?,
            "bracket" => self.bracket = parse_field(key, v, parse_pair)?,
            "nb_t" => self.nb_t = parse_field(key, v, num)?,
            "seed" => self.seed = parse_field(key, v, num)?,
            "timing" => self.timing = parse_field(key, v, parse_bool)?,
            "out" => {
                self.out = parse_field(key, v, |s| {
                    optional(s, |p| {
                        if p.is_empty() {
                            Err("empty path".into())
                        } else {
                            Ok(PathBuf::from(p))
                        }
                    })
                })?
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.into(),
                })
            }
        }
        Ok(())
    }

    /// Range and consistency checks; error messages name the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.detector_iterations == 0
            || self.decoder_iterations == 0
            || self.outer_iterations == 0
        {
            return Err(invalid("iters", "iteration counts must be positive"));
        }
        if self.snr.is_some() && self.sigma.is_some() {
            return Err(invalid("snr", "give either snr or sigma, not both"));
        }
        for (key, v) in [("max_frames", self.max_frames), ("batch", self.batch)] {
            if v == 0 {
                return Err(invalid(key, "must be positive"));
            }
        }
        if self.window.0 == 0 || self.window.1 == 0 {
            return Err(invalid("window", "must be positive"));
        }
        if !(self.compare_rate > 0.0 && self.compare_rate <= 1.0) {
            return Err(invalid("compare_rate", "must lie in (0, 1]"));
        }
        if let Some((r, c)) = self.page {
            if r == 0 || c == 0 {
                return Err(invalid("page", "must be positive"));
            }
        }
        if self.de_samples == 0 || self.de_max_rounds == 0 {
            return Err(invalid("de_samples", "DE counts must be positive"));
        }
        if !(self.de_delta > 0.0 && self.de_llr_max > self.de_delta) {
            return Err(invalid("de_delta", "need 0 < de_delta < de_llr_max"));
        }
        if self.de_p_ers.is_nan() || self.de_p_ers <= 0.0 {
            return Err(invalid("de_p_ers", "must be positive"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(invalid("tol", "must be positive"));
        }
        let (lo, hi) = self.bracket;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid("bracket", "need 0 < lo < hi"));
        }
        Ok(())
    }

    /// Every key, one per line, in a fixed order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let none = || "none".to_string();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("subcommand", self.subcommand.name().into());
        put("code", self.code.render());
        put("code_seed", self.code_seed.to_string());
        put("channel", self.channel.render());
        put("mapping", render_mapping(self.mapping));
        put(
            "iters",
            format!(
                "{}/{}/{}",
                self.detector_iterations, self.decoder_iterations, self.outer_iterations
            ),
        );
        put("early_exit", self.early_exit.to_string());
        put("snr", self.snr.map_or_else(none, |s| s.render()));
        put("sigma", self.sigma.map_or_else(none, |s| s.render()));
        put("sigma_normalized", self.sigma_normalized.to_string());
        put("max_frames", self.max_frames.to_string());
        put("min_errors", self.min_errors.to_string());
        put("batch", self.batch.to_string());
        put("window", format!("{}x{}", self.window.0, self.window.1));
        put("compare_rate", self.compare_rate.to_string());
        put(
            "page",
            self.page.map_or_else(none, |(r, c)| format!("{r}x{c}")),
        );
        put("de_samples", self.de_samples.to_string());
        put("de_delta", self.de_delta.to_string());
        put("de_llr_max", self.de_llr_max.to_string());
        put("de_p_ers", self.de_p_ers.to_string());
        put("de_max_rounds", self.de_max_rounds.to_string());
        put("de_ext2", render_ext2(self.de_ext2).into());
        put("mode", self.mode.name().into());
        put("tol", self.tol.to_string());
        put("bracket", format!("{}:{}", self.bracket.0, self.bracket.1));
        put("nb_t", self.nb_t.to_string());
        put("seed", self.seed.to_string());
        put(
            "out",
            self.out
                .as_ref()
                .map_or_else(none, |p| p.display().to_string()),
        );
        put("timing", self.timing.to_string());
        out
    }
}
