//! Run configuration: a TOML document with one section per module.
//!
//! Every section is optional and falls back to defaults; unknown keys are
//! rejected. Errors carry the line and column of the offending entry, or of
//! the section header when the problem is only found by validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::continuous::{ContinuousSpec, SkewFamily};
use crate::econ::Enquiry;
use crate::population::PopulationSpec;
use crate::theory::{BaseParams, DrawRanges, Prop2Grid, Prop3Grid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    TwoType,
    CheckProps,
    SweepFl,
    SweepSkew,
    SweepCorr,
    ContinuousRun,
}

impl Mode {
    pub const ALL: [Mode; 6] =
        [Mode::TwoType, Mode::CheckProps, Mode::SweepFl, Mode::SweepSkew, Mode::SweepCorr, Mode::ContinuousRun];

    pub fn name(self) -> &'static str {
        match self {
            Mode::TwoType => "two-type",
            Mode::CheckProps => "check-props",
            Mode::SweepFl => "sweep-fl",
            Mode::SweepSkew => "sweep-skew",
            Mode::SweepCorr => "sweep-corr",
            Mode::ContinuousRun => "continuous-run",
        }
    }

    pub fn from_name(s: &str) -> Option<Mode> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Grid axis: an explicit list or `points` evenly spaced values from
/// `start` to `stop` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Values(Vec<f64>),
    Span { start: f64, stop: f64, points: usize },
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            AxisSpec::Values(ref v) => v.clone(),
            AxisSpec::Span { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![start],
                n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        }
    }

    fn span(start: f64, stop: f64, points: usize) -> Self {
        AxisSpec::Span { start, stop, points }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoTypeConfig {
    pub base: BaseParams,
    pub f_low: f64,
    pub enquiry: Enquiry,
}

impl Default for TwoTypeConfig {
    fn default() -> Self {
        TwoTypeConfig { base: BaseParams::default(), f_low: 0.5, enquiry: Enquiry::Asked }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropsConfig {
    pub base: BaseParams,
    /// Interior points of (0, 1) at which the first proposition is checked.
    pub f_grid_points: usize,
    /// Random configurations added to `base` for the first two checks.
    pub prop1_draws: usize,
    pub prop2_draws: usize,
    pub ranges: DrawRanges,
    pub prop2_grid: Prop2Grid,
    pub prop3_grid: Prop3Grid,
}

impl Default for PropsConfig {
    fn default() -> Self {
        PropsConfig {
            base: BaseParams::default(),
            f_grid_points: 99,
            prop1_draws: 200,
            prop2_draws: 50,
            ranges: DrawRanges::default(),
            prop2_grid: Prop2Grid::default(),
            prop3_grid: Prop3Grid::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub female: AxisSpec,
    pub male: AxisSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SkewConfig {
    pub family: SkewFamily,
    pub female: AxisSpec,
    pub male: AxisSpec,
}

impl Default for SkewConfig {
    fn default() -> Self {
        let mu = AxisSpec::span(0.05, 0.85, 11);
        SkewConfig { family: SkewFamily::default(), female: mu.clone(), male: mu }
    }
}

fn default_fl_grid() -> GridConfig {
    let f = AxisSpec::span(0.025, 0.975, 21);
    GridConfig { female: f.clone(), male: f }
}

fn default_corr_grid() -> GridConfig {
    let r = AxisSpec::span(-0.8, 0.8, 9);
    GridConfig { female: r.clone(), male: r }
}

/// Default master seed shared by every mode.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    /// Master seed. Sweep cells derive their own seeds from it; single
    /// runs use it directly.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory; like `threads`, left out of the manifest.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when absent. Never affects results.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    /// Also write gzipped per-worker CSVs for the template population.
    #[serde(default)]
    pub write_workers: bool,
    #[serde(default)]
    pub two_type: TwoTypeConfig,
    #[serde(default)]
    pub props: PropsConfig,
    #[serde(default)]
    pub population: PopulationSpec,
    #[serde(default = "default_fl_grid")]
    pub sweep_fl: GridConfig,
    #[serde(default = "default_corr_grid")]
    pub sweep_corr: GridConfig,
    #[serde(default)]
    pub continuous: ContinuousSpec,
    #[serde(default)]
    pub sweep_skew: SkewConfig,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        RunConfig {
            mode,
            seed: DEFAULT_SEED,
            out: None,
            threads: None,
            write_workers: false,
            two_type: TwoTypeConfig::default(),
            props: PropsConfig::default(),
            population: PopulationSpec::default(),
            sweep_fl: default_fl_grid(),
            sweep_corr: default_corr_grid(),
            continuous: ContinuousSpec::default(),
            sweep_skew: SkewConfig::default(),
        }
    }
}

/// A configuration problem, anchored to a position in the source when one
/// is known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{}:{l}:{c}: {}", self.source, self.message),
            (Some(l), None) => write!(f, "{}:{l}: {}", self.source, self.message),
            _ => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, col)
}

/// Line of a `[section]` header or of a top-level `key =` entry.
fn anchor(text: &str, section: &str) -> Option<usize> {
    let header = format!("[{section}");
    text.lines().position(|l| {
        let t = l.trim_start();
        t.starts_with(&header) || t.strip_prefix(section).is_some_and(|r| r.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

impl RunConfig {
    /// Parses a TOML document. `source` names it in diagnostics.
    pub fn from_toml(text: &str, source: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = match e.span() {
                Some(s) => {
                    let (l, c) = line_col(text, s.start);
                    (Some(l), Some(c))
                }
                None => (None, None),
            };
            ConfigError { source: source.to_string(), line, column, message: e.message().to_string() }
        })?;
        cfg.validate().map_err(|(section, message)| ConfigError {
            source: source.to_string(),
            line: anchor(text, section),
            column: None,
            message: format!("[{section}] {message}"),
        })?;
        Ok(cfg)
    }

    /// Reads a TOML config, or the `config` object of a run manifest when
    /// the file ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let source = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: source.clone(),
            line: None,
            column: None,
            message: format!("cannot read: {e}"),
        })?;
        if path.extension().is_some_and(|x| x == "json") {
            return Self::from_manifest(&text, &source);
        }
        Self::from_toml(&text, &source)
    }

    pub fn from_manifest(text: &str, source: &str) -> Result<Self, ConfigError> {
        let err = |line: Option<usize>, column: Option<usize>, message: String| ConfigError {
            source: source.to_string(),
            line,
            column,
            message,
        };
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| err(Some(e.line()), Some(e.column()), e.to_string()))?;
        let config = v.get("config").ok_or_else(|| err(None, None, "manifest has no `config` object".into()))?;
        let cfg: RunConfig =
            serde_json::from_value(config.clone()).map_err(|e| err(None, None, format!("config: {e}")))?;
        cfg.validate().map_err(|(section, m)| err(None, None, format!("[{section}] {m}")))?;
        Ok(cfg)
    }

    /// Validates the sections the selected mode reads, returning the
    /// section name with the message.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.threads == Some(0) {
            return Err(("threads", "must be at least 1".into()));
        }
        let axes = |section: &'static str, g: &GridConfig| -> Result<(), (&'static str, String)> {
            for (name, a) in [("female", &g.female), ("male", &g.male)] {
                check_axis(a).map_err(|m| (section, format!("{name}: {m}")))?;
            }
            Ok(())
        };
        let wrap = |section: &'static str| move |e: crate::Error| (section, e.to_string());
        match self.mode {
            Mode::TwoType => {
                self.two_type.base.validate().map_err(wrap("two_type"))?;
                let f = self.two_type.f_low;
                if !(0.0..=1.0).contains(&f) {
                    return Err(("two_type", format!("f_low must lie in [0, 1], got {f}")));
                }
            }
            Mode::CheckProps => {
                self.props.base.validate().map_err(wrap("props"))?;
                self.props.ranges.validate().map_err(wrap("props"))?;
                if self.props.f_grid_points == 0 {
                    return Err(("props", "f_grid_points must be positive".into()));
                }
            }
            Mode::SweepFl => {
                self.population.validate().map_err(wrap("population"))?;
                axes("sweep_fl", &self.sweep_fl)?;
                for v in self.sweep_fl.female.values().into_iter().chain(self.sweep_fl.male.values()) {
                    if !(v > 0.0 && v < 1.0) {
                        return Err(("sweep_fl", format!("f_low values must lie in (0, 1), got {v}")));
                    }
                }
            }
            Mode::SweepCorr => {
                self.population.validate().map_err(wrap("population"))?;
                axes("sweep_corr", &self.sweep_corr)?;
            }
            Mode::SweepSkew => {
                let fam = &self.sweep_skew.family;
                if !(fam.w_min > 0.0 && fam.w_min < fam.w_max && fam.mean_frac > 0.0 && fam.mean_frac < 1.0) {
                    return Err(("sweep_skew", "family needs 0 < w_min < w_max and mean_frac in (0, 1)".into()));
                }
                axes("sweep_skew", &GridConfig { female: self.sweep_skew.female.clone(), male: self.sweep_skew.male.clone() })?;
                let probe = fam.prior(0.5).or_else(|_| fam.prior(0.1)).map_err(wrap("sweep_skew"))?;
                ContinuousSpec { prior: crate::metrics::ByGender::both(probe), ..self.continuous }
                    .validate()
                    .map_err(wrap("continuous"))?;
            }
            Mode::ContinuousRun => self.continuous.validate().map_err(wrap("continuous"))?,
        }
        Ok(())
    }
}

fn check_axis(a: &AxisSpec) -> Result<(), String> {
    let v = a.values();
    if v.is_empty() {
        return Err("axis has no values".into());
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(format!("non-finite axis value {x}"));
    }
    Ok(())
}
