//! Run configuration: defaults, the flat `key = value` config file, and
//! the precedence chain (defaults < environment < config file < flags).
//!
//! Only the output directory may come from the environment
//! (`SHEARWAVES_OUT`); every other setting is a default, a file entry, or
//! a flag, so a run is fully described by its command line plus the file
//! it names.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::CliError;

/// Environment variable naming the output directory (directory only; all
/// other settings must be explicit).
pub const OUT_ENV_VAR: &str = "SHEARWAVES_OUT";

/// Default vorticity sweep: −4.5 to 3 in steps of 0.5 (16 values).
pub const DEFAULT_GAMMA_RANGE: (f64, f64, f64) = (-4.5, 3.0, 0.5);
/// Default bed pressure (negative of the relative mass flux).
pub const DEFAULT_P0: f64 = -2.0;
/// Default gravitational constant.
pub const DEFAULT_G: f64 = 9.8;
/// Default expansion order.
pub const DEFAULT_ORDER: usize = 2;
/// Default residual level for amplitude calibration.
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// Default evaluation grid.
pub const DEFAULT_NQ: usize = 256;
pub const DEFAULT_NP: usize = 128;
/// Default output directory.
pub const DEFAULT_OUT: &str = "out";

/// Largest vorticity list a range specification may expand to.
const MAX_GAMMA_COUNT: usize = 4096;

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Comma-separated values with a `#` comment header.
    Csv,
    /// One JSON document per artifact.
    Json,
    /// Whitespace-separated columns with a `#` comment header.
    Dat,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Dat => "dat",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "dat" => Ok(Format::Dat),
            other => Err(format!("unknown format `{other}` (expected csv, json, or dat)")),
        }
    }
}

/// Everything a run depends on. All outputs are deterministic functions of
/// this struct, and every artifact embeds it as a header block.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Vorticities to process, in emission order.
    pub gamma_list: Vec<f64>,
    /// Bed pressure `p0 < 0`.
    pub p0: f64,
    /// Gravitational constant `g > 0`.
    pub g: f64,
    /// Expansion order (1, 2, or 3).
    pub order: usize,
    /// Residual level targeted by amplitude calibration.
    pub epsilon: f64,
    /// Fixed amplitude; when set, calibration of `b` is skipped.
    pub b_override: Option<f64>,
    /// Fixed auxiliary third-order parameter; when set, its selection is
    /// skipped.
    pub btilde_override: Option<f64>,
    /// Evaluation grid: angles per wavelength.
    pub nq: usize,
    /// Evaluation grid: pressure levels from bed to surface.
    pub np: usize,
    /// Output serialization format.
    pub format: Format,
    /// Directory receiving every artifact.
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let (lo, hi, step) = DEFAULT_GAMMA_RANGE;
        RunConfig {
            gamma_list: expand_gamma_range(lo, hi, step).expect("default range is valid"),
            p0: DEFAULT_P0,
            g: DEFAULT_G,
            order: DEFAULT_ORDER,
            epsilon: DEFAULT_EPSILON,
            b_override: None,
            btilde_override: None,
            nq: DEFAULT_NQ,
            np: DEFAULT_NP,
            format: Format::Csv,
            output_dir: PathBuf::from(DEFAULT_OUT),
        }
    }
}

/// Settings shared by every subcommand. Flags override the config file,
/// which overrides `SHEARWAVES_OUT`, which overrides the defaults.
#[derive(Debug, Args)]
pub struct Overrides {
    /// Single vorticity (replaces the sweep list)
    #[arg(long, global = true, value_name = "GAMMA", conflicts_with = "gamma_range", allow_negative_numbers = true)]
    pub gamma: Option<f64>,

    /// Vorticity sweep A:B:STEP, endpoints inclusive
    #[arg(long, global = true, value_name = "A:B:STEP", allow_hyphen_values = true)]
    pub gamma_range: Option<String>,

    /// Bed pressure (must be negative)
    #[arg(long, global = true, value_name = "P0", allow_negative_numbers = true)]
    pub p0: Option<f64>,

    /// Gravitational constant
    #[arg(long, global = true, value_name = "G")]
    pub g: Option<f64>,

    /// Expansion order: 1, 2, or 3
    #[arg(long, global = true, value_name = "ORDER")]
    pub order: Option<usize>,

    /// Residual level targeted by calibration
    #[arg(long, global = true, value_name = "EPS")]
    pub epsilon: Option<f64>,

    /// Fixed amplitude (skips calibration of b)
    #[arg(long, global = true, value_name = "B", allow_negative_numbers = true)]
    pub b: Option<f64>,

    /// Fixed auxiliary third-order parameter (skips its selection)
    #[arg(long, global = true, value_name = "BTILDE", allow_negative_numbers = true)]
    pub btilde: Option<f64>,

    /// Evaluation grid as NQxNP, e.g. 256x128
    #[arg(long, global = true, value_name = "NQxNP")]
    pub grid: Option<String>,

    /// Output format
    #[arg(long, global = true, value_enum, value_name = "FORMAT")]
    pub format: Option<Format>,

    /// Output directory (default `out`, or $SHEARWAVES_OUT when set)
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Flat key = value configuration file; flags override its entries
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

/// Builds the effective configuration for one invocation.
pub fn resolve(overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Ok(dir) = std::env::var(OUT_ENV_VAR) {
        if !dir.is_empty() {
            cfg.output_dir = PathBuf::from(dir);
        }
    }
    if let Some(path) = &overrides.config {
        apply_file(&mut cfg, path)?;
    }
    apply_flags(&mut cfg, overrides)?;
    validate(&cfg)?;
    Ok(cfg)
}

/// Expands `A:B:STEP` (inclusive endpoints, within half a step) into the
/// vorticity list.
pub fn parse_gamma_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "gamma range `{spec}` must have the form A:B:STEP"
        )));
    }
    let lo = parse_f64("gamma range start", parts[0])?;
    let hi = parse_f64("gamma range end", parts[1])?;
    let step = parse_f64("gamma range step", parts[2])?;
    expand_gamma_range(lo, hi, step)
}

fn expand_gamma_range(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(CliError::Config(format!(
            "gamma range step must be positive and finite, got {step}"
        )));
    }
    if hi < lo {
        return Err(CliError::Config(format!(
            "gamma range end {hi} lies below its start {lo}"
        )));
    }
    let count = ((hi - lo) / step + 0.5).floor() as usize + 1;
    if count > MAX_GAMMA_COUNT {
        return Err(CliError::Config(format!(
            "gamma range expands to {count} values (limit {MAX_GAMMA_COUNT})"
        )));
    }
    Ok((0..count).map(|i| lo + step * i as f64).collect())
}

/// Parses `NQxNP` grid dimensions.
pub fn parse_grid(spec: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Config(format!("grid `{spec}` must have the form NQxNP, e.g. 256x128"));
    let (nq, np) = spec.split_once('x').ok_or_else(bad)?;
    let nq: usize = nq.trim().parse().map_err(|_| bad())?;
    let np: usize = np.trim().parse().map_err(|_| bad())?;
    Ok((nq, np))
}

fn parse_f64(what: &str, text: &str) -> Result<f64, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{what}: `{text}` is not a number")))
}

fn parse_usize(what: &str, text: &str) -> Result<usize, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{what}: `{text}` is not a non-negative integer")))
}

/// Applies a flat `key = value` file. `#` starts a comment; blank lines
/// are skipped; keys mirror the long flags.
fn apply_file(cfg: &mut RunConfig, path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config file {}: {e}", path.display()))
    })?;
    let mut saw_gamma = false;
    let mut saw_range = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), idx + 1);
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("{}: expected `key = value`", at())));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "gamma" => {
                cfg.gamma_list = vec![parse_f64("gamma", value)?];
                saw_gamma = true;
            }
            "gamma_range" => {
                cfg.gamma_list = parse_gamma_range(value)?;
                saw_range = true;
            }
            "p0" => cfg.p0 = parse_f64("p0", value)?,
            "g" => cfg.g = parse_f64("g", value)?,
            "order" => cfg.order = parse_usize("order", value)?,
            "epsilon" => cfg.epsilon = parse_f64("epsilon", value)?,
            "b" => cfg.b_override = Some(parse_f64("b", value)?),
            "btilde" => cfg.btilde_override = Some(parse_f64("btilde", value)?),
            "grid" => (cfg.nq, cfg.np) = parse_grid(value)?,
            "format" => {
                cfg.format = value.parse().map_err(|e| CliError::Config(format!("{}: {e}", at())))?
            }
            "out" => cfg.output_dir = PathBuf::from(value),
            other => {
                return Err(CliError::Config(format!("{}: unknown key `{other}`", at())));
            }
        }
    }
    if saw_gamma && saw_range {
        return Err(CliError::Config(format!(
            "{}: sets both gamma and gamma_range",
            path.display()
        )));
    }
    Ok(())
}

fn apply_flags(cfg: &mut RunConfig, o: &Overrides) -> Result<(), CliError> {
    if let Some(g) = o.gamma {
        cfg.gamma_list = vec![g];
    }
    if let Some(spec) = &o.gamma_range {
        cfg.gamma_list = parse_gamma_range(spec)?;
    }
    if let Some(p0) = o.p0 {
        cfg.p0 = p0;
    }
    if let Some(g) = o.g {
        cfg.g = g;
    }
    if let Some(order) = o.order {
        cfg.order = order;
    }
    if let Some(eps) = o.epsilon {
        cfg.epsilon = eps;
    }
    if let Some(b) = o.b {
        cfg.b_override = Some(b);
    }
    if let Some(t) = o.btilde {
        cfg.btilde_override = Some(t);
    }
    if let Some(spec) = &o.grid {
        (cfg.nq, cfg.np) = parse_grid(spec)?;
    }
    if let Some(format) = o.format {
        cfg.format = format;
    }
    if let Some(dir) = &o.out {
        cfg.output_dir = dir.clone();
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    if !(1..=3).contains(&cfg.order) {
        return Err(CliError::Config(format!(
            "order must be 1, 2, or 3, got {}",
            cfg.order
        )));
    }
    if !(cfg.epsilon > 0.0) || !cfg.epsilon.is_finite() {
        return Err(CliError::Config(format!(
            "epsilon must be positive and finite, got {}",
            cfg.epsilon
        )));
    }
    if cfg.gamma_list.is_empty() {
        return Err(CliError::Config("the vorticity list is empty".into()));
    }
    if let Some(bad) = cfg.gamma_list.iter().find(|g| !g.is_finite()) {
        return Err(CliError::Config(format!("vorticity {bad} is not finite")));
    }
    if !cfg.p0.is_finite() || cfg.p0 >= 0.0 {
        return Err(CliError::Config(format!(
            "p0 must be negative and finite, got {}",
            cfg.p0
        )));
    }
    if !cfg.g.is_finite() || cfg.g <= 0.0 {
        return Err(CliError::Config(format!(
            "g must be positive and finite, got {}",
            cfg.g
        )));
    }
    if cfg.nq < 8 || cfg.np < 8 {
        return Err(CliError::Config(format!(
            "grid must have at least 8 nodes per direction, got {}x{}",
            cfg.nq, cfg.np
        )));
    }
    for opt in [cfg.b_override, cfg.btilde_override] {
        if let Some(v) = opt {
            if !v.is_finite() {
                return Err(CliError::Config(format!("parameter override {v} is not finite")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_has_sixteen_vorticities() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.gamma_list.len(), 16);
        assert_eq!(cfg.gamma_list[0], -4.5);
        assert_eq!(*cfg.gamma_list.last().unwrap(), 3.0);
    }

    #[test]
    fn gamma_range_endpoints_are_inclusive() {
        let list = parse_gamma_range("-1:1:0.5").unwrap();
        assert_eq!(list, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(parse_gamma_range("2:2:1").unwrap(), vec![2.0]);
    }

    #[test]
    fn gamma_range_rejects_malformed_specs() {
        assert!(parse_gamma_range("1:2").is_err());
        assert!(parse_gamma_range("1:2:0").is_err());
        assert!(parse_gamma_range("2:1:0.5").is_err());
        assert!(parse_gamma_range("a:b:c").is_err());
    }

    #[test]
    fn grid_spec_parses_and_rejects() {
        assert_eq!(parse_grid("256x128").unwrap(), (256, 128));
        assert!(parse_grid("256").is_err());
        assert!(parse_grid("ax8").is_err());
    }
}
