//! Subcommand implementations.

pub mod fig;
pub mod run;

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context as _, Result};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};
use wwm_core::grid::{PhaseGrid, UnitsTag};
use wwm_core::spectra::{charge_factors, rotator_spectrum, ChargeFactor};

use crate::config::ConfigFile;
use crate::output::{parse_formats, Output};
use crate::CommonArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Standard,
    Nonlocal,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Nonlocal => "nonlocal",
        }
    }
}

impl FromStr for Mode {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "standard" => Ok(Mode::Standard),
            "nonlocal" => Ok(Mode::Nonlocal),
            other => bail!("unknown mode `{other}` (expected standard or nonlocal)"),
        }
    }
}

/// Resolved common settings.
pub struct Context {
    pub config: ConfigFile,
    pub common: CommonArgs,
    pub out: Output,
    pub mode: Mode,
}

impl Context {
    pub fn new(common: &CommonArgs) -> Result<Self> {
        let config = match &common.config {
            Some(p) => ConfigFile::read(p)?,
            None => ConfigFile::default(),
        };
        let out_dir: PathBuf = config.resolve(common.out.clone(), "out", PathBuf::from("out"))?;
        let formats: String = config.resolve(common.format.clone(), "format", "csv,json,svg".into())?;
        let mode = config.resolve(common.mode, "mode", Mode::Standard)?;
        Ok(Self {
            out: Output::new(&out_dir, parse_formats(&formats)?)?,
            config,
            common: common.clone(),
            mode,
        })
    }

    pub fn lambda(&self, default: f64) -> Result<f64> {
        let l = self.config.resolve(self.common.lambda, "lambda", default)?;
        if !(l >= 0.0 && l.is_finite()) {
            bail!("lambda must be finite and non-negative, got {l}");
        }
        Ok(l)
    }

    pub fn basis_size(&self, default: usize) -> Result<usize> {
        let n = self.config.resolve(self.common.basis_size, "basis_size", default)?;
        if n == 0 {
            bail!("basis size must be positive");
        }
        Ok(n)
    }

    pub fn grid(&self, default: &str, units: UnitsTag) -> Result<PhaseGrid> {
        let spec: String = self.config.resolve(self.common.grid.clone(), "grid", default.to_string())?;
        PhaseGrid::parse(&spec, units).with_context(|| format!("invalid grid `{spec}`"))
    }

    /// Command-specific setting: flag, then config key, then default.
    pub fn setting<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.config.resolve(flag, key, default)
    }

    pub fn factors(&self, lambda: f64, n: usize) -> Result<ChargeFactor> {
        Ok(match self.mode {
            Mode::Standard => charge_factors(&rotator_spectrum(lambda, n)?, n)?,
            Mode::Nonlocal => ChargeFactor::nonlocal(n),
        })
    }
}

pub fn grid_meta(g: &PhaseGrid) -> Value {
    json!({
        "spec": format!("{},{},{},{},{},{}", g.p_min, g.p_max, g.q_min, g.q_max, g.np, g.nq),
        "units": g.units.as_str(),
    })
}

#[derive(Args, Debug, Default)]
pub struct Fig1Args {
    /// Which surface to produce: free, rotator or both.
    #[arg(long)]
    pub kind: Option<String>,
    /// Half-width of the free-particle momentum range, in mc.
    #[arg(long)]
    pub range: Option<f64>,
    /// Samples per axis of the free-particle surface.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct Fig2Args {}

#[derive(Args, Debug, Default)]
pub struct Fig3Args {
    /// Packet centre in mc.
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct EvolveArgs {
    /// State file (JSON).
    #[arg(long)]
    pub state: Option<PathBuf>,
    /// spectral or grid.
    #[arg(long)]
    pub method: Option<String>,
    /// Time step in units of ħ/mc².
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time in units of ħ/mc².
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    /// position or momentum.
    #[arg(long)]
    pub observable: Option<String>,
    /// Moment order.
    #[arg(long)]
    pub power: Option<usize>,
    /// Dump the total Wigner function every k steps (0 disables).
    #[arg(long)]
    pub frames: Option<usize>,
    /// Spectral terms for the Hamiltonian symbol (grid method).
    #[arg(long)]
    pub terms: Option<usize>,
    /// Padding factor of the star product (grid method).
    #[arg(long)]
    pub padding: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct ValidateArgs {
    /// State file (JSON).
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct HamiltonianArgs {
    /// Spectral terms before acceleration.
    #[arg(long)]
    pub terms: Option<usize>,
    /// Check star-eigenvalue residuals for levels 0..=n.
    #[arg(long = "check-levels")]
    pub check_levels: Option<usize>,
}

#[derive(Args, Debug, Default)]
pub struct ComptonArgs {
    /// Rest energy as name=eV; repeatable. Overrides `mass.<name>` config keys.
    #[arg(long = "mass")]
    pub mass: Vec<String>,
}

/// Parses `observable` names.
pub fn observable(name: &str) -> Result<wwm_core::ladder::Observable> {
    match name {
        "position" | "q" => Ok(wwm_core::ladder::Observable::Position),
        "momentum" | "p" => Ok(wwm_core::ladder::Observable::Momentum),
        other => bail!("unknown observable `{other}` (expected position or momentum)"),
    }
}
