//! Run configuration: a sectioned key/value document (TOML syntax) with
//! `[system]`, `[pulse]`, `[grid]` and `[run]` tables.
//!
//! Rates are dimensionless (units of `omega_m`) unless given with an `_hz`
//! suffix, in which case `omega_m_hz` must also be present and every rate is
//! divided by it; the 2π of the angular frequencies cancels in the ratio.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{linspace, DEFAULT_DT, DEFAULT_SWEEP_POINTS};
use crate::model::{optimal_chi0, PulseParams, SystemParams};
use crate::numerics::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Oracle,
    Drive,
    SweepBeta,
    SweepDetuning,
    SweepDelta,
    Optimize,
    Tail,
}

impl Mode {
    pub const ALL: [Mode; 8] = [
        Mode::Simulate,
        Mode::Oracle,
        Mode::Drive,
        Mode::SweepBeta,
        Mode::SweepDetuning,
        Mode::SweepDelta,
        Mode::Optimize,
        Mode::Tail,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Oracle => "oracle",
            Mode::Drive => "drive",
            Mode::SweepBeta => "sweep-beta",
            Mode::SweepDetuning => "sweep-detuning",
            Mode::SweepDelta => "sweep-delta",
            Mode::Optimize => "optimize",
            Mode::Tail => "tail",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

/// Axes and extents used by the sweep, optimize and tail modes.
#[derive(Debug, Clone, PartialEq)]
pub struct StudySpec {
    pub beta_min: f64,
    pub beta_max: f64,
    pub points: usize,
    pub lock_chi0: bool,
    /// Detunings for `sweep-detuning`, and one output file each for `sweep-beta`.
    pub detunings: Vec<f64>,
    /// Area deviations for `sweep-delta`.
    pub deltas: Vec<f64>,
    pub tail_end: f64,
}

impl StudySpec {
    pub fn betas(&self) -> Vec<f64> {
        linspace(self.beta_min, self.beta_max, self.points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemParams,
    pub pulse: PulseParams,
    pub grid: TimeGrid,
    pub mode: Mode,
    pub rwa: bool,
    pub output_path: Option<PathBuf>,
    pub stride: usize,
    pub study: StudySpec,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    system: Option<RawSystem>,
    pulse: Option<RawPulse>,
    grid: Option<RawGrid>,
    run: Option<RawRun>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_bar_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_m_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_c_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_c_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_m_hz: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPulse {
    #[serde(skip_serializing_if = "Option::is_none")]
    chi0: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_dev: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(skip_serializing_if = "Option::is_none")]
    t_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rwa: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lock_chi0: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detunings: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_end: Option<f64>,
}

fn required(value: Option<f64>, section: &str, key: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Config(format!("missing required key `{key}` in [{section}]")))
}

fn non_negative(value: f64, key: &str) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::Config(format!("`{key}` must be finite, got {value}")));
    }
    if value < 0.0 {
        return Err(Error::Config(format!("`{key}` must not be negative, got {value}")));
    }
    Ok(value)
}

/// Resolves a rate given either dimensionless or in Hz.
fn rate(plain: Option<f64>, hz: Option<f64>, omega_m_hz: Option<f64>, key: &str) -> Result<Option<f64>> {
    match (plain, hz) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "`{key}` and `{key}_hz` are both given; use one"
        ))),
        (Some(v), None) => Ok(Some(v)),
        (None, Some(f)) => match omega_m_hz {
            Some(fm) => Ok(Some(f / fm)),
            None => Err(Error::Config(format!(
                "`{key}_hz` needs `omega_m_hz` to convert into units of omega_m"
            ))),
        },
        (None, None) => Ok(None),
    }
}

fn system_from(raw: RawSystem) -> Result<SystemParams> {
    let fm = raw.omega_m_hz;
    if let Some(f) = fm {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::Config(format!("`omega_m_hz` must be positive, got {f}")));
        }
    }
    let g = required(rate(raw.g, raw.g_hz, fm, "g")?, "system", "g")?;
    let gamma_c = required(rate(raw.gamma_c, raw.gamma_c_hz, fm, "gamma_c")?, "system", "gamma_c")?;
    let gamma_m = required(rate(raw.gamma_m, raw.gamma_m_hz, fm, "gamma_m")?, "system", "gamma_m")?;
    let n_bar_m = required(raw.n_bar_m, "system", "n_bar_m")?;
    let delta_c = rate(raw.delta_c, raw.delta_c_hz, fm, "delta_c")?.unwrap_or(1.0);
    if !(non_negative(g, "g")? > 0.0) {
        return Err(Error::Config("`g` must be positive".into()));
    }
    Ok(SystemParams {
        omega_m: 1.0,
        delta_c: non_negative(delta_c, "delta_c")?,
        g,
        gamma_c: non_negative(gamma_c, "gamma_c")?,
        gamma_m: non_negative(gamma_m, "gamma_m")?,
        n_bar_m: non_negative(n_bar_m, "n_bar_m")?,
    })
}

fn pulse_from(raw: RawPulse) -> Result<PulseParams> {
    let alpha = non_negative(required(raw.alpha, "pulse", "alpha")?, "alpha")?;
    let beta = required(raw.beta, "pulse", "beta")?;
    let t0 = non_negative(required(raw.t0, "pulse", "t0")?, "t0")?;
    let chi0 = match raw.chi0 {
        Some(c) => non_negative(c, "chi0")?,
        None => optimal_chi0(alpha, beta),
    };
    let p = PulseParams {
        chi0,
        alpha,
        beta,
        t0,
        delta_dev: raw.delta_dev.unwrap_or(0.0),
    };
    p.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(p)
}

/// Parses and validates a configuration document, applying defaults:
/// `dt = 1e-3`, horizon `[0, 2 t0]`, `rwa = false`, `delta_c = omega_m`,
/// `chi0` from the optimal relation.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawDocument = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    let system = system_from(
        raw.system
            .ok_or_else(|| Error::Config("missing section [system]".into()))?,
    )?;
    let pulse = pulse_from(
        raw.pulse
            .ok_or_else(|| Error::Config("missing section [pulse]".into()))?,
    )?;
    let rg = raw.grid.unwrap_or_default();
    let grid = TimeGrid::new(
        rg.t_start.unwrap_or(0.0),
        rg.t_end.unwrap_or(pulse.final_time()),
        rg.dt.unwrap_or(DEFAULT_DT),
    )
    .map_err(|e| Error::Config(e.to_string()))?;
    let run = raw.run.unwrap_or_default();
    let stride = run.stride.unwrap_or(1);
    if stride == 0 {
        return Err(Error::Config("`stride` must be at least 1".into()));
    }
    let study = StudySpec {
        beta_min: run.beta_min.unwrap_or(-0.5),
        beta_max: run.beta_max.unwrap_or(0.5),
        points: run.points.unwrap_or(DEFAULT_SWEEP_POINTS),
        lock_chi0: run.lock_chi0.unwrap_or(true),
        detunings: run.detunings.unwrap_or_else(|| vec![system.delta_c]),
        deltas: run.deltas.unwrap_or_else(|| vec![-0.1, 0.0, 0.1]),
        tail_end: run.tail_end.unwrap_or(300.0),
    };
    if study.beta_min > study.beta_max {
        return Err(Error::Config("`beta_min` exceeds `beta_max`".into()));
    }
    if study.points == 0 {
        return Err(Error::Config("`points` must be at least 1".into()));
    }
    for &d in &study.detunings {
        non_negative(d, "detunings")?;
    }
    if pulse.rwa_flag(system.omega_m) {
        warn!(
            "peak coupling {:.4} is not small against omega_m; counter-rotating terms matter",
            pulse.effective_chi0()
        );
    }
    Ok(RunConfig {
        system,
        pulse,
        grid,
        mode: run.mode.unwrap_or(Mode::Simulate),
        rwa: run.rwa.unwrap_or(false),
        output_path: run.output,
        stride,
        study,
    })
}

impl RunConfig {
    /// Fully explicit document that parses back to `self`.
    pub fn to_config_string(&self) -> String {
        let doc = RawDocument {
            system: Some(RawSystem {
                delta_c: Some(self.system.delta_c),
                g: Some(self.system.g),
                gamma_c: Some(self.system.gamma_c),
                gamma_m: Some(self.system.gamma_m),
                n_bar_m: Some(self.system.n_bar_m),
                ..RawSystem::default()
            }),
            pulse: Some(RawPulse {
                chi0: Some(self.pulse.chi0),
                alpha: Some(self.pulse.alpha),
                beta: Some(self.pulse.beta),
                t0: Some(self.pulse.t0),
                delta_dev: Some(self.pulse.delta_dev),
            }),
            grid: Some(RawGrid {
                t_start: Some(self.grid.t_start),
                t_end: Some(self.grid.t_end),
                dt: Some(self.grid.dt),
            }),
            run: Some(RawRun {
                mode: Some(self.mode),
                rwa: Some(self.rwa),
                output: self.output_path.clone(),
                stride: Some(self.stride),
                beta_min: Some(self.study.beta_min),
                beta_max: Some(self.study.beta_max),
                points: Some(self.study.points),
                lock_chi0: Some(self.study.lock_chi0),
                detunings: Some(self.study.detunings.clone()),
                deltas: Some(self.study.deltas.clone()),
                tail_end: Some(self.study.tail_end),
            }),
        };
        toml::to_string(&doc).expect("config document always serializes")
    }
}
