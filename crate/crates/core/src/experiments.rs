//! Cooling studies built on the covariance engine: residual phonons at the end
//! of the pulse, post-pulse heating, and sweeps/optimization over the pulse
//! parameters.
//!
//! Sweep points are independent and evaluated with a rayon parallel map;
//! results are collected by index so the output never depends on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{observables, propagate_covariance_with, Observables};
use crate::error::{Error, Result};
use crate::model::{PulseParams, SystemParams};
use crate::numerics::TimeGrid;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_SWEEP_POINTS: usize = 41;
/// Width at which the golden-section refinement stops.
pub const OPTIMIZE_WIDTH: f64 = 1e-3;

/// Integration settings shared by every run of a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Runner {
    pub rwa: bool,
    pub dt: f64,
}

impl Default for Runner {
    fn default() -> Self {
        Runner {
            rwa: false,
            dt: DEFAULT_DT,
        }
    }
}

/// Parameter record attached to a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub system: SystemParams,
    pub pulse: PulseParams,
    pub rwa: bool,
    pub dt: f64,
    pub lock_chi0: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis_values: Vec<f64>,
    pub final_phonon: Vec<f64>,
    pub final_photon: Vec<f64>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    /// Index of the smallest final phonon number.
    pub fn argmin(&self) -> Option<usize> {
        self.final_phonon
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
    }
}

/// `n` evenly spaced values on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Resolved-sideband steady-state floor `(gamma_c / 4 omega_m)^2`.
pub fn sideband_limit(sp: &SystemParams) -> f64 {
    (sp.gamma_c / (4.0 * sp.omega_m)).powi(2)
}

/// Phonons excited by `n_residual` leftover cavity photons,
/// `(g n_r / omega_m)^2`.
pub fn heating_estimate(sp: &SystemParams, n_residual: f64) -> f64 {
    (sp.g * n_residual / sp.omega_m).powi(2)
}

/// Final phonon number at `t = 2 t0` with default integration settings.
pub fn final_phonon(sp: &SystemParams, p: &PulseParams, rwa: bool) -> Result<f64> {
    Runner { rwa, ..Runner::default() }.final_phonon(sp, p)
}

impl Runner {
    pub fn new(rwa: bool, dt: f64) -> Self {
        Runner { rwa, dt }
    }

    fn metadata(&self, sp: &SystemParams, p: &PulseParams, lock_chi0: bool) -> SweepMetadata {
        SweepMetadata {
            system: *sp,
            pulse: *p,
            rwa: self.rwa,
            dt: self.dt,
            lock_chi0,
        }
    }

    /// Displaced phonon and photon numbers at the end of the pulse window.
    pub fn final_state(&self, sp: &SystemParams, p: &PulseParams) -> Result<Observables> {
        p.validate()?;
        let grid = TimeGrid::new(0.0, p.final_time(), self.dt)?;
        let r = propagate_covariance_with(sp, p, &grid, self.rwa, |_, _, _| {})?;
        Ok(observables(&r))
    }

    pub fn final_phonon(&self, sp: &SystemParams, p: &PulseParams) -> Result<f64> {
        Ok(self.final_state(sp, p)?.phonon)
    }

    fn sweep<F>(&self, axis_name: &str, values: &[f64], metadata: SweepMetadata, point: F) -> Result<SweepResult>
    where
        F: Fn(f64) -> (SystemParams, PulseParams) + Sync,
    {
        let finals: Vec<Observables> = values
            .par_iter()
            .map(|&x| {
                let (sp, p) = point(x);
                self.final_state(&sp, &p)
            })
            .collect::<Result<_>>()?;
        Ok(SweepResult {
            axis_name: axis_name.to_string(),
            axis_values: values.to_vec(),
            final_phonon: finals.iter().map(|o| o.phonon).collect(),
            final_photon: finals.iter().map(|o| o.photon).collect(),
            metadata,
        })
    }

    /// Final phonons over chirp rates. With `lock_chi0` the peak coupling
    /// follows the optimal relation for each rate; the area deviation of
    /// `base` is applied on top.
    pub fn sweep_beta(
        &self,
        sp: &SystemParams,
        base: &PulseParams,
        betas: &[f64],
        lock_chi0: bool,
    ) -> Result<SweepResult> {
        let meta = self.metadata(sp, base, lock_chi0);
        self.sweep("beta", betas, meta, |b| (*sp, base.with_beta(b, lock_chi0)))
    }

    pub fn sweep_detuning(&self, sp: &SystemParams, p: &PulseParams, detunings: &[f64]) -> Result<SweepResult> {
        let meta = self.metadata(sp, p, false);
        self.sweep("delta_c", detunings, meta, |d| (SystemParams { delta_c: d, ..*sp }, *p))
    }

    /// Final phonons over pulse-area deviations, `chi -> (1 + delta) chi`.
    pub fn sweep_area_deviation(&self, sp: &SystemParams, p: &PulseParams, deltas: &[f64]) -> Result<SweepResult> {
        let meta = self.metadata(sp, p, false);
        self.sweep("delta_dev", deltas, meta, |d| (*sp, PulseParams { delta_dev: d, ..*p }))
    }

    /// Minimizes the final phonon number over `beta` in `bounds` with `chi0`
    /// locked: a 41-point scan, then golden-section refinement inside the
    /// bracket of the best scan point. Values within `tie_tolerance` of each
    /// other count as equal and resolve to the smaller `|beta|`.
    pub fn optimize_beta(
        &self,
        sp: &SystemParams,
        base: &PulseParams,
        bounds: (f64, f64),
    ) -> Result<BetaOptimum> {
        let (lo, hi) = bounds;
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidParameter(format!(
                "optimization bounds ({lo}, {hi}) must be finite and ordered"
            )));
        }
        let tie_tolerance = 1e-6 * sp.n_bar_m.max(1.0);
        let objective = |beta: f64| -> Result<f64> {
            let f = self.final_phonon(sp, &base.with_beta(beta, true))?;
            if f.is_finite() {
                Ok(f)
            } else {
                Err(Error::NonFiniteObjective { beta })
            }
        };
        if lo == hi {
            let f = objective(lo)?;
            return Ok(BetaOptimum {
                beta: lo,
                phonon: f,
                evaluations: 1,
            });
        }

        let grid = linspace(lo, hi, DEFAULT_SWEEP_POINTS);
        let values: Vec<f64> = grid.par_iter().map(|&b| objective(b)).collect::<Result<_>>()?;
        let mut evaluations = grid.len();
        let best = pick_best(grid.iter().copied().zip(values.iter().copied()), tie_tolerance).unwrap();
        let k = grid.iter().position(|&b| b == best.0).unwrap();

        let (mut a, mut b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = objective(x1)?;
        let mut f2 = objective(x2)?;
        evaluations += 2;
        while (b - a) > OPTIMIZE_WIDTH {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = objective(x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = objective(x2)?;
            }
            evaluations += 1;
        }
        let refined = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        let (beta, phonon) = pick_best([best, refined].into_iter(), tie_tolerance).unwrap();
        Ok(BetaOptimum {
            beta,
            phonon,
            evaluations,
        })
    }

    /// Phonon number at the end of the pulse and at `t_end`, from one run
    /// extended past the pulse.
    pub fn heating_tail(&self, sp: &SystemParams, p: &PulseParams, t_end: f64) -> Result<(f64, f64)> {
        let t_pulse = p.final_time();
        if !(t_end > t_pulse) {
            return Err(Error::InvalidParameter(format!(
                "tail end {t_end} must lie beyond the pulse end {t_pulse}"
            )));
        }
        let grid = TimeGrid::new(0.0, t_end, self.dt)?;
        let k_pulse = grid.index_of(t_pulse);
        let mut at_pulse = f64::NAN;
        let last = propagate_covariance_with(sp, p, &grid, self.rwa, |k, _, r| {
            if k == k_pulse {
                at_pulse = r.phonon();
            }
        })?;
        Ok((at_pulse, last.phonon()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaOptimum {
    pub beta: f64,
    pub phonon: f64,
    pub evaluations: usize,
}

/// Lowest value, with near-ties going to the smaller `|x|` and then to the
/// positive side.
fn pick_best(candidates: impl Iterator<Item = (f64, f64)>, tie_tolerance: f64) -> Option<(f64, f64)> {
    let all: Vec<(f64, f64)> = candidates.collect();
    let min = all.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    all.into_iter()
        .filter(|c| c.1 <= min + tie_tolerance)
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(b.0.total_cmp(&a.0)))
}
