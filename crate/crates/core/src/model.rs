//! Physical parameters, chirped-pulse shape, classical mean-field dynamics and
//! reconstruction of the external drive that realizes a prescribed coupling.
//!
//! Units: the mechanical frequency sets the scale. Every rate is stored in
//! units of `omega_m` and every time in units of `1 / omega_m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cumulative_trapezoid, ln_cosh, rk4_drive, sech, TimeGrid, C64, I, ZERO};

/// Peak couplings at or above this fraction of `omega_m` put the
/// rotating-wave regime in doubt.
pub const RWA_CHI0_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_m: f64,
    /// Cavity detuning from the drive carrier.
    pub delta_c: f64,
    /// Single-photon radiation-pressure coupling.
    pub g: f64,
    pub gamma_c: f64,
    pub gamma_m: f64,
    /// Thermal occupation of the mirror and its bath.
    pub n_bar_m: f64,
}

impl SystemParams {
    /// Toroidal microresonator figures: omega_m = 2π·73.5 MHz,
    /// gamma_m = 2π·1.3 kHz, gamma_c = 2π·3.2 MHz, g = 2π·843.1 Hz, on red
    /// sideband resonance with a mirror at n_bar = 1000.
    pub fn reference() -> Self {
        SystemParams {
            omega_m: 1.0,
            delta_c: 1.0,
            g: 1.147e-5,
            gamma_c: 0.0435,
            gamma_m: 1.768e-5,
            n_bar_m: 1000.0,
        }
    }

    /// Lossless copy of `self`.
    pub fn lossless(self) -> Self {
        SystemParams {
            gamma_c: 0.0,
            gamma_m: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter(msg.to_string()))
            }
        };
        check(self.omega_m > 0.0, "omega_m must be positive")?;
        check(self.g > 0.0, "g must be positive")?;
        check(self.gamma_c >= 0.0, "gamma_c must be non-negative")?;
        check(self.gamma_m >= 0.0, "gamma_m must be non-negative")?;
        check(self.n_bar_m >= 0.0, "n_bar_m must be non-negative")?;
        check(self.delta_c.is_finite(), "delta_c must be finite")
    }
}

/// Allen–Eberly chirp: amplitude `chi0 sech[alpha (t - t0)]` scaled by
/// `1 + delta_dev`, instantaneous frequency `beta tanh[alpha (t - t0)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub chi0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t0: f64,
    pub delta_dev: f64,
}

impl PulseParams {
    /// Pulse with `chi0` locked to [`optimal_chi0`].
    pub fn optimal(alpha: f64, beta: f64, t0: f64) -> Self {
        PulseParams {
            chi0: optimal_chi0(alpha, beta),
            alpha,
            beta,
            t0,
            delta_dev: 0.0,
        }
    }

    /// alpha = 0.14, beta = 0.04, t0 = 40, optimal chi0.
    pub fn reference() -> Self {
        Self::optimal(0.14, 0.04, 40.0)
    }

    /// Same pulse with a different chirp rate, re-locking `chi0` if asked.
    pub fn with_beta(self, beta: f64, lock_chi0: bool) -> Self {
        PulseParams {
            beta,
            chi0: if lock_chi0 {
                optimal_chi0(self.alpha, beta)
            } else {
                self.chi0
            },
            ..self
        }
    }

    /// Peak coupling including the area deviation.
    pub fn effective_chi0(&self) -> f64 {
        (1.0 + self.delta_dev) * self.chi0
    }

    /// End of the pulse window, where "final" observables are read.
    pub fn final_time(&self) -> f64 {
        2.0 * self.t0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive".into()));
        }
        if !(self.chi0 >= 0.0) {
            return Err(Error::InvalidParameter("chi0 must be non-negative".into()));
        }
        if !(self.t0 > 0.0) {
            return Err(Error::InvalidParameter("t0 must be positive".into()));
        }
        if !(self.beta.is_finite() && self.delta_dev.is_finite()) {
            return Err(Error::InvalidParameter("beta and delta_dev must be finite".into()));
        }
        Ok(())
    }

    /// Raised when the peak coupling is no longer small against `omega_m`.
    pub fn rwa_flag(&self, omega_m: f64) -> bool {
        self.effective_chi0() >= RWA_CHI0_LIMIT * omega_m
    }
}

pub fn chirp_amplitude(t: f64, p: &PulseParams) -> f64 {
    p.effective_chi0() * sech(p.alpha * (t - p.t0))
}

/// Instantaneous frequency offset, the time derivative of [`chirp_phase`].
pub fn chirp_phase_rate(t: f64, p: &PulseParams) -> f64 {
    p.beta * (p.alpha * (t - p.t0)).tanh()
}

/// `(beta/alpha) ln[cosh(alpha (t - t0)) / cosh(alpha t0)]`, zero at `t = 0`.
pub fn chirp_phase(t: f64, p: &PulseParams) -> f64 {
    (p.beta / p.alpha) * (ln_cosh(p.alpha * (t - p.t0)) - ln_cosh(p.alpha * p.t0))
}

/// Peak coupling for complete adiabatic transfer in the lossless limit.
pub fn optimal_chi0(alpha: f64, beta: f64) -> f64 {
    0.5 * alpha.hypot(beta)
}

/// Classical amplitudes on a grid starting at `t = 0`.
#[derive(Debug, Clone)]
pub struct MeanFieldTrajectory {
    pub grid: TimeGrid,
    pub a_mean: Vec<C64>,
    pub b_mean: Vec<C64>,
    /// `2 g ∫_0^t Re<b>`, the accumulated cavity frequency shift.
    pub phase_integral: Vec<f64>,
    pub omega_drive: Vec<C64>,
}

impl MeanFieldTrajectory {
    pub fn len(&self) -> usize {
        self.a_mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_mean.is_empty()
    }
}

/// Mirror amplitude is driven by radiation pressure `i chi(t)^2 / g` from a
/// cavity whose amplitude modulus is pinned to `chi(t) / g`; the cavity
/// amplitude then follows from the coupling phase convention.
pub fn mean_field_solve(sp: &SystemParams, p: &PulseParams, grid: &TimeGrid) -> Result<MeanFieldTrajectory> {
    sp.validate()?;
    p.validate()?;
    if grid.t_start != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "mean-field grid must start at t = 0, got {}",
            grid.t_start
        )));
    }
    let damping = C64::new(0.5 * sp.gamma_m, sp.omega_m);
    let g = sp.g;
    let mut b_mean = Vec::with_capacity(grid.len());
    rk4_drive(
        |t, y, dy| {
            let chi = chirp_amplitude(t, p);
            dy[0] = -damping * y[0] + I * (chi * chi / g);
        },
        &[ZERO],
        grid,
        |_, _, y| {
            b_mean.push(y[0]);
            Ok(())
        },
    )?;

    let shift: Vec<f64> = b_mean.iter().map(|b| 2.0 * g * b.re).collect();
    let phase_integral = cumulative_trapezoid(&shift, grid.dt)?;
    let a_mean = grid
        .times()
        .zip(&phase_integral)
        .map(|(t, &pi)| (chirp_amplitude(t, p) / g) * (-I * (chirp_phase(t, p) - pi)).exp())
        .collect();

    let mut traj = MeanFieldTrajectory {
        grid: *grid,
        a_mean,
        b_mean,
        phase_integral,
        omega_drive: Vec::new(),
    };
    traj.omega_drive = drive_reconstruct(&traj, sp, p);
    Ok(traj)
}

/// External drive amplitude that produces `traj.a_mean`, using the analytic
/// time derivative of the cavity amplitude.
pub fn drive_reconstruct(traj: &MeanFieldTrajectory, sp: &SystemParams, p: &PulseParams) -> Vec<C64> {
    traj.grid
        .times()
        .zip(traj.a_mean.iter().zip(&traj.b_mean))
        .map(|(t, (&a, &b))| {
            let shift = 2.0 * sp.g * b.re;
            let detuning = sp.delta_c - shift;
            let a_dot = a * C64::new(
                -p.alpha * (p.alpha * (t - p.t0)).tanh(),
                -(chirp_phase_rate(t, p) - shift),
            );
            I * a_dot - C64::new(detuning, -0.5 * sp.gamma_c) * a
        })
        .collect()
}

/// Forward-integrates the classical cavity/mirror equations under a sampled
/// drive. Steps are two grid intervals wide so every RK4 stage lands on a
/// sample; returns `(a, b)` on the even nodes `0, 2, 4, ...`.
pub fn replay_mean_field(
    sp: &SystemParams,
    grid: &TimeGrid,
    a0: C64,
    b0: C64,
    omega_drive: &[C64],
) -> Result<(Vec<C64>, Vec<C64>)> {
    if omega_drive.len() != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "drive has {} samples for a grid of {} nodes",
            omega_drive.len(),
            grid.len()
        )));
    }
    let pairs = grid.n_steps / 2;
    if pairs == 0 {
        return Err(Error::InvalidGrid("replay needs at least two grid steps".into()));
    }
    let coarse = TimeGrid {
        t_start: grid.t_start,
        t_end: grid.time(2 * pairs),
        dt: 2.0 * grid.dt,
        n_steps: pairs,
    };
    let fine_dt = grid.dt;
    let t_start = grid.t_start;
    let drive_at = |t: f64| {
        let k = ((t - t_start) / fine_dt).round() as usize;
        omega_drive[k.min(omega_drive.len() - 1)]
    };
    let mut a_out = Vec::with_capacity(pairs + 1);
    let mut b_out = Vec::with_capacity(pairs + 1);
    rk4_drive(
        |t, y, dy| {
            let (a, b) = (y[0], y[1]);
            let detuning = sp.delta_c - 2.0 * sp.g * b.re;
            dy[0] = -I * detuning * a - I * drive_at(t) - 0.5 * sp.gamma_c * a;
            dy[1] = C64::new(-0.5 * sp.gamma_m, -sp.omega_m) * b + I * (sp.g * a.norm_sqr());
        },
        &[a0, b0],
        &coarse,
        |_, _, y| {
            a_out.push(y[0]);
            b_out.push(y[1]);
            Ok(())
        },
    )?;
    Ok((a_out, b_out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse() -> PulseParams {
        PulseParams::reference()
    }

    #[test]
    fn amplitude_values() {
        let p = pulse();
        assert_eq!(chirp_amplitude(p.t0, &p), p.chi0);
        assert!(chirp_amplitude(p.t0 + 50.0 / p.alpha, &p) < 1e-21 * p.chi0);
        assert!(chirp_amplitude(p.t0 - 50.0 / p.alpha, &p) < 1e-21 * p.chi0);
        let r = chirp_amplitude(p.t0 + 1.0 / p.alpha, &p) / p.chi0;
        assert!((r - 0.6480543).abs() < 1e-7);
        let dev = PulseParams { delta_dev: 0.1, ..p };
        assert!((chirp_amplitude(p.t0, &dev) - 1.1 * p.chi0).abs() < 1e-15);
    }

    #[test]
    fn phase_rate_values() {
        let p = pulse();
        assert_eq!(chirp_phase_rate(p.t0, &p), 0.0);
        assert!((chirp_phase_rate(p.t0 + 5.0 / p.alpha, &p) - p.beta * 0.999909).abs() < 1e-7);
        assert!((chirp_phase_rate(p.t0 - 5.0 / p.alpha, &p) + p.beta * 0.999909).abs() < 1e-7);
    }

    #[test]
    fn phase_values() {
        let p = pulse();
        assert!(chirp_phase(0.0, &p).abs() < 1e-15);
        assert!(chirp_phase(2.0 * p.t0, &p).abs() < 1e-13);
        let expected = -(p.beta / p.alpha) * (p.alpha * p.t0).cosh().ln();
        assert!((chirp_phase(p.t0, &p) - expected).abs() < 1e-13);
        // no overflow far out
        let wide = PulseParams { t0: 1e4, ..p };
        assert!(chirp_phase(0.5, &wide).is_finite());
    }

    #[test]
    fn optimal_chi0_values() {
        assert_eq!(optimal_chi0(0.3, 0.0), 0.15);
        assert!((optimal_chi0(0.14, 0.04) - 0.0728011).abs() < 1e-7);
        assert_eq!(optimal_chi0(3.0, 4.0), 2.5);
    }

    #[test]
    fn rwa_flag_threshold() {
        let mut p = pulse();
        assert!(!p.rwa_flag(1.0));
        p.chi0 = 0.25;
        assert!(p.rwa_flag(1.0));
    }

    #[test]
    fn parameter_validation() {
        let mut sp = SystemParams::reference();
        sp.g = 0.0;
        let grid = TimeGrid::new(0.0, 1.0, 1e-2).unwrap();
        assert!(mean_field_solve(&sp, &pulse(), &grid).is_err());
        sp.g = 1e-5;
        sp.gamma_c = -1.0;
        assert!(sp.validate().is_err());
        let p = PulseParams { alpha: 0.0, ..pulse() };
        assert!(p.validate().is_err());
        let late = TimeGrid::new(1.0, 2.0, 1e-2).unwrap();
        assert!(mean_field_solve(&SystemParams::reference(), &pulse(), &late).is_err());
    }

    #[test]
    fn zero_pulse_is_trivial() {
        let p = PulseParams { chi0: 0.0, ..pulse() };
        let grid = TimeGrid::new(0.0, 10.0, 1e-2).unwrap();
        let traj = mean_field_solve(&SystemParams::reference(), &p, &grid).unwrap();
        assert!(traj.a_mean.iter().all(|z| *z == ZERO));
        assert!(traj.b_mean.iter().all(|z| *z == ZERO));
        assert!(traj.omega_drive.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn cavity_modulus_is_pinned() {
        let sp = SystemParams::reference();
        let p = pulse();
        let grid = TimeGrid::new(0.0, 2.0 * p.t0, 1e-2).unwrap();
        let traj = mean_field_solve(&sp, &p, &grid).unwrap();
        for (t, a) in grid.times().zip(&traj.a_mean) {
            let chi = chirp_amplitude(t, &p);
            assert!((a.norm() * sp.g / chi - 1.0).abs() < 1e-12);
        }
    }
}
