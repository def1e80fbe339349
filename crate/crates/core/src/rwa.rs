//! Rotating-wave, lossless, resonant limit: the exchange dynamics between
//! cavity and mirror map onto a Bloch vector driven by the chirped pulse,
//! with a closed-form solution on the optimal-coupling manifold.

use log::warn;

use crate::covariance::{SecondMomentMatrix, IMAG_WARN};
use crate::error::{Error, Result};
use crate::model::{chirp_amplitude, chirp_phase_rate, optimal_chi0, PulseParams};
use crate::numerics::{rk4_drive, sech, TimeGrid, C64, I};

/// Chirp-amplitude tolerance for the closed-form solution to apply.
pub const MANIFOLD_TOLERANCE: f64 = 1e-9;

/// `u = <dA†dB> + <dB†dA>`, `v = i(<dB†dA> - <dA†dB>)`,
/// `w = <dA†dA> - <dB†dB>`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl BlochState {
    pub fn length(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    pub fn max_abs_diff(&self, other: &BlochState) -> f64 {
        (self.u - other.u)
            .abs()
            .max((self.v - other.v).abs())
            .max((self.w - other.w).abs())
    }
}

/// Integrates `u' = φ' v`, `v' = -φ' u + 2χ w`, `w' = -2χ v` from the thermal
/// start `(0, 0, -n_bar)`.
pub fn bloch_integrate(p: &PulseParams, n_bar_m: f64, grid: &TimeGrid) -> Result<Vec<BlochState>> {
    let mut out = Vec::with_capacity(grid.len());
    let y0 = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-n_bar_m, 0.0)];
    rk4_drive(
        |t, y, dy| {
            let chi = chirp_amplitude(t, p);
            let rate = chirp_phase_rate(t, p);
            dy[0] = rate * y[1];
            dy[1] = -rate * y[0] + 2.0 * chi * y[2];
            dy[2] = -2.0 * chi * y[1];
        },
        &y0,
        grid,
        |_, _, y| {
            out.push(BlochState {
                u: y[0].re,
                v: y[1].re,
                w: y[2].re,
            });
            Ok(())
        },
    )?;
    Ok(out)
}

fn require_manifold(p: &PulseParams) -> Result<()> {
    let optimal = optimal_chi0(p.alpha, p.beta);
    let chi0 = p.effective_chi0();
    if (chi0 - optimal).abs() > MANIFOLD_TOLERANCE {
        return Err(Error::OffManifold { chi0, optimal });
    }
    Ok(())
}

/// Closed-form Bloch vector; valid only for `chi0 = sqrt(alpha^2 + beta^2)/2`.
pub fn bloch_analytic(t: f64, p: &PulseParams, n_bar_m: f64) -> Result<BlochState> {
    require_manifold(p)?;
    let x = p.alpha * (t - p.t0);
    let s = sech(x);
    let chi0 = p.effective_chi0();
    Ok(BlochState {
        u: n_bar_m * p.beta / (2.0 * chi0) * s,
        v: -n_bar_m * p.alpha / (2.0 * chi0) * s,
        w: n_bar_m * x.tanh(),
    })
}

/// Quasi-phonon number `(n_bar/2)(1 - tanh[alpha (t - t0)])`.
pub fn rwa_phonon(t: f64, p: &PulseParams, n_bar_m: f64) -> Result<f64> {
    require_manifold(p)?;
    Ok(0.5 * n_bar_m * (1.0 - (p.alpha * (t - p.t0)).tanh()))
}

/// Projects a second-moment matrix onto the Bloch vector.
pub fn bloch_from_covariance(r: &SecondMomentMatrix) -> BlochState {
    let m = &r.0;
    let (r32, r41) = (m[(2, 1)], m[(3, 0)]);
    let u = r32 + r41;
    let v = I * (r41 - r32);
    let w = m[(2, 0)] - m[(3, 1)];
    let residue = u.im.abs().max(v.im.abs()).max(w.im.abs());
    if residue > IMAG_WARN {
        warn!("Bloch projection carries imaginary residue {residue:.3e}");
    }
    BlochState {
        u: u.re,
        v: v.re,
        w: w.re,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::initial_covariance;

    #[test]
    fn analytic_at_peak_and_tail() {
        let p = PulseParams::reference();
        let n = 1000.0;
        let s = bloch_analytic(p.t0, &p, n).unwrap();
        assert!((s.u - n * p.beta / (2.0 * p.chi0)).abs() < 1e-12);
        assert!((s.v + n * p.alpha / (2.0 * p.chi0)).abs() < 1e-12);
        assert_eq!(s.w, 0.0);
        let late = bloch_analytic(p.t0 + 5.0 / p.alpha, &p, n).unwrap();
        assert!((late.w - n * 0.999909).abs() < 1e-3);
        for k in 0..50 {
            let t = k as f64 * 2.0;
            let s = bloch_analytic(t, &p, n).unwrap();
            assert!((s.length() - n).abs() < 1e-9 * n);
        }
    }

    #[test]
    fn rwa_phonon_values() {
        let p = PulseParams::reference();
        assert!((rwa_phonon(p.t0, &p, 1000.0).unwrap() - 500.0).abs() < 1e-12);
        // 0.0455 is quoted from tanh 5 rounded to 0.999909
        let late = rwa_phonon(p.t0 + 5.0 / p.alpha, &p, 1000.0).unwrap();
        assert!((late - 0.0455).abs() < 2e-4);
        assert!((late - 500.0 * (1.0 - 5f64.tanh())).abs() < 1e-12);
        let early = rwa_phonon(0.0, &p, 1000.0).unwrap();
        assert!((early - 1000.0 * (1.0 + (5.6f64).tanh()) / 2.0).abs() < 1e-9);
        assert!(early > 999.9);
    }

    #[test]
    fn off_manifold_is_rejected() {
        let mut p = PulseParams::reference();
        p.chi0 *= 1.01;
        assert!(matches!(bloch_analytic(40.0, &p, 1.0), Err(Error::OffManifold { .. })));
        assert!(rwa_phonon(40.0, &p, 1.0).is_err());
        let dev = PulseParams { delta_dev: 0.1, ..PulseParams::reference() };
        assert!(rwa_phonon(40.0, &dev, 1.0).is_err());
    }

    #[test]
    fn zero_drive_is_static() {
        let p = PulseParams { chi0: 0.0, beta: 0.0, ..PulseParams::reference() };
        let grid = TimeGrid::new(0.0, 10.0, 1e-2).unwrap();
        for s in bloch_integrate(&p, 7.0, &grid).unwrap() {
            assert_eq!(s, BlochState { u: 0.0, v: 0.0, w: -7.0 });
        }
    }

    #[test]
    fn integration_matches_closed_form() {
        // u and v start at sech(alpha t0) n/2 in the closed form, so the
        // start must sit deep in the tail for a 1e-3 n agreement
        let p = PulseParams::optimal(0.14, 0.04, 60.0);
        let n = 1000.0;
        let grid = TimeGrid::new(0.0, 2.0 * p.t0, 1e-3).unwrap();
        let states = bloch_integrate(&p, n, &grid).unwrap();
        for (t, s) in grid.times().zip(&states) {
            let exact = bloch_analytic(t, &p, n).unwrap();
            assert!(s.max_abs_diff(&exact) < 1e-3 * n, "t = {t}");
            assert!((s.length() - n).abs() < 1e-8 * n);
        }
    }

    #[test]
    fn projection_of_thermal_state() {
        let s = bloch_from_covariance(&initial_covariance(250.0));
        assert_eq!(s, BlochState { u: 0.0, v: 0.0, w: -250.0 });
    }
}
