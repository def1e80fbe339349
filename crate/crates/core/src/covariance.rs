//! Second-moment dynamics of the linearized fluctuations.
//!
//! The fluctuation vector is `v = [dA, dB, dA†, dB†]`, where `dA` is the
//! cavity fluctuation in the frame co-rotating with the chirp phase and the
//! shifted detuning, and `dB` the mirror fluctuation in the frame rotating at
//! `omega_m`. Because `v` holds the daggered operators explicitly, every
//! "transpose" below is a plain transpose: `R = <v vᵀ>`, never `<v v†>`.

use log::warn;

use crate::error::{Error, Result};
use crate::model::{chirp_amplitude, chirp_phase_rate, MeanFieldTrajectory, PulseParams, SystemParams};
use crate::numerics::{rk4_drive, ComplexMatrix4, TimeGrid, C64, I, ONE};

/// Commutator drift beyond this aborts a propagation.
pub const COMMUTATOR_ABORT: f64 = 1e-3;
/// Largest propagator condition number accepted on the Green-function path.
pub const GREEN_CONDITION_LIMIT: f64 = 1e8;
/// Imaginary residue in a number-type moment above this is reported.
pub const IMAG_WARN: f64 = 1e-6;

/// A time-dependent beam-splitter/parametric coupling: amplitude `chi(t)` and
/// the rate of its phase.
pub trait Coupling {
    fn amplitude(&self, t: f64) -> f64;
    fn phase_rate(&self, t: f64) -> f64;
}

impl Coupling for PulseParams {
    fn amplitude(&self, t: f64) -> f64 {
        chirp_amplitude(t, self)
    }

    fn phase_rate(&self, t: f64) -> f64 {
        chirp_phase_rate(t, self)
    }
}

/// `R[l][l'] = <v_l v_l'>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMomentMatrix(pub ComplexMatrix4);

impl SecondMomentMatrix {
    /// Displaced phonon number `<dB† dB>`.
    pub fn phonon(&self) -> f64 {
        self.0[(3, 1)].re
    }

    /// Displaced photon number `<dA† dA>`.
    pub fn photon(&self) -> f64 {
        self.0[(2, 0)].re
    }

    /// Largest deviation of `[dA, dA†]` and `[dB, dB†]` from one.
    pub fn commutator_drift(&self) -> f64 {
        let r = &self.0;
        let cav = (r[(0, 2)] - r[(2, 0)] - ONE).norm();
        let mech = (r[(1, 3)] - r[(3, 1)] - ONE).norm();
        cav.max(mech)
    }

    /// Largest violation of `R[σl][σl'] = conj(R[l'][l])` with σ swapping each
    /// operator with its adjoint.
    pub fn swap_symmetry_error(&self) -> f64 {
        let sigma = |l: usize| (l + 2) % 4;
        let mut worst: f64 = 0.0;
        for l in 0..4 {
            for m in 0..4 {
                let d = self.0[(sigma(l), sigma(m))] - self.0[(m, l)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Delta-correlated bath correlations `<N_l(t) N_l'(t')> = C δ(t - t')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMatrix(pub ComplexMatrix4);

/// Drift matrix of the fluctuation equations at time `t`. With `rwa` the
/// counter-rotating entries oscillating at `delta_c + omega_m` are dropped.
pub fn build_m_matrix(t: f64, sp: &SystemParams, p: &impl Coupling, rwa: bool) -> ComplexMatrix4 {
    let chi = p.amplitude(t);
    let phi_dot = p.phase_rate(t);
    let co = C64::from_polar(1.0, (sp.delta_c - sp.omega_m) * t);
    let counter = C64::from_polar(1.0, (sp.delta_c + sp.omega_m) * t);
    let ichi = I * chi;
    let kc = -0.5 * sp.gamma_c;
    let km = C64::new(-0.5 * sp.gamma_m, 0.0);

    let mut m = ComplexMatrix4::zeros();
    m[(0, 0)] = C64::new(kc, phi_dot);
    m[(0, 1)] = ichi * co;
    m[(1, 0)] = ichi * co.conj();
    m[(1, 1)] = km;
    m[(2, 2)] = C64::new(kc, -phi_dot);
    m[(2, 3)] = -ichi * co.conj();
    m[(3, 2)] = -ichi * co;
    m[(3, 3)] = km;
    if !rwa {
        m[(0, 3)] = ichi * counter;
        m[(1, 2)] = ichi * counter;
        m[(2, 1)] = -ichi * counter.conj();
        m[(3, 0)] = -ichi * counter.conj();
    }
    m
}

/// Cavity in vacuum, mirror thermal at `n_bar_m`.
pub fn initial_covariance(n_bar_m: f64) -> SecondMomentMatrix {
    let mut r = ComplexMatrix4::zeros();
    r[(0, 2)] = ONE;
    r[(1, 3)] = C64::new(n_bar_m + 1.0, 0.0);
    r[(3, 1)] = C64::new(n_bar_m, 0.0);
    SecondMomentMatrix(r)
}

pub fn noise_matrix(sp: &SystemParams) -> NoiseMatrix {
    let mut c = ComplexMatrix4::zeros();
    c[(0, 2)] = C64::new(sp.gamma_c, 0.0);
    c[(1, 3)] = C64::new(sp.gamma_m * (sp.n_bar_m + 1.0), 0.0);
    c[(3, 1)] = C64::new(sp.gamma_m * sp.n_bar_m, 0.0);
    NoiseMatrix(c)
}

fn check_commutators(t: f64, r: &SecondMomentMatrix) -> Result<()> {
    let drift = r.commutator_drift();
    if drift > COMMUTATOR_ABORT || !drift.is_finite() {
        return Err(Error::CommutatorDrift {
            t,
            drift,
            limit: COMMUTATOR_ABORT,
        });
    }
    Ok(())
}

fn check_grid(grid: &TimeGrid) -> Result<()> {
    if grid.t_start != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "propagation grid must start at t = 0, got {}",
            grid.t_start
        )));
    }
    Ok(())
}

/// Moment-equation propagation `dR/dt = M R + R Mᵀ + C`, visiting every node.
pub fn propagate_covariance_with<F>(
    sp: &SystemParams,
    p: &impl Coupling,
    grid: &TimeGrid,
    rwa: bool,
    mut observe: F,
) -> Result<SecondMomentMatrix>
where
    F: FnMut(usize, f64, &SecondMomentMatrix),
{
    sp.validate()?;
    check_grid(grid)?;
    let noise = noise_matrix(sp).0;
    let r0 = initial_covariance(sp.n_bar_m).0.to_vec();
    let last = rk4_drive(
        |t, y, dy| {
            let m = build_m_matrix(t, sp, p, rwa);
            let r = ComplexMatrix4::from_slice(y);
            let drift = m * r;
            for i in 0..4 {
                for j in 0..4 {
                    // (R Mᵀ)_ij = Σ_k R_ik M_jk
                    let rmt: C64 = (0..4).map(|k| r[(i, k)] * m[(j, k)]).sum();
                    dy[4 * i + j] = drift[(i, j)] + rmt + noise[(i, j)];
                }
            }
        },
        &r0,
        grid,
        |k, t, y| {
            let r = SecondMomentMatrix(ComplexMatrix4::from_slice(y));
            check_commutators(t, &r)?;
            observe(k, t, &r);
            Ok(())
        },
    )?;
    Ok(SecondMomentMatrix(ComplexMatrix4::from_slice(&last)))
}

/// Second moments at every grid node via the moment equation.
pub fn propagate_covariance(
    sp: &SystemParams,
    p: &impl Coupling,
    grid: &TimeGrid,
    rwa: bool,
) -> Result<Vec<SecondMomentMatrix>> {
    let mut out = Vec::with_capacity(grid.len());
    propagate_covariance_with(sp, p, grid, rwa, |_, _, r| out.push(*r))?;
    Ok(out)
}

/// Propagator route: `R = G (R0 + Z) Gᵀ` with `dG/dt = M G`, `G(0) = I` and
/// `Z(t) = ∫ G⁻¹ C G⁻ᵀ dτ` accumulated by the trapezoid rule on the nodes.
pub fn propagate_via_green(
    sp: &SystemParams,
    p: &impl Coupling,
    grid: &TimeGrid,
    rwa: bool,
) -> Result<Vec<SecondMomentMatrix>> {
    sp.validate()?;
    check_grid(grid)?;
    let noise = noise_matrix(sp).0;
    let r0 = initial_covariance(sp.n_bar_m).0;
    let mut z = ComplexMatrix4::zeros();
    let mut prev_integrand: Option<ComplexMatrix4> = None;
    let half_dt = C64::new(0.5 * grid.dt, 0.0);
    let mut out = Vec::with_capacity(grid.len());

    rk4_drive(
        |t, y, dy| {
            let m = build_m_matrix(t, sp, p, rwa);
            (m * ComplexMatrix4::from_slice(y)).write_to(dy);
        },
        &ComplexMatrix4::identity().to_vec(),
        grid,
        |_, t, y| {
            let g = ComplexMatrix4::from_slice(y);
            let g_inv = g.inverse().ok_or(Error::IllConditioned {
                t,
                cond: f64::INFINITY,
                limit: GREEN_CONDITION_LIMIT,
            })?;
            let cond = g.norm_1() * g_inv.norm_1();
            if cond > GREEN_CONDITION_LIMIT {
                return Err(Error::IllConditioned {
                    t,
                    cond,
                    limit: GREEN_CONDITION_LIMIT,
                });
            }
            let integrand = g_inv * noise * g_inv.transpose();
            if let Some(prev) = prev_integrand {
                z += (prev + integrand).scale(half_dt);
            }
            prev_integrand = Some(integrand);
            let r = SecondMomentMatrix(g * (r0 + z) * g.transpose());
            check_commutators(t, &r)?;
            out.push(r);
            Ok(())
        },
    )?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub phonon: f64,
    pub photon: f64,
}

/// Displaced phonon and photon numbers; warns when the number-type moments
/// carry an imaginary residue.
pub fn observables(r: &SecondMomentMatrix) -> Observables {
    let im = r.0[(3, 1)].im.abs().max(r.0[(2, 0)].im.abs());
    if im > IMAG_WARN {
        warn!("number moments carry imaginary residue {im:.3e}; integration accuracy is suspect");
    }
    Observables {
        phonon: r.phonon(),
        photon: r.photon(),
    }
}

/// Where the small-fluctuation assumption is weakest along a run.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationReport {
    /// Times with `|<a>|^2 < 10 <da† da>`.
    pub flagged_times: Vec<f64>,
    /// Smallest `|<a>|^2 / <da† da>` seen, and where.
    pub worst_ratio: f64,
    pub worst_time: f64,
}

impl LinearizationReport {
    pub fn is_clean(&self) -> bool {
        self.flagged_times.is_empty()
    }

    /// Flags restricted to a window of interest.
    pub fn flags_within(&self, t_lo: f64, t_hi: f64) -> usize {
        self.flagged_times.iter().filter(|&&t| t >= t_lo && t <= t_hi).count()
    }
}

pub const LINEARIZATION_MARGIN: f64 = 10.0;

pub fn linearization_check(traj: &MeanFieldTrajectory, rseq: &[SecondMomentMatrix]) -> LinearizationReport {
    let mut report = LinearizationReport {
        flagged_times: Vec::new(),
        worst_ratio: f64::INFINITY,
        worst_time: traj.grid.t_start,
    };
    for ((t, a), r) in traj.grid.times().zip(&traj.a_mean).zip(rseq) {
        let coherent = a.norm_sqr();
        let photons = r.photon().max(0.0);
        if coherent < 1e-12 && photons < 1e-12 {
            continue;
        }
        let ratio = if photons > 0.0 {
            coherent / photons
        } else {
            f64::INFINITY
        };
        if ratio < report.worst_ratio {
            report.worst_ratio = ratio;
            report.worst_time = t;
        }
        if coherent < LINEARIZATION_MARGIN * photons {
            report.flagged_times.push(t);
        }
    }
    report
}

/// `|det G|` implied by the trace of the drift, `exp(-(gamma_c + gamma_m) t)`.
pub fn propagator_determinant_modulus(sp: &SystemParams, t: f64) -> f64 {
    (-(sp.gamma_c + sp.gamma_m) * t).exp()
}
