//! Reference computations that share no code path with the library's
//! propagators.

#![allow(dead_code)]

use chirpcool::model::{MeanFieldTrajectory, PulseParams, SystemParams};
use chirpcool::numerics::{ComplexMatrix4, C64, I, ONE};

/// Matrix exponential by scaling and squaring of a Taylor series.
pub fn expm(m: &ComplexMatrix4) -> ComplexMatrix4 {
    let norm = m.norm_1();
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut term = ComplexMatrix4::identity();
    let mut sum = ComplexMatrix4::identity();
    for k in 1..=24 {
        term = (term * scaled).scale(C64::new(1.0 / k as f64, 0.0));
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Second moments of `[da, db, da†, db†]` in the original (non-rotating)
/// frame, driven by the sampled mean fields of `traj`. RK4 with a step of two
/// grid intervals so every stage lands on a sample. Returns the phonon
/// number `<db† db>` on the even nodes.
pub fn lab_frame_phonons(sp: &SystemParams, traj: &MeanFieldTrajectory) -> Vec<C64> {
    let grid = traj.grid;
    let g = sp.g;
    let mut c = ComplexMatrix4::zeros();
    c[(0, 2)] = C64::new(sp.gamma_c, 0.0);
    c[(1, 3)] = C64::new(sp.gamma_m * (sp.n_bar_m + 1.0), 0.0);
    c[(3, 1)] = C64::new(sp.gamma_m * sp.n_bar_m, 0.0);
    let drift = |k: usize| {
        let a = traj.a_mean[k];
        let b = traj.b_mean[k];
        let det = sp.delta_c - 2.0 * g * b.re;
        let mut m = ComplexMatrix4::zeros();
        m[(0, 0)] = C64::new(-0.5 * sp.gamma_c, -det);
        m[(0, 1)] = I * g * a;
        m[(0, 3)] = I * g * a;
        m[(1, 0)] = I * g * a.conj();
        m[(1, 1)] = C64::new(-0.5 * sp.gamma_m, -sp.omega_m);
        m[(1, 2)] = I * g * a;
        m[(2, 1)] = -I * g * a.conj();
        m[(2, 2)] = C64::new(-0.5 * sp.gamma_c, det);
        m[(2, 3)] = -I * g * a.conj();
        m[(3, 0)] = -I * g * a.conj();
        m[(3, 2)] = -I * g * a;
        m[(3, 3)] = C64::new(-0.5 * sp.gamma_m, sp.omega_m);
        m
    };
    let f = |k: usize, r: &ComplexMatrix4| {
        let m = drift(k);
        m * *r + *r * m.transpose() + c
    };
    let mut r = ComplexMatrix4::zeros();
    r[(0, 2)] = ONE;
    r[(1, 3)] = C64::new(sp.n_bar_m + 1.0, 0.0);
    r[(3, 1)] = C64::new(sp.n_bar_m, 0.0);
    let h = C64::new(2.0 * grid.dt, 0.0);
    let half = C64::new(0.5, 0.0);
    let mut out = vec![r[(3, 1)]];
    for j in 0..grid.n_steps / 2 {
        let k = 2 * j;
        let k1 = f(k, &r);
        let k2 = f(k + 1, &(r + (k1.scale(h * half))));
        let k3 = f(k + 1, &(r + (k2.scale(h * half))));
        let k4 = f(k + 2, &(r + k3.scale(h)));
        r += (k1 + k2.scale(C64::new(2.0, 0.0)) + k3.scale(C64::new(2.0, 0.0)) + k4)
            .scale(h / C64::new(6.0, 0.0));
        out.push(r[(3, 1)]);
    }
    out
}

/// `<b(t)>` from direct composite-Simpson quadrature of the driven,
/// damped oscillator response (no ODE integration).
pub fn mirror_amplitude_by_quadrature(sp: &SystemParams, p: &PulseParams, t: f64, n: usize) -> C64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = t / n as f64;
    let kernel = C64::new(0.5 * sp.gamma_m, sp.omega_m);
    let integrand = |tau: f64| {
        let chi = chirp_amplitude_ref(tau, p);
        (chi * chi) * (-kernel * (t - tau)).exp()
    };
    let mut sum = integrand(0.0) + integrand(t);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += integrand(k as f64 * h) * w;
    }
    I * (sum * (h / 3.0)) / sp.g
}

fn chirp_amplitude_ref(t: f64, p: &PulseParams) -> f64 {
    (1.0 + p.delta_dev) * p.chi0 / (p.alpha * (t - p.t0)).cosh()
}
