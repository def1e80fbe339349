//! Small dense numerical kernels: 4×4 complex matrices, fixed-step RK4 for
//! complex vector ODEs, and cumulative trapezoid quadrature.
//!
//! All rates are in units of the mechanical frequency and all times in its
//! inverse.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dense 4×4 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix4(pub [[C64; 4]; 4]);

impl Default for ComplexMatrix4 {
    fn default() -> Self {
        Self::zeros()
    }
}

impl ComplexMatrix4 {
    pub const fn zeros() -> Self {
        ComplexMatrix4([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for k in 0..4 {
            m.0[k][k] = ONE;
        }
        m
    }

    /// Builds a matrix from 16 row-major entries.
    pub fn from_slice(entries: &[C64]) -> Self {
        assert_eq!(entries.len(), 16, "ComplexMatrix4 needs 16 entries");
        let mut m = Self::zeros();
        for (k, z) in entries.iter().enumerate() {
            m.0[k / 4][k % 4] = *z;
        }
        m
    }

    pub fn write_to(&self, out: &mut [C64]) {
        for r in 0..4 {
            out[4 * r..4 * r + 4].copy_from_slice(&self.0[r]);
        }
    }

    pub fn to_vec(&self) -> Vec<C64> {
        let mut v = vec![ZERO; 16];
        self.write_to(&mut v);
        v
    }

    /// Plain transpose, no conjugation.
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for r in 0..4 {
            for c in 0..4 {
                t.0[c][r] = self.0[r][c];
            }
        }
        t
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|z| *z *= s);
        out
    }

    pub fn mul_vec(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|c| self.0[r][c] * v[c]).sum();
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm_1(&self) -> f64 {
        (0..4)
            .map(|c| (0..4).map(|r| self.0[r][c].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|k| self.0[k][k]).sum()
    }

    /// Gauss–Jordan inverse with partial pivoting. `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let mut a = self.0;
        let mut inv = Self::identity().0;
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .unwrap();
            if a[pivot][col].norm() == 0.0 {
                return None;
            }
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].inv();
            for k in 0..4 {
                a[col][k] *= p;
                inv[col][k] *= p;
            }
            for row in 0..4 {
                if row == col {
                    continue;
                }
                let f = a[row][col];
                if f == ZERO {
                    continue;
                }
                for k in 0..4 {
                    a[row][k] -= f * a[col][k];
                    inv[row][k] -= f * inv[col][k];
                }
            }
        }
        let inv = ComplexMatrix4(inv);
        inv.is_finite().then_some(inv)
    }

    /// 1-norm condition number; infinite for singular matrices.
    pub fn condition_number(&self) -> f64 {
        match self.inverse() {
            Some(inv) => self.norm_1() * inv.norm_1(),
            None => f64::INFINITY,
        }
    }

    pub fn determinant(&self) -> C64 {
        let mut a = self.0;
        let mut det = ONE;
        for col in 0..4 {
            let pivot = (col..4)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .unwrap();
            if a[pivot][col] == ZERO {
                return ZERO;
            }
            if pivot != col {
                a.swap(col, pivot);
                det = -det;
            }
            det *= a[col][col];
            for row in col + 1..4 {
                let f = a[row][col] / a[col][col];
                for k in col..4 {
                    let sub = f * a[col][k];
                    a[row][k] -= sub;
                }
            }
        }
        det
    }
}

impl Index<(usize, usize)> for ComplexMatrix4 {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix4 {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.0[r][c]
    }
}

impl Mul for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for r in 0..4 {
            for c in 0..4 {
                out.0[r][c] = (0..4).map(|k| self.0[r][k] * rhs.0[k][c]).sum();
            }
        }
        out
    }
}

impl Add for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ComplexMatrix4 {
    fn add_assign(&mut self, rhs: Self) {
        for r in 0..4 {
            for c in 0..4 {
                self.0[r][c] += rhs.0[r][c];
            }
        }
    }
}

impl Sub for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn sub(mut self, rhs: Self) -> Self {
        for r in 0..4 {
            for c in 0..4 {
                self.0[r][c] -= rhs.0[r][c];
            }
        }
        self
    }
}

/// Uniform time grid. `dt` is the realized step `(t_end - t_start) / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    /// `n_steps = round((t_end - t_start) / dt)`; the step is then adjusted so
    /// the last node lands exactly on `t_end`.
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && dt.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds or step".into()));
        }
        if t_end <= t_start {
            return Err(Error::InvalidGrid(format!(
                "t_end ({t_end}) must exceed t_start ({t_start})"
            )));
        }
        if dt <= 0.0 {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        let n_steps = ((t_end - t_start) / dt).round().max(1.0) as usize;
        Ok(TimeGrid {
            t_start,
            t_end,
            dt: (t_end - t_start) / n_steps as f64,
            n_steps,
        })
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    /// Index of the node closest to `t`, clamped to the grid.
    pub fn index_of(&self, t: f64) -> usize {
        let k = ((t - self.t_start) / self.dt).round();
        k.clamp(0.0, self.n_steps as f64) as usize
    }
}

/// Drives classical RK4 over `grid`, handing each node `(k, t, y)` to
/// `observe`, starting with the initial state at `k = 0`.
///
/// `rhs(t, y, dy)` writes the derivative into `dy`.
pub fn rk4_drive<F, O>(rhs: F, y0: &[C64], grid: &TimeGrid, mut observe: O) -> Result<Vec<C64>>
where
    F: Fn(f64, &[C64], &mut [C64]),
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut k1 = vec![ZERO; n];
    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut tmp = vec![ZERO; n];
    observe(0, grid.t_start, &y)?;
    let h = grid.dt;
    for step in 0..grid.n_steps {
        let t = grid.time(step);
        rhs(t, &y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + k2[i] * (0.5 * h);
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + k3[i] * h;
        }
        rhs(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        let t_next = grid.time(step + 1);
        if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { t: t_next });
        }
        observe(step + 1, t_next, &y)?;
    }
    Ok(y)
}

/// Classical RK4; returns the state at every grid node including both ends.
pub fn rk4_integrate<F>(rhs: F, y0: &[C64], grid: &TimeGrid) -> Result<Vec<Vec<C64>>>
where
    F: Fn(f64, &[C64], &mut [C64]),
{
    let mut out = Vec::with_capacity(grid.len());
    rk4_drive(rhs, y0, grid, |_, _, y| {
        out.push(y.to_vec());
        Ok(())
    })?;
    Ok(out)
}

/// Running trapezoid integral of uniformly spaced samples, starting at 0.
pub fn cumulative_trapezoid(samples: &[f64], dt: f64) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    let mut out = Vec::with_capacity(samples.len());
    out.push(0.0);
    let mut acc = 0.0;
    for w in samples.windows(2) {
        acc += dt * (w[0] + w[1]) / 2.0;
        out.push(acc);
    }
    Ok(out)
}

/// Numerically safe `ln(cosh(x))`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + ((1.0 + (-2.0 * a).exp()) / 2.0).ln()
}

pub fn sech(x: f64) -> f64 {
    let a = x.abs();
    // 2e^{-a} / (1 + e^{-2a}) never overflows
    let e = (-a).exp();
    2.0 * e / (1.0 + e * e)
}
