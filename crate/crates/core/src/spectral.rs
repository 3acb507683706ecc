//! Periodic grids, Fourier transforms and Sobolev norms on the 2π-torus.
//!
//! Coefficients follow the analysis convention
//!
//! ```text
//!     f̂(k) = (1/2π) ∫_{-π}^{π} f(x) e^{-ikx} dx,      f(x) = Σ_k f̂(k) e^{ikx}
//! ```
//!
//! so a collocation grid `x_j = -π + 2πj/n` gives `f̂(k) = (-1)^k/n · DFT(f)[k]`.
//! Retained modes are `|k| <= n/2 - 1`; the Nyquist mode is always zero.
//! All norms computed here are truncated norms over the retained modes.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

fn inverse_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Relative tolerance used when checking conjugate symmetry before synthesis.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Uniform collocation grid on `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    n_points: usize,
}

impl PeriodicGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::InvalidGrid(n_points));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Largest retained `|k|`.
    pub fn mode_cutoff(&self) -> i64 {
        (self.n_points / 2 - 1) as i64
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n_points as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -PI + self.spacing() * j as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    /// Retained wavenumbers in increasing order, `-K..=K`.
    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let k = self.mode_cutoff();
        -k..=k
    }

    /// Storage index of wavenumber `k` (FFT ordering).
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n_points as i64) as usize
    }

    /// Wavenumber stored at FFT index `idx`. The Nyquist slot reports `n/2`.
    pub fn wavenumber(&self, idx: usize) -> i64 {
        if idx <= self.n_points / 2 {
            idx as i64
        } else {
            idx as i64 - self.n_points as i64
        }
    }

    pub fn is_retained(&self, k: i64) -> bool {
        k.abs() <= self.mode_cutoff()
    }

    pub fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch {
                left: self.n_points,
                right: other.n_points,
            });
        }
        Ok(())
    }
}

/// Regularity index `s` of the Sobolev space `H^s`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SobolevIndex(pub f64);

impl From<f64> for SobolevIndex {
    fn from(s: f64) -> Self {
        SobolevIndex(s)
    }
}

impl SobolevIndex {
    /// Weight `(1 + k²)^s`.
    pub fn weight(self, k: i64) -> f64 {
        let base = 1.0 + (k * k) as f64;
        if self.0 == 0.0 {
            1.0
        } else if self.0 == 1.0 {
            base
        } else {
            base.powf(self.0)
        }
    }
}

/// Samples of a real function at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(i));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(1/2π) ∫ |f|² dx` by the trapezoidal rule on the grid.
    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.grid.n_points() as f64
    }
}

/// Fourier coefficients `η̂(k)` for `|k| <= mode_cutoff`, stored in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: PeriodicGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    /// Builds a field from `(k, coefficient)` pairs. Pairs are taken as given; pass both
    /// `k` and `-k` for a real field.
    pub fn from_modes(grid: PeriodicGrid, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for &(k, c) in modes {
            f.set(k, c)?;
        }
        Ok(f)
    }

    /// Builds a field from storage-ordered coefficients; the Nyquist slot must be zero.
    pub fn from_coeffs(grid: PeriodicGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: coeffs.len(),
            });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFiniteInput(i));
        }
        let mut f = Self { grid, coeffs };
        f.coeffs[grid.n_points() / 2] = Complex64::new(0.0, 0.0);
        Ok(f)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Raw coefficients in FFT order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at wavenumber `k`; zero outside the retained band.
    pub fn get(&self, k: i64) -> Complex64 {
        if self.grid.is_retained(k) {
            self.coeffs[self.grid.index_of(k)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn set(&mut self, k: i64, c: Complex64) -> Result<()> {
        if !self.grid.is_retained(k) {
            return Err(Error::InvalidConfig {
                key: "mode".into(),
                reason: format!(
                    "k = {k} lies beyond the mode cutoff {}",
                    self.grid.mode_cutoff()
                ),
            });
        }
        let idx = self.grid.index_of(k);
        self.coeffs[idx] = c;
        Ok(())
    }

    /// Mode-0 coefficient, i.e. the mean of the field.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `(k, coefficient)` over retained modes in increasing `k`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.grid.modes().map(move |k| (k, self.get(k)))
    }

    /// Applies a per-mode map in place. The Nyquist slot stays zero.
    pub fn map_modes(&mut self, mut f: impl FnMut(i64, Complex64) -> Complex64) {
        let nyq = self.grid.n_points() / 2;
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if idx != nyq {
                *c = f(self.grid.wavenumber(idx), *c);
            }
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        debug_assert_eq!(self.grid, x.grid);
        for (y, xi) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *y += xi * a;
        }
    }

    pub fn add(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        out.axpy(1.0, other);
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let mut out = self.clone();
        out.axpy(-1.0, other);
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|F(-k) - conj(F(k))|` over retained modes (mode 0 included).
    pub fn symmetry_defect(&self) -> (i64, f64) {
        let mut worst = (0, self.coeffs[0].im.abs());
        for k in 1..=self.grid.mode_cutoff() {
            let d = (self.get(-k) - self.get(k).conj()).norm();
            if d > worst.1 {
                worst = (k, d);
            }
        }
        worst
    }

    pub fn is_real_symmetric(&self, rel_tol: f64) -> bool {
        self.symmetry_defect().1 <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Copies the field onto another grid: truncates when coarser, zero-pads when finer.
    pub fn resample(&self, grid: PeriodicGrid) -> SpectralField {
        let mut out = SpectralField::zeros(grid);
        let kmax = grid.mode_cutoff().min(self.grid.mode_cutoff());
        for k in -kmax..=kmax {
            out.coeffs[grid.index_of(k)] = self.get(k);
        }
        out
    }
}

fn parity(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Analysis transform under the `1/2π` convention, truncated to the retained band.
pub fn forward_transform(f: &RealField) -> SpectralField {
    let grid = *f.grid();
    let n = grid.n_points();
    let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_plan(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    let mut out = SpectralField::zeros(grid);
    for (idx, c) in buf.into_iter().enumerate() {
        if idx == n / 2 {
            continue;
        }
        let k = grid.wavenumber(idx);
        out.coeffs[idx] = c * (parity(k) * scale);
    }
    out
}

/// Synthesis `f(x_j) = Σ_k F(k) e^{ikx_j}`. Rejects coefficients that are not the
/// transform of a real function.
pub fn inverse_transform(f: &SpectralField) -> Result<RealField> {
    let (k, defect) = f.symmetry_defect();
    if defect > SYMMETRY_TOL * f.max_abs() {
        return Err(Error::AsymmetricCoefficients { k, defect });
    }
    Ok(synthesize(f))
}

pub(crate) fn synthesize(f: &SpectralField) -> RealField {
    let grid = *f.grid();
    let n = grid.n_points();
    let mut buf: Vec<Complex64> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, &c)| c * parity(grid.wavenumber(idx)))
        .collect();
    inverse_plan(n).process(&mut buf);
    RealField {
        grid,
        values: buf.into_iter().map(|c| c.re).collect(),
    }
}

/// Truncated `‖F‖_s = (Σ (1+k²)^s |F(k)|²)^{1/2}`.
pub fn sobolev_norm(f: &SpectralField, s: impl Into<SobolevIndex>) -> f64 {
    let s = s.into();
    f.modes()
        .map(|(k, c)| s.weight(k) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `(F, G)_s = Σ (1+k²)^s F(k) conj(G(k))`.
pub fn sobolev_inner(
    f: &SpectralField,
    g: &SpectralField,
    s: impl Into<SobolevIndex>,
) -> Result<Complex64> {
    f.grid().check_same(g.grid())?;
    let s = s.into();
    Ok(f
        .modes()
        .map(|(k, c)| c * g.get(k).conj() * s.weight(k))
        .sum())
}

/// Exact truncation of the trigonometric product `F·G` to the retained band.
///
/// Both factors are synthesized on a grid of `3n/2` points, which exceeds the `3K + 1`
/// points needed for products of band-`K` polynomials to be alias-free on `|k| <= K`.
pub fn dealiased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.grid().check_same(g.grid())?;
    let n = f.grid().n_points();
    Ok(padded_product(f, g, 3 * n / 2))
}

/// Pseudospectral product on the native grid; aliased modes fold back into the band.
pub fn aliased_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.grid().check_same(g.grid())?;
    Ok(padded_product(f, g, f.grid().n_points()))
}

/// Quadratic product under the chosen dealiasing policy.
pub fn product(f: &SpectralField, g: &SpectralField, dealias: bool) -> Result<SpectralField> {
    if dealias {
        dealiased_product(f, g)
    } else {
        aliased_product(f, g)
    }
}

fn padded_product(f: &SpectralField, g: &SpectralField, m: usize) -> SpectralField {
    let grid = *f.grid();
    let kmax = grid.mode_cutoff();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = vec![zero; m];
    let mut b = vec![zero; m];
    for k in -kmax..=kmax {
        let slot = k.rem_euclid(m as i64) as usize;
        a[slot] = f.get(k);
        b[slot] = g.get(k);
    }
    let inv = inverse_plan(m);
    inv.process(&mut a);
    inv.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    forward_plan(m).process(&mut a);
    let scale = 1.0 / m as f64;
    let mut out = SpectralField::zeros(grid);
    for k in -kmax..=kmax {
        out.coeffs[grid.index_of(k)] = a[k.rem_euclid(m as i64) as usize] * scale;
    }
    out
}

/// Random real band-limited field with coefficient envelope `(1+k²)^{-decay/2}` on
/// `1 <= |k| <= bandwidth` and a random mean when `with_mean` is set.
pub fn random_band_limited<R: Rng + ?Sized>(
    grid: PeriodicGrid,
    bandwidth: i64,
    decay: f64,
    with_mean: bool,
    rng: &mut R,
) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    let kmax = bandwidth.min(grid.mode_cutoff()).max(0);
    if with_mean {
        f.coeffs[0] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
    }
    for k in 1..=kmax {
        let env = (1.0 + (k * k) as f64).powf(-decay / 2.0);
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * env;
        f.coeffs[grid.index_of(k)] = c;
        f.coeffs[grid.index_of(-k)] = c.conj();
    }
    f
}
