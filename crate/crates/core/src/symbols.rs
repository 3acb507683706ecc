//! Fourier multipliers of the model.
//!
//! For the infinite-depth operator (Hilbert transform) and the finite-depth one
//! (Hilbert transform on a strip of height `h`):
//!
//! ```text
//!     m₁(k) = 1 + b|k| + ak²          m₂(k) = 1 + bk·coth(hk) + ak²
//!     φ_j(k) = k / m_j(k)              A_j: η̂(k) ↦ -iφ_j(k) η̂(k)
//! ```

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{PeriodicGrid, SpectralField};

/// Nonlocal dispersion operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Operator {
    /// Multiplier `i·sgn(k)`.
    Hilbert,
    /// Multiplier `i·coth(hk)` for a strip of height `depth`.
    Strip { depth: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Nonlinearity strength.
    pub alpha: f64,
    /// Regularization coefficient of `η_xxt`.
    pub a: f64,
    /// Coefficient of the nonlocal term.
    pub b: f64,
    pub operator: Operator,
}

impl ModelParams {
    /// Validated parameters; requires `a > 0`, `b > 0`, `alpha >= 0` and a positive strip depth.
    ///
    /// `alpha = 0` is accepted as the linear limit of the model.
    pub fn new(alpha: f64, a: f64, b: f64, operator: Operator) -> Result<Self> {
        let p = Self {
            alpha,
            a,
            b,
            operator,
        };
        p.check(false)?;
        Ok(p)
    }

    /// Like [`ModelParams::new`] but also admits `b = 0`, with a warning.
    pub fn with_zero_b_override(alpha: f64, a: f64, b: f64, operator: Operator) -> Result<Self> {
        let p = Self {
            alpha,
            a,
            b,
            operator,
        };
        p.check(true)?;
        if b == 0.0 {
            log::warn!("b = 0 accepted by override: the nonlocal term is switched off");
        }
        Ok(p)
    }

    fn check(&self, allow_zero_b: bool) -> Result<()> {
        let bad = |key, reason: &str| Err(Error::InvalidParams {
            key,
            reason: reason.to_string(),
        });
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha", "must be finite and nonnegative");
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return bad("a", "must be > 0 (alpha, a, b are positive constants)");
        }
        if !self.b.is_finite() || self.b < 0.0 || (self.b == 0.0 && !allow_zero_b) {
            return bad(
                "b",
                "must be > 0 (alpha, a, b are positive constants; b = 0 needs the override)",
            );
        }
        if let Operator::Strip { depth } = self.operator {
            if !(depth.is_finite() && depth > 0.0) {
                return bad("h", "strip height must be finite and > 0");
            }
        }
        Ok(())
    }

    pub fn depth(&self) -> Option<f64> {
        match self.operator {
            Operator::Hilbert => None,
            Operator::Strip { depth } => Some(depth),
        }
    }
}

/// `|k|·coth(h|k|)`, switching to its Taylor expansion near the removable singularity.
fn k_coth(k: f64, h: f64) -> f64 {
    let k = k.abs();
    let z = h * k;
    if z < 1e-4 {
        1.0 / h + h * k * k / 3.0
    } else {
        k / z.tanh()
    }
}

/// `m_j(k)`. Accepts real wavenumbers; the periodic setting uses integer `k`.
pub fn m_symbol(k: f64, p: &ModelParams) -> f64 {
    let nonlocal = match p.operator {
        Operator::Hilbert => k.abs(),
        Operator::Strip { depth } => k_coth(k, depth),
    };
    1.0 + p.b * nonlocal + p.a * k * k
}

/// `φ_j(k) = k / m_j(k)`, odd in `k`.
pub fn phi_symbol(k: f64, p: &ModelParams) -> f64 {
    let v = k.abs() / m_symbol(k, p);
    if k < 0.0 {
        -v
    } else {
        v
    }
}

/// Uniform bound `1/(b + 2√a)` on `|φ_j|`.
pub fn phi_bound(p: &ModelParams) -> f64 {
    1.0 / (p.b + 2.0 * p.a.sqrt())
}

fn multiply_modes(f: &SpectralField, mult: impl Fn(i64) -> Complex64) -> SpectralField {
    let mut out = f.clone();
    out.map_modes(|k, c| if k == 0 { Complex64::new(0.0, 0.0) } else { c * mult(k) });
    out
}

/// Hilbert transform, `k ≠ 0` multiplied by `i·sgn(k)`, mode 0 sent to zero.
pub fn hilbert_transform(f: &SpectralField) -> SpectralField {
    multiply_modes(f, |k| Complex64::new(0.0, if k > 0 { 1.0 } else { -1.0 }))
}

/// Hilbert transform on the strip, `k ≠ 0` multiplied by `i·coth(hk)`, mode 0 sent to zero.
pub fn strip_hilbert_transform(f: &SpectralField, p: &ModelParams) -> Result<SpectralField> {
    let h = p.depth().ok_or_else(|| Error::InvalidParams {
        key: "operator",
        reason: "strip transform requires operator = strip".into(),
    })?;
    Ok(multiply_modes(f, |k| {
        let c = 1.0 / (h * k.abs() as f64).tanh();
        Complex64::new(0.0, if k > 0 { c } else { -c })
    }))
}

/// Per-mode `m_j` and `φ_j` on one grid, in FFT storage order.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    grid: PeriodicGrid,
    params: ModelParams,
    m: Vec<f64>,
    phi: Vec<f64>,
}

impl SymbolTable {
    pub fn new(grid: PeriodicGrid, params: ModelParams) -> Self {
        let n = grid.n_points();
        let mut m = vec![0.0; n];
        let mut phi = vec![0.0; n];
        for k in 0..=grid.mode_cutoff() {
            let mk = m_symbol(k as f64, &params);
            let pk = phi_symbol(k as f64, &params);
            m[grid.index_of(k)] = mk;
            phi[grid.index_of(k)] = pk;
            m[grid.index_of(-k)] = mk;
            phi[grid.index_of(-k)] = -pk;
        }
        let table = Self {
            grid,
            params,
            m,
            phi,
        };
        table.assert_invariants();
        table
    }

    fn assert_invariants(&self) {
        assert_eq!(self.phi(0), 0.0);
        for k in 0..=self.grid.mode_cutoff() {
            assert!(self.m(k) >= 1.0, "m({k}) < 1");
            assert_eq!(self.m(k), self.m(-k));
            assert_eq!(self.phi(k), -self.phi(-k));
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn m(&self, k: i64) -> f64 {
        self.m[self.grid.index_of(k)]
    }

    pub fn phi(&self, k: i64) -> f64 {
        self.phi[self.grid.index_of(k)]
    }

    /// `φ_j` in storage order (Nyquist slot zero).
    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    /// `m_j` in storage order (Nyquist slot zero).
    pub fn m_values(&self) -> &[f64] {
        &self.m
    }

    /// `(k, m_j(k), φ_j(k))` over retained modes in increasing `k`.
    pub fn rows(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        self.grid.modes().map(move |k| (k, self.m(k), self.phi(k)))
    }
}

/// `A_j F`: multiply every mode by `-iφ_j(k)`.
pub fn apply_aj(f: &SpectralField, table: &SymbolTable) -> SpectralField {
    debug_assert_eq!(f.grid(), table.grid());
    let mut out = f.clone();
    let phi = table.phi_values();
    for (c, &p) in out.coeffs_mut().iter_mut().zip(phi) {
        *c = Complex64::new(p * c.im, -p * c.re);
    }
    out.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
    out
}
