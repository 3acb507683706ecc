//! Exact linear flow `S_j(t)`: each mode picks up the phase `e^{-iφ_j(k)t}`.

use num_complex::Complex64;

use crate::analysis::diagnostics;
use crate::error::Result;
use crate::evolution::{Snapshot, Trajectory};
use crate::spectral::{PeriodicGrid, SobolevIndex, SpectralField};
use crate::symbols::SymbolTable;

// 2π split as hi + lo, hi being the double nearest to 2π.
const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `φ·t` reduced to `(-π, π]`, carrying the rounding error of the product through the
/// reduction so that long horizons keep full relative accuracy in the phase.
pub fn reduced_phase(phi: f64, t: f64) -> f64 {
    let p = phi * t;
    let err = phi.mul_add(t, -p);
    let n = (p / TWO_PI_HI).round();
    if n == 0.0 {
        return p + err;
    }
    let r = (-n).mul_add(TWO_PI_HI, p);
    (-n).mul_add(TWO_PI_LO, r) + err
}

/// Phases `e^{-iφ_j(k)t}` for one time.
#[derive(Debug, Clone)]
pub struct PropagatorTable {
    grid: PeriodicGrid,
    t: f64,
    phases: Vec<Complex64>,
}

impl PropagatorTable {
    pub fn new(table: &SymbolTable, t: f64) -> Self {
        let grid = *table.grid();
        let mut phases = vec![Complex64::new(0.0, 0.0); grid.n_points()];
        phases[0] = Complex64::new(1.0, 0.0);
        for k in 1..=grid.mode_cutoff() {
            let theta = reduced_phase(table.phi(k), t);
            let (s, c) = theta.sin_cos();
            let z = Complex64::new(c, -s);
            phases[grid.index_of(k)] = z;
            phases[grid.index_of(-k)] = z.conj();
        }
        Self { grid, t, phases }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn phase(&self, k: i64) -> Complex64 {
        self.phases[self.grid.index_of(k)]
    }

    pub fn apply(&self, f: &SpectralField) -> SpectralField {
        debug_assert_eq!(f.grid(), &self.grid);
        let mut out = f.clone();
        for (c, z) in out.coeffs_mut().iter_mut().zip(&self.phases).skip(1) {
            *c *= z;
        }
        out
    }
}

/// `S_j(t) F`.
pub fn linear_propagate(f: &SpectralField, t: f64, table: &SymbolTable) -> SpectralField {
    if t == 0.0 {
        return f.clone();
    }
    PropagatorTable::new(table, t).apply(f)
}

/// Samples `S_j(t) η₀` at the requested times. Times must be sorted and strictly increasing.
pub fn solve_linear(
    eta0: &SpectralField,
    times: &[f64],
    table: &SymbolTable,
    s: impl Into<SobolevIndex>,
) -> Result<Trajectory> {
    let s = s.into();
    if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(crate::Error::InvalidConfig {
            key: "times".into(),
            reason: format!("must be strictly increasing ({} then {})", w[0], w[1]),
        });
    }
    let snapshots = times
        .iter()
        .map(|&t| {
            let field = linear_propagate(eta0, t, table);
            let diagnostics = diagnostics(&field, table, s, t);
            Snapshot {
                t,
                field,
                diagnostics,
            }
        })
        .collect();
    Ok(Trajectory {
        params: *table.params(),
        grid: *table.grid(),
        sobolev_s: s.0,
        snapshots,
    })
}
