//! Initial data.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::output::read_coefficients;
use crate::spectral::{sobolev_norm, PeriodicGrid, SpectralField};

/// Extra decay exponent for random data, so that the draw lies in `H^{s+ε}` and not
/// just barely in `H^s`.
const RANDOM_DECAY_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialConditionSpec {
    /// `amplitude · cos(wavenumber · x)`.
    Cosine { amplitude: f64, wavenumber: i64 },
    /// `amplitude · Σ_m exp(-(x - 2πm)² / (2 width²))`.
    Gaussian { amplitude: f64, width: f64 },
    /// Random phases with `(1+k²)^{-s/2-1/2-ε}` decay, scaled to `‖·‖_s = norm`.
    RandomSobolev { s: f64, norm: f64, seed: u64 },
    /// `k,re,im` CSV as written for snapshots.
    CoeffFile(PathBuf),
}

fn call_args<'a>(text: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let inner = text.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::trim).collect())
}

fn arg<T: FromStr>(args: &[&str], i: usize, name: &str, what: &str) -> std::result::Result<T, String> {
    let raw = args.get(i).ok_or_else(|| format!("{name} is missing argument {}", i + 1))?;
    raw.parse()
        .map_err(|_| format!("{name}: argument {} should be {what}, got `{raw}`", i + 1))
}

impl FromStr for InitialConditionSpec {
    type Err = String;

    fn from_str(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        let arity = |args: &[&str], n: usize, name: &str| {
            if args.len() == n {
                Ok(())
            } else {
                Err(format!("{name} takes {n} arguments, got {}", args.len()))
            }
        };
        let spec = if let Some(args) = call_args(text, "cosine") {
            arity(&args, 2, "cosine")?;
            Self::Cosine {
                amplitude: arg(&args, 0, "cosine", "a real amplitude")?,
                wavenumber: arg(&args, 1, "cosine", "an integer wavenumber")?,
            }
        } else if let Some(args) = call_args(text, "gaussian") {
            arity(&args, 2, "gaussian")?;
            Self::Gaussian {
                amplitude: arg(&args, 0, "gaussian", "a real amplitude")?,
                width: arg(&args, 1, "gaussian", "a real width")?,
            }
        } else if let Some(args) = call_args(text, "random_sobolev") {
            arity(&args, 3, "random_sobolev")?;
            Self::RandomSobolev {
                s: arg(&args, 0, "random_sobolev", "a real index")?,
                norm: arg(&args, 1, "random_sobolev", "a real norm")?,
                seed: arg(&args, 2, "random_sobolev", "an integer seed")?,
            }
        } else if let Some(args) = call_args(text, "coeff_file") {
            arity(&args, 1, "coeff_file")?;
            Self::CoeffFile(PathBuf::from(args[0]))
        } else {
            return Err(format!(
                "expected cosine(..), gaussian(..), random_sobolev(..) or coeff_file(..), got `{text}`"
            ));
        };
        spec.check()?;
        Ok(spec)
    }
}

impl InitialConditionSpec {
    fn check(&self) -> std::result::Result<(), String> {
        match *self {
            Self::Cosine { amplitude, .. } if !amplitude.is_finite() => {
                Err("cosine amplitude must be finite".into())
            }
            Self::Gaussian { amplitude, width } if !(amplitude.is_finite() && width > 0.0 && width.is_finite()) => {
                Err("gaussian needs a finite amplitude and a width > 0".into())
            }
            Self::RandomSobolev { s, norm, .. } if !(s.is_finite() && norm.is_finite() && norm >= 0.0) => {
                Err("random_sobolev needs a finite s and a norm >= 0".into())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for InitialConditionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cosine { amplitude, wavenumber } => write!(f, "cosine({amplitude}, {wavenumber})"),
            Self::Gaussian { amplitude, width } => write!(f, "gaussian({amplitude}, {width})"),
            Self::RandomSobolev { s, norm, seed } => write!(f, "random_sobolev({s}, {norm}, {seed})"),
            Self::CoeffFile(p) => write!(f, "coeff_file({})", p.display()),
        }
    }
}

/// Real-symmetric field on `grid` described by `spec`.
pub fn build_initial_condition(spec: &InitialConditionSpec, grid: PeriodicGrid) -> Result<SpectralField> {
    let mut field = SpectralField::zeros(grid);
    match *spec {
        InitialConditionSpec::Cosine { amplitude, wavenumber } => {
            let k = wavenumber.abs();
            if k == 0 {
                field.set(0, Complex64::new(amplitude, 0.0))?;
            } else {
                let half = Complex64::new(amplitude / 2.0, 0.0);
                field.set(k, half)?;
                field.set(-k, half)?;
            }
        }
        InitialConditionSpec::Gaussian { amplitude, width } => {
            // exact coefficients of the periodized Gaussian
            let scale = amplitude * width / (2.0 * std::f64::consts::PI).sqrt();
            field.map_modes(|k, _| {
                let kw = k as f64 * width;
                Complex64::new(scale * (-0.5 * kw * kw).exp(), 0.0)
            });
        }
        InitialConditionSpec::RandomSobolev { s, norm, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let exponent = -s / 2.0 - 0.5 - RANDOM_DECAY_MARGIN;
            field.set(0, Complex64::new(rng.gen_range(-1.0..1.0), 0.0))?;
            for k in 1..=grid.mode_cutoff() {
                let amp: f64 = rng.gen_range(0.0..1.0) * (1.0 + (k * k) as f64).powf(exponent);
                let c = Complex64::from_polar(amp, rng.gen_range(0.0..std::f64::consts::TAU));
                field.set(k, c)?;
                field.set(-k, c.conj())?;
            }
            let current = sobolev_norm(&field, s);
            field = if current > 0.0 { field.scaled(norm / current) } else { field };
        }
        InitialConditionSpec::CoeffFile(ref path) => {
            field = read_coefficients(path, grid)?;
        }
    }
    Ok(field)
}
