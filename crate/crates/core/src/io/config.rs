//! Line-oriented `key = value` run configuration.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evolution::{Method, SolverConfig};
use crate::io::initial::InitialConditionSpec;
use crate::spectral::PeriodicGrid;
use crate::symbols::{ModelParams, Operator};

/// Keys with no default that may be left out.
const OPTIONAL: &[&str] = &["h", "bilinear_constant", "times", "grids"];

/// Every accepted key with its default (`None` when required or optional) and a one-line description.
pub const KEYS: &[(&str, Option<&str>, &str)] = &[
    ("alpha", None, "nonlinearity coefficient, > 0"),
    ("a", None, "coefficient of the regularizing term, > 0"),
    ("b", None, "coefficient of the nonlocal term, > 0"),
    ("operator", None, "hilbert | strip"),
    ("h", None, "strip height, > 0 (required when operator = strip)"),
    ("allow_zero_b", Some("false"), "accept b = 0 (warns)"),
    ("n_points", None, "grid size, a power of two >= 8"),
    ("dt", None, "time step, > 0"),
    ("t_end", None, "final time, either sign"),
    (
        "ic",
        None,
        "cosine(amp, k) | gaussian(amp, width) | random_sobolev(s, norm, seed) | coeff_file(path)",
    ),
    ("method", Some("rk4"), "rk4 | picard"),
    ("picard_tol", Some("1e-12"), "Picard stopping threshold in the H^1 norm"),
    ("picard_max_iter", Some("50"), "Picard iteration cap"),
    ("quad_substeps", Some("4"), "Duhamel quadrature nodes per step, >= 2"),
    ("dealias", Some("true"), "use padded (exact) products"),
    ("diagnostics_every", Some("100"), "steps between recorded snapshots"),
    ("sobolev_s", Some("1"), "regularity index of reported norms"),
    ("bilinear_constant", None, "C_{s,s}; estimated from random samples when absent"),
    ("seed", Some("0"), "seed for every random choice"),
    ("output_dir", Some("out"), "directory receiving the output files"),
    ("times", None, "linear: output times (default 0, t_end)"),
    ("cutoffs", Some("2, 8, 32"), "split: frequency cutoffs N"),
    ("epsilons", Some("1e-2, 1e-4"), "probe-continuity: perturbation sizes"),
    ("trials", Some("100"), "probe-contraction: sampled pairs"),
    ("contraction_fraction", Some("0.25"), "probe-contraction: T as a fraction of T'"),
    ("dts", Some("4e-3, 2e-3, 1e-3"), "convergence: step sizes"),
    ("grids", None, "convergence: coarse grid sizes (default none)"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: PeriodicGrid,
    pub solver: SolverConfig,
    pub ic: InitialConditionSpec,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub times: Option<Vec<f64>>,
    pub cutoffs: Vec<i64>,
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub contraction_fraction: f64,
    pub dts: Vec<f64>,
    pub grids: Vec<usize>,
    /// Every key as written in the source, for the summary echo.
    pub echo: BTreeMap<String, String>,
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidConfig {
        key: key.into(),
        reason: reason.into(),
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| invalid(key, format!("expected {what}, got `{raw}`")))
}

fn parse_list<T: FromStr>(key: &str, raw: &str, what: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s, what))
        .collect()
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(key, format!("expected true or false, got `{raw}`"))),
    }
}

/// Raw pairs in source order, with syntax errors located by line.
fn tokenize(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut pairs = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            path: origin.into(),
            line: i + 1,
            reason,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.iter().any(|(k, _, _)| *k == key) {
            return Err(parse_err(format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(parse_err(format!("key `{key}` has no value")));
        }
        if pairs.insert(key.to_string(), value.to_string()).is_some() {
            return Err(parse_err(format!("duplicate key `{key}`")));
        }
    }
    Ok(pairs)
}

/// Parses and validates a configuration. Relative `coeff_file` paths stay relative.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_from(text, "<config>")
}

/// Reads a configuration file; a relative `coeff_file` path is resolved against the
/// file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut cfg = parse_config_from(&text, &path.display().to_string())?;
    if let InitialConditionSpec::CoeffFile(p) = &mut cfg.ic {
        if p.is_relative() {
            if let Some(dir) = path.parent() {
                *p = dir.join(&*p);
            }
        }
    }
    Ok(cfg)
}

fn parse_config_from(text: &str, origin: &str) -> Result<RunConfig> {
    let pairs = tokenize(text, origin)?;
    let get = |key: &str| pairs.get(key).map(String::as_str);
    let required = |key: &str| get(key).ok_or_else(|| invalid(key, "missing required key"));
    let or_default = |key: &str| {
        get(key).unwrap_or_else(|| {
            KEYS.iter()
                .find(|(k, _, _)| *k == key)
                .and_then(|(_, d, _)| *d)
                .expect("key with a default")
        })
    };
    let real = |key: &str, raw: &str| parse_value::<f64>(key, raw, "a real number");

    let alpha = real("alpha", required("alpha")?)?;
    if !(alpha > 0.0) {
        return Err(invalid(
            "alpha",
            "must be > 0 (alpha, a, b are positive constants)",
        ));
    }
    let a = real("a", required("a")?)?;
    let b = real("b", required("b")?)?;
    let operator = match required("operator")? {
        "hilbert" => {
            if get("h").is_some() {
                return Err(invalid("h", "only meaningful with operator = strip"));
            }
            Operator::Hilbert
        }
        "strip" => {
            let h = get("h").ok_or_else(|| invalid("h", "required when operator = strip"))?;
            Operator::Strip {
                depth: real("h", h)?,
            }
        }
        other => return Err(invalid("operator", format!("expected hilbert or strip, got `{other}`"))),
    };
    let allow_zero_b = parse_bool("allow_zero_b", or_default("allow_zero_b"))?;
    let params = if allow_zero_b {
        ModelParams::with_zero_b_override(alpha, a, b, operator)?
    } else {
        ModelParams::new(alpha, a, b, operator)?
    };

    let n_points: usize = parse_value("n_points", required("n_points")?, "a positive integer")?;
    let grid = PeriodicGrid::new(n_points).map_err(|e| invalid("n_points", e.to_string()))?;

    let method = match or_default("method") {
        "rk4" => Method::Rk4,
        "picard" | "picard_duhamel" => Method::PicardDuhamel,
        other => return Err(invalid("method", format!("expected rk4 or picard, got `{other}`"))),
    };
    let solver = SolverConfig {
        dt: real("dt", required("dt")?)?,
        t_end: real("t_end", required("t_end")?)?,
        method,
        picard_tol: real("picard_tol", or_default("picard_tol"))?,
        picard_max_iter: parse_value("picard_max_iter", or_default("picard_max_iter"), "an integer")?,
        quad_substeps: parse_value("quad_substeps", or_default("quad_substeps"), "an integer")?,
        diagnostics_every: parse_value(
            "diagnostics_every",
            or_default("diagnostics_every"),
            "an integer",
        )?,
        dealias: parse_bool("dealias", or_default("dealias"))?,
        sobolev_s: real("sobolev_s", or_default("sobolev_s"))?,
        bilinear_constant: get("bilinear_constant")
            .map(|raw| real("bilinear_constant", raw))
            .transpose()?,
    };
    solver.validate()?;

    let ic: InitialConditionSpec = required("ic")?
        .parse()
        .map_err(|reason: String| invalid("ic", reason))?;

    let times = get("times")
        .map(|raw| parse_list::<f64>("times", raw, "a real number"))
        .transpose()?;
    if let Some(ts) = &times {
        if ts.is_empty() || ts.windows(2).any(|w| !(w[1] > w[0])) || ts.iter().any(|t| !t.is_finite()) {
            return Err(invalid("times", "must be a nonempty, strictly increasing list"));
        }
    }
    let cutoffs: Vec<i64> = parse_list("cutoffs", or_default("cutoffs"), "an integer")?;
    if let Some(&bad) = cutoffs.iter().find(|&&c| !(0..=grid.mode_cutoff()).contains(&c)) {
        return Err(invalid(
            "cutoffs",
            format!("{bad} outside 0..={}", grid.mode_cutoff()),
        ));
    }
    let epsilons: Vec<f64> = parse_list("epsilons", or_default("epsilons"), "a real number")?;
    if epsilons.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(invalid("epsilons", "must be finite and >= 0"));
    }
    let trials: usize = parse_value("trials", or_default("trials"), "an integer")?;
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let contraction_fraction = real("contraction_fraction", or_default("contraction_fraction"))?;
    if !(contraction_fraction > 0.0 && contraction_fraction < 1.0) {
        return Err(invalid("contraction_fraction", "must lie in (0, 1)"));
    }
    let dts: Vec<f64> = parse_list("dts", or_default("dts"), "a real number")?;
    if dts.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(invalid("dts", "must be finite and > 0"));
    }
    let grids: Vec<usize> = get("grids")
        .map(|raw| parse_list("grids", raw, "an integer"))
        .transpose()?
        .unwrap_or_default();
    for &n in &grids {
        PeriodicGrid::new(n).map_err(|e| invalid("grids", e.to_string()))?;
        if n > n_points {
            return Err(invalid("grids", format!("{n} exceeds the reference n_points = {n_points}")));
        }
    }

    Ok(RunConfig {
        params,
        grid,
        solver,
        ic,
        seed: parse_value("seed", or_default("seed"), "a nonnegative integer")?,
        output_dir: PathBuf::from(or_default("output_dir")),
        times,
        cutoffs,
        epsilons,
        trials,
        contraction_fraction,
        dts,
        grids,
        echo: pairs,
    })
}

/// The `--help` listing of configuration keys.
pub fn keys_help() -> String {
    let mut out = String::from("Configuration keys (`key = value`, `#` starts a comment):\n");
    for (key, default, doc) in KEYS {
        let default = match default {
            Some(d) => format!("[default: {d}]"),
            None if OPTIONAL.contains(key) => "[optional]".into(),
            None => "[required]".into(),
        };
        out.push_str(&format!("  {key:<22} {doc} {default}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
alpha = 1
a = 1
b = 1
operator = hilbert
n_points = 256
dt = 1e-3
t_end = 1
ic = cosine(0.1, 1)
";

    fn with(extra: &str) -> String {
        format!("{MINIMAL}{extra}\n")
    }

    fn without(key: &str) -> String {
        MINIMAL
            .lines()
            .filter(|l| !l.starts_with(&format!("{key} ")))
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn minimal_config() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.grid.n_points(), 256);
        assert_eq!(cfg.params.operator, Operator::Hilbert);
        assert_eq!(cfg.solver.method, Method::Rk4);
        assert_eq!(cfg.solver.dt, 1e-3);
        assert_eq!(cfg.ic, InitialConditionSpec::Cosine { amplitude: 0.1, wavenumber: 1 });
        assert_eq!(cfg.echo.len(), 8);
        assert_eq!(cfg.echo["ic"], "cosine(0.1, 1)");
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{}", MINIMAL.replace("b = 1", "b = 1   # trailing"));
        assert_eq!(parse_config(&text).unwrap().params.b, 1.0);
    }

    #[test]
    fn zero_a_is_rejected_with_reason() {
        let err = parse_config(&MINIMAL.replace("\na = 1", "\na = 0")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`a`") && msg.contains("alpha, a, b are positive constants"), "{msg}");
        assert_eq!(err.exit_code(), 2);
        let err = parse_config(&MINIMAL.replace("alpha = 1", "alpha = 0")).unwrap_err();
        assert!(err.to_string().contains("alpha"));
    }

    #[test]
    fn strip_needs_h() {
        let text = MINIMAL.replace("hilbert", "strip");
        let msg = parse_config(&text).unwrap_err().to_string();
        assert!(msg.contains("`h`"), "{msg}");
        let cfg = parse_config(&format!("{text}h = 2\n")).unwrap();
        assert_eq!(cfg.params.depth(), Some(2.0));
        assert!(parse_config(&with("h = 2")).is_err());
    }

    #[test]
    fn unknown_duplicate_and_missing_keys() {
        let msg = parse_config(&with("alhpa = 1")).unwrap_err().to_string();
        assert!(msg.contains("unknown key `alhpa`") && msg.contains(":9:"), "{msg}");
        assert!(parse_config(&with("dt = 2e-3")).unwrap_err().to_string().contains("duplicate"));
        for key in ["alpha", "a", "b", "operator", "n_points", "dt", "t_end", "ic"] {
            let msg = parse_config(&without(key)).unwrap_err().to_string();
            assert!(msg.contains(&format!("`{key}`")), "{key}: {msg}");
        }
        assert!(parse_config(&with("no equals sign")).is_err());
    }

    #[test]
    fn type_and_constraint_errors_name_the_key() {
        for (extra, key) in [
            ("method = euler", "method"),
            ("dealias = maybe", "dealias"),
            ("quad_substeps = 1", "quad_substeps"),
            ("picard_max_iter = -3", "picard_max_iter"),
            ("cutoffs = 2, 500", "cutoffs"),
            ("times = 1, 0.5", "times"),
            ("contraction_fraction = 1.5", "contraction_fraction"),
            ("grids = 512", "grids"),
            ("grids = 100", "grids"),
        ] {
            let msg = parse_config(&with(extra)).unwrap_err().to_string();
            assert!(msg.contains(&format!("`{key}`")), "{extra}: {msg}");
        }
        let msg = parse_config(&MINIMAL.replace("256", "100")).unwrap_err().to_string();
        assert!(msg.contains("`n_points`"), "{msg}");
        let msg = parse_config(&MINIMAL.replace("dt = 1e-3", "dt = fast")).unwrap_err().to_string();
        assert!(msg.contains("`dt`") && msg.contains("real number"), "{msg}");
    }

    #[test]
    fn zero_b_override() {
        let text = MINIMAL.replace("b = 1", "b = 0");
        assert!(parse_config(&text).is_err());
        assert_eq!(parse_config(&format!("{text}allow_zero_b = true\n")).unwrap().params.b, 0.0);
    }

    #[test]
    fn optional_keys() {
        let cfg = parse_config(&with(
            "method = picard\npicard_tol = 1e-10\nsobolev_s = 0.5\ntimes = 0, 1, 2\ncutoffs = 4\ngrids = 64, 128\nseed = 9",
        ))
        .unwrap();
        assert_eq!(cfg.solver.method, Method::PicardDuhamel);
        assert_eq!(cfg.solver.picard_tol, 1e-10);
        assert_eq!(cfg.solver.sobolev_s, 0.5);
        assert_eq!(cfg.times, Some(vec![0.0, 1.0, 2.0]));
        assert_eq!(cfg.cutoffs, vec![4]);
        assert_eq!(cfg.grids, vec![64, 128]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.dts, vec![4e-3, 2e-3, 1e-3]);
    }

    #[test]
    fn help_lists_every_key() {
        let help = keys_help();
        for (key, _, _) in KEYS {
            assert!(help.contains(key));
        }
        let line = |k: &str| help.lines().find(|l| l.split_whitespace().next() == Some(k)).unwrap();
        assert!(line("alpha").ends_with("[required]"));
        assert!(line("times").ends_with("[optional]"));
        assert!(line("seed").ends_with("[default: 0]"));
    }
}
