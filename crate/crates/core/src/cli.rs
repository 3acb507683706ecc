//! Command-line surface. Every subcommand reads one configuration file, validates it in
//! full, then computes and writes into `output_dir`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    contraction_probe, continuity_probe, convergence_study,
    norm_equivalence_constants, sobolev_embedding_constant, split_experiment, Assertion,
    ProbeReport,
};
use crate::error::{Error, Result};
use crate::evolution::{estimate_bilinear_constant, estimate_local_time, solve_with_table, DEFAULT_CONSTANT_TRIALS};
use crate::io::config::{keys_help, load_config, RunConfig};
use crate::io::initial::build_initial_condition;
use crate::io::output::{
    ensure_dir, write_diagnostics, write_json, write_report_csv, write_trajectory,
};
use crate::propagator::solve_linear;
use crate::spectral::{sobolev_norm, SpectralField};
use crate::symbols::{phi_bound, SymbolTable};

#[derive(Debug, Parser)]
#[command(name = "rbenjamin", version, about = "Periodic pseudospectral solver for regularized Benjamin-type equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Configuration file (`key = value` lines).
    pub config: PathBuf,
    /// Overrides `output_dir` from the configuration.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the nonlinear problem and write diagnostics and snapshots.
    Simulate(CommonArgs),
    /// Sample the exact linear flow at `times`.
    Linear(CommonArgs),
    /// Frequency-splitting experiment for each of `cutoffs`.
    Split(CommonArgs),
    /// Lipschitz ratio of the Duhamel map on sampled pairs in the contraction ball.
    ProbeContraction(CommonArgs),
    /// Divergence of perturbed solutions against the continuous-dependence envelope.
    ProbeContinuity(CommonArgs),
    /// Temporal order and spatial error sweep.
    Convergence(CommonArgs),
    /// Tabulate m_j and phi_j on the grid.
    Symbols(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Linear(_) => "linear",
            Command::Split(_) => "split",
            Command::ProbeContraction(_) => "probe-contraction",
            Command::ProbeContinuity(_) => "probe-continuity",
            Command::Convergence(_) => "convergence",
            Command::Symbols(_) => "symbols",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Linear(a)
            | Command::Split(a)
            | Command::ProbeContraction(a)
            | Command::ProbeContinuity(a)
            | Command::Convergence(a)
            | Command::Symbols(a) => a,
        }
    }
}

/// Parses the process arguments; `--help` on any command lists every configuration key.
pub fn parse_args() -> Cli {
    let help = keys_help();
    let mut cmd = Cli::command().after_long_help(help.clone()).after_help(help.clone());
    for name in [
        "simulate",
        "linear",
        "split",
        "probe-contraction",
        "probe-continuity",
        "convergence",
        "symbols",
    ] {
        let h = help.clone();
        cmd = cmd.mut_subcommand(name, |c| c.after_help(h.clone()).after_long_help(h));
    }
    let matches = cmd.get_matches();
    Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit())
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    config: &'a BTreeMap<String, String>,
    seed: u64,
    constants: BTreeMap<String, f64>,
    assertions: Vec<Assertion>,
    passed: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    reports: Vec<ProbeReport>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    series: BTreeMap<String, Vec<(f64, f64)>>,
}

impl<'a> Summary<'a> {
    fn new(command: &'a str, cfg: &'a RunConfig) -> Self {
        Self {
            command,
            config: &cfg.echo,
            seed: cfg.seed,
            constants: BTreeMap::new(),
            assertions: Vec::new(),
            passed: true,
            reports: Vec::new(),
            series: BTreeMap::new(),
        }
    }

    fn finish(mut self, dir: &Path) -> Result<bool> {
        self.assertions
            .extend(self.reports.iter().flat_map(|r| r.assertions.iter().cloned()));
        self.passed = self.assertions.iter().all(|a| a.passed || a.inconclusive);
        for a in &self.assertions {
            let tag = match (a.passed, a.inconclusive) {
                (true, _) => "PASS",
                (false, true) => "INCONCLUSIVE",
                (false, false) => "FAIL",
            };
            println!("{tag} {}: measured {:e}, bound {:e}", a.name, a.measured, a.bound);
        }
        write_json(&dir.join("summary.json"), &self)?;
        Ok(self.passed)
    }
}

/// Model constants shared by every summary.
fn base_constants(cfg: &RunConfig, eta0: &SpectralField, c_ss: f64) -> BTreeMap<String, f64> {
    let s = cfg.solver.sobolev_s;
    let (k1, k2) = norm_equivalence_constants(&cfg.params, cfg.grid);
    let norm_s = sobolev_norm(eta0, s);
    BTreeMap::from([
        ("C_ss".to_string(), c_ss),
        ("T_prime".to_string(), estimate_local_time(norm_s, c_ss, cfg.params.alpha)),
        ("K1".to_string(), k1),
        ("K2".to_string(), k2),
        ("C_S".to_string(), sobolev_embedding_constant(&cfg.params, cfg.grid)),
        ("phi_bound".to_string(), phi_bound(&cfg.params)),
        ("initial_norm_s".to_string(), norm_s),
    ])
}

/// Runs one command; returns whether every recorded assertion passed.
pub fn run(cli: &Cli) -> Result<bool> {
    let command = &cli.command;
    let args = command.args();
    let mut cfg = load_config(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    let eta0 = build_initial_condition(&cfg.ic, cfg.grid)?;
    let s = cfg.solver.sobolev_s;
    let c_ss = match cfg.solver.bilinear_constant {
        Some(c) => c,
        None => {
            let c = estimate_bilinear_constant(
                s.max(0.0),
                s.max(0.0),
                DEFAULT_CONSTANT_TRIALS,
                cfg.grid,
                &cfg.params,
                cfg.seed,
            )?;
            cfg.solver.bilinear_constant = Some(c);
            c
        }
    };
    let dir = cfg.output_dir.clone();
    ensure_dir(&dir)?;
    log::info!("{} -> {}", command.name(), dir.display());

    let started = Instant::now();
    let table = SymbolTable::new(cfg.grid, cfg.params);
    let mut summary = Summary::new(command.name(), &cfg);
    summary.constants = base_constants(&cfg, &eta0, c_ss);

    match command {
        Command::Simulate(_) => {
            let traj = solve_with_table(&eta0, &table, &cfg.solver)?;
            write_trajectory(&dir, &traj, "")?;
            summary.assertions.extend(invariant_checks(&summary.constants, &traj));
        }
        Command::Linear(_) => {
            let times = cfg.times.clone().unwrap_or_else(|| {
                let mut t = vec![0.0, cfg.solver.t_end];
                t.sort_by(f64::total_cmp);
                t.dedup();
                t
            });
            let traj = solve_linear(&eta0, &times, &table, s)?;
            write_trajectory(&dir, &traj, "")?;
            let n0 = sobolev_norm(&eta0, s);
            let worst = traj
                .diagnostics()
                .map(|d| (d.norm_s - n0).abs())
                .fold(0.0, f64::max);
            summary.assertions.push(Assertion::at_most(
                "|norm_s(t) - norm_s(0)| <= 1e-12 norm_s(0)",
                worst,
                1e-12 * n0,
            ));
        }
        Command::Split(_) => {
            let mut tails_checked = false;
            for &cutoff in &cfg.cutoffs {
                let rep = split_experiment(&eta0, cutoff, &cfg.params, &cfg.solver)?;
                let prefix = format!("split_N{cutoff}_");
                write_diagnostics(&dir.join(format!("{prefix}eta_diagnostics.csv")), &rep.eta)?;
                write_diagnostics(&dir.join(format!("{prefix}v_diagnostics.csv")), &rep.v)?;
                write_diagnostics(&dir.join(format!("{prefix}w_diagnostics.csv")), &rep.w)?;
                let err = rep.max_reconstruction_error_1();
                summary.assertions.push(Assertion::at_most(
                    format!("N = {cutoff}: max ||v + w - eta||_1 <= 1e-12"),
                    err,
                    1e-12,
                ));
                summary.constants.insert(format!("N{cutoff}_high_norm_s"), rep.high_norm_s);
                summary.constants.insert(format!("N{cutoff}_low_norm_s"), rep.low_norm_s);
                summary.series.insert(
                    format!("N{cutoff}_reconstruction_s"),
                    rep.reconstruction.iter().map(|r| (r.0, r.1)).collect(),
                );
                if !tails_checked {
                    let increase = rep
                        .tail_norms
                        .windows(2)
                        .map(|w| w[1].1 - w[0].1)
                        .fold(f64::NEG_INFINITY, f64::max);
                    summary.assertions.push(Assertion::at_most(
                        "tail norms nonincreasing in N",
                        increase,
                        0.0,
                    ));
                    summary.series.insert(
                        "tail_norms_s".into(),
                        rep.tail_norms.iter().map(|&(n, v)| (n as f64, v)).collect(),
                    );
                    tails_checked = true;
                }
            }
        }
        Command::ProbeContraction(_) => {
            let t_prime = summary.constants["T_prime"];
            if !t_prime.is_finite() {
                return Err(Error::Probe(
                    "T' is infinite (zero data or alpha = 0); nothing to probe".into(),
                ));
            }
            let horizon = cfg.contraction_fraction * t_prime;
            let report =
                contraction_probe(&eta0, horizon, cfg.trials, &cfg.params, s, Some(c_ss), cfg.seed)?;
            write_report_csv(&dir.join("contraction.csv"), &report)?;
            let mut sweep = Vec::new();
            for frac in [0.125, 0.25, 0.5] {
                let r = contraction_probe(&eta0, frac * t_prime, cfg.trials, &cfg.params, s, Some(c_ss), cfg.seed)?;
                sweep.push((frac, r.constant("max_ratio").unwrap_or(f64::NAN)));
            }
            let drop = sweep.windows(2).map(|w| w[0].1 - w[1].1).fold(f64::NEG_INFINITY, f64::max);
            summary
                .assertions
                .push(Assertion::at_most("max ratio nondecreasing in T", drop, 0.0));
            summary.series.insert("sweep_fraction_max_ratio".into(), sweep);
            summary.reports.push(report);
        }
        Command::ProbeContinuity(_) => {
            let report =
                continuity_probe(&eta0, &cfg.epsilons, cfg.solver.t_end, &cfg.params, &cfg.solver, cfg.seed)?;
            write_report_csv(&dir.join("continuity.csv"), &report)?;
            summary.reports.push(report);
        }
        Command::Convergence(_) => {
            let report = convergence_study(&eta0, &cfg.params, &cfg.solver, &cfg.dts, &cfg.grids)?;
            write_report_csv(&dir.join("convergence.csv"), &report)?;
            summary.reports.push(report);
        }
        Command::Symbols(_) => {
            let mut text = String::from("k,m,phi\n");
            for (k, m, phi) in table.rows() {
                text.push_str(&format!("{k},{m:.16e},{phi:.16e}\n"));
            }
            let path = dir.join("symbols.csv");
            std::fs::write(&path, text).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            let worst = table.rows().map(|(_, _, phi)| phi.abs()).fold(0.0, f64::max);
            summary
                .assertions
                .push(Assertion::at_most("max |phi| <= 1/(b + 2 sqrt a)", worst, phi_bound(&cfg.params)));
        }
    }

    let passed = summary.finish(&dir)?;
    let timing = BTreeMap::from([("wall_clock_seconds", started.elapsed().as_secs_f64())]);
    write_json(&dir.join("timing.json"), &timing)?;
    Ok(passed)
}

/// Exact grid-level checks on a nonlinear trajectory.
fn invariant_checks(constants: &BTreeMap<String, f64>, traj: &crate::evolution::Trajectory) -> Vec<Assertion> {
    let (k1, k2) = (constants["K1"], constants["K2"]);
    let Some(first) = traj.snapshots.first().map(|s| s.diagnostics) else {
        return Vec::new();
    };
    let mut sandwich = 0.0f64;
    let (mut drift, mut mass) = (0.0f64, 0.0f64);
    for d in traj.diagnostics() {
        if d.norm1 > 0.0 {
            sandwich = sandwich
                .max((k1.sqrt() * d.norm1 - d.triple_norm1) / d.norm1)
                .max((d.triple_norm1 - k2.sqrt() * d.norm1) / d.norm1);
        }
        drift = drift.max((d.triple_norm1 - first.triple_norm1).abs());
        mass = mass.max((d.mass - first.mass).abs());
    }
    let scale = first.triple_norm1.max(f64::MIN_POSITIVE);
    vec![
        // exact per mode; the summed norms carry rounding
        Assertion::at_most("norm sandwich violation <= 1e-14 relative", sandwich, 1e-14),
        Assertion::at_most("relative drift of triple_norm1 <= 1e-6", drift / scale, 1e-6),
        Assertion::at_most(
            "mass drift <= 1e-13 relative",
            mass,
            1e-13 * first.mass.abs().max(first.norm0),
        ),
    ]
}
