//! Nonlinear time integration of
//!
//! ```text
//!     η_t = A_j(η − (3α/4) η²)                     (full problem)
//!     w_t = A_j(w − (3α/4)(u w + w²))              (problem driven by a given u)
//! ```
//!
//! Two steppers share the right-hand side: a Picard iteration on the Duhamel formula
//! restarted at every step, and the classical explicit four-stage Runge–Kutta method.
//! The latter needs no stiffness treatment because `|φ_j| <= 1/(b + 2√a)` bounds the
//! linear part uniformly in `k`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{diagnostics, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::propagator::PropagatorTable;
use crate::spectral::{
    dealiased_product, product, random_band_limited, sobolev_norm, PeriodicGrid, SobolevIndex,
    SpectralField,
};
use crate::symbols::{apply_aj, ModelParams, SymbolTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PicardDuhamel,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Step size magnitude; the direction comes from the sign of `t_end`.
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    /// Fixed-point stopping threshold in `‖·‖₁`.
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Number of Duhamel quadrature nodes per step, endpoints included.
    pub quad_substeps: usize,
    pub diagnostics_every: usize,
    pub dealias: bool,
    /// Regularity index used by diagnostics and by the Picard step guard.
    pub sobolev_s: f64,
    /// `C_{s,s}` for the Picard guard. Estimated from random samples when absent.
    pub bilinear_constant: Option<f64>,
}

impl SolverConfig {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            method: Method::Rk4,
            picard_tol: 1e-12,
            picard_max_iter: 50,
            quad_substeps: 4,
            diagnostics_every: 100,
            dealias: true,
            sobolev_s: 1.0,
            bilinear_constant: None,
        }
    }

    pub fn picard(dt: f64, t_end: f64) -> Self {
        Self {
            method: Method::PicardDuhamel,
            ..Self::rk4(dt, t_end)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(Error::InvalidConfig {
                key: key.into(),
                reason: reason.into(),
            })
        };
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt", "must be finite and > 0");
        }
        if !self.t_end.is_finite() {
            return bad("t_end", "must be finite");
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            return bad("picard_tol", "must be finite and > 0");
        }
        if self.picard_max_iter == 0 {
            return bad("picard_max_iter", "must be >= 1");
        }
        if self.quad_substeps < 2 {
            return bad("quad_substeps", "must be >= 2");
        }
        if self.diagnostics_every == 0 {
            return bad("diagnostics_every", "must be >= 1");
        }
        if !self.sobolev_s.is_finite() {
            return bad("sobolev_s", "must be finite");
        }
        if let Some(c) = self.bilinear_constant {
            if !(c.is_finite() && c > 0.0) {
                return bad("bilinear_constant", "must be finite and > 0");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: SpectralField,
    pub diagnostics: DiagnosticsRecord,
}

/// Snapshots in strictly increasing time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub grid: PeriodicGrid,
    pub sobolev_s: f64,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn empty(params: ModelParams, grid: PeriodicGrid, sobolev_s: f64) -> Self {
        Self {
            params,
            grid,
            sobolev_s,
            snapshots: Vec::new(),
        }
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.iter().max_by(|a, b| a.t.abs().total_cmp(&b.t.abs()))
    }

    /// Snapshot recorded exactly at time `t`, if any.
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.t == t)
    }

    pub fn diagnostics(&self) -> impl Iterator<Item = &DiagnosticsRecord> {
        self.snapshots.iter().map(|s| &s.diagnostics)
    }

    fn from_states(
        table: &SymbolTable,
        s: f64,
        mut states: Vec<(f64, SpectralField)>,
    ) -> Trajectory {
        states.sort_by(|a, b| a.0.total_cmp(&b.0));
        let snapshots = states
            .into_iter()
            .map(|(t, field)| Snapshot {
                t,
                diagnostics: diagnostics(&field, table, s, t),
                field,
            })
            .collect();
        Trajectory {
            params: *table.params(),
            grid: *table.grid(),
            sobolev_s: s,
            snapshots,
        }
    }
}

/// A time-dependent field `u(t)` valid on a closed interval.
pub enum ForcingField {
    Closed {
        start: f64,
        end: f64,
        eval: Box<dyn Fn(f64) -> SpectralField + Send + Sync>,
    },
    /// Stored snapshots, interpolated by cubic Lagrange polynomials in time.
    Stored(Trajectory),
}

impl ForcingField {
    pub fn closed(
        start: f64,
        end: f64,
        eval: impl Fn(f64) -> SpectralField + Send + Sync + 'static,
    ) -> Self {
        ForcingField::Closed {
            start,
            end,
            eval: Box::new(eval),
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        match self {
            ForcingField::Closed { start, end, .. } => (*start, *end),
            ForcingField::Stored(traj) => match (traj.snapshots.first(), traj.snapshots.last()) {
                (Some(a), Some(b)) => (a.t, b.t),
                _ => (f64::NAN, f64::NAN),
            },
        }
    }

    pub fn covers(&self, a: f64, b: f64) -> bool {
        let (start, end) = self.interval();
        let slack = 1e-12 * (1.0 + start.abs().max(end.abs()));
        a.min(b) >= start - slack && a.max(b) <= end + slack
    }

    pub fn at(&self, t: f64) -> Result<SpectralField> {
        if !self.covers(t, t) {
            let (start, end) = self.interval();
            return Err(Error::ForcingOutOfRange { t, start, end });
        }
        match self {
            ForcingField::Closed { eval, .. } => Ok(eval(t)),
            ForcingField::Stored(traj) => Ok(interpolate_cubic(&traj.snapshots, t)),
        }
    }
}

fn interpolate_cubic(snaps: &[Snapshot], t: f64) -> SpectralField {
    let n = snaps.len();
    if n == 1 {
        return snaps[0].field.clone();
    }
    let right = snaps.partition_point(|s| s.t < t).clamp(1, n - 1);
    let lo = right.saturating_sub(2).min(n.saturating_sub(4));
    let hi = (lo + 4).min(n);
    let nodes = &snaps[lo..hi];
    let mut out = SpectralField::zeros(*nodes[0].field.grid());
    for (i, si) in nodes.iter().enumerate() {
        let w: f64 = nodes
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, sj)| (t - sj.t) / (si.t - sj.t))
            .product();
        out.axpy(w, &si.field);
    }
    out
}

fn nonlinear_coefficient(p: &ModelParams) -> f64 {
    0.75 * p.alpha
}

/// `A_j(v − c·q)`, with the zero-mean output and finiteness enforced.
fn linear_minus_quadratic(
    v: &SpectralField,
    q: &SpectralField,
    table: &SymbolTable,
    t: f64,
) -> Result<SpectralField> {
    let mut tmp = v.clone();
    tmp.axpy(-nonlinear_coefficient(table.params()), q);
    let out = apply_aj(&tmp, table);
    if !out.is_finite() {
        return Err(Error::NonFiniteState { t });
    }
    Ok(out)
}

/// Right-hand side of the full problem, `A_j(F − (3α/4) F²)`.
pub fn rhs_full(f: &SpectralField, table: &SymbolTable, dealias: bool) -> Result<SpectralField> {
    let q = product(f, f, dealias)?;
    linear_minus_quadratic(f, &q, table, f64::NAN)
}

/// Right-hand side of the driven problem, `A_j(W − (3α/4)(u W + W²))`.
pub fn rhs_coupled(
    w: &SpectralField,
    u: &SpectralField,
    table: &SymbolTable,
    dealias: bool,
) -> Result<SpectralField> {
    let mut q = product(u, w, dealias)?;
    q.axpy(1.0, &product(w, w, dealias)?);
    linear_minus_quadratic(w, &q, table, f64::NAN)
}

/// Vector-space operations needed by the one-step methods.
pub trait OdeState: Clone {
    fn axpy(&mut self, a: f64, x: &Self);
}

impl OdeState for SpectralField {
    fn axpy(&mut self, a: f64, x: &Self) {
        SpectralField::axpy(self, a, x)
    }
}

impl OdeState for Vec<SpectralField> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (y, xi) in self.iter_mut().zip(x) {
            y.axpy(a, xi);
        }
    }
}

/// One classical Runge–Kutta step. `rhs` receives the stage time and stage state.
pub fn step_rk4<S: OdeState>(
    y: &S,
    t: f64,
    dt: f64,
    mut rhs: impl FnMut(f64, &S) -> Result<S>,
) -> Result<S> {
    let half = 0.5 * dt;
    let k1 = rhs(t, y)?;
    let mut stage = y.clone();
    stage.axpy(half, &k1);
    let k2 = rhs(t + half, &stage)?;
    let mut stage = y.clone();
    stage.axpy(half, &k2);
    let k3 = rhs(t + half, &stage)?;
    let mut stage = y.clone();
    stage.axpy(dt, &k3);
    let k4 = rhs(t + dt, &stage)?;

    let mut incr = k1;
    incr.axpy(2.0, &k2);
    incr.axpy(2.0, &k3);
    incr.axpy(1.0, &k4);
    let mut out = y.clone();
    out.axpy(dt / 6.0, &incr);
    Ok(out)
}

/// Quadratic part `Q(t, y)` of a system `y_t = A_j(y − (3α/4) Q(t, y))`, component-wise.
pub trait Quadratic {
    fn eval(&self, t: f64, state: &[SpectralField]) -> Result<Vec<SpectralField>>;

    /// Size of the data that drives the nonlinearity, used for the Picard step guard.
    fn guard_norm(&self, t: f64, state: &[SpectralField], s: SobolevIndex) -> Result<f64> {
        let _ = t;
        Ok(state.iter().map(|f| sobolev_norm(f, s)).sum())
    }
}

/// `Q = [η²]`.
pub struct SelfInteraction {
    pub dealias: bool,
}

impl Quadratic for SelfInteraction {
    fn eval(&self, _t: f64, state: &[SpectralField]) -> Result<Vec<SpectralField>> {
        state.iter().map(|f| product(f, f, self.dealias)).collect()
    }
}

/// `Q = [u(t)·w + w²]` for a prescribed forcing `u`.
pub struct Forced<'a> {
    pub forcing: &'a ForcingField,
    pub dealias: bool,
}

impl Quadratic for Forced<'_> {
    fn eval(&self, t: f64, state: &[SpectralField]) -> Result<Vec<SpectralField>> {
        let u = self.forcing.at(t)?;
        state
            .iter()
            .map(|w| {
                let mut q = product(&u, w, self.dealias)?;
                q.axpy(1.0, &product(w, w, self.dealias)?);
                Ok(q)
            })
            .collect()
    }

    fn guard_norm(&self, t: f64, state: &[SpectralField], s: SobolevIndex) -> Result<f64> {
        let u = self.forcing.at(t)?;
        Ok(sobolev_norm(&u, s) + state.iter().map(|f| sobolev_norm(f, s)).sum::<f64>())
    }
}

/// Jointly stepped high/low split `[v, w]` with `Q = [v², 2vw + w²]`, so that
/// `v + w` evolves by the full equation.
pub struct SplitPair {
    pub dealias: bool,
}

impl Quadratic for SplitPair {
    fn eval(&self, _t: f64, state: &[SpectralField]) -> Result<Vec<SpectralField>> {
        let (v, w) = (&state[0], &state[1]);
        let vv = product(v, v, self.dealias)?;
        let mut ww = product(&v.scaled(2.0), w, self.dealias)?;
        ww.axpy(1.0, &product(w, w, self.dealias)?);
        Ok(vec![vv, ww])
    }
}

fn system_rhs<Q: Quadratic + ?Sized>(
    sys: &Q,
    table: &SymbolTable,
    t: f64,
    y: &[SpectralField],
) -> Result<Vec<SpectralField>> {
    let q = sys.eval(t, y)?;
    y.iter()
        .zip(&q)
        .map(|(v, qi)| linear_minus_quadratic(v, qi, table, t))
        .collect()
}

/// Outcome of one Picard–Duhamel step.
#[derive(Debug, Clone)]
pub struct PicardStep<S> {
    pub state: S,
    pub iterations: usize,
    /// Largest ratio of successive iterate distances observed (0 if fewer than two).
    pub max_ratio: f64,
    /// Successive iterate distances in `‖·‖₁`.
    pub distances: Vec<f64>,
}

/// Picard iteration on the Duhamel formula over one step of length `dt`.
///
/// The unknown path is held at `cfg.quad_substeps` equispaced nodes on `[0, dt]`; the
/// integral `∫₀^τ S(τ−t′) A_j Q(t′) dt′` is evaluated with the composite trapezoid rule
/// with exact propagation between nodes. Iterates start from the linear prediction
/// `S(τ)y` and stop once successive paths differ by less than `picard_tol` in `‖·‖₁`.
pub fn picard_duhamel_step<Q: Quadratic + ?Sized>(
    y: &[SpectralField],
    t: f64,
    dt: f64,
    sys: &Q,
    table: &SymbolTable,
    cfg: &SolverConfig,
) -> Result<PicardStep<Vec<SpectralField>>> {
    let nodes = cfg.quad_substeps;
    let offset = |i: usize| {
        if i + 1 == nodes {
            dt
        } else {
            dt * i as f64 / (nodes - 1) as f64
        }
    };
    let props: Vec<PropagatorTable> = (0..nodes)
        .map(|i| PropagatorTable::new(table, offset(i)))
        .collect();
    let linear: Vec<Vec<SpectralField>> = props
        .iter()
        .map(|s| y.iter().map(|f| s.apply(f)).collect())
        .collect();

    let c = nonlinear_coefficient(table.params());
    if c == 0.0 {
        return Ok(PicardStep {
            state: linear[nodes - 1].clone(),
            iterations: 1,
            max_ratio: 0.0,
            distances: vec![],
        });
    }

    let h = dt / (nodes - 1) as f64;
    let mut path = linear.clone();
    let mut distances: Vec<f64> = Vec::new();
    let mut max_ratio: f64 = 0.0;
    let mut growing = 0usize;

    for iter in 1..=cfg.picard_max_iter {
        // A_j Q at every node of the current path
        let forcing: Vec<Vec<SpectralField>> = path
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let q = sys.eval(t + offset(j), v)?;
                Ok(q.iter().map(|qi| apply_aj(qi, table)).collect())
            })
            .collect::<Result<_>>()?;

        let mut next = Vec::with_capacity(nodes);
        next.push(y.to_vec());
        for i in 1..nodes {
            let mut vi = linear[i].clone();
            for j in 0..=i {
                let weight = if j == 0 || j == i { 0.5 * h } else { h };
                for (comp, g) in vi.iter_mut().zip(&forcing[j]) {
                    comp.axpy(-c * weight, &props[i - j].apply(g));
                }
            }
            if vi.iter().any(|f| !f.is_finite()) {
                return Err(Error::NonFiniteState { t: t + offset(i) });
            }
            next.push(vi);
        }

        let dist = path
            .iter()
            .zip(&next)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(a, b)| {
                let mut d = b.clone();
                d.axpy(-1.0, a);
                sobolev_norm(&d, 1.0)
            })
            .fold(0.0, f64::max);
        let last_ratio = distances.last().map(|&p| if p > 0.0 { dist / p } else { 0.0 });
        if let Some(r) = last_ratio {
            max_ratio = max_ratio.max(r);
            growing = if r > 1.0 { growing + 1 } else { 0 };
        }
        distances.push(dist);
        path = next;

        if dist < cfg.picard_tol {
            return Ok(PicardStep {
                state: path.pop().expect("at least two nodes"),
                iterations: iter,
                max_ratio,
                distances,
            });
        }
        if growing >= 3 || iter == cfg.picard_max_iter {
            return Err(Error::NonContraction {
                t,
                iterations: iter,
                last_ratio: last_ratio.unwrap_or(f64::NAN),
            });
        }
    }
    unreachable!("loop returns on its final iteration")
}

/// Single-field Picard–Duhamel step for the full problem.
pub fn step_picard_duhamel(
    f: &SpectralField,
    dt: f64,
    table: &SymbolTable,
    cfg: &SolverConfig,
) -> Result<PicardStep<SpectralField>> {
    let sys = SelfInteraction {
        dealias: cfg.dealias,
    };
    let step = picard_duhamel_step(std::slice::from_ref(f), 0.0, dt, &sys, table, cfg)?;
    Ok(PicardStep {
        state: step.state.into_iter().next().expect("one component"),
        iterations: step.iterations,
        max_ratio: step.max_ratio,
        distances: step.distances,
    })
}

/// `T′ = 2/(3αC·M)` with `M = 2‖η₀‖_s`; infinite for zero data or `α = 0`.
pub fn estimate_local_time(norm_s: f64, c: f64, alpha: f64) -> f64 {
    let denom = 3.0 * alpha * c * 2.0 * norm_s;
    if denom == 0.0 {
        f64::INFINITY
    } else {
        2.0 / denom
    }
}

/// `‖A_j(uv)‖_r / (‖u‖_s ‖v‖_r)` with the exact (dealiased) product; `None` when a factor is zero.
pub fn bilinear_ratio(
    u: &SpectralField,
    v: &SpectralField,
    s: f64,
    r: f64,
    table: &SymbolTable,
) -> Result<Option<f64>> {
    let den = sobolev_norm(u, s) * sobolev_norm(v, r);
    if den == 0.0 {
        return Ok(None);
    }
    let uv = dealiased_product(u, v)?;
    Ok(Some(sobolev_norm(&apply_aj(&uv, table), r) / den))
}

/// Random pair generator shared by the constant estimates and the probes.
pub(crate) fn random_probe_field(grid: PeriodicGrid, rng: &mut ChaCha8Rng) -> SpectralField {
    let kmax = grid.mode_cutoff();
    let bandwidth = rng.gen_range(1..=kmax);
    let decay = rng.gen_range(0.0..3.0);
    random_band_limited(grid, bandwidth, decay, rng.gen_bool(0.5), rng)
}

/// Bilinear ratios of `trials` random band-limited pairs, in draw order.
pub fn sample_bilinear_ratios(
    s: f64,
    r: f64,
    trials: usize,
    grid: PeriodicGrid,
    params: &ModelParams,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(0.0..=s + 1.0).contains(&r) {
        return Err(Error::InvalidConfig {
            key: "r".into(),
            reason: format!("requires 0 <= r <= s + 1, got s = {s}, r = {r}"),
        });
    }
    let table = SymbolTable::new(grid, *params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    while out.len() < trials {
        let u = random_probe_field(grid, &mut rng);
        let v = random_probe_field(grid, &mut rng);
        if let Some(q) = bilinear_ratio(&u, &v, s, r, &table)? {
            out.push(q);
        }
    }
    Ok(out)
}

/// Safety factor applied to the sampled maximum of the bilinear ratio.
pub const BILINEAR_SAFETY: f64 = 2.0;

/// Empirical `C_{s,r}`: twice the largest sampled bilinear ratio.
pub fn estimate_bilinear_constant(
    s: f64,
    r: f64,
    trials: usize,
    grid: PeriodicGrid,
    params: &ModelParams,
    seed: u64,
) -> Result<f64> {
    let ratios = sample_bilinear_ratios(s, r, trials, grid, params, seed)?;
    Ok(BILINEAR_SAFETY * ratios.into_iter().fold(0.0, f64::max))
}

/// Trials used when the Picard guard has to estimate `C_{s,s}` itself.
pub const DEFAULT_CONSTANT_TRIALS: usize = 200;

fn step_plan(cfg: &SolverConfig) -> (usize, f64) {
    if cfg.t_end == 0.0 {
        return (0, 0.0);
    }
    let n = (cfg.t_end.abs() / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    (n, cfg.t_end / n as f64)
}

/// Integrates a system from `t = 0`, returning states at the recorded steps.
fn integrate<Q: Quadratic + ?Sized>(
    y0: Vec<SpectralField>,
    sys: &Q,
    table: &SymbolTable,
    cfg: &SolverConfig,
) -> Result<Vec<(f64, Vec<SpectralField>)>> {
    cfg.validate()?;
    for f in &y0 {
        f.grid().check_same(table.grid())?;
    }
    let (steps, h) = step_plan(cfg);
    let s = SobolevIndex(cfg.sobolev_s);
    let guard_c = match (cfg.method, cfg.bilinear_constant) {
        (Method::PicardDuhamel, Some(c)) => c,
        (Method::PicardDuhamel, None) => estimate_bilinear_constant(
            cfg.sobolev_s.max(0.0),
            cfg.sobolev_s.max(0.0),
            DEFAULT_CONSTANT_TRIALS,
            *table.grid(),
            table.params(),
            0,
        )?,
        _ => f64::NAN,
    };

    let mut y = y0;
    let mut out = vec![(0.0, y.clone())];
    for n in 0..steps {
        let t = n as f64 * h;
        y = match cfg.method {
            Method::Rk4 => step_rk4(&y, t, h, |ts, ys| system_rhs(sys, table, ts, ys))?,
            Method::PicardDuhamel => {
                let local = estimate_local_time(
                    sys.guard_norm(t, &y, s)?,
                    guard_c,
                    table.params().alpha,
                );
                if h.abs() >= 0.5 * local {
                    return Err(Error::StepTooLarge {
                        dt: h.abs(),
                        limit: 0.5 * local,
                    });
                }
                picard_duhamel_step(&y, t, h, sys, table, cfg)?.state
            }
        };
        let t_next = if n + 1 == steps { cfg.t_end } else { (n + 1) as f64 * h };
        if y.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        if (n + 1) % cfg.diagnostics_every == 0 || n + 1 == steps {
            out.push((t_next, y.clone()));
        }
    }
    Ok(out)
}

/// Evolves the full problem from `eta0` to `cfg.t_end` (either sign).
pub fn solve(eta0: &SpectralField, params: &ModelParams, cfg: &SolverConfig) -> Result<Trajectory> {
    let table = SymbolTable::new(*eta0.grid(), *params);
    solve_with_table(eta0, &table, cfg)
}

pub fn solve_with_table(
    eta0: &SpectralField,
    table: &SymbolTable,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    let sys = SelfInteraction {
        dealias: cfg.dealias,
    };
    let states = integrate(vec![eta0.clone()], &sys, table, cfg)?;
    Ok(Trajectory::from_states(
        table,
        cfg.sobolev_s,
        states.into_iter().map(|(t, mut y)| (t, y.remove(0))).collect(),
    ))
}

/// Evolves the problem driven by `u` from `w0`.
pub fn solve_coupled(
    w0: &SpectralField,
    u: &ForcingField,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    if !u.covers(0.0, cfg.t_end) {
        let (start, end) = u.interval();
        return Err(Error::ForcingOutOfRange {
            t: cfg.t_end,
            start,
            end,
        });
    }
    let table = SymbolTable::new(*w0.grid(), *params);
    let sys = Forced {
        forcing: u,
        dealias: cfg.dealias,
    };
    let states = integrate(vec![w0.clone()], &sys, &table, cfg)?;
    Ok(Trajectory::from_states(
        &table,
        cfg.sobolev_s,
        states.into_iter().map(|(t, mut y)| (t, y.remove(0))).collect(),
    ))
}

/// Jointly steps `v` (full problem) and `w` (driven by `u = 2v`). Returns `(v, w)`.
pub fn solve_split_pair(
    v0: &SpectralField,
    w0: &SpectralField,
    table: &SymbolTable,
    cfg: &SolverConfig,
) -> Result<(Trajectory, Trajectory)> {
    let sys = SplitPair {
        dealias: cfg.dealias,
    };
    let states = integrate(vec![v0.clone(), w0.clone()], &sys, table, cfg)?;
    let (mut vs, mut ws) = (Vec::new(), Vec::new());
    for (t, mut y) in states {
        let w = y.pop().expect("two components");
        let v = y.pop().expect("two components");
        vs.push((t, v));
        ws.push((t, w));
    }
    Ok((
        Trajectory::from_states(table, cfg.sobolev_s, vs),
        Trajectory::from_states(table, cfg.sobolev_s, ws),
    ))
}
