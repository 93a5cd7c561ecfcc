//! Time integration by Strang splitting: half nonlinear step, full free
//! step, half nonlinear step.
//!
//! The free step is exact on the periodic grid (Fourier multiplier) and
//! Crank–Nicolson on the radial grid, applied to the symmetric form
//! W^{1/2} Δ W^{−1/2} so that the discrete mass is preserved to solver
//! roundoff. The nonlinear step integrates ∂_t u_k = (i/α_k) f_k(u)
//! pointwise with classical RK4.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{self, snapshot, Field, GridDesc, RadialGeom, Spectral1};
use crate::groundstate::functionals;
use crate::nonlin::System;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    StrangCN,
    StrangSpectral,
}

impl Scheme {
    pub fn for_grid(grid: &GridDesc) -> Scheme {
        if grid.is_radial() {
            Scheme::StrangCN
        } else {
            Scheme::StrangSpectral
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Checked against the grid; `None` picks the natural scheme.
    pub scheme: Option<Scheme>,
    pub nonlinear_substeps: usize,
    /// Warn when the fraction of mass in the outer tenth of the domain exceeds this.
    pub boundary_mass_warn: f64,
    /// Abort when K(t) exceeds this multiple of K(0).
    pub blowup_factor: f64,
    /// Emit a series row every this many steps (and at the final time).
    pub monitor_stride: usize,
    /// Write a snapshot every this many steps, if a directory is set.
    pub snapshot_stride: usize,
    #[serde(skip)]
    pub snapshot_dir: Option<PathBuf>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            scheme: None,
            nonlinear_substeps: 1,
            boundary_mass_warn: 1e-3,
            blowup_factor: 25.0,
            monitor_stride: 10,
            snapshot_stride: 0,
            snapshot_dir: None,
        }
    }
}

impl IntegratorConfig {
    pub fn with_dt(dt: f64) -> Self {
        IntegratorConfig { dt, ..Default::default() }
    }

    pub fn validate(&self, grid: &GridDesc) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.nonlinear_substeps == 0 || self.monitor_stride == 0 {
            return Err(Error::Config("substeps and monitor stride must be at least 1".into()));
        }
        if let Some(s) = self.scheme {
            if s != Scheme::for_grid(grid) {
                return Err(Error::Config(format!("scheme {:?} does not fit grid {:?}", s, grid)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub field: Field,
    pub t: f64,
}

impl State {
    pub fn new(field: Field) -> Self {
        State { field, t: 0.0 }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct SeriesRow {
    pub t: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Ebeta")]
    pub ebeta: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "L3norm")]
    pub l3norm: f64,
    pub boundary_mass: f64,
    pub extras: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct TimeSeries {
    pub rows: Vec<SeriesRow>,
}

impl TimeSeries {
    pub fn push(&mut self, row: SeriesRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(Error::Precondition(format!("series time {} not after {}", row.t, last.t)));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, f: impl Fn(&SeriesRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.column(|r| r.t)
    }

    /// max |x(t) − x(0)| / |x(0)|.
    pub fn relative_drift(&self, f: impl Fn(&SeriesRow) -> f64) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        let x0 = f(first);
        let scale = if x0 != 0.0 { x0.abs() } else { 1.0 };
        self.rows.iter().map(|r| (f(r) - x0).abs() / scale).fold(0.0, f64::max)
    }

    /// Names of the extra columns, in sorted order.
    pub fn extra_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.rows.iter().flat_map(|r| r.extras.keys().cloned()).collect();
        names.sort();
        names.dedup();
        names
    }

    /// CSV with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        use crate::util::fmt17;
        let extras = self.extra_names();
        let mut s = String::from("t,Q,Ebeta,K,P,L3norm,boundaryMass");
        for e in &extras {
            s.push(',');
            s.push_str(e);
        }
        s.push('\n');
        for r in &self.rows {
            let vals = [r.t, r.q, r.ebeta, r.k, r.p, r.l3norm, r.boundary_mass];
            let mut line: Vec<String> = vals.iter().map(|&v| fmt17(v)).collect();
            for e in &extras {
                line.push(r.extras.get(e).map(|&v| fmt17(v)).unwrap_or_default());
            }
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

/// Observer called at every emitted row; may add extra columns.
pub trait Monitor {
    fn observe(&mut self, sys: &System, state: &State, row: &mut SeriesRow) -> Result<()>;
}

/// Outcome of `evolve_to`.
#[derive(Debug)]
pub struct Run {
    pub series: TimeSeries,
    pub state: State,
    pub blowup_time: Option<f64>,
    pub blowup_reason: Option<String>,
    pub warnings: Vec<String>,
    pub snapshots: Vec<PathBuf>,
    pub steps: usize,
}

/// Precomputed free propagator U(dt) for every component.
pub struct Propagator {
    dt: f64,
    kind: PropKind,
}

enum PropKind {
    Identity,
    Spectral { sp: Spectral1, mult: Vec<Vec<C64>> },
    Radial { sqrt_w: Vec<f64>, inv_sqrt_w: Vec<f64>, comps: Vec<CnFactor> },
}

/// (I − λA) v' = (I + λA) v with A = (iγ/α) L_sym − iβ/α and λ = dt/2.
struct CnFactor {
    // explicit side: diag and symmetric offdiag of (I + λA)
    ed: Vec<C64>,
    eo: Vec<C64>,
    // implicit side factored for the Thomas sweep
    io: Vec<C64>,
    cp: Vec<C64>,
    inv_den: Vec<C64>,
}

impl CnFactor {
    fn new(diag: &[f64], off: &[f64], alpha: f64, gamma: f64, beta: f64, dt: f64) -> Self {
        let n = diag.len();
        let lam = dt / 2.0;
        let i = C64::new(0.0, 1.0);
        let ad: Vec<C64> = diag.iter().map(|&d| i * (gamma * d - beta) / alpha).collect();
        let ao: Vec<C64> = off.iter().map(|&o| i * gamma * o / alpha).collect();
        let ed = ad.iter().map(|a| 1.0 + lam * a).collect();
        let eo = ao.iter().map(|a| lam * a).collect();
        let id: Vec<C64> = ad.iter().map(|a| 1.0 - lam * a).collect();
        let io: Vec<C64> = ao.iter().map(|a| -lam * a).collect();
        let mut cp = vec![C64::new(0.0, 0.0); n];
        let mut inv_den = vec![C64::new(0.0, 0.0); n];
        let mut den = id[0];
        inv_den[0] = 1.0 / den;
        for j in 0..n {
            if j > 0 {
                den = id[j] - io[j - 1] * cp[j - 1];
                inv_den[j] = 1.0 / den;
            }
            if j + 1 < n {
                cp[j] = io[j] * inv_den[j];
            }
        }
        CnFactor { ed, eo, io, cp, inv_den }
    }

    fn step(&self, v: &mut [C64], rhs: &mut [C64]) {
        let n = v.len();
        for j in 0..n {
            let mut s = self.ed[j] * v[j];
            if j > 0 {
                s += self.eo[j - 1] * v[j - 1];
            }
            if j + 1 < n {
                s += self.eo[j] * v[j + 1];
            }
            rhs[j] = s;
        }
        // forward sweep, in place
        rhs[0] *= self.inv_den[0];
        for j in 1..n {
            rhs[j] = (rhs[j] - self.io[j - 1] * rhs[j - 1]) * self.inv_den[j];
        }
        v[n - 1] = rhs[n - 1];
        for j in (0..n - 1).rev() {
            v[j] = rhs[j] - self.cp[j] * v[j + 1];
        }
    }
}

impl Propagator {
    pub fn new(sys: &System, grid: &GridDesc, dt: f64) -> Self {
        let l = sys.l();
        let kind = if dt == 0.0 {
            PropKind::Identity
        } else {
            match grid {
                GridDesc::Cartesian1 { .. } => {
                    let sp = Spectral1::new(grid);
                    let mult = (0..l)
                        .map(|k| {
                            let (a, g, b) = (sys.alpha()[k], sys.gamma()[k], sys.beta()[k]);
                            sp.xi.iter().map(|x| C64::from_polar(1.0, -(g * x * x + b) * dt / a)).collect()
                        })
                        .collect();
                    PropKind::Spectral { sp, mult }
                }
                GridDesc::Radial { .. } => {
                    let geom = RadialGeom::new(grid);
                    let (diag, off) = geom.symmetric_laplacian();
                    let comps = (0..l)
                        .map(|k| CnFactor::new(&diag, &off, sys.alpha()[k], sys.gamma()[k], sys.beta()[k], dt))
                        .collect();
                    let sqrt_w: Vec<f64> = geom.vol.iter().map(|v| v.sqrt()).collect();
                    let inv_sqrt_w = sqrt_w.iter().map(|s| 1.0 / s).collect();
                    PropKind::Radial { sqrt_w, inv_sqrt_w, comps }
                }
            }
        };
        Propagator { dt, kind }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn apply(&self, field: &mut Field) {
        match &self.kind {
            PropKind::Identity => {}
            PropKind::Spectral { sp, mult } => {
                field.comps.par_iter_mut().zip(mult).for_each(|(c, m)| sp.apply_in_place(c, m));
            }
            PropKind::Radial { sqrt_w, inv_sqrt_w, comps } => {
                field.comps.par_iter_mut().zip(comps).for_each(|(c, f)| {
                    let mut rhs = vec![C64::new(0.0, 0.0); c.len()];
                    for (z, s) in c.iter_mut().zip(sqrt_w) {
                        *z *= s;
                    }
                    f.step(c, &mut rhs);
                    for (z, s) in c.iter_mut().zip(inv_sqrt_w) {
                        *z *= s;
                    }
                });
            }
        }
    }
}

/// U(dt) applied to the state; time advances by dt.
pub fn free_propagate(sys: &System, state: &State, dt: f64) -> State {
    let mut field = state.field.clone();
    Propagator::new(sys, &field.grid, dt).apply(&mut field);
    State { field, t: state.t + dt }
}

/// Scratch storage is on the stack for up to this many components.
const STACK_L: usize = 8;

#[inline]
fn rk4_point(sys: &System, z: &mut [C64], h: f64, substeps: usize, i_over_a: &[C64], scratch: &mut [[C64; STACK_L]; 5]) {
    let l = z.len();
    let [k1, k2, k3, k4, tmp] = scratch;
    let rhs = |u: &[C64], out: &mut [C64]| {
        sys.eval_all(u, out);
        for k in 0..l {
            out[k] *= i_over_a[k];
        }
    };
    let (k1, k2, k3, k4, tmp) = (&mut k1[..l], &mut k2[..l], &mut k3[..l], &mut k4[..l], &mut tmp[..l]);
    for _ in 0..substeps {
        rhs(z, k1);
        for k in 0..l {
            tmp[k] = z[k] + k1[k] * (h / 2.0);
        }
        rhs(tmp, k2);
        for k in 0..l {
            tmp[k] = z[k] + k2[k] * (h / 2.0);
        }
        rhs(tmp, k3);
        for k in 0..l {
            tmp[k] = z[k] + k3[k] * h;
        }
        rhs(tmp, k4);
        for k in 0..l {
            z[k] += (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]) * (h / 6.0);
        }
    }
}

/// Heap-backed variant for systems with more than `STACK_L` components.
fn rk4_point_heap(sys: &System, z: &mut [C64], h: f64, substeps: usize, i_over_a: &[C64]) {
    let l = z.len();
    let mut k = vec![vec![C64::new(0.0, 0.0); l]; 5];
    let rhs = |u: &[C64], out: &mut [C64]| {
        sys.eval_all(u, out);
        for (o, m) in out.iter_mut().zip(i_over_a) {
            *o *= m;
        }
    };
    for _ in 0..substeps {
        let (a, rest) = k.split_at_mut(1);
        let (b, rest) = rest.split_at_mut(1);
        let (c, rest) = rest.split_at_mut(1);
        let (d, t) = rest.split_at_mut(1);
        let (k1, k2, k3, k4, tmp) = (&mut a[0], &mut b[0], &mut c[0], &mut d[0], &mut t[0]);
        rhs(z, k1);
        for j in 0..l {
            tmp[j] = z[j] + k1[j] * (h / 2.0);
        }
        rhs(tmp, k2);
        for j in 0..l {
            tmp[j] = z[j] + k2[j] * (h / 2.0);
        }
        rhs(tmp, k3);
        for j in 0..l {
            tmp[j] = z[j] + k3[j] * h;
        }
        rhs(tmp, k4);
        for j in 0..l {
            z[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
    }
}

/// Pointwise RK4 for ∂_t u_k = (i/α_k) f_k(u) over dt, in place.
pub fn nonlinear_substep_in_place(sys: &System, field: &mut Field, dt: f64, substeps: usize) {
    if dt == 0.0 {
        return;
    }
    let l = field.l();
    let n = field.grid.len();
    let substeps = substeps.max(1);
    let h = dt / substeps as f64;
    let i_over_a: Vec<C64> = sys.alpha().iter().map(|a| C64::new(0.0, 1.0 / a)).collect();
    const CHUNK: usize = 512;
    // transpose to point-major so chunks can be processed independently
    let mut pts: Vec<C64> = vec![C64::new(0.0, 0.0); n * l];
    for (k, c) in field.comps.iter().enumerate() {
        for j in 0..n {
            pts[j * l + k] = c[j];
        }
    }
    let work = |chunk: &mut [C64]| {
        let mut scratch = [[C64::new(0.0, 0.0); STACK_L]; 5];
        for z in chunk.chunks_mut(l) {
            if l <= STACK_L {
                rk4_point(sys, z, h, substeps, &i_over_a, &mut scratch);
            } else {
                rk4_point_heap(sys, z, h, substeps, &i_over_a);
            }
        }
    };
    if n >= 4 * CHUNK && rayon::current_num_threads() > 1 {
        pts.par_chunks_mut(CHUNK * l).for_each(work);
    } else {
        work(&mut pts);
    }
    for (k, c) in field.comps.iter_mut().enumerate() {
        for j in 0..n {
            c[j] = pts[j * l + k];
        }
    }
}

pub fn nonlinear_substep(sys: &System, state: &State, dt: f64, substeps: usize) -> State {
    let mut field = state.field.clone();
    nonlinear_substep_in_place(sys, &mut field, dt, substeps);
    State { field, t: state.t }
}

/// One Strang step N(dt/2) U(dt) N(dt/2) with a prepared propagator.
pub fn strang_step_with(sys: &System, prop: &Propagator, state: &mut State, substeps: usize) {
    let dt = prop.dt();
    nonlinear_substep_in_place(sys, &mut state.field, dt / 2.0, substeps);
    prop.apply(&mut state.field);
    nonlinear_substep_in_place(sys, &mut state.field, dt / 2.0, substeps);
    state.t += dt;
}

pub fn strang_step(sys: &System, state: &State, dt: f64) -> State {
    let prop = Propagator::new(sys, &state.field.grid, dt);
    let mut s = state.clone();
    strang_step_with(sys, &prop, &mut s, 1);
    s
}

/// ‖(Σ_k |u_k|²)^{1/2}‖_{L³}.
pub fn l3_norm(field: &Field) -> f64 {
    let w = field.grid.weights();
    let s: f64 = (0..field.grid.len())
        .map(|j| {
            let m: f64 = field.comps.iter().map(|c| c[j].norm_sqr()).sum();
            w[j] * m.powf(1.5)
        })
        .sum();
    s.cbrt()
}

/// Fraction of Σ‖u_k‖² located in the outer tenth of the domain.
pub fn boundary_mass(field: &Field) -> f64 {
    let w = field.grid.weights();
    let x = field.grid.nodes();
    let edge = 0.9 * field.grid.extent();
    let mut outer = 0.0;
    let mut total = 0.0;
    for j in 0..field.grid.len() {
        let m: f64 = field.comps.iter().map(|c| c[j].norm_sqr()).sum();
        total += w[j] * m;
        if x[j].abs() > edge {
            outer += w[j] * m;
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

pub fn series_row(sys: &System, state: &State) -> SeriesRow {
    let fv = functionals(sys, &state.field);
    SeriesRow {
        t: state.t,
        q: fv.q,
        ebeta: fv.ebeta,
        k: fv.k,
        p: fv.p,
        l3norm: l3_norm(&state.field),
        boundary_mass: boundary_mass(&state.field),
        extras: BTreeMap::new(),
    }
}

/// Fixed-step integration to time `t_end`, emitting monitor rows.
///
/// The last step is shortened so the run ends exactly at `t_end`.
pub fn evolve_to(sys: &System, state: State, t_end: f64, cfg: &IntegratorConfig, monitors: &mut [&mut dyn Monitor]) -> Result<Run> {
    cfg.validate(&state.field.grid)?;
    if state.field.l() != sys.l() {
        return Err(Error::LengthMismatch { expected: sys.l(), got: state.field.l() });
    }
    if !(t_end > state.t) {
        return Err(Error::Precondition(format!("final time {} must exceed start time {}", t_end, state.t)));
    }
    let grid = state.field.grid;
    let span = t_end - state.t;
    let full = (span / cfg.dt * (1.0 + 1e-12)).floor() as usize;
    let rest = span - full as f64 * cfg.dt;
    let tail = if rest > 1e-9 * cfg.dt { Some(rest) } else { None };
    let nsteps = full + tail.is_some() as usize;
    let prop = Propagator::new(sys, &grid, cfg.dt);
    let t0 = state.t;

    let mut run = Run {
        series: TimeSeries::default(),
        state,
        blowup_time: None,
        blowup_reason: None,
        warnings: Vec::new(),
        snapshots: Vec::new(),
        steps: 0,
    };
    let emit = |run: &mut Run, monitors: &mut [&mut dyn Monitor]| -> Result<SeriesRow> {
        let mut row = series_row(sys, &run.state);
        for m in monitors.iter_mut() {
            m.observe(sys, &run.state, &mut row)?;
        }
        run.series.push(row.clone())?;
        Ok(row)
    };
    let first = emit(&mut run, monitors)?;
    let k0 = first.k;
    let mut warned = false;
    if let Some(dir) = &cfg.snapshot_dir {
        if cfg.snapshot_stride > 0 {
            run.snapshots.push(snapshot::write_snapshot(dir, "snap_000000", &run.state.field, run.state.t)?);
        }
    }

    for step in 1..=nsteps {
        if step == nsteps && tail.is_some() {
            let p = Propagator::new(sys, &grid, tail.unwrap());
            strang_step_with(sys, &p, &mut run.state, cfg.nonlinear_substeps);
            run.state.t = t_end;
        } else {
            strang_step_with(sys, &prop, &mut run.state, cfg.nonlinear_substeps);
            run.state.t = t0 + step as f64 * cfg.dt;
        }
        run.steps = step;
        let last = step == nsteps;
        if !run.state.field.is_finite() {
            run.blowup_time = Some(run.state.t);
            run.blowup_reason = Some("non-finite values in the nonlinear substep".into());
            return Err(Error::BlowUpSuspected(Box::new(run)));
        }
        if step % cfg.monitor_stride == 0 || last {
            let row = emit(&mut run, monitors)?;
            if k0 > 0.0 && row.k > cfg.blowup_factor * k0 {
                run.blowup_time = Some(row.t);
                run.blowup_reason = Some(format!("K = {:.6e} exceeds {} K(0) = {:.6e}", row.k, cfg.blowup_factor, cfg.blowup_factor * k0));
                return Err(Error::BlowUpSuspected(Box::new(run)));
            }
            if !warned && row.boundary_mass > cfg.boundary_mass_warn {
                warned = true;
                let msg = format!("boundary contamination: mass fraction {:.3e} near the wall at t = {}", row.boundary_mass, row.t);
                log::warn!("{}", msg);
                run.warnings.push(msg);
            }
        }
        if let Some(dir) = &cfg.snapshot_dir {
            if cfg.snapshot_stride > 0 && (step % cfg.snapshot_stride == 0 || last) {
                let stem = format!("snap_{:06}", step);
                run.snapshots.push(snapshot::write_snapshot(dir, &stem, &run.state.field, run.state.t)?);
            }
        }
    }
    Ok(run)
}

/// Least-squares slope of log ‖U(t)u₀‖_∞ against log t (free flow only).
pub fn dispersive_decay_check(sys: &System, u0: &Field, times: &[f64]) -> Result<f64> {
    if times.len() < 2 || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Precondition("need at least two positive sample times".into()));
    }
    let sup0 = grid_sup(u0);
    if !(sup0 > 0.0) {
        return Err(Error::Precondition("zero initial data has no decay rate".into()));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut logt = Vec::new();
    let mut logs = Vec::new();
    let mut state = State::new(u0.clone());
    for &t in &sorted {
        let span = t - state.t;
        if u0.grid.is_radial() {
            // Crank–Nicolson with a step small against the Gaussian scale
            let n = (span / 0.01).ceil().max(1.0) as usize;
            let p = Propagator::new(sys, &u0.grid, span / n as f64);
            for _ in 0..n {
                p.apply(&mut state.field);
            }
        } else {
            Propagator::new(sys, &u0.grid, span).apply(&mut state.field);
        }
        state.t = t;
        logt.push(t.ln());
        logs.push(grid_sup(&state.field).ln());
    }
    Ok(crate::util::ls_slope(&logt, &logs))
}

fn grid_sup(f: &Field) -> f64 {
    f.comps.iter().flat_map(|c| c.iter().map(|z| z.norm())).fold(0.0, f64::max)
}

/// Relative L² distance Σ‖a_k − b_k‖ / Σ‖b_k‖ (squared norms summed).
pub fn relative_l2(a: &Field, b: &Field) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (ca, cb) in a.comps.iter().zip(&b.comps) {
        let d: Vec<C64> = ca.iter().zip(cb).map(|(x, y)| x - y).collect();
        num += grid::norm_sq(&a.grid, &d);
        den += grid::norm_sq(&b.grid, cb);
    }
    (num / den).sqrt()
}
