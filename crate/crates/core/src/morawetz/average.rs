//! Time/scale averages of windowed quantities: the parameter schedule, the
//! recorder feeding the averaged interaction term, and windowed coercivity.

use serde::Serialize;

use crate::evolve::{Monitor, SeriesRow, State};
use crate::grid::{self, Field, GridDesc};
use crate::groundstate::GroundState;
use crate::nonlin::System;
use crate::{Error, Result};

use super::density::{windowed_field, windowed_with, Window, Windowed};

/// (J, R₀, T₀, ε₁) closing the averaged estimate.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Schedule {
    pub eps: f64,
    pub j: f64,
    pub r0: f64,
    pub t0: f64,
    pub eps1: f64,
    /// false when J, R₀ or T₀ were supplied by the user
    pub verbatim: bool,
    pub warning: Option<String>,
}

/// J = ε⁻², R₀ = ε⁻¹, T₀ = e^{ε⁻²}, ε₁ = e^{−ε⁻²}.
pub fn schedule(eps: f64) -> Result<Schedule> {
    if !(eps > 0.0 && eps < 1.0 + 1e-15) {
        return Err(Error::Precondition(format!("schedule parameter must lie in (0, 1], got {}", eps)));
    }
    let j = eps.powi(-2);
    let t0 = j.exp();
    let warning = if t0 > 1e4 {
        let m = format!("T0 = e^{} = {:.3e} exceeds the desk budget of 1e4 time units; supply T0 explicitly", j, t0);
        log::warn!("{}", m);
        Some(m)
    } else {
        None
    };
    Ok(Schedule { eps, j, r0: 1.0 / eps, t0, eps1: (-j).exp(), verbatim: true, warning })
}

impl Schedule {
    /// Replaces T₀, marking the schedule as non-verbatim.
    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self.verbatim = false;
        self.warning = None;
        self
    }

    pub fn custom(eps: f64, j: f64, r0: f64, t0: f64) -> Self {
        Schedule { eps, j, r0, t0, eps1: (-j).exp(), verbatim: false, warning: None }
    }

    /// `count` radii equally spaced in log R on [R₀, R₀e^J].
    pub fn radii(&self, count: usize) -> Vec<f64> {
        let count = count.max(2);
        (0..count).map(|i| self.r0 * (self.j * i as f64 / (count - 1) as f64).exp()).collect()
    }
}

/// Records centred windowed quantities at a set of radii.
#[derive(Clone, Debug)]
pub struct MorawetzRecorder {
    pub eps_chi: f64,
    pub radii: Vec<f64>,
    /// minimum time between kept monitor rows
    pub interval: f64,
    pub times: Vec<f64>,
    pub values: Vec<Vec<Windowed>>,
    cache: Option<(GridDesc, Vec<Vec<f64>>, Vec<f64>)>,
}

impl MorawetzRecorder {
    pub fn new(eps_chi: f64, radii: Vec<f64>, interval: f64) -> Self {
        MorawetzRecorder { eps_chi, radii, interval: interval.max(0.0), times: Vec::new(), values: Vec::new(), cache: None }
    }

    pub fn record(&mut self, sys: &System, state: &State) -> Result<()> {
        let g = state.field.grid;
        if self.cache.as_ref().map_or(true, |c| c.0 != g) {
            let windows = self
                .radii
                .iter()
                .map(|&r| Window::centered(self.eps_chi, r).sample(&g))
                .collect::<Result<Vec<_>>>()?;
            self.cache = Some((g, windows, g.weights()));
        }
        let (_, windows, w) = self.cache.as_ref().unwrap();
        let row = windows.iter().map(|c| windowed_with(sys, &state.field, c, w)).collect();
        self.times.push(state.t);
        self.values.push(row);
        Ok(())
    }

    /// Flat rows (t, R, windowed values) for CSV output.
    pub fn rows(&self) -> Vec<(f64, f64, Windowed)> {
        let mut out = Vec::new();
        for (t, vals) in self.times.iter().zip(&self.values) {
            for (r, v) in self.radii.iter().zip(vals) {
                out.push((*t, *r, *v));
            }
        }
        out
    }
}

impl Monitor for MorawetzRecorder {
    fn observe(&mut self, sys: &System, state: &State, _row: &mut SeriesRow) -> Result<()> {
        let due = self.times.last().map_or(true, |&t| state.t > t && state.t - t >= self.interval * (1.0 - 1e-9));
        if due {
            self.record(sys, state)?;
        }
        Ok(())
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum()
}

/// ∫ R^{−5} 𝓜(χ_R u)K(χ_R u^{ξ₀}) dR/R at one recorded time.
fn scale_integral(radii: &[f64], vals: &[Windowed]) -> f64 {
    let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let g: Vec<f64> = radii.iter().zip(vals).map(|(r, v)| r.powi(-5) * v.mass * v.kinetic_boosted).collect();
    trapezoid(&lr, &g)
}

/// (1/(J T₀))∫₀^{T₀}∫_{R₀}^{R₀e^J} R^{−5} 𝓜(χ_R u)K(χ_R u^{ξ₀}) dR/R dt from a
/// recorder, J = ln(R_max/R₀). Times start at the first recorded sample.
pub fn morawetz_average(rec: &MorawetzRecorder, t0: f64) -> Result<f64> {
    let last = rec.times.last().copied().unwrap_or(0.0);
    if rec.times.len() < 2 || t0 > last * (1.0 + 1e-12) {
        return Err(Error::ScheduleOverflow { requested: t0, available: last });
    }
    if rec.radii.len() < 2 {
        return Err(Error::Precondition("need at least two radii".into()));
    }
    let j = (rec.radii[rec.radii.len() - 1] / rec.radii[0]).ln();
    let g: Vec<f64> = rec.values.iter().map(|v| scale_integral(&rec.radii, v)).collect();
    let start = rec.times[0];
    let mut ts = Vec::new();
    let mut gs = Vec::new();
    for (i, &t) in rec.times.iter().enumerate() {
        if t <= t0 {
            ts.push(t);
            gs.push(g[i]);
        } else {
            let (ta, ga) = (rec.times[i - 1], g[i - 1]);
            let s = (t0 - ta) / (t - ta);
            ts.push(t0);
            gs.push(ga + s * (g[i] - ga));
            break;
        }
    }
    let span = t0 - start;
    if !(span > 0.0) {
        return Err(Error::Precondition("T0 must exceed the first recorded time".into()));
    }
    Ok(trapezoid(&ts, &gs) / (j * span))
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoercivitySample {
    pub t: f64,
    /// |∫χ²𝓚 − K(χu) − ∫χΔχ Σγ|u|²| / ∫χ²𝓚
    pub identity_residual: f64,
    /// Q(χu)K(χu) / (Q(ψ)K(ψ))
    pub margin: f64,
}

pub fn windowed_coercivity(sys: &System, field: &Field, win: &Window, qk_star: f64, t: f64) -> Result<CoercivitySample> {
    let g = field.grid;
    let c = win.sample(&g)?;
    let w = g.weights();
    let lap = grid::laplacian_real(&g, &c);
    let cu = windowed_field(field, &c);
    let (gam, a, s) = (sys.gamma(), sys.alpha(), &sys.sigma);
    let mut lhs = 0.0;
    let mut kin = 0.0;
    let mut pot = 0.0;
    let mut q = 0.0;
    for (k, u) in field.comps.iter().enumerate() {
        lhs += gam[k] * grid::windowed_kinetic(&g, &c, u);
        kin += gam[k] * grid::kinetic(&g, &cu.comps[k]);
        pot += gam[k] * (0..u.len()).map(|j| w[j] * c[j] * lap[j] * u[j].norm_sqr()).sum::<f64>();
        q += s[k] * a[k] / 2.0 * grid::norm_sq(&g, &cu.comps[k]);
    }
    let identity_residual = if lhs.abs() > 0.0 { (lhs - kin - pot).abs() / lhs.abs() } else { (kin + pot).abs() };
    Ok(CoercivitySample { t, identity_residual, margin: q * kin / qk_star })
}

/// Windowed identity and coercivity margin along stored states.
pub fn windowed_coercivity_check(sys: &System, states: &[State], gs: &GroundState, win: &Window) -> Result<Vec<CoercivitySample>> {
    let qk = gs.q * gs.k;
    let mut out = Vec::with_capacity(states.len());
    for st in states {
        let s = windowed_coercivity(sys, &st.field, win, qk, st.t)?;
        if s.identity_residual > 1e-8 {
            return Err(Error::IdentityFailure(format!("windowed kinetic identity off by {:e} at t = {}", s.identity_residual, st.t)));
        }
        out.push(s);
    }
    Ok(out)
}

/// Monitor form of [`windowed_coercivity_check`].
#[derive(Clone, Debug)]
pub struct WindowedCoercivityMonitor {
    pub window: Window,
    pub qk_star: f64,
    pub samples: Vec<CoercivitySample>,
}

impl WindowedCoercivityMonitor {
    pub fn new(window: Window, gs: &GroundState) -> Self {
        WindowedCoercivityMonitor { window, qk_star: gs.q * gs.k, samples: Vec::new() }
    }
}

impl Monitor for WindowedCoercivityMonitor {
    fn observe(&mut self, sys: &System, state: &State, row: &mut SeriesRow) -> Result<()> {
        let s = windowed_coercivity(sys, &state.field, &self.window, self.qk_star, state.t)?;
        row.extras.insert("windowMargin".into(), s.margin);
        self.samples.push(s);
        Ok(())
    }
}
