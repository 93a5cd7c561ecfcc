//! Threshold classification against the ground state, coercivity and
//! scattering evidence along a run, and sweeps over the γ₂ = κ family.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::evolve::{evolve_to, IntegratorConfig, Monitor, Propagator, Run, SeriesRow, State, TimeSeries};
use crate::grid::{self, Field, GridDesc};
use crate::groundstate::{functionals, petviashvili, GroundState, PetviashviliOptions};
use crate::nonlin::{resonance_deficit, System};
use crate::{Error, Result};

pub use crate::morawetz::{schedule, Schedule};

/// Relative tolerance under which a product is reported as sitting on the
/// threshold rather than below it.
const THRESHOLD_TIE: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdReport {
    #[serde(rename = "QE")]
    pub qe: f64,
    #[serde(rename = "QEstar")]
    pub qe_star: f64,
    #[serde(rename = "QK")]
    pub qk: f64,
    #[serde(rename = "QKstar")]
    pub qk_star: f64,
    #[serde(rename = "belowEnergy")]
    pub below_energy: bool,
    #[serde(rename = "belowKinetic")]
    pub below_kinetic: bool,
    #[serde(rename = "atEnergyThreshold")]
    pub at_energy_threshold: bool,
    #[serde(rename = "atKineticThreshold")]
    pub at_kinetic_threshold: bool,
    #[serde(rename = "resonanceDeficit")]
    pub resonance_deficit: f64,
}

fn tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= THRESHOLD_TIE * a.abs().max(b.abs())
}

/// Q(u₀)E_β(u₀) against Q(ψ)E₀(ψ) and Q(u₀)K(u₀) against Q(ψ)K(ψ), with ψ the
/// ground state at (ω, β) = (1, 0).
pub fn classify(sys: &System, u0: &Field, gs: &GroundState) -> Result<ThresholdReport> {
    if (gs.omega - 1.0).abs() > 1e-14 {
        return Err(Error::Precondition(format!("thresholds use the ω = 1 ground state, got ω = {}", gs.omega)));
    }
    let expect: Vec<f64> = sys.sigma.iter().zip(sys.alpha()).map(|(s, a)| s * a / 2.0).collect();
    if gs.c.iter().zip(&expect).any(|(c, e)| (c - e).abs() > 1e-12 * e.abs().max(1.0)) {
        return Err(Error::Precondition("thresholds use the β = 0 ground state".into()));
    }
    let fv = functionals(sys, u0);
    let qe = fv.q * fv.ebeta;
    let qe_star = gs.q * gs.functionals.e0;
    let qk = fv.q * fv.k;
    let qk_star = gs.q * gs.k;
    let at_e = tie(qe, qe_star);
    let at_k = tie(qk, qk_star);
    let deficit = resonance_deficit(&sys.spec, &sys.sigma)?.best_scaled;
    Ok(ThresholdReport {
        qe,
        qe_star,
        qk,
        qk_star,
        below_energy: qe < qe_star && !at_e,
        below_kinetic: qk < qk_star && !at_k,
        at_energy_threshold: at_e,
        at_kinetic_threshold: at_k,
        resonance_deficit: deficit,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoercivityReport {
    /// (t, Q(u₀)K(u(t)) / (Q(ψ)K(ψ)))
    pub margins: Vec<(f64, f64)>,
    pub max_ratio: f64,
    /// 1 − max ratio
    pub min_slack: f64,
    pub holds: bool,
}

/// Q(u₀)K(u(t)) < Q(ψ)K(ψ) at every sampled time of the series.
pub fn coercivity_monitor(series: &TimeSeries, gs: &GroundState) -> Result<CoercivityReport> {
    let first = series.rows.first().ok_or_else(|| Error::InsufficientRunLength("empty series".into()))?;
    let star = gs.q * gs.k;
    let margins: Vec<(f64, f64)> = series.rows.iter().map(|r| (r.t, first.q * r.k / star)).collect();
    let max_ratio = margins.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(CoercivityReport { margins, max_ratio, min_slack: 1.0 - max_ratio, holds: max_ratio < 1.0 })
}

/// Gate thresholds of the scattering evidence.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ScatteringOptions {
    pub window_len: f64,
    /// last window norm over first window norm
    pub decay_ratio: f64,
    /// sup K over the run against sup K over its first quarter
    pub kinetic_factor: f64,
    /// ‖w(T₂) − w(T₁)‖_{H¹} ≤ tol·‖w(T₁)‖_{H¹}
    pub cauchy_tol: f64,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        ScatteringOptions { window_len: 5.0, decay_ratio: 0.5, kinetic_factor: 1.05, cauchy_tol: 0.1 }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScatteringEvidence {
    /// (∫_window ‖u‖⁶_{L³} dt)^{1/6} per window
    pub window_norms: Vec<f64>,
    pub window_ratio: f64,
    pub gate_a: bool,
    pub kinetic_ratio: f64,
    pub gate_b: bool,
    pub cauchy_ratio: f64,
    pub gate_c: bool,
}

impl ScatteringEvidence {
    pub fn all(&self) -> bool {
        self.gate_a && self.gate_b && self.gate_c
    }
}

fn h1_norm(f: &Field) -> f64 {
    f.comps.iter().map(|u| grid::norm_sq(&f.grid, u) + grid::kinetic(&f.grid, u)).sum::<f64>().sqrt()
}

/// ‖U(−T₂)u(T₂) − U(−T₁)u(T₁)‖_{H¹} / ‖U(−T₁)u(T₁)‖_{H¹}.
///
/// The discrete free flow is an isometry of the discrete H¹ norm, so this
/// equals ‖u(T₂) − U(T₂−T₁)u(T₁)‖/‖u(T₁)‖ and only the gap is propagated.
pub fn free_profile_cauchy(sys: &System, a: &State, b: &State, dt: f64) -> Result<f64> {
    let gap = b.t - a.t;
    if !(gap > 0.0) {
        return Err(Error::Precondition("checkpoints must be increasing in time".into()));
    }
    let steps = (gap / dt).round().max(1.0) as usize;
    let h = gap / steps as f64;
    let prop = Propagator::new(sys, &a.field.grid, h);
    let mut v = a.field.clone();
    for _ in 0..steps {
        prop.apply(&mut v);
    }
    let diff = Field {
        grid: v.grid,
        comps: v.comps.iter().zip(&b.field.comps).map(|(x, y)| x.iter().zip(y).map(|(p, q)| q - p).collect()).collect(),
    };
    let base = h1_norm(&a.field);
    Ok(if base > 0.0 { h1_norm(&diff) / base } else { h1_norm(&diff) })
}

fn window_norms(series: &TimeSeries, len: f64) -> Vec<f64> {
    let t = series.times();
    let y: Vec<f64> = series.rows.iter().map(|r| r.l3norm.powi(6)).collect();
    let t0 = t[0];
    let count = (((t[t.len() - 1] - t0) / len) * (1.0 + 1e-12)).floor() as usize;
    let mut out = vec![0.0; count];
    for i in 1..t.len() {
        let mid = 0.5 * (t[i] + t[i - 1]) - t0;
        let w = (mid / len).floor() as usize;
        if w < count {
            out[w] += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
    }
    out.into_iter().map(|s| s.powf(1.0 / 6.0)).collect()
}

/// Three-gate evidence: (a) L⁶_t L³_x window norms strictly decreasing with
/// last/first ≤ `decay_ratio`; (b) sup K bounded by `kinetic_factor` times
/// its first-quarter sup; (c) free-profile Cauchy test between the last two
/// checkpoints.
pub fn scattering_monitor(sys: &System, series: &TimeSeries, checkpoints: &[State], dt: f64, opts: &ScatteringOptions) -> Result<ScatteringEvidence> {
    if series.rows.len() < 2 {
        return Err(Error::InsufficientRunLength("fewer than two samples".into()));
    }
    let norms = window_norms(series, opts.window_len);
    if norms.len() < 3 {
        return Err(Error::InsufficientRunLength(format!("{} complete window(s) of length {}, need 3", norms.len(), opts.window_len)));
    }
    if checkpoints.len() < 2 {
        return Err(Error::InsufficientRunLength("need two checkpoints for the free-profile test".into()));
    }
    let decreasing = norms.windows(2).all(|w| w[1] < w[0]);
    let window_ratio = norms[norms.len() - 1] / norms[0];
    let gate_a = decreasing && window_ratio <= opts.decay_ratio;

    let t = series.times();
    let quarter = t[0] + 0.25 * (t[t.len() - 1] - t[0]);
    let sup_all = series.rows.iter().map(|r| r.k).fold(0.0, f64::max);
    let sup_q = series.rows.iter().filter(|r| r.t <= quarter).map(|r| r.k).fold(0.0, f64::max);
    let kinetic_ratio = sup_all / sup_q;
    let gate_b = kinetic_ratio <= opts.kinetic_factor;

    let n = checkpoints.len();
    let cauchy_ratio = free_profile_cauchy(sys, &checkpoints[n - 2], &checkpoints[n - 1], dt)?;
    let gate_c = cauchy_ratio <= opts.cauchy_tol;
    Ok(ScatteringEvidence { window_norms: norms, window_ratio, gate_a, kinetic_ratio, gate_b, cauchy_ratio, gate_c })
}

/// Keeps the state at the first monitor row at or after each target time.
#[derive(Clone, Debug, Default)]
pub struct CheckpointRecorder {
    pub targets: Vec<f64>,
    pub states: Vec<State>,
}

impl CheckpointRecorder {
    pub fn new(targets: Vec<f64>) -> Self {
        CheckpointRecorder { targets, states: Vec::new() }
    }
}

impl Monitor for CheckpointRecorder {
    fn observe(&mut self, _sys: &System, state: &State, _row: &mut SeriesRow) -> Result<()> {
        if let Some(&next) = self.targets.get(self.states.len()) {
            if state.t >= next - 1e-9 {
                self.states.push(state.clone());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    ScatterLikely,
    BlowUpDetected,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub evidence: BTreeMap<String, f64>,
}

/// Everything measured by [`run_experiment`].
#[derive(Debug)]
pub struct Experiment {
    pub report: ThresholdReport,
    pub verdict: Verdict,
    pub coercivity: Option<CoercivityReport>,
    pub scattering: Option<ScatteringEvidence>,
    pub run: Run,
}

/// Classifies u₀, evolves to `t_end` and judges the run. A blow-up abort is
/// a verdict, not an error.
pub fn run_experiment(
    sys: &System,
    gs: &GroundState,
    u0: &Field,
    t_end: f64,
    cfg: &IntegratorConfig,
    opts: &ScatteringOptions,
    extra: &mut [&mut dyn Monitor],
) -> Result<Experiment> {
    let report = classify(sys, u0, gs)?;
    let targets = vec![0.5 * t_end, 0.75 * t_end, t_end];
    let mut cps = CheckpointRecorder::new(targets);
    let mut ev = BTreeMap::new();
    ev.insert("QE".to_string(), report.qe);
    ev.insert("QK".to_string(), report.qk);
    let outcome = {
        let mut mons: Vec<&mut dyn Monitor> = Vec::with_capacity(extra.len() + 1);
        mons.push(&mut cps);
        for m in extra.iter_mut() {
            mons.push(&mut **m);
        }
        evolve_to(sys, State::new(u0.clone()), t_end, cfg, &mut mons)
    };
    let run = match outcome {
        Ok(r) => r,
        Err(Error::BlowUpSuspected(run)) => {
            ev.insert("blowupTime".into(), run.blowup_time.unwrap_or(f64::NAN));
            let verdict = Verdict { kind: VerdictKind::BlowUpDetected, evidence: ev };
            return Ok(Experiment { report, verdict, coercivity: None, scattering: None, run: *run });
        }
        Err(e) => return Err(e),
    };
    let coercivity = if report.below_energy && report.below_kinetic { Some(coercivity_monitor(&run.series, gs)?) } else { None };
    if let Some(c) = &coercivity {
        ev.insert("maxMarginRatio".into(), c.max_ratio);
    }
    let scattering = scattering_monitor(sys, &run.series, &cps.states, cfg.dt, opts)?;
    ev.insert("windowRatio".into(), scattering.window_ratio);
    ev.insert("kineticRatio".into(), scattering.kinetic_ratio);
    ev.insert("cauchyRatio".into(), scattering.cauchy_ratio);
    for (k, v) in [("gateA", scattering.gate_a), ("gateB", scattering.gate_b), ("gateC", scattering.gate_c)] {
        ev.insert(k.into(), v as u8 as f64);
    }
    let kind = if scattering.all() { VerdictKind::ScatterLikely } else { VerdictKind::Inconclusive };
    Ok(Experiment { report, verdict: Verdict { kind, evidence: ev }, coercivity, scattering: Some(scattering), run })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub deficit: f64,
    #[serde(rename = "QE")]
    pub qe: f64,
    #[serde(rename = "QEstar")]
    pub qe_star: f64,
    #[serde(rename = "QK")]
    pub qk: f64,
    #[serde(rename = "QKstar")]
    pub qk_star: f64,
    pub verdict: VerdictKind,
    /// 1 − max_t Q(u₀)K(u(t))/(Q(ψ)K(ψ)); NaN when not below threshold
    #[serde(rename = "minMargin")]
    pub min_margin: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "kappa,deficit,QE,QEstar,QK,QKstar,verdict,minMargin";

    pub fn to_csv(&self) -> String {
        use crate::util::fmt17;
        format!(
            "{},{},{},{},{},{},{:?},{}",
            fmt17(self.kappa),
            fmt17(self.deficit),
            fmt17(self.qe),
            fmt17(self.qe_star),
            fmt17(self.qk),
            fmt17(self.qk_star),
            self.verdict,
            fmt17(self.min_margin)
        )
    }
}

/// Sweep inputs shared by every κ.
#[derive(Clone, Debug)]
pub struct SweepSetup {
    pub grid: GridDesc,
    pub amplitude: f64,
    pub t_end: f64,
    pub cfg: IntegratorConfig,
    pub opts: ScatteringOptions,
    pub jobs: Option<usize>,
}

/// For each κ: γ = (γ₁, κ), ground state recomputed on the sweep grid,
/// u₀ = amplitude·ψ, then classify, evolve and judge.
pub fn resonance_sweep(base: &System, kappas: &[f64], setup: &SweepSetup) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    if base.l() != 2 {
        return Err(Error::Precondition("the κ sweep varies γ₂ of a two-component system".into()));
    }
    let one = |kappa: f64| -> Result<SweepRow> {
        let sys = base.with_gamma(vec![base.gamma()[0], kappa])?;
        let gs = petviashvili(&sys, 1.0, setup.grid, None, &PetviashviliOptions::default())?;
        let u0 = gs.profiles.scaled(setup.amplitude);
        let ex = run_experiment(&sys, &gs, &u0, setup.t_end, &setup.cfg, &setup.opts, &mut [])?;
        Ok(SweepRow {
            kappa,
            deficit: ex.report.resonance_deficit,
            qe: ex.report.qe,
            qe_star: ex.report.qe_star,
            qk: ex.report.qk,
            qk_star: ex.report.qk_star,
            verdict: ex.verdict.kind,
            min_margin: ex.coercivity.map_or(f64::NAN, |c| c.min_slack),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(crate::util::worker_count(setup.jobs))
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {}", e)))?;
    pool.install(|| kappas.par_iter().map(|&k| one(k)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use std::sync::OnceLock;

    fn half() -> &'static (System, GroundState) {
        static S: OnceLock<(System, GroundState)> = OnceLock::new();
        S.get_or_init(|| {
            let sys = System::canonical(0.5);
            let grid = GridDesc::radial(5, 1500, 30.0).unwrap();
            let gs = petviashvili(&sys, 1.0, grid, None, &PetviashviliOptions::default()).unwrap();
            (sys, gs)
        })
    }

    #[test]
    fn threshold_scaling() {
        let (sys, gs) = half();
        let at = classify(sys, &gs.profiles, gs).unwrap();
        assert!(at.at_kinetic_threshold && !at.below_kinetic && at.qk == at.qk_star);
        assert!(at.resonance_deficit < 1e-15);
        let base = functionals(sys, &gs.profiles);
        let mut r = crate::util::rng(4);
        for _ in 0..20 {
            let c: f64 = rand::Rng::gen_range(&mut r, 0.1..2.0);
            let rep = classify(sys, &gs.profiles.scaled(c), gs).unwrap();
            let qe = c.powi(2) * base.q * (c.powi(2) * base.k - 2.0 * c.powi(3) * base.p);
            assert!((rep.qe - qe).abs() <= 1e-12 * qe.abs().max(rep.qk));
            assert!((rep.qk - c.powi(4) * base.q * base.k).abs() <= 1e-12 * rep.qk);
            assert_eq!(rep.below_kinetic, c < 1.0);
        }
    }

    #[test]
    fn negative_energy_is_below_energy_threshold() {
        let (sys, gs) = half();
        let rep = classify(sys, &gs.profiles.scaled(1.5), gs).unwrap();
        assert!(rep.qe < 0.0 && rep.below_energy && !rep.below_kinetic);
    }

    #[test]
    fn rejects_other_frequency() {
        let (sys, _) = half();
        let g = GridDesc::radial(5, 800, 40.0).unwrap();
        let gs2 = petviashvili(sys, 0.5, g, None, &PetviashviliOptions::default()).unwrap();
        assert!(classify(sys, &gs2.profiles, &gs2).is_err());
    }

    #[test]
    fn window_norms_and_short_runs() {
        let mut s = TimeSeries::default();
        for i in 0..=40 {
            let t = i as f64 * 0.25;
            let row = SeriesRow { t, q: 1.0, ebeta: 0.0, k: 1.0, p: 0.0, l3norm: 1.0, boundary_mass: 0.0, extras: BTreeMap::new() };
            s.push(row).unwrap();
        }
        let w = window_norms(&s, 2.5);
        assert_eq!(w.len(), 4);
        assert!(w.iter().all(|v| (v - 2.5f64.powf(1.0 / 6.0)).abs() < 1e-12));
        let sys = System::canonical(0.5);
        let st = State::new(Field::zeros(GridDesc::radial(5, 50, 5.0).unwrap(), 2));
        let opts = ScatteringOptions { window_len: 5.0, ..Default::default() };
        let e = scattering_monitor(&sys, &s, &[st.clone(), st], 1e-2, &opts);
        assert!(matches!(e, Err(Error::InsufficientRunLength(_))));
    }

    #[test]
    fn free_small_data_passes_all_gates() {
        // F = 0 is excluded by the hypotheses; tiny data is effectively free
        let sys = System::canonical(0.5);
        let grid = GridDesc::radial(5, 2000, 100.0).unwrap();
        let u0 = Field::from_fn(grid, 2, |k, r| C64::new(0.01 * (-r * r / (2.0 + k as f64)).exp(), 0.0));
        let cfg = IntegratorConfig { dt: 0.01, ..Default::default() };
        let mut cps = CheckpointRecorder::new(vec![7.5, 10.0]);
        let run = evolve_to(&sys, State::new(u0), 10.0, &cfg, &mut [&mut cps]).unwrap();
        let opts = ScatteringOptions { window_len: 2.5, ..Default::default() };
        let ev = scattering_monitor(&sys, &run.series, &cps.states, cfg.dt, &opts).unwrap();
        assert!(ev.all(), "{:?}", ev);
        assert!(ev.cauchy_ratio < 1e-3);
        let (_, gs) = half();
        let tiny = Field::from_fn(grid, 2, |k, r| C64::new(1e-10 * (-r * r / (2.0 + k as f64)).exp(), 0.0));
        let run = evolve_to(&sys, State::new(tiny), 2.0, &cfg, &mut []).unwrap();
        let c = coercivity_monitor(&run.series, gs).unwrap();
        let spread = c.margins.iter().map(|m| m.1).fold(0.0, f64::max) - c.margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        assert!(c.holds && spread <= 1e-8 * c.max_ratio.max(1e-300) + 1e-20);
    }
}
