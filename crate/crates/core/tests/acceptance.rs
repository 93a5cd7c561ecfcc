//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qnls_core::dichotomy::{run_experiment, schedule, Experiment, ScatteringOptions, VerdictKind};
use qnls_core::evolve::{dispersive_decay_check, evolve_to, free_propagate, IntegratorConfig, Run, State};
use qnls_core::grid::{self, Field, GridDesc};
use qnls_core::groundstate::{
    default_grid, gni_ratio, gni_test, optimal_constant, petviashvili, pohozaev_check, random_trial_fields, shooting_oracle, GroundState,
    PetviashviliOptions,
};
use qnls_core::morawetz::{
    build_cutoffs, identity_suite, morawetz_average, morawetz_sup_over_r, virial_identity_check, MorawetzRecorder, SuiteOptions, VirialRecorder,
};
use qnls_core::nonlin::{check_hypotheses, check_mass_resonance, derive_fk, parse_potential, ComplexPolynomial, HypothesisStatus, System, SystemSpec};
use qnls_core::{Result, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn report(id: u32, title: &str, limit: Duration, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let res = f();
    let el = start.elapsed();
    let (pass, detail) = match res {
        Ok(o) => (o.pass && el < limit, o.detail),
        Err(e) => (false, format!("error: {}", e)),
    };
    println!(
        "criterion {:>2}: {} | {} | {} | {:.1} s (limit {} s)",
        id,
        if pass { "PASS" } else { "FAIL" },
        title,
        detail,
        el.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn free_system() -> System {
    let mut spec = SystemSpec::canonical(0.5);
    spec.potential = ComplexPolynomial::zero(2);
    spec.sigma = None;
    System::new(spec).expect("free system")
}

fn gaussian(grid: GridDesc) -> Field {
    Field::from_fn(grid, 2, |_, x| C64::new((-x * x / 2.0).exp(), 0.0))
}

fn ground(sys: &System, omega: f64, grid: GridDesc) -> Result<GroundState> {
    petviashvili(sys, omega, grid, None, &PetviashviliOptions::default())
}

fn criterion1() -> Result<Outcome> {
    let spec = SystemSpec::canonical(0.5);
    let fk = derive_fk(&spec);
    let want = [parse_potential("2*conj(z1)*z2", 2)?, parse_potential("z1^2", 2)?];
    let exact = fk.len() == 2 && fk[0] == want[0] && fk[1] == want[1];
    let rep = check_hypotheses(&spec, 10_000, 0);
    let status_ok = (1..=8).all(|h| {
        let want = if h <= 5 { HypothesisStatus::Verified } else { HypothesisStatus::VerifiedSampled };
        rep.get(&format!("H{}", h)).map_or(false, |e| e.status == want)
    });
    let sigma_ok = rep.sigma.as_deref() == Some(&[1.0, 2.0][..]);
    let iff = [0.25, 0.45, 0.49, 0.499, 0.501, 0.51, 0.55, 1.0, 2.0].iter().all(|&k| !check_mass_resonance(&SystemSpec::canonical(k)))
        && check_mass_resonance(&spec)
        && rep.mass_resonant;
    outcome(
        exact && status_ok && sigma_ok && iff,
        format!("f = ({}, {}), sigma = {:?}, H1-H5 Verified and H6-H8 VerifiedSampled: {}, resonance only at 1/2: {}", fk[0], fk[1], rep.sigma, status_ok, iff),
    )
}

fn criterion2() -> Result<Outcome> {
    let sys = free_system();
    let g = GridDesc::cartesian1(2048, 60.0)?;
    let out = free_propagate(&sys, &State::new(gaussian(g)), 1.0);
    let w = C64::new(1.0, 2.0);
    let exact: Vec<C64> = g.nodes().iter().map(|&x| (-(x * x) / (2.0 * w)).exp() / w.sqrt()).collect();
    let diff: Vec<C64> = out.field.comps[0].iter().zip(&exact).map(|(a, b)| a - b).collect();
    let err = (grid::norm_sq(&g, &diff) / grid::norm_sq(&g, &exact)).sqrt();
    let times = [5.0, 10.0, 20.0, 40.0];
    let s1 = dispersive_decay_check(&sys, &gaussian(GridDesc::cartesian1(4096, 400.0)?), &times)?;
    let s5 = dispersive_decay_check(&sys, &gaussian(GridDesc::radial(5, 4000, 200.0)?), &times)?;
    outcome(
        err <= 1e-8 && (s1 + 0.5).abs() <= 0.05 && (s5 + 2.5).abs() <= 0.25,
        format!("closed-form L2 error {:.2e} (<= 1e-8), slopes {:.4} (1D) and {:.4} (n=5)", err, s1, s5),
    )
}

struct Conservation {
    csv: String,
    sys: System,
    u0: Field,
    cfg: IntegratorConfig,
}

fn conservation_run(sys: &System, u0: &Field, cfg: &IntegratorConfig) -> Result<Run> {
    evolve_to(sys, State::new(u0.clone()), 5.0, cfg, &mut [])
}

fn criterion3(keep: &mut Option<Conservation>) -> Result<Outcome> {
    let sys = System::canonical(0.5);
    let g = GridDesc::radial(5, 2048, 100.0)?;
    let gs = ground(&sys, 1.0, g)?;
    let u0 = gs.profiles.scaled(0.5);
    let coarse = IntegratorConfig { dt: 1e-3, ..Default::default() };
    let fine = IntegratorConfig { dt: 5e-4, monitor_stride: 2 * coarse.monitor_stride, ..Default::default() };
    let a = conservation_run(&sys, &u0, &coarse)?;
    let b = conservation_run(&sys, &u0, &fine)?;
    let dq = a.series.relative_drift(|r| r.q);
    let de = a.series.relative_drift(|r| r.ebeta);
    let de_half = b.series.relative_drift(|r| r.ebeta);
    let ratio = de / de_half;
    *keep = Some(Conservation { csv: a.series.to_csv(), sys, u0, cfg: coarse });
    outcome(
        dq <= 1e-8 && de <= 1e-6 && ratio >= 3.5,
        format!("Q drift {:.2e} (<= 1e-8), E_beta drift {:.3e} (<= 1e-6), halving dt reduces E_beta drift {:.2}x (>= 3.5)", dq, de, ratio),
    )
}

fn criterion4() -> Result<(Outcome, Option<(System, GroundState)>)> {
    let sys = System::canonical(0.5);
    let gs = ground(&sys, 1.0, default_grid())?;
    let [p, k, q] = pohozaev_check(&gs)?;
    let res = gs.elliptic_residual(&sys);
    let two = System::canonical(2.0);
    let gs2 = ground(&two, 1.0, default_grid())?;
    let phi = shooting_oracle(0.5, 1.0, 5)?.sample(&gs2.profiles.grid);
    let sup = phi.iter().cloned().fold(0.0, f64::max);
    let e1 = gs2.profiles.comps[0].iter().zip(&phi).map(|(z, p)| (z.re - p).abs()).fold(0.0, f64::max) / sup;
    let e2 = gs2.profiles.comps[1].iter().zip(&phi).map(|(z, p)| (z.re - p / 2.0).abs()).fold(0.0, f64::max) / (sup / 2.0);
    let ok = (p - 2.0).abs() <= 1e-3 && (k - 5.0).abs() <= 1e-3 && (q - 1.0).abs() <= 1e-3 && res <= 1e-8 && e1.max(e2) <= 1e-4;
    let o = Outcome {
        pass: ok,
        detail: format!(
            "(P/I, K/I, Q/I) = ({:.6}, {:.6}, {:.6}), elliptic residual {:.2e}, kappa = 2 vs shooting {:.2e}",
            p,
            k,
            q,
            res,
            e1.max(e2)
        ),
    };
    Ok((o, Some((sys, gs))))
}

fn criterion5(sys: &System, gs: &GroundState) -> Result<Outcome> {
    let oc = optimal_constant(gs)?;
    let at = gni_ratio(sys, gs, &gs.profiles)?;
    let trials = random_trial_fields(sys, gs.profiles.grid, 1000, 5);
    let worst = gni_test(sys, gs, &trials)?;
    outcome(
        oc.relative_gap <= 1e-3 && worst <= 1.0 + 1e-3 && (at - 1.0).abs() <= 1e-3,
        format!("constant formulas differ by {:.2e}, ratio at psi {:.6}, worst of 1000 random fields {:.6}", oc.relative_gap, at, worst),
    )
}

fn criterion6() -> Result<Outcome> {
    let rep = identity_suite(&System::canonical(0.5), &SuiteOptions::default())?;
    let failed: Vec<String> = rep.items.iter().filter(|i| !i.pass).map(|i| format!("{} = {:.2e}", i.name, i.value)).collect();
    let worst = rep.items.iter().filter(|i| !i.lower_bound).map(|i| i.value / i.tol).fold(0.0, f64::max);
    outcome(
        rep.passed(),
        if failed.is_empty() {
            format!("{} identities within tolerance, worst value/tolerance {:.2e}", rep.items.len(), worst)
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

fn criterion7() -> Result<Outcome> {
    let g = GridDesc::radial(5, 2048, 100.0)?;
    let cfg = IntegratorConfig { dt: 1e-3, monitor_stride: 10, ..Default::default() };
    let kappas = [0.45, 0.475, 0.5, 0.525, 0.55];
    let mut mags = Vec::new();
    let mut at_half = None;
    for &kappa in &kappas {
        let sys = System::canonical(kappa);
        let gs = ground(&sys, 1.0, g)?;
        let mut vr = VirialRecorder::default();
        evolve_to(&sys, State::new(gs.profiles.scaled(0.5)), 3.0, &cfg, &mut [&mut vr])?;
        let rep = virial_identity_check(5, &vr.samples, 1e-6)?;
        if kappa == 0.5 {
            at_half = Some(rep.clone());
        }
        mags.push(rep.resonance_max);
    }
    let half = at_half.expect("kappa = 1/2 is in the sweep");
    let ordered = mags[2] < mags[1] && mags[1] < mags[0] && mags[2] < mags[3] && mags[3] < mags[4];
    outcome(
        half.residual <= 1e-2 && half.resonance_relative <= 1e-10 && ordered,
        format!(
            "residual {:.2e} (<= 1e-2), resonance at 1/2 {:.2e} relative, max |resonance| over kappa {:?} = [{}]",
            half.residual,
            half.resonance_relative,
            kappas,
            mags.iter().map(|m| format!("{:.3e}", m)).collect::<Vec<_>>().join(", ")
        ),
    )
}

struct Dichotomy {
    sys: System,
    cfg: IntegratorConfig,
    scatter: Experiment,
    scatter_rec: MorawetzRecorder,
    standing_rec: MorawetzRecorder,
}

fn criterion8(keep: &mut Option<Dichotomy>) -> Result<Outcome> {
    let sys = System::canonical(0.5);
    let grid = GridDesc::radial(5, 4000, 200.0)?;
    let gs = ground(&sys, 1.0, grid)?;
    let radii = schedule(0.5)?.radii(17);
    let cfg = IntegratorConfig { dt: 1e-3, ..Default::default() };
    let opts = ScatteringOptions::default();

    let mut rec = MorawetzRecorder::new(0.2, radii.clone(), 0.1);
    let scatter = run_experiment(&sys, &gs, &gs.profiles.scaled(0.5), 20.0, &cfg, &opts, &mut [&mut rec])?;
    let sc = scatter.scattering.as_ref();
    let gates = sc.map_or(false, |s| s.gate_a && s.gate_b && s.gate_c);
    let margin = scatter.coercivity.as_ref().map_or(f64::INFINITY, |c| c.max_ratio);
    let scatter_ok = scatter.verdict.kind == VerdictKind::ScatterLikely && gates && margin < 1.0;

    let blow = run_experiment(&sys, &gs, &gs.profiles.scaled(1.5), 20.0, &cfg, &opts, &mut [])?;
    let tb = blow.verdict.evidence.get("blowupTime").copied().unwrap_or(f64::NAN);
    let blow_ok = blow.verdict.kind == VerdictKind::BlowUpDetected && tb < 20.0;

    // a broad ω = 0.02 standing wave stays put for the whole run
    let g2 = GridDesc::radial(5, 2000, 300.0)?;
    let slow = ground(&sys, 0.02, g2)?;
    let cfg2 = IntegratorConfig { dt: 1e-2, ..Default::default() };
    let mut rec2 = MorawetzRecorder::new(0.2, radii, 0.1);
    let standing = run_experiment(&sys, &gs, &slow.profiles, 40.0, &cfg2, &opts, &mut [&mut rec2])?;
    let gate_a = standing.scattering.as_ref().map(|s| s.gate_a);
    let standing_ok = standing.verdict.kind == VerdictKind::Inconclusive && gate_a == Some(false);

    let detail = format!(
        "0.5psi {:?} (gates {}, max margin ratio {:.4}), 1.5psi {:?} at t = {:.3}, standing wave {:?} (gate a {:?})",
        scatter.verdict.kind, gates, margin, blow.verdict.kind, tb, standing.verdict.kind, gate_a
    );
    *keep = Some(Dichotomy { sys, cfg, scatter, scatter_rec: rec, standing_rec: rec2 });
    outcome(scatter_ok && blow_ok && standing_ok, detail)
}

fn criterion9(d: Dichotomy) -> Result<Outcome> {
    let Dichotomy { sys, cfg, scatter, mut scatter_rec, standing_rec } = d;
    evolve_to(&sys, scatter.run.state, 40.0, &cfg, &mut [&mut scatter_rec])?;
    let (l10, l40) = (morawetz_average(&scatter_rec, 10.0)?, morawetz_average(&scatter_rec, 40.0)?);
    let (s10, s40) = (morawetz_average(&standing_rec, 10.0)?, morawetz_average(&standing_rec, 40.0)?);
    let standing_change = (s40 - s10).abs() / s10.abs();

    // two counter-propagating bumps on a periodic line
    let g = GridDesc::cartesian1(4096, 200.0)?;
    let u0 = Field::from_fn(g, 2, |k, x| {
        let a = sys.alpha()[k] / sys.gamma()[k];
        let amp = 0.3 * ((-(x + 80.0).powi(2) / 8.0).exp() + (-(x - 80.0).powi(2) / 8.0).exp());
        C64::from_polar(amp, -a * x.abs())
    });
    let cfg1 = IntegratorConfig { dt: 0.01, ..Default::default() };
    let mut states = vec![u0.clone()];
    let mut st = State::new(u0);
    for j in 1..=20 {
        st = evolve_to(&sys, st, 3.0 * j as f64, &cfg1, &mut [])?.state;
        states.push(st.field.clone());
    }
    let sups = morawetz_sup_over_r(&sys, &states, &build_cutoffs(0.2, 1.0, 5)?, &[4.0, 8.0, 16.0, 32.0])?;
    let spread = sups.iter().cloned().fold(0.0, f64::max) / sups.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        l40 < l10 && standing_change <= 0.1 && spread <= 2.0,
        format!(
            "scattering LHS(10) {:.4e} > LHS(40) {:.4e}, standing wave changes {:.2e} (<= 0.1), sup|M_R|/R spread {:.3} (<= 2)",
            l10, l40, standing_change, spread
        ),
    )
}

fn criterion10(c: &Conservation) -> Result<Outcome> {
    let again = conservation_run(&c.sys, &c.u0, &c.cfg)?.series.to_csv();
    outcome(again == c.csv, format!("series.csv {} bytes, identical on rerun: {}", c.csv.len(), again == c.csv))
}

fn main() -> ExitCode {
    let mut passed = Vec::new();
    passed.push(report(1, "nonlinearity and hypotheses", secs(1), criterion1));
    passed.push(report(2, "free propagator oracle", secs(30), criterion2));
    let mut cons = None;
    passed.push(report(3, "conservation", secs(120), || criterion3(&mut cons)));
    let mut gs = None;
    passed.push(report(4, "ground state", secs(60), || {
        let (o, g) = criterion4()?;
        gs = g;
        Ok(o)
    }));
    passed.push(report(5, "Gagliardo-Nirenberg constant", secs(60), || match &gs {
        Some((sys, g)) => criterion5(sys, g),
        None => outcome(false, "no ground state from criterion 4".into()),
    }));
    passed.push(report(6, "identity suite", secs(120), criterion6));
    passed.push(report(7, "virial identity", secs(180), criterion7));
    let mut dich = None;
    passed.push(report(8, "dichotomy", secs(600), || criterion8(&mut dich)));
    passed.push(report(9, "Morawetz average", secs(180), || match dich.take() {
        Some(d) => criterion9(d),
        None => outcome(false, "no runs from criterion 8".into()),
    }));
    passed.push(report(10, "determinism", secs(120), || match &cons {
        Some(c) => criterion10(c),
        None => outcome(false, "no run from criterion 3".into()),
    }));
    let n = passed.iter().filter(|&&p| p).count();
    println!("acceptance: {}/{} criteria passed", n, passed.len());
    if n == passed.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
