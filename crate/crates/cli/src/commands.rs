use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde_json::json;

use qnls_core::dichotomy::{self, resonance_sweep, run_experiment, SweepRow, SweepSetup, VerdictKind};
use qnls_core::evolve::{dispersive_decay_check, evolve_to, State};
use qnls_core::grid::snapshot::{read_snapshot, write_snapshot};
use qnls_core::grid::{Field, GridDesc};
use qnls_core::groundstate::{optimal_constant, petviashvili, pohozaev_check, PetviashviliOptions};
use qnls_core::morawetz::{identity_suite, morawetz_average, MorawetzRecorder, Schedule, SuiteOptions, VirialRecorder};
use qnls_core::rundir::{parse_config, LoadedConfig, RunDir};
use qnls_core::util::{fmt17, worker_count};
use qnls_core::Error;

use crate::{Cli, Command, Global};

const CANONICAL: &str = include_str!("../../../configs/canonical.json");

fn load(g: &Global) -> Result<LoadedConfig> {
    let mut cfg = match &g.config {
        Some(p) => qnls_core::rundir::load_config(p, g.force)?,
        None => parse_config(CANONICAL, Path::new("."), g.force)?,
    };
    if let Some(s) = g.seed {
        cfg.file.run.seed = s;
    }
    Ok(cfg)
}

fn start(g: &Global, cfg: &LoadedConfig, command: &str) -> Result<RunDir> {
    let dir = RunDir::create(&g.out)?;
    dir.write_json("config.json", &cfg.file)?;
    dir.write_json("manifest.json", &cfg.manifest(command, None)?)?;
    Ok(dir)
}

pub fn run(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let workers = worker_count(g.jobs);
    // a second initialisation (tests calling run twice) is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    match &cli.command {
        Command::Check => check(g),
        Command::GroundState { omega, points, r_max } => ground_state(g, *omega, *points, *r_max),
        Command::Evolve { t_end, dt } => evolve(g, *t_end, *dt),
        Command::Classify { initial, gs, t_end } => classify(g, initial.as_deref(), gs.as_deref(), *t_end),
        Command::Sweep { kappa_list, amplitude, t_end } => sweep(g, kappa_list, *amplitude, *t_end),
        Command::Identities => identities(g),
        Command::Morawetz { run } => morawetz(g, run),
        Command::Decay { times } => decay(g, times),
    }
}

fn check(g: &Global) -> Result<i32> {
    let cfg = load(g)?;
    let dir = RunDir::create(&g.out)?;
    let fk: Vec<String> = qnls_core::nonlin::derive_fk(&cfg.system.spec).iter().map(|p| p.to_string()).collect();
    dir.write_json("report.json", &json!({ "f": fk, "hypotheses": cfg.report, "warnings": cfg.warnings }))?;
    for (k, f) in fk.iter().enumerate() {
        println!("f{} = {}", k + 1, f);
    }
    for (name, e) in &cfg.report.hypotheses {
        println!("{}: {:?} ({})", name, e.status, e.evidence);
    }
    println!("sigma = {:?}, mass resonant: {}", cfg.system.sigma, cfg.report.mass_resonant);
    Ok(0)
}

fn profiles_csv(f: &Field) -> String {
    let mut s = String::from("r");
    for k in 0..f.l() {
        s.push_str(&format!(",psi{}", k + 1));
    }
    s.push('\n');
    for (j, x) in f.grid.nodes().iter().enumerate() {
        s.push_str(&fmt17(*x));
        for c in &f.comps {
            s.push(',');
            s.push_str(&fmt17(c[j].re));
        }
        s.push('\n');
    }
    s
}

fn ground_state(g: &Global, omega: f64, points: Option<usize>, r_max: Option<f64>) -> Result<i32> {
    let cfg = load(g)?;
    let grid = match cfg.file.grid {
        GridDesc::Radial { n, points: p, r_max: r } => GridDesc::radial(n, points.unwrap_or(p), r_max.unwrap_or(r))?,
        other => other,
    };
    let dir = start(g, &cfg, "ground-state")?;
    let gs = petviashvili(&cfg.system, omega, grid, None, &PetviashviliOptions::default())?;
    write_snapshot(&dir.snapshots(), "ground_state", &gs.profiles, 0.0)?;
    dir.write_text("profiles.csv", &profiles_csv(&gs.profiles))?;
    let pohozaev = pohozaev_check(&gs).ok();
    let oc = optimal_constant(&gs).ok();
    dir.write_json(
        "report.json",
        &json!({
            "omega": gs.omega, "I": gs.i, "Q": gs.q, "K": gs.k, "P": gs.p, "C5opt": gs.c5opt,
            "pohozaev": pohozaev, "optimalConstant": oc,
            "residual": gs.residual, "iterations": gs.iterations,
            "ellipticResidual": gs.elliptic_residual(&cfg.system),
        }),
    )?;
    println!("omega {} I {:.10e} K {:.10e} P {:.10e} residual {:.3e} after {} iterations", gs.omega, gs.i, gs.k, gs.p, gs.residual, gs.iterations);
    if let Some(p) = pohozaev {
        println!("P/I = {:.6}, K/I = {:.6}, Q/I = {:.6}", p[0], p[1], p[2]);
    }
    Ok(0)
}

fn evolve(g: &Global, t_end: Option<f64>, dt: Option<f64>) -> Result<i32> {
    let mut cfg = load(g)?;
    if let Some(t) = t_end {
        cfg.file.run.t_end = t;
    }
    if let Some(d) = dt {
        cfg.file.run.integrator.dt = d;
    }
    cfg.file.run.integrator.validate(&cfg.file.grid)?;
    let dir = start(g, &cfg, "evolve")?;
    let mut icfg = cfg.file.run.integrator.clone();
    if icfg.snapshot_stride > 0 {
        icfg.snapshot_dir = Some(dir.snapshots());
    }
    let u0 = cfg.initial_field()?;
    let mut vr = VirialRecorder::default();
    let run = match evolve_to(&cfg.system, State::new(u0), cfg.file.run.t_end, &icfg, &mut [&mut vr]) {
        Ok(r) => r,
        Err(Error::BlowUpSuspected(r)) => *r,
        Err(e) => return Err(e.into()),
    };
    dir.write_text("series.csv", &run.series.to_csv())?;
    dir.write_json(
        "report.json",
        &json!({
            "steps": run.steps,
            "finalTime": run.state.t,
            "driftQ": run.series.relative_drift(|r| r.q),
            "driftEbeta": run.series.relative_drift(|r| r.ebeta),
            "blowupTime": run.blowup_time,
            "blowupReason": run.blowup_reason,
            "warnings": run.warnings,
            "snapshots": run.snapshots.len(),
        }),
    )?;
    match run.blowup_time {
        Some(t) => println!("blow-up suspected at t = {}", t),
        None => println!("reached t = {} in {} steps", run.state.t, run.steps),
    }
    Ok(0)
}

fn ground_state_for(cfg: &LoadedConfig, guess_dir: Option<&Path>) -> Result<qnls_core::groundstate::GroundState> {
    let guess = match guess_dir {
        Some(d) => {
            let (f, _) = read_snapshot(&d.join("snapshots").join("ground_state.bin")).with_context(|| format!("reading ground state from {}", d.display()))?;
            if f.grid == cfg.file.grid {
                Some(f)
            } else {
                log::warn!("stored ground state lives on another grid; recomputing from scratch");
                None
            }
        }
        None => None,
    };
    Ok(petviashvili(&cfg.system, 1.0, cfg.file.grid, guess.as_ref(), &PetviashviliOptions::default())?)
}

fn classify(g: &Global, initial: Option<&str>, gs_dir: Option<&Path>, t_end: Option<f64>) -> Result<i32> {
    let mut cfg = load(g)?;
    if let Some(t) = t_end {
        cfg.file.run.t_end = t;
    }
    let dir = start(g, &cfg, "classify")?;
    let gs = ground_state_for(&cfg, gs_dir)?;
    let u0 = match initial {
        Some(s) if s.starts_with("scale:") => {
            let c: f64 = s["scale:".len()..].trim().parse().context("scale directive needs a number")?;
            gs.profiles.scaled(c)
        }
        Some(p) => {
            let (f, _) = read_snapshot(Path::new(p))?;
            f
        }
        None => cfg.initial_field()?,
    };
    let ex = run_experiment(&cfg.system, &gs, &u0, cfg.file.run.t_end, &cfg.file.run.integrator, &cfg.file.scattering, &mut [])?;
    dir.write_text("series.csv", &ex.run.series.to_csv())?;
    dir.write_json(
        "report.json",
        &json!({
            "threshold": ex.report,
            "verdict": ex.verdict,
            "coercivity": ex.coercivity.as_ref().map(|c| json!({"maxRatio": c.max_ratio, "minSlack": c.min_slack, "holds": c.holds})),
            "scattering": ex.scattering,
        }),
    )?;
    println!("QE {:.6e} / {:.6e}, QK {:.6e} / {:.6e}", ex.report.qe, ex.report.qe_star, ex.report.qk, ex.report.qk_star);
    println!("verdict: {:?}", ex.verdict.kind);
    Ok(if ex.verdict.kind == VerdictKind::BlowUpDetected { 4 } else { 0 })
}

fn sweep(g: &Global, kappas: &[f64], amplitude: f64, t_end: Option<f64>) -> Result<i32> {
    let cfg = load(g)?;
    let dir = start(g, &cfg, "sweep")?;
    let setup = SweepSetup {
        grid: cfg.file.grid,
        amplitude,
        t_end: t_end.unwrap_or(cfg.file.run.t_end),
        cfg: cfg.file.run.integrator.clone(),
        opts: cfg.file.scattering.clone(),
        jobs: g.jobs,
    };
    let rows = resonance_sweep(&cfg.system, kappas, &setup)?;
    let mut csv = String::from(SweepRow::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
        println!("kappa {} deficit {:.4} verdict {:?}", r.kappa, r.deficit, r.verdict);
    }
    dir.write_text("sweep.csv", &csv)?;
    dir.write_json("report.json", &rows)?;
    Ok(0)
}

fn identities(g: &Global) -> Result<i32> {
    let cfg = load(g)?;
    let dir = start(g, &cfg, "identities")?;
    let opts = SuiteOptions { seed: cfg.file.run.seed, ..Default::default() };
    let rep = identity_suite(&cfg.system, &opts)?;
    dir.write_json("report.json", &rep)?;
    for it in &rep.items {
        let rel = if it.lower_bound { ">=" } else { "<=" };
        println!("{:<6} {:<40} {:.3e} {} {:.1e}", if it.pass { "ok" } else { "FAIL" }, it.name, it.value, rel, it.tol);
    }
    if !rep.passed() {
        let bad: Vec<&str> = rep.items.iter().filter(|i| !i.pass).map(|i| i.name.as_str()).collect();
        return Err(Error::IdentityFailure(bad.join(", ")).into());
    }
    Ok(0)
}

fn sorted_snapshots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("no snapshots in {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |x| x == "bin"))
        .collect();
    v.sort();
    Ok(v)
}

fn morawetz(g: &Global, run: &Path) -> Result<i32> {
    let src = RunDir { path: run.to_path_buf() };
    let text = fs::read_to_string(src.file("config.json")).with_context(|| format!("{} is not a run directory", run.display()))?;
    let cfg = parse_config(&text, run, g.force)?;
    let m = &cfg.file.morawetz;
    let base = dichotomy::schedule(m.eps_morawetz)?;
    let t0s: Vec<f64> = if m.t0.is_empty() { vec![base.t0] } else { m.t0.clone() };
    let sched = if m.t0.is_empty() { base.clone() } else { Schedule { verbatim: false, warning: None, ..base.clone() } };
    let snaps = sorted_snapshots(&src.snapshots())?;
    if snaps.len() < 2 {
        bail!("run directory {} holds fewer than two snapshots", run.display());
    }
    let mut rec = MorawetzRecorder::new(m.eps_chi, sched.radii(m.radii), m.interval);
    for p in &snaps {
        let (field, t) = read_snapshot(p)?;
        let st = State { field, t };
        if rec.times.last().map_or(true, |&last| t > last) {
            rec.record(&cfg.system, &st)?;
        }
    }
    let mut csv = String::from("t,R,mass,momentum,kinetic,kineticBoosted,xi0\n");
    for (t, r, w) in rec.rows() {
        csv.push_str(&[t, r, w.mass, w.momentum, w.kinetic, w.kinetic_boosted, w.xi0].iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(","));
        csv.push('\n');
    }
    let dir = RunDir::create(&g.out)?;
    dir.write_text("morawetz.csv", &csv)?;
    let mut lhs = Vec::new();
    for &t0 in &t0s {
        let v = morawetz_average(&rec, t0)?;
        println!("T0 = {}: LHS = {:.6e}", t0, v);
        lhs.push(json!({"T0": t0, "LHS": v}));
    }
    dir.write_json("report.json", &json!({"schedule": sched, "averages": lhs, "samples": rec.times.len()}))?;
    Ok(0)
}

fn decay(g: &Global, times: &[f64]) -> Result<i32> {
    let cfg = load(g)?;
    let dir = start(g, &cfg, "decay")?;
    let grid = cfg.file.grid;
    let u0 = Field::from_fn(grid, cfg.system.l(), |_, x| qnls_core::C64::new((-x * x / 2.0).exp(), 0.0));
    let slope = dispersive_decay_check(&cfg.system, &u0, times)?;
    let expected = -(grid.dim() as f64) / 2.0;
    dir.write_json("report.json", &json!({"times": times, "slope": slope, "expected": expected}))?;
    println!("decay slope {:.4} (free-flow rate {})", slope, expected);
    Ok(0)
}
