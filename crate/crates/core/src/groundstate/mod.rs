//! Ground states of the elliptic system −γ_k Δψ_k + c_k ψ_k = f_k(ψ),
//! the conserved functionals, and the sharp Gagliardo–Nirenberg constant.

mod functionals;
mod petviashvili;
mod shooting;

pub use functionals::{functionals, FunctionalValues};
#[allow(unused_imports)]
pub(crate) use functionals::{functionals_with_weights, norms, Norms};
pub use petviashvili::{gaussian_guess, general_constant, linear_coefficients, petviashvili, GroundState, PetviashviliOptions};
pub use shooting::{shooting_oracle, ShootingProfile};

use rand::Rng;
use serde::Serialize;

use crate::grid::{Field, GridDesc};
use crate::nonlin::System;
use crate::{Error, Result, C64};

/// Grid used for ground-state computations unless the caller supplies one.
pub fn default_grid() -> GridDesc {
    GridDesc::radial(5, 8000, 30.0).expect("valid grid")
}

/// (P/I, K/I, 𝓠/I); at n = 5 these are (2, 5, 1) for a ground state.
pub fn pohozaev_check(gs: &GroundState) -> Result<[f64; 3]> {
    if gs.profiles.grid.dim() != 5 {
        return Err(Error::UnsupportedGeometry("Pohozaev ratios are stated for n = 5".into()));
    }
    Ok([gs.p / gs.i, gs.k / gs.i, gs.qcal / gs.i])
}

/// Same ratios for an arbitrary field, with c_k taken from `gs`.
pub fn pohozaev_ratios_of(sys: &System, gs: &GroundState, u: &Field) -> [f64; 3] {
    let fv = functionals(sys, u);
    let q = gs.qcal_of(u);
    let i = 0.5 * (fv.k + q) - fv.p;
    [fv.p / i, fv.k / i, q / i]
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OptimalConstant {
    /// 2 (6−n)^{(n−4)/4} n^{−n/4} 𝓠^{−1/2}
    pub general: f64,
    /// (2/5)(𝓠K)^{−1/4}
    pub five_dim: f64,
    pub relative_gap: f64,
}

pub fn optimal_constant(gs: &GroundState) -> Result<OptimalConstant> {
    if gs.profiles.grid.dim() != 5 {
        return Err(Error::UnsupportedGeometry("optimal constant comparison needs n = 5".into()));
    }
    Ok(optimal_constant_from(gs.qcal, gs.k))
}

pub fn optimal_constant_from(qcal: f64, k: f64) -> OptimalConstant {
    let general = general_constant(5.0, qcal);
    let five_dim = 0.4 * (qcal * k).powf(-0.25);
    OptimalConstant { general, five_dim, relative_gap: (general - five_dim).abs() / general.abs() }
}

/// P(u) / (C 𝓠(u)^{(6−n)/4} K(u)^{n/4}) for one field.
pub fn gni_ratio(sys: &System, gs: &GroundState, u: &Field) -> Result<f64> {
    let fv = functionals(sys, u);
    if !(fv.p > 0.0) {
        return Err(Error::Precondition(format!("trial field has P = {:e} ≤ 0", fv.p)));
    }
    let n = u.grid.dim() as f64;
    let q = gs.qcal_of(u);
    Ok(fv.p / (gs.c5opt * q.powf((6.0 - n) / 4.0) * fv.k.powf(n / 4.0)))
}

/// Worst ratio over the trial fields.
pub fn gni_test(sys: &System, gs: &GroundState, trials: &[Field]) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for u in trials {
        worst = worst.max(gni_ratio(sys, gs, u)?);
    }
    Ok(worst)
}

/// Random smooth radial fields: sums of up to three Gaussian shells per
/// component with random phases, rejected until P > 0.
pub fn random_trial_fields(sys: &System, grid: GridDesc, count: usize, seed: u64) -> Vec<Field> {
    let mut rng = crate::util::rng(seed);
    let l = sys.l();
    let ext = grid.extent();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut bumps = Vec::new();
        for k in 0..l {
            let m = rng.gen_range(1..=3);
            for _ in 0..m {
                let amp = rng.gen_range(0.1..3.0);
                let centre = rng.gen_range(0.0..(ext / 4.0));
                let width = rng.gen_range(0.5..(ext / 6.0).max(1.0));
                let phase = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-1.0..1.0) };
                bumps.push((k, amp, centre, width, phase));
            }
        }
        let f = Field::from_fn(grid, l, |k, r| {
            bumps
                .iter()
                .filter(|b| b.0 == k)
                .map(|&(_, a, c, w, ph)| C64::from_polar(a * (-((r - c) / w).powi(2)).exp(), ph))
                .sum()
        });
        if functionals(sys, &f).p > 0.0 {
            out.push(f);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn gs_grid() -> GridDesc {
        default_grid()
    }

    fn half() -> &'static (System, GroundState) {
        static S: OnceLock<(System, GroundState)> = OnceLock::new();
        S.get_or_init(|| {
            let sys = System::canonical(0.5);
            let gs = petviashvili(&sys, 1.0, gs_grid(), None, &PetviashviliOptions::default()).unwrap();
            (sys, gs)
        })
    }

    #[test]
    fn converges_with_unit_stabilizer() {
        let (sys, gs) = half();
        assert!(gs.residual < 1e-10, "residual {:e}", gs.residual);
        assert!((gs.stabilizer - 1.0).abs() <= 1e-10);
        assert!(gs.elliptic_residual(sys) < 1e-8);
        assert!(gs.profiles.comps.iter().all(|c| c.iter().all(|z| z.re >= 0.0 && z.im == 0.0)));
    }

    #[test]
    fn pohozaev_for_mass_resonant_state() {
        let (_, gs) = half();
        let [a, b, c] = pohozaev_check(gs).unwrap();
        assert!((a - 2.0).abs() < 1e-3 && (b - 5.0).abs() < 1e-3 && (c - 1.0).abs() < 1e-3, "{} {} {}", a, b, c);
        let oc = optimal_constant(gs).unwrap();
        assert!(oc.relative_gap <= 1e-3);
    }

    #[test]
    fn scaled_state_breaks_pohozaev() {
        let (sys, gs) = half();
        let r = pohozaev_ratios_of(sys, gs, &gs.profiles.scaled(1.3));
        assert!((r[0] - 2.0).abs() > 0.1);
    }

    #[test]
    fn restart_from_solution_is_immediate() {
        let (sys, gs) = half();
        let again = petviashvili(sys, 1.0, gs_grid(), Some(&gs.profiles), &PetviashviliOptions::default()).unwrap();
        assert!(again.iterations <= 2, "{} iterations", again.iterations);
    }

    #[test]
    fn nonpositive_coefficients_rejected() {
        let sys = System::canonical(0.5);
        let e = petviashvili(&sys, -1.0, gs_grid(), None, &PetviashviliOptions::default());
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn two_kappa_reduces_to_scalar_profile() {
        let sys = System::canonical(2.0);
        let gs = petviashvili(&sys, 1.0, gs_grid(), None, &PetviashviliOptions::default()).unwrap();
        let oracle = shooting_oracle(0.5, 1.0, 5).unwrap();
        let phi = oracle.sample(&gs.profiles.grid);
        let sup = phi.iter().cloned().fold(0.0, f64::max);
        let e1 = gs.profiles.comps[0].iter().zip(&phi).map(|(z, p)| (z.re - p).abs()).fold(0.0, f64::max);
        let e2 = gs.profiles.comps[1].iter().zip(&phi).map(|(z, p)| (z.re - p / 2.0).abs()).fold(0.0, f64::max);
        assert!(e1 / sup <= 1e-4 && e2 / (sup / 2.0) <= 1e-4, "{:e} {:e}", e1 / sup, e2 / sup);
        let [a, b, c] = pohozaev_check(&gs).unwrap();
        assert!((a - 2.0).abs() < 1e-3 && (b - 5.0).abs() < 1e-3 && (c - 1.0).abs() < 1e-3);
    }

    #[test]
    fn constant_formulas() {
        // K = 5𝓠 makes both expressions equal
        let oc = optimal_constant_from(3.0, 15.0);
        assert!(oc.relative_gap < 1e-15);
        let a = optimal_constant_from(2.0, 10.0);
        let b = optimal_constant_from(8.0, 40.0);
        assert!((b.general / a.general - 0.5).abs() < 1e-14);
        assert!((b.five_dim / a.five_dim - 0.5).abs() < 1e-14);
    }

    #[test]
    fn gni_sweep() {
        let (sys, gs) = half();
        let at = gni_ratio(sys, gs, &gs.profiles).unwrap();
        assert!((at - 1.0).abs() <= 1e-3, "ratio at ψ {}", at);
        for c in [0.3, 2.0, 7.0] {
            let r = gni_ratio(sys, gs, &gs.profiles.scaled(c)).unwrap();
            assert!((r - at).abs() < 1e-12);
        }
        let trials = random_trial_fields(sys, gs.profiles.grid, 200, 7);
        let worst = gni_test(sys, gs, &trials).unwrap();
        assert!(worst <= 1.0 + 1e-3, "worst {}", worst);
    }
}
