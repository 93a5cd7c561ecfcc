//! The full identity suite as one report.

use rand::Rng;
use serde::Serialize;

use crate::grid::{Field, GridDesc};
use crate::nonlin::System;
use crate::{Result, C64};

use super::average::windowed_coercivity;
use super::cutoff::{build_cutoffs, cutoff_property_suite, CutoffReport};
use super::density::{boost_quantum, densities, gauge_transform, windowed, xi0, Window};
use super::interaction::{angular_identity_check, claim1_sign_check, claim2_invariance_check};

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteItem {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    /// true when the value must be at least `tol` rather than at most
    pub lower_bound: bool,
    pub pass: bool,
}

impl SuiteItem {
    fn at_most(name: &str, value: f64, tol: f64) -> Self {
        SuiteItem { name: name.into(), value, tol, lower_bound: false, pass: value <= tol }
    }
    fn at_least(name: &str, value: f64, tol: f64) -> Self {
        SuiteItem { name: name.into(), value, tol, lower_bound: true, pass: value >= tol }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityReport {
    pub items: Vec<SuiteItem>,
    pub cutoff: Option<CutoffReport>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
}

/// Sample counts of the suite.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub angular_samples: usize,
    pub claim1_samples: usize,
    pub boosts: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { angular_samples: 10_000, claim1_samples: 100_000, boosts: 20, seed: 0 }
    }
}

/// Localized two-bump state with a non-uniform phase on a Cartesian1 grid.
pub fn test_packet(grid: GridDesc, l: usize) -> Field {
    Field::from_fn(grid, l, |k, x| {
        let a = 1.0 / (1.0 + k as f64);
        let amp = a * (-(x - 0.7 * k as f64).powi(2) / 5.0).exp() + 0.4 * a * (-(x + 3.0).powi(2) / 2.0).exp();
        C64::from_polar(amp, 0.6 * x + 0.3 * (x / 3.0).sin() + 0.5 * k as f64)
    })
}

pub fn identity_suite(sys: &System, opts: &SuiteOptions) -> Result<IdentityReport> {
    let mut items = Vec::new();
    let mut rng = crate::util::rng(opts.seed);

    // Galilean boosts, pointwise on a periodic grid with exactly periodic phases
    let g1 = GridDesc::cartesian1(2048, 40.0)?;
    let u = test_packet(g1, sys.l());
    let d0 = densities(sys, &u);
    let q = boost_quantum(&g1);
    let (mut em, mut ek, mut et) = (0.0f64, 0.0f64, 0.0f64);
    let mmax = d0.mdens.iter().cloned().fold(0.0, f64::max);
    let mut boosts = Vec::new();
    for _ in 0..opts.boosts {
        let xi = q * rng.gen_range(-25i32..=25) as f64;
        boosts.push(xi);
        let d = densities(sys, &gauge_transform(sys, &u, xi)?);
        let kscale = d.kdens.iter().chain(&d0.kdens).cloned().fold(0.0, f64::max);
        let tscale = d.tdens.iter().chain(&d0.tdens).map(|v| v.abs()).fold(mmax * xi.abs(), f64::max);
        for j in 0..g1.len() {
            em = em.max((d.mdens[j] - d0.mdens[j]).abs() / mmax);
            ek = ek.max((d.kdens[j] - (xi * xi * d0.mdens[j] + xi * d0.tdens[j] + d0.kdens[j])).abs() / kscale);
            et = et.max((d.tdens[j] - (2.0 * xi * d0.mdens[j] + d0.tdens[j])).abs() / tscale);
        }
    }
    items.push(SuiteItem::at_most("gaugeMassInvariance", em, 1e-14));
    items.push(SuiteItem::at_most("gaugeKineticIdentity", ek, 1e-10));
    items.push(SuiteItem::at_most("gaugeMomentumShift", et, 1e-10));

    items.push(SuiteItem::at_most("angularIdentities", angular_identity_check(opts.angular_samples, opts.seed + 1), 1e-12));

    let cp = build_cutoffs(0.1, 8.0, 5)?;
    let rho: Vec<f64> = (0..=1600).map(|i| i as f64 / 400.0).collect();
    let cutoff = cutoff_property_suite(&cp, &rho, &[4.0, 8.0, 16.0, 32.0], opts.seed + 2);
    let cutoff = match cutoff {
        Ok(rep) => {
            for it in &rep.items {
                let item = if it.name == "varphiMinusPhiNonnegative" || it.name == "phiAtOrigin" {
                    SuiteItem { name: format!("cutoff.{}", it.name), value: it.value, tol: it.tol, lower_bound: true, pass: it.pass }
                } else {
                    SuiteItem { name: format!("cutoff.{}", it.name), value: it.value, tol: it.tol, lower_bound: false, pass: it.pass }
                };
                items.push(item);
            }
            Some(rep)
        }
        Err(e) => {
            items.push(SuiteItem { name: format!("cutoff: {}", e), value: f64::NAN, tol: 0.0, lower_bound: false, pass: false });
            None
        }
    };

    // windowed kinetic identity on a radial field and on the periodic grid
    let gr = GridDesc::radial(5, 2000, 40.0)?;
    let ur = Field::from_fn(gr, sys.l(), |k, r| C64::from_polar((-r * r / (4.0 + k as f64)).exp(), 0.3 * r + 0.1 * r * r));
    let mut wi = 0.0f64;
    for r in [2.0, 5.0, 10.0, 20.0] {
        wi = wi.max(windowed_coercivity(sys, &ur, &Window::centered(0.2, r), 1.0, 0.0)?.identity_residual);
    }
    items.push(SuiteItem::at_most("windowedKineticIdentity", wi, 1e-8));

    // ξ₀ cancels the windowed momentum
    let mut xr = 0.0f64;
    for (r, s) in [(4.0, 0.0), (8.0, 1.5), (15.0, -2.0)] {
        let win = Window { eps: 0.2, r_scale: r, center: s };
        let before = windowed(sys, &u, &win)?;
        let x0 = xi0(sys, &u, &win)?;
        let after = windowed(sys, &gauge_transform(sys, &u, x0)?, &win)?;
        xr = xr.max(after.momentum.abs() / before.momentum.abs().max(before.mass));
    }
    items.push(SuiteItem::at_most("xi0ZeroesMomentum", xr, 1e-10));

    let c1 = claim1_sign_check(sys, opts.claim1_samples, opts.seed + 3);
    items.push(SuiteItem::at_least("claim1Surrogate", c1.min_s, -1e-12));
    items.push(SuiteItem::at_least("claim1CrossTermBound", c1.min_gap, -1e-12));

    let c2 = claim2_invariance_check(sys, &u, &Window { eps: 0.2, r_scale: 10.0, center: 0.5 }, &boosts)?;
    items.push(SuiteItem::at_most("claim2Invariance", c2, 1e-10));

    Ok(IdentityReport { items, cutoff })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_for_canonical_systems() {
        let opts = SuiteOptions { angular_samples: 2000, claim1_samples: 5000, boosts: 5, seed: 1 };
        for kappa in [0.5, 0.8] {
            let rep = identity_suite(&System::canonical(kappa), &opts).unwrap();
            for it in &rep.items {
                assert!(it.pass, "{:?}", it);
            }
        }
    }
}
