use serde::Serialize;

use crate::grid::{self, Field, GridDesc};
use crate::nonlin::System;
use crate::C64;

/// Conserved and auxiliary functionals of a field.
#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct FunctionalValues {
    /// Σ (σ_k α_k / 2) ‖u_k‖²
    pub q: f64,
    /// K + Σ β_k ‖u_k‖² − 2P
    pub ebeta: f64,
    /// K − 2P
    pub e0: f64,
    /// Σ γ_k ‖∇u_k‖²
    pub k: f64,
    /// Re ∫ F(u)
    pub p: f64,
    /// Σ (α_k²/γ_k) ‖u_k‖²
    pub mscript: f64,
    /// 2 Im Σ α_k ∫ ∇u_k ū_k (zero vector on radial grids by symmetry)
    pub tvec: Vec<f64>,
}

/// Per-component norms reused by several monitors.
pub(crate) struct Norms {
    pub mass: Vec<f64>,
    pub kin: Vec<f64>,
    pub p: f64,
}

pub(crate) fn norms(sys: &System, field: &Field, weights: &[f64]) -> Norms {
    let l = sys.l();
    let mass = field
        .comps
        .iter()
        .map(|c| c.iter().zip(weights).map(|(z, w)| w * z.norm_sqr()).sum())
        .collect();
    let kin = field.comps.iter().map(|c| grid::kinetic(&field.grid, c)).collect();
    let mut z = vec![C64::new(0.0, 0.0); l];
    let mut p = 0.0;
    for (j, w) in weights.iter().enumerate() {
        field.point(j, &mut z);
        p += w * sys.eval_f(&z).re;
    }
    Norms { mass, kin, p }
}

pub fn functionals(sys: &System, field: &Field) -> FunctionalValues {
    let w = field.grid.weights();
    functionals_with_weights(sys, field, &w)
}

pub(crate) fn functionals_with_weights(sys: &System, field: &Field, w: &[f64]) -> FunctionalValues {
    let nm = norms(sys, field, w);
    let l = sys.l();
    let (a, g, b, s) = (sys.alpha(), sys.gamma(), sys.beta(), &sys.sigma);
    let q: f64 = (0..l).map(|k| s[k] * a[k] / 2.0 * nm.mass[k]).sum();
    let k: f64 = (0..l).map(|k| g[k] * nm.kin[k]).sum();
    let bm: f64 = (0..l).map(|k| b[k] * nm.mass[k]).sum();
    let mscript: f64 = (0..l).map(|k| a[k] * a[k] / g[k] * nm.mass[k]).sum();
    let tvec = momentum(sys, field, w);
    let fv = FunctionalValues { q, ebeta: k + bm - 2.0 * nm.p, e0: k - 2.0 * nm.p, k, p: nm.p, mscript, tvec };
    debug_assert!((fv.ebeta - (fv.k + bm - 2.0 * fv.p)).abs() <= 1e-12 * (fv.k.abs() + bm + fv.p.abs() + 1e-300));
    fv
}

fn momentum(sys: &System, field: &Field, w: &[f64]) -> Vec<f64> {
    match field.grid {
        GridDesc::Radial { n, .. } => vec![0.0; n],
        GridDesc::Cartesian1 { .. } => {
            let mut t = 0.0;
            for (k, c) in field.comps.iter().enumerate() {
                let d = grid::gradient(&field.grid, c);
                let s: f64 = d.iter().zip(c).zip(w).map(|((dz, z), w)| w * (dz * z.conj()).im).sum();
                t += 2.0 * sys.alpha()[k] * s;
            }
            vec![t]
        }
    }
}
