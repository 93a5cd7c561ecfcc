//! Mass, kinetic and momentum densities, Galilean boosts and windowed
//! versions of the three.

use serde::Serialize;

use crate::grid::{self, Field, GridDesc};
use crate::nonlin::System;
use crate::{Error, Result, C64};

use super::cutoff::chi;

/// Pointwise 𝓜 = Σ(α²/γ)|u|², 𝓚 = Σγ|∇u|², 𝓣 = 2ImΣα∇u ū.
/// On radial grids 𝓣 is the radial component.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTriple {
    pub mdens: Vec<f64>,
    pub kdens: Vec<f64>,
    pub tdens: Vec<f64>,
}

pub fn densities(sys: &System, field: &Field) -> DensityTriple {
    let n = field.grid.len();
    let (a, g) = (sys.alpha(), sys.gamma());
    let mut mdens = vec![0.0; n];
    let mut kdens = vec![0.0; n];
    let mut tdens = vec![0.0; n];
    for (k, u) in field.comps.iter().enumerate() {
        let du = grid::gradient(&field.grid, u);
        let gs = grid::gradient_sq(&field.grid, u);
        for j in 0..n {
            mdens[j] += a[k] * a[k] / g[k] * u[j].norm_sqr();
            kdens[j] += g[k] * gs[j];
            tdens[j] += 2.0 * a[k] * (du[j] * u[j].conj()).im;
        }
    }
    DensityTriple { mdens, kdens, tdens }
}

/// u_k ↦ e^{i(α_k/γ_k)xξ} u_k. Radial grids only accept ξ = 0.
///
/// On Cartesian1 the boost is exactly representable when (α_k/γ_k)ξ is a
/// multiple of π/L; otherwise the data must vanish at ±L.
pub fn gauge_transform(sys: &System, field: &Field, xi: f64) -> Result<Field> {
    if xi == 0.0 {
        return Ok(field.clone());
    }
    if field.grid.is_radial() {
        return Err(Error::UnsupportedGeometry("a Galilean boost breaks radial symmetry".into()));
    }
    let x = field.grid.nodes();
    let comps = field
        .comps
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let a = sys.alpha()[k] / sys.gamma()[k] * xi;
            u.iter().zip(&x).map(|(z, xj)| z * C64::from_polar(1.0, a * xj)).collect()
        })
        .collect();
    Field::new(field.grid, comps)
}

/// Smallest boost that is exactly periodic on a Cartesian1 grid.
pub fn boost_quantum(grid: &GridDesc) -> f64 {
    match grid {
        GridDesc::Cartesian1 { half_length, .. } => std::f64::consts::PI / half_length,
        GridDesc::Radial { .. } => 0.0,
    }
}

/// Window χ((x − s)/R).
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Window {
    pub eps: f64,
    pub r_scale: f64,
    pub center: f64,
}

impl Window {
    pub fn centered(eps: f64, r_scale: f64) -> Self {
        Window { eps, r_scale, center: 0.0 }
    }

    pub fn sample(&self, grid: &GridDesc) -> Result<Vec<f64>> {
        if grid.is_radial() && self.center != 0.0 {
            return Err(Error::UnsupportedGeometry("radial grids only support centred windows".into()));
        }
        Ok(grid.nodes().iter().map(|x| chi((x - self.center).abs() / self.r_scale, self.eps)).collect())
    }
}

/// Windowed integrals for one field and one window.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Windowed {
    /// ∫χ²𝓜 = 𝓜(χu)
    pub mass: f64,
    /// ∫χ²𝓣
    pub momentum: f64,
    /// K(χu)
    pub kinetic: f64,
    pub xi0: f64,
    /// K(χu^{ξ₀}) = K(χu) + ξ₀∫χ²𝓣 + ξ₀²∫χ²𝓜
    pub kinetic_boosted: f64,
}

fn xi0_from(mass: f64, momentum: f64) -> f64 {
    if mass > 0.0 {
        -0.5 * momentum / mass
    } else {
        0.0
    }
}

fn window_integrals(sys: &System, field: &Field, chi2: &[f64], w: &[f64]) -> (f64, f64) {
    let d = densities(sys, field);
    let mut m = 0.0;
    let mut t = 0.0;
    for j in 0..w.len() {
        m += w[j] * chi2[j] * d.mdens[j];
        t += w[j] * chi2[j] * d.tdens[j];
    }
    (m, t)
}

/// ξ₀ = −½∫χ²𝓣 / ∫χ²𝓜, or 0 for an empty window.
pub fn xi0(sys: &System, field: &Field, win: &Window) -> Result<f64> {
    let c = win.sample(&field.grid)?;
    let chi2: Vec<f64> = c.iter().map(|v| v * v).collect();
    let (m, t) = window_integrals(sys, field, &chi2, &field.grid.weights());
    Ok(xi0_from(m, t))
}

/// χu as a field.
pub fn windowed_field(field: &Field, chi: &[f64]) -> Field {
    Field {
        grid: field.grid,
        comps: field.comps.iter().map(|u| u.iter().zip(chi).map(|(z, c)| z * *c).collect()).collect(),
    }
}

pub fn windowed(sys: &System, field: &Field, win: &Window) -> Result<Windowed> {
    let c = win.sample(&field.grid)?;
    Ok(windowed_with(sys, field, &c, &field.grid.weights()))
}

pub(crate) fn windowed_with(sys: &System, field: &Field, c: &[f64], w: &[f64]) -> Windowed {
    let chi2: Vec<f64> = c.iter().map(|v| v * v).collect();
    let (mass, momentum) = window_integrals(sys, field, &chi2, w);
    let cu = windowed_field(field, c);
    let kinetic: f64 = cu.comps.iter().zip(sys.gamma()).map(|(u, g)| g * grid::kinetic(&field.grid, u)).sum();
    let xi0 = xi0_from(mass, momentum);
    let kinetic_boosted = kinetic + xi0 * momentum + xi0 * xi0 * mass;
    Windowed { mass, momentum, kinetic, xi0, kinetic_boosted }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng;
    use rand::Rng;

    fn packet(grid: GridDesc, k0: f64) -> Field {
        Field::from_fn(grid, 2, |k, x| {
            let a = if k == 0 { 1.0 } else { 0.6 };
            C64::from_polar(a * (-(x - 1.0 * k as f64).powi(2) / 4.0).exp(), k0 * x + 0.3 * k as f64)
        })
    }

    #[test]
    fn real_and_zero_states() {
        let sys = System::canonical(0.5);
        let g = GridDesc::cartesian1(256, 20.0).unwrap();
        let u = Field::from_fn(g, 2, |_, x| C64::new((-x * x).exp(), 0.0));
        let d = densities(&sys, &u);
        assert!(d.tdens.iter().all(|v| v.abs() < 1e-14));
        assert!(xi0(&sys, &u, &Window::centered(0.1, 5.0)).unwrap().abs() < 1e-14);
        let z = densities(&sys, &Field::zeros(g, 2));
        assert!(z.mdens.iter().chain(&z.kdens).chain(&z.tdens).all(|v| *v == 0.0));
        let r = GridDesc::radial(5, 100, 10.0).unwrap();
        let zr = Field::zeros(r, 2);
        assert_eq!(xi0(&sys, &zr, &Window::centered(0.1, 5.0)).unwrap(), 0.0);
    }

    #[test]
    fn mass_density_integrates_to_mscript() {
        let sys = System::canonical(0.5);
        let g = GridDesc::radial(5, 400, 20.0).unwrap();
        let u = Field::from_fn(g, 2, |k, r| C64::new((-r * r / (1.0 + k as f64)).exp(), 0.1));
        let d = densities(&sys, &u);
        let fv = crate::groundstate::functionals(&sys, &u);
        let m = grid::integrate(&g, &d.mdens).unwrap();
        assert!((m - fv.mscript).abs() < 1e-13 * m);
        let k = grid::integrate(&g, &d.kdens).unwrap();
        assert!((k - fv.k).abs() < 1e-12 * k);
    }

    #[test]
    fn gauge_identities_pointwise() {
        let sys = System::canonical(0.5);
        let g = GridDesc::cartesian1(1024, 30.0).unwrap();
        let u = packet(g, 0.7);
        let d0 = densities(&sys, &u);
        let q = boost_quantum(&g);
        let mut r = rng(5);
        for _ in 0..20 {
            let xi = q * r.gen_range(-20i32..=20) as f64;
            let v = gauge_transform(&sys, &u, xi).unwrap();
            let d = densities(&sys, &v);
            let scale = d0.kdens.iter().chain(&d.kdens).cloned().fold(0.0, f64::max);
            for j in 0..g.len() {
                assert!((d.mdens[j] - d0.mdens[j]).abs() <= 1e-14 * d0.mdens.iter().cloned().fold(0.0, f64::max));
                let want = xi * xi * d0.mdens[j] + xi * d0.tdens[j] + d0.kdens[j];
                assert!((d.kdens[j] - want).abs() <= 1e-10 * scale);
                let want_t = 2.0 * xi * d0.mdens[j] + d0.tdens[j];
                assert!((d.tdens[j] - want_t).abs() <= 1e-10 * scale.sqrt().max(1.0));
            }
        }
        assert!(matches!(gauge_transform(&sys, &Field::zeros(GridDesc::radial(5, 64, 1.0).unwrap(), 2), 0.5), Err(Error::UnsupportedGeometry(_))));
    }

    #[test]
    fn xi0_cancels_uniform_phase() {
        let sys = System::canonical(0.5);
        let g = GridDesc::cartesian1(2048, 40.0).unwrap();
        let base = Field::from_fn(g, 2, |k, x| C64::new((-(x * x) / (3.0 + k as f64)).exp(), 0.0));
        let xs = 0.8;
        let moving = gauge_transform(&sys, &base, xs).unwrap();
        let win = Window { eps: 0.2, r_scale: 6.0, center: 0.5 };
        let x0 = xi0(&sys, &moving, &win).unwrap();
        assert!((x0 + xs).abs() < 1e-8, "{}", x0);
        let back = gauge_transform(&sys, &moving, x0).unwrap();
        let w = windowed(&sys, &back, &win).unwrap();
        assert!(w.momentum.abs() <= 1e-10 * w.mass);
        let w1 = windowed(&sys, &moving, &win).unwrap();
        assert!((w1.kinetic_boosted - w.kinetic).abs() < 1e-8 * w.kinetic);
    }
}
