//! Spatial grids, quadrature and differential operators.
//!
//! Two geometries are supported:
//!
//! - `Radial { n, points, r_max }`: radially symmetric functions on ℝⁿ,
//!   cell-centred nodes r_j = (j + ½)h, h = r_max/N. The scheme is finite
//!   volume: each node owns the spherical shell between r_j ∓ h/2, fluxes
//!   live on the shell faces, the origin face has zero area (regularity) and
//!   the outer wall carries a homogeneous Dirichlet condition at distance
//!   h/2. Quadrature weights are the exact shell volumes, so the discrete
//!   Laplacian and gradient satisfy summation by parts exactly.
//! - `Cartesian1 { points, half_length }`: periodic on [−L, L) with spectral
//!   derivatives.

mod cartesian;
mod quad;
mod radial;
pub mod snapshot;

pub use cartesian::Spectral1;
pub use quad::{gauss_legendre, radial_convolution, CompactProfile, CubicSpline, RadialProfile};
pub use radial::RadialGeom;
pub(crate) use quad::thomas_real;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridDesc {
    Radial { n: usize, points: usize, r_max: f64 },
    Cartesian1 { points: usize, half_length: f64 },
}

/// Surface area of the unit sphere S^{m−1} ⊂ ℝ^m.
pub fn sphere_area(m: usize) -> f64 {
    use std::f64::consts::PI;
    match m {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 2.0) * sphere_area(m - 2),
    }
}

/// Volume of the unit ball in ℝ^m.
pub fn ball_volume(m: usize) -> f64 {
    sphere_area(m) / m as f64
}

impl GridDesc {
    pub fn radial(n: usize, points: usize, r_max: f64) -> Result<Self> {
        let g = GridDesc::Radial { n, points, r_max };
        g.validate()?;
        Ok(g)
    }

    pub fn cartesian1(points: usize, half_length: f64) -> Result<Self> {
        let g = GridDesc::Cartesian1 { points, half_length };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GridDesc::Radial { n, points, r_max } => {
                if !(2..=9).contains(&n) {
                    return Err(Error::Config(format!("radial dimension {} unsupported", n)));
                }
                if points < 16 || !(r_max > 0.0 && r_max.is_finite()) {
                    return Err(Error::Config("radial grid needs N >= 16 and r_max > 0".into()));
                }
            }
            GridDesc::Cartesian1 { points, half_length } => {
                if points < 16 || !(half_length > 0.0 && half_length.is_finite()) {
                    return Err(Error::Config("cartesian grid needs N >= 16 and L > 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match *self {
            GridDesc::Radial { points, .. } | GridDesc::Cartesian1 { points, .. } => points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        match *self {
            GridDesc::Radial { points, r_max, .. } => r_max / points as f64,
            GridDesc::Cartesian1 { points, half_length } => 2.0 * half_length / points as f64,
        }
    }

    /// Spatial dimension of the modelled domain.
    pub fn dim(&self) -> usize {
        match *self {
            GridDesc::Radial { n, .. } => n,
            GridDesc::Cartesian1 { .. } => 1,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, GridDesc::Radial { .. })
    }

    /// Node coordinates: r_j (radial) or x_j (Cartesian).
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        match *self {
            GridDesc::Radial { points, .. } => (0..points).map(|j| (j as f64 + 0.5) * h).collect(),
            GridDesc::Cartesian1 { points, half_length } => (0..points).map(|j| -half_length + j as f64 * h).collect(),
        }
    }

    /// |x| at each node.
    pub fn radii(&self) -> Vec<f64> {
        self.nodes().into_iter().map(f64::abs).collect()
    }

    /// Outer extent: r_max or L.
    pub fn extent(&self) -> f64 {
        match *self {
            GridDesc::Radial { r_max, .. } => r_max,
            GridDesc::Cartesian1 { half_length, .. } => half_length,
        }
    }

    /// Quadrature weights (shell volumes or Δx).
    pub fn weights(&self) -> Vec<f64> {
        match *self {
            GridDesc::Radial { .. } => RadialGeom::new(self).vol,
            GridDesc::Cartesian1 { points, .. } => vec![self.spacing(); points],
        }
    }
}

/// l complex sample arrays on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: GridDesc,
    pub comps: Vec<Vec<C64>>,
}

impl Field {
    pub fn new(grid: GridDesc, comps: Vec<Vec<C64>>) -> Result<Self> {
        for c in &comps {
            if c.len() != grid.len() {
                return Err(Error::LengthMismatch { expected: grid.len(), got: c.len() });
            }
        }
        Ok(Field { grid, comps })
    }

    pub fn zeros(grid: GridDesc, l: usize) -> Self {
        Field { grid, comps: vec![vec![C64::new(0.0, 0.0); grid.len()]; l] }
    }

    /// Field from real profiles evaluated at |x|.
    pub fn from_fn(grid: GridDesc, l: usize, f: impl Fn(usize, f64) -> C64) -> Self {
        let x = grid.nodes();
        let comps = (0..l).map(|k| x.iter().map(|&xi| f(k, xi)).collect()).collect();
        Field { grid, comps }
    }

    pub fn l(&self) -> usize {
        self.comps.len()
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field {
            grid: self.grid,
            comps: self.comps.iter().map(|v| v.iter().map(|z| z * c).collect()).collect(),
        }
    }

    /// Point values of all components at node j.
    #[inline]
    pub fn point(&self, j: usize, out: &mut [C64]) {
        for (k, c) in self.comps.iter().enumerate() {
            out[k] = c[j];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }
}

/// ∫ samples dx.
pub fn integrate(grid: &GridDesc, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), got: samples.len() });
    }
    Ok(integrate_unchecked(&grid.weights(), samples))
}

pub(crate) fn integrate_unchecked(w: &[f64], samples: &[f64]) -> f64 {
    w.iter().zip(samples).map(|(a, b)| a * b).sum()
}

/// ∫ |u|² dx.
pub fn norm_sq(grid: &GridDesc, comp: &[C64]) -> f64 {
    grid.weights().iter().zip(comp).map(|(w, z)| w * z.norm_sqr()).sum()
}

/// Δu.
pub fn laplacian(grid: &GridDesc, comp: &[C64]) -> Vec<C64> {
    match grid {
        GridDesc::Radial { .. } => RadialGeom::new(grid).laplacian(comp),
        GridDesc::Cartesian1 { .. } => Spectral1::new(grid).laplacian(comp),
    }
}

/// Node density of |∇u|² whose integral equals the discrete kinetic energy.
pub fn gradient_sq(grid: &GridDesc, comp: &[C64]) -> Vec<f64> {
    match grid {
        GridDesc::Radial { .. } => RadialGeom::new(grid).gradient_sq(comp),
        GridDesc::Cartesian1 { .. } => Spectral1::new(grid).derivative(comp).iter().map(|z| z.norm_sqr()).collect(),
    }
}

/// ∫ |∇u|² dx (discrete, consistent with −⟨Δu, u⟩).
pub fn kinetic(grid: &GridDesc, comp: &[C64]) -> f64 {
    match grid {
        GridDesc::Radial { .. } => RadialGeom::new(grid).kinetic(comp),
        GridDesc::Cartesian1 { .. } => {
            let d = Spectral1::new(grid).derivative(comp);
            grid.spacing() * d.iter().map(|z| z.norm_sqr()).sum::<f64>()
        }
    }
}

/// ∂_r u (radial, centred differences) or ∂_x u (spectral) at nodes.
pub fn gradient(grid: &GridDesc, comp: &[C64]) -> Vec<C64> {
    match grid {
        GridDesc::Radial { .. } => RadialGeom::new(grid).gradient(comp),
        GridDesc::Cartesian1 { .. } => Spectral1::new(grid).derivative(comp),
    }
}

/// ‖u‖_{L^p}, p ∈ [1, ∞].
pub fn lp_norm(grid: &GridDesc, comp: &[C64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Precondition(format!("p = {} must be >= 1", p)));
    }
    if comp.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), got: comp.len() });
    }
    if p.is_infinite() {
        return Ok(comp.iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let s: Vec<f64> = comp.iter().map(|z| z.norm().powf(p)).collect();
    Ok(integrate_unchecked(&grid.weights(), &s).powf(1.0 / p))
}

/// ∫ χ²|∇u|² with χ sampled at nodes; for radial grids faces are weighted
/// by χ_j χ_{j+1} and the outer wall by χ_{N−1}·0, which makes
/// ∫χ²|∇u|² = ‖∇(χu)‖² + ∫χ Δχ |u|² hold exactly.
pub fn windowed_kinetic(grid: &GridDesc, chi: &[f64], comp: &[C64]) -> f64 {
    match grid {
        GridDesc::Radial { .. } => RadialGeom::new(grid).windowed_kinetic(chi, comp),
        GridDesc::Cartesian1 { .. } => {
            let d = Spectral1::new(grid).derivative(comp);
            grid.spacing() * d.iter().zip(chi).map(|(z, c)| c * c * z.norm_sqr()).sum::<f64>()
        }
    }
}

/// Real Laplacian of a real node function (used for cutoffs).
pub fn laplacian_real(grid: &GridDesc, v: &[f64]) -> Vec<f64> {
    let c: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
    laplacian(grid, &c).into_iter().map(|z| z.re).collect()
}
