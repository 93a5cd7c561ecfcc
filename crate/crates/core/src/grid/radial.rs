//! Finite-volume radial operators.

use super::{sphere_area, GridDesc};
use crate::C64;

/// Precomputed radial geometry.
///
/// `vol[j]` is the volume of shell j, `area[j]` the area of the face
/// between nodes j and j+1 (`area[N-1]` is the outer wall), so
///
/// ```text
/// (Δu)_j = [area[j]·(u_{j+1} − u_j) − area[j−1]·(u_j − u_{j−1})] / (h·vol[j])
/// ```
///
/// with area[−1] = 0 at the origin and a wall value u = 0 at distance h/2.
#[derive(Clone, Debug)]
pub struct RadialGeom {
    pub n: usize,
    pub h: f64,
    pub r: Vec<f64>,
    pub vol: Vec<f64>,
    pub area: Vec<f64>,
}

impl RadialGeom {
    pub fn new(grid: &GridDesc) -> Self {
        let GridDesc::Radial { n, points, r_max } = *grid else {
            panic!("RadialGeom requires a radial grid")
        };
        let h = r_max / points as f64;
        let s = sphere_area(n);
        let nf = n as f64;
        let r: Vec<f64> = (0..points).map(|j| (j as f64 + 0.5) * h).collect();
        let vol = (0..points)
            .map(|j| {
                let a = j as f64 * h;
                let b = (j + 1) as f64 * h;
                s * (b.powi(n as i32) - a.powi(n as i32)) / nf
            })
            .collect();
        let area = (0..points).map(|j| s * ((j + 1) as f64 * h).powi(n as i32 - 1)).collect();
        RadialGeom { n, h, r, vol, area }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Tridiagonal coefficients of Δ in the original variable:
    /// (lower, diag, upper) with lower[0] and upper[N−1] unused.
    pub fn tridiag(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.len();
        let h = self.h;
        let mut lo = vec![0.0; n];
        let mut di = vec![0.0; n];
        let mut up = vec![0.0; n];
        for j in 0..n {
            let inner = if j > 0 { self.area[j - 1] } else { 0.0 };
            let denom = h * self.vol[j];
            if j + 1 < n {
                up[j] = self.area[j] / (h * self.vol[j]);
                di[j] -= self.area[j] / denom;
            } else {
                // wall at distance h/2 with value 0
                di[j] -= 2.0 * self.area[j] / denom;
            }
            if j > 0 {
                lo[j] = inner / denom;
                di[j] -= inner / denom;
            }
        }
        (lo, di, up)
    }

    /// Symmetric tridiagonal form W^{1/2} Δ W^{−1/2}, W = diag(vol):
    /// (diag, offdiag) with offdiag of length N−1.
    pub fn symmetric_laplacian(&self) -> (Vec<f64>, Vec<f64>) {
        let (_, di, _) = self.tridiag();
        let off = (0..self.len() - 1)
            .map(|j| self.area[j] / (self.h * (self.vol[j] * self.vol[j + 1]).sqrt()))
            .collect();
        (di, off)
    }

    pub fn laplacian(&self, u: &[C64]) -> Vec<C64> {
        let (lo, di, up) = self.tridiag();
        let n = self.len();
        (0..n)
            .map(|j| {
                let mut v = u[j] * di[j];
                if j > 0 {
                    v += u[j - 1] * lo[j];
                }
                if j + 1 < n {
                    v += u[j + 1] * up[j];
                }
                v
            })
            .collect()
    }

    /// Face gradients (u_{j+1} − u_j)/h and the wall gradient (0 − u_{N−1})/(h/2).
    fn face_grad(&self, u: &[C64]) -> Vec<C64> {
        let n = self.len();
        let mut d: Vec<C64> = (0..n - 1).map(|j| (u[j + 1] - u[j]) / self.h).collect();
        d.push(-u[n - 1] * (2.0 / self.h));
        d
    }

    /// Length of the dual cell of face j (h for interior faces, h/2 at the wall).
    fn face_len(&self, j: usize) -> f64 {
        if j + 1 < self.len() {
            self.h
        } else {
            0.5 * self.h
        }
    }

    /// Σ_faces area·len·∇u·conj(∇v) = −⟨Δu, v⟩.
    pub fn grad_inner(&self, u: &[C64], v: &[C64]) -> C64 {
        let du = self.face_grad(u);
        let dv = self.face_grad(v);
        (0..self.len()).map(|j| du[j] * dv[j].conj() * (self.area[j] * self.face_len(j))).sum()
    }

    pub fn kinetic(&self, u: &[C64]) -> f64 {
        let du = self.face_grad(u);
        (0..self.len()).map(|j| du[j].norm_sqr() * self.area[j] * self.face_len(j)).sum()
    }

    /// Node density: each face's energy split evenly between its two cells
    /// (the wall face goes entirely to the last cell), divided by the shell volume.
    pub fn gradient_sq(&self, u: &[C64]) -> Vec<f64> {
        let n = self.len();
        let du = self.face_grad(u);
        let e: Vec<f64> = (0..n).map(|j| du[j].norm_sqr() * self.area[j] * self.face_len(j)).collect();
        (0..n)
            .map(|j| {
                let mut s = 0.0;
                if j > 0 {
                    s += 0.5 * e[j - 1];
                }
                s += if j + 1 < n { 0.5 * e[j] } else { e[j] };
                s / self.vol[j]
            })
            .collect()
    }

    /// Centred ∂_r u at nodes (even reflection at the origin, odd at the wall).
    pub fn gradient(&self, u: &[C64]) -> Vec<C64> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let left = if j == 0 { u[0] } else { u[j - 1] };
                let right = if j + 1 < n { u[j + 1] } else { -u[n - 1] };
                (right - left) / (2.0 * self.h)
            })
            .collect()
    }

    pub fn windowed_kinetic(&self, chi: &[f64], u: &[C64]) -> f64 {
        let du = self.face_grad(u);
        (0..self.len() - 1)
            .map(|j| du[j].norm_sqr() * self.area[j] * self.h * chi[j] * chi[j + 1])
            .sum()
    }
}
