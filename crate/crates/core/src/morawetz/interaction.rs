//! Angular-derivative algebra, the pointwise sign claim, the 1D interaction
//! Morawetz quantity and gauge invariance of the windowed bilinear form.

use rand::Rng;

use crate::grid::{Field, GridDesc};
use crate::nonlin::System;
use crate::{Error, Result, C64};

use super::cutoff::CutoffProfile;
use super::density::{densities, gauge_transform, Window};

const D: usize = 5;
type Vec5 = [f64; D];
type CVec5 = [C64; D];

/// P_jm(z) = δ_jm − z_j z_m/|z|².
pub fn projector(z: &Vec5) -> [[f64; D]; D] {
    let n2: f64 = z.iter().map(|v| v * v).sum();
    let mut p = [[0.0; D]; D];
    for j in 0..D {
        for m in 0..D {
            p[j][m] = if j == m { 1.0 } else { 0.0 } - z[j] * z[m] / n2;
        }
    }
    p
}

fn apply(p: &[[f64; D]; D], v: &CVec5) -> CVec5 {
    let mut out = [C64::new(0.0, 0.0); D];
    for j in 0..D {
        for m in 0..D {
            out[j] += p[j][m] * v[m];
        }
    }
    out
}

fn gauss<R: Rng>(r: &mut R) -> f64 {
    r.gen_range(-1.0..1.0)
}

fn rvec<R: Rng>(r: &mut R) -> Vec5 {
    let mut v = [0.0; D];
    for x in v.iter_mut() {
        *x = gauss(r);
    }
    v
}

fn cvec<R: Rng>(r: &mut R) -> CVec5 {
    let mut v = [C64::new(0.0, 0.0); D];
    for x in v.iter_mut() {
        *x = C64::new(gauss(r), gauss(r));
    }
    v
}

/// Max relative residual of the two projector identities
/// Σ P_jm(x−y) Im[f̄∂_m f](x) Im[ḡ∂_j g](y) = Im[f̄∇̸_y f](x)·Im[ḡ∇̸_x g](y) and
/// Σ Re[∂_j f̄ ∂_m f](x) P_jm(x−y) = |∇̸_y f(x)|².
pub fn angular_identity_check(samples: usize, seed: u64) -> f64 {
    let mut r = crate::util::rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (x, y) = (rvec(&mut r), rvec(&mut r));
        let mut z = [0.0; D];
        for i in 0..D {
            z[i] = x[i] - y[i];
        }
        let p = projector(&z);
        let f = C64::new(gauss(&mut r), gauss(&mut r));
        let g = C64::new(gauss(&mut r), gauss(&mut r));
        let df = cvec(&mut r);
        let dg = cvec(&mut r);
        // P(y − x) = P(x − y)
        let (af, ag) = (apply(&p, &df), apply(&p, &dg));
        let mut lhs = 0.0;
        let mut lhs_abs = 0.0;
        for j in 0..D {
            for m in 0..D {
                let t = p[j][m] * (f.conj() * df[m]).im * (g.conj() * dg[j]).im;
                lhs += t;
                lhs_abs += t.abs();
            }
        }
        let rhs: f64 = (0..D).map(|j| (f.conj() * af[j]).im * (g.conj() * ag[j]).im).sum();
        worst = worst.max((lhs - rhs).abs() / lhs_abs.max(f64::MIN_POSITIVE));
        let mut lhs2 = 0.0;
        let mut abs2 = 0.0;
        for j in 0..D {
            for m in 0..D {
                let t = (df[j].conj() * df[m]).re * p[j][m];
                lhs2 += t;
                abs2 += t.abs();
            }
        }
        let rhs2: f64 = af.iter().map(|v| v.norm_sqr()).sum();
        worst = worst.max((lhs2 - rhs2).abs() / abs2.max(f64::MIN_POSITIVE));
    }
    worst
}

/// Outcome of the sign claim: the most negative normalized S, and the most
/// negative normalized gap S − (sum of squared cross terms).
#[derive(Clone, Copy, Debug, serde::Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SignCheck {
    pub min_s: f64,
    pub min_gap: f64,
    pub samples: usize,
}

/// Random samples of
/// S = Σγ|∇̸_y u_k(x)|²·𝓜(y) + Σγ|∇̸_x u_k(y)|²·𝓜(x)
///     − 2(ΣαIm[∇̸_y u_k ū_k](x))·(ΣαIm[∇̸_x u_k ū_k](y))
/// for the coefficients of `sys`, each normalized by the sum of the
/// absolute values of its terms.
pub fn claim1_sign_check(sys: &System, samples: usize, seed: u64) -> SignCheck {
    let mut r = crate::util::rng(seed);
    let l = sys.l();
    let (a, g) = (sys.alpha(), sys.gamma());
    let mut min_s = f64::INFINITY;
    let mut min_gap = f64::INFINITY;
    for _ in 0..samples {
        let (x, y) = (rvec(&mut r), rvec(&mut r));
        let mut z = [0.0; D];
        for i in 0..D {
            z[i] = x[i] - y[i];
        }
        let p = projector(&z);
        let ux: Vec<C64> = (0..l).map(|_| C64::new(gauss(&mut r), gauss(&mut r))).collect();
        let uy: Vec<C64> = (0..l).map(|_| C64::new(gauss(&mut r), gauss(&mut r))).collect();
        let ax: Vec<CVec5> = (0..l).map(|_| apply(&p, &cvec(&mut r))).collect();
        let ay: Vec<CVec5> = (0..l).map(|_| apply(&p, &cvec(&mut r))).collect();
        let norm2 = |v: &CVec5| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let kx: f64 = (0..l).map(|k| g[k] * norm2(&ax[k])).sum();
        let ky: f64 = (0..l).map(|k| g[k] * norm2(&ay[k])).sum();
        let mx: f64 = (0..l).map(|k| a[k] * a[k] / g[k] * ux[k].norm_sqr()).sum();
        let my: f64 = (0..l).map(|k| a[k] * a[k] / g[k] * uy[k].norm_sqr()).sum();
        let mut tx = [0.0; D];
        let mut ty = [0.0; D];
        for k in 0..l {
            for i in 0..D {
                tx[i] += a[k] * (ax[k][i] * ux[k].conj()).im;
                ty[i] += a[k] * (ay[k][i] * uy[k].conj()).im;
            }
        }
        let cross: f64 = (0..D).map(|i| tx[i] * ty[i]).sum();
        let s = kx * my + ky * mx - 2.0 * cross;
        let scale = (kx * my + ky * mx + 2.0 * cross.abs()).max(f64::MIN_POSITIVE);
        min_s = min_s.min(s / scale);
        let mut sq = 0.0;
        for j in 0..l {
            for m in 0..l {
                let t = (g[m] / g[j]).sqrt() * a[j] * norm2(&ax[m]).sqrt() * uy[j].norm()
                    - (g[j] / g[m]).sqrt() * a[m] * norm2(&ay[j]).sqrt() * ux[m].norm();
                sq += t * t;
            }
        }
        min_gap = min_gap.min((s - sq) / scale);
    }
    SignCheck { min_s, min_gap, samples }
}

fn need_cartesian(grid: &GridDesc) -> Result<()> {
    if grid.is_radial() {
        return Err(Error::UnsupportedGeometry("double-space sums are implemented on Cartesian1 grids".into()));
    }
    Ok(())
}

/// M_R = ΣΣ ϕ(x−y)(x−y)𝓣(x)𝓜(y)ΔxΔy with the weights of `cp`.
pub fn interaction_morawetz_1d(sys: &System, field: &Field, cp: &CutoffProfile) -> Result<f64> {
    need_cartesian(&field.grid)?;
    let d = densities(sys, field);
    let x = field.grid.nodes();
    let h = field.grid.spacing();
    let mmax = d.mdens.iter().cloned().fold(0.0, f64::max);
    let tmax = d.tdens.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let ys: Vec<usize> = (0..x.len()).filter(|&j| d.mdens[j] > 1e-30 * mmax).collect();
    let mut total = 0.0;
    for i in 0..x.len() {
        if !(d.tdens[i].abs() > 1e-30 * tmax) {
            continue;
        }
        let mut s = 0.0;
        for &j in &ys {
            let dx = x[i] - x[j];
            s += cp.varphi(dx) * dx * d.mdens[j];
        }
        total += d.tdens[i] * s;
    }
    Ok(total * h * h)
}

/// B(u) = (∫χ²𝓚)(∫χ²𝓜) − ¼(∫χ²𝓣)².
pub fn windowed_bilinear(sys: &System, field: &Field, win: &Window) -> Result<f64> {
    need_cartesian(&field.grid)?;
    let c = win.sample(&field.grid)?;
    let d = densities(sys, field);
    let w = field.grid.weights();
    let (mut k, mut m, mut t) = (0.0, 0.0, 0.0);
    for j in 0..c.len() {
        let c2 = c[j] * c[j] * w[j];
        k += c2 * d.kdens[j];
        m += c2 * d.mdens[j];
        t += c2 * d.tdens[j];
    }
    Ok(k * m - 0.25 * t * t)
}

/// Max relative change of the windowed bilinear form under the given boosts.
pub fn claim2_invariance_check(sys: &System, field: &Field, win: &Window, xis: &[f64]) -> Result<f64> {
    let b0 = windowed_bilinear(sys, field, win)?;
    let c = win.sample(&field.grid)?;
    let d = densities(sys, field);
    let w = field.grid.weights();
    // scale: (∫χ²𝓚)(∫χ²𝓜) with the largest boosted kinetic term
    let mut worst = 0.0f64;
    for &xi in xis {
        let v = gauge_transform(sys, field, xi)?;
        let b = windowed_bilinear(sys, &v, win)?;
        let dv = densities(sys, &v);
        let (mut k, mut m) = (0.0, 0.0);
        for j in 0..c.len() {
            let c2 = c[j] * c[j] * w[j];
            k += c2 * dv.kdens[j].max(d.kdens[j]);
            m += c2 * d.mdens[j];
        }
        let scale = (k * m).max(f64::MIN_POSITIVE);
        worst = worst.max((b - b0).abs() / scale);
    }
    Ok(worst)
}

/// sup_t |M_R(t)|/R for each R, over the given states.
pub fn morawetz_sup_over_r(sys: &System, states: &[Field], base: &CutoffProfile, radii: &[f64]) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    radii
        .par_iter()
        .map(|&r| {
            let cp = base.with_radius(r);
            let mut sup = 0.0f64;
            for u in states {
                sup = sup.max(interaction_morawetz_1d(sys, u, &cp)?.abs());
            }
            Ok(sup / r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morawetz::cutoff::build_cutoffs;
    use crate::morawetz::density::boost_quantum;

    #[test]
    fn angular_identities() {
        assert!(angular_identity_check(10_000, 1) <= 1e-12);
    }

    #[test]
    fn projector_kernel_and_axis_case() {
        let z = [0.0, 0.0, 2.0, 0.0, 0.0];
        let p = projector(&z);
        for j in 0..D {
            for m in 0..D {
                let want = if j == m && j != 2 { 1.0 } else { 0.0 };
                assert_eq!(p[j][m], want);
            }
        }
        let grad = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 2.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert!(apply(&p, &grad).iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn sign_claim() {
        for kappa in [0.5, 0.3, 2.0] {
            let c = claim1_sign_check(&System::canonical(kappa), 20_000, 9);
            assert!(c.min_s >= -1e-12 && c.min_gap >= -1e-12, "{:?}", c);
        }
    }

    #[test]
    fn real_state_has_no_interaction() {
        let sys = System::canonical(0.5);
        let g = GridDesc::cartesian1(256, 30.0).unwrap();
        let u = Field::from_fn(g, 2, |_, x| C64::new((-x * x / 4.0).exp(), 0.0));
        let cp = build_cutoffs(0.1, 4.0, 5).unwrap();
        assert!(interaction_morawetz_1d(&sys, &u, &cp).unwrap().abs() < 1e-14);
        let win = Window::centered(0.1, 6.0);
        assert_eq!(claim2_invariance_check(&sys, &u, &win, &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn bilinear_form_is_boost_invariant() {
        let sys = System::canonical(0.5);
        let g = GridDesc::cartesian1(2048, 40.0).unwrap();
        let u = Field::from_fn(g, 2, |k, x| C64::from_polar((-(x - k as f64).powi(2) / 5.0).exp(), 0.4 * x * x / (3.0 + x * x) + k as f64));
        let q = boost_quantum(&g);
        let xis: Vec<f64> = (-10..=10).map(|m| 3.0 * m as f64 * q).collect();
        let r = claim2_invariance_check(&sys, &u, &Window { eps: 0.2, r_scale: 8.0, center: 1.0 }, &xis).unwrap();
        assert!(r <= 1e-10, "{:e}", r);
    }
}
