//! Smooth window χ, the convolved weight φ, its radial mean ϕ and the
//! companion weight φ₁.

use std::sync::Arc;

use serde::Serialize;

use crate::grid::{ball_volume, radial_convolution, CompactProfile, CubicSpline};
use crate::{Error, Result};

/// Quintic smoothstep window: 1 on ρ ≤ 1−ε, 0 on ρ ≥ 1.
pub fn chi(rho: f64, eps: f64) -> f64 {
    if rho <= 1.0 - eps {
        1.0
    } else if rho >= 1.0 {
        0.0
    } else {
        let s = (1.0 - rho) / eps;
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

const SPLINE_NODES: usize = 801;

/// Unit-scale profiles (R = 1) for one ε; every radius is a rescaling.
#[derive(Debug)]
struct UnitCutoff {
    eps: f64,
    n: usize,
    phi: CubicSpline,
    phi1: CubicSpline,
    /// ∫₀² φ
    area: f64,
}

fn power_profile(eps: f64, p: i32) -> CompactProfile {
    CompactProfile::new(move |r| chi(r, eps).powi(p), 1.0, vec![1.0 - eps])
}

impl UnitCutoff {
    fn build(eps: f64, n: usize) -> Result<Self> {
        let radii: Vec<f64> = (0..SPLINE_NODES).map(|i| 2.0 * i as f64 / (SPLINE_NODES - 1) as f64).collect();
        let norm = ball_volume(n);
        let c2 = power_profile(eps, 2);
        let c3 = power_profile(eps, 3);
        let mut y = radial_convolution(&c2, &c2, n, &radii)?;
        let mut y1 = radial_convolution(&c3, &c2, n, &radii)?;
        for v in y.iter_mut().chain(y1.iter_mut()) {
            *v /= norm;
        }
        let phi = CubicSpline::clamped(radii.clone(), y, 0.0, 0.0);
        let phi1 = CubicSpline::clamped(radii, y1, 0.0, 0.0);
        let area = phi.integral(2.0);
        Ok(UnitCutoff { eps, n, phi, phi1, area })
    }
}

/// Cutoff weights at scale R.
#[derive(Clone, Debug)]
pub struct CutoffProfile {
    unit: Arc<UnitCutoff>,
    pub r_scale: f64,
}

/// Builds χ, φ, ϕ and φ₁ for plateau width `eps` at scale `r_scale` in ℝⁿ.
pub fn build_cutoffs(eps: f64, r_scale: f64, n: usize) -> Result<CutoffProfile> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Precondition(format!("cutoff width must lie in (0, 1/2), got {}", eps)));
    }
    if !(r_scale > 0.0) || n < 2 {
        return Err(Error::Precondition("cutoff needs R > 0 and n >= 2".into()));
    }
    Ok(CutoffProfile { unit: Arc::new(UnitCutoff::build(eps, n)?), r_scale })
}

impl CutoffProfile {
    /// Same profiles at another scale (no new quadrature).
    pub fn with_radius(&self, r_scale: f64) -> CutoffProfile {
        CutoffProfile { unit: self.unit.clone(), r_scale }
    }

    pub fn eps(&self) -> f64 {
        self.unit.eps
    }

    pub fn dim(&self) -> usize {
        self.unit.n
    }

    pub fn chi(&self, r: f64) -> f64 {
        chi(r / self.r_scale, self.unit.eps)
    }

    fn unit_phi(&self, rho: f64) -> f64 {
        if rho >= 2.0 {
            0.0
        } else {
            self.unit.phi.eval(rho)
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.unit_phi(r.abs() / self.r_scale)
    }

    /// ϕ(r) = (1/r)∫₀^r φ.
    pub fn varphi(&self, r: f64) -> f64 {
        let rho = r.abs() / self.r_scale;
        if rho < 1e-9 {
            self.unit.phi.eval(0.0)
        } else if rho >= 2.0 {
            self.unit.area / rho
        } else {
            self.unit.phi.integral(rho) / rho
        }
    }

    /// ϕ'(r) = (φ − ϕ)/r.
    pub fn varphi_deriv(&self, r: f64) -> f64 {
        let r = r.abs();
        if r / self.r_scale < 1e-9 {
            0.0
        } else {
            (self.phi(r) - self.varphi(r)) / r
        }
    }

    /// φ₁(x, y), radial in x − y.
    pub fn phi1(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        self.phi1_radial(d)
    }

    pub fn phi1_radial(&self, d: f64) -> f64 {
        let rho = d / self.r_scale;
        if rho >= 2.0 {
            0.0
        } else {
            self.unit.phi1.eval(rho)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CutoffItem {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
    pub witness: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CutoffReport {
    pub items: Vec<CutoffItem>,
    /// (name, smallest fitted constant over R, largest)
    pub constants: Vec<(String, f64, f64)>,
}

impl CutoffReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
}

fn fd_divergence_and_jacobian(cp: &CutoffProfile, x: &[f64; 5]) -> (f64, [[f64; 5]; 5]) {
    let h = 1e-5 * cp.r_scale;
    let field = |p: &[f64; 5]| {
        let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let v = cp.varphi(r);
        let mut out = [0.0; 5];
        for m in 0..5 {
            out[m] = v * p[m];
        }
        out
    };
    let mut jac = [[0.0; 5]; 5];
    for j in 0..5 {
        let mut a = *x;
        let mut b = *x;
        a[j] += h;
        b[j] -= h;
        let (fa, fb) = (field(&a), field(&b));
        for m in 0..5 {
            jac[j][m] = (fa[m] - fb[m]) / (2.0 * h);
        }
    }
    let div = (0..5).map(|j| jac[j][j]).sum();
    (div, jac)
}

/// Numerical check of the cutoff properties: ϕ ≥ φ, the decay bounds with
/// fitted constants (uniform over `rset`), the trace identity
/// div(ϕx) = 4ϕ + φ, the Jacobian decomposition, and |φ − φ₁| ≤ Cε.
///
/// `rho` are radii in units of R and must cover [0, 4].
pub fn cutoff_property_suite(cp: &CutoffProfile, rho: &[f64], rset: &[f64], seed: u64) -> Result<CutoffReport> {
    use rand::Rng;
    let lo = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rho.iter().cloned().fold(0.0, f64::max);
    if lo > 0.0 || hi < 4.0 || rset.is_empty() {
        return Err(Error::Precondition("sample radii must cover [0, 4R]".into()));
    }
    if cp.dim() != 5 {
        return Err(Error::UnsupportedGeometry("cutoff suite is written for n = 5".into()));
    }
    let eps = cp.eps();
    let mut items = Vec::new();
    let mut fits: Vec<(&str, Vec<f64>)> = vec![("varphi", vec![]), ("gradVarphi", vec![]), ("varphiMinusPhi", vec![]), ("phiMinusPhi1", vec![])];
    let mut min_gap = (f64::INFINITY, 0.0);
    let mut trace = (0.0f64, 0.0);
    let mut decomp = (0.0f64, 0.0);
    let mut rng = crate::util::rng(seed);
    for &rr in rset {
        let c = cp.with_radius(rr);
        let mut cmax = [0.0f64; 4];
        for &p in rho {
            let r = p * rr;
            let (phi, vphi) = (c.phi(r), c.varphi(r));
            let gap = vphi - phi;
            if gap < min_gap.0 {
                min_gap = (gap, r);
            }
            cmax[0] = cmax[0].max(vphi.abs() / (rr / r).min(1.0));
            if r > 0.0 {
                cmax[1] = cmax[1].max(c.varphi_deriv(r).abs() / (1.0 / rr).min(rr / (r * r)));
                cmax[2] = cmax[2].max(gap.abs() / (r / rr).min(rr / r));
            }
            cmax[3] = cmax[3].max((phi - c.phi1_radial(r)).abs() / eps);
        }
        for (slot, v) in fits.iter_mut().zip(cmax) {
            slot.1.push(v);
        }
        for _ in 0..50 {
            let mut x = [0.0; 5];
            let target = rng.gen_range(0.05..3.5) * rr;
            for v in x.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            for v in x.iter_mut() {
                *v *= target / nx;
            }
            let r = target;
            let (div, jac) = fd_divergence_and_jacobian(&c, &x);
            let (phi, vphi) = (c.phi(r), c.varphi(r));
            let scale = vphi.abs().max(phi.abs()).max(1e-300);
            let e = (div - (4.0 * vphi + phi)).abs() / scale;
            if e > trace.0 {
                trace = (e, r);
            }
            for j in 0..5 {
                for m in 0..5 {
                    let pjm = if j == m { 1.0 } else { 0.0 } - x[j] * x[m] / (r * r);
                    let want = phi * if j == m { 1.0 } else { 0.0 } + (vphi - phi) * pjm;
                    let e = (jac[j][m] - want).abs() / scale;
                    if e > decomp.0 {
                        decomp = (e, r);
                    }
                }
            }
        }
    }
    items.push(CutoffItem { name: "varphiMinusPhiNonnegative".into(), value: min_gap.0, tol: -1e-10, pass: min_gap.0 >= -1e-10, witness: min_gap.1 });
    items.push(CutoffItem { name: "traceIdentity".into(), value: trace.0, tol: 1e-6, pass: trace.0 <= 1e-6, witness: trace.1 });
    items.push(CutoffItem { name: "jacobianDecomposition".into(), value: decomp.0, tol: 1e-5, pass: decomp.0 <= 1e-5, witness: decomp.1 });
    let phi0 = cp.phi(0.0);
    let lower = (1.0 - eps).powi(5);
    items.push(CutoffItem { name: "phiAtOrigin".into(), value: phi0, tol: lower, pass: phi0 >= lower - 1e-9 && phi0 <= 1.0 + 1e-9, witness: 0.0 });
    let mut constants = Vec::new();
    for (name, v) in fits {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(0.0, f64::max);
        // a bounded fit: finite, and not drifting across scales
        let ratio = if lo > 0.0 { hi / lo } else if hi == 0.0 { 1.0 } else { f64::INFINITY };
        items.push(CutoffItem { name: format!("{}BoundUniform", name), value: ratio, tol: 2.0, pass: hi.is_finite() && ratio <= 2.0, witness: hi });
        constants.push((name.to_string(), lo, hi));
    }
    let report = CutoffReport { items, constants };
    if let Some(bad) = report.items.iter().find(|i| !i.pass) {
        return Err(Error::IdentityFailure(format!("cutoff item {} = {:e} (tol {:e}) at r = {}", bad.name, bad.value, bad.tol, bad.witness)));
    }
    Ok(report)
}
