//! Gauss–Legendre quadrature, radial convolution and cubic splines.

use std::sync::Arc;

use super::sphere_area;
use crate::{Error, Result};

/// Nodes and weights of the q-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    let qf = q as f64;
    for i in 0..(q + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=q {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pq = if q == 0 { 1.0 } else if q == 1 { z } else { p1 };
            let pqm1 = if q == 1 { 1.0 } else { p0 };
            dp = qf * (z * pq - pqm1) / (z * z - 1.0);
            let dz = pq / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[q - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[q - 1 - i] = wi;
    }
    (x, w)
}

/// A radial function on r ≥ 0 with compact support.
pub trait RadialProfile: Send + Sync {
    fn eval(&self, r: f64) -> f64;
    /// f(r) = 0 for r ≥ support.
    fn support(&self) -> f64;
    /// Radii where the profile or a low derivative is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Closure-backed [`RadialProfile`].
#[derive(Clone)]
pub struct CompactProfile {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: f64,
    breaks: Vec<f64>,
}

impl CompactProfile {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, support: f64, breaks: Vec<f64>) -> Self {
        CompactProfile { f: Arc::new(f), support, breaks }
    }
}

impl RadialProfile for CompactProfile {
    fn eval(&self, r: f64) -> f64 {
        if r >= self.support {
            0.0
        } else {
            (self.f)(r)
        }
    }
    fn support(&self) -> f64 {
        self.support
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}

const GL_POINTS: usize = 16;

fn composite(a: f64, b: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>), mut f: impl FnMut(f64) -> f64) -> f64 {
    let (x, w) = rule;
    let hp = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * hp;
        let mid = lo + 0.5 * hp;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(mid + 0.5 * hp * xi);
        }
    }
    s * 0.5 * hp
}

fn sorted_cuts(lo: f64, hi: f64, pts: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v = vec![lo, hi];
    v.extend(pts.into_iter().filter(|&p| p > lo && p < hi));
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    v
}

fn convolve_once(f: &dyn RadialProfile, g: &dyn RadialProfile, n: usize, r: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let sg = g.support();
    let mut gbreaks = g.breakpoints();
    gbreaks.push(sg);
    let s_outer = sphere_area(n - 1);
    let sin_pow_total = sphere_area(n) / sphere_area(n - 1);
    let nm2 = n as i32 - 2;
    let inner = |rho: f64| -> f64 {
        if r == 0.0 || rho == 0.0 {
            return g.eval(r.max(rho)) * sin_pow_total;
        }
        let dmin = (r - rho).abs();
        if dmin >= sg {
            return 0.0;
        }
        let denom = 2.0 * r * rho;
        let theta_of = |b: f64| {
            let c = (r * r + rho * rho - b * b) / denom;
            if c > -1.0 && c < 1.0 {
                Some(c.acos())
            } else {
                None
            }
        };
        let cuts = sorted_cuts(0.0, std::f64::consts::PI, gbreaks.iter().filter_map(|&b| theta_of(b)));
        let mut s = 0.0;
        for win in cuts.windows(2) {
            let mid = 0.5 * (win[0] + win[1]);
            let dmid = (r * r + rho * rho - denom * mid.cos()).max(0.0).sqrt();
            if dmid >= sg {
                continue;
            }
            s += composite(win[0], win[1], panels, rule, |t| {
                let d = (r * r + rho * rho - denom * t.cos()).max(0.0).sqrt();
                g.eval(d) * t.sin().powi(nm2)
            });
        }
        s
    };
    let sf = f.support();
    let mut pts = f.breakpoints();
    for &b in &gbreaks {
        pts.push((r - b).abs());
        pts.push(r + b);
    }
    let lo = if r > sg { r - sg } else { 0.0 };
    let hi = sf.min(r + sg);
    if hi <= lo {
        return 0.0;
    }
    let cuts = sorted_cuts(lo, hi, pts);
    let mut total = 0.0;
    for win in cuts.windows(2) {
        total += composite(win[0], win[1], panels, rule, |rho| f.eval(rho) * rho.powi(n as i32 - 1) * inner(rho));
    }
    s_outer * total
}

/// (f * g)(r) for radial f, g on ℝⁿ by nested composite Gauss–Legendre
/// quadrature, split at the kinks of both profiles. The panel count doubles
/// until successive estimates agree to 1e−10 relative; failure to reach
/// 1e−6 raises `QuadratureNonConvergence`.
pub fn radial_convolution_at(f: &dyn RadialProfile, g: &dyn RadialProfile, n: usize, r: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Precondition("radial convolution needs n >= 2".into()));
    }
    let rule = gauss_legendre(GL_POINTS);
    let mut prev = convolve_once(f, g, n, r, 1, &rule);
    let floor = 1e-300;
    let mut change = f64::INFINITY;
    let mut panels = 2;
    while panels <= 32 {
        let cur = convolve_once(f, g, n, r, panels, &rule);
        change = (cur - prev).abs();
        if change <= 1e-10 * cur.abs().max(floor) || cur.abs() < floor {
            return Ok(cur);
        }
        prev = cur;
        panels *= 2;
    }
    if change <= 1e-6 * prev.abs() {
        Ok(prev)
    } else {
        Err(Error::QuadratureNonConvergence { estimate: prev, change })
    }
}

/// (f * g) sampled at each radius.
pub fn radial_convolution(f: &dyn RadialProfile, g: &dyn RadialProfile, n: usize, radii: &[f64]) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    radii.par_iter().map(|&r| radial_convolution_at(f, g, n, r)).collect()
}

/// Clamped cubic spline with exact antiderivative.
#[derive(Clone, Debug)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
    cum: Vec<f64>,
}

impl CubicSpline {
    /// Spline through (x_i, y_i) with prescribed end slopes.
    pub fn clamped(x: Vec<f64>, y: Vec<f64>, d0: f64, dn: f64) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        // second-derivative moments via the standard tridiagonal system
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        b[0] = 2.0 * h[0];
        c[0] = h[0];
        d[0] = 6.0 * ((y[1] - y[0]) / h[0] - d0);
        for i in 1..n - 1 {
            a[i] = h[i - 1];
            b[i] = 2.0 * (h[i - 1] + h[i]);
            c[i] = h[i];
            d[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
        }
        a[n - 1] = h[n - 2];
        b[n - 1] = 2.0 * h[n - 2];
        d[n - 1] = 6.0 * (dn - (y[n - 1] - y[n - 2]) / h[n - 2]);
        let m = thomas_real(&a, &b, &c, &d);
        let mut cum = vec![0.0; n];
        for i in 0..n - 1 {
            let hi = h[i];
            cum[i + 1] = cum[i] + hi * (y[i] + y[i + 1]) / 2.0 - hi.powi(3) * (m[i] + m[i + 1]) / 24.0;
        }
        CubicSpline { x, y, m, cum }
    }

    fn seg(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.seg(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let i = self.seg(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h + (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    /// ∫_{x_0}^{t} s.
    pub fn integral(&self, t: f64) -> f64 {
        let i = self.seg(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        // antiderivative in b from 0: ∫ s dx = h ∫_0^b s db'
        let ia = h * (0.5 - 0.5 * a * a); // ∫ a dx from x_i
        let ib = h * 0.5 * b * b;
        let ic = h * h * h / 6.0 * ((-(a.powi(4)) / 4.0 + a * a / 2.0) - (-0.25 + 0.5)); // ∫ (a³ − a) dx
        let id = h * h * h / 6.0 * (b.powi(4) / 4.0 - b * b / 2.0);
        self.cum[i] + ia * self.y[i] + ib * self.y[i + 1] + ic * self.m[i] + id * self.m[i + 1]
    }
}

/// Solve a real tridiagonal system (a = sub, b = diag, c = super).
pub(crate) fn thomas_real(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut dp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    dp[0] = d[0] / b[0];
    for i in 1..n {
        let den = b[i] - a[i] * cp[i - 1];
        cp[i] = if i + 1 < n { c[i] / den } else { 0.0 };
        dp[i] = (d[i] - a[i] * dp[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = dp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = dp[i] - cp[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ball_volume;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for q in [1usize, 2, 5, 16] {
            let (x, w) = gauss_legendre(q);
            for p in 0..(2 * q) {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "q={} p={}", q, p);
            }
        }
    }

    #[test]
    fn ball_indicator_self_convolution_at_origin() {
        let ind = CompactProfile::new(|_| 1.0, 1.0, vec![]);
        let v = radial_convolution_at(&ind, &ind, 5, 0.0).unwrap();
        assert!((v - ball_volume(5)).abs() < 1e-5);
        let zero = CompactProfile::new(|_| 0.0, 1.0, vec![]);
        assert_eq!(radial_convolution_at(&ind, &zero, 5, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn ball_indicator_overlap_volume() {
        // overlap of two unit balls in ℝ³ at distance d: π(4 + d)(2 − d)²/12
        let ind = CompactProfile::new(|_| 1.0, 1.0, vec![]);
        for d in [0.2, 0.7, 1.3, 1.9] {
            let v = radial_convolution_at(&ind, &ind, 3, d).unwrap();
            let exact = std::f64::consts::PI * (4.0 + d) * (2.0 - d).powi(2) / 12.0;
            assert!((v - exact).abs() < 1e-8 * exact, "d={} got {} want {}", d, v, exact);
        }
    }

    #[test]
    fn convolution_commutes() {
        let f = CompactProfile::new(|r| (1.0 - r * r).powi(2), 1.0, vec![]);
        let g = CompactProfile::new(|r| if r < 0.5 { 1.0 } else { (1.5 - r) * (1.5 - r) * 4.0 * (r - 0.5).cos() }, 1.5, vec![0.5]);
        for i in 0..20 {
            let r = 0.13 * i as f64;
            let a = radial_convolution_at(&f, &g, 5, r).unwrap();
            let b = radial_convolution_at(&g, &f, 5, r).unwrap();
            assert!((a - b).abs() <= 1e-8 * a.abs().max(1e-12), "r={} {} {}", r, a, b);
        }
    }

    #[test]
    fn spline_reproduces_cubics() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.3).collect();
        let f = |t: f64| 1.0 + 2.0 * t - t * t + 0.5 * t * t * t;
        let df = |t: f64| 2.0 - 2.0 * t + 1.5 * t * t;
        let ff = |t: f64| t + t * t - t * t * t / 3.0 + 0.125 * t.powi(4);
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let s = CubicSpline::clamped(x, y, df(0.0), df(3.0));
        for i in 0..=60 {
            let t = i as f64 * 0.05;
            assert!((s.eval(t) - f(t)).abs() < 1e-12);
            assert!((s.deriv(t) - df(t)).abs() < 1e-11);
            assert!((s.integral(t) - ff(t)).abs() < 1e-11, "t={} {} {}", t, s.integral(t), ff(t));
        }
    }
}
