//! Independent oracle for radial solutions of −Δφ + cφ = bφ² in ℝⁿ.

use crate::grid::GridDesc;
use crate::{Error, Result};

/// Outcome of one trial integration from the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Fate {
    /// φ crossed zero: φ(0) too large.
    Crossed,
    /// φ' turned positive while φ > 0: φ(0) too small.
    Turned,
    /// Reached the end radius without either event.
    Undecided,
}

struct Ode {
    c: f64,
    b: f64,
    n: f64,
}

impl Ode {
    #[inline]
    fn rhs(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        [y[1], self.c * y[0] - self.b * y[0] * y[0] - (self.n - 1.0) / r * y[1]]
    }
}

/// Dormand–Prince 5(4) step; returns (y5, error estimate).
fn dp45(ode: &Ode, r: f64, y: [f64; 2], h: f64) -> ([f64; 2], f64) {
    let add = |y: [f64; 2], ks: &[([f64; 2], f64)]| {
        let mut o = y;
        for (k, a) in ks {
            o[0] += h * a * k[0];
            o[1] += h * a * k[1];
        }
        o
    };
    let k1 = ode.rhs(r, y);
    let k2 = ode.rhs(r + h / 5.0, add(y, &[(k1, 1.0 / 5.0)]));
    let k3 = ode.rhs(r + 3.0 * h / 10.0, add(y, &[(k1, 3.0 / 40.0), (k2, 9.0 / 40.0)]));
    let k4 = ode.rhs(r + 4.0 * h / 5.0, add(y, &[(k1, 44.0 / 45.0), (k2, -56.0 / 15.0), (k3, 32.0 / 9.0)]));
    let k5 = ode.rhs(
        r + 8.0 * h / 9.0,
        add(y, &[(k1, 19372.0 / 6561.0), (k2, -25360.0 / 2187.0), (k3, 64448.0 / 6561.0), (k4, -212.0 / 729.0)]),
    );
    let k6 = ode.rhs(
        r + h,
        add(y, &[(k1, 9017.0 / 3168.0), (k2, -355.0 / 33.0), (k3, 46732.0 / 5247.0), (k4, 49.0 / 176.0), (k5, -5103.0 / 18656.0)]),
    );
    let y5 = add(y, &[(k1, 35.0 / 384.0), (k3, 500.0 / 1113.0), (k4, 125.0 / 192.0), (k5, -2187.0 / 6784.0), (k6, 11.0 / 84.0)]);
    let k7 = ode.rhs(r + h, y5);
    let e = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    let ks = [k1, k2, k3, k4, k5, k6, k7];
    let mut err = [0.0; 2];
    for (k, ei) in ks.iter().zip(e) {
        err[0] += h * ei * k[0];
        err[1] += h * ei * k[1];
    }
    let sc0 = 1e-13 + 1e-12 * y[0].abs().max(y5[0].abs());
    let sc1 = 1e-13 + 1e-12 * y[1].abs().max(y5[1].abs());
    (y5, (err[0] / sc0).abs().max((err[1] / sc1).abs()))
}

/// Even power series φ = Σ a_j r^{2j} about the origin.
fn series(ode: &Ode, phi0: f64, terms: usize) -> Vec<f64> {
    let mut a = vec![phi0];
    for k in 0..terms - 1 {
        let conv: f64 = (0..=k).map(|i| a[i] * a[k - i]).sum();
        let rhs = ode.c * a[k] - ode.b * conv;
        let kk = k as f64;
        a.push(rhs / ((2.0 * kk + 2.0) * (2.0 * kk + ode.n)));
    }
    a
}

fn series_eval(a: &[f64], r: f64) -> (f64, f64, f64) {
    let r2 = r * r;
    let (mut v, mut d, mut s) = (0.0, 0.0, 0.0);
    for (j, &aj) in a.iter().enumerate().rev() {
        let jf = j as f64;
        v = v * r2 + aj;
        if j > 0 {
            d = d * r2 + 2.0 * jf * aj;
            s = s * r2 + 2.0 * jf * (2.0 * jf - 1.0) * aj;
        }
    }
    (v, d * r, s)
}

/// Radius up to which the origin series is used.
fn series_radius(ode: &Ode, phi0: f64) -> f64 {
    0.1 / (ode.c + ode.b * phi0).sqrt()
}

const SERIES_TERMS: usize = 24;

/// Integrate from the origin; records (r, φ, φ') at accepted steps.
fn integrate(ode: &Ode, phi0: f64, r_end: f64, h_max: f64, record: bool) -> (Fate, Vec<(f64, f64, f64)>) {
    let r0 = series_radius(ode, phi0);
    let coef = series(ode, phi0, SERIES_TERMS);
    let (v0, d0, _) = series_eval(&coef, r0);
    let mut y = [v0, d0];
    let mut r = r0;
    let mut h: f64 = r0;
    let mut path = Vec::new();
    if record {
        path.push((r, y[0], y[1]));
    }
    while r < r_end {
        let step = h.min(h_max).min(r_end - r);
        let (yn, err) = dp45(ode, r, y, step);
        if err <= 1.0 {
            r += step;
            y = yn;
            if record {
                path.push((r, y[0], y[1]));
            }
            if y[0] < 0.0 {
                return (Fate::Crossed, path);
            }
            if y[1] > 0.0 {
                return (Fate::Turned, path);
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = step * fac;
    }
    (Fate::Undecided, path)
}

/// Monotone decaying radial profile from the shooting method.
#[derive(Clone, Debug)]
pub struct ShootingProfile {
    pub c: f64,
    pub b: f64,
    pub n: usize,
    pub phi0: f64,
    /// Accepted integration nodes (r, φ, φ') up to the trusted radius.
    pub nodes: Vec<(f64, f64, f64)>,
    /// Beyond this radius the profile is continued by the linear decay law.
    pub r_cut: f64,
    /// Below this radius the origin power series is used.
    pub r_series: f64,
    coef: Vec<f64>,
}

impl ShootingProfile {
    fn second(&self, r: f64, phi: f64, dphi: f64) -> f64 {
        self.c * phi - self.b * phi * phi - (self.n as f64 - 1.0) / r * dphi
    }

    /// Decaying solution of the linearised equation, up to a constant.
    fn tail_shape(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        let x = self.c.sqrt() * r;
        (-x).exp() * r.powf(-(nf - 1.0) / 2.0) * (1.0 + (nf - 1.0) * (nf - 3.0) / (8.0 * x))
    }

    /// φ(r) by quintic Hermite interpolation (φ, φ', φ'' at nodes).
    pub fn eval(&self, r: f64) -> f64 {
        self.eval3(r).0
    }

    /// (φ, φ', φ'') at r.
    pub fn eval3(&self, r: f64) -> (f64, f64, f64) {
        if r <= self.r_series {
            return series_eval(&self.coef, r);
        }
        if r >= self.r_cut {
            let (_, pc, _) = *self.nodes.last().unwrap();
            let amp = pc / self.tail_shape(self.r_cut);
            let d = 1e-6 * r.max(1.0);
            let f = |s: f64| amp * self.tail_shape(s);
            let v = f(r);
            let d1 = (f(r + d) - f(r - d)) / (2.0 * d);
            let d2 = (f(r + d) - 2.0 * v + f(r - d)) / (d * d);
            return (v, d1, d2);
        }
        let i = match self.nodes.binary_search_by(|p| p.0.partial_cmp(&r).unwrap()) {
            Ok(i) => return {
                let (rr, p, dp) = self.nodes[i];
                (p, dp, self.second(rr, p, dp))
            },
            Err(i) => i - 1,
        };
        let (r0, p0, d0) = self.nodes[i];
        let (r1, p1, d1) = self.nodes[i + 1];
        let s0 = self.second(r0, p0, d0);
        let s1 = self.second(r1, p1, d1);
        let h = r1 - r0;
        let t = (r - r0) / h;
        // quintic Hermite basis
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        let h3 = 0.5 * t3 - t4 + 0.5 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let v = h0 * p0 + h * h1 * d0 + h * h * h2 * s0 + h * h * h3 * s1 + h * h4 * d1 + h5 * p1;
        // derivatives of the basis
        let dh0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let dh1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let dh2 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
        let dh3 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
        let dh4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let dh5 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
        let dv = (dh0 * p0 + h * dh1 * d0 + h * h * dh2 * s0 + h * h * dh3 * s1 + h * dh4 * d1 + dh5 * p1) / h;
        let ddh0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
        let ddh1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
        let ddh2 = 1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3;
        let ddh3 = 3.0 * t - 12.0 * t2 + 10.0 * t3;
        let ddh4 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
        let ddh5 = 60.0 * t - 180.0 * t2 + 120.0 * t3;
        let ddv = (ddh0 * p0 + h * ddh1 * d0 + h * h * ddh2 * s0 + h * h * ddh3 * s1 + h * ddh4 * d1 + ddh5 * p1) / (h * h);
        (v, dv, ddv)
    }

    /// Samples at the nodes of a radial grid.
    pub fn sample(&self, grid: &GridDesc) -> Vec<f64> {
        grid.nodes().iter().map(|&r| self.eval(r)).collect()
    }

    /// max over interior points of |φ'' + (n−1)/r φ' − cφ + bφ²| / (c φ(0)),
    /// evaluated between integration nodes where interpolation error is largest.
    pub fn ode_residual(&self) -> f64 {
        let scale = self.c * self.phi0;
        let mut worst: f64 = 0.0;
        let inner = (1..8).map(|i| self.r_series * i as f64 / 8.0);
        let mids = self.nodes.windows(2).map(|w| 0.5 * (w[0].0 + w[1].0));
        for r in inner.chain(mids) {
            let (p, d, s) = self.eval3(r);
            let res = s + (self.n as f64 - 1.0) / r * d - self.c * p + self.b * p * p;
            worst = worst.max(res.abs() / scale);
        }
        worst
    }
}

/// Radial ground state of −Δφ + cφ = bφ² in ℝⁿ by bisection on φ(0).
pub fn shooting_oracle(c: f64, b: f64, n: usize) -> Result<ShootingProfile> {
    if !(c > 0.0 && b > 0.0) {
        return Err(Error::Precondition("c and b must be positive".into()));
    }
    if !(3..=5).contains(&n) {
        return Err(Error::Precondition("shooting oracle supports n in {3,4,5}".into()));
    }
    let ode = Ode { c, b, n: n as f64 };
    // work in the scale where the decay length is one
    let r_end = 80.0 / c.sqrt();
    let h_max = 0.005 / c.sqrt();
    let mut lo = c / b * (1.0 + 1e-6);
    let (fate_lo, _) = integrate(&ode, lo, r_end, h_max, false);
    if fate_lo != Fate::Turned {
        return Err(Error::BisectionFailure(format!("lower start {:e} did not turn back ({:?})", lo, fate_lo)));
    }
    let mut hi = 2.0 * lo;
    let mut tries = 0;
    loop {
        match integrate(&ode, hi, r_end, h_max, false).0 {
            Fate::Crossed => break,
            _ => {
                lo = hi;
                hi *= 2.0;
            }
        }
        tries += 1;
        if tries > 60 {
            return Err(Error::BisectionFailure("no crossing initial value found".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match integrate(&ode, mid, r_end, h_max, false).0 {
            Fate::Crossed => hi = mid,
            Fate::Turned => lo = mid,
            Fate::Undecided => {
                lo = mid;
                break;
            }
        }
    }
    let (_, path_lo) = integrate(&ode, lo, r_end, h_max, true);
    let (_, path_hi) = integrate(&ode, hi, r_end, h_max, true);
    // trust the lower trajectory while both brackets agree to 1e−9 of φ(0)
    // and the profile is still decreasing
    let phi0 = lo;
    let mut keep = Vec::new();
    let mut k_hi = 0;
    for &(r, p, d) in &path_lo {
        while k_hi + 1 < path_hi.len() && path_hi[k_hi + 1].0 <= r {
            k_hi += 1;
        }
        let agree = (path_hi[k_hi].0 - r).abs() > 0.0 || (path_hi[k_hi].1 - p).abs() <= 1e-9 * phi0;
        if !agree || d >= 0.0 || p <= 1e-7 * phi0 {
            break;
        }
        keep.push((r, p, d));
    }
    if keep.len() < 10 {
        return Err(Error::BisectionFailure("separatrix trajectory too short".into()));
    }
    let r_cut = keep.last().unwrap().0;
    let r_series = series_radius(&ode, phi0);
    let coef = series(&ode, phi0, SERIES_TERMS);
    Ok(ShootingProfile { c, b, n, phi0, nodes: keep, r_cut, r_series, coef })
}
