use serde::Serialize;

use super::functionals::{functionals, FunctionalValues};
use crate::grid::thomas_real;
use crate::grid::{self, Field, GridDesc, RadialGeom, Spectral1};
use crate::nonlin::System;
use crate::{Error, Result, C64};

/// Solution of −γ_k Δψ_k + c_k ψ_k = f_k(ψ), c_k = σ_k α_k ω/2 + β_k.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GroundState {
    pub omega: f64,
    #[serde(skip)]
    pub profiles: Field,
    /// ‖Lψ − f(ψ)‖ / ‖f(ψ)‖ (summed over components)
    pub residual: f64,
    pub iterations: usize,
    /// Final value of the stabilising factor.
    pub stabilizer: f64,
    /// Linear coefficients c_k.
    pub c: Vec<f64>,
    /// ½(K + 𝓠) − P
    #[serde(rename = "I")]
    pub i: f64,
    /// Σ c_k ‖ψ_k‖²
    pub qcal: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "P")]
    pub p: f64,
    /// Charge Q(ψ).
    #[serde(rename = "Q")]
    pub q: f64,
    /// Sharp Gagliardo–Nirenberg constant from the general formula.
    #[serde(rename = "C5opt")]
    pub c5opt: f64,
    #[serde(skip)]
    pub functionals: FunctionalValues,
}

/// (−γΔ + c) solver for one component on the given grid.
enum Helmholtz {
    Radial { lo: Vec<f64>, di: Vec<f64>, up: Vec<f64> },
    Spectral { sp: Spectral1, symbol: Vec<C64> },
}

impl Helmholtz {
    fn new(grid: &GridDesc, gamma: f64, c: f64) -> Self {
        match grid {
            GridDesc::Radial { .. } => {
                let (lo, di, up) = RadialGeom::new(grid).tridiag();
                Helmholtz::Radial {
                    lo: lo.iter().map(|v| -gamma * v).collect(),
                    di: di.iter().map(|v| -gamma * v + c).collect(),
                    up: up.iter().map(|v| -gamma * v).collect(),
                }
            }
            GridDesc::Cartesian1 { .. } => {
                let sp = Spectral1::new(grid);
                let symbol = sp.xi.iter().map(|k| C64::new(1.0 / (gamma * k * k + c), 0.0)).collect();
                Helmholtz::Spectral { sp, symbol }
            }
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match self {
            Helmholtz::Radial { lo, di, up } => thomas_real(lo, di, up, rhs),
            Helmholtz::Spectral { sp, symbol } => {
                let mut b: Vec<C64> = rhs.iter().map(|&v| C64::new(v, 0.0)).collect();
                sp.apply_in_place(&mut b, symbol);
                b.into_iter().map(|z| z.re).collect()
            }
        }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Helmholtz::Radial { lo, di, up } => {
                let n = v.len();
                (0..n)
                    .map(|j| {
                        let mut s = di[j] * v[j];
                        if j > 0 {
                            s += lo[j] * v[j - 1];
                        }
                        if j + 1 < n {
                            s += up[j] * v[j + 1];
                        }
                        s
                    })
                    .collect()
            }
            Helmholtz::Spectral { sp, symbol } => {
                let inv: Vec<C64> = symbol.iter().map(|s| 1.0 / s).collect();
                let mut b: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
                sp.apply_in_place(&mut b, &inv);
                b.into_iter().map(|z| z.re).collect()
            }
        }
    }
}

/// c_k = σ_k α_k ω / 2 + β_k.
pub fn linear_coefficients(sys: &System, omega: f64) -> Vec<f64> {
    (0..sys.l()).map(|k| sys.sigma[k] * sys.alpha()[k] * omega / 2.0 + sys.beta()[k]).collect()
}

#[derive(Clone, Debug)]
pub struct PetviashviliOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation θ in ψ ← (1−θ)ψ + θ T(ψ); 1 is the plain iteration.
    pub relaxation: f64,
}

impl Default for PetviashviliOptions {
    fn default() -> Self {
        PetviashviliOptions { tol: 1e-10, max_iter: 5000, relaxation: 0.5 }
    }
}

/// Gaussian starting guess e^{−|x|²/2} in every component.
pub fn gaussian_guess(grid: GridDesc, l: usize) -> Field {
    Field::from_fn(grid, l, |_, x| C64::new((-x * x / 2.0).exp(), 0.0))
}

fn eval_f_real(sys: &System, psi: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let l = psi.len();
    let n = psi[0].len();
    let mut out = vec![vec![0.0; n]; l];
    let mut z = vec![C64::new(0.0, 0.0); l];
    let mut f = vec![C64::new(0.0, 0.0); l];
    for j in 0..n {
        for k in 0..l {
            z[k] = C64::new(psi[k][j], 0.0);
        }
        sys.eval_all(&z, &mut f);
        for k in 0..l {
            out[k][j] = f[k].re;
        }
    }
    out
}

fn dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// Petviashvili iteration ψ_k ← M² L_k⁻¹ f_k(ψ) with
/// M = Σ⟨L_kψ_k, ψ_k⟩ / Σ⟨f_k(ψ), ψ_k⟩ and negative values clamped to zero.
pub fn petviashvili(sys: &System, omega: f64, grid: GridDesc, init: Option<&Field>, opts: &PetviashviliOptions) -> Result<GroundState> {
    let l = sys.l();
    let c = linear_coefficients(sys, omega);
    if c.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Precondition(format!("linear coefficients {:?} must be positive", c)));
    }
    let guess;
    let init = match init {
        Some(f) => f,
        None => {
            guess = gaussian_guess(grid, l);
            &guess
        }
    };
    if init.grid != grid || init.l() != l {
        return Err(Error::Precondition("initial guess does not match grid/components".into()));
    }
    let ops: Vec<Helmholtz> = (0..l).map(|k| Helmholtz::new(&grid, sys.gamma()[k], c[k])).collect();
    let w = grid.weights();
    let mut psi: Vec<Vec<f64>> = init.comps.iter().map(|v| v.iter().map(|z| z.re.max(0.0)).collect()).collect();
    if psi.iter().all(|v| v.iter().all(|&x| x == 0.0)) {
        return Err(Error::Precondition("initial guess must be nonzero".into()));
    }
    let theta = opts.relaxation;
    let mut m = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let f = eval_f_real(sys, &psi);
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..l {
            num += dot(&w, &ops[k].apply(&psi[k]), &psi[k]);
            den += dot(&w, &f[k], &psi[k]);
        }
        if !(den > 0.0) {
            return Err(Error::NegativeDenominator(den));
        }
        m = num / den;
        if !(m > 1e-12) || !m.is_finite() {
            return Err(Error::CollapseToZero);
        }
        let m2 = m * m;
        for k in 0..l {
            let t = ops[k].solve(&f[k]);
            for (p, tv) in psi[k].iter_mut().zip(t) {
                *p = ((1.0 - theta) * *p + theta * m2 * tv).max(0.0);
            }
        }
        let norm: f64 = (0..l).map(|k| dot(&w, &psi[k], &psi[k])).sum();
        if !(norm > 1e-300) {
            return Err(Error::CollapseToZero);
        }
        let fnew = eval_f_real(sys, &psi);
        let mut rnum = 0.0;
        let mut rden = 0.0;
        for k in 0..l {
            let lp = ops[k].apply(&psi[k]);
            let d: Vec<f64> = lp.iter().zip(&fnew[k]).map(|(a, b)| a - b).collect();
            rnum += dot(&w, &d, &d);
            rden += dot(&w, &fnew[k], &fnew[k]);
        }
        residual = (rnum / rden.max(1e-300)).sqrt();
        if !residual.is_finite() {
            return Err(Error::NonConvergence { iterations: it, residual });
        }
        if residual < opts.tol && (m - 1.0).abs() <= 1e-10 {
            let profiles = Field::new(grid, psi.iter().map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect()).collect())?;
            return Ok(finish(sys, omega, c, profiles, residual, it, m));
        }
    }
    let _ = m;
    Err(Error::NonConvergence { iterations: opts.max_iter, residual })
}

fn finish(sys: &System, omega: f64, c: Vec<f64>, profiles: Field, residual: f64, iterations: usize, m: f64) -> GroundState {
    let fv = functionals(sys, &profiles);
    let qcal: f64 = profiles
        .comps
        .iter()
        .zip(&c)
        .map(|(v, ck)| ck * grid::norm_sq(&profiles.grid, v))
        .sum();
    let i = 0.5 * (fv.k + qcal) - fv.p;
    let n = profiles.grid.dim() as f64;
    let c5opt = general_constant(n, qcal);
    GroundState {
        omega,
        profiles,
        residual,
        iterations,
        stabilizer: m,
        c,
        i,
        qcal,
        k: fv.k,
        p: fv.p,
        q: fv.q,
        c5opt,
        functionals: fv,
    }
}

/// 2 (6−n)^{(n−4)/4} n^{−n/4} 𝓠^{−1/2}.
pub fn general_constant(n: f64, qcal: f64) -> f64 {
    2.0 * (6.0 - n).powf((n - 4.0) / 4.0) * n.powf(-n / 4.0) / qcal.sqrt()
}

impl GroundState {
    /// 𝓠(u) = Σ c_k ‖u_k‖² with this state's coefficients.
    pub fn qcal_of(&self, u: &Field) -> f64 {
        u.comps.iter().zip(&self.c).map(|(v, ck)| ck * grid::norm_sq(&u.grid, v)).sum()
    }

    /// Elliptic residual of the stored profiles (recomputed).
    pub fn elliptic_residual(&self, sys: &System) -> f64 {
        let grid = self.profiles.grid;
        let w = grid.weights();
        let psi: Vec<Vec<f64>> = self.profiles.comps.iter().map(|v| v.iter().map(|z| z.re).collect()).collect();
        let f = eval_f_real(sys, &psi);
        let mut rnum = 0.0;
        let mut rden = 0.0;
        for k in 0..sys.l() {
            let op = Helmholtz::new(&grid, sys.gamma()[k], self.c[k]);
            let lp = op.apply(&psi[k]);
            let d: Vec<f64> = lp.iter().zip(&f[k]).map(|(a, b)| a - b).collect();
            rnum += dot(&w, &d, &d);
            rden += dot(&w, &f[k], &f[k]);
        }
        (rnum / rden).sqrt()
    }
}
