//! Potentials, Wirtinger-derived nonlinearities and structural hypotheses.

mod hypotheses;
mod parse;
pub mod poly;
mod system;

pub use hypotheses::{
    check_hypotheses, check_mass_resonance, check_sampled_h6_h7_h8, check_structural,
    resonance_deficit, solve_sigma, HypothesisEntry, HypothesisReport, HypothesisStatus,
    ResonanceDeficit,
};
pub use parse::parse_potential;
pub use poly::{ComplexPolynomial, CompiledPoly};
pub use system::System;

use serde::Serialize;

use crate::{Error, Result, C64};

/// Problem definition: coefficients and the cubic potential F.
#[derive(Clone, Debug, Serialize)]
pub struct SystemSpec {
    pub l: usize,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    /// H4 weights; derived by [`solve_sigma`] when absent.
    pub sigma: Option<Vec<f64>>,
    #[serde(rename = "F")]
    pub potential: ComplexPolynomial,
}

impl SystemSpec {
    pub fn new(
        alpha: Vec<f64>,
        gamma: Vec<f64>,
        beta: Vec<f64>,
        sigma: Option<Vec<f64>>,
        potential: ComplexPolynomial,
    ) -> Result<Self> {
        let l = potential.nvars();
        for (name, v) in [("alpha", &alpha), ("gamma", &gamma), ("beta", &beta)] {
            if v.len() != l {
                return Err(Error::Config(format!("{} has {} entries, expected {}", name, v.len(), l)));
            }
        }
        if alpha.iter().chain(&gamma).any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Config("alpha and gamma must be positive and finite".into()));
        }
        if beta.iter().any(|&b| !(b >= 0.0 && b.is_finite())) {
            return Err(Error::Config("beta must be nonnegative and finite".into()));
        }
        if let Some(s) = &sigma {
            if s.len() != l || s.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::Config("sigma must have l positive entries".into()));
            }
        }
        Ok(SystemSpec { l, alpha, gamma, beta, sigma, potential })
    }

    /// The two-component model F = z̄₁² z₂ with α = (1,1), γ = (1, κ), β = 0.
    pub fn canonical(kappa: f64) -> Self {
        let f = parse_potential("conj(z1)^2 * z2", 2).expect("canonical potential parses");
        SystemSpec::new(vec![1.0, 1.0], vec![1.0, kappa], vec![0.0, 0.0], None, f)
            .expect("canonical spec is valid")
    }

    /// Copy with γ replaced.
    pub fn with_gamma(&self, gamma: Vec<f64>) -> Result<Self> {
        SystemSpec::new(self.alpha.clone(), gamma, self.beta.clone(), self.sigma.clone(), self.potential.clone())
    }

    pub fn with_beta(&self, beta: Vec<f64>) -> Result<Self> {
        SystemSpec::new(self.alpha.clone(), self.gamma.clone(), beta, self.sigma.clone(), self.potential.clone())
    }
}

/// f_k = ∂F/∂z̄_k + conj(∂F/∂z_k) for every k.
pub fn derive_fk(spec: &SystemSpec) -> Vec<ComplexPolynomial> {
    derive_fk_from(&spec.potential)
}

pub fn derive_fk_from(f: &ComplexPolynomial) -> Vec<ComplexPolynomial> {
    (0..f.nvars()).map(|k| f.dzbar(k).add(&f.dz(k).conjugate())).collect()
}

/// ∂F/∂z_k (0-based k).
pub fn wirtinger_dz(p: &ComplexPolynomial, k: usize) -> Result<ComplexPolynomial> {
    if k >= p.nvars() {
        return Err(Error::Index { position: 0, index: k + 1, l: p.nvars() });
    }
    Ok(p.dz(k))
}

/// ∂F/∂z̄_k (0-based k).
pub fn wirtinger_dzbar(p: &ComplexPolynomial, k: usize) -> Result<ComplexPolynomial> {
    if k >= p.nvars() {
        return Err(Error::Index { position: 0, index: k + 1, l: p.nvars() });
    }
    Ok(p.dzbar(k))
}

pub fn conjugate(p: &ComplexPolynomial) -> ComplexPolynomial {
    p.conjugate()
}

/// F at each point.
pub fn eval_f(spec: &SystemSpec, points: &[Vec<C64>]) -> Vec<C64> {
    let c = spec.potential.compile();
    points.iter().map(|z| c.eval(z)).collect()
}

/// f_k at each point (0-based k).
pub fn eval_fk(spec: &SystemSpec, k: usize, points: &[Vec<C64>]) -> Vec<C64> {
    let fk = derive_fk(spec)[k].compile();
    points.iter().map(|z| fk.eval(z)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng;
    use rand::Rng;

    fn rand_point(r: &mut impl Rng, l: usize) -> Vec<C64> {
        (0..l).map(|_| C64::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5))).collect()
    }

    #[test]
    fn canonical_fk() {
        let spec = SystemSpec::canonical(0.5);
        let fk = derive_fk(&spec);
        assert_eq!(fk[0], parse_potential("2*conj(z1)*z2", 2).unwrap());
        assert_eq!(fk[1], parse_potential("z1^2", 2).unwrap());
    }

    #[test]
    fn zero_potential_gives_zero_fk() {
        let spec = SystemSpec::new(vec![1.0; 3], vec![1.0; 3], vec![0.0; 3], None, ComplexPolynomial::zero(3)).unwrap();
        assert!(derive_fk(&spec).iter().all(|f| f.is_zero()));
    }

    #[test]
    fn scalar_fk_matches_hand_expansion_and_finite_differences() {
        let f = parse_potential("z1^2*conj(z1)", 1).unwrap();
        let fk = derive_fk_from(&f);
        assert_eq!(fk[0], parse_potential("z1^2 + 2*z1*conj(z1)", 1).unwrap());
        // f = ∂F/∂z̄ + conj(∂F/∂z) with ∂/∂z = (∂x − i∂y)/2 and ∂/∂z̄ = (∂x + i∂y)/2
        let cf = f.compile();
        let cfk = fk[0].compile();
        let mut r = rng(11);
        for _ in 0..10 {
            let z = rand_point(&mut r, 1);
            let h = 1e-6;
            let dx = (cf.eval(&[z[0] + h]) - cf.eval(&[z[0] - h])) / (2.0 * h);
            let dy = (cf.eval(&[z[0] + C64::new(0.0, h)]) - cf.eval(&[z[0] - C64::new(0.0, h)])) / (2.0 * h);
            let i = C64::new(0.0, 1.0);
            let dzb = (dx + i * dy) / 2.0;
            let dz = (dx - i * dy) / 2.0;
            let fd = dzb + dz.conj();
            let exact = cfk.eval(&z);
            assert!((fd - exact).norm() < 1e-7 * (1.0 + exact.norm()), "fd {} vs {}", fd, exact);
        }
    }

    #[test]
    fn wirtinger_matches_finite_differences_in_all_real_directions() {
        let f = parse_potential("conj(z1)^2*z2 + (0.5,-1)*z1*z2*conj(z3) + 3*z3^3", 3).unwrap();
        let cf = f.compile();
        let dzs: Vec<_> = (0..3).map(|k| f.dz(k).compile()).collect();
        let dzbs: Vec<_> = (0..3).map(|k| f.dzbar(k).compile()).collect();
        let mut r = rng(5);
        let i = C64::new(0.0, 1.0);
        for _ in 0..100 {
            let z = rand_point(&mut r, 3);
            for k in 0..3 {
                let h = 1e-5;
                let shift = |d: C64| {
                    let mut p = z.clone();
                    p[k] += d;
                    cf.eval(&p)
                };
                let dx = (shift(C64::new(h, 0.0)) - shift(C64::new(-h, 0.0))) / (2.0 * h);
                let dy = (shift(C64::new(0.0, h)) - shift(C64::new(0.0, -h))) / (2.0 * h);
                // ∂x = ∂z + ∂z̄, ∂y = i(∂z − ∂z̄)
                let ex = dzs[k].eval(&z) + dzbs[k].eval(&z);
                let ey = i * (dzs[k].eval(&z) - dzbs[k].eval(&z));
                let scale = 1.0 + ex.norm() + ey.norm();
                assert!((dx - ex).norm() / scale < 1e-7);
                assert!((dy - ey).norm() / scale < 1e-7);
            }
        }
    }

    #[test]
    fn derive_fk_is_linear() {
        let a = parse_potential("conj(z1)^2*z2", 2).unwrap();
        let b = parse_potential("(2,1)*z1*z2^2 - z1*conj(z1)*z2", 2).unwrap();
        let s = poly::coeff_real(3);
        let lhs = derive_fk_from(&a.scale(&s).add(&b));
        let fa = derive_fk_from(&a);
        let fb = derive_fk_from(&b);
        for k in 0..2 {
            assert_eq!(lhs[k], fa[k].scale(&s).add(&fb[k]));
        }
    }

    #[test]
    fn eval_examples() {
        let spec = SystemSpec::canonical(0.5);
        let one = vec![vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]];
        assert_eq!(eval_f(&spec, &one)[0], C64::new(1.0, 0.0));
        let p = vec![vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)]];
        assert_eq!(eval_fk(&spec, 0, &p)[0], C64::new(0.0, -2.0));
        let zero = vec![vec![C64::new(0.0, 0.0); 2]];
        assert_eq!(eval_f(&spec, &zero)[0], C64::new(0.0, 0.0));
    }

    #[test]
    fn growth_bounds_on_nonlinearity() {
        // |f_k(z)| ≤ C Σ|z_j|² with C the coefficient l1 norm; Re Σ f_k z̄_k = 3 Re F.
        let spec = SystemSpec::canonical(0.5);
        let fk = derive_fk(&spec);
        let cf = spec.potential.compile();
        let mut r = rng(3);
        for _ in 0..1000 {
            let z = rand_point(&mut r, 2);
            let s2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
            let mut pair = C64::new(0.0, 0.0);
            for k in 0..2 {
                let v = fk[k].eval(&z);
                assert!(v.norm() <= fk[k].coeff_l1() * s2 + 1e-14);
                pair += v * z[k].conj();
            }
            let three_f = 3.0 * cf.eval(&z).re;
            assert!((pair.re - three_f).abs() <= 1e-12 * (1.0 + three_f.abs()));
        }
    }
}
