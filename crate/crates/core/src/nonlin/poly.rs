//! Polynomials in (z, z̄) with exact complex-rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::C64;

/// Exact rational number.
pub type Rat = BigRational;
/// Exact complex rational coefficient.
pub type Coeff = Complex<Rat>;

/// Exponent key of a monomial: (powers of z, powers of z̄).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonoKey {
    pub z: Vec<u32>,
    pub zbar: Vec<u32>,
}

impl MonoKey {
    pub fn one(l: usize) -> Self {
        MonoKey { z: vec![0; l], zbar: vec![0; l] }
    }

    pub fn degree(&self) -> u32 {
        self.z.iter().sum::<u32>() + self.zbar.iter().sum::<u32>()
    }

    /// Key with z and z̄ exponents exchanged.
    pub fn swapped(&self) -> Self {
        MonoKey { z: self.zbar.clone(), zbar: self.z.clone() }
    }

    /// Components that appear in the monomial (either as z_k or z̄_k).
    pub fn support(&self) -> Vec<usize> {
        (0..self.z.len()).filter(|&k| self.z[k] + self.zbar[k] > 0).collect()
    }

    fn mul(&self, other: &MonoKey) -> MonoKey {
        MonoKey {
            z: self.z.iter().zip(&other.z).map(|(a, b)| a + b).collect(),
            zbar: self.zbar.iter().zip(&other.zbar).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Finite sum of monomials c · z^a · z̄^b in l complex variables.
///
/// Monomials are stored in a sorted map, so duplicate keys are merged on
/// insertion and zero coefficients never survive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexPolynomial {
    l: usize,
    terms: BTreeMap<MonoKey, Coeff>,
}

pub fn rat_from_i64(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn coeff_real(v: i64) -> Coeff {
    Complex::new(rat_from_i64(v), Rat::zero())
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for direct conversion
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Exact rational from a finite f64 (every finite double is dyadic).
pub fn rat_from_f64(v: f64) -> Option<Rat> {
    Rat::from_float(v)
}

pub fn coeff_to_c64(c: &Coeff) -> C64 {
    C64::new(rat_to_f64(&c.re), rat_to_f64(&c.im))
}

impl ComplexPolynomial {
    pub fn zero(l: usize) -> Self {
        ComplexPolynomial { l, terms: BTreeMap::new() }
    }

    /// The monomial `coeff · z^zexp · z̄^zbar`.
    pub fn monomial(coeff: Coeff, z: Vec<u32>, zbar: Vec<u32>) -> Self {
        assert_eq!(z.len(), zbar.len());
        let mut p = ComplexPolynomial::zero(z.len());
        p.add_term(MonoKey { z, zbar }, coeff);
        p
    }

    /// The variable z_k (0-based k).
    pub fn var(l: usize, k: usize) -> Self {
        let mut z = vec![0; l];
        z[k] = 1;
        Self::monomial(coeff_real(1), z, vec![0; l])
    }

    /// The variable z̄_k (0-based k).
    pub fn var_conj(l: usize, k: usize) -> Self {
        let mut zbar = vec![0; l];
        zbar[k] = 1;
        Self::monomial(coeff_real(1), vec![0; l], zbar)
    }

    pub fn constant(l: usize, c: Coeff) -> Self {
        let mut p = ComplexPolynomial::zero(l);
        p.add_term(MonoKey::one(l), c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.l
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MonoKey, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &MonoKey) -> Coeff {
        self.terms.get(key).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn add_term(&mut self, key: MonoKey, c: Coeff) {
        assert_eq!(key.z.len(), self.l, "monomial arity mismatch");
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn add(&self, other: &ComplexPolynomial) -> ComplexPolynomial {
        assert_eq!(self.l, other.l);
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ComplexPolynomial) -> ComplexPolynomial {
        self.add(&other.scale(&coeff_real(-1)))
    }

    pub fn scale(&self, s: &Coeff) -> ComplexPolynomial {
        let mut out = ComplexPolynomial::zero(self.l);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &ComplexPolynomial) -> ComplexPolynomial {
        assert_eq!(self.l, other.l);
        let mut out = ComplexPolynomial::zero(self.l);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                out.add_term(ka.mul(kb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> ComplexPolynomial {
        let mut out = ComplexPolynomial::constant(self.l, coeff_real(1));
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Coefficients conjugated and z ↔ z̄ exchanged.
    pub fn conjugate(&self) -> ComplexPolynomial {
        let mut out = ComplexPolynomial::zero(self.l);
        for (k, c) in &self.terms {
            out.add_term(k.swapped(), c.conj());
        }
        out
    }

    /// Formal ∂/∂z_k (0-based k), z̄_k held fixed.
    pub fn dz(&self, k: usize) -> ComplexPolynomial {
        assert!(k < self.l, "component index out of range");
        let mut out = ComplexPolynomial::zero(self.l);
        for (key, c) in &self.terms {
            let a = key.z[k];
            if a == 0 {
                continue;
            }
            let mut nk = key.clone();
            nk.z[k] -= 1;
            out.add_term(nk, c.clone() * coeff_real(a as i64));
        }
        out
    }

    /// Formal ∂/∂z̄_k (0-based k), z_k held fixed.
    pub fn dzbar(&self, k: usize) -> ComplexPolynomial {
        assert!(k < self.l, "component index out of range");
        let mut out = ComplexPolynomial::zero(self.l);
        for (key, c) in &self.terms {
            let b = key.zbar[k];
            if b == 0 {
                continue;
            }
            let mut nk = key.clone();
            nk.zbar[k] -= 1;
            out.add_term(nk, c.clone() * coeff_real(b as i64));
        }
        out
    }

    /// Imaginary-part polynomial (P − conj P)/(2i); vanishes identically
    /// exactly when P is real for every z.
    pub fn im_part(&self) -> ComplexPolynomial {
        let diff = self.sub(&self.conjugate());
        // 1/(2i) = -i/2
        let half = Rat::new(BigInt::from(-1), BigInt::from(2));
        diff.scale(&Complex::new(Rat::zero(), half))
    }

    /// Set of total degrees present.
    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|k| k.degree()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn is_homogeneous(&self, deg: u32) -> bool {
        self.terms.keys().all(|k| k.degree() == deg)
    }

    /// Sum of coefficient moduli.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.values().map(|c| coeff_to_c64(c).norm()).sum()
    }

    /// Exact evaluation at a rational point (used for small algebraic checks).
    pub fn eval_exact(&self, z: &[Coeff]) -> Coeff {
        assert_eq!(z.len(), self.l);
        let mut acc = Coeff::zero();
        for (key, c) in &self.terms {
            let mut t = c.clone();
            for k in 0..self.l {
                for _ in 0..key.z[k] {
                    t = t * z[k].clone();
                }
                for _ in 0..key.zbar[k] {
                    t = t * z[k].conj();
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self)
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.compile().eval(z)
    }
}

fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_coeff(c: &Coeff) -> String {
    if c.im.is_zero() {
        fmt_rat(&c.re)
    } else {
        format!("({},{})", fmt_rat(&c.re), fmt_rat(&c.im))
    }
}

impl fmt::Display for ComplexPolynomial {
    /// Renders in the input grammar (rationals printed as `p/q`, which the
    /// parser does not read back; use `to_f64_string` for a parseable form).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (key, c) in &self.terms {
            let (sign, mag) = if c.im.is_zero() && c.re.is_negative() {
                ("-", Complex::new(-c.re.clone(), Rat::zero()))
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            first = false;
            let mut factors = Vec::new();
            if !(mag.im.is_zero() && mag.re.is_one()) || key.degree() == 0 {
                factors.push(fmt_coeff(&mag));
            }
            for k in 0..self.l {
                match key.z[k] {
                    0 => {}
                    1 => factors.push(format!("z{}", k + 1)),
                    a => factors.push(format!("z{}^{}", k + 1, a)),
                }
                match key.zbar[k] {
                    0 => {}
                    1 => factors.push(format!("conj(z{})", k + 1)),
                    b => factors.push(format!("conj(z{})^{}", k + 1, b)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl ComplexPolynomial {
    /// Parseable rendering with decimal coefficients.
    pub fn to_f64_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (key, c) in &self.terms {
            let v = coeff_to_c64(c);
            let mut factors = vec![format!("({:e},{:e})", v.re, v.im)];
            for k in 0..self.l {
                if key.z[k] > 0 {
                    factors.push(format!("z{}^{}", k + 1, key.z[k]));
                }
                if key.zbar[k] > 0 {
                    factors.push(format!("conj(z{})^{}", k + 1, key.zbar[k]));
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

impl Serialize for ComplexPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// One factor of a compiled monomial: component index and whether conjugated.
#[derive(Clone, Copy, Debug)]
struct Factor {
    comp: usize,
    conj: bool,
}

/// Flattened polynomial for fast repeated floating-point evaluation.
/// Term t has coefficient `coef[t]` and factors `factors[start[t]..start[t+1]]`.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    l: usize,
    coef: Vec<C64>,
    start: Vec<usize>,
    factors: Vec<Factor>,
}

impl CompiledPoly {
    fn new(p: &ComplexPolynomial) -> Self {
        let mut coef = Vec::new();
        let mut start = vec![0];
        let mut factors = Vec::new();
        for (key, c) in &p.terms {
            for k in 0..p.l {
                for _ in 0..key.z[k] {
                    factors.push(Factor { comp: k, conj: false });
                }
                for _ in 0..key.zbar[k] {
                    factors.push(Factor { comp: k, conj: true });
                }
            }
            coef.push(coeff_to_c64(c));
            start.push(factors.len());
        }
        CompiledPoly { l: p.l, coef, start, factors }
    }

    pub fn nvars(&self) -> usize {
        self.l
    }

    #[inline]
    pub fn eval(&self, z: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (t, c) in self.coef.iter().enumerate() {
            let mut v = *c;
            for f in &self.factors[self.start[t]..self.start[t + 1]] {
                let x = z[f.comp];
                v *= if f.conj { x.conj() } else { x };
            }
            acc += v;
        }
        acc
    }

    /// Σ |c| Π |z_factor|, an upper bound for |P(z)| used to scale tolerances.
    pub fn abs_bound(&self, z: &[C64]) -> f64 {
        self.coef
            .iter()
            .enumerate()
            .map(|(t, c)| c.norm() * self.factors[self.start[t]..self.start[t + 1]].iter().map(|f| z[f.comp].norm()).product::<f64>())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical() -> ComplexPolynomial {
        ComplexPolynomial::var_conj(2, 0)
            .pow(2)
            .mul(&ComplexPolynomial::var(2, 1))
    }

    #[test]
    fn conjugate_is_involution() {
        let p = canonical().add(&ComplexPolynomial::monomial(
            Complex::new(rat_from_i64(0), rat_from_i64(3)),
            vec![1, 1],
            vec![1, 0],
        ));
        assert_eq!(p.conjugate().conjugate(), p);
    }

    #[test]
    fn wirtinger_of_canonical() {
        let f = canonical();
        let d1 = f.dzbar(0);
        assert_eq!(
            d1,
            ComplexPolynomial::var_conj(2, 0)
                .mul(&ComplexPolynomial::var(2, 1))
                .scale(&coeff_real(2))
        );
        assert!(f.dz(0).is_zero());
        assert_eq!(f.dz(1), ComplexPolynomial::var_conj(2, 0).pow(2));
    }

    #[test]
    fn im_part_of_real_polynomial_vanishes() {
        let z = ComplexPolynomial::var(1, 0);
        let zb = ComplexPolynomial::var_conj(1, 0);
        assert!(z.mul(&zb).im_part().is_zero());
        assert!(!z.im_part().is_zero());
    }

    #[test]
    fn display_roundtrip_shape() {
        assert_eq!(canonical().to_string(), "conj(z1)^2*z2");
    }
}
