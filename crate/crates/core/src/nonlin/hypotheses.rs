//! Structural and sampled checks of the hypotheses on F and f_k.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;

use super::poly::{coeff_to_c64, rat_from_i64, rat_to_f64, ComplexPolynomial, MonoKey, Rat};
use super::{derive_fk, SystemSpec};
use crate::util::rng;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HypothesisStatus {
    Verified,
    /// Passed a sampled sufficient condition; weaker than `Verified`.
    VerifiedSampled,
    Failed,
    NotCheckable,
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisEntry {
    pub status: HypothesisStatus,
    pub evidence: String,
}

impl HypothesisEntry {
    fn new(status: HypothesisStatus, evidence: impl Into<String>) -> Self {
        HypothesisEntry { status, evidence: evidence.into() }
    }

    pub fn passed(&self) -> bool {
        matches!(self.status, HypothesisStatus::Verified | HypothesisStatus::VerifiedSampled)
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct ResonanceDeficit {
    /// max_k |α_k/γ_k − σ_k|
    pub unscaled: f64,
    /// min over λ > 0 of max_k |α_k/γ_k − λ σ_k|
    pub best_scaled: f64,
    /// minimising λ
    pub lambda: f64,
}

/// Per-hypothesis status map (keys "H1".."H8", sorted) plus σ and resonance data.
#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HypothesisReport {
    pub hypotheses: BTreeMap<String, HypothesisEntry>,
    pub sigma: Option<Vec<f64>>,
    pub mass_resonant: bool,
    pub resonance_deficit: Option<ResonanceDeficit>,
}

impl HypothesisReport {
    pub fn merge(&mut self, other: HypothesisReport) {
        self.hypotheses.extend(other.hypotheses);
        if other.sigma.is_some() {
            self.sigma = other.sigma;
        }
        self.mass_resonant |= other.mass_resonant;
        if other.resonance_deficit.is_some() {
            self.resonance_deficit = other.resonance_deficit;
        }
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisEntry> {
        self.hypotheses.get(name)
    }

    fn set(&mut self, name: &str, e: HypothesisEntry) {
        self.hypotheses.insert(name.to_string(), e);
    }

    /// First failing hypothesis among `names`.
    pub fn first_failure(&self, names: &[&str]) -> Option<(String, String)> {
        names.iter().find_map(|n| {
            self.hypotheses
                .get(*n)
                .filter(|e| e.status == HypothesisStatus::Failed)
                .map(|e| (n.to_string(), e.evidence.clone()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// H1, H2, H3 (by construction) and H5.
pub fn check_structural(spec: &SystemSpec) -> HypothesisReport {
    use HypothesisStatus::*;
    let mut rep = HypothesisReport::default();
    let fk = derive_fk(spec);
    let f = &spec.potential;

    if f.is_homogeneous(3) {
        rep.set("H5", HypothesisEntry::new(Verified, format!("{} monomials, all of total degree 3", f.len())));
    } else {
        let bad: Vec<String> = f
            .terms()
            .filter(|(k, _)| k.degree() != 3)
            .map(|(k, _)| format!("degree {}", k.degree()))
            .collect();
        rep.set("H5", HypothesisEntry::new(Failed, format!("monomials of wrong degree: {}", bad.join(", "))));
    }

    let constant_terms: Vec<usize> = (0..spec.l).filter(|&k| fk[k].degrees().contains(&0)).collect();
    if constant_terms.is_empty() {
        rep.set("H1", HypothesisEntry::new(Verified, "no f_k has a constant term"));
    } else {
        rep.set(
            "H1",
            HypothesisEntry::new(Failed, format!("f_k(0) != 0 for k in {:?}", constant_terms.iter().map(|k| k + 1).collect::<Vec<_>>())),
        );
    }

    // f_k of degree ≤ 2 have affine derivatives, which meets the Lipschitz form.
    let high: Vec<usize> = (0..spec.l).filter(|&k| fk[k].degrees().iter().any(|&d| d > 2)).collect();
    if high.is_empty() {
        rep.set("H2", HypothesisEntry::new(Verified, "all f_k have degree <= 2; derivatives are affine"));
    } else {
        rep.set(
            "H2",
            HypothesisEntry::new(Failed, format!("f_k of degree > 2 for k in {:?}", high.iter().map(|k| k + 1).collect::<Vec<_>>())),
        );
    }

    rep.set("H3", HypothesisEntry::new(Verified, "f_k derived as dF/dzbar_k + conj(dF/dz_k)"));
    rep
}

/// Rows of the linear system Σ σ_k c_k(m) = 0 over monomials m of Im(f_k z̄_k).
fn charge_constraint_matrix(spec: &SystemSpec) -> Vec<Vec<Rat>> {
    let fk = derive_fk(spec);
    let l = spec.l;
    let ims: Vec<ComplexPolynomial> = (0..l)
        .map(|k| fk[k].mul(&ComplexPolynomial::var_conj(l, k)).im_part())
        .collect();
    let keys: BTreeSet<MonoKey> = ims.iter().flat_map(|p| p.terms().map(|(k, _)| k.clone())).collect();
    let mut rows = Vec::new();
    for key in keys {
        let cs: Vec<_> = ims.iter().map(|p| p.coeff(&key)).collect();
        rows.push(cs.iter().map(|c| c.re.clone()).collect());
        rows.push(cs.iter().map(|c| c.im.clone()).collect());
    }
    rows
}

/// Exact reduced row echelon form; returns pivot columns.
fn rref(m: &mut Vec<Vec<Rat>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = Rat::one() / m[row][col].clone();
        for c in 0..ncols {
            m[row][c] = m[row][c].clone() * inv.clone();
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let fac = m[r][col].clone();
                for c in 0..ncols {
                    let v = m[row][c].clone() * fac.clone();
                    m[r][c] = m[r][c].clone() - v;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

/// Positive σ with Im Σ σ_k f_k(z) z̄_k ≡ 0, normalised to σ₁ = 1.
///
/// The null space is computed exactly. When it has dimension d > 1, a
/// positive member is searched for among combinations of the free-variable
/// basis with coefficients in {1,2,3,5}^d (and seeded random positive
/// combinations when d > 6); every positive member has positive free
/// coordinates, so this only restricts the search grid.
pub fn solve_sigma(spec: &SystemSpec) -> Result<Vec<f64>> {
    let l = spec.l;
    let mut m = charge_constraint_matrix(spec);
    if m.iter().all(|r| r.iter().all(|v| v.is_zero())) {
        return Ok(vec![1.0; l]);
    }
    let pivots = rref(&mut m, l);
    let free: Vec<usize> = (0..l).filter(|c| !pivots.contains(c)).collect();
    if free.is_empty() {
        return Err(Error::NoPositiveSolution);
    }
    // σ_p = −Σ_j m[row(p)][free_j] t_j for pivots, σ_free_j = t_j
    let build = |t: &[Rat]| -> Vec<Rat> {
        let mut s = vec![Rat::zero(); l];
        for (j, &fc) in free.iter().enumerate() {
            s[fc] = t[j].clone();
        }
        for (r, &pc) in pivots.iter().enumerate() {
            let mut v = Rat::zero();
            for (j, &fc) in free.iter().enumerate() {
                v = v - m[r][fc].clone() * t[j].clone();
            }
            s[pc] = v;
        }
        s
    };
    let accept = |s: &[Rat]| s.iter().all(|v| v.is_positive());
    let d = free.len();
    let weights = [1i64, 2, 3, 5];
    let mut candidates: Vec<Vec<Rat>> = Vec::new();
    if d <= 6 {
        let total = weights.len().pow(d as u32);
        for mut idx in 0..total {
            let mut t = Vec::with_capacity(d);
            for _ in 0..d {
                t.push(rat_from_i64(weights[idx % weights.len()]));
                idx /= weights.len();
            }
            candidates.push(t);
        }
    } else {
        let mut r = rng(0x5167);
        for _ in 0..4096 {
            candidates.push((0..d).map(|_| rat_from_i64(r.gen_range(1..=64))).collect());
        }
    }
    for t in candidates {
        let s = build(&t);
        if accept(&s) {
            let s0 = s[0].clone();
            return Ok(s.iter().map(|v| rat_to_f64(&(v.clone() / s0.clone()))).collect());
        }
    }
    Err(Error::NoPositiveSolution)
}

/// max over monomials of |Σ w_k c_k(m)| relative to Σ |w_k||c_k(m)|.
fn weighted_charge_defect(spec: &SystemSpec, w: &[f64]) -> f64 {
    let fk = derive_fk(spec);
    let l = spec.l;
    let ims: Vec<ComplexPolynomial> = (0..l)
        .map(|k| fk[k].mul(&ComplexPolynomial::var_conj(l, k)).im_part())
        .collect();
    let keys: BTreeSet<MonoKey> = ims.iter().flat_map(|p| p.terms().map(|(k, _)| k.clone())).collect();
    let mut worst: f64 = 0.0;
    for key in keys {
        let mut s = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for k in 0..l {
            let c = coeff_to_c64(&ims[k].coeff(&key));
            s += c * w[k];
            scale += c.norm() * w[k].abs();
        }
        if scale > 0.0 {
            worst = worst.max(s.norm() / scale);
        }
    }
    worst
}

/// True iff Im Σ (α_k/γ_k) f_k z̄_k vanishes identically (relative tolerance 1e−12).
pub fn check_mass_resonance(spec: &SystemSpec) -> bool {
    let w: Vec<f64> = spec.alpha.iter().zip(&spec.gamma).map(|(a, g)| a / g).collect();
    weighted_charge_defect(spec, &w) <= 1e-12
}

/// Distance between α/γ and σ, unscaled and minimised over positive scalings.
pub fn resonance_deficit(spec: &SystemSpec, sigma: &[f64]) -> Result<ResonanceDeficit> {
    if sigma.len() != spec.l {
        return Err(Error::LengthMismatch { expected: spec.l, got: sigma.len() });
    }
    if sigma.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Precondition("sigma must be positive".into()));
    }
    let w: Vec<f64> = spec.alpha.iter().zip(&spec.gamma).map(|(a, g)| a / g).collect();
    let dev = |lam: f64| w.iter().zip(sigma).map(|(wk, sk)| (wk - lam * sk).abs()).fold(0.0, f64::max);
    let unscaled = dev(1.0);
    // The objective is convex piecewise linear in λ; its minimum sits at a
    // kink (λ = w_k/σ_k) or a crossing (λ = (w_i + w_j)/(σ_i + σ_j)).
    let mut cands: Vec<f64> = w.iter().zip(sigma).map(|(wk, sk)| wk / sk).collect();
    for i in 0..w.len() {
        for j in 0..w.len() {
            cands.push((w[i] + w[j]) / (sigma[i] + sigma[j]));
        }
    }
    let (mut best, mut lambda) = (f64::INFINITY, 1.0);
    for lam in cands.into_iter().filter(|&x| x > 0.0) {
        let d = dev(lam);
        if d < best {
            best = d;
            lambda = lam;
        }
    }
    Ok(ResonanceDeficit { unscaled, best_scaled: best, lambda })
}

fn fmt_point(z: &[C64]) -> String {
    let parts: Vec<String> = z.iter().map(|v| format!("({:.6},{:.6})", v.re, v.im)).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_real(y: &[f64]) -> String {
    let parts: Vec<String> = y.iter().map(|v| format!("{:.6}", v)).collect();
    format!("[{}]", parts.join(", "))
}

/// Sampled sufficient conditions for H6, H7 and H8.
///
/// - H6: |Re F(z)| ≤ Re F(|z|) and Re F(|z|) ≥ 0 at random complex z, which
///   implies the integral inequality pointwise.
/// - H7: Im F(y) = 0 at random real y; f_k(y) ≥ 0 at random y in the positive cone.
/// - H8: F is split into pieces grouped by the set of components each
///   monomial involves. Each piece depends only on its own variables and
///   vanishes when any of them is zero (checked at samples); the
///   super-modularity inequality is tested at random (y, h, k, i ≠ j).
pub fn check_sampled_h6_h7_h8(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    use HypothesisStatus::*;
    let samples = samples.max(1);
    let mut rep = HypothesisReport::default();
    let l = spec.l;
    let f = spec.potential.compile();
    let fk: Vec<_> = derive_fk(spec).iter().map(|p| p.compile()).collect();
    let mut r = rng(seed);
    let tol = 1e-12;

    let mut h6 = None;
    for _ in 0..samples {
        let rad: f64 = 10f64.powf(r.gen_range(-2.0..1.0));
        let z: Vec<C64> = (0..l).map(|_| C64::from_polar(rad * r.gen_range(0.0..1.0f64), r.gen_range(0.0..std::f64::consts::TAU))).collect();
        let m: Vec<C64> = z.iter().map(|v| C64::new(v.norm(), 0.0)).collect();
        let lhs = f.eval(&z).re.abs();
        let rhs = f.eval(&m).re;
        let sc = tol * f.abs_bound(&m).max(f64::MIN_POSITIVE);
        if rhs < -sc || lhs > rhs + sc {
            h6 = Some(format!("z = {}: |Re F(z)| = {:.6e}, F(|z|) = {:.6e}", fmt_point(&z), lhs, rhs));
            break;
        }
    }
    rep.set(
        "H6",
        match h6 {
            None => HypothesisEntry::new(VerifiedSampled, format!("pointwise |Re F(z)| <= F(|z|) at {} samples", samples)),
            Some(w) => HypothesisEntry::new(Failed, w),
        },
    );

    let mut h7 = None;
    for _ in 0..samples {
        let y: Vec<f64> = (0..l).map(|_| r.gen_range(-2.0..2.0)).collect();
        let zy: Vec<C64> = y.iter().map(|&v| C64::new(v, 0.0)).collect();
        let v = f.eval(&zy);
        if v.im.abs() > tol * f.abs_bound(&zy).max(f64::MIN_POSITIVE) {
            h7 = Some(format!("F({}) = ({:.6e},{:.6e}) is not real", fmt_real(&y), v.re, v.im));
            break;
        }
        let yp: Vec<C64> = y.iter().map(|&v| C64::new(v.abs(), 0.0)).collect();
        if let Some(k) = (0..l).find(|&k| {
            let v = fk[k].eval(&yp);
            let sc = tol * fk[k].abs_bound(&yp).max(f64::MIN_POSITIVE);
            v.re < -sc || v.im.abs() > sc
        }) {
            let v = fk[k].eval(&yp);
            let yr: Vec<f64> = yp.iter().map(|c| c.re).collect();
            h7 = Some(format!("f_{}({}) = ({:.6e},{:.6e}) is not nonnegative", k + 1, fmt_real(&yr), v.re, v.im));
            break;
        }
        let fy = f.eval(&yp).re;
        if fy < -tol * f.abs_bound(&yp).max(f64::MIN_POSITIVE) {
            let yr: Vec<f64> = yp.iter().map(|c| c.re).collect();
            h7 = Some(format!("F({}) = {:.6e} < 0 on the positive cone", fmt_real(&yr), fy));
            break;
        }
    }
    rep.set(
        "H7",
        match h7 {
            None => HypothesisEntry::new(VerifiedSampled, format!("real on R^l and f_k >= 0 on the positive cone at {} samples", samples)),
            Some(w) => HypothesisEntry::new(Failed, w),
        },
    );

    // group monomials by support
    let mut pieces: BTreeMap<Vec<usize>, ComplexPolynomial> = BTreeMap::new();
    for (key, c) in spec.potential.terms() {
        let e = pieces.entry(key.support()).or_insert_with(|| ComplexPolynomial::zero(l));
        e.add_term(key.clone(), c.clone());
    }
    let mut h8 = None;
    'outer: for (support, piece) in &pieces {
        let cp = piece.compile();
        let per_piece = (samples / pieces.len().max(1)).max(1);
        for _ in 0..per_piece {
            let y: Vec<f64> = (0..l)
                .map(|k| if support.contains(&k) { r.gen_range(0.0..2.0) } else { 0.0 })
                .collect();
            let at = |v: &[f64]| cp.eval(&v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>()).re;
            let bound = |v: &[f64]| cp.abs_bound(&v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
            // vanishing on a coordinate hyperplane
            let j0 = support[r.gen_range(0..support.len())];
            let mut yz = y.clone();
            yz[j0] = 0.0;
            if at(&yz).abs() > tol * (1.0 + bound(&y)) {
                h8 = Some(format!("piece on {:?} does not vanish at y = {}", support.iter().map(|k| k + 1).collect::<Vec<_>>(), fmt_real(&yz)));
                break 'outer;
            }
            if support.len() < 2 {
                continue;
            }
            let i = support[r.gen_range(0..support.len())];
            let mut j = support[r.gen_range(0..support.len())];
            while j == i {
                j = support[r.gen_range(0..support.len())];
            }
            let h = r.gen_range(0.0..2.0);
            let k = r.gen_range(0.0..2.0);
            let mut yhk = y.clone();
            yhk[i] += h;
            yhk[j] += k;
            let mut yh = y.clone();
            yh[i] += h;
            let mut yk = y.clone();
            yk[j] += k;
            let gap = at(&yhk) + at(&y) - at(&yh) - at(&yk);
            if gap < -tol * (1.0 + bound(&yhk)) {
                h8 = Some(format!(
                    "super-modularity fails for piece on {:?}: y = {}, i = {}, j = {}, h = {:.4}, k = {:.4}, gap = {:.6e}",
                    support.iter().map(|k| k + 1).collect::<Vec<_>>(),
                    fmt_real(&y),
                    i + 1,
                    j + 1,
                    h,
                    k,
                    gap
                ));
                break 'outer;
            }
        }
    }
    rep.set(
        "H8",
        match h8 {
            None => HypothesisEntry::new(
                VerifiedSampled,
                format!("{} support-grouped pieces, super-modular and vanishing on hyperplanes at {} samples", pieces.len(), samples),
            ),
            Some(w) => HypothesisEntry::new(Failed, w),
        },
    );
    rep
}

/// Full report: structural checks, H4 (σ), sampled H6–H8, resonance data.
pub fn check_hypotheses(spec: &SystemSpec, samples: usize, seed: u64) -> HypothesisReport {
    use HypothesisStatus::*;
    let mut rep = check_structural(spec);
    let sigma = match &spec.sigma {
        Some(s) => {
            let defect = weighted_charge_defect(spec, s);
            if defect <= 1e-12 {
                rep.set("H4", HypothesisEntry::new(Verified, format!("supplied sigma {:?} annihilates the charge identity", s)));
                Some(s.clone())
            } else {
                rep.set("H4", HypothesisEntry::new(Failed, format!("supplied sigma {:?} leaves relative defect {:.3e}", s, defect)));
                None
            }
        }
        None => match solve_sigma(spec) {
            Ok(s) => {
                rep.set("H4", HypothesisEntry::new(Verified, format!("sigma = {:?} solves the charge identity exactly", s)));
                Some(s)
            }
            Err(_) => {
                rep.set("H4", HypothesisEntry::new(Failed, "no positive sigma solves the charge identity"));
                None
            }
        },
    };
    rep.merge(check_sampled_h6_h7_h8(spec, samples, seed));
    rep.mass_resonant = check_mass_resonance(spec);
    if let Some(s) = &sigma {
        rep.resonance_deficit = resonance_deficit(spec, s).ok();
    }
    rep.sigma = sigma;
    rep
}

/// Exact check used by tests: Im Σ σ_k f_k z̄_k ≡ 0 with rational σ.
#[cfg(test)]
fn charge_identity_exact(spec: &SystemSpec, sigma: &[i64]) -> bool {
    let fk = derive_fk(spec);
    let l = spec.l;
    let mut acc = ComplexPolynomial::zero(l);
    for k in 0..l {
        let t = fk[k]
            .mul(&ComplexPolynomial::var_conj(l, k))
            .scale(&num_complex::Complex::new(rat_from_i64(sigma[k]), Rat::zero()));
        acc = acc.add(&t);
    }
    acc.im_part().is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlin::parse_potential;

    fn spec_from(f: &str, l: usize) -> SystemSpec {
        SystemSpec::new(vec![1.0; l], vec![1.0; l], vec![0.0; l], None, parse_potential(f, l).unwrap()).unwrap()
    }

    #[test]
    fn canonical_sigma() {
        let spec = SystemSpec::canonical(0.5);
        assert_eq!(solve_sigma(&spec).unwrap(), vec![1.0, 2.0]);
        assert!(charge_identity_exact(&spec, &[1, 2]));
        assert!(!charge_identity_exact(&spec, &[1, 1]));
        let fk: Vec<_> = derive_fk(&spec).iter().map(|p| p.compile()).collect();
        let mut r = rng(1);
        for _ in 0..100 {
            let z: Vec<C64> = (0..2).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
            let s = fk[0].eval(&z) * z[0].conj() + fk[1].eval(&z) * z[1].conj() * 2.0;
            let scale: f64 = z.iter().map(|v| v.norm().powi(3)).sum();
            assert!(s.im.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn scalar_cubic_has_no_sigma() {
        let spec = spec_from("z1^2*conj(z1)", 1);
        assert!(matches!(solve_sigma(&spec), Err(Error::NoPositiveSolution)));
    }

    #[test]
    fn zero_potential_sigma_is_ones() {
        let spec = SystemSpec::new(vec![1.0; 3], vec![1.0; 3], vec![0.0; 3], None, ComplexPolynomial::zero(3)).unwrap();
        assert_eq!(solve_sigma(&spec).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn three_wave_sigma() {
        let spec = spec_from("conj(z1)*conj(z2)*z3", 3);
        let s = solve_sigma(&spec).unwrap();
        assert_eq!(s[0], 1.0);
        assert!(s.iter().all(|&v| v > 0.0));
        let si: Vec<i64> = s.iter().map(|v| (v * 6.0).round() as i64).collect();
        assert!(charge_identity_exact(&spec, &si), "sigma {:?}", s);
    }

    #[test]
    fn mass_resonance_examples() {
        assert!(check_mass_resonance(&SystemSpec::canonical(0.5)));
        assert!(!check_mass_resonance(&SystemSpec::canonical(0.6)));
        let spec = SystemSpec::new(vec![2.0], vec![3.0], vec![0.0], None, ComplexPolynomial::zero(1)).unwrap();
        assert!(check_mass_resonance(&spec));
    }

    #[test]
    fn deficit_examples() {
        let d = resonance_deficit(&SystemSpec::canonical(0.5), &[1.0, 2.0]).unwrap();
        assert_eq!(d.unscaled, 0.0);
        let d = resonance_deficit(&SystemSpec::canonical(0.6), &[1.0, 2.0]).unwrap();
        assert!((d.unscaled - (2.0 - 1.0 / 0.6)).abs() < 1e-12);
        assert!(d.best_scaled <= d.unscaled);
        let spec = SystemSpec::new(vec![1.5, 2.0, 0.3], vec![1.5, 2.0, 0.3], vec![0.0; 3], None, ComplexPolynomial::zero(3)).unwrap();
        assert_eq!(resonance_deficit(&spec, &[1.0; 3]).unwrap().unscaled, 0.0);
    }

    #[test]
    fn best_scaled_deficit_is_a_minimum() {
        let spec = SystemSpec::canonical(0.37);
        let sigma = [1.0, 2.0];
        let d = resonance_deficit(&spec, &sigma).unwrap();
        let w = [1.0, 1.0 / 0.37];
        for i in 1..2000 {
            let lam = i as f64 * 0.002;
            let v = (w[0] - lam * sigma[0]).abs().max((w[1] - lam * sigma[1]).abs());
            assert!(v >= d.best_scaled - 1e-12);
        }
    }

    #[test]
    fn canonical_report() {
        let spec = SystemSpec::canonical(0.5);
        let rep = check_hypotheses(&spec, 10_000, 7);
        for h in ["H1", "H2", "H3", "H4", "H5"] {
            assert_eq!(rep.get(h).unwrap().status, HypothesisStatus::Verified, "{}", h);
        }
        for h in ["H6", "H7", "H8"] {
            assert_eq!(rep.get(h).unwrap().status, HypothesisStatus::VerifiedSampled, "{}", h);
        }
        assert!(rep.mass_resonant);
        assert_eq!(rep.sigma, Some(vec![1.0, 2.0]));
        let json = rep.to_json();
        let h1 = json.find("\"H1\"").unwrap();
        let h8 = json.find("\"H8\"").unwrap();
        assert!(h1 < h8);
    }

    #[test]
    fn degree_two_monomial_fails_h5() {
        let spec = spec_from("conj(z1)^2*z2 + z1*z2", 2);
        let rep = check_structural(&spec);
        assert_eq!(rep.get("H5").unwrap().status, HypothesisStatus::Failed);
    }

    #[test]
    fn negative_cube_fails_h7() {
        let spec = spec_from("-1*z1^3", 1);
        let rep = check_sampled_h6_h7_h8(&spec, 1000, 1);
        let h7 = rep.get("H7").unwrap();
        assert_eq!(h7.status, HypothesisStatus::Failed);
        assert!(!h7.evidence.is_empty());
    }

    #[test]
    fn zero_potential_passes_sampled_checks() {
        let spec = SystemSpec::new(vec![1.0; 2], vec![1.0; 2], vec![0.0; 2], None, ComplexPolynomial::zero(2)).unwrap();
        let rep = check_sampled_h6_h7_h8(&spec, 100, 1);
        for h in ["H6", "H7", "H8"] {
            assert_eq!(rep.get(h).unwrap().status, HypothesisStatus::VerifiedSampled);
        }
        let st = check_structural(&spec);
        assert!(["H1", "H2", "H5"].iter().all(|h| st.get(h).unwrap().status == HypothesisStatus::Verified));
    }

    #[test]
    fn non_supermodular_piece_fails_h8() {
        // −y1² y2 has negative mixed derivative on the positive cone
        let spec = spec_from("-1*conj(z1)^2*z2", 2);
        let rep = check_sampled_h6_h7_h8(&spec, 1000, 2);
        assert_eq!(rep.get("H8").unwrap().status, HypothesisStatus::Failed);
    }

    #[test]
    fn mass_resonance_matches_deficit_when_weights_are_admissible() {
        for kappa in [0.25, 0.5, 0.6, 1.0, 2.0] {
            let spec = SystemSpec::canonical(kappa);
            let w: Vec<f64> = spec.alpha.iter().zip(&spec.gamma).map(|(a, g)| a / g).collect();
            let admissible = weighted_charge_defect(&spec, &w) <= 1e-12;
            let d = resonance_deficit(&spec, &solve_sigma(&spec).unwrap()).unwrap();
            assert_eq!(check_mass_resonance(&spec), admissible);
            assert_eq!(admissible, d.best_scaled <= 1e-12, "kappa {}", kappa);
        }
    }
}
