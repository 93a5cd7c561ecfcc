//! Virial V(t) = Σ(α²/γ)∫|x|²|u|² and the second-derivative identity
//! V'' = 2nE(u₀) − 2nΣβ‖u‖² + 2(4−n)Σγ‖∇u‖² − d/dt[2∫|x|² ImΣ(α/γ)f_k ū_k].

use serde::Serialize;

use crate::evolve::{Monitor, SeriesRow, State};
use crate::grid::{self, Field};
use crate::groundstate::functionals;
use crate::nonlin::System;
use crate::{Error, Result, C64};

pub fn virial(sys: &System, field: &Field) -> f64 {
    let w = field.grid.weights();
    let x = field.grid.nodes();
    let (a, g) = (sys.alpha(), sys.gamma());
    let mut v = 0.0;
    for (k, u) in field.comps.iter().enumerate() {
        let c = a[k] * a[k] / g[k];
        v += c * (0..u.len()).map(|j| w[j] * x[j] * x[j] * u[j].norm_sqr()).sum::<f64>();
    }
    v
}

/// (2∫|x|² ImΣ(α_k/γ_k)f_k ū_k, 2∫|x|²Σ(α_k/γ_k)|f_k||u_k|). The second
/// entry is the natural scale of the first.
pub fn resonance_term(sys: &System, field: &Field) -> (f64, f64) {
    let w = field.grid.weights();
    let x = field.grid.nodes();
    let l = sys.l();
    let (a, g) = (sys.alpha(), sys.gamma());
    let mut z = vec![C64::new(0.0, 0.0); l];
    let mut f = vec![C64::new(0.0, 0.0); l];
    let mut val = 0.0;
    let mut scale = 0.0;
    for j in 0..field.grid.len() {
        field.point(j, &mut z);
        sys.eval_all(&z, &mut f);
        let mut im = 0.0;
        let mut ab = 0.0;
        for k in 0..l {
            let c = a[k] / g[k];
            im += c * (f[k] * z[k].conj()).im;
            ab += c.abs() * f[k].norm() * z[k].norm();
        }
        let wx = 2.0 * w[j] * x[j] * x[j];
        val += wx * im;
        scale += wx * ab;
    }
    (val, scale)
}

/// Share of the virial weight carried by the outer tenth of the domain.
pub fn virial_tail(sys: &System, field: &Field) -> f64 {
    let w = field.grid.weights();
    let x = field.grid.nodes();
    let edge = 0.9 * field.grid.extent();
    let (a, g) = (sys.alpha(), sys.gamma());
    let mut outer = 0.0;
    let mut total = 0.0;
    for (k, u) in field.comps.iter().enumerate() {
        let c = a[k] * a[k] / g[k];
        for j in 0..u.len() {
            let v = c * w[j] * x[j] * x[j] * u[j].norm_sqr();
            total += v;
            if x[j].abs() > edge {
                outer += v;
            }
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VirialSample {
    pub t: f64,
    pub v: f64,
    pub ebeta: f64,
    /// Σβ_k‖u_k‖²
    pub beta_mass: f64,
    pub k: f64,
    pub resonance: f64,
    pub resonance_scale: f64,
    pub tail: f64,
}

pub fn virial_sample(sys: &System, state: &State) -> VirialSample {
    let fv = functionals(sys, &state.field);
    let beta_mass: f64 = state.field.comps.iter().zip(sys.beta()).map(|(u, b)| b * grid::norm_sq(&state.field.grid, u)).sum();
    let (resonance, resonance_scale) = resonance_term(sys, &state.field);
    VirialSample {
        t: state.t,
        v: virial(sys, &state.field),
        ebeta: fv.ebeta,
        beta_mass,
        k: fv.k,
        resonance,
        resonance_scale,
        tail: virial_tail(sys, &state.field),
    }
}

/// Records virial samples at every monitor row; adds `V` and `resonance`
/// columns to the series.
#[derive(Clone, Debug, Default)]
pub struct VirialRecorder {
    pub samples: Vec<VirialSample>,
}

impl Monitor for VirialRecorder {
    fn observe(&mut self, sys: &System, state: &State, row: &mut SeriesRow) -> Result<()> {
        let s = virial_sample(sys, state);
        row.extras.insert("V".into(), s.v);
        row.extras.insert("resonance".into(), s.resonance);
        if self.samples.last().map_or(true, |p| s.t > p.t) {
            self.samples.push(s);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct VirialReport {
    /// max |V''_FD − RHS| / max(|V''|, |terms|) over interior times
    pub residual: f64,
    /// max |resonance| / resonance scale
    pub resonance_relative: f64,
    /// max |resonance|
    pub resonance_max: f64,
    pub points: usize,
    pub max_tail: f64,
}

/// Compares the centred second difference of V with the right-hand side of
/// the virial identity in dimension `n`. Samples must be equally spaced
/// (a shortened final step is dropped).
pub fn virial_identity_check(n: usize, samples: &[VirialSample], tail_tol: f64) -> Result<VirialReport> {
    if samples.len() < 3 {
        return Err(Error::InsufficientRunLength("virial check needs at least three samples".into()));
    }
    let max_tail = samples.iter().map(|s| s.tail).fold(0.0, f64::max);
    if max_tail > tail_tol {
        return Err(Error::TailContamination(format!("|x|²-weighted fraction {:.3e} near the wall", max_tail)));
    }
    let d = samples[1].t - samples[0].t;
    let uniform = |i: usize| ((samples[i + 1].t - samples[i].t) - d).abs() <= 1e-9 * d && ((samples[i].t - samples[i - 1].t) - d).abs() <= 1e-9 * d;
    let nf = n as f64;
    let e0 = samples[0].ebeta;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut points = 0;
    for i in 1..samples.len() - 1 {
        if !uniform(i) {
            continue;
        }
        let (p, c, q) = (&samples[i - 1], &samples[i], &samples[i + 1]);
        let vpp = (q.v - 2.0 * c.v + p.v) / (d * d);
        let dres = (q.resonance - p.resonance) / (2.0 * d);
        let rhs = 2.0 * nf * e0 - 2.0 * nf * c.beta_mass + 2.0 * (4.0 - nf) * c.k - dres;
        worst = worst.max((vpp - rhs).abs());
        scale = scale.max(vpp.abs()).max((2.0 * nf * e0).abs()).max((2.0 * (4.0 - nf) * c.k).abs());
        points += 1;
    }
    if points == 0 {
        return Err(Error::InsufficientRunLength("no equally spaced interior samples".into()));
    }
    let resonance_max = samples.iter().map(|s| s.resonance.abs()).fold(0.0, f64::max);
    let resonance_relative = samples
        .iter()
        .map(|s| if s.resonance_scale > 0.0 { s.resonance.abs() / s.resonance_scale } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(VirialReport { residual: if scale > 0.0 { worst / scale } else { worst }, resonance_relative, resonance_max, points, max_tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{evolve_to, IntegratorConfig};
    use crate::grid::GridDesc;

    #[test]
    fn zero_state() {
        let sys = System::canonical(0.5);
        let z = Field::zeros(GridDesc::radial(5, 50, 5.0).unwrap(), 2);
        assert_eq!(virial(&sys, &z), 0.0);
        assert_eq!(resonance_term(&sys, &z).0, 0.0);
    }

    #[test]
    fn resonance_vanishes_only_at_half() {
        let g = GridDesc::radial(5, 200, 10.0).unwrap();
        let u = Field::from_fn(g, 2, |k, r| C64::from_polar((-r * r / 4.0).exp(), 0.4 * r + k as f64));
        let (v, s) = resonance_term(&System::canonical(0.5), &u);
        assert!(v.abs() <= 1e-14 * s);
        let (v, s) = resonance_term(&System::canonical(0.6), &u);
        assert!(v.abs() > 1e-3 * s);
    }

    #[test]
    fn identity_on_a_gaussian_run() {
        let sys = System::canonical(0.5);
        let g = GridDesc::radial(5, 1200, 60.0).unwrap();
        let u = Field::from_fn(g, 2, |k, r| C64::from_polar((1.0 - 0.3 * k as f64) * (-r * r / 6.0).exp(), 0.2 * k as f64));
        let mut rec = VirialRecorder::default();
        let cfg = IntegratorConfig { monitor_stride: 10, ..IntegratorConfig::with_dt(1e-3) };
        evolve_to(&sys, State::new(u), 1.0, &cfg, &mut [&mut rec]).unwrap();
        let rep = virial_identity_check(5, &rec.samples, 1e-6).unwrap();
        assert!(rep.residual <= 1e-2, "{:?}", rep);
        assert!(rep.resonance_relative <= 1e-10);
    }

    #[test]
    fn tail_contamination_detected() {
        let sys = System::canonical(0.5);
        let g = GridDesc::radial(5, 100, 5.0).unwrap();
        let u = Field::from_fn(g, 2, |_, _| C64::new(1.0, 0.0));
        let s = virial_sample(&sys, &State::new(u));
        let e = virial_identity_check(5, &[s, s, s], 1e-6);
        assert!(matches!(e, Err(Error::TailContamination(_))));
    }
}
