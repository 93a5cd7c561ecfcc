use super::hypotheses::{check_hypotheses, HypothesisReport};
use super::poly::CompiledPoly;
use super::{derive_fk, SystemSpec};
use crate::{Error, Result, C64};

/// A spec that passed the structural checks, with σ fixed and the
/// nonlinearities compiled for pointwise evaluation.
#[derive(Clone, Debug)]
pub struct System {
    pub spec: SystemSpec,
    pub sigma: Vec<f64>,
    f: CompiledPoly,
    fk: Vec<CompiledPoly>,
}

impl System {
    /// Requires H1–H5; σ is taken from the spec or solved for.
    pub fn new(spec: SystemSpec) -> Result<Self> {
        let rep = check_hypotheses(&spec, 16, 0);
        Self::from_report(spec, &rep)
    }

    pub fn from_report(spec: SystemSpec, rep: &HypothesisReport) -> Result<Self> {
        if let Some((name, evidence)) = rep.first_failure(&["H1", "H2", "H3", "H4", "H5"]) {
            return Err(Error::Hypothesis { name, evidence });
        }
        let sigma = rep.sigma.clone().ok_or_else(|| Error::Hypothesis {
            name: "H4".into(),
            evidence: "no sigma available".into(),
        })?;
        let f = spec.potential.compile();
        let fk = derive_fk(&spec).iter().map(|p| p.compile()).collect();
        Ok(System { spec, sigma, f, fk })
    }

    pub fn canonical(kappa: f64) -> Self {
        System::new(SystemSpec::canonical(kappa)).expect("canonical system satisfies H1-H5")
    }

    pub fn l(&self) -> usize {
        self.spec.l
    }

    pub fn alpha(&self) -> &[f64] {
        &self.spec.alpha
    }

    pub fn gamma(&self) -> &[f64] {
        &self.spec.gamma
    }

    pub fn beta(&self) -> &[f64] {
        &self.spec.beta
    }

    #[inline]
    pub fn eval_f(&self, z: &[C64]) -> C64 {
        self.f.eval(z)
    }

    #[inline]
    pub fn eval_fk(&self, k: usize, z: &[C64]) -> C64 {
        self.fk[k].eval(z)
    }

    /// All f_k at one point.
    #[inline]
    pub fn eval_all(&self, z: &[C64], out: &mut [C64]) {
        for (k, f) in self.fk.iter().enumerate() {
            out[k] = f.eval(z);
        }
    }

    /// Copy with γ replaced (σ retained; H4 does not involve γ).
    pub fn with_gamma(&self, gamma: Vec<f64>) -> Result<Self> {
        let spec = self.spec.with_gamma(gamma)?;
        Ok(System { spec, sigma: self.sigma.clone(), f: self.f.clone(), fk: self.fk.clone() })
    }

    pub fn with_beta(&self, beta: Vec<f64>) -> Result<Self> {
        let spec = self.spec.with_beta(beta)?;
        Ok(System { spec, sigma: self.sigma.clone(), f: self.f.clone(), fk: self.fk.clone() })
    }
}
