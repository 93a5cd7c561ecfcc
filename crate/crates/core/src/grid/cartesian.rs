//! Periodic spectral operators on [−L, L).

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::GridDesc;
use crate::C64;

/// FFT plans and wavenumbers for a periodic 1D grid.
#[derive(Clone)]
pub struct Spectral1 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Angular wavenumbers ξ_m in FFT order.
    pub xi: Vec<f64>,
}

impl std::fmt::Debug for Spectral1 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral1").field("n", &self.n).finish()
    }
}

impl Spectral1 {
    pub fn new(grid: &GridDesc) -> Self {
        let GridDesc::Cartesian1 { points, half_length } = *grid else {
            panic!("Spectral1 requires a Cartesian grid")
        };
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(points);
        let inv = planner.plan_fft_inverse(points);
        let dk = PI / half_length;
        let xi = (0..points)
            .map(|m| {
                let mm = if m <= points / 2 { m as f64 } else { m as f64 - points as f64 };
                mm * dk
            })
            .collect();
        Spectral1 { n: points, fwd, inv, xi }
    }

    pub fn forward(&self, u: &[C64]) -> Vec<C64> {
        let mut b = u.to_vec();
        self.fwd.process(&mut b);
        b
    }

    /// Inverse transform including the 1/N normalisation.
    pub fn inverse(&self, uh: &[C64]) -> Vec<C64> {
        let mut b = uh.to_vec();
        self.inv.process(&mut b);
        let s = 1.0 / self.n as f64;
        for z in &mut b {
            *z *= s;
        }
        b
    }

    /// Multiply by a symbol in frequency space.
    pub fn apply(&self, u: &[C64], symbol: impl Fn(f64) -> C64) -> Vec<C64> {
        let mut uh = self.forward(u);
        for (z, &k) in uh.iter_mut().zip(&self.xi) {
            *z *= symbol(k);
        }
        self.inverse(&uh)
    }

    pub fn apply_in_place(&self, u: &mut [C64], symbol: &[C64]) {
        self.fwd.process(u);
        let s = 1.0 / self.n as f64;
        for (z, m) in u.iter_mut().zip(symbol) {
            *z *= m * s;
        }
        self.inv.process(u);
    }

    pub fn laplacian(&self, u: &[C64]) -> Vec<C64> {
        self.apply(u, |k| C64::new(-k * k, 0.0))
    }

    /// Spectral derivative. The Nyquist mode is dropped for even N so that
    /// real input gives real output.
    pub fn derivative(&self, u: &[C64]) -> Vec<C64> {
        let nyq = if self.n % 2 == 0 { Some(self.n / 2) } else { None };
        let mut uh = self.forward(u);
        for (m, z) in uh.iter_mut().enumerate() {
            if Some(m) == nyq {
                *z = C64::new(0.0, 0.0);
            } else {
                *z *= C64::new(0.0, self.xi[m]);
            }
        }
        self.inverse(&uh)
    }
}
