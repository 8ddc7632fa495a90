use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Grid, GridField};

/// FFT plans and symbols for one grid. Transforms are unnormalized forward and
/// `1/n^d`-normalized inverse.
#[derive(Clone)]
pub struct Spectral {
    pub grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    xi2: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        Spectral {
            grid,
            fwd: planner.plan_fft_forward(grid.n),
            inv: planner.plan_fft_inverse(grid.n),
            xi2: grid.xi_squared(),
        }
    }

    pub fn xi2(&self) -> &[f64] {
        &self.xi2
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n;
        // rows (last axis)
        plan.process(data);
        if self.grid.d == 2 {
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    col[i] = data[i * n + j];
                }
                plan.process(&mut col);
                for i in 0..n {
                    data[i * n + j] = col[i];
                }
            }
        }
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut data = values.to_vec();
        self.transform(&mut data, &self.fwd);
        data
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut data = coeffs.to_vec();
        self.transform(&mut data, &self.inv);
        let norm = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|v| *v *= norm);
        data
    }

    /// Apply a Fourier multiplier given as a function of `|ξ|²`.
    pub fn apply(&self, u: &GridField, m: impl Fn(f64) -> Complex64) -> GridField {
        let mut c = self.forward(&u.values);
        for (v, &x2) in c.iter_mut().zip(&self.xi2) {
            *v *= m(x2);
        }
        GridField { grid: u.grid, values: self.inverse(&c) }
    }

    /// `e^{itΔ²}`: each coefficient times `exp(i t |ξ|⁴)`.
    pub fn propagate(&self, u: &GridField, t: f64) -> GridField {
        if t == 0.0 {
            return u.clone();
        }
        self.apply(u, |x2| Complex64::from_polar(1.0, t * x2 * x2))
    }

    /// `(h^d / n^d Σ m(ξ)² |û|²)^{1/2}` by Parseval.
    pub fn weighted_norm(&self, u: &GridField, m: impl Fn(f64) -> f64) -> f64 {
        let c = self.forward(&u.values);
        let sum: f64 = c.iter().zip(&self.xi2).map(|(v, &x2)| m(x2).powi(2) * v.norm_sqr()).sum();
        (self.grid.cell() * sum / self.grid.len() as f64).sqrt()
    }

    pub fn sobolev_norm(&self, u: &GridField, s: f64, homogeneous: bool) -> f64 {
        if homogeneous {
            self.weighted_norm(u, |x2| if x2 == 0.0 { if s == 0.0 { 1.0 } else { 0.0 } } else { x2.powf(s / 2.0) })
        } else {
            self.weighted_norm(u, |x2| (1.0 + x2).powf(s / 2.0))
        }
    }

    /// Zero every coefficient with some `|k| > n/3` (2/3 rule).
    pub fn dealias(&self, u: &GridField) -> GridField {
        let n = self.grid.n;
        let cut = n / 3;
        let keep = |k: usize| {
            let k = if k < n / 2 { k } else { n - k };
            k <= cut
        };
        let mut c = self.forward(&u.values);
        for (idx, v) in c.iter_mut().enumerate() {
            let ok = match self.grid.d {
                1 => keep(idx),
                _ => keep(idx / n) && keep(idx % n),
            };
            if !ok {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        GridField { grid: u.grid, values: self.inverse(&c) }
    }
}

/// One-shot `e^{itΔ²}u`.
pub fn linear_propagate(u: &GridField, t: f64) -> GridField {
    Spectral::new(u.grid).propagate(u, t)
}

/// Discrete `H^s` (or `Ḣ^s`) norm via the spectral multiplier.
pub fn sobolev_norm(u: &GridField, s: f64, homogeneous: bool) -> f64 {
    Spectral::new(u.grid).sobolev_norm(u, s, homogeneous)
}
