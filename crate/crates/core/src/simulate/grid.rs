use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Uniform periodic grid on `[-L, L)^d` with `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

impl Grid {
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self, SimError> {
        if !(d == 1 || d == 2) {
            return Err(SimError::Grid(format!("dimension {d} not supported (use 1 or 2)")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(SimError::Grid(format!("n = {n} must be a power of two, at least 8")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(SimError::Grid(format!("half-length L = {l} must be positive")));
        }
        Ok(Grid { d, n, l })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `h^d`.
    pub fn cell(&self) -> f64 {
        self.h().powi(self.d as i32)
    }

    pub fn axis(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n).map(|j| -self.l + j as f64 * h).collect()
    }

    /// Angular wavenumbers in FFT order: `π k / L` for `k = 0..n/2-1, -n/2..-1`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as i64;
        (0..n)
            .map(|k| {
                let k = if k < n / 2 { k } else { k - n };
                std::f64::consts::PI * k as f64 / self.l
            })
            .collect()
    }

    /// Node coordinates, row-major (first axis slowest).
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let ax = self.axis();
        match self.d {
            1 => ax.iter().map(|&x| vec![x]).collect(),
            _ => ax.iter().flat_map(|&x| ax.iter().map(move |&y| vec![x, y])).collect(),
        }
    }

    /// `|x|` at every node.
    pub fn radii(&self) -> Vec<f64> {
        self.nodes().iter().map(|x| x.iter().map(|c| c * c).sum::<f64>().sqrt()).collect()
    }

    /// `|ξ|²` at every spectral index.
    pub fn xi_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        match self.d {
            1 => k.iter().map(|a| a * a).collect(),
            _ => k.iter().flat_map(|&a| k.iter().map(move |&b| a * a + b * b)).collect(),
        }
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.d == other.d && self.n == other.n && (self.l - other.l).abs() <= 1e-12 * self.l
    }
}

/// Complex samples of a field on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl GridField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self, SimError> {
        if values.len() != grid.len() {
            return Err(SimError::Grid(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Grid("non-finite field value".into()));
        }
        Ok(GridField { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        GridField { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|x| f(x)).collect();
        GridField { grid, values }
    }

    /// `amp · exp(-|x|² / width²)`.
    pub fn gaussian(grid: Grid, amp: f64, width: f64) -> Self {
        Self::from_fn(grid, |x| {
            let r2: f64 = x.iter().map(|c| c * c).sum();
            Complex64::new(amp * (-r2 / (width * width)).exp(), 0.0)
        })
    }

    /// `exp(i k·x)` with integer-valued `k` when `L = π`.
    pub fn plane_wave(grid: Grid, k: &[f64]) -> Self {
        Self::from_fn(grid, |x| {
            let phase: f64 = x.iter().zip(k).map(|(a, b)| a * b).sum();
            Complex64::from_polar(1.0, phase)
        })
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, c: f64) -> Self {
        GridField { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn sub(&self, other: &GridField) -> GridField {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        GridField { grid: self.grid, values }
    }

    /// Discrete `L²` norm `(h^d Σ|u|²)^{1/2}`.
    pub fn l2(&self) -> f64 {
        (self.grid.cell() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `‖self - other‖ / ‖other‖` in discrete `L²`.
    pub fn rel_l2(&self, other: &GridField) -> f64 {
        let denom = other.l2();
        let num = self.sub(other).l2();
        if denom == 0.0 {
            num
        } else {
            num / denom
        }
    }
}

/// Regularized weight `max(|x|, ρ)^{-b}` sampled at the nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    pub grid: Grid,
    pub b: f64,
    pub rho: f64,
    pub values: Vec<f64>,
}

/// Default regularization radius `h/2`.
pub fn default_rho(grid: &Grid) -> f64 {
    grid.h() / 2.0
}

pub fn make_weight(grid: Grid, b: f64, rho: f64) -> Result<Weight, SimError> {
    if !(b.is_finite() && b >= 0.0) {
        return Err(SimError::Config(format!("weight exponent b = {b} must be nonnegative")));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(SimError::Config(format!("regularization radius rho = {rho} must be positive")));
    }
    let values = grid.radii().iter().map(|r| r.max(rho).powf(-b)).collect();
    Ok(Weight { grid, b, rho, values })
}
