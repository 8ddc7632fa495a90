//! Fixed-point iteration of the Duhamel map
//! `Tu(t) = e^{itΔ²}u₀ − iλ ∫₀ᵗ e^{i(t−τ)Δ²} w |u(τ)|^σ u(τ) dτ`
//! on a uniform set of time nodes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

use super::flow::Trajectory;
use super::grid::{GridField, Weight};
use super::norms::{energy_with, mass};
use super::spectral::Spectral;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub t_final: f64,
    pub m_nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Regularity of the `H^s` distance between iterates.
    pub s: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { t_final: 1e-2, m_nodes: 33, tol: 1e-10, max_iter: 100, s: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicardResult {
    pub trajectory: Trajectory,
    /// Number of applications of the Duhamel map.
    pub iterates: usize,
    /// `‖u_{k+1} − u_k‖ / ‖u_k − u_{k−1}‖` per iteration.
    pub ratios: Vec<f64>,
    /// `max_t ‖u_{k+1}(t) − u_k(t)‖_{H^s}` per iteration.
    pub diffs: Vec<f64>,
}

/// `∫₀¹ e^{izu} du` and `∫₀¹ u e^{izu} du`.
fn phi(z: f64) -> (Complex64, Complex64) {
    let iz = Complex64::new(0.0, z);
    if z.abs() < 1.0 {
        let (mut i0, mut i1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut term = Complex64::new(1.0, 0.0); // (iz)^n / n!
        for n in 0..30 {
            i0 += term / (n as f64 + 1.0);
            i1 += term / (n as f64 + 2.0);
            term = term * iz / (n as f64 + 1.0);
        }
        (i0, i1)
    } else {
        let e = iz.exp();
        let i0 = (e - 1.0) / iz;
        let i1 = e / iz + (e - 1.0) / (z * z);
        (i0, i1)
    }
}

/// Per-mode weights of the product trapezoid rule on one time cell of length `dt`.
/// The oscillatory factor is integrated exactly and the nonlinearity interpolated linearly.
struct Quadrature {
    step: Vec<Complex64>,
    w_left: Vec<Complex64>,
    w_right: Vec<Complex64>,
}

impl Quadrature {
    fn new(xi2: &[f64], dt: f64) -> Self {
        let mut q = Quadrature { step: vec![], w_left: vec![], w_right: vec![] };
        for &x2 in xi2 {
            let z = x2 * x2 * dt;
            let (i0, i1) = phi(z);
            q.step.push(Complex64::from_polar(1.0, z));
            q.w_left.push(i1 * dt);
            q.w_right.push((i0 - i1) * dt);
        }
        q
    }
}

pub fn picard_solve(u0: &GridField, w: &Weight, lambda: f64, sigma: f64, cfg: &PicardConfig) -> Result<PicardResult, SimError> {
    if !(cfg.t_final.is_finite() && cfg.t_final > 0.0) {
        return Err(SimError::Config(format!("T = {} must be positive", cfg.t_final)));
    }
    if cfg.m_nodes < 2 {
        return Err(SimError::Config(format!("m_nodes = {} must be at least 2", cfg.m_nodes)));
    }
    if !u0.grid.same_as(&w.grid) {
        return Err(SimError::IncompatibleGrids("initial data and weight live on different grids".into()));
    }
    let sp = Spectral::new(u0.grid);
    let m = cfg.m_nodes;
    let dt = cfg.t_final / (m - 1) as f64;
    let times: Vec<f64> = (0..m).map(|k| k as f64 * dt).collect();
    let quad = Quadrature::new(sp.xi2(), dt);
    let scale = u0.grid.cell() / u0.grid.len() as f64;
    let hs_weight: Vec<f64> = sp.xi2().iter().map(|x2| (1.0 + x2).powf(cfg.s)).collect();
    let hs_dist = |a: &[Complex64], b: &[Complex64]| -> f64 {
        let sum: f64 = a.iter().zip(b).zip(&hs_weight).map(|((x, y), wt)| wt * (x - y).norm_sqr()).sum();
        (scale * sum).sqrt()
    };

    let c0 = sp.forward(&u0.values);
    let free: Vec<Vec<Complex64>> = times
        .iter()
        .map(|&t| c0.iter().zip(sp.xi2()).map(|(c, x2)| c * Complex64::from_polar(1.0, t * x2 * x2)).collect())
        .collect();
    let mut current = free.clone();
    let mut diffs = Vec::new();
    let mut ratios = Vec::new();
    let coupling = Complex64::new(0.0, -lambda);
    let mut iterates = 0;
    loop {
        iterates += 1;
        let nonlinear: Vec<Vec<Complex64>> = current
            .iter()
            .map(|c| {
                let u = sp.inverse(c);
                let n: Vec<Complex64> = u.iter().zip(&w.values).map(|(v, wv)| v * (wv * v.norm().powf(sigma))).collect();
                sp.forward(&n)
            })
            .collect();
        let mut next = Vec::with_capacity(m);
        let mut duhamel = vec![Complex64::new(0.0, 0.0); c0.len()];
        next.push(free[0].clone());
        for j in 0..m - 1 {
            for (i, d) in duhamel.iter_mut().enumerate() {
                *d = quad.step[i] * *d + quad.w_left[i] * nonlinear[j][i] + quad.w_right[i] * nonlinear[j + 1][i];
            }
            next.push(free[j + 1].iter().zip(&duhamel).map(|(f, d)| f + coupling * d).collect());
        }
        let diff = next.iter().zip(&current).map(|(a, b)| hs_dist(a, b)).fold(0.0, f64::max);
        if let Some(prev) = diffs.last() {
            ratios.push(if *prev == 0.0 { 0.0 } else { diff / prev });
        }
        diffs.push(diff);
        current = next;
        if !diff.is_finite() || iterates >= cfg.max_iter && !(diff < cfg.tol) {
            return Err(SimError::NonConvergence { iterations: iterates, last_diff: diff, ratios });
        }
        if diff < cfg.tol {
            break;
        }
    }

    let mut traj = Trajectory { times, states: vec![], mass_log: vec![], energy_log: vec![], hs_log: vec![], blow_up: false };
    for c in &current {
        let u = GridField { grid: u0.grid, values: sp.inverse(c) };
        traj.mass_log.push(mass(&u));
        traj.energy_log.push(energy_with(&sp, &u, w, lambda, sigma));
        traj.hs_log.push(sp.sobolev_norm(&u, cfg.s, false));
        traj.states.push(u);
    }
    Ok(PicardResult { trajectory: traj, iterates, ratios, diffs })
}

/// Whether every contraction ratio stays below one within `cfg.max_iter` iterations
/// (convergence before the cap counts as contracting).
pub fn contracts(u0: &GridField, w: &Weight, lambda: f64, sigma: f64, cfg: &PicardConfig) -> bool {
    match picard_solve(u0, w, lambda, sigma, cfg) {
        Ok(r) => r.ratios.iter().all(|&q| q < 1.0),
        Err(SimError::NonConvergence { ratios, last_diff, .. }) => last_diff.is_finite() && !ratios.is_empty() && ratios.iter().all(|&q| q < 1.0),
        Err(_) => false,
    }
}

/// Largest `T` in `[lo, hi]` at which the iteration contracts, by bisection to relative width `rel`.
pub fn contraction_threshold(u0: &GridField, w: &Weight, lambda: f64, sigma: f64, base: &PicardConfig, lo: f64, hi: f64, rel: f64) -> f64 {
    let test = |t: f64| contracts(u0, w, lambda, sigma, &PicardConfig { t_final: t, ..base.clone() });
    let (mut lo, mut hi) = (lo, hi);
    if test(hi) {
        return hi;
    }
    if !test(lo) {
        return lo;
    }
    while (hi - lo) > rel * hi {
        let mid = (lo * hi).sqrt();
        if test(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
