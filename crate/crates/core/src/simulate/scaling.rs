use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::ParamSet;
use crate::error::SimError;

use super::flow::{evolve, EvolveConfig};
use super::grid::{make_weight, Grid, GridField};
use super::spectral::{sobolev_norm, Spectral};

/// `(4 − b)/σ`, the amplitude exponent of the scaling law.
pub fn amplitude_exponent(b: f64, sigma: f64) -> f64 {
    (4.0 - b) / sigma
}

/// `u_α(x) = α^{(4−b)/σ} u(αx)` on the grid with half-length `L/α` and the same `n`.
pub fn scaling_transform(u: &GridField, alpha: f64, params: &ParamSet) -> Result<GridField, SimError> {
    let target = Grid::new(u.grid.d, u.grid.n, u.grid.l / alpha)?;
    scaling_transform_onto(u, alpha, params.b.to_f64(), params.sigma.to_f64(), target)
}

/// As [`scaling_transform`] onto an explicit target grid. The target must satisfy
/// `α · L_target = L` and its `n` must differ from the source by a power of two.
pub fn scaling_transform_onto(u: &GridField, alpha: f64, b: f64, sigma: f64, target: Grid) -> Result<GridField, SimError> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(SimError::Config(format!("alpha = {alpha} must be positive")));
    }
    if target.d != u.grid.d || (alpha * target.l - u.grid.l).abs() > 1e-12 * u.grid.l {
        return Err(SimError::IncompatibleGrids(format!(
            "target half-length {} times alpha {} does not match source half-length {}",
            target.l, alpha, u.grid.l
        )));
    }
    let amp = alpha.powf(amplitude_exponent(b, sigma));
    let values = resample(u, target.n)?;
    Ok(GridField { grid: target, values: values.into_iter().map(|v| v * amp).collect() })
}

/// Values of the trigonometric interpolant of `u` on `n_target` equispaced nodes of the same box.
fn resample(u: &GridField, n_target: usize) -> Result<Vec<Complex64>, SimError> {
    let (d, n) = (u.grid.d, u.grid.n);
    if n_target == n {
        return Ok(u.values.clone());
    }
    if n_target < n {
        if n % n_target != 0 {
            return Err(SimError::IncompatibleGrids(format!("cannot subsample {n} points onto {n_target}")));
        }
        let step = n / n_target;
        return Ok(match d {
            1 => (0..n_target).map(|i| u.values[i * step]).collect(),
            _ => (0..n_target)
                .flat_map(|i| (0..n_target).map(move |j| (i, j)))
                .map(|(i, j)| u.values[i * step * n + j * step])
                .collect(),
        });
    }
    if n_target % n != 0 {
        return Err(SimError::IncompatibleGrids(format!("cannot interpolate {n} points onto {n_target}")));
    }
    // Zero-pad the spectrum; the source Nyquist mode is split evenly between ±n/2.
    let target = Grid::new(d, n_target, u.grid.l)?;
    let src = Spectral::new(u.grid).forward(&u.values);
    let axis = |k: usize| -> Vec<(usize, f64)> {
        let signed = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
        if signed == -(n as i64) / 2 {
            vec![(n / 2, 0.5), (n_target - n / 2, 0.5)]
        } else if signed >= 0 {
            vec![(signed as usize, 1.0)]
        } else {
            vec![((n_target as i64 + signed) as usize, 1.0)]
        }
    };
    let mut dst = vec![Complex64::new(0.0, 0.0); target.len()];
    let factor = (n_target as f64 / n as f64).powi(d as i32);
    match d {
        1 => {
            for (k, c) in src.iter().enumerate() {
                for (t, f) in axis(k) {
                    dst[t] += c * f * factor;
                }
            }
        }
        _ => {
            for k1 in 0..n {
                for k2 in 0..n {
                    let c = src[k1 * n + k2];
                    for (t1, f1) in axis(k1) {
                        for (t2, f2) in axis(k2) {
                            dst[t1 * n_target + t2] += c * f1 * f2 * factor;
                        }
                    }
                }
            }
        }
    }
    Ok(Spectral::new(target).inverse(&dst))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub alpha: f64,
    /// Relative `L²` gap between "evolve to α⁴t, then scale" and "scale, then evolve to t".
    pub covariance_error: f64,
    pub hs_factor: f64,
    pub hs_expected: f64,
    pub mass_factor: f64,
    pub mass_expected: f64,
}

/// Scaling covariance experiment. The scaled run uses step `cfg.dt` to `cfg.t_final`,
/// the unscaled run uses `α⁴·dt` to `α⁴·t_final`, and the weight radius goes `ρ → ρ/α`.
pub fn scale_test(u0: &GridField, b: f64, sigma: f64, s: f64, alpha: f64, rho: f64, cfg: &EvolveConfig) -> Result<ScaleReport, SimError> {
    let a4 = alpha.powi(4);
    let target = Grid::new(u0.grid.d, u0.grid.n, u0.grid.l / alpha)?;
    let w = make_weight(u0.grid, b, rho)?;
    let w_scaled = make_weight(target, b, rho / alpha)?;
    let slow = EvolveConfig { dt: cfg.dt * a4, t_final: cfg.t_final * a4, sigma, ..cfg.clone() };
    let fast = EvolveConfig { sigma, ..cfg.clone() };
    let left = evolve(u0, &w, &slow)?;
    let left = scaling_transform_onto(left.last(), alpha, b, sigma, target)?;
    let v0 = scaling_transform_onto(u0, alpha, b, sigma, target)?;
    let right = evolve(&v0, &w_scaled, &fast)?;
    let a = amplitude_exponent(b, sigma);
    let d = u0.grid.d as f64;
    Ok(ScaleReport {
        alpha,
        covariance_error: left.rel_l2(right.last()),
        hs_factor: sobolev_norm(&v0, s, true) / sobolev_norm(u0, s, true),
        hs_expected: alpha.powf(s + a - d / 2.0),
        mass_factor: v0.l2().powi(2) / u0.l2().powi(2),
        mass_expected: alpha.powf(2.0 * a - d),
    })
}
