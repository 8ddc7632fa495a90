use super::flow::Trajectory;
use super::grid::{GridField, Weight};
use super::spectral::Spectral;

/// `h^d Σ |u|²`.
pub fn mass(u: &GridField) -> f64 {
    u.grid.cell() * u.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
}

/// `½∫|Δu|² − λ/(σ+2) ∫ w |u|^{σ+2}` with a spectral Laplacian and nodal quadrature.
pub fn energy(u: &GridField, w: &Weight, lambda: f64, sigma: f64) -> f64 {
    energy_with(&Spectral::new(u.grid), u, w, lambda, sigma)
}

pub(crate) fn energy_with(sp: &Spectral, u: &GridField, w: &Weight, lambda: f64, sigma: f64) -> f64 {
    let kinetic = sp.weighted_norm(u, |x2| x2).powi(2) / 2.0;
    if lambda == 0.0 {
        return kinetic;
    }
    let potential: f64 = u.values.iter().zip(&w.values).map(|(v, wv)| wv * v.norm().powf(sigma + 2.0)).sum();
    kinetic - lambda / (sigma + 2.0) * u.grid.cell() * potential
}

/// Nodal `L^q` norm; `q = ∞` gives the max modulus.
pub fn lebesgue_norm(u: &GridField, q: f64) -> f64 {
    if q.is_infinite() {
        return u.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let sum: f64 = u.values.iter().map(|v| v.norm().powf(q)).sum();
    (u.grid.cell() * sum).powf(1.0 / q)
}

/// `‖u‖_{L^p_t L^q_x}` with the trapezoid rule over snapshot times (max when `p = ∞`).
pub fn spacetime_norm(traj: &Trajectory, p: f64, q: f64) -> f64 {
    let inner: Vec<f64> = traj.states.iter().map(|u| lebesgue_norm(u, q)).collect();
    if p.is_infinite() {
        return inner.iter().copied().fold(0.0, f64::max);
    }
    let mut integral = 0.0;
    for k in 1..inner.len() {
        let dt = traj.times[k] - traj.times[k - 1];
        integral += 0.5 * dt * (inner[k].powf(p) + inner[k - 1].powf(p));
    }
    integral.powf(1.0 / p)
}
