use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

use super::grid::{GridField, Weight};
use super::norms::{energy_with, mass};
use super::spectral::Spectral;

/// Exact solution of `i u_t = λ w |u|^σ u` over `dt`: a pointwise phase rotation.
pub fn nonlinear_phase(u: &GridField, w: &Weight, lambda: f64, sigma: f64, dt: f64) -> GridField {
    if lambda == 0.0 {
        return u.clone();
    }
    let values = u
        .values
        .iter()
        .zip(&w.values)
        .map(|(v, wv)| v * Complex64::from_polar(1.0, -lambda * dt * wv * v.norm().powf(sigma)))
        .collect();
    GridField { grid: u.grid, values }
}

/// Settings shared by the split-step integrator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_final: f64,
    pub lambda: f64,
    pub sigma: f64,
    /// Regularity of the logged `H^s` norm and of the blow-up ceiling.
    pub s: f64,
    /// Record a snapshot every this many steps (the final time is always recorded).
    pub snapshot_every: usize,
    /// Absolute `H^s` ceiling; `None` means 1e6 times the initial norm.
    pub ceiling: Option<f64>,
    pub dealias: bool,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            dt: 1e-4,
            t_final: 0.1,
            lambda: 1.0,
            sigma: 2.0,
            s: 1.0,
            snapshot_every: 100,
            ceiling: None,
            dealias: false,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(SimError::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(SimError::Config(format!("T = {} must be positive", self.t_final)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(SimError::Config(format!("sigma = {} must be positive", self.sigma)));
        }
        if !self.lambda.is_finite() {
            return Err(SimError::Config("lambda must be finite".into()));
        }
        if self.s < 0.0 {
            return Err(SimError::Config(format!("s = {} must be nonnegative", self.s)));
        }
        if self.snapshot_every == 0 {
            return Err(SimError::Config("snapshot_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Step count and the step that lands exactly on `t_final`.
    pub fn steps(&self) -> (usize, f64) {
        let ratio = self.t_final / self.dt;
        let n = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) { ratio.round() } else { ratio.ceil() };
        let n = (n as usize).max(1);
        (n, self.t_final / n as f64)
    }
}

/// Snapshots of one run plus conservation logs.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GridField>,
    pub mass_log: Vec<f64>,
    pub energy_log: Vec<f64>,
    pub hs_log: Vec<f64>,
    pub blow_up: bool,
}

impl Trajectory {
    pub fn last(&self) -> &GridField {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn mass_drift(&self) -> f64 {
        rel_drift(&self.mass_log)
    }

    pub fn energy_drift(&self) -> f64 {
        rel_drift(&self.energy_log)
    }
}

/// `max_k |x_k − x_0| / |x_0|`.
fn rel_drift(log: &[f64]) -> f64 {
    let Some(&first) = log.first() else { return 0.0 };
    let scale = if first == 0.0 { 1.0 } else { first.abs() };
    log.iter().map(|v| (v - first).abs() / scale).fold(0.0, f64::max)
}

/// Split-step integrator with cached transforms.
pub struct Stepper<'a> {
    pub spectral: Spectral,
    pub weight: &'a Weight,
    pub lambda: f64,
    pub sigma: f64,
    pub dealias: bool,
}

impl<'a> Stepper<'a> {
    pub fn new(weight: &'a Weight, lambda: f64, sigma: f64) -> Self {
        Stepper { spectral: Spectral::new(weight.grid), weight, lambda, sigma, dealias: false }
    }

    fn phase(&self, u: &GridField, dt: f64) -> GridField {
        let v = nonlinear_phase(u, self.weight, self.lambda, self.sigma, dt);
        if self.dealias && self.lambda != 0.0 {
            self.spectral.dealias(&v)
        } else {
            v
        }
    }

    /// Half phase, full linear flow, half phase. Negative `dt` runs backward.
    pub fn strang(&self, u: &GridField, dt: f64) -> GridField {
        let v = self.phase(u, dt / 2.0);
        let v = self.spectral.propagate(&v, dt);
        self.phase(&v, dt / 2.0)
    }

    pub fn energy(&self, u: &GridField) -> f64 {
        energy_with(&self.spectral, u, self.weight, self.lambda, self.sigma)
    }
}

pub fn strang_step(u: &GridField, w: &Weight, lambda: f64, sigma: f64, dt: f64) -> GridField {
    Stepper::new(w, lambda, sigma).strang(u, dt)
}

/// Repeated Strang steps to `cfg.t_final`, logging mass, energy and `H^s` at each snapshot.
/// Stops early with `blow_up` set when the `H^s` norm passes the ceiling or the field stops being finite.
pub fn evolve(u0: &GridField, w: &Weight, cfg: &EvolveConfig) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    if !u0.grid.same_as(&w.grid) {
        return Err(SimError::IncompatibleGrids("initial data and weight live on different grids".into()));
    }
    let mut stepper = Stepper::new(w, cfg.lambda, cfg.sigma);
    stepper.dealias = cfg.dealias;
    let (n, dt) = cfg.steps();
    let hs0 = stepper.spectral.sobolev_norm(u0, cfg.s, false);
    let ceiling = cfg.ceiling.unwrap_or(1e6 * hs0.max(f64::MIN_POSITIVE));
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![u0.clone()],
        mass_log: vec![mass(u0)],
        energy_log: vec![stepper.energy(u0)],
        hs_log: vec![hs0],
        blow_up: false,
    };
    if !(hs0 <= ceiling) {
        traj.blow_up = true;
        return Ok(traj);
    }
    let mut u = u0.clone();
    for k in 1..=n {
        u = stepper.strang(&u, dt);
        let record = k % cfg.snapshot_every == 0 || k == n;
        let finite = u.is_finite();
        let hs = if finite { stepper.spectral.sobolev_norm(&u, cfg.s, false) } else { f64::INFINITY };
        if !finite || !(hs <= ceiling) {
            traj.blow_up = true;
            if finite {
                push(&mut traj, &stepper, k as f64 * dt, u, hs);
            }
            break;
        }
        if record {
            push(&mut traj, &stepper, k as f64 * dt, u.clone(), hs);
        }
    }
    Ok(traj)
}

fn push(traj: &mut Trajectory, stepper: &Stepper, t: f64, u: GridField, hs: f64) {
    traj.times.push(t);
    traj.mass_log.push(mass(&u));
    traj.energy_log.push(stepper.energy(&u));
    traj.hs_log.push(hs);
    traj.states.push(u);
}

/// Relative `L²` error after `steps` forward steps followed by the same number backward.
pub fn time_reversal_error(u0: &GridField, w: &Weight, lambda: f64, sigma: f64, dt: f64, steps: usize) -> f64 {
    let stepper = Stepper::new(w, lambda, sigma);
    let mut u = u0.clone();
    for _ in 0..steps {
        u = stepper.strang(&u, dt);
    }
    for _ in 0..steps {
        u = stepper.strang(&u, -dt);
    }
    u.rel_l2(u0)
}
