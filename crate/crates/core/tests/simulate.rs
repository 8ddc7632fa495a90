use std::f64::consts::PI;

use ibnls::classify::ParamSet;
use ibnls::error::SimError;
use ibnls::simulate::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn mode_grid() -> Grid {
    Grid::new(1, 16, PI).unwrap()
}

fn gauss_grid() -> Grid {
    Grid::new(1, 256, 8.0).unwrap()
}

fn max_err(a: &GridField, b: &[Complex64]) -> f64 {
    a.values.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn grid_validation() {
    assert!(Grid::new(3, 16, 1.0).is_err());
    assert!(Grid::new(1, 12, 1.0).is_err());
    assert!(Grid::new(1, 4, 1.0).is_err());
    assert!(Grid::new(1, 16, 0.0).is_err());
    let g = Grid::new(2, 8, PI).unwrap();
    assert_eq!(g.len(), 64);
    assert_eq!(g.wavenumbers()[7], -1.0);
}

#[test]
fn single_mode_phase() {
    let u = GridField::plane_wave(mode_grid(), &[3.0]);
    let out = linear_propagate(&u, 0.1);
    let want: Vec<_> = u.values.iter().map(|v| v * Complex64::from_polar(1.0, 8.1)).collect();
    assert!(max_err(&out, &want) < 1e-12);
    assert_eq!(linear_propagate(&u, 0.0), u);
}

#[test]
fn two_dimensional_mode_phase() {
    let g = Grid::new(2, 16, PI).unwrap();
    let u = GridField::plane_wave(g, &[2.0, -1.0]);
    let out = linear_propagate(&u, 0.05);
    // |ξ|⁴ = 25
    let want: Vec<_> = u.values.iter().map(|v| v * Complex64::from_polar(1.0, 1.25)).collect();
    assert!(max_err(&out, &want) < 1e-12);
}

#[test]
fn nonlinear_phase_closed_form() {
    let g = Grid::new(1, 16, 4.0).unwrap();
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    let c = Complex64::new(0.6, -0.3);
    let u = GridField::new(g, vec![c; 16]).unwrap();
    assert_eq!(nonlinear_phase(&u, &w, 0.0, 2.0, 0.1), u);
    let out = nonlinear_phase(&u, &w, 1.5, 3.0, 0.01);
    for (j, v) in out.values.iter().enumerate() {
        let want = c * Complex64::from_polar(1.0, -1.5 * 0.01 * w.values[j] * c.norm().powf(3.0));
        assert!((v - want).norm() < 1e-15);
    }
}

#[test]
fn strang_without_nonlinearity_is_linear_flow() {
    let g = gauss_grid();
    let u = GridField::gaussian(g, 1.0, 1.0);
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    let a = strang_step(&u, &w, 0.0, 2.0, 1e-3);
    let b = linear_propagate(&u, 1e-3);
    assert!(a.rel_l2(&b) < 1e-14);
    let c = strang_step(&u, &w, 1.0, 2.0, 1e-3);
    assert!(rel(mass(&c), mass(&u)) < 1e-12);
}

#[test]
fn evolve_linear_mode_matches_closed_form() {
    let g = mode_grid();
    let u = GridField::plane_wave(g, &[3.0]);
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    let cfg = EvolveConfig { dt: 1e-3, t_final: 0.05, lambda: 0.0, snapshot_every: 7, ..Default::default() };
    let traj = evolve(&u, &w, &cfg).unwrap();
    assert!(!traj.blow_up);
    assert!(traj.times.windows(2).all(|t| t[1] > t[0]));
    assert_eq!(*traj.times.last().unwrap(), 0.05);
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let want: Vec<_> = u.values.iter().map(|v| v * Complex64::from_polar(1.0, 81.0 * t)).collect();
        assert!(max_err(state, &want) < 1e-12, "t = {t}");
    }
}

#[test]
fn evolve_gaussian_conserves_mass() {
    let g = Grid::new(1, 256, 32.0).unwrap();
    let u = GridField::gaussian(g, 1.0, 1.0);
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    let cfg = EvolveConfig { t_final: 0.02, ..Default::default() };
    let traj = evolve(&u, &w, &cfg).unwrap();
    assert!(traj.mass_drift() < 1e-10);
    assert_eq!(traj.times.len(), traj.mass_log.len());
    assert_eq!(traj.times.len(), traj.energy_log.len());
}

#[test]
fn evolve_flags_blow_up() {
    let g = Grid::new(1, 64, 8.0).unwrap();
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    let cfg = EvolveConfig { dt: 1e-3, t_final: 1.0, ceiling: Some(1e6), snapshot_every: 1, ..Default::default() };
    let traj = evolve(&GridField::gaussian(g, 1e7, 1.0), &w, &cfg).unwrap();
    assert!(traj.blow_up);
    assert_eq!(traj.times, vec![0.0]);
    // focusing growth past a ceiling set just above the initial norm
    let u = GridField::gaussian(g, 3.0, 1.0);
    let hs0 = sobolev_norm(&u, 1.0, false);
    let cfg = EvolveConfig { lambda: -5.0, ceiling: Some(1.01 * hs0), ..cfg };
    let traj = evolve(&u, &w, &cfg).unwrap();
    assert!(traj.blow_up);
    assert!(*traj.times.last().unwrap() < 1.0);
}

#[test]
fn evolve_rejects_bad_config() {
    let g = mode_grid();
    let u = GridField::zeros(g);
    let w = make_weight(g, 0.5, 0.1).unwrap();
    assert!(matches!(evolve(&u, &w, &EvolveConfig { dt: 0.0, ..Default::default() }), Err(SimError::Config(_))));
    assert!(matches!(evolve(&u, &w, &EvolveConfig { t_final: -1.0, ..Default::default() }), Err(SimError::Config(_))));
}

#[test]
fn time_reversal_is_second_order() {
    let g = Grid::new(1, 128, 32.0).unwrap();
    let u = GridField::gaussian(g, 1.0, 1.0);
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    let e = time_reversal_error(&u, &w, 1.0, 2.0, 1e-4, 50);
    assert!(e < 1e-8, "{e}");
}

#[test]
fn picard_free_flow_converges_in_one_iteration() {
    let g = gauss_grid();
    let u = GridField::gaussian(g, 1.0, 1.0);
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    let r = picard_solve(&u, &w, 0.0, 2.0, &PicardConfig::default()).unwrap();
    assert_eq!(r.iterates, 1);
    assert!(r.ratios.is_empty());
}

#[test]
fn picard_contracts_for_short_time() {
    let g = Grid::new(1, 256, 32.0).unwrap();
    let u = GridField::gaussian(g, 1.0, 1.0);
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    let r = picard_solve(&u, &w, 1.0, 2.0, &PicardConfig::default()).unwrap();
    assert!(!r.ratios.is_empty());
    assert!(r.ratios.iter().all(|&q| q < 1.0));
    assert_eq!(r.trajectory.times.len(), 33);
}

#[test]
fn picard_long_time_does_not_converge() {
    let g = Grid::new(1, 256, 32.0).unwrap();
    let u = GridField::gaussian(g, 3.0, 1.0);
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    let cfg = PicardConfig { t_final: 10.0, ..Default::default() };
    assert!(matches!(picard_solve(&u, &w, 1.0, 2.0, &cfg), Err(SimError::NonConvergence { .. })));
    assert!(picard_solve(&u, &w, 1.0, 2.0, &PicardConfig { m_nodes: 1, ..Default::default() }).is_err());
}

#[test]
fn mass_examples() {
    assert_eq!(mass(&GridField::zeros(gauss_grid())), 0.0);
    let u = GridField::gaussian(gauss_grid(), 1.0, 1.0);
    assert!((mass(&u) - (PI / 2.0).sqrt()).abs() < 1e-10);
    let m = GridField::plane_wave(mode_grid(), &[3.0]);
    assert!((mass(&m) - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn energy_examples() {
    let g = gauss_grid();
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    assert_eq!(energy(&GridField::zeros(g), &w, 1.0, 2.0), 0.0);
    let u = GridField::gaussian(g, 1.0, 1.0);
    assert!((energy(&u, &w, 0.0, 2.0) - 1.5 * (PI / 2.0).sqrt()).abs() < 1e-9);
    let mg = mode_grid();
    let wm = make_weight(mg, 0.5, default_rho(&mg)).unwrap();
    let m = GridField::plane_wave(mg, &[3.0]);
    assert!(rel(energy(&m, &wm, 0.0, 2.0), 81.0 * PI) < 1e-12);
}

#[test]
fn sobolev_norm_examples() {
    let u = GridField::gaussian(gauss_grid(), 1.0, 1.0);
    assert!(rel(sobolev_norm(&u, 0.0, true), mass(&u).sqrt()) < 1e-12);
    assert!(rel(sobolev_norm(&u, 0.0, false), mass(&u).sqrt()) < 1e-12);
    let m = GridField::plane_wave(mode_grid(), &[3.0]);
    assert!(rel(sobolev_norm(&m, 1.0, true), 3.0 * (2.0 * PI).sqrt()) < 1e-12);
    assert!(rel(sobolev_norm(&m, 1.0, false), (10.0 * 2.0 * PI).sqrt()) < 1e-12);
    assert_eq!(sobolev_norm(&GridField::zeros(mode_grid()), 2.0, false), 0.0);
}

fn constant_traj(u: &GridField, times: Vec<f64>) -> Trajectory {
    let k = times.len();
    Trajectory {
        times,
        states: vec![u.clone(); k],
        mass_log: vec![0.0; k],
        energy_log: vec![0.0; k],
        hs_log: vec![0.0; k],
        blow_up: false,
    }
}

#[test]
fn spacetime_norm_examples() {
    let g = gauss_grid();
    let u = GridField::gaussian(g, 1.0, 1.0);
    let traj = constant_traj(&u, vec![0.0, 0.1, 0.3, 0.5]);
    let lq = lebesgue_norm(&u, 4.0);
    assert!(rel(spacetime_norm(&traj, 2.0, 4.0), 0.5f64.sqrt() * lq) < 1e-12);
    assert!(rel(spacetime_norm(&traj, f64::INFINITY, 4.0), lq) < 1e-12);
    let z = constant_traj(&GridField::zeros(g), vec![0.0, 1.0]);
    assert_eq!(spacetime_norm(&z, 3.0, 2.0), 0.0);
    assert_eq!(lebesgue_norm(&u, f64::INFINITY), 1.0);
}

#[test]
fn weight_examples() {
    let g = Grid::new(1, 16, 4.0).unwrap();
    let w = make_weight(g, 1.0, default_rho(&g)).unwrap();
    let ax = g.axis();
    let at = |x: f64| w.values[ax.iter().position(|&a| a == x).unwrap()];
    assert_eq!(at(2.0), 0.5);
    assert_eq!(at(0.0), 1.0 / (g.h() / 2.0));
    assert!(at(1.0) >= at(2.0));
    assert!(make_weight(g, 1.0, 0.0).is_err());
}

#[test]
fn scaling_identity_and_norm_factors() {
    let g = Grid::new(1, 128, 16.0).unwrap();
    let p = ParamSet::parse(1, "1", "1/2", "2").unwrap();
    let u = GridField::gaussian(g, 1.0, 1.0);
    let same = scaling_transform(&u, 1.0, &p).unwrap();
    assert_eq!(same, u);
    let v = scaling_transform(&u, 2.0, &p).unwrap();
    assert_eq!(v.grid.l, 8.0);
    let factor = sobolev_norm(&v, 1.0, true) / sobolev_norm(&u, 1.0, true);
    assert!((factor - 2f64.powf(9.0 / 4.0)).abs() < 1e-8);
    let mfactor = mass(&v) / mass(&u);
    assert!((mfactor - 2f64.powf(2.0 * 7.0 / 4.0 - 1.0)).abs() < 1e-8);
}

#[test]
fn scaling_rejects_incompatible_grid() {
    let g = Grid::new(1, 64, 16.0).unwrap();
    let u = GridField::gaussian(g, 1.0, 1.0);
    let wrong = Grid::new(1, 64, 5.0).unwrap();
    assert!(matches!(scaling_transform_onto(&u, 2.0, 0.5, 2.0, wrong), Err(SimError::IncompatibleGrids(_))));
    let odd = Grid::new(1, 64, 8.0).unwrap();
    assert!(scaling_transform_onto(&u, 2.0, 0.5, 2.0, odd).is_ok());
}

#[test]
fn scaling_resamples_between_resolutions() {
    let g = Grid::new(1, 64, 16.0).unwrap();
    let u = GridField::gaussian(g, 1.0, 2.0);
    let fine = Grid::new(1, 128, 8.0).unwrap();
    let v = scaling_transform_onto(&u, 2.0, 0.5, 2.0, fine).unwrap();
    let amp = 2f64.powf(7.0 / 4.0);
    let want = GridField::from_fn(fine, |x| Complex64::new(amp * (-(2.0 * x[0]).powi(2) / 4.0).exp(), 0.0));
    assert!(v.rel_l2(&want) < 1e-10);
    let coarse = Grid::new(1, 32, 8.0).unwrap();
    let c = scaling_transform_onto(&u, 2.0, 0.5, 2.0, coarse).unwrap();
    assert_eq!(c.values[0], u.values[0] * amp);
}

#[test]
fn scale_test_covariance() {
    let g = Grid::new(1, 128, 32.0).unwrap();
    let u = GridField::gaussian(g, 1.0, 1.0);
    let cfg = EvolveConfig { dt: 1e-5, t_final: 2e-4, ..Default::default() };
    let r = scale_test(&u, 0.5, 2.0, 1.0, 2.0, default_rho(&g), &cfg).unwrap();
    assert!(r.covariance_error < 1e-4);
    assert!(rel(r.hs_factor, r.hs_expected) < 1e-8);
}

#[test]
fn dealias_removes_top_third() {
    let g = Grid::new(1, 16, PI).unwrap();
    let sp = Spectral::new(g);
    let hi = GridField::plane_wave(g, &[7.0]);
    assert!(sp.dealias(&hi).l2() < 1e-12);
    let lo = GridField::plane_wave(g, &[2.0]);
    assert!(sp.dealias(&lo).rel_l2(&lo) < 1e-12);
}

#[test]
fn snapshot_and_log_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::new(2, 8, 2.0).unwrap();
    let u = GridField::from_fn(g, |x| Complex64::new(x[0], -x[1] * 0.5));
    let path = dir.path().join("snap.bin");
    io::write_snapshot(&path, &u, 0.25, serde_json::json!({"b": "1/2"})).unwrap();
    let (h, back) = io::read_snapshot(&path).unwrap();
    assert_eq!(back, u);
    assert_eq!(h.time, 0.25);
    let traj = constant_traj(&u, vec![0.0, 1.0]);
    let csv = dir.path().join("log.csv");
    io::write_log(&csv, &traj).unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("time,mass,energy,Hs_norm\n"));
    assert_eq!(text.lines().count(), 3);
}

fn field_strategy() -> impl Strategy<Value = GridField> {
    proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 64).prop_map(|v| {
        let g = Grid::new(1, 64, 4.0).unwrap();
        GridField::new(g, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_round_trip(u in field_strategy()) {
        let sp = Spectral::new(u.grid);
        let back = GridField { grid: u.grid, values: sp.inverse(&sp.forward(&u.values)) };
        prop_assert!(back.rel_l2(&u) < 1e-12);
    }

    #[test]
    fn propagator_is_unitary(u in field_strategy(), t in -1.0f64..1.0) {
        prop_assert!(rel(mass(&linear_propagate(&u, t)), mass(&u)) < 1e-12);
    }

    #[test]
    fn phase_preserves_modulus(u in field_strategy(), lambda in -3.0f64..3.0, sigma in 0.5f64..4.0, dt in -0.1f64..0.1) {
        let w = make_weight(u.grid, 0.7, 0.05).unwrap();
        let v = nonlinear_phase(&u, &w, lambda, sigma, dt);
        for (a, b) in u.values.iter().zip(&v.values) {
            prop_assert!((a.norm() - b.norm()).abs() <= 1e-15 * a.norm().max(1.0));
        }
    }

    #[test]
    fn strang_preserves_mass(u in field_strategy(), lambda in -2.0f64..2.0, sigma in 1.0f64..3.0) {
        let w = make_weight(u.grid, 0.5, 0.05).unwrap();
        let mut v = u.clone();
        for _ in 0..5 {
            v = strang_step(&v, &w, lambda, sigma, 1e-3);
        }
        prop_assert!(rel(mass(&v), mass(&u)) < 1e-12);
    }

    #[test]
    fn weight_is_bounded_and_radially_nonincreasing(b in 0.01f64..3.9, rho in 0.01f64..1.0) {
        let g = Grid::new(2, 8, 2.0).unwrap();
        let w = make_weight(g, b, rho).unwrap();
        let r = g.radii();
        for i in 0..w.values.len() {
            prop_assert!(w.values[i] > 0.0 && w.values[i] <= rho.powf(-b) * (1.0 + 1e-12));
            for j in 0..w.values.len() {
                if r[i] <= r[j] {
                    prop_assert!(w.values[i] >= w.values[j]);
                }
            }
        }
    }
}
