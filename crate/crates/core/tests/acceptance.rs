//! One line per acceptance criterion; exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use ibnls::admissible::ExponentPair;
use ibnls::certify::*;
use ibnls::classify::{theorem_applies, ParamSet};
use ibnls::cli::sample_gated;
use ibnls::exact::{Rational, SlackRational};
use ibnls::simulate::*;
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > budget {
        o.pass = false;
        o.detail.push_str(&format!("; over budget {:.2?} > {:.0?}", took, budget));
    } else {
        o.detail.push_str(&format!("; {:.2?}", took));
    }
    o
}

fn params(d: u32, s: &str, b: &str, sigma: &str) -> ParamSet {
    ParamSet::parse(d, s, b, sigma).unwrap()
}

fn gate_fidelity() -> Outcome {
    // (d, s, b, σ, checks expected to fail), each derived by hand from the hypotheses.
    let table: [(u32, &str, &str, &str, &[&str]); 12] = [
        (3, "1", "1", "2", &[]),
        (3, "1", "3", "2", &["b_range", "sigma_subcritical"]),
        (3, "1", "1", "6", &["sigma_subcritical"]),
        // s = 3 reaches min{2 + d/2, 3d/2} = 3, the b window is empty and σ = 1 < [s - d/2] = 2
        (2, "3", "1/2", "1", &["s_range", "b_range", "sigma_regularity"]),
        // passes through σ >= [s - d/2] = 1
        (2, "5/2", "1/4", "1", &[]),
        (1, "0", "1/2", "3", &[]),
        (3, "2", "1/2", "2", &[]),
        (4, "0", "1/2", "2", &["sigma_subcritical"]),
        (5, "2", "1", "6", &["sigma_subcritical"]),
        (1, "1/2", "1/4", "1", &[]),
        (3, "3", "1/4", "1/2", &["sigma_regularity"]),
        (3, "3", "1/4", "2", &[]),
    ];
    let mut bad = Vec::new();
    for (d, s, b, sg, fails) in table {
        let v = theorem_applies(&params(d, s, b, sg));
        let got: Vec<&str> = v.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        if got != fails || v.applies != fails.is_empty() {
            bad.push(format!("({d},{s},{b},{sg}) failed {got:?}, expected {fails:?}"));
        }
    }
    outcome(bad.is_empty(), format!("{}/12 tuples classified as derived by hand {}", 12 - bad.len(), bad.join("; ")))
}

fn soundness_sweep() -> Outcome {
    let tuples = sample_gated(200, 2024);
    let mut rows = 0;
    let mut bad = Vec::new();
    for p in &tuples {
        match build_full_certificate(p) {
            Ok(c) => {
                let r = verify_certificate(p, &c);
                rows += r.rows.len();
                let thetas_ok = c.theta.is_positive() && c.sub.iter().all(|s| s.theta.is_positive());
                if !r.passed() || !thetas_ok {
                    bad.push(p.to_string());
                }
            }
            Err(e) => bad.push(format!("{p}: {e}")),
        }
    }
    outcome(bad.is_empty(), format!("{}/200 verified, {rows} exact rows, all theta > 0 {}", 200 - bad.len(), bad.join("; ")))
}

fn explicit_choices() -> Outcome {
    let one = Rational::one();
    let two = Rational::int(2);
    let mut hits = [0usize; 3];
    let mut bad = Vec::new();
    let mut tuples = sample_gated(200, 2024);
    tuples.push(params(3, "6/5", "1/2", "2"));
    tuples.push(params(3, "3/2", "1", "2"));
    for p in &tuples {
        let c = build_full_certificate(p).unwrap();
        let d = p.dim();
        if p.d >= 3 && p.s > one && p.s < p.half_dim() {
            hits[0] += 1;
            let a1 = &c.find(Lemma::SobolevEstimate, Piece::Local).unwrap().pairs["(a1,b1)"];
            if Rational::int(4) * a1.inv_p() != two || &d * &a1.inv_q() != p.half_dim() - one.clone() {
                bad.push(format!("{p}: (a1,b1) = {a1}"));
            }
        }
        if p.d >= 3 && p.s > one && p.sigma > (&two - &(&two * &p.b)).div(&d) {
            hits[1] += 1;
            let a2 = &c.find(Lemma::SobolevEstimate, Piece::Exterior).unwrap().pairs["(a2,b2)"];
            let want = ExponentPair::from_recips(&Rational::frac(1, 2), &(&d - &two).div(&(&two * &d))).unwrap();
            if *a2 != want {
                bad.push(format!("{p}: (a2,b2) = {a2}"));
            }
        }
        if p.s < p.half_dim() {
            hits[2] += 1;
            let (closed, theta) = difference_exterior_closed_form(p.d, &p.s, &p.sigma).unwrap();
            let sub = c.find(Lemma::LebesgueDifference, Piece::Exterior).unwrap();
            if sub.pairs["(a4,b4)"] != closed || sub.theta != SlackRational::exact(theta) {
                bad.push(format!("{p}: (a4,b4) = {}", sub.pairs["(a4,b4)"]));
            }
        }
    }
    let ex = certify_difference_exterior(&params(3, "0", "1/2", "1")).unwrap();
    let eight_three = ExponentPair::from_recips(&Rational::frac(1, 8), &Rational::frac(1, 3)).unwrap();
    if ex.pairs["(a4,b4)"] != eight_three || ex.theta != SlackRational::exact(Rational::frac(5, 8)) {
        bad.push("(3,0,σ=1) closed form".into());
    }
    outcome(
        bad.is_empty() && hits.iter().all(|&h| h > 0),
        format!(
            "exact on {} (a1,b1) / {} (a2,b2) / {} (a4,b4) branch instances, (d=3,s=0,σ=1) -> (8, 3, 5/8) {}",
            hits[0],
            hits[1],
            hits[2],
            bad.join("; ")
        ),
    )
}

/// Every failing row must read the tampered value, and at least one must fail.
fn downstream_only(report: &VerifyReport, key: &str) -> Result<usize, String> {
    let fails: Vec<&VerifyRow> = report.failures().collect();
    if fails.is_empty() {
        return Err(format!("tampering {key} went unnoticed"));
    }
    if let Some(f) = fails.iter().find(|f| !f.depends.iter().any(|d| d == key)) {
        return Err(format!("tampering {key} also failed unrelated row {} / {}", f.scope, f.label));
    }
    Ok(fails.len())
}

fn negative_controls() -> Outcome {
    let cases = [params(3, "1", "1", "2"), params(3, "2", "1/2", "2"), params(2, "5/2", "1/4", "1"), params(5, "3", "1", "3/2")];
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in &cases {
        let cert = build_full_certificate(p).unwrap();
        // a B0 pair pushed off 4/p + d/q = d/2
        for (si, sub) in cert.sub.iter().enumerate() {
            for key in sub.pairs.keys() {
                if key == "(a1,b1)" || key == "(a2,b2)" {
                    continue;
                }
                let mut t = cert.clone();
                let old = t.sub[si].pairs[key].clone();
                t.sub[si].pairs.insert(key.clone(), ExponentPair::new(old.p.clone(), &old.q + &Rational::frac(1, 7)).unwrap());
                let rep = verify_certificate(p, &t);
                match downstream_only(&rep, key) {
                    Ok(_) if rep.failures().any(|f| f.label == format!("{key} in B0")) => checked += 1,
                    Ok(_) => bad.push(format!("{p} {key}: class row did not fail")),
                    Err(e) => bad.push(format!("{p}: {e}")),
                }
            }
        }
        // θ -> 0, globally and per estimate
        let mut t = cert.clone();
        t.theta = SlackRational::zero();
        match downstream_only(&verify_certificate(p, &t), "theta") {
            Ok(_) => checked += 1,
            Err(e) => bad.push(format!("{p}: {e}")),
        }
        for si in 0..cert.sub.len() {
            let mut t = cert.clone();
            t.sub[si].theta = SlackRational::zero();
            match downstream_only(&verify_certificate(p, &t), "theta") {
                Ok(_) => checked += 1,
                Err(e) => bad.push(format!("{p}: {e}")),
            }
        }
        // a strict row moved onto its window endpoint
        for si in 0..cert.sub.len() {
            let Some(ci) = cert.sub[si].constraints.iter().position(|c| matches!(c.rel, Relation::Lt | Relation::Gt)) else {
                continue;
            };
            let mut t = cert.clone();
            let c = &mut t.sub[si].constraints[ci];
            c.rhs = c.lhs.clone();
            let rep = verify_certificate(p, &t);
            match downstream_only(&rep, "stored") {
                Ok(1) => checked += 1,
                Ok(n) => bad.push(format!("{p}: endpoint tamper failed {n} rows")),
                Err(e) => bad.push(format!("{p}: {e}")),
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} tampered certificates each fail only downstream rows {}", bad.join("; ")))
}

fn linear_exactness() -> Outcome {
    let g = Grid::new(1, 16, std::f64::consts::PI).unwrap();
    let u = GridField::plane_wave(g, &[3.0]);
    let out = linear_propagate(&u, 0.1);
    let phase_err = out
        .values
        .iter()
        .zip(&u.values)
        .map(|(a, b)| (a - b * Complex64::from_polar(1.0, 8.1)).norm())
        .fold(0.0, f64::max);
    let gg = Grid::new(1, 256, 32.0).unwrap();
    let sp = Spectral::new(gg);
    let v0 = GridField::from_fn(gg, |x| Complex64::new((-x[0] * x[0]).exp(), (0.3 * x[0]).sin() * (-x[0].abs()).exp()));
    let mut v = v0.clone();
    for _ in 0..1000 {
        v = sp.propagate(&v, 1e-4);
    }
    let drift = (mass(&v) - mass(&v0)).abs() / mass(&v0);
    outcome(phase_err <= 1e-12 && drift <= 1e-12, format!("phase error {phase_err:.1e} (<= 1e-12), mass drift over 1000 steps {drift:.1e} (<= 1e-12)"))
}

fn scenario() -> (GridField, Weight) {
    let g = Grid::new(1, 256, 32.0).unwrap();
    let w = make_weight(g, 0.5, default_rho(&g)).unwrap();
    (GridField::gaussian(g, 1.0, 1.0), w)
}

fn run(dt: f64, t: f64) -> Trajectory {
    let (u0, w) = scenario();
    evolve(&u0, &w, &EvolveConfig { dt, t_final: t, snapshot_every: 10, ..Default::default() }).unwrap()
}

fn conservation() -> Outcome {
    let a = run(1e-4, 0.1);
    let b = run(5e-5, 0.1);
    let ratio = a.energy_drift() / b.energy_drift();
    let pass = a.mass_drift() <= 1e-10 && a.energy_drift() <= 1e-5 && (3.0..=5.0).contains(&ratio) && !a.blow_up;
    outcome(
        pass,
        format!(
            "N=256 L=32 dt=1e-4 T=0.1: mass drift {:.1e} (<= 1e-10), energy drift {:.2e} (<= 1e-5), halving dt shrinks it by {ratio:.2} (in [3, 5])",
            a.mass_drift(),
            a.energy_drift()
        ),
    )
}

fn strang_order() -> Outcome {
    let u1 = run(1e-4, 0.1);
    let u2 = run(5e-5, 0.1);
    let u4 = run(2.5e-5, 0.1);
    let e1 = u1.last().sub(u2.last()).l2();
    let e2 = u2.last().sub(u4.last()).l2();
    let order = (e1 / e2).log2();
    outcome((1.7..=2.2).contains(&order), format!("Richardson order {order:.3} from dt = 1e-4, 5e-5, 2.5e-5 (in [1.7, 2.2])"))
}

fn fixed_point() -> Outcome {
    let (u0, w) = scenario();
    let cfg = PicardConfig { t_final: 1e-2, m_nodes: 33, tol: 1e-10, max_iter: 100, s: 1.0 };
    let r = match picard_solve(&u0, &w, 1.0, 2.0, &cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("no convergence: {e}")),
    };
    let max_ratio = r.ratios.iter().copied().fold(0.0, f64::max);
    let ev = run(1e-4, 1e-2);
    let gap = r.trajectory.last().rel_l2(ev.last());
    let base = PicardConfig { max_iter: 60, ..cfg };
    let t1 = contraction_threshold(&u0, &w, 1.0, 2.0, &base, 1e-4, 100.0, 0.005);
    let t2 = contraction_threshold(&u0.scale(2.0), &w, 1.0, 2.0, &base, 1e-4, 100.0, 0.005);
    let pass = max_ratio < 1.0 && gap <= 1e-4 && t2 < t1;
    outcome(
        pass,
        format!(
            "{} iterations, max ratio {max_ratio:.2e} (< 1), |picard - evolve| {gap:.1e} (<= 1e-4), contraction T* {t1:.2} -> {t2:.2} when amplitude doubles",
            r.iterates
        ),
    )
}

fn scaling() -> Outcome {
    let g = Grid::new(1, 256, 32.0).unwrap();
    let u0 = GridField::gaussian(g, 1.0, 1.0);
    let cfg = EvolveConfig { dt: 1e-5, t_final: 1e-3, ..Default::default() };
    let r = scale_test(&u0, 0.5, 2.0, 1.0, 2.0, default_rho(&g), &cfg).unwrap();
    let p = params(1, "1", "1/2", "2");
    let static_field = GridField::from_fn(g, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.2 * x[0] * (-x[0] * x[0]).exp()));
    let scaled = scaling_transform(&static_field, 2.0, &p).unwrap();
    let factor = sobolev_norm(&scaled, 1.0, true) / sobolev_norm(&static_field, 1.0, true);
    let want = 2f64.powf(9.0 / 4.0);
    let ferr = (factor - want).abs() / want;
    let pass = r.covariance_error <= 1e-4 && ferr <= 1e-8 && (r.hs_factor - r.hs_expected).abs() <= 1e-8 * r.hs_expected;
    outcome(pass, format!("alpha = 2 covariance gap {:.1e} (<= 1e-4), H^1 factor error {ferr:.1e} vs 2^(9/4) (<= 1e-8)", r.covariance_error))
}

fn main() {
    let criteria: Vec<(&str, Duration, fn() -> Outcome)> = vec![
        ("1 gate fidelity", Duration::from_secs(1), gate_fidelity),
        ("2 certificate soundness sweep", Duration::from_secs(30), soundness_sweep),
        ("3 explicit-choice fidelity", Duration::from_secs(60), explicit_choices),
        ("4 negative controls", Duration::from_secs(60), negative_controls),
        ("5 linear propagator exactness", Duration::from_secs(1), linear_exactness),
        ("6 conservation", Duration::from_secs(10), conservation),
        ("7 Strang order", Duration::from_secs(30), strang_order),
        ("8 fixed-point witness", Duration::from_secs(60), fixed_point),
        ("9 scaling covariance", Duration::from_secs(10), scaling),
    ];
    let mut failed = 0;
    for (name, budget, f) in criteria {
        let o = timed(budget, f);
        println!("[{}] criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
