use ibnls::admissible::{classify_pair, ExponentPair};
use ibnls::certify::*;
use ibnls::classify::{theorem_applies, ParamSet};
use ibnls::error::CertifyError;
use ibnls::exact::{ExtendedRational, Rational, SlackRational};
use proptest::prelude::*;

fn params(d: u32, s: &str, b: &str, sigma: &str) -> ParamSet {
    ParamSet::parse(d, s, b, sigma).unwrap()
}

fn r(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

fn pair(p: i64, q: i64) -> ExponentPair {
    ExponentPair::new(ExtendedRational::finite(Rational::int(p)), Rational::int(q)).unwrap()
}

fn assert_verified(p: &ParamSet, cert: &FullCertificate) {
    let report = verify_certificate(p, cert);
    let fails: Vec<_> = report.failures().map(|f| format!("{} / {}: {}", f.scope, f.label, f.detail)).collect();
    assert!(fails.is_empty(), "{p}: {fails:#?}");
}

#[test]
fn sobolev_local_mid_branch_uses_endpoint_pair() {
    let p = params(3, "6/5", "1/2", "2");
    let sub = certify_sobolev_local(&p).unwrap();
    assert_eq!(sub.case, CaseTag::SLtHalfD);
    assert_eq!(sub.pair("(a1,b1)").unwrap(), &pair(2, 6));
    assert!(sub.branch.starts_with("1<s<d/2"));
    assert!(sub.all_satisfied());
}

#[test]
fn sobolev_local_above_half_dim() {
    let p = params(3, "2", "1/2", "2");
    let sub = certify_sobolev_local(&p).unwrap();
    assert_eq!(sub.case, CaseTag::SGeHalfD);
    assert_eq!(sub.pair("(a1,b1)").unwrap().q, Rational::int(6));
    assert_eq!(sub.pair("(p1,q1)").unwrap().q, Rational::int(2));
    assert!(sub.pair("(p1,q1)").unwrap().p.is_infinite());
}

#[test]
fn sobolev_exterior_explicit_branch() {
    let p = params(3, "3/2", "1", "2");
    let sub = certify_sobolev_exterior(&p).unwrap();
    assert_eq!(sub.pair("(a2,b2)").unwrap(), &pair(2, 6));
    assert!(sub.theta.is_positive());
}

#[test]
fn sobolev_exterior_grid_fallback_is_recorded() {
    let p = params(3, "0", "1/2", "1");
    let sub = certify_sobolev_exterior(&p).unwrap();
    assert!(sub.branch.starts_with("grid search"), "{}", sub.branch);
    assert!(sub.all_satisfied());
}

#[test]
fn difference_local_examples() {
    let p = params(3, "1", "1", "2");
    let sub = certify_difference_local(&p).unwrap();
    let a3 = sub.pair("(a3,b3)").unwrap();
    assert!(classify_pair(3, a3).in_b0);
    assert!(sub.all_satisfied());

    let p = params(2, "1", "1/2", "1");
    let sub = certify_difference_local(&p).unwrap();
    assert_eq!(sub.case, CaseTag::SGeHalfD);
    assert!(sub.all_satisfied());
}

#[test]
fn difference_exterior_closed_forms() {
    let p = params(3, "0", "1/2", "1");
    let sub = certify_difference_exterior(&p).unwrap();
    assert_eq!(sub.pair("(a4,b4)").unwrap(), &pair(8, 3));
    assert_eq!(sub.pair("(p7,q7)").unwrap(), &pair(8, 3));
    assert_eq!(sub.theta, SlackRational::exact(r(5, 8)));
    // 4/8 + 3/3 = 3/2 = d/2
    assert!(classify_pair(3, &pair(8, 3)).in_b);

    // d = 4, s = 0, sigma = 2 sits outside the gate for every b > 0, so only the formulas are checked.
    let (pr, theta) = difference_exterior_closed_form(4, &Rational::zero(), &Rational::int(2)).unwrap();
    assert_eq!(pr, pair(4, 4));
    assert_eq!(theta, Rational::zero());
    assert!(certify_difference_exterior(&params(4, "0", "1/2", "2")).is_err());
}

#[test]
fn theta_zero_boundary_is_rejected() {
    // sigma = 8/(d - 2s) makes theta vanish; it is critical for b = 0 and supercritical for b > 0.
    let p = params(3, "1/2", "1/2", "4");
    assert!(!theorem_applies(&p).applies);
    assert!(certify_difference_exterior(&p).is_err());
}

#[test]
fn full_certificate_has_seven_b0_pairs() {
    let p = params(3, "1", "1", "2");
    let cert = build_full_certificate(&p).unwrap();
    let pairs = cert.space_pairs();
    assert_eq!(pairs.len(), 7);
    for (name, pr) in &pairs {
        assert!(classify_pair(3, pr).in_b0, "{name} = {pr}");
    }
    assert!(cert.theta.is_positive());
    assert_verified(&p, &cert);
}

#[test]
fn zero_regularity_has_trivial_checks() {
    let p = params(1, "0", "1/2", "3");
    let cert = build_full_certificate(&p).unwrap();
    assert!(cert.regularity_checks.iter().all(|c| c.recheck()));
    assert_verified(&p, &cert);
}

#[test]
fn gate_failure_stops_before_search() {
    let p = params(3, "1", "3", "2");
    match build_full_certificate(&p) {
        Err(CertifyError::Gate(msg)) => assert!(msg.contains("b_range")),
        other => panic!("expected gate error, got {other:?}"),
    }
}

#[test]
fn tampered_q6_fails_verification() {
    let p = params(3, "1", "1", "2");
    let mut cert = build_full_certificate(&p).unwrap();
    let sub = cert.find_mut(Lemma::LebesgueDifference, Piece::Local).unwrap();
    sub.pairs.insert("(p6,q6)".into(), ExponentPair::from_recips(&r(1, 2), &r(1, 4)).unwrap());
    let report = verify_certificate(&p, &cert);
    assert!(!report.passed());
    assert!(report.failures().any(|f| f.depends.iter().any(|d| d == "(p6,q6)")));
}

#[test]
fn tampered_q1_fails_class_membership() {
    let p = params(3, "1", "1", "2");
    let mut cert = build_full_certificate(&p).unwrap();
    let sub = cert.find_mut(Lemma::SobolevEstimate, Piece::Local).unwrap();
    let old = sub.pairs["(p1,q1)"].clone();
    let moved = ExponentPair::new(old.p.clone(), &old.q + &r(1, 7)).unwrap();
    sub.pairs.insert("(p1,q1)".into(), moved);
    let report = verify_certificate(&p, &cert);
    assert!(report.failures().any(|f| f.label == "(p1,q1) in B0"));
}

#[test]
fn zero_theta_fails_positivity() {
    let p = params(3, "1", "1", "2");
    let mut cert = build_full_certificate(&p).unwrap();
    cert.theta = SlackRational::zero();
    let report = verify_certificate(&p, &cert);
    assert!(report.failures().any(|f| f.label == "global theta > 0"));
}

#[test]
fn stored_pass_flags_are_not_trusted() {
    let p = params(3, "1", "1", "2");
    let mut cert = build_full_certificate(&p).unwrap();
    let c = &mut cert.sub[0].constraints[0];
    c.rhs = &c.lhs + &SlackRational::exact(Rational::int(-100));
    c.rel = Relation::Lt;
    let report = verify_certificate(&p, &cert);
    assert!(report.failures().any(|f| f.label.starts_with("stored:")));
}

#[test]
fn mismatched_params_are_reported() {
    let p = params(3, "1", "1", "2");
    let cert = build_full_certificate(&p).unwrap();
    let other = params(3, "1", "1/2", "2");
    let report = verify_certificate(&other, &cert);
    assert!(report.failures().any(|f| f.label == "parameters match"));
}

#[test]
fn json_round_trip_and_determinism() {
    let p = params(2, "5/2", "1/4", "1");
    let a = build_full_certificate(&p).unwrap();
    let b = build_full_certificate(&p).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let back = FullCertificate::from_json(&a.to_json()).unwrap();
    assert_eq!(back, a);
    assert!(FullCertificate::from_json("{").is_err());
}

fn gated() -> impl Strategy<Value = ParamSet> {
    (1u32..=6, 0i64..=20, 1i64..=31, 1i64..=40)
        .prop_map(|(d, s, b, sg)| ParamSet::new(d, r(s, 4), r(b, 8), r(sg, 5)))
        .prop_filter_map("gated", |p| p.ok().filter(|p| theorem_applies(p).applies))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_soundness(p in gated()) {
        let cert = build_full_certificate(&p).unwrap();
        let report = verify_certificate(&p, &cert);
        prop_assert!(report.passed(), "{p}: {:?}", report.failures().collect::<Vec<_>>());
        prop_assert!(cert.theta.is_positive());
        for s in &cert.sub {
            prop_assert!(s.theta.is_positive());
        }
    }

    #[test]
    fn explicit_choice_fidelity(p in gated()) {
        let cert = build_full_certificate(&p).unwrap();
        let one = Rational::one();
        let d = p.dim();
        let two = Rational::int(2);
        if p.d >= 3 && p.s > one && p.s < p.half_dim() {
            let a1 = &cert.find(Lemma::SobolevEstimate, Piece::Local).unwrap().pairs["(a1,b1)"];
            prop_assert_eq!(a1.inv_p(), r(1, 2));
            prop_assert_eq!(&d * &a1.inv_q(), p.half_dim() - one.clone());
        }
        if p.d >= 3 && p.s > one && p.sigma > (&two - &(&two * &p.b)).div(&d) {
            let a2 = &cert.find(Lemma::SobolevEstimate, Piece::Exterior).unwrap().pairs["(a2,b2)"];
            prop_assert_eq!(a2.inv_p(), r(1, 2));
            prop_assert_eq!(a2.q.clone(), (&two * &d).div(&(&d - &two)));
        }
        if p.s < p.half_dim() {
            let (closed, theta) = difference_exterior_closed_form(p.d, &p.s, &p.sigma).unwrap();
            let sub = cert.find(Lemma::LebesgueDifference, Piece::Exterior).unwrap();
            prop_assert_eq!(&sub.pairs["(a4,b4)"], &closed);
            prop_assert_eq!(sub.theta.clone(), SlackRational::exact(theta));
        }
    }
}
