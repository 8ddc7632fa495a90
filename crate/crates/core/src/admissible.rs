//! Admissible exponent pairs and the exponent-level side conditions of the
//! embedding, chain and product rules.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classify::is_even_integer;
use crate::error::ExactError;
use crate::exact::{ExtendedRational, Rational};

/// Time exponent `p ∈ [2, ∞]`, space exponent `q ∈ [2, ∞)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: ExtendedRational,
    pub q: Rational,
}

impl ExponentPair {
    pub fn new(p: ExtendedRational, q: Rational) -> Result<Self, ExactError> {
        let two = Rational::int(2);
        if let ExtendedRational::Finite(pv) = &p {
            if *pv < two {
                return Err(ExactError::ExponentRange(format!("time exponent {pv} < 2")));
            }
        }
        if q < two {
            return Err(ExactError::ExponentRange(format!("space exponent {q} < 2")));
        }
        Ok(ExponentPair { p, q })
    }

    /// Build from reciprocals `1/p ∈ [0, 1/2]`, `1/q ∈ (0, 1/2]`.
    pub fn from_recips(inv_p: &Rational, inv_q: &Rational) -> Result<Self, ExactError> {
        if inv_p.is_negative() || !inv_q.is_positive() {
            return Err(ExactError::ExponentRange(format!("reciprocals 1/p = {inv_p}, 1/q = {inv_q}")));
        }
        ExponentPair::new(ExtendedRational::from_recip(inv_p), inv_q.recip()?)
    }

    pub fn inv_p(&self) -> Rational {
        self.p.recip_rational().expect("p >= 2")
    }

    pub fn inv_q(&self) -> Rational {
        self.q.recip().expect("q >= 2")
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairClass {
    #[serde(rename = "in_A")]
    pub in_a: bool,
    #[serde(rename = "in_B")]
    pub in_b: bool,
    #[serde(rename = "in_B0")]
    pub in_b0: bool,
    #[serde(rename = "in_S")]
    pub in_s: bool,
}

fn d_rat(d: u32) -> Rational {
    Rational::int(d as i64)
}

pub fn classify_pair(d: u32, pair: &ExponentPair) -> PairClass {
    let half_d = Rational::frac(d as i64, 2);
    let ip = pair.inv_p();
    let dq = d_rat(d) * pair.inv_q();
    let two_p = Rational::int(2) * &ip;
    let four_p = Rational::int(4) * &ip;
    let in_a = &two_p + &dq <= half_d;
    let in_b = in_a && &four_p + &dq == half_d;
    let in_s = in_a && &two_p + &dq == half_d;
    let in_b0 = in_b && pair.p > ExtendedRational::Finite(Rational::int(2));
    PairClass { in_a, in_b, in_b0, in_s }
}

/// The reciprocal form of the B₀ restriction: `1/q ∈ (max(0, (d-4)/(2d)), 1/2]`
/// for a pair already in B.
pub fn b0_by_space_exponent(d: u32, pair: &ExponentPair) -> bool {
    let inv_q = pair.inv_q();
    let floor = Rational::frac(d as i64 - 4, 2 * d as i64).max(Rational::zero());
    inv_q > floor && inv_q <= Rational::frac(1, 2)
}

/// `γ_{p,q} = d/2 - 4/p - d/q`.
pub fn gamma_pq(d: u32, pair: &ExponentPair) -> Rational {
    Rational::frac(d as i64, 2) - Rational::int(4) * pair.inv_p() - d_rat(d) * pair.inv_q()
}

/// Hölder conjugate `p'` with `1/p + 1/p' = 1`.
pub fn holder_dual(p: &ExtendedRational) -> Result<ExtendedRational, ExactError> {
    if let ExtendedRational::Finite(v) = p {
        if *v < Rational::one() {
            return Err(ExactError::ExponentRange(v.to_string()));
        }
    }
    let inv = p.recip_rational()?;
    Ok(ExtendedRational::from_recip(&(Rational::one() - inv)))
}

/// `H^{s1}_{p1} ⊂ H^{s2}_{p2}` at the level of exponents. Homogeneous spaces
/// require equal scaling `s1 - d/p1 = s2 - d/p2`; inhomogeneous ones allow `≥`.
pub fn embeds(d: u32, s1: &Rational, p1: &Rational, s2: &Rational, p2: &Rational, homogeneous: bool) -> bool {
    let one = Rational::one();
    if *p1 <= one || *p2 <= one {
        return false;
    }
    let dd = d_rat(d);
    let lhs = s1 - &dd.div(p1);
    let rhs = s2 - &dd.div(p2);
    let scaling = if homogeneous { lhs == rhs } else { lhs >= rhs };
    s2 <= s1 && p1 <= p2 && scaling
}

fn inv_ext(x: &ExtendedRational) -> Option<Rational> {
    x.recip_rational().ok()
}

fn open_finite_above_one(x: &Rational) -> bool {
    *x > Rational::one()
}

fn above_one_or_inf(x: &ExtendedRational) -> bool {
    match x {
        ExtendedRational::Infinity => true,
        ExtendedRational::Finite(v) => *v > Rational::one(),
    }
}

/// Fractional chain rule for `|u|^σ u`: `1/r = 1/p + σ/q` together with
/// `σ` even or `σ ≥ ⌈s⌉ - 1`.
pub fn chain_rule_ok(s: &Rational, sigma: &Rational, r: &Rational, p: &Rational, q: &ExtendedRational) -> bool {
    if !(open_finite_above_one(r) && open_finite_above_one(p) && above_one_or_inf(q)) {
        return false;
    }
    let Some(iq) = inv_ext(q) else { return false };
    let holder = r.recip().ok() == Some(p.recip().expect("p > 1") + sigma * &iq);
    let regular = is_even_integer(sigma) || *sigma >= Rational::from_bigint(s.ceil()) - Rational::one();
    holder && regular
}

/// Fractional Leibniz rule: `1/r = 1/r1 + 1/p1 = 1/r2 + 1/p2`.
pub fn product_rule_ok(
    r: &Rational,
    r1: &ExtendedRational,
    p1: &Rational,
    r2: &Rational,
    p2: &ExtendedRational,
) -> bool {
    let finite_ok = open_finite_above_one(r) && open_finite_above_one(r2) && open_finite_above_one(p1);
    if !(finite_ok && above_one_or_inf(r1) && above_one_or_inf(p2)) {
        return false;
    }
    let (Some(ir1), Some(ip2)) = (inv_ext(r1), inv_ext(p2)) else { return false };
    let ir = r.recip().expect("r > 1");
    ir == ir1 + p1.recip().expect("p1 > 1") && ir == r2.recip().expect("r2 > 1") + ip2
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightWindow {
    pub local_ok: bool,
    pub exterior_ok: bool,
}

/// Where the pieces of `|x|^{-b}` split by a unit cutoff land in `Ḣ^s_r`.
pub fn weight_window(d: u32, r: &Rational, s: &Rational, b: &Rational) -> WeightWindow {
    let lhs = b + s;
    let rhs = d_rat(d).div(r);
    WeightWindow { local_ok: lhs < rhs, exterior_ok: lhs > rhs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(t: &str) -> Rational {
        Rational::parse(t).unwrap()
    }

    fn e(t: &str) -> ExtendedRational {
        ExtendedRational::parse(t).unwrap()
    }

    fn pair(p: &str, q: &str) -> ExponentPair {
        ExponentPair::new(e(p), r(q)).unwrap()
    }

    #[test]
    fn classify_examples() {
        let all = PairClass { in_a: true, in_b: true, in_b0: true, in_s: true };
        assert_eq!(classify_pair(3, &pair("inf", "2")), all);
        assert_eq!(classify_pair(3, &pair("2", "2")), PairClass::default());
        assert!(classify_pair(5, &pair("24/5", "3")).in_b0);
    }

    #[test]
    fn pair_ranges() {
        assert!(ExponentPair::new(e("3/2"), r("2")).is_err());
        assert!(ExponentPair::new(e("2"), r("1")).is_err());
        assert!(ExponentPair::from_recips(&r("0"), &r("0")).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_pq(3, &pair("inf", "2")), Rational::zero());
        assert_eq!(gamma_pq(1, &pair("2", "2")), Rational::int(-2));
        assert_eq!(gamma_pq(5, &pair("24/5", "3")), Rational::zero());
    }

    #[test]
    fn dual_examples() {
        assert_eq!(holder_dual(&e("2")).unwrap(), e("2"));
        assert_eq!(holder_dual(&e("inf")).unwrap(), e("1"));
        assert_eq!(holder_dual(&e("4/3")).unwrap(), e("4"));
        assert_eq!(holder_dual(&e("1")).unwrap(), e("inf"));
        assert!(holder_dual(&e("1/2")).is_err());
    }

    #[test]
    fn embedding_examples() {
        assert!(embeds(3, &r("1"), &r("2"), &r("0"), &r("6"), true));
        assert!(embeds(3, &r("3/2"), &r("4"), &r("3/2"), &r("4"), true));
        assert!(embeds(3, &r("2"), &r("2"), &r("1"), &r("2"), false));
        assert!(!embeds(3, &r("2"), &r("2"), &r("1"), &r("2"), true));
    }

    #[test]
    fn chain_rule_examples() {
        assert!(chain_rule_ok(&r("1"), &r("1"), &r("3/2"), &r("2"), &e("6")));
        assert!(!chain_rule_ok(&r("3"), &r("1/2"), &r("3/2"), &r("2"), &e("4")));
        assert!(chain_rule_ok(&r("0"), &r("2"), &r("6/5"), &r("2"), &e("6")));
        assert!(chain_rule_ok(&r("5/2"), &r("4"), &r("2"), &r("2"), &e("inf")));
    }

    #[test]
    fn product_rule_examples() {
        assert!(product_rule_ok(&r("3/2"), &e("6"), &r("2"), &r("2"), &e("6")));
        assert!(product_rule_ok(&r("2"), &e("inf"), &r("2"), &r("2"), &e("inf")));
        assert!(!product_rule_ok(&r("2"), &e("3"), &r("3"), &r("2"), &e("inf")));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight_window(3, &r("2"), &r("0"), &r("1")), WeightWindow { local_ok: true, exterior_ok: false });
        assert_eq!(weight_window(3, &r("2"), &r("1"), &r("1")), WeightWindow { local_ok: false, exterior_ok: true });
        assert_eq!(weight_window(3, &r("2"), &r("1/2"), &r("1")), WeightWindow { local_ok: false, exterior_ok: false });
    }

    #[test]
    fn b0_literal_vs_space_form_d5() {
        // q = 2d/(d-4) = 10 gives p = 2, excluded; the typo bound 2d/(d-2) = 10/3 would wrongly exclude q = 4
        let q4 = ExponentPair::from_recips(&r("5/16"), &r("1/4")).unwrap();
        assert!(classify_pair(5, &q4).in_b0);
        assert!(b0_by_space_exponent(5, &q4));
        let endpoint = ExponentPair::from_recips(&r("1/2"), &r("1/10")).unwrap();
        assert!(classify_pair(5, &endpoint).in_b && !classify_pair(5, &endpoint).in_b0);
        assert!(!b0_by_space_exponent(5, &endpoint));
    }

    fn any_pair() -> impl Strategy<Value = ExponentPair> {
        (0i64..=24, 1i64..=24).prop_map(|(a, b)| ExponentPair::from_recips(&Rational::frac(a, 48), &Rational::frac(b, 48)).unwrap())
    }

    proptest! {
        #[test]
        fn b_iff_gamma_zero(d in 1u32..9, pair in any_pair()) {
            let c = classify_pair(d, &pair);
            prop_assert_eq!(c.in_b, c.in_a && gamma_pq(d, &pair).is_zero());
            prop_assert_eq!(c.in_b, gamma_pq(d, &pair).is_zero() && c.in_a);
            prop_assert!(!c.in_b0 || c.in_b);
            prop_assert!(!c.in_b || c.in_a);
            prop_assert!(!c.in_s || c.in_a);
        }

        #[test]
        fn b_pairs_have_zero_gamma(d in 1u32..9, k in 1i64..=48) {
            let iq = Rational::frac(k, 96);
            let ip = (Rational::frac(d as i64, 2) - Rational::int(d as i64) * &iq).div(&Rational::int(4));
            if let Ok(pair) = ExponentPair::from_recips(&ip, &iq) {
                prop_assert!(gamma_pq(d, &pair).is_zero());
                prop_assert!(classify_pair(d, &pair).in_b);
            }
        }

        #[test]
        fn b0_matches_space_form_all_d(d in 1u32..9, k in 1i64..=48) {
            let iq = Rational::frac(k, 96);
            let ip = (Rational::frac(d as i64, 2) - Rational::int(d as i64) * &iq).div(&Rational::int(4));
            if let Ok(pair) = ExponentPair::from_recips(&ip, &iq) {
                prop_assert_eq!(classify_pair(d, &pair).in_b0, b0_by_space_exponent(d, &pair));
            }
        }

        #[test]
        fn dual_is_involution(n in 0i64..64) {
            let p = ExtendedRational::from_recip(&Rational::frac(n, 64));
            prop_assert_eq!(holder_dual(&holder_dual(&p).unwrap()).unwrap(), p);
        }

        #[test]
        fn embedding_is_transitive(d in 1u32..6, hom in any::<bool>(),
                                   s in proptest::collection::vec(0i64..16, 3),
                                   p in proptest::collection::vec(3i64..40, 3)) {
            let ss: Vec<_> = s.iter().map(|&k| Rational::frac(k, 4)).collect();
            let ps: Vec<_> = p.iter().map(|&k| Rational::frac(k, 2)).collect();
            if embeds(d, &ss[0], &ps[0], &ss[1], &ps[1], hom) && embeds(d, &ss[1], &ps[1], &ss[2], &ps[2], hom) {
                prop_assert!(embeds(d, &ss[0], &ps[0], &ss[2], &ps[2], hom));
            }
        }
    }
}
