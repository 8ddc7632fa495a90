//! Criticality functionals and the local well-posedness gate.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::exact::{ExtendedRational, Rational, SlackRational};

/// One instance of `i u_t + Δ²u = λ |x|^{-b} |u|^σ u` posed in `H^s(ℝ^d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub d: u32,
    pub s: Rational,
    pub b: Rational,
    pub sigma: Rational,
    /// Coupling constant; only the simulator reads it.
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_lambda() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid parameters: {0}")]
pub struct ParamError(pub String);

impl ParamSet {
    pub fn new(d: u32, s: Rational, b: Rational, sigma: Rational) -> Result<Self, ParamError> {
        if d == 0 {
            return Err(ParamError("dimension d must be at least 1".into()));
        }
        if s.is_negative() {
            return Err(ParamError(format!("regularity s = {s} must be non-negative")));
        }
        if !sigma.is_positive() {
            return Err(ParamError(format!("nonlinearity power sigma = {sigma} must be positive")));
        }
        Ok(ParamSet { d, s, b, sigma, lambda: 1.0 })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// Parse from textual rationals, e.g. `ParamSet::parse(3, "1", "1/2", "2")`.
    pub fn parse(d: u32, s: &str, b: &str, sigma: &str) -> Result<Self, ParamError> {
        let p = |name: &str, t: &str| Rational::parse(t).map_err(|e| ParamError(format!("{name}: {e}")));
        ParamSet::new(d, p("s", s)?, p("b", b)?, p("sigma", sigma)?)
    }

    pub fn dim(&self) -> Rational {
        Rational::int(self.d as i64)
    }

    pub fn half_dim(&self) -> Rational {
        Rational::frac(self.d as i64, 2)
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} s={} b={} sigma={}", self.d, self.s, self.b, self.sigma)
    }
}

/// `s_c = d/2 - (4 - b)/σ`.
pub fn critical_index(params: &ParamSet) -> Rational {
    let four_minus_b = Rational::int(4) - &params.b;
    params.half_dim() - four_minus_b.div(&params.sigma)
}

/// `σ_c(s) = (8 - 2b)/(d - 2s)` for `s < d/2`, and `∞` otherwise.
pub fn sigma_c(params: &ParamSet, s: &Rational) -> ExtendedRational {
    if *s < params.half_dim() {
        let num = Rational::int(8) - Rational::int(2) * &params.b;
        let den = params.dim() - Rational::int(2) * s;
        ExtendedRational::Finite(num.div(&den))
    } else {
        ExtendedRational::Infinity
    }
}

/// Lower bound on σ required when σ is not an even integer.
///
/// The last branch is the strict bound `σ > (2s - 2b - 2)/d`, returned as the
/// slack value `((2s - 2b - 2)/d)⁺`. Negative values clamp to zero.
pub fn sigma_star(params: &ParamSet, s: &Rational) -> SlackRational {
    let one = Rational::one();
    let half_d = params.half_dim();
    let value = if *s <= one {
        SlackRational::zero()
    } else if params.d <= 2 && *s >= &one + &half_d {
        SlackRational::exact(Rational::from_bigint((s - &half_d).floor()))
    } else if params.d >= 3 && *s > Rational::int(2) {
        SlackRational::exact(Rational::from_bigint(s.ceil() - BigInt::from(2)))
    } else {
        let two = Rational::int(2);
        let base = (&two * s - &two * &params.b - two).div(&params.dim());
        SlackRational::plus(base)
    };
    if value.base.is_negative() {
        SlackRational::zero()
    } else {
        value
    }
}

pub fn is_even_integer(sigma: &Rational) -> bool {
    sigma.is_integer() && sigma.is_positive() && sigma.numer() % BigInt::from(2) == BigInt::from(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criticality {
    Subcritical,
    Critical,
    MassCritical,
    EnergyCritical,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Criticality::Subcritical => "subcritical",
            Criticality::Critical => "critical",
            Criticality::MassCritical => "mass-critical",
            Criticality::EnergyCritical => "energy-critical",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub required: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub applies: bool,
    pub criticality: Criticality,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Label relative to the working regularity `s`: a problem is critical in
/// `H^s` only when `s = s_c`.
pub fn criticality(params: &ParamSet) -> Criticality {
    let two = Rational::int(2);
    let sc = critical_index(params);
    if params.s.is_zero() && sc.is_zero() {
        return Criticality::MassCritical;
    }
    if params.d >= 5 && params.s == two {
        let eight_minus_2b = Rational::int(8) - &two * &params.b;
        if params.sigma == eight_minus_2b.div(&Rational::int(params.d as i64 - 4)) {
            return Criticality::EnergyCritical;
        }
    }
    if let ExtendedRational::Finite(limit) = sigma_c(params, &params.s) {
        if params.sigma == limit {
            return Criticality::Critical;
        }
    }
    Criticality::Subcritical
}

fn min_of(values: impl IntoIterator<Item = Rational>) -> Rational {
    values.into_iter().min().expect("nonempty")
}

/// Evaluate every hypothesis of the local well-posedness theorem, in order.
pub fn theorem_applies(params: &ParamSet) -> Verdict {
    let d = params.dim();
    let half_d = params.half_dim();
    let s = &params.s;
    let b = &params.b;
    let sigma = &params.sigma;
    let two = Rational::int(2);
    let three_half_d = Rational::frac(3 * params.d as i64, 2);
    let mut checks = Vec::with_capacity(4);

    let s_bound = min_of([&two + &half_d, three_half_d.clone()]);
    checks.push(Check {
        name: "s_range".into(),
        required: "0 <= s < min{2 + d/2, 3d/2}".into(),
        actual: format!("s = {s}, bound = {s_bound}"),
        pass: !s.is_negative() && *s < s_bound,
    });

    let b_bound = min_of([Rational::int(4), d.clone(), &three_half_d - s, &half_d + &two - s]);
    checks.push(Check {
        name: "b_range".into(),
        required: "0 < b < min{4, d, 3d/2 - s, d/2 + 2 - s}".into(),
        actual: format!("b = {b}, bound = {b_bound}"),
        pass: b.is_positive() && *b < b_bound,
    });

    let sc = sigma_c(params, s);
    checks.push(Check {
        name: "sigma_subcritical".into(),
        required: "0 < sigma < sigma_c(s)".into(),
        actual: format!("sigma = {sigma}, sigma_c = {sc}"),
        pass: sigma.is_positive() && ExtendedRational::Finite(sigma.clone()) < sc,
    });

    let star = sigma_star(params, s);
    let even = is_even_integer(sigma);
    checks.push(Check {
        name: "sigma_regularity".into(),
        required: "sigma even, or sigma >= sigma_star(s)".into(),
        actual: if even {
            format!("sigma = {sigma} is an even integer")
        } else {
            format!("sigma = {sigma}, sigma_star = {star}")
        },
        pass: even || SlackRational::exact(sigma.clone()) >= star,
    });

    let mut notes = Vec::new();
    let d_minus_2s = &d - &two * s;
    if b.is_positive() && d_minus_2s.is_positive() && *sigma == Rational::int(8).div(&d_minus_2s) {
        notes.push(format!(
            "sigma = 8/(d - 2s) is not the mass-critical power when b > 0; mass-critical means sigma = (8 - 2b)/d = {}",
            (Rational::int(8) - &two * b).div(&d)
        ));
    }

    Verdict {
        applies: checks.iter().all(|c| c.pass),
        criticality: criticality(params),
        checks,
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: u32, s: &str, b: &str, sigma: &str) -> ParamSet {
        ParamSet::parse(d, s, b, sigma).unwrap()
    }

    fn r(t: &str) -> Rational {
        Rational::parse(t).unwrap()
    }

    #[test]
    fn critical_index_examples() {
        assert_eq!(critical_index(&p(4, "0", "0", "2")), Rational::zero());
        assert_eq!(critical_index(&p(5, "0", "1", "6")), Rational::int(2));
        assert_eq!(critical_index(&p(1, "0", "0", "8")), Rational::zero());
    }

    #[test]
    fn sigma_c_examples() {
        assert_eq!(sigma_c(&p(3, "0", "1", "1"), &r("1")), ExtendedRational::Finite(Rational::int(6)));
        assert_eq!(sigma_c(&p(4, "0", "1", "1"), &r("2")), ExtendedRational::Infinity);
        assert_eq!(sigma_c(&p(2, "0", "0", "1"), &r("1")), ExtendedRational::Infinity);
    }

    #[test]
    fn sigma_star_examples() {
        assert_eq!(sigma_star(&p(1, "1/2", "1/4", "1"), &r("1/2")), SlackRational::zero());
        assert_eq!(sigma_star(&p(3, "5/2", "1", "1"), &r("5/2")), SlackRational::exact(Rational::one()));
        assert_eq!(sigma_star(&p(3, "3/2", "1/2", "1"), &r("3/2")), SlackRational::plus(Rational::zero()));
        // d = 2, s >= 1 + d/2
        assert_eq!(sigma_star(&p(2, "5/2", "1/4", "1"), &r("5/2")), SlackRational::exact(Rational::one()));
        // negative base clamps
        assert_eq!(sigma_star(&p(3, "3/2", "2", "1"), &r("3/2")), SlackRational::zero());
    }

    #[test]
    fn even_integers() {
        assert!(is_even_integer(&r("2")));
        assert!(!is_even_integer(&r("7/3")));
        assert!(is_even_integer(&r("4")));
        assert!(!is_even_integer(&r("3")));
        assert!(!is_even_integer(&r("0")));
    }

    #[test]
    fn gate_examples() {
        let v = theorem_applies(&p(3, "1", "1", "2"));
        assert!(v.applies);
        assert_eq!(v.criticality, Criticality::Subcritical);

        let v = theorem_applies(&p(3, "1", "3", "2"));
        assert!(!v.applies);
        let failed: Vec<_> = v.failed().map(|c| c.name.as_str()).collect();
        // sigma_c = 2 at b = 3, so the subcriticality check fails as well
        assert_eq!(failed, ["b_range", "sigma_subcritical"]);

        assert!(theorem_applies(&p(1, "0", "1/2", "3")).applies);
    }

    #[test]
    fn critical_labels() {
        // sigma = sigma_c(s) with s > 0
        let v = theorem_applies(&p(3, "1", "1", "6"));
        assert_eq!(v.criticality, Criticality::Critical);
        assert!(!v.applies);
        // (8 - 2b)/d
        assert_eq!(criticality(&p(3, "0", "1", "2")), Criticality::MassCritical);
        assert_eq!(criticality(&p(3, "1", "1", "2")), Criticality::Subcritical);
        assert_eq!(criticality(&p(5, "2", "1", "6")), Criticality::EnergyCritical);
    }

    #[test]
    fn verdict_serializes_with_fixed_keys() {
        let v = theorem_applies(&p(3, "1", "1", "2"));
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.starts_with(r#"{"applies":true,"criticality":"subcritical","checks":[{"name":"s_range""#), "{json}");
    }

    #[test]
    fn mass_critical_prose_discrepancy_is_noted() {
        // 8/(d - 2s) with d = 4, s = 0 is 2, while (8 - 2b)/d = 3/2 for b = 1
        let v = theorem_applies(&p(4, "0", "1", "2"));
        assert_eq!(v.notes.len(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = ParamSet> {
            (1u32..9, 0i64..40, 1i64..32, 1i64..64).prop_map(|(d, s8, b8, sig4)| {
                ParamSet::new(d, Rational::frac(s8, 8), Rational::frac(b8, 8), Rational::frac(sig4, 4)).unwrap()
            })
        }

        proptest! {
            #[test]
            fn subcriticality_equivalence(params in params()) {
                prop_assume!(params.s < params.half_dim());
                let above_critical = params.s > critical_index(&params);
                let below_sigma_c = ExtendedRational::Finite(params.sigma.clone()) < sigma_c(&params, &params.s);
                prop_assert_eq!(above_critical, below_sigma_c);
            }

            #[test]
            fn sigma_c_increases_in_s(params in params(), t1 in 0i64..80, t2 in 0i64..80) {
                prop_assume!(params.b < Rational::int(4));
                let (lo, hi) = (Rational::frac(t1.min(t2), 16), Rational::frac(t1.max(t2), 16));
                prop_assume!(lo < hi && hi < params.half_dim());
                prop_assert!(sigma_c(&params, &lo) < sigma_c(&params, &hi));
            }

            #[test]
            fn b_check_is_monotone(params in params(), shrink in 1i64..8) {
                let v = theorem_applies(&params);
                let smaller = ParamSet { b: &params.b * &Rational::frac(shrink, 8), ..params.clone() };
                let w = theorem_applies(&smaller);
                if v.checks[1].pass {
                    prop_assert!(w.checks[1].pass);
                }
            }

            #[test]
            fn applies_is_conjunction(params in params()) {
                let v = theorem_applies(&params);
                prop_assert_eq!(v.applies, v.checks.iter().all(|c| c.pass));
            }
        }
    }
}
