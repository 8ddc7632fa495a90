//! Independent re-derivation of every row of a certificate from the stored
//! exponents, using direct formulas rather than the builder's linear forms.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::admissible::{chain_rule_ok, classify_pair, embeds, product_rule_ok, weight_window, ExponentPair};
use crate::classify::{is_even_integer, ParamSet};
use crate::exact::{ExtendedRational, Rational};

use super::model::{CaseTag, FullCertificate, Lemma, Piece, Relation, SubCertificate};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub scope: String,
    pub label: String,
    pub detail: String,
    pub pass: bool,
    /// Stored values this row reads: pair keys, aux names, `theta`, `params`, `case`, `stored`.
    pub depends: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyRow> {
        self.rows.iter().filter(|r| !r.pass)
    }
}

struct Rows<'a> {
    scope: String,
    out: &'a mut Vec<VerifyRow>,
}

impl Rows<'_> {
    fn flag(&mut self, label: &str, pass: bool, detail: String, deps: &[&str]) {
        self.out.push(VerifyRow {
            scope: self.scope.clone(),
            label: label.to_string(),
            detail,
            pass,
            depends: deps.iter().map(|s| s.to_string()).collect(),
        });
    }

    fn cmp(&mut self, label: &str, lhs: &Rational, rel: Relation, rhs: &Rational, deps: &[&str]) {
        let pass = rel.holds(lhs, rhs);
        self.flag(label, pass, format!("{lhs} {rel} {rhs}"), deps);
    }
}

/// Reciprocals of a stored pair.
struct Recip {
    ip: Rational,
    iq: Rational,
    pair: ExponentPair,
}

fn pair_recip(sub: &SubCertificate, key: &str) -> Option<Recip> {
    let pair = sub.pairs.get(key)?.clone();
    let ip = pair.p.recip_rational().ok()?;
    let iq = pair.q.recip().ok()?;
    Some(Recip { ip, iq, pair })
}

/// Reciprocal of a stored auxiliary exponent; it must be finite, exact and positive.
fn aux_recip(sub: &SubCertificate, key: &str) -> Option<Rational> {
    let v = sub.aux.get(key)?;
    if !v.is_exact() || !v.base.is_positive() {
        return None;
    }
    v.base.recip().ok()
}

fn ext(recip: &Rational) -> ExtendedRational {
    ExtendedRational::from_recip(recip)
}

fn fin(recip: &Rational) -> Rational {
    recip.recip().unwrap_or_else(|_| Rational::zero())
}

fn theta_of(sub: &SubCertificate) -> Option<Rational> {
    sub.theta.is_exact().then(|| sub.theta.base.clone())
}

struct P {
    d: u32,
    dr: Rational,
    hd: Rational,
    s: Rational,
    b: Rational,
    sigma: Rational,
    even: bool,
}

impl P {
    fn new(params: &ParamSet) -> Self {
        P {
            d: params.d,
            dr: params.dim(),
            hd: params.half_dim(),
            s: params.s.clone(),
            b: params.b.clone(),
            sigma: params.sigma.clone(),
            even: is_even_integer(&params.sigma),
        }
    }

    fn od(&self, v: &Rational) -> Rational {
        v.div(&self.dr)
    }

    /// `γ_{a',b'} + 4 = 4/a + d/b - d/2`.
    fn g(&self, a: &Recip) -> Rational {
        Rational::int(4) * &a.ip + &self.dr * &a.iq - &self.hd
    }

    fn regularity(&self, rows: &mut Rows, k: &Rational, deps: &[&str]) {
        if self.even {
            return;
        }
        let bound = Rational::from_bigint(k.ceil()) - Rational::one();
        rows.cmp("regularity: sigma >= ceil(s - gamma - 4) - 1", &self.sigma, Relation::Ge, &bound, deps);
    }
}

fn missing(rows: &mut Rows, what: &str) {
    rows.flag("stored values present", false, format!("missing or malformed {what}"), &[what]);
}

macro_rules! need_pair {
    ($rows:expr, $sub:expr, $key:expr) => {
        match pair_recip($sub, $key) {
            Some(v) => v,
            None => return missing($rows, $key),
        }
    };
}

macro_rules! need_aux {
    ($rows:expr, $sub:expr, $key:expr) => {
        match aux_recip($sub, $key) {
            Some(v) => v,
            None => return missing($rows, $key),
        }
    };
}

fn in_b0(p: &P, rows: &mut Rows, key: &str, r: &Recip) {
    let c = classify_pair(p.d, &r.pair);
    rows.flag(&format!("{key} in B0"), c.in_b0, format!("{} with 4/p + d/q = {}", r.pair, Rational::int(4) * &r.ip + &p.dr * &r.iq), &[key]);
}

fn theta_rows(rows: &mut Rows, sub: &SubCertificate, expected: &Rational, formula: &str, deps: &[&str]) {
    match theta_of(sub) {
        Some(t) => {
            let mut all = deps.to_vec();
            all.push("theta");
            rows.cmp(&format!("theta = {formula}"), &t, Relation::Eq, expected, &all);
            rows.cmp("theta > 0", &t, Relation::Gt, &Rational::zero(), &["theta"]);
        }
        None => rows.flag("theta exact", false, format!("theta = {}", sub.theta), &["theta"]),
    }
}

fn sobolev_local(p: &P, sub: &SubCertificate, rows: &mut Rows) {
    let a = need_pair!(rows, sub, "(a1,b1)");
    let pq = need_pair!(rows, sub, "(p1,q1)");
    let one = Rational::one();
    let sigma1 = &p.sigma + &one;
    let ibd = &one - &a.iq;
    let iad = &one - &a.ip;
    let g = p.g(&a);
    let k = &p.s - &g;
    let al = need_aux!(rows, sub, "alpha1");
    let be = need_aux!(rows, sub, "beta1");
    let r1 = need_aux!(rows, sub, "r1");
    let ga = need_aux!(rows, sub, "gamma1");
    let rb = need_aux!(rows, sub, "rbar1");
    let gb = need_aux!(rows, sub, "gammabar1");
    let (a_k, p_k) = ("(a1,b1)", "(p1,q1)");
    in_b0(p, rows, p_k, &pq);
    rows.cmp("r1: 1/r1 = sigma/alpha1 + 1/beta1", &r1, Relation::Eq, &(&p.sigma * &al + &be), &["r1", "alpha1", "beta1"]);
    rows.cmp("gamma1: 1/gamma1 = 1/b1' - 1/r1", &ga, Relation::Eq, &(&ibd - &r1), &["gamma1", a_k, "r1"]);
    rows.flag(
        "weight local in L^gamma1",
        weight_window(p.d, &fin(&ga), &Rational::zero(), &p.b).local_ok,
        format!("b = {} < d/gamma1 = {}", p.b, &p.dr * &ga),
        &["gamma1"],
    );
    rows.flag(
        "weight local in H^(s-gamma-4)_gammabar1",
        weight_window(p.d, &fin(&gb), &k, &p.b).local_ok,
        format!("b + {k} < d/gammabar1 = {}", &p.dr * &gb),
        &["gammabar1", a_k],
    );
    rows.flag(
        "product rule on b1'",
        product_rule_ok(&fin(&ibd), &ext(&ga), &fin(&r1), &fin(&gb), &ext(&rb)),
        format!("1/b1' = {ibd}"),
        &[a_k, "gamma1", "r1", "gammabar1", "rbar1"],
    );
    rows.flag(
        "chain rule in H^(s-gamma-4)_r1",
        chain_rule_ok(&k, &p.sigma, &fin(&r1), &fin(&be), &ext(&al)),
        format!("order {k}, 1/r1 = {r1}"),
        &[a_k, "r1", "beta1", "alpha1"],
    );
    rows.cmp("derivative order: s - gamma(a1',b1') - 4 >= 0", &k, Relation::Ge, &Rational::zero(), &[a_k]);
    rows.cmp("derivative order: gamma(a1',b1') + 4 >= 0", &g, Relation::Ge, &Rational::zero(), &[a_k]);
    p.regularity(rows, &k, &[a_k]);

    match sub.case {
        CaseTag::SLtHalfD => {
            rows.flag("(a1,b1) in A", classify_pair(p.d, &a.pair).in_a, a.pair.to_string(), &[a_k]);
            let sd = p.od(&p.s);
            rows.cmp("alpha1: 1/alpha1 = 1/q1 - s/d", &al, Relation::Eq, &(&pq.iq - &sd), &["alpha1", p_k]);
            rows.cmp("beta1: 1/beta1 = 1/q1 - (gamma + 4)/d", &be, Relation::Eq, &(&pq.iq - &p.od(&g)), &["beta1", p_k, a_k]);
            rows.cmp("rbar1: 1/rbar1 = sigma/alpha1", &rb, Relation::Eq, &(&p.sigma * &al), &["rbar1", "alpha1"]);
            rows.cmp("gammabar1: 1/gammabar1 = 1/b1' - 1/rbar1", &gb, Relation::Eq, &(&ibd - &rb), &["gammabar1", a_k, "rbar1"]);
            let lhs = &ibd - &(&p.sigma * &(&pq.iq - &sd)) - (&pq.iq - &p.od(&g));
            rows.cmp("system: 1/b1' - sigma(1/q1 - s/d) - (1/q1 - (gamma+4)/d) > b/d", &lhs, Relation::Gt, &p.od(&p.b), &[a_k, p_k]);
            rows.cmp("system: 1/a1' - (sigma+1)/p1 > 0", &(&iad - &(&sigma1 * &pq.ip)), Relation::Gt, &Rational::zero(), &[a_k, p_k]);
            rows.cmp("system: 1/q1 - s/d > 0", &(&pq.iq - &sd), Relation::Gt, &Rational::zero(), &[p_k]);
            rows.flag("embedding H^s_q1 into L^alpha1", embeds(p.d, &p.s, &fin(&pq.iq), &Rational::zero(), &fin(&al), true), String::new(), &[p_k, "alpha1"]);
            rows.flag("embedding H^s_q1 into H^(s-gamma-4)_beta1", embeds(p.d, &p.s, &fin(&pq.iq), &k, &fin(&be), true), String::new(), &[p_k, "beta1", a_k]);
            theta_rows(rows, sub, &(&iad - &(&sigma1 * &pq.ip)), "1/a1' - (sigma+1)/p1", &[a_k, p_k]);
        }
        CaseTag::SGeHalfD => {
            let ab = need_aux!(rows, sub, "alphabar1");
            let half = Rational::frac(1, 2);
            rows.flag("(a1,b1) in S", classify_pair(p.d, &a.pair).in_s, a.pair.to_string(), &[a_k]);
            rows.flag("(p1,q1) = (inf, 2)", pq.ip.is_zero() && pq.iq == half, pq.pair.to_string(), &[p_k]);
            rows.cmp("rbar1: 1/rbar1 = (sigma+1)/alphabar1", &rb, Relation::Eq, &(&sigma1 * &ab), &["rbar1", "alphabar1"]);
            rows.cmp("gammabar1: 1/gammabar1 = 1/b1' - 1/rbar1", &gb, Relation::Eq, &(&ibd - &rb), &["gammabar1", a_k, "rbar1"]);
            for (name, v) in [("alpha1", &al), ("alphabar1", &ab)] {
                rows.flag(&format!("system: 2 <= {name} < inf"), v.is_positive() && *v <= half, format!("1/{name} = {v}"), &[name]);
            }
            rows.flag("system: 2 <= beta1 <= b1", be >= a.iq && be <= half, format!("1/beta1 = {be}, 1/b1 = {}", a.iq), &["beta1", a_k]);
            let lhs = &ibd - &(&p.sigma * &al) - &be;
            rows.cmp("system: 1/b1' - sigma/alpha1 - 1/beta1 > b/d", &lhs, Relation::Gt, &p.od(&p.b), &[a_k, "alpha1", "beta1"]);
            let lhs = &ibd - &(&sigma1 * &ab);
            let rhs = p.od(&(&p.b + &p.s - &(Rational::int(2) * &a.ip)));
            rows.cmp("system: 1/b1' - (sigma+1)/alphabar1 > (b + s - 2/a1)/d", &lhs, Relation::Gt, &rhs, &[a_k, "alphabar1"]);
            let two = Rational::int(2);
            rows.flag("embedding H^s into L^alpha1", embeds(p.d, &p.s, &two, &Rational::zero(), &fin(&al), false), String::new(), &["alpha1"]);
            rows.flag("embedding H^s into L^alphabar1", embeds(p.d, &p.s, &two, &Rational::zero(), &fin(&ab), false), String::new(), &["alphabar1"]);
            rows.flag("embedding H^s into H^(s-2/a1)_beta1", embeds(p.d, &p.s, &two, &k, &fin(&be), false), String::new(), &["beta1", a_k]);
            theta_rows(rows, sub, &iad, "1/a1'", &[a_k]);
        }
    }
}

fn sobolev_exterior(p: &P, sub: &SubCertificate, rows: &mut Rows) {
    let below = sub.case == CaseTag::SLtHalfD;
    let a = need_pair!(rows, sub, "(a2,b2)");
    let p2 = need_pair!(rows, sub, "(p2,q2)");
    let p3 = need_pair!(rows, sub, "(p3,q3)");
    let p4 = need_pair!(rows, sub, "(p4,q4)");
    let al2 = need_aux!(rows, sub, "alpha2");
    let be2 = need_aux!(rows, sub, "beta2");
    let r2 = need_aux!(rows, sub, "r2");
    let ga2 = need_aux!(rows, sub, "gamma2");
    let al4 = need_aux!(rows, sub, "alpha4");
    let r4 = need_aux!(rows, sub, "r4");
    let ga4 = need_aux!(rows, sub, "gamma4");
    let (ak, k2, k3, k4) = ("(a2,b2)", "(p2,q2)", "(p3,q3)", "(p4,q4)");
    let one = Rational::one();
    let zero = Rational::zero();
    let sigma1 = &p.sigma + &one;
    let ibd = &one - &a.iq;
    let iad = &one - &a.ip;
    let g = p.g(&a);
    let k = &p.s - &g;
    let sd = p.od(&p.s);

    rows.flag("(a2,b2) in A", classify_pair(p.d, &a.pair).in_a, a.pair.to_string(), &[ak]);
    in_b0(p, rows, k2, &p2);
    in_b0(p, rows, k3, &p3);
    in_b0(p, rows, k4, &p4);
    rows.cmp("r2: 1/r2 = sigma/alpha2 + 1/beta2", &r2, Relation::Eq, &(&p.sigma * &al2 + &be2), &["r2", "alpha2", "beta2"]);
    rows.cmp("gamma2: 1/gamma2 = 1/b2' - 1/r2", &ga2, Relation::Eq, &(&ibd - &r2), &["gamma2", ak, "r2"]);
    rows.cmp("r4: 1/r4 = (sigma+1)/alpha4", &r4, Relation::Eq, &(&sigma1 * &al4), &["r4", "alpha4"]);
    rows.cmp("gamma4: 1/gamma4 = 1/b2' - 1/r4", &ga4, Relation::Eq, &(&ibd - &r4), &["gamma4", ak, "r4"]);

    if below {
        rows.cmp("system (1): 1/alpha2 >= 1/q2 - s/d", &al2, Relation::Ge, &(&p2.iq - &sd), &["alpha2", k2]);
    } else {
        rows.cmp("system (1): 1/alpha2 > 0", &al2, Relation::Gt, &zero, &["alpha2"]);
    }
    rows.cmp("system (1): 1/alpha2 <= 1/q2", &al2, Relation::Le, &p2.iq, &["alpha2", k2]);
    rows.cmp("system (1): 1/beta2 >= 1/q3 - (gamma+4)/d", &be2, Relation::Ge, &(&p3.iq - &p.od(&g)), &["beta2", k3, ak]);
    rows.cmp("system (1): 1/beta2 <= 1/q3", &be2, Relation::Le, &p3.iq, &["beta2", k3]);
    let w2 = &ibd - &(&p.sigma * &al2) - &be2;
    rows.cmp("system (2): 1/b2' - sigma/alpha2 - 1/beta2 > 0", &w2, Relation::Gt, &zero, &[ak, "alpha2", "beta2"]);
    rows.cmp("system (2): 1/b2' - sigma/alpha2 - 1/beta2 < b/d", &w2, Relation::Lt, &p.od(&p.b), &[ak, "alpha2", "beta2"]);
    let t3 = &iad - &(&p.sigma * &p2.ip) - &p3.ip;
    rows.cmp("system (3): 1/a2' - sigma/p2 - 1/p3 > 0", &t3, Relation::Gt, &zero, &[ak, k2, k3]);
    if below {
        rows.cmp("system (4): 1/q2 > s/d", &p2.iq, Relation::Gt, &sd, &[k2]);
    }
    rows.cmp("system (4): 1/q3 > (gamma+4)/d", &p3.iq, Relation::Gt, &p.od(&g), &[k3, ak]);
    if below {
        rows.cmp("system (5): 1/alpha4 >= 1/q4 - s/d", &al4, Relation::Ge, &(&p4.iq - &sd), &["alpha4", k4]);
    } else {
        rows.cmp("system (5): 1/alpha4 > 0", &al4, Relation::Gt, &zero, &["alpha4"]);
    }
    rows.cmp("system (5): 1/alpha4 <= 1/q4", &al4, Relation::Le, &p4.iq, &["alpha4", k4]);
    let w6 = &ibd - &(&sigma1 * &al4);
    rows.cmp("system (6): 1/b2' - (sigma+1)/alpha4 > 0", &w6, Relation::Gt, &zero, &[ak, "alpha4"]);
    rows.cmp("system (6): 1/b2' - (sigma+1)/alpha4 < (b + s - gamma - 4)/d", &w6, Relation::Lt, &p.od(&(&p.b + &k)), &[ak, "alpha4"]);
    let t7 = &iad - &(&sigma1 * &p4.ip);
    rows.cmp("system (7): 1/a2' - (sigma+1)/p4 > 0", &t7, Relation::Gt, &zero, &[ak, k4]);
    if below {
        rows.cmp("system (7): 1/q4 > s/d", &p4.iq, Relation::Gt, &sd, &[k4]);
    }
    rows.cmp("system (8): s - gamma(a2',b2') - 4 >= 0", &k, Relation::Ge, &zero, &[ak]);
    rows.cmp("system (8): gamma(a2',b2') + 4 >= 0", &g, Relation::Ge, &zero, &[ak]);

    rows.flag(
        "weight exterior in L^gamma2",
        ga2.is_positive() && weight_window(p.d, &fin(&ga2), &zero, &p.b).exterior_ok,
        format!("b = {} > d/gamma2 = {}", p.b, &p.dr * &ga2),
        &["gamma2"],
    );
    rows.flag(
        "weight exterior in H^(s-gamma-4)_gamma4",
        ga4.is_positive() && weight_window(p.d, &fin(&ga4), &k, &p.b).exterior_ok,
        format!("b + {k} > d/gamma4 = {}", &p.dr * &ga4),
        &["gamma4", ak],
    );
    rows.flag("embedding H^s_q2 into L^alpha2", embeds(p.d, &p.s, &fin(&p2.iq), &zero, &fin(&al2), false), String::new(), &[k2, "alpha2"]);
    rows.flag("embedding H^s_q3 into H^(s-gamma-4)_beta2", embeds(p.d, &p.s, &fin(&p3.iq), &k, &fin(&be2), false), String::new(), &[k3, "beta2", ak]);
    rows.flag("embedding H^s_q4 into L^alpha4", embeds(p.d, &p.s, &fin(&p4.iq), &zero, &fin(&al4), false), String::new(), &[k4, "alpha4"]);
    rows.flag(
        "chain rule in H^(s-gamma-4)_r2",
        chain_rule_ok(&k, &p.sigma, &fin(&r2), &fin(&be2), &ext(&al2)),
        format!("order {k}, 1/r2 = {r2}"),
        &[ak, "r2", "beta2", "alpha2"],
    );
    rows.flag(
        "product rule on b2'",
        product_rule_ok(&fin(&ibd), &ext(&ga2), &fin(&r2), &fin(&ga4), &ext(&r4)),
        format!("1/b2' = {ibd}"),
        &[ak, "gamma2", "r2", "gamma4", "r4"],
    );
    p.regularity(rows, &k, &[ak]);
    theta_rows(rows, sub, &t3.min(t7), "min(1/a2' - sigma/p2 - 1/p3, 1/a2' - (sigma+1)/p4)", &[ak, k2, k3, k4]);
}

fn difference_local(p: &P, sub: &SubCertificate, rows: &mut Rows) {
    let below = sub.case == CaseTag::SLtHalfD;
    let a = need_pair!(rows, sub, "(a3,b3)");
    let p5 = need_pair!(rows, sub, "(p5,q5)");
    let p6 = need_pair!(rows, sub, "(p6,q6)");
    let al5 = need_aux!(rows, sub, "alpha5");
    let gh = need_aux!(rows, sub, "gammahat1");
    let (ak, k5, k6) = ("(a3,b3)", "(p5,q5)", "(p6,q6)");
    let one = Rational::one();
    let zero = Rational::zero();
    let sd = p.od(&p.s);
    let ibd = &one - &a.iq;
    let iad = &one - &a.ip;
    in_b0(p, rows, ak, &a);
    in_b0(p, rows, k5, &p5);
    in_b0(p, rows, k6, &p6);
    let expected = &ibd - &(&p.sigma * &al5) - &p6.iq;
    rows.cmp("gammahat1: 1/gammahat1 = 1/b3' - sigma/alpha5 - 1/q6", &gh, Relation::Eq, &expected, &["gammahat1", ak, "alpha5", k6]);
    if below {
        rows.cmp("system: 1/alpha5 >= 1/q5 - s/d", &al5, Relation::Ge, &(&p5.iq - &sd), &["alpha5", k5]);
        rows.cmp("system: 1/q5 > s/d", &p5.iq, Relation::Gt, &sd, &[k5]);
    } else {
        rows.cmp("system: 1/alpha5 > 0", &al5, Relation::Gt, &zero, &["alpha5"]);
    }
    rows.cmp("system: 1/alpha5 <= 1/q5", &al5, Relation::Le, &p5.iq, &["alpha5", k5]);
    rows.cmp("system: 1/b3' - sigma/alpha5 - 1/q6 > b/d", &expected, Relation::Gt, &p.od(&p.b), &[ak, "alpha5", k6]);
    let t = &iad - &(&p.sigma * &p5.ip) - &p6.ip;
    rows.cmp("system: 1/a3' - sigma/p5 - 1/p6 > 0", &t, Relation::Gt, &zero, &[ak, k5, k6]);
    rows.flag(
        "weight local in L^gammahat1",
        gh.is_positive() && weight_window(p.d, &fin(&gh), &zero, &p.b).local_ok,
        format!("b = {} < d/gammahat1 = {}", p.b, &p.dr * &gh),
        &["gammahat1"],
    );
    rows.flag("embedding H^s_q5 into L^alpha5", embeds(p.d, &p.s, &fin(&p5.iq), &zero, &fin(&al5), false), String::new(), &[k5, "alpha5"]);
    theta_rows(rows, sub, &t, "1/a3' - sigma/p5 - 1/p6", &[ak, k5, k6]);
}

fn difference_exterior(p: &P, sub: &SubCertificate, rows: &mut Rows) {
    let a = need_pair!(rows, sub, "(a4,b4)");
    let p7 = need_pair!(rows, sub, "(p7,q7)");
    let (ak, k7) = ("(a4,b4)", "(p7,q7)");
    let one = Rational::one();
    let two = Rational::int(2);
    let zero = Rational::zero();
    let half = Rational::frac(1, 2);
    let ibd = &one - &a.iq;
    in_b0(p, rows, ak, &a);
    in_b0(p, rows, k7, &p7);
    match sub.case {
        CaseTag::SLtHalfD => {
            let d2s = &p.dr - &(&two * &p.s);
            let sigma2 = &p.sigma + &two;
            let a4 = (Rational::int(8) * &sigma2).div(&(&p.sigma * &d2s));
            let b4 = (&p.dr * &sigma2).div(&(&p.dr + &(&p.sigma * &p.s)));
            rows.cmp("closed form: a4 = 8(sigma+2)/(sigma(d-2s))", &fin(&a.ip), Relation::Eq, &a4, &[ak]);
            rows.cmp("closed form: b4 = d(sigma+2)/(d+sigma s)", &fin(&a.iq), Relation::Eq, &b4, &[ak]);
            rows.flag("closed form: (p7,q7) = (a4,b4)", a.pair == p7.pair, format!("{} vs {}", p7.pair, a.pair), &[ak, k7]);
            let rhs = &p.sigma * &(&p7.iq - &p.od(&p.s)) + &p7.iq;
            rows.cmp("identity: 1/b4' = sigma(1/q7 - s/d) + 1/q7", &ibd, Relation::Eq, &rhs, &[ak, k7]);
            let lhs = &one - &a.ip - &((&p.sigma + &one) * &p7.ip);
            let closed = &one - &(&p.sigma * &d2s).div(&Rational::int(8));
            rows.cmp("identity: 1/a4' - (sigma+1)/p7 = 1 - sigma(d-2s)/8", &lhs, Relation::Eq, &closed, &[ak, k7]);
            let ia = &p7.iq - &p.od(&p.s);
            rows.flag(
                "embedding H^s_q7 into L^alpha",
                ia.is_positive() && embeds(p.d, &p.s, &fin(&p7.iq), &zero, &fin(&ia), true),
                format!("1/alpha = 1/q7 - s/d = {ia}"),
                &[k7],
            );
            theta_rows(rows, sub, &lhs, "1/a4' - (sigma+1)/p7", &[ak, k7]);
        }
        CaseTag::SGeHalfD => {
            let al6 = need_aux!(rows, sub, "alpha6");
            rows.flag("(p7,q7) = (inf, 2)", p7.ip.is_zero() && p7.iq == half, p7.pair.to_string(), &[k7]);
            let top = (&p.sigma + &one) * &half;
            rows.flag("system: 1/b4' in (1/2, (sigma+1)/2)", ibd > half && ibd < top, format!("1/b4' = {ibd}"), &[ak]);
            rows.cmp("system: 1/b4' = sigma/alpha6 + 1/2", &ibd, Relation::Eq, &(&p.sigma * &al6 + &half), &[ak, "alpha6"]);
            rows.flag("system: alpha6 in (2, inf)", al6.is_positive() && al6 < half, format!("1/alpha6 = {al6}"), &["alpha6"]);
            rows.flag("embedding H^s into L^alpha6", embeds(p.d, &p.s, &two, &zero, &fin(&al6), false), String::new(), &["alpha6"]);
            theta_rows(rows, sub, &(&one - &a.ip), "1 - 1/a4", &[ak]);
        }
    }
}

/// Re-derive every row of `cert` for `params`. Stored pass flags are never trusted.
pub fn verify_certificate(params: &ParamSet, cert: &FullCertificate) -> VerifyReport {
    let p = P::new(params);
    let mut out = Vec::new();
    {
        let mut rows = Rows { scope: "certificate".into(), out: &mut out };
        let same = cert.params.d == params.d
            && cert.params.s == params.s
            && cert.params.b == params.b
            && cert.params.sigma == params.sigma;
        rows.flag("parameters match", same, format!("certificate for {}", cert.params), &["params"]);
        let expected: BTreeSet<(Lemma, Piece)> = [
            (Lemma::SobolevEstimate, Piece::Local),
            (Lemma::SobolevEstimate, Piece::Exterior),
            (Lemma::LebesgueDifference, Piece::Local),
            (Lemma::LebesgueDifference, Piece::Exterior),
        ]
        .into_iter()
        .collect();
        let present: Vec<(Lemma, Piece)> = cert.sub.iter().map(|s| (s.lemma, s.piece)).collect();
        let unique: BTreeSet<_> = present.iter().copied().collect();
        rows.flag(
            "four estimates present once each",
            unique == expected && present.len() == 4,
            format!("{} sub-certificates", present.len()),
            &["structure"],
        );
        let keys: Vec<String> = cert.space_pairs().into_keys().collect();
        let want: Vec<String> = (1..=7).map(|i| format!("(p{i},q{i})")).collect();
        rows.flag("space pairs (p1,q1)..(p7,q7) present", keys == want, keys.join(" "), &["structure"]);
        let thetas: Option<Vec<Rational>> = cert.sub.iter().map(theta_of).collect();
        match (thetas.and_then(|t| t.into_iter().min()), cert.theta.is_exact()) {
            (Some(min), true) => {
                rows.cmp("global theta = min over estimates", &cert.theta.base, Relation::Eq, &min, &["theta"]);
                rows.cmp("global theta > 0", &cert.theta.base, Relation::Gt, &Rational::zero(), &["theta"]);
            }
            _ => rows.flag("global theta exact", false, format!("theta = {}", cert.theta), &["theta"]),
        }
        for c in &cert.regularity_checks {
            let ok = c.recheck();
            rows.flag(&format!("stored regularity: {}", c.label), ok && c.pass == ok, c.to_string(), &["stored"]);
        }
    }
    for sub in &cert.sub {
        let mut rows = Rows { scope: sub.name(), out: &mut out };
        let case = if params.s < params.half_dim() { CaseTag::SLtHalfD } else { CaseTag::SGeHalfD };
        rows.flag("case matches s against d/2", sub.case == case, format!("{}", sub.case), &["case"]);
        for c in &sub.constraints {
            let ok = c.recheck();
            rows.flag(&format!("stored: {}", c.label), ok && c.pass == ok, c.to_string(), &["stored"]);
        }
        match (sub.lemma, sub.piece) {
            (Lemma::SobolevEstimate, Piece::Local) => sobolev_local(&p, sub, &mut rows),
            (Lemma::SobolevEstimate, Piece::Exterior) => sobolev_exterior(&p, sub, &mut rows),
            (Lemma::LebesgueDifference, Piece::Local) => difference_local(&p, sub, &mut rows),
            (Lemma::LebesgueDifference, Piece::Exterior) => difference_exterior(&p, sub, &mut rows),
        }
    }
    VerifyReport { rows: out }
}
