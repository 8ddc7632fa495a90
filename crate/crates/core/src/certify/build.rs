//! Constructive choice of exponents for the four nonlinear estimates.
//!
//! Every system is linear in reciprocal exponents once `d, s, b, σ` are fixed.
//! Variables are `4/a`, `d/b` for the dual-side pairs and `1/q` for the
//! Strichartz pairs, whose time exponent follows from `4/p + d/q = d/2`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::admissible::ExponentPair;
use crate::classify::{is_even_integer, sigma_c, theorem_applies, ParamSet};
use crate::error::CertifyError;
use crate::exact::{Bound, ExtendedRational, Rational, SlackRational, Window};

use super::linear::{LinExpr, LinSystem};
use super::model::{CaseTag, Constraint, FullCertificate, Lemma, Piece, Relation, SubCertificate};

pub(crate) struct Ctx {
    pub d: u32,
    pub dr: Rational,
    pub hd: Rational,
    pub s: Rational,
    pub b: Rational,
    pub sigma: Rational,
    pub even: bool,
    /// `[σ] + 1`; `k <= [σ] + 1` is the same as `σ >= ⌈k⌉ - 1`.
    pub reg_bound: Rational,
    /// Grid spacing `1/(8D)`, `D` the common denominator of `s, b, σ, d/2`.
    pub grain: Rational,
}

impl Ctx {
    pub fn new(params: &ParamSet) -> Self {
        let hd = params.half_dim();
        let mut den = BigInt::from(1);
        for v in [&params.s, &params.b, &params.sigma, &hd] {
            den = den.lcm(v.denom());
        }
        Ctx {
            d: params.d,
            dr: params.dim(),
            hd,
            s: params.s.clone(),
            b: params.b.clone(),
            sigma: params.sigma.clone(),
            even: is_even_integer(&params.sigma),
            reg_bound: Rational::from_bigint(params.sigma.floor()) + Rational::one(),
            grain: Rational::from_bigint(BigInt::from(1)).div(&(Rational::from_bigint(den) * Rational::int(8))),
        }
    }

    pub fn case(&self) -> CaseTag {
        if self.s < self.hd {
            CaseTag::SLtHalfD
        } else {
            CaseTag::SGeHalfD
        }
    }

    fn over_d(&self, v: &Rational) -> Rational {
        v.div(&self.dr)
    }

    /// `(d - 4)/(2d)`, the lower end of `1/q` on B₀ before clamping at 0.
    fn b0_floor(&self) -> Rational {
        Rational::frac(self.d as i64 - 4, 2 * self.d as i64)
    }

    /// `1/p` from `1/q` on B.
    fn inv_p(&self, q: &LinExpr) -> LinExpr {
        (LinExpr::constant(Rational::frac(1, 2)) - q.clone()).scale(&Rational::frac(self.d as i64, 4))
    }

    fn inv_p_val(&self, q: &Rational) -> Rational {
        (Rational::frac(1, 2) - q) * Rational::frac(self.d as i64, 4)
    }

    /// `(v)⁺`: a value just above `v`, within one grid step.
    fn plus_window(&self, v: &Rational) -> Window {
        Window::between(Bound::open(v.clone()), Bound::closed(v + &self.grain))
    }
}

fn c(v: Rational) -> LinExpr {
    LinExpr::constant(v)
}

fn zero() -> LinExpr {
    LinExpr::default()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

fn open_window(lo: Vec<Rational>, hi: Vec<Rational>) -> Window {
    let mut w = Window::new();
    for v in lo {
        w.raise(Bound::open(v));
    }
    for v in hi {
        w.lower_to(Bound::open(v));
    }
    w
}

fn val(fixed: &[Option<Rational>], i: usize) -> Rational {
    fixed[i].clone().expect("chosen earlier")
}

/// Rows for `(a, b) ∈ A` in the variables `X = 4/a`, `Y = d/b`.
fn a_rows(sys: &mut LinSystem, ctx: &Ctx, name: &str, x: &LinExpr, y: &LinExpr) {
    sys.row(format!("{name} in A: 4/a >= 0"), x.clone(), Relation::Ge, zero());
    sys.row(format!("{name} in A: a >= 2"), x.clone(), Relation::Le, c(Rational::int(2)));
    sys.row(format!("{name} in A: b < inf"), y.clone(), Relation::Gt, zero());
    sys.row(format!("{name} in A: b >= 2"), y.clone(), Relation::Le, c(ctx.hd.clone()));
    sys.row(format!("{name} in A: 2/a + d/b <= d/2"), x.scale(&q(1, 2)) + y.clone(), Relation::Le, c(ctx.hd.clone()));
}

/// Rows for a pair in B₀ in the variable `1/q`.
fn b0_rows(sys: &mut LinSystem, ctx: &Ctx, name: &str, iq: &LinExpr) {
    sys.row(format!("{name} in B0: q < inf"), iq.clone(), Relation::Gt, zero());
    sys.row(format!("{name} in B0: p > 2"), iq.clone(), Relation::Gt, c(ctx.b0_floor()));
    sys.row(format!("{name} in B0: q >= 2"), iq.clone(), Relation::Le, c(q(1, 2)));
}

fn regularity_row(sys: &mut LinSystem, ctx: &Ctx, pair: &str, k: &LinExpr) {
    if !ctx.even {
        sys.row(
            format!("regularity {pair}: sigma >= ceil(s - gamma - 4) - 1, i.e. s - gamma - 4 <= [sigma] + 1"),
            k.clone(),
            Relation::Le,
            c(ctx.reg_bound.clone()),
        );
    }
}

fn evaluate(sys: &LinSystem, sol: &[Rational]) -> Vec<Constraint> {
    sys.rows
        .iter()
        .map(|r| {
            Constraint::new(
                r.label.clone(),
                SlackRational::exact(r.lhs.eval(sol)),
                r.rel,
                SlackRational::exact(r.rhs.eval(sol)),
            )
        })
        .collect()
}

fn exponent(recip: &Rational) -> SlackRational {
    SlackRational::exact(recip.recip().expect("positive reciprocal"))
}

fn dual_pair(ctx: &Ctx, x: &Rational, y: &Rational) -> Result<ExponentPair, CertifyError> {
    Ok(ExponentPair::from_recips(&(x * &q(1, 4)), &ctx.over_d(y))?)
}

fn space_pair(ctx: &Ctx, iq: &Rational) -> Result<ExponentPair, CertifyError> {
    Ok(ExponentPair::from_recips(&ctx.inv_p_val(iq), iq)?)
}

fn energy_pair() -> ExponentPair {
    ExponentPair::new(ExtendedRational::Infinity, Rational::int(2)).expect("(inf, 2) is a valid pair")
}

type Preferred<'a> = Box<dyn Fn(usize, &[Option<Rational>]) -> Option<Window> + 'a>;

/// A branch of the construction: extra rows, fixed values and preferences.
struct Choice<'a> {
    label: String,
    rows: Vec<(String, LinExpr, Relation, LinExpr)>,
    fixed: Vec<Option<Rational>>,
    preferred: Preferred<'a>,
}

impl<'a> Choice<'a> {
    fn free(label: impl Into<String>) -> Self {
        Choice { label: label.into(), rows: Vec::new(), fixed: Vec::new(), preferred: Box::new(|_, _| None) }
    }
}

/// First branch choice whose system is solvable.
fn try_choices(
    base: &LinSystem,
    order: &[usize],
    choices: Vec<Choice<'_>>,
) -> Option<(LinSystem, Vec<Rational>, String)> {
    let mut first_label: Option<String> = None;
    for choice in choices {
        let mut sys = base.clone();
        for (label, lhs, rel, rhs) in &choice.rows {
            sys.row(label.clone(), lhs.clone(), *rel, rhs.clone());
        }
        let mut fixed = choice.fixed.clone();
        fixed.resize(sys.len(), None);
        if let Ok(sol) = sys.solve(order, fixed, &*choice.preferred) {
            let label = match &first_label {
                None => choice.label,
                Some(first) => format!("{}; fallback from {first}", choice.label),
            };
            return Some((sys, sol, label));
        }
        first_label.get_or_insert(choice.label);
    }
    None
}

/// Branch choices first, then an unconstrained sequential pick over the
/// projected windows.
fn solve_with(
    base: &LinSystem,
    order: &[usize],
    choices: Vec<Choice<'_>>,
    fallback_pref: &dyn Fn(usize, &[Option<Rational>]) -> Option<Window>,
    piece: &str,
) -> Result<(LinSystem, Vec<Rational>, String), CertifyError> {
    let first = choices.first().map(|c| c.label.clone());
    if let Some(found) = try_choices(base, order, choices) {
        return Ok(found);
    }
    let sol = base.solve(order, vec![], fallback_pref).map_err(|reason| CertifyError::Infeasible {
        piece: piece.to_string(),
        reason,
    })?;
    let label = match first {
        Some(first) => format!("projected-window search; fallback from {first}"),
        None => "projected-window search".to_string(),
    };
    Ok((base.clone(), sol, label))
}

fn gate(params: &ParamSet) -> Result<(), CertifyError> {
    let v = theorem_applies(params);
    if v.applies {
        return Ok(());
    }
    let failed: Vec<String> = v.failed().map(|c| format!("{} ({})", c.name, c.actual)).collect();
    Err(CertifyError::Gate(failed.join("; ")))
}

fn difference_gate(params: &ParamSet) -> Result<(), CertifyError> {
    let four = Rational::int(4);
    let b_ok = params.b.is_positive() && params.b < four.min(params.dim());
    let sigma_ok = ExtendedRational::Finite(params.sigma.clone()) < sigma_c(params, &params.s);
    if b_ok && sigma_ok {
        Ok(())
    } else {
        Err(CertifyError::Gate(format!("difference estimate needs 0 < b < min(4, d) and sigma < sigma_c(s); got {params}")))
    }
}

/// Weighted nonlinearity near the origin, measured in the dual Sobolev norm.
pub fn certify_sobolev_local(params: &ParamSet) -> Result<SubCertificate, CertifyError> {
    gate(params)?;
    let ctx = Ctx::new(params);
    match ctx.case() {
        CaseTag::SLtHalfD => sobolev_local_below(&ctx),
        CaseTag::SGeHalfD => sobolev_local_above(&ctx),
    }
}

fn sobolev_local_below(ctx: &Ctx) -> Result<SubCertificate, CertifyError> {
    let (d, s, b, sigma) = (&ctx.dr, &ctx.s, &ctx.b, &ctx.sigma);
    let one = Rational::one();
    let sigma1 = sigma + &one;
    let mut sys = LinSystem::new();
    let x = sys.add_var("4/a1");
    let y = sys.add_var("d/b1");
    let iq = sys.add_var("1/q1");
    a_rows(&mut sys, ctx, "(a1,b1)", &x, &y);
    b0_rows(&mut sys, ctx, "(p1,q1)", &iq);
    let g = x.clone() + y.clone() - ctx.hd.clone();
    let k = c(s.clone()) - g.clone();
    let ib = c(one.clone()) - y.scale(&d.recip().unwrap());
    let ia = c(one.clone()) - x.scale(&q(1, 4));
    let inv_alpha = iq.clone() - ctx.over_d(s);
    let inv_beta = iq.clone() - g.scale(&d.recip().unwrap());
    sys.row(
        "weight local: 1/b1' - sigma/alpha1 - 1/beta1 > b/d",
        ib.clone() - inv_alpha.scale(sigma) - inv_beta.clone(),
        Relation::Gt,
        c(ctx.over_d(b)),
    );
    sys.row("time: 1/a1' - (sigma+1)/p1 > 0", ia.clone() - ctx.inv_p(&iq).scale(&sigma1), Relation::Gt, zero());
    sys.row("embedding: 1/q1 - s/d > 0", inv_alpha.clone(), Relation::Gt, zero());
    sys.row("derivative order: s - gamma(a1',b1') - 4 >= 0", k.clone(), Relation::Ge, zero());
    sys.row("derivative order: gamma(a1',b1') + 4 >= 0", g.clone(), Relation::Ge, zero());
    sys.row("embedding: beta1 < inf", inv_beta.clone(), Relation::Gt, zero());
    regularity_row(&mut sys, ctx, "(a1,b1)", &k);

    let q1_pref = move |var: usize, fixed: &[Option<Rational>]| -> Option<Window> {
        if var != 2 {
            return None;
        }
        let xa = val(fixed, 0);
        let ia1 = Rational::one() - &xa * &q(1, 4);
        let s1 = &ctx.sigma + &Rational::one();
        let lo = vec![
            ctx.b0_floor(),
            ctx.over_d(&ctx.s),
            q(1, 2) - (Rational::int(4) * ia1).div(&(&ctx.dr * &s1)),
        ];
        let hi = vec![
            q(1, 2),
            ctx.over_d(&ctx.s) + (q(1, 2) - ctx.over_d(&(&ctx.b + &ctx.s)) + ctx.over_d(&xa)).div(&s1),
        ];
        Some(open_window(lo, hi))
    };

    let mut choices = Vec::new();
    if *s > one {
        choices.push(Choice {
            label: "1<s<d/2: 4/a1 = 2, d/b1 = d/2 - 1".into(),
            rows: vec![],
            fixed: vec![Some(Rational::int(2)), Some(&ctx.hd - &one)],
            preferred: Box::new(q1_pref),
        });
    } else {
        let two = Rational::int(2);
        let y_window = {
            let mut w = Window::between(Bound::closed(s - &two + &ctx.hd), Bound::closed((d - &two * s).div(&two)));
            w.raise(Bound::open(Rational::zero()));
            let t = (d - &two * s - Rational::int(4)) * sigma.div(&two);
            for v in [d - b, ctx.hd.clone(), (&two * s + d - &two * b + Rational::int(4)).div(&two) - t] {
                w.lower_to(Bound::open(v));
            }
            w
        };
        choices.push(Choice {
            label: "0<=s<=1: 4/a1 = s + d/2 - d/b1".into(),
            rows: vec![(
                "choice: 4/a1 = s + d/2 - d/b1".into(),
                x.clone(),
                Relation::Eq,
                c(s + &ctx.hd) - y.clone(),
            )],
            fixed: vec![],
            preferred: Box::new(move |var, fixed| if var == 1 { Some(y_window.clone()) } else { q1_pref(var, fixed) }),
        });
    }
    let (sys, sol, branch) = solve_with(&sys, &[0, 1, 2], choices, &q1_pref, "sobolev_estimate/local")?;

    let (xv, yv, qv) = (&sol[0], &sol[1], &sol[2]);
    let gv = xv + yv - &ctx.hd;
    let ibv = &one - &ctx.over_d(yv);
    let ialpha = qv - &ctx.over_d(s);
    let ibeta = qv - &ctx.over_d(&gv);
    let ir = sigma * &ialpha + &ibeta;
    let irbar = sigma * &ialpha;
    let mut pairs = BTreeMap::new();
    pairs.insert("(a1,b1)".to_string(), dual_pair(ctx, xv, yv)?);
    pairs.insert("(p1,q1)".to_string(), space_pair(ctx, qv)?);
    let mut aux = BTreeMap::new();
    aux.insert("alpha1".to_string(), exponent(&ialpha));
    aux.insert("beta1".to_string(), exponent(&ibeta));
    aux.insert("r1".to_string(), exponent(&ir));
    aux.insert("gamma1".to_string(), exponent(&(&ibv - &ir)));
    aux.insert("rbar1".to_string(), exponent(&irbar));
    aux.insert("gammabar1".to_string(), exponent(&(&ibv - &irbar)));
    let theta = (&one - &(xv * &q(1, 4))) - &sigma1 * &ctx.inv_p_val(qv);
    Ok(SubCertificate {
        lemma: Lemma::SobolevEstimate,
        piece: Piece::Local,
        case: CaseTag::SLtHalfD,
        branch,
        pairs,
        aux,
        theta: SlackRational::exact(theta),
        constraints: evaluate(&sys, &sol),
    })
}

fn sobolev_local_above(ctx: &Ctx) -> Result<SubCertificate, CertifyError> {
    let (d, s, b, sigma) = (&ctx.dr, &ctx.s, &ctx.b, &ctx.sigma);
    let one = Rational::one();
    let half = q(1, 2);
    let sigma1 = sigma + &one;
    let mut sys = LinSystem::new();
    let y = sys.add_var("d/b1");
    let ibeta = sys.add_var("1/beta1");
    let ialpha = sys.add_var("1/alpha1");
    let ialphabar = sys.add_var("1/alphabar1");
    // (a1, b1) ∈ S: 4/a1 = d - 2 d/b1
    let x = c(d.clone()) - y.scale(&Rational::int(2));
    sys.row("(a1,b1) in S: 4/a1 >= 0", x.clone(), Relation::Ge, zero());
    sys.row("(a1,b1) in S: a1 >= 2", x.clone(), Relation::Le, c(Rational::int(2)));
    sys.row("(a1,b1) in S: b1 < inf", y.clone(), Relation::Gt, zero());
    sys.row("(a1,b1) in S: b1 >= 2", y.clone(), Relation::Le, c(ctx.hd.clone()));
    let k = c(s.clone()) - x.scale(&half);
    let ib = c(one.clone()) - y.scale(&d.recip().unwrap());
    sys.row("exponent: alpha1 < inf", ialpha.clone(), Relation::Gt, zero());
    sys.row("exponent: alpha1 >= 2", ialpha.clone(), Relation::Le, c(half.clone()));
    sys.row("exponent: alphabar1 < inf", ialphabar.clone(), Relation::Gt, zero());
    sys.row("exponent: alphabar1 >= 2", ialphabar.clone(), Relation::Le, c(half.clone()));
    sys.row("exponent: beta1 <= b1", ibeta.clone(), Relation::Ge, y.scale(&d.recip().unwrap()));
    sys.row("exponent: beta1 >= 2", ibeta.clone(), Relation::Le, c(half.clone()));
    sys.row(
        "weight local: 1/b1' - sigma/alpha1 - 1/beta1 > b/d",
        ib.clone() - ialpha.scale(sigma) - ibeta.clone(),
        Relation::Gt,
        c(ctx.over_d(b)),
    );
    sys.row(
        "weight local: 1/b1' - (sigma+1)/alphabar1 > (b + s - 2/a1)/d",
        ib.clone() - ialphabar.scale(&sigma1),
        Relation::Gt,
        (c(b.clone()) + k.clone()).scale(&d.recip().unwrap()),
    );
    sys.row("derivative order: s - 2/a1 >= 0", k.clone(), Relation::Ge, zero());
    regularity_row(&mut sys, ctx, "(a1,b1)", &k);

    let mut choices = Vec::new();
    if ctx.d >= 3 {
        choices.push(Choice {
            label: "s>=d/2, d>=3: b1 = 2d/(d-2)".into(),
            rows: vec![],
            fixed: vec![Some(&ctx.hd - &one)],
            preferred: Box::new(|_, _| None),
        });
    } else {
        let xs = s - &ctx.hd;
        let top = Rational::from_bigint(xs.floor()) + &one - &xs;
        let w = Window::between(Bound::open(Rational::zero()), Bound::closed(top));
        choices.push(Choice {
            label: "s>=d/2, d<=2: d/b1 in (0, [s-d/2] + 1 - (s-d/2)]".into(),
            rows: vec![],
            fixed: vec![],
            preferred: Box::new(move |var, _| if var == 0 { Some(w.clone()) } else { None }),
        });
    }
    let (sys, sol, branch) = solve_with(&sys, &[0, 1, 2, 3], choices, &|_, _| None, "sobolev_estimate/local")?;

    let yv = &sol[0];
    let xv = d - &(Rational::int(2) * yv);
    let ibv = &one - &ctx.over_d(yv);
    let (ibeta_v, ialpha_v, ialphabar_v) = (&sol[1], &sol[2], &sol[3]);
    let ir = sigma * ialpha_v + ibeta_v;
    let irbar = &sigma1 * ialphabar_v;
    let mut pairs = BTreeMap::new();
    pairs.insert("(a1,b1)".to_string(), dual_pair(ctx, &xv, yv)?);
    pairs.insert("(p1,q1)".to_string(), energy_pair());
    let mut aux = BTreeMap::new();
    aux.insert("alpha1".to_string(), exponent(ialpha_v));
    aux.insert("beta1".to_string(), exponent(ibeta_v));
    aux.insert("alphabar1".to_string(), exponent(ialphabar_v));
    aux.insert("r1".to_string(), exponent(&ir));
    aux.insert("gamma1".to_string(), exponent(&(&ibv - &ir)));
    aux.insert("rbar1".to_string(), exponent(&irbar));
    aux.insert("gammabar1".to_string(), exponent(&(&ibv - &irbar)));
    let theta = &one - &(&xv * &q(1, 4));
    Ok(SubCertificate {
        lemma: Lemma::SobolevEstimate,
        piece: Piece::Local,
        case: CaseTag::SGeHalfD,
        branch,
        pairs,
        aux,
        theta: SlackRational::exact(theta),
        constraints: evaluate(&sys, &sol),
    })
}

/// Weighted nonlinearity away from the origin, measured in the dual Sobolev norm.
pub fn certify_sobolev_exterior(params: &ParamSet) -> Result<SubCertificate, CertifyError> {
    gate(params)?;
    let ctx = Ctx::new(params);
    let case = ctx.case();
    let below = case == CaseTag::SLtHalfD;
    let (d, s, b, sigma) = (&ctx.dr, &ctx.s, &ctx.b, &ctx.sigma);
    let one = Rational::one();
    let two = Rational::int(2);
    let sigma1 = sigma + &one;
    let inv_d = d.recip().unwrap();

    let mut sys = LinSystem::new();
    let x = sys.add_var("4/a2");
    let y = sys.add_var("d/b2");
    let q2 = sys.add_var("1/q2");
    let q3 = sys.add_var("1/q3");
    let q4 = sys.add_var("1/q4");
    let ia2 = sys.add_var("1/alpha2");
    let ib2 = sys.add_var("1/beta2");
    let ia4 = sys.add_var("1/alpha4");
    a_rows(&mut sys, &ctx, "(a2,b2)", &x, &y);
    b0_rows(&mut sys, &ctx, "(p2,q2)", &q2);
    b0_rows(&mut sys, &ctx, "(p3,q3)", &q3);
    b0_rows(&mut sys, &ctx, "(p4,q4)", &q4);
    let g = x.clone() + y.clone() - ctx.hd.clone();
    let k = c(s.clone()) - g.clone();
    let ib = c(one.clone()) - y.scale(&inv_d);
    let ia = c(one.clone()) - x.scale(&q(1, 4));
    let sd = ctx.over_d(s);

    if below {
        sys.row("embedding (1): 1/alpha2 >= 1/q2 - s/d", ia2.clone(), Relation::Ge, q2.clone() - sd.clone());
    } else {
        sys.row("embedding (1): 1/alpha2 > 0", ia2.clone(), Relation::Gt, zero());
    }
    sys.row("embedding (1): 1/alpha2 <= 1/q2", ia2.clone(), Relation::Le, q2.clone());
    sys.row(
        "embedding (1): 1/beta2 >= 1/q3 - (gamma(a2',b2') + 4)/d",
        ib2.clone(),
        Relation::Ge,
        q3.clone() - g.scale(&inv_d),
    );
    sys.row("embedding (1): 1/beta2 <= 1/q3", ib2.clone(), Relation::Le, q3.clone());
    let w2 = ib.clone() - ia2.scale(sigma) - ib2.clone();
    sys.row("weight exterior (2): 1/b2' - sigma/alpha2 - 1/beta2 > 0", w2.clone(), Relation::Gt, zero());
    sys.row("weight exterior (2): 1/b2' - sigma/alpha2 - 1/beta2 < b/d", w2, Relation::Lt, c(ctx.over_d(b)));
    sys.row(
        "time (3): 1/a2' - sigma/p2 - 1/p3 > 0",
        ia.clone() - ctx.inv_p(&q2).scale(sigma) - ctx.inv_p(&q3),
        Relation::Gt,
        zero(),
    );
    if below {
        sys.row("embedding (4): 1/q2 > s/d", q2.clone(), Relation::Gt, c(sd.clone()));
    }
    sys.row("embedding (4): 1/q3 > (gamma(a2',b2') + 4)/d", q3.clone(), Relation::Gt, g.scale(&inv_d));
    if below {
        sys.row("embedding (5): 1/alpha4 >= 1/q4 - s/d", ia4.clone(), Relation::Ge, q4.clone() - sd.clone());
    } else {
        sys.row("embedding (5): 1/alpha4 > 0", ia4.clone(), Relation::Gt, zero());
    }
    sys.row("embedding (5): 1/alpha4 <= 1/q4", ia4.clone(), Relation::Le, q4.clone());
    let w6 = ib.clone() - ia4.scale(&sigma1);
    sys.row("weight exterior (6): 1/b2' - (sigma+1)/alpha4 > 0", w6.clone(), Relation::Gt, zero());
    sys.row(
        "weight exterior (6): 1/b2' - (sigma+1)/alpha4 < (b + s - gamma(a2',b2') - 4)/d",
        w6,
        Relation::Lt,
        (c(b.clone()) + k.clone()).scale(&inv_d),
    );
    sys.row("time (7): 1/a2' - (sigma+1)/p4 > 0", ia.clone() - ctx.inv_p(&q4).scale(&sigma1), Relation::Gt, zero());
    if below {
        sys.row("embedding (7): 1/q4 > s/d", q4.clone(), Relation::Gt, c(sd.clone()));
    }
    sys.row("derivative order (8): s - gamma(a2',b2') - 4 >= 0", k.clone(), Relation::Ge, zero());
    sys.row("derivative order (8): gamma(a2',b2') + 4 >= 0", g.clone(), Relation::Ge, zero());
    regularity_row(&mut sys, &ctx, "(a2,b2)", &k);

    // sufficient windows for (4/a2, d/b2) used to rank grid points
    let mut pair_filter = LinSystem::new();
    let fx = pair_filter.add_var("4/a2");
    let fy = pair_filter.add_var("d/b2");
    pair_filter.row("d/b2 > 0", fy.clone(), Relation::Gt, zero());
    pair_filter.row("d/b2 lower", fy.clone(), Relation::Gt, c(&ctx.hd - b - &(&ctx.hd * sigma)));
    pair_filter.row("d/b2 < d/2", fy.clone(), Relation::Lt, c(ctx.hd.clone()));
    pair_filter.row("4/a2 upper", fx.clone(), Relation::Lt, c(&(&ctx.hd * sigma) + b + s));
    if below {
        let t = d - &two * s - Rational::int(4);
        pair_filter.row("d/b2 upper", fy.clone(), Relation::Lt, c(d - &(&sigma1 * &t).div(&two)));
        pair_filter.row("4/a2 lower", fx.clone(), Relation::Gt, c((&t * sigma).div(&two) - &two));
    }
    pair_filter.row("4/a2 >= d/2 - d/b2", fx.clone(), Relation::Ge, c(ctx.hd.clone()) - fy.clone());
    pair_filter.row("4/a2 <= 2", fx.clone(), Relation::Le, c(two.clone()));
    pair_filter.row("4/a2 <= d - 2d/b2", fx.clone(), Relation::Le, c(d.clone()) - fy.scale(&two));
    pair_filter.row("4/a2 <= s + d/2 - d/b2", fx.clone(), Relation::Le, c(s + &ctx.hd) - fy.clone());

    let ctx_ref = &ctx;
    let q_pref = move |var: usize, fixed: &[Option<Rational>]| -> Option<Window> {
        if !(2..=4).contains(&var) {
            return None;
        }
        let ctx = ctx_ref;
        let (s, b, sigma) = (&ctx.s, &ctx.b, &ctx.sigma);
        let half = q(1, 2);
        let sigma1 = sigma + &Rational::one();
        let xd = ctx.over_d(&val(fixed, 0));
        let yd = ctx.over_d(&val(fixed, 1));
        let sd = ctx.over_d(s);
        let bd = ctx.over_d(b);
        let four_d = ctx.over_d(&Rational::int(4));
        match var {
            2 if below => {
                let lo = vec![
                    sigma * &sd,
                    sigma * &ctx.b0_floor(),
                    &half - &yd - &bd,
                    sigma * &half - &four_d + &xd,
                ];
                let hi = vec![sigma * &half, sigma * &sd + &xd + ctx.over_d(&Rational::int(2)), Rational::one() + sigma * &sd - &yd];
                Some(open_window(lo.iter().map(|v| v.div(sigma)).collect(), hi.iter().map(|v| v.div(sigma)).collect()))
            }
            3 => {
                let sq2 = sigma * &val(fixed, 2);
                if below {
                    let lo = vec![
                        Rational::one() - &yd - &bd - &sq2,
                        &sigma1 * &half - &four_d + &xd - &sq2,
                        ctx.b0_floor(),
                        -&half + &xd + &yd,
                    ];
                    let hi = vec![half.clone(), &half + &(sigma * &sd) + &xd - &sq2];
                    Some(open_window(lo, hi))
                } else {
                    let lo = vec![
                        -&half + &xd + &yd,
                        Rational::one() - &yd - &bd - &sq2,
                        &sigma1 * &half - &four_d + &xd - &sq2,
                    ];
                    let hi = vec![half.clone(), &sigma1 * &half - &sq2];
                    Some(open_window(lo, hi))
                }
            }
            4 => {
                let ia2 = Rational::one() - &val(fixed, 0) * &q(1, 4);
                let mut lo = vec![
                    &half - &ctx.over_d(&(b + s)) + &xd,
                    &sigma1 * &half - &four_d * &ia2,
                    &sigma1 * &ctx.b0_floor(),
                ];
                let mut hi = vec![&sigma1 * &half];
                if below {
                    lo.push(&sigma1 * &sd);
                    hi.push(Rational::one() - &yd + &sigma1 * &sd);
                }
                Some(open_window(lo.iter().map(|v| v.div(&sigma1)).collect(), hi.iter().map(|v| v.div(&sigma1)).collect()))
            }
            _ => None,
        }
    };

    let order = [0, 1, 2, 3, 4, 5, 6, 7];
    let mut choices: Vec<Choice> = Vec::new();
    let tie = ("choice: 4/a2 = d - 2d/b2".to_string(), x.clone(), Relation::Eq, c(d.clone()) - y.scale(&two));
    let plus_choice = |label: &str, v: Rational| -> Choice {
        let w = ctx_ref.plus_window(&v);
        Choice {
            label: label.to_string(),
            rows: vec![tie.clone()],
            fixed: vec![],
            preferred: Box::new(move |var, fixed| if var == 1 { Some(w.clone()) } else { q_pref(var, fixed) }),
        }
    };
    if *s > one {
        if ctx.d >= 3 {
            if *sigma > (&two - &two * b).div(d) {
                choices.push(Choice {
                    label: "s>1, sigma>(2-2b)/d: (a2,b2) = (2, 2d/(d-2))".into(),
                    rows: vec![],
                    fixed: vec![Some(two.clone()), Some(&ctx.hd - &one)],
                    preferred: Box::new(q_pref),
                });
            } else {
                let v = b + &((d - &(&two * s)) * sigma).div(&two);
                choices.push(plus_choice("s>1, sigma<=(2-2b)/d: 4/a2 = d - 2d/b2, d/b2 = (b + (d-2s)sigma/2)+", v));
            }
        } else if *sigma > (d - &(&two * b)).div(d) {
            choices.push(plus_choice("s>1, d<=2, sigma>(d-2b)/d: 4/a2 = d - 2d/b2, d/b2 = 0+", Rational::zero()));
        } else {
            let v = b + &((d - &(&two * s)) * sigma).div(&two);
            choices.push(plus_choice("s>1, d<=2, sigma<=(d-2b)/d: 4/a2 = d - 2d/b2, d/b2 = (b + (d-2s)sigma/2)+", v));
        }
    }

    let piece = "sobolev_estimate/exterior";
    let first = choices.first().map(|c| c.label.clone());
    let found = if choices.is_empty() { None } else { try_choices(&sys, &order, choices) };
    let (sys, sol, branch) = match found {
        Some(found) => found,
        None => {
            let suffix = first.map(|f| format!("; fallback from {f}")).unwrap_or_default();
            match grid_search(&ctx, &sys, &pair_filter, &order, &q_pref) {
                Some((sol, label)) => (sys.clone(), sol, format!("{label}{suffix}")),
                None => {
                    let sol = sys
                        .solve(&order, vec![], &q_pref)
                        .map_err(|reason| CertifyError::Infeasible { piece: piece.into(), reason })?;
                    (sys.clone(), sol, format!("projected-window search (grid empty){suffix}"))
                }
            }
        }
    };

    let (xv, yv) = (&sol[0], &sol[1]);
    let (q2v, q3v, q4v) = (&sol[2], &sol[3], &sol[4]);
    let (ia2v, ib2v, ia4v) = (&sol[5], &sol[6], &sol[7]);
    let ibv = &one - &ctx.over_d(yv);
    let iav = &one - &(xv * &q(1, 4));
    let ir2 = sigma * ia2v + ib2v;
    let ir4 = &sigma1 * ia4v;
    let mut pairs = BTreeMap::new();
    pairs.insert("(a2,b2)".to_string(), dual_pair(&ctx, xv, yv)?);
    pairs.insert("(p2,q2)".to_string(), space_pair(&ctx, q2v)?);
    pairs.insert("(p3,q3)".to_string(), space_pair(&ctx, q3v)?);
    pairs.insert("(p4,q4)".to_string(), space_pair(&ctx, q4v)?);
    let mut aux = BTreeMap::new();
    aux.insert("alpha2".to_string(), exponent(ia2v));
    aux.insert("beta2".to_string(), exponent(ib2v));
    aux.insert("r2".to_string(), exponent(&ir2));
    aux.insert("gamma2".to_string(), exponent(&(&ibv - &ir2)));
    aux.insert("alpha4".to_string(), exponent(ia4v));
    aux.insert("r4".to_string(), exponent(&ir4));
    aux.insert("gamma4".to_string(), exponent(&(&ibv - &ir4)));
    let t3 = &iav - &(sigma * &ctx.inv_p_val(q2v)) - ctx.inv_p_val(q3v);
    let t7 = &iav - &(&sigma1 * &ctx.inv_p_val(q4v));
    Ok(SubCertificate {
        lemma: Lemma::SobolevEstimate,
        piece: Piece::Exterior,
        case,
        branch,
        pairs,
        aux,
        theta: SlackRational::exact(t3.min(t7)),
        constraints: evaluate(&sys, &sol),
    })
}

/// Lexicographic scan over `(4/a2, d/b2)` on the grid `k/(8D)`.
fn grid_search(
    ctx: &Ctx,
    sys: &LinSystem,
    filter: &LinSystem,
    order: &[usize],
    pref: &dyn Fn(usize, &[Option<Rational>]) -> Option<Window>,
) -> Option<(Vec<Rational>, String)> {
    let two = Rational::int(2);
    let steps_x = two.div(&ctx.grain).floor();
    let mut kx = BigInt::from(0);
    while kx <= steps_x {
        let xv = Rational::from_bigint(kx.clone()) * &ctx.grain;
        kx += 1;
        let fixed_x = vec![Some(xv.clone()), None];
        let Some(fw) = filter.window(1, &fixed_x) else { continue };
        if fw.is_empty() {
            continue;
        }
        let mut fixed = vec![None; sys.len()];
        fixed[0] = Some(xv.clone());
        let Some(w) = sys.window(1, &fixed) else { continue };
        let both = w.intersect(&fw);
        let (Some(lo), Some(hi)) = (&both.lower, &both.upper) else { continue };
        let start = lo.value.base.div(&ctx.grain).floor();
        let end = hi.value.base.div(&ctx.grain).ceil();
        let mut ky = start;
        while ky <= end {
            let yv = Rational::from_bigint(ky.clone()) * &ctx.grain;
            ky += 1;
            if !both.contains(&SlackRational::exact(yv.clone())) {
                continue;
            }
            let mut f = fixed.clone();
            f[1] = Some(yv.clone());
            if let Ok(sol) = sys.solve(order, f, pref) {
                return Some((sol, format!("grid search: 4/a2 = {xv}, d/b2 = {yv}")));
            }
        }
    }
    None
}

/// Weighted difference near the origin in Lebesgue norms.
pub fn certify_difference_local(params: &ParamSet) -> Result<SubCertificate, CertifyError> {
    difference_gate(params)?;
    let ctx = Ctx::new(params);
    let case = ctx.case();
    let below = case == CaseTag::SLtHalfD;
    let (s, b, sigma) = (&ctx.s, &ctx.b, &ctx.sigma);
    let one = Rational::one();
    let sd = ctx.over_d(s);

    let mut sys = LinSystem::new();
    let v3 = sys.add_var("1/b3");
    let q5 = sys.add_var("1/q5");
    let ia5 = sys.add_var("1/alpha5");
    let q6 = sys.add_var("1/q6");
    b0_rows(&mut sys, &ctx, "(a3,b3)", &v3);
    b0_rows(&mut sys, &ctx, "(p5,q5)", &q5);
    b0_rows(&mut sys, &ctx, "(p6,q6)", &q6);
    let ib3 = c(one.clone()) - v3.clone();
    let ia3 = c(one.clone()) - ctx.inv_p(&v3);
    if below {
        sys.row("embedding: 1/alpha5 >= 1/q5 - s/d", ia5.clone(), Relation::Ge, q5.clone() - sd.clone());
        sys.row("embedding: 1/q5 > s/d", q5.clone(), Relation::Gt, c(sd.clone()));
    } else {
        sys.row("embedding: 1/alpha5 > 0", ia5.clone(), Relation::Gt, zero());
    }
    sys.row("embedding: 1/alpha5 <= 1/q5", ia5.clone(), Relation::Le, q5.clone());
    sys.row(
        "weight local: 1/b3' - sigma/alpha5 - 1/q6 > b/d",
        ib3.clone() - ia5.scale(sigma) - q6.clone(),
        Relation::Gt,
        c(ctx.over_d(b)),
    );
    sys.row(
        "time: 1/a3' - sigma/p5 - 1/p6 > 0",
        ia3 - ctx.inv_p(&q5).scale(sigma) - ctx.inv_p(&q6),
        Relation::Gt,
        zero(),
    );

    let ctx_ref = &ctx;
    let pref = move |var: usize, fixed: &[Option<Rational>]| -> Option<Window> {
        let ctx = ctx_ref;
        let (d, s, b, sigma) = (&ctx.dr, &ctx.s, &ctx.b, &ctx.sigma);
        let one = Rational::one();
        let half = q(1, 2);
        let bd = ctx.over_d(b);
        let sd = ctx.over_d(s);
        let four_d = ctx.over_d(&Rational::int(4));
        let two_b_d = ctx.over_d(&(Rational::int(2) - b));
        let t = ctx.over_d(&((d - &(Rational::int(2) * s) - Rational::int(4)) * sigma)) * q(1, 2);
        match var {
            0 => {
                if below {
                    let hi = vec![&one - &bd, &one - &bd - &t, &half + &two_b_d, &half + &two_b_d - &t];
                    Some(open_window(vec![], hi))
                } else {
                    let lo = vec![Rational::zero(), Rational::frac(ctx.d as i64 - 2, 2 * ctx.d as i64)];
                    Some(open_window(lo, vec![&one - &bd, &half + &two_b_d]))
                }
            }
            1 => {
                let v3 = val(fixed, 0);
                let sigma1 = sigma + &one;
                let (lo, hi) = if below {
                    (
                        vec![sigma * &sd, sigma * &ctx.b0_floor(), &sigma1 * &half - &four_d - &v3],
                        vec![
                            sigma * &half,
                            &one - &v3 - &bd + sigma * &sd,
                            &half - &v3 - &bd + sigma * &sd + ctx.over_d(&Rational::int(2)),
                        ],
                    )
                } else {
                    (
                        vec![sigma * &half - ctx.over_d(&(Rational::int(4) - b)), &sigma1 * &half - &four_d - &v3],
                        vec![sigma * &half],
                    )
                };
                Some(open_window(lo.iter().map(|v| v.div(sigma)).collect(), hi.iter().map(|v| v.div(sigma)).collect()))
            }
            2 if !below => Some(ctx.plus_window(&Rational::zero())),
            3 => {
                let v3 = val(fixed, 0);
                let sq5 = sigma * &val(fixed, 1);
                let lo = vec![
                    Rational::zero(),
                    ctx.b0_floor(),
                    (sigma + &Rational::int(2)) * &half - &four_d - &sq5 - &v3,
                ];
                let mut top = &one - &v3 - &bd - &sq5;
                if below {
                    top = top + sigma * &sd;
                }
                Some(open_window(lo, vec![half.clone(), top]))
            }
            _ => None,
        }
    };

    let choices = if below {
        vec![Choice {
            label: "s<d/2: 1/alpha5 = 1/q5 - s/d".into(),
            rows: vec![("choice: 1/alpha5 = 1/q5 - s/d".into(), ia5.clone(), Relation::Eq, q5.clone() - sd.clone())],
            fixed: vec![],
            preferred: Box::new(pref),
        }]
    } else {
        vec![Choice { preferred: Box::new(pref), ..Choice::free("s>=d/2: 1/alpha5 = (0)+") }]
    };
    let (sys, sol, branch) = solve_with(&sys, &[0, 1, 2, 3], choices, &pref, "lebesgue_difference/local")?;

    let (v3v, q5v, ia5v, q6v) = (&sol[0], &sol[1], &sol[2], &sol[3]);
    let mut pairs = BTreeMap::new();
    pairs.insert("(a3,b3)".to_string(), space_pair(&ctx, v3v)?);
    pairs.insert("(p5,q5)".to_string(), space_pair(&ctx, q5v)?);
    pairs.insert("(p6,q6)".to_string(), space_pair(&ctx, q6v)?);
    let mut aux = BTreeMap::new();
    aux.insert("alpha5".to_string(), exponent(ia5v));
    aux.insert("gammahat1".to_string(), exponent(&(&one - v3v - &(sigma * ia5v) - q6v)));
    let theta = &one - &ctx.inv_p_val(v3v) - &(sigma * &ctx.inv_p_val(q5v)) - ctx.inv_p_val(q6v);
    Ok(SubCertificate {
        lemma: Lemma::LebesgueDifference,
        piece: Piece::Local,
        case,
        branch,
        pairs,
        aux,
        theta: SlackRational::exact(theta),
        constraints: evaluate(&sys, &sol),
    })
}

/// Closed forms `a4 = 8(σ+2)/(σ(d-2s))`, `b4 = d(σ+2)/(d+σs)` and `θ = 1 - σ(d-2s)/8`
/// for `s < d/2`, with no gate applied.
pub fn difference_exterior_closed_form(
    d: u32,
    s: &Rational,
    sigma: &Rational,
) -> Result<(ExponentPair, Rational), CertifyError> {
    let dr = Rational::int(d as i64);
    let two = Rational::int(2);
    let d2s = &dr - &(&two * s);
    let sigma2 = sigma + &two;
    let ia = (sigma * &d2s).checked_div(&(Rational::int(8) * &sigma2))?;
    let iq = (&dr + &(sigma * s)).checked_div(&(&dr * &sigma2))?;
    let theta = Rational::one() - (sigma * &d2s).div(&Rational::int(8));
    Ok((ExponentPair::from_recips(&ia, &iq)?, theta))
}

/// Weighted difference away from the origin in Lebesgue norms.
pub fn certify_difference_exterior(params: &ParamSet) -> Result<SubCertificate, CertifyError> {
    difference_gate(params)?;
    let ctx = Ctx::new(params);
    let (d, s, sigma) = (&ctx.dr, &ctx.s, &ctx.sigma);
    let one = Rational::one();
    let two = Rational::int(2);
    let half = q(1, 2);
    let sigma1 = sigma + &one;
    match ctx.case() {
        CaseTag::SLtHalfD => {
            let d2s = d - &(&two * s);
            let ex = |v: Rational| SlackRational::exact(v);
            let theta = &one - &(sigma * &d2s).div(&Rational::int(8));
            if !theta.is_positive() {
                return Err(CertifyError::Infeasible {
                    piece: "lebesgue_difference/exterior".into(),
                    reason: format!("theta = 1 - sigma(d-2s)/8 = {theta} is not positive"),
                });
            }
            let (pair, _) = difference_exterior_closed_form(ctx.d, s, sigma)?;
            let ia = pair.inv_p();
            let iq = pair.inv_q();
            let ib_dual = &one - &iq;
            let cons = vec![
                Constraint::new(
                    "identity: 1/b4' = sigma(1/q7 - s/d) + 1/q7",
                    ex(ib_dual.clone()),
                    Relation::Eq,
                    ex(sigma * &(&iq - &ctx.over_d(s)) + &iq),
                ),
                Constraint::new(
                    "identity: 1/a4' - (sigma+1)/p7 = 1 - sigma(d-2s)/8",
                    ex(&one - &ia - &(&sigma1 * &ia)),
                    Relation::Eq,
                    ex(theta.clone()),
                ),
                Constraint::new("theta: 1 - sigma(d-2s)/8 > 0", ex(theta.clone()), Relation::Gt, ex(Rational::zero())),
                Constraint::new(
                    "(a4,b4) in B: 4/a4 + d/b4 = d/2",
                    ex(Rational::int(4) * &ia + d * &iq),
                    Relation::Eq,
                    ex(ctx.hd.clone()),
                ),
                Constraint::new("(a4,b4) in B0: p > 2", ex(ia.clone()), Relation::Lt, ex(half.clone())),
                Constraint::new("embedding: 1/q7 - s/d > 0", ex(&iq - &ctx.over_d(s)), Relation::Gt, ex(Rational::zero())),
            ];
            let mut pairs = BTreeMap::new();
            pairs.insert("(a4,b4)".to_string(), pair.clone());
            pairs.insert("(p7,q7)".to_string(), pair);
            Ok(SubCertificate {
                lemma: Lemma::LebesgueDifference,
                piece: Piece::Exterior,
                case: CaseTag::SLtHalfD,
                branch: "s<d/2: a4 = p7 = 8(sigma+2)/(sigma(d-2s)), b4 = q7 = d(sigma+2)/(d+sigma s)".into(),
                pairs,
                aux: BTreeMap::new(),
                theta: SlackRational::exact(theta),
                constraints: cons,
            })
        }
        CaseTag::SGeHalfD => {
            let mut sys = LinSystem::new();
            let v4 = sys.add_var("1/b4");
            let ia6 = sys.add_var("1/alpha6");
            b0_rows(&mut sys, &ctx, "(a4,b4)", &v4);
            let ibd = c(one.clone()) - v4.clone();
            sys.row("dual exponent: 1/b4' > 1/2", ibd.clone(), Relation::Gt, c(half.clone()));
            sys.row("dual exponent: 1/b4' < (sigma+1)/2", ibd.clone(), Relation::Lt, c(&sigma1 * &half));
            sys.row("holder: 1/b4' = sigma/alpha6 + 1/2", ibd, Relation::Eq, ia6.scale(sigma) + half.clone());
            sys.row("exponent: alpha6 < inf", ia6.clone(), Relation::Gt, zero());
            sys.row("exponent: alpha6 > 2", ia6.clone(), Relation::Lt, c(half.clone()));
            let sol = sys.solve(&[0, 1], vec![], &|_, _| None).map_err(|reason| CertifyError::Infeasible {
                piece: "lebesgue_difference/exterior".into(),
                reason,
            })?;
            let (v4v, ia6v) = (&sol[0], &sol[1]);
            let mut pairs = BTreeMap::new();
            pairs.insert("(a4,b4)".to_string(), space_pair(&ctx, v4v)?);
            pairs.insert("(p7,q7)".to_string(), energy_pair());
            let mut aux = BTreeMap::new();
            aux.insert("alpha6".to_string(), exponent(ia6v));
            let theta = &one - &ctx.inv_p_val(v4v);
            Ok(SubCertificate {
                lemma: Lemma::LebesgueDifference,
                piece: Piece::Exterior,
                case: CaseTag::SGeHalfD,
                branch: "s>=d/2: 1/b4' in (1/2, (sigma+1)/2), (p7,q7) = (inf, 2)".into(),
                pairs,
                aux,
                theta: SlackRational::exact(theta),
                constraints: evaluate(&sys, &sol),
            })
        }
    }
}

/// All four estimates for one parameter set, with the common θ.
pub fn build_full_certificate(params: &ParamSet) -> Result<FullCertificate, CertifyError> {
    gate(params)?;
    let sub = vec![
        certify_sobolev_local(params)?,
        certify_sobolev_exterior(params)?,
        certify_difference_local(params)?,
        certify_difference_exterior(params)?,
    ];
    let theta = sub.iter().map(|s| s.theta.clone()).min().expect("four pieces");
    let regularity_checks = sub
        .iter()
        .flat_map(|s| s.constraints.iter())
        .filter(|c| c.label.starts_with("regularity"))
        .cloned()
        .collect();
    Ok(FullCertificate { params: params.clone(), sub, theta, regularity_checks })
}
