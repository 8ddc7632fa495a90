//! Exact linear systems over reciprocal exponents, solved by Fourier–Motzkin
//! elimination with strict and non-strict rows.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::exact::{Bound, Rational, SlackRational, Window};

use super::model::Relation;

/// Sparse affine form `Σ cᵢ xᵢ + c₀`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub coeffs: BTreeMap<usize, Rational>,
    pub constant: Rational,
}

impl LinExpr {
    pub fn constant(c: Rational) -> Self {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(i: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(i, Rational::one());
        LinExpr { coeffs, constant: Rational::zero() }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return LinExpr::default();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(&i, c)| (i, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    fn cleaned(mut self) -> Self {
        self.coeffs.retain(|_, c| !c.is_zero());
        self
    }

    pub fn eval(&self, values: &[Rational]) -> Rational {
        self.coeffs.iter().fold(self.constant.clone(), |acc, (&i, c)| acc + c * &values[i])
    }

    /// Replace fixed variables by their values.
    pub fn substitute(&self, fixed: &[Option<Rational>]) -> Self {
        let mut out = LinExpr::constant(self.constant.clone());
        for (&i, c) in &self.coeffs {
            match fixed.get(i).and_then(|v| v.as_ref()) {
                Some(v) => out.constant = &out.constant + &(c * v),
                None => {
                    out.coeffs.insert(i, c.clone());
                }
            }
        }
        out
    }
}

impl From<Rational> for LinExpr {
    fn from(c: Rational) -> Self {
        LinExpr::constant(c)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        for (i, c) in rhs.coeffs {
            let e = self.coeffs.entry(i).or_insert_with(Rational::zero);
            *e = &*e + &c;
        }
        self.constant = &self.constant + &rhs.constant;
        self.cleaned()
    }
}

impl Add<Rational> for LinExpr {
    type Output = LinExpr;
    fn add(self, rhs: Rational) -> LinExpr {
        self + LinExpr::constant(rhs)
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scale(&Rational::int(-1))
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        self + (-rhs)
    }
}

impl Sub<Rational> for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: Rational) -> LinExpr {
        self + LinExpr::constant(-rhs)
    }
}

impl Mul<&Rational> for LinExpr {
    type Output = LinExpr;
    fn mul(self, k: &Rational) -> LinExpr {
        self.scale(k)
    }
}

/// One labelled row `lhs rel rhs`.
#[derive(Clone, Debug)]
pub struct LinRow {
    pub label: String,
    pub lhs: LinExpr,
    pub rel: Relation,
    pub rhs: LinExpr,
}

/// `a·x + c > 0` when strict, `≥ 0` otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Ineq {
    a: BTreeMap<usize, Rational>,
    c: Rational,
    strict: bool,
}

impl Ineq {
    fn from_expr(e: LinExpr, strict: bool) -> Ineq {
        let e = e.cleaned();
        Ineq { a: e.coeffs, c: e.constant, strict }
    }

    /// Truth value of a row with no variables left.
    fn constant_holds(&self) -> bool {
        if self.strict {
            self.c.is_positive()
        } else {
            !self.c.is_negative()
        }
    }
}

/// Rows of `lhs rel rhs` as normalized inequalities.
fn to_ineqs(rows: &[LinRow], fixed: &[Option<Rational>]) -> Vec<Ineq> {
    let mut out = Vec::with_capacity(rows.len() * 2);
    for row in rows {
        let diff = (row.lhs.clone() - row.rhs.clone()).substitute(fixed);
        match row.rel {
            Relation::Gt => out.push(Ineq::from_expr(diff, true)),
            Relation::Ge => out.push(Ineq::from_expr(diff, false)),
            Relation::Lt => out.push(Ineq::from_expr(-diff, true)),
            Relation::Le => out.push(Ineq::from_expr(-diff, false)),
            Relation::Eq => {
                out.push(Ineq::from_expr(diff.clone(), false));
                out.push(Ineq::from_expr(-diff, false));
            }
        }
    }
    out
}

/// Drop constant rows (reporting infeasibility) and keep only the tightest
/// row among positive multiples of the same direction.
fn simplify(rows: Vec<Ineq>) -> Option<Vec<Ineq>> {
    let mut best: BTreeMap<Vec<(usize, Rational)>, Ineq> = BTreeMap::new();
    for row in rows {
        if row.a.is_empty() {
            if !row.constant_holds() {
                return None;
            }
            continue;
        }
        let lead = row.a.values().next().expect("nonempty").abs();
        let a: BTreeMap<usize, Rational> = row.a.iter().map(|(&i, c)| (i, c.div(&lead))).collect();
        let c = row.c.div(&lead);
        let key: Vec<(usize, Rational)> = a.iter().map(|(&i, v)| (i, v.clone())).collect();
        let norm = Ineq { a, c, strict: row.strict };
        match best.get(&key) {
            Some(cur) if cur.c < norm.c || (cur.c == norm.c && (cur.strict || !norm.strict)) => {}
            _ => {
                best.insert(key, norm);
            }
        }
    }
    Some(best.into_values().collect())
}

fn eliminate(rows: Vec<Ineq>, j: usize) -> Option<Vec<Ineq>> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut out = Vec::new();
    for r in rows {
        match r.a.get(&j) {
            Some(c) if c.is_positive() => pos.push(r),
            Some(_) => neg.push(r),
            None => out.push(r),
        }
    }
    for p in &pos {
        let pj = p.a[&j].clone();
        for n in &neg {
            let nj = n.a[&j].abs();
            let mut a: BTreeMap<usize, Rational> = BTreeMap::new();
            for (&i, c) in &p.a {
                a.insert(i, c * &nj);
            }
            for (&i, c) in &n.a {
                let e = a.entry(i).or_insert_with(Rational::zero);
                *e = &*e + &(c * &pj);
            }
            a.retain(|_, c| !c.is_zero());
            out.push(Ineq { a, c: &p.c * &nj + &n.c * &pj, strict: p.strict || n.strict });
        }
    }
    simplify(out)
}

/// A system of rows over named variables.
#[derive(Clone, Debug, Default)]
pub struct LinSystem {
    pub names: Vec<String>,
    pub rows: Vec<LinRow>,
}

impl LinSystem {
    pub fn new() -> Self {
        LinSystem::default()
    }

    pub fn add_var(&mut self, name: &str) -> LinExpr {
        self.names.push(name.to_string());
        LinExpr::var(self.names.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn row(&mut self, label: impl Into<String>, lhs: LinExpr, rel: Relation, rhs: LinExpr) {
        self.rows.push(LinRow { label: label.into(), lhs, rel, rhs });
    }

    /// Projection of the feasible set onto `var` once `fixed` values are
    /// substituted. `None` when the fixed values already make it infeasible.
    pub fn window(&self, var: usize, fixed: &[Option<Rational>]) -> Option<Window> {
        self.window_with(&self.rows, var, fixed)
    }

    fn window_with(&self, rows: &[LinRow], var: usize, fixed: &[Option<Rational>]) -> Option<Window> {
        let mut ineqs = simplify(to_ineqs(rows, fixed))?;
        for j in (0..self.len()).rev() {
            if j == var || fixed.get(j).is_some_and(|v| v.is_some()) {
                continue;
            }
            ineqs = eliminate(ineqs, j)?;
        }
        let mut w = Window::new();
        for r in ineqs {
            let Some(a) = r.a.get(&var) else { continue };
            let v = SlackRational::exact((-&r.c).div(a));
            let b = if r.strict { Bound::open(v) } else { Bound::closed(v) };
            if a.is_positive() {
                w.raise(b);
            } else {
                w.lower_to(b);
            }
        }
        Some(w)
    }

    pub fn feasible(&self, fixed: &[Option<Rational>]) -> bool {
        self.feasible_with(&self.rows, fixed)
    }

    fn feasible_with(&self, rows: &[LinRow], fixed: &[Option<Rational>]) -> bool {
        let Some(mut ineqs) = simplify(to_ineqs(rows, fixed)) else { return false };
        for j in (0..self.len()).rev() {
            if fixed.get(j).is_some_and(|v| v.is_some()) {
                continue;
            }
            match eliminate(ineqs, j) {
                Some(next) => ineqs = next,
                None => return false,
            }
        }
        true
    }

    /// Choose every variable in `order`, each inside its projected window.
    /// `preferred` may narrow a window given the values chosen so far; it is
    /// ignored when the intersection is empty.
    pub fn solve(
        &self,
        order: &[usize],
        mut fixed: Vec<Option<Rational>>,
        preferred: &dyn Fn(usize, &[Option<Rational>]) -> Option<Window>,
    ) -> Result<Vec<Rational>, String> {
        fixed.resize(self.len(), None);
        if !self.feasible(&fixed) {
            return Err("system is infeasible".into());
        }
        for &var in order {
            if fixed[var].is_some() {
                continue;
            }
            let w = self
                .window(var, &fixed)
                .ok_or_else(|| format!("no feasible value for {}", self.names[var]))?;
            let narrowed = preferred(var, &fixed).map(|p| w.intersect(&p)).filter(|n| !n.is_empty());
            let value = pick_rational(narrowed.as_ref().unwrap_or(&w))
                .ok_or_else(|| format!("empty window for {}", self.names[var]))?;
            fixed[var] = Some(value);
        }
        fixed
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| format!("{} was not assigned", self.names[i])))
            .collect()
    }
}

/// Rational member of a window (no infinitesimal part).
pub fn pick_rational(w: &Window) -> Option<Rational> {
    let v = w.pick().ok()?;
    if v.is_exact() && w.contains(&v) {
        Some(v.base)
    } else {
        None
    }
}
