//! Parameters, exact linear terms, inequalities and conjunctive constraints.
//!
//! Every constant is an exact [`Rational`]. A [`LinearTerm`] is an affine
//! expression `Σ αᵢ·pᵢ + d`; an [`Inequality`] compares two terms with `<` or
//! `≤`; a [`Constraint`] is a conjunction of normalized inequalities, the
//! empty conjunction meaning `True`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms.
pub type Rational = num_rational::BigRational;

/// Builds `num/den` as an exact rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParamError {
    #[error("parameter {0} is not assigned")]
    MissingParameter(ParamId),
    #[error("duplicate parameter name `{0}`")]
    DuplicateParameter(String),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("constraint is unsatisfiable: an inequality reduces to a false constant")]
    Contradiction,
}

/// Ordinal index of a parameter inside its [`ParamSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamId(pub usize);

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A parameter together with its declared name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub id: ParamId,
    pub name: String,
}

/// Ordered set of named parameters. The order fixes the canonical ordering
/// of coefficients in every printed term.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamSet {
    names: Vec<String>,
    index: HashMap<String, ParamId>,
}

impl ParamSet {
    pub fn new<I, S>(names: I) -> Result<Self, ParamError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = ParamSet::default();
        for name in names {
            let name = name.into();
            if set.index.contains_key(&name) {
                return Err(ParamError::DuplicateParameter(name));
            }
            set.push(name);
        }
        Ok(set)
    }

    fn push(&mut self, name: String) -> ParamId {
        let id = ParamId(self.names.len());
        self.index.insert(name.clone(), id);
        self.names.push(name);
        id
    }

    /// Returns the id of `name`, declaring it at the end if it is new.
    pub fn intern(&mut self, name: &str) -> ParamId {
        match self.index.get(name) {
            Some(&id) => id,
            None => self.push(name.to_string()),
        }
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.names.len()).map(ParamId)
    }

    pub fn parameters(&self) -> impl Iterator<Item = Parameter> + '_ {
        self.names.iter().enumerate().map(|(i, n)| Parameter {
            id: ParamId(i),
            name: n.clone(),
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Assignment of rational values to (some of) the parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instantiation {
    values: BTreeMap<ParamId, Rational>,
}

impl Instantiation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (ParamId, Rational)>>(pairs: I) -> Self {
        Instantiation {
            values: pairs.into_iter().collect(),
        }
    }

    /// Binds parameters `0..values.len()` in order.
    pub fn from_values<I: IntoIterator<Item = Rational>>(values: I) -> Self {
        Self::from_pairs(values.into_iter().enumerate().map(|(i, v)| (ParamId(i), v)))
    }

    pub fn set(&mut self, p: ParamId, value: Rational) {
        self.values.insert(p, value);
    }

    pub fn with(mut self, p: ParamId, value: Rational) -> Self {
        self.set(p, value);
        self
    }

    pub fn get(&self, p: ParamId) -> Option<&Rational> {
        self.values.get(&p)
    }

    pub fn remove(&mut self, p: ParamId) -> Option<Rational> {
        self.values.remove(&p)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Rational)> {
        self.values.iter().map(|(&p, v)| (p, v))
    }

    /// True iff every parameter of `params` is bound.
    pub fn is_total_over(&self, params: &ParamSet) -> bool {
        params.ids().all(|p| self.values.contains_key(&p))
    }
}

/// Exact affine expression `Σ αᵢ·pᵢ + d`. Zero coefficients are never stored,
/// so structural equality is semantic equality.
///
/// The derived ordering compares coefficients by parameter index first, then
/// the constant; it is the canonical order of constraints.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearTerm {
    coeffs: BTreeMap<ParamId, Rational>,
    constant: Rational,
}

impl LinearTerm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: Rational) -> Self {
        LinearTerm {
            coeffs: BTreeMap::new(),
            constant: value,
        }
    }

    pub fn param(p: ParamId) -> Self {
        Self::monomial(Rational::one(), p)
    }

    pub fn monomial(coeff: Rational, p: ParamId) -> Self {
        let mut t = Self::zero();
        t.add_coeff(p, coeff);
        t
    }

    pub fn from_parts<I: IntoIterator<Item = (ParamId, Rational)>>(coeffs: I, constant: Rational) -> Self {
        let mut t = Self::constant(constant);
        for (p, c) in coeffs {
            t.add_coeff(p, c);
        }
        t
    }

    fn add_coeff(&mut self, p: ParamId, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(p).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&p);
        }
    }

    pub fn coeff(&self, p: ParamId) -> Rational {
        self.coeffs.get(&p).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (ParamId, &Rational)> {
        self.coeffs.iter().map(|(&p, c)| (p, c))
    }

    pub fn constant_part(&self) -> &Rational {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_zero()
    }

    /// The value if no parameter occurs.
    pub fn as_constant(&self) -> Option<&Rational> {
        self.is_constant().then_some(&self.constant)
    }

    pub fn params(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(&p, c)| (p, c * factor)).collect(),
            constant: &self.constant * factor,
        }
    }

    /// Exact value at `pi`; every occurring parameter must be bound.
    pub fn evaluate(&self, pi: &Instantiation) -> Result<Rational, ParamError> {
        let mut acc = self.constant.clone();
        for (&p, c) in &self.coeffs {
            let v = pi.get(p).ok_or(ParamError::MissingParameter(p))?;
            acc += c * v;
        }
        Ok(acc)
    }

    /// Replaces the bound parameters by their values and keeps the others.
    pub fn substitute(&self, pi: &Instantiation) -> Self {
        let mut out = Self::constant(self.constant.clone());
        for (&p, c) in &self.coeffs {
            match pi.get(p) {
                Some(v) => out.constant += c * v,
                None => out.add_coeff(p, c.clone()),
            }
        }
        out
    }

    /// Renders with the names of `params`, e.g. `5/4*p1 + p3` or `-1*w43 + 6`.
    pub fn display<'a>(&'a self, params: &'a ParamSet) -> TermDisplay<'a> {
        TermDisplay { term: self, params }
    }
}

impl Add for &LinearTerm {
    type Output = LinearTerm;
    fn add(self, rhs: &LinearTerm) -> LinearTerm {
        let mut out = self.clone();
        for (&p, c) in &rhs.coeffs {
            out.add_coeff(p, c.clone());
        }
        out.constant += &rhs.constant;
        out
    }
}

impl Add for LinearTerm {
    type Output = LinearTerm;
    fn add(self, rhs: LinearTerm) -> LinearTerm {
        &self + &rhs
    }
}

impl Neg for &LinearTerm {
    type Output = LinearTerm;
    fn neg(self) -> LinearTerm {
        LinearTerm {
            coeffs: self.coeffs.iter().map(|(&p, c)| (p, -c)).collect(),
            constant: -&self.constant,
        }
    }
}

impl Neg for LinearTerm {
    type Output = LinearTerm;
    fn neg(self) -> LinearTerm {
        -&self
    }
}

impl Sub for &LinearTerm {
    type Output = LinearTerm;
    fn sub(self, rhs: &LinearTerm) -> LinearTerm {
        self + &(-rhs)
    }
}

impl Sub for LinearTerm {
    type Output = LinearTerm;
    fn sub(self, rhs: LinearTerm) -> LinearTerm {
        &self - &rhs
    }
}

impl Mul<&Rational> for &LinearTerm {
    type Output = LinearTerm;
    fn mul(self, rhs: &Rational) -> LinearTerm {
        self.scale(rhs)
    }
}

pub struct TermDisplay<'a> {
    term: &'a LinearTerm,
    params: &'a ParamSet,
}

fn write_coeff_name(f: &mut fmt::Formatter<'_>, magnitude: &Rational, name: &str) -> fmt::Result {
    if magnitude.is_one() {
        write!(f, "{name}")
    } else {
        write!(f, "{magnitude}*{name}")
    }
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&p, c) in &self.term.coeffs {
            let name = self.params.name(p);
            if first {
                // a leading negative sign belongs to the rational literal
                if c.is_negative() {
                    write!(f, "{c}*{name}")?;
                } else {
                    write_coeff_name(f, c, name)?;
                }
                first = false;
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
                write_coeff_name(f, &c.abs(), name)?;
            }
        }
        let d = &self.term.constant;
        if first {
            write!(f, "{d}")
        } else if d.is_zero() {
            Ok(())
        } else if d.is_negative() {
            write!(f, " - {}", d.abs())
        } else {
            write!(f, " + {d}")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Lt,
    Le,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
        }
    }

    fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
        }
    }
}

/// `lhs rel rhs`. Once normalized, `rhs` is zero and `lhs` has coprime
/// integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Inequality {
    pub lhs: LinearTerm,
    pub rel: Relation,
    pub rhs: LinearTerm,
}

/// Outcome of [`Inequality::normalize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Inequality(Inequality),
    Tautology,
    Contradiction,
}

impl Inequality {
    pub fn new(lhs: LinearTerm, rel: Relation, rhs: LinearTerm) -> Self {
        Inequality { lhs, rel, rhs }
    }

    /// `a ≤ b`
    pub fn le(a: LinearTerm, b: LinearTerm) -> Self {
        Self::new(a, Relation::Le, b)
    }

    /// `a < b`
    pub fn lt(a: LinearTerm, b: LinearTerm) -> Self {
        Self::new(a, Relation::Lt, b)
    }

    /// `a ≥ b`, stored as `b ≤ a`.
    pub fn ge(a: LinearTerm, b: LinearTerm) -> Self {
        Self::le(b, a)
    }

    /// `a > b`, stored as `b < a`.
    pub fn gt(a: LinearTerm, b: LinearTerm) -> Self {
        Self::lt(b, a)
    }

    /// `lhs - rhs`, the term compared against zero.
    pub fn difference(&self) -> LinearTerm {
        &self.lhs - &self.rhs
    }

    pub fn holds_at(&self, pi: &Instantiation) -> Result<bool, ParamError> {
        let l = self.lhs.evaluate(pi)?;
        let r = self.rhs.evaluate(pi)?;
        Ok(self.rel.holds(&l, &r))
    }

    pub fn substitute(&self, pi: &Instantiation) -> Self {
        Inequality::new(self.lhs.substitute(pi), self.rel, self.rhs.substitute(pi))
    }

    pub fn params(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.lhs.params().chain(self.rhs.params())
    }

    /// Canonical form `t rel 0` with coprime integer coefficients (constant
    /// included). Only positive scalings are applied, so the sign of every
    /// coefficient is preserved.
    pub fn normalize(&self) -> Normalized {
        let diff = self.difference();
        if let Some(c) = diff.as_constant() {
            let zero = Rational::zero();
            return if self.rel.holds(c, &zero) {
                Normalized::Tautology
            } else {
                Normalized::Contradiction
            };
        }
        let lcm = diff
            .coeffs
            .values()
            .chain(std::iter::once(&diff.constant))
            .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
        let scaled = diff.scale(&Rational::from_integer(lcm));
        let gcd = scaled
            .coeffs
            .values()
            .chain(std::iter::once(&scaled.constant))
            .fold(BigInt::zero(), |acc, r| acc.gcd(r.numer()));
        let term = scaled.scale(&Rational::new(BigInt::one(), gcd));
        Normalized::Inequality(Inequality::new(term, self.rel, LinearTerm::zero()))
    }

    pub fn display<'a>(&'a self, params: &'a ParamSet) -> InequalityDisplay<'a> {
        InequalityDisplay { ineq: self, params }
    }
}

pub struct InequalityDisplay<'a> {
    ineq: &'a Inequality,
    params: &'a ParamSet,
}

impl fmt::Display for InequalityDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.ineq.lhs.display(self.params),
            self.ineq.rel.symbol(),
            self.ineq.rhs.display(self.params)
        )
    }
}

/// Conjunction of normalized inequalities, kept sorted and free of
/// tautologies and duplicates. The empty conjunction is `True`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Constraint {
    inequalities: Vec<Inequality>,
}

/// Splits a normalized `t rel 0` into its primitive coefficient direction and
/// the threshold `constant / g`, where `g` is the gcd of the coefficients.
fn direction_and_threshold(ineq: &Inequality) -> (Vec<(ParamId, BigInt)>, Rational) {
    let g = ineq
        .lhs
        .coeffs
        .values()
        .fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()));
    let dir = ineq.lhs.coeffs.iter().map(|(&p, c)| (p, c.numer() / &g)).collect();
    let threshold = ineq.lhs.constant.clone() / Rational::from_integer(g);
    (dir, threshold)
}

impl Constraint {
    /// `True`.
    pub fn truth() -> Self {
        Self::default()
    }

    pub fn is_true(&self) -> bool {
        self.inequalities.is_empty()
    }

    pub fn len(&self) -> usize {
        self.inequalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inequalities.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Inequality> {
        self.inequalities.iter()
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }

    pub fn satisfies(&self, pi: &Instantiation) -> Result<bool, ParamError> {
        for ineq in &self.inequalities {
            if !ineq.holds_at(pi)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Replaces the parameters bound in `pi` and re-simplifies.
    pub fn partial_instantiate(&self, pi: &Instantiation) -> Result<Constraint, ParamError> {
        simplify(self.inequalities.iter().map(|i| i.substitute(pi)))
    }

    pub fn conjoin(&self, other: &Constraint) -> Result<Constraint, ParamError> {
        simplify(self.iter().chain(other.iter()).cloned())
    }

    pub fn params(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.inequalities.iter().flat_map(|i| i.params())
    }
}

impl<'a> IntoIterator for &'a Constraint {
    type Item = &'a Inequality;
    type IntoIter = std::slice::Iter<'a, Inequality>;
    fn into_iter(self) -> Self::IntoIter {
        self.inequalities.iter()
    }
}

/// Normalizes every inequality, drops tautologies and merges duplicates.
///
/// Inequalities whose coefficient vectors are positive multiples of each
/// other bound the same linear form; only the tightest one is kept. This is
/// what collapses a family of single-parameter bounds into one bound.
pub fn simplify<I: IntoIterator<Item = Inequality>>(inequalities: I) -> Result<Constraint, ParamError> {
    let mut tightest: BTreeMap<Vec<(ParamId, BigInt)>, (Rational, Inequality)> = BTreeMap::new();
    for ineq in inequalities {
        let normal = match ineq.normalize() {
            Normalized::Tautology => continue,
            Normalized::Contradiction => return Err(ParamError::Contradiction),
            Normalized::Inequality(n) => n,
        };
        let (dir, threshold) = direction_and_threshold(&normal);
        match tightest.get(&dir) {
            // t + c ≤ 0: a larger c is tighter; at equal c, strict wins.
            Some((kept, kept_ineq))
                if kept > &threshold
                    || (kept == &threshold && (kept_ineq.rel == Relation::Lt || normal.rel == Relation::Le)) => {}
            _ => {
                tightest.insert(dir, (threshold, normal));
            }
        }
    }
    let mut inequalities: Vec<Inequality> = tightest.into_values().map(|(_, i)| i).collect();
    inequalities.sort();
    Ok(Constraint { inequalities })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: usize) -> LinearTerm {
        LinearTerm::param(ParamId(i))
    }

    fn c(n: i64, d: i64) -> LinearTerm {
        LinearTerm::constant(rat(n, d))
    }

    fn three() -> ParamSet {
        ParamSet::new(["p1", "p2", "p3"]).unwrap()
    }

    #[test]
    fn self_cancellation() {
        let t = &p(0).scale(&rat(5, 4)) + &p(2);
        assert!((&t - &t).is_zero());
    }

    #[test]
    fn scaling_is_coefficient_wise() {
        let t = &p(0) + &p(2).scale(&rat(4, 5));
        let s = t.scale(&rat(5, 4));
        assert_eq!(s, &p(0).scale(&rat(5, 4)) + &p(2));
        assert!(t.scale(&int(0)).is_zero());
    }

    #[test]
    fn half_sums_cancel() {
        let s = &p(6) + &p(8);
        let half = rat(1, 2);
        let t = &(&s - &s.scale(&half)) - &s.scale(&half);
        assert!(t.is_zero());
        assert_eq!(Inequality::le(t, LinearTerm::zero()).normalize(), Normalized::Tautology);
    }

    #[test]
    fn evaluate_reference_value() {
        let t = &p(0).scale(&rat(5, 4)) + &p(2);
        let pi = Instantiation::from_values([int(7), int(11), int(1)]);
        assert_eq!(t.evaluate(&pi).unwrap(), rat(39, 4));
        assert_eq!(c(3, 7).evaluate(&Instantiation::new()).unwrap(), rat(3, 7));
    }

    #[test]
    fn evaluate_missing_parameter() {
        let pi = Instantiation::from_values([int(7)]);
        assert_eq!(p(2).evaluate(&pi), Err(ParamError::MissingParameter(ParamId(2))));
    }

    #[test]
    fn normalize_ge_form() {
        // p2 ≥ 5/4 p1 + p3
        let iq = Inequality::ge(p(1), &p(0).scale(&rat(5, 4)) + &p(2));
        let Normalized::Inequality(n) = iq.normalize() else {
            panic!()
        };
        assert_eq!(n.display(&three()).to_string(), "5*p1 - 4*p2 + 4*p3 <= 0");
    }

    #[test]
    fn normalize_constants() {
        assert_eq!(Inequality::le(p(0), p(0)).normalize(), Normalized::Tautology);
        assert_eq!(Inequality::lt(p(0), p(0)).normalize(), Normalized::Contradiction);
        assert_eq!(Inequality::lt(c(0, 1), c(1, 2)).normalize(), Normalized::Tautology);
        assert_eq!(Inequality::le(c(0, 1), c(0, 1)).normalize(), Normalized::Tautology);
        assert_eq!(Inequality::le(c(1, 1), c(0, 1)).normalize(), Normalized::Contradiction);
    }

    #[test]
    fn normalize_keeps_sign_and_reduces_gcd() {
        let iq = Inequality::le(&p(0).scale(&rat(-2, 3)) + &c(4, 3), LinearTerm::zero());
        let Normalized::Inequality(n) = iq.normalize() else {
            panic!()
        };
        assert_eq!(n.lhs, &p(0).scale(&int(-1)) + &c(2, 1));
    }

    #[test]
    fn satisfies_examples() {
        let k = simplify([Inequality::ge(p(1), &p(0).scale(&rat(5, 4)) + &p(2))]).unwrap();
        let pi = Instantiation::from_values([int(7), int(11), int(1)]);
        assert!(k.satisfies(&pi).unwrap());
        assert!(Constraint::truth().satisfies(&Instantiation::new()).unwrap());
        let k = simplify([Inequality::le(p(2), c(9, 4))]).unwrap();
        let pi = Instantiation::new().with(ParamId(2), int(3));
        assert!(!k.satisfies(&pi).unwrap());
    }

    #[test]
    fn partial_instantiation_reference() {
        let k = simplify([Inequality::ge(p(1), &p(0).scale(&rat(5, 4)) + &p(2))]).unwrap();
        let pi = Instantiation::new().with(ParamId(0), int(7)).with(ParamId(1), int(11));
        let r = k.partial_instantiate(&pi).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.inequalities()[0].display(&three()).to_string(), "4*p3 - 9 <= 0");
        assert_eq!(k.partial_instantiate(&Instantiation::new()).unwrap(), k);
    }

    #[test]
    fn partial_instantiation_contradiction() {
        let k = simplify([Inequality::le(p(0), c(1, 1))]).unwrap();
        let pi = Instantiation::new().with(ParamId(0), int(2));
        assert_eq!(k.partial_instantiate(&pi), Err(ParamError::Contradiction));
    }

    #[test]
    fn simplify_dedups_and_is_idempotent() {
        let iqs = vec![
            Inequality::le(p(0), p(1)),
            Inequality::le(p(0).scale(&int(2)), p(1).scale(&int(2))),
            Inequality::le(p(2), p(2)),
        ];
        let k = simplify(iqs).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k.conjoin(&k).unwrap(), k);
        assert!(simplify([]).unwrap().is_true());
    }

    #[test]
    fn simplify_keeps_tightest_parallel_bound() {
        // w ≥ -1, w ≥ 6, 3w ≥ 11
        let w = p(0);
        let k = simplify([
            Inequality::ge(w.clone(), c(-1, 1)),
            Inequality::ge(w.clone(), c(6, 1)),
            Inequality::ge(w.scale(&int(3)), c(11, 1)),
        ])
        .unwrap();
        let params = ParamSet::new(["w43"]).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k.inequalities()[0].display(&params).to_string(), "-1*w43 + 6 <= 0");
    }

    #[test]
    fn strict_beats_non_strict_at_equal_bound() {
        let k = simplify([Inequality::le(p(0), c(1, 1)), Inequality::lt(p(0), c(1, 1))]).unwrap();
        assert_eq!(k.inequalities()[0].rel, Relation::Lt);
        let k = simplify([Inequality::lt(p(0), c(1, 1)), Inequality::le(p(0), c(1, 1))]).unwrap();
        assert_eq!(k.inequalities()[0].rel, Relation::Lt);
    }

    #[test]
    fn term_rendering() {
        let ps = three();
        assert_eq!(
            (&p(0).scale(&rat(5, 4)) + &p(2)).display(&ps).to_string(),
            "5/4*p1 + p3"
        );
        assert_eq!(c(11, 1).display(&ps).to_string(), "11");
        assert_eq!(LinearTerm::zero().display(&ps).to_string(), "0");
        assert_eq!(p(1).scale(&rat(-1, 2)).display(&ps).to_string(), "-1/2*p2");
        assert_eq!((&p(0) - &p(1)).display(&ps).to_string(), "p1 - p2");
    }

    #[test]
    fn duplicate_parameter_names_rejected() {
        assert_eq!(
            ParamSet::new(["a", "a"]),
            Err(ParamError::DuplicateParameter("a".into()))
        );
    }
}
