//! Exact coefficient ring: finite sums of rationals times products and
//! quotients of Γ values at rational points in (0, 1).
//!
//! Canonical form: every Γ argument is reduced into (0, 1] with
//! Γ(r + 1) = r·Γ(r), the rational factors are absorbed into the term
//! coefficient, Γ(1) is dropped, equal monomials are merged and zero terms
//! removed. Equality is syntactic on that form; no other identities between
//! Γ values (reflection, duplication) are applied.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::special_fn::{gamma_complete, GammaArg};

/// Small rational used for Γ arguments.
pub type Rat = Ratio<i64>;

/// A product Π Γ(r)^e with every r in (0, 1) and every e ≠ 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaMonomial(BTreeMap<Rat, i32>);

impl GammaMonomial {
    pub fn one() -> Self {
        GammaMonomial(BTreeMap::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Rat, &i32)> {
        self.0.iter()
    }

    fn mul(&self, other: &GammaMonomial) -> GammaMonomial {
        let mut out = self.0.clone();
        for (r, e) in &other.0 {
            let slot = out.entry(*r).or_insert(0);
            *slot += e;
            if *slot == 0 {
                out.remove(r);
            }
        }
        GammaMonomial(out)
    }

    fn inverse(&self) -> GammaMonomial {
        GammaMonomial(self.0.iter().map(|(r, e)| (*r, -e)).collect())
    }

    fn to_f64(&self) -> f64 {
        self.0
            .iter()
            .map(|(r, e)| {
                let g = gamma_complete(GammaArg::new(*r).expect("canonical arg is positive"))
                    .expect("canonical arg is positive");
                g.powi(*e)
            })
            .product()
    }
}

/// Element of the exact coefficient ring.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ExactConst {
    terms: BTreeMap<GammaMonomial, BigRational>,
}

fn big(r: &Rat) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl ExactConst {
    pub fn zero() -> Self {
        ExactConst { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::from_rational(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(GammaMonomial::one(), q);
        }
        ExactConst { terms }
    }

    /// Γ(r)^e for any positive rational r, reduced to canonical form.
    pub fn gamma_pow(r: Rat, e: i32) -> Self {
        assert!(r > Rat::zero(), "Γ argument must be positive");
        if e == 0 {
            return Self::one();
        }
        // r = f + n with f in (0, 1]; Γ(r) = Γ(f)·Π_{j<n} (f + j)
        let mut f = r;
        let mut factor = BigRational::one();
        while f > Rat::one() {
            f -= Rat::one();
            factor *= big(&f);
        }
        let coeff = if e > 0 {
            num_traits::pow(factor, e as usize)
        } else {
            num_traits::pow(factor.recip(), (-e) as usize)
        };
        let mono = if f == Rat::one() {
            GammaMonomial::one()
        } else {
            GammaMonomial(std::iter::once((f, e)).collect())
        };
        let mut terms = BTreeMap::new();
        terms.insert(mono, coeff);
        ExactConst { terms }
    }

    pub fn gamma(r: Rat) -> Self {
        Self::gamma_pow(r, 1)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GammaMonomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The rational value, if the element carries no Γ factors.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&GammaMonomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        ExactConst {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    /// Divide by a single-term element. Returns `None` when the divisor is
    /// zero or a genuine sum (the ring has no general inverse).
    pub fn div_monomial(&self, divisor: &ExactConst) -> Option<Self> {
        if divisor.terms.len() != 1 {
            return None;
        }
        let (m, c) = divisor.terms.iter().next().unwrap();
        let inv = ExactConst {
            terms: std::iter::once((m.inverse(), c.recip())).collect(),
        };
        Some(self * &inv)
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.to_f64().unwrap_or(f64::NAN) * m.to_f64())
            .sum()
    }

    fn add_term(&mut self, m: GammaMonomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                *slot += c;
                if slot.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }
}

impl From<i64> for ExactConst {
    fn from(n: i64) -> Self {
        ExactConst::from_int(n)
    }
}

impl From<BigRational> for ExactConst {
    fn from(q: BigRational) -> Self {
        ExactConst::from_rational(q)
    }
}

impl AddAssign<&ExactConst> for ExactConst {
    fn add_assign(&mut self, rhs: &ExactConst) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign for ExactConst {
    fn add_assign(&mut self, rhs: ExactConst) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl Add for &ExactConst {
    type Output = ExactConst;
    fn add(self, rhs: &ExactConst) -> ExactConst {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for ExactConst {
    type Output = ExactConst;
    fn add(mut self, rhs: ExactConst) -> ExactConst {
        self += rhs;
        self
    }
}

impl Neg for &ExactConst {
    type Output = ExactConst;
    fn neg(self) -> ExactConst {
        ExactConst {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for ExactConst {
    type Output = ExactConst;
    fn neg(self) -> ExactConst {
        -&self
    }
}

impl Sub for &ExactConst {
    type Output = ExactConst;
    fn sub(self, rhs: &ExactConst) -> ExactConst {
        self + &(-rhs)
    }
}

impl Sub for ExactConst {
    type Output = ExactConst;
    fn sub(self, rhs: ExactConst) -> ExactConst {
        &self - &rhs
    }
}

impl Mul for &ExactConst {
    type Output = ExactConst;
    fn mul(self, rhs: &ExactConst) -> ExactConst {
        let mut out = ExactConst::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for ExactConst {
    type Output = ExactConst;
    fn mul(self, rhs: ExactConst) -> ExactConst {
        &self * &rhs
    }
}

impl fmt::Display for ExactConst {
    /// Symbolic rendering, e.g. `-1/2*G(3/4)/G(1/4) + 3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", c)?;
            for (r, e) in m.factors() {
                let op = if *e > 0 { '*' } else { '/' };
                write!(f, "{}G({}/{})", op, r.numer(), r.denom())?;
                if e.abs() != 1 {
                    write!(f, "^{}", e.abs())?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse exact constant `{input}`: {reason}")]
pub struct ParseExactError {
    pub input: String,
    pub reason: String,
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

fn parse_term(term: &str) -> Result<ExactConst, String> {
    let split = [term.find("*G("), term.find("/G(")]
        .into_iter()
        .flatten()
        .min()
        .unwrap_or(term.len());
    let coeff = parse_rational(&term[..split]).ok_or("bad rational coefficient")?;
    let mut out = ExactConst::from_rational(coeff);
    let mut rest = &term[split..];
    while !rest.is_empty() {
        let op = rest.as_bytes()[0];
        let body = rest.get(1..).ok_or("truncated factor")?;
        let body = body.strip_prefix("G(").ok_or("expected `G(`")?;
        let close = body.find(')').ok_or("missing `)`")?;
        let arg = parse_rational(&body[..close]).ok_or("bad Γ argument")?;
        let arg = Rat::new(
            arg.numer().to_i64().ok_or("Γ argument too large")?,
            arg.denom().to_i64().ok_or("Γ argument too large")?,
        );
        if arg <= Rat::zero() {
            return Err("Γ argument must be positive".into());
        }
        let mut after = &body[close + 1..];
        let mut exp = 1i32;
        if let Some(stripped) = after.strip_prefix('^') {
            let end = stripped
                .find(|c: char| !c.is_ascii_digit())
                .unwrap_or(stripped.len());
            exp = stripped[..end].parse().map_err(|_| "bad exponent")?;
            after = &stripped[end..];
        }
        let e = match op {
            b'*' => exp,
            b'/' => -exp,
            _ => return Err("expected `*` or `/`".into()),
        };
        out = &out * &ExactConst::gamma_pow(arg, e);
        rest = after;
    }
    Ok(out)
}

impl FromStr for ExactConst {
    type Err = ParseExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: String| ParseExactError {
            input: s.to_string(),
            reason,
        };
        let mut out = ExactConst::zero();
        for term in s.split(" + ") {
            let term = term.trim();
            if term.is_empty() {
                return Err(err("empty term".into()));
            }
            out += parse_term(term).map_err(err)?;
        }
        Ok(out)
    }
}

/// Exact rational from a decimal literal such as `0.5`, `-3`, `1.25e-3`.
pub fn rational_from_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{}{}", int_part, frac_part).parse().ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Some(q)
}

/// Exact rational equal to the shortest decimal rendering of `x`.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    rational_from_decimal(&format!("{}", x))
}

pub fn rational_abs_max(c: &ExactConst) -> f64 {
    c.terms()
        .map(|(_, q)| q.abs().to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}
