//! Polynomial parameter expressions with rational coefficients.
//!
//! Entries of structure matrices and the `[X, X]` constants are affine in the
//! classification parameters; transformation bookkeeping multiplies at most two
//! such quantities, so products are capped at total degree [`MAX_DEGREE`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::scalar::{int, Scalar};

pub const MAX_DEGREE: u32 = 2;

/// Product of named variables with positive exponents, sorted by name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(name: &str) -> Self {
        Self(vec![(name.to_string(), 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(String, u32)] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<String, u32> = self.0.iter().cloned().collect();
        for (v, e) in &other.0 {
            *map.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(map.into_iter().collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ParamExpr {
    terms: BTreeMap<Monomial, Scalar>,
}

impl ParamExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Self { terms }
    }

    pub fn int(v: i64) -> Self {
        Self::constant(int(v))
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(name), Scalar::one());
        Self { terms }
    }

    pub fn term(m: Monomial, c: Scalar) -> Self {
        let mut out = Self::zero();
        out.add_term(m, c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// `Some(c)` when the expression has no variables.
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| v.clone())).collect()
    }

    /// Coefficient of a single variable in an affine expression.
    pub fn linear_coefficient(&self, name: &str) -> Scalar {
        self.terms.get(&Monomial::var(name)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(Scalar::zero)
    }

    fn add_term(&mut self, m: Monomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Scalar::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &ParamExpr) -> ParamExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &ParamExpr) -> ParamExpr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> ParamExpr {
        ParamExpr { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> ParamExpr {
        if s.is_zero() {
            return ParamExpr::zero();
        }
        ParamExpr { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn div_scalar(&self, s: &Scalar) -> ParamExpr {
        self.scale(&(Scalar::one() / s))
    }

    /// Product, rejected when the result would exceed [`MAX_DEGREE`].
    pub fn try_mul(&self, other: &ParamExpr) -> Result<ParamExpr> {
        if let Some(a) = self.as_constant() {
            return Ok(other.scale(&a));
        }
        if let Some(b) = other.as_constant() {
            return Ok(self.scale(&b));
        }
        let degree = self.degree() + other.degree();
        if degree > MAX_DEGREE {
            return Err(Error::DegreeBound { degree, bound: MAX_DEGREE });
        }
        let mut out = ParamExpr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    /// Substitutes the given values; unbound variables stay symbolic.
    pub fn bind(&self, values: &BTreeMap<String, Scalar>) -> ParamExpr {
        let mut out = ParamExpr::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (v, e) in &m.0 {
                match values.get(v) {
                    Some(x) => {
                        for _ in 0..*e {
                            coeff *= x;
                        }
                    }
                    None => rest.push((v.clone(), *e)),
                }
            }
            out.add_term(Monomial(rest), coeff);
        }
        out
    }

    pub fn eval(&self, values: &BTreeMap<String, Scalar>) -> Result<Scalar> {
        let bound = self.bind(values);
        match bound.as_constant() {
            Some(c) => Ok(c),
            None => Err(Error::UnboundParameter(
                bound.variables().into_iter().next().unwrap_or_default(),
            )),
        }
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> ParamExpr {
        let mut out = ParamExpr::zero();
        for (m, c) in &self.terms {
            let mut fm: BTreeMap<String, u32> = BTreeMap::new();
            for (v, e) in &m.0 {
                let name = map.get(v).cloned().unwrap_or_else(|| v.clone());
                *fm.entry(name).or_insert(0) += e;
            }
            out.add_term(Monomial(fm.into_iter().collect()), c.clone());
        }
        out
    }
}

impl From<Scalar> for ParamExpr {
    fn from(c: Scalar) -> Self {
        ParamExpr::constant(c)
    }
}

impl From<&Scalar> for ParamExpr {
    fn from(c: &Scalar) -> Self {
        ParamExpr::constant(c.clone())
    }
}

impl fmt::Display for ParamExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { "-" } else { "+" })?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for ParamExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        if e.degree() > MAX_DEGREE {
            return Err(Error::DegreeBound { degree: e.degree(), bound: MAX_DEGREE });
        }
        Ok(e)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::ExprParse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<ParamExpr> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ParamExpr> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if c == b'*' {
                // intermediate products are bounded by the final degree check
                mul_unbounded(&acc, &rhs)
            } else {
                let d = rhs.as_constant().ok_or_else(|| self.err("division by a non-constant"))?;
                if d.is_zero() {
                    return Err(self.err("division by zero"));
                }
                acc.div_scalar(&d)
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<ParamExpr> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ParamExpr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let e: u32 = digits.parse().map_err(|_| self.err("expected an integer exponent"))?;
            if e > MAX_DEGREE {
                return Err(Error::DegreeBound { degree: e, bound: MAX_DEGREE });
            }
            let mut out = ParamExpr::int(1);
            for _ in 0..e {
                out = mul_unbounded(&out, &base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ParamExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let v = num_bigint::BigInt::from_str(digits).map_err(|_| self.err("bad integer"))?;
                Ok(ParamExpr::constant(Scalar::from_integer(v)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Ok(ParamExpr::var(std::str::from_utf8(&self.src[start..self.pos]).unwrap()))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn mul_unbounded(a: &ParamExpr, b: &ParamExpr) -> ParamExpr {
    let mut out = ParamExpr::zero();
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            out.add_term(ma.mul(mb), ca * cb);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn p(s: &str) -> ParamExpr {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_canonical_display() {
        assert_eq!(p("2*(1+a)").to_string(), "2 + 2*a");
        assert_eq!(p("a + b - a").to_string(), "b");
        assert_eq!(p("-1 + a").to_string(), "-1 + a");
        assert_eq!(p("1/2*a*b").to_string(), "1/2*a*b");
        assert_eq!(p("-(a)").to_string(), "-a");
        assert_eq!(p("a^2 - 3").to_string(), "-3 + a^2");
        assert_eq!(p("0").to_string(), "0");
        assert_eq!(p(" 3 / 6 ").as_constant(), Some(ratio(1, 2)));
    }

    #[test]
    fn parse_errors_carry_position() {
        match "1 + * a".parse::<ParamExpr>() {
            Err(Error::ExprParse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!("a/b".parse::<ParamExpr>().is_err());
        assert!("(a".parse::<ParamExpr>().is_err());
        assert!(matches!("a*b*c".parse::<ParamExpr>(), Err(Error::DegreeBound { .. })));
    }

    #[test]
    fn degree_bound_on_products() {
        let a = p("a + 1");
        let ab = a.try_mul(&p("b")).unwrap();
        assert_eq!(ab.degree(), 2);
        assert!(matches!(ab.try_mul(&p("c")), Err(Error::DegreeBound { degree: 3, .. })));
        assert_eq!(ab.try_mul(&p("3")).unwrap(), ab.scale(&int(3)));
    }

    #[test]
    fn bind_and_eval() {
        let e = p("1 + a + a*b");
        let mut v = BTreeMap::new();
        v.insert("a".to_string(), int(2));
        assert_eq!(e.bind(&v).to_string(), "3 + 2*b");
        assert!(matches!(e.eval(&v), Err(Error::UnboundParameter(ref n)) if n == "b"));
        v.insert("b".to_string(), ratio(1, 2));
        assert_eq!(e.eval(&v).unwrap(), int(4));
    }
}
