//! Dense univariate polynomials over any [`Field`], coefficients stored low-to-high.

use crate::error::{Error, Result};
use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly<E> {
    coeffs: Vec<E>,
}

impl<E: Clone + Eq> Poly<E> {
    /// Builds a polynomial and trims trailing zeros.
    pub fn new<F: Field<Elem = E>>(field: &F, mut coeffs: Vec<E>) -> Self {
        while coeffs.last().is_some_and(|c| field.is_zero(c)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant<F: Field<Elem = E>>(field: &F, c: E) -> Self {
        Poly::new(field, vec![c])
    }

    pub fn one<F: Field<Elem = E>>(field: &F) -> Self {
        Poly::constant(field, field.one())
    }

    /// `c * X^k`.
    pub fn monomial<F: Field<Elem = E>>(field: &F, c: E, k: usize) -> Self {
        let mut v = vec![field.zero(); k + 1];
        v[k] = c;
        Poly::new(field, v)
    }

    /// `X`.
    pub fn x<F: Field<Elem = E>>(field: &F) -> Self {
        Poly::monomial(field, field.one(), 1)
    }

    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<E> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&E> {
        self.coeffs.last()
    }

    pub fn coeff<F: Field<Elem = E>>(&self, field: &F, i: usize) -> E {
        self.coeffs.get(i).cloned().unwrap_or_else(|| field.zero())
    }

    pub fn add<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let v = (0..n)
            .map(|i| field.add(&self.coeff(field, i), &other.coeff(field, i)))
            .collect();
        Poly::new(field, v)
    }

    pub fn neg<F: Field<Elem = E>>(&self, field: &F) -> Self {
        Poly {
            coeffs: self.coeffs.iter().map(|c| field.neg(c)).collect(),
        }
    }

    pub fn sub<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        self.add(field, &other.neg(field))
    }

    pub fn scale<F: Field<Elem = E>>(&self, field: &F, c: &E) -> Self {
        Poly::new(field, self.coeffs.iter().map(|a| field.mul(a, c)).collect())
    }

    pub fn mul<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if field.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                v[i + j] = field.add(&v[i + j], &field.mul(a, b));
            }
        }
        Poly::new(field, v)
    }

    pub fn pow<F: Field<Elem = E>>(&self, field: &F, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Poly::one(field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(field, &base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(field, &base);
            }
        }
        acc
    }

    /// Euclidean division; errors on a zero divisor.
    pub fn div_rem<F: Field<Elem = E>>(&self, field: &F, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = field.inv(divisor.leading().expect("nonzero"))?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut quot = vec![field.zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = field.mul(&rem[i], &lead_inv);
            if field.is_zero(&c) {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                let idx = i - dd + j;
                rem[idx] = field.sub(&rem[idx], &field.mul(&c, d));
            }
            quot[i - dd] = c;
        }
        rem.truncate(dd);
        Ok((Poly::new(field, quot), Poly::new(field, rem)))
    }

    pub fn rem<F: Field<Elem = E>>(&self, field: &F, divisor: &Self) -> Result<Self> {
        Ok(self.div_rem(field, divisor)?.1)
    }

    /// Scales to leading coefficient one; the zero polynomial is returned unchanged.
    pub fn monic<F: Field<Elem = E>>(&self, field: &F) -> Self {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => {
                let inv = field.inv(l).expect("nonzero leading coefficient");
                self.scale(field, &inv)
            }
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(field, &b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic(field)
    }

    pub fn eval<F: Field<Elem = E>>(&self, field: &F, x: &E) -> E {
        self.coeffs
            .iter()
            .rev()
            .fold(field.zero(), |acc, c| field.add(&field.mul(&acc, x), c))
    }

    /// `f(X) -> f(X^k)`.
    pub fn inflate<F: Field<Elem = E>>(&self, field: &F, k: usize) -> Self {
        if self.is_zero() || k == 1 {
            return self.clone();
        }
        let mut v = vec![field.zero(); (self.coeffs.len() - 1) * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i * k] = c.clone();
        }
        Poly::new(field, v)
    }

    /// Human-readable form in the variable `var`, highest degree first.
    pub fn format<F: Field<Elem = E>>(&self, field: &F, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if field.is_zero(c) {
                continue;
            }
            let cs = field.format(c);
            let (negative, mag) = match cs.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, cs),
            };
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            let term = if mono.is_empty() {
                mag
            } else if mag == "1" {
                mono
            } else {
                format!("{mag}*{mono}")
            };
            match (out.is_empty(), negative) {
                (true, false) => {}
                (true, true) => out.push('-'),
                (false, false) => out.push_str(" + "),
                (false, true) => out.push_str(" - "),
            }
            out.push_str(&term);
        }
        out
    }
}

/// Parses sums of terms `c`, `c*v`, `c*v^k`, `v^k` in one variable.
/// Coefficients are integers or `a/b` rationals mapped into the field.
pub fn parse_poly<F: Field>(field: &F, text: &str, var: &str) -> Result<Poly<F::Elem>> {
    let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if cleaned.is_empty() {
        return Err(Error::parse("empty polynomial"));
    }
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut negative = false;
    for (i, ch) in cleaned.chars().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
            terms.push((negative, std::mem::take(&mut cur)));
            negative = ch == '-';
        } else if ch == '-' && i == 0 {
            negative = true;
        } else if ch == '+' && i == 0 {
        } else {
            cur.push(ch);
        }
    }
    terms.push((negative, cur));
    let mut acc = Poly::zero();
    for (neg, term) in terms {
        if term.is_empty() {
            return Err(Error::parse(format!("bad polynomial `{text}`")));
        }
        let (coef_str, mono) = match term.find(var) {
            None => (term.as_str(), None),
            Some(pos) => {
                let coef = term[..pos].trim_end_matches('*');
                (coef, Some(&term[pos + var.len()..]))
            }
        };
        let coef = if coef_str.is_empty() {
            field.one()
        } else {
            parse_coeff(field, coef_str)?
        };
        let exp = match mono {
            None => 0,
            Some("") => 1,
            Some(rest) => rest
                .strip_prefix('^')
                .and_then(|e| e.parse::<usize>().ok())
                .ok_or_else(|| Error::parse(format!("bad monomial `{term}`")))?,
        };
        let coef = if neg { field.neg(&coef) } else { coef };
        acc = acc.add(field, &Poly::monomial(field, coef, exp));
    }
    Ok(acc)
}

fn parse_coeff<F: Field>(field: &F, s: &str) -> Result<F::Elem> {
    let bad = || Error::parse(format!("bad coefficient `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.parse().map_err(|_| bad())?;
            let d: i64 = d.parse().map_err(|_| bad())?;
            field.div(&field.from_i64(n), &field.from_i64(d))
        }
        None => Ok(field.from_i64(s.parse().map_err(|_| bad())?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, PrimeField, Rationals};

    #[test]
    fn div_rem_reconstructs() {
        let f = PrimeField::new(5).unwrap();
        let a = parse_poly(&f, "x^5 + 3x^2 + 1", "x").unwrap();
        let b = parse_poly(&f, "2x^2 + x + 4", "x").unwrap();
        let (q, r) = a.div_rem(&f, &b).unwrap();
        assert_eq!(q.mul(&f, &b).add(&f, &r), a);
        assert!(r.degree().unwrap() < 2);
    }

    #[test]
    fn gcd_over_rationals() {
        let q = Rationals;
        let a = parse_poly(&q, "x^2 - 1", "x").unwrap();
        let b = parse_poly(&q, "x^2 + 2x + 1", "x").unwrap();
        assert_eq!(a.gcd(&q, &b), parse_poly(&q, "x + 1", "x").unwrap());
    }

    #[test]
    fn parse_and_format_round_trip() {
        let q = Rationals;
        let p = parse_poly(&q, "-1/2*t^3 + t - 4", "t").unwrap();
        assert_eq!(p.coeffs(), &[rat(-4, 1), rat(1, 1), rat(0, 1), rat(-1, 2)]);
        assert_eq!(parse_poly(&q, &p.format(&q, "t"), "t").unwrap(), p);
        assert!(parse_poly(&q, "t^", "t").is_err());
    }

    #[test]
    fn frobenius_freshmans_dream() {
        let f = PrimeField::new(3).unwrap();
        let p = parse_poly(&f, "t^2 + 2t + 1", "t").unwrap();
        assert_eq!(p.pow(&f, 3), p.inflate(&f, 3));
    }
}
