//! Runtime-selected fields: a descriptor names one of the three supported
//! families and doubles as a [`Field`] over the tagged [`Value`] payload.

use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite::{FiniteField, FqElem};
use crate::ratfunc::{RatFunc, RationalFunctionField};
use crate::scalar::{format_rational, parse_rational, Field, Rationals};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FieldDescriptor {
    Rational,
    Finite(FiniteField),
    RationalFunction(RationalFunctionField),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Rational(BigRational),
    Finite(FqElem),
    RatFunc(RatFunc),
}

/// An element tagged with the field it lives in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    descriptor: FieldDescriptor,
    value: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Inv,
    Pow(i64),
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldDescriptor::Rational => write!(f, "Q"),
            FieldDescriptor::Finite(k) => write!(f, "F{}^{}", k.p(), k.degree()),
            FieldDescriptor::RationalFunction(k) => write!(f, "F{}(t)", k.p()),
        }
    }
}

impl FieldDescriptor {
    /// Parses `Q`, `F<p>^<n>`, `F<q>`, `GF(<q>)` or `F<p>(t)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "Q" {
            return Ok(FieldDescriptor::Rational);
        }
        let bad = || Error::parse(format!("bad field literal `{s}`"));
        if let Some(rest) = s.strip_prefix("GF(").and_then(|r| r.strip_suffix(')')) {
            let q: u64 = rest.parse().map_err(|_| bad())?;
            return Ok(FieldDescriptor::Finite(FiniteField::of_order(q)?));
        }
        let rest = s.strip_prefix('F').ok_or_else(bad)?;
        if let Some(p) = rest.strip_suffix("(t)") {
            let p: u64 = p.parse().map_err(|_| bad())?;
            return Ok(FieldDescriptor::RationalFunction(
                RationalFunctionField::new(p)?,
            ));
        }
        match rest.split_once('^') {
            Some((p, n)) => {
                let p: u64 = p.parse().map_err(|_| bad())?;
                let n: u32 = n.parse().map_err(|_| bad())?;
                Ok(FieldDescriptor::Finite(FiniteField::new(p, n)?))
            }
            None => {
                let q: u64 = rest.parse().map_err(|_| bad())?;
                Ok(FieldDescriptor::Finite(FiniteField::of_order(q)?))
            }
        }
    }

    pub fn finite(&self) -> Option<&FiniteField> {
        match self {
            FieldDescriptor::Finite(k) => Some(k),
            _ => None,
        }
    }

    pub fn rational_function(&self) -> Option<&RationalFunctionField> {
        match self {
            FieldDescriptor::RationalFunction(k) => Some(k),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, FieldDescriptor::Rational)
    }

    pub fn parse_value(&self, s: &str) -> Result<Value> {
        Ok(match self {
            FieldDescriptor::Rational => Value::Rational(parse_rational(s)?),
            FieldDescriptor::Finite(k) => Value::Finite(k.parse_elem(s)?),
            FieldDescriptor::RationalFunction(k) => Value::RatFunc(k.parse_elem(s)?),
        })
    }

    pub fn parse_elem(&self, s: &str) -> Result<FieldElement> {
        Ok(self.element(self.parse_value(s)?))
    }

    /// Wraps a payload; panics if the payload belongs to another family.
    pub fn element(&self, value: Value) -> FieldElement {
        assert!(
            self.owns(&value),
            "value {value:?} does not belong to {self}"
        );
        FieldElement {
            descriptor: self.clone(),
            value,
        }
    }

    fn owns(&self, v: &Value) -> bool {
        match (self, v) {
            (FieldDescriptor::Rational, Value::Rational(_)) => true,
            (FieldDescriptor::Finite(k), Value::Finite(x)) => x.0 < k.order(),
            (FieldDescriptor::RationalFunction(k), Value::RatFunc(f)) => {
                f.num().coeffs().iter().all(|&c| c < k.p())
            }
            _ => false,
        }
    }

    /// All `q` elements of a finite field in deterministic order, zero first.
    pub fn enumerate_finite(&self, cap: u64) -> Result<Vec<FieldElement>> {
        let k = self
            .finite()
            .ok_or_else(|| Error::Unsupported(format!("{self} is not finite")))?;
        Ok(k.enumerate(cap)?
            .map(|x| self.element(Value::Finite(x)))
            .collect())
    }

    /// Absolute trace to the prime field, as an element of this field.
    pub fn trace(&self, x: &FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        match (self, &x.value) {
            (FieldDescriptor::Finite(k), Value::Finite(a)) => {
                Ok(self.element(Value::Finite(k.from_prime(k.trace(*a)))))
            }
            _ => Err(Error::Unsupported(format!("trace on {self}"))),
        }
    }

    pub fn pth_root(&self, x: &FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        match (self, &x.value) {
            (FieldDescriptor::Finite(k), Value::Finite(a)) => {
                Ok(self.element(Value::Finite(k.pth_root(*a))))
            }
            (FieldDescriptor::RationalFunction(k), Value::RatFunc(f)) => {
                Ok(self.element(Value::RatFunc(k.pth_root(f)?)))
            }
            _ => Err(Error::Unsupported("p-th root in characteristic 0".into())),
        }
    }

    fn check(&self, x: &FieldElement) -> Result<()> {
        if &x.descriptor != self {
            return Err(Error::DescriptorMismatch(
                self.to_string(),
                x.descriptor.to_string(),
            ));
        }
        Ok(())
    }
}

impl FieldElement {
    pub fn descriptor(&self) -> &FieldDescriptor {
        &self.descriptor
    }

    pub fn value(&self) -> &Value {
        &self.value
    }

    pub fn into_value(self) -> Value {
        self.value
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.descriptor.format(&self.value))
    }
}

/// Exact arithmetic on tagged elements. Binary operations require a second
/// operand from the same field.
pub fn arith(op: ArithOp, x: &FieldElement, y: Option<&FieldElement>) -> Result<FieldElement> {
    let field = &x.descriptor;
    let other = |y: Option<&FieldElement>| -> Result<Value> {
        let y = y.ok_or_else(|| Error::parse(format!("{op:?} needs two operands")))?;
        field.check(y)?;
        Ok(y.value.clone())
    };
    let a = &x.value;
    let v = match op {
        ArithOp::Add => field.add(a, &other(y)?),
        ArithOp::Sub => field.sub(a, &other(y)?),
        ArithOp::Mul => field.mul(a, &other(y)?),
        ArithOp::Div => field.div(a, &other(y)?)?,
        ArithOp::Neg => field.neg(a),
        ArithOp::Inv => field.inv(a)?,
        ArithOp::Pow(k) => field.pow(a, k)?,
    };
    Ok(field.element(v))
}

macro_rules! dispatch2 {
    ($self:expr, $a:expr, $b:expr, |$k:ident, $x:ident, $y:ident| $body:expr, $wrap:ident) => {
        match ($self, $a, $b) {
            (FieldDescriptor::Rational, Value::Rational($x), Value::Rational($y)) => {
                let $k = &Rationals;
                Value::Rational($body)
            }
            (FieldDescriptor::Finite($k), Value::Finite($x), Value::Finite($y)) => {
                Value::Finite($body)
            }
            (FieldDescriptor::RationalFunction($k), Value::RatFunc($x), Value::RatFunc($y)) => {
                Value::RatFunc($body)
            }
            _ => panic!(
                "{}: payload does not match field {}",
                stringify!($wrap),
                $self
            ),
        }
    };
}

macro_rules! dispatch1 {
    ($self:expr, $a:expr, |$k:ident, $x:ident| $body:expr) => {
        match ($self, $a) {
            (FieldDescriptor::Rational, Value::Rational($x)) => {
                let $k = &Rationals;
                Value::Rational($body)
            }
            (FieldDescriptor::Finite($k), Value::Finite($x)) => Value::Finite($body),
            (FieldDescriptor::RationalFunction($k), Value::RatFunc($x)) => Value::RatFunc($body),
            _ => panic!("payload does not match field {}", $self),
        }
    };
}

impl Field for FieldDescriptor {
    type Elem = Value;

    fn zero(&self) -> Value {
        match self {
            FieldDescriptor::Rational => Value::Rational(Rationals.zero()),
            FieldDescriptor::Finite(k) => Value::Finite(k.zero()),
            FieldDescriptor::RationalFunction(k) => Value::RatFunc(k.zero()),
        }
    }
    fn one(&self) -> Value {
        match self {
            FieldDescriptor::Rational => Value::Rational(Rationals.one()),
            FieldDescriptor::Finite(k) => Value::Finite(k.one()),
            FieldDescriptor::RationalFunction(k) => Value::RatFunc(k.one()),
        }
    }
    fn add(&self, a: &Value, b: &Value) -> Value {
        dispatch2!(self, a, b, |k, x, y| k.add(x, y), add)
    }
    fn sub(&self, a: &Value, b: &Value) -> Value {
        dispatch2!(self, a, b, |k, x, y| k.sub(x, y), sub)
    }
    fn mul(&self, a: &Value, b: &Value) -> Value {
        dispatch2!(self, a, b, |k, x, y| k.mul(x, y), mul)
    }
    fn neg(&self, a: &Value) -> Value {
        dispatch1!(self, a, |k, x| k.neg(x))
    }
    fn inv(&self, a: &Value) -> Result<Value> {
        Ok(match (self, a) {
            (FieldDescriptor::Rational, Value::Rational(x)) => Value::Rational(Rationals.inv(x)?),
            (FieldDescriptor::Finite(k), Value::Finite(x)) => Value::Finite(k.inv(x)?),
            (FieldDescriptor::RationalFunction(k), Value::RatFunc(x)) => Value::RatFunc(k.inv(x)?),
            _ => {
                return Err(Error::DescriptorMismatch(
                    self.to_string(),
                    format!("{a:?}"),
                ))
            }
        })
    }
    fn characteristic(&self) -> u64 {
        match self {
            FieldDescriptor::Rational => 0,
            FieldDescriptor::Finite(k) => k.p(),
            FieldDescriptor::RationalFunction(k) => k.p(),
        }
    }
    fn from_i64(&self, n: i64) -> Value {
        match self {
            FieldDescriptor::Rational => Value::Rational(Rationals.from_i64(n)),
            FieldDescriptor::Finite(k) => Value::Finite(k.from_i64(n)),
            FieldDescriptor::RationalFunction(k) => Value::RatFunc(k.from_i64(n)),
        }
    }
    fn format(&self, a: &Value) -> String {
        match (self, a) {
            (_, Value::Rational(x)) => format_rational(x),
            (FieldDescriptor::Finite(k), Value::Finite(x)) => k.format(x),
            (FieldDescriptor::RationalFunction(k), Value::RatFunc(x)) => k.format(x),
            _ => format!("{a:?}"),
        }
    }
    fn is_zero(&self, a: &Value) -> bool {
        match a {
            Value::Rational(x) => Rationals.is_zero(x),
            Value::Finite(x) => x.0 == 0,
            Value::RatFunc(x) => x.num().is_zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_literals() {
        for lit in ["Q", "F2^4", "F3(t)"] {
            assert_eq!(FieldDescriptor::parse(lit).unwrap().to_string(), lit);
        }
        assert_eq!(FieldDescriptor::parse("GF(9)").unwrap().to_string(), "F3^2");
        assert_eq!(FieldDescriptor::parse("F7").unwrap().to_string(), "F7^1");
        assert!(FieldDescriptor::parse("F6").is_err());
        assert!(FieldDescriptor::parse("R").is_err());
    }

    #[test]
    fn arith_examples() {
        let q = FieldDescriptor::Rational;
        let two = q.parse_elem("2").unwrap();
        assert_eq!(
            arith(ArithOp::Inv, &two, None).unwrap(),
            q.parse_elem("1/2").unwrap()
        );
        let f3t = FieldDescriptor::parse("F3(t)").unwrap();
        let x = f3t.parse_elem("t+1").unwrap();
        assert_eq!(
            arith(ArithOp::Pow(-1), &x, None).unwrap(),
            f3t.parse_elem("1/(t+1)").unwrap()
        );
        let zero = q.parse_elem("0").unwrap();
        assert_eq!(
            arith(ArithOp::Div, &two, Some(&zero)),
            Err(Error::DivisionByZero)
        );
        assert!(matches!(
            arith(ArithOp::Add, &two, Some(&x)),
            Err(Error::DescriptorMismatch(_, _))
        ));
    }

    #[test]
    fn enumeration_and_trace() {
        let f2 = FieldDescriptor::parse("F2").unwrap();
        let all: Vec<String> = f2
            .enumerate_finite(16)
            .unwrap()
            .iter()
            .map(|e| e.to_string())
            .collect();
        assert_eq!(all, vec!["0", "1"]);
        let f4 = FieldDescriptor::parse("F2^2").unwrap();
        let one = f4.parse_elem("1").unwrap();
        assert_eq!(f4.trace(&one).unwrap().to_string(), "0");
        let g = f4.parse_elem("g").unwrap();
        assert_eq!(f4.trace(&g).unwrap().to_string(), "1");
        assert!(FieldDescriptor::Rational.enumerate_finite(16).is_err());
    }
}
