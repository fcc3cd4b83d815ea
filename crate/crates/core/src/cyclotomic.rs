//! Exact sums of roots of unity.
//!
//! A [`Cyclotomic`] of order `m` stores rational coefficients over the
//! non-reduced basis `1, z, ..., z^(m-1)` with `z = exp(2 pi i / m)`. Products
//! reduce exponents mod `m`; relations from the cyclotomic polynomial are only
//! applied when comparing values.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::format_rational;

/// Largest common order accepted when values of different orders meet.
pub const ORDER_CAP: u64 = 1 << 20;

/// `z_order^exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RootOfUnity {
    order: u64,
    exp: u64,
}

impl RootOfUnity {
    pub fn new(order: u64, exp: i64) -> Self {
        assert!(order > 0, "root of unity of order 0");
        RootOfUnity {
            order,
            exp: exp.rem_euclid(order as i64) as u64,
        }
    }

    pub fn one() -> Self {
        RootOfUnity { order: 1, exp: 0 }
    }

    /// `(-1)^k`.
    pub fn sign(negative: bool) -> Self {
        RootOfUnity::new(2, negative as i64)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn exp(&self) -> u64 {
        self.exp
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0
    }

    /// Same root written with the smallest possible order.
    pub fn reduced(&self) -> Self {
        let g = self.exp.gcd(&self.order);
        let g = if self.exp == 0 { self.order } else { g };
        RootOfUnity {
            order: self.order / g,
            exp: self.exp / g,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let m = lcm_capped(self.order, other.order, ORDER_CAP)?;
        let e = self.exp * (m / self.order) + other.exp * (m / other.order);
        Ok(RootOfUnity {
            order: m,
            exp: e % m,
        }
        .reduced())
    }

    pub fn pow(&self, k: i64) -> Self {
        let m = self.order as i128;
        let e = (self.exp as i128 * k as i128).rem_euclid(m);
        RootOfUnity {
            order: self.order,
            exp: e as u64,
        }
        .reduced()
    }

    pub fn conj(&self) -> Self {
        RootOfUnity::new(self.order, -(self.exp as i64))
    }

    /// The exponent when written with order `m`, which must be a multiple of the order.
    pub fn exp_at(&self, m: u64) -> u64 {
        assert!(
            m.is_multiple_of(self.order),
            "order {} does not divide {m}",
            self.order
        );
        self.exp * (m / self.order)
    }

    pub fn embed(&self) -> Complex64 {
        angle(self.exp, self.order)
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.reduced();
        match (r.order, r.exp) {
            (1, _) => write!(f, "1"),
            (2, _) => write!(f, "-1"),
            (m, e) => write!(f, "z{m}^{e}"),
        }
    }
}

/// `lcm(a, b)`, or `OrderOverflow` past `cap`.
pub fn lcm_capped(a: u64, b: u64, cap: u64) -> Result<u64> {
    let l = (a as u128) / (a.gcd(&b) as u128) * b as u128;
    if l > cap as u128 {
        return Err(Error::OrderOverflow(l.min(u64::MAX as u128) as u64));
    }
    Ok(l as u64)
}

fn angle(exp: u64, order: u64) -> Complex64 {
    let theta = 2.0 * std::f64::consts::PI * (exp % order) as f64 / order as f64;
    Complex64::new(theta.cos(), theta.sin())
}

#[derive(Debug, Clone)]
pub struct Cyclotomic {
    order: u64,
    coeffs: Vec<BigRational>,
}

impl Cyclotomic {
    pub fn zero(order: u64) -> Self {
        assert!(
            order > 0 && order <= ORDER_CAP,
            "bad cyclotomic order {order}"
        );
        Cyclotomic {
            order,
            coeffs: vec![BigRational::zero(); order as usize],
        }
    }

    pub fn from_rational(c: BigRational) -> Self {
        Cyclotomic {
            order: 1,
            coeffs: vec![c],
        }
    }

    pub fn from_root(r: RootOfUnity) -> Self {
        let mut z = Cyclotomic::zero(r.order);
        z.coeffs[r.exp as usize] = BigRational::one();
        z
    }

    /// Builds from coefficients indexed by exponent; the order is the length.
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "empty coefficient vector");
        Cyclotomic {
            order: coeffs.len() as u64,
            coeffs,
        }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Rewrites with order `m`, a multiple of the current order.
    pub fn lift(&self, m: u64) -> Result<Self> {
        if m > ORDER_CAP {
            return Err(Error::OrderOverflow(m));
        }
        assert!(
            m.is_multiple_of(self.order),
            "order {} does not divide {m}",
            self.order
        );
        if m == self.order {
            return Ok(self.clone());
        }
        let step = (m / self.order) as usize;
        let mut out = Cyclotomic::zero(m);
        for (i, c) in self.coeffs.iter().enumerate() {
            out.coeffs[i * step] = c.clone();
        }
        Ok(out)
    }

    fn common(&self, other: &Self) -> Result<(Self, Self)> {
        let m = lcm_capped(self.order, other.order, ORDER_CAP)?;
        Ok((self.lift(m)?, other.lift(m)?))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let (mut a, b) = self.common(other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        Ok(a)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.common(other)?;
        let m = a.order as usize;
        let mut out = Cyclotomic::zero(a.order);
        for (i, x) in a.coeffs.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.coeffs.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                out.coeffs[(i + j) % m] += x * y;
            }
        }
        Ok(out)
    }

    /// Complex conjugate: `z^k -> z^(m-k)`.
    pub fn conj(&self) -> Self {
        let m = self.order as usize;
        let mut out = Cyclotomic::zero(self.order);
        for (i, c) in self.coeffs.iter().enumerate() {
            out.coeffs[(m - i) % m] = c.clone();
        }
        out
    }

    /// Adds `weight * r` in place; the order of `r` must divide the order of `self`.
    pub fn add_root(&mut self, r: RootOfUnity, weight: &BigRational) {
        let e = r.exp_at(self.order) as usize;
        self.coeffs[e] += weight;
    }

    pub fn embed(&self) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| angle(i as u64, self.order) * rational_to_f64(c))
            .sum()
    }

    /// Canonical coefficients modulo the `m`-th cyclotomic polynomial, of
    /// length `phi(m)`. Equal values give equal vectors.
    pub fn reduced(&self) -> Vec<BigRational> {
        let phi = cyclotomic_polynomial(self.order);
        let deg = phi.len() - 1;
        let den = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let mut v: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        for i in (deg..v.len()).rev() {
            if v[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut v[i]);
            for (j, f) in phi.iter().enumerate().take(deg) {
                if *f != 0 {
                    v[i - deg + j] -= &c * BigInt::from(*f);
                }
            }
        }
        v.truncate(deg);
        v.into_iter()
            .map(|x| BigRational::new(x, den.clone()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.reduced().iter().all(Zero::is_zero)
    }

    /// The value as a rational number, when it is one.
    pub fn to_rational(&self) -> Option<BigRational> {
        let r = self.reduced();
        if r.iter().skip(1).all(Zero::is_zero) {
            Some(r.first().cloned().unwrap_or_else(BigRational::zero))
        } else {
            None
        }
    }

    /// Same value over the smallest order dividing the current one that can
    /// hold every nonzero exponent. Useful for compact serialization.
    pub fn compact(&self) -> Self {
        let g = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(self.order, |g, (i, _)| g.gcd(&(i as u64)));
        let m = self.order / g;
        Cyclotomic {
            order: m,
            coeffs: (0..m as usize)
                .map(|i| self.coeffs[i * g as usize].clone())
                .collect(),
        }
    }

    /// Sparse text form `c0 + c1*z^1 + ...` over `z = z_m`.
    pub fn format(&self) -> String {
        let c = self.compact();
        let terms: Vec<String> = c
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| match i {
                0 => format_rational(x),
                _ => format!("{}*z{}^{i}", format_rational(x), c.order),
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        match self.sub(other) {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

pub fn rational_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        // Scale huge numerators and denominators down together.
        let shift = c.numer().bits().max(c.denom().bits()).saturating_sub(1000);
        let n = (c.numer().abs() >> shift).to_f64().unwrap_or(f64::MAX);
        let d = (c.denom() >> shift).to_f64().unwrap_or(f64::MAX);
        if c.is_negative() {
            -n / d
        } else {
            n / d
        }
    })
}

/// Integer coefficients of the `m`-th cyclotomic polynomial, low to high.
pub fn cyclotomic_polynomial(m: u64) -> Vec<i64> {
    // Phi_m = prod_{d | m} (x^d - 1)^{mu(m/d)}: multiply the positive factors,
    // then divide out the negative ones.
    let divisors: Vec<u64> = (1..=m).filter(|d| m.is_multiple_of(*d)).collect();
    let mut num = vec![1i64];
    let mut dens = Vec::new();
    for &d in &divisors {
        match mobius(m / d) {
            1 => num = mul_binomial(&num, d as usize),
            -1 => dens.push(d as usize),
            _ => {}
        }
    }
    for d in dens {
        num = div_binomial(&num, d);
    }
    num
}

fn mul_binomial(f: &[i64], d: usize) -> Vec<i64> {
    // f * (x^d - 1)
    let mut out = vec![0i64; f.len() + d];
    for (i, &c) in f.iter().enumerate() {
        out[i + d] += c;
        out[i] -= c;
    }
    out
}

fn div_binomial(f: &[i64], d: usize) -> Vec<i64> {
    // f / (x^d - 1), exact
    let n = f.len() - d;
    let mut q = vec![0i64; n];
    let mut r = f.to_vec();
    for i in (0..n).rev() {
        let c = r[i + d];
        q[i] = c;
        r[i + d] -= c;
        r[i] += c;
    }
    debug_assert!(r.iter().all(|&c| c == 0), "inexact division by x^{d} - 1");
    q
}

fn mobius(mut n: u64) -> i32 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// A character value or a sum of character values: exact when it comes
/// from a positive-characteristic character, numeric otherwise.
#[derive(Debug, Clone)]
pub enum UnitValue {
    Exact(Cyclotomic),
    Numeric(Complex64),
}

impl UnitValue {
    pub fn one() -> Self {
        UnitValue::Exact(Cyclotomic::from_root(RootOfUnity::one()))
    }

    pub fn root(r: RootOfUnity) -> Self {
        UnitValue::Exact(Cyclotomic::from_root(r))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, UnitValue::Exact(_))
    }

    pub fn exact(&self) -> Option<&Cyclotomic> {
        match self {
            UnitValue::Exact(c) => Some(c),
            UnitValue::Numeric(_) => None,
        }
    }

    pub fn embed(&self) -> Complex64 {
        match self {
            UnitValue::Exact(c) => c.embed(),
            UnitValue::Numeric(z) => *z,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(match (self, other) {
            (UnitValue::Exact(a), UnitValue::Exact(b)) => UnitValue::Exact(a.mul(b)?),
            _ => UnitValue::Numeric(self.embed() * other.embed()),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(match (self, other) {
            (UnitValue::Exact(a), UnitValue::Exact(b)) => UnitValue::Exact(a.add(b)?),
            _ => UnitValue::Numeric(self.embed() + other.embed()),
        })
    }

    pub fn conj(&self) -> Self {
        match self {
            UnitValue::Exact(c) => UnitValue::Exact(c.conj()),
            UnitValue::Numeric(z) => UnitValue::Numeric(z.conj()),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        match self {
            UnitValue::Exact(x) => UnitValue::Exact(x.scale(c)),
            UnitValue::Numeric(z) => UnitValue::Numeric(z * rational_to_f64(c)),
        }
    }

    /// Exact equality when both sides are exact; otherwise `None`.
    pub fn exact_eq(&self, other: &Self) -> Option<bool> {
        match (self, other) {
            (UnitValue::Exact(a), UnitValue::Exact(b)) => Some(a == b),
            _ => None,
        }
    }

    pub fn format(&self) -> String {
        match self {
            UnitValue::Exact(c) => c.format(),
            UnitValue::Numeric(z) => format!("{}{:+}i", z.re, z.im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        // Phi_105 is the first with a coefficient of absolute value 2.
        assert!(cyclotomic_polynomial(105).contains(&-2));
    }

    #[test]
    fn root_products() {
        let z3 = RootOfUnity::new(3, 1);
        assert!(z3.mul(&RootOfUnity::new(3, 2)).unwrap().is_one());
        assert_eq!(RootOfUnity::new(5, 1).conj(), RootOfUnity::new(5, 4));
        assert_eq!(RootOfUnity::new(6, 3).reduced(), RootOfUnity::new(2, 1));
    }

    #[test]
    fn sum_of_primitive_cube_roots_is_minus_one() {
        let s = Cyclotomic::from_root(RootOfUnity::new(3, 1))
            .add(&Cyclotomic::from_root(RootOfUnity::new(3, 2)))
            .unwrap();
        assert_eq!(s.to_rational(), Some(rat(-1, 1)));
        let z = s.embed();
        assert!((z.re + 1.0).abs() < 1e-12 && z.im.abs() < 1e-12);
    }

    #[test]
    fn all_roots_sum_to_zero() {
        for m in [2u64, 5, 12, 30] {
            let mut s = Cyclotomic::zero(m);
            for e in 0..m {
                s.add_root(RootOfUnity::new(m, e as i64), &rat(1, 1));
            }
            assert!(s.is_zero(), "m = {m}");
        }
    }

    #[test]
    fn equality_across_orders() {
        let minus_one = Cyclotomic::from_root(RootOfUnity::new(2, 1));
        let via_six = Cyclotomic::from_root(RootOfUnity::new(6, 3));
        assert_eq!(minus_one, via_six);
        assert_ne!(minus_one, Cyclotomic::from_root(RootOfUnity::new(4, 1)));
    }

    #[test]
    fn order_cap() {
        assert!(matches!(
            lcm_capped(1 << 19, 3, ORDER_CAP),
            Err(Error::OrderOverflow(_))
        ));
    }

    #[test]
    fn embedding_is_unimodular() {
        for m in 1..60u64 {
            for e in 0..m {
                let z = RootOfUnity::new(m, e as i64).embed();
                assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
