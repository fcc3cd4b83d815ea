//! Finite fields `F_{p^n} = F_p[x]/(C_{p,n})` with Conway-rule moduli.
//!
//! Elements are packed base-`p` integers: coefficient `i` of the residue is
//! digit `i`. Numeric order of the packing is the enumeration order, so `0`
//! comes first and the order is lexicographic in coefficient vectors read
//! from the top coefficient down.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::registry::{self, mulmod};
use crate::scalar::{prime_factors, Field, PrimeField};

/// Default bound on enumerated or tabulated field sizes.
pub const DEFAULT_CAP: u64 = 1 << 24;

/// Fields up to this size get log/antilog tables on first multiplication.
const TABLE_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct FqElem(pub u64);

impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

struct Tables {
    /// `exp[i] = g^i` for `0 <= i < q - 1`.
    exp: Vec<u32>,
    /// `log[x]` for nonzero `x`; `log[0]` is unused.
    log: Vec<u32>,
}

struct Inner {
    p: u64,
    n: u32,
    q: u64,
    modulus: Vec<u64>,
    powers: Vec<u64>,
    tables: OnceLock<Option<Tables>>,
    trace_basis: OnceLock<Vec<u64>>,
}

/// The field `F_{p^n}`; cheap to clone.
#[derive(Clone)]
pub struct FiniteField {
    inner: Arc<Inner>,
}

impl fmt::Debug for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.inner.p, self.inner.n)
    }
}

impl PartialEq for FiniteField {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p
            && self.inner.n == other.inner.n
            && self.inner.modulus == other.inner.modulus
    }
}

impl Eq for FiniteField {}

impl std::hash::Hash for FiniteField {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.inner.p.hash(state);
        self.inner.n.hash(state);
        self.inner.modulus.hash(state);
    }
}

impl FiniteField {
    /// `F_{p^n}` with the registry modulus.
    pub fn new(p: u64, n: u32) -> Result<Self> {
        let modulus = registry::modulus(p, n)?;
        Self::with_modulus(p, modulus)
    }

    /// `F_q` for a prime power `q`.
    pub fn of_order(q: u64) -> Result<Self> {
        let fs = prime_factors(q);
        if fs.len() != 1 {
            return Err(Error::InvalidField(format!("{q} is not a prime power")));
        }
        let p = fs[0];
        let mut n = 0;
        let mut r = q;
        while r > 1 {
            r /= p;
            n += 1;
        }
        Self::new(p, n)
    }

    /// Uses a caller-supplied monic irreducible modulus (low-to-high).
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        PrimeField::new(p)?;
        let n = modulus
            .len()
            .checked_sub(1)
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::InvalidField("modulus must have degree at least 1".into()))?
            as u32;
        if modulus[n as usize] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField(
                "modulus must be monic with reduced coefficients".into(),
            ));
        }
        let q = p
            .checked_pow(n)
            .filter(|&q| q < 1 << 40)
            .ok_or_else(|| Error::InvalidField(format!("{p}^{n} too large")))?;
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidField("modulus is reducible".into()));
        }
        let powers = (0..n).map(|i| p.pow(i)).collect();
        Ok(FiniteField {
            inner: Arc::new(Inner {
                p,
                n,
                q,
                modulus,
                powers,
                tables: OnceLock::new(),
                trace_basis: OnceLock::new(),
            }),
        })
    }

    pub fn p(&self) -> u64 {
        self.inner.p
    }

    pub fn degree(&self) -> u32 {
        self.inner.n
    }

    pub fn order(&self) -> u64 {
        self.inner.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.inner.modulus
    }

    pub fn prime_field(&self) -> PrimeField {
        PrimeField::new(self.inner.p).expect("validated prime")
    }

    pub fn to_coeffs(&self, a: FqElem) -> Vec<u64> {
        let p = self.inner.p;
        let mut v = Vec::with_capacity(self.inner.n as usize);
        let mut x = a.0;
        for _ in 0..self.inner.n {
            v.push(x % p);
            x /= p;
        }
        v
    }

    pub fn from_coeffs(&self, c: &[u64]) -> FqElem {
        let p = self.inner.p;
        let mut v = 0u64;
        for (i, &ci) in c.iter().enumerate().take(self.inner.n as usize) {
            v += (ci % p) * self.inner.powers[i];
        }
        FqElem(v)
    }

    /// Embedding of the prime field.
    pub fn from_prime(&self, c: u64) -> FqElem {
        FqElem(c % self.inner.p)
    }

    /// The residue class of `x`; a generator of the multiplicative group.
    pub fn generator(&self) -> FqElem {
        if self.inner.n == 1 {
            FqElem((self.inner.p - self.inner.modulus[0]) % self.inner.p)
        } else {
            FqElem(self.inner.p)
        }
    }

    /// All elements in packing order, after checking `q <= cap`.
    pub fn enumerate(&self, cap: u64) -> Result<impl Iterator<Item = FqElem>> {
        if self.inner.q > cap {
            return Err(Error::CapExceeded {
                size: self.inner.q as u128,
                cap,
            });
        }
        Ok((0..self.inner.q).map(FqElem))
    }

    fn tables(&self) -> Option<&Tables> {
        self.inner
            .tables
            .get_or_init(|| {
                if self.inner.q > TABLE_LIMIT {
                    return None;
                }
                Some(self.build_tables(self.inner.q))
            })
            .as_ref()
    }

    fn build_tables(&self, q: u64) -> Tables {
        let g = self.generator();
        let mut exp = Vec::with_capacity((q - 1) as usize);
        let mut log = vec![0u32; q as usize];
        let mut cur = FqElem(1);
        for i in 0..q - 1 {
            exp.push(cur.0 as u32);
            log[cur.0 as usize] = i as u32;
            cur = self.mul_poly(cur, g);
        }
        debug_assert_eq!(cur, FqElem(1));
        Tables { exp, log }
    }

    /// Discrete logarithm base [`Self::generator`]; builds tables on first use.
    pub fn dlog(&self, a: FqElem) -> Result<u64> {
        if a.0 == 0 {
            return Err(Error::ZeroArgument);
        }
        match self.tables() {
            Some(t) => Ok(t.log[a.0 as usize] as u64),
            None => Err(Error::CapExceeded {
                size: self.inner.q as u128,
                cap: TABLE_LIMIT,
            }),
        }
    }

    /// `g^k` for the generator `g`.
    pub fn gen_pow(&self, k: i64) -> FqElem {
        let e = k.rem_euclid(self.inner.q as i64 - 1) as u64;
        match self.tables() {
            Some(t) => FqElem(t.exp[e as usize] as u64),
            None => self.pow_u(&self.generator(), e),
        }
    }

    fn mul_poly(&self, a: FqElem, b: FqElem) -> FqElem {
        if self.inner.n == 1 {
            return FqElem(a.0 * b.0 % self.inner.p);
        }
        let ca = self.to_coeffs(a);
        let cb = self.to_coeffs(b);
        self.from_coeffs(&mulmod(&ca, &cb, &self.inner.modulus, self.inner.p))
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, a: FqElem) -> FqElem {
        self.pow_u(&a, self.inner.p)
    }

    /// Absolute trace `F_{p^n} -> F_p` as a prime-field residue.
    pub fn trace(&self, a: FqElem) -> u64 {
        let basis = self.inner.trace_basis.get_or_init(|| {
            let mut v = Vec::with_capacity(self.inner.n as usize);
            for i in 0..self.inner.n {
                let xi = self.from_coeffs(&unit_vec(self.inner.n as usize, i as usize));
                v.push(self.trace_by_definition(xi).0);
            }
            v
        });
        let p = self.inner.p;
        let mut acc = 0u64;
        let mut x = a.0;
        for &t in basis {
            acc = (acc + (x % p) * t) % p;
            x /= p;
        }
        acc
    }

    /// `sum_{i<n} a^{p^i}`, the defining formula.
    pub fn trace_by_definition(&self, a: FqElem) -> FqElem {
        let mut acc = FqElem(0);
        let mut cur = a;
        for _ in 0..self.inner.n {
            acc = self.add(&acc, &cur);
            cur = self.frobenius(cur);
        }
        acc
    }

    /// The unique `y` with `y^p = a`.
    pub fn pth_root(&self, a: FqElem) -> FqElem {
        let mut cur = a;
        for _ in 1..self.inner.n {
            cur = self.frobenius(cur);
        }
        cur
    }

    /// Whether `a` lies in the subfield `F_{p^m}`.
    pub fn in_subfield(&self, a: FqElem, m: u32) -> bool {
        let mut cur = a;
        for _ in 0..m {
            cur = self.frobenius(cur);
        }
        cur == a
    }

    /// Multiplicative order of a nonzero element by repeated multiplication.
    pub fn order_of(&self, a: FqElem) -> Result<u64> {
        if a.0 == 0 {
            return Err(Error::ZeroArgument);
        }
        let mut cur = a;
        let mut k = 1;
        while cur != FqElem(1) {
            cur = self.mul(&cur, &a);
            k += 1;
        }
        Ok(k)
    }

    /// Parses `0`, an integer, `g^k`, or a polynomial in `x` such as `x^2+1`.
    pub fn parse_elem(&self, s: &str) -> Result<FqElem> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix("g^") {
            let k: i64 = rest
                .parse()
                .map_err(|_| Error::parse(format!("bad exponent in `{s}`")))?;
            return Ok(self.gen_pow(k));
        }
        if t == "g" {
            return Ok(self.generator());
        }
        if let Some(rest) = t.strip_prefix('#') {
            let v: u64 = rest
                .parse()
                .map_err(|_| Error::parse(format!("bad element `{s}`")))?;
            if v >= self.inner.q {
                return Err(Error::parse(format!("element index {v} out of range")));
            }
            return Ok(FqElem(v));
        }
        let pf = self.prime_field();
        let poly = crate::poly::parse_poly(&pf, t, "x")?;
        let r = poly.rem(
            &pf,
            &crate::poly::Poly::new(&pf, self.inner.modulus.clone()),
        )?;
        Ok(self.from_coeffs(r.coeffs()))
    }
}

fn unit_vec(n: usize, i: usize) -> Vec<u64> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

/// Rabin-style irreducibility test over `F_p`.
fn is_irreducible(f: &[u64], p: u64) -> bool {
    use crate::poly::Poly;
    let n = f.len() - 1;
    if n == 1 {
        return true;
    }
    let pf = PrimeField::new(p).expect("prime");
    let fpoly = Poly::new(&pf, f.to_vec());
    let x = Poly::x(&pf);
    // x^{p^k} mod f for k = 1..n
    let mut cur = x.clone();
    let mut xs = Vec::with_capacity(n);
    for _ in 0..n {
        cur = powmod_poly(&pf, &cur, p, &fpoly);
        xs.push(cur.clone());
    }
    if xs[n - 1] != x.rem(&pf, &fpoly).expect("nonzero") {
        return false;
    }
    for r in prime_factors(n as u64) {
        let k = n / r as usize;
        let g = xs[k - 1].sub(&pf, &x).gcd(&pf, &fpoly);
        if g.degree() != Some(0) {
            return false;
        }
    }
    true
}

fn powmod_poly(
    pf: &PrimeField,
    a: &crate::poly::Poly<u64>,
    mut e: u64,
    m: &crate::poly::Poly<u64>,
) -> crate::poly::Poly<u64> {
    use crate::poly::Poly;
    let mut base = a.rem(pf, m).expect("nonzero");
    let mut acc = Poly::one(pf);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(pf, &base).rem(pf, m).expect("nonzero");
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(pf, &base).rem(pf, m).expect("nonzero");
        }
    }
    acc
}

impl Field for FiniteField {
    type Elem = FqElem;

    fn zero(&self) -> FqElem {
        FqElem(0)
    }
    fn one(&self) -> FqElem {
        FqElem(1)
    }
    fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        let p = self.inner.p;
        if p == 2 {
            return FqElem(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        for &pw in &self.inner.powers {
            out += ((x % p + y % p) % p) * pw;
            x /= p;
            y /= p;
        }
        FqElem(out)
    }
    fn neg(&self, a: &FqElem) -> FqElem {
        let p = self.inner.p;
        if p == 2 {
            return *a;
        }
        let mut x = a.0;
        let mut out = 0;
        for &pw in &self.inner.powers {
            out += ((p - x % p) % p) * pw;
            x /= p;
        }
        FqElem(out)
    }
    fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        if a.0 == 0 || b.0 == 0 {
            return FqElem(0);
        }
        match self.tables() {
            Some(t) => {
                let s = t.log[a.0 as usize] as u64 + t.log[b.0 as usize] as u64;
                let s = s % (self.inner.q - 1);
                FqElem(t.exp[s as usize] as u64)
            }
            None => self.mul_poly(*a, *b),
        }
    }
    fn inv(&self, a: &FqElem) -> Result<FqElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        match self.tables() {
            Some(t) => {
                let l = t.log[a.0 as usize] as u64;
                let e = (self.inner.q - 1 - l) % (self.inner.q - 1);
                Ok(FqElem(t.exp[e as usize] as u64))
            }
            None => Ok(self.pow_u(a, self.inner.q - 2)),
        }
    }
    fn characteristic(&self) -> u64 {
        self.inner.p
    }
    fn from_i64(&self, n: i64) -> FqElem {
        FqElem(n.rem_euclid(self.inner.p as i64) as u64)
    }
    fn format(&self, a: &FqElem) -> String {
        let pf = self.prime_field();
        crate::poly::Poly::new(&pf, self.to_coeffs(*a)).format(&pf, "x")
    }
}

/// Embedding `F_{p^m} -> F_{p^n}` for `m | n`, sending the source generator to
/// `g^((p^n-1)/(p^m-1))`.
#[derive(Debug, Clone)]
pub struct TowerMap {
    source: FiniteField,
    target: FiniteField,
    /// Images of `1, x, .., x^{m-1}`: the columns of the embedding matrix.
    columns: Vec<FqElem>,
}

impl TowerMap {
    pub fn new(source: &FiniteField, target: &FiniteField) -> Result<Self> {
        if source.p() != target.p() || !target.degree().is_multiple_of(source.degree()) {
            return Err(Error::DescriptorMismatch(
                format!("{source:?}"),
                format!("{target:?}"),
            ));
        }
        let e = (target.order() - 1) / (source.order() - 1);
        let h = target.pow_u(&target.generator(), e);
        let m = source.degree() as usize;
        let mut columns = Vec::with_capacity(m);
        let mut cur = target.one();
        for _ in 0..m {
            columns.push(cur);
            cur = target.mul(&cur, &h);
        }
        let map = TowerMap {
            source: source.clone(),
            target: target.clone(),
            columns,
        };
        // The source modulus must vanish at h for this to be a ring map.
        let modulus_at_h = source
            .modulus()
            .iter()
            .rev()
            .fold(target.zero(), |acc, &c| {
                target.add(&target.mul(&acc, &h), &target.from_prime(c))
            });
        if modulus_at_h != target.zero() {
            return Err(Error::InvalidField(
                "moduli are not compatible; tower map undefined".into(),
            ));
        }
        Ok(map)
    }

    pub fn source(&self) -> &FiniteField {
        &self.source
    }

    pub fn target(&self) -> &FiniteField {
        &self.target
    }

    /// Embedding matrix over `F_p`: column `i` holds the coordinates of `x^i`.
    pub fn matrix(&self) -> Vec<Vec<u64>> {
        self.columns
            .iter()
            .map(|c| self.target.to_coeffs(*c))
            .collect()
    }

    pub fn apply(&self, a: FqElem) -> FqElem {
        let coeffs = self.source.to_coeffs(a);
        let mut acc = self.target.zero();
        for (c, col) in coeffs.iter().zip(&self.columns) {
            if *c != 0 {
                acc = self
                    .target
                    .add(&acc, &self.target.mul(&self.target.from_prime(*c), col));
            }
        }
        acc
    }

    /// The image of the whole source field, in source enumeration order.
    pub fn image(&self, cap: u64) -> Result<Vec<FqElem>> {
        Ok(self.source.enumerate(cap)?.map(|a| self.apply(a)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_f2_and_f4() {
        let f2 = FiniteField::new(2, 1).unwrap();
        assert_eq!(
            f2.enumerate(DEFAULT_CAP).unwrap().collect::<Vec<_>>(),
            vec![FqElem(0), FqElem(1)]
        );
        let f4 = FiniteField::new(2, 2).unwrap();
        let elems: Vec<_> = f4.enumerate(DEFAULT_CAP).unwrap().collect();
        assert_eq!(elems.len(), 4);
        assert_eq!(elems[0], FqElem(0));
        // the three nonzero elements form a cyclic group of order 3
        let g = f4.generator();
        let powers: std::collections::BTreeSet<_> = (0..3).map(|k| f4.pow_u(&g, k)).collect();
        assert_eq!(powers.len(), 3);
        assert!(!powers.contains(&FqElem(0)));
    }

    #[test]
    fn f9_generator_has_order_eight() {
        let f9 = FiniteField::new(3, 2).unwrap();
        assert_eq!(f9.order_of(f9.generator()).unwrap(), 8);
    }

    #[test]
    fn inverse_in_f8_by_enumeration() {
        let f8 = FiniteField::new(2, 3).unwrap();
        let g = f8.generator();
        let x = f8.pow_u(&g, 3);
        let inv = f8.inv(&x).unwrap();
        let brute: Vec<_> = f8
            .enumerate(8)
            .unwrap()
            .filter(|y| f8.mul(&x, y) == FqElem(1))
            .collect();
        assert_eq!(brute, vec![inv]);
        assert_eq!(inv, f8.pow_u(&g, 4));
    }

    #[test]
    fn trace_examples() {
        let f4 = FiniteField::new(2, 2).unwrap();
        assert_eq!(f4.trace(FqElem(0)), 0);
        assert_eq!(f4.trace(FqElem(1)), 0);
        let g = f4.generator();
        // g + g^2 computed directly
        let direct = f4.add(&g, &f4.mul(&g, &g));
        assert_eq!(direct, FqElem(1));
        assert_eq!(f4.trace(g), 1);
    }

    #[test]
    fn trace_linear_form_matches_definition() {
        for (p, n) in [(2, 4), (3, 3), (5, 2), (7, 1)] {
            let f = FiniteField::new(p, n).unwrap();
            for a in f.enumerate(DEFAULT_CAP).unwrap() {
                assert_eq!(FqElem(f.trace(a)), f.trace_by_definition(a));
            }
        }
    }

    #[test]
    fn table_and_polynomial_multiplication_agree() {
        let f = FiniteField::new(3, 4).unwrap();
        for a in (0..81).step_by(7) {
            for b in (0..81).step_by(5) {
                assert_eq!(
                    f.mul(&FqElem(a), &FqElem(b)),
                    f.mul_poly(FqElem(a), FqElem(b))
                );
            }
        }
    }

    #[test]
    fn pth_root_inverts_frobenius() {
        let f = FiniteField::new(5, 3).unwrap();
        for a in f.enumerate(DEFAULT_CAP).unwrap() {
            assert_eq!(f.frobenius(f.pth_root(a)), a);
        }
    }

    #[test]
    fn tower_maps_compose() {
        let f2 = FiniteField::new(2, 1).unwrap();
        let f4 = FiniteField::new(2, 2).unwrap();
        let f16 = FiniteField::new(2, 4).unwrap();
        let a = TowerMap::new(&f4, &f16).unwrap();
        let b = TowerMap::new(&f2, &f4).unwrap();
        let c = TowerMap::new(&f2, &f16).unwrap();
        for x in f2.enumerate(4).unwrap() {
            assert_eq!(a.apply(b.apply(x)), c.apply(x));
        }
        for x in f4.enumerate(4).unwrap() {
            assert!(f16.in_subfield(a.apply(x), 2));
        }
        let f8 = FiniteField::new(2, 3).unwrap();
        assert!(TowerMap::new(&f4, &f8).is_err());
    }

    #[test]
    fn parse_elements() {
        let f9 = FiniteField::new(3, 2).unwrap();
        assert_eq!(f9.parse_elem("g^8").unwrap(), FqElem(1));
        assert_eq!(f9.parse_elem("x").unwrap(), f9.generator());
        assert_eq!(f9.parse_elem("2").unwrap(), FqElem(2));
        assert_eq!(
            f9.parse_elem("x^2").unwrap(),
            f9.mul(&f9.generator(), &f9.generator())
        );
        assert!(f9.parse_elem("#9").is_err());
    }

    #[test]
    fn rejects_reducible_modulus() {
        assert!(FiniteField::with_modulus(2, vec![1, 0, 1]).is_err());
        assert!(FiniteField::with_modulus(3, vec![1, 0, 1]).is_ok());
    }

    #[test]
    fn cap_is_enforced() {
        let f = FiniteField::new(2, 8).unwrap();
        assert!(matches!(f.enumerate(100), Err(Error::CapExceeded { .. })));
    }
}
