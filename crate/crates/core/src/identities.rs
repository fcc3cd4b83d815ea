//! Exact verifiers for three algebraic identities: the power identity
//! `sum c_j p_j(t)^n = 0` with its independence lemma, the triple mixing
//! average over a finite dual, and the positive correlation inequality.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::cyclotomic::{Cyclotomic, RootOfUnity, UnitValue};
use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, FieldElement, Value};
use crate::finite::{FiniteField, FqElem};
use crate::linalg;
use crate::poly::Poly;
use crate::scalar::{binomial, format_rational, Field};

#[derive(Debug, Clone)]
pub struct PowerIdentity {
    n: u64,
    field: FieldDescriptor,
    exponents: Vec<u64>,
    coeffs: Vec<Value>,
    polys: Vec<Poly<Value>>,
}

fn prime_field(p: u64) -> Result<FieldDescriptor> {
    Ok(if p == 0 {
        FieldDescriptor::Rational
    } else {
        FieldDescriptor::Finite(FiniteField::new(p, 1)?)
    })
}

/// `(t^n + 1)^n = sum_{k in P} binom(n, k) (t^k)^n` with `P` the exponents
/// whose binomial survives in characteristic `p`.
pub fn build_power_identity(n: u64, p: u64) -> Result<PowerIdentity> {
    if n == 0 || (p != 0 && n.is_multiple_of(p)) {
        return Err(Error::CharDividesN { p, n: n as i64 });
    }
    let field = prime_field(p)?;
    let mut exponents = Vec::new();
    let mut coeffs = Vec::new();
    let mut polys = Vec::new();
    for k in 0..=n {
        let b = binomial(n, k)
            .to_i64()
            .ok_or_else(|| Error::Unsupported(format!("binomial({n}, {k}) overflows")))?;
        let c = field.from_i64(b);
        if !field.is_zero(&c) {
            exponents.push(k);
            coeffs.push(c);
            polys.push(Poly::monomial(&field, field.one(), k as usize));
        }
    }
    coeffs.push(field.from_i64(-1));
    let tn = Poly::monomial(&field, field.one(), n as usize);
    polys.push(tn.add(&field, &Poly::one(&field)));
    let id = PowerIdentity {
        n,
        field,
        exponents,
        coeffs,
        polys,
    };
    assert!(id.holds(), "power identity failed for n={n}, p={p}");
    Ok(id)
}

impl PowerIdentity {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn characteristic(&self) -> u64 {
        self.field.characteristic()
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    /// The exponent set `P`.
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn coeffs(&self) -> &[Value] {
        &self.coeffs
    }

    pub fn polys(&self) -> &[Poly<Value>] {
        &self.polys
    }

    /// `N = |P| + 1`.
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Expands `sum c_j p_j^n` and tests it for zero.
    pub fn holds(&self) -> bool {
        let f = &self.field;
        self.coeffs
            .iter()
            .zip(&self.polys)
            .fold(Poly::zero(), |acc, (c, p)| {
                acc.add(f, &p.pow(f, self.n).scale(f, c))
            })
            .is_zero()
    }

    pub fn format_coeffs(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| self.field.format(c)).collect()
    }

    pub fn format_polys(&self) -> Vec<String> {
        self.polys
            .iter()
            .map(|p| p.format(&self.field, "t"))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Independence {
    pub independent: bool,
    pub rank: usize,
    /// Kernel vector `b` when dependent, first nonzero entry one.
    pub witness: Option<Vec<Value>>,
}

/// Decides whether `sum b_j p_j^m = 0` has a nonzero solution. Negative `m`
/// is handled by multiplying through by `prod_j p_j^|m|`.
pub fn check_linear_independence(id: &PowerIdentity, m: i64) -> Result<Independence> {
    let p = id.characteristic();
    if m == 0 || (p != 0 && m.rem_euclid(p as i64) == 0) {
        return Err(Error::CharDividesN { p, n: m });
    }
    let f = &id.field;
    let e = m.unsigned_abs();
    let powered: Vec<Poly<Value>> = id.polys.iter().map(|q| q.pow(f, e)).collect();
    let columns: Vec<Poly<Value>> = if m > 0 {
        powered
    } else {
        (0..powered.len())
            .map(|j| {
                powered
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != j)
                    .fold(Poly::one(f), |acc, (_, q)| acc.mul(f, q))
            })
            .collect()
    };
    let rows = columns
        .iter()
        .filter_map(Poly::degree)
        .max()
        .map_or(0, |d| d + 1);
    let matrix: Vec<Vec<Value>> = (0..rows)
        .map(|r| columns.iter().map(|c| c.coeff(f, r)).collect())
        .collect();
    let cols = columns.len();
    let rank = linalg::rank(f, &matrix);
    let witness = linalg::kernel(f, &matrix, cols).into_iter().next();
    Ok(Independence {
        independent: rank == cols,
        rank,
        witness,
    })
}

fn finite_of(x: &FieldElement) -> Result<(&FiniteField, FqElem)> {
    match (x.descriptor(), x.value()) {
        (FieldDescriptor::Finite(k), Value::Finite(a)) => Ok((k, *a)),
        _ => Err(Error::Unsupported(format!(
            "{} is not a finite field",
            x.descriptor()
        ))),
    }
}

/// `(1/q) sum_beta xi_beta(1) xi_beta(a - 1) xi_beta(-a)`, exactly.
pub fn triple_mixing_check(a: &FieldElement, cap: u64) -> Result<UnitValue> {
    let (k, a) = finite_of(a)?;
    if a.0 == 0 || a == k.one() {
        return Err(Error::BadA(k.format(&a)));
    }
    let p = k.p();
    let args = [k.one(), k.sub(&a, &k.one()), k.neg(&a)];
    let mut counts = vec![0u64; p as usize];
    for beta in k.enumerate(cap)? {
        let e: u64 = args.iter().map(|x| k.trace(k.mul(&beta, x))).sum();
        counts[(e % p) as usize] += 1;
    }
    let q = BigInt::from(k.order());
    let coeffs = counts
        .into_iter()
        .map(|c| BigRational::new(BigInt::from(c), q.clone()))
        .collect();
    Ok(UnitValue::Exact(Cyclotomic::from_coeffs(coeffs)))
}

/// A non-negative function `hat` on `F_q`, read as the Fourier transform of
/// `phi(xi_beta) = sum_b hat(b) xi_beta(-b)`.
#[derive(Debug, Clone)]
pub struct SpectrumFunction {
    field: FiniteField,
    hat: Vec<BigRational>,
}

impl SpectrumFunction {
    /// `hat[i]` is the coefficient at the element with packed index `i`.
    pub fn new(field: &FiniteField, hat: Vec<BigRational>) -> Result<Self> {
        if hat.len() as u64 != field.order() {
            return Err(Error::Parse(format!(
                "spectrum needs {} values, got {}",
                field.order(),
                hat.len()
            )));
        }
        if let Some(bad) = hat.iter().find(|c| c.is_negative()) {
            return Err(Error::Parse(format!(
                "negative Fourier coefficient {}",
                format_rational(bad)
            )));
        }
        Ok(SpectrumFunction {
            field: field.clone(),
            hat,
        })
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn hat(&self, b: FqElem) -> &BigRational {
        &self.hat[b.0 as usize]
    }

    /// `phi(xi_beta)` as an exact cyclotomic number.
    pub fn phi(&self, beta: FqElem) -> Cyclotomic {
        let k = &self.field;
        let p = k.p();
        let mut acc = Cyclotomic::zero(p);
        for (i, c) in self.hat.iter().enumerate() {
            if !c.is_zero() {
                let e = k.trace(k.neg(&k.mul(&beta, &FqElem(i as u64))));
                acc.add_root(RootOfUnity::new(p, e as i64), c);
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PosCorr {
    #[serde(serialize_with = "ser_rational")]
    pub lhs: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: BigRational,
    pub holds: bool,
}

fn ser_rational<S: serde::Serializer>(
    r: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn check_s(k: &FiniteField, phis: &[SpectrumFunction], s: &[FqElem]) -> Result<()> {
    let show = || s.iter().map(|x| k.format(x)).collect::<Vec<_>>().join(",");
    if s.len() < 2 || s.len() != phis.len() {
        return Err(Error::BadS(format!(
            "need N >= 2 multipliers matching {} spectra, got [{}]",
            phis.len(),
            show()
        )));
    }
    if s.iter().any(|x| x.0 == 0) {
        return Err(Error::BadS(format!("zero multiplier in [{}]", show())));
    }
    let total = s.iter().fold(k.zero(), |acc, x| k.add(&acc, x));
    if total.0 != 0 {
        return Err(Error::BadS(format!("[{}] does not sum to zero", show())));
    }
    if phis.iter().any(|f| f.field != *k) {
        return Err(Error::DescriptorMismatch(
            FieldDescriptor::Finite(k.clone()).to_string(),
            "spectrum over another field".into(),
        ));
    }
    Ok(())
}

/// `lhs = (1/q) sum_beta prod_j phi_j(xi_{s_j beta})`, computed as the sum over
/// tuples with `sum s_j b_j = 0` of `prod hat_j(b_j)`; `rhs = sum_b prod hat_j(b)`.
pub fn poscorr_check(
    field: &FiniteField,
    phis: &[SpectrumFunction],
    s: &[FqElem],
) -> Result<PosCorr> {
    check_s(field, phis, s)?;
    let q = field.order() as usize;
    let mut dist = vec![BigRational::zero(); q];
    dist[0] = BigRational::from_integer(1.into());
    for (phi, sj) in phis.iter().zip(s) {
        let mut next = vec![BigRational::zero(); q];
        for (acc, mass) in dist.iter().enumerate().filter(|(_, m)| !m.is_zero()) {
            for (b, h) in phi.hat.iter().enumerate().filter(|(_, h)| !h.is_zero()) {
                let t = field.add(&FqElem(acc as u64), &field.mul(sj, &FqElem(b as u64)));
                next[t.0 as usize] += mass * h;
            }
        }
        dist = next;
    }
    let lhs = dist.swap_remove(0);
    let rhs = (0..q)
        .map(|b| {
            phis.iter()
                .map(|f| f.hat[b].clone())
                .product::<BigRational>()
        })
        .sum::<BigRational>();
    let holds = lhs >= rhs;
    Ok(PosCorr { lhs, rhs, holds })
}

/// The same left-hand side evaluated on the character side with cyclotomic
/// arithmetic.
pub fn poscorr_lhs_by_characters(
    field: &FiniteField,
    phis: &[SpectrumFunction],
    s: &[FqElem],
    cap: u64,
) -> Result<Cyclotomic> {
    check_s(field, phis, s)?;
    let p = field.p();
    let mut total = Cyclotomic::zero(p);
    for beta in field.enumerate(cap)? {
        let mut prod = Cyclotomic::from_rational(BigRational::from_integer(1.into()));
        for (phi, sj) in phis.iter().zip(s) {
            prod = prod.mul(&phi.phi(field.mul(sj, &beta)))?;
        }
        total = total.add(&prod)?;
    }
    Ok(total.scale(&BigRational::new(1.into(), BigInt::from(field.order()))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folner::DEFAULT_CAP;
    use crate::scalar::rat;

    #[test]
    fn power_identity_examples() {
        let id = build_power_identity(1, 0).unwrap();
        assert_eq!(id.len(), 3);
        assert_eq!(id.format_coeffs(), ["1", "1", "-1"]);
        assert_eq!(id.format_polys(), ["1", "t", "t + 1"]);
        let id = build_power_identity(2, 0).unwrap();
        assert_eq!(id.format_coeffs(), ["1", "2", "1", "-1"]);
        assert_eq!(id.format_polys(), ["1", "t", "t^2", "t^2 + 1"]);
        assert!(matches!(
            build_power_identity(2, 2),
            Err(Error::CharDividesN { p: 2, n: 2 })
        ));
        let id = build_power_identity(3, 2).unwrap();
        assert_eq!(id.exponents(), [0, 1, 2, 3]);
        let id = build_power_identity(4, 3).unwrap();
        assert!(id.holds());
    }

    #[test]
    fn independence_examples() {
        let id = build_power_identity(1, 0).unwrap();
        let r = check_linear_independence(&id, 1).unwrap();
        assert!(!r.independent);
        let w = r.witness.unwrap();
        let q = FieldDescriptor::Rational;
        assert_eq!(
            w.iter().map(|x| q.format(x)).collect::<Vec<_>>(),
            ["1", "1", "-1"]
        );
        assert!(check_linear_independence(&id, -1).unwrap().independent);
        let id = build_power_identity(2, 0).unwrap();
        assert!(check_linear_independence(&id, 3).unwrap().independent);
    }

    #[test]
    fn triple_mixing_is_one() {
        for (q, a) in [("F5", "3"), ("F4", "g"), ("F27", "g^5")] {
            let d = FieldDescriptor::parse(q).unwrap();
            let v = triple_mixing_check(&d.parse_elem(a).unwrap(), DEFAULT_CAP).unwrap();
            assert_eq!(v.exact().unwrap().to_rational(), Some(rat(1, 1)));
        }
        let d = FieldDescriptor::parse("F5").unwrap();
        assert!(matches!(
            triple_mixing_check(&d.parse_elem("1").unwrap(), DEFAULT_CAP),
            Err(Error::BadA(_))
        ));
    }

    #[test]
    fn poscorr_examples() {
        let k = FiniteField::new(7, 1).unwrap();
        let mut delta = vec![rat(0, 1); 7];
        delta[0] = rat(1, 1);
        let d = SpectrumFunction::new(&k, delta).unwrap();
        let s = [FqElem(1), FqElem(2), FqElem(4)];
        let r = poscorr_check(&k, &[d.clone(), d.clone(), d.clone()], &s).unwrap();
        assert_eq!((r.lhs, r.rhs), (rat(1, 1), rat(1, 1)));

        let u = SpectrumFunction::new(&k, vec![rat(1, 7); 7]).unwrap();
        let s2 = [FqElem(3), FqElem(4)];
        let r = poscorr_check(&k, &[u.clone(), u.clone()], &s2).unwrap();
        assert_eq!(r.lhs, rat(1, 7));
        assert!(r.holds);
        let by_chars = poscorr_lhs_by_characters(&k, &[u.clone(), u], &s2, DEFAULT_CAP).unwrap();
        assert_eq!(by_chars.to_rational(), Some(rat(1, 7)));

        assert!(matches!(
            poscorr_check(
                &k,
                &[d.clone(), d.clone(), d],
                &[FqElem(1), FqElem(1), FqElem(1)]
            ),
            Err(Error::BadS(_))
        ));
    }
}
