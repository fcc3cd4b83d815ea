//! Additive and multiplicative characters evaluated exactly where possible.
//!
//! Positive-characteristic characters take values in `p`-th or `(q-1)`-th
//! roots of unity and are returned as exact [`UnitValue`]s. The archimedean
//! character `x -> exp(2 pi i alpha x)` on `Q` is evaluated numerically after
//! reducing `alpha x` modulo 1 exactly.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cyclotomic::{rational_to_f64, Cyclotomic, RootOfUnity, UnitValue};
use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, FieldElement, Value};
use crate::finite::FqElem;
use crate::poly::parse_poly;
use crate::ratfunc::{monic_irreducibles, FpPoly, RatFunc};
use crate::scalar::{format_rational, is_prime, parse_rational, Field};

/// A single character value before it is packed into a [`UnitValue`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Root(RootOfUnity),
    Numeric(Complex64),
}

impl Phase {
    pub fn one() -> Self {
        Phase::Root(RootOfUnity::one())
    }

    pub fn mul(&self, other: &Phase) -> Result<Phase> {
        Ok(match (self, other) {
            (Phase::Root(a), Phase::Root(b)) => Phase::Root(a.mul(b)?),
            _ => Phase::Numeric(self.embed() * other.embed()),
        })
    }

    pub fn embed(&self) -> Complex64 {
        match self {
            Phase::Root(r) => r.embed(),
            Phase::Numeric(z) => *z,
        }
    }

    pub fn into_unit(self) -> UnitValue {
        match self {
            Phase::Root(r) => UnitValue::root(r),
            Phase::Numeric(z) => UnitValue::Numeric(z),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Alpha {
    Rational(BigRational),
    /// Accepted but marks every downstream value as inexact.
    Float(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdditiveKind {
    Trivial,
    FiniteTrace { beta: FqElem },
    Archimedean { alpha: Alpha },
    ResidueAtInfinity { beta: RatFunc, depth: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveCharacter {
    descriptor: FieldDescriptor,
    kind: AdditiveKind,
}

impl AdditiveCharacter {
    pub fn trivial(descriptor: &FieldDescriptor) -> Self {
        AdditiveCharacter {
            descriptor: descriptor.clone(),
            kind: AdditiveKind::Trivial,
        }
    }

    /// `x -> z_p^Tr(beta x)` on a finite field.
    pub fn trace(beta: &FieldElement) -> Result<Self> {
        match (beta.descriptor(), beta.value()) {
            (FieldDescriptor::Finite(_), Value::Finite(b)) => Ok(AdditiveCharacter {
                descriptor: beta.descriptor().clone(),
                kind: AdditiveKind::FiniteTrace { beta: *b },
            }),
            (d, _) => Err(Error::Unsupported(format!("trace character on {d}"))),
        }
    }

    /// `x -> exp(2 pi i alpha x)` on `Q`.
    pub fn archimedean(alpha: BigRational) -> Self {
        AdditiveCharacter {
            descriptor: FieldDescriptor::Rational,
            kind: AdditiveKind::Archimedean {
                alpha: Alpha::Rational(alpha),
            },
        }
    }

    pub fn archimedean_float(alpha: f64) -> Self {
        AdditiveCharacter {
            descriptor: FieldDescriptor::Rational,
            kind: AdditiveKind::Archimedean {
                alpha: Alpha::Float(alpha),
            },
        }
    }

    /// `f -> z_p^c(beta f)` on `F_p(t)`, where `c` is the `t^-1` coefficient
    /// at infinity read from a `depth`-term expansion.
    pub fn residue(beta: &FieldElement, depth: usize) -> Result<Self> {
        match (beta.descriptor(), beta.value()) {
            (FieldDescriptor::RationalFunction(_), Value::RatFunc(b)) => Ok(AdditiveCharacter {
                descriptor: beta.descriptor().clone(),
                kind: AdditiveKind::ResidueAtInfinity {
                    beta: b.clone(),
                    depth,
                },
            }),
            (d, _) => Err(Error::Unsupported(format!("residue character on {d}"))),
        }
    }

    /// Parses `trivial`, `trace:beta=<elt>`, `arch:alpha=<rational|float>`
    /// or `residue:beta=<elt>:depth=<k>`.
    pub fn parse(descriptor: &FieldDescriptor, lit: &str) -> Result<Self> {
        let (head, params) = split_literal(lit)?;
        let get = |key: &str| -> Result<&str> {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::parse(format!("`{lit}` lacks `{key}=`")))
        };
        match head {
            "trivial" => Ok(AdditiveCharacter::trivial(descriptor)),
            "trace" => AdditiveCharacter::trace(&descriptor.parse_elem(get("beta")?)?),
            "arch" => {
                if !descriptor.is_rational() {
                    return Err(Error::DescriptorMismatch(
                        "Q".into(),
                        descriptor.to_string(),
                    ));
                }
                let a = get("alpha")?;
                match parse_rational(a) {
                    Ok(r) => Ok(AdditiveCharacter::archimedean(r)),
                    Err(_) => a
                        .parse::<f64>()
                        .map(AdditiveCharacter::archimedean_float)
                        .map_err(|_| Error::parse(format!("bad alpha `{a}`"))),
                }
            }
            "residue" => {
                let depth = get("depth")?
                    .parse()
                    .map_err(|_| Error::parse(format!("bad depth in `{lit}`")))?;
                AdditiveCharacter::residue(&descriptor.parse_elem(get("beta")?)?, depth)
            }
            _ => Err(Error::parse(format!("unknown additive character `{lit}`"))),
        }
    }

    pub fn descriptor(&self) -> &FieldDescriptor {
        &self.descriptor
    }

    pub fn kind(&self) -> &AdditiveKind {
        &self.kind
    }

    pub fn is_trivial(&self) -> bool {
        match &self.kind {
            AdditiveKind::Trivial => true,
            AdditiveKind::FiniteTrace { beta } => beta.0 == 0,
            AdditiveKind::Archimedean {
                alpha: Alpha::Rational(a),
            } => a.is_zero(),
            AdditiveKind::Archimedean {
                alpha: Alpha::Float(a),
            } => *a == 0.0,
            AdditiveKind::ResidueAtInfinity { beta, .. } => beta.num().is_zero(),
        }
    }

    /// Whether values come back as exact cyclotomic numbers.
    pub fn is_exact(&self) -> bool {
        !matches!(self.kind, AdditiveKind::Archimedean { .. })
    }

    pub fn eval(&self, x: &FieldElement) -> Result<UnitValue> {
        if x.descriptor() != &self.descriptor {
            return Err(Error::DescriptorMismatch(
                self.descriptor.to_string(),
                x.descriptor().to_string(),
            ));
        }
        Ok(self.phase(x.value())?.into_unit())
    }

    /// Evaluation on a bare payload already known to belong to this field.
    pub fn phase(&self, x: &Value) -> Result<Phase> {
        match (&self.kind, &self.descriptor, x) {
            (AdditiveKind::Trivial, _, _) => Ok(Phase::one()),
            (AdditiveKind::FiniteTrace { beta }, FieldDescriptor::Finite(k), Value::Finite(a)) => {
                let tr = k.trace(k.mul(beta, a));
                Ok(Phase::Root(RootOfUnity::new(k.p(), tr as i64)))
            }
            (
                AdditiveKind::Archimedean { alpha },
                FieldDescriptor::Rational,
                Value::Rational(a),
            ) => Ok(Phase::Numeric(match alpha {
                Alpha::Rational(al) => {
                    let t = al * a;
                    let frac = &t - t.floor();
                    let theta = 2.0 * std::f64::consts::PI * rational_to_f64(&frac);
                    Complex64::new(theta.cos(), theta.sin())
                }
                Alpha::Float(al) => {
                    let t = al * rational_to_f64(a);
                    let theta = 2.0 * std::f64::consts::PI * (t - t.floor());
                    Complex64::new(theta.cos(), theta.sin())
                }
            })),
            (
                AdditiveKind::ResidueAtInfinity { beta, depth },
                FieldDescriptor::RationalFunction(k),
                Value::RatFunc(f),
            ) => {
                let c = k.residue_coefficient(&k.mul(beta, f), *depth)?;
                Ok(Phase::Root(RootOfUnity::new(k.p(), c as i64)))
            }
            _ => Err(Error::DescriptorMismatch(
                self.descriptor.to_string(),
                format!("{x:?}"),
            )),
        }
    }
}

impl fmt::Display for AdditiveCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AdditiveKind::Trivial => write!(f, "trivial"),
            AdditiveKind::FiniteTrace { beta } => {
                write!(
                    f,
                    "trace:beta={}",
                    self.descriptor.format(&Value::Finite(*beta))
                )
            }
            AdditiveKind::Archimedean {
                alpha: Alpha::Rational(a),
            } => {
                write!(f, "arch:alpha={}", format_rational(a))
            }
            AdditiveKind::Archimedean {
                alpha: Alpha::Float(a),
            } => write!(f, "arch:alpha={a}"),
            AdditiveKind::ResidueAtInfinity { beta, depth } => write!(
                f,
                "residue:beta={}:depth={depth}",
                self.descriptor.format(&Value::RatFunc(beta.clone()))
            ),
        }
    }
}

/// A place of `Q` or `F_p(t)` at which valuations are taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Place {
    Prime(u64),
    Irreducible(FpPoly),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MultiplicativeKind {
    Trivial,
    /// `g^j -> z_(q-1)^(kj)` for the registry generator `g`.
    DlogPower {
        k: i64,
    },
    /// `x -> (-1)^(sum of valuations at the places)`.
    ValuationParity {
        places: Vec<Place>,
    },
    Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeCharacter {
    descriptor: FieldDescriptor,
    kind: MultiplicativeKind,
}

impl MultiplicativeCharacter {
    pub fn trivial(descriptor: &FieldDescriptor) -> Self {
        MultiplicativeCharacter {
            descriptor: descriptor.clone(),
            kind: MultiplicativeKind::Trivial,
        }
    }

    pub fn dlog_power(descriptor: &FieldDescriptor, k: i64) -> Result<Self> {
        let field = descriptor
            .finite()
            .ok_or_else(|| Error::Unsupported(format!("dlog character on {descriptor}")))?;
        // Builds the log table now so evaluation is read-only afterwards.
        field.dlog(field.one())?;
        Ok(MultiplicativeCharacter {
            descriptor: descriptor.clone(),
            kind: MultiplicativeKind::DlogPower { k },
        })
    }

    pub fn valuation_parity(descriptor: &FieldDescriptor, places: Vec<Place>) -> Result<Self> {
        for place in &places {
            match (descriptor, place) {
                (FieldDescriptor::Rational, Place::Prime(p)) if is_prime(*p) => {}
                (FieldDescriptor::RationalFunction(k), Place::Irreducible(f))
                    if is_monic_irreducible(k.p(), f) => {}
                _ => {
                    return Err(Error::Unsupported(format!(
                        "place {place:?} on {descriptor}"
                    )))
                }
            }
        }
        Ok(MultiplicativeCharacter {
            descriptor: descriptor.clone(),
            kind: MultiplicativeKind::ValuationParity { places },
        })
    }

    pub fn sign() -> Self {
        MultiplicativeCharacter {
            descriptor: FieldDescriptor::Rational,
            kind: MultiplicativeKind::Sign,
        }
    }

    /// Parses `trivial`, `dlog:k=<int>`, `valpar:S=<list>` or `sign`.
    pub fn parse(descriptor: &FieldDescriptor, lit: &str) -> Result<Self> {
        let (head, params) = split_literal(lit)?;
        let get = |key: &str| -> Result<&str> {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::parse(format!("`{lit}` lacks `{key}=`")))
        };
        match head {
            "trivial" => Ok(MultiplicativeCharacter::trivial(descriptor)),
            "dlog" => {
                let k = get("k")?
                    .parse()
                    .map_err(|_| Error::parse(format!("bad k in `{lit}`")))?;
                MultiplicativeCharacter::dlog_power(descriptor, k)
            }
            "valpar" => {
                let mut places = Vec::new();
                for item in get("S")?.split(',').filter(|s| !s.trim().is_empty()) {
                    places.push(match descriptor {
                        FieldDescriptor::RationalFunction(k) => {
                            Place::Irreducible(parse_poly(k.prime_field(), item, "t")?)
                        }
                        _ => Place::Prime(
                            item.trim()
                                .parse()
                                .map_err(|_| Error::parse(format!("bad prime `{item}`")))?,
                        ),
                    });
                }
                MultiplicativeCharacter::valuation_parity(descriptor, places)
            }
            "sign" if descriptor.is_rational() => Ok(MultiplicativeCharacter::sign()),
            "sign" => Err(Error::DescriptorMismatch(
                "Q".into(),
                descriptor.to_string(),
            )),
            _ => Err(Error::parse(format!(
                "unknown multiplicative character `{lit}`"
            ))),
        }
    }

    pub fn descriptor(&self) -> &FieldDescriptor {
        &self.descriptor
    }

    pub fn kind(&self) -> &MultiplicativeKind {
        &self.kind
    }

    pub fn is_trivial(&self) -> bool {
        match &self.kind {
            MultiplicativeKind::Trivial => true,
            MultiplicativeKind::DlogPower { k } => {
                let q = self.descriptor.finite().expect("finite").order() as i64;
                k.rem_euclid(q - 1) == 0
            }
            MultiplicativeKind::ValuationParity { places } => places.is_empty(),
            MultiplicativeKind::Sign => false,
        }
    }

    pub fn eval(&self, x: &FieldElement) -> Result<UnitValue> {
        if x.descriptor() != &self.descriptor {
            return Err(Error::DescriptorMismatch(
                self.descriptor.to_string(),
                x.descriptor().to_string(),
            ));
        }
        Ok(UnitValue::root(self.root(x.value())?))
    }

    /// Evaluation on a bare payload; errors with `ZeroArgument` at zero.
    pub fn root(&self, x: &Value) -> Result<RootOfUnity> {
        if self.descriptor.is_zero(x) {
            return Err(Error::ZeroArgument);
        }
        match (&self.kind, &self.descriptor, x) {
            (MultiplicativeKind::Trivial, _, _) => Ok(RootOfUnity::one()),
            (MultiplicativeKind::DlogPower { k }, FieldDescriptor::Finite(f), Value::Finite(a)) => {
                let m = f.order() - 1;
                let j = f.dlog(*a)? as i128;
                let e = (j * *k as i128).rem_euclid(m as i128);
                Ok(RootOfUnity::new(m, e as i64))
            }
            (MultiplicativeKind::ValuationParity { places }, _, _) => {
                let mut total = 0i64;
                for place in places {
                    total += match (place, x) {
                        (Place::Prime(p), Value::Rational(r)) => rational_valuation(r, *p),
                        (Place::Irreducible(pi), Value::RatFunc(f)) => self
                            .descriptor
                            .rational_function()
                            .expect("checked at construction")
                            .valuation(f, pi)?,
                        _ => unreachable!("places are checked at construction"),
                    };
                }
                Ok(RootOfUnity::sign(total.rem_euclid(2) == 1))
            }
            (MultiplicativeKind::Sign, _, Value::Rational(r)) => {
                Ok(RootOfUnity::sign(r.is_negative()))
            }
            _ => Err(Error::DescriptorMismatch(
                self.descriptor.to_string(),
                format!("{x:?}"),
            )),
        }
    }
}

impl fmt::Display for MultiplicativeCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MultiplicativeKind::Trivial => write!(f, "trivial"),
            MultiplicativeKind::DlogPower { k } => write!(f, "dlog:k={k}"),
            MultiplicativeKind::ValuationParity { places } => {
                let s: Vec<String> = places
                    .iter()
                    .map(|pl| match (pl, &self.descriptor) {
                        (Place::Prime(p), _) => p.to_string(),
                        (Place::Irreducible(g), FieldDescriptor::RationalFunction(k)) => {
                            g.format(k.prime_field(), "t")
                        }
                        (Place::Irreducible(g), _) => format!("{g:?}"),
                    })
                    .collect();
                write!(f, "valpar:S={}", s.join(","))
            }
            MultiplicativeKind::Sign => write!(f, "sign"),
        }
    }
}

/// The exponent of `p` in a nonzero rational.
pub fn rational_valuation(r: &BigRational, p: u64) -> i64 {
    let p = BigInt::from(p);
    let count = |n: &BigInt| -> i64 {
        let mut n = n.abs();
        let mut k = 0;
        while !n.is_zero() && n.is_multiple_of(&p) {
            n /= &p;
            k += 1;
        }
        k
    };
    count(r.numer()) - count(r.denom())
}

fn is_monic_irreducible(p: u64, f: &FpPoly) -> bool {
    let Some(d) = f.degree() else { return false };
    if d == 0 || *f.leading().expect("nonzero") != 1 {
        return false;
    }
    monic_irreducibles(p, d).is_ok_and(|v| v.contains(f))
}

/// Splits `head:key=value:key=value`; element values may not contain `:`.
fn split_literal(lit: &str) -> Result<(&str, Vec<(&str, &str)>)> {
    let mut parts = lit.trim().split(':');
    let head = parts.next().unwrap_or("").trim();
    if head.is_empty() {
        return Err(Error::parse("empty character literal"));
    }
    let params = parts
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse(format!("bad parameter `{kv}` in `{lit}`")))
        })
        .collect::<Result<_>>()?;
    Ok((head, params))
}

/// All `q` additive characters of a finite field, `xi_beta` for `beta` in
/// enumeration order.
#[derive(Debug, Clone)]
pub struct FiniteDual {
    characters: Vec<AdditiveCharacter>,
}

impl FiniteDual {
    pub fn new(descriptor: &FieldDescriptor, cap: u64) -> Result<Self> {
        let characters = descriptor
            .enumerate_finite(cap)?
            .iter()
            .map(AdditiveCharacter::trace)
            .collect::<Result<_>>()?;
        Ok(FiniteDual { characters })
    }

    pub fn characters(&self) -> &[AdditiveCharacter] {
        &self.characters
    }

    /// `(1/q) sum_beta xi_beta(x)`, which is `[x = 0]`.
    pub fn average_at(&self, x: &FieldElement) -> Result<Cyclotomic> {
        let q = self.characters.len() as u64;
        let p = x.descriptor().characteristic();
        let mut acc = Cyclotomic::zero(p);
        let w = BigRational::new(BigInt::one(), BigInt::from(q));
        for xi in &self.characters {
            match xi.phase(x.value())? {
                Phase::Root(r) => acc.add_root(r, &w),
                Phase::Numeric(_) => unreachable!("trace characters are exact"),
            }
        }
        Ok(acc)
    }
}
