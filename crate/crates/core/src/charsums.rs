//! Kloosterman, Følner-Kloosterman, twisted power and inverse-character sums.
//!
//! Every average runs over the support with zero removed and the remaining
//! mass renormalized. Summands are evaluated in parallel and reduced serially
//! in support order, so results do not depend on the thread count.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::characters::{AdditiveCharacter, MultiplicativeCharacter, Phase};
use crate::cyclotomic::{
    lcm_capped, rational_to_f64, Cyclotomic, RootOfUnity, UnitValue, ORDER_CAP,
};
use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, Value};
use crate::finite::{FiniteField, FqElem};
use crate::folner::{FolnerRecipe, WeightedSet};
use crate::scalar::Field;

#[derive(Debug, Clone)]
pub struct SumTerm {
    pub k: usize,
    pub support_size: usize,
    pub value: UnitValue,
    /// `q_k` when the index is a finite tower level.
    pub level_order: Option<u64>,
}

impl SumTerm {
    pub fn exact(&self) -> bool {
        self.value.is_exact()
    }

    pub fn complex(&self) -> Complex64 {
        self.value.embed()
    }

    pub fn abs(&self) -> f64 {
        self.complex().norm()
    }

    /// `|term| * (q-1)/q`: the same sum divided by `q_k` instead of `q_k - 1`.
    pub fn level_normalized_abs(&self) -> Option<f64> {
        self.level_order
            .map(|q| self.abs() * (q - 1) as f64 / q as f64)
    }
}

#[derive(Debug, Clone)]
pub struct SumSeries {
    pub terms: Vec<SumTerm>,
    /// Characters, weights and exponents.
    pub spec: String,
    /// Recipe literal the sets came from.
    pub provenance: String,
}

impl SumSeries {
    pub fn all_exact(&self) -> bool {
        self.terms.iter().all(SumTerm::exact)
    }
}

/// `sum_a mu(a) f(a)` over the support without zero, renormalized.
pub fn weighted_average<G>(set: &WeightedSet, f: G) -> Result<UnitValue>
where
    G: Fn(&Value) -> Result<Phase> + Sync,
{
    let set = set.drop_zero()?;
    let phases: Vec<Phase> = set
        .entries()
        .par_iter()
        .map(|(v, _)| f(v))
        .collect::<Result<_>>()?;
    accumulate(set.entries().iter().map(|(_, w)| w), &phases)
}

fn accumulate<'a>(
    weights: impl Iterator<Item = &'a BigRational>,
    phases: &[Phase],
) -> Result<UnitValue> {
    let roots: Option<Vec<RootOfUnity>> = phases
        .iter()
        .map(|p| match p {
            Phase::Root(r) => Some(*r),
            Phase::Numeric(_) => None,
        })
        .collect();
    match roots {
        Some(roots) => {
            let mut m = 1;
            for r in &roots {
                m = lcm_capped(m, r.order(), ORDER_CAP)?;
            }
            // Group weights per exponent first, then fold into the cyclotomic value.
            let mut by_exp: BTreeMap<u64, BigRational> = BTreeMap::new();
            for (r, w) in roots.iter().zip(weights) {
                *by_exp.entry(r.exp_at(m)).or_insert_with(BigRational::zero) += w;
            }
            let mut acc = Cyclotomic::zero(m);
            for (e, w) in by_exp {
                acc.add_root(RootOfUnity::new(m, e as i64), &w);
            }
            Ok(UnitValue::Exact(acc))
        }
        None => {
            let mut z = Complex64::new(0.0, 0.0);
            for (ph, w) in phases.iter().zip(weights) {
                z += ph.embed() * rational_to_f64(w);
            }
            Ok(UnitValue::Numeric(z))
        }
    }
}

#[derive(Debug, Clone)]
pub struct KloostermanSum {
    pub exact: Cyclotomic,
    pub value: Complex64,
    /// `|K| / (2 sqrt q)` when both parameters are nonzero.
    pub weil_ratio: Option<f64>,
}

/// `K(b1, b2) = sum_{a != 0} z_p^Tr(b1 a + b2 / a)`.
pub fn kloosterman_classical(
    field: &FiniteField,
    b1: FqElem,
    b2: FqElem,
    cap: u64,
) -> Result<KloostermanSum> {
    let p = field.p();
    let mut counts = vec![0u64; p as usize];
    for a in field.enumerate(cap)?.skip(1) {
        let ai = field.inv(&a)?;
        let e = (field.trace(field.mul(&b1, &a)) + field.trace(field.mul(&b2, &ai))) % p;
        counts[e as usize] += 1;
    }
    let exact = Cyclotomic::from_coeffs(
        counts
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect(),
    );
    let value = exact.embed();
    let weil_ratio =
        (b1.0 != 0 && b2.0 != 0).then(|| value.norm() / (2.0 * (field.order() as f64).sqrt()));
    Ok(KloostermanSum {
        exact,
        value,
        weil_ratio,
    })
}

fn check_on(recipe_field: &FieldDescriptor, own: &FieldDescriptor) -> Result<()> {
    if recipe_field != own {
        return Err(Error::DescriptorMismatch(
            recipe_field.to_string(),
            own.to_string(),
        ));
    }
    Ok(())
}

fn series<G>(recipe: &FolnerRecipe, k_max: usize, cap: u64, spec: String, f: G) -> Result<SumSeries>
where
    G: Fn(&Value) -> Result<Phase> + Sync,
{
    let last = recipe.level_count().map_or(k_max, |n| n.min(k_max));
    let mut terms = Vec::with_capacity(last);
    for k in 1..=last {
        let set = recipe.realize(k, cap)?;
        let support_size = set.drop_zero()?.support_size();
        terms.push(SumTerm {
            k,
            support_size,
            value: weighted_average(&set, &f)?,
            level_order: recipe.level_order(k),
        });
    }
    Ok(SumSeries {
        terms,
        spec,
        provenance: recipe.to_string(),
    })
}

/// Term `k` is `sum_{a != 0} mu_k(a) xi1(a) xi2(1/a)`.
pub fn folner_kloosterman_series(
    recipe: &FolnerRecipe,
    xi1: &AdditiveCharacter,
    xi2: &AdditiveCharacter,
    k_max: usize,
    cap: u64,
) -> Result<SumSeries> {
    let field = recipe.descriptor()?;
    check_on(&field, xi1.descriptor())?;
    check_on(&field, xi2.descriptor())?;
    let spec = format!("xi1={xi1}; xi2={xi2}");
    series(recipe, k_max, cap, spec, |a| {
        xi1.phase(a)?.mul(&xi2.phase(&field.inv(a)?)?)
    })
}

/// `eta` together with the factors `(xi_i, n_i)`.
#[derive(Debug, Clone)]
pub struct TwistSpec {
    eta: MultiplicativeCharacter,
    factors: Vec<(AdditiveCharacter, i64)>,
}

impl TwistSpec {
    pub fn new(
        eta: MultiplicativeCharacter,
        factors: Vec<(AdditiveCharacter, i64)>,
    ) -> Result<Self> {
        let p = eta.descriptor().characteristic();
        for (xi, n) in &factors {
            check_on(eta.descriptor(), xi.descriptor())?;
            if *n == 0 {
                return Err(Error::BadWeight(0));
            }
            if p != 0 && n.rem_euclid(p as i64) == 0 {
                return Err(Error::CharDividesN { p, n: *n });
            }
        }
        Ok(TwistSpec { eta, factors })
    }

    pub fn eta(&self) -> &MultiplicativeCharacter {
        &self.eta
    }

    pub fn factors(&self) -> &[(AdditiveCharacter, i64)] {
        &self.factors
    }

    /// Positions `i` with `n_i > 0`.
    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.factors.len())
            .filter(|&i| self.factors[i].1 > 0)
            .collect()
    }
}

/// Term `k` is `sum_{a != 0} mu_k(a) eta(a) prod_i xi_i(a^n_i)`.
pub fn twisted_power_series(
    recipe: &FolnerRecipe,
    spec: &TwistSpec,
    k_max: usize,
    cap: u64,
) -> Result<SumSeries> {
    let field = recipe.descriptor()?;
    check_on(&field, spec.eta.descriptor())?;
    let ns: Vec<String> = spec
        .factors
        .iter()
        .map(|(xi, n)| format!("({xi}, {n})"))
        .collect();
    let text = format!("eta={}; factors={}", spec.eta, ns.join(" "));
    series(recipe, k_max, cap, text, |a| {
        let mut acc = Phase::Root(spec.eta.root(a)?);
        for (xi, n) in &spec.factors {
            acc = acc.mul(&xi.phase(&field.pow(a, *n)?)?)?;
        }
        Ok(acc)
    })
}

/// Term `k` is `sum_{a != 0} mu_k(a) xi(1/a)`; returns the series and the
/// largest `|term|` over its final third.
pub fn inverse_character_series(
    recipe: &FolnerRecipe,
    xi: &AdditiveCharacter,
    k_max: usize,
    cap: u64,
) -> Result<(SumSeries, f64)> {
    let field = recipe.descriptor()?;
    check_on(&FieldDescriptor::Rational, &field)?;
    check_on(&field, xi.descriptor())?;
    if !matches!(recipe, FolnerRecipe::DilatedBoxAverage { .. }) {
        return Err(Error::Unsupported(format!(
            "inverse series need a dilated box recipe, got {recipe}"
        )));
    }
    let s = series(recipe, k_max, cap, format!("xi={xi}"), |a| {
        xi.phase(&field.inv(a)?)
    })?;
    let floor = decay_report(&s)?.max_tail;
    Ok((s, floor))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    /// Largest `|term|` over the final third of the indices.
    pub max_tail: f64,
    pub last: f64,
    /// Fraction of consecutive steps with `|term_(k+1)| <= |term_k|`.
    pub monotone_fraction: f64,
}

pub fn decay_report(s: &SumSeries) -> Result<DecayReport> {
    let n = s.terms.len();
    if n < 3 {
        return Err(Error::TooShort(n));
    }
    let abs: Vec<f64> = s.terms.iter().map(SumTerm::abs).collect();
    let tail_len = n.div_ceil(3);
    let max_tail = abs[n - tail_len..].iter().cloned().fold(0.0, f64::max);
    let steps = abs.windows(2).filter(|w| w[1] <= w[0]).count();
    Ok(DecayReport {
        max_tail,
        last: abs[n - 1],
        monotone_fraction: steps as f64 / (n - 1) as f64,
    })
}

/// Whether every term is exactly one.
pub fn identically_one(s: &SumSeries) -> bool {
    let one = Cyclotomic::from_rational(BigRational::one());
    s.terms.iter().all(|t| match &t.value {
        UnitValue::Exact(c) => *c == one,
        UnitValue::Numeric(z) => (z - Complex64::new(1.0, 0.0)).norm() < 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folner::DEFAULT_CAP;
    use crate::scalar::rat;

    #[test]
    fn kloosterman_small_cases() {
        let f3 = FiniteField::new(3, 1).unwrap();
        let k = kloosterman_classical(&f3, FqElem(0), FqElem(0), DEFAULT_CAP).unwrap();
        assert_eq!(k.exact.to_rational(), Some(rat(2, 1)));
        let k = kloosterman_classical(&f3, FqElem(1), FqElem(1), DEFAULT_CAP).unwrap();
        assert_eq!(k.exact.to_rational(), Some(rat(-1, 1)));
        let f25 = FiniteField::new(5, 2).unwrap();
        let k = kloosterman_classical(&f25, FqElem(1), f25.generator(), DEFAULT_CAP).unwrap();
        assert!(k.weil_ratio.unwrap() <= 1.0);
    }

    #[test]
    fn trivial_characters_give_ones() {
        let recipe = FolnerRecipe::parse(None, "addbox:d=3:R=5").unwrap();
        let q = FieldDescriptor::Rational;
        let t = AdditiveCharacter::trivial(&q);
        let s = folner_kloosterman_series(&recipe, &t, &t, 3, DEFAULT_CAP).unwrap();
        assert!(identically_one(&s));
        assert!(s.all_exact());
    }

    #[test]
    fn decay_report_examples() {
        let mk = |vals: &[i64]| SumSeries {
            terms: vals
                .iter()
                .enumerate()
                .map(|(i, &v)| SumTerm {
                    k: i + 1,
                    support_size: 1,
                    value: UnitValue::Exact(Cyclotomic::from_rational(rat(1, v))),
                    level_order: None,
                })
                .collect(),
            spec: String::new(),
            provenance: String::new(),
        };
        let r = decay_report(&mk(&[1, 1, 1])).unwrap();
        assert_eq!(r.max_tail, 1.0);
        let r = decay_report(&mk(&[1, 2, 4])).unwrap();
        assert_eq!(r.monotone_fraction, 1.0);
        assert!(matches!(
            decay_report(&mk(&[1, 2])),
            Err(Error::TooShort(2))
        ));
    }
}
