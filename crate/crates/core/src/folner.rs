//! Weighted Følner sets over the supported fields and their invariance defects.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, Value};
use crate::finite::{FiniteField, TowerMap};
use crate::poly::Poly;
use crate::ratfunc::{monic_irreducibles, FpPoly};
use crate::scalar::{format_rational, is_prime, Field};

/// Default bound on the number of elements any brute-force step may touch.
pub const DEFAULT_CAP: u64 = 1 << 24;

/// A finitely supported probability measure; entries are sorted and distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSet {
    descriptor: FieldDescriptor,
    entries: Vec<(Value, BigRational)>,
}

impl WeightedSet {
    /// Merges repeated points by adding weights; the total must be exactly one.
    pub fn new(
        descriptor: &FieldDescriptor,
        entries: impl IntoIterator<Item = (Value, BigRational)>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<Value, BigRational> = BTreeMap::new();
        for (v, w) in entries {
            if !w.is_positive() {
                return Err(Error::Unsupported(format!(
                    "non-positive weight {}",
                    format_rational(&w)
                )));
            }
            *merged.entry(v).or_insert_with(BigRational::zero) += w;
        }
        let set = WeightedSet {
            descriptor: descriptor.clone(),
            entries: merged.into_iter().collect(),
        };
        if set.entries.is_empty() {
            return Err(Error::EmptyAfterDrop);
        }
        if !set.total_mass().is_one() {
            return Err(Error::Unsupported(format!(
                "total mass {} is not 1",
                format_rational(&set.total_mass())
            )));
        }
        Ok(set)
    }

    /// Uniform measure on the distinct values given.
    pub fn uniform(descriptor: &FieldDescriptor, values: Vec<Value>) -> Result<Self> {
        let mut values = values;
        values.sort();
        values.dedup();
        if values.is_empty() {
            return Err(Error::EmptyAfterDrop);
        }
        let w = BigRational::new(BigInt::one(), BigInt::from(values.len()));
        Ok(WeightedSet {
            descriptor: descriptor.clone(),
            entries: values.into_iter().map(|v| (v, w.clone())).collect(),
        })
    }

    pub fn descriptor(&self) -> &FieldDescriptor {
        &self.descriptor
    }

    pub fn entries(&self) -> &[(Value, BigRational)] {
        &self.entries
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn total_mass(&self) -> BigRational {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    pub fn weight(&self, v: &Value) -> Option<&BigRational> {
        self.entries
            .binary_search_by(|(x, _)| x.cmp(v))
            .ok()
            .map(|i| &self.entries[i].1)
    }

    pub fn contains_zero(&self) -> bool {
        self.weight(&self.descriptor.zero()).is_some()
    }

    /// Removes zero and rescales the remaining mass to one.
    pub fn drop_zero(&self) -> Result<Self> {
        let zero = self.descriptor.zero();
        let Some(w0) = self.weight(&zero) else {
            return Ok(self.clone());
        };
        let rest = BigRational::one() - w0;
        if rest.is_zero() {
            return Err(Error::EmptyAfterDrop);
        }
        Ok(WeightedSet {
            descriptor: self.descriptor.clone(),
            entries: self
                .entries
                .iter()
                .filter(|(v, _)| *v != zero)
                .map(|(v, w)| (v.clone(), w / &rest))
                .collect(),
        })
    }

    /// Pushforward under `f`, merging collisions.
    pub fn pushforward(&self, f: impl Fn(&Value) -> Result<Value>) -> Result<Self> {
        let mut out = Vec::with_capacity(self.entries.len());
        for (v, w) in &self.entries {
            out.push((f(v)?, w.clone()));
        }
        WeightedSet::new(&self.descriptor, out)
    }
}

/// What to do with zero in the support of a multiplicative experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroPolicy {
    #[default]
    Error,
    /// Drop zero and renormalize the remaining mass.
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectMode {
    Additive,
    Multiplicative,
    Inversion,
}

/// How box parameters grow with the index `k` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Grow {
    /// Only the range grows: `R_k = R * 2^(k-1)` over `Q`, `R + k - 1` over `F_p(t)`.
    #[default]
    Range,
    /// The exponent bound grows too: `E_k = E + k - 1`, `d_k = prod p^E_k`,
    /// and the range grows with `d_k^2`.
    ExponentAndRange,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FolnerRecipe {
    /// Uniform measure on `F_{p^n_k}`, realized inside `F_{p^n_last}`.
    SubfieldTower { p: u64, schedule: Vec<u32> },
    /// Uniform on `{j/d : 1 <= |j| <= R}` over `Q`, or `{g/d : g != 0, deg g < R}` over `F_p(t)`.
    AdditiveBox {
        field: FieldDescriptor,
        d: Value,
        r: u64,
    },
    /// Equal-weight average over `u` in the exponent box of the boxes `u * AdditiveBox`.
    DilatedBoxAverage {
        field: FieldDescriptor,
        p_bound: u64,
        e: u32,
        r: u64,
        grow: Grow,
    },
}

impl FolnerRecipe {
    pub fn tower(p: u64, schedule: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if schedule.is_empty() || schedule[0] == 0 {
            return Err(Error::parse(
                "tower schedule must start with a positive degree",
            ));
        }
        if schedule
            .windows(2)
            .any(|w| w[1] % w[0] != 0 || w[1] == w[0])
        {
            return Err(Error::parse(format!(
                "tower schedule {schedule:?} is not a strict divisibility chain"
            )));
        }
        Ok(FolnerRecipe::SubfieldTower { p, schedule })
    }

    pub fn additive_box(field: &FieldDescriptor, d: Value, r: u64) -> Result<Self> {
        if r == 0 {
            return Err(Error::parse("box range must be positive"));
        }
        match (field, &d) {
            (FieldDescriptor::Rational, Value::Rational(x))
                if x.is_integer() && x.is_positive() => {}
            (FieldDescriptor::RationalFunction(_), Value::RatFunc(f))
                if f.is_polynomial() && !f.num().is_zero() => {}
            _ => return Err(Error::parse(format!("bad box denominator for {field}"))),
        }
        Ok(FolnerRecipe::AdditiveBox {
            field: field.clone(),
            d,
            r,
        })
    }

    /// `d`, when supplied, must equal `prod_{p <= P} p^E`.
    pub fn dilated_box(
        field: &FieldDescriptor,
        p_bound: u64,
        e: u32,
        d: Option<Value>,
        r: u64,
        grow: Grow,
    ) -> Result<Self> {
        if r == 0 || p_bound < 1 {
            return Err(Error::parse("dilated box needs positive P and R"));
        }
        let recipe = FolnerRecipe::DilatedBoxAverage {
            field: field.clone(),
            p_bound,
            e,
            r,
            grow,
        };
        let places = recipe.places()?;
        if places.is_empty() {
            return Err(Error::parse(format!("no primes up to P = {p_bound}")));
        }
        if let Some(d) = d {
            let expected = place_power(field, &places, e as i64);
            if d != expected {
                return Err(Error::parse(format!(
                    "d = {} but prod p^E = {}",
                    field.format(&d),
                    field.format(&expected)
                )));
            }
        }
        Ok(recipe)
    }

    /// Parses `tower:p=2:sched=1,2,4`, `addbox:d=720:R=100` or
    /// `dilbox:P=3:E=2:d=36:R=100[:grow=R|ER]` against a field.
    pub fn parse(field: Option<&FieldDescriptor>, lit: &str) -> Result<Self> {
        let mut parts = lit.trim().split(':');
        let head = parts.next().unwrap_or("");
        let params: BTreeMap<&str, &str> = parts
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| Error::parse(format!("bad parameter `{kv}` in `{lit}`")))
            })
            .collect::<Result<_>>()?;
        let get = |k: &str| {
            params
                .get(k)
                .copied()
                .ok_or_else(|| Error::parse(format!("`{lit}` lacks `{k}=`")))
        };
        let num = |k: &str| -> Result<u64> {
            get(k)?
                .parse()
                .map_err(|_| Error::parse(format!("bad `{k}` in `{lit}`")))
        };
        let field_or_q = field.cloned().unwrap_or(FieldDescriptor::Rational);
        match head {
            "tower" => {
                let sched = get("sched")?
                    .split(',')
                    .map(|s| s.trim().parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::parse(format!("bad schedule in `{lit}`")))?;
                let recipe = FolnerRecipe::tower(num("p")?, sched)?;
                if let Some(f) = field {
                    if *f != recipe.descriptor()? {
                        return Err(Error::DescriptorMismatch(
                            recipe.descriptor()?.to_string(),
                            f.to_string(),
                        ));
                    }
                }
                Ok(recipe)
            }
            "addbox" => {
                let d = field_or_q.parse_value(get("d")?)?;
                FolnerRecipe::additive_box(&field_or_q, d, num("R")?)
            }
            "dilbox" => {
                let d = params
                    .get("d")
                    .map(|s| field_or_q.parse_value(s))
                    .transpose()?;
                let grow = match params.get("grow").copied() {
                    None | Some("R") => Grow::Range,
                    Some("ER") => Grow::ExponentAndRange,
                    Some(g) => return Err(Error::parse(format!("bad grow `{g}`"))),
                };
                let e = num("E")? as u32;
                FolnerRecipe::dilated_box(&field_or_q, num("P")?, e, d, num("R")?, grow)
            }
            _ => Err(Error::parse(format!("unknown recipe `{lit}`"))),
        }
    }

    /// The field the realized sets live in.
    pub fn descriptor(&self) -> Result<FieldDescriptor> {
        Ok(match self {
            FolnerRecipe::SubfieldTower { p, schedule } => FieldDescriptor::Finite(
                FiniteField::new(*p, *schedule.last().expect("nonempty schedule"))?,
            ),
            FolnerRecipe::AdditiveBox { field, .. }
            | FolnerRecipe::DilatedBoxAverage { field, .. } => field.clone(),
        })
    }

    /// Number of available indices; `None` when unbounded.
    pub fn level_count(&self) -> Option<usize> {
        match self {
            FolnerRecipe::SubfieldTower { schedule, .. } => Some(schedule.len()),
            _ => None,
        }
    }

    /// `q_k` for tower recipes.
    pub fn level_order(&self, k: usize) -> Option<u64> {
        match self {
            FolnerRecipe::SubfieldTower { p, schedule } => {
                schedule.get(k.checked_sub(1)?).map(|&n| p.pow(n))
            }
            _ => None,
        }
    }

    fn places(&self) -> Result<Vec<Value>> {
        let FolnerRecipe::DilatedBoxAverage { field, p_bound, .. } = self else {
            return Ok(Vec::new());
        };
        Ok(match field {
            FieldDescriptor::Rational => (2..=*p_bound)
                .filter(|&p| is_prime(p))
                .map(|p| field.from_i64(p as i64))
                .collect(),
            FieldDescriptor::RationalFunction(k) => monic_irreducibles(k.p(), *p_bound as usize)?
                .into_iter()
                .map(|f| Value::RatFunc(k.from_poly(f)))
                .collect(),
            FieldDescriptor::Finite(_) => {
                return Err(Error::Unsupported(
                    "dilated boxes over a finite field".into(),
                ))
            }
        })
    }

    /// Parameters `(E_k, d_k, R_k)` used at index `k`.
    pub fn box_parameters(&self, k: usize) -> Result<(u32, Value, u64)> {
        if k == 0 {
            return Err(Error::parse("indices start at 1"));
        }
        let step = (k - 1) as u32;
        let too_big = || Error::CapExceeded {
            size: u128::MAX,
            cap: DEFAULT_CAP,
        };
        match self {
            FolnerRecipe::AdditiveBox { field, d, r } => {
                let rk = match field {
                    FieldDescriptor::Rational => {
                        r.checked_mul(1u64.checked_shl(step).ok_or_else(too_big)?)
                    }
                    _ => r.checked_add(step as u64),
                }
                .ok_or_else(too_big)?;
                Ok((0, d.clone(), rk))
            }
            FolnerRecipe::DilatedBoxAverage {
                field, e, r, grow, ..
            } => {
                let places = self.places()?;
                let (ek, rk) = match (grow, field) {
                    (Grow::Range, FieldDescriptor::Rational) => (
                        *e,
                        r.checked_mul(1u64.checked_shl(step).ok_or_else(too_big)?),
                    ),
                    (Grow::Range, _) => (*e, r.checked_add(step as u64)),
                    (Grow::ExponentAndRange, FieldDescriptor::Rational) => {
                        let prod: u64 = places.iter().map(value_as_u64).product();
                        let f = prod.checked_pow(2 * step).ok_or_else(too_big)?;
                        (*e + step, r.checked_mul(f))
                    }
                    (Grow::ExponentAndRange, _) => {
                        let deg: u64 = places.iter().map(value_degree).sum();
                        (*e + step, r.checked_add(2 * deg * step as u64))
                    }
                };
                let rk = rk.ok_or_else(too_big)?;
                Ok((ek, place_power(field, &places, ek as i64), rk))
            }
            FolnerRecipe::SubfieldTower { .. } => Err(Error::Unsupported(
                "tower recipes have no box parameters".into(),
            )),
        }
    }

    /// The weighted set at index `k` (1-based).
    pub fn realize(&self, k: usize, cap: u64) -> Result<WeightedSet> {
        if k == 0 {
            return Err(Error::parse("indices start at 1"));
        }
        match self {
            FolnerRecipe::SubfieldTower { p, schedule } => {
                let n = *schedule
                    .get(k - 1)
                    .ok_or_else(|| Error::parse(format!("index {k} beyond the schedule")))?;
                let top = FiniteField::new(*p, *schedule.last().expect("nonempty"))?;
                let level = FiniteField::new(*p, n)?;
                let image = TowerMap::new(&level, &top)?.image(cap)?;
                WeightedSet::uniform(
                    &FieldDescriptor::Finite(top),
                    image.into_iter().map(Value::Finite).collect(),
                )
            }
            FolnerRecipe::AdditiveBox { field, .. } => {
                let (_, d, rk) = self.box_parameters(k)?;
                let dinv = field.inv(&d)?;
                let nums = box_numerators(field, rk, cap)?;
                WeightedSet::uniform(field, nums.iter().map(|g| field.mul(g, &dinv)).collect())
            }
            FolnerRecipe::DilatedBoxAverage { field, .. } => {
                let (ek, dk, rk) = self.box_parameters(k)?;
                let places = self.places()?;
                let dims = places.len() as u32;
                let side = 2 * ek as u64 + 1;
                let units = side.checked_pow(dims).ok_or(Error::CapExceeded {
                    size: u128::MAX,
                    cap,
                })?;
                let nums = box_numerators(field, rk, cap)?;
                let size = units as u128 * nums.len() as u128;
                if size > cap as u128 {
                    return Err(Error::CapExceeded { size, cap });
                }
                let dinv = field.inv(&dk)?;
                let w = BigRational::new(BigInt::one(), BigInt::from(size));
                let mut entries = Vec::with_capacity(size as usize);
                for idx in 0..units {
                    let mut u = dinv.clone();
                    let mut rest = idx;
                    for place in &places {
                        let e = (rest % side) as i64 - ek as i64;
                        rest /= side;
                        u = field.mul(&u, &field.pow(place, e)?);
                    }
                    for g in &nums {
                        entries.push((field.mul(&u, g), w.clone()));
                    }
                }
                WeightedSet::new(field, entries)
            }
        }
    }
}

impl fmt::Display for FolnerRecipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FolnerRecipe::SubfieldTower { p, schedule } => {
                let s: Vec<String> = schedule.iter().map(|n| n.to_string()).collect();
                write!(f, "tower:p={p}:sched={}", s.join(","))
            }
            FolnerRecipe::AdditiveBox { field, d, r } => {
                write!(f, "addbox:d={}:R={r}", field.format(d))
            }
            FolnerRecipe::DilatedBoxAverage {
                field,
                p_bound,
                e,
                r,
                grow,
            } => {
                let d = self
                    .places()
                    .map(|pl| field.format(&place_power(field, &pl, *e as i64)))
                    .unwrap_or_default();
                let g = match grow {
                    Grow::Range => "R",
                    Grow::ExponentAndRange => "ER",
                };
                write!(f, "dilbox:P={p_bound}:E={e}:d={d}:R={r}:grow={g}")
            }
        }
    }
}

fn value_as_u64(v: &Value) -> u64 {
    match v {
        Value::Rational(r) => u64::try_from(r.to_integer()).expect("small prime"),
        _ => unreachable!("integer places only over Q"),
    }
}

fn value_degree(v: &Value) -> u64 {
    match v {
        Value::RatFunc(f) => f.num().degree().unwrap_or(0) as u64,
        _ => unreachable!("polynomial places only over F_p(t)"),
    }
}

fn place_power(field: &FieldDescriptor, places: &[Value], e: i64) -> Value {
    places.iter().fold(field.one(), |acc, p| {
        field.mul(&acc, &field.pow(p, e).expect("places are nonzero"))
    })
}

/// `{±1, ..., ±R}` over `Q`; nonzero polynomials of degree `< R` over `F_p(t)`.
fn box_numerators(field: &FieldDescriptor, r: u64, cap: u64) -> Result<Vec<Value>> {
    match field {
        FieldDescriptor::Rational => {
            let size = 2 * r as u128;
            if size > cap as u128 {
                return Err(Error::CapExceeded { size, cap });
            }
            let ri = r as i64;
            Ok((-ri..=ri)
                .filter(|&j| j != 0)
                .map(|j| field.from_i64(j))
                .collect())
        }
        FieldDescriptor::RationalFunction(k) => {
            let p = k.p();
            let size = (p as u128)
                .checked_pow(r as u32)
                .filter(|_| r < 128)
                .map_or(u128::MAX, |s| s - 1);
            if size > cap as u128 {
                return Err(Error::CapExceeded { size, cap });
            }
            Ok((1..=size as u64)
                .map(|idx| {
                    let mut c: Vec<u64> = Vec::with_capacity(r as usize);
                    let mut x = idx;
                    while x > 0 {
                        c.push(x % p);
                        x /= p;
                    }
                    let g: FpPoly = Poly::new(k.prime_field(), c);
                    Value::RatFunc(k.from_poly(g))
                })
                .collect())
        }
        FieldDescriptor::Finite(_) => Err(Error::Unsupported("boxes over a finite field".into())),
    }
}

/// Exact `sum_x |T mu(x) - mu(x)|` for translation by `a`, dilation by `a`,
/// or inversion (`a` ignored). The value lies in `[0, 2]`.
pub fn folner_defect(
    set: &WeightedSet,
    a: &Value,
    mode: DefectMode,
    zeros: ZeroPolicy,
) -> Result<BigRational> {
    let field = set.descriptor();
    let base = match mode {
        DefectMode::Additive => set.clone(),
        DefectMode::Multiplicative | DefectMode::Inversion => {
            if mode == DefectMode::Multiplicative && field.is_zero(a) {
                return Err(Error::ZeroArgument);
            }
            match (set.contains_zero(), zeros) {
                (true, ZeroPolicy::Error) => return Err(Error::ZeroInSupport),
                (true, ZeroPolicy::Drop) => set.drop_zero()?,
                (false, _) => set.clone(),
            }
        }
    };
    let moved = base.pushforward(|x| match mode {
        DefectMode::Additive => Ok(field.add(x, a)),
        DefectMode::Multiplicative => Ok(field.mul(x, a)),
        DefectMode::Inversion => field.inv(x),
    })?;
    Ok(l1_distance(&base, &moved))
}

/// `sum_x |mu(x) - nu(x)|`.
pub fn l1_distance(mu: &WeightedSet, nu: &WeightedSet) -> BigRational {
    let lookup: HashMap<&Value, &BigRational> = nu.entries.iter().map(|(v, w)| (v, w)).collect();
    let mut total = BigRational::zero();
    let mut shared = BigRational::zero();
    for (v, w) in &mu.entries {
        if let Some(w2) = lookup.get(v) {
            total += (w - *w2).abs();
            shared += *w2;
        } else {
            total += w;
        }
    }
    // Mass of nu off the support of mu.
    total + (BigRational::one() - shared)
}

/// Pushforward under `x -> 1/x`.
pub fn inverse_pushforward(set: &WeightedSet, zeros: ZeroPolicy) -> Result<WeightedSet> {
    let base = match (set.contains_zero(), zeros) {
        (true, ZeroPolicy::Error) => return Err(Error::ZeroInSupport),
        (true, ZeroPolicy::Drop) => set.drop_zero()?,
        (false, _) => set.clone(),
    };
    let field = base.descriptor().clone();
    base.pushforward(|x| field.inv(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn q() -> FieldDescriptor {
        FieldDescriptor::Rational
    }

    fn qv(n: i64, d: i64) -> Value {
        Value::Rational(rat(n, d))
    }

    #[test]
    fn tower_level_is_uniform_subfield() {
        let r = FolnerRecipe::parse(None, "tower:p=2:sched=1,2,4").unwrap();
        let f4 = r.realize(2, DEFAULT_CAP).unwrap();
        assert_eq!(f4.support_size(), 4);
        assert!(f4.entries().iter().all(|(_, w)| *w == rat(1, 4)));
        assert_eq!(f4.descriptor().to_string(), "F2^4");
    }

    #[test]
    fn additive_box_over_q() {
        let r = FolnerRecipe::parse(None, "addbox:d=2:R=4").unwrap();
        let s = r.realize(1, DEFAULT_CAP).unwrap();
        let support: Vec<Value> = s.entries().iter().map(|(v, _)| v.clone()).collect();
        let expect: Vec<Value> = [-4, -3, -2, -1, 1, 2, 3, 4]
            .iter()
            .map(|&j| qv(j, 2))
            .collect();
        assert_eq!(support, expect);
        assert!(s.entries().iter().all(|(_, w)| *w == rat(1, 8)));
    }

    #[test]
    fn dilated_box_merges_duplicates() {
        let r = FolnerRecipe::parse(None, "dilbox:P=2:E=1:d=2:R=2").unwrap();
        let s = r.realize(1, DEFAULT_CAP).unwrap();
        // u in {1/2, 1, 2} dilating {±1/2, ±1}: 12 grid points.
        let mut grid: BTreeMap<Value, BigRational> = BTreeMap::new();
        for u in [rat(1, 2), rat(1, 1), rat(2, 1)] {
            for j in [-2i64, -1, 1, 2] {
                *grid
                    .entry(Value::Rational(&u * rat(j, 2)))
                    .or_insert(rat(0, 1)) += rat(1, 12);
            }
        }
        let expect: Vec<(Value, BigRational)> = grid.into_iter().collect();
        assert_eq!(s.entries(), expect.as_slice());
        assert_eq!(s.weight(&qv(1, 2)), Some(&rat(1, 6)));
        assert!(FolnerRecipe::parse(None, "dilbox:P=2:E=1:d=4:R=2").is_err());
    }

    #[test]
    fn interval_shift_defect() {
        let n = 10;
        let s = WeightedSet::uniform(&q(), (1..=n).map(|j| qv(j, 1)).collect()).unwrap();
        let d = folner_defect(&s, &qv(1, 1), DefectMode::Additive, ZeroPolicy::Error).unwrap();
        assert_eq!(d, rat(2, n));
    }

    #[test]
    fn subfield_defects_vanish() {
        let r = FolnerRecipe::parse(None, "tower:p=2:sched=1,2,4").unwrap();
        let f16 = r.realize(3, DEFAULT_CAP).unwrap();
        let f4 = r.realize(2, DEFAULT_CAP).unwrap();
        for (a, _) in f4.entries().iter().skip(1) {
            for mode in [DefectMode::Additive, DefectMode::Multiplicative] {
                let d = folner_defect(&f16, a, mode, ZeroPolicy::Drop).unwrap();
                assert!(d.is_zero());
            }
        }
        assert!(matches!(
            folner_defect(
                &f16,
                &f16.descriptor().one(),
                DefectMode::Inversion,
                ZeroPolicy::Error
            ),
            Err(Error::ZeroInSupport)
        ));
    }

    #[test]
    fn inversion_of_small_set() {
        let s = WeightedSet::uniform(&q(), vec![qv(1, 1), qv(2, 1)]).unwrap();
        let inv = inverse_pushforward(&s, ZeroPolicy::Error).unwrap();
        let support: Vec<Value> = inv.entries().iter().map(|(v, _)| v.clone()).collect();
        assert_eq!(support, vec![qv(1, 2), qv(1, 1)]);
    }

    #[test]
    fn function_field_box() {
        let k = FieldDescriptor::parse("F2(t)").unwrap();
        let r = FolnerRecipe::parse(Some(&k), "addbox:d=t:R=2").unwrap();
        let s = r.realize(1, DEFAULT_CAP).unwrap();
        // nonzero g of degree < 2 over F_2: 1, t, t + 1
        assert_eq!(s.support_size(), 3);
        let r2 = FolnerRecipe::parse(Some(&k), "dilbox:P=1:E=1:d=t^2 + t:R=2").unwrap();
        assert_eq!(r2.realize(1, DEFAULT_CAP).unwrap().total_mass(), rat(1, 1));
    }
}
