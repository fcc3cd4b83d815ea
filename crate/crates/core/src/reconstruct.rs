//! Recovering a field homomorphism `kappa = w rho` from multiplicative data
//! `rho(1 + x) = u(x) + v(x) rho(x)`, checked on finite sample grids, and the
//! reduced models of diagonal representations of `F_p(t)^*` built from
//! Frobenius twists.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characters::rational_valuation;
use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, Value};
use crate::poly::Poly;
use crate::ratfunc::{RatFunc, RationalFunctionField};
use crate::scalar::Field;

/// A partial map; `None` marks points outside its domain.
pub type MapFn<E> = Arc<dyn Fn(&E) -> Option<E> + Send + Sync>;

pub fn map_fn<E, G>(f: G) -> MapFn<E>
where
    G: Fn(&E) -> Option<E> + Send + Sync + 'static,
{
    Arc::new(f)
}

#[derive(Clone)]
pub struct MultMapData<F: Field> {
    pub field: F,
    pub rho: MapFn<F::Elem>,
    pub u: MapFn<F::Elem>,
    pub v: MapFn<F::Elem>,
    pub domain: String,
}

impl<F: Field> std::fmt::Debug for MultMapData<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultMapData")
            .field("field", &self.field)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl<F: Field> MultMapData<F> {
    /// `rho` extended by `rho(0) = 0`.
    pub fn rho_at(&self, x: &F::Elem) -> Option<F::Elem> {
        if self.field.is_zero(x) {
            Some(self.field.zero())
        } else {
            (self.rho)(x)
        }
    }

    /// Sampled nonzero `x` where `rho(1 + x) != u(x) + v(x) rho(x)`.
    pub fn relation_exceptions(&self, samples: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        filter_samples(samples, |x| {
            if f.is_zero(x) {
                return None;
            }
            let lhs = self.rho_at(&f.add(&f.one(), x))?;
            let rhs = f.add(&(self.u)(x)?, &f.mul(&(self.v)(x)?, &(self.rho)(x)?));
            Some(lhs != rhs)
        })
    }
}

/// Samples where `check` answers `Some(true)`, in sample order.
fn filter_samples<E, C>(samples: &[E], check: C) -> Vec<E>
where
    E: Clone + Send + Sync,
    C: Fn(&E) -> Option<bool> + Sync,
{
    samples
        .par_iter()
        .filter(|x| check(x) == Some(true))
        .cloned()
        .collect()
}

#[derive(Clone)]
pub struct DerivedW<F: Field> {
    pub w: MapFn<F::Elem>,
    /// Values taken by `w` on the samples.
    pub image: BTreeSet<F::Elem>,
}

/// `w = v / u`, after checking `u != 0` on the samples.
pub fn derive_w<F: Field + 'static>(
    data: &MultMapData<F>,
    samples: &[F::Elem],
) -> Result<DerivedW<F>> {
    let f = &data.field;
    if let Some(x) = samples
        .iter()
        .find(|x| (data.u)(x).is_some_and(|u| f.is_zero(&u)))
    {
        return Err(Error::ZeroU(f.format(x)));
    }
    let (field, u, v) = (data.field.clone(), data.u.clone(), data.v.clone());
    let w: MapFn<F::Elem> = map_fn(move |x| field.div(&v(x)?, &u(x)?).ok());
    let image = samples.iter().filter_map(|x| w(x)).collect();
    Ok(DerivedW { w, image })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Multiplicative,
    Additive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatchReport<E> {
    pub samples: usize,
    pub pairs: usize,
    /// `x` with `eta(x^-1) != eta(x)^-1` (or `eta(-x) != -eta(x)`).
    pub inverse_exceptions: Vec<E>,
    /// Pairs with `eta(x y) != eta(x) eta(y)` (or the additive version).
    pub product_exceptions: Vec<(E, E)>,
    /// For each `x`, how many sampled `y` fail with it.
    pub product_exception_counts: BTreeMap<E, usize>,
}

impl<E> PatchReport<E> {
    pub fn total(&self) -> usize {
        self.inverse_exceptions.len() + self.product_exceptions.len()
    }
}

pub fn patchwise_exceptions<F: Field>(
    field: &F,
    eta: &MapFn<F::Elem>,
    group: Group,
    samples: &[F::Elem],
    pairs: &[(F::Elem, F::Elem)],
) -> PatchReport<F::Elem> {
    let f = field;
    let mult = group == Group::Multiplicative;
    let inverse_exceptions = filter_samples(samples, |x| {
        if mult {
            if f.is_zero(x) {
                return None;
            }
            let e = eta(x)?;
            Some(eta(&f.inv(x).ok()?)? != f.inv(&e).ok()?)
        } else {
            Some(eta(&f.neg(x))? != f.neg(&eta(x)?))
        }
    });
    let product_exceptions: Vec<(F::Elem, F::Elem)> = filter_samples(pairs, |(x, y)| {
        if mult && (f.is_zero(x) || f.is_zero(y)) {
            return None;
        }
        let (ex, ey) = (eta(x)?, eta(y)?);
        Some(if mult {
            eta(&f.mul(x, y))? != f.mul(&ex, &ey)
        } else {
            eta(&f.add(x, y))? != f.add(&ex, &ey)
        })
    });
    let mut product_exception_counts = BTreeMap::new();
    for (x, _) in &product_exceptions {
        *product_exception_counts.entry(x.clone()).or_insert(0) += 1;
    }
    PatchReport {
        samples: samples.len(),
        pairs: pairs.len(),
        inverse_exceptions,
        product_exceptions,
        product_exception_counts,
    }
}

#[derive(Clone)]
pub struct KappaReport<F: Field> {
    pub kappa: MapFn<F::Elem>,
    pub additive_violations: Vec<(F::Elem, F::Elem)>,
    pub multiplicative_violations: Vec<(F::Elem, F::Elem)>,
    /// Distinct samples with equal images.
    pub collisions: Vec<(F::Elem, F::Elem)>,
    /// Samples where `kappa(x) != x`.
    pub moved: Vec<F::Elem>,
}

impl<F: Field> KappaReport<F> {
    pub fn is_identity_on_samples(&self) -> bool {
        self.moved.is_empty()
    }

    pub fn violations(&self) -> usize {
        self.additive_violations.len() + self.multiplicative_violations.len()
    }
}

/// `kappa(0) = 0` and `kappa(x) = w(x) rho(x)`, with the field axioms
/// rechecked on the sampled pairs.
pub fn build_kappa<F: Field + 'static>(
    field: &F,
    rho: &MapFn<F::Elem>,
    w: &MapFn<F::Elem>,
    samples: &[F::Elem],
    pairs: &[(F::Elem, F::Elem)],
) -> KappaReport<F> {
    let (fc, rho_c, w_c) = (field.clone(), rho.clone(), w.clone());
    let kappa: MapFn<F::Elem> = map_fn(move |x| {
        if fc.is_zero(x) {
            Some(fc.zero())
        } else {
            Some(fc.mul(&w_c(x)?, &rho_c(x)?))
        }
    });
    let f = field;
    let k = &kappa;
    let additive_violations = filter_samples(pairs, |(x, y)| {
        Some(k(&f.add(x, y))? != f.add(&k(x)?, &k(y)?))
    });
    let multiplicative_violations = filter_samples(pairs, |(x, y)| {
        Some(k(&f.mul(x, y))? != f.mul(&k(x)?, &k(y)?))
    });
    let moved = filter_samples(samples, |x| Some(k(x)? != *x));
    let mut seen: HashMap<F::Elem, F::Elem> = HashMap::new();
    let mut collisions = Vec::new();
    for x in samples {
        if let Some(img) = k(x) {
            match seen.get(&img) {
                Some(y) if y != x => collisions.push((y.clone(), x.clone())),
                Some(_) => {}
                None => {
                    seen.insert(img, x.clone());
                }
            }
        }
    }
    KappaReport {
        kappa,
        additive_violations,
        multiplicative_violations,
        collisions,
        moved,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UvReport<E> {
    /// `w(1/x) != 1/w(x)`.
    pub inverse: Vec<E>,
    /// `w(-x) != w(x)`.
    pub even: Vec<E>,
    /// `w(1 + x) u(x) != 1`.
    pub wu: Vec<E>,
    /// `v(-1 - x) v(x) != 1`.
    pub vv: Vec<E>,
    /// `v(1 + x) v(x) != 1`; reported only, since it already fails for the
    /// parity example at `x = 2`.
    pub vv_shifted: Vec<E>,
}

impl<E> UvReport<E> {
    /// Exceptions over the asserted relations.
    pub fn counts(&self) -> [usize; 4] {
        [
            self.inverse.len(),
            self.even.len(),
            self.wu.len(),
            self.vv.len(),
        ]
    }
}

/// From `u = 1 / w(1 + x)` and `v = w(x) / w(1 + x)` with `w` even and
/// multiplicative: `w(1/x) w(x) = 1`, `w(-x) = w(x)`, `w(1 + x) u(x) = 1` and
/// `v(-1 - x) v(x) = 1`. Points where a side is undefined are skipped.
pub fn verify_uv_relations<F: Field>(
    data: &MultMapData<F>,
    w: &MapFn<F::Elem>,
    samples: &[F::Elem],
) -> UvReport<F::Elem> {
    let f = &data.field;
    let (u, v) = (&data.u, &data.v);
    let one = f.one();
    let nonzero = |x: &F::Elem| !f.is_zero(x);
    let inverse = filter_samples(samples, |x| {
        nonzero(x).then_some(())?;
        Some(f.mul(&w(&f.inv(x).ok()?)?, &w(x)?) != one)
    });
    let even = filter_samples(samples, |x| {
        nonzero(x).then_some(())?;
        Some(w(&f.neg(x))? != w(x)?)
    });
    let wu = filter_samples(samples, |x| {
        let x1 = f.add(&one, x);
        (nonzero(x) && nonzero(&x1)).then_some(())?;
        Some(f.mul(&w(&x1)?, &u(x)?) != one)
    });
    let vv = filter_samples(samples, |x| {
        let y = f.neg(&f.add(&one, x));
        (nonzero(x) && nonzero(&y)).then_some(())?;
        Some(f.mul(&v(&y)?, &v(x)?) != one)
    });
    let vv_shifted = filter_samples(samples, |x| {
        let y = f.add(&one, x);
        (nonzero(x) && nonzero(&y)).then_some(())?;
        Some(f.mul(&v(&y)?, &v(x)?) != one)
    });
    UvReport {
        inverse,
        even,
        wu,
        vv,
        vv_shifted,
    }
}

fn rational(x: &Value) -> Option<&BigRational> {
    match x {
        Value::Rational(r) => Some(r),
        _ => None,
    }
}

/// `(-1)^{v_2(x)}` on `Q^*`.
pub fn two_adic_parity(x: &BigRational) -> BigRational {
    if rational_valuation(x, 2).rem_euclid(2) == 0 {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

pub const NAMED_EXAMPLES: &[(&str, &str)] = &[
    (
        "q-parity-w",
        "Q: rho(x) = (-1)^v2(x) x, u(x) = w0(1 + x), v(x) = w0(1 + x) w0(x)",
    ),
    ("identity", "Q: rho(x) = x, u = v = 1"),
];

/// Built-in data over `Q`, by name.
pub fn named_example(name: &str) -> Result<MultMapData<FieldDescriptor>> {
    let w0 = |x: &Value| rational(x).filter(|r| !r.is_zero()).map(two_adic_parity);
    let lift = |r: BigRational| Some(Value::Rational(r));
    let (rho, u, v): (MapFn<Value>, MapFn<Value>, MapFn<Value>) = match name {
        "q-parity-w" => (
            map_fn(move |x| lift(w0(x)? * rational(x)?)),
            map_fn(move |x| {
                let x1 = rational(x)? + BigRational::one();
                lift(w0(&Value::Rational(x1)).unwrap_or_else(BigRational::one))
            }),
            map_fn(move |x| {
                let x1 = rational(x)? + BigRational::one();
                if x1.is_zero() {
                    return lift(BigRational::one());
                }
                lift(two_adic_parity(&x1) * w0(x)?)
            }),
        ),
        "identity" => (
            map_fn(|x: &Value| Some(x.clone())),
            map_fn(|_| Some(Value::Rational(BigRational::one()))),
            map_fn(|_| Some(Value::Rational(BigRational::one()))),
        ),
        _ => {
            return Err(Error::Parse(format!(
                "unknown example {name:?}; known: {}",
                NAMED_EXAMPLES
                    .iter()
                    .map(|e| e.0)
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    };
    Ok(MultMapData {
        field: FieldDescriptor::Rational,
        rho,
        u,
        v,
        domain: name.to_string(),
    })
}

/// A map read from `x, value` lines; `#` starts a comment.
pub fn table_map(field: &FieldDescriptor, text: &str) -> Result<MapFn<Value>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut table = HashMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("map table: {e}")))?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!(
                "map table line {}: expected `x, value`",
                i + 1
            )));
        }
        let x = field.parse_value(&rec[0])?;
        let y = field.parse_value(&rec[1])?;
        if table.insert(x, y).is_some() {
            return Err(Error::Parse(format!("map table repeats {}", &rec[0])));
        }
    }
    Ok(map_fn(move |x| table.get(x).cloned()))
}

/// Distinct nonzero rationals `a/b` with `|a|, b <= height`, drawn in a fixed
/// order from the seed; a longer draw extends a shorter one.
pub fn sample_rationals(height: u64, count: usize, seed: u64) -> Vec<Value> {
    let h = height.max(1) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let distinct = (2 * h as usize) * h as usize;
    while out.len() < count.min(distinct) {
        let a = rng.gen_range(-h..=h);
        let b = rng.gen_range(1..=h);
        if a == 0 {
            continue;
        }
        let r = BigRational::new(BigInt::from(a), BigInt::from(b));
        if seen.insert(r.clone()) {
            out.push(Value::Rational(r));
        }
    }
    out
}

/// `count` pairs of samples chosen with replacement.
pub fn sample_pairs<E: Clone>(samples: &[E], count: usize, seed: u64) -> Vec<(E, E)> {
    if samples.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let i = rng.gen_range(0..samples.len());
            let j = rng.gen_range(0..samples.len());
            (samples[i].clone(), samples[j].clone())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightComponent {
    pub m: i64,
    pub l: u32,
    pub n: i64,
}

/// Weights `m_j = p^{l_j} n_j` with `p` not dividing `n_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedModelSpec {
    p: u64,
    components: Vec<WeightComponent>,
}

impl ReducedModelSpec {
    pub fn new(p: u64, weights: &[i64]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut parts = Vec::with_capacity(weights.len());
        for &m in weights {
            if m == 0 || !seen.insert(m) {
                return Err(Error::BadWeight(m));
            }
            let (mut l, mut n) = (0u32, m);
            while n % p as i64 == 0 {
                n /= p as i64;
                l += 1;
            }
            parts.push((l, n));
        }
        Self::from_decomposition(p, &parts)
    }

    /// From explicit pairs `(l_j, n_j)`.
    pub fn from_decomposition(p: u64, parts: &[(u32, i64)]) -> Result<Self> {
        RationalFunctionField::new(p)?;
        let components = parts
            .iter()
            .map(|&(l, n)| {
                if n % p as i64 == 0 {
                    return Err(Error::BadWeight(n));
                }
                let m = (p as i64)
                    .checked_pow(l)
                    .and_then(|q| q.checked_mul(n))
                    .ok_or(Error::BadWeight(n))?;
                Ok(WeightComponent { m, l, n })
            })
            .collect::<Result<_>>()?;
        Ok(ReducedModelSpec { p, components })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn components(&self) -> &[WeightComponent] {
        &self.components
    }

    /// `p^{l_j}`, the number of coordinates of the `j`-th source block.
    pub fn block_dim(&self, j: usize) -> usize {
        (self.p as usize).pow(self.components[j].l)
    }
}

/// `Phi = (+)_j Phi_j` from `(+)_j K^{p^{l_j}}`, where `a` scales block `j` by
/// `a^{n_j}`, onto `K^r`, where `a` scales coordinate `j` by `a^{m_j}`:
/// `Phi_j(x) = sum_alpha x_alpha^{p^{l_j}} t^alpha`.
#[derive(Debug, Clone)]
pub struct ReducedModel {
    spec: ReducedModelSpec,
    field: RationalFunctionField,
}

pub type Block = Vec<RatFunc>;

impl ReducedModel {
    pub fn new(spec: ReducedModelSpec) -> Result<Self> {
        let field = RationalFunctionField::new(spec.p)?;
        Ok(ReducedModel { spec, field })
    }

    pub fn spec(&self) -> &ReducedModelSpec {
        &self.spec
    }

    pub fn field(&self) -> &RationalFunctionField {
        &self.field
    }

    fn check_shape(&self, x: &[Block]) -> Result<()> {
        let ok = x.len() == self.spec.components.len()
            && x.iter()
                .enumerate()
                .all(|(j, b)| b.len() == self.spec.block_dim(j));
        if !ok {
            return Err(Error::Parse(
                "vector does not match the model's blocks".into(),
            ));
        }
        Ok(())
    }

    pub fn phi(&self, x: &[Block]) -> Result<Vec<RatFunc>> {
        self.check_shape(x)?;
        let k = &self.field;
        let t = k.t();
        Ok(x.iter()
            .enumerate()
            .map(|(j, block)| {
                let q = self.spec.block_dim(j) as u64;
                block.iter().enumerate().fold(k.zero(), |acc, (alpha, xa)| {
                    let term = k.mul(&k.pow_u(xa, q), &k.pow_u(&t, alpha as u64));
                    k.add(&acc, &term)
                })
            })
            .collect())
    }

    /// Writes `y_j = M(t) / D^q` with `M = N D^{q-1}`, splits `M` by exponent
    /// residue mod `q = p^{l_j}`, and returns `x_alpha = M_alpha(t) / D`,
    /// using that Frobenius fixes `F_p`.
    pub fn phi_inverse(&self, y: &[RatFunc]) -> Result<Vec<Block>> {
        if y.len() != self.spec.components.len() {
            return Err(Error::Parse(
                "vector does not match the model's blocks".into(),
            ));
        }
        let k = &self.field;
        let fp = k.prime_field();
        y.iter()
            .enumerate()
            .map(|(j, yj)| {
                let q = self.spec.block_dim(j);
                let m = yj.num().mul(fp, &yj.den().pow(fp, q as u64 - 1));
                (0..q)
                    .map(|alpha| {
                        let c: Vec<u64> =
                            m.coeffs().iter().skip(alpha).step_by(q).copied().collect();
                        k.fraction(Poly::new(fp, c), yj.den().clone())
                    })
                    .collect()
            })
            .collect()
    }

    pub fn act_source(&self, a: &RatFunc, x: &[Block]) -> Result<Vec<Block>> {
        let k = &self.field;
        x.iter()
            .zip(&self.spec.components)
            .map(|(b, c)| {
                let s = k.pow(a, c.n)?;
                Ok(b.iter().map(|xa| k.mul(&s, xa)).collect())
            })
            .collect()
    }

    pub fn act_target(&self, a: &RatFunc, y: &[RatFunc]) -> Result<Vec<RatFunc>> {
        let k = &self.field;
        y.iter()
            .zip(&self.spec.components)
            .map(|(yj, c)| Ok(k.mul(&k.pow(a, c.m)?, yj)))
            .collect()
    }

    /// Plain scalar multiplication on the source.
    pub fn scale_source(&self, a: &RatFunc, x: &[Block]) -> Vec<Block> {
        x.iter()
            .map(|b| b.iter().map(|xa| self.field.mul(a, xa)).collect())
            .collect()
    }

    pub fn zero_vector(&self) -> Vec<Block> {
        (0..self.spec.components.len())
            .map(|j| vec![self.field.zero(); self.spec.block_dim(j)])
            .collect()
    }

    /// `(a, x)` with `Phi(a x) != a Phi(x)`: `a = t` and `x` the first basis
    /// vector of a block with `l_j > 0`.
    pub fn nonlinearity_witness(&self) -> Result<Option<(RatFunc, Vec<Block>)>> {
        let Some(j) = self.spec.components.iter().position(|c| c.l > 0) else {
            return Ok(None);
        };
        let mut x = self.zero_vector();
        x[j][0] = self.field.one();
        let a = self.field.t();
        let lhs = self.phi(&self.scale_source(&a, &x))?;
        let rhs: Vec<RatFunc> = self
            .phi(&x)?
            .iter()
            .map(|y| self.field.mul(&a, y))
            .collect();
        Ok((lhs != rhs).then_some((a, x)))
    }

    pub fn random_element(&self, rng: &mut ChaCha8Rng, max_deg: usize) -> RatFunc {
        let p = self.spec.p;
        let fp = self.field.prime_field();
        let num: Vec<u64> = (0..=rng.gen_range(0..=max_deg))
            .map(|_| rng.gen_range(0..p))
            .collect();
        let mut den: Vec<u64> = (0..rng.gen_range(0..max_deg.max(1)))
            .map(|_| rng.gen_range(0..p))
            .collect();
        den.push(1);
        self.field
            .fraction(Poly::new(fp, num), Poly::new(fp, den))
            .expect("monic denominator")
    }

    pub fn random_nonzero(&self, rng: &mut ChaCha8Rng, max_deg: usize) -> RatFunc {
        loop {
            let a = self.random_element(rng, max_deg);
            if !self.field.is_zero(&a) {
                return a;
            }
        }
    }

    pub fn random_vector(&self, rng: &mut ChaCha8Rng, max_deg: usize) -> Vec<Block> {
        (0..self.spec.components.len())
            .map(|j| {
                (0..self.spec.block_dim(j))
                    .map(|_| self.random_element(rng, max_deg))
                    .collect()
            })
            .collect()
    }

    pub fn format_vector(&self, x: &[Block]) -> String {
        let blocks: Vec<String> = x
            .iter()
            .map(|b| {
                let v: Vec<String> = b.iter().map(|e| self.field.format(e)).collect();
                format!("[{}]", v.join(", "))
            })
            .collect();
        blocks.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedModelReport {
    pub samples: usize,
    pub additivity_failures: usize,
    pub equivariance_failures: usize,
    /// `Phi^-1(Phi(x)) != x`.
    pub inverse_failures: usize,
    /// `Phi(Phi^-1(y)) != y`.
    pub section_failures: usize,
    /// `(a, x, Phi(a x), a Phi(x))`, formatted.
    pub nonlinearity_witness: Option<[String; 4]>,
}

impl ReducedModelReport {
    pub fn passed(&self) -> bool {
        self.additivity_failures == 0
            && self.equivariance_failures == 0
            && self.inverse_failures == 0
            && self.section_failures == 0
    }
}

/// Builds the model and checks it on `samples` seeded random inputs.
pub fn reduced_model(
    spec: &ReducedModelSpec,
    samples: usize,
    seed: u64,
) -> Result<(ReducedModel, ReducedModelReport)> {
    let model = ReducedModel::new(spec.clone())?;
    let k = model.field;
    let cases: Vec<u64> = (0..samples as u64).collect();
    let outcomes = cases
        .par_iter()
        .map(|&i| -> Result<[bool; 4]> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let x = model.random_vector(&mut rng, 4);
            let y = model.random_vector(&mut rng, 4);
            let a = model.random_nonzero(&mut rng, 3);
            let z: Vec<RatFunc> = (0..spec.components.len())
                .map(|_| model.random_element(&mut rng, 4))
                .collect();
            let sum: Vec<Block> = x
                .iter()
                .zip(&y)
                .map(|(bx, by)| bx.iter().zip(by).map(|(s, t)| k.add(s, t)).collect())
                .collect();
            let (px, py) = (model.phi(&x)?, model.phi(&y)?);
            let additive = model.phi(&sum)?
                == px
                    .iter()
                    .zip(&py)
                    .map(|(s, t)| k.add(s, t))
                    .collect::<Vec<_>>();
            let equivariant =
                model.phi(&model.act_source(&a, &x)?)? == model.act_target(&a, &px)?;
            let inverse = model.phi_inverse(&px)? == x;
            let section = model.phi(&model.phi_inverse(&z)?)? == z;
            Ok([additive, equivariant, inverse, section])
        })
        .collect::<Result<Vec<_>>>()?;
    let fails = |i: usize| outcomes.iter().filter(|o| !o[i]).count();
    let nonlinearity_witness = model.nonlinearity_witness()?.map(|(a, x)| {
        let lhs = model.phi(&model.scale_source(&a, &x)).expect("shape");
        let rhs: Vec<RatFunc> = model
            .phi(&x)
            .expect("shape")
            .iter()
            .map(|y| k.mul(&a, y))
            .collect();
        let fmt = |v: &[RatFunc]| v.iter().map(|e| k.format(e)).collect::<Vec<_>>().join(", ");
        [k.format(&a), model.format_vector(&x), fmt(&lhs), fmt(&rhs)]
    });
    let report = ReducedModelReport {
        samples,
        additivity_failures: fails(0),
        equivariance_failures: fails(1),
        inverse_failures: fails(2),
        section_failures: fails(3),
        nonlinearity_witness,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn q(n: i64, d: i64) -> Value {
        Value::Rational(rat(n, d))
    }

    #[test]
    fn parity_pipeline() {
        let data = named_example("q-parity-w").unwrap();
        let samples = sample_rationals(100, 300, 7);
        assert!(data.relation_exceptions(&samples).is_empty());
        let dw = derive_w(&data, &samples).unwrap();
        assert_eq!(dw.image, [q(-1, 1), q(1, 1)].into_iter().collect());
        let pairs = sample_pairs(&samples, 300, 8);
        let patch =
            patchwise_exceptions(&data.field, &dw.w, Group::Multiplicative, &samples, &pairs);
        assert_eq!(patch.total(), 0);
        let kr = build_kappa(&data.field, &data.rho, &dw.w, &samples, &pairs);
        assert!(kr.is_identity_on_samples());
        assert_eq!(kr.violations(), 0);
        let uv = verify_uv_relations(&data, &dw.w, &samples);
        assert_eq!(uv.counts(), [0, 0, 0, 0]);
        let uv2 = verify_uv_relations(&data, &dw.w, &[q(2, 1)]);
        assert_eq!(uv2.vv_shifted, vec![q(2, 1)]);
    }

    #[test]
    fn corrupted_maps() {
        let qd = FieldDescriptor::Rational;
        let eta: MapFn<Value> = map_fn(|x: &Value| {
            if *x == Value::Rational(rat(5, 1)) {
                Some(Value::Rational(rat(1, 1)))
            } else {
                Some(x.clone())
            }
        });
        let samples: Vec<Value> = (1..=10).map(|n| q(n, 1)).collect();
        let pairs: Vec<(Value, Value)> = samples
            .iter()
            .flat_map(|a| samples.iter().map(move |b| (a.clone(), b.clone())))
            .collect();
        let r = patchwise_exceptions(&qd, &eta, Group::Multiplicative, &samples, &pairs);
        assert!(r
            .product_exceptions
            .iter()
            .all(|(a, b)| *a == q(5, 1) || *b == q(5, 1)));
        assert!(!r.product_exceptions.is_empty());
        assert_eq!(r.inverse_exceptions, vec![q(5, 1)]);

        let id = named_example("identity").unwrap();
        assert!(id.relation_exceptions(&samples).is_empty());
        let mut bad = id.clone();
        bad.u = map_fn(|x: &Value| {
            Some(if *x == Value::Rational(rat(3, 1)) {
                q(2, 1)
            } else {
                q(1, 1)
            })
        });
        assert_eq!(bad.relation_exceptions(&samples), vec![q(3, 1)]);

        bad.u = map_fn(|x: &Value| {
            Some(if *x == Value::Rational(rat(4, 1)) {
                q(0, 1)
            } else {
                q(1, 1)
            })
        });
        assert!(matches!(derive_w(&bad, &samples), Err(Error::ZeroU(_))));
    }

    #[test]
    fn table_maps() {
        let qd = FieldDescriptor::Rational;
        let m = table_map(&qd, "# x, value\n1, 2\n1/2, -3\n").unwrap();
        assert_eq!(m(&q(1, 2)), Some(q(-3, 1)));
        assert_eq!(m(&q(5, 1)), None);
        assert!(table_map(&qd, "1, 2\n1, 3\n").is_err());
    }

    #[test]
    fn decompositions() {
        let s = ReducedModelSpec::new(3, &[3, -6, 2]).unwrap();
        let parts: Vec<(u32, i64)> = s.components().iter().map(|c| (c.l, c.n)).collect();
        assert_eq!(parts, [(1, 1), (1, -2), (0, 2)]);
        let s = ReducedModelSpec::new(2, &[2, 3]).unwrap();
        let parts: Vec<(u32, i64)> = s.components().iter().map(|c| (c.l, c.n)).collect();
        assert_eq!(parts, [(1, 1), (0, 3)]);
        assert!(matches!(
            ReducedModelSpec::from_decomposition(3, &[(1, 3)]),
            Err(Error::BadWeight(3))
        ));
        assert!(matches!(
            ReducedModelSpec::new(3, &[0]),
            Err(Error::BadWeight(0))
        ));
    }

    #[test]
    fn reduced_models_verify() {
        for (p, w) in [(3u64, vec![3i64, -6, 2]), (2, vec![2, 3]), (3, vec![3])] {
            let spec = ReducedModelSpec::new(p, &w).unwrap();
            let (_, r) = reduced_model(&spec, 40, 1).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.nonlinearity_witness.is_some());
        }
        let spec = ReducedModelSpec::new(5, &[1, 2]).unwrap();
        let (_, r) = reduced_model(&spec, 10, 1).unwrap();
        assert!(r.passed() && r.nonlinearity_witness.is_none());
    }
}
