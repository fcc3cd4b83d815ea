//! Exhaustive searches over finite fields and finite truncations: reciprocal
//! triples, difference sets inside hyperbolas, products of differences,
//! Minkowski distances and Laurent polynomial values in `E - E`.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{FieldDescriptor, Value};
use crate::finite::{FiniteField, FqElem};
use crate::scalar::{binomial, Field};

pub type Point = (FqElem, FqElem);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternReport<H> {
    pub space: String,
    pub hits: Vec<H>,
    pub exhaustive: bool,
    /// Finite stand-in for a statement about infinite fields; no pass/fail meaning.
    pub exploratory: bool,
}

fn check_cap(size: u128, cap: u64) -> Result<()> {
    if size > cap as u128 {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(())
}

/// `H_t = {(a, t/a) : a != 0}`.
#[derive(Debug, Clone)]
pub struct Hyperbola {
    field: FiniteField,
    t: FqElem,
}

impl Hyperbola {
    pub fn new(field: &FiniteField, t: FqElem) -> Result<Self> {
        if t.0 == 0 {
            return Err(Error::ZeroArgument);
        }
        Ok(Hyperbola {
            field: field.clone(),
            t,
        })
    }

    pub fn contains(&self, (x, y): Point) -> bool {
        self.field.mul(&x, &y) == self.t
    }

    pub fn points(&self) -> Vec<Point> {
        let k = &self.field;
        (1..k.order())
            .map(|a| {
                let a = FqElem(a);
                (a, k.div(&self.t, &a).expect("a is nonzero"))
            })
            .collect()
    }
}

/// Whether `(x, y, z)` satisfies the three reciprocal equations with their
/// nonvanishing side conditions.
pub fn is_reciprocal_triple(k: &FiniteField, x: FqElem, y: FqElem, z: FqElem) -> bool {
    let recip_sum = |terms: &[FqElem]| -> Option<bool> {
        let s = terms.iter().fold(k.zero(), |acc, a| k.add(&acc, a));
        let lhs = k.inv(&s).ok()?;
        let rhs = terms
            .iter()
            .try_fold(k.zero(), |acc, a| Some(k.add(&acc, &k.inv(a).ok()?)))?;
        Some(lhs == rhs)
    };
    [x, y, z].iter().all(|a| a.0 != 0)
        && recip_sum(&[x, y]) == Some(true)
        && recip_sum(&[y, z]) == Some(true)
        && recip_sum(&[x, y, z]) == Some(true)
}

/// All `(x, y, z)` in `(F_q^*)^3` solving the reciprocal system.
pub fn hyperbola_triple_search(k: &FiniteField, cap: u64) -> Result<PatternReport<[FqElem; 3]>> {
    let m = k.order() - 1;
    check_cap((m as u128).pow(3), cap)?;
    let hits = (1..=m)
        .into_par_iter()
        .flat_map_iter(|x| {
            (1..=m).flat_map(move |y| (1..=m).map(move |z| [FqElem(x), FqElem(y), FqElem(z)]))
        })
        .filter(|&[x, y, z]| is_reciprocal_triple(k, x, y, z))
        .collect();
    Ok(PatternReport {
        space: format!("(F{}^*)^3", k.order()),
        hits,
        exhaustive: true,
        exploratory: false,
    })
}

/// `{(a s, s, a s) : a^2 + a + 1 = 0, s != 0}`; empty unless `F_q` has a
/// primitive cube root of unity.
pub fn char2_triple_family(k: &FiniteField) -> BTreeSet<[FqElem; 3]> {
    let one = k.one();
    let alphas: Vec<FqElem> = (2..k.order())
        .map(FqElem)
        .filter(|a| {
            let v = k.add(&k.add(&k.mul(a, a), a), &one);
            v.0 == 0
        })
        .collect();
    let mut out = BTreeSet::new();
    for a in &alphas {
        for s in 1..k.order() {
            let s = FqElem(s);
            let as_ = k.mul(a, &s);
            out.insert([as_, s, as_]);
        }
    }
    out
}

fn point_index(k: &FiniteField, (x, y): Point) -> u64 {
    x.0 * k.order() + y.0
}

fn point_at(k: &FiniteField, i: u64) -> Point {
    (FqElem(i / k.order()), FqElem(i % k.order()))
}

fn sub_pt(k: &FiniteField, a: Point, b: Point) -> Point {
    (k.sub(&a.0, &b.0), k.sub(&a.1, &b.1))
}

fn all_diffs_on(h: &Hyperbola, set: &[Point]) -> bool {
    let k = &h.field;
    set.iter()
        .enumerate()
        .all(|(i, &a)| set[i + 1..].iter().all(|&b| h.contains(sub_pt(k, a, b))))
}

/// All `F` of the given size in `F_q^2` with `(F - F) \ {0}` inside `H_t`,
/// each listed once in increasing point order. Points are added one at a time
/// and only candidates compatible with every chosen point are kept.
pub fn hyperbola_diffset_search(
    k: &FiniteField,
    t: FqElem,
    size: usize,
    cap: u64,
) -> Result<PatternReport<Vec<Point>>> {
    let h = Hyperbola::new(k, t)?;
    let n = k.order() * k.order();
    check_cap(n as u128, cap)?;
    let offsets = h.points();
    let hits: Vec<Vec<Point>> = (0..n)
        .into_par_iter()
        .flat_map_iter(|first| {
            let p0 = point_at(k, first);
            let mut cands: Vec<u64> = offsets
                .iter()
                .map(|&(a, b)| point_index(k, (k.add(&p0.0, &a), k.add(&p0.1, &b))))
                .filter(|&i| i > first)
                .collect();
            cands.sort_unstable();
            let mut found = Vec::new();
            let mut chosen = vec![p0];
            extend(&h, &mut chosen, &cands, size, &mut found);
            found
        })
        .collect();
    Ok(PatternReport {
        space: format!(
            "{size}-subsets of F{}^2 with differences on xy = {}",
            k.order(),
            k.format(&t)
        ),
        hits,
        exhaustive: true,
        exploratory: false,
    })
}

fn extend(
    h: &Hyperbola,
    chosen: &mut Vec<Point>,
    cands: &[u64],
    size: usize,
    out: &mut Vec<Vec<Point>>,
) {
    if chosen.len() == size {
        out.push(chosen.clone());
        return;
    }
    let k = &h.field;
    for (i, &c) in cands.iter().enumerate() {
        let p = point_at(k, c);
        let rest: Vec<u64> = cands[i + 1..]
            .iter()
            .copied()
            .filter(|&d| h.contains(sub_pt(k, point_at(k, d), p)))
            .collect();
        chosen.push(p);
        extend(h, chosen, &rest, size, out);
        chosen.pop();
    }
}

/// The same search by enumerating every subset; used as an oracle.
pub fn hyperbola_diffset_naive(
    k: &FiniteField,
    t: FqElem,
    size: usize,
    cap: u64,
) -> Result<PatternReport<Vec<Point>>> {
    let h = Hyperbola::new(k, t)?;
    let n = k.order() * k.order();
    let total = binomial(n, size as u64);
    check_cap(u128::try_from(total).unwrap_or(u128::MAX), cap)?;
    let mut hits = Vec::new();
    let mut idx: Vec<u64> = (0..size as u64).collect();
    if size as u64 <= n {
        loop {
            let set: Vec<Point> = idx.iter().map(|&i| point_at(k, i)).collect();
            if all_diffs_on(&h, &set) {
                hits.push(set);
            }
            let Some(pos) = (0..size).rev().find(|&j| idx[j] < n - (size - j) as u64) else {
                break;
            };
            idx[pos] += 1;
            for j in pos + 1..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(PatternReport {
        space: format!("all {size}-subsets of F{}^2", k.order()),
        hits,
        exhaustive: true,
        exploratory: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coverage {
    pub covered: Vec<FqElem>,
    pub fraction: f64,
}

/// `Prod(E - E) = {x y : (x, y) in E - E}`.
pub fn prod_coverage(k: &FiniteField, e: &[Point]) -> Result<Coverage> {
    if e.len() < 2 {
        return Err(Error::TooSmall(e.len()));
    }
    let covered: BTreeSet<FqElem> = e
        .par_iter()
        .flat_map_iter(|&a| {
            e.iter().map(move |&b| {
                let (x, y) = sub_pt(k, a, b);
                k.mul(&x, &y)
            })
        })
        .collect();
    let fraction = covered.len() as f64 / k.order() as f64;
    Ok(Coverage {
        covered: covered.into_iter().collect(),
        fraction,
    })
}

fn minkowski(k: &FiniteField, a: Point, b: Point) -> FqElem {
    let (dx, dy) = sub_pt(k, a, b);
    k.sub(&k.mul(&dx, &dx), &k.mul(&dy, &dy))
}

/// Ordered pairs `(P, Q)` in `E x E` with `(P1 - Q1)^2 - (P2 - Q2)^2 = z`.
///
/// Outside characteristic 2 the points are first sent to `(x - y, x + y)`, so
/// the form becomes the product of the coordinate differences. In
/// characteristic 2 that map is singular and the form is scanned directly.
pub fn spacetime_search(k: &FiniteField, z: FqElem, e: &[Point]) -> PatternReport<(Point, Point)> {
    if k.p() == 2 {
        let mut r = spacetime_direct(k, z, e);
        r.space = format!("E x E in F{}^2, direct scan", k.order());
        return r;
    }
    let moved: Vec<Point> = e
        .iter()
        .map(|&(x, y)| (k.sub(&x, &y), k.add(&x, &y)))
        .collect();
    let hits = (0..e.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let moved = &moved;
            (0..e.len()).filter_map(move |j| {
                let (u, v) = sub_pt(k, moved[i], moved[j]);
                (k.mul(&u, &v) == z).then_some((e[i], e[j]))
            })
        })
        .collect();
    PatternReport {
        space: format!("E x E in F{}^2 via (x - y, x + y)", k.order()),
        hits,
        exhaustive: true,
        exploratory: false,
    }
}

/// Oracle for [`spacetime_search`] evaluating the quadratic form as written.
pub fn spacetime_direct(k: &FiniteField, z: FqElem, e: &[Point]) -> PatternReport<(Point, Point)> {
    let hits = e
        .iter()
        .flat_map(|&a| e.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| minkowski(k, a, b) == z)
        .collect();
    PatternReport {
        space: format!("E x E in F{}^2", k.order()),
        hits,
        exhaustive: true,
        exploratory: false,
    }
}

/// `E = {(x, y) : x + y in E_o}` in characteristic 2, after checking that
/// `1` is not in `E_o + E_o`. Then `(P1 - Q1)^2 - (P2 - Q2)^2 = 1` has no
/// solution in `E`, because the form equals `((P1 + P2) + (Q1 + Q2))^2`.
pub fn char2_spacetime_counterexample(k: &FiniteField, e_o: &[FqElem]) -> Result<Vec<Point>> {
    if k.p() != 2 {
        return Err(Error::InvalidField(format!(
            "F{} does not have characteristic 2",
            k.order()
        )));
    }
    let one = k.one();
    for a in e_o {
        for b in e_o {
            if k.add(a, b) == one {
                return Err(Error::Unsupported(format!(
                    "1 = {} + {} lies in E_o + E_o",
                    k.format(a),
                    k.format(b)
                )));
            }
        }
    }
    let mut e = Vec::new();
    for x in 0..k.order() {
        let x = FqElem(x);
        for s in e_o {
            e.push((x, k.sub(s, &x)));
        }
    }
    e.sort();
    e.dedup();
    Ok(e)
}

/// `p(X) = sum c_k X^k` with integer exponents and no constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent<E> {
    terms: Vec<(i64, E)>,
}

impl<E: Clone + Eq> Laurent<E> {
    pub fn new<F: Field<Elem = E>>(field: &F, terms: Vec<(i64, E)>) -> Result<Self> {
        let mut merged: Vec<(i64, E)> = Vec::new();
        let mut sorted = terms;
        sorted.sort_by_key(|(e, _)| *e);
        for (e, c) in sorted {
            match merged.last_mut() {
                Some((le, lc)) if *le == e => *lc = field.add(lc, &c),
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(_, c)| !field.is_zero(c));
        if merged.iter().any(|(e, _)| *e == 0) {
            return Err(Error::Parse("Laurent polynomial must have p_0 = 0".into()));
        }
        if merged.is_empty() {
            return Err(Error::Parse("Laurent polynomial is zero".into()));
        }
        Ok(Laurent { terms: merged })
    }

    pub fn terms(&self) -> &[(i64, E)] {
        &self.terms
    }

    pub fn eval<F: Field<Elem = E>>(&self, field: &F, a: &E) -> Result<E> {
        self.terms.iter().try_fold(field.zero(), |acc, (e, c)| {
            Ok(field.add(&acc, &field.mul(c, &field.pow(a, *e)?)))
        })
    }
}

/// Parses `X + X^-1`, `X^2 - X^-1`, `3X^2 + (1/2)X^-3`, `(g^2)X`.
pub fn parse_laurent(field: &FieldDescriptor, text: &str) -> Result<Laurent<Value>> {
    let mut terms = Vec::new();
    for (negative, term) in split_signed(text)? {
        let (coeff, power) = match term.find('X') {
            Some(i) => (&term[..i], parse_power(&term[i + 1..], text)?),
            None => (term.as_str(), 0),
        };
        let coeff = coeff.trim().trim_end_matches('*').trim();
        let coeff = coeff
            .strip_prefix('(')
            .and_then(|c| c.strip_suffix(')'))
            .unwrap_or(coeff);
        let c = if coeff.is_empty() {
            field.one()
        } else {
            field.parse_value(coeff)?
        };
        let c = if negative { field.neg(&c) } else { c };
        terms.push((power, c));
    }
    Laurent::new(field, terms)
}

fn parse_power(s: &str, text: &str) -> Result<i64> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(1);
    }
    s.strip_prefix('^')
        .and_then(|e| e.trim().parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad exponent in Laurent polynomial {text:?}")))
}

fn split_signed(text: &str) -> Result<Vec<(bool, String)>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut negative = false;
    let mut depth = 0i32;
    let mut prev = ' ';
    for ch in text.chars().filter(|c| !c.is_whitespace()) {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if (ch == '+' || ch == '-') && depth == 0 && prev != '^' {
            if !cur.is_empty() {
                out.push((negative, std::mem::take(&mut cur)));
            }
            negative = ch == '-';
        } else {
            cur.push(ch);
        }
        prev = ch;
    }
    if !cur.is_empty() {
        out.push((negative, cur));
    }
    if out.is_empty() {
        return Err(Error::Parse(format!("empty Laurent polynomial {text:?}")));
    }
    Ok(out)
}

/// First `a` in `T \ {0}`, in the order given, with `p(a) in E - E`, together
/// with `(e1, e2)` such that `e1 - e2 = p(a)`.
pub fn laurent_fs_search<F: Field>(
    field: &F,
    truncation: &[F::Elem],
    e: &[F::Elem],
    laurent: &Laurent<F::Elem>,
) -> Result<PatternReport<[F::Elem; 3]>> {
    let members: HashSet<&F::Elem> = e.iter().collect();
    let found = truncation
        .par_iter()
        .filter(|a| !field.is_zero(a))
        .map(|a| -> Result<Option<[F::Elem; 3]>> {
            let v = laurent.eval(field, a)?;
            Ok(e.iter().find_map(|e2| {
                let e1 = field.add(e2, &v);
                members.contains(&e1).then(|| [a.clone(), e1, e2.clone()])
            }))
        })
        .find_first(|r| !matches!(r, Ok(None)));
    let hits = match found {
        Some(r) => vec![r?.expect("filtered to hits")],
        None => Vec::new(),
    };
    Ok(PatternReport {
        space: format!("{} candidates, |E| = {}", truncation.len(), e.len()),
        hits,
        exhaustive: true,
        exploratory: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::DEFAULT_CAP;
    use crate::scalar::{rat, Rationals};

    fn ff(q: u64) -> FiniteField {
        FiniteField::of_order(q).unwrap()
    }

    #[test]
    fn triples() {
        assert!(hyperbola_triple_search(&ff(5), DEFAULT_CAP)
            .unwrap()
            .hits
            .is_empty());
        assert!(hyperbola_triple_search(&ff(2), DEFAULT_CAP)
            .unwrap()
            .hits
            .is_empty());
        let k = ff(4);
        let r = hyperbola_triple_search(&k, DEFAULT_CAP).unwrap();
        let fam = char2_triple_family(&k);
        assert_eq!(fam.len(), 6);
        assert_eq!(r.hits.iter().copied().collect::<BTreeSet<_>>(), fam);
        let g = k.generator();
        assert!(r.hits.contains(&[g, k.one(), g]));
    }

    #[test]
    fn diffsets() {
        let k = ff(5);
        let r = hyperbola_diffset_search(&k, FqElem(1), 2, DEFAULT_CAP).unwrap();
        assert_eq!(r.hits.len(), 25 * 4 / 2);
        assert!(hyperbola_diffset_search(&k, FqElem(1), 4, DEFAULT_CAP)
            .unwrap()
            .hits
            .is_empty());
        let k7 = ff(7);
        assert!(hyperbola_diffset_search(&k7, FqElem(3), 4, DEFAULT_CAP)
            .unwrap()
            .hits
            .is_empty());
        let k3 = ff(3);
        for t in 1..3 {
            for size in 2..=4 {
                let a = hyperbola_diffset_search(&k3, FqElem(t), size, DEFAULT_CAP).unwrap();
                let b = hyperbola_diffset_naive(&k3, FqElem(t), size, DEFAULT_CAP).unwrap();
                let mut ah = a.hits.clone();
                ah.sort();
                let mut bh = b.hits.clone();
                bh.sort();
                assert_eq!(ah, bh, "t={t} size={size}");
            }
        }
    }

    #[test]
    fn coverage_examples() {
        let k = ff(5);
        let all: Vec<Point> = (0..25).map(|i| point_at(&k, i)).collect();
        assert_eq!(prod_coverage(&k, &all).unwrap().covered.len(), 5);
        let c = prod_coverage(&k, &[(FqElem(0), FqElem(0)), (FqElem(1), FqElem(1))]).unwrap();
        assert!(c.covered.contains(&FqElem(0)) && c.covered.contains(&FqElem(1)));
        assert!(matches!(
            prod_coverage(&k, &all[..1]),
            Err(Error::TooSmall(1))
        ));
    }

    #[test]
    fn spacetime() {
        let k = ff(5);
        let e: Vec<Point> = (0..25).step_by(3).map(|i| point_at(&k, i)).collect();
        for z in 0..5 {
            let a = spacetime_search(&k, FqElem(z), &e);
            let b = spacetime_direct(&k, FqElem(z), &e);
            assert_eq!(a.hits, b.hits);
        }
        assert!(!spacetime_search(&k, FqElem(0), &e[..1]).hits.is_empty());

        let k8 = ff(8);
        let g = k8.generator();
        let e = char2_spacetime_counterexample(&k8, &[g, k8.mul(&g, &g)]).unwrap();
        assert_eq!(e.len(), 16);
        assert!(spacetime_search(&k8, k8.one(), &e).hits.is_empty());
        assert!(char2_spacetime_counterexample(&k8, &[FqElem(0), FqElem(1)]).is_err());
    }

    #[test]
    fn laurent() {
        let q = FieldDescriptor::Rational;
        let p = parse_laurent(&q, "X^2 - X^-1").unwrap();
        assert_eq!(p.terms().len(), 2);
        assert!(parse_laurent(&q, "X + 1").is_err());
        let x = parse_laurent(&q, "X").unwrap();
        let e = [Value::Rational(rat(0, 1)), Value::Rational(rat(5, 2))];
        let t: Vec<Value> = (-12..=12).map(|k| Value::Rational(rat(k, 4))).collect();
        let r = laurent_fs_search(&q, &t, &e, &x).unwrap();
        assert_eq!(r.hits[0][0], Value::Rational(rat(-5, 2)));
        let pl = Laurent::new(&Rationals, vec![(1, rat(1, 1)), (-1, rat(1, 1))]).unwrap();
        assert_eq!(pl.eval(&Rationals, &rat(2, 1)).unwrap(), rat(5, 2));
    }
}
