//! The sets `Q(A)` in `PGL_2(K)`: elements sending `([1:0], [0:1], [1:1])` to
//! three distinct points `[x:1]` with `x` in `A`, together with the
//! translation and inversion identities and the Følner ratios they control.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Field;

/// `[x : 1]` or `[1 : 0]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjPoint<E> {
    Affine(E),
    Infinity,
}

impl<E: Clone + Eq> ProjPoint<E> {
    /// `[x : y]`, normalized; `None` for `[0 : 0]`.
    pub fn from_pair<F: Field<Elem = E>>(field: &F, x: &E, y: &E) -> Option<Self> {
        if field.is_zero(y) {
            (!field.is_zero(x)).then_some(ProjPoint::Infinity)
        } else {
            Some(ProjPoint::Affine(field.div(x, y).expect("y is nonzero")))
        }
    }

    pub fn affine(&self) -> Option<&E> {
        match self {
            ProjPoint::Affine(x) => Some(x),
            ProjPoint::Infinity => None,
        }
    }
}

/// `[[a, b], [c, d]]` up to scalars, scaled so the first nonzero entry is one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pgl2Element<E> {
    m: [E; 4],
}

impl<E: Clone + Eq> Pgl2Element<E> {
    pub fn new<F: Field<Elem = E>>(field: &F, m: [E; 4]) -> Result<Self> {
        let det = field.sub(&field.mul(&m[0], &m[3]), &field.mul(&m[1], &m[2]));
        if field.is_zero(&det) {
            return Err(Error::DivisionByZero);
        }
        let lead = m
            .iter()
            .find(|x| !field.is_zero(x))
            .expect("det is nonzero");
        let s = field.inv(lead)?;
        Ok(Pgl2Element {
            m: m.map(|x| field.mul(&x, &s)),
        })
    }

    pub fn matrix(&self) -> &[E; 4] {
        &self.m
    }

    /// `u_+(b) = [[1, b], [0, 1]]`.
    pub fn u_plus<F: Field<Elem = E>>(field: &F, b: &E) -> Self {
        Pgl2Element::new(field, [field.one(), b.clone(), field.zero(), field.one()])
            .expect("unipotent")
    }

    /// `u_-(b) = [[1, 0], [b, 1]]`.
    pub fn u_minus<F: Field<Elem = E>>(field: &F, b: &E) -> Self {
        Pgl2Element::new(field, [field.one(), field.zero(), b.clone(), field.one()])
            .expect("unipotent")
    }

    pub fn compose<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        let (a, b) = (&self.m, &other.m);
        let dot = |i: usize, j: usize| {
            field.add(
                &field.mul(&a[2 * i], &b[j]),
                &field.mul(&a[2 * i + 1], &b[2 + j]),
            )
        };
        Pgl2Element::new(field, [dot(0, 0), dot(0, 1), dot(1, 0), dot(1, 1)])
            .expect("product of invertibles")
    }

    pub fn act<F: Field<Elem = E>>(&self, field: &F, p: &ProjPoint<E>) -> ProjPoint<E> {
        let (x, y) = match p {
            ProjPoint::Affine(x) => (x.clone(), field.one()),
            ProjPoint::Infinity => (field.one(), field.zero()),
        };
        let m = &self.m;
        let nx = field.add(&field.mul(&m[0], &x), &field.mul(&m[1], &y));
        let ny = field.add(&field.mul(&m[2], &x), &field.mul(&m[3], &y));
        ProjPoint::from_pair(field, &nx, &ny).expect("invertible matrix")
    }

    /// Images of `([1:0], [0:1], [1:1])`, when all three are affine.
    pub fn triple<F: Field<Elem = E>>(&self, field: &F) -> Option<[E; 3]> {
        let ells = [
            ProjPoint::Infinity,
            ProjPoint::Affine(field.zero()),
            ProjPoint::Affine(field.one()),
        ];
        let [a, b, c] = ells.map(|l| self.act(field, &l));
        Some([
            a.affine()?.clone(),
            b.affine()?.clone(),
            c.affine()?.clone(),
        ])
    }

    /// The unique element sending `([1:0], [0:1], [1:1])` to `([x1:1], [x2:1], [x3:1])`.
    pub fn from_triple<F: Field<Elem = E>>(field: &F, x: &[E; 3]) -> Result<Self> {
        let d32 = field.sub(&x[2], &x[1]);
        let d13 = field.sub(&x[0], &x[2]);
        Pgl2Element::new(
            field,
            [field.mul(&d32, &x[0]), field.mul(&d13, &x[1]), d32, d13],
        )
    }
}

impl<E: fmt::Debug> fmt::Display for Pgl2Element<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:?}, {:?}], [{:?}, {:?}]]",
            self.m[0], self.m[1], self.m[2], self.m[3]
        )
    }
}

fn distinct<F: Field>(a: &[F::Elem]) -> Vec<F::Elem> {
    let mut seen = HashSet::new();
    a.iter()
        .filter(|x| seen.insert((*x).clone()))
        .cloned()
        .collect()
}

/// `Q(A)`, one element per ordered triple of distinct points of `A`.
pub fn q_set<F: Field>(field: &F, a: &[F::Elem]) -> Result<Vec<Pgl2Element<F::Elem>>> {
    let a = distinct::<F>(a);
    if a.len() < 3 {
        return Err(Error::TooSmall(a.len()));
    }
    let a = &a;
    (0..a.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..a.len()).flat_map(move |j| {
                (0..a.len())
                    .filter(move |&k| i != j && j != k && i != k)
                    .map(move |k| {
                        Pgl2Element::from_triple(field, &[a[i].clone(), a[j].clone(), a[k].clone()])
                    })
            })
        })
        .collect()
}

/// `phi_b(x) = x / (1 + b x)`, undefined at `x = -1/b`.
pub fn phi_b<F: Field>(field: &F, b: &F::Elem, x: &F::Elem) -> Option<F::Elem> {
    let den = field.add(&field.one(), &field.mul(b, x));
    field.div(x, &den).ok()
}

fn translate<F: Field>(field: &F, a: &[F::Elem], b: &F::Elem) -> Vec<F::Elem> {
    a.iter().map(|x| field.add(x, b)).collect()
}

fn phi_image<F: Field>(field: &F, a: &[F::Elem], b: &F::Elem) -> Vec<F::Elem> {
    a.iter().filter_map(|x| phi_b(field, b, x)).collect()
}

fn intersect<F: Field>(a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
    let bs: HashSet<&F::Elem> = b.iter().collect();
    distinct::<F>(a)
        .into_iter()
        .filter(|x| bs.contains(x))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TranslateCheck {
    /// `u_+(b) Q(A) = Q(A + b)`.
    pub plus_equal: bool,
    /// `u_-(b) Q(A)` contains `Q(phi_b(A \ {-1/b}))`.
    pub minus_contains: bool,
}

impl TranslateCheck {
    pub fn holds(&self) -> bool {
        self.plus_equal && self.minus_contains
    }
}

pub fn translate_identity_check<F: Field>(
    field: &F,
    a: &[F::Elem],
    b: &F::Elem,
) -> Result<TranslateCheck> {
    let q = q_set(field, a)?;
    let up = Pgl2Element::u_plus(field, b);
    let um = Pgl2Element::u_minus(field, b);
    let moved_plus: HashSet<_> = q.iter().map(|g| up.compose(field, g)).collect();
    let shifted: HashSet<_> = q_set(field, &translate(field, a, b))?.into_iter().collect();
    let moved_minus: HashSet<_> = q.iter().map(|g| um.compose(field, g)).collect();
    let image = phi_image(field, &distinct::<F>(a), b);
    let minus_contains = if distinct::<F>(&image).len() < 3 {
        true
    } else {
        q_set(field, &image)?
            .iter()
            .all(|g| moved_minus.contains(g))
    };
    Ok(TranslateCheck {
        plus_equal: moved_plus == shifted,
        minus_contains,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionCheck {
    /// `|A ∩ phi_b(A \ {-1/b})|`.
    pub lhs: usize,
    /// `|(A \ {0}) ∩ (A + b)|`.
    pub rhs: usize,
    pub equal: bool,
}

/// Both sides of the inversion section count for an inverse-closed `A`.
pub fn inversion_section_check<F: Field>(
    field: &F,
    a: &[F::Elem],
    b: &F::Elem,
) -> Result<SectionCheck> {
    let a = distinct::<F>(a);
    let set: HashSet<&F::Elem> = a.iter().collect();
    let closed = a
        .iter()
        .all(|x| field.inv(x).is_ok_and(|y| set.contains(&y)));
    if !closed {
        return Err(Error::NotInverseClosed);
    }
    if field.is_zero(b) {
        return Err(Error::ZeroArgument);
    }
    let lhs = intersect::<F>(&a, &phi_image(field, &a, b)).len();
    let nonzero: Vec<F::Elem> = a.iter().filter(|x| !field.is_zero(x)).cloned().collect();
    let rhs = intersect::<F>(&nonzero, &translate(field, &a, b)).len();
    Ok(SectionCheck {
        lhs,
        rhs,
        equal: lhs == rhs,
    })
}

/// `(F \ {0}) ∪ (F \ {0})^-1`.
pub fn proof_set<F: Field>(field: &F, f: &[F::Elem]) -> Vec<F::Elem> {
    let nz: Vec<F::Elem> = f.iter().filter(|x| !field.is_zero(x)).cloned().collect();
    let inv: Vec<F::Elem> = nz.iter().map(|x| field.inv(x).expect("nonzero")).collect();
    let mut all = distinct::<F>(&[nz, inv].concat());
    all.sort();
    all
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FolnerRatio {
    /// `|Q(A) ∩ u(b) Q(A)| / |Q(A)|`.
    pub ratio: BigRational,
    /// `|Q(A ∩ (A + b))| / |Q(A)|`, a lower bound for both generators when
    /// `A` is inverse-closed and equal to `ratio` for `u_+`.
    pub proof_bound: BigRational,
    pub a_size: usize,
}

fn falling3(n: usize) -> BigInt {
    if n < 3 {
        return BigInt::from(0);
    }
    BigInt::from(n) * BigInt::from(n - 1) * BigInt::from(n - 2)
}

/// The ratio for `u_+(b)` or `u_-(b)`, from closed-form counts.
///
/// `Q(A) ∩ u_+(b) Q(A) = Q(A ∩ (A + b))`, and `Q(A) ∩ u_-(b) Q(A)` is `Q` of
/// the `x` in `A` with `x != 1/b` and `phi_{-b}(x)` in `A`.
pub fn pgl2_folner_ratio<F: Field>(
    field: &F,
    a: &[F::Elem],
    b: &F::Elem,
    gen: Generator,
) -> Result<FolnerRatio> {
    let a = distinct::<F>(a);
    if a.len() < 3 {
        return Err(Error::TooSmall(a.len()));
    }
    let set: HashSet<&F::Elem> = a.iter().collect();
    let plus = intersect::<F>(&a, &translate(field, &a, b)).len();
    let kept = match gen {
        Generator::Plus => plus,
        Generator::Minus => {
            let nb = field.neg(b);
            a.iter()
                .filter(|x| phi_b(field, &nb, x).is_some_and(|y| set.contains(&y)))
                .count()
        }
    };
    let total = falling3(a.len());
    Ok(FolnerRatio {
        ratio: BigRational::new(falling3(kept), total.clone()),
        proof_bound: BigRational::new(falling3(plus), total),
        a_size: a.len(),
    })
}

/// The same ratio by materializing `Q(A)` and its translate.
pub fn pgl2_folner_ratio_materialized<F: Field>(
    field: &F,
    a: &[F::Elem],
    b: &F::Elem,
    gen: Generator,
) -> Result<BigRational> {
    let q = q_set(field, a)?;
    let u = match gen {
        Generator::Plus => Pgl2Element::u_plus(field, b),
        Generator::Minus => Pgl2Element::u_minus(field, b),
    };
    let set: HashSet<&Pgl2Element<F::Elem>> = q.iter().collect();
    let hit = q
        .iter()
        .filter(|g| set.contains(&u.compose(field, g)))
        .count();
    Ok(BigRational::new(BigInt::from(hit), BigInt::from(q.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{FiniteField, FqElem};
    use crate::scalar::{rat, PrimeField, Rationals};

    #[test]
    fn q_set_sizes_and_action() {
        let f = PrimeField::new(5).unwrap();
        let all: Vec<u64> = (0..5).collect();
        assert_eq!(q_set(&f, &all[..3]).unwrap().len(), 6);
        assert_eq!(q_set(&f, &all[..4]).unwrap().len(), 24);
        let q = q_set(&f, &all).unwrap();
        assert_eq!(q.len(), 60);
        assert_eq!(q.iter().collect::<HashSet<_>>().len(), 60);
        for g in &q {
            let t = g.triple(&f).unwrap();
            assert!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
        }
        assert!(matches!(q_set(&f, &[1, 2]), Err(Error::TooSmall(2))));
    }

    #[test]
    fn translation_identities() {
        let f = PrimeField::new(7).unwrap();
        assert!(translate_identity_check(&f, &[0, 1, 2], &3)
            .unwrap()
            .holds());
        assert!(translate_identity_check(&f, &[0, 1, 2], &0)
            .unwrap()
            .holds());
        let a = [rat(1, 1), rat(2, 1), rat(1, 2)];
        assert!(translate_identity_check(&Rationals, &a, &rat(1, 1))
            .unwrap()
            .holds());
    }

    #[test]
    fn section_examples() {
        let r = inversion_section_check(&Rationals, &[rat(1, 1), rat(-1, 1)], &rat(2, 1)).unwrap();
        assert_eq!((r.lhs, r.rhs), (1, 1));
        assert!(matches!(
            inversion_section_check(&Rationals, &[rat(2, 1)], &rat(1, 1)),
            Err(Error::NotInverseClosed)
        ));
        let f = PrimeField::new(11).unwrap();
        let units: Vec<u64> = (1..11).collect();
        for b in 1..11 {
            assert!(inversion_section_check(&f, &units, &b).unwrap().equal);
        }
    }

    #[test]
    fn ratios() {
        let f16 = FiniteField::new(2, 4).unwrap();
        let all: Vec<FqElem> = (0..16).map(FqElem).collect();
        let b = f16.gen_pow(5);
        let plus = pgl2_folner_ratio(&f16, &all, &b, Generator::Plus).unwrap();
        assert_eq!(plus.ratio, rat(1, 1));
        assert_eq!(
            pgl2_folner_ratio_materialized(&f16, &all, &b, Generator::Plus).unwrap(),
            rat(1, 1)
        );
        let minus = pgl2_folner_ratio(&f16, &all, &b, Generator::Minus).unwrap();
        assert_eq!(minus.ratio, rat(13, 16));
        assert_eq!(
            pgl2_folner_ratio_materialized(&f16, &all, &b, Generator::Minus).unwrap(),
            minus.ratio
        );
        let a = proof_set(&f16, &all);
        assert_eq!(
            pgl2_folner_ratio(&f16, &a, &b, Generator::Plus)
                .unwrap()
                .ratio,
            rat(12, 15)
        );

        let box6: Vec<BigRational> = (-12..=12).map(|k| rat(k, 6)).collect();
        let a = proof_set(&Rationals, &box6);
        for gen in [Generator::Plus, Generator::Minus] {
            let r = pgl2_folner_ratio(&Rationals, &a, &rat(1, 1), gen).unwrap();
            assert_eq!(
                pgl2_folner_ratio_materialized(&Rationals, &a, &rat(1, 1), gen).unwrap(),
                r.ratio
            );
            assert!(r.ratio >= r.proof_bound && r.ratio < rat(1, 1));
        }
        assert!(matches!(
            pgl2_folner_ratio(
                &Rationals,
                &[rat(1, 1), rat(2, 1)],
                &rat(1, 1),
                Generator::Plus
            ),
            Err(Error::TooSmall(2))
        ));
    }
}
