//! The rational function field `F_p(t)`.
//!
//! Elements are stored as reduced fractions with a monic denominator, so equal
//! functions have equal representations.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::poly::{parse_poly, Poly};
use crate::scalar::{Field, PrimeField};

pub type FpPoly = Poly<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: FpPoly,
    den: FpPoly,
}

impl PartialOrd for RatFunc {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RatFunc {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.den.degree(), &self.den, self.num.degree(), &self.num).cmp(&(
            other.den.degree(),
            &other.den,
            other.num.degree(),
            &other.num,
        ))
    }
}

impl RatFunc {
    pub fn num(&self) -> &FpPoly {
        &self.num
    }

    pub fn den(&self) -> &FpPoly {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalFunctionField {
    fp: PrimeField,
}

impl RationalFunctionField {
    pub fn new(p: u64) -> Result<Self> {
        Ok(RationalFunctionField {
            fp: PrimeField::new(p)?,
        })
    }

    pub fn p(&self) -> u64 {
        self.fp.p()
    }

    pub fn prime_field(&self) -> &PrimeField {
        &self.fp
    }

    /// `num / den` in lowest terms.
    pub fn fraction(&self, num: FpPoly, den: FpPoly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(self.zero());
        }
        let g = num.gcd(&self.fp, &den);
        let (n, _) = num.div_rem(&self.fp, &g)?;
        let (d, _) = den.div_rem(&self.fp, &g)?;
        let lead = self.fp.inv(d.leading().expect("nonzero"))?;
        Ok(RatFunc {
            num: n.scale(&self.fp, &lead),
            den: d.scale(&self.fp, &lead),
        })
    }

    pub fn from_poly(&self, p: FpPoly) -> RatFunc {
        RatFunc {
            num: p,
            den: Poly::one(&self.fp),
        }
    }

    /// The variable `t`.
    pub fn t(&self) -> RatFunc {
        self.from_poly(Poly::x(&self.fp))
    }

    /// `y` with `y^p = x`, when one exists.
    ///
    /// A reduced fraction is a p-th power exactly when numerator and denominator
    /// are polynomials in `t^p`; Frobenius fixes `F_p`, so the root is obtained
    /// by `f(t^p) -> f(t)`.
    pub fn pth_root(&self, x: &RatFunc) -> Result<RatFunc> {
        let p = self.p() as usize;
        let deflate = |f: &FpPoly| -> Option<FpPoly> {
            let c = f.coeffs();
            if c.iter().enumerate().any(|(i, &v)| v != 0 && i % p != 0) {
                return None;
            }
            Some(Poly::new(&self.fp, c.iter().step_by(p).copied().collect()))
        };
        match (deflate(&x.num), deflate(&x.den)) {
            (Some(n), Some(d)) => self.fraction(n, d),
            _ => Err(Error::NotAPthPower(self.format(x))),
        }
    }

    /// Coefficients of the expansion at infinity in powers of `1/t`, returned
    /// as `(top_exponent, coeffs)` where `coeffs[i]` multiplies `t^(top - i)`.
    /// Zero maps to `(0, [])`.
    pub fn laurent_at_infinity(&self, f: &RatFunc, depth: usize) -> (i64, Vec<u64>) {
        let Some(dn) = f.num.degree() else {
            return (0, Vec::new());
        };
        let dd = f.den.degree().expect("nonzero denominator");
        let top = dn as i64 - dd as i64;
        if depth == 0 {
            return (top, Vec::new());
        }
        // num * t^s / den = Q + R/den; Q holds every coefficient down to t^(-s).
        let s = (depth as i64 - 1 - top).max(0) as usize;
        let shifted = f.num.mul(&self.fp, &Poly::monomial(&self.fp, 1, s));
        let (q, _) = shifted
            .div_rem(&self.fp, &f.den)
            .expect("nonzero denominator");
        let coeffs = (0..depth)
            .map(|i| {
                let e = top - i as i64 + s as i64;
                if e < 0 {
                    0
                } else {
                    q.coeff(&self.fp, e as usize)
                }
            })
            .collect();
        (top, coeffs)
    }

    /// Coefficient of `t^-1` at infinity, read off a `depth`-term expansion.
    pub fn residue_coefficient(&self, f: &RatFunc, depth: usize) -> Result<u64> {
        let Some(dn) = f.num.degree() else {
            return Ok(0);
        };
        let dd = f.den.degree().expect("nonzero denominator");
        let needed = (dn + dd).max((dn as i64 - dd as i64 + 1).max(0) as usize);
        if depth <= needed {
            return Err(Error::DepthInsufficient { depth, needed });
        }
        let (top, coeffs) = self.laurent_at_infinity(f, depth);
        let idx = top + 1;
        Ok(if idx < 0 { 0 } else { coeffs[idx as usize] })
    }

    /// Closed form of the `t^-1` coefficient: `lc(num mod den) / lc(den)` when
    /// the remainder has degree `deg den - 1`, else 0.
    pub fn residue_closed_form(&self, f: &RatFunc) -> u64 {
        if f.num.is_zero() {
            return 0;
        }
        let r = f.num.rem(&self.fp, &f.den).expect("nonzero denominator");
        let dd = f.den.degree().expect("nonzero");
        match r.degree() {
            Some(d) if d + 1 == dd => *r.leading().expect("nonzero"),
            _ => 0,
        }
    }

    /// Order of vanishing at the monic irreducible `pi`.
    pub fn valuation(&self, f: &RatFunc, pi: &FpPoly) -> Result<i64> {
        if f.num.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let count = |g: &FpPoly| -> i64 {
            let mut g = g.clone();
            let mut k = 0;
            loop {
                let (q, r) = g.div_rem(&self.fp, pi).expect("nonzero");
                if !r.is_zero() {
                    return k;
                }
                g = q;
                k += 1;
            }
        };
        Ok(count(&f.num) - count(&f.den))
    }

    /// Parses `poly` or `poly/poly` in the variable `t`, parentheses optional.
    /// Coefficients are integers reduced mod `p`.
    pub fn parse_elem(&self, s: &str) -> Result<RatFunc> {
        let s = s.trim();
        let mut depth = 0i32;
        let mut split = None;
        for (i, ch) in s.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                '/' if depth == 0 && split.is_none() => split = Some(i),
                _ => {}
            }
        }
        let strip = |x: &str| -> String {
            let x = x.trim();
            x.strip_prefix('(')
                .and_then(|y| y.strip_suffix(')'))
                .unwrap_or(x)
                .to_string()
        };
        match split {
            Some(i) => {
                let n = parse_poly(&self.fp, &strip(&s[..i]), "t")?;
                let d = parse_poly(&self.fp, &strip(&s[i + 1..]), "t")?;
                self.fraction(n, d)
            }
            None => {
                let n = parse_poly(&self.fp, &strip(s), "t")?;
                Ok(self.from_poly(n))
            }
        }
    }
}

impl Field for RationalFunctionField {
    type Elem = RatFunc;

    fn zero(&self) -> RatFunc {
        self.from_poly(Poly::zero())
    }
    fn one(&self) -> RatFunc {
        self.from_poly(Poly::one(&self.fp))
    }
    fn add(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        if a.den == b.den {
            return self
                .fraction(a.num.add(&self.fp, &b.num), a.den.clone())
                .expect("nonzero denominator");
        }
        let n = a
            .num
            .mul(&self.fp, &b.den)
            .add(&self.fp, &b.num.mul(&self.fp, &a.den));
        self.fraction(n, a.den.mul(&self.fp, &b.den))
            .expect("nonzero denominator")
    }
    fn neg(&self, a: &RatFunc) -> RatFunc {
        RatFunc {
            num: a.num.neg(&self.fp),
            den: a.den.clone(),
        }
    }
    fn mul(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        self.fraction(a.num.mul(&self.fp, &b.num), a.den.mul(&self.fp, &b.den))
            .expect("nonzero denominator")
    }
    fn inv(&self, a: &RatFunc) -> Result<RatFunc> {
        if a.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.fraction(a.den.clone(), a.num.clone())
    }
    fn characteristic(&self) -> u64 {
        self.p()
    }
    fn from_i64(&self, n: i64) -> RatFunc {
        self.from_poly(Poly::constant(&self.fp, self.fp.reduce_i64(n)))
    }
    fn format(&self, a: &RatFunc) -> String {
        let n = a.num.format(&self.fp, "t");
        if a.is_polynomial() {
            n
        } else {
            format!("({n})/({})", a.den.format(&self.fp, "t"))
        }
    }
    fn is_zero(&self, a: &RatFunc) -> bool {
        a.num.is_zero()
    }
}

/// Monic irreducible polynomials over `F_p` of degree `1..=max_deg`, ordered
/// by degree then coefficients.
pub fn monic_irreducibles(p: u64, max_deg: usize) -> Result<Vec<FpPoly>> {
    let fp = PrimeField::new(p)?;
    let mut out: Vec<FpPoly> = Vec::new();
    for d in 1..=max_deg {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut c = Vec::with_capacity(d + 1);
            let mut x = idx;
            for _ in 0..d {
                c.push(x % p);
                x /= p;
            }
            c.push(1);
            let f = Poly::new(&fp, c);
            // irreducible iff no irreducible of degree <= d/2 divides it
            let reducible = out
                .iter()
                .take_while(|g| 2 * g.degree().unwrap_or(0) <= d)
                .any(|g| f.rem(&fp, g).expect("nonzero").is_zero());
            if !reducible {
                out.push(f);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> RationalFunctionField {
        RationalFunctionField::new(3).unwrap()
    }

    #[test]
    fn inverse_of_t_plus_one() {
        let k = f3();
        let x = k.parse_elem("t+1").unwrap();
        let y = k.pow(&x, -1).unwrap();
        assert_eq!(y, k.parse_elem("1/(t+1)").unwrap());
        assert_eq!(k.mul(&x, &y), k.one());
    }

    #[test]
    fn reduced_with_monic_denominator() {
        let k = f3();
        let a = k.parse_elem("(2t^2+2t)/(2t+2)").unwrap();
        assert_eq!(a, k.t());
        let b = k.parse_elem("(t)/(2t+1)").unwrap();
        assert_eq!(b.den().leading(), Some(&1));
    }

    #[test]
    fn pth_roots() {
        let k = f3();
        let t3 = k.parse_elem("t^3").unwrap();
        assert_eq!(k.pth_root(&t3).unwrap(), k.t());
        assert!(matches!(k.pth_root(&k.t()), Err(Error::NotAPthPower(_))));
        let x = k.parse_elem("t^6 + 2t^3").unwrap();
        let expected = k.parse_elem("t^2 + 2t").unwrap();
        // cube the expected value symbolically as the oracle
        assert_eq!(k.pow(&expected, 3).unwrap(), x);
        assert_eq!(k.pth_root(&x).unwrap(), expected);
    }

    #[test]
    fn laurent_expansion_of_one_over_t() {
        let k = f3();
        let x = k.parse_elem("1/t").unwrap();
        assert_eq!(k.residue_coefficient(&x, 3).unwrap(), 1);
        assert_eq!(k.laurent_at_infinity(&x, 3), (-1, vec![1, 0, 0]));
    }

    #[test]
    fn laurent_geometric_series() {
        // 1/(t-1) = t^-1 + t^-2 + ...
        let k = f3();
        let x = k.parse_elem("1/(t+2)").unwrap();
        assert_eq!(k.laurent_at_infinity(&x, 4), (-1, vec![1, 1, 1, 1]));
    }

    #[test]
    fn depth_is_checked() {
        let k = f3();
        let x = k.parse_elem("(t^2+1)/(t^3+t+1)").unwrap();
        assert!(matches!(
            k.residue_coefficient(&x, 5),
            Err(Error::DepthInsufficient { .. })
        ));
        assert!(k.residue_coefficient(&x, 6).is_ok());
    }

    #[test]
    fn valuations() {
        let k = f3();
        let x = k.parse_elem("(t^2)/(t+1)").unwrap();
        let t = Poly::x(k.prime_field());
        let t1 = parse_poly(k.prime_field(), "t+1", "t").unwrap();
        assert_eq!(k.valuation(&x, &t).unwrap(), 2);
        assert_eq!(k.valuation(&x, &t1).unwrap(), -1);
    }

    #[test]
    fn irreducible_counts() {
        // Gauss: number of monic irreducibles of degree d over F_2 is 2,1,2,3
        let irr = monic_irreducibles(2, 4).unwrap();
        let counts: Vec<usize> = (1..=4)
            .map(|d| irr.iter().filter(|f| f.degree() == Some(d)).count())
            .collect();
        assert_eq!(counts, vec![2, 1, 2, 3]);
    }
}
