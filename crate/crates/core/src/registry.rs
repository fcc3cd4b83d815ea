//! Registry of field moduli, one per `(p, n)`.
//!
//! Moduli follow Conway's rule: the first monic primitive polynomial, in the
//! order of `x^n - a_1 x^{n-1} + a_2 x^{n-2} - ...` with `(a_1, .., a_n)`
//! lexicographic, such that `x^((p^n-1)/(p^m-1))` is a root of the `(p, m)`
//! modulus for every proper divisor `m | n`. This makes subfield embeddings
//! canonical. A precomputed table ships with the crate; missing pairs are
//! searched on demand and cached.
//!
//! Text format, one modulus per line: `p n : c_0 c_1 ... c_n` (low to high).

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::scalar::{is_prime, prime_factors};

const BUILTIN: &str = include_str!("../data/moduli.txt");

/// Largest `p^n` for which an on-demand search is attempted.
pub const SEARCH_LIMIT: u64 = 1 << 32;

type Moduli = BTreeMap<(u64, u32), Vec<u64>>;

static REGISTRY: OnceLock<Mutex<Moduli>> = OnceLock::new();

fn registry() -> &'static Mutex<Moduli> {
    REGISTRY.get_or_init(|| Mutex::new(parse_registry(BUILTIN).expect("built-in registry parses")))
}

pub fn parse_registry(text: &str) -> Result<BTreeMap<(u64, u32), Vec<u64>>> {
    let mut out = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::parse(format!("registry line {}: `{line}`", lineno + 1));
        let (head, tail) = line.split_once(':').ok_or_else(bad)?;
        let mut head = head.split_whitespace();
        let p: u64 = head.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let n: u32 = head.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let coeffs: Vec<u64> = tail
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if coeffs.len() != n as usize + 1
            || coeffs[n as usize] != 1
            || coeffs.iter().any(|&c| c >= p)
        {
            return Err(bad());
        }
        out.insert((p, n), coeffs);
    }
    Ok(out)
}

pub fn format_registry(entries: &BTreeMap<(u64, u32), Vec<u64>>) -> String {
    let mut s = String::new();
    for ((p, n), c) in entries {
        let cs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        s.push_str(&format!("{p} {n} : {}\n", cs.join(" ")));
    }
    s
}

/// Modulus for `F_{p^n}`, low-to-high coefficients, monic.
pub fn modulus(p: u64, n: u32) -> Result<Vec<u64>> {
    if !is_prime(p) {
        return Err(Error::InvalidField(format!("{p} is not prime")));
    }
    if n == 0 {
        return Err(Error::InvalidField("degree 0".into()));
    }
    if let Some(c) = registry().lock().expect("registry lock").get(&(p, n)) {
        return Ok(c.clone());
    }
    let mut lower = BTreeMap::new();
    for m in 1..n {
        if n.is_multiple_of(m) {
            lower.insert(m, modulus(p, m)?);
        }
    }
    let found = search_modulus(p, n, &lower)?;
    registry()
        .lock()
        .expect("registry lock")
        .insert((p, n), found.clone());
    Ok(found)
}

/// Snapshot of every modulus currently known.
pub fn snapshot() -> BTreeMap<(u64, u32), Vec<u64>> {
    registry().lock().expect("registry lock").clone()
}

/// Searches for the Conway-rule modulus given the moduli of all proper subfields.
pub fn search_modulus(p: u64, n: u32, lower: &BTreeMap<u32, Vec<u64>>) -> Result<Vec<u64>> {
    let q = checked_pow(p, n)
        .filter(|&q| q <= SEARCH_LIMIT)
        .ok_or(Error::CapExceeded {
            size: (p as u128).saturating_pow(n),
            cap: SEARCH_LIMIT,
        })?;
    let order = q - 1;
    let factors = prime_factors(order);
    let nn = n as usize;
    let mut a = vec![0u64; nn];
    loop {
        // x^n - a_1 x^{n-1} + a_2 x^{n-2} - ...
        let mut f = vec![0u64; nn + 1];
        f[nn] = 1;
        for i in 1..=nn {
            let ai = a[i - 1];
            f[nn - i] = if i % 2 == 1 { (p - ai) % p } else { ai };
        }
        if f[0] != 0 && is_primitive(&f, p, order, &factors) && compatible(&f, p, q, lower) {
            return Ok(f);
        }
        // next tuple, a_n varies fastest
        let mut i = nn;
        loop {
            if i == 0 {
                return Err(Error::InvalidField(format!("no modulus found for {p}^{n}")));
            }
            i -= 1;
            a[i] += 1;
            if a[i] < p {
                break;
            }
            a[i] = 0;
        }
    }
}

fn checked_pow(p: u64, n: u32) -> Option<u64> {
    p.checked_pow(n)
}

fn is_primitive(f: &[u64], p: u64, order: u64, factors: &[u64]) -> bool {
    let x = x_mod(f, p);
    if powmod(&x, order, f, p) != one(f.len() - 1) {
        return false;
    }
    factors
        .iter()
        .all(|r| powmod(&x, order / r, f, p) != one(f.len() - 1))
}

fn compatible(f: &[u64], p: u64, q: u64, lower: &BTreeMap<u32, Vec<u64>>) -> bool {
    let x = x_mod(f, p);
    lower.iter().all(|(&m, g)| {
        let qm = p.pow(m);
        let h = powmod(&x, (q - 1) / (qm - 1), f, p);
        // Horner evaluation of g at h in F_p[x]/(f).
        let mut acc = vec![0u64; f.len() - 1];
        for c in g.iter().rev() {
            acc = mulmod(&acc, &h, f, p);
            acc[0] = (acc[0] + c) % p;
        }
        acc.iter().all(|&c| c == 0)
    })
}

fn one(n: usize) -> Vec<u64> {
    let mut v = vec![0u64; n];
    v[0] = 1;
    v
}

fn x_mod(f: &[u64], p: u64) -> Vec<u64> {
    let n = f.len() - 1;
    if n == 1 {
        vec![(p - f[0]) % p]
    } else {
        let mut v = vec![0u64; n];
        v[1] = 1;
        v
    }
}

/// Product of two residues modulo the monic `f`; residues have length `deg f`.
pub(crate) fn mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let n = f.len() - 1;
    let mut prod = vec![0u64; 2 * n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    for i in (n..2 * n).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for j in 0..n {
            prod[i - n + j] = (prod[i - n + j] + (p - c) * f[j]) % p;
        }
    }
    prod.truncate(n);
    prod
}

pub(crate) fn powmod(a: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut base = a.to_vec();
    let mut acc = one(f.len() - 1);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(&acc, &base, f, p);
        }
        e >>= 1;
        if e > 0 {
            base = mulmod(&base, &base, f, p);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_conway_polynomials() {
        // Published Conway polynomials, low-to-high.
        assert_eq!(modulus(2, 1).unwrap(), vec![1, 1]);
        assert_eq!(modulus(2, 2).unwrap(), vec![1, 1, 1]);
        assert_eq!(modulus(2, 3).unwrap(), vec![1, 1, 0, 1]);
        assert_eq!(modulus(2, 4).unwrap(), vec![1, 1, 0, 0, 1]);
        assert_eq!(modulus(2, 8).unwrap(), vec![1, 0, 1, 1, 1, 0, 0, 0, 1]);
        assert_eq!(modulus(3, 1).unwrap(), vec![1, 1]);
        assert_eq!(modulus(3, 2).unwrap(), vec![2, 2, 1]);
        assert_eq!(modulus(3, 3).unwrap(), vec![1, 2, 0, 1]);
        assert_eq!(modulus(5, 1).unwrap(), vec![3, 1]);
        assert_eq!(modulus(5, 2).unwrap(), vec![2, 4, 1]);
        assert_eq!(modulus(7, 1).unwrap(), vec![4, 1]);
        assert_eq!(modulus(7, 2).unwrap(), vec![3, 6, 1]);
    }

    #[test]
    fn builtin_table_matches_search() {
        let builtin = parse_registry(BUILTIN).unwrap();
        for (&(p, n), c) in &builtin {
            if p.pow(n) > 1 << 12 {
                continue;
            }
            let lower: BTreeMap<u32, Vec<u64>> = (1..n)
                .filter(|m| n % m == 0)
                .map(|m| (m, builtin[&(p, m)].clone()))
                .collect();
            assert_eq!(&search_modulus(p, n, &lower).unwrap(), c, "({p},{n})");
        }
    }

    #[test]
    fn registry_text_round_trip() {
        let snap = parse_registry(BUILTIN).unwrap();
        assert_eq!(parse_registry(&format_registry(&snap)).unwrap(), snap);
        assert!(parse_registry("2 2 : 1 1").is_err());
        assert!(parse_registry("3 1 : 1 2").is_err());
    }
}
