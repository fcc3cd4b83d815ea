//! Single operations behind `identity`, `pattern` and `pgl2`, each returning a
//! JSON record.

use folner_core::finite::{FiniteField, FqElem};
use folner_core::identities::{
    build_power_identity, check_linear_independence, poscorr_check, triple_mixing_check,
    SpectrumFunction,
};
use folner_core::patterns::{
    char2_spacetime_counterexample, hyperbola_diffset_search, hyperbola_triple_search,
    laurent_fs_search, parse_laurent, prod_coverage, spacetime_search, Point,
};
use folner_core::pgl2::{
    inversion_section_check, pgl2_folner_ratio, q_set, translate_identity_check, Generator,
};
use folner_core::scalar::format_rational;
use folner_core::{Field, FieldDescriptor, Value};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value as Json};

use crate::scenarios::random_spectrum;
use crate::{CliError, CliResult, Context};

pub fn field(lit: &str) -> CliResult<FieldDescriptor> {
    FieldDescriptor::parse(lit).ctx("fields")
}

fn finite(d: &FieldDescriptor) -> CliResult<FiniteField> {
    d.finite()
        .cloned()
        .ok_or_else(|| CliError::Parse(format!("{d} is not a finite field")))
}

/// Comma-separated elements; `all` lists a finite field.
pub fn elements(d: &FieldDescriptor, list: &str, cap: u64) -> CliResult<Vec<Value>> {
    if list.trim() == "all" {
        return Ok(d
            .enumerate_finite(cap)
            .ctx("fields")?
            .into_iter()
            .map(|e| e.into_value())
            .collect());
    }
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| d.parse_value(s).ctx("fields"))
        .collect()
}

fn finite_elements(k: &FiniteField, list: &str) -> CliResult<Vec<FqElem>> {
    if list.trim() == "all" {
        return Ok((0..k.order()).map(FqElem).collect());
    }
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| k.parse_elem(s).ctx("fields"))
        .collect()
}

/// `x:y` pairs separated by commas.
pub fn points(k: &FiniteField, list: &str) -> CliResult<Vec<Point>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (x, y) = s
                .split_once(':')
                .ok_or_else(|| CliError::Parse(format!("point `{s}` is not `x:y`")))?;
            Ok((
                k.parse_elem(x).ctx("fields")?,
                k.parse_elem(y).ctx("fields")?,
            ))
        })
        .collect()
}

fn fmt_point(k: &FiniteField, (x, y): &Point) -> String {
    format!("({},{})", k.format(x), k.format(y))
}

fn fmt_all<F: Field>(f: &F, xs: &[F::Elem]) -> Vec<String> {
    xs.iter().map(|x| f.format(x)).collect()
}

pub fn power_build(n: u64, p: u64) -> CliResult<Json> {
    let id = build_power_identity(n, p).ctx("identities")?;
    Ok(json!({
        "n": n,
        "p": p,
        "field": id.field().to_string(),
        "exponents": id.exponents(),
        "coeffs": id.format_coeffs(),
        "polys": id.format_polys(),
        "holds": id.holds(),
    }))
}

pub fn independence(n: u64, p: u64, m: i64) -> CliResult<Json> {
    let id = build_power_identity(n, p).ctx("identities")?;
    let r = check_linear_independence(&id, m).ctx("identities")?;
    let witness = r.witness.as_ref().map(|w| fmt_all(id.field(), w));
    Ok(
        json!({"n": n, "p": p, "m": m, "independent": r.independent, "rank": r.rank, "witness": witness}),
    )
}

pub fn mixing3(field_lit: &str, a: &str, cap: u64) -> CliResult<Json> {
    let d = field(field_lit)?;
    let a = d.parse_elem(a).ctx("fields")?;
    let v = triple_mixing_check(&a, cap).ctx("identities")?;
    let one = v.exact_eq(&folner_core::cyclotomic::UnitValue::one()) == Some(true);
    Ok(
        json!({"field": d.to_string(), "a": d.format(a.value()), "value": v.format(), "is_one": one}),
    )
}

pub fn poscorr(field_lit: &str, s: &str, trials: usize, seed: u64) -> CliResult<Json> {
    let d = field(field_lit)?;
    let k = finite(&d)?;
    let s = finite_elements(&k, s)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spectra: Vec<Vec<_>> = (0..trials)
        .map(|_| {
            (0..s.len())
                .map(|_| random_spectrum(&k, &mut rng))
                .collect()
        })
        .collect();
    let results = spectra
        .par_iter()
        .map(|hats: &Vec<Vec<_>>| {
            let phis = hats
                .iter()
                .map(|h| SpectrumFunction::new(&k, h.clone()))
                .collect::<folner_core::Result<Vec<_>>>()?;
            poscorr_check(&k, &phis, &s)
        })
        .collect::<folner_core::Result<Vec<_>>>()
        .ctx("identities")?;
    let held = results.iter().filter(|r| r.holds).count();
    Ok(json!({
        "field": d.to_string(),
        "s": fmt_all(&k, &s),
        "trials": trials,
        "held": held,
        "results": results,
    }))
}

pub fn hyperbola3(field_lit: &str, cap: u64) -> CliResult<Json> {
    let k = finite(&field(field_lit)?)?;
    let r = hyperbola_triple_search(&k, cap).ctx("patterns")?;
    let hits: Vec<Vec<String>> = r.hits.iter().map(|h| fmt_all(&k, h)).collect();
    Ok(
        json!({"space": r.space, "hits": hits, "exhaustive": r.exhaustive, "exploratory": r.exploratory}),
    )
}

pub fn hyperbola_diffset(field_lit: &str, t: &str, size: usize, cap: u64) -> CliResult<Json> {
    let k = finite(&field(field_lit)?)?;
    let t = k.parse_elem(t).ctx("fields")?;
    let r = hyperbola_diffset_search(&k, t, size, cap).ctx("patterns")?;
    let hits: Vec<Vec<String>> = r
        .hits
        .iter()
        .map(|h| h.iter().map(|pt| fmt_point(&k, pt)).collect())
        .collect();
    Ok(
        json!({"space": r.space, "hits": hits, "exhaustive": r.exhaustive, "exploratory": r.exploratory}),
    )
}

pub fn prod(field_lit: &str, pts: &str) -> CliResult<Json> {
    let k = finite(&field(field_lit)?)?;
    let e = points(&k, pts)?;
    let c = prod_coverage(&k, &e).ctx("patterns")?;
    Ok(json!({"covered": fmt_all(&k, &c.covered), "fraction": c.fraction, "exploratory": true}))
}

pub fn spacetime(
    field_lit: &str,
    z: &str,
    pts: Option<&str>,
    e_o: Option<&str>,
) -> CliResult<Json> {
    let k = finite(&field(field_lit)?)?;
    let z = k.parse_elem(z).ctx("fields")?;
    let e = match (pts, e_o) {
        (Some(p), None) => points(&k, p)?,
        (None, Some(o)) => {
            let o = finite_elements(&k, o)?;
            char2_spacetime_counterexample(&k, &o).ctx("patterns")?
        }
        _ => {
            return Err(CliError::Parse(
                "give exactly one of --points and --e-o".into(),
            ))
        }
    };
    let r = spacetime_search(&k, z, &e);
    let hits: Vec<[String; 2]> = r
        .hits
        .iter()
        .map(|(a, b)| [fmt_point(&k, a), fmt_point(&k, b)])
        .collect();
    Ok(json!({
        "space": r.space,
        "set": e.iter().map(|pt| fmt_point(&k, pt)).collect::<Vec<_>>(),
        "hits": hits,
        "exhaustive": r.exhaustive,
        "exploratory": r.exploratory,
    }))
}

pub fn laurent_fs(
    field_lit: &str,
    poly: &str,
    truncation: &str,
    set: &str,
    cap: u64,
) -> CliResult<Json> {
    let d = field(field_lit)?;
    let l = parse_laurent(&d, poly).ctx("patterns")?;
    let t = elements(&d, truncation, cap)?;
    let e = elements(&d, set, cap)?;
    let r = laurent_fs_search(&d, &t, &e, &l).ctx("patterns")?;
    let hits: Vec<Json> = r
        .hits
        .iter()
        .map(|[a, e1, e2]| json!({"a": d.format(a), "e1": d.format(e1), "e2": d.format(e2)}))
        .collect();
    Ok(
        json!({"space": r.space, "hits": hits, "exhaustive": r.exhaustive, "exploratory": r.exploratory}),
    )
}

pub fn generator(name: &str) -> CliResult<Generator> {
    match name {
        "plus" | "+" => Ok(Generator::Plus),
        "minus" | "-" => Ok(Generator::Minus),
        _ => Err(CliError::Parse(format!(
            "generator `{name}` is not plus or minus"
        ))),
    }
}

pub fn pgl2_ratio(
    field_lit: &str,
    set: &str,
    b: &str,
    gen: Generator,
    cap: u64,
) -> CliResult<Json> {
    let d = field(field_lit)?;
    let a = elements(&d, set, cap)?;
    let b = d.parse_value(b).ctx("fields")?;
    let r = pgl2_folner_ratio(&d, &a, &b, gen).ctx("pgl2")?;
    Ok(json!({
        "field": d.to_string(),
        "a_size": r.a_size,
        "b": d.format(&b),
        "generator": if gen == Generator::Plus { "plus" } else { "minus" },
        "ratio": format_rational(&r.ratio),
        "proof_bound": format_rational(&r.proof_bound),
        "ratio_f64": folner_core::cyclotomic::rational_to_f64(&r.ratio),
    }))
}

pub fn pgl2_qset(field_lit: &str, set: &str, limit: usize, cap: u64) -> CliResult<Json> {
    let d = field(field_lit)?;
    let a = elements(&d, set, cap)?;
    let q = q_set(&d, &a).ctx("pgl2")?;
    let n = a.iter().collect::<std::collections::HashSet<_>>().len();
    let shown: Vec<Vec<String>> = q
        .iter()
        .take(limit)
        .map(|g| fmt_all(&d, g.matrix()))
        .collect();
    Ok(json!({
        "field": d.to_string(),
        "a_size": n,
        "size": q.len(),
        "expected": n * (n - 1) * (n - 2),
        "elements": shown,
    }))
}

pub fn pgl2_section_check(field_lit: &str, set: &str, b: &str, cap: u64) -> CliResult<Json> {
    let d = field(field_lit)?;
    let a = elements(&d, set, cap)?;
    let b = d.parse_value(b).ctx("fields")?;
    let s = inversion_section_check(&d, &a, &b).ctx("pgl2")?;
    let t = if a.len() >= 3 {
        let t = translate_identity_check(&d, &a, &b).ctx("pgl2")?;
        Some(json!({"plus_equal": t.plus_equal, "minus_contains": t.minus_contains}))
    } else {
        None
    };
    Ok(json!({"lhs": s.lhs, "rhs": s.rhs, "equal": s.equal, "translate": t}))
}
