//! Built-in scenarios. Each has default parameters, a mode and a runner that
//! returns artifacts plus named checks.

use std::collections::{BTreeMap, BTreeSet};

use folner_core::characters::{AdditiveCharacter, MultiplicativeCharacter};
use folner_core::charsums::{
    decay_report, folner_kloosterman_series, inverse_character_series, kloosterman_classical,
    twisted_power_series, TwistSpec,
};
use folner_core::cyclotomic::{rational_to_f64, Cyclotomic, UnitValue};
use folner_core::finite::{FiniteField, FqElem, TowerMap};
use folner_core::folner::{
    folner_defect, inverse_pushforward, DefectMode, FolnerRecipe, ZeroPolicy,
};
use folner_core::identities::{
    build_power_identity, check_linear_independence, poscorr_check, triple_mixing_check,
    SpectrumFunction,
};
use folner_core::patterns::{
    char2_spacetime_counterexample, char2_triple_family, hyperbola_diffset_search,
    hyperbola_triple_search, spacetime_direct, spacetime_search, Point,
};
use folner_core::pgl2::{
    inversion_section_check, pgl2_folner_ratio, proof_set, q_set, translate_identity_check,
    Generator,
};
use folner_core::reconstruct::{
    build_kappa, derive_w, named_example, patchwise_exceptions, reduced_model, sample_pairs,
    sample_rationals, verify_uv_relations, Group, ReducedModelSpec,
};
use folner_core::scalar::{format_rational, rat};
use folner_core::{Field, FieldDescriptor, Rational, Value, Q};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ExperimentConfig, ResolvedConfig};
use crate::output::{float, series_csv, Artifact, Check, Mode, Outcome};
use crate::{CliError, CliResult, Context};

/// Tolerance for comparisons made on complex embeddings of exact values.
pub const EMBED_TOL: f64 = 1e-9;

pub struct Param {
    pub key: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub mode: Mode,
    pub params: &'static [Param],
    run: fn(&Ctx) -> CliResult<Outcome>,
}

const fn p(key: &'static str, default: &'static str, doc: &'static str) -> Param {
    Param { key, default, doc }
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "mixing3-sweep",
        description: "triple-mixing identity equals 1 exactly for every a outside {0, 1}",
        mode: Mode::Assert,
        params: &[p("q", "4,5,7,8,9,25,27,343", "field orders")],
        run: mixing3_sweep,
    },
    Scenario {
        name: "kloosterman-weil",
        description: "classical Kloosterman sums against 2 sqrt q and direct enumeration",
        mode: Mode::Assert,
        params: &[p("q", "3,5,7,9,11,13,25,27,49", "field orders")],
        run: kloosterman_weil,
    },
    Scenario {
        name: "kloosterman-tower",
        description: "Folner-Kloosterman sums along a subfield tower decay like q_k^(-1/2)",
        mode: Mode::Assert,
        params: &[
            p(
                "recipe",
                "tower:p=2:sched=1,2,4,8,16",
                "tower recipe literal",
            ),
            p("xi1", "trace:beta=g^5", "first additive character"),
            p("xi2", "trace:beta=1", "second additive character"),
            p("k_max", "5", "last index"),
        ],
        run: kloosterman_tower,
    },
    Scenario {
        name: "fk-sums",
        description: "Folner-Kloosterman series for any recipe and pair of characters",
        mode: Mode::Report,
        params: &[
            p("field", "", "field literal; empty takes it from the recipe"),
            p("recipe", "dilbox:P=2:E=2:R=4", "recipe literal"),
            p("xi1", "arch:alpha=1", "first additive character"),
            p("xi2", "arch:alpha=1/2", "second additive character"),
            p("k_max", "5", "last index"),
        ],
        run: fk_sums,
    },
    Scenario {
        name: "twisted-sums",
        description: "multiplicatively twisted power sums over a recipe",
        mode: Mode::Report,
        params: &[
            p("field", "", "field literal; empty takes it from the recipe"),
            p("recipe", "tower:p=3:sched=1,2,4,8", "recipe literal"),
            p("eta", "dlog:k=1", "multiplicative character"),
            p(
                "factors",
                "trace:beta=g@1; trace:beta=1@-1",
                "`character@exponent` list separated by `;`",
            ),
            p("k_max", "4", "last index"),
        ],
        run: twisted_sums,
    },
    Scenario {
        name: "inverse-series",
        description: "sums of xi(1/a) over dilated boxes stay away from zero",
        mode: Mode::Assert,
        params: &[
            p(
                "recipes",
                "dilbox:P=2:E=2:R=4; dilbox:P=2:E=2:R=8; dilbox:P=2:E=2:R=16",
                "dilated box recipes separated by `;`",
            ),
            p("xi", "arch:alpha=1", "additive character over Q"),
            p("k_max", "6", "last index"),
            p(
                "baseline",
                INVERSE_BASELINE,
                "recorded tail floors, one per recipe; empty only checks positivity",
            ),
            p("factor", "0.5", "required fraction of the baseline"),
        ],
        run: inverse_series,
    },
    Scenario {
        name: "power-identity",
        description: "power identities hold and exponents off n give independent polynomials",
        mode: Mode::Assert,
        params: &[
            p("p", "0,2,3,5,7", "characteristics"),
            p("n_max", "12", "largest exponent for the identity"),
            p("indep_n_max", "8", "largest exponent for independence"),
        ],
        run: power_identity,
    },
    Scenario {
        name: "poscorr",
        description: "positive correlation inequality on random non-negative spectra",
        mode: Mode::Assert,
        params: &[
            p("q", "5,7,9", "field orders"),
            p("n", "2,3,4", "numbers of functions"),
            p("trials", "100", "random spectra per (q, n)"),
        ],
        run: poscorr,
    },
    Scenario {
        name: "hyperbola",
        description: "reciprocal triples and difference sets inside hyperbolas",
        mode: Mode::Assert,
        params: &[
            p(
                "triple_q",
                "3,5,7,9,11,13,25,27",
                "orders where no triple exists",
            ),
            p(
                "family_q",
                "4,16",
                "characteristic 2 orders with the explicit family",
            ),
            p(
                "diffset_q",
                "3,5,7",
                "orders with no difference set of the given size",
            ),
            p("size", "4", "difference set size"),
            p(
                "explore_q",
                "4,8",
                "characteristic 2 orders searched without a verdict",
            ),
        ],
        run: hyperbola,
    },
    Scenario {
        name: "spacetime",
        description: "Minkowski difference patterns and the characteristic 2 counterexample",
        mode: Mode::Report,
        params: &[
            p("field", "F8", "characteristic 2 field"),
            p("e_o", "g,g^2", "base set of the counterexample"),
            p("z", "1", "target value"),
            p(
                "oracle_q",
                "3,5",
                "orders where both search routes are compared",
            ),
            p("oracle_size", "8", "random set size for the comparison"),
        ],
        run: spacetime,
    },
    Scenario {
        name: "reconstruct-q",
        description: "multiplicative-map reconstruction on the built-in example over Q",
        mode: Mode::Assert,
        params: &[
            p("example", "q-parity-w", "built-in example name"),
            p("height", "200", "sample height"),
            p("samples", "500", "number of samples; rerun at twice this"),
        ],
        run: reconstruct_q,
    },
    Scenario {
        name: "reduced-model",
        description: "additive, equivariant, bijective reduced model over F_p(t)",
        mode: Mode::Assert,
        params: &[
            p("p", "3", "characteristic"),
            p("weights", "3,-6,2", "weights m_j"),
            p("samples", "200", "random inputs"),
        ],
        run: reduced_model_scenario,
    },
    Scenario {
        name: "pgl2-ratios",
        description: "Q(A) sizes, translate and section identities, and Folner ratios in PGL2",
        mode: Mode::Assert,
        params: &[
            p("q", "5,7,9,11", "field orders for random instances"),
            p("instances", "100", "random instances per field"),
            p("height", "20", "height of rational instances"),
            p("tower", "2:1,2,4", "`p:degrees` of the finite tower"),
            p(
                "boxes",
                "4,8,16",
                "radii R of the boxes {j/d : 1 <= |j| <= R} over Q",
            ),
            p("box_d", "2", "denominator d of the boxes"),
            p("b", "1", "translation used for the box ratios"),
            p("minus_max", "0.9", "upper bound for the box ratios of u_-"),
        ],
        run: pgl2_ratios,
    },
    Scenario {
        name: "folner-diagnostics",
        description: "total-variation defects of towers, dilated boxes and inverted boxes",
        mode: Mode::Assert,
        params: &[
            p("tower", "tower:p=2:sched=1,2,4,8", "tower recipe literal"),
            p(
                "sub_degree",
                "2",
                "degree of the subfield holding the shift",
            ),
            p("dil_p", "2", "prime bound of the dilated box"),
            p("dil_e", "2", "exponent bound; also run at twice this"),
            p("dil_r", "4", "range of the dilated box"),
            p("a", "2", "dilation"),
            p(
                "inv_r",
                "4,16,64",
                "additive box radii for the inversion check",
            ),
        ],
        run: folner_diagnostics,
    },
];

/// Tail floors of the default `inverse-series` recipes on their first run.
pub const INVERSE_BASELINE: &str = "0.6198965850637932, 0.790007537160687, 0.8899139276020166";

pub fn find(name: &str) -> CliResult<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| {
        let names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
        CliError::Parse(format!(
            "unknown scenario `{name}`; known: {}",
            names.join(", ")
        ))
    })
}

impl Scenario {
    /// Merges overrides into the defaults; unknown keys are parse errors.
    pub fn resolve(
        &self,
        cfg: &ExperimentConfig,
        seed: u64,
        cap: u64,
    ) -> CliResult<ResolvedConfig> {
        let mut params: BTreeMap<String, String> = self
            .params
            .iter()
            .map(|p| (p.key.to_string(), p.default.to_string()))
            .collect();
        for (k, v) in &cfg.params {
            match params.get_mut(k) {
                Some(slot) => *slot = v.clone(),
                None => {
                    return Err(CliError::Parse(format!(
                        "scenario `{}` has no parameter `{k}`",
                        self.name
                    )))
                }
            }
        }
        Ok(ResolvedConfig {
            scenario: self.name.to_string(),
            seed,
            cap,
            params,
        })
    }

    pub fn execute(&self, cfg: &ResolvedConfig) -> CliResult<Outcome> {
        (self.run)(&Ctx { cfg })
    }
}

pub struct Ctx<'a> {
    cfg: &'a ResolvedConfig,
}

fn bad(key: &str, v: &str) -> CliError {
    CliError::Parse(format!("bad value `{v}` for `{key}`"))
}

impl Ctx<'_> {
    pub fn seed(&self) -> u64 {
        self.cfg.seed
    }

    pub fn cap(&self) -> u64 {
        self.cfg.cap
    }

    pub fn str(&self, key: &str) -> &str {
        self.cfg.params.get(key).map(|s| s.trim()).unwrap_or("")
    }

    pub fn list(&self, key: &str, sep: char) -> Vec<&str> {
        self.str(key)
            .split(sep)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect()
    }

    pub fn nums<T: std::str::FromStr>(&self, key: &str) -> CliResult<Vec<T>> {
        self.list(key, ',')
            .into_iter()
            .map(|v| v.parse().map_err(|_| bad(key, v)))
            .collect()
    }

    pub fn num<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        let v = self.str(key);
        v.parse().map_err(|_| bad(key, v))
    }

    /// A generator tied to the run seed and a per-use tag.
    pub fn rng(&self, tag: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed().wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ tag)
    }

    fn recipe(&self, key: &str) -> CliResult<FolnerRecipe> {
        let field = match self.str("field") {
            "" => None,
            f => Some(FieldDescriptor::parse(f).ctx("fields")?),
        };
        FolnerRecipe::parse(field.as_ref(), self.str(key)).ctx("folner")
    }
}

fn finite(q: u64) -> CliResult<FiniteField> {
    FiniteField::of_order(q).ctx("fields")
}

fn nonzero(k: &FiniteField) -> Vec<FqElem> {
    (1..k.order()).map(FqElem).collect()
}

fn fmt_point(k: &FiniteField, (x, y): &Point) -> String {
    format!("({},{})", k.format(x), k.format(y))
}

fn is_exactly_one(v: &UnitValue) -> bool {
    v.exact_eq(&UnitValue::one()) == Some(true)
}

fn mixing3_sweep(ctx: &Ctx) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for q in ctx.nums::<u64>("q")? {
        let k = finite(q)?;
        let d = FieldDescriptor::Finite(k.clone());
        let elems: Vec<FqElem> = (0..q)
            .map(FqElem)
            .filter(|a| !k.is_zero(a) && !k.is_one(a))
            .collect();
        let values = elems
            .par_iter()
            .map(|a| triple_mixing_check(&d.element(Value::Finite(*a)), ctx.cap()))
            .collect::<folner_core::Result<Vec<_>>>()
            .ctx("identities")?;
        let ones = values.iter().filter(|v| is_exactly_one(v)).count();
        for (a, v) in elems.iter().zip(&values) {
            rows.push(vec![q.to_string(), k.format(a), v.format()]);
        }
        out.checks.push(Check::new(
            format!("q={q}: exactly 1"),
            ones == values.len(),
            format!("{ones}/{} values", values.len()),
        ));
    }
    out.artifacts
        .push(Artifact::csv("mixing3.csv", &["q", "a", "value"], rows));
    Ok(out)
}

/// `sum_{a != 0} exp(2 pi i Tr(b1 a + b2 / a) / p)` in floating point.
fn kloosterman_direct(k: &FiniteField, b1: FqElem, b2: FqElem) -> CliResult<Complex64> {
    let p = k.p() as f64;
    let mut z = Complex64::zero();
    for a in nonzero(k) {
        let ai = k.inv(&a).ctx("fields")?;
        let t = k.trace(k.mul(&b1, &a)) + k.trace(k.mul(&b2, &ai));
        z += Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / p);
    }
    Ok(z)
}

fn kloosterman_weil(ctx: &Ctx) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for q in ctx.nums::<u64>("q")? {
        let k = finite(q)?;
        let nz = nonzero(&k);
        let pairs: Vec<(FqElem, FqElem)> = nz
            .iter()
            .flat_map(|&a| nz.iter().map(move |&b| (a, b)))
            .collect();
        let sums = pairs
            .par_iter()
            .map(|&(b1, b2)| {
                let s = kloosterman_classical(&k, b1, b2, ctx.cap()).ctx("charsums")?;
                Ok((s, kloosterman_direct(&k, b1, b2)?))
            })
            .collect::<CliResult<Vec<_>>>()?;
        let bound = 2.0 * (q as f64).sqrt();
        let mut worst = 0f64;
        let mut drift = 0f64;
        for ((b1, b2), (s, direct)) in pairs.iter().zip(&sums) {
            worst = worst.max(s.value.norm());
            drift = drift.max((s.value - direct).norm());
            rows.push(vec![
                q.to_string(),
                k.format(b1),
                k.format(b2),
                float(s.value.re),
                float(s.value.im),
                float(s.value.norm()),
                float(s.weil_ratio.unwrap_or(f64::NAN)),
                s.exact.format(),
            ]);
        }
        out.checks.push(Check::new(
            format!("q={q}: |K| <= 2 sqrt q"),
            worst <= bound + EMBED_TOL,
            format!("max |K| = {}, bound {}", float(worst), float(bound)),
        ));
        out.checks.push(Check::new(
            format!("q={q}: embedding matches direct enumeration"),
            drift <= EMBED_TOL,
            format!("max deviation {drift:.3e}"),
        ));
    }
    let k3 = finite(3)?;
    let spot = kloosterman_classical(&k3, FqElem(1), FqElem(1), ctx.cap()).ctx("charsums")?;
    let direct = kloosterman_direct(&k3, FqElem(1), FqElem(1))?;
    out.checks.push(Check::new(
        "K_3(1,1) = -1",
        spot.exact == Cyclotomic::from_rational(rat(-1, 1)) && (direct + 1.0).norm() <= EMBED_TOL,
        format!("exact {}, direct {}", spot.exact.format(), float(direct.re)),
    ));
    out.artifacts.push(Artifact::csv(
        "kloosterman.csv",
        &["q", "b1", "b2", "re", "im", "abs", "weil_ratio", "value"],
        rows,
    ));
    Ok(out)
}

fn characters(recipe: &FolnerRecipe, lits: &[&str]) -> CliResult<Vec<AdditiveCharacter>> {
    let d = recipe.descriptor().ctx("folner")?;
    lits.iter()
        .map(|l| AdditiveCharacter::parse(&d, l).ctx("characters"))
        .collect()
}

fn kloosterman_tower(ctx: &Ctx) -> CliResult<Outcome> {
    let recipe = ctx.recipe("recipe")?;
    if recipe.level_count().is_none() {
        return Err(CliError::Parse(format!("`{recipe}` is not a tower recipe")));
    }
    let xi = characters(&recipe, &[ctx.str("xi1"), ctx.str("xi2")])?;
    let k_max: usize = ctx.num("k_max")?;
    let s = folner_kloosterman_series(&recipe, &xi[0], &xi[1], k_max, ctx.cap()).ctx("charsums")?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let mut normalized = Vec::new();
    let mut within = true;
    for t in &s.terms {
        let q = t.level_order.expect("tower levels are finite");
        let n = t.level_normalized_abs().expect("tower levels are finite");
        let scaled = n * (q as f64).sqrt();
        within &= scaled <= 2.0 + EMBED_TOL;
        normalized.push(n);
        rows.push(vec![
            t.k.to_string(),
            q.to_string(),
            float(n),
            float(scaled),
            float(2.0 / (q as f64).sqrt()),
        ]);
    }
    out.checks.push(Check::new(
        "normalized |sum| <= 2 q_k^(-1/2)",
        within,
        format!("{} levels", s.terms.len()),
    ));
    out.checks.push(Check::new(
        "normalized |sum| strictly decreasing",
        normalized.windows(2).all(|w| w[1] < w[0]),
        normalized
            .iter()
            .map(|x| float(*x))
            .collect::<Vec<_>>()
            .join(" > "),
    ));
    out.checks
        .push(Check::new("all terms exact", s.all_exact(), s.spec.clone()));
    out.indices = Some((1, s.terms.len()));
    out.artifacts.push(series_csv("series.csv", &s));
    out.artifacts.push(Artifact::csv(
        "levels.csv",
        &["k", "q_k", "normalized_abs", "scaled", "bound"],
        rows,
    ));
    Ok(out)
}

fn decay_json(s: &folner_core::charsums::SumSeries) -> CliResult<serde_json::Value> {
    let d = decay_report(s).ctx("charsums")?;
    Ok(json!({
        "recipe": s.provenance,
        "spec": s.spec,
        "max_tail": d.max_tail,
        "last": d.last,
        "monotone_fraction": d.monotone_fraction,
    }))
}

fn fk_sums(ctx: &Ctx) -> CliResult<Outcome> {
    let recipe = ctx.recipe("recipe")?;
    let xi = characters(&recipe, &[ctx.str("xi1"), ctx.str("xi2")])?;
    let s = folner_kloosterman_series(&recipe, &xi[0], &xi[1], ctx.num("k_max")?, ctx.cap())
        .ctx("charsums")?;
    let decay = decay_json(&s)?;
    let mut out = Outcome::default();
    out.checks.push(Check::new(
        "decay",
        true,
        format!(
            "max tail {}, monotone fraction {}",
            decay["max_tail"], decay["monotone_fraction"]
        ),
    ));
    out.indices = Some((1, s.terms.len()));
    out.artifacts.push(series_csv("series.csv", &s));
    out.artifacts.push(Artifact::json("decay.json", &decay));
    Ok(out)
}

fn twisted_sums(ctx: &Ctx) -> CliResult<Outcome> {
    let recipe = ctx.recipe("recipe")?;
    let d = recipe.descriptor().ctx("folner")?;
    let eta = MultiplicativeCharacter::parse(&d, ctx.str("eta")).ctx("characters")?;
    let mut factors = Vec::new();
    for item in ctx.list("factors", ';') {
        let (lit, n) = item.rsplit_once('@').ok_or_else(|| bad("factors", item))?;
        let n: i64 = n.trim().parse().map_err(|_| bad("factors", item))?;
        factors.push((
            AdditiveCharacter::parse(&d, lit.trim()).ctx("characters")?,
            n,
        ));
    }
    let spec = TwistSpec::new(eta, factors).ctx("charsums")?;
    let s = twisted_power_series(&recipe, &spec, ctx.num("k_max")?, ctx.cap()).ctx("charsums")?;
    let decay = decay_json(&s)?;
    let mut out = Outcome::default();
    out.checks
        .push(Check::new("all terms exact", s.all_exact(), s.spec.clone()));
    out.indices = Some((1, s.terms.len()));
    out.artifacts.push(series_csv("series.csv", &s));
    out.artifacts.push(Artifact::json("decay.json", &decay));
    Ok(out)
}

fn inverse_series(ctx: &Ctx) -> CliResult<Outcome> {
    let recipes = ctx.list("recipes", ';');
    let baseline: Vec<f64> = ctx.nums("baseline")?;
    if !baseline.is_empty() && baseline.len() != recipes.len() {
        return Err(CliError::Parse(format!(
            "{} baselines for {} recipes",
            baseline.len(),
            recipes.len()
        )));
    }
    let factor: f64 = ctx.num("factor")?;
    let k_max: usize = ctx.num("k_max")?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for (i, lit) in recipes.iter().enumerate() {
        let recipe = FolnerRecipe::parse(None, lit).ctx("folner")?;
        let xi = characters(&recipe, &[ctx.str("xi")])?.remove(0);
        let (s, floor) =
            inverse_character_series(&recipe, &xi, k_max, ctx.cap()).ctx("charsums")?;
        let threshold = baseline.get(i).map(|b| b * factor).unwrap_or(0.0);
        let passed = floor > 0.0 && floor >= threshold;
        out.checks.push(Check::new(
            format!("{lit}: tail floor >= {}", float(threshold)),
            passed,
            format!("tail floor {}", float(floor)),
        ));
        rows.push(vec![lit.to_string(), float(floor), float(threshold)]);
        out.artifacts
            .push(series_csv(&format!("series_{}.csv", i + 1), &s));
    }
    out.indices = Some((1, k_max));
    out.artifacts.push(Artifact::csv(
        "tails.csv",
        &["recipe", "tail_floor", "threshold"],
        rows,
    ));
    Ok(out)
}

fn divides(p: u64, m: i64) -> bool {
    p != 0 && m.rem_euclid(p as i64) == 0
}

fn power_identity(ctx: &Ctx) -> CliResult<Outcome> {
    let ps: Vec<u64> = ctx.nums("p")?;
    let n_max: u64 = ctx.num("n_max")?;
    let indep_max: u64 = ctx.num("indep_n_max")?;
    let cases: Vec<(u64, u64)> = ps
        .iter()
        .flat_map(|&p| {
            (1..=n_max)
                .filter(move |&n| !divides(p, n as i64))
                .map(move |n| (p, n))
        })
        .collect();
    let built = cases
        .par_iter()
        .map(|&(p, n)| build_power_identity(n, p))
        .collect::<folner_core::Result<Vec<_>>>()
        .ctx("identities")?;
    let mut id_rows = Vec::new();
    let mut checks = Vec::new();
    let mut jobs = Vec::new();
    for ((p, n), id) in cases.iter().zip(&built) {
        id_rows.push(vec![
            p.to_string(),
            n.to_string(),
            id.len().to_string(),
            id.holds().to_string(),
            id.format_coeffs().join("; "),
            id.format_polys().join("; "),
        ]);
        if *n <= indep_max {
            let n = *n as i64;
            for m in [-3, -2, -1, n, n + 1, n + 2, n + 3] {
                if !divides(*p, m) {
                    jobs.push((id, m));
                }
            }
        }
    }
    checks.push(Check::new(
        "sum c_j p_j^n = 0 exactly",
        built.iter().all(|id| id.holds()),
        format!("{} identities", built.len()),
    ));
    let results = jobs
        .par_iter()
        .map(|(id, m)| check_linear_independence(id, *m))
        .collect::<folner_core::Result<Vec<_>>>()
        .ctx("identities")?;
    let mut ind_rows = Vec::new();
    let (mut off_ok, mut off_total, mut diag_ok, mut diag_total) = (0, 0, 0, 0);
    for ((id, m), r) in jobs.iter().zip(&results) {
        let diagonal = *m == id.n() as i64;
        if diagonal {
            diag_total += 1;
            diag_ok += usize::from(!r.independent);
        } else {
            off_total += 1;
            off_ok += usize::from(r.independent);
        }
        ind_rows.push(vec![
            id.characteristic().to_string(),
            id.n().to_string(),
            m.to_string(),
            r.independent.to_string(),
            r.rank.to_string(),
        ]);
    }
    checks.push(Check::new(
        "independent for m in {-3,-2,-1,n+1,n+2,n+3}",
        off_ok == off_total,
        format!("{off_ok}/{off_total}"),
    ));
    checks.push(Check::new(
        "dependent for m = n",
        diag_ok == diag_total,
        format!("{diag_ok}/{diag_total}"),
    ));
    Ok(Outcome {
        artifacts: vec![
            Artifact::csv(
                "identities.csv",
                &["p", "n", "terms", "holds", "coeffs", "polys"],
                id_rows,
            ),
            Artifact::csv(
                "independence.csv",
                &["p", "n", "m", "independent", "rank"],
                ind_rows,
            ),
        ],
        checks,
        indices: None,
    })
}

/// Nonzero multipliers summing to zero.
pub fn random_multipliers(k: &FiniteField, n: usize, rng: &mut ChaCha8Rng) -> Vec<FqElem> {
    loop {
        let mut s: Vec<FqElem> = (0..n - 1)
            .map(|_| FqElem(rng.gen_range(1..k.order())))
            .collect();
        let total = s.iter().fold(k.zero(), |acc, x| k.add(&acc, x));
        let last = k.neg(&total);
        if !k.is_zero(&last) {
            s.push(last);
            return s;
        }
    }
}

/// Non-negative rational spectrum values indexed by packed element.
pub fn random_spectrum(k: &FiniteField, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    (0..k.order())
        .map(|_| rat(rng.gen_range(0..=6), rng.gen_range(1..=4)))
        .collect()
}

fn poscorr(ctx: &Ctx) -> CliResult<Outcome> {
    let trials: usize = ctx.num("trials")?;
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    for q in ctx.nums::<u64>("q")? {
        let k = finite(q)?;
        for n in ctx.nums::<usize>("n")? {
            if n < 2 {
                return Err(bad("n", &n.to_string()));
            }
            let mut rng = ctx.rng(q << 16 | n as u64);
            let mut inputs = Vec::with_capacity(trials + 1);
            for _ in 0..trials {
                let s = random_multipliers(&k, n, &mut rng);
                let hats: Vec<Vec<Rational>> =
                    (0..n).map(|_| random_spectrum(&k, &mut rng)).collect();
                inputs.push((false, s, hats));
            }
            // Spectra supported at 0 only: both sides equal the product of the masses.
            let s = random_multipliers(&k, n, &mut rng);
            let diag: Vec<Vec<Rational>> = (0..n)
                .map(|j| {
                    let mut h = vec![Rational::zero(); q as usize];
                    h[0] = rat(j as i64 + 1, 2);
                    h
                })
                .collect();
            inputs.push((true, s, diag));
            let results = inputs
                .par_iter()
                .map(|(_, s, hats)| {
                    let phis = hats
                        .iter()
                        .map(|h| SpectrumFunction::new(&k, h.clone()))
                        .collect::<folner_core::Result<Vec<_>>>()?;
                    poscorr_check(&k, &phis, s)
                })
                .collect::<folner_core::Result<Vec<_>>>()
                .ctx("identities")?;
            let mut held = 0;
            let mut equality_found = false;
            for (i, ((control, s, _), r)) in inputs.iter().zip(&results).enumerate() {
                if *control {
                    equality_found = r.lhs == r.rhs;
                } else {
                    held += usize::from(r.holds);
                }
                rows.push(vec![
                    q.to_string(),
                    n.to_string(),
                    if *control {
                        "control".into()
                    } else {
                        i.to_string()
                    },
                    s.iter().map(|x| k.format(x)).collect::<Vec<_>>().join(" "),
                    format_rational(&r.lhs),
                    format_rational(&r.rhs),
                    r.holds.to_string(),
                    (r.lhs == r.rhs).to_string(),
                ]);
            }
            out.checks.push(Check::new(
                format!("q={q}, N={n}: lhs >= rhs"),
                held == trials,
                format!("{held}/{trials} trials"),
            ));
            out.checks.push(Check::new(
                format!("q={q}, N={n}: equality on spectra at 0"),
                equality_found,
                "control trial",
            ));
        }
    }
    out.artifacts.push(Artifact::csv(
        "poscorr.csv",
        &["q", "n", "trial", "s", "lhs", "rhs", "holds", "equal"],
        rows,
    ));
    Ok(out)
}

fn hyperbola(ctx: &Ctx) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let mut triples = Vec::new();
    for q in ctx.nums::<u64>("triple_q")? {
        let k = finite(q)?;
        let r = hyperbola_triple_search(&k, ctx.cap()).ctx("patterns")?;
        out.checks.push(Check::new(
            format!("q={q}: no reciprocal triple"),
            r.hits.is_empty(),
            format!("{} hits", r.hits.len()),
        ));
        triples.push(json!({"q": q, "hits": r.hits.len(), "exhaustive": r.exhaustive}));
    }
    let mut family = Vec::new();
    for q in ctx.nums::<u64>("family_q")? {
        let k = finite(q)?;
        let r = hyperbola_triple_search(&k, ctx.cap()).ctx("patterns")?;
        let hits: BTreeSet<[FqElem; 3]> = r.hits.iter().copied().collect();
        let expected = char2_triple_family(&k);
        out.checks.push(Check::new(
            format!("q={q}: triples are the explicit family"),
            !hits.is_empty() && hits == expected,
            format!("{} hits, family of {}", hits.len(), expected.len()),
        ));
        let shown: Vec<String> = r
            .hits
            .iter()
            .map(|h| {
                format!(
                    "({})",
                    h.iter().map(|x| k.format(x)).collect::<Vec<_>>().join(",")
                )
            })
            .collect();
        family.push(json!({"q": q, "hits": shown}));
    }
    let size: usize = ctx.num("size")?;
    let mut diffsets = Vec::new();
    for (q, assert) in ctx
        .nums::<u64>("diffset_q")?
        .into_iter()
        .map(|q| (q, true))
        .chain(
            ctx.nums::<u64>("explore_q")?
                .into_iter()
                .map(|q| (q, false)),
        )
    {
        let k = finite(q)?;
        let mut found = Vec::new();
        for t in nonzero(&k) {
            let r = hyperbola_diffset_search(&k, t, size, ctx.cap()).ctx("patterns")?;
            for h in &r.hits {
                found.push(json!({
                    "t": k.format(&t),
                    "set": h.iter().map(|pt| fmt_point(&k, pt)).collect::<Vec<_>>(),
                }));
            }
        }
        if assert {
            out.checks.push(Check::new(
                format!("q={q}: no {size}-point difference set in any H_t"),
                found.is_empty(),
                format!("{} sets", found.len()),
            ));
        }
        diffsets.push(json!({"q": q, "size": size, "exploratory": !assert, "sets": found}));
    }
    out.artifacts.push(Artifact::json(
        "hyperbola.json",
        &json!({"triples": triples, "char2_family": family, "diffsets": diffsets}),
    ));
    Ok(out)
}

fn spacetime(ctx: &Ctx) -> CliResult<Outcome> {
    let d = FieldDescriptor::parse(ctx.str("field")).ctx("fields")?;
    let k = d
        .finite()
        .cloned()
        .ok_or_else(|| CliError::Parse("spacetime needs a finite field".into()))?;
    let e_o = ctx
        .list("e_o", ',')
        .into_iter()
        .map(|s| k.parse_elem(s))
        .collect::<folner_core::Result<Vec<_>>>()
        .ctx("fields")?;
    let z = k.parse_elem(ctx.str("z")).ctx("fields")?;
    let e = char2_spacetime_counterexample(&k, &e_o).ctx("patterns")?;
    let r = spacetime_search(&k, z, &e);
    let mut out = Outcome::default();
    out.checks.push(Check::new(
        format!("{d}: no pair with difference form {}", k.format(&z)),
        r.hits.is_empty(),
        format!("|E| = {}, {} hits", e.len(), r.hits.len()),
    ));
    let size: usize = ctx.num("oracle_size")?;
    let mut oracle = Vec::new();
    for q in ctx.nums::<u64>("oracle_q")? {
        let kq = finite(q)?;
        let mut all: Vec<Point> = (0..q)
            .flat_map(|x| (0..q).map(move |y| (FqElem(x), FqElem(y))))
            .collect();
        all.shuffle(&mut ctx.rng(q));
        all.truncate(size);
        all.sort();
        let agree = (0..q).all(|zz| {
            spacetime_search(&kq, FqElem(zz), &all).hits
                == spacetime_direct(&kq, FqElem(zz), &all).hits
        });
        out.checks.push(Check::new(
            format!("q={q}: both routes agree"),
            agree,
            format!("|E| = {}", all.len()),
        ));
        oracle.push(json!({"q": q, "set": all.iter().map(|pt| fmt_point(&kq, pt)).collect::<Vec<_>>(), "agree": agree}));
    }
    out.artifacts.push(Artifact::json(
        "spacetime.json",
        &json!({
            "field": d.to_string(),
            "e_o": e_o.iter().map(|x| k.format(x)).collect::<Vec<_>>(),
            "z": k.format(&z),
            "set": e.iter().map(|pt| fmt_point(&k, pt)).collect::<Vec<_>>(),
            "hits": r.hits.len(),
            "exploratory": r.exploratory,
            "oracle": oracle,
        }),
    ));
    Ok(out)
}

fn reconstruct_q(ctx: &Ctx) -> CliResult<Outcome> {
    let data = named_example(ctx.str("example")).ctx("reconstruct")?;
    let height: u64 = ctx.num("height")?;
    let n: usize = ctx.num("samples")?;
    let f = &data.field;
    let mut out = Outcome::default();
    let mut runs = Vec::new();
    let mut uv_counts = Vec::new();
    for count in [n, 2 * n] {
        let samples = sample_rationals(height, count, ctx.seed());
        let pairs = sample_pairs(&samples, count, ctx.seed().wrapping_add(1));
        let relation = data.relation_exceptions(&samples);
        let dw = derive_w(&data, &samples).ctx("reconstruct")?;
        let patch = patchwise_exceptions(f, &dw.w, Group::Multiplicative, &samples, &pairs);
        let kappa = build_kappa(f, &data.rho, &dw.w, &samples, &pairs);
        let uv = verify_uv_relations(&data, &dw.w, &samples);
        let image: Vec<String> = dw.image.iter().map(|x| f.format(x)).collect();
        let pm: BTreeSet<Value> = [rat(-1, 1), rat(1, 1)]
            .into_iter()
            .map(Value::Rational)
            .collect();
        let tag = format!("{count} samples");
        out.checks.push(Check::new(
            format!("{tag}: w has image {{-1, 1}}"),
            dw.image == pm,
            image.join(" "),
        ));
        out.checks.push(Check::new(
            format!("{tag}: no patchwise exceptions"),
            relation.is_empty() && patch.total() == 0,
            format!("{} relation, {} patchwise", relation.len(), patch.total()),
        ));
        out.checks.push(Check::new(
            format!("{tag}: kappa is the identity and a field map"),
            kappa.is_identity_on_samples()
                && kappa.violations() == 0
                && kappa.collisions.is_empty(),
            format!(
                "{} moved, {} additive, {} multiplicative, {} collisions",
                kappa.moved.len(),
                kappa.additive_violations.len(),
                kappa.multiplicative_violations.len(),
                kappa.collisions.len()
            ),
        ));
        let counts = uv.counts();
        out.checks.push(Check::new(
            format!("{tag}: u, v relations hold"),
            counts == [0; 4],
            format!("{counts:?}"),
        ));
        uv_counts.push(counts);
        runs.push(json!({
            "samples": count,
            "pairs": pairs.len(),
            "w_image": image,
            "relation_exceptions": relation.len(),
            "inverse_exceptions": patch.inverse_exceptions.len(),
            "product_exceptions": patch.product_exceptions.len(),
            "kappa_moved": kappa.moved.len(),
            "additive_violations": kappa.additive_violations.len(),
            "multiplicative_violations": kappa.multiplicative_violations.len(),
            "collisions": kappa.collisions.len(),
            "uv_exceptions": {"inverse": counts[0], "even": counts[1], "wu": counts[2], "vv": counts[3]},
            "vv_shifted_diagnostic": uv.vv_shifted.iter().take(10).map(|x| f.format(x)).collect::<Vec<_>>(),
        }));
    }
    out.checks.push(Check::new(
        "u, v exception counts stable when the sample doubles",
        uv_counts[0] == uv_counts[1],
        format!("{:?} vs {:?}", uv_counts[0], uv_counts[1]),
    ));
    out.artifacts.push(Artifact::json(
        "reconstruct.json",
        &json!({"example": ctx.str("example"), "domain": data.domain, "height": height, "runs": runs}),
    ));
    Ok(out)
}

fn reduced_model_scenario(ctx: &Ctx) -> CliResult<Outcome> {
    let p: u64 = ctx.num("p")?;
    let weights: Vec<i64> = ctx.nums("weights")?;
    let spec = ReducedModelSpec::new(p, &weights).ctx("reconstruct")?;
    let (_, r) = reduced_model(&spec, ctx.num("samples")?, ctx.seed()).ctx("reconstruct")?;
    let wants_witness = spec.components().iter().any(|c| c.l > 0);
    let mut out = Outcome::default();
    out.checks.push(Check::new(
        "additive, equivariant and bijective on samples",
        r.passed(),
        format!(
            "{} samples: {} additivity, {} equivariance, {} inverse, {} section failures",
            r.samples,
            r.additivity_failures,
            r.equivariance_failures,
            r.inverse_failures,
            r.section_failures
        ),
    ));
    out.checks.push(Check::new(
        "non-linearity witness iff some l_j > 0",
        r.nonlinearity_witness.is_some() == wants_witness,
        format!(
            "witness {}",
            if r.nonlinearity_witness.is_some() {
                "found"
            } else {
                "absent"
            }
        ),
    ));
    let components: Vec<_> = spec
        .components()
        .iter()
        .map(|c| json!({"m": c.m, "l": c.l, "n": c.n}))
        .collect();
    let witness = r
        .nonlinearity_witness
        .as_ref()
        .map(|w| json!({"a": w[0], "x": w[1], "phi_ax": w[2], "a_phi_x": w[3]}));
    out.artifacts.push(Artifact::json(
        "reduced_model.json",
        &json!({
            "p": p,
            "components": components,
            "samples": r.samples,
            "additivity_failures": r.additivity_failures,
            "equivariance_failures": r.equivariance_failures,
            "inverse_failures": r.inverse_failures,
            "section_failures": r.section_failures,
            "nonlinearity_witness": witness,
        }),
    ));
    Ok(out)
}

/// Random subset of `pool` with between `lo` and `pool.len()` elements, sorted.
fn random_subset<T: Clone + Ord>(pool: &[T], lo: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let n = rng.gen_range(lo..=pool.len());
    let mut v: Vec<T> = pool.choose_multiple(rng, n).cloned().collect();
    v.sort();
    v
}

/// `S ∪ S^-1` for a random `S` of nonzero elements.
fn random_inverse_closed<F: Field>(
    field: &F,
    pool: &[F::Elem],
    rng: &mut ChaCha8Rng,
) -> Vec<F::Elem>
where
    F::Elem: Ord,
{
    let s = random_subset(pool, 1, rng);
    let mut all: BTreeSet<F::Elem> = s.iter().cloned().collect();
    all.extend(s.iter().map(|x| field.inv(x).expect("pool excludes zero")));
    all.into_iter().collect()
}

struct Pgl2Tally {
    instances: usize,
    size_ok: usize,
    translate_ok: usize,
    section_ok: usize,
}

fn pgl2_instances<F: Field>(
    field: &F,
    pool: &[F::Elem],
    instances: usize,
    rng: &mut ChaCha8Rng,
) -> CliResult<Pgl2Tally>
where
    F::Elem: Ord,
{
    let nz: Vec<F::Elem> = pool.iter().filter(|x| !field.is_zero(x)).cloned().collect();
    let cases: Vec<_> = (0..instances)
        .map(|_| {
            let a = random_subset(pool, 3, rng);
            let b = nz.choose(rng).expect("nonempty pool").clone();
            let c = random_inverse_closed(field, &nz, rng);
            (a, b, c)
        })
        .collect();
    let results = cases
        .par_iter()
        .map(|(a, b, c)| -> folner_core::Result<(bool, bool, bool)> {
            let n = a.len();
            let size = q_set(field, a)?.len() == n * (n - 1) * (n - 2);
            let translate = translate_identity_check(field, a, b)?.holds();
            let section = inversion_section_check(field, c, b)?.equal;
            Ok((size, translate, section))
        })
        .collect::<folner_core::Result<Vec<_>>>()
        .ctx("pgl2")?;
    Ok(Pgl2Tally {
        instances,
        size_ok: results.iter().filter(|r| r.0).count(),
        translate_ok: results.iter().filter(|r| r.1).count(),
        section_ok: results.iter().filter(|r| r.2).count(),
    })
}

fn tally_checks(out: &mut Outcome, label: &str, t: &Pgl2Tally) {
    let n = t.instances;
    out.checks.push(Check::new(
        format!("{label}: |Q(A)| = |A|(|A|-1)(|A|-2)"),
        t.size_ok == n,
        format!("{}/{n}", t.size_ok),
    ));
    out.checks.push(Check::new(
        format!("{label}: translate identities"),
        t.translate_ok == n,
        format!("{}/{n}", t.translate_ok),
    ));
    out.checks.push(Check::new(
        format!("{label}: inversion section identity"),
        t.section_ok == n,
        format!("{}/{n}", t.section_ok),
    ));
}

fn pgl2_ratios(ctx: &Ctx) -> CliResult<Outcome> {
    let instances: usize = ctx.num("instances")?;
    let mut out = Outcome::default();
    let mut random_rows = Vec::new();
    for q in ctx.nums::<u64>("q")? {
        let k = finite(q)?;
        let pool: Vec<FqElem> = (0..q).map(FqElem).collect();
        let t = pgl2_instances(&k, &pool, instances, &mut ctx.rng(q))?;
        tally_checks(&mut out, &format!("F_{q}"), &t);
        random_rows.push(json!({"field": format!("F{q}"), "instances": instances, "size_ok": t.size_ok, "translate_ok": t.translate_ok, "section_ok": t.section_ok}));
    }
    let height: i64 = ctx.num("height")?;
    let mut pool: BTreeSet<Rational> = BTreeSet::new();
    for n in -height..=height {
        for d in 1..=height {
            pool.insert(rat(n, d));
        }
    }
    let pool: Vec<Rational> = pool.into_iter().collect();
    let rational_instances = instances;
    let mut rng = ctx.rng(0);
    let small = |rng: &mut ChaCha8Rng| -> Vec<Rational> {
        let n = rng.gen_range(3..=7);
        let mut v: Vec<Rational> = pool.choose_multiple(rng, n).cloned().collect();
        v.sort();
        v
    };
    let nz: Vec<Rational> = pool.iter().filter(|x| !x.is_zero()).cloned().collect();
    let cases: Vec<(Vec<Rational>, Rational, Vec<Rational>)> = (0..rational_instances)
        .map(|_| {
            let a = small(&mut rng);
            let b = nz.choose(&mut rng).expect("nonempty").clone();
            let m = rng.gen_range(1..=4);
            let s: Vec<Rational> = nz.choose_multiple(&mut rng, m).cloned().collect();
            let mut c: BTreeSet<Rational> = s.iter().cloned().collect();
            c.extend(s.iter().map(|x| x.recip()));
            (a, b, c.into_iter().collect())
        })
        .collect();
    let res = cases
        .par_iter()
        .map(|(a, b, c)| -> folner_core::Result<(bool, bool, bool)> {
            let n = a.len();
            Ok((
                q_set(&Q::default(), a)?.len() == n * (n - 1) * (n - 2),
                translate_identity_check(&Q::default(), a, b)?.holds(),
                inversion_section_check(&Q::default(), c, b)?.equal,
            ))
        })
        .collect::<folner_core::Result<Vec<_>>>()
        .ctx("pgl2")?;
    let t = Pgl2Tally {
        instances: rational_instances,
        size_ok: res.iter().filter(|r| r.0).count(),
        translate_ok: res.iter().filter(|r| r.1).count(),
        section_ok: res.iter().filter(|r| r.2).count(),
    };
    tally_checks(&mut out, &format!("Q, height {height}"), &t);
    random_rows.push(json!({"field": "Q", "instances": rational_instances, "size_ok": t.size_ok, "translate_ok": t.translate_ok, "section_ok": t.section_ok}));

    let tower = ctx.str("tower");
    let (tp, degrees) = tower.split_once(':').ok_or_else(|| bad("tower", tower))?;
    let tp: u64 = tp.trim().parse().map_err(|_| bad("tower", tower))?;
    let degrees: Vec<u32> = degrees
        .split(',')
        .map(|d| d.trim().parse().map_err(|_| bad("tower", tower)))
        .collect::<CliResult<_>>()?;
    let top_deg = *degrees.last().ok_or_else(|| bad("tower", tower))?;
    let top = FiniteField::new(tp, top_deg).ctx("fields")?;
    let mut ratio_rows = Vec::new();
    let mut all_one = true;
    for &m in &degrees {
        let sub = FiniteField::new(tp, m).ctx("fields")?;
        let level = TowerMap::new(&sub, &top)
            .ctx("fields")?
            .image(ctx.cap())
            .ctx("fields")?;
        if level.len() < 3 {
            continue;
        }
        for b in level.iter().filter(|b| b.0 != 0) {
            let plus = pgl2_folner_ratio(&top, &level, b, Generator::Plus).ctx("pgl2")?;
            let minus = pgl2_folner_ratio(&top, &level, b, Generator::Minus).ctx("pgl2")?;
            all_one &= plus.ratio.is_one();
            ratio_rows.push(vec![
                format!("F{tp}^{m} in F{tp}^{top_deg}"),
                top.format(b),
                format_rational(&plus.ratio),
                format_rational(&minus.ratio),
                format_rational(&minus.proof_bound),
            ]);
        }
        if m == top_deg {
            let ps = proof_set(&top, &level);
            let plus = pgl2_folner_ratio(&top, &ps, &top.one(), Generator::Plus).ctx("pgl2")?;
            let minus = pgl2_folner_ratio(&top, &ps, &top.one(), Generator::Minus).ctx("pgl2")?;
            ratio_rows.push(vec![
                format!("F{tp}^{m} nonzero"),
                "1".into(),
                format_rational(&plus.ratio),
                format_rational(&minus.ratio),
                format_rational(&minus.proof_bound),
            ]);
        }
    }
    out.checks.push(Check::new(
        "tower: u_+(b) ratio is exactly 1 for b in the subfield",
        all_one,
        format!("{} subfield ratios", ratio_rows.len()),
    ));
    let b: Rational = folner_core::scalar::parse_rational(ctx.str("b")).ctx("fields")?;
    let minus_max: f64 = ctx.num("minus_max")?;
    let mut box_ratios = Vec::new();
    let box_d: i64 = ctx.num("box_d")?;
    for r in ctx.nums::<i64>("boxes")? {
        let a: Vec<Rational> = (-r..=r)
            .filter(|&j| j != 0)
            .map(|j| rat(j, box_d))
            .collect();
        let plus = pgl2_folner_ratio(&Q::default(), &a, &b, Generator::Plus).ctx("pgl2")?;
        let minus = pgl2_folner_ratio(&Q::default(), &a, &b, Generator::Minus).ctx("pgl2")?;
        let m = rational_to_f64(&minus.ratio);
        box_ratios.push(m);
        ratio_rows.push(vec![
            format!("Q box d={box_d} R={r}"),
            format_rational(&b),
            format_rational(&plus.ratio),
            format_rational(&minus.ratio),
            format_rational(&minus.proof_bound),
        ]);
    }
    out.checks.push(Check::new(
        format!("Q boxes: u_-(b) ratio <= {}", float(minus_max)),
        box_ratios.iter().all(|&m| m <= minus_max),
        box_ratios
            .iter()
            .map(|m| float(*m))
            .collect::<Vec<_>>()
            .join(", "),
    ));
    out.artifacts
        .push(Artifact::json("random_instances.json", &json!(random_rows)));
    out.artifacts.push(Artifact::csv(
        "ratios.csv",
        &["set", "b", "plus_ratio", "minus_ratio", "minus_proof_bound"],
        ratio_rows,
    ));
    Ok(out)
}

fn folner_diagnostics(ctx: &Ctx) -> CliResult<Outcome> {
    let mut out = Outcome::default();
    let mut rows = Vec::new();
    let modes = [
        ("additive", DefectMode::Additive),
        ("multiplicative", DefectMode::Multiplicative),
        ("inversion", DefectMode::Inversion),
    ];
    let tower = FolnerRecipe::parse(None, ctx.str("tower")).ctx("folner")?;
    let FolnerRecipe::SubfieldTower { p, schedule } = &tower else {
        return Err(CliError::Parse(format!("`{tower}` is not a tower recipe")));
    };
    let d = tower.descriptor().ctx("folner")?;
    let k = d.finite().expect("towers are finite").clone();
    let m: u32 = ctx.num("sub_degree")?;
    let shift = k.gen_pow(((k.order() - 1) / (p.pow(m) - 1)) as i64);
    let mut zero_from = None;
    let mut tower_ok = true;
    for (i, &deg) in schedule.iter().enumerate() {
        let idx = i + 1;
        if deg % m != 0 {
            continue;
        }
        zero_from.get_or_insert(idx);
        let set = tower.realize(idx, ctx.cap()).ctx("folner")?;
        for a in [k.one(), shift] {
            for (name, mode) in modes {
                let defect =
                    folner_defect(&set, &Value::Finite(a), mode, ZeroPolicy::Drop).ctx("folner")?;
                tower_ok &= defect.is_zero();
                rows.push(vec![
                    tower.to_string(),
                    idx.to_string(),
                    name.into(),
                    k.format(&a),
                    format_rational(&defect),
                    float(rational_to_f64(&defect)),
                ]);
            }
        }
    }
    out.checks.push(Check::new(
        format!("tower defects are 0 from index {}", zero_from.unwrap_or(0)),
        tower_ok && zero_from.is_some(),
        format!("shift in F{p}^{m}"),
    ));

    let e: u32 = ctx.num("dil_e")?;
    let a: i64 = ctx.num("a")?;
    let mut dil = Vec::new();
    for ee in [e, 2 * e] {
        let lit = format!(
            "dilbox:P={}:E={ee}:R={}",
            ctx.str("dil_p"),
            ctx.str("dil_r")
        );
        let set = FolnerRecipe::parse(None, &lit)
            .ctx("folner")?
            .realize(1, ctx.cap())
            .ctx("folner")?;
        let defect = folner_defect(
            &set,
            &Value::Rational(rat(a, 1)),
            DefectMode::Multiplicative,
            ZeroPolicy::Drop,
        )
        .ctx("folner")?;
        let bound = rat(2, 2 * ee as i64 + 1);
        out.checks.push(Check::new(
            format!("{lit}: defect <= 2/(2E+1)"),
            defect <= bound,
            format!(
                "{} vs {}",
                format_rational(&defect),
                format_rational(&bound)
            ),
        ));
        rows.push(vec![
            lit,
            "1".into(),
            "multiplicative".into(),
            a.to_string(),
            format_rational(&defect),
            float(rational_to_f64(&defect)),
        ]);
        dil.push(defect);
    }
    let ratio = if dil[0].is_zero() {
        f64::NAN
    } else {
        rational_to_f64(&(&dil[1] / &dil[0]))
    };
    out.checks.push(Check::new(
        "doubling E halves the defect (within 20%)",
        (0.4..=0.6).contains(&ratio),
        format!("ratio {}", float(ratio)),
    ));

    let half = rat(1, 2);
    for r in ctx.nums::<u64>("inv_r")? {
        let lit = format!("addbox:d=1:R={r}");
        let set = FolnerRecipe::parse(None, &lit)
            .ctx("folner")?
            .realize(1, ctx.cap())
            .ctx("folner")?;
        let inv = inverse_pushforward(&set, ZeroPolicy::Drop).ctx("folner")?;
        let defect = folner_defect(
            &inv,
            &Value::Rational(Rational::one()),
            DefectMode::Additive,
            ZeroPolicy::Drop,
        )
        .ctx("folner")?;
        out.checks.push(Check::new(
            format!("inverted {lit}: additive defect >= 1/2"),
            defect >= half,
            format_rational(&defect),
        ));
        rows.push(vec![
            format!("inverse of {lit}"),
            "1".into(),
            "additive".into(),
            "1".into(),
            format_rational(&defect),
            float(rational_to_f64(&defect)),
        ]);
    }
    out.artifacts.push(Artifact::csv(
        "defects.csv",
        &["set", "k", "mode", "shift", "defect", "defect_f64"],
        rows,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique() {
        let names: BTreeSet<&str> = SCENARIOS.iter().map(|s| s.name).collect();
        assert_eq!(names.len(), SCENARIOS.len());
        for s in SCENARIOS {
            let keys: BTreeSet<&str> = s.params.iter().map(|p| p.key).collect();
            assert_eq!(keys.len(), s.params.len(), "{}", s.name);
        }
    }

    #[test]
    fn unknown_parameter_is_a_parse_error() {
        let cfg =
            ExperimentConfig::parse("[run]\nscenario = hyperbola\n[params]\nbogus = 1\n").unwrap();
        let s = find(&cfg.scenario).unwrap();
        assert!(matches!(s.resolve(&cfg, 1, 10), Err(CliError::Parse(_))));
    }
}
