//! Acceptance criteria 1-12. Prints one line per criterion and exits nonzero
//! if any fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use folner_cli::config::ExperimentConfig;
use folner_cli::output::Outcome;
use folner_cli::scenarios::{find, EMBED_TOL};
use folner_core::characters::AdditiveCharacter;
use folner_core::charsums::{folner_kloosterman_series, kloosterman_classical};
use folner_core::cyclotomic::Cyclotomic;
use folner_core::finite::{FiniteField, FqElem, DEFAULT_CAP};
use folner_core::folner::FolnerRecipe;
use folner_core::identities::build_power_identity;
use folner_core::scalar::rat;

/// Tolerance on complex embeddings of exact values.
const EMBEDDING_TOL: f64 = 1e-9;
/// Weil: `|K| <= 2 sqrt q`.
const WEIL_CONSTANT: f64 = 2.0;
/// Tower decay: normalized `|sum| <= 2 q_k^(-1/2)`.
const TOWER_CONSTANT: f64 = 2.0;
/// Dilated box defect halves within this relative tolerance when `E` doubles.
const HALVING_TOL: f64 = 0.2;
/// Inverted additive boxes keep at least this additive defect.
const INVERTED_DEFECT_FLOOR: &str = "1/2";
/// Tail floors must stay above this fraction of the recorded baseline.
const TAIL_FACTOR: &str = "0.5";
/// Tail floors recorded on the first run for `dilbox:P=2:E=2:R=4,8,16`, `k <= 6`.
const TAIL_BASELINE: &str = "0.6198965850637932, 0.790007537160687, 0.8899139276020166";

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

/// Runs a scenario in process with explicit parameters; every check must pass.
fn scenario(name: &str, params: &[(&str, &str)], seed: u64) -> Result<Outcome, String> {
    let mut text = format!("[run]\nscenario = {name}\nseed = {seed}\n[params]\n");
    for (k, v) in params {
        text.push_str(&format!("{k} = {v}\n"));
    }
    let cfg = ExperimentConfig::parse(&text).map_err(|e| e.to_string())?;
    let sc = find(name).map_err(|e| e.to_string())?;
    let resolved = sc
        .resolve(&cfg, seed, DEFAULT_CAP)
        .map_err(|e| e.to_string())?;
    sc.execute(&resolved).map_err(|e| e.to_string())
}

fn checks_pass(out: &Outcome) -> Verdict {
    let failed: Vec<String> = out
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    if failed.is_empty() {
        verdict(true, format!("{} checks", out.checks.len()))
    } else {
        verdict(false, failed.join("; "))
    }
}

fn from_scenario(name: &str, params: &[(&str, &str)], seed: u64) -> Verdict {
    match scenario(name, params, seed) {
        Ok(out) => checks_pass(&out),
        Err(e) => verdict(false, e),
    }
}

/// Rows of a CSV artifact keyed by header name.
fn csv_rows(out: &Outcome, name: &str) -> Vec<BTreeMap<String, String>> {
    let a = out
        .artifacts
        .iter()
        .find(|a| a.name == name)
        .expect("artifact present");
    let mut r = csv::Reader::from_reader(a.bytes.as_slice());
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            header
                .iter()
                .map(String::from)
                .zip(rec.iter().map(String::from))
                .collect()
        })
        .collect()
}

fn and(a: Verdict, b: Verdict) -> Verdict {
    verdict(a.passed && b.passed, format!("{}; {}", a.detail, b.detail))
}

fn c1() -> Verdict {
    from_scenario("mixing3-sweep", &[("q", "4,5,7,8,9,25,27,343")], 1)
}

fn c2() -> Verdict {
    let sweep = from_scenario("kloosterman-weil", &[("q", "3,5,7,9,11,13,25,27,49")], 1);
    let k = FiniteField::of_order(3).unwrap();
    let s = kloosterman_classical(&k, FqElem(1), FqElem(1), DEFAULT_CAP).unwrap();
    let direct: f64 = (1..3u64)
        .map(|a| {
            let inv = (1..3u64).find(|b| a * b % 3 == 1).unwrap();
            let t = (a + inv) % 3;
            (2.0 * std::f64::consts::PI * t as f64 / 3.0).cos()
        })
        .sum();
    let spot = s.exact == Cyclotomic::from_rational(rat(-1, 1))
        && (s.value.re + 1.0).abs() <= EMBEDDING_TOL
        && (direct + 1.0).abs() <= EMBEDDING_TOL;
    let bound_pinned = EMBED_TOL == EMBEDDING_TOL && WEIL_CONSTANT == 2.0;
    and(
        sweep,
        verdict(
            spot && bound_pinned,
            format!("K_3(1,1) = {} = {:.1}", s.exact.format(), s.value.re),
        ),
    )
}

fn c3() -> Verdict {
    let sweep = from_scenario(
        "kloosterman-tower",
        &[
            ("recipe", "tower:p=2:sched=1,2,4,8,16"),
            ("xi1", "trace:beta=g^5"),
            ("xi2", "trace:beta=1"),
            ("k_max", "5"),
        ],
        1,
    );
    let recipe = FolnerRecipe::parse(None, "tower:p=2:sched=1,2,4,8,16").unwrap();
    let d = recipe.descriptor().unwrap();
    let xi1 = AdditiveCharacter::parse(&d, "trace:beta=g^5").unwrap();
    let xi2 = AdditiveCharacter::parse(&d, "trace:beta=1").unwrap();
    let s = folner_kloosterman_series(&recipe, &xi1, &xi2, 5, DEFAULT_CAP).unwrap();
    let norm: Vec<f64> = s
        .terms
        .iter()
        .map(|t| t.level_normalized_abs().unwrap())
        .collect();
    let q: Vec<u64> = s.terms.iter().map(|t| t.level_order.unwrap()).collect();
    let bounded = norm
        .iter()
        .zip(&q)
        .all(|(n, &q)| *n <= TOWER_CONSTANT / (q as f64).sqrt() + EMBEDDING_TOL);
    let decreasing = norm.windows(2).all(|w| w[1] < w[0]);
    let reached = q.last() == Some(&(1 << 16));
    and(
        sweep,
        verdict(
            bounded && decreasing && reached && s.all_exact(),
            format!(
                "normalized {:?} at q_k = {q:?}",
                norm.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()
            ),
        ),
    )
}

fn c4() -> Verdict {
    let sweep = from_scenario(
        "power-identity",
        &[("p", "0,2,3,5,7"), ("n_max", "12"), ("indep_n_max", "8")],
        1,
    );
    let id = build_power_identity(2, 0).unwrap();
    and(
        sweep,
        verdict(id.holds() && id.len() == 4, "n = 2 over Q has 4 terms"),
    )
}

fn c5() -> Verdict {
    from_scenario(
        "poscorr",
        &[("q", "5,7,9"), ("n", "2,3,4"), ("trials", "100")],
        1,
    )
}

fn c6() -> Verdict {
    from_scenario(
        "hyperbola",
        &[
            ("triple_q", "3,5,7,9,11,13,25,27"),
            ("family_q", "4,16"),
            ("diffset_q", "3,5,7"),
            ("size", "4"),
            ("explore_q", ""),
        ],
        1,
    )
}

fn c7() -> Verdict {
    from_scenario(
        "reconstruct-q",
        &[
            ("example", "q-parity-w"),
            ("height", "200"),
            ("samples", "500"),
        ],
        1,
    )
}

fn c8() -> Verdict {
    from_scenario(
        "reduced-model",
        &[("p", "3"), ("weights", "3,-6,2"), ("samples", "200")],
        1,
    )
}

fn c9() -> Verdict {
    from_scenario(
        "pgl2-ratios",
        &[
            ("q", "5,7,9,11"),
            ("instances", "100"),
            ("height", "20"),
            ("tower", "2:1,2,4"),
            ("boxes", "4,8,16"),
            ("box_d", "2"),
            ("b", "1"),
            ("minus_max", "0.9"),
        ],
        1,
    )
}

fn c10() -> Verdict {
    let out = match scenario(
        "folner-diagnostics",
        &[
            ("tower", "tower:p=2:sched=1,2,4,8"),
            ("sub_degree", "2"),
            ("dil_p", "2"),
            ("dil_e", "2"),
            ("dil_r", "4"),
            ("a", "2"),
            ("inv_r", "4,16,64"),
        ],
        1,
    ) {
        Ok(o) => o,
        Err(e) => return verdict(false, e),
    };
    let rows = csv_rows(&out, "defects.csv");
    let defect = |r: &BTreeMap<String, String>| r["defect_f64"].parse::<f64>().unwrap();
    let tower_zero = rows
        .iter()
        .filter(|r| r["set"].starts_with("tower"))
        .all(|r| r["defect"] == "0");
    let dil: Vec<f64> = rows
        .iter()
        .filter(|r| r["set"].starts_with("dilbox"))
        .map(defect)
        .collect();
    let ratio = if dil.len() == 2 {
        dil[1] / dil[0]
    } else {
        f64::NAN
    };
    let halving = dil.len() == 2 && (ratio - 0.5).abs() <= HALVING_TOL * 0.5;
    let floor = folner_core::scalar::parse_rational(INVERTED_DEFECT_FLOOR).unwrap();
    let floor = folner_core::cyclotomic::rational_to_f64(&floor);
    let inverted: Vec<f64> = rows
        .iter()
        .filter(|r| r["set"].starts_with("inverse"))
        .map(defect)
        .collect();
    let stays = inverted.len() == 3 && inverted.iter().all(|&d| d >= floor);
    and(
        checks_pass(&out),
        verdict(
            tower_zero && halving && stays,
            format!("dilation ratio {ratio:.3}, inverted defects {inverted:?}"),
        ),
    )
}

fn c11() -> Verdict {
    let out = match scenario(
        "inverse-series",
        &[
            (
                "recipes",
                "dilbox:P=2:E=2:R=4; dilbox:P=2:E=2:R=8; dilbox:P=2:E=2:R=16",
            ),
            ("xi", "arch:alpha=1"),
            ("k_max", "6"),
            ("baseline", TAIL_BASELINE),
            ("factor", TAIL_FACTOR),
        ],
        1,
    ) {
        Ok(o) => o,
        Err(e) => return verdict(false, e),
    };
    let factor: f64 = TAIL_FACTOR.parse().unwrap();
    let baseline: Vec<f64> = TAIL_BASELINE
        .split(',')
        .map(|b| b.trim().parse().unwrap())
        .collect();
    let floors: Vec<f64> = csv_rows(&out, "tails.csv")
        .iter()
        .map(|r| r["tail_floor"].parse().unwrap())
        .collect();
    let above = floors.len() == baseline.len()
        && floors
            .iter()
            .zip(&baseline)
            .all(|(f, b)| *f > 0.0 && *f >= factor * b);
    and(
        checks_pass(&out),
        verdict(above, format!("tail floors {floors:?}")),
    )
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            for (k, v) in read_tree(&path) {
                out.insert(
                    format!("{}/{k}", path.file_name().unwrap().to_string_lossy()),
                    v,
                );
            }
        } else {
            out.insert(
                path.file_name().unwrap().to_string_lossy().into(),
                std::fs::read(&path).unwrap(),
            );
        }
    }
    out
}

fn c12() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_folner-lab");
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let _ = std::fs::remove_dir_all(&root);
    let list = Command::new(bin).arg("list").output().unwrap();
    let names: Vec<String> = String::from_utf8_lossy(&list.stdout)
        .lines()
        .filter_map(|l| l.split_whitespace().next().map(String::from))
        .collect();
    let runs = [("serial", "1"), ("parallel", "8"), ("repeat", "8")];
    for (tag, jobs) in runs {
        for name in &names {
            let status = Command::new(bin)
                .args([
                    "--jobs",
                    jobs,
                    "--seed",
                    "7",
                    "run",
                    "--scenario",
                    name,
                    "--out",
                ])
                .arg(root.join(tag).join(name))
                .output()
                .unwrap()
                .status;
            if !status.success() {
                return verdict(false, format!("{name} with --jobs {jobs} exited {status}"));
            }
        }
    }
    let trees: Vec<_> = runs
        .iter()
        .map(|(tag, _)| read_tree(&root.join(tag)))
        .collect();
    let identical = trees[0] == trees[1] && trees[1] == trees[2];
    verdict(
        identical && !trees[0].is_empty(),
        format!(
            "{} scenarios, {} files compared byte for byte",
            names.len(),
            trees[0].len()
        ),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Verdict);

fn main() {
    let s = Duration::from_secs;
    let criteria: [Criterion; 12] = [
        (1, "triple-mixing identity", s(10), c1),
        (2, "Kloosterman sums and the Weil bound", s(60), c2),
        (3, "tower Folner-Kloosterman decay", s(300), c3),
        (4, "power identities and independence", s(30), c4),
        (5, "positive correlation", s(60), c5),
        (6, "hyperbola lemmas", s(300), c6),
        (7, "reconstruction over Q", s(10), c7),
        (8, "reduced model over F_3(t)", s(10), c8),
        (9, "PGL2 sets and ratios", s(60), c9),
        (10, "Folner diagnostics", s(120), c10),
        (11, "non-vanishing inverse series", s(300), c11),
        (12, "determinism", s(300), c12),
    ];
    let mut failures = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let ok = v.passed && elapsed <= limit;
        failures += usize::from(!ok);
        println!(
            "criterion {n:>2} {} {name}: {} [{:.2}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 12 acceptance criteria passed");
}
