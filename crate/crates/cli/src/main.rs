use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use folner_cli::config::ExperimentConfig;
use folner_cli::output::{write_run, Mode};
use folner_cli::scenarios::{find, SCENARIOS};
use folner_cli::{commands, CliError, CliResult};
use folner_core::finite::DEFAULT_CAP;

/// Character-sum, Folner-set and pattern experiments over Q, F_q and F_p(t).
///
/// Exit codes: 0 success, 1 failed assertion, 2 malformed input, 3 runtime error.
#[derive(Parser)]
#[command(name = "folner-lab", version)]
struct Cli {
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest set a kernel may enumerate.
    #[arg(long, global = true)]
    cap: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario from a config file or by name.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        /// Artifact directory; defaults to `out/<scenario>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parameter override `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List scenarios in registry order.
    List {
        /// Also show parameters and defaults.
        #[arg(long)]
        verbose: bool,
    },
    #[command(subcommand)]
    Identity(IdentityCmd),
    #[command(subcommand)]
    Pattern(PatternCmd),
    #[command(subcommand)]
    Pgl2(Pgl2Cmd),
}

#[derive(Subcommand)]
enum IdentityCmd {
    /// Exact identity `sum c_j p_j^n = 0`.
    PowerBuild {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        p: u64,
    },
    /// Linear independence of `p_j^m`.
    Independence {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
    },
    /// Triple-mixing value at `a`.
    Mixing3 {
        #[arg(long)]
        field: String,
        #[arg(long)]
        a: String,
    },
    /// Positive correlation on random spectra.
    Poscorr {
        #[arg(long)]
        field: String,
        /// Multipliers summing to zero, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum PatternCmd {
    /// Reciprocal triples on hyperbolas.
    Hyperbola3 {
        #[arg(long)]
        field: String,
    },
    /// Difference sets inside `H_t`.
    HyperbolaDiffset {
        #[arg(long)]
        field: String,
        #[arg(long)]
        t: String,
        #[arg(long, default_value_t = 4)]
        size: usize,
    },
    /// Products of coordinate differences of a point set.
    Prod {
        #[arg(long)]
        field: String,
        /// `x:y` pairs, comma separated.
        #[arg(long)]
        points: String,
    },
    /// Pairs with a prescribed Minkowski form.
    Spacetime {
        #[arg(long)]
        field: String,
        #[arg(long)]
        z: String,
        #[arg(long)]
        points: Option<String>,
        /// Base set of the characteristic 2 counterexample.
        #[arg(long)]
        e_o: Option<String>,
    },
    /// First `a` with `p(a)` a difference of the set.
    LaurentFs {
        #[arg(long)]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long, allow_hyphen_values = true)]
        truncation: String,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
    },
}

#[derive(Subcommand)]
enum Pgl2Cmd {
    /// Folner ratio of `Q(A)` under `u_+(b)` or `u_-(b)`.
    Ratio {
        #[arg(long)]
        field: String,
        /// Elements, comma separated, or `all`.
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value = "plus")]
        gen: String,
    },
    /// The set `Q(A)`.
    Qset {
        #[arg(long)]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        /// Matrices to print.
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
    /// Inversion section and translate identities.
    SectionCheck {
        #[arg(long)]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
}

fn run_scenario(
    config: Option<PathBuf>,
    scenario: Option<String>,
    out: Option<PathBuf>,
    set: Vec<String>,
    seed: Option<u64>,
    cap: Option<u64>,
) -> CliResult<bool> {
    let mut cfg = match &config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(name) = scenario {
        cfg.scenario = name;
    }
    if cfg.scenario.is_empty() {
        return Err(CliError::Parse("give --config or --scenario".into()));
    }
    for kv in set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Parse(format!("--set `{kv}` is not key=value")))?;
        cfg.params
            .insert(k.trim().to_string(), v.trim().to_string());
    }
    let sc = find(&cfg.scenario)?;
    let resolved = sc.resolve(
        &cfg,
        seed.or(cfg.seed).unwrap_or(1),
        cap.or(cfg.cap).unwrap_or(DEFAULT_CAP),
    )?;
    let outcome = sc.execute(&resolved)?;
    let passed = sc.mode == Mode::Report || outcome.all_passed();
    let dir = out
        .or(cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(sc.name));
    write_run(&dir, &resolved, sc.mode, &outcome, passed)?;
    for c in &outcome.checks {
        let tag = match (sc.mode, c.passed) {
            (Mode::Report, _) => "NOTE",
            (_, true) => "PASS",
            (_, false) => "FAIL",
        };
        println!("{tag} {}: {}", c.name, c.detail);
    }
    println!(
        "{} {} ({}), artifacts in {}",
        sc.name,
        if passed { "passed" } else { "FAILED" },
        match sc.mode {
            Mode::Assert => "assert",
            Mode::Report => "report",
        },
        dir.display()
    );
    Ok(passed)
}

fn list(verbose: bool) {
    for s in SCENARIOS {
        let mode = match s.mode {
            Mode::Assert => "assert",
            Mode::Report => "report",
        };
        println!("{:<20} {mode:<7} {}", s.name, s.description);
        if verbose {
            for p in s.params {
                println!("    {:<12} = {:<40} {}", p.key, p.default, p.doc);
            }
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<bool> {
    let cap = cli.cap.unwrap_or(DEFAULT_CAP);
    let seed = cli.seed.unwrap_or(1);
    let record = match cli.cmd {
        Cmd::Run {
            config,
            scenario,
            out,
            set,
        } => return run_scenario(config, scenario, out, set, cli.seed, cli.cap),
        Cmd::List { verbose } => {
            list(verbose);
            return Ok(true);
        }
        Cmd::Identity(c) => match c {
            IdentityCmd::PowerBuild { n, p } => commands::power_build(n, p)?,
            IdentityCmd::Independence { n, p, m } => commands::independence(n, p, m)?,
            IdentityCmd::Mixing3 { field, a } => commands::mixing3(&field, &a, cap)?,
            IdentityCmd::Poscorr { field, s, trials } => {
                commands::poscorr(&field, &s, trials, seed)?
            }
        },
        Cmd::Pattern(c) => match c {
            PatternCmd::Hyperbola3 { field } => commands::hyperbola3(&field, cap)?,
            PatternCmd::HyperbolaDiffset { field, t, size } => {
                commands::hyperbola_diffset(&field, &t, size, cap)?
            }
            PatternCmd::Prod { field, points } => commands::prod(&field, &points)?,
            PatternCmd::Spacetime {
                field,
                z,
                points,
                e_o,
            } => commands::spacetime(&field, &z, points.as_deref(), e_o.as_deref())?,
            PatternCmd::LaurentFs {
                field,
                poly,
                truncation,
                set,
            } => commands::laurent_fs(&field, &poly, &truncation, &set, cap)?,
        },
        Cmd::Pgl2(c) => match c {
            Pgl2Cmd::Ratio { field, set, b, gen } => {
                commands::pgl2_ratio(&field, &set, &b, commands::generator(&gen)?, cap)?
            }
            Pgl2Cmd::Qset { field, set, limit } => commands::pgl2_qset(&field, &set, limit, cap)?,
            Pgl2Cmd::SectionCheck { field, set, b } => {
                commands::pgl2_section_check(&field, &set, &b, cap)?
            }
        },
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&record).expect("json values serialize")
    );
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        pool = pool.num_threads(n.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| dispatch(cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
