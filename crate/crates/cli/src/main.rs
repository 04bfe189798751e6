use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use z4kagome::cliffsynth::{parse_library_word, random_tableau, synthesize};
use z4kagome::kagome;
use z4kagome_cli::verify::{self, Check};
use z4kagome_cli::*;

#[derive(Parser)]
#[command(name = "z4kagome", version, about = "Z4 parafermion kagome code: simulations and verification")]
struct Cli {
    /// Plain-text key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check stabilizer commutation, rank and logical algebra.
    Validate(RunArgs),
    /// Depolarizing threshold sweep; CSV output.
    Threshold(RunArgs),
    /// Thermal lifetime runs; CSV output.
    Lifetime(RunArgs),
    /// Synthesize a Clifford word over {S, T, Z, nearest-neighbour C_Z}.
    Synth(SynthArgs),
    /// Run a verification suite: perturbation, braiding, clifford, matching or code.
    Verify(VerifyArgs),
}

/// Every flag is kept as text and merged over the config file.
#[derive(Args, Default)]
struct RunArgs {
    /// Comma-separated lattice sizes.
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long = "p-min")]
    p_min: Option<String>,
    #[arg(long = "p-max")]
    p_max: Option<String>,
    #[arg(long = "p-steps")]
    p_steps: Option<String>,
    /// Comma-separated λ values.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Comma-separated observables such as X1,Z1 or XL,ZL; default all.
    #[arg(long)]
    observable: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Depolarizing rate unit: site (default) or qubit.
    #[arg(long)]
    noise: Option<String>,
    /// Use the code with two defect lines.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    defects: Option<String>,
    /// Snapshot-decode every this many accepted steps (lifetime).
    #[arg(long)]
    stride: Option<String>,
    /// Cap on a single lifetime trial, in lifetime units.
    #[arg(long = "max-time")]
    max_time: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of qudits.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Target as library gates, e.g. "H0 CX0,1 SWAP0,1"; random if absent.
    #[arg(long)]
    word: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    suite: String,
    #[command(flatten)]
    run: RunArgs,
}

const KEYS: [&str; 14] =
    ["L", "p-min", "p-max", "p-steps", "lambda", "trials", "observable", "seed", "out", "workers", "noise", "defects", "stride", "max-time"];

fn merge(file: Option<&PathBuf>, a: &RunArgs) -> Result<BTreeMap<String, String>> {
    let mut m = match file {
        Some(p) => read_config_file(p)?,
        None => BTreeMap::new(),
    };
    if let Some(k) = m.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(unknown_key(k));
    }
    let flags = [
        ("L", &a.l),
        ("p-min", &a.p_min),
        ("p-max", &a.p_max),
        ("p-steps", &a.p_steps),
        ("lambda", &a.lambda),
        ("trials", &a.trials),
        ("observable", &a.observable),
        ("seed", &a.seed),
        ("out", &a.out),
        ("workers", &a.workers),
        ("noise", &a.noise),
        ("defects", &a.defects),
        ("stride", &a.stride),
        ("max-time", &a.max_time),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            m.insert(k.to_string(), v.clone());
        }
    }
    Ok(m)
}

fn threshold_config(m: &BTreeMap<String, String>) -> Result<ThresholdConfig> {
    let mut c = ThresholdConfig::default();
    if let Some(v) = m.get("L") {
        c.ls = parse_list("L", v)?;
    }
    let p_min = m.get("p-min").map(|v| parse_value("p-min", v)).transpose()?.unwrap_or(0.02);
    let p_max = m.get("p-max").map(|v| parse_value("p-max", v)).transpose()?.unwrap_or(0.3);
    let p_steps = m.get("p-steps").map(|v| parse_value("p-steps", v)).transpose()?.unwrap_or(15);
    c.ps = linear_grid(p_min, p_max, p_steps)?;
    if let Some(v) = m.get("trials") {
        c.trials = parse_value("trials", v)?;
    }
    if let Some(v) = m.get("observable") {
        c.observables = parse_list("observable", v)?;
    }
    if let Some(v) = m.get("seed") {
        c.seed = parse_value("seed", v)?;
    }
    if let Some(v) = m.get("workers") {
        c.workers = parse_value("workers", v)?;
    }
    if let Some(v) = m.get("noise") {
        c.noise = parse_noise(v)?;
    }
    if let Some(v) = m.get("defects") {
        c.defects = parse_bool("defects", v)?;
    }
    c.validate()?;
    Ok(c)
}

fn lifetime_config(m: &BTreeMap<String, String>) -> Result<LifetimeConfig> {
    let mut c = LifetimeConfig::default();
    if let Some(v) = m.get("L") {
        c.ls = parse_list("L", v)?;
    }
    if let Some(v) = m.get("lambda") {
        c.lambdas = parse_list("lambda", v)?;
    }
    if let Some(v) = m.get("trials") {
        c.trials = parse_value("trials", v)?;
    }
    if let Some(v) = m.get("seed") {
        c.seed = parse_value("seed", v)?;
    }
    if let Some(v) = m.get("workers") {
        c.workers = parse_value("workers", v)?;
    }
    if let Some(v) = m.get("defects") {
        c.defects = parse_bool("defects", v)?;
    }
    if let Some(v) = m.get("stride") {
        c.stride = parse_value("stride", v)?;
    }
    if let Some(v) = m.get("max-time") {
        c.max_time = parse_value("max-time", v)?;
    }
    c.validate()?;
    Ok(c)
}

fn report(checks: &[Check]) -> bool {
    for c in checks {
        println!("{c}");
    }
    checks.iter().all(|c| c.passed)
}

fn validate(m: &BTreeMap<String, String>) -> Result<bool> {
    let ls: Vec<usize> = m.get("L").map(|v| parse_list("L", v)).transpose()?.unwrap_or_else(|| vec![4, 6, 8]);
    let defects = m.get("defects").map(|v| parse_bool("defects", v)).transpose()?.unwrap_or(false);
    let mut checks = Vec::new();
    for &l in &ls {
        if defects {
            let c = kagome::build_with_defects(l)?;
            let bad = kagome::noncommuting_generator_pairs(&c);
            checks.push(Check::new(format!("L={l} defects stabilizers-commute"), bad.is_empty(), format!("noncommuting_pairs={}", bad.len())));
            let e = z4kagome::commutation_exponent(c.logical("ZL")?, c.logical("XL")?)?;
            checks.push(Check::new(format!("L={l} defects ZLXL=ωXLZL"), e == 1, format!("exponent={e}")));
        } else {
            let c = kagome::build(l).map_err(|e| anyhow::Error::new(ConfigError(e.to_string())))?;
            checks.extend(verify::code_validity(&c, &format!("L={l}"))?);
        }
    }
    Ok(report(&checks))
}

fn synth(a: &SynthArgs) -> Result<bool> {
    if a.n == 0 {
        return Err(ConfigError("n must be at least 1".into()).into());
    }
    let target = match &a.word {
        Some(w) => parse_library_word(a.n, w).map_err(|e| anyhow::Error::new(ConfigError(e.to_string())))?,
        None => random_tableau(a.n, 30, &mut ChaCha8Rng::seed_from_u64(a.seed)),
    };
    let word = synthesize(&target)?;
    let tokens: Vec<String> = word.gates.iter().map(|g| g.to_string()).collect();
    println!("{}", tokens.join(" "));
    let ok = word.evaluate()? == target;
    eprintln!("{} synthesis gates={} verified_by_conjugation", if ok { "PASS" } else { "FAIL" }, word.gates.len());
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = cli.config.as_ref();
    match cli.cmd {
        Command::Validate(a) => validate(&merge(cfg, &a)?),
        Command::Threshold(a) => {
            let m = merge(cfg, &a)?;
            let c = threshold_config(&m)?;
            let rows = run_threshold(&c)?;
            write_output(m.get("out").map(PathBuf::from).as_deref(), &threshold_csv(&rows))?;
            let mut names: Vec<&str> = rows.iter().map(|r| r.observable.as_str()).collect();
            names.dedup();
            for name in names {
                if let Some(x) = crossing(&rows, name) {
                    eprintln!("crossing {name} p={:.4} stderr={:.4}", x.p, x.stderr);
                }
            }
            Ok(true)
        }
        Command::Lifetime(a) => {
            let m = merge(cfg, &a)?;
            let c = lifetime_config(&m)?;
            let rows = run_lifetime(&c)?;
            write_output(m.get("out").map(PathBuf::from).as_deref(), &lifetime_csv(&rows))?;
            for r in rows.iter().filter(|r| r.censored > 0) {
                eprintln!("lambda={} L={}: {} of {} trials reached max-time", r.lambda, r.l, r.censored, r.trials);
            }
            Ok(true)
        }
        Command::Synth(a) => synth(&a),
        Command::Verify(v) => {
            let m = merge(cfg, &v.run)?;
            let ls: Vec<usize> = m.get("L").map(|s| parse_list("L", s)).transpose()?.unwrap_or_else(|| vec![4, 6, 8]);
            let seed: u64 = m.get("seed").map(|s| parse_value("seed", s)).transpose()?.unwrap_or(1);
            Ok(report(&verify::run_suite(&v.suite, &ls, seed)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
