//! Experiment harness: configuration, seeding, threshold sweeps, lifetime
//! runs and the verification suites behind the `z4kagome` binary.

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use z4kagome::noise::{apply_noise, NoiseModel, ThermalChain, ThermalParams};
use z4kagome::{extract_syndrome, kagome, logical_verdict, Decoder, KagomeCode};

pub mod verify;

/// Configuration errors map to exit code 2; everything else to 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "bad configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

pub fn is_config_error(e: &anyhow::Error) -> bool {
    e.downcast_ref::<ConfigError>().is_some()
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one trial: the base seed is folded with each coordinate of the
/// work item in turn, so a trial's stream depends only on its coordinates.
pub fn trial_seed(base: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(splitmix64(base), |s, &c| splitmix64(s ^ c))
}

/// Plain-text `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| config_err(format!("line {}: expected key=value", n + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    parse_config_file(&text)
}

pub fn parse_list<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| config_err(format!("{key}: cannot parse {t:?}"))))
        .collect()
}

pub fn parse_value<T: std::str::FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim().parse::<T>().map_err(|_| config_err(format!("{key}: cannot parse {s:?}")))
}

pub fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(config_err(format!("{key}: expected a boolean, got {s:?}"))),
    }
}

/// `steps` evenly spaced points from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(config_err("p-steps must be at least 1"));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect())
}

fn build_code(l: usize, defects: bool) -> Result<KagomeCode> {
    let code = if defects { kagome::build_with_defects(l) } else { kagome::build(l) };
    code.map_err(|e| config_err(format!("L={l}: {e}")))
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().context("building the worker pool")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdConfig {
    pub ls: Vec<usize>,
    pub ps: Vec<f64>,
    pub trials: u64,
    /// Empty means every logical of the code.
    pub observables: Vec<String>,
    pub seed: u64,
    pub defects: bool,
    pub noise: NoiseModel,
    pub workers: usize,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            ls: vec![8, 12, 16],
            ps: linear_grid(0.02, 0.3, 15).expect("static grid"),
            trials: 1000,
            observables: Vec::new(),
            seed: 1,
            defects: false,
            noise: NoiseModel::Site,
            workers: default_workers(),
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ls.is_empty() {
            return Err(config_err("L list is empty"));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.workers == 0 {
            return Err(config_err("workers must be at least 1"));
        }
        if self.ps.is_empty() || self.ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(config_err("p grid must be nonempty and within [0, 1]"));
        }
        for o in &self.observables {
            if KagomeCode::partner(o).is_none() {
                return Err(config_err(format!("unknown observable {o:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub observable: String,
    pub l: usize,
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
}

impl ThresholdRow {
    pub fn p_logical(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// Binomial standard error of [`Self::p_logical`].
    pub fn stderr(&self) -> f64 {
        let p = self.p_logical();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

pub const THRESHOLD_HEADER: &str = "observable,L,p,trials,failures,p_logical,stderr";

pub fn threshold_csv(rows: &[ThresholdRow]) -> String {
    let mut s = format!("{THRESHOLD_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{:.6},{},{},{:.6},{:.6}", r.observable, r.l, r.p, r.trials, r.failures, r.p_logical(), r.stderr());
    }
    s
}

/// One depolarizing trial; returns the failure flag of every observable in
/// `verdict_index` order. Observable `O` fails when the residual error acts
/// nontrivially on it, which the verdict of its conjugate partner detects.
fn threshold_trial(code: &KagomeCode, dec: &Decoder, noise: NoiseModel, p: f64, seed: u64, verdict_index: &[usize]) -> Result<Vec<bool>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = apply_noise(code, noise, p, &mut rng);
    let syn = extract_syndrome(code, &frame);
    let corr = dec.decode(&syn)?;
    let verdict = logical_verdict(code, &frame, &corr)?;
    Ok(verdict_index.iter().map(|&i| verdict[i].1).collect())
}

pub fn run_threshold(cfg: &ThresholdConfig) -> Result<Vec<ThresholdRow>> {
    cfg.validate()?;
    let workers = pool(cfg.workers)?;
    let mut rows = Vec::new();
    for &l in &cfg.ls {
        let code = build_code(l, cfg.defects)?;
        let dec = Decoder::new(&code);
        let names: Vec<String> =
            if cfg.observables.is_empty() { code.logicals().iter().map(|lg| lg.name.clone()).collect() } else { cfg.observables.clone() };
        let mut verdict_index = Vec::with_capacity(names.len());
        for name in &names {
            let partner = KagomeCode::partner(name).ok_or_else(|| config_err(format!("unknown observable {name:?}")))?;
            let idx = code
                .logicals()
                .iter()
                .position(|lg| lg.name == partner)
                .ok_or_else(|| config_err(format!("observable {name:?} does not exist at L={l}")))?;
            verdict_index.push(idx);
        }
        for (pi, &p) in cfg.ps.iter().enumerate() {
            // Integer sums are order-independent, so the worker count cannot
            // change the result.
            let failures = workers.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| {
                        let seed = trial_seed(cfg.seed, &[l as u64, pi as u64, t]);
                        threshold_trial(&code, &dec, cfg.noise, p, seed, &verdict_index)
                            .map(|v| v.into_iter().map(u64::from).collect::<Vec<u64>>())
                    })
                    .try_reduce(|| vec![0u64; names.len()], |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()))
            })?;
            for (name, f) in names.iter().zip(failures) {
                rows.push(ThresholdRow { observable: name.clone(), l, p, trials: cfg.trials, failures: f });
            }
        }
    }
    rows.sort_by(|a, b| a.observable.cmp(&b.observable).then(a.l.cmp(&b.l)).then(a.p.total_cmp(&b.p)));
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub p: f64,
    /// First-order propagation of the binomial errors at the bracketing points.
    pub stderr: f64,
}

/// Crossing of the two largest-L curves of `observable`, by linear
/// interpolation of their difference inside the first bracketing interval
/// where the larger lattice switches from doing better to doing worse.
pub fn crossing(rows: &[ThresholdRow], observable: &str) -> Option<Crossing> {
    let mut ls: Vec<usize> = rows.iter().filter(|r| r.observable == observable).map(|r| r.l).collect();
    ls.sort_unstable();
    ls.dedup();
    if ls.len() < 2 {
        return None;
    }
    let (small, large) = (ls[ls.len() - 2], ls[ls.len() - 1]);
    let curve = |l: usize| {
        let mut c: Vec<&ThresholdRow> = rows.iter().filter(|r| r.observable == observable && r.l == l).collect();
        c.sort_by(|a, b| a.p.total_cmp(&b.p));
        c
    };
    let (cs, cl) = (curve(small), curve(large));
    if cs.len() != cl.len() || cs.iter().zip(&cl).any(|(a, b)| a.p != b.p) {
        return None;
    }
    let diff: Vec<f64> = cs.iter().zip(&cl).map(|(a, b)| b.p_logical() - a.p_logical()).collect();
    for k in 1..diff.len() {
        let (d0, d1) = (diff[k - 1], diff[k]);
        if d0 < 0.0 && d1 >= 0.0 {
            let (p0, p1) = (cs[k - 1].p, cs[k].p);
            let t = -d0 / (d1 - d0);
            let p = p0 + t * (p1 - p0);
            let var0 = cs[k - 1].stderr().powi(2) + cl[k - 1].stderr().powi(2);
            let var1 = cs[k].stderr().powi(2) + cl[k].stderr().powi(2);
            // ∂p/∂d0 = −(p1−p0)·d1/(d1−d0)², ∂p/∂d1 = (p1−p0)·d0/(d1−d0)².
            let s = (p1 - p0) / (d1 - d0).powi(2);
            let stderr = ((s * d1).powi(2) * var0 + (s * d0).powi(2) * var1).sqrt();
            return Some(Crossing { p, stderr });
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeConfig {
    pub lambdas: Vec<f64>,
    pub ls: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub defects: bool,
    /// Decode a snapshot every `stride` accepted steps.
    pub stride: u64,
    /// Trials still alive at this time are recorded at the cap.
    pub max_time: f64,
    pub workers: usize,
}

impl Default for LifetimeConfig {
    fn default() -> Self {
        LifetimeConfig {
            lambdas: vec![1.0, 3.0, 5.0],
            ls: vec![8, 12, 16],
            trials: 100,
            seed: 1,
            defects: false,
            stride: 1,
            max_time: 1.0e6,
            workers: default_workers(),
        }
    }
}

impl LifetimeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ls.is_empty() || self.lambdas.is_empty() {
            return Err(config_err("L and lambda lists must be nonempty"));
        }
        if self.lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(config_err("lambda must be positive"));
        }
        if self.trials == 0 || self.stride == 0 || self.workers == 0 {
            return Err(config_err("trials, stride and workers must be at least 1"));
        }
        if !(self.max_time > 0.0) {
            return Err(config_err("max-time must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeRow {
    pub lambda: f64,
    pub l: usize,
    pub trials: u64,
    pub mean: f64,
    pub stderr: f64,
    /// Trials that reached the time cap.
    pub censored: u64,
}

pub const LIFETIME_HEADER: &str = "lambda,L,trials,mean_lifetime,stderr";

pub fn lifetime_csv(rows: &[LifetimeRow]) -> String {
    let mut s = format!("{LIFETIME_HEADER}\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{:.6},{:.6}", r.lambda, r.l, r.trials, r.mean, r.stderr);
    }
    s
}

/// Runs the Metropolis chain from the empty frame and returns the time of
/// the first snapshot whose decoding fails on any logical, and whether the
/// cap was hit instead.
pub fn lifetime_trial(code: &KagomeCode, dec: &Decoder, params: ThermalParams, seed: u64, stride: u64, max_time: f64) -> Result<(f64, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = ThermalChain::new(code, params);
    let mut accepted = 0u64;
    loop {
        if chain.advance(&mut rng).is_none() {
            return Ok((max_time, true));
        }
        accepted += 1;
        if chain.time() >= max_time {
            return Ok((max_time, true));
        }
        if accepted % stride == 0 {
            let frame = chain.frame();
            let corr = dec.decode(&extract_syndrome(code, frame))?;
            if logical_verdict(code, frame, &corr)?.iter().any(|(_, failed)| *failed) {
                return Ok((chain.time(), false));
            }
        }
    }
}

pub fn run_lifetime(cfg: &LifetimeConfig) -> Result<Vec<LifetimeRow>> {
    cfg.validate()?;
    let workers = pool(cfg.workers)?;
    let mut rows = Vec::new();
    for &l in &cfg.ls {
        let code = build_code(l, cfg.defects)?;
        let dec = Decoder::new(&code);
        for (li, &lambda) in cfg.lambdas.iter().enumerate() {
            let params = ThermalParams::from_lambda(lambda).map_err(|e| config_err(e.to_string()))?;
            let mut samples: Vec<(u64, f64, bool)> = workers.install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| {
                        let seed = trial_seed(cfg.seed, &[l as u64, li as u64, t]);
                        lifetime_trial(&code, &dec, params, seed, cfg.stride, cfg.max_time).map(|(time, cap)| (t, time, cap))
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            // Floating-point sums are reduced in trial order for determinism.
            samples.sort_by_key(|s| s.0);
            let n = samples.len() as f64;
            let mean = samples.iter().map(|s| s.1).sum::<f64>() / n;
            let var = if samples.len() > 1 { samples.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            rows.push(LifetimeRow {
                lambda,
                l,
                trials: cfg.trials,
                mean,
                stderr: (var / n).sqrt(),
                censored: samples.iter().filter(|s| s.2).count() as u64,
            });
        }
    }
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.l.cmp(&b.l)));
    Ok(rows)
}

/// Random nonnegative integer weights on `K_n`.
pub fn random_graph<R: Rng + ?Sized>(n: usize, max_weight: i64, rng: &mut R) -> z4kagome::matching::WeightedGraph {
    z4kagome::matching::WeightedGraph::from_fn(n, |_, _| rng.gen_range(1..=max_weight))
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn parse_noise(s: &str) -> Result<NoiseModel> {
    s.parse::<NoiseModel>().map_err(|e| config_err(e.to_string()))
}

pub fn unknown_key(key: &str) -> anyhow::Error {
    config_err(format!("unknown configuration key {key:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference generator seeded with 0.
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix64(0x9e37_79b9_7f4a_7c15), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn trial_seeds_depend_on_every_coordinate() {
        let s = trial_seed(1, &[8, 0, 0]);
        assert_ne!(s, trial_seed(2, &[8, 0, 0]));
        assert_ne!(s, trial_seed(1, &[12, 0, 0]));
        assert_ne!(s, trial_seed(1, &[8, 1, 0]));
        assert_ne!(s, trial_seed(1, &[8, 0, 1]));
        assert_eq!(s, trial_seed(1, &[8, 0, 0]));
    }

    #[test]
    fn config_file_parsing() {
        let m = parse_config_file("# sweep\nL = 8,12\ntrials=50 # inline\n\n").unwrap();
        assert_eq!(m["L"], "8,12");
        assert_eq!(m["trials"], "50");
        let e = parse_config_file("L 8").unwrap_err();
        assert!(is_config_error(&e));
        assert_eq!(parse_list::<usize>("L", "8, 12,16").unwrap(), vec![8, 12, 16]);
        assert!(is_config_error(&parse_list::<usize>("L", "8,x").unwrap_err()));
    }

    #[test]
    fn grid_endpoints() {
        let g = linear_grid(0.1, 0.3, 3).unwrap();
        assert_eq!(g.len(), 3);
        assert!((g[1] - 0.2).abs() < 1e-15);
        assert_eq!(g[2], 0.3);
        assert!(linear_grid(0.1, 0.3, 0).is_err());
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        let bad = [
            ThresholdConfig { trials: 0, ..ThresholdConfig::default() },
            ThresholdConfig { ps: vec![1.5], ..ThresholdConfig::default() },
            ThresholdConfig { observables: vec!["Q1".into()], ..ThresholdConfig::default() },
            ThresholdConfig { ls: vec![5], ..ThresholdConfig::default() },
        ];
        for cfg in bad {
            assert!(is_config_error(&run_threshold(&cfg).unwrap_err()), "{cfg:?}");
        }
        let lt = LifetimeConfig { lambdas: vec![0.0], ..LifetimeConfig::default() };
        assert!(is_config_error(&run_lifetime(&lt).unwrap_err()));
    }

    #[test]
    fn zero_noise_never_fails() {
        let cfg = ThresholdConfig { ls: vec![4, 6], ps: vec![0.0], trials: 20, workers: 1, ..ThresholdConfig::default() };
        let rows = run_threshold(&cfg).unwrap();
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.failures == 0));
        let csv = threshold_csv(&rows);
        assert!(csv.starts_with("observable,L,p,trials,failures,p_logical,stderr\n"));
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = ThresholdConfig { ls: vec![4], ps: vec![0.1, 0.2], trials: 40, workers: 1, ..ThresholdConfig::default() };
        let a = threshold_csv(&run_threshold(&cfg).unwrap());
        let b = threshold_csv(&run_threshold(&ThresholdConfig { workers: 4, ..cfg }).unwrap());
        assert_eq!(a, b);
    }

    fn row(l: usize, p: f64, failures: u64) -> ThresholdRow {
        ThresholdRow { observable: "X1".into(), l, p, trials: 100, failures }
    }

    #[test]
    fn crossing_interpolates_the_difference() {
        // Differences −0.1 at p=0.1 and +0.1 at p=0.2 cross at 0.15.
        let rows = vec![row(8, 0.1, 20), row(8, 0.2, 40), row(12, 0.1, 10), row(12, 0.2, 50), row(4, 0.1, 90), row(4, 0.2, 0)];
        let c = crossing(&rows, "X1").unwrap();
        assert!((c.p - 0.15).abs() < 1e-12);
        assert!(c.stderr > 0.0 && c.stderr < 0.1);
        assert!(crossing(&rows, "Z1").is_none());
        let never = vec![row(8, 0.1, 20), row(8, 0.2, 40), row(12, 0.1, 30), row(12, 0.2, 50)];
        assert!(crossing(&never, "X1").is_none());
    }

    #[test]
    fn lifetime_rows_and_monotone_lambda_at_tiny_size() {
        let cfg = LifetimeConfig { lambdas: vec![0.5, 2.0], ls: vec![4], trials: 30, workers: 1, ..LifetimeConfig::default() };
        let rows = run_lifetime(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.mean > 0.0 && r.censored == 0));
        assert!(rows[1].mean > rows[0].mean);
        assert!(lifetime_csv(&rows).starts_with("lambda,L,trials,mean_lifetime,stderr\n"));
    }
}
