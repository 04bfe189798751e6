//! Verification suites. Each check reports a name, a pass flag and a
//! free-form detail (usually a residual or the compared values).

use anyhow::Result;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use z4kagome::braidlab::{exchange_effect, verify_identities, ExchangeSpec};
use z4kagome::cliffsynth::{enumerate_sl2z4, random_tableau, synthesize, word_search};
use z4kagome::kagome::{self, code_distance, generator_rank, logical_qudit_count, noncommuting_generator_pairs};
use z4kagome::matching::{brute_force_mwpm, mwpm};
use z4kagome::pertcheck::{enumerate_routes, gadget_check};
use z4kagome::{commutation_exponent, KagomeCode};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub const SUITES: [&str; 5] = ["perturbation", "braiding", "clifford", "matching", "code"];

/// Route multiplicities of the sixth-order hexagon term, keyed by the
/// intermediate energies in units of Δ.
pub const REFERENCE_ROUTES: [([u8; 5], u32); 9] = [
    ([2, 2, 2, 2, 2], 96),
    ([2, 4, 2, 2, 2], 48),
    ([2, 2, 4, 2, 2], 48),
    ([2, 2, 2, 4, 2], 48),
    ([2, 4, 4, 2, 2], 96),
    ([2, 2, 4, 4, 2], 96),
    ([2, 4, 4, 4, 2], 192),
    ([2, 4, 2, 4, 2], 24),
    ([2, 4, 6, 4, 2], 72),
];

pub fn perturbation() -> Result<Vec<Check>> {
    let census = enumerate_routes()?;
    let mut out = Vec::new();
    out.push(Check::new("route-count", census.routes.len() == REFERENCE_ROUTES.len(), format!("distinct={}", census.routes.len())));
    for (route, m) in REFERENCE_ROUTES {
        let got = census.multiplicity(&route);
        out.push(Check::new(format!("route{route:?}"), got == m, format!("multiplicity={got} expected={m}")));
    }
    out.push(Check::new("q", census.q == Ratio::new(63, 8), format!("q={}", census.q)));
    let fit = gadget_check(0.02, 0.02, 1.0)?;
    out.push(Check::new(
        "gadget-three-body",
        fit.relative_error_abc() < 0.05,
        format!("fitted={:.6e} predicted={:.6e} relative_error={:.4}", fit.z_abc, fit.predicted_abc, fit.relative_error_abc()),
    ));
    out.push(Check::new("gadget-one-body", fit.one_body_residual() < 0.02, format!("residual/β={:.4e}", fit.one_body_residual())));
    out.push(Check::new("gadget-two-body", fit.two_body_residual() < 0.02, format!("residual/(2α²/Δ)={:.4e}", fit.two_body_residual())));
    Ok(out)
}

/// Exchange phases of the two reference clusters, as ζ₈ exponents per ψ_g
/// sector: `ω^{g²/2}ω^{g(g+1)}` up to the common factor, and `ω^{−g²/2}`
/// with global `ω^{1/2}`.
pub const REFERENCE_EXCHANGES: [((u8, u8, u8), [u8; 4]); 2] = [((2, 2, 2), [0, 5, 0, 1]), ((1, 2, 2), [1, 0, 5, 0])];

pub fn braiding() -> Result<Vec<Check>> {
    let mut out: Vec<Check> =
        verify_identities().into_iter().map(|c| Check::new(c.name, c.passed(), format!("residual={:.3e}", c.residual))).collect();
    for ((a, b, c), want) in REFERENCE_EXCHANGES {
        let got = exchange_effect(&ExchangeSpec::new(a, b, c))?;
        out.push(Check::new(format!("exchange(a={a},b={b},c={c})"), got.exp8 == want, format!("zeta8_exponents={:?} expected={want:?}", got.exp8)));
    }
    Ok(out)
}

pub fn clifford(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let group = enumerate_sl2z4();
    out.push(Check::new("sl2z4-order", group.len() == 48, format!("order={}", group.len())));
    let words = word_search();
    let longest = words.values().map(|w| w.len()).max().unwrap_or(0);
    out.push(Check::new("word-coverage", words.len() == 48 && longest <= 9, format!("covered={} longest={longest}", words.len())));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut total_gates = 0;
    for i in 0..samples {
        let n = 1 + i % 3;
        let t = random_tableau(n, 30, &mut rng);
        match synthesize(&t) {
            Ok(w) if w.is_nearest_neighbour() && w.evaluate()? == t => total_gates += w.gates.len(),
            _ => failures += 1,
        }
    }
    out.push(Check::new(
        "synthesis-round-trip",
        failures == 0,
        format!("samples={samples} failures={failures} mean_gates={:.1}", total_gates as f64 / samples.max(1) as f64),
    ));
    Ok(out)
}

pub fn matching(samples: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    for _ in 0..samples {
        let n = 2 * rng.gen_range(1..=6);
        let g = crate::random_graph(n, 100, &mut rng);
        if g.total(&mwpm(&g)?) != g.total(&brute_force_mwpm(&g)?) {
            mismatches += 1;
        }
    }
    Ok(vec![Check::new("blossom-vs-brute-force", mismatches == 0, format!("samples={samples} mismatches={mismatches}"))])
}

/// Stabilizer commutation, generator rank and logical algebra per L, then
/// distances of the defect logicals for every L ≥ 8.
pub fn code(ls: &[usize]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &l in ls {
        let c = kagome::build(l)?;
        out.extend(code_validity(&c, &format!("L={l}"))?);
    }
    for &l in ls.iter().filter(|&&l| l >= 8) {
        let c = kagome::build_with_defects(l)?;
        let xl = code_distance(&c, "XL")?;
        let zl = code_distance(&c, "ZL")?;
        out.push(Check::new(format!("L={l} d(XL)"), xl == l + 2, format!("distance={xl} expected={}", l + 2)));
        out.push(Check::new(format!("L={l} d(ZL)"), zl == l / 2 + 4, format!("distance={zl} expected={}", l / 2 + 4)));
    }
    Ok(out)
}

pub fn code_validity(c: &KagomeCode, tag: &str) -> Result<Vec<Check>> {
    let l = c.l();
    let mut out = Vec::new();
    let bad = noncommuting_generator_pairs(c);
    out.push(Check::new(format!("{tag} stabilizers-commute"), bad.is_empty(), format!("noncommuting_pairs={}", bad.len())));
    let (units, twos) = generator_rank(c);
    let want = 3 * l * l - 2;
    out.push(Check::new(format!("{tag} generator-rank"), units == want && twos == 0, format!("rank={units} two_torsion={twos} expected={want}")));
    let k = logical_qudit_count(c);
    out.push(Check::new(format!("{tag} logical-qudits"), k == 2, format!("k={k}")));
    for pair in ["1", "2"] {
        let z = c.logical(&format!("Z{pair}"))?;
        let x = c.logical(&format!("X{pair}"))?;
        let e = commutation_exponent(z, x)?;
        out.push(Check::new(format!("{tag} Z{pair}X{pair}=ωX{pair}Z{pair}"), e == 1, format!("exponent={e}")));
    }
    Ok(out)
}

pub fn run_suite(suite: &str, ls: &[usize], seed: u64) -> Result<Vec<Check>> {
    match suite {
        "perturbation" => perturbation(),
        "braiding" => braiding(),
        "clifford" => clifford(1000, seed),
        "matching" => matching(1000, seed),
        "code" => code(ls),
        other => Err(crate::ConfigError(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", "))).into()),
    }
}
