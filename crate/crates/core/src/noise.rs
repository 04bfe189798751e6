//! Depolarizing and thermal error processes acting as Pauli frames.
//!
//! A frame carries the accumulated qudit error together with the charge it
//! induces on every active generator, so that thermal proposals cost O(1).
//! Charges follow the decoder's convention: generator `g` carries
//! `(frame, g)`, the commutation exponent of the frame with `g`.

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::kagome::{GenKind, KagomeCode};
use crate::z4algebra::{conversion_row, multiply, Axis, PhasedPauli, QubitPauliEvent};
use crate::{Error, Result};

/// Accumulated error with its cached syndrome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorFrame {
    word: PhasedPauli,
    charges: Vec<u8>,
    history: u64,
}

impl ErrorFrame {
    pub fn identity(code: &KagomeCode) -> Self {
        ErrorFrame { word: PhasedPauli::identity(code.n_qudits()), charges: vec![0; code.generators().len()], history: 0 }
    }

    /// Frame for an arbitrary word; the word must avoid inactive qudits.
    pub fn from_word(code: &KagomeCode, word: PhasedPauli) -> Result<Self> {
        if word.len() != code.n_qudits() {
            return Err(Error::LengthMismatch(word.len(), code.n_qudits()));
        }
        if let Some(q) = word.support().into_iter().find(|&q| !code.is_active(q)) {
            return Err(Error::InvalidArgument(format!("frame acts on inactive qudit {q}")));
        }
        let charges = code
            .generators()
            .iter()
            .map(|g| g.word.commutation_on(&word, &g.sites))
            .map(|c| (4 - c) & 3)
            .collect();
        Ok(ErrorFrame { word, charges, history: 0 })
    }

    pub fn word(&self) -> &PhasedPauli {
        &self.word
    }

    /// Charge per active generator, indexed like `code.generators()`.
    pub fn charges(&self) -> &[u8] {
        &self.charges
    }

    /// Number of elementary events applied so far.
    pub fn history(&self) -> u64 {
        self.history
    }

    /// Right-multiplies `Z^a X^b` on qudit `q` and records one event.
    pub fn apply(&mut self, code: &KagomeCode, q: usize, a: u8, b: u8) {
        debug_assert!(code.is_active(q));
        for (gi, ch) in charge_changes(code, q, a, b) {
            self.charges[gi] = (self.charges[gi] + ch) & 3;
        }
        self.word.mul_right_local(q, a, b);
        self.history += 1;
    }

    /// `self · other`; charges add because the commutation form is bilinear.
    pub fn compose(&self, other: &ErrorFrame) -> Result<ErrorFrame> {
        if self.charges.len() != other.charges.len() {
            return Err(Error::LengthMismatch(self.charges.len(), other.charges.len()));
        }
        Ok(ErrorFrame {
            word: multiply(&self.word, &other.word)?,
            charges: self.charges.iter().zip(&other.charges).map(|(a, b)| (a + b) & 3).collect(),
            history: self.history + other.history,
        })
    }
}

/// Nonzero charge changes `(generator, δ)` caused by `Z^a X^b` on qudit `q`.
pub fn charge_changes(code: &KagomeCode, q: usize, a: u8, b: u8) -> impl Iterator<Item = (usize, u8)> + '_ {
    code.generators_at(q).iter().filter_map(move |&gi| {
        let (c, d) = code.generators()[gi].word.local(q);
        let ch = ((16 + a as u32 * d as u32 - b as u32 * c as u32) % 4) as u8;
        (ch != 0).then_some((gi, ch))
    })
}

/// Independent depolarizing noise at rate `p` on both qubits of every active
/// qudit, converted through the qubit-to-qudit rows.
pub fn apply_depolarizing<R: Rng + ?Sized>(code: &KagomeCode, p: f64, rng: &mut R) -> ErrorFrame {
    let mut frame = ErrorFrame::identity(code);
    for q in code.active_qudits() {
        for slot in 1..=2u8 {
            if rng.gen::<f64>() < p {
                let axis = Axis::ALL[rng.gen_range(0..3)];
                let (a, b) = draw_conversion(QubitPauliEvent { slot, axis }, rng);
                frame.apply(code, q, a, b);
            }
        }
    }
    frame
}

/// One event per active qudit at rate `p`: a uniform qubit slot and axis,
/// converted like [`apply_depolarizing`]. The rate then counts qudit errors.
pub fn apply_site_depolarizing<R: Rng + ?Sized>(code: &KagomeCode, p: f64, rng: &mut R) -> ErrorFrame {
    let mut frame = ErrorFrame::identity(code);
    for q in code.active_qudits() {
        if rng.gen::<f64>() < p {
            let slot = rng.gen_range(1..=2u8);
            let axis = Axis::ALL[rng.gen_range(0..3)];
            let (a, b) = draw_conversion(QubitPauliEvent { slot, axis }, rng);
            frame.apply(code, q, a, b);
        }
    }
    frame
}

/// Unit in which the depolarizing rate is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseModel {
    /// Rate per physical qubit, two qubits per qudit.
    Qubit,
    /// Rate per qudit site.
    Site,
}

impl std::str::FromStr for NoiseModel {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "qubit" => Ok(NoiseModel::Qubit),
            "site" => Ok(NoiseModel::Site),
            _ => Err(crate::Error::UnknownName(s.to_string())),
        }
    }
}

impl std::fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseModel::Qubit => "qubit",
            NoiseModel::Site => "site",
        })
    }
}

pub fn apply_noise<R: Rng + ?Sized>(code: &KagomeCode, model: NoiseModel, p: f64, rng: &mut R) -> ErrorFrame {
    match model {
        NoiseModel::Qubit => apply_depolarizing(code, p, rng),
        NoiseModel::Site => apply_site_depolarizing(code, p, rng),
    }
}

fn draw_conversion<R: Rng + ?Sized>(e: QubitPauliEvent, rng: &mut R) -> (u8, u8) {
    let row = conversion_row(e.axis);
    row[rng.gen_range(0..row.len())]
}

/// Energy of a plaquette with charge `k`, in units of that plaquette's gap.
pub fn plaquette_energy(k: u8) -> u8 {
    [0, 1, 2, 1][(k & 3) as usize]
}

/// Energy scales in units of `k_B T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalParams {
    pub lambda: f64,
    /// Δ_△ / k_BT.
    pub beta_energy_triangle: f64,
    /// Δ_⬡ / k_BT.
    pub beta_energy_hexagon: f64,
}

impl ThermalParams {
    /// `Δ_⬡ = λ k_BT` and `Δ_△ = λ² k_BT`.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
        }
        let p = ThermalParams { lambda, beta_energy_triangle: lambda * lambda, beta_energy_hexagon: lambda };
        Ok(p)
    }

    /// Gaps from the microscopic couplings: `Δ_△ = 2J`, `Δ_⬡ = 2·(63/8)h⁶/(2J)⁵`.
    pub fn gaps_from_couplings(j: f64, h: f64) -> (f64, f64) {
        (2.0 * j, 2.0 * 63.0 / 8.0 * h.powi(6) / (2.0 * j).powi(5))
    }
}

/// Triangle-like generators (triangles and pentagons) versus hexagons.
fn is_triangle_like(kind: &GenKind) -> bool {
    !matches!(kind, GenKind::Hexagon(_))
}

/// Energy bookkeeping `Δ_tot = m Δ_△ + n Δ_⬡` for one proposal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyChange {
    pub m: i32,
    pub n: i32,
}

impl EnergyChange {
    pub fn in_kt(&self, params: &ThermalParams) -> f64 {
        self.m as f64 * params.beta_energy_triangle + self.n as f64 * params.beta_energy_hexagon
    }
}

/// Energy change of applying `Z^a X^b` on `q` to a configuration `charges`.
/// Pentagons are priced like triangles.
pub fn energy_change(code: &KagomeCode, charges: &[u8], q: usize, a: u8, b: u8) -> EnergyChange {
    let mut e = EnergyChange { m: 0, n: 0 };
    for (gi, ch) in charge_changes(code, q, a, b) {
        let before = plaquette_energy(charges[gi]) as i32;
        let after = plaquette_energy(charges[gi] + ch) as i32;
        if is_triangle_like(&code.generators()[gi].kind) {
            e.m += after - before;
        } else {
            e.n += after - before;
        }
    }
    e
}

/// Outcome of one Metropolis proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub qudit: usize,
    pub a: u8,
    pub b: u8,
    pub change: EnergyChange,
    pub accepted: bool,
}

/// One Metropolis step: a uniform active spin, a uniform axis, a converted
/// draw, accepted with probability `min(1, e^{-Δ_tot})`.
pub fn metropolis_step<R: Rng + ?Sized>(
    code: &KagomeCode,
    params: &ThermalParams,
    frame: &mut ErrorFrame,
    rng: &mut R,
) -> Proposal {
    let active = code.active_qudits();
    let spin = rng.gen_range(0..2 * active.len());
    let q = active[spin / 2];
    let axis = Axis::ALL[rng.gen_range(0..3)];
    let (a, b) = draw_conversion(QubitPauliEvent { slot: 1 + (spin % 2) as u8, axis }, rng);
    let change = energy_change(code, frame.charges(), q, a, b);
    let d = change.in_kt(params);
    let accepted = d <= 0.0 || rng.gen::<f64>() < (-d).exp();
    if accepted {
        frame.apply(code, q, a, b);
    }
    Proposal { qudit: q, a, b, change, accepted }
}

/// Every qudit word a single spin flip can become, with its probability
/// given that the flipped spin sits on that qudit.
fn proposal_table() -> Vec<((u8, u8), f64)> {
    let mut out = Vec::new();
    for axis in Axis::ALL {
        let row = conversion_row(axis);
        for &w in row {
            out.push((w, 1.0 / 3.0 / row.len() as f64));
        }
    }
    out
}

/// Binary indexed tree over nonnegative weights.
#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<f64>,
    values: Vec<f64>,
    updates: usize,
}

impl Fenwick {
    fn new(values: Vec<f64>) -> Self {
        let mut f = Fenwick { tree: vec![0.0; values.len() + 1], values, updates: 0 };
        f.rebuild();
        f
    }

    fn rebuild(&mut self) {
        self.tree.iter_mut().for_each(|t| *t = 0.0);
        for i in 0..self.values.len() {
            let mut k = i + 1;
            while k < self.tree.len() {
                self.tree[k] += self.values[i];
                k += k & k.wrapping_neg();
            }
        }
        self.updates = 0;
    }

    fn set(&mut self, i: usize, v: f64) {
        // Rates span many orders of magnitude; rebuild before rounding
        // residue from incremental updates can swamp the small ones.
        self.updates += 1;
        if self.updates > 4096 {
            self.values[i] = v;
            self.rebuild();
            return;
        }
        let delta = v - self.values[i];
        self.values[i] = v;
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] += delta;
            k += k & k.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Smallest index whose prefix sum exceeds `x`.
    fn find(&self, mut x: f64) -> usize {
        let n = self.values.len();
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= x {
                pos = next;
                x -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

/// Rejection-free thermal sampler. Each call to [`ThermalChain::advance`]
/// jumps to the next accepted Metropolis proposal, drawing the number of
/// rejected proposals in between from the matching geometric law. The
/// sequence of accepted moves and their step counts has the same
/// distribution as repeated [`metropolis_step`] calls.
#[derive(Debug, Clone)]
pub struct ThermalChain<'a> {
    code: &'a KagomeCode,
    params: ThermalParams,
    frame: ErrorFrame,
    table: Vec<((u8, u8), f64)>,
    active: Vec<usize>,
    /// Per active qudit, the probability that a step proposes a move there
    /// and accepts it.
    rates: Fenwick,
    slot_of: Vec<usize>,
    steps: u64,
}

impl<'a> ThermalChain<'a> {
    pub fn new(code: &'a KagomeCode, params: ThermalParams) -> Self {
        let frame = ErrorFrame::identity(code);
        let active = code.active_qudits();
        let mut slot_of = vec![usize::MAX; code.n_qudits()];
        for (k, &q) in active.iter().enumerate() {
            slot_of[q] = k;
        }
        let mut chain = ThermalChain {
            code,
            params,
            frame,
            table: proposal_table(),
            active,
            rates: Fenwick::new(Vec::new()),
            slot_of,
            steps: 0,
        };
        let rates = (0..chain.active.len()).map(|k| chain.qudit_rate(chain.active[k])).collect();
        chain.rates = Fenwick::new(rates);
        chain
    }

    pub fn frame(&self) -> &ErrorFrame {
        &self.frame
    }

    /// Metropolis steps elapsed, accepted or not.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Elapsed time in steps per spin.
    pub fn time(&self) -> f64 {
        self.steps as f64 / self.code.n_active_spins() as f64
    }

    fn acceptance(&self, q: usize, a: u8, b: u8) -> f64 {
        let d = energy_change(self.code, self.frame.charges(), q, a, b).in_kt(&self.params);
        if d <= 0.0 {
            1.0
        } else {
            (-d).exp()
        }
    }

    fn qudit_rate(&self, q: usize) -> f64 {
        let per_qudit = 1.0 / self.active.len() as f64;
        self.table.iter().map(|&((a, b), w)| per_qudit * w * self.acceptance(q, a, b)).sum()
    }

    /// Advances to the next accepted proposal and applies it. Returns the
    /// applied `(qudit, a, b)`, or `None` if no proposal can ever be
    /// accepted.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(usize, u8, u8)> {
        let total = self.rates.total().min(1.0);
        if total <= 0.0 {
            return None;
        }
        let rejected = if total >= 1.0 { 0 } else { Geometric::new(total).ok()?.sample(rng) };
        self.steps = self.steps.saturating_add(rejected).saturating_add(1);
        let k = self.rates.find(rng.gen::<f64>() * self.rates.total());
        let q = self.active[k];
        let weights: Vec<f64> = self.table.iter().map(|&((a, b), w)| w * self.acceptance(q, a, b)).collect();
        let sum: f64 = weights.iter().sum();
        let mut x = rng.gen::<f64>() * sum;
        let mut pick = weights.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if x < *w {
                pick = i;
                break;
            }
            x -= w;
        }
        let (a, b) = self.table[pick].0;
        let touched: Vec<usize> = charge_changes(self.code, q, a, b).map(|(gi, _)| gi).collect();
        self.frame.apply(self.code, q, a, b);
        for gi in touched {
            for &r in &self.code.generators()[gi].sites {
                let v = self.qudit_rate(r);
                self.rates.set(self.slot_of[r], v);
            }
        }
        Some((q, a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kagome::build;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn depolarizing_limits() {
        let c = build(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = apply_depolarizing(&c, 0.0, &mut rng);
        assert!(f.word().is_identity_word());
        assert!(f.charges().iter().all(|&x| x == 0));
        let f = apply_depolarizing(&c, 1.0, &mut rng);
        assert_eq!(f.history(), 2 * 48);
    }

    #[test]
    fn cached_charges_match_recomputation() {
        let c = build(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = apply_depolarizing(&c, 0.2, &mut rng);
        let g = ErrorFrame::from_word(&c, f.word().clone()).unwrap();
        assert_eq!(f.charges(), g.charges());
    }

    #[test]
    fn plaquette_energies() {
        assert_eq!((0..4).map(plaquette_energy).collect::<Vec<_>>(), vec![0, 1, 2, 1]);
    }

    #[test]
    fn ground_state_proposals() {
        let c = build(6).unwrap();
        let f = ErrorFrame::identity(&c);
        let q = c.qudit(2, 2, 1);
        // An X word excites the two triangles through q.
        assert_eq!(energy_change(&c, f.charges(), q, 0, 1), EnergyChange { m: 2, n: 0 });
        // X Z² additionally puts charge 2 on both hexagons.
        assert_eq!(energy_change(&c, f.charges(), q, 2, 1), EnergyChange { m: 2, n: 4 });
        assert_eq!(energy_change(&c, f.charges(), q, 1, 0), EnergyChange { m: 0, n: 2 });
    }

    #[test]
    fn pair_annihilation_is_downhill() {
        let c = build(6).unwrap();
        let mut f = ErrorFrame::identity(&c);
        let q = c.qudit(1, 3, 2);
        f.apply(&c, q, 0, 1);
        let e = energy_change(&c, f.charges(), q, 0, 3);
        assert_eq!(e, EnergyChange { m: -2, n: 0 });
        let p = ThermalParams::from_lambda(3.0).unwrap();
        assert!(e.in_kt(&p) <= 0.0);
    }

    #[test]
    fn thermal_params() {
        let p = ThermalParams::from_lambda(2.0).unwrap();
        assert_eq!((p.beta_energy_triangle, p.beta_energy_hexagon), (4.0, 2.0));
        assert!(ThermalParams::from_lambda(0.0).is_err());
        let (t, h) = ThermalParams::gaps_from_couplings(1.0, 0.5);
        assert_eq!(t, 2.0);
        assert!((h - 2.0 * 63.0 / 8.0 / 64.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn fenwick_find() {
        let f = Fenwick::new(vec![1.0, 0.0, 2.0, 3.0]);
        assert_eq!(f.find(0.5), 0);
        assert_eq!(f.find(1.5), 2);
        assert_eq!(f.find(3.5), 3);
        assert_eq!(f.total(), 6.0);
    }

    #[test]
    fn chain_tracks_charges() {
        let c = build(4).unwrap();
        let p = ThermalParams::from_lambda(1.0).unwrap();
        let mut chain = ThermalChain::new(&c, p);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            chain.advance(&mut rng).unwrap();
        }
        let g = ErrorFrame::from_word(&c, chain.frame().word().clone()).unwrap();
        assert_eq!(chain.frame().charges(), g.charges());
        assert!(chain.steps() >= 200);
    }

    #[test]
    fn site_noise_counts_qudits() {
        let c = build(8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(apply_site_depolarizing(&c, 1.0, &mut rng).history(), 3 * 64);
        assert!(apply_noise(&c, NoiseModel::Site, 0.0, &mut rng).word().is_identity_word());
        // Hit count over many sites is binomial(N, p).
        let (n, p) = (3 * 64 * 200, 0.05);
        let hits: u64 = (0..200).map(|_| apply_site_depolarizing(&c, p, &mut rng).history()).sum();
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - n as f64 * p).abs() < 4.0 * sd, "{hits}");
        assert_eq!("site".parse::<NoiseModel>().unwrap(), NoiseModel::Site);
        assert!("both".parse::<NoiseModel>().is_err());
    }

    #[test]
    fn reverse_move_reverses_energy() {
        let c = build(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = apply_depolarizing(&c, 0.3, &mut rng);
        for q in c.active_qudits() {
            for ((a, b), _) in proposal_table() {
                let fwd = energy_change(&c, f.charges(), q, a, b);
                let mut g = f.clone();
                g.apply(&c, q, a, b);
                let back = energy_change(&c, g.charges(), q, (4 - a) & 3, (4 - b) & 3);
                assert_eq!((fwd.m, fwd.n), (-back.m, -back.n));
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn energy_changes_are_even_and_bounded(seed in 0u64..10_000, p in 0.0f64..0.6) {
            let c = build(6).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = apply_depolarizing(&c, p, &mut rng);
            let q = c.active_qudits()[rng.gen_range(0..c.n_active_spins() / 2)];
            for ((a, b), _) in proposal_table() {
                let e = energy_change(&c, f.charges(), q, a, b);
                proptest::prop_assert!([-4, -2, 0, 2, 4].contains(&e.m), "m = {}", e.m);
                proptest::prop_assert!([-4, -2, 0, 2, 4].contains(&e.n), "n = {}", e.n);
            }
        }

        #[test]
        fn charges_are_conserved_per_sector(seed in 0u64..10_000, p in 0.0f64..1.0) {
            let c = build(6).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = apply_depolarizing(&c, p, &mut rng);
            let mut sums = [0u32; 2];
            for (g, &k) in c.generators().iter().zip(f.charges()) {
                sums[usize::from(g.species() == crate::kagome::Species::M)] += k as u32;
            }
            proptest::prop_assert_eq!(sums[0] % 4, 0);
            proptest::prop_assert_eq!(sums[1] % 4, 0);
        }
    }
}
