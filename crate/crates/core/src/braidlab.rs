//! Logical gates of the parafermion qudit, anyon bookkeeping and the
//! microscopic exchange computation.
//!
//! Logical basis: `|g⟩` is a ψ_g occupancy of a vertical pair, `X|g⟩ = |g+1⟩`,
//! `Z|g⟩ = ω^g|g⟩`. Two-qudit states `|g,h⟩` sit at index `4g + h`.

use crate::z4algebra::{commutation_exponent, multiply, projector_sandwich, PhasedPauli, SectorValue};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_4;
use std::fmt;

type CMat = DMatrix<Complex64>;

/// Identity tolerance for dense gate checks.
pub const TOLERANCE: f64 = 1e-12;

fn zeta(k: i64) -> Complex64 {
    Complex64::from_polar(1.0, FRAC_PI_4 * k.rem_euclid(8) as f64)
}

#[derive(Debug, Clone)]
pub struct LogicalGate {
    pub name: String,
    pub matrix: CMat,
}

impl LogicalGate {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.dim();
        (self.matrix.adjoint() * &self.matrix - CMat::identity(n, n)).norm() < tol
    }
}

fn diag(entries: impl Iterator<Item = Complex64>) -> CMat {
    let v: Vec<Complex64> = entries.collect();
    CMat::from_diagonal(&nalgebra::DVector::from_vec(v))
}

fn x_matrix() -> CMat {
    CMat::from_fn(4, 4, |r, c| if r == (c + 1) % 4 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

fn z_matrix() -> CMat {
    diag((0..4).map(|g| zeta(2 * g)))
}

fn s_matrix() -> CMat {
    diag((0..4).map(|g| zeta(g * g)))
}

/// Exchange of a horizontal pair: `½ e^{iπ/4} Σ e^{−iπ(g−h)²/4} |g⟩⟨h|`.
/// This sign of the exponent is the one for which `STS = TST` holds.
fn t_matrix() -> CMat {
    CMat::from_fn(4, 4, |g, h| {
        let d = g as i64 - h as i64;
        zeta(1 - d * d) * 0.5
    })
}

fn h_matrix() -> CMat {
    CMat::from_fn(4, 4, |g, h| zeta(2 * (g * h) as i64) * 0.5)
}

fn lambda_matrix(power: i64) -> CMat {
    diag((0..16).map(|i| zeta(2 * power * ((i / 4) * (i % 4)) as i64)))
}

/// Logical gate by name: X, Z, S, T, H, Λ (or `Lambda`, `CZ`), Λ² (or `Lambda2`).
pub fn gate_matrix(name: &str) -> Result<LogicalGate> {
    let matrix = match name {
        "X" => x_matrix(),
        "Z" => z_matrix(),
        "S" => s_matrix(),
        "T" => t_matrix(),
        "H" => h_matrix(),
        "Λ" | "Lambda" | "CZ" => lambda_matrix(1),
        "Λ²" | "Λ2" | "Lambda2" => lambda_matrix(2),
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    Ok(LogicalGate { name: name.to_string(), matrix })
}

/// Outcome of one identity check.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual < TOLERANCE
    }
}

impl fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{tag} {} residual={:.3e}", self.name, self.residual)
    }
}

fn pow(m: &CMat, k: u32) -> CMat {
    let mut acc = CMat::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        acc = &acc * m;
    }
    acc
}

/// Dense gate identities, each reported with its Frobenius residual.
pub fn verify_identities() -> Vec<IdentityCheck> {
    let get = |n: &str| gate_matrix(n).expect("library gate").matrix;
    let (x, z, s, t, h) = (get("X"), get("Z"), get("S"), get("T"), get("H"));
    let id4 = CMat::identity(4, 4);
    let sts = &s * &t * &s;
    let tst = &t * &s * &t;
    let sqrt_omega = zeta(1);
    let ht = sts.clone();
    let ht_dag = ht.adjoint();
    let mut out = vec![
        IdentityCheck { name: "STS = TST", residual: (&sts - &tst).norm() },
        IdentityCheck { name: "STS = sqrt(i) H", residual: (&sts - &h * sqrt_omega).norm() },
        IdentityCheck { name: "sqrt(w) H = H~", residual: (&h * sqrt_omega - &ht).norm() },
        IdentityCheck { name: "H~ X H~^dag = Z", residual: (&ht * &x * &ht_dag - &z).norm() },
        IdentityCheck { name: "H~ Z H~^dag = X^dag", residual: (&ht * &z * &ht_dag - x.adjoint()).norm() },
        IdentityCheck { name: "S^8 = 1", residual: (pow(&s, 8) - &id4).norm() },
        IdentityCheck { name: "T^8 = 1", residual: (pow(&t, 8) - &id4).norm() },
        IdentityCheck { name: "S X S^dag = sqrt(w) X Z", residual: (&s * &x * s.adjoint() - &x * &z * sqrt_omega).norm() },
        IdentityCheck { name: "T Z T^dag = sqrt(w) Z X^dag", residual: (&t * &z * t.adjoint() - &z * x.adjoint() * sqrt_omega).norm() },
    ];
    // T is diagonal in the eigenbasis of X.
    let tx = h.adjoint() * &t * &h;
    let off: f64 = (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).filter(|(r, c)| r != c).map(|(r, c)| tx[(r, c)].norm_sqr()).sum();
    out.push(IdentityCheck { name: "T diagonal in X basis", residual: off.sqrt() });

    let lambda = get("Λ");
    let holes = diag((0..16).map(|i| zeta(hole_braid_controlled_phase(i / 4, i % 4) as i64)));
    out.push(IdentityCheck { name: "hole braid = Lambda", residual: (&holes - &lambda).norm() });
    let pair = diag((0..16).map(|i| zeta(pair_braid_phase(i / 4, i % 4) as i64)));
    out.push(IdentityCheck { name: "pair braid = Lambda^2", residual: (&pair - get("Λ²")).norm() });
    out.push(IdentityCheck { name: "Lambda^2 = Lambda.Lambda", residual: (&lambda * &lambda - get("Λ²")).norm() });

    let mut unit = 0.0f64;
    for n in ["X", "Z", "S", "T", "H", "Λ", "Λ²"] {
        let m = get(n);
        let k = m.nrows();
        unit = unit.max((m.adjoint() * &m - CMat::identity(k, k)).norm());
    }
    out.push(IdentityCheck { name: "library gates unitary", residual: unit });
    out
}

/// Anyon species of D(ℤ₄) in the two decompositions used by the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    E,
    M,
    Psi,
    R,
}

impl std::str::FromStr for Species {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "E" => Ok(Species::E),
            "m" | "M" => Ok(Species::M),
            "psi" | "ψ" => Ok(Species::Psi),
            "r" | "R" => Ok(Species::R),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

/// A D(ℤ₄) anyon `e_charge × m_flux`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Anyon {
    pub charge: u8,
    pub flux: u8,
}

impl Anyon {
    /// `ψ_g = e_g m_g`; `r_g` braids trivially with itself and as `ω^{gh}`
    /// with ψ_h, which fixes it to `m_g`.
    pub fn new(species: Species, g: u8) -> Anyon {
        let g = g & 3;
        match species {
            Species::E => Anyon { charge: g, flux: 0 },
            Species::M | Species::R => Anyon { charge: 0, flux: g },
            Species::Psi => Anyon { charge: g, flux: g },
        }
    }

    pub fn fuse(self, other: Anyon) -> Anyon {
        Anyon { charge: (self.charge + other.charge) & 3, flux: (self.flux + other.flux) & 3 }
    }

    /// Passing a defect line maps `m_g → e_{−g}` and `e_g → m_{−g}`.
    pub fn cross_defect_line(self) -> Anyon {
        Anyon { charge: (4 - self.flux) & 3, flux: (4 - self.charge) & 3 }
    }

    /// ζ₈ exponent of a full clockwise monodromy of `self` around `other`.
    pub fn monodromy(self, other: Anyon) -> u8 {
        let s = self.charge as u32 * other.flux as u32 + self.flux as u32 * other.charge as u32;
        ((2 * s) % 8) as u8
    }
}

/// ζ₈ exponent of the monodromy of `a_g` around `b_h`.
pub fn monodromy_phase(a: Species, g: u8, b: Species, h: u8) -> u8 {
    Anyon::new(a, g).monodromy(Anyon::new(b, h))
}

/// Charge hole holding `e_g` taken around a defect line holding `ψ_h`.
pub fn hole_braid_controlled_phase(g: usize, h: usize) -> u8 {
    monodromy_phase(Species::E, g as u8, Species::Psi, h as u8)
}

/// Vertical pair holding `ψ_g` taken around a pair holding `ψ_h`.
pub fn pair_braid_phase(g: usize, h: usize) -> u8 {
    monodromy_phase(Species::Psi, g as u8, Species::Psi, h as u8)
}

/// Parafermion anyon labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FusionLabel {
    Psi(u8),
    Sigma,
}

impl FusionLabel {
    pub fn fuse(self, other: FusionLabel) -> BTreeSet<FusionLabel> {
        match (self, other) {
            (FusionLabel::Psi(g), FusionLabel::Psi(h)) => BTreeSet::from([FusionLabel::Psi((g + h) & 3)]),
            (FusionLabel::Sigma, FusionLabel::Sigma) => (0..4).map(FusionLabel::Psi).collect(),
            _ => BTreeSet::from([FusionLabel::Sigma]),
        }
    }
}

/// A collection of anyons with the set of total fusion channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionState {
    pub labels: Vec<FusionLabel>,
}

impl FusionState {
    pub fn new(labels: Vec<FusionLabel>) -> Self {
        FusionState { labels }
    }

    /// All channels reachable by fusing left to right.
    pub fn channels(&self) -> BTreeSet<FusionLabel> {
        let mut acc = BTreeSet::from([FusionLabel::Psi(0)]);
        for &l in &self.labels {
            acc = acc.iter().flat_map(|&a| a.fuse(l)).collect();
        }
        acc
    }

    /// Net ψ charge when no σ is present.
    pub fn psi_charge(&self) -> Option<u8> {
        self.labels.iter().try_fold(0u8, |acc, l| match l {
            FusionLabel::Psi(g) => Some((acc + g) & 3),
            FusionLabel::Sigma => None,
        })
    }
}

/// Three-qudit cluster for the exchange of two parafermions: `Γ` measures the
/// pair occupancy, `Π` and `Φ` move a mode, `S_G` is the pentagon term next
/// to the pair. Phase parameters a, b, c fix the freedom in Γ, Π, Φ.
#[derive(Debug, Clone)]
pub struct ExchangeSpec {
    pub a: u8,
    pub b: u8,
    pub c: u8,
    pub gamma: PhasedPauli,
    pub pi: PhasedPauli,
    pub phi: PhasedPauli,
    pub s_g: PhasedPauli,
}

fn product(n: usize, phase: i64, factors: &[(usize, u8, u8)]) -> PhasedPauli {
    factors.iter().fold(PhasedPauli::identity(n).with_phase(phase), |acc, &(q, a, b)| {
        multiply(&acc, &PhasedPauli::single(n, q, a, b)).expect("equal lengths")
    })
}

impl ExchangeSpec {
    /// `Γ = ω^{(1+2a)/2} Z₁X₂†Z₂Z₃`, `Π = ω^{(1+2b)/2} X₁X₂†Z₂Z₃`,
    /// `Φ = ω^{(1+2c)/2} X₁†Z₁`, `S_G = Z₁†`.
    pub fn new(a: u8, b: u8, c: u8) -> ExchangeSpec {
        let ph = |k: u8| 1 + 2 * (k & 3) as i64;
        ExchangeSpec {
            a: a & 3,
            b: b & 3,
            c: c & 3,
            gamma: product(3, ph(a), &[(0, 1, 0), (1, 0, 3), (1, 1, 0), (2, 1, 0)]),
            pi: product(3, ph(b), &[(0, 0, 1), (1, 0, 3), (1, 1, 0), (2, 1, 0)]),
            phi: product(3, ph(c), &[(0, 0, 3), (0, 1, 0)]),
            s_g: PhasedPauli::single(3, 0, 3, 0),
        }
    }

    /// Checks the algebra the exchange relies on.
    pub fn validate(&self) -> Result<()> {
        for (name, op) in [("Γ", &self.gamma), ("Π", &self.pi), ("Φ", &self.phi), ("S_G", &self.s_g)] {
            if !op.pow(4).is_identity_word() {
                return Err(Error::InvalidArgument(format!("{name}^4 is not a pure phase")));
            }
        }
        let expect = [
            ("(Γ,Π)", commutation_exponent(&self.gamma, &self.pi)?, 1),
            ("(Γ,Φ)", commutation_exponent(&self.gamma, &self.phi)?, 3),
            ("(Π,Φ)", commutation_exponent(&self.pi, &self.phi)?, 3),
            ("(Γ,S_G)", commutation_exponent(&self.gamma, &self.s_g)?, 0),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(Error::InvalidArgument(format!("{name} = {got}, expected {want}")));
            }
        }
        Ok(())
    }
}

/// Per-sector result of the exchange: the sandwich restricted to the sector
/// holding ψ_g equals `magnitude · ζ₈^{exp8[g]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangePhases {
    pub exp8: [u8; 4],
    pub magnitude: Ratio<i64>,
}

impl ExchangePhases {
    /// Phases relative to the ψ₀ sector.
    pub fn relative(&self) -> [u8; 4] {
        self.exp8.map(|e| (e + 8 - self.exp8[0]) % 8)
    }
}

/// Evaluates `P_G P_Φ P_Π P_G` on the sectors of the pair occupancy. A ψ_g
/// occupancy is the `ω^{−g}` eigenspace of Γ, i.e. the `ω^g` sector of Γ†.
pub fn exchange_effect(spec: &ExchangeSpec) -> Result<ExchangePhases> {
    spec.validate()?;
    let seq = [(spec.s_g.clone(), 0), (spec.phi.clone(), 0), (spec.pi.clone(), 0), (spec.s_g.clone(), 0)];
    let sectors = projector_sandwich(&seq, &spec.gamma.inverse())?;
    let mut exp8 = [0u8; 4];
    let mut magnitude = None;
    for (g, s) in sectors.iter().enumerate() {
        match s {
            SectorValue::Annihilated => {
                return Err(Error::Projector(format!("sector ψ_{g} annihilated; S_G does not fit the cluster")));
            }
            SectorValue::Phase { exp8: e, magnitude: m } => {
                exp8[g] = *e;
                match magnitude {
                    None => magnitude = Some(*m),
                    Some(prev) if prev != *m => {
                        return Err(Error::Projector("sector magnitudes differ; the exchange is not a pure phase".into()));
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(ExchangePhases { exp8, magnitude: magnitude.expect("four sectors") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_entries() {
        let s = gate_matrix("S").unwrap().matrix;
        let want = [zeta(0), zeta(1), Complex64::new(-1.0, 0.0), zeta(1)];
        for g in 0..4 {
            assert!((s[(g, g)] - want[g]).norm() < 1e-15);
        }
    }

    #[test]
    fn lambda_on_basis_state() {
        let l = gate_matrix("Λ").unwrap().matrix;
        assert!((l[(4 * 2 + 3, 4 * 2 + 3)] + Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(gate_matrix("Q").is_err());
    }

    #[test]
    fn all_identities_hold() {
        for c in verify_identities() {
            assert!(c.passed(), "{c}");
        }
    }

    #[test]
    fn logical_paulis_act_on_occupancies() {
        let x = gate_matrix("X").unwrap().matrix;
        let z = gate_matrix("Z").unwrap().matrix;
        for g in 0..4 {
            assert_eq!(x[((g + 1) % 4, g)], Complex64::new(1.0, 0.0));
            assert!((z[(g, g)] - zeta(2 * g as i64)).norm() < 1e-15);
        }
    }

    #[test]
    fn monodromies() {
        assert_eq!(monodromy_phase(Species::E, 1, Species::M, 1), 2);
        assert_eq!(monodromy_phase(Species::R, 2, Species::R, 3), 0);
        assert_eq!(monodromy_phase(Species::Psi, 1, Species::Psi, 1), 4);
        for g in 0..4 {
            for h in 0..4 {
                assert_eq!(monodromy_phase(Species::Psi, g, Species::R, h), (2 * g * h) % 8);
                assert_eq!(monodromy_phase(Species::E, g, Species::E, h), 0);
            }
        }
    }

    #[test]
    fn defect_line_converts_species() {
        assert_eq!(Anyon::new(Species::M, 1).cross_defect_line(), Anyon::new(Species::E, 3));
        assert_eq!(Anyon::new(Species::E, 3).cross_defect_line(), Anyon::new(Species::M, 1));
        // An r_g passing the line emits ψ_{−g}.
        let r = Anyon::new(Species::R, 1);
        assert_eq!(r.fuse(Anyon::new(Species::Psi, 3)), r.cross_defect_line());
        // Crossing preserves braiding.
        let (a, b) = (Anyon { charge: 1, flux: 2 }, Anyon { charge: 3, flux: 1 });
        assert_eq!(a.monodromy(b), a.cross_defect_line().monodromy(b.cross_defect_line()));
    }

    #[test]
    fn hole_braid_table() {
        for h in 0..4 {
            assert_eq!(hole_braid_controlled_phase(0, h), 0);
        }
        assert_eq!(hole_braid_controlled_phase(1, 1), 2);
    }

    #[test]
    fn fusion_rules() {
        use FusionLabel::*;
        assert_eq!(Psi(3).fuse(Psi(2)), BTreeSet::from([Psi(1)]));
        assert_eq!(Sigma.fuse(Sigma).len(), 4);
        assert_eq!(Psi(1).fuse(Sigma), BTreeSet::from([Sigma]));
        let st = FusionState::new(vec![Sigma, Sigma, Sigma, Sigma]);
        assert_eq!(st.channels(), (0..4).map(Psi).collect());
        assert_eq!(FusionState::new(vec![Psi(1), Psi(2), Psi(3)]).psi_charge(), Some(2));
    }

    #[test]
    fn cluster_algebra() {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    ExchangeSpec::new(a, b, c).validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn exchange_with_symmetric_conventions() {
        let r = exchange_effect(&ExchangeSpec::new(2, 2, 2)).unwrap();
        // ω^{g²/2} ω^{g(g+1)} as ζ₈ exponents.
        let want: [u8; 4] = std::array::from_fn(|g| ((g * g + 2 * g * (g + 1)) % 8) as u8);
        assert_eq!(want, [0, 5, 0, 1]);
        assert_eq!(r.exp8, want);
        assert_eq!(r.magnitude, Ratio::new(1, 8));
    }

    #[test]
    fn exchange_with_a_one() {
        let r = exchange_effect(&ExchangeSpec::new(1, 2, 2)).unwrap();
        let want: [u8; 4] = std::array::from_fn(|g| ((1 + 8 * 2 - g * g) % 8) as u8);
        assert_eq!(r.exp8, want);
    }

    #[test]
    fn squared_exchange_matches_monodromy_up_to_gamma_squared() {
        for (a, b, c) in [(2, 2, 2), (1, 2, 2), (0, 1, 3), (3, 0, 2)] {
            let Ok(r) = exchange_effect(&ExchangeSpec::new(a, b, c)) else { continue };
            let rel = r.relative();
            // (phase)² / ω^{g²} is either 1 or ω^{2g} for all g.
            let ratio: Vec<u8> = (0..4).map(|g| ((2 * rel[g] as usize + 16 - 2 * g * g) % 8) as u8).collect();
            let trivial = ratio.iter().all(|&e| e == 0);
            let gamma_sq = (0..4).all(|g| ratio[g] as usize == (4 * g) % 8);
            assert!(trivial || gamma_sq, "a={a} b={b} c={c}: {ratio:?}");
        }
    }
}
