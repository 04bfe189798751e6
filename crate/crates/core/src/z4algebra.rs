//! Phased generalized Pauli words over ℤ₄.
//!
//! A word is `e^{iπk/4} ⊗_q Z_q^{a_q} X_q^{b_q}` with k ∈ ℤ₈ and a, b ∈ ℤ₄.
//! Relations: `ZX = ωXZ` with ω = i, so `X^b Z^c = ω^{-bc} Z^c X^b`.
//! Dense convention: `Z|j⟩ = ω^j|j⟩`, `X|j⟩ = |j+1 mod 4⟩`, qudit 0 most significant.

use crate::cyclo::Cyclo8;
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::Rng;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    phase: u8,
    z: Vec<u8>,
    x: Vec<u8>,
}

impl PhasedPauli {
    pub fn identity(n: usize) -> Self {
        PhasedPauli { phase: 0, z: vec![0; n], x: vec![0; n] }
    }

    /// Builds a word from raw exponents; all entries are reduced.
    pub fn new(phase: i64, z: Vec<u8>, x: Vec<u8>) -> Result<Self> {
        if z.len() != x.len() {
            return Err(Error::LengthMismatch(z.len(), x.len()));
        }
        Ok(PhasedPauli {
            phase: phase.rem_euclid(8) as u8,
            z: z.into_iter().map(|v| v & 3).collect(),
            x: x.into_iter().map(|v| v & 3).collect(),
        })
    }

    /// `Z_q^a X_q^b` on an `n`-qudit register.
    pub fn single(n: usize, q: usize, a: u8, b: u8) -> Self {
        let mut p = Self::identity(n);
        p.z[q] = a & 3;
        p.x[q] = b & 3;
        p
    }

    pub fn z(n: usize, q: usize) -> Self {
        Self::single(n, q, 1, 0)
    }

    pub fn x(n: usize, q: usize) -> Self {
        Self::single(n, q, 0, 1)
    }

    /// `Y = ω^{5/2} X†Z†`, which is `ζ₈³ Z³X³` in canonical order.
    pub fn y(n: usize, q: usize) -> Self {
        Self::single(n, q, 3, 3).with_phase(3)
    }

    /// Product of single-qudit factors `(q, a, b)` with phase `ζ₈^phase`.
    /// Qudits must be distinct.
    pub fn from_sparse(n: usize, phase: i64, factors: &[(usize, u8, u8)]) -> Self {
        let mut p = Self::identity(n);
        for &(q, a, b) in factors {
            debug_assert!(p.z[q] == 0 && p.x[q] == 0, "repeated qudit {q}");
            p.z[q] = a & 3;
            p.x[q] = b & 3;
        }
        p.phase = phase.rem_euclid(8) as u8;
        p
    }

    pub fn with_phase(mut self, phase: i64) -> Self {
        self.phase = phase.rem_euclid(8) as u8;
        self
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    /// Phase exponent when each factor is written in the order `X^b Z^a`.
    pub fn phase_exp_x_first(&self) -> u8 {
        let s: u32 = self.z.iter().zip(&self.x).map(|(&a, &b)| (a as u32) * (b as u32)).sum();
        ((self.phase as u32 + 2 * s) % 8) as u8
    }

    pub fn z_exps(&self) -> &[u8] {
        &self.z
    }

    pub fn x_exps(&self) -> &[u8] {
        &self.x
    }

    pub fn local(&self, q: usize) -> (u8, u8) {
        (self.z[q], self.x[q])
    }

    /// True when the word part is the identity, whatever the phase.
    pub fn is_identity_word(&self) -> bool {
        self.z.iter().all(|&v| v == 0) && self.x.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.is_identity_word()
    }

    pub fn weight(&self) -> usize {
        self.z.iter().zip(&self.x).filter(|(&a, &b)| a != 0 || b != 0).count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&q| self.z[q] != 0 || self.x[q] != 0).collect()
    }

    /// Same word with phase 0.
    pub fn word(&self) -> PhasedPauli {
        PhasedPauli { phase: 0, z: self.z.clone(), x: self.x.clone() }
    }

    /// `self ← self · Z_q^a X_q^b`.
    pub fn mul_right_local(&mut self, q: usize, a: u8, b: u8) {
        let bc = (self.x[q] as u32) * (a as u32 & 3);
        self.phase = ((self.phase as u32 + 8 * 4 - 2 * bc) % 8) as u8;
        self.z[q] = (self.z[q] + a) & 3;
        self.x[q] = (self.x[q] + b) & 3;
    }

    /// `self ← Z_q^a X_q^b · self`.
    pub fn mul_left_local(&mut self, q: usize, a: u8, b: u8) {
        let da = (b as u32 & 3) * (self.z[q] as u32);
        self.phase = ((self.phase as u32 + 8 * 4 - 2 * da) % 8) as u8;
        self.z[q] = (self.z[q] + a) & 3;
        self.x[q] = (self.x[q] + b) & 3;
    }

    pub fn mul(&self, other: &PhasedPauli) -> Result<PhasedPauli> {
        multiply(self, other)
    }

    pub fn pow(&self, k: u32) -> PhasedPauli {
        let mut acc = PhasedPauli::identity(self.len());
        for _ in 0..(k % 8) {
            acc = multiply(&acc, self).expect("equal lengths");
        }
        acc
    }

    /// `P⁻¹`: per qudit `(Z^aX^b)⁻¹ = ω^{-ab} Z^{-a}X^{-b}`.
    pub fn inverse(&self) -> PhasedPauli {
        let s: i64 = self.z.iter().zip(&self.x).map(|(&a, &b)| (a as i64) * (b as i64)).sum();
        PhasedPauli {
            phase: (-(self.phase as i64) - 2 * s).rem_euclid(8) as u8,
            z: self.z.iter().map(|&a| (4 - a) & 3).collect(),
            x: self.x.iter().map(|&b| (4 - b) & 3).collect(),
        }
    }

    /// Symplectic form restricted to `sites`; equals the full form when
    /// `sites` covers the support of either operand.
    pub fn commutation_on(&self, other: &PhasedPauli, sites: &[usize]) -> u8 {
        let mut s = 0u32;
        for &q in sites {
            s += 4 * 4 + (self.z[q] as u32) * (other.x[q] as u32) - (self.x[q] as u32) * (other.z[q] as u32);
        }
        (s % 4) as u8
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PhasedPauli) -> PhasedPauli {
        let mut z = self.z.clone();
        z.extend_from_slice(&other.z);
        let mut x = self.x.clone();
        x.extend_from_slice(&other.x);
        PhasedPauli { phase: (self.phase + other.phase) % 8, z, x }
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z8^{}", self.phase)?;
        for q in 0..self.len() {
            let (a, b) = (self.z[q], self.x[q]);
            if a != 0 || b != 0 {
                write!(f, " [{q}]")?;
                if a != 0 {
                    write!(f, "Z{a}")?;
                }
                if b != 0 {
                    write!(f, "X{b}")?;
                }
            }
        }
        Ok(())
    }
}

fn check_len(p: &PhasedPauli, q: &PhasedPauli) -> Result<()> {
    if p.len() != q.len() {
        Err(Error::LengthMismatch(p.len(), q.len()))
    } else {
        Ok(())
    }
}

/// Canonical product `p·q`; the reordering phase is `ω^{-Σ b_i c_i}`.
pub fn multiply(p: &PhasedPauli, q: &PhasedPauli) -> Result<PhasedPauli> {
    check_len(p, q)?;
    let mut phase = p.phase as u32 + q.phase as u32;
    let mut z = Vec::with_capacity(p.len());
    let mut x = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let bc = (p.x[i] as u32) * (q.z[i] as u32);
        phase += 8 * 4 - 2 * bc;
        z.push((p.z[i] + q.z[i]) & 3);
        x.push((p.x[i] + q.x[i]) & 3);
    }
    Ok(PhasedPauli { phase: (phase % 8) as u8, z, x })
}

/// `(P,Q) = Σ a_i d_i − b_i c_i mod 4`, so that `PQ = ω^{(P,Q)} QP`.
pub fn commutation_exponent(p: &PhasedPauli, q: &PhasedPauli) -> Result<u8> {
    check_len(p, q)?;
    let all: Vec<usize> = (0..p.len()).collect();
    Ok(p.commutation_on(q, &all))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

/// A single-qubit Pauli on qubit `slot` (1 or 2) of a qudit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitPauliEvent {
    pub slot: u8,
    pub axis: Axis,
}

/// Qudit words `(a, b)` meaning `Z^a X^b` that a qubit Pauli converts to after
/// a syndrome measurement, each with probability ¼ (½ for σᶻ). Both qubit
/// slots share the same row.
pub fn conversion_row(axis: Axis) -> &'static [(u8, u8)] {
    match axis {
        // X, X†, XZ², X†Z²
        Axis::X => &[(0, 1), (0, 3), (2, 1), (2, 3)],
        // XZ, X†Z, XZ†, X†Z†
        Axis::Y => &[(1, 1), (1, 3), (3, 1), (3, 3)],
        // Z, Z†
        Axis::Z => &[(1, 0), (3, 0)],
    }
}

/// Draws one conversion entry uniformly; the result is a one-qudit word with phase 0.
pub fn qubit_pauli_to_qudit<R: Rng + ?Sized>(e: QubitPauliEvent, rng: &mut R) -> PhasedPauli {
    debug_assert!(e.slot == 1 || e.slot == 2);
    let row = conversion_row(e.axis);
    let (a, b) = row[rng.gen_range(0..row.len())];
    PhasedPauli::single(1, 0, a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParafermionOp {
    pub index: usize,
    pub rep: PhasedPauli,
}

/// `γ_{2i−1} = (Π_{j<i} X_j) Z_i` and `γ_{2i} = ω^{5/2} (Π_{j≤i} X_j) Z_i`,
/// with 1-based `i`. The even case has canonical phase 3 (5 in `X^bZ^a` order).
pub fn parafermion_transform(i: usize, which: Parity, n: usize) -> Result<ParafermionOp> {
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let q = i - 1;
    let mut rep = PhasedPauli::identity(n);
    for j in 0..q {
        rep.x[j] = 1;
    }
    match which {
        Parity::Odd => {
            rep.z[q] = 1;
            Ok(ParafermionOp { index: 2 * i - 1, rep })
        }
        Parity::Even => {
            // ζ⁵ · X Z = ζ⁵ · ω⁻¹ Z X
            rep.z[q] = 1;
            rep.x[q] = 1;
            rep.phase = 3;
            Ok(ParafermionOp { index: 2 * i, rep })
        }
    }
}

/// `γ_j` for 1-based `j ≤ 2n`.
pub fn parafermion(j: usize, n: usize) -> Result<ParafermionOp> {
    if j == 0 {
        return Err(Error::IndexOutOfRange { index: j, len: 2 * n });
    }
    let which = if j % 2 == 1 { Parity::Odd } else { Parity::Even };
    parafermion_transform(j.div_ceil(2), which, n).map_err(|_| Error::IndexOutOfRange { index: j, len: 2 * n })
}

pub const MAX_DENSE_QUDITS: usize = 6;

fn zeta_c(k: u32) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * (k % 8) as f64)
}

/// Dense `4^n × 4^n` matrix of a word.
pub fn dense_matrix(p: &PhasedPauli) -> Result<DMatrix<Complex64>> {
    let n = p.len();
    if n > MAX_DENSE_QUDITS {
        return Err(Error::RegisterTooLarge(n));
    }
    let dim = 1usize << (2 * n);
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut row = 0usize;
        let mut ph = p.phase as u32;
        for q in 0..n {
            let shift = 2 * (n - 1 - q);
            let j = ((col >> shift) & 3) as u32;
            let jj = (j + p.x[q] as u32) % 4;
            ph += 2 * (p.z[q] as u32) * jj;
            row |= (jj as usize) << shift;
        }
        m[(row, col)] = zeta_c(ph);
    }
    Ok(m)
}

/// Two-qubit realizations of X, Y, Z as 4×4 matrices, qubit 1 ⊗ qubit 2.
pub fn qubit_pair_operators() -> [DMatrix<Complex64>; 3] {
    let (s1x, s1y, s1z, s2x, s2y, s2z) = qubit_paulis();
    let i = Complex64::i();
    let half = Complex64::new(0.5, 0.0);
    let x = (&s1x + &s2x - (&s1z * &s2y) * i + (&s1y * &s2z) * i) * half;
    let y = (&s1y + &s2y * i + (&s1x * &s2z) * i + &s1z * &s2x) * (half * Complex64::from_polar(1.0, 3.0 * std::f64::consts::FRAC_PI_4));
    let z = (&s1z - &s2z * i) * Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_PI_4);
    [x, y, z]
}

type M4 = DMatrix<Complex64>;

/// σˣ, σʸ, σᶻ on qubit 1 then qubit 2, embedded in the 4-dimensional pair space.
pub fn qubit_paulis() -> (M4, M4, M4, M4, M4, M4) {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let sx = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
    let sy = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
    let sz = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    let id = DMatrix::<Complex64>::identity(2, 2);
    (
        sx.kronecker(&id),
        sy.kronecker(&id),
        sz.kronecker(&id),
        id.kronecker(&sx),
        id.kronecker(&sy),
        id.kronecker(&sz),
    )
}

/// Restriction of a projector product to one sector of the reference operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SectorValue {
    Annihilated,
    /// `magnitude · ζ₈^exp8`.
    Phase { exp8: u8, magnitude: Ratio<i64> },
}

fn is_order_four(a: &PhasedPauli) -> bool {
    a.pow(4).is_identity()
}

/// Expands `Π_i P_{A_i}^{(k_i)}` with `P_A^{(k)} = ¼ Σ_m ω^{-km} A^m`, reduces
/// the terms exactly and returns, for each g ∈ ℤ₄, the value of the product on
/// the joint sector `Γ = ω^g`, `B = ω^{k_first}` where `B` is the boundary
/// operator shared by the first and last entries.
pub fn projector_sandwich(seq: &[(PhasedPauli, u8)], gamma: &PhasedPauli) -> Result<[SectorValue; 4]> {
    let first = seq.first().ok_or_else(|| Error::Projector("empty sequence".into()))?;
    let last = seq.last().expect("nonempty");
    let n = gamma.len();
    for (a, _) in seq {
        check_len(a, gamma)?;
        if !is_order_four(a) {
            return Err(Error::Projector(format!("operator {a} does not satisfy A^4 = 1")));
        }
    }
    if !is_order_four(gamma) {
        return Err(Error::Projector("reference operator does not satisfy Γ^4 = 1".into()));
    }
    if first.0 != last.0 {
        return Err(Error::Projector("first and last projectors must share one operator".into()));
    }
    if commutation_exponent(gamma, &first.0)? != 0 {
        return Err(Error::Projector("reference operator does not commute with the boundary projectors".into()));
    }
    let boundary = &first.0;
    let kb = first.1 as i64;

    let powers: Vec<[PhasedPauli; 4]> = seq
        .iter()
        .map(|(a, _)| [a.pow(0), a.pow(1), a.pow(2), a.pow(3)])
        .collect();
    let mut terms: HashMap<PhasedPauli, Cyclo8> = HashMap::new();
    let len = seq.len();
    for code in 0..(1usize << (2 * len)) {
        let mut w = PhasedPauli::identity(n);
        let mut e = 0i64;
        for (i, (_, k)) in seq.iter().enumerate() {
            let m = (code >> (2 * i)) & 3;
            w = multiply(&w, &powers[i][m])?;
            e -= 2 * (*k as i64) * m as i64;
        }
        e += w.phase as i64;
        *terms.entry(w.word()).or_insert(Cyclo8::ZERO) += Cyclo8::zeta(e);
    }

    let mut basis = Vec::with_capacity(16);
    for m in 0..4u32 {
        for nb in 0..4u32 {
            basis.push((m as i64, nb as i64, multiply(&gamma.pow(m), &boundary.pow(nb))?));
        }
    }
    let mut sectors = [Cyclo8::ZERO; 4];
    let mut keys: Vec<_> = terms.iter().filter(|(_, c)| !c.is_zero()).collect();
    keys.sort_by(|a, b| (a.0.z_exps(), a.0.x_exps()).cmp(&(b.0.z_exps(), b.0.x_exps())));
    for (word, coeff) in keys {
        let (m, nb, rep) = basis
            .iter()
            .find(|(_, _, r)| r.z_exps() == word.z_exps() && r.x_exps() == word.x_exps())
            .ok_or_else(|| Error::Projector(format!("surviving word {word} lies outside the algebra of Γ and the boundary operator")))?;
        for (g, s) in sectors.iter_mut().enumerate() {
            let e = -(rep.phase as i64) + 2 * (g as i64) * m + 2 * kb * nb;
            *s += *coeff * Cyclo8::zeta(e);
        }
    }
    let denom = 1i64 << (2 * len);
    let mut out = [SectorValue::Annihilated, SectorValue::Annihilated, SectorValue::Annihilated, SectorValue::Annihilated];
    for g in 0..4 {
        if sectors[g].is_zero() {
            continue;
        }
        let (num, exp8) = sectors[g]
            .as_monomial()
            .ok_or_else(|| Error::Projector(format!("sector {g} value is not a phase times a rational")))?;
        out[g] = SectorValue::Phase { exp8, magnitude: Ratio::new(num, denom) };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
        (a - b).norm() < 1e-10
    }

    #[test]
    fn defining_relation() {
        let z = PhasedPauli::z(1, 0);
        let x = PhasedPauli::x(1, 0);
        let zx = multiply(&z, &x).unwrap();
        assert_eq!(zx.phase_exp(), 0);
        assert_eq!(zx.local(0), (1, 1));
        let xz = multiply(&x, &z).unwrap();
        assert_eq!(xz.phase_exp(), 6);
        assert_eq!(xz.local(0), (1, 1));
        assert!(zx.pow(8).is_identity());
    }

    #[test]
    fn commutation_examples() {
        let z = PhasedPauli::z(1, 0);
        let x = PhasedPauli::x(1, 0);
        let y = PhasedPauli::y(1, 0);
        assert_eq!(commutation_exponent(&z, &x).unwrap(), 1);
        assert_eq!(commutation_exponent(&y, &z).unwrap(), 1);
        assert_eq!(commutation_exponent(&x, &y).unwrap(), 1);
        let p = PhasedPauli::from_sparse(2, 0, &[(0, 1, 1), (1, 1, 1)]);
        let q = PhasedPauli::from_sparse(2, 0, &[(0, 1, 1), (1, 3, 3)]);
        assert_eq!(commutation_exponent(&p, &q).unwrap(), 0);
        let dp = dense_matrix(&p).unwrap();
        let dq = dense_matrix(&q).unwrap();
        assert!(close(&(&dp * &dq), &(&dq * &dp)));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = PhasedPauli::identity(2);
        let b = PhasedPauli::identity(3);
        assert_eq!(multiply(&a, &b), Err(Error::LengthMismatch(2, 3)));
        assert!(commutation_exponent(&a, &b).is_err());
    }

    #[test]
    fn y_matches_its_definition() {
        // ω^{5/2} X† Z† built by multiplication.
        let xd = PhasedPauli::single(1, 0, 0, 3);
        let zd = PhasedPauli::single(1, 0, 3, 0);
        let y = multiply(&xd, &zd).unwrap().with_phase(0);
        let direct = multiply(&xd, &zd).unwrap();
        let y_def = PhasedPauli::new(direct.phase_exp() as i64 + 5, y.z_exps().to_vec(), y.x_exps().to_vec()).unwrap();
        assert_eq!(y_def, PhasedPauli::y(1, 0));
    }

    #[test]
    fn inverse_and_local_products() {
        let p = PhasedPauli::from_sparse(3, 5, &[(0, 1, 3), (2, 2, 1)]);
        assert!(multiply(&p, &p.inverse()).unwrap().is_identity());
        let mut r = p.clone();
        r.mul_right_local(2, 3, 2);
        assert_eq!(r, multiply(&p, &PhasedPauli::single(3, 2, 3, 2)).unwrap());
        let mut l = p.clone();
        l.mul_left_local(0, 1, 1);
        assert_eq!(l, multiply(&PhasedPauli::single(3, 0, 1, 1), &p).unwrap());
    }

    #[test]
    fn dense_relations() {
        let z = dense_matrix(&PhasedPauli::z(1, 0)).unwrap();
        let x = dense_matrix(&PhasedPauli::x(1, 0)).unwrap();
        let w = Complex64::i();
        assert!(close(&(&z * &x), &((&x * &z) * w)));
        assert!(close(&dense_matrix(&PhasedPauli::identity(2)).unwrap(), &DMatrix::identity(16, 16)));
        assert!(dense_matrix(&PhasedPauli::identity(7)).is_err());
    }

    #[test]
    fn two_qubit_realization() {
        let [x, y, z] = qubit_pair_operators();
        let (s1x, s1y, s1z, s2x, s2y, s2z) = qubit_paulis();
        let id = DMatrix::<Complex64>::identity(4, 4);
        let w = Complex64::i();
        assert!(close(&x.pow(4), &id));
        assert!(close(&z.pow(4), &id));
        assert!(close(&y.pow(4), &id));
        assert!(close(&(&z * &x), &((&x * &z) * w)));
        assert!(close(&(&x * &y), &((&y * &x) * w)));
        assert!(close(&(&y * &z), &((&z * &y) * w)));
        let y_def = (x.adjoint() * z.adjoint()) * Complex64::from_polar(1.0, 5.0 * std::f64::consts::FRAC_PI_4);
        assert!(close(&y, &y_def));
        assert!(close(&(&x * &x), &(&s1x * &s2x)));
        assert!(close(&(&y * &y), &(&s1y * &s2y)));
        assert!(close(&(&z * &z), &(&s1z * &s2z)));
    }

    /// Expanding each qubit Pauli in the Z^aX^b basis of the two-qubit
    /// realization yields exactly the conversion row, with equal weights.
    #[test]
    fn table_i_matches_operator_expansion() {
        let [x, _, z] = qubit_pair_operators();
        let (s1x, s1y, s1z, s2x, s2y, s2z) = qubit_paulis();
        let cases = [(s1x, Axis::X), (s2x, Axis::X), (s1y, Axis::Y), (s2y, Axis::Y), (s1z, Axis::Z), (s2z, Axis::Z)];
        for (sigma, axis) in cases {
            let mut found = Vec::new();
            let mut mags = Vec::new();
            for a in 0..4u8 {
                for b in 0..4u8 {
                    let basis = z.pow(a as u32) * x.pow(b as u32);
                    let c = (basis.adjoint() * &sigma).trace() / Complex64::new(4.0, 0.0);
                    if c.norm() > 1e-9 {
                        found.push((a, b));
                        mags.push(c.norm());
                    }
                }
            }
            let mut want = conversion_row(axis).to_vec();
            want.sort();
            found.sort();
            assert_eq!(found, want, "{axis:?}");
            assert!(mags.iter().all(|m| (m - mags[0]).abs() < 1e-9));
        }
    }

    #[test]
    fn table_i_sampling_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for axis in Axis::ALL {
            let row = conversion_row(axis);
            let mut counts = vec![0usize; row.len()];
            let n = 40_000;
            for _ in 0..n {
                let w = qubit_pauli_to_qudit(QubitPauliEvent { slot: 2, axis }, &mut rng);
                assert_eq!(w.phase_exp(), 0);
                let k = row.iter().position(|&e| e == w.local(0)).expect("row entry");
                counts[k] += 1;
            }
            let expect = n as f64 / row.len() as f64;
            let sigma = (expect * (1.0 - 1.0 / row.len() as f64)).sqrt();
            for c in counts {
                assert!((c as f64 - expect).abs() < 5.0 * sigma);
            }
        }
    }

    #[test]
    fn parafermion_examples() {
        let g1 = parafermion_transform(1, Parity::Odd, 2).unwrap();
        assert_eq!(g1.rep, PhasedPauli::z(2, 0));
        let g2 = parafermion_transform(1, Parity::Even, 2).unwrap();
        assert_eq!(g2.rep.local(0), (1, 1));
        assert_eq!(g2.rep.phase_exp_x_first(), 5);
        assert_eq!(commutation_exponent(&g1.rep, &g2.rep).unwrap(), 1);
        assert!(parafermion_transform(3, Parity::Odd, 2).is_err());
        assert!(parafermion_transform(0, Parity::Odd, 2).is_err());
    }

    #[test]
    fn parafermion_relations_dense() {
        for n in 1..=3 {
            let dim = 1 << (2 * n);
            let id = DMatrix::<Complex64>::identity(dim, dim);
            let gs: Vec<_> = (1..=2 * n).map(|j| parafermion(j, n).unwrap().rep).collect();
            let ds: Vec<_> = gs.iter().map(|g| dense_matrix(g).unwrap()).collect();
            for j in 0..2 * n {
                assert!(gs[j].pow(4).is_identity());
                assert!(close(&ds[j].pow(4), &id));
                for k in 0..2 * n {
                    if j == k {
                        continue;
                    }
                    let e = if k > j { 1 } else { 3 };
                    assert_eq!(commutation_exponent(&gs[j], &gs[k]).unwrap(), e);
                    let w = Complex64::i().powu(e as u32);
                    assert!(close(&(&ds[j] * &ds[k]), &((&ds[k] * &ds[j]) * w)));
                }
            }
        }
    }

    #[test]
    fn projector_sandwich_idempotence() {
        let a = PhasedPauli::from_sparse(2, 0, &[(0, 1, 0)]);
        let gamma = PhasedPauli::from_sparse(2, 0, &[(1, 1, 0)]);
        let out = projector_sandwich(&[(a.clone(), 0), (a.clone(), 0)], &gamma).unwrap();
        for v in out {
            assert_eq!(v, SectorValue::Phase { exp8: 0, magnitude: Ratio::new(1, 1) });
        }
        let out = projector_sandwich(&[(a.clone(), 0), (a.clone(), 1)], &gamma).unwrap();
        assert!(out.iter().all(|v| *v == SectorValue::Annihilated));
        let out = projector_sandwich(&[(a.clone(), 0), (a.clone(), 1), (a, 0)], &gamma).unwrap();
        assert!(out.iter().all(|v| *v == SectorValue::Annihilated));
    }

    #[test]
    fn projector_sandwich_shifted_middle() {
        // P_A B-projector P_A = ¼ P_A when (A,B) ≠ 0: only B⁰ survives.
        let a = PhasedPauli::z(2, 0);
        let b = PhasedPauli::x(2, 0);
        let gamma = PhasedPauli::z(2, 1);
        let out = projector_sandwich(&[(a.clone(), 0), (b, 0), (a, 0)], &gamma).unwrap();
        for v in out {
            assert_eq!(v, SectorValue::Phase { exp8: 0, magnitude: Ratio::new(1, 4) });
        }
    }

    #[test]
    fn projector_sandwich_rejects_noncommuting_reference() {
        let a = PhasedPauli::z(1, 0);
        let gamma = PhasedPauli::x(1, 0);
        assert!(projector_sandwich(&[(a.clone(), 0), (a, 0)], &gamma).is_err());
    }

    #[test]
    fn dense_agrees_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=2);
            let mk = |rng: &mut ChaCha8Rng| {
                PhasedPauli::new(
                    rng.gen_range(0..8),
                    (0..n).map(|_| rng.gen_range(0..4)).collect(),
                    (0..n).map(|_| rng.gen_range(0..4)).collect(),
                )
                .unwrap()
            };
            let p = mk(&mut rng);
            let q = mk(&mut rng);
            let pq = dense_matrix(&multiply(&p, &q).unwrap()).unwrap();
            assert!(close(&pq, &(dense_matrix(&p).unwrap() * dense_matrix(&q).unwrap())));
        }
    }
}
