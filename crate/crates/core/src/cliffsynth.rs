//! Clifford tableaux over ℤ₄, SL(2,ℤ₄) word search and synthesis of any
//! Clifford from `S`, `T`, `Z` and nearest-neighbour `C_Z`.
//!
//! Local exponent vectors are `(a, b)` for `Z^a X^b`. A tableau stores the
//! conjugation images of every `X_q` and `Z_q` with exact ζ₈ phases, so two
//! unitaries share a tableau iff they agree up to a global phase.

use crate::z4algebra::{commutation_exponent, multiply, PhasedPauli};
use crate::{Error, Result};
use rand::Rng;
use std::collections::{HashMap, VecDeque};
use std::fmt;

/// 2×2 matrix over ℤ₄ acting on columns `(a, b)`.
pub type Mat2 = [[u8; 2]; 2];

pub const IDENTITY2: Mat2 = [[1, 0], [0, 1]];

pub fn mat2_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut r = [[0u8; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = ((x[i][0] as u32 * y[0][j] as u32 + x[i][1] as u32 * y[1][j] as u32) % 4) as u8;
        }
    }
    r
}

pub fn mat2_apply(m: &Mat2, v: (u8, u8)) -> (u8, u8) {
    (
        ((m[0][0] as u32 * v.0 as u32 + m[0][1] as u32 * v.1 as u32) % 4) as u8,
        ((m[1][0] as u32 * v.0 as u32 + m[1][1] as u32 * v.1 as u32) % 4) as u8,
    )
}

fn det2(m: &Mat2) -> u8 {
    ((4 * 4 + m[0][0] as u32 * m[1][1] as u32 - m[0][1] as u32 * m[1][0] as u32) % 4) as u8
}

/// All 2×2 matrices over ℤ₄ with determinant 1.
pub fn enumerate_sl2z4() -> Vec<Mat2> {
    let mut out = Vec::new();
    for code in 0..256u32 {
        let e = |k: u32| ((code >> (2 * k)) & 3) as u8;
        let m = [[e(0), e(1)], [e(2), e(3)]];
        if det2(&m) == 1 {
            out.push(m);
        }
    }
    out
}

/// Exponent action of `S`: `Z ↦ Z`, `X ↦ ζ₈⁷ ZX`.
pub const M_S: Mat2 = [[1, 1], [0, 1]];
/// Exponent action of `T`: `X ↦ X`, `Z ↦ ζ₈ ZX³`.
pub const M_T: Mat2 = [[1, 0], [3, 1]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    S,
    T,
}

/// Shortest words over {S, T} for every element of SL(2,ℤ₄). A word is in
/// time order, so `[g₁, g₂]` has matrix `M(g₂)M(g₁)`.
pub fn word_search() -> HashMap<Mat2, Vec<Letter>> {
    let mut words: HashMap<Mat2, Vec<Letter>> = HashMap::from([(IDENTITY2, Vec::new())]);
    let mut queue = VecDeque::from([IDENTITY2]);
    while let Some(m) = queue.pop_front() {
        for (letter, g) in [(Letter::S, M_S), (Letter::T, M_T)] {
            let next = mat2_mul(&g, &m);
            if !words.contains_key(&next) {
                let mut w = words[&m].clone();
                w.push(letter);
                words.insert(next, w);
                queue.push_back(next);
            }
        }
    }
    assert_eq!(words.len(), 48, "S and T must generate SL(2,Z4)");
    words
}

/// Images of `X_q` and `Z_q` under conjugation `P ↦ UPU†`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    x: Vec<PhasedPauli>,
    z: Vec<PhasedPauli>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        CliffordTableau { x: (0..n).map(|q| PhasedPauli::x(n, q)).collect(), z: (0..n).map(|q| PhasedPauli::z(n, q)).collect() }
    }

    pub fn from_images(x: Vec<PhasedPauli>, z: Vec<PhasedPauli>) -> Result<Self> {
        let t = CliffordTableau { x, z };
        t.validate()?;
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x_image(&self, q: usize) -> &PhasedPauli {
        &self.x[q]
    }

    pub fn z_image(&self, q: usize) -> &PhasedPauli {
        &self.z[q]
    }

    /// Images must keep order four and all pairwise commutation exponents.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if self.z.len() != n {
            return Err(Error::InvalidTableau(format!("{} X images but {} Z images", n, self.z.len())));
        }
        let gens: Vec<PhasedPauli> = (0..n).flat_map(|q| [PhasedPauli::z(n, q), PhasedPauli::x(n, q)]).collect();
        let imgs: Vec<&PhasedPauli> = (0..n).flat_map(|q| [&self.z[q], &self.x[q]]).collect();
        for (i, p) in imgs.iter().enumerate() {
            if p.len() != n {
                return Err(Error::InvalidTableau(format!("image {i} acts on {} qudits, expected {n}", p.len())));
            }
            if !p.pow(4).is_identity() {
                return Err(Error::InvalidTableau(format!("image {p} is not in the orbit of X and Z")));
            }
        }
        for i in 0..imgs.len() {
            for j in (i + 1)..imgs.len() {
                if commutation_exponent(imgs[i], imgs[j])? != commutation_exponent(&gens[i], &gens[j])? {
                    return Err(Error::InvalidTableau(format!("images {i} and {j} break the symplectic form")));
                }
            }
        }
        Ok(())
    }

    /// `UPU†`.
    pub fn conjugate(&self, p: &PhasedPauli) -> PhasedPauli {
        let n = self.n();
        let mut acc = PhasedPauli::identity(n).with_phase(p.phase_exp() as i64);
        for q in 0..n {
            let (a, b) = p.local(q);
            if a != 0 {
                acc = multiply(&acc, &self.z[q].pow(a as u32)).expect("equal lengths");
            }
            if b != 0 {
                acc = multiply(&acc, &self.x[q].pow(b as u32)).expect("equal lengths");
            }
        }
        acc
    }

    /// Tableau of `self · first`: `first` acts before `self`.
    pub fn compose(&self, first: &CliffordTableau) -> CliffordTableau {
        CliffordTableau {
            x: first.x.iter().map(|p| self.conjugate(p)).collect(),
            z: first.z.iter().map(|p| self.conjugate(p)).collect(),
        }
    }

    /// Lifts a `k`-qudit tableau to act on `qudits` of an `n`-qudit register.
    pub fn embed(&self, n: usize, qudits: &[usize]) -> Result<CliffordTableau> {
        if qudits.len() != self.n() {
            return Err(Error::LengthMismatch(qudits.len(), self.n()));
        }
        if let Some(&q) = qudits.iter().find(|&&q| q >= n) {
            return Err(Error::IndexOutOfRange { index: q, len: n });
        }
        let lift = |p: &PhasedPauli| {
            let mut z = vec![0u8; n];
            let mut x = vec![0u8; n];
            for (i, &q) in qudits.iter().enumerate() {
                z[q] = p.z_exps()[i];
                x[q] = p.x_exps()[i];
            }
            PhasedPauli::new(p.phase_exp() as i64, z, x).expect("equal lengths")
        };
        let mut t = CliffordTableau::identity(n);
        for (i, &q) in qudits.iter().enumerate() {
            t.x[q] = lift(&self.x[i]);
            t.z[q] = lift(&self.z[i]);
        }
        Ok(t)
    }

    /// Left-multiplies by a gate acting on `qudits`: `self ← G · self`.
    pub fn apply(&mut self, gate: &CliffordTableau, qudits: &[usize]) -> Result<()> {
        let g = gate.embed(self.n(), qudits)?;
        *self = g.compose(self);
        Ok(())
    }

    /// `M(U)` with rows and columns ordered `(a₀, b₀, a₁, b₁, …)`; column
    /// `2q` is the image of `Z_q`, column `2q+1` that of `X_q`.
    pub fn exponent_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.n();
        let mut m = vec![vec![0u8; 2 * n]; 2 * n];
        for q in 0..n {
            for (col, img) in [(2 * q, &self.z[q]), (2 * q + 1, &self.x[q])] {
                for r in 0..n {
                    m[2 * r][col] = img.z_exps()[r];
                    m[2 * r + 1][col] = img.x_exps()[r];
                }
            }
        }
        m
    }

    /// Restriction to qudits `from..n`; valid when those images avoid earlier qudits.
    fn tail(&self, from: usize) -> Result<CliffordTableau> {
        let n = self.n();
        let cut = |p: &PhasedPauli| -> Result<PhasedPauli> {
            if (0..from).any(|q| p.local(q) != (0, 0)) {
                return Err(Error::InvalidTableau("image leaks onto a reduced qudit".into()));
            }
            PhasedPauli::new(p.phase_exp() as i64, p.z_exps()[from..].to_vec(), p.x_exps()[from..].to_vec())
        };
        Ok(CliffordTableau { x: self.x[from..n].iter().map(cut).collect::<Result<_>>()?, z: self.z[from..n].iter().map(cut).collect::<Result<_>>()? })
    }
}

impl fmt::Display for CliffordTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n() {
            writeln!(f, "X{q} -> {}", self.x[q])?;
            writeln!(f, "Z{q} -> {}", self.z[q])?;
        }
        Ok(())
    }
}

fn product(n: usize, phase: i64, factors: &[(usize, u8, u8)]) -> PhasedPauli {
    factors.iter().fold(PhasedPauli::identity(n).with_phase(phase), |acc, &(q, a, b)| {
        multiply(&acc, &PhasedPauli::single(n, q, a, b)).expect("equal lengths")
    })
}

/// Conjugation action of `C_st = S₁^{−st} C_Z^t C_X^s` (C_X acts first):
/// `X₁ ↦ ω^{st/2} X₁X₂ˢZ₂ᵗ`, `Z₂ ↦ Z₁^{−s}Z₂`, `X₂ ↦ Z₁ᵗX₂`, `Z₁` fixed.
pub fn controlled_tableau(s: u8, t: u8) -> CliffordTableau {
    let (s, t) = (s & 3, t & 3);
    CliffordTableau {
        x: vec![product(2, (s * t) as i64, &[(0, 0, 1), (1, 0, s), (1, t, 0)]), product(2, 0, &[(0, t, 0), (1, 0, 1)])],
        z: vec![PhasedPauli::z(2, 0), product(2, 0, &[(0, (4 - s) & 3, 0), (1, 1, 0)])],
    }
}

/// Library gates: S, T, Z, X, H (one qudit); C_Z, C_X, SWAP, and `C_st`
/// written `C_{st}` with digits s and t (two qudits, control first).
pub fn gate_tableau(name: &str) -> Result<CliffordTableau> {
    let one = |x: PhasedPauli, z: PhasedPauli| CliffordTableau { x: vec![x], z: vec![z] };
    let t = match name {
        "S" => one(product(1, 7, &[(0, 1, 1)]), PhasedPauli::z(1, 0)),
        "T" => one(PhasedPauli::x(1, 0), product(1, 1, &[(0, 1, 3)])),
        "Z" => one(PhasedPauli::x(1, 0).with_phase(2), PhasedPauli::z(1, 0)),
        "X" => one(PhasedPauli::x(1, 0), PhasedPauli::z(1, 0).with_phase(6)),
        "H" => one(PhasedPauli::z(1, 0), PhasedPauli::single(1, 0, 0, 3)),
        "C_Z" | "CZ" => controlled_tableau(0, 1),
        "C_X" | "CX" => CliffordTableau {
            x: vec![product(2, 0, &[(0, 0, 1), (1, 0, 1)]), PhasedPauli::x(2, 1)],
            z: vec![PhasedPauli::z(2, 0), product(2, 0, &[(0, 3, 0), (1, 1, 0)])],
        },
        "SWAP" => CliffordTableau { x: vec![PhasedPauli::x(2, 1), PhasedPauli::x(2, 0)], z: vec![PhasedPauli::z(2, 1), PhasedPauli::z(2, 0)] },
        _ => {
            let digits = name.strip_prefix("C_{").and_then(|r| r.strip_suffix('}')).map(|d| d.as_bytes().to_vec());
            match digits.as_deref() {
                Some([s @ b'0'..=b'3', t @ b'0'..=b'3']) => controlled_tableau(s - b'0', t - b'0'),
                _ => return Err(Error::UnknownName(name.to_string())),
            }
        }
    };
    Ok(t)
}

/// Primitive gates. `CZ(i)` acts on the neighbours `(i, i+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    S(usize),
    T(usize),
    Z(usize),
    CZ(usize),
}

impl Gate {
    fn tableau(&self) -> (&'static str, Vec<usize>) {
        match *self {
            Gate::S(q) => ("S", vec![q]),
            Gate::T(q) => ("T", vec![q]),
            Gate::Z(q) => ("Z", vec![q]),
            Gate::CZ(q) => ("C_Z", vec![q, q + 1]),
        }
    }

    /// Unitary order, so that `g^{order-1} = g⁻¹`.
    fn order(&self) -> usize {
        match self {
            Gate::S(_) | Gate::T(_) => 8,
            Gate::Z(_) | Gate::CZ(_) => 4,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::S(q) => write!(f, "S{q}"),
            Gate::T(q) => write!(f, "T{q}"),
            Gate::Z(q) => write!(f, "Z{q}"),
            Gate::CZ(q) => write!(f, "CZ{q},{}", q + 1),
        }
    }
}

/// A gate sequence in time order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateWord {
    pub n: usize,
    pub gates: Vec<Gate>,
}

struct Library {
    s: CliffordTableau,
    t: CliffordTableau,
    z: CliffordTableau,
    cz: CliffordTableau,
}

impl Library {
    fn new() -> Self {
        let get = |n| gate_tableau(n).expect("library gate");
        Library { s: get("S"), t: get("T"), z: get("Z"), cz: get("C_Z") }
    }

    fn get(&self, g: &Gate) -> &CliffordTableau {
        match g {
            Gate::S(_) => &self.s,
            Gate::T(_) => &self.t,
            Gate::Z(_) => &self.z,
            Gate::CZ(_) => &self.cz,
        }
    }
}

impl GateWord {
    pub fn evaluate(&self) -> Result<CliffordTableau> {
        let lib = Library::new();
        let mut t = CliffordTableau::identity(self.n);
        for g in &self.gates {
            let (_, qs) = g.tableau();
            t.apply(lib.get(g), &qs)?;
        }
        Ok(t)
    }

    pub fn inverse(&self) -> GateWord {
        let gates = self.gates.iter().rev().flat_map(|g| std::iter::repeat_n(*g, g.order() - 1)).collect();
        GateWord { n: self.n, gates }
    }

    /// Folds runs of one repeated gate modulo its order; cancelled runs can
    /// expose further runs, which fold as well.
    pub fn simplified(&self) -> GateWord {
        let mut stack: Vec<(Gate, usize)> = Vec::new();
        for &g in &self.gates {
            match stack.last_mut() {
                Some((top, k)) if *top == g => {
                    *k += 1;
                    if *k == g.order() {
                        stack.pop();
                    }
                }
                _ => stack.push((g, 1)),
            }
        }
        let gates = stack.into_iter().flat_map(|(g, k)| std::iter::repeat_n(g, k)).collect();
        GateWord { n: self.n, gates }
    }

    pub fn is_nearest_neighbour(&self) -> bool {
        self.gates.iter().all(|g| match *g {
            Gate::S(q) | Gate::T(q) | Gate::Z(q) => q < self.n,
            Gate::CZ(q) => q + 1 < self.n,
        })
    }
}

impl fmt::Display for GateWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<String> = self.gates.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", toks.join(" "))
    }
}

/// Reduces a tableau to the identity by left-multiplying primitive gates,
/// recording them. Composite gates are expanded on the fly.
struct Reducer {
    cur: CliffordTableau,
    applied: Vec<Gate>,
    lib: Library,
    words: HashMap<Mat2, Vec<Letter>>,
    sl2: Vec<Mat2>,
}

impl Reducer {
    fn push(&mut self, g: Gate) {
        let (_, qs) = g.tableau();
        let t = self.lib.get(&g).clone();
        self.cur.apply(&t, &qs).expect("qudits in range");
        self.applied.push(g);
    }

    fn push_inverse(&mut self, g: Gate) {
        for _ in 1..g.order() {
            self.push(g);
        }
    }

    /// `√i H = STS`.
    fn hadamard(&mut self, q: usize) {
        for g in [Gate::S(q), Gate::T(q), Gate::S(q)] {
            self.push(g);
        }
    }

    fn hadamard_dag(&mut self, q: usize) {
        for g in [Gate::S(q), Gate::T(q), Gate::S(q)] {
            self.push_inverse(g);
        }
    }

    /// `X = (√iH)† Z (√iH)`.
    fn x(&mut self, q: usize) {
        self.hadamard(q);
        self.push(Gate::Z(q));
        self.hadamard_dag(q);
    }

    /// Adjacent `C_X` with control `c` and target `t`: `H_t† C_Z H_t`.
    fn cx_adjacent(&mut self, c: usize, t: usize) {
        self.hadamard(t);
        self.push(Gate::CZ(c.min(t)));
        self.hadamard_dag(t);
    }

    /// `iSWAP = C_X(1,2) C_X(2,1)† C_X(1,2) (√iH₂)²` on `(q, q+1)`.
    fn swap_adjacent(&mut self, q: usize) {
        self.hadamard(q + 1);
        self.hadamard(q + 1);
        self.cx_adjacent(q, q + 1);
        for _ in 0..3 {
            self.cx_adjacent(q + 1, q);
        }
        self.cx_adjacent(q, q + 1);
    }

    /// Runs `f` with qudit `k` moved next to `j` (`j < k`), then moves it back.
    fn with_neighbour(&mut self, j: usize, k: usize, f: impl FnOnce(&mut Self, usize)) {
        for q in ((j + 1)..k).rev() {
            self.swap_adjacent(q);
        }
        f(self, j + 1);
        for q in (j + 1)..k {
            self.swap_adjacent(q);
        }
    }

    /// `C_Z(j,k)^t` for arbitrary `j ≠ k`.
    fn cz(&mut self, j: usize, k: usize, t: u8) {
        let (lo, hi) = (j.min(k), j.max(k));
        self.with_neighbour(lo, hi, |r, nb| {
            for _ in 0..(t & 3) {
                r.push(Gate::CZ(nb - 1));
            }
        });
    }

    /// `C_st` with control `c` and target `i > c`.
    fn controlled(&mut self, c: usize, i: usize, s: u8, t: u8) {
        self.with_neighbour(c, i, |r, nb| {
            for _ in 0..(s & 3) {
                r.cx_adjacent(c, nb);
            }
            for _ in 0..(t & 3) {
                r.push(Gate::CZ(c));
            }
            for _ in 0..((8 - (s as usize * t as usize) % 8) % 8) {
                r.push(Gate::S(c));
            }
        });
    }

    fn local(&mut self, q: usize, m: &Mat2) {
        let word = self.words[m].clone();
        for l in word {
            self.push(match l {
                Letter::S => Gate::S(q),
                Letter::T => Gate::T(q),
            });
        }
    }

    /// Local exponents of the current images of `Z_s` and `X_s` at qudit `j`.
    fn locals(&self, s: usize, j: usize) -> ((u8, u8), (u8, u8)) {
        (self.cur.z[s].local(j), self.cur.x[s].local(j))
    }

    fn r(&self, s: usize, j: usize) -> u8 {
        let ((a, b), (c, d)) = self.locals(s, j);
        ((4 * 4 + a as u32 * d as u32 - b as u32 * c as u32) % 4) as u8
    }

    /// Makes some qudit `j ≥ s` carry `r_j = 1`, then moves it to `s`.
    fn isolate(&mut self, s: usize) -> Result<()> {
        let n = self.cur.n();
        let j = match (s..n).find(|&j| self.r(s, j) == 1) {
            Some(j) => j,
            None => self.raise_r(s)?,
        };
        for q in (s..j).rev() {
            self.swap_adjacent(q);
        }
        let (v, w) = self.locals(s, s);
        let m = *self
            .sl2
            .iter()
            .find(|m| mat2_apply(m, v) == (1, 0) && mat2_apply(m, w) == (0, 1))
            .ok_or_else(|| Error::InvalidTableau("no local Clifford normalizes the pivot".into()))?;
        self.local(s, &m);
        Ok(())
    }

    /// Local Cliffords on `j`, `k` and a power of `C_Z(j,k)` turning
    /// `r_j = −1` into `r_j = 1`.
    fn raise_r(&mut self, s: usize) -> Result<usize> {
        let n = self.cur.n();
        for j in (s..n).filter(|&j| self.r(s, j) == 3) {
            for k in (s..n).filter(|&k| k != j && self.r(s, k) != 0) {
                let ((aj, bj), (cj, dj)) = self.locals(s, j);
                let ((ak, bk), (ck, dk)) = self.locals(s, k);
                for mj in &self.sl2 {
                    let (_, bj2) = mat2_apply(mj, (aj, bj));
                    let (_, dj2) = mat2_apply(mj, (cj, dj));
                    for mk in &self.sl2 {
                        let (_, bk2) = mat2_apply(mk, (ak, bk));
                        let (_, dk2) = mat2_apply(mk, (ck, dk));
                        let cross = (4 * 4 + bk2 as u32 * dj2 as u32 - bj2 as u32 * dk2 as u32) % 4;
                        for t in 1..4u32 {
                            if (3 + t * cross) % 4 == 1 {
                                let (mj, mk) = (*mj, *mk);
                                self.local(j, &mj);
                                self.local(k, &mk);
                                self.cz(j, k, t as u8);
                                debug_assert_eq!(self.r(s, j), 1);
                                return Ok(j);
                            }
                        }
                    }
                }
            }
        }
        Err(Error::InvalidTableau("no qudit pair can be brought to r = 1".into()))
    }

    /// Clears qudits `> s` from the image of `X_s` (`which = x`) or `Z_s`.
    fn clear_tail(&mut self, s: usize, use_x: bool) {
        let n = self.cur.n();
        for i in (s + 1)..n {
            let (a, b) = if use_x { self.cur.x[s].local(i) } else { self.cur.z[s].local(i) };
            if (a, b) != (0, 0) {
                self.controlled(s, i, (4 - b) & 3, (4 - a) & 3);
            }
        }
    }

    /// After this, the images of `X_s` and `Z_s` are exactly `X_s` and `Z_s`.
    fn reduce_qudit(&mut self, s: usize) -> Result<()> {
        self.isolate(s)?;
        self.clear_tail(s, true);
        self.hadamard_dag(s);
        self.clear_tail(s, false);
        self.hadamard(s);
        let px = self.cur.x[s].phase_exp();
        for _ in 0..((8 - px as usize) / 2 % 4) {
            self.push(Gate::Z(s));
        }
        let pz = self.cur.z[s].phase_exp();
        for _ in 0..(pz as usize / 2) {
            self.x(s);
        }
        let n = self.cur.n();
        if self.cur.x[s] != PhasedPauli::x(n, s) || self.cur.z[s] != PhasedPauli::z(n, s) {
            return Err(Error::InvalidTableau(format!("qudit {s} did not reduce")));
        }
        Ok(())
    }
}

/// A word over {S, T, Z, nearest-neighbour C_Z} whose tableau equals `target`.
pub fn synthesize(target: &CliffordTableau) -> Result<GateWord> {
    target.validate()?;
    let n = target.n();
    let mut r = Reducer { cur: target.clone(), applied: Vec::new(), lib: Library::new(), words: word_search(), sl2: enumerate_sl2z4() };
    for s in 0..n {
        r.reduce_qudit(s)?;
        // Qudit s is fixed, so every later image lives on s+1..n.
        r.cur.tail(s + 1)?;
    }
    debug_assert_eq!(r.cur, CliffordTableau::identity(n));
    let reduced = GateWord { n, gates: r.applied };
    Ok(reduced.inverse().simplified())
}

/// A random valid tableau built from `len` random library gates.
pub fn random_tableau<R: Rng + ?Sized>(n: usize, len: usize, rng: &mut R) -> CliffordTableau {
    let one = ["S", "T", "Z", "X", "H"];
    let two = ["C_Z", "C_X", "SWAP"];
    let mut t = CliffordTableau::identity(n);
    for _ in 0..len {
        if n >= 2 && rng.gen_bool(0.4) {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let g = gate_tableau(two[rng.gen_range(0..two.len())]).expect("library gate");
            t.apply(&g, &[a, b]).expect("in range");
        } else {
            let g = gate_tableau(one[rng.gen_range(0..one.len())]).expect("library gate");
            t.apply(&g, &[rng.gen_range(0..n)]).expect("in range");
        }
    }
    t
}

/// Parses tokens such as `H0`, `S1`, `CX0,2`, `SWAP1,2`, `C_{13}0,1` into a tableau.
pub fn parse_library_word(n: usize, text: &str) -> Result<CliffordTableau> {
    let mut t = CliffordTableau::identity(n);
    for tok in text.split_whitespace() {
        let at = tok.trim_end_matches(|c: char| c.is_ascii_digit() || c == ',').len();
        if at == tok.len() {
            return Err(Error::UnknownName(tok.to_string()));
        }
        let (name, args) = tok.split_at(at);
        let qs: Vec<usize> = args.split(',').map(|s| s.parse::<usize>().map_err(|_| Error::UnknownName(tok.to_string()))).collect::<Result<_>>()?;
        let g = gate_tableau(name)?;
        t.apply(&g, &qs)?;
    }
    Ok(t)
}

/// Eigenvalue classes of Pauli words under Clifford conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrbitKind {
    Identity,
    /// All exponents even: two eigenvalues.
    EvenEven,
    /// `Σ aᵢbᵢ` odd: half-integer powers of ω.
    OddOdd,
    /// Some exponent odd, `Σ aᵢbᵢ` even: the fourth roots of unity.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliOrbit {
    pub kind: OrbitKind,
    /// Sorted ζ₈ exponents of the distinct eigenvalues.
    pub spectrum: Vec<u8>,
}

pub fn classify_pauli_orbit(p: &PhasedPauli) -> PauliOrbit {
    let k = p.phase_exp();
    let all_even = p.z_exps().iter().chain(p.x_exps()).all(|&e| e % 2 == 0);
    let (kind, mut spectrum): (OrbitKind, Vec<u8>) = if p.is_identity_word() {
        (OrbitKind::Identity, vec![k])
    } else if all_even {
        let e2 = p.pow(2).phase_exp();
        (OrbitKind::EvenEven, vec![e2 / 2, (e2 / 2 + 4) % 8])
    } else {
        let e4 = p.pow(4).phase_exp();
        let base = e4 / 4;
        let parity: u32 = p.z_exps().iter().zip(p.x_exps()).map(|(&a, &b)| a as u32 * b as u32).sum();
        let kind = if parity % 2 == 1 { OrbitKind::OddOdd } else { OrbitKind::Mixed };
        (kind, (0..4).map(|j| (base + 2 * j) % 8).collect())
    };
    spectrum.sort_unstable();
    spectrum.dedup();
    PauliOrbit { kind, spectrum }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::braidlab::gate_matrix;
    use crate::z4algebra::dense_matrix;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type CMat = DMatrix<Complex64>;

    fn basis_op(dim: usize, f: impl Fn(usize) -> (usize, Complex64)) -> CMat {
        let mut m = CMat::zeros(dim, dim);
        for c in 0..dim {
            let (r, v) = f(c);
            m[(r, c)] = v;
        }
        m
    }

    fn dense_gate(name: &str) -> CMat {
        let one = Complex64::new(1.0, 0.0);
        match name {
            "C_X" => basis_op(16, |c| (4 * (c / 4) + (c % 4 + c / 4) % 4, one)),
            "SWAP" => basis_op(16, |c| (4 * (c % 4) + c / 4, one)),
            "C_Z" => gate_matrix("Λ").unwrap().matrix,
            _ => gate_matrix(name).unwrap().matrix,
        }
    }

    fn check_against_dense(t: &CliffordTableau, u: &CMat) {
        let n = t.n();
        for q in 0..n {
            for (gen, img) in [(PhasedPauli::x(n, q), t.x_image(q)), (PhasedPauli::z(n, q), t.z_image(q))] {
                let lhs = u * dense_matrix(&gen).unwrap() * u.adjoint();
                let rhs = dense_matrix(img).unwrap();
                assert!((lhs - rhs).norm() < 1e-10, "{gen} -> {img}");
            }
        }
    }

    #[test]
    fn sl2_has_48_elements_closed_under_products() {
        let g = enumerate_sl2z4();
        assert_eq!(g.len(), 48);
        assert!(g.contains(&IDENTITY2));
        for x in &g {
            for y in &g {
                assert!(g.contains(&mat2_mul(x, y)));
            }
        }
    }

    #[test]
    fn bfs_covers_sl2_within_nine_letters() {
        let w = word_search();
        assert!(w[&IDENTITY2].is_empty());
        assert_eq!(w[&M_S], vec![Letter::S]);
        assert_eq!(w.values().map(Vec::len).max(), Some(9));
        for (m, word) in &w {
            let prod = word.iter().fold(IDENTITY2, |acc, l| mat2_mul(if *l == Letter::S { &M_S } else { &M_T }, &acc));
            assert_eq!(&prod, m);
        }
    }

    #[test]
    fn library_tableaux_match_dense_conjugation() {
        for name in ["S", "T", "Z", "X", "H", "C_Z", "C_X", "SWAP"] {
            let t = gate_tableau(name).unwrap();
            t.validate().unwrap();
            check_against_dense(&t, &dense_gate(name));
        }
        assert!(gate_tableau("W").is_err());
    }

    #[test]
    fn single_qudit_exponent_matrices() {
        let m = |n: &str| {
            let e = gate_tableau(n).unwrap().exponent_matrix();
            [[e[0][0], e[0][1]], [e[1][0], e[1][1]]]
        };
        assert_eq!(m("S"), M_S);
        assert_eq!(m("T"), M_T);
    }

    #[test]
    fn controlled_gate_is_the_stated_product() {
        let cx = gate_tableau("C_X").unwrap();
        let cz = gate_tableau("C_Z").unwrap();
        let s = gate_tableau("S").unwrap();
        for sv in 0..4u8 {
            for tv in 0..4u8 {
                let mut t = CliffordTableau::identity(2);
                for _ in 0..sv {
                    t.apply(&cx, &[0, 1]).unwrap();
                }
                for _ in 0..tv {
                    t.apply(&cz, &[0, 1]).unwrap();
                }
                for _ in 0..(8 - (sv * tv) as usize % 8) % 8 {
                    t.apply(&s, &[0]).unwrap();
                }
                assert_eq!(t, controlled_tableau(sv, tv), "s={sv} t={tv}");
                assert_eq!(gate_tableau(&format!("C_{{{sv}{tv}}}")).unwrap(), t);
            }
        }
    }

    fn reducer(n: usize) -> Reducer {
        Reducer { cur: CliffordTableau::identity(n), applied: Vec::new(), lib: Library::new(), words: word_search(), sl2: enumerate_sl2z4() }
    }

    #[test]
    fn composite_expansions() {
        let mut r = reducer(2);
        r.swap_adjacent(0);
        assert_eq!(r.cur, gate_tableau("SWAP").unwrap());
        let mut r = reducer(2);
        r.cx_adjacent(0, 1);
        assert_eq!(r.cur, gate_tableau("C_X").unwrap());
        let mut r = reducer(1);
        r.x(0);
        assert_eq!(r.cur, gate_tableau("X").unwrap());
        let mut r = reducer(1);
        r.hadamard(0);
        assert_eq!(r.cur, gate_tableau("H").unwrap());
        let mut r = reducer(3);
        r.controlled(0, 2, 1, 3);
        assert_eq!(r.cur, controlled_tableau(1, 3).embed(3, &[0, 2]).unwrap());
    }

    #[test]
    fn synthesize_library_gates() {
        let s = gate_tableau("S").unwrap();
        assert_eq!(synthesize(&s).unwrap().evaluate().unwrap(), s);
        let h = gate_tableau("H").unwrap();
        let w = synthesize(&h).unwrap();
        assert_eq!(w.evaluate().unwrap(), h);
        let sts = GateWord { n: 1, gates: vec![Gate::S(0), Gate::T(0), Gate::S(0)] };
        assert_eq!(sts.evaluate().unwrap(), h);
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..60 {
            let n = 1 + i % 3;
            let t = random_tableau(n, 30, &mut rng);
            t.validate().unwrap();
            let w = synthesize(&t).unwrap();
            assert!(w.is_nearest_neighbour());
            assert_eq!(w.evaluate().unwrap(), t);
        }
    }

    #[test]
    fn simplification_preserves_the_tableau() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = random_tableau(2, 20, &mut rng);
            let raw = synthesize(&t).unwrap();
            let mut padded = raw.clone();
            padded.gates.extend(std::iter::repeat_n(Gate::T(1), 8));
            padded.gates.extend(std::iter::repeat_n(Gate::CZ(0), 4));
            let s = padded.simplified();
            assert_eq!(s.evaluate().unwrap(), t);
            assert!(s.gates.len() <= raw.gates.len());
            assert_eq!(s.simplified(), s);
        }
    }

    #[test]
    fn invalid_tableau_rejected() {
        let bad = CliffordTableau { x: vec![PhasedPauli::z(1, 0)], z: vec![PhasedPauli::z(1, 0)] };
        assert!(synthesize(&bad).is_err());
        let wrong_phase = CliffordTableau { x: vec![product(1, 0, &[(0, 1, 1)])], z: vec![PhasedPauli::z(1, 0)] };
        assert!(wrong_phase.validate().is_err());
    }

    #[test]
    fn exponent_matrix_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let u = random_tableau(2, 10, &mut rng);
            let v = random_tableau(2, 10, &mut rng);
            let (mu, mv, muv) = (u.exponent_matrix(), v.exponent_matrix(), u.compose(&v).exponent_matrix());
            for i in 0..4 {
                for j in 0..4 {
                    let s: u32 = (0..4).map(|k| mu[i][k] as u32 * mv[k][j] as u32).sum();
                    assert_eq!(muv[i][j] as u32, s % 4);
                }
            }
        }
    }

    #[test]
    fn orbit_examples() {
        let x = classify_pauli_orbit(&PhasedPauli::x(1, 0));
        assert_eq!(x.kind, OrbitKind::Mixed);
        assert_eq!(x.spectrum, vec![0, 2, 4, 6]);
        let z2 = classify_pauli_orbit(&PhasedPauli::single(1, 0, 2, 0));
        assert_eq!((z2.kind, z2.spectrum), (OrbitKind::EvenEven, vec![0, 4]));
        let zx = classify_pauli_orbit(&PhasedPauli::single(1, 0, 1, 1));
        assert_eq!((zx.kind, zx.spectrum), (OrbitKind::OddOdd, vec![1, 3, 5, 7]));
        assert_eq!(classify_pauli_orbit(&PhasedPauli::identity(2)).kind, OrbitKind::Identity);
    }

    #[test]
    fn spectra_match_dense_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let z = (0..2).map(|_| rng.gen_range(0..4)).collect();
            let x = (0..2).map(|_| rng.gen_range(0..4)).collect();
            let p = PhasedPauli::new(rng.gen_range(0..8), z, x).unwrap();
            let m = dense_matrix(&p).unwrap();
            let orbit = classify_pauli_orbit(&p);
            // Each listed λ leaves M − λ singular; their multiplicities fill the space.
            let mut total = 0;
            for &e in &orbit.spectrum {
                let lam = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4 * e as f64);
                let shifted = &m - CMat::identity(16, 16) * lam;
                let sv = shifted.singular_values();
                total += sv.iter().filter(|s| **s < 1e-9).count();
            }
            assert_eq!(total, 16, "{p}");
        }
    }
}
