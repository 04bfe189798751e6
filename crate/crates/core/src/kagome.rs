//! Periodic trihexagonal (kagome) lattice of ℤ₄ qudits and its stabilizer code.
//!
//! Geometry: lattice vectors a₁ = (1,0), a₂ = (½,√3/2). Cell (i,j) at
//! R = i·a₁ + j·a₂ holds sites A at R, B at R + a₁/2, C at R + a₂/2.
//!
//! * up(i,j) = {A(i,j), B(i,j), C(i,j)}, `M = Z Z Z`;
//! * down(i,j) = {A(i,j), B(i−1,j), C(i,j−1)}, `M = Z† Z† Z†`;
//! * hexagon h(i,j), centred at R + (a₁+a₂)/2, has corners listed
//!   anticlockwise from the top-right corner r:
//!   r = B(i,j+1), s = A(i,j+1), t = C(i,j), u = B(i,j), v = A(i+1,j),
//!   w = C(i+1,j), with `E = X_r X†_s X_t X†_u X_v X†_w`.
//!
//! The top-right triangle of h(i,j) is down(i+1,j+1) (edge w–r); the
//! bottom-left one is up(i,j) (edge t–u).
//!
//! Defect lines run along the B–C kagome line in direction a₂ − a₁:
//! C(x,y), B(x−1,y+1), C(x−1,y+1), B(x−2,y+2), … with `XZ†`-type terms on C
//! sites and `Y`-type terms on B sites. Each line edge, plus one edge beyond
//! each end, carries a double plaquette (hexagon, triangle) of which only the
//! product `R = M E†` is kept.

use crate::z4algebra::{commutation_exponent, multiply, PhasedPauli};
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

pub const SUB_A: usize = 0;
pub const SUB_B: usize = 1;
pub const SUB_C: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    Hexagon(usize),
    Triangle(usize),
    /// Retained product `M_tri E†_hex` of a double plaquette on `line`.
    Pentagon { hex: usize, tri: usize, line: usize },
}

/// Species of charge a generator detects: hexagons see e, triangles see m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    E,
    M,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub kind: GenKind,
    pub word: PhasedPauli,
    /// Active qudits in the support of `word`.
    pub sites: Vec<usize>,
}

impl Generator {
    pub fn species(&self) -> Species {
        match self.kind {
            GenKind::Hexagon(_) => Species::E,
            GenKind::Triangle(_) => Species::M,
            GenKind::Pentagon { .. } => Species::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefectTerm {
    /// `Y + H.c.`
    Y,
    /// `ω^{5/2} X Z† + H.c.`
    XZdag,
}

impl DefectTerm {
    /// The unitary whose Hermitian part is the strong term.
    pub fn operator(self, n: usize, q: usize) -> PhasedPauli {
        match self {
            DefectTerm::Y => PhasedPauli::y(n, q),
            // ζ⁵ X Z³ = ζ⁵ ω⁻³ Z³ X
            DefectTerm::XZdag => PhasedPauli::single(n, q, 3, 1).with_phase(7),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectLine {
    pub anchor: (usize, usize),
    pub qudits_on_line: Vec<usize>,
    pub term_types: Vec<DefectTerm>,
    /// All double plaquettes `(hexagon, triangle)` in line order; the first and
    /// last lie on the edges just beyond the line ends.
    pub double_plaquettes: Vec<(usize, usize)>,
    pub endpoint_plaquettes: [(usize, usize); 2],
    /// Hexagons whose `S_P = E_P` is dropped.
    pub removed_stabilizers: Vec<usize>,
    pub pentagon_stabilizers: Vec<PhasedPauli>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Logical {
    pub name: String,
    pub word: PhasedPauli,
}

/// A single-qudit move that transfers charge between exactly two generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveEdge {
    pub qudit: usize,
    pub a: u8,
    pub b: u8,
    pub ends: [usize; 2],
    /// Charge `(Z^aX^b, generator)` at each end; always a unit.
    pub charges: [u8; 2],
}

impl MoveEdge {
    pub fn other(&self, node: usize) -> usize {
        if self.ends[0] == node {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }

    pub fn charge_at(&self, node: usize) -> u8 {
        if self.ends[0] == node {
            self.charges[0]
        } else {
            self.charges[1]
        }
    }
}

/// Generators as nodes, elementary moves as unit-weight edges.
#[derive(Debug, Clone)]
pub struct MoveGraph {
    pub edges: Vec<MoveEdge>,
    pub adj: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct KagomeCode {
    l: usize,
    hexagons: Vec<[usize; 6]>,
    triangles: Vec<Vec<usize>>,
    e_words: Vec<PhasedPauli>,
    m_words: Vec<PhasedPauli>,
    phi: Vec<usize>,
    lines: Vec<DefectLine>,
    active: Vec<bool>,
    gens: Vec<Generator>,
    qudit_gens: Vec<Vec<usize>>,
    logicals: Vec<Logical>,
    moves: MoveGraph,
}

fn inv4(c: u8) -> u8 {
    debug_assert!(c % 2 == 1);
    c
}

impl KagomeCode {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_qudits(&self) -> usize {
        3 * self.l * self.l
    }

    pub fn n_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Physical spins on active qudits (two qubits each).
    pub fn n_active_spins(&self) -> usize {
        2 * self.n_active()
    }

    pub fn qudit(&self, i: isize, j: isize, s: usize) -> usize {
        let l = self.l as isize;
        3 * (i.rem_euclid(l) as usize * self.l + j.rem_euclid(l) as usize) + s
    }

    pub fn hex_index(&self, i: isize, j: isize) -> usize {
        let l = self.l as isize;
        i.rem_euclid(l) as usize * self.l + j.rem_euclid(l) as usize
    }

    pub fn tri_index(&self, i: isize, j: isize, o: Orientation) -> usize {
        2 * self.hex_index(i, j) + if o == Orientation::Up { 0 } else { 1 }
    }

    pub fn tri_orientation(&self, t: usize) -> Orientation {
        if t % 2 == 0 {
            Orientation::Up
        } else {
            Orientation::Down
        }
    }

    pub fn hexagons(&self) -> &[[usize; 6]] {
        &self.hexagons
    }

    pub fn triangles(&self) -> &[Vec<usize>] {
        &self.triangles
    }

    pub fn e_word(&self, h: usize) -> &PhasedPauli {
        &self.e_words[h]
    }

    pub fn m_word(&self, t: usize) -> &PhasedPauli {
        &self.m_words[t]
    }

    pub fn phi(&self) -> &[usize] {
        &self.phi
    }

    pub fn defect_lines(&self) -> &[DefectLine] {
        &self.lines
    }

    pub fn is_active(&self, q: usize) -> bool {
        self.active[q]
    }

    pub fn active_qudits(&self) -> Vec<usize> {
        (0..self.n_qudits()).filter(|&q| self.active[q]).collect()
    }

    /// Active stabilizer generators used for syndromes and decoding.
    pub fn generators(&self) -> &[Generator] {
        &self.gens
    }

    /// Generators acting nontrivially on active qudit `q`.
    pub fn generators_at(&self, q: usize) -> &[usize] {
        &self.qudit_gens[q]
    }

    pub fn logicals(&self) -> &[Logical] {
        &self.logicals
    }

    pub fn logical(&self, name: &str) -> Result<&PhasedPauli> {
        self.logicals
            .iter()
            .find(|l| l.name == name)
            .map(|l| &l.word)
            .ok_or_else(|| Error::UnknownLogical(name.to_string()))
    }

    pub fn move_graph(&self) -> &MoveGraph {
        &self.moves
    }

    /// Conjugate partner used for failure verdicts: `X1 ↔ Z1`, etc.
    pub fn partner(name: &str) -> Option<String> {
        let mut c = name.chars();
        let first = c.next()?;
        let rest: String = c.collect();
        match first {
            'X' => Some(format!("Z{rest}")),
            'Z' => Some(format!("X{rest}")),
            _ => None,
        }
    }

    /// Every defect term on every line.
    pub fn defect_terms(&self) -> Vec<PhasedPauli> {
        let n = self.n_qudits();
        self.lines
            .iter()
            .flat_map(|ln| ln.qudits_on_line.iter().zip(&ln.term_types).map(move |(&q, t)| t.operator(n, q)))
            .collect()
    }
}

/// Defect-free code on an `L × L` torus of unit cells.
pub fn build(l: usize) -> Result<KagomeCode> {
    if l < 4 || l % 2 == 1 {
        return Err(Error::InvalidSize(l));
    }
    let n = 3 * l * l;
    let mut code = KagomeCode {
        l,
        hexagons: Vec::with_capacity(l * l),
        triangles: Vec::with_capacity(2 * l * l),
        e_words: Vec::new(),
        m_words: Vec::new(),
        phi: Vec::new(),
        lines: Vec::new(),
        active: vec![true; n],
        gens: Vec::new(),
        qudit_gens: Vec::new(),
        logicals: Vec::new(),
        moves: MoveGraph { edges: Vec::new(), adj: Vec::new() },
    };
    for i in 0..l as isize {
        for j in 0..l as isize {
            let hex = [
                code.qudit(i, j + 1, SUB_B),
                code.qudit(i, j + 1, SUB_A),
                code.qudit(i, j, SUB_C),
                code.qudit(i, j, SUB_B),
                code.qudit(i + 1, j, SUB_A),
                code.qudit(i + 1, j, SUB_C),
            ];
            code.hexagons.push(hex);
            let factors: Vec<(usize, u8, u8)> =
                hex.iter().enumerate().map(|(k, &q)| (q, 0, if k % 2 == 0 { 1 } else { 3 })).collect();
            code.e_words.push(PhasedPauli::from_sparse(n, 0, &factors));
            let up = vec![code.qudit(i, j, SUB_A), code.qudit(i, j, SUB_B), code.qudit(i, j, SUB_C)];
            let down = vec![code.qudit(i, j, SUB_A), code.qudit(i - 1, j, SUB_B), code.qudit(i, j - 1, SUB_C)];
            let upw: Vec<_> = up.iter().map(|&q| (q, 1, 0)).collect();
            let downw: Vec<_> = down.iter().map(|&q| (q, 3, 0)).collect();
            code.m_words.push(PhasedPauli::from_sparse(n, 0, &upw));
            code.m_words.push(PhasedPauli::from_sparse(n, 0, &downw));
            code.triangles.push(up);
            code.triangles.push(down);
        }
    }
    code.phi = (0..l as isize)
        .flat_map(|i| (0..l as isize).map(move |j| (i, j)))
        .map(|(i, j)| code.tri_index(i + 1, j + 1, Orientation::Down))
        .collect();
    code.rebuild()?;
    Ok(code)
}

/// Code with the default pair of parallel defect lines of `L/2 + 1` qudits,
/// separated by `L/2` cells along a₁.
pub fn build_with_defects(l: usize) -> Result<KagomeCode> {
    if l < 8 {
        return Err(Error::InvalidDefect(format!("default defect layout needs L ≥ 8, got {l}")));
    }
    let code = build(l)?;
    let len = l / 2 + 1;
    let y0 = l / 4;
    let x0 = l / 2 - 1;
    let code = add_defect_line(&code, (x0, y0), len)?;
    add_defect_line(&code, (x0 + l / 2, y0), len)
}

/// Sites `s_{-1}, s_0, …, s_len` of a line whose first site is C(anchor).
fn line_sites(code: &KagomeCode, anchor: (usize, usize), len: usize) -> Vec<usize> {
    let (x0, y0) = (anchor.0 as isize, anchor.1 as isize);
    let site = |m: isize| -> usize {
        if m.rem_euclid(2) == 0 {
            let k = m.div_euclid(2);
            code.qudit(x0 - k, y0 + k, SUB_C)
        } else {
            let k = (m - 1).div_euclid(2);
            code.qudit(x0 - k - 1, y0 + k + 1, SUB_B)
        }
    };
    (-1..=len as isize).map(site).collect()
}

/// Double plaquette on the line edge between sites `m` and `m+1`.
fn line_double_plaquette(code: &KagomeCode, anchor: (usize, usize), m: isize) -> (usize, usize) {
    let (x0, y0) = (anchor.0 as isize, anchor.1 as isize);
    if m.rem_euclid(2) == 0 {
        // C(x,y) – B(x−1,y+1): top-right pair (h(x−1,y), down(x,y+1)).
        let k = m.div_euclid(2);
        let (x, y) = (x0 - k, y0 + k);
        (code.hex_index(x - 1, y), code.tri_index(x, y + 1, Orientation::Down))
    } else {
        // B(x−1,y+1) – C(x−1,y+1): bottom-left pair (h(x−1,y+1), up(x−1,y+1)).
        let k = (m - 1).div_euclid(2);
        let (x, y) = (x0 - k, y0 + k);
        (code.hex_index(x - 1, y + 1), code.tri_index(x - 1, y + 1, Orientation::Up))
    }
}

/// Adds a defect line of `length` qudits whose first site is C(anchor).
pub fn add_defect_line(code: &KagomeCode, anchor: (usize, usize), length: usize) -> Result<KagomeCode> {
    let l = code.l;
    if anchor.0 >= l || anchor.1 >= l {
        return Err(Error::InvalidDefect(format!("anchor {anchor:?} outside the {l}×{l} lattice")));
    }
    if length < 2 {
        return Err(Error::InvalidDefect("a line needs at least two qudits".into()));
    }
    let sites = line_sites(code, anchor, length);
    let distinct: BTreeSet<_> = sites.iter().collect();
    if distinct.len() != sites.len() {
        return Err(Error::InvalidDefect("line touches its own periodic image".into()));
    }
    let on_line = sites[1..=length].to_vec();
    let dps: Vec<(usize, usize)> = (-1..length as isize).map(|m| line_double_plaquette(code, anchor, m)).collect();
    let hexes: BTreeSet<_> = dps.iter().map(|d| d.0).collect();
    let tris: BTreeSet<_> = dps.iter().map(|d| d.1).collect();
    if hexes.len() != dps.len() || tris.len() != dps.len() {
        return Err(Error::InvalidDefect("line touches its own periodic image".into()));
    }
    // Every plaquette touching the line must belong to this line alone.
    let mut touched: BTreeSet<usize> = BTreeSet::new();
    for &(h, t) in &dps {
        touched.extend(code.hexagons[h].iter());
        touched.extend(code.triangles[t].iter());
    }
    for other in &code.lines {
        let mut other_touched: BTreeSet<usize> = BTreeSet::new();
        for &(h, t) in &other.double_plaquettes {
            other_touched.extend(code.hexagons[h].iter());
            other_touched.extend(code.triangles[t].iter());
            if hexes.contains(&h) || tris.contains(&t) {
                return Err(Error::InvalidDefect("overlapping defect lines".into()));
            }
        }
        if on_line.iter().any(|q| other_touched.contains(q)) || other.qudits_on_line.iter().any(|q| touched.contains(q)) {
            return Err(Error::InvalidDefect("overlapping defect lines".into()));
        }
    }
    for &q in &on_line {
        let hex_count = hexes.iter().filter(|&&h| code.hexagons[h].contains(&q)).count();
        let tri_count = tris.iter().filter(|&&t| code.triangles[t].contains(&q)).count();
        if hex_count != 2 || tri_count != 2 {
            return Err(Error::InvalidDefect("line qudit not enclosed by its double plaquettes".into()));
        }
    }

    let term_types: Vec<DefectTerm> = (0..length).map(|m| if m % 2 == 0 { DefectTerm::XZdag } else { DefectTerm::Y }).collect();
    let mut pentagons = Vec::with_capacity(dps.len());
    for &(h, t) in &dps {
        pentagons.push(multiply(&code.m_words[t], &code.e_words[h].inverse())?);
    }
    let mut next = code.clone();
    let line_idx = next.lines.len();
    for &q in &on_line {
        next.active[q] = false;
    }
    for &(h, t) in &dps {
        next.phi[h] = t;
    }
    next.lines.push(DefectLine {
        anchor,
        qudits_on_line: on_line,
        term_types,
        endpoint_plaquettes: [dps[0], dps[dps.len() - 1]],
        removed_stabilizers: dps.iter().map(|d| d.0).collect(),
        double_plaquettes: dps,
        pentagon_stabilizers: pentagons,
    });
    debug_assert_eq!(line_idx + 1, next.lines.len());
    next.rebuild()?;
    Ok(next)
}

impl KagomeCode {
    /// Recomputes the active generator list, incidences, move graph and
    /// logical representatives.
    fn rebuild(&mut self) -> Result<()> {
        let n = self.n_qudits();
        let mut line_hex = vec![None; self.hexagons.len()];
        let mut line_tri = vec![None; self.triangles.len()];
        for (li, ln) in self.lines.iter().enumerate() {
            for (k, &(h, t)) in ln.double_plaquettes.iter().enumerate() {
                line_hex[h] = Some((li, k));
                line_tri[t] = Some((li, k));
            }
        }
        let mut gens = Vec::new();
        let active_sites = |w: &PhasedPauli, active: &[bool]| -> Vec<usize> {
            w.support().into_iter().filter(|&q| active[q]).collect()
        };
        for h in 0..self.hexagons.len() {
            if line_hex[h].is_none() {
                let w = self.e_words[h].clone();
                gens.push(Generator { kind: GenKind::Hexagon(h), sites: active_sites(&w, &self.active), word: w });
            }
        }
        for t in 0..self.triangles.len() {
            if line_tri[t].is_none() {
                let w = self.m_words[t].clone();
                gens.push(Generator { kind: GenKind::Triangle(t), sites: active_sites(&w, &self.active), word: w });
            }
        }
        for (li, ln) in self.lines.iter().enumerate() {
            for (k, &(h, t)) in ln.double_plaquettes.iter().enumerate() {
                let w = ln.pentagon_stabilizers[k].clone();
                gens.push(Generator {
                    kind: GenKind::Pentagon { hex: h, tri: t, line: li },
                    sites: active_sites(&w, &self.active),
                    word: w,
                });
            }
        }
        for g in &gens {
            for q in g.word.support() {
                if !self.active[q] && !matches!(g.kind, GenKind::Pentagon { .. }) {
                    return Err(Error::InvalidDefect("a plain generator acts on a defect qudit".into()));
                }
            }
        }
        let mut qudit_gens = vec![Vec::new(); n];
        for (gi, g) in gens.iter().enumerate() {
            for &q in &g.sites {
                qudit_gens[q].push(gi);
            }
        }
        self.gens = gens;
        self.qudit_gens = qudit_gens;
        self.moves = self.build_move_graph();
        self.install_logicals()?;
        Ok(())
    }

    fn build_move_graph(&self) -> MoveGraph {
        let mut edges = Vec::new();
        for q in 0..self.n_qudits() {
            if !self.active[q] {
                continue;
            }
            for a in 0..4u8 {
                for b in 0..4u8 {
                    let neg = ((4 - a) & 3, (4 - b) & 3);
                    if (a, b) == (0, 0) || (a, b) > neg {
                        continue;
                    }
                    let mut hit = Vec::new();
                    for &gi in &self.qudit_gens[q] {
                        let (c, d) = self.gens[gi].word.local(q);
                        let ch = ((4 * 4 + a as u32 * d as u32 - b as u32 * c as u32) % 4) as u8;
                        if ch != 0 {
                            hit.push((gi, ch));
                        }
                    }
                    if hit.len() == 2 && hit.iter().all(|&(_, c)| c % 2 == 1) {
                        edges.push(MoveEdge { qudit: q, a, b, ends: [hit[0].0, hit[1].0], charges: [hit[0].1, hit[1].1] });
                    }
                }
            }
        }
        let mut adj = vec![Vec::new(); self.gens.len()];
        for (k, e) in edges.iter().enumerate() {
            adj[e.ends[0]].push(k);
            adj[e.ends[1]].push(k);
        }
        MoveGraph { edges, adj }
    }

    fn install_logicals(&mut self) -> Result<()> {
        let n = self.n_qudits();
        let l = self.l as isize;
        // A defect-free logical commutes with every E and M, hence with every
        // R = M E†; it only has to stay off the inactive line qudits.
        let active = self.active.clone();
        let clear = |w: &PhasedPauli| w.support().iter().all(|&q| active[q]);
        let pick = |f: &dyn Fn(isize) -> PhasedPauli| -> Result<PhasedPauli> {
            (0..l)
                .map(f)
                .find(|w| clear(w))
                .ok_or_else(|| Error::InvalidDefect("no room for a torus logical away from the defect lines".into()))
        };
        // X̃₁: X on B, X† on A along row j. Z̃₁: Z on B along column i.
        let x1 = pick(&|j| {
            let f: Vec<_> = (0..l).flat_map(|i| [(self.qudit(i, j, SUB_B), 0, 1), (self.qudit(i, j, SUB_A), 0, 3)]).collect();
            PhasedPauli::from_sparse(n, 0, &f)
        })?;
        let z1 = pick(&|i| {
            let f: Vec<_> = (0..l).map(|j| (self.qudit(i, j, SUB_B), 1, 0)).collect();
            PhasedPauli::from_sparse(n, 0, &f)
        })?;
        // X̃₂: X on A, X† on C along column i. Z̃₂: Z† on C along row j.
        let x2 = pick(&|i| {
            let f: Vec<_> = (0..l).flat_map(|j| [(self.qudit(i, j, SUB_A), 0, 1), (self.qudit(i, j, SUB_C), 0, 3)]).collect();
            PhasedPauli::from_sparse(n, 0, &f)
        })?;
        let z2 = pick(&|j| {
            let f: Vec<_> = (0..l).map(|i| (self.qudit(i, j, SUB_C), 3, 0)).collect();
            PhasedPauli::from_sparse(n, 0, &f)
        })?;
        let mut logicals = vec![
            Logical { name: "X1".into(), word: x1 },
            Logical { name: "Z1".into(), word: z1 },
            Logical { name: "X2".into(), word: x2 },
            Logical { name: "Z2".into(), word: z2 },
        ];
        if self.lines.len() == 2 {
            // ψ occupancy of the first line: product of its double-plaquette
            // triangles, which has no support on the line itself.
            let mut zl = PhasedPauli::identity(n);
            for &(_, t) in &self.lines[0].double_plaquettes {
                zl = multiply(&zl, &self.m_words[t])?;
            }
            debug_assert!(zl.support().iter().all(|&q| self.active[q]));
            let mut basis: Vec<PhasedPauli> = vec![zl.clone()];
            basis.extend(logicals.iter().map(|lg| lg.word.clone()));
            let mut target = vec![1u8];
            target.extend(std::iter::repeat(0).take(logicals.len()));
            let xl = min_weight_in_class(self, &basis, &target, 0, 3 * self.l)
                .ok_or_else(|| Error::InvalidDefect("no logical operator crosses the defect lines".into()))?;
            let xl = match commutation_exponent(&zl, &xl)? {
                1 => xl,
                3 => xl.inverse(),
                e => return Err(Error::InvalidDefect(format!("line logical pair has commutation {e}"))),
            };
            logicals.push(Logical { name: "XL".into(), word: xl.word() });
            logicals.push(Logical { name: "ZL".into(), word: zl });
        }
        self.logicals = logicals;
        Ok(())
    }
}

/// S/R generators: `S_p = E_p` for hexagons not carrying a line double
/// plaquette; `R_p = M_p E†_{φ⁻¹(p)}` for triangles in the image of φ and
/// `M_p` otherwise.
pub fn transform_stabilizers(code: &KagomeCode) -> Result<(Vec<PhasedPauli>, Vec<PhasedPauli>)> {
    let nh = code.hexagons.len();
    let mut inverse = vec![None; code.triangles.len()];
    for h in 0..nh {
        let t = code.phi[h];
        let shared = code.hexagons[h].iter().filter(|q| code.triangles[t].contains(q)).count();
        if shared != 2 {
            return Err(Error::InvalidArgument(format!("φ maps hexagon {h} to non-adjacent triangle {t}")));
        }
        if inverse[t].replace(h).is_some() {
            return Err(Error::InvalidArgument(format!("φ is not injective at triangle {t}")));
        }
    }
    let removed: BTreeSet<usize> = code.lines.iter().flat_map(|ln| ln.removed_stabilizers.iter().copied()).collect();
    let s: Vec<PhasedPauli> = (0..nh).filter(|h| !removed.contains(h)).map(|h| code.e_words[h].clone()).collect();
    let mut r = Vec::with_capacity(code.triangles.len());
    for t in 0..code.triangles.len() {
        match inverse[t] {
            Some(h) => r.push(multiply(&code.m_words[t], &code.e_words[h].inverse())?),
            None => r.push(code.m_words[t].clone()),
        }
    }
    Ok((s, r))
}

/// Invariant factors of an integer matrix over ℤ₄: `(units, twos)` where the
/// Smith form has `units` entries equal to 1 and `twos` entries equal to 2.
pub fn z4_invariants(mut rows: Vec<Vec<u8>>) -> (usize, usize) {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut units = 0;
    let mut col_done = vec![false; ncols];
    let mut r0 = 0;
    // Unit pivots first.
    loop {
        let mut piv = None;
        'search: for c in 0..ncols {
            if col_done[c] {
                continue;
            }
            for r in r0..rows.len() {
                if rows[r][c] % 2 == 1 {
                    piv = Some((r, c));
                    break 'search;
                }
            }
        }
        let Some((pr, pc)) = piv else { break };
        rows.swap(r0, pr);
        let inv = inv4(rows[r0][pc]);
        for v in rows[r0].iter_mut() {
            *v = (*v * inv) & 3;
        }
        let pivot = rows[r0].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == r0 || row[pc] == 0 {
                continue;
            }
            let f = row[pc];
            for (v, &p) in row.iter_mut().zip(&pivot) {
                *v = (*v + 4 * 4 - f * p) & 3;
            }
        }
        col_done[pc] = true;
        units += 1;
        r0 += 1;
    }
    // Remaining entries are even; halve and take the rank over GF(2).
    let mut rest: Vec<Vec<u8>> = rows[r0..]
        .iter()
        .map(|row| (0..ncols).filter(|&c| !col_done[c]).map(|c| (row[c] >> 1) & 1).collect())
        .collect();
    let m = rest.first().map_or(0, |r| r.len());
    let mut twos = 0;
    for c in 0..m {
        if let Some(p) = (twos..rest.len()).find(|&r| rest[r][c] == 1) {
            rest.swap(twos, p);
            let pivot = rest[twos].clone();
            for (r, row) in rest.iter_mut().enumerate() {
                if r != twos && row[c] == 1 {
                    for (v, &pv) in row.iter_mut().zip(&pivot) {
                        *v ^= pv;
                    }
                }
            }
            twos += 1;
        }
    }
    (units, twos)
}

/// `(units, twos)` invariant factors of the active generator matrix, with
/// columns restricted to active qudits.
pub fn generator_rank(code: &KagomeCode) -> (usize, usize) {
    let act = code.active_qudits();
    let rows: Vec<Vec<u8>> = code
        .gens
        .iter()
        .map(|g| {
            let mut r: Vec<u8> = act.iter().map(|&q| g.word.z_exps()[q]).collect();
            r.extend(act.iter().map(|&q| g.word.x_exps()[q]));
            r
        })
        .collect();
    z4_invariants(rows)
}

/// Number of encoded qudits, valid when the generator matrix has no
/// 2-torsion.
pub fn logical_qudit_count(code: &KagomeCode) -> usize {
    let (u, t) = generator_rank(code);
    debug_assert_eq!(t, 0);
    code.n_active() - u
}

/// Pairs of generators sharing a qudit whose symplectic form is nonzero.
pub fn noncommuting_generator_pairs(code: &KagomeCode) -> Vec<(usize, usize)> {
    let mut bad = BTreeSet::new();
    let mut by_site: HashMap<usize, Vec<usize>> = HashMap::new();
    for (gi, g) in code.gens.iter().enumerate() {
        for q in g.word.support() {
            by_site.entry(q).or_default().push(gi);
        }
    }
    for list in by_site.values() {
        for (x, &gi) in list.iter().enumerate() {
            for &gj in &list[x + 1..] {
                let (a, b) = (&code.gens[gi], &code.gens[gj]);
                let sites: Vec<usize> = a.word.support();
                if a.word.commutation_on(&b.word, &sites) != 0 {
                    bad.insert((gi.min(gj), gi.max(gj)));
                }
            }
        }
    }
    bad.into_iter().collect()
}

/// Deterministic text description of the code.
pub fn describe(code: &KagomeCode) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kagome L={} qudits={} active={}", code.l, code.n_qudits(), code.n_active());
    for (h, hex) in code.hexagons.iter().enumerate() {
        let _ = writeln!(s, "hexagon {h} sites {:?} phi {}", hex, code.phi[h]);
    }
    for (t, tri) in code.triangles.iter().enumerate() {
        let _ = writeln!(s, "triangle {t} {:?} sites {:?}", code.tri_orientation(t), tri);
    }
    for (li, ln) in code.lines.iter().enumerate() {
        let _ = writeln!(s, "line {li} anchor {:?} qudits {:?} terms {:?}", ln.anchor, ln.qudits_on_line, ln.term_types);
        let _ = writeln!(s, "line {li} double_plaquettes {:?}", ln.double_plaquettes);
    }
    for (gi, g) in code.gens.iter().enumerate() {
        let _ = writeln!(s, "generator {gi} {:?} {}", g.kind, g.word);
    }
    for lg in &code.logicals {
        let _ = writeln!(s, "logical {} {}", lg.name, lg.word);
    }
    s
}

fn pack_add(label: u32, inc: u32, lanes: usize) -> u32 {
    let mut out = 0;
    for k in 0..lanes {
        let v = ((label >> (2 * k)) + (inc >> (2 * k))) & 3;
        out |= v << (2 * k);
    }
    out
}

fn pack_scale(v: &[u8], m: u8) -> u32 {
    v.iter().enumerate().fold(0, |acc, (k, &x)| acc | ((((x as u32) * (m as u32)) & 3) << (2 * k)))
}

/// Shortest closed charge-transport walk on the move graph whose operator has
/// commutation vector `±target` against `basis`. The walk must use a move
/// that fails to commute with `basis[cut]`. Returns the walk's operator.
///
/// States are (generator, carried charge, label); a walk closes when the
/// carried charge returns to its start with the same value. Walks carry a
/// single anyon, so this is exact for loops of one species (which may still
/// convert at defect lines).
pub fn min_weight_walk(
    code: &KagomeCode,
    basis: &[PhasedPauli],
    target: &[u8],
    cut: usize,
    max_len: Option<usize>,
) -> Option<PhasedPauli> {
    let lanes = basis.len();
    assert!(lanes <= 6 && target.len() == lanes);
    let mg = &code.moves;
    let g = code.gens.len();
    let nlabels = 1usize << (2 * lanes);
    let t_plus = pack_scale(target, 1);
    let t_minus = pack_scale(target, 3);
    let edge_vec: Vec<Vec<u8>> =
        mg.edges.iter().map(|e| basis.iter().map(|b| local_charge(b, e.qudit, e.a, e.b)).collect()).collect();
    let edge_inc: Vec<[u32; 4]> =
        edge_vec.iter().map(|v| [0, pack_scale(v, 1), pack_scale(v, 2), pack_scale(v, 3)]).collect();
    let mut starts: BTreeSet<usize> = BTreeSet::new();
    for (k, e) in mg.edges.iter().enumerate() {
        if edge_vec[k][cut] != 0 {
            starts.insert(e.ends[0]);
            starts.insert(e.ends[1]);
        }
    }
    let state = |node: usize, carried: u8, label: u32| -> usize {
        (node * 2 + (carried as usize >> 1)) * nlabels + label as usize
    };
    let nstates = g * 2 * nlabels;
    let mut stamp = vec![0u32; nstates];
    let mut parent = vec![(u32::MAX, u32::MAX, 0u8); nstates];
    let mut best: Option<(usize, PhasedPauli)> = None;
    let mut generation = 0u32;
    for &s in &starts {
        generation += 1;
        let limit = best.as_ref().map(|b| b.0).or(max_len).unwrap_or(usize::MAX);
        let mut queue = std::collections::VecDeque::new();
        let s0 = state(s, 1, 0);
        stamp[s0] = generation;
        queue.push_back((s, 1u8, 0u32, 0usize));
        let mut found = None;
        'bfs: while let Some((u, c, lab, d)) = queue.pop_front() {
            if d >= limit {
                break;
            }
            for &k in &mg.adj[u] {
                let e = &mg.edges[k];
                let m = ((4 - (c as u32 * inv4(e.charge_at(u)) as u32) % 4) % 4) as u8;
                let v = e.other(u);
                let cv = ((m as u32 * e.charge_at(v) as u32) % 4) as u8;
                let nl = pack_add(lab, edge_inc[k][m as usize], lanes);
                let st = state(v, cv, nl);
                if v == s && cv == 1 && (nl == t_plus || nl == t_minus) {
                    parent[st] = (state(u, c, lab) as u32, k as u32, m);
                    found = Some(st);
                    break 'bfs;
                }
                if stamp[st] != generation {
                    stamp[st] = generation;
                    parent[st] = (state(u, c, lab) as u32, k as u32, m);
                    queue.push_back((v, cv, nl, d + 1));
                }
            }
        }
        if let Some(end) = found {
            let mut w = PhasedPauli::identity(code.n_qudits());
            let mut st = end;
            loop {
                let (prev, k, m) = parent[st];
                let e = &mg.edges[k as usize];
                w.mul_right_local(e.qudit, (e.a * m) & 3, (e.b * m) & 3);
                st = prev as usize;
                if st == s0 {
                    break;
                }
            }
            let weight = w.weight();
            if best.as_ref().map_or(true, |b| weight < b.0) {
                best = Some((weight, w));
            }
        }
    }
    best.map(|b| b.1)
}

/// Charged generators allowed at once while growing a line-to-line string:
/// one anyon, or an e and an m travelling together.
const STRING_MAX_CHARGES: usize = 2;
const GEN_BITS: u32 = 11;
const ENTRY_BITS: u32 = GEN_BITS + 2;

/// Charged generators `(gen, charge)` sorted by generator, plus the packed
/// commutation label.
#[derive(Clone)]
struct Frontier {
    entries: Vec<(u16, u8)>,
    label: u32,
}

impl Frontier {
    fn key(&self) -> u128 {
        let mut k: u128 = 0;
        for (x, &(g, c)) in self.entries.iter().enumerate() {
            k |= ((g as u128) | ((c as u128) << GEN_BITS)) << (ENTRY_BITS * x as u32);
        }
        k | ((self.label as u128) << 64)
    }
}

fn local_charge(gen: &PhasedPauli, q: usize, a: u8, b: u8) -> u8 {
    let (c, d) = gen.local(q);
    ((4 * 4 + a as u32 * d as u32 - b as u32 * c as u32) % 4) as u8
}

/// All-pairs hop counts on the move graph; `u16::MAX` marks unreachable.
pub fn move_distances(code: &KagomeCode) -> Vec<u16> {
    let g = code.gens.len();
    let mg = &code.moves;
    let mut dist = vec![u16::MAX; g * g];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..g {
        let row = &mut dist[s * g..(s + 1) * g];
        row[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &k in &mg.adj[u] {
                let v = mg.edges[k].other(u);
                if row[v] == u16::MAX {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

/// Shortest operator with commutation vector `±target` against `basis` that
/// is a string between defect lines: it starts and ends where pentagon
/// generators absorb ψ = e × m.
///
/// The string grows one single-qudit operator at a time from a pentagon
/// site. Each later operator clears a charge, and at most two generators are
/// charged at once, so e and m may travel together (one operator per step)
/// or apart. States are expanded in order of `weight + bound`, the bound
/// being the largest move-graph distance from a charge to the nearest
/// pentagon or other charge. Returns `None` if nothing is found within
/// `max_weight` operators or the code has no defect lines.
pub fn min_weight_line_string(
    code: &KagomeCode,
    basis: &[PhasedPauli],
    target: &[u8],
    max_weight: usize,
) -> Option<PhasedPauli> {
    let lanes = basis.len();
    assert!(lanes <= 6 && target.len() == lanes);
    assert!(code.gens.len() < (1 << GEN_BITS), "too many generators for the string search");
    let n = code.n_qudits();
    let g = code.gens.len();
    let pentagons: Vec<usize> = (0..g).filter(|&k| matches!(code.gens[k].kind, GenKind::Pentagon { .. })).collect();
    if pentagons.is_empty() {
        return None;
    }
    let dist = move_distances(code);
    let to_pentagon: Vec<u16> =
        (0..g).map(|u| pentagons.iter().map(|&p| dist[u * g + p]).min().unwrap_or(u16::MAX)).collect();
    let bound = |f: &Frontier| -> usize {
        let mut h = 0usize;
        for (x, e) in f.entries.iter().enumerate() {
            let u = e.0 as usize;
            let mut best = to_pentagon[u] as usize;
            for (y, o) in f.entries.iter().enumerate() {
                if x != y {
                    best = best.min(dist[u * g + o.0 as usize] as usize);
                }
            }
            h = h.max(best);
        }
        h
    };
    let t_plus = pack_scale(target, 1);
    let t_minus = pack_scale(target, 3);
    let label_inc = |q: usize, a: u8, b: u8| -> u32 {
        let v: Vec<u8> = basis.iter().map(|bw| local_charge(bw, q, a, b)).collect();
        pack_scale(&v, 1)
    };
    let ops: Vec<(u8, u8)> = (0..16u8).map(|k| (k >> 2, k & 3)).filter(|&p| p != (0, 0)).collect();
    // key -> (weight, parent key, qudit, a, b); the empty start is key 0.
    let mut seen: HashMap<u128, (usize, u128, u32, u8, u8)> = HashMap::new();
    let mut buckets: Vec<Vec<Vec<Frontier>>> = vec![vec![Vec::new(); max_weight + 2]; max_weight + 2];
    let rebuild = |seen: &HashMap<u128, (usize, u128, u32, u8, u8)>, mut key: u128| -> PhasedPauli {
        let mut w = PhasedPauli::identity(n);
        while key != 0 {
            let (_, parent, q, a, b) = seen[&key];
            w.mul_left_local(q as usize, a, b);
            key = parent;
        }
        w
    };
    let mut start_sites: Vec<usize> = pentagons.iter().flat_map(|&p| code.gens[p].sites.iter().copied()).collect();
    start_sites.sort_unstable();
    start_sites.dedup();
    let mut charge_buf: Vec<(u16, u8)> = Vec::with_capacity(8);
    let empty = Frontier { entries: Vec::new(), label: 0 };
    buckets[0][0].push(empty);
    for fcost in 0..=max_weight {
        // Deeper states first within a bucket: they are closer to a goal.
        loop {
            let Some(w) = (0..=max_weight).rev().find(|&w| !buckets[fcost][w].is_empty()) else { break };
            let f = buckets[fcost][w].pop().expect("nonempty");
            let key = f.key();
            if w > 0 {
                if seen.get(&key).map_or(true, |s| s.0 < w) {
                    continue;
                }
                if f.entries.is_empty() {
                    if f.label == t_plus || f.label == t_minus {
                        return Some(rebuild(&seen, key));
                    }
                    // A closed string in the wrong class is never extended.
                    continue;
                }
            }
            let sites: Vec<usize> = if f.entries.is_empty() {
                start_sites.clone()
            } else {
                let mut v: Vec<usize> =
                    f.entries.iter().flat_map(|e| code.gens[e.0 as usize].sites.iter().copied()).collect();
                v.sort_unstable();
                v.dedup();
                v
            };
            for &q in &sites {
                for &(a, b) in &ops {
                    charge_buf.clear();
                    charge_buf.extend_from_slice(&f.entries);
                    for &k in &code.qudit_gens[q] {
                        let c = local_charge(&code.gens[k].word, q, a, b);
                        if c == 0 {
                            continue;
                        }
                        match charge_buf.iter_mut().find(|e| e.0 as usize == k) {
                            Some(e) => e.1 = (e.1 + c) & 3,
                            None => charge_buf.push((k as u16, c)),
                        }
                    }
                    let cleared = charge_buf.iter().any(|e| e.1 == 0);
                    charge_buf.retain(|e| e.1 != 0);
                    if (w > 0 && !cleared) || charge_buf.len() > STRING_MAX_CHARGES {
                        continue;
                    }
                    charge_buf.sort_unstable_by_key(|e| e.0);
                    let nf = Frontier { entries: charge_buf.clone(), label: pack_add(f.label, label_inc(q, a, b), lanes) };
                    let nkey = nf.key();
                    let nw = w + 1;
                    if nkey == 0 || seen.get(&nkey).is_some_and(|s| s.0 <= nw) {
                        continue;
                    }
                    let fv = nw + bound(&nf);
                    if fv > max_weight {
                        continue;
                    }
                    seen.insert(nkey, (nw, key, q as u32, a, b));
                    buckets[fv.max(fcost)][nw].push(nf);
                }
            }
        }
    }
    None
}

/// True if `p` fails to commute with some defect-line logical installed on
/// `code`, or is itself one of them.
fn line_sensitive(code: &KagomeCode, p: &PhasedPauli) -> bool {
    code.logicals.iter().filter(|lg| lg.name.ends_with('L')).any(|lg| {
        lg.word.word() == p.word() || commutation_exponent(&lg.word, p).map_or(false, |c| c != 0)
    }) || (code.logicals.len() < 6 && !code.lines.is_empty())
}

/// Shortest member of the class `±target` found by either search: closed
/// single-anyon walks through `basis[cut]`, or strings between defect lines.
pub fn min_weight_in_class(
    code: &KagomeCode,
    basis: &[PhasedPauli],
    target: &[u8],
    cut: usize,
    max_weight: usize,
) -> Option<PhasedPauli> {
    let walk = min_weight_walk(code, basis, target, cut, Some(max_weight));
    let limit = walk.as_ref().map_or(max_weight, |w| w.weight().saturating_sub(1));
    // Strings between lines only matter for classes that see the line
    // logicals; torus classes are loops of a single anyon species.
    let line_class = basis.iter().zip(target).any(|(b, &t)| t != 0 && line_sensitive(code, b));
    let string = if line_class { min_weight_line_string(code, basis, target, limit) } else { None };
    string.or(walk)
}

/// Commutation vector of `p` against every installed logical.
pub fn logical_label(code: &KagomeCode, p: &PhasedPauli) -> Vec<u8> {
    code.logicals.iter().map(|lg| commutation_exponent(p, &lg.word).expect("equal lengths")).collect()
}

/// Minimum weight over the coset `logical · ⟨stabilizers⟩`, by the labeled
/// searches of [`min_weight_in_class`].
pub fn code_distance(code: &KagomeCode, logical_name: &str) -> Result<usize> {
    Ok(minimum_weight_representative(code, logical_name)?.weight())
}

/// A minimum-weight member of the named logical's coset.
pub fn minimum_weight_representative(code: &KagomeCode, logical_name: &str) -> Result<PhasedPauli> {
    let p = code.logical(logical_name)?.clone();
    let basis: Vec<PhasedPauli> = code.logicals.iter().map(|lg| lg.word.clone()).collect();
    let target = logical_label(code, &p);
    let cut = (0..basis.len())
        .filter(|&k| target[k] != 0)
        .min_by_key(|&k| basis[k].weight())
        .ok_or_else(|| Error::InvalidArgument("logical commutes with the whole logical basis".into()))?;
    let found = min_weight_in_class(code, &basis, &target, cut, p.weight())
        .map(|w| if w.weight() <= p.weight() { w } else { p.clone() });
    Ok(found.unwrap_or(p))
}

/// Exhaustive search over undetectable words of weight ≤ `max_weight` with
/// the named logical's commutation vector (or its negative). Returns the
/// minimum weight found.
pub fn brute_force_distance(code: &KagomeCode, logical_name: &str, max_weight: usize) -> Result<Option<usize>> {
    let p = code.logical(logical_name)?.clone();
    let basis: Vec<PhasedPauli> = code.logicals.iter().map(|lg| lg.word.clone()).collect();
    let target = logical_label(code, &p);
    let neg: Vec<u8> = target.iter().map(|&t| (4 - t) & 3).collect();
    let cut = (0..basis.len())
        .filter(|&k| target[k] != 0)
        .min_by_key(|&k| basis[k].weight())
        .ok_or_else(|| Error::InvalidArgument("logical commutes with the whole logical basis".into()))?;
    let n = code.n_qudits();
    let mut search = BruteForce {
        code,
        basis: &basis,
        target: &target,
        neg: &neg,
        charges: vec![0u8; code.gens.len()],
        word: PhasedPauli::identity(n),
        used: vec![false; n],
        best: None,
    };
    for w in 1..=max_weight {
        for q in basis[cut].support() {
            if !code.active[q] {
                continue;
            }
            for a in 0..4u8 {
                for b in 0..4u8 {
                    let (c, d) = basis[cut].local(q);
                    let comm = (4 * 4 + a as u32 * d as u32 - b as u32 * c as u32) % 4;
                    if comm == 0 {
                        continue;
                    }
                    search.push(q, a, b);
                    search.dfs(w - 1);
                    search.pop(q, a, b);
                    if search.best.is_some() {
                        return Ok(search.best);
                    }
                }
            }
        }
    }
    Ok(None)
}

struct BruteForce<'a> {
    code: &'a KagomeCode,
    basis: &'a [PhasedPauli],
    target: &'a [u8],
    neg: &'a [u8],
    charges: Vec<u8>,
    word: PhasedPauli,
    used: Vec<bool>,
    best: Option<usize>,
}

impl BruteForce<'_> {
    fn apply(&mut self, q: usize, a: u8, b: u8) {
        for &gi in &self.code.qudit_gens[q] {
            let (c, d) = self.code.gens[gi].word.local(q);
            let ch = ((4 * 4 + a as u32 * d as u32 - b as u32 * c as u32) % 4) as u8;
            self.charges[gi] = (self.charges[gi] + ch) & 3;
        }
        self.word.mul_right_local(q, a, b);
    }

    fn push(&mut self, q: usize, a: u8, b: u8) {
        self.used[q] = true;
        self.apply(q, a, b);
    }

    fn pop(&mut self, q: usize, a: u8, b: u8) {
        self.used[q] = false;
        self.apply(q, (4 - a) & 3, (4 - b) & 3);
    }

    fn dfs(&mut self, budget: usize) {
        if self.best.is_some() {
            return;
        }
        let charged = self.charges.iter().position(|&c| c != 0);
        match charged {
            None => {
                let label: Vec<u8> = self.basis.iter().map(|b| commutation_exponent(&self.word, b).expect("len")).collect();
                if label == self.target || label == self.neg {
                    self.best = Some(self.word.weight());
                    return;
                }
                if budget == 0 {
                    return;
                }
                // Closed but in the wrong class: start another component.
                for q in 0..self.code.n_qudits() {
                    if self.code.active[q] && !self.used[q] {
                        self.branch(q, budget);
                    }
                }
            }
            Some(gi) => {
                if budget == 0 {
                    return;
                }
                let sites = self.code.gens[gi].sites.clone();
                for q in sites {
                    if !self.used[q] {
                        self.branch(q, budget);
                    }
                }
            }
        }
    }

    fn branch(&mut self, q: usize, budget: usize) {
        for a in 0..4u8 {
            for b in 0..4u8 {
                if (a, b) == (0, 0) {
                    continue;
                }
                self.push(q, a, b);
                self.dfs(budget - 1);
                self.pop(q, a, b);
                if self.best.is_some() {
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_memberships() {
        let c = build(4).unwrap();
        assert_eq!(c.n_qudits(), 48);
        assert_eq!(c.triangles().len(), 32);
        assert_eq!(c.hexagons().len(), 16);
        for q in 0..48 {
            assert_eq!(c.hexagons().iter().filter(|h| h.contains(&q)).count(), 2);
            assert_eq!(c.triangles().iter().filter(|t| t.contains(&q)).count(), 2);
        }
        // Each triangle edge lies in exactly one hexagon.
        for t in c.triangles() {
            for x in 0..3 {
                let (p, q) = (t[x], t[(x + 1) % 3]);
                let hs = c.hexagons().iter().filter(|h| {
                    (0..6).any(|k| (h[k] == p && h[(k + 1) % 6] == q) || (h[k] == q && h[(k + 1) % 6] == p))
                });
                assert_eq!(hs.count(), 1);
            }
        }
    }

    #[test]
    fn size_validation() {
        assert_eq!(build(5).unwrap_err(), Error::InvalidSize(5));
        assert_eq!(build(2).unwrap_err(), Error::InvalidSize(2));
    }

    #[test]
    fn stabilizers_commute_and_rank() {
        for l in [4, 6] {
            let c = build(l).unwrap();
            assert!(noncommuting_generator_pairs(&c).is_empty());
            assert_eq!(generator_rank(&c), (3 * l * l - 2, 0));
            assert_eq!(logical_qudit_count(&c), 2);
        }
    }

    #[test]
    fn stabilizer_words_alternate() {
        let c = build(4).unwrap();
        for h in 0..16 {
            let e = c.e_word(h);
            let xs: Vec<u8> = c.hexagons()[h].iter().map(|&q| e.local(q).1).collect();
            assert_eq!(xs, vec![1, 3, 1, 3, 1, 3]);
        }
        for t in 0..32 {
            let want = if t % 2 == 0 { 1 } else { 3 };
            assert!(c.triangles()[t].iter().all(|&q| c.m_word(t).local(q) == (want, 0)));
        }
    }

    #[test]
    fn transformed_generators() {
        let c = build(4).unwrap();
        let (s, r) = transform_stabilizers(&c).unwrap();
        assert_eq!((s.len(), r.len()), (16, 32));
        let ps = s.iter().fold(PhasedPauli::identity(48), |acc, w| multiply(&acc, w).unwrap());
        let pr = r.iter().fold(PhasedPauli::identity(48), |acc, w| multiply(&acc, w).unwrap());
        assert!(ps.is_identity());
        assert!(pr.is_identity());
        let pentagons = r.iter().filter(|w| w.weight() == 7).count();
        assert_eq!(pentagons, 16);
        for a in s.iter().chain(&r) {
            for b in s.iter().chain(&r) {
                assert_eq!(commutation_exponent(a, b).unwrap(), 0);
            }
        }
    }

    #[test]
    fn logical_algebra_defect_free() {
        let c = build(6).unwrap();
        let g = |n: &str| c.logical(n).unwrap().clone();
        assert_eq!(commutation_exponent(&g("Z1"), &g("X1")).unwrap(), 1);
        assert_eq!(commutation_exponent(&g("Z2"), &g("X2")).unwrap(), 1);
        for (a, b) in [("X1", "X2"), ("X1", "Z2"), ("Z1", "X2"), ("Z1", "Z2")] {
            assert_eq!(commutation_exponent(&g(a), &g(b)).unwrap(), 0, "{a} {b}");
        }
        for lg in c.logicals() {
            for gen in c.generators() {
                assert_eq!(commutation_exponent(&lg.word, &gen.word).unwrap(), 0);
            }
        }
    }

    #[test]
    fn defect_lines_structure() {
        let c = build_with_defects(8).unwrap();
        assert_eq!(c.defect_lines().len(), 2);
        for ln in c.defect_lines() {
            assert_eq!(ln.qudits_on_line.len(), 5);
            assert_eq!(ln.double_plaquettes.len(), 6);
            for (q, t) in ln.qudits_on_line.iter().zip(&ln.term_types) {
                let term = t.operator(c.n_qudits(), *q);
                for g in c.generators() {
                    assert_eq!(commutation_exponent(&term, &g.word).unwrap(), 0);
                }
            }
        }
        assert!(noncommuting_generator_pairs(&c).is_empty());
        assert_eq!(generator_rank(&c).1, 0);
        assert_eq!(logical_qudit_count(&c), 3);
        let zl = c.logical("ZL").unwrap();
        let xl = c.logical("XL").unwrap();
        assert_eq!(commutation_exponent(zl, xl).unwrap(), 1);
        for lg in c.logicals() {
            for g in c.generators() {
                assert_eq!(commutation_exponent(&lg.word, &g.word).unwrap(), 0, "{}", lg.name);
            }
        }
    }

    #[test]
    fn overlapping_lines_rejected() {
        let c = build(8).unwrap();
        let c1 = add_defect_line(&c, (3, 2), 5).unwrap();
        assert!(matches!(add_defect_line(&c1, (3, 2), 5), Err(Error::InvalidDefect(_))));
        assert!(matches!(add_defect_line(&c1, (4, 2), 5), Err(Error::InvalidDefect(_))));
        assert!(matches!(add_defect_line(&c, (3, 2), 16), Err(Error::InvalidDefect(_))));
    }

    #[test]
    fn defect_free_distance_small() {
        let c = build(4).unwrap();
        assert_eq!(code_distance(&c, "Z1").unwrap(), 4);
        assert_eq!(brute_force_distance(&c, "Z1", 4).unwrap(), Some(4));
        assert_eq!(code_distance(&c, "X1").unwrap(), 8);
        assert!(matches!(code_distance(&c, "Q"), Err(Error::UnknownLogical(_))));
    }

    #[test]
    fn defect_distances_l8() {
        let c = build_with_defects(8).unwrap();
        // Z̃_L loops around one line; X̃_L is a ψ-string joining the lines.
        assert_eq!(code_distance(&c, "ZL").unwrap(), 8);
        assert_eq!(code_distance(&c, "XL").unwrap(), 9);
        assert_eq!(code_distance(&c, "Z1").unwrap(), 8);
    }

    #[test]
    fn description_is_deterministic() {
        let a = describe(&build(4).unwrap());
        let b = describe(&build(4).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("kagome L=4 qudits=48"));
    }

    #[test]
    fn z4_invariants_small() {
        assert_eq!(z4_invariants(vec![vec![2, 0], vec![0, 1]]), (1, 1));
        assert_eq!(z4_invariants(vec![vec![1, 1], vec![3, 3]]), (1, 0));
        assert_eq!(z4_invariants(vec![vec![2, 2], vec![2, 2]]), (0, 1));
    }
}
