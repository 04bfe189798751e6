//! Syndromes, the move-graph metric and two-round ℤ₄ decoding.
//!
//! Charges live on active generators; generator `g` carries `(F, g)` for the
//! frame `F`. Anyons hop between generators by elementary moves, the edges
//! of [`KagomeCode::move_graph`]. Carrying a charge `c` across an edge with
//! end charges `(κ, κ')` leaves `-c κ κ'` at the far end: the charge keeps
//! its value when `κ' = -κ` and is negated when `κ' = κ`. Negating edges only
//! occur next to defect lines, where they convert the anyon species; every
//! path therefore has a flip parity, and the metric is a breadth-first
//! search over `(generator, parity)` states.
//!
//! Decoding pairs odd charges first, fusing each pair at the path midpoint
//! where a residue of 0 or 2 remains, then pairs the remaining charge-2
//! anyons. An odd number of charge-2 anyons in one component is cleared by a
//! loop with odd flip parity.

use crate::kagome::{KagomeCode, MoveEdge, Species};
use crate::matching::{mwpm, WeightedGraph};
use crate::noise::ErrorFrame;
use crate::z4algebra::{commutation_exponent, PhasedPauli};
use crate::{Error, Result};

/// ℤ₄ charge per active generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeConfig {
    pub charges: Vec<u8>,
    /// Generators with charge 1 or 3.
    pub odd: Vec<usize>,
    /// Generators with charge 2.
    pub even: Vec<usize>,
}

impl SyndromeConfig {
    pub fn from_charges(charges: Vec<u8>) -> Self {
        let odd = (0..charges.len()).filter(|&g| charges[g] % 2 == 1).collect();
        let even = (0..charges.len()).filter(|&g| charges[g] == 2).collect();
        SyndromeConfig { charges, odd, even }
    }

    pub fn is_empty(&self) -> bool {
        self.odd.is_empty() && self.even.is_empty()
    }

    pub fn anyon_count(&self) -> usize {
        self.odd.len() + self.even.len()
    }
}

/// Charges of `word` on every active generator.
pub fn word_charges(code: &KagomeCode, word: &PhasedPauli) -> Vec<u8> {
    code.generators().iter().map(|g| (4 - g.word.commutation_on(word, &g.sites)) & 3).collect()
}

/// Recomputes the syndrome from the frame's word.
pub fn extract_syndrome(code: &KagomeCode, frame: &ErrorFrame) -> SyndromeConfig {
    SyndromeConfig::from_charges(word_charges(code, frame.word()))
}

/// True if carrying a charge across `e` negates it.
pub fn is_flip(e: &MoveEdge) -> bool {
    e.charges[0] == e.charges[1]
}

/// How odd anyons are grouped for matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// One matching per connected component of the move graph.
    Joint,
    /// Hexagon and triangle anyons matched independently. Only valid without
    /// defect lines.
    Separate,
}

const UNREACHED: u16 = u16::MAX;
const NO_EDGE: u32 = u32::MAX;
/// Weight standing in for an unreachable pair; larger than any path.
const FAR: i64 = 1 << 40;

/// All-pairs move metric with witness paths, built once per code.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    code: &'a KagomeCode,
    g: usize,
    /// `dist[s * 2g + 2v + p]`: fewest moves from `s` to `v` with flip parity `p`.
    dist: Vec<u16>,
    /// Last edge of a shortest such path.
    via: Vec<u32>,
    component: Vec<usize>,
}

impl<'a> Decoder<'a> {
    pub fn new(code: &'a KagomeCode) -> Self {
        let g = code.generators().len();
        let mg = code.move_graph();
        let mut dist = vec![UNREACHED; g * 2 * g];
        let mut via = vec![NO_EDGE; g * 2 * g];
        let mut queue = std::collections::VecDeque::new();
        for s in 0..g {
            let row = &mut dist[s * 2 * g..(s + 1) * 2 * g];
            let vrow = &mut via[s * 2 * g..(s + 1) * 2 * g];
            row[2 * s] = 0;
            queue.push_back(2 * s);
            while let Some(st) = queue.pop_front() {
                let (u, p) = (st / 2, st % 2);
                for &k in &mg.adj[u] {
                    let e = &mg.edges[k];
                    let next = 2 * e.other(u) + (p ^ is_flip(e) as usize);
                    if row[next] == UNREACHED {
                        row[next] = row[st] + 1;
                        vrow[next] = k as u32;
                        queue.push_back(next);
                    }
                }
            }
        }
        let mut component = vec![usize::MAX; g];
        for s in 0..g {
            if component[s] == usize::MAX {
                for v in 0..g {
                    if dist[s * 2 * g + 2 * v].min(dist[s * 2 * g + 2 * v + 1]) != UNREACHED {
                        component[v] = s;
                    }
                }
            }
        }
        Decoder { code, g, dist, via, component }
    }

    pub fn code(&self) -> &KagomeCode {
        self.code
    }

    /// Fewest moves from `u` to `v` with flip parity `parity`.
    pub fn distance(&self, u: usize, v: usize, parity: usize) -> Option<usize> {
        let d = self.dist[u * 2 * self.g + 2 * v + parity];
        (d != UNREACHED).then_some(d as usize)
    }

    /// Fewest moves from `u` to `v` over both parities, with the parity used.
    pub fn best(&self, u: usize, v: usize) -> Option<(usize, usize)> {
        let a = self.distance(u, v, 0).map(|d| (d, 0));
        let b = self.distance(u, v, 1).map(|d| (d, 1));
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
            (x, y) => x.or(y),
        }
    }

    /// Shortest odd-parity loop through `u`, which can absorb a lone charge 2.
    pub fn odd_loop(&self, u: usize) -> Option<usize> {
        self.distance(u, u, 1)
    }

    /// Representative of `u`'s connected component.
    pub fn component(&self, u: usize) -> usize {
        self.component[u]
    }

    /// Witness path from `u` to `v` with parity `parity`, as the visited
    /// generators `u = n₀, …, n_k = v` and the edges between them.
    pub fn path(&self, u: usize, v: usize, parity: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        self.distance(u, v, parity)?;
        let mg = self.code.move_graph();
        let mut nodes = vec![v];
        let mut edges = Vec::new();
        let (mut node, mut p) = (v, parity);
        while (node, p) != (u, 0) {
            let k = self.via[u * 2 * self.g + 2 * node + p] as usize;
            let e = &mg.edges[k];
            edges.push(k);
            p ^= is_flip(e) as usize;
            node = e.other(node);
            nodes.push(node);
        }
        nodes.reverse();
        edges.reverse();
        Some((nodes, edges))
    }

    /// Round-1 pairing cost and parity for odd charges `cu` at `u` and `cv`
    /// at `v`. The parity that fuses them to charge 0 wins ties.
    fn odd_pair(&self, u: usize, cu: u8, v: usize, cv: u8) -> Option<(usize, usize)> {
        // `cu` arrives as cu·(−1)^p, so parity 0 cancels exactly when cu = −cv.
        let clean = if (cu + cv) % 4 == 0 { 0 } else { 1 };
        let a = self.distance(u, v, clean).map(|d| (d, clean));
        let b = self.distance(u, v, 1 - clean).map(|d| (d, 1 - clean));
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
            (x, y) => x.or(y),
        }
    }

    /// Correction whose charges cancel `syn`.
    pub fn decode(&self, syn: &SyndromeConfig) -> Result<PhasedPauli> {
        self.decode_with(syn, MatchMode::Joint)
    }

    pub fn decode_with(&self, syn: &SyndromeConfig, mode: MatchMode) -> Result<PhasedPauli> {
        if syn.charges.len() != self.g {
            return Err(Error::LengthMismatch(syn.charges.len(), self.g));
        }
        let mut st = Fusion { dec: self, charges: syn.charges.clone(), word: PhasedPauli::identity(self.code.n_qudits()) };

        // Round 1: odd anyons.
        for group in self.groups(&syn.odd, mode)? {
            if group.len() % 2 == 1 {
                return Err(Error::Decoding(format!("odd number ({}) of odd-charge anyons in a sector", group.len())));
            }
            let cost = |i: usize, j: usize| {
                let (u, v) = (group[i], group[j]);
                self.odd_pair(u, syn.charges[u], v, syn.charges[v]).map_or(FAR, |(d, _)| d as i64)
            };
            for (i, j) in mwpm(&WeightedGraph::from_fn(group.len(), cost))? {
                let (u, v) = (group[i], group[j]);
                let (_, parity) = self
                    .odd_pair(u, syn.charges[u], v, syn.charges[v])
                    .ok_or_else(|| Error::Decoding(format!("generators {u} and {v} are not connected")))?;
                let (nodes, edges) = self.path(u, v, parity).expect("distance was finite");
                st.fuse_at_midpoint(&nodes, &edges, syn.charges[u], syn.charges[v]);
            }
        }
        if let Some(g) = (0..self.g).find(|&g| st.charges[g] % 2 == 1) {
            return Err(Error::Decoding(format!("odd charge left on generator {g} after round 1")));
        }

        // Round 2: charge-2 anyons.
        let twos: Vec<usize> = (0..self.g).filter(|&g| st.charges[g] == 2).collect();
        for group in self.groups(&twos, MatchMode::Joint)? {
            let k = group.len();
            let virt = k % 2 == 1;
            let n = k + virt as usize;
            let cost = |i: usize, j: usize| {
                if i >= k || j >= k {
                    let u = group[i.min(j)];
                    return self.odd_loop(u).map_or(FAR, |d| d as i64);
                }
                self.best(group[i], group[j]).map_or(FAR, |(d, _)| d as i64)
            };
            for (i, j) in mwpm(&WeightedGraph::from_fn(n, cost))? {
                if i >= k || j >= k {
                    let u = group[i.min(j)];
                    let (nodes, edges) = self
                        .path(u, u, 1)
                        .ok_or_else(|| Error::Decoding(format!("lone charge 2 on generator {u} has no odd loop")))?;
                    st.clear_with_loop(&nodes, &edges);
                } else {
                    let (u, v) = (group[i], group[j]);
                    let (_, parity) = self
                        .best(u, v)
                        .ok_or_else(|| Error::Decoding(format!("generators {u} and {v} are not connected")))?;
                    let (nodes, edges) = self.path(u, v, parity).expect("distance was finite");
                    st.carry(&nodes, &edges, 2);
                }
            }
        }

        // Post-verification against an independent recomputation.
        let applied = word_charges(self.code, &st.word);
        let residual = syn.charges.iter().zip(&applied).filter(|&(a, b)| (a + b) % 4 != 0).count();
        if residual != 0 || st.charges.iter().any(|&c| c != 0) {
            return Err(Error::ResidualSyndrome(residual));
        }
        Ok(st.word)
    }

    /// Splits anyons into independently matched groups.
    fn groups(&self, anyons: &[usize], mode: MatchMode) -> Result<Vec<Vec<usize>>> {
        let mut keyed: Vec<(usize, usize)> = Vec::with_capacity(anyons.len());
        for &a in anyons {
            let key = match mode {
                MatchMode::Joint => self.component[a],
                MatchMode::Separate => match self.code.generators()[a].species() {
                    Species::E => 0,
                    Species::M => 1,
                    Species::Mixed => {
                        return Err(Error::Decoding("separate matching is undefined next to defect lines".into()))
                    }
                },
            };
            keyed.push((key, a));
        }
        keyed.sort_unstable();
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut last = usize::MAX;
        for (key, a) in keyed {
            if key != last {
                out.push(Vec::new());
                last = key;
            }
            out.last_mut().unwrap().push(a);
        }
        Ok(out)
    }
}

/// Working state of one decoding pass.
struct Fusion<'d, 'a> {
    dec: &'d Decoder<'a>,
    charges: Vec<u8>,
    word: PhasedPauli,
}

impl Fusion<'_, '_> {
    /// Applies move `k` raised to the power `m`.
    fn apply(&mut self, k: usize, m: u8) {
        let e = &self.dec.code.move_graph().edges[k];
        let (a, b) = ((e.a * m) & 3, (e.b * m) & 3);
        self.word.mul_right_local(e.qudit, a, b);
        for i in 0..2 {
            let g = e.ends[i];
            self.charges[g] = (self.charges[g] + m * e.charges[i]) & 3;
        }
    }

    /// Moves a charge `c` sitting at `from` across edge `k`; returns the
    /// charge as it arrives at the far end.
    fn step(&mut self, k: usize, from: usize, c: u8) -> u8 {
        let e = self.dec.code.move_graph().edges[k];
        // Units are self-inverse mod 4, so -c·κ⁻¹ = -c·κ.
        let m = (4 * 4 - c * e.charge_at(from)) & 3;
        self.apply(k, m);
        (m * e.charge_at(e.other(from))) & 3
    }

    fn carry(&mut self, nodes: &[usize], edges: &[usize], mut c: u8) -> u8 {
        for (i, &k) in edges.iter().enumerate() {
            c = self.step(k, nodes[i], c);
        }
        c
    }

    /// Brings both ends of a round-1 pair to the middle of their path.
    fn fuse_at_midpoint(&mut self, nodes: &[usize], edges: &[usize], cu: u8, cv: u8) {
        let mid = edges.len() / 2;
        self.carry(&nodes[..=mid], &edges[..mid], cu);
        let back_nodes: Vec<usize> = nodes[mid..].iter().rev().copied().collect();
        let back_edges: Vec<usize> = edges[mid..].iter().rev().copied().collect();
        self.carry(&back_nodes, &back_edges, cv);
    }

    /// Splits a lone charge 2 at `nodes[0]` with one unit move and brings
    /// the split-off charge back around an odd loop.
    fn clear_with_loop(&mut self, nodes: &[usize], edges: &[usize]) {
        let e = self.dec.code.move_graph().edges[edges[0]];
        self.apply(edges[0], 1);
        let c = e.charge_at(nodes[1]);
        self.carry(&nodes[1..], &edges[1..], c);
    }
}

/// Decodes `syn` on `code`; builds the metric on every call, so prefer a
/// reused [`Decoder`] inside loops.
pub fn decode(code: &KagomeCode, syn: &SyndromeConfig) -> Result<PhasedPauli> {
    Decoder::new(code).decode(syn)
}

/// Per logical, whether `frame · correction` fails to commute with it.
/// A `true` entry marks a failure.
pub fn logical_verdict(code: &KagomeCode, frame: &ErrorFrame, correction: &PhasedPauli) -> Result<Vec<(String, bool)>> {
    let mut residual = frame.word().clone();
    for q in correction.support() {
        let (a, b) = correction.local(q);
        residual.mul_right_local(q, a, b);
    }
    let left = word_charges(code, &residual).iter().filter(|&&c| c != 0).count();
    if left != 0 {
        return Err(Error::ResidualSyndrome(left));
    }
    code.logicals()
        .iter()
        .map(|lg| Ok((lg.name.clone(), commutation_exponent(&residual, &lg.word)? != 0)))
        .collect()
}
