//! Exact minimum-weight perfect matching on complete graphs with integer weights.
//!
//! The solver is the O(n³) primal-dual blossom algorithm in the formulation of
//! Galil (1986), following the structure of Joris van Rantwijk's reference
//! implementation. Vertex duals are stored doubled so that integer weights
//! keep every dual integral.

use crate::{Error, Result};

/// Complete graph with symmetric nonnegative integer weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    w: Vec<i64>,
}

impl WeightedGraph {
    pub fn new(n: usize) -> Self {
        WeightedGraph { n, w: vec![0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set(i, j, f(i, j));
            }
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, i: usize, j: usize, w: i64) {
        assert!(w >= 0, "weights must be nonnegative");
        self.w[i * self.n + j] = w;
        self.w[j * self.n + i] = w;
    }

    pub fn weight(&self, i: usize, j: usize) -> i64 {
        self.w[i * self.n + j]
    }

    pub fn total(&self, pairs: &[(usize, usize)]) -> i64 {
        pairs.iter().map(|&(i, j)| self.weight(i, j)).sum()
    }
}

/// Minimum-weight perfect matching; pairs are returned as `(i, j)` with `i < j`,
/// sorted by `i`.
pub fn mwpm(g: &WeightedGraph) -> Result<Vec<(usize, usize)>> {
    let n = g.n;
    if n % 2 == 1 {
        return Err(Error::OddNodeCount(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let wmax = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| g.weight(i, j)).max().unwrap_or(0);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j, wmax + 1 - g.weight(i, j)));
        }
    }
    let mate = max_weight_matching(n, &edges, true);
    let mut pairs = Vec::with_capacity(n / 2);
    for (i, &m) in mate.iter().enumerate() {
        if m == NONE {
            return Err(Error::Decoding("blossom solver left a vertex unmatched".into()));
        }
        if i < m {
            pairs.push((i, m));
        }
    }
    Ok(pairs)
}

pub const BRUTE_FORCE_MAX_NODES: usize = 12;

/// Exhaustive optimum; among optimal matchings the lexicographically first
/// sorted pair list wins.
pub fn brute_force_mwpm(g: &WeightedGraph) -> Result<Vec<(usize, usize)>> {
    let n = g.n;
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooManyNodes(n));
    }
    if n % 2 == 1 {
        return Err(Error::OddNodeCount(n));
    }
    let mut best: Option<(i64, Vec<(usize, usize)>)> = None;
    for_each_perfect_matching(n, &mut |pairs| {
        let w = g.total(pairs);
        if best.as_ref().map_or(true, |(bw, _)| w < *bw) {
            best = Some((w, pairs.to_vec()));
        }
    });
    Ok(best.map(|(_, p)| p).unwrap_or_default())
}

/// Visits every perfect matching of `K_n` in lexicographic order.
pub fn for_each_perfect_matching(n: usize, f: &mut dyn FnMut(&[(usize, usize)])) {
    fn rec(used: &mut Vec<bool>, pairs: &mut Vec<(usize, usize)>, f: &mut dyn FnMut(&[(usize, usize)])) {
        let Some(i) = used.iter().position(|&u| !u) else {
            f(pairs);
            return;
        };
        used[i] = true;
        for j in (i + 1)..used.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            pairs.push((i, j));
            rec(used, pairs, f);
            pairs.pop();
            used[j] = false;
        }
        used[i] = false;
    }
    if n % 2 == 1 {
        return;
    }
    rec(&mut vec![false; n], &mut Vec::new(), f);
}

const NONE: usize = usize::MAX;

/// Maximum-weight matching of a general graph given as `(i, j, w)` edges.
/// Returns `mate[v]` or `usize::MAX` for unmatched vertices.
pub fn max_weight_matching(nvertex: usize, edges: &[(usize, usize, i64)], maxcardinality: bool) -> Vec<usize> {
    if edges.is_empty() {
        return vec![NONE; nvertex];
    }
    let mut m = Blossom::new(nvertex, edges, maxcardinality);
    m.solve();
    m.mate.iter().map(|&p| if p == NONE { NONE } else { m.endpoint[p] }).collect()
}

struct Blossom<'a> {
    nvertex: usize,
    edges: &'a [(usize, usize, i64)],
    maxcardinality: bool,
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<i64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl<'a> Blossom<'a> {
    fn new(nvertex: usize, edges: &'a [(usize, usize, i64)], maxcardinality: bool) -> Self {
        let nedge = edges.len();
        let maxweight = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
        let mut endpoint = Vec::with_capacity(2 * nedge);
        let mut neighbend = vec![Vec::new(); nvertex];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            endpoint.push(i);
            endpoint.push(j);
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut blossombase: Vec<usize> = (0..nvertex).collect();
        blossombase.extend(std::iter::repeat(NONE).take(nvertex));
        let mut dualvar = vec![maxweight; nvertex];
        dualvar.extend(std::iter::repeat(0).take(nvertex));
        Blossom {
            nvertex,
            edges,
            maxcardinality,
            endpoint,
            neighbend,
            mate: vec![NONE; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![NONE; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NONE; 2 * nvertex],
            blossomchilds: vec![Vec::new(); 2 * nvertex],
            blossombase,
            blossomendps: vec![Vec::new(); 2 * nvertex],
            bestedge: vec![NONE; 2 * nvertex],
            blossombestedges: vec![None; 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: usize) -> i64 {
        let (i, j, wt) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2 * wt
    }

    fn leaves(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.nvertex {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                if t < self.nvertex {
                    out.push(t);
                } else {
                    self.leaves(t, out);
                }
            }
        }
    }

    fn blossom_leaves(&self, b: usize) -> Vec<usize> {
        let mut v = Vec::new();
        self.leaves(b, &mut v);
        v
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let leaves = self.blossom_leaves(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b];
            debug_assert!(self.mate[base] != NONE);
            let mb = self.mate[base];
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    /// Traces back from `v` and `w` to find a new blossom base, or `NONE` for
    /// an augmenting path.
    fn scan_blossom(&mut self, mut v: usize, mut w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert_eq!(self.label[b], 1);
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                debug_assert_eq!(self.label[b], 2);
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("free blossom slot");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        self.blossomchilds[b] = path.clone();
        self.blossomendps[b] = endps;
        for v in self.blossom_leaves(b) {
            if self.label[self.inblossom[v]] == 2 {
                self.queue.push(v);
            }
            self.inblossom[v] = b;
        }
        let mut bestedgeto = vec![NONE; 2 * self.nvertex];
        for &bv in &path {
            let nblists: Vec<Vec<usize>> = match self.blossombestedges[bv].take() {
                None => self
                    .blossom_leaves(bv)
                    .into_iter()
                    .map(|v| self.neighbend[v].iter().map(|p| p / 2).collect())
                    .collect(),
                Some(list) => vec![list],
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.bestedge[bv] = NONE;
        }
        let list: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for &k in &list {
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
        self.blossombestedges[b] = Some(list);
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let childs = self.blossomchilds[b].clone();
        for &s in &childs {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for v in self.blossom_leaves(s) {
                    self.inblossom[v] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            debug_assert!(self.labelend[b] != NONE);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let len = childs.len() as isize;
            let mut j = childs.iter().position(|&c| c == entrychild).expect("entry child") as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 == 1 {
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            let at = |v: &Vec<usize>, j: isize| v[j.rem_euclid(len) as usize];
            let endps = self.blossomendps[b].clone();
            let mut p = self.labelend[b];
            while j != 0 {
                let q = p ^ 1;
                self.label[self.endpoint[q]] = 0;
                let e = at(&endps, j - endptrick as isize) ^ endptrick ^ 1;
                self.label[self.endpoint[e]] = 0;
                self.assign_label(self.endpoint[q], 2, p);
                self.allowedge[at(&endps, j - endptrick as isize) / 2] = true;
                j += jstep;
                p = at(&endps, j - endptrick as isize) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = at(&childs, j);
            let ep = self.endpoint[p ^ 1];
            self.label[ep] = 2;
            self.label[bv] = 2;
            self.labelend[ep] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while at(&childs, j) != entrychild {
                let bv = at(&childs, j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let mut found = NONE;
                for v in self.blossom_leaves(bv) {
                    if self.label[v] != 0 {
                        found = v;
                        break;
                    }
                }
                if found != NONE {
                    let v = found;
                    debug_assert_eq!(self.label[v], 2);
                    debug_assert_eq!(self.inblossom[v], bv);
                    self.label[v] = 0;
                    let mb = self.mate[self.blossombase[bv]];
                    self.label[self.endpoint[mb]] = 0;
                    let le = self.labelend[v];
                    self.assign_label(v, 2, le);
                }
                j += jstep;
            }
        }
        self.label[b] = u8::MAX;
        self.labelend[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = None;
        self.bestedge[b] = NONE;
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len() as isize;
        let i = self.blossomchilds[b].iter().position(|&c| c == t).expect("child") as isize;
        let mut j = i;
        let (jstep, endptrick): (isize, usize) = if i & 1 == 1 {
            j -= len;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.blossomchilds[b][j.rem_euclid(len) as usize];
            let p = self.blossomendps[b][(j - endptrick as isize).rem_euclid(len) as usize] ^ endptrick;
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.blossomchilds[b][j.rem_euclid(len) as usize];
            if t >= self.nvertex {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i as usize);
        self.blossomendps[b].rotate_left(i as usize);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.label[bs], 1);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert_eq!(self.label[bt], 2);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert_eq!(self.blossombase[bt], t);
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn solve(&mut self) {
        let n = self.nvertex;
        for _ in 0..n {
            self.label.iter_mut().for_each(|l| *l = 0);
            self.bestedge.iter_mut().for_each(|e| *e = NONE);
            for b in n..2 * n {
                self.blossombestedges[b] = None;
            }
            self.allowedge.iter_mut().for_each(|a| *a = false);
            self.queue.clear();
            for v in 0..n {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }
            let mut augmented = false;
            loop {
                while let Some(v) = self.queue.pop() {
                    debug_assert_eq!(self.label[self.inblossom[v]], 1);
                    for idx in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][idx];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                debug_assert_eq!(self.label[self.inblossom[w]], 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE || kslack < self.slack(self.bestedge[b]) {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                    if augmented {
                        break;
                    }
                }
                if augmented {
                    break;
                }

                // Dual adjustment.
                let mut deltatype = 0u8;
                let mut delta = 0i64;
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                if !self.maxcardinality {
                    deltatype = 1;
                    delta = *self.dualvar[..n].iter().min().expect("vertices");
                }
                for v in 0..n {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * n {
                    if self.blossomparent[b] == NONE && self.label[b] == 1 && self.bestedge[b] != NONE {
                        let kslack = self.slack(self.bestedge[b]);
                        debug_assert_eq!(kslack % 2, 0);
                        let d = kslack / 2;
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == 0 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == 0 {
                    debug_assert!(self.maxcardinality);
                    deltatype = 1;
                    delta = (*self.dualvar[..n].iter().min().expect("vertices")).max(0);
                }
                for v in 0..n {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in n..2 * n {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }
                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, mut j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            std::mem::swap(&mut i, &mut j);
                        }
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }
            if !augmented {
                break;
            }
            for b in n..2 * n {
                if self.blossomparent[b] == NONE && self.blossombase[b] != NONE && self.label[b] == 1 && self.dualvar[b] == 0 {
                    self.expand_blossom(b, true);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_nodes() {
        let g = WeightedGraph::from_fn(2, |_, _| 7);
        assert_eq!(mwpm(&g).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn four_nodes_unique_optimum() {
        let g = WeightedGraph::from_fn(4, |i, j| if (i, j) == (0, 1) || (i, j) == (2, 3) { 1 } else { 2 });
        let m = mwpm(&g).unwrap();
        assert_eq!(m, vec![(0, 1), (2, 3)]);
        assert_eq!(g.total(&m), 2);
    }

    #[test]
    fn odd_and_empty() {
        assert_eq!(mwpm(&WeightedGraph::new(3)), Err(Error::OddNodeCount(3)));
        assert!(mwpm(&WeightedGraph::new(0)).unwrap().is_empty());
        assert_eq!(brute_force_mwpm(&WeightedGraph::new(14)), Err(Error::TooManyNodes(14)));
    }

    #[test]
    fn brute_force_tie_break_and_counts() {
        let g = WeightedGraph::from_fn(4, |_, _| 3);
        assert_eq!(brute_force_mwpm(&g).unwrap(), vec![(0, 1), (2, 3)]);
        let mut count = 0;
        for_each_perfect_matching(6, &mut |_| count += 1);
        assert_eq!(count, 15);
        let mut count = 0;
        for_each_perfect_matching(10, &mut |_| count += 1);
        assert_eq!(count, 945);
    }

    #[test]
    fn matches_oracle_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..400 {
            let n = 2 * rng.gen_range(1..=6);
            let hi = if trial % 3 == 0 { 4 } else { 100 };
            let g = WeightedGraph::from_fn(n, |_, _| rng.gen_range(1..=hi));
            let m = mwpm(&g).unwrap();
            assert_eq!(m.len(), n / 2);
            let mut seen = vec![false; n];
            for &(i, j) in &m {
                assert!(!seen[i] && !seen[j]);
                seen[i] = true;
                seen[j] = true;
            }
            let b = brute_force_mwpm(&g).unwrap();
            assert_eq!(g.total(&m), g.total(&b), "trial {trial}");
        }
    }

    #[test]
    fn large_instance_is_fast_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<(i64, i64)> = (0..200).map(|_| (rng.gen_range(0..60), rng.gen_range(0..60))).collect();
        let g = WeightedGraph::from_fn(200, |i, j| (pts[i].0 - pts[j].0).abs() + (pts[i].1 - pts[j].1).abs());
        let t = std::time::Instant::now();
        let m = mwpm(&g).unwrap();
        assert_eq!(m.len(), 100);
        assert!(t.elapsed().as_secs_f64() < 10.0);
        // Deterministic on repeat.
        assert_eq!(m, mwpm(&g).unwrap());
    }
}
