//! Predictions of `C^I` and `C^II` from a decoherence pattern alone, and a
//! plain bond-percolation Monte Carlo for threshold cross-checks.
//!
//! Decohered links are open bonds between v-lattice vertices. A `W^{ZX}`
//! string survives as a disorder-parameter witness when its endpoints are
//! joined by open bonds. Starting from the pure state, the closed loop formed
//! by the string and the open path must also be homologically trivial modulo
//! cycles already present in the open cluster, since the Z logicals are not in
//! the initial group. Windings are tracked as `Z₂²` potentials in the
//! union-find.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::DecoherencePattern;
use crate::error::{Error, Result};
use crate::lattice::{InitialState, LinkIndex, Orientation, TorusLattice, Vertex};

/// Union-find with path compression and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut a: usize) -> usize {
        let mut root = a;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[a] != root {
            let next = self.parent[a];
            self.parent[a] = root;
            a = next;
        }
        root
    }

    /// Returns `false` if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] || (self.size[ra] == self.size[rb] && rb < ra) {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i;
        }
        self.size.fill(1);
    }
}

/// Winding class in `Z₂²`: bit 0 counts x-seam crossings, bit 1 y-seam crossings.
pub type Winding = u8;

/// Set of winding classes closed under addition, stored as a 4-bit mask.
fn span_add(span: u8, class: Winding) -> u8 {
    let mut out = span;
    for c in 0..4u8 {
        if span >> c & 1 == 1 {
            out |= 1 << (c ^ class);
        }
    }
    out
}

fn span_join(a: u8, b: u8) -> u8 {
    (0..4u8).filter(|&c| b >> c & 1 == 1).fold(a, span_add)
}

/// Connectivity of v-lattice vertices through decohered links, with windings.
#[derive(Clone, Debug)]
pub struct OpenBondGraph {
    lattice: TorusLattice,
    parent: Vec<usize>,
    size: Vec<usize>,
    // winding of the tree path from a node to its parent
    potential: Vec<Winding>,
    // classes of cycles inside each root's component
    cycles: Vec<u8>,
    // classes of all open cycles
    all_cycles: u8,
}

impl OpenBondGraph {
    pub fn new(lattice: &TorusLattice) -> Self {
        let n = lattice.n_vertices();
        Self {
            lattice: *lattice,
            parent: (0..n).collect(),
            size: vec![1; n],
            potential: vec![0; n],
            cycles: vec![1; n],
            all_cycles: 1,
        }
    }

    pub fn from_pattern(lattice: &TorusLattice, pattern: &DecoherencePattern) -> Result<Self> {
        if (pattern.lx, pattern.ly) != (lattice.lx(), lattice.ly()) {
            return Err(Error::DimensionMismatch {
                left: lattice.n_qubits(),
                right: 2 * pattern.lx * pattern.ly,
            });
        }
        let mut g = Self::new(lattice);
        for &l in &pattern.links {
            g.open(lattice.link(l));
        }
        Ok(g)
    }

    /// Seam crossings of a single link traversed from its base vertex.
    pub fn link_winding(lattice: &TorusLattice, l: LinkIndex) -> Winding {
        match l.orientation {
            Orientation::Horizontal => u8::from(l.x + 1 == lattice.lx()),
            Orientation::Vertical => u8::from(l.y + 1 == lattice.ly()) << 1,
        }
    }

    /// Total winding of a set of links, mod 2.
    pub fn path_winding(lattice: &TorusLattice, links: &[LinkIndex]) -> Winding {
        links
            .iter()
            .fold(0, |acc, &l| acc ^ Self::link_winding(lattice, l))
    }

    fn find(&mut self, a: usize) -> (usize, Winding) {
        let mut path = Vec::new();
        let mut root = a;
        while self.parent[root] != root {
            path.push(root);
            root = self.parent[root];
        }
        // compress, accumulating potentials from the top down
        let mut acc = 0;
        for &node in path.iter().rev() {
            acc ^= self.potential[node];
            self.potential[node] = acc;
            self.parent[node] = root;
        }
        (
            root,
            if path.is_empty() {
                0
            } else {
                self.potential[a]
            },
        )
    }

    /// Marks a link open. Idempotent.
    pub fn open(&mut self, l: LinkIndex) {
        let (a, b) = self.lattice.endpoints(l);
        let w = Self::link_winding(&self.lattice, l);
        let (ra, pa) = self.find(self.lattice.vertex_index(a));
        let (rb, pb) = self.find(self.lattice.vertex_index(b));
        if ra == rb {
            self.cycles[ra] = span_add(self.cycles[ra], pa ^ pb ^ w);
            self.all_cycles = span_add(self.all_cycles, pa ^ pb ^ w);
            return;
        }
        let (big, small) =
            if self.size[ra] > self.size[rb] || (self.size[ra] == self.size[rb] && ra < rb) {
                (ra, rb)
            } else {
                (rb, ra)
            };
        self.parent[small] = big;
        self.potential[small] = pa ^ pb ^ w;
        self.size[big] += self.size[small];
        self.cycles[big] = span_join(self.cycles[big], self.cycles[small]);
    }

    pub fn connected(&mut self, a: Vertex, b: Vertex) -> bool {
        let ia = self.lattice.vertex_index(a);
        let ib = self.lattice.vertex_index(b);
        self.find(ia).0 == self.find(ib).0
    }

    /// Span of winding classes of all open cycles, over every cluster.
    pub fn cycle_span(&self) -> u8 {
        self.all_cycles
    }

    /// Winding of some open path from `a` to `b`, if any, together with the
    /// span of cycle classes available in that cluster.
    pub fn relative_winding(&mut self, a: Vertex, b: Vertex) -> Option<(Winding, u8)> {
        let (ra, pa) = self.find(self.lattice.vertex_index(a));
        let (rb, pb) = self.find(self.lattice.vertex_index(b));
        (ra == rb).then(|| (pa ^ pb, self.cycles[ra]))
    }
}

/// Odd-degree vertices of a link set.
pub fn boundary(lattice: &TorusLattice, links: &[LinkIndex]) -> Vec<Vertex> {
    let mut degree = vec![false; lattice.n_vertices()];
    for &l in links {
        let (a, b) = lattice.endpoints(l);
        degree[lattice.vertex_index(a)] ^= true;
        degree[lattice.vertex_index(b)] ^= true;
    }
    lattice
        .vertices()
        .filter(|v| degree[lattice.vertex_index(*v)])
        .collect()
}

/// Endpoint connectivity alone: `1` iff `e1` and `e2` share an open cluster.
pub fn predict_cii(graph: &mut OpenBondGraph, e1: Vertex, e2: Vertex) -> bool {
    graph.connected(e1, e2)
}

/// Predicted `C^{II}` for the ZX string along `path` (v-lattice links).
pub fn predict_cii_for_string(
    graph: &mut OpenBondGraph,
    path: &[LinkIndex],
    start: InitialState,
) -> Result<bool> {
    let lattice = graph.lattice;
    let ends = boundary(&lattice, path);
    let (e1, e2) = match ends.as_slice() {
        [] => (Vertex::new(0, 0), Vertex::new(0, 0)),
        [a, b] => (*a, *b),
        _ => return Err(Error::NonAdjacentPath { step: 0 }),
    };
    let Some((w, _)) = graph.relative_winding(e1, e2) else {
        return Ok(false);
    };
    Ok(match start {
        InitialState::Mixed => true,
        InitialState::Pure => {
            // string · (open path back) must be homologically trivial, up to
            // open cycles from any cluster
            let class = w ^ OpenBondGraph::path_winding(&lattice, path);
            graph.cycle_span() >> class & 1 == 1
        }
    })
}

/// Predicted `C^I` for the Wilson loop on `gamma`: `1` iff no decohered link
/// is shifted onto the loop.
pub fn predict_ci(
    lattice: &TorusLattice,
    pattern: &DecoherencePattern,
    gamma: &[LinkIndex],
) -> bool {
    gamma
        .iter()
        .all(|&l| !pattern.contains(lattice.flat(lattice.unshift_by_delta(l))))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Probability that `(0,0)` and `(L/2, L/2)` are joined by open bonds on an
/// `L × L` torus with i.i.d. bond probability `r`.
pub fn crossing_probability<R: Rng + ?Sized>(
    r: f64,
    l: usize,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidProbability(r));
    }
    if l < 4 {
        return Err(Error::LatticeTooSmall {
            lx: l,
            ly: l,
            reason: "crossing probability needs L >= 4".into(),
        });
    }
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be positive".into()));
    }
    let n = l * l;
    let target = (l / 2) * l + l / 2;
    let mut hits = 0usize;
    let mut uf = UnionFind::new(n);
    for _ in 0..samples {
        uf.reset();
        for y in 0..l {
            for x in 0..l {
                let v = y * l + x;
                if rng.gen_bool(r) {
                    uf.union(v, y * l + (x + 1) % l);
                }
                if rng.gen_bool(r) {
                    uf.union(v, ((y + 1) % l) * l + x);
                }
            }
        }
        hits += usize::from(uf.connected(0, target));
    }
    let p = hits as f64 / samples as f64;
    let stderr = if samples > 1 {
        (p * (1.0 - p) / (samples - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(Estimate { mean: p, stderr })
}

/// Location where two sampled curves `(r, P)` on a common grid cross, by
/// linear interpolation of their difference. Returns the first sign change.
pub fn curve_crossing(rs: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    for i in 1..d.len().min(rs.len()) {
        if d[i - 1] == 0.0 {
            return Some(rs[i - 1]);
        }
        if d[i - 1].signum() != d[i].signum() {
            let t = d[i - 1] / (d[i - 1] - d[i]);
            return Some(rs[i - 1] + t * (rs[i] - rs[i - 1]));
        }
    }
    None
}

/// `2β/ν` for 2D percolation. The antipodal connection probability decays as
/// `L^{-2β/ν}` at threshold, so curves cross only after multiplying by `L^{2β/ν}`.
pub const TWO_BETA_OVER_NU: f64 = 5.0 / 24.0;

/// Threshold from pairwise crossings of `L^{2β/ν}·P(r)` curves on a shared
/// `r` grid, averaged over all size pairs. `None` if any pair fails to cross.
pub fn threshold_from_crossings(rs: &[f64], curves: &[(usize, Vec<f64>)]) -> Option<f64> {
    let scaled: Vec<Vec<f64>> = curves
        .iter()
        .map(|(l, p)| {
            let s = (*l as f64).powf(TWO_BETA_OVER_NU);
            p.iter().map(|v| v * s).collect()
        })
        .collect();
    let mut crossings = Vec::new();
    for i in 0..scaled.len() {
        for j in i + 1..scaled.len() {
            crossings.push(curve_crossing(rs, &scaled[i], &scaled[j])?);
        }
    }
    if crossings.is_empty() {
        return None;
    }
    Some(crossings.iter().sum::<f64>() / crossings.len() as f64)
}
