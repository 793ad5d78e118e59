//! Torus geometry for the toric code.
//!
//! Vertices `(x, y)` live on an `Lx × Ly` periodic grid. Qubits sit on links:
//! the horizontal link `h(x,y)` joins `(x,y)`–`(x+1,y)` and the vertical link
//! `v(x,y)` joins `(x,y)`–`(x,y+1)`. Plaquette `q(x,y)` has center
//! `(x+½, y+½)`. Flat qubit index of a link is `2(y·Lx + x) + o` with `o = 0`
//! for horizontal and `1` for vertical.
//!
//! The diagonal shift by `(½, −½)` maps `h(x,y) → v(x+1, y−1)` and
//! `v(x,y) → h(x,y)`; on vertices it maps `(x,y)` to plaquette `q(x, y−1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliOperator};
use crate::stabilizer::MixedStabilizerState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkIndex {
    pub x: usize,
    pub y: usize,
    pub orientation: Orientation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub x: usize,
    pub y: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Plaquette {
    pub x: usize,
    pub y: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    X,
    Y,
}

/// How link operators are displaced when forming `Z_ℓ X_{ℓ+δ}` products.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum LinkShift {
    /// Translation by `(½, −½)`.
    #[default]
    Diagonal,
    /// Maps every link to itself. Physically wrong; exists so that the
    /// validation suite can be shown to catch a broken shift.
    Identity,
}

/// Which stabilizer state trajectories start from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// All stars and plaquettes but one of each, plus both X logicals (pure).
    #[default]
    Pure,
    /// All stars and plaquettes but one of each; four-fold degenerate.
    Mixed,
}

/// Drops a factor of `i` so that the operator is Hermitian.
fn hermitian(op: PauliOperator) -> PauliOperator {
    let p = op.phase_exp();
    if p % 2 == 1 {
        op.with_phase(p - 1)
    } else {
        op
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusLattice {
    lx: usize,
    ly: usize,
    shift: LinkShift,
}

impl LinkIndex {
    pub fn h(x: usize, y: usize) -> Self {
        Self {
            x,
            y,
            orientation: Orientation::Horizontal,
        }
    }

    pub fn v(x: usize, y: usize) -> Self {
        Self {
            x,
            y,
            orientation: Orientation::Vertical,
        }
    }
}

impl Vertex {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl Plaquette {
    pub fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl TorusLattice {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        if lx < 3 || ly < 3 {
            return Err(Error::InvalidLattice {
                lx,
                ly,
                reason: "both dimensions must be at least 3".into(),
            });
        }
        Ok(Self {
            lx,
            ly,
            shift: LinkShift::Diagonal,
        })
    }

    pub fn with_shift(mut self, shift: LinkShift) -> Self {
        self.shift = shift;
        self
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn shift(&self) -> LinkShift {
        self.shift
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.lx * self.ly
    }

    pub fn n_vertices(&self) -> usize {
        self.lx * self.ly
    }

    fn wrap_x(&self, x: isize) -> usize {
        x.rem_euclid(self.lx as isize) as usize
    }

    fn wrap_y(&self, y: isize) -> usize {
        y.rem_euclid(self.ly as isize) as usize
    }

    fn check_xy(&self, x: usize, y: usize) -> Result<()> {
        if x >= self.lx || y >= self.ly {
            return Err(Error::InvalidCoordinate {
                x,
                y,
                lx: self.lx,
                ly: self.ly,
            });
        }
        Ok(())
    }

    pub fn check_link(&self, l: LinkIndex) -> Result<()> {
        self.check_xy(l.x, l.y)
    }

    /// Horizontal link at wrapped coordinates.
    pub fn h(&self, x: isize, y: isize) -> LinkIndex {
        LinkIndex::h(self.wrap_x(x), self.wrap_y(y))
    }

    /// Vertical link at wrapped coordinates.
    pub fn v(&self, x: isize, y: isize) -> LinkIndex {
        LinkIndex::v(self.wrap_x(x), self.wrap_y(y))
    }

    pub fn flat(&self, l: LinkIndex) -> usize {
        debug_assert!(l.x < self.lx && l.y < self.ly);
        2 * (l.y * self.lx + l.x) + usize::from(l.orientation == Orientation::Vertical)
    }

    pub fn link(&self, flat: usize) -> LinkIndex {
        let cell = flat / 2;
        let (x, y) = (cell % self.lx, cell / self.lx);
        if flat.is_multiple_of(2) {
            LinkIndex::h(x, y)
        } else {
            LinkIndex::v(x, y)
        }
    }

    pub fn links(&self) -> impl Iterator<Item = LinkIndex> + '_ {
        (0..self.n_qubits()).map(|i| self.link(i))
    }

    pub fn vertex_index(&self, v: Vertex) -> usize {
        v.y * self.lx + v.x
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.ly).flat_map(move |y| (0..self.lx).map(move |x| Vertex::new(x, y)))
    }

    pub fn plaquettes(&self) -> impl Iterator<Item = Plaquette> + '_ {
        (0..self.ly).flat_map(move |y| (0..self.lx).map(move |x| Plaquette::new(x, y)))
    }

    /// Translation of a link by the diagonal shift.
    pub fn shift_by_delta(&self, l: LinkIndex) -> LinkIndex {
        match (self.shift, l.orientation) {
            (LinkShift::Identity, _) => l,
            (LinkShift::Diagonal, Orientation::Horizontal) => {
                self.v(l.x as isize + 1, l.y as isize - 1)
            }
            (LinkShift::Diagonal, Orientation::Vertical) => LinkIndex::h(l.x, l.y),
        }
    }

    pub fn unshift_by_delta(&self, l: LinkIndex) -> LinkIndex {
        match (self.shift, l.orientation) {
            (LinkShift::Identity, _) => l,
            (LinkShift::Diagonal, Orientation::Vertical) => {
                self.h(l.x as isize - 1, l.y as isize + 1)
            }
            (LinkShift::Diagonal, Orientation::Horizontal) => LinkIndex::v(l.x, l.y),
        }
    }

    /// Plaquette reached from a vertex by the diagonal shift.
    pub fn vertex_plus_delta(&self, v: Vertex) -> Plaquette {
        Plaquette::new(v.x, self.wrap_y(v.y as isize - 1))
    }

    /// The two endpoints of a link.
    pub fn endpoints(&self, l: LinkIndex) -> (Vertex, Vertex) {
        let a = Vertex::new(l.x, l.y);
        let b = match l.orientation {
            Orientation::Horizontal => Vertex::new(self.wrap_x(l.x as isize + 1), l.y),
            Orientation::Vertical => Vertex::new(l.x, self.wrap_y(l.y as isize + 1)),
        };
        (a, b)
    }

    /// Links meeting at `v`: `h(x,y), h(x−1,y), v(x,y), v(x,y−1)`.
    pub fn star_links(&self, v: Vertex) -> Result<[LinkIndex; 4]> {
        self.check_xy(v.x, v.y)?;
        let (x, y) = (v.x as isize, v.y as isize);
        Ok([
            self.h(x, y),
            self.h(x - 1, y),
            self.v(x, y),
            self.v(x, y - 1),
        ])
    }

    /// Boundary of `q`: `h(x,y), h(x,y+1), v(x,y), v(x+1,y)`.
    pub fn plaquette_links(&self, q: Plaquette) -> Result<[LinkIndex; 4]> {
        self.check_xy(q.x, q.y)?;
        let (x, y) = (q.x as isize, q.y as isize);
        Ok([
            self.h(x, y),
            self.h(x, y + 1),
            self.v(x, y),
            self.v(x + 1, y),
        ])
    }

    fn flats(&self, links: &[LinkIndex]) -> Vec<usize> {
        links.iter().map(|&l| self.flat(l)).collect()
    }

    /// `A_v = ∏ X` over the star of `v`.
    pub fn star_operator(&self, v: Vertex) -> Result<PauliOperator> {
        PauliOperator::x_on(self.n_qubits(), &self.flats(&self.star_links(v)?))
    }

    /// `B_q = ∏ Z` around `q`.
    pub fn plaquette_operator(&self, q: Plaquette) -> Result<PauliOperator> {
        PauliOperator::z_on(self.n_qubits(), &self.flats(&self.plaquette_links(q)?))
    }

    /// `W_v = A_v B_{v+δ}`.
    pub fn w_operator(&self, v: Vertex) -> Result<PauliOperator> {
        let a = self.star_operator(v)?;
        let b = self.plaquette_operator(self.vertex_plus_delta(v))?;
        a.multiply(&b)
    }

    /// `P_ℓ Q_{ℓ+δ}`, rephased to be Hermitian.
    fn shifted_pair(&self, l: LinkIndex, here: Pauli, there: Pauli) -> Result<PauliOperator> {
        self.check_link(l)?;
        let s = self.shift_by_delta(l);
        let mut op = PauliOperator::from_sites(self.n_qubits(), [(self.flat(l), here)])?;
        op.mul_assign_unchecked(&PauliOperator::from_sites(
            self.n_qubits(),
            [(self.flat(s), there)],
        )?);
        Ok(hermitian(op))
    }

    /// `Z_ℓ X_{ℓ+δ}`.
    pub fn kraus_operator(&self, l: LinkIndex) -> Result<PauliOperator> {
        self.shifted_pair(l, Pauli::Z, Pauli::X)
    }

    /// Link joining two adjacent vertices.
    pub fn link_between(&self, a: Vertex, b: Vertex) -> Option<LinkIndex> {
        let (ax, ay, bx, by) = (a.x as isize, a.y as isize, b.x as isize, b.y as isize);
        if ay == by {
            if self.wrap_x(ax + 1) == b.x {
                return Some(self.h(ax, ay));
            }
            if self.wrap_x(bx + 1) == a.x {
                return Some(self.h(bx, by));
            }
        }
        if ax == bx {
            if self.wrap_y(ay + 1) == b.y {
                return Some(self.v(ax, ay));
            }
            if self.wrap_y(by + 1) == a.y {
                return Some(self.v(bx, by));
            }
        }
        None
    }

    /// Link crossed when stepping between two adjacent plaquettes.
    pub fn dual_link_between(&self, a: Plaquette, b: Plaquette) -> Option<LinkIndex> {
        let (ax, ay, bx, by) = (a.x as isize, a.y as isize, b.x as isize, b.y as isize);
        if ay == by {
            if self.wrap_x(ax + 1) == b.x {
                return Some(self.v(ax + 1, ay));
            }
            if self.wrap_x(bx + 1) == a.x {
                return Some(self.v(bx + 1, by));
            }
        }
        if ax == bx {
            if self.wrap_y(ay + 1) == b.y {
                return Some(self.h(ax, ay + 1));
            }
            if self.wrap_y(by + 1) == a.y {
                return Some(self.h(bx, by + 1));
            }
        }
        None
    }

    /// Links of a path through consecutive adjacent vertices.
    pub fn vertex_path(&self, vertices: &[Vertex]) -> Result<Vec<LinkIndex>> {
        for v in vertices {
            self.check_xy(v.x, v.y)?;
        }
        vertices
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                self.link_between(w[0], w[1])
                    .ok_or(Error::NonAdjacentPath { step: i })
            })
            .collect()
    }

    /// Like [`vertex_path`](Self::vertex_path) but the sequence must return to its start.
    pub fn vertex_loop(&self, vertices: &[Vertex]) -> Result<Vec<LinkIndex>> {
        if vertices.len() < 2 || vertices.first() != vertices.last() {
            return Err(Error::OpenLoop);
        }
        self.vertex_path(vertices)
    }

    /// Links crossed by a path through consecutive adjacent plaquettes.
    pub fn plaquette_path(&self, plaquettes: &[Plaquette]) -> Result<Vec<LinkIndex>> {
        for q in plaquettes {
            self.check_xy(q.x, q.y)?;
        }
        plaquettes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                self.dual_link_between(w[0], w[1])
                    .ok_or(Error::NonAdjacentPath { step: i })
            })
            .collect()
    }

    pub fn plaquette_loop(&self, plaquettes: &[Plaquette]) -> Result<Vec<LinkIndex>> {
        if plaquettes.len() < 2 || plaquettes.first() != plaquettes.last() {
            return Err(Error::OpenLoop);
        }
        self.plaquette_path(plaquettes)
    }

    fn rectangle<T>(
        &self,
        x0: usize,
        y0: usize,
        w: usize,
        h: usize,
        make: impl Fn(usize, usize) -> T,
    ) -> Vec<T> {
        let mut pts = Vec::with_capacity(2 * (w + h) + 1);
        let (x0, y0) = (x0 as isize, y0 as isize);
        let wrap = |x: isize, y: isize| make(self.wrap_x(x), self.wrap_y(y));
        for i in 0..w as isize {
            pts.push(wrap(x0 + i, y0));
        }
        for j in 0..h as isize {
            pts.push(wrap(x0 + w as isize, y0 + j));
        }
        for i in (1..=w as isize).rev() {
            pts.push(wrap(x0 + i, y0 + h as isize));
        }
        for j in (1..=h as isize).rev() {
            pts.push(wrap(x0, y0 + j));
        }
        pts.push(wrap(x0, y0));
        pts
    }

    /// Boundary of the `k × k` square with lower-left corner at `anchor` (v-lattice).
    pub fn square_loop_at(&self, anchor: Vertex, k: usize) -> Result<Vec<LinkIndex>> {
        if k == 0 || k >= self.lx || k >= self.ly {
            return Err(Error::LatticeTooSmall {
                lx: self.lx,
                ly: self.ly,
                reason: format!("square loop of side {k}"),
            });
        }
        self.vertex_loop(&self.rectangle(anchor.x, anchor.y, k, k, Vertex::new))
    }

    /// Boundary of the `k × k` square anchored at vertex `(0,0)`.
    pub fn square_loop(&self, k: usize) -> Result<Vec<LinkIndex>> {
        self.square_loop_at(Vertex::new(0, 0), k)
    }

    /// Closed `k × k` loop on the q-lattice through plaquettes starting at
    /// `q(0,0)`; it encircles the vertices `(1..=k) × (1..=k)`.
    pub fn dual_square_loop(&self, k: usize) -> Result<Vec<LinkIndex>> {
        if k == 0 || k >= self.lx || k >= self.ly {
            return Err(Error::LatticeTooSmall {
                lx: self.lx,
                ly: self.ly,
                reason: format!("dual square loop of side {k}"),
            });
        }
        self.plaquette_loop(&self.rectangle(0, 0, k, k, Plaquette::new))
    }

    /// Vertical links `v(ix, 0..len)`, joining `(ix,0)` to `(ix,len)`.
    pub fn vertical_path(&self, ix: usize, len: usize) -> Result<Vec<LinkIndex>> {
        self.check_xy(ix, 0)?;
        if len >= self.ly {
            return Err(Error::LatticeTooSmall {
                lx: self.lx,
                ly: self.ly,
                reason: format!("vertical path of length {len}"),
            });
        }
        Ok((0..len).map(|y| LinkIndex::v(ix, y)).collect())
    }

    /// Horizontal dual path through plaquettes `q(x0..=x0+len, y)`.
    pub fn horizontal_dual_path(&self, x0: usize, y: usize, len: usize) -> Result<Vec<LinkIndex>> {
        let qs: Vec<_> = (0..=len)
            .map(|i| Plaquette::new((x0 + i) % self.lx, y))
            .collect();
        self.plaquette_path(&qs)
    }

    /// Links crossed by the non-contractible q-lattice loop in `dir`.
    pub fn logical_loop(&self, dir: Direction) -> Vec<LinkIndex> {
        match dir {
            Direction::X => (0..self.lx).map(|x| LinkIndex::v(x, 0)).collect(),
            Direction::Y => (0..self.ly).map(|y| LinkIndex::h(0, y)).collect(),
        }
    }

    /// `∏ X` over the non-contractible q-lattice loop (a 't Hooft logical).
    pub fn logical_x(&self, dir: Direction) -> PauliOperator {
        self.thooft_x(&self.logical_loop(dir))
            .expect("logical loop links are valid")
    }

    /// Wilson operator `∏ Z_ℓ` over a v-lattice link set.
    pub fn wilson_z(&self, links: &[LinkIndex]) -> Result<PauliOperator> {
        for &l in links {
            self.check_link(l)?;
        }
        PauliOperator::z_on(self.n_qubits(), &self.flats(links))
    }

    /// 't Hooft operator `∏ X_ℓ` over the links crossed by a q-lattice path.
    pub fn thooft_x(&self, links: &[LinkIndex]) -> Result<PauliOperator> {
        for &l in links {
            self.check_link(l)?;
        }
        PauliOperator::x_on(self.n_qubits(), &self.flats(links))
    }

    fn shifted_string(
        &self,
        links: &[LinkIndex],
        here: Pauli,
        there: Pauli,
    ) -> Result<PauliOperator> {
        let mut op = PauliOperator::identity(self.n_qubits());
        for &l in links {
            op.mul_assign_unchecked(&self.shifted_pair(l, here, there)?);
        }
        Ok(hermitian(op))
    }

    /// `∏_{ℓ∈C} Z_ℓ X_{ℓ+δ}`, multiplied in the order given and rephased to be
    /// Hermitian when neighbouring factors anticommute.
    pub fn zx_string(&self, links: &[LinkIndex]) -> Result<PauliOperator> {
        self.shifted_string(links, Pauli::Z, Pauli::X)
    }

    /// `∏_{ℓ∈C} X_ℓ Z_{ℓ+δ}`, with the same phase rule as [`zx_string`](Self::zx_string).
    pub fn xz_string(&self, links: &[LinkIndex]) -> Result<PauliOperator> {
        self.shifted_string(links, Pauli::X, Pauli::Z)
    }

    /// ZX loop through vertices (v-lattice); the sequence must be closed.
    pub fn zx_loop(&self, vertices: &[Vertex]) -> Result<PauliOperator> {
        self.zx_string(&self.vertex_loop(vertices)?)
    }

    /// XZ loop through plaquettes (q-lattice); the sequence must be closed.
    pub fn xz_loop(&self, plaquettes: &[Plaquette]) -> Result<PauliOperator> {
        self.xz_string(&self.plaquette_loop(plaquettes)?)
    }

    /// Vertex sequence of the square loop, for callers that need the vertices.
    pub fn square_vertices(&self, anchor: Vertex, k: usize) -> Vec<Vertex> {
        self.rectangle(anchor.x, anchor.y, k, k, Vertex::new)
    }

    pub fn dual_square_plaquettes(&self, anchor: Plaquette, k: usize) -> Vec<Plaquette> {
        self.rectangle(anchor.x, anchor.y, k, k, Plaquette::new)
    }

    /// Links with midpoints in `[0, 2k_A] × [0, 2]`.
    pub fn region_links(&self, k_a: usize) -> Result<Vec<LinkIndex>> {
        if 2 * k_a + 2 > self.lx || self.ly < 4 {
            return Err(Error::RegionTooLarge {
                k_a,
                lx: self.lx,
                ly: self.ly,
            });
        }
        let mut links = Vec::new();
        for y in 0..=2 {
            for x in 0..2 * k_a {
                links.push(LinkIndex::h(x, y));
            }
        }
        for y in 0..2 {
            for x in 0..=2 * k_a {
                links.push(LinkIndex::v(x, y));
            }
        }
        links.sort_by_key(|&l| self.flat(l));
        Ok(links)
    }

    pub fn region_qubits(&self, k_a: usize) -> Result<Vec<usize>> {
        Ok(self.flats(&self.region_links(k_a)?))
    }

    /// Stars except `(0,0)` and plaquettes except `q(0,0)`, in that order.
    pub fn stabilizer_generators(&self) -> Vec<PauliOperator> {
        let stars = self
            .vertices()
            .skip(1)
            .map(|v| self.star_operator(v).expect("valid vertex"));
        let plaqs = self
            .plaquettes()
            .skip(1)
            .map(|q| self.plaquette_operator(q).expect("valid plaquette"));
        stars.chain(plaqs).collect()
    }

    /// Toric-code initial state. Both X logicals are tracked either way; for
    /// [`InitialState::Pure`] they are also generators of the group.
    pub fn build_initial_state(&self, variant: InitialState) -> MixedStabilizerState {
        let base = MixedStabilizerState::new(self.n_qubits(), self.stabilizer_generators())
            .expect("toric code generators are independent and commuting");
        let logicals = vec![self.logical_x(Direction::X), self.logical_x(Direction::Y)];
        match variant {
            InitialState::Pure => base.with_logical_generators(logicals),
            InitialState::Mixed => base.with_tracked_logicals(logicals),
        }
        .expect("X logicals commute with the toric code")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stabilizer::Membership;

    fn lat(n: usize) -> TorusLattice {
        TorusLattice::new(n, n).unwrap()
    }

    #[test]
    fn rejects_tiny_lattices() {
        assert!(TorusLattice::new(2, 5).is_err());
        assert!(TorusLattice::new(3, 3).is_ok());
    }

    #[test]
    fn flat_index_round_trip() {
        let l = TorusLattice::new(5, 4).unwrap();
        for i in 0..l.n_qubits() {
            assert_eq!(l.flat(l.link(i)), i);
        }
        assert_eq!(l.flat(LinkIndex::v(2, 1)), 2 * (5 + 2) + 1);
    }

    #[test]
    fn shift_examples() {
        let l = lat(4);
        assert_eq!(l.shift_by_delta(LinkIndex::h(0, 0)), LinkIndex::v(1, 3));
        assert_eq!(l.shift_by_delta(LinkIndex::v(2, 1)), LinkIndex::h(2, 1));
    }

    #[test]
    fn shift_is_a_permutation_with_inverse() {
        let l = TorusLattice::new(5, 3).unwrap();
        let mut seen = vec![false; l.n_qubits()];
        for link in l.links() {
            let s = l.shift_by_delta(link);
            assert!(!std::mem::replace(&mut seen[l.flat(s)], true));
            assert_eq!(l.unshift_by_delta(s), link);
        }
    }

    #[test]
    fn star_and_plaquette_weights_and_commutation() {
        let l = lat(4);
        for v in l.vertices() {
            let a = l.star_operator(v).unwrap();
            assert_eq!(a.weight(), 4);
            assert!(a.z_bits().iter().all(|&w| w == 0));
            for q in l.plaquettes() {
                assert!(a.commutes(&l.plaquette_operator(q).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn products_of_all_stars_or_plaquettes_vanish() {
        let l = TorusLattice::new(4, 5).unwrap();
        let mut a = PauliOperator::identity(l.n_qubits());
        let mut b = PauliOperator::identity(l.n_qubits());
        for v in l.vertices() {
            a = a.multiply(&l.star_operator(v).unwrap()).unwrap();
        }
        for q in l.plaquettes() {
            b = b.multiply(&l.plaquette_operator(q).unwrap()).unwrap();
        }
        assert!(a.is_identity_string() && b.is_identity_string());
    }

    #[test]
    fn w_operator_shape() {
        let l = lat(4);
        let w = l.w_operator(Vertex::new(1, 2)).unwrap();
        assert_eq!(w.weight(), 6);
        assert!(w.is_hermitian());
        let ys = (0..l.n_qubits()).filter(|&q| w.get(q) == Pauli::Y).count();
        assert_eq!(ys, 2);
        let mut prod = PauliOperator::identity(l.n_qubits());
        for v in l.vertices() {
            prod = prod.multiply(&l.w_operator(v).unwrap()).unwrap();
        }
        assert!(prod.is_identity_string());
        assert!(prod.phase_exp() == 0 || prod.phase_exp() == 2);
    }

    #[test]
    fn kraus_commutes_with_every_w() {
        let l = lat(5);
        for link in l.links() {
            let k = l.kraus_operator(link).unwrap();
            assert_eq!(k.weight(), 2);
            for v in l.vertices() {
                assert!(k.commutes(&l.w_operator(v).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn square_loops() {
        let l = lat(6);
        assert_eq!(l.square_loop(1).unwrap().len(), 4);
        assert_eq!(l.square_loop(3).unwrap().len(), 12);
        assert_eq!(l.dual_square_loop(2).unwrap().len(), 8);
        assert!(l.square_loop(6).is_err());
        let bad = [Vertex::new(0, 0), Vertex::new(2, 0)];
        assert!(matches!(
            l.vertex_path(&bad),
            Err(Error::NonAdjacentPath { step: 0 })
        ));
        let open = [Vertex::new(0, 0), Vertex::new(1, 0)];
        assert!(matches!(l.vertex_loop(&open), Err(Error::OpenLoop)));
    }

    #[test]
    fn dual_single_vertex_loop_is_a_star() {
        let l = lat(5);
        // plaquettes around vertex (1,1): q(0,0) q(1,0) q(1,1) q(0,1)
        let links = l.dual_square_loop(1).unwrap();
        let x = l.thooft_x(&links).unwrap();
        assert_eq!(x, l.star_operator(Vertex::new(1, 1)).unwrap());
        // and the XZ version is W at that vertex up to sign
        let xz = l.xz_string(&links).unwrap();
        let w = l.w_operator(Vertex::new(1, 1)).unwrap();
        assert!(xz.multiply(&w).unwrap().is_identity_string());
    }

    #[test]
    fn region_link_counts() {
        let l = TorusLattice::new(20, 6).unwrap();
        let zero = l.region_links(0).unwrap();
        assert_eq!(zero, vec![LinkIndex::v(0, 0), LinkIndex::v(0, 1)]);
        for k in 0..=9 {
            assert_eq!(l.region_links(k).unwrap().len(), 10 * k + 2);
        }
        assert!(matches!(
            l.region_links(10),
            Err(Error::RegionTooLarge { .. })
        ));
    }

    #[test]
    fn initial_state_counts() {
        let l = lat(4);
        let mixed = l.build_initial_state(InitialState::Mixed);
        assert_eq!(mixed.k(), 2 * 16 - 2);
        assert_eq!(mixed.purity_log2(), -2);
        let pure = l.build_initial_state(InitialState::Pure);
        assert_eq!(pure.k(), 2 * 16);
        assert_eq!(pure.purity_log2(), 0);
        assert_eq!(pure.tracked_logicals().len(), 2);
        for (i, a) in pure.generators().iter().enumerate() {
            for b in &pure.generators()[i + 1..] {
                assert!(a.commutes(b).unwrap());
            }
        }
    }

    #[test]
    fn contractible_wilson_loop_in_toric_code() {
        let l = lat(4);
        let tc = l.build_initial_state(InitialState::Pure);
        let w = l.wilson_z(&l.square_loop(2).unwrap()).unwrap();
        assert_eq!(tc.contains(&w).unwrap(), Membership::PlusMember);
        // non-contractible Z loop: commutes with stabilizers, not with the X logical
        let zloop = l
            .wilson_z(&(0..4).map(|x| LinkIndex::h(x, 1)).collect::<Vec<_>>())
            .unwrap();
        let mixed = l.build_initial_state(InitialState::Mixed);
        assert_eq!(mixed.contains(&zloop).unwrap(), Membership::NotMember);
        assert_eq!(tc.contains(&zloop).unwrap(), Membership::Anticommutes);
    }
}
