//! Mixed stabilizer states `ρ ∝ ∏_n (1 + g_n)/2` and the Pauli dephasing update.

use std::fmt;

use crate::error::{Error, Result};
use crate::f2::{self, BitMatrix, RowSpace};
use crate::pauli::PauliOperator;

/// Result of asking whether a Pauli belongs to a stabilizer group.
///
/// The matching expectation value `Tr[Pρ]` is `+1`, `-1`, `0`, `0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Membership {
    PlusMember,
    MinusMember,
    NotMember,
    Anticommutes,
}

impl Membership {
    pub fn expectation(self) -> i8 {
        match self {
            Membership::PlusMember => 1,
            Membership::MinusMember => -1,
            _ => 0,
        }
    }

    pub fn is_member(self) -> bool {
        matches!(self, Membership::PlusMember | Membership::MinusMember)
    }
}

/// A logical operator followed through dephasing by multiplying in stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackedLogical {
    pub op: PauliOperator,
    pub alive: bool,
}

/// Sparse view of a Pauli used to test commutation against many rows.
struct Probe {
    words: Vec<(usize, u64, u64)>,
}

impl Probe {
    fn new(p: &PauliOperator) -> Self {
        let words = p
            .x_bits()
            .iter()
            .zip(p.z_bits())
            .enumerate()
            .filter(|(_, (x, z))| **x != 0 || **z != 0)
            .map(|(i, (x, z))| (i, *x, *z))
            .collect();
        Self { words }
    }

    #[inline]
    fn anticommutes(&self, g: &PauliOperator) -> bool {
        let (gx, gz) = (g.x_bits(), g.z_bits());
        let mut parity = 0u32;
        for &(i, px, pz) in &self.words {
            parity ^= ((gx[i] & pz) ^ (gz[i] & px)).count_ones();
        }
        parity & 1 == 1
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct MixedStabilizerState {
    n: usize,
    generators: Vec<PauliOperator>,
    // Trailing generators that represent pinned logical operators rather than
    // stabilizers. Tracked logicals are only repaired with rows before them.
    logical_rows: usize,
    logicals: Vec<TrackedLogical>,
}

fn check_hermitian(p: &PauliOperator) -> Result<()> {
    if p.is_hermitian() {
        Ok(())
    } else {
        Err(Error::NotHermitian(p.phase_exp()))
    }
}

impl MixedStabilizerState {
    /// Builds a state from independent, pairwise commuting Hermitian generators.
    pub fn new(n: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        if generators.len() > n {
            return Err(Error::TooManyGenerators {
                k: generators.len(),
                n,
            });
        }
        for g in &generators {
            if g.n_qubits() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: g.n_qubits(),
                });
            }
            check_hermitian(g)?;
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if generators[i].anticommutes_unchecked(&generators[j]) {
                    return Err(Error::NonCommuting(i, j));
                }
            }
        }
        let mut space = RowSpace::new(2 * n);
        for (i, g) in generators.iter().enumerate() {
            if !space.insert(&g.symplectic_row()) {
                return Err(Error::DependentGenerator(i));
            }
        }
        Ok(Self {
            n,
            generators,
            logical_rows: 0,
            logicals: Vec::new(),
        })
    }

    /// The maximally mixed state on `n` qubits (no generators).
    pub fn maximally_mixed(n: usize) -> Self {
        Self {
            n,
            generators: Vec::new(),
            logical_rows: 0,
            logicals: Vec::new(),
        }
    }

    /// Appends logical operators as generators (making them part of the group)
    /// and tracks a copy of each for survival bookkeeping.
    pub fn with_logical_generators(self, logicals: Vec<PauliOperator>) -> Result<Self> {
        let mut gens = self.generators;
        let base = gens.len();
        let count = logicals.len();
        gens.extend(logicals.iter().cloned());
        let mut state = Self::new(self.n, gens)?;
        state.logical_rows = self.logical_rows + count;
        debug_assert!(state.logical_rows <= state.generators.len() && base + count == state.k());
        state.logicals = self.logicals;
        state.logicals.extend(
            logicals
                .into_iter()
                .map(|op| TrackedLogical { op, alive: true }),
        );
        Ok(state)
    }

    /// Tracks logical operators without adding them to the group. Each must
    /// commute with every generator.
    pub fn with_tracked_logicals(mut self, logicals: Vec<PauliOperator>) -> Result<Self> {
        for op in logicals {
            if op.n_qubits() != self.n {
                return Err(Error::DimensionMismatch {
                    left: self.n,
                    right: op.n_qubits(),
                });
            }
            check_hermitian(&op)?;
            if let Some(i) = self
                .generators
                .iter()
                .position(|g| g.anticommutes_unchecked(&op))
            {
                return Err(Error::NonCommuting(i, self.generators.len()));
            }
            self.logicals.push(TrackedLogical { op, alive: true });
        }
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Number of independent generators.
    pub fn k(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn logical_rows(&self) -> usize {
        self.logical_rows
    }

    pub fn tracked_logicals(&self) -> &[TrackedLogical] {
        &self.logicals
    }

    /// `log2 Tr[ρ²] = k − L`.
    pub fn purity_log2(&self) -> i64 {
        self.k() as i64 - self.n as i64
    }

    fn check_size(&self, p: &PauliOperator) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: p.n_qubits(),
            });
        }
        Ok(())
    }

    pub fn commutes_with_all(&self, p: &PauliOperator) -> Result<bool> {
        self.check_size(p)?;
        let probe = Probe::new(p);
        Ok(!self.generators.iter().any(|g| probe.anticommutes(g)))
    }

    /// Indices of generators anticommuting with `p`, ascending.
    pub fn anticommuting_generators(&self, p: &PauliOperator) -> Result<Vec<usize>> {
        self.check_size(p)?;
        let probe = Probe::new(p);
        Ok((0..self.k())
            .filter(|&i| probe.anticommutes(&self.generators[i]))
            .collect())
    }

    /// Applies `ρ → (ρ + PρP)/2`. Returns `true` when a generator was removed.
    pub fn apply_dephasing(&mut self, p: &PauliOperator) -> Result<bool> {
        self.check_size(p)?;
        check_hermitian(p)?;
        let probe = Probe::new(p);
        let anti: Vec<usize> = (0..self.k())
            .filter(|&i| probe.anticommutes(&self.generators[i]))
            .collect();
        let stabilizer_rows = self.k() - self.logical_rows;

        let repair = anti.first().copied().filter(|&i| i < stabilizer_rows);
        for logical in self.logicals.iter_mut().filter(|l| l.alive) {
            if probe.anticommutes(&logical.op) {
                match repair {
                    Some(g) => logical.op.mul_assign_unchecked(&self.generators[g]),
                    None => logical.alive = false,
                }
            }
        }

        let Some((&pivot, rest)) = anti.split_first() else {
            return Ok(false);
        };
        let pivot_op = self.generators[pivot].clone();
        for &i in rest {
            self.generators[i].mul_assign_unchecked(&pivot_op);
        }
        self.generators.remove(pivot);
        if pivot >= stabilizer_rows {
            self.logical_rows -= 1;
        }
        Ok(true)
    }

    /// Reduced row-echelon basis of the group (columns: x bits then z bits).
    pub fn basis(&self) -> GroupBasis {
        GroupBasis::from_rows(self.n, self.generators.clone())
    }

    /// Same group, generators in reduced row-echelon form. The stabilizer block
    /// and the pinned-logical block are reduced separately so that logical
    /// bookkeeping survives.
    pub fn canonicalize(&self) -> Self {
        let split = self.k() - self.logical_rows;
        let head = GroupBasis::from_rows(self.n, self.generators[..split].to_vec());
        let mut tail: Vec<PauliOperator> = self.generators[split..].to_vec();
        for row in &mut tail {
            head.reduce(row);
        }
        let mut blocked = vec![false; 2 * self.n];
        for &p in &head.pivots {
            blocked[p] = true;
        }
        let (tail, _) = rref_rows(self.n, tail, &blocked);
        let mut generators = head.rows;
        generators.extend(tail);
        Self {
            n: self.n,
            generators,
            logical_rows: self.logical_rows,
            logicals: self.logicals.clone(),
        }
    }

    pub fn contains(&self, p: &PauliOperator) -> Result<Membership> {
        self.check_size(p)?;
        if !self.commutes_with_all(p)? {
            return Ok(Membership::Anticommutes);
        }
        Ok(self.basis().solve(p))
    }

    /// Survival flags of the tracked logicals (`true` = dead).
    pub fn logical_dead(&self) -> Result<Vec<bool>> {
        if self.logicals.is_empty() {
            return Err(Error::LogicalsNotTracked);
        }
        Ok(self.logicals.iter().map(|l| !l.alive).collect())
    }

    /// Binary symplectic complement of the group: all `v` commuting with every generator.
    pub fn symplectic_complement(&self) -> Vec<Vec<u64>> {
        let n = self.n;
        // v commutes with g iff g.z·v_x + g.x·v_z = 0: rows are g with halves swapped.
        let rows = self.generators.iter().map(|g| {
            let mut row = vec![0u64; f2::words_for(2 * n)];
            for q in 0..n {
                if g.z_bit(q) {
                    f2::set_bit(&mut row, q, true);
                }
                if g.x_bit(q) {
                    f2::set_bit(&mut row, n + q, true);
                }
            }
            row
        });
        let m = BitMatrix::from_rows(2 * n, rows.collect::<Vec<_>>());
        if m.nrows() == 0 {
            return (0..2 * n)
                .map(|c| {
                    let mut v = vec![0u64; f2::words_for(2 * n)];
                    f2::set_bit(&mut v, c, true);
                    v
                })
                .collect();
        }
        m.nullspace()
    }
}

/// Predicts membership of `p` in the group after dephasing `initial` with each
/// of `kraus`, without simulating the channel.
///
/// The final group is `{g ∈ G₀ : [g, K] = 0 ∀K}`. Its commutant is
/// `G₀^⊥ + span(K)`, which decides `NotMember` versus `Anticommutes`.
pub fn centralizer_membership_oracle(
    initial: &MixedStabilizerState,
    kraus: &[PauliOperator],
    p: &PauliOperator,
) -> Result<Membership> {
    initial.check_size(p)?;
    for k in kraus {
        initial.check_size(k)?;
    }
    let before = initial.contains(p)?;
    let survives = kraus.iter().all(|k| !k.anticommutes_unchecked(p));
    if before.is_member() && survives {
        return Ok(before);
    }
    let mut commutant = RowSpace::new(2 * initial.n);
    for v in initial.symplectic_complement() {
        commutant.insert(&v);
    }
    for k in kraus {
        commutant.insert(&k.symplectic_row());
    }
    if commutant.contains(&p.symplectic_row()) {
        Ok(Membership::NotMember)
    } else {
        Ok(Membership::Anticommutes)
    }
}

/// Gaussian elimination over signed Pauli rows. Columns marked in `blocked`
/// are never chosen as pivots. Zero rows are dropped.
fn rref_rows(
    n: usize,
    mut rows: Vec<PauliOperator>,
    blocked: &[bool],
) -> (Vec<PauliOperator>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut top = 0;
    for (col, &skip) in blocked.iter().enumerate().take(2 * n) {
        if top == rows.len() {
            break;
        }
        if skip {
            continue;
        }
        let Some(found) = (top..rows.len()).find(|&r| rows[r].column(col)) else {
            continue;
        };
        rows.swap(top, found);
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != top && row.column(col) {
                row.mul_assign_unchecked(&pivot_row);
            }
        }
        pivots.push(col);
        top += 1;
    }
    rows.truncate(top);
    (rows, pivots)
}

/// Reduced row-echelon generating set with exact signs, for membership solves.
#[derive(Clone, Debug)]
pub struct GroupBasis {
    n: usize,
    rows: Vec<PauliOperator>,
    pivots: Vec<usize>,
}

impl GroupBasis {
    pub fn from_rows(n: usize, rows: Vec<PauliOperator>) -> Self {
        let (rows, pivots) = rref_rows(n, rows, &vec![false; 2 * n]);
        Self { n, rows, pivots }
    }

    pub fn rows(&self) -> &[PauliOperator] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn reduce(&self, p: &mut PauliOperator) {
        for (row, &col) in self.rows.iter().zip(&self.pivots) {
            if p.column(col) {
                p.mul_assign_unchecked(row);
            }
        }
    }

    /// Membership of `p`, assuming it commutes with the group.
    pub fn solve(&self, p: &PauliOperator) -> Membership {
        debug_assert_eq!(p.n_qubits(), self.n);
        let mut residual = p.clone();
        self.reduce(&mut residual);
        if !residual.is_identity_string() {
            return Membership::NotMember;
        }
        // residual = (∏ rows) · p = i^e · I, so i^{-e} p is a group element.
        match residual.phase_exp() {
            0 => Membership::PlusMember,
            2 => Membership::MinusMember,
            // only reachable for non-Hermitian p
            _ => Membership::NotMember,
        }
    }

    /// Full three-way classification (checks commutation first).
    pub fn classify(&self, p: &PauliOperator) -> Membership {
        if self.rows.iter().any(|g| g.anticommutes_unchecked(p)) {
            Membership::Anticommutes
        } else {
            self.solve(p)
        }
    }
}

impl fmt::Display for MixedStabilizerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "k={} L={}", self.k(), self.n)?;
        for g in &self.generators {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for MixedStabilizerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    fn state(gens: &[&str]) -> MixedStabilizerState {
        let ops: Vec<_> = gens.iter().map(|s| p(s)).collect();
        MixedStabilizerState::new(ops[0].n_qubits(), ops).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_sets() {
        let dep = vec![p("+ZZI"), p("+IZZ"), p("+ZIZ")];
        assert!(matches!(
            MixedStabilizerState::new(3, dep),
            Err(Error::DependentGenerator(2))
        ));
        let anti = vec![p("+XI"), p("+ZI")];
        assert!(matches!(
            MixedStabilizerState::new(2, anti),
            Err(Error::NonCommuting(0, 1))
        ));
        let nonherm = vec![p("+iXI")];
        assert!(matches!(
            MixedStabilizerState::new(2, nonherm),
            Err(Error::NotHermitian(1))
        ));
    }

    #[test]
    fn membership_cases() {
        let s = state(&["+XX", "-ZZ"]);
        assert_eq!(s.contains(&p("+II")).unwrap(), Membership::PlusMember);
        assert_eq!(s.contains(&p("+ZZ")).unwrap(), Membership::MinusMember);
        // XX · (−ZZ) = −(XZ)(XZ) = −(−iY)(−iY) = +YY
        assert_eq!(s.contains(&p("+YY")).unwrap(), Membership::PlusMember);
        assert_eq!(s.contains(&p("+ZI")).unwrap(), Membership::Anticommutes);
        let partial = state(&["+ZII"]);
        assert_eq!(partial.contains(&p("+IZI")).unwrap(), Membership::NotMember);
    }

    #[test]
    fn dephasing_removes_one_generator() {
        let mut s = state(&["+XXX", "+ZZI", "+IZZ"]);
        assert!(s.apply_dephasing(&p("+ZII")).unwrap());
        assert_eq!(s.k(), 2);
        assert_eq!(s.contains(&p("+ZZI")).unwrap(), Membership::PlusMember);
        assert_eq!(s.contains(&p("+XXX")).unwrap(), Membership::NotMember);
        assert!(!s.apply_dephasing(&p("+ZII")).unwrap());
        assert_eq!(s.k(), 2);
        assert!(s.apply_dephasing(&p("+IIX")).unwrap());
        assert_eq!(s.k(), 1);
        assert_eq!(s.contains(&p("+ZZI")).unwrap(), Membership::PlusMember);
    }

    #[test]
    fn dephasing_commuting_is_noop() {
        let mut s = state(&["+ZZ"]);
        let before = s.clone();
        assert!(!s.apply_dephasing(&p("+XX")).unwrap());
        assert_eq!(s, before);
    }

    #[test]
    fn tracked_logical_repair_and_death() {
        // two qubits, stabilizer ZZ, logical XX tracked but not pinned
        let s = state(&["+ZZ"])
            .with_tracked_logicals(vec![p("+XX")])
            .unwrap();
        let mut a = s.clone();
        // ZI anticommutes with XX and commutes with ZZ: nothing can repair it
        a.apply_dephasing(&p("+ZI")).unwrap();
        assert_eq!(a.logical_dead().unwrap(), vec![true]);

        let s = state(&["+XI"])
            .with_tracked_logicals(vec![p("+XX")])
            .unwrap();
        let mut b = s.clone();
        // ZI anticommutes with both XI and XX: repair XX → XX·XI = IX
        b.apply_dephasing(&p("+ZI")).unwrap();
        assert_eq!(b.logical_dead().unwrap(), vec![false]);
        assert_eq!(b.tracked_logicals()[0].op, p("+IX"));
        assert_eq!(b.k(), 0);
    }

    #[test]
    fn pinned_logicals_die_when_only_logical_rows_anticommute() {
        let s = state(&["+ZZ"])
            .with_logical_generators(vec![p("+XX")])
            .unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(s.logical_rows(), 1);
        let mut t = s.clone();
        t.apply_dephasing(&p("+ZI")).unwrap();
        assert_eq!(t.k(), 1);
        assert_eq!(t.logical_rows(), 0);
        assert_eq!(t.logical_dead().unwrap(), vec![true]);
    }

    #[test]
    fn canonicalize_is_idempotent_and_preserves_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 8;
        let mut s = MixedStabilizerState::new(
            n,
            (0..n)
                .map(|q| PauliOperator::z_on(n, &[q]).unwrap())
                .collect(),
        )
        .unwrap();
        // scramble with random dephasings to get a nonlocal commuting set
        for _ in 0..6 {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                let op = PauliOperator::from_sites(
                    n,
                    [(a, crate::pauli::Pauli::X), (b, crate::pauli::Pauli::X)],
                )
                .unwrap();
                s.apply_dephasing(&op).unwrap();
            }
        }
        let c = s.canonicalize();
        assert_eq!(c.canonicalize(), c);
        assert_eq!(c.k(), s.k());
        // random group elements keep their membership
        for _ in 0..100 {
            let mut elem = PauliOperator::identity(n);
            for g in s.generators() {
                if rng.gen_bool(0.5) {
                    elem.mul_assign_unchecked(g);
                }
            }
            assert_eq!(s.contains(&elem).unwrap(), Membership::PlusMember);
            assert_eq!(c.contains(&elem).unwrap(), Membership::PlusMember);
            assert_eq!(
                c.contains(&elem.negated()).unwrap(),
                Membership::MinusMember
            );
        }
    }

    #[test]
    fn complement_of_empty_group_is_everything() {
        let s = MixedStabilizerState::maximally_mixed(3);
        assert_eq!(s.symplectic_complement().len(), 6);
        let t = state(&["+ZII"]);
        assert_eq!(t.symplectic_complement().len(), 5);
    }

    #[test]
    fn dump_format() {
        let s = state(&["+XX", "-ZZ"]);
        assert_eq!(s.to_string(), "k=2 L=2\n+XX\n-ZZ\n");
    }
}
