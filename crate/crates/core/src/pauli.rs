//! Signed Pauli strings in binary-symplectic form.
//!
//! An operator on `n` qubits is stored as two bit-vectors `x`, `z` and a phase
//! exponent `p` (mod 4). It denotes `i^p · σ(x_0,z_0) ⊗ … ⊗ σ(x_{n-1},z_{n-1})`
//! where `σ(0,0)=I`, `σ(1,0)=X`, `σ(0,1)=Z` and `σ(1,1)=Y = iXZ`. With this
//! normalization an operator is Hermitian exactly when `p ∈ {0, 2}`, i.e. it
//! is `±` a tensor product of `I, X, Y, Z`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::f2::{self, words_for};

/// Single-qubit Pauli label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    /// Product of single-qubit Paulis at the given sites. Repeated sites are
    /// multiplied together in order.
    pub fn from_sites<I>(n: usize, sites: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Pauli)>,
    {
        let mut op = Self::identity(n);
        for (q, p) in sites {
            if q >= n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
            let mut single = Self::identity(n);
            single.set(q, p);
            op.mul_assign_unchecked(&single);
        }
        Ok(op)
    }

    /// `∏ X_q` over the listed qubits (each listed qubit toggled once).
    pub fn x_on(n: usize, qubits: &[usize]) -> Result<Self> {
        Self::from_sites(n, qubits.iter().map(|&q| (q, Pauli::X)))
    }

    /// `∏ Z_q` over the listed qubits.
    pub fn z_on(n: usize, qubits: &[usize]) -> Result<Self> {
        Self::from_sites(n, qubits.iter().map(|&q| (q, Pauli::Z)))
    }

    pub fn from_parts(n: usize, x: Vec<u64>, z: Vec<u64>, phase: u8) -> Self {
        let w = words_for(n);
        assert!(
            x.len() == w && z.len() == w,
            "bit-vector length does not match {n} qubits"
        );
        let mut op = Self {
            n,
            x,
            z,
            phase: phase & 3,
        };
        op.clear_padding();
        op
    }

    fn clear_padding(&mut self) {
        let rem = self.n % f2::WORD_BITS;
        if rem != 0 {
            let mask = (1u64 << rem) - 1;
            if let Some(last) = self.x.last_mut() {
                *last &= mask;
            }
            if let Some(last) = self.z.last_mut() {
                *last &= mask;
            }
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> &[u64] {
        &self.x
    }

    pub fn z_bits(&self) -> &[u64] {
        &self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn x_bit(&self, q: usize) -> bool {
        f2::get_bit(&self.x, q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        f2::get_bit(&self.z, q)
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Overwrites the Pauli on qubit `q`, leaving the global phase alone.
    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        f2::set_bit(&mut self.x, q, x);
        f2::set_bit(&mut self.z, q, z);
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// True when the string part is the identity, regardless of phase.
    pub fn is_identity_string(&self) -> bool {
        f2::is_zero(&self.x) && f2::is_zero(&self.z)
    }

    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.is_identity_string()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.x_bit(q) || self.z_bit(q))
            .collect()
    }

    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.phase = (out.phase + 2) & 3;
        out
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }

    /// `self ← self · other`, sizes assumed equal.
    pub(crate) fn mul_assign_unchecked(&mut self, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        // In the raw X^x Z^z basis: (X^a Z^b)(X^c Z^d) = (-1)^{b·c} X^{a+c} Z^{b+d}.
        // Converting to the Y-normalized basis adds popcount(x&z) per factor.
        let mut acc = u32::from(self.phase) + u32::from(other.phase);
        acc += self.y_count() + other.y_count();
        let swaps: u32 = self
            .z
            .iter()
            .zip(&other.x)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        acc += 2 * swaps;
        f2::xor_into(&mut self.x, &other.x);
        f2::xor_into(&mut self.z, &other.z);
        let y = self.y_count();
        self.phase = ((acc + 4 - (y & 3)) & 3) as u8;
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    #[inline]
    pub(crate) fn anticommutes_unchecked(&self, other: &Self) -> bool {
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        parity & 1 == 1
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_size(other)?;
        Ok(!self.anticommutes_unchecked(other))
    }

    /// Keeps only the listed qubits, in the listed order. The phase is copied.
    pub fn restrict(&self, qubits: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        let mut out = Self::identity(qubits.len());
        for (j, &q) in qubits.iter().enumerate() {
            if q >= self.n {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    n: self.n,
                });
            }
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::DuplicateQubit(q));
            }
            out.set(j, self.get(q));
        }
        out.phase = self.phase;
        Ok(out)
    }

    /// Binary symplectic row `(x | z)` of length `2n` bits.
    pub fn symplectic_row(&self) -> Vec<u64> {
        let mut row = vec![0u64; words_for(2 * self.n)];
        for q in 0..self.n {
            if self.x_bit(q) {
                f2::set_bit(&mut row, q, true);
            }
            if self.z_bit(q) {
                f2::set_bit(&mut row, self.n + q, true);
            }
        }
        row
    }

    pub fn from_symplectic_row(n: usize, row: &[u64]) -> Self {
        let mut op = Self::identity(n);
        for q in 0..n {
            let x = f2::get_bit(row, q);
            let z = f2::get_bit(row, n + q);
            op.set(q, Pauli::from_bits(x, z));
        }
        op
    }

    /// Bit of the `(x | z)` column `col`.
    pub(crate) fn column(&self, col: usize) -> bool {
        if col < self.n {
            self.x_bit(col)
        } else {
            self.z_bit(col - self.n)
        }
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &str| Error::PauliParse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else {
            return Err(fail("missing sign prefix"));
        };
        let mut op = PauliOperator::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let p = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(fail("expected one of I, X, Y, Z")),
            };
            op.set(q, p);
        }
        op.phase = phase;
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let prod = p("+X").multiply(&p("+Z")).unwrap();
        assert_eq!(prod.phase_exp(), 3);
        assert!(prod.x_bit(0) && prod.z_bit(0));
        assert_eq!(prod.to_string(), "-iY");
        assert_eq!(p("+Z").multiply(&p("+X")).unwrap().to_string(), "+iY");
    }

    #[test]
    fn square_is_signed_identity() {
        for s in ["+XYZI", "-YYXZ", "+IIII", "-ZZZY"] {
            let a = p(s);
            let sq = a.multiply(&a).unwrap();
            assert!(sq.is_identity_string());
            assert!(sq.phase_exp() == 0 || sq.phase_exp() == 2);
            assert!(sq.is_identity(), "Hermitian {s} squared must be +I");
        }
        let non_herm = p("+iX");
        assert_eq!(non_herm.multiply(&non_herm).unwrap().phase_exp(), 2);
    }

    #[test]
    fn commutation_basics() {
        assert!(!p("+X").commutes(&p("+Z")).unwrap());
        assert!(p("+XX").commutes(&p("+ZZ")).unwrap());
        assert!(p("+XI").commutes(&p("-IZ")).unwrap());
        assert!(matches!(
            p("+X").commutes(&p("+XX")),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            p("+X").multiply(&p("+XX")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn restrict_examples() {
        let a = PauliOperator::from_sites(4, [(0, Pauli::X), (3, Pauli::Z)]).unwrap();
        assert_eq!(a.restrict(&[0]).unwrap().to_string(), "+X");
        assert_eq!(a.restrict(&[]).unwrap().n_qubits(), 0);
        assert_eq!(a.restrict(&[]).unwrap().to_string(), "+");
        let xx = p("+XX").restrict(&[0]).unwrap();
        let zz = p("+ZZ").restrict(&[0]).unwrap();
        assert!(!xx.commutes(&zz).unwrap());
        assert!(matches!(
            a.restrict(&[4]),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(a.restrict(&[1, 1]), Err(Error::DuplicateQubit(1))));
    }

    #[test]
    fn parse_errors() {
        assert!("XZ".parse::<PauliOperator>().is_err());
        assert!("+XQ".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn wide_operators_cross_word_boundaries() {
        let n = 150;
        let a = PauliOperator::x_on(n, &[0, 64, 129]).unwrap();
        let b = PauliOperator::z_on(n, &[64, 149]).unwrap();
        assert!(!a.commutes(&b).unwrap());
        let c = PauliOperator::z_on(n, &[64, 129]).unwrap();
        assert!(c.commutes(&a).unwrap());
        assert_eq!(a.multiply(&c).unwrap().weight(), 3);
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(move |(sites, phase)| {
            let mut op = PauliOperator::identity(sites.len());
            for (q, s) in sites.into_iter().enumerate() {
                op.set(q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][s as usize]);
            }
            op.with_phase(phase)
        })
    }

    proptest! {
        #[test]
        fn text_round_trip(a in arb_pauli(9)) {
            let back: PauliOperator = a.to_string().parse().unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn product_parity_is_xor_of_parities(a in arb_pauli(70), b in arb_pauli(70), c in arb_pauli(70)) {
            let ab = a.multiply(&b).unwrap();
            let lhs = !ab.commutes(&c).unwrap();
            let rhs = !a.commutes(&c).unwrap() ^ !b.commutes(&c).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.commutes(&b).unwrap(), b.commutes(&a).unwrap());
        }

        #[test]
        fn multiplication_is_associative(a in arb_pauli(7), b in arb_pauli(7), c in arb_pauli(7)) {
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn commuting_hermitian_product_is_hermitian(a in arb_pauli(6), b in arb_pauli(6)) {
            let a = a.with_phase(0);
            let b = b.with_phase(2);
            let ab = a.multiply(&b).unwrap();
            prop_assert_eq!(ab.is_hermitian(), a.commutes(&b).unwrap());
        }
    }
}
