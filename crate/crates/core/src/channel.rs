//! The local ZX dephasing channel `ρ → ½ρ + ½ Z_ℓX_{ℓ+δ} ρ Z_ℓX_{ℓ+δ}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LinkIndex, TorusLattice};
use crate::pauli::PauliOperator;
use crate::stabilizer::MixedStabilizerState;

/// Links hit by the channel in one trajectory, as ascending flat indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoherencePattern {
    pub lx: usize,
    pub ly: usize,
    pub links: Vec<usize>,
}

impl DecoherencePattern {
    pub fn empty(lattice: &TorusLattice) -> Self {
        Self {
            lx: lattice.lx(),
            ly: lattice.ly(),
            links: Vec::new(),
        }
    }

    pub fn full(lattice: &TorusLattice) -> Self {
        Self {
            lx: lattice.lx(),
            ly: lattice.ly(),
            links: (0..lattice.n_qubits()).collect(),
        }
    }

    /// Pattern from arbitrary flat indices; sorts and deduplicates.
    pub fn from_links(lattice: &TorusLattice, mut links: Vec<usize>) -> Result<Self> {
        let n = lattice.n_qubits();
        if let Some(&bad) = links.iter().find(|&&l| l >= n) {
            return Err(Error::QubitOutOfRange { index: bad, n });
        }
        links.sort_unstable();
        links.dedup();
        Ok(Self {
            lx: lattice.lx(),
            ly: lattice.ly(),
            links,
        })
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn contains(&self, flat: usize) -> bool {
        self.links.binary_search(&flat).is_ok()
    }

    /// Per-link membership mask of length `2·Lx·Ly`.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; 2 * self.lx * self.ly];
        for &l in &self.links {
            mask[l] = true;
        }
        mask
    }

    pub fn link_indices<'a>(
        &'a self,
        lattice: &'a TorusLattice,
    ) -> impl Iterator<Item = LinkIndex> + 'a {
        self.links.iter().map(|&l| lattice.link(l))
    }
}

/// `Z_ℓ X_{ℓ+δ}`.
pub fn kraus_for(lattice: &TorusLattice, link: LinkIndex) -> Result<PauliOperator> {
    lattice.kraus_operator(link)
}

fn check_probability(r: f64) -> Result<()> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(r))
    }
}

/// One sweep over links in ascending flat order, dephasing each with probability `r`.
pub fn apply_stochastic_layer<R: Rng + ?Sized>(
    lattice: &TorusLattice,
    state: &mut MixedStabilizerState,
    r: f64,
    rng: &mut R,
) -> Result<DecoherencePattern> {
    check_probability(r)?;
    let mut links = Vec::new();
    for flat in 0..lattice.n_qubits() {
        if rng.gen_bool(r) {
            state.apply_dephasing(&lattice.kraus_operator(lattice.link(flat))?)?;
            links.push(flat);
        }
    }
    Ok(DecoherencePattern {
        lx: lattice.lx(),
        ly: lattice.ly(),
        links,
    })
}

/// Replays a recorded pattern in its stored order.
pub fn apply_pattern(
    lattice: &TorusLattice,
    state: &mut MixedStabilizerState,
    pattern: &DecoherencePattern,
) -> Result<()> {
    if (pattern.lx, pattern.ly) != (lattice.lx(), lattice.ly()) {
        return Err(Error::DimensionMismatch {
            left: lattice.n_qubits(),
            right: 2 * pattern.lx * pattern.ly,
        });
    }
    for &flat in &pattern.links {
        state.apply_dephasing(&lattice.kraus_operator(lattice.link(flat))?)?;
    }
    Ok(())
}

/// Dephasing on every link.
pub fn apply_maximal(lattice: &TorusLattice, state: &mut MixedStabilizerState) -> Result<()> {
    apply_pattern(lattice, state, &DecoherencePattern::full(lattice))
}

/// Kraus operators for every link of a pattern.
pub fn pattern_kraus(
    lattice: &TorusLattice,
    pattern: &DecoherencePattern,
) -> Result<Vec<PauliOperator>> {
    pattern
        .links
        .iter()
        .map(|&l| lattice.kraus_operator(lattice.link(l)))
        .collect()
}
