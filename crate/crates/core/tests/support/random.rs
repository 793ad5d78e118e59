//! Random Pauli operators and stabilizer states.

use rand::Rng;
use zxtoric::pauli::{Pauli, PauliOperator};
use zxtoric::stabilizer::MixedStabilizerState;

/// Uniform non-identity Pauli string with sign `+` (or `±` if `signed`).
pub fn pauli<R: Rng>(n: usize, signed: bool, rng: &mut R) -> PauliOperator {
    loop {
        let mut op = PauliOperator::identity(n);
        for q in 0..n {
            let p = match rng.gen_range(0..4) {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            };
            op.set(q, p);
        }
        if op.is_identity_string() {
            continue;
        }
        if signed && rng.gen_bool(0.5) {
            op = op.negated();
        }
        return op;
    }
}

/// Stabilizer state with `k` random commuting, independent generators.
pub fn state<R: Rng>(n: usize, k: usize, rng: &mut R) -> MixedStabilizerState {
    let mut gens: Vec<PauliOperator> = Vec::new();
    while gens.len() < k {
        let p = pauli(n, true, rng);
        let mut trial = gens.clone();
        trial.push(p);
        if MixedStabilizerState::new(n, trial.clone()).is_ok() {
            gens = trial;
        }
    }
    MixedStabilizerState::new(n, gens).expect("generators checked")
}
