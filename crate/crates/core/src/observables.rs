//! Per-state observables: negativity, order/disorder parameters, symmetry
//! diagnostics and logical survival.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f2::BitMatrix;
use crate::lattice::{LinkIndex, Plaquette, TorusLattice};
use crate::pauli::PauliOperator;
use crate::stabilizer::{GroupBasis, Membership, MixedStabilizerState};

/// `N_A = rank(J)/2`, with `J` the anticommutation matrix of the generators
/// restricted to `region` (flat qubit indices).
pub fn negativity(state: &MixedStabilizerState, region: &[usize]) -> Result<f64> {
    let restricted: Vec<PauliOperator> = state
        .generators()
        .iter()
        .map(|g| g.restrict(region))
        .filter(|r| r.as_ref().map_or(true, |p| !p.is_identity_string()))
        .collect::<Result<_>>()?;
    let m = restricted.len();
    let mut j = BitMatrix::zeros(m, m);
    for a in 0..m {
        for b in a + 1..m {
            if restricted[a].anticommutes_unchecked(&restricted[b]) {
                j.set(a, b, true);
                j.set(b, a, true);
            }
        }
    }
    Ok(j.rank() as f64 / 2.0)
}

fn ci_from_membership(m: Membership) -> bool {
    if m == Membership::MinusMember {
        log::warn!("Wilson loop is a stabilizer with sign -1; reporting C^I = 0");
    }
    m == Membership::PlusMember
}

/// `C^I(ρ, γ')`: `1` iff the Wilson loop on `gamma` is a `+1` stabilizer.
pub fn order_param_ci(
    lattice: &TorusLattice,
    state: &MixedStabilizerState,
    gamma: &[LinkIndex],
) -> Result<bool> {
    Ok(ci_from_membership(
        state.contains(&lattice.wilson_z(gamma)?)?,
    ))
}

/// Number of square loops entering `χ^I`: `min(Lx−2, Ly−2)`.
pub fn n_loops(lattice: &TorusLattice) -> usize {
    (lattice.lx() - 2).min(lattice.ly() - 2)
}

/// `C^I` on `square_loop(k)` for `k = 1..=N_ℓ`.
pub fn ci_by_loop(lattice: &TorusLattice, state: &MixedStabilizerState) -> Result<Vec<bool>> {
    let basis = state.basis();
    ci_by_loop_with(lattice, &basis)
}

fn ci_by_loop_with(lattice: &TorusLattice, basis: &GroupBasis) -> Result<Vec<bool>> {
    (1..=n_loops(lattice))
        .map(|k| {
            let w = lattice.wilson_z(&lattice.square_loop(k)?)?;
            Ok(ci_from_membership(basis.classify(&w)))
        })
        .collect()
}

fn mean(flags: &[bool]) -> f64 {
    if flags.is_empty() {
        return 0.0;
    }
    flags.iter().filter(|&&b| b).count() as f64 / flags.len() as f64
}

/// `χ^I`: average of `C^I` over the square loops.
pub fn chi_i(lattice: &TorusLattice, state: &MixedStabilizerState) -> Result<f64> {
    Ok(mean(&ci_by_loop(lattice, state)?))
}

/// Rényi-2 correlator `Tr[PρPρ]/Tr[ρ²]` for a Pauli `P`: `1` iff `P`
/// commutes with every generator.
pub fn renyi2_correlator(state: &MixedStabilizerState, p: &PauliOperator) -> Result<bool> {
    state.commutes_with_all(p)
}

/// The vertical strings entering `χ^II`, as `(ix, len)` pairs.
pub fn chi_ii_strings(lattice: &TorusLattice) -> Result<Vec<(usize, usize)>> {
    if lattice.ly() < 4 {
        return Err(Error::LatticeTooSmall {
            lx: lattice.lx(),
            ly: lattice.ly(),
            reason: "chi_II needs Ly >= 4".into(),
        });
    }
    Ok((0..lattice.lx())
        .flat_map(|ix| (1..=lattice.ly() - 3).map(move |len| (ix, len)))
        .collect())
}

/// `C^II` for every string of [`chi_ii_strings`], in the same order.
///
/// A generator anticommutes with the string on `v(ix, 0..len)` iff the parity
/// of `x[v(ix,j)] ⊕ z[shift(v(ix,j))]` over `j < len` is odd, so each column
/// needs one prefix scan per generator.
pub fn cii_by_string(lattice: &TorusLattice, state: &MixedStabilizerState) -> Result<Vec<bool>> {
    let strings = chi_ii_strings(lattice)?;
    let (lx, ly) = (lattice.lx(), lattice.ly());
    let max_len = ly - 3;
    let mut broken = vec![false; lx * max_len];
    let columns: Vec<Vec<(usize, usize)>> = (0..lx)
        .map(|ix| {
            (0..max_len)
                .map(|j| {
                    let l = LinkIndex::v(ix, j);
                    (lattice.flat(l), lattice.flat(lattice.shift_by_delta(l)))
                })
                .collect()
        })
        .collect();
    for g in state.generators() {
        for (ix, col) in columns.iter().enumerate() {
            let mut parity = false;
            for (j, &(zq, xq)) in col.iter().enumerate() {
                parity ^= g.x_bit(zq) ^ g.z_bit(xq);
                if parity {
                    broken[ix * max_len + j] = true;
                }
            }
        }
    }
    Ok(strings
        .iter()
        .map(|&(ix, len)| !broken[ix * max_len + len - 1])
        .collect())
}

/// Same values as [`cii_by_string`], one commutation sweep per string.
pub fn cii_by_string_direct(
    lattice: &TorusLattice,
    state: &MixedStabilizerState,
) -> Result<Vec<bool>> {
    chi_ii_strings(lattice)?
        .into_iter()
        .map(|(ix, len)| {
            renyi2_correlator(state, &lattice.zx_string(&lattice.vertical_path(ix, len)?)?)
        })
        .collect()
}

/// `χ^II`: average of `C^II` over vertical strings.
pub fn chi_ii(lattice: &TorusLattice, state: &MixedStabilizerState) -> Result<f64> {
    Ok(mean(&cii_by_string(lattice, state)?))
}

/// `U ρ = e^{iθ} ρ` for Pauli `U`: `U` is a signed stabilizer.
pub fn is_strong_symmetric(state: &MixedStabilizerState, p: &PauliOperator) -> Result<bool> {
    Ok(state.contains(p)?.is_member())
}

/// `U ρ U† = ρ` for Pauli `U`: `U` commutes with every generator.
pub fn is_weak_symmetric(state: &MixedStabilizerState, p: &PauliOperator) -> Result<bool> {
    state.commutes_with_all(p)
}

/// Channel strong symmetry: every Kraus operator commutes with `U`.
pub fn is_channel_strong_symmetric(kraus: &[PauliOperator], p: &PauliOperator) -> Result<bool> {
    for k in kraus {
        if !k.commutes(p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Channel weak symmetry: conjugation by `U` maps every term `KρK†` to
/// itself, i.e. `U K U† = ±K`.
pub fn is_channel_weak_symmetric(kraus: &[PauliOperator], p: &PauliOperator) -> Result<bool> {
    for k in kraus {
        let conj = p.multiply(k)?.multiply(p)?;
        let same = conj == *k || conj == k.negated();
        if !same {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Strong/weak 1-form SSB order and disorder parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryDiagnostics {
    pub o1: bool,
    pub o2: bool,
    pub d1: bool,
    pub d2: bool,
}

/// `O₁ = [loop is a +1 stabilizer]`, `O₂ = Rényi-2 of the loop`,
/// `D₁ = [string is a +1 stabilizer]`, `D₂ = Rényi-2 of the string`.
pub fn symmetry_diagnostics(
    state: &MixedStabilizerState,
    probe_loop: &PauliOperator,
    xz_open_string: &PauliOperator,
) -> Result<SymmetryDiagnostics> {
    Ok(SymmetryDiagnostics {
        o1: state.contains(probe_loop)? == Membership::PlusMember,
        o2: renyi2_correlator(state, probe_loop)?,
        d1: state.contains(xz_open_string)? == Membership::PlusMember,
        d2: renyi2_correlator(state, xz_open_string)?,
    })
}

/// Default probes: the Wilson loop on `square_loop(2)`, the 't Hooft loop on
/// `dual_square_loop(2)` and an XZ string across two plaquettes.
pub fn default_probes(
    lattice: &TorusLattice,
) -> Result<(PauliOperator, PauliOperator, PauliOperator)> {
    let wilson = lattice.wilson_z(&lattice.square_loop(2)?)?;
    let thooft = lattice.thooft_x(&lattice.dual_square_loop(2)?)?;
    let qs = [
        Plaquette::new(0, 1),
        Plaquette::new(1, 1),
        Plaquette::new(2, 1),
    ];
    let string = lattice.xz_string(&lattice.plaquette_path(&qs)?)?;
    Ok((wilson, thooft, string))
}

/// Which observables to evaluate per trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObservableSet {
    pub negativity: bool,
    pub chi_i: bool,
    pub chi_ii: bool,
    pub logicals: bool,
    pub symmetry: bool,
}

impl Default for ObservableSet {
    fn default() -> Self {
        Self {
            negativity: true,
            chi_i: true,
            chi_ii: true,
            logicals: true,
            symmetry: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativityPoint {
    pub k_a: usize,
    pub n_a: f64,
}

/// Everything measured on one final state.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub negativity_by_k_a: Vec<NegativityPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c_i: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_ii: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub logical_dead: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_logical_dead: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryDiagnostics>,
}

/// Range of region sizes used for negativity: `1..=(Lx−2)/2`.
pub fn negativity_k_range(lattice: &TorusLattice) -> std::ops::RangeInclusive<usize> {
    1..=(lattice.lx() - 2) / 2
}

pub fn evaluate(
    lattice: &TorusLattice,
    state: &MixedStabilizerState,
    which: &ObservableSet,
) -> Result<ObservableRecord> {
    let mut rec = ObservableRecord::default();
    if which.negativity && lattice.ly() >= 4 {
        for k_a in negativity_k_range(lattice) {
            let n_a = negativity(state, &lattice.region_qubits(k_a)?)?;
            rec.negativity_by_k_a.push(NegativityPoint { k_a, n_a });
        }
    }
    if which.chi_i {
        rec.c_i = ci_by_loop(lattice, state)?;
        rec.chi_i = Some(mean(&rec.c_i));
    }
    if which.chi_ii && lattice.ly() >= 4 {
        rec.chi_ii = Some(chi_ii(lattice, state)?);
    }
    if which.logicals && !state.tracked_logicals().is_empty() {
        rec.logical_dead = state.logical_dead()?;
        rec.p_logical_dead = Some(mean(&rec.logical_dead));
    }
    if which.symmetry {
        let (wilson, _, string) = default_probes(lattice)?;
        rec.symmetry = Some(symmetry_diagnostics(state, &wilson, &string)?);
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_maximal, apply_stochastic_layer};
    use crate::lattice::{InitialState, Vertex};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn bell_pair_negativity() {
        let s = MixedStabilizerState::new(2, vec![p("+XX"), p("+ZZ")]).unwrap();
        assert_eq!(negativity(&s, &[0]).unwrap(), 1.0);
        let prod = MixedStabilizerState::new(3, vec![p("+ZII"), p("+IZI"), p("+IIZ")]).unwrap();
        assert_eq!(negativity(&prod, &[0, 2]).unwrap(), 0.0);
    }

    #[test]
    fn toric_code_values() {
        let lat = TorusLattice::new(6, 6).unwrap();
        let tc = lat.build_initial_state(InitialState::Pure);
        assert_eq!(chi_i(&lat, &tc).unwrap(), 1.0);
        assert_eq!(chi_ii(&lat, &tc).unwrap(), 0.0);
        let mut f = tc.clone();
        apply_maximal(&lat, &mut f).unwrap();
        assert_eq!(chi_i(&lat, &f).unwrap(), 0.0);
        assert_eq!(chi_ii(&lat, &f).unwrap(), 1.0);
        let mixed = MixedStabilizerState::maximally_mixed(lat.n_qubits());
        assert_eq!(chi_i(&lat, &mixed).unwrap(), 0.0);
    }

    #[test]
    fn single_dangerous_link_kills_ci() {
        let lat = TorusLattice::new(6, 6).unwrap();
        let gamma = lat.square_loop(2).unwrap();
        let mut s = lat.build_initial_state(InitialState::Pure);
        assert!(order_param_ci(&lat, &s, &gamma).unwrap());
        let l = lat.unshift_by_delta(gamma[2]);
        s.apply_dephasing(&lat.kraus_operator(l).unwrap()).unwrap();
        assert!(!order_param_ci(&lat, &s, &gamma).unwrap());
    }

    #[test]
    fn fast_cii_matches_direct() {
        let lat = TorusLattice::new(6, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for r in [0.2, 0.5, 0.8] {
            let mut s = lat.build_initial_state(InitialState::Pure);
            apply_stochastic_layer(&lat, &mut s, r, &mut rng).unwrap();
            assert_eq!(
                cii_by_string(&lat, &s).unwrap(),
                cii_by_string_direct(&lat, &s).unwrap()
            );
        }
    }

    #[test]
    fn symmetry_predicates() {
        let lat = TorusLattice::new(6, 6).unwrap();
        let mut f = lat.build_initial_state(InitialState::Pure);
        apply_maximal(&lat, &mut f).unwrap();
        let zx = lat
            .zx_loop(&lat.square_vertices(Vertex::new(1, 1), 2))
            .unwrap();
        assert!(!is_strong_symmetric(&f, &zx).unwrap());
        assert!(is_weak_symmetric(&f, &zx).unwrap());
        let xz = lat.xz_string(&lat.dual_square_loop(2).unwrap()).unwrap();
        assert!(is_strong_symmetric(&f, &xz).unwrap());
        let empty = MixedStabilizerState::maximally_mixed(lat.n_qubits());
        assert!(is_weak_symmetric(&empty, &zx).unwrap());
    }

    #[test]
    fn channel_symmetry() {
        let lat = TorusLattice::new(5, 5).unwrap();
        let kraus: Vec<_> = lat
            .links()
            .map(|l| lat.kraus_operator(l).unwrap())
            .collect();
        let zx = lat.zx_string(&lat.square_loop(2).unwrap()).unwrap();
        assert!(!is_channel_strong_symmetric(&kraus, &zx).unwrap());
        assert!(is_channel_weak_symmetric(&kraus, &zx).unwrap());
        let xz = lat.xz_string(&lat.dual_square_loop(2).unwrap()).unwrap();
        assert!(is_channel_strong_symmetric(&kraus, &xz).unwrap());
    }

    #[test]
    fn evaluate_respects_toggles() {
        let lat = TorusLattice::new(8, 6).unwrap();
        let s = lat.build_initial_state(InitialState::Pure);
        let all = ObservableSet {
            symmetry: true,
            ..Default::default()
        };
        let rec = evaluate(&lat, &s, &all).unwrap();
        assert_eq!(rec.negativity_by_k_a.len(), 3);
        assert_eq!(rec.c_i.len(), 4);
        assert_eq!(rec.logical_dead, vec![false, false]);
        assert!(rec.symmetry.is_some());
        let none = ObservableSet {
            negativity: false,
            chi_i: false,
            chi_ii: false,
            logicals: false,
            symmetry: false,
        };
        assert_eq!(
            evaluate(&lat, &s, &none).unwrap(),
            ObservableRecord::default()
        );
    }
}
