use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zxtoric::channel::{apply_pattern, apply_stochastic_layer, DecoherencePattern};
use zxtoric::ensemble::{run_trajectory, trajectory_seed};
use zxtoric::lattice::{InitialState, TorusLattice};
use zxtoric::observables::{evaluate, ObservableSet};
use zxtoric::stabilizer::{Membership, MixedStabilizerState};

fn same_group(a: &MixedStabilizerState, b: &MixedStabilizerState) -> bool {
    a.k() == b.k()
        && a.generators()
            .iter()
            .all(|g| b.contains(g).unwrap() == Membership::PlusMember)
}

#[test]
fn shuffled_replay_gives_the_same_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for &(lx, ly) in &[(4, 4), (6, 5), (8, 8)] {
        let lat = TorusLattice::new(lx, ly).unwrap();
        let initial = lat.build_initial_state(InitialState::Pure);
        for _ in 0..10 {
            let r = rng.gen_range(0.2..0.8);
            let mut state = initial.clone();
            let pattern = apply_stochastic_layer(&lat, &mut state, r, &mut rng).unwrap();
            let mut shuffled = pattern.links.clone();
            shuffled.shuffle(&mut rng);
            let mut replay = initial.clone();
            let reordered = DecoherencePattern {
                links: shuffled,
                ..pattern.clone()
            };
            apply_pattern(&lat, &mut replay, &reordered).unwrap();
            assert!(same_group(&replay, &state));
            let all = ObservableSet {
                symmetry: true,
                ..Default::default()
            };
            assert_eq!(
                evaluate(&lat, &replay, &all).unwrap(),
                evaluate(&lat, &state, &all).unwrap()
            );
        }
    }
}

#[test]
fn recorded_pattern_reproduces_trajectory() {
    let lat = TorusLattice::new(8, 6).unwrap();
    let initial = lat.build_initial_state(InitialState::Mixed);
    let which = ObservableSet::default();
    let seed = trajectory_seed(9, 8, 6, 2, 17);
    let (pattern, record) = run_trajectory(&lat, &initial, 0.45, seed, &which).unwrap();
    let mut replay = initial.clone();
    apply_pattern(&lat, &mut replay, &pattern).unwrap();
    assert_eq!(evaluate(&lat, &replay, &which).unwrap(), record);
    let (again, record2) = run_trajectory(&lat, &initial, 0.45, seed, &which).unwrap();
    assert_eq!((again, record2), (pattern, record));
}
