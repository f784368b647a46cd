//! Shared generators for the integration suites: seeded random systems and
//! arrows over each weight algebra.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tausat::semiring::{Semiring, SemiringKind, Weight};
use tausat::wlts::{KleisliMap, LabelAlgebra, StateSpace, System};

pub const KINDS: [SemiringKind; 4] = [
    SemiringKind::Boolean,
    SemiringKind::Arith,
    SemiringKind::NatInf,
    SemiringKind::Tropical,
];

pub fn algebra(labels: &[&str]) -> Arc<LabelAlgebra> {
    Arc::new(LabelAlgebra::tau_absorption(labels).unwrap())
}

pub fn space(n: usize, prefix: &str) -> Arc<StateSpace> {
    let names: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    StateSpace::new(&names).unwrap()
}

pub fn random_weight(rng: &mut ChaCha8Rng, kind: SemiringKind) -> Weight {
    match kind {
        SemiringKind::Boolean => Weight::Bool(true),
        SemiringKind::NatInf => Weight::int(rng.gen_range(1..=2)),
        SemiringKind::Arith => Weight::rat(rng.gen_range(1..=3), rng.gen_range(1..=4)),
        SemiringKind::Tropical => Weight::rat(rng.gen_range(0..=6), rng.gen_range(1..=2)),
    }
}

/// A random sparse arrow between the given spaces: roughly `density` cells
/// per source state.
pub fn random_map(
    rng: &mut ChaCha8Rng,
    kind: SemiringKind,
    alg: &Arc<LabelAlgebra>,
    source: &Arc<StateSpace>,
    target: &Arc<StateSpace>,
    density: usize,
) -> KleisliMap {
    let sr = Semiring::new(kind);
    let labels: Vec<_> = alg.labels().collect();
    let mut m = KleisliMap::zero(sr, alg.clone(), source.clone(), target.clone());
    for x in source.indices() {
        for _ in 0..rng.gen_range(0..=density) {
            let a = labels[rng.gen_range(0..labels.len())];
            let y = rng.gen_range(0..target.len());
            let w = random_weight(rng, kind);
            m.accumulate(x, a, y, w);
        }
    }
    m
}

/// A random endo-system with up to `max_states` states.
pub fn random_system(
    rng: &mut ChaCha8Rng,
    kind: SemiringKind,
    labels: &[&str],
    max_states: usize,
    density: usize,
) -> System {
    let n = rng.gen_range(1..=max_states);
    let alg = algebra(labels);
    let s = space(n, "s");
    let m = random_map(rng, kind, &alg, &s, &s, density);
    System::new(m).unwrap()
}
