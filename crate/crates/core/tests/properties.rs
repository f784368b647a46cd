//! Property tests for the algebraic invariants: composition laws across all
//! four weight algebras, refinement stability, and the convex engine's
//! monad-shaped laws.

mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use common::{algebra, random_system, space};
use tausat::bisim::{
    all_partitions, greatest_weak_bisim, is_weak_bisim, weak_rows, BisimOptions, Partition,
};
use tausat::saturation::{saturate, SolveConfig};
use tausat::segala::{cm_compose, ConvexArrow, Gen};
use tausat::semiring::{Semiring, SemiringKind, Weight};
use tausat::wlts::{compose, KleisliMap, Label, LabelAlgebra, StateSpace};

type EdgeSpec = (usize, usize, usize, i64, i64);

fn edges(sources: usize, targets: usize) -> impl Strategy<Value = Vec<EdgeSpec>> {
    proptest::collection::vec(
        (0..sources, 0..3usize, 0..targets, 1..4i64, 1..4i64),
        0..6,
    )
}

fn kinds() -> impl Strategy<Value = usize> {
    0..4usize
}

fn kind_of(i: usize) -> SemiringKind {
    [
        SemiringKind::Boolean,
        SemiringKind::Arith,
        SemiringKind::NatInf,
        SemiringKind::Tropical,
    ][i]
}

fn build_map(
    kind: SemiringKind,
    alg: &Arc<LabelAlgebra>,
    source: &Arc<StateSpace>,
    target: &Arc<StateSpace>,
    edges: &[EdgeSpec],
) -> KleisliMap {
    let sr = Semiring::new(kind);
    let labels: Vec<Label> = alg.labels().collect();
    let mut m = KleisliMap::zero(sr, alg.clone(), source.clone(), target.clone());
    for &(x, l, y, num, den) in edges {
        let w = match kind {
            SemiringKind::Boolean => Weight::Bool(true),
            SemiringKind::NatInf => Weight::int(num),
            _ => Weight::rat(num, den),
        };
        m.accumulate(x % source.len(), labels[l], y % target.len(), w);
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_is_associative(k in kinds(), ef in edges(3, 3), eg in edges(3, 3), eh in edges(3, 3)) {
        let kind = kind_of(k);
        let alg = algebra(&["a", "b"]);
        let sx = space(3, "x");
        let sy = space(3, "y");
        let sz = space(3, "z");
        let sw = space(3, "w");
        let f = build_map(kind, &alg, &sx, &sy, &ef);
        let g = build_map(kind, &alg, &sy, &sz, &eg);
        let h = build_map(kind, &alg, &sz, &sw, &eh);
        let left = compose(&h, &compose(&g, &f).unwrap()).unwrap();
        let right = compose(&compose(&h, &g).unwrap(), &f).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn join_is_entrywise_least_upper_bound(k in kinds(), ef in edges(3, 3), eg in edges(3, 3), eu in edges(3, 3)) {
        let kind = kind_of(k);
        let alg = algebra(&["a", "b"]);
        let s = space(3, "s");
        let f = build_map(kind, &alg, &s, &s, &ef);
        let g = build_map(kind, &alg, &s, &s, &eg);
        let j = f.join(&g).unwrap();
        prop_assert!(f.leq(&j).unwrap());
        prop_assert!(g.leq(&j).unwrap());
        // any upper bound dominates the join
        let u = build_map(kind, &alg, &s, &s, &eu).join(&f).unwrap().join(&g).unwrap();
        prop_assert!(j.leq(&u).unwrap());
    }

    #[test]
    fn weight_literals_round_trip(num in 0i64..2000, den in 1i64..2000) {
        let w = Weight::rat(num, den);
        prop_assert_eq!(Weight::parse(&w.to_string()).unwrap(), w);
    }
}

/// The weak row map equals the composition of the block embedding with the
/// saturation (the summation shortcut is the composition).
#[test]
fn weak_rows_equal_embedding_after_saturation() {
    for kind in common::KINDS {
        let mut rng = ChaCha8Rng::seed_from_u64(0xE0 ^ kind as u64);
        for _ in 0..20 {
            let sys = random_system(&mut rng, kind, &["a"], 4, 2);
            let n = sys.states().len();
            let p = random_partition(&mut rng, n);
            let cfg = SolveConfig::default();
            let rows = weak_rows(&sys, &p, &cfg).unwrap();
            let sat = saturate(&sys, &cfg).unwrap();
            let embed = KleisliMap::embed(
                sys.semiring(),
                sys.algebra().clone(),
                sys.states().clone(),
                p.block_space(sys.states()).unwrap(),
                &p.quotient(),
            )
            .unwrap();
            assert_eq!(rows, compose(&embed, &sat.value).unwrap(), "{kind}");
        }
    }
}

/// Cross-validation of the exact policy solver against plain ε-iteration on
/// random sub-stochastic systems (τ-mass ≤ 3/4 per state keeps the linear
/// part contractive, so iteration converges): the Kleene chain approaches
/// the policy solution from below and lands within the derived error bound.
#[test]
fn policy_and_iterate_agree_on_contractive_arith() {
    use tausat::saturation::{ps_solve, SolveMode, SolveStatus};
    let mut rng = ChaCha8Rng::seed_from_u64(0x9013);
    let alg = algebra(&["a"]);
    let a = alg.label("a").unwrap();
    for _ in 0..30 {
        let n = rng.gen_range(2..=4);
        let s = space(n, "s");
        let sr = Semiring::new(SemiringKind::Arith);
        let mut m = KleisliMap::zero(sr, alg.clone(), s.clone(), s.clone());
        for x in 0..n {
            if rng.gen_bool(0.8) {
                // one τ-edge with weight ≤ 3/4
                let den = rng.gen_range(4..=8);
                let num = rng.gen_range(1..=(3 * den / 4));
                m.set(x, Label::TAU, rng.gen_range(0..n), Weight::rat(num, den))
                    .unwrap();
            }
            for _ in 0..rng.gen_range(0..=2) {
                m.accumulate(
                    x,
                    a,
                    rng.gen_range(0..n),
                    Weight::rat(rng.gen_range(1..=3), rng.gen_range(1..=2)),
                );
            }
        }
        let sys = tausat::wlts::System::new(m).unwrap();
        let f = KleisliMap::unit(sys.semiring(), sys.algebra().clone(), sys.states().clone());
        let exact = ps_solve(&sys, &f, &SolveConfig::with_mode(SolveMode::Policy)).unwrap();
        assert!(exact.status.is_exact());
        let approx = ps_solve(&sys, &f, &SolveConfig::with_mode(SolveMode::Iterate)).unwrap();
        assert!(matches!(approx.status, SolveStatus::Converged { .. }));
        // from below...
        assert!(approx.value.leq(&exact.value).unwrap());
        // ...and within 1e-9 entrywise (ε·ρ/(1−ρ) ≤ 3e-12 with ρ ≤ 3/4)
        let bound = tausat::semiring::parse_rational("1e-9").unwrap();
        for ((x, l, y), w) in exact.value.entries() {
            let d = tausat::semiring::numeric_delta(w, &approx.value.get(x, l, y)).unwrap();
            assert!(d <= bound, "cell ({x},{l:?},{y}): delta {d}");
        }
    }
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Partition {
    let k = rng.gen_range(1..=n);
    let mut blocks: Vec<Vec<usize>> = (0..k).map(|_| Vec::new()).collect();
    for s in 0..n {
        blocks[rng.gen_range(0..k)].push(s);
    }
    blocks.retain(|b| !b.is_empty());
    Partition::new(blocks, n).unwrap()
}

/// The refinement output is stable (one more round changes nothing) and is
/// coarser than or equal to every partition the exhaustive check accepts.
#[test]
fn greatest_weak_bisim_is_stable_and_coarsest() {
    let opts = BisimOptions::default();
    for kind in common::KINDS {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6B ^ kind as u64);
        for _ in 0..15 {
            let sys = random_system(&mut rng, kind, &["a"], 4, 2);
            let verdict = greatest_weak_bisim(&sys, &opts).unwrap();
            // stability: the result is itself a weak bisimulation
            assert!(is_weak_bisim(&sys, &verdict.partition, &opts).unwrap());
            // every accepted partition refines the output
            for p in all_partitions(sys.states().len()) {
                if is_weak_bisim(&sys, &p, &opts).unwrap() {
                    assert!(
                        p.refines(&verdict.partition),
                        "{kind}: accepted {:?} does not refine {:?}",
                        p.blocks(),
                        verdict.partition.blocks()
                    );
                }
            }
        }
    }
}

/// compare is reflexive and symmetric on sampled system pairs.
#[test]
fn compare_is_reflexive_and_symmetric() {
    for kind in common::KINDS {
        let mut rng = ChaCha8Rng::seed_from_u64(0xCE ^ kind as u64);
        for _ in 0..10 {
            let mut a = random_system(&mut rng, kind, &["a"], 3, 2);
            let mut b = random_system(&mut rng, kind, &["a"], 3, 2);
            a = tausat::wlts::System::new(a.map().clone())
                .unwrap()
                .with_initial(0)
                .unwrap();
            b = tausat::wlts::System::new(b.map().clone())
                .unwrap()
                .with_initial(0)
                .unwrap();
            let opts = BisimOptions::default();
            assert!(tausat::bisim::compare(&a, &a, &opts).unwrap().bisimilar);
            let ab = tausat::bisim::compare(&a, &b, &opts).unwrap().bisimilar;
            let ba = tausat::bisim::compare(&b, &a, &opts).unwrap().bisimilar;
            assert_eq!(ab, ba, "{kind}: compare is not symmetric");
        }
    }
}

fn random_convex(rng: &mut ChaCha8Rng, source: &Arc<StateSpace>, target: &Arc<StateSpace>) -> ConvexArrow {
    let alg = algebra(&["a"]);
    let labels: Vec<Label> = alg.labels().collect();
    let rows: Vec<Vec<Gen>> = source
        .indices()
        .map(|_| {
            (0..rng.gen_range(1..=2))
                .map(|_| {
                    let mut g = Gen::new();
                    for _ in 0..rng.gen_range(0..=2) {
                        let l = labels[rng.gen_range(0..labels.len())];
                        let y = rng.gen_range(0..target.len());
                        let w = num_rational::BigRational::new(
                            rng.gen_range(1..=3).into(),
                            rng.gen_range(1..=3).into(),
                        );
                        let e = g.entry((l, y)).or_insert_with(num_traits::Zero::zero);
                        *e += w;
                    }
                    g
                })
                .collect()
        })
        .collect();
    ConvexArrow::new(alg, source.clone(), target.clone(), rows).unwrap()
}

/// Convex composition is associative up to hull equality, and the convex
/// join is idempotent, commutative, and associative up to mutual inclusion.
#[test]
fn convex_composition_and_join_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0);
    let s2 = space(2, "p");
    let s3 = space(2, "q");
    let s4 = space(2, "r");
    let s5 = space(2, "t");
    for _ in 0..25 {
        let f = random_convex(&mut rng, &s2, &s3);
        let g = random_convex(&mut rng, &s3, &s4);
        let h = random_convex(&mut rng, &s4, &s5);
        let left = cm_compose(&h, &cm_compose(&g, &f).unwrap()).unwrap();
        let right = cm_compose(&cm_compose(&h, &g).unwrap(), &f).unwrap();
        assert!(
            left.leq(&right).unwrap() && right.leq(&left).unwrap(),
            "convex composition associativity failed"
        );

        let a = random_convex(&mut rng, &s2, &s3);
        let b = random_convex(&mut rng, &s2, &s3);
        let c = random_convex(&mut rng, &s2, &s3);
        let aa = a.join(&a).unwrap();
        assert!(aa.leq(&a).unwrap() && a.leq(&aa).unwrap());
        let ab = a.join(&b).unwrap();
        let ba = b.join(&a).unwrap();
        assert!(ab.leq(&ba).unwrap() && ba.leq(&ab).unwrap());
        let l = a.join(&b).unwrap().join(&c).unwrap();
        let r = a.join(&b.join(&c).unwrap()).unwrap();
        assert!(l.leq(&r).unwrap() && r.leq(&l).unwrap());
        assert!(a.leq(&ab).unwrap());
        // mutual inclusion coincides with equality of the reduced lists
        assert!(ab.leq(&ba).unwrap() && ba.leq(&ab).unwrap());
        assert_eq!(ab.clone().reduce(), ba.clone().reduce());
    }
}

/// The planar-hull specialization and the simplex route agree: reducing a
/// two-cell row by either path keeps exactly the same generators.
#[test]
fn planar_and_simplex_reduction_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x2D);
    let alg = algebra(&[]);
    let s = space(2, "s");
    for _ in 0..50 {
        // points over the two cells (τ,0), (τ,1)
        let mut gens: Vec<Gen> = Vec::new();
        for _ in 0..rng.gen_range(1..=7) {
            let mut g = Gen::new();
            for y in 0..2usize {
                if rng.gen_bool(0.8) {
                    let w = num_rational::BigRational::new(
                        rng.gen_range(0..=4).into(),
                        rng.gen_range(1..=3).into(),
                    );
                    if !num_traits::Zero::is_zero(&w) {
                        g.insert((Label::TAU, y), w);
                    }
                }
            }
            gens.push(g);
        }
        let arrow = ConvexArrow::new(alg.clone(), s.clone(), s.clone(), vec![gens.clone(), vec![Gen::new()]])
            .unwrap()
            .reduce();
        let reduced = arrow.generators(0);
        // every input generator is in the reduced hull, and every survivor
        // is not in the hull of the others
        for g in &gens {
            assert!(tausat::segala::in_hull(g, reduced));
        }
        for (i, g) in reduced.iter().enumerate() {
            let rest: Vec<Gen> = reduced
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, x)| x.clone())
                .collect();
            assert!(
                rest.is_empty() || !tausat::segala::in_hull(g, &rest),
                "survivor {g:?} is redundant"
            );
        }
    }
}
