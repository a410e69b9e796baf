use std::sync::Arc;

use mdlac::equivalence::{
    check_equivalence, tail_count, Alphabet, CountOf, LongestRun, OrderingFunction, PartSpec,
    RandomTable, WeightedSum,
};
use proptest::prelude::*;

fn families(alphabet: Alphabet, n: usize, seed: u64) -> Vec<Arc<dyn OrderingFunction>> {
    vec![
        Arc::new(CountOf(1)),
        Arc::new(LongestRun(0)),
        Arc::new(WeightedSum((1..=n).map(|i| i as f64).collect())),
        Arc::new(RandomTable::new(alphabet, n, 9, seed).unwrap()),
    ]
}

#[test]
fn binary_parts_with_uniform_weights_agree() {
    let a = Alphabet::new(2).unwrap();
    let mut family = Vec::new();
    for n in [4, 6, 8] {
        for xi in families(a, n, n as u64) {
            family.push((n, xi));
        }
    }
    let eta = family.len() as f64;
    let parts: Vec<_> = family
        .into_iter()
        .map(|(n, xi)| PartSpec::new(n, eta, xi).unwrap())
        .collect();
    let r = check_equivalence(a, &parts).unwrap();
    assert_eq!(r.mismatch_count(), 0);
    assert!((r.kraft_sum - 1.0).abs() < 1e-12);
    assert_eq!(r.total_configurations(), 4 * (16 + 64 + 256));
}

#[test]
fn ternary_random_statistic_with_nonuniform_weights_agree() {
    let a = Alphabet::new(3).unwrap();
    let etas = [2.0, 4.0, 8.0, 8.0];
    let parts: Vec<_> = etas
        .iter()
        .enumerate()
        .map(|(i, &eta)| {
            PartSpec::new(
                6,
                eta,
                Arc::new(RandomTable::new(a, 6, 20, i as u64).unwrap()),
            )
            .unwrap()
        })
        .collect();
    let r = check_equivalence(a, &parts).unwrap();
    assert_eq!(r.kraft_sum, 1.0);
    assert_eq!(r.mismatch_count(), 0);
    assert!(r.parts.iter().all(|p| p.nfa_accepts > 0));
}

#[test]
fn exact_boundaries_are_reported_and_agree() {
    // eta * P = 1 exactly for x = 1111 with eta = 16
    let a = Alphabet::new(2).unwrap();
    let p = PartSpec::new(4, 16.0, Arc::new(CountOf(1))).unwrap();
    let r = check_equivalence(a, &[p]).unwrap();
    assert_eq!(r.mismatch_count(), 0);
    assert_eq!(r.boundary_cases(), 1);
    assert_eq!(r.parts[0].nfa_accepts, 0);
}

#[test]
fn single_part_at_unit_weight() {
    let a = Alphabet::new(3).unwrap();
    let p = PartSpec::new(6, 1.0, Arc::new(LongestRun(2))).unwrap();
    let r = check_equivalence(a, &[p]).unwrap();
    assert_eq!(r.mismatch_count(), 0);
    assert_eq!(r.parts[0].agreements, 729);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_families_never_disagree(
        size in 2u32..=4,
        n in 2usize..=6,
        levels in 1u32..12,
        seed in any::<u64>(),
        weights in prop::collection::vec(1u32..6, 1..5),
    ) {
        let a = Alphabet::new(size).unwrap();
        // exponents give Kraft-feasible weights 2^w scaled to sum of 1/eta <= 1
        let raw: Vec<f64> = weights.iter().map(|&w| 2f64.powi(w as i32)).collect();
        let s: f64 = raw.iter().map(|e| 1.0 / e).sum();
        let parts: Vec<_> = raw
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let xi = Arc::new(RandomTable::new(a, n, levels, seed ^ i as u64).unwrap());
                PartSpec::new(n, e * s.max(1.0), xi).unwrap()
            })
            .collect();
        let r = check_equivalence(a, &parts).unwrap();
        prop_assert_eq!(r.mismatch_count(), 0);
    }

    #[test]
    fn tail_count_is_non_increasing(n in 1usize..=7, t0 in -1.0f64..8.0, dt in 0.0f64..4.0) {
        let a = Alphabet::new(2).unwrap();
        let p = PartSpec::new(n, 1.0, Arc::new(WeightedSum(vec![1.0, 0.5, 2.0, 1.0, 0.25, 1.0, 3.0]))).unwrap();
        prop_assert!(tail_count(a, &p, t0).unwrap() >= tail_count(a, &p, t0 + dt).unwrap());
    }
}
