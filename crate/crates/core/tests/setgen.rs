use aplab_core::setgen::*;
use proptest::prelude::*;

fn six_tuple_check(a: &[u64], n: u64) -> bool {
    let m = 6 * n;
    let sums: Vec<u64> = a.iter().flat_map(|&x| a.iter().flat_map(move |&y| a.iter().map(move |&z| x + y + z))).collect();
    sums.iter().all(|&l| sums.iter().all(|&r| (l == r) == (l % m == r % m)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn embedding_is_a_three_isomorphism(n in 1u64..=60, picks in proptest::collection::btree_set(1u64..=60, 1..=12)) {
        let a: Vec<u64> = picks.into_iter().filter(|&x| x <= n).collect();
        prop_assume!(!a.is_empty());
        prop_assert!(verify_freiman(&a, n).unwrap());
        prop_assert!(six_tuple_check(&a, n));
    }
}

#[test]
fn primes_embed() {
    for n in [10usize, 30, 60] {
        let p: Vec<u64> = primes_upto(n).into_iter().map(|p| p as u64).collect();
        assert!(verify_freiman(&p, n as u64).unwrap());
        assert_eq!(embedded_primes(n).unwrap().len(), p.len());
    }
}

#[test]
fn bohr_sample_is_inside() {
    let b = aplab_core::BohrSet::new(300, &[7, 11], 1.0).unwrap();
    let s = bohr_sample(&b, 0.5, 9).unwrap();
    assert!(s.is_subset(b.members()));
    assert_eq!(s, bohr_sample(&b, 0.5, 9).unwrap());
}
