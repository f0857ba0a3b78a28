use aplab_core::bohr::{
    ap_in_bohr, averaging_defect_point, check_doubling, check_growth, check_regularity, check_size, find_regular_dilate,
};
use aplab_core::{BohrSet, Policy};
use num_rational::Ratio;
use proptest::prelude::*;

fn bohr_strategy() -> impl Strategy<Value = BohrSet> {
    (prop::sample::select(vec![97usize, 128, 210, 256, 401, 512]), 1usize..=3, 0.2f64..1.8)
        .prop_flat_map(|(n, d, delta)| {
            (Just(n), proptest::collection::vec(1..n, d), Just(delta))
        })
        .prop_map(|(n, freqs, delta)| BohrSet::new(n, &freqs, delta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn structural_lemmas(b in bohr_strategy()) {
        prop_assert!(b.verify_invariants());
        prop_assert!(check_doubling(&b));
        prop_assert!(check_size(&b));
        prop_assert!(check_growth(&b, 0.5).unwrap());
        let ap = ap_in_bohr(&b).unwrap();
        prop_assert!(ap.ap.is_inside(b.members()));
        prop_assert!(ap.ap.is_proper(b.modulus()));
        prop_assert!(ap.meets_guarantee());
    }

    #[test]
    fn regular_dilates_average(b in bohr_strategy()) {
        let policy = Policy::default();
        if let Ok((kappa, reg)) = find_regular_dilate(&b, &policy) {
            prop_assert!((0.5..1.0).contains(&kappa));
            prop_assert!(check_regularity(&reg, &policy).pass);
            let d = reg.dimension() as f64;
            let rho = 1.0 / (policy.c0 * d);
            let small = reg.dilate(rho).unwrap();
            let bound = 2.0 * policy.c0 * rho * d;
            for x in small.members().iter().take(20) {
                let defect = averaging_defect_point(&reg, x);
                prop_assert!(*defect.numer() as f64 <= bound * *defect.denom() as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn dilates_are_nested(b in bohr_strategy(), r in 0.05f64..1.0) {
        let small = b.dilate(r).unwrap();
        prop_assert!(small.members().is_subset(b.members()));
        prop_assert!(small.is_sub_bohr_of(&b));
        prop_assert_eq!(small.len(), b.dilate_size(r));
    }
}

#[test]
fn spec_examples() {
    let b = BohrSet::new(12, &[1], 0.6).unwrap();
    assert_eq!(b.members().to_vec(), [0, 1, 11]);
    assert_eq!(b.join(&[3], 0.6).unwrap().members().to_vec(), [0]);
    let g = BohrSet::new(20, &[0], 0.5).unwrap();
    assert_eq!(g.density(), Ratio::from_integer(1));
}
