use arlat::ars::{almost_split_sequence, certify, factor_space, AssOptions, closed_form_ei, closed_form_level1_maps, tau, tau_agreement};
use arlat::dvr::DvrContext;
use arlat::heller::closed_form_zi;
use arlat::lattice::{direct_sum, iso_test, pullback};
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (u32, usize, usize)> {
    (prop::sample::select(vec![2u32, 3, 101]), 2usize..=5).prop_flat_map(|(p, n)| (Just(p), Just(n), 1..n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sequences_at_zi_are_certified_and_not_split((p, n, i) in case()) {
        let c = DvrContext::for_n(p, n).unwrap();
        let z = closed_form_zi(c, n, i).unwrap();
        let ass = almost_split_sequence(&z).unwrap();
        prop_assert!(ass.cert.ok());
        prop_assert_eq!(ass.cert.section_unsolvable, Some(true));
        // Recomputed from scratch on a fresh copy of the sequence.
        let fs = factor_space(&ass.seq.right).unwrap();
        let again = certify(&ass.seq, &ass.phi, &fs, &AssOptions::default()).unwrap();
        prop_assert!(again.ok());
        let split = direct_sum(&[ass.seq.left.clone(), ass.seq.right.clone()]).unwrap().lattice;
        prop_assert!(!iso_test(&ass.seq.middle, &split).unwrap().is_iso());
    }

    #[test]
    fn tau_has_period_dividing_two((p, n, i) in case()) {
        let c = DvrContext::for_n(p, n).unwrap();
        let z = closed_form_zi(c, n, i).unwrap();
        let t = tau(&z).unwrap();
        prop_assert!(iso_test(&t, &closed_form_zi(c, n, n - i).unwrap()).unwrap().is_iso());
        prop_assert!(iso_test(&tau(&t).unwrap(), &z).unwrap().is_iso());
        prop_assert!(tau_agreement(&z).unwrap().is_iso());
    }

    #[test]
    fn generic_sequence_matches_closed_form_pullback((p, n, i) in case()) {
        let c = DvrContext::for_n(p, n).unwrap();
        let z = closed_form_zi(c, n, i).unwrap();
        let ass = almost_split_sequence(&z).unwrap();
        let maps = closed_form_level1_maps(c, n, i).unwrap();
        let pb = pullback(&maps.pi, &maps.phi).unwrap();
        prop_assert!(iso_test(&ass.seq.middle, &pb.lattice).unwrap().is_iso());
        prop_assert!(iso_test(&pb.lattice, &closed_form_ei(c, n, i).unwrap()).unwrap().is_iso());
        prop_assert!(iso_test(&ass.seq.left, maps.iota.source()).unwrap().is_iso());
        // The pullback square commutes: π ∘ proj_π = φ ∘ proj_φ.
        let lhs = maps.pi.compose(&pb.proj_f).unwrap();
        let rhs = maps.phi.compose(&pb.proj_g).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().mat().is_zero());
    }
}
