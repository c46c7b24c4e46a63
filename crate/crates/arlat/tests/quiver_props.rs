use arlat::dvr::DvrContext;
use arlat::heller::closed_form_zi;
use arlat::quiver::{build_component, tube_report, ARComponent};
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (u32, usize, usize, usize)> {
    (prop::sample::select(vec![2u32, 101]), 2usize..=5, 2usize..=3)
        .prop_flat_map(|(p, n, d)| (Just(p), Just(n), 1..n, Just(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn components_are_translation_quivers((p, n, i, depth) in case()) {
        let c = DvrContext::for_n(p, n).unwrap();
        let comp = build_component(&closed_form_zi(c, n, i).unwrap(), depth).unwrap();
        prop_assert!(!comp.has_loops());
        prop_assert!(comp.check_translation_quiver().1);
        prop_assert!(comp.check_valuation_duality().1);
        prop_assert!(comp.arrows.iter().all(|a| a.a.map_or(true, |v| v > 0) && a.b.map_or(true, |v| v > 0)));
        // The mouth orbit {Z_i, Z_{n−i}} has equal ranks.
        let t = comp.tau[&0];
        prop_assert_eq!(comp.vertices[t].lattice.rank(), n);
        let rep = tube_report(&comp).unwrap();
        prop_assert!(rep.is_tube);
        prop_assert_eq!(rep.tau_period, Some(if 2 * i == n { 1 } else { 2 }));
    }

    #[test]
    fn exports_are_deterministic_and_round_trip((p, n, i, depth) in case()) {
        let c = DvrContext::for_n(p, n).unwrap();
        let z = closed_form_zi(c, n, i).unwrap();
        let a = build_component(&z, depth).unwrap();
        let b = build_component(&z, depth).unwrap();
        let ja = serde_json::to_string(&a.to_json()).unwrap();
        prop_assert_eq!(&ja, &serde_json::to_string(&b.to_json()).unwrap());
        prop_assert_eq!(a.to_dot(), b.to_dot());
        let back = ARComponent::from_json(&serde_json::from_str(&ja).unwrap()).unwrap();
        prop_assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), ja);
    }
}

#[test]
fn empty_component_exports_a_valid_digraph() {
    let c = DvrContext::for_n(101, 3).unwrap();
    let mut comp = build_component(&closed_form_zi(c, 3, 1).unwrap(), 1).unwrap();
    comp.vertices.clear();
    comp.arrows.clear();
    comp.tau.clear();
    assert_eq!(comp.to_dot(), "digraph component {\n  rankdir=BT;\n}\n");
}
