use arlat::ars::{almost_split_sequence, closed_form_ei};
use arlat::dvr::{elementary_divisors, solve, DvrContext, DvrElement, DvrMatrix, Valuation};
use arlat::heller::closed_form_zi;
use arlat::lattice::{
    direct_sum, hom_space, iso_test, kernel_lattice, projective_cover, pullback, IsoResult, Lattice, LatticeMorphism,
};
use proptest::prelude::*;

fn ctx(p: u32, n: usize) -> DvrContext {
    DvrContext::for_n(p, n).unwrap()
}

/// `Z_i`, `E_i` or `A` for `kind` 0, 1, 2.
fn family(c: DvrContext, n: usize, kind: u8, i: usize) -> Lattice {
    match kind {
        0 => closed_form_zi(c, n, i).unwrap(),
        1 => closed_form_ei(c, n, i).unwrap(),
        _ => Lattice::regular(c, n),
    }
}

/// Random O-basis change `P⁻¹ X P` with `P = L·U` unitriangular.
fn conjugate(m: &Lattice, seed: &[i64]) -> Lattice {
    let c = m.context();
    let r = m.rank();
    let entry = |i: usize, j: usize| {
        let s = seed[(i * r + j) % seed.len()] + (i * 7 + j * 3) as i64;
        DvrElement::from_coeffs(c, &[s, s * s % 13 - 6], true)
    };
    let l = DvrMatrix::from_fn(c, r, r, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => entry(i, j),
        std::cmp::Ordering::Equal => DvrElement::one(c),
        std::cmp::Ordering::Less => DvrElement::zero(c),
    });
    let u = DvrMatrix::from_fn(c, r, r, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => entry(j, i + 1),
        std::cmp::Ordering::Equal => DvrElement::one(c),
        std::cmp::Ordering::Greater => DvrElement::zero(c),
    });
    let p = l.mul(&u).unwrap();
    let pinv = solve(&p, &DvrMatrix::identity(c, r)).unwrap().solution().unwrap();
    let x = pinv.mul(m.xmat()).unwrap().mul(&p).unwrap();
    Lattice::new(m.n(), x, None).unwrap()
}

fn case() -> impl Strategy<Value = (u32, usize, u8, usize, Vec<i64>)> {
    (prop::sample::select(vec![2u32, 101]), 2usize..=4, 0u8..3)
        .prop_flat_map(|(p, n, k)| (Just(p), Just(n), Just(k), 1..n, prop::collection::vec(-9i64..9, 5)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn iso_test_finds_base_changes((p, n, kind, i, seed) in case()) {
        let m = family(ctx(p, n), n, kind, i);
        let m2 = conjugate(&m, &seed);
        match iso_test(&m, &m2).unwrap() {
            IsoResult::ProvenIso(w) => {
                prop_assert!(w.is_intertwining().unwrap());
                prop_assert!(w.is_iso());
            }
            other => prop_assert!(false, "expected ProvenIso, got {:?}", other),
        }
    }

    #[test]
    fn not_iso_reasons_recompute((p, n, kind, i, _seed) in case(), kind2 in 0u8..3) {
        let c = ctx(p, n);
        let a = family(c, n, kind, i);
        let b = family(c, n, kind2, n - i);
        if let IsoResult::NotIso(_) = iso_test(&a, &b).unwrap() {
            let fresh_a = Lattice::new(n, a.xmat().clone(), None).unwrap();
            let fresh_b = Lattice::new(n, b.xmat().clone(), None).unwrap();
            prop_assert!(!iso_test(&fresh_a, &fresh_b).unwrap().is_iso());
        }
    }

    #[test]
    fn hom_basis_intertwines((p, n, kind, i, _seed) in case(), kind2 in 0u8..3, j in 1usize..4) {
        let c = ctx(p, n);
        let j = 1 + (j - 1) % (n - 1);
        let hs = hom_space(&family(c, n, kind, i), &family(c, n, kind2, j)).unwrap();
        for f in hs.morphisms() {
            prop_assert!(f.is_intertwining().unwrap());
        }
    }

    #[test]
    fn kernels_are_pure((p, n, _kind, i, seed) in case()) {
        let c = ctx(p, n);
        let src = closed_form_ei(c, n, i).unwrap();
        let tgt = closed_form_zi(c, n, i).unwrap();
        let hs = hom_space(&src, &tgt).unwrap();
        let coeffs = DvrMatrix::from_fn(c, hs.rank(), 1, |r, _| DvrElement::from_i64(c, seed[r % seed.len()]));
        let f = LatticeMorphism::new(src, tgt, hs.combine(&coeffs).unwrap()).unwrap();
        let (k, inc) = kernel_lattice(&f).unwrap();
        prop_assert!(f.compose(&inc).unwrap().mat().is_zero());
        if k.rank() > 0 {
            prop_assert!(elementary_divisors(inc.mat()).unwrap().iter().all(|&v| v == Valuation::Finite(0)));
        }
    }

    #[test]
    fn projective_cover_is_minimal((p, n, kind, i, seed) in case()) {
        let m = conjugate(&family(ctx(p, n), n, kind, i), &seed);
        let (cover, pi) = projective_cover(&m).unwrap();
        // dim_κ M/(εM + XM) = rank − rank of X mod ε.
        let top = m.rank() - m.xmat().residue().rank();
        prop_assert_eq!(cover.rank(), n * top);
        prop_assert!(pi.is_intertwining().unwrap());
        prop_assert!(solve(pi.mat(), &DvrMatrix::identity(m.context(), m.rank())).unwrap().is_solvable());
    }

    #[test]
    fn lattice_json_round_trip((p, n, kind, i, seed) in case()) {
        let m = conjugate(&family(ctx(p, n), n, kind, i), &seed);
        let j = m.to_json();
        let back = Lattice::from_json(&j).unwrap();
        prop_assert!(back.xmat().eq_to_precision(m.xmat()));
        prop_assert_eq!(back.to_json(), j);
    }
}

#[test]
fn pullback_is_symmetric() {
    for n in 2..=4 {
        let c = ctx(101, n);
        for i in 1..n {
            let ass = almost_split_sequence(&closed_form_zi(c, n, i).unwrap()).unwrap();
            let f = ass.seq.surj.clone();
            let g = ass.phi.clone();
            let a = pullback(&f, &g).unwrap();
            let b = pullback(&g, &f).unwrap();
            assert!(iso_test(&a.lattice, &b.lattice).unwrap().is_iso());
            assert!(f.compose(&a.proj_f).unwrap().sub(&g.compose(&a.proj_g).unwrap()).unwrap().mat().is_zero());
        }
    }
}

#[test]
fn sequences_compose_to_zero_and_add_ranks() {
    for p in [2u32, 101] {
        for n in 2..=5 {
            let c = ctx(p, n);
            for i in 1..n {
                let s = almost_split_sequence(&closed_form_zi(c, n, i).unwrap()).unwrap().seq;
                assert!(s.surj.compose(&s.inj).unwrap().mat().is_zero());
                assert_eq!(s.middle.rank(), s.left.rank() + s.right.rank());
                assert!(s.check_exact().unwrap());
            }
        }
    }
}

#[test]
fn direct_sum_injections_split() {
    let c = ctx(101, 3);
    let ds = direct_sum(&[closed_form_zi(c, 3, 1).unwrap(), closed_form_ei(c, 3, 2).unwrap()]).unwrap();
    for (inj, proj) in ds.injections.iter().zip(&ds.projections) {
        assert!(proj.compose(inj).unwrap().is_iso());
    }
}
