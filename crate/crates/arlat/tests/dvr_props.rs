use arlat::ars::closed_form_ei;
use arlat::dvr::{elementary_divisors, kernel_basis, saturate, solve, DvrContext, DvrElement, DvrMatrix, Valuation};
use arlat::heller::closed_form_zi;
use arlat::verify::snf_property_holds;
use proptest::prelude::*;

const N: usize = 12;

fn ctx(p: u32) -> DvrContext {
    DvrContext::new(p, N).unwrap()
}

/// `ε^v · (c_0 + c_1 ε + c_2 ε²)` with `v` in `0..4`, or zero.
fn entry() -> impl Strategy<Value = Option<(usize, [i64; 3])>> {
    prop::option::weighted(0.8, (0usize..4, prop::array::uniform3(-50i64..50)))
}

fn build(c: DvrContext, rows: usize, cols: usize, es: &[Option<(usize, [i64; 3])>]) -> DvrMatrix {
    DvrMatrix::from_fn(c, rows, cols, |i, j| match es[i * cols + j] {
        None => DvrElement::zero(c),
        Some((v, cs)) => DvrElement::from_coeffs(c, &cs, true).mul(&DvrElement::eps_pow(c, v)).unwrap(),
    })
}

fn matrix(max: usize) -> impl Strategy<Value = (u32, usize, usize, Vec<Option<(usize, [i64; 3])>>)> {
    (prop::sample::select(vec![2u32, 3, 101]), 1..=max, 1..=max)
        .prop_flat_map(|(p, r, c)| (Just(p), Just(r), Just(c), prop::collection::vec(entry(), r * c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn snf_reconstructs((p, r, c, es) in matrix(8)) {
        let a = build(ctx(p), r, c, &es);
        prop_assert!(snf_property_holds(&a).unwrap());
    }

    #[test]
    fn solve_returns_true_solutions((p, r, c, es) in matrix(6), xs in prop::collection::vec(-20i64..20, 6)) {
        let cx = ctx(p);
        let a = build(cx, r, c, &es);
        let x = DvrMatrix::from_fn(cx, c, 1, |i, _| DvrElement::from_i64(cx, xs[i]));
        let b = a.mul(&x).unwrap();
        let sol = solve(&a, &b).unwrap().solution();
        prop_assert!(sol.is_some());
        prop_assert!(a.mul(&sol.unwrap()).unwrap().sub(&b).unwrap().is_zero());
    }

    #[test]
    fn kernel_is_saturated((p, r, c, es) in matrix(6)) {
        let a = build(ctx(p), r, c, &es);
        let k = kernel_basis(&a).unwrap();
        prop_assert!(a.mul(&k).unwrap().is_zero());
        let s = saturate(&k).unwrap();
        prop_assert_eq!(s.cols(), k.cols());
        if k.cols() > 0 {
            prop_assert!(solve(&k, &s).unwrap().is_solvable());
            prop_assert!(solve(&s, &k).unwrap().is_solvable());
            prop_assert!(elementary_divisors(&k).unwrap().iter().all(|&v| v == Valuation::Finite(0)));
        }
    }

    #[test]
    fn element_ring_laws(p in prop::sample::select(vec![2u32, 5, 101]),
                         a in prop::array::uniform4(-60i64..60),
                         b in prop::array::uniform4(-60i64..60),
                         c in prop::array::uniform4(-60i64..60),
                         k in 0usize..5) {
        let cx = ctx(p);
        let (a, b, c) = (
            DvrElement::from_coeffs(cx, &a, true).mul(&DvrElement::eps_pow(cx, k)).unwrap(),
            DvrElement::from_coeffs(cx, &b, true),
            DvrElement::from_coeffs(cx, &c, true),
        );
        let lhs = a.add(&b).unwrap().mul(&c).unwrap();
        let rhs = a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(lhs.eq_to_precision(&rhs));
        if let (Valuation::Finite(va), Valuation::Finite(vb)) = (a.valuation(), b.valuation()) {
            if va + vb < N {
                prop_assert_eq!(a.mul(&b).unwrap().valuation(), Valuation::Finite(va + vb));
            }
        }
        if b.is_unit() {
            let inv = b.invert_unit().unwrap();
            prop_assert!(b.mul(&inv).unwrap().eq_to_precision(&DvrElement::one(cx)));
        }
    }
}

#[test]
fn closed_forms_are_stable_under_precision_doubling() {
    for p in [2u32, 101] {
        for n in 2..=6 {
            let small = DvrContext::for_n(p, n).unwrap();
            let big = small.with_precision(2 * small.precision()).unwrap();
            for i in 1..n {
                for (a, b) in [
                    (closed_form_zi(small, n, i).unwrap(), closed_form_zi(big, n, i).unwrap()),
                    (closed_form_ei(small, n, i).unwrap(), closed_form_ei(big, n, i).unwrap()),
                ] {
                    for (x, y) in a.x_powers().iter().zip(b.x_powers()) {
                        let truncated = y.recast(small).unwrap();
                        assert!(truncated.eq_to_precision(x));
                        assert_eq!(elementary_divisors(x).unwrap(), elementary_divisors(&y).unwrap());
                    }
                }
            }
        }
    }
}
