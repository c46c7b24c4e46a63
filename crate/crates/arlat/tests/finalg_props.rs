use arlat::ars::closed_form_ei;
use arlat::dvr::DvrContext;
use arlat::finalg::{decompose, decompose_with, end_algebra_mod, lift_idempotent, DecomposeOptions};
use arlat::fp::FpMatrix;
use arlat::heller::closed_form_zi;
use arlat::lattice::{direct_sum, iso_test, Lattice};
use proptest::prelude::*;

/// Summands `Z_i` (kind 0), `E_i` (kind 1) or `A` (kind 2).
fn piece(c: DvrContext, n: usize, (kind, i): (u8, usize)) -> Lattice {
    let i = 1 + i % (n - 1);
    match kind {
        0 => closed_form_zi(c, n, i).unwrap(),
        1 => closed_form_ei(c, n, i).unwrap(),
        _ => Lattice::regular(c, n),
    }
}

fn sum_case() -> impl Strategy<Value = (u32, usize, Vec<(u8, usize)>)> {
    (
        prop::sample::select(vec![2u32, 3, 101]),
        2usize..=4,
        prop::collection::vec((0u8..3, 0usize..3), 1..=3),
    )
}

fn build(p: u32, n: usize, pieces: &[(u8, usize)]) -> (Lattice, Vec<Lattice>) {
    let c = DvrContext::for_n(p, n).unwrap();
    let ls: Vec<Lattice> = pieces.iter().map(|&k| piece(c, n, k)).collect();
    (direct_sum(&ls).unwrap().lattice, ls)
}

fn elements(alg: &arlat::finalg::FinDimAlgebra, rows: &FpMatrix) -> Vec<FpMatrix> {
    (0..rows.rows()).map(|r| alg.element(rows.row(r))).collect()
}

/// `J^k = 0` for some `k ≤ bound`, tracking a spanning set of `J^k`.
fn power_vanishes(j: &[FpMatrix], bound: usize) -> bool {
    let mut w: Vec<FpMatrix> = j.to_vec();
    for _ in 0..bound {
        w.retain(|x| !x.is_zero());
        if w.is_empty() {
            return true;
        }
        let prods: Vec<FpMatrix> = j.iter().flat_map(|x| w.iter().map(move |y| x.mul(y))).collect();
        w = span_basis(&prods);
    }
    w.iter().all(|x| x.is_zero())
}

fn span_basis(ms: &[FpMatrix]) -> Vec<FpMatrix> {
    let Some(first) = ms.first() else { return vec![] };
    let (p, r, c) = (first.p(), first.rows(), first.cols());
    let data: Vec<u32> = ms.iter().flat_map(|m| m.data().to_vec()).collect();
    let flat = FpMatrix::from_vec(p, ms.len(), r * c, data);
    flat.transpose().independent_cols().into_iter().map(|i| ms[i].clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn radical_is_nilpotent_ideal_with_semisimple_quotient((p, n, pieces) in sum_case()) {
        let (m, _) = build(p, n, &pieces);
        let alg = end_algebra_mod(&m, 1).unwrap();
        let j = alg.radical().unwrap();
        let jm = elements(&alg, &j);
        let ker = j.kernel();
        for x in &jm {
            for b in alg.basis() {
                for prod in [x.mul(b), b.mul(x)] {
                    let c = alg.coords(&prod).unwrap();
                    let row = FpMatrix::from_vec(p, 1, c.len(), c);
                    prop_assert!(row.mul(&ker).is_zero());
                }
            }
        }
        prop_assert!(power_vanishes(&jm, alg.dim() + 1));
        if j.rows() < alg.dim() {
            let q = alg.quotient(&j).unwrap();
            prop_assert_eq!(q.radical().unwrap().rows(), 0);
        }
    }

    #[test]
    fn decompose_round_trips_and_is_krull_schmidt((p, n, pieces) in sum_case()) {
        let (m, ls) = build(p, n, &pieces);
        let d = decompose(&m).unwrap();
        prop_assert!(d.round_trip(&m).unwrap());
        let parts: Vec<Lattice> = d.parts.iter().map(|x| x.lattice.clone()).collect();
        let back = direct_sum(&parts).unwrap().lattice;
        prop_assert!(iso_test(&back, &m).unwrap().is_iso());
        let mut ranks = d.ranks();
        ranks.sort();
        let d2 = decompose_with(&m, &[], &DecomposeOptions { seed: 7, ..Default::default() }).unwrap();
        let mut ranks2 = d2.ranks();
        ranks2.sort();
        prop_assert_eq!(&ranks, &ranks2);
        // Every input piece matches some summand of both decompositions.
        for l in &ls {
            let ps = decompose(l).unwrap();
            for part in &ps.parts {
                prop_assert!(d.summands.iter().any(|s| iso_test(&s.lattice, &part.lattice).unwrap().is_iso()));
                prop_assert!(d2.summands.iter().any(|s| iso_test(&s.lattice, &part.lattice).unwrap().is_iso()));
            }
        }
        for part in &d.parts {
            prop_assert!(part.inclusion.is_intertwining().unwrap());
        }
    }
}

#[test]
fn lifted_idempotents_are_idempotent_to_precision() {
    for p in [2u32, 101] {
        let c = DvrContext::for_n(p, 3).unwrap();
        let m = direct_sum(&[closed_form_zi(c, 3, 1).unwrap(), closed_form_zi(c, 3, 2).unwrap()]).unwrap();
        let e0 = m.injections[0].compose(&m.projections[0]).unwrap().mat().residue();
        let e = lift_idempotent(&m.lattice, &e0).unwrap();
        assert!(e.mul(&e).unwrap().sub(&e).unwrap().is_zero());
    }
}
