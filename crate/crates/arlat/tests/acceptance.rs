//! One pass/fail line per acceptance criterion, over `2 ≤ n ≤ 6` at `p ∈ {2, 101}`.

use arlat::verify::{run, VerifyConfig};
use std::process::ExitCode;
use std::time::Instant;

const TITLES: [&str; 10] = [
    "symmetric order, n = 2..8",
    "L_r pairwise non-isomorphic and projective over K",
    "Heller lattices Z_i, End(Z_i) local, a_0 in εO",
    "almost split sequence at Z_i, middle E_i, τ and τ²",
    "decomposition of E_1 and indecomposability of E_i",
    "kernel E_{n−i}, F_i relations, F_i = Z_{n−i} ⊕ F′_i",
    "components of Z_i are tubes of period 2 (1 when n = 2i)",
    "Ext¹(κ, A) ≅ κ and Hom(κ, A) = 0",
    "radical constraints on End(E_i)",
    "property suites: Smith form, Miyata, τ formula, precision doubling",
];

fn main() -> ExitCode {
    let start = Instant::now();
    let cfg = VerifyConfig { n_max: 6, primes: vec![2, 101], ..Default::default() };
    let report = run(&cfg);
    let mut all = true;
    for (k, title) in TITLES.iter().enumerate() {
        let criterion = k as u8 + 1;
        let (passed, total) = report.criterion_summary(criterion);
        let ok = total > 0 && passed == total;
        all &= ok;
        println!("criterion {criterion:>2}: {} {title} ({passed}/{total} claims)", if ok { "PASS" } else { "FAIL" });
        for c in report.claims().filter(|c| c.criterion == criterion && !c.pass) {
            println!("    {} p={} n={:?} i={:?}: {}", c.id, c.p, c.n, c.i, c.detail);
        }
    }
    println!("acceptance: {} in {:.1}s", if all { "all pass" } else { "FAILED" }, start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
