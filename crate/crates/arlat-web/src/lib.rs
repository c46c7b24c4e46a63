//! Small browser front end. The `*_json` functions are plain Rust so they can
//! be tested natively; on wasm32 they are exported through wasm-bindgen.

use arlat::ars::{almost_split_sequence_with, AssOptions};
use arlat::dvr::DvrContext;
use arlat::heller::{closed_form_zi, heller_lattice, module_mi};
use arlat::lattice::{iso_test, Lattice, LatticeJson};
use arlat::quiver::{build_component_with, tube_report, ComponentOptions};
use arlat::{Error, Result};
use serde::Serialize;

/// Largest n accepted from the page; bigger inputs are too slow in a browser tab.
pub const MAX_N: usize = 8;

fn zi(p: u32, n: usize, i: usize) -> Result<Lattice> {
    if !(2..=MAX_N).contains(&n) || i == 0 || i >= n {
        return Err(Error::Range(format!("need 2 ≤ n ≤ {MAX_N} and 1 ≤ i ≤ n−1, got n = {n}, i = {i}")));
    }
    closed_form_zi(DvrContext::new(p, DvrContext::default_precision(n))?, n, i)
}

#[derive(Serialize)]
struct HellerView {
    n: usize,
    i: usize,
    rank: usize,
    closed_form: LatticeJson,
    computed: LatticeJson,
    isomorphic: bool,
}

/// Computes the Heller lattice of M_i and compares it with Z_i.
pub fn heller_json(p: u32, n: usize, i: usize) -> Result<String> {
    let z = zi(p, n, i)?;
    let h = heller_lattice(z.context(), &module_mi(z.context(), n, i)?)?;
    let view = HellerView {
        n,
        i,
        rank: z.rank(),
        closed_form: z.to_json(),
        computed: h.lattice.to_json(),
        isomorphic: iso_test(&h.lattice, &z)?.is_iso(),
    };
    Ok(serde_json::to_string_pretty(&view).expect("serializable"))
}

#[derive(Serialize)]
struct AssView {
    left_rank: usize,
    middle_rank: usize,
    right_rank: usize,
    middle_summand_ranks: Vec<usize>,
    certified: bool,
    tau_is_seed: bool,
}

/// Almost split sequence ending at Z_i, summarized.
pub fn ass_json(p: u32, n: usize, i: usize) -> Result<String> {
    let z = zi(p, n, i)?;
    let ass = almost_split_sequence_with(&z, &AssOptions::default())?;
    let view = AssView {
        left_rank: ass.seq.left.rank(),
        middle_rank: ass.seq.middle.rank(),
        right_rank: ass.seq.right.rank(),
        middle_summand_ranks: arlat::finalg::decompose(&ass.seq.middle)?.ranks(),
        certified: ass.cert.ok(),
        tau_is_seed: iso_test(&ass.seq.left, &z)?.is_iso(),
    };
    Ok(serde_json::to_string_pretty(&view).expect("serializable"))
}

/// Component summary line followed by the DOT graph.
pub fn component_dot(p: u32, n: usize, i: usize, depth: usize) -> Result<String> {
    if depth == 0 || depth > 5 {
        return Err(Error::Range(format!("depth must be between 1 and 5, got {depth}")));
    }
    let z = zi(p, n, i)?;
    let comp = build_component_with(&z, depth, &ComponentOptions::default())?;
    let report = tube_report(&comp)?;
    let mut out = report.summary_line();
    out.push('\n');
    for note in &report.notes {
        out.push_str(&format!("// {note}\n"));
    }
    out.push_str(&comp.to_dot());
    Ok(out)
}

#[cfg(target_arch = "wasm32")]
mod bindings {
    use wasm_bindgen::prelude::*;

    fn js(r: arlat::Result<String>) -> Result<String, JsValue> {
        r.map_err(|e| JsValue::from_str(&e.to_string()))
    }

    #[wasm_bindgen]
    pub fn heller(p: u32, n: usize, i: usize) -> Result<String, JsValue> {
        js(super::heller_json(p, n, i))
    }

    #[wasm_bindgen]
    pub fn ass(p: u32, n: usize, i: usize) -> Result<String, JsValue> {
        js(super::ass_json(p, n, i))
    }

    #[wasm_bindgen]
    pub fn component(p: u32, n: usize, i: usize, depth: usize) -> Result<String, JsValue> {
        js(super::component_dot(p, n, i, depth))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn heller_matches_closed_form() {
        let v = parse(&heller_json(101, 4, 1).unwrap());
        assert_eq!(v["rank"], 4);
        assert_eq!(v["isomorphic"], true);
    }

    #[test]
    fn ass_summary() {
        let v = parse(&ass_json(101, 4, 2).unwrap());
        assert_eq!(v["middle_rank"], 8);
        assert_eq!(v["certified"], true);
        assert_eq!(v["tau_is_seed"], true);
    }

    #[test]
    fn component_starts_with_summary() {
        let out = component_dot(101, 5, 2, 4).unwrap();
        assert!(out.starts_with("tube period=2 depth=4"));
        assert!(out.contains("digraph component"));
    }

    #[test]
    fn ranges_are_checked() {
        assert!(matches!(heller_json(101, 3, 3), Err(Error::Range(_))));
        assert!(matches!(ass_json(101, MAX_N + 1, 1), Err(Error::Range(_))));
        assert!(matches!(component_dot(101, 3, 1, 0), Err(Error::Range(_))));
    }
}
