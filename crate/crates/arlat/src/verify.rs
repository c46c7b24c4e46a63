//! Claim-by-claim reproduction harness shared by the CLI and the acceptance tests.
//!
//! Each check yields [`ClaimResult`]s tagged with a stable claim id and the
//! acceptance criterion (1–10) it belongs to.

use crate::ars::{
    almost_split_sequence, check_lemma_l1, closed_form_ei, closed_form_fi, closed_form_level2_maps, fi_ambient_xmat,
    fi_embedding, tau, AlmostSplitSequence,
};
use crate::dvr::{is_unimodular, snf, DvrContext, DvrElement, DvrMatrix, Valuation};
use crate::finalg::{decompose, end_locality, is_indecomposable, rad_end_generators, Decomposition};
use crate::heller::{check_symmetric_structure, closed_form_lr, closed_form_zi, heller_lattice, module_mi, FiniteModule};
use crate::lattice::{ext, ext1, induced_action, iso_test, kernel_lattice, pullback, ExtSource, IsoResult, Lattice};
use crate::quiver::{build_component_with, subadditive_check, tube_report, ComponentOptions};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub n_max: usize,
    pub primes: Vec<u32>,
    /// Overrides the default precision `max(32, 6n)`.
    pub precision: Option<usize>,
    pub depth: usize,
    pub random_seed: u64,
    /// Random matrices per size for the Smith form property.
    pub snf_samples: usize,
    pub snf_max_size: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_max: 6,
            primes: vec![101],
            precision: None,
            depth: 4,
            random_seed: 0,
            snf_samples: 1000,
            snf_max_size: 8,
        }
    }
}

impl VerifyConfig {
    fn context(&self, p: u32, n: usize) -> Result<DvrContext> {
        match self.precision {
            Some(prec) => DvrContext::new(p, prec),
            None => DvrContext::for_n(p, n),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimResult {
    pub id: String,
    pub criterion: u8,
    pub statement: String,
    pub p: u32,
    pub n: Option<usize>,
    pub i: Option<usize>,
    pub pass: bool,
    pub detail: String,
    #[serde(skip)]
    pub error: Option<Error>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Section {
    pub p: u32,
    pub claims: Vec<ClaimResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub n_max: usize,
    pub depth: usize,
    pub random_seed: u64,
    pub sections: Vec<Section>,
}

impl Report {
    pub fn claims(&self) -> impl Iterator<Item = &ClaimResult> {
        self.sections.iter().flat_map(|s| s.claims.iter())
    }

    pub fn all_pass(&self) -> bool {
        self.claims().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&ClaimResult> {
        self.claims().find(|c| !c.pass)
    }

    /// `(passed, total)` for one criterion.
    pub fn criterion_summary(&self, criterion: u8) -> (usize, usize) {
        let cs: Vec<_> = self.claims().filter(|c| c.criterion == criterion).collect();
        (cs.iter().filter(|c| c.pass).count(), cs.len())
    }
}

struct Sink {
    p: u32,
    n: Option<usize>,
    out: Vec<ClaimResult>,
}

impl Sink {
    fn new(p: u32, n: Option<usize>) -> Self {
        Sink { p, n, out: Vec::new() }
    }

    fn record(&mut self, criterion: u8, id: &str, statement: &str, i: Option<usize>, r: Result<(bool, String)>) {
        let (pass, detail, error) = match r {
            Ok((pass, detail)) => (pass, detail, None),
            Err(e) => (false, e.to_string(), Some(e)),
        };
        self.out.push(ClaimResult {
            id: id.to_string(),
            criterion,
            statement: statement.to_string(),
            p: self.p,
            n: self.n,
            i,
            pass,
            detail,
            error,
        });
    }
}

fn iso_detail(r: &IsoResult) -> String {
    match r {
        IsoResult::ProvenIso(_) => "ProvenIso".into(),
        IsoResult::NotIso(reason) => format!("NotIso: {reason:?}"),
        IsoResult::ProbablyNotIso { trials, failure_bound } => {
            format!("ProbablyNotIso after {trials} trials (bound {failure_bound:.1e})")
        }
    }
}

fn proven_iso(a: &Lattice, b: &Lattice) -> Result<(bool, String)> {
    let r = iso_test(a, b)?;
    Ok((r.is_iso(), iso_detail(&r)))
}

/// Run every claim for `2 ≤ n ≤ n_max` at each prime.
pub fn run(cfg: &VerifyConfig) -> Report {
    let mut sections = Vec::new();
    for &p in &cfg.primes {
        let mut claims = Vec::new();
        let sym_max = cfg.n_max.max(8);
        let mut s = Sink::new(p, None);
        for n in 2..=sym_max {
            let st = check_symmetric_structure(n);
            s.record(1, "SymOrder", "θ_i ↦ X^i is a bimodule isomorphism Hom_O(A, O) ≅ A", None, Ok((st.ok(), format!("n = {n}"))));
        }
        claims.append(&mut s.out);
        let cases: Vec<usize> = (2..=cfg.n_max).collect();
        let per_n: Vec<Vec<ClaimResult>> = std::thread::scope(|scope| {
            let handles: Vec<_> = cases.iter().map(|&n| scope.spawn(move || check_n(cfg, p, n))).collect();
            handles.into_iter().map(|h| h.join().expect("verification thread panicked")).collect()
        });
        for mut c in per_n {
            claims.append(&mut c);
        }
        claims.append(&mut check_snf_property(cfg, p));
        sections.push(Section { p, claims });
    }
    Report { n_max: cfg.n_max, depth: cfg.depth, random_seed: cfg.random_seed, sections }
}

fn check_n(cfg: &VerifyConfig, p: u32, n: usize) -> Vec<ClaimResult> {
    let mut s = Sink::new(p, Some(n));
    let ctx = match cfg.context(p, n) {
        Ok(c) => c,
        Err(e) => {
            s.record(2, "Context", "valid ring context", None, Err(e));
            return s.out;
        }
    };
    infinite_family(&mut s, ctx, n);
    for i in 1..n {
        heller_claims(&mut s, ctx, n, i);
        let ass = ass_claims(&mut s, ctx, n, i);
        e_claims(&mut s, ctx, n, i, ass.as_ref());
        if 2 * i <= n && i >= 2 {
            level2_claims(&mut s, ctx, n, i);
            s.record(9, "L1", "generators of Rad End(E_i) satisfy β, αβ′ − βα′ ∈ εO", Some(i), {
                check_lemma_l1(ctx, n, i, cfg.random_seed).map(|ok| (ok, String::new()))
            });
        }
        component_claims(&mut s, cfg, ctx, n, i);
        precision_doubling(&mut s, ctx, n, i);
    }
    ext_claims(&mut s, ctx, n);
    s.out
}

fn infinite_family(s: &mut Sink, ctx: DvrContext, n: usize) {
    let ls: Vec<Result<Lattice>> = (1..=5).map(|r| closed_form_lr(ctx, n, r)).collect();
    for (r, l) in ls.iter().enumerate() {
        let r = r + 1;
        s.record(2, "InfLattices.projK", "L_r ⊗ K is projective", None, {
            l.clone().and_then(|l| l.is_projective_over_k()).map(|ok| (ok, format!("r = {r}")))
        });
    }
    for r in 1..=5 {
        for t in r + 1..=5 {
            s.record(2, "InfLattices.notiso", "L_r ≇ L_s for r ≠ s", None, {
                match (&ls[r - 1], &ls[t - 1]) {
                    (Ok(a), Ok(b)) => iso_test(a, b).map(|res| {
                        let explicit = matches!(res, IsoResult::NotIso(_));
                        (explicit, format!("r = {r}, s = {t}: {}", iso_detail(&res)))
                    }),
                    (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                }
            });
        }
    }
}

fn heller_claims(s: &mut Sink, ctx: DvrContext, n: usize, i: usize) {
    let z = closed_form_zi(ctx, n, i);
    s.record(3, "Heller.Zi", "Heller lattice of M_i is Z_i", Some(i), {
        (|| {
            let h = heller_lattice(ctx, &module_mi(ctx, n, i)?)?;
            if !h.check_sandwich()? {
                return Ok((false, "εP ⊄ Z".into()));
            }
            proven_iso(&h.lattice, z.as_ref().map_err(Clone::clone)?)
        })()
    });
    s.record(3, "ZIndec.local", "End(Z_i) mod ε is local", Some(i), {
        z.clone().and_then(|z| end_locality(&z)).map(|c| (c.is_local(), format!("{c:?}")))
    });
    s.record(3, "ZIndec.a0", "radical generators of End(Z_i) have a_0 ∈ εO", Some(i), {
        z.clone().and_then(|z| {
            let gens = rad_end_generators(&z)?;
            let ok = gens.iter().all(|g| g.mat().get(0, 0).valuation() != Valuation::Finite(0));
            Ok((ok, format!("{} generators", gens.len())))
        })
    });
}

fn ass_claims(s: &mut Sink, ctx: DvrContext, n: usize, i: usize) -> Option<AlmostSplitSequence> {
    let z = closed_form_zi(ctx, n, i).ok()?;
    let ass = match almost_split_sequence(&z) {
        Ok(a) => a,
        Err(e) => {
            s.record(4, "ZAss.cert", "almost split sequence ending at Z_i is certified", Some(i), Err(e));
            return None;
        }
    };
    s.record(4, "ZAss.cert", "almost split sequence ending at Z_i is certified", Some(i), {
        Ok((ass.cert.ok(), format!("{:?}", ass.cert)))
    });
    s.record(4, "ZAss.middle", "middle term is E_i", Some(i), {
        closed_form_ei(ctx, n, i).and_then(|e| proven_iso(&ass.seq.middle, &e))
    });
    s.record(4, "ZAss.tau", "τZ_i ≅ Z_{n−i}", Some(i), {
        closed_form_zi(ctx, n, n - i).and_then(|zc| proven_iso(&ass.seq.left, &zc))
    });
    s.record(4, "ZAss.tau2", "τ²Z_i ≅ Z_i", Some(i), tau(&ass.seq.left).and_then(|t2| proven_iso(&t2, &z)));
    if 2 * i == n {
        s.record(4, "Thm.Main.homog", "τZ_i ≅ Z_i when n = 2i", Some(i), proven_iso(&ass.seq.left, &z));
    }
    Some(ass)
}

/// Krull–Schmidt form of the Miyata contrapositive: the middle term is not `L ⊕ M`.
fn miyata_holds(ass: &AlmostSplitSequence, dec: &Decomposition) -> Result<(bool, String)> {
    if dec.parts.len() != 2 {
        return Ok((true, format!("{} indecomposable summands", dec.parts.len())));
    }
    let (a, b) = (&dec.parts[0].lattice, &dec.parts[1].lattice);
    let (l, m) = (&ass.seq.left, &ass.seq.right);
    let split = (iso_test(a, l)?.is_iso() && iso_test(b, m)?.is_iso())
        || (iso_test(a, m)?.is_iso() && iso_test(b, l)?.is_iso());
    Ok((!split, format!("summand ranks {:?}", dec.ranks())))
}

fn e_claims(s: &mut Sink, ctx: DvrContext, n: usize, i: usize, ass: Option<&AlmostSplitSequence>) {
    let e = match closed_form_ei(ctx, n, i) {
        Ok(e) => e,
        Err(err) => {
            s.record(5, "EIndec", "closed form E_i", Some(i), Err(err));
            return;
        }
    };
    let dec = decompose(&e);
    if i == 1 {
        s.record(5, "EIndec.1", "E_1 ≅ A ⊕ (indecomposable of rank n)", Some(i), {
            dec.as_ref().map_err(Clone::clone).and_then(|d| {
                let mut ranks = d.ranks();
                ranks.sort();
                let proj = d.parts.iter().filter(|p| p.lattice.is_projective().unwrap_or(false)).count();
                let mut ok = ranks == vec![n, n] && proj == 1 && d.round_trip(&e)?;
                for part in &d.parts {
                    ok &= is_indecomposable(&part.lattice)?;
                    if part.lattice.is_projective()? {
                        ok &= iso_test(&part.lattice, &Lattice::regular(ctx, n))?.is_iso();
                    }
                }
                Ok((ok, format!("ranks {ranks:?}, {proj} projective")))
            })
        });
    } else {
        s.record(5, "EIndec.2", "E_i is indecomposable for i ≥ 2", Some(i), {
            dec.as_ref().map_err(Clone::clone).map(|d| (d.parts.len() == 1, format!("ranks {:?}", d.ranks())))
        });
    }
    if let (Some(ass), Ok(d)) = (ass, dec.as_ref()) {
        s.record(10, "Prop.Miyata", "middle term of a non-split sequence is not L ⊕ M", Some(i), miyata_holds(ass, d));
    }
}

fn level2_claims(s: &mut Sink, ctx: DvrContext, n: usize, i: usize) {
    let maps = closed_form_level2_maps(ctx, n, i);
    s.record(6, "KerE", "kernel of π₂: A⁴ → E_i is E_{n−i}", Some(i), {
        maps.as_ref().map_err(Clone::clone).and_then(|m| {
            let (k, _) = kernel_lattice(&m.pi)?;
            proven_iso(&k, &closed_form_ei(ctx, n, n - i)?)
        })
    });
    let f = closed_form_fi(ctx, n, i);
    s.record(6, "FBasis", "the x, y, z, w basis relations hold inside A⁴ ⊕ E_i", Some(i), {
        f.as_ref().map_err(Clone::clone).and_then(|f| {
            let emb = fi_embedding(ctx, n, i)?;
            let act = induced_action(&emb, &fi_ambient_xmat(ctx, n, i)?)?;
            let m = maps.as_ref().map_err(Clone::clone)?;
            let pb = pullback(&m.pi, &m.phi)?;
            let (iso, detail) = proven_iso(&pb.lattice, f)?;
            Ok((act.eq_to_precision(f.xmat()) && iso, format!("pullback: {detail}")))
        })
    });
    s.record(6, "FIndec", "F_i ≅ Z_{n−i} ⊕ F′_i with F′_i indecomposable of rank 3n", Some(i), {
        f.as_ref().map_err(Clone::clone).and_then(|f| {
            let d = decompose(f)?;
            let zc = closed_form_zi(ctx, n, n - i)?;
            let mut ranks = d.ranks();
            ranks.sort();
            let mut has_z = false;
            let mut big_ok = false;
            for part in &d.parts {
                if part.lattice.rank() == n && iso_test(&part.lattice, &zc)?.is_iso() {
                    has_z = true;
                } else if part.lattice.rank() == 3 * n {
                    big_ok = is_indecomposable(&part.lattice)?;
                }
            }
            Ok((d.parts.len() == 2 && has_z && big_ok, format!("ranks {ranks:?}")))
        })
    });
}

fn component_claims(s: &mut Sink, cfg: &VerifyConfig, ctx: DvrContext, n: usize, i: usize) {
    let opts = ComponentOptions { cross_check_tau: true, check_miyata: true, ..Default::default() };
    let comp = closed_form_zi(ctx, n, i).and_then(|z| build_component_with(&z, cfg.depth, &opts));
    let comp = match comp {
        Ok(c) => c,
        Err(e) => {
            s.record(7, "Thm.Main.tube", "component of Z_i is a tube", Some(i), Err(e));
            return;
        }
    };
    let expected = if 2 * i == n { 1 } else { 2 };
    let id = if expected == 1 { "Thm.Main.tube1" } else { "Thm.Main.tube2" };
    s.record(7, id, "component of Z_i is ZA∞/⟨τ^k⟩, k = 1 iff n = 2i", Some(i), {
        tube_report(&comp).map(|r| {
            let certified = comp.certificates.values().all(|c| c.ok());
            let ok = r.is_tube && r.tau_period == Some(expected) && certified && !comp.confidence_qualified;
            (ok, format!("{} ranks {:?}", r.summary_line(), r.ranks_by_level))
        })
    });
    s.record(7, "NoLoop", "no arrow x → x", Some(i), Ok((!comp.has_loops(), String::new())));
    let (k, ok) = comp.check_translation_quiver();
    s.record(7, "TransQuiver", "{y → x} = {τx → y} at interior vertices", Some(i), Ok((ok && k > 0, format!("{k} interior vertices"))));
    let (k, ok) = comp.check_valuation_duality();
    s.record(7, "ValDuality", "v(x→y) = (a,b) ⇒ v(τy→x) = (b,a)", Some(i), Ok((ok && k > 0, format!("{k} arrow pairs"))));
    let sub = subadditive_check(&comp);
    s.record(7, "Subadditive", "2f(x) ≥ Σ d_yx f(y) at interior vertices", Some(i), {
        Ok((sub.iter().all(|e| e.holds), format!("{} vertices", sub.len())))
    });
    let tau_ok = comp.tau_agreement.values().all(|&b| b);
    s.record(10, "Prop.TauFormula", "D Coker Hom(p, A) agrees with Ω on every vertex", Some(i), {
        Ok((tau_ok && !comp.tau_agreement.is_empty(), format!("{} vertices", comp.tau_agreement.len())))
    });
    let miyata_ok = comp.miyata.values().all(|&b| b);
    s.record(10, "Prop.Miyata", "middle term of a non-split sequence is not L ⊕ M", Some(i), {
        Ok((miyata_ok && !comp.miyata.is_empty(), format!("{} sequences in the component", comp.miyata.len())))
    });
}

fn precision_doubling(s: &mut Sink, ctx: DvrContext, n: usize, i: usize) {
    s.record(10, "Prop.PrecDoubling", "closed forms keep invariants and indecomposability at 2N", Some(i), {
        (|| {
            let big = ctx.with_precision(2 * ctx.precision())?;
            let mut pairs = vec![(closed_form_zi(ctx, n, i)?, closed_form_zi(big, n, i)?)];
            pairs.push((closed_form_ei(ctx, n, i)?, closed_form_ei(big, n, i)?));
            if i >= 2 && 2 * i <= n {
                pairs.push((closed_form_fi(ctx, n, i)?, closed_form_fi(big, n, i)?));
            }
            let mut ok = true;
            for (a, b) in &pairs {
                ok &= a.invariants()? == b.invariants()?;
                ok &= decompose(a)?.ranks() == decompose(b)?.ranks();
            }
            let t = tau(&pairs[0].1)?;
            ok &= iso_test(&t, &closed_form_zi(big, n, n - i)?)?.is_iso();
            Ok((ok, format!("N = {} and {}", ctx.precision(), big.precision())))
        })()
    });
}

fn ext_claims(s: &mut Sink, ctx: DvrContext, n: usize) {
    let kappa = FiniteModule::new(n, crate::fp::FpMatrix::zeros(ctx.p(), 1, 1), Some("κ".into()));
    let a = Lattice::regular(ctx, n);
    s.record(8, "ExtRemark.1", "Ext¹_A(κ, A) ≅ κ", None, {
        kappa.clone().and_then(|k| ext1(ExtSource::Finite(&k), &a)).map(|t| {
            (t.divisors == vec![1] && t.free_rank == 0, format!("{t:?}"))
        })
    });
    s.record(8, "ExtRemark.0", "Hom_A(κ, A) = 0", None, {
        kappa.and_then(|k| ext(0, ExtSource::Finite(&k), &a)).map(|t| (t.is_zero(), format!("{t:?}")))
    });
}

fn random_matrix(ctx: DvrContext, rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DvrMatrix {
    let p = ctx.p();
    let structured = rng.gen_bool(0.5);
    let entry = |rng: &mut ChaCha8Rng| -> DvrElement {
        if rng.gen_bool(0.2) {
            return DvrElement::zero(ctx);
        }
        let v = if structured { rng.gen_range(0..4) } else { 0 };
        let coeffs: Vec<u32> = (0..4).map(|_| rng.gen_range(0..p)).collect();
        DvrElement::from_coeffs(ctx, &coeffs.iter().map(|&c| c as i64).collect::<Vec<_>>(), true)
            .mul(&DvrElement::eps_pow(ctx, v))
            .unwrap_or_else(|_| DvrElement::zero(ctx))
    };
    let mut m = DvrMatrix::zeros(ctx, rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, &entry(rng));
        }
    }
    m
}

/// `U·D·V = A`, `U, V` unimodular, `D` diagonal with nondecreasing valuations whose
/// first entry is the least entry valuation of `A`.
pub fn snf_property_holds(a: &DvrMatrix) -> Result<bool> {
    let s = snf(a)?;
    if !s.u.mul(&s.d)?.mul(&s.v)?.eq_to_precision(a) || !is_unimodular(&s.u)? || !is_unimodular(&s.v)? {
        return Ok(false);
    }
    for i in 0..s.d.rows() {
        for j in 0..s.d.cols() {
            let v = s.d.get(i, j).valuation();
            let expected = if i == j { s.diag_valuations[i] } else { Valuation::Infinite };
            if v != expected {
                return Ok(false);
            }
        }
    }
    if s.diag_valuations.windows(2).any(|w| w[0] > w[1]) {
        return Ok(false);
    }
    let least = a.min_valuation().map_or(Valuation::Infinite, Valuation::Finite);
    Ok(s.diag_valuations.first().map_or(true, |&d| d == least))
}

fn check_snf_property(cfg: &VerifyConfig, p: u32) -> Vec<ClaimResult> {
    let mut s = Sink::new(p, None);
    let ctx = match cfg.context(p, 2) {
        Ok(c) => c,
        Err(e) => {
            s.record(10, "Prop.SNF", "Smith form reconstructs and divides", None, Err(e));
            return s.out;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.random_seed ^ u64::from(p));
    for size in 1..=cfg.snf_max_size {
        let mut bad = 0;
        let mut err = None;
        for _ in 0..cfg.snf_samples {
            let rows = if rng.gen_bool(0.5) { size } else { rng.gen_range(1..=size) };
            let cols = if rows == size { rng.gen_range(1..=size) } else { size };
            match snf_property_holds(&random_matrix(ctx, &mut rng, rows, cols)) {
                Ok(true) => {}
                Ok(false) => bad += 1,
                Err(e) => err = Some(e),
            }
        }
        let r = match err {
            Some(e) => Err(e),
            None => Ok((bad == 0, format!("size {size}: {} samples, {bad} failures", cfg.snf_samples))),
        };
        s.record(10, "Prop.SNF", "Smith form reconstructs and divides", None, r);
    }
    s.out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_report() {
        let cfg = VerifyConfig { n_max: 3, snf_samples: 20, depth: 3, ..Default::default() };
        let r = run(&cfg);
        for c in r.claims().filter(|c| !c.pass) {
            panic!("{c:?}");
        }
        for k in 1..=10u8 {
            if k == 6 || k == 9 {
                continue;
            }
            assert!(r.criterion_summary(k).1 > 0, "criterion {k} has no claims");
        }
    }
}
