//! Auslander–Reiten translate, the search for φ, almost split sequences by
//! pullback, and the closed forms `E_i`, `F_i` with their maps.

use crate::dvr::{kernel_basis, snf, solve, DvrContext, DvrElement, DvrMatrix, Valuation};
use crate::finalg::{end_info, is_indecomposable, rad_end_generators, rad_right_ideal_generators, LocalityCertificate};
use crate::lattice::{
    hom_space, iso_test, projective_cover, pullback, regular_xmat, sublattice, syzygy, HomSpace, IsoResult, Lattice,
    LatticeJson, LatticeMorphism, ShortExactSequence,
};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

fn check_tau_input(m: &Lattice) -> Result<()> {
    if m.rank() == 0 || m.is_projective()? {
        return Err(Error::ProjectiveInput);
    }
    if !m.is_projective_over_k()? {
        return Err(Error::PropertyStarFails);
    }
    Ok(())
}

fn tau_label(m: &Lattice) -> String {
    format!("τ({})", m.name())
}

/// `τM`, computed as the syzygy `Ω(M)`; `ν` is the identity for this symmetric order.
pub fn tau(m: &Lattice) -> Result<Lattice> {
    check_tau_input(m)?;
    let (l, _) = syzygy(m)?;
    Ok(l.with_label(tau_label(m)))
}

/// `τM` as `D(Coker Hom_A(p, A))` for the projective cover `p: A^m → M`.
pub fn tau_dual(m: &Lattice) -> Result<Lattice> {
    check_tau_input(m)?;
    let ctx = m.context();
    let n = m.n();
    let pres = m.presentation()?;
    let a = Lattice::regular(ctx, n);
    let hs = hom_space(m, &a)?;
    let nm = n * pres.gens.len();
    // Hom(P, A) = A^m by values at generators; the image of Hom(M, A) is spanned by these columns.
    let mut v = DvrMatrix::zeros(ctx, nm, hs.rank());
    for (b, nu) in hs.mats.iter().enumerate() {
        for (l, &g) in pres.gens.iter().enumerate() {
            v.set_block(l * n, b, &nu.col(g));
        }
    }
    let dual = kernel_basis(&v.transpose())?;
    let free = Lattice::free(ctx, n, pres.gens.len());
    let xt = free.xmat().transpose();
    let x = crate::lattice::induced_action(&dual, &xt)?;
    Lattice::new(n, x, Some(format!("D Coker Hom(p, A) of {}", m.name())))
}

/// Agreement of the two routes to `τM`.
pub fn tau_agreement(m: &Lattice) -> Result<IsoResult> {
    iso_test(&tau(m)?, &tau_dual(m)?)
}

/// Morphisms `M → M` factoring through the projective cover: the O-span `W` of
/// `p_l ∘ ν` for `ν ∈ Hom(M, A)`, in coordinates of the End basis.
#[derive(Clone)]
pub struct FactorThroughSpace {
    pub module: Lattice,
    pub end: Arc<HomSpace>,
    /// `d × w` generators of `W`.
    pub gens: DvrMatrix,
    /// Smith data: `W = U·D·V` with `linv = U⁻¹`.
    linv: DvrMatrix,
    divisors: Vec<Valuation>,
}

impl FactorThroughSpace {
    pub fn ambient_rank(&self) -> usize {
        self.end.rank()
    }

    /// Elementary divisors of `W` inside `End(M)`.
    pub fn divisors(&self) -> &[Valuation] {
        &self.divisors
    }

    /// Membership of a coordinate column in `W`, by the Smith form of `W`.
    pub fn contains_coords(&self, c: &DvrMatrix) -> Result<bool> {
        let Some(s) = self.full_rank_exponent() else {
            return self.contains_coords_by_solve(c);
        };
        let y = self.linv.truncate(s).mul(&c.truncate(s))?;
        for (i, v) in self.divisors.iter().enumerate() {
            let k = v.finite().expect("full rank");
            if (0..k).any(|t| y.coeff(i, 0, t) != 0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Membership by solving against the generators of `W` directly.
    pub fn contains_coords_by_solve(&self, c: &DvrMatrix) -> Result<bool> {
        if self.gens.cols() == 0 {
            return c.check_zero();
        }
        Ok(solve(&self.gens, c)?.is_solvable())
    }

    pub fn contains(&self, f: &DvrMatrix) -> Result<bool> {
        self.contains_coords(&self.end.coords(f)?)
    }

    /// `s` with `ε^s End(M) ⊆ W`, when `W` has full rank.
    pub fn full_rank_exponent(&self) -> Option<usize> {
        if self.divisors.len() != self.ambient_rank() {
            return None;
        }
        self.divisors.iter().map(|v| v.finite()).try_fold(0, |acc, v| v.map(|v| acc.max(v)))
    }

    /// Row conditions `(row of U⁻¹, required valuation)`; `None` means the row must vanish.
    fn conditions(&self) -> Vec<(usize, Option<usize>)> {
        let d = self.ambient_rank();
        (0..d)
            .filter_map(|i| match self.divisors.get(i) {
                Some(Valuation::Finite(0)) => None,
                Some(Valuation::Finite(k)) => Some((i, Some(*k))),
                _ => Some((i, None)),
            })
            .collect()
    }
}

pub fn factor_space(m: &Lattice) -> Result<FactorThroughSpace> {
    check_tau_input(m)?;
    let ctx = m.context();
    let n = m.n();
    let end = m.end_space()?;
    let pres = m.presentation()?;
    let a = Lattice::regular(ctx, n);
    let hs = hom_space(m, &a)?;
    let d = end.rank();
    let mut cols = Vec::new();
    for l in 0..pres.gens.len() {
        let pl = pres.cover.submatrix(0..m.rank(), l * n..(l + 1) * n);
        for nu in &hs.mats {
            cols.push(end.coords(&pl.mul(nu)?)?);
        }
    }
    let refs: Vec<&DvrMatrix> = cols.iter().collect();
    let gens = if refs.is_empty() { DvrMatrix::zeros(ctx, d, 0) } else { DvrMatrix::hstack(&refs)? };
    let (linv, divisors) = if gens.cols() == 0 {
        (DvrMatrix::identity(ctx, d), vec![])
    } else {
        let s = snf(&gens)?;
        let linv = solve(&s.u, &DvrMatrix::identity(ctx, d))?
            .solution()
            .ok_or_else(|| Error::AlgorithmFailure("Smith transform not invertible".into()))?;
        (linv, s.diag_valuations)
    };
    Ok(FactorThroughSpace { module: m.clone(), end, gens, linv, divisors })
}

/// `φ ∈ End(M)` with `φ ∉ W` and `φρ ∈ W` for all `ρ ∈ Rad End(M)`.
pub fn find_phi(m: &Lattice) -> Result<(LatticeMorphism, FactorThroughSpace)> {
    let fs = factor_space(m)?;
    let phi = find_phi_in(&fs)?;
    Ok((phi, fs))
}

fn find_phi_in(fs: &FactorThroughSpace) -> Result<LatticeMorphism> {
    let m = &fs.module;
    let rhos = rad_right_ideal_generators(m)?;
    let u = match fs.full_rank_exponent() {
        Some(0) => return Err(Error::NoPhiExists),
        Some(s) => u_mod_eps_power(fs, &rhos, s)?,
        None => u_exact(fs, &rhos)?,
    };
    let ctx = m.context();
    let d = fs.ambient_rank();
    for c in 0..u.cols() {
        let col = u.col(c);
        if !fs.contains_coords(&col)? {
            return Ok(LatticeMorphism::new_unchecked(m.clone(), m.clone(), fs.end.combine(&col)?));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = ctx.p();
    for _ in 0..20 {
        let mut col = DvrMatrix::zeros(ctx, d, 1);
        for c in 0..u.cols() {
            let e = DvrElement::from_i64(ctx, rng.gen_range(0..p) as i64);
            col = col.add(&u.col(c).scale(&e)?)?;
        }
        if !fs.contains_coords(&col)? {
            return Ok(LatticeMorphism::new_unchecked(m.clone(), m.clone(), fs.end.combine(&col)?));
        }
    }
    Err(Error::NoPhiExists)
}

/// `T_j = U⁻¹ · (coordinates of F_a ρ_j)_a`, computed modulo `ε^s` when `s` is given.
fn transformed_products(fs: &FactorThroughSpace, rho: &LatticeMorphism, s: Option<usize>) -> Result<DvrMatrix> {
    let ctx = fs.module.context();
    let d = fs.ambient_rank();
    let cut = |x: &DvrMatrix| s.map_or_else(|| x.clone(), |s| x.truncate(s));
    let r = cut(rho.mat());
    let mut rj = DvrMatrix::zeros(ctx, d, d);
    for (a, f) in fs.end.mats.iter().enumerate() {
        rj.set_block(0, a, &cut(&fs.end.coords(&cut(f).mul(&r)?)?));
    }
    cut(&fs.linv).mul(&rj)
}

/// Generators of `U` when `ε^s End(M) ⊆ W`: the conditions only see `c mod ε^s`,
/// so `U / ε^s End(M)` is the kernel of a κ-linear system in the ε-digits of `c`.
fn u_mod_eps_power(fs: &FactorThroughSpace, rhos: &[LatticeMorphism], s: usize) -> Result<DvrMatrix> {
    let ctx = fs.module.context();
    let p = ctx.p();
    let d = fs.ambient_rank();
    let divs: Vec<usize> = fs.divisors.iter().map(|v| v.finite().expect("full rank")).collect();
    let per_rho: usize = divs.iter().sum();
    let mut sys = crate::fp::FpMatrix::zeros(p, per_rho * rhos.len(), s * d);
    let mut row = 0;
    for rho in rhos {
        let tj = transformed_products(fs, rho, Some(s))?;
        for (i, &k) in divs.iter().enumerate() {
            for u in 0..k {
                for t in 0..=u {
                    for a in 0..d {
                        let v = tj.coeff(i, a, u - t);
                        if v != 0 {
                            sys.set(row, t * d + a, v);
                        }
                    }
                }
                row += 1;
            }
        }
    }
    let ker = sys.kernel();
    let mut u = DvrMatrix::zeros(ctx, d, ker.cols());
    for c in 0..ker.cols() {
        for a in 0..d {
            let digits: Vec<i64> = (0..s).map(|t| ker.get(t * d + a, c) as i64).collect();
            if digits.iter().any(|&x| x != 0) {
                u.set(a, c, &DvrElement::from_coeffs(ctx, &digits, true));
            }
        }
    }
    Ok(u)
}

/// Generators of `U` over O when `W` does not have full rank.
fn u_exact(fs: &FactorThroughSpace, rhos: &[LatticeMorphism]) -> Result<DvrMatrix> {
    let ctx = fs.module.context();
    let d = fs.ambient_rank();
    let conds = fs.conditions();
    let extra_per = conds.iter().filter(|(_, k)| k.is_some()).count();
    let rows_per = conds.len();
    // Unknowns: c (d) then one slack per finite condition per ρ.
    let mut sys = DvrMatrix::zeros(ctx, rows_per * rhos.len(), d + extra_per * rhos.len());
    for (j, rho) in rhos.iter().enumerate() {
        let tj = transformed_products(fs, rho, None)?;
        let mut slack = 0;
        for (t, &(i, k)) in conds.iter().enumerate() {
            let row = j * rows_per + t;
            for a in 0..d {
                sys.set(row, a, &tj.get(i, a));
            }
            if let Some(k) = k {
                sys.set(row, d + j * extra_per + slack, &DvrElement::monomial(ctx, -1, k));
                slack += 1;
            }
        }
    }
    if sys.rows() == 0 {
        return Ok(DvrMatrix::identity(ctx, d));
    }
    let k = kernel_basis(&sys)?;
    Ok(k.submatrix(0..d, 0..k.cols()))
}

#[derive(Clone, Debug, Serialize)]
pub struct AssCertificate {
    pub exact: bool,
    /// (i) φ does not factor through the projective cover.
    pub phi_not_in_w: bool,
    /// (ii) the left term is indecomposable.
    pub left_indecomposable: bool,
    pub left_locality: LocalityCertificate,
    /// (iii) `φρ` factors through the cover for every generator `ρ` of `Rad End(M)`.
    pub rad_products_in_w: bool,
    pub rad_generators: usize,
    /// No `s` with `surj ∘ s = 1`; `None` when the check was skipped.
    pub section_unsolvable: Option<bool>,
}

impl AssCertificate {
    pub fn ok(&self) -> bool {
        self.exact
            && self.phi_not_in_w
            && self.left_indecomposable
            && self.rad_products_in_w
            && self.section_unsolvable != Some(false)
    }

    fn first_failure(&self) -> Option<&'static str> {
        [
            (self.exact, "exactness"),
            (self.phi_not_in_w, "(i) φ factors through the cover"),
            (self.left_indecomposable, "(ii) left term decomposes"),
            (self.rad_products_in_w, "(iii) some φρ does not factor through the cover"),
            (self.section_unsolvable != Some(false), "sequence splits"),
        ]
        .into_iter()
        .find(|(ok, _)| !ok)
        .map(|(_, name)| name)
    }
}

#[derive(Clone, Debug)]
pub struct AlmostSplitSequence {
    pub seq: ShortExactSequence,
    pub phi: LatticeMorphism,
    pub cert: AssCertificate,
}

#[derive(Clone, Copy, Debug)]
pub struct AssOptions {
    /// Solve for a section of `E → M` explicitly (needs `Hom(M, E)`).
    pub check_section: bool,
}

impl Default for AssOptions {
    fn default() -> Self {
        AssOptions { check_section: true }
    }
}

pub fn almost_split_sequence(m: &Lattice) -> Result<AlmostSplitSequence> {
    almost_split_sequence_with(m, &AssOptions::default())
}

pub fn almost_split_sequence_with(m: &Lattice, opts: &AssOptions) -> Result<AlmostSplitSequence> {
    if !is_indecomposable(m)? {
        return Err(Error::NotLocal);
    }
    let (phi, fs) = find_phi(m)?;
    let (_, p) = projective_cover(m)?;
    let pb = pullback(&p, &phi)?;
    let (omega, k_inc) = syzygy(m)?;
    let left = omega.with_label(tau_label(m));
    let ctx = m.context();
    let basis = DvrMatrix::vstack(&[pb.proj_f.mat(), pb.proj_g.mat()])?;
    let target = DvrMatrix::vstack(&[k_inc.mat(), &DvrMatrix::zeros(ctx, m.rank(), left.rank())])?;
    let inj = solve(&basis, &target)?
        .solution()
        .ok_or_else(|| Error::AlgorithmFailure("syzygy does not embed in the pullback".into()))?;
    let middle = pb.lattice.with_label(format!("E({})", m.name()));
    let seq = ShortExactSequence {
        left: left.clone(),
        middle: middle.clone(),
        right: m.clone(),
        inj: LatticeMorphism::new_unchecked(left.clone(), middle.clone(), inj),
        surj: LatticeMorphism::new_unchecked(middle.clone(), m.clone(), pb.proj_g.mat().clone()),
    };
    let cert = certify(&seq, &phi, &fs, opts)?;
    if let Some(why) = cert.first_failure() {
        return Err(Error::CertificationFailure(why.into()));
    }
    Ok(AlmostSplitSequence { seq, phi, cert })
}

/// Recompute conditions (i)–(iii), exactness and non-splitness.
pub fn certify(
    seq: &ShortExactSequence,
    phi: &LatticeMorphism,
    fs: &FactorThroughSpace,
    opts: &AssOptions,
) -> Result<AssCertificate> {
    let m = &seq.right;
    let exact = seq.check_exact()?;
    let phi_not_in_w = !fs.contains_coords_by_solve(&fs.end.coords(phi.mat())?)?;
    let info = end_info(&seq.left)?;
    let left_locality = info.cert.clone();
    let rad = rad_end_generators(m)?;
    let mut rad_products_in_w = true;
    for rho in &rad {
        if !fs.contains(&phi.mat().mul(rho.mat())?)? {
            rad_products_in_w = false;
            break;
        }
    }
    let section_unsolvable = if opts.check_section { Some(!has_section(&seq.surj)?) } else { None };
    Ok(AssCertificate {
        exact,
        phi_not_in_w,
        left_indecomposable: left_locality.is_local(),
        left_locality,
        rad_products_in_w,
        rad_generators: rad.len(),
        section_unsolvable,
    })
}

/// Whether `g: E → M` has an A-linear section.
pub fn has_section(g: &LatticeMorphism) -> Result<bool> {
    let ctx = g.source().context();
    let hs = hom_space(g.target(), g.source())?;
    let r = g.target().rank();
    if hs.rank() == 0 {
        return Ok(r == 0);
    }
    let mut sys = DvrMatrix::zeros(ctx, r * r, hs.rank());
    for (b, s) in hs.mats.iter().enumerate() {
        let gs = g.mat().mul(s)?;
        for i in 0..r {
            for j in 0..r {
                sys.set(i * r + j, b, &gs.get(i, j));
            }
        }
    }
    let id = DvrMatrix::from_fn(ctx, r * r, 1, |t, _| DvrElement::from_i64(ctx, i64::from(t / r == t % r)));
    Ok(solve(&sys, &id)?.is_solvable())
}

impl AlmostSplitSequence {
    pub fn to_json(&self) -> AssJson {
        AssJson {
            left: self.seq.left.to_json(),
            middle: self.seq.middle.to_json(),
            right: self.seq.right.to_json(),
            inj: self.seq.inj.mat().to_json(),
            surj: self.seq.surj.mat().to_json(),
            phi: self.phi.mat().to_json(),
            certificate: self.cert.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AssJson {
    pub left: LatticeJson,
    pub middle: LatticeJson,
    pub right: LatticeJson,
    pub inj: Vec<Vec<crate::dvr::ElementJson>>,
    pub surj: Vec<Vec<crate::dvr::ElementJson>>,
    pub phi: Vec<Vec<crate::dvr::ElementJson>>,
    pub certificate: AssCertificate,
}

fn check_i(n: usize, i: usize) -> Result<()> {
    if n < 2 || i == 0 || i >= n {
        return Err(Error::Range(format!("need 1 ≤ i ≤ n−1, got n = {n}, i = {i}")));
    }
    Ok(())
}

/// Adds `c·X^power` in summand `block` to column `col`; powers `≥ n` vanish.
fn put(m: &mut DvrMatrix, n: usize, col: usize, block: usize, power: usize, c: &DvrElement) -> Result<()> {
    if power < n {
        let row = block * n + power;
        let cur = m.get(row, col);
        m.set(row, col, &cur.add(c)?);
    }
    Ok(())
}

/// `E_i` on `a_1, …, a_n, b_1, …, b_n`.
pub fn closed_form_ei(ctx: DvrContext, n: usize, i: usize) -> Result<Lattice> {
    check_i(n, i)?;
    let eps = DvrElement::eps_pow(ctx, 1);
    let one = DvrElement::one(ctx);
    let a = |k: usize| k - 1;
    let b = |k: usize| n + k - 1;
    let mut x = DvrMatrix::zeros(ctx, 2 * n, 2 * n);
    for k in 2..=n {
        x.set(a(k - 1), a(k), if k == n - i + 1 { &eps } else { &one });
        x.set(b(k - 1), b(k), if k == i + 1 { &eps } else { &one });
    }
    x.set(a(n - i), b(n), &one);
    Ok(Lattice::new_unchecked(n, x, Some(format!("E_{i}"))))
}

/// Columns: `a_k`, `b_k` as elements of `A³`.
pub fn ei_embedding(ctx: DvrContext, n: usize, i: usize) -> Result<DvrMatrix> {
    check_i(n, i)?;
    let eps = DvrElement::eps_pow(ctx, 1);
    let one = DvrElement::one(ctx);
    let mut e = DvrMatrix::zeros(ctx, 3 * n, 2 * n);
    for k in 1..=n {
        let c = k - 1;
        if k <= n - i {
            put(&mut e, n, c, 0, n - k, &one)?;
        } else {
            put(&mut e, n, c, 0, n - k, &eps)?;
            put(&mut e, n, c, 1, 2 * n - k - i, &one)?;
        }
        let c = n + k - 1;
        if k == n {
            put(&mut e, n, c, 0, i - 1, &one)?;
            put(&mut e, n, c, 2, 0, &eps)?;
        } else if k <= i {
            put(&mut e, n, c, 2, n - k, &one)?;
        } else {
            put(&mut e, n, c, 2, n - k, &eps)?;
        }
    }
    Ok(e)
}

/// `F_i` on `x_1..x_n, y_1..y_n, z_1..z_n, w_1..w_n`, for `2 ≤ i ≤ n−i`.
pub fn closed_form_fi(ctx: DvrContext, n: usize, i: usize) -> Result<Lattice> {
    check_fi(n, i)?;
    let eps = DvrElement::eps_pow(ctx, 1);
    let one = DvrElement::one(ctx);
    let minus = DvrElement::from_i64(ctx, -1);
    let (x, y, z, w) = (|k: usize| k - 1, |k: usize| n + k - 1, |k: usize| 2 * n + k - 1, |k: usize| 3 * n + k - 1);
    let mut m = DvrMatrix::zeros(ctx, 4 * n, 4 * n);
    for k in 2..=n {
        m.set(w(k - 1), w(k), if k == i + 1 { &eps } else { &one });
        m.set(x(k - 1), x(k), if k == n - i + 1 { &eps } else { &one });
        m.set(y(k - 1), y(k), if k == i + 1 { &eps } else { &one });
        m.set(z(k - 1), z(k), if k == n - i + 1 { &eps } else { &one });
    }
    m.set(w(1), x(n - i + 1), &minus);
    m.set(x(1), y(i + 1), &one);
    Ok(Lattice::new_unchecked(n, m, Some(format!("F_{i}"))))
}

fn check_fi(n: usize, i: usize) -> Result<()> {
    if i < 2 || 2 * i > n {
        return Err(Error::Range(format!("F_i needs 2 ≤ i ≤ n−i, got n = {n}, i = {i}")));
    }
    Ok(())
}

/// `F_i = F'_i ⊕ F''_i` with `F''_i` spanned by the `z_k`.
pub fn fi_splitting(ctx: DvrContext, n: usize, i: usize) -> Result<(Lattice, Lattice)> {
    let f = closed_form_fi(ctx, n, i)?;
    let rest: Vec<usize> = (0..2 * n).chain(3 * n..4 * n).collect();
    let zs: Vec<usize> = (2 * n..3 * n).collect();
    let id = DvrMatrix::identity(ctx, 4 * n);
    let (fp, _) = sublattice(&f, id.select_cols(&rest), Some(format!("F'_{i}")))?;
    let (fpp, _) = sublattice(&f, id.select_cols(&zs), Some(format!("F''_{i}")))?;
    Ok((fp, fpp))
}

/// Columns: `x_k, y_k, z_k, w_k` in `A⁴ ⊕ E_i` (the last summand in the `a, b` basis).
pub fn fi_embedding(ctx: DvrContext, n: usize, i: usize) -> Result<DvrMatrix> {
    check_fi(n, i)?;
    let eps = DvrElement::eps_pow(ctx, 1);
    let one = DvrElement::one(ctx);
    let minus = DvrElement::from_i64(ctx, -1);
    let meps = DvrElement::monomial(ctx, -1, 1);
    let mut e = DvrMatrix::zeros(ctx, 6 * n, 4 * n);
    // E_i coordinates live at rows 4n.., as "block 4" (a_k) and "block 5" (b_k), power k−1.
    let a = |k: usize| (4usize, k - 1);
    let b = |k: usize| (5usize, k - 1);
    for k in 1..=n {
        let (x, y, z, w) = (k - 1, n + k - 1, 2 * n + k - 1, 3 * n + k - 1);
        put(&mut e, n, z, a(k).0, a(k).1, &one)?;
        if k <= n - i {
            put(&mut e, n, x, 3, n - k, &one)?;
        } else {
            put(&mut e, n, x, 2, 2 * n - i - k - 1, &minus)?;
            put(&mut e, n, x, 3, n - k, &eps)?;
        }
        put(&mut e, n, x, a(k).0, a(k).1, &one)?;
        if k <= i {
            put(&mut e, n, y, b(k).0, b(k).1, &one)?;
        } else if k < n {
            put(&mut e, n, y, 3, n + i - k - 1, &one)?;
            put(&mut e, n, y, b(k).0, b(k).1, &one)?;
            put(&mut e, n, y, a(k - i + 1).0, a(k - i + 1).1, &one)?;
        } else {
            put(&mut e, n, y, 3, i - 1, &one)?;
            put(&mut e, n, y, b(k).0, b(k).1, &one)?;
        }
        if k <= i {
            put(&mut e, n, w, 1, n - k + 1, &minus)?;
            put(&mut e, n, w, 2, n - k, &one)?;
        } else {
            put(&mut e, n, w, 0, n - k + i, &one)?;
            put(&mut e, n, w, 1, n - k + 1, &meps)?;
            put(&mut e, n, w, 2, n - k, &eps)?;
        }
    }
    Ok(e)
}

/// The X-action on `A⁴ ⊕ E_i`.
pub fn fi_ambient_xmat(ctx: DvrContext, n: usize, i: usize) -> Result<DvrMatrix> {
    let x = regular_xmat(ctx, n);
    let e = closed_form_ei(ctx, n, i)?;
    DvrMatrix::block_diag(ctx, &[&x, &x, &x, &x, e.xmat()])
}

/// `π: A² → Z_i`, `ι: Z_{n−i} → A²`, `φ: Z_i → Z_i`.
#[derive(Clone, Debug)]
pub struct Level1Maps {
    pub pi: LatticeMorphism,
    pub iota: LatticeMorphism,
    pub phi: LatticeMorphism,
}

/// Basis of `Z_i ⊆ A`: `ε` on the first `n−i` powers.
fn zi_embedding(ctx: DvrContext, n: usize, i: usize) -> DvrMatrix {
    let eps = DvrElement::eps_pow(ctx, 1);
    let mut b = DvrMatrix::identity(ctx, n);
    for j in 0..n - i {
        b.set(j, j, &eps);
    }
    b
}

pub fn closed_form_level1_maps(ctx: DvrContext, n: usize, i: usize) -> Result<Level1Maps> {
    check_i(n, i)?;
    let z = crate::heller::closed_form_zi(ctx, n, i)?;
    let zc = crate::heller::closed_form_zi(ctx, n, n - i)?;
    let a2 = Lattice::free(ctx, n, 2);
    let one = DvrElement::one(ctx);
    let eps = DvrElement::eps_pow(ctx, 1);
    let meps = DvrElement::monomial(ctx, -1, 1);
    let mut amb = DvrMatrix::zeros(ctx, n, 2 * n);
    for k in 0..n {
        put(&mut amb, n, k, 0, n - i + k, &one)?;
        put(&mut amb, n, n + k, 0, k, &meps)?;
    }
    let pi = solve(&zi_embedding(ctx, n, i), &amb)?
        .solution()
        .ok_or_else(|| Error::AlgorithmFailure("π does not land in Z_i".into()))?;
    let mut iota = DvrMatrix::zeros(ctx, 2 * n, n);
    for j in 0..n {
        if j < i {
            put(&mut iota, n, j, 0, j, &eps)?;
            put(&mut iota, n, j, 1, n - i + j, &one)?;
        } else {
            put(&mut iota, n, j, 0, j, &one)?;
        }
    }
    let mut phi = DvrMatrix::zeros(ctx, n, n);
    phi.set(n - 1, 0, &one);
    Ok(Level1Maps {
        pi: LatticeMorphism::new(a2.clone(), z.clone(), pi)?,
        iota: LatticeMorphism::new(zc, a2, iota)?,
        phi: LatticeMorphism::new(z.clone(), z, phi)?,
    })
}

/// `π: A⁴ → E_i`, `ι: E_{n−i} → A⁴`, `φ: E_i → E_i`.
#[derive(Clone, Debug)]
pub struct Level2Maps {
    pub pi: LatticeMorphism,
    pub iota: LatticeMorphism,
    pub phi: LatticeMorphism,
}

pub fn closed_form_level2_maps(ctx: DvrContext, n: usize, i: usize) -> Result<Level2Maps> {
    if i < 2 || i + 2 > n {
        return Err(Error::Range(format!("need 2 ≤ i ≤ n−2, got n = {n}, i = {i}")));
    }
    let e = closed_form_ei(ctx, n, i)?;
    let ec = closed_form_ei(ctx, n, n - i)?;
    let a4 = Lattice::free(ctx, n, 4);
    let one = DvrElement::one(ctx);
    let eps = DvrElement::eps_pow(ctx, 1);
    let mut amb = DvrMatrix::zeros(ctx, 3 * n, 4 * n);
    for k in 0..n {
        let (p, q, r, s) = (k, n + k, 2 * n + k, 3 * n + k);
        put(&mut amb, n, p, 0, k, &eps)?;
        put(&mut amb, n, p, 1, n - i + k, &one)?;
        put(&mut amb, n, q, 0, i - 1 + k, &one)?;
        put(&mut amb, n, q, 2, k, &eps)?;
        put(&mut amb, n, r, 2, k + 1, &eps)?;
        put(&mut amb, n, s, 2, n - i + k, &one)?;
    }
    let pi = solve(&ei_embedding(ctx, n, i)?, &amb)?
        .solution()
        .ok_or_else(|| Error::AlgorithmFailure("π does not land in E_i".into()))?;
    // ι(f, g, h) = (g, −Xf + X^{n−i}h/ε, f, −h) on the basis of E_{n−i} ⊆ A³.
    let emb = ei_embedding(ctx, n, n - i)?;
    let x = regular_xmat(ctx, n);
    let f = emb.submatrix(0..n, 0..2 * n);
    let g = emb.submatrix(n..2 * n, 0..2 * n);
    let h = emb.submatrix(2 * n..3 * n, 0..2 * n);
    let xh = x.pow(n - i)?.mul(&h)?;
    if xh.residue().rank() != 0 {
        return Err(Error::AlgorithmFailure("X^{n−i}h is not divisible by ε".into()));
    }
    let second = x.mul(&f)?.neg().add(&xh.div_eps(1)?)?;
    let iota = DvrMatrix::vstack(&[&g, &second, &f, &h.neg()])?;
    let mut phi = DvrMatrix::zeros(ctx, 2 * n, 2 * n);
    phi.set(n, 2 * n - 1, &one);
    Ok(Level2Maps {
        pi: LatticeMorphism::new(a4.clone(), e.clone(), pi)?,
        iota: LatticeMorphism::new(ec, a4, iota)?,
        phi: LatticeMorphism::new(e.clone(), e, phi)?,
    })
}

/// For `ρ` in `Rad End(E_i)` with `ρ(a_n) = αa_n + βb_n + …`, `ρ(b_n) = α′a_n + β′b_n + …`:
/// `β ∈ εO`, `α ∈ εO ⇔ β′ ∈ εO` and `αβ′ − βα′ ∈ εO`, for `2 ≤ i ≤ n−i`.
/// Checked on lifts of a basis of `J` and random κ-combinations.
pub fn check_lemma_l1(ctx: DvrContext, n: usize, i: usize, seed: u64) -> Result<bool> {
    check_fi(n, i)?;
    let e = closed_form_ei(ctx, n, i)?;
    let info = end_info(&e)?;
    if !info.cert.is_local() {
        return Err(Error::NotLocal);
    }
    let p = ctx.p();
    let jdim = info.radical.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut combos: Vec<Vec<u32>> = (0..jdim).map(|t| (0..jdim).map(|s| u32::from(s == t)).collect()).collect();
    for _ in 0..20 {
        combos.push((0..jdim).map(|_| rng.gen_range(0..p)).collect());
    }
    let (an, bn) = (n - 1, 2 * n - 1);
    for c in combos {
        let mut coords = vec![0u32; info.algebra.dim()];
        for (t, &ct) in c.iter().enumerate() {
            for (s, &v) in info.radical.row(t).iter().enumerate() {
                coords[s] = ((coords[s] as u64 + ct as u64 * v as u64) % p as u64) as u32;
            }
        }
        let rho = info.algebra.element(&coords);
        let (alpha, beta) = (rho.get(an, an), rho.get(bn, an));
        let (alpha2, beta2) = (rho.get(an, bn), rho.get(bn, bn));
        let det = (alpha as u64 * beta2 as u64 + (p - beta) as u64 * alpha2 as u64) % p as u64;
        if beta != 0 || det != 0 || (alpha == 0) != (beta2 == 0) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heller::closed_form_zi;
    use crate::lattice::direct_sum;

    fn ctx(n: usize) -> DvrContext {
        DvrContext::for_n(101, n).unwrap()
    }

    #[test]
    fn tau_of_zi() {
        for n in 2..=5 {
            let c = ctx(n);
            for i in 1..n {
                let z = closed_form_zi(c, n, i).unwrap();
                let t = tau(&z).unwrap();
                assert!(iso_test(&t, &closed_form_zi(c, n, n - i).unwrap()).unwrap().is_iso());
                assert!(tau_agreement(&z).unwrap().is_iso(), "n={n} i={i}");
            }
        }
        assert_eq!(tau(&Lattice::regular(ctx(3), 3)).unwrap_err(), Error::ProjectiveInput);
    }

    #[test]
    fn ei_action_matches_embedding() {
        for n in 2..=6 {
            let c = ctx(n);
            for i in 1..n {
                let e = closed_form_ei(c, n, i).unwrap();
                let emb = ei_embedding(c, n, i).unwrap();
                let amb = Lattice::free(c, n, 3);
                let x = crate::lattice::induced_action(&emb, amb.xmat()).unwrap();
                assert!(x.eq_to_precision(e.xmat()), "n={n} i={i}");
            }
        }
    }

    #[test]
    fn ei_kernel_filtration() {
        let c = ctx(5);
        for i in 1..5 {
            let e = closed_form_ei(c, 5, i).unwrap();
            let pows = e.x_powers();
            for k in 1..5 {
                let ker = kernel_basis(&pows[k]).unwrap();
                assert_eq!(ker.cols(), 2 * k);
            }
        }
    }

    #[test]
    fn level1_maps_exact_and_pullback_is_ei() {
        for n in 2..=5 {
            let c = ctx(n);
            for i in 1..n {
                let m = closed_form_level1_maps(c, n, i).unwrap();
                assert!(m.pi.compose(&m.iota).unwrap().mat().is_zero());
                let seq = ShortExactSequence {
                    left: m.iota.source().clone(),
                    middle: m.iota.target().clone(),
                    right: m.pi.target().clone(),
                    inj: m.iota.clone(),
                    surj: m.pi.clone(),
                };
                assert!(seq.check_exact().unwrap());
                let pb = pullback(&m.pi, &m.phi).unwrap();
                let e = closed_form_ei(c, n, i).unwrap();
                assert!(iso_test(&pb.lattice, &e).unwrap().is_iso(), "n={n} i={i}");
            }
        }
    }

    #[test]
    fn ass_of_zi() {
        for n in 2..=5 {
            let c = ctx(n);
            for i in 1..n {
                let z = closed_form_zi(c, n, i).unwrap();
                let ass = almost_split_sequence(&z).unwrap();
                assert!(ass.cert.ok());
                let e = closed_form_ei(c, n, i).unwrap();
                assert!(iso_test(&ass.seq.middle, &e).unwrap().is_iso(), "n={n} i={i}");
                let sum = direct_sum(&[ass.seq.left.clone(), z.clone()]).unwrap().lattice;
                assert!(!iso_test(&ass.seq.middle, &sum).unwrap().is_iso());
            }
        }
    }

    #[test]
    fn level2_maps() {
        for n in 4..=6 {
            let c = ctx(n);
            for i in 2..=n - 2 {
                let m = closed_form_level2_maps(c, n, i).unwrap();
                assert!(m.pi.compose(&m.iota).unwrap().mat().is_zero(), "n={n} i={i}");
                let one = DvrElement::one(c);
                assert!(m.pi.mat().get(n - 1, 0).eq_to_precision(&one));
                assert!(m.pi.mat().get(2 * n - 1, n).eq_to_precision(&one));
                let (k, _) = crate::lattice::kernel_lattice(&m.pi).unwrap();
                let ec = closed_form_ei(c, n, n - i).unwrap();
                assert!(iso_test(&k, &ec).unwrap().is_iso());
            }
        }
    }

    #[test]
    fn fi_embedding_matches() {
        for n in 4..=6 {
            let c = ctx(n);
            for i in 2..=n / 2 {
                let f = closed_form_fi(c, n, i).unwrap();
                let emb = fi_embedding(c, n, i).unwrap();
                let x = crate::lattice::induced_action(&emb, &fi_ambient_xmat(c, n, i).unwrap()).unwrap();
                assert!(x.eq_to_precision(f.xmat()), "n={n} i={i}");
                let m = closed_form_level2_maps(c, n, i).unwrap();
                let pb = pullback(&m.pi, &m.phi).unwrap();
                assert!(iso_test(&pb.lattice, &f).unwrap().is_iso());
            }
        }
    }

    #[test]
    fn lemma_l1() {
        for n in 4..=6 {
            for i in 2..=n / 2 {
                assert!(check_lemma_l1(ctx(n), n, i, 0).unwrap());
            }
        }
    }
}
