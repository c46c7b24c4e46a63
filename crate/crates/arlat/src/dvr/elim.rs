//! Elimination over `O`: Smith form, kernels, solving and saturation.
//!
//! All routines share one engine: row operations with full pivoting on the entry
//! of minimal valuation (ties by lowest row, then column) plus column swaps. Because
//! the pivot divides every remaining entry, no precision is lost during
//! elimination; precision is only spent when dividing by the pivots afterwards.

use super::matrix::{DvrMatrix, Series};
use super::{DvrElement, EntryInfo, Valuation, ZeroStatus, EXACT};
use crate::{Error, Result};
use serde::Serialize;

pub(crate) struct Reduced {
    /// Upper trapezoidal: `L · A · P = work`.
    pub work: DvrMatrix,
    /// Column `t` of `work` is column `perm[t]` of the input.
    pub perm: Vec<usize>,
    pub pivots: Vec<usize>,
    /// `L · aux` when an auxiliary block was supplied.
    pub aux: Option<DvrMatrix>,
    /// Transpose of `L⁻¹` when requested.
    pub linv_t: Option<DvrMatrix>,
}

impl Reduced {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn unknown_err(p: usize) -> Error {
    Error::PrecisionExhausted(format!("pivot choice depends on an entry known only to ε^{p}"))
}

pub(crate) fn reduce(a: &DvrMatrix, aux: Option<DvrMatrix>, track_linv: bool) -> Result<Reduced> {
    let ctx = a.context();
    if let Some(b) = &aux {
        ctx.check(&b.context())?;
        if b.rows() != a.rows() {
            return Err(Error::DimensionMismatch("auxiliary block row count".into()));
        }
    }
    let (r, c) = (a.rows(), a.cols());
    let mut work = a.clone();
    let mut aux = aux;
    let mut linv_t = track_linv.then(|| DvrMatrix::identity(ctx, r));
    let mut perm: Vec<usize> = (0..c).collect();
    let mut pivots = Vec::new();
    let mut infos: Vec<Vec<EntryInfo>> = (0..r).map(|i| work.row_info(i)).collect();
    let fp = ctx.fp();

    for t in 0..r.min(c) {
        let mut best: Option<(usize, usize, usize)> = None;
        let mut unknown: Option<usize> = None;
        for (i, row) in infos.iter().enumerate().skip(t) {
            for (j, e) in row.iter().enumerate().skip(t) {
                match e.zero_status(&ctx) {
                    ZeroStatus::Nonzero(v) => {
                        if best.is_none_or(|(bv, _, _)| v < bv) {
                            best = Some((v, i, j));
                        }
                    }
                    ZeroStatus::Unknown(p) => {
                        unknown = Some(unknown.map_or(p, |u: usize| u.min(p)));
                    }
                    ZeroStatus::Zero => {}
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            if let Some(p) = unknown {
                return Err(unknown_err(p));
            }
            break;
        };
        if let Some(p) = unknown {
            if p <= v {
                return Err(unknown_err(p));
            }
        }
        work.swap_rows(t, pi);
        infos.swap(t, pi);
        if let Some(b) = aux.as_mut() {
            b.swap_rows(t, pi);
        }
        if let Some(l) = linv_t.as_mut() {
            l.swap_rows(t, pi);
        }
        if pj != t {
            work.swap_cols(t, pj);
            perm.swap(t, pj);
            for row in infos.iter_mut() {
                row.swap(t, pj);
            }
        }
        let piv = work.get(t, t);
        let unit = piv.div_eps(v)?;
        let uinv = unit.invert_unit()?;
        let snap = work.snapshot_row(t);
        let aux_snap = aux.as_ref().map(|b| b.snapshot_row(t));
        for i in t + 1..r {
            let e = infos[i][t];
            if !e.nonzero {
                // Decided zero (the pivot search excluded unknowns).
                clear_entry(&mut work, i, t);
                continue;
            }
            let f = work.get(i, t).div_eps(v)?.mul(&uinv)?;
            let fs = Series::from_element(&f);
            work.row_sub_mul(i, &snap, &fs, t, c);
            clear_entry(&mut work, i, t);
            if let (Some(b), Some(s)) = (aux.as_mut(), aux_snap.as_ref()) {
                let bc = b.cols();
                b.row_sub_mul(i, s, &fs, 0, bc);
            }
            if let Some(l) = linv_t.as_mut() {
                // L⁻¹ ← L⁻¹ (I + f e_i e_tᵀ): column t of L⁻¹ gains f · column i.
                let src = l.snapshot_row(i);
                let negf = Series {
                    coeffs: fs.coeffs.iter().map(|&x| fp.neg(x)).collect(),
                    info: fs.info,
                };
                l.row_sub_mul(t, &src, &negf, 0, r);
            }
            infos[i] = work.row_info(i);
        }
        pivots.push(v);
    }
    Ok(Reduced { work, perm, pivots, aux, linv_t })
}

fn clear_entry(m: &mut DvrMatrix, i: usize, j: usize) {
    let n = m.context().precision();
    for k in 0..n {
        m.set_coeff(i, j, k, 0);
    }
    m.set_raw_prec(i, j, EXACT);
}

/// Divide row `s` of `m` (and of `extra`) by the pivot `m[s][s]`.
fn normalize_row(m: &mut DvrMatrix, extra: Option<&mut DvrMatrix>, s: usize, v: usize) -> Result<()> {
    let piv = m.get(s, s);
    let uinv = piv.div_eps(v)?.invert_unit()?;
    let cols = m.cols();
    for j in s..cols {
        let e = m.get(s, j);
        if e.is_zero() && e.exact() {
            continue;
        }
        m.set(s, j, &e.div_eps(v)?.mul(&uinv)?);
    }
    if let Some(x) = extra {
        for j in 0..x.cols() {
            let e = x.get(s, j);
            if e.is_zero() && e.exact() {
                continue;
            }
            if let Valuation::Finite(w) = e.valuation() {
                if w < v {
                    return Err(Error::Range("not divisible by pivot".into()));
                }
            }
            x.set(s, j, &e.div_eps(v)?.mul(&uinv)?);
        }
    }
    Ok(())
}

/// Back-substitution: turn the leading `rank × rank` block of the (normalized) `g` into the identity.
fn clear_above(g: &mut DvrMatrix, rank: usize) {
    for s in (0..rank).rev() {
        let snap = g.snapshot_row(s);
        let cols = g.cols();
        for q in 0..s {
            let f = g.get(q, s);
            if f.is_zero() && f.exact() {
                continue;
            }
            let fs = Series::from_element(&f);
            g.row_sub_mul(q, &snap, &fs, s, cols);
            clear_entry(g, q, s);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SnfResult {
    #[serde(skip)]
    pub u: DvrMatrix,
    #[serde(skip)]
    pub d: DvrMatrix,
    #[serde(skip)]
    pub v: DvrMatrix,
    pub diag_valuations: Vec<Valuation>,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.diag_valuations.iter().filter(|v| !v.is_infinite()).count()
    }

    /// Finite diagonal valuations that are positive.
    pub fn torsion(&self) -> Vec<usize> {
        self.diag_valuations.iter().filter_map(|v| v.finite()).filter(|&v| v > 0).collect()
    }
}

/// Smith normal form `U · D · V = A`.
pub fn snf(a: &DvrMatrix) -> Result<SnfResult> {
    let ctx = a.context();
    let (r, c) = (a.rows(), a.cols());
    let red = reduce(a, None, true)?;
    let rank = red.rank();
    let u = red.linv_t.as_ref().expect("tracked").transpose();
    let mut d = DvrMatrix::zeros(ctx, r, c);
    let mut vp = DvrMatrix::identity(ctx, c);
    let mut work = red.work.clone();
    for s in 0..rank {
        d.set(s, s, &work.get(s, s));
    }
    for s in 0..rank {
        normalize_row(&mut work, None, s, red.pivots[s])?;
        for j in s..c {
            vp.set(s, j, &work.get(s, j));
        }
    }
    // V = V' · P⁻¹: column t of V' is column perm[t] of V.
    let mut v = DvrMatrix::zeros(ctx, c, c);
    for t in 0..c {
        for i in 0..c {
            v.set(i, red.perm[t], &vp.get(i, t));
        }
    }
    let mut diag: Vec<Valuation> = red.pivots.iter().map(|&x| Valuation::Finite(x)).collect();
    diag.resize(r.min(c), Valuation::Infinite);
    Ok(SnfResult { u, d, v, diag_valuations: diag })
}

/// Saturated O-basis of `{x : A·x = 0}` as columns.
pub fn kernel_basis(a: &DvrMatrix) -> Result<DvrMatrix> {
    let ctx = a.context();
    let c = a.cols();
    let red = reduce(a, None, false)?;
    let rank = red.rank();
    let mut g = red.work.submatrix(0..rank, 0..c);
    for s in 0..rank {
        normalize_row(&mut g, None, s, red.pivots[s])?;
    }
    clear_above(&mut g, rank);
    let k = c - rank;
    let mut out = DvrMatrix::zeros(ctx, c, k);
    let minus_one = DvrElement::from_i64(ctx, -1);
    for j in 0..k {
        for s in 0..rank {
            let e = g.get(s, rank + j);
            if !(e.is_zero() && e.exact()) {
                out.set(red.perm[s], j, &e.mul(&minus_one)?);
            }
        }
        out.set(red.perm[rank + j], j, &DvrElement::one(ctx));
    }
    Ok(out)
}

/// Smallest pure submodule containing the column span, as `rank` columns.
pub fn saturate(cols: &DvrMatrix) -> Result<DvrMatrix> {
    let left = kernel_basis(&cols.transpose())?;
    if left.cols() == 0 {
        return Ok(DvrMatrix::identity(cols.context(), cols.rows()));
    }
    kernel_basis(&left.transpose())
}

#[derive(Clone, Debug)]
pub enum Solve {
    Solution(DvrMatrix),
    /// Index of the transformed equation where divisibility fails.
    NoSolution { witness_row: usize },
}

impl Solve {
    pub fn solution(self) -> Option<DvrMatrix> {
        match self {
            Solve::Solution(x) => Some(x),
            Solve::NoSolution { .. } => None,
        }
    }

    pub fn is_solvable(&self) -> bool {
        matches!(self, Solve::Solution(_))
    }
}

/// Solve `A · X = B` over `O` (B may have several columns).
pub fn solve(a: &DvrMatrix, b: &DvrMatrix) -> Result<Solve> {
    let ctx = a.context();
    ctx.check(&b.context())?;
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch("solve: row counts differ".into()));
    }
    let c = a.cols();
    let k = b.cols();
    let red = reduce(a, Some(b.clone()), false)?;
    let rank = red.rank();
    let lb = red.aux.expect("aux supplied");
    for t in rank..a.rows() {
        for j in 0..k {
            match lb.info(t, j).zero_status(&ctx) {
                ZeroStatus::Zero => {}
                ZeroStatus::Nonzero(_) => return Ok(Solve::NoSolution { witness_row: t }),
                ZeroStatus::Unknown(p) => return Err(unknown_err(p)),
            }
        }
    }
    for t in 0..rank {
        for j in 0..k {
            match lb.info(t, j).zero_status(&ctx) {
                ZeroStatus::Nonzero(w) if w < red.pivots[t] => {
                    return Ok(Solve::NoSolution { witness_row: t })
                }
                ZeroStatus::Unknown(p) if p < red.pivots[t] => return Err(unknown_err(p)),
                _ => {}
            }
        }
    }
    let mut g = DvrMatrix::hstack(&[&red.work.submatrix(0..rank, 0..rank), &lb.submatrix(0..rank, 0..k)])?;
    let mut dummy = DvrMatrix::zeros(ctx, rank, 0);
    for s in 0..rank {
        normalize_row(&mut g, Some(&mut dummy), s, red.pivots[s])?;
    }
    clear_above(&mut g, rank);
    let mut x = DvrMatrix::zeros(ctx, c, k);
    for s in 0..rank {
        for j in 0..k {
            x.set(red.perm[s], j, &g.get(s, rank + j));
        }
    }
    Ok(Solve::Solution(x))
}

/// Diagonal valuations only (cheaper than [`snf`]).
pub fn elementary_divisors(a: &DvrMatrix) -> Result<Vec<Valuation>> {
    let red = reduce(a, None, false)?;
    let mut d: Vec<Valuation> = red.pivots.iter().map(|&x| Valuation::Finite(x)).collect();
    d.resize(a.rows().min(a.cols()), Valuation::Infinite);
    Ok(d)
}

/// Whether the matrix is invertible over `O` (square with unit determinant).
pub fn is_unimodular(a: &DvrMatrix) -> Result<bool> {
    if !a.is_square() {
        return Ok(false);
    }
    Ok(a.residue().rank() == a.rows())
}

#[cfg(test)]
mod tests {
    use crate::dvr::DvrContext;
    use super::*;

    fn ctx() -> DvrContext {
        DvrContext::new(101, 10).unwrap()
    }

    fn poly(c: DvrContext, rows: &[&[&[i64]]]) -> DvrMatrix {
        DvrMatrix::from_poly_fn(c, rows.len(), rows[0].len(), |i, j| rows[i][j].to_vec())
    }

    fn check_snf(a: &DvrMatrix) -> SnfResult {
        let s = snf(a).unwrap();
        let rec = s.u.mul(&s.d).unwrap().mul(&s.v).unwrap();
        assert!(rec.eq_to_precision(a), "U D V != A for {a:?}");
        assert!(is_unimodular(&s.u).unwrap());
        assert!(is_unimodular(&s.v).unwrap());
        s
    }

    #[test]
    fn snf_identity() {
        let c = ctx();
        let s = check_snf(&DvrMatrix::identity(c, 2));
        assert_eq!(s.diag_valuations, vec![Valuation::Finite(0), Valuation::Finite(0)]);
    }

    #[test]
    fn snf_upper_eps() {
        let c = ctx();
        let a = poly(c, &[&[&[0, 1], &[1]], &[&[0], &[0, 1]]]);
        let s = check_snf(&a);
        assert_eq!(s.diag_valuations, vec![Valuation::Finite(0), Valuation::Finite(2)]);
    }

    #[test]
    fn snf_z1_action() {
        let c = ctx();
        let a = poly(c, &[&[&[0], &[0]], &[&[0, 1], &[0]]]);
        let s = check_snf(&a);
        assert_eq!(s.diag_valuations, vec![Valuation::Finite(1), Valuation::Infinite]);
    }

    #[test]
    fn solve_examples() {
        let c = ctx();
        let b = poly(c, &[&[&[3, 4]], &[&[0, 0, 5]]]);
        let x = solve(&DvrMatrix::identity(c, 2), &b).unwrap().solution().unwrap();
        assert!(x.eq_to_precision(&b));
        let e = poly(c, &[&[&[0, 1]]]);
        assert!(!solve(&e, &poly(c, &[&[&[1]]])).unwrap().is_solvable());
        let x = solve(&e, &poly(c, &[&[&[0, 0, 1]]])).unwrap().solution().unwrap();
        assert!(x.eq_to_precision(&poly(c, &[&[&[0, 1]]])));
    }

    #[test]
    fn kernel_examples() {
        let c = ctx();
        let k = kernel_basis(&DvrMatrix::zeros(c, 2, 2)).unwrap();
        assert!(k.eq_to_precision(&DvrMatrix::identity(c, 2)));
        let k = kernel_basis(&DvrMatrix::from_i64_rows(c, &[vec![1, 0]])).unwrap();
        assert!(k.eq_to_precision(&DvrMatrix::from_i64_rows(c, &[vec![0], vec![1]])));
        let a = poly(c, &[&[&[0, 1], &[-1]]]);
        let k = kernel_basis(&a).unwrap();
        assert_eq!(k.cols(), 1);
        // (1, ε) up to a unit.
        let expected = poly(c, &[&[&[1]], &[&[0, 1]]]);
        let scale = k.get(0, 0).invert_unit().unwrap();
        assert!(k.scale(&scale).unwrap().eq_to_precision(&expected));
    }

    #[test]
    fn saturate_examples() {
        let c = ctx();
        let s = saturate(&poly(c, &[&[&[0, 1]], &[&[0]]])).unwrap();
        assert!(solve(&s, &poly(c, &[&[&[1]], &[&[0]]])).unwrap().is_solvable());
        let s = saturate(&poly(c, &[&[&[0, 1]], &[&[0, 0, 1]]])).unwrap();
        assert_eq!(s.cols(), 1);
        assert!(solve(&s, &poly(c, &[&[&[1]], &[&[0, 1]]])).unwrap().is_solvable());
    }
}
