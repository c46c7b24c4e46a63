use super::{product_prec, sum_prec, DvrContext, DvrElement, ElementJson, EntryInfo, ZeroStatus, EXACT};
use crate::fp::FpMatrix;
use crate::{Error, Result};
use std::fmt;

/// Dense matrix over `O`.
///
/// Coefficients are stored coefficient-major inside each row:
/// `data[(r·N + j)·cols + c]` is the `ε^j` coefficient of entry `(r, c)`, so that a
/// row operation with a scalar series is a sequence of contiguous axpys.
#[derive(Clone, PartialEq, Eq)]
pub struct DvrMatrix {
    ctx: DvrContext,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
    prec: Vec<u16>,
}

const TILE: usize = 128;

/// Snapshot of one row, used as the source of row operations.
pub(crate) struct RowSnap {
    pub data: Vec<u32>,
    pub info: Vec<EntryInfo>,
}

/// A scalar series with its summary.
#[derive(Clone)]
pub(crate) struct Series {
    pub coeffs: Vec<u32>,
    pub info: EntryInfo,
}

impl Series {
    pub fn from_element(e: &DvrElement) -> Self {
        Series { coeffs: e.coeffs().to_vec(), info: e.info() }
    }
}

impl DvrMatrix {
    pub fn zeros(ctx: DvrContext, rows: usize, cols: usize) -> Self {
        let n = ctx.precision();
        DvrMatrix { ctx, rows, cols, data: vec![0; rows * cols * n], prec: vec![EXACT; rows * cols] }
    }

    pub fn identity(ctx: DvrContext, size: usize) -> Self {
        let mut m = Self::zeros(ctx, size, size);
        for i in 0..size {
            m.set_coeff(i, i, 0, 1);
        }
        m
    }

    pub fn from_fn(
        ctx: DvrContext,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> DvrElement,
    ) -> Self {
        let mut m = Self::zeros(ctx, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, &f(i, j));
            }
        }
        m
    }

    /// Exact polynomial entries given by integer coefficient lists.
    pub fn from_poly_fn(
        ctx: DvrContext,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Vec<i64>,
    ) -> Self {
        Self::from_fn(ctx, rows, cols, |i, j| DvrElement::from_coeffs(ctx, &f(i, j), true))
    }

    /// Exact constant entries.
    pub fn from_i64_rows(ctx: DvrContext, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(ctx, r, c, |i, j| DvrElement::from_i64(ctx, rows[i][j]))
    }

    /// Exact constants lifted from a residue matrix.
    pub fn from_fp(ctx: DvrContext, m: &FpMatrix) -> Self {
        let mut out = Self::zeros(ctx, m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.set_coeff(i, j, 0, m.get(i, j));
            }
        }
        out
    }

    pub fn context(&self) -> DvrContext {
        self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.ctx.precision() + k) * self.cols + j
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> u32 {
        self.data[self.idx(i, j, k)]
    }

    /// Sets a coefficient without touching precision.
    pub(crate) fn set_coeff(&mut self, i: usize, j: usize, k: usize, v: u32) {
        let ix = self.idx(i, j, k);
        self.data[ix] = v;
    }

    pub(crate) fn raw_prec(&self, i: usize, j: usize) -> u16 {
        self.prec[i * self.cols + j]
    }

    pub(crate) fn set_raw_prec(&mut self, i: usize, j: usize, p: u16) {
        self.prec[i * self.cols + j] = p;
    }

    pub fn get(&self, i: usize, j: usize) -> DvrElement {
        let n = self.ctx.precision();
        let c = (0..n).map(|k| self.coeff(i, j, k)).collect();
        DvrElement::from_raw(self.ctx, c, self.raw_prec(i, j))
    }

    pub fn set(&mut self, i: usize, j: usize, e: &DvrElement) {
        assert_eq!(e.context(), self.ctx, "context mismatch in DvrMatrix::set");
        for (k, &c) in e.coeffs().iter().enumerate() {
            self.set_coeff(i, j, k, c);
        }
        self.set_raw_prec(i, j, e.raw_prec());
    }

    pub(crate) fn info(&self, i: usize, j: usize) -> EntryInfo {
        let n = self.ctx.precision();
        let mut first = None;
        let mut last = 0;
        for k in 0..n {
            if self.coeff(i, j, k) != 0 {
                if first.is_none() {
                    first = Some(k);
                }
                last = k;
            }
        }
        let prec = self.raw_prec(i, j);
        match first {
            Some(v) => EntryInfo { vlb: v as u16, deg: last as u16, prec, nonzero: true },
            None => EntryInfo {
                vlb: if prec == EXACT { n as u16 } else { prec },
                deg: 0,
                prec,
                nonzero: false,
            },
        }
    }

    /// Entry summaries for a whole row, computed in one pass.
    pub(crate) fn row_info(&self, i: usize) -> Vec<EntryInfo> {
        let n = self.ctx.precision();
        let cols = self.cols;
        let mut first = vec![u16::MAX; cols];
        let mut last = vec![0u16; cols];
        let base = i * n * cols;
        for k in 0..n {
            let row = &self.data[base + k * cols..base + (k + 1) * cols];
            let kk = k as u16;
            for ((f, l), &v) in first.iter_mut().zip(last.iter_mut()).zip(row) {
                let nz = v != 0;
                *f = (*f).min(if nz { kk } else { u16::MAX });
                *l = if nz { kk } else { *l };
            }
        }
        (0..cols)
            .map(|c| {
                let prec = self.prec[i * cols + c];
                if first[c] != u16::MAX {
                    EntryInfo { vlb: first[c], deg: last[c], prec, nonzero: true }
                } else {
                    EntryInfo {
                        vlb: if prec == EXACT { n as u16 } else { prec },
                        deg: 0,
                        prec,
                        nonzero: false,
                    }
                }
            })
            .collect()
    }

    pub(crate) fn snapshot_row(&self, i: usize) -> RowSnap {
        let n = self.ctx.precision();
        let base = i * n * self.cols;
        RowSnap { data: self.data[base..base + n * self.cols].to_vec(), info: self.row_info(i) }
    }

    /// `row[dst][c] -= f · src[c]` for `c ∈ [c0, c1)`.
    pub(crate) fn row_sub_mul(&mut self, dst: usize, src: &RowSnap, f: &Series, c0: usize, c1: usize) {
        if !f.info.nonzero || c0 >= c1 {
            if !f.info.nonzero && f.info.prec != EXACT {
                // Subtracting an unknown multiple still costs precision.
                for c in c0..c1 {
                    let pp = product_prec(self.ctx.precision(), f.info, src.info[c]);
                    let d = &mut self.prec[dst * self.cols + c];
                    *d = sum_prec(*d, pp);
                }
                self.clean_row(dst, c0, c1);
            }
            return;
        }
        let n = self.ctx.precision();
        let cols = self.cols;
        let fp = self.ctx.fp();
        let mut smin = usize::MAX;
        let mut smax = 0usize;
        for c in c0..c1 {
            let inf = src.info[c];
            if inf.nonzero {
                smin = smin.min(inf.vlb as usize);
                smax = smax.max(inf.deg as usize);
            }
            let pp = product_prec(n, f.info, inf);
            let d = &mut self.prec[dst * cols + c];
            *d = sum_prec(*d, pp);
        }
        if smin != usize::MAX {
            let base = dst * n * cols;
            let (flo, fhi) = (f.info.vlb as usize, f.info.deg as usize);
            let terms: Vec<(usize, u32)> = (flo..=fhi)
                .filter(|&t| f.coeffs[t] != 0)
                .map(|t| (t, fp.p - f.coeffs[t]))
                .collect();
            let jlo = (flo + smin).min(n);
            let jhi = (fhi + smax + 1).min(n);
            // Column tiles keep the touched part of both rows in L1.
            let mut b0 = c0;
            while b0 < c1 {
                let b1 = (b0 + TILE).min(c1);
                for j in jlo..jhi {
                    let d = &mut self.data[base + j * cols + b0..base + j * cols + b1];
                    for &(t, m) in &terms {
                        if j < t + smin || j > t + smax {
                            continue;
                        }
                        let s = &src.data[(j - t) * cols + b0..(j - t) * cols + b1];
                        for (dv, &sv) in d.iter_mut().zip(s) {
                            *dv += m * sv;
                        }
                    }
                    for dv in d.iter_mut() {
                        *dv = fp.reduce(*dv);
                    }
                }
                b0 = b1;
            }
        }
        self.clean_row(dst, c0, c1);
    }

    /// Zero stored coefficients beyond each entry's precision.
    fn clean_row(&mut self, i: usize, c0: usize, c1: usize) {
        let n = self.ctx.precision();
        let cols = self.cols;
        for c in c0..c1 {
            let p = self.prec[i * cols + c];
            if p != EXACT && (p as usize) < n {
                for k in p as usize..n {
                    self.data[(i * n + k) * cols + c] = 0;
                }
            }
        }
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let n = self.ctx.precision();
        let w = n * self.cols;
        let (lo, hi) = (a.min(b), a.max(b));
        let (x, y) = self.data.split_at_mut(hi * w);
        x[lo * w..(lo + 1) * w].swap_with_slice(&mut y[..w]);
        let cols = self.cols;
        let (x, y) = self.prec.split_at_mut(hi * cols);
        x[lo * cols..(lo + 1) * cols].swap_with_slice(&mut y[..cols]);
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let n = self.ctx.precision();
        for i in 0..self.rows {
            for k in 0..n {
                let ia = self.idx(i, a, k);
                let ib = self.idx(i, b, k);
                self.data.swap(ia, ib);
            }
            self.prec.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// Multiply row `i` by a series.
    pub(crate) fn scale_row(&mut self, i: usize, f: &Series) {
        let snap = self.snapshot_row(i);
        let cols = self.cols;
        let n = self.ctx.precision();
        let base = i * n * cols;
        for v in &mut self.data[base..base + n * cols] {
            *v = 0;
        }
        for c in 0..cols {
            self.prec[i * cols + c] = EXACT;
        }
        // row = 0 - (-f)·snap
        let fp = self.ctx.fp();
        let neg = Series {
            coeffs: f.coeffs.iter().map(|&x| fp.neg(x)).collect(),
            info: f.info,
        };
        self.row_sub_mul(i, &snap, &neg, 0, cols);
    }

    pub fn mul(&self, other: &DvrMatrix) -> Result<DvrMatrix> {
        self.ctx.check(&other.ctx)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let n = self.ctx.precision();
        let fp = self.ctx.fp();
        let (r, k, c) = (self.rows, self.cols, other.cols);
        let mut out = DvrMatrix::zeros(self.ctx, r, c);
        let binfo: Vec<Vec<EntryInfo>> = (0..k).map(|t| other.row_info(t)).collect();
        let bext: Vec<(usize, usize)> = binfo
            .iter()
            .map(|row| {
                let mut lo = usize::MAX;
                let mut hi = 0;
                for e in row {
                    if e.nonzero {
                        lo = lo.min(e.vlb as usize);
                        hi = hi.max(e.deg as usize);
                    }
                }
                (lo, hi)
            })
            .collect();
        let budget = u32::MAX as u64 - fp.p as u64;
        let sq = (fp.p as u64 - 1) * (fp.p as u64 - 1);
        let mut acc = vec![0u32; n * c];
        for i in 0..r {
            let ainfo = self.row_info(i);
            for v in acc.iter_mut() {
                *v = 0;
            }
            let mut load = 0u64;
            let mut precs = vec![EXACT; c];
            for t in 0..k {
                let ai = ainfo[t];
                for (col, pr) in precs.iter_mut().enumerate() {
                    let pp = product_prec(n, ai, binfo[t][col]);
                    *pr = sum_prec(*pr, pp);
                }
                if !ai.nonzero || bext[t].0 == usize::MAX {
                    continue;
                }
                let terms = (ai.vlb as usize..=ai.deg as usize)
                    .filter(|&s| self.coeff(i, t, s) != 0)
                    .count() as u64;
                if load + terms * sq > budget {
                    for v in acc.iter_mut() {
                        *v = fp.reduce(*v);
                    }
                    load = fp.p as u64;
                }
                load += terms * sq;
                let (blo, bhi) = bext[t];
                let bbase = t * n * c;
                for s in ai.vlb as usize..=ai.deg as usize {
                    let a = self.coeff(i, t, s);
                    if a == 0 {
                        continue;
                    }
                    for j in (s + blo)..(s + bhi + 1).min(n) {
                        let src = &other.data[bbase + (j - s) * c..bbase + (j - s + 1) * c];
                        let dst = &mut acc[j * c..(j + 1) * c];
                        for (d, &b) in dst.iter_mut().zip(src) {
                            *d += a * b;
                        }
                    }
                }
            }
            let obase = i * n * c;
            for (o, &a) in out.data[obase..obase + n * c].iter_mut().zip(&acc) {
                *o = fp.reduce(a);
            }
            out.prec[i * c..(i + 1) * c].copy_from_slice(&precs);
            out.clean_row(i, 0, c);
        }
        Ok(out)
    }

    fn zip_with(&self, other: &DvrMatrix, negate: bool) -> Result<DvrMatrix> {
        self.ctx.check(&other.ctx)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let fp = self.ctx.fp();
        let mut out = self.clone();
        for (o, &b) in out.data.iter_mut().zip(&other.data) {
            *o = if negate { fp.sub(*o, b) } else { fp.add(*o, b) };
        }
        for (o, &b) in out.prec.iter_mut().zip(&other.prec) {
            *o = sum_prec(*o, b);
        }
        for i in 0..out.rows {
            out.clean_row(i, 0, out.cols);
        }
        Ok(out)
    }

    pub fn add(&self, other: &DvrMatrix) -> Result<DvrMatrix> {
        self.zip_with(other, false)
    }

    pub fn sub(&self, other: &DvrMatrix) -> Result<DvrMatrix> {
        self.zip_with(other, true)
    }

    pub fn neg(&self) -> DvrMatrix {
        let fp = self.ctx.fp();
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v = fp.neg(*v);
        }
        out
    }

    /// Multiply every entry by a scalar.
    pub fn scale(&self, e: &DvrElement) -> Result<DvrMatrix> {
        self.ctx.check(&e.context())?;
        let mut out = self.clone();
        let f = Series::from_element(e);
        for i in 0..out.rows {
            out.scale_row(i, &f);
        }
        Ok(out)
    }

    /// Multiply by `ε^k` (shift), exact-preserving when no coefficient is pushed out.
    pub fn shift(&self, k: usize) -> DvrMatrix {
        self.scale(&DvrElement::eps_pow(self.ctx, k)).expect("same context")
    }

    pub fn transpose(&self) -> DvrMatrix {
        let n = self.ctx.precision();
        let mut out = DvrMatrix::zeros(self.ctx, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..n {
                    let v = self.coeff(i, j, k);
                    if v != 0 {
                        out.set_coeff(j, i, k, v);
                    }
                }
                out.set_raw_prec(j, i, self.raw_prec(i, j));
            }
        }
        out
    }

    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> DvrMatrix {
        let r: Vec<usize> = rows.collect();
        let c: Vec<usize> = cols.collect();
        self.select(&r, &c)
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> DvrMatrix {
        let n = self.ctx.precision();
        let mut out = DvrMatrix::zeros(self.ctx, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                for k in 0..n {
                    out.set_coeff(a, b, k, self.coeff(i, j, k));
                }
                out.set_raw_prec(a, b, self.raw_prec(i, j));
            }
        }
        out
    }

    pub fn select_cols(&self, cols: &[usize]) -> DvrMatrix {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, cols)
    }

    pub fn select_rows(&self, rows: &[usize]) -> DvrMatrix {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.select(rows, &cols)
    }

    pub fn col(&self, j: usize) -> DvrMatrix {
        self.select_cols(&[j])
    }

    /// Place `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &DvrMatrix) {
        let n = self.ctx.precision();
        for i in 0..block.rows {
            for j in 0..block.cols {
                for k in 0..n {
                    self.set_coeff(r0 + i, c0 + j, k, block.coeff(i, j, k));
                }
                self.set_raw_prec(r0 + i, c0 + j, block.raw_prec(i, j));
            }
        }
    }

    pub fn hstack(blocks: &[&DvrMatrix]) -> Result<DvrMatrix> {
        let first = blocks.first().ok_or_else(|| Error::DimensionMismatch("empty hstack".into()))?;
        let rows = first.rows;
        let mut cols = 0;
        for b in blocks {
            first.ctx.check(&b.ctx)?;
            if b.rows != rows {
                return Err(Error::DimensionMismatch("hstack row counts differ".into()));
            }
            cols += b.cols;
        }
        let mut out = DvrMatrix::zeros(first.ctx, rows, cols);
        let mut c0 = 0;
        for b in blocks {
            out.set_block(0, c0, b);
            c0 += b.cols;
        }
        Ok(out)
    }

    pub fn vstack(blocks: &[&DvrMatrix]) -> Result<DvrMatrix> {
        let first = blocks.first().ok_or_else(|| Error::DimensionMismatch("empty vstack".into()))?;
        let cols = first.cols;
        let mut rows = 0;
        for b in blocks {
            first.ctx.check(&b.ctx)?;
            if b.cols != cols {
                return Err(Error::DimensionMismatch("vstack column counts differ".into()));
            }
            rows += b.rows;
        }
        let mut out = DvrMatrix::zeros(first.ctx, rows, cols);
        let mut r0 = 0;
        for b in blocks {
            out.set_block(r0, 0, b);
            r0 += b.rows;
        }
        Ok(out)
    }

    pub fn block_diag(ctx: DvrContext, blocks: &[&DvrMatrix]) -> Result<DvrMatrix> {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = DvrMatrix::zeros(ctx, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            ctx.check(&b.ctx)?;
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        Ok(out)
    }

    pub fn pow(&self, e: usize) -> Result<DvrMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("power of non-square matrix".into()));
        }
        let mut r = DvrMatrix::identity(self.ctx, self.rows);
        for _ in 0..e {
            r = r.mul(self)?;
        }
        Ok(r)
    }

    /// True when every entry is zero at the decision floor (exact, or vanishing to `≥ N/2`).
    pub fn is_zero(&self) -> bool {
        (0..self.rows).all(|i| {
            self.row_info(i).iter().all(|e| e.zero_status(&self.ctx) == ZeroStatus::Zero)
        })
    }

    /// Entrywise zero status; `Err(PrecisionExhausted)` if any entry is undecidable.
    pub fn check_zero(&self) -> Result<bool> {
        let mut all = true;
        for i in 0..self.rows {
            for e in self.row_info(i) {
                match e.zero_status(&self.ctx) {
                    ZeroStatus::Zero => {}
                    ZeroStatus::Nonzero(_) => all = false,
                    ZeroStatus::Unknown(p) => {
                        if all {
                            return Err(Error::PrecisionExhausted(format!(
                                "entry vanishes only to precision {p}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(all)
    }

    /// Equality of known coefficients, entry by entry.
    pub fn eq_to_precision(&self, other: &DvrMatrix) -> bool {
        self.ctx == other.ctx
            && self.rows == other.rows
            && self.cols == other.cols
            && match self.sub(other) {
                Ok(d) => d.is_zero(),
                Err(_) => false,
            }
    }

    /// Every entry is an exactly known polynomial.
    pub fn is_exact(&self) -> bool {
        self.prec.iter().all(|&p| p == EXACT)
    }

    /// Smallest precision among inexact entries (`None` when exact).
    pub fn min_precision(&self) -> Option<usize> {
        self.prec.iter().filter(|&&p| p != EXACT).map(|&p| p as usize).min()
    }

    /// Reduction mod ε.
    pub fn residue(&self) -> FpMatrix {
        let mut m = FpMatrix::zeros(self.ctx.p(), self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.coeff(i, j, 0));
            }
        }
        m
    }

    /// The `ε^k` coefficient matrix.
    pub fn layer(&self, k: usize) -> FpMatrix {
        let mut m = FpMatrix::zeros(self.ctx.p(), self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.coeff(i, j, k));
            }
        }
        m
    }

    /// Minimal valuation over all entries (`None` if the matrix is zero).
    pub fn min_valuation(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..self.rows {
            for e in self.row_info(i) {
                if e.nonzero {
                    best = Some(best.map_or(e.vlb as usize, |b: usize| b.min(e.vlb as usize)));
                }
            }
        }
        best
    }

    /// Divide every entry by `ε^k`; entries must have valuation `≥ k`.
    pub fn div_eps(&self, k: usize) -> Result<DvrMatrix> {
        let mut out = DvrMatrix::zeros(self.ctx, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, &self.get(i, j).div_eps(k)?);
            }
        }
        Ok(out)
    }

    /// Move to a context with the same prime and another cap.
    pub fn recast(&self, ctx: DvrContext) -> Result<DvrMatrix> {
        let mut out = DvrMatrix::zeros(ctx, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, &self.get(i, j).recast(ctx)?);
            }
        }
        Ok(out)
    }

    /// Truncate every entry to precision `k` (same context).
    pub fn truncate(&self, k: usize) -> DvrMatrix {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, &self.get(i, j).truncate(k));
            }
        }
        out
    }

    /// `Σ c_k M_k` for exact residue coefficients `c_k`.
    pub fn linear_combination(ctx: DvrContext, rows: usize, cols: usize, terms: &[(u32, &DvrMatrix)]) -> Result<DvrMatrix> {
        let mut out = DvrMatrix::zeros(ctx, rows, cols);
        for &(c, m) in terms {
            if c == 0 {
                continue;
            }
            out = out.add(&m.scale(&DvrElement::from_i64(ctx, c as i64))?)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Vec<Vec<ElementJson>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_json()).collect()).collect()
    }

    pub fn from_json(ctx: DvrContext, rows: &[Vec<ElementJson>]) -> Result<DvrMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut out = DvrMatrix::zeros(ctx, r, c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::Parse("ragged matrix".into()));
            }
            for (j, e) in row.iter().enumerate() {
                out.set(i, j, &DvrElement::from_json(ctx, e)?);
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for DvrMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DvrMatrix {}x{} (p={}, N={})", self.rows, self.cols, self.ctx.p(), self.ctx.precision())?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> DvrContext {
        DvrContext::new(101, 6).unwrap()
    }

    #[test]
    fn multiply_matches_elementwise() {
        let c = ctx();
        let a = DvrMatrix::from_poly_fn(c, 2, 3, |i, j| vec![(i + j) as i64, 1, i as i64]);
        let b = DvrMatrix::from_poly_fn(c, 3, 2, |i, j| vec![1, (i * j) as i64]);
        let ab = a.mul(&b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = DvrElement::zero(c);
                for k in 0..3 {
                    s = s.add(&a.get(i, k).mul(&b.get(k, j)).unwrap()).unwrap();
                }
                assert_eq!(ab.get(i, j), s);
            }
        }
        assert!(ab.is_exact());
    }

    #[test]
    fn transpose_and_stack() {
        let c = ctx();
        let a = DvrMatrix::from_i64_rows(c, &[vec![1, 2], vec![3, 4]]);
        let t = a.transpose();
        assert_eq!(t.get(0, 1), DvrElement::from_i64(c, 3));
        let h = DvrMatrix::hstack(&[&a, &t]).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 4));
        let v = DvrMatrix::vstack(&[&a, &t]).unwrap();
        assert_eq!(v.select(&[3], &[0]).get(0, 0), DvrElement::from_i64(c, 2));
    }

    #[test]
    fn row_op_tracks_precision() {
        let c = ctx();
        let mut a = DvrMatrix::from_i64_rows(c, &[vec![1, 1], vec![0, 1]]);
        let snap = a.snapshot_row(0);
        let f = Series::from_element(&DvrElement::from_i64(c, 1).invert_unit().unwrap());
        a.row_sub_mul(1, &snap, &f, 0, 2);
        assert_eq!(a.get(1, 0), DvrElement::from_i64(c, -1));
        let g = Series::from_element(&DvrElement::from_coeffs(c, &[1, 1], true).invert_unit().unwrap());
        a.row_sub_mul(1, &snap, &g, 0, 2);
        assert!(!a.get(1, 0).exact());
    }
}
