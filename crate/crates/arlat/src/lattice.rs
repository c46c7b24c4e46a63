//! A-lattices: free O-modules with a nilpotent X-action, `A = O[X]/(X^n)`.

use crate::dvr::{
    elementary_divisors, kernel_basis, snf, solve, DvrContext, DvrElement, DvrMatrix, ElementJson,
    Valuation,
};
use crate::fp::FpMatrix;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::{Arc, OnceLock};

struct Inner {
    n: usize,
    xmat: DvrMatrix,
    pres: OnceLock<Result<Arc<Presentation>>>,
    end: OnceLock<Result<Arc<HomSpace>>>,
    invariants: OnceLock<Result<LatticeInvariants>>,
    pub(crate) end_info: OnceLock<Result<Arc<crate::finalg::EndInfo>>>,
}

/// An A-lattice given by the matrix of X on an O-basis.
///
/// Cloning is cheap; derived data (presentation, End, invariants) is cached
/// and shared between clones.
#[derive(Clone)]
pub struct Lattice {
    inner: Arc<Inner>,
    label: Option<String>,
}

impl Lattice {
    /// Checks that `xmat` is square and `xmat^n` vanishes to precision.
    pub fn new(n: usize, xmat: DvrMatrix, label: Option<String>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Range("n must be at least 1".into()));
        }
        if !xmat.is_square() {
            return Err(Error::DimensionMismatch("X-matrix must be square".into()));
        }
        let l = Self::new_unchecked(n, xmat, label);
        if l.rank() > 0 && !l.xmat().pow(n)?.check_zero()? {
            return Err(Error::Range(format!("X^{n} is not zero on this lattice")));
        }
        Ok(l)
    }

    pub(crate) fn new_unchecked(n: usize, xmat: DvrMatrix, label: Option<String>) -> Self {
        Lattice {
            inner: Arc::new(Inner {
                n,
                xmat,
                pres: OnceLock::new(),
                end: OnceLock::new(),
                invariants: OnceLock::new(),
                end_info: OnceLock::new(),
            }),
            label,
        }
    }

    /// The regular lattice `A` with basis `1, X, …, X^{n−1}`.
    pub fn regular(ctx: DvrContext, n: usize) -> Self {
        Self::new_unchecked(n, regular_xmat(ctx, n), Some("A".into()))
    }

    /// `A^m`.
    pub fn free(ctx: DvrContext, n: usize, m: usize) -> Self {
        let x = regular_xmat(ctx, n);
        let blocks: Vec<&DvrMatrix> = (0..m).map(|_| &x).collect();
        let xm = if m == 0 {
            DvrMatrix::zeros(ctx, 0, 0)
        } else {
            DvrMatrix::block_diag(ctx, &blocks).expect("same context")
        };
        let label = match m {
            1 => "A".to_string(),
            _ => format!("A^{m}"),
        };
        Self::new_unchecked(n, xm, Some(label))
    }

    pub fn zero(ctx: DvrContext, n: usize) -> Self {
        Self::new_unchecked(n, DvrMatrix::zeros(ctx, 0, 0), Some("0".into()))
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn rank(&self) -> usize {
        self.inner.xmat.rows()
    }

    pub fn xmat(&self) -> &DvrMatrix {
        &self.inner.xmat
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Label or a placeholder.
    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| format!("M{}", self.rank()))
    }

    pub fn context(&self) -> DvrContext {
        self.inner.xmat.context()
    }

    pub fn with_label(&self, label: impl Into<String>) -> Self {
        Lattice { inner: self.inner.clone(), label: Some(label.into()) }
    }

    /// Same X-matrix object (cheap identity check used by caches).
    pub fn same_object(&self, other: &Lattice) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    pub(crate) fn end_info_cell(&self) -> &OnceLock<Result<Arc<crate::finalg::EndInfo>>> {
        &self.inner.end_info
    }

    fn check_compatible(&self, other: &Lattice) -> Result<()> {
        self.context().check(&other.context())?;
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch(format!("n = {} vs n = {}", self.n(), other.n())));
        }
        Ok(())
    }

    /// Powers `X^0, …, X^{n−1}`.
    pub fn x_powers(&self) -> Vec<DvrMatrix> {
        let ctx = self.context();
        let mut out = vec![DvrMatrix::identity(ctx, self.rank())];
        for k in 1..self.n() {
            let next = out[k - 1].mul(self.xmat()).expect("square");
            out.push(next);
        }
        out
    }

    pub fn presentation(&self) -> Result<Arc<Presentation>> {
        self.inner.pres.get_or_init(|| Presentation::compute(self).map(Arc::new)).clone()
    }

    /// O-basis of `End_A(M)`, cached.
    pub fn end_space(&self) -> Result<Arc<HomSpace>> {
        self.inner.end.get_or_init(|| hom_space(self, self).map(Arc::new)).clone()
    }

    /// Isomorphism invariants: rank and elementary divisors of `X^k`, `1 ≤ k < n`.
    pub fn invariants(&self) -> Result<LatticeInvariants> {
        self.inner
            .invariants
            .get_or_init(|| {
                let mut divs = Vec::new();
                let pows = self.x_powers();
                for p in pows.iter().skip(1) {
                    let mut d = elementary_divisors(p)?;
                    d.sort();
                    divs.push(d);
                }
                Ok(LatticeInvariants { rank: self.rank(), xpow_divisors: divs })
            })
            .clone()
    }

    /// Property (∗): `M ⊗ K` is projective over `A ⊗ K`.
    pub fn is_projective_over_k(&self) -> Result<bool> {
        let (n, r) = (self.n(), self.rank());
        if r % n != 0 {
            return Ok(false);
        }
        let inv = self.invariants()?;
        for (idx, d) in inv.xpow_divisors.iter().enumerate() {
            let k = idx + 1;
            let krank = d.iter().filter(|v| !v.is_infinite()).count();
            if krank != (n - k) * r / n {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `M ≅ A^m`: free top of dimension `rank/n` generating a rank-`rank` cover.
    pub fn is_projective(&self) -> Result<bool> {
        let pres = self.presentation()?;
        Ok(pres.gens.len() * self.n() == self.rank())
    }

    pub fn to_json(&self) -> LatticeJson {
        let ctx = self.context();
        LatticeJson {
            n: self.n(),
            rank: self.rank(),
            p: ctx.p(),
            precision: ctx.precision(),
            label: self.label.clone(),
            xmat: self.xmat().to_json(),
        }
    }

    pub fn from_json(j: &LatticeJson) -> Result<Self> {
        let ctx = DvrContext::new(j.p, j.precision)?;
        let x = if j.rank == 0 {
            DvrMatrix::zeros(ctx, 0, 0)
        } else {
            DvrMatrix::from_json(ctx, &j.xmat)?
        };
        if x.rows() != j.rank || x.cols() != j.rank {
            return Err(Error::Parse(format!("xmat is not {0}x{0}", j.rank)));
        }
        Lattice::new(j.n, x, j.label.clone())
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice {} (n={}, rank={}) X = {:?}", self.name(), self.n(), self.rank(), self.xmat())
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct LatticeJson {
    pub n: usize,
    pub rank: usize,
    pub p: u32,
    pub precision: usize,
    pub label: Option<String>,
    pub xmat: Vec<Vec<ElementJson>>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeInvariants {
    pub rank: usize,
    /// Sorted elementary divisor valuations of `X^k`, `k = 1, …, n−1`.
    pub xpow_divisors: Vec<Vec<Valuation>>,
}

/// Jordan block with subdiagonal 1s.
pub fn regular_xmat(ctx: DvrContext, n: usize) -> DvrMatrix {
    let mut x = DvrMatrix::zeros(ctx, n, n);
    for k in 1..n {
        x.set_coeff(k, k - 1, 0, 1);
    }
    x
}

pub fn regular_lattice(ctx: DvrContext, n: usize) -> Result<Lattice> {
    if n == 0 {
        return Err(Error::Range("n must be at least 1".into()));
    }
    Ok(Lattice::regular(ctx, n))
}

/// Indices of standard basis vectors spanning a complement of the column span of
/// `x` mod ε, chosen greedily by lowest index.
pub(crate) fn top_generators(x: &DvrMatrix) -> Vec<usize> {
    let r = x.rows();
    let p = x.context().p();
    let aug = FpMatrix::hstack(&[&x.residue(), &FpMatrix::identity(p, r)]);
    aug.independent_cols().into_iter().filter(|&c| c >= x.cols()).map(|c| c - x.cols()).collect()
}

/// A projective presentation `A^{m'} → A^m → M → 0`.
#[derive(Clone, Debug)]
pub struct Presentation {
    /// Standard basis vectors of `M` generating it over `A`.
    pub gens: Vec<usize>,
    /// `rank × n·m`; column `l·n + k` is `X^k g_l`.
    pub cover: DvrMatrix,
    /// `n·m × rank` with `cover · section = 1`.
    pub section: DvrMatrix,
    /// `n·m × m'`: A-generators of the relation lattice `ker(cover)`.
    pub relations: DvrMatrix,
}

impl Presentation {
    fn compute(m: &Lattice) -> Result<Self> {
        let ctx = m.context();
        let (n, r) = (m.n(), m.rank());
        let gens = top_generators(m.xmat());
        let nm = n * gens.len();
        let pows = m.x_powers();
        let mut cover = DvrMatrix::zeros(ctx, r, nm);
        for (l, &g) in gens.iter().enumerate() {
            for (k, pk) in pows.iter().enumerate() {
                cover.set_block(0, l * n + k, &pk.col(g));
            }
        }
        let section = if r == 0 {
            DvrMatrix::zeros(ctx, nm, 0)
        } else {
            solve(&cover, &DvrMatrix::identity(ctx, r))?
                .solution()
                .ok_or_else(|| Error::AlgorithmFailure("cover is not surjective".into()))?
        };
        let kern = kernel_basis(&cover)?;
        let relations = if kern.cols() == 0 {
            kern
        } else {
            let free = Lattice::free(ctx, n, gens.len());
            let xr = induced_action(&kern, free.xmat())?;
            kern.select_cols(&top_generators(&xr))
        };
        Ok(Presentation { gens, cover, section, relations })
    }

    pub fn num_generators(&self) -> usize {
        self.gens.len()
    }
}

/// The X-action on the pure span of the columns of `basis`, assumed X-stable.
pub(crate) fn induced_action(basis: &DvrMatrix, x: &DvrMatrix) -> Result<DvrMatrix> {
    let ctx = basis.context();
    if basis.cols() == 0 {
        return Ok(DvrMatrix::zeros(ctx, 0, 0));
    }
    let xb = x.mul(basis)?;
    solve(basis, &xb)?
        .solution()
        .ok_or_else(|| Error::AlgorithmFailure("column span is not X-stable".into()))
}

/// Block matrix whose `(j, l)` block is `Σ_k c[l·n + k, j] · X_T^k`.
///
/// For a linear combination `c` of generators `X^k e_l` of a free module,
/// this is the map `T^m → T^{m'}` induced on images of generators.
pub(crate) fn relation_system(c: &DvrMatrix, n: usize, m: usize, tpows: &[DvrMatrix]) -> Result<DvrMatrix> {
    let ctx = c.context();
    let rt = tpows.first().map_or(0, |x| x.rows());
    let mp = c.cols();
    let mut s = DvrMatrix::zeros(ctx, mp * rt, m * rt);
    for j in 0..mp {
        for l in 0..m {
            let mut block = DvrMatrix::zeros(ctx, rt, rt);
            let mut any = false;
            for (k, tk) in tpows.iter().enumerate().take(n) {
                let coef = c.get(l * n + k, j);
                if coef.is_zero() && coef.exact() {
                    continue;
                }
                block = block.add(&tk.scale(&coef)?)?;
                any = true;
            }
            if any {
                s.set_block(j * rt, l * rt, &block);
            }
        }
    }
    Ok(s)
}

/// An O-basis of `Hom_A(M, N)` as matrices.
#[derive(Clone)]
pub struct HomSpace {
    pub source: Lattice,
    pub target: Lattice,
    pub mats: Vec<DvrMatrix>,
    coords: OnceLock<Result<CoordSystem>>,
}

#[derive(Clone)]
struct CoordSystem {
    /// Flattened entry positions `i·cols + j` forming a unimodular minor.
    positions: Vec<usize>,
    inv: DvrMatrix,
}

impl HomSpace {
    pub fn rank(&self) -> usize {
        self.mats.len()
    }

    pub fn morphisms(&self) -> Vec<LatticeMorphism> {
        self.mats
            .iter()
            .map(|m| LatticeMorphism::new_unchecked(self.source.clone(), self.target.clone(), m.clone()))
            .collect()
    }

    /// Residues of the basis, flattened row-major as the rows of a matrix.
    pub fn residue_rows(&self) -> FpMatrix {
        let p = self.source.context().p();
        let len = self.source.rank() * self.target.rank();
        let mut data = Vec::with_capacity(len * self.mats.len());
        for m in &self.mats {
            data.extend(m.residue().flatten());
        }
        FpMatrix::from_vec(p, self.mats.len(), len, data)
    }

    fn coord_system(&self) -> Result<&CoordSystem> {
        self.coords
            .get_or_init(|| {
                let ctx = self.source.context();
                let d = self.rank();
                let cols = self.source.rank();
                let positions = self.residue_rows().independent_cols();
                if positions.len() != d {
                    return Err(Error::AlgorithmFailure("Hom basis is not saturated".into()));
                }
                // minorᵀ[t][b] = F_b at position t
                let mt = DvrMatrix::from_fn(ctx, d, d, |t, b| {
                    let pos = positions[t];
                    self.mats[b].get(pos / cols, pos % cols)
                });
                let inv = solve(&mt, &DvrMatrix::identity(ctx, d))?
                    .solution()
                    .ok_or_else(|| Error::AlgorithmFailure("coordinate minor not invertible".into()))?;
                Ok(CoordSystem { positions, inv })
            })
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// Coordinates (a `d × 1` column) of a morphism matrix known to lie in the span.
    pub fn coords(&self, f: &DvrMatrix) -> Result<DvrMatrix> {
        let cs = self.coord_system()?;
        let cols = self.source.rank();
        let ctx = self.source.context();
        let v = DvrMatrix::from_fn(ctx, cs.positions.len(), 1, |t, _| {
            let pos = cs.positions[t];
            f.get(pos / cols, pos % cols)
        });
        cs.inv.mul(&v)
    }

    /// `Σ c_b F_b`.
    pub fn combine(&self, c: &DvrMatrix) -> Result<DvrMatrix> {
        let ctx = self.source.context();
        let mut out = DvrMatrix::zeros(ctx, self.target.rank(), self.source.rank());
        for (b, m) in self.mats.iter().enumerate() {
            let e = c.get(b, 0);
            if e.is_zero() && e.exact() {
                continue;
            }
            out = out.add(&m.scale(&e)?)?;
        }
        Ok(out)
    }

    /// `Σ c_b F_b` for residue coefficients.
    pub fn combine_residues(&self, c: &[u32]) -> Result<DvrMatrix> {
        let ctx = self.source.context();
        let col = DvrMatrix::from_fn(ctx, c.len(), 1, |b, _| DvrElement::from_i64(ctx, c[b] as i64));
        self.combine(&col)
    }
}

impl fmt::Debug for HomSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hom({}, {}) of rank {}", self.source.name(), self.target.name(), self.rank())
    }
}

/// O-basis of `Hom_A(M, N)`, deterministic.
pub fn hom_space(m: &Lattice, n: &Lattice) -> Result<HomSpace> {
    m.check_compatible(n)?;
    let ctx = m.context();
    let empty = || HomSpace { source: m.clone(), target: n.clone(), mats: vec![], coords: OnceLock::new() };
    if m.rank() == 0 || n.rank() == 0 {
        return Ok(empty());
    }
    let pres = m.presentation()?;
    let (nn, rn, gens) = (m.n(), n.rank(), pres.gens.len());
    let tpows = n.x_powers();
    let sys = relation_system(&pres.relations, nn, gens, &tpows)?;
    let ker = if sys.rows() == 0 {
        DvrMatrix::identity(ctx, gens * rn)
    } else {
        kernel_basis(&sys)?
    };
    let h = ker.cols();
    if h == 0 {
        return Ok(empty());
    }
    // products[l][k] = X^k · (block l of the kernel), rn × h
    let mut products = Vec::with_capacity(gens);
    for l in 0..gens {
        let rows: Vec<usize> = (l * rn..(l + 1) * rn).collect();
        let kl = ker.select_rows(&rows);
        let row: Vec<DvrMatrix> = tpows.iter().map(|t| t.mul(&kl)).collect::<Result<_>>()?;
        products.push(row);
    }
    let mut mats = Vec::with_capacity(h);
    for b in 0..h {
        let mut q = DvrMatrix::zeros(ctx, rn, gens * nn);
        for (l, row) in products.iter().enumerate() {
            for (k, pk) in row.iter().enumerate() {
                q.set_block(0, l * nn + k, &pk.col(b));
            }
        }
        mats.push(q.mul(&pres.section)?);
    }
    Ok(HomSpace { source: m.clone(), target: n.clone(), mats, coords: OnceLock::new() })
}

/// O-basis of `Hom_A(M, N)` as morphisms.
pub fn hom_basis(m: &Lattice, n: &Lattice) -> Result<Vec<LatticeMorphism>> {
    Ok(hom_space(m, n)?.morphisms())
}

/// An A-linear map between lattices: `mat` is `target.rank × source.rank`.
#[derive(Clone)]
pub struct LatticeMorphism {
    source: Lattice,
    target: Lattice,
    mat: DvrMatrix,
}

impl LatticeMorphism {
    /// Checks shape and `F X_src = X_tgt F`.
    pub fn new(source: Lattice, target: Lattice, mat: DvrMatrix) -> Result<Self> {
        source.check_compatible(&target)?;
        if mat.rows() != target.rank() || mat.cols() != source.rank() {
            return Err(Error::DimensionMismatch(format!(
                "morphism matrix is {}x{}, expected {}x{}",
                mat.rows(),
                mat.cols(),
                target.rank(),
                source.rank()
            )));
        }
        let f = Self::new_unchecked(source, target, mat);
        if !f.is_intertwining()? {
            return Err(Error::Range("matrix does not commute with the X-actions".into()));
        }
        Ok(f)
    }

    pub(crate) fn new_unchecked(source: Lattice, target: Lattice, mat: DvrMatrix) -> Self {
        LatticeMorphism { source, target, mat }
    }

    pub fn identity(m: &Lattice) -> Self {
        Self::new_unchecked(m.clone(), m.clone(), DvrMatrix::identity(m.context(), m.rank()))
    }

    pub fn zero(m: &Lattice, n: &Lattice) -> Self {
        Self::new_unchecked(m.clone(), n.clone(), DvrMatrix::zeros(m.context(), n.rank(), m.rank()))
    }

    /// Multiplication by `X` as an endomorphism.
    pub fn x_action(m: &Lattice) -> Self {
        Self::new_unchecked(m.clone(), m.clone(), m.xmat().clone())
    }

    pub fn source(&self) -> &Lattice {
        &self.source
    }

    pub fn target(&self) -> &Lattice {
        &self.target
    }

    pub fn mat(&self) -> &DvrMatrix {
        &self.mat
    }

    pub fn is_intertwining(&self) -> Result<bool> {
        let lhs = self.mat.mul(self.source.xmat())?;
        let rhs = self.target.xmat().mul(&self.mat)?;
        lhs.sub(&rhs)?.check_zero()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LatticeMorphism) -> Result<LatticeMorphism> {
        if other.target.rank() != self.source.rank() {
            return Err(Error::DimensionMismatch("composition endpoints differ".into()));
        }
        Ok(Self::new_unchecked(other.source.clone(), self.target.clone(), self.mat.mul(&other.mat)?))
    }

    pub fn add(&self, other: &LatticeMorphism) -> Result<LatticeMorphism> {
        Ok(Self::new_unchecked(self.source.clone(), self.target.clone(), self.mat.add(&other.mat)?))
    }

    pub fn sub(&self, other: &LatticeMorphism) -> Result<LatticeMorphism> {
        Ok(Self::new_unchecked(self.source.clone(), self.target.clone(), self.mat.sub(&other.mat)?))
    }

    pub fn scale(&self, c: &DvrElement) -> Result<LatticeMorphism> {
        Ok(Self::new_unchecked(self.source.clone(), self.target.clone(), self.mat.scale(c)?))
    }

    /// Unit determinant, i.e. invertible over O.
    pub fn is_iso(&self) -> bool {
        self.mat.is_square() && self.mat.residue().rank() == self.mat.rows()
    }

    /// Inverse of an isomorphism.
    pub fn inverse(&self) -> Result<LatticeMorphism> {
        let ctx = self.mat.context();
        let inv = solve(&self.mat, &DvrMatrix::identity(ctx, self.mat.rows()))?
            .solution()
            .filter(|_| self.is_iso())
            .ok_or_else(|| Error::Range("morphism is not invertible".into()))?;
        Ok(Self::new_unchecked(self.target.clone(), self.source.clone(), inv))
    }
}

impl fmt::Debug for LatticeMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}: {:?}", self.source.name(), self.target.name(), self.mat)
    }
}

/// `0 → left → middle → right → 0`.
#[derive(Clone, Debug)]
pub struct ShortExactSequence {
    pub left: Lattice,
    pub middle: Lattice,
    pub right: Lattice,
    pub inj: LatticeMorphism,
    pub surj: LatticeMorphism,
}

impl ShortExactSequence {
    /// Composition zero, rank additivity, surjectivity and pure image equal to the kernel.
    pub fn check_exact(&self) -> Result<bool> {
        if self.middle.rank() != self.left.rank() + self.right.rank() {
            return Ok(false);
        }
        if !self.surj.compose(&self.inj)?.mat().check_zero()? {
            return Ok(false);
        }
        if !self.inj.is_intertwining()? || !self.surj.is_intertwining()? {
            return Ok(false);
        }
        let s = snf(self.surj.mat())?;
        let surjective = s.diag_valuations.iter().all(|v| *v == Valuation::Finite(0))
            && s.diag_valuations.len() == self.right.rank();
        if !surjective {
            return Ok(false);
        }
        // Pure image: inclusion matrix has unit elementary divisors.
        let d = elementary_divisors(self.inj.mat())?;
        Ok(d.iter().all(|v| *v == Valuation::Finite(0)))
    }
}

/// Sublattice on the pure span of `basis` (assumed X-stable), with its inclusion.
pub fn sublattice(m: &Lattice, basis: DvrMatrix, label: Option<String>) -> Result<(Lattice, LatticeMorphism)> {
    let x = induced_action(&basis, m.xmat())?;
    let k = Lattice::new_unchecked(m.n(), x, label);
    let inc = LatticeMorphism::new_unchecked(k.clone(), m.clone(), basis);
    Ok((k, inc))
}

/// Pure kernel of `f` with induced action and inclusion.
pub fn kernel_lattice(f: &LatticeMorphism) -> Result<(Lattice, LatticeMorphism)> {
    let basis = kernel_basis(f.mat())?;
    sublattice(f.source(), basis, None)
}

#[derive(Clone, Debug)]
pub struct DirectSum {
    pub lattice: Lattice,
    pub injections: Vec<LatticeMorphism>,
    pub projections: Vec<LatticeMorphism>,
}

pub fn direct_sum(ms: &[Lattice]) -> Result<DirectSum> {
    let first = ms.first().ok_or_else(|| Error::DimensionMismatch("empty direct sum".into()))?;
    let ctx = first.context();
    for m in ms {
        first.check_compatible(m)?;
    }
    let blocks: Vec<&DvrMatrix> = ms.iter().map(|m| m.xmat()).collect();
    let x = DvrMatrix::block_diag(ctx, &blocks)?;
    let label = ms.iter().map(|m| m.name()).collect::<Vec<_>>().join(" ⊕ ");
    let sum = Lattice::new_unchecked(first.n(), x, Some(label));
    let total = sum.rank();
    let mut injections = Vec::new();
    let mut projections = Vec::new();
    let mut off = 0;
    for m in ms {
        let mut inj = DvrMatrix::zeros(ctx, total, m.rank());
        inj.set_block(off, 0, &DvrMatrix::identity(ctx, m.rank()));
        projections.push(LatticeMorphism::new_unchecked(sum.clone(), m.clone(), inj.transpose()));
        injections.push(LatticeMorphism::new_unchecked(m.clone(), sum.clone(), inj));
        off += m.rank();
    }
    Ok(DirectSum { lattice: sum, injections, projections })
}

#[derive(Clone, Debug)]
pub struct Pullback {
    pub lattice: Lattice,
    pub proj_f: LatticeMorphism,
    pub proj_g: LatticeMorphism,
}

/// `{(x, y) : f(x) = g(y)}` for `f: M1 → Z`, `g: M2 → Z`.
pub fn pullback(f: &LatticeMorphism, g: &LatticeMorphism) -> Result<Pullback> {
    if f.target().rank() != g.target().rank() {
        return Err(Error::DimensionMismatch("pullback needs a common target".into()));
    }
    let sum = direct_sum(&[f.source().clone(), g.source().clone()])?;
    let map = DvrMatrix::hstack(&[f.mat(), &g.mat().neg()])?;
    let diff = LatticeMorphism::new_unchecked(sum.lattice.clone(), f.target().clone(), map);
    let (e, inc) = kernel_lattice(&diff)?;
    let proj_f = sum.projections[0].compose(&inc)?;
    let proj_g = sum.projections[1].compose(&inc)?;
    Ok(Pullback { lattice: e, proj_f, proj_g })
}

/// Projective cover `A^m → M` from the presentation.
pub fn projective_cover(m: &Lattice) -> Result<(Lattice, LatticeMorphism)> {
    let pres = m.presentation()?;
    let p = Lattice::free(m.context(), m.n(), pres.gens.len());
    let f = LatticeMorphism::new_unchecked(p.clone(), m.clone(), pres.cover.clone());
    Ok((p, f))
}

/// First syzygy `Ω(M) = ker(A^m → M)`.
pub fn syzygy(m: &Lattice) -> Result<(Lattice, LatticeMorphism)> {
    let (_, p) = projective_cover(m)?;
    kernel_lattice(&p)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum NotIsoReason {
    Rank { left: usize, right: usize },
    /// `Hom(M, N) = 0`.
    NoMorphisms,
    /// Elementary divisors of `X^k` differ.
    XPowerDivisors { k: usize, left: Vec<Valuation>, right: Vec<Valuation> },
    /// `End(M)` is local and every composite `M → N → M` lies in its radical.
    RadicalComposition,
    /// The indecomposable summands differ (Krull–Schmidt).
    SummandMismatch,
}

#[derive(Clone, Debug)]
pub enum IsoResult {
    ProvenIso(LatticeMorphism),
    NotIso(NotIsoReason),
    ProbablyNotIso { trials: usize, failure_bound: f64 },
}

impl IsoResult {
    pub fn is_iso(&self) -> bool {
        matches!(self, IsoResult::ProvenIso(_))
    }

    pub fn is_not_iso(&self) -> bool {
        matches!(self, IsoResult::NotIso(_))
    }

    pub fn witness(&self) -> Option<&LatticeMorphism> {
        match self {
            IsoResult::ProvenIso(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IsoOptions {
    pub trials: usize,
    pub seed: u64,
    /// Decide non-isomorphism exactly through `Rad End(M)` when `End(M)` is local.
    pub use_radical: bool,
}

impl Default for IsoOptions {
    fn default() -> Self {
        IsoOptions { trials: 20, seed: 0, use_radical: true }
    }
}

/// Three-valued isomorphism test with default options.
pub fn iso_test(m: &Lattice, n: &Lattice) -> Result<IsoResult> {
    iso_test_with(m, n, &IsoOptions::default())
}

pub fn iso_test_with(m: &Lattice, n: &Lattice, opts: &IsoOptions) -> Result<IsoResult> {
    m.check_compatible(n)?;
    if m.rank() != n.rank() {
        return Ok(IsoResult::NotIso(NotIsoReason::Rank { left: m.rank(), right: n.rank() }));
    }
    if m.rank() == 0 {
        return Ok(IsoResult::ProvenIso(LatticeMorphism::zero(m, n)));
    }
    let (im, inn) = (m.invariants()?, n.invariants()?);
    for (k, (a, b)) in im.xpow_divisors.iter().zip(&inn.xpow_divisors).enumerate() {
        if a != b {
            return Ok(IsoResult::NotIso(NotIsoReason::XPowerDivisors {
                k: k + 1,
                left: a.clone(),
                right: b.clone(),
            }));
        }
    }
    let hs = hom_space(m, n)?;
    if hs.rank() == 0 {
        return Ok(IsoResult::NotIso(NotIsoReason::NoMorphisms));
    }
    let p = m.context().p();
    let res: Vec<FpMatrix> = hs.mats.iter().map(|f| f.residue()).collect();
    let r = m.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // Single basis elements first: the common case for indecomposables.
    let mut candidates: Vec<Vec<u32>> = (0..hs.rank())
        .map(|b| {
            let mut c = vec![0; hs.rank()];
            c[b] = 1;
            c
        })
        .collect();
    for _ in 0..opts.trials {
        candidates.push((0..hs.rank()).map(|_| rng.gen_range(0..p)).collect());
    }
    for c in &candidates {
        let mut acc = FpMatrix::zeros(p, r, r);
        for (b, &cb) in c.iter().enumerate() {
            if cb != 0 {
                acc = acc.add(&res[b].scale(cb));
            }
        }
        if acc.rank() == r {
            let f = hs.combine_residues(c)?;
            return Ok(IsoResult::ProvenIso(LatticeMorphism::new_unchecked(m.clone(), n.clone(), f)));
        }
    }
    if opts.use_radical {
        match crate::finalg::rad_composition_test(m, n, &hs)? {
            Some(true) => return Ok(IsoResult::NotIso(NotIsoReason::RadicalComposition)),
            Some(false) => {}
            None => {
                if let Some(res) = krull_schmidt_iso(m, n, opts)? {
                    return Ok(res);
                }
            }
        }
    }
    let bound = (r as f64 / p as f64).min(1.0).powi(opts.trials as i32);
    Ok(IsoResult::ProbablyNotIso { trials: opts.trials, failure_bound: bound })
}

/// Decide `M ≅ N` by matching indecomposable summands; `None` when `M` is indecomposable
/// or some pair of summands was only separated probabilistically.
fn krull_schmidt_iso(m: &Lattice, n: &Lattice, opts: &IsoOptions) -> Result<Option<IsoResult>> {
    let dopts = crate::finalg::DecomposeOptions { seed: opts.seed, iso: *opts };
    let dm = crate::finalg::decompose_with(m, &[], &dopts)?;
    if dm.parts.len() < 2 {
        return Ok(None);
    }
    let dn = crate::finalg::decompose_with(n, &[], &dopts)?;
    let mut used = vec![false; dn.parts.len()];
    let mut blocks = Vec::with_capacity(dm.parts.len());
    let mut uncertain = false;
    for pm in &dm.parts {
        let mut found = None;
        for (k, pn) in dn.parts.iter().enumerate() {
            if used[k] {
                continue;
            }
            match iso_test_with(&pm.lattice, &pn.lattice, opts)? {
                IsoResult::ProvenIso(w) => {
                    found = Some((k, w));
                    break;
                }
                IsoResult::ProbablyNotIso { .. } => uncertain = true,
                IsoResult::NotIso(_) => {}
            }
        }
        match found {
            Some((k, w)) => {
                used[k] = true;
                blocks.push(dn.parts[k].inclusion.mat().mul(w.mat())?);
            }
            None if uncertain => return Ok(None),
            None => return Ok(Some(IsoResult::NotIso(NotIsoReason::SummandMismatch))),
        }
    }
    // f = [ι_N ∘ w_k]_k · [ι_M,k]_k⁻¹.
    let ctx = m.context();
    let incs: Vec<&DvrMatrix> = dm.parts.iter().map(|p| p.inclusion.mat()).collect();
    let pm = DvrMatrix::hstack(&incs)?;
    let pinv = solve(&pm, &DvrMatrix::identity(ctx, m.rank()))?
        .solution()
        .ok_or_else(|| Error::AlgorithmFailure("summand inclusions are not invertible".into()))?;
    let refs: Vec<&DvrMatrix> = blocks.iter().collect();
    let f = DvrMatrix::hstack(&refs)?.mul(&pinv)?;
    let w = LatticeMorphism::new(m.clone(), n.clone(), f)?;
    if !w.is_iso() {
        return Err(Error::AlgorithmFailure("assembled summand isomorphism is singular".into()));
    }
    Ok(Some(IsoResult::ProvenIso(w)))
}

/// Elementary-divisor summary of a finitely generated torsion O-module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionModuleInvariants {
    /// Positive valuations, sorted nondecreasing.
    pub divisors: Vec<usize>,
    /// Rank of the free part (zero for the Ext groups met here).
    pub free_rank: usize,
}

impl TorsionModuleInvariants {
    pub fn is_zero(&self) -> bool {
        self.divisors.is_empty() && self.free_rank == 0
    }
}

/// Source of an Ext computation.
#[derive(Clone, Copy)]
pub enum ExtSource<'a> {
    Lattice(&'a Lattice),
    Finite(&'a crate::heller::FiniteModule),
}

/// One step of a free resolution: `d: A^{m_k} → A^{m_{k−1}}` as an `n·m_{k−1} × n·m_k` matrix.
struct ResolutionStep {
    m: usize,
    d: DvrMatrix,
}

/// Free resolution `P_len → … → P_0 → source`, returning the differentials `d_1, …, d_len`
/// and the rank `m_0`.
fn resolution(ctx: DvrContext, n: usize, source: ExtSource, len: usize) -> Result<(usize, Vec<ResolutionStep>)> {
    // First syzygy as a sublattice of A^{m0}.
    let (m0, mut kbasis) = match source {
        ExtSource::Lattice(l) => {
            let pres = l.presentation()?;
            (pres.gens.len(), kernel_basis(&pres.cover)?)
        }
        ExtSource::Finite(fm) => {
            let (b, m) = crate::heller::cover_kernel(ctx, n, fm)?;
            (m, b)
        }
    };
    let mut steps = Vec::new();
    let mut prev_free = Lattice::free(ctx, n, m0);
    for _ in 0..len {
        if kbasis.cols() == 0 {
            steps.push(ResolutionStep { m: 0, d: DvrMatrix::zeros(ctx, prev_free.rank(), 0) });
            kbasis = DvrMatrix::zeros(ctx, 0, 0);
            prev_free = Lattice::zero(ctx, n);
            continue;
        }
        let (k, _) = sublattice(&prev_free, kbasis.clone(), None)?;
        let pres = k.presentation()?;
        let d = kbasis.mul(&pres.cover)?;
        let m = pres.gens.len();
        steps.push(ResolutionStep { m, d });
        kbasis = kernel_basis(&pres.cover)?;
        prev_free = Lattice::free(ctx, n, m);
    }
    Ok((m0, steps))
}

/// `Ext^i_A(source, target)` as elementary divisors, via `Hom(P_•, target)`.
pub fn ext(degree: usize, source: ExtSource, target: &Lattice) -> Result<TorsionModuleInvariants> {
    let ctx = target.context();
    let n = target.n();
    let (m0, steps) = resolution(ctx, n, source, degree + 1)?;
    let rt = target.rank();
    let tpows = target.x_powers();
    let ms: Vec<usize> = std::iter::once(m0).chain(steps.iter().map(|s| s.m)).collect();
    // δ_k: Hom(P_k, T) = T^{m_k} → T^{m_{k+1}}, induced by d_{k+1}.
    let delta = |k: usize| -> Result<DvrMatrix> {
        let step = &steps[k];
        let gen_cols: Vec<usize> = (0..step.m).map(|j| j * n).collect();
        let c = step.d.select_cols(&gen_cols);
        if step.m == 0 || ms[k] == 0 {
            return Ok(DvrMatrix::zeros(ctx, step.m * rt, ms[k] * rt));
        }
        relation_system(&c, n, ms[k], &tpows)
    };
    let dk = delta(degree)?;
    let ker = if dk.rows() == 0 {
        DvrMatrix::identity(ctx, ms[degree] * rt)
    } else {
        kernel_basis(&dk)?
    };
    if ker.cols() == 0 {
        return Ok(TorsionModuleInvariants { divisors: vec![], free_rank: 0 });
    }
    if degree == 0 {
        return Ok(TorsionModuleInvariants { divisors: vec![], free_rank: ker.cols() });
    }
    let dprev = delta(degree - 1)?;
    let coords = solve(&ker, &dprev)?
        .solution()
        .ok_or_else(|| Error::AlgorithmFailure("δ∘δ ≠ 0 in the Hom complex".into()))?;
    let d = elementary_divisors(&coords)?;
    let mut divisors: Vec<usize> = d.iter().filter_map(|v| v.finite()).filter(|&v| v > 0).collect();
    divisors.sort();
    let free_rank = ker.cols() - d.iter().filter(|v| !v.is_infinite()).count();
    Ok(TorsionModuleInvariants { divisors, free_rank })
}

pub fn ext1(source: ExtSource, target: &Lattice) -> Result<TorsionModuleInvariants> {
    ext(1, source, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> DvrContext {
        DvrContext::new(101, 12).unwrap()
    }

    fn z(c: DvrContext, n: usize, i: usize) -> Lattice {
        let mut x = regular_xmat(c, n);
        x.set(n - i, n - i - 1, &DvrElement::eps_pow(c, 1));
        Lattice::new(n, x, Some(format!("Z_{i}"))).unwrap()
    }

    #[test]
    fn regular_examples() {
        let c = ctx();
        let a = regular_lattice(c, 2).unwrap();
        assert!(a.xmat().eq_to_precision(&DvrMatrix::from_i64_rows(c, &[vec![0, 0], vec![1, 0]])));
        assert_eq!(regular_lattice(c, 1).unwrap().rank(), 1);
        assert!(Lattice::regular(c, 5).xmat().pow(5).unwrap().is_zero());
    }

    #[test]
    fn hom_of_regular_has_rank_n() {
        let c = ctx();
        for n in 1..5 {
            let a = Lattice::regular(c, n);
            assert_eq!(hom_space(&a, &a).unwrap().rank(), n);
        }
    }

    #[test]
    fn end_z1_n2() {
        let c = ctx();
        let z1 = z(c, 2, 1);
        let h = hom_space(&z1, &z1).unwrap();
        assert_eq!(h.rank(), 2);
        for f in &h.mats {
            // [[a, 0], [c, a]]
            assert!(f.get(0, 1).is_zero());
            assert!(f.get(0, 0).eq_to_precision(&f.get(1, 1)));
        }
    }

    #[test]
    fn cover_and_kernel_of_zi() {
        let c = ctx();
        let zi = z(c, 4, 1);
        let (p, f) = projective_cover(&zi).unwrap();
        assert_eq!(p.rank(), 8);
        let (k, _) = kernel_lattice(&f).unwrap();
        assert_eq!(k.rank(), 4);
        assert!(iso_test(&k, &z(c, 4, 3)).unwrap().is_iso());
    }

    #[test]
    fn projective_over_k() {
        let c = ctx();
        assert!(z(c, 3, 1).is_projective_over_k().unwrap());
        assert!(Lattice::regular(c, 3).is_projective_over_k().unwrap());
        let triv = Lattice::new(3, DvrMatrix::zeros(c, 1, 1), None).unwrap();
        assert!(!triv.is_projective_over_k().unwrap());
    }

    #[test]
    fn pullback_of_identities_is_diagonal() {
        let c = ctx();
        let m = z(c, 3, 1);
        let id = LatticeMorphism::identity(&m);
        let pb = pullback(&id, &id).unwrap();
        assert!(iso_test(&pb.lattice, &m).unwrap().is_iso());
    }

    #[test]
    fn ext_of_projective_vanishes() {
        let c = ctx();
        let a = Lattice::regular(c, 3);
        assert!(ext1(ExtSource::Lattice(&a), &z(c, 3, 1)).unwrap().is_zero());
    }

    #[test]
    fn ext_between_heller_lattices_nonzero() {
        let c = ctx();
        let e = ext1(ExtSource::Lattice(&z(c, 4, 1)), &z(c, 4, 3)).unwrap();
        assert!(!e.is_zero());
    }

    #[test]
    fn json_round_trip() {
        let c = ctx();
        let m = z(c, 3, 2);
        let j = serde_json::to_string(&m.to_json()).unwrap();
        let back = Lattice::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert!(back.xmat().eq_to_precision(m.xmat()));
        assert_eq!(back.label(), Some("Z_2"));
    }
}
