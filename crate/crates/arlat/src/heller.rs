//! Finite `A⊗κ`-modules, Heller lattices, the closed forms `Z_i` and `L_r`,
//! and the symmetric structure of `A` over O.

use crate::dvr::{solve, DvrContext, DvrElement, DvrMatrix};
use crate::finalg::{decompose, Decomposition};
use crate::fp::FpMatrix;
use crate::lattice::{regular_xmat, sublattice, Lattice, LatticeMorphism};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A finite-dimensional `κ[X]/(X^n)`-module, viewed as an A-module killed by ε.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModule {
    pub n: usize,
    pub xmat_kappa: FpMatrix,
    pub label: Option<String>,
}

impl FiniteModule {
    pub fn new(n: usize, xmat_kappa: FpMatrix, label: Option<String>) -> Result<Self> {
        if xmat_kappa.rows() != xmat_kappa.cols() {
            return Err(Error::DimensionMismatch("X-matrix must be square".into()));
        }
        if n == 0 {
            return Err(Error::Range("n must be at least 1".into()));
        }
        if xmat_kappa.rows() > 0 && !xmat_kappa.pow(n as u64).is_zero() {
            return Err(Error::Range(format!("X^{n} does not vanish on the module")));
        }
        Ok(FiniteModule { n, xmat_kappa, label })
    }

    pub fn dim(&self) -> usize {
        self.xmat_kappa.rows()
    }

    pub fn p(&self) -> u32 {
        self.xmat_kappa.p()
    }

    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| format!("N(dim {})", self.dim()))
    }

    /// `A⊗κ = κ[X]/(X^n)`.
    pub fn regular(p: u32, n: usize) -> Self {
        FiniteModule { n, xmat_kappa: jordan(p, n), label: Some("A⊗κ".into()) }
    }

    pub fn direct_sum(ms: &[FiniteModule]) -> Result<Self> {
        let first = ms.first().ok_or_else(|| Error::DimensionMismatch("empty direct sum".into()))?;
        let total: usize = ms.iter().map(|m| m.dim()).sum();
        let mut x = FpMatrix::zeros(first.p(), total, total);
        let mut off = 0;
        for m in ms {
            if m.n != first.n || m.p() != first.p() {
                return Err(Error::ContextMismatch);
            }
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    x.set(off + i, off + j, m.xmat_kappa.get(i, j));
                }
            }
            off += m.dim();
        }
        let label = ms.iter().map(|m| m.name()).collect::<Vec<_>>().join(" ⊕ ");
        Ok(FiniteModule { n: first.n, xmat_kappa: x, label: Some(label) })
    }

    pub fn to_json(&self) -> FiniteModuleJson {
        FiniteModuleJson {
            n: self.n,
            p: self.p(),
            dim: self.dim(),
            label: self.label.clone(),
            xmat: (0..self.dim()).map(|i| self.xmat_kappa.row(i).to_vec()).collect(),
        }
    }

    pub fn from_json(j: &FiniteModuleJson) -> Result<Self> {
        if j.xmat.len() != j.dim || j.xmat.iter().any(|r| r.len() != j.dim) {
            return Err(Error::Parse(format!("xmat is not {0}x{0}", j.dim)));
        }
        let rows: Vec<Vec<i64>> = j.xmat.iter().map(|r| r.iter().map(|&v| v as i64).collect()).collect();
        let x = if j.dim == 0 { FpMatrix::zeros(j.p, 0, 0) } else { FpMatrix::from_rows(j.p, &rows) };
        FiniteModule::new(j.n, x, j.label.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FiniteModuleJson {
    pub n: usize,
    pub p: u32,
    pub dim: usize,
    pub label: Option<String>,
    pub xmat: Vec<Vec<u32>>,
}

fn jordan(p: u32, d: usize) -> FpMatrix {
    let mut x = FpMatrix::zeros(p, d, d);
    for k in 1..d {
        x.set(k, k - 1, 1);
    }
    x
}

fn check_i(n: usize, i: usize) -> Result<()> {
    if n < 2 || i == 0 || i >= n {
        return Err(Error::Range(format!("need 1 ≤ i ≤ n−1, got n = {n}, i = {i}")));
    }
    Ok(())
}

/// `M_i = κ[X]/(X^{n−i})`.
pub fn module_mi(ctx: DvrContext, n: usize, i: usize) -> Result<FiniteModule> {
    check_i(n, i)?;
    Ok(FiniteModule { n, xmat_kappa: jordan(ctx.p(), n - i), label: Some(format!("M_{i}")) })
}

/// Kernel of the projective cover `A^m → N` as an O-basis of columns in `O^{n·m}`
/// (column `l·n + k` of the free module is `X^k e_l`), together with `m`.
pub fn cover_kernel(ctx: DvrContext, n: usize, fm: &FiniteModule) -> Result<(DvrMatrix, usize)> {
    if fm.n != n || fm.p() != ctx.p() {
        return Err(Error::ContextMismatch);
    }
    let (pbar, m) = cover_map(fm);
    let nm = n * m;
    let mut reduced = pbar.clone();
    let pivots = reduced.rref_in_place();
    let ker = pbar.kernel();
    let eps = DvrElement::eps_pow(ctx, 1);
    let mut basis = DvrMatrix::zeros(ctx, nm, ker.cols() + pivots.len());
    for c in 0..ker.cols() {
        for r in 0..nm {
            let v = ker.get(r, c);
            if v != 0 {
                basis.set(r, c, &DvrElement::from_i64(ctx, v as i64));
            }
        }
    }
    for (t, &pc) in pivots.iter().enumerate() {
        basis.set(pc, ker.cols() + t, &eps);
    }
    Ok((basis, m))
}

/// `(P̄, m)`: the κ-matrix of `A^m → N` sending `X^k e_l` to `X^k g_l` for a minimal generating set.
fn cover_map(fm: &FiniteModule) -> (FpMatrix, usize) {
    let p = fm.p();
    let (n, d) = (fm.n, fm.dim());
    let aug = FpMatrix::hstack(&[&fm.xmat_kappa, &FpMatrix::identity(p, d)]);
    let gens: Vec<usize> = aug.independent_cols().into_iter().filter(|&c| c >= d).map(|c| c - d).collect();
    let m = gens.len();
    let mut pbar = FpMatrix::zeros(p, d, n * m);
    for (l, &g) in gens.iter().enumerate() {
        let mut v = FpMatrix::zeros(p, d, 1);
        v.set(g, 0, 1);
        for k in 0..n {
            for r in 0..d {
                pbar.set(r, l * n + k, v.get(r, 0));
            }
            v = fm.xmat_kappa.mul(&v);
        }
    }
    (pbar, m)
}

/// The Heller lattice `Z_N ⊆ P` of `N` with its decomposition.
#[derive(Clone, Debug)]
pub struct HellerLattice {
    pub lattice: Lattice,
    pub cover: Lattice,
    pub inclusion: LatticeMorphism,
    pub decomposition: Decomposition,
}

pub fn heller_lattice(ctx: DvrContext, fm: &FiniteModule) -> Result<HellerLattice> {
    let n = fm.n;
    let (basis, m) = cover_kernel(ctx, n, fm)?;
    let cover = Lattice::free(ctx, n, m);
    let label = format!("Z({})", fm.name());
    let (lattice, inclusion) = sublattice(&cover, basis, Some(label))?;
    let decomposition = decompose(&lattice)?;
    Ok(HellerLattice { lattice, cover, inclusion, decomposition })
}

impl HellerLattice {
    /// `εP ⊆ Z_N ⊆ P`, checked by solving for `ε·1` in the span of the inclusion.
    pub fn check_sandwich(&self) -> Result<bool> {
        let ctx = self.lattice.context();
        let r = self.cover.rank();
        let eps = DvrMatrix::identity(ctx, r).scale(&DvrElement::eps_pow(ctx, 1))?;
        Ok(solve(self.inclusion.mat(), &eps)?.is_solvable())
    }
}

/// `Z_i`: basis `ε, εX, …, εX^{n−i−1}, X^{n−i}, …, X^{n−1}`.
pub fn closed_form_zi(ctx: DvrContext, n: usize, i: usize) -> Result<Lattice> {
    check_i(n, i)?;
    let mut x = regular_xmat(ctx, n);
    x.set(n - i, n - i - 1, &DvrElement::eps_pow(ctx, 1));
    Ok(Lattice::new_unchecked(n, x, Some(format!("Z_{i}"))))
}

/// `L_r`: basis `ε^r, X, …, X^{n−1}`.
pub fn closed_form_lr(ctx: DvrContext, n: usize, r: usize) -> Result<Lattice> {
    if n < 2 {
        return Err(Error::Range("L_r needs n ≥ 2".into()));
    }
    if r >= ctx.precision() {
        return Err(Error::Range(format!("r = {r} exceeds precision {}", ctx.precision())));
    }
    let mut x = regular_xmat(ctx, n);
    x.set(1, 0, &DvrElement::eps_pow(ctx, r));
    Ok(Lattice::new_unchecked(n, x, Some(format!("L_{r}"))))
}

/// The dual basis `θ_i` of `Hom_O(A, O)` and the checks that `θ_i ↦ X^i` is a
/// bimodule isomorphism onto `A`.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetricStructure {
    pub n: usize,
    /// `theta[i][j] = θ_i(X^j)`.
    pub theta: Vec<Vec<u32>>,
    pub shift_ok: bool,
    pub bijective: bool,
}

impl SymmetricStructure {
    pub fn ok(&self) -> bool {
        self.shift_ok && self.bijective
    }
}

pub fn check_symmetric_structure(n: usize) -> SymmetricStructure {
    let theta: Vec<Vec<u32>> = (0..n).map(|i| (0..n).map(|j| u32::from(j + i + 1 == n)).collect()).collect();
    // (Xθ)(X^j) = θ(X^{j+1}) and (θX)(X^j) = θ(X^j·X); A is commutative so both agree.
    let act = |f: &[u32]| -> Vec<u32> { (0..n).map(|j| if j + 1 < n { f[j + 1] } else { 0 }).collect() };
    let zero = vec![0; n];
    let shift_ok = (0..n).all(|i| {
        let expected = if i + 1 < n { &theta[i + 1] } else { &zero };
        act(&theta[i]) == *expected
    });
    // θ_i ↦ X^i in the bases θ and X^j: a permutation matrix iff every row and column has one 1.
    let bijective = (0..n).all(|j| (0..n).filter(|&i| theta[i][j] == 1).count() == 1)
        && theta.iter().all(|row| row.iter().filter(|&&v| v == 1).count() == 1);
    SymmetricStructure { n, theta, shift_ok, bijective }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::iso_test;

    fn ctx(n: usize) -> DvrContext {
        DvrContext::for_n(101, n).unwrap()
    }

    #[test]
    fn mi_shapes() {
        let m = module_mi(ctx(2), 2, 1).unwrap();
        assert_eq!(m.dim(), 1);
        assert!(m.xmat_kappa.is_zero());
        let m = module_mi(ctx(4), 4, 1).unwrap();
        assert_eq!(m.dim(), 3);
        assert!(m.xmat_kappa.pow(3).is_zero());
        assert!(!m.xmat_kappa.pow(2).is_zero());
        assert!(module_mi(ctx(4), 4, 4).is_err());
    }

    #[test]
    fn heller_of_mi_is_zi() {
        for n in 2..=5 {
            let c = ctx(n);
            for i in 1..n {
                let h = heller_lattice(c, &module_mi(c, n, i).unwrap()).unwrap();
                assert!(h.check_sandwich().unwrap());
                let z = closed_form_zi(c, n, i).unwrap();
                assert!(iso_test(&h.lattice, &z).unwrap().is_iso(), "n={n} i={i}");
                assert_eq!(h.decomposition.parts.len(), 1);
            }
        }
    }

    #[test]
    fn heller_of_regular_is_projective() {
        let c = ctx(3);
        let h = heller_lattice(c, &FiniteModule::regular(101, 3)).unwrap();
        assert!(h.lattice.is_projective().unwrap());
    }

    #[test]
    fn heller_is_additive() {
        let c = ctx(3);
        let m = FiniteModule::direct_sum(&[module_mi(c, 3, 1).unwrap(), module_mi(c, 3, 2).unwrap()]).unwrap();
        let h = heller_lattice(c, &m).unwrap();
        assert_eq!(h.decomposition.parts.len(), 2);
        for i in 1..3 {
            let z = closed_form_zi(c, 3, i).unwrap();
            assert!(h.decomposition.summands.iter().any(|s| iso_test(&s.lattice, &z).unwrap().is_iso()));
        }
    }

    #[test]
    fn lr_family() {
        let c = ctx(3);
        let l0 = closed_form_lr(c, 3, 0).unwrap();
        assert!(iso_test(&l0, &Lattice::regular(c, 3)).unwrap().is_iso());
        let l1 = closed_form_lr(c, 3, 1).unwrap();
        let l2 = closed_form_lr(c, 3, 2).unwrap();
        assert!(l2.is_projective_over_k().unwrap());
        assert!(iso_test(&l1, &l2).unwrap().is_not_iso());
    }

    #[test]
    fn symmetric_structure() {
        let s = check_symmetric_structure(2);
        assert_eq!(s.theta, vec![vec![0, 1], vec![1, 0]]);
        assert!(s.ok());
        assert!(check_symmetric_structure(1).ok());
    }

    #[test]
    fn finite_module_json() {
        let m = module_mi(ctx(4), 4, 1).unwrap();
        let back = FiniteModule::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
