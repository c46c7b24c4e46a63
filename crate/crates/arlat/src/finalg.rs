//! Finite-dimensional κ-algebras given by a faithful matrix representation:
//! `End_A(M)/ε^k`, Jacobson radical, Wedderburn factors, locality, and
//! decomposition of lattices by lifting idempotents.

use crate::dvr::{saturate, DvrMatrix};
use crate::fp::{FpMatrix, Poly};
use crate::lattice::{iso_test_with, sublattice, HomSpace, IsoOptions, Lattice, LatticeMorphism};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A subalgebra of `M_m(κ)` with a κ-basis; elements are coordinate vectors.
#[derive(Clone, Debug)]
pub struct FinDimAlgebra {
    p: u32,
    rep_dim: usize,
    basis: Vec<FpMatrix>,
    provenance: String,
    positions: Vec<usize>,
    coord_inv: FpMatrix,
    /// A nilpotent matrix commuting with the algebra, used to shrink radical computations.
    commuting_nilpotent: Option<FpMatrix>,
}

impl FinDimAlgebra {
    /// `basis` must be linearly independent; closure under products is the caller's claim.
    pub fn from_matrices(p: u32, rep_dim: usize, basis: Vec<FpMatrix>, provenance: impl Into<String>) -> Result<Self> {
        let d = basis.len();
        let mut data = Vec::with_capacity(d * rep_dim * rep_dim);
        for b in &basis {
            if b.rows() != rep_dim || b.cols() != rep_dim {
                return Err(Error::DimensionMismatch("algebra basis matrix has wrong size".into()));
            }
            data.extend_from_slice(b.data());
        }
        let flat = FpMatrix::from_vec(p, d, rep_dim * rep_dim, data);
        let positions = flat.independent_cols();
        if positions.len() != d {
            return Err(Error::AlgorithmFailure("algebra basis is linearly dependent".into()));
        }
        let minor = flat.select_cols(&positions);
        // coords c satisfy cᵀ · minor = v, i.e. c = minorᵀ⁻¹ v
        let coord_inv = minor
            .transpose()
            .inverse()
            .ok_or_else(|| Error::AlgorithmFailure("singular coordinate minor".into()))?;
        Ok(FinDimAlgebra { p, rep_dim, basis, provenance: provenance.into(), positions, coord_inv, commuting_nilpotent: None })
    }

    /// From `c[(a·d + b)·d + k]` = coefficient of `e_k` in `e_a e_b`; realized by the
    /// left regular representation, which is faithful because the algebra is unital.
    pub fn from_structure_constants(p: u32, dim: usize, sc: &[u32], provenance: impl Into<String>) -> Result<Self> {
        if sc.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch("structure constants must have dim³ entries".into()));
        }
        let basis: Vec<FpMatrix> = (0..dim)
            .map(|a| {
                let mut l = FpMatrix::zeros(p, dim, dim);
                for b in 0..dim {
                    for k in 0..dim {
                        l.set(k, b, sc[(a * dim + b) * dim + k]);
                    }
                }
                l
            })
            .collect();
        let alg = Self::from_matrices(p, dim, basis, provenance)?;
        if alg.unit().is_none() {
            return Err(Error::AlgorithmFailure("structure constants define a non-unital algebra".into()));
        }
        Ok(alg)
    }

    /// Record a nilpotent `c` commuting with every basis element.
    pub fn with_commuting_nilpotent(mut self, c: FpMatrix) -> Result<Self> {
        if c.rows() != self.rep_dim || c.cols() != self.rep_dim || !c.pow(self.rep_dim as u64).is_zero() {
            return Err(Error::DimensionMismatch("commuting matrix must be nilpotent of the representation size".into()));
        }
        if self.basis.iter().any(|b| b.mul(&c) != c.mul(b)) {
            return Err(Error::AlgorithmFailure("matrix does not commute with the algebra".into()));
        }
        self.commuting_nilpotent = Some(c);
        Ok(self)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn rep_dim(&self) -> usize {
        self.rep_dim
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn basis(&self) -> &[FpMatrix] {
        &self.basis
    }

    pub fn element(&self, c: &[u32]) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.p, self.rep_dim, self.rep_dim);
        for (b, &cb) in self.basis.iter().zip(c) {
            if cb != 0 {
                out = out.add(&b.scale(cb));
            }
        }
        out
    }

    /// Coordinates of `x`, or `None` when `x` is not in the algebra.
    pub fn coords(&self, x: &FpMatrix) -> Option<Vec<u32>> {
        let v = FpMatrix::from_vec(
            self.p,
            self.positions.len(),
            1,
            self.positions.iter().map(|&q| x.data()[q]).collect(),
        );
        let c = self.coord_inv.mul(&v).flatten();
        (self.element(&c) == *x).then_some(c)
    }

    pub fn unit(&self) -> Option<Vec<u32>> {
        self.coords(&FpMatrix::identity(self.p, self.rep_dim))
    }

    /// `c[(a·d + b)·d + k]`; `None` if the span is not closed under products.
    pub fn structure_constants(&self) -> Option<Vec<u32>> {
        let d = self.dim();
        let mut out = vec![0; d * d * d];
        for a in 0..d {
            for b in 0..d {
                let c = self.coords(&self.basis[a].mul(&self.basis[b]))?;
                out[(a * d + b) * d..(a * d + b + 1) * d].copy_from_slice(&c);
            }
        }
        Some(out)
    }

    pub fn to_json(&self) -> AlgebraJson {
        AlgebraJson {
            p: self.p,
            dim: self.dim(),
            structure_constants: self.structure_constants().unwrap_or_default(),
            provenance: self.provenance.clone(),
        }
    }

    fn random_element(&self, rng: &mut impl Rng) -> (Vec<u32>, FpMatrix) {
        let c: Vec<u32> = (0..self.dim()).map(|_| rng.gen_range(0..self.p)).collect();
        let x = self.element(&c);
        (c, x)
    }

    /// Rows of `sub` (coordinate vectors) reduced to echelon form.
    fn rows_to_mats(&self, sub: &FpMatrix) -> Vec<FpMatrix> {
        (0..sub.rows()).map(|i| self.element(sub.row(i))).collect()
    }

    fn coord_rows(&self, mats: &[FpMatrix]) -> Result<FpMatrix> {
        let mut data = Vec::with_capacity(mats.len() * self.dim());
        for m in mats {
            data.extend(
                self.coords(m)
                    .ok_or_else(|| Error::AlgorithmFailure("product left the algebra".into()))?,
            );
        }
        Ok(FpMatrix::from_vec(self.p, mats.len(), self.dim(), data))
    }

    /// κ-basis of the Jacobson radical as coordinate rows, verified to be a
    /// nilpotent two-sided ideal with semisimple quotient.
    pub fn radical(&self) -> Result<FpMatrix> {
        let j = self.radical_unverified()?;
        self.verify_radical(&j, true)?;
        Ok(j)
    }

    fn radical_unverified(&self) -> Result<FpMatrix> {
        match &self.commuting_nilpotent {
            Some(c) => self.radical_via_flag(c),
            None => self.radical_direct(),
        }
    }

    /// Elements acting as zero on every layer of a `c`-stable flag form a nilpotent
    /// ideal `N`; the radical is the preimage of the radical of the small algebra `B/N`.
    fn radical_via_flag(&self, c: &FpMatrix) -> Result<FpMatrix> {
        let p = self.p;
        let m = self.rep_dim;
        let (t, sizes) = adapted_basis(&stable_flag(c));
        let tinv = t.inverse().ok_or_else(|| Error::AlgorithmFailure("flag basis singular".into()))?;
        let mut starts = Vec::with_capacity(sizes.len());
        let mut off = 0;
        for &s in &sizes {
            starts.push(off);
            off += s;
        }
        let diag_parts: Vec<FpMatrix> = self
            .basis
            .iter()
            .map(|b| {
                let conj = tinv.mul(b).mul(&t);
                let mut d = FpMatrix::zeros(p, m, m);
                for (&s0, &s) in starts.iter().zip(&sizes) {
                    for i in s0..s0 + s {
                        for j in s0..s0 + s {
                            d.set(i, j, conj.get(i, j));
                        }
                    }
                }
                d
            })
            .collect();
        let mut data = Vec::with_capacity(self.dim() * m * m);
        for d in &diag_parts {
            data.extend_from_slice(d.data());
        }
        let dflat = FpMatrix::from_vec(p, self.dim(), m * m, data);
        let indep = dflat.transpose().independent_cols();
        let quotient_basis: Vec<FpMatrix> = indep.iter().map(|&a| diag_parts[a].clone()).collect();
        let q = FinDimAlgebra::from_matrices(p, m, quotient_basis, "B/N")?;
        // phi[a] = coordinates of the image of b_a in B/N.
        let sel = dflat.select_rows(&indep);
        let phi = sel
            .transpose()
            .solve(&dflat.transpose())
            .ok_or_else(|| Error::AlgorithmFailure("layer images not in span".into()))?
            .transpose();
        let rq = q.radical_direct()?;
        let kq = if rq.rows() == 0 { FpMatrix::identity(p, q.dim()) } else { rq.kernel() };
        Ok(rref_rows(&row_kernel(&phi.mul(&kq))))
    }

    fn radical_direct(&self) -> Result<FpMatrix> {
        let p = self.p;
        let d = self.dim();
        // I_0: kernel of the trace form.
        let g = trace_gram(&self.basis, &self.basis);
        let mut ideal = row_kernel(&g); // rows = coordinates
        // Higher levels for small characteristic.
        let mut level = 1;
        let mut pl = p as u64;
        while pl <= self.rep_dim as u64 && ideal.rows() > 0 {
            let xs = self.rows_to_mats(&ideal);
            let mut gm = FpMatrix::zeros(p, xs.len(), d);
            for (a, x) in xs.iter().enumerate() {
                for (b, y) in self.basis.iter().enumerate() {
                    gm.set(a, b, ciw_functional(&x.mul(y), p, level)?);
                }
            }
            let k = row_kernel(&gm);
            ideal = rref_rows(&k.mul(&ideal));
            level += 1;
            pl *= p as u64;
        }
        Ok(rref_rows(&ideal))
    }

    fn verify_radical(&self, j: &FpMatrix, check_quotient: bool) -> Result<()> {
        let jm = self.rows_to_mats(j);
        // Two-sided ideal: every product's coordinates are annihilated by ker(J).
        let mut pairs = Vec::with_capacity(2 * jm.len() * self.dim());
        for x in &jm {
            for b in &self.basis {
                pairs.push((x, b));
                pairs.push((b, x));
            }
        }
        if !pairs.is_empty() && !self.product_coords(&pairs).mul(&j.kernel()).is_zero() {
            return Err(Error::AlgorithmFailure("radical candidate is not an ideal".into()));
        }
        if !nilpotent_on_rep(&jm, self.p, self.rep_dim) {
            return Err(Error::AlgorithmFailure("radical candidate is not nilpotent".into()));
        }
        if check_quotient && j.rows() < self.dim() {
            let q = self.quotient(j)?;
            let jq = q.radical_unverified()?;
            if jq.rows() != 0 {
                return Err(Error::AlgorithmFailure("quotient by radical is not semisimple".into()));
            }
        }
        Ok(())
    }

    /// Coordinates (as rows) of the products `x·y`, read off the coordinate
    /// positions only; closure under products is assumed.
    pub fn product_coords(&self, pairs: &[(&FpMatrix, &FpMatrix)]) -> FpMatrix {
        let p = self.p as u64;
        let m = self.rep_dim;
        let d = self.dim();
        let mut v = FpMatrix::zeros(self.p, pairs.len(), d);
        for (row, (x, y)) in pairs.iter().enumerate() {
            let (xd, yd) = (x.data(), y.data());
            for (t, &q) in self.positions.iter().enumerate() {
                let (r, c) = (q / m, q % m);
                let mut acc = 0u64;
                for k in 0..m {
                    acc += xd[r * m + k] as u64 * yd[k * m + c] as u64;
                    if k & 15 == 15 {
                        acc %= p;
                    }
                }
                v.set(row, t, (acc % p) as u32);
            }
        }
        v.mul(&self.coord_inv.transpose())
    }

    /// `B / I` for a two-sided ideal given by coordinate rows.
    pub fn quotient(&self, ideal: &FpMatrix) -> Result<FinDimAlgebra> {
        let p = self.p;
        let d = self.dim();
        let ideal = rref_rows(ideal);
        let aug = FpMatrix::vstack(&[&ideal, &FpMatrix::identity(p, d)]);
        let chosen = aug.transpose().independent_cols();
        let comp: Vec<usize> = chosen.iter().filter(|&&c| c >= ideal.rows()).map(|&c| c - ideal.rows()).collect();
        let q = comp.len();
        // Change of basis: rows [e_comp; ideal] → invertible.
        let mut t = FpMatrix::zeros(p, d, d);
        for (i, &c) in comp.iter().enumerate() {
            t.set(i, c, 1);
        }
        for i in 0..ideal.rows() {
            for k in 0..d {
                t.set(q + i, k, ideal.get(i, k));
            }
        }
        let tinv = t.inverse().ok_or_else(|| Error::AlgorithmFailure("quotient basis singular".into()))?;
        let mut sc = vec![0u32; q * q * q];
        for (a, &ca) in comp.iter().enumerate() {
            for (b, &cb) in comp.iter().enumerate() {
                let prod = self.basis[ca].mul(&self.basis[cb]);
                let v = self.coords(&prod).ok_or_else(|| Error::AlgorithmFailure("not closed".into()))?;
                let row = FpMatrix::from_vec(p, 1, d, v).mul(&tinv);
                for k in 0..q {
                    sc[(a * q + b) * q + k] = row.get(0, k);
                }
            }
        }
        FinDimAlgebra::from_structure_constants(p, q, &sc, format!("{} / J", self.provenance))
    }

    /// Center as coordinate rows.
    pub fn center(&self) -> FpMatrix {
        let p = self.p;
        let d = self.dim();
        let m2 = self.rep_dim * self.rep_dim;
        // Unknown c: Σ_a c_a [b_a, b_j] = 0 for all j.
        let mut sys = FpMatrix::zeros(p, d * m2, d);
        for a in 0..d {
            for j in 0..d {
                let comm = self.basis[a].mul(&self.basis[j]).sub(&self.basis[j].mul(&self.basis[a]));
                for (t, &v) in comm.data().iter().enumerate() {
                    if v != 0 {
                        sys.set(j * m2 + t, a, v);
                    }
                }
            }
        }
        sys.kernel().transpose()
    }

    /// Dimensions and commutativity of the simple factors of a semisimple algebra.
    pub fn semisimple_factors(&self, seed: u64) -> Result<Vec<SimpleFactor>> {
        let p = self.p;
        let z = self.center();
        let zm = self.rows_to_mats(&z);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stack = vec![FpMatrix::identity(p, self.rep_dim)];
        let mut fields = Vec::new();
        let mut budget = 200 * (zm.len() + 1);
        while let Some(e) = stack.pop() {
            let ez: Vec<FpMatrix> = zm.iter().map(|x| e.mul(x)).collect();
            let k = span_dim(&ez, p);
            if k <= 1 {
                fields.push((e, k.max(1)));
                continue;
            }
            loop {
                if budget == 0 {
                    return Err(Error::AlgorithmFailure("center did not split into fields".into()));
                }
                budget -= 1;
                let mut x = FpMatrix::zeros(p, self.rep_dim, self.rep_dim);
                for y in &ez {
                    x = x.add(&y.scale(rng.gen_range(0..p)));
                }
                let mp = min_poly_with_unit(&e, &x);
                let factors = mp.factor(&mut rng);
                if factors.len() >= 2 {
                    for idem in primary_idempotents(&e, &x, &mp, &factors) {
                        stack.push(idem);
                    }
                    break;
                }
                let deg = mp.degree().unwrap_or(0);
                if factors.len() == 1 && factors[0].1 == 1 && deg == k {
                    fields.push((e.clone(), k));
                    break;
                }
            }
        }
        let mut out: Vec<SimpleFactor> = fields
            .into_iter()
            .map(|(e, zdim)| {
                let eb: Vec<FpMatrix> = self.basis.iter().map(|b| e.mul(b)).collect();
                let dim = span_dim(&eb, p);
                SimpleFactor { dim, center_dim: zdim, commutative: dim == zdim }
            })
            .collect();
        out.sort_by_key(|f| (f.dim, f.center_dim, f.commutative));
        Ok(out)
    }

    /// Locality: `B/J` is a single commutative simple factor, i.e. a field.
    pub fn is_local(&self, seed: u64) -> Result<LocalityCertificate> {
        let j = self.radical()?;
        self.locality_from_radical(&j, seed)
    }

    fn locality_from_radical(&self, j: &FpMatrix, seed: u64) -> Result<LocalityCertificate> {
        let factors = if j.rows() == self.dim() {
            vec![]
        } else {
            self.quotient(j)?.semisimple_factors(seed)?
        };
        let verdict = if factors.len() == 1 && factors[0].commutative {
            Verdict::Local
        } else {
            Verdict::NotLocal
        };
        Ok(LocalityCertificate {
            radical_dim: j.rows(),
            simple_factor_count: factors.len(),
            factor_commutative: factors.iter().map(|f| f.commutative).collect(),
            verdict,
        })
    }

    /// A nontrivial idempotent, found as a primary component of a random element.
    pub fn find_idempotent(&self, seed: u64, tries: usize) -> Option<FpMatrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let one = FpMatrix::identity(self.p, self.rep_dim);
        for _ in 0..tries {
            let (_, x) = self.random_element(&mut rng);
            let mp = x.min_poly();
            let factors = mp.factor(&mut rng);
            if factors.len() >= 2 {
                return primary_idempotents(&one, &x, &mp, &factors).into_iter().next();
            }
        }
        None
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub p: u32,
    pub dim: usize,
    pub structure_constants: Vec<u32>,
    pub provenance: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleFactor {
    pub dim: usize,
    pub center_dim: usize,
    pub commutative: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Local,
    NotLocal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalityCertificate {
    pub radical_dim: usize,
    pub simple_factor_count: usize,
    pub factor_commutative: Vec<bool>,
    pub verdict: Verdict,
}

impl LocalityCertificate {
    pub fn is_local(&self) -> bool {
        self.verdict == Verdict::Local
    }
}

/// `G[a][b] = Tr(x_a y_b)`.
fn trace_gram(xs: &[FpMatrix], ys: &[FpMatrix]) -> FpMatrix {
    let p = xs.first().map_or(2, |x| x.p());
    let yt: Vec<FpMatrix> = ys.iter().map(|y| y.transpose()).collect();
    let mut g = FpMatrix::zeros(p, xs.len(), ys.len());
    for (a, x) in xs.iter().enumerate() {
        for (b, y) in yt.iter().enumerate() {
            let s: u64 = x.data().iter().zip(y.data()).map(|(&u, &v)| u as u64 * v as u64 % p as u64).sum();
            g.set(a, b, (s % p as u64) as u32);
        }
    }
    g
}

/// Basis (as rows) of `{c : c·G = 0}`.
fn row_kernel(g: &FpMatrix) -> FpMatrix {
    g.transpose().kernel().transpose()
}

fn rref_rows(m: &FpMatrix) -> FpMatrix {
    let mut r = m.clone();
    let piv = r.rref_in_place();
    r.select_rows(&(0..piv.len()).collect::<Vec<_>>())
}

fn span_dim(mats: &[FpMatrix], p: u32) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let len = mats[0].data().len();
    let mut data = Vec::with_capacity(mats.len() * len);
    for m in mats {
        data.extend_from_slice(m.data());
    }
    FpMatrix::from_vec(p, mats.len(), len, data).rank()
}

/// The functional `z ↦ Tr(z̃^{p^i}) / p^i mod p` on integer lifts, which is linear on
/// the previous level of the radical filtration in characteristic `p`.
fn ciw_functional(z: &FpMatrix, p: u32, level: u32) -> Result<u32> {
    let q = (p as u64).pow(level + 1);
    let n = z.rows();
    let mut m: Vec<u64> = z.data().iter().map(|&x| x as u64).collect();
    for _ in 0..level {
        m = int_matrix_pow(&m, n, p as u64, q);
    }
    let tr = (0..n).map(|i| m[i * n + i]).sum::<u64>() % q;
    let pl = (p as u64).pow(level);
    if tr % pl != 0 {
        return Err(Error::AlgorithmFailure("trace functional not divisible; input outside the filtration".into()));
    }
    Ok(((tr / pl) % p as u64) as u32)
}

fn int_matrix_pow(a: &[u64], n: usize, mut e: u64, q: u64) -> Vec<u64> {
    let mul = |x: &[u64], y: &[u64]| -> Vec<u64> {
        let mut out = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let xv = x[i * n + k];
                if xv == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] = (out[i * n + j] + xv * y[k * n + j]) % q;
                }
            }
        }
        out
    };
    let mut result: Vec<u64> = (0..n * n).map(|t| if t / n == t % n { 1 } else { 0 }).collect();
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = mul(&result, &base);
        }
        e >>= 1;
        if e > 0 {
            base = mul(&base, &base);
        }
    }
    result
}

fn nilpotent_on_rep(j: &[FpMatrix], p: u32, m: usize) -> bool {
    if j.is_empty() {
        return true;
    }
    let mut w = FpMatrix::identity(p, m);
    for _ in 0..=m {
        let imgs: Vec<FpMatrix> = j.iter().map(|x| x.mul(&w)).collect();
        let refs: Vec<&FpMatrix> = imgs.iter().collect();
        let stacked = FpMatrix::hstack(&refs);
        let piv = stacked.transpose().independent_cols();
        let _ = piv;
        let next = column_basis(&stacked);
        if next.cols() == 0 {
            return true;
        }
        if next.cols() >= w.cols() {
            return false;
        }
        w = next;
    }
    false
}

/// A strictly increasing chain `0 ⊂ U_1 ⊂ … ⊂ V` of `c`-stable subspaces (column bases):
/// `X^{a+1}V + (X^a V ∩ ker X^b)` refines the image filtration by kernels.
fn stable_flag(c: &FpMatrix) -> Vec<FpMatrix> {
    let p = c.p();
    let m = c.rows();
    let mut images = vec![FpMatrix::identity(p, m)];
    loop {
        let next = column_basis(&c.mul(images.last().expect("nonempty")));
        let done = next.cols() == 0;
        images.push(next);
        if done {
            break;
        }
    }
    let mut kernels = vec![FpMatrix::zeros(p, m, 0)];
    let mut power = FpMatrix::identity(p, m);
    loop {
        power = power.mul(c);
        let k = power.kernel();
        let full = k.cols() == m;
        kernels.push(k);
        if full {
            break;
        }
    }
    let mut chain: Vec<FpMatrix> = Vec::new();
    for a in (0..images.len() - 1).rev() {
        for k in &kernels {
            let piece = intersect(&images[a], k);
            let u = column_basis(&FpMatrix::hstack(&[&images[a + 1], &piece]));
            if u.cols() > chain.last().map_or(0, |l: &FpMatrix| l.cols()) {
                chain.push(u);
            }
        }
    }
    chain
}

fn intersect(a: &FpMatrix, b: &FpMatrix) -> FpMatrix {
    if a.cols() == 0 || b.cols() == 0 {
        return FpMatrix::zeros(a.p(), a.rows(), 0);
    }
    let k = FpMatrix::hstack(&[a, b]).kernel();
    let coeffs = k.select_rows(&(0..a.cols()).collect::<Vec<_>>());
    column_basis(&a.mul(&coeffs))
}

/// Basis adapted to a chain, with the layer sizes.
fn adapted_basis(chain: &[FpMatrix]) -> (FpMatrix, Vec<usize>) {
    let p = chain[0].p();
    let m = chain[0].rows();
    let mut t = FpMatrix::zeros(p, m, 0);
    let mut sizes = Vec::new();
    for u in chain {
        let aug = FpMatrix::hstack(&[&t, u]);
        let cols = aug.independent_cols();
        let before = t.cols();
        t = aug.select_cols(&cols);
        sizes.push(t.cols() - before);
    }
    (t, sizes)
}

fn column_basis(m: &FpMatrix) -> FpMatrix {
    let cols = m.independent_cols();
    m.select_cols(&cols)
}

/// Minimal polynomial of `x` inside the algebra with identity `unit`.
fn min_poly_with_unit(unit: &FpMatrix, x: &FpMatrix) -> Poly {
    let p = unit.p();
    let mut powers = vec![unit.clone()];
    loop {
        let k = powers.len();
        let next = powers[k - 1].mul(x);
        powers.push(next);
        let refs: Vec<Vec<u32>> = powers.iter().map(|m| m.flatten()).collect();
        let len = refs[0].len();
        let mut data = Vec::with_capacity(len * powers.len());
        for i in 0..len {
            for r in &refs {
                data.push(r[i]);
            }
        }
        let mat = FpMatrix::from_vec(p, len, powers.len(), data);
        let ker = mat.kernel();
        if ker.cols() > 0 {
            let c: Vec<u32> = (0..ker.rows()).map(|i| ker.get(i, 0)).collect();
            return Poly::new(p, c).monic();
        }
    }
}

fn eval_with_unit(unit: &FpMatrix, x: &FpMatrix, f: &Poly) -> FpMatrix {
    let mut r = FpMatrix::zeros(unit.p(), unit.rows(), unit.cols());
    for &c in f.coeffs().iter().rev() {
        r = r.mul(x).add(&unit.scale(c));
    }
    r
}

/// Idempotents `e_k` projecting onto the primary components of `x` (in the algebra with identity `unit`).
fn primary_idempotents(unit: &FpMatrix, x: &FpMatrix, mp: &Poly, factors: &[(Poly, usize)]) -> Vec<FpMatrix> {
    let p = unit.p();
    let mut out = Vec::new();
    for (f, mult) in factors {
        let mut fk = Poly::constant(p, 1);
        for _ in 0..*mult {
            fk = fk.mul(f);
        }
        let (cof, _) = mp.divrem(&fk);
        // s·cof ≡ 1 mod fk
        let (g, s, _) = cof.ext_gcd(&fk);
        let ginv = crate::fp::inv_mod(g.coeffs()[0], p);
        let e_poly = s.mul(&cof).mul(&Poly::constant(p, ginv)).rem(mp);
        out.push(eval_with_unit(unit, x, &e_poly));
    }
    out
}

/// `End_A(M)/ε^k End_A(M)`, faithfully represented on `M/ε^k M ≅ κ^{rk}`.
pub fn end_algebra_mod(m: &Lattice, k: usize) -> Result<FinDimAlgebra> {
    let ctx = m.context();
    if k == 0 || k > ctx.precision() {
        return Err(Error::Range(format!("k = {k} outside 1..={}", ctx.precision())));
    }
    let hs = m.end_space()?;
    let (p, r) = (ctx.p(), m.rank());
    let layers: Vec<Vec<FpMatrix>> = hs.mats.iter().map(|f| (0..k).map(|s| f.layer(s)).collect()).collect();
    let mut basis = Vec::new();
    for j in 0..k {
        for fl in &layers {
            // block (t', t) = F_{t'−t−j}
            let mut big = FpMatrix::zeros(p, r * k, r * k);
            for t in 0..k {
                for tp in t + j..k {
                    let blk = &fl[tp - t - j];
                    for a in 0..r {
                        for b in 0..r {
                            let v = blk.get(a, b);
                            if v != 0 {
                                big.set(tp * r + a, t * r + b, v);
                            }
                        }
                    }
                }
            }
            basis.push(big);
        }
    }
    let name = format!("End({}) mod ε^{k}", m.name());
    let alg = FinDimAlgebra::from_matrices(p, r * k, basis, name)?;
    if k == 1 && r > 0 {
        return alg.with_commuting_nilpotent(m.xmat().residue());
    }
    Ok(alg)
}

/// Cached structure of `End(M)/ε`.
pub struct EndInfo {
    pub hom: Arc<HomSpace>,
    pub algebra: FinDimAlgebra,
    /// Radical as coordinate rows in the End basis.
    pub radical: FpMatrix,
    pub cert: LocalityCertificate,
}

pub fn end_info(m: &Lattice) -> Result<Arc<EndInfo>> {
    m.end_info_cell()
        .get_or_init(|| {
            let hom = m.end_space()?;
            let algebra = end_algebra_mod(m, 1)?;
            let radical = algebra.radical()?;
            let cert = algebra.locality_from_radical(&radical, 0)?;
            Ok(Arc::new(EndInfo { hom, algebra, radical, cert }))
        })
        .clone()
}

/// Locality certificate of `End(M)/ε`, which decides indecomposability of `M`.
pub fn end_locality(m: &Lattice) -> Result<LocalityCertificate> {
    Ok(end_info(m)?.cert.clone())
}

pub fn is_indecomposable(m: &Lattice) -> Result<bool> {
    if m.rank() == 0 {
        return Ok(false);
    }
    Ok(end_info(m)?.cert.is_local())
}

/// O-module generators of `Rad End(M)`: lifts of a κ-basis of `J` and `ε·End(M)`.
pub fn rad_end_generators(m: &Lattice) -> Result<Vec<LatticeMorphism>> {
    let info = end_info(m)?;
    if !info.cert.is_local() {
        return Err(Error::NotLocal);
    }
    let ctx = m.context();
    let eps = crate::dvr::DvrElement::eps_pow(ctx, 1);
    let mut out = Vec::new();
    for i in 0..info.radical.rows() {
        let f = info.hom.combine_residues(info.radical.row(i))?;
        out.push(LatticeMorphism::new_unchecked(m.clone(), m.clone(), f));
    }
    for f in &info.hom.mats {
        out.push(LatticeMorphism::new_unchecked(m.clone(), m.clone(), f.scale(&eps)?));
    }
    Ok(out)
}

/// Generators of `Rad End(M)` as a right ideal: `ε·1` and lifts of a complement of `J²` in `J`.
pub fn rad_right_ideal_generators(m: &Lattice) -> Result<Vec<LatticeMorphism>> {
    let info = end_info(m)?;
    if !info.cert.is_local() {
        return Err(Error::NotLocal);
    }
    let ctx = m.context();
    let alg = &info.algebra;
    let jm: Vec<FpMatrix> = (0..info.radical.rows()).map(|i| alg.element(info.radical.row(i))).collect();
    let mut prods = Vec::new();
    for a in &jm {
        for b in &jm {
            prods.push(a.mul(b));
        }
    }
    let j2 = if prods.is_empty() {
        FpMatrix::zeros(alg.p(), 0, alg.dim())
    } else {
        rref_rows(&alg.coord_rows(&prods)?)
    };
    let aug = FpMatrix::vstack(&[&j2, &info.radical]);
    let chosen = aug.transpose().independent_cols();
    let mut out = vec![LatticeMorphism::new_unchecked(
        m.clone(),
        m.clone(),
        DvrMatrix::identity(ctx, m.rank()).scale(&crate::dvr::DvrElement::eps_pow(ctx, 1))?,
    )];
    for c in chosen.into_iter().filter(|&c| c >= j2.rows()) {
        let row = info.radical.row(c - j2.rows());
        out.push(LatticeMorphism::new_unchecked(m.clone(), m.clone(), info.hom.combine_residues(row)?));
    }
    Ok(out)
}

/// `Some(true)` when `End(M)` is local and every composite `M → N → M` of basis
/// morphisms lies in `Rad End(M)` (so `M ≇ N`); `None` if `End(M)` is not local.
pub(crate) fn rad_composition_test(m: &Lattice, n: &Lattice, hs_mn: &HomSpace) -> Result<Option<bool>> {
    let info = end_info(m)?;
    if !info.cert.is_local() {
        return Ok(None);
    }
    let hs_nm = crate::lattice::hom_space(n, m)?;
    let alg = &info.algebra;
    let fs: Vec<FpMatrix> = hs_mn.mats.iter().map(|f| f.residue()).collect();
    let gs: Vec<FpMatrix> = hs_nm.mats.iter().map(|g| g.residue()).collect();
    // Composites M → N → M are endomorphisms but not basis products, so coordinates come from `coords`.
    let ker = info.radical.kernel();
    for g in &gs {
        for f in &fs {
            let c = alg
                .coords(&g.mul(f))
                .ok_or_else(|| Error::AlgorithmFailure("composite is not an endomorphism".into()))?;
            let row = FpMatrix::from_vec(alg.p(), 1, c.len(), c);
            if !row.mul(&ker).is_zero() {
                return Ok(Some(false));
            }
        }
    }
    Ok(Some(true))
}

/// Lift an idempotent of `End(M)/ε` to `End(M)` modulo `ε^N` by `e ← 3e² − 2e³`.
pub fn lift_idempotent(m: &Lattice, e0: &FpMatrix) -> Result<DvrMatrix> {
    let ctx = m.context();
    let p = ctx.p();
    let r = m.rank();
    if e0.mul(e0) != *e0 {
        return Err(Error::NotIdempotent("e0² ≠ e0".into()));
    }
    if e0.is_zero() || *e0 == FpMatrix::identity(p, r) {
        return Err(Error::NotIdempotent("trivial idempotent".into()));
    }
    let info = end_info(m)?;
    let c = info
        .algebra
        .coords(e0)
        .ok_or_else(|| Error::NotIdempotent("e0 is not an endomorphism".into()))?;
    let mut e = info.hom.combine_residues(&c)?;
    let three = crate::dvr::DvrElement::from_i64(ctx, 3);
    let two = crate::dvr::DvrElement::from_i64(ctx, 2);
    let iters = (usize::BITS - ctx.precision().leading_zeros()) as usize + 2;
    for _ in 0..iters {
        let e2 = e.mul(&e)?;
        if e2.sub(&e)?.is_zero() {
            return Ok(e);
        }
        let e3 = e2.mul(&e)?;
        e = e2.scale(&three)?.sub(&e3.scale(&two)?)?;
    }
    if e.mul(&e)?.sub(&e)?.check_zero()? {
        Ok(e)
    } else {
        Err(Error::PrecisionExhausted("idempotent lifting did not converge".into()))
    }
}

/// One indecomposable summand with its inclusion into the decomposed lattice.
#[derive(Clone, Debug)]
pub struct Part {
    pub lattice: Lattice,
    pub inclusion: LatticeMorphism,
}

/// Summands grouped by isomorphism.
#[derive(Clone, Debug)]
pub struct Summand {
    pub lattice: Lattice,
    pub multiplicity: usize,
    /// Part indices in this class; the first one is the representative.
    pub parts: Vec<usize>,
    /// Isomorphisms from the representative onto each further part.
    pub witnesses: Vec<LatticeMorphism>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub parts: Vec<Part>,
    pub summands: Vec<Summand>,
    /// `k` at which `End(M)/ε^k` decided the splitting.
    pub stabilization: usize,
}

impl Decomposition {
    /// The sum of inclusions `⊕ parts → M` is invertible over O.
    pub fn round_trip(&self, m: &Lattice) -> Result<bool> {
        if self.parts.is_empty() {
            return Ok(m.rank() == 0);
        }
        let mats: Vec<&DvrMatrix> = self.parts.iter().map(|p| p.inclusion.mat()).collect();
        let all = DvrMatrix::hstack(&mats)?;
        crate::dvr::is_unimodular(&all)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.lattice.rank()).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DecomposeOptions {
    pub seed: u64,
    pub iso: IsoOptions,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { seed: 0, iso: IsoOptions::default() }
    }
}

/// Krull–Schmidt decomposition into indecomposables, grouped by isomorphism.
pub fn decompose(m: &Lattice) -> Result<Decomposition> {
    decompose_with(m, &[], &DecomposeOptions::default())
}

/// As [`decompose`], first splitting off copies of the indecomposable `hints`
/// (via `g∘f` invertible for `f: Y → M`, `g: M → Y`), which avoids computing
/// `End` of large lattices.
pub fn decompose_with(m: &Lattice, hints: &[Lattice], opts: &DecomposeOptions) -> Result<Decomposition> {
    let mut parts = Vec::new();
    let mut rest = (m.clone(), LatticeMorphism::identity(m));
    for y in hints {
        while rest.0.rank() >= y.rank() && rest.0.rank() > 0 {
            match split_off(&rest.0, y, opts.seed)? {
                Some((f, comp, inc)) => {
                    parts.push(Part { lattice: y.clone(), inclusion: rest.1.compose(&f)? });
                    rest = (comp, rest.1.compose(&inc)?);
                }
                None => break,
            }
        }
    }
    if rest.0.rank() > 0 {
        let mut raw = Vec::new();
        split_recursive(&rest.0, opts.seed, &mut raw)?;
        for (l, inc) in raw {
            parts.push(Part { lattice: l, inclusion: rest.1.compose(&inc)? });
        }
    }
    let summands = group_parts(&parts, &opts.iso)?;
    let single = parts.len() == 1;
    if single {
        // Keep the caller's label on an indecomposable input.
        if let Some(l) = m.label() {
            parts[0].lattice = parts[0].lattice.with_label(l);
        }
    }
    let summands = if single {
        vec![Summand { lattice: parts[0].lattice.clone(), ..summands[0].clone() }]
    } else {
        summands
    };
    Ok(Decomposition { parts, summands, stabilization: 1 })
}

fn split_recursive(m: &Lattice, seed: u64, out: &mut Vec<(Lattice, LatticeMorphism)>) -> Result<()> {
    let info = end_info(m)?;
    if info.cert.is_local() {
        out.push((m.clone(), LatticeMorphism::identity(m)));
        return Ok(());
    }
    let e0 = info
        .algebra
        .find_idempotent(seed, 400)
        .ok_or_else(|| Error::AlgorithmFailure("no idempotent found in a non-local End".into()))?;
    let e = lift_idempotent(m, &e0)?;
    let ctx = m.context();
    let one_minus = DvrMatrix::identity(ctx, m.rank()).sub(&e)?;
    let b1 = saturate(&e)?;
    let b2 = saturate(&one_minus)?;
    if b1.cols() + b2.cols() != m.rank() || b1.cols() == 0 || b2.cols() == 0 {
        return Err(Error::AlgorithmFailure("idempotent split has wrong ranks".into()));
    }
    for b in [b1, b2] {
        let (sub, inc) = sublattice(m, b, None)?;
        let mut inner = Vec::new();
        split_recursive(&sub, seed.wrapping_add(1), &mut inner)?;
        for (l, i2) in inner {
            out.push((l, inc.compose(&i2)?));
        }
    }
    Ok(())
}

/// If `Y` (indecomposable) is a summand of `M`: `(f: Y → M, complement, inclusion)`.
fn split_off(m: &Lattice, y: &Lattice, seed: u64) -> Result<Option<(LatticeMorphism, Lattice, LatticeMorphism)>> {
    if y.invariants()?.xpow_divisors.len() != m.invariants()?.xpow_divisors.len() {
        return Ok(None);
    }
    let hyx = crate::lattice::hom_space(y, m)?;
    let hxy = crate::lattice::hom_space(m, y)?;
    if hyx.rank() == 0 || hxy.rank() == 0 {
        return Ok(None);
    }
    let p = m.context().p();
    let r = y.rank();
    let fs: Vec<FpMatrix> = hyx.mats.iter().map(|f| f.residue()).collect();
    let gs: Vec<FpMatrix> = hxy.mats.iter().map(|g| g.residue()).collect();
    let mut found: Option<(Vec<u32>, Vec<u32>)> = None;
    'outer: for (a, f) in fs.iter().enumerate() {
        for (b, g) in gs.iter().enumerate() {
            if g.mul(f).rank() == r {
                let mut cf = vec![0; fs.len()];
                cf[a] = 1;
                let mut cg = vec![0; gs.len()];
                cg[b] = 1;
                found = Some((cf, cg));
                break 'outer;
            }
        }
    }
    if found.is_none() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..40 {
            let cf: Vec<u32> = (0..fs.len()).map(|_| rng.gen_range(0..p)).collect();
            let cg: Vec<u32> = (0..gs.len()).map(|_| rng.gen_range(0..p)).collect();
            let f = combine_fp(&fs, &cf, p, m.rank(), r);
            let g = combine_fp(&gs, &cg, p, r, m.rank());
            if g.mul(&f).rank() == r {
                found = Some((cf, cg));
                break;
            }
        }
    }
    let Some((cf, cg)) = found else { return Ok(None) };
    let f = LatticeMorphism::new_unchecked(y.clone(), m.clone(), hyx.combine_residues(&cf)?);
    let g = LatticeMorphism::new_unchecked(m.clone(), y.clone(), hxy.combine_residues(&cg)?);
    let (comp, inc) = crate::lattice::kernel_lattice(&g)?;
    Ok(Some((f, comp, inc)))
}

fn combine_fp(ms: &[FpMatrix], c: &[u32], p: u32, rows: usize, cols: usize) -> FpMatrix {
    let mut out = FpMatrix::zeros(p, rows, cols);
    for (m, &ci) in ms.iter().zip(c) {
        if ci != 0 {
            out = out.add(&m.scale(ci));
        }
    }
    out
}

fn group_parts(parts: &[Part], iso: &IsoOptions) -> Result<Vec<Summand>> {
    let mut groups: Vec<Summand> = Vec::new();
    for (idx, part) in parts.iter().enumerate() {
        let mut placed = false;
        for g in groups.iter_mut() {
            if let Some(w) = iso_test_with(&g.lattice, &part.lattice, iso)?.witness() {
                g.multiplicity += 1;
                g.parts.push(idx);
                g.witnesses.push(w.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push(Summand { lattice: part.lattice.clone(), multiplicity: 1, parts: vec![idx], witnesses: vec![] });
        }
    }
    groups.sort_by_key(|g| (g.lattice.rank(), g.lattice.invariants().ok()));
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvr::{DvrContext, DvrElement};
    use crate::lattice::regular_xmat;

    const P: u32 = 101;

    fn upper_triangular() -> FinDimAlgebra {
        let e11 = FpMatrix::from_rows(P, &[vec![1, 0], vec![0, 0]]);
        let e12 = FpMatrix::from_rows(P, &[vec![0, 1], vec![0, 0]]);
        let e22 = FpMatrix::from_rows(P, &[vec![0, 0], vec![0, 1]]);
        FinDimAlgebra::from_matrices(P, 2, vec![e11, e12, e22], "upper triangular").unwrap()
    }

    #[test]
    fn radical_examples() {
        let k = FinDimAlgebra::from_matrices(P, 1, vec![FpMatrix::identity(P, 1)], "κ").unwrap();
        assert_eq!(k.radical().unwrap().rows(), 0);
        let t = FpMatrix::from_rows(P, &[vec![0, 0], vec![1, 0]]);
        let dual = FinDimAlgebra::from_matrices(P, 2, vec![FpMatrix::identity(P, 2), t], "κ[t]/t²").unwrap();
        assert_eq!(dual.radical().unwrap().rows(), 1);
        let ut = upper_triangular();
        let j = ut.radical().unwrap();
        assert_eq!(j.rows(), 1);
        let f = ut.quotient(&j).unwrap().semisimple_factors(0).unwrap();
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn radical_in_characteristic_two() {
        for p in [2u32, 3] {
            let t = FpMatrix::from_rows(p, &[vec![0, 0, 0], vec![1, 0, 0], vec![0, 1, 0]]);
            let basis = vec![FpMatrix::identity(p, 3), t.clone(), t.mul(&t)];
            let a = FinDimAlgebra::from_matrices(p, 3, basis, "κ[t]/t³").unwrap();
            assert_eq!(a.radical().unwrap().rows(), 2);
            assert!(a.is_local(0).unwrap().is_local());
        }
    }

    #[test]
    fn semisimple_factor_examples() {
        let diag = vec![
            FpMatrix::from_rows(P, &[vec![1, 0], vec![0, 0]]),
            FpMatrix::from_rows(P, &[vec![0, 0], vec![0, 1]]),
        ];
        let kk = FinDimAlgebra::from_matrices(P, 2, diag, "κ×κ").unwrap();
        let f = kk.semisimple_factors(0).unwrap();
        assert_eq!(f.iter().map(|x| (x.dim, x.commutative)).collect::<Vec<_>>(), vec![(1, true), (1, true)]);
        let mut m2 = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                let mut e = FpMatrix::zeros(P, 2, 2);
                e.set(i, j, 1);
                m2.push(e);
            }
        }
        let m2 = FinDimAlgebra::from_matrices(P, 2, m2, "M_2").unwrap();
        let f = m2.semisimple_factors(0).unwrap();
        assert_eq!(f.iter().map(|x| (x.dim, x.commutative)).collect::<Vec<_>>(), vec![(4, false)]);
        // F_{p²} = κ[s]/(s² − 2) realized by the companion matrix (2 is a non-square mod 101).
        let s = FpMatrix::from_rows(P, &[vec![0, 2], vec![1, 0]]);
        let fq = FinDimAlgebra::from_matrices(P, 2, vec![FpMatrix::identity(P, 2), s], "F_p²").unwrap();
        let f = fq.semisimple_factors(0).unwrap();
        assert_eq!(f.iter().map(|x| (x.dim, x.commutative)).collect::<Vec<_>>(), vec![(2, true)]);
    }

    fn z(c: DvrContext, n: usize, i: usize) -> Lattice {
        let mut x = regular_xmat(c, n);
        x.set(n - i, n - i - 1, &DvrElement::eps_pow(c, 1));
        Lattice::new(n, x, Some(format!("Z_{i}"))).unwrap()
    }

    #[test]
    fn end_algebra_examples() {
        let c = DvrContext::new(P, 12).unwrap();
        let a = Lattice::regular(c, 3);
        assert_eq!(end_algebra_mod(&a, 1).unwrap().dim(), 3);
        let z1 = z(c, 2, 1);
        let b = end_algebra_mod(&z1, 1).unwrap();
        assert_eq!(b.dim(), 2);
        assert_eq!(b.radical().unwrap().rows(), 1);
        assert_eq!(end_algebra_mod(&z1, 3).unwrap().dim(), 6);
        let aa = crate::lattice::direct_sum(&[a.clone(), a.clone()]).unwrap().lattice;
        let e = end_algebra_mod(&aa, 1).unwrap();
        assert_eq!(e.dim(), 12);
        let cert = e.is_local(0).unwrap();
        assert!(!cert.is_local());
        assert_eq!(cert.simple_factor_count, 1);
        assert_eq!(cert.factor_commutative, vec![false]);
    }

    #[test]
    fn locality_of_sums() {
        let c = DvrContext::new(P, 12).unwrap();
        assert!(end_locality(&z(c, 3, 1)).unwrap().is_local());
        let s = crate::lattice::direct_sum(&[z(c, 3, 1), z(c, 3, 2)]).unwrap().lattice;
        let cert = end_locality(&s).unwrap();
        assert!(!cert.is_local());
        assert_eq!(cert.simple_factor_count, 2);
    }

    #[test]
    fn lift_block_idempotent() {
        let c = DvrContext::new(P, 12).unwrap();
        let a = Lattice::regular(c, 2);
        let aa = crate::lattice::direct_sum(&[a.clone(), a]).unwrap().lattice;
        let mut e0 = FpMatrix::zeros(P, 4, 4);
        e0.set(0, 0, 1);
        e0.set(1, 1, 1);
        let e = lift_idempotent(&aa, &e0).unwrap();
        assert!(e.mul(&e).unwrap().sub(&e).unwrap().is_zero());
        assert!(lift_idempotent(&aa, &FpMatrix::identity(P, 4)).is_err());
    }

    #[test]
    fn decompose_sum_round_trip() {
        let c = DvrContext::new(P, 12).unwrap();
        let s = crate::lattice::direct_sum(&[z(c, 3, 1), z(c, 3, 2), z(c, 3, 1)]).unwrap().lattice;
        let d = decompose(&s).unwrap();
        assert_eq!(d.parts.len(), 3);
        assert!(d.round_trip(&s).unwrap());
        let mults: Vec<usize> = d.summands.iter().map(|x| x.multiplicity).collect();
        assert_eq!(mults.iter().sum::<usize>(), 3);
        assert!(mults.contains(&2));
    }
}
