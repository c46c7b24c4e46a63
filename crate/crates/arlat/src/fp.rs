//! Dense linear algebra and univariate polynomials over `κ = F_p`.

use rand::Rng;
use std::fmt;

#[derive(Clone, PartialEq, Eq)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

#[inline]
fn mulmod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

pub fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1 % p);
        }
        m
    }

    pub fn from_rows(p: u32, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(p, r, c);
        for i in 0..r {
            for j in 0..c {
                m.set(i, j, rows[i][j].rem_euclid(p as i64) as u32);
            }
        }
        m
    }

    pub fn from_vec(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Self {
        assert_eq!(data.len(), rows * cols);
        FpMatrix { p, rows, cols, data }
    }

    pub fn random(p: u32, rows: usize, cols: usize, rng: &mut impl Rng) -> Self {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..p)).collect();
        FpMatrix { p, rows, cols, data }
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "FpMatrix::mul dimensions");
        let p = self.p as u64;
        let mut out = FpMatrix::zeros(self.p, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        // Delay reduction while the u64 accumulator is safe.
        let limit = u64::MAX / ((p - 1).max(1) * (p - 1).max(1)) - 1;
        for i in 0..self.rows {
            acc.iter_mut().for_each(|x| *x = 0);
            let mut load = 0u64;
            for k in 0..self.cols {
                let a = self.get(i, k) as u64;
                if a == 0 {
                    continue;
                }
                if load == limit {
                    acc.iter_mut().for_each(|x| *x %= p);
                    load = 1;
                }
                load += 1;
                for (x, &b) in acc.iter_mut().zip(other.row(k)) {
                    *x += a * b as u64;
                }
            }
            for (j, &x) in acc.iter().enumerate() {
                out.data[i * other.cols + j] = (x % p) as u32;
            }
        }
        out
    }

    pub fn add(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let p = self.p;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| (a + b) % p).collect();
        FpMatrix { p, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let p = self.p;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| (a + p - b) % p).collect();
        FpMatrix { p, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: u32) -> FpMatrix {
        let p = self.p;
        FpMatrix { p, rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| mulmod(a, c, p)).collect() }
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    pub fn trace(&self) -> u32 {
        (0..self.rows.min(self.cols)).fold(0, |s, i| (s + self.get(i, i)) % self.p)
    }

    pub fn pow(&self, mut e: u64) -> FpMatrix {
        let mut r = FpMatrix::identity(self.p, self.rows);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    pub fn hstack(blocks: &[&FpMatrix]) -> FpMatrix {
        let rows = blocks[0].rows;
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = FpMatrix::zeros(blocks[0].p, rows, cols);
        let mut c0 = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out.data[i * cols + c0 + j] = b.get(i, j);
                }
            }
            c0 += b.cols;
        }
        out
    }

    pub fn vstack(blocks: &[&FpMatrix]) -> FpMatrix {
        let cols = blocks[0].cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols);
            data.extend_from_slice(&b.data);
            rows += b.rows;
        }
        FpMatrix { p: blocks[0].p, rows, cols, data }
    }

    pub fn select_cols(&self, cols: &[usize]) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.p, self.rows, cols.len());
        for i in 0..self.rows {
            for (b, &j) in cols.iter().enumerate() {
                out.data[i * cols.len() + b] = self.get(i, j);
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> FpMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        FpMatrix { p: self.p, rows: rows.len(), cols: self.cols, data }
    }

    /// Flatten row-major into a single row vector.
    pub fn flatten(&self) -> Vec<u32> {
        self.data.clone()
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let p = self.p;
        let (r, c) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..c {
            if row == r {
                break;
            }
            let Some(pr) = (row..r).find(|&i| self.get(i, col) != 0) else { continue };
            if pr != row {
                for j in 0..c {
                    self.data.swap(pr * c + j, row * c + j);
                }
            }
            let inv = inv_mod(self.get(row, col), p);
            for j in col..c {
                let v = mulmod(self.get(row, j), inv, p);
                self.data[row * c + j] = v;
            }
            let pivot_row: Vec<u32> = self.row(row)[col..].to_vec();
            for i in 0..r {
                if i == row {
                    continue;
                }
                let f = self.get(i, col);
                if f == 0 {
                    continue;
                }
                let m = p - f;
                let dst = &mut self.data[i * c + col..(i + 1) * c];
                for (d, &s) in dst.iter_mut().zip(&pivot_row) {
                    *d = ((*d as u64 + m as u64 * s as u64) % p as u64) as u32;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    /// Basis of `{x : A x = 0}` as columns.
    pub fn kernel(&self) -> FpMatrix {
        let mut m = self.clone();
        let piv = m.rref_in_place();
        let free: Vec<usize> = (0..self.cols).filter(|j| !piv.contains(j)).collect();
        let mut out = FpMatrix::zeros(self.p, self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            out.set(f, k, 1);
            for (i, &pc) in piv.iter().enumerate() {
                let v = m.get(i, f);
                if v != 0 {
                    out.set(pc, k, self.p - v);
                }
            }
        }
        out
    }

    /// Some `X` with `A X = B`, if one exists.
    pub fn solve(&self, b: &FpMatrix) -> Option<FpMatrix> {
        assert_eq!(self.rows, b.rows);
        let mut aug = FpMatrix::hstack(&[self, b]);
        let piv = aug.rref_in_place();
        if piv.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = FpMatrix::zeros(self.p, self.cols, b.cols);
        for (i, &pc) in piv.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, aug.get(i, self.cols + j));
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<FpMatrix> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve(&FpMatrix::identity(self.p, self.rows))?;
        Some(x)
    }

    /// Indices of a maximal independent set of columns, greedily from the left.
    pub fn independent_cols(&self) -> Vec<usize> {
        let mut m = self.clone();
        m.rref_in_place()
    }

    /// Minimal polynomial (monic).
    pub fn min_poly(&self) -> Poly {
        assert_eq!(self.rows, self.cols);
        let p = self.p;
        let n = self.rows;
        // Incremental elimination of I, M, M², … flattened.
        let mut basis: Vec<(usize, Vec<u32>, Vec<u32>)> = Vec::new();
        let mut power = FpMatrix::identity(p, n);
        for k in 0..=n {
            let mut v = power.data.clone();
            let mut comb = vec![0u32; k + 1];
            comb[k] = 1;
            for (pc, bv, bc) in &basis {
                let f = v[*pc];
                if f != 0 {
                    let m = p - f;
                    for (x, &y) in v.iter_mut().zip(bv) {
                        *x = ((*x as u64 + m as u64 * y as u64) % p as u64) as u32;
                    }
                    for (x, &y) in comb.iter_mut().zip(bc) {
                        *x = ((*x as u64 + m as u64 * y as u64) % p as u64) as u32;
                    }
                }
            }
            match v.iter().position(|&x| x != 0) {
                None => return Poly::new(p, comb).monic(),
                Some(pc) => {
                    let inv = inv_mod(v[pc], p);
                    for x in v.iter_mut() {
                        *x = mulmod(*x, inv, p);
                    }
                    for x in comb.iter_mut() {
                        *x = mulmod(*x, inv, p);
                    }
                    for (_, bv, bc) in basis.iter_mut() {
                        let f = bv[pc];
                        if f != 0 {
                            let m = p - f;
                            for (x, &y) in bv.iter_mut().zip(&v) {
                                *x = ((*x as u64 + m as u64 * y as u64) % p as u64) as u32;
                            }
                            bc.resize(comb.len(), 0);
                            for (x, &y) in bc.iter_mut().zip(&comb) {
                                *x = ((*x as u64 + m as u64 * y as u64) % p as u64) as u32;
                            }
                        }
                    }
                    basis.push((pc, v, comb));
                }
            }
            power = power.mul(self);
        }
        unreachable!("Cayley–Hamilton bounds the degree")
    }

    /// `f(M)`.
    pub fn eval_poly(&self, f: &Poly) -> FpMatrix {
        let n = self.rows;
        let mut r = FpMatrix::zeros(self.p, n, n);
        for &c in f.coeffs.iter().rev() {
            r = r.mul(self);
            for i in 0..n {
                let v = (r.get(i, i) + c) % self.p;
                r.set(i, i, v);
            }
        }
        r
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FpMatrix {}x{} mod {}", self.rows, self.cols, self.p)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

/// Polynomial over `F_p`, coefficients lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Poly {
    p: u32,
    coeffs: Vec<u32>,
}

impl Poly {
    pub fn new(p: u32, mut coeffs: Vec<u32>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { p, coeffs }
    }

    pub fn zero(p: u32) -> Self {
        Poly { p, coeffs: vec![] }
    }

    pub fn constant(p: u32, c: u32) -> Self {
        Poly::new(p, vec![c])
    }

    /// `t`.
    pub fn x(p: u32) -> Self {
        Poly::new(p, vec![0, 1])
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn lead(&self) -> u32 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = inv_mod(self.lead(), self.p);
        Poly::new(self.p, self.coeffs.iter().map(|&c| mulmod(c, inv, self.p)).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let c = (0..n)
            .map(|i| (self.coeffs.get(i).copied().unwrap_or(0) + o.coeffs.get(i).copied().unwrap_or(0)) % self.p)
            .collect();
        Poly::new(self.p, c)
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let p = self.p;
        let c = (0..n)
            .map(|i| (self.coeffs.get(i).copied().unwrap_or(0) + p - o.coeffs.get(i).copied().unwrap_or(0)) % p)
            .collect();
        Poly::new(p, c)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(self.p);
        }
        let p = self.p as u64;
        let mut c = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                c[i + j] = (c[i + j] + a as u64 * b as u64) % p;
            }
        }
        Poly::new(self.p, c.into_iter().map(|x| x as u32).collect())
    }

    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let p = self.p;
        let mut r = self.coeffs.clone();
        let dd = d.coeffs.len() - 1;
        if r.len() <= dd {
            return (Poly::zero(p), self.clone());
        }
        let inv = inv_mod(d.lead(), p);
        let mut q = vec![0u32; r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = mulmod(r[k + dd], inv, p);
            q[k] = c;
            if c == 0 {
                continue;
            }
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[k + j] = (r[k + j] + p - mulmod(c, dc, p)) % p;
            }
        }
        r.truncate(dd);
        (Poly::new(p, q), Poly::new(p, r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `(g, s, t)` with `s·self + t·o = g` monic.
    pub fn ext_gcd(&self, o: &Poly) -> (Poly, Poly, Poly) {
        let p = self.p;
        let (mut r0, mut r1) = (self.clone(), o.clone());
        let (mut s0, mut s1) = (Poly::constant(p, 1), Poly::zero(p));
        let (mut t0, mut t1) = (Poly::zero(p), Poly::constant(p, 1));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            r0 = r1;
            r1 = r;
            let s2 = s0.sub(&q.mul(&s1));
            s0 = s1;
            s1 = s2;
            let t2 = t0.sub(&q.mul(&t1));
            t0 = t1;
            t1 = t2;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = Poly::constant(p, inv_mod(r0.lead(), p));
        (r0.mul(&inv), s0.mul(&inv), t0.mul(&inv))
    }

    pub fn powmod(&self, mut e: u128, m: &Poly) -> Poly {
        let mut r = Poly::constant(self.p, 1).rem(m);
        let mut b = self.rem(m);
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b).rem(m);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b).rem(m);
            }
        }
        r
    }

    pub fn derivative(&self) -> Poly {
        let p = self.p;
        let c = self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| mulmod(c, (i as u64 % p as u64) as u32, p)).collect();
        Poly::new(p, c)
    }

    pub fn eval(&self, x: u32) -> u32 {
        self.coeffs.iter().rev().fold(0, |acc, &c| (mulmod(acc, x, self.p) + c) % self.p)
    }

    /// Monic irreducible factors with multiplicities, sorted by (degree, coefficients).
    pub fn factor(&self, rng: &mut impl Rng) -> Vec<(Poly, usize)> {
        let f = self.monic();
        let mut out: Vec<(Poly, usize)> = Vec::new();
        for (sq, mult) in f.squarefree() {
            for (g, d) in sq.distinct_degree() {
                for h in g.equal_degree(d, rng) {
                    out.push((h, mult));
                }
            }
        }
        out.sort_by(|a, b| (a.0.coeffs.len(), &a.0.coeffs).cmp(&(b.0.coeffs.len(), &b.0.coeffs)));
        out
    }

    /// Squarefree decomposition `f = Π g_i^i`.
    fn squarefree(&self) -> Vec<(Poly, usize)> {
        let p = self.p;
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let d = self.derivative();
        if d.is_zero() {
            // f = g(t^p)
            let g = Poly::new(p, self.coeffs.iter().step_by(p as usize).copied().collect());
            for (h, m) in g.squarefree() {
                out.push((h, m * p as usize));
            }
            return out;
        }
        let mut c = self.gcd(&d);
        let mut w = self.divrem(&c).0;
        let mut i = 1;
        while w.degree().unwrap_or(0) > 0 {
            let y = w.gcd(&c);
            let z = w.divrem(&y).0;
            if z.degree().unwrap_or(0) > 0 {
                out.push((z.monic(), i));
            }
            w = y;
            c = c.divrem(&w).0;
            i += 1;
        }
        if c.degree().unwrap_or(0) > 0 {
            let g = Poly::new(p, c.coeffs.iter().step_by(p as usize).copied().collect());
            for (h, m) in g.squarefree() {
                out.push((h, m * p as usize));
            }
        }
        out
    }

    fn distinct_degree(&self) -> Vec<(Poly, usize)> {
        let p = self.p;
        let mut out = Vec::new();
        let mut f = self.monic();
        let x = Poly::x(p);
        let mut h = x.clone();
        let mut d = 1;
        while f.degree().unwrap_or(0) >= 2 * d {
            h = h.powmod(p as u128, &f);
            let g = f.gcd(&h.sub(&x));
            if g.degree().unwrap_or(0) > 0 {
                out.push((g.clone(), d));
                f = f.divrem(&g).0;
                h = h.rem(&f);
            }
            d += 1;
        }
        if let Some(deg) = f.degree() {
            if deg > 0 {
                out.push((f.monic(), deg));
            }
        }
        out
    }

    fn equal_degree(&self, d: usize, rng: &mut impl Rng) -> Vec<Poly> {
        let p = self.p;
        let n = self.degree().unwrap_or(0);
        if n == d {
            return vec![self.monic()];
        }
        loop {
            let a = Poly::new(p, (0..n).map(|_| rng.gen_range(0..p)).collect());
            if a.degree().unwrap_or(0) == 0 {
                continue;
            }
            let g = if p == 2 {
                // trace map a + a² + … + a^{2^{d−1}}
                let mut t = a.rem(self);
                let mut s = t.clone();
                for _ in 1..d {
                    t = t.mul(&t).rem(self);
                    s = s.add(&t);
                }
                s
            } else {
                let e = ((p as u128).pow(d as u32) - 1) / 2;
                a.powmod(e, self).sub(&Poly::constant(p, 1))
            };
            let g = self.gcd(&g);
            let dg = g.degree().unwrap_or(0);
            if dg > 0 && dg < n {
                let mut out = g.equal_degree(d, rng);
                out.extend(self.divrem(&g).0.equal_degree(d, rng));
                return out;
            }
        }
    }

    pub fn is_irreducible(&self, rng: &mut impl Rng) -> bool {
        let f = self.factor(rng);
        f.len() == 1 && f[0].1 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rank_kernel_solve() {
        let a = FpMatrix::from_rows(7, &[vec![1, 2, 3], vec![2, 4, 6]]);
        assert_eq!(a.rank(), 1);
        let k = a.kernel();
        assert_eq!(k.cols(), 2);
        assert!(a.mul(&k).is_zero());
        let b = FpMatrix::from_rows(7, &[vec![1], vec![2]]);
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul(&x), b);
        assert!(a.solve(&FpMatrix::from_rows(7, &[vec![1], vec![0]])).is_none());
    }

    #[test]
    fn min_poly_of_jordan_block() {
        let j = FpMatrix::from_rows(5, &[vec![2, 1, 0], vec![0, 2, 0], vec![0, 0, 2]]);
        // (t − 2)²
        assert_eq!(j.min_poly(), Poly::new(5, vec![4, 1, 1]));
        assert!(j.eval_poly(&j.min_poly()).is_zero());
    }

    #[test]
    fn factor_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for p in [2u32, 3, 101] {
            // (t+1)² (t² + t + 1)?  build and compare product
            let a = Poly::new(p, vec![1, 1]);
            let b = Poly::new(p, vec![1, 0, 1, 1]);
            let f = a.mul(&a).mul(&b).mul(&Poly::new(p, vec![0, 1]));
            let fac = f.factor(&mut rng);
            let mut prod = Poly::constant(p, 1);
            for (g, m) in &fac {
                assert!(g.degree().unwrap() >= 1);
                for _ in 0..*m {
                    prod = prod.mul(g);
                }
            }
            assert_eq!(prod, f.monic(), "p = {p}");
        }
        let g = Poly::new(2, vec![1, 1, 1]);
        assert!(g.is_irreducible(&mut rng));
        assert!(!Poly::new(2, vec![1, 0, 1]).is_irreducible(&mut rng));
    }

    #[test]
    fn ext_gcd_identity() {
        let a = Poly::new(11, vec![1, 2, 3, 4]);
        let b = Poly::new(11, vec![5, 0, 1]);
        let (g, s, t) = a.ext_gcd(&b);
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
    }
}
