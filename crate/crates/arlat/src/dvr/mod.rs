//! Arithmetic in `O = F_p[[ε]]` at capped absolute precision, and matrices over it.
//!
//! Every element carries its own absolute precision `prec ≤ N`, or the marker
//! [`EXACT`] when it is a polynomial of degree `< N` known exactly. Coefficients
//! at indices `≥ prec` are stored as zero.

mod elim;
mod matrix;

pub use elim::{elementary_divisors, is_unimodular, kernel_basis, saturate, snf, solve, SnfResult, Solve};
pub use matrix::DvrMatrix;

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Precision marker for exactly known polynomials.
pub const EXACT: u16 = u16::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DvrContext {
    p: u32,
    precision: usize,
}

impl DvrContext {
    pub const DEFAULT_PRIME: u32 = 101;

    /// `p` must be prime and small enough that `N·p²` accumulations fit in 32 bits.
    pub fn new(p: u32, precision: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidContext(format!("{p} is not prime")));
        }
        if precision == 0 || precision >= 4096 {
            return Err(Error::InvalidContext(format!("precision {precision} out of range")));
        }
        let bound = (p as u64 - 1) * (p as u64 - 1) * precision as u64 + p as u64;
        if bound >= 1 << 32 {
            return Err(Error::InvalidContext(format!(
                "p = {p} too large for precision {precision}"
            )));
        }
        Ok(DvrContext { p, precision })
    }

    /// `N = max(32, 6n)`.
    pub fn default_precision(n: usize) -> usize {
        32.max(6 * n)
    }

    pub fn for_n(p: u32, n: usize) -> Result<Self> {
        Self::new(p, Self::default_precision(n))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    /// Same prime, different cap.
    pub fn with_precision(&self, precision: usize) -> Result<Self> {
        Self::new(self.p, precision)
    }

    /// Inexact entries that vanish to at least this precision count as zero.
    pub fn zero_floor(&self) -> usize {
        self.precision.div_ceil(2)
    }

    pub(crate) fn fp(&self) -> Fp {
        Fp::new(self.p)
    }

    pub(crate) fn check(&self, other: &DvrContext) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Residue field arithmetic with a Barrett constant for 32-bit accumulators.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Fp {
    pub p: u32,
    m: u64,
}

impl Fp {
    pub fn new(p: u32) -> Self {
        Fp { p, m: (1u64 << 32) / p as u64 }
    }

    #[inline(always)]
    pub fn reduce(&self, x: u32) -> u32 {
        let q = ((x as u64 * self.m) >> 32) as u32;
        let r = x - q * self.p;
        if r >= self.p {
            r - self.p
        } else {
            r
        }
    }

    #[inline(always)]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline(always)]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline(always)]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, mut a: u32, mut e: u64) -> u32 {
        let mut r = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u32) -> u32 {
        debug_assert!(a % self.p != 0);
        self.pow(a, self.p as u64 - 2)
    }

    pub fn from_i64(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }
}

/// ε-adic valuation; `Infinite` sorts after every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(usize),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<usize> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::Infinite
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_u64(*v as u64),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(|x| Valuation::Finite(x as usize))
                .ok_or_else(|| serde::de::Error::custom("bad valuation")),
            serde_json::Value::String(s) if s == "inf" => Ok(Valuation::Infinite),
            _ => Err(serde::de::Error::custom("bad valuation")),
        }
    }
}

/// How an element compares with zero at the available precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroStatus {
    Nonzero(usize),
    Zero,
    /// All known coefficients vanish but precision is below the zero floor.
    Unknown(usize),
}

/// Precision of a product given (prec, lower bound on valuation, degree, exact) of the factors.
pub(crate) fn product_prec(n: usize, a: EntryInfo, b: EntryInfo) -> u16 {
    if a.is_exact_zero() || b.is_exact_zero() {
        return EXACT;
    }
    if a.prec == EXACT && b.prec == EXACT {
        return if (a.deg as usize) + (b.deg as usize) < n {
            EXACT
        } else {
            n as u16
        };
    }
    let pa = if a.prec == EXACT { usize::MAX / 4 } else { a.prec as usize };
    let pb = if b.prec == EXACT { usize::MAX / 4 } else { b.prec as usize };
    let r = n.min(pa + b.vlb as usize).min(pb + a.vlb as usize);
    r as u16
}

pub(crate) fn sum_prec(a: u16, b: u16) -> u16 {
    a.min(b)
}

/// Summary of one stored entry: valuation lower bound, degree, precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct EntryInfo {
    /// First nonzero index, or the precision (resp. `N`) when none is stored.
    pub vlb: u16,
    /// Last nonzero index (0 for zero).
    pub deg: u16,
    pub prec: u16,
    pub nonzero: bool,
}

impl EntryInfo {
    pub fn is_exact_zero(&self) -> bool {
        !self.nonzero && self.prec == EXACT
    }

    pub fn from_coeffs(coeffs: &[u32], prec: u16) -> Self {
        let first = coeffs.iter().position(|&c| c != 0);
        match first {
            Some(v) => {
                let deg = coeffs.iter().rposition(|&c| c != 0).unwrap();
                EntryInfo { vlb: v as u16, deg: deg as u16, prec, nonzero: true }
            }
            None => {
                let vlb = if prec == EXACT { coeffs.len() as u16 } else { prec };
                EntryInfo { vlb, deg: 0, prec, nonzero: false }
            }
        }
    }

    pub fn zero_status(&self, ctx: &DvrContext) -> ZeroStatus {
        if self.nonzero {
            ZeroStatus::Nonzero(self.vlb as usize)
        } else if self.prec == EXACT || self.prec as usize >= ctx.zero_floor() {
            ZeroStatus::Zero
        } else {
            ZeroStatus::Unknown(self.prec as usize)
        }
    }
}

/// A power series `Σ c_j ε^j` truncated at the context precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DvrElement {
    ctx: DvrContext,
    coeffs: Vec<u32>,
    prec: u16,
}

impl DvrElement {
    pub fn zero(ctx: DvrContext) -> Self {
        DvrElement { ctx, coeffs: vec![0; ctx.precision], prec: EXACT }
    }

    pub fn one(ctx: DvrContext) -> Self {
        Self::from_i64(ctx, 1)
    }

    pub fn from_i64(ctx: DvrContext, x: i64) -> Self {
        let mut e = Self::zero(ctx);
        e.coeffs[0] = ctx.fp().from_i64(x);
        e
    }

    /// `c·ε^k`; becomes the zero-to-precision element when `k ≥ N`.
    pub fn monomial(ctx: DvrContext, c: i64, k: usize) -> Self {
        let mut e = Self::zero(ctx);
        if k < ctx.precision {
            e.coeffs[k] = ctx.fp().from_i64(c);
        } else {
            e.prec = ctx.precision as u16;
        }
        e
    }

    pub fn eps_pow(ctx: DvrContext, k: usize) -> Self {
        Self::monomial(ctx, 1, k)
    }

    /// Build from integer coefficients (lowest degree first).
    pub fn from_coeffs(ctx: DvrContext, coeffs: &[i64], exact: bool) -> Self {
        let fp = ctx.fp();
        let n = ctx.precision;
        let mut c = vec![0u32; n];
        let mut overflow = false;
        for (j, &x) in coeffs.iter().enumerate() {
            let r = fp.from_i64(x);
            if j < n {
                c[j] = r;
            } else if r != 0 {
                overflow = true;
            }
        }
        let prec = if exact && !overflow { EXACT } else { n as u16 };
        DvrElement { ctx, coeffs: c, prec }
    }

    pub(crate) fn from_raw(ctx: DvrContext, coeffs: Vec<u32>, prec: u16) -> Self {
        let mut e = DvrElement { ctx, coeffs, prec };
        e.clean();
        e
    }

    fn clean(&mut self) {
        if self.prec != EXACT {
            let p = self.prec as usize;
            for c in self.coeffs.iter_mut().skip(p) {
                *c = 0;
            }
        }
    }

    pub fn context(&self) -> DvrContext {
        self.ctx
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn exact(&self) -> bool {
        self.prec == EXACT
    }

    /// Absolute precision; `None` for exact elements.
    pub fn precision(&self) -> Option<usize> {
        if self.exact() {
            None
        } else {
            Some(self.prec as usize)
        }
    }

    pub(crate) fn raw_prec(&self) -> u16 {
        self.prec
    }

    pub(crate) fn info(&self) -> EntryInfo {
        EntryInfo::from_coeffs(&self.coeffs, self.prec)
    }

    /// Minimum index with a nonzero coefficient, `Infinite` if every stored coefficient vanishes.
    pub fn valuation(&self) -> Valuation {
        match self.coeffs.iter().position(|&c| c != 0) {
            Some(v) => Valuation::Finite(v),
            None => Valuation::Infinite,
        }
    }

    pub fn zero_status(&self) -> ZeroStatus {
        self.info().zero_status(&self.ctx)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_unit(&self) -> bool {
        self.coeffs[0] != 0
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ctx.check(&other.ctx)?;
        let fp = self.ctx.fp();
        let c = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| fp.add(a, b)).collect();
        Ok(Self::from_raw(self.ctx, c, sum_prec(self.prec, other.prec)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let fp = self.ctx.fp();
        DvrElement {
            ctx: self.ctx,
            coeffs: self.coeffs.iter().map(|&a| fp.neg(a)).collect(),
            prec: self.prec,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.ctx.check(&other.ctx)?;
        let n = self.ctx.precision;
        let fp = self.ctx.fp();
        let mut acc = vec![0u64; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs[..n - i].iter().enumerate() {
                acc[i + j] += a as u64 * b as u64;
            }
        }
        let c = acc.iter().map(|&x| (x % fp.p as u64) as u32).collect();
        let prec = product_prec(n, self.info(), other.info());
        Ok(Self::from_raw(self.ctx, c, prec))
    }

    /// Inverse of a unit. Exact when the input is an exact nonzero constant.
    pub fn invert_unit(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NonUnit);
        }
        let n = self.ctx.precision;
        let fp = self.ctx.fp();
        let inv0 = fp.inv(self.coeffs[0]);
        let mut r = vec![0u32; n];
        r[0] = inv0;
        // r_k = -inv0 · Σ_{j=1..k} c_j r_{k-j}
        for k in 1..n {
            let mut s = 0u64;
            for j in 1..=k {
                s += self.coeffs[j] as u64 * r[k - j] as u64;
            }
            let s = (s % fp.p as u64) as u32;
            r[k] = fp.mul(fp.neg(s), inv0);
        }
        let info = self.info();
        let prec = if self.exact() && info.deg == 0 {
            EXACT
        } else if self.exact() {
            n as u16
        } else {
            self.prec
        };
        Ok(Self::from_raw(self.ctx, r, prec))
    }

    /// Divide by `ε^k`; the top `k` coefficients become unknown unless exact.
    pub fn div_eps(&self, k: usize) -> Result<Self> {
        if let Valuation::Finite(v) = self.valuation() {
            if v < k {
                return Err(Error::Range(format!("valuation {v} < {k}")));
            }
        }
        let n = self.ctx.precision;
        let mut c = vec![0u32; n];
        c[..n - k.min(n)].copy_from_slice(&self.coeffs[k.min(n)..]);
        let prec = if self.exact() {
            EXACT
        } else {
            (self.prec as usize).saturating_sub(k) as u16
        };
        Ok(Self::from_raw(self.ctx, c, prec))
    }

    /// Equality of the known coefficients (up to the smaller precision).
    pub fn eq_to_precision(&self, other: &Self) -> bool {
        if self.ctx != other.ctx {
            return false;
        }
        let m = sum_prec(self.prec, other.prec);
        let m = if m == EXACT { self.ctx.precision } else { m as usize };
        self.coeffs[..m] == other.coeffs[..m]
    }

    /// Residue in κ.
    pub fn residue(&self) -> u32 {
        self.coeffs[0]
    }

    /// Truncate to precision `k` (keeps exactness only if nothing is dropped).
    pub fn truncate(&self, k: usize) -> Self {
        let mut e = self.clone();
        let drop = e.coeffs.iter().skip(k).any(|&c| c != 0);
        if drop || !e.exact() {
            let np = if e.exact() { k } else { k.min(e.prec as usize) };
            e.prec = np as u16;
            e.clean();
        }
        e
    }

    /// Re-express in a context with the same prime and another precision.
    pub fn recast(&self, ctx: DvrContext) -> Result<Self> {
        if ctx.p != self.ctx.p {
            return Err(Error::ContextMismatch);
        }
        let n = ctx.precision;
        let mut c = vec![0u32; n];
        let m = n.min(self.coeffs.len());
        c[..m].copy_from_slice(&self.coeffs[..m]);
        let dropped = self.coeffs[m..].iter().any(|&x| x != 0);
        let prec = if self.exact() && !dropped {
            EXACT
        } else if self.exact() {
            n as u16
        } else {
            (self.prec as usize).min(n) as u16
        };
        Ok(Self::from_raw(ctx, c, prec))
    }
}

impl fmt::Display for DvrElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            terms.push(match (j, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "ε".to_string(),
                (1, c) => format!("{c}ε"),
                (j, 1) => format!("ε^{j}"),
                (j, c) => format!("{c}ε^{j}"),
            });
        }
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        if self.exact() {
            write!(f, "{body}")
        } else {
            write!(f, "{body} + O(ε^{})", self.prec)
        }
    }
}

/// JSON form: residues lowest degree first, trailing zeros trimmed, plus the exact flag.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct ElementJson {
    pub coeffs: Vec<u32>,
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prec: Option<usize>,
}

impl DvrElement {
    pub fn to_json(&self) -> ElementJson {
        let last = self.coeffs.iter().rposition(|&c| c != 0).map_or(0, |d| d + 1);
        let prec = match self.prec {
            EXACT => None,
            p if p as usize == self.ctx.precision => None,
            p => Some(p as usize),
        };
        ElementJson { coeffs: self.coeffs[..last].to_vec(), exact: self.exact(), prec }
    }

    pub fn from_json(ctx: DvrContext, j: &ElementJson) -> Result<Self> {
        if j.coeffs.len() > ctx.precision || j.coeffs.iter().any(|&c| c >= ctx.p) {
            return Err(Error::Parse("element does not fit the context".into()));
        }
        let mut c = vec![0u32; ctx.precision];
        c[..j.coeffs.len()].copy_from_slice(&j.coeffs);
        let prec = if j.exact {
            EXACT
        } else {
            j.prec.unwrap_or(ctx.precision).min(ctx.precision) as u16
        };
        Ok(Self::from_raw(ctx, c, prec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> DvrContext {
        DvrContext::new(101, 8).unwrap()
    }

    #[test]
    fn valuation_examples() {
        let c = ctx();
        assert_eq!(DvrElement::eps_pow(c, 3).valuation(), Valuation::Finite(3));
        assert_eq!(DvrElement::from_coeffs(c, &[1, 1], true).valuation(), Valuation::Finite(0));
        assert_eq!(DvrElement::zero(c).valuation(), Valuation::Infinite);
    }

    #[test]
    fn invert_geometric_series() {
        let c = ctx();
        let x = DvrElement::from_coeffs(c, &[1, -1], true);
        let y = x.invert_unit().unwrap();
        assert!(y.coeffs().iter().all(|&v| v == 1));
        assert!(!y.exact());
        let one = x.mul(&y).unwrap();
        assert!(one.eq_to_precision(&DvrElement::one(c)));
        assert_eq!(DvrElement::eps_pow(c, 1).invert_unit(), Err(Error::NonUnit));
        assert!(DvrElement::one(c).invert_unit().unwrap().exact());
        assert!(DvrElement::from_i64(c, -1).invert_unit().unwrap().exact());
    }

    #[test]
    fn mixed_contexts_rejected() {
        let a = DvrElement::one(ctx());
        let b = DvrElement::one(DvrContext::new(2, 8).unwrap());
        assert_eq!(a.add(&b), Err(Error::ContextMismatch));
    }

    #[test]
    fn exact_product_overflowing_cap_becomes_inexact() {
        let c = ctx();
        let a = DvrElement::eps_pow(c, 5);
        let b = DvrElement::from_coeffs(c, &[1, 0, 0, 1], true);
        let ab = a.mul(&b).unwrap();
        assert!(!ab.exact());
        assert_eq!(ab.precision(), Some(8));
        assert_eq!(ab.valuation(), Valuation::Finite(5));
    }

    #[test]
    fn division_by_eps_loses_precision() {
        let c = ctx();
        let a = DvrElement::from_coeffs(c, &[0, 0, 1, 1, 1, 1, 1, 1], false);
        let b = a.div_eps(2).unwrap();
        assert_eq!(b.precision(), Some(6));
        assert_eq!(b.zero_status(), ZeroStatus::Nonzero(0));
    }

    #[test]
    fn json_round_trip() {
        let c = ctx();
        let a = DvrElement::from_coeffs(c, &[3, 0, 7], true);
        let j = a.to_json();
        assert_eq!(j.coeffs, vec![3, 0, 7]);
        assert_eq!(DvrElement::from_json(c, &j).unwrap(), a);
    }

    #[test]
    fn rejects_large_prime_for_precision() {
        assert!(DvrContext::new(65521, 32).is_err());
        assert!(DvrContext::new(4, 32).is_err());
        assert!(DvrContext::new(2, 32).is_ok());
    }
}
