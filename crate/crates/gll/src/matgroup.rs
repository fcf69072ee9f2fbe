//! Dense matrices over `Z/p^e`: determinants and invertibility over the
//! local ring, level reduction, the congruence filtration, the `exp/log`
//! bijection between a congruence layer and `M_n(F_p)`, and the kernel
//! calculus of small extensions `Z/p^N -> Z/p^M` with `N <= 2M`.

use crate::arith::{valuation_in, ArithError, ModInt, Modulus};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Dense dimension cap; the constructions here are small-`n` by design.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("dimension {0} out of range: need 2 <= n <= {MAX_DIM}")]
    BadDimension(usize),
    #[error("matrix is not congruent to the identity at level {0}")]
    NotInKernel(u32),
    #[error("levels M={big_m}, N={big_n} do not form a small extension (need M < N <= 2M)")]
    NotSmallExtension { big_m: u32, big_n: u32 },
    #[error("matrix modulus has level {got}, expected {want}")]
    WrongLevel { got: u32, want: u32 },
    #[error("malformed matrix JSON: {0}")]
    BadJson(String),
}

/// An `n x n` matrix over `Z/p^e`, entries stored row-major in `[0, p^e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatZq {
    n: usize,
    modulus: Modulus,
    entries: Vec<BigUint>,
}

impl MatZq {
    pub fn zero(n: usize, modulus: Modulus) -> Self {
        assert!((2..=MAX_DIM).contains(&n), "dimension out of range");
        MatZq {
            n,
            modulus,
            entries: vec![BigUint::zero(); n * n],
        }
    }

    pub fn identity(n: usize, modulus: Modulus) -> Self {
        let mut m = Self::zero(n, modulus);
        for i in 0..n {
            m.entries[i * n + i] = BigUint::one();
        }
        m
    }

    pub fn from_entries(n: usize, modulus: Modulus, entries: Vec<BigUint>) -> Self {
        assert!((2..=MAX_DIM).contains(&n), "dimension out of range");
        assert_eq!(entries.len(), n * n, "entry count mismatch");
        let entries = entries.into_iter().map(|v| v % modulus.order()).collect();
        MatZq { n, modulus, entries }
    }

    pub fn from_i64_entries(n: usize, modulus: Modulus, entries: &[i64]) -> Self {
        let m = modulus.order().clone();
        let vals = entries
            .iter()
            .map(|&v| {
                if v < 0 {
                    (&m - BigUint::from(v.unsigned_abs()) % &m) % &m
                } else {
                    BigUint::from(v as u64) % &m
                }
            })
            .collect();
        Self::from_entries(n, modulus, vals)
    }

    pub fn diagonal(n: usize, modulus: Modulus, diag: &[ModInt]) -> Self {
        assert_eq!(diag.len(), n);
        let mut m = Self::zero(n, modulus.clone());
        for (i, d) in diag.iter().enumerate() {
            assert_eq!(d.modulus(), &modulus);
            m.entries[i * n + i] = d.value().clone();
        }
        m
    }

    /// Elementary matrix `e_{i,j}` (zero-indexed).
    pub fn basis(n: usize, modulus: Modulus, i: usize, j: usize) -> Self {
        let mut m = Self::zero(n, modulus);
        m.entries[i * n + j] = BigUint::one();
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i * self.n + j]
    }

    pub fn entry_mod(&self, i: usize, j: usize) -> ModInt {
        ModInt::new(self.entry(i, j).clone(), self.modulus.clone())
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: BigUint) {
        self.entries[i * self.n + j] = v % self.modulus.order();
    }

    pub fn entries(&self) -> &[BigUint] {
        &self.entries
    }

    fn check_compat(&self, other: &MatZq) {
        assert_eq!(self.n, other.n, "dimension mismatch");
        assert_eq!(self.modulus, other.modulus, "modulus mismatch");
    }

    pub fn add(&self, other: &MatZq) -> MatZq {
        self.check_compat(other);
        let m = self.modulus.order();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a + b) % m)
            .collect();
        MatZq { n: self.n, modulus: self.modulus.clone(), entries }
    }

    pub fn sub(&self, other: &MatZq) -> MatZq {
        self.check_compat(other);
        let m = self.modulus.order();
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| ((m + a) - b) % m)
            .collect();
        MatZq { n: self.n, modulus: self.modulus.clone(), entries }
    }

    pub fn neg(&self) -> MatZq {
        let m = self.modulus.order();
        let entries = self.entries.iter().map(|a| (m - a) % m).collect();
        MatZq { n: self.n, modulus: self.modulus.clone(), entries }
    }

    pub fn mul(&self, other: &MatZq) -> MatZq {
        self.check_compat(other);
        let n = self.n;
        let m = self.modulus.order();
        let mut entries = vec![BigUint::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.entries[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.entries[k * n + j];
                    if b.is_zero() {
                        continue;
                    }
                    entries[i * n + j] += a * b;
                }
            }
        }
        for e in &mut entries {
            *e %= m;
        }
        MatZq { n, modulus: self.modulus.clone(), entries }
    }

    pub fn scalar_mul(&self, s: &BigUint) -> MatZq {
        let m = self.modulus.order();
        let entries = self.entries.iter().map(|a| a * s % m).collect();
        MatZq { n: self.n, modulus: self.modulus.clone(), entries }
    }

    pub fn commutator(&self, other: &MatZq) -> MatZq {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self) -> ModInt {
        let mut t = BigUint::zero();
        for i in 0..self.n {
            t += &self.entries[i * self.n + i];
        }
        ModInt::new(t, self.modulus.clone())
    }

    pub fn is_identity(&self) -> bool {
        *self == MatZq::identity(self.n, self.modulus.clone())
    }

    /// Determinant over `Z/p^e`: elimination with unit pivots, falling back
    /// to cofactor expansion along a column with no unit entry.
    pub fn det(&self) -> ModInt {
        let v = det_rec(&self.entries, self.n, &self.modulus);
        ModInt::new(v, self.modulus.clone())
    }

    pub fn is_invertible(&self) -> bool {
        ModInt::new(self.det().value().clone(), self.modulus.clone()).is_unit()
    }

    /// Inverse by Gauss-Jordan elimination with unit pivots; `None` exactly
    /// when the reduction mod `p` is singular.
    pub fn inverse(&self) -> Option<MatZq> {
        let n = self.n;
        let m = self.modulus.order().clone();
        let p = self.modulus.prime();
        let mut a = self.entries.clone();
        let mut inv = MatZq::identity(n, self.modulus.clone()).entries;
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !(&a[r * n + col] % p).is_zero())?;
            a.swap_chunks(pivot_row, col, n);
            inv.swap_chunks(pivot_row, col, n);
            let pinv = crate::arith::mod_inverse(&a[col * n + col], &m)?;
            for j in 0..n {
                a[col * n + j] = &a[col * n + j] * &pinv % &m;
                inv[col * n + j] = &inv[col * n + j] * &pinv % &m;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let f = a[r * n + col].clone();
                for j in 0..n {
                    let sub_a = &a[col * n + j] * &f % &m;
                    a[r * n + j] = ((&m + &a[r * n + j]) - sub_a) % &m;
                    let sub_i = &inv[col * n + j] * &f % &m;
                    inv[r * n + j] = ((&m + &inv[r * n + j]) - sub_i) % &m;
                }
            }
        }
        Some(MatZq { n, modulus: self.modulus.clone(), entries: inv })
    }

    /// Entrywise reduction to level `i <= e`.
    pub fn reduce(&self, i: u32) -> MatZq {
        assert!(i <= self.modulus.exponent() && i >= 1, "bad reduction level");
        let modulus = self.modulus.at_level(i);
        let entries = self.entries.iter().map(|v| v % modulus.order()).collect();
        MatZq { n: self.n, modulus, entries }
    }

    /// Largest `i <= e` with `self ≡ I (mod p^i)`; 0 when not even congruent
    /// mod `p`.
    pub fn congruence_level(&self) -> u32 {
        let e = self.modulus.exponent();
        let p = self.modulus.prime();
        let id = MatZq::identity(self.n, self.modulus.clone());
        let diff = self.sub(&id);
        diff.entries
            .iter()
            .map(|v| valuation_in(v, p, e))
            .min()
            .unwrap_or(e)
    }

    pub fn to_json(&self) -> MatJson {
        MatJson {
            p: self.modulus.prime(),
            e: self.modulus.exponent(),
            n: self.n,
            rows: (0..self.n)
                .map(|i| (0..self.n).map(|j| self.entry(i, j).to_string()).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &MatJson) -> Result<MatZq, MatError> {
        let modulus = Modulus::new(json.p, json.e)?;
        if !(2..=MAX_DIM).contains(&json.n) {
            return Err(MatError::BadDimension(json.n));
        }
        if json.rows.len() != json.n || json.rows.iter().any(|r| r.len() != json.n) {
            return Err(MatError::BadJson("row shape mismatch".into()));
        }
        let mut entries = Vec::with_capacity(json.n * json.n);
        for row in &json.rows {
            for s in row {
                let v = s
                    .parse::<BigUint>()
                    .map_err(|_| MatError::BadJson(format!("bad entry {s:?}")))?;
                entries.push(v);
            }
        }
        Ok(MatZq::from_entries(json.n, modulus, entries))
    }
}

trait SwapChunks {
    fn swap_chunks(&mut self, r1: usize, r2: usize, width: usize);
}

impl SwapChunks for Vec<BigUint> {
    fn swap_chunks(&mut self, r1: usize, r2: usize, width: usize) {
        if r1 == r2 {
            return;
        }
        for j in 0..width {
            self.swap(r1 * width + j, r2 * width + j);
        }
    }
}

fn det_rec(entries: &[BigUint], n: usize, modulus: &Modulus) -> BigUint {
    if n == 1 {
        return entries[0].clone();
    }
    let m = modulus.order();
    let p = modulus.prime();
    // Unit pivot in the first column?
    if let Some(r) = (0..n).find(|&r| !(&entries[r * n] % p).is_zero()) {
        let mut a = entries.to_vec();
        let mut sign_flip = false;
        if r != 0 {
            a.swap_chunks(r, 0, n);
            sign_flip = true;
        }
        let pivot = a[0].clone();
        let pinv = crate::arith::mod_inverse(&pivot, m).expect("pivot is a unit");
        for row in 1..n {
            if a[row * n].is_zero() {
                continue;
            }
            let f = &a[row * n] * &pinv % m;
            for j in 0..n {
                let sub = &a[j] * &f % m;
                a[row * n + j] = ((m + &a[row * n + j]) - sub) % m;
            }
        }
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for row in 1..n {
            for j in 1..n {
                minor.push(a[row * n + j].clone());
            }
        }
        let d = det_rec(&minor, n - 1, modulus) * pivot % m;
        return if sign_flip { (m - &d) % m } else { d };
    }
    // Cofactor expansion along the unit-free first column.
    let mut acc = BigUint::zero();
    for r in 0..n {
        if entries[r * n].is_zero() {
            continue;
        }
        let mut minor = Vec::with_capacity((n - 1) * (n - 1));
        for row in (0..n).filter(|&row| row != r) {
            for j in 1..n {
                minor.push(entries[row * n + j].clone());
            }
        }
        let term = det_rec(&minor, n - 1, modulus) * &entries[r * n] % m;
        if r % 2 == 0 {
            acc = (acc + term) % m;
        } else {
            acc = ((m + acc) - term) % m;
        }
    }
    acc
}

/// Wire format for matrices: decimal strings for arbitrary precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatJson {
    pub p: u64,
    pub e: u32,
    pub n: usize,
    pub rows: Vec<Vec<String>>,
}

/// An `n x n` matrix over `F_p` with machine-word entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatFp {
    n: usize,
    p: u64,
    entries: Vec<u64>,
}

impl MatFp {
    pub fn zero(n: usize, p: u64) -> Self {
        MatFp { n, p, entries: vec![0; n * n] }
    }

    pub fn identity(n: usize, p: u64) -> Self {
        let mut m = Self::zero(n, p);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn basis(n: usize, p: u64, i: usize, j: usize) -> Self {
        let mut m = Self::zero(n, p);
        m.entries[i * n + j] = 1;
        m
    }

    pub fn from_entries(n: usize, p: u64, entries: Vec<u64>) -> Self {
        assert_eq!(entries.len(), n * n);
        let entries = entries.into_iter().map(|v| v % p).collect();
        MatFp { n, p, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.entries[i * self.n + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, v: u64) {
        self.entries[i * self.n + j] = v % self.p;
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&v| v == 0)
    }

    fn check_compat(&self, other: &MatFp) {
        assert_eq!(self.n, other.n, "dimension mismatch");
        assert_eq!(self.p, other.p, "prime mismatch");
    }

    pub fn add(&self, other: &MatFp) -> MatFp {
        self.check_compat(other);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a + b) % self.p)
            .collect();
        MatFp { n: self.n, p: self.p, entries }
    }

    pub fn sub(&self, other: &MatFp) -> MatFp {
        self.check_compat(other);
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a + self.p - b) % self.p)
            .collect();
        MatFp { n: self.n, p: self.p, entries }
    }

    pub fn neg(&self) -> MatFp {
        let entries = self.entries.iter().map(|a| (self.p - a) % self.p).collect();
        MatFp { n: self.n, p: self.p, entries }
    }

    pub fn scalar_mul(&self, s: u64) -> MatFp {
        let s = s % self.p;
        let entries = self
            .entries
            .iter()
            .map(|a| (*a as u128 * s as u128 % self.p as u128) as u64)
            .collect();
        MatFp { n: self.n, p: self.p, entries }
    }

    pub fn mul(&self, other: &MatFp) -> MatFp {
        self.check_compat(other);
        let n = self.n;
        let mut entries = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let prod = (a as u128 * other.entries[k * n + j] as u128
                        + entries[i * n + j] as u128)
                        % self.p as u128;
                    entries[i * n + j] = prod as u64;
                }
            }
        }
        MatFp { n, p: self.p, entries }
    }

    /// Lie bracket `[X, Y] = XY - YX`.
    pub fn bracket(&self, other: &MatFp) -> MatFp {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn trace(&self) -> u64 {
        let mut t = 0u64;
        for i in 0..self.n {
            t = (t + self.entries[i * self.n + i]) % self.p;
        }
        t
    }
}

impl fmt::Display for MatFp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            writeln!(f, "{:?}", &self.entries[i * self.n..(i + 1) * self.n])?;
        }
        Ok(())
    }
}

/// `exp_m`: lifts `A` over `F_p` to `I + p^m A` in `GL_n(Z/p^{m+1})`.
///
/// This is a bijection from `M_n(F_p)` onto the kernel of the level drop
/// `GL_n(Z/p^{m+1}) -> GL_n(Z/p^m)` and turns addition into multiplication.
pub fn exp_level(a: &MatFp, m: u32) -> Result<MatZq, MatError> {
    let modulus = Modulus::new(a.p(), m + 1)?;
    let shift = BigUint::from(a.p()).pow(m);
    let mut out = MatZq::identity(a.n(), modulus);
    for i in 0..a.n() {
        for j in 0..a.n() {
            if a.entry(i, j) != 0 {
                let cur = out.entry(i, j).clone();
                out.set_entry(i, j, cur + BigUint::from(a.entry(i, j)) * &shift);
            }
        }
    }
    Ok(out)
}

/// `log_m`: the inverse of [`exp_level`] on the level-`m` congruence layer.
///
/// The input is read at level `m + 1` (higher levels are reduced first); it
/// must be congruent to `I` mod `p^m`. The result may be zero when the input
/// sits even deeper in the filtration, which is intentional: the layer map
/// keys on the declared `m`, not the intrinsic level.
pub fn log_level(x: &MatZq, m: u32) -> Result<MatFp, MatError> {
    let e = x.modulus().exponent();
    if e < m + 1 {
        return Err(MatError::WrongLevel { got: e, want: m + 1 });
    }
    let x = if e > m + 1 { x.reduce(m + 1) } else { x.clone() };
    let p = x.modulus().prime();
    if x.congruence_level() < m {
        return Err(MatError::NotInKernel(m));
    }
    let shift = BigUint::from(p).pow(m);
    let id = MatZq::identity(x.n(), x.modulus().clone());
    let diff = x.sub(&id);
    let mut out = MatFp::zero(x.n(), p);
    for i in 0..x.n() {
        for j in 0..x.n() {
            let q = diff.entry(i, j) / &shift;
            out.set_entry(i, j, (q % p).try_into().expect("residue fits u64"));
        }
    }
    Ok(out)
}

/// The surjection `Z/p^N -> Z/p^M` with square-zero principal kernel,
/// requiring `M < N <= 2M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmallExtension {
    big_m: u32,
    big_n: u32,
}

impl SmallExtension {
    pub fn new(big_m: u32, big_n: u32) -> Result<Self, MatError> {
        if big_m == 0 || big_n <= big_m || big_n > 2 * big_m {
            return Err(MatError::NotSmallExtension { big_m, big_n });
        }
        Ok(SmallExtension { big_m, big_n })
    }

    pub fn target_level(&self) -> u32 {
        self.big_m
    }

    pub fn source_level(&self) -> u32 {
        self.big_n
    }

    /// Kernel width: the quotient ring `Z/p^{N-M}` the kernel is a module over.
    pub fn kernel_level(&self) -> u32 {
        self.big_n - self.big_m
    }

    /// Identifies `A` over `Z/p^{N-M}` with `I + p^M A` in the kernel of
    /// `GL_n(Z/p^N) -> GL_n(Z/p^M)`; additive in `A` and independent of the
    /// choice of lift.
    pub fn kernel_embed(&self, a: &MatZq) -> Result<MatZq, MatError> {
        if a.modulus().exponent() != self.kernel_level() {
            return Err(MatError::WrongLevel {
                got: a.modulus().exponent(),
                want: self.kernel_level(),
            });
        }
        let modulus = Modulus::new(a.modulus().prime(), self.big_n)?;
        let shift = BigUint::from(a.modulus().prime()).pow(self.big_m);
        let mut out = MatZq::identity(a.n(), modulus);
        for i in 0..a.n() {
            for j in 0..a.n() {
                let cur = out.entry(i, j).clone();
                out.set_entry(i, j, cur + a.entry(i, j) * &shift);
            }
        }
        Ok(out)
    }

    /// Inverse of [`Self::kernel_embed`] on matrices `≡ I (mod p^M)`.
    pub fn kernel_log(&self, x: &MatZq) -> Result<MatZq, MatError> {
        if x.modulus().exponent() != self.big_n {
            return Err(MatError::WrongLevel { got: x.modulus().exponent(), want: self.big_n });
        }
        if x.congruence_level() < self.big_m {
            return Err(MatError::NotInKernel(self.big_m));
        }
        let p = x.modulus().prime();
        let modulus = Modulus::new(p, self.kernel_level())?;
        let shift = BigUint::from(p).pow(self.big_m);
        let id = MatZq::identity(x.n(), x.modulus().clone());
        let diff = x.sub(&id);
        let mut out = MatZq::zero(x.n(), modulus);
        for i in 0..x.n() {
            for j in 0..x.n() {
                out.set_entry(i, j, diff.entry(i, j) / &shift);
            }
        }
        Ok(out)
    }
}
