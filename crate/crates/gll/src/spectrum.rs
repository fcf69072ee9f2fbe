//! Parameter profiles, admissible exponent tuples, and the Bernoulli-number
//! certificate machinery for locating a usable odd anchor `k`.
//!
//! The profile fixes the four levels the whole pipeline runs at:
//! `m = 3 + floor(log_p(2^n + 1))`, `M = m(n^2 - n) + 1`, `N = 2M`, `t = 8M`.

use crate::arith::{self, character_period, is_prime, ArithError};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

/// Default size cap for the `O(p^2)` Bernoulli table computations.
pub const DEFAULT_BERNOULLI_CAP: u64 = 10_000;
/// Scale guard for the pointwise admissibility oracle: requires `p^m <= 10^7`.
pub const ORACLE_SCALE_CAP: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectrumError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("anchor k={0} out of range: need odd k with 3 <= k <= (p-1)/2")]
    AnchorOutOfRange(u64),
    #[error("exponent tuple entries must be >= 1")]
    ExponentOutOfRange,
    #[error("exponent k_{index} = {k} does not reduce to the alternating anchor pattern mod p")]
    NotAnchorPattern { index: usize, k: BigInt },
    #[error("oracle scale guard exceeded: p^m = {0} > 10^7")]
    OracleScaleExceeded(u128),
    #[error("Bernoulli table cap exceeded: p = {p} > cap = {cap}")]
    BernoulliCapExceeded { p: u64, cap: u64 },
    #[error("prime {0} is below the supported range for this scan")]
    PrimeTooSmall(u64),
    #[error("dimension n={0} out of range: need 2 <= n <= 16")]
    BadDimension(u32),
    #[error("level m={m} incompatible with M={big_m}")]
    BadLevels { m: u32, big_m: u32 },
}

/// The derived levels `(m, M, N, t)` for a prime `p` and dimension `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamProfile {
    pub p: u64,
    pub n: u32,
    pub m: u32,
    #[serde(rename = "M")]
    pub big_m: u32,
    #[serde(rename = "N")]
    pub big_n: u32,
    pub t: u32,
}

/// Largest `a >= 0` with `base^a <= x`.
fn floor_log(base: u64, x: u64) -> u32 {
    let mut a = 0;
    let mut pow = 1u64;
    while pow <= x / base {
        pow *= base;
        a += 1;
    }
    a
}

/// Computes the canonical profile from the closed-form level formulas.
pub fn compute_profile(p: u64, n: u32) -> Result<ParamProfile, SpectrumError> {
    if !is_prime(p)? || p < 3 {
        return Err(ArithError::NotPrime(p).into());
    }
    if !(2..=16).contains(&n) {
        return Err(SpectrumError::BadDimension(n));
    }
    let m = 3 + floor_log(p, (1u64 << n) + 1);
    let nn = n * n - n;
    let big_m = m * nn + 1;
    let big_n = 2 * big_m;
    let t = 8 * big_m;
    // Closed form from the headline statement must agree with t = 8M.
    debug_assert_eq!(t, 8 * nn * m + 8);
    Ok(ParamProfile { p, n, m, big_m, big_n, t })
}

impl ParamProfile {
    /// A reduced-scale profile with explicit level overrides; `N = 2M` and
    /// `t = 8M` are preserved so the small-extension calculus still applies.
    pub fn with_levels(p: u64, n: u32, m: u32, big_m: u32) -> Result<Self, SpectrumError> {
        if !is_prime(p)? || p < 3 {
            return Err(ArithError::NotPrime(p).into());
        }
        if !(2..=16).contains(&n) {
            return Err(SpectrumError::BadDimension(n));
        }
        if m == 0 || big_m == 0 || m > big_m {
            return Err(SpectrumError::BadLevels { m, big_m });
        }
        Ok(ParamProfile { p, n, m, big_m, big_n: 2 * big_m, t: 8 * big_m })
    }
}

/// The integers `(k_1, ..., k_n)` defining the diagonal characters `χ^{k_i}`.
///
/// When an anchor `k` is attached, every entry satisfies
/// `k_i ≡ ((1 + (-1)^i)/2) * k  (mod p)` — zero at odd positions and `k` at
/// even positions — which is the congruence the level-`N` unipotent witness
/// consumes downstream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentTuple {
    p: u64,
    ks: Vec<BigInt>,
    anchor: Option<u64>,
}

/// `(1 + (-1)^i)/2` for the 1-indexed position `i`: 0 when odd, 1 when even.
pub fn parity_coefficient(i_one_based: usize) -> u64 {
    if i_one_based % 2 == 0 {
        1
    } else {
        0
    }
}

impl ExponentTuple {
    /// The explicit family `k_i = 2^i * p + ε_i` with `ε_i = ((1+(-1)^i)/2) k`.
    pub fn canonical(p: u64, n: u32, k: u64) -> Result<Self, SpectrumError> {
        if !is_prime(p)? {
            return Err(ArithError::NotPrime(p).into());
        }
        if k % 2 == 0 || k < 3 || k > (p - 1) / 2 {
            return Err(SpectrumError::AnchorOutOfRange(k));
        }
        let ks = (1..=n as usize)
            .map(|i| {
                let eps = parity_coefficient(i) * k;
                (BigInt::from(2u64).pow(i as u32)) * BigInt::from(p) + BigInt::from(eps)
            })
            .collect();
        Ok(ExponentTuple { p, ks, anchor: Some(k) })
    }

    /// Arbitrary exponents with an anchor; enforces `k_i >= 1` and the
    /// mod-`p` anchor pattern.
    pub fn with_anchor(p: u64, ks: Vec<BigInt>, k: u64) -> Result<Self, SpectrumError> {
        if !is_prime(p)? {
            return Err(ArithError::NotPrime(p).into());
        }
        for (idx, ki) in ks.iter().enumerate() {
            if ki.sign() != num_bigint::Sign::Plus {
                return Err(SpectrumError::ExponentOutOfRange);
            }
            let want = BigInt::from(parity_coefficient(idx + 1) * k % p);
            if ki % BigInt::from(p) != want {
                return Err(SpectrumError::NotAnchorPattern { index: idx + 1, k: ki.clone() });
            }
        }
        Ok(ExponentTuple { p, ks, anchor: Some(k) })
    }

    /// Unconstrained exponents (positive integers only); used by the random
    /// oracles and the counterexample fixtures.
    pub fn raw(p: u64, ks: Vec<BigInt>) -> Result<Self, SpectrumError> {
        if !is_prime(p)? {
            return Err(ArithError::NotPrime(p).into());
        }
        if ks.iter().any(|k| k.sign() != num_bigint::Sign::Plus) {
            return Err(SpectrumError::ExponentOutOfRange);
        }
        Ok(ExponentTuple { p, ks, anchor: None })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.ks.len()
    }

    pub fn ks(&self) -> &[BigInt] {
        &self.ks
    }

    pub fn exponent(&self, i: usize) -> &BigInt {
        &self.ks[i]
    }

    pub fn anchor(&self) -> Option<u64> {
        self.anchor
    }
}

/// Condition test: all characters distinct at level `m` and all pairwise
/// character ratios distinct at level `m`.
pub fn check_admissible(tuple: &ExponentTuple, m: u32) -> bool {
    let period = BigInt::from(character_period(tuple.p, m));
    let reduce = |k: &BigInt| -> BigInt {
        let mut r = k % &period;
        if r.is_negative() {
            r += &period;
        }
        r
    };
    let mut seen = HashSet::new();
    for k in tuple.ks() {
        if !seen.insert(reduce(k)) {
            return false;
        }
    }
    let n = tuple.n();
    let mut diffs = HashSet::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = reduce(&(&tuple.ks[i] - &tuple.ks[j]));
            if d.is_zero() || !diffs.insert(d) {
                return false;
            }
        }
    }
    true
}

/// Independent admissibility oracle by pointwise character evaluation.
///
/// Evaluates every `χ^{k_i}` and every ratio `χ^{k_i - k_j}` at a generator
/// of `(Z/p^m)^×` and tests distinctness of the resulting values.
pub fn admissibility_oracle(tuple: &ExponentTuple, m: u32) -> Result<bool, SpectrumError> {
    let p = tuple.p;
    let pm = (p as u128).pow(m);
    if pm > ORACLE_SCALE_CAP as u128 {
        return Err(SpectrumError::OracleScaleExceeded(pm));
    }
    let pm = pm as u64;
    let g = lifted_generator(p, m);
    let period = character_period(p, m)
        .to_u64()
        .expect("period fits u64 under the scale guard");
    let eval = |k: &BigInt| -> u64 {
        let mut r = (k % BigInt::from(period)).to_i64().expect("reduced exponent fits");
        if r < 0 {
            r += period as i64;
        }
        arith::pow_mod_u64(g, r as u64, pm)
    };
    let mut values = HashSet::new();
    for k in tuple.ks() {
        if !values.insert(eval(k)) {
            return Ok(false);
        }
    }
    let n = tuple.n();
    let mut ratios = HashSet::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = eval(&(&tuple.ks[i] - &tuple.ks[j]));
            if v == 1 || !ratios.insert(v) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Generator of `(Z/p^m)^×` as a machine word (assumes `p^m` fits u64).
fn lifted_generator(p: u64, m: u32) -> u64 {
    let g = arith::primitive_root_mod_p(p);
    if m == 1 {
        return g;
    }
    let p2 = (p as u128) * (p as u128);
    let mut acc = 1u128;
    let mut base = g as u128 % p2;
    let mut e = p - 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p2;
        }
        base = base * base % p2;
        e >>= 1;
    }
    if acc == 1 {
        g + p
    } else {
        g
    }
}

/// Bernoulli numbers `B_0 .. B_{p-3}` mod `p` by the binomial recurrence
/// `sum_{j<=m} C(m+1, j) B_j ≡ 0`, seeded with `B_1 = -1/2`.
pub fn bernoulli_mod(p: u64) -> Result<Vec<u64>, SpectrumError> {
    bernoulli_mod_capped(p, DEFAULT_BERNOULLI_CAP)
}

pub fn bernoulli_mod_capped(p: u64, cap: u64) -> Result<Vec<u64>, SpectrumError> {
    if p > cap {
        return Err(SpectrumError::BernoulliCapExceeded { p, cap });
    }
    if p < 5 {
        return Err(SpectrumError::PrimeTooSmall(p));
    }
    if !is_prime(p)? {
        return Err(ArithError::NotPrime(p).into());
    }
    let len = (p - 2) as usize; // indices 0 ..= p-3
    let mut b = vec![0u64; len];
    b[0] = 1;
    // Pascal row for C(m+1, j), grown one row at a time.
    let mut binom = vec![1u64, 1];
    for m_idx in 1..len {
        // binom currently holds row m_idx; extend to row m_idx + 1.
        let mut next = vec![1u64; m_idx + 2];
        for j in 1..=m_idx {
            next[j] = (binom[j - 1] + binom[j]) % p;
        }
        binom = next;
        let mut acc = 0u64;
        for j in 0..m_idx {
            acc = (acc + arith::mul_mod_u64(binom[j], b[j], p)) % p;
        }
        let inv = arith::pow_mod_u64(binom[m_idx], p - 2, p); // C(m+1, m) = m+1
        b[m_idx] = arith::mul_mod_u64(p - acc % p, inv, p) % p;
    }
    Ok(b)
}

/// Independent Bernoulli oracle via the Voronoi sum-over-residues congruence
/// `(b^m - 1) B_m / m ≡ b^{m-1} * sum_a a^{m-1} floor(ab/p)  (mod p)`,
/// evaluated at a primitive root `b` so the left factor is always a unit.
pub fn bernoulli_mod_voronoi(p: u64) -> Result<Vec<u64>, SpectrumError> {
    bernoulli_mod_voronoi_capped(p, DEFAULT_BERNOULLI_CAP)
}

pub fn bernoulli_mod_voronoi_capped(p: u64, cap: u64) -> Result<Vec<u64>, SpectrumError> {
    if p > cap {
        return Err(SpectrumError::BernoulliCapExceeded { p, cap });
    }
    if p < 5 {
        return Err(SpectrumError::PrimeTooSmall(p));
    }
    if !is_prime(p)? {
        return Err(ArithError::NotPrime(p).into());
    }
    let len = (p - 2) as usize;
    let mut out = vec![0u64; len];
    out[0] = 1;
    out[1] = arith::mul_mod_u64(p - 1, arith::pow_mod_u64(2, p - 2, p), p); // -1/2
    let b = arith::primitive_root_mod_p(p);
    let floors: Vec<u64> = (0..p)
        .map(|a| ((a as u128 * b as u128) / p as u128 % p as u128) as u64)
        .collect();
    // powers[a] tracks a^{m-1} for the current even index m.
    let mut powers: Vec<u64> = (0..p).collect();
    let mut m = 2u64;
    while m <= p - 3 {
        let mut sum = 0u64;
        for a in 1..p as usize {
            sum = (sum + arith::mul_mod_u64(powers[a], floors[a], p)) % p;
        }
        let bm1 = arith::pow_mod_u64(b, m - 1, p);
        let bm = arith::mul_mod_u64(bm1, b, p);
        let lead = (bm + p - 1) % p;
        let lead_inv = arith::pow_mod_u64(lead, p - 2, p);
        let rhs = arith::mul_mod_u64(bm1, sum, p);
        out[m as usize] = arith::mul_mod_u64(arith::mul_mod_u64(m % p, lead_inv, p), rhs, p);
        // advance a^{m-1} -> a^{m+1}
        for a in 1..p as usize {
            powers[a] = arith::mul_mod_u64(powers[a], arith::mul_mod_u64(a as u64, a as u64, p), p);
        }
        m += 2;
    }
    Ok(out)
}

/// Even indices `a` with `p | B_a`, `2 <= a <= p-3`.
pub fn irregular_indices(table: &[u64]) -> Vec<u32> {
    table
        .iter()
        .enumerate()
        .skip(2)
        .step_by(2)
        .filter(|(_, &v)| v == 0)
        .map(|(a, _)| a as u32)
        .collect()
}

/// Certificate scan output for the class-group vanishing assumption.
///
/// `admissible_ks` lists every odd anchor in `[3, (p-1)/2]` certified by the
/// Bernoulli divisibility test: `p ∤ B_{k+1}` and `p ∤ B_{p-k}`. The test is
/// sufficient, never false-positive; anchors it rejects are merely
/// "uncertified". For `p ≡ 3 (mod 4)` the midpoint anchor `(p-1)/2` is valid
/// unconditionally and is reported in `unconditional_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrregularityReport {
    pub p: u64,
    pub bernoulli_table: Vec<u64>,
    pub irregular_indices: Vec<u32>,
    pub e_upper: u32,
    pub admissible_ks: Vec<u64>,
    pub eigenspace_bound_ok: bool,
    pub unconditional_k: Option<u64>,
}

pub fn scan_assumption_k(p: u64) -> Result<IrregularityReport, SpectrumError> {
    scan_assumption_k_capped(p, DEFAULT_BERNOULLI_CAP)
}

pub fn scan_assumption_k_capped(p: u64, cap: u64) -> Result<IrregularityReport, SpectrumError> {
    if p < 7 {
        return Err(SpectrumError::PrimeTooSmall(p));
    }
    let table = bernoulli_mod_capped(p, cap)?;
    let irregular = irregular_indices(&table);
    let e_upper = irregular.len() as u32;
    let mut admissible_ks = Vec::new();
    let mut k = 3u64;
    while k <= (p - 1) / 2 {
        let first = table[(k + 1) as usize];
        let second = table[(p - k) as usize];
        if first != 0 && second != 0 {
            admissible_ks.push(k);
        }
        k += 2;
    }
    let eigenspace_bound_ok = e_upper < ((p - 2) / 4) as u32;
    let unconditional_k = if p % 4 == 3 { Some((p - 1) / 2) } else { None };
    Ok(IrregularityReport {
        p,
        bernoulli_table: table,
        irregular_indices: irregular,
        e_upper,
        admissible_ks,
        eigenspace_bound_ok,
        unconditional_k,
    })
}

/// The smallest certified anchor, folding in the unconditional midpoint for
/// `p ≡ 3 (mod 4)`.
pub fn smallest_certified_k(report: &IrregularityReport) -> Option<u64> {
    let mut best = report.admissible_ks.first().copied();
    if let Some(osk) = report.unconditional_k {
        best = Some(best.map_or(osk, |b| b.min(osk)));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rand_util::SeedSplitter;
    use rand::Rng;

    #[test]
    fn profile_frozen_values() {
        // Direct integer evaluation: floor(log_7 5) = 0 and floor(log_7 9) = 1.
        let pr = compute_profile(7, 2).unwrap();
        assert_eq!((pr.m, pr.big_m, pr.big_n, pr.t), (3, 7, 14, 56));
        let pr = compute_profile(7, 3).unwrap();
        assert_eq!((pr.m, pr.big_m, pr.big_n, pr.t), (4, 25, 50, 200));
    }

    #[test]
    fn profile_m_is_three_for_large_p() {
        for n in 2..=6u32 {
            let pr = compute_profile(97, n).unwrap();
            if 97 > (1u64 << n) + 1 {
                assert_eq!(pr.m, 3);
            }
        }
        assert_eq!(compute_profile(331, 8).unwrap().m, 3);
    }

    #[test]
    fn profile_identity_over_grid() {
        for p in [7u64, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97] {
            for n in 2..=8u32 {
                let pr = compute_profile(p, n).unwrap();
                assert_eq!(pr.t, 8 * pr.big_m);
                assert_eq!(pr.big_m, pr.m * (n * n - n) + 1);
                assert_eq!(pr.big_n, 2 * pr.big_m);
            }
        }
    }

    #[test]
    fn canonical_exponents_frozen_values() {
        let t = ExponentTuple::canonical(7, 2, 3).unwrap();
        assert_eq!(t.ks(), &[BigInt::from(14), BigInt::from(31)]);
        let t = ExponentTuple::canonical(7, 3, 3).unwrap();
        assert_eq!(t.ks(), &[BigInt::from(14), BigInt::from(31), BigInt::from(56)]);
    }

    #[test]
    fn canonical_exponents_follow_anchor_pattern_mod_p() {
        let t = ExponentTuple::canonical(11, 5, 5).unwrap();
        for (idx, k) in t.ks().iter().enumerate() {
            let want = BigInt::from(parity_coefficient(idx + 1) * 5 % 11);
            assert_eq!(k % BigInt::from(11), want);
        }
        // Round-trips through the validating constructor.
        assert!(ExponentTuple::with_anchor(11, t.ks().to_vec(), 5).is_ok());
    }

    #[test]
    fn anchor_range_is_enforced() {
        assert!(matches!(
            ExponentTuple::canonical(7, 2, 4),
            Err(SpectrumError::AnchorOutOfRange(4))
        ));
        assert!(matches!(
            ExponentTuple::canonical(7, 2, 1),
            Err(SpectrumError::AnchorOutOfRange(1))
        ));
        assert!(matches!(
            ExponentTuple::canonical(7, 2, 5),
            Err(SpectrumError::AnchorOutOfRange(5))
        ));
        assert!(ExponentTuple::canonical(11, 2, 5).is_ok());
    }

    #[test]
    fn admissibility_examples() {
        let t = ExponentTuple::canonical(7, 2, 3).unwrap();
        // 14 ≢ 31 and ±17 distinct mod 294.
        assert!(check_admissible(&t, 3));

        let equal_chars = ExponentTuple::raw(7, vec![BigInt::from(1), BigInt::from(1 + 294)]).unwrap();
        assert!(!check_admissible(&equal_chars, 3));

        let clashing_diffs = ExponentTuple::raw(
            7,
            vec![BigInt::from(1), BigInt::from(2), BigInt::from(4), BigInt::from(5)],
        )
        .unwrap();
        assert!(!check_admissible(&clashing_diffs, 3));
    }

    #[test]
    fn oracle_agrees_on_the_named_examples() {
        let t = ExponentTuple::canonical(7, 2, 3).unwrap();
        assert!(admissibility_oracle(&t, 3).unwrap());
        let f1 = ExponentTuple::raw(7, vec![BigInt::from(1), BigInt::from(295)]).unwrap();
        assert!(!admissibility_oracle(&f1, 3).unwrap());
        let f2 = ExponentTuple::raw(
            7,
            vec![BigInt::from(1), BigInt::from(2), BigInt::from(4), BigInt::from(5)],
        )
        .unwrap();
        assert!(!admissibility_oracle(&f2, 3).unwrap());
    }

    #[test]
    fn oracle_scale_guard() {
        let t = ExponentTuple::raw(11, vec![BigInt::from(1), BigInt::from(2)]).unwrap();
        assert!(matches!(
            admissibility_oracle(&t, 8),
            Err(SpectrumError::OracleScaleExceeded(_))
        ));
    }

    #[test]
    fn oracle_agreement_on_random_tuples() {
        let mut rng = SeedSplitter::new(17).stream("spectrum-oracle-unit");
        let mut checked = 0;
        for _ in 0..300 {
            let p = [5u64, 7, 11][rng.random_range(0..3)];
            let n = rng.random_range(2..=3usize);
            let m = rng.random_range(2..=3u32);
            let period = character_period(p, m).to_u64().unwrap();
            let ks: Vec<BigInt> = (0..n)
                .map(|_| BigInt::from(rng.random_range(1..3 * period as i64)))
                .collect();
            let t = ExponentTuple::raw(p, ks).unwrap();
            assert_eq!(check_admissible(&t, m), admissibility_oracle(&t, m).unwrap());
            checked += 1;
        }
        assert_eq!(checked, 300);
    }

    #[test]
    fn canonical_tuples_admissible_at_profile_level() {
        // Canonical tuples are m-admissible at the profile level.
        for p in [7u64, 11, 13] {
            for n in 2..=4u32 {
                let m = compute_profile(p, n).unwrap().m;
                let mut k = 3;
                while k <= (p - 1) / 2 {
                    let t = ExponentTuple::canonical(p, n, k).unwrap();
                    assert!(check_admissible(&t, m), "p={p} n={n} k={k}");
                    k += 2;
                }
            }
        }
    }

    #[test]
    fn bernoulli_frozen_values() {
        let t7 = bernoulli_mod(7).unwrap();
        // B_2 = 1/6 and 6*6 ≡ 1 mod 7.
        assert_eq!(t7[2], 6);
        assert!(irregular_indices(&t7).is_empty());

        let t37 = bernoulli_mod(37).unwrap();
        assert_eq!(t37[32], 0);
        assert_eq!(irregular_indices(&t37), vec![32]);

        let t691 = bernoulli_mod(691).unwrap();
        assert!(irregular_indices(&t691).contains(&12));
    }

    #[test]
    fn bernoulli_methods_agree_up_to_200() {
        let mut p = 5u64;
        while p <= 200 {
            if is_prime(p).unwrap() {
                assert_eq!(
                    bernoulli_mod(p).unwrap(),
                    bernoulli_mod_voronoi(p).unwrap(),
                    "disagreement at p={p}"
                );
            }
            p += 2;
        }
    }

    #[test]
    fn bernoulli_cap_is_enforced() {
        assert!(matches!(
            bernoulli_mod_capped(10_007, DEFAULT_BERNOULLI_CAP),
            Err(SpectrumError::BernoulliCapExceeded { .. })
        ));
        assert!(bernoulli_mod_capped(10_007, 11_000).is_ok());
    }

    #[test]
    fn scan_frozen_values() {
        let r7 = scan_assumption_k(7).unwrap();
        assert_eq!(r7.admissible_ks, vec![3]);
        assert_eq!(r7.e_upper, 0);
        assert!(r7.eigenspace_bound_ok);
        assert_eq!(r7.unconditional_k, Some(3));

        let r37 = scan_assumption_k(37).unwrap();
        assert_eq!(r37.e_upper, 1);
        assert!(!r37.admissible_ks.contains(&5), "37 | B_32 rules out k=5");
        assert!(r37.admissible_ks.contains(&3));
        assert_eq!(r37.unconditional_k, None);
    }

    #[test]
    fn scan_reports_all_odd_k_for_regular_primes() {
        for p in [7u64, 11, 13, 23] {
            let r = scan_assumption_k(p).unwrap();
            assert!(r.irregular_indices.is_empty());
            let expect: Vec<u64> = (3..=(p - 1) / 2).step_by(2).collect();
            assert_eq!(r.admissible_ks, expect);
            for &k in &r.admissible_ks {
                assert!(k % 2 == 1 && (3..=(p - 1) / 2).contains(&k));
            }
        }
    }
}
