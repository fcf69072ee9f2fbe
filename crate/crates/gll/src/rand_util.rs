//! Deterministic randomness: every randomized routine draws from a named
//! stream derived from one base seed, so identical configurations reproduce
//! byte-identical reports.

use crate::arith::Modulus;
use crate::matgroup::MatZq;
use num_bigint::BigUint;
use num_traits::Zero;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Splits one 64-bit seed into independent named substreams.
#[derive(Debug, Clone, Copy)]
pub struct SeedSplitter {
    base: u64,
}

impl SeedSplitter {
    pub fn new(base: u64) -> Self {
        SeedSplitter { base }
    }

    pub fn stream(&self, name: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.base ^ fnv1a(name.as_bytes()))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Uniform residue in `[0, p^e)`.
pub fn random_residue(rng: &mut impl RngCore, modulus: &Modulus) -> BigUint {
    let bytes = (modulus.order().bits() as usize + 7) / 8 + 8;
    let mut buf = vec![0u8; bytes];
    rng.fill_bytes(&mut buf);
    BigUint::from_bytes_le(&buf) % modulus.order()
}

/// Uniform unit in `(Z/p^e)^×` by rejection.
pub fn random_unit(rng: &mut impl RngCore, modulus: &Modulus) -> BigUint {
    loop {
        let r = random_residue(rng, modulus);
        if !(&r % modulus.prime()).is_zero() {
            return r;
        }
    }
}

/// Uniform matrix with entries in `[0, p^e)`.
pub fn random_matrix(rng: &mut impl RngCore, modulus: &Modulus, n: usize) -> MatZq {
    let entries = (0..n * n).map(|_| random_residue(rng, modulus)).collect();
    MatZq::from_entries(n, modulus.clone(), entries)
}

/// Uniform invertible matrix by rejection on the determinant.
pub fn random_invertible(rng: &mut impl RngCore, modulus: &Modulus, n: usize) -> MatZq {
    loop {
        let m = random_matrix(rng, modulus, n);
        if m.is_invertible() {
            return m;
        }
    }
}

/// Matrix congruent to the identity at level `i`, i.e. `I + p^i * A`.
pub fn random_kernel_matrix(rng: &mut impl RngCore, modulus: &Modulus, n: usize, i: u32) -> MatZq {
    let shift = BigUint::from(modulus.prime()).pow(i);
    let mut m = MatZq::identity(n, modulus.clone());
    for r in 0..n {
        for c in 0..n {
            let bump = random_residue(rng, modulus) * &shift;
            let cur = m.entry(r, c).clone();
            m.set_entry(r, c, cur + bump);
        }
    }
    m
}

/// Convenience for ranges that appear all over the test drivers.
pub fn pick<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

/// Rejection-samples an exponent tuple that passes the admissibility test at
/// level `m`, drawing entries from `[1, 3 * period]`.
pub fn random_admissible_tuple(
    rng: &mut impl Rng,
    p: u64,
    n: usize,
    m: u32,
    tries: usize,
) -> Option<crate::spectrum::ExponentTuple> {
    use crate::spectrum::{check_admissible, ExponentTuple};
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    let period = crate::arith::character_period(p, m).to_u64()?;
    for _ in 0..tries {
        let ks: Vec<BigInt> = (0..n)
            .map(|_| BigInt::from(rng.random_range(1..=3 * period as i64)))
            .collect();
        let t = ExponentTuple::raw(p, ks).ok()?;
        if check_admissible(&t, m) {
            return Some(t);
        }
    }
    None
}

/// Smallest level at which admissible tuples exist for `(p, n)`, probed by
/// deterministic sampling. The pairwise-ratio condition needs at least
/// `n^2 - n` distinct nonzero residues mod `p^{m-1}(p-1)`, which rules out
/// small levels for small primes.
pub fn feasible_admissibility_level(p: u64, n: usize) -> Option<u32> {
    use num_traits::ToPrimitive;
    for m in 1..=4u32 {
        let period = crate::arith::character_period(p, m).to_u64()?;
        if period <= (n * n - n) as u64 {
            continue;
        }
        let mut rng = SeedSplitter::new(0).stream("feasible-level");
        if random_admissible_tuple(&mut rng, p, n, m, 400).is_some() {
            return Some(m);
        }
    }
    None
}
