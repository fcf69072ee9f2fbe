//! Residue arithmetic in `Z/p^e` for an odd prime `p` and arbitrary level `e`.
//!
//! Values are arbitrary-precision naturals in `[0, p^e)`; `p` itself is kept
//! as a machine word because primality is only certified deterministically
//! below [`MAX_PRIME`]. All downstream modules route their ring arithmetic
//! through [`ModInt`].

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

/// Largest prime accepted by the deterministic Miller-Rabin bases used here.
///
/// The base set {2, 3, 5, 7, 11, 13, 17} is a correct primality certificate
/// for every integer below 3.4e14; we stay under that with a round bound.
pub const MAX_PRIME: u64 = 330_000_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds the deterministic primality bound {MAX_PRIME}")]
    PrimeTooLarge(u64),
    #[error("even prime 2 is not supported")]
    EvenPrime,
    #[error("modulus exponent must be at least 1")]
    ZeroExponent,
    #[error("value is divisible by p, no inverse exists")]
    NonUnit,
    #[error("operands have different moduli")]
    ModulusMismatch,
}

/// The ring descriptor `Z/p^e` for an odd prime `p` and exponent `e >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modulus {
    p: u64,
    e: u32,
    pe: BigUint,
}

impl Modulus {
    /// Builds `Z/p^e`, certifying that `p` is an odd prime.
    pub fn new(p: u64, e: u32) -> Result<Self, ArithError> {
        if p == 2 {
            return Err(ArithError::EvenPrime);
        }
        if !is_prime(p)? {
            return Err(ArithError::NotPrime(p));
        }
        if e == 0 {
            return Err(ArithError::ZeroExponent);
        }
        let pe = BigUint::from(p).pow(e);
        Ok(Modulus { p, e, pe })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn exponent(&self) -> u32 {
        self.e
    }

    /// The ring order `p^e`.
    pub fn order(&self) -> &BigUint {
        &self.pe
    }

    /// Order of the unit group, `p^(e-1) * (p - 1)`.
    pub fn unit_group_order(&self) -> BigUint {
        BigUint::from(self.p).pow(self.e - 1) * BigUint::from(self.p - 1)
    }

    /// The same prime at a (usually lower) level `i`.
    pub fn at_level(&self, i: u32) -> Modulus {
        assert!(i >= 1, "level must be at least 1");
        Modulus {
            p: self.p,
            e: i,
            pe: BigUint::from(self.p).pow(i),
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.e)
    }
}

/// A residue in `Z/p^e`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModInt {
    value: BigUint,
    modulus: Modulus,
}

impl ModInt {
    pub fn new(value: BigUint, modulus: Modulus) -> Self {
        let value = value % modulus.order();
        ModInt { value, modulus }
    }

    pub fn from_u64(value: u64, modulus: Modulus) -> Self {
        Self::new(BigUint::from(value), modulus)
    }

    /// Canonical representative of a signed integer.
    pub fn from_bigint(value: &BigInt, modulus: Modulus) -> Self {
        let m = BigInt::from(modulus.order().clone());
        let mut r = value % &m;
        if r.is_negative() {
            r += &m;
        }
        Self::new(r.to_biguint().expect("non-negative after reduction"), modulus)
    }

    pub fn zero(modulus: Modulus) -> Self {
        Self::new(BigUint::zero(), modulus)
    }

    pub fn one(modulus: Modulus) -> Self {
        Self::new(BigUint::one(), modulus)
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        !(&self.value % self.modulus.p).is_zero()
    }

    fn check_same(&self, other: &ModInt) {
        assert_eq!(
            self.modulus, other.modulus,
            "mixed moduli: {} vs {}",
            self.modulus, other.modulus
        );
    }

    pub fn add(&self, other: &ModInt) -> ModInt {
        self.check_same(other);
        ModInt::new(&self.value + &other.value, self.modulus.clone())
    }

    pub fn sub(&self, other: &ModInt) -> ModInt {
        self.check_same(other);
        let m = self.modulus.order();
        ModInt {
            value: ((m + &self.value) - &other.value) % m,
            modulus: self.modulus.clone(),
        }
    }

    pub fn mul(&self, other: &ModInt) -> ModInt {
        self.check_same(other);
        ModInt::new(&self.value * &other.value, self.modulus.clone())
    }

    pub fn neg(&self) -> ModInt {
        ModInt::new(self.modulus.order() - &self.value % self.modulus.order(), self.modulus.clone())
    }

    /// Multiplicative inverse; fails on multiples of `p`.
    pub fn inverse(&self) -> Result<ModInt, ArithError> {
        let inv = mod_inverse(&self.value, self.modulus.order()).ok_or(ArithError::NonUnit)?;
        Ok(ModInt {
            value: inv,
            modulus: self.modulus.clone(),
        })
    }

    /// `self^k` for a signed arbitrary-precision exponent.
    ///
    /// Negative exponents invert first and therefore require a unit base.
    pub fn pow(&self, k: &BigInt) -> Result<ModInt, ArithError> {
        if k.is_negative() {
            let inv = self.inverse()?;
            let mag = k.magnitude();
            Ok(ModInt {
                value: inv.value.modpow(mag, self.modulus.order()),
                modulus: self.modulus.clone(),
            })
        } else {
            Ok(ModInt {
                value: self.value.modpow(k.magnitude(), self.modulus.order()),
                modulus: self.modulus.clone(),
            })
        }
    }

    pub fn pow_u64(&self, k: u64) -> ModInt {
        ModInt {
            value: self.value.modpow(&BigUint::from(k), self.modulus.order()),
            modulus: self.modulus.clone(),
        }
    }

    /// `min(v_p(value), e)`; zero has valuation `e` by convention.
    pub fn valuation(&self) -> u32 {
        valuation_in(&self.value, self.modulus.p, self.modulus.e)
    }

    /// The same residue reduced to level `i <= e`.
    pub fn reduce(&self, i: u32) -> ModInt {
        assert!(i <= self.modulus.e, "cannot reduce to a higher level");
        let m = self.modulus.at_level(i);
        ModInt {
            value: &self.value % m.order(),
            modulus: m,
        }
    }
}

impl fmt::Display for ModInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.value, self.modulus)
    }
}

/// v_p of a natural number, capped at `cap`; zero maps to `cap`.
pub fn valuation_in(value: &BigUint, p: u64, cap: u32) -> u32 {
    if value.is_zero() {
        return cap;
    }
    let p = BigUint::from(p);
    let mut v = 0;
    let mut rest = value.clone();
    while v < cap {
        let (q, r) = rest.div_rem(&p);
        if !r.is_zero() {
            break;
        }
        rest = q;
        v += 1;
    }
    v
}

/// Modular inverse by extended Euclid; `None` when gcd(a, m) != 1.
pub fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m_int = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m_int);
    if !ext.gcd.is_one() {
        return None;
    }
    let mut x = ext.x % &m_int;
    if x.is_negative() {
        x += &m_int;
    }
    x.to_biguint()
}

/// An integer exponent `k` standing for the character `χ^k` at level `e`.
///
/// Two exponents define the same character at level `m` exactly when they
/// agree modulo `p^(m-1) * (p-1)`, the order of the level-`m` unit group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharExponent {
    pub k: BigInt,
    pub p: u64,
    pub level: u32,
}

impl CharExponent {
    pub fn new(k: BigInt, p: u64, level: u32) -> Self {
        CharExponent { k, p, level }
    }

    /// Pointwise equality of `χ^a` and `χ^b` on the level-`m` unit group.
    pub fn equal_at_level(&self, other: &CharExponent, m: u32) -> bool {
        assert_eq!(self.p, other.p, "mixed primes");
        assert!(m >= 1 && m <= self.level.min(other.level));
        let period = BigInt::from(character_period(self.p, m));
        ((&self.k - &other.k) % period).is_zero()
    }
}

/// The order `p^(m-1) * (p-1)` of `(Z/p^m)^×`.
pub fn character_period(p: u64, m: u32) -> BigUint {
    BigUint::from(p).pow(m - 1) * BigUint::from(p - 1)
}

/// Deterministic primality test for `n < MAX_PRIME`.
pub fn is_prime(n: u64) -> Result<bool, ArithError> {
    if n >= MAX_PRIME {
        return Err(ArithError::PrimeTooLarge(n));
    }
    if n < 2 {
        return Ok(false);
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n == q {
            return Ok(true);
        }
        if n % q == 0 {
            return Ok(false);
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

pub fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut res = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            res = mul_mod_u64(res, a, m);
        }
        a = mul_mod_u64(a, a, m);
        e >>= 1;
    }
    res
}

fn factor_u64(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest generator of `(Z/p)^×`.
pub fn primitive_root_mod_p(p: u64) -> u64 {
    let order = p - 1;
    let prime_factors = factor_u64(order);
    'candidate: for g in 2..p {
        for q in &prime_factors {
            if pow_mod_u64(g, order / q, p) == 1 {
                continue 'candidate;
            }
        }
        return g;
    }
    unreachable!("every odd prime has a primitive root");
}

/// Deterministic generator of the cyclic group `(Z/p^e)^×`.
///
/// Takes the smallest primitive root `g` mod `p` and lifts it; when
/// `g^(p-1) ≡ 1 mod p^2` the adjusted witness `g + p` is used instead, which
/// then has maximal order at every level.
pub fn primitive_root(modulus: &Modulus) -> ModInt {
    let p = modulus.p;
    let g = primitive_root_mod_p(p);
    if modulus.e == 1 {
        return ModInt::from_u64(g, modulus.clone());
    }
    let p2 = BigUint::from(p) * BigUint::from(p);
    let lifted = BigUint::from(g).modpow(&BigUint::from(p - 1), &p2);
    let g = if lifted.is_one() { g + p } else { g };
    ModInt::from_u64(g, modulus.clone())
}
