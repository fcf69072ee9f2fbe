//! Exact arithmetic for congruence filtrations of `GL_n` over `Z/p^e`.
//!
//! The crate is organized around the pipeline that its CLI drives end to end:
//!
//! - [`arith`]: residue arithmetic in `Z/p^e` with arbitrary-precision values,
//!   cyclic unit groups and character-power comparison.
//! - [`spectrum`]: parameter profiles `(m, M, N, t)`, admissible exponent
//!   tuples, and Bernoulli-number certificates for irregular primes.
//! - [`matgroup`]: dense matrices over `Z/p^e`, level reduction, the
//!   congruence filtration, and the kernel calculus of small extensions.
//! - [`adjoint`]: the adjoint module of a diagonal representation, its
//!   eigenline decomposition, and group-ring annihilators.
//! - [`galmodel`]: a synthetic free-group model carrying a diagonal
//!   representation, cocycle twists, and the image module of its kernel.
//! - [`generation`]: brute-force subgroup enumeration, the `Φ` filtration,
//!   and bracket-closure generation of `sl_n`.
//! - [`cli`]: the machine-readable verification front end.

pub mod adjoint;
pub mod arith;
pub mod cli;
pub mod galmodel;
pub mod generation;
pub mod matgroup;
pub mod rand_util;
pub mod spectrum;
