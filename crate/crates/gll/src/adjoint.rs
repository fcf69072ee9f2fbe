//! The adjoint module of a diagonal representation at level `M`.
//!
//! For exponents `(k_1, ..., k_n)` the module `M_n(Z/p^M)` splits into the
//! diagonal torus (trivial action) and the lines `Z/p^M * e_{i,j}` on which a
//! unit `u` acts by `u^{k_i - k_j}`. Group-ring elements of the form
//! `γ(g) - g` act diagonally on that decomposition, which is what the
//! annihilator chains below exploit: they crush every component except a
//! chosen line (or the torus) while controlling the `p`-valuation of the
//! surviving scalar.

use crate::arith::{primitive_root, ArithError, ModInt, Modulus};
use crate::matgroup::{MatFp, MatZq};
use crate::spectrum::ExponentTuple;
use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdjointError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("element does not act as a unit")]
    NonUnit,
    #[error("operands belong to different adjoint contexts")]
    ContextMismatch,
    #[error("no witness unit exists at level {0}: the exponents are not admissible there")]
    NoWitness(u32),
    #[error("exponents are not admissible at level {0}")]
    NotAdmissible(u32),
    #[error("line index ({0}, {1}) out of range or on the diagonal")]
    BadLine(usize, usize),
}

/// One eigencomponent of the adjoint decomposition: the torus or a line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Torus,
    /// Off-diagonal line `e_{i,j}`, zero-indexed, `i != j`.
    Line(usize, usize),
}

/// A group-ring annihilator `γ_ref(u) - u` evaluated on the decomposition.
///
/// A line-kill for `(s, t)` scales the `(k, l)` component by
/// `γ_{s,t}(u) - γ_{k,l}(u)` and therefore zeroes the `(s, t)` line; a
/// torus-kill scales by `1 - γ_{k,l}(u)` and zeroes the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRingOp {
    pub kind: OpKind,
    pub witness: ModInt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    LineKill(usize, usize),
    TorusKill,
}

impl GroupRingOp {
    fn reference(&self) -> Component {
        match self.kind {
            OpKind::LineKill(s, t) => Component::Line(s, t),
            OpKind::TorusKill => Component::Torus,
        }
    }
}

/// Exact decomposition of an adjoint element into torus and line parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub torus: Vec<BigUint>,
    pub lines: Vec<((usize, usize), BigUint)>,
}

/// The adjoint module `M_n(Z/p^M)` attached to an exponent tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjointModule {
    exponents: ExponentTuple,
    modulus: Modulus,
}

impl AdjointModule {
    pub fn new(exponents: ExponentTuple, level: u32) -> Result<Self, AdjointError> {
        let modulus = Modulus::new(exponents.p(), level)?;
        Ok(AdjointModule { exponents, modulus })
    }

    pub fn n(&self) -> usize {
        self.exponents.n()
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn exponents(&self) -> &ExponentTuple {
        &self.exponents
    }

    pub fn zero(&self) -> MatZq {
        MatZq::zero(self.n(), self.modulus.clone())
    }

    pub fn line(&self, i: usize, j: usize) -> MatZq {
        MatZq::basis(self.n(), self.modulus.clone(), i, j)
    }

    fn check_element(&self, x: &MatZq) -> Result<(), AdjointError> {
        if x.n() != self.n() || x.modulus() != &self.modulus {
            return Err(AdjointError::ContextMismatch);
        }
        Ok(())
    }

    /// The exponent difference `k_i - k_j` (zero-indexed arguments).
    fn line_exponent(&self, i: usize, j: usize) -> BigInt {
        self.exponents.exponent(i) - self.exponents.exponent(j)
    }

    /// `γ_c(u)`: the character of component `c` evaluated at the unit `u`.
    pub fn char_value(&self, c: Component, u: &ModInt) -> Result<ModInt, AdjointError> {
        match c {
            Component::Torus => Ok(ModInt::one(self.modulus.clone())),
            Component::Line(i, j) => {
                if i == j || i >= self.n() || j >= self.n() {
                    return Err(AdjointError::BadLine(i, j));
                }
                u.pow(&self.line_exponent(i, j)).map_err(|_| AdjointError::NonUnit)
            }
        }
    }

    /// The Galois action of a unit `u`: fixes the torus and scales the
    /// `(i, j)` line by `u^{k_i - k_j}`. Agrees with conjugation by
    /// `diag(u^{k_1}, ..., u^{k_n})`.
    pub fn galois_act(&self, u: &ModInt, x: &MatZq) -> Result<MatZq, AdjointError> {
        self.check_element(x)?;
        if !u.is_unit() {
            return Err(AdjointError::NonUnit);
        }
        let n = self.n();
        // u^{k_i} for each row index; line factors are ratios.
        let powers: Vec<ModInt> = (0..n)
            .map(|i| u.pow(self.exponents.exponent(i)))
            .collect::<Result<_, _>>()
            .map_err(|_: ArithError| AdjointError::NonUnit)?;
        let inv_powers: Vec<ModInt> = powers
            .iter()
            .map(|v| v.inverse())
            .collect::<Result<_, _>>()
            .map_err(|_: ArithError| AdjointError::NonUnit)?;
        let mut out = x.clone();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let factor = powers[i].mul(&inv_powers[j]);
                out.set_entry(i, j, x.entry(i, j) * factor.value());
            }
        }
        Ok(out)
    }

    pub fn decompose(&self, x: &MatZq) -> Result<Decomposition, AdjointError> {
        self.check_element(x)?;
        let n = self.n();
        let torus = (0..n).map(|i| x.entry(i, i).clone()).collect();
        let mut lines = Vec::with_capacity(n * n - n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    lines.push(((i, j), x.entry(i, j).clone()));
                }
            }
        }
        Ok(Decomposition { torus, lines })
    }

    pub fn reassemble(&self, d: &Decomposition) -> MatZq {
        let mut out = self.zero();
        for (i, v) in d.torus.iter().enumerate() {
            out.set_entry(i, i, v.clone());
        }
        for ((i, j), v) in &d.lines {
            out.set_entry(*i, *j, v.clone());
        }
        out
    }

    /// The alternating diagonal `μ = diag(0, 1, 0, 1, ...)` at level `M`.
    pub fn mu(&self) -> MatZq {
        let mut out = self.zero();
        for (i, a) in mu_pattern(self.n()).iter().enumerate() {
            out.set_entry(i, i, BigUint::from(*a));
        }
        out
    }

    /// Applies one group-ring annihilator to an element.
    pub fn apply_op(&self, op: &GroupRingOp, x: &MatZq) -> Result<MatZq, AdjointError> {
        self.check_element(x)?;
        let factors = self.op_factors(op)?;
        let n = self.n();
        let mut out = self.zero();
        for i in 0..n {
            for j in 0..n {
                out.set_entry(i, j, x.entry(i, j) * factors[i * n + j].value());
            }
        }
        Ok(out)
    }

    /// Componentwise scalars of an annihilator: `γ_ref(u) - γ_{k,l}(u)`.
    fn op_factors(&self, op: &GroupRingOp) -> Result<Vec<ModInt>, AdjointError> {
        let n = self.n();
        let reference = self.char_value(op.reference(), &op.witness)?;
        let mut out = Vec::with_capacity(n * n);
        for k in 0..n {
            for l in 0..n {
                let c = if k == l { Component::Torus } else { Component::Line(k, l) };
                let gamma = self.char_value(c, &op.witness)?;
                out.push(reference.sub(&gamma));
            }
        }
        Ok(out)
    }

    /// Finds a unit `u` with `v_p(γ_target(u) - γ_other(u)) < m`, searching
    /// powers of the fixed primitive root in order. Fails with `NoWitness`
    /// after exhausting the level-`m` residues, which certifies that the two
    /// characters agree at level `m`.
    pub fn find_witness(
        &self,
        target: Component,
        other: Component,
        m: u32,
    ) -> Result<ModInt, AdjointError> {
        let g = primitive_root(&self.modulus);
        let period = crate::arith::character_period(self.exponents.p(), m);
        let bound = period.to_u64().unwrap_or(u64::MAX).min(10_000_000);
        let mut u = g.clone();
        for _ in 0..bound {
            let a = self.char_value(target, &u)?;
            let b = self.char_value(other, &u)?;
            if a.sub(&b).valuation() < m {
                return Ok(u);
            }
            u = u.mul(&g);
        }
        Err(AdjointError::NoWitness(m))
    }

    /// Annihilator chain onto the line `(i, j)`: one torus-kill plus a
    /// line-kill for every other off-diagonal pair, `n^2 - n` operations in
    /// total. The result is a pure multiple `c * e_{i,j}`; when applied to an
    /// element whose `(i, j)` coefficient is a unit, `v_p(c) <= m (n^2 - n)`.
    pub fn annihilate_to_line(
        &self,
        x: &MatZq,
        target: (usize, usize),
        m: u32,
    ) -> Result<(ModInt, Vec<GroupRingOp>), AdjointError> {
        self.check_element(x)?;
        let (i, j) = target;
        if i == j || i >= self.n() || j >= self.n() {
            return Err(AdjointError::BadLine(i, j));
        }
        let target_c = Component::Line(i, j);
        let mut ops = Vec::new();
        let torus_witness = self
            .find_witness(target_c, Component::Torus, m)
            .map_err(|_| AdjointError::NotAdmissible(m))?;
        ops.push(GroupRingOp { kind: OpKind::TorusKill, witness: torus_witness });
        for s in 0..self.n() {
            for t in 0..self.n() {
                if s == t || (s, t) == (i, j) {
                    continue;
                }
                let w = self
                    .find_witness(target_c, Component::Line(s, t), m)
                    .map_err(|_| AdjointError::NotAdmissible(m))?;
                ops.push(GroupRingOp { kind: OpKind::LineKill(s, t), witness: w });
            }
        }
        let mut acc = x.clone();
        for op in &ops {
            acc = self.apply_op(op, &acc)?;
        }
        let c = acc.entry_mod(i, j);
        debug_assert!({
            let mut pure = true;
            for r in 0..self.n() {
                for cidx in 0..self.n() {
                    if (r, cidx) != (i, j) && !acc.entry(r, cidx).is_zero() {
                        pure = false;
                    }
                }
            }
            pure
        });
        Ok((c, ops))
    }

    /// Annihilator chain onto the torus: a line-kill for every off-diagonal
    /// pair. The result is `scalar * x_0` with `v_p(scalar) <= m (n^2 - n)`.
    pub fn annihilate_to_torus(
        &self,
        x: &MatZq,
        m: u32,
    ) -> Result<(MatZq, Vec<GroupRingOp>), AdjointError> {
        self.check_element(x)?;
        let mut ops = Vec::new();
        for s in 0..self.n() {
            for t in 0..self.n() {
                if s == t {
                    continue;
                }
                let w = self
                    .find_witness(Component::Torus, Component::Line(s, t), m)
                    .map_err(|_| AdjointError::NotAdmissible(m))?;
                ops.push(GroupRingOp { kind: OpKind::LineKill(s, t), witness: w });
            }
        }
        let mut acc = x.clone();
        for op in &ops {
            acc = self.apply_op(op, &acc)?;
        }
        Ok((acc, ops))
    }

    /// Commutator bracket on adjoint elements.
    pub fn bracket(&self, x: &MatZq, y: &MatZq) -> Result<MatZq, AdjointError> {
        self.check_element(x)?;
        self.check_element(y)?;
        Ok(x.commutator(y))
    }
}

/// The alternating 0/1 diagonal pattern `a_i = (1 + (-1)^i)/2`, 1-indexed.
pub fn mu_pattern(n: usize) -> Vec<u64> {
    (1..=n).map(crate::spectrum::parity_coefficient).collect()
}

/// `μ` as a matrix over `F_p`.
pub fn mu_fp(n: usize, p: u64) -> MatFp {
    let mut out = MatFp::zero(n, p);
    for (i, a) in mu_pattern(n).iter().enumerate() {
        out.set_entry(i, i, *a);
    }
    out
}
