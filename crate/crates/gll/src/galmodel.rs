//! A synthetic stand-in for the absolute Galois side: a free group whose
//! generators carry assigned cyclotomic-character values.
//!
//! Every assignment of unit values yields a diagonal representation `ρ_N` on
//! the free group, and every assignment of adjoint values extends uniquely to
//! a cocycle, so the existence statements that normally come out of
//! cohomology become constructive choices here. On top of that the module
//! computes, exactly: twisted evaluations `(I + p^M f) ρ_N`, coboundary
//! conjugation, Schreier generators of the kernel of `ρ_M`, the image module
//! of that kernel inside the level-`M` adjoint, and the top filtration layer
//! `Φ` it induces over `F_p`.

use crate::adjoint::AdjointModule;
use crate::arith::{self, mod_inverse, valuation_in, ArithError, ModInt, Modulus};
use crate::generation::PhiSubspace;
use crate::matgroup::{MatError, MatJson, MatZq, SmallExtension};
use crate::spectrum::{ExponentTuple, ParamProfile, SpectrumError};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

/// Default cap on the size of the finite image used for coset enumeration.
pub const DEFAULT_IMAGE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error("adjoint failure: {0}")]
    Adjoint(#[from] crate::adjoint::AdjointError),
    #[error("model too small: missing designated generators for the standard twist")]
    ModelTooSmall,
    #[error("model has no generator with the required character value")]
    NoSuchGenerator,
    #[error("finite image exceeds the enumeration cap {0}")]
    ImageTooLarge(usize),
    #[error("malformed model JSON: {0}")]
    BadModelJson(String),
    #[error("lift family of size {count} does not fit in p^{extra} scalar slots")]
    LiftFamilyTooLarge { count: usize, extra: u32 },
}

/// A freely reduced word in the model's generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<(usize, i8)>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn generator(g: usize) -> Self {
        Word { letters: vec![(g, 1)] }
    }

    pub fn from_letters(letters: impl IntoIterator<Item = (usize, i8)>) -> Self {
        let mut out: Vec<(usize, i8)> = Vec::new();
        for (g, e) in letters {
            debug_assert!(e == 1 || e == -1);
            if let Some(&(lg, le)) = out.last() {
                if lg == g && le == -e {
                    out.pop();
                    continue;
                }
            }
            out.push((g, e));
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn mul(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn random(rng: &mut impl Rng, num_generators: usize, len: usize) -> Word {
        Word::from_letters((0..len).map(|_| {
            (
                rng.random_range(0..num_generators),
                if rng.random_bool(0.5) { 1 } else { -1 },
            )
        }))
    }
}

/// A 1-cocycle valued in the level-`M` adjoint, given by its values on the
/// free generators; the extension to words is forced by
/// `F(gh) = F(g) + g·F(h)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle {
    values: Vec<MatZq>,
}

impl Cocycle {
    pub fn zero(model: &SyntheticModel) -> Cocycle {
        let adj = model.adjoint();
        Cocycle {
            values: vec![adj.zero(); model.num_generators()],
        }
    }

    pub fn values(&self) -> &[MatZq] {
        &self.values
    }

    pub fn value(&self, g: usize) -> &MatZq {
        &self.values[g]
    }

    pub fn set_value(&mut self, g: usize, v: MatZq) {
        self.values[g] = v;
    }

    pub fn add(&self, other: &Cocycle) -> Cocycle {
        Cocycle {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }
}

/// Free-group model: generator names, their character values mod `p^N`, and
/// the designated generators the standard construction reserves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticModel {
    profile: ParamProfile,
    exponents: ExponentTuple,
    names: Vec<String>,
    chi: Vec<ModInt>,
    reserved: Vec<((usize, usize), usize)>,
    mu_generator: Option<usize>,
}

/// The alternating index set: zero-indexed pairs `(i, j)` with `i + j` odd.
pub fn alternating_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if (i + j) % 2 == 1 {
                out.push((i, j));
            }
        }
    }
    out
}

impl SyntheticModel {
    pub fn new(
        profile: ParamProfile,
        exponents: ExponentTuple,
        names: Vec<String>,
        chi_values: Vec<BigUint>,
    ) -> Result<Self, ModelError> {
        assert_eq!(exponents.p(), profile.p, "exponents and profile disagree on p");
        assert_eq!(exponents.n(), profile.n as usize, "exponent count mismatch");
        assert_eq!(names.len(), chi_values.len());
        let modulus = Modulus::new(profile.p, profile.big_n)?;
        let chi: Vec<ModInt> = chi_values
            .into_iter()
            .map(|v| ModInt::new(v, modulus.clone()))
            .collect();
        for u in &chi {
            if !u.is_unit() {
                return Err(ArithError::NonUnit.into());
            }
        }
        Ok(SyntheticModel {
            profile,
            exponents,
            names,
            chi,
            reserved: Vec::new(),
            mu_generator: None,
        })
    }

    /// The standard model: one free generator carrying a generator of the
    /// unit group, one reserved generator per alternating pair `(i, j)` with
    /// trivial character (so its image dies at every level), and one witness
    /// generator with character exactly `1 + p^M`.
    pub fn standard(profile: ParamProfile, exponents: ExponentTuple) -> Result<Self, ModelError> {
        let modulus = Modulus::new(profile.p, profile.big_n)?;
        let g = arith::primitive_root(&modulus);
        let mut names = vec!["s".to_string()];
        let mut chi_values = vec![g.value().clone()];
        let mut reserved = Vec::new();
        for (i, j) in alternating_pairs(profile.n as usize) {
            reserved.push(((i, j), names.len()));
            names.push(format!("r{}_{}", i + 1, j + 1));
            chi_values.push(BigUint::one());
        }
        let mu_generator = Some(names.len());
        names.push("w".to_string());
        let p_to_m = BigUint::from(profile.p).pow(profile.big_m);
        chi_values.push(BigUint::one() + p_to_m);
        let mut model = Self::new(profile, exponents, names, chi_values)?;
        model.reserved = reserved;
        model.mu_generator = mu_generator;
        Ok(model)
    }

    /// Builds a reduced-scale standard model at levels `(m', M')`.
    ///
    /// Searches deterministically for an `m'`-admissible exponent tuple whose
    /// entries follow the anchor-1 alternating pattern mod `p`; when none
    /// exists (small primes leave too few residues for the pairwise-ratio
    /// condition) it falls back to the doubling family and reports the tuple
    /// as inadmissible at `m'`.
    pub fn reduced(p: u64, n: u32, m: u32, big_m: u32) -> Result<(Self, bool), ModelError> {
        let profile = ParamProfile::with_levels(p, n, m, big_m)?;
        let (exponents, admissible) = reduced_exponents(p, n as usize, m)?;
        let model = Self::standard(profile, exponents)?;
        Ok((model, admissible))
    }

    pub fn profile(&self) -> &ParamProfile {
        &self.profile
    }

    pub fn exponents(&self) -> &ExponentTuple {
        &self.exponents
    }

    pub fn num_generators(&self) -> usize {
        self.chi.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn chi_values(&self) -> &[ModInt] {
        &self.chi
    }

    pub fn reserved_pairs(&self) -> &[((usize, usize), usize)] {
        &self.reserved
    }

    pub fn mu_generator(&self) -> Option<usize> {
        self.mu_generator
    }

    pub fn n(&self) -> usize {
        self.profile.n as usize
    }

    /// Modulus at the ambient level `N`.
    pub fn modulus_n(&self) -> &Modulus {
        self.chi[0].modulus()
    }

    /// The adjoint context at level `M`.
    pub fn adjoint(&self) -> AdjointModule {
        AdjointModule::new(self.exponents.clone(), self.profile.big_m)
            .expect("model parameters already validated")
    }

    pub fn small_extension(&self) -> SmallExtension {
        SmallExtension::new(self.profile.big_m, self.profile.big_n)
            .expect("N = 2M is always a small extension")
    }

    /// Character value of a word at level `level`.
    pub fn chi_word(&self, w: &Word, level: u32) -> ModInt {
        let modulus = self.modulus_n().at_level(level);
        let mut acc = ModInt::one(modulus);
        for &(g, e) in w.letters() {
            let v = self.chi[g].reduce(level);
            let v = if e == 1 { v } else { v.inverse().expect("chi values are units") };
            acc = acc.mul(&v);
        }
        acc
    }

    /// The diagonal representation of a word at level `level`.
    pub fn rho(&self, w: &Word, level: u32) -> MatZq {
        let u = self.chi_word(w, level);
        self.diagonal_of(&u)
    }

    fn diagonal_of(&self, u: &ModInt) -> MatZq {
        let n = self.n();
        let diag: Vec<ModInt> = (0..n)
            .map(|i| u.pow(self.exponents.exponent(i)).expect("unit base"))
            .collect();
        MatZq::diagonal(n, u.modulus().clone(), &diag)
    }

    /// Cocycle extension along a word: `F(l_1 ... l_k)` accumulated left to
    /// right through `F(wl) = F(w) + w·F(l)` with `F(g^{-1}) = -g^{-1}·F(g)`.
    pub fn eval_cocycle(&self, f: &Cocycle, w: &Word) -> MatZq {
        let adj = self.adjoint();
        let mut acc = adj.zero();
        let mut chi_acc = ModInt::one(adj.modulus().clone());
        for &(g, e) in w.letters() {
            let chi_g = self.chi[g].reduce(self.profile.big_m);
            let (value, chi_letter) = if e == 1 {
                (f.values[g].clone(), chi_g)
            } else {
                let inv = chi_g.inverse().expect("chi values are units");
                let pulled = adj
                    .galois_act(&inv, &f.values[g])
                    .expect("cocycle values live in the adjoint");
                (pulled.neg(), inv)
            };
            let moved = adj.galois_act(&chi_acc, &value).expect("accumulated character is a unit");
            acc = acc.add(&moved);
            chi_acc = chi_acc.mul(&chi_letter);
        }
        acc
    }

    /// Evaluates the representation on a word, optionally twisted:
    /// `(I + p^M F(w)) ρ_N(w)`.
    pub fn eval_rep(&self, w: &Word, twist: Option<&Cocycle>) -> MatZq {
        let plain = self.rho(w, self.profile.big_n);
        match twist {
            None => plain,
            Some(f) => {
                let fw = self.eval_cocycle(f, w);
                let unipotent = self
                    .small_extension()
                    .kernel_embed(&fw)
                    .expect("cocycle values live at the kernel level");
                unipotent.mul(&plain)
            }
        }
    }

    /// The coboundary cocycle `g ↦ x - g·x` of a level-`M` adjoint element.
    pub fn coboundary(&self, x: &MatZq) -> Result<Cocycle, ModelError> {
        let adj = self.adjoint();
        let mut values = Vec::with_capacity(self.num_generators());
        for g in 0..self.num_generators() {
            let chi_g = self.chi[g].reduce(self.profile.big_m);
            let moved = adj.galois_act(&chi_g, x)?;
            values.push(x.sub(&moved));
        }
        Ok(Cocycle { values })
    }

    /// The standard twist: the reserved generator for each alternating pair
    /// `(i, j)` carries the value `e_{i,j}`; all other generators carry zero.
    pub fn standard_twist(&self) -> Result<Cocycle, ModelError> {
        let expect = alternating_pairs(self.n());
        if self.reserved.len() != expect.len() {
            return Err(ModelError::ModelTooSmall);
        }
        let adj = self.adjoint();
        let mut twist = Cocycle::zero(self);
        for &((i, j), g) in &self.reserved {
            twist.set_value(g, adj.line(i, j));
        }
        Ok(twist)
    }

    /// The designated generator with character value exactly `1 + p^M`, as a
    /// word. Its untwisted image is `I + p^M diag(k_1, ..., k_n)`, whose
    /// diagonal reduces mod `p` to the anchor multiple of the alternating
    /// pattern.
    pub fn mu_witness(&self) -> Result<Word, ModelError> {
        let target = BigUint::one() + BigUint::from(self.profile.p).pow(self.profile.big_m);
        if let Some(g) = self.mu_generator {
            if self.chi[g].value() == &target {
                return Ok(Word::generator(g));
            }
        }
        for (g, u) in self.chi.iter().enumerate() {
            if u.value() == &target {
                return Ok(Word::generator(g));
            }
        }
        Err(ModelError::NoSuchGenerator)
    }

    /// Exact image module of the kernel of `ρ_M` under the twisted
    /// evaluation, inside the level-`M` adjoint.
    ///
    /// Enumerates the cosets of the kernel in the free group (the finite
    /// image of `ρ_M`), builds Schreier generators from a breadth-first
    /// transversal, evaluates each under the twist, and closes the resulting
    /// logarithms under addition and the Galois action of every assigned
    /// character value.
    pub fn image_module(&self, twist: &Cocycle, cap: usize) -> Result<ImageModule, ModelError> {
        let adj = self.adjoint();
        let big_m = self.profile.big_m;
        let n = self.n();
        // Diagonal tuples of each generator at level M key the cosets.
        let gen_diag: Vec<Vec<BigUint>> = (0..self.num_generators())
            .map(|g| {
                let u = self.chi[g].reduce(big_m);
                (0..n)
                    .map(|i| u.pow(self.exponents.exponent(i)).expect("unit").value().clone())
                    .collect()
            })
            .collect();
        let gen_eval: Vec<MatZq> = (0..self.num_generators())
            .map(|g| self.eval_rep(&Word::generator(g), Some(twist)))
            .collect();
        let pe_m = adj.modulus().order().clone();
        let identity_key: Vec<BigUint> = vec![BigUint::one(); n];

        // Breadth-first coset enumeration; each coset carries the twisted
        // evaluation of its transversal word, so Schreier generator values
        // cost one product and one inverse each.
        let mut keys: Vec<Vec<BigUint>> = vec![identity_key.clone()];
        let mut evals: Vec<MatZq> = vec![MatZq::identity(n, self.modulus_n().clone())];
        let mut tree_edge: Vec<Option<(usize, usize)>> = vec![None];
        let mut index: HashMap<Vec<BigUint>, usize> = HashMap::new();
        index.insert(identity_key, 0);
        let mut cursor = 0;
        while cursor < keys.len() {
            for g in 0..self.num_generators() {
                let next: Vec<BigUint> = keys[cursor]
                    .iter()
                    .zip(&gen_diag[g])
                    .map(|(a, b)| a * b % &pe_m)
                    .collect();
                if !index.contains_key(&next) {
                    if keys.len() >= cap {
                        return Err(ModelError::ImageTooLarge(cap));
                    }
                    index.insert(next.clone(), keys.len());
                    keys.push(next);
                    evals.push(evals[cursor].mul(&gen_eval[g]));
                    tree_edge.push(Some((cursor, g)));
                }
            }
            cursor += 1;
        }

        let ext = self.small_extension();
        let mut rows: Vec<Vec<BigUint>> = Vec::new();
        let mut schreier_count = 0usize;
        for c in 0..keys.len() {
            for g in 0..self.num_generators() {
                let next: Vec<BigUint> = keys[c]
                    .iter()
                    .zip(&gen_diag[g])
                    .map(|(a, b)| a * b % &pe_m)
                    .collect();
                let c2 = index[&next];
                if tree_edge[c2] == Some((c, g)) {
                    continue; // tree edge, trivial generator
                }
                // Value of t_c · g · t_{c2}^{-1} under the twisted evaluation.
                let x = evals[c]
                    .mul(&gen_eval[g])
                    .mul(&evals[c2].inverse().expect("transversal evaluations are invertible"));
                if x.is_identity() {
                    continue;
                }
                schreier_count += 1;
                debug_assert!(x.congruence_level() >= big_m, "Schreier element left the kernel");
                let log = ext.kernel_log(&x)?;
                rows.push(log.entries().to_vec());
            }
        }

        let mut module = PModule::from_rows(n * n, adj.modulus().clone(), rows);
        // Galois closure: act by every assigned character value until stable.
        let units: Vec<ModInt> = self.chi.iter().map(|u| u.reduce(big_m)).collect();
        let mut galois_rounds = 0;
        loop {
            let mut grew = false;
            for u in &units {
                for row in module.canonical_rows() {
                    let x = row_to_mat(&row, n, adj.modulus());
                    let acted = adj.galois_act(u, &x)?;
                    if module.insert(acted.entries().to_vec()) {
                        grew = true;
                    }
                }
            }
            galois_rounds += 1;
            if !grew {
                break;
            }
        }
        Ok(ImageModule { adjoint: adj, module, schreier_count, galois_rounds })
    }

    /// The top filtration layer over `F_p` carried by an image module:
    /// `{B in M_n(F_p) : p^{M-1} B ∈ module}`, i.e. the deepest congruence
    /// layer the twisted representation fills at level `N`.
    pub fn phi_top(&self, module: &ImageModule) -> PhiSubspace {
        let p = self.profile.p;
        let n = self.n();
        let dim = n * n;
        let big_m = self.profile.big_m;
        // Constraint functionals come from the Smith data: coordinates whose
        // diagonal annihilates everything force B·V ≡ 0 mod p there.
        let mut constraints: Vec<Vec<u64>> = Vec::new();
        for i in 0..dim {
            if module.module.svals[i] >= big_m {
                let col: Vec<u64> = (0..dim)
                    .map(|j| fp_residue(&module.module.v[j * dim + i], p))
                    .collect();
                constraints.push(col);
            }
        }
        let kernel = fp_kernel(&constraints, dim, p);
        let mut span = PhiSubspace::new(p, n, self.profile.big_n - 1);
        for vec in kernel {
            span.insert(&crate::matgroup::MatFp::from_entries(n, p, vec));
        }
        span
    }

    /// Finitely many pairwise-distinct lifts of the twisted representation
    /// to level `N + extra`, indexed by unipotent scalar twists of the first
    /// generator image. Each entry lists the generator images of one lift.
    pub fn finite_level_lifts(
        &self,
        twist: &Cocycle,
        extra: u32,
        count: usize,
    ) -> Result<Vec<Vec<MatZq>>, ModelError> {
        if count as u128 > (self.profile.p as u128).pow(extra) {
            return Err(ModelError::LiftFamilyTooLarge { count, extra });
        }
        let lift_modulus = Modulus::new(self.profile.p, self.profile.big_n + extra)?;
        let shift_m = BigUint::from(self.profile.p).pow(self.profile.big_m);
        let shift_n = BigUint::from(self.profile.p).pow(self.profile.big_n);
        let n = self.n();
        let base: Vec<MatZq> = (0..self.num_generators())
            .map(|g| {
                let chi_lift = ModInt::new(self.chi[g].value().clone(), lift_modulus.clone());
                let plain = self.diagonal_of(&chi_lift);
                let mut unipotent = MatZq::identity(n, lift_modulus.clone());
                let fg = twist.value(g);
                for i in 0..n {
                    for j in 0..n {
                        if !fg.entry(i, j).is_zero() {
                            let cur = unipotent.entry(i, j).clone();
                            unipotent.set_entry(i, j, cur + fg.entry(i, j) * &shift_m);
                        }
                    }
                }
                unipotent.mul(&plain)
            })
            .collect();
        let mut out = Vec::with_capacity(count);
        for s in 0..count {
            let scalar = BigUint::one() + BigUint::from(s as u64) * &shift_n;
            let mut images = base.clone();
            images[0] = images[0].scalar_mul(&scalar);
            out.push(images);
        }
        Ok(out)
    }

    pub fn to_json(&self, twist: Option<&Cocycle>) -> ModelJson {
        ModelJson {
            p: self.profile.p,
            n: self.profile.n,
            profile: self.profile.clone(),
            exponents: ExponentsJson {
                ks: self.exponents.ks().iter().map(|k| k.to_string()).collect(),
                anchor: self.exponents.anchor(),
            },
            chi_values: self.chi.iter().map(|u| u.value().to_string()).collect(),
            names: self.names.clone(),
            reserved: self.reserved.iter().map(|&((i, j), g)| (i, j, g)).collect(),
            mu_generator: self.mu_generator,
            cocycle: twist.map(|f| f.values.iter().map(|m| m.to_json()).collect()),
        }
    }

    pub fn from_json(json: &ModelJson) -> Result<(Self, Option<Cocycle>), ModelError> {
        let ks: Vec<BigInt> = json
            .exponents
            .ks
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|_| ModelError::BadModelJson(format!("bad exponent {s:?}"))))
            .collect::<Result<_, _>>()?;
        let exponents = match json.exponents.anchor {
            Some(k) => ExponentTuple::with_anchor(json.p, ks, k)?,
            None => ExponentTuple::raw(json.p, ks)?,
        };
        let chi_values: Vec<BigUint> = json
            .chi_values
            .iter()
            .map(|s| s.parse::<BigUint>().map_err(|_| ModelError::BadModelJson(format!("bad chi value {s:?}"))))
            .collect::<Result<_, _>>()?;
        let mut model = Self::new(json.profile.clone(), exponents, json.names.clone(), chi_values)?;
        model.reserved = json.reserved.iter().map(|&(i, j, g)| ((i, j), g)).collect();
        model.mu_generator = json.mu_generator;
        let twist = match &json.cocycle {
            None => None,
            Some(vals) => {
                if vals.len() != model.num_generators() {
                    return Err(ModelError::BadModelJson("cocycle length mismatch".into()));
                }
                let values: Vec<MatZq> = vals
                    .iter()
                    .map(MatZq::from_json)
                    .collect::<Result<_, _>>()?;
                Some(Cocycle { values })
            }
        };
        Ok((model, twist))
    }
}

/// Deterministic search for an `m`-admissible anchor-1 tuple at reduced
/// scale; falls back to the doubling family with `admissible = false`.
///
/// The pairwise-ratio condition needs `n^2 - n` distinct nonzero residues
/// modulo `p^{m-1}(p-1)`, so small primes at low levels are hopeless; those
/// cases short-circuit straight to the fallback.
pub fn reduced_exponents(p: u64, n: usize, m: u32) -> Result<(ExponentTuple, bool), ModelError> {
    use num_traits::ToPrimitive;
    let pattern: Vec<u64> = (1..=n).map(crate::spectrum::parity_coefficient).collect();
    let fallback = || -> Result<ExponentTuple, ModelError> {
        let ks: Vec<BigInt> = (1..=n)
            .map(|i| BigInt::from((1u64 << i) * p + pattern[i - 1]))
            .collect();
        Ok(ExponentTuple::with_anchor(p, ks, 1)?)
    };
    let period = crate::arith::character_period(p, m).to_u64().unwrap_or(u64::MAX);
    if period <= (n * n - n) as u64 {
        return Ok((fallback()?, false));
    }
    let bound = 12u64;
    let mut counters = vec![1u64; n];
    let mut attempts = 0u64;
    loop {
        let ks: Vec<BigInt> = counters
            .iter()
            .zip(&pattern)
            .map(|(&c, &a)| BigInt::from(c * p + a))
            .collect();
        let tuple = ExponentTuple::with_anchor(p, ks, 1)?;
        if crate::spectrum::check_admissible(&tuple, m) {
            return Ok((tuple, true));
        }
        attempts += 1;
        if attempts >= 250_000 {
            return Ok((fallback()?, false));
        }
        // odometer over c_i in [1, bound]
        let mut idx = 0;
        loop {
            if idx == n {
                return Ok((fallback()?, false));
            }
            counters[idx] += 1;
            if counters[idx] <= bound {
                break;
            }
            counters[idx] = 1;
            idx += 1;
        }
    }
}

/// Exact submodule of `(Z/p^M)^dim` with membership, canonical generators,
/// and growth via re-diagonalization: valuation-pivot Smith reduction over
/// the local ring, tracking the column transform and its inverse.
#[derive(Debug, Clone)]
struct PModule {
    dim: usize,
    modulus: Modulus,
    rows: Vec<Vec<BigUint>>,
    svals: Vec<u32>,
    v: Vec<BigUint>,
    vinv: Vec<BigUint>,
}

impl PModule {
    fn from_rows(dim: usize, modulus: Modulus, rows: Vec<Vec<BigUint>>) -> PModule {
        let mut module = PModule {
            dim,
            modulus,
            rows,
            svals: Vec::new(),
            v: Vec::new(),
            vinv: Vec::new(),
        };
        module.rebuild();
        module
    }

    fn rebuild(&mut self) {
        let dim = self.dim;
        let p = self.modulus.prime();
        let level = self.modulus.exponent();
        let pe = self.modulus.order().clone();
        let mut a: Vec<Vec<BigUint>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x % &pe).collect())
            .collect();
        let r = a.len();
        let mut v = vec![BigUint::zero(); dim * dim];
        for i in 0..dim {
            v[i * dim + i] = BigUint::one();
        }
        let mut svals = vec![level; dim];
        for k in 0..r.min(dim) {
            // Global minimum valuation in the trailing submatrix.
            let mut best: Option<(usize, usize, u32)> = None;
            'scan: for i in k..r {
                for j in k..dim {
                    if a[i][j].is_zero() {
                        continue;
                    }
                    let val = valuation_in(&a[i][j], p, level);
                    if best.map_or(true, |(_, _, bv)| val < bv) {
                        best = Some((i, j, val));
                        if val == 0 {
                            break 'scan;
                        }
                    }
                }
            }
            let Some((bi, bj, v0)) = best else { break };
            a.swap(k, bi);
            if bj != k {
                for row in a.iter_mut() {
                    row.swap(k, bj);
                }
                for i in 0..dim {
                    v.swap(i * dim + k, i * dim + bj);
                }
            }
            // Normalize the pivot row so the pivot becomes exactly p^v0.
            let pv = BigUint::from(p).pow(v0);
            let unit = &a[k][k] / &pv;
            let uinv = mod_inverse(&unit, &pe).expect("pivot unit part is invertible");
            for j in k..dim {
                a[k][j] = &a[k][j] * &uinv % &pe;
            }
            // Clear the pivot column below.
            for i in k + 1..r {
                if a[i][k].is_zero() {
                    continue;
                }
                let c = &a[i][k] / &pv;
                for j in k..dim {
                    let sub = &c * &a[k][j] % &pe;
                    a[i][j] = ((&pe + &a[i][j]) - sub) % &pe;
                }
            }
            // Clear the pivot row to the right with column operations,
            // mirrored into V.
            for j in k + 1..dim {
                if a[k][j].is_zero() {
                    continue;
                }
                let c = &a[k][j] / &pv;
                for row in a.iter_mut() {
                    let sub = &c * &row[k] % &pe;
                    row[j] = ((&pe + &row[j]) - sub) % &pe;
                }
                for i in 0..dim {
                    let sub = &c * &v[i * dim + k] % &pe;
                    v[i * dim + j] = ((&pe + &v[i * dim + j]) - sub) % &pe;
                }
            }
            svals[k] = v0;
        }
        let vinv = invert_unimodular(&v, dim, &pe, p).expect("column transform is unimodular");
        self.svals = svals;
        self.v = v;
        self.vinv = vinv;
    }

    fn member(&self, row: &[BigUint]) -> bool {
        let pe = self.modulus.order();
        let p = self.modulus.prime();
        let level = self.modulus.exponent();
        for i in 0..self.dim {
            let mut acc = BigUint::zero();
            for j in 0..self.dim {
                acc += &row[j] * &self.v[j * self.dim + i];
            }
            acc %= pe;
            if valuation_in(&acc, p, level) < self.svals[i] {
                return false;
            }
        }
        true
    }

    fn insert(&mut self, row: Vec<BigUint>) -> bool {
        if self.member(&row) {
            return false;
        }
        self.rows.push(row);
        self.rebuild();
        true
    }

    /// Deterministic generating rows `p^{s_i} * (row i of V^{-1})`.
    fn canonical_rows(&self) -> Vec<Vec<BigUint>> {
        let pe = self.modulus.order();
        let level = self.modulus.exponent();
        let p = self.modulus.prime();
        let mut out = Vec::new();
        for i in 0..self.dim {
            if self.svals[i] >= level {
                continue;
            }
            let scale = BigUint::from(p).pow(self.svals[i]);
            let row: Vec<BigUint> = (0..self.dim)
                .map(|j| &self.vinv[i * self.dim + j] * &scale % pe)
                .collect();
            out.push(row);
        }
        out
    }
}

fn invert_unimodular(v: &[BigUint], dim: usize, pe: &BigUint, p: u64) -> Option<Vec<BigUint>> {
    let mut a = v.to_vec();
    let mut inv = vec![BigUint::zero(); dim * dim];
    for i in 0..dim {
        inv[i * dim + i] = BigUint::one();
    }
    for col in 0..dim {
        let pivot_row = (col..dim).find(|&r| !(&a[r * dim + col] % p).is_zero())?;
        if pivot_row != col {
            for j in 0..dim {
                a.swap(pivot_row * dim + j, col * dim + j);
                inv.swap(pivot_row * dim + j, col * dim + j);
            }
        }
        let pinv = mod_inverse(&a[col * dim + col], pe)?;
        for j in 0..dim {
            a[col * dim + j] = &a[col * dim + j] * &pinv % pe;
            inv[col * dim + j] = &inv[col * dim + j] * &pinv % pe;
        }
        for r in 0..dim {
            if r == col || a[r * dim + col].is_zero() {
                continue;
            }
            let f = a[r * dim + col].clone();
            for j in 0..dim {
                let sa = &a[col * dim + j] * &f % pe;
                a[r * dim + j] = ((pe + &a[r * dim + j]) - sa) % pe;
                let si = &inv[col * dim + j] * &f % pe;
                inv[r * dim + j] = ((pe + &inv[r * dim + j]) - si) % pe;
            }
        }
    }
    Some(inv)
}

fn row_to_mat(row: &[BigUint], n: usize, modulus: &Modulus) -> MatZq {
    MatZq::from_entries(n, modulus.clone(), row.to_vec())
}

fn fp_residue(v: &BigUint, p: u64) -> u64 {
    use num_traits::ToPrimitive;
    (v % p).to_u64().expect("residue fits")
}

/// Kernel of the linear map `F_p^dim -> F_p^c`, `B ↦ (sum_j B_j C_i[j])_i`,
/// as an explicit basis.
fn fp_kernel(constraints: &[Vec<u64>], dim: usize, p: u64) -> Vec<Vec<u64>> {
    // Row-reduce the constraint matrix.
    let mut rows: Vec<Vec<u64>> = constraints.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..dim {
        let Some(r) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, r);
        let inv = arith::pow_mod_u64(rows[rank][col], p - 2, p);
        for x in rows[rank].iter_mut() {
            *x = (*x as u128 * inv as u128 % p as u128) as u64;
        }
        for r2 in 0..rows.len() {
            if r2 != rank && rows[r2][col] != 0 {
                let f = rows[r2][col];
                for j in 0..dim {
                    let sub = (f as u128 * rows[rank][j] as u128 % p as u128) as u64;
                    rows[r2][j] = (rows[r2][j] + p - sub) % p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in 0..dim {
        if pivots.contains(&free) {
            continue;
        }
        let mut vec = vec![0u64; dim];
        vec[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            vec[pc] = (p - rows[r][free]) % p;
        }
        basis.push(vec);
    }
    basis
}

/// The image module of the kernel of `ρ_M`, with membership, canonical
/// generators, and stability checks under the assigned character values.
#[derive(Debug, Clone)]
pub struct ImageModule {
    adjoint: AdjointModule,
    module: PModule,
    pub schreier_count: usize,
    pub galois_rounds: u32,
}

impl ImageModule {
    pub fn member(&self, x: &MatZq) -> bool {
        assert_eq!(x.modulus(), self.adjoint.modulus());
        self.module.member(x.entries())
    }

    pub fn adjoint(&self) -> &AdjointModule {
        &self.adjoint
    }

    /// Canonical generating matrices (deterministic given the model).
    pub fn generators(&self) -> Vec<MatZq> {
        self.module
            .canonical_rows()
            .iter()
            .map(|r| row_to_mat(r, self.adjoint.n(), self.adjoint.modulus()))
            .collect()
    }

    /// Module equality by mutual membership of canonical generators.
    pub fn equals(&self, other: &ImageModule) -> bool {
        self.generators().iter().all(|g| other.member(g))
            && other.generators().iter().all(|g| self.member(g))
    }

    /// Is the module carried into itself by the Galois action of `u`?
    pub fn stable_under(&self, u: &ModInt) -> bool {
        self.generators().iter().all(|g| {
            let acted = self.adjoint.galois_act(u, g).expect("unit action");
            self.member(&acted)
        })
    }

    /// Rank data of the Smith form: the diagonal valuations.
    pub fn smith_valuations(&self) -> &[u32] {
        &self.module.svals
    }
}

/// Wire format for a synthetic model plus optional twist.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelJson {
    pub p: u64,
    pub n: u32,
    pub profile: ParamProfile,
    pub exponents: ExponentsJson,
    pub chi_values: Vec<String>,
    pub names: Vec<String>,
    pub reserved: Vec<(usize, usize, usize)>,
    pub mu_generator: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cocycle: Option<Vec<MatJson>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentsJson {
    pub ks: Vec<String>,
    pub anchor: Option<u64>,
}
