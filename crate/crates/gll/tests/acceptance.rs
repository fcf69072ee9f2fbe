//! Acceptance suite: one test per headline criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them all).

use gll::adjoint::{mu_fp, AdjointModule};
use gll::arith::{is_prime, Modulus};
use gll::galmodel::{alternating_pairs, SyntheticModel, Word, DEFAULT_IMAGE_CAP};
use gll::generation::{
    self, ut_kernel_generators, GeneratedSubgroup, DEFAULT_ENUM_CAP,
};
use gll::matgroup::{exp_level, MatFp, MatZq, SmallExtension};
use gll::rand_util::{self, SeedSplitter};
use gll::spectrum::{
    admissibility_oracle, bernoulli_mod, bernoulli_mod_voronoi, check_admissible,
    compute_profile, irregular_indices, ExponentTuple,
};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::Rng;

fn report(criterion: u32, pass: bool, what: &str) {
    println!(
        "acceptance {:>2} {}: {}",
        criterion,
        if pass { "PASS" } else { "FAIL" },
        what
    );
    assert!(pass, "acceptance criterion {criterion} failed: {what}");
}

fn primes_to(limit: u64) -> Vec<u64> {
    (2..=limit).filter(|&p| is_prime(p).unwrap()).collect()
}

#[test]
fn criterion_01_parameter_formulas() {
    let p72 = compute_profile(7, 2).unwrap();
    let p73 = compute_profile(7, 3).unwrap();
    let mut pass = (p72.m, p72.big_m, p72.big_n, p72.t) == (3, 7, 14, 56)
        && (p73.m, p73.big_m, p73.big_n, p73.t) == (4, 25, 50, 200);
    for p in primes_to(97).into_iter().filter(|&p| p >= 3) {
        for n in 2..=8u32 {
            let pr = compute_profile(p, n).unwrap();
            pass &= pr.t == 8 * pr.big_m;
            pass &= pr.big_m == pr.m * (n * n - n) + 1;
            pass &= pr.big_n == 2 * pr.big_m;
        }
    }
    report(1, pass, "level formulas and the t = 8M identity over the grid");
}

#[test]
fn criterion_02_canonical_tuples_admissible_exhaustively() {
    let mut pass = true;
    let mut combos = 0u32;
    for p in primes_to(97).into_iter().filter(|&p| p >= 7) {
        for n in 2..=8u32 {
            let m = compute_profile(p, n).unwrap().m;
            let mut k = 3u64;
            while k <= (p - 1) / 2 {
                let tuple = ExponentTuple::canonical(p, n, k).unwrap();
                if !check_admissible(&tuple, m) {
                    eprintln!("inadmissible canonical tuple at p={p}, n={n}, k={k}");
                    pass = false;
                }
                combos += 1;
                k += 2;
            }
        }
    }
    report(
        2,
        pass && combos > 1000,
        "canonical tuples admissible at the profile level for every p <= 97, n <= 8, valid k",
    );
}

#[test]
fn criterion_03_oracle_equivalence() {
    let mut rng = SeedSplitter::new(0).stream("acceptance-oracle");
    let mut agreements = 0u32;
    let mut pass = true;
    for _ in 0..1200 {
        let p = *rand_util::pick(&mut rng, &[5u64, 7, 11]);
        let n = rng.random_range(2..=3usize);
        let m = rng.random_range(2..=3u32);
        let period = gll::arith::character_period(p, m);
        use num_traits::ToPrimitive;
        let period = period.to_u64().unwrap();
        let ks: Vec<BigInt> = (0..n)
            .map(|_| BigInt::from(rng.random_range(1..=3 * period as i64)))
            .collect();
        let tuple = ExponentTuple::raw(p, ks).unwrap();
        let via_integers = check_admissible(&tuple, m);
        let via_evaluation = admissibility_oracle(&tuple, m).unwrap();
        if via_integers != via_evaluation {
            pass = false;
        }
        agreements += 1;
    }
    report(
        3,
        pass && agreements >= 1000,
        "integer admissibility test agrees with pointwise evaluation on 1200 random tuples",
    );
}

#[test]
fn criterion_04_bernoulli_engine() {
    let mut pass = true;
    for p in primes_to(500).into_iter().filter(|&p| p >= 5) {
        if bernoulli_mod(p).unwrap() != bernoulli_mod_voronoi(p).unwrap() {
            eprintln!("Bernoulli methods disagree at p={p}");
            pass = false;
        }
    }
    let t37 = bernoulli_mod(37).unwrap();
    pass &= irregular_indices(&t37) == vec![32];
    let t691 = bernoulli_mod(691).unwrap();
    pass &= irregular_indices(&t691).contains(&12);
    for p in [7u64, 11, 13] {
        pass &= irregular_indices(&bernoulli_mod(p).unwrap()).is_empty();
    }
    report(
        4,
        pass,
        "dual Bernoulli methods agree for p <= 500; 37 flags 32, 691 flags 12, small primes regular",
    );
}

#[test]
fn criterion_05_kernel_and_layer_homomorphisms() {
    let mut pass = true;

    // Exhaustive at (p, n, M, N) = (3, 2, 1, 2): all 81 x 81 kernel pairs.
    let ext = SmallExtension::new(1, 2).unwrap();
    let md1 = Modulus::new(3, 1).unwrap();
    let all: Vec<MatZq> = (0..81u64)
        .map(|c| {
            MatZq::from_entries(
                2,
                md1.clone(),
                vec![
                    BigUint::from(c % 3),
                    BigUint::from(c / 3 % 3),
                    BigUint::from(c / 9 % 3),
                    BigUint::from(c / 27 % 3),
                ],
            )
        })
        .collect();
    for a in &all {
        for b in &all {
            let lhs = ext.kernel_embed(&a.add(b)).unwrap();
            let rhs = ext.kernel_embed(a).unwrap().mul(&ext.kernel_embed(b).unwrap());
            if lhs != rhs {
                pass = false;
            }
        }
    }
    // Same statement through the layer map at m = 1.
    let fp_all: Vec<MatFp> = (0..81u64)
        .map(|c| MatFp::from_entries(2, 3, vec![c % 3, c / 3 % 3, c / 9 % 3, c / 27 % 3]))
        .collect();
    for a in &fp_all {
        for b in &fp_all {
            if exp_level(&a.add(b), 1).unwrap()
                != exp_level(a, 1).unwrap().mul(&exp_level(b, 1).unwrap())
            {
                pass = false;
            }
        }
    }

    // The worked 2x2 example at several primes.
    for p in [3u64, 5, 7, 11] {
        let ext = SmallExtension::new(2, 4).unwrap();
        let a = MatZq::from_i64_entries(2, Modulus::new(p, 2).unwrap(), &[0, 1 + p as i64, -1, 0]);
        let got = ext.kernel_embed(&a).unwrap();
        let (p2, p3, p4) = (p * p, p * p * p, p * p * p * p);
        pass &= got.entry(0, 1) == &BigUint::from(p2 + p3)
            && got.entry(1, 0) == &BigUint::from(p4 - p2)
            && got.entry(0, 0).is_one()
            && got.entry(1, 1).is_one();
    }

    // 1000 random homomorphism checks at larger levels.
    let mut rng = SeedSplitter::new(0).stream("acceptance-kernel");
    for _ in 0..1000 {
        let p = *rand_util::pick(&mut rng, &[3u64, 5, 7, 13]);
        let big_m = rng.random_range(2..=4u32);
        let big_n = rng.random_range(big_m + 1..=2 * big_m);
        let n = rng.random_range(2..=3usize);
        let ext = SmallExtension::new(big_m, big_n).unwrap();
        let kmod = Modulus::new(p, big_n - big_m).unwrap();
        let x = rand_util::random_matrix(&mut rng, &kmod, n);
        let y = rand_util::random_matrix(&mut rng, &kmod, n);
        let lhs = ext.kernel_embed(&x.add(&y)).unwrap();
        let rhs = ext.kernel_embed(&x).unwrap().mul(&ext.kernel_embed(&y).unwrap());
        if lhs != rhs {
            pass = false;
        }
        if ext.kernel_log(&lhs).unwrap() != x.add(&y) {
            pass = false;
        }
    }
    report(
        5,
        pass,
        "kernel embedding and layer maps are homomorphisms (exhaustive small case + 1000 random)",
    );
}

#[test]
fn criterion_06_annihilator_certificates() {
    let mut rng = SeedSplitter::new(0).stream("acceptance-annihilate");
    let mut pass = true;
    let mut instances = 0u32;
    let combos: [(u64, usize); 6] = [(5, 2), (5, 3), (7, 2), (7, 3), (11, 2), (11, 3)];
    for (p, n) in combos {
        let m = rand_util::feasible_admissibility_level(p, n).unwrap();
        let nn = (n * n - n) as u32;
        let big_m = m * nn + 1;
        let bound = m * nn;
        for _ in 0..180 {
            let tuple = rand_util::random_admissible_tuple(&mut rng, p, n, m, 500).unwrap();
            let adj = AdjointModule::new(tuple, big_m).unwrap();
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let mut x = rand_util::random_matrix(&mut rng, adj.modulus(), n);
            x.set_entry(i, j, rand_util::random_unit(&mut rng, adj.modulus()));
            let (coeff, ops) = adj.annihilate_to_line(&x, (i, j), m).unwrap();
            // Purity: the chain must kill everything but the target line.
            let mut acc = x.clone();
            for op in &ops {
                acc = adj.apply_op(op, &acc).unwrap();
            }
            for r in 0..n {
                for s in 0..n {
                    if (r, s) != (i, j) && !acc.entry(r, s).is_zero() {
                        pass = false;
                    }
                }
            }
            if acc.entry_mod(i, j) != coeff {
                pass = false;
            }
            if coeff.valuation() > bound {
                eprintln!(
                    "valuation {} exceeds bound {bound} at p={p}, n={n}, m={m}",
                    coeff.valuation()
                );
                pass = false;
            }
            instances += 1;
        }
    }
    report(
        6,
        pass && instances >= 1000,
        "annihilator chains return pure line multiples with v_p(c) <= m(n^2-n) on 1080 instances",
    );
}

#[test]
fn criterion_07_cocycle_laws() {
    let mut pass = true;
    for (p, n) in [(5u64, 2u32), (7, 3)] {
        let (model, _) = SyntheticModel::reduced(p, n, 1, 2).unwrap();
        let twist = model.standard_twist().unwrap();
        let mut rng = SeedSplitter::new(0).stream("acceptance-cocycle");
        // 500 multiplicativity checks, with and without the twist.
        for _ in 0..500 {
            let w1 = Word::random(&mut rng, model.num_generators(), 8);
            let w2 = Word::random(&mut rng, model.num_generators(), 8);
            let w12 = w1.mul(&w2);
            if model.eval_rep(&w12, None)
                != model.eval_rep(&w1, None).mul(&model.eval_rep(&w2, None))
            {
                pass = false;
            }
            if model.eval_rep(&w12, Some(&twist))
                != model
                    .eval_rep(&w1, Some(&twist))
                    .mul(&model.eval_rep(&w2, Some(&twist)))
            {
                pass = false;
            }
        }
        // 500 strict-equivalence checks for coboundary twists.
        let adj = model.adjoint();
        let ext = model.small_extension();
        for _ in 0..50 {
            let x = rand_util::random_matrix(&mut rng, adj.modulus(), model.n());
            let f2 = twist.add(&model.coboundary(&x).unwrap());
            let conj = ext.kernel_embed(&x).unwrap();
            let conj_inv = conj.inverse().unwrap();
            for _ in 0..10 {
                let w = Word::random(&mut rng, model.num_generators(), 8);
                let lhs = model.eval_rep(&w, Some(&f2));
                let rhs = conj.mul(&model.eval_rep(&w, Some(&twist))).mul(&conj_inv);
                if lhs != rhs {
                    pass = false;
                }
            }
        }
    }
    report(
        7,
        pass,
        "twisted evaluation is multiplicative and coboundary twists are strictly equivalent",
    );
}

#[test]
fn criterion_08_synthetic_model_image_laws() {
    let mut pass = true;
    for p in [3u64, 5, 7] {
        for n in [2u32, 3] {
            let (model, _) = SyntheticModel::reduced(p, n, 1, 2).unwrap();
            let twist = model.standard_twist().unwrap();
            let image = model.image_module(&twist, DEFAULT_IMAGE_CAP).unwrap();
            let big_m = model.profile().big_m;

            // Galois stability under every assigned character value.
            for u in model.chi_values() {
                if !image.stable_under(&u.reduce(big_m)) {
                    eprintln!("instability at p={p}, n={n}");
                    pass = false;
                }
            }

            // Top-layer contents: the alternating diagonal and lines.
            let phi = model.phi_top(&image);
            let nn = n as usize;
            if !phi.contains(&mu_fp(nn, p)) {
                eprintln!("mu missing at p={p}, n={n}");
                pass = false;
            }
            for (i, j) in alternating_pairs(nn) {
                if !phi.contains(&MatFp::basis(nn, p, i, j)) {
                    eprintln!("line ({i},{j}) missing at p={p}, n={n}");
                    pass = false;
                }
            }

            // The scaled identification, both inclusions.
            let scale = BigUint::from(p).pow(big_m - 1);
            for b in phi.basis_matrices() {
                let entries = b.entries().iter().map(|&v| BigUint::from(v)).collect();
                let lifted =
                    MatZq::from_entries(nn, image.adjoint().modulus().clone(), entries);
                if !image.member(&lifted.scalar_mul(&scale)) {
                    pass = false;
                }
            }
            for g in image.generators() {
                use num_traits::ToPrimitive;
                let reduced = MatFp::from_entries(
                    nn,
                    p,
                    g.entries().iter().map(|v| (v % p).to_u64().unwrap()).collect(),
                );
                if !phi.contains(&reduced) {
                    pass = false;
                }
            }

            // Brute-force cross-check where the coordinate space allows it.
            if p == 3 && n == 2 {
                let gens: Vec<MatZq> = (0..model.num_generators())
                    .map(|g| model.eval_rep(&Word::generator(g), Some(&twist)))
                    .collect();
                let mut group = GeneratedSubgroup::new(gens).unwrap();
                group.enumerate(DEFAULT_ENUM_CAP).unwrap();
                let brute = group.phi_subspace(model.profile().big_n - 1).unwrap();
                if brute != phi {
                    eprintln!("brute-force top layer mismatch at p=3, n=2");
                    pass = false;
                }
            }
        }
    }
    report(
        8,
        pass,
        "image modules are stable, match their top layer under scaling, and contain mu and the alternating lines",
    );
}

#[test]
fn criterion_09_bracket_generation() {
    let mut pass = true;
    for n in 2..=8usize {
        for p in [5u64, 7, 11, 13] {
            let r = generation::verify_sln_generation(n, p);
            if !r.pass || r.steps_to_sln.is_none() || r.steps_to_sln.unwrap() > 4 {
                eprintln!("generation failed at n={n}, p={p}: {r:?}");
                pass = false;
            }
        }
    }
    // Both mu conventions for n = 2.
    for p in [5u64, 7, 11, 13] {
        let alt = vec![
            MatFp::basis(2, p, 0, 0),
            MatFp::basis(2, p, 0, 1),
            MatFp::basis(2, p, 1, 0),
        ];
        pass &= generation::verify_sln_generation_with_seed(2, p, &alt).pass;
        pass &= generation::verify_sln_generation(2, p).pass;
    }
    report(
        9,
        pass,
        "bracket closure reaches sl_n within 4 steps for n in [2,8], p in {5,7,11,13}, both mu conventions",
    );
}

#[test]
fn criterion_10_brute_force_filtration_laws() {
    let md = Modulus::new(3, 4).unwrap();
    let mut rng = SeedSplitter::new(0).stream("acceptance-brute");
    let mut pass = true;
    let cap = 30_000_000; // the full GL_2(Z/3^4) has ~2.55e7 elements
    for idx in 0..100 {
        let a = rand_util::random_invertible(&mut rng, &md, 2);
        let b = rand_util::random_invertible(&mut rng, &md, 2);
        let mut g = GeneratedSubgroup::new(vec![a, b]).unwrap();
        g.enumerate(cap).unwrap();
        // Bracket containment for every valid (i, j).
        for (i, j) in [(1u32, 1u32), (1, 2), (2, 1)] {
            if !g.bracket_containment_check(i, j).unwrap() {
                eprintln!("bracket containment failed at subgroup {idx}, layers ({i},{j})");
                pass = false;
            }
        }
        // Fullness route: if the determinant-one sl layers are full from t
        // on, the group must contain the whole SL congruence kernel at t.
        // (The unrestricted layers do not suffice: corrections drawn from
        // them can drift out of SL; see the frozen counterexample in the
        // generation unit tests.)
        for t in 1..=3u32 {
            let full =
                (t..=3).all(|i| g.phi_subspace_det1(i).map(|s| s.spans_sln()).unwrap_or(false));
            if full && !g.contains_ut(t, cap).unwrap() {
                eprintln!("fullness route failed at subgroup {idx}, t={t}");
                pass = false;
            }
        }
    }
    // The designed kernel generators hit the criterion positively.
    let mut gens = ut_kernel_generators(&md, 2, 1);
    gens.extend(ut_kernel_generators(&md, 2, 2));
    let mut g = GeneratedSubgroup::new(gens).unwrap();
    g.enumerate(cap).unwrap();
    let full = (1..=3u32).all(|i| g.phi_subspace_det1(i).unwrap().spans_sln());
    pass &= full && g.contains_ut(1, cap).unwrap();
    report(
        10,
        pass,
        "bracket containment and the fullness criterion hold on 100 random subgroups of GL_2(Z/3^4)",
    );
}

#[test]
fn criterion_11_end_to_end_determinism() {
    let exe = env!("CARGO_BIN_EXE_gll");
    let run = || {
        std::process::Command::new(exe)
            .args([
                "verify-all", "--p", "7", "--n", "2", "--mode", "reduced", "--m", "1", "--M",
                "2", "--seed", "0",
            ])
            .output()
            .expect("binary runs")
    };
    let first = run();
    let second = run();
    let pass = first.status.code() == Some(0)
        && second.status.code() == Some(0)
        && first.stdout == second.stdout
        && !first.stdout.is_empty();
    report(
        11,
        pass,
        "verify-all --p 7 --n 2 --mode reduced exits 0 with byte-identical reports",
    );
}
