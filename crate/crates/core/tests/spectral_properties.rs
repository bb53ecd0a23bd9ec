use std::collections::BTreeMap;

use bergspec::bergman::{BasisElement, WeightedSpaceParams};
use bergspec::gamma::build_gamma_sequence;
use bergspec::lattice::{
    enumerate_labels, enumerate_multi_indices, fiber_dimension, group_norms, truncation_size,
    FiberLabel, Partition,
};
use bergspec::oracle::BallQuadrature;
use bergspec::spectral::{
    commutator_norm_vs_matrix, compactness_classify, diagonal_from_gamma, equivariance_residual,
    functional_calculus, indicator, joint_spectrum, lift, random_block_unitary, refinement_check,
    representation_matrix, rotation_operator, CompactnessVerdict, DiagonalOperator,
};
use bergspec::symbol::{Profile, SymbolSpec, Term};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn part(v: &[usize]) -> Partition {
    Partition::new(v.to_vec()).unwrap()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn random_operator(rng: &mut ChaCha8Rng, k: &Partition, lambda: f64, cap: u32) -> DiagonalOperator {
    let values: BTreeMap<FiberLabel, Complex64> = enumerate_labels(k.m(), cap)
        .into_iter()
        .map(|s| {
            (
                s,
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    DiagonalOperator::new(k.clone(), lambda, cap, values).unwrap()
}

fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values().max()
}

#[test]
fn functional_calculus_is_a_homomorphism() {
    let k = part(&[1, 2]);
    let (lambda, cap) = (0.5, 5);
    let psi = |s: &FiberLabel| c(1.0 + s.entries()[0] as f64 * 0.5 - s.entries()[1] as f64);
    let phi =
        |s: &FiberLabel| Complex64::new(s.total() as f64, 1.0 / (1.0 + s.entries()[1] as f64));
    let a = functional_calculus(psi, &k, lambda, cap).unwrap();
    let b = functional_calculus(phi, &k, lambda, cap).unwrap();
    let prod = functional_calculus(|s| psi(s) * phi(s), &k, lambda, cap).unwrap();
    assert!(a.compose(&b).unwrap().max_difference(&prod).unwrap() < 1e-15);
    let sum = functional_calculus(|s| psi(s) + phi(s) * 2.0, &k, lambda, cap).unwrap();
    assert!(
        a.add(&b.scale(c(2.0)))
            .unwrap()
            .max_difference(&sum)
            .unwrap()
            < 1e-15
    );
    let conj = functional_calculus(|s| phi(s).conj(), &k, lambda, cap).unwrap();
    assert!(b.adjoint().max_difference(&conj).unwrap() < 1e-15);
    // and it agrees with matrix products
    let mab = a.to_matrix().unwrap() * b.to_matrix().unwrap();
    assert!((mab - prod.to_matrix().unwrap()).camax() < 1e-14);
    // rotations generate the calculus
    let v1 = rotation_operator(1, &k, lambda, cap).unwrap();
    let v2 = rotation_operator(2, &k, lambda, cap).unwrap();
    let poly = functional_calculus(
        |s| c((s.entries()[0] * s.entries()[1]) as f64),
        &k,
        lambda,
        cap,
    )
    .unwrap();
    assert!(v1.compose(&v2).unwrap().max_difference(&poly).unwrap() < 1e-15);
    assert!(rotation_operator(3, &k, lambda, cap).is_err());
}

#[test]
fn norm_equals_sup_over_the_joint_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in [part(&[2]), part(&[1, 1]), part(&[2, 1])] {
        let t = random_operator(&mut rng, &k, 1.0, 4);
        let sup = t.values().values().map(|v| v.norm()).fold(0.0, f64::max);
        assert!((t.norm() - sup).abs() < 1e-15);
        assert!((op_norm(&t.to_matrix().unwrap()) - sup).abs() < 1e-12);
    }
}

#[test]
fn fiber_indicators_are_orthogonal_projections() {
    let k = part(&[2, 1]);
    let cap = 4;
    let spectrum = joint_spectrum(&k, cap).unwrap();
    assert_eq!(
        spectrum.total_multiplicity(),
        truncation_size(3, cap).unwrap()
    );
    assert!(DiagonalOperator::new(k.clone(), 0.0, cap, BTreeMap::new()).is_err());
    let mut sum = functional_calculus(|_| c(0.0), &k, 0.0, cap).unwrap();
    for (s, dim) in &spectrum.atoms {
        assert_eq!(*dim, fiber_dimension(&k, s).unwrap());
        let p = indicator(s, &k, 0.0, cap).unwrap();
        assert!(p.compose(&p).unwrap().max_difference(&p).unwrap() == 0.0);
        assert!(p.adjoint().max_difference(&p).unwrap() == 0.0);
        let trace: f64 = p.to_matrix().unwrap().diagonal().iter().map(|z| z.re).sum();
        assert_eq!(trace as u64, *dim);
        sum = sum.add(&p).unwrap();
    }
    let id = DiagonalOperator::identity(k.clone(), 0.0, cap).unwrap();
    assert_eq!(sum.max_difference(&id).unwrap(), 0.0);
    assert!(indicator(&FiberLabel::new(vec![5, 0]), &k, 0.0, cap).is_err());
}

#[test]
fn truncation_is_consistent_across_caps() {
    let k = part(&[1, 1, 1]);
    let a = SymbolSpec::quasi_radial(k.clone(), Profile::monomial(vec![1.0, 0.5, 2.0])).unwrap();
    let small = build_gamma_sequence(&a, 2.0, 4).unwrap();
    let big = build_gamma_sequence(&a, 2.0, 7).unwrap();
    for (s, g) in small.iter() {
        assert_eq!(g.to_bits(), big.get(s).unwrap().to_bits());
    }
    let t_small = diagonal_from_gamma(&small).unwrap().to_matrix().unwrap();
    let t_big = diagonal_from_gamma(&big).unwrap().to_matrix().unwrap();
    let d = t_small.nrows();
    assert_eq!(t_big.view((0, 0), (d, d)).clone_owned(), t_small);
}

#[test]
fn operators_commute_with_block_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=3 {
        for k in Partition::all_of(n) {
            for _ in 0..20 {
                let u = random_block_unitary(&k, &mut rng);
                let t = random_operator(&mut rng, &k, 1.0, 3);
                let r = equivariance_residual(&t, &u, &k, 1.0, 3).unwrap();
                assert!(r < 1e-9, "{k}: {r}");
            }
        }
    }
}

#[test]
fn representation_is_unitary_and_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let k = part(&[2, 1]);
    let (u, v) = (
        random_block_unitary(&k, &mut rng),
        random_block_unitary(&k, &mut rng),
    );
    let (pu, pv) = (
        representation_matrix(&u, &k, 0.5, 3).unwrap(),
        representation_matrix(&v, &k, 0.5, 3).unwrap(),
    );
    let puv = representation_matrix(&(&u * &v), &k, 0.5, 3).unwrap();
    assert!((&pu * &pv - puv).camax() < 1e-12);
    let id = DMatrix::<Complex64>::identity(pu.nrows(), pu.ncols());
    assert!((pu.adjoint() * &pu - id).camax() < 1e-12);

    // a unitary mixing blocks is not in U(k): T no longer commutes
    let full = random_block_unitary(&part(&[3]), &mut rng);
    let t = rotation_operator(1, &k, 0.5, 3).unwrap();
    assert!(
        equivariance_residual(&t, &full, &k, 0.5, 3).is_err() || {
            let p = representation_matrix(&full, &part(&[3]), 0.5, 3).unwrap();
            let m = t.to_matrix().unwrap();
            (&m * &p - &p * &m).camax() > 1e-3
        }
    );
}

#[test]
fn rotation_operators_are_block_phase_generators() {
    // d/dtheta e_alpha(.., e^{i theta} z_(j), ..) at 0 equals i |alpha_(j)| e_alpha(z)
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let k = part(&[1, 2]);
    let params = WeightedSpaceParams::new(3, 1.0).unwrap();
    let basis = enumerate_multi_indices(3, 5).unwrap();
    let h = 1e-5;
    for _ in 0..20 {
        let alpha = basis[rng.random_range(0..basis.len())].clone();
        let e = BasisElement::new(params, alpha.clone()).unwrap();
        let z: Vec<Complex64> = (0..3)
            .map(|_| Complex64::from_polar(rng.random_range(0.0..0.55), rng.random_range(0.0..6.3)))
            .collect();
        let s = group_norms(&alpha, &k).unwrap();
        for j in 0..k.m() {
            let rotate = |theta: f64| {
                let mut w = z.clone();
                for i in k.block_range(j) {
                    w[i] *= Complex64::from_polar(1.0, theta);
                }
                e.eval(&w).unwrap()
            };
            let derivative = (rotate(h) - rotate(-h)) / (2.0 * h);
            let v = rotation_operator(j + 1, &k, 1.0, 5)
                .unwrap()
                .value(&s)
                .unwrap();
            let want = Complex64::i() * v * e.eval(&z).unwrap();
            assert!(
                (derivative - want).norm() < 1e-6 * (1.0 + want.norm()),
                "{alpha} j={j}"
            );
        }
    }
}

#[test]
fn commuting_symbols_commute_as_matrices() {
    let k = part(&[1, 1]);
    let a = SymbolSpec::quasi_radial(k.clone(), Profile::monomial(vec![1.0, 0.0])).unwrap();
    let b = SymbolSpec::quasi_radial(k.clone(), Profile::monomial(vec![0.0, 2.0])).unwrap();
    let tensor =
        commutator_norm_vs_matrix(&a, &b, 0.0, 3, &BallQuadrature::for_degree(2, 3).unwrap())
            .unwrap();
    assert!(tensor < 1e-12);
    let w = SymbolSpec::weighted(&part(&[1]), 1, Profile::monomial(vec![1.0])).unwrap();
    let d = SymbolSpec::degenerate(&part(&[1]), 1, Profile::monomial(vec![2.0])).unwrap();
    assert!(
        commutator_norm_vs_matrix(&w, &d, 1.0, 3, &BallQuadrature::for_degree(2, 3).unwrap())
            .unwrap()
            < 1e-12
    );

    let q = BallQuadrature::monte_carlo(2, 7, 100_000).unwrap();
    let mc = commutator_norm_vs_matrix(&a, &b, 0.0, 2, &q).unwrap();
    assert!(mc < q.tolerance(), "{mc}");
    let other = SymbolSpec::radial(2, Profile::univariate(&[0.0, 1.0])).unwrap();
    assert!(commutator_norm_vs_matrix(&a, &other, 0.0, 2, &q).is_err());
}

fn one_minus_r2(n: usize) -> SymbolSpec {
    SymbolSpec::radial(n, Profile::univariate(&[1.0, -1.0])).unwrap()
}

#[test]
fn compactness_of_one_minus_r_squared() {
    for n in 1..=3 {
        for lambda in [0.0, 1.0, 2.5] {
            let cap = 20;
            let gs = build_gamma_sequence(&one_minus_r2(n), lambda, cap).unwrap();
            let r = compactness_classify(&gs, 4).unwrap();
            assert_eq!(r.verdict, CompactnessVerdict::Decaying);
            let want = (lambda + 1.0) / (n as f64 + cap as f64 + lambda + 1.0);
            assert!(
                (r.shell_max - want).abs() < 1e-12,
                "n={n} lambda={lambda}: {} vs {want}",
                r.shell_max
            );
            assert!(!r.alpha_dprime_flat);
        }
    }
    let one = build_gamma_sequence(
        &SymbolSpec::radial(2, Profile::constant(1, 1.0)).unwrap(),
        0.0,
        10,
    )
    .unwrap();
    assert_eq!(
        compactness_classify(&one, 4).unwrap().verdict,
        CompactnessVerdict::NonDecaying
    );
    assert!(compactness_classify(&one, 11).is_err());
}

#[test]
fn weighted_sequences_are_flat_in_the_last_label() {
    let w = SymbolSpec::weighted(&part(&[1, 1]), 1, Profile::monomial(vec![1.0, 1.0])).unwrap();
    let gs = build_gamma_sequence(&w, 0.5, 10).unwrap();
    let r = compactness_classify(&gs, 4).unwrap();
    assert!(r.alpha_dprime_flat);
    assert_eq!(r.verdict, CompactnessVerdict::AlphaDprimeFlat);
    assert_eq!(r.verdict.name(), "alpha-dprime-flat");
}

#[test]
fn lifting_and_refinement() {
    let coarse = part(&[2]);
    let fine = part(&[1, 1]);
    let radial = build_gamma_sequence(&one_minus_r2(2), 0.0, 6).unwrap();
    let lifted = lift(&radial, &fine).unwrap();
    assert!(refinement_check(&lifted, &coarse, 1e-14).unwrap());
    let direct = build_gamma_sequence(
        &SymbolSpec::quasi_radial(
            fine.clone(),
            Profile::polynomial(
                2,
                vec![
                    Term {
                        coef: 1.0,
                        exponents: vec![0.0, 0.0],
                    },
                    Term {
                        coef: -1.0,
                        exponents: vec![1.0, 0.0],
                    },
                    Term {
                        coef: -1.0,
                        exponents: vec![0.0, 1.0],
                    },
                ],
            )
            .unwrap(),
        )
        .unwrap(),
        0.0,
        6,
    )
    .unwrap();
    for (s, g) in direct.iter() {
        assert!((g - lifted.get(s).unwrap()).abs() < 1e-13);
    }
    let r1 = build_gamma_sequence(
        &SymbolSpec::quasi_radial(fine.clone(), Profile::monomial(vec![1.0, 0.0])).unwrap(),
        0.0,
        6,
    )
    .unwrap();
    assert!(!refinement_check(&r1, &coarse, 1e-9).unwrap());
}
