use bergspec::gamma::{build_gamma_sequence, GammaEngine, GammaOptions};
use bergspec::lattice::{
    enumerate_labels, enumerate_multi_indices, group_norms, FiberLabel, MultiIndex, Partition,
};
use bergspec::special::ln_gamma;
use bergspec::symbol::{Profile, SymbolClass, SymbolSpec, Term};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn part(v: &[usize]) -> Partition {
    Partition::new(v.to_vec()).unwrap()
}

/// Quasi-radial gamma of `prod rho_j^{p_j}` written out from the Dirichlet integral.
fn monomial_gamma(k: &[usize], p: &[f64], lambda: f64, s: &[u32]) -> f64 {
    let n: usize = k.iter().sum();
    let total_s: f64 = s.iter().map(|&x| x as f64).sum();
    let total_p: f64 = p.iter().sum();
    let mut ln = ln_gamma(n as f64 + total_s + lambda + 1.0)
        - ln_gamma(n as f64 + total_s + total_p + lambda + 1.0);
    for j in 0..k.len() {
        let b = s[j] as f64 + k[j] as f64;
        ln += ln_gamma(b + p[j]) - ln_gamma(b);
    }
    ln.exp()
}

fn random_terms(rng: &mut ChaCha8Rng, arity: usize, count: usize, max_exp: u32) -> Profile {
    let terms = (0..count)
        .map(|_| Term {
            coef: rng.random_range(0.1..2.0),
            exponents: (0..arity)
                .map(|_| rng.random_range(0..=max_exp) as f64)
                .collect(),
        })
        .collect();
    Profile::polynomial(arity, terms).unwrap()
}

#[test]
fn dirichlet_oracle_for_random_monomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let quad = GammaEngine::new(GammaOptions {
        force_quadrature: true,
        ..GammaOptions::default()
    });
    let closed = GammaEngine::default();
    let partitions = [
        part(&[1]),
        part(&[2]),
        part(&[1, 1]),
        part(&[2, 1]),
        part(&[1, 2, 1]),
        part(&[1, 1, 1, 1]),
    ];
    let mut worst = 0.0f64;
    for case in 0..100 {
        let k = &partitions[case % partitions.len()];
        let lambda = [0.0, 0.5, 1.0, 2.5, -0.5][case % 5];
        let p: Vec<f64> = (0..k.m())
            .map(|_| {
                if rng.random_bool(0.5) {
                    rng.random_range(0..=6) as f64
                } else {
                    rng.random_range(0.0..5.0)
                }
            })
            .collect();
        let a = SymbolSpec::quasi_radial(k.clone(), Profile::monomial(p.clone())).unwrap();
        let s = FiberLabel::new((0..k.m()).map(|_| rng.random_range(0..=5)).collect());
        let want = monomial_gamma(k.blocks(), &p, lambda, s.entries());
        let g_quad = quad.quasi_radial(&a, lambda, &s).unwrap();
        let g_closed = closed.quasi_radial(&a, lambda, &s).unwrap();
        for g in [g_quad, g_closed] {
            let rel = (g - want).abs() / want.abs();
            worst = worst.max(rel);
            assert!(
                rel < 1e-10,
                "k={k} p={p:?} lambda={lambda} s={s}: {g} vs {want}"
            );
        }
    }
    assert!(worst < 1e-10);
}

#[test]
fn classes_agree_where_they_overlap() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for lambda in [0.0, 1.0, 2.5] {
        // radial is quasi-radial on (n)
        for n in 1..=4 {
            let f = random_terms(&mut rng, 1, 3, 4);
            let r = SymbolSpec::radial(n, f.clone()).unwrap();
            let q = SymbolSpec::quasi_radial(Partition::radial(n).unwrap(), f).unwrap();
            for ell in 0..=6 {
                let a = bergspec::gamma::gamma_radial(&r, lambda, ell).unwrap();
                let b =
                    bergspec::gamma::gamma_quasi_radial(&q, lambda, &FiberLabel::new(vec![ell]))
                        .unwrap();
                assert!((a - b).abs() < 1e-13 * a.abs());
            }
        }
        // separately radial is quasi-radial on (1,...,1)
        for n in 1..=3 {
            let f = random_terms(&mut rng, n, 3, 3);
            let sr = SymbolSpec::separately_radial(n, f.clone()).unwrap();
            let q = SymbolSpec::quasi_radial(Partition::separate(n).unwrap(), f).unwrap();
            for alpha in enumerate_multi_indices(n, 4).unwrap() {
                let a = bergspec::gamma::gamma_separately_radial(&sr, lambda, &alpha).unwrap();
                let b = bergspec::gamma::gamma_quasi_radial(
                    &q,
                    lambda,
                    &FiberLabel::new(alpha.entries().to_vec()),
                )
                .unwrap();
                assert!((a - b).abs() < 1e-13 * a.abs());
            }
        }
        // degenerate is quasi-radial with a profile that ignores the last block
        for k in [
            part(&[1, 1]),
            part(&[2, 1]),
            part(&[1, 2]),
            part(&[1, 1, 2]),
        ] {
            let kp = k.without_last().unwrap();
            let f = random_terms(&mut rng, kp.m(), 3, 3);
            let d = SymbolSpec::degenerate(&kp, k.blocks()[k.m() - 1], f.clone()).unwrap();
            let Profile::Polynomial { terms, .. } = f else {
                unreachable!()
            };
            let padded = terms
                .into_iter()
                .map(|mut t| {
                    t.exponents.push(0.0);
                    t
                })
                .collect();
            let q =
                SymbolSpec::quasi_radial(k.clone(), Profile::polynomial(k.m(), padded).unwrap())
                    .unwrap();
            for alpha in enumerate_multi_indices(k.n(), 4).unwrap() {
                let a = bergspec::gamma::gamma_degenerate(&d, lambda, &alpha).unwrap();
                let s = group_norms(&alpha, &k).unwrap();
                let b = bergspec::gamma::gamma_quasi_radial(&q, lambda, &s).unwrap();
                assert!(
                    (a - b).abs() < 1e-12 * a.abs(),
                    "k={k} alpha={alpha}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn weighted_values_ignore_the_last_block() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..50 {
        let k = [
            part(&[1, 1]),
            part(&[2, 1]),
            part(&[1, 2]),
            part(&[1, 1, 1]),
            part(&[2, 2]),
        ][case % 5]
            .clone();
        let kp = k.without_last().unwrap();
        let lambda = [0.0, 1.0, 2.5][case % 3];
        let f = random_terms(&mut rng, kp.m(), 3, 4);
        let a = SymbolSpec::weighted(&kp, k.blocks()[k.m() - 1], f.clone()).unwrap();
        let gs = build_gamma_sequence(&a, lambda, 8).unwrap();
        let on_small_ball = SymbolSpec::quasi_radial(kp.clone(), f).unwrap();
        for (s, g) in gs.iter() {
            let head = FiberLabel::new(s.entries()[..kp.m()].to_vec());
            let base = gs
                .get(&FiberLabel::new([head.entries(), &[0]].concat()))
                .unwrap();
            assert_eq!(g.to_bits(), base.to_bits(), "k={k} s={s}");
            let small = bergspec::gamma::gamma_quasi_radial(&on_small_ball, lambda, &head).unwrap();
            assert!((g - small).abs() < 1e-13 * small.abs());
        }
        assert!(gs.is_flat_in_last(0.0));
    }
}

#[test]
fn positive_profiles_give_positive_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in Partition::all_of(3) {
        for lambda in [-0.5, 0.0, 3.0] {
            let a =
                SymbolSpec::quasi_radial(k.clone(), random_terms(&mut rng, k.m(), 4, 5)).unwrap();
            let gs = build_gamma_sequence(&a, lambda, 6).unwrap();
            assert!(gs.iter().all(|(_, g)| g > 0.0));
            let e = SymbolSpec::quasi_radial(
                k.clone(),
                Profile::callable("exp", k.m(), |rho| (-rho.iter().sum::<f64>()).exp()),
            )
            .unwrap();
            let ge = build_gamma_sequence(&e, lambda, 4).unwrap();
            for (_, g) in ge.iter() {
                assert!(g > (-1.0f64).exp() - 1e-12 && g <= 1.0 + 1e-12);
            }
        }
    }
}

#[test]
fn gamma_is_linear_in_the_symbol() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in [part(&[1, 2]), part(&[3]), part(&[1, 1, 1])] {
        let a = SymbolSpec::quasi_radial(k.clone(), random_terms(&mut rng, k.m(), 2, 3)).unwrap();
        let b = SymbolSpec::quasi_radial(k.clone(), random_terms(&mut rng, k.m(), 2, 3)).unwrap();
        let (c1, c2) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let ab = a.combine(c1, &b, c2).unwrap();
        let (ga, gb, gab) = (
            build_gamma_sequence(&a, 1.5, 6).unwrap(),
            build_gamma_sequence(&b, 1.5, 6).unwrap(),
            build_gamma_sequence(&ab, 1.5, 6).unwrap(),
        );
        for s in enumerate_labels(k.m(), 6) {
            let want = c1 * ga.get(&s).unwrap() + c2 * gb.get(&s).unwrap();
            assert!((gab.get(&s).unwrap() - want).abs() < 1e-12 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn identity_symbol_for_every_class() {
    for n in 1..=4 {
        for k in Partition::all_of(n) {
            let mut classes = vec![SymbolClass::QuasiRadial];
            if k.m() == 1 {
                classes.push(SymbolClass::Radial);
            }
            if k.blocks().iter().all(|&b| b == 1) {
                classes.push(SymbolClass::SeparatelyRadial);
            }
            if k.m() >= 2 {
                classes.extend([
                    SymbolClass::WeightedQuasiRadial,
                    SymbolClass::DegenerateQuasiRadial,
                ]);
            }
            for class in classes {
                let one = SymbolSpec::constant(class, k.clone(), 1.0).unwrap();
                for lambda in [0.0, 1.0, 2.5] {
                    let gs = build_gamma_sequence(&one, lambda, 8).unwrap();
                    for (s, g) in gs.iter() {
                        assert!(
                            (g - 1.0).abs() < 1e-11,
                            "{class} k={k} lambda={lambda} s={s}: {g}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn prefactor_stays_stable_at_high_degree() {
    // |alpha| = 150: the gamma ratios overflow if formed directly
    for k in [part(&[2]), part(&[1, 1]), part(&[2, 1])] {
        let one = SymbolSpec::constant(SymbolClass::QuasiRadial, k.clone(), 1.0).unwrap();
        let p: Vec<f64> = vec![1.0; k.m()];
        let mono = SymbolSpec::quasi_radial(k.clone(), Profile::monomial(p.clone())).unwrap();
        let mut s = vec![0u32; k.m()];
        s[0] = 100;
        s[k.m() - 1] += 50;
        let s = FiberLabel::new(s);
        let g1 = bergspec::gamma::gamma_quasi_radial(&one, 0.5, &s).unwrap();
        assert!((g1 - 1.0).abs() < 1e-11);
        let g = bergspec::gamma::gamma_quasi_radial(&mono, 0.5, &s).unwrap();
        let want = monomial_gamma(k.blocks(), &p, 0.5, s.entries());
        assert!(g.is_finite() && (g - want).abs() < 1e-10 * want);
    }
    let d = SymbolSpec::degenerate(&part(&[1]), 2, Profile::monomial(vec![2.0])).unwrap();
    let g = bergspec::gamma::gamma_degenerate(&d, 1.0, &MultiIndex::new(vec![80, 40, 30])).unwrap();
    assert!(g.is_finite() && g > 0.0 && g < 1.0);
}
