use std::f64::consts::PI;

use pmod_core::moduli::{
    annulus_curve_module, annulus_sphere_module, lemma_infimum, lower_criterion_integral, ring_criterion_bound,
    ring_module, transfer_parameters, ziemer_dual, DiscreteMeasureSpace, RingSpec, Weight,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn ring_module_scaling_law(n in 2usize..=3, p in 1.05..6.0f64, a in 0.1..2.0f64, w in 1.05..5.0f64) {
        prop_assume!((p - n as f64).abs() > 1e-3);
        let b = a * w;
        let base = ring_module(n, p, a, b).unwrap();
        for lambda in [0.5, 2.0, 10.0] {
            let scaled = ring_module(n, p, lambda * a, lambda * b).unwrap();
            let want = lambda.powf(n as f64 - p) * base;
            prop_assert!(rel(scaled, want) <= 1e-12, "lambda {lambda}: {scaled} vs {want}");
        }
    }

    // near p = 1 the far sphere's contribution drops below rounding
    #[test]
    fn ring_module_is_monotone(n in 2usize..=3, p in 1.2..6.0f64, a in 0.1..2.0f64, w in 1.05..5.0f64) {
        prop_assume!((p - n as f64).abs() > 1e-3);
        let b = a * w;
        let m = ring_module(n, p, a, b).unwrap();
        prop_assert!(m > 0.0);
        prop_assert!(ring_module(n, p, a, b * 1.01).unwrap() < m);
        prop_assert!(ring_module(n, p, a * 1.01, b).unwrap() > m);
    }

    #[test]
    fn duality_roundtrip(n in 2usize..=3, p in 1.05..6.0f64, m in 1e-3..1e3f64) {
        let d = ziemer_dual(n, p, m).unwrap();
        // inverse parameter map: p = α/(α − n + 1), M_p = M_α^{−(p−1)}
        let nm1 = (n - 1) as f64;
        let p_back = d.alpha_dual / (d.alpha_dual - nm1);
        let m_back = d.mod_alpha.powf(-(p_back - 1.0));
        prop_assert!(rel(p_back, p) <= 1e-12);
        prop_assert!(rel(m_back, m) <= 1e-12, "{m_back} vs {m}");
        if n == 2 {
            let dd = ziemer_dual(n, d.alpha_dual, d.mod_alpha).unwrap();
            prop_assert!(rel(dd.alpha_dual, p) <= 1e-12);
            prop_assert!(rel(dd.mod_alpha, m) <= 1e-12);
        }
    }

    #[test]
    fn conformal_sphere_module_is_curve_dual(n in 2usize..=3, a in 0.1..2.0f64, w in 1.05..5.0f64) {
        let p = n as f64;
        let curves = annulus_curve_module(n, p, a, a * w).unwrap();
        let d = ziemer_dual(n, p, curves).unwrap();
        let spheres = annulus_sphere_module(n, d.alpha_dual, a, a * w).unwrap();
        prop_assert!(rel(spheres, d.mod_alpha) <= 1e-10, "{spheres} vs {}", d.mod_alpha);
    }
}

fn random_space(rng: &mut ChaCha8Rng) -> DiscreteMeasureSpace<f64> {
    let atoms = rng.gen_range(2..=6);
    let alpha = [1.5, 2.0, 3.0][rng.gen_range(0..3)];
    let phi = (0..atoms).map(|_| rng.gen_range(0.1..5.0)).collect();
    let mu = (0..atoms).map(|_| rng.gen_range(0.1..2.0)).collect();
    DiscreteMeasureSpace::new(phi, mu, alpha).unwrap()
}

#[test]
fn lemma_infimum_beats_random_feasible_metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let space = random_space(&mut rng);
        let best = lemma_infimum(&space);
        assert!((space.constraint(&best.extremal_rho) - 1.0).abs() <= 1e-12);
        assert!(rel(space.objective(&best.extremal_rho), best.value) <= 1e-12);
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..space.mu().len()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let total: f64 = raw.iter().zip(space.mu()).map(|(r, m)| r * m).sum();
            let rho: Vec<f64> = raw.iter().map(|r| r / total).collect();
            assert!(space.objective(&rho) >= best.value * (1.0 - 1e-12));
        }
    }
}

#[test]
fn lemma_extremal_is_strict_under_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let space = random_space(&mut rng);
        let best = lemma_infimum(&space);
        let mu = space.mu();
        for i in 0..mu.len() {
            for j in 0..mu.len() {
                if i == j {
                    continue;
                }
                for d in [1e-3, -1e-3] {
                    // shift mass d between atoms i and j, keeping Σρμ = 1
                    let mut rho = best.extremal_rho.clone();
                    rho[i] += d / mu[i];
                    rho[j] -= d / mu[j];
                    if rho.iter().any(|r| *r < 0.0) {
                        continue;
                    }
                    assert!(space.objective(&rho) > best.value, "atom pair ({i},{j}) d={d}");
                }
            }
        }
    }
}

#[test]
fn ring_criterion_with_unit_weight_is_ring_module() {
    for (n, p) in [(2, 1.5), (3, 2.0), (3, 2.5)] {
        for (r1, r2) in [(1.0, 2.0), (0.5, 3.0)] {
            let ring = RingSpec::centered(n, r1, r2).unwrap();
            let got = ring_criterion_bound(&ring, p, &Weight::constant(1.0).unwrap()).unwrap();
            let want = ring_module(n, p, r1, r2).unwrap();
            assert!(rel(got.bound, want) <= 1e-10, "({n},{p}) {} vs {want}", got.bound);
            assert!((got.eta0_mass().unwrap() - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn lower_criterion_with_unit_weight_is_circle_module() {
    for (r1, r2) in [(1.0, std::f64::consts::E), (1.0, 2.0), (0.3, 4.0)] {
        let ring = RingSpec::centered(2, r1, r2).unwrap();
        let lower = lower_criterion_integral(&ring, 2.0, &Weight::constant(1.0).unwrap()).unwrap();
        let curves = annulus_curve_module(2, 2.0, r1, r2).unwrap();
        let dual = ziemer_dual(2, 2.0, curves).unwrap();
        assert!(rel(lower.value, dual.mod_alpha) <= 1e-10, "{} vs {}", lower.value, dual.mod_alpha);
    }
}

#[test]
fn transfer_chain_for_radial_powers() {
    let (r1, r2) = (1.0f64, 2.0f64);
    let ring = RingSpec::centered(2, r1, r2).unwrap();
    for beta in [0.5, 2.0, 3.0] {
        let q = Weight::constant(1.0 / beta).unwrap();
        let lower = lower_criterion_integral(&ring, 2.0, &q).unwrap();
        // image circles fill the annulus (r1^β, r2^β)
        let image_circles = annulus_sphere_module(2, 2.0, r1.powf(beta), r2.powf(beta)).unwrap();
        assert!(rel(lower.value, image_circles) <= 1e-9, "beta {beta}");

        let t = transfer_parameters(2, 2.0).unwrap();
        let q_tilde = q.powf(t.q_tilde_exponent());
        let upper = ring_criterion_bound(&ring, t.alpha_tilde, &q_tilde).unwrap();
        let image_curves = annulus_curve_module(2, t.alpha_tilde, r1.powf(beta), r2.powf(beta)).unwrap();
        assert!(rel(upper.bound, image_curves) <= 1e-9, "beta {beta}");
        assert!(rel(image_curves, 2.0 * PI / (beta * (r2 / r1).ln())) <= 1e-12);
    }
}
