use pmod_core::linalg::{Matrix, Point};
use pmod_core::mappings::MappingSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn catalog() -> Vec<(&'static str, MappingSpec<f64>)> {
    let a = Matrix::new(2, &[2.0, 0.5, -0.3, 1.5]).unwrap();
    let b = Matrix::new(3, &[1.0, 0.2, 0.0, 0.1, 1.3, -0.2, 0.0, 0.4, 0.8]).unwrap();
    vec![
        ("identity", MappingSpec::identity(2)),
        ("scaling", MappingSpec::scaling(3, 2.5).unwrap()),
        ("linear2", MappingSpec::linear(a).unwrap()),
        ("linear3", MappingSpec::linear(b).unwrap()),
        ("radial2", MappingSpec::radial_power(2.0, Point::zeros(2)).unwrap()),
        ("radial_half", MappingSpec::radial_power(0.5, Point::new(&[0.3, -0.2]).unwrap()).unwrap()),
        ("radial3", MappingSpec::radial_power(1.7, Point::zeros(3)).unwrap()),
        ("stretch2", MappingSpec::axis_stretch(2, 0.4).unwrap()),
        ("stretch3", MappingSpec::axis_stretch(3, 0.6).unwrap()),
        (
            "compose",
            MappingSpec::compose(
                MappingSpec::scaling(2, 0.5).unwrap(),
                MappingSpec::radial_power(2.0, Point::zeros(2)).unwrap(),
            )
            .unwrap(),
        ),
    ]
}

/// Random point well inside the mapping's domain and away from its
/// singular locus, so an `h = 1e−5` stencil stays smooth.
fn sample(map: &MappingSpec<f64>, rng: &mut ChaCha8Rng) -> Point<f64> {
    let d = map.domain();
    let n = map.dim();
    loop {
        let coords: Vec<f64> = (0..n)
            .map(|a| {
                let (lo, hi) = (d.lo[a].max(-3.0), d.hi[a].min(3.0));
                lo + (hi - lo) * rng.gen_range(0.05..0.95)
            })
            .collect();
        let x = Point::new(&coords).unwrap();
        // keep clear of the radial centres and of x_n = 0
        let off_centre = n != 2 || (x - Point::new(&[0.3, -0.2]).unwrap()).norm() > 0.05;
        if off_centre && (0..n).all(|a| x[a].abs() > 0.05) {
            return x;
        }
    }
}

#[test]
fn finite_differences_match_analytic_jacobians() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, map) in catalog() {
        for _ in 0..1000 {
            let x = sample(&map, &mut rng);
            let exact = map.jacobian_matrix(&x).unwrap();
            let fd = map.finite_difference_jacobian(&x, 1e-5).unwrap();
            let err = Matrix::from_fn(map.dim(), |i, j| fd.get(i, j) - exact.get(i, j)).max_abs();
            assert!(err <= 1e-6, "{name} at {x:?}: {err}");
        }
    }
}

#[test]
fn jacobians_are_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (name, map) in catalog() {
        for _ in 0..1000 {
            let x = sample(&map, &mut rng);
            let j = map.jacobian_det(&x).unwrap();
            assert!(j > 0.0, "{name} at {x:?}: {j}");
            let det = map.jacobian_matrix(&x).unwrap().determinant().unwrap();
            assert!((det - j).abs() <= 1e-12 * j.abs().max(1.0), "{name}");
        }
    }
}

#[test]
fn inverses_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (name, map) in catalog() {
        let Some(inv) = map.inverse() else { continue };
        for _ in 0..1000 {
            let x = sample(&map, &mut rng);
            let y = map.evaluate(&x).unwrap();
            let back = inv.evaluate(&y).unwrap();
            assert!((back - x).max_abs() <= 1e-10, "{name}: {x:?} -> {back:?}");
        }
    }
}

#[test]
fn radial_power_maps_spheres_to_spheres() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (dim, beta) in [(2, 2.0), (2, 0.5), (3, 1.7), (3, 3.0)] {
        let center = Point::from_fn(dim, |a| 0.1 * a as f64);
        let map = MappingSpec::radial_power(beta, center).unwrap();
        for _ in 0..200 {
            let r = rng.gen_range(0.1..3.0);
            let coords: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut u = Point::new(&coords).unwrap();
            u = u.scale(1.0 / u.norm());
            let y = map.evaluate(&(center + u.scale(r))).unwrap();
            let want = r.powf(beta);
            assert!(((y - center).norm() - want).abs() <= 1e-12 * want.max(1.0), "dim {dim} beta {beta} r {r}");
            let (c, rr) = map.sphere_image(&center, r).unwrap();
            assert_eq!(c, center);
            assert!((rr - want).abs() <= 1e-12 * want);
        }
    }
}

#[test]
fn points_outside_domain_are_rejected() {
    let map = MappingSpec::axis_stretch(2, 0.4).unwrap();
    assert!(map.evaluate(&Point::new(&[0.5, 1.5]).unwrap()).is_err());
    assert!(map.evaluate(&Point::new(&[0.5, 0.0]).unwrap()).is_err());
    assert!(map.finite_difference_jacobian(&Point::new(&[0.5, 1e-7]).unwrap(), 1e-5).is_err());
}
