//! One-dimensional and spherical quadrature rules.

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::scalar::Scalar;

/// Default relative tolerance for radial integrals.
pub const RADIAL_REL_TOL: f64 = 1e-10;
const MAX_DEPTH: usize = 40;

/// Trapezoid nodes on a circle.
pub const CIRCLE_NODES: usize = 256;
/// Gauss–Legendre nodes in the polar variable on S².
pub const SPHERE_LATITUDE_NODES: usize = 64;
/// Trapezoid nodes in longitude on S².
pub const SPHERE_LONGITUDE_NODES: usize = 128;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Newton in f64 from the Chebyshev-like initial guess, then cast.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Adaptive Simpson on `[a, b]` with interval bisection.
///
/// The tolerance is relative to the magnitude of the integral. A non-finite
/// integrand value inside the interval propagates to the result (an infinite
/// integral), while a non-finite value at an endpoint switches to a graded
/// change of variables that never evaluates the endpoint itself.
pub fn adaptive_simpson<T: Scalar>(f: impl Fn(T) -> T, a: T, b: T, rel_tol: T) -> T {
    if a == b {
        return T::zero();
    }
    let fa = f(a);
    let fb = f(b);
    if !fa.is_finite() || !fb.is_finite() {
        return graded_simpson(&f, a, b, rel_tol, !fa.is_finite(), !fb.is_finite());
    }
    simpson_driver(&f, a, b, fa, fb, rel_tol)
}

fn simpson_driver<T: Scalar>(f: &impl Fn(T) -> T, a: T, b: T, fa: T, fb: T, rel_tol: T) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let fm = f(m);
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    if !whole.is_finite() {
        return whole;
    }
    // A coarse composite estimate sets the absolute scale of the tolerance.
    let scale = {
        let k = 16;
        let h = (b - a) / T::from_usize_lossy(k);
        let mut s = T::zero();
        for i in 0..k {
            let x0 = a + h * T::from_usize_lossy(i);
            s = s + f(x0 + h / two).abs() * h;
        }
        s.max(whole.abs())
    };
    if !scale.is_finite() {
        return scale;
    }
    let tol = (rel_tol * scale).max(T::min_positive_value());
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<T: Scalar>(f: &impl Fn(T) -> T, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: usize) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let six = T::lit(6.0);
    let left = (m - a) / six * (fa + T::lit(4.0) * flm + fm);
    let right = (b - m) / six * (fm + T::lit(4.0) * frm + fb);
    let both = left + right;
    if !both.is_finite() {
        return both;
    }
    let delta = both - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return both + delta / T::lit(15.0);
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / two, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
}

fn graded_simpson<T: Scalar>(f: &impl Fn(T) -> T, a: T, b: T, rel_tol: T, sing_a: bool, sing_b: bool) -> T {
    // x = a + (b - a) φ(t) with φ(t) = t⁴ near a singular endpoint; the
    // Jacobian φ'(t) vanishes there, so the endpoint term is taken as 0.
    let g = T::lit(4.0);
    let len = b - a;
    let half = T::lit(0.5);
    let eval = |t: T| -> T {
        let (phi, dphi) = match (sing_a, sing_b) {
            (true, false) => (t.powf(g), g * t.powf(g - T::one())),
            (false, true) => {
                let u = T::one() - t;
                (T::one() - u.powf(g), g * u.powf(g - T::one()))
            }
            _ => {
                // Both ends: map [0,1/2] and [1/2,1] symmetrically.
                if t <= half {
                    let u = t / half;
                    (half * u.powf(g), g * u.powf(g - T::one()))
                } else {
                    let u = (T::one() - t) / half;
                    (T::one() - half * u.powf(g), g * u.powf(g - T::one()))
                }
            }
        };
        if dphi == T::zero() {
            return T::zero();
        }
        f(a + len * phi) * len * dphi
    };
    let fa = eval(T::zero());
    let fb = eval(T::one());
    simpson_driver(&eval, T::zero(), T::one(), fa, fb, rel_tol)
}

/// Surface area of the unit sphere Sⁿ⁻¹ ⊂ ℝⁿ, ωₙ₋₁ = n·Ωₙ.
pub fn unit_sphere_area<T: Scalar>(n: usize) -> T {
    T::from_usize_lossy(n) * unit_ball_volume::<T>(n)
}

/// Volume of the unit ball in ℝⁿ, Ωₙ = π^{n/2} / Γ(n/2 + 1).
pub fn unit_ball_volume<T: Scalar>(n: usize) -> T {
    let half_n = T::from_usize_lossy(n) / T::lit(2.0);
    T::PI().powf(half_n) / gamma_half_integer::<T>(n + 2)
}

/// Γ(m/2) for a positive integer m, by Γ(x+1) = xΓ(x) from Γ(1) = 1, Γ(1/2) = √π.
pub fn gamma_half_integer<T: Scalar>(m: usize) -> T {
    assert!(m >= 1);
    let half = T::lit(0.5);
    let (mut x, mut g) = if m.is_multiple_of(2) { (T::one(), T::one()) } else { (half, T::PI().sqrt()) };
    let target = T::from_usize_lossy(m) * half;
    while x < target {
        g = g * x;
        x = x + T::one();
    }
    g
}

/// ∫_{S(center, r)} f dσ by a fixed product rule: 256-node trapezoid on the
/// circle, Gauss–Legendre (in cos θ) × trapezoid (in φ) on the 2-sphere.
pub fn sphere_integral<T: Scalar>(center: &Point<T>, radius: T, f: impl Fn(&Point<T>) -> T) -> Result<T> {
    let two_pi = T::PI() + T::PI();
    match center.dim() {
        2 => {
            let m = CIRCLE_NODES;
            let dphi = two_pi / T::from_usize_lossy(m);
            let mut s = T::zero();
            for k in 0..m {
                let phi = dphi * T::from_usize_lossy(k);
                let p = Point::new(&[center[0] + radius * phi.cos(), center[1] + radius * phi.sin()])?;
                s = s + f(&p);
            }
            Ok(s * dphi * radius)
        }
        3 => {
            let (z, w) = gauss_legendre::<T>(SPHERE_LATITUDE_NODES);
            let m = SPHERE_LONGITUDE_NODES;
            let dphi = two_pi / T::from_usize_lossy(m);
            let mut s = T::zero();
            for (zi, wi) in z.iter().zip(&w) {
                let rho = (T::one() - *zi * *zi).sqrt();
                let mut ring = T::zero();
                for k in 0..m {
                    let phi = dphi * (T::from_usize_lossy(k) + T::lit(0.5));
                    let p = Point::new(&[
                        center[0] + radius * rho * phi.cos(),
                        center[1] + radius * rho * phi.sin(),
                        center[2] + radius * *zi,
                    ])?;
                    ring = ring + f(&p);
                }
                s = s + *wi * ring;
            }
            Ok(s * dphi * radius * radius)
        }
        n => Err(Error::invalid(format!("sphere quadrature is implemented for n = 2, 3 (got {n})"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre::<f64>(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(s, 2.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        let (x, w) = gauss_legendre::<f64>(64);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (3.0 * x).cos()).sum();
        assert_relative_eq!(s, 2.0 * 3f64.sin() / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn simpson_log_and_power() {
        let v = adaptive_simpson(|r: f64| 1.0 / r, 1.0, std::f64::consts::E, 1e-12);
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        let v = adaptive_simpson(|r: f64| r.powi(-2), 1.0, 2.0, 1e-12);
        assert_relative_eq!(v, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn simpson_endpoint_singularity() {
        let v = adaptive_simpson(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10);
        assert_relative_eq!(v, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn simpson_propagates_interior_infinity() {
        let v = adaptive_simpson(|x: f64| if x == 0.5 { f64::INFINITY } else { 1.0 }, 0.0, 1.0, 1e-10);
        assert!(v.is_infinite());
    }

    #[test]
    fn ball_and_sphere_constants() {
        assert_relative_eq!(unit_ball_volume::<f64>(2), PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume::<f64>(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume::<f64>(4), PI * PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area::<f64>(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area::<f64>(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(gamma_half_integer::<f64>(7), 15.0 * PI.sqrt() / 8.0, max_relative = 1e-15);
    }

    #[test]
    fn sphere_rules_integrate_smooth_fields() {
        let c = Point::new(&[0.3, -0.2]).unwrap();
        let v = sphere_integral(&c, 1.5, |p: &Point<f64>| (p[0] - 0.3).powi(2)).unwrap();
        // ∫ (r cos φ)² r dφ = π r³
        assert_relative_eq!(v, PI * 1.5f64.powi(3), max_relative = 1e-12);
        let c = Point::new(&[0.0, 0.0, 1.0]).unwrap();
        let v = sphere_integral(&c, 2.0, |p: &Point<f64>| (p[2] - 1.0).powi(2)).unwrap();
        // ∫ z² dσ over radius-r sphere = 4π r⁴ / 3
        assert_relative_eq!(v, 4.0 * PI * 16.0 / 3.0, max_relative = 1e-12);
        let v = sphere_integral(&c, 2.0, |_| 1.0).unwrap();
        assert_relative_eq!(v, 16.0 * PI, max_relative = 1e-12);
    }
}
