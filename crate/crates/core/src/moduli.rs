//! Closed-form and quadrature-reduced moduli of ring families, the ring and
//! lower weighted criteria with their extremal metrics, and capacity bounds.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::quadrature::{
    adaptive_simpson, gauss_legendre, sphere_integral, unit_ball_volume, unit_sphere_area, RADIAL_REL_TOL,
};
use crate::scalar::Scalar;

/// Spherical ring `r1 < |x − center| < r2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RingSpec<T> {
    pub center: Point<T>,
    pub r1: T,
    pub r2: T,
}

impl<T: Scalar> RingSpec<T> {
    pub fn new(center: Point<T>, r1: T, r2: T) -> Result<Self> {
        if !(r1 > T::zero() && r1 < r2 && r2.is_finite()) {
            return Err(Error::invalid(format!("invalid ring: need 0 < r1 < r2 < inf, got r1={r1}, r2={r2}")));
        }
        if !center.is_finite() {
            return Err(Error::invalid("ring center must be finite"));
        }
        Ok(Self { center, r1, r2 })
    }

    /// Ring about the origin of ℝⁿ.
    pub fn centered(dim: usize, r1: T, r2: T) -> Result<Self> {
        if !(2..=crate::linalg::MAX_DIM).contains(&dim) {
            return Err(Error::invalid(format!("dimension {dim} not supported")));
        }
        Self::new(Point::zeros(dim), r1, r2)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn radius(&self, x: &Point<T>) -> T {
        (*x - self.center).norm()
    }
}

type FieldFn<T> = dyn Fn(&Point<T>) -> T + Send + Sync;

/// A nonnegative weight Q on ℝⁿ.
///
/// Constant and radial-power weights (about the ring center they are used
/// with) have closed-form spherical means and norms; `Field` falls back to
/// sphere quadrature and supports n ∈ {2, 3}.
#[derive(Clone)]
pub enum Weight<T> {
    Constant(T),
    /// `coef · |x − center|^exponent`, with the center taken from the ring.
    RadialPower {
        coef: T,
        exponent: T,
    },
    Field(Arc<FieldFn<T>>),
}

impl<T: fmt::Debug> fmt::Debug for Weight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Constant(q) => f.debug_tuple("Constant").field(q).finish(),
            Weight::RadialPower { coef, exponent } => {
                f.debug_struct("RadialPower").field("coef", coef).field("exponent", exponent).finish()
            }
            Weight::Field(_) => f.write_str("Field(..)"),
        }
    }
}

impl<T: Scalar> Weight<T> {
    pub fn constant(q: T) -> Result<Self> {
        if q >= T::zero() && q.is_finite() {
            Ok(Weight::Constant(q))
        } else {
            Err(Error::invalid("weight must be finite and nonnegative"))
        }
    }

    pub fn radial_power(coef: T, exponent: T) -> Result<Self> {
        if coef >= T::zero() && coef.is_finite() && exponent.is_finite() {
            Ok(Weight::RadialPower { coef, exponent })
        } else {
            Err(Error::invalid("radial weight needs finite coef >= 0 and finite exponent"))
        }
    }

    pub fn field(f: impl Fn(&Point<T>) -> T + Send + Sync + 'static) -> Self {
        Weight::Field(Arc::new(f))
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self, Weight::Field(_))
    }

    pub fn value(&self, ring: &RingSpec<T>, x: &Point<T>) -> T {
        match self {
            Weight::Constant(q) => *q,
            Weight::RadialPower { coef, exponent } => *coef * ring.radius(x).powf(*exponent),
            Weight::Field(f) => f(x),
        }
    }

    /// The weight `Q^e` (pointwise power).
    pub fn powf(&self, e: T) -> Self {
        match self {
            Weight::Constant(q) => Weight::Constant(q.powf(e)),
            Weight::RadialPower { coef, exponent } => {
                Weight::RadialPower { coef: coef.powf(e), exponent: *exponent * e }
            }
            Weight::Field(f) => {
                let f = Arc::clone(f);
                Weight::field(move |x| f(x).powf(e))
            }
        }
    }

    /// Radial profile value for closed-form weights.
    fn radial_value(&self, r: T) -> Option<T> {
        match self {
            Weight::Constant(q) => Some(*q),
            Weight::RadialPower { coef, exponent } => Some(*coef * r.powf(*exponent)),
            Weight::Field(_) => None,
        }
    }

    /// Mean value of Q over the sphere `|x − x₀| = r`.
    pub fn spherical_mean(&self, ring: &RingSpec<T>, r: T) -> Result<T> {
        if let Some(v) = self.radial_value(r) {
            return Ok(v);
        }
        let n = ring.dim();
        let area = unit_sphere_area::<T>(n) * r.powi(n as i32 - 1);
        Ok(sphere_integral(&ring.center, r, |x| self.value(ring, x))? / area)
    }

    /// `‖Q‖ₛ(r) = (∫_{S(x₀,r)} Q^s dσ)^{1/s}`.
    pub fn sphere_norm(&self, ring: &RingSpec<T>, r: T, s: T) -> Result<T> {
        let n = ring.dim();
        let area = unit_sphere_area::<T>(n) * r.powi(n as i32 - 1);
        if let Some(v) = self.radial_value(r) {
            return Ok(v * area.powf(s.recip()));
        }
        Ok(sphere_integral(&ring.center, r, |x| self.value(ring, x).powf(s))?.powf(s.recip()))
    }
}

fn check_dim(n: usize) -> Result<()> {
    if (2..=crate::linalg::MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimension {n} not supported")))
    }
}

fn check_radii<T: Scalar>(a: T, b: T) -> Result<()> {
    if a > T::zero() && a < b && b.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("invalid ring: need 0 < a < b < inf, got a={a}, b={b}")))
    }
}

/// p-module of the curves joining the boundary spheres of the ring `a < |x| < b`,
/// for `p ≠ n`.
pub fn ring_module<T: Scalar>(n: usize, p: T, a: T, b: T) -> Result<T> {
    check_dim(n)?;
    let nn = T::from_usize_lossy(n);
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::param("p must be greater than 1"));
    }
    if p == nn {
        return Err(Error::param("p must differ from n"));
    }
    check_radii(a, b)?;
    let pm1 = p - T::one();
    let kappa = (p - nn) / pm1;
    let omega = unit_sphere_area::<T>(n);
    // |κ|^{p−1} |a^κ − b^κ|^{1−p} with a^κ − b^κ = −a^κ expm1(κ ln(b/a)),
    // which keeps full precision as p → n
    let e = (kappa * (b / a).ln()).exp_m1().abs();
    Ok(omega * (a.powf(-kappa) * kappa.abs() / e).powf(pm1))
}

/// n-module of the joining curves of the ring: `ω_{n−1} (ln(b/a))^{1−n}`.
pub fn conformal_ring_module<T: Scalar>(n: usize, a: T, b: T) -> Result<T> {
    check_dim(n)?;
    check_radii(a, b)?;
    Ok(unit_sphere_area::<T>(n) * (b / a).ln().powi(1 - n as i32))
}

/// p-module of the joining curves of the ring for any `p > 1` (including p = n).
pub fn annulus_curve_module<T: Scalar>(n: usize, p: T, a: T, b: T) -> Result<T> {
    if p == T::from_usize_lossy(n) {
        conformal_ring_module(n, a, b)
    } else {
        ring_module(n, p, a, b)
    }
}

/// p-module (k = n−1 surface semantics) of the concentric spheres separating
/// the boundary of `a < |x| < b`; needs `p > n − 1`.
pub fn annulus_sphere_module<T: Scalar>(n: usize, p: T, a: T, b: T) -> Result<T> {
    check_dim(n)?;
    check_radii(a, b)?;
    let ring = RingSpec::centered(n, a, b)?;
    weighted_sphere_module(&ring, p, &Weight::Constant(T::one()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZiemerDual<T> {
    pub alpha_dual: T,
    pub mod_alpha: T,
}

/// Dual exponent `α = p(n−1)/(p−1)` and the separating-family module
/// `M_α = M_p^{−1/(p−1)}`.
pub fn ziemer_dual<T: Scalar>(n: usize, p: T, mod_p: T) -> Result<ZiemerDual<T>> {
    check_dim(n)?;
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::param("p must be greater than 1"));
    }
    if !(mod_p > T::zero()) || !mod_p.is_finite() {
        return Err(Error::invalid("module must be positive and finite"));
    }
    let pm1 = p - T::one();
    Ok(ZiemerDual { alpha_dual: p * T::from_usize_lossy(n - 1) / pm1, mod_alpha: mod_p.powf(-pm1.recip()) })
}

/// Finite measure space of atoms `(φᵢ, μᵢ)` with exponent α > 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasureSpace<T> {
    phi: Vec<T>,
    mu: Vec<T>,
    alpha: T,
}

impl<T: Scalar> DiscreteMeasureSpace<T> {
    pub fn new(phi: Vec<T>, mu: Vec<T>, alpha: T) -> Result<Self> {
        if phi.is_empty() || phi.len() != mu.len() {
            return Err(Error::invalid("need equally many phi and mu values, at least one"));
        }
        if phi.iter().chain(&mu).any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::invalid("phi and mu must be positive and finite"));
        }
        if !(alpha > T::one()) || !alpha.is_finite() {
            return Err(Error::param("alpha must be greater than 1"));
        }
        Ok(Self { phi, mu, alpha })
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `Σ φᵢ ρᵢ^α μᵢ`.
    pub fn objective(&self, rho: &[T]) -> T {
        self.phi.iter().zip(&self.mu).zip(rho).map(|((&f, &m), &r)| f * r.powf(self.alpha) * m).sum()
    }

    /// `Σ ρᵢ μᵢ`.
    pub fn constraint(&self, rho: &[T]) -> T {
        self.mu.iter().zip(rho).map(|(&m, &r)| r * m).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaInfimum<T> {
    pub value: T,
    pub extremal_rho: Vec<T>,
}

/// Minimum of `Σ φᵢ ρᵢ^α μᵢ` over `ρ ≥ 0` with `Σ ρᵢ μᵢ = 1`, and its unique minimizer.
pub fn lemma_infimum<T: Scalar>(space: &DiscreteMeasureSpace<T>) -> LemmaInfimum<T> {
    let e = (T::one() - space.alpha).recip();
    let w: Vec<T> = space.phi.iter().map(|f| f.powf(e)).collect();
    let total: T = w.iter().zip(&space.mu).map(|(&w, &m)| w * m).sum();
    LemmaInfimum { value: total.powf(T::one() - space.alpha), extremal_rho: w.into_iter().map(|w| w / total).collect() }
}

/// Outcome of the ring criterion for a weight Q.
#[derive(Clone, Debug)]
pub struct RingCriterion<T> {
    ring: RingSpec<T>,
    p: T,
    weight: Weight<T>,
    /// `∫_{r1}^{r2} dr / (r^{(n−1)/(p−1)} q^{1/(p−1)}(r))`
    pub integral: T,
    /// `ω_{n−1} / I^{p−1}`
    pub bound: T,
    /// Set when I is infinite (Q vanishes on too much of the ring); bound is 0.
    pub degenerate: bool,
}

impl<T: Scalar> RingCriterion<T> {
    fn radial_factor(&self, r: T) -> Result<T> {
        let n = T::from_usize_lossy(self.ring.dim());
        let pm1 = self.p - T::one();
        let q = self.weight.spherical_mean(&self.ring, r)?;
        Ok(r.powf((n - T::one()) / pm1) * q.powf(pm1.recip()))
    }

    /// Extremal radial metric `η₀(r) = 1 / (I r^{(n−1)/(p−1)} q^{1/(p−1)}(r))`;
    /// zero outside `(r1, r2)` and for degenerate criteria.
    pub fn eta0(&self, r: T) -> Result<T> {
        if self.degenerate || r <= self.ring.r1 || r >= self.ring.r2 {
            return Ok(T::zero());
        }
        Ok((self.integral * self.radial_factor(r)?).recip())
    }

    /// `∫_{r1}^{r2} η₀(r) dr`, which is 1 for a nondegenerate criterion.
    pub fn eta0_mass(&self) -> Result<T> {
        let err = std::cell::Cell::new(None);
        let v = adaptive_simpson(
            |r| {
                self.eta0(r).unwrap_or_else(|e| {
                    err.set(Some(e));
                    T::nan()
                })
            },
            self.ring.r1,
            self.ring.r2,
            T::lit(RADIAL_REL_TOL),
        );
        err.take().map_or(Ok(v), Err)
    }

    /// `∫_A Q η₀^p(|x − x₀|) dx`, evaluated shell by shell.
    pub fn eta0_energy(&self) -> Result<T> {
        let n = self.ring.dim();
        let omega = unit_sphere_area::<T>(n);
        let err = std::cell::Cell::new(None);
        let shell = |r: T| -> Result<T> {
            let q = self.weight.spherical_mean(&self.ring, r)?;
            Ok(omega * r.powi(n as i32 - 1) * q * self.eta0(r)?.powf(self.p))
        };
        let v = adaptive_simpson(
            |r| {
                shell(r).unwrap_or_else(|e| {
                    err.set(Some(e));
                    T::nan()
                })
            },
            self.ring.r1,
            self.ring.r2,
            T::lit(RADIAL_REL_TOL),
        );
        err.take().map_or(Ok(v), Err)
    }
}

/// Weighted joining-curve bound `ω_{n−1}/I^{p−1}` for `1 < p ≤ n`.
pub fn ring_criterion_bound<T: Scalar>(ring: &RingSpec<T>, p: T, q: &Weight<T>) -> Result<RingCriterion<T>> {
    let n = T::from_usize_lossy(ring.dim());
    if !(p > T::one()) || p > n {
        return Err(Error::param("ring criterion needs 1 < p <= n"));
    }
    radial_curve_criterion(ring, p, q)
}

/// Same quantity as [`ring_criterion_bound`] without the `p ≤ n` restriction.
/// For radial weights this is the exact weighted module of the joining curves.
pub fn weighted_curve_module<T: Scalar>(ring: &RingSpec<T>, p: T, q: &Weight<T>) -> Result<RingCriterion<T>> {
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::param("p must be greater than 1"));
    }
    radial_curve_criterion(ring, p, q)
}

fn radial_curve_criterion<T: Scalar>(ring: &RingSpec<T>, p: T, q: &Weight<T>) -> Result<RingCriterion<T>> {
    check_dim(ring.dim())?;
    let n = ring.dim();
    let mut crit = RingCriterion {
        ring: ring.clone(),
        p,
        weight: q.clone(),
        integral: T::zero(),
        bound: T::zero(),
        degenerate: false,
    };
    let pm1 = p - T::one();
    let nn = T::from_usize_lossy(n);
    let integral = match q.radial_value(T::one()) {
        // closed form for constants: I = q^{-1/(p−1)} ∫ r^{−(n−1)/(p−1)} dr
        Some(c) if matches!(q, Weight::Constant(_)) => {
            if c == T::zero() {
                T::infinity()
            } else {
                let kappa = (p - nn) / pm1;
                let base = if kappa == T::zero() {
                    (ring.r2 / ring.r1).ln()
                } else {
                    (ring.r2.powf(kappa) - ring.r1.powf(kappa)) / kappa
                };
                base * c.powf(-pm1.recip())
            }
        }
        _ => {
            let err = std::cell::Cell::new(None);
            let v = adaptive_simpson(
                |r| match crit.radial_factor(r) {
                    Ok(f) => f.recip(),
                    Err(e) => {
                        err.set(Some(e));
                        T::nan()
                    }
                },
                ring.r1,
                ring.r2,
                T::lit(RADIAL_REL_TOL),
            );
            if let Some(e) = err.take() {
                return Err(e);
            }
            v
        }
    };
    if integral.is_nan() {
        return Err(Error::Evaluation("radial integral is not a number".into()));
    }
    crit.integral = integral;
    if integral.is_infinite() {
        crit.degenerate = true;
        crit.bound = T::zero();
    } else {
        crit.bound = unit_sphere_area::<T>(n) / integral.powf(pm1);
    }
    Ok(crit)
}

/// Outcome of the lower (sphere-family) criterion for a weight Q.
#[derive(Clone, Debug)]
pub struct LowerCriterion<T> {
    ring: RingSpec<T>,
    p: T,
    weight: Weight<T>,
    /// Exponent `s = (n−1)/(p−n+1)`.
    pub s: T,
    /// `∫_{ε}^{ε₀} dr / ‖Q‖ₛ(r)`
    pub value: T,
    /// Set when ‖Q‖ₛ vanishes so that the value is infinite.
    pub degenerate: bool,
}

impl<T: Scalar> LowerCriterion<T> {
    /// Extremal metric `ρ₀(x) = (Q^s(x) / ‖Q‖ₛ^s(r))^{1/(n−1)}`, r = |x − x₀|,
    /// normalized so that `∫_{S(x₀,r)} ρ₀^{n−1} dσ = 1` on every sphere.
    pub fn rho0(&self, x: &Point<T>) -> Result<T> {
        let r = self.ring.radius(x);
        if r <= self.ring.r1 || r >= self.ring.r2 {
            return Ok(T::zero());
        }
        let norm = self.weight.sphere_norm(&self.ring, r, self.s)?;
        Ok(self.rho0_with_norm(x, norm))
    }

    fn rho0_with_norm(&self, x: &Point<T>, norm: T) -> T {
        let k = T::from_usize_lossy(self.ring.dim() - 1);
        (self.weight.value(&self.ring, x).powf(self.s) / norm.powf(self.s)).powf(k.recip())
    }

    /// `A_ρ₀(r) = ∫_{S(x₀,r)} ρ₀^{n−1} dσ`.
    pub fn rho0_constraint(&self, r: T) -> Result<T> {
        if r <= self.ring.r1 || r >= self.ring.r2 {
            return Ok(T::zero());
        }
        let k = (self.ring.dim() - 1) as i32;
        let norm = self.weight.sphere_norm(&self.ring, r, self.s)?;
        sphere_integral(&self.ring.center, r, |x| self.rho0_with_norm(x, norm).powi(k))
    }

    /// `∫_A ρ₀^p / Q dx`, which equals `value` at the extremal. Gauss–Legendre
    /// in r over sphere quadrature, so meant for smooth weights.
    pub fn rho0_energy(&self) -> Result<T> {
        let (nodes, weights) = gauss_legendre::<T>(64);
        let half = (self.ring.r2 - self.ring.r1) / T::lit(2.0);
        let mid = (self.ring.r2 + self.ring.r1) / T::lit(2.0);
        let mut total = T::zero();
        for (t, w) in nodes.into_iter().zip(weights) {
            let r = mid + half * t;
            let norm = self.weight.sphere_norm(&self.ring, r, self.s)?;
            let shell = sphere_integral(&self.ring.center, r, |x| {
                self.rho0_with_norm(x, norm).powf(self.p) / self.weight.value(&self.ring, x)
            })?;
            total = total + w * half * shell;
        }
        Ok(total)
    }
}

/// `s = (n−1)/(p−n+1)`; needs `p > n − 1`.
fn sphere_exponent<T: Scalar>(n: usize, p: T) -> Result<T> {
    let nm1 = T::from_usize_lossy(n - 1);
    if !(p > nm1) || !p.is_finite() {
        return Err(Error::param("p must exceed n - 1"));
    }
    Ok(nm1 / (p - nm1))
}

/// `∫_{ε}^{ε₀} dr / ‖Q‖ₛ(r)` with the extremal ρ₀; `ring.r1 = ε`, `ring.r2 = ε₀`.
pub fn lower_criterion_integral<T: Scalar>(ring: &RingSpec<T>, p: T, q: &Weight<T>) -> Result<LowerCriterion<T>> {
    check_dim(ring.dim())?;
    let s = sphere_exponent(ring.dim(), p)?;
    let mut crit = LowerCriterion { ring: ring.clone(), p, weight: q.clone(), s, value: T::zero(), degenerate: false };
    let value = match q {
        Weight::Constant(c) if *c == T::zero() => T::infinity(),
        Weight::Constant(c) => {
            // ‖c‖ₛ(r) = c (ω r^{n−1})^{1/s}
            let n = ring.dim();
            let e = T::from_usize_lossy(n - 1) / s;
            let w = unit_sphere_area::<T>(n).powf(s.recip());
            let base = if e == T::one() {
                (ring.r2 / ring.r1).ln()
            } else {
                (ring.r2.powf(T::one() - e) - ring.r1.powf(T::one() - e)) / (T::one() - e)
            };
            base / (*c * w)
        }
        _ => {
            let err = std::cell::Cell::new(None);
            let v = adaptive_simpson(
                |r| match q.sphere_norm(ring, r, s) {
                    Ok(v) => v.recip(),
                    Err(e) => {
                        err.set(Some(e));
                        T::nan()
                    }
                },
                ring.r1,
                ring.r2,
                T::lit(RADIAL_REL_TOL),
            );
            if let Some(e) = err.take() {
                return Err(e);
            }
            v
        }
    };
    if value.is_nan() {
        return Err(Error::Evaluation("radial integral is not a number".into()));
    }
    crit.degenerate = value.is_infinite();
    crit.value = value;
    Ok(crit)
}

/// Exact `inf ∫ w ρ^p dx` over metrics admissible (k = n−1) for the
/// concentric spheres of the ring; equals the lower criterion for `Q = 1/w`.
pub fn weighted_sphere_module<T: Scalar>(ring: &RingSpec<T>, p: T, w: &Weight<T>) -> Result<T> {
    let inv = match w {
        Weight::Constant(c) => Weight::Constant(c.recip()),
        Weight::RadialPower { coef, exponent } => Weight::RadialPower { coef: coef.recip(), exponent: -*exponent },
        Weight::Field(f) => {
            let f = Arc::clone(f);
            Weight::field(move |x| f(x).recip())
        }
    };
    Ok(lower_criterion_integral(ring, p, &inv)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferParameters<T> {
    /// `s = (n−1)/(p−n+1)`, also the exponent of `Q̃ = Q^s`.
    pub s: T,
    /// `α̃ = p/(p−n+1)`
    pub alpha_tilde: T,
}

impl<T: Scalar> TransferParameters<T> {
    pub fn q_tilde_exponent(&self) -> T {
        self.s
    }
}

pub fn transfer_parameters<T: Scalar>(n: usize, p: T) -> Result<TransferParameters<T>> {
    check_dim(n)?;
    let s = sphere_exponent(n, p)?;
    let nm1 = T::from_usize_lossy(n - 1);
    Ok(TransferParameters { s, alpha_tilde: p / (p - nm1) })
}

/// Lower bound `n Ω_n^{p/n} ((n−p)/(p−1))^{p−1} (mC)^{(n−p)/n}` for the
/// p-capacity of a condenser with plate of measure `meas_c`; at p = 1 the
/// middle factor is its limit 1.
pub fn capacity_lower_bound_maz<T: Scalar>(n: usize, p: T, meas_c: T) -> Result<T> {
    check_dim(n)?;
    let nn = T::from_usize_lossy(n);
    if !(p >= T::one()) || p >= nn {
        return Err(Error::param("need 1 <= p < n"));
    }
    if !(meas_c > T::zero()) || !meas_c.is_finite() {
        return Err(Error::invalid("measure must be positive and finite"));
    }
    let pm1 = p - T::one();
    let middle = if pm1 == T::zero() { T::one() } else { ((nn - p) / pm1).powf(pm1) };
    Ok(nn * unit_ball_volume::<T>(n).powf(p / nn) * middle * meas_c.powf((nn - p) / nn))
}

/// Diagnostic ratio `cap^{n−1} (mA)^{1−n+p} / d(C)^p`, for `n − 1 ≤ p ≤ n`
/// (the endpoint p = n − 1 is admitted; the measure factor drops out there).
pub fn capacity_bound_krd_ratio<T: Scalar>(n: usize, p: T, cap_p: T, diam_c: T, meas_a: T) -> Result<T> {
    check_dim(n)?;
    let nn = T::from_usize_lossy(n);
    let nm1 = nn - T::one();
    if !(p >= nm1) || p > nn || !(p > T::one()) {
        return Err(Error::param("need max(1, n - 1) <= p <= n, p > 1"));
    }
    if [cap_p, diam_c, meas_a].iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
        return Err(Error::invalid("capacity, diameter and measure must be positive"));
    }
    Ok(cap_p.powf(nm1) * meas_a.powf(p - nm1) / diam_c.powf(p))
}
