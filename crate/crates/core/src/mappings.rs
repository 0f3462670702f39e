//! Analytic test mappings with closed-form derivatives.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Point, MAX_DIM};
use crate::scalar::Scalar;

/// Half-width of the default domain box for mappings defined on all of ℝⁿ.
pub const DEFAULT_EXTENT: f64 = 100.0;

/// Open axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxDomain<T> {
    pub lo: Point<T>,
    pub hi: Point<T>,
}

impl<T: Scalar> BoxDomain<T> {
    pub fn new(lo: Point<T>, hi: Point<T>) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::invalid("domain corners have different dimensions"));
        }
        if (0..lo.dim()).any(|i| !(lo[i] < hi[i])) {
            return Err(Error::invalid("domain box is empty"));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, lo: T, hi: T) -> Self {
        Self { lo: Point::from_fn(dim, |_| lo), hi: Point::from_fn(dim, |_| hi) }
    }

    pub fn centered(center: &Point<T>, half_width: T) -> Self {
        Self {
            lo: Point::from_fn(center.dim(), |i| center[i] - half_width),
            hi: Point::from_fn(center.dim(), |i| center[i] + half_width),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn contains(&self, x: &Point<T>) -> bool {
        x.dim() == self.dim() && (0..x.dim()).all(|i| self.lo[i] < x[i] && x[i] < self.hi[i])
    }

    pub fn volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |v, i| v * (self.hi[i] - self.lo[i]))
    }

    fn corners(&self) -> Vec<Point<T>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| Point::from_fn(n, |i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] }))
            .collect()
    }

    fn bounding(points: &[Point<T>]) -> Self {
        let n = points[0].dim();
        let mut lo = points[0];
        let mut hi = points[0];
        for p in points {
            for i in 0..n {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        Self { lo, hi }
    }
}

/// A coordinate face `x[axis] = lo` (or `hi` when `upper`) of the domain box
/// near which the derivative may blow up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SingularFace {
    pub axis: usize,
    pub upper: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MappingKind<T> {
    Linear(Matrix<T>),
    Scaling {
        lambda: T,
    },
    /// f(x) = x₀ + (x − x₀)|x − x₀|^{β−1}
    RadialPower {
        beta: T,
        center: Point<T>,
    },
    /// f(x) = (x₁, …, xₙ₋₁, xₙ^{1−c}/(1−c)) on the open unit cube.
    AxisStretch {
        c: T,
    },
    /// `outer ∘ inner`
    Compose {
        outer: Box<MappingSpec<T>>,
        inner: Box<MappingSpec<T>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MappingSpec<T> {
    kind: MappingKind<T>,
    domain: BoxDomain<T>,
}

impl<T: Scalar> MappingSpec<T> {
    pub fn identity(dim: usize) -> Self {
        Self::scaling(dim, T::one()).expect("unit scaling is valid")
    }

    pub fn linear(a: Matrix<T>) -> Result<Self> {
        let det = a.determinant()?;
        if !(det > T::zero()) {
            return Err(Error::param("linear mapping must have positive determinant"));
        }
        let domain = BoxDomain::cube(a.dim(), -T::lit(DEFAULT_EXTENT), T::lit(DEFAULT_EXTENT));
        Ok(Self { kind: MappingKind::Linear(a), domain })
    }

    pub fn scaling(dim: usize, lambda: T) -> Result<Self> {
        check_dim(dim)?;
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::param("scaling factor must be positive"));
        }
        let e = T::lit(DEFAULT_EXTENT);
        Ok(Self { kind: MappingKind::Scaling { lambda }, domain: BoxDomain::cube(dim, -e, e) })
    }

    pub fn radial_power(beta: T, center: Point<T>) -> Result<Self> {
        check_dim(center.dim())?;
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(Error::param("radial power exponent must be positive"));
        }
        let domain = BoxDomain::centered(&center, T::lit(DEFAULT_EXTENT));
        Ok(Self { kind: MappingKind::RadialPower { beta, center }, domain })
    }

    pub fn axis_stretch(dim: usize, c: T) -> Result<Self> {
        check_dim(dim)?;
        if !(c > T::zero() && c < T::one()) {
            return Err(Error::param("axis stretch parameter c must lie in (0, 1)"));
        }
        Ok(Self { kind: MappingKind::AxisStretch { c }, domain: BoxDomain::cube(dim, T::zero(), T::one()) })
    }

    /// `outer ∘ inner`, defined on the domain of `inner`.
    pub fn compose(outer: Self, inner: Self) -> Result<Self> {
        if outer.dim() != inner.dim() {
            return Err(Error::invalid("composed mappings have different dimensions"));
        }
        let domain = inner.domain;
        Ok(Self { kind: MappingKind::Compose { outer: Box::new(outer), inner: Box::new(inner) }, domain })
    }

    /// Restricts (or replaces) the domain box. The axis stretch keeps the unit cube.
    pub fn with_domain(mut self, domain: BoxDomain<T>) -> Result<Self> {
        if domain.dim() != self.dim() {
            return Err(Error::invalid("domain dimension does not match mapping"));
        }
        if matches!(self.kind, MappingKind::AxisStretch { .. }) {
            return Err(Error::invalid("the axis stretch is defined on the open unit cube only"));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn kind(&self) -> &MappingKind<T> {
        &self.kind
    }

    pub fn domain(&self) -> &BoxDomain<T> {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn check_point(&self, x: &Point<T>) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::invalid(format!("point of dimension {} for a {}-d mapping", x.dim(), self.dim())));
        }
        if !x.is_finite() || !self.domain.contains(x) {
            return Err(Error::Domain(format!("{:?} is outside the mapping domain", x.as_slice())));
        }
        if let MappingKind::RadialPower { center, .. } = &self.kind {
            if *x == *center {
                return Err(Error::Domain("the centre of a radial power map is excluded".into()));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &Point<T>) -> Result<Point<T>> {
        self.check_point(x)?;
        Ok(match &self.kind {
            MappingKind::Linear(a) => a.apply(x),
            MappingKind::Scaling { lambda } => x.scale(*lambda),
            MappingKind::RadialPower { beta, center } => {
                let d = *x - *center;
                let r = d.norm();
                *center + d.scale(r.powf(*beta - T::one()))
            }
            MappingKind::AxisStretch { c } => {
                let mut y = *x;
                let n = x.dim() - 1;
                let e = T::one() - *c;
                y[n] = x[n].powf(e) / e;
                y
            }
            MappingKind::Compose { outer, inner } => outer.evaluate(&inner.evaluate(x)?)?,
        })
    }

    /// The derivative f′(x).
    pub fn jacobian_matrix(&self, x: &Point<T>) -> Result<Matrix<T>> {
        self.check_point(x)?;
        let n = self.dim();
        Ok(match &self.kind {
            MappingKind::Linear(a) => *a,
            MappingKind::Scaling { lambda } => Matrix::identity(n).scale(*lambda),
            MappingKind::RadialPower { beta, center } => {
                let d = *x - *center;
                let r = d.norm();
                if r == T::zero() {
                    return Err(Error::Singularity("radial power map at its centre".into()));
                }
                let u = d.scale(T::one() / r);
                let s = r.powf(*beta - T::one());
                let bm1 = *beta - T::one();
                Matrix::from_fn(n, |i, j| {
                    let id = if i == j { T::one() } else { T::zero() };
                    s * (id + bm1 * u[i] * u[j])
                })
            }
            MappingKind::AxisStretch { c } => {
                let last = x[n - 1].powf(-*c);
                if !last.is_finite() {
                    return Err(Error::Singularity("axis stretch on the face x_n = 0".into()));
                }
                Matrix::from_fn(n, |i, j| {
                    if i != j {
                        T::zero()
                    } else if i == n - 1 {
                        last
                    } else {
                        T::one()
                    }
                })
            }
            MappingKind::Compose { outer, inner } => {
                let y = inner.evaluate(x)?;
                outer.jacobian_matrix(&y)?.matmul(&inner.jacobian_matrix(x)?)
            }
        })
    }

    /// J(x, f) = det f′(x).
    pub fn jacobian_det(&self, x: &Point<T>) -> Result<T> {
        self.jacobian_matrix(x)?.determinant()
    }

    /// Central-difference derivative; every stencil point must lie in the domain.
    pub fn finite_difference_jacobian(&self, x: &Point<T>, h: T) -> Result<Matrix<T>> {
        if !(h > T::zero()) {
            return Err(Error::invalid("step h must be positive"));
        }
        self.check_point(x)?;
        if let MappingKind::RadialPower { center, .. } = &self.kind {
            if (*x - *center).norm() <= h {
                return Err(Error::Domain("stencil reaches the centre of the radial power map".into()));
            }
        }
        let n = self.dim();
        let mut cols = [[T::zero(); MAX_DIM]; MAX_DIM];
        for (j, col) in cols.iter_mut().enumerate().take(n) {
            let e = Point::unit(n, j).scale(h);
            let fp = self.evaluate(&(*x + e))?;
            let fm = self.evaluate(&(*x - e))?;
            for (i, v) in col.iter_mut().enumerate().take(n) {
                *v = (fp[i] - fm[i]) / (h + h);
            }
        }
        Ok(Matrix::from_fn(n, |i, j| cols[j][i]))
    }

    /// Exact inverse where the catalog provides one.
    pub fn inverse(&self) -> Option<Self> {
        let image_box = |pts: Vec<Point<T>>| BoxDomain::bounding(&pts);
        match &self.kind {
            MappingKind::Linear(a) => {
                let inv = a.inverse().ok()?;
                let corners = self.domain.corners().iter().map(|c| a.apply(c)).collect();
                Some(Self { kind: MappingKind::Linear(inv), domain: image_box(corners) })
            }
            MappingKind::Scaling { lambda } => {
                let domain = BoxDomain { lo: self.domain.lo.scale(*lambda), hi: self.domain.hi.scale(*lambda) };
                Some(Self { kind: MappingKind::Scaling { lambda: T::one() / *lambda }, domain })
            }
            MappingKind::RadialPower { beta, center } => {
                let reach =
                    self.domain.corners().iter().map(|c| (*c - *center).norm()).fold(T::zero(), T::max).powf(*beta);
                Some(Self {
                    kind: MappingKind::RadialPower { beta: T::one() / *beta, center: *center },
                    domain: BoxDomain::centered(center, reach * T::lit(1.0 + 1e-9)),
                })
            }
            MappingKind::AxisStretch { .. } => None,
            MappingKind::Compose { outer, inner } => {
                let oi = outer.inverse()?;
                let ii = inner.inverse()?;
                Some(Self {
                    domain: oi.domain,
                    kind: MappingKind::Compose { outer: Box::new(ii), inner: Box::new(oi) },
                })
            }
        }
    }

    /// Faces of the domain box along which f′ is singular.
    pub fn singular_faces(&self) -> Vec<SingularFace> {
        match &self.kind {
            MappingKind::AxisStretch { .. } => vec![SingularFace { axis: self.dim() - 1, upper: false }],
            MappingKind::Compose { outer, inner } => {
                let mut v = inner.singular_faces();
                for f in outer.singular_faces() {
                    if !v.contains(&f) {
                        v.push(f);
                    }
                }
                v
            }
            _ => Vec::new(),
        }
    }

    /// If f maps the sphere S(center, r) onto a sphere, returns that sphere's
    /// centre and radius.
    pub fn sphere_image(&self, center: &Point<T>, r: T) -> Option<(Point<T>, T)> {
        match &self.kind {
            MappingKind::Scaling { lambda } => Some((center.scale(*lambda), r * *lambda)),
            MappingKind::Linear(a) => {
                // Conformal linear maps only: AᵀA = s² I.
                let ata = a.transpose().matmul(a);
                let s2 = ata.get(0, 0);
                let n = a.dim();
                let tol = T::lit(1e-12) * s2;
                let conformal = (0..n).all(|i| {
                    (0..n).all(|j| {
                        let e = if i == j { s2 } else { T::zero() };
                        (ata.get(i, j) - e).abs() <= tol
                    })
                });
                conformal.then(|| (a.apply(center), r * s2.sqrt()))
            }
            MappingKind::RadialPower { beta, center: c } => (c == center).then(|| (*c, r.powf(*beta))),
            MappingKind::AxisStretch { .. } => None,
            MappingKind::Compose { outer, inner } => {
                let (c1, r1) = inner.sphere_image(center, r)?;
                outer.sphere_image(&c1, r1)
            }
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::invalid(format!("dimension {dim} outside 2..={MAX_DIM}")))
    }
}
