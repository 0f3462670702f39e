//! Pointwise α-dilatations and mean dilatations over a box.
//!
//! For a linear bijection A with singular values σ₁ ≥ … ≥ σₙ:
//!
//! * inner:  `H_{I,α}(A) = |det A| / σₙ^α`
//! * outer:  `H_{O,α}(A) = σ₁^α / |det A|`
//! * linear: `H(A) = σ₁ / σₙ`
//!
//! The mean dilatations integrate a power of the pointwise dilatation of a
//! mapping's derivative over the mapping's domain. Singularities in scope are
//! power laws on a coordinate face, so the integral is computed on a tensor
//! mesh graded toward the declared faces and checked for divergence.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Point, MAX_DIM};
use crate::mappings::{MappingSpec, SingularFace};
use crate::scalar::Scalar;

pub fn inner_dilatation<T: Scalar>(m: &Matrix<T>, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    let s = m.singular_values()?;
    if s.min() == T::zero() {
        return Err(Error::DegenerateMatrix("l(A) = 0".into()));
    }
    Ok(s.abs_det / s.min().powf(alpha))
}

pub fn outer_dilatation<T: Scalar>(m: &Matrix<T>, alpha: T) -> Result<T> {
    check_alpha(alpha)?;
    let s = m.singular_values()?;
    if s.abs_det == T::zero() {
        return Err(Error::DegenerateMatrix("det A = 0".into()));
    }
    Ok(s.max().powf(alpha) / s.abs_det)
}

pub fn linear_dilatation<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    let s = m.singular_values()?;
    if s.min() == T::zero() {
        return Err(Error::DegenerateMatrix("l(A) = 0".into()));
    }
    Ok(s.max() / s.min())
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if alpha >= T::one() && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::param("alpha must be finite and at least 1"))
    }
}

/// Exponent pairs for the mean dilatations: (α, β) for the inner mean,
/// (γ, δ) for the outer mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DilatationParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Scalar> DilatationParams<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T) -> Self {
        Self { alpha, beta, gamma, delta }
    }

    /// Parameters for the inner mean only; the outer pair mirrors the inner one.
    pub fn inner(alpha: T, beta: T) -> Self {
        Self::new(alpha, beta, alpha, beta)
    }

    pub fn outer(gamma: T, delta: T) -> Self {
        Self::new(gamma, delta, gamma, delta)
    }

    fn check_pair(lo: T, hi: T, names: &str) -> Result<()> {
        if lo >= T::one() && lo < hi && hi.is_finite() {
            Ok(())
        } else {
            Err(Error::param(format!("{names} must satisfy 1 <= first < second < inf")))
        }
    }

    /// Finiteness threshold in `c` for the cube example's inner mean, 1 − α/β.
    pub fn inner_cube_threshold(&self) -> T {
        T::one() - self.alpha / self.beta
    }

    /// Finiteness threshold in `c` for the cube example's outer mean,
    /// 1 − (γ−1)δ/((δ−1)γ).
    pub fn outer_cube_threshold(&self) -> T {
        T::one() - (self.gamma - T::one()) * self.delta / ((self.delta - T::one()) * self.gamma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadRule {
    Midpoint,
    Gauss2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec<T> {
    pub cells_per_axis: usize,
    pub rule: QuadRule,
    /// Exponent g of the grading x = face + L·t^g toward singular faces.
    pub graded_exponent: T,
    /// Values above this are declared divergent.
    pub divergence_cap: T,
}

impl<T: Scalar> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            cells_per_axis: 128,
            rule: QuadRule::Gauss2,
            graded_exponent: T::lit(12.0),
            divergence_cap: T::lit(1e12),
        }
    }
}

impl<T: Scalar> QuadratureSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.cells_per_axis < 2 {
            return Err(Error::invalid("cells per axis must be at least 2"));
        }
        if !(self.graded_exponent >= T::one()) || !self.graded_exponent.is_finite() {
            return Err(Error::invalid("graded exponent must be at least 1"));
        }
        if !(self.divergence_cap > T::zero()) {
            return Err(Error::invalid("divergence cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Divergence {
    /// A refinement level exceeded the divergence cap (or overflowed).
    ExceedsCap,
    /// Three successive refinements each grew by more than a factor 1.5.
    Growth,
    /// The face profile decays like t^{-e} with e ≥ 1.
    FaceExponent,
    /// Refinements kept changing without contracting.
    NoStabilization,
    /// An integrand point stayed singular after subdividing its cell.
    SingularPoint,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeanDilatation<T> {
    Finite { value: T, levels: Vec<T> },
    Divergent { reason: Divergence, levels: Vec<T> },
}

impl<T: Scalar> MeanDilatation<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            MeanDilatation::Finite { value, .. } => Some(*value),
            MeanDilatation::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, MeanDilatation::Divergent { .. })
    }

    pub fn levels(&self) -> &[T] {
        match self {
            MeanDilatation::Finite { levels, .. } | MeanDilatation::Divergent { levels, .. } => levels,
        }
    }
}

/// `HI_{α,β}(f) = ∫_G H_{I,α}(x,f)^{β/(β−α)} dx`.
pub fn mean_inner_dilatation<T: Scalar>(
    map: &MappingSpec<T>,
    params: &DilatationParams<T>,
    quad: &QuadratureSpec<T>,
) -> Result<MeanDilatation<T>> {
    DilatationParams::check_pair(params.alpha, params.beta, "alpha, beta")?;
    let alpha = params.alpha;
    let power = params.beta / (params.beta - params.alpha);
    mean_of(map, quad, move |m| Ok(inner_dilatation(m, alpha)?.powf(power)))
}

/// `HO_{γ,δ}(f) = ∫_G H_{O,δ}(x,f)^{γ/(δ−γ)} dx`.
pub fn mean_outer_dilatation<T: Scalar>(
    map: &MappingSpec<T>,
    params: &DilatationParams<T>,
    quad: &QuadratureSpec<T>,
) -> Result<MeanDilatation<T>> {
    DilatationParams::check_pair(params.gamma, params.delta, "gamma, delta")?;
    let delta = params.delta;
    let power = params.gamma / (params.delta - params.gamma);
    mean_of(map, quad, move |m| Ok(outer_dilatation(m, delta)?.powf(power)))
}

const LEVELS: usize = 4;
const GROWTH_FACTOR: f64 = 1.5;
const FACE_PROBES: [f64; 2] = [1e-8, 1e-11];

fn mean_of<T: Scalar>(
    map: &MappingSpec<T>,
    quad: &QuadratureSpec<T>,
    integrand: impl Fn(&Matrix<T>) -> Result<T> + Sync,
) -> Result<MeanDilatation<T>> {
    quad.validate()?;
    let domain = map.domain();
    if !(domain.volume() > T::zero()) || !domain.volume().is_finite() {
        return Err(Error::invalid("integration domain is empty or unbounded"));
    }
    let mesh = GradedMesh::new(map, quad);
    let eval = |x: &Point<T>| -> Result<T> { integrand(&map.jacobian_matrix(x)?) };

    let base = quad.cells_per_axis;
    let mut levels = Vec::with_capacity(LEVELS);
    for k in 0..LEVELS {
        let cells = (base >> (LEVELS - 1 - k)).max(1);
        let v = match mesh.integrate(cells, quad.rule, &eval)? {
            Some(v) => v,
            None => return Ok(MeanDilatation::Divergent { reason: Divergence::SingularPoint, levels }),
        };
        levels.push(v);
        if !v.is_finite() || v > quad.divergence_cap {
            return Ok(MeanDilatation::Divergent { reason: Divergence::ExceedsCap, levels });
        }
    }

    let growth = T::lit(GROWTH_FACTOR);
    if levels.windows(2).all(|w| w[1] > growth * w[0]) {
        return Ok(MeanDilatation::Divergent { reason: Divergence::Growth, levels });
    }
    if mesh.face_exponent_diverges(&eval)? {
        return Ok(MeanDilatation::Divergent { reason: Divergence::FaceExponent, levels });
    }

    let d1 = levels[2] - levels[1];
    let d2 = levels[3] - levels[2];
    let last = levels[3];
    let noise = T::lit(1e-9) * last.abs();
    if d2.abs() > noise && d2 > T::zero() && d1 > T::zero() && d2 >= T::lit(0.9) * d1 {
        return Ok(MeanDilatation::Divergent { reason: Divergence::NoStabilization, levels });
    }
    // Aitken extrapolation when the last three levels contract geometrically.
    let value = if d1.abs() > noise && d2.abs() > noise {
        let ratio = d2 / d1;
        if ratio > T::zero() && ratio < T::lit(0.9) {
            last + d2 * ratio / (T::one() - ratio)
        } else {
            last
        }
    } else {
        last
    };
    Ok(MeanDilatation::Finite { value, levels })
}

/// Per-axis map from the unit parameter t ∈ [0,1] to the domain coordinate.
#[derive(Clone, Copy)]
struct AxisMap<T> {
    lo: T,
    len: T,
    /// None: uniform. Some(upper): graded toward lo (false) or hi (true).
    graded: Option<bool>,
    g: T,
}

impl<T: Scalar> AxisMap<T> {
    /// Returns (x, dx/dt).
    fn map(&self, t: T) -> (T, T) {
        match self.graded {
            None => (self.lo + self.len * t, self.len),
            Some(false) => (self.lo + self.len * t.powf(self.g), self.len * self.g * t.powf(self.g - T::one())),
            Some(true) => {
                let u = T::one() - t;
                (self.lo + self.len - self.len * u.powf(self.g), self.len * self.g * u.powf(self.g - T::one()))
            }
        }
    }
}

struct GradedMesh<T> {
    axes: Vec<AxisMap<T>>,
    faces: Vec<SingularFace>,
}

impl<T: Scalar> GradedMesh<T> {
    fn new(map: &MappingSpec<T>, quad: &QuadratureSpec<T>) -> Self {
        let d = map.domain();
        let faces = map.singular_faces();
        let axes = (0..map.dim())
            .map(|i| {
                let graded = faces.iter().find(|f| f.axis == i).map(|f| f.upper);
                AxisMap { lo: d.lo[i], len: d.hi[i] - d.lo[i], graded, g: quad.graded_exponent }
            })
            .collect();
        Self { axes, faces }
    }

    /// 1-D nodes (x, weight) in cell `[i/cells, (i+1)/cells]` of axis `a`,
    /// optionally split into `split` equal sub-cells.
    fn cell_nodes(&self, a: usize, i: usize, cells: usize, rule: QuadRule, split: usize) -> Vec<(T, T)> {
        let h = T::one() / T::from_usize_lossy(cells * split);
        let g2 = T::lit(0.5 / 3f64.sqrt());
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(2 * split);
        for s in 0..split {
            let t0 = T::from_usize_lossy(i * split + s) * h;
            let pts: &[(T, T)] = &match rule {
                QuadRule::Midpoint => [(half, T::one()), (T::zero(), T::zero())],
                QuadRule::Gauss2 => [(half - g2, half), (half + g2, half)],
            };
            for &(off, w) in pts.iter().filter(|(_, w)| *w > T::zero()) {
                let (x, dx) = self.axes[a].map(t0 + off * h);
                out.push((x, w * h * dx));
            }
        }
        out
    }

    /// Tensor quadrature at `cells` per axis. `None` means a point stayed
    /// singular after one subdivision of its cell.
    fn integrate(
        &self,
        cells: usize,
        rule: QuadRule,
        eval: &(impl Fn(&Point<T>) -> Result<T> + Sync),
    ) -> Result<Option<T>> {
        let n = self.axes.len();
        let total_cells = cells.pow(n as u32);
        let failures = std::sync::atomic::AtomicUsize::new(0);
        // One slab per index of axis 0; slab sums are reduced in order.
        let slabs: Vec<Result<Option<T>>> = (0..cells)
            .into_par_iter()
            .map(|i0| {
                let mut sum = T::zero();
                let mut idx = [0usize; MAX_DIM];
                idx[0] = i0;
                let per_slab = cells.pow(n as u32 - 1);
                for rest in 0..per_slab {
                    let mut r = rest;
                    for slot in idx.iter_mut().take(n).skip(1) {
                        *slot = r % cells;
                        r /= cells;
                    }
                    match self.cell_sum(&idx[..n], cells, rule, 1, eval) {
                        Ok(v) => sum = sum + v,
                        Err(Error::Singularity(_)) | Err(Error::DegenerateMatrix(_)) | Err(Error::Domain(_)) => {
                            failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                            match self.cell_sum(&idx[..n], cells, rule, 2, eval) {
                                Ok(v) => sum = sum + v,
                                Err(Error::Singularity(_)) | Err(Error::DegenerateMatrix(_)) => return Ok(None),
                                Err(e) => return Err(e),
                            }
                        }
                        Err(e) => return Err(e),
                    }
                }
                Ok(Some(sum))
            })
            .collect();
        let mut total = T::zero();
        for s in slabs {
            match s? {
                Some(v) => total = total + v,
                None => return Ok(None),
            }
        }
        let failed = failures.load(std::sync::atomic::Ordering::Relaxed);
        if failed * 100 > total_cells && total_cells >= 100 {
            return Err(Error::Evaluation(format!("derivative evaluation failed in {failed} of {total_cells} cells")));
        }
        Ok(Some(total))
    }

    fn cell_sum(
        &self,
        idx: &[usize],
        cells: usize,
        rule: QuadRule,
        split: usize,
        eval: &impl Fn(&Point<T>) -> Result<T>,
    ) -> Result<T> {
        let n = idx.len();
        let nodes: Vec<Vec<(T, T)>> = (0..n).map(|a| self.cell_nodes(a, idx[a], cells, rule, split)).collect();
        let counts: Vec<usize> = nodes.iter().map(Vec::len).collect();
        let total: usize = counts.iter().product();
        let mut sum = T::zero();
        for flat in 0..total {
            let mut r = flat;
            let mut w = T::one();
            let mut x = Point::zeros(n);
            for a in 0..n {
                let (xa, wa) = nodes[a][r % counts[a]];
                r /= counts[a];
                x[a] = xa;
                w = w * wa;
            }
            if w == T::zero() {
                continue;
            }
            sum = sum + w * eval(&x)?;
        }
        Ok(sum)
    }

    /// Estimates the decay exponent of the face profile
    /// F(t) = ∫ integrand(x', face + t) dx' at two tiny offsets and reports
    /// divergence when F(t) ~ t^{-e} with e ≥ 1.
    fn face_exponent_diverges(&self, eval: &(impl Fn(&Point<T>) -> Result<T> + Sync)) -> Result<bool> {
        let n = self.axes.len();
        for face in &self.faces {
            let a = face.axis;
            let ax = self.axes[a];
            let others: Vec<usize> = (0..n).filter(|&i| i != a).collect();
            let cells = 8;
            let mut profile = [T::zero(); 2];
            for (slot, &off) in profile.iter_mut().zip(FACE_PROBES.iter()) {
                let t = T::lit(off) * ax.len;
                let xa = if face.upper { ax.lo + ax.len - t } else { ax.lo + t };
                let per_axis: Vec<Vec<(T, T)>> = others
                    .iter()
                    .map(|&o| {
                        let m = AxisMap { graded: None, ..self.axes[o] };
                        let mesh = GradedMesh { axes: vec![m], faces: vec![] };
                        (0..cells).flat_map(|i| mesh.cell_nodes(0, i, cells, QuadRule::Gauss2, 1)).collect()
                    })
                    .collect();
                let total: usize = per_axis.iter().map(Vec::len).product();
                let mut s = T::zero();
                for flat in 0..total {
                    let mut r = flat;
                    let mut w = T::one();
                    let mut x = Point::zeros(n);
                    x[a] = xa;
                    for (k, &o) in others.iter().enumerate() {
                        let (xo, wo) = per_axis[k][r % per_axis[k].len()];
                        r /= per_axis[k].len();
                        x[o] = xo;
                        w = w * wo;
                    }
                    s = s + w * eval(&x)?;
                }
                *slot = s;
            }
            if !(profile[0] > T::zero()) || !(profile[1] > T::zero()) {
                continue;
            }
            let e = -(profile[1] / profile[0]).ln() / T::lit(FACE_PROBES[1] / FACE_PROBES[0]).ln();
            if e >= T::one() - T::lit(1e-6) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
