//! Finite samples of ring families: radial joining curves and concentric
//! separating spheres, with per-cell incidence weights.

use std::f64::consts::PI;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::mappings::MappingSpec;
use crate::moduli::RingSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    /// Curves, integrated against ρ (k = 1).
    Curves,
    /// Hypersurfaces, integrated against ρ^{n−1} (k = n − 1).
    Surfaces,
}

/// A small flat piece of a hypersurface: the parallelogram
/// `center + s·u + t·v`, |s|, |t| ≤ 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Patch {
    pub center: Point<f64>,
    /// Unit normal.
    pub normal: Point<f64>,
    /// Tangent half-edges.
    pub u: Point<f64>,
    pub v: Point<f64>,
    pub area: f64,
}

/// Patches are split so that pieces are at most this many cells across
/// before their area is binned by centre.
const PATCH_PIECE: f64 = 0.125;

#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    Polyline(Vec<Point<f64>>),
    Patches(Vec<Patch>),
}

/// One curve or surface and its `(cell, length-or-area)` incidence,
/// sorted by cell with no repeats.
#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub geometry: Geometry,
    pub incidence: Vec<(usize, f64)>,
}

impl Member {
    fn build(geometry: Geometry, grid: &Grid) -> Result<Self> {
        let mut raw = Vec::new();
        match &geometry {
            Geometry::Polyline(v) => {
                for w in v.windows(2) {
                    clip_segment(grid, &w[0], &w[1], &mut raw)?;
                }
            }
            Geometry::Patches(ps) => {
                // binning whole patches by centre biases the module low, so
                // each patch is split into pieces much smaller than a cell
                let piece = PATCH_PIECE * grid.min_spacing();
                for p in ps {
                    let home = grid.cell_of(&p.center).ok_or_else(|| Error::invalid("surface leaves the grid"))?;
                    let extent = 2.0 * p.u.norm().max(p.v.norm());
                    let m = ((extent / piece).ceil() as usize).clamp(1, 64);
                    let a = p.area / (m * m) as f64;
                    for i in 0..m {
                        let si = (2 * i + 1) as f64 / m as f64 - 1.0;
                        for j in 0..m {
                            let tj = (2 * j + 1) as f64 / m as f64 - 1.0;
                            let x = p.center + p.u * si + p.v * tj;
                            raw.push((grid.cell_of(&x).unwrap_or(home), a));
                        }
                    }
                }
            }
        }
        raw.sort_by_key(|e| e.0);
        let mut incidence: Vec<(usize, f64)> = Vec::with_capacity(raw.len());
        for (c, w) in raw {
            match incidence.last_mut() {
                Some(last) if last.0 == c => last.1 += w,
                _ => incidence.push((c, w)),
            }
        }
        incidence.retain(|e| e.1 > 0.0);
        Ok(Self { geometry, incidence })
    }

    /// Total length (curves) or area (surfaces) carried by the incidence.
    pub fn measure(&self) -> f64 {
        self.incidence.iter().map(|e| e.1).sum()
    }

    /// Length or area of the geometry itself.
    pub fn geometric_measure(&self) -> f64 {
        match &self.geometry {
            Geometry::Polyline(v) => v.windows(2).map(|w| (w[1] - w[0]).norm()).sum(),
            Geometry::Patches(ps) => ps.iter().map(|p| p.area).sum(),
        }
    }

    fn points(&self) -> Box<dyn Iterator<Item = &Point<f64>> + '_> {
        match &self.geometry {
            Geometry::Polyline(v) => Box::new(v.iter()),
            Geometry::Patches(ps) => Box::new(ps.iter().map(|p| &p.center)),
        }
    }
}

/// Appends `(cell, length)` pieces of segment a→b.
fn clip_segment(grid: &Grid, a: &Point<f64>, b: &Point<f64>, out: &mut Vec<(usize, f64)>) -> Result<()> {
    let n = grid.dim();
    let len = (*b - *a).norm();
    if len == 0.0 {
        return Ok(());
    }
    let mut ts = vec![0.0, 1.0];
    for axis in 0..n {
        let ua = grid.grid_coord(a[axis], axis);
        let ub = grid.grid_coord(b[axis], axis);
        if ua == ub {
            continue;
        }
        let (lo, hi) = if ua < ub { (ua, ub) } else { (ub, ua) };
        let mut k = lo.floor() + 1.0;
        while k < hi {
            ts.push((k - ua) / (ub - ua));
            k += 1.0;
        }
    }
    ts.sort_by(f64::total_cmp);
    for w in ts.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 0.0 {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let mid = *a + (*b - *a) * tm;
        let cell = grid.cell_of(&mid).ok_or_else(|| Error::invalid("curve leaves the grid"))?;
        out.push((cell, dt * len));
    }
    Ok(())
}

/// Finite family of curves or hypersurfaces on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Family {
    kind: FamilyKind,
    dim: usize,
    members: Vec<Member>,
}

impl Family {
    pub fn new(kind: FamilyKind, grid: &Grid, geometries: Vec<Geometry>) -> Result<Self> {
        let members = geometries.into_iter().map(|g| Member::build(g, grid)).collect::<Result<_>>()?;
        Ok(Self { kind, dim: grid.dim(), members })
    }

    pub fn empty(kind: FamilyKind, dim: usize) -> Self {
        Self { kind, dim, members: Vec::new() }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exponent k of the admissibility integral.
    pub fn k(&self) -> usize {
        match self.kind {
            FamilyKind::Curves => 1,
            FamilyKind::Surfaces => self.dim - 1,
        }
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Subfamily with the selected members.
    pub fn select(&self, indices: impl IntoIterator<Item = usize>) -> Self {
        Self { kind: self.kind, dim: self.dim, members: indices.into_iter().map(|i| self.members[i].clone()).collect() }
    }

    /// All vertices / patch centers.
    pub fn points(&self) -> impl Iterator<Item = &Point<f64>> {
        self.members.iter().flat_map(Member::points)
    }
}

fn check_ring_in_grid(ring: &RingSpec<f64>, grid: &Grid) -> Result<()> {
    if ring.dim() != grid.dim() {
        return Err(Error::invalid("ring and grid dimensions differ"));
    }
    if !grid.contains_ball(&ring.center, ring.r2) {
        return Err(Error::invalid("ring is not inside the grid"));
    }
    Ok(())
}

/// Unit directions: equally spaced angles in the plane, a Fibonacci lattice in space.
pub fn directions(dim: usize, count: usize) -> Vec<Point<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            if dim == 2 {
                let t = 2.0 * PI * i as f64 / count as f64;
                Point::from_fn(2, |a| if a == 0 { t.cos() } else { t.sin() })
            } else {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                Point::from_fn(3, |a| [rho * phi.cos(), rho * phi.sin(), z][a])
            }
        })
        .collect()
}

/// Number of radial curves so every outer-boundary cell is crossed: endpoint
/// spacing `h/2` on a circle, one endpoint per `h²` of sphere area in 3D.
pub fn covering_curve_count(ring: &RingSpec<f64>, grid: &Grid) -> usize {
    let h = grid.min_spacing();
    match ring.dim() {
        2 => (4.0 * PI * ring.r2 / h).ceil() as usize,
        _ => (4.0 * PI * ring.r2 * ring.r2 / (h * h)).ceil() as usize,
    }
}

/// Fraction of each cell's volume inside the ring `r1 < |x − x₀| < r2`,
/// estimated from `per_axis^n` midpoints per cell that meets a boundary
/// sphere. As a solver cost it confines the energy to the ring, which is all
/// an admissible metric has to cover. Sampled cells never report 0, so every
/// cell a ring family can meet gets a positive cost.
pub fn ring_cell_fractions(ring: &RingSpec<f64>, grid: &Grid, per_axis: usize) -> Vec<f64> {
    let n = grid.dim();
    let m = per_axis.max(1);
    let half_diag = 0.5 * (0..n).map(|a| grid.spacing(a).powi(2)).sum::<f64>().sqrt();
    (0..grid.cell_count())
        .map(|c| {
            let x = grid.cell_center(c);
            let r = ring.radius(&x);
            if r - half_diag >= ring.r1 && r + half_diag <= ring.r2 {
                return 1.0;
            }
            if r + half_diag <= ring.r1 || r - half_diag >= ring.r2 {
                return 0.0;
            }
            let total = m.pow(n as u32);
            let inside = (0..total)
                .filter(|&i| {
                    let mut y = x;
                    let mut k = i;
                    for a in 0..n {
                        let t = ((k % m) as f64 + 0.5) / m as f64 - 0.5;
                        y[a] += t * grid.spacing(a);
                        k /= m;
                    }
                    let ry = ring.radius(&y);
                    ry > ring.r1 && ry < ring.r2
                })
                .count();
            inside.max(1) as f64 / total as f64
        })
        .collect()
}

/// Number of concentric spheres spaced `h/2` apart in 2D, `h/4` in 3D.
/// Coarser stacks leave cells the optimizer can zero out.
pub fn covering_sphere_count(ring: &RingSpec<f64>, grid: &Grid) -> usize {
    let per_cell = 2.0 * (ring.dim() - 1) as f64;
    ((ring.r2 - ring.r1) * per_cell / grid.min_spacing()).ceil() as usize
}

/// `count` radial segments from the inner to the outer sphere, each split
/// into pieces no longer than half a cell.
pub fn sample_joining_curves(ring: &RingSpec<f64>, grid: &Grid, count: usize) -> Result<Family> {
    check_ring_in_grid(ring, grid)?;
    if count == 0 {
        return Ok(Family::empty(FamilyKind::Curves, grid.dim()));
    }
    let pieces = ((ring.r2 - ring.r1) / (0.5 * grid.min_spacing())).ceil().max(1.0) as usize;
    let geoms = directions(grid.dim(), count)
        .into_iter()
        .map(|d| {
            Geometry::Polyline(
                (0..=pieces)
                    .map(|j| {
                        let r = ring.r1 + (ring.r2 - ring.r1) * j as f64 / pieces as f64;
                        ring.center + d * r
                    })
                    .collect(),
            )
        })
        .collect();
    Family::new(FamilyKind::Curves, grid, geoms)
}

/// Sphere of radius r: a closed polygon in the plane (vertex spacing ≤ `step`),
/// latitude bands of equal angle cut into near-square patches in space.
pub fn sphere_geometry(center: &Point<f64>, r: f64, step: f64) -> Geometry {
    if center.dim() == 2 {
        let m = ((2.0 * PI * r / step).ceil() as usize).max(16);
        Geometry::Polyline(
            (0..=m)
                .map(|j| {
                    let t = 2.0 * PI * (j % m) as f64 / m as f64;
                    *center + Point::from_fn(2, |a| if a == 0 { r * t.cos() } else { r * t.sin() })
                })
                .collect(),
        )
    } else {
        // equal-angle bands, each split into roughly square patches
        let ntheta = ((PI * r / step).ceil() as usize).max(4);
        let dtheta = PI / ntheta as f64;
        let mut ps = Vec::new();
        for i in 0..ntheta {
            let (ta, tb) = (i as f64 * dtheta, (i + 1) as f64 * dtheta);
            let band = 2.0 * PI * r * r * (ta.cos() - tb.cos());
            // area midpoint of the band
            let z = 0.5 * (ta.cos() + tb.cos());
            let s = (1.0 - z * z).sqrt();
            let nphi = ((2.0 * PI * r * s / step).ceil() as usize).max(3);
            let dphi = 2.0 * PI / nphi as f64;
            let area = band / nphi as f64;
            for j in 0..nphi {
                let phi = (j as f64 + 0.5) * dphi;
                let (sp, cp) = phi.sin_cos();
                let normal = Point::from_fn(3, |a| [s * cp, s * sp, z][a]);
                let e_phi = Point::from_fn(3, |a| [-sp, cp, 0.0][a]);
                let e_theta = Point::from_fn(3, |a| [z * cp, z * sp, -s][a]);
                // half-edges sized so that 4|u||v| is the patch area
                let hv = 0.5 * r * dtheta;
                let hu = area / (4.0 * hv);
                ps.push(Patch { center: *center + normal * r, normal, u: e_phi * hu, v: e_theta * hv, area });
            }
        }
        Geometry::Patches(ps)
    }
}

/// `count` concentric spheres at radii `r1 + (i + ½)(r2 − r1)/count`.
pub fn sample_separating_surfaces(ring: &RingSpec<f64>, grid: &Grid, count: usize) -> Result<Family> {
    check_ring_in_grid(ring, grid)?;
    let step = 0.5 * grid.min_spacing();
    let geoms = (0..count)
        .map(|i| {
            let r = ring.r1 + (i as f64 + 0.5) * (ring.r2 - ring.r1) / count as f64;
            sphere_geometry(&ring.center, r, step)
        })
        .collect();
    Family::new(FamilyKind::Surfaces, grid, geoms)
}

/// Image family under `map`, re-clipped on `grid`. Surface patches are
/// carried by Nanson's formula `dA' = J |f′^{−T} ν| dA`.
pub fn push_forward_family(map: &MappingSpec<f64>, family: &Family, grid: &Grid) -> Result<Family> {
    if map.dim() != family.dim() || grid.dim() != family.dim() {
        return Err(Error::invalid("map, family and grid dimensions differ"));
    }
    let geoms = family
        .members()
        .iter()
        .map(|m| match &m.geometry {
            Geometry::Polyline(v) => v.iter().map(|x| map.evaluate(x)).collect::<Result<_>>().map(Geometry::Polyline),
            Geometry::Patches(ps) => ps
                .iter()
                .map(|p| {
                    let f = map.jacobian_matrix(&p.center)?;
                    let j = f.determinant()?;
                    let nt = f.inverse()?.transpose().apply(&p.normal);
                    let len = nt.norm();
                    Ok(Patch {
                        center: map.evaluate(&p.center)?,
                        normal: nt.scale(1.0 / len),
                        u: f.apply(&p.u),
                        v: f.apply(&p.v),
                        area: j.abs() * len * p.area,
                    })
                })
                .collect::<Result<_>>()
                .map(Geometry::Patches),
        })
        .collect::<Result<_>>()?;
    Family::new(family.kind(), grid, geoms)
}
