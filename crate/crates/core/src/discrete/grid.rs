use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::moduli::RingSpec;

/// Smallest admissible number of cells per axis.
pub const MIN_CELLS: usize = 8;

/// Uniform axis-aligned cell grid in two or three dimensions.
///
/// Cells are indexed `i0 + N·(i1 + N·i2)`; nodes (cell corners) likewise
/// with `N + 1` per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    lo: [f64; 3],
    h: [f64; 3],
    cells: usize,
}

impl Grid {
    pub fn new(lo: &[f64], hi: &[f64], cells: usize) -> Result<Self> {
        let dim = lo.len();
        if !(2..=3).contains(&dim) || hi.len() != dim {
            return Err(Error::invalid("grid dimension must be 2 or 3"));
        }
        if cells < MIN_CELLS {
            return Err(Error::invalid(format!("grid needs at least {MIN_CELLS} cells per axis")));
        }
        let mut l = [0.0; 3];
        let mut h = [1.0; 3];
        for a in 0..dim {
            if !(lo[a] < hi[a]) || !lo[a].is_finite() || !hi[a].is_finite() {
                return Err(Error::invalid("grid bounds must be finite with lo < hi"));
            }
            l[a] = lo[a];
            h[a] = (hi[a] - lo[a]) / cells as f64;
        }
        Ok(Self { dim, lo: l, h, cells })
    }

    /// Cube `center ± half_width`.
    pub fn cube(center: &Point<f64>, half_width: f64, cells: usize) -> Result<Self> {
        let lo: Vec<f64> = center.as_slice().iter().map(|c| c - half_width).collect();
        let hi: Vec<f64> = center.as_slice().iter().map(|c| c + half_width).collect();
        Self::new(&lo, &hi, cells)
    }

    /// Cube around the ring, leaving two cells between the outer sphere and
    /// the grid boundary.
    pub fn around_ring(ring: &RingSpec<f64>, cells: usize) -> Result<Self> {
        if cells < MIN_CELLS {
            return Err(Error::invalid(format!("grid needs at least {MIN_CELLS} cells per axis")));
        }
        let half = ring.r2 / (1.0 - 4.0 / cells as f64);
        Self::cube(&ring.center, half, cells)
    }

    /// Smallest cube containing the points with a two-cell margin.
    pub fn enclosing<'a>(points: impl IntoIterator<Item = &'a Point<f64>>, cells: usize) -> Result<Self> {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        let mut dim = 0;
        for p in points {
            dim = p.dim();
            for a in 0..dim {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        if dim == 0 || cells < MIN_CELLS {
            return Err(Error::invalid("need points and at least 8 cells"));
        }
        let center = Point::from_fn(dim, |a| 0.5 * (lo[a] + hi[a]));
        let half = (0..dim).map(|a| 0.5 * (hi[a] - lo[a])).fold(0.0, f64::max);
        Self::cube(&center, half.max(f64::MIN_POSITIVE) / (1.0 - 4.0 / cells as f64), cells)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.pow(self.dim as u32)
    }

    pub fn node_count(&self) -> usize {
        (self.cells + 1).pow(self.dim as u32)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    pub fn min_spacing(&self) -> f64 {
        self.h[..self.dim].iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.lo[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.lo[axis] + self.h[axis] * self.cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h[..self.dim].iter().product()
    }

    /// Whether the closed ball lies inside the open grid box.
    pub fn contains_ball(&self, center: &Point<f64>, r: f64) -> bool {
        center.dim() == self.dim && (0..self.dim).all(|a| center[a] - r > self.lo(a) && center[a] + r < self.hi(a))
    }

    /// Continuous grid coordinate `(x − lo)/h` along an axis.
    pub(crate) fn grid_coord(&self, x: f64, axis: usize) -> f64 {
        (x - self.lo[axis]) / self.h[axis]
    }

    pub fn cell_of(&self, x: &Point<f64>) -> Option<usize> {
        if x.dim() != self.dim {
            return None;
        }
        let mut idx = 0;
        for a in (0..self.dim).rev() {
            let u = self.grid_coord(x[a], a).floor();
            if !(u >= 0.0 && u < self.cells as f64) {
                return None;
            }
            idx = idx * self.cells + u as usize;
        }
        Some(idx)
    }

    pub fn cell_multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for slot in out.iter_mut().take(self.dim) {
            *slot = idx % self.cells;
            idx /= self.cells;
        }
        out
    }

    pub fn cell_center(&self, idx: usize) -> Point<f64> {
        let m = self.cell_multi_index(idx);
        Point::from_fn(self.dim, |a| self.lo[a] + (m[a] as f64 + 0.5) * self.h[a])
    }

    pub fn node_multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for slot in out.iter_mut().take(self.dim) {
            *slot = idx % (self.cells + 1);
            idx /= self.cells + 1;
        }
        out
    }

    pub fn node_position(&self, idx: usize) -> Point<f64> {
        let m = self.node_multi_index(idx);
        Point::from_fn(self.dim, |a| self.lo[a] + m[a] as f64 * self.h[a])
    }

    /// Writes one row `idx,x,y[,z],value` per cell, at cell centers.
    pub fn write_csv(&self, values: &[f64], mut out: impl Write) -> io::Result<()> {
        if values.len() != self.cell_count() {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "one value per cell expected"));
        }
        let header = if self.dim == 2 { "idx,x,y,value" } else { "idx,x,y,z,value" };
        writeln!(out, "{header}")?;
        for (i, v) in values.iter().enumerate() {
            let c = self.cell_center(i);
            write!(out, "{i}")?;
            for a in 0..self.dim {
                write!(out, ",{}", c[a])?;
            }
            writeln!(out, ",{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_roundtrip() {
        let g = Grid::new(&[-1.0, 0.0, 2.0], &[1.0, 4.0, 3.0], 8).unwrap();
        assert_eq!(g.cell_count(), 512);
        for idx in [0, 7, 8, 100, 511] {
            assert_eq!(g.cell_of(&g.cell_center(idx)), Some(idx));
        }
        assert_eq!(g.cell_of(&Point::new(&[1.5, 1.0, 2.5]).unwrap()), None);
        assert_eq!(g.node_position(0), Point::new(&[-1.0, 0.0, 2.0]).unwrap());
        assert!((g.cell_volume() - 0.25 * 0.5 * 0.125).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(&[0.0, 0.0], &[1.0, 1.0], 7).is_err());
        assert!(Grid::new(&[0.0], &[1.0], 8).is_err());
        assert!(Grid::new(&[0.0, 1.0], &[1.0, 1.0], 8).is_err());
    }

    #[test]
    fn ring_fits() {
        let ring = RingSpec::centered(2, 1.0, 2.0).unwrap();
        let g = Grid::around_ring(&ring, 64).unwrap();
        assert!(g.contains_ball(&ring.center, 2.0));
        assert!(!g.contains_ball(&ring.center, 2.0 + 2.5 * g.spacing(0)));
    }

    #[test]
    fn csv_shape() {
        let g = Grid::new(&[0.0, 0.0], &[1.0, 1.0], 8).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&vec![1.0; 64], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 65);
        assert_eq!(lines[0], "idx,x,y,value");
        assert_eq!(lines[1], "0,0.0625,0.0625,1");
        assert!(g.write_csv(&[1.0], Vec::new()).is_err());
    }
}
