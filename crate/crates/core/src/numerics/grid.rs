//! Uniform tensor grids and fields sampled on them.

use serde::{Deserialize, Serialize};

/// Nodes `lo[a] + i·h[a]`, `i < n[a]`; storage is row-major with the third
/// coordinate fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: [usize; 3],
    pub lo: [f64; 3],
    pub h: [f64; 3],
}

impl Grid {
    pub fn new(n: [usize; 3], lo: [f64; 3], h: [f64; 3]) -> Self {
        Grid { n, lo, h }
    }

    /// Grid symmetric about the origin whose nodes, after discarding `margin`
    /// layers on every side, still cover `[-extent, extent]` on each axis.
    pub fn symmetric(n: [usize; 3], extents: [f64; 3], margin: usize) -> Self {
        let mut lo = [0.0; 3];
        let mut h = [0.0; 3];
        for a in 0..3 {
            let half = (n[a] as f64 - 1.0) / 2.0 - margin as f64;
            assert!(half > 0.0, "grid too small for the requested margin");
            h[a] = extents[a] / half;
            lo[a] = -(n[a] as f64 - 1.0) / 2.0 * h[a];
        }
        Grid { n, lo, h }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.h[axis]
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    pub fn cell_volume(&self) -> f64 {
        self.h[0] * self.h[1] * self.h[2]
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.len()]
    }

    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        let mut out = self.zeros();
        for i in 0..self.n[0] {
            for j in 0..self.n[1] {
                for k in 0..self.n[2] {
                    out[self.idx(i, j, k)] = f(self.point(i, j, k));
                }
            }
        }
        out
    }

    /// Index box of the nonzero entries, as half-open ranges per axis.
    pub fn support_box(&self, f: &[f64]) -> Option<IndexBox> {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        let mut any = false;
        for i in 0..self.n[0] {
            for j in 0..self.n[1] {
                let base = self.idx(i, j, 0);
                for k in 0..self.n[2] {
                    if f[base + k] != 0.0 {
                        any = true;
                        for (a, v) in [i, j, k].into_iter().enumerate() {
                            lo[a] = lo[a].min(v);
                            hi[a] = hi[a].max(v + 1);
                        }
                    }
                }
            }
        }
        any.then_some(IndexBox { lo, hi })
    }

    pub fn full_box(&self) -> IndexBox {
        IndexBox { lo: [0; 3], hi: self.n }
    }

    /// Smallest index box containing the coordinate box `[-e, e]` (clipped to the grid).
    pub fn box_covering(&self, extents: [f64; 3]) -> IndexBox {
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for a in 0..3 {
            let l = ((-extents[a] - self.lo[a]) / self.h[a] - 1e-9).ceil().max(0.0) as usize;
            let u = (((extents[a] - self.lo[a]) / self.h[a] + 1e-9).floor() as isize + 1).clamp(0, self.n[a] as isize) as usize;
            lo[a] = l.min(self.n[a]);
            hi[a] = u.max(lo[a]);
        }
        IndexBox { lo, hi }
    }
}

/// Half-open index ranges `lo[a]..hi[a]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexBox {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

impl IndexBox {
    /// Smallest box containing both.
    pub fn union(&self, other: &IndexBox) -> IndexBox {
        let mut out = *self;
        for a in 0..3 {
            out.lo[a] = self.lo[a].min(other.lo[a]);
            out.hi[a] = self.hi[a].max(other.hi[a]);
        }
        out
    }

    pub fn expand(&self, by: usize, grid: &Grid) -> IndexBox {
        let mut out = *self;
        for a in 0..3 {
            out.lo[a] = self.lo[a].saturating_sub(by);
            out.hi[a] = (self.hi[a] + by).min(grid.n[a]);
        }
        out
    }

    pub fn contains(&self, i: usize, j: usize, k: usize) -> bool {
        [i, j, k].iter().enumerate().all(|(a, &v)| v >= self.lo[a] && v < self.hi[a])
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|a| self.hi[a] <= self.lo[a])
    }
}

/// Whether coefficients are stored against a basis of E₀^h or of all of Λ^h.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormFrame {
    E0,
    Lambda,
}

/// A left-invariant-frame form with one grid field per basis element.
#[derive(Clone, Debug, PartialEq)]
pub struct GridForm {
    pub degree: usize,
    pub frame: FormFrame,
    /// Squared length of each basis element, used for pointwise norms.
    pub metric: Vec<f64>,
    pub components: Vec<Vec<f64>>,
}

impl GridForm {
    pub fn new(degree: usize, frame: FormFrame, metric: Vec<f64>, components: Vec<Vec<f64>>) -> Self {
        assert_eq!(metric.len(), components.len());
        GridForm { degree, frame, metric, components }
    }

    /// Pointwise length √(Σ |b_i|² c_i²).
    pub fn magnitude(&self) -> Vec<f64> {
        let len = self.components.first().map_or(0, Vec::len);
        (0..len)
            .map(|x| self.components.iter().zip(&self.metric).map(|(c, g)| g * c[x] * c[x]).sum::<f64>().sqrt())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_grid_covers_extent_with_margin() {
        let g = Grid::symmetric([21, 11, 31], [1.0, 2.0, 4.0], 3);
        for a in 0..3 {
            assert!((g.coord(a, 3) + [1.0, 2.0, 4.0][a]).abs() < 1e-12);
            assert!((g.coord(a, g.n[a] - 4) - [1.0, 2.0, 4.0][a]).abs() < 1e-12);
        }
    }

    #[test]
    fn support_box_bounds_nonzeros() {
        let g = Grid::symmetric([9, 9, 9], [1.0; 3], 0);
        let f = g.sample(|p| if p[0] > 0.3 && p[2] < -0.3 { 1.0 } else { 0.0 });
        let b = g.support_box(&f).unwrap();
        assert_eq!(b.lo, [6, 0, 0]);
        assert_eq!(b.hi, [9, 9, 3]);
        assert!(g.support_box(&g.zeros()).is_none());
    }

    #[test]
    fn covering_box() {
        let g = Grid::symmetric([11, 11, 11], [1.0; 3], 0);
        let b = g.box_covering([0.4, 1.0, 2.0]);
        assert_eq!(b.lo, [3, 0, 0]);
        assert_eq!(b.hi, [8, 11, 11]);
    }
}
