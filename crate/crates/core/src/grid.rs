//! Uniform Cartesian grids over a domain and node-valued fields on them.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::Domain;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// Smallest boundary-arm fraction kept in the stencil.
const MIN_ARM: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// Strictly inside the domain.
    Interior,
    /// Not interior, but with an interior 4-neighbour.
    Boundary,
    Exterior,
}

/// Arm directions in stencil order.
pub const DIRS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Nodes sit at integer multiples of `h`, so coordinate axes and grid-aligned
/// sides fall exactly on grid lines.
#[derive(Debug)]
pub struct Grid {
    pub h: f64,
    /// Integer coordinates of node (0, 0).
    pub i0: i64,
    pub j0: i64,
    pub nx: usize,
    pub ny: usize,
    kinds: Vec<NodeKind>,
    /// Distance to the next node or boundary crossing along each arm, in
    /// units of `h`; 1 towards interior neighbours.
    arms: Vec<[f64; 4]>,
}

impl Grid {
    /// Grid with `resolution` nodes per unit length covering the domain's
    /// bounding box with a one-node margin.
    pub fn new(domain: &Domain, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::Config(format!("resolution must be at least 2, got {resolution}")));
        }
        let h = 1.0 / resolution as f64;
        let (lo, hi) = domain.bbox();
        let i0 = (lo.x / h).floor() as i64 - 1;
        let j0 = (lo.y / h).floor() as i64 - 1;
        let nx = ((hi.x / h).ceil() as i64 - i0 + 2) as usize;
        let ny = ((hi.y / h).ceil() as i64 - j0 + 2) as usize;
        let mut g = Grid { h, i0, j0, nx, ny, kinds: Vec::new(), arms: Vec::new() };

        let inside: Vec<bool> = (0..nx * ny).into_par_iter().map(|k| domain.contains(g.pos(k))).collect();
        g.kinds = (0..nx * ny)
            .map(|k| {
                if inside[k] {
                    NodeKind::Interior
                } else if g.neighbours(k).into_iter().flatten().any(|n| inside[n]) {
                    NodeKind::Boundary
                } else {
                    NodeKind::Exterior
                }
            })
            .collect();
        let arms: Vec<[f64; 4]> = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                let mut a = [1.0; 4];
                if !inside[k] {
                    return a;
                }
                let p = g.pos(k);
                for (d, n) in g.neighbours(k).into_iter().enumerate() {
                    let n = n.expect("interior nodes are never on the grid edge");
                    if inside[n] {
                        continue;
                    }
                    let q = g.pos(n);
                    let hits = if d < 2 { domain.hline_crossings(p.y, p.x, q.x) } else { domain.vline_crossings(p.x, p.y, q.y) };
                    let along = |v: Vec2| if d < 2 { v.x } else { v.y };
                    let dist = hits
                        .iter()
                        .map(|w| (w - along(p)).abs())
                        .filter(|s| *s > 0.0)
                        .fold(h, f64::min);
                    a[d] = (dist / h).clamp(MIN_ARM, 1.0);
                }
                a
            })
            .collect();
        g.arms = arms;
        Ok(g)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    #[inline]
    pub fn pos(&self, k: usize) -> Vec2 {
        let (i, j) = self.ij(k);
        Vec2::new((self.i0 + i as i64) as f64 * self.h, (self.j0 + j as i64) as f64 * self.h)
    }

    #[inline]
    pub fn kind(&self, k: usize) -> NodeKind {
        self.kinds[k]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    #[inline]
    pub fn is_interior(&self, k: usize) -> bool {
        self.kinds[k] == NodeKind::Interior
    }

    #[inline]
    pub fn arms(&self, k: usize) -> [f64; 4] {
        self.arms[k]
    }

    /// Neighbours in stencil order (E, W, N, S); `None` off the grid.
    pub fn neighbours(&self, k: usize) -> [Option<usize>; 4] {
        let (i, j) = self.ij(k);
        let (i, j) = (i as i64, j as i64);
        DIRS.map(|(di, dj)| {
            let (a, b) = (i + di, j + dj);
            if a < 0 || b < 0 || a >= self.nx as i64 || b >= self.ny as i64 {
                None
            } else {
                Some(b as usize * self.nx + a as usize)
            }
        })
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.is_interior(k)).collect()
    }

    /// Index of the node nearest to `pt`, if it lies on the grid.
    pub fn nearest(&self, pt: Vec2) -> Option<usize> {
        let fi = (pt.x / self.h).round() as i64 - self.i0;
        let fj = (pt.y / self.h).round() as i64 - self.j0;
        if fi < 0 || fj < 0 || fi >= self.nx as i64 || fj >= self.ny as i64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    /// Lower-left node of the cell containing `pt` and the local coordinates.
    pub fn cell(&self, pt: Vec2) -> Option<(usize, usize, f64, f64)> {
        let fx = pt.x / self.h - self.i0 as f64;
        let fy = pt.y / self.h - self.j0 as f64;
        let (ci, cj) = (fx.floor(), fy.floor());
        if ci < 0.0 || cj < 0.0 || ci >= (self.nx - 1) as f64 || cj >= (self.ny - 1) as f64 {
            return None;
        }
        Some((ci as usize, cj as usize, fx - ci, fy - cj))
    }

    fn same_as(&self, other: &Grid) -> bool {
        self.h == other.h && self.i0 == other.i0 && self.j0 == other.j0 && self.nx == other.nx && self.ny == other.ny
    }
}

/// Node values on a grid; only interior and boundary nodes carry meaning.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(usize, Vec2) -> f64 + Sync) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|k| f(k, grid.pos(k))).collect();
        Self { grid, values }
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Bilinear interpolation; `None` outside the grid or if a cell corner is
    /// an exterior node.
    pub fn interpolate(&self, pt: Vec2) -> Option<f64> {
        let g = &self.grid;
        let (i, j, s, t) = g.cell(pt)?;
        let k00 = g.index(i, j);
        let k10 = g.index(i + 1, j);
        let k01 = g.index(i, j + 1);
        let k11 = g.index(i + 1, j + 1);
        if [k00, k10, k01, k11].iter().any(|&k| g.kind(k) == NodeKind::Exterior) {
            return None;
        }
        let v = &self.values;
        Some((1.0 - s) * (1.0 - t) * v[k00] + s * (1.0 - t) * v[k10] + (1.0 - s) * t * v[k01] + s * t * v[k11])
    }

    /// Corner indices of the cell containing `pt`.
    pub fn cell_corners(&self, pt: Vec2) -> Option<[usize; 4]> {
        let g = &self.grid;
        let (i, j, _, _) = g.cell(pt)?;
        Some([g.index(i, j), g.index(i + 1, j), g.index(i, j + 1), g.index(i + 1, j + 1)])
    }

    pub fn max_interior(&self) -> f64 {
        (0..self.values.len())
            .filter(|&k| self.grid.is_interior(k))
            .map(|k| self.values[k])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
