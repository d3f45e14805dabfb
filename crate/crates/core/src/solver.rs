//! Projected SOR for the discrete obstacle problem
//! `min 1/2 |Dv|^2 - eta v` over `v <= d_p`, `v = 0` on the boundary.
//!
//! Boundary arms use the symmetric ghost-value treatment: an arm that meets
//! the boundary at `theta h` contributes `u_P / (theta h^2)` to `-Lap u`,
//! which keeps the matrix symmetric positive definite and the scheme second
//! order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, NodeKind, ScalarField};
use crate::pnorm::{gamma_q, ExponentPair};
use crate::vec2::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Lexicographic,
    /// Two-colour ordering; each colour is updated in parallel.
    RedBlack,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveConfig {
    pub eta: f64,
    pub h: f64,
    pub omega: f64,
    /// Convergence threshold on the largest node update of a sweep.
    pub tol: f64,
    pub max_iters: usize,
    pub contact_tol: f64,
    pub sweep: Sweep,
}

impl SolveConfig {
    /// Defaults: `omega = 1.8`, `tol = 1e-10`, `max_iters = 200 / h`,
    /// `contact_tol = h^2 max(eta, 1)`.
    pub fn new(eta: f64, h: f64) -> Result<Self> {
        let cfg = Self {
            eta,
            h,
            omega: 1.8,
            tol: 1e-10,
            max_iters: (200.0 / h).ceil() as usize,
            contact_tol: h * h * eta.max(1.0),
            sweep: Sweep::Lexicographic,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.h > 0.0) {
            return Err(Error::Config(format!("h must be positive, got {}", self.h)));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::Config(format!("omega must lie in (0, 2), got {}", self.omega)));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 || !(self.contact_tol >= 0.0) {
            return Err(Error::Config("tol, max_iters and contact_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub last_update: f64,
    /// Discrete energy every 100 sweeps, plus the final value.
    pub energy_trace: Vec<(usize, f64)>,
    /// Largest complementarity violation relative to the diagonal.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub u: ScalarField,
    pub stats: SolveStats,
}

/// Interior rows of the scaled system `h^2 A u = eta h^2`.
struct System {
    nodes: Vec<usize>,
    diag: Vec<f64>,
    /// Interior neighbours of each row, `usize::MAX` for boundary arms.
    nbrs: Vec<[usize; 4]>,
    rhs: f64,
}

impl System {
    fn new(grid: &Grid, eta: f64) -> Self {
        let nodes = grid.interior_indices();
        let mut diag = Vec::with_capacity(nodes.len());
        let mut nbrs = Vec::with_capacity(nodes.len());
        for &k in &nodes {
            let arms = grid.arms(k);
            let nb = grid.neighbours(k);
            let mut a = 0.0;
            let mut row = [usize::MAX; 4];
            for d in 0..4 {
                let n = nb[d].expect("interior node on grid edge");
                if grid.is_interior(n) {
                    a += 1.0;
                    row[d] = n;
                } else {
                    a += 1.0 / arms[d];
                }
            }
            diag.push(a);
            nbrs.push(row);
        }
        System { nodes, diag, nbrs, rhs: eta * grid.h * grid.h }
    }

    #[inline]
    fn off_sum(&self, r: usize, u: &[f64]) -> f64 {
        let mut s = 0.0;
        for &n in &self.nbrs[r] {
            if n != usize::MAX {
                s += u[n];
            }
        }
        s
    }

    /// `I_h(u) = 1/2 u.Au - eta h^2 sum u` (scaled by `h^2`, which equals the
    /// quadrature of the continuous energy).
    fn energy(&self, u: &[f64]) -> f64 {
        let mut e = 0.0;
        for (r, &k) in self.nodes.iter().enumerate() {
            let au = self.diag[r] * u[k] - self.off_sum(r, u);
            e += 0.5 * u[k] * au - self.rhs * u[k];
        }
        e
    }
}

/// Solve the obstacle problem below `obstacle` on its grid.
pub fn solve_obstacle(obstacle: &ScalarField, cfg: &SolveConfig) -> Result<Solution> {
    cfg.validate()?;
    let grid = obstacle.grid.clone();
    if (grid.h - cfg.h).abs() > 1e-15 * cfg.h {
        return Err(Error::Config(format!("solver h = {} does not match grid h = {}", cfg.h, grid.h)));
    }
    if obstacle.values.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Config("obstacle must be non-negative".into()));
    }
    let sys = System::new(&grid, cfg.eta);
    let psi = &obstacle.values;
    let mut u = vec![0.0; grid.len()];
    let mut stats = SolveStats::default();
    let omega = cfg.omega;

    let colour = |r: &usize| {
        let (i, j) = grid.ij(sys.nodes[*r]);
        (i + j) % 2
    };
    let red: Vec<usize> = (0..sys.nodes.len()).filter(|r| colour(r) == 0).collect();
    let black: Vec<usize> = (0..sys.nodes.len()).filter(|r| colour(r) == 1).collect();

    let mut last = f64::INFINITY;
    let mut it = 0;
    while it < cfg.max_iters {
        it += 1;
        let mut max_update = 0.0_f64;
        match cfg.sweep {
            Sweep::Lexicographic => {
                for (r, &k) in sys.nodes.iter().enumerate() {
                    let gs = (sys.rhs + sys.off_sum(r, &u)) / sys.diag[r];
                    let new = (u[k] + omega * (gs - u[k])).min(psi[k]);
                    max_update = max_update.max((new - u[k]).abs());
                    u[k] = new;
                }
            }
            Sweep::RedBlack => {
                for colour in [&red, &black] {
                    let updates: Vec<(usize, f64)> = colour
                        .par_iter()
                        .map(|&r| {
                            let k = sys.nodes[r];
                            let gs = (sys.rhs + sys.off_sum(r, &u)) / sys.diag[r];
                            (k, (u[k] + omega * (gs - u[k])).min(psi[k]))
                        })
                        .collect();
                    for (k, new) in updates {
                        max_update = max_update.max((new - u[k]).abs());
                        u[k] = new;
                    }
                }
            }
        }
        last = max_update;
        if it % 100 == 0 {
            stats.energy_trace.push((it, sys.energy(&u)));
        }
        if max_update < cfg.tol {
            break;
        }
    }
    stats.iterations = it;
    stats.last_update = last;
    stats.energy_trace.push((it, sys.energy(&u)));
    if !(last < cfg.tol) {
        return Err(Error::IterationLimit { iterations: it, last_update: last });
    }
    let field = ScalarField { grid, values: u };
    stats.residual = complementarity_residual(&field, obstacle, cfg.eta)?;
    Ok(Solution { u: field, stats })
}

/// Discrete energy of a field under the scheme above.
pub fn energy(u: &ScalarField, eta: f64) -> f64 {
    System::new(&u.grid, eta).energy(&u.values)
}

/// Per-node residual `eta h^2 - (h^2 A u)` at interior nodes (zero elsewhere).
pub fn residual(u: &ScalarField, eta: f64) -> Vec<f64> {
    let sys = System::new(&u.grid, eta);
    let mut r = vec![0.0; u.values.len()];
    for (row, &k) in sys.nodes.iter().enumerate() {
        r[k] = sys.rhs - (sys.diag[row] * u.values[k] - sys.off_sum(row, &u.values));
    }
    r
}

/// Largest violation of discrete complementarity, relative to each row's
/// diagonal: free nodes need `r = 0`, contact nodes need `r >= 0`.
pub fn complementarity_residual(u: &ScalarField, obstacle: &ScalarField, eta: f64) -> Result<f64> {
    u.check_same_grid(obstacle)?;
    let sys = System::new(&u.grid, eta);
    let mut worst = 0.0_f64;
    for (row, &k) in sys.nodes.iter().enumerate() {
        let r = sys.rhs - (sys.diag[row] * u.values[k] - sys.off_sum(row, &u.values));
        let v = if u.values[k] < obstacle.values[k] { r.abs() } else { (-r).max(0.0) };
        worst = worst.max(v / sys.diag[row]);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Elastic,
    Plastic,
    Boundary,
    Exterior,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Elastic => "elastic",
            Region::Plastic => "plastic",
            Region::Boundary => "boundary",
            Region::Exterior => "exterior",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct GradientDiagnostics {
    /// Largest `gamma_q` of the difference gradient of `u` over interior nodes.
    pub max_gamma_q: f64,
    /// Mean `|gamma_q - 1|` over plastic nodes.
    pub plastic_mean_deviation: f64,
    /// Fraction of elastic nodes with `gamma_q < 1`.
    pub elastic_below_one: f64,
}

#[derive(Clone, Debug)]
pub struct RegionField {
    pub labels: Vec<Region>,
    pub contact_tol: f64,
    /// `d_p - u` per node.
    pub gap: ScalarField,
    pub d_p: ScalarField,
    pub gradient: GradientDiagnostics,
}

impl RegionField {
    pub fn grid(&self) -> &Grid {
        &self.gap.grid
    }

    /// Contact threshold at a node; it shrinks with `d_p / h` within one cell
    /// of the boundary, where `d_p` itself is below `h`.
    pub fn tolerance_at(&self, d: f64) -> f64 {
        self.contact_tol * (d / self.grid().h).min(1.0)
    }

    /// Contact threshold at node `k`.
    pub fn node_tolerance(&self, k: usize) -> f64 {
        self.tolerance_at(self.d_p.values[k])
    }

    pub fn count(&self, r: Region) -> usize {
        self.labels.iter().filter(|l| **l == r).count()
    }

    pub fn is_plastic(&self, k: usize) -> bool {
        self.labels[k] == Region::Plastic
    }
}

/// Second-order difference gradient of `u` at an interior node, using the
/// boundary value 0 at the arm crossings.
pub fn difference_gradient(u: &ScalarField, k: usize) -> Vec2 {
    let g = &u.grid;
    let arms = g.arms(k);
    let nb = g.neighbours(k);
    let val = |d: usize| {
        let n = nb[d].expect("interior node on grid edge");
        if g.is_interior(n) {
            u.values[n]
        } else {
            0.0
        }
    };
    let deriv = |fwd: usize, back: usize| {
        let (b, a) = (arms[fwd] * g.h, arms[back] * g.h);
        let (fp, fm, f0) = (val(fwd), val(back), u.values[k]);
        -b / (a * (a + b)) * fm + (b - a) / (a * b) * f0 + a / (b * (a + b)) * fp
    };
    Vec2::new(deriv(0, 1), deriv(2, 3))
}

/// Label nodes plastic where `d_p - u` is within the contact tolerance.
pub fn classify_regions(u: &ScalarField, obstacle: &ScalarField, contact_tol: f64, e: ExponentPair) -> Result<RegionField> {
    u.check_same_grid(obstacle)?;
    let grid = &u.grid;
    let h = grid.h;
    let gap: Vec<f64> = obstacle.values.iter().zip(&u.values).map(|(d, v)| d - v).collect();
    let labels: Vec<Region> = (0..grid.len())
        .map(|k| match grid.kind(k) {
            NodeKind::Exterior => Region::Exterior,
            NodeKind::Boundary => Region::Boundary,
            NodeKind::Interior => {
                let tol = contact_tol * (obstacle.values[k] / h).min(1.0);
                if gap[k] <= tol {
                    Region::Plastic
                } else {
                    Region::Elastic
                }
            }
        })
        .collect();

    let mut diag = GradientDiagnostics::default();
    let (mut n_pl, mut n_el, mut el_below) = (0usize, 0usize, 0usize);
    let mut dev = 0.0;
    for (k, label) in labels.iter().enumerate() {
        if !grid.is_interior(k) {
            continue;
        }
        let gq = gamma_q(difference_gradient(u, k), e);
        diag.max_gamma_q = diag.max_gamma_q.max(gq);
        match label {
            Region::Plastic => {
                n_pl += 1;
                dev += (gq - 1.0).abs();
            }
            Region::Elastic => {
                n_el += 1;
                if gq < 1.0 {
                    el_below += 1;
                }
            }
            _ => {}
        }
    }
    if n_pl > 0 {
        diag.plastic_mean_deviation = dev / n_pl as f64;
    }
    if n_el > 0 {
        diag.elastic_below_one = el_below as f64 / n_el as f64;
    }
    Ok(RegionField { labels, contact_tol, gap: ScalarField { grid: grid.clone(), values: gap }, d_p: obstacle.clone(), gradient: diag })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::boundary::shapes;
    use crate::distance::d_p_field;

    fn ep(p: f64) -> ExponentPair {
        ExponentPair::new(p).unwrap()
    }

    fn disk_setup(res: usize, p: f64) -> ScalarField {
        let d = shapes::disk(Vec2::ZERO, 1.0).unwrap();
        let g = Arc::new(Grid::new(&d, res).unwrap());
        d_p_field(&d, g, ep(p))
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig::new(-1.0, 0.1).is_err());
        let mut c = SolveConfig::new(1.0, 0.1).unwrap();
        assert_eq!(c.max_iters, 2000);
        c.omega = 2.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn elastic_disk_matches_poisson_solution() {
        let obs = disk_setup(32, 2.0);
        let h = obs.grid.h;
        let cfg = SolveConfig::new(1.0, h).unwrap();
        let sol = solve_obstacle(&obs, &cfg).unwrap();
        let g = &sol.u.grid;
        let mut err = 0.0_f64;
        for k in g.interior_indices() {
            let r2 = g.pos(k).dot(g.pos(k));
            err = err.max((sol.u.values[k] - (1.0 - r2) / 4.0).abs());
        }
        assert!(err <= 5.0 * h * h, "err {err}");
        let reg = classify_regions(&sol.u, &obs, cfg.contact_tol, ep(2.0)).unwrap();
        assert_eq!(reg.count(Region::Plastic), 0);
        assert!(reg.gradient.max_gamma_q < 1.0);
    }

    #[test]
    fn energy_decreases_and_solution_respects_obstacle() {
        let obs = disk_setup(24, 3.0);
        let cfg = SolveConfig::new(6.0, obs.grid.h).unwrap();
        let sol = solve_obstacle(&obs, &cfg).unwrap();
        let tr = &sol.stats.energy_trace;
        assert!(tr.len() >= 2);
        for w in tr.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-14);
        }
        for k in sol.u.grid.interior_indices() {
            assert!(sol.u.values[k] >= 0.0 && sol.u.values[k] <= obs.values[k]);
        }
        assert!(sol.stats.residual <= 10.0 * cfg.tol);
    }

    #[test]
    fn red_black_reaches_the_same_fixed_point() {
        let obs = disk_setup(20, 2.0);
        let mut cfg = SolveConfig::new(4.0, obs.grid.h).unwrap();
        cfg.tol = 1e-12;
        let a = solve_obstacle(&obs, &cfg).unwrap();
        cfg.sweep = Sweep::RedBlack;
        let b = solve_obstacle(&obs, &cfg).unwrap();
        for (x, y) in a.u.values.iter().zip(&b.u.values) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
        let c = solve_obstacle(&obs, &cfg).unwrap();
        assert_eq!(b.u.values, c.u.values);
    }

    #[test]
    fn monotone_in_eta() {
        let obs = disk_setup(20, 2.0);
        let h = obs.grid.h;
        let lo = solve_obstacle(&obs, &SolveConfig::new(2.0, h).unwrap()).unwrap();
        let hi = solve_obstacle(&obs, &SolveConfig::new(5.0, h).unwrap()).unwrap();
        for (a, b) in lo.u.values.iter().zip(&hi.u.values) {
            assert!(a <= &(b + 1e-9));
        }
    }

    #[test]
    fn large_eta_saturates_to_the_obstacle() {
        let obs = disk_setup(16, 2.0);
        let sol = solve_obstacle(&obs, &SolveConfig::new(400.0, obs.grid.h).unwrap()).unwrap();
        let reg = classify_regions(&sol.u, &obs, 1e-3, ep(2.0)).unwrap();
        let frac = reg.count(Region::Plastic) as f64 / obs.grid.interior_indices().len() as f64;
        assert!(frac > 0.9, "{frac}");
    }

    #[test]
    fn iteration_limit_is_reported() {
        let obs = disk_setup(16, 2.0);
        let mut cfg = SolveConfig::new(1.0, obs.grid.h).unwrap();
        cfg.max_iters = 3;
        assert!(matches!(solve_obstacle(&obs, &cfg), Err(Error::IterationLimit { iterations: 3, .. })));
    }

    #[test]
    fn boundary_nodes_are_never_plastic_or_elastic() {
        let obs = disk_setup(16, 2.0);
        let sol = solve_obstacle(&obs, &SolveConfig::new(4.0, obs.grid.h).unwrap()).unwrap();
        let reg = classify_regions(&sol.u, &obs, 1e-3, ep(2.0)).unwrap();
        for k in 0..reg.labels.len() {
            if obs.grid.kind(k) == NodeKind::Boundary {
                assert_eq!(reg.labels[k], Region::Boundary);
            }
        }
    }
}
