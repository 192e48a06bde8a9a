//! Projected SOR for the discrete obstacle problem on a box with Dirichlet
//! data:
//!
//! ```text
//! u >= 0,   Δ_h u <= 1,   u (1 - Δ_h u) = 0   at interior nodes
//! ```
//!
//! with the five-point Laplacian `Δ_h`. Sweeps are lexicographic in the
//! row-major node order, so a run is fully deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{FieldSampler, Grid2, Point2, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub omega: f64,
    /// Target for the complementarity residual (∞-norm).
    pub tol: f64,
    pub max_iter: usize,
    /// Nodes with `u <= u_zero_tol · h^2` count as coincidence.
    pub u_zero_tol: f64,
    /// Sweeps between residual evaluations.
    pub check_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { omega: 1.8, tol: 1e-6, max_iter: 200_000, u_zero_tol: 0.5, check_every: 25 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(LabError::Precondition(format!("omega = {} must lie in (0, 2)", self.omega)));
        }
        if !(self.tol > 0.0) {
            return Err(LabError::Precondition(format!("tol = {} must be > 0", self.tol)));
        }
        if self.max_iter == 0 || self.check_every == 0 {
            return Err(LabError::Precondition("max_iter and check_every must be >= 1".into()));
        }
        if !(self.u_zero_tol > 0.0) {
            return Err(LabError::Precondition(format!("u_zero_tol = {} must be > 0", self.u_zero_tol)));
        }
        Ok(())
    }

    /// Relaxation factor that is optimal for the unconstrained Poisson
    /// problem on the given grid.
    pub fn optimal_omega(grid: &Grid2) -> f64 {
        let n = grid.nx.max(grid.ny) as f64 - 1.0;
        2.0 / (1.0 + (std::f64::consts::PI / n).sin())
    }
}

/// Nodes of the discrete coincidence set `{u = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceMask {
    grid: Grid2,
    flags: Vec<bool>,
    /// Rows whose flagged nodes do not form one contiguous run.
    pub nonconvex_rows: Vec<usize>,
}

impl CoincidenceMask {
    pub fn new(grid: Grid2, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != grid.len() {
            return Err(LabError::Precondition(format!(
                "mask has {} flags for a grid of {} nodes",
                flags.len(),
                grid.len()
            )));
        }
        let nonconvex_rows = (0..grid.ny)
            .filter(|&j| {
                let row = &flags[j * grid.nx..(j + 1) * grid.nx];
                let runs = row.windows(2).filter(|w| w[1] && !w[0]).count() + usize::from(row[0]);
                runs > 1
            })
            .collect();
        Ok(Self { grid, flags, nonconvex_rows })
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|f| **f).count()
    }

    pub fn is_convex_by_rows(&self) -> bool {
        self.nonconvex_rows.is_empty()
    }

    /// Coordinates of the flagged nodes in index order.
    pub fn points(&self) -> Vec<Point2> {
        let g = self.grid();
        self.flags.iter().enumerate().filter(|(_, f)| **f).map(|(k, _)| g.node_at(k)).collect()
    }

    pub fn contains_node(&self, i: usize, j: usize) -> bool {
        self.flags[self.grid().index(i, j)]
    }

    /// Indicator of the nearest flagged node, usable as a density sampler.
    pub fn indicator(&self) -> MaskIndicator<'_> {
        MaskIndicator { mask: self }
    }

    /// 0/1 field on the mask grid, for the CSV writer.
    pub fn to_field(&self) -> ScalarField {
        let values = self.flags.iter().map(|f| if *f { 1.0 } else { 0.0 }).collect();
        ScalarField::new(*self.grid(), values).expect("0/1 values are finite")
    }
}

/// `χ_C` sampled from the nearest grid node; zero outside the box.
#[derive(Debug, Clone, Copy)]
pub struct MaskIndicator<'a> {
    mask: &'a CoincidenceMask,
}

impl FieldSampler for MaskIndicator<'_> {
    fn value(&self, x: Point2) -> Result<f64> {
        Ok(match self.mask.grid().nearest_node(x) {
            Some((i, j)) if self.mask.contains_node(i, j) => 1.0,
            _ => 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub iterations: usize,
    pub residual: f64,
    #[serde(serialize_with = "mask_summary")]
    pub mask: CoincidenceMask,
    /// Largest magnitude among the discrete second differences.
    pub hessian_bound: f64,
    /// `(iteration, residual)` at every check.
    pub checkpoints: Vec<(usize, f64)>,
    pub convexity_warning: bool,
}

fn mask_summary<S: serde::Serializer>(m: &CoincidenceMask, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(3))?;
    map.serialize_entry("grid", &m.grid)?;
    map.serialize_entry("nodes", &m.count())?;
    map.serialize_entry("nonconvex_rows", &m.nonconvex_rows)?;
    map.end()
}

impl SolverReport {
    /// Whether the residual never increased between checkpoints after the first.
    pub fn residual_monotone(&self) -> bool {
        self.checkpoints.windows(2).skip(1).all(|w| w[1].1 <= w[0].1)
    }
}

/// Flags nodes with `u <= u_zero_tol · h^2`.
pub fn extract_mask(u: &ScalarField, cfg: &SolverConfig) -> Result<CoincidenceMask> {
    let grid = *u.grid();
    let thr = cfg.u_zero_tol * grid.h() * grid.h();
    if let Some(v) = u.values().iter().find(|v| **v < 0.0) {
        return Err(LabError::Precondition(format!("field has negative value {v}")));
    }
    CoincidenceMask::new(grid, u.values().iter().map(|v| *v <= thr).collect())
}

/// Interior complementarity residual `max_i |min(4 u_i / h^2, 1 - Δ_h u_i)|`.
///
/// A residual `<= tol` with `u_zero_tol <= 1/2` gives `|Δ_h u - 1| <= tol`
/// wherever `u > u_zero_tol·h^2` and `Δ_h u <= 1 + tol` everywhere.
pub fn complementarity_residual(u: &ScalarField) -> f64 {
    let g = u.grid();
    residual_of(u.values(), g.nx, g.ny, g.h())
}

fn residual_of(v: &[f64], nx: usize, ny: usize, h: f64) -> f64 {
    let h2 = h * h;
    let mut res = 0.0f64;
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let k = j * nx + i;
            let lap = (v[k - 1] + v[k + 1] + v[k - nx] + v[k + nx] - 4.0 * v[k]) / h2;
            res = res.max((4.0 * v[k] / h2).min(1.0 - lap).abs());
        }
    }
    res
}

fn hessian_bound(u: &[f64], nx: usize, ny: usize, h: f64) -> f64 {
    let h2 = h * h;
    let mut m = 0.0f64;
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let k = j * nx + i;
            let dxx = (u[k - 1] - 2.0 * u[k] + u[k + 1]) / h2;
            let dyy = (u[k - nx] - 2.0 * u[k] + u[k + nx]) / h2;
            let dxy = (u[k + nx + 1] - u[k + nx - 1] - u[k - nx + 1] + u[k - nx - 1]) / (4.0 * h2);
            m = m.max(dxx.abs()).max(dyy.abs()).max(dxy.abs());
        }
    }
    m
}

/// Solves with the interior initialized to zero.
pub fn solve_obstacle(
    grid: Grid2,
    boundary: &dyn FieldSampler,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolverReport)> {
    solve_obstacle_from(grid, boundary, None, cfg)
}

/// Solves starting from `initial` (interior values only are used).
pub fn solve_obstacle_from(
    grid: Grid2,
    boundary: &dyn FieldSampler,
    initial: Option<&dyn FieldSampler>,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolverReport)> {
    cfg.validate()?;
    if grid.nx < 3 || grid.ny < 3 {
        return Err(LabError::Precondition("grid has no interior nodes".into()));
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let h = grid.h();
    let mut u = vec![0.0; grid.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = grid.index(i, j);
            let x = grid.node(i, j);
            if grid.is_boundary(i, j) {
                let b = boundary.value(x)?;
                if !b.is_finite() || b < 0.0 {
                    return Err(LabError::Precondition(format!(
                        "boundary value {b} at ({}, {}) must be finite and >= 0",
                        x.x1, x.x2
                    )));
                }
                u[k] = b;
            } else if let Some(init) = initial {
                u[k] = init.value(x)?.max(0.0);
            }
        }
    }

    let quarter_h2 = 0.25 * h * h;
    let omega = cfg.omega;
    let mut checkpoints = Vec::new();
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while iterations < cfg.max_iter {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = j * nx + i;
                let avg = 0.25 * (u[k - 1] + u[k + 1] + u[k - nx] + u[k + nx]);
                u[k] = ((1.0 - omega) * u[k] + omega * (avg - quarter_h2)).max(0.0);
            }
        }
        iterations += 1;
        if iterations % cfg.check_every == 0 || iterations == cfg.max_iter {
            residual = residual_of(&u, nx, ny, h);
            checkpoints.push((iterations, residual));
            if residual <= cfg.tol {
                break;
            }
        }
    }
    if residual > cfg.tol {
        return Err(LabError::NonConvergence { iterations, residual });
    }
    let hb = hessian_bound(&u, nx, ny, h);
    let field = ScalarField::new(grid, u)?;
    let mask = extract_mask(&field, cfg)?;
    let convexity_warning = !mask.is_convex_by_rows();
    Ok((field, SolverReport { iterations, residual, mask, hessian_bound: hb, checkpoints, convexity_warning }))
}

/// True iff every flagged node with `y2 >= r2` satisfies `y1^2 <= y2^{1+δ}`.
pub fn coincidence_growth_check(mask: &CoincidenceMask, delta: f64, r2: f64) -> Result<bool> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LabError::Precondition(format!("delta = {delta} must lie in (0, 1)")));
    }
    if !(r2 > 0.0) {
        return Err(LabError::Precondition(format!("r2 = {r2} must be > 0")));
    }
    Ok(mask.points().into_iter().filter(|y| y.x2 >= r2).all(|y| y.x1 * y.x1 <= y.x2.powf(1.0 + delta)))
}

/// Hausdorff distance between two sets of grid nodes given as flag vectors on
/// the same grid. Empty against non-empty is infinite; two empty sets give 0.
pub fn hausdorff_nodes(grid: &Grid2, a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != grid.len() || b.len() != grid.len() {
        return Err(LabError::Precondition("flag vectors do not match the grid".into()));
    }
    let rows = |flags: &[bool]| -> Vec<Vec<usize>> {
        (0..grid.ny).map(|j| (0..grid.nx).filter(|&i| flags[grid.index(i, j)]).collect()).collect()
    };
    let (ra, rb) = (rows(a), rows(b));
    let na: usize = ra.iter().map(Vec::len).sum();
    let nb: usize = rb.iter().map(Vec::len).sum();
    if na == 0 && nb == 0 {
        return Ok(0.0);
    }
    if na == 0 || nb == 0 {
        return Ok(f64::INFINITY);
    }
    let directed = |from: &[Vec<usize>], to: &[Vec<usize>]| -> f64 {
        let mut worst = 0usize;
        for (j, row) in from.iter().enumerate() {
            for &i in row {
                // squared distance in cell units to the nearest node of `to`
                let mut best = usize::MAX;
                for (jj, trow) in to.iter().enumerate() {
                    let dj = j.abs_diff(jj);
                    if dj * dj >= best {
                        continue;
                    }
                    if trow.is_empty() {
                        continue;
                    }
                    let pos = trow.partition_point(|&t| t < i);
                    for cand in [pos.checked_sub(1), Some(pos)].into_iter().flatten() {
                        if let Some(&t) = trow.get(cand) {
                            let di = i.abs_diff(t);
                            best = best.min(di * di + dj * dj);
                        }
                    }
                }
                worst = worst.max(best);
            }
        }
        worst as f64
    };
    let d = directed(&ra, &rb).max(directed(&rb, &ra));
    Ok(d.sqrt() * grid.h())
}
