//! Points, uniform grids, nodal fields and the model geometry (half-space
//! polynomial, paraboloid) shared by the rest of the crate.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A gradient or direction in the plane.
pub type Vector2 = [f64; 2];

/// A point `(x1, x2)` of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    /// Like [`Point2::new`] but rejects NaN and infinite components.
    pub fn try_new(x1: f64, x2: f64) -> Result<Self> {
        if x1.is_finite() && x2.is_finite() {
            Ok(Self { x1, x2 })
        } else {
            Err(LabError::Domain(format!("non-finite point ({x1}, {x2})")))
        }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(r * c, r * s)
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn norm_sq(self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, p: Point2) -> Point2 {
        Point2::new(self * p.x1, self * p.x2)
    }
}

/// The half-space blow-down `p(x) = x1^2 / 2`.
pub fn halfspace_poly(x: Point2) -> f64 {
    0.5 * x.x1 * x.x1
}

/// Gradient of [`halfspace_poly`].
pub fn halfspace_poly_grad(x: Point2) -> Vector2 {
    [x.x1, 0.0]
}

/// The coincidence-set model `{(x1 + sigma)^2 <= gamma x2, x2 >= 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Paraboloid {
    gamma: f64,
    sigma: f64,
}

impl Paraboloid {
    pub fn new(gamma: f64, sigma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(LabError::Domain(format!("paraboloid opening gamma = {gamma} must be > 0")));
        }
        if !sigma.is_finite() {
            return Err(LabError::Domain("paraboloid shift must be finite".into()));
        }
        Ok(Self { gamma, sigma })
    }

    /// Unshifted paraboloid with opening `gamma`.
    pub fn centered(gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn contains(&self, x: Point2) -> bool {
        paraboloid_contains(self, x)
    }

    /// Half-width `sqrt(gamma y2)` of the slice at height `y2 >= 0`.
    pub fn half_width(&self, y2: f64) -> f64 {
        (self.gamma * y2.max(0.0)).sqrt()
    }
}

/// Membership test for the shifted paraboloid.
pub fn paraboloid_contains(p: &Paraboloid, x: Point2) -> bool {
    let s = x.x1 + p.sigma;
    x.x2 >= 0.0 && s * s <= p.gamma * x.x2
}

/// A uniform Cartesian grid with square cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Grid2 {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Result<Self> {
        if ![xmin, xmax, ymin, ymax].iter().all(|v| v.is_finite()) {
            return Err(LabError::Domain("grid extents must be finite".into()));
        }
        if !(xmax > xmin && ymax > ymin) {
            return Err(LabError::Domain(format!("empty grid box [{xmin}, {xmax}] x [{ymin}, {ymax}]")));
        }
        if nx < 2 || ny < 2 {
            return Err(LabError::Domain(format!("grid needs at least 2 nodes per axis, got {nx}x{ny}")));
        }
        let hx = (xmax - xmin) / (nx - 1) as f64;
        let hy = (ymax - ymin) / (ny - 1) as f64;
        if (hx - hy).abs() > 1e-12 * hx.max(1.0) {
            return Err(LabError::Domain(format!("anisotropic cells: hx = {hx}, hy = {hy}")));
        }
        Ok(Self { xmin, xmax, ymin, ymax, nx, ny })
    }

    /// Grid over the given box with spacing `h`; the extents must be integer
    /// multiples of `h` apart.
    pub fn with_spacing(xmin: f64, xmax: f64, ymin: f64, ymax: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(LabError::Domain(format!("grid spacing h = {h} must be > 0")));
        }
        let cells_x = (xmax - xmin) / h;
        let cells_y = (ymax - ymin) / h;
        let (cx, cy) = (cells_x.round(), cells_y.round());
        if (cells_x - cx).abs() > 1e-9 || (cells_y - cy).abs() > 1e-9 {
            return Err(LabError::Domain(format!(
                "box [{xmin}, {xmax}] x [{ymin}, {ymax}] is not a whole number of cells of size {h}"
            )));
        }
        Self::new(xmin, xmax, ymin, ymax, cx as usize + 1, cy as usize + 1)
    }

    /// Grid whose extents are widened outward to multiples of `h`, so that the
    /// lines `{x1 = 0}` and `{x2 = 0}` carry nodes whenever they cross the box.
    pub fn snapped(xmin: f64, xmax: f64, ymin: f64, ymax: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(LabError::Domain(format!("grid spacing h = {h} must be > 0")));
        }
        let snap = |t: f64, f: fn(f64) -> f64| if (t - t.round()).abs() < 1e-9 { t.round() } else { f(t) };
        let lo_x = snap(xmin / h, f64::floor);
        let hi_x = snap(xmax / h, f64::ceil);
        let lo_y = snap(ymin / h, f64::floor);
        let hi_y = snap(ymax / h, f64::ceil);
        Self::new(lo_x * h, hi_x * h, lo_y * h, hi_y * h, (hi_x - lo_x) as usize + 1, (hi_y - lo_y) as usize + 1)
    }

    pub fn h(&self) -> f64 {
        (self.xmax - self.xmin) / (self.nx - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index of node `(i, j)`; `i` runs along `x1`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node(&self, i: usize, j: usize) -> Point2 {
        let h = self.h();
        Point2::new(self.xmin + i as f64 * h, self.ymin + j as f64 * h)
    }

    pub fn node_at(&self, idx: usize) -> Point2 {
        self.node(idx % self.nx, idx / self.nx)
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny
    }

    pub fn contains(&self, x: Point2) -> bool {
        let slack = 1e-12 * self.h();
        x.x1 >= self.xmin - slack && x.x1 <= self.xmax + slack && x.x2 >= self.ymin - slack && x.x2 <= self.ymax + slack
    }

    /// Node closest to `x`, if `x` lies in the box.
    pub fn nearest_node(&self, x: Point2) -> Option<(usize, usize)> {
        if !self.contains(x) {
            return None;
        }
        let h = self.h();
        let i = ((x.x1 - self.xmin) / h).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((x.x2 - self.ymin) / h).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        Some((i, j))
    }
}

/// Nodal values on a [`Grid2`], stored row-major from `(xmin, ymin)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::Domain(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Domain(format!("non-finite field value at node {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Tabulates `f` at every node.
    pub fn from_fn(grid: Grid2, mut f: impl FnMut(Point2) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(grid.node_at(k))).collect();
        Self::new(grid, values)
    }

    /// Tabulates a sampler at every node, propagating its errors.
    pub fn from_sampler(grid: Grid2, s: &dyn FieldSampler) -> Result<Self> {
        let values = (0..grid.len()).into_par_iter().map(|k| s.value(grid.node_at(k))).collect::<Result<Vec<_>>>()?;
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn cell(&self, x: Point2) -> Result<(usize, usize, f64, f64)> {
        let g = &self.grid;
        if !x.is_finite() || !g.contains(x) {
            return Err(LabError::Domain(format!(
                "point ({}, {}) outside grid box [{}, {}] x [{}, {}]",
                x.x1, x.x2, g.xmin, g.xmax, g.ymin, g.ymax
            )));
        }
        let h = g.h();
        let fx = ((x.x1 - g.xmin) / h).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((x.x2 - g.ymin) / h).clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let t = (x.x1 - (g.xmin + i as f64 * h)) / h;
        let s = (x.x2 - (g.ymin + j as f64 * h)) / h;
        Ok((i, j, t.clamp(0.0, 1.0), s.clamp(0.0, 1.0)))
    }

    /// Bilinear interpolation of the four nodes around `x`.
    pub fn bilinear(&self, x: Point2) -> Result<f64> {
        let (i, j, t, s) = self.cell(x)?;
        let f00 = self.get(i, j);
        let f10 = self.get(i + 1, j);
        let f01 = self.get(i, j + 1);
        let f11 = self.get(i + 1, j + 1);
        Ok((1.0 - s) * ((1.0 - t) * f00 + t * f10) + s * ((1.0 - t) * f01 + t * f11))
    }

    /// Gradient of the bilinear interpolant in the cell containing `x`.
    pub fn bilinear_grad(&self, x: Point2) -> Result<Vector2> {
        let (i, j, t, s) = self.cell(x)?;
        let h = self.grid.h();
        let f00 = self.get(i, j);
        let f10 = self.get(i + 1, j);
        let f01 = self.get(i, j + 1);
        let f11 = self.get(i + 1, j + 1);
        let d1 = ((1.0 - s) * (f10 - f00) + s * (f11 - f01)) / h;
        let d2 = ((1.0 - t) * (f01 - f00) + t * (f11 - f10)) / h;
        Ok([d1, d2])
    }

    /// Writes the field as CSV: a header line, the grid line, then one value
    /// per line in node order, each with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let g = &self.grid;
        writeln!(out, "nx,ny,xmin,xmax,ymin,ymax")?;
        writeln!(out, "{},{},{},{},{},{}", g.nx, g.ny, fmt17(g.xmin), fmt17(g.xmax), fmt17(g.ymin), fmt17(g.ymax))?;
        for v in &self.values {
            writeln!(out, "{}", fmt17(*v))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| LabError::Parse(format!("missing {what}")))?
                .map_err(|e| LabError::Parse(e.to_string()))
        };
        let header = next("header")?;
        if header.trim() != "nx,ny,xmin,xmax,ymin,ymax" {
            return Err(LabError::Parse(format!("unexpected header {header:?}")));
        }
        let meta = next("grid line")?;
        let parts: Vec<&str> = meta.trim().split(',').collect();
        if parts.len() != 6 {
            return Err(LabError::Parse(format!("grid line needs 6 fields: {meta:?}")));
        }
        let int = |s: &str| s.trim().parse::<usize>().map_err(|e| LabError::Parse(format!("{s:?}: {e}")));
        let real = |s: &str| s.trim().parse::<f64>().map_err(|e| LabError::Parse(format!("{s:?}: {e}")));
        let grid = Grid2::new(
            real(parts[2])?,
            real(parts[3])?,
            real(parts[4])?,
            real(parts[5])?,
            int(parts[0])?,
            int(parts[1])?,
        )?;
        let mut values = Vec::with_capacity(grid.len());
        for line in lines {
            let line = line.map_err(|e| LabError::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            values.push(real(&line)?);
        }
        Self::new(grid, values)
    }
}

/// Decimal form with 17 significant digits; parses back to the same bits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Bilinear interpolation of `f` at `x`.
pub fn bilinear_sample(f: &ScalarField, x: Point2) -> Result<f64> {
    f.bilinear(x)
}

/// A scalar function that can be evaluated at any point of its domain.
///
/// Implementations must be deterministic. `gradient` returns `None` when no
/// analytic gradient is available; callers then fall back to finite differences.
pub trait FieldSampler: Sync {
    fn value(&self, x: Point2) -> Result<f64>;

    fn gradient(&self, _x: Point2) -> Option<Result<Vector2>> {
        None
    }
}

impl<T: FieldSampler + ?Sized> FieldSampler for &T {
    fn value(&self, x: Point2) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        (**self).gradient(x)
    }
}

impl<T: FieldSampler + ?Sized> FieldSampler for Box<T> {
    fn value(&self, x: Point2) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        (**self).gradient(x)
    }
}

impl<T: FieldSampler + ?Sized + Send> FieldSampler for std::sync::Arc<T> {
    fn value(&self, x: Point2) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        (**self).gradient(x)
    }
}

impl FieldSampler for ScalarField {
    fn value(&self, x: Point2) -> Result<f64> {
        self.bilinear(x)
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        Some(self.bilinear_grad(x))
    }
}

/// Sampler backed by a closure, without an analytic gradient.
pub struct FnSampler<F>(pub F);

impl<F> FieldSampler for FnSampler<F>
where
    F: Fn(Point2) -> f64 + Sync,
{
    fn value(&self, x: Point2) -> Result<f64> {
        Ok((self.0)(x))
    }
}

/// Sampler backed by a value closure and a gradient closure.
pub struct GradFnSampler<F, G> {
    pub value: F,
    pub grad: G,
}

impl<F, G> GradFnSampler<F, G> {
    pub fn new(value: F, grad: G) -> Self {
        Self { value, grad }
    }
}

impl<F, G> FieldSampler for GradFnSampler<F, G>
where
    F: Fn(Point2) -> f64 + Sync,
    G: Fn(Point2) -> Vector2 + Sync,
{
    fn value(&self, x: Point2) -> Result<f64> {
        Ok((self.value)(x))
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        Some(Ok((self.grad)(x)))
    }
}

/// Equispaced trapezoid rule on the circle `∂B_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleRule {
    pub r: f64,
    pub nodes: Vec<Point2>,
    pub weights: Vec<f64>,
}

impl CircleRule {
    /// Angle of node `k`. Nodes sit at half-integer multiples of `2π/n`, so
    /// none lands on the coordinate axes.
    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * (k as f64 + 0.5) / self.nodes.len() as f64
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(Point2) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn try_integrate(&self, mut f: impl FnMut(Point2) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

/// `n` equispaced nodes on `∂B_r` with uniform weights `2πr/n`.
pub fn circle_rule(r: f64, n: usize) -> Result<CircleRule> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(LabError::Domain(format!("circle radius r = {r} must be > 0")));
    }
    if n < 8 {
        return Err(LabError::Domain(format!("circle rule needs n >= 8 nodes, got {n}")));
    }
    let w = 2.0 * PI * r / n as f64;
    let nodes = (0..n).map(|k| Point2::polar(r, 2.0 * PI * (k as f64 + 0.5) / n as f64)).collect();
    Ok(CircleRule { r, nodes, weights: vec![w; n] })
}
