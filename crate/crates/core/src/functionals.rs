//! Radial monotonicity quantities: `H`, `D`, the Almgren frequency, doubling
//! ratio, matching functional, the three-phase ACF functional and the
//! residuals of the differential identities for `H` and `φ`.
//!
//! Boundary integrals use the trapezoid [`CircleRule`]; area integrals over
//! `B_r` use Gauss-Legendre layers in the radius times the same angular rule.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{circle_rule, fmt17, CircleRule, FieldSampler, Point2, Vector2};
use crate::quadrature::gauss_legendre_unit;
use crate::thin::vhat32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalConfig {
    pub n_angular: usize,
    pub n_radial: usize,
    /// Central-difference step for samplers without an analytic gradient.
    pub gradient_step: f64,
}

impl Default for FunctionalConfig {
    fn default() -> Self {
        Self { n_angular: 1024, n_radial: 256, gradient_step: 1e-5 }
    }
}

impl FunctionalConfig {
    pub fn new(n_angular: usize, n_radial: usize) -> Result<Self> {
        let cfg = Self { n_angular, n_radial, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_angular < 64 {
            return Err(LabError::Precondition(format!("n_angular = {} must be >= 64", self.n_angular)));
        }
        if self.n_radial < 2 {
            return Err(LabError::Precondition(format!("n_radial = {} must be >= 2", self.n_radial)));
        }
        if !(self.gradient_step > 0.0 && self.gradient_step.is_finite()) {
            return Err(LabError::Precondition(format!("gradient_step = {} must be > 0", self.gradient_step)));
        }
        Ok(())
    }
}

/// Samples `r ↦ value` on strictly increasing radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(LabError::Precondition(format!("{} radii but {} values", radii.len(), values.len())));
        }
        check_radii(&radii)?;
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(LabError::Domain(format!("profile value {v} is not finite")));
        }
        Ok(Self { radii, values })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Largest relative drop `(v[i] - v[i+1]) / |v[i]|` between consecutive
    /// samples; non-positive for a non-decreasing profile.
    pub fn max_relative_drop(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[0] - w[1]) / w[0].abs().max(f64::MIN_POSITIVE))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute drop `v[i] - v[i+1]`.
    pub fn max_drop(&self) -> f64 {
        self.values.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Least-squares slope of `log |value|` against `log r`.
    pub fn loglog_slope(&self) -> Result<f64> {
        if self.len() < 2 {
            return Err(LabError::Precondition("slope needs at least two samples".into()));
        }
        if self.values.contains(&0.0) {
            return Err(LabError::Degenerate("zero value in log-log fit".into()));
        }
        let xs: Vec<f64> = self.radii.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = self.values.iter().map(|v| v.abs().ln()).collect();
        Ok(crate::potential::least_squares_slope(&xs, &ys))
    }

    /// CSV with header `r,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,value")?;
        for (r, v) in self.radii.iter().zip(&self.values) {
            writeln!(out, "{},{}", fmt17(*r), fmt17(*v))?;
        }
        Ok(())
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(LabError::Precondition(format!("radius {r} must be positive and finite")));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Precondition("radii must be strictly increasing".into()));
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(LabError::Precondition(format!("radius {r} must be positive and finite")))
    }
}

/// Gradient of `w` at `x`, analytic when the sampler has one.
pub fn sampler_gradient(w: &dyn FieldSampler, x: Point2, step: f64) -> Result<Vector2> {
    if let Some(g) = w.gradient(x) {
        return g;
    }
    let h = step * x.norm().max(1.0);
    let d1 = (w.value(Point2::new(x.x1 + h, x.x2))? - w.value(Point2::new(x.x1 - h, x.x2))?) / (2.0 * h);
    let d2 = (w.value(Point2::new(x.x1, x.x2 + h))? - w.value(Point2::new(x.x1, x.x2 - h))?) / (2.0 * h);
    Ok([d1, d2])
}

/// Tensor polar rule on `B_r`: Gauss-Legendre in the radius, trapezoid in angle.
struct DiskRule {
    layers: Vec<(f64, f64)>,
    circle: CircleRule,
}

impl DiskRule {
    fn new(r: f64, cfg: &FunctionalConfig) -> Result<Self> {
        cfg.validate()?;
        check_radius(r)?;
        let layers = gauss_legendre_unit(cfg.n_radial)?.into_iter().map(|(t, w)| (t * r, w * r * t * r)).collect();
        Ok(Self { layers, circle: circle_rule(1.0, cfg.n_angular)? })
    }

    /// `∫_{B_r} f` for a vector of integrands; layers run in parallel, sums
    /// are taken in a fixed order.
    fn integrate<const N: usize>(&self, f: impl Fn(Point2) -> Result<[f64; N]> + Sync) -> Result<[f64; N]> {
        let dtheta = 2.0 * PI / self.circle.len() as f64;
        let per_layer: Vec<Result<[f64; N]>> = self
            .layers
            .par_iter()
            .map(|&(rho, w)| {
                let mut acc = [0.0; N];
                for p in &self.circle.nodes {
                    let v = f(rho * *p)?;
                    for c in 0..N {
                        acc[c] += v[c];
                    }
                }
                Ok(acc.map(|a| a * w * dtheta))
            })
            .collect();
        let mut total = [0.0; N];
        for layer in per_layer {
            let layer = layer?;
            for c in 0..N {
                total[c] += layer[c];
            }
        }
        Ok(total)
    }
}

/// `∫_{∂B_1} f(r θ) dθ` with the trapezoid rule.
fn unit_circle_integral(r: f64, n: usize, f: impl Fn(Point2) -> Result<f64> + Sync) -> Result<f64> {
    check_radius(r)?;
    let rule = circle_rule(1.0, n)?;
    let vals: Vec<Result<f64>> = rule.nodes.par_iter().map(|&p| f(p)).collect();
    let mut s = 0.0;
    for (v, w) in vals.into_iter().zip(&rule.weights) {
        s += w * v?;
    }
    Ok(s)
}

/// `H(r, w) = r^{-1} ∫_{∂B_r} w^2`.
pub fn boundary_l2(w: &dyn FieldSampler, r: f64, cfg: &FunctionalConfig) -> Result<f64> {
    cfg.validate()?;
    unit_circle_integral(r, cfg.n_angular, |p| {
        let v = w.value(r * p)?;
        Ok(v * v)
    })
}

/// `D(r, w) = ∫_{B_r} |∇w|^2`.
pub fn dirichlet_energy(w: &dyn FieldSampler, r: f64, cfg: &FunctionalConfig) -> Result<f64> {
    let rule = DiskRule::new(r, cfg)?;
    let [d] = rule.integrate(|x| {
        let g = sampler_gradient(w, x, cfg.gradient_step)?;
        Ok([g[0] * g[0] + g[1] * g[1]])
    })?;
    Ok(d)
}

/// Almgren frequency `φ(r, w) = D(r, w) / H(r, w)`.
pub fn almgren(w: &dyn FieldSampler, r: f64, cfg: &FunctionalConfig) -> Result<f64> {
    let h = boundary_l2(w, r, cfg)?;
    if !(h > 0.0) {
        return Err(LabError::Degenerate(format!("H({r}) = {h:e} vanishes")));
    }
    Ok(dirichlet_energy(w, r, cfg)? / h)
}

/// Applies `f` at every radius; the radii must be strictly increasing.
pub fn radial_profile(radii: &[f64], f: impl Fn(f64) -> Result<f64> + Sync) -> Result<RadialProfile> {
    check_radii(radii)?;
    let values: Result<Vec<f64>> = radii.iter().map(|&r| f(r)).collect();
    RadialProfile::new(radii.to_vec(), values?)
}

pub fn almgren_profile(w: &dyn FieldSampler, radii: &[f64], cfg: &FunctionalConfig) -> Result<RadialProfile> {
    radial_profile(radii, |r| almgren(w, r, cfg))
}

/// `∫_{∂B_1} w(2r·)^2 / ∫_{∂B_1} w(r·)^2 = H(2r, w) / H(r, w)`.
pub fn doubling_ratio(w: &dyn FieldSampler, r: f64, cfg: &FunctionalConfig) -> Result<f64> {
    let h1 = boundary_l2(w, r, cfg)?;
    if !(h1 > 0.0) {
        return Err(LabError::Degenerate(format!("H({r}) = {h1:e} vanishes")));
    }
    Ok(boundary_l2(w, 2.0 * r, cfg)? / h1)
}

/// `M(r) = r^{-3/2} ∫_{∂B_1} v̂(θ) w(r θ) dθ`.
pub fn matching_functional(w: &dyn FieldSampler, r: f64, cfg: &FunctionalConfig) -> Result<f64> {
    cfg.validate()?;
    let s = unit_circle_integral(r, cfg.n_angular, |p| Ok(vhat32(p) * w.value(r * p)?))?;
    Ok(s * r.powf(-1.5))
}

/// A support predicate for one phase of [`acf_modified`].
pub type Support<'a> = &'a (dyn Fn(Point2) -> bool + Sync);

/// `Φ(r) = r^{-β} ∏_i ∫_{B_r ∩ S_i} |∇v_i|^2` for three phases with disjoint supports.
pub fn acf_modified(
    v: [&dyn FieldSampler; 3],
    supports: [Support<'_>; 3],
    r: f64,
    beta: f64,
    cfg: &FunctionalConfig,
) -> Result<f64> {
    let rule = DiskRule::new(r, cfg)?;
    let e = rule.integrate(|x| {
        let inside = supports.map(|s| s(x));
        if inside.iter().filter(|b| **b).count() > 1 {
            return Err(LabError::Precondition(format!("supports overlap at ({:.6}, {:.6})", x.x1, x.x2)));
        }
        let mut out = [0.0; 3];
        for i in 0..3 {
            if inside[i] {
                let g = sampler_gradient(v[i], x, cfg.gradient_step)?;
                out[i] = g[0] * g[0] + g[1] * g[1];
            }
        }
        Ok(out)
    })?;
    Ok(r.powf(-beta) * e[0] * e[1] * e[2])
}

/// Numerical `d/dr log H(r, w)` from a central difference with step `r·1e-3`.
pub fn dlog_h(w: &dyn FieldSampler, r: f64, cfg: &FunctionalConfig) -> Result<f64> {
    let dr = r * 1e-3;
    let hp = boundary_l2(w, r + dr, cfg)?;
    let hm = boundary_l2(w, r - dr, cfg)?;
    if !(hp > 0.0 && hm > 0.0) {
        return Err(LabError::Degenerate(format!("H vanishes near r = {r}")));
    }
    Ok((hp.ln() - hm.ln()) / (2.0 * dr))
}

/// `|d/dr log H - (2/r)(D + ∫_{B_r} w Δw) / H|` with `Δw` supplied as a density.
pub fn hprime_identity_gap(
    w: &dyn FieldSampler,
    laplacian_density: &dyn FieldSampler,
    r: f64,
    cfg: &FunctionalConfig,
) -> Result<f64> {
    let lhs = dlog_h(w, r, cfg)?;
    let h = boundary_l2(w, r, cfg)?;
    if !(h > 0.0) {
        return Err(LabError::Degenerate(format!("H({r}) = {h:e} vanishes")));
    }
    let rule = DiskRule::new(r, cfg)?;
    let [d, pairing] = rule.integrate(|x| {
        let g = sampler_gradient(w, x, cfg.gradient_step)?;
        let lap = laplacian_density.value(x)?;
        let wl = if lap == 0.0 { 0.0 } else { w.value(x)? * lap };
        Ok([g[0] * g[0] + g[1] * g[1], wl])
    })?;
    let rhs = 2.0 / r * (d + pairing) / h;
    Ok((lhs - rhs).abs())
}

/// One-sided residual of `dφ/dr >= -2 r^{-1} H^{-1} ∫_{B_r ∩ C} x1^2`, where
/// `coincidence` is the indicator of `C`. Zero when the inequality holds.
pub fn frequency_derivative_residual(
    w: &dyn FieldSampler,
    coincidence: &dyn FieldSampler,
    r: f64,
    cfg: &FunctionalConfig,
) -> Result<f64> {
    let dr = r * 1e-3;
    let dphi = (almgren(w, r + dr, cfg)? - almgren(w, r - dr, cfg)?) / (2.0 * dr);
    let h = boundary_l2(w, r, cfg)?;
    let rule = DiskRule::new(r, cfg)?;
    let [m] = rule.integrate(|x| Ok([coincidence.value(x)? * x.x1 * x.x1]))?;
    let bound = -2.0 * m / (r * h);
    Ok((bound - dphi).max(0.0))
}

/// Empirical constant in `⨍_{B_r} |∇d|^2 <= C r^{-2} ⨍_{B_{2r}} d^2` for
/// `d = u1 - u2`.
pub fn energy_inequality_ratio(
    u1: &dyn FieldSampler,
    u2: &dyn FieldSampler,
    r: f64,
    cfg: &FunctionalConfig,
) -> Result<f64> {
    let inner = DiskRule::new(r, cfg)?;
    let [grad] = inner.integrate(|x| {
        let g1 = sampler_gradient(u1, x, cfg.gradient_step)?;
        let g2 = sampler_gradient(u2, x, cfg.gradient_step)?;
        let (a, b) = (g1[0] - g2[0], g1[1] - g2[1]);
        Ok([a * a + b * b])
    })?;
    let outer = DiskRule::new(2.0 * r, cfg)?;
    let [mass] = outer.integrate(|x| {
        let d = u1.value(x)? - u2.value(x)?;
        Ok([d * d])
    })?;
    if !(mass > 0.0) {
        return Err(LabError::Degenerate("u1 = u2 on B_2r".into()));
    }
    Ok(4.0 * r * r * grad / mass)
}

/// Sector eigenfunction `|ρ^λ sin(λ(θ - start))|` on `start <= θ < start + width`
/// with `λ = mπ/width`, extended by zero. Used to build ACF test triples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorMode {
    pub start: f64,
    pub width: f64,
    pub lambda: f64,
}

impl SectorMode {
    pub fn new(start: f64, width: f64, m: u32) -> Result<Self> {
        if !(width > 0.0 && width < 2.0 * PI) || !start.is_finite() {
            return Err(LabError::Precondition(format!("sector width {width} must lie in (0, 2π)")));
        }
        if m == 0 {
            return Err(LabError::Precondition("sector mode needs m >= 1".into()));
        }
        Ok(Self { start, width, lambda: m as f64 * PI / width })
    }

    fn offset(&self, x: Point2) -> f64 {
        (x.x2.atan2(x.x1) - self.start).rem_euclid(2.0 * PI)
    }

    pub fn contains(&self, x: Point2) -> bool {
        self.offset(x) < self.width
    }
}

impl FieldSampler for SectorMode {
    fn value(&self, x: Point2) -> Result<f64> {
        let t = self.offset(x);
        if t >= self.width {
            return Ok(0.0);
        }
        Ok((x.norm().powf(self.lambda) * (self.lambda * t).sin()).abs())
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        let t = self.offset(x);
        let rho = x.norm();
        if t >= self.width || rho == 0.0 {
            return Some(Ok([0.0, 0.0]));
        }
        let (s, c) = (self.lambda * t).sin_cos();
        let k = self.lambda * rho.powf(self.lambda - 1.0) * s.signum();
        let (e1, e2) = (x.x1 / rho, x.x2 / rho);
        // radial part k·s, angular part k·c
        Some(Ok([k * (s * e1 - c * e2), k * (s * e2 + c * e1)]))
    }
}

/// [`acf_modified`] for three sector modes, each supported on its own sector.
pub fn acf_sector_triple(modes: &[SectorMode; 3], r: f64, beta: f64, cfg: &FunctionalConfig) -> Result<f64> {
    let [a, b, c] = *modes;
    let sa = move |x: Point2| a.contains(x);
    let sb = move |x: Point2| b.contains(x);
    let sc = move |x: Point2| c.contains(x);
    acf_modified([&a, &b, &c], [&sa, &sb, &sc], r, beta, cfg)
}
