//! The normalized logarithmic kernel, the generalized Newtonian potential of a
//! paraboloid and the paraboloid solution built from it.
//!
//! The potential of `γP = {y1^2 <= γ y2}` is evaluated slice by slice: for a
//! fixed height `y2` the kernel is integrated over `|y1| <= sqrt(γ y2)` in
//! closed form, which also integrates the logarithmic singularity at `y = x`
//! exactly. What remains is a one-dimensional integral in `y2`:
//!
//! * `[0, Y]` in the variable `t = sqrt(y2)` (removes the square-root
//!   behaviour at the tip), split at the singular heights `y2 = x2` and
//!   `y2 = x1^2/γ` and at the edges of a cell of width `near_cell` around them;
//! * `[Y, R*]` in the variable `s = sqrt(Y / y2)`;
//! * `y2 > R*` is dropped, with `R*` chosen so that [`tail_bound`] is at most
//!   half the requested tolerance.
//!
//! Shifted paraboloids are handled by translating the evaluation point:
//! `u_σ(x1, x2) = u_{γP}(x1 + σ, x2)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::geometry::{halfspace_poly, FieldSampler, Paraboloid, Point2, Vector2};
use crate::quadrature::integrate_adaptive;

/// Quadrature controls for potential evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialConfig {
    /// Target absolute error of `V`.
    pub abs_tol: f64,
    /// Width of the cell around each singular height that is split off.
    pub near_cell: f64,
    /// Initial panel length (in `y2`) of the near segment.
    pub base_panel: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-8, near_cell: 1.0, base_panel: 0.5 }
    }
}

const NEAR_CELL_FLOOR: f64 = 1e-12;
const MAX_PANELS: usize = 4000;

impl PotentialConfig {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol <= 1.0) {
            return Err(LabError::Precondition(format!("abs_tol = {} must lie in (0, 1]", self.abs_tol)));
        }
        if !(self.near_cell >= 2.0 * NEAR_CELL_FLOOR && self.near_cell.is_finite()) {
            return Err(LabError::Precondition(format!("near_cell = {} too small", self.near_cell)));
        }
        if !(self.base_panel > 0.0 && self.base_panel.is_finite()) {
            return Err(LabError::Precondition(format!("base_panel = {} must be > 0", self.base_panel)));
        }
        Ok(())
    }
}

fn check_kernel_args(x: Point2, y: Point2) -> Result<()> {
    if y.x1 == 0.0 && y.x2 == 0.0 {
        return Err(LabError::Domain("kernel evaluated at y = 0".into()));
    }
    if x == y {
        return Err(LabError::Domain("kernel evaluated at y = x".into()));
    }
    Ok(())
}

fn cplx(p: Point2) -> Complex64 {
    Complex64::new(p.x1, p.x2)
}

/// `G(x, y) = log|x - y| - log|y| + x·y / |y|^2`.
///
/// Far from the diagonal the terms cancel to `O(|x|^2/|y|^2)`; there the value
/// is summed from `-Re Σ_{k>=2} (x/y)^k / k` instead.
pub fn kernel_g(x: Point2, y: Point2) -> Result<f64> {
    check_kernel_args(x, y)?;
    let zeta = cplx(x) / cplx(y);
    if zeta.norm_sqr() < 1.0 / 64.0 {
        let mut pow = zeta;
        let mut acc = 0.0;
        for k in 2..40 {
            pow *= zeta;
            let term = pow.re / k as f64;
            acc += term;
            if pow.norm() < 1e-18 * acc.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        return Ok(-acc);
    }
    let d = x - y;
    Ok(0.5 * (d.norm_sq() / y.norm_sq()).ln() + x.dot(y) / y.norm_sq())
}

/// Gradient of [`kernel_g`] in `x`: `(x - y)/|x - y|^2 + y/|y|^2`.
pub fn grad_kernel_g(x: Point2, y: Point2) -> Result<Vector2> {
    check_kernel_args(x, y)?;
    let d = x - y;
    let dn = d.norm_sq();
    let yn = y.norm_sq();
    Ok([d.x1 / dn + y.x1 / yn, d.x2 / dn + y.x2 / yn])
}

/// Upper bound on the contribution of `{y ∈ γP : y2 > R}` to `V_{γP}(x)` for
/// `|x| = xnorm`, from `|G(x,y)| <= 6 |x|^2 / |y|^2` when `|y| >= 2|x|`.
pub fn tail_bound(gamma: f64, r: f64, xnorm: f64) -> Result<f64> {
    if !(r > 0.0) || r < 2.0 * xnorm {
        return Err(LabError::Precondition(format!("tail bound needs R >= 2|x| and R > 0 (R = {r}, |x| = {xnorm})")));
    }
    if !(gamma > 0.0) {
        return Err(LabError::Precondition(format!("gamma = {gamma} must be > 0")));
    }
    Ok(6.0 * xnorm * xnorm * 4.0 * gamma.sqrt() / (2.0 * PI * r.sqrt()))
}

/// Smallest `R` with `tail_bound(gamma, R, xnorm) <= target`, also covering
/// the gradient tail (`|∇_x G| <= 2|x| / |y|^2`).
fn truncation_radius(gamma: f64, xnorm: f64, target: f64) -> f64 {
    let c = 24.0 * xnorm * xnorm * gamma.sqrt() / (2.0 * PI);
    let cg = 8.0 * xnorm * gamma.sqrt() / (2.0 * PI);
    (c / target).powi(2).max((cg / target).powi(2))
}

/// `Log(1 - z)` for small `|z|` without cancellation in the real part.
fn log1m(z: Complex64) -> Complex64 {
    let re = 0.5 * (-2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = (-z.im).atan2(1.0 - z.re);
    Complex64::new(re, im)
}

/// Slice integrals over `y1 ∈ [-a, a]` at height `y2 > 0`:
/// `∫ G(x, y) dy1` and `∫ (1/y - 1/(y - x)) dy1`, the latter being the
/// complex derivative whose `(Re, -Im)` is `∫ ∇_x G dy1`.
fn slice(x: Complex64, a: f64, y2: f64) -> (f64, Complex64) {
    let wp = Complex64::new(a, y2);
    let wm = Complex64::new(-a, y2);
    let xn = x.norm();
    let far = y2 > x.im && wp.norm() >= 4.0 * xn && wm.norm() >= 4.0 * xn;
    if far {
        // Both endpoints lie where Log(w - x) - Log(w) = Log(1 - x/w).
        let zp = x / wp;
        let zm = x / wm;
        let dz = x * Complex64::new(-2.0 * a, 0.0) / (wp * wm);
        // Σ_k (zp^k - zm^k) / (k(k+1)) with the differences built recursively.
        let mut diff = dz;
        let mut zm_pow = Complex64::new(1.0, 0.0);
        let mut acc = diff / 2.0;
        for k in 1..60usize {
            zm_pow *= zm;
            diff = zp * diff + zm_pow * dz;
            let term = diff / ((k + 1) * (k + 2)) as f64;
            acc += term;
            if term.norm() <= 1e-17 * acc.norm() {
                break;
            }
        }
        let g = (x * acc).re;
        // Log w - Log(w - x) = -Log(1 - x/w); difference over the endpoints.
        let q = dz / (Complex64::new(1.0, 0.0) - zp);
        let dj = log1m(-q);
        (g, dj)
    } else {
        let f = |w: Complex64| -> (f64, Complex64) {
            let wx = w - x;
            let lw = w.ln();
            if wx.re == 0.0 && wx.im == 0.0 {
                return (0.0, Complex64::new(0.0, 0.0));
            }
            let lwx = wx.ln();
            ((wx * (lwx - lw)).re, lw - lwx)
        };
        let (gp, jp) = f(wp);
        let (gm, jm) = f(wm);
        (gp - gm, jp - jm)
    }
}

/// Integral over `γP` of `G(x, ·)` together with that of `∇_x G(x, ·)`.
fn paraboloid_integrals(gamma: f64, x: Point2, cfg: &PotentialConfig) -> [f64; 3] {
    let xn = x.norm();
    if xn == 0.0 {
        return [0.0; 3];
    }
    let xc = cplx(x);
    let integrand = |y2: f64| -> [f64; 3] {
        if y2 <= 0.0 {
            return [0.0; 3];
        }
        let (g, j) = slice(xc, (gamma * y2).sqrt(), y2);
        [g, j.re, -j.im]
    };

    // The integrals are of G; V carries the factor -1/(2π).
    let tol = 2.0 * PI * cfg.abs_tol;
    let singular: Vec<f64> = [x.x2, x.x1 * x.x1 / gamma].into_iter().filter(|&s| s > 0.0).collect();
    let top = singular.iter().copied().fold(4.0 * xn, f64::max) + cfg.near_cell;

    // Near segment in t = sqrt(y2).
    let mut breaks_y = vec![0.0, top];
    for &s in &singular {
        breaks_y.push(s);
        breaks_y.push((s - 0.5 * cfg.near_cell).max(0.0));
        breaks_y.push(s + 0.5 * cfg.near_cell);
    }
    let n_base = ((top / cfg.base_panel).ceil() as usize).clamp(1, 64);
    breaks_y.extend((1..n_base).map(|k| top * k as f64 / n_base as f64));
    let mut breaks_t: Vec<f64> = breaks_y.into_iter().map(f64::sqrt).collect();
    breaks_t.sort_by(f64::total_cmp);
    breaks_t.dedup();
    let near = integrate_adaptive(
        |t| {
            let v = integrand(t * t);
            let jac = 2.0 * t;
            [v[0] * jac, v[1] * jac, v[2] * jac]
        },
        &breaks_t,
        0.25 * tol,
        MAX_PANELS,
    );

    // Far segment in s = sqrt(top / y2), truncated at R*.
    let r_star = truncation_radius(gamma, xn, 0.5 * cfg.abs_tol);
    let mut out = near.value;
    if r_star > top {
        let s_min = (top / r_star).sqrt();
        let n_far = 8;
        let breaks_s: Vec<f64> = (0..=n_far).map(|k| s_min * (1.0 / s_min).powf(k as f64 / n_far as f64)).collect();
        let far = integrate_adaptive(
            |s| {
                let y2 = top / (s * s);
                let v = integrand(y2);
                let jac = 2.0 * top / (s * s * s);
                [v[0] * jac, v[1] * jac, v[2] * jac]
            },
            &breaks_s,
            0.25 * tol,
            MAX_PANELS,
        );
        for (o, f) in out.iter_mut().zip(far.value) {
            *o += f;
        }
    }
    out
}

fn shifted(p: &Paraboloid, x: Point2) -> Point2 {
    Point2::new(x.x1 + p.sigma(), x.x2)
}

/// `V_{γP}(x + σ e1)`, accurate to about `cfg.abs_tol`.
pub fn potential_paraboloid(p: &Paraboloid, x: Point2, cfg: &PotentialConfig) -> f64 {
    potential_with_gradient(p, x, cfg).0
}

/// `∇V_{γP}(x + σ e1)`.
pub fn potential_gradient(p: &Paraboloid, x: Point2, cfg: &PotentialConfig) -> Vector2 {
    potential_with_gradient(p, x, cfg).1
}

/// Value and gradient of the potential from a single quadrature pass.
pub fn potential_with_gradient(p: &Paraboloid, x: Point2, cfg: &PotentialConfig) -> (f64, Vector2) {
    let xs = shifted(p, x);
    let [g, g1, g2] = paraboloid_integrals(p.gamma(), xs, cfg);
    let k = -1.0 / (2.0 * PI);
    (k * g, [k * g1, k * g2])
}

/// Certified bound on the truncated far field at `x` for the given config.
pub fn truncation_error_bound(p: &Paraboloid, x: Point2, cfg: &PotentialConfig) -> f64 {
    let xn = shifted(p, x).norm();
    if xn == 0.0 {
        return 0.0;
    }
    let r = truncation_radius(p.gamma(), xn, 0.5 * cfg.abs_tol).max(2.0 * xn);
    tail_bound(p.gamma(), r, xn).unwrap_or(0.0)
}

/// Paraboloid solution `u_σ(x) = max(p + V, 0)` evaluated at `x + σ e1`.
/// Points of the (shifted) paraboloid return 0 without quadrature.
pub fn u_paraboloid(p: &Paraboloid, x: Point2, cfg: &PotentialConfig) -> f64 {
    if p.contains(x) {
        return 0.0;
    }
    let xs = shifted(p, x);
    (halfspace_poly(xs) + potential_paraboloid(p, x, cfg)).max(0.0)
}

/// Log-log least-squares slope of `|V|` along the ray `r d`, `r ∈ [r_lo, r_hi]`.
pub fn growth_exponent_fit(
    p: &Paraboloid,
    direction: Vector2,
    r_lo: f64,
    r_hi: f64,
    n: usize,
    cfg: &PotentialConfig,
) -> Result<f64> {
    let dn = direction[0].hypot(direction[1]);
    if (dn - 1.0).abs() > 1e-9 {
        return Err(LabError::Precondition(format!("direction must be a unit vector (norm {dn})")));
    }
    if direction[0].abs() < 1e-12 && direction[1] > 0.0 {
        return Err(LabError::Precondition("ray along +x2 never leaves the paraboloid".into()));
    }
    if !(r_lo >= 1.0 && r_hi > r_lo) || n < 2 {
        return Err(LabError::Precondition(format!(
            "need 1 <= r_lo < r_hi and n >= 2 (r_lo = {r_lo}, r_hi = {r_hi}, n = {n})"
        )));
    }
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for k in 0..n {
        let r = r_lo * (r_hi / r_lo).powf(k as f64 / (n - 1) as f64);
        let v = potential_paraboloid(p, Point2::new(r * direction[0], r * direction[1]), cfg);
        if v.abs() < 1e-14 {
            return Err(LabError::Degenerate(format!("|V| = {v:e} at r = {r} along the ray")));
        }
        xs.push(r.ln());
        ys.push(v.abs().ln());
    }
    Ok(least_squares_slope(&xs, &ys))
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// The potential `x ↦ V_{γP}(x + σ e1)` as a sampler.
#[derive(Debug, Clone, Copy)]
pub struct PotentialSampler {
    pub paraboloid: Paraboloid,
    pub cfg: PotentialConfig,
}

impl FieldSampler for PotentialSampler {
    fn value(&self, x: Point2) -> Result<f64> {
        Ok(potential_paraboloid(&self.paraboloid, x, &self.cfg))
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        Some(Ok(potential_gradient(&self.paraboloid, x, &self.cfg)))
    }
}

/// The paraboloid solution `u_σ` as a sampler.
#[derive(Debug, Clone, Copy)]
pub struct ParaboloidSolution {
    pub paraboloid: Paraboloid,
    pub cfg: PotentialConfig,
}

impl ParaboloidSolution {
    pub fn new(paraboloid: Paraboloid, cfg: PotentialConfig) -> Self {
        Self { paraboloid, cfg }
    }

    /// Value and gradient of `u_σ`; both vanish where `p + V <= 0`.
    pub fn eval(&self, x: Point2) -> (f64, Vector2) {
        if self.paraboloid.contains(x) {
            return (0.0, [0.0, 0.0]);
        }
        let xs = shifted(&self.paraboloid, x);
        let (v, dv) = potential_with_gradient(&self.paraboloid, x, &self.cfg);
        let u = halfspace_poly(xs) + v;
        if u > 0.0 {
            (u, [xs.x1 + dv[0], dv[1]])
        } else {
            (0.0, [0.0, 0.0])
        }
    }
}

impl FieldSampler for ParaboloidSolution {
    fn value(&self, x: Point2) -> Result<f64> {
        Ok(u_paraboloid(&self.paraboloid, x, &self.cfg))
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        Some(Ok(self.eval(x).1))
    }
}

/// `w = u_σ - p(· + σ e1)`, the deviation of the paraboloid solution from its
/// quadratic blow-down.
#[derive(Debug, Clone, Copy)]
pub struct ParaboloidDeviation {
    pub solution: ParaboloidSolution,
}

impl ParaboloidDeviation {
    pub fn new(paraboloid: Paraboloid, cfg: PotentialConfig) -> Self {
        Self { solution: ParaboloidSolution::new(paraboloid, cfg) }
    }
}

impl FieldSampler for ParaboloidDeviation {
    fn value(&self, x: Point2) -> Result<f64> {
        let xs = shifted(&self.solution.paraboloid, x);
        Ok(self.solution.value(x)? - halfspace_poly(xs))
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        let xs = shifted(&self.solution.paraboloid, x);
        let (_, du) = self.solution.eval(x);
        Some(Ok([du[0] - xs.x1, du[1]]))
    }
}
