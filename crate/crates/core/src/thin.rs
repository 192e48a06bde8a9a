//! Homogeneous global solutions of the thin obstacle problem and the
//! normalized 3/2-profile `v̂` used as the blow-down target.
//!
//! The closed forms live in coordinates where the slit is `{x1 <= 0, x2 = 0}`.
//! `v̂` has its slit on `{x1 = 0, x2 >= 0}`; the two are related by the
//! rotation `(x̃1, x̃2) = (-x2, x1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{FieldSampler, Point2, Vector2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThinKind {
    /// `Re (x1 + i x2)^{2m}`, a harmonic polynomial.
    EvenPolynomial,
    /// `Re (x1 + i|x2|)^{2m - 1/2}`.
    ReHalfInteger,
    /// `Im (x1 + i|x2|)^{2m + 1}`.
    ImOdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThinProfile {
    pub kind: ThinKind,
    pub m: u32,
    pub scale: f64,
}

impl ThinProfile {
    pub fn new(kind: ThinKind, m: u32, scale: f64) -> Result<Self> {
        if m == 0 {
            return Err(LabError::Precondition("thin profile needs m >= 1".into()));
        }
        if !scale.is_finite() {
            return Err(LabError::Precondition(format!("scale = {scale} is not finite")));
        }
        Ok(Self { kind, m, scale })
    }

    /// Degree of homogeneity κ.
    pub fn kappa(&self) -> f64 {
        let m = self.m as f64;
        match self.kind {
            ThinKind::EvenPolynomial => 2.0 * m,
            ThinKind::ReHalfInteger => 2.0 * m - 0.5,
            ThinKind::ImOdd => 2.0 * m + 1.0,
        }
    }

    pub fn value(&self, x: Point2) -> f64 {
        thin_homogeneous(self, x)
    }

    /// Gradient of the closed form. The half-integer and odd kinds are not
    /// differentiable across `{x2 = 0}`, so points there are rejected.
    pub fn gradient(&self, x: Point2) -> Result<Vector2> {
        let k = self.kappa();
        if x.x1 == 0.0 && x.x2 == 0.0 {
            return Err(LabError::Domain("gradient requested at the origin".into()));
        }
        if self.kind == ThinKind::EvenPolynomial {
            let d = k * Complex64::new(x.x1, x.x2).powi(self.m as i32 * 2 - 1);
            return Ok([self.scale * d.re, -self.scale * d.im]);
        }
        if x.x2 == 0.0 {
            return Err(LabError::Domain(format!("thin profile is not differentiable at ({}, 0)", x.x1)));
        }
        let z = Complex64::new(x.x1, x.x2.abs());
        let d = k * upper_pow(z, k - 1.0);
        let (g1, g2) = match self.kind {
            ThinKind::ReHalfInteger => (d.re, -d.im),
            _ => (d.im, d.re),
        };
        Ok([self.scale * g1, self.scale * g2 * x.x2.signum()])
    }
}

/// `z^κ` with `arg z ∈ [0, π]` (z in the closed upper half-plane).
fn upper_pow(z: Complex64, kappa: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let arg = z.im.atan2(z.re).abs();
    Complex64::from_polar(r.powf(kappa), kappa * arg)
}

/// Value of the homogeneous thin-obstacle solution described by `p`.
pub fn thin_homogeneous(p: &ThinProfile, x: Point2) -> f64 {
    let z = Complex64::new(x.x1, x.x2.abs());
    let k = p.kappa();
    let v = match p.kind {
        ThinKind::EvenPolynomial => Complex64::new(x.x1, x.x2).powi(p.m as i32 * 2).re,
        // exact zeros on the slit and on the axis respectively
        ThinKind::ReHalfInteger if z.im == 0.0 && z.re <= 0.0 => 0.0,
        ThinKind::ImOdd if z.im == 0.0 => 0.0,
        ThinKind::ReHalfInteger => upper_pow(z, k).re,
        ThinKind::ImOdd => upper_pow(z, k).im,
    };
    p.scale * v
}

impl FieldSampler for ThinProfile {
    fn value(&self, x: Point2) -> Result<f64> {
        Ok(thin_homogeneous(self, x))
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        Some(ThinProfile::gradient(self, x))
    }
}

fn rotated(x: Point2) -> Complex64 {
    // (x̃1, x̃2) = (-x2, x1), folded to the upper half-plane.
    Complex64::new(-x.x2, x.x1.abs())
}

/// `v̂(x) = π^{-1/2} Re (-x2 + i|x1|)^{3/2}`: 3/2-homogeneous, zero on the slit
/// `{x1 = 0, x2 >= 0}`, non-positive on `{x2 >= 0}` and unit norm on `∂B_1`.
pub fn vhat32(x: Point2) -> f64 {
    if x.x1 == 0.0 && x.x2 >= 0.0 {
        return 0.0;
    }
    upper_pow(rotated(x), 1.5).re / PI.sqrt()
}

/// Gradient of [`vhat32`]; it jumps across the slit, so slit points are rejected.
pub fn vhat32_grad(x: Point2) -> Result<Vector2> {
    if x.x1 == 0.0 && x.x2 >= 0.0 {
        return Err(LabError::Domain(format!("v̂ is not differentiable on the slit at (0, {})", x.x2)));
    }
    let s = upper_pow(rotated(x), 0.5);
    let c = 1.5 / PI.sqrt();
    Ok([-c * s.im * x.x1.signum(), -c * s.re])
}

/// `v̂` as a sampler with its analytic gradient.
#[derive(Debug, Clone, Copy, Default)]
pub struct VHat;

impl FieldSampler for VHat {
    fn value(&self, x: Point2) -> Result<f64> {
        Ok(vhat32(x))
    }
    fn gradient(&self, x: Point2) -> Option<Result<Vector2>> {
        Some(vhat32_grad(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vhat_reference_values() {
        assert_eq!(vhat32(Point2::new(0.0, 3.0)), 0.0);
        assert!((vhat32(Point2::new(0.0, -1.0)) - 0.564_189_583_547_756_3).abs() < 1e-15);
        // On the positive x1 axis ψ = π/2: π^{-1/2} cos(3π/4).
        let v = vhat32(Point2::new(1.0, 0.0));
        assert!((v + (0.5f64).sqrt() / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn slit_gradient_rejected() {
        assert!(vhat32_grad(Point2::new(0.0, 1.0)).is_err());
        assert!(vhat32_grad(Point2::new(0.0, -1.0)).is_ok());
    }

    #[test]
    fn vhat_matches_rotated_thin_profile() {
        let p = ThinProfile::new(ThinKind::ReHalfInteger, 1, 1.0 / PI.sqrt()).unwrap();
        for &(a, b) in &[(0.3, 0.7), (-1.2, 0.4), (0.5, -2.0), (-0.1, -0.1)] {
            let x = Point2::new(a, b);
            let y = Point2::new(-b, a);
            assert!((vhat32(x) - thin_homogeneous(&p, y)).abs() < 1e-14);
        }
    }

    #[test]
    fn thin_profiles_vanish_where_expected() {
        let re = ThinProfile::new(ThinKind::ReHalfInteger, 2, 1.0).unwrap();
        let im = ThinProfile::new(ThinKind::ImOdd, 1, 1.0).unwrap();
        for t in [0.1, 1.0, 5.0] {
            assert!(thin_homogeneous(&re, Point2::new(-t, 0.0)).abs() < 1e-12 * t.powf(3.5));
            assert_eq!(thin_homogeneous(&im, Point2::new(t, 0.0)), 0.0);
        }
        assert!(ThinProfile::new(ThinKind::ImOdd, 0, 1.0).is_err());
    }
}
