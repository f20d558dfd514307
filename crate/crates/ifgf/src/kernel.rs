//! Helmholtz and Laplace kernels and their factored forms.
//!
//! The free-space kernel `G(x, x') = exp(ik|x - x'|) / (4 pi |x - x'|)`
//! factors, for sources `x'` inside a box with center `c` and targets `x`
//! outside its neighborhood, as
//!
//! ```text
//! G(x, x') = G(x, c) * g(x, x'),
//! g(x, x') = (|x - c| / |x - x'|) * exp(ik (|x - x'| - |x - c|)).
//! ```
//!
//! The centered factor `G(x, c)` carries the singularity and the fast
//! oscillation; the analytic factor `g` varies slowly in the scaled inverse
//! radius `s = h / r`, where `h` is half the box diagonal and `r = |x - c|`.
//! Targets outside the one-box neighborhood satisfy `r >= 3H/2`, i.e.
//! `s <= sqrt(3)/3`, which keeps `g` uniformly smooth in `s` regardless of
//! how far away the target is.

use num_complex::Complex64;
use thiserror::Error;

use crate::point::Point3;

/// Upper end of the radial interpolation variable: `s = h / r` evaluates to
/// `sqrt(3)/3` at `r = 3H/2`, the closest possible non-neighbor target.
pub const ETA: f64 = 0.577_350_269_189_625_8;

const INV_4PI: f64 = 1.0 / (4.0 * std::f64::consts::PI);

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("kernel evaluated at coincident points ({0:?})")]
    CoincidentPoints(Point3),
}

/// `exp(ik r) / (4 pi r)` for `r = |x - xp|`; `k = 0` gives `1 / (4 pi r)`.
pub fn green(x: Point3, xp: Point3, kappa: f64) -> Result<Complex64, KernelError> {
    let r = x.dist(xp);
    if r == 0.0 {
        return Err(KernelError::CoincidentPoints(x));
    }
    Ok(green_raw(r, kappa))
}

/// Kernel value from a precomputed nonzero distance.
#[inline]
pub(crate) fn green_raw(r: f64, kappa: f64) -> Complex64 {
    let (sin, cos) = (kappa * r).sin_cos();
    Complex64::new(cos, sin) * (INV_4PI / r)
}

/// Singular, oscillatory factor `G(x, c)` attached to a box center.
pub fn centered_factor(x: Point3, center: Point3, kappa: f64) -> Result<Complex64, KernelError> {
    green(x, center, kappa)
}

/// Slow factor `g(x, x') = (|x - c| / |x - x'|) exp(ik (|x - x'| - |x - c|))`.
pub fn analytic_factor(
    x: Point3,
    xp: Point3,
    center: Point3,
    kappa: f64,
) -> Result<Complex64, KernelError> {
    let rc = x.dist(center);
    let rs = x.dist(xp);
    if rs == 0.0 {
        return Err(KernelError::CoincidentPoints(x));
    }
    if rc == 0.0 {
        return Err(KernelError::CoincidentPoints(x));
    }
    Ok(analytic_factor_raw(rc, rs, kappa))
}

/// Analytic factor from precomputed nonzero distances to the center (`rc`)
/// and to the source (`rs`).
#[inline]
pub(crate) fn analytic_factor_raw(rc: f64, rs: f64, kappa: f64) -> Complex64 {
    let (sin, cos) = (kappa * (rs - rc)).sin_cos();
    Complex64::new(cos, sin) * (rc / rs)
}

/// Ratio `G(x, c_new) / G(x, c_old)` used when re-centering an interpolated
/// field from a child box onto its parent.
#[inline]
pub(crate) fn recentering_raw(r_new: f64, r_old: f64, kappa: f64) -> Complex64 {
    let (sin, cos) = (kappa * (r_new - r_old)).sin_cos();
    Complex64::new(cos, sin) * (r_old / r_new)
}

/// Scaled inverse radius `s = h / r`.
#[inline]
pub fn s_of_r(r: f64, h: f64) -> f64 {
    h / r
}

/// Radius recovered from the interpolation variable, `r = h / s`.
#[inline]
pub fn r_of_s(s: f64, h: f64) -> f64 {
    h / s
}

/// Radial interval length `delta_r` covered by an `s`-interval of length
/// `delta_s` starting at radius `r0`:
///
/// ```text
/// delta_r = r0^2 delta_s / (h - r0 delta_s)
/// ```
///
/// Returns `+inf` when the denominator is not positive, i.e. when the
/// `s`-interval reaches down to `s = 0` and the radial interval extends to
/// infinity.
pub fn delta_r_of_delta_s(r0: f64, delta_s: f64, h: f64) -> f64 {
    let denom = h - r0 * delta_s;
    if denom <= 0.0 {
        f64::INFINITY
    } else {
        r0 * r0 * delta_s / denom
    }
}

/// Spherical coordinates of a target relative to a box center, together with
/// the interpolation variable `s`.
///
/// `theta` is the polar angle in `[0, pi]`, `phi` the azimuth in `[0, 2 pi)`.
/// On the polar axis the azimuth is canonicalized to `phi = 0` so that every
/// direction has a unique coordinate triple.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SphericalCoords {
    pub r: f64,
    pub s: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Converts `x - center` to [`SphericalCoords`] given the box half-diagonal
/// `h`. Errors if `x` coincides with the center.
pub fn spherical_coords(x: Point3, center: Point3, h: f64) -> Result<SphericalCoords, KernelError> {
    let v = x - center;
    let r = v.norm();
    if r == 0.0 {
        return Err(KernelError::CoincidentPoints(x));
    }
    let theta = (v.z / r).clamp(-1.0, 1.0).acos();
    let phi = if v.x == 0.0 && v.y == 0.0 {
        0.0
    } else {
        let p = v.y.atan2(v.x);
        let p = if p < 0.0 { p + 2.0 * std::f64::consts::PI } else { p };
        // atan2 can land exactly on 2 pi after the wrap when y is -0.
        if p >= 2.0 * std::f64::consts::PI {
            0.0
        } else {
            p
        }
    };
    Ok(SphericalCoords { r, s: s_of_r(r, h), theta, phi })
}

/// Cartesian point at spherical coordinates `(r, theta, phi)` around `center`.
pub fn from_spherical(center: Point3, r: f64, theta: f64, phi: f64) -> Point3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    center + Point3::new(r * st * cp, r * st * sp, r * ct)
}
