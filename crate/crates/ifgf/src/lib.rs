//! Fast evaluation of discrete Helmholtz and Laplace potential sums over
//! surface point clouds.
//!
//! Given sources `x_1..x_N` with complex strengths `a_1..a_N`, the library
//! computes the fields
//!
//! ```text
//! I(x_l) = sum_{m != l} a_m G(x_l, x_m),   G(x, x') = exp(ik|x - x'|) / (4 pi |x - x'|)
//! ```
//!
//! in `O(N log N)` time by factoring the kernel into a singular, oscillatory
//! centered part and a slowly varying analytic part, interpolating the latter
//! on cone-shaped segments attached to a box octree, and propagating the
//! interpolants upward through the tree. Setting `k = 0` yields the Laplace
//! kernel `1 / (4 pi |x - x'|)`.
//!
//! The main entry points are [`precompute`], which builds an
//! [`EvaluationPlan`] from a [`PointCloud`], and [`evaluate`], which applies
//! the operator to a coefficient vector. [`direct_oracle`] provides the
//! quadratic-cost reference sum used for verification.
//!
//! With the `parallel` feature (on by default) evaluation can run
//! data-parallel over boxes via rayon; the sequential reference path is
//! always available and both paths produce results that agree to near
//! machine precision.

pub mod boxtree;
pub mod cheb;
pub mod cone;
pub mod diag;
pub mod evaluator;
pub mod geometry;
pub mod kernel;
mod point;

pub use evaluator::{
    direct_oracle, evaluate, evaluate_with_mode, precompute, random_subset, relative_error,
    EvalMode, EvalParams, EvaluationPlan,
};
pub use geometry::{gen_rough_sphere, gen_sphere, gen_spheroid, load_cloud, save_cloud, PointCloud};
pub use point::Point3;

/// Complex scalar used throughout the crate.
pub type Complex = num_complex::Complex64;
