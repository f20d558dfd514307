//! Surface point clouds: generators, coefficients, and text serialization.
//!
//! The built-in generators produce cubed-sphere discretizations: each of the
//! six cube faces carries an `n x n` cell-centered grid that is projected
//! radially onto the surface, giving `N = 6 n^2` pairwise distinct points
//! with no duplicated face edges or corners. Spheroids are axis-scaled
//! spheres and the rough sphere modulates the radius with a high-frequency
//! angular perturbation.
//!
//! Clouds serialize to a plain text format, one point per line:
//!
//! ```text
//! # comment lines start with '#'
//! x y z re im
//! ```
//!
//! Values are written with 17 significant digits so a save/load round trip
//! reproduces every f64 bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::point::Point3;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("point cloud must contain at least one point")]
    Empty,
    #[error("points ({points}) and coefficients ({coefficients}) differ in length")]
    LengthMismatch { points: usize, coefficients: usize },
    #[error("duplicate point {0:?}")]
    DuplicatePoint(Point3),
    #[error("resolution must be at least 1")]
    BadResolution,
    #[error("scale parameters must be positive and finite")]
    BadScale,
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Source points with one complex strength per point.
#[derive(Clone, Debug)]
pub struct PointCloud {
    points: Vec<Point3>,
    coefficients: Vec<Complex64>,
}

impl PointCloud {
    /// Builds a cloud, rejecting empty input, mismatched lengths and
    /// duplicate points.
    pub fn new(points: Vec<Point3>, coefficients: Vec<Complex64>) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::Empty);
        }
        if points.len() != coefficients.len() {
            return Err(GeometryError::LengthMismatch {
                points: points.len(),
                coefficients: coefficients.len(),
            });
        }
        if let Some(p) = find_duplicate(&points) {
            return Err(GeometryError::DuplicatePoint(p));
        }
        Ok(PointCloud { points, coefficients })
    }

    /// Builds a cloud with every coefficient set to `1 + 0i`.
    pub fn with_unit_coefficients(points: Vec<Point3>) -> Result<Self, GeometryError> {
        let coefficients = vec![Complex64::new(1.0, 0.0); points.len()];
        PointCloud::new(points, coefficients)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Replaces all coefficients with seeded uniform random values in the
    /// complex square `[-1, 1] x [-1, 1] i`.
    pub fn randomize_coefficients(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in &mut self.coefficients {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }

    pub fn set_coefficients(&mut self, coefficients: Vec<Complex64>) -> Result<(), GeometryError> {
        if coefficients.len() != self.points.len() {
            return Err(GeometryError::LengthMismatch {
                points: self.points.len(),
                coefficients: coefficients.len(),
            });
        }
        self.coefficients = coefficients;
        Ok(())
    }
}

fn find_duplicate(points: &[Point3]) -> Option<Point3> {
    let mut sorted: Vec<Point3> = points.to_vec();
    sorted.sort_by(|a, b| {
        (a.x, a.y, a.z)
            .partial_cmp(&(b.x, b.y, b.z))
            .expect("point coordinates must not be NaN")
    });
    sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
}

/// Cell-centered cubed-sphere cloud of `6 n^2` points on a sphere of radius
/// `a`, with unit coefficients.
pub fn gen_sphere(a: f64, n: usize) -> Result<PointCloud, GeometryError> {
    let dirs = cubed_sphere_directions(n)?;
    if !(a.is_finite() && a > 0.0) {
        return Err(GeometryError::BadScale);
    }
    PointCloud::with_unit_coefficients(dirs.into_iter().map(|d| d * a).collect())
}

/// Cubed-sphere cloud scaled per axis: points `(alpha x, beta y, gamma z)`
/// for `(x, y, z)` on the radius-`a` sphere.
pub fn gen_spheroid(
    a: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    n: usize,
) -> Result<PointCloud, GeometryError> {
    if ![alpha, beta, gamma].iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(GeometryError::BadScale);
    }
    let sphere = gen_sphere(a, n)?;
    let points = sphere
        .points()
        .iter()
        .map(|p| Point3::new(alpha * p.x, beta * p.y, gamma * p.z))
        .collect();
    PointCloud::with_unit_coefficients(points)
}

/// Sphere with radius modulated as `a (1 + 0.05 sin(40 theta) sin(40 phi))`,
/// a sub-wavelength-rough test surface.
pub fn gen_rough_sphere(a: f64, n: usize) -> Result<PointCloud, GeometryError> {
    if !(a.is_finite() && a > 0.0) {
        return Err(GeometryError::BadScale);
    }
    let dirs = cubed_sphere_directions(n)?;
    let points = dirs
        .into_iter()
        .map(|d| {
            let theta = d.z.clamp(-1.0, 1.0).acos();
            let phi = d.y.atan2(d.x);
            let r = a * (1.0 + 0.05 * (40.0 * theta).sin() * (40.0 * phi).sin());
            d * r
        })
        .collect();
    PointCloud::with_unit_coefficients(points)
}

fn cubed_sphere_directions(n: usize) -> Result<Vec<Point3>, GeometryError> {
    if n == 0 {
        return Err(GeometryError::BadResolution);
    }
    let mut dirs = Vec::with_capacity(6 * n * n);
    let coord = |i: usize| -1.0 + (2 * i + 1) as f64 / n as f64;
    for i in 0..n {
        let u = coord(i);
        for j in 0..n {
            let v = coord(j);
            for p in [
                Point3::new(1.0, u, v),
                Point3::new(-1.0, u, v),
                Point3::new(u, 1.0, v),
                Point3::new(u, -1.0, v),
                Point3::new(u, v, 1.0),
                Point3::new(u, v, -1.0),
            ] {
                dirs.push(p * (1.0 / p.norm()));
            }
        }
    }
    Ok(dirs)
}

/// Points per wavelength of a sphere discretization: `n_equator` points
/// around the equator against a wavelength of `2 pi / kappa` on a radius-`a`
/// sphere, i.e. `n_equator / (kappa a)`. The cubed-sphere equator carries
/// `4 n` points. Returns NaN for the Laplace kernel (`kappa = 0`), where no
/// wavelength exists.
pub fn points_per_wavelength(n_equator: usize, kappa: f64, a: f64) -> f64 {
    if kappa == 0.0 {
        f64::NAN
    } else {
        n_equator as f64 / (kappa * a)
    }
}

/// Writes a cloud in the text format described in the module docs.
pub fn save_cloud(cloud: &PointCloud, path: &Path) -> Result<(), GeometryError> {
    let mut out = String::new();
    let _ = writeln!(out, "# point cloud: {} points, columns x y z re im", cloud.len());
    for (p, c) in cloud.points().iter().zip(cloud.coefficients()) {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z, c.re, c.im);
    }
    std::fs::write(path, out).map_err(|source| GeometryError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a cloud written by [`save_cloud`] (or by hand in the same format).
pub fn load_cloud(path: &Path) -> Result<PointCloud, GeometryError> {
    let text = std::fs::read_to_string(path).map_err(|source| GeometryError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut points = Vec::new();
    let mut coefficients = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(GeometryError::Parse {
                path: path.display().to_string(),
                line: line_no,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let mut values = [0.0f64; 5];
        for (slot, field) in values.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|e| GeometryError::Parse {
                path: path.display().to_string(),
                line: line_no,
                message: format!("bad number {field:?}: {e}"),
            })?;
        }
        points.push(Point3::new(values[0], values[1], values[2]));
        coefficients.push(Complex64::new(values[3], values[4]));
    }
    PointCloud::new(points, coefficients)
}
