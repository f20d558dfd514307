//! Chebyshev interpolation on intervals and tensor-product boxes.
//!
//! Interpolants use Chebyshev points of the first kind (polynomial zeros),
//! `x_k = cos((2k + 1) pi / (2n))`, so no sample ever sits on an interval
//! endpoint. Coefficients come from the discrete cosine sums
//!
//! ```text
//! a_i = (2 - delta_{i0}) / n * sum_k u(x_k) T_i(x_k)
//! ```
//!
//! and evaluation uses Clenshaw recursion. The three-dimensional tensor
//! variant interpolates on `(s, theta, phi)` cells with the `s` index
//! fastest in memory, matching the layout the field evaluator uses for its
//! per-segment buffers.

use num_complex::Complex64;
use thiserror::Error;

/// Largest supported interpolation order per axis.
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum ChebError {
    #[error("evaluation point {x} outside interpolation interval [{a}, {b}]")]
    OutOfInterval { x: f64, a: f64, b: f64 },
    #[error("interpolation order {0} outside 1..={MAX_ORDER}")]
    BadOrder(usize),
    #[error("sample count {got} does not match expected {expected}")]
    BadSampleCount { got: usize, expected: usize },
}

/// Chebyshev points of the first kind on `[a, b]`, in the natural descending
/// reference order (`cos` of increasing angles).
pub fn cheb_nodes(n: usize, a: f64, b: f64) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (0..n)
        .map(|k| mid + half * node_angle_cos(n, k))
        .collect()
}

#[inline]
fn node_angle_cos(n: usize, k: usize) -> f64 {
    ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos()
}

/// Polynomial interpolant of degree `n - 1` on `[a, b]` in the Chebyshev
/// basis.
#[derive(Clone, Debug)]
pub struct ChebInterpolant1D {
    a: f64,
    b: f64,
    coeffs: Vec<Complex64>,
}

impl ChebInterpolant1D {
    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
}

/// Fits a Chebyshev interpolant to samples taken at `cheb_nodes(values.len(), a, b)`.
pub fn cheb_fit(values: &[Complex64], a: f64, b: f64) -> Result<ChebInterpolant1D, ChebError> {
    let n = values.len();
    if n == 0 || n > MAX_ORDER {
        return Err(ChebError::BadOrder(n));
    }
    let transform = ChebTransform::new(n);
    let mut coeffs = vec![Complex64::ZERO; n];
    transform.fit_line(values, &mut coeffs);
    Ok(ChebInterpolant1D { a, b, coeffs })
}

/// Evaluates a 1D interpolant at `x`, which must lie in the fit interval up
/// to a small slack for boundary roundoff.
pub fn cheb_eval(interp: &ChebInterpolant1D, x: f64) -> Result<Complex64, ChebError> {
    let t = reference_coord(x, interp.a, interp.b)?;
    Ok(clenshaw(&interp.coeffs, t))
}

/// Interpolation error bound for `n` first-kind nodes on `[a, b]`:
/// `(b - a)^n / (2^(2n-1) n!) * max |u^(n)|`.
pub fn interp_error_bound(n: usize, a: f64, b: f64, deriv_max: f64) -> f64 {
    let mut factorial = 1.0;
    for i in 2..=n {
        factorial *= i as f64;
    }
    (b - a).powi(n as i32) / (2f64.powi(2 * n as i32 - 1) * factorial) * deriv_max
}

/// Maps `x` in `[a, b]` to the reference interval `[-1, 1]`, allowing a
/// relative slack of `1e-12` beyond the ends before reporting an error.
#[inline]
fn reference_coord(x: f64, a: f64, b: f64) -> Result<f64, ChebError> {
    let width = b - a;
    let slack = 1e-12 * width.abs().max(1.0);
    if x < a - slack || x > b + slack {
        return Err(ChebError::OutOfInterval { x, a, b });
    }
    if width == 0.0 {
        return Ok(0.0);
    }
    Ok(((2.0 * x - a - b) / width).clamp(-1.0, 1.0))
}

/// [`reference_coord`] for callers that guarantee `x` lies in `[a, b]` up to
/// roundoff; out-of-interval inputs are a caller bug.
#[inline]
pub(crate) fn reference_coord_unchecked(x: f64, a: f64, b: f64) -> f64 {
    debug_assert!(
        x >= a - 1e-9 * (b - a).abs().max(1.0) && x <= b + 1e-9 * (b - a).abs().max(1.0),
        "coordinate {x} outside interval [{a}, {b}]"
    );
    let width = b - a;
    if width == 0.0 {
        return 0.0;
    }
    ((2.0 * x - a - b) / width).clamp(-1.0, 1.0)
}

#[inline]
fn clenshaw(coeffs: &[Complex64], t: f64) -> Complex64 {
    let mut b1 = Complex64::ZERO;
    let mut b2 = Complex64::ZERO;
    let two_t = 2.0 * t;
    for k in (1..coeffs.len()).rev() {
        let b = coeffs[k] + two_t * b1 - b2;
        b2 = b1;
        b1 = b;
    }
    coeffs[0] + t * b1 - b2
}

/// Precomputed values `T_i(x_k)` for one interpolation order, shared by all
/// line fits of that order.
#[derive(Clone, Debug)]
pub(crate) struct ChebTransform {
    n: usize,
    /// `table[i * n + k] = T_i(x_k) = cos(i (2k + 1) pi / (2n))`.
    table: Vec<f64>,
}

impl ChebTransform {
    pub(crate) fn new(n: usize) -> Self {
        assert!(n >= 1 && n <= MAX_ORDER);
        let mut table = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                table[i * n + k] =
                    (i as f64 * (2 * k + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos();
            }
        }
        ChebTransform { n, table }
    }

    /// Transforms `n` node samples into `n` Chebyshev coefficients.
    pub(crate) fn fit_line(&self, samples: &[Complex64], coeffs: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(samples.len(), n);
        debug_assert_eq!(coeffs.len(), n);
        let scale = 1.0 / n as f64;
        for i in 0..n {
            let mut acc = Complex64::ZERO;
            let row = &self.table[i * n..(i + 1) * n];
            for (sample, t) in samples.iter().zip(row) {
                acc += sample * t;
            }
            let weight = if i == 0 { scale } else { 2.0 * scale };
            coeffs[i] = acc * weight;
        }
    }
}

/// Tensor-product Chebyshev interpolant on an `(s, theta, phi)` cell.
#[derive(Clone, Debug)]
pub struct TensorInterpolant3D {
    intervals: [(f64, f64); 3],
    orders: [usize; 3],
    /// Coefficients with the `s` index fastest, then `theta`, then `phi`.
    coeffs: Vec<Complex64>,
}

impl TensorInterpolant3D {
    pub fn intervals(&self) -> &[(f64, f64); 3] {
        &self.intervals
    }

    pub fn orders(&self) -> [usize; 3] {
        self.orders
    }
}

/// Fits a 3D tensor interpolant.
///
/// `samples[k + n_s * (i + n_t * j)]` must hold the function value at the
/// `k`-th `s` node, `i`-th `theta` node and `j`-th `phi` node, with nodes
/// from [`cheb_nodes`] per axis.
pub fn tensor_fit_3d(
    samples: &[Complex64],
    orders: [usize; 3],
    intervals: [(f64, f64); 3],
) -> Result<TensorInterpolant3D, ChebError> {
    for &n in &orders {
        if n == 0 || n > MAX_ORDER {
            return Err(ChebError::BadOrder(n));
        }
    }
    let total = orders[0] * orders[1] * orders[2];
    if samples.len() != total {
        return Err(ChebError::BadSampleCount { got: samples.len(), expected: total });
    }
    let mut coeffs = samples.to_vec();
    let transforms = [
        ChebTransform::new(orders[0]),
        ChebTransform::new(orders[1]),
        ChebTransform::new(orders[2]),
    ];
    tensor_fit_in_place(&mut coeffs, orders, &transforms);
    Ok(TensorInterpolant3D { intervals, orders, coeffs })
}

/// Evaluates a 3D tensor interpolant at `(s, theta, phi)`.
pub fn tensor_eval_3d(
    interp: &TensorInterpolant3D,
    s: f64,
    theta: f64,
    phi: f64,
) -> Result<Complex64, ChebError> {
    let [is, it, ip] = interp.intervals;
    let ts = reference_coord(s, is.0, is.1)?;
    let tt = reference_coord(theta, it.0, it.1)?;
    let tp = reference_coord(phi, ip.0, ip.1)?;
    Ok(tensor_clenshaw(&interp.coeffs, interp.orders, ts, tt, tp))
}

/// In-place conversion of tensor node samples to tensor coefficients, one
/// axis at a time. Used by the evaluator on its per-segment buffers.
pub(crate) fn tensor_fit_in_place(
    data: &mut [Complex64],
    orders: [usize; 3],
    transforms: &[ChebTransform; 3],
) {
    let [ns, nt, np] = orders;
    debug_assert_eq!(data.len(), ns * nt * np);
    let mut line = [Complex64::ZERO; MAX_ORDER];
    let mut out = [Complex64::ZERO; MAX_ORDER];
    // s lines are contiguous.
    for chunk in data.chunks_exact_mut(ns) {
        transforms[0].fit_line(chunk, &mut out[..ns]);
        chunk.copy_from_slice(&out[..ns]);
    }
    // theta lines have stride n_s.
    for j in 0..np {
        for k in 0..ns {
            let base = k + ns * nt * j;
            for i in 0..nt {
                line[i] = data[base + ns * i];
            }
            transforms[1].fit_line(&line[..nt], &mut out[..nt]);
            for i in 0..nt {
                data[base + ns * i] = out[i];
            }
        }
    }
    // phi lines have stride n_s * n_t.
    for i in 0..nt {
        for k in 0..ns {
            let base = k + ns * i;
            for j in 0..np {
                line[j] = data[base + ns * nt * j];
            }
            transforms[2].fit_line(&line[..np], &mut out[..np]);
            for j in 0..np {
                data[base + ns * nt * j] = out[j];
            }
        }
    }
}

/// Nested Clenshaw evaluation of a coefficient tensor at reference
/// coordinates `(ts, tt, tp)` in `[-1, 1]^3`.
#[inline]
pub(crate) fn tensor_clenshaw(
    coeffs: &[Complex64],
    orders: [usize; 3],
    ts: f64,
    tt: f64,
    tp: f64,
) -> Complex64 {
    let [ns, nt, np] = orders;
    let mut collapsed_theta = [Complex64::ZERO; MAX_ORDER];
    let mut collapsed_phi = [Complex64::ZERO; MAX_ORDER];
    for j in 0..np {
        for i in 0..nt {
            let base = ns * (i + nt * j);
            collapsed_theta[i] = clenshaw(&coeffs[base..base + ns], ts);
        }
        collapsed_phi[j] = clenshaw(&collapsed_theta[..nt], tt);
    }
    clenshaw(&collapsed_phi[..np], tp)
}
