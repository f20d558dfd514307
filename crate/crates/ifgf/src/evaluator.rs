//! Fast field evaluation: plan construction, the level sweep, and the
//! quadratic reference oracle.
//!
//! [`precompute`] builds an [`EvaluationPlan`]: the box tree, the relevant
//! cone segments of every box, cousin and neighbor lists, and the Chebyshev
//! transform tables. The plan depends only on the point positions, the
//! wavenumber and the interpolation orders, so one plan serves any number of
//! coefficient vectors.
//!
//! [`evaluate`] then runs the sweep:
//!
//! 1. At the leaf level, fields of neighbor boxes are summed directly with
//!    the raw kernel, and the analytic factor of each leaf box is summed at
//!    the nodes of the box's relevant segments.
//! 2. Walking levels bottom-up, node values become tensor Chebyshev
//!    coefficients, every target point in a cousin box receives the
//!    interpolated analytic factor times the centered kernel factor, and
//!    (above the coarsest interacting level) child interpolants are
//!    evaluated at the parent's segment nodes, re-centered from the child
//!    box center to the parent's.
//!
//! Every write target (a point range or a segment node buffer) is owned by
//! exactly one box, and per-box work items always run in the same order, so
//! the parallel mode produces bit-identical results to the sequential
//! reference mode.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::boxtree::{BoxTree, DepthRule, TreeError};
use crate::cheb::{self, ChebTransform};
use crate::cone::{self, ConeError, ConeGrid, ConeHierarchy};
use crate::geometry::PointCloud;
use crate::kernel;
use crate::point::Point3;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("wavenumber must be finite and non-negative, got {0}")]
    BadWavenumber(f64),
    #[error("coefficient vector has {got} entries, plan expects {expected}")]
    CoefficientCount { got: usize, expected: usize },
    #[error("field vectors have mismatched lengths ({acc} vs {exact})")]
    FieldLengthMismatch { acc: usize, exact: usize },
    #[error("relative error is undefined for an empty or all-zero reference field")]
    DegenerateReference,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

/// Tuning knobs for [`precompute`].
#[derive(Copy, Clone, Debug)]
pub struct EvalParams {
    /// Radial interpolation order per segment.
    pub p_s: usize,
    /// Angular interpolation order per segment (used for both angles).
    pub p_ang: usize,
    /// Cone grid of the leaf level; coarser levels refine it as the
    /// acoustic box size demands.
    pub leaf_grid: ConeGrid,
    /// Fixed tree depth, overriding the automatic choice.
    pub depth_override: Option<u8>,
    /// Mean points per leaf targeted by the Laplace depth rule.
    pub leaf_target: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            p_s: 3,
            p_ang: 5,
            leaf_grid: ConeGrid { n_s: 1, n_c: 2 },
            depth_override: None,
            leaf_target: 16,
        }
    }
}

/// Execution strategy for [`evaluate_with_mode`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Sequential sweep in a fixed order.
    Reference,
    /// Data-parallel sweep over boxes (requires the `parallel` feature;
    /// falls back to the sequential sweep without it). Produces the same
    /// bits as [`EvalMode::Reference`].
    Parallel,
}

/// Box and segment counts of one tree level, for run reports.
#[derive(Copy, Clone, Debug)]
pub struct LevelStats {
    pub level: u8,
    pub side: f64,
    pub boxes: usize,
    pub segments: usize,
}

/// Concatenated per-box lists with prefix offsets.
#[derive(Clone, Debug, Default)]
struct OffsetList {
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl OffsetList {
    fn of(&self, index: u32) -> &[u32] {
        let lo = self.offsets[index as usize] as usize;
        let hi = self.offsets[index as usize + 1] as usize;
        &self.items[lo..hi]
    }
}

/// Everything [`evaluate`] needs that does not depend on the coefficients.
#[derive(Clone, Debug)]
pub struct EvaluationPlan {
    kappa: f64,
    params: EvalParams,
    tree: BoxTree,
    cones: ConeHierarchy,
    /// Cousin box indices per box, per level (index `d - 1`).
    cousins: Vec<OffsetList>,
    /// Neighbor box indices per leaf box.
    leaf_neighbors: OffsetList,
    n_points: usize,
}

impl EvaluationPlan {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn depth(&self) -> u8 {
        self.tree.depth()
    }

    pub fn params(&self) -> &EvalParams {
        &self.params
    }

    /// Cone grids per level, coarsest first.
    pub fn grids(&self) -> &[ConeGrid] {
        self.cones.grids()
    }

    pub fn level_stats(&self) -> Vec<LevelStats> {
        (1..=self.tree.depth())
            .map(|d| LevelStats {
                level: d,
                side: self.tree.side(d),
                boxes: self.tree.box_count(d),
                segments: self.cones.segment_count(d),
            })
            .collect()
    }
}

/// Builds an [`EvaluationPlan`] for a cloud and wavenumber.
pub fn precompute(
    cloud: &PointCloud,
    kappa: f64,
    params: EvalParams,
) -> Result<EvaluationPlan, EvalError> {
    if !kappa.is_finite() || kappa < 0.0 {
        return Err(EvalError::BadWavenumber(kappa));
    }
    let rule = DepthRule {
        depth_override: params.depth_override,
        leaf_target: params.leaf_target,
    };
    let tree = BoxTree::build(cloud.points(), kappa, rule)?;
    let cones =
        cone::compute_relevant_segments(&tree, kappa, params.leaf_grid, params.p_s, params.p_ang)?;

    let depth = tree.depth();
    let mut cousins = Vec::with_capacity(depth as usize);
    for d in 1..=depth {
        let mut list = OffsetList::default();
        list.offsets.push(0);
        for b in 0..tree.box_count(d) as u32 {
            list.items.extend(tree.cousins(d, b));
            list.offsets.push(list.items.len() as u32);
        }
        cousins.push(list);
    }
    let mut leaf_neighbors = OffsetList::default();
    leaf_neighbors.offsets.push(0);
    for b in 0..tree.box_count(depth) as u32 {
        leaf_neighbors.items.extend(tree.neighbors(depth, b));
        leaf_neighbors.offsets.push(leaf_neighbors.items.len() as u32);
    }

    Ok(EvaluationPlan {
        kappa,
        params,
        tree,
        cones,
        cousins,
        leaf_neighbors,
        n_points: cloud.len(),
    })
}

/// Applies the operator with the default execution mode (parallel when the
/// `parallel` feature is enabled).
pub fn evaluate(plan: &EvaluationPlan, coefficients: &[Complex64]) -> Result<Vec<Complex64>, EvalError> {
    evaluate_with_mode(plan, coefficients, EvalMode::Parallel)
}

/// Applies the operator: `out[l] = sum_{m != l} a[m] G(x_l, x_m)`, with the
/// output in the original point order of the cloud.
pub fn evaluate_with_mode(
    plan: &EvaluationPlan,
    coefficients: &[Complex64],
    mode: EvalMode,
) -> Result<Vec<Complex64>, EvalError> {
    if coefficients.len() != plan.n_points {
        return Err(EvalError::CoefficientCount {
            got: coefficients.len(),
            expected: plan.n_points,
        });
    }
    let parallel = mode == EvalMode::Parallel;
    let tree = &plan.tree;
    let cones = &plan.cones;
    let kappa = plan.kappa;
    let depth = tree.depth();
    let p_s = plan.params.p_s;
    let p_ang = plan.params.p_ang;
    let orders = [p_s, p_ang, p_ang];
    let nodes_per_segment = cones.nodes_per_segment();
    let transforms = [
        ChebTransform::new(p_s),
        ChebTransform::new(p_ang),
        ChebTransform::new(p_ang),
    ];

    // Coefficients in leaf-sorted point order.
    let a: Vec<Complex64> = tree
        .orig_index()
        .iter()
        .map(|&i| coefficients[i as usize])
        .collect();
    let mut out = vec![Complex64::ZERO; plan.n_points];

    // Leaf level: direct sums over neighbor boxes.
    {
        let tasks = split_by_point_ranges(&mut out, tree, depth);
        run_tasks(parallel, tasks, |(t, out_slice)| {
            let (t_lo, _) = tree.point_range(depth, t);
            for &b in plan.leaf_neighbors.of(t) {
                let (lo, hi) = tree.point_range(depth, b);
                for (local, acc) in out_slice.iter_mut().enumerate() {
                    let l = t_lo as usize + local;
                    let x = tree.points()[l];
                    let mut sum = Complex64::ZERO;
                    for m in lo as usize..hi as usize {
                        if m == l {
                            continue;
                        }
                        sum += a[m] * kernel::green_raw(x.dist(tree.points()[m]), kappa);
                    }
                    *acc += sum;
                }
            }
        });
    }

    if depth >= 3 {
        // Node values of the leaf segments, by direct summation of the
        // analytic factor over the box's own points.
        let mut values = vec![Complex64::ZERO; cones.segment_count(depth) * nodes_per_segment];
        {
            let grid = cones.grid(depth);
            let h = tree.half_diagonal(depth);
            let tasks = split_by_segment_offsets(&mut values, cones, tree, depth, nodes_per_segment);
            run_tasks(parallel, tasks, |(b, seg_values)| {
                let center = tree.center(tree.key_of(depth, b));
                let (lo, hi) = tree.point_range(depth, b);
                for (codes_pos, &code) in cones.segment_codes(depth, b).iter().enumerate() {
                    let gamma = cone::gamma_of_code(grid, code);
                    let nodes = cone::interpolation_nodes(grid, gamma, center, h, p_s, p_ang);
                    let slot = &mut seg_values
                        [codes_pos * nodes_per_segment..(codes_pos + 1) * nodes_per_segment];
                    for (value, node) in slot.iter_mut().zip(&nodes) {
                        let rc = node.dist(center);
                        let mut sum = Complex64::ZERO;
                        for m in lo as usize..hi as usize {
                            let rs = node.dist(tree.points()[m]);
                            sum += a[m] * kernel::analytic_factor_raw(rc, rs, kappa);
                        }
                        *value = sum;
                    }
                }
            });
        }

        for d in (3..=depth).rev() {
            let grid = cones.grid(d);
            let h = tree.half_diagonal(d);

            // Node values -> tensor Chebyshev coefficients, per segment.
            let mut coeffs = values;
            {
                let tasks: Vec<&mut [Complex64]> =
                    coeffs.chunks_mut(nodes_per_segment).collect();
                run_tasks(parallel, tasks, |chunk| {
                    cheb::tensor_fit_in_place(chunk, orders, &transforms);
                });
            }
            let coeffs = coeffs;

            // Cousin targets receive interpolated fields.
            {
                let cousin_list = &plan.cousins[d as usize - 1];
                let tasks = split_by_point_ranges(&mut out, tree, d);
                run_tasks(parallel, tasks, |(t, out_slice)| {
                    let (t_lo, _) = tree.point_range(d, t);
                    for &b in cousin_list.of(t) {
                        let center = tree.center(tree.key_of(d, b));
                        for (local, acc) in out_slice.iter_mut().enumerate() {
                            let x = tree.points()[t_lo as usize + local];
                            *acc += eval_segment_field(
                                cones, &coeffs, d, b, grid, center, h, x, orders,
                                nodes_per_segment, kappa,
                            );
                        }
                    }
                });
            }

            // Child interpolants accumulate onto parent segment nodes.
            if d > 3 {
                let parent = d - 1;
                let parent_grid = cones.grid(parent);
                let parent_h = tree.half_diagonal(parent);
                let mut parent_values =
                    vec![Complex64::ZERO; cones.segment_count(parent) * nodes_per_segment];
                let tasks =
                    split_by_segment_offsets(&mut parent_values, cones, tree, parent, nodes_per_segment);
                run_tasks(parallel, tasks, |(j, seg_values)| {
                    let parent_center = tree.center(tree.key_of(parent, j));
                    let (clo, chi) = tree.children_range(parent, j);
                    for (codes_pos, &code) in cones.segment_codes(parent, j).iter().enumerate() {
                        let gamma = cone::gamma_of_code(parent_grid, code);
                        let nodes = cone::interpolation_nodes(
                            parent_grid, gamma, parent_center, parent_h, p_s, p_ang,
                        );
                        let slot = &mut seg_values
                            [codes_pos * nodes_per_segment..(codes_pos + 1) * nodes_per_segment];
                        for b in clo..chi {
                            let center = tree.center(tree.key_of(d, b));
                            for (value, node) in slot.iter_mut().zip(&nodes) {
                                let field = eval_segment_analytic(
                                    cones, &coeffs, d, b, grid, center, h, *node, orders,
                                    nodes_per_segment,
                                );
                                let r_child = node.dist(center);
                                let r_parent = node.dist(parent_center);
                                *value +=
                                    field * kernel::recentering_raw(r_child, r_parent, kappa);
                            }
                        }
                    }
                });
                values = parent_values;
            } else {
                values = Vec::new();
            }
        }
    }

    // Back to the original point order.
    let mut result = vec![Complex64::ZERO; plan.n_points];
    for (sorted_pos, &orig) in tree.orig_index().iter().enumerate() {
        result[orig as usize] = out[sorted_pos];
    }
    Ok(result)
}

/// Interpolated analytic factor of box `b` at point `x` (which must lie in a
/// relevant segment of `b`).
#[allow(clippy::too_many_arguments)]
#[inline]
fn eval_segment_analytic(
    cones: &ConeHierarchy,
    coeffs: &[Complex64],
    d: u8,
    b: u32,
    grid: ConeGrid,
    center: Point3,
    h: f64,
    x: Point3,
    orders: [usize; 3],
    nodes_per_segment: usize,
) -> Complex64 {
    let sph = kernel::spherical_coords(x, center, h)
        .expect("targets never coincide with a source box center");
    let gamma = cone::segment_of_coords(grid, sph)
        .expect("interpolation targets lie inside the cone domain");
    let seg = cones
        .find_segment(d, b, cone::gamma_code(grid, gamma))
        .expect("interpolation targets lie in relevant segments");
    let [si, ti, pi] = cone::segment_intervals(grid, gamma);
    let ts = cheb::reference_coord_unchecked(sph.s, si.0, si.1);
    let tt = cheb::reference_coord_unchecked(sph.theta, ti.0, ti.1);
    let tp = cheb::reference_coord_unchecked(sph.phi, pi.0, pi.1);
    let base = seg as usize * nodes_per_segment;
    cheb::tensor_clenshaw(&coeffs[base..base + nodes_per_segment], orders, ts, tt, tp)
}

/// Interpolated field of box `b` at a cousin point `x`: the analytic factor
/// times the centered kernel factor.
#[allow(clippy::too_many_arguments)]
#[inline]
fn eval_segment_field(
    cones: &ConeHierarchy,
    coeffs: &[Complex64],
    d: u8,
    b: u32,
    grid: ConeGrid,
    center: Point3,
    h: f64,
    x: Point3,
    orders: [usize; 3],
    nodes_per_segment: usize,
    kappa: f64,
) -> Complex64 {
    let analytic = eval_segment_analytic(
        cones, coeffs, d, b, grid, center, h, x, orders, nodes_per_segment,
    );
    analytic * kernel::green_raw(x.dist(center), kappa)
}

/// Splits `buf` into one mutable slice per stored box at level `d`, using
/// the point ranges (which tile the array in box order).
fn split_by_point_ranges<'a>(
    buf: &'a mut [Complex64],
    tree: &BoxTree,
    d: u8,
) -> Vec<(u32, &'a mut [Complex64])> {
    let mut tasks = Vec::with_capacity(tree.box_count(d));
    let mut rest = buf;
    let mut consumed = 0u32;
    for b in 0..tree.box_count(d) as u32 {
        let (lo, hi) = tree.point_range(d, b);
        debug_assert_eq!(lo, consumed);
        let (head, tail) = rest.split_at_mut((hi - lo) as usize);
        tasks.push((b, head));
        rest = tail;
        consumed = hi;
    }
    debug_assert!(rest.is_empty());
    tasks
}

/// Splits a per-node buffer into one mutable slice per stored box at level
/// `d`, using the segment offsets.
fn split_by_segment_offsets<'a>(
    buf: &'a mut [Complex64],
    cones: &ConeHierarchy,
    tree: &BoxTree,
    d: u8,
    nodes_per_segment: usize,
) -> Vec<(u32, &'a mut [Complex64])> {
    let boxes = tree.box_count(d) as u32;
    let mut tasks = Vec::with_capacity(boxes as usize);
    let mut rest = buf;
    for b in 0..boxes {
        let lo = cones.segment_offset(d, b) as usize;
        let hi = cones.segment_offset(d, b + 1) as usize;
        let (head, tail) = rest.split_at_mut((hi - lo) * nodes_per_segment);
        tasks.push((b, head));
        rest = tail;
    }
    debug_assert!(rest.is_empty());
    tasks
}

/// Runs independent tasks either sequentially (in order) or via rayon. Task
/// bodies own their outputs, so both paths produce identical results.
fn run_tasks<T, F>(parallel: bool, tasks: Vec<T>, f: F)
where
    T: Send,
    F: Fn(T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            tasks.into_par_iter().for_each(f);
            return;
        }
    }
    let _ = parallel;
    tasks.into_iter().for_each(f);
}

/// Direct quadratic-cost sums `sum_{m != l} a[m] G(x_l, x_m)` at the given
/// target indices. Sources are added pairwise (balanced tree order) so the
/// result is reproducible and insensitive to benign reorderings.
pub fn direct_oracle(cloud: &PointCloud, kappa: f64, targets: &[usize]) -> Vec<Complex64> {
    let points = cloud.points();
    let coeffs = cloud.coefficients();
    let run = |&l: &usize| {
        let x = points[l];
        pairwise_sum(points, coeffs, x, l, kappa, 0, points.len())
    };
    #[cfg(feature = "parallel")]
    {
        return targets.par_iter().map(run).collect();
    }
    #[cfg(not(feature = "parallel"))]
    {
        targets.iter().map(run).collect()
    }
}

fn pairwise_sum(
    points: &[Point3],
    coeffs: &[Complex64],
    x: Point3,
    skip: usize,
    kappa: f64,
    lo: usize,
    hi: usize,
) -> Complex64 {
    if hi - lo <= 64 {
        let mut sum = Complex64::ZERO;
        for m in lo..hi {
            if m == skip {
                continue;
            }
            sum += coeffs[m] * kernel::green_raw(x.dist(points[m]), kappa);
        }
        sum
    } else {
        let mid = lo + (hi - lo) / 2;
        pairwise_sum(points, coeffs, x, skip, kappa, lo, mid)
            + pairwise_sum(points, coeffs, x, skip, kappa, mid, hi)
    }
}

/// Root-mean-square relative error between an accelerated field and a
/// reference field over aligned entries:
/// `sqrt(sum |acc - exact|^2 / sum |exact|^2)`.
pub fn relative_error(acc: &[Complex64], exact: &[Complex64]) -> Result<f64, EvalError> {
    if acc.len() != exact.len() {
        return Err(EvalError::FieldLengthMismatch { acc: acc.len(), exact: exact.len() });
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, e) in acc.iter().zip(exact) {
        num += (a - e).norm_sqr();
        den += e.norm_sqr();
    }
    if den == 0.0 || exact.is_empty() {
        return Err(EvalError::DegenerateReference);
    }
    Ok((num / den).sqrt())
}

/// First `m` entries of a seeded random permutation of `0..n`; the standard
/// verification subset. `m >= n` returns all of `0..n` permuted.
pub fn random_subset(n: usize, m: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    let take = m.min(n);
    for i in 0..take {
        let j = rng.gen_range(i..n);
        indices.swap(i, j);
    }
    indices.truncate(take);
    indices
}
