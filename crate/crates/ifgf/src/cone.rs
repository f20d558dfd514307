//! Interpolation cone segments attached to tree boxes.
//!
//! Around every box center, the exterior `r >= 3H/2` is parametrized by the
//! scaled inverse radius `s = h_d / r` together with the spherical angles
//! `(theta, phi)`. A cone grid splits that domain into
//! `n_s x n_c x 2 n_c` segments of size
//!
//! ```text
//! delta_s = (sqrt(3)/3) / n_s,   delta_theta = delta_phi = pi / n_c,
//! ```
//!
//! each of which carries a tensor Chebyshev interpolant of the analytic
//! kernel factor. Box sides halve from level to level while the acoustic
//! size `k H_d` halves with them, so grids refine going up: whenever the
//! coarser level still has `k H >= 1`, its segment counts double per axis
//! (spans halve), which keeps the work per segment constant. For the
//! Laplace kernel the grid is identical at every level.
//!
//! Only segments that are actually used get interpolants. A segment of a
//! box `B` is relevant when it contains a surface point of a cousin box of
//! `B`, or an interpolation node of a relevant segment of `B`'s parent; the
//! second rule propagates relevance down one sweep from the coarsest
//! interacting level to the leaves.

use thiserror::Error;

use crate::boxtree::BoxTree;
use crate::cheb;
use crate::kernel::{self, SphericalCoords, ETA};
use crate::point::Point3;

/// Tolerance for accepting `s` marginally above `eta` (points sitting
/// exactly on the closest-cousin sphere, up to roundoff).
const S_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ConeError {
    #[error("cone grid counts must be positive")]
    EmptyGrid,
    #[error("interpolation order {0} outside 1..={max}", max = cheb::MAX_ORDER)]
    BadOrder(usize),
}

/// Segment counts of one level: `n_s` radial cells, `n_c` polar cells and
/// `2 n_c` azimuthal cells.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ConeGrid {
    pub n_s: u32,
    pub n_c: u32,
}

impl ConeGrid {
    pub fn new(n_s: u32, n_c: u32) -> Result<ConeGrid, ConeError> {
        if n_s == 0 || n_c == 0 {
            return Err(ConeError::EmptyGrid);
        }
        Ok(ConeGrid { n_s, n_c })
    }

    pub fn delta_s(&self) -> f64 {
        ETA / self.n_s as f64
    }

    pub fn delta_theta(&self) -> f64 {
        std::f64::consts::PI / self.n_c as f64
    }

    pub fn delta_phi(&self) -> f64 {
        self.delta_theta()
    }

    /// Total number of segments per box.
    pub fn segment_count(&self) -> u32 {
        self.n_s * self.n_c * 2 * self.n_c
    }

    fn doubled(&self) -> ConeGrid {
        ConeGrid { n_s: self.n_s * 2, n_c: self.n_c * 2 }
    }
}

/// 1-based segment indices `(radial, polar, azimuthal)`.
pub type Gamma = [u32; 3];

/// Linear code of a segment within its box grid, radial index fastest.
pub fn gamma_code(grid: ConeGrid, gamma: Gamma) -> u32 {
    debug_assert!(gamma[0] >= 1 && gamma[0] <= grid.n_s);
    debug_assert!(gamma[1] >= 1 && gamma[1] <= grid.n_c);
    debug_assert!(gamma[2] >= 1 && gamma[2] <= 2 * grid.n_c);
    (gamma[0] - 1) + grid.n_s * ((gamma[1] - 1) + grid.n_c * (gamma[2] - 1))
}

pub fn gamma_of_code(grid: ConeGrid, code: u32) -> Gamma {
    let g1 = code % grid.n_s;
    let rest = code / grid.n_s;
    let g2 = rest % grid.n_c;
    let g3 = rest / grid.n_c;
    [g1 + 1, g2 + 1, g3 + 1]
}

/// Per-level cone grids for a tree with the given level sides `H_1..H_D`:
/// the leaf level uses `leaf`, and each coarser level doubles the counts of
/// the level below it whenever its own acoustic size `kappa * H` is at
/// least one.
pub fn refinement_schedule(kappa: f64, sides: &[f64], leaf: ConeGrid) -> Vec<ConeGrid> {
    let depth = sides.len();
    let mut grids = vec![leaf; depth];
    for d in (1..depth).rev() {
        // grids[d - 1] is the level-d grid; sides[d - 1] its box side.
        grids[d - 1] = if kappa * sides[d - 1] >= 1.0 {
            grids[d].doubled()
        } else {
            grids[d]
        };
    }
    grids
}

/// Segment of the grid containing a direction given by [`SphericalCoords`],
/// or `None` when the point is too close to the box (`s > eta`).
///
/// Cell boundaries follow fixed conventions so every exterior point belongs
/// to exactly one segment: radial and polar cells are closed at their upper
/// end and open below (with `theta = 0` folded into the first polar cell),
/// azimuthal cells are closed below and open above.
pub fn segment_of_coords(grid: ConeGrid, c: SphericalCoords) -> Option<Gamma> {
    if c.s > ETA * (1.0 + S_SLACK) {
        return None;
    }
    let g1 = ((c.s / grid.delta_s()).ceil() as i64).clamp(1, grid.n_s as i64) as u32;
    let g2 = ((c.theta / grid.delta_theta()).ceil() as i64).clamp(1, grid.n_c as i64) as u32;
    let g3 = ((c.phi / grid.delta_phi()).floor() as i64 + 1).clamp(1, 2 * grid.n_c as i64) as u32;
    Some([g1, g2, g3])
}

/// Segment containing target `x` relative to a box with center `center` and
/// half diagonal `h`.
pub fn segment_of_point(grid: ConeGrid, center: Point3, h: f64, x: Point3) -> Option<Gamma> {
    let coords = kernel::spherical_coords(x, center, h).ok()?;
    segment_of_coords(grid, coords)
}

/// Parameter intervals `[(s), (theta), (phi)]` spanned by a segment.
pub fn segment_intervals(grid: ConeGrid, gamma: Gamma) -> [(f64, f64); 3] {
    let ds = grid.delta_s();
    let dt = grid.delta_theta();
    let dp = grid.delta_phi();
    [
        ((gamma[0] - 1) as f64 * ds, gamma[0] as f64 * ds),
        ((gamma[1] - 1) as f64 * dt, gamma[1] as f64 * dt),
        ((gamma[2] - 1) as f64 * dp, gamma[2] as f64 * dp),
    ]
}

/// Cartesian interpolation nodes of a segment: a tensor grid of Chebyshev
/// points, `p_s` radial by `p_ang` polar by `p_ang` azimuthal, with the
/// radial index fastest. Node radii follow `r = h / s`, so they are finite
/// even for the cell touching `s = 0`.
pub fn interpolation_nodes(
    grid: ConeGrid,
    gamma: Gamma,
    center: Point3,
    h: f64,
    p_s: usize,
    p_ang: usize,
) -> Vec<Point3> {
    let [si, ti, pi] = segment_intervals(grid, gamma);
    let sn = cheb::cheb_nodes(p_s, si.0, si.1);
    let tn = cheb::cheb_nodes(p_ang, ti.0, ti.1);
    let pn = cheb::cheb_nodes(p_ang, pi.0, pi.1);
    let mut nodes = Vec::with_capacity(p_s * p_ang * p_ang);
    for &phi in &pn {
        for &theta in &tn {
            for &s in &sn {
                nodes.push(kernel::from_spherical(center, kernel::r_of_s(s, h), theta, phi));
            }
        }
    }
    nodes
}

/// Relevant cone segments of every box, per level.
#[derive(Clone, Debug)]
pub struct ConeHierarchy {
    grids: Vec<ConeGrid>,
    levels: Vec<SegmentLevel>,
    p_s: usize,
    p_ang: usize,
}

#[derive(Clone, Debug, Default)]
struct SegmentLevel {
    /// Prefix offsets into `codes`, one entry per stored box plus one.
    box_offsets: Vec<u32>,
    /// Sorted segment codes per box, concatenated.
    codes: Vec<u32>,
}

impl ConeHierarchy {
    /// Grid used at level `d`.
    pub fn grid(&self, d: u8) -> ConeGrid {
        self.grids[d as usize - 1]
    }

    pub fn grids(&self) -> &[ConeGrid] {
        &self.grids
    }

    pub fn order_radial(&self) -> usize {
        self.p_s
    }

    pub fn order_angular(&self) -> usize {
        self.p_ang
    }

    /// Nodes per segment.
    pub fn nodes_per_segment(&self) -> usize {
        self.p_s * self.p_ang * self.p_ang
    }

    /// Sorted relevant segment codes of one box.
    pub fn segment_codes(&self, d: u8, box_index: u32) -> &[u32] {
        let level = &self.levels[d as usize - 1];
        let lo = level.box_offsets[box_index as usize] as usize;
        let hi = level.box_offsets[box_index as usize + 1] as usize;
        &level.codes[lo..hi]
    }

    /// Global index (within level `d`) of the first segment of a box.
    pub fn segment_offset(&self, d: u8, box_index: u32) -> u32 {
        self.levels[d as usize - 1].box_offsets[box_index as usize]
    }

    /// Level-global index of the segment with code `code` in the given box.
    pub fn find_segment(&self, d: u8, box_index: u32, code: u32) -> Option<u32> {
        let level = &self.levels[d as usize - 1];
        let lo = level.box_offsets[box_index as usize] as usize;
        let hi = level.box_offsets[box_index as usize + 1] as usize;
        level.codes[lo..hi]
            .binary_search(&code)
            .ok()
            .map(|pos| (lo + pos) as u32)
    }

    /// Total relevant segments at level `d`.
    pub fn segment_count(&self, d: u8) -> usize {
        self.levels[d as usize - 1].codes.len()
    }

    /// Code of the level-global segment `index`, with its owning box.
    pub fn segment_by_index(&self, d: u8, index: u32) -> (u32, u32) {
        let level = &self.levels[d as usize - 1];
        let box_index = match level.box_offsets.binary_search(&index) {
            Ok(mut pos) => {
                // Skip empty boxes sharing the same offset.
                while level.box_offsets[pos + 1] == index {
                    pos += 1;
                }
                pos
            }
            Err(pos) => pos - 1,
        };
        (box_index as u32, level.codes[index as usize])
    }
}

/// Marks the relevant segments of every box.
///
/// One sweep from level 3 (the coarsest level with cousins) to the leaves:
/// a segment is relevant when it contains a cousin surface point of its box,
/// or (below level 3) an interpolation node of a relevant segment of the
/// parent box.
pub fn compute_relevant_segments(
    tree: &BoxTree,
    kappa: f64,
    leaf_grid: ConeGrid,
    p_s: usize,
    p_ang: usize,
) -> Result<ConeHierarchy, ConeError> {
    if p_s == 0 || p_s > cheb::MAX_ORDER {
        return Err(ConeError::BadOrder(p_s));
    }
    if p_ang == 0 || p_ang > cheb::MAX_ORDER {
        return Err(ConeError::BadOrder(p_ang));
    }
    let depth = tree.depth();
    let sides: Vec<f64> = (1..=depth).map(|d| tree.side(d)).collect();
    let grids = refinement_schedule(kappa, &sides, leaf_grid);

    let mut levels: Vec<SegmentLevel> = Vec::with_capacity(depth as usize);
    let mut per_box: Vec<Vec<Vec<u32>>> = (1..=depth)
        .map(|d| vec![Vec::new(); tree.box_count(d)])
        .collect();

    for d in 3..=depth {
        let grid = grids[d as usize - 1];
        let h = tree.half_diagonal(d);
        // Segments holding cousin surface points.
        for b in 0..tree.box_count(d) as u32 {
            let center = tree.center(tree.key_of(d, b));
            let sink = &mut per_box[d as usize - 1][b as usize];
            for cousin in tree.cousins(d, b) {
                let (lo, hi) = tree.point_range(d, cousin);
                for i in lo..hi {
                    let x = tree.points()[i as usize];
                    let gamma = segment_of_point(grid, center, h, x)
                        .expect("cousin points lie inside the cone domain");
                    sink.push(gamma_code(grid, gamma));
                }
            }
        }
        // Segments holding interpolation nodes of relevant parent segments.
        if d >= 4 {
            let parent_level = d - 1;
            let parent_grid = grids[parent_level as usize - 1];
            let parent_h = tree.half_diagonal(parent_level);
            let (coarser, finer) = per_box.split_at_mut(d as usize - 1);
            let parent_boxes = &coarser[parent_level as usize - 1];
            let child_boxes = &mut finer[0];
            for j in 0..tree.box_count(parent_level) as u32 {
                let parent_codes = &parent_boxes[j as usize];
                if parent_codes.is_empty() {
                    continue;
                }
                let parent_center = tree.center(tree.key_of(parent_level, j));
                let (clo, chi) = tree.children_range(parent_level, j);
                for &code in parent_codes.iter() {
                    let gamma = gamma_of_code(parent_grid, code);
                    let nodes =
                        interpolation_nodes(parent_grid, gamma, parent_center, parent_h, p_s, p_ang);
                    for b in clo..chi {
                        let center = tree.center(tree.key_of(d, b));
                        let sink = &mut child_boxes[b as usize];
                        for &x in &nodes {
                            let gamma = segment_of_point(grid, center, h, x)
                                .expect("parent nodes lie inside the child cone domain");
                            sink.push(gamma_code(grid, gamma));
                        }
                    }
                }
            }
        }
        // Deduplicate before the next level reads these lists.
        for codes in &mut per_box[d as usize - 1] {
            codes.sort_unstable();
            codes.dedup();
        }
    }

    for d in 1..=depth {
        let boxes = &per_box[d as usize - 1];
        let mut level = SegmentLevel::default();
        level.box_offsets.push(0);
        for codes in boxes {
            level.codes.extend_from_slice(codes);
            level.box_offsets.push(level.codes.len() as u32);
        }
        levels.push(level);
    }

    Ok(ConeHierarchy { grids, levels, p_s, p_ang })
}
