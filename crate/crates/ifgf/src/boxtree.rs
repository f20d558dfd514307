//! Sparse box octree over a point cloud.
//!
//! Level `d` partitions the root cube into `2^(d-1)` boxes per axis, indexed
//! by 1-based triples `k` with the half-open convention: a point on a shared
//! face belongs to the box with the larger index. Only non-empty boxes are
//! stored, as per-level arrays sorted by the Morton code of `k - 1`, which
//! makes every box (at every level) own one contiguous range of the
//! leaf-sorted point array.
//!
//! Two same-level boxes are neighbors when their index triples differ by at
//! most one per axis (a box neighbors itself). The cousins of a box are the
//! stored same-level boxes that are not neighbors but whose parents neighbor
//! the box's parent; all interactions between a box and its cousins are far
//! enough apart (`|x - center| >= 3H/2`) for interpolation, and walking
//! cousin lists level by level accounts for every non-neighbor source box
//! exactly once.

use thiserror::Error;

use crate::point::Point3;

/// Hard cap on tree depth so Morton codes fit in a u64.
pub const MAX_DEPTH: u8 = 21;

/// How close the root box may come to its content: the side is padded by
/// this fraction so no point lands on an open upper face.
const ROOT_PAD: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("point cloud has zero spatial extent")]
    ZeroExtent,
    #[error("depth {0} outside 1..={MAX_DEPTH}")]
    BadDepth(u8),
    #[error("point {0:?} lies outside the root box")]
    OutsideRoot(Point3),
}

/// Identifies one box: a level `d >= 1` and 1-based per-axis indices in
/// `[1, 2^(d-1)]`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoxKey {
    pub level: u8,
    pub k: [u32; 3],
}

impl BoxKey {
    /// Key of the containing box one level up: `ceil(k / 2)` per axis.
    pub fn parent(self) -> BoxKey {
        assert!(self.level > 1, "level-1 box has no parent");
        BoxKey {
            level: self.level - 1,
            k: self.k.map(|k| k.div_ceil(2)),
        }
    }

    /// Chebyshev (max-norm) distance between index triples.
    pub fn index_distance(self, other: BoxKey) -> u32 {
        assert_eq!(self.level, other.level);
        self.k
            .iter()
            .zip(&other.k)
            .map(|(&a, &b)| a.abs_diff(b))
            .max()
            .unwrap()
    }

    /// Morton code of the zero-based index triple.
    pub fn code(self) -> u64 {
        morton3([self.k[0] - 1, self.k[1] - 1, self.k[2] - 1])
    }

    pub fn from_code(level: u8, code: u64) -> BoxKey {
        let c = demorton3(code);
        BoxKey { level, k: [c[0] + 1, c[1] + 1, c[2] + 1] }
    }
}

fn spread_bits(v: u64) -> u64 {
    let mut x = v & 0x1f_ffff;
    x = (x | x << 32) & 0x001f_0000_0000_ffff;
    x = (x | x << 16) & 0x001f_0000_ff00_00ff;
    x = (x | x << 8) & 0x100f_00f0_0f00_f00f;
    x = (x | x << 4) & 0x10c3_0c30_c30c_30c3;
    x = (x | x << 2) & 0x1249_2492_4924_9249;
    x
}

fn compact_bits(v: u64) -> u64 {
    let mut x = v & 0x1249_2492_4924_9249;
    x = (x | x >> 2) & 0x10c3_0c30_c30c_30c3;
    x = (x | x >> 4) & 0x100f_00f0_0f00_f00f;
    x = (x | x >> 8) & 0x001f_0000_ff00_00ff;
    x = (x | x >> 16) & 0x001f_0000_0000_ffff;
    x = (x | x >> 32) & 0x1f_ffff;
    x
}

fn morton3(c: [u32; 3]) -> u64 {
    spread_bits(c[0] as u64) | spread_bits(c[1] as u64) << 1 | spread_bits(c[2] as u64) << 2
}

fn demorton3(code: u64) -> [u32; 3] {
    [
        compact_bits(code) as u32,
        compact_bits(code >> 1) as u32,
        compact_bits(code >> 2) as u32,
    ]
}

/// Stored boxes of one level, sorted by Morton code.
#[derive(Clone, Debug, Default)]
struct Level {
    codes: Vec<u64>,
    /// Half-open range into the reordered point array, per box.
    ranges: Vec<(u32, u32)>,
    /// Index of the parent box in the next coarser level (empty at level 1).
    parent: Vec<u32>,
    /// Half-open index range of the children in the next finer level
    /// (empty at the leaf level).
    children: Vec<(u32, u32)>,
}

/// Octree over a point cloud, with points reordered so every stored box owns
/// a contiguous slice.
#[derive(Clone, Debug)]
pub struct BoxTree {
    depth: u8,
    root_lo: Point3,
    h1: f64,
    points: Vec<Point3>,
    orig_index: Vec<u32>,
    levels: Vec<Level>,
}

/// Controls automatic depth selection in [`BoxTree::build`].
#[derive(Copy, Clone, Debug)]
pub struct DepthRule {
    /// Fixed depth, overriding the automatic rules.
    pub depth_override: Option<u8>,
    /// Laplace rule: smallest depth with at most this mean point count per
    /// non-empty leaf box.
    pub leaf_target: usize,
}

impl Default for DepthRule {
    fn default() -> Self {
        DepthRule { depth_override: None, leaf_target: 16 }
    }
}

impl BoxTree {
    /// Builds the tree. For `kappa > 0` the depth makes the leaf side close
    /// to a quarter wavelength; for `kappa = 0` it follows the leaf
    /// occupancy target.
    pub fn build(points: &[Point3], kappa: f64, rule: DepthRule) -> Result<BoxTree, TreeError> {
        assert!(!points.is_empty(), "geometry layer guarantees non-empty clouds");
        let mut lo = points[0];
        let mut hi = points[0];
        for &p in points {
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let extent = (hi - lo).max_element();
        let h1 = if points.len() == 1 {
            1.0
        } else if extent > 0.0 {
            extent * (1.0 + ROOT_PAD)
        } else {
            return Err(TreeError::ZeroExtent);
        };

        let depth = match rule.depth_override {
            Some(d) => {
                if d == 0 || d > MAX_DEPTH {
                    return Err(TreeError::BadDepth(d));
                }
                d
            }
            None if kappa > 0.0 => {
                // H_D ~ lambda / 4 = pi / (2 kappa).
                let levels = (2.0 * kappa * h1 / std::f64::consts::PI).log2().round();
                (1.0 + levels.max(0.0)).min(MAX_DEPTH as f64) as u8
            }
            None => laplace_depth(points, lo, h1, rule.leaf_target),
        };

        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let codes: Vec<u64> = points
            .iter()
            .map(|&p| morton3(cell_of(p, lo, h1, depth)))
            .collect();
        order.sort_unstable_by_key(|&i| (codes[i as usize], i));

        let sorted_points: Vec<Point3> = order.iter().map(|&i| points[i as usize]).collect();
        let sorted_codes: Vec<u64> = order.iter().map(|&i| codes[i as usize]).collect();

        let mut levels = vec![Level::default(); depth as usize];
        // Leaf level: group runs of equal codes.
        {
            let leaf = &mut levels[depth as usize - 1];
            let mut start = 0;
            while start < sorted_codes.len() {
                let code = sorted_codes[start];
                let mut end = start + 1;
                while end < sorted_codes.len() && sorted_codes[end] == code {
                    end += 1;
                }
                leaf.codes.push(code);
                leaf.ranges.push((start as u32, end as u32));
                start = end;
            }
        }
        // Coarser levels: group children by code prefix and link both ways.
        for d in (1..depth as usize).rev() {
            let (coarse_slice, fine_slice) = levels.split_at_mut(d);
            let coarse = &mut coarse_slice[d - 1];
            let fine = &mut fine_slice[0];
            let mut start = 0;
            while start < fine.codes.len() {
                let code = fine.codes[start] >> 3;
                let mut end = start + 1;
                while end < fine.codes.len() && fine.codes[end] >> 3 == code {
                    end += 1;
                }
                let parent_index = coarse.codes.len() as u32;
                fine.parent.extend(std::iter::repeat(parent_index).take(end - start));
                coarse.codes.push(code);
                coarse.ranges.push((fine.ranges[start].0, fine.ranges[end - 1].1));
                coarse.children.push((start as u32, end as u32));
                start = end;
            }
        }

        Ok(BoxTree {
            depth,
            root_lo: lo,
            h1,
            points: sorted_points,
            orig_index: order,
            levels,
        })
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    /// Box side at level `d`: `H_d = H_1 / 2^(d-1)`.
    pub fn side(&self, d: u8) -> f64 {
        self.h1 / (1u64 << (d - 1)) as f64
    }

    /// Half diagonal `h_d = sqrt(3)/2 * H_d`, the radial scale of the box.
    pub fn half_diagonal(&self, d: u8) -> f64 {
        3f64.sqrt() / 2.0 * self.side(d)
    }

    /// Center of a box, from the root lower corner and the box side.
    pub fn center(&self, key: BoxKey) -> Point3 {
        let h = self.side(key.level);
        self.root_lo
            + Point3::new(
                h * (key.k[0] as f64 - 0.5),
                h * (key.k[1] as f64 - 0.5),
                h * (key.k[2] as f64 - 0.5),
            )
    }

    /// Points in leaf-sorted order; all box ranges index into this array.
    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    /// Original cloud index of each reordered point.
    pub fn orig_index(&self) -> &[u32] {
        &self.orig_index
    }

    /// Number of stored (non-empty) boxes at level `d`.
    pub fn box_count(&self, d: u8) -> usize {
        self.level(d).codes.len()
    }

    pub fn key_of(&self, d: u8, index: u32) -> BoxKey {
        BoxKey::from_code(d, self.level(d).codes[index as usize])
    }

    pub fn point_range(&self, d: u8, index: u32) -> (u32, u32) {
        self.level(d).ranges[index as usize]
    }

    /// Index of the parent box one level up.
    pub fn parent_index(&self, d: u8, index: u32) -> u32 {
        assert!(d > 1);
        self.level(d).parent[index as usize]
    }

    /// Index range of the children one level down.
    pub fn children_range(&self, d: u8, index: u32) -> (u32, u32) {
        self.level(d).children[index as usize]
    }

    /// Geometric box containing `x` at level `d`, independent of occupancy.
    pub fn box_of_point(&self, x: Point3, d: u8) -> Result<BoxKey, TreeError> {
        let rel = x - self.root_lo;
        for c in rel.to_array() {
            if c < 0.0 || c >= self.h1 {
                return Err(TreeError::OutsideRoot(x));
            }
        }
        let cell = cell_of(x, self.root_lo, self.h1, d);
        Ok(BoxKey { level: d, k: [cell[0] + 1, cell[1] + 1, cell[2] + 1] })
    }

    /// Index of the stored box with the given key, if occupied.
    pub fn find_box(&self, key: BoxKey) -> Option<u32> {
        let level = self.level(key.level);
        level.codes.binary_search(&key.code()).ok().map(|i| i as u32)
    }

    /// Indices of stored same-level boxes within index distance one,
    /// including `index` itself, in Morton order.
    pub fn neighbors(&self, d: u8, index: u32) -> Vec<u32> {
        let key = self.key_of(d, index);
        let max = 1u32 << (d - 1);
        let mut found = Vec::with_capacity(27);
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                for dz in -1..=1i64 {
                    let cand = [
                        key.k[0] as i64 + dx,
                        key.k[1] as i64 + dy,
                        key.k[2] as i64 + dz,
                    ];
                    if cand.iter().any(|&c| c < 1 || c > max as i64) {
                        continue;
                    }
                    let cand = BoxKey {
                        level: d,
                        k: [cand[0] as u32, cand[1] as u32, cand[2] as u32],
                    };
                    if let Some(i) = self.find_box(cand) {
                        found.push(i);
                    }
                }
            }
        }
        found.sort_unstable();
        found
    }

    /// Indices of stored cousin boxes: children of the parent's neighbors
    /// that are not neighbors of this box. Empty below level 3. The result
    /// is in Morton order.
    pub fn cousins(&self, d: u8, index: u32) -> Vec<u32> {
        if d < 3 {
            return Vec::new();
        }
        let key = self.key_of(d, index);
        let parent = self.parent_index(d, index);
        let mut out = Vec::new();
        for pn in self.neighbors(d - 1, parent) {
            let (lo, hi) = self.children_range(d - 1, pn);
            for child in lo..hi {
                let child_key = self.key_of(d, child);
                if key.index_distance(child_key) > 1 {
                    out.push(child);
                }
            }
        }
        debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(out.len() <= 189);
        out
    }

    fn level(&self, d: u8) -> &Level {
        assert!(d >= 1 && d <= self.depth, "level {d} outside 1..={}", self.depth);
        &self.levels[d as usize - 1]
    }
}

fn cell_of(p: Point3, lo: Point3, h1: f64, d: u8) -> [u32; 3] {
    let cells = 1u32 << (d - 1);
    let scale = cells as f64 / h1;
    let rel = p - lo;
    [
        cell_index(rel.x * scale, cells),
        cell_index(rel.y * scale, cells),
        cell_index(rel.z * scale, cells),
    ]
}

#[inline]
fn cell_index(q: f64, cells: u32) -> u32 {
    (q.floor() as i64).clamp(0, cells as i64 - 1) as u32
}

/// Smallest depth whose non-empty leaves hold at most `target` points on
/// average.
fn laplace_depth(points: &[Point3], lo: Point3, h1: f64, target: usize) -> u8 {
    let target = target.max(1);
    for d in 1..MAX_DEPTH {
        let mut codes: Vec<u64> = points.iter().map(|&p| morton3(cell_of(p, lo, h1, d))).collect();
        codes.sort_unstable();
        codes.dedup();
        if points.len() <= target * codes.len() {
            return d;
        }
    }
    MAX_DEPTH
}
