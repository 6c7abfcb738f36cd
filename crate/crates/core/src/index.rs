//! Fixed-radius neighbour search over a [`PointSet`].
//!
//! One bucketed k-d tree serves both metrics. Planar points are indexed in
//! the plane; geodesic points are indexed by their unit-sphere embedding with
//! the search radius converted to a chord length. The tree only prunes: every
//! candidate that survives the (slightly inflated) embedded bound is accepted
//! or rejected with the exact metric distance, so results match a brute-force
//! scan with `d(i, j) <= h` bit for bit.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geo::{radius_to_chord_on, Embedded, PointSet};

pub const DEFAULT_LEAF_SIZE: usize = 16;

// Absolute slack on unit-sphere chords; far above embedding round-off, far
// below any meaningful distance (about 6 micrometres on Earth).
const CHORD_SLACK: f64 = 1e-12;
const PLANAR_REL_SLACK: f64 = 1e-12;

const NO_CHILD: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Node<const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
    start: usize,
    end: usize,
    left: usize,
    right: usize,
}

#[derive(Clone, Debug)]
struct KdTree<const D: usize> {
    /// Coordinates in tree order.
    coords: Vec<[f64; D]>,
    /// Point id at each tree position.
    ids: Vec<usize>,
    /// Tree position of each point id.
    position: Vec<usize>,
    nodes: Vec<Node<D>>,
}

impl<const D: usize> KdTree<D> {
    fn build(points: &[[f64; D]], leaf_size: usize) -> Self {
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / leaf_size.max(1) + 1);
        Self::build_node(points, &mut ids, 0, leaf_size, &mut nodes);
        let coords: Vec<[f64; D]> = ids.iter().map(|&i| points[i]).collect();
        let mut position = vec![0; ids.len()];
        for (pos, &id) in ids.iter().enumerate() {
            position[id] = pos;
        }
        KdTree {
            coords,
            ids,
            position,
            nodes,
        }
    }

    fn build_node(
        points: &[[f64; D]],
        ids: &mut [usize],
        offset: usize,
        leaf_size: usize,
        nodes: &mut Vec<Node<D>>,
    ) -> usize {
        let mut lo = [f64::INFINITY; D];
        let mut hi = [f64::NEG_INFINITY; D];
        for &i in ids.iter() {
            for d in 0..D {
                lo[d] = lo[d].min(points[i][d]);
                hi[d] = hi[d].max(points[i][d]);
            }
        }
        let me = nodes.len();
        nodes.push(Node {
            lo,
            hi,
            start: offset,
            end: offset + ids.len(),
            left: NO_CHILD,
            right: NO_CHILD,
        });
        if ids.len() <= leaf_size {
            return me;
        }
        let axis = (0..D)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        if hi[axis] - lo[axis] <= 0.0 {
            // All points coincide; splitting cannot separate them.
            return me;
        }
        let mid = ids.len() / 2;
        ids.select_nth_unstable_by(mid, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
        });
        let (left_ids, right_ids) = ids.split_at_mut(mid);
        let left = Self::build_node(points, left_ids, offset, leaf_size, nodes);
        let right = Self::build_node(points, right_ids, offset + mid, leaf_size, nodes);
        nodes[me].left = left;
        nodes[me].right = right;
        me
    }

    fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.left == NO_CHILD).count()
    }

    /// Calls `visit(id)` for every point whose embedded squared distance to
    /// `q` is at most `r2`.
    fn for_each_candidate(
        &self,
        q: &[f64; D],
        r2: f64,
        stack: &mut Vec<usize>,
        mut visit: impl FnMut(usize),
    ) {
        stack.clear();
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let mut gap2 = 0.0;
            for ((&x, &lo), &hi) in q.iter().zip(&node.lo).zip(&node.hi) {
                let g = if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    0.0
                };
                gap2 += g * g;
            }
            if gap2 > r2 {
                continue;
            }
            if node.left == NO_CHILD {
                for pos in node.start..node.end {
                    let p = &self.coords[pos];
                    let mut d2 = 0.0;
                    for d in 0..D {
                        let t = p[d] - q[d];
                        d2 += t * t;
                    }
                    if d2 <= r2 {
                        visit(self.ids[pos]);
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(node.left);
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Tree {
    Plane(KdTree<2>),
    Sphere(KdTree<3>),
}

/// Immutable spatial index borrowing the point set it was built over.
#[derive(Clone, Debug)]
pub struct SpatialIndex<'a> {
    points: &'a PointSet,
    tree: Tree,
    leaf_size: usize,
}

impl<'a> SpatialIndex<'a> {
    pub fn build(points: &'a PointSet) -> Result<Self> {
        Self::with_leaf_size(points, DEFAULT_LEAF_SIZE)
    }

    pub fn with_leaf_size(points: &'a PointSet, leaf_size: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if leaf_size == 0 {
            return Err(Error::invalid("leaf size must be at least 1"));
        }
        let tree = match points.embedded() {
            Embedded::Plane(p) => Tree::Plane(KdTree::build(&p, leaf_size)),
            Embedded::Sphere(p) => Tree::Sphere(KdTree::build(&p, leaf_size)),
        };
        Ok(SpatialIndex {
            points,
            tree,
            leaf_size,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &'a PointSet {
        self.points
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn leaf_count(&self) -> usize {
        match &self.tree {
            Tree::Plane(t) => t.leaf_count(),
            Tree::Sphere(t) => t.leaf_count(),
        }
    }

    /// Squared search bound in embedded coordinates for radius `h` km.
    fn embedded_bound2(&self, h: f64) -> f64 {
        match &self.tree {
            Tree::Plane(_) => {
                let r = h * (1.0 + PLANAR_REL_SLACK) + f64::MIN_POSITIVE;
                r * r
            }
            Tree::Sphere(_) => {
                let radius = self.points.earth_radius_km();
                let arc = h.min(std::f64::consts::PI * radius);
                let r = radius_to_chord_on(arc, radius).unwrap_or(2.0) + CHORD_SLACK;
                r * r
            }
        }
    }

    fn check_radius(h: f64) -> Result<()> {
        if !(h > 0.0) || h.is_nan() {
            return Err(Error::invalid(format!("search radius must be > 0, got {h}")));
        }
        Ok(())
    }

    /// Calls `visit(j, d_ij)` for every `j != i` with `d_ij <= h`.
    fn for_each_neighbor(
        &self,
        i: usize,
        h: f64,
        r2: f64,
        stack: &mut Vec<usize>,
        mut visit: impl FnMut(usize, f64),
    ) {
        let points = self.points;
        let mut check = |j: usize| {
            if j != i {
                let d = points.distance(i, j);
                if d <= h {
                    visit(j, d);
                }
            }
        };
        match &self.tree {
            Tree::Plane(t) => {
                let q = t.coords[t.position[i]];
                t.for_each_candidate(&q, r2, stack, &mut check);
            }
            Tree::Sphere(t) => {
                let q = t.coords[t.position[i]];
                t.for_each_candidate(&q, r2, stack, &mut check);
            }
        }
    }

    /// Ids `j != center` with `d(center, j) <= h`, ascending.
    pub fn range_query(&self, center: usize, h: f64) -> Result<Vec<usize>> {
        if center >= self.len() {
            return Err(Error::invalid(format!(
                "point id {center} out of range for {} points",
                self.len()
            )));
        }
        Self::check_radius(h)?;
        let r2 = self.embedded_bound2(h);
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.for_each_neighbor(center, h, r2, &mut stack, |j, _| out.push(j));
        out.sort_unstable();
        Ok(out)
    }

    /// Every unordered pair within `h` exactly once as `(i, j, d)` with
    /// `i < j`, sorted by `(i, j)`.
    pub fn query_pairs(&self, h: f64) -> Result<Vec<(usize, usize, f64)>> {
        self.query_pairs_with(h, false)
    }

    /// As [`query_pairs`](Self::query_pairs); `parallel` spreads the
    /// per-point queries over the rayon pool with identical output.
    pub fn query_pairs_with(&self, h: f64, parallel: bool) -> Result<Vec<(usize, usize, f64)>> {
        Self::check_radius(h)?;
        let r2 = self.embedded_bound2(h);
        let n = self.len();
        let rows = |range: std::ops::Range<usize>| {
            let mut out = Vec::new();
            let mut row: Vec<(usize, f64)> = Vec::new();
            let mut stack = Vec::new();
            for i in range {
                row.clear();
                self.for_each_neighbor(i, h, r2, &mut stack, |j, d| {
                    if j > i {
                        row.push((j, d));
                    }
                });
                row.sort_unstable_by_key(|&(j, _)| j);
                out.extend(row.iter().map(|&(j, d)| (i, j, d)));
            }
            out
        };
        if !parallel {
            return Ok(rows(0..n));
        }
        const CHUNK: usize = 4096;
        let chunks: Vec<Vec<(usize, usize, f64)>> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| rows(c * CHUNK..((c + 1) * CHUNK).min(n)))
            .collect();
        Ok(chunks.concat())
    }
}
