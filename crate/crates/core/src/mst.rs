//! Single linkage from the minimum spanning tree of a sparse component graph.
//!
//! The single-linkage dendrogram of a point set is its minimum spanning tree
//! with edges replayed in ascending weight. Within a connected component of
//! the distance-band graph the sparse MST is also the MST of the complete
//! graph, so this path needs `O(c + m)` memory and never forms a dense matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SparseDistanceGraph;
use crate::linkage::{LinkageMatrix, Merge};
use crate::union_find::DisjointSets;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

fn by_weight_then_ids(a: &MstEdge, b: &MstEdge) -> std::cmp::Ordering {
    a.weight
        .total_cmp(&b.weight)
        .then(a.u.cmp(&b.u))
        .then(a.v.cmp(&b.v))
}

/// Kruskal over the graph's edges; ties are taken in `(u, v)` order.
pub fn minimum_spanning_tree(g: &SparseDistanceGraph) -> Result<Vec<MstEdge>> {
    let n = g.node_count();
    let mut edges: Vec<MstEdge> = g
        .edges()
        .map(|(u, v, weight)| MstEdge { u, v, weight })
        .collect();
    edges.sort_unstable_by(by_weight_then_ids);
    let mut sets = DisjointSets::new(n);
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for e in edges {
        if tree.len() + 1 >= n {
            break;
        }
        if sets.union(e.u, e.v).is_some() {
            tree.push(e);
        }
    }
    if n > 0 && tree.len() != n - 1 {
        return Err(Error::Disconnected {
            nodes: n,
            edges: tree.len(),
        });
    }
    Ok(tree)
}

/// Peak working bytes of [`single_linkage_from_graph`] on a component with
/// `nodes` nodes and `edges` undirected edges, excluding the input graph.
pub fn mst_path_bytes(nodes: usize, edges: usize) -> usize {
    let edge = std::mem::size_of::<MstEdge>();
    let w = std::mem::size_of::<usize>();
    // sorted edge list + union-find + tree edges + id map + output linkage
    edges * edge + 3 * nodes * w + nodes * edge + nodes * w + nodes * std::mem::size_of::<Merge>()
}

/// Replays spanning-tree edges in ascending `(weight, u, v)` order through a
/// union-find, emitting one merge per edge.
pub fn mst_to_linkage(edges: &[MstEdge], nodes: usize) -> Result<LinkageMatrix> {
    if nodes == 0 {
        return Err(Error::invalid("spanning tree over zero nodes"));
    }
    if edges.len() != nodes - 1 {
        return Err(Error::Disconnected {
            nodes,
            edges: edges.len(),
        });
    }
    let mut sorted = edges.to_vec();
    sorted.sort_by(by_weight_then_ids);
    let mut sets = DisjointSets::new(nodes);
    let mut cluster_of_root: Vec<usize> = (0..nodes).collect();
    let mut merges = Vec::with_capacity(nodes - 1);
    for (t, e) in sorted.iter().enumerate() {
        if e.u >= nodes || e.v >= nodes {
            return Err(Error::invalid(format!("edge ({}, {}) out of range", e.u, e.v)));
        }
        let (ru, rv) = (sets.find(e.u), sets.find(e.v));
        let (a, b) = (cluster_of_root[ru], cluster_of_root[rv]);
        let size = sets.set_size(ru) + sets.set_size(rv);
        let root = sets.union(ru, rv).ok_or(Error::Disconnected {
            nodes,
            edges: t,
        })?;
        cluster_of_root[root] = nodes + t;
        merges.push(Merge {
            left: a.min(b),
            right: a.max(b),
            height: e.weight,
            size,
        });
    }
    LinkageMatrix::new(nodes, merges)
}

/// Single-linkage dendrogram of a connected sparse graph.
pub fn single_linkage_from_graph(g: &SparseDistanceGraph) -> Result<LinkageMatrix> {
    let tree = minimum_spanning_tree(g)?;
    mst_to_linkage(&tree, g.node_count())
}
