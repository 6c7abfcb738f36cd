//! Cutting dendrograms and comparing the resulting partitions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ComponentPartition;
use crate::linkage::LinkageMatrix;
use crate::union_find::DisjointSets;

/// Global cluster labels at one cut height.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutLabels {
    pub height: f64,
    pub labels: Vec<usize>,
}

impl CutLabels {
    pub fn n_clusters(&self) -> usize {
        count_clusters(&self.labels)
    }
}

/// Relabels so that labels appear as `0, 1, 2, ...` in point order.
pub fn canonicalize(labels: &[usize]) -> Vec<usize> {
    let mut seen: HashMap<usize, usize> = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = seen.len();
            *seen.entry(l).or_insert(next)
        })
        .collect()
}

/// Flat clustering from all merges with height `<= h`, canonically labelled.
pub fn cut_tree(z: &LinkageMatrix, h: f64) -> Result<Vec<usize>> {
    if !(h >= 0.0) {
        return Err(Error::invalid(format!("cut height must be >= 0, got {h}")));
    }
    if h > z.height_limit() {
        return Err(Error::CutAboveRadius {
            height: h,
            h_max: z.height_limit(),
        });
    }
    let n = z.leaves();
    let mut sets = DisjointSets::new(n);
    // A leaf inside each cluster id, so merges can be replayed on leaves.
    let mut leaf_of: Vec<usize> = (0..n).collect();
    leaf_of.reserve(n.saturating_sub(1));
    for m in z.merges() {
        if m.height > h {
            break;
        }
        let (a, b) = (leaf_of[m.left], leaf_of[m.right]);
        sets.union(a, b);
        leaf_of.push(a);
    }
    let roots: Vec<usize> = (0..n).map(|i| sets.find(i)).collect();
    Ok(canonicalize(&roots))
}

/// Combines per-component cuts into global labels.
///
/// `local[k][t]` holds the labels of component `k` at `heights[t]`. Components
/// are visited in `order`; each one's labels are shifted by a running offset
/// that grows by the component size, and the result is canonicalized.
pub fn assemble_global_labels(
    local: &[Vec<Vec<usize>>],
    partition: &ComponentPartition,
    heights: &[f64],
    order: &[usize],
) -> Result<Vec<CutLabels>> {
    let members = partition.members();
    if local.len() != members.len() {
        return Err(Error::invalid(format!(
            "labels for {} components, partition has {}",
            local.len(),
            members.len()
        )));
    }
    let mut visited = vec![false; members.len()];
    for &k in order {
        if k >= members.len() || std::mem::replace(&mut visited[k], true) {
            return Err(Error::invalid(format!("component {k} missing or repeated in order")));
        }
    }
    if visited.iter().any(|v| !v) {
        return Err(Error::invalid("processing order does not cover every component"));
    }
    let n = partition.component_id().len();
    let mut out = Vec::with_capacity(heights.len());
    for (t, &h) in heights.iter().enumerate() {
        let mut labels = vec![usize::MAX; n];
        let mut offset = 0;
        for &k in order {
            let cut = local[k].get(t).ok_or_else(|| {
                Error::invalid(format!("component {k} has no labels for cut {h}"))
            })?;
            if cut.len() != members[k].len() {
                return Err(Error::invalid(format!(
                    "component {k} has {} labels for {} members",
                    cut.len(),
                    members[k].len()
                )));
            }
            for (&i, &l) in members[k].iter().zip(cut) {
                labels[i] = offset + l;
            }
            offset += members[k].len();
        }
        out.push(CutLabels {
            height: h,
            labels: canonicalize(&labels),
        });
    }
    Ok(out)
}

pub fn count_clusters(labels: &[usize]) -> usize {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Adjusted Rand index between two labellings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "label vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let pairs = |c: u64| c * c.saturating_sub(1) / 2;
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: u64 = joint.values().map(|&c| pairs(c)).sum();
    let sum_a: u64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: u64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(a.len() as u64);
    if total == 0 {
        return Ok(1.0);
    }
    let expected = sum_a as f64 * sum_b as f64 / total as f64;
    let max = 0.5 * (sum_a as f64 + sum_b as f64);
    if max == expected {
        // Only reachable when both labellings are all-singletons or both a single cluster.
        return Ok(1.0);
    }
    Ok((index as f64 - expected) / (max - expected))
}

/// True when every cluster of `fine` lies inside one cluster of `coarse`.
pub fn is_coarsening(fine: &[usize], coarse: &[usize]) -> bool {
    let mut image: HashMap<usize, usize> = HashMap::new();
    fine.len() == coarse.len()
        && fine
            .iter()
            .zip(coarse)
            .all(|(&f, &c)| *image.entry(f).or_insert(c) == c)
}
