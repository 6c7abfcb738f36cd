//! Brute-force oracles shared by the integration tests. None of them touch
//! the spatial index, the sparse graph or the nearest-neighbour chain.
#![allow(dead_code)]

use std::collections::VecDeque;

use geohclust::geo::Coordinates;
use geohclust::{Method, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every pair `i < j` with `d(i, j) <= h`, in `(i, j)` order.
pub fn brute_pairs(ps: &PointSet, h: f64) -> Vec<(usize, usize, f64)> {
    let n = ps.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = ps.distance(i, j);
            if d <= h {
                out.push((i, j, d));
            }
        }
    }
    out
}

/// Ids `j != center` within `h` of `center`.
pub fn brute_range(ps: &PointSet, center: usize, h: f64) -> Vec<usize> {
    (0..ps.len()).filter(|&j| j != center && ps.distance(center, j) <= h).collect()
}

/// Breadth-first components, numbered by smallest member.
pub fn bfs_components(n: usize, edges: &[(usize, usize, f64)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(i, j, _) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if label[v] == usize::MAX {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}

/// Minimum spanning forest weight by O(n^2) Prim on the complete graph
/// restricted to pairs within `h`.
pub fn prim_forest_weight(ps: &PointSet, h: f64) -> f64 {
    let n = ps.len();
    let mut done = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut total = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&i| !done[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        done[u] = true;
        if best[u].is_finite() {
            total += best[u];
        }
        for v in 0..n {
            let d = ps.distance(u, v);
            if !done[v] && d <= h && d < best[v] {
                best[v] = d;
            }
        }
    }
    total
}

/// Labels relabelled by first occurrence.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let k = map.len();
            *map.entry(l).or_insert(k)
        })
        .collect()
}

/// Greedy agglomeration straight from the linkage definitions: at every step
/// the pair of clusters with the smallest linkage value merges. Returns the
/// merge heights and the labels at each cut (merges with height `<= h`).
///
/// Ward uses the centroid form `sqrt(2|A||B|/(|A|+|B|)) * |mu_A - mu_B|` and
/// so needs planar points.
pub fn naive_hac(ps: &PointSet, method: Method, cuts: &[f64]) -> (Vec<f64>, Vec<Vec<usize>>) {
    let n = ps.len();
    let xy: Vec<(f64, f64)> = match ps.coordinates() {
        Coordinates::Planar(p) => p.iter().map(|q| (q.x, q.y)).collect(),
        Coordinates::Geo(_) => {
            assert!(method != Method::Ward, "centroid Ward oracle needs planar points");
            Vec::new()
        }
    };
    let d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| ps.distance(i, j)).collect()).collect();
    let d = &d;
    let xy = &xy;
    let linkage = |a: &[usize], b: &[usize]| -> f64 {
        match method {
            Method::Single => a.iter().flat_map(|&i| b.iter().map(move |&j| (i, j))).map(|(i, j)| d[i][j]).fold(f64::INFINITY, f64::min),
            Method::Complete => a.iter().flat_map(|&i| b.iter().map(move |&j| (i, j))).map(|(i, j)| d[i][j]).fold(0.0, f64::max),
            Method::Average => {
                let s: f64 = a.iter().flat_map(|&i| b.iter().map(move |&j| d[i][j])).sum();
                s / (a.len() * b.len()) as f64
            }
            Method::Ward => {
                let mean = |c: &[usize]| {
                    let k = c.len() as f64;
                    (c.iter().map(|&i| xy[i].0).sum::<f64>() / k, c.iter().map(|&i| xy[i].1).sum::<f64>() / k)
                };
                let (ma, mb) = (mean(a), mean(b));
                let (na, nb) = (a.len() as f64, b.len() as f64);
                (2.0 * na * nb / (na + nb)).sqrt() * ((ma.0 - mb.0).powi(2) + (ma.1 - mb.1).powi(2)).sqrt()
            }
        }
    };
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut heights = Vec::with_capacity(n.saturating_sub(1));
    let mut snapshots: Vec<(f64, Vec<Vec<usize>>)> = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let v = linkage(&clusters[a], &clusters[b]);
                if v < best.0 {
                    best = (v, a, b);
                }
            }
        }
        let (h, a, b) = best;
        snapshots.push((h, clusters.clone()));
        let merged = clusters.swap_remove(b);
        clusters[a].extend(merged);
        heights.push(h);
    }
    snapshots.push((f64::INFINITY, clusters));
    let labels = cuts
        .iter()
        .map(|&cut| {
            // Clusters just before the first merge above the cut.
            let (_, state) = snapshots.iter().find(|(h, _)| *h > cut).unwrap();
            let mut out = vec![0; n];
            for (k, c) in state.iter().enumerate() {
                for &i in c {
                    out[i] = k;
                }
            }
            canonical(&out)
        })
        .collect();
    (heights, labels)
}

/// Planar points in `[0, side)^2`.
pub fn uniform_points(n: usize, side: f64, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xy: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>() * side, rng.random::<f64>() * side)).collect();
    PointSet::from_xy(&xy).unwrap()
}

/// Lat/lon points in a box centred on `(lat, lon)`, wrapping longitude.
pub fn geo_points(n: usize, lat: f64, lon: f64, span_deg: f64, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ll: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let la = (lat + (rng.random::<f64>() - 0.5) * span_deg).clamp(-90.0, 90.0);
            let mut lo = lon + (rng.random::<f64>() - 0.5) * span_deg;
            if lo > 180.0 {
                lo -= 360.0;
            } else if lo < -180.0 {
                lo += 360.0;
            }
            (la, lo)
        })
        .collect();
    PointSet::from_lat_lon(&ll).unwrap()
}
