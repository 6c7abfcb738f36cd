//! Exact agglomerative clustering on a condensed distance array.
//!
//! The nearest-neighbour chain algorithm runs in `O(c^2)` time with `O(c)`
//! working memory beyond the condensed array, which it overwrites. It is
//! exact for every reducible linkage, which covers all four [`Method`]s.
//!
//! Ward heights are reported in distance units: the Lance-Williams recurrence
//! is applied to distances and the square root taken, so that two singletons
//! merge at their distance and Ward dendrograms can be cut in kilometres.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::condensed_index;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Single,
    Complete,
    Average,
    Ward,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Single, Method::Complete, Method::Average, Method::Ward];

    pub fn name(self) -> &'static str {
        match self {
            Method::Single => "single",
            Method::Complete => "complete",
            Method::Average => "average",
            Method::Ward => "ward",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Method::Single),
            "complete" => Ok(Method::Complete),
            "average" => Ok(Method::Average),
            "ward" => Ok(Method::Ward),
            _ => Err(Error::invalid(format!(
                "unknown linkage method '{s}' (expected single, complete, average or ward)"
            ))),
        }
    }
}

/// Distance from the union of clusters `a` and `b` to a third cluster `i`.
#[inline]
pub fn lance_williams_update(
    method: Method,
    d_ai: f64,
    d_bi: f64,
    d_ab: f64,
    n_a: usize,
    n_b: usize,
    n_i: usize,
) -> f64 {
    match method {
        Method::Single => d_ai.min(d_bi),
        Method::Complete => d_ai.max(d_bi),
        Method::Average => {
            let (na, nb) = (n_a as f64, n_b as f64);
            (na * d_ai + nb * d_bi) / (na + nb)
        }
        Method::Ward => {
            let (na, nb, ni) = (n_a as f64, n_b as f64, n_i as f64);
            let num = (na + ni) * d_ai * d_ai + (nb + ni) * d_bi * d_bi - ni * d_ab * d_ab;
            (num / (na + nb + ni)).max(0.0).sqrt()
        }
    }
}

/// Upper-triangle pairwise distances in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct CondensedDistances {
    n: usize,
    data: Vec<f64>,
}

impl CondensedDistances {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("condensed matrix needs n >= 2, got {n}")));
        }
        if data.len() != n * (n - 1) / 2 {
            return Err(Error::invalid(format!(
                "condensed length {} does not match n = {n}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|d| !(**d >= 0.0) || d.is_infinite()) {
            return Err(Error::invalid(format!("invalid distance {bad}")));
        }
        Ok(CondensedDistances { n, data })
    }

    /// Computes all pairs with `dist(i, j)` for `i < j`.
    pub fn from_fn(n: usize, mut dist: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                data.push(dist(i, j));
            }
        }
        Self::new(n, data)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.data[condensed_index(self.n, a, b)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.data[condensed_index(self.n, a, b)] = v;
    }

    pub fn heap_bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<f64>()
    }
}

/// One dendrogram step. Ids below the leaf count are observations; id
/// `leaves + t` is the cluster created by step `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkageMatrix {
    leaves: usize,
    merges: Vec<Merge>,
    /// Cuts above this height are refused; infinite for dense dendrograms.
    height_limit: f64,
}

impl LinkageMatrix {
    /// Validates the structural invariants of a complete dendrogram.
    pub fn new(leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        if leaves == 0 {
            return Err(Error::invalid("dendrogram needs at least one leaf"));
        }
        if merges.len() != leaves - 1 {
            return Err(Error::invalid(format!(
                "{} merges for {leaves} leaves, expected {}",
                merges.len(),
                leaves - 1
            )));
        }
        let mut size = vec![1usize; leaves];
        size.reserve(merges.len());
        let mut used = vec![false; 2 * leaves - 1];
        let mut prev = f64::NEG_INFINITY;
        for (t, m) in merges.iter().enumerate() {
            let next_id = leaves + t;
            for id in [m.left, m.right] {
                if id >= next_id || used[id] {
                    return Err(Error::invalid(format!("step {t} references cluster {id} illegally")));
                }
                used[id] = true;
            }
            if m.left == m.right {
                return Err(Error::invalid(format!("step {t} merges cluster {} with itself", m.left)));
            }
            if m.size != size[m.left] + size[m.right] {
                return Err(Error::invalid(format!("step {t} has inconsistent size {}", m.size)));
            }
            if !(m.height >= prev) {
                return Err(Error::invalid(format!("step {t} height {} decreases", m.height)));
            }
            prev = m.height;
            size.push(m.size);
        }
        Ok(LinkageMatrix {
            leaves,
            merges,
            height_limit: f64::INFINITY,
        })
    }

    pub fn with_height_limit(mut self, limit: f64) -> Self {
        self.height_limit = limit;
        self
    }

    pub fn height_limit(&self) -> f64 {
        self.height_limit
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    pub fn heap_bytes(&self) -> usize {
        self.merges.len() * std::mem::size_of::<Merge>()
    }

    /// One `left right height size` line per step.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        for m in &self.merges {
            writeln!(out, "{} {} {} {}", m.left, m.right, m.height, m.size)?;
        }
        out.flush()
    }
}

/// Ascending linked list of active cluster slots.
struct ActiveSlots {
    next: Vec<usize>,
    prev: Vec<usize>,
    head: usize,
}

const END: usize = usize::MAX;

impl ActiveSlots {
    fn new(n: usize) -> Self {
        ActiveSlots {
            next: (1..=n).map(|i| if i == n { END } else { i }).collect(),
            prev: (0..n).map(|i| if i == 0 { END } else { i - 1 }).collect(),
            head: 0,
        }
    }

    fn remove(&mut self, s: usize) {
        let (p, n) = (self.prev[s], self.next[s]);
        if p == END {
            self.head = n;
        } else {
            self.next[p] = n;
        }
        if n != END {
            self.prev[n] = p;
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors((self.head != END).then_some(self.head), |&s| {
            let n = self.next[s];
            (n != END).then_some(n)
        })
    }
}

/// Bytes of working storage used by [`nn_chain_linkage`] beyond its input.
pub fn nn_chain_scratch_bytes(n: usize) -> usize {
    // sizes, heights, two link arrays, chain, raw steps, relabel sets, output
    let w = std::mem::size_of::<usize>();
    n * (5 * w) + n * 3 * w + n * 3 * w + n * std::mem::size_of::<Merge>()
}

pub fn nn_chain_linkage(mut d: CondensedDistances, method: Method) -> Result<LinkageMatrix> {
    let n = d.len();
    if n < 2 {
        return Err(Error::invalid(format!("linkage needs at least 2 points, got {n}")));
    }
    let mut size = vec![1usize; n];
    // Height of the step that formed the cluster in each slot.
    let mut formed_at = vec![0f64; n];
    let mut active = ActiveSlots::new(n);
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut steps: Vec<(usize, usize, f64)> = Vec::with_capacity(n - 1);

    while steps.len() < n - 1 {
        if chain.is_empty() {
            chain.push(active.head);
        }
        let (a, b, d_ab) = loop {
            let a = chain[chain.len() - 1];
            let prev = (chain.len() >= 2).then(|| chain[chain.len() - 2]);
            // Ties prefer the previous chain element, then the smallest slot.
            let mut best = prev.map_or((END, f64::INFINITY), |p| (p, d.get(a, p)));
            for x in active.iter() {
                if x != a {
                    let dx = d.get(a, x);
                    if dx < best.1 {
                        best = (x, dx);
                    }
                }
            }
            if best.0 == END {
                return Err(Error::invalid("no finite nearest neighbour in linkage"));
            }
            if Some(best.0) == prev {
                break (a, best.0, best.1);
            }
            chain.push(best.0);
        };
        chain.truncate(chain.len() - 2);

        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let height = d_ab.max(formed_at[lo]).max(formed_at[hi]);
        steps.push((lo, hi, height));

        active.remove(hi);
        let (n_lo, n_hi) = (size[lo], size[hi]);
        let slots: Vec<usize> = active.iter().filter(|&x| x != lo).collect();
        for x in slots {
            let v = lance_williams_update(method, d.get(lo, x), d.get(hi, x), d_ab, n_lo, n_hi, size[x]);
            d.set(lo, x, v);
        }
        size[lo] = n_lo + n_hi;
        formed_at[lo] = height;
    }
    drop(d);
    relabel(n, steps)
}

/// Sorts raw slot-based steps by height and converts them to dendrogram ids.
pub(crate) fn relabel(n: usize, mut steps: Vec<(usize, usize, f64)>) -> Result<LinkageMatrix> {
    // Stable: equal-height steps keep discovery order, so children precede parents.
    steps.sort_by(|x, y| x.2.total_cmp(&y.2));
    let mut sets = crate::union_find::DisjointSets::new(n);
    let mut cluster_of_root: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(steps.len());
    for (t, &(a, b, h)) in steps.iter().enumerate() {
        let (ra, rb) = (sets.find(a), sets.find(b));
        let (ida, idb) = (cluster_of_root[ra], cluster_of_root[rb]);
        let size = sets.set_size(ra) + sets.set_size(rb);
        let root = sets
            .union(ra, rb)
            .ok_or_else(|| Error::invalid(format!("step {t} joins an already merged pair")))?;
        cluster_of_root[root] = n + t;
        merges.push(Merge {
            left: ida.min(idb),
            right: ida.max(idb),
            height: h,
            size,
        });
    }
    LinkageMatrix::new(n, merges)
}
