/// Disjoint sets over `0..n` with path halving and union by size.
///
/// Each set also tracks its smallest member so that callers get a
/// representative that does not depend on union order.
#[derive(Clone, Debug)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
    min_member: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
            min_member: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Internal root of `x`'s set.
    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            let grand = self.parent[self.parent[x]];
            self.parent[x] = grand;
            x = grand;
        }
        x
    }

    /// Smallest member of `x`'s set.
    pub fn representative(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.min_member[r]
    }

    pub fn set_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }

    /// Merges the sets of `a` and `b`; returns the new root, or `None` if
    /// they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] || (self.size[ra] == self.size[rb] && ra > rb) {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.min_member[ra] = self.min_member[ra].min(self.min_member[rb]);
        Some(ra)
    }

    /// Approximate heap footprint in bytes.
    pub fn heap_bytes(&self) -> usize {
        3 * self.parent.len() * std::mem::size_of::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_and_find() {
        let mut ds = DisjointSets::new(6);
        assert!(ds.union(4, 5).is_some());
        assert!(ds.union(5, 2).is_some());
        assert!(ds.union(2, 4).is_none());
        assert_eq!(ds.representative(5), 2);
        assert_eq!(ds.set_size(4), 3);
        assert_ne!(ds.find(0), ds.find(2));
        ds.union(0, 5);
        assert_eq!(ds.representative(4), 0);
        assert_eq!(ds.set_size(2), 4);
    }
}
