//! Weighted sampling of attachment targets by in-degree class.
//!
//! Nodes are grouped by current in-degree `k`. Class `k` carries weight
//! `w(k) = n(k)·A(k)`, kept in a Fenwick tree over `k`, so drawing a class
//! and moving a node between classes both cost `O(log K)`. A node is then
//! drawn uniformly from the chosen class.

use rand::Rng;

use crate::netsim::AttachmentFunction;
use crate::rng;
use crate::timeline::NodeId;
use crate::Real;

/// Binary indexed tree over non-negative weights.
#[derive(Debug, Clone)]
pub struct FenwickTree<F> {
    // 1-based; tree[0] unused. Length is a power of two plus one.
    tree: Vec<F>,
}

impl<F: Real> FenwickTree<F> {
    pub fn with_capacity(capacity: usize) -> Self {
        let cap = capacity.max(1).next_power_of_two();
        Self {
            tree: vec![F::zero(); cap + 1],
        }
    }

    pub fn from_weights(weights: &[F]) -> Self {
        let mut t = Self::with_capacity(weights.len());
        for (i, &w) in weights.iter().enumerate() {
            t.tree[i + 1] = w;
        }
        let n = t.capacity();
        for i in 1..=n {
            let j = i + lsb(i);
            if j <= n {
                let v = t.tree[i];
                t.tree[j] = t.tree[j] + v;
            }
        }
        t
    }

    pub fn capacity(&self) -> usize {
        self.tree.len() - 1
    }

    pub fn add(&mut self, index: usize, delta: F) {
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] = self.tree[i] + delta;
            i += lsb(i);
        }
    }

    /// Sum of weights `0..=index`.
    pub fn prefix_sum(&self, index: usize) -> F {
        let mut i = (index + 1).min(self.capacity());
        let mut s = F::zero();
        while i > 0 {
            s = s + self.tree[i];
            i -= lsb(i);
        }
        s
    }

    pub fn total(&self) -> F {
        self.prefix_sum(self.capacity() - 1)
    }

    pub fn weight(&self, index: usize) -> F {
        if index == 0 {
            self.prefix_sum(0)
        } else {
            self.prefix_sum(index) - self.prefix_sum(index - 1)
        }
    }

    /// Smallest index whose prefix sum exceeds `target`.
    pub fn search(&self, mut target: F) -> usize {
        let n = self.capacity();
        let mut pos = 0;
        let mut step = n;
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target = target - self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

#[inline]
fn lsb(i: usize) -> usize {
    i & i.wrapping_neg()
}

/// Degree-class decomposition of the attachment distribution `π(k) ∝ n(k)·A(k)`.
#[derive(Debug, Clone)]
pub struct DegreeClassSampler<F> {
    attachment: AttachmentFunction<F>,
    a: Vec<F>,
    counts: Vec<u64>,
    members: Vec<Vec<NodeId>>,
    degree: Vec<u32>,
    slot: Vec<u32>,
    weights: FenwickTree<F>,
    total: F,
}

impl<F: Real> DegreeClassSampler<F> {
    pub fn new(attachment: AttachmentFunction<F>) -> Self {
        Self {
            attachment,
            a: Vec::new(),
            counts: Vec::new(),
            members: Vec::new(),
            degree: Vec::new(),
            slot: Vec::new(),
            weights: FenwickTree::with_capacity(16),
            total: F::zero(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.degree.len()
    }

    pub fn degree(&self, node: NodeId) -> u64 {
        self.degree[node as usize] as u64
    }

    /// `n(k)` for every class seen so far.
    pub fn class_counts(&self) -> &[u64] {
        &self.counts
    }

    /// Incrementally maintained `S = Σ_k n(k)·A(k)`.
    pub fn total_weight(&self) -> F {
        self.total
    }

    /// Class weight as stored in the tree.
    pub fn class_weight(&self, k: u64) -> F {
        if (k as usize) < self.weights.capacity() {
            self.weights.weight(k as usize)
        } else {
            F::zero()
        }
    }

    /// `S` recomputed from the class counts.
    pub fn recomputed_total(&self) -> F {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &n)| F::from_count(n) * self.attachment.eval(k as u64))
            .sum()
    }

    pub fn members(&self, k: u64) -> &[NodeId] {
        self.members.get(k as usize).map_or(&[], Vec::as_slice)
    }

    fn ensure_class(&mut self, k: usize) {
        while self.a.len() <= k {
            let next = self.a.len() as u64;
            self.a.push(self.attachment.eval(next));
            self.counts.push(0);
            self.members.push(Vec::new());
        }
        if k >= self.weights.capacity() {
            let mut w: Vec<F> = self
                .counts
                .iter()
                .zip(&self.a)
                .map(|(&n, &a)| F::from_count(n) * a)
                .collect();
            w.resize(((k + 1) * 2).next_power_of_two(), F::zero());
            self.weights = FenwickTree::from_weights(&w);
        }
    }

    fn insert(&mut self, node: NodeId, k: usize) {
        self.ensure_class(k);
        self.slot[node as usize] = self.members[k].len() as u32;
        self.members[k].push(node);
        self.counts[k] += 1;
        self.degree[node as usize] = k as u32;
        let a = self.a[k];
        self.weights.add(k, a);
        self.total = self.total + a;
    }

    fn remove(&mut self, node: NodeId) -> usize {
        let k = self.degree[node as usize] as usize;
        let s = self.slot[node as usize] as usize;
        let list = &mut self.members[k];
        list.swap_remove(s);
        if let Some(&moved) = list.get(s) {
            self.slot[moved as usize] = s as u32;
        }
        self.counts[k] -= 1;
        let a = self.a[k];
        self.weights.add(k, F::zero() - a);
        self.total = self.total - a;
        k
    }

    /// Adds the next node id with the given in-degree.
    pub fn push_node(&mut self, in_degree: u64) -> NodeId {
        let id = self.degree.len() as NodeId;
        self.degree.push(0);
        self.slot.push(0);
        self.insert(id, in_degree as usize);
        id
    }

    /// Raises a node's in-degree by one.
    pub fn increment(&mut self, node: NodeId) {
        let k = self.remove(node);
        self.insert(node, k + 1);
    }

    /// Draws a node with probability proportional to `A(k_node)`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Option<NodeId> {
        if self.degree.is_empty() {
            return None;
        }
        let total = self.weights.total();
        loop {
            let u = F::lit(rng.random::<f64>()) * total;
            let k = self.weights.search(u);
            // Rounding can leave residual weight on an empty class.
            if let Some(list) = self.members.get(k).filter(|l| !l.is_empty()) {
                return Some(list[rng::index(rng, list.len())]);
            }
        }
    }
}
