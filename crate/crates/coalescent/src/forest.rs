//! Labeled forest state tracked by a union-find structure.
//!
//! The forest always knows the number of components and the running value of
//! `sum_sq` = sum of squared component sizes, which a merge of components of
//! sizes `a` and `b` increases by exactly `2ab`. Merging two vertices that
//! already share a component is an error, never a silent no-op: callers that
//! tolerate cycle edges (the graph process) must test `same_component` first.
//!
//! Vertices are `0..n` internally; text exports are 1-based.

use num::{BigInt, BigRational};
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ForestError {
    #[error("vertex {vertex} out of range for forest on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertices {0} and {1} are in the same component")]
    SameComponent(usize, usize),
}

/// One merge event, recorded before the union is applied.
///
/// `step` is the 1-based index of the merge, `u`/`v` are the 0-based chosen
/// vertices, `size_a`/`size_b` the component sizes of `u`/`v` before the
/// merge, and `pre_sum_sq` the pre-merge sum of squared component sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MergeRecord {
    pub step: usize,
    pub u: usize,
    pub v: usize,
    pub size_a: u64,
    pub size_b: u64,
    pub pre_sum_sq: u64,
}

/// Union-find forest on `n` vertices with size tracking.
///
/// Union by size with path halving; `n` must fit in `u32` territory so that
/// `n^2` fits in `u64` (the largest simulations here use `n <= 1e6`).
#[derive(Debug, Clone)]
pub struct Forest {
    parent: Vec<usize>,
    size: Vec<u64>,
    sum_sq: u64,
    edges: Vec<(usize, usize)>,
    components: usize,
}

impl Forest {
    pub fn new(n: usize) -> Self {
        Forest {
            parent: (0..n).collect(),
            size: vec![1; n],
            sum_sq: n as u64,
            edges: Vec::new(),
            components: n,
        }
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Sum of squared component sizes.
    pub fn sum_sq(&self) -> u64 {
        self.sum_sq
    }

    /// Edges in addition order, 0-based endpoints as passed to `merge`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Representative of `v`'s component (path halving).
    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    pub fn same_component(&mut self, u: usize, v: usize) -> bool {
        self.find(u) == self.find(v)
    }

    pub fn component_size(&mut self, v: usize) -> u64 {
        let r = self.find(v);
        self.size[r]
    }

    /// Sizes of all components, in no particular order.
    pub fn component_sizes(&mut self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.components);
        for v in 0..self.n() {
            if self.parent[v] == v {
                out.push(self.size[v]);
            }
        }
        out
    }

    /// Merge the components of `u` and `v`.
    ///
    /// Errors if either vertex is out of range or both lie in the same
    /// component (including `u == v`).
    pub fn merge(&mut self, u: usize, v: usize) -> Result<MergeRecord, ForestError> {
        let n = self.n();
        if u >= n {
            return Err(ForestError::VertexOutOfRange { vertex: u, n });
        }
        if v >= n {
            return Err(ForestError::VertexOutOfRange { vertex: v, n });
        }
        let ru = self.find(u);
        let rv = self.find(v);
        if ru == rv {
            return Err(ForestError::SameComponent(u, v));
        }
        let size_a = self.size[ru];
        let size_b = self.size[rv];
        let record = MergeRecord {
            step: self.edges.len() + 1,
            u,
            v,
            size_a,
            size_b,
            pre_sum_sq: self.sum_sq,
        };
        let (big, small) = if size_a >= size_b { (ru, rv) } else { (rv, ru) };
        self.parent[small] = big;
        self.size[big] = size_a + size_b;
        self.sum_sq += 2 * size_a * size_b;
        self.components -= 1;
        self.edges.push((u, v));
        Ok(record)
    }

    /// Susceptibility numerator: `chi(F) = sum_sq / n`, this is `sum_sq`.
    pub fn susceptibility_numerator(&self) -> u64 {
        self.sum_sq
    }

    pub fn susceptibility(&self) -> f64 {
        self.sum_sq as f64 / self.n() as f64
    }

    pub fn susceptibility_exact(&self) -> BigRational {
        BigRational::new(BigInt::from(self.sum_sq), BigInt::from(self.n()))
    }

    /// Number of unordered cross-component vertex pairs: `(n^2 - sum_sq)/2`.
    pub fn mc_choice_count(&self) -> u64 {
        let n = self.n() as u64;
        (n * n - self.sum_sq) / 2
    }

    /// Plain-text edge list: header `n=<n> root=none`, then one line
    /// `u v label` per edge with 1-based endpoints and the 1-based step as
    /// label.
    pub fn edge_text(&self) -> String {
        let mut out = format!("n={} root=none\n", self.n());
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            writeln!(out, "{} {} {}", u + 1, v + 1, i + 1).unwrap();
        }
        out
    }
}
