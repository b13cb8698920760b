//! Rooted trees as validated parent arrays.

use std::collections::VecDeque;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("parent array must contain exactly one root")]
    RootCount,
    #[error("parent pointers contain a cycle or unreachable vertex")]
    NotATree,
    #[error("expected {expected} edges on {n} vertices, got {got}")]
    EdgeCount { n: usize, expected: usize, got: usize },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
}

/// Rooted tree on vertices `0..n`, stored as `parent[v]` with `None` at the
/// root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    parent: Vec<Option<usize>>,
    root: usize,
}

impl RootedTree {
    /// Validates that `parent` encodes a single tree: one root, every vertex
    /// reaching it without cycles.
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self, TreeError> {
        let n = parent.len();
        let mut root = None;
        for (v, &p) in parent.iter().enumerate() {
            match p {
                None => {
                    if root.replace(v).is_some() {
                        return Err(TreeError::RootCount);
                    }
                }
                Some(p) if p >= n => return Err(TreeError::VertexOutOfRange(p)),
                _ => {}
            }
        }
        let root = root.ok_or(TreeError::RootCount)?;
        // walk each vertex to the root, marking resolved prefixes
        let mut state = vec![0u8; n]; // 0 unseen, 1 on current path, 2 resolved
        state[root] = 2;
        for start in 0..n {
            let mut path = Vec::new();
            let mut v = start;
            while state[v] == 0 {
                state[v] = 1;
                path.push(v);
                v = parent[v].expect("only the root has no parent");
            }
            if state[v] == 1 {
                return Err(TreeError::NotATree);
            }
            for w in path {
                state[w] = 2;
            }
        }
        Ok(RootedTree { parent, root })
    }

    /// Orients an undirected edge list away from `root` by breadth-first
    /// search. Requires exactly `n - 1` edges forming a connected graph.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], root: usize) -> Result<Self, TreeError> {
        if root >= n {
            return Err(TreeError::VertexOutOfRange(root));
        }
        if edges.len() != n.saturating_sub(1) {
            return Err(TreeError::EdgeCount {
                n,
                expected: n.saturating_sub(1),
                got: edges.len(),
            });
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(TreeError::VertexOutOfRange(u));
            }
            if v >= n {
                return Err(TreeError::VertexOutOfRange(v));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut visited = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    visited += 1;
                    queue.push_back(w);
                }
            }
        }
        if visited != n {
            return Err(TreeError::NotATree);
        }
        RootedTree::from_parents(parent)
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children_lists(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.n()];
        for (v, &p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                children[p].push(v);
            }
        }
        children
    }

    /// Distance from every vertex to the root.
    pub fn root_distances(&self) -> Vec<usize> {
        let n = self.n();
        let mut dist = vec![usize::MAX; n];
        dist[self.root] = 0;
        for start in 0..n {
            let mut path = Vec::new();
            let mut v = start;
            while dist[v] == usize::MAX {
                path.push(v);
                v = self.parent[v].expect("validated tree");
            }
            let mut d = dist[v];
            for &w in path.iter().rev() {
                d += 1;
                dist[w] = d;
            }
        }
        dist
    }

    /// Maximum root distance.
    pub fn height(&self) -> usize {
        self.root_distances().into_iter().max().unwrap_or(0)
    }

    /// Number of vertices in the subtree rooted at each vertex.
    pub fn subtree_sizes(&self) -> Vec<u64> {
        let mut sizes = vec![1u64; self.n()];
        let mut order: Vec<usize> = (0..self.n()).collect();
        let dist = self.root_distances();
        order.sort_by_key(|&v| std::cmp::Reverse(dist[v]));
        for v in order {
            if let Some(p) = self.parent[v] {
                sizes[p] += sizes[v];
            }
        }
        sizes
    }

    /// Undirected edges `(parent, child)` in vertex order of the child.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(v, &p)| p.map(|p| (p, v)))
            .collect()
    }

    /// The same tree re-rooted at `r`.
    pub fn reroot(&self, r: usize) -> Result<Self, TreeError> {
        RootedTree::from_edges(self.n(), &self.edges(), r)
    }

    /// Canonical encoding: 1-based parent per vertex, 0 at the root.
    pub fn parent_encoding(&self) -> Vec<usize> {
        self.parent.iter().map(|p| p.map_or(0, |p| p + 1)).collect()
    }

    /// Plain-text edge list: header `n=<n> root=<r>` (1-based root), one line
    /// `u v label` per edge where `u` is the parent, `v` the child, and
    /// `label` the position in `labels` (1-based edge order if `None`).
    pub fn edge_text(&self, labels: Option<&[usize]>) -> String {
        let mut out = format!("n={} root={}\n", self.n(), self.root + 1);
        for (i, (u, v)) in self.edges().into_iter().enumerate() {
            let label = labels.map_or(i + 1, |l| l[i]);
            writeln!(out, "{} {} {}", u + 1, v + 1, label).unwrap();
        }
        out
    }
}
