//! Samplers for the three coalescent kernels and the traces they produce.
//!
//! Each kernel runs in three modes. `run_uniform` picks every merge uniformly
//! from the kernel's admissible set: the Kingman walk merges an ordered pair
//! of distinct roots, the additive walk attaches the root of one tree beneath
//! an arbitrary vertex of another, and the multiplicative walk joins a uniform
//! cross-component vertex pair. `run_weight_driven` replays the deterministic
//! greedy walk on a fixed set of distinct edge weights (for the multiplicative
//! kernel this is Kruskal's algorithm on the weighted complete graph), and
//! `run_rate_driven` picks each merge with probability proportional to its
//! edge rate among the admissible moves.
//!
//! A finished run is a [`MergeTrace`]: the ordered list of merge records plus,
//! for the rooted kernels, the root of the merged tree after every step. The
//! trace is enough to replay the whole forest history, rebuild the final
//! rooted tree, and evaluate the running product of cross-component pair
//! counts that [`empirical_log_partition`] turns into the empirical
//! log-partition value of the multiplicative walk.

use crate::er;
use crate::forest::{Forest, ForestError, MergeRecord};
use crate::kernel::KernelKind;
use crate::tree::RootedTree;
use num::{BigRational, BigUint, One};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("kernel {got:?} not accepted: {context}")]
    KernelMismatch {
        got: KernelKind,
        context: &'static str,
    },
    #[error("k={k} out of range 1..=n for n={n}")]
    BadK { k: usize, n: usize },
    #[error("trace has {have} records, {need} required")]
    ShortTrace { have: usize, need: usize },
    #[error("trace is not a complete coalescence: {components} components remain")]
    Incomplete { components: usize },
    #[error("expected {expected} edge values, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("edge weights must be pairwise distinct")]
    DuplicateWeights,
    #[error("edge values must be finite (and non-negative for rates)")]
    BadWeight,
    #[error("no admissible move has positive rate")]
    ZeroAdmissibleRate,
    #[error("inconsistent trace: {0}")]
    InvalidTrace(String),
    #[error(transparent)]
    Forest(#[from] ForestError),
}

/// One full (or truncated) run of a coalescent: the merge records in order
/// plus, for the rooted kernels, the root of each newly merged tree.
///
/// Record conventions: `u` and `v` are 0-based vertices. For the rooted
/// kernels the merge attaches `v` (a root) beneath `u`, so the final tree has
/// `parent[v] = u`; for the multiplicative kernel `(u, v)` is an undirected
/// edge with `u < v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeTrace {
    pub n: usize,
    pub kernel: KernelKind,
    pub records: Vec<MergeRecord>,
    /// Root of the merged tree after each step; `None` for the unrooted kernel.
    pub roots_history: Option<Vec<usize>>,
}

impl MergeTrace {
    pub fn merges(&self) -> usize {
        self.records.len()
    }

    /// True when all n-1 merges are present.
    pub fn is_complete(&self) -> bool {
        self.records.len() + 1 == self.n
    }

    /// Re-applies every record to a fresh forest, checking step numbers,
    /// component sizes, and the running sum of squared sizes against the
    /// recorded values. Returns the final forest.
    pub fn replay(&self) -> Result<Forest, EngineError> {
        let mut f = Forest::new(self.n);
        for (i, r) in self.records.iter().enumerate() {
            if r.step != i + 1 {
                return Err(EngineError::InvalidTrace(format!(
                    "record {} carries step {}",
                    i + 1,
                    r.step
                )));
            }
            if r.pre_sum_sq != f.sum_sq() {
                return Err(EngineError::InvalidTrace(format!(
                    "step {}: recorded sum of squares {} but forest has {}",
                    r.step,
                    r.pre_sum_sq,
                    f.sum_sq()
                )));
            }
            let applied = f.merge(r.u, r.v)?;
            if applied.size_a != r.size_a || applied.size_b != r.size_b {
                return Err(EngineError::InvalidTrace(format!(
                    "step {}: recorded sizes ({}, {}) but forest merged ({}, {})",
                    r.step, r.size_a, r.size_b, applied.size_a, applied.size_b
                )));
            }
        }
        Ok(f)
    }

    /// Final rooted tree of a complete run of a rooted kernel, using the
    /// `parent[v] = u` convention of the records.
    pub fn rooted_tree(&self) -> Result<RootedTree, EngineError> {
        if !self.kernel.is_rooted() {
            return Err(EngineError::KernelMismatch {
                got: self.kernel,
                context: "only the rooted kernels orient their merges",
            });
        }
        if !self.is_complete() {
            return Err(EngineError::Incomplete {
                components: self.n - self.records.len(),
            });
        }
        let mut parent: Vec<Option<usize>> = vec![None; self.n];
        for r in &self.records {
            if parent[r.v].is_some() {
                return Err(EngineError::InvalidTrace(format!(
                    "vertex {} attached twice",
                    r.v
                )));
            }
            parent[r.v] = Some(r.u);
        }
        RootedTree::from_parents(parent).map_err(|e| EngineError::InvalidTrace(e.to_string()))
    }

    /// Final tree of a complete run, rooted at an arbitrary vertex. This is
    /// the natural reading for the multiplicative kernel, whose merges are
    /// unoriented edges.
    pub fn tree_rooted_at(&self, root: usize) -> Result<RootedTree, EngineError> {
        if !self.is_complete() {
            return Err(EngineError::Incomplete {
                components: self.n - self.records.len(),
            });
        }
        let edges: Vec<(usize, usize)> = self.records.iter().map(|r| (r.u, r.v)).collect();
        RootedTree::from_edges(self.n, &edges, root)
            .map_err(|e| EngineError::InvalidTrace(e.to_string()))
    }

    /// The first k-1 merges as a trace in their own right.
    pub fn truncated(&self, k: usize) -> Result<MergeTrace, EngineError> {
        if k < 1 || k > self.n {
            return Err(EngineError::BadK { k, n: self.n });
        }
        if self.records.len() < k - 1 {
            return Err(EngineError::ShortTrace {
                have: self.records.len(),
                need: k - 1,
            });
        }
        Ok(MergeTrace {
            n: self.n,
            kernel: self.kernel,
            records: self.records[..k - 1].to_vec(),
            roots_history: self
                .roots_history
                .as_ref()
                .map(|h| h[..k - 1].to_vec()),
        })
    }

    /// CSV export with 1-based vertices, one row per merge.
    pub fn csv(&self) -> String {
        let mut out = String::from("step,u,v,size_a,size_b,pre_sum_sq\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.step,
                r.u + 1,
                r.v + 1,
                r.size_a,
                r.size_b,
                r.pre_sum_sq
            ));
        }
        out
    }
}

/// The empirical log-partition value of a multiplicative run: the log of the
/// product, over the first k-1 merges, of the number of cross-component
/// vertex pairs (n^2 minus the pre-merge sum of squared component sizes,
/// halved once per factor in `log_z`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalLogPartition {
    pub n: usize,
    pub k: usize,
    /// Sum of ln(n^2 - S_i) over the first k-1 merges.
    pub log_z_arrow: f64,
    /// `log_z_arrow - (k-1) ln 2`, the log of the product of unordered
    /// cross-pair counts.
    pub log_z: f64,
}

// ---------------------------------------------------------------------------
// Version 1: uniform choice over the admissible set.
// ---------------------------------------------------------------------------

/// Runs a full coalescent with every merge chosen uniformly from the kernel's
/// admissible set.
pub fn run_uniform<R: Rng>(kernel: KernelKind, n: usize, rng: &mut R) -> MergeTrace {
    match kernel {
        KernelKind::Kingman => run_uniform_kingman(n, rng),
        KernelKind::Additive => run_uniform_additive(n, rng),
        KernelKind::Multiplicative => run_uniform_multiplicative(n, rng),
    }
}

// Live roots with O(1) membership, removal, and uniform sampling.
struct RootSet {
    roots: Vec<usize>,
    pos: Vec<usize>,
}

impl RootSet {
    fn new(n: usize) -> Self {
        RootSet {
            roots: (0..n).collect(),
            pos: (0..n).collect(),
        }
    }

    fn len(&self) -> usize {
        self.roots.len()
    }

    fn get(&self, i: usize) -> usize {
        self.roots[i]
    }

    fn remove(&mut self, v: usize) {
        let i = self.pos[v];
        self.roots.swap_remove(i);
        self.pos[v] = usize::MAX;
        if i < self.roots.len() {
            self.pos[self.roots[i]] = i;
        }
    }
}

fn run_uniform_kingman<R: Rng>(n: usize, rng: &mut R) -> MergeTrace {
    let mut f = Forest::new(n);
    let mut roots = RootSet::new(n);
    let mut records = Vec::with_capacity(n.saturating_sub(1));
    let mut history = Vec::with_capacity(n.saturating_sub(1));
    for step in 1..n {
        // Ordered pair of distinct roots: (n+1-step)(n-step) choices.
        debug_assert_eq!(roots.len(), n + 1 - step);
        let iu = rng.gen_range(0..roots.len());
        let mut iv = rng.gen_range(0..roots.len() - 1);
        if iv >= iu {
            iv += 1;
        }
        let (u, v) = (roots.get(iu), roots.get(iv));
        records.push(f.merge(u, v).expect("distinct roots lie in distinct trees"));
        roots.remove(v);
        history.push(u);
    }
    MergeTrace {
        n,
        kernel: KernelKind::Kingman,
        records,
        roots_history: Some(history),
    }
}

fn run_uniform_additive<R: Rng>(n: usize, rng: &mut R) -> MergeTrace {
    let mut f = Forest::new(n);
    let mut roots = RootSet::new(n);
    // Tree root per component, stored at the union-find representative.
    let mut croot: Vec<usize> = (0..n).collect();
    let mut records = Vec::with_capacity(n.saturating_sub(1));
    let mut history = Vec::with_capacity(n.saturating_sub(1));
    for _ in 1..n {
        // (u, v): any vertex u, root v of another tree. Rejecting same-tree
        // draws leaves the pair uniform over the n * (roots - 1) admissible
        // choices, with acceptance >= 1/2 while two or more trees remain.
        let (u, v) = loop {
            let u = rng.gen_range(0..n);
            let v = roots.get(rng.gen_range(0..roots.len()));
            if !f.same_component(u, v) {
                break (u, v);
            }
        };
        let ra = croot[f.find(u)];
        records.push(f.merge(u, v).expect("cross component"));
        croot[f.find(u)] = ra;
        roots.remove(v);
        history.push(ra);
    }
    MergeTrace {
        n,
        kernel: KernelKind::Additive,
        records,
        roots_history: Some(history),
    }
}

// Component member lists for the late phase of the multiplicative sampler.
struct McLists {
    members: Vec<Vec<usize>>,
    comps: Vec<usize>,
    comp_pos: Vec<usize>,
}

impl McLists {
    fn build(f: &mut Forest) -> Self {
        let n = f.n();
        let mut members = vec![Vec::new(); n];
        for v in 0..n {
            let r = f.find(v);
            members[r].push(v);
        }
        let mut comps = Vec::new();
        let mut comp_pos = vec![usize::MAX; n];
        for (r, m) in members.iter().enumerate() {
            if !m.is_empty() {
                comp_pos[r] = comps.len();
                comps.push(r);
            }
        }
        McLists {
            members,
            comps,
            comp_pos,
        }
    }

    // Exact two-stage draw: component A with probability |A|(n-|A|)/cross2,
    // then a uniform vertex outside A, then a uniform vertex of A. Every
    // ordered cross pair comes out with probability 1/cross2.
    fn sample_cross_pair<R: Rng>(&self, f: &mut Forest, cross2: u64, rng: &mut R) -> (usize, usize) {
        let n = f.n() as u64;
        let mut t = rng.gen_range(0..cross2);
        let mut a = usize::MAX;
        for &r in &self.comps {
            let s = f.component_size(r);
            let w = s * (n - s);
            if t < w {
                a = r;
                break;
            }
            t -= w;
        }
        debug_assert_ne!(a, usize::MAX);
        let sa = f.component_size(a);
        let mut idx = rng.gen_range(0..n - sa);
        let mut b = usize::MAX;
        for &r in &self.comps {
            if r == a {
                continue;
            }
            let s = f.component_size(r);
            if idx < s {
                b = r;
                break;
            }
            idx -= s;
        }
        debug_assert_ne!(b, usize::MAX);
        let va = self.members[a][rng.gen_range(0..self.members[a].len())];
        let vb = self.members[b][idx as usize];
        (va, vb)
    }

    fn absorb(&mut self, new_rep: usize, ru: usize, rv: usize) {
        let dead = if new_rep == ru { rv } else { ru };
        let mut dead_vec = std::mem::take(&mut self.members[dead]);
        // Fold the smaller list into the larger: O(n log n) moves overall.
        if dead_vec.len() > self.members[new_rep].len() {
            std::mem::swap(&mut dead_vec, &mut self.members[new_rep]);
        }
        self.members[new_rep].extend(dead_vec);
        let i = self.comp_pos[dead];
        self.comps.swap_remove(i);
        self.comp_pos[dead] = usize::MAX;
        if i < self.comps.len() {
            self.comp_pos[self.comps[i]] = i;
        }
    }
}

fn run_uniform_multiplicative<R: Rng>(n: usize, rng: &mut R) -> MergeTrace {
    let mut f = Forest::new(n);
    let mut records = Vec::with_capacity(n.saturating_sub(1));
    let n2 = (n as u64) * (n as u64);
    let mut lists: Option<McLists> = None;
    for _ in 1..n {
        let cross2 = n2 - f.sum_sq(); // twice the admissible pair count
        let (x, y) = if lists.is_none() && 2 * cross2 >= n2 {
            // Early phase: uniform ordered pair of distinct vertices,
            // rejected while both lie in one tree. Acceptance here is
            // cross2 / (n^2 - n) > 1/2.
            loop {
                let x = rng.gen_range(0..n);
                let mut y = rng.gen_range(0..n - 1);
                if y >= x {
                    y += 1;
                }
                if !f.same_component(x, y) {
                    break (x, y);
                }
            }
        } else {
            let l = lists.get_or_insert_with(|| McLists::build(&mut f));
            l.sample_cross_pair(&mut f, cross2, rng)
        };
        let (ru, rv) = (f.find(x), f.find(y));
        records.push(
            f.merge(x.min(y), x.max(y))
                .expect("cross component"),
        );
        if let Some(l) = lists.as_mut() {
            l.absorb(f.find(x), ru, rv);
        }
    }
    MergeTrace {
        n,
        kernel: KernelKind::Multiplicative,
        records,
        roots_history: None,
    }
}

// ---------------------------------------------------------------------------
// Edge slot layouts shared by the weight- and rate-driven modes.
// ---------------------------------------------------------------------------

/// Number of ordered-pair slots used by the rooted kernels.
pub fn directed_slot_count(n: usize) -> usize {
    n * n.saturating_sub(1)
}

/// Slot of the ordered pair (u, v), u != v: "attach root v beneath vertex u".
pub fn directed_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u != v && u < n && v < n);
    u * (n - 1) + v - (v > u) as usize
}

/// Inverse of [`directed_index`].
pub fn directed_pair(n: usize, slot: usize) -> (usize, usize) {
    let u = slot / (n - 1);
    let r = slot % (n - 1);
    (u, r + (r >= u) as usize)
}

/// Number of edge value slots a kernel expects for n vertices: ordered pairs
/// for the rooted kernels, unordered pairs for the multiplicative one.
pub fn slot_count(kernel: KernelKind, n: usize) -> usize {
    match kernel {
        KernelKind::Multiplicative => er::pair_count(n) as usize,
        _ => directed_slot_count(n),
    }
}

fn slot_pair(kernel: KernelKind, n: usize, slot: usize) -> (usize, usize) {
    match kernel {
        KernelKind::Multiplicative => er::index_to_pair(n, slot as u64),
        _ => directed_pair(n, slot),
    }
}

// ---------------------------------------------------------------------------
// Version 2: greedy walk on fixed distinct weights.
// ---------------------------------------------------------------------------

/// Runs the whole coalescent by repeatedly applying the admissible move of
/// smallest weight. `weights` is indexed by [`directed_index`] for the rooted
/// kernels and by the unordered-pair slot order for the multiplicative one
/// (for which this is exactly Kruskal's algorithm, so the accepted edges form
/// the minimum spanning tree of the weighted complete graph).
pub fn run_weight_driven(
    kernel: KernelKind,
    n: usize,
    weights: &[f64],
) -> Result<MergeTrace, EngineError> {
    let m = slot_count(kernel, n);
    if weights.len() != m {
        return Err(EngineError::WeightCount {
            expected: m,
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(EngineError::BadWeight);
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_unstable_by(|&a, &b| weights[a].total_cmp(&weights[b]));
    if order.windows(2).any(|w| weights[w[0]] == weights[w[1]]) {
        return Err(EngineError::DuplicateWeights);
    }

    let mut f = Forest::new(n);
    let mut is_root = vec![true; n];
    let mut croot: Vec<usize> = (0..n).collect();
    let mut records = Vec::with_capacity(n.saturating_sub(1));
    let mut history = Vec::with_capacity(n.saturating_sub(1));
    // Admissibility only ever decays (roots stop being roots, separate trees
    // become one tree), so a slot skipped once is dead forever and a single
    // pass over the sorted slots visits each at most once.
    let mut cursor = order.into_iter();
    while f.components() > 1 {
        let (u, v) = loop {
            let slot = cursor
                .next()
                .expect("distinct weights always complete the coalescent");
            let (u, v) = slot_pair(kernel, n, slot);
            if admissible(kernel, &mut f, &is_root, u, v) {
                break (u, v);
            }
        };
        apply_merge(kernel, &mut f, &mut is_root, &mut croot, u, v, &mut records, &mut history)?;
    }
    Ok(MergeTrace {
        n,
        kernel,
        records,
        roots_history: kernel.is_rooted().then_some(history),
    })
}

fn admissible(kernel: KernelKind, f: &mut Forest, is_root: &[bool], u: usize, v: usize) -> bool {
    match kernel {
        KernelKind::Kingman => is_root[u] && is_root[v] && !f.same_component(u, v),
        KernelKind::Additive => is_root[v] && !f.same_component(u, v),
        KernelKind::Multiplicative => !f.same_component(u, v),
    }
}

#[allow(clippy::too_many_arguments)]
fn apply_merge(
    kernel: KernelKind,
    f: &mut Forest,
    is_root: &mut [bool],
    croot: &mut [usize],
    u: usize,
    v: usize,
    records: &mut Vec<MergeRecord>,
    history: &mut Vec<usize>,
) -> Result<(), EngineError> {
    if kernel.is_rooted() {
        let ra = croot[f.find(u)];
        records.push(f.merge(u, v)?);
        croot[f.find(u)] = ra;
        is_root[v] = false;
        history.push(ra);
    } else {
        records.push(f.merge(u.min(v), u.max(v))?);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Version 3: per-step choice proportional to edge rates.
// ---------------------------------------------------------------------------

/// Runs the whole coalescent with each merge drawn with probability
/// proportional to its rate among the currently admissible moves. Rates use
/// the same slot layout as [`run_weight_driven`]. This mode recomputes the
/// admissible set every step, so it is quadratic per merge and meant for
/// small n.
pub fn run_rate_driven<R: Rng>(
    kernel: KernelKind,
    n: usize,
    rates: &[f64],
    rng: &mut R,
) -> Result<MergeTrace, EngineError> {
    let m = slot_count(kernel, n);
    if rates.len() != m {
        return Err(EngineError::WeightCount {
            expected: m,
            got: rates.len(),
        });
    }
    if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(EngineError::BadWeight);
    }

    let mut f = Forest::new(n);
    let mut is_root = vec![true; n];
    let mut croot: Vec<usize> = (0..n).collect();
    let mut records = Vec::with_capacity(n.saturating_sub(1));
    let mut history = Vec::with_capacity(n.saturating_sub(1));
    while f.components() > 1 {
        let mut total = 0.0;
        for slot in 0..m {
            let (u, v) = slot_pair(kernel, n, slot);
            if rates[slot] > 0.0 && admissible(kernel, &mut f, &is_root, u, v) {
                total += rates[slot];
            }
        }
        if total <= 0.0 {
            return Err(EngineError::ZeroAdmissibleRate);
        }
        let target = rng.gen::<f64>() * total;
        let mut cum = 0.0;
        let mut chosen = None;
        for slot in 0..m {
            let (u, v) = slot_pair(kernel, n, slot);
            if rates[slot] <= 0.0 || !admissible(kernel, &mut f, &is_root, u, v) {
                continue;
            }
            cum += rates[slot];
            chosen = Some((u, v)); // keeps the last admissible slot as a rounding fallback
            if target < cum {
                break;
            }
        }
        let (u, v) = chosen.expect("positive total rate implies an admissible slot");
        apply_merge(kernel, &mut f, &mut is_root, &mut croot, u, v, &mut records, &mut history)?;
    }
    Ok(MergeTrace {
        n,
        kernel,
        records,
        roots_history: kernel.is_rooted().then_some(history),
    })
}

// ---------------------------------------------------------------------------
// Empirical partition values.
// ---------------------------------------------------------------------------

/// Log of the running product of cross-pair counts over the first k-1 merges
/// of a multiplicative trace. Each factor n^2 - S_i is an exact integer that
/// fits in an f64 mantissa for n below 9.4e7, so every summand is a correctly
/// rounded logarithm.
pub fn empirical_log_partition(
    trace: &MergeTrace,
    k: usize,
) -> Result<EmpiricalLogPartition, EngineError> {
    check_empirical_args(trace, k)?;
    let n2 = (trace.n as u64) * (trace.n as u64);
    let log_z_arrow: f64 = trace.records[..k - 1]
        .iter()
        .map(|r| ((n2 - r.pre_sum_sq) as f64).ln())
        .sum();
    let log_z = log_z_arrow - (k as f64 - 1.0) * std::f64::consts::LN_2;
    Ok(EmpiricalLogPartition {
        n: trace.n,
        k,
        log_z_arrow,
        log_z,
    })
}

/// Exact rational value of the empirical partition product, for cross-checking
/// the logarithmic form at small n.
pub fn empirical_partition_exact(trace: &MergeTrace, k: usize) -> Result<BigRational, EngineError> {
    check_empirical_args(trace, k)?;
    let n2 = (trace.n as u64) * (trace.n as u64);
    let mut prod = BigUint::one();
    for r in &trace.records[..k - 1] {
        prod *= BigUint::from(n2 - r.pre_sum_sq);
    }
    let denom = BigUint::one() << (k - 1);
    Ok(BigRational::new(prod.into(), denom.into()))
}

fn check_empirical_args(trace: &MergeTrace, k: usize) -> Result<(), EngineError> {
    if trace.kernel != KernelKind::Multiplicative {
        return Err(EngineError::KernelMismatch {
            got: trace.kernel,
            context: "the empirical partition value is specific to the multiplicative kernel",
        });
    }
    if k < 1 || k > trace.n {
        return Err(EngineError::BadK { k, n: trace.n });
    }
    if trace.records.len() < k - 1 {
        return Err(EngineError::ShortTrace {
            have: trace.records.len(),
            need: k - 1,
        });
    }
    Ok(())
}

/// The additive analogue of the empirical partition product is the same for
/// every realization: the admissible count before merge i is n(n - i), so the
/// product over k-1 merges is n^(k-1) (n-1)(n-2)...(n-k+1). Recomputes the
/// per-step counts by replaying the trace and compares with the closed form.
pub fn additive_empirical_constant_check(trace: &MergeTrace) -> Result<bool, EngineError> {
    if trace.kernel != KernelKind::Additive {
        return Err(EngineError::KernelMismatch {
            got: trace.kernel,
            context: "the constant empirical product is specific to the additive kernel",
        });
    }
    let n = trace.n as u64;
    let mut f = Forest::new(trace.n);
    let mut product = BigUint::one();
    for r in &trace.records {
        let choices = n * (f.components() as u64 - 1);
        product *= BigUint::from(choices);
        if r.pre_sum_sq != f.sum_sq() {
            return Err(EngineError::InvalidTrace(format!(
                "step {}: recorded sum of squares {} but forest has {}",
                r.step,
                r.pre_sum_sq,
                f.sum_sq()
            )));
        }
        f.merge(r.u, r.v)?;
    }
    let k = trace.records.len() as u64 + 1;
    let mut closed = BigUint::one();
    for j in 1..k {
        closed *= BigUint::from(n);
        closed *= BigUint::from(n - j);
    }
    Ok(product == closed)
}
