//! The random graph process on [n]: edges of the complete graph arrive in a
//! uniformly random order, components merge, and the component-joining edges
//! form a multiplicative coalescent run. Also: G(n, p) sampling by geometric
//! skipping, the re-seeded depth-first exploration, and exact susceptibility
//! identities.

use crate::engine::MergeTrace;
use crate::forest::{Forest, MergeRecord};
use crate::kernel::KernelKind;
use crate::stats;
use num::{BigInt, BigRational, One};
use rand::Rng;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ErError {
    #[error("graph process ended before connectivity")]
    Truncated,
    #[error("operation needs per-step records (record_every = 1)")]
    NeedsFullRecords,
}

// ---------------------------------------------------------------------------
// Unordered-pair slots: the C(n,2) edges of K_n in lexicographic order.
// ---------------------------------------------------------------------------

/// Number of unordered vertex pairs on n vertices.
pub fn pair_count(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Lexicographic slot of the pair (u, v), u < v.
pub fn pair_to_index(n: usize, u: usize, v: usize) -> u64 {
    debug_assert!(u < v && v < n);
    let (n, u, v) = (n as u64, u as u64, v as u64);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

/// Inverse of [`pair_to_index`].
pub fn index_to_pair(n: usize, t: u64) -> (usize, usize) {
    debug_assert!(t < pair_count(n));
    let nf = n as f64;
    // Solve u(2n-u-1)/2 <= t by the quadratic formula, then fix rounding.
    let disc = (2.0 * nf - 1.0) * (2.0 * nf - 1.0) - 8.0 * t as f64;
    let mut u = ((2.0 * nf - 1.0 - disc.max(0.0).sqrt()) / 2.0).floor() as i64;
    u = u.clamp(0, n as i64 - 2);
    let offset = |u: u64| u * (2 * n as u64 - u - 1) / 2;
    let mut u = u as u64;
    while u + 2 <= n as u64 && offset(u + 1) <= t {
        u += 1;
    }
    while u > 0 && offset(u) > t {
        u -= 1;
    }
    let v = u + 1 + (t - offset(u));
    (u as usize, v as usize)
}

// ---------------------------------------------------------------------------
// Lazy uniform permutation of the edge slots.
// ---------------------------------------------------------------------------

/// Slot count up to which the Fisher-Yates state is a dense vector rather
/// than a hash map of displaced entries.
pub const DENSE_SLOT_LIMIT: u64 = 1 << 22;

enum Slots {
    Dense(Vec<u64>),
    Sparse(HashMap<u64, u64>),
}

impl Slots {
    fn get(&self, i: u64) -> u64 {
        match self {
            Slots::Dense(v) => v[i as usize],
            Slots::Sparse(m) => *m.get(&i).unwrap_or(&i),
        }
    }

    fn set(&mut self, i: u64, val: u64) {
        match self {
            Slots::Dense(v) => v[i as usize] = val,
            Slots::Sparse(m) => {
                m.insert(i, val);
            }
        }
    }

    fn forget(&mut self, i: u64) {
        if let Slots::Sparse(m) = self {
            m.remove(&i);
        }
    }
}

/// A uniformly random permutation of the C(n,2) edges, generated on demand by
/// a virtual Fisher-Yates shuffle. Both storage modes consume the random
/// stream identically, so runs are reproducible regardless of n.
pub struct EdgePermutation {
    n: usize,
    total: u64,
    next: u64,
    slots: Slots,
}

impl EdgePermutation {
    pub fn new(n: usize) -> Self {
        Self::with_storage(n, pair_count(n) <= DENSE_SLOT_LIMIT)
    }

    fn with_storage(n: usize, dense: bool) -> Self {
        let total = pair_count(n);
        let slots = if dense {
            Slots::Dense((0..total).collect())
        } else {
            Slots::Sparse(HashMap::new())
        };
        EdgePermutation {
            n,
            total,
            next: 0,
            slots,
        }
    }

    pub fn remaining(&self) -> u64 {
        self.total - self.next
    }

    /// Draws the next edge of the permutation, or None once exhausted.
    pub fn next_edge<R: Rng>(&mut self, rng: &mut R) -> Option<(usize, usize)> {
        if self.next == self.total {
            return None;
        }
        let i = self.next;
        self.next += 1;
        let j = rng.gen_range(i..self.total);
        let vj = self.slots.get(j);
        let vi = self.slots.get(i);
        self.slots.set(j, vi);
        self.slots.forget(i);
        Some(index_to_pair(self.n, vj))
    }
}

// ---------------------------------------------------------------------------
// The graph process and its coupled multiplicative coalescent.
// ---------------------------------------------------------------------------

/// Snapshot after the m-th edge: the count tau of component-joining edges so
/// far, the susceptibility numerator (sum of squared component sizes), and
/// the two largest component sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepStat {
    pub m: u64,
    pub tau: usize,
    pub chi_num: u64,
    pub l: u64,
    pub s: u64,
    pub joined: bool,
}

/// One run of the edge-arrival process.
#[derive(Debug, Clone)]
pub struct GraphProcessRun {
    pub n: usize,
    /// Edges actually examined (may stop early at connectivity).
    pub m_examined: u64,
    pub record_every: u64,
    /// Thinned per-edge statistics; joining edges and the final edge are
    /// always recorded.
    pub steps: Vec<StepStat>,
    /// Forest merge records of the joining edges, in arrival order.
    pub merge_records: Vec<MergeRecord>,
    /// Positions I_k of the joining edges: starts at 0, then the m of each
    /// join, so entry k (0-based) is the first m at which tau reached k.
    pub i_positions: Vec<u64>,
    pub connect_time: Option<u64>,
    pub final_chi_num: u64,
}

impl GraphProcessRun {
    pub fn final_tau(&self) -> usize {
        self.merge_records.len()
    }

    /// CSV of the recorded statistics stream.
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("m,tau,chi_num,L,S\n");
        for st in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                st.m, st.tau, st.chi_num, st.l, st.s
            ));
        }
        out
    }
}

fn two_largest_of_multiset(sizes: &BTreeMap<u64, usize>) -> (u64, u64) {
    let mut it = sizes.iter().rev();
    match it.next() {
        None => (0, 0),
        Some((&l, &c)) if c >= 2 => (l, l),
        Some((&l, _)) => (l, it.next().map(|(&s, _)| s).unwrap_or(0)),
    }
}

fn process_core(
    n: usize,
    m_max: u64,
    record_every: u64,
    stop_when_connected: bool,
    mut next_edge: impl FnMut() -> Option<(usize, usize)>,
) -> GraphProcessRun {
    assert!(record_every >= 1);
    assert!(m_max <= pair_count(n));
    let mut f = Forest::new(n);
    let mut sizes: BTreeMap<u64, usize> = BTreeMap::new();
    if n > 0 {
        sizes.insert(1, n);
    }
    let mut steps = Vec::new();
    let mut merge_records = Vec::new();
    let mut i_positions = vec![0u64];
    let mut connect_time = None;
    let mut m = 0u64;
    while m < m_max {
        let (u, v) = match next_edge() {
            Some(e) => e,
            None => break,
        };
        m += 1;
        let joined = !f.same_component(u, v);
        if joined {
            let rec = f.merge(u.min(v), u.max(v)).expect("cross component");
            *sizes.get_mut(&rec.size_a).unwrap() -= 1;
            if sizes[&rec.size_a] == 0 {
                sizes.remove(&rec.size_a);
            }
            *sizes.get_mut(&rec.size_b).unwrap() -= 1;
            if sizes[&rec.size_b] == 0 {
                sizes.remove(&rec.size_b);
            }
            *sizes.entry(rec.size_a + rec.size_b).or_insert(0) += 1;
            merge_records.push(rec);
            i_positions.push(m);
            if f.components() == 1 && connect_time.is_none() {
                connect_time = Some(m);
            }
        }
        let done = m == m_max || (stop_when_connected && connect_time.is_some());
        if joined || done || m % record_every == 0 {
            let (l, s) = two_largest_of_multiset(&sizes);
            steps.push(StepStat {
                m,
                tau: merge_records.len(),
                chi_num: f.sum_sq(),
                l,
                s,
                joined,
            });
        }
        if stop_when_connected && connect_time.is_some() {
            break;
        }
    }
    GraphProcessRun {
        n,
        m_examined: m,
        record_every,
        steps,
        merge_records,
        i_positions,
        connect_time,
        final_chi_num: f.sum_sq(),
    }
}

/// Feeds the first m_max edges of a fresh uniform edge permutation through
/// the component process. `record_every` thins the statistics stream (joins
/// and the final step are always kept).
pub fn run_graph_process<R: Rng>(
    n: usize,
    m_max: u64,
    record_every: u64,
    stop_when_connected: bool,
    rng: &mut R,
) -> GraphProcessRun {
    let mut perm = EdgePermutation::new(n);
    process_core(n, m_max, record_every, stop_when_connected, || {
        perm.next_edge(rng)
    })
}

/// Same process driven by an explicit edge sequence (tests, replays).
pub fn graph_process_from_edges(
    n: usize,
    edges: &[(usize, usize)],
    record_every: u64,
    stop_when_connected: bool,
) -> GraphProcessRun {
    let mut it = edges.iter().copied();
    process_core(n, edges.len() as u64, record_every, stop_when_connected, || {
        it.next()
    })
}

/// The multiplicative coalescent run carried by the joining edges. Per
/// realization, the forest after k-1 joins has exactly the components of the
/// graph after I_k edges. Requires the run to have reached connectivity.
pub fn extract_coupled_mc(run: &GraphProcessRun) -> Result<MergeTrace, ErError> {
    if run.connect_time.is_none() {
        return Err(ErError::Truncated);
    }
    Ok(MergeTrace {
        n: run.n,
        kernel: KernelKind::Multiplicative,
        records: run.merge_records.clone(),
        roots_history: None,
    })
}

/// Both sides of the per-realization identity
/// sum_k ln(1 - chi(F_k)/n) = sum_m 1[join at m] ln(1 - chi(G_(m-1))/n):
/// the left side from the coupled coalescent records, the right side from the
/// per-edge statistics stream. The two sums use identical terms in identical
/// order, so they must agree bit for bit.
pub fn xi_identity_sums(run: &GraphProcessRun) -> Result<(f64, f64), ErError> {
    if run.record_every != 1 {
        return Err(ErError::NeedsFullRecords);
    }
    let n2 = (run.n as u64 * run.n as u64) as f64;
    // s and n^2 are exact in f64, so -s/n^2 is correctly rounded and ln_1p
    // avoids the cancellation that 1 - s/n^2 suffers once chi nears n.
    let term = |s: u64| (-(s as f64) / n2).ln_1p();
    let lhs: f64 = run.merge_records.iter().map(|r| term(r.pre_sum_sq)).sum();
    let mut rhs = 0.0;
    let mut prev = run.n as u64;
    for st in &run.steps {
        if st.joined {
            rhs += term(prev);
        }
        prev = st.chi_num;
    }
    Ok((lhs, rhs))
}

// ---------------------------------------------------------------------------
// G(n, p) and the re-seeded exploration.
// ---------------------------------------------------------------------------

/// Undirected simple graph as adjacency lists.
#[derive(Debug, Clone)]
pub struct SimpleGraph {
    pub n: usize,
    pub adj: Vec<Vec<usize>>,
    pub m: u64,
}

impl SimpleGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            assert!(u != v && u < n && v < n);
            adj[u].push(v);
            adj[v].push(u);
        }
        SimpleGraph {
            n,
            adj,
            m: edges.len() as u64,
        }
    }

    /// Component id per vertex; ids are assigned in order of each
    /// component's smallest vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = Vec::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            queue.push(start);
            while let Some(v) = queue.pop() {
                for &w in &self.adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        queue.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Component sizes indexed by component id.
    pub fn component_sizes(&self) -> Vec<u64> {
        let comp = self.components();
        let k = comp.iter().max().map_or(0, |&c| c + 1);
        let mut sizes = vec![0u64; k];
        for &c in &comp {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Samples G(n, p) by geometric skipping over the edge slots: expected work
/// is proportional to the number of edges drawn, not to C(n,2).
pub fn sample_gnp<R: Rng>(n: usize, p: f64, rng: &mut R) -> SimpleGraph {
    assert!((0.0..=1.0).contains(&p));
    let total = pair_count(n);
    let mut edges = Vec::new();
    if p >= 1.0 {
        for t in 0..total {
            edges.push(index_to_pair(n, t));
        }
    } else if p > 0.0 {
        let ln_q = (1.0 - p).ln();
        let mut t = 0u64;
        while t < total {
            let u: f64 = rng.gen();
            let skip = ((1.0 - u).ln() / ln_q).floor();
            if !(skip < (total - t) as f64) {
                break;
            }
            t += skip as u64;
            edges.push(index_to_pair(n, t));
            t += 1;
        }
    }
    SimpleGraph::from_edges(n, &edges)
}

/// Trace of the re-seeded depth-first exploration.
#[derive(Debug, Clone)]
pub struct ExplorationRun {
    pub n: usize,
    pub p: f64,
    /// |U_i| for i = 0..=steps_taken.
    pub u_trajectory: Vec<usize>,
    /// Vertices in order of exploration.
    pub explored: Vec<usize>,
    /// Maximal runs of consecutively explored vertices sharing a graph
    /// component: (component id, run length).
    pub component_runs: Vec<(usize, u64)>,
    /// True component sizes of the underlying graph, by component id.
    pub component_sizes_by_id: Vec<u64>,
    /// True when the exploration emptied both the discovered and the
    /// undiscovered sets within the step budget.
    pub complete: bool,
}

impl ExplorationRun {
    /// Sizes of the fully explored components, in discovery order.
    pub fn concluded_component_sizes(&self) -> Vec<u64> {
        self.component_runs
            .iter()
            .filter(|&&(id, len)| len == self.component_sizes_by_id[id])
            .map(|&(_, len)| len)
            .collect()
    }
}

/// Runs the exploration on a fixed graph. Vertex 0 starts discovered. While
/// discovered vertices remain, the latest-discovered one (smallest label on
/// ties) is explored and its undiscovered neighbours become discovered. When
/// none remain, every undiscovered vertex independently becomes discovered
/// with probability p; with p < 1 this can idle forever, hence the explicit
/// step budget.
pub fn explore<R: Rng>(g: &SimpleGraph, p: f64, max_steps: usize, rng: &mut R) -> ExplorationRun {
    assert!((0.0..=1.0).contains(&p));
    let n = g.n;
    let comp = g.components();
    let component_sizes_by_id = g.component_sizes();
    let mut in_u = vec![true; n];
    let mut u_count = n.saturating_sub(1);
    if n > 0 {
        in_u[0] = false;
    }
    // Discovered vertices, grouped by discovery step; each group is sorted
    // descending so the smallest label pops last-in-first-out.
    let mut gens: Vec<Vec<usize>> = if n > 0 { vec![vec![0]] } else { Vec::new() };
    let mut explored = Vec::new();
    let mut u_trajectory = vec![u_count];
    let mut complete = false;
    for _ in 0..max_steps {
        while matches!(gens.last(), Some(last) if last.is_empty()) {
            gens.pop();
        }
        if let Some(current) = gens.last_mut() {
            let v = current.pop().expect("empty generations were dropped");
            let mut found: Vec<usize> = g.adj[v].iter().copied().filter(|&w| in_u[w]).collect();
            for &w in &found {
                in_u[w] = false;
            }
            u_count -= found.len();
            if !found.is_empty() {
                found.sort_unstable_by(|a, b| b.cmp(a));
                gens.push(found);
            }
            explored.push(v);
        } else if u_count > 0 {
            let mut seeded: Vec<usize> = (0..n).filter(|&w| in_u[w] && rng.gen::<f64>() < p).collect();
            for &w in &seeded {
                in_u[w] = false;
            }
            u_count -= seeded.len();
            if !seeded.is_empty() {
                seeded.sort_unstable_by(|a, b| b.cmp(a));
                gens.push(seeded);
            }
        } else {
            complete = true;
            break;
        }
        u_trajectory.push(u_count);
    }
    if !complete && gens.iter().all(|g| g.is_empty()) && u_count == 0 {
        complete = true;
    }
    let mut component_runs: Vec<(usize, u64)> = Vec::new();
    for &v in &explored {
        match component_runs.last_mut() {
            Some((id, len)) if *id == comp[v] => *len += 1,
            _ => component_runs.push((comp[v], 1)),
        }
    }
    ExplorationRun {
        n,
        p,
        u_trajectory,
        explored,
        component_runs,
        component_sizes_by_id,
        complete,
    }
}

/// Samples G(n, p) and explores it with the same p.
pub fn explore_gnp<R: Rng>(n: usize, p: f64, max_steps: usize, rng: &mut R) -> ExplorationRun {
    let g = sample_gnp(n, p, rng);
    explore(&g, p, max_steps, rng)
}

// ---------------------------------------------------------------------------
// Susceptibility helpers.
// ---------------------------------------------------------------------------

/// Largest and second largest entries (0 when absent).
pub fn two_largest(sizes: &[u64]) -> (u64, u64) {
    let (mut l, mut s) = (0u64, 0u64);
    for &x in sizes {
        if x >= l {
            s = l;
            l = x;
        } else if x > s {
            s = x;
        }
    }
    (l, s)
}

/// Exact check of L^2/n <= chi <= L^2/n + S, i.e. L^2 <= sum s^2 <= L^2 + nS
/// in integers, for a component size list.
pub fn susceptibility_bounds_check(sizes: &[u64]) -> bool {
    let n: u128 = sizes.iter().map(|&s| s as u128).sum();
    let sum_sq: u128 = sizes.iter().map(|&s| s as u128 * s as u128).sum();
    let (l, s) = two_largest(sizes);
    let l2 = l as u128 * l as u128;
    l2 <= sum_sq && sum_sq <= l2 + n * s as u128
}

/// Probability that the next edge of the graph process joins two components,
/// computed through the susceptibility: (1 - chi/n) (1 - (n+2m)/n^2)^(-1)
/// for a state with m edges and susceptibility numerator chi_num.
pub fn chi_increase_probability(n: usize, m: u64, chi_num: u64) -> BigRational {
    assert!(m < pair_count(n), "no pair slots remain");
    let big = |x: u64| BigRational::from_integer(BigInt::from(x));
    let n_big = big(n as u64);
    let n2 = &n_big * &n_big;
    let chi = big(chi_num) / &n_big;
    let one = BigRational::one();
    let numer = &one - chi / &n_big;
    let denom = &one - (&n_big + big(2 * m)) / &n2;
    numer / denom
}

/// The same probability by direct counting: cross-component pairs over
/// untried pairs. The forest supplies component membership; m counts all
/// edges placed so far, including those that closed cycles.
pub fn chi_increase_probability_direct(f: &mut Forest, m: u64) -> BigRational {
    let n = f.n();
    assert!(m < pair_count(n));
    let mut cross = 0u64;
    for u in 0..n {
        for v in (u + 1)..n {
            if !f.same_component(u, v) {
                cross += 1;
            }
        }
    }
    BigRational::new(BigInt::from(cross), BigInt::from(pair_count(n) - m))
}

/// Two-sample Kolmogorov-Smirnov comparison of the susceptibility numerator
/// of G(n, p) conditioned on having exactly m edges against that of the graph
/// process stopped at m edges. Returns (D, p-value).
pub fn edge_count_conditioning_check<R: Rng>(
    n: usize,
    p: f64,
    m: u64,
    reps: usize,
    rng: &mut R,
) -> (f64, f64) {
    let mut conditioned = Vec::with_capacity(reps);
    while conditioned.len() < reps {
        let g = sample_gnp(n, p, rng);
        if g.m == m {
            let chi: u64 = g.component_sizes().iter().map(|&s| s * s).sum();
            conditioned.push(chi as f64);
        }
    }
    let mut process = Vec::with_capacity(reps);
    for _ in 0..reps {
        let run = run_graph_process(n, m, m.max(1), false, rng);
        process.push(run.final_chi_num as f64);
    }
    stats::ks_two_sample(&conditioned, &process)
}
