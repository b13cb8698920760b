//! Kruskal's algorithm on the complete graph with random edge weights:
//! streamed sorted weights, the per-realization weight identity, the
//! two-point distance, and kernel-dependent tree heights.

use rand::Rng;
use thiserror::Error;

use crate::engine::run_uniform;
use crate::er::{index_to_pair, pair_count, pair_to_index, EdgePermutation};
use crate::experiment::{run_replicated, ExperimentResult};
use crate::forest::Forest;
use crate::kernel::KernelKind;
use crate::tree::RootedTree;

#[derive(Debug, Error, PartialEq)]
pub enum MstError {
    #[error("need {expected} weights for n = {n}, got {got}")]
    WrongWeightCount { n: usize, expected: u64, got: usize },
    #[error("duplicate weight {0}")]
    DuplicateWeight(f64),
    #[error("kruskal needs n >= 2")]
    TooSmall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightModel {
    Uniform01,
    Exponential1,
    /// Caller-supplied slot-indexed list (see [`kruskal_with_weights`]).
    Supplied,
}

/// Increasing order statistics of `total` iid weights, one at a time: the
/// cumulative exponential spacings E_m / (total - m + 1) are the Exp(1)
/// order statistics, and 1 - e^(-T) maps them to Uniform(0,1). Kruskal can
/// therefore consume weights smallest-first without materializing a sort.
#[derive(Debug, Clone)]
pub struct SortedWeightStream {
    model: WeightModel,
    total: u64,
    drawn: u64,
    cum: f64,
}

impl SortedWeightStream {
    pub fn new(model: WeightModel, total: u64) -> Self {
        assert!(model != WeightModel::Supplied, "stream needs a distribution");
        SortedWeightStream {
            model,
            total,
            drawn: 0,
            cum: 0.0,
        }
    }

    pub fn next_weight<R: Rng>(&mut self, rng: &mut R) -> f64 {
        assert!(self.drawn < self.total, "weight stream exhausted");
        let mut e = 0.0;
        while e == 0.0 {
            // -ln(1 - U) is Exp(1); U = 0 would stall the strict increase
            let u: f64 = rng.gen();
            e = -(-u).ln_1p();
        }
        self.cum += e / (self.total - self.drawn) as f64;
        self.drawn += 1;
        match self.model {
            WeightModel::Uniform01 => -(-self.cum).exp_m1(),
            WeightModel::Exponential1 => self.cum,
            WeightModel::Supplied => unreachable!(),
        }
    }
}

/// One weighted run: the tree found by the increasing-weight scan plus both
/// evaluations of its total weight.
#[derive(Debug, Clone)]
pub struct WeightedRun {
    pub n: usize,
    pub model: WeightModel,
    /// Accepted edges in acceptance (increasing weight) order.
    pub mst_edges: Vec<(usize, usize, f64)>,
    /// Sum of accepted edge weights, in acceptance order.
    pub total_weight: f64,
    /// Same quantity rebuilt from the susceptibility-increase indicator
    /// over every examined edge; bitwise equality with `total_weight` is
    /// the per-realization identity.
    pub indicator_weight: f64,
    /// Sorted edges examined before the tree was complete.
    pub edges_examined: u64,
}

/// Exact equality of the two weight computations. Both sides add the same
/// floats in the same order, so any disagreement means the acceptance
/// predicate and the susceptibility-increase predicate diverged.
pub fn weight_identity_check(run: &WeightedRun) -> bool {
    run.total_weight == run.indicator_weight
}

fn accept_scan<I>(n: usize, model: WeightModel, edges: I) -> WeightedRun
where
    I: Iterator<Item = (usize, usize, f64)>,
{
    let mut forest = Forest::new(n);
    let mut mst_edges = Vec::with_capacity(n - 1);
    let mut total = 0.0;
    let mut indicator = 0.0;
    let mut examined = 0u64;
    for (u, v, w) in edges {
        examined += 1;
        let pre_sum_sq = forest.sum_sq();
        if !forest.same_component(u, v) {
            forest.merge(u, v).expect("cross-component merge");
            mst_edges.push((u, v, w));
            total += w;
        }
        if forest.sum_sq() > pre_sum_sq {
            indicator += w;
        }
        if forest.components() == 1 {
            break;
        }
    }
    assert_eq!(mst_edges.len(), n - 1, "weights must connect the graph");
    WeightedRun {
        n,
        model,
        mst_edges,
        total_weight: total,
        indicator_weight: indicator,
        edges_examined: examined,
    }
}

/// Minimum spanning tree of the complete graph under iid edge weights. The
/// edge order comes from a lazy uniform permutation and the weights from
/// the sorted stream, so the scan stops as soon as n - 1 edges are in.
pub fn kruskal<R: Rng>(n: usize, model: WeightModel, rng: &mut R) -> WeightedRun {
    assert!(n >= 2, "kruskal needs n >= 2");
    let mut perm = EdgePermutation::new(n);
    let mut stream = SortedWeightStream::new(model, pair_count(n));
    accept_scan(
        n,
        model,
        std::iter::from_fn(|| {
            let (u, v) = perm.next_edge(rng)?;
            Some((u, v, stream.next_weight(rng)))
        }),
    )
}

/// Kruskal on a caller-supplied instance: `weights[s]` is the weight of the
/// pair with slot index s (the pair codec order). Weights must be distinct,
/// which makes the minimum spanning tree unique.
pub fn kruskal_with_weights(n: usize, weights: &[f64]) -> Result<WeightedRun, MstError> {
    if n < 2 {
        return Err(MstError::TooSmall);
    }
    let expected = pair_count(n);
    if weights.len() as u64 != expected {
        return Err(MstError::WrongWeightCount {
            n,
            expected,
            got: weights.len(),
        });
    }
    let mut slots: Vec<u64> = (0..expected).collect();
    slots.sort_by(|&a, &b| {
        weights[a as usize]
            .partial_cmp(&weights[b as usize])
            .expect("weights must be comparable")
    });
    for pair in slots.windows(2) {
        if weights[pair[0] as usize] == weights[pair[1] as usize] {
            return Err(MstError::DuplicateWeight(weights[pair[0] as usize]));
        }
    }
    Ok(accept_scan(
        n,
        WeightModel::Supplied,
        slots.iter().map(|&s| {
            let (u, v) = index_to_pair(n, s);
            (u, v, weights[s as usize])
        }),
    ))
}

/// Direct-sort oracle path: draws the permutation and the weight stream to
/// exhaustion, returning both the streamed run (identical to [`kruskal`] on
/// the same rng state, since the scan sees the same prefix) and the full
/// slot-indexed weight vector for replay through [`kruskal_with_weights`].
pub fn materialise_instance<R: Rng>(
    n: usize,
    model: WeightModel,
    rng: &mut R,
) -> (WeightedRun, Vec<f64>) {
    assert!(n >= 2);
    let total = pair_count(n);
    assert!(total <= 2_000_000, "oracle path is for small n");
    let mut slot_weights = vec![f64::NAN; total as usize];
    let mut perm = EdgePermutation::new(n);
    let mut stream = SortedWeightStream::new(model, total);
    let mut drawn = Vec::with_capacity(total as usize);
    for _ in 0..total {
        let (u, v) = perm.next_edge(rng).expect("permutation has total edges");
        let w = stream.next_weight(rng);
        slot_weights[pair_to_index(n, u, v) as usize] = w;
        drawn.push((u, v, w));
    }
    (accept_scan(n, model, drawn.into_iter()), slot_weights)
}

/// Tree edges lighter than the threshold. By the cut property this forest
/// has the same components as keeping every below-threshold edge of the
/// complete graph.
pub fn edges_below(run: &WeightedRun, threshold: f64) -> Vec<(usize, usize, f64)> {
    run.mst_edges
        .iter()
        .copied()
        .filter(|&(_, _, w)| w < threshold)
        .collect()
}

/// Mean and standard error of the total tree weight under uniform weights;
/// the mean approaches 1.2020569... as n grows. Each replicate also checks
/// the weight identity.
pub fn frieze_estimate(n: usize, reps: u64, seed: u64) -> ExperimentResult {
    let values = run_replicated(seed, reps, |_, mut rng| {
        let run = kruskal(n, WeightModel::Uniform01, &mut rng);
        assert!(weight_identity_check(&run), "weight identity violated");
        run.total_weight
    });
    ExperimentResult::from_values("estimate-frieze", n as u64, reps, seed, &values)
}

fn mst_tree<R: Rng>(n: usize, rng: &mut R) -> RootedTree {
    let run = kruskal(n, WeightModel::Uniform01, rng);
    let edges: Vec<(usize, usize)> = run.mst_edges.iter().map(|&(u, v, _)| (u, v)).collect();
    RootedTree::from_edges(n, &edges, 0).expect("mst spans")
}

/// Graph distance between vertex 0 and vertex n-1 in the uniform-weight
/// minimum spanning tree.
pub fn mst_two_point<R: Rng>(n: usize, rng: &mut R) -> usize {
    assert!(n >= 2);
    mst_tree(n, rng).root_distances()[n - 1]
}

/// Height of the kernel's random tree: coalescent root orientation for the
/// rooted kernels, the minimum spanning tree rooted at vertex 0 for the
/// multiplicative one.
pub fn tree_height_by_kernel<R: Rng>(kernel: KernelKind, n: usize, rng: &mut R) -> usize {
    if n < 2 {
        return 0;
    }
    match kernel {
        KernelKind::Multiplicative => mst_tree(n, rng).height(),
        _ => run_uniform(kernel, n, rng)
            .rooted_tree()
            .expect("complete trace")
            .height(),
    }
}

/// Depth of a fixed vertex in the additive coalescent's tree.
pub fn additive_depth_sample<R: Rng>(n: usize, rng: &mut R) -> usize {
    run_uniform(KernelKind::Additive, n, rng)
        .rooted_tree()
        .expect("complete trace")
        .root_distances()[0]
}

/// P(depth = k - 1) = (k/n) prod_{i<k} (1 - i/n) for k = 1..n; the returned
/// vector is indexed by depth.
pub fn additive_depth_pmf(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    let nf = n as f64;
    let mut prod = 1.0;
    (1..=n)
        .map(|k| {
            let p = k as f64 / nf * prod;
            prod *= 1.0 - k as f64 / nf;
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::derive_stream;

    #[test]
    fn stream_is_sorted_and_in_range() {
        let mut rng = derive_stream(41, 0);
        let total = pair_count(30);
        let mut stream = SortedWeightStream::new(WeightModel::Uniform01, total);
        let mut prev = -1.0;
        for _ in 0..total {
            let w = stream.next_weight(&mut rng);
            assert!(w > prev && w > 0.0 && w < 1.0);
            prev = w;
        }
        let mut stream = SortedWeightStream::new(WeightModel::Exponential1, total);
        let mut prev = 0.0;
        for _ in 0..total {
            let w = stream.next_weight(&mut rng);
            assert!(w > prev);
            prev = w;
        }
    }

    #[test]
    fn hand_instances() {
        let run = kruskal_with_weights(2, &[0.7]).unwrap();
        assert_eq!(run.total_weight, 0.7);
        assert_eq!(run.mst_edges, vec![(0, 1, 0.7)]);

        // slots in pair order (0,1), (0,2), (1,2)
        let run = kruskal_with_weights(3, &[0.1, 0.2, 0.3]).unwrap();
        let pairs: Vec<(usize, usize)> = run.mst_edges.iter().map(|&(u, v, _)| (u, v)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2)]);
        assert!((run.total_weight - 0.3).abs() < 1e-12);

        let run = kruskal_with_weights(3, &[0.1, 0.3, 0.2]).unwrap();
        let pairs: Vec<(usize, usize)> = run.mst_edges.iter().map(|&(u, v, _)| (u, v)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
        assert!((run.total_weight - 0.3).abs() < 1e-12);
        assert!(weight_identity_check(&run));
        assert_eq!(run.edges_examined, 2);
    }

    #[test]
    fn bad_instances_are_rejected() {
        assert_eq!(kruskal_with_weights(1, &[]).unwrap_err(), MstError::TooSmall);
        assert!(matches!(
            kruskal_with_weights(3, &[0.1, 0.2]),
            Err(MstError::WrongWeightCount { .. })
        ));
        assert_eq!(
            kruskal_with_weights(3, &[0.5, 0.1, 0.5]).unwrap_err(),
            MstError::DuplicateWeight(0.5)
        );
    }

    #[test]
    fn streaming_matches_direct_sort() {
        for seed in [1u64, 2, 3] {
            let mut rng = derive_stream(seed, 0);
            let (streamed, weights) = materialise_instance(40, WeightModel::Uniform01, &mut rng);
            let sorted = kruskal_with_weights(40, &weights).unwrap();
            assert_eq!(streamed.mst_edges, sorted.mst_edges);
            assert_eq!(streamed.total_weight, sorted.total_weight);
            assert_eq!(streamed.indicator_weight, sorted.indicator_weight);
            assert_eq!(streamed.edges_examined, sorted.edges_examined);

            // the early-stopping entry point sees the same draw prefix
            let mut rng = derive_stream(seed, 0);
            let early = kruskal(40, WeightModel::Uniform01, &mut rng);
            assert_eq!(early.mst_edges, streamed.mst_edges);
            assert_eq!(early.total_weight, streamed.total_weight);
        }
    }

    #[test]
    fn identity_holds_on_large_runs() {
        for (seed, model) in [(5u64, WeightModel::Uniform01), (6, WeightModel::Exponential1)] {
            let mut rng = derive_stream(seed, 0);
            let run = kruskal(500, model, &mut rng);
            assert!(weight_identity_check(&run));
            assert_eq!(run.mst_edges.len(), 499);
        }
    }

    fn prufer_tree(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
        let mut deg = vec![1usize; n];
        for &a in seq {
            deg[a] += 1;
        }
        let mut used = vec![false; n];
        let mut edges = Vec::with_capacity(n - 1);
        for &a in seq {
            let leaf = (0..n).find(|&v| !used[v] && deg[v] == 1).unwrap();
            edges.push((leaf.min(a), leaf.max(a)));
            used[leaf] = true;
            deg[leaf] -= 1;
            deg[a] -= 1;
        }
        let rest: Vec<usize> = (0..n).filter(|&v| !used[v] && deg[v] == 1).collect();
        edges.push((rest[0], rest[1]));
        edges
    }

    #[test]
    fn mst_is_the_unique_minimum_over_all_spanning_trees() {
        let n = 6;
        for seed in [10u64, 11, 12] {
            let mut rng = derive_stream(seed, 0);
            let (run, weights) = materialise_instance(n, WeightModel::Uniform01, &mut rng);
            let mut mst_pairs: Vec<(usize, usize)> =
                run.mst_edges.iter().map(|&(u, v, _)| (u, v)).collect();
            mst_pairs.sort_unstable();

            let mut best = f64::INFINITY;
            let mut best_count = 0u32;
            let mut best_pairs = Vec::new();
            let mut seq = vec![0usize; n - 2];
            loop {
                let edges = prufer_tree(n, &seq);
                let w: f64 = edges
                    .iter()
                    .map(|&(u, v)| weights[pair_to_index(n, u, v) as usize])
                    .sum();
                if w < best - 1e-12 {
                    best = w;
                    best_count = 1;
                    best_pairs = edges;
                    best_pairs.sort_unstable();
                } else if (w - best).abs() <= 1e-12 {
                    best_count += 1;
                }
                // odometer over all n^(n-2) sequences
                let mut i = 0;
                while i < seq.len() {
                    seq[i] += 1;
                    if seq[i] < n {
                        break;
                    }
                    seq[i] = 0;
                    i += 1;
                }
                if i == seq.len() {
                    break;
                }
            }
            assert_eq!(best_count, 1, "minimum not unique at seed {seed}");
            assert_eq!(best_pairs, mst_pairs);
            assert!(run.total_weight <= best + 1e-12);
        }
    }

    #[test]
    fn threshold_forest_matches_brute_subgraph() {
        use crate::er::SimpleGraph;
        let n = 60;
        let mut rng = derive_stream(21, 0);
        let (run, weights) = materialise_instance(n, WeightModel::Exponential1, &mut rng);
        for threshold in [0.5 / n as f64, 1.0 / n as f64, 0.05, 0.2] {
            let kept = edges_below(&run, threshold);
            let mut forest = Forest::new(n);
            for &(u, v, _) in &kept {
                forest.merge(u, v).unwrap();
            }
            let sub_edges: Vec<(usize, usize)> = (0..pair_count(n))
                .filter(|&s| weights[s as usize] < threshold)
                .map(|s| index_to_pair(n, s))
                .collect();
            let brute = SimpleGraph::from_edges(n, &sub_edges).components();
            // same partition iff the component labelings match after
            // first-occurrence renumbering
            let mut canon_a = vec![usize::MAX; n];
            let mut canon_b = vec![usize::MAX; n];
            let (mut next_a, mut next_b) = (0, 0);
            for v in 0..n {
                let ra = forest.find(v);
                if canon_a[ra] == usize::MAX {
                    canon_a[ra] = next_a;
                    next_a += 1;
                }
                let rb = brute[v];
                if canon_b[rb] == usize::MAX {
                    canon_b[rb] = next_b;
                    next_b += 1;
                }
                assert_eq!(canon_a[ra], canon_b[rb], "partition differs at {v}");
            }
        }
    }

    #[test]
    fn frieze_estimator_basics() {
        let r = frieze_estimate(2, 400, 9);
        assert!((r.mean - 0.5).abs() < 0.06, "n=2 mean = {}", r.mean);
        let again = frieze_estimate(2, 400, 9);
        assert_eq!(r.mean, again.mean);
        assert_eq!(r.json_without_elapsed(), again.json_without_elapsed());
        let mid = frieze_estimate(40, 50, 9);
        assert!(mid.mean > 0.8 && mid.mean < 1.3, "n=40 mean = {}", mid.mean);
    }

    #[test]
    fn depth_pmf_and_samples() {
        assert_eq!(additive_depth_pmf(2), vec![0.5, 0.5]);
        for n in [2usize, 10, 50] {
            let total: f64 = additive_depth_pmf(n).iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        let mut rng = derive_stream(33, 0);
        let mut zeros = 0;
        for _ in 0..2000 {
            if additive_depth_sample(2, &mut rng) == 0 {
                zeros += 1;
            }
        }
        // Binomial(2000, 1/2): 4-sigma band
        assert!((910..=1090).contains(&zeros), "zeros = {zeros}");
    }

    #[test]
    fn two_point_and_heights() {
        let mut rng = derive_stream(8, 0);
        assert_eq!(mst_two_point(2, &mut rng), 1);
        let d = mst_two_point(200, &mut rng);
        assert!(d >= 1 && d < 200);

        let h_kc = tree_height_by_kernel(KernelKind::Kingman, 1000, &mut rng);
        assert!(h_kc >= 5 && h_kc <= 60, "kingman height = {h_kc}");
        let h_mc = tree_height_by_kernel(KernelKind::Multiplicative, 256, &mut rng);
        assert!(h_mc >= 3, "mst height = {h_mc}");
        let h_ac = tree_height_by_kernel(KernelKind::Additive, 400, &mut rng);
        assert!(h_ac >= 5, "additive height = {h_ac}");
    }
}
