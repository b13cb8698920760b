//! Exact chain counting: labelled DFS enumeration, a shape-level DP, and
//! closed forms, each serving as an independent oracle for the others.

use std::collections::{BTreeMap, HashMap};

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{BigUint, Integer, One, Signed, Zero};
use rand::Rng;

use crate::engine::run_uniform;
use crate::kernel::KernelKind;
use crate::tree::RootedTree;

pub fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

/// Falling factorial (n)_k = n(n-1)...(n-k+1).
pub fn falling(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    (n - k + 1..=n).map(BigUint::from).product()
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut r = BigUint::one();
    for i in 0..k {
        // exact at every step: r holds C(n, i) and (i+1) | C(n, i)·(n-i)
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// Natural log of a positive big integer from its top 64 bits.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "log of zero");
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64_digits()[0] as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64_digits()[0];
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

// ---------------------------------------------------------------------------
// Closed forms.
// ---------------------------------------------------------------------------

/// Closed-form Z(n, k): total kernel weight of all (k-1)-merge chain prefixes.
pub fn closed_form_partition_function(kernel: KernelKind, n: u64, k: u64) -> BigUint {
    assert!(n >= 1 && (1..=n).contains(&k), "need 1 <= k <= n");
    let merges = k - 1;
    match kernel {
        KernelKind::Kingman => falling(n, merges) * falling(n - 1, merges),
        KernelKind::Additive => BigUint::from(n).pow(merges as u32) * falling(n - 1, merges),
        KernelKind::Multiplicative => renyi_forest_count(n, k) * factorial(merges),
    }
}

/// Weight of all complete chains: n!(n-1)!, n^(n-1)(n-1)!, n^(n-2)(n-1)!.
pub fn closed_form_full(kernel: KernelKind, n: u64) -> BigUint {
    closed_form_partition_function(kernel, n, n)
}

/// Number of forests on n labelled vertices with k-1 edges, via the
/// alternating binomial sum. The sum is evaluated over the common
/// denominator (2n)^(n+1-k) in integers, then divided exactly; a remainder
/// would mean the formula was transcribed wrong, so it panics.
pub fn renyi_forest_count(n: u64, k: u64) -> BigUint {
    assert!(n >= 1 && (1..=n).contains(&k), "need 1 <= k <= n");
    let t = n + 1 - k;
    let two_n = BigInt::from(2 * n);
    let mut scaled_sum = BigInt::zero();
    let mut pow = two_n.pow(t as u32);
    let mut fall = BigInt::one();
    for i in 0..=t {
        if i > 0 {
            let step = k as i64 - i as i64;
            if step <= 0 {
                break; // (k-1)_i and every later term vanish
            }
            fall *= step;
            pow /= &two_n;
        }
        let c = BigInt::from_biguint(Sign::Plus, binomial(t, i));
        let term = &pow * c * BigInt::from(t + i) * &fall;
        if i % 2 == 0 {
            scaled_sum += term;
        } else {
            scaled_sum -= term;
        }
    }
    let mut numer = BigInt::from_biguint(Sign::Plus, binomial(n, t)) * scaled_sum;
    let mut denom = two_n.pow(t as u32);
    if k >= 2 {
        numer *= BigInt::from(n).pow((k - 2) as u32);
    } else {
        denom *= BigInt::from(n);
    }
    let (q, r) = numer.div_rem(&denom);
    assert!(r.is_zero(), "forest count must be integral (n={n}, k={k})");
    assert!(q.is_positive(), "forest count must be positive (n={n}, k={k})");
    q.to_biguint().unwrap()
}

/// Number of complete merge histories, (n!)^2 / (n 2^(n-1)).
pub fn chain_count(n: u64) -> BigUint {
    assert!(n >= 1);
    let numer = factorial(n).pow(2);
    let denom = BigUint::from(n) << (n - 1) as usize;
    let (q, r) = numer.div_rem(&denom);
    assert!(r.is_zero(), "chain count must divide exactly");
    q
}

/// Sequences of l rooted trees that together span n labelled vertices:
/// l (n)_l n^(n-l-1), with the n^(-1) at l = n handled exactly.
pub fn ordered_forest_count(n: u64, l: u64) -> BigUint {
    assert!(n >= 1 && (1..=n).contains(&l), "need 1 <= l <= n");
    let base = BigUint::from(l) * falling(n, l);
    if l == n {
        let (q, r) = base.div_rem(&BigUint::from(n));
        assert!(r.is_zero());
        q
    } else {
        base * BigUint::from(n).pow((n - l - 1) as u32)
    }
}

// ---------------------------------------------------------------------------
// Labelled DFS enumeration (n <= 8).
// ---------------------------------------------------------------------------

/// Walks every merge history once, accumulating the running kernel product
/// at every depth. Blocks are tracked positionally, so each choice of an
/// unordered slot pair is a distinct chain of set partitions.
fn enumerate_weighted<F>(n: usize, weight: F) -> Vec<u128>
where
    F: Fn(u64, u64) -> u128 + Copy + Send + Sync,
{
    assert!((1..=8).contains(&n), "labelled DFS is for n <= 8");
    let mut totals = vec![0u128; n];
    totals[0] = 1;
    if n == 1 {
        return totals;
    }
    let firsts: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let run_branch = |&(i, j): &(usize, usize)| -> Vec<u128> {
        let mut sizes: Vec<u64> = vec![1; n];
        sizes[i] = 2;
        sizes.swap_remove(j);
        let mut sums = vec![0u128; n];
        dfs(weight, &mut sizes, weight(1, 1), 1, &mut sums);
        sums
    };
    let branches: Vec<Vec<u128>>;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        branches = firsts.par_iter().map(run_branch).collect();
    }
    #[cfg(not(feature = "parallel"))]
    {
        branches = firsts.iter().map(run_branch).collect();
    }
    for sums in branches {
        for d in 1..n {
            totals[d] += sums[d];
        }
    }
    totals
}

fn dfs<F>(weight: F, sizes: &mut Vec<u64>, product: u128, depth: usize, sums: &mut [u128])
where
    F: Fn(u64, u64) -> u128 + Copy,
{
    sums[depth] += product;
    if sizes.len() == 1 {
        return;
    }
    for i in 0..sizes.len() - 1 {
        for j in i + 1..sizes.len() {
            let (a, b) = (sizes[i], sizes[j]);
            sizes[i] = a + b;
            sizes.swap_remove(j);
            dfs(weight, sizes, product * weight(a, b), depth + 1, sums);
            if j < sizes.len() {
                let moved = sizes[j];
                sizes[j] = b;
                sizes.push(moved);
            } else {
                sizes.push(b);
            }
            sizes[i] = a;
        }
    }
}

/// Truncated partition functions for every k by brute-force enumeration;
/// index k-1 holds Z(n, k).
pub fn brute_force_partition_all_k(kernel: KernelKind, n: usize) -> Vec<BigUint> {
    enumerate_weighted(n, move |a, b| kernel.kappa(a, b) as u128)
        .into_iter()
        .map(BigUint::from)
        .collect()
}

pub fn brute_force_partition_function(kernel: KernelKind, n: usize, k: usize) -> BigUint {
    assert!((1..=n).contains(&k));
    brute_force_partition_all_k(kernel, n)[k - 1].clone()
}

/// Counts complete chains one leaf at a time (unit weights).
pub fn brute_force_chain_count(n: usize) -> BigUint {
    BigUint::from(enumerate_weighted(n, |_, _| 1u128)[n - 1])
}

// ---------------------------------------------------------------------------
// Shape-level dynamic programming.
// ---------------------------------------------------------------------------

/// Truncated partition functions for every k by DP over sorted size vectors.
/// Chains through same-shape partitions share their continuation weight, so
/// each level maps a block-size multiset to the total weight reaching it;
/// the transition multiplicity is the number of unordered block pairs with
/// the chosen sizes.
pub fn dp_partition_all_k(kernel: KernelKind, n: u64) -> Vec<BigUint> {
    assert!(n >= 1);
    let mut level: BTreeMap<Vec<u64>, BigUint> = BTreeMap::new();
    level.insert(vec![1; n as usize], BigUint::one());
    let mut out: Vec<BigUint> = Vec::with_capacity(n as usize);
    loop {
        out.push(level.values().sum());
        if level.keys().next().map_or(true, |s| s.len() == 1) {
            return out;
        }
        let mut next: BTreeMap<Vec<u64>, BigUint> = BTreeMap::new();
        for (sizes, weight) in &level {
            let mut runs: Vec<(u64, u64)> = Vec::new();
            for &s in sizes {
                match runs.last_mut() {
                    Some((v, c)) if *v == s => *c += 1,
                    _ => runs.push((s, 1)),
                }
            }
            for x in 0..runs.len() {
                for y in x..runs.len() {
                    let (a, ca) = runs[x];
                    let (b, cb) = runs[y];
                    let mult = if x == y { ca * (ca - 1) / 2 } else { ca * cb };
                    if mult == 0 {
                        continue;
                    }
                    let w = weight * kernel.kappa_big(a, b) * BigUint::from(mult);
                    let mut merged = Vec::with_capacity(sizes.len() - 1);
                    let (mut skip_a, mut skip_b) = (true, true);
                    for &s in sizes {
                        if skip_a && s == a {
                            skip_a = false;
                        } else if skip_b && s == b {
                            skip_b = false;
                        } else {
                            merged.push(s);
                        }
                    }
                    merged.push(a + b);
                    merged.sort_unstable_by(|p, q| q.cmp(p));
                    *next.entry(merged).or_default() += w;
                }
            }
        }
        level = next;
    }
}

pub fn dp_partition_function(kernel: KernelKind, n: u64, k: u64) -> BigUint {
    assert!((1..=n).contains(&k));
    dp_partition_all_k(kernel, n)[(k - 1) as usize].clone()
}

// ---------------------------------------------------------------------------
// Decreasing edge labellings.
// ---------------------------------------------------------------------------

/// Number of edge labellings of a rooted tree whose labels decrease away
/// from the root along every path: a multinomial per vertex.
pub fn decreasing_labelling_count(tree: &RootedTree) -> BigUint {
    let sizes = tree.subtree_sizes();
    let children = tree.children_lists();
    let mut count = BigUint::one();
    for v in 0..tree.n() {
        let mut rest = sizes[v] - 1;
        for &u in &children[v] {
            count *= binomial(rest, sizes[u]);
            rest -= sizes[u];
        }
    }
    count
}

// ---------------------------------------------------------------------------
// Rooted shapes (unlabelled rooted trees).
// ---------------------------------------------------------------------------

/// An unlabelled rooted tree, stored as its multiset of child shapes;
/// entries are (child size, index into the catalog row for that size),
/// sorted descending so equal children sit together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedShape {
    pub children: Vec<(usize, usize)>,
}

/// cat[s] lists every rooted shape with s vertices exactly once
/// (1, 1, 2, 4, 9, 20, 48, ... shapes for s = 1, 2, 3, ...).
pub fn rooted_shape_catalog(n_max: usize) -> Vec<Vec<RootedShape>> {
    let mut cat: Vec<Vec<RootedShape>> = vec![Vec::new(); n_max + 1];
    for s in 1..=n_max {
        let mut shapes = Vec::new();
        let mut current = Vec::new();
        gen_children(&cat, s - 1, (s - 1, usize::MAX), &mut current, &mut shapes);
        cat[s] = shapes;
    }
    cat
}

fn gen_children(
    cat: &[Vec<RootedShape>],
    remaining: usize,
    bound: (usize, usize),
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<RootedShape>,
) {
    if remaining == 0 {
        out.push(RootedShape {
            children: current.clone(),
        });
        return;
    }
    let (bs, bi) = bound;
    for cs in (1..=remaining.min(bs)).rev() {
        let top = if cs == bs {
            bi.min(cat[cs].len() - 1)
        } else {
            cat[cs].len() - 1
        };
        for ci in (0..=top).rev() {
            current.push((cs, ci));
            gen_children(cat, remaining - cs, (cs, ci), current, out);
            current.pop();
        }
    }
}

fn shape_size(shape: &RootedShape) -> usize {
    1 + shape.children.iter().map(|&(cs, _)| cs).sum::<usize>()
}

/// Per-shape decreasing-labelling counts and automorphism-group orders,
/// aligned with the catalog rows.
pub struct ShapeTables {
    pub labellings: Vec<Vec<BigUint>>,
    pub automorphisms: Vec<Vec<BigUint>>,
}

pub fn shape_tables(cat: &[Vec<RootedShape>]) -> ShapeTables {
    let mut labellings: Vec<Vec<BigUint>> = Vec::with_capacity(cat.len());
    let mut automorphisms: Vec<Vec<BigUint>> = Vec::with_capacity(cat.len());
    for row in cat {
        let mut lrow = Vec::with_capacity(row.len());
        let mut arow = Vec::with_capacity(row.len());
        for shape in row {
            let mut lab = BigUint::one();
            let mut aut = BigUint::one();
            let mut rest = (shape_size(shape) - 1) as u64;
            let mut run = 0u64;
            let mut prev = None;
            for &(cs, ci) in &shape.children {
                lab *= binomial(rest, cs as u64);
                rest -= cs as u64;
                lab *= &labellings[cs][ci];
                aut *= &automorphisms[cs][ci];
                run = if prev == Some((cs, ci)) { run + 1 } else { 1 };
                aut *= BigUint::from(run);
                prev = Some((cs, ci));
            }
            lrow.push(lab);
            arow.push(aut);
        }
        labellings.push(lrow);
        automorphisms.push(arow);
    }
    ShapeTables {
        labellings,
        automorphisms,
    }
}

/// Exhaustive sums over the rooted shapes with n vertices. Each shape has
/// n!/|Aut| vertex labellings, so `labelled_trees` must come out n^(n-1),
/// `labelling_weighted_sum` (labelling counts over all labelled rooted
/// trees) must equal n!(n-1)!, and `labelling_shape_sum` (counts divided by
/// automorphisms, the isomorphism-class total) must equal (n-1)!.
pub struct ShapeCensus {
    pub shapes: usize,
    pub labelled_trees: BigUint,
    pub labelling_weighted_sum: BigUint,
    pub labelling_shape_sum: BigRational,
}

pub fn shape_census(n: usize) -> ShapeCensus {
    assert!(n >= 1);
    let cat = rooted_shape_catalog(n);
    let tables = shape_tables(&cat);
    let nf = factorial(n as u64);
    let mut labelled_trees = BigUint::zero();
    let mut weighted = BigUint::zero();
    let mut shape_sum = BigRational::zero();
    for idx in 0..cat[n].len() {
        let aut = &tables.automorphisms[n][idx];
        let lab = &tables.labellings[n][idx];
        let (copies, r) = nf.div_rem(aut);
        assert!(r.is_zero(), "|Aut| divides n!");
        labelled_trees += &copies;
        weighted += lab * &copies;
        shape_sum += BigRational::new(
            BigInt::from_biguint(Sign::Plus, lab.clone()),
            BigInt::from_biguint(Sign::Plus, aut.clone()),
        );
    }
    ShapeCensus {
        shapes: cat[n].len(),
        labelled_trees,
        labelling_weighted_sum: weighted,
        labelling_shape_sum: shape_sum,
    }
}

// ---------------------------------------------------------------------------
// Essential supremum of the empirical product (n a power of two).
// ---------------------------------------------------------------------------

/// Largest attainable empirical partition value for n = 2^p: the product
/// over rounds of perfect pairings, divided by 2^(n-1).
pub fn ess_sup_empirical(p: u32) -> BigRational {
    assert!(p >= 1 && p <= 20, "need n = 2^p with 1 <= p <= 20");
    let n = 1u64 << p;
    let mut factors: Vec<BigUint> = Vec::with_capacity((n - 1) as usize);
    for k in 1..=p {
        let block = 1u64 << (k - 1);
        let stride = 1u64 << k;
        for j in 0..(n >> k) {
            factors.push(BigUint::from(n * n - block * (n + j * stride)));
        }
    }
    // balanced product tree keeps the bignum multiplications cheap
    while factors.len() > 1 {
        factors = factors
            .chunks(2)
            .map(|c| if c.len() == 2 { &c[0] * &c[1] } else { c[0].clone() })
            .collect();
    }
    BigRational::new(
        BigInt::from_biguint(Sign::Plus, factors.pop().unwrap()),
        BigInt::from(BigUint::one() << (n - 1) as usize),
    )
}

/// Maximum empirical partition value over all complete chains, by DFS with
/// memoisation on the sorted size vector.
pub fn brute_max_empirical(n: u64) -> BigRational {
    assert!((2..=10).contains(&n));
    let n2 = n * n;
    let mut memo: HashMap<Vec<u64>, BigUint> = HashMap::new();
    fn best(sizes: &mut Vec<u64>, n2: u64, memo: &mut HashMap<Vec<u64>, BigUint>) -> BigUint {
        if sizes.len() == 1 {
            return BigUint::one();
        }
        let mut key = sizes.clone();
        key.sort_unstable();
        if let Some(v) = memo.get(&key) {
            return v.clone();
        }
        let s: u64 = sizes.iter().map(|x| x * x).sum();
        let factor = BigUint::from(n2 - s);
        let mut max = BigUint::zero();
        for i in 0..sizes.len() - 1 {
            for j in i + 1..sizes.len() {
                let (a, b) = (sizes[i], sizes[j]);
                sizes[i] = a + b;
                sizes.swap_remove(j);
                let sub = best(sizes, n2, memo);
                if j < sizes.len() {
                    let moved = sizes[j];
                    sizes[j] = b;
                    sizes.push(moved);
                } else {
                    sizes.push(b);
                }
                sizes[i] = a;
                if sub > max {
                    max = sub;
                }
            }
        }
        let out = factor * max;
        memo.insert(key, out.clone());
        out
    }
    let mut sizes = vec![1u64; n as usize];
    BigRational::new(
        BigInt::from_biguint(Sign::Plus, best(&mut sizes, n2, &mut memo)),
        BigInt::from(BigUint::one() << (n - 1) as usize),
    )
}

// ---------------------------------------------------------------------------
// Final-tree census and the exact empirical expectation.
// ---------------------------------------------------------------------------

/// Smallest parent encoding over all re-rootings; two trees on the same
/// vertex set get the same key iff they are equal as undirected graphs.
pub fn canonical_unrooted_key(tree: &RootedTree) -> Vec<usize> {
    (0..tree.n())
        .map(|r| tree.reroot(r).expect("valid root").parent_encoding())
        .min()
        .expect("nonempty tree")
}

/// Frequency table over final coalescent trees. Rooted kernels key on the
/// parent encoding; the multiplicative kernel (and `unrooted`) keys on the
/// minimal encoding over all roots.
pub fn tree_census<R: Rng>(
    kernel: KernelKind,
    n: usize,
    reps: u64,
    unrooted: bool,
    rng: &mut R,
) -> BTreeMap<Vec<usize>, u64> {
    assert!((2..=5).contains(&n), "census key space grows as n^(n-1)");
    let mut table: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for _ in 0..reps {
        let trace = run_uniform(kernel, n, rng);
        let key = if unrooted || !kernel.is_rooted() {
            canonical_unrooted_key(&trace.tree_rooted_at(0).expect("complete trace"))
        } else {
            trace.rooted_tree().expect("complete trace").parent_encoding()
        };
        *table.entry(key).or_default() += 1;
    }
    table
}

/// E of the empirical partition value at every truncation depth, by
/// exhaustive chain enumeration in exact rationals: per-step probabilities
/// 2ab/(n^2 - S) against running factors (n^2 - S)/2. Index k-1 holds
/// E[Zhat(n, k)], which must equal Z_MC(n, k).
pub fn mc_empirical_expectation_all_k(n: usize) -> Vec<BigRational> {
    assert!((2..=6).contains(&n), "exhaustive chains only for n <= 6");
    let n2 = (n * n) as u64;
    let mut out = vec![BigRational::zero(); n];
    out[0] = BigRational::one();
    let mut sizes = vec![1u64; n];
    walk_expectation(
        &mut sizes,
        BigRational::one(),
        BigRational::one(),
        1,
        n2,
        &mut out,
    );
    out
}

fn walk_expectation(
    sizes: &mut Vec<u64>,
    prob: BigRational,
    zhat: BigRational,
    depth: usize,
    n2: u64,
    out: &mut [BigRational],
) {
    let s: u64 = sizes.iter().map(|x| x * x).sum();
    let cross = n2 - s;
    for i in 0..sizes.len() - 1 {
        for j in i + 1..sizes.len() {
            let (a, b) = (sizes[i], sizes[j]);
            let p = &prob * BigRational::new(BigInt::from(2 * a * b), BigInt::from(cross));
            let z = &zhat * BigRational::new(BigInt::from(cross), BigInt::from(2u32));
            out[depth] += &p * &z;
            if sizes.len() > 2 {
                sizes[i] = a + b;
                sizes.swap_remove(j);
                walk_expectation(sizes, p, z, depth + 1, n2, out);
                if j < sizes.len() {
                    let moved = sizes[j];
                    sizes[j] = b;
                    sizes.push(moved);
                } else {
                    sizes.push(b);
                }
                sizes[i] = a;
            }
        }
    }
}
