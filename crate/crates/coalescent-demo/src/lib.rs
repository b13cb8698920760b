//! Browser bindings for three interactive views of the library:
//! largest-component growth across the kernels, spanning-tree weight
//! samples against their limit, and the susceptibility curve against
//! its survival-probability prediction.
//!
//! Every export is a thin wrapper over a plain function so the logic
//! stays testable on the native target. Builds single-threaded; the
//! parallel feature of the core crate stays off.

use wasm_bindgen::prelude::wasm_bindgen;

use coalescent::engine::run_uniform;
use coalescent::er::sample_gnp;
use coalescent::experiment::derive_stream;
use coalescent::mst::{kruskal, WeightModel};
use coalescent::numerics::{alpha, zeta3};
use coalescent::KernelKind;

fn parse_kernel(name: &str) -> KernelKind {
    match name {
        "kingman" => KernelKind::Kingman,
        "additive" => KernelKind::Additive,
        "multiplicative" => KernelKind::Multiplicative,
        other => panic!("unknown kernel {other:?}"),
    }
}

/// Largest component size after each merge of one uniform chain,
/// starting with the all-singleton state: n values from 1 to n.
pub fn largest_component_growth(kernel: KernelKind, n: usize, seed: u64) -> Vec<u32> {
    let mut rng = derive_stream(seed, 0);
    let trace = run_uniform(kernel, n, &mut rng);
    let mut largest = 1u64;
    let mut out = Vec::with_capacity(n);
    out.push(1);
    for r in &trace.records {
        largest = largest.max(r.size_a + r.size_b);
        out.push(largest as u32);
    }
    out
}

/// Spanning-tree weights of complete graphs with uniform edge weights,
/// one entry per replicate.
pub fn spanning_tree_weights(n: usize, reps: u64, seed: u64) -> Vec<f64> {
    (0..reps)
        .map(|i| {
            let mut rng = derive_stream(seed, i);
            kruskal(n, WeightModel::Uniform01, &mut rng).total_weight
        })
        .collect()
}

/// Susceptibility curve: for each mean degree c on a uniform grid of
/// `points` values in (0, c_max], sample one graph at edge probability
/// c/n and record [c, sum of squared component sizes over n^2,
/// predicted limit alpha(c)^2], flattened in row order.
pub fn susceptibility_curve(n: usize, c_max: f64, points: usize, seed: u64) -> Vec<f64> {
    assert!(points >= 1 && c_max > 0.0);
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let c = c_max * (i + 1) as f64 / points as f64;
        let mut rng = derive_stream(seed, i as u64);
        let g = sample_gnp(n, c / n as f64, &mut rng);
        let sum_sq: u64 = g.component_sizes().iter().map(|&s| s * s).sum();
        let a = alpha(c);
        out.push(c);
        out.push(sum_sq as f64 / (n as f64 * n as f64));
        out.push(a * a);
    }
    out
}

#[wasm_bindgen(js_name = largestComponentGrowth)]
pub fn largest_component_growth_js(kernel: &str, n: usize, seed: u64) -> Vec<u32> {
    largest_component_growth(parse_kernel(kernel), n, seed)
}

#[wasm_bindgen(js_name = spanningTreeWeights)]
pub fn spanning_tree_weights_js(n: usize, reps: u64, seed: u64) -> Vec<f64> {
    spanning_tree_weights(n, reps, seed)
}

#[wasm_bindgen(js_name = susceptibilityCurve)]
pub fn susceptibility_curve_js(n: usize, c_max: f64, points: usize, seed: u64) -> Vec<f64> {
    susceptibility_curve(n, c_max, points, seed)
}

/// Limit of the mean spanning-tree weight, for the reference line.
#[wasm_bindgen(js_name = zetaThree)]
pub fn zeta_three_js() -> f64 {
    zeta3()
}
