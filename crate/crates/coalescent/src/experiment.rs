//! Replicate fan-out over derived RNG streams, order-fixed reduction, and
//! serializable estimator results.
//!
//! Every estimator in this crate follows the same recipe: a 64-bit master
//! seed plus a replicate index determine a ChaCha12 stream, replicates run
//! independently (in parallel when the `parallel` feature is on), and the
//! per-replicate values are reduced by pairwise summation in replicate
//! order. Output is therefore bit-identical at any worker-thread count.

use std::collections::BTreeMap;
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

/// Names the seed-to-stream construction below; recorded in every result so
/// archived numbers stay attributable if the construction ever changes.
pub const GENERATOR_ID: &str = "chacha12-splitmix64-v1";

/// Master seed used when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0xC0A1E5CE;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for one replicate: the 256-bit ChaCha12 key is the splitmix64
/// orbit of `master_seed` xor the index times the golden-ratio increment.
/// Distinct indices give unrelated keys; the same pair always gives the
/// same stream.
pub fn derive_stream(master_seed: u64, replicate_index: u64) -> ChaCha12Rng {
    let mut state = master_seed ^ replicate_index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}

/// Runs `reps` replicates of `f`, each on its own derived stream, and
/// returns their values in replicate order. With the `parallel` feature the
/// replicates execute on the rayon pool; the indexed collect preserves
/// order, so the output does not depend on the thread count.
pub fn run_replicated<T, F>(seed: u64, reps: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, ChaCha12Rng) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..reps)
            .into_par_iter()
            .map(|i| f(i, derive_stream(seed, i)))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..reps).map(|i| f(i, derive_stream(seed, i))).collect()
    }
}

/// Fixed-order pairwise summation: deterministic and with logarithmic
/// rounding depth.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Sample mean and standard error (sample stdev over sqrt reps).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n >= 1, "mean of an empty sample");
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Point estimate with its provenance: the full (experiment, n, reps, seed,
/// generator) tuple needed to reproduce it, plus named auxiliary scalars.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub n: u64,
    pub reps: u64,
    pub seed: u64,
    pub generator_id: String,
    pub mean: f64,
    pub stderr: f64,
    pub extra: BTreeMap<String, f64>,
    pub elapsed_secs: f64,
}

impl ExperimentResult {
    pub fn from_values(experiment: &str, n: u64, reps: u64, seed: u64, values: &[f64]) -> Self {
        let (mean, stderr) = mean_stderr(values);
        ExperimentResult {
            experiment: experiment.to_string(),
            n,
            reps,
            seed,
            generator_id: GENERATOR_ID.to_string(),
            mean,
            stderr,
            extra: BTreeMap::new(),
            elapsed_secs: 0.0,
        }
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    pub fn with_elapsed_since(mut self, start: Instant) -> Self {
        self.elapsed_secs = start.elapsed().as_secs_f64();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// The reproducible part: identical across reruns of the same spec.
    pub fn json_without_elapsed(&self) -> String {
        let mut v = serde_json::to_value(self).expect("result serializes");
        v.as_object_mut().expect("object").remove("elapsed_secs");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    /// Header line plus one data row; extra columns in key order.
    pub fn to_csv(&self) -> String {
        let mut header = "experiment,n,reps,seed,generator_id,mean,stderr".to_string();
        let mut row = format!(
            "{},{},{},{},{},{},{}",
            self.experiment, self.n, self.reps, self.seed, self.generator_id, self.mean, self.stderr
        );
        for (k, v) in &self.extra {
            header.push(',');
            header.push_str(k);
            row.push(',');
            row.push_str(&v.to_string());
        }
        format!("{header}\n{row}\n")
    }
}
