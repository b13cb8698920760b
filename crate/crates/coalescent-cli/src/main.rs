//! Command-line runner for the coalescent library.
//!
//! Exit codes: 0 on success, 1 on usage or I/O errors, 2 when a
//! verification subcommand finds a failing check.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use coalescent::engine::run_uniform;
use coalescent::entropy::estimate_zeta_mc;
use coalescent::er::{pair_count, run_graph_process, sample_gnp};
use coalescent::exact::{
    brute_force_chain_count, brute_force_partition_all_k, chain_count,
    closed_form_partition_function, dp_partition_all_k, factorial, renyi_forest_count,
};
use coalescent::experiment::{
    derive_stream, run_replicated, ExperimentResult, DEFAULT_SEED, GENERATOR_ID,
};
use coalescent::mst::{frieze_estimate, tree_height_by_kernel};
use coalescent::numerics::{alpha, zeta3, zeta3_integral, zeta_mc_constant, zmc_integral};
use coalescent::KernelKind;

#[derive(Parser)]
#[command(
    name = "coalescent",
    version,
    about = "Simulate discrete coalescents, verify their exact counts, and estimate their limits",
    after_help = "Set COALESCENT_THREADS to fix the worker-pool size. Results are \
                  deterministic for a given seed at any thread count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one realization and emit its trajectory
    Simulate(SimulateArgs),
    /// Cross-check enumeration, dynamic programming, and closed forms
    VerifyExact(VerifyExactArgs),
    /// Estimate the mean minimum spanning tree weight on the complete graph
    EstimateFrieze(EstimateArgs),
    /// Estimate the empirical log-partition constant of the pair chain
    EstimateZmc(EstimateArgs),
    /// Mean squared component fraction across a grid of mean degrees
    SusceptibilityProfile(SusceptibilityArgs),
    /// Evaluate the two limit integrals against series values
    Integrals(IntegralsArgs),
    /// Sample tree heights for one chain
    Heights(HeightsArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Process {
    Kingman,
    Additive,
    Multiplicative,
    /// Edge-arrival graph process with component statistics per edge
    Graph,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Kernel {
    Kingman,
    Additive,
    Multiplicative,
}

impl Kernel {
    fn kind(self) -> KernelKind {
        match self {
            Kernel::Kingman => KernelKind::Kingman,
            Kernel::Additive => KernelKind::Additive,
            Kernel::Multiplicative => KernelKind::Multiplicative,
        }
    }

    fn slug(self) -> &'static str {
        match self {
            Kernel::Kingman => "kingman",
            Kernel::Additive => "additive",
            Kernel::Multiplicative => "multiplicative",
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Which chain to realize
    #[arg(long, value_enum)]
    process: Process,
    /// Number of vertices
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Master seed (default 0xC0A1E5CE)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Keep every k-th row of a graph trajectory (joins are always kept)
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    record_every: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyExactArgs {
    /// Largest n for the exhaustive enumeration checks (capped at 8)
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(2..=8))]
    n: u64,
    /// Largest n for the dynamic-programming checks
    #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u64).range(2..=60))]
    dp_n: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Number of vertices per replicate
    #[arg(long)]
    n: Option<usize>,
    /// Independent replicates
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    reps: Option<u64>,
    /// Master seed (default 0xC0A1E5CE)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SusceptibilityArgs {
    /// Number of vertices per sampled graph
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Replicates per mean-degree value
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    /// Mean degrees c, sampled at edge probability c/n
    #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5,2.0,2.5,3.0")]
    c_values: Vec<f64>,
    /// Master seed (default 0xC0A1E5CE)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct IntegralsArgs {
    /// Tolerance for the spanning-tree weight integral
    #[arg(long, default_value_t = 1e-6)]
    tol_weight: f64,
    /// Tolerance for the entropy integral
    #[arg(long, default_value_t = 1e-5)]
    tol_entropy: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct HeightsArgs {
    /// Which chain's tree to measure
    #[arg(long, value_enum)]
    kernel: Kernel,
    /// Number of vertices
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Independent replicates
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    /// Master seed (default 0xC0A1E5CE)
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(v) = std::env::var("COALESCENT_THREADS") {
        match v.parse::<usize>() {
            Ok(k) if k >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
            _ => {
                eprintln!("COALESCENT_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }
    let outcome = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::VerifyExact(a) => cmd_verify_exact(a),
        Command::EstimateFrieze(a) => cmd_estimate_frieze(a),
        Command::EstimateZmc(a) => cmd_estimate_zmc(a),
        Command::SusceptibilityProfile(a) => cmd_susceptibility(a),
        Command::Integrals(a) => cmd_integrals(a),
        Command::Heights(a) => cmd_heights(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_result(
    result: &ExperimentResult,
    format: OutputFormat,
    output: &Option<PathBuf>,
) -> Result<u8, String> {
    let text = match format {
        OutputFormat::Json => {
            let mut t = result.to_json();
            t.push('\n');
            t
        }
        OutputFormat::Csv => result.to_csv(),
    };
    emit(output, &text)?;
    Ok(0)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<u8, String> {
    if a.n < 2 {
        return Err("simulate needs --n of at least 2".into());
    }
    let mut rng = derive_stream(a.seed, 0);
    let (csv, rows) = match a.process {
        Process::Graph => {
            let run = run_graph_process(a.n, pair_count(a.n), a.record_every, true, &mut rng);
            let rows = run
                .steps
                .iter()
                .map(|st| {
                    json!({
                        "m": st.m, "tau": st.tau, "chi_num": st.chi_num,
                        "l": st.l, "s": st.s, "joined": st.joined,
                    })
                })
                .collect::<Vec<_>>();
            (run.trajectory_csv(), rows)
        }
        Process::Kingman | Process::Additive | Process::Multiplicative => {
            let kind = match a.process {
                Process::Kingman => KernelKind::Kingman,
                Process::Additive => KernelKind::Additive,
                _ => KernelKind::Multiplicative,
            };
            let trace = run_uniform(kind, a.n, &mut rng);
            let rows = trace
                .records
                .iter()
                .map(|r| {
                    json!({
                        "step": r.step, "u": r.u + 1, "v": r.v + 1,
                        "size_a": r.size_a, "size_b": r.size_b,
                        "pre_sum_sq": r.pre_sum_sq,
                    })
                })
                .collect::<Vec<_>>();
            (trace.csv(), rows)
        }
    };
    let text = match a.format {
        OutputFormat::Csv => csv,
        OutputFormat::Json => {
            let doc = json!({
                "experiment": "simulate",
                "process": match a.process {
                    Process::Kingman => "kingman",
                    Process::Additive => "additive",
                    Process::Multiplicative => "multiplicative",
                    Process::Graph => "graph",
                },
                "n": a.n,
                "seed": a.seed,
                "record_every": a.record_every,
                "generator_id": GENERATOR_ID,
                "rows": rows,
            });
            let mut t = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            t.push('\n');
            t
        }
    };
    emit(&a.output, &text)?;
    Ok(0)
}

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn cmd_verify_exact(a: &VerifyExactArgs) -> Result<u8, String> {
    let mut checks = Vec::new();

    for kernel in KernelKind::ALL {
        let mut bad = None;
        let mut compared = 0u64;
        for n in 2..=a.n as usize {
            let brute = brute_force_partition_all_k(kernel, n);
            for k in 1..=n {
                let closed = closed_form_partition_function(kernel, n as u64, k as u64);
                if brute[k - 1] != closed {
                    bad.get_or_insert(format!("n={n} k={k}"));
                }
                compared += 1;
            }
        }
        checks.push(Check {
            name: format!("enumeration-vs-closed-{kernel:?}").to_lowercase(),
            pass: bad.is_none(),
            detail: bad.unwrap_or(format!("{compared} values, n <= {}", a.n)),
        });
    }

    let mut bad = None;
    for n in 2..=a.n {
        if brute_force_chain_count(n as usize) != chain_count(n) {
            bad.get_or_insert(format!("n={n}"));
        }
    }
    checks.push(Check {
        name: "chain-count".into(),
        pass: bad.is_none(),
        detail: bad.unwrap_or(format!("n <= {}", a.n)),
    });

    for kernel in [KernelKind::Additive, KernelKind::Multiplicative] {
        let mut bad = None;
        let mut compared = 0u64;
        for n in 2..=a.dp_n {
            let dp = dp_partition_all_k(kernel, n);
            for k in 1..=n {
                let closed = if kernel == KernelKind::Additive {
                    closed_form_partition_function(kernel, n, k)
                } else {
                    renyi_forest_count(n, k) * factorial(k - 1)
                };
                if dp[(k - 1) as usize] != closed {
                    bad.get_or_insert(format!("n={n} k={k}"));
                }
                compared += 1;
            }
        }
        checks.push(Check {
            name: format!("dp-vs-closed-{kernel:?}").to_lowercase(),
            pass: bad.is_none(),
            detail: bad.unwrap_or(format!("{compared} values, n <= {}", a.dp_n)),
        });
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let text = match a.format {
        OutputFormat::Json => {
            let doc = json!({
                "experiment": "verify-exact",
                "n": a.n,
                "dp_n": a.dp_n,
                "all_pass": all_pass,
                "checks": checks.iter().map(|c| json!({
                    "name": c.name, "pass": c.pass, "detail": c.detail,
                })).collect::<Vec<_>>(),
            });
            let mut t = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            t.push('\n');
            t
        }
        OutputFormat::Csv => {
            let mut t = String::from("name,pass,detail\n");
            for c in &checks {
                let _ = writeln!(t, "{},{},{}", c.name, c.pass, c.detail);
            }
            t
        }
    };
    emit(&a.output, &text)?;
    Ok(if all_pass { 0 } else { 2 })
}

fn cmd_estimate_frieze(a: &EstimateArgs) -> Result<u8, String> {
    let n = a.n.unwrap_or(2000);
    if n < 2 {
        return Err("estimate-frieze needs --n of at least 2".into());
    }
    let start = Instant::now();
    let result = frieze_estimate(n, a.reps.unwrap_or(50), a.seed)
        .with_extra("series_reference", zeta3())
        .with_elapsed_since(start);
    emit_result(&result, a.format, &a.output)
}

fn cmd_estimate_zmc(a: &EstimateArgs) -> Result<u8, String> {
    let n = a.n.unwrap_or(10_000);
    if n < 2 {
        return Err("estimate-zmc needs --n of at least 2".into());
    }
    let start = Instant::now();
    let result = estimate_zeta_mc(n, a.reps.unwrap_or(20), a.seed).with_elapsed_since(start);
    emit_result(&result, a.format, &a.output)
}

fn cmd_susceptibility(a: &SusceptibilityArgs) -> Result<u8, String> {
    if a.c_values.is_empty() {
        return Err("susceptibility-profile needs at least one --c-values entry".into());
    }
    if a.c_values.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
        return Err("--c-values entries must be finite and nonnegative".into());
    }
    let start = Instant::now();
    let n = a.n;
    let mut rows = Vec::new();
    for (i, &c) in a.c_values.iter().enumerate() {
        let values = run_replicated(a.seed.wrapping_add(i as u64), a.reps, |_, mut rng| {
            let g = sample_gnp(n, c / n as f64, &mut rng);
            let sum_sq: u64 = g.component_sizes().iter().map(|&s| s * s).sum();
            sum_sq as f64 / (n as f64 * n as f64)
        });
        let (mean, stderr) = coalescent::experiment::mean_stderr(&values);
        let a_c = alpha(c);
        rows.push((c, mean, stderr, a_c * a_c));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let text = match a.format {
        OutputFormat::Json => {
            let doc = json!({
                "experiment": "susceptibility-profile",
                "n": a.n,
                "reps": a.reps,
                "seed": a.seed,
                "generator_id": GENERATOR_ID,
                "rows": rows.iter().map(|&(c, mean, stderr, pred)| json!({
                    "c": c,
                    "mean_chi_over_n": mean,
                    "stderr": stderr,
                    "alpha_sq": pred,
                    "gap": (mean - pred).abs(),
                })).collect::<Vec<_>>(),
                "elapsed_secs": elapsed,
            });
            let mut t = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            t.push('\n');
            t
        }
        OutputFormat::Csv => {
            let mut t = String::from("c,mean_chi_over_n,stderr,alpha_sq,gap,n,reps,seed\n");
            for &(c, mean, stderr, pred) in &rows {
                let _ = writeln!(
                    t,
                    "{c},{mean},{stderr},{pred},{},{},{},{}",
                    (mean - pred).abs(),
                    a.n,
                    a.reps,
                    a.seed
                );
            }
            t
        }
    };
    emit(&a.output, &text)?;
    Ok(0)
}

fn cmd_integrals(a: &IntegralsArgs) -> Result<u8, String> {
    let start = Instant::now();
    let weight = zeta3_integral();
    let weight_ref = 2.0 * zeta3();
    let entropy = zmc_integral();
    let entropy_ref = 2.0 * (zeta_mc_constant() + std::f64::consts::LN_2);
    let rows = [
        ("giant-weight", weight, weight_ref, a.tol_weight),
        ("pair-entropy", entropy, entropy_ref, a.tol_entropy),
    ];
    let all_pass = rows.iter().all(|&(_, v, r, tol)| (v - r).abs() <= tol);
    let text = match a.format {
        OutputFormat::Json => {
            let doc = json!({
                "experiment": "integrals",
                "all_pass": all_pass,
                "rows": rows.iter().map(|&(name, v, r, tol)| json!({
                    "name": name,
                    "integral": v,
                    "series_reference": r,
                    "error": (v - r).abs(),
                    "tolerance": tol,
                    "pass": (v - r).abs() <= tol,
                })).collect::<Vec<_>>(),
                "elapsed_secs": start.elapsed().as_secs_f64(),
            });
            let mut t = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            t.push('\n');
            t
        }
        OutputFormat::Csv => {
            let mut t = String::from("name,integral,series_reference,error,tolerance,pass\n");
            for &(name, v, r, tol) in &rows {
                let _ = writeln!(
                    t,
                    "{name},{v},{r},{},{tol},{}",
                    (v - r).abs(),
                    (v - r).abs() <= tol
                );
            }
            t
        }
    };
    emit(&a.output, &text)?;
    Ok(if all_pass { 0 } else { 2 })
}

fn cmd_heights(a: &HeightsArgs) -> Result<u8, String> {
    if a.n < 2 {
        return Err("heights needs --n of at least 2".into());
    }
    let start = Instant::now();
    let kind = a.kernel.kind();
    let n = a.n;
    let values = run_replicated(a.seed, a.reps, move |_, mut rng| {
        tree_height_by_kernel(kind, n, &mut rng) as f64
    });
    let result = ExperimentResult::from_values(
        &format!("heights-{}", a.kernel.slug()),
        a.n as u64,
        a.reps,
        a.seed,
        &values,
    )
    .with_extra("mean_over_log_n", {
        let (mean, _) = coalescent::experiment::mean_stderr(&values);
        mean / (a.n as f64).ln()
    })
    .with_elapsed_since(start);
    emit_result(&result, a.format, &a.output)
}
