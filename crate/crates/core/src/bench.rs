//! Wall-clock comparison of recursion chains against the classical product.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::composer::ChainSpec;
use crate::error::{Error, Result};
use crate::executor::RecursivePlan;
use crate::graph::Strategy;
use crate::matrix::{naive_multiply, DenseMatrix};

pub const CSV_HEADER: &str = "n,chain,cutoff,reps,median_seconds,gflops,max_rel_error";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub chain: String,
    pub cutoff: usize,
    pub reps: usize,
    pub median_seconds: f64,
    /// `2 n^3 / median_seconds / 1e9`, whatever the algorithm.
    pub gflops: f64,
    /// -1 when the result was not checked.
    pub max_rel_error: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Skipped (size, chain) pairs.
    pub warnings: Vec<String>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6e},{:.3},{:e}",
                r.n, r.chain, r.cutoff, r.reps, r.median_seconds, r.gflops, r.max_rel_error
            );
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub chains: Vec<ChainSpec>,
    pub cutoff: usize,
    pub reps: usize,
    pub seed: u64,
    pub check: bool,
}

/// Median of `reps` timed runs after one untimed warmup.
pub fn time_median<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    f()?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64());
        drop(out);
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    Ok(if times.len() % 2 == 1 {
        times[mid]
    } else {
        (times[mid - 1] + times[mid]) / 2.0
    })
}

/// Inputs for size `n`: uniform [-1, 1], drawn from stream `n` of a generator keyed by `seed`.
pub fn bench_inputs(n: usize, seed: u64) -> (DenseMatrix, DenseMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    let a = DenseMatrix::random_uniform(n, &mut rng);
    let b = DenseMatrix::random_uniform(n, &mut rng);
    (a, b)
}

/// Sizes run largest first; within a size the classical baseline runs first,
/// then the other chains in the given order.
pub fn bench_run(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.reps < 3 {
        return Err(Error::InvalidArgument(format!("reps must be >= 3, got {}", cfg.reps)));
    }
    if cfg.cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
    }
    let mut chains = vec![ChainSpec::empty()];
    chains.extend(cfg.chains.iter().filter(|c| !c.is_empty()).cloned());
    let plans = chains
        .iter()
        .map(|c| RecursivePlan::new(c, cfg.cutoff, Strategy::Fused))
        .collect::<Result<Vec<_>>>()?;

    let mut sizes = cfg.sizes.clone();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes.dedup();

    let mut report = BenchReport::default();
    for &n in &sizes {
        let (a, b) = bench_inputs(n, cfg.seed);
        let oracle = if cfg.check { Some(naive_multiply(&a, &b)?) } else { None };
        for (chain, plan) in chains.iter().zip(&plans) {
            if let Err(e) = plan.check_size(n) {
                report.warnings.push(format!("skipped n={n} chain={}: {e}", chain.label()));
                continue;
            }
            let seconds = if chain.is_empty() {
                time_median(cfg.reps, || naive_multiply(&a, &b))?
            } else {
                time_median(cfg.reps, || plan.multiply(&a, &b))?
            };
            let max_rel_error = match &oracle {
                Some(o) => plan.multiply(&a, &b)?.0.max_rel_error(o)?,
                None => -1.0,
            };
            report.rows.push(BenchRow {
                n,
                chain: chain.label(),
                cutoff: cfg.cutoff,
                reps: cfg.reps,
                median_seconds: seconds,
                gflops: 2.0 * (n as f64).powi(3) / seconds / 1e9,
                max_rel_error,
            });
        }
    }
    Ok(report)
}
