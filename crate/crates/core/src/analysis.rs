//! Closed-form operation and workspace counts, and measured rounding error.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::BilinearTriple;
use crate::composer::ChainSpec;
use crate::error::{Error, Result};
use crate::executor::RecursivePlan;
use crate::graph::Strategy;
use crate::matrix::{naive_multiply, Distribution};

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub n: usize,
    pub chain: String,
    pub cutoff: usize,
    pub base_multiplies: u64,
    pub block_multiplies: u64,
    pub block_adds: u64,
    pub element_adds: u64,
    pub block_scalings: u64,
    /// Fused-schedule workspace, in elements.
    pub workspace_elements: u64,
    /// `n^3 / base_multiplies`.
    pub speedup_vs_classical: f64,
}

impl CostReport {
    pub fn classical_multiplies(&self) -> u64 {
        (self.n as u64).pow(3)
    }
}

#[derive(Clone, Copy, Default)]
struct Counts {
    base: u64,
    block_multiplies: u64,
    block_adds: u64,
    element_adds: u64,
    scalings: u64,
}

/// Additions one application of `t` performs, with signs folded.
fn adds_per_level(t: &BilinearTriple) -> u64 {
    let r = t.rank();
    let p2 = t.p() * t.p();
    ((t.u().nnz() - r) + (t.v().nnz() - r) + (t.w().nnz().saturating_sub(p2))) as u64
}

fn scalings_per_level(t: &BilinearTriple) -> u64 {
    (t.u().non_unit_count() + t.v().non_unit_count() + t.w().non_unit_count()) as u64
}

fn counts(members: &[BilinearTriple], side: usize, cutoff: usize, level: usize) -> Result<Counts> {
    let Some((t, rest)) = members.split_first().filter(|_| side > cutoff) else {
        return Ok(Counts {
            base: (side as u64).pow(3),
            ..Counts::default()
        });
    };
    let p = t.p();
    if !side.is_multiple_of(p) {
        return Err(Error::IndivisibleAtLevel { level, n: side, p });
    }
    let m = side / p;
    let sub = counts(rest, m, cutoff, level + 1)?;
    let r = t.rank() as u64;
    let adds = adds_per_level(t);
    Ok(Counts {
        base: r * sub.base,
        block_multiplies: r + r * sub.block_multiplies,
        block_adds: adds + r * sub.block_adds,
        element_adds: adds * (m * m) as u64 + r * sub.element_adds,
        scalings: scalings_per_level(t) + r * sub.scalings,
    })
}

fn workspace(members: &[BilinearTriple], side: usize, cutoff: usize, strategy: Strategy, level: usize) -> Result<u64> {
    let Some((t, rest)) = members.split_first().filter(|_| side > cutoff) else {
        return Ok(0);
    };
    let p = t.p();
    if !side.is_multiple_of(p) {
        return Err(Error::IndivisibleAtLevel { level, n: side, p });
    }
    let m = side / p;
    let buffers = match strategy {
        Strategy::Fused => 2,
        Strategy::ProductMajor => 3,
    };
    Ok(buffers * (m * m) as u64 + workspace(rest, m, cutoff, strategy, level + 1)?)
}

/// Predicted counters of [`crate::executor::recursive_multiply`] for `chain` on size `n`.
pub fn count_model(chain: &ChainSpec, n: usize, cutoff: usize) -> Result<CostReport> {
    if cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
    }
    let c = counts(chain.members(), n, cutoff, 0)?;
    Ok(CostReport {
        n,
        chain: chain.label(),
        cutoff,
        base_multiplies: c.base,
        block_multiplies: c.block_multiplies,
        block_adds: c.block_adds,
        element_adds: c.element_adds,
        block_scalings: c.scalings,
        workspace_elements: workspace(chain.members(), n, cutoff, Strategy::Fused, 0)?,
        speedup_vs_classical: (n as f64).powi(3) / c.base as f64,
    })
}

/// Temporary elements needed with full recursion: per level, the T and S buffers
/// (fused) or T, S and P (product-major), plus whatever the next level needs.
pub fn workspace_model(chain: &ChainSpec, n: usize, strategy: Strategy) -> Result<u64> {
    workspace(chain.members(), n, 1, strategy, 0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorProfile {
    /// Largest per-trial error.
    pub max: f64,
    /// Median of the per-trial errors.
    pub median: f64,
}

/// Measures `max |C - C_naive| / (1 + |C_naive|)` per trial with full recursion
/// (cutoff 1). Trial `i` draws its inputs from stream `i` of a generator keyed by `seed`.
pub fn error_profile(
    chain: &ChainSpec,
    n: usize,
    trials: usize,
    seed: u64,
    dist: Distribution,
) -> Result<ErrorProfile> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let plan = RecursivePlan::new(chain, 1, Strategy::Fused)?;
    plan.check_size(n)?;
    let mut errors = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let a = dist.sample(n, &mut rng);
        let b = dist.sample(n, &mut rng);
        let (c, _) = plan.multiply(&a, &b)?;
        errors.push(c.max_rel_error(&naive_multiply(&a, &b)?)?);
    }
    errors.sort_by(f64::total_cmp);
    let mid = errors.len() / 2;
    let median = if errors.len() % 2 == 1 {
        errors[mid]
    } else {
        (errors[mid - 1] + errors[mid]) / 2.0
    };
    Ok(ErrorProfile {
        max: errors[errors.len() - 1],
        median,
    })
}
