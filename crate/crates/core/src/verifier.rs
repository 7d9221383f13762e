//! Proofs that a triple computes matrix multiplication.
//!
//! A triple is correct iff for all flat block indices `x = (i, k)` of A,
//! `y = (k', j)` of B and `z = (i', j')` of C,
//! `sum_q U[x][q] V[y][q] W[z][q] = [k = k' and i = i' and j = j']`.
//! The exhaustive mode checks all `(p^2)^3` of these identities exactly; the
//! sampled mode evaluates the algorithm on random integer operands in exact
//! arithmetic, which is a polynomial identity test on the same equations.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::BilinearTriple;
use crate::coefficient::Coefficient;
use crate::error::Result;
use crate::executor::execute;
use crate::graph::build_bilinear_graph;
use crate::matrix::{naive_multiply, Distribution};

pub const MAX_VIOLATIONS: usize = 32;

/// Largest split factor for which [`VerifyMode::default_for`] picks the exhaustive check.
pub const EXHAUSTIVE_LIMIT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { seed: u64, trials: usize },
}

impl VerifyMode {
    /// Exhaustive up to `p = 6`, otherwise 20 sampled integer trials.
    pub fn default_for(p: usize) -> Self {
        if p <= EXHAUSTIVE_LIMIT {
            VerifyMode::Exhaustive
        } else {
            VerifyMode::Sampled { seed: 0, trials: 20 }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A tensor identity that does not hold.
    Tensor {
        x: usize,
        y: usize,
        z: usize,
        expected: Coefficient,
        got: Coefficient,
    },
    /// An output entry that differed from the exact classical product.
    Sample {
        trial: usize,
        z: usize,
        expected: Coefficient,
        got: Coefficient,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Tensor { x, y, z, expected, got } => {
                write!(f, "x={x} y={y} z={z}: expected {expected}, got {got}")
            }
            Violation::Sample { trial, z, expected, got } => {
                write!(f, "trial {trial} C[{z}]: expected {expected}, got {got}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub passed: bool,
    /// Number of identities compared.
    pub checked: usize,
    /// Total failures found; only the first [`MAX_VIOLATIONS`] are kept in `violations`.
    pub failures: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    fn from_failures(checked: usize, failures: usize, violations: Vec<Violation>) -> Self {
        VerifyReport {
            passed: failures == 0,
            checked,
            failures,
            violations,
        }
    }
}

pub fn brent_check(t: &BilinearTriple, mode: VerifyMode) -> VerifyReport {
    match mode {
        VerifyMode::Exhaustive => exhaustive(t),
        VerifyMode::Sampled { seed, trials } => sampled(t, seed, trials),
    }
}

fn exhaustive(t: &BilinearTriple) -> VerifyReport {
    let p = t.p();
    let b = p * p;
    let mut tensor = vec![Coefficient::ZERO; b * b * b];
    for q in 0..t.rank() {
        let us = t.u().column_nonzeros(q);
        let vs = t.v().column_nonzeros(q);
        let ws = t.w().column_nonzeros(q);
        for &(x, u) in &us {
            for &(y, v) in &vs {
                let uv = u * v;
                for &(z, w) in &ws {
                    tensor[(x * b + y) * b + z] += uv * w;
                }
            }
        }
    }
    let mut failures = 0;
    let mut violations = Vec::new();
    for x in 0..b {
        let (i, k) = (x / p, x % p);
        for y in 0..b {
            let (k2, j) = (y / p, y % p);
            for z in 0..b {
                let (i2, j2) = (z / p, z % p);
                let expected = if k == k2 && i == i2 && j == j2 {
                    Coefficient::ONE
                } else {
                    Coefficient::ZERO
                };
                let got = tensor[(x * b + y) * b + z];
                if got != expected {
                    failures += 1;
                    if violations.len() < MAX_VIOLATIONS {
                        violations.push(Violation::Tensor { x, y, z, expected, got });
                    }
                }
            }
        }
    }
    VerifyReport::from_failures(b * b * b, failures, violations)
}

fn sampled(t: &BilinearTriple, seed: u64, trials: usize) -> VerifyReport {
    let p = t.p();
    let b = p * p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut violations = Vec::new();
    for trial in 0..trials {
        let a: Vec<Coefficient> = (0..b).map(|_| Coefficient::integer(rng.random_range(-9..=9))).collect();
        let bm: Vec<Coefficient> = (0..b).map(|_| Coefficient::integer(rng.random_range(-9..=9))).collect();
        let products: Vec<Coefficient> = (0..t.rank())
            .map(|q| {
                let left: Coefficient = t.u().column_nonzeros(q).iter().map(|&(x, c)| c * a[x]).sum();
                let right: Coefficient = t.v().column_nonzeros(q).iter().map(|&(y, c)| c * bm[y]).sum();
                left * right
            })
            .collect();
        for z in 0..b {
            let (i, j) = (z / p, z % p);
            let got: Coefficient = t.w().row_nonzeros(z).iter().map(|&(q, c)| c * products[q]).sum();
            let expected: Coefficient = (0..p).map(|k| a[i * p + k] * bm[k * p + j]).sum();
            if got != expected {
                failures += 1;
                if violations.len() < MAX_VIOLATIONS {
                    violations.push(Violation::Sample { trial, z, expected, got });
                }
            }
        }
    }
    VerifyReport::from_failures(trials * b, failures, violations)
}

/// Runs the one-level algorithm in `f64` on uniform [-1, 1] inputs and returns the
/// largest `|C_fast - C_naive| / (1 + |C_naive|)` over all entries and trials.
pub fn numeric_spot_check(t: &BilinearTriple, n: usize, trials: usize, seed: u64) -> Result<f64> {
    numeric_spot_check_with(t, n, trials, seed, Distribution::Uniform)
}

pub fn numeric_spot_check_with(
    t: &BilinearTriple,
    n: usize,
    trials: usize,
    seed: u64,
    dist: Distribution,
) -> Result<f64> {
    let g = build_bilinear_graph(t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let a = dist.sample(n, &mut rng);
        let b = dist.sample(n, &mut rng);
        let (c, _) = execute(&g, &a, &b)?;
        worst = worst.max(c.max_rel_error(&naive_multiply(&a, &b)?)?);
    }
    Ok(worst)
}
