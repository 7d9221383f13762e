//! Dense square matrices, block partitions, and the two block primitives
//! (scaled addition and the classical product) that every algorithm is
//! ultimately expressed in.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::{self, Block, BlockMut, Update};

/// Square `n x n` matrix of `f64`, row-major: element (i, j) lives at `i * n + j`.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::SizeMismatch {
                left: n * n,
                right: data.len(),
            });
        }
        Ok(DenseMatrix { n, data })
    }

    /// Builds a matrix from nested rows; every row must have as many entries as there are rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::SizeMismatch {
                    left: n,
                    right: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DenseMatrix { n, data }
    }

    /// Entries drawn uniformly from [-1, 1].
    pub fn random_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        DenseMatrix::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))
    }

    /// Integer-valued entries drawn uniformly from `[lo, hi]`.
    pub fn random_integer<R: Rng + ?Sized>(n: usize, lo: i64, hi: i64, rng: &mut R) -> Self {
        DenseMatrix::from_fn(n, |_, _| rng.random_range(lo..=hi) as f64)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Bitwise equality, distinguishing `0.0` from `-0.0`.
    pub fn bitwise_eq(&self, other: &DenseMatrix) -> bool {
        self.n == other.n
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    /// Largest `|self - oracle| / (1 + |oracle|)` over all entries.
    pub fn max_rel_error(&self, oracle: &DenseMatrix) -> Result<f64> {
        check_same(self, oracle)?;
        Ok(self
            .data
            .iter()
            .zip(&oracle.data)
            .map(|(x, o)| (x - o).abs() / (1.0 + o.abs()))
            .fold(0.0, f64::max))
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            writeln!(f, "  {:?}", &self.data[i * self.n..(i + 1) * self.n])?;
        }
        Ok(())
    }
}

/// Random input families used by checks, error profiles, and benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distribution {
    /// Uniform reals in [-1, 1].
    Uniform,
    /// Uniform integers in [-8, 8].
    Integer,
}

impl Distribution {
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> DenseMatrix {
        match self {
            Distribution::Uniform => DenseMatrix::random_uniform(n, rng),
            Distribution::Integer => DenseMatrix::random_integer(n, -8, 8, rng),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Uniform => "uniform",
            Distribution::Integer => "integer",
        })
    }
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Distribution::Uniform),
            "integer" => Ok(Distribution::Integer),
            other => Err(Error::InvalidArgument(format!(
                "unknown distribution `{other}` (expected uniform or integer)"
            ))),
        }
    }
}

/// A matrix split into `factor^2` equal, non-overlapping blocks in row-major block order.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionSet {
    parent_n: usize,
    factor: usize,
    blocks: Vec<DenseMatrix>,
}

impl PartitionSet {
    /// Assembles a partition from blocks; the count must be a perfect square and sides equal.
    pub fn from_blocks(blocks: Vec<DenseMatrix>) -> Result<Self> {
        let count = blocks.len();
        let factor = (count as f64).sqrt().round() as usize;
        if count == 0 || factor * factor != count {
            return Err(Error::InvalidPartition(format!(
                "block count {count} is not a positive perfect square"
            )));
        }
        let side = blocks[0].n;
        if let Some((i, b)) = blocks.iter().enumerate().find(|(_, b)| b.n != side) {
            return Err(Error::InvalidPartition(format!(
                "inconsistent block sides: block 0 is {side}, block {i} is {}",
                b.n
            )));
        }
        Ok(PartitionSet {
            parent_n: side * factor,
            factor,
            blocks,
        })
    }

    pub fn parent_n(&self) -> usize {
        self.parent_n
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn block_side(&self) -> usize {
        self.parent_n / self.factor
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<DenseMatrix> {
        self.blocks
    }
}

/// Splits `a` into `p^2` blocks of side `n / p`; block `i` sits at block row `i / p`, block column `i % p`.
pub fn partition(a: &DenseMatrix, p: usize) -> Result<PartitionSet> {
    let n = a.n;
    if p == 0 || !n.is_multiple_of(p) {
        return Err(Error::IndivisibleSize { n, p });
    }
    let m = n / p;
    let mut blocks = Vec::with_capacity(p * p);
    for bi in 0..p {
        for bj in 0..p {
            let mut data = Vec::with_capacity(m * m);
            for r in 0..m {
                let start = (bi * m + r) * n + bj * m;
                data.extend_from_slice(&a.data[start..start + m]);
            }
            blocks.push(DenseMatrix { n: m, data });
        }
    }
    Ok(PartitionSet {
        parent_n: n,
        factor: p,
        blocks,
    })
}

/// Reassembles the parent matrix; exact inverse of [`partition`].
pub fn unpartition(parts: &PartitionSet) -> Result<DenseMatrix> {
    assemble(&parts.blocks)
}

pub(crate) fn assemble(blocks: &[DenseMatrix]) -> Result<DenseMatrix> {
    let count = blocks.len();
    let p = (count as f64).sqrt().round() as usize;
    if count == 0 || p * p != count {
        return Err(Error::InvalidPartition(format!(
            "block count {count} is not a positive perfect square"
        )));
    }
    let m = blocks[0].n;
    if let Some((i, b)) = blocks.iter().enumerate().find(|(_, b)| b.n != m) {
        return Err(Error::InvalidPartition(format!(
            "inconsistent block sides: block 0 is {m}, block {i} is {}",
            b.n
        )));
    }
    let n = m * p;
    let mut data = vec![0.0; n * n];
    for (idx, block) in blocks.iter().enumerate() {
        let (bi, bj) = (idx / p, idx % p);
        for r in 0..m {
            let start = (bi * m + r) * n + bj * m;
            data[start..start + m].copy_from_slice(&block.data[r * m..(r + 1) * m]);
        }
    }
    Ok(DenseMatrix { n, data })
}

fn check_same(a: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    if a.n != b.n {
        return Err(Error::SizeMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(())
}

/// Element-wise `alpha * a + beta * b` in a single pass.
pub fn mat_add(alpha: f64, a: &DenseMatrix, beta: f64, b: &DenseMatrix) -> Result<DenseMatrix> {
    check_same(a, b)?;
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| alpha * x + beta * y)
        .collect();
    Ok(DenseMatrix { n: a.n, data })
}

/// Classical product. Each output entry is summed over `k` in ascending order starting
/// from `0.0`; that order is the reference semantics every error measurement uses.
pub fn naive_multiply(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    check_same(a, b)?;
    let mut c = DenseMatrix::zeros(a.n);
    let n = a.n;
    kernel::gemm(
        &mut BlockMut::whole(&mut c.data, n),
        Block::whole(&a.data, n),
        Block::whole(&b.data, n),
        n,
        false,
        Update::Overwrite,
    );
    Ok(c)
}
