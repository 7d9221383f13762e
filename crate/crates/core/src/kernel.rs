//! Kernels on square blocks addressed inside row-major buffers.
//!
//! Element `(i, j)` of a block is `data[offset + i * ld + j]`, so a block of a
//! partitioned matrix is used in place, without copying it out.

/// Read-only square block.
#[derive(Clone, Copy)]
pub(crate) struct Block<'a> {
    data: &'a [f64],
    offset: usize,
    ld: usize,
}

impl<'a> Block<'a> {
    pub fn whole(data: &'a [f64], n: usize) -> Self {
        Block { data, offset: 0, ld: n }
    }

    fn row(&self, i: usize, len: usize) -> &'a [f64] {
        let start = self.offset + i * self.ld;
        &self.data[start..start + len]
    }

    /// Block `idx` (row-major) of a `p x p` split into blocks of side `m`.
    pub fn sub(&self, p: usize, idx: usize, m: usize) -> Self {
        Block {
            data: self.data,
            offset: self.offset + (idx / p) * m * self.ld + (idx % p) * m,
            ld: self.ld,
        }
    }
}

pub(crate) struct BlockMut<'a> {
    data: &'a mut [f64],
    offset: usize,
    ld: usize,
}

impl<'a> BlockMut<'a> {
    pub fn whole(data: &'a mut [f64], n: usize) -> Self {
        BlockMut { data, offset: 0, ld: n }
    }

    fn row_mut(&mut self, i: usize, len: usize) -> &mut [f64] {
        let start = self.offset + i * self.ld;
        &mut self.data[start..start + len]
    }

    pub fn sub(&mut self, p: usize, idx: usize, m: usize) -> BlockMut<'_> {
        BlockMut {
            offset: self.offset + (idx / p) * m * self.ld + (idx % p) * m,
            ld: self.ld,
            data: self.data,
        }
    }
}

pub(crate) fn scale(c: &mut BlockMut<'_>, n: usize, alpha: f64) {
    for i in 0..n {
        for x in c.row_mut(i, n) {
            *x *= alpha;
        }
    }
}

/// `c = t0 + t1 + ...` where term `t` is `coeff * x`, summed left to right per element.
/// Rows are finished one at a time, so the block is traversed once whatever the term count.
pub(crate) fn set_sum(c: &mut BlockMut<'_>, n: usize, terms: &[(f64, Block<'_>)]) {
    let Some(((c0, x0), rest)) = terms.split_first() else {
        return;
    };
    for i in 0..n {
        let row = c.row_mut(i, n);
        for (d, s) in row.iter_mut().zip(x0.row(i, n)) {
            *d = c0 * s;
        }
        for (ct, xt) in rest {
            for (d, s) in row.iter_mut().zip(xt.row(i, n)) {
                *d += ct * s;
            }
        }
    }
}

/// `c = c + t0 + t1 + ...`, summed left to right per element.
pub(crate) fn add_sum(c: &mut BlockMut<'_>, n: usize, terms: &[(f64, Block<'_>)]) {
    for i in 0..n {
        let row = c.row_mut(i, n);
        for (ct, xt) in terms {
            for (d, s) in row.iter_mut().zip(xt.row(i, n)) {
                *d += ct * s;
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub(crate) enum Update {
    /// `c = a * b`
    Overwrite,
    /// `c += a * b`
    Accumulate,
}

const KC: usize = 256;
const NC: usize = 512;
const MR: usize = 4;
const NR: usize = 4;

/// `c = a * b` or `c += a * b`; with `negate`, `-a` takes the place of `a`.
///
/// Blocked over k (ascending, outermost) and j, with a packed copy of each B panel
/// and a 4x4 register tile. Each `c[i][j]` is loaded once per k block and then sees
/// its k terms in ascending order, so the result is bitwise identical to the plain
/// triple loop. Packing keeps the speed flat across sizes, including powers of two.
pub(crate) fn gemm(c: &mut BlockMut<'_>, a: Block<'_>, b: Block<'_>, n: usize, negate: bool, update: Update) {
    let sign = if negate { -1.0 } else { 1.0 };
    let mut panel = vec![0.0f64; KC.min(n) * NC.min(n.next_multiple_of(NR))];
    for k0 in (0..n).step_by(KC) {
        let kc = KC.min(n - k0);
        // Starting from +0.0 gives the same bits as zero-filling first.
        let load = k0 > 0 || update == Update::Accumulate;
        for j0 in (0..n).step_by(NC) {
            let j1 = (j0 + NC).min(n);
            let strips = (j1 - j0).div_ceil(NR);
            // panel[(s * kc + k) * NR + r] = b[k0 + k][j0 + s * NR + r], zero past j1
            for k in 0..kc {
                let row = b.row(k0 + k, n);
                for s in 0..strips {
                    let dst = &mut panel[(s * kc + k) * NR..(s * kc + k + 1) * NR];
                    for (r, d) in dst.iter_mut().enumerate() {
                        let j = j0 + s * NR + r;
                        *d = if j < j1 { row[j] } else { 0.0 };
                    }
                }
            }
            for i in (0..n).step_by(MR) {
                let mr = MR.min(n - i);
                for s in 0..strips {
                    let jb = j0 + s * NR;
                    let nr = NR.min(j1 - jb);
                    let bp = &panel[s * kc * NR..(s + 1) * kc * NR];
                    if mr == MR && nr == NR {
                        micro_tile(c, a, bp, i, jb, k0, sign, load);
                    } else {
                        for ii in i..i + mr {
                            let a_row = &a.row(ii, k0 + kc)[k0..];
                            let c_row = c.row_mut(ii, jb + nr);
                            for jj in 0..nr {
                                let mut acc = if load { c_row[jb + jj] } else { 0.0 };
                                for (k, &aik) in a_row.iter().enumerate() {
                                    acc += sign * aik * bp[k * NR + jj];
                                }
                                c_row[jb + jj] = acc;
                            }
                        }
                    }
                }
            }
        }
    }
}

#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn micro_tile(c: &mut BlockMut<'_>, a: Block<'_>, bp: &[f64], i: usize, jb: usize, k0: usize, sign: f64, load: bool) {
    let kc = bp.len() / NR;
    let mut acc = [[0.0f64; NR]; MR];
    if load {
        for (r, row) in acc.iter_mut().enumerate() {
            row.copy_from_slice(&c.row_mut(i + r, jb + NR)[jb..]);
        }
    }
    let rows: [&[f64]; MR] = std::array::from_fn(|r| &a.row(i + r, k0 + kc)[k0..]);
    for (k, bk) in bp.chunks_exact(NR).enumerate() {
        let av: [f64; MR] = std::array::from_fn(|r| sign * rows[r][k]);
        for r in 0..MR {
            for q in 0..NR {
                acc[r][q] += av[r] * bk[q];
            }
        }
    }
    for (r, row) in acc.iter().enumerate() {
        c.row_mut(i + r, jb + NR)[jb..].copy_from_slice(row);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled(n: usize, seed: u64) -> Vec<f64> {
        // small deterministic values with inexact products
        (0..n * n)
            .map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 997.0 - 0.5)
            .collect()
    }

    #[test]
    fn strided_blocks_match_copies() {
        // block 3 of A times block 5 of B into block 8 of C, all in place in 12x12 parents
        let (n, p, m) = (12, 3, 4);
        let a = filled(n, 1);
        let b = filled(n, 2);
        let copy = |src: &[f64], idx: usize| -> Vec<f64> {
            let (bi, bj) = (idx / p, idx % p);
            (0..m * m).map(|e| src[(bi * m + e / m) * n + bj * m + e % m]).collect()
        };
        let (ab, bb) = (copy(&a, 3), copy(&b, 5));
        let mut want = vec![0.0; m * m];
        let (x, y) = (Block::whole(&ab, m), Block::whole(&bb, m));
        gemm(&mut BlockMut::whole(&mut want, m), x, y, m, false, Update::Accumulate);

        let mut c = vec![7.0; n * n];
        let mut whole = BlockMut::whole(&mut c, n);
        let (x, y) = (Block::whole(&a, n).sub(p, 3, m), Block::whole(&b, n).sub(p, 5, m));
        gemm(&mut whole.sub(p, 8, m), x, y, m, false, Update::Overwrite);
        assert_eq!(copy(&c, 8), want);
        assert_eq!(c[0], 7.0);
    }

    #[test]
    fn negate_equals_subtraction() {
        let n = 9;
        let (a, b) = (filled(n, 3), filled(n, 4));
        let mut plus = vec![0.0; n * n];
        let mut minus = vec![f64::NAN; n * n];
        let (x, y) = (Block::whole(&a, n), Block::whole(&b, n));
        gemm(&mut BlockMut::whole(&mut plus, n), x, y, n, false, Update::Accumulate);
        gemm(&mut BlockMut::whole(&mut minus, n), x, y, n, true, Update::Overwrite);
        assert!(plus.iter().zip(&minus).all(|(p, m)| *p == -*m));
    }

    #[test]
    fn sums_run_left_to_right() {
        let n = 3;
        let x: Vec<f64> = (0..9).map(f64::from).collect();
        let y = vec![0.1; 9];
        let mut c = vec![f64::NAN; 9];
        let terms = [(2.0, Block::whole(&x, n)), (-1.0, Block::whole(&y, n)), (3.0, Block::whole(&y, n))];
        set_sum(&mut BlockMut::whole(&mut c, n), n, &terms);
        assert_eq!(c[4].to_bits(), ((2.0 * 4.0 - 0.1) + 3.0 * 0.1f64).to_bits());
        add_sum(&mut BlockMut::whole(&mut c, n), n, &terms[1..2]);
        scale(&mut BlockMut::whole(&mut c, n), n, 2.0);
        assert_eq!(c[4].to_bits(), ((((2.0 * 4.0 - 0.1) + 3.0 * 0.1f64) - 0.1) * 2.0).to_bits());
    }
}
