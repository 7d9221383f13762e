//! Bilinear triples `(U, V, W)` and the built-in algorithms.
//!
//! Column `q` of `U` and `V` gives the two operand combinations of product `q`:
//! `T_q = sum_x U[x][q] A_x`, `S_q = sum_y V[y][q] B_y`, `P_q = T_q * S_q`.
//! Row `z` of `W` gives the output combination `C_z = sum_q W[z][q] P_q`.
//! All partition indices are row-major block indices of a `p x p` split.

use std::fmt;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};

pub mod format;

pub use format::{load_triple, save_triple};

/// Dense matrix of exact coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CoeffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Coefficient>,
}

impl CoeffMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CoeffMatrix {
            rows,
            cols,
            data: vec![Coefficient::ZERO; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Coefficient>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(Error::InvalidTriple(format!(
                "row {i} has {} entries, expected {cols}",
                r.len()
            )));
        }
        let n_rows = rows.len();
        Ok(CoeffMatrix {
            rows: n_rows,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        CoeffMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Coefficient::integer(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Coefficient {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Coefficient) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Coefficient] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    /// Nonzero `(row, value)` pairs of a column, ascending by row.
    pub fn column_nonzeros(&self, col: usize) -> Vec<(usize, Coefficient)> {
        (0..self.rows)
            .map(|r| (r, self.get(r, col)))
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    /// Nonzero `(col, value)` pairs of a row, ascending by column.
    pub fn row_nonzeros(&self, row: usize) -> Vec<(usize, Coefficient)> {
        self.row(row)
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .collect()
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|c| !c.is_zero()).count()
    }

    /// Count of nonzeros whose magnitude is not one.
    pub fn non_unit_count(&self) -> usize {
        self.data
            .iter()
            .filter(|c| !c.is_zero() && !c.is_unit())
            .count()
    }

    pub fn column(&self, col: usize) -> Vec<Coefficient> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }
}

impl fmt::Debug for CoeffMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            writeln!(f, "{:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Which of the three coefficient matrices an entry belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    U,
    V,
    W,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::U => "U",
            Factor::V => "V",
            Factor::W => "W",
        })
    }
}

/// A coefficient outside `{-1, 0, 1}`; permitted, but reported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientNote {
    pub factor: Factor,
    pub row: usize,
    pub col: usize,
    pub value: Coefficient,
}

impl fmt::Display for CoefficientNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}][{}] = {} is outside {{-1, 0, 1}}",
            self.factor, self.row, self.col, self.value
        )
    }
}

/// A fast matrix-multiplication algorithm for a `p x p` block split using `rank` products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearTriple {
    name: String,
    p: usize,
    rank: usize,
    u: CoeffMatrix,
    v: CoeffMatrix,
    w: CoeffMatrix,
}

impl BilinearTriple {
    /// Validates shapes (`p^2 x rank` each) and rejects dead products.
    pub fn new(
        name: impl Into<String>,
        p: usize,
        u: CoeffMatrix,
        v: CoeffMatrix,
        w: CoeffMatrix,
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidTriple("split factor p must be >= 1".into()));
        }
        let rank = u.cols();
        let blocks = p * p;
        for (factor, m) in [(Factor::U, &u), (Factor::V, &v), (Factor::W, &w)] {
            if m.rows() != blocks {
                return Err(Error::InvalidTriple(format!(
                    "{factor} row count {} does not match p^2 = {blocks}",
                    m.rows()
                )));
            }
            if m.cols() != rank {
                return Err(Error::InvalidTriple(format!(
                    "{factor} column count {} does not match rank {rank}",
                    m.cols()
                )));
            }
        }
        if rank == 0 {
            return Err(Error::InvalidTriple("rank must be >= 1".into()));
        }
        for (factor, m) in [(Factor::U, &u), (Factor::V, &v)] {
            if let Some(q) = (0..rank).find(|&q| m.column_nonzeros(q).is_empty()) {
                return Err(Error::InvalidTriple(format!(
                    "{factor} column {q} is all zero (dead product)"
                )));
            }
        }
        Ok(BilinearTriple {
            name: name.into(),
            p,
            rank,
            u,
            v,
            w,
        })
    }

    /// The classical algorithm for a `p`-split: one product per `(i, j, k)`,
    /// ordered `i`-major, then `j`, then `k` ascending.
    pub fn classical(p: usize) -> Result<Self> {
        let blocks = p * p;
        let rank = p * p * p;
        let mut u = CoeffMatrix::zeros(blocks, rank);
        let mut v = CoeffMatrix::zeros(blocks, rank);
        let mut w = CoeffMatrix::zeros(blocks, rank);
        for i in 0..p {
            for j in 0..p {
                for k in 0..p {
                    let q = (i * p + j) * p + k;
                    u.set(i * p + k, q, Coefficient::ONE);
                    v.set(k * p + j, q, Coefficient::ONE);
                    w.set(i * p + j, q, Coefficient::ONE);
                }
            }
        }
        BilinearTriple::new(format!("classical-p{p}"), p, u, v, w)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn u(&self) -> &CoeffMatrix {
        &self.u
    }

    pub fn v(&self) -> &CoeffMatrix {
        &self.v
    }

    pub fn w(&self) -> &CoeffMatrix {
        &self.w
    }

    pub fn factor(&self, which: Factor) -> &CoeffMatrix {
        match which {
            Factor::U => &self.u,
            Factor::V => &self.v,
            Factor::W => &self.w,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Returns a copy with one coefficient replaced. Shape checks are re-run.
    pub fn with_entry(&self, which: Factor, row: usize, col: usize, value: Coefficient) -> Result<Self> {
        let mut t = self.clone();
        let m = match which {
            Factor::U => &mut t.u,
            Factor::V => &mut t.v,
            Factor::W => &mut t.w,
        };
        if row >= m.rows() || col >= m.cols() {
            return Err(Error::InvalidTriple(format!(
                "{which}[{row}][{col}] is out of range"
            )));
        }
        m.set(row, col, value);
        BilinearTriple::new(t.name, t.p, t.u, t.v, t.w)
    }

    /// Coefficients outside `{-1, 0, 1}`, in U, V, W order then row-major.
    pub fn validation_report(&self) -> Vec<CoefficientNote> {
        let mut notes = Vec::new();
        for factor in [Factor::U, Factor::V, Factor::W] {
            let m = self.factor(factor);
            for row in 0..m.rows() {
                for (col, value) in m.row_nonzeros(row) {
                    if !value.is_unit() {
                        notes.push(CoefficientNote {
                            factor,
                            row,
                            col,
                            value,
                        });
                    }
                }
            }
        }
        notes
    }
}

pub const BUILTIN_NAMES: [&str; 4] = ["classical-p2", "classical-p3", "strassen-p2", "laderman-p3"];

/// Looks up a built-in triple by name.
pub fn builtin(name: &str) -> Result<BilinearTriple> {
    match name {
        "classical-p2" => BilinearTriple::classical(2),
        "classical-p3" => BilinearTriple::classical(3),
        "strassen-p2" => strassen(),
        "laderman-p3" => laderman(),
        _ => Err(Error::UnknownAlgorithm {
            name: name.to_string(),
            available: BUILTIN_NAMES.join(", "),
        }),
    }
}

// Output rows are stored C0, C1, C2, C3; the commonly printed table lists C1 and C2 swapped.
fn strassen() -> Result<BilinearTriple> {
    let u = CoeffMatrix::from_i64_rows(&[
        &[0, 1, 1, 0, 1, 1, 0],
        &[0, 0, -1, 1, 0, 0, 0],
        &[1, 1, 1, 0, 1, 0, 0],
        &[-1, -1, -1, 0, 0, 0, 1],
    ])?;
    let v = CoeffMatrix::from_i64_rows(&[
        &[0, 0, 0, 0, 1, 1, 0],
        &[1, 1, 0, 0, 1, 0, 1],
        &[0, 1, 1, 1, 1, 0, 0],
        &[0, 1, 1, 0, 1, 0, 1],
    ])?;
    let w = CoeffMatrix::from_i64_rows(&[
        &[0, 0, 0, 1, 0, 1, 0],
        &[-1, 1, -1, -1, 0, 0, 0],
        &[0, -1, 0, 0, 1, -1, -1],
        &[1, 0, 0, 0, 0, 0, 1],
    ])?;
    BilinearTriple::new("strassen-p2", 2, u, v, w)
}

// Laderman's 3x3 scheme. Entries are written as (row, col) with 1-based indices,
// signed by the leading '+'/'-'.
const LADERMAN_PRODUCTS: [(&str, &str); 23] = [
    ("+11+12+13-21-22-32-33", "+22"),
    ("+11-21", "-12+22"),
    ("+22", "-11+12+21-22-23-31+33"),
    ("-11+21+22", "+11-12+22"),
    ("+21+22", "-11+12"),
    ("+11", "+11"),
    ("-11+31+32", "+11-13+23"),
    ("-11+31", "+13-23"),
    ("+31+32", "-11+13"),
    ("+11+12+13-22-23-31-32", "+23"),
    ("+32", "-11+13+21-22-23-31+32"),
    ("-13+32+33", "+22+31-32"),
    ("+13-33", "+22-32"),
    ("+13", "+31"),
    ("+32+33", "-31+32"),
    ("-13+22+23", "+23+31-33"),
    ("+13-23", "+23-33"),
    ("+22+23", "-31+33"),
    ("+12", "+21"),
    ("+23", "+32"),
    ("+21", "+13"),
    ("+31", "+12"),
    ("+33", "+33"),
];

// 1-based product numbers feeding each output, outputs in row-major order.
const LADERMAN_OUTPUTS: [&[usize]; 9] = [
    &[6, 14, 19],
    &[1, 4, 5, 6, 12, 14, 15],
    &[6, 7, 9, 10, 14, 16, 18],
    &[2, 3, 4, 6, 14, 16, 17],
    &[2, 4, 5, 6, 20],
    &[14, 16, 17, 18, 21],
    &[6, 7, 8, 11, 12, 13, 14],
    &[12, 13, 14, 15, 22],
    &[6, 7, 8, 9, 23],
];

fn parse_signed_entries(expr: &str) -> Vec<(usize, i64)> {
    expr.as_bytes()
        .chunks(3)
        .map(|c| {
            let sign = if c[0] == b'-' { -1 } else { 1 };
            let row = (c[1] - b'1') as usize;
            let col = (c[2] - b'1') as usize;
            (row * 3 + col, sign)
        })
        .collect()
}

fn laderman() -> Result<BilinearTriple> {
    let mut u = CoeffMatrix::zeros(9, 23);
    let mut v = CoeffMatrix::zeros(9, 23);
    let mut w = CoeffMatrix::zeros(9, 23);
    for (q, (left, right)) in LADERMAN_PRODUCTS.iter().enumerate() {
        for (x, s) in parse_signed_entries(left) {
            u.set(x, q, Coefficient::integer(s));
        }
        for (y, s) in parse_signed_entries(right) {
            v.set(y, q, Coefficient::integer(s));
        }
    }
    for (z, products) in LADERMAN_OUTPUTS.iter().enumerate() {
        for &m in products.iter() {
            w.set(z, m - 1, Coefficient::ONE);
        }
    }
    BilinearTriple::new("laderman-p3", 3, u, v, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strassen_shape_and_p5() {
        let t = builtin("strassen-p2").unwrap();
        assert_eq!((t.p(), t.rank()), (2, 7));
        assert_eq!(t.u().column_nonzeros(5), vec![(0, Coefficient::ONE)]);
        assert_eq!(t.v().column_nonzeros(5), vec![(0, Coefficient::ONE)]);
        // C0 = P3 + P5
        let c0: Vec<usize> = t.w().row_nonzeros(0).iter().map(|e| e.0).collect();
        assert_eq!(c0, vec![3, 5]);
    }

    #[test]
    fn classical_columns_are_single_entries() {
        let t = builtin("classical-p2").unwrap();
        assert_eq!((t.p(), t.rank()), (2, 8));
        for q in 0..8 {
            assert_eq!(t.u().column_nonzeros(q).len(), 1);
            assert_eq!(t.v().column_nonzeros(q).len(), 1);
        }
        let t3 = builtin("classical-p3").unwrap();
        assert_eq!((t3.p(), t3.rank()), (3, 27));
    }

    #[test]
    fn laderman_shape() {
        let t = builtin("laderman-p3").unwrap();
        assert_eq!((t.p(), t.rank()), (3, 23));
        assert!(t.validation_report().is_empty());
    }

    #[test]
    fn unknown_builtin_lists_names() {
        let err = builtin("winograd-p2").unwrap_err().to_string();
        for name in BUILTIN_NAMES {
            assert!(err.contains(name), "{err}");
        }
    }

    #[test]
    fn dead_product_rejected() {
        let t = builtin("strassen-p2").unwrap();
        let err = t
            .with_entry(Factor::U, 0, 5, Coefficient::ZERO)
            .unwrap_err();
        assert!(err.to_string().contains("dead product"), "{err}");
    }

    #[test]
    fn non_unit_coefficients_are_reported() {
        let t = builtin("strassen-p2")
            .unwrap()
            .with_entry(Factor::W, 0, 3, Coefficient::new(1, 2).unwrap())
            .unwrap();
        let notes = t.validation_report();
        assert_eq!(notes.len(), 1);
        assert_eq!(notes[0].factor, Factor::W);
        assert_eq!(notes[0].to_string(), "W[0][3] = 1/2 is outside {-1, 0, 1}");
    }

    #[test]
    fn shape_mismatch_rejected() {
        let u = CoeffMatrix::zeros(3, 7);
        let v = CoeffMatrix::zeros(4, 7);
        let err = BilinearTriple::new("x", 2, u, v.clone(), v).unwrap_err();
        assert!(err.to_string().contains("U row count"), "{err}");
    }
}
