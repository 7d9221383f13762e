//! Kronecker composition of triples and recursion chains.

use std::fmt;

use crate::catalog::{builtin, BilinearTriple, CoeffMatrix};
use crate::error::{Error, Result};

/// Ordered recursion strategy: member 0 splits the full matrix, member 1 splits
/// each of its products, and so on. An empty chain means the classical product.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ChainSpec {
    members: Vec<BilinearTriple>,
}

impl ChainSpec {
    pub fn new(members: Vec<BilinearTriple>) -> Self {
        ChainSpec { members }
    }

    pub fn empty() -> Self {
        ChainSpec::default()
    }

    /// Parses a list of split factors (`2` is Strassen, `3` is Laderman) or builtin
    /// names separated by `,` or `x`, so `2,3` and the label `2x3` are the same chain.
    /// The empty string and `classical` give the empty chain.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() || spec == "classical" || spec == "[]" {
            return Ok(ChainSpec::empty());
        }
        let spec = spec.trim_start_matches('[').trim_end_matches(']');
        let members = spec
            .split([',', 'x'])
            .map(|tok| match tok.trim() {
                "2" => builtin("strassen-p2"),
                "3" => builtin("laderman-p3"),
                name => builtin(name),
            })
            .collect::<Result<_>>()?;
        Ok(ChainSpec { members })
    }

    pub fn members(&self) -> &[BilinearTriple] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Product of member split factors (1 for the empty chain).
    pub fn effective_factor(&self) -> usize {
        self.members.iter().map(BilinearTriple::p).product()
    }

    /// Product of member ranks (1 for the empty chain).
    pub fn effective_rank(&self) -> usize {
        self.members.iter().map(BilinearTriple::rank).product()
    }

    /// `classical` for the empty chain, otherwise the split factors joined by `x`, e.g. `2x3`.
    pub fn label(&self) -> String {
        if self.members.is_empty() {
            "classical".to_string()
        } else {
            self.members
                .iter()
                .map(|t| t.p().to_string())
                .collect::<Vec<_>>()
                .join("x")
        }
    }
}

impl fmt::Display for ChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.members.iter().map(BilinearTriple::name).collect();
        write!(f, "[{}]", names.join(", "))
    }
}

/// Kronecker product of two triples; `outer` splits first, `inner` splits each block.
///
/// Outer block `b` and inner block `s` combine into the row-major block index of the
/// `p_o * p_i` split; product `(q_o, q_i)` becomes column `q_o * r_i + q_i`.
/// The caller is responsible for passing verified triples; validity is preserved.
pub fn kron_compose(outer: &BilinearTriple, inner: &BilinearTriple) -> Result<BilinearTriple> {
    let (po, pi) = (outer.p(), inner.p());
    let (ro, ri) = (outer.rank(), inner.rank());
    let p = po * pi;
    let row = |b: usize, s: usize| ((b / po) * pi + s / pi) * p + (b % po) * pi + s % pi;
    let kron = |a: &CoeffMatrix, c: &CoeffMatrix| {
        let mut out = CoeffMatrix::zeros(p * p, ro * ri);
        for qo in 0..ro {
            let outer_col = a.column_nonzeros(qo);
            for qi in 0..ri {
                for &(s, ci) in &c.column_nonzeros(qi) {
                    for &(b, co) in &outer_col {
                        out.set(row(b, s), qo * ri + qi, co * ci);
                    }
                }
            }
        }
        out
    };
    BilinearTriple::new(
        format!("{}*{}", outer.name(), inner.name()),
        p,
        kron(outer.u(), inner.u()),
        kron(outer.v(), inner.v()),
        kron(outer.w(), inner.w()),
    )
}

/// Left fold of [`kron_compose`] over the chain.
pub fn chain_flatten(chain: &ChainSpec) -> Result<BilinearTriple> {
    let (first, rest) = chain.members.split_first().ok_or(Error::EmptyChain)?;
    rest.iter()
        .try_fold(first.clone(), |acc, next| kron_compose(&acc, next))
}
