//! Graph IR: block declarations plus an ordered list of assignment statements.
//!
//! Inputs are the blocks `ADP[i]` and `BDP[i]` of a `p x p` split, outputs are
//! `CDP[i]`, and temporaries are `T<j>`/`S<j>` (operand combinations of product
//! `j`) and `P<j>` (the product itself). Every statement assigns one buffer
//! (`<<`) from a left-to-right signed sum of terms, each term being a buffer, a
//! scaled buffer, or a product of two buffers.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};

mod build;
mod print;
mod schedule;

pub use build::{build_bilinear_graph, build_classical_graph};
pub use print::{parse_graph, pretty_print};
pub use schedule::schedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TempKind {
    /// Left operand combination.
    T,
    /// Right operand combination.
    S,
    /// Product.
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BufferRef {
    A(usize),
    B(usize),
    C(usize),
    Temp(TempKind, usize),
}

impl BufferRef {
    pub fn is_temp(&self) -> bool {
        matches!(self, BufferRef::Temp(..))
    }

    pub fn is_output(&self) -> bool {
        matches!(self, BufferRef::C(_))
    }
}

impl fmt::Display for BufferRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BufferRef::A(i) => write!(f, "ADP[{i}]"),
            BufferRef::B(i) => write!(f, "BDP[{i}]"),
            BufferRef::C(i) => write!(f, "CDP[{i}]"),
            BufferRef::Temp(TempKind::T, j) => write!(f, "T{j}"),
            BufferRef::Temp(TempKind::S, j) => write!(f, "S{j}"),
            BufferRef::Temp(TempKind::P, j) => write!(f, "P{j}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TermKind {
    Ref(BufferRef),
    Product(BufferRef, BufferRef),
}

/// `coeff * operand`, where the operand is a buffer or a binary product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: Coefficient,
    pub kind: TermKind,
}

impl Term {
    pub fn reference(coeff: Coefficient, r: BufferRef) -> Self {
        Term {
            coeff,
            kind: TermKind::Ref(r),
        }
    }

    pub fn product(coeff: Coefficient, left: BufferRef, right: BufferRef) -> Self {
        Term {
            coeff,
            kind: TermKind::Product(left, right),
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self.kind, TermKind::Product(..))
    }

    pub fn reads(&self) -> impl Iterator<Item = BufferRef> {
        let (a, b) = match self.kind {
            TermKind::Ref(r) => (r, None),
            TermKind::Product(l, r) => (l, Some(r)),
        };
        std::iter::once(a).chain(b)
    }
}

/// `target << terms[0] ± terms[1] ± ...`, evaluated left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Statement {
    pub target: BufferRef,
    pub terms: Vec<Term>,
}

impl Statement {
    pub fn new(target: BufferRef, terms: Vec<Term>) -> Self {
        Statement { target, terms }
    }

    /// True when the statement adds to the current value of its (output) target.
    pub fn is_continuation(&self) -> bool {
        matches!(
            self.terms.first(),
            Some(Term { coeff, kind: TermKind::Ref(r) }) if *r == self.target && coeff.is_one()
        )
    }

    pub fn reads(&self) -> impl Iterator<Item = BufferRef> + '_ {
        self.terms.iter().flat_map(Term::reads)
    }

    pub fn product_count(&self) -> usize {
        self.terms.iter().filter(|t| t.is_product()).count()
    }

    /// Block additions after sign folding: one per term beyond the first.
    pub fn addition_count(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    pub fn scaling_count(&self) -> usize {
        self.terms
            .iter()
            .filter(|t| !t.coeff.is_zero() && !t.coeff.is_unit())
            .count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Per product: T, S, P; then every output as one accumulation.
    ProductMajor,
    /// Each product is accumulated into its outputs right after it is formed.
    Fused,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::ProductMajor => "product-major",
            Strategy::Fused => "fused",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product-major" => Ok(Strategy::ProductMajor),
            "fused" => Ok(Strategy::Fused),
            other => Err(Error::InvalidArgument(format!(
                "unknown schedule `{other}` (expected product-major or fused)"
            ))),
        }
    }
}

/// Peak simultaneously-live temporaries over a statement order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LiveTemporaries {
    /// `T`/`S` operand buffers.
    pub staging: usize,
    /// `P` product buffers.
    pub products: usize,
    /// All temporaries together.
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphIR {
    p: usize,
    alpha: Coefficient,
    statements: Vec<Statement>,
    schedule: Option<Strategy>,
}

impl GraphIR {
    /// Checks operand indices, target kinds, and single assignment of temporaries.
    /// Statement order is checked separately by [`GraphIR::validate`].
    pub fn new(p: usize, statements: Vec<Statement>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidGraph("split factor must be >= 1".into()));
        }
        let blocks = p * p;
        let in_range = |r: &BufferRef| match r {
            BufferRef::A(i) | BufferRef::B(i) | BufferRef::C(i) => *i < blocks,
            BufferRef::Temp(..) => true,
        };
        let mut defined = BTreeSet::new();
        for (idx, st) in statements.iter().enumerate() {
            if matches!(st.target, BufferRef::A(_) | BufferRef::B(_)) {
                return Err(Error::InvalidGraph(format!(
                    "statement {idx} assigns input {}",
                    st.target
                )));
            }
            if st.terms.is_empty() {
                return Err(Error::InvalidGraph(format!("statement {idx} has no terms")));
            }
            if let Some(r) = std::iter::once(st.target)
                .chain(st.reads())
                .find(|r| !in_range(r))
            {
                return Err(Error::InvalidGraph(format!(
                    "statement {idx}: {r} is out of range for p = {p}"
                )));
            }
            if st.target.is_temp() && !defined.insert(st.target) {
                return Err(Error::InvalidGraph(format!(
                    "temporary {} is assigned more than once",
                    st.target
                )));
            }
        }
        Ok(GraphIR {
            p,
            alpha: Coefficient::ONE,
            statements,
            schedule: None,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Scalar applied to the final result (`C = alpha * A * B`); 1 unless set.
    pub fn alpha(&self) -> Coefficient {
        self.alpha
    }

    pub fn with_alpha(mut self, alpha: Coefficient) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn schedule_strategy(&self) -> Option<Strategy> {
        self.schedule
    }

    pub(crate) fn with_schedule(mut self, s: Strategy) -> Self {
        self.schedule = Some(s);
        self
    }

    /// Declared temporaries in order of definition.
    pub fn temporaries(&self) -> Vec<BufferRef> {
        self.statements
            .iter()
            .map(|s| s.target)
            .filter(BufferRef::is_temp)
            .collect()
    }

    pub fn multiply_count(&self) -> usize {
        self.statements.iter().map(Statement::product_count).sum()
    }

    pub fn addition_count(&self) -> usize {
        self.statements.iter().map(Statement::addition_count).sum()
    }

    pub fn scaling_count(&self) -> usize {
        self.statements.iter().map(Statement::scaling_count).sum()
    }

    /// Definitions before uses, outputs written exactly once fresh and only
    /// extended afterwards, every output assigned.
    pub fn validate(&self) -> Result<()> {
        let blocks = self.p * self.p;
        let mut defined: BTreeSet<BufferRef> = BTreeSet::new();
        for (idx, st) in self.statements.iter().enumerate() {
            let continuation = st.is_continuation();
            for (t, term) in st.terms.iter().enumerate() {
                for r in term.reads() {
                    match r {
                        BufferRef::A(_) | BufferRef::B(_) => {}
                        BufferRef::C(_) if continuation && t == 0 => {}
                        BufferRef::C(_) => {
                            return Err(Error::InvalidGraph(format!(
                                "statement {idx} reads output {r} outside an accumulation"
                            )))
                        }
                        BufferRef::Temp(..) if defined.contains(&r) => {}
                        BufferRef::Temp(..) => {
                            return Err(Error::InvalidGraph(format!(
                                "statement {idx} uses {r} before its definition"
                            )))
                        }
                    }
                }
            }
            if st.target.is_output() {
                let seen = defined.contains(&st.target);
                if continuation && !seen {
                    return Err(Error::InvalidGraph(format!(
                        "statement {idx} accumulates into {} before it is assigned",
                        st.target
                    )));
                }
                if !continuation && seen {
                    return Err(Error::InvalidGraph(format!(
                        "output {} is assigned more than once",
                        st.target
                    )));
                }
            }
            defined.insert(st.target);
        }
        if let Some(i) = (0..blocks).find(|&i| !defined.contains(&BufferRef::C(i))) {
            return Err(Error::InvalidGraph(format!("output CDP[{i}] is never assigned")));
        }
        Ok(())
    }

    /// Index of the last statement reading each temporary.
    pub(crate) fn last_uses(&self) -> HashMap<BufferRef, usize> {
        let mut last = HashMap::new();
        for (idx, st) in self.statements.iter().enumerate() {
            for r in st.reads().filter(BufferRef::is_temp) {
                last.insert(r, idx);
            }
        }
        last
    }

    /// A temporary is live from its defining statement through its last reader, inclusive.
    pub fn peak_live(&self) -> LiveTemporaries {
        let last = self.last_uses();
        let mut intervals = Vec::new();
        for (idx, st) in self.statements.iter().enumerate() {
            if let BufferRef::Temp(kind, _) = st.target {
                let end = last.get(&st.target).copied().unwrap_or(idx).max(idx);
                intervals.push((kind, idx, end));
            }
        }
        let mut peak = LiveTemporaries::default();
        for idx in 0..self.statements.len() {
            let live: Vec<TempKind> = intervals
                .iter()
                .filter(|(_, s, e)| *s <= idx && idx <= *e)
                .map(|(k, _, _)| *k)
                .collect();
            let products = live.iter().filter(|k| **k == TempKind::P).count();
            peak.staging = peak.staging.max(live.len() - products);
            peak.products = peak.products.max(products);
            peak.total = peak.total.max(live.len());
        }
        peak
    }
}

impl fmt::Display for GraphIR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(c: i64, b: BufferRef) -> Term {
        Term::reference(Coefficient::integer(c), b)
    }

    #[test]
    fn rejects_input_targets_and_range() {
        let st = Statement::new(BufferRef::A(0), vec![r(1, BufferRef::B(0))]);
        assert!(GraphIR::new(1, vec![st]).is_err());
        let st = Statement::new(BufferRef::C(0), vec![r(1, BufferRef::B(4))]);
        assert!(GraphIR::new(2, vec![st]).is_err());
    }

    #[test]
    fn rejects_double_temp_assignment() {
        let t = BufferRef::Temp(TempKind::T, 0);
        let sts = vec![
            Statement::new(t, vec![r(1, BufferRef::A(0))]),
            Statement::new(t, vec![r(1, BufferRef::A(0))]),
        ];
        assert!(GraphIR::new(1, sts).is_err());
    }

    #[test]
    fn validate_catches_use_before_def() {
        let t = BufferRef::Temp(TempKind::T, 0);
        let sts = vec![
            Statement::new(BufferRef::C(0), vec![r(1, t)]),
            Statement::new(t, vec![r(1, BufferRef::A(0))]),
        ];
        let g = GraphIR::new(1, sts).unwrap();
        assert!(g.validate().unwrap_err().to_string().contains("before its definition"));
    }

    #[test]
    fn validate_catches_missing_and_double_outputs() {
        let g = GraphIR::new(
            2,
            vec![Statement::new(BufferRef::C(0), vec![r(1, BufferRef::A(0))])],
        )
        .unwrap();
        assert!(g.validate().unwrap_err().to_string().contains("never assigned"));

        let sts = vec![
            Statement::new(BufferRef::C(0), vec![r(1, BufferRef::A(0))]),
            Statement::new(BufferRef::C(0), vec![r(1, BufferRef::A(0))]),
        ];
        let g = GraphIR::new(1, sts).unwrap();
        assert!(g.validate().unwrap_err().to_string().contains("more than once"));
    }

    #[test]
    fn accumulation_requires_prior_assignment() {
        let sts = vec![Statement::new(
            BufferRef::C(0),
            vec![r(1, BufferRef::C(0)), r(1, BufferRef::A(0))],
        )];
        let g = GraphIR::new(1, sts).unwrap();
        assert!(g.validate().is_err());
    }
}
