//! Graph interpreter and recursive multiplication with operation counters.
//!
//! Blocks of the inputs and of the output are addressed in place; only the
//! temporaries T, S and P own storage. Statements run in list order and each sum
//! is evaluated left to right into its target. A product that follows other terms
//! and bottoms out in the classical kernel accumulates straight into the target,
//! so a blocked classical graph reproduces the classical product bit for bit.

use std::collections::HashMap;

use crate::coefficient::Coefficient;
use crate::composer::ChainSpec;
use crate::error::{Error, Result};
use crate::graph::{build_bilinear_graph, schedule, BufferRef, GraphIR, Statement, Strategy, Term, TermKind};
use crate::kernel::{self, Block, BlockMut, Update};
use crate::matrix::DenseMatrix;

/// Counters for one recursion level (level 0 is the outermost split).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelStats {
    pub block_multiplies: u64,
    pub block_adds: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExecStats {
    /// Scalar multiplications performed inside classical base-case products.
    pub base_multiplies: u64,
    /// Block products issued by graph statements, all levels.
    pub block_multiplies: u64,
    /// Block additions/subtractions (signs folded), all levels.
    pub block_adds: u64,
    /// Element additions performed by those block additions.
    pub element_adds: u64,
    /// Block scalings by coefficients other than +1/-1.
    pub block_scalings: u64,
    /// Largest number of temporary elements alive at once, across all active levels.
    pub peak_workspace_elements: u64,
    pub levels: Vec<LevelStats>,
}

struct LevelPlan {
    graph: GraphIR,
    /// Temporaries to release after each statement.
    release_after: Vec<Vec<BufferRef>>,
}

impl LevelPlan {
    fn new(graph: GraphIR) -> Result<Self> {
        graph.validate()?;
        let last = graph.last_uses();
        let mut release_after = vec![Vec::new(); graph.statements().len()];
        for (idx, st) in graph.statements().iter().enumerate() {
            if st.target.is_temp() {
                let at = last.get(&st.target).copied().unwrap_or(idx).max(idx);
                release_after[at].push(st.target);
            }
        }
        Ok(LevelPlan { graph, release_after })
    }
}

/// Prepared recursion: one scheduled graph per chain member.
pub struct RecursivePlan {
    levels: Vec<LevelPlan>,
    cutoff: usize,
}

impl RecursivePlan {
    pub fn new(chain: &ChainSpec, cutoff: usize, strategy: Strategy) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
        }
        let levels = chain
            .members()
            .iter()
            .map(|t| LevelPlan::new(schedule(&build_bilinear_graph(t)?, strategy)?))
            .collect::<Result<_>>()?;
        Ok(RecursivePlan { levels, cutoff })
    }

    /// Checks that every level that will split can split `n` evenly.
    pub fn check_size(&self, n: usize) -> Result<()> {
        let mut side = n;
        for (level, plan) in self.levels.iter().enumerate() {
            if side <= self.cutoff {
                break;
            }
            let p = plan.graph.p();
            if !side.is_multiple_of(p) {
                return Err(Error::IndivisibleAtLevel { level, n: side, p });
            }
            side /= p;
        }
        Ok(())
    }

    pub fn multiply(&self, a: &DenseMatrix, b: &DenseMatrix) -> Result<(DenseMatrix, ExecStats)> {
        let n = same_size(a, b)?;
        self.check_size(n)?;
        let mut engine = Engine::new(&self.levels, self.cutoff);
        let mut c = vec![0.0; n * n];
        engine.product_into(
            0,
            Block::whole(a.as_slice(), n),
            Block::whole(b.as_slice(), n),
            n,
            &mut BlockMut::whole(&mut c, n),
            false,
        )?;
        Ok((DenseMatrix::from_vec(n, c)?, engine.stats))
    }
}

fn same_size(a: &DenseMatrix, b: &DenseMatrix) -> Result<usize> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(a.n())
}

/// Runs one graph on `a * b`; products inside it use the classical kernel.
pub fn execute(g: &GraphIR, a: &DenseMatrix, b: &DenseMatrix) -> Result<(DenseMatrix, ExecStats)> {
    let n = same_size(a, b)?;
    let levels = [LevelPlan::new(g.clone())?];
    let mut engine = Engine::new(&levels, 0);
    let mut c = vec![0.0; n * n];
    engine.run_level(
        0,
        Block::whole(a.as_slice(), n),
        Block::whole(b.as_slice(), n),
        n,
        &mut BlockMut::whole(&mut c, n),
    )?;
    Ok((DenseMatrix::from_vec(n, c)?, engine.stats))
}

/// Applies `chain[0]` at the top and recurses into every product with the rest of the
/// chain; blocks of side `<= cutoff`, or any block once the chain is used up, go to
/// the classical kernel. Uses the fused schedule.
pub fn recursive_multiply(
    chain: &ChainSpec,
    a: &DenseMatrix,
    b: &DenseMatrix,
    cutoff: usize,
) -> Result<(DenseMatrix, ExecStats)> {
    RecursivePlan::new(chain, cutoff, Strategy::Fused)?.multiply(a, b)
}

struct Engine<'a> {
    levels: &'a [LevelPlan],
    cutoff: usize,
    stats: ExecStats,
    live: u64,
    /// Released temporaries, reused before asking the allocator again.
    pool: Vec<Vec<f64>>,
}

impl<'a> Engine<'a> {
    fn new(levels: &'a [LevelPlan], cutoff: usize) -> Self {
        Engine {
            levels,
            cutoff,
            stats: ExecStats {
                levels: vec![LevelStats::default(); levels.len()],
                ..ExecStats::default()
            },
            live: 0,
            pool: Vec::new(),
        }
    }

    fn is_base(&self, level: usize, n: usize) -> bool {
        level >= self.levels.len() || n <= self.cutoff
    }

    /// A buffer of `len` elements with unspecified contents.
    fn acquire(&mut self, len: usize) -> Vec<f64> {
        self.live += len as u64;
        self.stats.peak_workspace_elements = self.stats.peak_workspace_elements.max(self.live);
        match self.pool.iter().position(|v| v.len() == len) {
            Some(i) => self.pool.swap_remove(i),
            None => vec![0.0; len],
        }
    }

    fn release(&mut self, buf: Vec<f64>) {
        self.live -= buf.len() as u64;
        self.pool.push(buf);
    }

    /// `dst = a * b`, or `dst = -(a * b)` when `negate`.
    fn product_into(
        &mut self,
        level: usize,
        a: Block<'_>,
        b: Block<'_>,
        n: usize,
        dst: &mut BlockMut<'_>,
        negate: bool,
    ) -> Result<()> {
        if self.is_base(level, n) {
            self.stats.base_multiplies += (n as u64).pow(3);
            kernel::gemm(dst, a, b, n, negate, Update::Overwrite);
        } else {
            self.run_level(level, a, b, n, dst)?;
            if negate {
                kernel::scale(dst, n, -1.0);
            }
        }
        Ok(())
    }

    fn run_level(&mut self, level: usize, a: Block<'_>, b: Block<'_>, n: usize, out: &mut BlockMut<'_>) -> Result<()> {
        let plan = &self.levels[level];
        let p = plan.graph.p();
        if !n.is_multiple_of(p) {
            return Err(Error::IndivisibleSize { n, p });
        }
        let m = n / p;
        let mut temps: HashMap<BufferRef, Vec<f64>> = HashMap::new();
        for (idx, st) in plan.graph.statements().iter().enumerate() {
            let operands = Operands { a, b, p, m, temps: &temps };
            match st.target {
                BufferRef::C(z) => self.eval(level, st, &operands, &mut out.sub(p, z, m))?,
                target => {
                    let mut buf = self.acquire(m * m);
                    self.eval(level, st, &operands, &mut BlockMut::whole(&mut buf, m))?;
                    temps.insert(target, buf);
                }
            }
            for dead in &plan.release_after[idx] {
                if let Some(buf) = temps.remove(dead) {
                    self.release(buf);
                }
            }
        }
        let alpha = plan.graph.alpha();
        if !alpha.is_one() {
            kernel::scale(out, n, alpha.to_f64());
        }
        Ok(())
    }

    fn eval(&mut self, level: usize, st: &Statement, ops: &Operands<'_, '_>, dst: &mut BlockMut<'_>) -> Result<()> {
        let m = ops.m;
        let mut rest = &st.terms[..];
        if st.is_continuation() {
            rest = &rest[1..];
        } else {
            let first = &rest[0];
            if let TermKind::Product(x, y) = first.kind {
                self.count_scaling(first.coeff);
                self.count_product(level);
                let c = first.coeff;
                self.product_into(level + 1, ops.get(x)?, ops.get(y)?, m, dst, c.is_unit() && c.is_negative())?;
                if !c.is_unit() {
                    kernel::scale(dst, m, c.to_f64());
                }
                rest = &rest[1..];
            } else {
                let run = self.ref_run(level, rest, ops, true)?;
                kernel::set_sum(dst, m, &run);
                rest = &rest[run.len()..];
            }
        }
        while let Some(term) = rest.first() {
            match term.kind {
                TermKind::Ref(_) => {
                    let run = self.ref_run(level, rest, ops, false)?;
                    kernel::add_sum(dst, m, &run);
                    rest = &rest[run.len()..];
                }
                TermKind::Product(x, y) => {
                    self.count_add(level, m);
                    self.count_scaling(term.coeff);
                    self.count_product(level);
                    let c = term.coeff;
                    let (x, y) = (ops.get(x)?, ops.get(y)?);
                    if self.is_base(level + 1, m) && c.is_unit() {
                        self.stats.base_multiplies += (m as u64).pow(3);
                        kernel::gemm(dst, x, y, m, c.is_negative(), Update::Accumulate);
                    } else {
                        let mut buf = self.acquire(m * m);
                        self.product_into(level + 1, x, y, m, &mut BlockMut::whole(&mut buf, m), false)?;
                        kernel::add_sum(dst, m, &[(c.to_f64(), Block::whole(&buf, m))]);
                        self.release(buf);
                    }
                    rest = &rest[1..];
                }
            }
        }
        Ok(())
    }

    /// The leading run of reference terms, counted as additions; a run that starts
    /// the sum has one addition fewer than it has terms.
    fn ref_run<'o>(
        &mut self,
        level: usize,
        terms: &[Term],
        ops: &'o Operands<'_, '_>,
        starts_sum: bool,
    ) -> Result<Vec<(f64, Block<'o>)>> {
        let mut run = Vec::new();
        for term in terms {
            let TermKind::Ref(r) = term.kind else { break };
            if !(starts_sum && run.is_empty()) {
                self.count_add(level, ops.m);
            }
            self.count_scaling(term.coeff);
            run.push((term.coeff.to_f64(), ops.get(r)?));
        }
        Ok(run)
    }

    fn count_product(&mut self, level: usize) {
        self.stats.block_multiplies += 1;
        self.stats.levels[level].block_multiplies += 1;
    }

    fn count_add(&mut self, level: usize, m: usize) {
        self.stats.block_adds += 1;
        self.stats.element_adds += (m * m) as u64;
        self.stats.levels[level].block_adds += 1;
    }

    fn count_scaling(&mut self, c: Coefficient) {
        if !c.is_zero() && !c.is_unit() {
            self.stats.block_scalings += 1;
        }
    }
}

/// What a statement at one level can read: the input blocks and the live temporaries.
struct Operands<'b, 't> {
    a: Block<'b>,
    b: Block<'b>,
    p: usize,
    m: usize,
    temps: &'t HashMap<BufferRef, Vec<f64>>,
}

impl<'b> Operands<'b, '_> {
    fn get(&self, r: BufferRef) -> Result<Block<'_>> {
        match r {
            BufferRef::A(i) => Ok(self.a.sub(self.p, i, self.m)),
            BufferRef::B(i) => Ok(self.b.sub(self.p, i, self.m)),
            BufferRef::Temp(..) => self
                .temps
                .get(&r)
                .map(|v| Block::whole(v, self.m))
                .ok_or_else(|| Error::InvalidGraph(format!("{r} is not available"))),
            BufferRef::C(_) => Err(Error::InvalidGraph(format!("{r} cannot be an operand"))),
        }
    }
}
