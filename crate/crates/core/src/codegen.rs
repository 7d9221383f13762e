//! Emits a scheduled graph as a BLAS-style C call sequence.
//!
//! Every block is a view `{base, row, col, ld}` into a row-major parent. The
//! primitives are
//!
//! ```text
//! gemm(alpha, X, Y, beta, Z, m)    Z = alpha * X * Y + beta * Z
//! gema(alpha, X, beta, Y, Z, m)    Z = alpha * X + beta * Y
//! gecopy(alpha, X, Z, m)           Z = alpha * X
//! ```
//!
//! A sum of `k` terms costs `k - 1` gema calls. A product that is not the first
//! term of its sum goes through a scratch buffer first.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::graph::{BufferRef, GraphIR, Statement, Term, TermKind};

pub const DIALECTS: [&str; 1] = ["c-blas"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmitConfig {
    pub dialect: String,
    pub element_type_name: String,
    pub buffer_prefix: String,
    /// Free-form description placed in the header comment, e.g. the chain name.
    pub title: String,
}

impl Default for EmitConfig {
    fn default() -> Self {
        EmitConfig {
            dialect: "c-blas".into(),
            element_type_name: "double".into(),
            buffer_prefix: "W".into(),
            title: String::new(),
        }
    }
}

pub fn emit_callseq(g: &GraphIR, cfg: &EmitConfig) -> Result<String> {
    if !DIALECTS.contains(&cfg.dialect.as_str()) {
        return Err(Error::UnknownDialect(cfg.dialect.clone()));
    }
    let strategy = g.schedule_strategy().ok_or(Error::Unscheduled)?;
    g.validate()?;

    let alloc = allocate(g);
    let p = g.p();
    let ty = &cfg.element_type_name;
    let prefix = &cfg.buffer_prefix;
    let mut out = String::new();

    out.push_str("/*\n");
    if !cfg.title.is_empty() {
        let _ = writeln!(out, " * algorithm: {}", cfg.title);
    }
    let _ = writeln!(out, " * split factor: {p}");
    let _ = writeln!(out, " * block products: {}", g.multiply_count());
    let _ = writeln!(out, " * block additions: {}", g.addition_count());
    let _ = writeln!(out, " * schedule: {strategy}");
    let _ = writeln!(out, " * workspace: {} buffers of m*m elements", alloc.buffers);
    out.push_str(" */\n\n");

    let _ = writeln!(out, "typedef struct {{ {ty} *base; int row; int col; int ld; }} view;\n");
    let _ = writeln!(
        out,
        "void callseq(int n, {ty} *A, int lda, {ty} *B, int ldb, {ty} *C, int ldc, {ty} *work)\n{{"
    );
    let _ = writeln!(out, "    const int m = n / {p};");
    for b in 0..alloc.buffers {
        let _ = writeln!(out, "    {ty} *{prefix}{b} = work + {b} * m * m;");
    }
    for (name, base, ld) in [("ADP", "A", "lda"), ("BDP", "B", "ldb"), ("CDP", "C", "ldc")] {
        let _ = writeln!(out, "    view {name}[{}] = {{", p * p);
        for idx in 0..p * p {
            let _ = writeln!(out, "        {{{base}, {} * m, {} * m, {ld}}},", idx / p, idx % p);
        }
        out.push_str("    };\n");
    }
    for t in g.temporaries() {
        let _ = writeln!(out, "    view {t} = {{{prefix}{}, 0, 0, m}};", alloc.temp[&t]);
    }
    for (b, slot) in alloc.scratch.iter().enumerate() {
        if let Some(slot) = slot {
            let _ = writeln!(out, "    view X{b} = {{{prefix}{slot}, 0, 0, m}};");
        }
    }
    out.push('\n');

    for (idx, st) in g.statements().iter().enumerate() {
        let _ = writeln!(out, "    /* {st} */");
        emit_statement(&mut out, st, alloc.scratch[idx].map(|_| format!("X{idx}")));
    }
    let alpha = g.alpha();
    if !alpha.is_one() {
        for z in 0..p * p {
            let _ = writeln!(out, "    gecopy({}, CDP[{z}], CDP[{z}], m);", scalar(alpha));
        }
    }
    out.push_str("}\n");
    Ok(out)
}

fn view(r: BufferRef) -> String {
    r.to_string()
}

fn scalar(c: Coefficient) -> String {
    if c.is_integer() {
        format!("{}.0", c.numerator())
    } else {
        format!("({}.0 / {}.0)", c.numerator(), c.denominator())
    }
}

fn emit_statement(out: &mut String, st: &Statement, scratch: Option<String>) {
    let z = view(st.target);
    let mut terms = st.terms.iter().peekable();
    let first = terms.next().expect("statements have at least one term");
    match (first.kind, terms.peek().map(|t| t.kind)) {
        // Two leading refs combine in one call; also covers `Z << (Z) + (X)`.
        (TermKind::Ref(x), Some(TermKind::Ref(y))) => {
            let second = terms.next().unwrap();
            let _ = writeln!(
                out,
                "    gema({}, {}, {}, {}, {z}, m);",
                scalar(first.coeff),
                view(x),
                scalar(second.coeff),
                view(y)
            );
        }
        (TermKind::Ref(x), _) if x == st.target && first.coeff.is_one() => {}
        (TermKind::Ref(x), _) => {
            let _ = writeln!(out, "    gecopy({}, {}, {z}, m);", scalar(first.coeff), view(x));
        }
        (TermKind::Product(x, y), _) => {
            let _ = writeln!(
                out,
                "    gemm({}, {}, {}, 0.0, {z}, m);",
                scalar(first.coeff),
                view(x),
                view(y)
            );
        }
    }
    for Term { coeff, kind } in terms {
        match *kind {
            TermKind::Ref(x) => {
                let _ = writeln!(out, "    gema(1.0, {z}, {}, {}, {z}, m);", scalar(*coeff), view(x));
            }
            TermKind::Product(x, y) => {
                let w = scratch.as_deref().expect("scratch allocated for product sums");
                let _ = writeln!(out, "    gemm(1.0, {}, {}, 0.0, {w}, m);", view(x), view(y));
                let _ = writeln!(out, "    gema(1.0, {z}, {}, {w}, {z}, m);", scalar(*coeff));
            }
        }
    }
}

struct Allocation {
    buffers: usize,
    temp: HashMap<BufferRef, usize>,
    /// Scratch buffer per statement, for products that are not the leading term.
    scratch: Vec<Option<usize>>,
}

/// Linear scan over temporary live ranges; a buffer is reused once its value is dead.
fn allocate(g: &GraphIR) -> Allocation {
    let last = g.last_uses();
    let mut free: Vec<usize> = Vec::new();
    let mut buffers = 0;
    let mut take = |free: &mut Vec<usize>| {
        free.sort_unstable_by(|a, b| b.cmp(a));
        free.pop().unwrap_or_else(|| {
            buffers += 1;
            buffers - 1
        })
    };
    let mut temp = HashMap::new();
    let mut scratch = Vec::with_capacity(g.statements().len());
    let mut release: HashMap<usize, Vec<usize>> = HashMap::new();
    for (idx, st) in g.statements().iter().enumerate() {
        if st.target.is_temp() {
            let b = take(&mut free);
            temp.insert(st.target, b);
            let end = last.get(&st.target).copied().unwrap_or(idx).max(idx);
            release.entry(end).or_default().push(b);
        }
        let needs_scratch = st.terms.iter().skip(1).any(Term::is_product);
        let s = needs_scratch.then(|| take(&mut free));
        scratch.push(s);
        free.extend(s);
        free.extend(release.remove(&idx).unwrap_or_default());
    }
    Allocation {
        buffers,
        temp,
        scratch,
    }
}

/// Number of `name(` calls in emitted text.
pub fn count_calls(source: &str, name: &str) -> usize {
    let needle = format!("    {name}(");
    source.lines().filter(|l| l.starts_with(&needle)).count()
}
