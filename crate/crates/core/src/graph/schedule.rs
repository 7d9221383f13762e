use std::collections::{BTreeMap, HashMap, HashSet};

use super::{BufferRef, GraphIR, Statement, Strategy, Term};
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};

/// Reorders statements into the requested strategy.
///
/// Temporary definitions keep their relative order wherever dependences allow.
/// Each output's terms keep their order, so both strategies evaluate every
/// output sum in the same sequence.
pub fn schedule(g: &GraphIR, strategy: Strategy) -> Result<GraphIR> {
    let (defs, outputs) = decompose(g)?;
    let defs = topological(defs)?;

    let mut statements = Vec::with_capacity(defs.len() + outputs.len());
    match strategy {
        Strategy::ProductMajor => {
            statements.extend(defs);
            for (z, terms) in outputs {
                statements.push(Statement::new(BufferRef::C(z), terms));
            }
        }
        Strategy::Fused => {
            let mut defined: HashSet<BufferRef> = HashSet::new();
            let mut pending: Vec<(usize, Vec<Term>, usize)> =
                outputs.into_iter().map(|(z, t)| (z, t, 0)).collect();
            flush(&mut statements, &mut pending, &defined);
            for def in defs {
                defined.insert(def.target);
                statements.push(def);
                flush(&mut statements, &mut pending, &defined);
            }
            if pending.iter().any(|(_, terms, next)| *next < terms.len()) {
                return Err(Error::InvalidGraph(
                    "output terms reference undefined temporaries".into(),
                ));
            }
        }
    }
    let out = GraphIR::new(g.p(), statements)?
        .with_alpha(g.alpha())
        .with_schedule(strategy);
    out.validate()?;
    Ok(out)
}

type OutputTerms = BTreeMap<usize, Vec<Term>>;

/// Splits a graph into temporary definitions and the full ordered term list of each output.
fn decompose(g: &GraphIR) -> Result<(Vec<Statement>, OutputTerms)> {
    let mut defs = Vec::new();
    let mut outputs: OutputTerms = BTreeMap::new();
    for st in g.statements() {
        match st.target {
            BufferRef::C(z) => {
                let skip = usize::from(st.is_continuation());
                if skip == 0 && outputs.contains_key(&z) {
                    return Err(Error::InvalidGraph(format!(
                        "output {} is assigned more than once",
                        st.target
                    )));
                }
                let terms = &st.terms[skip..];
                if let Some(r) = terms.iter().flat_map(Term::reads).find(BufferRef::is_output) {
                    return Err(Error::InvalidGraph(format!(
                        "{} reads output {r}; outputs may only accumulate into themselves",
                        st.target
                    )));
                }
                outputs.entry(z).or_default().extend_from_slice(terms);
            }
            _ => defs.push(st.clone()),
        }
    }
    Ok((defs, outputs))
}

/// Stable topological sort of temporary definitions (earliest ready statement first).
fn topological(defs: Vec<Statement>) -> Result<Vec<Statement>> {
    let index: HashMap<BufferRef, usize> = defs.iter().enumerate().map(|(i, s)| (s.target, i)).collect();
    let deps: Vec<Vec<usize>> = defs
        .iter()
        .map(|s| {
            s.reads()
                .filter(BufferRef::is_temp)
                .map(|r| {
                    index.get(&r).copied().ok_or_else(|| {
                        Error::InvalidGraph(format!("{} reads undefined temporary {r}", s.target))
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut done = vec![false; defs.len()];
    let mut order = Vec::with_capacity(defs.len());
    while order.len() < defs.len() {
        let next = (0..defs.len()).find(|&i| !done[i] && deps[i].iter().all(|&d| done[d]));
        match next {
            Some(i) => {
                done[i] = true;
                order.push(i);
            }
            None => {
                let stuck = (0..defs.len()).find(|&i| !done[i]).unwrap_or(0);
                return Err(Error::Cycle(defs[stuck].target.to_string()));
            }
        }
    }
    let mut slots: Vec<Option<Statement>> = defs.into_iter().map(Some).collect();
    Ok(order.into_iter().filter_map(|i| slots[i].take()).collect())
}

/// Emits, per output in ascending order, the longest run of pending terms whose operands exist.
fn flush(out: &mut Vec<Statement>, pending: &mut [(usize, Vec<Term>, usize)], defined: &HashSet<BufferRef>) {
    for (z, terms, next) in pending.iter_mut() {
        let start = *next;
        while *next < terms.len()
            && terms[*next]
                .reads()
                .all(|r| !r.is_temp() || defined.contains(&r))
        {
            *next += 1;
        }
        if *next == start {
            continue;
        }
        let target = BufferRef::C(*z);
        let mut body = Vec::with_capacity(*next - start + 1);
        if start > 0 {
            body.push(Term::reference(Coefficient::ONE, target));
        }
        body.extend_from_slice(&terms[start..*next]);
        out.push(Statement::new(target, body));
    }
}
