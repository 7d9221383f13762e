use super::{BufferRef, GraphIR, Statement, TempKind, Term};
use crate::catalog::BilinearTriple;
use crate::coefficient::Coefficient;
use crate::error::Result;

/// Blocked classical product: output `C[i*p+j]` sums `A[i*p+k] * B[k*p+j]` over ascending `k`,
/// outputs in `i`-major, `j`-minor order.
pub fn build_classical_graph(p: usize) -> Result<GraphIR> {
    let mut statements = Vec::with_capacity(p * p);
    for i in 0..p {
        for j in 0..p {
            let terms = (0..p)
                .map(|k| Term::product(Coefficient::ONE, BufferRef::A(i * p + k), BufferRef::B(k * p + j)))
                .collect();
            statements.push(Statement::new(BufferRef::C(i * p + j), terms));
        }
    }
    GraphIR::new(p, statements)
}

/// Lowers a triple to statements in product-major order: for each product `j`,
/// `T_j` and `S_j` (skipped when the column is a single `+1` entry, which is then
/// referenced directly) and `P_j = T_j * S_j`; then one accumulation per output,
/// products in ascending order.
pub fn build_bilinear_graph(t: &BilinearTriple) -> Result<GraphIR> {
    let p = t.p();
    let mut statements = Vec::new();
    for q in 0..t.rank() {
        let left = operand(&mut statements, t.u().column_nonzeros(q), TempKind::T, q, BufferRef::A);
        let right = operand(&mut statements, t.v().column_nonzeros(q), TempKind::S, q, BufferRef::B);
        statements.push(Statement::new(
            BufferRef::Temp(TempKind::P, q),
            vec![Term::product(Coefficient::ONE, left, right)],
        ));
    }
    for z in 0..p * p {
        let mut terms: Vec<Term> = t
            .w()
            .row_nonzeros(z)
            .into_iter()
            .map(|(q, c)| Term::reference(c, BufferRef::Temp(TempKind::P, q)))
            .collect();
        if terms.is_empty() {
            // An all-zero row still has to define its output.
            terms.push(Term::reference(Coefficient::ZERO, BufferRef::Temp(TempKind::P, 0)));
        }
        statements.push(Statement::new(BufferRef::C(z), terms));
    }
    GraphIR::new(p, statements)
}

fn operand(
    statements: &mut Vec<Statement>,
    nonzeros: Vec<(usize, Coefficient)>,
    kind: TempKind,
    q: usize,
    input: fn(usize) -> BufferRef,
) -> BufferRef {
    if let [(x, c)] = nonzeros.as_slice() {
        if c.is_one() {
            return input(*x);
        }
    }
    let target = BufferRef::Temp(kind, q);
    let terms = nonzeros
        .into_iter()
        .map(|(x, c)| Term::reference(c, input(x)))
        .collect();
    statements.push(Statement::new(target, terms));
    target
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::graph::TermKind;

    #[test]
    fn classical_counts() {
        let g1 = build_classical_graph(1).unwrap();
        assert_eq!(g1.statements().len(), 1);
        assert_eq!(g1.multiply_count(), 1);
        let g3 = build_classical_graph(3).unwrap();
        assert_eq!(g3.statements().len(), 9);
        assert_eq!(g3.multiply_count(), 27);
        g3.validate().unwrap();
    }

    #[test]
    fn strassen_products() {
        let g = build_bilinear_graph(&builtin("strassen-p2").unwrap()).unwrap();
        g.validate().unwrap();
        assert_eq!(g.multiply_count(), 7);
        let p5 = g
            .statements()
            .iter()
            .find(|s| s.target == BufferRef::Temp(TempKind::P, 5))
            .unwrap();
        assert_eq!(
            p5.terms[0].kind,
            TermKind::Product(BufferRef::A(0), BufferRef::B(0))
        );
        let c3 = g
            .statements()
            .iter()
            .find(|s| s.target == BufferRef::C(3))
            .unwrap();
        let used: Vec<BufferRef> = c3.reads().collect();
        assert_eq!(
            used,
            vec![BufferRef::Temp(TempKind::P, 0), BufferRef::Temp(TempKind::P, 6)]
        );
    }

    #[test]
    fn classical_triple_matches_classical_graph_shape() {
        let via_triple = build_bilinear_graph(&builtin("classical-p2").unwrap()).unwrap();
        let direct = build_classical_graph(2).unwrap();
        assert_eq!(via_triple.multiply_count(), 8);
        assert_eq!(direct.multiply_count(), 8);
        assert_eq!(via_triple.addition_count(), direct.addition_count());
        // no staging temporaries: every operand is a direct block reference
        assert!(via_triple
            .temporaries()
            .iter()
            .all(|t| matches!(t, BufferRef::Temp(TempKind::P, _))));
    }
}
