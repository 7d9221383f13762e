//! End-to-end paths through several modules at once.

use fastmm::analysis::count_model;
use fastmm::catalog::Factor;
use fastmm::graph::{build_bilinear_graph, parse_graph, pretty_print, schedule};
use fastmm::{
    brent_check, builtin, chain_flatten, execute, kron_compose, load_triple, naive_multiply, recursive_multiply,
    save_triple, BilinearTriple, ChainSpec, Coefficient, Distribution, Strategy, VerifyMode, BUILTIN_NAMES,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn inputs(n: usize, dist: Distribution, seed: u64) -> (fastmm::DenseMatrix, fastmm::DenseMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (dist.sample(n, &mut rng), dist.sample(n, &mut rng))
}

/// Every single-entry perturbation of a coefficient that is easy to reach by a typo.
fn mutants(t: &BilinearTriple) -> Vec<BilinearTriple> {
    let mut out = Vec::new();
    for (which, m) in [(Factor::U, t.u()), (Factor::V, t.v()), (Factor::W, t.w())] {
        for row in 0..m.rows() {
            // one mutation per row keeps the corpus small
            let col = (row * 5 + 3) % m.cols();
            let c = m.get(row, col);
            let bumped = if c.is_zero() { Coefficient::from(1) } else { -c };
            out.push(t.with_entry(which, row, col, bumped).unwrap());
        }
    }
    out
}

#[test]
fn eager_and_lazy_composition_agree() {
    for (spec, n) in [("2,3", 36), ("3,2", 36), ("2,2", 16), ("2,2,3", 24)] {
        let chain = ChainSpec::parse(spec).unwrap();
        let flat = chain_flatten(&chain).unwrap();
        let g = build_bilinear_graph(&flat).unwrap();
        let (a, b) = inputs(n, Distribution::Integer, 9);
        let (eager, eager_stats) = execute(&g, &a, &b).unwrap();
        let (lazy, _) = recursive_multiply(&chain, &a, &b, 1).unwrap();
        let naive = naive_multiply(&a, &b).unwrap();
        assert!(eager.bitwise_eq(&lazy), "{spec}");
        assert!(eager.bitwise_eq(&naive), "{spec}");
        assert_eq!(eager_stats.block_multiplies as usize, flat.rank());

        let (a, b) = inputs(n, Distribution::Uniform, 9);
        let (eager, _) = execute(&g, &a, &b).unwrap();
        let (lazy, _) = recursive_multiply(&chain, &a, &b, 1).unwrap();
        assert!(eager.max_rel_error(&lazy).unwrap() < 1e-13, "{spec}");
    }
}

#[test]
fn composition_preserves_validity() {
    let names = BUILTIN_NAMES;
    for outer in names {
        for inner in names {
            let (o, i) = (builtin(outer).unwrap(), builtin(inner).unwrap());
            let k = kron_compose(&o, &i).unwrap();
            assert_eq!(k.rank(), o.rank() * i.rank());
            assert!(brent_check(&k, VerifyMode::Exhaustive).passed, "{outer} * {inner}");
        }
    }
    // a broken factor breaks the product
    let bad = mutants(&builtin("strassen-p2").unwrap()).remove(0);
    let k = kron_compose(&bad, &builtin("classical-p2").unwrap()).unwrap();
    assert!(!brent_check(&k, VerifyMode::Exhaustive).passed);
    let k = kron_compose(&builtin("classical-p2").unwrap(), &bad).unwrap();
    assert!(!brent_check(&k, VerifyMode::Exhaustive).passed);
}

#[test]
fn sampled_and_exhaustive_agree() {
    let sampled = VerifyMode::Sampled { seed: 0, trials: 20 };
    for name in BUILTIN_NAMES {
        let t = builtin(name).unwrap();
        assert!(brent_check(&t, VerifyMode::Exhaustive).passed);
        assert!(brent_check(&t, sampled).passed);
        for m in mutants(&t) {
            let e = brent_check(&m, VerifyMode::Exhaustive).passed;
            assert_eq!(e, brent_check(&m, sampled).passed, "{name}");
            assert!(!e);
        }
    }
}

#[test]
fn files_and_text_survive_the_pipeline() {
    let flat = chain_flatten(&ChainSpec::parse("2,3").unwrap()).unwrap();
    let again = load_triple(&save_triple(&flat)).unwrap();
    assert_eq!(again, flat);
    for s in [Strategy::Fused, Strategy::ProductMajor] {
        let g = schedule(&build_bilinear_graph(&again).unwrap(), s).unwrap();
        let text = pretty_print(&g);
        assert_eq!(pretty_print(&parse_graph(&text).unwrap()), text);
        let (a, b) = inputs(12, Distribution::Integer, 1);
        let (c, _) = execute(&parse_graph(&text).unwrap(), &a, &b).unwrap();
        assert!(c.bitwise_eq(&naive_multiply(&a, &b).unwrap()));
    }
}

#[test]
fn model_tracks_measurement_with_cutoffs() {
    for (spec, n, cutoff) in [("2,2,2", 64, 8), ("3,2", 48, 4), ("2,3,2", 48, 16), ("2", 10, 3)] {
        let chain = ChainSpec::parse(spec).unwrap();
        let (a, b) = inputs(n, Distribution::Uniform, 2);
        let (_, s) = recursive_multiply(&chain, &a, &b, cutoff).unwrap();
        let m = count_model(&chain, n, cutoff).unwrap();
        assert_eq!(
            (s.base_multiplies, s.block_multiplies, s.block_adds, s.element_adds),
            (m.base_multiplies, m.block_multiplies, m.block_adds, m.element_adds),
            "{spec} n={n} cutoff={cutoff}"
        );
    }
}
