use std::path::Path;
use std::process::Command;

use fastmm::catalog::Factor;
use fastmm::{builtin, load_triple, save_triple, Coefficient};
use fastmm_cli::{dispatch, ERROR_HEADER, MODEL_HEADER};

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Outcome {
    let mut argv = vec!["fastmm".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = dispatch(argv, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_builtin_passes() {
    let o = cli(&["verify", "--builtin", "strassen-p2"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.starts_with("PASS strassen-p2"));
    assert!(o.out.contains("64 equations checked, 0 failed"));
}

#[test]
fn verify_corrupted_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let bad = builtin("strassen-p2")
        .unwrap()
        .with_entry(Factor::W, 3, 6, Coefficient::from(0))
        .unwrap();
    let path = dir.path().join("corrupted.json");
    std::fs::write(&path, save_triple(&bad)).unwrap();

    let o = cli(&["verify", "--algo", path_str(&path)]);
    assert_eq!(o.code, 1);
    assert!(o.out.starts_with("FAIL"));
    // each violation gets its own indented line
    assert!(o.out.lines().skip(1).count() > 0);
    assert!(o.out.lines().skip(1).all(|l| l.starts_with("  ")));
}

#[test]
fn violations_listing_is_capped() {
    let dir = tempfile::tempdir().unwrap();
    let t = builtin("laderman-p3").unwrap();
    let mut bad = t.clone();
    for z in 0..9 {
        for j in 0..t.rank() {
            let c = t.w().get(z, j);
            bad = bad.with_entry(Factor::W, z, j, -c).unwrap();
        }
    }
    let path = dir.path().join("negated.json");
    std::fs::write(&path, save_triple(&bad)).unwrap();
    let o = cli(&["verify", "--algo", path_str(&path)]);
    assert_eq!(o.code, 1);
    let listed = o.out.lines().filter(|l| l.starts_with("  x=")).count();
    assert!(listed <= 32);
}

#[test]
fn no_arguments_is_a_usage_error() {
    let o = cli(&[]);
    assert_eq!(o.code, 2);
    assert!(o.out.is_empty());
    assert!(o.err.contains("Usage:"));
}

#[test]
fn unknown_subcommand_and_flag() {
    assert_eq!(cli(&["frobnicate"]).code, 2);
    let o = cli(&["verify", "--builtin", "strassen-p2", "--bogus"]);
    assert_eq!(o.code, 2);
    assert!(o.err.contains("Usage:"));
    // exactly one source is required
    assert_eq!(cli(&["verify"]).code, 2);
    assert_eq!(cli(&["verify", "--builtin", "strassen-p2", "--algo", "x.json"]).code, 2);
}

#[test]
fn help_goes_to_stdout() {
    let o = cli(&["--help"]);
    assert_eq!(o.code, 0);
    assert!(o.out.contains("bench"));
    assert!(o.err.is_empty());
}

#[test]
fn bad_inputs_exit_two() {
    let o = cli(&["verify", "--builtin", "winograd-p2"]);
    assert_eq!(o.code, 2);
    assert!(o.err.contains("strassen-p2"), "{}", o.err);
    assert_eq!(cli(&["verify", "--algo", "/nonexistent/triple.json"]).code, 2);
    assert_eq!(cli(&["run", "--chain", "2,3", "--n", "32", "--cutoff", "1"]).code, 2);
    assert_eq!(cli(&["run", "--chain", "2", "--n", "8", "--dist", "normal"]).code, 2);
}

#[test]
fn list_shows_builtins() {
    let o = cli(&["list"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.out.lines().count(), 4);
    assert!(o.out.contains("laderman-p3\tp=3\trank=23"));
}

#[test]
fn compose_writes_loadable_triple() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let o = cli(&["compose", "--chain", "2,3", "--out", path_str(&path)]);
    assert_eq!(o.code, 0, "{}", o.err);
    let t = load_triple(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!((t.p(), t.rank()), (6, 161));
    let v = cli(&["verify", "--algo", path_str(&path)]);
    assert_eq!(v.code, 0);
    assert!(v.out.contains("46656 equations checked"));

    // without --out the triple goes to stdout
    let o = cli(&["compose", "--chain", "3x2"]);
    assert_eq!(load_triple(&o.out).unwrap().rank(), 161);
}

#[test]
fn print_classical_matches_text_form() {
    let o = cli(&["print", "--classical", "2"]);
    assert_eq!(o.code, 0);
    assert_eq!(
        o.out,
        "CDP[0] << (ADP[0]) * (BDP[0]) + (ADP[1]) * (BDP[2])\n\
         CDP[1] << (ADP[0]) * (BDP[1]) + (ADP[1]) * (BDP[3])\n\
         CDP[2] << (ADP[2]) * (BDP[0]) + (ADP[3]) * (BDP[2])\n\
         CDP[3] << (ADP[2]) * (BDP[1]) + (ADP[3]) * (BDP[3])\n"
    );
    let s = cli(&["print", "--builtin", "strassen-p2", "--schedule", "product-major"]);
    assert_eq!(s.code, 0);
    assert_eq!(s.out.lines().filter(|l| l.starts_with('P')).count(), 7);
    assert_eq!(cli(&["print", "--classical", "2", "--schedule", "eager"]).code, 2);
}

#[test]
fn run_check_reports_counts() {
    let o = cli(&["run", "--chain", "2,3", "--n", "36", "--cutoff", "1", "--check"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.contains("base_multiplies: 34776\n"));
    assert!(o.out.contains("check: PASS"));
    let i = cli(&["run", "--chain", "2x2", "--n", "16", "--cutoff", "1", "--check", "--dist", "integer"]);
    assert!(i.out.contains("max_rel_error: 0e0"));
}

#[test]
fn model_and_error_rows() {
    let o = cli(&["model", "--chain", "2", "--n", "6", "--header"]);
    assert_eq!(o.code, 0);
    let lines: Vec<&str> = o.out.lines().collect();
    assert_eq!(lines[0], MODEL_HEADER);
    assert_eq!(lines[1], "6,2,1,189,7,22,198,0,18,1.142857");

    let o = cli(&["error", "--chain", "2", "--n", "16", "--trials", "4", "--seed", "3"]);
    assert_eq!(o.code, 0);
    assert_eq!(o.out.lines().count(), 1);
    let fields: Vec<&str> = o.out.trim_end().split(',').collect();
    assert_eq!(fields.len(), ERROR_HEADER.split(',').count());
    assert_eq!(&fields[..5], ["16", "2", "4", "3", "uniform"]);
    assert_eq!(o.out, cli(&["error", "--chain", "2", "--n", "16", "--trials", "4", "--seed", "3"]).out);
}

#[test]
fn codegen_to_file_is_ascii_lf() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strassen.c");
    let o = cli(&["codegen", "--builtin", "strassen-p2", "--n", "64", "--dialect", "c-blas", "-o", path_str(&path)]);
    assert_eq!(o.code, 0, "{}", o.err);
    let src = std::fs::read(&path).unwrap();
    assert!(src.is_ascii());
    assert!(!src.contains(&b'\r'));
    let src = String::from_utf8(src).unwrap();
    assert_eq!(fastmm::codegen::count_calls(&src, "gemm"), 7);

    assert_eq!(cli(&["codegen", "--builtin", "strassen-p2", "--n", "63"]).code, 2);
    assert_eq!(cli(&["codegen", "--classical", "2", "--dialect", "cuda"]).code, 2);
}

#[test]
fn bench_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.csv");
    let o = cli(&[
        "bench", "--sizes", "32,48", "--chains", "classical,2,3", "--cutoff", "8", "--reps", "3", "--seed", "5",
        "--csv", path_str(&path), "--check",
    ]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.is_empty());
    // 3 does not divide 32
    assert_eq!(o.err.lines().filter(|l| l.starts_with("warning:")).count(), 1);
    let csv = std::fs::read_to_string(&path).unwrap();
    let keys: Vec<String> = csv.lines().skip(1).map(|l| l.split(',').take(2).collect::<Vec<_>>().join(",")).collect();
    assert_eq!(keys, ["48,classical", "48,2", "48,3", "32,classical", "32,2"]);
    assert_eq!(cli(&["bench", "--sizes", "32", "--reps", "2"]).code, 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fastmm");
    let ok = Command::new(bin).args(["verify", "--builtin", "strassen-p2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("PASS"));
    let none = Command::new(bin).output().unwrap();
    assert_eq!(none.status.code(), Some(2));
    assert!(none.stdout.is_empty());
    assert!(String::from_utf8_lossy(&none.stderr).contains("Usage:"));
}
