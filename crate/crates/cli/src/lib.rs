//! Command-line front end for the `fastmm` workbench.
//!
//! [`dispatch`] does all the work and returns the exit code, so tests can drive
//! it without spawning a process: 0 on success, 1 when a verification or check
//! fails, 2 on a usage or input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fastmm::analysis::{count_model, error_profile};
use fastmm::bench::{bench_run, BenchConfig};
use fastmm::codegen::{emit_callseq, EmitConfig};
use fastmm::executor::RecursivePlan;
use fastmm::graph::{build_bilinear_graph, build_classical_graph, pretty_print, schedule};
use fastmm::verifier::MAX_VIOLATIONS;
use fastmm::{
    brent_check, builtin, chain_flatten, load_triple, naive_multiply, save_triple, BilinearTriple, ChainSpec,
    Distribution, Strategy, VerifyMode, BUILTIN_NAMES,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MODEL_HEADER: &str = "n,chain,cutoff,base_multiplies,block_multiplies,block_adds,element_adds,\
block_scalings,workspace_elements,speedup_vs_classical";
pub const ERROR_HEADER: &str = "n,chain,trials,seed,dist,median_max_rel_error,max_max_rel_error";

/// Largest error `run --check` accepts on real-valued inputs. Integer inputs must be exact.
pub const RUN_TOLERANCE: f64 = 1e-10;

#[derive(Parser, Debug)]
#[command(name = "fastmm", version, about = "Fast matrix multiplication workbench", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the builtin algorithms.
    List,
    /// Check a triple against the Brent equations.
    Verify {
        #[command(flatten)]
        source: Source,
        /// exhaustive or sampled; the default depends on the split factor.
        #[arg(long)]
        mode: Option<String>,
        /// Trials for sampled mode.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Flatten a chain into a single triple, written in catalog format.
    Compose {
        #[arg(long)]
        chain: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the block graph of an algorithm.
    Print {
        #[command(flatten)]
        source: GraphSource,
        /// fused or product-major
        #[arg(long)]
        schedule: Option<Strategy>,
    },
    /// Multiply random matrices with a chain and report the counters.
    Run {
        #[arg(long)]
        chain: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        cutoff: usize,
        /// Compare against the classical product; exit 1 on mismatch.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// uniform or integer
        #[arg(long, default_value = "uniform")]
        dist: Distribution,
        #[arg(long, default_value = "fused")]
        schedule: Strategy,
    },
    /// Predicted operation and workspace counts, as one CSV row.
    Model {
        #[arg(long)]
        chain: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        cutoff: usize,
        #[arg(long)]
        header: bool,
    },
    /// Measured rounding error against the classical product, as one CSV row.
    Error {
        #[arg(long)]
        chain: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "uniform")]
        dist: Distribution,
        #[arg(long)]
        header: bool,
    },
    /// Emit a call sequence for one level of an algorithm.
    Codegen {
        #[command(flatten)]
        source: GraphSource,
        /// If given, must be divisible by the split factor.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "c-blas")]
        dialect: String,
        #[arg(long, default_value = "fused")]
        schedule: Strategy,
        #[arg(long, default_value = "double")]
        element_type: String,
        #[arg(long, default_value = "W")]
        buffer_prefix: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Time chains against the classical product and write CSV.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Comma-separated chains; members within a chain are joined with `x`, e.g. `2,2x3`.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        chains: Vec<String>,
        #[arg(long, default_value_t = 64)]
        cutoff: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output if absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also report the error against the classical product.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    builtin: Option<String>,
    /// Triple in catalog (JSON) format.
    #[arg(long)]
    algo: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct GraphSource {
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    algo: Option<PathBuf>,
    /// Classical algorithm with split factor P.
    #[arg(long, value_name = "P")]
    classical: Option<usize>,
    /// Chain flattened into one triple.
    #[arg(long)]
    chain: Option<String>,
}

type CliResult = Result<i32, Box<dyn std::error::Error>>;

pub fn dispatch(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn load_file(path: &Path) -> Result<BilinearTriple, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(load_triple(&text)?)
}

impl Source {
    fn triple(&self) -> Result<BilinearTriple, Box<dyn std::error::Error>> {
        match (&self.builtin, &self.algo) {
            (Some(name), _) => Ok(builtin(name)?),
            (_, Some(path)) => load_file(path),
            _ => unreachable!("clap requires one source"),
        }
    }
}

impl GraphSource {
    /// The graph and a title for it.
    fn graph(&self) -> Result<(fastmm::GraphIR, String), Box<dyn std::error::Error>> {
        let t = match (&self.builtin, &self.algo, self.classical, &self.chain) {
            (Some(name), ..) => builtin(name)?,
            (_, Some(path), ..) => load_file(path)?,
            (.., Some(p), _) => return Ok((build_classical_graph(p)?, format!("classical-p{p}"))),
            (.., Some(chain)) => chain_flatten(&ChainSpec::parse(chain)?)?,
            _ => unreachable!("clap requires one source"),
        };
        Ok((build_bilinear_graph(&t)?, t.name().to_string()))
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    }
}

fn run(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cmd {
        Command::List => {
            for name in BUILTIN_NAMES {
                let t = builtin(name)?;
                writeln!(out, "{name}\tp={}\trank={}", t.p(), t.rank())?;
            }
            Ok(0)
        }
        Command::Verify {
            source,
            mode,
            trials,
            seed,
        } => {
            let t = source.triple()?;
            let mode = match mode.as_deref() {
                None => VerifyMode::default_for(t.p()),
                Some("exhaustive") => VerifyMode::Exhaustive,
                Some("sampled") => VerifyMode::Sampled { seed, trials },
                Some(other) => return Err(format!("unknown mode `{other}` (expected exhaustive or sampled)").into()),
            };
            let report = brent_check(&t, mode);
            let verdict = if report.passed { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "{verdict} {} (p={}, rank={}): {} equations checked, {} failed",
                t.name(),
                t.p(),
                t.rank(),
                report.checked,
                report.failures
            )?;
            for v in &report.violations {
                writeln!(out, "  {v}")?;
            }
            if report.failures > report.violations.len() {
                writeln!(
                    out,
                    "  ... {} more not shown (at most {MAX_VIOLATIONS} are listed)",
                    report.failures - report.violations.len()
                )?;
            }
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Compose { chain, out: path } => {
            let t = chain_flatten(&ChainSpec::parse(&chain)?)?;
            emit(out, path.as_deref(), &save_triple(&t))?;
            if let Some(p) = path {
                writeln!(err, "wrote {} (p={}, rank={}) to {}", t.name(), t.p(), t.rank(), p.display())?;
            }
            Ok(0)
        }
        Command::Print { source, schedule: s } => {
            let (mut g, _) = source.graph()?;
            if let Some(s) = s {
                g = schedule(&g, s)?;
            }
            out.write_all(pretty_print(&g).as_bytes())?;
            Ok(0)
        }
        Command::Run {
            chain,
            n,
            cutoff,
            check,
            seed,
            dist,
            schedule: s,
        } => {
            let chain = ChainSpec::parse(&chain)?;
            let plan = RecursivePlan::new(&chain, cutoff, s)?;
            plan.check_size(n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = dist.sample(n, &mut rng);
            let b = dist.sample(n, &mut rng);
            let (c, stats) = plan.multiply(&a, &b)?;
            writeln!(out, "chain: {}", chain.label())?;
            writeln!(out, "n: {n}")?;
            writeln!(out, "cutoff: {cutoff}")?;
            writeln!(out, "schedule: {s}")?;
            writeln!(out, "base_multiplies: {}", stats.base_multiplies)?;
            writeln!(out, "block_multiplies: {}", stats.block_multiplies)?;
            writeln!(out, "block_adds: {}", stats.block_adds)?;
            writeln!(out, "element_adds: {}", stats.element_adds)?;
            writeln!(out, "block_scalings: {}", stats.block_scalings)?;
            writeln!(out, "peak_workspace_elements: {}", stats.peak_workspace_elements)?;
            if !check {
                return Ok(0);
            }
            let e = c.max_rel_error(&naive_multiply(&a, &b)?)?;
            let ok = match dist {
                Distribution::Integer => e == 0.0,
                Distribution::Uniform => e <= RUN_TOLERANCE,
            };
            writeln!(out, "max_rel_error: {e:e}")?;
            writeln!(out, "check: {}", if ok { "PASS" } else { "FAIL" })?;
            Ok(if ok { 0 } else { 1 })
        }
        Command::Model {
            chain,
            n,
            cutoff,
            header,
        } => {
            let r = count_model(&ChainSpec::parse(&chain)?, n, cutoff)?;
            if header {
                writeln!(out, "{MODEL_HEADER}")?;
            }
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{:.6}",
                r.n,
                r.chain,
                r.cutoff,
                r.base_multiplies,
                r.block_multiplies,
                r.block_adds,
                r.element_adds,
                r.block_scalings,
                r.workspace_elements,
                r.speedup_vs_classical
            )?;
            Ok(0)
        }
        Command::Error {
            chain,
            n,
            trials,
            seed,
            dist,
            header,
        } => {
            let chain = ChainSpec::parse(&chain)?;
            let p = error_profile(&chain, n, trials, seed, dist)?;
            if header {
                writeln!(out, "{ERROR_HEADER}")?;
            }
            writeln!(out, "{n},{},{trials},{seed},{dist},{:e},{:e}", chain.label(), p.median, p.max)?;
            Ok(0)
        }
        Command::Codegen {
            source,
            n,
            dialect,
            schedule: s,
            element_type,
            buffer_prefix,
            out: path,
        } => {
            let (g, title) = source.graph()?;
            if let Some(n) = n {
                if !n.is_multiple_of(g.p()) {
                    return Err(fastmm::Error::IndivisibleSize { n, p: g.p() }.into());
                }
            }
            let cfg = EmitConfig {
                dialect,
                element_type_name: element_type,
                buffer_prefix,
                title,
            };
            let src = emit_callseq(&schedule(&g, s)?, &cfg)?;
            emit(out, path.as_deref(), &src)?;
            Ok(0)
        }
        Command::Bench {
            sizes,
            chains,
            cutoff,
            reps,
            seed,
            csv,
            check,
        } => {
            let chains = chains.iter().map(|c| ChainSpec::parse(c)).collect::<fastmm::Result<Vec<_>>>()?;
            let report = bench_run(&BenchConfig {
                sizes,
                chains,
                cutoff,
                reps,
                seed,
                check,
            })?;
            for w in &report.warnings {
                writeln!(err, "warning: {w}")?;
            }
            emit(out, csv.as_deref(), &report.to_csv())?;
            Ok(0)
        }
    }
}
