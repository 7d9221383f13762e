//! Fast matrix multiplication workbench: bilinear algorithms, exact verification,
//! Kronecker composition, an operation-graph IR with schedules, an instrumented
//! recursive executor, cost models and a C call-sequence emitter.

pub mod analysis;
pub mod bench;
pub mod catalog;
pub mod codegen;
pub mod coefficient;
pub mod composer;
pub mod error;
pub mod executor;
pub mod graph;
mod kernel;
pub mod matrix;
pub mod verifier;

pub use catalog::{builtin, load_triple, save_triple, BilinearTriple, CoeffMatrix, BUILTIN_NAMES};
pub use coefficient::Coefficient;
pub use composer::{chain_flatten, kron_compose, ChainSpec};
pub use error::{Error, Result};
pub use executor::{execute, recursive_multiply, ExecStats};
pub use graph::{GraphIR, Strategy};
pub use matrix::{mat_add, naive_multiply, partition, unpartition, DenseMatrix, Distribution};
pub use verifier::{brent_check, VerifyMode, VerifyReport};
