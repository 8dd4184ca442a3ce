//! Hard CNF encodings of GF(2) linear codes and the tooling to check them.
//!
//! * [`f2code`]: parity-check matrices, codes, rank and the affine model counter.
//! * [`cnfgen`]: the naive, blocked (bounded modular pathwidth) and
//!   neighborhood-diversity encodings, DIMACS I/O and brute-force oracles.
//! * [`graphwidth`]: incidence graphs, neighborhood types, modular
//!   contraction, the explicit path decomposition for blocked instances and
//!   exact pathwidth on small graphs.
//! * [`dnnf`]: NNF circuits, decomposability and determinism checks,
//!   evaluation, forgetting and model counting.
//! * [`compile`]: an exhaustive-DPLL compiler to decision-DNNF and the
//!   scaling experiment driver.
//! * [`rectcover`]: balanced partitions, combinatorial rectangles and exact
//!   minimum multi-partition covers of small functions.

pub mod cnfgen;
pub mod compile;
pub mod dnnf;
pub mod error;
pub mod f2code;
pub mod graphwidth;
pub mod par;
pub mod rectcover;

pub use error::{Error, Result};
pub use par::Exec;
