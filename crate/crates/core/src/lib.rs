//! Exact-rational toolkit for the fractional marriage problem and its
//! satisfiability neighborhood.
//!
//! The crate is organized around a small exact data model:
//!
//! - [`fmp`] — instances, solutions, validation and feasibility checking.
//!   Every weight is a [`Rational`]; there is no floating point anywhere.
//! - [`oracle`] — exponential brute-force reference solvers. Deliberately
//!   naive; the ground truth every other solver is tested against.
//! - [`matching`] — polynomial solvers: Hopcroft–Karp bipartite matching,
//!   the classical marriage problem with Hall-violator certificates, and
//!   the symmetric (two-sided list) marriage problem.
//! - [`satkit`] — CNF representation, DIMACS I/O, the classical poly-time
//!   solvable families (2-SAT, Horn, XOR) plus recognition and solving of
//!   the matching-backed canonical family.
//! - [`reductions`] — instance-to-instance translations: CNF to FMP, CMP
//!   to CNF, 3-CNF bridging, the two FMP normal forms, and the tripartite
//!   half-fraction gadget.
//! - [`fragmentlogic`] — the rewrite rules R1–R7 and the reduction driver
//!   that simplifies an FMP toward an all-integral (CMP) form, with a
//!   replayable trace.
//! - [`gen`] — seeded random instance generators shared by the test
//!   suites, the CLI and the benchmarks.
//! - [`fixtures`] — the worked instances used across the test suites.

pub mod fixtures;
pub mod fmp;
pub mod format;
pub mod fragmentlogic;
pub mod gen;
pub mod matching;
pub mod oracle;
pub mod rational;
pub mod reductions;
pub mod satkit;

pub use fmp::{
    CmpView, ElementId, ElementLoad, FeasibilityReport, FmpInstance, FmpSolution, Fragment,
    GirlId, HallViolator, Tradeoff, TradeoffSet, ValidationReport,
};
pub use rational::Rational;
pub use satkit::{Cnf, Literal, VarId};
