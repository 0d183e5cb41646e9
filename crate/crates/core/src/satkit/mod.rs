//! CNF representation, DIMACS I/O, the classical polynomial-time SAT
//! families (2-SAT, Horn-SAT, XOR-SAT), and recognition/solving of the
//! matching-backed canonical family.

mod classify;
mod cnf;
mod dimacs;
mod recognize;
mod smp_sat;
mod solvers;

pub use classify::{classify, flip_pure_negative, ClassificationReport, XorGroupWitness};
pub use cnf::{Assignment, Cnf, Literal, VarId, XorConstraint};
pub use dimacs::{emit_dimacs, parse_dimacs, parse_dimacs_full, DimacsDocument, TautologyPolicy};
pub use recognize::{
    recognize_cmp_sat, solve_cmp_sat, BridgeChain, CmpSatForm, CmpSatOutcome, RecognitionFailure,
};
pub use smp_sat::{recognize_smp_sat, solve_smp_sat, SmpSatForm};
pub use solvers::{solve_2sat, solve_horn, solve_xorsat, SatOutcome, SolverVerdict};
