//! Instance-to-instance translations in both directions: CNF to FMP (the
//! NP-hardness gadget), CMP to CNF (the canonical encoding), long-clause
//! bridging to 3-CNF, the two FMP normal forms, and the half-fraction
//! tripartite gadget.

mod cmp_sat;
mod normal_form;
mod sat_fmp;
mod three_cnf;
mod tripartite;

pub use cmp_sat::{cmp_to_sat, expand_at_most_one, CmpToSat, CmpToSatTrace};
pub use normal_form::{
    first_normal_form, second_normal_form, verify_nf1, verify_nf2, NormalFormError,
    NormalFormTrace,
};
pub use sat_fmp::{
    pull_back_assignment, sat_to_fmp, PullBackError, SatToFmp, SatToFmpError, SatToFmpTrace,
    VarElements,
};
pub use three_cnf::to_3cnf;
pub use tripartite::{tripartite_bruteforce, tripartite_to_fmp, TripartiteFmp};
