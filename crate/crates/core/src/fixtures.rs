//! Worked instances shared across the test suites and shipped as CLI
//! fixtures.

use crate::fmp::{CmpView, ElementId, FmpInstance};
use crate::format::parse_fmp;
use crate::satkit::{Cnf, Literal, VarId, XorConstraint};

fn fmp(text: &str) -> FmpInstance {
    parse_fmp(text).expect("fixture parses")
}

/// The all-positive formula (B1 v B2 v B3) & (B1 v B3) & (B2 v B3 v B4).
pub fn psi_cnf() -> Cnf {
    Cnf::with_names(
        vec!["B1".into(), "B2".into(), "B3".into(), "B4".into()],
        vec![
            vec![lit(0, true), lit(1, true), lit(2, true)],
            vec![lit(0, true), lit(2, true)],
            vec![lit(1, true), lit(2, true), lit(3, true)],
        ],
    )
}

/// psi plus the clause (!B1 v !B3).
pub fn psi_prime_cnf() -> Cnf {
    let mut cnf = psi_cnf();
    cnf.clauses.push(vec![lit(0, false), lit(2, false)]);
    cnf
}

fn lit(var: u32, positive: bool) -> Literal {
    Literal {
        var: VarId(var),
        positive,
    }
}

/// The worked four-set translation of psi-prime, as displayed in the
/// NP-completeness proof.
pub fn psi_prime_fmp() -> FmpInstance {
    fmp(concat!(
        "fmp v1\n",
        "girl g1: { 1/3 b1, 2/3 b'1 } ; { 1/2 b2, 1/2 b'2 } ; { 1/4 b3, 3/4 b'3 }\n",
        "girl g2: { 1/3 b1, 2/3 b'4 } ; { 1/4 b3, 3/4 b'5 }\n",
        "girl g3: { 1/2 b2, 1/2 b'6 } ; { 1/4 b3, 3/4 b'7 } ; { 1 b4 }\n",
        "girl g4: { 1/2 b'1, 1/2 b'4 } ; { 1/3 b'3, 1/3 b'5, 1/3 b'7 }\n",
    ))
}

/// The three-set translation of the all-positive psi, as displayed in
/// the NP-completeness proof.
pub fn psi_fmp() -> FmpInstance {
    fmp(concat!(
        "fmp v1\n",
        "girl g1: { 1/2 b1, 1/2 b'1 } ; { 1/2 b2, 1/2 b'2 } ; { 1/3 b3, 2/3 b'3 }\n",
        "girl g2: { 1/2 b1, 1/2 b'4 } ; { 1/3 b3, 2/3 b'5 }\n",
        "girl g3: { 1/2 b2, 1/2 b'6 } ; { 1/3 b3, 2/3 b'7 } ; { 1 b4 }\n",
    ))
}

/// The sample CMP with four tradeoff sets over b1..b4.
pub fn eq4_fmp() -> FmpInstance {
    fmp(concat!(
        "fmp v1\n",
        "girl g1: { 1 b1 } ; { 1 b2 } ; { 1 b3 }\n",
        "girl g2: { 1 b1 } ; { 1 b3 }\n",
        "girl g3: { 1 b2 } ; { 1 b4 }\n",
        "girl g4: { 1 b1 } ; { 1 b4 }\n",
    ))
}

pub fn eq4_cmp() -> CmpView {
    crate::fmp::as_cmp(&eq4_fmp()).expect("eq4 is integral")
}

/// The canonical clause system of the sample CMP: four all-positive
/// clauses plus the pairwise expansions of the four at-most-one groups
/// (ten clauses total). Variable `b_ij` is "element b_i serves set j".
pub fn eq4_canonical_cnf() -> Cnf {
    let names = [
        "b11", "b21", "b31", "b12", "b32", "b23", "b43", "b14", "b44",
    ];
    let idx = |n: &str| names.iter().position(|&m| m == n).unwrap() as u32;
    let pos = |n: &str| lit(idx(n), true);
    let neg = |n: &str| lit(idx(n), false);
    Cnf::with_names(
        names.iter().map(|s| s.to_string()).collect(),
        vec![
            vec![pos("b11"), pos("b21"), pos("b31")],
            vec![pos("b12"), pos("b32")],
            vec![pos("b23"), pos("b43")],
            vec![pos("b14"), pos("b44")],
            vec![neg("b11"), neg("b12")],
            vec![neg("b11"), neg("b14")],
            vec![neg("b12"), neg("b14")],
            vec![neg("b21"), neg("b23")],
            vec![neg("b31"), neg("b32")],
            vec![neg("b43"), neg("b44")],
        ],
    )
}

/// The 28-clause 3-CNF rendering of the sample CMP (the clause table
/// used for the separation argument).
pub fn phi_3cnf() -> Cnf {
    let names = [
        "b11", "b12", "b14", "b21", "b23", "b31", "b32", "b43", "b44",
    ];
    let idx = |n: &str| names.iter().position(|&m| m == n).unwrap() as u32;
    let p = |n: &str| lit(idx(n), true);
    let n = |s: &str| lit(idx(s), false);
    Cnf::with_names(
        names.iter().map(|s| s.to_string()).collect(),
        vec![
            // phi_1 (12 clauses)
            vec![p("b11"), p("b21"), p("b31")],
            vec![n("b12"), p("b21"), p("b31")],
            vec![n("b14"), p("b21"), p("b31")],
            vec![p("b11"), n("b23"), p("b31")],
            vec![n("b12"), n("b23"), p("b31")],
            vec![n("b14"), n("b23"), p("b31")],
            vec![p("b11"), p("b21"), n("b32")],
            vec![n("b12"), p("b21"), n("b32")],
            vec![n("b14"), p("b21"), n("b32")],
            vec![p("b11"), n("b23"), n("b32")],
            vec![n("b12"), n("b23"), n("b32")],
            vec![n("b14"), n("b23"), n("b32")],
            // phi_2 (6 clauses)
            vec![n("b11"), n("b31")],
            vec![p("b12"), n("b31")],
            vec![n("b14"), n("b31")],
            vec![n("b11"), p("b32")],
            vec![p("b12"), p("b32")],
            vec![n("b14"), p("b32")],
            // phi_3 (4 clauses)
            vec![n("b21"), p("b43")],
            vec![p("b23"), p("b43")],
            vec![n("b21"), n("b44")],
            vec![p("b23"), n("b44")],
            // phi_4 (6 clauses)
            vec![n("b11"), n("b43")],
            vec![n("b12"), n("b43")],
            vec![p("b14"), n("b43")],
            vec![n("b11"), p("b44")],
            vec![n("b12"), p("b44")],
            vec![p("b14"), p("b44")],
        ],
    )
}

/// The canonical-form walk-through formula: a bridged five-way
/// disjunction, two plain disjunctions, and three at-most-one groups.
pub fn walkthrough_cnf() -> Cnf {
    let names = ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "X", "Y"];
    let idx = |n: &str| names.iter().position(|&m| m == n).unwrap() as u32;
    let p = |n: &str| lit(idx(n), true);
    let n = |s: &str| lit(idx(s), false);
    Cnf::with_names(
        names.iter().map(|s| s.to_string()).collect(),
        vec![
            vec![p("A"), p("B"), p("X")],
            vec![n("X"), p("C"), p("Y")],
            vec![n("Y"), p("D"), p("E")],
            vec![p("F"), p("G")],
            vec![p("H"), p("I"), p("J")],
            vec![n("I"), n("F")],
            vec![n("D"), n("I")],
            vec![n("D"), n("F")],
            vec![n("C"), n("H")],
            vec![n("G"), n("C")],
            vec![n("H"), n("G")],
            vec![n("E"), n("J")],
        ],
    )
}

/// The worked parity system a+b+c=1, a+c=0, b+c+d=1.
pub fn xor_system() -> (usize, Vec<XorConstraint>) {
    let c = |vars: &[u32], rhs: bool| XorConstraint {
        vars: vars.iter().map(|&v| VarId(v)).collect(),
        rhs,
    };
    (
        4,
        vec![
            c(&[0, 1, 2], true),
            c(&[0, 2], false),
            c(&[1, 2, 3], true),
        ],
    )
}

/// Eq4 expressed as names for each element id, useful in assertions.
pub fn element_by_name(inst: &FmpInstance, name: &str) -> ElementId {
    inst.element_id(name)
        .unwrap_or_else(|| panic!("element {name} missing"))
}
