//! The satisfiability-to-FMP gadget.
//!
//! Each clause becomes a tradeoff set and each literal a tradeoff. For a
//! variable with `k` positive and `l` negative occurrences, `M = max(k, l)`
//! auxiliaries are allocated. The i-th positive occurrence becomes
//! `{1/(M+1) b, M/(M+1) aux_i}` with its own auxiliary; every negative
//! occurrence becomes the same tradeoff `{1/M aux_1, ..., 1/M aux_M}`
//! spanning all of them. Accommodating the negative tradeoff starves
//! every positive tradeoff of the variable, and vice versa, so the FMP
//! is solvable iff the formula is.
//!
//! The uniform `1/(M+1)` fraction is used even for a purely positive
//! variable, where `1/k` would also do; worked examples therefore match
//! the hand construction up to this documented fraction choice.

use thiserror::Error;

use crate::fmp::{
    check_solution, ElementId, FmpInstance, FmpSolution, Fragment, GirlId, SolutionError,
    Tradeoff, TradeoffSet,
};
use crate::rational::Rational;
use crate::satkit::{Assignment, Cnf, Literal};

/// Forward maps of the gadget, enough to pull a solution back.
#[derive(Clone, Debug)]
pub struct SatToFmpTrace {
    /// per clause, per tradeoff index: the literal it encodes
    pub tradeoff_literal: Vec<Vec<Literal>>,
    /// per variable: main element and auxiliary elements
    pub var_elements: Vec<VarElements>,
}

#[derive(Clone, Debug, Default)]
pub struct VarElements {
    /// present iff the variable has a positive occurrence
    pub main: Option<ElementId>,
    pub auxiliaries: Vec<ElementId>,
}

#[derive(Clone, Debug)]
pub struct SatToFmp {
    pub instance: FmpInstance,
    pub trace: SatToFmpTrace,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatToFmpError {
    #[error("clause {clause} is tautological; strip tautologies before reducing")]
    TautologyPresent { clause: usize },
}

pub fn sat_to_fmp(cnf: &Cnf) -> Result<SatToFmp, SatToFmpError> {
    if let Some(&clause) = cnf.tautological_clauses().first() {
        return Err(SatToFmpError::TautologyPresent { clause });
    }

    // duplicate literals contribute one occurrence each
    let clauses: Vec<Vec<Literal>> = cnf
        .clauses
        .iter()
        .map(|c| {
            let mut seen = std::collections::BTreeSet::new();
            c.iter().copied().filter(|l| seen.insert(*l)).collect()
        })
        .collect();

    let n = cnf.variable_count;
    let mut positives = vec![0usize; n];
    let mut negatives = vec![0usize; n];
    for clause in &clauses {
        for lit in clause {
            if lit.positive {
                positives[lit.var.index()] += 1;
            } else {
                negatives[lit.var.index()] += 1;
            }
        }
    }

    let mut element_names: Vec<String> = Vec::new();
    let mut var_elements: Vec<VarElements> = vec![VarElements::default(); n];
    for v in 0..n {
        let (k, l) = (positives[v], negatives[v]);
        if k + l == 0 {
            continue;
        }
        let m = k.max(l);
        if k > 0 {
            var_elements[v].main = Some(ElementId(element_names.len() as u32));
            element_names.push(cnf.names[v].clone());
        }
        for i in 1..=m {
            var_elements[v]
                .auxiliaries
                .push(ElementId(element_names.len() as u32));
            element_names.push(format!("{}.aux.{}", cnf.names[v], i));
        }
    }

    let mut girl_names = Vec::new();
    let mut sets = Vec::new();
    let mut tradeoff_literal = Vec::new();
    let mut positive_seen = vec![0usize; n];
    for (ci, clause) in clauses.iter().enumerate() {
        let mut tradeoffs = Vec::new();
        let mut literals = Vec::new();
        for lit in clause {
            let v = lit.var.index();
            let m = positives[v].max(negatives[v]);
            let elems = &var_elements[v];
            let tradeoff = if lit.positive {
                let aux = elems.auxiliaries[positive_seen[v]];
                positive_seen[v] += 1;
                Tradeoff::canonical(vec![
                    Fragment::new(
                        elems.main.expect("positive occurrence has a main element"),
                        Rational::ratio(1, (m + 1) as i64),
                    ),
                    Fragment::new(aux, Rational::ratio(m as i64, (m + 1) as i64)),
                ])
            } else {
                Tradeoff::canonical(
                    elems
                        .auxiliaries
                        .iter()
                        .map(|&aux| Fragment::new(aux, Rational::ratio(1, m as i64)))
                        .collect(),
                )
            };
            tradeoffs.push(tradeoff);
            literals.push(*lit);
        }
        girl_names.push(format!("g{}", ci + 1));
        sets.push(TradeoffSet {
            girl: GirlId(ci as u32),
            tradeoffs,
        });
        tradeoff_literal.push(literals);
    }

    let instance = FmpInstance::new(girl_names, element_names, sets)
        .expect("gadget construction is structurally valid");
    Ok(SatToFmp {
        instance,
        trace: SatToFmpTrace {
            tradeoff_literal,
            var_elements,
        },
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PullBackError {
    #[error("solution is not feasible for the reduced instance")]
    InfeasibleSolution,
    #[error("solution malformed: {0}")]
    Malformed(SolutionError),
}

/// Maps a feasible solution of the reduced instance back to a satisfying
/// assignment: a variable is true iff some chosen tradeoff is one of its
/// positive-literal tradeoffs. Feasibility guarantees no variable also
/// has its negative tradeoff chosen.
pub fn pull_back_assignment(
    reduction: &SatToFmp,
    sol: &FmpSolution,
    variable_count: usize,
) -> Result<Assignment, PullBackError> {
    let report = check_solution(&reduction.instance, sol).map_err(PullBackError::Malformed)?;
    if !report.feasible() {
        return Err(PullBackError::InfeasibleSolution);
    }
    let mut assignment = vec![false; variable_count];
    for (clause, &pick) in sol.choice.iter().enumerate() {
        let lit = reduction.trace.tradeoff_literal[clause][pick];
        if lit.positive {
            assignment[lit.var.index()] = true;
        }
    }
    Ok(assignment)
}
