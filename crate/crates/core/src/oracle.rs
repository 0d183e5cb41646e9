//! Exponential brute-force reference solvers.
//!
//! These are the ground truth for every differential test in the crate.
//! They stay obviously correct: plain enumeration in a documented order,
//! with no pruning beyond abandoning a partial choice tuple as soon as
//! some element is already overloaded.

use crate::fmp::{FmpInstance, FmpSolution};
use crate::rational::Rational;
use crate::satkit::{Assignment, Cnf};

/// Enumeration limits, expressed in work units rather than wall clock so
/// tests behave identically on any machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_choice_tuples: u128,
    pub max_assignments: u128,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_choice_tuples: 10_000_000,
            max_assignments: 1 << 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome<T> {
    Sat(T),
    Unsat,
    BudgetExceeded,
}

impl<T> OracleOutcome<T> {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleOutcome::Sat(_))
    }

    pub fn expect_decided(&self, what: &str) -> bool {
        match self {
            OracleOutcome::Sat(_) => true,
            OracleOutcome::Unsat => false,
            OracleOutcome::BudgetExceeded => panic!("oracle budget exceeded on {what}"),
        }
    }
}

/// Enumerates choice tuples in lexicographic girl order and returns the
/// first feasible solution. A girl with an empty tradeoff set makes the
/// instance UNSAT outright.
pub fn solve_fmp_bruteforce(
    inst: &FmpInstance,
    budget: &OracleBudget,
) -> OracleOutcome<FmpSolution> {
    match inst.choice_tuple_count() {
        Some(0) => return OracleOutcome::Unsat,
        Some(n) if n <= budget.max_choice_tuples => {}
        _ => return OracleOutcome::BudgetExceeded,
    }

    let mut choice = vec![0usize; inst.girl_count()];
    let mut loads = vec![Rational::zero(); inst.element_count()];
    if search_first(inst, 0, &mut choice, &mut loads) {
        OracleOutcome::Sat(FmpSolution::new(choice))
    } else {
        OracleOutcome::Unsat
    }
}

fn search_first(
    inst: &FmpInstance,
    girl: usize,
    choice: &mut [usize],
    loads: &mut [Rational],
) -> bool {
    if girl == inst.girl_count() {
        return true;
    }
    let one = Rational::one();
    let set = &inst.sets()[girl];
    for (ti, tradeoff) in set.tradeoffs.iter().enumerate() {
        // early capacity abort: stop as soon as an element overflows
        let mut applied = 0;
        let mut feasible = true;
        for frag in &tradeoff.fragments {
            loads[frag.element.index()] += &frag.weight;
            applied += 1;
            if loads[frag.element.index()] > one {
                feasible = false;
                break;
            }
        }
        if feasible {
            choice[girl] = ti;
            if search_first(inst, girl + 1, choice, loads) {
                return true;
            }
        }
        for frag in tradeoff.fragments.iter().take(applied) {
            let w = loads[frag.element.index()].checked_sub(&frag.weight);
            loads[frag.element.index()] = w;
        }
    }
    false
}

/// Counts feasible choice tuples by full enumeration.
pub fn count_fmp_solutions(inst: &FmpInstance, budget: &OracleBudget) -> OracleOutcome<u128> {
    match inst.choice_tuple_count() {
        Some(0) => return OracleOutcome::Sat(0),
        Some(n) if n <= budget.max_choice_tuples => {}
        _ => return OracleOutcome::BudgetExceeded,
    }
    let mut loads = vec![Rational::zero(); inst.element_count()];
    let count = count_rec(inst, 0, &mut loads);
    if count == 0 {
        OracleOutcome::Sat(0)
    } else {
        OracleOutcome::Sat(count)
    }
}

fn count_rec(inst: &FmpInstance, girl: usize, loads: &mut [Rational]) -> u128 {
    if girl == inst.girl_count() {
        return 1;
    }
    let one = Rational::one();
    let mut total = 0;
    for tradeoff in &inst.sets()[girl].tradeoffs {
        let mut applied = 0;
        let mut feasible = true;
        for frag in &tradeoff.fragments {
            loads[frag.element.index()] += &frag.weight;
            applied += 1;
            if loads[frag.element.index()] > one {
                feasible = false;
                break;
            }
        }
        if feasible {
            total += count_rec(inst, girl + 1, loads);
        }
        for frag in tradeoff.fragments.iter().take(applied) {
            let w = loads[frag.element.index()].checked_sub(&frag.weight);
            loads[frag.element.index()] = w;
        }
    }
    total
}

/// Tries all `2^n` assignments in binary-counter order (variable `i` is
/// bit `i` of the counter) and returns the first satisfying one.
pub fn solve_sat_bruteforce(cnf: &Cnf, budget: &OracleBudget) -> OracleOutcome<Assignment> {
    let n = cnf.variable_count;
    if n >= 127 || (1u128 << n) > budget.max_assignments {
        return OracleOutcome::BudgetExceeded;
    }
    for counter in 0u128..(1u128 << n) {
        let assignment: Assignment = (0..n).map(|i| counter >> i & 1 == 1).collect();
        if crate::satkit::cnf_eval(cnf, &assignment) {
            return OracleOutcome::Sat(assignment);
        }
    }
    OracleOutcome::Unsat
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmp::check_solution;
    use crate::format::parse_fmp;

    fn fmp(body: &str) -> FmpInstance {
        parse_fmp(&format!("fmp v1\n{body}\n")).unwrap()
    }

    #[test]
    fn eq4_first_lexicographic_solution() {
        let inst = crate::fixtures::eq4_fmp();
        match solve_fmp_bruteforce(&inst, &OracleBudget::default()) {
            OracleOutcome::Sat(sol) => {
                // first feasible tuple in lexicographic order
                assert_eq!(sol.choice, vec![0, 1, 0, 1]);
                assert!(check_solution(&inst, &sol).unwrap().feasible());
            }
            other => panic!("expected SAT, got {other:?}"),
        }
    }

    #[test]
    fn capacity_one_demand_two() {
        let inst = fmp("girl g1: { 1 b1 }\ngirl g2: { 1 b1 }");
        assert_eq!(
            solve_fmp_bruteforce(&inst, &OracleBudget::default()),
            OracleOutcome::Unsat
        );
    }

    #[test]
    fn psi_prime_fmp_is_satisfiable() {
        let inst = crate::fixtures::psi_prime_fmp();
        assert!(solve_fmp_bruteforce(&inst, &OracleBudget::default()).is_sat());
    }

    #[test]
    fn empty_tradeoff_set_is_unsat() {
        let inst = fmp("girl g1:\ngirl g2: { 1 b1 }");
        assert_eq!(
            solve_fmp_bruteforce(&inst, &OracleBudget::default()),
            OracleOutcome::Unsat
        );
    }

    #[test]
    fn budget_is_respected() {
        let inst = crate::fixtures::eq4_fmp();
        let tight = OracleBudget {
            max_choice_tuples: 5,
            max_assignments: 4,
        };
        assert_eq!(
            solve_fmp_bruteforce(&inst, &tight),
            OracleOutcome::BudgetExceeded
        );
        assert_eq!(
            solve_sat_bruteforce(&crate::fixtures::psi_cnf(), &tight),
            OracleOutcome::BudgetExceeded
        );
    }

    #[test]
    fn count_solutions() {
        let inst = fmp("girl g1: { 1 b1 }");
        assert_eq!(
            count_fmp_solutions(&inst, &OracleBudget::default()),
            OracleOutcome::Sat(1)
        );
        let inst = fmp("girl g1: { 1 b1 } ; { 1 b2 }");
        assert_eq!(
            count_fmp_solutions(&inst, &OracleBudget::default()),
            OracleOutcome::Sat(2)
        );
    }

    #[test]
    fn eq4_solution_count_regression() {
        // frozen after one exhaustive enumeration of the 24 tuples
        let inst = crate::fixtures::eq4_fmp();
        assert_eq!(
            count_fmp_solutions(&inst, &OracleBudget::default()),
            OracleOutcome::Sat(3)
        );
    }

    #[test]
    fn sat_bruteforce_worked_formulas() {
        let budget = OracleBudget::default();
        assert!(solve_sat_bruteforce(&crate::fixtures::psi_cnf(), &budget).is_sat());
        assert!(solve_sat_bruteforce(&crate::fixtures::psi_prime_cnf(), &budget).is_sat());

        use crate::satkit::{Literal, VarId};
        let contradiction = Cnf::new(
            1,
            vec![vec![Literal::pos(VarId(0))], vec![Literal::neg(VarId(0))]],
        );
        assert_eq!(
            solve_sat_bruteforce(&contradiction, &budget),
            OracleOutcome::Unsat
        );
    }

    #[test]
    fn sat_iff_count_positive() {
        // agreement between the two FMP oracles on a few instances
        for inst in [
            crate::fixtures::eq4_fmp(),
            crate::fixtures::psi_prime_fmp(),
            fmp("girl g1: { 1 b1 }\ngirl g2: { 1 b1 }"),
        ] {
            let budget = OracleBudget::default();
            let sat = solve_fmp_bruteforce(&inst, &budget).is_sat();
            let count = match count_fmp_solutions(&inst, &budget) {
                OracleOutcome::Sat(c) => c,
                other => panic!("{other:?}"),
            };
            assert_eq!(sat, count > 0);
        }
    }
}
