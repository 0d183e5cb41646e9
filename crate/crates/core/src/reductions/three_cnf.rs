//! Long-disjunction bridging: every clause of width four or more is cut
//! into a chain of 3-clauses linked by fresh bridge variables.

use crate::satkit::{Cnf, Literal, VarId};

/// Returns an equisatisfiable formula with every clause of length at
/// most three, plus the freshly introduced bridge variables. Clauses
/// already short enough pass through untouched.
pub fn to_3cnf(cnf: &Cnf) -> (Cnf, Vec<VarId>) {
    let mut names = cnf.names.clone();
    let mut bridge_vars = Vec::new();
    let mut clauses = Vec::new();

    for clause in &cnf.clauses {
        if clause.len() <= 3 {
            clauses.push(clause.clone());
            continue;
        }
        let mut fresh = |names: &mut Vec<String>| {
            let var = VarId(names.len() as u32);
            names.push(format!("_x{}", bridge_vars.len() + 1));
            bridge_vars.push(var);
            var
        };
        // (l1 | l2 | X1) (!X1 | l3 | X2) ... (!Xt | l_{n-1} | l_n)
        let mut bridge = fresh(&mut names);
        clauses.push(vec![clause[0], clause[1], Literal::pos(bridge)]);
        for &lit in &clause[2..clause.len() - 2] {
            let next = fresh(&mut names);
            clauses.push(vec![Literal::neg(bridge), lit, Literal::pos(next)]);
            bridge = next;
        }
        clauses.push(vec![
            Literal::neg(bridge),
            clause[clause.len() - 2],
            clause[clause.len() - 1],
        ]);
    }

    (Cnf::with_names(names, clauses), bridge_vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{solve_sat_bruteforce, OracleBudget};

    fn lit(v: u32, positive: bool) -> Literal {
        Literal {
            var: VarId(v),
            positive,
        }
    }

    #[test]
    fn five_wide_clause_becomes_the_three_clause_chain() {
        // (A|B|C|D|E) -> (A|B|X) (!X|C|Y) (!Y|D|E)
        let cnf = Cnf::new(5, vec![(0..5).map(|v| lit(v, true)).collect()]);
        let (out, bridges) = to_3cnf(&cnf);
        assert_eq!(bridges.len(), 2);
        let (x, y) = (bridges[0], bridges[1]);
        assert_eq!(
            out.clauses,
            vec![
                vec![lit(0, true), lit(1, true), Literal::pos(x)],
                vec![Literal::neg(x), lit(2, true), Literal::pos(y)],
                vec![Literal::neg(y), lit(3, true), lit(4, true)],
            ]
        );
    }

    #[test]
    fn short_clauses_pass_through() {
        let cnf = Cnf::new(2, vec![vec![lit(0, true), lit(1, false)]]);
        let (out, bridges) = to_3cnf(&cnf);
        assert!(bridges.is_empty());
        assert_eq!(out.clauses, cnf.clauses);
    }

    #[test]
    fn equisatisfiable_on_small_formulas() {
        let budget = OracleBudget::default();
        // a mixed formula with one long clause and a contradictory pair
        let sat = Cnf::new(
            6,
            vec![
                (0..5).map(|v| lit(v, false)).collect(),
                vec![lit(5, true)],
            ],
        );
        let unsat = Cnf::new(
            4,
            vec![
                (0..4).map(|v| lit(v, true)).collect(),
                vec![lit(0, false)],
                vec![lit(1, false)],
                vec![lit(2, false)],
                vec![lit(3, false)],
            ],
        );
        for (cnf, expect) in [(sat, true), (unsat, false)] {
            let (three, _) = to_3cnf(&cnf);
            assert!(three.max_clause_len() <= 3);
            assert_eq!(solve_sat_bruteforce(&cnf, &budget).is_sat(), expect);
            assert_eq!(solve_sat_bruteforce(&three, &budget).is_sat(), expect);
        }
    }
}
