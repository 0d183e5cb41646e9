//! Clause-list CNF and parity constraints.

use std::collections::BTreeSet;
use std::fmt;

/// Variable index, 0-based.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Literal {
    pub var: VarId,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: VarId) -> Self {
        Literal {
            var,
            positive: true,
        }
    }

    pub fn neg(var: VarId) -> Self {
        Literal {
            var,
            positive: false,
        }
    }

    pub fn negated(self) -> Self {
        Literal {
            var: self.var,
            positive: !self.positive,
        }
    }
}

/// A CNF formula over `variable_count` variables. Clauses keep their
/// input order; duplicate literals within a clause are removed on
/// construction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cnf {
    pub variable_count: usize,
    pub names: Vec<String>,
    pub clauses: Vec<Vec<Literal>>,
}

impl Cnf {
    pub fn new(variable_count: usize, clauses: Vec<Vec<Literal>>) -> Self {
        let names = (1..=variable_count).map(|i| format!("x{i}")).collect();
        Cnf::with_names(names, clauses)
    }

    pub fn with_names(names: Vec<String>, clauses: Vec<Vec<Literal>>) -> Self {
        let clauses = clauses.into_iter().map(dedup_literals).collect();
        Cnf {
            variable_count: names.len(),
            names,
            clauses,
        }
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn variables(&self) -> impl Iterator<Item = VarId> {
        (0..self.variable_count as u32).map(VarId)
    }

    /// Clauses containing both a variable and its negation.
    pub fn tautological_clauses(&self) -> Vec<usize> {
        self.clauses
            .iter()
            .enumerate()
            .filter(|(_, clause)| {
                let pos: BTreeSet<_> = clause
                    .iter()
                    .filter(|l| l.positive)
                    .map(|l| l.var)
                    .collect();
                clause.iter().any(|l| !l.positive && pos.contains(&l.var))
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn strip_tautologies(&self) -> Cnf {
        let drop: BTreeSet<usize> = self.tautological_clauses().into_iter().collect();
        Cnf {
            variable_count: self.variable_count,
            names: self.names.clone(),
            clauses: self
                .clauses
                .iter()
                .enumerate()
                .filter(|(i, _)| !drop.contains(i))
                .map(|(_, c)| c.clone())
                .collect(),
        }
    }

    pub fn max_clause_len(&self) -> usize {
        self.clauses.iter().map(|c| c.len()).max().unwrap_or(0)
    }
}

impl fmt::Display for Cnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, clause) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "(")?;
            for (j, lit) in clause.iter().enumerate() {
                if j > 0 {
                    write!(f, " | ")?;
                }
                if !lit.positive {
                    write!(f, "!")?;
                }
                write!(f, "{}", self.var_name(lit.var))?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn dedup_literals(clause: Vec<Literal>) -> Vec<Literal> {
    let mut seen = BTreeSet::new();
    clause
        .into_iter()
        .filter(|lit| seen.insert(*lit))
        .collect()
}

/// A truth assignment, indexed by variable.
pub type Assignment = Vec<bool>;

pub fn eval_clause(clause: &[Literal], assignment: &Assignment) -> bool {
    clause
        .iter()
        .any(|lit| assignment[lit.var.index()] == lit.positive)
}

pub fn eval_cnf(cnf: &Cnf, assignment: &Assignment) -> bool {
    cnf.clauses.iter().all(|c| eval_clause(c, assignment))
}

/// A parity constraint: the variables must sum to `rhs` modulo 2.
/// Negated literals are folded into the right-hand side before this
/// representation (each negation flips `rhs`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct XorConstraint {
    pub vars: Vec<VarId>,
    pub rhs: bool,
}

impl XorConstraint {
    /// Builds a constraint from an XOR of literals: the XOR of the
    /// literals must be true. Repeated variables cancel in pairs.
    pub fn from_literals(lits: &[Literal]) -> Self {
        let mut rhs = true;
        let mut counts: std::collections::BTreeMap<VarId, usize> = Default::default();
        for lit in lits {
            *counts.entry(lit.var).or_default() += 1;
            if !lit.positive {
                rhs = !rhs;
            }
        }
        let vars = counts
            .into_iter()
            .filter(|(_, n)| n % 2 == 1)
            .map(|(v, _)| v)
            .collect();
        XorConstraint { vars, rhs }
    }

    pub fn satisfied_by(&self, assignment: &Assignment) -> bool {
        let sum = self
            .vars
            .iter()
            .filter(|v| assignment[v.index()])
            .count();
        (sum % 2 == 1) == self.rhs
    }

    /// The full-width CNF expansion: all clauses over `vars` whose
    /// negation count has the parity that excludes violating
    /// assignments.
    pub fn expand(&self) -> Vec<Vec<Literal>> {
        let k = self.vars.len();
        assert!(k <= 20, "expansion is exponential; keep constraints small");
        let want = if self.rhs { 0 } else { 1 };
        let mut clauses = Vec::new();
        for mask in 0u32..(1 << k) {
            if (mask.count_ones() as usize) % 2 != want {
                continue;
            }
            let clause = self
                .vars
                .iter()
                .enumerate()
                .map(|(i, &v)| Literal {
                    var: v,
                    positive: mask & (1 << i) == 0,
                })
                .collect();
            clauses.push(clause);
        }
        clauses
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_and_eval() {
        let cnf = Cnf::new(
            2,
            vec![vec![
                Literal::pos(VarId(0)),
                Literal::pos(VarId(0)),
                Literal::neg(VarId(1)),
            ]],
        );
        assert_eq!(cnf.clauses[0].len(), 2);
        assert!(eval_cnf(&cnf, &vec![true, true]));
        assert!(!eval_cnf(&cnf, &vec![false, true]));
    }

    #[test]
    fn tautology_detection() {
        let cnf = Cnf::new(
            1,
            vec![vec![Literal::pos(VarId(0)), Literal::neg(VarId(0))]],
        );
        assert_eq!(cnf.tautological_clauses(), vec![0]);
        assert!(cnf.strip_tautologies().clauses.is_empty());
    }

    #[test]
    fn xor_expansion_matches_truth_table() {
        // a + b = 1  <=>  (a|b) & (!a|!b)
        let c = XorConstraint {
            vars: vec![VarId(0), VarId(1)],
            rhs: true,
        };
        let clauses = c.expand();
        assert_eq!(clauses.len(), 2);
        for a in [false, true] {
            for b in [false, true] {
                let assignment = vec![a, b];
                let expanded_ok = clauses.iter().all(|cl| eval_clause(cl, &assignment));
                assert_eq!(expanded_ok, c.satisfied_by(&assignment));
            }
        }
    }

    #[test]
    fn xor_from_literals_folds_negation_and_cancels() {
        // x1 xor !x2 xor x1  =>  vars {x2}, rhs flipped once: x2 = 0
        let c = XorConstraint::from_literals(&[
            Literal::pos(VarId(0)),
            Literal::neg(VarId(1)),
            Literal::pos(VarId(0)),
        ]);
        assert_eq!(c.vars, vec![VarId(1)]);
        assert!(!c.rhs);
    }
}
