//! Classification of a CNF into the known polynomial-time families, with
//! a witness for every raised flag.

use std::collections::{BTreeMap, BTreeSet};

use super::cnf::{Cnf, Literal, VarId, XorConstraint};
use super::recognize::{recognize_cmp_sat, CmpSatForm};
use super::smp_sat::{recognize_smp_sat, SmpSatForm};
use super::solvers::{solve_2sat, SolverVerdict};

/// Witness that the clauses partition into parity-constraint expansions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorGroupWitness {
    pub constraints: Vec<XorConstraint>,
    /// clause indices covered by each constraint, parallel to the above
    pub clause_groups: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub is_2sat: bool,
    pub is_horn: bool,
    pub is_renamable_horn: bool,
    pub is_xor_expansion: bool,
    pub is_cmp_sat_canonical: bool,
    pub is_smp_sat_canonical: bool,
    /// Variables to flip so every clause becomes Horn.
    pub renaming: Option<BTreeSet<VarId>>,
    pub xor_grouping: Option<XorGroupWitness>,
    pub cmp_sat_form: Option<CmpSatForm>,
    pub smp_sat_form: Option<SmpSatForm>,
}

impl ClassificationReport {
    /// True when none of the five families applies.
    pub fn outside_all_families(&self) -> bool {
        !(self.is_2sat
            || self.is_horn
            || self.is_renamable_horn
            || self.is_xor_expansion
            || self.is_cmp_sat_canonical
            || self.is_smp_sat_canonical)
    }
}

pub fn classify(cnf: &Cnf) -> ClassificationReport {
    let is_2sat = cnf.clauses.iter().all(|c| c.len() <= 2);
    let is_horn = cnf
        .clauses
        .iter()
        .all(|c| c.iter().filter(|l| l.positive).count() <= 1);
    let renaming = find_horn_renaming(cnf);
    let xor_grouping = find_xor_grouping(cnf);
    let cmp_sat_form = recognize_cmp_sat(cnf).ok();
    let smp_sat_form = recognize_smp_sat(cnf).ok();

    ClassificationReport {
        is_2sat,
        is_horn,
        is_renamable_horn: renaming.is_some(),
        is_xor_expansion: xor_grouping.is_some(),
        is_cmp_sat_canonical: cmp_sat_form.is_some(),
        is_smp_sat_canonical: smp_sat_form.is_some(),
        renaming,
        xor_grouping,
        cmp_sat_form,
        smp_sat_form,
    }
}

/// Searches for a polarity flip making every clause Horn, through a
/// 2-SAT encoding over per-variable flip indicators: for every pair of
/// literals in a clause, at most one may be positive after renaming.
/// A positive literal stays positive iff its variable is unflipped, a
/// negative literal becomes positive iff its variable is flipped.
pub fn find_horn_renaming(cnf: &Cnf) -> Option<BTreeSet<VarId>> {
    let mut clauses = Vec::new();
    for clause in &cnf.clauses {
        for (i, a) in clause.iter().enumerate() {
            for b in &clause[i + 1..] {
                // not both renamed-positive: literal `flip_x` when the
                // occurrence is positive, `!flip_x` when negative
                let not_pos = |l: &Literal| Literal {
                    var: l.var,
                    positive: l.positive,
                };
                clauses.push(vec![not_pos(a), not_pos(b)]);
            }
        }
    }
    let encoding = Cnf::new(cnf.variable_count, clauses);
    match solve_2sat(&encoding) {
        SolverVerdict::Sat(flips) => {
            let renaming: BTreeSet<VarId> = cnf
                .variables()
                .filter(|v| flips[v.index()])
                .collect();
            debug_assert!(renaming_makes_horn(cnf, &renaming));
            Some(renaming)
        }
        SolverVerdict::Unsat => None,
        SolverVerdict::NotApplicable => unreachable!("encoding emits 2-clauses only"),
    }
}

/// Structural check that flipping `renaming` leaves at most one positive
/// literal per clause.
pub fn renaming_makes_horn(cnf: &Cnf, renaming: &BTreeSet<VarId>) -> bool {
    cnf.clauses.iter().all(|clause| {
        clause
            .iter()
            .filter(|l| l.positive != renaming.contains(&l.var))
            .count()
            <= 1
    })
}

/// Checks whether the clauses partition into same-variable-set groups,
/// each being exactly the full expansion of one parity constraint
/// (`2^(k-1)` distinct full-width clauses of equal negation parity).
pub fn find_xor_grouping(cnf: &Cnf) -> Option<XorGroupWitness> {
    let mut by_varset: BTreeMap<Vec<VarId>, Vec<usize>> = BTreeMap::new();
    for (i, clause) in cnf.clauses.iter().enumerate() {
        let mut vars: Vec<VarId> = clause.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        vars.dedup();
        if vars.len() != clause.len() {
            return None; // repeated variable in one clause
        }
        by_varset.entry(vars).or_default().push(i);
    }

    let mut constraints = Vec::new();
    let mut clause_groups = Vec::new();
    for (vars, indices) in by_varset {
        let k = vars.len();
        if k >= 32 || indices.len() != 1usize << (k - 1) {
            return None;
        }
        let mut signatures = BTreeSet::new();
        let mut parity = None;
        for &ci in &indices {
            let negs: BTreeSet<VarId> = cnf.clauses[ci]
                .iter()
                .filter(|l| !l.positive)
                .map(|l| l.var)
                .collect();
            let this_parity = negs.len() % 2;
            if *parity.get_or_insert(this_parity) != this_parity {
                return None;
            }
            if !signatures.insert(negs) {
                return None; // duplicate clause
            }
        }
        // negation parity p excludes assignments of parity p, so the
        // constraint's right-hand side is the complementary parity
        let rhs = parity.expect("nonempty group") == 0;
        constraints.push(XorConstraint { vars, rhs });
        clause_groups.push(indices);
    }
    let witness = XorGroupWitness {
        constraints,
        clause_groups,
    };
    debug_assert!(xor_witness_matches(cnf, &witness));
    Some(witness)
}

/// Re-expands each recovered constraint and compares clause sets.
pub fn xor_witness_matches(cnf: &Cnf, witness: &XorGroupWitness) -> bool {
    let mut covered = vec![false; cnf.clauses.len()];
    for (constraint, indices) in witness.constraints.iter().zip(&witness.clause_groups) {
        let expansion: BTreeSet<BTreeSet<Literal>> = constraint
            .expand()
            .into_iter()
            .map(|c| c.into_iter().collect())
            .collect();
        let actual: BTreeSet<BTreeSet<Literal>> = indices
            .iter()
            .map(|&i| cnf.clauses[i].iter().copied().collect())
            .collect();
        if expansion != actual {
            return false;
        }
        for &i in indices {
            covered[i] = true;
        }
    }
    covered.into_iter().all(|c| c)
}

/// Flips every variable that occurs only negatively. Canonical encodings
/// hide behind such a flip when someone negates a variable globally;
/// this pass is sufficient for those, and no more.
pub fn flip_pure_negative(cnf: &Cnf) -> (Cnf, BTreeSet<VarId>) {
    let mut seen_positive = vec![false; cnf.variable_count];
    let mut seen_negative = vec![false; cnf.variable_count];
    for clause in &cnf.clauses {
        for lit in clause {
            if lit.positive {
                seen_positive[lit.var.index()] = true;
            } else {
                seen_negative[lit.var.index()] = true;
            }
        }
    }
    let flipped: BTreeSet<VarId> = cnf
        .variables()
        .filter(|v| seen_negative[v.index()] && !seen_positive[v.index()])
        .collect();
    let clauses = cnf
        .clauses
        .iter()
        .map(|clause| {
            clause
                .iter()
                .map(|l| {
                    if flipped.contains(&l.var) {
                        l.negated()
                    } else {
                        *l
                    }
                })
                .collect()
        })
        .collect();
    (
        Cnf {
            variable_count: cnf.variable_count,
            names: cnf.names.clone(),
            clauses,
        },
        flipped,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: u32, positive: bool) -> Literal {
        Literal {
            var: VarId(v),
            positive,
        }
    }

    #[test]
    fn single_implication_is_everything_classical() {
        let cnf = Cnf::new(2, vec![vec![lit(0, false), lit(1, true)]]);
        let report = classify(&cnf);
        assert!(report.is_2sat);
        assert!(report.is_horn);
        assert!(report.is_renamable_horn);
    }

    #[test]
    fn phi_is_outside_every_classical_family() {
        let report = classify(&crate::fixtures::phi_3cnf());
        assert!(!report.is_2sat, "3-wide clauses");
        assert!(!report.is_horn);
        assert!(!report.is_renamable_horn, "the flip system is unsatisfiable");
        assert!(!report.is_xor_expansion, "no two clauses share a variable set");
        assert!(!report.is_cmp_sat_canonical);
        assert!(!report.is_smp_sat_canonical);
        assert!(report.outside_all_families());
    }

    #[test]
    fn canonical_system_flags() {
        let report = classify(&crate::fixtures::eq4_canonical_cnf());
        assert!(report.is_cmp_sat_canonical);
        assert!(!report.is_2sat, "contains a 3-literal clause");
        assert!(report.is_smp_sat_canonical);
    }

    #[test]
    fn renaming_witness_makes_horn() {
        // (a|b) & (b|c): flipping {a, c} leaves one positive per clause;
        // flipping b instead would break the other clause
        let cnf = Cnf::new(
            3,
            vec![vec![lit(0, true), lit(1, true)], vec![lit(1, true), lit(2, true)]],
        );
        let report = classify(&cnf);
        assert!(!report.is_horn);
        let renaming = report.renaming.expect("renamable");
        assert!(renaming_makes_horn(&cnf, &renaming));
    }

    #[test]
    fn xor_expansion_recognized_and_reexpanded() {
        let (_, system) = crate::fixtures::xor_system();
        let clauses: Vec<Vec<Literal>> = system.iter().flat_map(|c| c.expand()).collect();
        let cnf = Cnf::new(4, clauses);
        let report = classify(&cnf);
        let witness = report.xor_grouping.expect("xor expansion");
        assert_eq!(witness.constraints.len(), 3);
        assert!(xor_witness_matches(&cnf, &witness));
    }

    #[test]
    fn partial_expansion_is_not_xor() {
        let constraint = XorConstraint {
            vars: vec![VarId(0), VarId(1), VarId(2)],
            rhs: true,
        };
        let mut clauses = constraint.expand();
        clauses.pop();
        let cnf = Cnf::new(3, clauses);
        assert!(classify(&cnf).xor_grouping.is_none());
    }

    #[test]
    fn flip_pure_negative_only_touches_pure_variables() {
        let cnf = Cnf::new(
            3,
            vec![
                vec![lit(0, true), lit(1, false)],
                vec![lit(1, false), lit(2, false)],
                vec![lit(2, true)],
            ],
        );
        let (flipped_cnf, flipped) = flip_pure_negative(&cnf);
        assert_eq!(flipped, BTreeSet::from([VarId(1)]));
        assert!(flipped_cnf.clauses[0][1].positive);
    }
}
