//! The canonical CMP-to-CNF encoding: one variable per (element, set)
//! incidence, one all-positive clause per tradeoff set, and one
//! at-most-one group per element, expanded into pairwise negative
//! 2-clauses.

use std::collections::BTreeMap;

use crate::fmp::{CmpView, ElementId};
use crate::satkit::{Cnf, CmpSatForm, Literal, VarId};

/// Origin of every encoding variable.
#[derive(Clone, Debug)]
pub struct CmpToSatTrace {
    /// per variable: (element, girl index) it stands for
    pub var_origin: Vec<(ElementId, usize)>,
    pub var_of: BTreeMap<(ElementId, usize), VarId>,
}

#[derive(Clone, Debug)]
pub struct CmpToSat {
    pub cnf: Cnf,
    pub form: CmpSatForm,
    pub trace: CmpToSatTrace,
}

pub fn cmp_to_sat(cmp: &CmpView) -> CmpToSat {
    let mut names = Vec::new();
    let mut var_origin = Vec::new();
    let mut var_of = BTreeMap::new();
    for (gi, acceptable) in cmp.acceptable.iter().enumerate() {
        for &e in acceptable {
            let var = VarId(names.len() as u32);
            names.push(format!(
                "{}@{}",
                cmp.element_names[e.index()],
                cmp.girl_names[gi]
            ));
            var_origin.push((e, gi));
            var_of.insert((e, gi), var);
        }
    }

    let positive_clauses: Vec<Vec<VarId>> = cmp
        .acceptable
        .iter()
        .enumerate()
        .map(|(gi, acceptable)| acceptable.iter().map(|&e| var_of[&(e, gi)]).collect())
        .collect();

    // one group per element, over the sets that accept it
    let mut groups_by_element: BTreeMap<ElementId, Vec<VarId>> = BTreeMap::new();
    for (gi, acceptable) in cmp.acceptable.iter().enumerate() {
        for &e in acceptable {
            groups_by_element.entry(e).or_default().push(var_of[&(e, gi)]);
        }
    }
    let groups: Vec<Vec<VarId>> = groups_by_element
        .into_values()
        .filter(|g| g.len() >= 2)
        .collect();

    let mut clauses: Vec<Vec<Literal>> = positive_clauses
        .iter()
        .map(|c| c.iter().map(|&v| Literal::pos(v)).collect())
        .collect();
    for group in &groups {
        clauses.extend(expand_at_most_one(group));
    }

    let cnf = Cnf::with_names(names.clone(), clauses);
    let chains = positive_clauses
        .iter()
        .enumerate()
        .map(|(i, payload)| crate::satkit::BridgeChain {
            segments: vec![payload.clone()],
            links: vec![],
            clause_indices: vec![i],
        })
        .collect();
    let form = CmpSatForm {
        variable_count: cnf.variable_count,
        names,
        positive_clauses,
        chains,
        groups,
        optional_clauses: vec![],
    };
    CmpToSat {
        cnf,
        form,
        trace: CmpToSatTrace { var_origin, var_of },
    }
}

/// All `C(n,2)` pairwise clauses `(!A_i | !A_j)`; empty for fewer than
/// two arguments.
pub fn expand_at_most_one(group: &[VarId]) -> Vec<Vec<Literal>> {
    let mut clauses = Vec::new();
    for (i, &a) in group.iter().enumerate() {
        for &b in &group[i + 1..] {
            clauses.push(vec![Literal::neg(a), Literal::neg(b)]);
        }
    }
    clauses
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::satkit::emit_dimacs;

    #[test]
    fn eq4_produces_the_canonical_clause_system() {
        let encoded = cmp_to_sat(&crate::fixtures::eq4_cmp());
        // 4 positive clauses + pairwise negatives: C(3,2) + 1 + 1 + 1
        assert_eq!(encoded.cnf.clauses.len(), 10);
        let reference = crate::fixtures::eq4_canonical_cnf();
        // same system modulo variable numbering: compare via DIMACS after
        // renaming both to each one's own name order
        let mine: std::collections::BTreeSet<Vec<String>> = encoded
            .cnf
            .clauses
            .iter()
            .map(|c| {
                let mut lits: Vec<String> = c
                    .iter()
                    .map(|l| {
                        let name = short_name(&encoded.cnf.names[l.var.index()]);
                        format!("{}{}", if l.positive { "" } else { "!" }, name)
                    })
                    .collect();
                lits.sort();
                lits
            })
            .collect();
        let theirs: std::collections::BTreeSet<Vec<String>> = reference
            .clauses
            .iter()
            .map(|c| {
                let mut lits: Vec<String> = c
                    .iter()
                    .map(|l| {
                        format!(
                            "{}{}",
                            if l.positive { "" } else { "!" },
                            reference.names[l.var.index()].clone()
                        )
                    })
                    .collect();
                lits.sort();
                lits
            })
            .collect();
        assert_eq!(mine, theirs);
    }

    // b3@g2 -> b32-style short name used by the reference fixture
    fn short_name(full: &str) -> String {
        let (elem, girl) = full.split_once('@').unwrap();
        format!("{}{}", elem, girl.strip_prefix('g').unwrap())
    }

    #[test]
    fn single_use_element_has_no_group() {
        let cmp = crate::fmp::as_cmp(
            &crate::format::parse_fmp("fmp v1\ngirl g1: { 1 b1 }\n").unwrap(),
        )
        .unwrap();
        let encoded = cmp_to_sat(&cmp);
        assert_eq!(encoded.cnf.clauses.len(), 1);
        assert!(encoded.form.groups.is_empty());
    }

    #[test]
    fn element_in_three_sets_gives_three_pairs() {
        let cmp = crate::fmp::as_cmp(
            &crate::format::parse_fmp(
                "fmp v1\ngirl g1: { 1 b }\ngirl g2: { 1 b }\ngirl g3: { 1 b }\n",
            )
            .unwrap(),
        )
        .unwrap();
        let encoded = cmp_to_sat(&cmp);
        assert_eq!(encoded.cnf.clauses.len(), 3 + 3);
    }

    #[test]
    fn at_most_one_expansions() {
        let vars: Vec<VarId> = (0..3).map(VarId).collect();
        assert_eq!(expand_at_most_one(&vars).len(), 3);
        assert!(expand_at_most_one(&vars[..1]).is_empty());
        assert_eq!(expand_at_most_one(&vars[..2]).len(), 1);
    }

    #[test]
    fn emits_parseable_dimacs() {
        let encoded = cmp_to_sat(&crate::fixtures::eq4_cmp());
        let text = emit_dimacs(&encoded.cnf);
        let parsed =
            crate::satkit::parse_dimacs(&text, crate::satkit::TautologyPolicy::Reject).unwrap();
        assert_eq!(parsed.clauses, encoded.cnf.clauses);
    }
}
