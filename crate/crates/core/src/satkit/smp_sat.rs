//! The symmetric extension of the canonical family: optional positive
//! clauses may range over arbitrary subsets of one at-most-one group, in
//! which case the formula translates to a symmetric marriage problem
//! (the subset clause becomes the group-boy's list of girls).
//!
//! Two normalizations are applied during recognition: group variables
//! absent from every positive clause are dropped from their group, and
//! when several variables of one group share a positive clause, all but
//! one are pared away (they could never be true together anyway).
//! Multiple optional clauses over one group collapse to their
//! intersection: with at most one group variable true, satisfying all of
//! them means satisfying their common part.

use std::collections::{BTreeMap, BTreeSet};

use crate::matching::{smp_as_two_cmps, solve_smp, SmpInstance, SmpOutcome};

use super::cnf::{Assignment, Cnf, VarId};
use super::recognize::{
    assignment_from_chosen, discover_groups, reassemble_chains, survey_clauses, CmpSatForm,
    CmpSatOutcome, RecognitionFailure,
};

/// A recognized symmetric form: the structured clause view plus the
/// marriage instance it translates to.
#[derive(Clone, Debug)]
pub struct SmpSatForm {
    pub base: CmpSatForm,
    pub smp: SmpInstance,
    /// Group variables removed because they occur in no positive clause.
    pub dropped_from_groups: Vec<VarId>,
    /// `(positive clause index, variable)` pared by the co-grouped rule.
    pub pared_from_clauses: Vec<(usize, VarId)>,
}

pub fn recognize_smp_sat(cnf: &Cnf) -> Result<SmpSatForm, RecognitionFailure> {
    let survey = survey_clauses(cnf)?;
    let mut groups = discover_groups(cnf, &survey.negative_pairs)?;
    let chains = reassemble_chains(cnf, &survey)?;

    // split payloads into mandatory clauses and per-group optional ones
    let group_of = |groups: &[Vec<VarId>], v: VarId| groups.iter().position(|g| g.contains(&v));
    let mut mandatory: Vec<Vec<VarId>> = Vec::new();
    let mut kept_chains = Vec::new();
    let mut optional: Vec<(usize, Vec<VarId>)> = Vec::new();
    for chain in chains {
        let payload = chain.payload();
        let distinct: BTreeSet<VarId> = payload.iter().copied().collect();
        if distinct.len() != payload.len() {
            let dup = payload
                .iter()
                .find(|v| payload.iter().filter(|w| w == v).count() > 1)
                .copied()
                .expect("duplicate exists");
            return Err(RecognitionFailure::DuplicatePositiveOccurrence { var: dup });
        }
        let homes: BTreeSet<Option<usize>> =
            payload.iter().map(|&v| group_of(&groups, v)).collect();
        match homes.iter().collect::<Vec<_>>().as_slice() {
            [Some(gi)] => optional.push((**gi, payload)),
            _ => {
                mandatory.push(payload);
                kept_chains.push(chain);
            }
        }
    }

    // pare co-grouped variables sharing a mandatory clause, keeping the
    // one that optional clauses still need
    let optional_occurrence = |optional: &[(usize, Vec<VarId>)], v: VarId| {
        optional.iter().any(|(_, c)| c.contains(&v))
    };
    let mut pared_from_clauses = Vec::new();
    for (ci, clause) in mandatory.iter_mut().enumerate() {
        for gi in 0..groups.len() {
            let shared: Vec<VarId> = clause
                .iter()
                .copied()
                .filter(|&v| groups[gi].contains(&v))
                .collect();
            if shared.len() <= 1 {
                continue;
            }
            let keepers: Vec<VarId> = shared
                .iter()
                .copied()
                .filter(|&v| optional_occurrence(&optional, v))
                .collect();
            let keep = match keepers.as_slice() {
                [] => shared[0],
                [k] => *k,
                _ => return Err(RecognitionFailure::AmbiguousCoGroupedShare { clause: ci }),
            };
            clause.retain(|&v| !shared.contains(&v) || v == keep);
            for v in shared.into_iter().filter(|&v| v != keep) {
                pared_from_clauses.push((ci, v));
            }
        }
    }

    // uniqueness across mandatory clauses
    let mut seen: BTreeSet<VarId> = BTreeSet::new();
    for clause in &mandatory {
        for &v in clause {
            if !seen.insert(v) {
                return Err(RecognitionFailure::DuplicatePositiveOccurrence { var: v });
            }
        }
    }

    // drop group variables that appear in no positive clause at all
    let mut dropped_from_groups = Vec::new();
    for group in &mut groups {
        group.retain(|&v| {
            let used = seen.contains(&v) || optional_occurrence(&optional, v);
            if !used {
                dropped_from_groups.push(v);
            }
            used
        });
    }
    groups.retain(|g| !g.is_empty());

    // regroup optional clauses after the group indices moved
    let optional = optional
        .into_iter()
        .map(|(_, payload)| {
            let gi = group_of(&groups, payload[0]).expect("optional vars stay grouped");
            (gi, payload)
        })
        .collect::<Vec<_>>();

    // collapse multiple optional clauses per group to their intersection
    let mut collapsed: BTreeMap<usize, BTreeSet<VarId>> = BTreeMap::new();
    for (gi, payload) in &optional {
        let set: BTreeSet<VarId> = payload.iter().copied().collect();
        collapsed
            .entry(*gi)
            .and_modify(|s| *s = s.intersection(&set).copied().collect())
            .or_insert(set);
    }
    let optional_clauses: Vec<(usize, Vec<VarId>)> = collapsed
        .into_iter()
        .map(|(gi, set)| (gi, set.into_iter().collect()))
        .collect();

    let base = CmpSatForm {
        variable_count: cnf.variable_count,
        names: cnf.names.clone(),
        positive_clauses: mandatory,
        chains: kept_chains,
        groups,
        optional_clauses,
    };
    let smp = build_translation(&base).smp;
    Ok(SmpSatForm {
        base,
        smp,
        dropped_from_groups,
        pared_from_clauses,
    })
}

enum BoyKind {
    Group(usize),
    Var(VarId),
}

struct Translation {
    smp: SmpInstance,
    boys: Vec<BoyKind>,
    /// variable satisfied when clause-girl `ci` pairs with group boy `gi`
    var_for: BTreeMap<(usize, usize), VarId>,
    /// designated optional-only variable per group, satisfied when the
    /// group boy pairs with his fallback girl
    free_var: Vec<Option<VarId>>,
}

/// Translates a structured form into a symmetric marriage instance: one
/// listed girl per mandatory clause, one boy per group plus one per
/// ungrouped variable, and the collapsed optional subset as the group
/// boy's list. A group whose subset contains a variable with no
/// mandatory occurrence gets one fallback girl: pairing with her stands
/// for satisfying the subset clause by that variable alone.
fn build_translation(form: &CmpSatForm) -> Translation {
    let mut boys = Vec::new();
    let mut boy_names = Vec::new();
    let mut boy_of_group = Vec::new();
    for gi in 0..form.groups.len() {
        boy_of_group.push(boys.len());
        boys.push(BoyKind::Group(gi));
        boy_names.push(format!("R{}", gi + 1));
    }
    let mut boy_of_var: BTreeMap<VarId, usize> = BTreeMap::new();
    for clause in &form.positive_clauses {
        for &v in clause {
            if form.group_of(v).is_none() {
                boy_of_var.entry(v).or_insert_with(|| {
                    boys.push(BoyKind::Var(v));
                    boy_names.push(format!("v:{}", form.names[v.index()]));
                    boys.len() - 1
                });
            }
        }
    }

    let mut girl_names: Vec<String> = Vec::new();
    let mut girl_lists: Vec<Option<Vec<usize>>> = Vec::new();
    let mut var_for = BTreeMap::new();
    let mut girl_of_var: BTreeMap<VarId, usize> = BTreeMap::new();
    for (ci, clause) in form.positive_clauses.iter().enumerate() {
        let mut list = Vec::new();
        for &v in clause {
            girl_of_var.insert(v, ci);
            match form.group_of(v) {
                Some(gi) => {
                    var_for.insert((ci, gi), v);
                    list.push(boy_of_group[gi]);
                }
                None => list.push(boy_of_var[&v]),
            }
        }
        girl_names.push(format!("c{}", ci + 1));
        girl_lists.push(Some(list));
    }

    let mut boy_lists: Vec<Option<Vec<usize>>> = vec![None; boys.len()];
    let mut free_var = vec![None; form.groups.len()];
    for (gi, subset) in &form.optional_clauses {
        let mut list = Vec::new();
        for &v in subset {
            match girl_of_var.get(&v) {
                Some(&ci) => list.push(ci),
                None => {
                    // optional-only variable: the boy may satisfy his
                    // clause through it without consuming any real girl
                    if free_var[*gi].is_none() {
                        free_var[*gi] = Some(v);
                        girl_names.push(format!("free:R{}", gi + 1));
                        girl_lists.push(None);
                        list.push(girl_lists.len() - 1);
                    }
                }
            }
        }
        boy_lists[boy_of_group[*gi]] = Some(list);
    }

    Translation {
        smp: SmpInstance {
            girl_names,
            boy_names,
            girl_lists,
            boy_lists,
        },
        boys,
        var_for,
        free_var,
    }
}

/// Solves a form with optional clauses via the marriage translation.
/// UNSAT surfaces the Hall violator of whichever pared side of the
/// two-problem corollary fails.
pub(super) fn solve_via_smp(form: &CmpSatForm) -> CmpSatOutcome {
    let translation = build_translation(form);
    match solve_smp(&translation.smp) {
        SmpOutcome::Sat(pairing) => {
            let mut chosen = Vec::with_capacity(form.positive_clauses.len());
            for ci in 0..form.positive_clauses.len() {
                let b = pairing.pairs[ci].expect("listed girls are paired");
                let v = match translation.boys[b] {
                    BoyKind::Group(gi) => translation.var_for[&(ci, gi)],
                    BoyKind::Var(v) => v,
                };
                chosen.push(v);
            }
            let mut assignment = assignment_from_chosen(form, &chosen);
            for (gi, free) in translation.free_var.iter().enumerate() {
                if let (Some(v), Some(b)) = (free, translation.boys.iter().position(
                    |k| matches!(k, BoyKind::Group(g) if *g == gi),
                )) {
                    // the fallback girl pairing means the subset clause is
                    // satisfied by the optional-only variable
                    let fallback_used = pairing
                        .pairs
                        .iter()
                        .enumerate()
                        .any(|(g, &p)| p == Some(b) && g >= form.positive_clauses.len());
                    if fallback_used {
                        assignment[v.index()] = true;
                    }
                }
            }
            CmpSatOutcome::Sat(assignment)
        }
        SmpOutcome::Unsat => {
            let two = smp_as_two_cmps(&translation.smp);
            for cmp in [&two.girls_side, &two.boys_side] {
                if let crate::matching::CmpOutcome::Unsat(violator) = crate::matching::solve_cmp(cmp)
                {
                    return CmpSatOutcome::Unsat {
                        violator,
                        cmp: cmp.clone(),
                    };
                }
            }
            unreachable!("an unsolvable symmetric instance fails one pared side");
        }
    }
}

/// Solves a recognized symmetric form.
pub fn solve_smp_sat(form: &SmpSatForm) -> CmpSatOutcome {
    if form.base.is_pure_cmp() {
        return super::recognize::solve_cmp_sat(&form.base);
    }
    solve_via_smp(&form.base)
}
