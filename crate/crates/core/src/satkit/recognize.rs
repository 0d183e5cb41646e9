//! Recognition and solving of the canonical matching-backed CNF family:
//! all-positive disjunctions (possibly split by bridge variables) plus
//! at-most-one groups expanded into pairwise negative 2-clauses.
//!
//! Recognition follows four steps:
//!
//! 1. the negative 2-clauses, grouped by shared variables, must form
//!    complete all-pairs families (each family is one at-most-one group,
//!    and no variable belongs to two groups);
//! 2. there is at least one all-positive clause; no variable appears in
//!    two of them; clauses whose variables equal a group's variables are
//!    set aside as optional;
//! 3. there are no other clauses — every remaining negative literal must
//!    be the link of a bridge chain;
//! 4. with optional clauses struck, every group variable appears exactly
//!    once in positive form, and no two variables of one group share an
//!    all-positive clause.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::fmp::{CmpView, ElementId, HallViolator};
use crate::matching::{solve_cmp, CmpOutcome};

use super::cnf::{Assignment, Cnf, VarId};

/// One reassembled positive clause: payload variables per original
/// clause, with the bridge variable linking consecutive segments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BridgeChain {
    pub segments: Vec<Vec<VarId>>,
    pub links: Vec<VarId>,
    pub clause_indices: Vec<usize>,
}

impl BridgeChain {
    pub fn payload(&self) -> Vec<VarId> {
        self.segments.iter().flatten().copied().collect()
    }

    pub fn is_bridged(&self) -> bool {
        !self.links.is_empty()
    }
}

/// The structured canonical form recovered from a CNF.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CmpSatForm {
    pub variable_count: usize,
    pub names: Vec<String>,
    /// Mandatory positive clauses (bridge-free variable lists, in input
    /// order of their chain heads).
    pub positive_clauses: Vec<Vec<VarId>>,
    /// The chain behind each positive clause; unbridged clauses have a
    /// single segment.
    pub chains: Vec<BridgeChain>,
    /// At-most-one groups, disjoint, ordered by first appearance.
    pub groups: Vec<Vec<VarId>>,
    /// Positive clauses whose variables coincide with (for the strict
    /// form) or fall inside (for the symmetric extension) one group.
    pub optional_clauses: Vec<(usize, Vec<VarId>)>,
}

impl CmpSatForm {
    pub fn group_of(&self, v: VarId) -> Option<usize> {
        self.groups.iter().position(|g| g.contains(&v))
    }

    /// True when the recovered structure has no optional clauses, i.e.
    /// it is exactly a classical marriage problem.
    pub fn is_pure_cmp(&self) -> bool {
        self.optional_clauses.is_empty()
    }
}

/// Machine-readable recognition failure, naming the violated step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RecognitionFailure {
    /// Step 3: an empty clause can be neither positive nor a pair.
    EmptyClause { clause: usize },
    /// Step 3: a clause that is neither all-positive (modulo one bridge
    /// link) nor a negative pair.
    MixedClause { clause: usize },
    /// Step 1: the co-negated variables do not form an all-pairs family.
    GroupNotClique { vars: Vec<VarId> },
    /// A clause launches two bridge links; chains must be linear.
    BridgeBranching { clause: usize },
    /// Bridge links close a cycle instead of reaching a chain head.
    BridgeCycle { clause: usize },
    /// Step 3: a negative literal that is not a bridge link.
    UnlinkedNegativeLiteral { clause: usize, var: VarId },
    /// Step 2: a variable appears in two all-positive clauses.
    DuplicatePositiveOccurrence { var: VarId },
    /// Step 4: a group variable never appears in positive form.
    GroupVarWithoutPositiveOccurrence { var: VarId },
    /// Step 4: two variables of one group share an all-positive clause.
    CoGroupedVarsShareClause { clause: usize, vars: Vec<VarId> },
    /// Step 2: no mandatory all-positive clause remains.
    NoPositiveClauses,
    /// Symmetric extension only: co-grouped variables sharing a clause
    /// could not be pared because both also carry optional clauses.
    AmbiguousCoGroupedShare { clause: usize },
}

impl RecognitionFailure {
    /// The recognition step the failure violates.
    pub fn step(&self) -> u8 {
        use RecognitionFailure::*;
        match self {
            GroupNotClique { .. } => 1,
            DuplicatePositiveOccurrence { .. } | NoPositiveClauses => 2,
            EmptyClause { .. }
            | MixedClause { .. }
            | BridgeBranching { .. }
            | BridgeCycle { .. }
            | UnlinkedNegativeLiteral { .. } => 3,
            GroupVarWithoutPositiveOccurrence { .. }
            | CoGroupedVarsShareClause { .. }
            | AmbiguousCoGroupedShare { .. } => 4,
        }
    }
}

impl fmt::Display for RecognitionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use RecognitionFailure::*;
        match self {
            EmptyClause { clause } => write!(f, "clause {clause} is empty"),
            MixedClause { clause } => write!(
                f,
                "clause {clause} is neither all-positive nor a negative pair"
            ),
            GroupNotClique { vars } => write!(
                f,
                "co-negated variables {vars:?} do not form an all-pairs family"
            ),
            BridgeBranching { clause } => {
                write!(f, "clause {clause} launches more than one bridge link")
            }
            BridgeCycle { clause } => write!(f, "bridge links through clause {clause} form a cycle"),
            UnlinkedNegativeLiteral { clause, var } => write!(
                f,
                "clause {clause} negates variable {var:?} which is not a bridge link"
            ),
            DuplicatePositiveOccurrence { var } => write!(
                f,
                "variable {var:?} appears in two all-positive clauses"
            ),
            GroupVarWithoutPositiveOccurrence { var } => write!(
                f,
                "variable {var:?} appears negated in a group but never positively"
            ),
            CoGroupedVarsShareClause { clause, vars } => write!(
                f,
                "clause {clause} contains co-grouped variables {vars:?}"
            ),
            NoPositiveClauses => write!(f, "no mandatory all-positive clause"),
            AmbiguousCoGroupedShare { clause } => write!(
                f,
                "clause {clause} shares co-grouped variables that cannot be pared"
            ),
        }
        .and_then(|()| write!(f, " (recognition step {})", self.step()))
    }
}

/// Clause classification shared by the strict and symmetric recognizers.
pub(super) struct ClauseSurvey {
    pub(super) negative_pairs: Vec<(usize, VarId, VarId)>,
    pub(super) positive_like: Vec<usize>,
}

pub(super) fn survey_clauses(cnf: &Cnf) -> Result<ClauseSurvey, RecognitionFailure> {
    let mut negative_pairs = Vec::new();
    let mut positive_like = Vec::new();
    for (i, clause) in cnf.clauses.iter().enumerate() {
        if clause.is_empty() {
            return Err(RecognitionFailure::EmptyClause { clause: i });
        }
        let negatives: Vec<VarId> = clause
            .iter()
            .filter(|l| !l.positive)
            .map(|l| l.var)
            .collect();
        if clause.len() == 2 && negatives.len() == 2 {
            negative_pairs.push((i, negatives[0], negatives[1]));
        } else if negatives.is_empty() || (negatives.len() == 1 && clause.len() >= 2) {
            positive_like.push(i);
        } else {
            return Err(RecognitionFailure::MixedClause { clause: i });
        }
    }
    Ok(ClauseSurvey {
        negative_pairs,
        positive_like,
    })
}

/// Discovers the at-most-one groups: connected components of the
/// co-negation graph, each required to be a complete all-pairs family.
/// Groups come back ordered by their first defining clause.
pub(super) fn discover_groups(
    cnf: &Cnf,
    pairs: &[(usize, VarId, VarId)],
) -> Result<Vec<Vec<VarId>>, RecognitionFailure> {
    let mut neighbor: BTreeMap<VarId, BTreeSet<VarId>> = BTreeMap::new();
    let mut first_clause: BTreeMap<VarId, usize> = BTreeMap::new();
    let mut edges: BTreeSet<(VarId, VarId)> = BTreeSet::new();
    for &(ci, a, b) in pairs {
        neighbor.entry(a).or_default().insert(b);
        neighbor.entry(b).or_default().insert(a);
        first_clause.entry(a).or_insert(ci);
        first_clause.entry(b).or_insert(ci);
        edges.insert((a.min(b), a.max(b)));
    }
    let _ = cnf;

    let mut seen: BTreeSet<VarId> = BTreeSet::new();
    let mut groups: Vec<Vec<VarId>> = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    for (&start, _) in &neighbor {
        if seen.contains(&start) {
            continue;
        }
        let mut component = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if !component.insert(v) {
                continue;
            }
            for &w in &neighbor[&v] {
                if !component.contains(&w) {
                    stack.push(w);
                }
            }
        }
        let vars: Vec<VarId> = component.iter().copied().collect();
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                if !edges.contains(&(a.min(b), a.max(b))) {
                    return Err(RecognitionFailure::GroupNotClique { vars });
                }
            }
        }
        seen.extend(component.iter().copied());
        order.push(vars.iter().map(|v| first_clause[v]).min().unwrap_or(0));
        groups.push(vars);
    }
    let mut indexed: Vec<(usize, Vec<VarId>)> = order.into_iter().zip(groups).collect();
    indexed.sort_by_key(|(o, _)| *o);
    Ok(indexed.into_iter().map(|(_, g)| g).collect())
}

/// Undoes bridge chains among the positive-like clauses and returns one
/// [`BridgeChain`] per reassembled clause, in chain-head order.
pub(super) fn reassemble_chains(
    cnf: &Cnf,
    survey: &ClauseSurvey,
) -> Result<Vec<BridgeChain>, RecognitionFailure> {
    let positive_set: BTreeSet<usize> = survey.positive_like.iter().copied().collect();

    // occurrence census over the whole formula
    let mut occ: BTreeMap<VarId, Vec<(usize, bool)>> = BTreeMap::new();
    for (i, clause) in cnf.clauses.iter().enumerate() {
        for lit in clause {
            occ.entry(lit.var).or_default().push((i, lit.positive));
        }
    }

    // A bridge variable occurs exactly twice: once positive and once
    // negative, both inside positive-like clauses.
    let is_bridge = |v: VarId| -> Option<(usize, usize)> {
        match occ.get(&v).map(|o| o.as_slice()) {
            Some(&[(c1, true), (c2, false)]) | Some(&[(c2, false), (c1, true)])
                if c1 != c2 && positive_set.contains(&c1) && positive_set.contains(&c2) =>
            {
                Some((c1, c2))
            }
            _ => None,
        }
    };

    let mut outgoing: BTreeMap<usize, (VarId, usize)> = BTreeMap::new();
    let mut incoming: BTreeMap<usize, VarId> = BTreeMap::new();
    for &ci in &survey.positive_like {
        let clause = &cnf.clauses[ci];
        for lit in clause {
            if !lit.positive {
                // the single negative literal must be an incoming link
                match is_bridge(lit.var) {
                    Some(_) => {
                        incoming.insert(ci, lit.var);
                    }
                    None => {
                        return Err(RecognitionFailure::UnlinkedNegativeLiteral {
                            clause: ci,
                            var: lit.var,
                        })
                    }
                }
            }
        }
        let mut out: Vec<(VarId, usize)> = clause
            .iter()
            .filter(|l| l.positive)
            .filter_map(|l| is_bridge(l.var).map(|(_, to)| (l.var, to)))
            .collect();
        if out.len() > 1 {
            return Err(RecognitionFailure::BridgeBranching { clause: ci });
        }
        if let Some(link) = out.pop() {
            outgoing.insert(ci, link);
        }
    }

    let mut visited: BTreeSet<usize> = BTreeSet::new();
    let mut chains = Vec::new();
    for &head in &survey.positive_like {
        if incoming.contains_key(&head) {
            continue;
        }
        let mut segments = Vec::new();
        let mut links = Vec::new();
        let mut clause_indices = Vec::new();
        let mut cursor = head;
        loop {
            if !visited.insert(cursor) {
                return Err(RecognitionFailure::BridgeCycle { clause: cursor });
            }
            clause_indices.push(cursor);
            let out = outgoing.get(&cursor).copied();
            let payload: Vec<VarId> = cnf.clauses[cursor]
                .iter()
                .filter(|l| l.positive && Some(l.var) != out.map(|(v, _)| v))
                .map(|l| l.var)
                .collect();
            segments.push(payload);
            match out {
                Some((bridge, next)) => {
                    links.push(bridge);
                    cursor = next;
                }
                None => break,
            }
        }
        chains.push(BridgeChain {
            segments,
            links,
            clause_indices,
        });
    }

    if let Some(&stranded) = survey
        .positive_like
        .iter()
        .find(|ci| !visited.contains(ci))
    {
        return Err(RecognitionFailure::BridgeCycle { clause: stranded });
    }
    Ok(chains)
}

/// Recognizes the strict canonical form: optional clauses must coincide
/// exactly with a group's variables.
pub fn recognize_cmp_sat(cnf: &Cnf) -> Result<CmpSatForm, RecognitionFailure> {
    let survey = survey_clauses(cnf)?;
    let groups = discover_groups(cnf, &survey.negative_pairs)?;
    let chains = reassemble_chains(cnf, &survey)?;

    let mut positive_clauses = Vec::new();
    let mut kept_chains = Vec::new();
    let mut optional_clauses = Vec::new();
    for chain in chains {
        let payload = chain.payload();
        let payload_set: BTreeSet<VarId> = payload.iter().copied().collect();
        if payload_set.len() != payload.len() {
            let dup = payload
                .iter()
                .find(|v| payload.iter().filter(|w| w == v).count() > 1)
                .copied()
                .expect("duplicate exists");
            return Err(RecognitionFailure::DuplicatePositiveOccurrence { var: dup });
        }
        match groups
            .iter()
            .position(|g| g.iter().copied().collect::<BTreeSet<_>>() == payload_set)
        {
            Some(gi) => optional_clauses.push((gi, payload)),
            None => {
                positive_clauses.push(payload);
                kept_chains.push(chain);
            }
        }
    }

    check_steps_2_and_4(cnf, &positive_clauses, &groups)?;

    Ok(CmpSatForm {
        variable_count: cnf.variable_count,
        names: cnf.names.clone(),
        positive_clauses,
        chains: kept_chains,
        groups,
        optional_clauses,
    })
}

fn check_steps_2_and_4(
    _cnf: &Cnf,
    positive_clauses: &[Vec<VarId>],
    groups: &[Vec<VarId>],
) -> Result<(), RecognitionFailure> {
    if positive_clauses.is_empty() {
        return Err(RecognitionFailure::NoPositiveClauses);
    }
    let mut positive_occurrences: BTreeMap<VarId, usize> = BTreeMap::new();
    for clause in positive_clauses {
        for &v in clause {
            let n = positive_occurrences.entry(v).or_default();
            *n += 1;
            if *n > 1 {
                return Err(RecognitionFailure::DuplicatePositiveOccurrence { var: v });
            }
        }
    }
    for group in groups {
        for &v in group {
            if !positive_occurrences.contains_key(&v) {
                return Err(RecognitionFailure::GroupVarWithoutPositiveOccurrence { var: v });
            }
        }
    }
    for (ci, clause) in positive_clauses.iter().enumerate() {
        for group in groups {
            let shared: Vec<VarId> = clause
                .iter()
                .copied()
                .filter(|v| group.contains(v))
                .collect();
            if shared.len() > 1 {
                return Err(RecognitionFailure::CoGroupedVarsShareClause {
                    clause: ci,
                    vars: shared,
                });
            }
        }
    }
    Ok(())
}

/// The classical problem a recognized form defines: one girl per
/// mandatory positive clause, one element per group (its representative)
/// plus one per ungrouped variable.
pub struct BuiltCmp {
    pub cmp: CmpView,
    /// element chosen for each (clause index, element) pair maps back to
    /// this variable
    pub var_for: BTreeMap<(usize, ElementId), VarId>,
}

pub(super) fn build_cmp(form: &CmpSatForm) -> BuiltCmp {
    let mut element_names = Vec::new();
    let mut element_of_group = Vec::new();
    for (gi, _) in form.groups.iter().enumerate() {
        element_of_group.push(ElementId(element_names.len() as u32));
        element_names.push(format!("R{}", gi + 1));
    }
    let mut element_of_var: BTreeMap<VarId, ElementId> = BTreeMap::new();
    for clause in &form.positive_clauses {
        for &v in clause {
            if form.group_of(v).is_none() {
                element_of_var.entry(v).or_insert_with(|| {
                    let id = ElementId(element_names.len() as u32);
                    element_names.push(format!("v:{}", form.names[v.index()]));
                    id
                });
            }
        }
    }

    let mut acceptable = Vec::new();
    let mut var_for = BTreeMap::new();
    for (ci, clause) in form.positive_clauses.iter().enumerate() {
        let mut choices = Vec::new();
        for &v in clause {
            let element = match form.group_of(v) {
                Some(gi) => element_of_group[gi],
                None => element_of_var[&v],
            };
            choices.push(element);
            var_for.insert((ci, element), v);
        }
        acceptable.push(choices);
    }

    let cmp = CmpView {
        girl_names: (0..form.positive_clauses.len())
            .map(|i| format!("c{}", i + 1))
            .collect(),
        element_names,
        acceptable,
    };
    BuiltCmp { cmp, var_for }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CmpSatOutcome {
    Sat(Assignment),
    Unsat {
        violator: HallViolator,
        /// The classical problem the violator certifies.
        cmp: CmpView,
    },
}

impl CmpSatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, CmpSatOutcome::Sat(_))
    }
}

/// Solves a recognized form. Forms with optional clauses route through
/// the symmetric-marriage translation; pure forms solve the classical
/// problem directly and map the transversal back: the picked variable of
/// each clause becomes true, every other non-bridge variable false, and
/// bridge links are set so each chain clause stays satisfied.
pub fn solve_cmp_sat(form: &CmpSatForm) -> CmpSatOutcome {
    if !form.is_pure_cmp() {
        return super::smp_sat::solve_via_smp(form);
    }
    let built = build_cmp(form);
    match solve_cmp(&built.cmp) {
        CmpOutcome::Unsat(violator) => CmpSatOutcome::Unsat {
            violator,
            cmp: built.cmp,
        },
        CmpOutcome::Sat(transversal) => {
            let mut chosen = Vec::new();
            for (ci, &element) in transversal.iter().enumerate() {
                chosen.push(built.var_for[&(ci, element)]);
            }
            CmpSatOutcome::Sat(assignment_from_chosen(form, &chosen))
        }
    }
}

/// Builds the full assignment: `chosen[i]` is the variable satisfying
/// mandatory clause `i`.
pub(super) fn assignment_from_chosen(form: &CmpSatForm, chosen: &[VarId]) -> Assignment {
    let mut assignment = vec![false; form.variable_count];
    for &v in chosen {
        assignment[v.index()] = true;
    }
    for (ci, chain) in form.chains.iter().enumerate() {
        if !chain.is_bridged() {
            continue;
        }
        let hot = chain
            .segments
            .iter()
            .position(|seg| seg.contains(&chosen[ci]))
            .expect("chosen variable lies in its own chain");
        // links before the hot segment burn true, the rest stay false
        for (li, &link) in chain.links.iter().enumerate() {
            assignment[link.index()] = li < hot;
        }
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::satkit::cnf::{eval_cnf, Literal};
    use crate::satkit::Cnf;

    fn vars(ids: &[u32]) -> Vec<VarId> {
        ids.iter().map(|&i| VarId(i)).collect()
    }

    #[test]
    fn recognizes_eq4_canonical_system() {
        let cnf = crate::fixtures::eq4_canonical_cnf();
        let form = recognize_cmp_sat(&cnf).expect("canonical system");
        let name = |v: &VarId| cnf.names[v.index()].clone();
        let groups: Vec<Vec<String>> = form
            .groups
            .iter()
            .map(|g| g.iter().map(name).collect())
            .collect();
        assert_eq!(
            groups,
            vec![
                vec!["b11", "b12", "b14"],
                vec!["b21", "b23"],
                vec!["b31", "b32"],
                vec!["b43", "b44"],
            ]
        );
        assert_eq!(form.positive_clauses.len(), 4);
        assert!(form.is_pure_cmp());
    }

    #[test]
    fn recognizes_walkthrough_formula() {
        let cnf = crate::fixtures::walkthrough_cnf();
        let form = recognize_cmp_sat(&cnf).expect("walk-through formula");
        let name = |v: &VarId| cnf.names[v.index()].clone();
        let clauses: Vec<Vec<String>> = form
            .positive_clauses
            .iter()
            .map(|c| c.iter().map(name).collect())
            .collect();
        assert_eq!(
            clauses,
            vec![
                vec!["A", "B", "C", "D", "E"],
                vec!["F", "G"],
                vec!["H", "I", "J"],
            ]
        );
        let groups: Vec<Vec<String>> = form
            .groups
            .iter()
            .map(|g| g.iter().map(name).collect())
            .collect();
        assert_eq!(
            groups,
            vec![vec!["D", "F", "I"], vec!["C", "G", "H"], vec!["E", "J"]]
        );
        assert_eq!(form.chains[0].links, vars(&[10, 11]), "X then Y undone");
    }

    #[test]
    fn rejects_group_var_without_positive_occurrence() {
        // (a|b) & (!a|!c): c is negated but never positive
        let cnf = Cnf::new(
            3,
            vec![
                vec![Literal::pos(VarId(0)), Literal::pos(VarId(1))],
                vec![Literal::neg(VarId(0)), Literal::neg(VarId(2))],
            ],
        );
        let err = recognize_cmp_sat(&cnf).unwrap_err();
        assert_eq!(
            err,
            RecognitionFailure::GroupVarWithoutPositiveOccurrence { var: VarId(2) }
        );
        assert_eq!(err.step(), 4);
    }

    #[test]
    fn rejects_incomplete_clique() {
        // pairs (a,b), (b,c) without (a,c)
        let cnf = Cnf::new(
            4,
            vec![
                vec![Literal::pos(VarId(3))],
                vec![Literal::neg(VarId(0)), Literal::neg(VarId(1))],
                vec![Literal::neg(VarId(1)), Literal::neg(VarId(2))],
            ],
        );
        let err = recognize_cmp_sat(&cnf).unwrap_err();
        assert!(matches!(err, RecognitionFailure::GroupNotClique { .. }));
    }

    #[test]
    fn solves_walkthrough_and_accepts_reference_assignment() {
        let cnf = crate::fixtures::walkthrough_cnf();
        let form = recognize_cmp_sat(&cnf).unwrap();
        match solve_cmp_sat(&form) {
            CmpSatOutcome::Sat(a) => assert!(eval_cnf(&cnf, &a)),
            _ => panic!("walk-through is satisfiable"),
        }
        // the reference witness: A=F=H=true, everything else false
        let mut reference = vec![false; cnf.variable_count];
        for name in ["A", "F", "H"] {
            let v = cnf.names.iter().position(|n| n == name).unwrap();
            reference[v] = true;
        }
        assert!(eval_cnf(&cnf, &reference));
    }

    #[test]
    fn solves_eq4_canonical_system() {
        let cnf = crate::fixtures::eq4_canonical_cnf();
        let form = recognize_cmp_sat(&cnf).unwrap();
        match solve_cmp_sat(&form) {
            CmpSatOutcome::Sat(a) => {
                assert!(eval_cnf(&cnf, &a));
                assert_eq!(a.iter().filter(|&&b| b).count(), 4);
            }
            _ => panic!("canonical system is satisfiable"),
        }
    }

    #[test]
    fn two_girls_one_boy_is_unsat_with_violator() {
        // clauses (a), (a') with group {a, a'}
        let cnf = Cnf::new(
            2,
            vec![
                vec![Literal::pos(VarId(0))],
                vec![Literal::pos(VarId(1))],
                vec![Literal::neg(VarId(0)), Literal::neg(VarId(1))],
            ],
        );
        let form = recognize_cmp_sat(&cnf).unwrap();
        match solve_cmp_sat(&form) {
            CmpSatOutcome::Unsat { violator, cmp } => {
                assert_eq!(violator.girls.len(), 2);
                assert!(violator.verify(&cmp));
            }
            _ => panic!("two clauses share one representative"),
        }
    }
}
