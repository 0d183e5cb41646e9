//! The fractional marriage problem data model.
//!
//! An instance is a triple of girls, elements and one tradeoff set per
//! girl. A tradeoff is a bundle of weighted fragments; canonical (input)
//! tradeoffs have weights summing to exactly 1, while working tradeoffs
//! produced by the rewrite engine may sum to less or more. A solution
//! picks exactly one tradeoff per girl, and is feasible when every
//! element's total chosen weight stays within its unit capacity.
//!
//! Girls and elements are dense indices into the instance's name tables,
//! so all inner loops work on integers while parsing and reporting speak
//! in names.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::rational::Rational;

/// Index of a girl within an instance.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct GirlId(pub u32);

/// Index of an element within an instance.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ElementId(pub u32);

impl GirlId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl ElementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One weighted term `w·e` inside a tradeoff.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Fragment {
    pub element: ElementId,
    pub weight: Rational,
}

impl Fragment {
    pub fn new(element: ElementId, weight: Rational) -> Self {
        Fragment { element, weight }
    }

    pub fn whole(element: ElementId) -> Self {
        Fragment {
            element,
            weight: Rational::one(),
        }
    }

    /// Whole-element fragment (weight exactly 1).
    pub fn is_integral(&self) -> bool {
        self.weight.is_one()
    }
}

/// A bundle of fragments acceptable to a girl.
///
/// `canonical` distinguishes input tradeoffs, whose weights must sum to
/// exactly 1, from working tradeoffs inside the rewrite engine, whose
/// sums may drift below or above 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Tradeoff {
    pub fragments: Vec<Fragment>,
    pub canonical: bool,
}

impl Tradeoff {
    pub fn canonical(fragments: Vec<Fragment>) -> Self {
        Tradeoff {
            fragments,
            canonical: true,
        }
    }

    pub fn working(fragments: Vec<Fragment>) -> Self {
        Tradeoff {
            fragments,
            canonical: false,
        }
    }

    /// Single whole-element tradeoff `{e}`.
    pub fn integral(element: ElementId) -> Self {
        Tradeoff::canonical(vec![Fragment::whole(element)])
    }

    pub fn weight_sum(&self) -> Rational {
        self.fragments.iter().map(|f| f.weight.clone()).sum()
    }

    /// True when the tradeoff is a single whole element.
    pub fn is_integral(&self) -> bool {
        self.fragments.len() == 1 && self.fragments[0].is_integral()
    }

    pub fn is_fractional(&self) -> bool {
        !self.is_integral()
    }

    pub fn weight_of(&self, element: ElementId) -> Option<&Rational> {
        self.fragments
            .iter()
            .find(|f| f.element == element)
            .map(|f| &f.weight)
    }
}

/// The tradeoff set `T_g` of one girl.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TradeoffSet {
    pub girl: GirlId,
    pub tradeoffs: Vec<Tradeoff>,
}

/// A fractional marriage problem instance `(G, B, {T_g})`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FmpInstance {
    pub(crate) girl_names: Vec<String>,
    pub(crate) element_names: Vec<String>,
    pub(crate) sets: Vec<TradeoffSet>,
}

impl FmpInstance {
    /// Assembles an instance; set `i` must belong to girl `i` and every
    /// fragment must reference a declared element.
    pub fn new(
        girl_names: Vec<String>,
        element_names: Vec<String>,
        sets: Vec<TradeoffSet>,
    ) -> Result<Self, InstanceError> {
        if sets.len() != girl_names.len() {
            return Err(InstanceError::SetCountMismatch {
                girls: girl_names.len(),
                sets: sets.len(),
            });
        }
        for (i, set) in sets.iter().enumerate() {
            if set.girl.index() != i {
                return Err(InstanceError::SetOutOfOrder { position: i });
            }
            for t in &set.tradeoffs {
                for frag in &t.fragments {
                    if frag.element.index() >= element_names.len() {
                        return Err(InstanceError::UndeclaredElement {
                            girl: girl_names[i].clone(),
                        });
                    }
                }
            }
        }
        Ok(FmpInstance {
            girl_names,
            element_names,
            sets,
        })
    }

    pub fn girl_count(&self) -> usize {
        self.girl_names.len()
    }

    pub fn element_count(&self) -> usize {
        self.element_names.len()
    }

    pub fn girl_name(&self, g: GirlId) -> &str {
        &self.girl_names[g.index()]
    }

    pub fn element_name(&self, e: ElementId) -> &str {
        &self.element_names[e.index()]
    }

    pub fn girl_names(&self) -> &[String] {
        &self.girl_names
    }

    pub fn element_names(&self) -> &[String] {
        &self.element_names
    }

    pub fn girls(&self) -> impl Iterator<Item = GirlId> {
        (0..self.girl_names.len() as u32).map(GirlId)
    }

    pub fn elements(&self) -> impl Iterator<Item = ElementId> {
        (0..self.element_names.len() as u32).map(ElementId)
    }

    pub fn set(&self, g: GirlId) -> &TradeoffSet {
        &self.sets[g.index()]
    }

    pub fn sets(&self) -> &[TradeoffSet] {
        &self.sets
    }

    pub fn element_id(&self, name: &str) -> Option<ElementId> {
        self.element_names
            .iter()
            .position(|n| n == name)
            .map(|i| ElementId(i as u32))
    }

    pub fn girl_id(&self, name: &str) -> Option<GirlId> {
        self.girl_names
            .iter()
            .position(|n| n == name)
            .map(|i| GirlId(i as u32))
    }

    /// Number of choice tuples `Π |T_g|`, or `None` on overflow.
    pub fn choice_tuple_count(&self) -> Option<u128> {
        let mut product: u128 = 1;
        for set in &self.sets {
            product = product.checked_mul(set.tradeoffs.len() as u128)?;
        }
        Some(product)
    }

    pub fn total_fragment_count(&self) -> usize {
        self.sets
            .iter()
            .flat_map(|s| &s.tradeoffs)
            .map(|t| t.fragments.len())
            .sum()
    }

    /// Total fragment weight of each element across the whole instance.
    pub fn element_totals(&self) -> Vec<Rational> {
        let mut totals = vec![Rational::zero(); self.element_count()];
        for set in &self.sets {
            for t in &set.tradeoffs {
                for frag in &t.fragments {
                    totals[frag.element.index()] += &frag.weight;
                }
            }
        }
        totals
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("{girls} girls but {sets} tradeoff sets")]
    SetCountMismatch { girls: usize, sets: usize },
    #[error("tradeoff set at position {position} does not belong to girl {position}")]
    SetOutOfOrder { position: usize },
    #[error("tradeoff of girl {girl} references an undeclared element")]
    UndeclaredElement { girl: String },
}

/// One chosen tradeoff index per girl.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FmpSolution {
    pub choice: Vec<usize>,
}

impl FmpSolution {
    pub fn new(choice: Vec<usize>) -> Self {
        FmpSolution { choice }
    }
}

/// Per-element total chosen weight; feasible when every load is at most 1.
#[derive(Clone, Debug)]
pub struct ElementLoad {
    loads: Vec<Rational>,
}

impl ElementLoad {
    pub fn get(&self, e: ElementId) -> &Rational {
        &self.loads[e.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ElementId, &Rational)> {
        self.loads
            .iter()
            .enumerate()
            .map(|(i, w)| (ElementId(i as u32), w))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolutionError {
    #[error("solution has {got} choices for {expected} girls")]
    LengthMismatch { expected: usize, got: usize },
    #[error("choice index {index} out of range for girl {girl} with {available} tradeoffs")]
    IndexOutOfRange {
        girl: String,
        index: usize,
        available: usize,
    },
}

/// Outcome of [`check_solution`].
#[derive(Clone, Debug)]
pub struct FeasibilityReport {
    pub loads: ElementLoad,
    pub overloaded: Vec<(ElementId, Rational)>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.overloaded.is_empty()
    }
}

/// Severity of a validation finding. Warnings flag unusual but processable
/// instances (an empty tradeoff set encodes an explicitly unsatisfiable
/// girl; declared-but-unused elements are harmless supply).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.issues.iter().any(|i| i.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &ValidationIssue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
    }

    fn error(&mut self, message: String) {
        self.issues.push(ValidationIssue {
            severity: Severity::Error,
            message,
        });
    }

    fn warning(&mut self, message: String) {
        self.issues.push(ValidationIssue {
            severity: Severity::Warning,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "ok");
        }
        for issue in &self.issues {
            let tag = match issue.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{}: {}", tag, issue.message)?;
        }
        Ok(())
    }
}

/// Reports every invariant violation with its location; the report is
/// empty exactly when the instance is well-formed.
pub fn validate_instance(inst: &FmpInstance) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut seen = HashMap::new();
    for (i, name) in inst.girl_names.iter().enumerate() {
        if let Some(first) = seen.insert(name.clone(), i) {
            report.error(format!(
                "duplicate girl id `{name}` (positions {first} and {i})"
            ));
        }
    }
    let mut seen = HashMap::new();
    for (i, name) in inst.element_names.iter().enumerate() {
        if let Some(first) = seen.insert(name.clone(), i) {
            report.error(format!(
                "duplicate element id `{name}` (positions {first} and {i})"
            ));
        }
    }

    let mut mentioned = vec![false; inst.element_count()];
    for set in &inst.sets {
        let girl = inst.girl_name(set.girl);
        if set.tradeoffs.is_empty() {
            report.warning(format!(
                "girl {girl} has an empty tradeoff set (explicitly unsatisfiable)"
            ));
        }
        for (ti, t) in set.tradeoffs.iter().enumerate() {
            let mut elems = BTreeSet::new();
            for frag in &t.fragments {
                mentioned[frag.element.index()] = true;
                if !elems.insert(frag.element) {
                    report.error(format!(
                        "girl {girl}, tradeoff {ti}: element {} appears twice",
                        inst.element_name(frag.element)
                    ));
                }
                if !frag.weight.is_positive() || frag.weight > Rational::one() {
                    report.error(format!(
                        "girl {girl}, tradeoff {ti}: weight {} for {} outside (0, 1]",
                        frag.weight,
                        inst.element_name(frag.element)
                    ));
                }
            }
            if t.canonical && !t.weight_sum().is_one() {
                report.error(format!(
                    "girl {girl}, tradeoff {ti}: weights sum to {} != 1",
                    t.weight_sum()
                ));
            }
        }
    }
    for (i, used) in mentioned.iter().enumerate() {
        if !used {
            report.warning(format!(
                "element {} is declared but never mentioned",
                inst.element_names[i]
            ));
        }
    }
    report
}

/// Computes element loads for a purported solution. Feasible iff every
/// element's load is at most 1; the report lists each overloaded element.
pub fn check_solution(
    inst: &FmpInstance,
    sol: &FmpSolution,
) -> Result<FeasibilityReport, SolutionError> {
    if sol.choice.len() != inst.girl_count() {
        return Err(SolutionError::LengthMismatch {
            expected: inst.girl_count(),
            got: sol.choice.len(),
        });
    }
    let mut loads = vec![Rational::zero(); inst.element_count()];
    for (set, &pick) in inst.sets.iter().zip(&sol.choice) {
        let tradeoff = set.tradeoffs.get(pick).ok_or(SolutionError::IndexOutOfRange {
            girl: inst.girl_name(set.girl).to_string(),
            index: pick,
            available: set.tradeoffs.len(),
        })?;
        for frag in &tradeoff.fragments {
            loads[frag.element.index()] += &frag.weight;
        }
    }
    let one = Rational::one();
    let overloaded = loads
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > one)
        .map(|(i, w)| (ElementId(i as u32), w.clone()))
        .collect();
    Ok(FeasibilityReport {
        loads: ElementLoad { loads },
        overloaded,
    })
}

/// A classical marriage problem: each girl lists whole elements.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CmpView {
    pub girl_names: Vec<String>,
    pub element_names: Vec<String>,
    /// Acceptable elements per girl, in declaration order.
    pub acceptable: Vec<Vec<ElementId>>,
}

impl CmpView {
    pub fn girl_count(&self) -> usize {
        self.girl_names.len()
    }

    pub fn element_count(&self) -> usize {
        self.element_names.len()
    }

    /// Re-expresses the CMP as an FMP with integral tradeoffs.
    pub fn to_fmp(&self) -> FmpInstance {
        let sets = self
            .acceptable
            .iter()
            .enumerate()
            .map(|(i, choices)| TradeoffSet {
                girl: GirlId(i as u32),
                tradeoffs: choices.iter().map(|&e| Tradeoff::integral(e)).collect(),
            })
            .collect();
        FmpInstance::new(self.girl_names.clone(), self.element_names.clone(), sets)
            .expect("CMP view is structurally valid")
    }
}

/// Returns the CMP view iff every tradeoff is a single whole element.
pub fn as_cmp(inst: &FmpInstance) -> Option<CmpView> {
    let mut acceptable = Vec::with_capacity(inst.girl_count());
    for set in &inst.sets {
        let mut choices = Vec::with_capacity(set.tradeoffs.len());
        for t in &set.tradeoffs {
            if !t.is_integral() {
                return None;
            }
            choices.push(t.fragments[0].element);
        }
        acceptable.push(choices);
    }
    Some(CmpView {
        girl_names: inst.girl_names.clone(),
        element_names: inst.element_names.clone(),
        acceptable,
    })
}

/// Elements whose total fragment weight across the instance is at most 1,
/// hence never a bottleneck.
pub fn free_elements(inst: &FmpInstance) -> BTreeSet<ElementId> {
    let one = Rational::one();
    inst.element_totals()
        .into_iter()
        .enumerate()
        .filter(|(_, total)| *total <= one)
        .map(|(i, _)| ElementId(i as u32))
        .collect()
}

/// A witness that a CMP has no transversal: a set of girls whose union of
/// acceptable elements is strictly smaller than the set itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallViolator {
    pub girls: BTreeSet<GirlId>,
    pub element_union: BTreeSet<ElementId>,
}

impl HallViolator {
    /// Checks both halves of the witness against the CMP it came from:
    /// the strict inequality and that `element_union` is exactly the
    /// union of the girls' acceptable elements.
    pub fn verify(&self, cmp: &CmpView) -> bool {
        if self.girls.len() <= self.element_union.len() {
            return false;
        }
        let union: BTreeSet<ElementId> = self
            .girls
            .iter()
            .flat_map(|g| cmp.acceptable[g.index()].iter().copied())
            .collect();
        union == self.element_union
    }
}

/// Stable map from element names to loads, for reporting.
pub fn named_loads<'a>(
    inst: &'a FmpInstance,
    loads: &'a ElementLoad,
) -> BTreeMap<&'a str, &'a Rational> {
    loads
        .iter()
        .map(|(e, w)| (inst.element_name(e), w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_fmp;

    fn fmp(body: &str) -> FmpInstance {
        parse_fmp(&format!("fmp v1\n{body}\n")).expect("fixture parses")
    }

    #[test]
    fn minimal_valid_instance() {
        let inst = fmp("girl g1: { 1 b1 }");
        let report = validate_instance(&inst);
        assert!(report.is_clean(), "{report}");
    }

    #[test]
    fn canonical_sum_violation() {
        let inst = fmp("girl g1: { 1/2 b1 }");
        let report = validate_instance(&inst);
        assert!(report.has_errors());
        let msg = &report.errors().next().unwrap().message;
        assert!(msg.contains("sum to 1/2"), "{msg}");
    }

    #[test]
    fn psi_prime_reduction_output_is_valid() {
        let inst = crate::fixtures::psi_prime_fmp();
        let report = validate_instance(&inst);
        assert!(report.is_clean(), "{report}");
    }

    #[test]
    fn feasibility_minimal() {
        let inst = fmp("girl g1: { 1 b1 }");
        let rep = check_solution(&inst, &FmpSolution::new(vec![0])).unwrap();
        assert!(rep.feasible());
        assert!(rep.loads.get(inst.element_id("b1").unwrap()).is_one());
    }

    #[test]
    fn feasibility_overload() {
        let inst = fmp(concat!(
            "girl g1: { 1/2 b1, 1/2 b2 }\n",
            "girl g2: { 2/3 b1, 1/3 b3 }"
        ));
        let rep = check_solution(&inst, &FmpSolution::new(vec![0, 0])).unwrap();
        assert!(!rep.feasible());
        let b1 = inst.element_id("b1").unwrap();
        assert_eq!(rep.overloaded, vec![(b1, Rational::ratio(7, 6))]);
    }

    #[test]
    fn choice_index_out_of_range() {
        let inst = fmp("girl g1: { 1 b1 }");
        let err = check_solution(&inst, &FmpSolution::new(vec![3])).unwrap_err();
        assert!(matches!(err, SolutionError::IndexOutOfRange { index: 3, .. }));
    }

    #[test]
    fn eq4_solution_from_oracle_is_feasible() {
        // the hand-derived transversal g1->b3, g2->b1, g3->b2, g4->b4
        let inst = crate::fixtures::eq4_cmp().to_fmp();
        let sol = FmpSolution::new(vec![2, 0, 0, 1]);
        assert!(check_solution(&inst, &sol).unwrap().feasible());
    }

    #[test]
    fn as_cmp_on_integral_and_fractional() {
        let eq4 = crate::fixtures::eq4_fmp();
        let view = as_cmp(&eq4).expect("eq4 is a CMP");
        let names: Vec<Vec<&str>> = view
            .acceptable
            .iter()
            .map(|es| es.iter().map(|&e| view.element_names[e.index()].as_str()).collect())
            .collect();
        assert_eq!(
            names,
            vec![
                vec!["b1", "b2", "b3"],
                vec!["b1", "b3"],
                vec!["b2", "b4"],
                vec!["b1", "b4"],
            ]
        );

        let frac = fmp("girl g1: { 1/2 b1, 1/2 b2 }");
        assert!(as_cmp(&frac).is_none());
    }

    #[test]
    fn free_elements_by_total_weight() {
        let inst = fmp("girl g1: { 2/3 b, 1/3 c }");
        let b = inst.element_id("b").unwrap();
        assert!(free_elements(&inst).contains(&b));

        let inst = fmp(concat!(
            "girl g1: { 1/2 b, 1/2 c }\n",
            "girl g2: { 1/2 b, 1/2 d }\n",
            "girl g3: { 1/2 b, 1/2 e }"
        ));
        let b = inst.element_id("b").unwrap();
        assert!(!free_elements(&inst).contains(&b), "3/2 > 1");
    }

    #[test]
    fn free_elements_in_psi_prime() {
        // b4 appears only integrally in T_g3 of the worked reduction
        let inst = crate::fixtures::psi_prime_fmp();
        let b4 = inst.element_id("b4").unwrap();
        assert!(free_elements(&inst).contains(&b4));
    }

    #[test]
    fn duplicate_ids_are_errors() {
        let girls = vec!["g".into(), "g".into()];
        let sets = vec![
            TradeoffSet { girl: GirlId(0), tradeoffs: vec![Tradeoff::integral(ElementId(0))] },
            TradeoffSet { girl: GirlId(1), tradeoffs: vec![Tradeoff::integral(ElementId(0))] },
        ];
        let inst = FmpInstance::new(girls, vec!["b".into()], sets).unwrap();
        assert!(validate_instance(&inst).has_errors());
    }
}
