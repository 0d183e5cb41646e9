//! The half-fraction hardness gadget: a tripartite matching instance
//! becomes an FMP whose fractions are all exactly 1/2.
//!
//! Every triple `(g, x, y)` contributes the tradeoff `{1/2 x, 1/2 y}` to
//! girl `g`'s set. Each distinct `x` and `y` also receives a guard: a
//! single-tradeoff set `{1/2 x, 1/2 z}` with a fresh `z`. Guards must be
//! satisfied, so they soak up half of every part element, leaving room
//! for at most one chosen triple per element — the FMP is solvable iff a
//! matching covering every girl with pairwise distinct parts exists.

use std::collections::HashMap;

use crate::fmp::{ElementId, FmpInstance, Fragment, GirlId, Tradeoff, TradeoffSet};
use crate::format::TripartiteInstance;
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct TripartiteFmp {
    pub instance: FmpInstance,
    /// guard girl index per guarded element, in emission order
    pub guards: Vec<(ElementId, GirlId)>,
}

pub fn tripartite_to_fmp(tri: &TripartiteInstance) -> TripartiteFmp {
    let mut girl_names: Vec<String> = Vec::new();
    let mut girl_of: HashMap<&str, usize> = HashMap::new();
    let mut element_names: Vec<String> = Vec::new();
    let mut element_of: HashMap<&str, usize> = HashMap::new();
    let mut part_elements: Vec<usize> = Vec::new(); // first-appearance order

    for (g, x, y) in &tri.triples {
        if !girl_of.contains_key(g.as_str()) {
            girl_of.insert(g, girl_names.len());
            girl_names.push(g.clone());
        }
        for e in [x, y] {
            if !element_of.contains_key(e.as_str()) {
                element_of.insert(e, element_names.len());
                part_elements.push(element_names.len());
                element_names.push(e.clone());
            }
        }
    }

    let half = Rational::ratio(1, 2);
    let mut sets: Vec<Vec<Tradeoff>> = vec![Vec::new(); girl_names.len()];
    for (g, x, y) in &tri.triples {
        sets[girl_of[g.as_str()]].push(Tradeoff::canonical(vec![
            Fragment::new(ElementId(element_of[x.as_str()] as u32), half.clone()),
            Fragment::new(ElementId(element_of[y.as_str()] as u32), half.clone()),
        ]));
    }

    // one guard per distinct part element, with a fresh z each
    let mut guards = Vec::new();
    let mut z_counter = 1usize;
    for &e in &part_elements {
        let z_name = loop {
            let candidate = format!("z{z_counter}");
            z_counter += 1;
            if !element_of.contains_key(candidate.as_str()) && !element_names.contains(&candidate)
            {
                break candidate;
            }
        };
        let z = ElementId(element_names.len() as u32);
        element_names.push(z_name);

        let guard_girl = GirlId(sets.len() as u32);
        let base = format!("guard.{}", element_names[e]);
        let mut name = base.clone();
        let mut k = 1;
        while girl_names.contains(&name) {
            name = format!("{base}.{k}");
            k += 1;
        }
        girl_names.push(name);
        sets.push(vec![Tradeoff::canonical(vec![
            Fragment::new(ElementId(e as u32), half.clone()),
            Fragment::new(z, half.clone()),
        ])]);
        guards.push((ElementId(e as u32), guard_girl));
    }

    let sets = sets
        .into_iter()
        .enumerate()
        .map(|(i, tradeoffs)| TradeoffSet {
            girl: GirlId(i as u32),
            tradeoffs,
        })
        .collect();
    let instance = FmpInstance::new(girl_names, element_names, sets)
        .expect("gadget output is structurally valid");
    TripartiteFmp { instance, guards }
}

/// Exhaustive check for a perfect matching of the girls onto pairwise
/// distinct part elements; the reference for differential tests.
pub fn tripartite_bruteforce(tri: &TripartiteInstance) -> bool {
    let mut girls: Vec<&str> = Vec::new();
    for (g, _, _) in &tri.triples {
        if !girls.contains(&g.as_str()) {
            girls.push(g);
        }
    }

    fn rec(
        girls: &[&str],
        triples: &[(String, String, String)],
        used_x: &mut Vec<String>,
        used_y: &mut Vec<String>,
    ) -> bool {
        let Some((&g, rest)) = girls.split_first() else {
            return true;
        };
        for (tg, x, y) in triples {
            if tg == g && !used_x.contains(x) && !used_y.contains(y) {
                used_x.push(x.clone());
                used_y.push(y.clone());
                if rec(rest, triples, used_x, used_y) {
                    return true;
                }
                used_x.pop();
                used_y.pop();
            }
        }
        false
    }

    rec(&girls, &tri.triples, &mut Vec::new(), &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{solve_fmp_bruteforce, OracleBudget};
    use crate::rational::Rational;

    fn tri(triples: &[(&str, &str, &str)]) -> TripartiteInstance {
        TripartiteInstance {
            triples: triples
                .iter()
                .map(|(g, x, y)| (g.to_string(), x.to_string(), y.to_string()))
                .collect(),
        }
    }

    fn solvable(inst: &FmpInstance) -> bool {
        solve_fmp_bruteforce(inst, &OracleBudget::default()).expect_decided("tripartite gadget")
    }

    #[test]
    fn single_triple_is_sat() {
        let gadget = tripartite_to_fmp(&tri(&[("g1", "x1", "y1")]));
        // girl set + two guards
        assert_eq!(gadget.instance.girl_count(), 3);
        assert!(solvable(&gadget.instance));
    }

    #[test]
    fn two_girls_sharing_a_triple_is_unsat() {
        let gadget = tripartite_to_fmp(&tri(&[("g1", "x1", "y1"), ("g2", "x1", "y1")]));
        assert!(!solvable(&gadget.instance));
    }

    #[test]
    fn disjoint_triples_are_sat() {
        let gadget = tripartite_to_fmp(&tri(&[("g1", "x1", "y1"), ("g2", "x2", "y2")]));
        assert!(solvable(&gadget.instance));
    }

    #[test]
    fn every_fraction_is_exactly_one_half() {
        let gadget = tripartite_to_fmp(&tri(&[
            ("g1", "x1", "y1"),
            ("g1", "x2", "y1"),
            ("g2", "x1", "y2"),
        ]));
        let half = Rational::ratio(1, 2);
        for set in gadget.instance.sets() {
            for t in &set.tradeoffs {
                for frag in &t.fragments {
                    assert_eq!(frag.weight, half);
                }
            }
        }
    }

    #[test]
    fn gadget_agrees_with_matching_bruteforce() {
        let cases = [
            tri(&[("g1", "x1", "y1"), ("g2", "x1", "y2"), ("g3", "x2", "y1")]),
            tri(&[("g1", "x1", "y1"), ("g2", "x1", "y1"), ("g2", "x2", "y2")]),
            tri(&[("g1", "x1", "y1"), ("g1", "x2", "y2")]),
        ];
        for case in cases {
            let gadget = tripartite_to_fmp(&case);
            assert_eq!(tripartite_bruteforce(&case), solvable(&gadget.instance));
        }
    }
}
