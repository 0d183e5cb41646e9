//! Polynomial matching solvers.
//!
//! - [`max_bipartite_matching`] — Hopcroft–Karp maximum matching.
//! - [`solve_cmp`] — the classical marriage problem. SAT returns a
//!   transversal; UNSAT returns a [`HallViolator`] extracted from
//!   alternating-path reachability off an unmatched girl.
//! - [`solve_smp`] — the symmetric (two-sided list) marriage problem via
//!   maximum matching on the four-group graph, followed by the
//!   mismatched-edge repair loop.

mod smp;

pub use smp::{
    build_smp_graph, smp_as_two_cmps, smp_bruteforce, solve_smp, SmpGraph, SmpInstance, SmpNode,
    SmpOutcome, SmpPairing, TwoCmps,
};

use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::fmp::{CmpView, ElementId, GirlId, HallViolator};

/// A bipartite graph over dense left/right indices.
#[derive(Clone, Debug)]
pub struct BipartiteGraph {
    pub left_count: usize,
    pub right_count: usize,
    adjacency: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    /// Adjacency lists are sorted and deduplicated; out-of-range indices
    /// panic.
    pub fn new(left_count: usize, right_count: usize, mut adjacency: Vec<Vec<usize>>) -> Self {
        assert_eq!(adjacency.len(), left_count);
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            if let Some(&max) = list.last() {
                assert!(max < right_count, "right index {max} out of range");
            }
        }
        BipartiteGraph {
            left_count,
            right_count,
            adjacency,
        }
    }

    pub fn neighbors(&self, left: usize) -> &[usize] {
        &self.adjacency[left]
    }
}

/// A matching as a partial injective map in both directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.left_to_right.iter().flatten().count()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left_to_right
            .iter()
            .enumerate()
            .filter_map(|(l, r)| r.map(|r| (l, r)))
    }
}

const UNMATCHED: usize = usize::MAX;

/// Hopcroft–Karp maximum-cardinality bipartite matching. Deterministic:
/// ties are broken by adjacency order.
pub fn max_bipartite_matching(g: &BipartiteGraph) -> Matching {
    let mut match_left = vec![UNMATCHED; g.left_count];
    let mut match_right = vec![UNMATCHED; g.right_count];
    let mut dist = vec![0usize; g.left_count];

    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..g.left_count {
            if match_left[l] == UNMATCHED {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found_augmenting_layer = false;
        while let Some(l) = queue.pop_front() {
            for &r in g.neighbors(l) {
                let l2 = match_right[r];
                if l2 == UNMATCHED {
                    found_augmenting_layer = true;
                } else if dist[l2] == usize::MAX {
                    dist[l2] = dist[l] + 1;
                    queue.push_back(l2);
                }
            }
        }
        if !found_augmenting_layer {
            break;
        }
        let mut augmented = false;
        for l in 0..g.left_count {
            if match_left[l] == UNMATCHED
                && augment(g, l, &mut match_left, &mut match_right, &mut dist)
            {
                augmented = true;
            }
        }
        if !augmented {
            break;
        }
    }

    Matching {
        left_to_right: match_left
            .into_iter()
            .map(|r| (r != UNMATCHED).then_some(r))
            .collect(),
        right_to_left: match_right
            .into_iter()
            .map(|l| (l != UNMATCHED).then_some(l))
            .collect(),
    }
}

fn augment(
    g: &BipartiteGraph,
    l: usize,
    match_left: &mut [usize],
    match_right: &mut [usize],
    dist: &mut [usize],
) -> bool {
    let d = std::mem::replace(&mut dist[l], usize::MAX);
    for &r in g.neighbors(l) {
        let l2 = match_right[r];
        if l2 == UNMATCHED
            || (dist[l2] == d + 1 && augment(g, l2, match_left, match_right, dist))
        {
            match_left[l] = r;
            match_right[r] = l;
            return true;
        }
    }
    false
}

/// A transversal: one distinct element per girl.
pub type Transversal = Vec<ElementId>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CmpOutcome {
    Sat(Transversal),
    Unsat(HallViolator),
}

impl CmpOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, CmpOutcome::Sat(_))
    }
}

/// Solves the classical marriage problem. On SAT the transversal assigns
/// each girl a distinct acceptable element; on UNSAT the returned Hall
/// violator is the set of girls reachable by alternating paths from an
/// unmatched girl, whose acceptable-element union is strictly smaller.
pub fn solve_cmp(cmp: &CmpView) -> CmpOutcome {
    let graph = BipartiteGraph::new(
        cmp.girl_count(),
        cmp.element_count(),
        cmp.acceptable
            .iter()
            .map(|es| es.iter().map(|e| e.index()).collect())
            .collect(),
    );
    let matching = max_bipartite_matching(&graph);

    if matching.size() == cmp.girl_count() {
        let transversal = matching
            .left_to_right
            .iter()
            .map(|r| ElementId(r.expect("perfect on girls") as u32))
            .collect();
        return CmpOutcome::Sat(transversal);
    }

    let root = matching
        .left_to_right
        .iter()
        .position(|r| r.is_none())
        .expect("some girl is unmatched");

    // alternating-path reachability: girl -> any acceptable element,
    // element -> its matched girl
    let mut girls = BTreeSet::new();
    let mut elements = BTreeSet::new();
    let mut queue = VecDeque::from([root]);
    girls.insert(GirlId(root as u32));
    while let Some(g) = queue.pop_front() {
        for &e in graph.neighbors(g) {
            if elements.insert(ElementId(e as u32)) {
                if let Some(g2) = matching.right_to_left[e] {
                    if girls.insert(GirlId(g2 as u32)) {
                        queue.push_back(g2);
                    }
                }
            }
        }
    }

    let violator = HallViolator {
        girls,
        element_union: elements,
    };
    debug_assert!(violator.verify(cmp));
    CmpOutcome::Unsat(violator)
}
