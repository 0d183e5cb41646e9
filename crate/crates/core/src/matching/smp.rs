//! The symmetric marriage problem: both sides may submit lists, unlisted
//! members are unconstrained, and a solution is an injective partial
//! pairing that marries every listed member to someone on their list.
//!
//! The solver builds the four-group graph: the girls `G`, the boys `B`,
//! one list-node `L_g` per listed girl and one `L_b` per listed boy.
//! A plain edge `g-b` exists iff exactly one side is listed and lists the
//! other; a list-compatible pair contributes the two edges `g-L_b` and
//! `b-L_g`. The instance is solvable iff a maximum matching has size
//! `|G_L| + |B_L|`; such a matching is then repaired until every edge
//! `(g, L_b)` is accompanied by its partner `(L_g, b)`, at which point it
//! reads off as a pairing.

use std::collections::BTreeSet;

use crate::fmp::{CmpView, ElementId};

use super::{max_bipartite_matching, BipartiteGraph, Matching};

/// `None` in a list slot means the member submitted no list (they are
/// unconstrained); `Some(vec![])` is a declared empty list, which forces
/// unsatisfiability for that member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmpInstance {
    pub girl_names: Vec<String>,
    pub boy_names: Vec<String>,
    pub girl_lists: Vec<Option<Vec<usize>>>,
    pub boy_lists: Vec<Option<Vec<usize>>>,
}

impl SmpInstance {
    pub fn girl_count(&self) -> usize {
        self.girl_names.len()
    }

    pub fn boy_count(&self) -> usize {
        self.boy_names.len()
    }

    pub fn listed_girls(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.girl_count()).filter(|&g| self.girl_lists[g].is_some())
    }

    pub fn listed_boys(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.boy_count()).filter(|&b| self.boy_lists[b].is_some())
    }

    pub fn list_compatible(&self, g: usize, b: usize) -> bool {
        matches!(&self.girl_lists[g], Some(list) if list.contains(&b))
            && matches!(&self.boy_lists[b], Some(list) if list.contains(&g))
    }

    /// A pair is admissible when each listed side lists the other.
    pub fn pair_allowed(&self, g: usize, b: usize) -> bool {
        let girl_ok = match &self.girl_lists[g] {
            Some(list) => list.contains(&b),
            None => true,
        };
        let boy_ok = match &self.boy_lists[b] {
            Some(list) => list.contains(&g),
            None => true,
        };
        girl_ok && boy_ok
    }
}

/// Nodes of the four-group graph, in deterministic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SmpNode {
    Girl(usize),
    Boy(usize),
    GirlList(usize),
    BoyList(usize),
}

/// The four-group graph: bipartition `(G ∪ L_G)` versus `(B ∪ L_B)`.
#[derive(Clone, Debug)]
pub struct SmpGraph {
    pub listed_girls: Vec<usize>,
    pub listed_boys: Vec<usize>,
    pub edges: Vec<(SmpNode, SmpNode)>,
    pub(crate) girl_count: usize,
    pub(crate) boy_count: usize,
}

impl SmpGraph {
    /// Node indices inside the bipartition used by the matcher: the left
    /// side is `G` then `L_G`, the right side is `B` then `L_B`.
    fn left_index(&self, node: SmpNode) -> usize {
        match node {
            SmpNode::Girl(g) => g,
            SmpNode::GirlList(g) => {
                self.girl_count
                    + self
                        .listed_girls
                        .iter()
                        .position(|&x| x == g)
                        .expect("listed girl")
            }
            _ => panic!("not a left node"),
        }
    }

    fn right_index(&self, node: SmpNode) -> usize {
        match node {
            SmpNode::Boy(b) => b,
            SmpNode::BoyList(b) => {
                self.boy_count
                    + self
                        .listed_boys
                        .iter()
                        .position(|&x| x == b)
                        .expect("listed boy")
            }
            _ => panic!("not a right node"),
        }
    }
}

/// Builds the four-group graph with nodes and edges in declaration order.
pub fn build_smp_graph(smp: &SmpInstance) -> SmpGraph {
    let listed_girls: Vec<usize> = smp.listed_girls().collect();
    let listed_boys: Vec<usize> = smp.listed_boys().collect();
    let mut edges = Vec::new();

    for g in 0..smp.girl_count() {
        for b in 0..smp.boy_count() {
            let rule_i = matches!(&smp.girl_lists[g], Some(list) if list.contains(&b))
                && smp.boy_lists[b].is_none();
            let rule_ii = matches!(&smp.boy_lists[b], Some(list) if list.contains(&g))
                && smp.girl_lists[g].is_none();
            if rule_i || rule_ii {
                edges.push((SmpNode::Girl(g), SmpNode::Boy(b)));
            }
            if smp.list_compatible(g, b) {
                edges.push((SmpNode::Girl(g), SmpNode::BoyList(b)));
                edges.push((SmpNode::GirlList(g), SmpNode::Boy(b)));
            }
        }
    }

    SmpGraph {
        listed_girls,
        listed_boys,
        edges,
        girl_count: smp.girl_count(),
        boy_count: smp.boy_count(),
    }
}

/// An injective partial pairing; `pairs[g]` is girl `g`'s boy, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmpPairing {
    pub pairs: Vec<Option<usize>>,
}

impl SmpPairing {
    pub fn verify(&self, smp: &SmpInstance) -> bool {
        let mut used = BTreeSet::new();
        for (g, &b) in self.pairs.iter().enumerate() {
            if let Some(b) = b {
                if !used.insert(b) || !smp.pair_allowed(g, b) {
                    return false;
                }
            }
        }
        smp.listed_girls().all(|g| self.pairs[g].is_some())
            && smp.listed_boys().all(|b| used.contains(&b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SmpOutcome {
    Sat(SmpPairing),
    Unsat,
}

impl SmpOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SmpOutcome::Sat(_))
    }
}

/// Statistics of the repair loop, exposed so tests can assert strict
/// progress.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RepairStats {
    pub mismatched_per_step: Vec<usize>,
}

pub fn solve_smp(smp: &SmpInstance) -> SmpOutcome {
    solve_smp_with_stats(smp).0
}

pub fn solve_smp_with_stats(smp: &SmpInstance) -> (SmpOutcome, RepairStats) {
    let graph = build_smp_graph(smp);
    let target = graph.listed_girls.len() + graph.listed_boys.len();

    let left_count = smp.girl_count() + graph.listed_girls.len();
    let right_count = smp.boy_count() + graph.listed_boys.len();
    let mut adjacency = vec![Vec::new(); left_count];
    for (l, r) in &graph.edges {
        adjacency[graph.left_index(*l)].push(graph.right_index(*r));
    }
    let bipartite = BipartiteGraph::new(left_count, right_count, adjacency);
    let matching = max_bipartite_matching(&bipartite);

    if matching.size() < target {
        return (SmpOutcome::Unsat, RepairStats::default());
    }

    let mut repair = Repairer::new(smp, &graph, matching);
    let mut stats = RepairStats::default();
    loop {
        let count = repair.mismatched_edges().len();
        stats.mismatched_per_step.push(count);
        if count == 0 {
            break;
        }
        repair.step();
        let after = repair.mismatched_edges().len();
        assert!(
            after < count,
            "repair step must strictly decrease mismatched edges ({count} -> {after})"
        );
        assert_eq!(repair.matching_size(), target, "repair preserves size");
    }

    let pairing = repair.extract_pairing();
    assert!(pairing.verify(smp), "extracted pairing must verify");
    (SmpOutcome::Sat(pairing), stats)
}

/// Mutable matching state for the mismatched-edge repair procedure.
struct Repairer<'a> {
    smp: &'a SmpInstance,
    graph: &'a SmpGraph,
    matching: Matching,
}

impl<'a> Repairer<'a> {
    fn new(smp: &'a SmpInstance, graph: &'a SmpGraph, matching: Matching) -> Self {
        Repairer {
            smp,
            graph,
            matching,
        }
    }

    fn matching_size(&self) -> usize {
        self.matching.size()
    }

    fn girl_match(&self, g: usize) -> Option<usize> {
        self.matching.left_to_right[g]
    }

    fn girl_list_match(&self, g: usize) -> Option<usize> {
        let idx = self.graph.left_index(SmpNode::GirlList(g));
        self.matching.left_to_right[idx]
    }

    fn boy_match(&self, b: usize) -> Option<usize> {
        self.matching.right_to_left[b]
    }

    fn boy_list_match(&self, b: usize) -> Option<usize> {
        let idx = self.graph.right_index(SmpNode::BoyList(b));
        self.matching.right_to_left[idx]
    }

    fn is_boy_list(&self, right: usize) -> Option<usize> {
        (right >= self.smp.boy_count())
            .then(|| self.graph.listed_boys[right - self.smp.boy_count()])
    }

    fn is_girl_list(&self, left: usize) -> Option<usize> {
        (left >= self.smp.girl_count())
            .then(|| self.graph.listed_girls[left - self.smp.girl_count()])
    }

    fn add(&mut self, left: usize, right: usize) {
        debug_assert!(self.matching.left_to_right[left].is_none());
        debug_assert!(self.matching.right_to_left[right].is_none());
        self.matching.left_to_right[left] = Some(right);
        self.matching.right_to_left[right] = Some(left);
    }

    fn remove_by_left(&mut self, left: usize) {
        if let Some(r) = self.matching.left_to_right[left].take() {
            self.matching.right_to_left[r] = None;
        }
    }

    fn remove_by_right(&mut self, right: usize) {
        if let Some(l) = self.matching.right_to_left[right].take() {
            self.matching.left_to_right[l] = None;
        }
    }

    /// Pairs `(g, b)` such that `(g, L_b) ∈ M` but `(L_g, b) ∉ M`, and
    /// pairs flagged the other way round.
    fn mismatched_edges(&self) -> Vec<(usize, usize, bool)> {
        let mut out = Vec::new();
        for g in 0..self.smp.girl_count() {
            if let Some(right) = self.girl_match(g) {
                if let Some(b) = self.is_boy_list(right) {
                    if self.girl_list_match(g) != Some(b) {
                        out.push((g, b, true));
                    }
                }
            }
        }
        for &g in &self.graph.listed_girls {
            if let Some(b) = self.girl_list_match(g) {
                let lb = self.graph.right_index(SmpNode::BoyList(b));
                if self.girl_match(g) != Some(lb) {
                    out.push((g, b, false));
                }
            }
        }
        out
    }

    /// Repairs at least one mismatched edge, preserving matching size.
    fn step(&mut self) {
        let (g, b, girl_flavor) = self.mismatched_edges()[0];
        if girl_flavor {
            self.girl_chain(g, b);
        } else {
            // (L_g, b) ∈ M without (g, L_b): either point g at L_b
            // directly, or hand off to the girl-flavored chain rooted at
            // the girl currently occupying L_b.
            let lb_right = self.graph.right_index(SmpNode::BoyList(b));
            match self.matching.right_to_left[lb_right] {
                None => {
                    self.remove_by_left(g);
                    self.add(g, lb_right);
                }
                Some(left) => {
                    let g2 = left;
                    debug_assert!(self.is_girl_list(left).is_none(), "L_b pairs with girls");
                    self.girl_chain(g2, b);
                }
            }
        }
    }

    /// The chain walk from a mismatch `(g1, L_{b1}) ∈ M, (L_{g1}, b1) ∉ M`.
    fn girl_chain(&mut self, g1: usize, b1: usize) {
        let mut chain: Vec<(usize, usize)> = vec![(g1, b1)];
        loop {
            let (g, b) = *chain.last().expect("chain is nonempty");
            let lg_left = self.graph.left_index(SmpNode::GirlList(g));
            match self.matching.left_to_right[lg_left] {
                None => {
                    // free L_g: re-cover b through it
                    self.remove_by_right(b);
                    self.add(lg_left, b);
                    return;
                }
                Some(right) => {
                    debug_assert!(self.is_boy_list(right).is_none(), "L_g pairs with boys");
                    let b_next = right;
                    if let Some(t) = chain.iter().position(|&(_, bs)| bs == b_next) {
                        // cycle: rotate (L_{g_s}, b_{s+1}) into (L_{g_s}, b_s)
                        for s in t..chain.len() {
                            let (gs, _) = chain[s];
                            self.remove_by_left(self.graph.left_index(SmpNode::GirlList(gs)));
                        }
                        for s in t..chain.len() {
                            let (gs, bs) = chain[s];
                            self.add(self.graph.left_index(SmpNode::GirlList(gs)), bs);
                        }
                        return;
                    }
                    match self.boy_list_match(b_next) {
                        None => {
                            // free L_{b_next}: slide g over to it
                            self.remove_by_left(g);
                            self.add(g, self.graph.right_index(SmpNode::BoyList(b_next)));
                            return;
                        }
                        Some(g_next) => {
                            debug_assert!(self.is_girl_list(g_next).is_none());
                            chain.push((g_next, b_next));
                        }
                    }
                }
            }
        }
    }

    fn extract_pairing(&self) -> SmpPairing {
        let mut pairs = vec![None; self.smp.girl_count()];
        for g in 0..self.smp.girl_count() {
            if let Some(right) = self.girl_match(g) {
                match self.is_boy_list(right) {
                    Some(b) => pairs[g] = Some(b),
                    None => pairs[g] = Some(right),
                }
            }
        }
        SmpPairing { pairs }
    }
}

/// The two pared classical problems of the corollary: the girls' side
/// `(G_L, B, {T*_g})` and the boys' side `(B_L, G, {T*_b})`. Lists keep
/// list-compatible entries plus unlisted members of the opposite side.
#[derive(Clone, Debug)]
pub struct TwoCmps {
    pub girls_side: CmpView,
    pub boys_side: CmpView,
}

pub fn smp_as_two_cmps(smp: &SmpInstance) -> TwoCmps {
    let pare_girl = |g: usize| -> Vec<ElementId> {
        smp.girl_lists[g]
            .as_ref()
            .expect("listed girl")
            .iter()
            .filter(|&&b| smp.boy_lists[b].is_none() || smp.list_compatible(g, b))
            .map(|&b| ElementId(b as u32))
            .collect()
    };
    let pare_boy = |b: usize| -> Vec<ElementId> {
        smp.boy_lists[b]
            .as_ref()
            .expect("listed boy")
            .iter()
            .filter(|&&g| smp.girl_lists[g].is_none() || smp.list_compatible(g, b))
            .map(|&g| ElementId(g as u32))
            .collect()
    };

    let girls_side = CmpView {
        girl_names: smp
            .listed_girls()
            .map(|g| smp.girl_names[g].clone())
            .collect(),
        element_names: smp.boy_names.clone(),
        acceptable: smp.listed_girls().map(pare_girl).collect(),
    };
    let boys_side = CmpView {
        girl_names: smp
            .listed_boys()
            .map(|b| smp.boy_names[b].clone())
            .collect(),
        element_names: smp.girl_names.clone(),
        acceptable: smp.listed_boys().map(pare_boy).collect(),
    };
    TwoCmps {
        girls_side,
        boys_side,
    }
}

/// Exhaustive reference solver: searches every injective partial pairing
/// that covers the listed girls, then covers the remaining listed boys.
pub fn smp_bruteforce(smp: &SmpInstance) -> bool {
    let listed_girls: Vec<usize> = smp.listed_girls().collect();
    let listed_boys: Vec<usize> = smp.listed_boys().collect();

    fn cover_boys(
        smp: &SmpInstance,
        boys: &[usize],
        used_girls: &mut Vec<bool>,
    ) -> bool {
        let Some((&b, rest)) = boys.split_first() else {
            return true;
        };
        for g in 0..smp.girl_count() {
            if !used_girls[g] && smp.pair_allowed(g, b) {
                used_girls[g] = true;
                if cover_boys(smp, rest, used_girls) {
                    return true;
                }
                used_girls[g] = false;
            }
        }
        false
    }

    fn cover_girls(
        smp: &SmpInstance,
        girls: &[usize],
        listed_boys: &[usize],
        used_girls: &mut Vec<bool>,
        used_boys: &mut Vec<bool>,
    ) -> bool {
        let Some((&g, rest)) = girls.split_first() else {
            let remaining: Vec<usize> = listed_boys
                .iter()
                .copied()
                .filter(|&b| !used_boys[b])
                .collect();
            return cover_boys(smp, &remaining, used_girls);
        };
        for b in 0..smp.boy_count() {
            if !used_boys[b] && smp.pair_allowed(g, b) {
                used_boys[b] = true;
                used_girls[g] = true;
                if cover_girls(smp, rest, listed_boys, used_girls, used_boys) {
                    return true;
                }
                used_boys[b] = false;
                used_girls[g] = false;
            }
        }
        false
    }

    let mut used_girls = vec![false; smp.girl_count()];
    let mut used_boys = vec![false; smp.boy_count()];
    cover_girls(
        smp,
        &listed_girls,
        &listed_boys,
        &mut used_girls,
        &mut used_boys,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_smp;

    fn smp(text: &str) -> SmpInstance {
        parse_smp(&format!("smp v1\n{text}")).unwrap()
    }

    #[test]
    fn graph_edges_of_worked_example() {
        let inst = smp("girl g1 : b1 b2\ngirl g2\nboy b1 : g1 g2\nboy b2\n");
        let graph = build_smp_graph(&inst);
        let mut edges = graph.edges.clone();
        edges.sort();
        let mut expected = vec![
            (SmpNode::Girl(0), SmpNode::Boy(1)),     // g1-b2: b2 unlisted
            (SmpNode::Girl(1), SmpNode::Boy(0)),     // b1-g2: g2 unlisted
            (SmpNode::Girl(0), SmpNode::BoyList(0)), // g1, b1 list-compatible
            (SmpNode::GirlList(0), SmpNode::Boy(0)),
        ];
        expected.sort();
        assert_eq!(edges, expected);
    }

    #[test]
    fn no_lists_gives_empty_graph() {
        let inst = smp("girl g1\ngirl g2\nboy b1\nboy b2\n");
        let graph = build_smp_graph(&inst);
        assert!(graph.edges.is_empty());
        assert!(solve_smp(&inst).is_sat(), "nothing to satisfy");
    }

    #[test]
    fn incompatible_listing_leaves_only_the_plain_edge() {
        let inst = smp("girl g1 : b1\ngirl g2\nboy b1 : g2\n");
        let graph = build_smp_graph(&inst);
        assert_eq!(graph.edges, vec![(SmpNode::Girl(1), SmpNode::Boy(0))]);
        // g1 is isolated, so the instance is unsolvable
        assert_eq!(solve_smp(&inst), SmpOutcome::Unsat);
    }

    #[test]
    fn worked_example_is_sat_with_valid_pairing() {
        let inst = smp("girl g1 : b1 b2\ngirl g2\nboy b1 : g1 g2\nboy b2\n");
        match solve_smp(&inst) {
            SmpOutcome::Sat(p) => assert!(p.verify(&inst)),
            SmpOutcome::Unsat => panic!("solvable instance"),
        }
        assert!(smp_bruteforce(&inst));
    }

    #[test]
    fn pared_lists_of_worked_example() {
        let inst = smp("girl g1 : b1 b2\ngirl g2\nboy b1 : g1 g2\nboy b2\n");
        let two = smp_as_two_cmps(&inst);
        assert_eq!(two.girls_side.acceptable, vec![vec![ElementId(0), ElementId(1)]]);
        assert_eq!(two.boys_side.acceptable, vec![vec![ElementId(0), ElementId(1)]]);
    }

    #[test]
    fn paring_drops_incompatible_listed_boy() {
        let inst = smp("girl g1 : b1\ngirl g2\nboy b1 : g2\n");
        let two = smp_as_two_cmps(&inst);
        assert_eq!(two.girls_side.acceptable, vec![vec![]]);
        assert_eq!(two.boys_side.acceptable, vec![vec![ElementId(1)]]);
    }

    #[test]
    fn boys_unlisted_reduces_to_girls_cmp() {
        let inst = smp("girl g1 : b1 b2\ngirl g2 : b1\nboy b1\nboy b2\n");
        let two = smp_as_two_cmps(&inst);
        assert_eq!(two.boys_side.acceptable.len(), 0);
        assert!(solve_smp(&inst).is_sat());
    }

    #[test]
    fn declared_empty_list_is_unsat() {
        let inst = smp("girl g1 :\nboy b1\n");
        assert_eq!(solve_smp(&inst), SmpOutcome::Unsat);
        assert!(!smp_bruteforce(&inst));
    }
}
