//! Rule detection and application.
//!
//! Every site returned by [`find_applicable_sites`] satisfies its rule's
//! full precondition at detection time; [`apply_rule`] revalidates before
//! rewriting and fails with [`RuleError::StaleSite`] when the instance
//! has moved on. Sites are ordered deterministically (lowest tradeoff-set
//! coordinate first, then element order).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::BigUint;
use thiserror::Error;

use crate::fmp::{ElementId, FmpInstance, Fragment, GirlId, Tradeoff, TradeoffSet};
use crate::rational::Rational;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
}

impl RuleId {
    pub const ALL: [RuleId; 7] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
    ];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A validated rewrite opportunity. Coordinates refer to the instance
/// the site was found in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RewriteSite {
    R1 {
        element: ElementId,
    },
    R2 {
        tradeoffs: Vec<(GirlId, usize)>,
        elements: Vec<ElementId>,
        representative: ElementId,
    },
    R3 {
        element: ElementId,
        n: u64,
        highs: Vec<(GirlId, usize)>,
        lows: Vec<(GirlId, usize)>,
    },
    R4 {
        set: GirlId,
        keep: ElementId,
        replace: ElementId,
    },
    R5 {
        elements: Vec<ElementId>,
        n: u64,
        pair_sets: Vec<GirlId>,
    },
    R6 {
        first: GirlId,
        second: GirlId,
        pairs: Vec<(ElementId, ElementId)>,
        degenerate: bool,
    },
    R7 {
        first: (GirlId, usize),
        second: (GirlId, usize),
        element: ElementId,
    },
}

impl RewriteSite {
    pub fn rule(&self) -> RuleId {
        match self {
            RewriteSite::R1 { .. } => RuleId::R1,
            RewriteSite::R2 { .. } => RuleId::R2,
            RewriteSite::R3 { .. } => RuleId::R3,
            RewriteSite::R4 { .. } => RuleId::R4,
            RewriteSite::R5 { .. } => RuleId::R5,
            RewriteSite::R6 { .. } => RuleId::R6,
            RewriteSite::R7 { .. } => RuleId::R7,
        }
    }

    /// Human-readable summary with names resolved against the instance
    /// the site applies to.
    pub fn describe(&self, inst: &FmpInstance) -> String {
        let elem = |e: &ElementId| inst.element_name(*e).to_string();
        let girl = |g: &GirlId| inst.girl_name(*g).to_string();
        match self {
            RewriteSite::R1 { element } => format!("drop free element {}", elem(element)),
            RewriteSite::R2 {
                tradeoffs,
                representative,
                ..
            } => format!(
                "collapse {} exclusive tradeoffs onto {}",
                tradeoffs.len(),
                elem(representative)
            ),
            RewriteSite::R3 {
                element,
                n,
                highs,
                lows,
            } => format!(
                "split element {} into {} integral highs and {} lows at 1/{}",
                elem(element),
                highs.len(),
                lows.len(),
                n
            ),
            RewriteSite::R4 { set, keep, replace } => format!(
                "remove pair set of girl {} and identify {} := {}",
                girl(set),
                elem(replace),
                elem(keep)
            ),
            RewriteSite::R5 { elements, n, .. } => format!(
                "merge all-pairs 1/{} group {{{}}}",
                n,
                elements.iter().map(elem).collect::<Vec<_>>().join(", ")
            ),
            RewriteSite::R6 {
                first,
                second,
                degenerate,
                ..
            } => format!(
                "fuse sets of girls {} and {}{}",
                girl(first),
                girl(second),
                if *degenerate { " (degenerate)" } else { "" }
            ),
            RewriteSite::R7 {
                first,
                second,
                element,
            } => format!(
                "undo bridge on {} between girls {} and {}",
                elem(element),
                girl(&first.0),
                girl(&second.0)
            ),
        }
    }
}

/// What a rewrite did, in terms of the surviving instance.
#[derive(Clone, Debug, Default)]
pub struct RewriteDelta {
    pub removed_elements: Vec<String>,
    pub removed_sets: Vec<String>,
    /// old element name -> surviving element name (R4/R5 identifications)
    pub merged_elements: Vec<(String, String)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("site no longer applicable: {0}")]
    StaleSite(String),
}

/// True when every tradeoff holds exactly one fragment.
pub fn aset_holds(inst: &FmpInstance) -> bool {
    inst.sets()
        .iter()
        .flat_map(|s| &s.tradeoffs)
        .all(|t| t.fragments.len() == 1)
}

/// Lexicographic progress metric: (fragments, non-integral fragments,
/// elements, sum of weight denominators). Every driver-applied rewrite
/// strictly decreases it.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Progress {
    pub fragments: usize,
    pub non_integral: usize,
    pub elements: usize,
    pub denominator_sum: BigUint,
}

pub fn progress_metric(inst: &FmpInstance) -> Progress {
    let mut fragments = 0;
    let mut non_integral = 0;
    let mut denominator_sum = BigUint::from(0u32);
    for set in inst.sets() {
        for t in &set.tradeoffs {
            for frag in &t.fragments {
                fragments += 1;
                if !frag.weight.is_one() {
                    non_integral += 1;
                }
                denominator_sum += frag.weight.denom().magnitude();
            }
        }
    }
    Progress {
        fragments,
        non_integral,
        elements: inst.element_count(),
        denominator_sum,
    }
}

// ---------------------------------------------------------------------
// instance surgery helpers

/// Rebuilds the instance without the given elements; panics if any is
/// still referenced.
fn drop_elements(inst: &FmpInstance, remove: &BTreeSet<ElementId>) -> FmpInstance {
    let mut remap = vec![None; inst.element_count()];
    let mut names = Vec::new();
    for e in inst.elements() {
        if !remove.contains(&e) {
            remap[e.index()] = Some(ElementId(names.len() as u32));
            names.push(inst.element_name(e).to_string());
        }
    }
    let sets = inst
        .sets()
        .iter()
        .map(|set| TradeoffSet {
            girl: set.girl,
            tradeoffs: set
                .tradeoffs
                .iter()
                .map(|t| Tradeoff {
                    fragments: t
                        .fragments
                        .iter()
                        .map(|f| Fragment {
                            element: remap[f.element.index()]
                                .expect("removed element still referenced"),
                            weight: f.weight.clone(),
                        })
                        .collect(),
                    canonical: t.canonical,
                })
                .collect(),
        })
        .collect();
    FmpInstance::new(inst.girl_names().to_vec(), names, sets).expect("remap is valid")
}

/// Rebuilds the instance without the given girls.
fn drop_girls(inst: &FmpInstance, remove: &BTreeSet<GirlId>) -> FmpInstance {
    let mut names = Vec::new();
    let mut sets = Vec::new();
    for set in inst.sets() {
        if remove.contains(&set.girl) {
            continue;
        }
        names.push(inst.girl_name(set.girl).to_string());
        sets.push(TradeoffSet {
            girl: GirlId(sets.len() as u32),
            tradeoffs: set.tradeoffs.clone(),
        });
    }
    FmpInstance::new(names, inst.element_names().to_vec(), sets).expect("drop is valid")
}

/// Fragment coordinates of every occurrence of an element.
fn occurrences(inst: &FmpInstance, element: ElementId) -> Vec<(GirlId, usize, Rational)> {
    let mut out = Vec::new();
    for set in inst.sets() {
        for (ti, t) in set.tradeoffs.iter().enumerate() {
            if let Some(w) = t.weight_of(element) {
                out.push((set.girl, ti, w.clone()));
            }
        }
    }
    out
}

fn refresh_flag(t: &mut Tradeoff) {
    t.canonical = t.weight_sum().is_one();
}

/// Drops empty tradeoffs and removes sets made vacuous by them: a girl
/// owning an empty tradeoff is satisfiable for free, so her set
/// constrains nothing.
fn sweep_vacuous(inst: &mut FmpInstance) -> Vec<String> {
    let vacuous: BTreeSet<GirlId> = inst
        .sets
        .iter()
        .filter(|s| s.tradeoffs.iter().any(|t| t.fragments.is_empty()))
        .map(|s| s.girl)
        .collect();
    if vacuous.is_empty() {
        return Vec::new();
    }
    let names = vacuous
        .iter()
        .map(|g| inst.girl_name(*g).to_string())
        .collect();
    *inst = drop_girls(inst, &vacuous);
    names
}

// ---------------------------------------------------------------------
// detection

pub fn find_applicable_sites(inst: &FmpInstance, rule: RuleId) -> Vec<RewriteSite> {
    match rule {
        RuleId::R1 => find_r1(inst),
        RuleId::R2 => find_r2(inst),
        RuleId::R3 => find_r3(inst),
        RuleId::R4 => find_r4(inst),
        RuleId::R5 => find_r5(inst),
        RuleId::R6 => find_r6(inst),
        RuleId::R7 => find_r7(inst),
    }
}

fn find_r1(inst: &FmpInstance) -> Vec<RewriteSite> {
    crate::fmp::free_elements(inst)
        .into_iter()
        .map(|element| RewriteSite::R1 { element })
        .collect()
}

fn find_r2(inst: &FmpInstance) -> Vec<RewriteSite> {
    // closure classes: union-find over tradeoffs linked by shared elements
    let mut coords: Vec<(GirlId, usize)> = Vec::new();
    let mut index_of: BTreeMap<(GirlId, usize), usize> = BTreeMap::new();
    for set in inst.sets() {
        for (ti, _) in set.tradeoffs.iter().enumerate() {
            index_of.insert((set.girl, ti), coords.len());
            coords.push((set.girl, ti));
        }
    }
    let mut parent: Vec<usize> = (0..coords.len()).collect();
    fn root(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut by_element: BTreeMap<ElementId, Vec<usize>> = BTreeMap::new();
    for (i, &(g, ti)) in coords.iter().enumerate() {
        for frag in &inst.set(g).tradeoffs[ti].fragments {
            by_element.entry(frag.element).or_default().push(i);
        }
    }
    for members in by_element.values() {
        for w in members.windows(2) {
            let (a, b) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }

    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..coords.len() {
        let r = root(&mut parent, i);
        classes.entry(r).or_default().push(i);
    }

    let mut sites = Vec::new();
    'class: for members in classes.values() {
        if members.len() < 2 {
            continue;
        }
        let tradeoffs: Vec<(GirlId, usize)> = members.iter().map(|&i| coords[i]).collect();
        let mut elements: BTreeSet<ElementId> = BTreeSet::new();
        for &(g, ti) in &tradeoffs {
            for frag in &inst.set(g).tradeoffs[ti].fragments {
                elements.insert(frag.element);
            }
        }
        // pairwise mutual exclusion through some shared element
        let one = Rational::one();
        for (i, &(g1, t1)) in tradeoffs.iter().enumerate() {
            let a = &inst.set(g1).tradeoffs[t1];
            for &(g2, t2) in &tradeoffs[i + 1..] {
                let b = &inst.set(g2).tradeoffs[t2];
                let conflict = a.fragments.iter().any(|f| {
                    b.weight_of(f.element)
                        .map(|w| &(&f.weight + w) > &one)
                        .unwrap_or(false)
                });
                if !conflict {
                    continue 'class;
                }
            }
        }
        let representative = *elements.iter().next().expect("class has elements");
        // skip the identity rewrite
        let changes = tradeoffs.iter().any(|&(g, ti)| {
            let t = &inst.set(g).tradeoffs[ti];
            !(t.fragments.len() == 1
                && t.fragments[0].element == representative
                && t.fragments[0].weight.is_one())
        });
        if changes {
            sites.push(RewriteSite::R2 {
                tradeoffs,
                elements: elements.into_iter().collect(),
                representative,
            });
        }
    }
    sites
}

fn find_r3(inst: &FmpInstance) -> Vec<RewriteSite> {
    let mut sites = Vec::new();
    let half = Rational::ratio(1, 2);
    for element in inst.elements() {
        let occ = occurrences(inst, element);
        let highs: Vec<(GirlId, usize)> = occ
            .iter()
            .filter(|(_, _, w)| w > &half)
            .map(|&(g, t, _)| (g, t))
            .collect();
        let lows: Vec<(GirlId, usize, Rational)> = occ
            .iter()
            .filter(|(_, _, w)| w <= &half)
            .cloned()
            .collect();
        let (k, l) = (highs.len(), lows.len());
        if k < 1 || l < 2 {
            continue;
        }
        let n = l as u64;
        let cap = Rational::unit_fraction(n);
        if lows.iter().any(|(_, _, w)| w > &cap) {
            continue;
        }
        // every high + low pair must overfill the element
        let min_high = occ
            .iter()
            .filter(|(_, _, w)| w > &half)
            .map(|(_, _, w)| w.clone())
            .min()
            .expect("k >= 1");
        let min_low = lows
            .iter()
            .map(|(_, _, w)| w.clone())
            .min()
            .expect("l >= 2");
        if &min_high + &min_low <= Rational::one() {
            continue;
        }
        // skip when everything already has its target weight
        let highs_done = occ
            .iter()
            .filter(|(_, _, w)| w > &half)
            .all(|(_, _, w)| w.is_one());
        let lows_done = lows.iter().all(|(_, _, w)| *w == cap);
        if highs_done && lows_done {
            continue;
        }
        sites.push(RewriteSite::R3 {
            element,
            n,
            highs,
            lows: lows.into_iter().map(|(g, t, _)| (g, t)).collect(),
        });
    }
    sites
}

fn find_r4(inst: &FmpInstance) -> Vec<RewriteSite> {
    let integral_only: Vec<bool> = {
        let mut flags = vec![true; inst.element_count()];
        for set in inst.sets() {
            for t in &set.tradeoffs {
                for frag in &t.fragments {
                    if !t.is_integral() {
                        flags[frag.element.index()] = false;
                    }
                }
            }
        }
        flags
    };
    let mut sites = Vec::new();
    for set in inst.sets() {
        if set.tradeoffs.len() != 2 {
            continue;
        }
        let (a, b) = (&set.tradeoffs[0], &set.tradeoffs[1]);
        if !a.is_integral() || !b.is_integral() {
            continue;
        }
        let (keep, replace) = (a.fragments[0].element, b.fragments[0].element);
        if keep == replace {
            continue;
        }
        if integral_only[keep.index()] && integral_only[replace.index()] {
            sites.push(RewriteSite::R4 {
                set: set.girl,
                keep,
                replace,
            });
        }
    }
    sites
}

fn find_r5(inst: &FmpInstance) -> Vec<RewriteSite> {
    // candidate pair-sets {{1/N e_i},{1/N e_j}} grouped by N
    #[derive(Default)]
    struct PairPool {
        edges: BTreeMap<(ElementId, ElementId), Vec<GirlId>>,
        neighbors: BTreeMap<ElementId, BTreeSet<ElementId>>,
    }
    let mut pools: BTreeMap<u64, PairPool> = BTreeMap::new();
    for set in inst.sets() {
        if set.tradeoffs.len() != 2 {
            continue;
        }
        let single = |t: &Tradeoff| -> Option<(ElementId, Rational)> {
            (t.fragments.len() == 1)
                .then(|| (t.fragments[0].element, t.fragments[0].weight.clone()))
        };
        let (Some((e1, w1)), Some((e2, w2))) =
            (single(&set.tradeoffs[0]), single(&set.tradeoffs[1]))
        else {
            continue;
        };
        if e1 == e2 || w1 != w2 {
            continue;
        }
        // weight must be a unit fraction 1/N with N >= 2
        use num::ToPrimitive;
        if w1.numer().to_u64() != Some(1) {
            continue;
        }
        let Some(n) = w1.denom().to_u64() else {
            continue;
        };
        if n < 2 {
            continue;
        }
        let pool = pools.entry(n).or_default();
        let key = (e1.min(e2), e1.max(e2));
        pool.edges.entry(key).or_default().push(set.girl);
        pool.neighbors.entry(e1).or_default().insert(e2);
        pool.neighbors.entry(e2).or_default().insert(e1);
    }

    let mut sites = Vec::new();
    for (&n, pool) in &pools {
        let mut seen: BTreeSet<ElementId> = BTreeSet::new();
        'component: for (&start, _) in &pool.neighbors {
            if seen.contains(&start) {
                continue;
            }
            let mut component = BTreeSet::new();
            let mut stack = vec![start];
            while let Some(e) = stack.pop() {
                if !component.insert(e) {
                    continue;
                }
                for &f in &pool.neighbors[&e] {
                    if !component.contains(&f) {
                        stack.push(f);
                    }
                }
            }
            seen.extend(component.iter().copied());
            let elements: Vec<ElementId> = component.iter().copied().collect();
            let k = elements.len() as u64;
            // equisatisfiability requires enough slack in the group
            if k < 2 || k > 2 * n {
                continue;
            }
            let mut pair_sets = Vec::new();
            for (i, &a) in elements.iter().enumerate() {
                for &b in &elements[i + 1..] {
                    match pool.edges.get(&(a, b)).map(|v| v.as_slice()) {
                        Some([girl]) => pair_sets.push(*girl),
                        _ => continue 'component, // missing or duplicated pair
                    }
                }
            }
            // no other non-integral appearance of any group element
            let pair_set_ids: BTreeSet<GirlId> = pair_sets.iter().copied().collect();
            for &e in &elements {
                for (g, ti, w) in occurrences(inst, e) {
                    if pair_set_ids.contains(&g) {
                        continue;
                    }
                    let t = &inst.set(g).tradeoffs[ti];
                    if !(t.is_integral() && w.is_one()) {
                        continue 'component;
                    }
                }
            }
            pair_sets.sort();
            sites.push(RewriteSite::R5 {
                elements,
                n,
                pair_sets,
            });
        }
    }
    sites.sort_by_key(|s| match s {
        RewriteSite::R5 { pair_sets, .. } => pair_sets.first().copied(),
        _ => None,
    });
    sites
}

fn find_r6(inst: &FmpInstance) -> Vec<RewriteSite> {
    // candidate sets: N single-fragment tradeoffs plus exactly one
    // multi-fragment tradeoff
    struct Shape {
        girl: GirlId,
        singles: Vec<(ElementId, Rational)>,
        multi: usize,
    }
    let mut shapes = Vec::new();
    for set in inst.sets() {
        let singles: Vec<(ElementId, Rational)> = set
            .tradeoffs
            .iter()
            .filter(|t| t.fragments.len() == 1)
            .map(|t| (t.fragments[0].element, t.fragments[0].weight.clone()))
            .collect();
        let multis: Vec<usize> = set
            .tradeoffs
            .iter()
            .enumerate()
            .filter(|(_, t)| t.fragments.len() > 1)
            .map(|(i, _)| i)
            .collect();
        if singles.is_empty() || multis.len() != 1 || singles.len() + 1 != set.tradeoffs.len() {
            continue;
        }
        shapes.push(Shape {
            girl: set.girl,
            singles,
            multi: multis[0],
        });
    }

    let one = Rational::one();
    let mut sites = Vec::new();
    for (i, s1) in shapes.iter().enumerate() {
        's2: for s2 in &shapes[i + 1..] {
            if s1.singles.len() != s2.singles.len() {
                continue;
            }
            let t1 = &inst.set(s1.girl).tradeoffs[s1.multi];
            let t2 = &inst.set(s2.girl).tradeoffs[s2.multi];
            let mut pairs = Vec::new();
            let all_single_elems: BTreeSet<ElementId> = s1
                .singles
                .iter()
                .chain(&s2.singles)
                .map(|(e, _)| *e)
                .collect();
            if all_single_elems.len() != 2 * s1.singles.len() {
                continue; // elements must be pairwise distinct
            }
            if t1
                .fragments
                .iter()
                .chain(&t2.fragments)
                .any(|f| all_single_elems.contains(&f.element))
            {
                continue; // keep the paired elements out of t and t'
            }
            for ((e, p), (e2, p2)) in s1.singles.iter().zip(&s2.singles) {
                // every co-appearance outside the two sets must hold both
                // elements with overfilling weights
                for set in inst.sets() {
                    if set.girl == s1.girl || set.girl == s2.girl {
                        continue;
                    }
                    for t in &set.tradeoffs {
                        let (qa, qb) = (t.weight_of(*e), t.weight_of(*e2));
                        match (qa, qb) {
                            (None, None) => {}
                            (Some(q), Some(q2)) => {
                                if &(p + q) <= &one || &(p2 + q2) <= &one {
                                    continue 's2;
                                }
                            }
                            _ => continue 's2, // they must appear together
                        }
                    }
                }
                pairs.push((*e, *e2));
            }
            // merged tradeoff feasibility decides the branch
            let mut merged: BTreeMap<ElementId, Rational> = BTreeMap::new();
            for frag in t1.fragments.iter().chain(&t2.fragments) {
                let entry = merged
                    .entry(frag.element)
                    .or_insert_with(Rational::zero);
                *entry += &frag.weight;
            }
            let degenerate = merged.values().any(|w| w > &one);
            if degenerate && pairs.len() > 1 {
                // the degenerate collapse is only sound for a single pair
                continue;
            }
            sites.push(RewriteSite::R6 {
                first: s1.girl,
                second: s2.girl,
                pairs,
                degenerate,
            });
        }
    }
    sites
}

fn find_r7(inst: &FmpInstance) -> Vec<RewriteSite> {
    // occurrence counts for the "nowhere else" condition
    let mut counts = vec![0usize; inst.element_count()];
    for set in inst.sets() {
        for t in &set.tradeoffs {
            for frag in &t.fragments {
                counts[frag.element.index()] += 1;
            }
        }
    }
    let one = Rational::one();
    let mut sites = Vec::new();
    for (si, s1) in inst.sets().iter().enumerate() {
        if s1.tradeoffs.len() < 2 {
            continue;
        }
        for s2 in &inst.sets()[si + 1..] {
            if s2.tradeoffs.len() < 2 {
                continue;
            }
            for (i1, t1) in s1.tradeoffs.iter().enumerate() {
                't2: for (i2, t2) in s2.tradeoffs.iter().enumerate() {
                    // shared element with overfilling weights
                    let mut shared = None;
                    for f in &t1.fragments {
                        if let Some(w2) = t2.weight_of(f.element) {
                            if shared.is_some() {
                                continue 't2; // at most one shared element
                            }
                            if &(&f.weight + w2) > &one {
                                shared = Some(f.element);
                            } else {
                                continue 't2;
                            }
                        }
                    }
                    let Some(element) = shared else {
                        continue;
                    };
                    // confinement: the shared element occurs exactly in
                    // these two tradeoffs, every other element just once
                    for f in t1.fragments.iter().chain(&t2.fragments) {
                        let expected = if f.element == element { 2 } else { 1 };
                        if counts[f.element.index()] != expected {
                            continue 't2;
                        }
                    }
                    sites.push(RewriteSite::R7 {
                        first: (s1.girl, i1),
                        second: (s2.girl, i2),
                        element,
                    });
                }
            }
        }
    }
    sites
}

// ---------------------------------------------------------------------
// application

pub fn apply_rule(
    inst: &FmpInstance,
    site: &RewriteSite,
) -> Result<(FmpInstance, RewriteDelta), RuleError> {
    let current = find_applicable_sites(inst, site.rule());
    if !current.contains(site) {
        return Err(RuleError::StaleSite(site.describe(inst)));
    }
    Ok(apply_validated(inst, site))
}

fn apply_validated(inst: &FmpInstance, site: &RewriteSite) -> (FmpInstance, RewriteDelta) {
    let mut out = inst.clone();
    let mut delta = RewriteDelta::default();
    match site {
        RewriteSite::R1 { element } => {
            for set in &mut out.sets {
                for t in &mut set.tradeoffs {
                    t.fragments.retain(|f| f.element != *element);
                    refresh_flag(t);
                }
            }
            delta.removed_sets = sweep_vacuous(&mut out);
            delta
                .removed_elements
                .push(inst.element_name(*element).to_string());
            out = drop_elements(&out, &BTreeSet::from([*element]));
        }
        RewriteSite::R2 {
            tradeoffs,
            elements,
            representative,
        } => {
            for &(g, ti) in tradeoffs {
                out.sets[g.index()].tradeoffs[ti] = Tradeoff::integral(*representative);
            }
            let gone: BTreeSet<ElementId> = elements
                .iter()
                .copied()
                .filter(|e| e != representative)
                .collect();
            for e in &gone {
                delta
                    .removed_elements
                    .push(inst.element_name(*e).to_string());
            }
            out = drop_elements(&out, &gone);
        }
        RewriteSite::R3 {
            element,
            n,
            highs,
            lows,
        } => {
            let slice = Rational::unit_fraction(*n);
            for &(g, ti) in highs {
                let t = &mut out.sets[g.index()].tradeoffs[ti];
                for f in &mut t.fragments {
                    if f.element == *element {
                        f.weight = Rational::one();
                    }
                }
                refresh_flag(t);
            }
            for &(g, ti) in lows {
                let t = &mut out.sets[g.index()].tradeoffs[ti];
                for f in &mut t.fragments {
                    if f.element == *element {
                        f.weight = slice.clone();
                    }
                }
                refresh_flag(t);
            }
        }
        RewriteSite::R4 { set, keep, replace } => {
            delta.merged_elements.push((
                inst.element_name(*replace).to_string(),
                inst.element_name(*keep).to_string(),
            ));
            out = drop_girls(&out, &BTreeSet::from([*set]));
            delta.removed_sets.push(inst.girl_name(*set).to_string());
            for s in &mut out.sets {
                for t in &mut s.tradeoffs {
                    for f in &mut t.fragments {
                        if f.element == *replace {
                            f.element = *keep;
                        }
                    }
                }
            }
            delta
                .removed_elements
                .push(inst.element_name(*replace).to_string());
            out = drop_elements(&out, &BTreeSet::from([*replace]));
        }
        RewriteSite::R5 {
            elements,
            pair_sets,
            ..
        } => {
            let representative = elements[0];
            out = drop_girls(&out, &pair_sets.iter().copied().collect());
            for g in pair_sets {
                delta.removed_sets.push(inst.girl_name(*g).to_string());
            }
            let gone: BTreeSet<ElementId> = elements[1..].iter().copied().collect();
            for s in &mut out.sets {
                for t in &mut s.tradeoffs {
                    for f in &mut t.fragments {
                        if gone.contains(&f.element) {
                            f.element = representative;
                        }
                    }
                }
            }
            for e in &gone {
                delta.merged_elements.push((
                    inst.element_name(*e).to_string(),
                    inst.element_name(representative).to_string(),
                ));
                delta
                    .removed_elements
                    .push(inst.element_name(*e).to_string());
            }
            out = drop_elements(&out, &gone);
        }
        RewriteSite::R6 {
            first,
            second,
            pairs,
            degenerate,
        } => {
            let s1 = inst.set(*first);
            let s2 = inst.set(*second);
            let multi = |s: &TradeoffSet| {
                s.tradeoffs
                    .iter()
                    .position(|t| t.fragments.len() > 1)
                    .expect("shape validated")
            };
            let (m1, m2) = (multi(s1), multi(s2));
            let mut merged_tradeoffs: Vec<Tradeoff> = s1
                .tradeoffs
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != m1)
                .map(|(_, t)| t.clone())
                .collect();
            if *degenerate {
                // t U t' is unsatisfiable: the fused set keeps only the
                // singles and every co-appearance tradeoff disappears
                let pair_elems: BTreeSet<ElementId> =
                    pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
                for s in &mut out.sets {
                    if s.girl == *first || s.girl == *second {
                        continue;
                    }
                    s.tradeoffs
                        .retain(|t| !t.fragments.iter().any(|f| pair_elems.contains(&f.element)));
                }
            } else {
                let t1 = &s1.tradeoffs[m1];
                let t2 = &s2.tradeoffs[m2];
                let mut weights: BTreeMap<ElementId, Rational> = BTreeMap::new();
                let mut order: Vec<ElementId> = Vec::new();
                for f in t1.fragments.iter().chain(&t2.fragments) {
                    if !weights.contains_key(&f.element) {
                        order.push(f.element);
                    }
                    let w = weights.entry(f.element).or_insert_with(Rational::zero);
                    *w += &f.weight;
                }
                let mut union = Tradeoff::working(
                    order
                        .into_iter()
                        .map(|e| Fragment::new(e, weights[&e].clone()))
                        .collect(),
                );
                refresh_flag(&mut union);
                merged_tradeoffs.push(union);
            }
            out.sets[first.index()].tradeoffs = merged_tradeoffs;
            out = drop_girls(&out, &BTreeSet::from([*second]));
            delta.removed_sets.push(inst.girl_name(*second).to_string());
            // primed singles vanish; so may their elements
            let mut unused = BTreeSet::new();
            for e in inst.elements() {
                let name = inst.element_name(e).to_string();
                if let Some(id) = out.element_id(&name) {
                    if occurrences(&out, id).is_empty() {
                        unused.insert(id);
                        delta.removed_elements.push(name);
                    }
                }
            }
            out = drop_elements(&out, &unused);
        }
        RewriteSite::R7 { first, second, .. } => {
            let mut merged: Vec<Tradeoff> = inst
                .set(first.0)
                .tradeoffs
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != first.1)
                .map(|(_, t)| t.clone())
                .collect();
            merged.extend(
                inst.set(second.0)
                    .tradeoffs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != second.1)
                    .map(|(_, t)| t.clone()),
            );
            let dropped: BTreeSet<ElementId> = inst.set(first.0).tradeoffs[first.1]
                .fragments
                .iter()
                .chain(&inst.set(second.0).tradeoffs[second.1].fragments)
                .map(|f| f.element)
                .collect();
            out.sets[first.0.index()].tradeoffs = merged;
            out = drop_girls(&out, &BTreeSet::from([second.0]));
            delta
                .removed_sets
                .push(inst.girl_name(second.0).to_string());
            for e in &dropped {
                delta
                    .removed_elements
                    .push(inst.element_name(*e).to_string());
            }
            let dropped_now: BTreeSet<ElementId> = dropped
                .iter()
                .filter_map(|e| out.element_id(inst.element_name(*e)))
                .collect();
            out = drop_elements(&out, &dropped_now);
        }
    }
    (out, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{emit_fmp, parse_fmp};
    use crate::oracle::{solve_fmp_bruteforce, OracleBudget};

    fn fmp(body: &str) -> FmpInstance {
        parse_fmp(&format!("fmp v1\n{body}\n")).unwrap()
    }

    fn equisat_after(inst: &FmpInstance, site: &RewriteSite) -> FmpInstance {
        let budget = OracleBudget::default();
        let before = solve_fmp_bruteforce(inst, &budget).expect_decided("before");
        let (after, _) = apply_rule(inst, site).expect("site applies");
        let after_sat = solve_fmp_bruteforce(&after, &budget).expect_decided("after");
        assert_eq!(before, after_sat, "rule application must be equisatisfiable");
        after
    }

    #[test]
    fn r1_drops_free_element_and_leaves_working_tradeoffs() {
        let inst = fmp("girl g1: { 1/3 a, 2/3 x }\ngirl g2: { 1/2 x, 1/2 y }");
        // a and y are free; x totals 2/3 + 1/2 > 1
        let sites = find_applicable_sites(&inst, RuleId::R1);
        assert_eq!(sites.len(), 2);
        let after = equisat_after(&inst, &sites[0]);
        assert_eq!(after.element_id("a"), None);
        let t = &after.set(GirlId(0)).tradeoffs[0];
        assert_eq!(t.fragments.len(), 1);
        assert!(!t.canonical);
    }

    #[test]
    fn r1_vacuous_set_is_removed() {
        let inst = fmp("girl g1: { 1 a }\ngirl g2: { 1 x } ; { 1 y }\ngirl g3: { 1 x } ; { 1 y }");
        // a appears once: free; dropping it satisfies g1 for free
        let site = RewriteSite::R1 {
            element: inst.element_id("a").unwrap(),
        };
        let after = equisat_after(&inst, &site);
        assert_eq!(after.girl_count(), 2);
        assert_eq!(after.girl_id("g1"), None);
    }

    #[test]
    fn r2_collapses_exclusive_family() {
        // the worked shape: {1/2 e} in one set, {1 e} in another
        let inst = fmp(concat!(
            "girl g1: { 1/2 e } ; { 1 other }\n",
            "girl g2: { 1 e } ; { 1 other2 }\n",
            "girl g3: { 1 other } ; { 1 other2 }"
        ));
        // make the tradeoffs working so the 1/2 sum is legal input
        let mut inst = inst;
        for set in &mut inst.sets {
            for t in &mut set.tradeoffs {
                t.canonical = t.weight_sum().is_one();
            }
        }
        let sites = find_applicable_sites(&inst, RuleId::R2);
        let site = sites
            .iter()
            .find(|s| matches!(s, RewriteSite::R2 { tradeoffs, .. } if tradeoffs.len() == 2))
            .expect("the e-family is a site");
        let after = equisat_after(&inst, site);
        let e = after.element_id("e").unwrap();
        assert!(after.set(GirlId(0)).tradeoffs[0].is_integral());
        assert_eq!(after.set(GirlId(0)).tradeoffs[0].fragments[0].element, e);
    }

    #[test]
    fn r3_rounds_highs_and_lows() {
        let inst = fmp(concat!(
            "girl g1: { 2/3 e, 1/3 pad1 }\n",
            "girl g2: { 1/2 e, 1/2 pad2 }\n",
            "girl g3: { 1/2 e, 1/2 pad3 }"
        ));
        let sites = find_applicable_sites(&inst, RuleId::R3);
        let site = sites
            .iter()
            .find(
                |s| matches!(s, RewriteSite::R3 { element, .. } if inst.element_name(*element) == "e"),
            )
            .expect("e has one high and two lows");
        match site {
            RewriteSite::R3 { n, highs, lows, .. } => {
                assert_eq!(*n, 2);
                assert_eq!(highs.len(), 1);
                assert_eq!(lows.len(), 2);
            }
            _ => unreachable!(),
        }
        let after = equisat_after(&inst, site);
        let e = after.element_id("e").unwrap();
        let w0 = after.set(GirlId(0)).tradeoffs[0].weight_of(e).unwrap();
        assert!(w0.is_one());
    }

    #[test]
    fn r3_rejects_when_low_exceeds_unit_fraction() {
        // three lows of 1/2 each: 1/2 > 1/3 so no site
        let inst = fmp(concat!(
            "girl g1: { 2/3 e, 1/3 p1 }\n",
            "girl g2: { 1/2 e, 1/2 p2 }\n",
            "girl g3: { 1/2 e, 1/2 p3 }\n",
            "girl g4: { 1/2 e, 1/2 p4 }"
        ));
        assert!(find_applicable_sites(&inst, RuleId::R3)
            .iter()
            .all(|s| !matches!(s, RewriteSite::R3 { element, .. }
                if inst.element_name(*element) == "e")));
    }

    #[test]
    fn r4_substitutes_and_removes() {
        let inst = fmp(concat!(
            "girl g1: { 1 e1 } ; { 1 e2 }\n",
            "girl g2: { 1 e1 } ; { 1 x }\n",
            "girl g3: { 1 e2 } ; { 1 x }"
        ));
        let sites = find_applicable_sites(&inst, RuleId::R4);
        assert_eq!(sites.len(), 1);
        let after = equisat_after(&inst, &sites[0]);
        assert_eq!(after.girl_count(), 2);
        assert_eq!(after.element_id("e2"), None);
        assert_eq!(
            emit_fmp(&after),
            "fmp v1\ngirl g2: { 1 e1 } ; { 1 x }\ngirl g3: { 1 e1 } ; { 1 x }\n"
        );
    }

    #[test]
    fn r4_requires_distinct_elements_and_integral_context() {
        let same = fmp("girl g1: { 1 e } ; { 1 e }");
        assert!(find_applicable_sites(&same, RuleId::R4).is_empty());
        let fractional_elsewhere = fmp(concat!(
            "girl g1: { 1 e1 } ; { 1 e2 }\n",
            "girl g2: { 1/2 e1, 1/2 x }"
        ));
        assert!(find_applicable_sites(&fractional_elsewhere, RuleId::R4).is_empty());
    }

    #[test]
    fn r5_merges_all_pairs_group() {
        let mut body = String::new();
        // K3 on {a, b, c} with slices 1/2 and integral uses elsewhere
        body.push_str("girl p1: { 1/2 a } ; { 1/2 b }\n");
        body.push_str("girl p2: { 1/2 a } ; { 1/2 c }\n");
        body.push_str("girl p3: { 1/2 b } ; { 1/2 c }\n");
        body.push_str("girl u1: { 1 a } ; { 1 x }\n");
        body.push_str("girl u2: { 1 b } ; { 1 x }\n");
        let mut inst = fmp(&body);
        for set in &mut inst.sets {
            for t in &mut set.tradeoffs {
                t.canonical = t.weight_sum().is_one();
            }
        }
        let sites = find_applicable_sites(&inst, RuleId::R5);
        assert_eq!(sites.len(), 1);
        match &sites[0] {
            RewriteSite::R5 { elements, n, pair_sets } => {
                assert_eq!(elements.len(), 3);
                assert_eq!(*n, 2);
                assert_eq!(pair_sets.len(), 3);
            }
            _ => unreachable!(),
        }
        let after = equisat_after(&inst, &sites[0]);
        assert_eq!(after.girl_count(), 2);
        // both integral uses now reference the representative
        assert_eq!(after.element_id("b"), None);
        assert_eq!(after.element_id("c"), None);
    }

    #[test]
    fn r5_respects_the_group_slack_bound() {
        // K5 with slices 1/2 would not be equisatisfiable; no site
        let names = ["a", "b", "c", "d", "e"];
        let mut body = String::new();
        let mut girl = 0;
        for (i, x) in names.iter().enumerate() {
            for y in &names[i + 1..] {
                body.push_str(&format!("girl p{girl}: {{ 1/2 {x} }} ; {{ 1/2 {y} }}\n"));
                girl += 1;
            }
        }
        let mut inst = fmp(&body);
        for set in &mut inst.sets {
            for t in &mut set.tradeoffs {
                t.canonical = false;
            }
        }
        assert!(find_applicable_sites(&inst, RuleId::R5).is_empty());
    }

    #[test]
    fn r7_fuses_bridge_sets() {
        let inst = fmp(concat!(
            "girl g1: { 1 t1 } ; { 2/3 e }\n",
            "girl g2: { 1 t2 } ; { 1/2 e }\n",
            "girl g3: { 1 t1 } ; { 1 t2 }"
        ));
        let mut inst = inst;
        for set in &mut inst.sets {
            for t in &mut set.tradeoffs {
                t.canonical = t.weight_sum().is_one();
            }
        }
        let sites = find_applicable_sites(&inst, RuleId::R7);
        assert_eq!(sites.len(), 1);
        let after = equisat_after(&inst, &sites[0]);
        assert_eq!(after.girl_count(), 2);
        assert_eq!(after.element_id("e"), None);
        let merged = after.set(GirlId(0));
        assert_eq!(merged.tradeoffs.len(), 2);
    }

    #[test]
    fn r6_fuses_exclusive_singletons() {
        // S1 = {{3/4 e}, t}, S2 = {{3/4 e'}, t'}; e and e' co-appear once
        let inst = fmp(concat!(
            "girl g1: { 3/4 e, 1/4 pad } ; { 1/2 t1a, 1/2 t1b }\n",
            "girl g2: { 3/4 f, 1/4 pad2 } ; { 1/2 t2a, 1/2 t2b }\n",
            "girl g3: { 1/2 e, 1/2 f }"
        ));
        // rewrite the singleton tradeoffs into true singles
        let mut inst = inst;
        inst.sets[0].tradeoffs[0] = Tradeoff::working(vec![Fragment::new(
            inst.element_id("e").unwrap(),
            Rational::ratio(3, 4),
        )]);
        inst.sets[1].tradeoffs[0] = Tradeoff::working(vec![Fragment::new(
            inst.element_id("f").unwrap(),
            Rational::ratio(3, 4),
        )]);
        let sites = find_applicable_sites(&inst, RuleId::R6);
        assert_eq!(sites.len(), 1);
        match &sites[0] {
            RewriteSite::R6 { degenerate, pairs, .. } => {
                assert!(!degenerate);
                assert_eq!(pairs.len(), 1);
            }
            _ => unreachable!(),
        }
        let after = equisat_after(&inst, &sites[0]);
        assert_eq!(after.girl_count(), 2);
        // fused set: the kept single plus the weight-added union
        let fused = after.set(GirlId(0));
        assert_eq!(fused.tradeoffs.len(), 2);
        assert!(fused.tradeoffs.iter().any(|t| t.fragments.len() == 4));
    }

    #[test]
    fn stale_site_is_rejected() {
        let inst = fmp("girl g1: { 1/3 a, 2/3 x }\ngirl g2: { 1/2 x, 1/2 y }");
        let site = RewriteSite::R1 {
            element: inst.element_id("a").unwrap(),
        };
        let (after, _) = apply_rule(&inst, &site).unwrap();
        assert!(matches!(
            apply_rule(&after, &site),
            Err(RuleError::StaleSite(_))
        ));
    }

    #[test]
    fn all_integral_instance_offers_no_fraction_rules() {
        let inst = crate::fixtures::eq4_fmp();
        for rule in [RuleId::R1, RuleId::R3, RuleId::R5, RuleId::R7] {
            assert!(
                find_applicable_sites(&inst, rule).is_empty(),
                "{rule} on an all-integral CMP with every element demanded twice"
            );
        }
    }
}
