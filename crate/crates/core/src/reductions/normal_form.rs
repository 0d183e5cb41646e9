//! The two FMP normal forms.
//!
//! **First normal form:** at most three tradeoffs per set, at most one
//! fractional tradeoff per set, and every fractional tradeoff sits in a
//! two-tradeoff set whose other member is a single whole element.
//! Oversized all-integral sets split in half around a shared fresh
//! element; sets containing fractional tradeoffs are isolated — each
//! tradeoff `t_i` moves into its own set `{t_i, {f_i}}` and a chain set
//! `{{f_1}, ..., {f_N}}` forces one of them to actually be used.
//!
//! **Second normal form:** additionally, every fractional tradeoff is a
//! two-fragment bundle `{p b_i, (1-p) b_j}` whose second element is free.
//! A set `{t, {b}}` with `t = {p_1 b_1, ..., p_N b_N}` expands into the
//! sets `{{p_i b_i, (1-p_i) c_i}, {1/N b, (N-1)/N d_i}}` with fresh
//! `c_i, d_i`, whose second fragments are free by construction; a final
//! first-normal-form pass restores the one-fractional-per-set shape.
//!
//! The second expansion is sound only while the partner element `b`
//! appears nowhere else fractionally (the isolation construction
//! guarantees that for its own output); a set whose partner fails the
//! test is re-isolated behind fresh elements first. For the same reason
//! the first normal form only leaves a fractional two-set untouched when
//! its partner already passes the purity test.

use std::collections::HashSet;

use thiserror::Error;

use crate::fmp::{ElementId, FmpInstance, Fragment, GirlId, Tradeoff, TradeoffSet};
use crate::rational::Rational;

/// Old-to-new correspondences recorded for inspection and debugging.
#[derive(Clone, Debug, Default)]
pub struct NormalFormTrace {
    /// for every output girl: the input girl it derives from
    pub girl_origin: Vec<GirlId>,
    /// elements introduced by the reduction (output ids)
    pub fresh_elements: Vec<ElementId>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalFormError {
    #[error("input is not in first normal form: {0}")]
    NotInFirstNormalForm(String),
}

struct Builder {
    girl_names: Vec<String>,
    element_names: Vec<String>,
    element_taken: HashSet<String>,
    sets: Vec<Vec<Tradeoff>>,
    girl_origin: Vec<GirlId>,
    fresh_elements: Vec<ElementId>,
    fresh_counter: usize,
}

impl Builder {
    fn from_elements(inst: &FmpInstance) -> Self {
        Builder {
            girl_names: Vec::new(),
            element_names: inst.element_names().to_vec(),
            element_taken: inst.element_names().iter().cloned().collect(),
            sets: Vec::new(),
            girl_origin: Vec::new(),
            fresh_elements: Vec::new(),
            fresh_counter: inst.element_count(),
        }
    }

    fn fresh_element(&mut self) -> ElementId {
        loop {
            let name = format!("_nf{}", self.fresh_counter);
            self.fresh_counter += 1;
            if self.element_taken.insert(name.clone()) {
                let id = ElementId(self.element_names.len() as u32);
                self.element_names.push(name);
                self.fresh_elements.push(id);
                return id;
            }
        }
    }

    fn push_set(&mut self, origin: GirlId, base: &str, tradeoffs: Vec<Tradeoff>) {
        let name = if self.girl_names.iter().any(|n| n == base) {
            let mut k = 1;
            loop {
                let candidate = format!("{base}.{k}");
                if !self.girl_names.iter().any(|n| n == &candidate) {
                    break candidate;
                }
                k += 1;
            }
        } else {
            base.to_string()
        };
        self.girl_names.push(name);
        self.girl_origin.push(origin);
        self.sets.push(tradeoffs);
    }

    fn finish(self) -> (FmpInstance, NormalFormTrace) {
        let sets = self
            .sets
            .into_iter()
            .enumerate()
            .map(|(i, tradeoffs)| TradeoffSet {
                girl: GirlId(i as u32),
                tradeoffs,
            })
            .collect();
        let instance = FmpInstance::new(self.girl_names, self.element_names, sets)
            .expect("normal form output is structurally valid");
        (
            instance,
            NormalFormTrace {
                girl_origin: self.girl_origin,
                fresh_elements: self.fresh_elements,
            },
        )
    }
}

/// Elements that occur fractionally anywhere in the instance.
fn fractional_elements(inst: &FmpInstance) -> HashSet<ElementId> {
    let mut out = HashSet::new();
    for set in inst.sets() {
        for t in &set.tradeoffs {
            for frag in &t.fragments {
                if !frag.weight.is_one() {
                    out.insert(frag.element);
                }
            }
        }
    }
    out
}

fn nf1_set_ok(tradeoffs: &[Tradeoff], fractional_elsewhere: &HashSet<ElementId>) -> bool {
    let fractional = tradeoffs.iter().filter(|t| t.is_fractional()).count();
    if fractional == 0 {
        return tradeoffs.len() <= 3;
    }
    if tradeoffs.len() != 2 || fractional != 1 {
        return false;
    }
    let partner = tradeoffs
        .iter()
        .find(|t| t.is_integral())
        .expect("one integral partner");
    !fractional_elsewhere.contains(&partner.fragments[0].element)
}

/// Splits an all-integral set in half around a shared fresh element
/// until every piece has at most three tradeoffs.
fn split_integral(builder: &mut Builder, origin: GirlId, base: &str, tradeoffs: Vec<Tradeoff>) {
    if tradeoffs.len() <= 3 {
        builder.push_set(origin, base, tradeoffs);
        return;
    }
    let shared = builder.fresh_element();
    let half = tradeoffs.len() / 2;
    let mut first: Vec<Tradeoff> = tradeoffs[..half].to_vec();
    let mut second: Vec<Tradeoff> = tradeoffs[half..].to_vec();
    first.push(Tradeoff::integral(shared));
    second.push(Tradeoff::integral(shared));
    split_integral(builder, origin, base, first);
    split_integral(builder, origin, base, second);
}

/// Isolates every tradeoff of a set behind its own fresh element and
/// adds the chain set that makes exactly one isolation bind.
fn isolate(builder: &mut Builder, origin: GirlId, base: &str, tradeoffs: Vec<Tradeoff>) {
    let mut chain = Vec::with_capacity(tradeoffs.len());
    for t in tradeoffs {
        let fresh = builder.fresh_element();
        chain.push(Tradeoff::integral(fresh));
        builder.push_set(origin, base, vec![t, Tradeoff::integral(fresh)]);
    }
    split_integral(builder, origin, base, chain);
}

/// First normal form; the input must be canonical.
pub fn first_normal_form(inst: &FmpInstance) -> (FmpInstance, NormalFormTrace) {
    let fractional_elsewhere = fractional_elements(inst);
    let mut builder = Builder::from_elements(inst);
    for set in inst.sets() {
        let base = inst.girl_name(set.girl).to_string();
        if nf1_set_ok(&set.tradeoffs, &fractional_elsewhere) {
            builder.push_set(set.girl, &base, set.tradeoffs.clone());
        } else if set.tradeoffs.iter().all(|t| t.is_integral()) {
            split_integral(&mut builder, set.girl, &base, set.tradeoffs.clone());
        } else {
            isolate(&mut builder, set.girl, &base, set.tradeoffs.clone());
        }
    }
    builder.finish()
}

/// Structural check of the first-normal-form postconditions.
pub fn verify_nf1(inst: &FmpInstance) -> Result<(), String> {
    for set in inst.sets() {
        let n = set.tradeoffs.len();
        if n > 3 {
            return Err(format!(
                "girl {} has {n} tradeoffs",
                inst.girl_name(set.girl)
            ));
        }
        let fractional = set.tradeoffs.iter().filter(|t| t.is_fractional()).count();
        if fractional > 1 {
            return Err(format!(
                "girl {} has {fractional} fractional tradeoffs",
                inst.girl_name(set.girl)
            ));
        }
        if fractional == 1 && !(n == 2 && set.tradeoffs.iter().any(|t| t.is_integral())) {
            return Err(format!(
                "girl {}: fractional tradeoff not paired with one integral tradeoff",
                inst.girl_name(set.girl)
            ));
        }
    }
    Ok(())
}

/// Second normal form; the input must satisfy the first-normal-form
/// postconditions.
pub fn second_normal_form(
    inst: &FmpInstance,
) -> Result<(FmpInstance, NormalFormTrace), NormalFormError> {
    verify_nf1(inst).map_err(NormalFormError::NotInFirstNormalForm)?;

    let free = crate::fmp::free_elements(inst);
    let fractional_elsewhere = fractional_elements(inst);
    let mut builder = Builder::from_elements(inst);

    for set in inst.sets() {
        let base = inst.girl_name(set.girl).to_string();
        let fractional_pos = set.tradeoffs.iter().position(|t| t.is_fractional());
        let Some(fi) = fractional_pos else {
            builder.push_set(set.girl, &base, set.tradeoffs.clone());
            continue;
        };
        let t = &set.tradeoffs[fi];
        let partner = set.tradeoffs[1 - fi].fragments[0].element;

        // already-binary tradeoff with a free second element stays,
        // modulo putting the free fragment second
        if t.fragments.len() == 2 {
            let (a, b) = (&t.fragments[0], &t.fragments[1]);
            let reordered = if free.contains(&b.element) {
                Some(vec![a.clone(), b.clone()])
            } else if free.contains(&a.element) {
                Some(vec![b.clone(), a.clone()])
            } else {
                None
            };
            if let Some(fragments) = reordered {
                let mut tradeoffs = set.tradeoffs.clone();
                tradeoffs[fi] = Tradeoff::canonical(fragments);
                builder.push_set(set.girl, &base, tradeoffs);
                continue;
            }
        }

        // the expansion consumes the partner in 1/N slices, which is
        // only sound while the partner occurs nowhere else fractionally
        let partner = if fractional_elsewhere.contains(&partner) {
            let f1 = builder.fresh_element();
            let f2 = builder.fresh_element();
            builder.push_set(
                set.girl,
                &base,
                vec![
                    Tradeoff::integral(partner),
                    Tradeoff::integral(f2),
                ],
            );
            builder.push_set(
                set.girl,
                &base,
                vec![Tradeoff::integral(f1), Tradeoff::integral(f2)],
            );
            f1
        } else {
            partner
        };

        let n = t.fragments.len() as i64;
        let slice = Rational::ratio(1, n);
        for frag in &t.fragments {
            let c = builder.fresh_element();
            let d = builder.fresh_element();
            builder.push_set(
                set.girl,
                &base,
                vec![
                    Tradeoff::canonical(vec![
                        frag.clone(),
                        Fragment::new(c, frag.weight.complement()),
                    ]),
                    Tradeoff::canonical(vec![
                        Fragment::new(partner, slice.clone()),
                        Fragment::new(d, slice.complement()),
                    ]),
                ],
            );
        }
    }

    let (expanded, mut trace) = builder.finish();
    // the expansion leaves sets with two fractional tradeoffs; one more
    // isolation pass restores the first normal form
    let (out, pass_trace) = first_normal_form(&expanded);
    let origin: Vec<GirlId> = pass_trace
        .girl_origin
        .iter()
        .map(|g| trace.girl_origin[g.index()])
        .collect();
    trace.girl_origin = origin;
    trace
        .fresh_elements
        .extend(pass_trace.fresh_elements.iter().copied());
    Ok((out, trace))
}

/// Structural check of the second-normal-form postconditions.
pub fn verify_nf2(inst: &FmpInstance) -> Result<(), String> {
    verify_nf1(inst)?;
    let free = crate::fmp::free_elements(inst);
    for set in inst.sets() {
        for t in &set.tradeoffs {
            if t.is_integral() {
                continue;
            }
            if t.fragments.len() != 2 {
                return Err(format!(
                    "girl {}: fractional tradeoff has {} fragments",
                    inst.girl_name(set.girl),
                    t.fragments.len()
                ));
            }
            let (a, b) = (&t.fragments[0], &t.fragments[1]);
            if &a.weight + &b.weight != Rational::one() {
                return Err(format!(
                    "girl {}: fractional tradeoff is not a complement pair",
                    inst.girl_name(set.girl)
                ));
            }
            if !free.contains(&b.element) {
                return Err(format!(
                    "girl {}: second element {} is not free",
                    inst.girl_name(set.girl),
                    inst.element_name(b.element)
                ));
            }
        }
    }
    Ok(())
}
