//! The fragment rewrite engine.
//!
//! Seven rules simplify an FMP while preserving solvability:
//!
//! - **R1** removes an element whose fragments sum to at most 1 (it can
//!   always serve everyone who mentions it).
//! - **R2** replaces a closed family of mutually exclusive tradeoffs by
//!   copies of a single whole element.
//! - **R3** rounds an element's high fractions (> 1/2) up to 1 and its
//!   low fractions down to a common `1/N`, when highs and lows can never
//!   mix.
//! - **R4** collapses a two-integral-tradeoff set by removing it and
//!   identifying its two elements.
//! - **R5** recognizes an all-pairs family of `1/N` pair-sets (the
//!   at-most-one gadget) and merges the group into its first element.
//! - **R6** fuses two sets whose singleton tradeoffs are each exclusive
//!   with every shared co-appearance (a convenience rule, not used by
//!   the driver).
//! - **R7** undoes a bridge split: two sets whose private tradeoffs
//!   overfill a shared element fuse into one.
//!
//! [`fragment_reduce`] drives them to a fixpoint after the two normal
//! forms, maintaining the all-single-fragment-tradeoff (ASET) shape, and
//! records a replayable trace.

mod driver;
mod rules;

pub use driver::{
    fragment_reduce, instance_hash, replay_trace, FragmentReduction, RecordedStep, ReduceOutcome,
    RewriteTrace, TraceError, TraceStep,
};
pub use rules::{
    apply_rule, aset_holds, find_applicable_sites, progress_metric, Progress, RewriteDelta,
    RewriteSite, RuleError, RuleId,
};
