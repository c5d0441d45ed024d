//! Execution under a strategy, with a chooser resolving probabilistic
//! transitions.

pub mod sample;
pub mod strategy;
pub mod transition;

pub use sample::{run_sample, Chooser, RandomChooser, Sample, SampleOutcome, ScriptedChooser};
pub use strategy::{ActivationOrder, ExecutionStrategy, PartnerOrder, Scheduling};
pub use transition::{
    evaluate_prob, ChoicePoint, DrawSource, Engine, Expansion, Instance, TransitionEvent, DEFAULT_MAX_DEPTH,
};
