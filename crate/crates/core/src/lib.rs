//! Chance-rule programs: parsing, probabilistic multiset rewriting, exact
//! inference by derivation enumeration, EM parameter learning and
//! ambiguity refutation.
//!
//! ```
//! use chrism_core::{parse_program, parse_observation, probability, ExecutionStrategy, Limits};
//!
//! let program = parse_program("toss <=> head:0.5 ; tail:0.5.").unwrap();
//! let obs = parse_observation("toss,toss <==> head,tail").unwrap();
//! let strategy = ExecutionStrategy::refined(&program);
//! let p = probability(&program, &obs, &strategy, &program.switches, &Limits::default()).unwrap();
//! assert_eq!(p, 0.5);
//! ```

pub mod ambiguity;
pub mod engine;
pub mod error;
pub mod inference;
pub mod learning;
pub mod runtime;
pub mod syntax;
pub mod term;

pub use ambiguity::{
    check_ambiguity, check_ambiguity_with, generate_variants, generate_variants_with, AmbiguityOptions,
    AmbiguityVerdict, StrategyVariant, Witness,
};
pub use engine::{
    run_sample, ActivationOrder, Chooser, DrawSource, Engine, ExecutionStrategy, PartnerOrder, RandomChooser,
    Sample, SampleOutcome, Scheduling, ScriptedChooser, TransitionEvent,
};
pub use error::{Error, ErrorClass, Result};
pub use inference::{
    distribution, enumerate, for_each_leaf, match_full, match_partial, observation_matches, probability,
    Explanation, Limits, WeightedLeaf,
};
pub use learning::{
    collect_data, collect_explanations, em_learn, log_likelihood, EmConfig, EmInit, EmResult, ObservationData,
};
pub use runtime::{
    initial_state, store_equivalent, Distribution, ExecutionState, HistoryEntry, IdentifiedConstraint,
    Outcome, StoreKey, SwitchDist, SwitchRegistry,
};
pub use syntax::{
    desugar_cond, outcome_space, parse_observation, parse_observations, parse_program, parse_query,
    parse_term, ChanceRule, Observation, ObservationKind, ProbExpr, Program,
};
pub use term::{Constraint, Term};
