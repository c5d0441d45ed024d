//! Front end: lexing, reading, compilation and desugaring of programs,
//! queries and observations.

pub mod ast;
pub mod compile;
pub mod desugar;
pub mod lexer;
pub mod reader;

pub use ast::{
    BodyItem, ChanceRule, Disjunction, Observation, ObservationKind, ProbExpr, Program, RuleId, Selector,
};
pub use compile::{
    outcome_space, parse_observation, parse_observations, parse_program, parse_query, parse_term,
};
pub use desugar::desugar_cond;
