//! Execution strategies: the non-probabilistic choices of a derivation.

use std::collections::HashMap;
use std::fmt;

use crate::syntax::ast::{Program, RuleId};
use crate::term::Sym;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartnerOrder {
    Ascending,
    Descending,
}

/// Order in which the constraints of a conjunction are introduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActivationOrder {
    LeftToRight,
    /// Conjunctions made only of constraints (the query included) are
    /// introduced right to left.
    RightToLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheduling {
    /// Goal stack with immediate activation of new constraints.
    Refined,
    /// Constraints are introduced without activation; rule instances are
    /// then chosen over the whole store in rule order.
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExecutionStrategy {
    /// Rules in the order their occurrences are tried.
    pub rule_order: Vec<RuleId>,
    pub partner_order: PartnerOrder,
    pub activation: ActivationOrder,
    pub scheduling: Scheduling,
}

impl ExecutionStrategy {
    /// Refined semantics: program order, ascending partners, left to right.
    pub fn refined(program: &Program) -> Self {
        ExecutionStrategy {
            rule_order: program.rules.iter().map(|r| r.id).collect(),
            partner_order: PartnerOrder::Ascending,
            activation: ActivationOrder::LeftToRight,
            scheduling: Scheduling::Refined,
        }
    }

    pub fn with_rule_order(mut self, order: Vec<RuleId>) -> Self {
        self.rule_order = order;
        self
    }

    pub fn with_partner_order(mut self, order: PartnerOrder) -> Self {
        self.partner_order = order;
        self
    }

    pub fn with_activation(mut self, order: ActivationOrder) -> Self {
        self.activation = order;
        self
    }

    pub fn with_scheduling(mut self, s: Scheduling) -> Self {
        self.scheduling = s;
        self
    }

    pub fn is_default_rule_order(&self) -> bool {
        self.rule_order.windows(2).all(|w| w[0] < w[1])
    }
}

impl fmt::Display for ExecutionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rules: Vec<String> = self.rule_order.iter().map(|r| r.to_string()).collect();
        write!(f, "rules [{}]", rules.join(","))?;
        if self.partner_order == PartnerOrder::Descending {
            write!(f, ", partners descending")?;
        }
        if self.activation == ActivationOrder::RightToLeft {
            write!(f, ", right-to-left activation")?;
        }
        if self.scheduling == Scheduling::Global {
            write!(f, ", global scheduling")?;
        }
        Ok(())
    }
}

/// A head position of a rule that a constraint can occupy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    /// Index into `Program::rules`.
    pub rule_index: usize,
    /// Head position, kept heads first.
    pub head: usize,
}

/// Occurrence lists per functor/arity, in strategy order.
#[derive(Debug, Clone, Default)]
pub struct OccurrenceTable {
    table: HashMap<(Sym, usize), Vec<Occurrence>>,
}

impl OccurrenceTable {
    pub fn new(program: &Program, strategy: &ExecutionStrategy) -> Self {
        let mut table: HashMap<(Sym, usize), Vec<Occurrence>> = HashMap::new();
        for &rid in &strategy.rule_order {
            let Some(rule_index) = program.rules.iter().position(|r| r.id == rid) else {
                continue;
            };
            for (head, c) in program.rules[rule_index].heads().enumerate() {
                table
                    .entry((c.functor.clone(), c.arity()))
                    .or_default()
                    .push(Occurrence { rule_index, head });
            }
        }
        OccurrenceTable { table }
    }

    pub fn get(&self, functor: &Sym, arity: usize) -> &[Occurrence] {
        self.table
            .get(&(functor.clone(), arity))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }
}
