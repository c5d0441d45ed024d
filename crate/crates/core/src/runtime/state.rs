//! Execution states `<G, S, B, T>_n`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use super::builtins::Env;
use crate::syntax::ast::{BodyItem, RuleId};
use crate::term::Constraint;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IdentifiedConstraint {
    pub constraint: Arc<Constraint>,
    pub id: u64,
}

impl fmt::Display for IdentifiedConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.constraint, self.id)
    }
}

/// A considered rule instance: rule and the identifiers of its kept and
/// removed heads, in head order.
///
/// Stored as `[rule, kept count, ids...]` behind an `Arc`, so cloning a
/// history is cheap and lookups can use a borrowed slice.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct HistoryEntry(Arc<[u64]>);

impl HistoryEntry {
    pub fn new(rule: RuleId, kept_ids: &[u64], removed_ids: &[u64]) -> Self {
        let mut key = Vec::with_capacity(2 + kept_ids.len() + removed_ids.len());
        key.extend([rule as u64, kept_ids.len() as u64]);
        key.extend_from_slice(kept_ids);
        key.extend_from_slice(removed_ids);
        HistoryEntry(key.into())
    }

    pub fn rule(&self) -> RuleId {
        self.0[0] as RuleId
    }

    pub fn kept_ids(&self) -> &[u64] {
        &self.0[2..2 + self.0[1] as usize]
    }

    pub fn removed_ids(&self) -> &[u64] {
        &self.0[2 + self.0[1] as usize..]
    }
}

impl std::hash::Hash for HistoryEntry {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0[..].hash(state)
    }
}

impl std::borrow::Borrow<[u64]> for HistoryEntry {
    fn borrow(&self) -> &[u64] {
        &self.0
    }
}

/// One entry of the goal stack.
#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    /// Remaining items of a conjunction, with the bindings of the rule
    /// instance that produced it.
    Exec {
        /// Rule whose body this is; 0 for the query.
        rule: RuleId,
        items: Arc<[Arc<BodyItem>]>,
        pos: usize,
        env: Env,
    },
    /// An active constraint working through its occurrences.
    Active { id: u64, occurrence: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionState {
    /// Top of the stack is the last element.
    pub goal: Vec<Frame>,
    /// Ascending by id.
    pub store: Vec<IdentifiedConstraint>,
    pub builtin_ok: bool,
    pub history: HashSet<HistoryEntry>,
    pub counter: u64,
    /// Transitions taken so far.
    pub steps: u64,
}

impl ExecutionState {
    /// State whose goal is the given conjunction, executed left to right.
    pub fn with_goal(items: Vec<BodyItem>, env: Env) -> Self {
        let mut goal = Vec::new();
        if !items.is_empty() {
            goal.push(Frame::Exec {
                rule: 0,
                items: items.into_iter().map(Arc::new).collect(),
                pos: 0,
                env,
            });
        }
        ExecutionState {
            goal,
            store: Vec::new(),
            builtin_ok: true,
            history: HashSet::new(),
            counter: 0,
            steps: 0,
        }
    }

    pub fn is_failed(&self) -> bool {
        !self.builtin_ok
    }

    pub fn find(&self, id: u64) -> Option<&IdentifiedConstraint> {
        self.store
            .binary_search_by_key(&id, |c| c.id)
            .ok()
            .map(|i| &self.store[i])
    }

    pub fn remove(&mut self, id: u64) {
        if let Ok(i) = self.store.binary_search_by_key(&id, |c| c.id) {
            self.store.remove(i);
        }
    }

    /// Adds `c` with the next identifier.
    pub fn introduce(&mut self, c: Constraint) -> u64 {
        self.introduce_shared(Arc::new(c))
    }

    pub fn introduce_shared(&mut self, c: Arc<Constraint>) -> u64 {
        let id = self.counter;
        self.counter += 1;
        self.store.push(IdentifiedConstraint { constraint: c, id });
        id
    }

    /// `chr(S)`, sorted.
    pub fn chr_store(&self) -> Vec<Constraint> {
        let mut v: Vec<Constraint> = self.store.iter().map(|c| (*c.constraint).clone()).collect();
        v.sort();
        v
    }
}

/// `<Q, {}, true, {}>_0`
pub fn initial_state(query: &[Constraint]) -> ExecutionState {
    ExecutionState::with_goal(
        query.iter().cloned().map(BodyItem::Constraint).collect(),
        Env::default(),
    )
}

/// Equivalence of final states under ground execution: multiset equality
/// of the stores. Failed states are equivalent only to each other.
pub fn store_equivalent(s1: &ExecutionState, s2: &ExecutionState) -> bool {
    if s1.is_failed() || s2.is_failed() {
        return s1.is_failed() && s2.is_failed();
    }
    s1.chr_store() == s2.chr_store()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state_with(cs: &[(&str, u64)]) -> ExecutionState {
        let mut s = initial_state(&[]);
        s.store = cs
            .iter()
            .map(|(f, id)| IdentifiedConstraint {
                constraint: Arc::new(Constraint::atom(f)),
                id: *id,
            })
            .collect();
        s.store.sort_by_key(|c| c.id);
        s.counter = cs.iter().map(|c| c.1 + 1).max().unwrap_or(0);
        s
    }

    #[test]
    fn initial_states() {
        let s = initial_state(&[Constraint::atom("toss")]);
        assert_eq!(s.goal.len(), 1);
        assert!(s.store.is_empty() && s.history.is_empty());
        assert_eq!(s.counter, 0);
        assert!(s.builtin_ok);
        assert!(initial_state(&[]).goal.is_empty());
        let s = initial_state(&[Constraint::atom("a"), Constraint::atom("b")]);
        let Frame::Exec { items, .. } = &s.goal[0] else {
            panic!()
        };
        assert_eq!(items.len(), 2);
    }

    #[test]
    fn equivalence_ignores_identifiers() {
        assert!(store_equivalent(
            &state_with(&[("head", 1), ("tail", 2)]),
            &state_with(&[("tail", 7), ("head", 9)])
        ));
        assert!(!store_equivalent(
            &state_with(&[("head", 1), ("head", 2)]),
            &state_with(&[("head", 1)])
        ));
        let mut failed = state_with(&[]);
        failed.builtin_ok = false;
        assert!(!store_equivalent(&failed, &state_with(&[])));
        assert!(store_equivalent(&failed, &failed.clone()));
    }

    fn arb_state() -> impl Strategy<Value = ExecutionState> {
        proptest::collection::vec((0usize..3, 0u64..50), 0..5).prop_map(|v| {
            let names = ["a", "b", "c"];
            let mut seen = HashSet::new();
            let cs: Vec<(&str, u64)> = v
                .into_iter()
                .filter(|(_, id)| seen.insert(*id))
                .map(|(n, id)| (names[n], id))
                .collect();
            state_with(&cs)
        })
    }

    proptest! {
        #[test]
        fn equivalence_relation(a in arb_state(), b in arb_state(), c in arb_state()) {
            prop_assert!(store_equivalent(&a, &a));
            prop_assert_eq!(store_equivalent(&a, &b), store_equivalent(&b, &a));
            if store_equivalent(&a, &b) && store_equivalent(&b, &c) {
                prop_assert!(store_equivalent(&a, &c));
            }
        }
    }
}
