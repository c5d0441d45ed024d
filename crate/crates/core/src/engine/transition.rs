//! The transition relation: Solve, Fail, Introduce, Probabilistic-Choice
//! and Maybe-Apply, scheduled by an execution strategy.

use std::fmt;
use std::sync::Arc;

use super::strategy::{
    ActivationOrder, ExecutionStrategy, Occurrence, OccurrenceTable, PartnerOrder, Scheduling,
};
use crate::error::{Error, Result};
use crate::runtime::builtins::{eval_arith, match_constraint, solve, Env, Trail};
use crate::runtime::state::{ExecutionState, Frame, HistoryEntry, IdentifiedConstraint};
use crate::runtime::switches::{render_outcomes, Outcome, SwitchRegistry};
use crate::syntax::ast::{BodyItem, ChanceRule, ProbExpr, Program, RuleId, Selector};
use crate::term::{Constraint, Term};

/// Default bound on the number of transitions in one derivation.
pub const DEFAULT_MAX_DEPTH: u64 = 1_000_000;

/// What a probabilistic draw is attached to when no switch is involved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DrawSource {
    /// Constant or evaluated rule probability.
    Rule(RuleId),
    /// LPAD-style disjunction, by rule and 1-based site.
    Disjunction { rule: RuleId, site: usize },
}

impl fmt::Display for DrawSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DrawSource::Rule(r) => write!(f, "rule_{r}"),
            DrawSource::Disjunction { rule, site } => write!(f, "rule_{rule}/{site}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransitionEvent {
    Solve(Term),
    Fail(Term),
    Introduce(IdentifiedConstraint),
    SwitchDraw {
        switch: Term,
        outcome: Outcome,
        prob: f64,
    },
    FixedDraw {
        source: DrawSource,
        outcome: Outcome,
        prob: f64,
    },
}

impl TransitionEvent {
    pub fn prob(&self) -> f64 {
        match self {
            TransitionEvent::SwitchDraw { prob, .. } | TransitionEvent::FixedDraw { prob, .. } => *prob,
            _ => 1.0,
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        matches!(
            self,
            TransitionEvent::SwitchDraw { .. } | TransitionEvent::FixedDraw { .. }
        )
    }
}

impl fmt::Display for TransitionEvent {
    /// `<kind> <site> <outcome> p=<prob>`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionEvent::Solve(g) => write!(f, "solve {g} - p=1"),
            TransitionEvent::Fail(g) => write!(f, "fail {g} - p=1"),
            TransitionEvent::Introduce(c) => write!(f, "introduce {c} - p=1"),
            TransitionEvent::SwitchDraw {
                switch,
                outcome,
                prob,
            } => write!(f, "switch {switch} {outcome} p={prob}"),
            TransitionEvent::FixedDraw {
                source,
                outcome,
                prob,
            } => write!(f, "fixed {source} {outcome} p={prob}"),
        }
    }
}

/// A matched rule instance with the bindings of its heads and guard.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub rule: RuleId,
    pub kept_ids: Vec<u64>,
    pub removed_ids: Vec<u64>,
    pub env: Env,
}

impl Instance {
    pub fn history_entry(&self) -> HistoryEntry {
        HistoryEntry::new(self.rule, &self.kept_ids, &self.removed_ids)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ChoiceKind {
    MaybeApply(Instance),
    Disjunction,
}

/// A state with several probabilistic successors. Alternatives are listed
/// in outcome order and include zero-probability ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoicePoint {
    kind: ChoiceKind,
    pub alternatives: Vec<TransitionEvent>,
}

impl ChoicePoint {
    pub fn instance(&self) -> Option<&Instance> {
        match &self.kind {
            ChoiceKind::MaybeApply(i) => Some(i),
            ChoiceKind::Disjunction => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expansion {
    /// No transition applies.
    Final,
    /// The state is the failed state.
    Failed,
    /// A deterministic transition was applied in place.
    Step(TransitionEvent),
    /// The next transition is probabilistic; see [`Engine::resolve`].
    Choice(ChoicePoint),
}

/// A program compiled against one strategy.
#[derive(Debug, Clone)]
pub struct Engine<'p> {
    program: &'p Program,
    strategy: ExecutionStrategy,
    occurrences: OccurrenceTable,
    /// Rule bodies in activation order, indexed by rule id - 1.
    bodies: Vec<Arc<[Arc<BodyItem>]>>,
    max_depth: u64,
}

impl<'p> Engine<'p> {
    pub fn new(program: &'p Program, strategy: ExecutionStrategy) -> Self {
        let occurrences = OccurrenceTable::new(program, &strategy);
        let bodies = program
            .rules
            .iter()
            .map(|r| ordered(strategy.activation, r.body.clone()))
            .collect();
        Engine {
            program,
            strategy,
            occurrences,
            bodies,
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }

    pub fn refined(program: &'p Program) -> Self {
        Self::new(program, ExecutionStrategy::refined(program))
    }

    pub fn with_max_depth(mut self, max_depth: u64) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    pub fn strategy(&self) -> &ExecutionStrategy {
        &self.strategy
    }

    fn rule(&self, id: RuleId) -> &'p ChanceRule {
        &self.program.rules[id - 1]
    }

    fn ordered(&self, items: Vec<Arc<BodyItem>>) -> Arc<[Arc<BodyItem>]> {
        ordered(self.strategy.activation, items)
    }

    /// Root state for `query`, in the strategy's activation order.
    pub fn initial_state(&self, query: &[Constraint]) -> ExecutionState {
        let mut s = ExecutionState::with_goal(Vec::new(), Env::default());
        if !query.is_empty() {
            let items = query
                .iter()
                .map(|c| Arc::new(BodyItem::Constraint(c.clone())))
                .collect();
            s.goal.push(Frame::Exec {
                rule: 0,
                items: self.ordered(items),
                pos: 0,
                env: Env::default(),
            });
        }
        s
    }

    fn count_step(&self, state: &mut ExecutionState) -> Result<()> {
        if state.steps >= self.max_depth {
            return Err(Error::DepthLimit(self.max_depth));
        }
        state.steps += 1;
        Ok(())
    }

    /// Advances `state` to its next transition. Deterministic transitions are
    /// applied in place; probabilistic ones are returned unresolved.
    pub fn expand(&self, state: &mut ExecutionState, registry: &SwitchRegistry) -> Result<Expansion> {
        loop {
            if state.is_failed() {
                return Ok(Expansion::Failed);
            }
            let Some(top) = state.goal.last_mut() else {
                if self.strategy.scheduling == Scheduling::Global {
                    if let Some(inst) = self.find_global_instance(state)? {
                        return self.maybe_apply(inst, registry).map(Expansion::Choice);
                    }
                }
                return Ok(Expansion::Final);
            };
            match top {
                Frame::Exec {
                    rule,
                    items,
                    pos,
                    env,
                } => {
                    if *pos >= items.len() {
                        state.goal.pop();
                        continue;
                    }
                    let item = items[*pos].clone();
                    let rule = *rule;
                    match item.as_ref() {
                        BodyItem::Constraint(c) => {
                            let names = self.var_names(rule);
                            let c = Arc::new(env.ground_constraint(c, names)?);
                            *pos += 1;
                            self.count_step(state)?;
                            let id = state.introduce_shared(c.clone());
                            if self.strategy.scheduling == Scheduling::Refined {
                                state.goal.push(Frame::Active { id, occurrence: 0 });
                            }
                            return Ok(Expansion::Step(TransitionEvent::Introduce(
                                IdentifiedConstraint { constraint: c, id },
                            )));
                        }
                        BodyItem::Builtin(g) => {
                            let ok = solve(g, env)?;
                            let shown = env.resolve(g);
                            *pos += 1;
                            self.count_step(state)?;
                            if ok {
                                return Ok(Expansion::Step(TransitionEvent::Solve(shown)));
                            }
                            state.builtin_ok = false;
                            state.goal.clear();
                            return Ok(Expansion::Step(TransitionEvent::Fail(shown)));
                        }
                        BodyItem::Disjunction(d) => {
                            let k = d.branches.len();
                            let alternatives = match &d.selector {
                                Selector::Fixed(ps) => ps
                                    .iter()
                                    .enumerate()
                                    .map(|(i, p)| TransitionEvent::FixedDraw {
                                        source: DrawSource::Disjunction { rule, site: d.site },
                                        outcome: Outcome::Branch(i as u32 + 1),
                                        prob: *p,
                                    })
                                    .collect(),
                                Selector::Experiment(name) => {
                                    let name = env.ground(name, "experiment name", self.var_names(rule))?;
                                    switch_draws(registry, name, &Outcome::branch_outcomes(k))?
                                }
                                Selector::Anonymous => {
                                    return Err(Error::Compile("anonymous disjunction was not named".into()))
                                }
                            };
                            return Ok(Expansion::Choice(ChoicePoint {
                                kind: ChoiceKind::Disjunction,
                                alternatives,
                            }));
                        }
                    }
                }
                Frame::Active { id, occurrence } => {
                    let (id, occ_index) = (*id, *occurrence);
                    let Some(active) = state.find(id) else {
                        state.goal.pop();
                        continue;
                    };
                    let c = &active.constraint;
                    let occs = self.occurrences.get(&c.functor, c.arity());
                    let Some(&occ) = occs.get(occ_index) else {
                        state.goal.pop();
                        continue;
                    };
                    match self.find_instance_at(state, occ, id)? {
                        Some(inst) => return self.maybe_apply(inst, registry).map(Expansion::Choice),
                        None => {
                            if let Some(Frame::Active { occurrence, .. }) = state.goal.last_mut() {
                                *occurrence += 1;
                            }
                        }
                    }
                }
            }
        }
    }

    fn var_names(&self, rule: RuleId) -> &'p [crate::term::Sym] {
        if rule == 0 {
            &[]
        } else {
            &self.rule(rule).var_names
        }
    }

    /// Applies alternative `index` of a choice point to `state`.
    pub fn resolve(&self, state: &mut ExecutionState, choice: &ChoicePoint, index: usize) -> Result<()> {
        self.count_step(state)?;
        match &choice.kind {
            ChoiceKind::MaybeApply(inst) => {
                state.history.insert(inst.history_entry());
                if choice.alternatives[index].is_apply() {
                    for id in &inst.removed_ids {
                        state.remove(*id);
                    }
                    if let Some(Frame::Active { id, .. }) = state.goal.last() {
                        if inst.removed_ids.contains(id) {
                            state.goal.pop();
                        }
                    }
                    let body = &self.bodies[inst.rule - 1];
                    if !body.is_empty() {
                        state.goal.push(Frame::Exec {
                            rule: inst.rule,
                            items: body.clone(),
                            pos: 0,
                            env: inst.env.clone(),
                        });
                    }
                }
            }
            ChoiceKind::Disjunction => {
                let Some(Frame::Exec {
                    rule,
                    items,
                    pos,
                    env,
                }) = state.goal.pop()
                else {
                    unreachable!("disjunction choice without a pending conjunction");
                };
                let BodyItem::Disjunction(d) = items[pos].as_ref() else {
                    unreachable!("disjunction choice on a non-disjunction item");
                };
                let rest = items[pos + 1..].iter().cloned();
                let branch: Vec<Arc<BodyItem>> = d.branches[index].iter().cloned().chain(rest).collect();
                if !branch.is_empty() {
                    state.goal.push(Frame::Exec {
                        rule,
                        items: self.ordered(branch),
                        pos: 0,
                        env,
                    });
                }
            }
        }
        Ok(())
    }

    /// Alternatives for considering `inst`: apply with the rule's
    /// probability, skip with the complement.
    fn maybe_apply(&self, inst: Instance, registry: &SwitchRegistry) -> Result<ChoicePoint> {
        let rule = self.rule(inst.rule);
        let alternatives = evaluate_prob(rule, &inst.env, registry)?;
        Ok(ChoicePoint {
            kind: ChoiceKind::MaybeApply(inst),
            alternatives,
        })
    }

    /// First untried instance of the occurrence `occ` with the active
    /// constraint `active` in its head position.
    pub fn find_instance_at(
        &self,
        state: &ExecutionState,
        occ: Occurrence,
        active: u64,
    ) -> Result<Option<Instance>> {
        let rule = &self.program.rules[occ.rule_index];
        let mut env = Env::new(rule.var_count());
        let mut trail = Trail::default();
        let Some(c) = state.find(active) else {
            return Ok(None);
        };
        if !match_constraint(rule.head(occ.head), &c.constraint, &mut env, &mut trail) {
            return Ok(None);
        }
        let mut ids = vec![u64::MAX; rule.head_count()];
        ids[occ.head] = active;
        self.search(state, rule, 0, &mut ids, &mut env, &mut trail)
    }

    /// First untried instance over the whole store, rules in strategy order.
    fn find_global_instance(&self, state: &ExecutionState) -> Result<Option<Instance>> {
        for &rid in &self.strategy.rule_order {
            let rule = self.rule(rid);
            let mut env = Env::new(rule.var_count());
            let mut trail = Trail::default();
            let mut ids = vec![u64::MAX; rule.head_count()];
            if let Some(i) = self.search(state, rule, 0, &mut ids, &mut env, &mut trail)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Fills head positions `pos..` with distinct store constraints in
    /// partner order; `ids[p] != u64::MAX` marks an already fixed position.
    fn search(
        &self,
        state: &ExecutionState,
        rule: &ChanceRule,
        pos: usize,
        ids: &mut Vec<u64>,
        env: &mut Env,
        trail: &mut Trail,
    ) -> Result<Option<Instance>> {
        if pos == ids.len() {
            return self.complete(state, rule, ids, env);
        }
        if ids[pos] != u64::MAX {
            return self.search(state, rule, pos + 1, ids, env, trail);
        }
        let head = rule.head(pos);
        let n = state.store.len();
        for k in 0..n {
            let cand = match self.strategy.partner_order {
                PartnerOrder::Ascending => &state.store[k],
                PartnerOrder::Descending => &state.store[n - 1 - k],
            };
            if cand.constraint.functor != head.functor
                || cand.constraint.arity() != head.arity()
                || ids.contains(&cand.id)
            {
                continue;
            }
            let mark = trail.mark();
            if match_constraint(head, &cand.constraint, env, trail) {
                ids[pos] = cand.id;
                if let Some(i) = self.search(state, rule, pos + 1, ids, env, trail)? {
                    return Ok(Some(i));
                }
                ids[pos] = u64::MAX;
            }
            trail.undo(env, mark);
        }
        Ok(None)
    }

    fn complete(
        &self,
        state: &ExecutionState,
        rule: &ChanceRule,
        ids: &[u64],
        env: &Env,
    ) -> Result<Option<Instance>> {
        let nk = rule.kept.len();
        let len = ids.len() + 2;
        let mut stack = [0u64; 16];
        let mut heap = Vec::new();
        let key: &mut [u64] = if len <= stack.len() {
            &mut stack[..len]
        } else {
            heap.resize(len, 0);
            &mut heap
        };
        key[0] = rule.id as u64;
        key[1] = nk as u64;
        key[2..].copy_from_slice(ids);
        if state.history.contains(&*key) {
            return Ok(None);
        }
        let mut env = env.clone();
        for g in &rule.guard {
            if !solve(g, &mut env)? {
                return Ok(None);
            }
        }
        Ok(Some(Instance {
            rule: rule.id,
            kept_ids: ids[..nk].to_vec(),
            removed_ids: ids[nk..].to_vec(),
            env,
        }))
    }
}

impl TransitionEvent {
    fn is_apply(&self) -> bool {
        matches!(
            self,
            TransitionEvent::SwitchDraw {
                outcome: Outcome::Apply,
                ..
            } | TransitionEvent::FixedDraw {
                outcome: Outcome::Apply,
                ..
            }
        )
    }
}

/// Constraint-only conjunctions are reversed under right-to-left activation.
fn ordered(activation: ActivationOrder, items: Vec<Arc<BodyItem>>) -> Arc<[Arc<BodyItem>]> {
    let reverse = activation == ActivationOrder::RightToLeft
        && items
            .iter()
            .all(|i| matches!(i.as_ref(), BodyItem::Constraint(_)));
    if reverse {
        items.into_iter().rev().collect()
    } else {
        items.into()
    }
}

fn switch_draws(registry: &SwitchRegistry, name: Term, outcomes: &[Outcome]) -> Result<Vec<TransitionEvent>> {
    let probs = match registry.get(&name) {
        Some(d) if d.outcomes != outcomes => {
            return Err(Error::OutcomeMismatch {
                name: name.to_string(),
                requested: render_outcomes(outcomes),
                registered: render_outcomes(&d.outcomes),
            })
        }
        Some(d) => d.probs.clone(),
        None => vec![1.0 / outcomes.len() as f64; outcomes.len()],
    };
    Ok(outcomes
        .iter()
        .zip(probs)
        .map(|(o, p)| TransitionEvent::SwitchDraw {
            switch: name.clone(),
            outcome: *o,
            prob: p,
        })
        .collect())
}

/// Apply/skip alternatives for a rule instance with bindings `env`.
/// Unregistered experiments get the uniform default without being
/// registered.
pub fn evaluate_prob(
    rule: &ChanceRule,
    env: &Env,
    registry: &SwitchRegistry,
) -> Result<Vec<TransitionEvent>> {
    let fixed = |p: f64| {
        vec![
            TransitionEvent::FixedDraw {
                source: DrawSource::Rule(rule.id),
                outcome: Outcome::Apply,
                prob: p,
            },
            TransitionEvent::FixedDraw {
                source: DrawSource::Rule(rule.id),
                outcome: Outcome::Skip,
                prob: 1.0 - p,
            },
        ]
    };
    match &rule.prob {
        ProbExpr::Const(p) => Ok(fixed(*p)),
        ProbExpr::Eval(e) => {
            let p = eval_arith(e, env)?.to_f64();
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::ProbabilityOutOfRange {
                    rule: rule.id,
                    value: p,
                });
            }
            Ok(fixed(p))
        }
        ProbExpr::Experiment(name) => {
            let name = env.ground(name, "experiment name", &rule.var_names)?;
            switch_draws(registry, name, &Outcome::rule_outcomes())
        }
        ProbExpr::Anonymous => Err(Error::Compile(format!(
            "rule {} has an unnamed probability",
            rule.id
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_query};

    fn builtin_state(goal: &str) -> ExecutionState {
        let p = parse_program(&format!("go <=> {goal}.")).unwrap();
        let body: Vec<BodyItem> = p.rules[0].body.iter().map(|b| (**b).clone()).collect();
        ExecutionState::with_goal(body, Env::new(p.rules[0].var_count()))
    }

    #[test]
    fn solve_and_fail() {
        let p = parse_program("x <=> y.").unwrap();
        let e = Engine::refined(&p);
        let reg = SwitchRegistry::new();
        let mut s = builtin_state("3 < 5");
        let ex = e.expand(&mut s, &reg).unwrap();
        assert!(matches!(ex, Expansion::Step(TransitionEvent::Solve(_))));
        assert!(s.builtin_ok);
        assert_eq!(e.expand(&mut s, &reg).unwrap(), Expansion::Final);
        let mut s = builtin_state("5 < 3");
        assert!(matches!(
            e.expand(&mut s, &reg).unwrap(),
            Expansion::Step(TransitionEvent::Fail(_))
        ));
        assert_eq!(e.expand(&mut s, &reg).unwrap(), Expansion::Failed);
    }

    #[test]
    fn maybe_apply_alternatives() {
        let p = parse_program("0.5 ?? a <=> b.").unwrap();
        let e = Engine::refined(&p);
        let reg = SwitchRegistry::new();
        let mut s = e.initial_state(&parse_query("a").unwrap());
        assert!(matches!(
            e.expand(&mut s, &reg).unwrap(),
            Expansion::Step(TransitionEvent::Introduce(_))
        ));
        let Expansion::Choice(cp) = e.expand(&mut s, &reg).unwrap() else {
            panic!("expected a choice");
        };
        let probs: Vec<f64> = cp.alternatives.iter().map(|a| a.prob()).collect();
        assert_eq!(probs, vec![0.5, 0.5]);

        let mut applied = s.clone();
        e.resolve(&mut applied, &cp, 0).unwrap();
        assert!(applied.store.is_empty());
        assert!(matches!(applied.goal.last(), Some(Frame::Exec { .. })));

        let mut skipped = s.clone();
        e.resolve(&mut skipped, &cp, 1).unwrap();
        assert!(skipped.history.contains(&HistoryEntry::new(1, &[], &[0])));
        assert_eq!(skipped.store.len(), 1);
        assert_eq!(e.expand(&mut skipped, &reg).unwrap(), Expansion::Final);
    }

    #[test]
    fn eval_probabilities() {
        let p = parse_program("eval(3/(N-1)) ?? node(N) ==> edge(N).").unwrap();
        let r = &p.rules[0];
        let reg = SwitchRegistry::new();
        let probs = |n: i64| {
            let mut env = Env::new(r.var_count());
            env.bind(0, Term::Int(n));
            evaluate_prob(r, &env, &reg).map(|v| v.iter().map(|a| a.prob()).collect::<Vec<_>>())
        };
        assert_eq!(probs(4).unwrap(), vec![1.0, 0.0]);
        assert_eq!(probs(7).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(
            probs(2).unwrap_err(),
            Error::ProbabilityOutOfRange { rule: 1, .. }
        ));
        let p = parse_program("0 ?? a <=> b.").unwrap();
        let v = evaluate_prob(&p.rules[0], &Env::default(), &reg).unwrap();
        assert_eq!(v[1].prob(), 1.0);
    }

    fn instance_for(
        prog: &str,
        store: &str,
        active: u64,
        strategy: Option<PartnerOrder>,
    ) -> Option<Instance> {
        let p = parse_program(prog).unwrap();
        let mut strat = ExecutionStrategy::refined(&p);
        if let Some(o) = strategy {
            strat = strat.with_partner_order(o);
        }
        let e = Engine::new(&p, strat);
        let mut s = e.initial_state(&[]);
        for c in parse_query(store).unwrap() {
            s.introduce(c);
        }
        let c = &s.find(active).unwrap().constraint;
        let occ = e.occurrences.get(&c.functor, c.arity())[0];
        e.find_instance_at(&s, occ, active).unwrap()
    }

    #[test]
    fn partner_order() {
        let prog = "0.5 ?? a, b(X) <=> c(X).";
        let i = instance_for(prog, "a,b(1),b(2)", 0, None).unwrap();
        assert_eq!(i.removed_ids, vec![0, 1]);
        let i = instance_for(prog, "a,b(1),b(2)", 0, Some(PartnerOrder::Descending)).unwrap();
        assert_eq!(i.removed_ids, vec![0, 2]);
        let rps = "rock(P1), scissors(P2) ==> winner(P1).";
        let i = instance_for(rps, "rock(tom),scissors(jon)", 0, None).unwrap();
        assert_eq!(i.kept_ids, vec![0, 1]);
        assert_eq!(i.env.get(0), Some(&Term::atom("tom")));
        assert_eq!(i.env.get(1), Some(&Term::atom("jon")));
    }

    #[test]
    fn considered_instances_are_not_offered_again() {
        let p = parse_program("0.5 ?? a, b(X) <=> c(X).").unwrap();
        let e = Engine::refined(&p);
        let mut s = e.initial_state(&[]);
        for c in parse_query("a,b(1),b(2)").unwrap() {
            s.introduce(c);
        }
        s.history.insert(HistoryEntry::new(1, &[], &[0, 1]));
        let occ = e.occurrences.get(&crate::term::sym("a"), 0)[0];
        let i = e.find_instance_at(&s, occ, 0).unwrap().unwrap();
        assert_eq!(i.removed_ids, vec![0, 2]);
    }

    #[test]
    fn trace_lines() {
        let e = TransitionEvent::SwitchDraw {
            switch: Term::compound("choice", vec![Term::atom("tom")]),
            outcome: Outcome::Branch(2),
            prob: 0.25,
        };
        assert_eq!(e.to_string(), "switch choice(tom) 2 p=0.25");
        let e = TransitionEvent::FixedDraw {
            source: DrawSource::Disjunction { rule: 1, site: 1 },
            outcome: Outcome::Branch(1),
            prob: 0.5,
        };
        assert_eq!(e.to_string(), "fixed rule_1/1 1 p=0.5");
    }
}
