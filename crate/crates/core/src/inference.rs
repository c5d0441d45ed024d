//! Exact inference by exhaustive enumeration of the derivation tree.

use std::collections::BTreeMap;

use crate::engine::{
    Engine, ExecutionStrategy, Expansion, SampleOutcome, TransitionEvent, DEFAULT_MAX_DEPTH,
};
use crate::error::{Error, Result};
use crate::runtime::distribution::{Distribution, StoreKey};
use crate::runtime::state::ExecutionState;
use crate::runtime::switches::{Outcome, SwitchRegistry};
use crate::syntax::ast::{Observation, ObservationKind, Program};
use crate::term::{Constraint, Term};

/// Default bound on the number of leaves of one enumeration.
pub const DEFAULT_MAX_LEAVES: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_depth: u64,
    pub max_leaves: u64,
    /// Also descend into switch outcomes whose current probability is zero,
    /// so explanation structure does not depend on the parameters.
    pub keep_zero_switch_branches: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_depth: DEFAULT_MAX_DEPTH,
            max_leaves: DEFAULT_MAX_LEAVES,
            keep_zero_switch_branches: false,
        }
    }
}

/// Switch draws along one derivation, with the product of all other
/// probabilities on the path.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub counts: BTreeMap<(Term, Outcome), u32>,
    /// Outcome space of every drawn switch, as seen at the draw.
    pub spaces: BTreeMap<Term, Vec<Outcome>>,
    pub fixed_factor: f64,
}

impl Default for Explanation {
    fn default() -> Self {
        Explanation {
            counts: BTreeMap::new(),
            spaces: BTreeMap::new(),
            fixed_factor: 1.0,
        }
    }
}

impl Explanation {
    /// Records alternative `i` of a choice point.
    fn record(&mut self, alternatives: &[TransitionEvent], i: usize) {
        match &alternatives[i] {
            TransitionEvent::SwitchDraw { switch, outcome, .. } => {
                *self.counts.entry((switch.clone(), *outcome)).or_insert(0) += 1;
                if !self.spaces.contains_key(switch) {
                    let space = alternatives
                        .iter()
                        .filter_map(|a| match a {
                            TransitionEvent::SwitchDraw { outcome, .. } => Some(*outcome),
                            _ => None,
                        })
                        .collect();
                    self.spaces.insert(switch.clone(), space);
                }
            }
            TransitionEvent::FixedDraw { prob, .. } => self.fixed_factor *= prob,
            _ => {}
        }
    }

    /// `fixedFactor * prod p(sw, v)^count`, with switches missing from the
    /// registry at their uniform default.
    pub fn probability(&self, registry: &SwitchRegistry) -> f64 {
        let mut p = self.fixed_factor;
        for ((sw, o), n) in &self.counts {
            let q = match registry.get(sw) {
                Some(d) => d.prob(*o).unwrap_or(0.0),
                None => 1.0 / self.spaces.get(sw).map_or(1, |s| s.len()) as f64,
            };
            p *= q.powi(*n as i32);
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLeaf {
    pub outcome: SampleOutcome,
    pub probability: f64,
    pub explanation: Explanation,
}

impl WeightedLeaf {
    pub fn key(&self) -> StoreKey {
        match &self.outcome {
            SampleOutcome::Final(s) => StoreKey::of(s),
            SampleOutcome::Failed => StoreKey::Failed,
        }
    }
}

/// Depth-first walk over every leaf of the derivation tree, in outcome
/// order, handing each leaf to `visit`. Zero-probability branches are
/// pruned unless `limits.keep_zero_switch_branches` asks otherwise.
/// Returns the number of leaves visited.
pub fn for_each_leaf(
    program: &Program,
    query: &[Constraint],
    strategy: &ExecutionStrategy,
    registry: &SwitchRegistry,
    limits: &Limits,
    mut visit: impl FnMut(WeightedLeaf),
) -> Result<u64> {
    let engine = Engine::new(program, strategy.clone()).with_max_depth(limits.max_depth);
    let mut count = 0u64;
    let mut stack: Vec<(ExecutionState, f64, Explanation)> =
        vec![(engine.initial_state(query), 1.0, Explanation::default())];
    while let Some((mut state, mut prob, mut expl)) = stack.pop() {
        loop {
            match engine.expand(&mut state, registry)? {
                Expansion::Step(_) => continue,
                Expansion::Final | Expansion::Failed => {
                    if count >= limits.max_leaves {
                        return Err(Error::LeafLimit(limits.max_leaves));
                    }
                    count += 1;
                    let outcome = if state.is_failed() {
                        SampleOutcome::Failed
                    } else {
                        SampleOutcome::Final(state.chr_store())
                    };
                    visit(WeightedLeaf {
                        outcome,
                        probability: prob,
                        explanation: expl,
                    });
                    break;
                }
                Expansion::Choice(cp) => {
                    let keep = |ev: &TransitionEvent| {
                        ev.prob() > 0.0
                            || (limits.keep_zero_switch_branches
                                && matches!(ev, TransitionEvent::SwitchDraw { .. }))
                    };
                    let live: Vec<usize> = (0..cp.alternatives.len())
                        .filter(|i| keep(&cp.alternatives[*i]))
                        .collect();
                    // Later alternatives go on the stack first so the first is explored first.
                    for &i in live.iter().skip(1).rev() {
                        let mut s = state.clone();
                        engine.resolve(&mut s, &cp, i)?;
                        let mut e = expl.clone();
                        e.record(&cp.alternatives, i);
                        stack.push((s, prob * cp.alternatives[i].prob(), e));
                    }
                    let Some(&first) = live.first() else {
                        break;
                    };
                    engine.resolve(&mut state, &cp, first)?;
                    expl.record(&cp.alternatives, first);
                    prob *= cp.alternatives[first].prob();
                }
            }
        }
    }
    Ok(count)
}

/// Every leaf of the derivation tree, in outcome order.
pub fn enumerate(
    program: &Program,
    query: &[Constraint],
    strategy: &ExecutionStrategy,
    registry: &SwitchRegistry,
    limits: &Limits,
) -> Result<Vec<WeightedLeaf>> {
    let mut leaves = Vec::new();
    for_each_leaf(program, query, strategy, registry, limits, |l| leaves.push(l))?;
    Ok(leaves)
}

fn sorted(cs: &[Constraint]) -> Vec<&Constraint> {
    let mut v: Vec<&Constraint> = cs.iter().collect();
    v.sort();
    v
}

/// Multiset equality.
pub fn match_full(store: &[Constraint], answer: &[Constraint]) -> bool {
    store.len() == answer.len() && sorted(store) == sorted(answer)
}

/// `store - answer` as a multiset, or `None` if `answer` is not included.
fn multiset_difference<'a>(store: &'a [Constraint], answer: &[Constraint]) -> Option<Vec<&'a Constraint>> {
    let mut rest = sorted(store);
    for a in answer {
        let i = rest.binary_search(&a).ok()?;
        rest.remove(i);
    }
    Some(rest)
}

/// `answer` is included in `store`, and no negated constraint occurs in
/// what remains of the store once `answer` is taken out.
pub fn match_partial(store: &[Constraint], answer: &[Constraint], negated: &[Constraint]) -> bool {
    match multiset_difference(store, answer) {
        None => false,
        Some(rest) => negated.iter().all(|n| rest.binary_search(&n).is_err()),
    }
}

/// Whether a leaf satisfies the observation. Failed leaves never do.
pub fn observation_matches(obs: &Observation, outcome: &SampleOutcome) -> bool {
    match outcome {
        SampleOutcome::Failed => false,
        SampleOutcome::Final(store) => match obs.kind {
            ObservationKind::Full => match_full(store, &obs.answer),
            ObservationKind::Partial => match_partial(store, &obs.answer, &obs.negated),
        },
    }
}

/// Total probability of the leaves matching `obs`.
pub fn probability(
    program: &Program,
    obs: &Observation,
    strategy: &ExecutionStrategy,
    registry: &SwitchRegistry,
    limits: &Limits,
) -> Result<f64> {
    let mut total = 0.0;
    for_each_leaf(program, &obs.query, strategy, registry, limits, |l| {
        if observation_matches(obs, &l.outcome) {
            total += l.probability;
        }
    })?;
    Ok(total)
}

/// Leaves aggregated into final-state equivalence classes.
pub fn distribution(
    program: &Program,
    query: &[Constraint],
    strategy: &ExecutionStrategy,
    registry: &SwitchRegistry,
    limits: &Limits,
) -> Result<Distribution> {
    let mut d = Distribution::new();
    for_each_leaf(program, query, strategy, registry, limits, |l| {
        d.add(l.key(), l.probability)
    })?;
    Ok(d)
}

pub fn aggregate(leaves: &[WeightedLeaf]) -> Distribution {
    let mut d = Distribution::new();
    for l in leaves {
        d.add(l.key(), l.probability);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_observation, parse_program, parse_query};

    const COIN: &str = "toss <=> head:0.5 ; tail:0.5.";
    const RPS: &str = "player(P) <=> choice(P) ?? rock(P) ; scissors(P) ; paper(P).\n\
                       rock(P1), scissors(P2) ==> winner(P1).\n\
                       scissors(P1), paper(P2) ==> winner(P1).\n\
                       paper(P1), rock(P2) ==> winner(P1).";

    fn leaves(prog: &str, query: &str) -> (Program, Vec<WeightedLeaf>) {
        let p = parse_program(prog).unwrap();
        let s = ExecutionStrategy::refined(&p);
        let l = enumerate(
            &p,
            &parse_query(query).unwrap(),
            &s,
            &p.switches,
            &Limits::default(),
        )
        .unwrap();
        (p, l)
    }

    fn prob(prog: &str, obs: &str) -> f64 {
        let p = parse_program(prog).unwrap();
        let s = ExecutionStrategy::refined(&p);
        probability(
            &p,
            &parse_observation(obs).unwrap(),
            &s,
            &p.switches,
            &Limits::default(),
        )
        .unwrap()
    }

    fn cs(s: &str) -> Vec<Constraint> {
        parse_query(s).unwrap()
    }

    #[test]
    fn coin_leaves() {
        let (_, l) = leaves(COIN, "toss");
        assert_eq!(l.len(), 2);
        assert_eq!(l[0].outcome, SampleOutcome::Final(cs("head")));
        assert_eq!(l[0].probability, 0.5);
        let (_, l) = leaves(COIN, "toss,toss");
        assert_eq!(l.len(), 4);
        assert!(l.iter().all(|x| x.probability == 0.25));
    }

    #[test]
    fn rps_tree_has_nine_leaves() {
        let (p, l) = leaves(RPS, "player(tom),player(jon)");
        assert_eq!(l.len(), 9);
        for leaf in &l {
            assert!((leaf.probability - 1.0 / 9.0).abs() < 1e-15);
            let recomputed = leaf.explanation.probability(&p.switches);
            assert!((recomputed - leaf.probability).abs() < 1e-12);
        }
    }

    #[test]
    fn full_matching() {
        assert!(match_full(&cs("head,tail"), &cs("tail,head")));
        assert!(!match_full(&cs("head,head"), &cs("head")));
        assert!(match_full(&[], &[]));
    }

    #[test]
    fn partial_matching() {
        assert!(match_partial(
            &cs("rock(jon),paper(tom),winner(tom)"),
            &cs("winner(tom)"),
            &[]
        ));
        let tie = cs("rock(jon),rock(tom)");
        assert!(match_partial(&tie, &[], &cs("winner(tom)")));
        assert!(match_partial(&tie, &[], &cs("winner(jon)")));
        assert!(match_partial(&tie, &[], &cs("winner(tom),winner(jon)")));
        assert!(!match_partial(
            &cs("winner(tom)"),
            &[],
            &cs("winner(tom),winner(jon)")
        ));
        assert!(match_partial(&cs("a"), &cs("a"), &cs("a")));
        assert!(!match_partial(&cs("a"), &cs("a,a"), &[]));
    }

    #[test]
    fn observation_probabilities() {
        assert_eq!(prob(COIN, "toss,toss <==> head,tail"), 0.5);
        assert_eq!(prob(COIN, "toss <==> head"), 0.5);
        let p = prob(RPS, "player(tom),player(jon) ===> winner(tom)");
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(prob("0.5 ?? a <=> b.\n0.5 ?? a <=> c.", "a <==> a"), 0.25);
    }

    #[test]
    fn two_rule_distributions() {
        let p = parse_program("0.5 ?? a <=> b.\n0.5 ?? a <=> c.").unwrap();
        let q = cs("a");
        let s = ExecutionStrategy::refined(&p);
        let d = distribution(&p, &q, &s, &p.switches, &Limits::default()).unwrap();
        assert_eq!(
            (d.mass_of("b"), d.mass_of("c"), d.mass_of("a")),
            (0.5, 0.25, 0.25)
        );
        let s = s.with_rule_order(vec![2, 1]);
        let d = distribution(&p, &q, &s, &p.switches, &Limits::default()).unwrap();
        assert_eq!(
            (d.mass_of("c"), d.mass_of("b"), d.mass_of("a")),
            (0.5, 0.25, 0.25)
        );
    }

    #[test]
    fn failures_keep_their_mass() {
        let p = parse_program("t <=> ok:0.5 ; bad:0.5.\nbad <=> fail.").unwrap();
        let s = ExecutionStrategy::refined(&p);
        let d = distribution(&p, &cs("t"), &s, &p.switches, &Limits::default()).unwrap();
        assert_eq!(d.get(&StoreKey::Failed), 0.5);
        assert_eq!(d.total(), 1.0);
    }

    #[test]
    fn leaf_limit() {
        let p = parse_program(COIN).unwrap();
        let s = ExecutionStrategy::refined(&p);
        let limits = Limits {
            max_leaves: 3,
            ..Limits::default()
        };
        let err = enumerate(&p, &cs("toss,toss"), &s, &p.switches, &limits).unwrap_err();
        assert_eq!(err, Error::LeafLimit(3));
    }
}
