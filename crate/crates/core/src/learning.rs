//! Parameter learning: EM over enumerated explanations.

use std::collections::BTreeMap;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::ExecutionStrategy;
use crate::error::{Error, Result};
use crate::inference::{enumerate, observation_matches, Explanation, Limits, WeightedLeaf};
use crate::runtime::switches::{Outcome, SwitchRegistry};
use crate::syntax::ast::{Observation, Program};
use crate::term::{Constraint, Term};

/// Explanations of one observation, grouped by signature.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedExplanations {
    pub observation: Observation,
    /// `(explanation, number of leaves sharing it)`
    pub explanations: Vec<(Explanation, u64)>,
}

impl ObservedExplanations {
    pub fn probability(&self, registry: &SwitchRegistry) -> f64 {
        self.explanations
            .iter()
            .map(|(e, m)| *m as f64 * e.probability(registry))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationData {
    pub items: Vec<ObservedExplanations>,
}

impl ObservationData {
    /// Switches drawn in at least one explanation, with their outcome
    /// spaces.
    pub fn switches(&self) -> BTreeMap<Term, Vec<Outcome>> {
        self.items
            .iter()
            .flat_map(|o| o.explanations.iter())
            .flat_map(|(e, _)| e.spaces.iter().map(|(s, o)| (s.clone(), o.clone())))
            .collect()
    }
}

/// Starting point of an EM run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmInit {
    /// The registry as given (uniform defaults for unseen switches).
    Registry,
    /// Independent Dirichlet(1) draws per switch.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// Stop once the log-likelihood changes by less than this.
    pub tolerance: f64,
    /// Pseudo-count added to every outcome in the M-step.
    pub smoothing: f64,
    pub init: EmInit,
    /// Runs from successive seeds when `init` is random; the best final
    /// log-likelihood wins.
    pub restarts: usize,
    pub limits: Limits,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iterations: 500,
            tolerance: 1e-6,
            smoothing: 0.0,
            init: EmInit::Registry,
            restarts: 1,
            limits: Limits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmResult {
    pub registry: SwitchRegistry,
    /// Log-likelihood at the start and after every M-step.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Registry switches that no explanation draws.
    pub unlearnable: Vec<Term>,
}

impl EmResult {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihood.last().unwrap_or(&f64::NEG_INFINITY)
    }
}

fn group(leaves: &[WeightedLeaf], obs: &Observation) -> Vec<(Explanation, u64)> {
    let mut groups: Vec<(Explanation, u64)> = Vec::new();
    for leaf in leaves.iter().filter(|l| observation_matches(obs, &l.outcome)) {
        let e = &leaf.explanation;
        match groups
            .iter_mut()
            .find(|(g, _)| g.counts == e.counts && g.fixed_factor.to_bits() == e.fixed_factor.to_bits())
        {
            Some((_, m)) => *m += 1,
            None => groups.push((e.clone(), 1)),
        }
    }
    groups
}

fn structural_limits(limits: &Limits) -> Limits {
    Limits {
        keep_zero_switch_branches: true,
        ..*limits
    }
}

/// Explanations of `obs`: matching leaves grouped by switch counts and
/// fixed factor.
pub fn collect_explanations(
    program: &Program,
    obs: &Observation,
    strategy: &ExecutionStrategy,
    registry: &SwitchRegistry,
    limits: &Limits,
) -> Result<Vec<(Explanation, u64)>> {
    let leaves = enumerate(
        program,
        &obs.query,
        strategy,
        registry,
        &structural_limits(limits),
    )?;
    let groups = group(&leaves, obs);
    let item = ObservedExplanations {
        observation: obs.clone(),
        explanations: groups,
    };
    if item.explanations.is_empty() || item.probability(registry) <= 0.0 {
        return Err(Error::ImpossibleObservation(obs.render()));
    }
    Ok(item.explanations)
}

/// Explanations for every observation; each distinct query is enumerated
/// once.
pub fn collect_data(
    program: &Program,
    observations: &[Observation],
    strategy: &ExecutionStrategy,
    registry: &SwitchRegistry,
    limits: &Limits,
) -> Result<ObservationData> {
    let limits = structural_limits(limits);
    let mut queries: Vec<&[Constraint]> = observations.iter().map(|o| o.query.as_slice()).collect();
    queries.sort();
    queries.dedup();
    let trees: BTreeMap<&[Constraint], Vec<WeightedLeaf>> = queries
        .par_iter()
        .map(|q| enumerate(program, q, strategy, registry, &limits).map(|l| (*q, l)))
        .collect::<Result<_>>()?;
    let items = observations
        .iter()
        .map(|o| {
            let explanations = group(&trees[o.query.as_slice()], o);
            if explanations.is_empty() {
                return Err(Error::ImpossibleObservation(o.render()));
            }
            Ok(ObservedExplanations {
                observation: o.clone(),
                explanations,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ObservationData { items })
}

/// `sum_o c_o ln P(o)`
pub fn log_likelihood(data: &ObservationData, registry: &SwitchRegistry) -> Result<f64> {
    let mut ll = 0.0;
    for item in &data.items {
        let p = item.probability(registry);
        if p <= 0.0 {
            return Err(Error::ImpossibleObservation(item.observation.render()));
        }
        ll += item.observation.count as f64 * p.ln();
    }
    Ok(ll)
}

fn initial_registry(
    registry: &SwitchRegistry,
    switches: &BTreeMap<Term, Vec<Outcome>>,
    init: EmInit,
) -> Result<SwitchRegistry> {
    let mut reg = registry.clone();
    for (sw, outcomes) in switches {
        reg.lookup_or_default(sw, outcomes)?;
    }
    if let EmInit::Random { seed } = init {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for sw in switches.keys() {
            let k = reg.get(sw).map(|d| d.outcomes.len()).unwrap_or(0);
            let w: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let total: f64 = w.iter().sum();
            let mut probs: Vec<f64> = w.iter().map(|x| x / total).collect();
            renormalize(&mut probs);
            reg.set_switch(sw, probs)?;
        }
    }
    Ok(reg)
}

/// Pushes rounding error into the largest entry so the sum is 1.
fn renormalize(probs: &mut [f64]) {
    let sum: f64 = probs.iter().sum();
    if let Some(max) = probs.iter_mut().max_by(|a, b| a.total_cmp(b)) {
        *max += 1.0 - sum;
        *max = max.clamp(0.0, 1.0);
    }
}

fn em_run(
    data: &ObservationData,
    switches: &BTreeMap<Term, Vec<Outcome>>,
    mut reg: SwitchRegistry,
    config: &EmConfig,
) -> Result<(SwitchRegistry, Vec<f64>, usize, bool)> {
    let mut trace = vec![log_likelihood(data, &reg)?];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let mut expected: BTreeMap<&Term, Vec<f64>> = switches
            .keys()
            .map(|s| (s, vec![0.0; reg.get(s).map_or(0, |d| d.outcomes.len())]))
            .collect();
        for item in &data.items {
            let p_o = item.probability(&reg);
            let c = item.observation.count as f64;
            for (e, m) in &item.explanations {
                let weight = *m as f64 * e.probability(&reg) / p_o;
                if weight == 0.0 {
                    continue;
                }
                for ((sw, o), n) in &e.counts {
                    let d = reg.get(sw).expect("learnable switch is registered");
                    let i = d.outcomes.iter().position(|x| x == o).expect("outcome in space");
                    expected.get_mut(sw).expect("switch collected")[i] += c * weight * *n as f64;
                }
            }
        }
        for (sw, counts) in expected {
            let smoothed: Vec<f64> = counts.iter().map(|x| x + config.smoothing).collect();
            let total: f64 = smoothed.iter().sum();
            if total <= 0.0 {
                warn!("switch {sw} has no expected counts; keeping its distribution");
                continue;
            }
            let mut probs: Vec<f64> = smoothed.iter().map(|x| x / total).collect();
            renormalize(&mut probs);
            reg.set_switch(sw, probs)?;
        }
        let ll = log_likelihood(data, &reg)?;
        let delta = ll - trace.last().copied().unwrap_or(f64::NEG_INFINITY);
        trace.push(ll);
        if delta.abs() < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok((reg, trace, iterations, converged))
}

/// Maximum-likelihood estimation of the switches drawn by the observations'
/// explanations. Rule probabilities given as constants or expressions are
/// data, not parameters, and are never changed.
pub fn em_learn(
    program: &Program,
    observations: &[Observation],
    strategy: &ExecutionStrategy,
    registry: &SwitchRegistry,
    config: &EmConfig,
) -> Result<EmResult> {
    if config.tolerance.is_nan() || config.tolerance <= 0.0 || config.smoothing < 0.0 {
        return Err(Error::Compile(
            "EM needs a positive tolerance and non-negative smoothing".into(),
        ));
    }
    let data = collect_data(program, observations, strategy, registry, &config.limits)?;
    let switches = data.switches();
    let seeds: Vec<EmInit> = match config.init {
        EmInit::Registry => vec![EmInit::Registry],
        EmInit::Random { seed } => (0..config.restarts.max(1) as u64)
            .map(|i| EmInit::Random {
                seed: seed.wrapping_add(i),
            })
            .collect(),
    };
    let mut best: Option<(SwitchRegistry, Vec<f64>, usize, bool)> = None;
    for init in seeds {
        let reg = initial_registry(registry, &switches, init)?;
        let run = em_run(&data, &switches, reg, config)?;
        let better = match &best {
            None => true,
            Some(b) => run.1.last() > b.1.last(),
        };
        if better {
            best = Some(run);
        }
    }
    let (registry_out, log_likelihood, iterations, converged) = best.expect("at least one run");
    let unlearnable = registry_out
        .iter()
        .map(|(k, _)| k)
        .filter(|k| !switches.contains_key(*k))
        .cloned()
        .collect();
    Ok(EmResult {
        registry: registry_out,
        log_likelihood,
        iterations,
        converged,
        unlearnable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ExecutionStrategy;
    use crate::syntax::{parse_observation, parse_observations, parse_program};

    const COIN: &str = "toss <=> head:0.5 ; tail:0.5.";
    const RPS: &str = "player(P) <=> choice(P) ?? rock(P) ; scissors(P) ; paper(P).\n\
                       rock(P1), scissors(P2) ==> winner(P1).\n\
                       scissors(P1), paper(P2) ==> winner(P1).\n\
                       paper(P1), rock(P2) ==> winner(P1).";

    fn explanations(prog: &str, obs: &str) -> Result<Vec<(Explanation, u64)>> {
        let p = parse_program(prog).unwrap();
        let s = ExecutionStrategy::refined(&p);
        collect_explanations(
            &p,
            &parse_observation(obs).unwrap(),
            &s,
            &p.switches,
            &Limits::default(),
        )
    }

    #[test]
    fn coin_has_one_explanation() {
        let p = parse_program(COIN).unwrap();
        let e = explanations(COIN, "toss <==> head").unwrap();
        assert_eq!(e.len(), 1);
        assert!(e[0].0.counts.is_empty());
        assert_eq!(e[0].1, 1);
        assert_eq!(e[0].0.probability(&p.switches), 0.5);
    }

    #[test]
    fn rps_winner_explanations() {
        let e = explanations(RPS, "player(tom),player(jon) ===> winner(tom)").unwrap();
        assert_eq!(e.len(), 3);
        let tom = Term::compound("choice", vec![Term::atom("tom")]);
        let jon = Term::compound("choice", vec![Term::atom("jon")]);
        for (x, m) in &e {
            assert_eq!(*m, 1);
            let drawn = |sw: &Term| {
                x.counts
                    .iter()
                    .filter(|((s, _), _)| s == sw)
                    .map(|(_, n)| n)
                    .sum::<u32>()
            };
            assert_eq!(drawn(&tom), 1);
            assert_eq!(drawn(&jon), 1);
        }
    }

    #[test]
    fn impossible_observation() {
        let err = explanations(COIN, "toss <==> toss").unwrap_err();
        assert!(matches!(err, Error::ImpossibleObservation(_)));
    }

    fn coin_data(obs: &str) -> (Program, ObservationData) {
        let p = parse_program(COIN).unwrap();
        let s = ExecutionStrategy::refined(&p);
        let o = parse_observations(obs).unwrap();
        let d = collect_data(&p, &o, &s, &p.switches, &Limits::default()).unwrap();
        (p, d)
    }

    #[test]
    fn log_likelihood_is_additive() {
        let (p, d) = coin_data("toss <==> head");
        assert_eq!(log_likelihood(&d, &p.switches).unwrap(), 0.5f64.ln());
        let (p, d) = coin_data("2 times toss <==> head");
        assert_eq!(log_likelihood(&d, &p.switches).unwrap(), 2.0 * 0.5f64.ln());
    }

    #[test]
    fn full_observations_recover_frequencies() {
        let p = parse_program("c <=> s ?? x ; y ; z.").unwrap();
        let s = ExecutionStrategy::refined(&p);
        let obs = parse_observations("3 times c <==> x\n5 times c <==> y\n2 times c <==> z").unwrap();
        let r = em_learn(&p, &obs, &s, &p.switches, &EmConfig::default()).unwrap();
        let d = r.registry.get(&Term::atom("s")).unwrap();
        for (got, want) in d.probs.iter().zip([0.3, 0.5, 0.2]) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert!(r.converged);
        assert!(r.iterations <= 2);
    }

    #[test]
    fn rps_likelihood_increases() {
        let p = parse_program(RPS).unwrap();
        let s = ExecutionStrategy::refined(&p);
        let obs = parse_observations(
            "50 times player(tom),player(jon) ===> winner(tom)\n\
             20 times player(tom),player(jon) ===> winner(jon)\n\
             30 times player(tom),player(jon) ===> ~winner(tom),~winner(jon)",
        )
        .unwrap();
        let config = EmConfig {
            init: EmInit::Random { seed: 1 },
            ..EmConfig::default()
        };
        let r = em_learn(&p, &obs, &s, &p.switches, &config).unwrap();
        for w in r.log_likelihood.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "{} then {}", w[0], w[1]);
        }
        assert!(r.log_likelihood.last() > r.log_likelihood.first());
        for (_, d) in r.registry.iter() {
            assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fixed_probabilities_are_not_parameters() {
        let p = parse_program("0.3 ?? a <=> b.\na <=> s ?? c ; d.").unwrap();
        let s = ExecutionStrategy::refined(&p);
        let obs = parse_observations("a <==> c\na <==> b").unwrap();
        let r = em_learn(&p, &obs, &s, &p.switches, &EmConfig::default()).unwrap();
        let names: Vec<&Term> = r.registry.iter().map(|(k, _)| k).collect();
        assert_eq!(names, vec![&Term::atom("s")]);
        assert_eq!(r.registry.get(&Term::atom("s")).unwrap().probs, vec![1.0, 0.0]);
    }
}
