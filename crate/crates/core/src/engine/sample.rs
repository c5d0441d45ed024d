//! Random walks to a leaf of the derivation tree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transition::{Engine, Expansion, TransitionEvent};
use crate::error::Result;
use crate::runtime::state::ExecutionState;
use crate::runtime::switches::SwitchRegistry;
use crate::term::Constraint;

/// Picks one alternative at a probabilistic transition. Alternatives with
/// probability zero are never picked.
pub trait Chooser {
    fn choose(&mut self, probs: &[f64]) -> usize;
}

/// Draws with exactly the annotated probabilities from a seeded generator.
#[derive(Debug, Clone)]
pub struct RandomChooser {
    rng: ChaCha8Rng,
}

impl RandomChooser {
    pub fn new(seed: u64) -> Self {
        RandomChooser {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Chooser for RandomChooser {
    fn choose(&mut self, probs: &[f64]) -> usize {
        let positive: Vec<usize> = (0..probs.len()).filter(|i| probs[*i] > 0.0).collect();
        if positive.len() == 1 {
            return positive[0];
        }
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        for &i in &positive {
            acc += probs[i];
            if u < acc {
                return i;
            }
        }
        *positive.last().expect("no alternative with positive probability")
    }
}

/// Replays a fixed sequence of alternative indices.
#[derive(Debug, Clone)]
pub struct ScriptedChooser {
    script: Vec<usize>,
    next: usize,
}

impl ScriptedChooser {
    pub fn new(script: Vec<usize>) -> Self {
        ScriptedChooser { script, next: 0 }
    }
}

impl Chooser for ScriptedChooser {
    fn choose(&mut self, probs: &[f64]) -> usize {
        let i = self.script.get(self.next).copied().unwrap_or(0);
        self.next += 1;
        assert!(i < probs.len(), "scripted choice {i} out of range");
        i
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleOutcome {
    /// `chr(S)` of the final state, sorted.
    Final(Vec<Constraint>),
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub outcome: SampleOutcome,
    pub trace: Vec<TransitionEvent>,
    /// Product of the probabilities along the path.
    pub probability: f64,
}

impl Engine<'_> {
    /// Runs `state` to a leaf, resolving every choice with `chooser`.
    pub fn run(
        &self,
        mut state: ExecutionState,
        registry: &SwitchRegistry,
        chooser: &mut dyn Chooser,
    ) -> Result<Sample> {
        let mut trace = Vec::new();
        let mut probability = 1.0;
        loop {
            match self.expand(&mut state, registry)? {
                Expansion::Final => {
                    return Ok(Sample {
                        outcome: SampleOutcome::Final(state.chr_store()),
                        trace,
                        probability,
                    })
                }
                Expansion::Failed => {
                    return Ok(Sample {
                        outcome: SampleOutcome::Failed,
                        trace,
                        probability,
                    })
                }
                Expansion::Step(ev) => trace.push(ev),
                Expansion::Choice(cp) => {
                    let probs: Vec<f64> = cp.alternatives.iter().map(|a| a.prob()).collect();
                    let i = chooser.choose(&probs);
                    self.resolve(&mut state, &cp, i)?;
                    probability *= probs[i];
                    trace.push(cp.alternatives[i].clone());
                }
            }
        }
    }

    pub fn sample(&self, query: &[Constraint], registry: &SwitchRegistry, seed: u64) -> Result<Sample> {
        self.run(self.initial_state(query), registry, &mut RandomChooser::new(seed))
    }
}

/// One seeded random derivation under the refined strategy. Identical seed,
/// program and query give identical results.
pub fn run_sample(
    program: &crate::syntax::ast::Program,
    query: &[Constraint],
    registry: &SwitchRegistry,
    seed: u64,
) -> Result<Sample> {
    Engine::refined(program).sample(query, registry, seed)
}
