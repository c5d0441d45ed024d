//! Random switches: named experiments with a finite outcome space.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::term::Term;

/// Tolerance on the total mass of a switch distribution.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Outcome label of a switch draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    /// The considered rule instance fires.
    Apply,
    /// The considered rule instance is recorded but not applied.
    Skip,
    /// 1-based branch of a probabilistic disjunction.
    Branch(u32),
}

impl Outcome {
    pub fn rule_outcomes() -> Vec<Outcome> {
        vec![Outcome::Apply, Outcome::Skip]
    }

    pub fn branch_outcomes(k: usize) -> Vec<Outcome> {
        (1..=k as u32).map(Outcome::Branch).collect()
    }

    pub fn parse(s: &str) -> Option<Outcome> {
        match s {
            "apply" => Some(Outcome::Apply),
            "skip" => Some(Outcome::Skip),
            n => n.parse::<u32>().ok().filter(|n| *n > 0).map(Outcome::Branch),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Apply => write!(f, "apply"),
            Outcome::Skip => write!(f, "skip"),
            Outcome::Branch(i) => write!(f, "{i}"),
        }
    }
}

pub(crate) fn render_outcomes(os: &[Outcome]) -> String {
    let v: Vec<String> = os.iter().map(|o| o.to_string()).collect();
    format!("[{}]", v.join(","))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchDist {
    pub outcomes: Vec<Outcome>,
    pub probs: Vec<f64>,
    /// Set by `set_sw` directives in the program text.
    pub declared: bool,
}

impl SwitchDist {
    pub fn uniform(outcomes: &[Outcome]) -> SwitchDist {
        let p = 1.0 / outcomes.len() as f64;
        SwitchDist {
            outcomes: outcomes.to_vec(),
            probs: vec![p; outcomes.len()],
            declared: false,
        }
    }

    pub fn prob(&self, outcome: Outcome) -> Option<f64> {
        self.outcomes
            .iter()
            .position(|o| *o == outcome)
            .map(|i| self.probs[i])
    }
}

pub fn validate_distribution(name: &Term, outcomes: &[Outcome], probs: &[f64]) -> Result<()> {
    let invalid = |reason: String| Error::InvalidDistribution {
        name: name.to_string(),
        reason,
    };
    if outcomes.is_empty() {
        return Err(invalid("empty outcome space".into()));
    }
    if probs.len() != outcomes.len() {
        return Err(invalid(format!(
            "{} probabilities given for {} outcomes",
            probs.len(),
            outcomes.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(invalid(format!("probability {p} is outside [0,1]")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(invalid(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(())
}

/// Map from ground experiment name to its distribution, ordered by the
/// standard order of terms (so `show_sw` output is deterministic).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SwitchRegistry {
    entries: BTreeMap<Term, SwitchDist>,
}

impl SwitchRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &Term) -> Option<&SwitchDist> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &SwitchDist)> {
        self.entries.iter()
    }

    pub fn contains(&self, name: &Term) -> bool {
        self.entries.contains_key(name)
    }

    /// Existing entry for `name`, or a freshly registered uniform
    /// distribution over `outcomes`.
    pub fn lookup_or_default(&mut self, name: &Term, outcomes: &[Outcome]) -> Result<&SwitchDist> {
        if !name.is_ground() {
            return Err(Error::Instantiation(format!(
                "experiment name {name} is not ground"
            )));
        }
        if !self.entries.contains_key(name) {
            self.entries.insert(name.clone(), SwitchDist::uniform(outcomes));
        }
        let entry = &self.entries[name];
        if entry.outcomes != outcomes {
            return Err(Error::OutcomeMismatch {
                name: name.to_string(),
                requested: render_outcomes(outcomes),
                registered: render_outcomes(&entry.outcomes),
            });
        }
        Ok(entry)
    }

    /// Replaces the distribution of a registered switch.
    pub fn set_switch(&mut self, name: &Term, probs: Vec<f64>) -> Result<()> {
        let entry = self
            .entries
            .get_mut(name)
            .ok_or_else(|| Error::UnknownSwitch(name.to_string()))?;
        validate_distribution(name, &entry.outcomes, &probs)?;
        entry.probs = probs;
        Ok(())
    }

    /// Registers (or replaces) a switch with an explicit outcome space.
    pub fn set_switch_with(&mut self, name: &Term, outcomes: Vec<Outcome>, probs: Vec<f64>) -> Result<()> {
        if !name.is_ground() {
            return Err(Error::Compile(format!("switch name {name} is not ground")));
        }
        validate_distribution(name, &outcomes, &probs)?;
        if let Some(e) = self.entries.get(name) {
            if e.outcomes != outcomes {
                return Err(Error::OutcomeMismatch {
                    name: name.to_string(),
                    requested: render_outcomes(&outcomes),
                    registered: render_outcomes(&e.outcomes),
                });
            }
        }
        let declared = self.entries.get(name).is_some_and(|e| e.declared);
        self.entries.insert(
            name.clone(),
            SwitchDist {
                outcomes,
                probs,
                declared,
            },
        );
        Ok(())
    }

    pub(crate) fn mark_declared(&mut self, name: &Term) {
        if let Some(e) = self.entries.get_mut(name) {
            e.declared = true;
        }
    }

    /// Overlays `other`'s entries on top of this registry.
    pub fn merge_from(&mut self, other: &SwitchRegistry) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    /// One `Switch <name>: <outcome> (p: <prob>) ...` line per switch,
    /// probabilities to 5 decimals.
    pub fn show_sw(&self) -> String {
        let mut out = String::new();
        for (name, d) in &self.entries {
            out.push_str(&format!("Switch {name}:"));
            for (o, p) in d.outcomes.iter().zip(&d.probs) {
                out.push_str(&format!(" {o} (p: {p:.5})"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn choice(p: &str) -> Term {
        Term::compound("choice", vec![Term::atom(p)])
    }

    #[test]
    fn defaults_are_uniform() {
        let mut r = SwitchRegistry::new();
        let d = r
            .lookup_or_default(&Term::atom("rule_3"), &Outcome::rule_outcomes())
            .unwrap();
        assert_eq!(d.probs, vec![0.5, 0.5]);
        assert_eq!(d.outcomes, vec![Outcome::Apply, Outcome::Skip]);
        let d = r
            .lookup_or_default(&choice("tom"), &Outcome::branch_outcomes(3))
            .unwrap();
        assert_eq!(d.probs, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn existing_entry_is_returned_unchanged() {
        let mut r = SwitchRegistry::new();
        r.set_switch_with(&choice("jon"), Outcome::branch_outcomes(3), vec![0.6, 0.07, 0.33])
            .unwrap();
        let d = r
            .lookup_or_default(&choice("jon"), &Outcome::branch_outcomes(3))
            .unwrap();
        assert_eq!(d.probs, vec![0.6, 0.07, 0.33]);
    }

    #[test]
    fn non_ground_and_mismatched_lookups_fail() {
        let mut r = SwitchRegistry::new();
        let err = r
            .lookup_or_default(&Term::Var(0), &Outcome::rule_outcomes())
            .unwrap_err();
        assert!(matches!(err, Error::Instantiation(_)));
        r.lookup_or_default(&Term::atom("s"), &Outcome::rule_outcomes())
            .unwrap();
        let err = r
            .lookup_or_default(&Term::atom("s"), &Outcome::branch_outcomes(2))
            .unwrap_err();
        assert!(matches!(err, Error::OutcomeMismatch { .. }));
    }

    #[test]
    fn set_switch_validates() {
        let mut r = SwitchRegistry::new();
        let name = choice("jon");
        r.lookup_or_default(&name, &Outcome::branch_outcomes(3)).unwrap();
        // Normalised learned values; sum is 1 within tolerance.
        r.set_switch(&name, vec![0.6, 0.07, 0.33]).unwrap();
        assert!(r.set_switch(&name, vec![0.5, 0.6]).is_err());
        assert!(r.set_switch(&name, vec![0.5, 0.6, -0.1]).is_err());
        assert!(r.set_switch(&name, vec![0.5, 0.6, 0.1]).is_err());
        let rule = Term::atom("rule_1");
        r.lookup_or_default(&rule, &Outcome::rule_outcomes()).unwrap();
        r.set_switch(&rule, vec![1.0, 0.0]).unwrap();
        assert_eq!(r.get(&rule).unwrap().prob(Outcome::Apply), Some(1.0));
        assert!(matches!(
            r.set_switch(&Term::atom("nope"), vec![1.0]),
            Err(Error::UnknownSwitch(_))
        ));
    }

    #[test]
    fn show_sw_format() {
        let mut r = SwitchRegistry::new();
        r.set_switch_with(
            &choice("tom"),
            Outcome::branch_outcomes(3),
            vec![0.0842, 0.20973, 0.70607],
        )
        .unwrap();
        r.set_switch_with(
            &choice("jon"),
            Outcome::branch_outcomes(3),
            vec![0.60057, 0.06536, 0.33407],
        )
        .unwrap();
        assert_eq!(
            r.show_sw(),
            "Switch choice(jon): 1 (p: 0.60057) 2 (p: 0.06536) 3 (p: 0.33407)\n\
             Switch choice(tom): 1 (p: 0.08420) 2 (p: 0.20973) 3 (p: 0.70607)\n"
        );
    }

    proptest! {
        #[test]
        fn distributions_stay_normalised(ops in proptest::collection::vec((0u8..4, 1usize..5, proptest::collection::vec(0.01f64..1.0, 1..5)), 1..30)) {
            let mut r = SwitchRegistry::new();
            for (name, k, raw) in ops {
                let t = Term::compound("s", vec![Term::Int(name as i64)]);
                let outcomes = Outcome::branch_outcomes(k);
                if raw.len() == k {
                    let total: f64 = raw.iter().sum();
                    let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
                    let _ = r.set_switch_with(&t, outcomes, probs);
                } else {
                    let _ = r.lookup_or_default(&t, &outcomes);
                }
            }
            for (_, d) in r.iter() {
                let s: f64 = d.probs.iter().sum();
                prop_assert!((s - 1.0).abs() <= SUM_TOLERANCE);
            }
        }
    }
}
