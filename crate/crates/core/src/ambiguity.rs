//! Ambiguity refutation: compare answer distributions across strategies.
//!
//! A differing pair proves ambiguity. Agreement over the tested variants
//! proves nothing, which the verdict type spells out.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{ActivationOrder, ExecutionStrategy, PartnerOrder, Scheduling};
use crate::error::Result;
use crate::inference::{distribution, Limits};
use crate::runtime::distribution::Distribution;
use crate::runtime::switches::SwitchRegistry;
use crate::syntax::ast::Program;
use crate::term::{render_conjunction, Constraint};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategyVariant {
    pub label: String,
    pub strategy: ExecutionStrategy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityOptions {
    /// Number of variants to try.
    pub k: usize,
    pub tolerance: f64,
    /// Also try global scheduling, outside the refined strategy class.
    pub wide: bool,
    /// Seed for the extra rule-order permutations.
    pub seed: u64,
    pub limits: Limits,
}

impl Default for AmbiguityOptions {
    fn default() -> Self {
        AmbiguityOptions {
            k: 8,
            tolerance: DEFAULT_TOLERANCE,
            wide: false,
            seed: 0,
            limits: Limits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub query: Vec<Constraint>,
    pub first: (String, Distribution),
    pub second: (String, Distribution),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AmbiguityVerdict {
    Ambiguous(Box<Witness>),
    /// No two of the `k` tested variants disagree. Not a proof of
    /// unambiguity.
    NotRefutedBy(usize),
}

impl AmbiguityVerdict {
    pub fn is_ambiguous(&self) -> bool {
        matches!(self, AmbiguityVerdict::Ambiguous(_))
    }
}

impl fmt::Display for AmbiguityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmbiguityVerdict::NotRefutedBy(k) => {
                writeln!(
                    f,
                    "not refuted by {k} strategies (this does not prove unambiguity)"
                )
            }
            AmbiguityVerdict::Ambiguous(w) => {
                writeln!(f, "ambiguous for query {}", render_conjunction(&w.query))?;
                for (label, d) in [&w.first, &w.second] {
                    writeln!(f, "strategy {label}:")?;
                    for (k, p) in d.iter() {
                        writeln!(f, "  {k}\t{p:.6}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

fn variant(strategy: ExecutionStrategy) -> StrategyVariant {
    StrategyVariant {
        label: strategy.to_string(),
        strategy,
    }
}

/// Candidate strategies in a fixed order: refined default, reversed rule
/// order, descending partners, reversed activation, reversed activation
/// with descending partners, global scheduling (when `wide`), then seeded
/// rule-order permutations. Duplicates are dropped; at most `k` are kept.
pub fn generate_variants_with(program: &Program, k: usize, wide: bool, seed: u64) -> Vec<StrategyVariant> {
    let base = ExecutionStrategy::refined(program);
    let reversed: Vec<_> = base.rule_order.iter().rev().copied().collect();
    let mut candidates = vec![
        base.clone(),
        base.clone().with_rule_order(reversed.clone()),
        base.clone().with_partner_order(PartnerOrder::Descending),
        base.clone().with_activation(ActivationOrder::RightToLeft),
        base.clone()
            .with_activation(ActivationOrder::RightToLeft)
            .with_partner_order(PartnerOrder::Descending),
    ];
    if wide {
        candidates.push(base.clone().with_scheduling(Scheduling::Global));
        candidates.push(
            base.clone()
                .with_scheduling(Scheduling::Global)
                .with_rule_order(reversed),
        );
    }
    let mut out: Vec<StrategyVariant> = Vec::new();
    let push = |s: ExecutionStrategy, out: &mut Vec<StrategyVariant>| {
        if out.len() < k && !out.iter().any(|v| v.strategy == s) {
            out.push(variant(s));
        }
    };
    for c in candidates {
        push(c, &mut out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = base.rule_order.clone();
    for attempt in 0..20 * k {
        if out.len() >= k {
            break;
        }
        order.shuffle(&mut rng);
        let mut s = base.clone().with_rule_order(order.clone());
        if attempt % 2 == 1 {
            s = s.with_partner_order(PartnerOrder::Descending);
        }
        push(s, &mut out);
    }
    out
}

pub fn generate_variants(program: &Program, k: usize) -> Vec<StrategyVariant> {
    generate_variants_with(program, k, false, 0)
}

/// Computes the answer distribution of `query` under each variant and
/// reports the first pair differing by more than the tolerance on some
/// class.
pub fn check_ambiguity_with(
    program: &Program,
    query: &[Constraint],
    registry: &SwitchRegistry,
    options: &AmbiguityOptions,
) -> Result<AmbiguityVerdict> {
    let variants = generate_variants_with(program, options.k, options.wide, options.seed);
    let dists: Vec<Distribution> = variants
        .par_iter()
        .map(|v| distribution(program, query, &v.strategy, registry, &options.limits))
        .collect::<Result<_>>()?;
    for i in 0..dists.len() {
        for j in i + 1..dists.len() {
            if dists[i].max_difference(&dists[j]) > options.tolerance {
                return Ok(AmbiguityVerdict::Ambiguous(Box::new(Witness {
                    query: query.to_vec(),
                    first: (variants[i].label.clone(), dists[i].clone()),
                    second: (variants[j].label.clone(), dists[j].clone()),
                })));
            }
        }
    }
    Ok(AmbiguityVerdict::NotRefutedBy(variants.len()))
}

pub fn check_ambiguity(
    program: &Program,
    query: &[Constraint],
    k: usize,
    tolerance: f64,
) -> Result<AmbiguityVerdict> {
    let options = AmbiguityOptions {
        k,
        tolerance,
        ..AmbiguityOptions::default()
    };
    check_ambiguity_with(program, query, &program.switches, &options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_query};

    const TWO_RULES: &str = "0.5 ?? a <=> b.\n0.5 ?? a <=> c.";
    const PARTNERS: &str = "0.5 ?? a, b(X) <=> c(X).";

    #[test]
    fn two_rule_variants() {
        let p = parse_program(TWO_RULES).unwrap();
        let v = generate_variants(&p, 2);
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].strategy.rule_order, vec![1, 2]);
        assert_eq!(v[1].strategy.rule_order, vec![2, 1]);
    }

    #[test]
    fn single_rule_variants() {
        let p = parse_program(PARTNERS).unwrap();
        let v = generate_variants(&p, 2);
        assert_eq!(v[0].strategy.partner_order, PartnerOrder::Ascending);
        assert_eq!(v[1].strategy.partner_order, PartnerOrder::Descending);
        let all = generate_variants(&p, 100);
        assert_eq!(all.len(), 4);
        for (i, a) in all.iter().enumerate() {
            assert!(all[i + 1..].iter().all(|b| b.strategy != a.strategy));
        }
    }

    #[test]
    fn two_rule_program_is_ambiguous() {
        let p = parse_program(TWO_RULES).unwrap();
        let v = check_ambiguity(&p, &parse_query("a").unwrap(), 2, DEFAULT_TOLERANCE).unwrap();
        let AmbiguityVerdict::Ambiguous(w) = v else {
            panic!("expected ambiguity");
        };
        assert_eq!(w.first.1.mass_of("b"), 0.5);
        assert_eq!(w.second.1.mass_of("c"), 0.5);
    }

    #[test]
    fn partner_order_witness() {
        let p = parse_program(PARTNERS).unwrap();
        let v = check_ambiguity(&p, &parse_query("b(1),b(2),a").unwrap(), 2, DEFAULT_TOLERANCE).unwrap();
        let AmbiguityVerdict::Ambiguous(w) = v else {
            panic!("expected ambiguity");
        };
        assert_eq!(w.first.1.mass_of("c(1),b(2)"), 0.5);
        assert_eq!(w.first.1.mass_of("c(2),b(1)"), 0.25);
        assert_eq!(w.second.1.mass_of("c(1),b(2)"), 0.25);
        assert_eq!(w.second.1.mass_of("c(2),b(1)"), 0.5);
        let v = check_ambiguity(&p, &parse_query("a,b(1),b(2)").unwrap(), 8, DEFAULT_TOLERANCE).unwrap();
        assert!(v.is_ambiguous());
    }

    #[test]
    fn propagation_only_is_not_refuted() {
        let p = parse_program(
            "rock(P1), scissors(P2) ==> winner(P1).\n\
             scissors(P1), paper(P2) ==> winner(P1).\n\
             paper(P1), rock(P2) ==> winner(P1).",
        )
        .unwrap();
        let q = parse_query("rock(tom),scissors(jon),paper(ann)").unwrap();
        assert_eq!(
            check_ambiguity(&p, &q, 6, DEFAULT_TOLERANCE).unwrap(),
            AmbiguityVerdict::NotRefutedBy(6)
        );
    }

    #[test]
    fn verdicts_are_stable() {
        let p = parse_program("0.5 ?? a <=> b.\n0.5 ?? b <=> c.\n0.5 ?? a <=> c.").unwrap();
        let q = parse_query("a").unwrap();
        let opts = AmbiguityOptions {
            wide: true,
            ..AmbiguityOptions::default()
        };
        let a = check_ambiguity_with(&p, &q, &p.switches, &opts).unwrap();
        let b = check_ambiguity_with(&p, &q, &p.switches, &opts).unwrap();
        assert_eq!(a, b);
    }
}
