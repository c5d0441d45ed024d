use std::collections::BTreeMap;

use chrism_core::{
    check_ambiguity, distribution, for_each_leaf, generate_variants, parse_observation, parse_program,
    parse_query, parse_term, probability, AmbiguityVerdict, Distribution, ExecutionStrategy, Limits, Outcome,
    Program, SwitchRegistry,
};
use proptest::prelude::*;

const ATOMS: [&str; 4] = ["d", "c", "b", "a"];

/// Rules over nullary atoms where every body atom ranks strictly below
/// every head atom, so all derivations terminate.
fn rule_text() -> impl Strategy<Value = String> {
    let prob = prop_oneof![
        Just("0.5".to_string()),
        Just("0.25".to_string()),
        Just("1".to_string()),
        Just("?? ".to_string()),
        (0..3u8).prop_map(|i| format!("sw{i}")),
    ];
    (
        prob,
        1..4usize,
        0..3usize,
        proptest::bool::ANY,
        proptest::collection::vec(0..3usize, 0..3),
    )
        .prop_map(|(prob, top, heads, propagate, body)| {
            let head: Vec<&str> = (0..=heads.min(top)).map(|k| ATOMS[top - k]).collect();
            let low = top - heads.min(top);
            let body: Vec<&str> = body.into_iter().filter(|b| *b < low).map(|b| ATOMS[b]).collect();
            let body = if body.is_empty() {
                "true".to_string()
            } else {
                body.join(", ")
            };
            let arrow = if propagate { "==>" } else { "<=>" };
            let prob = if prob == "?? " {
                prob
            } else {
                format!("{prob} ?? ")
            };
            format!("{prob}{} {arrow} {body}.", head.join(", "))
        })
}

fn program_text() -> impl Strategy<Value = String> {
    proptest::collection::vec(rule_text(), 1..5).prop_map(|rs| rs.join("\n"))
}

fn query_text() -> impl Strategy<Value = String> {
    proptest::collection::vec(0..4usize, 1..4)
        .prop_map(|q| q.iter().map(|i| ATOMS[*i]).collect::<Vec<_>>().join(","))
}

fn dist(p: &Program, q: &str, s: &ExecutionStrategy) -> Distribution {
    distribution(p, &parse_query(q).unwrap(), s, &p.switches, &Limits::default()).unwrap()
}

fn rendered(d: &Distribution) -> BTreeMap<String, f64> {
    d.iter().map(|(k, v)| (k.to_string(), v)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_programs_reparse_to_the_same_program(text in program_text()) {
        let p = parse_program(&text).unwrap();
        let again = parse_program(&p.to_string()).unwrap();
        prop_assert_eq!(&p, &again);
        prop_assert_eq!(p.to_string(), again.to_string());
    }

    #[test]
    fn leaf_mass_is_one_under_every_variant(text in program_text(), q in query_text()) {
        let p = parse_program(&text).unwrap();
        let query = parse_query(&q).unwrap();
        for v in generate_variants(&p, 8) {
            let mut total = 0.0;
            for_each_leaf(&p, &query, &v.strategy, &p.switches, &Limits::default(), |l| total += l.probability).unwrap();
            prop_assert!((total - 1.0).abs() < 1e-9, "{} under {}: {}", q, v.label, total);
        }
    }

    #[test]
    fn full_and_partial_observations_agree(text in program_text(), q in query_text(), pick in 0..4usize) {
        let p = parse_program(&text).unwrap();
        let s = ExecutionStrategy::refined(&p);
        let d = dist(&p, &q, &s);
        let prob = |obs: &str| probability(&p, &parse_observation(obs).unwrap(), &s, &p.switches, &Limits::default()).unwrap();
        for (class, mass) in rendered(&d) {
            if class == "fail" {
                continue;
            }
            let full = prob(&format!("{q} <==> {class}"));
            prop_assert!((full - mass).abs() < 1e-9);
        }
        let atom = ATOMS[pick];
        let with_atom: f64 = rendered(&d)
            .iter()
            .filter(|(k, _)| k.split(',').any(|c| c == atom))
            .map(|(_, v)| v)
            .sum();
        let partial = prob(&format!("{q} ===> {atom}"));
        prop_assert!((partial - with_atom).abs() < 1e-9);
        let without = prob(&format!("{q} ===> ~{atom}"));
        let failed = d.get(&chrism_core::StoreKey::Failed);
        prop_assert!((partial + without + failed - 1.0).abs() < 1e-9);
    }

    /// With at most one single-headed rule per atom there is nothing for
    /// a strategy to choose between.
    #[test]
    fn independent_rules_are_order_insensitive(
        probs in proptest::collection::vec(prop_oneof![Just(0.25), Just(0.5), Just(0.75)], 3),
        q in proptest::collection::vec(1..4usize, 1..5),
        rotate in 0..4usize,
    ) {
        let text: String = (1..4)
            .map(|i| format!("{:?} ?? {} <=> {}.\n", probs[i - 1], ATOMS[i], ATOMS[i - 1]))
            .collect();
        let p = parse_program(&text).unwrap();
        let names: Vec<&str> = q.iter().map(|i| ATOMS[*i]).collect();
        let mut rotated = names.clone();
        rotated.rotate_left(rotate % names.len());
        let s = ExecutionStrategy::refined(&p);
        let a = dist(&p, &names.join(","), &s);
        let b = dist(&p, &rotated.join(","), &s);
        prop_assert!(a.max_difference(&b) < 1e-12);
        let v = check_ambiguity(&p, &parse_query(&names.join(",")).unwrap(), 8, 1e-9).unwrap();
        prop_assert!(matches!(v, AmbiguityVerdict::NotRefutedBy(_)));
    }

    /// `cond` sugar against the hand-expanded rule and a direct evaluation
    /// of both conditions.
    #[test]
    fn cond_sugar_matches_its_expansion(
        k1 in 0..5i64, k2 in 0..5i64, x in 0..5i64, y in 0..5i64,
        ps in proptest::collection::vec(0.05..0.95f64, 4),
    ) {
        let sugar = parse_program(&format!("f(cond A>{k1}, cond B>{k2}) ?? c(A,B) <=> d.")).unwrap();
        let expanded = parse_program(&format!(
            "f(X,Y) ?? c(A,B) <=> (A>{k1} -> X=yes ; X=no), (B>{k2} -> Y=yes ; Y=no) | d."
        ))
        .unwrap();
        let mut reg = SwitchRegistry::new();
        let mut table = BTreeMap::new();
        for (i, (u, v)) in [("yes", "yes"), ("yes", "no"), ("no", "yes"), ("no", "no")].into_iter().enumerate() {
            let name = parse_term(&format!("f({u},{v})")).unwrap();
            reg.set_switch_with(&name, Outcome::rule_outcomes(), vec![ps[i], 1.0 - ps[i]]).unwrap();
            table.insert((u == "yes", v == "yes"), ps[i]);
        }
        let q = parse_query(&format!("c({x},{y})")).unwrap();
        let a = distribution(&sugar, &q, &ExecutionStrategy::refined(&sugar), &reg, &Limits::default()).unwrap();
        let b = distribution(&expanded, &q, &ExecutionStrategy::refined(&expanded), &reg, &Limits::default()).unwrap();
        prop_assert!(a.max_difference(&b) < 1e-12);
        let oracle = table[&(x > k1, y > k2)];
        prop_assert!((a.mass_of("d") - oracle).abs() < 1e-12);
    }
}
