//! Derivation tree as a Graphviz digraph. Deterministic steps are
//! collapsed: nodes are choice points and leaves, edges are the
//! probabilistic alternatives taken.

use std::fmt::Write as _;

use chrism_core::engine::Expansion;
use chrism_core::{Constraint, Engine, Error, Limits, SwitchRegistry};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn store_label(store: &[Constraint]) -> String {
    if store.is_empty() {
        return "true".into();
    }
    store.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

pub fn derivation_tree(
    engine: &Engine<'_>,
    query: &[Constraint],
    registry: &SwitchRegistry,
    limits: &Limits,
) -> Result<String, Error> {
    let mut out = String::from("digraph derivation {\n  node [shape=box, fontname=\"monospace\"];\n");
    let mut next_id = 0usize;
    let mut leaves = 0u64;
    let mut stack = vec![(engine.initial_state(query), 1.0f64, None::<(usize, String)>)];
    while let Some((mut state, prob, parent)) = stack.pop() {
        let id = next_id;
        next_id += 1;
        if let Some((from, label)) = &parent {
            let _ = writeln!(out, "  n{from} -> n{id} [label=\"{}\"];", escape(label));
        }
        loop {
            match engine.expand(&mut state, registry)? {
                Expansion::Step(_) => continue,
                Expansion::Final | Expansion::Failed => {
                    leaves += 1;
                    if leaves > limits.max_leaves {
                        return Err(Error::LeafLimit(limits.max_leaves));
                    }
                    let label = if state.is_failed() {
                        "fail".to_string()
                    } else {
                        store_label(&state.chr_store())
                    };
                    let _ = writeln!(
                        out,
                        "  n{id} [label=\"{}\\np={prob:.6}\", shape=ellipse];",
                        escape(&label)
                    );
                    break;
                }
                Expansion::Choice(cp) if cp.alternatives.iter().filter(|a| a.prob() > 0.0).count() == 1 => {
                    let i = cp.alternatives.iter().position(|a| a.prob() > 0.0).unwrap();
                    engine.resolve(&mut state, &cp, i)?;
                }
                Expansion::Choice(cp) => {
                    let _ = writeln!(
                        out,
                        "  n{id} [label=\"{}\"];",
                        escape(&store_label(&state.chr_store()))
                    );
                    for i in (0..cp.alternatives.len()).rev() {
                        let alt = &cp.alternatives[i];
                        if alt.prob() <= 0.0 {
                            continue;
                        }
                        let mut s = state.clone();
                        engine.resolve(&mut s, &cp, i)?;
                        stack.push((s, prob * alt.prob(), Some((id, alt.to_string()))));
                    }
                    break;
                }
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrism_core::{parse_program, parse_query};

    #[test]
    fn coin_tree_has_two_leaves() {
        let p = parse_program("toss <=> head:0.5 ; tail:0.5.").unwrap();
        let e = Engine::refined(&p);
        let dot =
            derivation_tree(&e, &parse_query("toss").unwrap(), &p.switches, &Limits::default()).unwrap();
        assert!(dot.starts_with("digraph derivation {"));
        assert_eq!(dot.matches("shape=ellipse").count(), 2);
        assert_eq!(dot.matches(" -> ").count(), 2);
        assert!(dot.contains("head\\np=0.500000"));
    }
}
