//! Shared inputs for the benchmarks.

use std::path::Path;

/// Source text of a file in the workspace `fixtures/` directory.
pub fn fixture(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Query creating a graph of `n` nodes for `random_graph.chrism`.
pub fn graph_query(n: usize) -> String {
    let nodes: Vec<String> = (1..=n).map(|i| format!("node({i})")).collect();
    format!("nb_nodes({n}),{}", nodes.join(","))
}
