//! Example graphs shipped with the library.

use crate::graph::ReductionGraph;

/// `(name, JSON)` for every bundled graph.
pub const BUNDLED: [(&str, &str); 7] = [
    ("loop", include_str!("../data/loop.json")),
    ("ban3", include_str!("../data/ban3.json")),
    ("bridge", include_str!("../data/bridge.json")),
    ("figure_eight", include_str!("../data/figure_eight.json")),
    ("four_cycle", include_str!("../data/four_cycle.json")),
    ("banana_112", include_str!("../data/banana_112.json")),
    ("genus_banana", include_str!("../data/genus_banana.json")),
];

/// Parses a bundled graph by name.
pub fn bundled(name: &str) -> Option<ReductionGraph> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| ReductionGraph::parse(text).expect("bundled graphs are valid"))
}

pub fn all() -> Vec<(&'static str, ReductionGraph)> {
    BUNDLED.iter().map(|(n, text)| (*n, ReductionGraph::parse(text).expect("bundled graphs are valid"))).collect()
}
