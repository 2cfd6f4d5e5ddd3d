//! Small hand-sized instances used by the examples, the docs and the tests.
//! All edges have unit weight; nodes are zero-indexed.

use crate::types::SimilarityGraph;

/// Nodes 0, 1 and 2 form a triangle, node 3 is isolated; labels `[1, 0, 0, 1]`.
/// Two similar pairs disagree; flipping node 0 removes both.
pub fn triangle_with_isolated() -> (SimilarityGraph, Vec<u8>) {
    let graph = SimilarityGraph::from_triples(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
        .expect("valid fixture");
    (graph, vec![1, 0, 0, 1])
}

/// A four-node path `0 - 1 - 2 - 3` labeled `[1, 1, 0, 0]`. Reaching zero
/// error needs two flips, but no single flip lowers the error.
pub fn chain() -> (SimilarityGraph, Vec<u8>) {
    let graph = SimilarityGraph::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
        .expect("valid fixture");
    (graph, vec![1, 1, 0, 0])
}

/// A four-cycle `0 - 1 - 3 - 2 - 0` labeled `[1, 0, 0, 1]`: every edge
/// disagrees, so the total error is 4.
pub fn square() -> (SimilarityGraph, Vec<u8>) {
    let graph =
        SimilarityGraph::from_triples(4, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
            .expect("valid fixture");
    (graph, vec![1, 0, 0, 1])
}
