//! Individual-fairness metrics over a similarity graph. Every unordered edge
//! is counted once.

use crate::error::{Error, Result};
use crate::types::{check_labels, check_len, LabelVector, SimilarityGraph};

/// Weighted number of similar pairs whose labels disagree.
pub fn total_error(labels: &[u8], graph: &SimilarityGraph) -> Result<f64> {
    check_len(graph.num_nodes(), labels.len())?;
    check_labels(labels)?;
    Ok(graph
        .edges()
        .iter()
        .filter(|e| labels[e.i] != labels[e.j])
        .fold(0.0, |acc, e| acc + e.w))
}

/// `Σ w · |values_i − values_j|`, the total error of a relaxed solution.
pub fn fractional_total_error(values: &[f64], graph: &SimilarityGraph) -> Result<f64> {
    check_len(graph.num_nodes(), values.len())?;
    if let Some(index) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::ValueOutOfRange {
            index,
            value: values[index],
        });
    }
    Ok(graph
        .edges()
        .iter()
        .fold(0.0, |acc, e| acc + e.w * (values[e.i] - values[e.j]).abs()))
}

pub fn num_flips(labels: &LabelVector) -> usize {
    labels.num_flips()
}

/// One minus the similarity-weighted fraction of disagreeing predictions on
/// a test graph.
pub fn consistency_score(predictions: &[u8], test_graph: &SimilarityGraph) -> Result<f64> {
    let total = test_graph.total_weight();
    if test_graph.num_edges() == 0 || total <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let violated = total_error(predictions, test_graph)?;
    Ok((1.0 - violated / total).clamp(0.0, 1.0))
}

/// The consistency score evaluated on training labels rather than model
/// predictions.
pub fn data_consistency(labels: &[u8], graph: &SimilarityGraph) -> Result<f64> {
    consistency_score(labels, graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{square, triangle_with_isolated};

    #[test]
    fn total_error_examples() {
        let (g, y) = triangle_with_isolated();
        assert_eq!(total_error(&y, &g).unwrap(), 2.0);
        assert_eq!(total_error(&[1, 1, 1, 1], &g).unwrap(), 0.0);
        let (g, y) = square();
        assert_eq!(total_error(&y, &g).unwrap(), 4.0);
        assert!(matches!(
            total_error(&[0, 1], &g),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn fractional_total_error_examples() {
        let (g, _) = square();
        assert!((fractional_total_error(&[0.5, 0.0, 0.0, 0.5], &g).unwrap() - 2.0).abs() < 1e-12);
        assert!((fractional_total_error(&[0.1, 0.0, 0.0, 0.9], &g).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(
            fractional_total_error(&[1.0, 0.0, 0.0, 1.0], &g).unwrap(),
            4.0
        );
        assert!(matches!(
            fractional_total_error(&[1.2, 0.0, 0.0, 0.0], &g),
            Err(Error::ValueOutOfRange { index: 0, .. })
        ));
    }

    #[test]
    fn flip_counts() {
        let l = LabelVector::from_parts(vec![0, 0, 0, 1], vec![1, 0, 0, 1]).unwrap();
        assert_eq!(num_flips(&l), 1);
        let l = LabelVector::from_parts(vec![0, 0, 0, 0], vec![1, 0, 0, 1]).unwrap();
        assert_eq!(num_flips(&l), 2);
        assert_eq!(num_flips(&LabelVector::new(vec![1, 0]).unwrap()), 0);
    }

    #[test]
    fn consistency_examples() {
        let (g, y) = triangle_with_isolated();
        assert_eq!(consistency_score(&[1, 1, 1, 1], &g).unwrap(), 1.0);
        assert!((consistency_score(&y, &g).unwrap() - (1.0 - 2.0 / 3.0)).abs() < 1e-12);

        // complete bipartite K_{2,2} with alternating predictions
        let k22 =
            SimilarityGraph::from_triples(4, &[(0, 1, 1.0), (0, 3, 1.0), (2, 1, 1.0), (2, 3, 1.0)])
                .unwrap();
        assert_eq!(consistency_score(&[0, 1, 0, 1], &k22).unwrap(), 0.0);

        assert!(matches!(
            consistency_score(&[0, 1], &SimilarityGraph::empty(2)),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn data_consistency_examples() {
        let (g, y) = triangle_with_isolated();
        assert!((data_consistency(&y, &g).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(data_consistency(&[0, 0, 0, 0], &g).unwrap(), 1.0);
        let (g, y) = square();
        assert_eq!(data_consistency(&y, &g).unwrap(), 0.0);
    }
}
