use centrex_core::baselines::{silhouette_with, PairwiseDistances};
use centrex_core::centrex::classify;
use centrex_core::{CentroidEstimate, CompressionModel, Result, Vector};

/// Most frequent value; ties go to the smallest.
pub fn mode(values: &[usize]) -> usize {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let mut best = (0, 0);
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        if j > best.1 {
            best = (sorted[i], j);
        }
        i += j;
    }
    best.0
}

/// Mean silhouette of the pooled data classified by each sensor's
/// centroids (nearest in the whitened metric). Sensors whose centroids put
/// everything in one cluster have no silhouette and are left out; `None`
/// if no sensor has one.
pub fn sensor_silhouette(
    model: &CompressionModel,
    data: &[Vector],
    dist: &PairwiseDistances,
    per_sensor: &[Vec<CentroidEstimate>],
) -> Result<Option<f64>> {
    mean_silhouette(dist, per_sensor.iter().map(|c| classify(model, data, c)))
}

/// Same, for Euclidean nearest-centroid classification.
pub fn sensor_silhouette_euclidean(
    data: &[Vector],
    dist: &PairwiseDistances,
    per_sensor: &[Vec<Vector>],
) -> Option<f64> {
    let labels = per_sensor.iter().map(|cs| {
        Ok(data
            .iter()
            .map(|z| {
                cs.iter()
                    .enumerate()
                    .map(|(k, c)| (k, (z - c).norm_squared()))
                    .fold((0, f64::INFINITY), |a, x| if x.1 < a.1 { x } else { a })
                    .0
            })
            .collect())
    });
    mean_silhouette(dist, labels).expect("no fallible step")
}

fn mean_silhouette(
    dist: &PairwiseDistances,
    labels: impl Iterator<Item = Result<Vec<usize>>>,
) -> Result<Option<f64>> {
    let mut sum = 0.0;
    let mut count = 0;
    for l in labels {
        let a: Vec<Option<usize>> = l?.into_iter().map(Some).collect();
        if let Some(s) = silhouette_with(dist, &a) {
            sum += s;
            count += 1;
        }
    }
    Ok((count > 0).then(|| sum / count as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_prefers_smallest_on_ties() {
        assert_eq!(mode(&[3, 1, 3, 1, 2]), 1);
        assert_eq!(mode(&[4, 4, 2]), 4);
        assert_eq!(mode(&[]), 0);
    }
}
