use std::collections::VecDeque;

use super::{inertia_of, BaselineResult};
use crate::error::{Error, Result};
use crate::Vector;

fn region(data: &[Vector], i: usize, eps: f64) -> Vec<usize> {
    data.iter()
        .enumerate()
        .filter(|(_, z)| (*z - &data[i]).norm() <= eps)
        .map(|(j, _)| j)
        .collect()
}

/// Density-based clustering. A point is a core point when at least
/// `min_pts` points, itself included, lie within `eps`. Points reachable
/// from no core point are noise (`None`).
pub fn dbscan(data: &[Vector], eps: f64, min_pts: usize) -> Result<BaselineResult> {
    if eps.is_nan() || eps <= 0.0 || min_pts == 0 {
        return Err(Error::InvalidArgument(format!(
            "need eps > 0 and min_pts ≥ 1, got eps = {eps}, min_pts = {min_pts}"
        )));
    }
    let n = data.len();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut k = 0;
    for p in 0..n {
        if visited[p] {
            continue;
        }
        visited[p] = true;
        let neighbors = region(data, p, eps);
        if neighbors.len() < min_pts {
            continue;
        }
        labels[p] = Some(k);
        let mut queue: VecDeque<usize> = neighbors.into();
        while let Some(q) = queue.pop_front() {
            if labels[q].is_none() {
                labels[q] = Some(k);
            }
            if visited[q] {
                continue;
            }
            visited[q] = true;
            let nq = region(data, q, eps);
            if nq.len() >= min_pts {
                queue.extend(
                    nq.into_iter()
                        .filter(|&j| !visited[j] || labels[j].is_none()),
                );
            }
        }
        k += 1;
    }

    let dim = data.first().map_or(0, Vector::len);
    let mut sums = vec![Vector::zeros(dim); k];
    let mut counts = vec![0usize; k];
    for (z, l) in data.iter().zip(&labels) {
        if let Some(l) = *l {
            sums[l] += z;
            counts[l] += 1;
        }
    }
    let centroids: Vec<Vector> = sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| s / c as f64)
        .collect();
    Ok(BaselineResult {
        k_found: k,
        inertia: inertia_of(data, &labels, &centroids),
        assignments: labels,
        centroids,
        replicate_used: 0,
    })
}

/// `q`-quantile of all pairwise Euclidean distances (linear interpolation).
pub fn distance_quantile(data: &[Vector], q: f64) -> Option<f64> {
    let mut d: Vec<f64> = (0..data.len())
        .flat_map(|i| (i + 1..data.len()).map(move |j| (i, j)))
        .map(|(i, j)| (&data[i] - &data[j]).norm())
        .collect();
    if d.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    d.sort_by(f64::total_cmp);
    let pos = q * (d.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(d[lo] + (pos - lo as f64) * (d[hi] - d[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<Vector> {
        xs.iter().map(|&x| Vector::from_vec(vec![x])).collect()
    }

    #[test]
    fn two_groups_and_noise() {
        let data = line(&[0.0, 0.1, 0.2, 0.3, 5.0, 5.1, 5.2, 20.0]);
        let res = dbscan(&data, 0.15, 2).unwrap();
        assert_eq!(res.k_found, 2);
        assert_eq!(
            res.assignments,
            vec![
                Some(0),
                Some(0),
                Some(0),
                Some(0),
                Some(1),
                Some(1),
                Some(1),
                None
            ]
        );
    }

    #[test]
    fn border_points_join_but_do_not_expand() {
        // 0.25 has only two points within eps, so it is a border point of the
        // first cluster and 0.45 stays unreachable.
        let data = line(&[0.0, 0.05, 0.1, 0.25, 0.45]);
        let res = dbscan(&data, 0.15, 3).unwrap();
        assert_eq!(res.k_found, 1);
        assert_eq!(res.assignments[3], Some(0));
        assert_eq!(res.assignments[4], None);
    }

    #[test]
    fn quantile_interpolates() {
        let data = line(&[0.0, 1.0, 3.0]);
        // distances 1, 2, 3
        assert_eq!(distance_quantile(&data, 0.0), Some(1.0));
        assert_eq!(distance_quantile(&data, 0.5), Some(2.0));
        assert_eq!(distance_quantile(&data, 0.75), Some(2.5));
        assert_eq!(distance_quantile(&data[..1], 0.5), None);
    }
}
