use crate::Vector;

/// Dense matrix of pairwise Euclidean distances.
#[derive(Clone, Debug)]
pub struct PairwiseDistances {
    n: usize,
    d: Vec<f64>,
}

impl PairwiseDistances {
    pub fn new(data: &[Vector]) -> Self {
        let n = data.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = (&data[i] - &data[j]).norm();
                d[i * n + j] = x;
                d[j * n + i] = x;
            }
        }
        Self { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

/// Mean silhouette coefficient. Unassigned points form one extra group;
/// points alone in their group score 0. `None` if fewer than two groups.
pub fn silhouette(data: &[Vector], assignments: &[Option<usize>]) -> Option<f64> {
    silhouette_with(&PairwiseDistances::new(data), assignments)
}

pub fn silhouette_with(dist: &PairwiseDistances, assignments: &[Option<usize>]) -> Option<f64> {
    assert_eq!(dist.len(), assignments.len());
    let noise = assignments.iter().flatten().max().map_or(0, |&k| k + 1);
    let group: Vec<usize> = assignments.iter().map(|a| a.unwrap_or(noise)).collect();
    let ngroups = noise + 1;
    let mut sizes = vec![0usize; ngroups];
    group.iter().for_each(|&g| sizes[g] += 1);
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return None;
    }

    let mut total = 0.0;
    let mut sums = vec![0.0; ngroups];
    for i in 0..dist.len() {
        let gi = group[i];
        if sizes[gi] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (j, &gj) in group.iter().enumerate() {
            sums[gj] += dist.get(i, j);
        }
        let a = sums[gi] / (sizes[gi] - 1) as f64;
        let b = (0..ngroups)
            .filter(|&g| g != gi && sizes[g] > 0)
            .map(|g| sums[g] / sizes[g] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Some(total / dist.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> Vec<Vector> {
        xs.iter().map(|&x| Vector::from_vec(vec![x])).collect()
    }

    #[test]
    fn hand_computed_example() {
        // groups {0, 1} and {4}: s(0) = (4-1)/4, s(1) = (3-1)/3, s(4) = 0
        let data = line(&[0.0, 1.0, 4.0]);
        let s = silhouette(&data, &[Some(0), Some(0), Some(1)]).unwrap();
        let expect = (0.75 + 2.0 / 3.0) / 3.0;
        assert!((s - expect).abs() < 1e-15);
    }

    #[test]
    fn bounded_and_undefined_cases() {
        let data = line(&[0.0, 0.1, 5.0, 5.2, 9.0]);
        let s = silhouette(&data, &[Some(1), Some(0), Some(1), None, Some(0)]).unwrap();
        assert!((-1.0..=1.0).contains(&s));
        assert_eq!(silhouette(&data, &[Some(0); 5]), None);
        assert_eq!(silhouette(&data, &[None; 5]), None);
    }

    #[test]
    fn noise_counts_as_its_own_group() {
        let data = line(&[0.0, 0.1, 5.0, 5.1]);
        let a = silhouette(&data, &[Some(0), Some(0), None, None]).unwrap();
        let b = silhouette(&data, &[Some(0), Some(0), Some(1), Some(1)]).unwrap();
        assert_eq!(a, b);
    }
}
