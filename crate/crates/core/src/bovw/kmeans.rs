use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::squared_distance;
use crate::error::{invalid_input, invalid_parameter, Result};

/// Result of a Lloyd run.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    /// Final assignment of each input point.
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid, one entry per
    /// assignment step. Non-increasing.
    pub objective: Vec<f64>,
}

/// Lloyd's k-means from distance-weighted seeding.
///
/// Stops after `max_iter` assignment steps or once assignments no longer
/// change. An emptied cluster is reseeded with the point farthest from its
/// current centroid.
pub fn kmeans_fit(points: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<KMeansFit> {
    if points.is_empty() {
        return Err(invalid_input("k-means needs at least one point"));
    }
    if k == 0 || points.len() < k {
        return Err(invalid_parameter(format!(
            "k-means needs 1 <= K <= N, got K={k} N={}",
            points.len()
        )));
    }
    if max_iter == 0 {
        return Err(invalid_parameter("max_iter must be positive"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(invalid_input("k-means points must share one dimension"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut assignments = vec![usize::MAX; points.len()];
    let mut objective = Vec::new();

    for _ in 0..max_iter {
        let mut changed = false;
        let mut total = 0.0;
        for (p, slot) in points.iter().zip(assignments.iter_mut()) {
            let (j, d) = nearest(p, &centroids);
            total += d;
            if *slot != j {
                *slot = j;
                changed = true;
            }
        }
        objective.push(total);
        if !changed {
            break;
        }
        update_centroids(points, &assignments, &mut centroids);
    }

    Ok(KMeansFit {
        centroids,
        assignments,
        objective,
    })
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut dist: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();

    while centroids.len() < k {
        let total: f64 = dist
            .iter()
            .zip(&chosen)
            .filter(|(_, &c)| !c)
            .map(|(d, _)| d)
            .sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for i in (0..n).filter(|&i| !chosen[i]) {
                if dist[i] > 0.0 {
                    pick = Some(i);
                    target -= dist[i];
                    if target <= 0.0 {
                        break;
                    }
                }
            }
            pick.expect("positive total implies a positive weight")
        } else {
            // All remaining points coincide with chosen centroids.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centroids.push(points[pick].clone());
        let c = centroids.last().expect("just pushed");
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, c));
        }
    }
    centroids
}

fn update_centroids(points: &[Vec<f64>], assignments: &[usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        counts[a] += 1;
        sums[a].iter_mut().zip(p).for_each(|(s, x)| *s += x);
    }
    let old = centroids.to_vec();
    let mut taken = vec![false; points.len()];
    for j in 0..k {
        if counts[j] > 0 {
            let inv = 1.0 / counts[j] as f64;
            centroids[j] = sums[j].iter().map(|s| s * inv).collect();
        } else {
            // Farthest point from the centroid it is currently assigned to.
            let far = points
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken[*i])
                .map(|(i, p)| (i, squared_distance(p, &old[assignments[i]])))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            taken[far.0] = true;
            centroids[j] = points[far.0].clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn two_separated_clusters() {
        let data = pts(&[0.0, 0.1, -0.1, 10.0, 10.1, 9.9]);
        let fit = kmeans_fit(&data, 2, 42, 100).unwrap();
        let mut c: Vec<f64> = fit.centroids.iter().map(|c| c[0]).collect();
        c.sort_by(f64::total_cmp);
        // Exhaustive assignment enumeration for N=6, K=2 gives {0, 10}.
        let oracle = exhaustive_objective(&data);
        assert!((c[0] - 0.0).abs() < 1e-6 && (c[1] - 10.0).abs() < 1e-6);
        assert!((fit.objective.last().unwrap() - oracle).abs() < 1e-9);
    }

    fn exhaustive_objective(data: &[Vec<f64>]) -> f64 {
        let n = data.len();
        (1..(1u32 << n) - 1)
            .map(|mask| {
                let groups: [Vec<f64>; 2] = [0, 1].map(|g| {
                    (0..n)
                        .filter(|&i| (mask >> i & 1) as usize == g)
                        .map(|i| data[i][0])
                        .collect()
                });
                groups
                    .iter()
                    .map(|g| {
                        let m = g.iter().sum::<f64>() / g.len() as f64;
                        g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
                    })
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn n_equals_k_gives_zero_objective() {
        let data = pts(&[3.0, -1.0, 7.5, 2.0]);
        let fit = kmeans_fit(&data, 4, 9, 10).unwrap();
        assert_eq!(*fit.objective.last().unwrap(), 0.0);
        let mut c: Vec<f64> = fit.centroids.iter().map(|c| c[0]).collect();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, vec![-1.0, 2.0, 3.0, 7.5]);
    }

    #[test]
    fn k_one_is_mean() {
        let data = vec![vec![1.0, 2.0], vec![3.0, 6.0], vec![5.0, 1.0]];
        let fit = kmeans_fit(&data, 1, 0, 10).unwrap();
        assert!((fit.centroids[0][0] - 3.0).abs() < 1e-12);
        assert!((fit.centroids[0][1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_points_still_seed_k_centroids() {
        let data = pts(&[1.0, 1.0, 1.0]);
        let fit = kmeans_fit(&data, 3, 5, 10).unwrap();
        assert_eq!(fit.centroids.len(), 3);
        assert_eq!(*fit.objective.last().unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_k() {
        assert!(kmeans_fit(&pts(&[1.0]), 2, 0, 10).is_err());
        assert!(kmeans_fit(&[], 1, 0, 10).is_err());
        assert!(kmeans_fit(&pts(&[1.0]), 0, 0, 10).is_err());
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let data: Vec<Vec<f64>> = (0..50).map(|i| vec![(i * 37 % 11) as f64, (i % 7) as f64]).collect();
        assert_eq!(
            kmeans_fit(&data, 4, 123, 50).unwrap(),
            kmeans_fit(&data, 4, 123, 50).unwrap()
        );
    }

    proptest! {
        #[test]
        fn objective_never_increases(
            raw in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 5..60),
            k in 1usize..6,
            seed in any::<u64>(),
        ) {
            prop_assume!(raw.len() >= k);
            let fit = kmeans_fit(&raw, k, seed, 100).unwrap();
            for w in fit.objective.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0), "{:?}", fit.objective);
            }
        }
    }
}
