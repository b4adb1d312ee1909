//! Lloyd's k-means over domain-normalized rows, used only to order seed
//! inputs. Cluster quality matters less than determinism here.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tabular::Dataset;

const MAX_ITERS: usize = 100;
const MOVEMENT_EPS: f64 = 1e-6;

fn normalize(data: &Dataset) -> Vec<Vec<f64>> {
    let schema = &data.schema;
    data.rows
        .iter()
        .map(|row| {
            (0..schema.arity())
                .map(|i| {
                    let (lo, hi) = schema.domain(i);
                    if hi > lo {
                        (row.get(i) - lo) as f64 / (hi - lo) as f64
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++: each new center is drawn with probability proportional to its
/// squared distance from the nearest already-chosen center.
fn seed_centroids(points: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = points.len() - 1;
            for (i, &d) in d2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass is zero (duplicate points); pick uniformly.
            rng.gen_range(0..points.len())
        };
        centroids.push(points[idx].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, centroids.last().unwrap()));
        }
    }
    centroids
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = dist2(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Partition dataset rows into `k` clusters of row indices. Row order is
/// preserved within each cluster. Empty clusters keep their centroid and
/// simply come out as empty index lists.
pub fn kmeans(data: &Dataset, k: usize, rng: &mut impl Rng) -> Result<Vec<Vec<usize>>> {
    if k == 0 {
        return Err(Error::Config("cluster count must be at least 1".into()));
    }
    let rows = data.len();
    if rows < k {
        return Err(Error::TooFewRows { k, rows });
    }
    let points = normalize(data);
    let mut centroids = seed_centroids(&points, k, rng);
    let mut assignment = vec![0usize; rows];
    for _ in 0..MAX_ITERS {
        for (i, p) in points.iter().enumerate() {
            assignment[i] = nearest(p, &centroids);
        }
        let dims = points[0].len();
        let mut sums = vec![vec![0.0; dims]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assignment[i]] += 1;
            for (s, &v) in sums[assignment[i]].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut movement: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            movement = movement.max(dist2(&new, &centroids[c]).sqrt());
            centroids[c] = new;
        }
        if movement < MOVEMENT_EPS {
            break;
        }
    }
    for (i, p) in points.iter().enumerate() {
        assignment[i] = nearest(p, &centroids);
    }
    let mut clusters = vec![Vec::new(); k];
    for (i, &c) in assignment.iter().enumerate() {
        clusters[c].push(i);
    }
    Ok(clusters)
}
