//! Seeded instance generators for tests, experiments and the `report` command.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measure::SignedMeasure;
use crate::metric::{FiniteMetricSpace, Subspace};
use crate::projection::{GentlePartition, RandomProjection};

pub type InstanceRng = ChaCha8Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// `a, b, c` with `d(a,b) = 1`, `d(a,c) = 2`, `d(b,c) = 1.5`, based at `a`.
pub fn three_point_space() -> FiniteMetricSpace {
    FiniteMetricSpace::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]],
        0,
    )
    .expect("static space")
}

/// Points on the real line at the given coordinates, based at the first one.
pub fn line_space(coords: &[f64]) -> FiniteMetricSpace {
    let dist = coords
        .iter()
        .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
        .collect();
    FiniteMetricSpace::new(labels(coords.len()), dist, 0).expect("line space")
}

/// `rows × cols` integer grid with the ℓ₁ metric scaled by `step`, based at the origin.
pub fn grid_space(rows: usize, cols: usize, step: f64) -> FiniteMetricSpace {
    let pts: Vec<(f64, f64)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r as f64, c as f64)))
        .collect();
    let dist = pts
        .iter()
        .map(|p| pts.iter().map(|q| step * ((p.0 - q.0).abs() + (p.1 - q.1).abs())).collect())
        .collect();
    FiniteMetricSpace::new(labels(pts.len()), dist, 0).expect("grid space")
}

/// `n` uniform points in `[0, 10]^dim` with the Euclidean metric.
pub fn random_euclidean_space(seed: u64, n: usize, dim: usize) -> FiniteMetricSpace {
    let mut r = rng(seed);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| r.gen_range(0.0..10.0)).collect())
        .collect();
    let dist = pts
        .iter()
        .map(|p| {
            pts.iter()
                .map(|q| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .collect()
        })
        .collect();
    FiniteMetricSpace::new(labels(n), dist, 0).expect("euclidean space")
}

/// Shortest-path metric of a random connected weighted graph.
pub fn random_graph_space(seed: u64, n: usize) -> FiniteMetricSpace {
    let mut r = rng(seed);
    let inf = f64::INFINITY;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    // random spanning tree plus extra edges
    for i in 1..n {
        let j = r.gen_range(0..i);
        let w = r.gen_range(0.5..3.0);
        d[i][j] = w;
        d[j][i] = w;
    }
    for _ in 0..n {
        let (i, j) = (r.gen_range(0..n), r.gen_range(0..n));
        if i != j {
            let w = r.gen_range(0.5..3.0);
            d[i][j] = d[i][j].min(w);
            d[j][i] = d[i][j];
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    FiniteMetricSpace::new(labels(n), d, 0).expect("graph space")
}

/// A random subset of size `k` (clamped to `1..=n`) containing the basepoint.
pub fn random_subset(r: &mut InstanceRng, space: &Arc<FiniteMetricSpace>, k: usize) -> Subspace {
    let n = space.len();
    let base = space.basepoint();
    let mut others: Vec<usize> = (0..n).filter(|&i| i != base).collect();
    others.shuffle(r);
    let mut members = vec![base];
    members.extend(others.into_iter().take(k.clamp(1, n) - 1));
    Subspace::new(space.clone(), &members).expect("contains basepoint")
}

/// Random probability weights on `k` atoms, with a random number of exact zeros.
pub fn random_simplex_weights(r: &mut InstanceRng, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k)
        .map(|_| if r.gen_bool(0.25) { 0.0 } else { r.gen_range(0.0..1.0) })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[r.gen_range(0..k)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

pub fn random_probability(r: &mut InstanceRng, space: &Arc<FiniteMetricSpace>) -> SignedMeasure {
    let w = random_simplex_weights(r, space.len());
    SignedMeasure::from_dense(space.clone(), &w).expect("dense weights")
}

pub fn random_signed_measure(r: &mut InstanceRng, space: &Arc<FiniteMetricSpace>) -> SignedMeasure {
    let w: Vec<f64> = (0..space.len())
        .map(|_| if r.gen_bool(0.3) { 0.0 } else { r.gen_range(-2.0..2.0) })
        .collect();
    SignedMeasure::from_dense(space.clone(), &w).expect("dense weights")
}

/// Strong projection whose exterior rows are random probability vectors on `M`.
pub fn random_strong_projection(r: &mut InstanceRng, subset: &Subspace) -> RandomProjection {
    let space = subset.parent().clone();
    let rows = (0..space.len())
        .map(|x| {
            if subset.contains(x) {
                SignedMeasure::dirac(space.clone(), x)
            } else {
                let w = random_simplex_weights(r, subset.len());
                SignedMeasure::new(space.clone(), subset.members().iter().copied().zip(w))
                    .expect("members in range")
            }
        })
        .collect();
    RandomProjection::new(subset.clone(), rows, true).expect("strong rows")
}

/// Gentle partition with `omega` atoms, random anchors and random densities.
pub fn random_gentle_partition(r: &mut InstanceRng, subset: &Subspace, omega: usize) -> GentlePartition {
    let space = subset.parent();
    let n = space.len();
    let weights = random_simplex_weights(r, omega);
    let gamma: Vec<usize> = (0..omega)
        .map(|_| *subset.members().choose(r).expect("nonempty subset"))
        .collect();
    let mut psi = vec![vec![0.0; n]; omega];
    for x in subset.exterior() {
        let raw: Vec<f64> = (0..omega)
            .map(|w| if weights[w] > 0.0 { r.gen_range(0.0..1.0) } else { 0.0 })
            .collect();
        let mut norm: f64 = raw.iter().zip(&weights).map(|(a, p)| a * p).sum();
        let raw = if norm > 0.0 {
            raw
        } else {
            let w = weights.iter().position(|&p| p > 0.0).expect("some positive weight");
            norm = weights[w];
            (0..omega).map(|k| if k == w { 1.0 } else { 0.0 }).collect()
        };
        for w in 0..omega {
            psi[w][x] = raw[w] / norm;
        }
    }
    GentlePartition::new(subset.clone(), weights, psi, gamma).expect("valid random partition")
}
