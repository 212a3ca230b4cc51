use crate::config::Tolerances;
use crate::error::{contract, Result};
use crate::measure::SignedMeasure;
use crate::metric::Subspace;

use super::{PairMax, RandomProjection};

/// A finite probability space `(Ω, P)` with densities `Ψ(ω, x)` and anchors `γ: Ω → M`.
///
/// `psi` is indexed `[ω][x]` over all points of the parent space.
#[derive(Debug, Clone, PartialEq)]
pub struct GentlePartition {
    subset: Subspace,
    weights: Vec<f64>,
    psi: Vec<Vec<f64>>,
    gamma: Vec<usize>,
}

impl GentlePartition {
    pub fn new(subset: Subspace, weights: Vec<f64>, psi: Vec<Vec<f64>>, gamma: Vec<usize>) -> Result<Self> {
        Self::new_with_tol(subset, weights, psi, gamma, Tolerances::default().mass)
    }

    pub fn new_with_tol(
        subset: Subspace,
        weights: Vec<f64>,
        psi: Vec<Vec<f64>>,
        gamma: Vec<usize>,
        tol: f64,
    ) -> Result<Self> {
        let n = subset.parent().len();
        let k = weights.len();
        if k == 0 {
            return contract("Ω must have at least one atom");
        }
        if psi.len() != k || gamma.len() != k {
            return contract(format!(
                "Ω has {k} weights but psi has {} rows and gamma {} entries",
                psi.len(),
                gamma.len()
            ));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return contract("weights must be finite and nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol {
            return contract(format!("weights sum to {total}, not 1"));
        }
        for (w, row) in psi.iter().enumerate() {
            if row.len() != n {
                return contract(format!("psi row {w} has {} entries for {n} points", row.len()));
            }
            if row.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return contract(format!("psi row {w} has negative or non-finite entries"));
            }
        }
        if let Some(&g) = gamma.iter().find(|&&g| !subset.contains(g)) {
            return contract(format!("anchor {g} is not in the subset"));
        }
        for x in 0..n {
            if subset.contains(x) {
                if psi.iter().any(|row| row[x] != 0.0) {
                    return contract(format!("psi(·, {x}) must vanish on the subset"));
                }
            } else {
                let mass: f64 = psi.iter().zip(&weights).map(|(row, p)| p * row[x]).sum();
                if (mass - 1.0).abs() > tol {
                    return contract(format!("∫ psi(·, {x}) dP = {mass}, not 1"));
                }
            }
        }
        Ok(Self { subset, weights, psi, gamma })
    }

    pub fn subset(&self) -> &Subspace {
        &self.subset
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn psi(&self) -> &[Vec<f64>] {
        &self.psi
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }
}

/// Least `K` for which the partition is `K`-gentle:
/// `max_{x≠y} Σ_ω P(ω) d(γ(ω), x) |Ψ(ω,x) − Ψ(ω,y)| / d(x, y)` over ordered pairs.
pub fn gentle_constant(g: &GentlePartition) -> PairMax {
    let n = g.subset.parent().len();
    let mut best = PairMax::empty();
    for x in 0..n {
        for y in 0..n {
            if x != y {
                best.offer(gentle_pair_ratio(g, x, y), x, y);
            }
        }
    }
    best
}

/// The gentleness quotient for one ordered pair.
pub fn gentle_pair_ratio(g: &GentlePartition, x: usize, y: usize) -> f64 {
    let space = g.subset.parent();
    let num: f64 = g
        .psi
        .iter()
        .zip(&g.weights)
        .zip(&g.gamma)
        .map(|((row, p), &anchor)| p * space.d(anchor, x) * (row[x] - row[y]).abs())
        .sum();
    num / space.d(x, y)
}

/// Push-forward of `Ψ(·, x) dP` under `γ`: the induced strong random projection.
pub fn gentle_to_projection(g: &GentlePartition) -> Result<RandomProjection> {
    let space = g.subset.parent().clone();
    let rows = (0..space.len())
        .map(|x| {
            if g.subset.contains(x) {
                Ok(SignedMeasure::dirac(space.clone(), x))
            } else {
                SignedMeasure::new(
                    space.clone(),
                    g.psi
                        .iter()
                        .zip(&g.weights)
                        .zip(&g.gamma)
                        .map(|((row, p), &anchor)| (anchor, p * row[x])),
                )
            }
        })
        .collect::<Result<Vec<_>>>()?;
    RandomProjection::new(g.subset.clone(), rows, true)
}

/// Weights `1/2, 1/4, …, 2^{-(k-1)}, 2^{-(k-1)}` on `k` atoms.
///
/// Power-of-two weights make `P(ω) · (r / P(ω)) = r` exact in floating point.
fn dyadic_weights(k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![1.0];
    }
    if k > 1000 {
        return vec![1.0 / k as f64; k];
    }
    let mut w: Vec<f64> = (1..k).map(|j| 0.5f64.powi(j as i32)).collect();
    w.push(0.5f64.powi(k as i32 - 1));
    w
}

/// Realises a strong projection as a gentle partition with `Ω = M`, `γ = id`
/// and densities with respect to dyadic weights on `M`.
pub fn projection_to_gentle(p: &RandomProjection) -> Result<GentlePartition> {
    if !p.is_strong() {
        return contract("projection_to_gentle requires a strong projection");
    }
    let subset = p.subset().clone();
    let n = subset.parent().len();
    let members = subset.members().to_vec();
    let weights = dyadic_weights(members.len());
    let mut psi = vec![vec![0.0; n]; members.len()];
    for x in subset.exterior() {
        let row = p.row(x);
        for (w, &m) in members.iter().enumerate() {
            psi[w][x] = row.get(m) / weights[w];
        }
    }
    GentlePartition::new(subset, weights, psi, members)
}
