//! Random projections onto a subset `M`, gentle partitions of unity, and the
//! constructions relating them.
//!
//! A random projection assigns to every `x ∈ X` a finitely supported measure
//! `υ_x` on `M` with `υ_x = δ_x` for `x ∈ M`. Its constant is the least `K`
//! such that `‖υ_x − υ_y‖_KR ≤ K d(x, y)` for all pairs.

mod construct;
mod gentle;
mod retract;
mod synthesis;

use std::sync::Arc;

pub use construct::{nearest_point_projection, uniform_discrete_projection};
pub use gentle::{
    gentle_constant, gentle_pair_ratio, gentle_to_projection, projection_to_gentle, GentlePartition,
};
pub use retract::retract_l1_ball;
pub use synthesis::{asymptotic_profile, synthesize_min_k, ProfileEntry, SynthesisMode, SynthesisResult};

use crate::config::Tolerances;
use crate::error::{contract, Result};
use crate::measure::{same_space, SignedMeasure};
use crate::metric::{FiniteMetricSpace, Subspace};
use crate::registry::{FlowEvaluator, KrEvaluator};

/// A family `{υ_x : x ∈ X}` of measures supported in `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomProjection {
    subset: Subspace,
    rows: Vec<SignedMeasure>,
    strong: bool,
}

impl RandomProjection {
    /// Validates the rows: one per point, supported in `M`, `δ_x` on `M`,
    /// and probability measures when `strong` is set.
    pub fn new(subset: Subspace, rows: Vec<SignedMeasure>, strong: bool) -> Result<Self> {
        Self::new_with_tol(subset, rows, strong, Tolerances::default().mass)
    }

    pub fn new_with_tol(subset: Subspace, rows: Vec<SignedMeasure>, strong: bool, tol: f64) -> Result<Self> {
        let space = subset.parent();
        if rows.len() != space.len() {
            return contract(format!("{} rows for a space of {} points", rows.len(), space.len()));
        }
        for (x, row) in rows.iter().enumerate() {
            if !same_space(row.space(), space) {
                return contract(format!("row {:?} lives on a different space", space.label(x)));
            }
            if let Some(bad) = row.support().into_iter().find(|&m| !subset.contains(m)) {
                return contract(format!(
                    "row {:?} charges {:?}, which is outside the subset",
                    space.label(x),
                    space.label(bad)
                ));
            }
            if subset.contains(x) && *row != SignedMeasure::dirac(space.clone(), x) {
                return contract(format!("row {:?} must be the Dirac mass at itself", space.label(x)));
            }
            if strong {
                if !row.is_nonnegative() {
                    return contract(format!("strong projection row {:?} has negative mass", space.label(x)));
                }
                let mass = row.total_mass();
                if (mass - 1.0).abs() > tol {
                    return contract(format!("strong projection row {:?} has mass {mass}", space.label(x)));
                }
            }
        }
        Ok(Self { subset, rows, strong })
    }

    /// `υ_x = δ_x` for every point; requires `M = X`.
    pub fn identity(subset: Subspace) -> Result<Self> {
        if !subset.is_full() {
            return contract("identity projection requires the subset to be the whole space");
        }
        let space = subset.parent().clone();
        let rows = (0..space.len()).map(|x| SignedMeasure::dirac(space.clone(), x)).collect();
        Self::new(subset, rows, true)
    }

    /// Deterministic projection `υ_x = δ_{r(x)}` for a retraction `r: X → M`.
    pub fn from_retraction(subset: Subspace, map: &[usize]) -> Result<Self> {
        let space = subset.parent().clone();
        if map.len() != space.len() {
            return contract("retraction map must cover every point");
        }
        let rows = map.iter().map(|&m| SignedMeasure::dirac(space.clone(), m)).collect();
        Self::new(subset, rows, true)
    }

    pub fn subset(&self) -> &Subspace {
        &self.subset
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        self.subset.parent()
    }

    pub fn rows(&self) -> &[SignedMeasure] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &SignedMeasure {
        &self.rows[x]
    }

    pub fn is_strong(&self) -> bool {
        self.strong
    }

    /// True when every row is a probability measure, whatever the flag says.
    pub fn rows_are_probabilities(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.is_nonnegative() && (r.total_mass() - 1.0).abs() <= tol)
    }
}

/// Maximum of a pairwise ratio together with the pair attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMax {
    pub value: f64,
    pub pair: Option<(usize, usize)>,
}

impl PairMax {
    fn empty() -> Self {
        Self { value: 0.0, pair: None }
    }

    fn offer(&mut self, value: f64, x: usize, y: usize) {
        if self.pair.is_none() || value > self.value {
            self.value = value;
            self.pair = Some((x, y));
        }
    }
}

/// Least `K` with `‖υ_x − υ_y‖_KR ≤ K d(x, y)`, via exact transport flows.
pub fn projection_constant(p: &RandomProjection, tol: &Tolerances) -> Result<f64> {
    Ok(projection_constant_by(p, &FlowEvaluator, tol)?.value)
}

/// Same as [`projection_constant`] with a chosen KR evaluator; reports the worst pair.
///
/// Pairs inside `M` contribute exactly 1 and are not evaluated.
pub fn projection_constant_by(p: &RandomProjection, kr: &dyn KrEvaluator, tol: &Tolerances) -> Result<PairMax> {
    let space = p.space();
    let n = space.len();
    let mut best = PairMax::empty();
    for x in 0..n {
        for y in x + 1..n {
            if p.subset.contains(x) && p.subset.contains(y) {
                best.offer(1.0, x, y);
                continue;
            }
            let diff = p.rows[x].sub(&p.rows[y])?;
            let v = kr.evaluate(&diff, tol)?;
            best.offer(v / space.d(x, y), x, y);
        }
    }
    Ok(best)
}

/// `max_{x≠y} Σ_m d(m, x) |υ_x(m) − υ_y(m)| / d(x, y)` over ordered pairs.
pub fn weighted_tv_constant(p: &RandomProjection) -> PairMax {
    let space = p.space();
    let n = space.len();
    let mut best = PairMax::empty();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            best.offer(weighted_tv_pair_ratio(p, x, y), x, y);
        }
    }
    best
}

/// `Σ_m d(m, x) |υ_x(m) − υ_y(m)| / d(x, y)` for one ordered pair.
pub fn weighted_tv_pair_ratio(p: &RandomProjection, x: usize, y: usize) -> f64 {
    let space = p.space();
    let (rx, ry) = (&p.rows[x], &p.rows[y]);
    let mut atoms = rx.support();
    atoms.extend(ry.support());
    atoms.sort_unstable();
    atoms.dedup();
    let num: f64 = atoms
        .iter()
        .map(|&m| space.d(m, x) * (rx.get(m) - ry.get(m)).abs())
        .sum();
    num / space.d(x, y)
}
