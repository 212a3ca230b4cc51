use crate::error::{contract, Result};
use crate::measure::SignedMeasure;
use crate::metric::Subspace;

use super::RandomProjection;

/// `υ_x = δ_t` for the nearest `t ∈ M` (ties broken by index).
pub fn nearest_point_projection(subset: &Subspace) -> Result<RandomProjection> {
    let space = subset.parent();
    let map: Vec<usize> = (0..space.len())
        .map(|x| {
            *subset
                .members()
                .iter()
                .min_by(|&&a, &&b| space.d(x, a).total_cmp(&space.d(x, b)))
                .expect("subset is nonempty")
        })
        .collect();
    RandomProjection::from_retraction(subset.clone(), &map)
}

/// Strong projection onto an `ε`-separated subset.
///
/// A point `x` within `ε/2` of some `t ∈ M` gets
/// `(d(x,t) δ_{t₀} + (ε/2 − d(x,t)) δ_t) / (ε/2)`; every other point gets `δ_{t₀}`.
/// The balls `B(t, ε/2)` are disjoint, so `t` is unique when it exists.
pub fn uniform_discrete_projection(subset: &Subspace, eps: f64, t0: usize) -> Result<RandomProjection> {
    let space = subset.parent().clone();
    if !(eps.is_finite() && eps > 0.0) {
        return contract(format!("eps must be positive and finite, got {eps}"));
    }
    if !subset.contains(t0) {
        return contract(format!("t0 {:?} is not in the subset", space.label(t0.min(space.len() - 1))));
    }
    let members = subset.members();
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            if space.d(a, b) < eps {
                return contract(format!(
                    "subset is not {eps}-separated: d({:?}, {:?}) = {}",
                    space.label(a),
                    space.label(b),
                    space.d(a, b)
                ));
            }
        }
    }
    let half = eps / 2.0;
    let rows = (0..space.len())
        .map(|x| {
            if subset.contains(x) {
                return Ok(SignedMeasure::dirac(space.clone(), x));
            }
            match members.iter().copied().find(|&t| space.d(x, t) < half) {
                Some(t) if t != t0 => {
                    let d = space.d(x, t);
                    SignedMeasure::new(space.clone(), [(t0, d / half), (t, (half - d) / half)])
                }
                _ => Ok(SignedMeasure::dirac(space.clone(), t0)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    RandomProjection::new(subset.clone(), rows, true)
}
