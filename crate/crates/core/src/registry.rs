//! Named algorithm variants selectable at runtime.
//!
//! Two families are registered: projection builders (how to produce a random
//! projection onto a subset) and KR evaluators (how to compute a free-space
//! norm). The CLI looks strategies up by name.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::measure::SignedMeasure;
use crate::metric::Subspace;
use crate::projection::{
    nearest_point_projection, synthesize_min_k, uniform_discrete_projection, RandomProjection, SynthesisMode,
};
use crate::transport::{kr_norm, kr_norm_lp};

pub trait Named {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
}

/// Computes `‖μ‖_KR`.
pub trait KrEvaluator: Named + Send + Sync {
    fn evaluate(&self, mu: &SignedMeasure, tol: &Tolerances) -> Result<f64>;
}

/// Min-cost flow on the support plus basepoint.
pub struct FlowEvaluator;

impl Named for FlowEvaluator {
    fn name(&self) -> &'static str {
        "flow"
    }
    fn description(&self) -> &'static str {
        "successive shortest paths on the complete support graph"
    }
}

impl KrEvaluator for FlowEvaluator {
    fn evaluate(&self, mu: &SignedMeasure, tol: &Tolerances) -> Result<f64> {
        if mu.is_zero() {
            return Ok(0.0);
        }
        Ok(kr_norm(mu, tol)?.value)
    }
}

/// Dense LP over 1-Lipschitz potentials.
pub struct LpEvaluator;

impl Named for LpEvaluator {
    fn name(&self) -> &'static str {
        "lp"
    }
    fn description(&self) -> &'static str {
        "revised simplex over Lipschitz potentials vanishing at the basepoint"
    }
}

impl KrEvaluator for LpEvaluator {
    fn evaluate(&self, mu: &SignedMeasure, tol: &Tolerances) -> Result<f64> {
        Ok(kr_norm_lp(mu, tol)?.0)
    }
}

/// Optional knobs for projection builders; each builder documents which it reads.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BuildParams {
    pub eps: Option<f64>,
    pub t0: Option<usize>,
}

pub trait ProjectionStrategy: Named + Send + Sync {
    fn build(&self, subset: &Subspace, params: &BuildParams, tol: &Tolerances) -> Result<RandomProjection>;
}

pub struct NearestPoint;

impl Named for NearestPoint {
    fn name(&self) -> &'static str {
        "nearest"
    }
    fn description(&self) -> &'static str {
        "deterministic retraction to a nearest subset point"
    }
}

impl ProjectionStrategy for NearestPoint {
    fn build(&self, subset: &Subspace, _: &BuildParams, _: &Tolerances) -> Result<RandomProjection> {
        nearest_point_projection(subset)
    }
}

pub struct UniformDiscrete;

impl Named for UniformDiscrete {
    fn name(&self) -> &'static str {
        "uniform-discrete"
    }
    fn description(&self) -> &'static str {
        "two-atom mixtures on eps/2 balls (eps defaults to the subset's separation, t0 to the basepoint)"
    }
}

impl ProjectionStrategy for UniformDiscrete {
    fn build(&self, subset: &Subspace, params: &BuildParams, _: &Tolerances) -> Result<RandomProjection> {
        let space = subset.parent();
        let eps = match params.eps {
            Some(e) => e,
            None => space.separation_of(subset.members()).ok_or_else(|| {
                Error::Contract("uniform-discrete needs eps when the subset has a single point".into())
            })?,
        };
        uniform_discrete_projection(subset, eps, params.t0.unwrap_or(space.basepoint()))
    }
}

pub struct Synthesized(pub SynthesisMode);

impl Named for Synthesized {
    fn name(&self) -> &'static str {
        match self.0 {
            SynthesisMode::Strong => "synth-strong",
            SynthesisMode::Signed => "synth-signed",
        }
    }
    fn description(&self) -> &'static str {
        match self.0 {
            SynthesisMode::Strong => "minimal-constant strong projection by linear programming",
            SynthesisMode::Signed => "minimal-constant signed projection by linear programming",
        }
    }
}

impl ProjectionStrategy for Synthesized {
    fn build(&self, subset: &Subspace, _: &BuildParams, tol: &Tolerances) -> Result<RandomProjection> {
        Ok(synthesize_min_k(subset, self.0, tol)?.projection)
    }
}

/// Name-indexed collection of trait objects.
pub struct Registry<T: ?Sized + Named> {
    entries: BTreeMap<&'static str, Arc<T>>,
}

impl<T: ?Sized + Named> Default for Registry<T> {
    fn default() -> Self {
        Self { entries: BTreeMap::new() }
    }
}

impl<T: ?Sized + Named> Registry<T> {
    /// Adds an entry; a later registration under the same name replaces the earlier one.
    pub fn register(&mut self, item: Arc<T>) -> &mut Self {
        self.entries.insert(item.name(), item);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::Contract(format!("unknown method {name:?}; available: {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<T>> {
        self.entries.values()
    }
}

pub fn projection_strategies() -> Registry<dyn ProjectionStrategy> {
    let mut r: Registry<dyn ProjectionStrategy> = Registry::default();
    r.register(Arc::new(NearestPoint))
        .register(Arc::new(UniformDiscrete))
        .register(Arc::new(Synthesized(SynthesisMode::Strong)))
        .register(Arc::new(Synthesized(SynthesisMode::Signed)));
    r
}

pub fn kr_evaluators() -> Registry<dyn KrEvaluator> {
    let mut r: Registry<dyn KrEvaluator> = Registry::default();
    r.register(Arc::new(FlowEvaluator)).register(Arc::new(LpEvaluator));
    r
}
