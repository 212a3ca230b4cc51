//! Lipschitz norms and extension operators for functions on a subset.

use std::sync::Arc;

use crate::config::Tolerances;
use crate::error::{contract, Result};
use crate::metric::FiniteMetricSpace;
use crate::projection::{projection_constant_by, RandomProjection};
use crate::registry::LpEvaluator;

/// Norm on the finite-dimensional target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetNorm {
    /// Absolute value; dimension 1 only.
    Abs,
    Sup,
    Euclid,
}

impl TargetNorm {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            Self::Abs | Self::Sup => v.iter().fold(0.0, |a, x| a.max(x.abs())),
            Self::Euclid => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Abs => "abs",
            Self::Sup => "sup",
            Self::Euclid => "euclid",
        }
    }
}

impl std::str::FromStr for TargetNorm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" => Ok(Self::Abs),
            "sup" => Ok(Self::Sup),
            "euclid" => Ok(Self::Euclid),
            other => Err(crate::Error::Malformed(format!("unknown norm {other:?}; expected abs, sup or euclid"))),
        }
    }
}

/// A vector-valued function on a set of points of a space.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFunction {
    space: Arc<FiniteMetricSpace>,
    domain: Vec<usize>,
    values: Vec<Vec<f64>>,
    norm: TargetNorm,
}

impl PointFunction {
    /// `entries` may come in any order; the domain is stored sorted.
    pub fn new(
        space: Arc<FiniteMetricSpace>,
        entries: Vec<(usize, Vec<f64>)>,
        norm: TargetNorm,
    ) -> Result<Self> {
        let mut entries = entries;
        entries.sort_by_key(|e| e.0);
        let dim = entries.first().map_or(1, |e| e.1.len());
        if dim == 0 {
            return contract("function values must have dimension at least 1");
        }
        if norm == TargetNorm::Abs && dim != 1 {
            return contract(format!("the abs norm needs scalar values, got dimension {dim}"));
        }
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return contract(format!("point {:?} has two values", space.label(w[0].0)));
            }
        }
        for (i, v) in &entries {
            if *i >= space.len() {
                return contract(format!("point index {i} outside a space of {} points", space.len()));
            }
            if v.len() != dim {
                return contract(format!("value at {:?} has dimension {}, expected {dim}", space.label(*i), v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return contract(format!("value at {:?} is not finite", space.label(*i)));
            }
        }
        let (domain, values) = entries.into_iter().unzip();
        Ok(Self { space, domain, values, norm })
    }

    /// Scalar function from `(point, value)` pairs, measured with the absolute value.
    pub fn scalar(space: Arc<FiniteMetricSpace>, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        Self::new(space, entries.into_iter().map(|(i, v)| (i, vec![v])).collect(), TargetNorm::Abs)
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn domain(&self) -> &[usize] {
        &self.domain
    }

    pub fn norm(&self) -> TargetNorm {
        self.norm
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(1, Vec::len)
    }

    pub fn value(&self, i: usize) -> Option<&[f64]> {
        self.domain.binary_search(&i).ok().map(|k| self.values[k].as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.domain.iter().copied().zip(self.values.iter().map(Vec::as_slice))
    }

    /// `f − f(x̄)`, defined when the basepoint is in the domain.
    pub fn shift_to_basepoint(&self) -> Result<Self> {
        let base = self.space.basepoint();
        let Some(b) = self.value(base).map(<[f64]>::to_vec) else {
            return contract("the basepoint is not in the function's domain");
        };
        let values = self
            .values
            .iter()
            .map(|v| v.iter().zip(&b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(Self { values, ..self.clone() })
    }

    fn pair_quotient(&self, a: usize, b: usize) -> f64 {
        let diff: Vec<f64> = self.values[a].iter().zip(&self.values[b]).map(|(x, y)| x - y).collect();
        self.norm.norm(&diff) / self.space.d(self.domain[a], self.domain[b])
    }
}

/// `max ‖f(x) − f(y)‖ / d(x, y)` over pairs of the domain; 0 for fewer than two points.
pub fn lip_norm(f: &PointFunction) -> f64 {
    let k = f.domain.len();
    let mut best = 0.0f64;
    for a in 0..k {
        for b in a + 1..k {
            best = best.max(f.pair_quotient(a, b));
        }
    }
    best
}

/// Largest `L`-Lipschitz extension `x ↦ min_m f(m) + L d(x, m)` of a scalar function.
pub fn mcshane_extend(f: &PointFunction, l: f64, tol: &Tolerances) -> Result<PointFunction> {
    if f.dim() != 1 {
        return contract(format!("McShane extension needs a scalar function, got dimension {}", f.dim()));
    }
    if f.domain.is_empty() {
        return contract("cannot extend a function with empty domain");
    }
    if !(l.is_finite() && l >= 0.0) {
        return contract(format!("Lipschitz bound must be finite and nonnegative, got {l}"));
    }
    let k = f.domain.len();
    let mut worst: Option<(usize, usize, f64)> = None;
    for a in 0..k {
        for b in a + 1..k {
            let q = f.pair_quotient(a, b);
            if worst.is_none_or(|w| q > w.2) {
                worst = Some((a, b, q));
            }
        }
    }
    if let Some((a, b, q)) = worst {
        if l < q - tol.metric * (1.0 + q) {
            return contract(format!(
                "L = {l} is below the Lipschitz constant {q} attained by the pair ({:?}, {:?})",
                f.space.label(f.domain[a]),
                f.space.label(f.domain[b])
            ));
        }
    }
    let space = f.space.clone();
    let entries = (0..space.len())
        .map(|x| {
            let v = match f.value(x) {
                Some(v) => v[0],
                None => f
                    .iter()
                    .map(|(m, v)| v[0] + l * space.d(x, m))
                    .fold(f64::INFINITY, f64::min),
            };
            (x, vec![v])
        })
        .collect();
    PointFunction::new(space, entries, f.norm)
}

/// `E f(x) = Σ_m υ_x(m) f(m)`, coordinatewise.
pub fn extend_by_projection(p: &RandomProjection, f: &PointFunction) -> Result<PointFunction> {
    if !crate::measure::same_space(p.space(), &f.space) {
        return contract("projection and function live on different spaces");
    }
    if f.domain != p.subset().members() {
        return contract("the function's domain must equal the projection's subset");
    }
    let base = f.space.basepoint();
    let fb = f.value(base).expect("subset contains the basepoint");
    if fb.iter().any(|&v| v != 0.0) {
        return contract(format!(
            "the function must vanish at the basepoint {:?}; shift it by its value there first",
            f.space.label(base)
        ));
    }
    let dim = f.dim();
    let entries = (0..f.space.len())
        .map(|x| {
            let v = match f.value(x) {
                Some(v) => v.to_vec(),
                None => {
                    let mut acc = vec![0.0; dim];
                    for (m, c) in p.row(x).iter() {
                        let fm = f.value(m).expect("rows are supported in the subset");
                        acc.iter_mut().zip(fm).for_each(|(a, b)| *a += c * b);
                    }
                    acc
                }
            };
            (x, v)
        })
        .collect();
    PointFunction::new(f.space.clone(), entries, f.norm)
}

/// Norm of `f ↦ E f` from `Lip₀(M)` to `Lip₀(X)`, computed pairwise by
/// maximising `⟨υ_x − υ_y, f⟩` over the unit ball of `Lip₀(M)` with the LP solver.
pub fn operator_norm(p: &RandomProjection, tol: &Tolerances) -> Result<f64> {
    Ok(projection_constant_by(p, &LpEvaluator, tol)?.value)
}
