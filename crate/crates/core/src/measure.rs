//! Finitely supported signed measures on a [`FiniteMetricSpace`].

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{contract, Result};
use crate::metric::FiniteMetricSpace;

/// A signed measure `μ = Σ cᵢ δᵢ` bound to one space.
///
/// Coefficients for repeated indices are summed at construction and exact
/// zeros are dropped, so the stored support is precisely `{i : cᵢ ≠ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    space: Arc<FiniteMetricSpace>,
    coeff: BTreeMap<usize, f64>,
}

pub(crate) fn same_space(a: &Arc<FiniteMetricSpace>, b: &Arc<FiniteMetricSpace>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl SignedMeasure {
    pub fn new(
        space: Arc<FiniteMetricSpace>,
        entries: impl IntoIterator<Item = (usize, f64)>,
    ) -> Result<Self> {
        let mut coeff = BTreeMap::new();
        for (i, c) in entries {
            if i >= space.len() {
                return contract(format!("measure atom {i} outside a space of {} points", space.len()));
            }
            if !c.is_finite() {
                return contract(format!("non-finite coefficient at {:?}", space.label(i)));
            }
            *coeff.entry(i).or_insert(0.0) += c;
        }
        coeff.retain(|_, c| *c != 0.0);
        Ok(Self { space, coeff })
    }

    pub fn zero(space: Arc<FiniteMetricSpace>) -> Self {
        Self { space, coeff: BTreeMap::new() }
    }

    pub fn dirac(space: Arc<FiniteMetricSpace>, i: usize) -> Self {
        assert!(i < space.len(), "dirac atom out of range");
        Self { space, coeff: BTreeMap::from([(i, 1.0)]) }
    }

    pub fn from_dense(space: Arc<FiniteMetricSpace>, values: &[f64]) -> Result<Self> {
        if values.len() != space.len() {
            return contract(format!(
                "dense measure has {} entries for a space of {} points",
                values.len(),
                space.len()
            ));
        }
        Self::new(space, values.iter().copied().enumerate())
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn get(&self, i: usize) -> f64 {
        self.coeff.get(&i).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeff.iter().map(|(&i, &c)| (i, c))
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeff.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_empty()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.space.len()];
        for (i, c) in self.iter() {
            out[i] = c;
        }
        out
    }

    /// `μ(X)`.
    pub fn total_mass(&self) -> f64 {
        self.coeff.values().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeff.values().all(|&c| c >= 0.0)
    }

    /// `α·self + β·other`; both measures must live on the same space.
    pub fn combine(&self, alpha: f64, other: &SignedMeasure, beta: f64) -> Result<Self> {
        if !same_space(&self.space, &other.space) {
            return contract("measures live on different spaces");
        }
        Self::new(
            self.space.clone(),
            self.iter()
                .map(|(i, c)| (i, alpha * c))
                .chain(other.iter().map(|(i, c)| (i, beta * c))),
        )
    }

    pub fn sub(&self, other: &SignedMeasure) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    pub fn add(&self, other: &SignedMeasure) -> Result<Self> {
        self.combine(1.0, other, 1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.space.clone(), self.iter().map(|(i, v)| (i, c * v)))
            .expect("scaling keeps indices in range")
    }

    /// `|μ|(B)`: on a finite space the supremum over partitions of `B` is
    /// attained by the partition into singletons.
    pub fn total_variation(&self, set: &[usize]) -> Result<f64> {
        if let Some(&bad) = set.iter().find(|&&i| i >= self.space.len()) {
            return contract(format!("index {bad} out of range"));
        }
        let mut idx = set.to_vec();
        idx.sort_unstable();
        idx.dedup();
        Ok(idx.iter().map(|&i| self.get(i).abs()).sum())
    }

    /// `‖μ‖_TV = |μ|(X)`.
    pub fn total_variation_all(&self) -> f64 {
        self.coeff.values().map(|c| c.abs()).sum()
    }

    /// Splits `μ = μ⁺ − μ⁻` into nonnegative parts with disjoint supports.
    pub fn jordan_decompose(&self) -> (SignedMeasure, SignedMeasure) {
        let plus = self.coeff.iter().filter(|(_, &c)| c > 0.0).map(|(&i, &c)| (i, c)).collect();
        let minus = self.coeff.iter().filter(|(_, &c)| c < 0.0).map(|(&i, &c)| (i, -c)).collect();
        (
            Self { space: self.space.clone(), coeff: plus },
            Self { space: self.space.clone(), coeff: minus },
        )
    }

    /// `∫ d(·, x̄) d|μ|`, an upper bound on the KR norm of `μ`.
    pub fn freespace_moment_bound(&self) -> f64 {
        let base = self.space.basepoint();
        self.iter().map(|(i, c)| c.abs() * self.space.d(i, base)).sum()
    }
}
