//! Finite pointed metric spaces and their subspaces.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{contract, Error, Result};

/// A finite metric space `(X, d)` with a distinguished basepoint.
///
/// Distances are stored densely in row-major order. Construction only checks
/// structure (square, finite, unique labels); use [`validate_metric`] or
/// [`FiniteMetricSpace::new_checked`] to enforce the metric axioms.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: Vec<f64>,
    basepoint: usize,
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>, basepoint: usize) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Malformed("space has no points".into()));
        }
        if dist.len() != n {
            return Err(Error::Malformed(format!(
                "distance matrix has {} rows but there are {} labels",
                dist.len(),
                n
            )));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Malformed(format!(
                    "distance matrix is not square: row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Malformed(format!("non-finite distance at ({i}, {j})")));
                }
            }
            flat.extend_from_slice(row);
        }
        if basepoint >= n {
            return Err(Error::Malformed(format!("basepoint index {basepoint} out of range")));
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if let Some(prev) = seen.insert(l.as_str(), i) {
                return Err(Error::Malformed(format!(
                    "duplicate label {l:?} at positions {prev} and {i}"
                )));
            }
        }
        Ok(Self { labels, dist: flat, basepoint })
    }

    /// Builds the space and rejects it unless [`validate_metric`] reports nothing.
    pub fn new_checked(
        labels: Vec<String>,
        dist: Vec<Vec<f64>>,
        basepoint: usize,
        tol: f64,
    ) -> Result<Self> {
        let space = Self::new(labels, dist, basepoint)?;
        let report = validate_metric(&space, tol);
        if !report.is_valid() {
            return contract(format!("not a metric: {report}"));
        }
        Ok(space)
    }

    /// Convenience constructor with labels `p0, p1, …`.
    pub fn from_matrix(dist: Vec<Vec<f64>>, basepoint: usize) -> Result<Self> {
        let labels = (0..dist.len()).map(|i| format!("p{i}")).collect();
        Self::new(labels, dist, basepoint)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.labels.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.labels.len();
        &self.dist[i * n..(i + 1) * n]
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Largest distance between members of `set` (0 for fewer than two points).
    pub fn diameter_of(&self, set: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                best = best.max(self.d(i, j));
            }
        }
        best
    }

    /// Smallest distance between distinct members of `set` (`None` for fewer than two points).
    pub fn separation_of(&self, set: &[usize]) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                let v = self.d(i, j);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        best
    }

    pub fn dist_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.row(i).to_vec()).collect()
    }
}

/// One violated metric axiom.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `d(i, i) != 0`.
    Diagonal { i: usize, value: f64 },
    /// `d(i, j) != d(j, i)`.
    Asymmetric { i: usize, j: usize, excess: f64 },
    /// `d(i, j) <= 0` for `i != j`.
    NonPositive { i: usize, j: usize, value: f64 },
    /// `d(i, k) > d(i, j) + d(j, k)`; `j` is the intermediate point.
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Diagonal { i, value } => write!(f, "d({i},{i}) = {value} != 0"),
            Violation::Asymmetric { i, j, excess } => {
                write!(f, "d({i},{j}) and d({j},{i}) differ by {excess}")
            }
            Violation::NonPositive { i, j, value } => {
                write!(f, "d({i},{j}) = {value} is not positive")
            }
            Violation::Triangle { i, j, k, excess } => {
                write!(f, "d({i},{k}) exceeds d({i},{j}) + d({j},{k}) by {excess}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every metric axiom within `tol × max distance`.
///
/// Triangle constraints are enumerated once per unordered endpoint pair
/// `{i, k}` and intermediate `j`, so a single bad distance yields one entry
/// per witnessing intermediate point.
pub fn validate_metric(space: &FiniteMetricSpace, tol: f64) -> ValidationReport {
    let n = space.len();
    let slack = tol * space.max_distance().max(f64::MIN_POSITIVE);
    let mut violations = Vec::new();
    for i in 0..n {
        let v = space.d(i, i);
        if v.abs() > slack {
            violations.push(Violation::Diagonal { i, value: v });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (space.d(i, j), space.d(j, i));
            if (a - b).abs() > slack {
                violations.push(Violation::Asymmetric { i, j, excess: (a - b).abs() });
            }
            if a <= 0.0 || b <= 0.0 {
                violations.push(Violation::NonPositive { i, j, value: a.min(b) });
            }
        }
    }
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let excess = space.d(i, k) - (space.d(i, j) + space.d(j, k));
                if excess > slack {
                    violations.push(Violation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Greedy upper bound on the doubling constant.
///
/// For every centre and every radius `r` realised as a pairwise distance,
/// the closed ball `B(c, r)` is covered greedily by closed balls of radius
/// `r / 2` centred at points of `X`, always taking the centre that covers the
/// most still-uncovered points (lowest index on ties). The maximum cover size
/// over all balls is returned; each greedy cover is at least the optimal one,
/// so the result bounds the doubling constant restricted to finite centres
/// from above.
pub fn doubling_estimate(space: &FiniteMetricSpace) -> usize {
    let n = space.len();
    let mut radii: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            radii.push(space.d(i, j));
        }
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let mut best = 1usize;
    let mut uncovered = vec![false; n];
    for c in 0..n {
        for &r in &radii {
            let eps = r * 1e-12;
            let mut remaining = 0usize;
            for (x, u) in uncovered.iter_mut().enumerate() {
                *u = space.d(c, x) <= r + eps;
                remaining += *u as usize;
            }
            let half = r / 2.0 + eps;
            let mut count = 0usize;
            while remaining > 0 {
                let (z, gain) = (0..n)
                    .map(|z| {
                        let gain = (0..n).filter(|&u| uncovered[u] && space.d(z, u) <= half).count();
                        (z, gain)
                    })
                    .fold((0, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
                debug_assert!(gain > 0);
                for u in 0..n {
                    if uncovered[u] && space.d(z, u) <= half {
                        uncovered[u] = false;
                    }
                }
                remaining -= gain;
                count += 1;
            }
            best = best.max(count);
        }
    }
    best
}

/// The induced subspace on `members`; the basepoint must be kept.
pub fn restrict(space: &FiniteMetricSpace, members: &[usize]) -> Result<FiniteMetricSpace> {
    let mut idx = members.to_vec();
    idx.sort_unstable();
    idx.dedup();
    if idx.is_empty() {
        return contract("restriction to an empty set");
    }
    if let Some(&bad) = idx.iter().find(|&&i| i >= space.len()) {
        return contract(format!("index {bad} out of range"));
    }
    let Some(base) = idx.iter().position(|&i| i == space.basepoint()) else {
        return contract(format!(
            "restriction drops the basepoint {:?}",
            space.label(space.basepoint())
        ));
    };
    let labels = idx.iter().map(|&i| space.labels[i].clone()).collect();
    let dist = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| space.d(i, j)).collect())
        .collect();
    FiniteMetricSpace::new(labels, dist, base)
}

/// A subset `M ⊆ X` containing the basepoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    parent: Arc<FiniteMetricSpace>,
    members: Vec<usize>,
    mask: Vec<bool>,
}

impl Subspace {
    pub fn new(parent: Arc<FiniteMetricSpace>, members: &[usize]) -> Result<Self> {
        let mut idx = members.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            return contract("subspace must be nonempty");
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= parent.len()) {
            return contract(format!("subspace index {bad} out of range"));
        }
        if idx.binary_search(&parent.basepoint()).is_err() {
            return contract(format!(
                "subspace must contain the basepoint {:?}",
                parent.label(parent.basepoint())
            ));
        }
        let mut mask = vec![false; parent.len()];
        for &i in &idx {
            mask[i] = true;
        }
        Ok(Self { parent, members: idx, mask })
    }

    /// Resolves member labels against the parent space.
    pub fn from_labels<S: AsRef<str>>(parent: Arc<FiniteMetricSpace>, labels: &[S]) -> Result<Self> {
        let idx = labels
            .iter()
            .map(|l| {
                parent
                    .index_of(l.as_ref())
                    .ok_or_else(|| Error::Contract(format!("unknown label {:?}", l.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parent, &idx)
    }

    pub fn full(parent: Arc<FiniteMetricSpace>) -> Self {
        let all: Vec<usize> = (0..parent.len()).collect();
        Self::new(parent, &all).expect("full subspace always contains the basepoint")
    }

    pub fn parent(&self) -> &Arc<FiniteMetricSpace> {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    /// Points of `X \ M` in increasing order.
    pub fn exterior(&self) -> Vec<usize> {
        (0..self.parent.len()).filter(|&i| !self.mask[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.parent.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.members.iter().map(|&i| self.parent.label(i).to_string()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three(dac: f64) -> FiniteMetricSpace {
        FiniteMetricSpace::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 1.0, dac], vec![1.0, 0.0, 1.5], vec![dac, 1.5, 0.0]],
            0,
        )
        .unwrap()
    }

    fn path(n: usize) -> FiniteMetricSpace {
        let dist = (0..n)
            .map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect())
            .collect();
        FiniteMetricSpace::from_matrix(dist, 0).unwrap()
    }

    /// Minimal number of radius-`r/2` balls centred in `X` covering `B(c, r)`, by subset enumeration.
    fn exhaustive_doubling(space: &FiniteMetricSpace) -> usize {
        let n = space.len();
        let mut best = 1;
        for c in 0..n {
            for r in (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| space.d(i, j)) {
                if r <= 0.0 {
                    continue;
                }
                let ball: Vec<usize> = (0..n).filter(|&x| space.d(c, x) <= r).collect();
                let mut min_cover = usize::MAX;
                for mask in 1u32..(1 << n) {
                    let k = mask.count_ones() as usize;
                    if k >= min_cover {
                        continue;
                    }
                    let covers = ball
                        .iter()
                        .all(|&u| (0..n).any(|z| mask & (1 << z) != 0 && space.d(z, u) <= r / 2.0));
                    if covers {
                        min_cover = k;
                    }
                }
                best = best.max(min_cover);
            }
        }
        best
    }

    #[test]
    fn single_point_is_valid() {
        let s = FiniteMetricSpace::from_matrix(vec![vec![0.0]], 0).unwrap();
        assert!(validate_metric(&s, 1e-9).is_valid());
        assert_eq!(doubling_estimate(&s), 1);
    }

    #[test]
    fn three_point_space_is_valid() {
        assert!(validate_metric(&three(2.0), 1e-9).is_valid());
    }

    #[test]
    fn triangle_violation_is_reported_once() {
        let report = validate_metric(&three(3.0), 1e-9);
        assert_eq!(report.violations.len(), 1);
        match report.violations[0] {
            Violation::Triangle { i, j, k, excess } => {
                assert_eq!((i, j, k), (0, 1, 2));
                assert!((excess - 0.5).abs() < 1e-12);
            }
            ref v => panic!("unexpected violation {v:?}"),
        }
    }

    #[test]
    fn structural_errors_are_malformed() {
        let err = FiniteMetricSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0]], 0).unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
        let err = FiniteMetricSpace::from_matrix(vec![vec![0.0, f64::NAN], vec![1.0, 0.0]], 0)
            .unwrap_err();
        assert!(matches!(err, Error::Malformed(_)));
    }

    #[test]
    fn asymmetry_and_zero_distance_are_reported() {
        let s = FiniteMetricSpace::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]], 0).unwrap();
        assert!(matches!(validate_metric(&s, 1e-9).violations[0], Violation::Asymmetric { .. }));
        let s = FiniteMetricSpace::from_matrix(vec![vec![0.0, 0.0], vec![0.0, 0.0]], 0).unwrap();
        assert!(matches!(validate_metric(&s, 1e-9).violations[0], Violation::NonPositive { .. }));
    }

    #[test]
    fn doubling_two_points() {
        let s = path(2);
        assert_eq!(doubling_estimate(&s), 2);
    }

    #[test]
    fn doubling_path_matches_exhaustive_cover() {
        let s = path(5);
        let exact = exhaustive_doubling(&s);
        assert_eq!(exact, 3);
        assert_eq!(doubling_estimate(&s), exact);
    }

    #[test]
    fn doubling_bounds_exhaustive_on_random_spaces() {
        for seed in 0..20 {
            let s = crate::gen::random_euclidean_space(seed, 3 + (seed as usize % 4), 2);
            let est = doubling_estimate(&s);
            assert!(est >= 1);
            assert!(est >= exhaustive_doubling(&s), "seed {seed}");
        }
    }

    #[test]
    fn restrict_identity_and_submatrix() {
        let s = three(2.0);
        assert_eq!(restrict(&s, &[0, 1, 2]).unwrap(), s);
        let sub = restrict(&s, &[1, 0]).unwrap();
        assert_eq!(sub.dist_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(sub.labels(), ["a", "b"]);
        assert_eq!(sub.basepoint(), 0);
        assert!(matches!(restrict(&s, &[1, 2]), Err(Error::Contract(_))));
    }

    #[test]
    fn subspace_requires_basepoint() {
        let s = Arc::new(three(2.0));
        assert!(Subspace::new(s.clone(), &[1, 2]).is_err());
        let m = Subspace::new(s, &[1, 0]).unwrap();
        assert_eq!(m.members(), &[0, 1]);
        assert_eq!(m.exterior(), vec![2]);
    }
}
