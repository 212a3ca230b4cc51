//! Exact Wasserstein-1 distances and Kantorovich–Rubinstein norms.
//!
//! Both quantities are computed as uncapacitated min-cost flows on the
//! complete graph over the relevant support, which yields a primal transport
//! plan and dual Lipschitz potentials at the same time. The potentials are
//! extended to the whole space by the McShane formula so they remain
//! 1-Lipschitz everywhere.

use std::fmt;
use std::sync::Arc;

use crate::config::Tolerances;
use crate::error::{contract, Error, Result};
use crate::measure::{same_space, SignedMeasure};
use crate::metric::FiniteMetricSpace;
use crate::optim::{solve_flow, solve_lp, FlowProblem, LinearProgram, LpStatus, Objective, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportKind {
    /// Coupling of two nonnegative measures of equal mass.
    W1,
    /// Free-space norm of a signed measure; the basepoint absorbs the net mass.
    Kr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub from: usize,
    pub to: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub kind: TransportKind,
    pub value: f64,
    pub plan: Vec<PlanEntry>,
    /// Dual function `g`, 1-Lipschitz with `g(x̄) = 0`.
    pub potentials: Vec<f64>,
    pub gap: f64,
    /// Net signed supply the plan must realise (`μ − η`, or `μ − μ(X)δ_x̄`).
    pub supply: Vec<f64>,
    space: Arc<FiniteMetricSpace>,
}

impl TransportResult {
    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    /// `Σ π(i,j) d(i,j)` recomputed from the plan.
    pub fn primal_cost(&self) -> f64 {
        self.plan.iter().map(|e| e.mass * self.space.d(e.from, e.to)).sum()
    }

    /// `Σ g(i) · supply(i)`.
    pub fn dual_value(&self) -> f64 {
        self.potentials.iter().zip(&self.supply).map(|(g, s)| g * s).sum()
    }

    fn mass_scale(&self) -> f64 {
        self.supply.iter().filter(|&&s| s > 0.0).sum::<f64>().max(f64::MIN_POSITIVE)
    }
}

/// Solves the transport problem for a zero-net-mass supply vector.
fn transport(space: &Arc<FiniteMetricSpace>, supply: Vec<f64>, kind: TransportKind, tol: &Tolerances) -> Result<TransportResult> {
    let n = space.len();
    let base = space.basepoint();
    let mut nodes: Vec<usize> = (0..n).filter(|&i| supply[i] != 0.0 || i == base).collect();
    nodes.dedup();
    let local: Vec<f64> = nodes.iter().map(|&i| supply[i]).collect();
    let problem = FlowProblem::complete(local, |a, b| space.d(nodes[a], nodes[b]));
    let sol = solve_flow(&problem, tol)?;

    let plan: Vec<PlanEntry> = problem
        .arcs
        .iter()
        .zip(&sol.flow)
        .filter(|(_, &f)| f > 0.0)
        .map(|(a, &f)| PlanEntry { from: nodes[a.from], to: nodes[a.to], mass: f })
        .collect();

    let base_local = nodes.iter().position(|&i| i == base).expect("basepoint kept");
    let shift = sol.potentials[base_local];
    let local_g: Vec<f64> = sol.potentials.iter().map(|p| p - shift).collect();
    let mut potentials = vec![0.0; n];
    for z in 0..n {
        potentials[z] = match nodes.binary_search(&z) {
            Ok(k) => local_g[k],
            Err(_) => nodes
                .iter()
                .zip(&local_g)
                .map(|(&s, &g)| g + space.d(z, s))
                .fold(f64::INFINITY, f64::min),
        };
    }
    potentials[base] = 0.0;

    let mut result = TransportResult {
        kind,
        value: sol.cost,
        plan,
        potentials,
        gap: 0.0,
        supply,
        space: space.clone(),
    };
    result.gap = (result.value - result.dual_value()).abs();
    Ok(result)
}

/// W1 between two nonnegative measures of equal total mass.
pub fn w1(mu: &SignedMeasure, eta: &SignedMeasure, tol: &Tolerances) -> Result<TransportResult> {
    if !same_space(mu.space(), eta.space()) {
        return contract("w1 arguments live on different spaces");
    }
    for (name, m) in [("first", mu), ("second", eta)] {
        if !m.is_nonnegative() {
            return contract(format!(
                "w1 requires nonnegative measures but the {name} argument has negative coefficients; use kr_norm for signed measures"
            ));
        }
    }
    let (a, b) = (mu.total_mass(), eta.total_mass());
    if (a - b).abs() > tol.mass * a.max(b).max(1.0) {
        return contract(format!("w1 requires equal masses: {a} vs {b} (imbalance {:e})", a - b));
    }
    let space = mu.space().clone();
    let supply: Vec<f64> = mu.to_dense().iter().zip(eta.to_dense()).map(|(x, y)| x - y).collect();
    transport(&space, supply, TransportKind::W1, tol)
}

/// `‖μ‖_KR = sup { Σ g μ : g(x̄) = 0, ‖g‖_Lip ≤ 1 }` for any signed measure.
pub fn kr_norm(mu: &SignedMeasure, tol: &Tolerances) -> Result<TransportResult> {
    let space = mu.space().clone();
    let mut supply = mu.to_dense();
    supply[space.basepoint()] -= mu.total_mass();
    transport(&space, supply, TransportKind::Kr, tol)
}

/// KR norm computed by the dense LP over potentials, independently of the flow solver.
///
/// Maximises `Σ g(i) μ(i)` subject to `g(i) − g(j) ≤ d(i, j)` on the support of
/// `μ` together with the basepoint, with `g(x̄) = 0`. Returns the value and
/// the optimal potentials on those points (indexed like the space; zero elsewhere).
pub fn kr_norm_lp(mu: &SignedMeasure, tol: &Tolerances) -> Result<(f64, Vec<f64>)> {
    let space = mu.space();
    let base = space.basepoint();
    let vars: Vec<usize> = mu.support().into_iter().filter(|&i| i != base).collect();
    let k = vars.len();
    let mut g = vec![0.0; space.len()];
    if k == 0 {
        return Ok((0.0, g));
    }
    let cost: Vec<f64> = vars.iter().map(|&i| mu.get(i)).collect();
    let mut lp = LinearProgram::new(Objective::Maximize, cost);
    for j in 0..k {
        lp.set_free(j);
    }
    for a in 0..k {
        lp.add_sparse(&[(a, 1.0)], Sense::Le, space.d(vars[a], base));
        lp.add_sparse(&[(a, -1.0)], Sense::Le, space.d(vars[a], base));
        for b in 0..k {
            if a != b {
                lp.add_sparse(&[(a, 1.0), (b, -1.0)], Sense::Le, space.d(vars[a], vars[b]));
            }
        }
    }
    let sol = solve_lp(&lp, tol)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!("potential LP ended with status {:?}", sol.status)));
    }
    for (a, &i) in vars.iter().enumerate() {
        g[i] = sol.primal[a];
    }
    Ok((sol.objective, g))
}

/// The constraint that failed worst in [`verify_duality`].
#[derive(Debug, Clone, PartialEq)]
pub enum DualityViolation {
    NegativePlan { from: usize, to: usize, mass: f64 },
    Marginal { node: usize, residual: f64 },
    Lipschitz { i: usize, j: usize, excess: f64 },
    Basepoint { value: f64 },
    Gap { primal: f64, dual: f64 },
    Value { reported: f64, primal: f64 },
}

impl fmt::Display for DualityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::NegativePlan { from, to, mass } => write!(f, "plan entry ({from},{to}) is negative: {mass}"),
            Self::Marginal { node, residual } => write!(f, "marginal mismatch at node {node}: {residual:e}"),
            Self::Lipschitz { i, j, excess } => {
                write!(f, "Lipschitz constraint g({i}) - g({j}) <= d({i},{j}) violated by {excess:e}")
            }
            Self::Basepoint { value } => write!(f, "potential at the basepoint is {value}, not 0"),
            Self::Gap { primal, dual } => write!(f, "primal {primal} and dual {dual} disagree"),
            Self::Value { reported, primal } => write!(f, "reported value {reported} but plan costs {primal}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityCheck {
    pub ok: bool,
    /// Worst violation relative to its allowance, if any constraint failed.
    pub worst: Option<DualityViolation>,
}

/// Re-checks every certificate carried by a [`TransportResult`].
///
/// Allowances are `tol · mass` for marginals, `tol · max d` for Lipschitz
/// constraints and `tol · max d · mass` for the objective gap.
pub fn verify_duality(result: &TransportResult, tol: f64) -> DualityCheck {
    let space = &result.space;
    let n = space.len();
    let mass = result.mass_scale();
    let dmax = space.max_distance().max(f64::MIN_POSITIVE);
    let mut worst: Option<(f64, DualityViolation)> = None;
    let mut consider = |ratio: f64, v: DualityViolation| {
        if ratio > 1.0 && worst.as_ref().is_none_or(|(r, _)| ratio > *r) {
            worst = Some((ratio, v));
        }
    };

    let mut net = vec![0.0; n];
    for e in &result.plan {
        consider(-e.mass / (tol * mass), DualityViolation::NegativePlan { from: e.from, to: e.to, mass: e.mass });
        net[e.from] += e.mass;
        net[e.to] -= e.mass;
    }
    for i in 0..n {
        let residual = net[i] - result.supply[i];
        consider(residual.abs() / (tol * mass), DualityViolation::Marginal { node: i, residual });
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let excess = result.potentials[i] - result.potentials[j] - space.d(i, j);
                consider(excess / (tol * dmax), DualityViolation::Lipschitz { i, j, excess });
            }
        }
    }
    if result.kind == TransportKind::Kr {
        let value = result.potentials[space.basepoint()];
        consider(value.abs() / (tol * dmax), DualityViolation::Basepoint { value });
    }
    let primal = result.primal_cost();
    let dual = result.dual_value();
    consider((primal - dual).abs() / (tol * dmax * mass), DualityViolation::Gap { primal, dual });
    consider(
        (primal - result.value).abs() / (tol * dmax * mass),
        DualityViolation::Value { reported: result.value, primal },
    );
    DualityCheck { ok: worst.is_none(), worst: worst.map(|(_, v)| v) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use proptest::prelude::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn three() -> Arc<FiniteMetricSpace> {
        Arc::new(gen::three_point_space())
    }

    fn dirac(s: &Arc<FiniteMetricSpace>, i: usize) -> SignedMeasure {
        SignedMeasure::dirac(s.clone(), i)
    }

    #[test]
    fn w1_examples() {
        let s = three();
        let r = w1(&dirac(&s, 1), &dirac(&s, 2), &tol()).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);
        assert!(verify_duality(&r, 1e-9).ok);

        let mu = SignedMeasure::new(s.clone(), [(0, 0.3), (1, 0.7)]).unwrap();
        assert_eq!(w1(&mu, &mu, &tol()).unwrap().value, 0.0);

        let half = SignedMeasure::new(s.clone(), [(0, 0.5), (1, 0.5)]).unwrap();
        let r = w1(&half, &dirac(&s, 2), &tol()).unwrap();
        assert!((r.value - 1.75).abs() < 1e-12);
        assert!(verify_duality(&r, 1e-9).ok);
    }

    #[test]
    fn w1_rejects_bad_inputs() {
        let s = three();
        let two = dirac(&s, 1).scale(2.0);
        let err = w1(&two, &dirac(&s, 2), &tol()).unwrap_err();
        assert!(matches!(err, Error::Contract(ref m) if m.contains("imbalance")));
        let signed = dirac(&s, 1).sub(&dirac(&s, 2)).unwrap();
        let err = w1(&signed, &SignedMeasure::zero(s.clone()), &tol()).unwrap_err();
        assert!(matches!(err, Error::Contract(ref m) if m.contains("kr_norm")));
    }

    #[test]
    fn kr_examples() {
        let s = three();
        let r = kr_norm(&dirac(&s, 0), &tol()).unwrap();
        assert_eq!(r.value, 0.0);
        let r = kr_norm(&dirac(&s, 1).sub(&dirac(&s, 2)).unwrap(), &tol()).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);
        assert_eq!(r.potentials[0], 0.0);
        let r = kr_norm(&dirac(&s, 1), &tol()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(verify_duality(&r, 1e-9).ok);
    }

    #[test]
    fn kr_value_by_vertex_enumeration() {
        // kr(δ_b) = max g_b over |g_b| ≤ d(a,b), |g_c| ≤ d(a,c), |g_b − g_c| ≤ d(b,c):
        // vertices of the polytope in (g_b, g_c) — enumerate pairs of tight constraints.
        let s = three();
        let lines: [(f64, f64, f64); 6] = [
            (1.0, 0.0, 1.0),
            (-1.0, 0.0, 1.0),
            (0.0, 1.0, 2.0),
            (0.0, -1.0, 2.0),
            (1.0, -1.0, 1.5),
            (-1.0, 1.0, 1.5),
        ];
        let mut best = f64::NEG_INFINITY;
        for a in 0..6 {
            for b in a + 1..6 {
                let (p, q) = (lines[a], lines[b]);
                let det = p.0 * q.1 - p.1 * q.0;
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (p.2 * q.1 - p.1 * q.2) / det;
                let y = (p.0 * q.2 - p.2 * q.0) / det;
                if lines.iter().all(|l| l.0 * x + l.1 * y <= l.2 + 1e-12) {
                    best = best.max(x);
                }
            }
        }
        assert_eq!(best, 1.0);
        assert!((kr_norm(&dirac(&s, 1), &tol()).unwrap().value - best).abs() < 1e-12);
        assert!((kr_norm_lp(&dirac(&s, 1), &tol()).unwrap().0 - best).abs() < 1e-12);
    }

    #[test]
    fn moment_bound_example() {
        let s = three();
        let mu = dirac(&s, 1).sub(&dirac(&s, 2)).unwrap();
        assert_eq!(mu.freespace_moment_bound(), 3.0);
        assert!((kr_norm(&mu, &tol()).unwrap().value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn corrupted_certificates_are_caught() {
        let s = three();
        let half = SignedMeasure::new(s.clone(), [(0, 0.5), (1, 0.5)]).unwrap();
        let r = w1(&half, &dirac(&s, 2), &tol()).unwrap();
        let t = 1e-9;

        let mut bumped = r.clone();
        let src = r.plan[0].from;
        bumped.potentials[src] += 10.0 * t * s.max_distance();
        let check = verify_duality(&bumped, t);
        assert!(!check.ok);
        assert!(matches!(check.worst, Some(DualityViolation::Lipschitz { i, .. }) if i == src));

        let mut negated = r.clone();
        negated.plan[0].mass = -negated.plan[0].mass;
        let check = verify_duality(&negated, t);
        assert!(!check.ok);
        assert!(matches!(check.worst, Some(DualityViolation::Marginal { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn w1_is_a_metric(seed in 0u64..10_000, n in 2usize..=10) {
            let s = Arc::new(gen::random_euclidean_space(seed, n, 2));
            let mut rng = gen::rng(seed ^ 0x5eed);
            let a = gen::random_probability(&mut rng, &s);
            let b = gen::random_probability(&mut rng, &s);
            let c = gen::random_probability(&mut rng, &s);
            let ab = w1(&a, &b, &tol()).unwrap().value;
            let ba = w1(&b, &a, &tol()).unwrap().value;
            let bc = w1(&b, &c, &tol()).unwrap().value;
            let ac = w1(&a, &c, &tol()).unwrap().value;
            let scale = s.max_distance();
            prop_assert!((ab - ba).abs() <= 1e-9 * scale);
            prop_assert!(ac <= ab + bc + 3e-9 * scale);
            let kr = kr_norm(&a.sub(&b).unwrap(), &tol()).unwrap().value;
            prop_assert!((kr - ab).abs() <= 1e-9 * scale);
        }

        #[test]
        fn kr_is_homogeneous_and_bounded(seed in 0u64..10_000, n in 1usize..=10, c in -20.0f64..20.0) {
            let s = Arc::new(gen::random_euclidean_space(seed, n, 2));
            let mut rng = gen::rng(seed);
            let mu = gen::random_signed_measure(&mut rng, &s);
            let r = kr_norm(&mu, &tol()).unwrap();
            prop_assert!(verify_duality(&r, 1e-9).ok);
            prop_assert!(r.value <= mu.freespace_moment_bound() + 1e-9 * s.max_distance());
            let scaled = kr_norm(&mu.scale(c), &tol()).unwrap().value;
            prop_assert!((scaled - c.abs() * r.value).abs() <= 1e-12 * (c.abs() * r.value).max(1e-300));
        }

        #[test]
        fn kr_matches_potential_lp(seed in 0u64..10_000, n in 1usize..=8) {
            let s = Arc::new(gen::random_euclidean_space(seed, n, 3));
            let mut rng = gen::rng(seed + 1);
            let mu = gen::random_signed_measure(&mut rng, &s);
            let flow = kr_norm(&mu, &tol()).unwrap().value;
            let (lp, _) = kr_norm_lp(&mu, &tol()).unwrap();
            prop_assert!((flow - lp).abs() <= 1e-9 * (1.0 + flow));
        }
    }
}
