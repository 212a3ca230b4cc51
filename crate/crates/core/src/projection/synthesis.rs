use std::sync::Arc;

use crate::config::Tolerances;
use crate::error::{contract, Error, Result};
use crate::measure::SignedMeasure;
use crate::metric::{FiniteMetricSpace, Subspace};
use crate::optim::{solve_lp, LinearProgram, LpStatus, Objective, Sense};
use crate::transport::kr_norm;

use super::{projection_constant, RandomProjection};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMode {
    /// Rows are probability measures on `M`.
    Strong,
    /// Rows are arbitrary signed measures on `M`, compared modulo `δ_x̄`.
    Signed,
}

impl std::str::FromStr for SynthesisMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(Self::Strong),
            "signed" => Ok(Self::Signed),
            other => Err(Error::Malformed(format!("unknown mode {other:?}; expected strong or signed"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    /// Optimal value of the synthesis LP.
    pub k_star: f64,
    /// Projection assembled from the optimal rows.
    pub projection: RandomProjection,
    /// `projection_constant` of `projection`, recomputed by exact flows.
    pub achieved: f64,
    pub lp_iterations: usize,
}

/// Indices of the LP variables describing one row and the flow blocks.
struct Layout {
    members: Vec<usize>,
    exterior: Vec<usize>,
    /// `row_var[e][a]`: coefficient of `members[a]` in the row of `exterior[e]`,
    /// `None` for coefficients that are not variables (the basepoint in signed mode).
    row_var: Vec<Vec<Option<usize>>>,
    n_vars: usize,
}

/// Minimal `K` over all strong (resp. signed) projections onto `M`, by one joint LP.
///
/// The LP has `K`, the exterior row coefficients, and for each pair of points that
/// is not inside `M` a transshipment flow on `M` whose cost is bounded by `K d(x, y)`.
/// In strong mode, pairs with one point in `M` need no flow: moving a probability
/// measure onto `δ_y` costs exactly `Σ_m d(m, y) υ_x(m)`.
pub fn synthesize_min_k(subset: &Subspace, mode: SynthesisMode, tol: &Tolerances) -> Result<SynthesisResult> {
    let space = subset.parent().clone();
    if subset.is_full() {
        let projection = RandomProjection::identity(subset.clone())?;
        let k = if space.len() >= 2 { 1.0 } else { 0.0 };
        return Ok(SynthesisResult { k_star: k, projection, achieved: k, lp_iterations: 0 });
    }
    let base = space.basepoint();
    let members = subset.members().to_vec();
    let exterior = subset.exterior();
    let k = members.len();

    let mut n_vars = 1;
    let row_var: Vec<Vec<Option<usize>>> = exterior
        .iter()
        .map(|_| {
            members
                .iter()
                .map(|&m| {
                    if mode == SynthesisMode::Signed && m == base {
                        None
                    } else {
                        n_vars += 1;
                        Some(n_vars - 1)
                    }
                })
                .collect()
        })
        .collect();
    let layout = Layout { members, exterior, row_var, n_vars };

    // Collect constraints as sparse rows first; the flow variables are appended as we go.
    let mut rows: Vec<(Vec<(usize, f64)>, Sense, f64)> = Vec::new();
    let mut n_vars = layout.n_vars;
    let mut free_vars = Vec::new();

    if mode == SynthesisMode::Strong {
        for vars in &layout.row_var {
            let terms: Vec<(usize, f64)> = vars.iter().map(|v| (v.expect("strong rows are all variables"), 1.0)).collect();
            rows.push((terms, Sense::Eq, 1.0));
        }
    } else {
        free_vars.extend(layout.row_var.iter().flatten().flatten().copied());
    }

    let n = space.len();
    let ext_index: Vec<Option<usize>> = {
        let mut v = vec![None; n];
        for (e, &x) in layout.exterior.iter().enumerate() {
            v[x] = Some(e);
        }
        v
    };
    // Linear expression of υ_x(members[a]): variable terms plus a constant.
    let coeff = |x: usize, a: usize| -> (Option<usize>, f64) {
        match ext_index[x] {
            Some(e) => (layout.row_var[e][a], 0.0),
            None => (None, if layout.members[a] == x { 1.0 } else { 0.0 }),
        }
    };

    for x in 0..n {
        for y in x + 1..n {
            if ext_index[x].is_none() && ext_index[y].is_none() {
                continue;
            }
            let dxy = space.d(x, y);
            if mode == SynthesisMode::Strong && (ext_index[x].is_none() || ext_index[y].is_none()) {
                // W1(υ_e, δ_m) = Σ_a d(members[a], m) υ_e(a)
                let (e, m) = if ext_index[x].is_some() { (x, y) } else { (y, x) };
                let ei = ext_index[e].expect("exterior");
                let mut terms: Vec<(usize, f64)> = layout.row_var[ei]
                    .iter()
                    .zip(&layout.members)
                    .map(|(v, &a)| (v.expect("strong"), space.d(a, m)))
                    .collect();
                terms.push((0, -dxy));
                rows.push((terms, Sense::Le, 0.0));
                continue;
            }
            // Transshipment on M: out(a) − in(a) = υ_x(a) − υ_y(a) for every node but one.
            let first_flow = n_vars;
            let arc = |a: usize, b: usize| first_flow + a * (k - 1) + if b > a { b - 1 } else { b };
            n_vars += k * (k - 1);
            let mut cost_terms: Vec<(usize, f64)> = Vec::with_capacity(k * (k - 1) + 1);
            for a in 0..k {
                for b in 0..k {
                    if a != b {
                        cost_terms.push((arc(a, b), space.d(layout.members[a], layout.members[b])));
                    }
                }
            }
            cost_terms.push((0, -dxy));
            rows.push((cost_terms, Sense::Le, 0.0));
            for a in 0..k {
                // Strong mode: both rows have mass 1, so the last balance row is implied.
                // Signed mode: the basepoint absorbs the net mass.
                let skip = match mode {
                    SynthesisMode::Strong => a == k - 1,
                    SynthesisMode::Signed => layout.members[a] == base,
                };
                if skip {
                    continue;
                }
                let mut terms = Vec::with_capacity(2 * k);
                for b in 0..k {
                    if a != b {
                        terms.push((arc(a, b), 1.0));
                        terms.push((arc(b, a), -1.0));
                    }
                }
                let mut rhs = 0.0;
                let (vx, cx) = coeff(x, a);
                let (vy, cy) = coeff(y, a);
                if let Some(v) = vx {
                    terms.push((v, -1.0));
                }
                if let Some(v) = vy {
                    terms.push((v, 1.0));
                }
                rhs += cx - cy;
                rows.push((terms, Sense::Eq, rhs));
            }
        }
    }

    let mut cost = vec![0.0; n_vars];
    cost[0] = 1.0;
    let mut lp = LinearProgram::new(Objective::Minimize, cost);
    for (terms, sense, rhs) in &rows {
        lp.add_sparse(terms, *sense, *rhs);
    }
    for v in free_vars {
        lp.set_free(v);
    }
    let lower = if layout.members.len() >= 2 { 1.0 } else { 0.0 };
    lp.set_bounds(0, lower, f64::INFINITY);

    let sol = solve_lp(&lp, tol)?;
    let diag = || {
        format!(
            "{mode:?} synthesis on {} points with |M| = {} ({} variables, {} constraints)",
            n,
            layout.members.len(),
            n_vars,
            rows.len()
        )
    };
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!("{} ended with status {:?}", diag(), sol.status)));
    }
    if (sol.objective - sol.dual_objective).abs() > 1e3 * tol.lp * (1.0 + sol.objective.abs()) {
        return Err(Error::Solver(format!(
            "{}: primal {} and dual {} objectives disagree",
            diag(),
            sol.objective,
            sol.dual_objective
        )));
    }

    let projection = assemble(&space, subset, &layout, &sol.primal, mode, tol)?;
    let achieved = projection_constant(&projection, tol)?;
    Ok(SynthesisResult { k_star: sol.objective, projection, achieved, lp_iterations: sol.iterations })
}

fn assemble(
    space: &Arc<FiniteMetricSpace>,
    subset: &Subspace,
    layout: &Layout,
    x: &[f64],
    mode: SynthesisMode,
    tol: &Tolerances,
) -> Result<RandomProjection> {
    let base = space.basepoint();
    let mut rows: Vec<SignedMeasure> = (0..space.len()).map(|i| SignedMeasure::dirac(space.clone(), i)).collect();
    for (e, &p) in layout.exterior.iter().enumerate() {
        let mut w: Vec<f64> = layout.row_var[e].iter().map(|v| v.map_or(0.0, |v| x[v])).collect();
        match mode {
            SynthesisMode::Strong => {
                // Clear simplex round-off so the row is an exact probability vector.
                w.iter_mut().for_each(|c| *c = c.max(0.0));
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|c| *c /= total);
            }
            SynthesisMode::Signed => {
                let a = layout.members.iter().position(|&m| m == base).expect("basepoint in M");
                w[a] = 1.0 - w.iter().sum::<f64>();
            }
        }
        rows[p] = SignedMeasure::new(space.clone(), layout.members.iter().copied().zip(w))?;
    }
    if mode == SynthesisMode::Strong {
        RandomProjection::new_with_tol(subset.clone(), rows, true, tol.mass.max(1e-12))
    } else {
        RandomProjection::new(subset.clone(), rows, false)
    }
}

/// One step of [`asymptotic_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEntry {
    pub n: usize,
    /// `M_n`, the first `n + 1` points of the order (sorted).
    pub subset: Vec<usize>,
    pub k_star: f64,
    /// `‖υⁿ_x − δ_x‖_KR` for every point `x` of the space.
    pub deviations: Vec<f64>,
    /// Largest deviation over `x ∈ M_n`; zero by construction.
    pub inside_deviation: f64,
    /// Largest deviation over `x ∉ M_n`.
    pub outside_deviation: f64,
}

/// Minimal strong projections onto the growing subsets `M_n` = first `n + 1` points of `order`.
pub fn asymptotic_profile(space: &Arc<FiniteMetricSpace>, order: &[usize], tol: &Tolerances) -> Result<Vec<ProfileEntry>> {
    let n = space.len();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
        return contract("order must be a permutation of the points");
    }
    if order[0] != space.basepoint() {
        return contract(format!("order must start at the basepoint {:?}", space.label(space.basepoint())));
    }
    (0..n)
        .map(|step| {
            let subset = Subspace::new(space.clone(), &order[..=step])?;
            let res = synthesize_min_k(&subset, SynthesisMode::Strong, tol)?;
            let deviations = (0..n)
                .map(|x| {
                    let diff = res.projection.row(x).sub(&SignedMeasure::dirac(space.clone(), x))?;
                    Ok(if diff.is_zero() { 0.0 } else { kr_norm(&diff, tol)?.value })
                })
                .collect::<Result<Vec<f64>>>()?;
            let max_over = |inside: bool| {
                (0..n)
                    .filter(|&x| subset.contains(x) == inside)
                    .map(|x| deviations[x])
                    .fold(0.0, f64::max)
            };
            Ok(ProfileEntry {
                n: step,
                subset: subset.members().to_vec(),
                k_star: res.k_star,
                inside_deviation: max_over(true),
                outside_deviation: max_over(false),
                deviations,
            })
        })
        .collect()
}
