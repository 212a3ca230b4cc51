//! Dense revised simplex (two-phase, Bland's rule) with dual extraction.
//!
//! The basis inverse is kept as an explicit dense matrix and refactorised
//! every [`REINVERT_EVERY`] pivots. Constraint columns are stored sparsely
//! since most rows produced by the callers are very sparse.

use crate::config::Tolerances;
use crate::error::{contract, Result};

const REINVERT_EVERY: usize = 64;
const MAX_ITERATIONS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `opt cᵀx` subject to row constraints and per-variable bounds.
///
/// Bounds default to `[0, ∞)`; use `f64::NEG_INFINITY` / `f64::INFINITY`
/// for open ends.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Objective,
    pub cost: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    pub fn new(objective: Objective, cost: Vec<f64>) -> Self {
        let n = cost.len();
        Self { objective, cost, constraints: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }

    /// Adds a constraint given as `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64) -> &mut Self {
        let mut coeffs = vec![0.0; self.cost.len()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_constraint(coeffs, sense, rhs)
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[j] = (lower, upper);
        self
    }

    pub fn set_free(&mut self, j: usize) -> &mut Self {
        self.set_bounds(j, f64::NEG_INFINITY, f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// Shadow price of each constraint: `∂ objective / ∂ rhs`.
    pub dual: Vec<f64>,
    pub objective: f64,
    /// Objective of the dual program evaluated at the extracted multipliers.
    pub dual_objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    fn without_solution(status: LpStatus, n: usize, m: usize, iterations: usize) -> Self {
        let obj = match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::NAN,
        };
        Self {
            status,
            primal: vec![f64::NAN; n],
            dual: vec![f64::NAN; m],
            objective: obj,
            dual_objective: obj,
            iterations,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = shift + x'`
    Shift { col: usize, shift: f64 },
    /// `x = upper − x'`
    Mirror { col: usize, upper: f64 },
    /// `x = x⁺ − x⁻`
    Split { pos: usize, neg: usize },
}

/// Standard form `min cᵀx, Ax = b, x ≥ 0` with `b ≥ 0`.
struct Standard {
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    /// ±1 per row: the factor applied to make `rhs ≥ 0`.
    row_sign: Vec<f64>,
    /// Column index that can start in the basis for each row, if any.
    unit_col: Vec<Option<usize>>,
    vars: Vec<VarMap>,
    offset: f64,
}

fn standardize(p: &LinearProgram) -> Result<Standard> {
    let n = p.cost.len();
    if p.bounds.len() != n {
        return contract(format!("{} bounds for {} variables", p.bounds.len(), n));
    }
    for (i, c) in p.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return contract(format!("constraint {i} has {} coefficients, expected {n}", c.coeffs.len()));
        }
        if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
            return contract(format!("constraint {i} has non-finite entries"));
        }
    }
    if p.cost.iter().any(|c| !c.is_finite()) {
        return contract("objective has non-finite entries");
    }
    for (j, &(l, u)) in p.bounds.iter().enumerate() {
        if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
            return contract(format!("variable {j} has invalid bounds [{l}, {u}]"));
        }
    }
    let sign = if p.objective == Objective::Maximize { -1.0 } else { 1.0 };

    let mut cols: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut cost = Vec::new();
    let mut vars = Vec::with_capacity(n);
    let mut offset = 0.0;
    let m0 = p.constraints.len();
    let mut rhs: Vec<f64> = p.constraints.iter().map(|c| c.rhs).collect();
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();

    let column = |j: usize, factor: f64| -> Vec<(usize, f64)> {
        p.constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.coeffs[j] != 0.0)
            .map(|(i, c)| (i, factor * c.coeffs[j]))
            .collect()
    };

    for j in 0..n {
        let (l, u) = p.bounds[j];
        let cj = sign * p.cost[j];
        if l.is_finite() {
            let col = cols.len();
            cols.push(column(j, 1.0));
            cost.push(cj);
            offset += cj * l;
            for (i, c) in p.constraints.iter().enumerate() {
                rhs[i] -= c.coeffs[j] * l;
            }
            if u.is_finite() {
                bound_rows.push((col, u - l));
            }
            vars.push(VarMap::Shift { col, shift: l });
        } else if u.is_finite() {
            let col = cols.len();
            cols.push(column(j, -1.0));
            cost.push(-cj);
            offset += cj * u;
            for (i, c) in p.constraints.iter().enumerate() {
                rhs[i] -= c.coeffs[j] * u;
            }
            vars.push(VarMap::Mirror { col, upper: u });
        } else {
            let pos = cols.len();
            cols.push(column(j, 1.0));
            cols.push(column(j, -1.0));
            cost.push(cj);
            cost.push(-cj);
            vars.push(VarMap::Split { pos, neg: pos + 1 });
        }
    }

    let mut senses: Vec<Sense> = p.constraints.iter().map(|c| c.sense).collect();
    for &(col, width) in &bound_rows {
        let row = rhs.len();
        cols[col].push((row, 1.0));
        rhs.push(width);
        senses.push(Sense::Le);
    }
    let m = rhs.len();
    debug_assert_eq!(m, m0 + bound_rows.len());

    let mut row_sign = vec![1.0; m];
    for i in 0..m {
        if rhs[i] < 0.0 {
            row_sign[i] = -1.0;
            rhs[i] = -rhs[i];
        }
    }
    for col in cols.iter_mut() {
        for (i, a) in col.iter_mut() {
            *a *= row_sign[*i];
        }
    }
    let mut unit_col = vec![None; m];
    for i in 0..m {
        let slack = match senses[i] {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
            Sense::Eq => continue,
        } * row_sign[i];
        let col = cols.len();
        cols.push(vec![(i, slack)]);
        cost.push(0.0);
        if slack > 0.0 {
            unit_col[i] = Some(col);
        }
    }
    Ok(Standard { cols, cost, rhs, row_sign, unit_col, vars, offset })
}

struct Tableau<'a> {
    std: &'a Standard,
    /// Columns of the standard form followed by one artificial per row lacking a unit column.
    cols: Vec<Vec<(usize, f64)>>,
    n_real: usize,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_reinvert: usize,
    tol: Tolerances,
}

enum StepResult {
    Optimal,
    Unbounded,
    Pivoted,
}

impl<'a> Tableau<'a> {
    fn new(std: &'a Standard, tol: Tolerances) -> Self {
        let m = std.rhs.len();
        let mut cols = std.cols.clone();
        let n_real = cols.len();
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            match std.unit_col[i] {
                Some(c) => basis.push(c),
                None => {
                    basis.push(cols.len());
                    cols.push(vec![(i, 1.0)]);
                }
            }
        }
        let mut in_basis = vec![false; cols.len()];
        for &b in &basis {
            in_basis[b] = true;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let xb = std.rhs.clone();
        Self { std, cols, n_real, basis, in_basis, binv, xb, iterations: 0, since_reinvert: 0, tol }
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n_real
    }

    /// `yᵀ = c_Bᵀ B⁻¹`.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut y = vec![0.0; m];
        for (k, &b) in self.basis.iter().enumerate() {
            let cb = cost.get(b).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for i in 0..m {
                    y[i] += cb * row[i];
                }
            }
        }
        y
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m();
        let mut alpha = vec![0.0; m];
        for &(i, a) in &self.cols[j] {
            for k in 0..m {
                alpha[k] += self.binv[k * m + i] * a;
            }
        }
        alpha
    }

    fn pivot(&mut self, r: usize, j: usize, alpha: &[f64]) {
        let m = self.m();
        let theta = self.xb[r].max(0.0) / alpha[r];
        for k in 0..m {
            if k != r {
                self.xb[k] -= theta * alpha[k];
            }
        }
        self.xb[r] = theta;
        let inv = 1.0 / alpha[r];
        for i in 0..m {
            self.binv[r * m + i] *= inv;
        }
        for k in 0..m {
            if k == r || alpha[k] == 0.0 {
                continue;
            }
            let f = alpha[k];
            for i in 0..m {
                self.binv[k * m + i] -= f * self.binv[r * m + i];
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.in_basis[j] = true;
        self.basis[r] = j;
        self.iterations += 1;
        self.since_reinvert += 1;
        if self.since_reinvert >= REINVERT_EVERY {
            self.reinvert();
        }
    }

    /// Rebuilds `B⁻¹` from scratch by Gauss–Jordan with partial pivoting.
    fn reinvert(&mut self) {
        let m = self.m();
        let mut b = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for &(i, a) in &self.cols[j] {
                b[i * m + k] = a;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&x, &y| b[x * m + c].abs().total_cmp(&b[y * m + c].abs()))
                .unwrap();
            if b[piv * m + c].abs() < 1e-14 {
                // Singular refactorisation: keep the product-form inverse.
                self.since_reinvert = 0;
                return;
            }
            if piv != c {
                for i in 0..m {
                    b.swap(piv * m + i, c * m + i);
                    inv.swap(piv * m + i, c * m + i);
                }
            }
            let d = 1.0 / b[c * m + c];
            for i in 0..m {
                b[c * m + i] *= d;
                inv[c * m + i] *= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = b[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for i in 0..m {
                    b[r * m + i] -= f * b[c * m + i];
                    inv[r * m + i] -= f * inv[c * m + i];
                }
            }
        }
        self.binv = inv;
        for k in 0..m {
            self.xb[k] = (0..m).map(|i| self.binv[k * m + i] * self.std.rhs[i]).sum();
        }
        self.since_reinvert = 0;
    }

    /// One Bland-rule iteration for the objective `cost` (indexed over all columns).
    fn step(&mut self, cost: &[f64], allow_artificial: bool) -> StepResult {
        let y = self.duals(cost);
        let mut entering = None;
        for j in 0..self.cols.len() {
            if self.in_basis[j] || (!allow_artificial && self.is_artificial(j)) {
                continue;
            }
            let cj = cost.get(j).copied().unwrap_or(0.0);
            let dj = cj - self.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>();
            if dj < -self.tol.lp {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else {
            return StepResult::Optimal;
        };
        let alpha = self.ftran(j);
        let mut leave: Option<(usize, f64)> = None;
        for k in 0..self.m() {
            if alpha[k] > self.tol.lp_pivot {
                let theta = self.xb[k].max(0.0) / alpha[k];
                leave = match leave {
                    None => Some((k, theta)),
                    Some((r, best)) => {
                        let tie = (theta - best).abs() <= 1e-12 * (1.0 + best);
                        if theta < best && !tie || tie && self.basis[k] < self.basis[r] {
                            Some((k, theta.min(best)))
                        } else {
                            Some((r, best.min(theta)))
                        }
                    }
                };
            }
        }
        let Some((r, _)) = leave else {
            return StepResult::Unbounded;
        };
        self.pivot(r, j, &alpha);
        StepResult::Pivoted
    }

    fn run(&mut self, cost: &[f64], allow_artificial: bool) -> Option<StepResult> {
        while self.iterations < MAX_ITERATIONS {
            match self.step(cost, allow_artificial) {
                StepResult::Pivoted => continue,
                other => return Some(other),
            }
        }
        None
    }

    fn objective(&self, cost: &[f64]) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .map(|(&b, &x)| cost.get(b).copied().unwrap_or(0.0) * x)
            .sum()
    }

    /// Pivots zero-level artificials out of the basis where a real column allows it.
    fn expel_artificials(&mut self) {
        for r in 0..self.m() {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let m = self.m();
            let row: Vec<f64> = self.binv[r * m..(r + 1) * m].to_vec();
            let candidate = (0..self.n_real).find(|&j| {
                !self.in_basis[j]
                    && self.cols[j].iter().map(|&(i, a)| row[i] * a).sum::<f64>().abs()
                        > self.tol.lp_pivot
            });
            if let Some(j) = candidate {
                let alpha = self.ftran(j);
                self.pivot(r, j, &alpha);
            }
        }
    }
}

/// Solves `p` by the two-phase revised simplex method.
///
/// Returns `Err` only for malformed programs; infeasibility and
/// unboundedness are reported through [`LpSolution::status`].
pub fn solve_lp(p: &LinearProgram, tol: &Tolerances) -> Result<LpSolution> {
    let std = standardize(p)?;
    let n = p.num_vars();
    let m_orig = p.constraints.len();
    let mut t = Tableau::new(&std, *tol);

    let has_artificial = t.cols.len() > t.n_real;
    if has_artificial {
        let phase1: Vec<f64> = (0..t.cols.len()).map(|j| if t.is_artificial(j) { 1.0 } else { 0.0 }).collect();
        if t.run(&phase1, true).is_none() {
            return Err(crate::Error::Solver("simplex iteration limit reached in phase I".into()));
        }
        t.reinvert();
        let infeas = t.objective(&phase1);
        let scale = 1.0 + std.rhs.iter().fold(0.0f64, |a, &b| a.max(b));
        if infeas > tol.lp * scale {
            return Ok(LpSolution::without_solution(LpStatus::Infeasible, n, m_orig, t.iterations));
        }
        t.expel_artificials();
    }

    let phase2 = std.cost.clone();
    match t.run(&phase2, false) {
        None => return Err(crate::Error::Solver("simplex iteration limit reached in phase II".into())),
        Some(StepResult::Unbounded) => {
            return Ok(LpSolution::without_solution(LpStatus::Unbounded, n, m_orig, t.iterations));
        }
        Some(_) => {}
    }
    t.reinvert();

    let mut x_std = vec![0.0; t.cols.len()];
    for (k, &b) in t.basis.iter().enumerate() {
        x_std[b] = t.xb[k].max(0.0);
    }
    let primal: Vec<f64> = std
        .vars
        .iter()
        .map(|v| match *v {
            VarMap::Shift { col, shift } => shift + x_std[col],
            VarMap::Mirror { col, upper } => upper - x_std[col],
            VarMap::Split { pos, neg } => x_std[pos] - x_std[neg],
        })
        .collect();
    let sign = if p.objective == Objective::Maximize { -1.0 } else { 1.0 };
    let objective = p.cost.iter().zip(&primal).map(|(c, x)| c * x).sum();
    let y = t.duals(&phase2);
    let dual: Vec<f64> = (0..m_orig).map(|i| sign * y[i] * std.row_sign[i]).collect();
    let dual_std: f64 = y.iter().zip(&std.rhs).map(|(a, b)| a * b).sum();
    let dual_objective = sign * (dual_std + std.offset);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        dual,
        objective,
        dual_objective,
        iterations: t.iterations,
    })
}
