//! Successive-shortest-path min-cost flow with node potentials.

use crate::config::Tolerances;
use crate::error::{contract, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
    /// `None` means uncapacitated.
    pub capacity: Option<f64>,
}

/// `min Σ cₐ xₐ` subject to `outflow(i) − inflow(i) = supplies[i]`, `0 ≤ xₐ ≤ uₐ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowProblem {
    pub supplies: Vec<f64>,
    pub arcs: Vec<FlowArc>,
}

impl FlowProblem {
    /// Uncapacitated problem on the complete digraph with arc costs `cost[i][j]`.
    pub fn complete(supplies: Vec<f64>, cost: impl Fn(usize, usize) -> f64) -> Self {
        let n = supplies.len();
        let mut arcs = Vec::with_capacity(n * n.saturating_sub(1));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    arcs.push(FlowArc { from: i, to: j, cost: cost(i, j), capacity: None });
                }
            }
        }
        Self { supplies, arcs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// Flow on each arc, aligned with `FlowProblem::arcs`.
    pub flow: Vec<f64>,
    /// Node prices `p` with `p[u] − p[v] ≤ c(u,v)` on every arc with spare capacity.
    pub potentials: Vec<f64>,
    pub cost: f64,
    /// `Σ bᵢ pᵢ − Σ uₐ (p[u] − p[v] − cₐ)⁺`, equal to `cost` at optimality.
    pub dual_objective: f64,
}

struct Residual {
    to: usize,
    arc: usize,
    forward: bool,
}

pub fn solve_flow(p: &FlowProblem, tol: &Tolerances) -> Result<FlowSolution> {
    let n = p.supplies.len();
    for (k, a) in p.arcs.iter().enumerate() {
        if a.from >= n || a.to >= n {
            return contract(format!("arc {k} references a node outside 0..{n}"));
        }
        if !a.cost.is_finite() || a.cost < 0.0 {
            return contract(format!("arc {k} has invalid cost {}", a.cost));
        }
        if let Some(u) = a.capacity {
            if !u.is_finite() || u < 0.0 {
                return contract(format!("arc {k} has invalid capacity {u}"));
            }
        }
    }
    if let Some(i) = p.supplies.iter().position(|s| !s.is_finite()) {
        return contract(format!("non-finite supply at node {i}"));
    }
    let positive: f64 = p.supplies.iter().filter(|&&s| s > 0.0).sum();
    let imbalance: f64 = p.supplies.iter().sum();
    if imbalance.abs() > tol.mass * positive.max(1.0) {
        return contract(format!("supplies do not balance: net {imbalance:e}"));
    }

    let mut adj: Vec<Vec<Residual>> = (0..n).map(|_| Vec::new()).collect();
    for (k, a) in p.arcs.iter().enumerate() {
        adj[a.from].push(Residual { to: a.to, arc: k, forward: true });
        adj[a.to].push(Residual { to: a.from, arc: k, forward: false });
    }

    let residual_cap = |flow: &[f64], r: &Residual| -> f64 {
        if r.forward {
            match p.arcs[r.arc].capacity {
                Some(u) => u - flow[r.arc],
                None => f64::INFINITY,
            }
        } else {
            flow[r.arc]
        }
    };
    let residual_cost = |r: &Residual| if r.forward { p.arcs[r.arc].cost } else { -p.arcs[r.arc].cost };

    let stop = 4.0 * f64::EPSILON * positive.max(1.0) * (n.max(1) as f64);
    let mut excess = p.supplies.clone();
    let mut flow = vec![0.0; p.arcs.len()];
    let mut price = vec![0.0f64; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut done = vec![false; n];

    loop {
        if !excess.iter().any(|&e| e > stop) || !excess.iter().any(|&e| e < -stop) {
            break;
        }
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        parent.iter_mut().for_each(|q| *q = None);
        done.iter_mut().for_each(|d| *d = false);
        for i in 0..n {
            if excess[i] > stop {
                dist[i] = 0.0;
            }
        }
        // Dense Dijkstra: the graphs used here are (nearly) complete.
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for i in 0..n {
                if !done[i] && dist[i] < best {
                    best = dist[i];
                    u = i;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for (slot, r) in adj[u].iter().enumerate() {
                if done[r.to] || residual_cap(&flow, r) <= 0.0 {
                    continue;
                }
                let rc = (residual_cost(r) + price[u] - price[r.to]).max(0.0);
                let cand = dist[u] + rc;
                if cand < dist[r.to] {
                    dist[r.to] = cand;
                    parent[r.to] = Some((u, slot));
                }
            }
        }

        let target = (0..n)
            .filter(|&i| excess[i] < -stop && dist[i].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]));
        let Some(t) = target else {
            return Err(Error::Contract(
                "flow problem is infeasible: remaining demand unreachable from supply".into(),
            ));
        };
        let horizon = dist[t];
        for i in 0..n {
            price[i] += dist[i].min(horizon);
        }

        let mut delta = -excess[t];
        let mut v = t;
        while let Some((u, slot)) = parent[v] {
            delta = delta.min(residual_cap(&flow, &adj[u][slot]));
            v = u;
        }
        let s = v;
        delta = delta.min(excess[s]);

        let mut v = t;
        while let Some((u, slot)) = parent[v] {
            let r = &adj[u][slot];
            let a = r.arc;
            if r.forward {
                let cap = residual_cap(&flow, r);
                flow[a] = if delta >= cap { p.arcs[a].capacity.unwrap_or(f64::INFINITY) } else { flow[a] + delta };
            } else if delta >= flow[a] {
                flow[a] = 0.0;
            } else {
                flow[a] -= delta;
            }
            v = u;
        }
        excess[s] = if delta >= excess[s] { 0.0 } else { excess[s] - delta };
        excess[t] = if delta >= -excess[t] { 0.0 } else { excess[t] + delta };
    }

    let potentials: Vec<f64> = price.iter().map(|&x| -x).collect();
    let cost = p.arcs.iter().zip(&flow).map(|(a, f)| a.cost * f).sum();
    let mut dual_objective: f64 = p.supplies.iter().zip(&potentials).map(|(b, q)| b * q).sum();
    for a in &p.arcs {
        if let Some(u) = a.capacity {
            let over = potentials[a.from] - potentials[a.to] - a.cost;
            if over > 0.0 {
                dual_objective -= u * over;
            }
        }
    }
    Ok(FlowSolution { flow, potentials, cost, dual_objective })
}
