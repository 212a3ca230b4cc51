//! Exact optimisation kernels shared by the transport and projection modules.

mod flow;
mod lp;

pub use flow::{solve_flow, FlowArc, FlowProblem, FlowSolution};
pub use lp::{solve_lp, Constraint, LinearProgram, LpSolution, LpStatus, Objective, Sense};
