/// Every numerical tolerance used by the solvers and validators.
///
/// All defaults are `1e-9`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Metric admission, relative to the largest distance.
    pub metric: f64,
    /// Mass balance checks, relative to total mass (floored at 1).
    pub mass: f64,
    /// Transport certificates, relative to `max distance × total mass`.
    pub flow: f64,
    /// LP feasibility and optimality.
    pub lp: f64,
    /// Smallest admissible simplex pivot magnitude.
    pub lp_pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            metric: 1e-9,
            mass: 1e-9,
            flow: 1e-9,
            lp: 1e-9,
            lp_pivot: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            metric: tol,
            mass: tol,
            flow: tol,
            lp: tol,
            lp_pivot: tol,
        }
    }
}
